//! Gaussian states: the (μ, τ, z₀) parametrization, the mean/covariance
//! formalism, and the bridge between phase space and the Fock basis.
//!
//! A single-mode Gaussian Wigner function is parametrized by a complex noise
//! parameter μ, a real symmetric-order variance parameter τ and a complex
//! displacement z₀, with moment content
//!
//! ```text
//! ⟨a⟩ = z₀,   ⟨a²⟩ − ⟨a⟩² = −2μ*,   ⟨a†a⟩ − |⟨a⟩|² = τ − 1/2
//! ```
//!
//! which in quadratures (q = (a†+a)/√2, p = i(a†−a)/√2) reads
//!
//! ```text
//! ⟨Δq²⟩ = τ − 2 Re μ,  ⟨Δp²⟩ = τ + 2 Re μ,  ⟨{Δq Δp}_s⟩ = 2 Im μ.
//! ```
//!
//! Physicality (positive semidefinite density operator) is
//! `√(τ² − 4|μ|²) ≥ 1/2`.

use ndarray::prelude::*;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::fock::{annihilation, BeamSplitter, DensityMatrix, LadderMoments};
use crate::linalg::{self, adjoint};

/// The (μ, τ, z₀) parameters of a single-mode Gaussian state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianParams {
    pub mu: C64,
    pub tau: f64,
    pub z0: C64,
}

impl GaussianParams {
    pub fn new(mu: C64, tau: f64, z0: C64) -> Self {
        Self { mu, tau, z0 }
    }

    /// Vacuum: μ = 0, τ = 1/2, z₀ = 0.
    pub fn vacuum() -> Self {
        Self::new(C64::new(0.0, 0.0), 0.5, C64::new(0.0, 0.0))
    }

    /// Thermal state with mean photon number n̄: μ = 0, τ = n̄ + 1/2.
    pub fn thermal(nbar: f64) -> Self {
        Self::new(C64::new(0.0, 0.0), nbar + 0.5, C64::new(0.0, 0.0))
    }

    /// Coherent state |z₀⟩.
    pub fn coherent(z0: C64) -> Self {
        Self::new(C64::new(0.0, 0.0), 0.5, z0)
    }

    /// Pure squeezed vacuum S(ζ)|0⟩ with ζ = s·e^{iφ}:
    /// μ = (sinh s · cosh s / 2)·e^{−iφ}, τ = sinh²s + 1/2.
    pub fn squeezed_vacuum(s: f64, phase: f64) -> Self {
        let mu = C64::from_polar(s.sinh() * s.cosh() / 2.0, -phase);
        Self::new(mu, s.sinh().powi(2) + 0.5, C64::new(0.0, 0.0))
    }

    pub fn with_displacement(mut self, z0: C64) -> Self {
        self.z0 = z0;
        self
    }

    /// The Wigner normalization denominator τ² − 4|μ|².
    pub fn delta(&self) -> f64 {
        self.tau * self.tau - 4.0 * self.mu.norm_sqr()
    }

    /// Positive-semidefiniteness: √(τ² − 4|μ|²) ≥ 1/2 (within 1e-12), with a
    /// positive denominator and τ > 0.
    pub fn is_physical(&self) -> bool {
        let d = self.delta();
        d > 0.0 && self.tau > 0.0 && d.sqrt() >= 0.5 - 1e-12
    }

    pub fn check_physical(&self) -> Result<()> {
        if self.is_physical() {
            Ok(())
        } else {
            Err(Error::UnphysicalGaussian(format!(
                "μ = {}, τ = {}: √(τ²−4|μ|²) = {:.6} must be ≥ 1/2",
                self.mu,
                self.tau,
                self.delta().max(0.0).sqrt()
            )))
        }
    }

    /// Closed-form Wigner function, normalized so that ∫ W dq dp = 1.
    pub fn wigner(&self, q: f64, p: f64) -> f64 {
        let d = self.delta();
        let z = C64::new(q, p) / C64::new(std::f64::consts::SQRT_2, 0.0);
        let dz = z - self.z0;
        let quad = self.mu * dz * dz + self.mu.conj() * dz.conj() * dz.conj()
            + C64::new(self.tau * dz.norm_sqr(), 0.0);
        // the z-plane form carries measure d²z = dq dp / 2
        0.5 / (std::f64::consts::PI * d.sqrt()) * (-quad.re / d).exp()
    }

    /// First and second quadrature moments.
    pub fn to_moments(&self) -> Result<CovarianceState> {
        self.check_physical()?;
        let mean = array![
            std::f64::consts::SQRT_2 * self.z0.re,
            std::f64::consts::SQRT_2 * self.z0.im
        ];
        let cov = array![
            [self.tau - 2.0 * self.mu.re, 2.0 * self.mu.im],
            [2.0 * self.mu.im, self.tau + 2.0 * self.mu.re]
        ];
        CovarianceState::new(mean, cov)
    }

    /// Build the Fock-space density matrix with these moments: a displaced,
    /// squeezed thermal state, composed from matrix exponentials of the
    /// squeeze and displacement generators on a thermal core.
    pub fn to_fock(&self, cutoff: usize) -> Result<DensityMatrix> {
        let mom = self.to_moments()?;
        let v = &mom.cov;
        let det = v[[0, 0]] * v[[1, 1]] - v[[0, 1]] * v[[1, 0]];
        let nu = det.sqrt();
        // thermal-occupation floor keeps pure states (ν = 1/2) numerically tame
        let nbar = (nu - 0.5).max(1e-14);
        let mut tail = (nbar / (1.0 + nbar)).powi(cutoff as i32);
        let mut rho = DensityMatrix::thermal(nbar, cutoff)?;

        // symmetric square root of W = V/ν (det W = 1): (W + I)/√(tr W + 2)
        let w = v.mapv(|x| x / nu);
        let trw = w[[0, 0]] + w[[1, 1]];
        let m_t = (&w + &Array2::<f64>::eye(2)).mapv(|x| x / (trw + 2.0).sqrt());

        // match to the squeeze-operator quadrature action
        // M = [[c − sh·cosφ, −sh·sinφ], [−sh·sinφ, c + sh·cosφ]]
        let c = (m_t[[0, 0]] + m_t[[1, 1]]) / 2.0;
        let sh_cos = (m_t[[1, 1]] - m_t[[0, 0]]) / 2.0;
        let sh_sin = -m_t[[0, 1]];
        let sh = (sh_cos * sh_cos + sh_sin * sh_sin).sqrt();
        if sh > 1e-14 {
            let s = sh.asinh();
            let phi = sh_sin.atan2(sh_cos);
            let zeta = C64::from_polar(s, phi);
            let a = annihilation(cutoff);
            let a2 = a.dot(&a);
            let gen = (a2.mapv(|z| z * zeta.conj()) - adjoint(&a2).mapv(|z| z * zeta))
                .mapv(|z| z * C64::new(0.5, 0.0));
            let u = linalg::expm(&gen)?;
            let data = u.dot(rho.data()).dot(&adjoint(&u));
            rho = DensityMatrix::from_matrix(1, cutoff, data)?;
            let _ = c; // cosh s is implied by sh; kept for the matching above
        }
        if self.z0.norm() > 0.0 {
            let a = annihilation(cutoff);
            let gen = adjoint(&a).mapv(|z| z * self.z0) - a.mapv(|z| z * self.z0.conj());
            let d = linalg::expm(&gen)?;
            let data = d.dot(rho.data()).dot(&adjoint(&d));
            rho = DensityMatrix::from_matrix(1, cutoff, data)?;
        }
        tail += (1.0 - rho.trace().re).max(0.0);
        if tail > 1e-6 {
            return Err(Error::TailMass {
                mass: tail,
                limit: 1e-6,
            });
        }
        rho.normalize();
        Ok(rho)
    }
}

/// First and second symmetric-ordered quadrature moments of a one- or
/// two-mode state: mean vector (⟨q⟩, ⟨p⟩, …) and covariance matrix
/// `V_ij = ⟨{ξ_i ξ_j}_s⟩ − ⟨ξ_i⟩⟨ξ_j⟩` over ξ = (q_a, p_a[, q_b, p_b]).
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceState {
    pub mean: Array1<f64>,
    pub cov: Array2<f64>,
}

impl CovarianceState {
    pub fn new(mean: Array1<f64>, cov: Array2<f64>) -> Result<Self> {
        let d = mean.len();
        if !(d == 2 || d == 4) || cov.nrows() != d || cov.ncols() != d {
            return Err(Error::DimMismatch(d, cov.nrows()));
        }
        let asym = (0..d)
            .flat_map(|i| (0..d).map(move |j| (i, j)))
            .map(|(i, j)| (cov[[i, j]] - cov[[j, i]]).abs())
            .fold(0.0, f64::max);
        if asym > 1e-12 {
            return Err(Error::InvalidState(format!(
                "covariance not symmetric: max asymmetry {asym:.3e}"
            )));
        }
        Ok(Self { mean, cov })
    }

    pub fn modes(&self) -> usize {
        self.mean.len() / 2
    }

    /// Two-mode composition with block-diagonal covariance.
    pub fn tensor(a: &CovarianceState, b: &CovarianceState) -> Result<CovarianceState> {
        if a.modes() != 1 || b.modes() != 1 {
            return Err(Error::ModeMismatch {
                expected: 1,
                got: a.modes().max(b.modes()),
            });
        }
        let mean = array![a.mean[0], a.mean[1], b.mean[0], b.mean[1]];
        let mut cov = Array2::zeros((4, 4));
        for i in 0..2 {
            for j in 0..2 {
                cov[[i, j]] = a.cov[[i, j]];
                cov[[i + 2, j + 2]] = b.cov[[i, j]];
            }
        }
        CovarianceState::new(mean, cov)
    }

    /// Measured moments of a Fock-basis state.
    pub fn from_density_matrix(rho: &DensityMatrix) -> Result<CovarianceState> {
        let m = LadderMoments::of(rho);
        let s2 = std::f64::consts::SQRT_2;
        let block = |mean: C64, a_sq: C64, n: f64| -> [f64; 3] {
            let asq_c = a_sq - mean * mean;
            let n_c = n - mean.norm_sqr();
            [
                asq_c.re + n_c + 0.5,  // ⟨Δq²⟩
                -asq_c.re + n_c + 0.5, // ⟨Δp²⟩
                asq_c.im,              // ⟨{ΔqΔp}_s⟩
            ]
        };
        if rho.modes() == 1 {
            let [qq, pp, qp] = block(m.mean_a, m.a_sq, m.n_a);
            return CovarianceState::new(
                array![s2 * m.mean_a.re, s2 * m.mean_a.im],
                array![[qq, qp], [qp, pp]],
            );
        }
        let mb = m.mean_b.expect("two-mode moments");
        let [aqq, app, aqp] = block(m.mean_a, m.a_sq, m.n_a);
        let [bqq, bpp, bqp] = block(mb, m.b_sq.unwrap(), m.n_b.unwrap());
        let ab_c = m.ab.unwrap() - m.mean_a * mb;
        let abd_c = m.ab_dag.unwrap() - m.mean_a * mb.conj();
        let qaqb = ab_c.re + abd_c.re;
        let papb = -ab_c.re + abd_c.re;
        let qapb = ab_c.im - abd_c.im;
        let paqb = ab_c.im + abd_c.im;
        let mean = array![s2 * m.mean_a.re, s2 * m.mean_a.im, s2 * mb.re, s2 * mb.im];
        let cov = array![
            [aqq, aqp, qaqb, qapb],
            [aqp, app, paqb, papb],
            [qaqb, paqb, bqq, bqp],
            [qapb, papb, bqp, bpp],
        ];
        CovarianceState::new(mean, cov)
    }

    /// Propagate a two-mode state through the beam splitter:
    /// mean → M·mean, cov → M·cov·Mᵀ with M the quadrature matrix.
    pub fn bs_transform(&self, bs: &BeamSplitter) -> Result<CovarianceState> {
        if self.modes() != 2 {
            return Err(Error::ModeMismatch {
                expected: 2,
                got: self.modes(),
            });
        }
        let m = bs.quadrature_matrix();
        let mean = m.dot(&self.mean);
        let cov = m.dot(&self.cov).dot(&m.t());
        CovarianceState::new(mean, cov)
    }

    /// Frobenius norm of the 2×2 a–b cross block; zero exactly when the
    /// Gaussian state factorizes.
    pub fn cross_norm(&self) -> Result<f64> {
        if self.modes() != 2 {
            return Err(Error::ModeMismatch {
                expected: 2,
                got: self.modes(),
            });
        }
        let mut s = 0.0;
        for i in 0..2 {
            for j in 2..4 {
                s += self.cov[[i, j]] * self.cov[[i, j]];
            }
        }
        Ok(s.sqrt())
    }

    fn omega(modes: usize) -> Array2<f64> {
        let mut o = Array2::zeros((2 * modes, 2 * modes));
        for k in 0..modes {
            o[[2 * k, 2 * k + 1]] = 1.0;
            o[[2 * k + 1, 2 * k]] = -1.0;
        }
        o
    }

    /// Symplectic spectrum: the positive eigenvalues of the Hermitian matrix
    /// `V^{1/2} (iΩ) V^{1/2}`, one per mode, each ≥ 1/2 for physical states.
    pub fn symplectic_eigenvalues(&self) -> Result<Vec<f64>> {
        let d = self.mean.len();
        let vc = self.cov.mapv(|x| C64::new(x, 0.0));
        let (w, u) = linalg::eigh(&vc)?;
        if w.iter().any(|x| *x <= 0.0) {
            return Err(Error::InvalidState(
                "covariance matrix is not positive definite".into(),
            ));
        }
        let sqrt_diag = Array2::from_diag(&Array1::from_iter(
            w.iter().map(|x| C64::new(x.sqrt(), 0.0)),
        ));
        let v_half = u.dot(&sqrt_diag).dot(&adjoint(&u));
        let i_omega = Self::omega(d / 2).mapv(|x| C64::new(0.0, x));
        let h = v_half.dot(&i_omega).dot(&v_half);
        let ev = linalg::eigvalsh(&h)?;
        Ok(ev.into_iter().filter(|x| *x > 0.0).collect())
    }

    /// Smallest eigenvalue of `V + (i/2)Ω`; non-negative (within tolerance)
    /// exactly when the uncertainty relation holds.
    pub fn uncertainty_margin(&self) -> Result<f64> {
        let d = self.mean.len();
        let m = self.cov.mapv(|x| C64::new(x, 0.0))
            + Self::omega(d / 2).mapv(|x| C64::new(0.0, 0.5 * x));
        let w = linalg::eigvalsh(&m)?;
        Ok(w.first().copied().unwrap_or(0.0))
    }

    pub fn is_physical(&self) -> Result<bool> {
        Ok(self.uncertainty_margin()? >= -1e-9)
    }

    /// Von Neumann entropy of the Gaussian state with these moments (nats):
    /// Σ g(ν) over the symplectic spectrum, with
    /// g(ν) = (ν+1/2)ln(ν+1/2) − (ν−1/2)ln(ν−1/2).
    pub fn gaussian_entropy(&self) -> Result<f64> {
        Ok(self
            .symplectic_eigenvalues()?
            .iter()
            .map(|nu| entropy_g(*nu))
            .sum())
    }

    /// Mutual information of a two-mode Gaussian state from its covariance
    /// matrix alone — the oracle for the Fock-space value.
    pub fn gaussian_mutual_information(&self) -> Result<f64> {
        if self.modes() != 2 {
            return Err(Error::ModeMismatch {
                expected: 2,
                got: self.modes(),
            });
        }
        let sub = |r: [usize; 2]| {
            CovarianceState::new(
                array![self.mean[r[0]], self.mean[r[1]]],
                array![
                    [self.cov[[r[0], r[0]]], self.cov[[r[0], r[1]]]],
                    [self.cov[[r[1], r[0]]], self.cov[[r[1], r[1]]]]
                ],
            )
        };
        let sa = sub([0, 1])?.gaussian_entropy()?;
        let sb = sub([2, 3])?.gaussian_entropy()?;
        Ok(sa + sb - self.gaussian_entropy()?)
    }

    /// Quadratic coefficient matrix of the operator exponent: for a
    /// single-mode Gaussian ρ = e^{f̂} with f̂ = f₀ + f₂^{ij}{ξ_i ξ_j}_s,
    /// the 2×2 block f₂ = −(γ/2)·W⁻¹ with W = V/ν and
    /// γ = ln((ν+1/2)/(ν−1/2)).
    pub fn exponent_quadratic(&self) -> Result<Array2<f64>> {
        if self.modes() != 1 {
            return Err(Error::ModeMismatch {
                expected: 1,
                got: self.modes(),
            });
        }
        let v = &self.cov;
        let det = v[[0, 0]] * v[[1, 1]] - v[[0, 1]] * v[[1, 0]];
        if det <= 0.0 {
            return Err(Error::InvalidState("covariance not positive".into()));
        }
        let nu = det.sqrt();
        if nu <= 0.5 + 1e-12 {
            return Err(Error::UnphysicalGaussian(
                "pure Gaussian state has no bounded exponent".into(),
            ));
        }
        let gamma = ((nu + 0.5) / (nu - 0.5)).ln();
        // W⁻¹ for the det-1 matrix W = V/ν
        let w_inv = array![
            [v[[1, 1]] / nu, -v[[0, 1]] / nu],
            [-v[[1, 0]] / nu, v[[0, 0]] / nu]
        ];
        Ok(w_inv.mapv(|x| -0.5 * gamma * x))
    }
}

fn entropy_g(nu: f64) -> f64 {
    let up = nu + 0.5;
    let dn = (nu - 0.5).max(0.0);
    let mut s = up * up.ln();
    if dn > 0.0 {
        s -= dn * dn.ln();
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn vacuum_moments_saturate_uncertainty() {
        let m = GaussianParams::vacuum().to_moments().unwrap();
        assert_abs_diff_eq!(m.cov[[0, 0]], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(m.cov[[1, 1]], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(m.mean[0], 0.0, epsilon = 1e-15);
        assert!(m.uncertainty_margin().unwrap().abs() < 1e-12);
    }

    #[test]
    fn thermal_moments_match_fock_variances() {
        let nbar = 1.0;
        let m = GaussianParams::thermal(nbar).to_moments().unwrap();
        assert_abs_diff_eq!(m.cov[[0, 0]], nbar + 0.5, epsilon = 1e-15);
        let rho = DensityMatrix::thermal(nbar, 40).unwrap();
        let mf = CovarianceState::from_density_matrix(&rho).unwrap();
        assert_abs_diff_eq!(mf.cov[[0, 0]], nbar + 0.5, epsilon = 1e-8);
        assert_abs_diff_eq!(mf.cov[[1, 1]], nbar + 0.5, epsilon = 1e-8);
        assert_abs_diff_eq!(mf.cov[[0, 1]], 0.0, epsilon = 1e-10);
    }

    #[test]
    fn coherent_moments_match_fock() {
        let g = GaussianParams::coherent(c(1.0, 0.0));
        let m = g.to_moments().unwrap();
        assert_abs_diff_eq!(m.mean[0], std::f64::consts::SQRT_2, epsilon = 1e-15);
        assert_abs_diff_eq!(m.mean[1], 0.0, epsilon = 1e-15);
        let rho = DensityMatrix::coherent(c(1.0, 0.0), 30).unwrap();
        let mf = CovarianceState::from_density_matrix(&rho).unwrap();
        assert_abs_diff_eq!(mf.mean[0], std::f64::consts::SQRT_2, epsilon = 1e-8);
        assert_abs_diff_eq!(mf.cov[[0, 0]], 0.5, epsilon = 1e-8);
        assert_abs_diff_eq!(mf.cov[[1, 1]], 0.5, epsilon = 1e-8);
    }

    #[test]
    fn quadrature_decomposition_matches_wigner_grid_oracle() {
        // The complex moment relations fix (⟨Δq²⟩, ⟨Δp²⟩, ⟨{ΔqΔp}_s⟩); check
        // them against direct numerical moments of the closed-form Wigner
        // function at sample parameters.
        for g in [
            GaussianParams::new(c(0.1, 0.05), 0.8, c(0.0, 0.0)),
            GaussianParams::new(c(-0.15, 0.2), 1.1, c(0.3, -0.2)),
        ] {
            assert!(g.is_physical());
            let m = g.to_moments().unwrap();
            let (lo, hi, steps) = (-7.0, 7.0, 281);
            let h = (hi - lo) / (steps - 1) as f64;
            let (mut n0, mut mq, mut mp) = (0.0, 0.0, 0.0);
            let (mut vqq, mut vpp, mut vqp) = (0.0, 0.0, 0.0);
            for i in 0..steps {
                let q = lo + i as f64 * h;
                for j in 0..steps {
                    let p = lo + j as f64 * h;
                    let w = g.wigner(q, p) * h * h;
                    n0 += w;
                    mq += q * w;
                    mp += p * w;
                }
            }
            for i in 0..steps {
                let q = lo + i as f64 * h;
                for j in 0..steps {
                    let p = lo + j as f64 * h;
                    let w = g.wigner(q, p) * h * h;
                    vqq += (q - mq) * (q - mq) * w;
                    vpp += (p - mp) * (p - mp) * w;
                    vqp += (q - mq) * (p - mp) * w;
                }
            }
            assert_abs_diff_eq!(n0, 1.0, epsilon = 1e-6);
            assert_abs_diff_eq!(mq, m.mean[0], epsilon = 1e-6);
            assert_abs_diff_eq!(mp, m.mean[1], epsilon = 1e-6);
            assert_abs_diff_eq!(vqq, m.cov[[0, 0]], epsilon = 1e-5);
            assert_abs_diff_eq!(vpp, m.cov[[1, 1]], epsilon = 1e-5);
            assert_abs_diff_eq!(vqp, m.cov[[0, 1]], epsilon = 1e-5);
        }
    }

    #[test]
    fn to_fock_reproduces_thermal() {
        let g = GaussianParams::new(c(0.0, 0.0), 1.5, c(0.0, 0.0));
        let rho = g.to_fock(30).unwrap();
        let t = DensityMatrix::thermal(1.0, 30).unwrap();
        assert!(linalg::max_abs_diff(rho.data(), t.data()) < 1e-8);
    }

    #[test]
    fn to_fock_vacuum() {
        let rho = GaussianParams::vacuum().to_fock(10).unwrap();
        assert_abs_diff_eq!(rho.data()[[0, 0]].re, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn squeezed_roundtrip_through_moments() {
        let s = 0.3;
        let g = GaussianParams::squeezed_vacuum(s, 0.0);
        // parameters recovered from ⟨a²⟩ = −sinh s cosh s, ⟨a†a⟩ = sinh²s
        assert_abs_diff_eq!(g.mu.re, s.sinh() * s.cosh() / 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(g.tau, s.sinh().powi(2) + 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(g.delta(), 0.25, epsilon = 1e-12);

        // brute-force oracle: moments of the squeeze exponential on vacuum
        let direct = DensityMatrix::squeezed(s, 0.0, 30).unwrap();
        let md = CovarianceState::from_density_matrix(&direct).unwrap();
        let mg = g.to_moments().unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert_abs_diff_eq!(md.cov[[i, j]], mg.cov[[i, j]], epsilon = 1e-6);
            }
        }
        let built = g.to_fock(30).unwrap();
        let mb = CovarianceState::from_density_matrix(&built).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert_abs_diff_eq!(mb.cov[[i, j]], mg.cov[[i, j]], epsilon = 1e-6);
            }
        }
    }

    #[test]
    fn to_fock_with_phase_and_displacement_matches_moments() {
        let g = GaussianParams::new(c(0.12, -0.2), 1.05, c(0.4, 0.3));
        assert!(g.is_physical());
        let rho = g.to_fock(36).unwrap();
        rho.validate().unwrap();
        let mf = CovarianceState::from_density_matrix(&rho).unwrap();
        let mg = g.to_moments().unwrap();
        assert_abs_diff_eq!(mf.mean[0], mg.mean[0], epsilon = 1e-6);
        assert_abs_diff_eq!(mf.mean[1], mg.mean[1], epsilon = 1e-6);
        for i in 0..2 {
            for j in 0..2 {
                assert_abs_diff_eq!(mf.cov[[i, j]], mg.cov[[i, j]], epsilon = 1e-6);
            }
        }
    }

    #[test]
    fn bs_transform_identity_and_invariance() {
        let va = GaussianParams::thermal(0.5).to_moments().unwrap();
        let vb = GaussianParams::thermal(0.5).to_moments().unwrap();
        let two = CovarianceState::tensor(&va, &vb).unwrap();
        let out = two.bs_transform(&BeamSplitter::new(0.0)).unwrap();
        assert_eq!(out.cov, two.cov);

        // identical covariances pass through unchanged at any angle
        for theta in [0.3, 1.0, 2.4] {
            let out = two.bs_transform(&BeamSplitter::new(theta)).unwrap();
            assert!(out.cross_norm().unwrap() < 1e-15);
            for i in 0..4 {
                for j in 0..4 {
                    assert_abs_diff_eq!(out.cov[[i, j]], two.cov[[i, j]], epsilon = 1e-14);
                }
            }
        }
    }

    #[test]
    fn thermal_cross_block_matches_fock_oracle() {
        // V_a = 1·I (n̄ = 1/2), V_b = (5/2)·I (n̄ = 2), θ = π/2: the cross
        // block is rt(V_b − V_a) = (3/4)·I₂, with the sign fixed by the Fock
        // simulation below.
        let va = GaussianParams::thermal(0.5).to_moments().unwrap();
        let vb = GaussianParams::thermal(2.0).to_moments().unwrap();
        let two = CovarianceState::tensor(&va, &vb).unwrap();
        let out = two.bs_transform(&BeamSplitter::balanced()).unwrap();
        assert_abs_diff_eq!(out.cov[[0, 2]], 0.75, epsilon = 1e-12);
        assert_abs_diff_eq!(out.cov[[1, 3]], 0.75, epsilon = 1e-12);
        assert_abs_diff_eq!(out.cov[[0, 3]], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(out.cross_norm().unwrap(), 0.75 * std::f64::consts::SQRT_2, epsilon = 1e-12);

        let rho = DensityMatrix::tensor(
            &DensityMatrix::thermal(0.5, 30).unwrap(),
            &DensityMatrix::thermal(2.0, 30).unwrap(),
        )
        .unwrap()
        .apply_beamsplitter(&BeamSplitter::balanced())
        .unwrap();
        let mf = CovarianceState::from_density_matrix(&rho).unwrap();
        assert_abs_diff_eq!(mf.cov[[0, 2]], 0.75, epsilon = 1e-4);
        assert_abs_diff_eq!(mf.cov[[1, 3]], 0.75, epsilon = 1e-4);

        // symplectic spectrum is preserved by the transform
        let mut before = two.symplectic_eigenvalues().unwrap();
        let mut after = out.symplectic_eigenvalues().unwrap();
        before.sort_by(|a, b| a.partial_cmp(b).unwrap());
        after.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (x, y) in before.iter().zip(&after) {
            assert_abs_diff_eq!(x, y, epsilon = 1e-10);
        }
    }

    #[test]
    fn displacement_immunity_of_cross_norm() {
        let ga = GaussianParams::squeezed_vacuum(0.3, 0.7).with_displacement(c(0.9, -0.4));
        let gb = GaussianParams::squeezed_vacuum(0.3, 0.7).with_displacement(c(-0.2, 0.6));
        let two = CovarianceState::tensor(
            &ga.to_moments().unwrap(),
            &gb.to_moments().unwrap(),
        )
        .unwrap();
        for theta in [0.4, 1.57, 2.9] {
            let out = two.bs_transform(&BeamSplitter::new(theta)).unwrap();
            assert!(out.cross_norm().unwrap() < 1e-12);
            assert!(out.is_physical().unwrap());
        }
    }

    #[test]
    fn gaussian_entropy_matches_thermal_formula() {
        let nbar = 1.0;
        let m = GaussianParams::thermal(nbar).to_moments().unwrap();
        assert_abs_diff_eq!(
            m.gaussian_entropy().unwrap(),
            (nbar + 1.0) * (nbar + 1.0f64).ln() - nbar * nbar.ln(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn gaussian_mi_oracle_matches_fock_mi() {
        let va = GaussianParams::thermal(0.5).to_moments().unwrap();
        let vb = GaussianParams::thermal(2.0).to_moments().unwrap();
        let out = CovarianceState::tensor(&va, &vb)
            .unwrap()
            .bs_transform(&BeamSplitter::balanced())
            .unwrap();
        let mi_gauss = out.gaussian_mutual_information().unwrap();
        assert!(mi_gauss > 0.01);

        let rho = DensityMatrix::tensor(
            &DensityMatrix::thermal(0.5, 30).unwrap(),
            &DensityMatrix::thermal(2.0, 30).unwrap(),
        )
        .unwrap()
        .apply_beamsplitter(&BeamSplitter::balanced())
        .unwrap();
        let mi_fock = rho.mutual_information().unwrap();
        assert_abs_diff_eq!(mi_fock, mi_gauss, epsilon = 1e-3);
    }

    #[test]
    fn exponent_quadratic_of_thermal() {
        let nbar = 1.0f64;
        let m = GaussianParams::thermal(nbar).to_moments().unwrap();
        let f2 = m.exponent_quadratic().unwrap();
        let gamma = ((nbar + 1.0) / nbar).ln();
        assert_abs_diff_eq!(f2[[0, 0]], -gamma / 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(f2[[1, 1]], -gamma / 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(f2[[0, 1]], 0.0, epsilon = 1e-15);
        // pure states are rejected
        assert!(GaussianParams::vacuum()
            .to_moments()
            .unwrap()
            .exponent_quadratic()
            .is_err());
    }

    #[test]
    fn unphysical_parameters_are_rejected() {
        let g = GaussianParams::new(c(0.4, 0.0), 0.5, c(0.0, 0.0));
        assert!(!g.is_physical());
        assert!(g.to_moments().is_err());
        let origin = GaussianParams::new(c(0.0, 0.0), 0.0, c(0.0, 0.0));
        assert!(!origin.is_physical());
    }
}
