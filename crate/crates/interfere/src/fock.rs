//! Truncated Fock-space representation of one- and two-mode field states:
//! state constructors, beam-splitter evolution, measurement, and
//! information-theoretic diagnostics.
//!
//! Basis convention: each mode keeps the lowest `cutoff` number states
//! `|0⟩ … |cutoff−1⟩`. Two-mode indices are `n_a · cutoff + n_b` — mode `a`
//! is the slow (major) index.

use ndarray::prelude::*;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::linalg::{self, adjoint, kron};

/// Eigenvalues in `[-1e-9, 0]` count as truncation noise and clamp to zero;
/// anything below `-1e-6` means the state itself is invalid.
pub const EIG_CLAMP: f64 = 1e-9;
pub const EIG_INVALID: f64 = 1e-6;

/// One of the two beam-splitter arms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    A,
    B,
}

/// Beam splitter with mixing angle θ, transmissivity `t = cos(θ/2)` and
/// reflectivity `r = sin(θ/2)`.
///
/// The Fock-space unitary is `U(θ) = exp[(θ/2)(a†b − ab†)]`, the phase
/// convention under which the annihilation operators evolve with real
/// coefficients, `U† a U = t a + r b` and `U† b U = t b − r a`. Means,
/// covariances and exponent coefficients then all transform by the single
/// orthogonal matrix returned by [`BeamSplitter::quadrature_matrix`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamSplitter {
    theta: f64,
}

impl BeamSplitter {
    pub fn new(theta: f64) -> Self {
        Self { theta }
    }

    /// The 50:50 beam splitter, θ = π/2.
    pub fn balanced() -> Self {
        Self::new(std::f64::consts::FRAC_PI_2)
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// Transmissivity t = cos(θ/2).
    pub fn t(&self) -> f64 {
        (self.theta / 2.0).cos()
    }

    /// Reflectivity r = sin(θ/2).
    pub fn r(&self) -> f64 {
        (self.theta / 2.0).sin()
    }

    /// True when r·t = 0 (a mirror or no beam splitter): no mixing, no
    /// correlations can arise.
    pub fn is_trivial(&self) -> bool {
        (self.t() * self.r()).abs() < 1e-12
    }

    pub fn reject_trivial(&self) -> Result<()> {
        if self.is_trivial() {
            Err(Error::TrivialBeamSplitter(self.theta))
        } else {
            Ok(())
        }
    }

    /// The orthogonal quadrature transform M on (q_a, p_a, q_b, p_b):
    ///
    /// ```text
    ///      ( t  0  r  0 )
    ///  M = ( 0  t  0  r )
    ///      (−r  0  t  0 )
    ///      ( 0 −r  0  t )
    /// ```
    ///
    /// Heisenberg action `U† ξ U = M ξ`; first moments and covariances of the
    /// output state are `M·mean` and `M·cov·Mᵀ`, and exponent coefficient
    /// vectors transform as `f̄ = M f` (row-index contraction per tensor axis).
    pub fn quadrature_matrix(&self) -> Array2<f64> {
        let (t, r) = (self.t(), self.r());
        array![
            [t, 0.0, r, 0.0],
            [0.0, t, 0.0, r],
            [-r, 0.0, t, 0.0],
            [0.0, -r, 0.0, t],
        ]
    }

    /// The two-mode Fock-space unitary at the given per-mode cutoff.
    pub fn unitary(&self, cutoff: usize) -> Result<Array2<C64>> {
        let a = annihilation(cutoff);
        let ad = adjoint(&a);
        let half = C64::new(self.theta / 2.0, 0.0);
        let gen = (kron(&ad, &a) - kron(&a, &ad)).mapv(|z| z * half);
        linalg::expm(&gen)
    }
}

/// Annihilation operator on the truncated basis: entry (n−1, n) = √n.
pub fn annihilation(cutoff: usize) -> Array2<C64> {
    let mut a = Array2::zeros((cutoff, cutoff));
    for n in 1..cutoff {
        a[[n - 1, n]] = C64::new((n as f64).sqrt(), 0.0);
    }
    a
}

/// Creation operator a†.
pub fn creation(cutoff: usize) -> Array2<C64> {
    adjoint(&annihilation(cutoff))
}

/// Number operator a†a.
pub fn number(cutoff: usize) -> Array2<C64> {
    Array2::from_diag(&Array1::from_iter(
        (0..cutoff).map(|n| C64::new(n as f64, 0.0)),
    ))
}

/// Position quadrature q = (a† + a)/√2.
pub fn position(cutoff: usize) -> Array2<C64> {
    let a = annihilation(cutoff);
    (&adjoint(&a) + &a).mapv(|z| z / C64::new(std::f64::consts::SQRT_2, 0.0))
}

/// Momentum quadrature p = i(a† − a)/√2.
pub fn momentum(cutoff: usize) -> Array2<C64> {
    let a = annihilation(cutoff);
    (&adjoint(&a) - &a).mapv(|z| z * C64::new(0.0, 1.0) / C64::new(std::f64::consts::SQRT_2, 0.0))
}

/// One- or two-mode field state as a truncated Fock-basis density matrix.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    modes: usize,
    cutoff: usize,
    data: Array2<C64>,
}

impl DensityMatrix {
    /// Wrap an existing matrix, checking only dimensional consistency.
    pub fn from_matrix(modes: usize, cutoff: usize, data: Array2<C64>) -> Result<Self> {
        if !(modes == 1 || modes == 2) {
            return Err(Error::ModeMismatch {
                expected: 1,
                got: modes,
            });
        }
        let dim = cutoff.pow(modes as u32);
        if data.nrows() != dim || data.ncols() != dim {
            return Err(Error::InvalidState(format!(
                "matrix is {}×{}, expected {dim}×{dim}",
                data.nrows(),
                data.ncols()
            )));
        }
        Ok(Self {
            modes,
            cutoff,
            data,
        })
    }

    /// Single-mode pure state from a ket; the result is normalized.
    pub fn from_pure(psi: &Array1<C64>) -> Result<Self> {
        let cutoff = psi.len();
        if cutoff < 2 {
            return Err(Error::CutoffTooSmall(cutoff));
        }
        let norm2: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
        if norm2 <= 0.0 {
            return Err(Error::InvalidState("zero ket".into()));
        }
        let data = Array2::from_shape_fn((cutoff, cutoff), |(i, j)| {
            psi[i] * psi[j].conj() / C64::new(norm2, 0.0)
        });
        Ok(Self {
            modes: 1,
            cutoff,
            data,
        })
    }

    /// The vacuum |0⟩⟨0|.
    pub fn vacuum(cutoff: usize) -> Result<Self> {
        Self::fock(0, cutoff)
    }

    /// Number state |n⟩⟨n|.
    pub fn fock(n: usize, cutoff: usize) -> Result<Self> {
        if cutoff < 2 {
            return Err(Error::CutoffTooSmall(cutoff));
        }
        if n >= cutoff {
            return Err(Error::FockOutOfRange { n, cutoff });
        }
        let mut data = Array2::zeros((cutoff, cutoff));
        data[[n, n]] = C64::new(1.0, 0.0);
        Ok(Self {
            modes: 1,
            cutoff,
            data,
        })
    }

    /// Coherent state |α⟩ from its amplitudes `e^{−|α|²/2} αⁿ/√n!`,
    /// renormalized over the truncated basis.
    pub fn coherent(alpha: C64, cutoff: usize) -> Result<Self> {
        if cutoff < 2 {
            return Err(Error::CutoffTooSmall(cutoff));
        }
        let mut amp = Array1::zeros(cutoff);
        let mut c = C64::new((-alpha.norm_sqr() / 2.0).exp(), 0.0);
        amp[0] = c;
        for n in 1..cutoff {
            c = c * alpha / C64::new((n as f64).sqrt(), 0.0);
            amp[n] = c;
        }
        let kept: f64 = amp.iter().map(|z| z.norm_sqr()).sum();
        warn_on_tail(1.0 - kept, "coherent");
        Self::from_pure(&amp)
    }

    /// Thermal state with mean photon number n̄: geometric diagonal
    /// `p_n = n̄ⁿ/(1+n̄)ⁿ⁺¹`, renormalized over the cutoff.
    pub fn thermal(nbar: f64, cutoff: usize) -> Result<Self> {
        if cutoff < 2 {
            return Err(Error::CutoffTooSmall(cutoff));
        }
        if nbar < 0.0 {
            return Err(Error::NegativeOccupation(nbar));
        }
        let mut data = Array2::zeros((cutoff, cutoff));
        if nbar == 0.0 {
            data[[0, 0]] = C64::new(1.0, 0.0);
        } else {
            let ratio = nbar / (1.0 + nbar);
            warn_on_tail(ratio.powi(cutoff as i32), "thermal");
            let mut p = 1.0 / (1.0 + nbar);
            let mut total = 0.0;
            for n in 0..cutoff {
                data[[n, n]] = C64::new(p, 0.0);
                total += p;
                p *= ratio;
            }
            data.mapv_inplace(|z| z / C64::new(total, 0.0));
        }
        Ok(Self {
            modes: 1,
            cutoff,
            data,
        })
    }

    /// Squeezed vacuum S(ζ)|0⟩ with ζ = amp·e^{i·phase} and
    /// S(ζ) = exp[(ζ* a² − ζ a†²)/2].
    pub fn squeezed(amp: f64, phase: f64, cutoff: usize) -> Result<Self> {
        if cutoff < 2 {
            return Err(Error::CutoffTooSmall(cutoff));
        }
        let zeta = C64::from_polar(amp, phase);
        let a = annihilation(cutoff);
        let a2 = a.dot(&a);
        let gen = (a2.mapv(|z| z * zeta.conj()) - adjoint(&a2).mapv(|z| z * zeta))
            .mapv(|z| z * C64::new(0.5, 0.0));
        let s = linalg::expm(&gen)?;
        let mut psi = Array1::zeros(cutoff);
        for i in 0..cutoff {
            psi[i] = s[[i, 0]];
        }
        let kept: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
        warn_on_tail(1.0 - kept, "squeezed");
        Self::from_pure(&psi)
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn data(&self) -> &Array2<C64> {
        &self.data
    }

    pub fn into_data(self) -> Array2<C64> {
        self.data
    }

    pub fn trace(&self) -> C64 {
        linalg::trace(&self.data)
    }

    /// Rescale so the trace is exactly 1.
    pub fn normalize(&mut self) {
        let t = self.trace().re;
        if t != 0.0 {
            self.data.mapv_inplace(|z| z / C64::new(t, 0.0));
        }
    }

    /// Largest elementwise deviation from Hermiticity, max |ρ − ρ†|.
    pub fn hermiticity_error(&self) -> f64 {
        linalg::max_abs_diff(&self.data, &adjoint(&self.data))
    }

    /// Eigenvalues, ascending.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        linalg::eigvalsh(&self.data)
    }

    /// Check the density-matrix invariants: Hermitian to 1e-12, unit trace to
    /// 1e-9, eigenvalues ≥ −1e-9.
    pub fn validate(&self) -> Result<()> {
        let herm = self.hermiticity_error();
        if herm > 1e-12 {
            return Err(Error::InvalidState(format!(
                "Hermiticity violated: max |ρ − ρ†| = {herm:.3e}"
            )));
        }
        let tr = self.trace();
        if (tr.re - 1.0).abs() > 1e-9 || tr.im.abs() > 1e-9 {
            return Err(Error::InvalidState(format!("trace = {tr} ≠ 1")));
        }
        let min = self
            .eigenvalues()?
            .first()
            .copied()
            .unwrap_or(0.0);
        if min < -EIG_CLAMP {
            return Err(Error::InvalidState(format!(
                "negative eigenvalue {min:.3e}"
            )));
        }
        Ok(())
    }

    /// Tr(ρ²), which for a Hermitian ρ is Σ |ρ_ij|².
    pub fn purity(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Diagonal populations in the Fock basis.
    pub fn populations(&self) -> Vec<f64> {
        self.data.diag().iter().map(|z| z.re).collect()
    }

    /// ⟨O⟩ = Tr(Oρ) for an operator on the same space.
    pub fn expectation(&self, op: &Array2<C64>) -> C64 {
        // Tr(Oρ) = Σ_ij O_ij ρ_ji
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..self.dim() {
            for j in 0..self.dim() {
                acc += op[[i, j]] * self.data[[j, i]];
            }
        }
        acc
    }

    /// Kronecker composition ρ_a ⊗ ρ_b (mode a major).
    pub fn tensor(a: &DensityMatrix, b: &DensityMatrix) -> Result<DensityMatrix> {
        if a.modes != 1 || b.modes != 1 {
            return Err(Error::ModeMismatch {
                expected: 1,
                got: a.modes.max(b.modes),
            });
        }
        if a.cutoff != b.cutoff {
            return Err(Error::CutoffMismatch(a.cutoff, b.cutoff));
        }
        Ok(DensityMatrix {
            modes: 2,
            cutoff: a.cutoff,
            data: kron(&a.data, &b.data),
        })
    }

    /// Evolve a two-mode state through the beam splitter: `U ρ U†`.
    ///
    /// The generator conserves total photon number, so states supported on
    /// total photon number < cutoff evolve without truncation leakage.
    pub fn apply_beamsplitter(&self, bs: &BeamSplitter) -> Result<DensityMatrix> {
        let u = bs.unitary(self.cutoff)?;
        self.apply_unitary(&u)
    }

    /// Conjugate a two-mode state by a precomputed unitary.
    pub fn apply_unitary(&self, u: &Array2<C64>) -> Result<DensityMatrix> {
        if self.modes != 2 {
            return Err(Error::ModeMismatch {
                expected: 2,
                got: self.modes,
            });
        }
        let data = u.dot(&self.data).dot(&adjoint(u));
        Ok(DensityMatrix {
            modes: 2,
            cutoff: self.cutoff,
            data,
        })
    }

    /// Trace out one mode of a two-mode state, keeping `keep`.
    pub fn partial_trace(&self, keep: Mode) -> Result<DensityMatrix> {
        if self.modes != 2 {
            return Err(Error::ModeMismatch {
                expected: 2,
                got: self.modes,
            });
        }
        let n = self.cutoff;
        let mut out = Array2::zeros((n, n));
        match keep {
            Mode::A => {
                for i in 0..n {
                    for j in 0..n {
                        let mut acc = C64::new(0.0, 0.0);
                        for m in 0..n {
                            acc += self.data[[i * n + m, j * n + m]];
                        }
                        out[[i, j]] = acc;
                    }
                }
            }
            Mode::B => {
                for i in 0..n {
                    for j in 0..n {
                        let mut acc = C64::new(0.0, 0.0);
                        for m in 0..n {
                            acc += self.data[[m * n + i, m * n + j]];
                        }
                        out[[i, j]] = acc;
                    }
                }
            }
        }
        Ok(DensityMatrix {
            modes: 1,
            cutoff: n,
            data: out,
        })
    }

    /// Project `mode` onto the Fock state |outcome⟩ and return the normalized
    /// post-measurement state of the other mode together with the outcome
    /// probability `Tr[(1 ⊗ |n⟩⟨n|) ρ]`.
    pub fn project_mode(&self, mode: Mode, outcome: usize) -> Result<(DensityMatrix, f64)> {
        if self.modes != 2 {
            return Err(Error::ModeMismatch {
                expected: 2,
                got: self.modes,
            });
        }
        let n = self.cutoff;
        if outcome >= n {
            return Err(Error::FockOutOfRange { n: outcome, cutoff: n });
        }
        let mut kept = Array2::zeros((n, n));
        match mode {
            // measuring B keeps A and vice versa
            Mode::B => {
                for i in 0..n {
                    for j in 0..n {
                        kept[[i, j]] = self.data[[i * n + outcome, j * n + outcome]];
                    }
                }
            }
            Mode::A => {
                for i in 0..n {
                    for j in 0..n {
                        kept[[i, j]] = self.data[[outcome * n + i, outcome * n + j]];
                    }
                }
            }
        }
        let p = linalg::trace(&kept).re;
        if p < 1e-14 {
            return Err(Error::NullProjection(p));
        }
        kept.mapv_inplace(|z| z / C64::new(p, 0.0));
        Ok((
            DensityMatrix {
                modes: 1,
                cutoff: n,
                data: kept,
            },
            p,
        ))
    }

    /// Von Neumann entropy −Σ λ ln λ in nats. Eigenvalues in `[-1e-9, 0]`
    /// clamp to zero; anything below −1e-6 is an invalid state.
    pub fn von_neumann_entropy(&self) -> Result<f64> {
        let mut s = 0.0;
        for lam in self.eigenvalues()? {
            if lam < -EIG_INVALID {
                return Err(Error::InvalidState(format!(
                    "eigenvalue {lam:.3e} below -1e-6"
                )));
            }
            if lam > 0.0 {
                s -= lam * lam.ln();
            }
        }
        Ok(s)
    }

    /// Mutual information S(ρ_a) + S(ρ_b) − S(ρ_ab) in nats; zero exactly
    /// when the state is the product of its marginals.
    pub fn mutual_information(&self) -> Result<f64> {
        let sa = self.partial_trace(Mode::A)?.von_neumann_entropy()?;
        let sb = self.partial_trace(Mode::B)?.von_neumann_entropy()?;
        let sab = self.von_neumann_entropy()?;
        Ok(sa + sb - sab)
    }

    /// Normalized trace distance `‖ρ_ab − ρ_a ⊗ ρ_b‖₁ / 2 ∈ [0, 1]` between
    /// the state and the product of its marginals.
    pub fn distance_to_product(&self) -> Result<f64> {
        let prod = DensityMatrix::tensor(
            &self.partial_trace(Mode::A)?,
            &self.partial_trace(Mode::B)?,
        )?;
        let diff = &self.data - &prod.data;
        Ok(linalg::trace_norm_hermitian(&diff)? / 2.0)
    }

    /// ⟨a⟩ (or ⟨b⟩) without building a dense operator.
    pub fn mean_annihilation(&self, mode: Mode) -> C64 {
        let n = self.cutoff;
        let mut acc = C64::new(0.0, 0.0);
        match (self.modes, mode) {
            (1, _) => {
                // Tr(aρ) = Σ_j √j ρ[j, j−1]
                for j in 1..n {
                    acc += C64::new((j as f64).sqrt(), 0.0) * self.data[[j, j - 1]];
                }
            }
            (2, Mode::A) => {
                for j in 1..n {
                    let w = C64::new((j as f64).sqrt(), 0.0);
                    for m in 0..n {
                        acc += w * self.data[[j * n + m, (j - 1) * n + m]];
                    }
                }
            }
            (2, Mode::B) => {
                for j in 1..n {
                    let w = C64::new((j as f64).sqrt(), 0.0);
                    for m in 0..n {
                        acc += w * self.data[[m * n + j, m * n + (j - 1)]];
                    }
                }
            }
            _ => unreachable!(),
        }
        acc
    }
}

fn warn_on_tail(tail: f64, family: &str) {
    if tail > 1e-6 {
        log::warn!("{family} state loses {tail:.3e} population above the cutoff");
    }
}

/// Normal-ordered single- and cross-mode ladder moments of a state, the raw
/// material for quadrature means and covariances.
#[derive(Debug, Clone, Copy)]
pub struct LadderMoments {
    pub mean_a: C64,
    pub mean_b: Option<C64>,
    pub a_sq: C64,
    pub b_sq: Option<C64>,
    pub n_a: f64,
    pub n_b: Option<f64>,
    pub ab: Option<C64>,
    pub ab_dag: Option<C64>,
}

impl LadderMoments {
    pub fn of(rho: &DensityMatrix) -> Self {
        let n = rho.cutoff();
        let d = rho.data();
        let sq = |k: usize| (k as f64).sqrt();
        if rho.modes() == 1 {
            let mut a_sq = C64::new(0.0, 0.0);
            let mut num = 0.0;
            for j in 2..n {
                a_sq += C64::new(sq(j) * sq(j - 1), 0.0) * d[[j, j - 2]];
            }
            for j in 0..n {
                num += j as f64 * d[[j, j]].re;
            }
            return Self {
                mean_a: rho.mean_annihilation(Mode::A),
                mean_b: None,
                a_sq,
                b_sq: None,
                n_a: num,
                n_b: None,
                ab: None,
                ab_dag: None,
            };
        }
        let idx = |i: usize, j: usize| i * n + j;
        let mut a_sq = C64::new(0.0, 0.0);
        let mut b_sq = C64::new(0.0, 0.0);
        let mut n_a = 0.0;
        let mut n_b = 0.0;
        let mut ab = C64::new(0.0, 0.0);
        let mut ab_dag = C64::new(0.0, 0.0);
        for i in 0..n {
            for j in 0..n {
                let rho_diag = d[[idx(i, j), idx(i, j)]].re;
                n_a += i as f64 * rho_diag;
                n_b += j as f64 * rho_diag;
                // ⟨a²⟩ = Σ √(i(i−1)) ρ[(i,j),(i−2,j)]
                if i >= 2 {
                    a_sq += C64::new(sq(i) * sq(i - 1), 0.0) * d[[idx(i, j), idx(i - 2, j)]];
                }
                if j >= 2 {
                    b_sq += C64::new(sq(j) * sq(j - 1), 0.0) * d[[idx(i, j), idx(i, j - 2)]];
                }
                // ⟨ab⟩ = Σ √(i j) ρ[(i,j),(i−1,j−1)]
                if i >= 1 && j >= 1 {
                    ab += C64::new(sq(i) * sq(j), 0.0) * d[[idx(i, j), idx(i - 1, j - 1)]];
                }
                // ⟨ab†⟩ = Σ √(i (j+1)) ρ[(i,j),(i−1,j+1)]
                if i >= 1 && j + 1 < n {
                    ab_dag += C64::new(sq(i) * sq(j + 1), 0.0) * d[[idx(i, j), idx(i - 1, j + 1)]];
                }
            }
        }
        Self {
            mean_a: rho.mean_annihilation(Mode::A),
            mean_b: Some(rho.mean_annihilation(Mode::B)),
            a_sq,
            b_sq: Some(b_sq),
            n_a,
            n_b: Some(n_b),
            ab: Some(ab),
            ab_dag: Some(ab_dag),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    const PI: f64 = std::f64::consts::PI;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn mode_operator_entries() {
        let n = 6;
        let a = annihilation(n);
        for k in 1..n {
            assert_eq!(a[[k - 1, k]], c((k as f64).sqrt(), 0.0));
        }
        assert_eq!(a.iter().filter(|z| z.norm() > 0.0).count(), n - 1);
        // q and p exactly as built from the annihilation matrix
        let s2 = c(std::f64::consts::SQRT_2, 0.0);
        let q = position(n);
        let p = momentum(n);
        let a_dag = adjoint(&a);
        assert!(linalg::max_abs_diff(&q, &((&a_dag + &a).mapv(|z| z / s2))) == 0.0);
        assert!(
            linalg::max_abs_diff(&p, &((&a_dag - &a).mapv(|z| z * c(0.0, 1.0) / s2))) == 0.0
        );
        // [q, p] = i on the truncated space except the corner entry
        let comm = q.dot(&p) - p.dot(&q);
        for k in 0..n - 1 {
            assert!((comm[[k, k]] - c(0.0, 1.0)).norm() < 1e-14);
        }
        let num = number(n);
        assert_eq!(num[[3, 3]], c(3.0, 0.0));
    }

    #[test]
    fn vacuum_is_ground_state() {
        let v = DensityMatrix::vacuum(10).unwrap();
        assert_eq!(v.data()[[0, 0]], c(1.0, 0.0));
        assert_abs_diff_eq!(v.trace().re, 1.0, epsilon = 1e-15);
        assert_eq!(v.populations()[1], 0.0);
    }

    #[test]
    fn thermal_ground_population_is_geometric() {
        // p_0 = 1/(1+n̄); truncation correction at N=30 is ~2^-30
        let t = DensityMatrix::thermal(1.0, 30).unwrap();
        assert_abs_diff_eq!(t.data()[[0, 0]].re, 0.5, epsilon = 1e-8);
        assert_abs_diff_eq!(t.trace().re, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn thermal_matches_p_function_integral() {
        // Oracle: ρ₀₀ = (1/πn̄) ∫ e^{−|α|²/n̄} |⟨0|α⟩|² d²α, integrated
        // numerically over a radial grid (the integrand is phase-invariant and
        // |⟨0|α⟩|² = e^{−|α|²}).
        let nbar = 1.0;
        let nr = 4000;
        let rmax = 6.0 * (nbar as f64).sqrt().max(1.0);
        let dr = rmax / nr as f64;
        let mut p00 = 0.0;
        for ir in 0..nr {
            let r = (ir as f64 + 0.5) * dr;
            p00 += (-(r * r) / nbar).exp() * (-(r * r)).exp() * r * dr * (2.0 * PI) / (PI * nbar);
        }
        assert_abs_diff_eq!(p00, 1.0 / (1.0 + nbar), epsilon = 1e-6);
        let t = DensityMatrix::thermal(nbar, 30).unwrap();
        assert_abs_diff_eq!(t.data()[[0, 0]].re, p00, epsilon = 1e-6);
    }

    #[test]
    fn coherent_vacuum_overlap() {
        let st = DensityMatrix::coherent(c(1.0, 0.0), 30).unwrap();
        assert_abs_diff_eq!(st.data()[[0, 0]].re, (-1.0f64).exp(), epsilon = 1e-9);
        assert_abs_diff_eq!(st.mean_annihilation(Mode::A).re, 1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(st.purity(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn squeezed_vacuum_moments() {
        let s = 0.3f64;
        let st = DensityMatrix::squeezed(s, 0.0, 30).unwrap();
        let m = LadderMoments::of(&st);
        assert_abs_diff_eq!(m.a_sq.re, -s.sinh() * s.cosh(), epsilon = 1e-9);
        assert_abs_diff_eq!(m.n_a, s.sinh().powi(2), epsilon = 1e-9);
    }

    #[test]
    fn tensor_product_examples() {
        let v = DensityMatrix::vacuum(8).unwrap();
        let vv = DensityMatrix::tensor(&v, &v).unwrap();
        assert_eq!(vv.data()[[0, 0]], c(1.0, 0.0));
        assert_abs_diff_eq!(vv.trace().re, 1.0, epsilon = 1e-15);

        let f1 = DensityMatrix::fock(1, 8).unwrap();
        let fv = DensityMatrix::tensor(&f1, &v).unwrap();
        // |1,0⟩ has index 1*8+0
        assert_eq!(fv.data()[[8, 8]], c(1.0, 0.0));

        let t = DensityMatrix::thermal(1.0, 16).unwrap();
        let tt = DensityMatrix::tensor(&t, &t).unwrap();
        for m in 0..16 {
            for n in 0..16 {
                let expect = t.data()[[m, m]].re * t.data()[[n, n]].re;
                assert_abs_diff_eq!(tt.data()[[m * 16 + n, m * 16 + n]].re, expect, epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn beamsplitter_at_zero_is_identity() {
        let t = DensityMatrix::thermal(0.7, 10).unwrap();
        let rho = DensityMatrix::tensor(&t, &t).unwrap();
        let out = rho.apply_beamsplitter(&BeamSplitter::new(0.0)).unwrap();
        assert!(linalg::max_abs_diff(out.data(), rho.data()) < 1e-14);
    }

    #[test]
    fn single_photon_splits_on_one_photon_subspace() {
        // Oracle: the generator's 2×2 block on {|1,0⟩, |0,1⟩} is
        // (θ/2)[[0, -1], [1, 0]] (a†b − ab† in that basis), whose exponential
        // rotates |1,0⟩ → cos(θ/2)|1,0⟩ − sin(θ/2)|0,1⟩.
        let n = 6;
        let theta = PI / 2.0;
        let f1 = DensityMatrix::fock(1, n).unwrap();
        let v = DensityMatrix::vacuum(n).unwrap();
        let rho = DensityMatrix::tensor(&f1, &v).unwrap();
        let out = rho.apply_beamsplitter(&BeamSplitter::new(theta)).unwrap();
        let (tt, rr) = ((theta / 2.0).cos(), (theta / 2.0).sin());
        let psi10 = c(tt, 0.0);
        let psi01 = c(-rr, 0.0);
        let i10 = n;
        let i01 = 1;
        assert_abs_diff_eq!(out.data()[[i10, i10]].re, psi10.norm_sqr(), epsilon = 1e-12);
        assert_abs_diff_eq!(out.data()[[i01, i01]].re, psi01.norm_sqr(), epsilon = 1e-12);
        let cross = psi10 * psi01.conj();
        assert_abs_diff_eq!(out.data()[[i10, i01]].re, cross.re, epsilon = 1e-12);
        assert_abs_diff_eq!(out.data()[[i10, i01]].im, cross.im, epsilon = 1e-12);
    }

    #[test]
    fn hong_ou_mandel_removes_coincidences() {
        // Oracle: on the two-photon block {|2,0⟩,|1,1⟩,|0,2⟩} the generator is
        // (θ/2)·√2·[[0,-1,0],[1,0,-1],[0,1,0]]; at θ=π/2 the |1,1⟩ amplitude
        // rotates fully into (|2,0⟩−|0,2⟩)/√2.
        let n = 6;
        let f1 = DensityMatrix::fock(1, n).unwrap();
        let rho = DensityMatrix::tensor(&f1, &f1).unwrap();
        let out = rho.apply_beamsplitter(&BeamSplitter::balanced()).unwrap();
        let i11 = n + 1;
        let i20 = 2 * n;
        let i02 = 2;
        assert!(out.data()[[i11, i11]].re < 1e-10, "HOM dip violated");
        assert_abs_diff_eq!(out.data()[[i20, i20]].re, 0.5, epsilon = 1e-10);
        assert_abs_diff_eq!(out.data()[[i02, i02]].re, 0.5, epsilon = 1e-10);
        assert_abs_diff_eq!(out.data()[[i20, i02]].re, -0.5, epsilon = 1e-10);
        // MI of the pure output with maximally mixed marginals over {0,2}
        assert_abs_diff_eq!(out.mutual_information().unwrap(), 2.0 * 2.0f64.ln(), epsilon = 1e-8);
    }

    #[test]
    fn partial_trace_of_product_recovers_marginal() {
        let t = DensityMatrix::thermal(0.5, 12).unwrap();
        let coh = DensityMatrix::coherent(c(0.4, 0.2), 12).unwrap();
        let rho = DensityMatrix::tensor(&t, &coh).unwrap();
        let ra = rho.partial_trace(Mode::A).unwrap();
        let rb = rho.partial_trace(Mode::B).unwrap();
        assert!(linalg::max_abs_diff(ra.data(), t.data()) < 1e-12);
        assert!(linalg::max_abs_diff(rb.data(), coh.data()) < 1e-12);
        assert_abs_diff_eq!(ra.trace().re, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn partial_trace_of_split_photon_is_maximally_mixed() {
        let n = 6;
        let f1 = DensityMatrix::fock(1, n).unwrap();
        let v = DensityMatrix::vacuum(n).unwrap();
        let out = DensityMatrix::tensor(&f1, &v)
            .unwrap()
            .apply_beamsplitter(&BeamSplitter::balanced())
            .unwrap();
        let ra = out.partial_trace(Mode::A).unwrap();
        assert_abs_diff_eq!(ra.data()[[0, 0]].re, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(ra.data()[[1, 1]].re, 0.5, epsilon = 1e-12);
        // |1,1⟩⟨1,1| keep b → |1⟩⟨1|
        let r11 = DensityMatrix::tensor(&f1, &f1).unwrap();
        let rb = r11.partial_trace(Mode::B).unwrap();
        assert_eq!(rb.data()[[1, 1]], c(1.0, 0.0));
    }

    #[test]
    fn projection_examples() {
        let n = 8;
        let f1 = DensityMatrix::fock(1, n).unwrap();
        let v = DensityMatrix::vacuum(n).unwrap();
        let rho = DensityMatrix::tensor(&f1, &v).unwrap();
        let (kept, p) = rho.project_mode(Mode::B, 0).unwrap();
        assert_abs_diff_eq!(p, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(kept.data()[[1, 1]].re, 1.0, epsilon = 1e-12);

        let out = rho.apply_beamsplitter(&BeamSplitter::balanced()).unwrap();
        let (kept, p) = out.project_mode(Mode::B, 1).unwrap();
        assert_abs_diff_eq!(p, 0.5, epsilon = 1e-10);
        assert_abs_diff_eq!(kept.data()[[0, 0]].re, 1.0, epsilon = 1e-10);

        // conditioning on an impossible outcome
        assert!(matches!(
            rho.project_mode(Mode::B, 3),
            Err(Error::NullProjection(_))
        ));
    }

    #[test]
    fn entropy_values() {
        let f2 = DensityMatrix::fock(2, 10).unwrap();
        assert_abs_diff_eq!(f2.von_neumann_entropy().unwrap(), 0.0, epsilon = 1e-9);

        let mut mixed = Array2::zeros((4, 4));
        mixed[[0, 0]] = c(0.5, 0.0);
        mixed[[1, 1]] = c(0.5, 0.0);
        let rho = DensityMatrix::from_matrix(1, 4, mixed).unwrap();
        assert_abs_diff_eq!(rho.von_neumann_entropy().unwrap(), 2.0f64.ln(), epsilon = 1e-12);

        // analytic thermal entropy (n̄+1)ln(n̄+1) − n̄ ln n̄, truncation-corrected
        let t = DensityMatrix::thermal(1.0, 30).unwrap();
        assert_abs_diff_eq!(
            t.von_neumann_entropy().unwrap(),
            2.0 * (2.0f64).ln(),
            epsilon = 1e-6
        );
    }

    #[test]
    fn mutual_information_of_product_vanishes() {
        let t = DensityMatrix::thermal(0.8, 14).unwrap();
        let s = DensityMatrix::squeezed(0.2, 0.4, 14).unwrap();
        let rho = DensityMatrix::tensor(&t, &s).unwrap();
        assert!(rho.mutual_information().unwrap().abs() < 1e-8);
        assert!(rho.distance_to_product().unwrap() < 1e-9);
    }

    #[test]
    fn split_photon_is_maximally_correlated() {
        let n = 8;
        let f1 = DensityMatrix::fock(1, n).unwrap();
        let v = DensityMatrix::vacuum(n).unwrap();
        let out = DensityMatrix::tensor(&f1, &v)
            .unwrap()
            .apply_beamsplitter(&BeamSplitter::balanced())
            .unwrap();
        assert_abs_diff_eq!(out.mutual_information().unwrap(), 2.0 * 2.0f64.ln(), epsilon = 1e-8);

        // Trace-distance oracle: eigenvalues of |ψ⟩⟨ψ| − (1/4)I on the
        // four-dimensional {0,1}⊗{0,1} block are {3/4, −1/4, −1/4, −1/4},
        // so ‖·‖₁/2 = 3/4.
        assert_abs_diff_eq!(out.distance_to_product().unwrap(), 0.75, epsilon = 1e-8);
    }

    #[test]
    fn coherent_through_beamsplitter_stays_product() {
        let n = 30;
        let coh = DensityMatrix::coherent(c(1.0, 0.0), n).unwrap();
        let v = DensityMatrix::vacuum(n).unwrap();
        let out = DensityMatrix::tensor(&coh, &v)
            .unwrap()
            .apply_beamsplitter(&BeamSplitter::balanced())
            .unwrap();
        assert!(out.distance_to_product().unwrap() < 1e-8);
        assert!(out.mutual_information().unwrap() < 1e-8);
    }

    #[test]
    fn first_moment_law() {
        let n = 30;
        let alpha = c(0.8, -0.3);
        let beta = c(-0.2, 0.5);
        let a = DensityMatrix::coherent(alpha, n).unwrap();
        let b = DensityMatrix::coherent(beta, n).unwrap();
        let bs = BeamSplitter::new(0.9);
        let out = DensityMatrix::tensor(&a, &b)
            .unwrap()
            .apply_beamsplitter(&bs)
            .unwrap();
        let (t, r) = (bs.t(), bs.r());
        let ma = out.mean_annihilation(Mode::A);
        let mb = out.mean_annihilation(Mode::B);
        let ea = alpha * c(t, 0.0) + beta * c(r, 0.0);
        let eb = beta * c(t, 0.0) - alpha * c(r, 0.0);
        assert!((ma - ea).norm() < 1e-8, "⟨a⟩ {ma} ≠ {ea}");
        assert!((mb - eb).norm() < 1e-8, "⟨b⟩ {mb} ≠ {eb}");
    }

    #[test]
    fn beamsplitter_composition_and_inversion() {
        let n = 8;
        let t = DensityMatrix::thermal(0.5, n).unwrap();
        let f = DensityMatrix::fock(1, n).unwrap();
        let rho = DensityMatrix::tensor(&t, &f).unwrap();
        let t1 = 0.7;
        let t2 = 0.9;
        let once = rho
            .apply_beamsplitter(&BeamSplitter::new(t1))
            .unwrap()
            .apply_beamsplitter(&BeamSplitter::new(t2))
            .unwrap();
        let joint = rho.apply_beamsplitter(&BeamSplitter::new(t1 + t2)).unwrap();
        assert!(linalg::max_abs_diff(once.data(), joint.data()) < 1e-9);

        let back = rho
            .apply_beamsplitter(&BeamSplitter::new(t1))
            .unwrap()
            .apply_beamsplitter(&BeamSplitter::new(-t1))
            .unwrap();
        assert!(linalg::max_abs_diff(back.data(), rho.data()) < 1e-10);
    }

    #[test]
    fn unitarity_preserves_trace_and_spectrum() {
        let n = 8;
        let t = DensityMatrix::thermal(0.4, n).unwrap();
        let s = DensityMatrix::squeezed(0.25, 1.1, n).unwrap();
        let rho = DensityMatrix::tensor(&t, &s).unwrap();
        let out = rho.apply_beamsplitter(&BeamSplitter::new(1.234)).unwrap();
        assert_abs_diff_eq!(out.trace().re, rho.trace().re, epsilon = 1e-10);
        let mut ein = rho.eigenvalues().unwrap();
        let mut eout = out.eigenvalues().unwrap();
        ein.sort_by(|a, b| a.partial_cmp(b).unwrap());
        eout.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let dev = ein
            .iter()
            .zip(&eout)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max);
        assert!(dev < 1e-8, "spectrum shifted by {dev:.3e}");
    }

    #[test]
    fn trivial_beamsplitter_is_flagged() {
        assert!(BeamSplitter::new(0.0).is_trivial());
        assert!(BeamSplitter::new(PI).is_trivial());
        assert!(!BeamSplitter::balanced().is_trivial());
        assert!(BeamSplitter::new(0.0).reject_trivial().is_err());
    }

    #[test]
    fn quadrature_matrix_is_orthogonal() {
        let bs = BeamSplitter::new(0.77);
        let m = bs.quadrature_matrix();
        let mtm = m.t().dot(&m);
        for i in 0..4 {
            for j in 0..4 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(mtm[[i, j]], expect, epsilon = 1e-15);
            }
        }
        assert_abs_diff_eq!(bs.t().powi(2) + bs.r().powi(2), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn constructor_errors() {
        assert!(DensityMatrix::fock(9, 8).is_err());
        assert!(DensityMatrix::thermal(-0.1, 8).is_err());
        assert!(DensityMatrix::vacuum(1).is_err());
    }
}
