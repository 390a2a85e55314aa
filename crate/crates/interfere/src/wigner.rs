//! Quasi-probability representations: Wigner functions on rectangular
//! (q, p) grids, the closed-form P function of two thermal fields mixed at a
//! beam splitter, the conditional non-Gaussian state engineered by a
//! one-photon measurement, and the Gaussian cross-term coefficients with
//! their root structure.

use ndarray::prelude::*;
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{position, BeamSplitter, DensityMatrix};
use crate::gaussian::GaussianParams;

const PI: f64 = std::f64::consts::PI;

/// Rectangular sampling window for a Wigner grid.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub struct GridSpec {
    pub qmin: f64,
    pub qmax: f64,
    pub pmin: f64,
    pub pmax: f64,
    /// samples per axis (endpoints included)
    pub steps: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            qmin: -5.0,
            qmax: 5.0,
            pmin: -5.0,
            pmax: 5.0,
            steps: 101,
        }
    }
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        if self.steps < 2 || self.qmax <= self.qmin || self.pmax <= self.pmin {
            return Err(Error::InvalidState(format!(
                "degenerate grid spec {self:?}"
            )));
        }
        Ok(())
    }

    fn axis(&self, min: f64, max: f64) -> Vec<f64> {
        let h = (max - min) / (self.steps - 1) as f64;
        (0..self.steps).map(|i| min + i as f64 * h).collect()
    }
}

/// Wigner function sampled on a grid; rows run over q, columns over p.
#[derive(Debug, Clone)]
pub struct WignerGrid {
    pub spec: GridSpec,
    pub qs: Vec<f64>,
    pub ps: Vec<f64>,
    pub values: Array2<f64>,
}

impl WignerGrid {
    /// Riemann-sum integral Σ W Δq Δp; near 1 when the window holds the
    /// state.
    pub fn integral(&self) -> f64 {
        let dq = (self.spec.qmax - self.spec.qmin) / (self.spec.steps - 1) as f64;
        let dp = (self.spec.pmax - self.spec.pmin) / (self.spec.steps - 1) as f64;
        self.values.sum() * dq * dp
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    /// CSV with a `q,p,w` header, q-major row order.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("q,p,w\n");
        for (i, q) in self.qs.iter().enumerate() {
            for (j, p) in self.ps.iter().enumerate() {
                out.push_str(&format!("{q},{p},{}\n", self.values[[i, j]]));
            }
        }
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        let rows: Vec<Vec<f64>> = self
            .values
            .rows()
            .into_iter()
            .map(|r| r.to_vec())
            .collect();
        serde_json::json!({
            "spec": self.spec,
            "q": self.qs,
            "p": self.ps,
            "values": rows,
        })
    }
}

/// Evaluate the Wigner function of a single-mode state, normalized so that
/// ∫ W dq dp = 1 (the vacuum peaks at 1/π).
///
/// Each point evaluates the displaced-parity form
/// `W(α) = (1/π) Tr[ρ D(2α) Π]` with `α = (q+ip)/√2`, exact for the
/// truncated state. The |m⟩⟨n| kernels are generated by a two-index
/// recurrence seeded with the Gaussian envelope, so every intermediate stays
/// bounded — the closed-form Laguerre route loses the value to cancellation
/// once |α|² reaches a few tens.
pub fn wigner(rho: &DensityMatrix, spec: &GridSpec) -> Result<WignerGrid> {
    if rho.modes() != 1 {
        return Err(Error::ModeMismatch {
            expected: 1,
            got: rho.modes(),
        });
    }
    spec.validate()?;
    let n = rho.cutoff();
    let qs = spec.axis(spec.qmin, spec.qmax);
    let ps = spec.axis(spec.pmin, spec.pmax);
    let data = rho.data();

    let rows: Vec<Vec<f64>> = qs
        .par_iter()
        .map(|&q| {
            let mut kernels = vec![C64::new(0.0, 0.0); n];
            ps.iter()
                .map(|&p| point_value(data, q, p, &mut kernels))
                .collect()
        })
        .collect();

    let mut values = Array2::zeros((qs.len(), ps.len()));
    for (i, row) in rows.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            values[[i, j]] = *v;
        }
    }
    let grid = WignerGrid {
        spec: *spec,
        qs,
        ps,
        values,
    };
    let deficit = 1.0 - grid.integral();
    if deficit.abs() > 0.01 {
        log::warn!(
            "Wigner window captures only {:.4} of the state mass",
            1.0 - deficit
        );
    }
    Ok(grid)
}

/// One grid point. `cur[k]` holds `K_{k,m} = (1/π)⟨k|D(2α)Π|m⟩` for the
/// current column m; `W_ρ = Σ_{m,k} ρ_{mk} K_{km}`, folded with the
/// Hermitian pairing `K_{mk} = K̄_{km}` (the kernel `D(2α)Π` is Hermitian).
///
/// Column 0 is `K_{k,0} = (2α)^k/√k! · e^{−2|α|²}/π`; columns advance by
/// `K_{k,m} = (2ᾱ K_{k,m−1} − √k K_{k−1,m−1})/√m`, which follows from
/// `D(β) a† = (a† − β̄) D(β)` with `β = 2α`. Every value is a kernel matrix
/// element, bounded by 1/π.
fn point_value(rho: &Array2<C64>, q: f64, p: f64, cur: &mut [C64]) -> f64 {
    let n = cur.len();
    let a = C64::new(q, p) / C64::new(std::f64::consts::SQRT_2, 0.0);
    let two_a = a * 2.0;
    let two_ac = a.conj() * 2.0;
    cur[0] = C64::new((-2.0 * a.norm_sqr()).exp() / PI, 0.0);
    for k in 1..n {
        cur[k] = two_a * cur[k - 1] / C64::new((k as f64).sqrt(), 0.0);
    }
    let mut w = rho[[0, 0]].re * cur[0].re;
    for k in 1..n {
        w += 2.0 * (rho[[0, k]] * cur[k]).re;
    }
    for m in 1..n {
        let sm = (m as f64).sqrt();
        // descending k keeps K_{k−1, m−1} intact until used
        for k in (m..n).rev() {
            cur[k] = (two_ac * cur[k] - C64::new((k as f64).sqrt(), 0.0) * cur[k - 1])
                / C64::new(sm, 0.0);
        }
        w += rho[[m, m]].re * cur[m].re;
        for k in m + 1..n {
            w += 2.0 * (rho[[m, k]] * cur[k]).re;
        }
    }
    w
}

/// Mean photon numbers of the two thermal inputs.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub struct ThermalPair {
    pub nbar_a: f64,
    pub nbar_b: f64,
}

impl ThermalPair {
    pub fn new(nbar_a: f64, nbar_b: f64) -> Result<Self> {
        if nbar_a < 0.0 || nbar_b < 0.0 {
            return Err(Error::NegativeOccupation(nbar_a.min(nbar_b)));
        }
        Ok(Self { nbar_a, nbar_b })
    }

    fn require_positive(&self) -> Result<()> {
        if self.nbar_a <= 0.0 || self.nbar_b <= 0.0 {
            return Err(Error::NegativeOccupation(0.0));
        }
        Ok(())
    }
}

/// Closed-form two-mode P function of thermal fields n̄_a, n̄_b mixed at the
/// beam splitter:
///
/// ```text
/// P(α, β) = exp(−|tα − rβ|²/n̄_a − |rα + tβ|²/n̄_b) / (π² n̄_a n̄_b)
/// ```
///
/// Smooth and non-negative everywhere: the output state is classically
/// correlated, never entangled.
pub fn p_function_thermal_mix(
    pair: &ThermalPair,
    bs: &BeamSplitter,
    alpha: C64,
    beta: C64,
) -> Result<f64> {
    pair.require_positive()?;
    let (t, r) = (bs.t(), bs.r());
    let u = alpha * C64::new(t, 0.0) - beta * C64::new(r, 0.0);
    let v = alpha * C64::new(r, 0.0) + beta * C64::new(t, 0.0);
    Ok((-u.norm_sqr() / pair.nbar_a - v.norm_sqr() / pair.nbar_b).exp()
        / (PI * PI * pair.nbar_a * pair.nbar_b))
}

/// Coefficients of the conditional-state closed form after projecting mode b
/// onto one photon: `A = 1 + r²/n̄_a + t²/n̄_b`, `B = rt(1/n̄_b − 1/n̄_a)` and
/// the effective Gaussian width `w = t²/n̄_a + r²/n̄_b − B²/A`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ConditionalClosedForm {
    pub a: f64,
    pub b: f64,
    pub width: f64,
}

impl ConditionalClosedForm {
    pub fn new(pair: &ThermalPair, bs: &BeamSplitter) -> Result<Self> {
        pair.require_positive()?;
        let (t, r) = (bs.t(), bs.r());
        let (t2, r2) = (t * t, r * r);
        let a = 1.0 + r2 / pair.nbar_a + t2 / pair.nbar_b;
        let b = r * t * (1.0 / pair.nbar_b - 1.0 / pair.nbar_a);
        let width = t2 / pair.nbar_a + r2 / pair.nbar_b - b * b / a;
        if width <= 0.0 {
            return Err(Error::InvalidState(format!(
                "non-positive conditional width {width}"
            )));
        }
        Ok(Self { a, b, width })
    }
}

/// The single-mode state of arm a after the other arm of the mixed thermal
/// pair is projected onto one photon, built by integrating the closed-form
/// P function against coherent projectors on a polar grid and normalizing.
///
/// The radial grid is Richardson-checked by doubling; failure to stabilize
/// ⟨n⟩ to 1e-4 is an error. The uniform angular grid cancels every
/// off-diagonal Fock element exactly (the P function is phase-invariant),
/// so the result comes out Fock-diagonal.
pub fn conditional_p_state(
    pair: &ThermalPair,
    bs: &BeamSplitter,
    cutoff: usize,
) -> Result<DensityMatrix> {
    let form = ConditionalClosedForm::new(pair, bs)?;
    let rmax = 5.0 * pair.nbar_a.sqrt().max(pair.nbar_b.sqrt()).max(1.0);
    let coarse = conditional_quadrature(&form, rmax, 200, 64, cutoff)?;
    let fine = conditional_quadrature(&form, rmax, 400, 64, cutoff)?;
    let mean_n = |rho: &DensityMatrix| -> f64 {
        rho.populations()
            .iter()
            .enumerate()
            .map(|(k, p)| k as f64 * p)
            .sum()
    };
    let drift = (mean_n(&coarse) - mean_n(&fine)).abs();
    if drift > 1e-4 {
        return Err(Error::QuadratureNonConvergence(format!(
            "⟨n⟩ moved by {drift:.3e} under radial doubling"
        )));
    }
    Ok(fine)
}

fn conditional_quadrature(
    form: &ConditionalClosedForm,
    rmax: f64,
    radial: usize,
    angular: usize,
    cutoff: usize,
) -> Result<DensityMatrix> {
    let dr = rmax / radial as f64;
    let dphi = 2.0 * PI / angular as f64;
    let mut acc: Array2<C64> = Array2::zeros((cutoff, cutoff));
    let mut amps = vec![C64::new(0.0, 0.0); cutoff];
    for ir in 0..radial {
        let r = (ir as f64 + 0.5) * dr;
        let s = r * r;
        let weight = (-form.width * s).exp()
            * (form.b * form.b / (form.a * form.a) * s + 1.0 / form.a)
            * r
            * dr
            * dphi;
        if weight == 0.0 {
            continue;
        }
        for ia in 0..angular {
            let phi = (ia as f64 + 0.5) * dphi;
            let alpha = C64::from_polar(r, phi);
            // coherent amplitudes e^{−|α|²/2} αⁿ/√n!
            let mut c = C64::new((-s / 2.0).exp(), 0.0);
            amps[0] = c;
            for k in 1..cutoff {
                c = c * alpha / C64::new((k as f64).sqrt(), 0.0);
                amps[k] = c;
            }
            let w = C64::new(weight, 0.0);
            for i in 0..cutoff {
                let left = w * amps[i];
                for j in 0..cutoff {
                    acc[[i, j]] += left * amps[j].conj();
                }
            }
        }
    }
    let mut rho = DensityMatrix::from_matrix(1, cutoff, acc)?;
    rho.normalize();
    Ok(rho)
}

/// Excess kurtosis of the q-quadrature distribution,
/// `⟨Δq⁴⟩/⟨Δq²⟩² − 3`; zero for every Gaussian state.
pub fn quadrature_excess_kurtosis(rho: &DensityMatrix) -> Result<f64> {
    if rho.modes() != 1 {
        return Err(Error::ModeMismatch {
            expected: 1,
            got: rho.modes(),
        });
    }
    let q = position(rho.cutoff());
    let q2 = q.dot(&q);
    let q3 = q2.dot(&q);
    let q4 = q2.dot(&q2);
    let mean = rho.expectation(&q).re;
    let m2 = rho.expectation(&q2).re - mean * mean;
    let raw3 = rho.expectation(&q3).re;
    let raw4 = rho.expectation(&q4).re;
    let c4 =
        raw4 - 4.0 * mean * raw3 + 6.0 * mean * mean * (m2 + mean * mean) - 3.0 * mean.powi(4);
    Ok(c4 / (m2 * m2) - 3.0)
}

/// The three independent cross-term coefficients (q_a q_b, p_a p_b, q_a p_b)
/// of the output Wigner exponent for Gaussian inputs (μ, τ) on arm a and
/// (μ′, τ′) on arm b; the fourth cross term, p_a q_b, coincides with the
/// third. All three vanish exactly when (μ, τ) = (μ′, τ′); displacements
/// never enter.
pub fn cross_term_coefficients(
    g_a: &GaussianParams,
    g_b: &GaussianParams,
    bs: &BeamSplitter,
) -> Result<[f64; 3]> {
    let d_a = g_a.delta();
    let d_b = g_b.delta();
    if d_a.abs() < 1e-12 {
        return Err(Error::DegenerateDenominator(d_a));
    }
    if d_b.abs() < 1e-12 {
        return Err(Error::DegenerateDenominator(d_b));
    }
    let rt = bs.r() * bs.t();
    let c1 = 2.0 * rt * (2.0 * g_b.mu.re + g_b.tau) / d_b
        - 2.0 * rt * (2.0 * g_a.mu.re + g_a.tau) / d_a;
    let c2 = 2.0 * rt * (-2.0 * g_b.mu.re + g_b.tau) / d_b
        - 2.0 * rt * (-2.0 * g_a.mu.re + g_a.tau) / d_a;
    // 2irt(μ − μ*) = −4rt·Im μ
    let c3 = -4.0 * rt * g_b.mu.im / d_b + 4.0 * rt * g_a.mu.im / d_a;
    Ok([c1, c2, c3])
}

/// Box in (Re μ, Im μ, τ) space searched by [`solve_cross_terms_zero`].
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SearchDomain {
    pub mu_re: (f64, f64),
    pub mu_im: (f64, f64),
    pub tau: (f64, f64),
}

impl SearchDomain {
    /// A box comfortably containing both expected roots for the given arm-b
    /// parameters.
    pub fn around(g_b: &GaussianParams) -> Self {
        let m = g_b.mu.norm() + 1.0;
        Self {
            mu_re: (-m, m),
            mu_im: (-m, m),
            tau: (-0.5, g_b.tau + 1.5),
        }
    }

    fn contains(&self, x: f64, y: f64, tau: f64) -> bool {
        let eps = 1e-9;
        x >= self.mu_re.0 - eps
            && x <= self.mu_re.1 + eps
            && y >= self.mu_im.0 - eps
            && y <= self.mu_im.1 + eps
            && tau >= self.tau.0 - eps
            && tau <= self.tau.1 + eps
    }
}

/// A root of the cross-term equations.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct CrossRoot {
    pub mu_re: f64,
    pub mu_im: f64,
    pub tau: f64,
    /// positivity verdict: √(τ²−4|μ|²) ≥ 1/2 with τ > 0
    pub physical: bool,
    /// residual of the cross-term coefficients at the root (cleared form at
    /// degenerate denominators)
    pub residual: f64,
}

/// Numerically solve the three cross-term equations for the arm-a
/// parameters (Re μ, Im μ, τ) given arm b, running Newton iterations from a
/// grid of starts over the domain. Roots are deduplicated and tagged
/// physical or unphysical by the positivity criterion; per-start
/// non-convergence is skipped, not fatal.
pub fn solve_cross_terms_zero(
    g_b: &GaussianParams,
    bs: &BeamSplitter,
    domain: &SearchDomain,
) -> Result<Vec<CrossRoot>> {
    bs.reject_trivial()?;
    let d_b = g_b.delta();
    if d_b.abs() < 1e-12 {
        return Err(Error::DegenerateDenominator(d_b));
    }
    // cleared equations k·Δ(x,y,τ) − (linear) = 0 with the arm-b side folded
    // into constants; multiplying by Δ removes the 1/Δ pole and adds the
    // formal root at the origin
    let k1 = (2.0 * g_b.mu.re + g_b.tau) / d_b;
    let k2 = (g_b.tau - 2.0 * g_b.mu.re) / d_b;
    let k3 = 4.0 * g_b.mu.im / d_b;

    let f = |x: f64, y: f64, tau: f64| -> [f64; 3] {
        let delta = tau * tau - 4.0 * (x * x + y * y);
        [
            k1 * delta - (2.0 * x + tau),
            k2 * delta - (tau - 2.0 * x),
            k3 * delta - 4.0 * y,
        ]
    };
    let jac = |x: f64, y: f64, tau: f64| -> [[f64; 3]; 3] {
        let (dx, dy, dt) = (-8.0 * x, -8.0 * y, 2.0 * tau);
        [
            [k1 * dx - 2.0, k1 * dy, k1 * dt - 1.0],
            [k2 * dx + 2.0, k2 * dy, k2 * dt - 1.0],
            [k3 * dx, k3 * dy - 4.0, k3 * dt],
        ]
    };

    let mut roots: Vec<CrossRoot> = Vec::new();
    let starts = 4;
    let lin = |lo: f64, hi: f64, i: usize| lo + (hi - lo) * (i as f64 + 0.5) / starts as f64;
    for ix in 0..starts {
        for iy in 0..starts {
            for it in 0..starts {
                let mut x = lin(domain.mu_re.0, domain.mu_re.1, ix);
                let mut y = lin(domain.mu_im.0, domain.mu_im.1, iy);
                let mut tau = lin(domain.tau.0, domain.tau.1, it);
                let mut converged = false;
                for _ in 0..80 {
                    let fv = f(x, y, tau);
                    let norm = fv.iter().map(|v| v.abs()).fold(0.0, f64::max);
                    if norm < 1e-13 {
                        converged = true;
                        break;
                    }
                    let j = jac(x, y, tau);
                    match solve3(&j, &fv) {
                        Some(step) => {
                            x -= step[0];
                            y -= step[1];
                            tau -= step[2];
                        }
                        None => break, // singular Jacobian at this iterate
                    }
                    if !(x.is_finite() && y.is_finite() && tau.is_finite()) {
                        break;
                    }
                }
                if !converged || !domain.contains(x, y, tau) {
                    continue;
                }
                if roots.iter().any(|r| {
                    ((r.mu_re - x).powi(2) + (r.mu_im - y).powi(2) + (r.tau - tau).powi(2)).sqrt()
                        < 1e-6
                }) {
                    continue;
                }
                let candidate = GaussianParams::new(C64::new(x, y), tau, C64::new(0.0, 0.0));
                let residual = if candidate.delta().abs() > 1e-10 {
                    cross_term_coefficients(&candidate, g_b, bs)?
                        .iter()
                        .map(|c| c.abs())
                        .fold(0.0, f64::max)
                } else {
                    f(x, y, tau).iter().map(|v| v.abs()).fold(0.0, f64::max)
                };
                roots.push(CrossRoot {
                    mu_re: x,
                    mu_im: y,
                    tau,
                    physical: candidate.is_physical(),
                    residual,
                });
            }
        }
    }
    roots.sort_by(|a, b| a.tau.partial_cmp(&b.tau).unwrap());
    Ok(roots)
}

fn solve3(a: &[[f64; 3]; 3], b: &[f64; 3]) -> Option<[f64; 3]> {
    let det3 = |m: &[[f64; 3]; 3]| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let det = det3(a);
    if det.abs() < 1e-300 {
        return None;
    }
    let mut out = [0.0; 3];
    for col in 0..3 {
        let mut m = *a;
        for row in 0..3 {
            m[row][col] = b[row];
        }
        out[col] = det3(&m) / det;
    }
    Some(out)
}
