//! The exponent-expansion machinery: a density operator written as
//! `ρ = exp(f̂)` with the Hermitian exponent expanded in symmetric-ordered
//! quadrature products,
//!
//! ```text
//! f̂ = f₀ + f₁ⁱ ξ̂_i + f₂^{ij} {ξ̂_i ξ̂_j}_s + f₃^{ijk} {ξ̂_i ξ̂_j ξ̂_k}_s + …
//! ```
//!
//! with real, fully symmetric coefficient tensors. A two-mode product state
//! has a block-embedded exponent with no mixed-index entries; the beam
//! splitter transforms every order by its quadrature matrix, and the output
//! stays factorizable exactly when every mixed entry of every order ≥ 2 of
//! the transformed exponent vanishes. This module carries those tensors, the
//! transformation law, the factorizability checker, a randomized theorem
//! scan, and the operator-level conjugation oracle that pins the convention.

use std::collections::HashMap;

use ndarray::prelude::*;
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{momentum, position, BeamSplitter};
use crate::linalg::{self, adjoint, kron};

/// Highest supported expansion order.
pub const MAX_ORDER: usize = 6;

/// Real, fully symmetric coefficient tensor of one expansion order, stored
/// densely in row-major order over indices in `{0..dim−1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentTensor {
    order: usize,
    dim: usize,
    entries: Vec<f64>,
}

impl MomentTensor {
    /// Build from dense entries, symmetrizing over index permutations.
    pub fn new(order: usize, dim: usize, entries: Vec<f64>) -> Result<Self> {
        if !(dim == 2 || dim == 4) {
            return Err(Error::DimMismatch(dim, 2));
        }
        if order > MAX_ORDER {
            return Err(Error::SeriesFormat(format!(
                "order {order} exceeds the supported maximum {MAX_ORDER}"
            )));
        }
        let len = dim.pow(order as u32);
        if entries.len() != len {
            return Err(Error::SeriesFormat(format!(
                "order-{order} tensor over dim {dim} needs {len} entries, got {}",
                entries.len()
            )));
        }
        let mut t = Self {
            order,
            dim,
            entries,
        };
        t.symmetrize();
        Ok(t)
    }

    pub fn zeros(order: usize, dim: usize) -> Self {
        Self {
            order,
            dim,
            entries: vec![0.0; dim.pow(order as u32)],
        }
    }

    /// Order-0 scalar.
    pub fn scalar(dim: usize, value: f64) -> Self {
        Self {
            order: 0,
            dim,
            entries: vec![value],
        }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn l1_mass(&self) -> f64 {
        self.entries.iter().map(|x| x.abs()).sum()
    }

    fn linear(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.order);
        idx.iter().fold(0, |acc, &i| acc * self.dim + i)
    }

    pub fn get(&self, idx: &[usize]) -> f64 {
        self.entries[self.linear(idx)]
    }

    /// Set the entry at `idx` and at every permutation of it.
    pub fn set_sym(&mut self, idx: &[usize], value: f64) {
        let mut perm: Vec<usize> = idx.to_vec();
        perm.sort_unstable();
        loop {
            let lin = self.linear(&perm);
            self.entries[lin] = value;
            if !next_permutation(&mut perm) {
                break;
            }
        }
    }

    /// Average entries over all permutations of each index tuple (entries
    /// sharing an index multiset collapse to their mean).
    fn symmetrize(&mut self) {
        if self.order < 2 {
            return;
        }
        let mut sums: HashMap<Vec<usize>, (f64, usize)> = HashMap::new();
        let mut idx = vec![0usize; self.order];
        for lin in 0..self.entries.len() {
            decode(lin, self.dim, &mut idx);
            let mut key = idx.clone();
            key.sort_unstable();
            let slot = sums.entry(key).or_insert((0.0, 0));
            slot.0 += self.entries[lin];
            slot.1 += 1;
        }
        for lin in 0..self.entries.len() {
            decode(lin, self.dim, &mut idx);
            let mut key = idx.clone();
            key.sort_unstable();
            let (sum, count) = sums[&key];
            self.entries[lin] = sum / count as f64;
        }
    }

    /// Largest deviation from permutation symmetry.
    pub fn symmetry_error(&self) -> f64 {
        let mut worst = 0.0f64;
        let mut idx = vec![0usize; self.order];
        for lin in 0..self.entries.len() {
            decode(lin, self.dim, &mut idx);
            let mut key = idx.clone();
            key.sort_unstable();
            let canon = self.entries[self.linear(&key)];
            worst = worst.max((self.entries[lin] - canon).abs());
        }
        worst
    }

    /// Contract every index with the matrix `m`: `T̄^{j…} = Σ m[j,i]… T^{i…}`.
    pub fn mode_transform(&self, m: &Array2<f64>) -> Self {
        assert_eq!(m.nrows(), self.dim);
        assert_eq!(m.ncols(), self.dim);
        let mut cur = self.entries.clone();
        let n = self.order;
        let dim = self.dim;
        let mut idx = vec![0usize; n];
        for axis in 0..n {
            let mut next = vec![0.0; cur.len()];
            let stride = dim.pow((n - 1 - axis) as u32);
            for (lin, slot) in next.iter_mut().enumerate() {
                decode(lin, dim, &mut idx);
                let j = idx[axis];
                let base = lin - j * stride;
                let mut acc = 0.0;
                for i in 0..dim {
                    acc += m[[j, i]] * cur[base + i * stride];
                }
                *slot = acc;
            }
            cur = next;
        }
        Self {
            order: n,
            dim,
            entries: cur,
        }
    }
}

fn decode(mut lin: usize, dim: usize, idx: &mut [usize]) {
    for slot in idx.iter_mut().rev() {
        *slot = lin % dim;
        lin /= dim;
    }
}

fn next_permutation(v: &mut [usize]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let mut i = v.len() - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = v.len() - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

/// Ordered list of coefficient tensors for orders `0..=n_max` over a common
/// dimension (2 for one mode, 4 for two modes).
#[derive(Debug, Clone, PartialEq)]
pub struct ExponentSeries {
    dim: usize,
    tensors: Vec<MomentTensor>,
}

impl ExponentSeries {
    pub fn zero(dim: usize, n_max: usize) -> Result<Self> {
        if n_max > MAX_ORDER {
            return Err(Error::SeriesFormat(format!(
                "n_max {n_max} exceeds the supported maximum {MAX_ORDER}"
            )));
        }
        Ok(Self {
            dim,
            tensors: (0..=n_max).map(|n| MomentTensor::zeros(n, dim)).collect(),
        })
    }

    pub fn from_tensors(tensors: Vec<MomentTensor>) -> Result<Self> {
        if tensors.is_empty() {
            return Err(Error::SeriesFormat("series needs at least order 0".into()));
        }
        let dim = tensors[0].dim();
        for (n, t) in tensors.iter().enumerate() {
            if t.dim() != dim {
                return Err(Error::DimMismatch(t.dim(), dim));
            }
            if t.order() != n {
                return Err(Error::SeriesFormat(format!(
                    "tensor at position {n} has order {}",
                    t.order()
                )));
            }
        }
        if tensors.len() - 1 > MAX_ORDER {
            return Err(Error::SeriesFormat(format!(
                "n_max {} exceeds the supported maximum {MAX_ORDER}",
                tensors.len() - 1
            )));
        }
        Ok(Self { dim, tensors })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_max(&self) -> usize {
        self.tensors.len() - 1
    }

    pub fn order(&self, n: usize) -> &MomentTensor {
        &self.tensors[n]
    }

    pub fn order_mut(&mut self, n: usize) -> &mut MomentTensor {
        &mut self.tensors[n]
    }

    pub fn tensors(&self) -> &[MomentTensor] {
        &self.tensors
    }

    /// Total ℓ₁ mass of all coefficients.
    pub fn l1_mass(&self) -> f64 {
        self.tensors.iter().map(MomentTensor::l1_mass).sum()
    }

    /// Embed a factorizable two-mode exponent `ĥ = f̂(ξ_a) + ĝ(ξ_b)`:
    /// order-0 terms add, pure-a entries come from `f`, pure-b entries from
    /// `g` with indices shifted, and every mixed entry is zero.
    pub fn embed_product(f: &ExponentSeries, g: &ExponentSeries) -> Result<ExponentSeries> {
        if f.dim != 2 || g.dim != 2 {
            return Err(Error::DimMismatch(f.dim.max(g.dim), 2));
        }
        if f.n_max() != g.n_max() {
            return Err(Error::OrderMismatch(f.n_max(), g.n_max()));
        }
        let n_max = f.n_max();
        let mut out = ExponentSeries::zero(4, n_max)?;
        out.tensors[0] = MomentTensor::scalar(4, f.order(0).entries()[0] + g.order(0).entries()[0]);
        let mut idx = Vec::new();
        for n in 1..=n_max {
            let t = &mut out.tensors[n];
            idx.resize(n, 0);
            for lin in 0..t.entries.len() {
                decode(lin, 4, &mut idx);
                if idx.iter().all(|&i| i < 2) {
                    t.entries[lin] = f.order(n).get(&idx);
                } else if idx.iter().all(|&i| i >= 2) {
                    let shifted: Vec<usize> = idx.iter().map(|&i| i - 2).collect();
                    t.entries[lin] = g.order(n).get(&shifted);
                }
            }
        }
        Ok(out)
    }

    /// Transform every order by the beam splitter's quadrature matrix
    /// (order 0 is unchanged). Symmetry is preserved because the same matrix
    /// contracts every axis.
    pub fn transform(&self, bs: &BeamSplitter) -> Result<ExponentSeries> {
        if self.dim != 4 {
            return Err(Error::DimMismatch(self.dim, 4));
        }
        let m = bs.quadrature_matrix();
        let tensors = self
            .tensors
            .iter()
            .map(|t| {
                if t.order() == 0 {
                    t.clone()
                } else {
                    t.mode_transform(&m)
                }
            })
            .collect();
        ExponentSeries::from_tensors(tensors)
    }

    /// Serialize to the interchange document
    /// `{ "dim": d, "tensors": { "<order>": <nested row-major arrays> } }`.
    pub fn to_json(&self) -> serde_json::Value {
        fn nest(entries: &[f64], order: usize, dim: usize) -> serde_json::Value {
            if order == 0 {
                return serde_json::json!(entries[0]);
            }
            let chunk = entries.len() / dim;
            serde_json::Value::Array(
                (0..dim)
                    .map(|i| nest(&entries[i * chunk..(i + 1) * chunk], order - 1, dim))
                    .collect(),
            )
        }
        let mut tensors = serde_json::Map::new();
        for t in &self.tensors {
            tensors.insert(t.order().to_string(), nest(t.entries(), t.order(), t.dim()));
        }
        serde_json::json!({ "dim": self.dim, "tensors": tensors })
    }

    /// Parse the interchange document. Missing orders are zero; the highest
    /// order present fixes `n_max`.
    pub fn from_json(v: &serde_json::Value) -> Result<ExponentSeries> {
        let dim = v
            .get("dim")
            .and_then(|d| d.as_u64())
            .ok_or_else(|| Error::SeriesFormat("missing integer field `dim`".into()))?
            as usize;
        if !(dim == 2 || dim == 4) {
            return Err(Error::SeriesFormat(format!("dim must be 2 or 4, got {dim}")));
        }
        let map = v
            .get("tensors")
            .and_then(|t| t.as_object())
            .ok_or_else(|| Error::SeriesFormat("missing object field `tensors`".into()))?;

        fn flatten(
            v: &serde_json::Value,
            dim: usize,
            depth: usize,
            out: &mut Vec<f64>,
        ) -> Result<()> {
            if depth == 0 {
                let x = v
                    .as_f64()
                    .ok_or_else(|| Error::SeriesFormat("tensor leaf is not a number".into()))?;
                out.push(x);
                return Ok(());
            }
            let arr = v.as_array().ok_or_else(|| {
                Error::SeriesFormat("tensor nesting does not match its order".into())
            })?;
            if arr.len() != dim {
                return Err(Error::SeriesFormat(format!(
                    "tensor axis has length {}, expected {dim}",
                    arr.len()
                )));
            }
            for item in arr {
                flatten(item, dim, depth - 1, out)?;
            }
            Ok(())
        }

        let mut orders: Vec<(usize, &serde_json::Value)> = Vec::new();
        for (k, val) in map {
            let n: usize = k
                .parse()
                .map_err(|_| Error::SeriesFormat(format!("tensor key `{k}` is not an order")))?;
            if n > MAX_ORDER {
                return Err(Error::SeriesFormat(format!(
                    "order {n} exceeds the supported maximum {MAX_ORDER}"
                )));
            }
            orders.push((n, val));
        }
        let n_max = orders.iter().map(|(n, _)| *n).max().unwrap_or(0);
        let mut series = ExponentSeries::zero(dim, n_max)?;
        for (n, val) in orders {
            let mut flat = Vec::with_capacity(dim.pow(n as u32));
            flatten(val, dim, n, &mut flat)?;
            series.tensors[n] = MomentTensor::new(n, dim, flat)?;
        }
        Ok(series)
    }
}

/// Outcome of the factorizability conditions on a transformed two-mode
/// exponent: the mixed-index residuals of every order ≥ 2.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FactorReport {
    pub theta: f64,
    pub tol: f64,
    pub max_residual: f64,
    /// max |mixed entry| per order, indexed from order 0 (orders 0 and 1
    /// have no mixed entries and stay zero)
    pub residual_by_order: Vec<f64>,
    pub pass: bool,
}

/// Transform the embedded product exponent and collect every mixed-index
/// entry of every order ≥ 2; the output factorizes exactly when they all
/// vanish.
pub fn check_factorizable(
    f: &ExponentSeries,
    g: &ExponentSeries,
    bs: &BeamSplitter,
    tol: f64,
) -> Result<FactorReport> {
    bs.reject_trivial()?;
    let h = ExponentSeries::embed_product(f, g)?;
    let hbar = h.transform(bs)?;
    let mut by_order = vec![0.0f64; hbar.n_max() + 1];
    let mut idx = Vec::new();
    for n in 2..=hbar.n_max() {
        let t = hbar.order(n);
        idx.resize(n, 0);
        let mut worst = 0.0f64;
        for lin in 0..t.entries().len() {
            decode(lin, 4, &mut idx);
            let has_a = idx.iter().any(|&i| i < 2);
            let has_b = idx.iter().any(|&i| i >= 2);
            if has_a && has_b {
                worst = worst.max(t.entries()[lin].abs());
            }
        }
        by_order[n] = worst;
    }
    let max_residual = by_order.iter().cloned().fold(0.0, f64::max);
    Ok(FactorReport {
        theta: bs.theta(),
        tol,
        max_residual,
        residual_by_order: by_order,
        pass: max_residual <= tol,
    })
}

/// The same mixed-entry residuals read directly off the untransformed
/// single-mode tensors: a mixed index with `p` mode-a slots and `q` mode-b
/// slots carries `t^p (−r)^q f^{k…} + r^p t^q g^{k…}`. Cross-checks the
/// embedding-plus-contraction route.
pub fn direct_mixed_residuals(
    f: &ExponentSeries,
    g: &ExponentSeries,
    bs: &BeamSplitter,
) -> Result<Vec<f64>> {
    if f.n_max() != g.n_max() {
        return Err(Error::OrderMismatch(f.n_max(), g.n_max()));
    }
    let (t, r) = (bs.t(), bs.r());
    let mut by_order = vec![0.0f64; f.n_max() + 1];
    let mut idx = Vec::new();
    for n in 2..=f.n_max() {
        idx.resize(n, 0);
        let mut worst = 0.0f64;
        for lin in 0..4usize.pow(n as u32) {
            decode(lin, 4, &mut idx);
            let p = idx.iter().filter(|&&i| i < 2).count();
            let q = n - p;
            if p == 0 || q == 0 {
                continue;
            }
            let collapsed: Vec<usize> = idx.iter().map(|&i| i % 2).collect();
            let res = t.powi(p as i32) * (-r).powi(q as i32) * f.order(n).get(&collapsed)
                + r.powi(p as i32) * t.powi(q as i32) * g.order(n).get(&collapsed);
            worst = worst.max(res.abs());
        }
        by_order[n] = worst;
    }
    Ok(by_order)
}

/// One failed expectation found by [`theorem_scan`] (the list must stay
/// empty for the theorem to stand).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Counterexample {
    pub trial: usize,
    pub theta: f64,
    pub kind: String,
    pub residual: f64,
}

/// Randomized verification record for the factorizability theorem.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScanReport {
    pub n_max: usize,
    pub trials: usize,
    pub seed: u64,
    pub tol: f64,
    /// identical-second-order samples that passed (all of them must)
    pub gaussian_pass: usize,
    /// violating samples that failed as required
    pub violation_fail: usize,
    pub max_identical_residual: f64,
    pub min_violation_residual: f64,
    /// largest disagreement between the transform route and the direct
    /// per-order reading of the conditions
    pub reading_disagreement: f64,
    pub counterexamples: Vec<Counterexample>,
}

fn random_tensor(rng: &mut ChaCha8Rng, order: usize, dim: usize) -> MomentTensor {
    let entries: Vec<f64> = (0..dim.pow(order as u32))
        .map(|_| rng.gen_range(-1.0..1.0))
        .collect();
    MomentTensor::new(order, dim, entries).expect("dimensions are consistent")
}

/// Randomized scan over the factorizability conditions:
///
/// * identical second-order tensors with arbitrary (different) first-order
///   terms and no higher orders must pass at every sampled angle;
/// * unequal second orders, or any nonzero order ≥ 3 (even with f = g),
///   must fail;
/// * the transform route and the direct reading of the conditions must agree.
///
/// Counterexamples to any expectation are collected. Per-trial seeds derive
/// deterministically from `seed`, so a fixed seed reproduces the report
/// bit for bit.
pub fn theorem_scan(n_max: usize, trials: usize, seed: u64) -> Result<ScanReport> {
    if n_max < 3 {
        return Err(Error::SeriesFormat(
            "theorem_scan needs n_max ≥ 3 to probe higher orders".into(),
        ));
    }
    const TOL: f64 = 1e-10;
    let mut report = ScanReport {
        n_max,
        trials,
        seed,
        tol: TOL,
        gaussian_pass: 0,
        violation_fail: 0,
        max_identical_residual: 0.0,
        min_violation_residual: f64::INFINITY,
        reading_disagreement: 0.0,
        counterexamples: Vec::new(),
    };
    for trial in 0..trials {
        let mut rng =
            ChaCha8Rng::seed_from_u64(seed ^ (trial as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
        let theta = rng.gen_range(0.1..(std::f64::consts::PI - 0.1));
        let bs = BeamSplitter::new(theta);

        // (i) identical second order, distinct first order, nothing higher
        let f2 = random_tensor(&mut rng, 2, 2);
        let mut f = ExponentSeries::zero(2, n_max)?;
        let mut g = ExponentSeries::zero(2, n_max)?;
        *f.order_mut(2) = f2.clone();
        *g.order_mut(2) = f2;
        *f.order_mut(1) = random_tensor(&mut rng, 1, 2);
        *g.order_mut(1) = random_tensor(&mut rng, 1, 2);
        let rep = check_factorizable(&f, &g, &bs, TOL)?;
        track_reading(&mut report, trial, &f, &g, &bs, &rep)?;
        if rep.pass {
            report.gaussian_pass += 1;
            report.max_identical_residual = report.max_identical_residual.max(rep.max_residual);
        } else {
            report.counterexamples.push(Counterexample {
                trial,
                theta,
                kind: "identical-gaussian-rejected".into(),
                residual: rep.max_residual,
            });
        }

        // (ii) a violation: unequal second order, or a nonzero higher order
        let high = 3 + trial % (n_max - 2); // cycles through 3..=n_max
        let mut fv = ExponentSeries::zero(2, n_max)?;
        let mut gv = ExponentSeries::zero(2, n_max)?;
        let kind;
        if trial % 2 == 0 {
            *fv.order_mut(2) = random_tensor(&mut rng, 2, 2);
            *gv.order_mut(2) = random_tensor(&mut rng, 2, 2);
            // keep the pair clearly unequal
            let sep: f64 = fv
                .order(2)
                .entries()
                .iter()
                .zip(gv.order(2).entries())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            if sep < 0.05 {
                let e = gv.order(2).entries().to_vec();
                *gv.order_mut(2) = MomentTensor::new(2, 2, e.iter().map(|x| x + 0.5).collect())?;
            }
            kind = "unequal-second-order";
        } else {
            let t = random_tensor(&mut rng, high, 2);
            *fv.order_mut(2) = random_tensor(&mut rng, 2, 2);
            *gv.order_mut(2) = fv.order(2).clone();
            *fv.order_mut(high) = t.clone();
            *gv.order_mut(high) = t;
            kind = "nonzero-higher-order";
        }
        let repv = check_factorizable(&fv, &gv, &bs, TOL)?;
        track_reading(&mut report, trial, &fv, &gv, &bs, &repv)?;
        if repv.pass {
            report.counterexamples.push(Counterexample {
                trial,
                theta,
                kind: format!("{kind}-accepted"),
                residual: repv.max_residual,
            });
        } else {
            report.violation_fail += 1;
            report.min_violation_residual = report.min_violation_residual.min(repv.max_residual);
        }
    }
    if trials == 0 {
        report.min_violation_residual = 0.0;
    }
    Ok(report)
}

fn track_reading(
    report: &mut ScanReport,
    trial: usize,
    f: &ExponentSeries,
    g: &ExponentSeries,
    bs: &BeamSplitter,
    rep: &FactorReport,
) -> Result<()> {
    let direct = direct_mixed_residuals(f, g, bs)?;
    for (n, (a, b)) in rep.residual_by_order.iter().zip(&direct).enumerate() {
        let dev = (a - b).abs();
        report.reading_disagreement = report.reading_disagreement.max(dev);
        if dev > 1e-10 {
            report.counterexamples.push(Counterexample {
                trial,
                theta: bs.theta(),
                kind: format!("reading-disagreement-order-{n}"),
                residual: dev,
            });
        }
    }
    Ok(())
}

/// Precomputed symmetric-ordered quadrature products on the truncated
/// two-mode space, shared across operator builds at one cutoff.
pub struct QuadratureCalculus {
    cutoff: usize,
    dim: usize,
    /// one product per index multiset, keyed by the sorted index list
    products: HashMap<Vec<u8>, Array2<C64>>,
}

impl QuadratureCalculus {
    /// Build products for all multisets up to `max_order` over the two-mode
    /// quadrature set (q_a, p_a, q_b, p_b).
    pub fn new(cutoff: usize, max_order: usize) -> Result<Self> {
        let eye: Array2<C64> = Array2::eye(cutoff);
        let q = position(cutoff);
        let p = momentum(cutoff);
        let xi = [
            kron(&q, &eye),
            kron(&p, &eye),
            kron(&eye, &q),
            kron(&eye, &p),
        ];
        let dim = cutoff * cutoff;
        let mut products: HashMap<Vec<u8>, Array2<C64>> = HashMap::new();
        products.insert(Vec::new(), Array2::eye(dim));
        // S_m = (1/n) Σ_k mult_k(m) ξ_k S_{m∖k}: first-element grouping of
        // the permutation average
        for n in 1..=max_order {
            for m in multisets(n) {
                let mut acc: Array2<C64> = Array2::zeros((dim, dim));
                for &k in dedup(&m).iter() {
                    let mult = m.iter().filter(|&&x| x == k).count() as f64;
                    let mut rest = m.clone();
                    let pos = rest.iter().position(|&x| x == k).unwrap();
                    rest.remove(pos);
                    let sub = &products[&rest];
                    acc = acc + xi[k as usize].dot(sub).mapv(|z| z * C64::new(mult, 0.0));
                }
                acc.mapv_inplace(|z| z / C64::new(n as f64, 0.0));
                products.insert(m, acc);
            }
        }
        Ok(Self {
            cutoff,
            dim,
            products,
        })
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    /// Assemble the Hermitian operator of a dim-4 exponent series:
    /// `Σ_n Σ_m h_n[m] · (#arrangements of m) · S_m`.
    pub fn operator(&self, series: &ExponentSeries) -> Result<Array2<C64>> {
        if series.dim() != 4 {
            return Err(Error::DimMismatch(series.dim(), 4));
        }
        let mut h: Array2<C64> = Array2::zeros((self.dim, self.dim));
        for n in 0..=series.n_max() {
            let t = series.order(n);
            if n == 0 {
                let c = C64::new(t.entries()[0], 0.0);
                for i in 0..self.dim {
                    h[[i, i]] += c;
                }
                continue;
            }
            for m in multisets(n) {
                let idx: Vec<usize> = m.iter().map(|&x| x as usize).collect();
                let c = t.get(&idx);
                if c == 0.0 {
                    continue;
                }
                let weight = C64::new(c * arrangements(&m) as f64, 0.0);
                let prod = self.products.get(&m).ok_or_else(|| {
                    Error::SeriesFormat(format!("order {n} exceeds the prepared products"))
                })?;
                h.zip_mut_with(prod, |acc, x| *acc += weight * x);
            }
        }
        Ok(h)
    }
}

fn multisets(n: usize) -> Vec<Vec<u8>> {
    let mut out = Vec::new();
    let mut cur = vec![0u8; n];
    loop {
        out.push(cur.clone());
        // next non-decreasing tuple over {0..3}
        let mut i = n;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if cur[i] < 3 {
                let v = cur[i] + 1;
                for slot in cur.iter_mut().skip(i) {
                    *slot = v;
                }
                break;
            }
        }
    }
}

fn dedup(m: &[u8]) -> Vec<u8> {
    let mut d: Vec<u8> = m.to_vec();
    d.dedup();
    d
}

fn arrangements(m: &[u8]) -> usize {
    let mut counts = [0usize; 4];
    for &x in m {
        counts[x as usize] += 1;
    }
    let fact = |k: usize| -> usize { (1..=k).product::<usize>().max(1) };
    fact(m.len()) / counts.iter().map(|&c| fact(c)).product::<usize>()
}

/// Options for [`exponent_conjugation_check`].
#[derive(Debug, Clone, Copy)]
pub struct ConjugationOptions {
    /// Cap on the total coefficient ℓ₁ mass of the two series.
    pub norm_cap: f64,
    /// The comparison excludes states within `margin` total photons of the
    /// truncation edge, where the finite basis pollutes both exponentials;
    /// on the retained block the conjugation identity is exact. `None`
    /// picks 2·n_max + 2: an order-n term hops at most n photons, so
    /// boundary pollution needs more than two applications to reach the
    /// retained block.
    pub margin: Option<usize>,
}

impl Default for ConjugationOptions {
    fn default() -> Self {
        Self {
            norm_cap: 0.5,
            margin: None,
        }
    }
}

/// Operator-level witness tying the coefficient transformation law to
/// beam-splitter conjugation: builds `ĥ = f̂ + ĝ` in the truncated two-mode
/// space and compares `U e^{ĥ} U†` with `e^{h̄}`, where `h̄` carries the
/// transformed coefficients. Returns the largest elementwise deviation on
/// the truncation-safe block; a convention error in the transform shows up
/// orders of magnitude above the truncation noise.
pub fn exponent_conjugation_check(
    f: &ExponentSeries,
    g: &ExponentSeries,
    bs: &BeamSplitter,
    cutoff: usize,
    opts: ConjugationOptions,
) -> Result<f64> {
    let calc = QuadratureCalculus::new(cutoff, f.n_max().max(g.n_max()))?;
    exponent_conjugation_check_with(&calc, f, g, bs, opts)
}

/// [`exponent_conjugation_check`] against a shared [`QuadratureCalculus`]
/// (the products dominate the cost when checking many series).
pub fn exponent_conjugation_check_with(
    calc: &QuadratureCalculus,
    f: &ExponentSeries,
    g: &ExponentSeries,
    bs: &BeamSplitter,
    opts: ConjugationOptions,
) -> Result<f64> {
    let mass = f.l1_mass() + g.l1_mass();
    if mass > opts.norm_cap {
        return Err(Error::NormCapExceeded {
            mass,
            cap: opts.norm_cap,
        });
    }
    let h = ExponentSeries::embed_product(f, g)?;
    let hbar = h.transform(bs)?;
    let op = calc.operator(&h)?;
    let op_bar = calc.operator(&hbar)?;
    let u = bs.unitary(calc.cutoff())?;
    let lhs = u.dot(&linalg::expm(&op)?).dot(&adjoint(&u));
    let rhs = linalg::expm(&op_bar)?;
    let margin = opts.margin.unwrap_or(2 * f.n_max().max(g.n_max()).max(1) + 2);
    Ok(restricted_deviation(&lhs, &rhs, calc.cutoff(), margin))
}

/// Max elementwise |a − b| over entries whose row and column states both
/// carry total photon number ≤ cutoff − 1 − margin.
pub fn restricted_deviation(
    a: &Array2<C64>,
    b: &Array2<C64>,
    cutoff: usize,
    margin: usize,
) -> f64 {
    let smax = (cutoff - 1).saturating_sub(margin);
    if smax == 0 {
        log::warn!("margin {margin} leaves only the vacuum element at cutoff {cutoff}");
    }
    let mut dev = 0.0f64;
    for ra in 0..cutoff {
        for rb in 0..cutoff {
            if ra + rb > smax {
                continue;
            }
            let row = ra * cutoff + rb;
            for ca in 0..cutoff {
                for cb in 0..cutoff {
                    if ca + cb > smax {
                        continue;
                    }
                    let col = ca * cutoff + cb;
                    dev = dev.max((a[[row, col]] - b[[row, col]]).norm());
                }
            }
        }
    }
    dev
}

/// Random state-like exponent series: a negative-definite second-order core
/// (so `e^{ĥ}` behaves like an unnormalized state and the truncated
/// exponential converges) plus small order-weighted perturbations through
/// `n_max` (order-n entries scaled by 8^{1−n}, which keeps every order's
/// operator contribution bounded on the truncated space). Satisfies the
/// default ℓ₁ norm cap by construction.
pub fn sample_state_like_series(rng: &mut ChaCha8Rng, n_max: usize, core: f64, scale: f64) -> ExponentSeries {
    let mut s = ExponentSeries::zero(2, n_max).expect("n_max within bound");
    *s.order_mut(0) = MomentTensor::scalar(2, rng.gen_range(-0.05..0.05));
    for n in 1..=n_max {
        let w = scale / (8.0f64).powi(n as i32 - 1);
        let entries: Vec<f64> = (0..2usize.pow(n as u32))
            .map(|_| rng.gen_range(-w..w))
            .collect();
        *s.order_mut(n) = MomentTensor::new(n, 2, entries).expect("consistent dims");
    }
    let t2 = s.order(2).entries().to_vec();
    *s.order_mut(2) = MomentTensor::new(2, 2, vec![t2[0] - core, t2[1], t2[2], t2[3] - core])
        .expect("consistent dims");
    s
}
