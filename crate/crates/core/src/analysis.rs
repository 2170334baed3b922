//! Numeric evaluators for the theory side: RIP and block-RIP constants at
//! desk scale, the `C0/C1` recovery constants, the probabilistic error
//! bounds for JOBS and Bagging, the JOBS sample-complexity expression, the
//! expected bootstrap noise power, and the Hoeffding tail.

use std::f64::consts::SQRT_2;

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{self, DenseMatrix};
use crate::sampling::IndexMultiset;

/// Default cap on the number of column subsets enumerated by [`rip_constant_exhaustive`].
pub const DEFAULT_ENUMERATION_CAP: u128 = 2_000_000;

/// Column norms must be within this of one for RIP evaluation.
const UNIT_COLUMN_TOL: f64 = 1e-8;

/// Upper end (exclusive) of the admissible RIP constants, `√2 − 1`.
pub const DELTA_LIMIT: f64 = SQRT_2 - 1.0;

/// `(C0(δ), C1(δ))` of the noisy `l1` recovery bound.
pub fn c_constants(delta: f64) -> Result<(f64, f64)> {
    if !(delta >= 0.0 && delta < DELTA_LIMIT) {
        return Err(Error::Domain(format!(
            "delta={delta} must lie in [0, sqrt(2)-1)"
        )));
    }
    let denom = 1.0 - (1.0 + SQRT_2) * delta;
    if denom <= 0.0 {
        return Err(Error::Domain(format!("delta={delta} makes 1-(1+sqrt2)delta nonpositive")));
    }
    let c0 = 2.0 * (1.0 - (1.0 - SQRT_2) * delta) / denom;
    let c1 = 4.0 * (1.0 + delta).sqrt() / denom;
    Ok((c0, c1))
}

#[derive(Debug, Clone, PartialEq)]
pub struct RipQuery {
    /// Matrix with unit-norm columns.
    pub a: DenseMatrix,
    pub s: usize,
    /// Maximum number of `s`-subsets to enumerate.
    pub cap: u128,
}

impl RipQuery {
    pub fn new(a: DenseMatrix, s: usize) -> Self {
        Self {
            a,
            s,
            cap: DEFAULT_ENUMERATION_CAP,
        }
    }
}

/// `C(n, k)`, saturating.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// `δ_s(A) = max_{|S| = s} ‖A_SᵀA_S − I‖₂`, by exhaustive enumeration.
///
/// Subsets smaller than `s` need not be visited: a principal submatrix's
/// eigenvalues interlace those of the full one.
pub fn rip_constant_exhaustive(q: &RipQuery) -> Result<f64> {
    let (n, s) = (q.a.cols(), q.s);
    if s == 0 || s > n {
        return Err(Error::Parameter(format!("sparsity s={s} must lie in 1..={n}")));
    }
    let required = binomial(n, s);
    if required > q.cap {
        return Err(Error::Resource {
            required,
            cap: q.cap,
        });
    }
    if let Some((j, norm)) = q
        .a
        .column_norms()
        .into_iter()
        .enumerate()
        .find(|(_, v)| (v - 1.0).abs() > UNIT_COLUMN_TOL)
    {
        return Err(Error::Parameter(format!(
            "column {j} has norm {norm}; normalize columns before computing RIP constants"
        )));
    }
    Ok(max_gram_deviation(&gram(&q.a), n, s))
}

fn gram(a: &DenseMatrix) -> Vec<f64> {
    let at = a.transpose();
    let n = a.cols();
    let mut g = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            let v = linalg::dot(at.row(i), at.row(j));
            g[i * n + j] = v;
            g[j * n + i] = v;
        }
    }
    g
}

// Largest ‖G_S − I‖ over all s-subsets, fanned out over the first index.
fn max_gram_deviation(g: &[f64], n: usize, s: usize) -> f64 {
    (0..=n - s)
        .into_par_iter()
        .map(|first| {
            let mut combo: Vec<usize> = (first..first + s).collect();
            let mut worst = 0.0f64;
            loop {
                worst = worst.max(subset_deviation(g, n, &combo));
                // Advance positions 1..s lexicographically, keeping combo[0] fixed.
                let mut pos = s;
                loop {
                    if pos <= 1 {
                        return worst;
                    }
                    pos -= 1;
                    if combo[pos] < n - s + pos {
                        break;
                    }
                }
                combo[pos] += 1;
                for p in pos + 1..s {
                    combo[p] = combo[p - 1] + 1;
                }
            }
        })
        .reduce(|| 0.0, f64::max)
}

fn subset_deviation(g: &[f64], n: usize, subset: &[usize]) -> f64 {
    let k = subset.len();
    let sub = DMatrix::from_fn(k, k, |r, c| g[subset[r] * n + subset[c]]);
    spectral_deviation(sub)
}

/// `max_i |λ_i − 1|` over the eigenvalues of a symmetric Gram matrix.
fn spectral_deviation(gram: DMatrix<f64>) -> f64 {
    SymmetricEigen::new(gram)
        .eigenvalues
        .iter()
        .fold(0.0, |m: f64, l| m.max((l - 1.0).abs()))
}

/// Block-RIP constant of the JOBS block-diagonal system, evaluated as the
/// largest RIP constant among the column-normalized row selections `A[I_j]`.
pub fn brip_jobs(a: &DenseMatrix, subsets: &[IndexMultiset], s: usize) -> Result<f64> {
    brip_jobs_with_cap(a, subsets, s, DEFAULT_ENUMERATION_CAP)
}

pub fn brip_jobs_with_cap(
    a: &DenseMatrix,
    subsets: &[IndexMultiset],
    s: usize,
    cap: u128,
) -> Result<f64> {
    if subsets.is_empty() {
        return Err(Error::Parameter("block RIP needs at least one index set".into()));
    }
    let mut worst = 0.0f64;
    for (j, subset) in subsets.iter().enumerate() {
        let sub = linalg::select_rows(a, subset.indices())?;
        let (normalized, _) = linalg::normalize_columns(&sub).map_err(|e| match e {
            Error::DegenerateColumn(column) => Error::DegenerateSubset { subset: j, column },
            other => other,
        })?;
        worst = worst.max(rip_constant_exhaustive(&RipQuery {
            a: normalized,
            s,
            cap,
        })?);
    }
    Ok(worst)
}

/// `E‖Z‖²₂,₂ = K·L·‖z‖²₂ / m` for the stacked bootstrap noise.
pub fn expected_noise_power(k: usize, l: usize, m: usize, z_l2: f64) -> Result<f64> {
    if m == 0 {
        return Err(Error::Parameter("m must be at least 1".into()));
    }
    if !(z_l2 >= 0.0 && z_l2.is_finite()) {
        return Err(Error::Parameter(format!("‖z‖₂={z_l2} must be finite and >= 0")));
    }
    Ok(k as f64 * l as f64 * z_l2 * z_l2 / m as f64)
}

/// Scalars entering the JOBS and Bagging error bounds.
///
/// In general (not exactly sparse) JOBS mode `z_l2` carries `‖Ae + z‖₂`,
/// computed by the caller on the augmented noise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundInputs {
    pub delta: f64,
    pub l: usize,
    pub m: usize,
    pub k: usize,
    pub tau: f64,
    pub z_l2: f64,
    pub z_linf: f64,
    pub s: usize,
    pub e_l1: f64,
    pub e_l2: f64,
    pub e_linf: f64,
    /// `‖A‖∞,1`, the largest row `l1` norm of the full sensing matrix.
    pub a_inf1: f64,
}

impl Default for BoundInputs {
    fn default() -> Self {
        Self {
            delta: 0.0,
            l: 1,
            m: 1,
            k: 1,
            tau: 1.0,
            z_l2: 0.0,
            z_linf: 0.0,
            s: 1,
            e_l1: 0.0,
            e_l2: 0.0,
            e_linf: 0.0,
            a_inf1: 0.0,
        }
    }
}

impl BoundInputs {
    pub fn validate(&self, exact_sparse: bool) -> Result<()> {
        if self.l == 0 || self.m == 0 || self.k == 0 || self.s == 0 {
            return Err(Error::Parameter("L, m, K and s must be at least 1".into()));
        }
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return Err(Error::Parameter(format!("tau={} must be > 0", self.tau)));
        }
        let norms = [
            ("z_l2", self.z_l2),
            ("z_linf", self.z_linf),
            ("e_l1", self.e_l1),
            ("e_l2", self.e_l2),
            ("e_linf", self.e_linf),
            ("a_inf1", self.a_inf1),
        ];
        if let Some((name, v)) = norms.iter().find(|(_, v)| !(*v >= 0.0 && v.is_finite())) {
            return Err(Error::Parameter(format!("{name}={v} must be finite and >= 0")));
        }
        if exact_sparse && self.z_linf > self.z_l2 {
            return Err(Error::Parameter(format!(
                "‖z‖∞={} cannot exceed ‖z‖₂={}",
                self.z_linf, self.z_l2
            )));
        }
        Ok(())
    }

    fn noise_term(&self) -> f64 {
        (self.l as f64 / self.m as f64).sqrt() * self.z_l2 + self.tau
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundOutput {
    pub error_bound: f64,
    /// Lower bound on the probability that the error stays below `error_bound`, clamped to `[0, 1]`.
    pub probability_lower_bound: f64,
    /// Whether clamping changed the raw probability expression.
    pub clamped: bool,
}

/// `1 − exp(−numerator/denominator)`, with a zero denominator meaning certainty.
fn tail_probability(numerator: f64, denominator: f64) -> BoundOutput {
    let raw = if denominator == 0.0 {
        1.0
    } else {
        1.0 - (-numerator / denominator).exp()
    };
    let p = raw.clamp(0.0, 1.0);
    BoundOutput {
        error_bound: f64::NAN,
        probability_lower_bound: p,
        clamped: p != raw,
    }
}

/// JOBS error bound; `exact_sparse` selects the exactly `s`-sparse form.
pub fn jobs_error_bound(inputs: &BoundInputs, exact_sparse: bool) -> Result<BoundOutput> {
    inputs.validate(exact_sparse)?;
    let (_, c1) = c_constants(inputs.delta)?;
    let kt4 = 2.0 * inputs.k as f64 * inputs.tau.powi(4);
    let l = inputs.l as f64;
    let (bound, spread) = if exact_sparse {
        (c1 * inputs.noise_term(), inputs.z_linf)
    } else {
        (
            inputs.e_l2 + c1 * inputs.noise_term(),
            inputs.a_inf1 * inputs.e_linf + inputs.z_linf,
        )
    };
    Ok(BoundOutput {
        error_bound: bound,
        ..tail_probability(kt4, l * spread.powi(4))
    })
}

/// Bagging error bound; `exact_sparse` selects the exactly `s`-sparse form.
pub fn bagging_error_bound(inputs: &BoundInputs, exact_sparse: bool) -> Result<BoundOutput> {
    inputs.validate(exact_sparse)?;
    let (c0, c1) = c_constants(inputs.delta)?;
    let k = inputs.k as f64;
    let l = inputs.l as f64;
    let tau4 = inputs.tau.powi(4);
    if exact_sparse {
        return Ok(BoundOutput {
            error_bound: c1 * inputs.noise_term(),
            ..tail_probability(2.0 * k * tau4, l * l * inputs.z_linf.powi(4))
        });
    }
    let approx = c0 * inputs.e_l1 / (inputs.s as f64).sqrt();
    let b_prime = (approx + c1 * l.sqrt() * inputs.z_linf).powi(2);
    Ok(BoundOutput {
        error_bound: approx + c1 * inputs.noise_term(),
        ..tail_probability(2.0 * k * c1.powi(4) * tau4, b_prime * b_prime)
    })
}

/// Smallest number of distinct bootstrap measurements `d` satisfying the
/// JOBS sample-complexity condition
/// `d >= β δ⁻² (2s ln(n/2s) + ln K + ln((1−α)^K / ((1−α)^K − (1−μ))))`,
/// floored at 1.
///
/// `β` is a universal constant with no known value, so results are only
/// meaningful relative to each other.
pub fn sample_complexity_jobs(
    n: usize,
    s: usize,
    k: usize,
    alpha: f64,
    mu: f64,
    beta: f64,
    delta: f64,
) -> Result<u64> {
    if n == 0 || s == 0 || k == 0 {
        return Err(Error::Parameter("n, s and K must be at least 1".into()));
    }
    if !(alpha > 0.0 && alpha <= mu && mu < 1.0) {
        return Err(Error::Parameter(format!(
            "need 0 < alpha <= mu < 1 (got alpha={alpha}, mu={mu})"
        )));
    }
    if !(delta > 0.0 && delta < DELTA_LIMIT) {
        return Err(Error::Domain(format!("delta={delta} must lie in (0, sqrt(2)-1)")));
    }
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::Parameter(format!("beta={beta} must be > 0")));
    }
    let all_distinct = (1.0 - alpha).powi(k as i32);
    let gap = all_distinct - (1.0 - mu);
    if gap <= 0.0 {
        return Err(Error::Infeasible(format!(
            "(1-alpha)^K = {all_distinct} <= 1-mu = {}; increase mu or decrease alpha or K",
            1.0 - mu
        )));
    }
    let s2 = 2.0 * s as f64;
    let value = beta / (delta * delta)
        * (s2 * (n as f64 / s2).ln() + (k as f64).ln() + (all_distinct / gap).ln());
    Ok(value.ceil().max(1.0) as u64)
}

/// Hoeffding bound `exp(−2n(ε − mean)²/(b − a)²)` on `P(average − mean >= ε − mean)`;
/// returns 1 when `ε <= mean`.
pub fn hoeffding_tail(n: usize, eps: f64, a: f64, b: f64, mean: f64) -> Result<f64> {
    if !(a < b) {
        return Err(Error::Parameter(format!("need a < b (got a={a}, b={b})")));
    }
    if eps <= mean {
        return Ok(1.0);
    }
    let t = eps - mean;
    Ok((-2.0 * n as f64 * t * t / ((b - a) * (b - a))).exp().clamp(0.0, 1.0))
}
