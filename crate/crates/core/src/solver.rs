//! ADMM for the joint-sparse least-squares problem
//!
//! ```text
//! minimize_X  λ ‖X‖₁,₂ + ½ Σ_j ‖y_j − A_j x_j‖²
//! ```
//!
//! where column `x_j` of `X` only meets its own pair `(A_j, y_j)` and the
//! rows of `X` are coupled through the `l1,2` penalty. With one column this
//! is the ordinary LASSO.
//!
//! The splitting is the consensus form `X = Z`:
//!
//! ```text
//! x_j ← (A_jᵀA_j + ρI)⁻¹ (A_jᵀy_j + ρ(z_j − u_j))
//! Z   ← row-wise block soft threshold of (X + U) at λ/ρ
//! U   ← U + X − Z
//! ```
//!
//! The reported estimate is `Z`, which is exactly row sparse. Each column's
//! linear operator is factored once per solver; when `L < n` it is applied
//! in the `L`-dimensional dual space through the matrix inversion lemma.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{self, DenseMatrix, DenseVector};

// Below this many flops per x-update sweep the columns are updated serially.
const PARALLEL_WORK_THRESHOLD: usize = 1 << 18;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    /// Penalty weight on `‖X‖₁,₂`.
    pub lambda: f64,
    /// ADMM augmented-Lagrangian penalty.
    pub rho: f64,
    pub max_iter: usize,
    pub eps_abs: f64,
    pub eps_rel: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            lambda: 1.0,
            rho: 1.0,
            max_iter: 2000,
            eps_abs: 1e-6,
            eps_rel: 1e-4,
        }
    }
}

impl SolverConfig {
    pub fn with_lambda(self, lambda: f64) -> Self {
        Self { lambda, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::Parameter(format!("lambda={} must be >= 0", self.lambda)));
        }
        if !(self.rho > 0.0 && self.rho.is_finite()) {
            return Err(Error::Parameter(format!("rho={} must be > 0", self.rho)));
        }
        if self.max_iter == 0 {
            return Err(Error::Parameter("max_iter must be at least 1".into()));
        }
        if !(self.eps_abs > 0.0 && self.eps_rel > 0.0) {
            return Err(Error::Parameter("tolerances must be positive".into()));
        }
        Ok(())
    }
}

/// `K` sensing pairs `(A_j, y_j)` sharing the column count `n`.
#[derive(Debug, Clone)]
pub struct JointProblem {
    pairs: Vec<(DenseMatrix, DenseVector)>,
    n: usize,
}

impl JointProblem {
    pub fn new(pairs: Vec<(DenseMatrix, DenseVector)>) -> Result<Self> {
        let n = match pairs.first() {
            Some((a, _)) => a.cols(),
            None => return Err(Error::Parameter("joint problem needs K >= 1 pairs".into())),
        };
        for (j, (a, y)) in pairs.iter().enumerate() {
            if a.cols() != n {
                return Err(Error::Dimension(format!(
                    "pair {j} has {} columns, expected {n}",
                    a.cols()
                )));
            }
            if a.rows() != y.len() {
                return Err(Error::Dimension(format!(
                    "pair {j}: A has {} rows but y has {} entries",
                    a.rows(),
                    y.len()
                )));
            }
        }
        Ok(Self { pairs, n })
    }

    pub fn single(a: DenseMatrix, y: DenseVector) -> Result<Self> {
        Self::new(vec![(a, y)])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.pairs.len()
    }

    pub fn pairs(&self) -> &[(DenseMatrix, DenseVector)] {
        &self.pairs
    }

    /// `λ‖X‖₁,₂ + ½Σ‖y_j − A_j x_j‖²` for an `n × K` matrix `X`.
    pub fn objective(&self, x: &DenseMatrix, lambda: f64) -> f64 {
        let cols: Vec<Vec<f64>> = (0..x.cols()).map(|j| x.column(j)).collect();
        self.objective_columns(&cols, lambda)
    }

    fn objective_columns(&self, cols: &[Vec<f64>], lambda: f64) -> f64 {
        let mut penalty = 0.0;
        for i in 0..self.n {
            penalty += cols.iter().map(|c| c[i] * c[i]).sum::<f64>().sqrt();
        }
        let fit: f64 = self
            .pairs
            .iter()
            .zip(cols)
            .map(|((a, y), x)| {
                a.matvec(x)
                    .iter()
                    .zip(y.as_slice())
                    .map(|(ax, yi)| (yi - ax) * (yi - ax))
                    .sum::<f64>()
            })
            .sum();
        lambda * penalty + 0.5 * fit
    }

    /// Smallest `λ` for which `X = 0` is optimal: the largest row norm of `(A_1ᵀy_1 | … | A_Kᵀy_K)`.
    pub fn lambda_max(&self) -> f64 {
        let grads: Vec<Vec<f64>> = self
            .pairs
            .iter()
            .map(|(a, y)| a.t_matvec(y.as_slice()))
            .collect();
        (0..self.n)
            .map(|i| grads.iter().map(|g| g[i] * g[i]).sum::<f64>().sqrt())
            .fold(0.0, f64::max)
    }
}

/// Initial primal/dual iterates for a warm-started solve.
#[derive(Debug, Clone, PartialEq)]
pub struct WarmStart {
    /// `n × K` consensus iterate.
    pub z: DenseMatrix,
    /// `n × K` scaled dual iterate.
    pub u: DenseMatrix,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    /// `n × K` row-sparse estimate.
    pub x: DenseMatrix,
    /// Final scaled dual variable, kept for warm starts.
    pub dual: DenseMatrix,
    pub iterations: usize,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub objective: f64,
    pub converged: bool,
}

impl SolveReport {
    pub fn warm_start(&self) -> WarmStart {
        WarmStart {
            z: self.x.clone(),
            u: self.dual.clone(),
        }
    }
}

enum ColumnOperator {
    /// `(AᵀA + ρI)⁻¹`, `n × n`, used when `L >= n`.
    Primal(Vec<f64>),
    /// `(ρI + AAᵀ)⁻¹`, `L × L`, used when `L < n`.
    Dual(Vec<f64>),
}

struct ColumnBlock {
    a: DenseMatrix,
    aty: Vec<f64>,
    op: ColumnOperator,
}

impl ColumnBlock {
    fn new(a: &DenseMatrix, y: &DenseVector, rho: f64) -> Result<Self> {
        let am = a.to_nalgebra();
        let (l, n) = (a.rows(), a.cols());
        let (gram, dim) = if l >= n {
            (am.transpose() * &am, n)
        } else {
            (&am * am.transpose(), l)
        };
        let shifted = gram + DMatrix::<f64>::identity(dim, dim) * rho;
        let inv = shifted
            .cholesky()
            .ok_or_else(|| Error::Domain("shifted Gram matrix is not positive definite".into()))?
            .inverse();
        let flat: Vec<f64> = (0..dim)
            .flat_map(|i| inv.row(i).iter().copied().collect::<Vec<_>>())
            .collect();
        Ok(Self {
            a: a.clone(),
            aty: a.t_matvec(y.as_slice()),
            op: if l >= n {
                ColumnOperator::Primal(flat)
            } else {
                ColumnOperator::Dual(flat)
            },
        })
    }

    /// Solves `(AᵀA + ρI) x = q`.
    fn apply(&self, q: &[f64], rho: f64, x: &mut [f64]) {
        match &self.op {
            ColumnOperator::Primal(inv) => {
                let n = q.len();
                for (i, xi) in x.iter_mut().enumerate() {
                    *xi = linalg::dot(&inv[i * n..(i + 1) * n], q);
                }
            }
            ColumnOperator::Dual(inv) => {
                let l = self.a.rows();
                let aq = self.a.matvec(q);
                let w: Vec<f64> = (0..l).map(|i| linalg::dot(&inv[i * l..(i + 1) * l], &aq)).collect();
                x.copy_from_slice(q);
                for (i, wi) in w.iter().enumerate() {
                    linalg::axpy(-wi, self.a.row(i), x);
                }
                let inv_rho = 1.0 / rho;
                x.iter_mut().for_each(|v| *v *= inv_rho);
            }
        }
    }

    fn work(&self) -> usize {
        match &self.op {
            ColumnOperator::Primal(_) => self.a.cols() * self.a.cols(),
            ColumnOperator::Dual(_) => self.a.rows() * (2 * self.a.cols() + self.a.rows()),
        }
    }
}

/// ADMM solver with the per-column factorizations cached, so a path of `λ`
/// values (at fixed `ρ`) reuses them.
pub struct GroupLassoSolver {
    problem: JointProblem,
    blocks: Vec<ColumnBlock>,
    rho: f64,
}

impl GroupLassoSolver {
    pub fn new(problem: JointProblem, rho: f64) -> Result<Self> {
        if !(rho > 0.0 && rho.is_finite()) {
            return Err(Error::Parameter(format!("rho={rho} must be > 0")));
        }
        let blocks = problem
            .pairs
            .iter()
            .map(|(a, y)| ColumnBlock::new(a, y, rho))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            problem,
            blocks,
            rho,
        })
    }

    pub fn problem(&self) -> &JointProblem {
        &self.problem
    }

    pub fn solve(&self, cfg: &SolverConfig, warm: Option<&WarmStart>) -> Result<SolveReport> {
        cfg.validate()?;
        if cfg.rho != self.rho {
            return Err(Error::Parameter(format!(
                "solver was factored for rho={}, config asks for rho={}",
                self.rho, cfg.rho
            )));
        }
        let (n, k) = (self.problem.n, self.problem.k());
        let rho = self.rho;

        let (mut z, mut u) = match warm {
            Some(w) => {
                for m in [&w.z, &w.u] {
                    if m.rows() != n || m.cols() != k {
                        return Err(Error::Dimension(format!(
                            "warm start is {}x{}, expected {n}x{k}",
                            m.rows(),
                            m.cols()
                        )));
                    }
                }
                (
                    (0..k).map(|j| w.z.column(j)).collect::<Vec<_>>(),
                    (0..k).map(|j| w.u.column(j)).collect::<Vec<_>>(),
                )
            }
            None => (vec![vec![0.0; n]; k], vec![vec![0.0; n]; k]),
        };
        let mut x = vec![vec![0.0; n]; k];
        let parallel =
            k > 1 && self.blocks.iter().map(ColumnBlock::work).sum::<usize>() >= PARALLEL_WORK_THRESHOLD;

        let threshold = cfg.lambda / rho;
        let scale = ((n * k) as f64).sqrt();
        let mut row = vec![0.0; k];
        let (mut r_norm, mut s_norm) = (f64::INFINITY, f64::INFINITY);
        let mut converged = false;
        let mut iterations = 0;

        for iter in 1..=cfg.max_iter {
            iterations = iter;
            let update = |(((block, xj), zj), uj): (((&ColumnBlock, &mut Vec<f64>), &Vec<f64>), &Vec<f64>)| {
                let q: Vec<f64> = block
                    .aty
                    .iter()
                    .zip(zj.iter().zip(uj))
                    .map(|(b, (zi, ui))| b + rho * (zi - ui))
                    .collect();
                block.apply(&q, rho, xj);
            };
            if parallel {
                self.blocks
                    .par_iter()
                    .zip(x.par_iter_mut())
                    .zip(z.par_iter())
                    .zip(u.par_iter())
                    .for_each(update);
            } else {
                self.blocks
                    .iter()
                    .zip(x.iter_mut())
                    .zip(z.iter())
                    .zip(u.iter())
                    .for_each(update);
            }

            let mut dz_sq = 0.0;
            let mut r_sq = 0.0;
            for i in 0..n {
                for j in 0..k {
                    row[j] = x[j][i] + u[j][i];
                }
                let norm = linalg::norm2(&row);
                let shrink = if norm > threshold { 1.0 - threshold / norm } else { 0.0 };
                for j in 0..k {
                    let new_z = shrink * row[j];
                    let dz = new_z - z[j][i];
                    dz_sq += dz * dz;
                    z[j][i] = new_z;
                    let r = x[j][i] - new_z;
                    r_sq += r * r;
                    u[j][i] += r;
                }
            }
            r_norm = r_sq.sqrt();
            s_norm = rho * dz_sq.sqrt();
            if !(r_norm.is_finite() && s_norm.is_finite()) {
                return Err(Error::Divergence(iter));
            }

            let x_norm = frob(&x);
            let z_norm = frob(&z);
            let u_norm = frob(&u);
            let eps_pri = scale * cfg.eps_abs + cfg.eps_rel * x_norm.max(z_norm);
            let eps_dual = scale * cfg.eps_abs + cfg.eps_rel * rho * u_norm;
            if r_norm <= eps_pri && s_norm <= eps_dual {
                converged = true;
                break;
            }
        }

        let objective = self.problem.objective_columns(&z, cfg.lambda);
        if !objective.is_finite() {
            return Err(Error::Divergence(iterations));
        }
        Ok(SolveReport {
            x: DenseMatrix::from_columns(&z)?,
            dual: DenseMatrix::from_columns(&u)?,
            iterations,
            primal_residual: r_norm,
            dual_residual: s_norm,
            objective,
            converged,
        })
    }
}

fn frob(cols: &[Vec<f64>]) -> f64 {
    cols.iter()
        .map(|c| linalg::dot(c, c))
        .sum::<f64>()
        .sqrt()
}

/// Solves the joint-sparse program from a cold start.
pub fn admm_group_lasso(problem: &JointProblem, cfg: &SolverConfig) -> Result<SolveReport> {
    cfg.validate()?;
    GroupLassoSolver::new(problem.clone(), cfg.rho)?.solve(cfg, None)
}

/// `λ‖x‖₁ + ½‖y − Ax‖²`, solved as the one-column joint problem.
pub fn admm_lasso(a: &DenseMatrix, y: &DenseVector, cfg: &SolverConfig) -> Result<SolveReport> {
    admm_group_lasso(&JointProblem::single(a.clone(), y.clone())?, cfg)
}

/// Minimum-norm least squares restricted to the columns in `support`; zero elsewhere.
pub fn least_squares_on_support(
    a: &DenseMatrix,
    y: &DenseVector,
    support: &[usize],
) -> Result<DenseVector> {
    if a.rows() != y.len() {
        return Err(Error::Dimension(format!(
            "A has {} rows but y has {} entries",
            a.rows(),
            y.len()
        )));
    }
    if let Some(&bad) = support.iter().find(|&&i| i >= a.cols()) {
        return Err(Error::Index { index: bad, len: a.cols() });
    }
    let mut x = vec![0.0; a.cols()];
    if support.is_empty() {
        return DenseVector::new(x);
    }
    let sub = DMatrix::from_fn(a.rows(), support.len(), |i, c| a.get(i, support[c]));
    let rhs = nalgebra::DVector::from_column_slice(y.as_slice());
    let svd = sub.svd(true, true);
    let sigma_max = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let cutoff = sigma_max * (a.rows().max(support.len()) as f64) * f64::EPSILON;
    let sol = svd
        .solve(&rhs, cutoff)
        .map_err(|e| Error::Domain(format!("least squares failed: {e}")))?;
    for (c, &i) in support.iter().enumerate() {
        x[i] = sol[c];
    }
    DenseVector::new(x)
}
