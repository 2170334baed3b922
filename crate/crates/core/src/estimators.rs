//! The four recovery schemes behind one interface.
//!
//! [`PreparedRecovery`] binds a method to a problem and its index sets and
//! factors every ADMM operator once, so that a grid of `λ` values can be
//! solved (and warm-started) without refactoring. The free functions
//! [`jobs`], [`bagging`], [`bolasso`] and [`l1_min`] are one-shot wrappers.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, DenseMatrix, DenseVector, DEFAULT_SUPPORT_TOL};
use crate::sampling::{generate_subsets, IndexMultiset, SamplingPlan};
use crate::solver::{self, GroupLassoSolver, JointProblem, SolveReport, SolverConfig, WarmStart};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Jobs,
    Bagging,
    Bolasso,
    L1,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Jobs, Method::Bagging, Method::Bolasso, Method::L1];

    pub fn name(self) -> &'static str {
        match self {
            Method::Jobs => "jobs",
            Method::Bagging => "bagging",
            Method::Bolasso => "bolasso",
            Method::L1 => "l1",
        }
    }

    /// Whether the method draws index sets at all.
    pub fn is_ensemble(self) -> bool {
        self != Method::L1
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| {
                Error::Parameter(format!(
                    "unknown method '{s}' (expected jobs, bagging, bolasso or l1)"
                ))
            })
    }
}

/// `y = A x* + z` observed through `A` (m × n) and `y` (m).
#[derive(Debug, Clone, PartialEq)]
pub struct SensingProblem {
    pub a: DenseMatrix,
    pub y: DenseVector,
}

impl SensingProblem {
    pub fn new(a: DenseMatrix, y: DenseVector) -> Result<Self> {
        if a.rows() != y.len() {
            return Err(Error::Dimension(format!(
                "A has {} rows but y has {} entries",
                a.rows(),
                y.len()
            )));
        }
        Ok(Self { a, y })
    }

    pub fn m(&self) -> usize {
        self.a.rows()
    }

    pub fn n(&self) -> usize {
        self.a.cols()
    }

    fn restrict(&self, subset: &IndexMultiset) -> Result<(DenseMatrix, DenseVector)> {
        Ok((
            linalg::select_rows(&self.a, subset.indices())?,
            self.y.select(subset.indices())?,
        ))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecoveryResult {
    pub method: Method,
    pub x_hat: DenseVector,
    /// `n × K` per-subset estimates; `None` for l1 minimization.
    pub per_estimate: Option<DenseMatrix>,
    /// Support of `x_hat` at the default relative tolerance.
    pub support: Vec<usize>,
    pub solver_reports: Vec<SolveReport>,
}

impl RecoveryResult {
    /// Warm starts for the next solve on the same prepared recovery.
    pub fn warm_starts(&self) -> Vec<WarmStart> {
        self.solver_reports.iter().map(SolveReport::warm_start).collect()
    }

    /// Total ADMM iterations across all solves.
    pub fn iterations(&self) -> usize {
        self.solver_reports.iter().map(|r| r.iterations).sum()
    }

    pub fn converged(&self) -> bool {
        self.solver_reports.iter().all(|r| r.converged)
    }
}

/// A method bound to a problem and its index sets, with factored solvers.
pub struct PreparedRecovery<'a> {
    method: Method,
    problem: &'a SensingProblem,
    solvers: Vec<GroupLassoSolver>,
    support_tol: f64,
}

impl<'a> PreparedRecovery<'a> {
    /// `subsets` is ignored for [`Method::L1`].
    pub fn new(
        method: Method,
        problem: &'a SensingProblem,
        subsets: &[IndexMultiset],
        rho: f64,
    ) -> Result<Self> {
        if method.is_ensemble() && subsets.is_empty() {
            return Err(Error::Parameter(format!("{method} needs at least one index set")));
        }
        let solvers = match method {
            Method::L1 => vec![GroupLassoSolver::new(
                JointProblem::single(problem.a.clone(), problem.y.clone())?,
                rho,
            )?],
            Method::Jobs => {
                let pairs = subsets
                    .iter()
                    .map(|s| problem.restrict(s))
                    .collect::<Result<Vec<_>>>()?;
                vec![GroupLassoSolver::new(JointProblem::new(pairs)?, rho)?]
            }
            Method::Bagging | Method::Bolasso => subsets
                .par_iter()
                .map(|s| {
                    let (a, y) = problem.restrict(s)?;
                    GroupLassoSolver::new(JointProblem::single(a, y)?, rho)
                })
                .collect::<Result<Vec<_>>>()?,
        };
        Ok(Self {
            method,
            problem,
            solvers,
            support_tol: DEFAULT_SUPPORT_TOL,
        })
    }

    /// Relative threshold Bolasso uses to read off each estimate's support.
    pub fn with_support_tol(mut self, rel_tol: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&rel_tol) {
            return Err(Error::Parameter(format!("rel_tol={rel_tol} must lie in [0, 1)")));
        }
        self.support_tol = rel_tol;
        Ok(self)
    }

    pub fn method(&self) -> Method {
        self.method
    }

    pub fn recover(&self, cfg: &SolverConfig, warm: Option<&[WarmStart]>) -> Result<RecoveryResult> {
        if let Some(w) = warm {
            if w.len() != self.solvers.len() {
                return Err(Error::Dimension(format!(
                    "{} warm starts for {} solves",
                    w.len(),
                    self.solvers.len()
                )));
            }
        }
        let warm_for = |j: usize| warm.map(|w| &w[j]);
        let reports: Vec<SolveReport> = if self.solvers.len() == 1 {
            vec![self.solvers[0].solve(cfg, warm_for(0))?]
        } else {
            self.solvers
                .par_iter()
                .enumerate()
                .map(|(j, s)| s.solve(cfg, warm_for(j)))
                .collect::<Result<Vec<_>>>()?
        };

        let (x_hat, per_estimate) = match self.method {
            Method::L1 => (reports[0].x.column(0), None),
            Method::Jobs => {
                let x = reports[0].x.clone();
                (x.column_mean(), Some(x))
            }
            Method::Bagging | Method::Bolasso => {
                let cols: Vec<Vec<f64>> = reports.iter().map(|r| r.x.column(0)).collect();
                let stacked = DenseMatrix::from_columns(&cols)?;
                let x_hat = if self.method == Method::Bagging {
                    stacked.column_mean()
                } else {
                    let common = common_support(&cols, self.support_tol);
                    solver::least_squares_on_support(&self.problem.a, &self.problem.y, &common)?
                        .into_vec()
                };
                (x_hat, Some(stacked))
            }
        };

        let support = linalg::vector_support(&x_hat, DEFAULT_SUPPORT_TOL);
        Ok(RecoveryResult {
            method: self.method,
            x_hat: DenseVector::new(x_hat)?,
            per_estimate,
            support,
            solver_reports: reports,
        })
    }
}

/// Intersection of the per-estimate supports, each read at `rel_tol`.
pub fn common_support(estimates: &[Vec<f64>], rel_tol: f64) -> Vec<usize> {
    let Some(first) = estimates.first() else {
        return Vec::new();
    };
    let mut keep = vec![true; first.len()];
    for est in estimates {
        let mut hit = vec![false; est.len()];
        for i in linalg::vector_support(est, rel_tol) {
            hit[i] = true;
        }
        keep.iter_mut().zip(hit).for_each(|(k, h)| *k &= h);
    }
    keep.iter()
        .enumerate()
        .filter(|(_, &k)| k)
        .map(|(i, _)| i)
        .collect()
}

fn subsets_for(problem: &SensingProblem, plan: &SamplingPlan) -> Result<Vec<IndexMultiset>> {
    if plan.m != problem.m() {
        return Err(Error::Dimension(format!(
            "sampling plan is for m={} but the problem has {} measurements",
            plan.m,
            problem.m()
        )));
    }
    generate_subsets(plan)
}

/// Joint solve over all `K` index sets, then the column mean.
pub fn jobs(problem: &SensingProblem, plan: &SamplingPlan, cfg: &SolverConfig) -> Result<RecoveryResult> {
    let subsets = subsets_for(problem, plan)?;
    PreparedRecovery::new(Method::Jobs, problem, &subsets, cfg.rho)?.recover(cfg, None)
}

/// `K` independent LASSO solves, averaged.
pub fn bagging(problem: &SensingProblem, plan: &SamplingPlan, cfg: &SolverConfig) -> Result<RecoveryResult> {
    let subsets = subsets_for(problem, plan)?;
    PreparedRecovery::new(Method::Bagging, problem, &subsets, cfg.rho)?.recover(cfg, None)
}

/// `K` independent LASSO solves, support intersection, then a least-squares
/// refit on the full measurements.
pub fn bolasso(
    problem: &SensingProblem,
    plan: &SamplingPlan,
    cfg: &SolverConfig,
    rel_tol: f64,
) -> Result<RecoveryResult> {
    let subsets = subsets_for(problem, plan)?;
    PreparedRecovery::new(Method::Bolasso, problem, &subsets, cfg.rho)?
        .with_support_tol(rel_tol)?
        .recover(cfg, None)
}

/// One LASSO on the full data.
pub fn l1_min(problem: &SensingProblem, cfg: &SolverConfig) -> Result<RecoveryResult> {
    PreparedRecovery::new(Method::L1, problem, &[], cfg.rho)?.recover(cfg, None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::Scheme;

    #[test]
    fn method_names_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.name().parse::<Method>().unwrap(), m);
        }
        assert!("lasso".parse::<Method>().is_err());
    }

    #[test]
    fn common_support_intersects() {
        let a = vec![0.0, 1.0, 0.0, 0.0, 0.0, 2.0];
        let b = vec![0.0, 0.0, 3.0, 0.0, 0.0, 1.0];
        assert_eq!(common_support(&[a.clone(), a.clone()], 1e-4), vec![1, 5]);
        assert_eq!(common_support(&[a.clone(), b], 1e-4), vec![5]);
        assert!(common_support(&[a, vec![0.0; 6]], 1e-4).is_empty());
    }

    #[test]
    fn plan_must_match_problem() {
        let prob = SensingProblem::new(
            DenseMatrix::identity(4).unwrap(),
            DenseVector::new(vec![1.0, 0.0, 0.0, 2.0]).unwrap(),
        )
        .unwrap();
        let plan = SamplingPlan {
            m: 5,
            subset_size: 3,
            count: 2,
            scheme: Scheme::Bootstrap,
            master_seed: 1,
        };
        assert!(matches!(
            jobs(&prob, &plan, &SolverConfig::default()),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn identity_l1_recovers_support() {
        let prob = SensingProblem::new(
            DenseMatrix::identity(5).unwrap(),
            DenseVector::new(vec![0.0, 3.0, 0.0, -2.0, 0.0]).unwrap(),
        )
        .unwrap();
        let res = l1_min(&prob, &SolverConfig::default().with_lambda(0.5)).unwrap();
        assert_eq!(res.support, vec![1, 3]);
        assert!(res.per_estimate.is_none());
        assert!((res.x_hat[1] - 2.5).abs() < 1e-4);
    }
}
