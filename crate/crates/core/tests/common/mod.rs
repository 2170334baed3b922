//! Independent reference implementations used by the integration tests.
//!
//! Nothing here calls into the solver, the RIP evaluators or the pmf code
//! of `jobs_core`; the oracles only share the matrix container.

#![allow(dead_code)]

use jobs_core::{DenseMatrix, DenseVector, IndexMultiset};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian_matrix(r: &mut ChaCha8Rng, rows: usize, cols: usize) -> DenseMatrix {
    let data = (0..rows * cols).map(|_| r.sample(StandardNormal)).collect();
    DenseMatrix::from_row_major(rows, cols, data).unwrap()
}

pub fn gaussian_vector(r: &mut ChaCha8Rng, len: usize) -> DenseVector {
    DenseVector::new((0..len).map(|_| r.sample(StandardNormal)).collect()).unwrap()
}

/// Columns scaled to unit norm by straightforward loops.
pub fn unit_columns(a: &DenseMatrix) -> DenseMatrix {
    let cols: Vec<Vec<f64>> = (0..a.cols())
        .map(|j| {
            let c = a.column(j);
            let n = c.iter().map(|v| v * v).sum::<f64>().sqrt();
            c.iter().map(|v| v / n).collect()
        })
        .collect();
    DenseMatrix::from_columns(&cols).unwrap()
}

pub fn rel_close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations.
pub fn jacobi_eigenvalues(mut a: Vec<Vec<f64>>) -> Vec<f64> {
    let n = a.len();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        let total: f64 = a.iter().flatten().map(|v| v * v).sum();
        if off <= 1e-32 * total.max(1e-300) {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q] == 0.0 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    (0..n).map(|i| a[i][i]).collect()
}

fn column_dot(a: &DenseMatrix, i: usize, j: usize) -> f64 {
    (0..a.rows()).map(|r| a.get(r, i) * a.get(r, j)).sum()
}

fn subsets_of(n: usize, s: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, s: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == s {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, s, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, s, &mut Vec::new(), &mut out);
    out
}

/// `max_{|S| <= s} max |eig(A_SᵀA_S) − 1|`, visiting every subset of every size.
pub fn rip_brute_force(a: &DenseMatrix, s: usize) -> f64 {
    let mut worst = 0.0f64;
    for size in 1..=s {
        for set in subsets_of(a.cols(), size) {
            let g: Vec<Vec<f64>> = set
                .iter()
                .map(|&i| set.iter().map(|&j| column_dot(a, i, j)).collect())
                .collect();
            for ev in jacobi_eigenvalues(g) {
                worst = worst.max((ev - 1.0).abs());
            }
        }
    }
    worst
}

/// Block RIP of the normalized block-diagonal system `diag(Â[I_1], …, Â[I_K])`
/// under the partition that groups coordinate `i` of every block.
pub fn brip_block_diagonal(a: &DenseMatrix, subsets: &[IndexMultiset], s: usize) -> f64 {
    let (n, k) = (a.cols(), subsets.len());
    let blocks: Vec<DenseMatrix> = subsets
        .iter()
        .map(|sub| {
            let rows: Vec<Vec<f64>> = sub.indices().iter().map(|&r| a.row(r).to_vec()).collect();
            unit_columns(&DenseMatrix::from_rows(&rows).unwrap())
        })
        .collect();
    let total_rows: usize = blocks.iter().map(DenseMatrix::rows).sum();
    let mut big = vec![0.0; total_rows * n * k];
    let mut offset = 0;
    for (j, b) in blocks.iter().enumerate() {
        for r in 0..b.rows() {
            for c in 0..n {
                big[(offset + r) * n * k + j * n + c] = b.get(r, c);
            }
        }
        offset += b.rows();
    }
    let big = DenseMatrix::from_row_major(total_rows, n * k, big).unwrap();
    let mut worst = 0.0f64;
    for size in 1..=s {
        for groups in subsets_of(n, size) {
            let cols: Vec<usize> = groups
                .iter()
                .flat_map(|&i| (0..k).map(move |j| j * n + i))
                .collect();
            let g: Vec<Vec<f64>> = cols
                .iter()
                .map(|&p| cols.iter().map(|&q| column_dot(&big, p, q)).collect())
                .collect();
            for ev in jacobi_eigenvalues(g) {
                worst = worst.max((ev - 1.0).abs());
            }
        }
    }
    worst
}

/// Exact `P(V = v)`, `v = 1..=L`, from the inclusion-exclusion formula
/// `C(m,v) Σ_j (−1)^j C(v,j) ((v−j)/m)^L` in rational arithmetic.
pub fn birthday_pmf_exact(m: usize, l: usize) -> Vec<BigRational> {
    let binom = |n: usize, k: usize| -> BigInt {
        let mut acc = BigInt::one();
        for i in 0..k {
            acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
        }
        acc
    };
    let denom = num_traits::pow(BigInt::from(m), l);
    (1..=l)
        .map(|v| {
            if v > m {
                return BigRational::zero();
            }
            let mut sum = BigInt::zero();
            for j in 0..=v {
                let term = binom(v, j) * num_traits::pow(BigInt::from(v - j), l);
                if j % 2 == 0 {
                    sum += term;
                } else {
                    sum -= term;
                }
            }
            BigRational::new(binom(m, v) * sum, denom.clone())
        })
        .collect()
}

pub fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap()
}

/// Largest eigenvalue of `AᵀA` via Jacobi.
fn lipschitz(a: &DenseMatrix) -> f64 {
    let n = a.cols();
    let g: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| column_dot(a, i, j)).collect())
        .collect();
    jacobi_eigenvalues(g).into_iter().fold(0.0, f64::max)
}

fn joint_objective(pairs: &[(DenseMatrix, DenseVector)], cols: &[Vec<f64>], lambda: f64) -> f64 {
    let n = cols[0].len();
    let penalty: f64 = (0..n)
        .map(|i| cols.iter().map(|c| c[i] * c[i]).sum::<f64>().sqrt())
        .sum();
    let fit: f64 = pairs
        .iter()
        .zip(cols)
        .map(|((a, y), x)| {
            (0..a.rows())
                .map(|r| {
                    let ax: f64 = (0..a.cols()).map(|c| a.get(r, c) * x[c]).sum();
                    (y[r] - ax).powi(2)
                })
                .sum::<f64>()
        })
        .sum();
    lambda * penalty + 0.5 * fit
}

/// Accelerated proximal gradient with adaptive restart for
/// `λ Σ_i ‖row_i(X)‖₂ + ½ Σ_j ‖y_j − A_j x_j‖²`.
///
/// Stops when successive iterates differ by less than `tol` (relative) or
/// after `max_iter` steps; returns `(columns, objective)`.
pub fn proximal_gradient_oracle(
    pairs: &[(DenseMatrix, DenseVector)],
    lambda: f64,
    tol: f64,
    max_iter: usize,
) -> (Vec<Vec<f64>>, f64) {
    let n = pairs[0].0.cols();
    let k = pairs.len();
    let lip = pairs.iter().map(|(a, _)| lipschitz(a)).fold(0.0, f64::max) * 1.000001;
    let step = 1.0 / lip;
    let grad = |cols: &[Vec<f64>]| -> Vec<Vec<f64>> {
        pairs
            .iter()
            .zip(cols)
            .map(|((a, y), x)| {
                let resid: Vec<f64> = (0..a.rows())
                    .map(|r| (0..n).map(|c| a.get(r, c) * x[c]).sum::<f64>() - y[r])
                    .collect();
                (0..n)
                    .map(|c| (0..a.rows()).map(|r| a.get(r, c) * resid[r]).sum())
                    .collect()
            })
            .collect()
    };
    let prox = |cols: &mut [Vec<f64>]| {
        for i in 0..n {
            let norm = cols.iter().map(|c| c[i] * c[i]).sum::<f64>().sqrt();
            let scale = if norm <= lambda * step {
                0.0
            } else {
                1.0 - lambda * step / norm
            };
            cols.iter_mut().for_each(|c| c[i] *= scale);
        }
    };
    let mut x = vec![vec![0.0; n]; k];
    let mut yk = x.clone();
    let mut t = 1.0f64;
    for _ in 0..max_iter {
        let g = grad(&yk);
        let mut next: Vec<Vec<f64>> = yk
            .iter()
            .zip(&g)
            .map(|(c, gc)| c.iter().zip(gc).map(|(v, d)| v - step * d).collect())
            .collect();
        prox(&mut next);
        let diff: f64 = next
            .iter()
            .flatten()
            .zip(x.iter().flatten())
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        let scale: f64 = next.iter().flatten().map(|v| v * v).sum::<f64>().sqrt().max(1.0);
        // Restart momentum when it points uphill.
        let uphill: f64 = yk
            .iter()
            .flatten()
            .zip(next.iter().flatten())
            .zip(x.iter().flatten())
            .map(|((yv, nv), xv)| (yv - nv) * (nv - xv))
            .sum();
        let t_next = if uphill > 0.0 {
            1.0
        } else {
            (1.0 + (1.0 + 4.0 * t * t).sqrt()) / 2.0
        };
        let beta = if uphill > 0.0 { 0.0 } else { (t - 1.0) / t_next };
        yk = next
            .iter()
            .zip(&x)
            .map(|(nc, xc)| nc.iter().zip(xc).map(|(a, b)| a + beta * (a - b)).collect())
            .collect();
        x = next;
        t = t_next;
        if diff <= tol * scale {
            break;
        }
    }
    let obj = joint_objective(pairs, &x, lambda);
    (x, obj)
}

/// Solves `(A_SᵀA_S) x = A_Sᵀ y` by Gaussian elimination with partial pivoting.
pub fn normal_equations(a: &DenseMatrix, y: &DenseVector, support: &[usize]) -> Vec<f64> {
    let k = support.len();
    let mut aug: Vec<Vec<f64>> = support
        .iter()
        .map(|&i| {
            let mut row: Vec<f64> = support.iter().map(|&j| column_dot(a, i, j)).collect();
            row.push((0..a.rows()).map(|r| a.get(r, i) * y[r]).sum());
            row
        })
        .collect();
    for col in 0..k {
        let piv = (col..k)
            .max_by(|&p, &q| aug[p][col].abs().total_cmp(&aug[q][col].abs()))
            .unwrap();
        aug.swap(col, piv);
        for r in 0..k {
            if r != col {
                let f = aug[r][col] / aug[col][col];
                for c in col..=k {
                    aug[r][c] -= f * aug[col][c];
                }
            }
        }
    }
    let mut x = vec![0.0; a.cols()];
    for (r, &i) in support.iter().enumerate() {
        x[i] = aug[r][k] / aug[r][r];
    }
    x
}
