//! Bootstrap and subsample index generation, and the distribution of the
//! number of distinct indices in a bootstrap draw.
//!
//! Subset `j` of a plan is drawn from its own ChaCha stream keyed by
//! `(master_seed, j)`, so any subset can be regenerated on its own and the
//! output does not depend on generation order or thread count.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    /// `L` draws uniformly with replacement.
    Bootstrap,
    /// A uniformly random `L`-subset, drawn without replacement.
    Subsample,
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Scheme::Bootstrap => "bootstrap",
            Scheme::Subsample => "subsample",
        })
    }
}

impl std::str::FromStr for Scheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bootstrap" => Ok(Scheme::Bootstrap),
            "subsample" => Ok(Scheme::Subsample),
            other => Err(Error::Parameter(format!(
                "unknown scheme '{other}' (expected bootstrap or subsample)"
            ))),
        }
    }
}

/// Ordered row indices drawn under one scheme.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexMultiset {
    indices: Vec<usize>,
    scheme: Scheme,
}

impl IndexMultiset {
    /// Validates range (and distinctness for subsamples).
    pub fn new(indices: Vec<usize>, scheme: Scheme, m: usize) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::Parameter("index multiset must be nonempty".into()));
        }
        if let Some(&bad) = indices.iter().find(|&&i| i >= m) {
            return Err(Error::Index { index: bad, len: m });
        }
        if scheme == Scheme::Subsample {
            let mut seen = vec![false; m];
            for &i in &indices {
                if std::mem::replace(&mut seen[i], true) {
                    return Err(Error::Parameter(format!(
                        "subsample contains index {i} twice"
                    )));
                }
            }
        }
        Ok(Self { indices, scheme })
    }

    /// The full index range `0..m` in order.
    pub fn full(m: usize) -> Result<Self> {
        Self::new((0..m).collect(), Scheme::Subsample, m)
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// Number of distinct indices.
    pub fn distinct_count(&self) -> usize {
        let mut sorted = self.indices.clone();
        sorted.sort_unstable();
        sorted.dedup();
        sorted.len()
    }
}

/// How to draw `count` index sets of size `subset_size` out of `m` rows.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SamplingPlan {
    pub m: usize,
    pub subset_size: usize,
    pub count: usize,
    pub scheme: Scheme,
    pub master_seed: u64,
}

impl SamplingPlan {
    pub fn validate(&self) -> Result<()> {
        if self.m == 0 {
            return Err(Error::Parameter("m must be at least 1".into()));
        }
        if self.subset_size == 0 {
            return Err(Error::Parameter("subset size L must be at least 1".into()));
        }
        if self.count == 0 {
            return Err(Error::Parameter("subset count K must be at least 1".into()));
        }
        if self.scheme == Scheme::Subsample && self.subset_size > self.m {
            return Err(Error::Parameter(format!(
                "subsample size L={} exceeds m={}",
                self.subset_size, self.m
            )));
        }
        Ok(())
    }

    /// Draws subset `j` alone; identical to the `j`-th entry of [`generate_subsets`].
    pub fn subset(&self, j: usize) -> Result<IndexMultiset> {
        self.validate()?;
        let mut rng = subset_rng(self.master_seed, j);
        let indices = match self.scheme {
            Scheme::Bootstrap => (0..self.subset_size)
                .map(|_| rng.random_range(0..self.m))
                .collect(),
            Scheme::Subsample => {
                let mut pool: Vec<usize> = (0..self.m).collect();
                for i in 0..self.subset_size {
                    let pick = rng.random_range(i..self.m);
                    pool.swap(i, pick);
                }
                pool.truncate(self.subset_size);
                pool
            }
        };
        Ok(IndexMultiset {
            indices,
            scheme: self.scheme,
        })
    }
}

fn subset_rng(master_seed: u64, j: usize) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(master_seed);
    rng.set_stream(j as u64);
    rng
}

/// The `K` index multisets of a plan.
pub fn generate_subsets(plan: &SamplingPlan) -> Result<Vec<IndexMultiset>> {
    plan.validate()?;
    (0..plan.count).map(|j| plan.subset(j)).collect()
}

/// `P(V = v)` for `v = 1..=L`, where `V` counts distinct values among `L`
/// uniform draws with replacement from `m` items.
///
/// Evaluated through the occupancy recurrence
/// `P_{t+1}(v) = P_t(v)·v/m + P_t(v-1)·(m-v+1)/m`, which only adds
/// nonnegative terms and agrees with the inclusion-exclusion closed form
/// `C(m,v) Σ_j (-1)^j C(v,j) ((v-j)/m)^L` without its cancellation.
pub fn distinct_count_pmf(m: usize, l: usize) -> Result<Vec<f64>> {
    if m == 0 || l == 0 {
        return Err(Error::Parameter(format!(
            "distinct-count pmf needs m, L >= 1 (got m={m}, L={l})"
        )));
    }
    let top = l.min(m);
    let mf = m as f64;
    // probs[v] = P(v distinct after t draws); start after the first draw.
    let mut probs = vec![0.0; top + 1];
    probs[1] = 1.0;
    for t in 2..=l {
        for v in (1..=top.min(t)).rev() {
            let stay = probs[v] * (v as f64 / mf);
            let grow = probs[v - 1] * ((m - v + 1) as f64 / mf);
            probs[v] = stay + grow;
        }
    }
    let mut out = vec![0.0; l];
    out[..top].copy_from_slice(&probs[1..=top]);
    Ok(out)
}

/// `P(V >= d)`.
pub fn distinct_tail(m: usize, l: usize, d: usize) -> Result<f64> {
    if d == 0 || d > l {
        return Err(Error::Parameter(format!("d={d} must lie in 1..={l}")));
    }
    Ok(tails(&distinct_count_pmf(m, l)?)[d - 1])
}

/// Largest `d` with `P(V >= d) >= 1 - alpha`.
pub fn distinct_lower_bound(m: usize, l: usize, alpha: f64) -> Result<usize> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Parameter(format!("alpha={alpha} must lie in (0, 1)")));
    }
    let tails = tails(&distinct_count_pmf(m, l)?);
    Ok((1..=l)
        .rev()
        .find(|&d| tails[d - 1] >= 1.0 - alpha)
        .unwrap_or(1))
}

// Upper tails summed from the largest v down; tails[0] is pinned to 1.
fn tails(pmf: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; pmf.len()];
    let mut acc = 0.0;
    for v in (0..pmf.len()).rev() {
        acc += pmf[v];
        out[v] = acc.min(1.0);
    }
    out[0] = 1.0;
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plan(m: usize, l: usize, k: usize, scheme: Scheme, seed: u64) -> SamplingPlan {
        SamplingPlan {
            m,
            subset_size: l,
            count: k,
            scheme,
            master_seed: seed,
        }
    }

    #[test]
    fn full_subsample_is_a_permutation() {
        for set in generate_subsets(&plan(5, 5, 3, Scheme::Subsample, 11)).unwrap() {
            let mut idx = set.indices().to_vec();
            idx.sort_unstable();
            assert_eq!(idx, vec![0, 1, 2, 3, 4]);
        }
    }

    #[test]
    fn single_row_bootstrap() {
        let sets = generate_subsets(&plan(1, 4, 2, Scheme::Bootstrap, 3)).unwrap();
        assert_eq!(sets.len(), 2);
        for s in sets {
            assert_eq!(s.indices(), &[0, 0, 0, 0]);
        }
    }

    #[test]
    fn oversized_subsample_rejected() {
        assert!(matches!(
            generate_subsets(&plan(4, 5, 1, Scheme::Subsample, 0)),
            Err(Error::Parameter(_))
        ));
        assert!(generate_subsets(&plan(4, 5, 1, Scheme::Bootstrap, 0)).is_ok());
        assert!(generate_subsets(&plan(4, 2, 0, Scheme::Bootstrap, 0)).is_err());
    }

    #[test]
    fn subsets_are_individually_reproducible() {
        let p = plan(40, 17, 6, Scheme::Bootstrap, 99);
        let all = generate_subsets(&p).unwrap();
        assert_eq!(all, generate_subsets(&p).unwrap());
        for (j, s) in all.iter().enumerate().rev() {
            assert_eq!(&p.subset(j).unwrap(), s);
        }
        // A larger K extends the same prefix.
        let more = generate_subsets(&SamplingPlan { count: 9, ..p }).unwrap();
        assert_eq!(&more[..6], &all[..]);
        assert_ne!(all[0], all[1]);
    }

    #[test]
    fn bootstrap_positions_are_uniform() {
        let (m, l, draws) = (10usize, 3usize, 100_000usize);
        let p = plan(m, l, draws, Scheme::Bootstrap, 5);
        let mut counts = vec![vec![0usize; m]; l];
        for s in generate_subsets(&p).unwrap() {
            for (pos, &i) in s.indices().iter().enumerate() {
                counts[pos][i] += 1;
            }
        }
        let expected = draws as f64 / m as f64;
        let sigma = (draws as f64 * 0.1 * 0.9).sqrt();
        for row in &counts {
            for &c in row {
                assert!((c as f64 - expected).abs() < 3.0 * sigma + 1e-9, "{c} vs {expected}");
            }
        }
    }

    #[test]
    fn pmf_small_cases() {
        assert_eq!(distinct_count_pmf(1, 1).unwrap(), vec![1.0]);
        assert_eq!(distinct_count_pmf(2, 2).unwrap(), vec![0.5, 0.5]);
        // L > m: mass only on v <= m.
        let p = distinct_count_pmf(2, 4).unwrap();
        assert_eq!(p[2], 0.0);
        assert_eq!(p[3], 0.0);
        assert!((p[0] + p[1] - 1.0).abs() < 1e-15);
        assert!(distinct_count_pmf(0, 3).is_err());
    }

    #[test]
    fn tail_and_lower_bound_examples() {
        assert_eq!(distinct_tail(37, 12, 1).unwrap(), 1.0);
        assert_eq!(distinct_tail(2, 2, 2).unwrap(), 0.5);
        assert!(distinct_tail(2, 2, 3).is_err());
        assert!(distinct_tail(2, 2, 0).is_err());

        assert_eq!(distinct_lower_bound(2, 2, 0.4).unwrap(), 1);
        assert_eq!(distinct_lower_bound(2, 2, 0.5).unwrap(), 2);
        assert_eq!(distinct_lower_bound(30, 10, 1.0 - 1e-12).unwrap(), 10);
        assert!(distinct_lower_bound(30, 10, 0.0).is_err());
        assert!(distinct_lower_bound(30, 10, 1.0).is_err());

        let d = distinct_lower_bound(50, 25, 0.05).unwrap();
        assert!(distinct_tail(50, 25, d).unwrap() >= 0.95);
        assert!(distinct_tail(50, 25, d + 1).unwrap() < 0.95);
    }

    #[test]
    fn lower_bound_matches_scan() {
        let (m, l, alpha) = (100, 100, 0.05);
        let scanned = (1..=l)
            .filter(|&d| distinct_tail(m, l, d).unwrap() >= 1.0 - alpha)
            .max()
            .unwrap();
        assert_eq!(distinct_lower_bound(m, l, alpha).unwrap(), scanned);
    }

    #[test]
    fn mean_distinct_count_matches_simulation() {
        let (m, l, draws) = (100usize, 50usize, 100_000usize);
        let pmf = distinct_count_pmf(m, l).unwrap();
        let mean: f64 = pmf.iter().enumerate().map(|(i, p)| (i + 1) as f64 * p).sum();
        let second: f64 = pmf
            .iter()
            .enumerate()
            .map(|(i, p)| ((i + 1) as f64).powi(2) * p)
            .sum();
        let sd = (second - mean * mean).sqrt();
        let sets = generate_subsets(&plan(m, l, draws, Scheme::Bootstrap, 2024)).unwrap();
        let empirical =
            sets.iter().map(|s| s.distinct_count() as f64).sum::<f64>() / draws as f64;
        let se = sd / (draws as f64).sqrt();
        assert!((empirical - mean).abs() < 3.0 * se, "{empirical} vs {mean} (se {se})");
    }
}
