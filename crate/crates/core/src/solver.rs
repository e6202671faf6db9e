//! Minimisation of the patch energy over sign vectors.
//!
//! The energy is invariant under global negation, so the first patch is
//! pinned to +1. Brute force walks the remaining `2^(n-1)` vectors in Gray
//! code order with incremental updates; local search runs seeded
//! steepest-descent single-flip restarts.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::energy::{energy, QMatrix};
use crate::error::{Error, Result};
use crate::winding::SignAssignment;

/// Largest patch count accepted by [`brute_force`].
pub const BRUTE_FORCE_LIMIT: usize = 25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    BruteForce,
    LocalSearch,
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Method::BruteForce => "brute_force",
            Method::LocalSearch => "local_search",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveResult {
    pub signs: SignAssignment,
    pub energy: f64,
    pub method: Method,
    /// Number of sign vectors whose energy was evaluated.
    pub evaluations: u64,
}

fn tie_tolerance(q: &QMatrix, c: &[f64]) -> f64 {
    let n = q.n();
    let scale: f64 = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .map(|(i, j)| c[i * n + j].abs())
        .sum();
    1e-12 * scale.max(1.0)
}

/// Exhaustive minimum with a cap of [`BRUTE_FORCE_LIMIT`] patches.
pub fn brute_force(q: &QMatrix) -> Result<SolveResult> {
    brute_force_with_limit(q, BRUTE_FORCE_LIMIT)
}

/// Exhaustive minimum. Among vectors whose energies agree to rounding, the
/// lexicographically smallest (with -1 before +1) wins.
pub fn brute_force_with_limit(q: &QMatrix, limit: usize) -> Result<SolveResult> {
    let n = q.n();
    if n > limit {
        return Err(Error::TooManyPatches { n, limit });
    }
    if n == 0 {
        return Ok(SolveResult {
            signs: SignAssignment::from_bits(&[]),
            energy: 0.0,
            method: Method::BruteForce,
            evaluations: 1,
        });
    }
    let c = q.couplings();
    let tol = tie_tolerance(q, &c);
    let mut s = vec![1i8; n];
    // field[k] = Σ_j c_kj s_j
    let mut field: Vec<f64> = (0..n)
        .map(|k| (0..n).map(|j| c[k * n + j] * f64::from(s[j])).sum())
        .collect();
    let mut e: f64 = 0.5 * (0..n).map(|k| f64::from(s[k]) * field[k]).sum::<f64>();
    let mut best = s.clone();
    let mut best_e = e;
    let count: u64 = 1 << (n - 1);
    for step in 1..count {
        // Gray code: flip bit index = trailing zeros of step, shifted past the pinned sign
        let k = step.trailing_zeros() as usize + 1;
        let sk = f64::from(s[k]);
        e -= 2.0 * sk * field[k];
        s[k] = -s[k];
        for (j, fj) in field.iter_mut().enumerate() {
            *fj -= 2.0 * sk * c[j * n + k];
        }
        if e < best_e - tol || ((e - best_e).abs() <= tol && s < best) {
            best_e = e;
            best.clone_from(&s);
        }
    }
    let signs = SignAssignment::from_bits(&best);
    let energy = energy(q, &signs)?;
    Ok(SolveResult {
        signs,
        energy,
        method: Method::BruteForce,
        evaluations: count,
    })
}

/// Best of `restarts` steepest-descent runs from seeded random starts.
/// Identical inputs and seed give identical output.
pub fn local_search(q: &QMatrix, restarts: usize, seed: u64) -> Result<SolveResult> {
    if restarts == 0 {
        return Err(Error::Config("restarts must be at least 1".into()));
    }
    let n = q.n();
    let c = q.couplings();
    let tol = tie_tolerance(q, &c);
    let mut best: Option<(f64, Vec<i8>)> = None;
    let mut evaluations = 0u64;
    for r in 0..restarts {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(r as u64));
        let mut s: Vec<i8> = (0..n).map(|_| if rng.random::<bool>() { 1 } else { -1 }).collect();
        let mut field: Vec<f64> = (0..n)
            .map(|k| (0..n).map(|j| c[k * n + j] * f64::from(s[j])).sum())
            .collect();
        let mut e: f64 = 0.5 * (0..n).map(|k| f64::from(s[k]) * field[k]).sum::<f64>();
        evaluations += 1;
        loop {
            // flipping k changes the energy by -2 s_k field_k
            let mut pick: Option<(usize, f64)> = None;
            for k in 0..n {
                let delta = -2.0 * f64::from(s[k]) * field[k];
                evaluations += 1;
                if delta < -tol && pick.is_none_or(|(_, d)| delta < d) {
                    pick = Some((k, delta));
                }
            }
            let Some((k, delta)) = pick else { break };
            let sk = f64::from(s[k]);
            s[k] = -s[k];
            e += delta;
            for (j, fj) in field.iter_mut().enumerate() {
                *fj -= 2.0 * sk * c[j * n + k];
            }
        }
        let canon = SignAssignment::from_bits(&s).canonical().as_slice().to_vec();
        let better = match &best {
            None => true,
            Some((be, bs)) => e < be - tol || ((e - be).abs() <= tol && canon < *bs),
        };
        if better {
            best = Some((e, canon));
        }
    }
    let (_, bits) = best.expect("at least one restart");
    let signs = SignAssignment::from_bits(&bits);
    let energy = energy(q, &signs)?;
    Ok(SolveResult {
        signs,
        energy,
        method: Method::LocalSearch,
        evaluations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::energy::QEntry;

    #[test]
    fn two_patch_examples() {
        let q = QMatrix::from_pairs(2, &[(0, 1, QEntry::Finite(-1.0))]).unwrap();
        let r = brute_force(&q).unwrap();
        assert_eq!(r.signs.to_vec(), vec![1, 1]);
        assert_eq!(r.energy, -1.0);
        let q = QMatrix::from_pairs(2, &[(0, 1, QEntry::Finite(1.0))]).unwrap();
        let r = brute_force(&q).unwrap();
        assert_eq!(r.signs.to_vec(), vec![1, -1]);
        assert_eq!(r.energy, -1.0);
    }

    #[test]
    fn frustrated_triangle_tie_breaks_lexicographically() {
        let pairs: Vec<_> = [(0, 1), (0, 2), (1, 2)]
            .iter()
            .map(|&(i, j)| (i, j, QEntry::Finite(1.0)))
            .collect();
        let q = QMatrix::from_pairs(3, &pairs).unwrap();
        let r = brute_force(&q).unwrap();
        assert_eq!(r.energy, -1.0);
        assert_eq!(r.signs.to_vec(), vec![1, -1, -1]);
        assert_eq!(r.evaluations, 4);
    }

    #[test]
    fn limit_is_enforced() {
        let q = QMatrix::from_dense(&vec![vec![0.0; 26]; 26]).unwrap();
        assert!(matches!(brute_force(&q), Err(Error::TooManyPatches { n: 26, limit: 25 })));
    }

    #[test]
    fn local_search_is_deterministic() {
        let n = 12;
        let vals: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..n).map(|j| (((i * 7 + j * 13) % 11) as f64 - 5.0) * if i < j { 1.0 } else { 0.0 }).collect())
            .collect();
        let q = QMatrix::from_dense(&vals).unwrap();
        let a = local_search(&q, 5, 42).unwrap();
        let b = local_search(&q, 5, 42).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.signs.as_slice()[0], 1);
        let exact = brute_force(&q).unwrap();
        assert!(a.energy >= exact.energy - 1e-9);
    }
}
