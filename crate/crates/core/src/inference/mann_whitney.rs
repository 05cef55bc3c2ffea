//! Mann-Whitney U with tie-aware midranks. Small samples use the exact
//! permutation distribution; larger ones the tie-corrected normal
//! approximation with a 0.5 continuity correction.

use statrs::function::erf::erfc;

use super::{InferenceError, Result};

/// Exact p-values are used while the smaller sample has at most this many values.
pub const EXACT_MAX_MIN_N: usize = 8;
/// Upper bound on the pooled size for the exact path when ties are present.
pub const EXACT_TIED_MAX_N: usize = 300;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PMethod {
    Exact,
    Normal,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MannWhitney {
    /// U statistic of the first sample.
    pub u: f64,
    pub p_two_sided: f64,
    pub method: PMethod,
}

struct Ranked {
    /// Twice the rank sum of the first sample.
    w2_a: u64,
    /// Tie groups in ascending order: (size, twice the midrank).
    groups: Vec<(usize, u64)>,
    n_a: usize,
    n_b: usize,
}

impl Ranked {
    fn new(a: &[f64], b: &[f64]) -> Result<Self> {
        if a.is_empty() || b.is_empty() {
            return Err(InferenceError::EmptySample);
        }
        if a.iter().chain(b).any(|v| !v.is_finite()) {
            return Err(InferenceError::NonFiniteValue);
        }
        let mut pooled: Vec<(f64, bool)> = a
            .iter()
            .map(|&v| (v, true))
            .chain(b.iter().map(|&v| (v, false)))
            .collect();
        pooled.sort_by(|x, y| x.0.total_cmp(&y.0));

        let mut w2_a = 0u64;
        let mut groups = Vec::new();
        let mut i = 0;
        while i < pooled.len() {
            let mut j = i + 1;
            while j < pooled.len() && pooled[j].0 == pooled[i].0 {
                j += 1;
            }
            // positions i+1..=j share midrank (i+1+j)/2
            let twice_rank = (i + 1 + j) as u64;
            let in_a = pooled[i..j].iter().filter(|x| x.1).count() as u64;
            w2_a += in_a * twice_rank;
            groups.push((j - i, twice_rank));
            i = j;
        }
        Ok(Ranked {
            w2_a,
            groups,
            n_a: a.len(),
            n_b: b.len(),
        })
    }

    fn u_a(&self) -> f64 {
        let na = self.n_a as f64;
        self.w2_a as f64 / 2.0 - na * (na + 1.0) / 2.0
    }

    fn has_ties(&self) -> bool {
        self.groups.iter().any(|&(t, _)| t > 1)
    }

    fn n(&self) -> usize {
        self.n_a + self.n_b
    }
}

pub fn mann_whitney(a: &[f64], b: &[f64]) -> Result<MannWhitney> {
    let ranked = Ranked::new(a, b)?;
    let small = ranked.n_a.min(ranked.n_b) <= EXACT_MAX_MIN_N;
    if small && (!ranked.has_ties() || ranked.n() <= EXACT_TIED_MAX_N) {
        Ok(exact(&ranked))
    } else {
        Ok(normal(&ranked))
    }
}

/// Exact two-sided p-value regardless of sample size.
pub fn mann_whitney_exact(a: &[f64], b: &[f64]) -> Result<MannWhitney> {
    Ok(exact(&Ranked::new(a, b)?))
}

/// Tie- and continuity-corrected normal approximation regardless of sample size.
pub fn mann_whitney_normal(a: &[f64], b: &[f64]) -> Result<MannWhitney> {
    Ok(normal(&Ranked::new(a, b)?))
}

fn normal(r: &Ranked) -> MannWhitney {
    let (na, nb) = (r.n_a as f64, r.n_b as f64);
    let n = na + nb;
    let u = r.u_a();
    let mu = na * nb / 2.0;
    let tie_term: f64 = r
        .groups
        .iter()
        .map(|&(t, _)| {
            let t = t as f64;
            t * t * t - t
        })
        .sum();
    let var = if n > 1.0 {
        na * nb / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)))
    } else {
        0.0
    };
    let p = if var <= 0.0 {
        1.0
    } else {
        let z = ((u - mu).abs() - 0.5).max(0.0) / var.sqrt();
        erfc(z / std::f64::consts::SQRT_2).min(1.0)
    };
    MannWhitney {
        u,
        p_two_sided: p,
        method: PMethod::Normal,
    }
}

fn exact(r: &Ranked) -> MannWhitney {
    // Work with the smaller sample; |2U - n_a n_b| is the same for either side.
    let k = r.n_a.min(r.n_b);
    let (counts, total) = if r.has_ties() {
        tied_distribution(&r.groups, k)
    } else {
        untied_distribution(k, r.n() - k)
    };
    // Distribution is over twice the rank sum of a size-k subset.
    let center2 = (k * (r.n() + 1)) as i128;
    let w2_small = if k == r.n_a {
        r.w2_a as i128
    } else {
        (r.n() * (r.n() + 1)) as i128 - r.w2_a as i128
    };
    let dev = (w2_small - center2).abs();
    let extreme: u128 = counts
        .iter()
        .filter(|(w2, _)| (*w2 as i128 - center2).abs() >= dev)
        .map(|(_, c)| *c)
        .sum();
    MannWhitney {
        u: r.u_a(),
        p_two_sided: (extreme as f64 / total as f64).min(1.0),
        method: PMethod::Exact,
    }
}

/// Number of size-k subsets by twice their rank sum, when all ranks are distinct.
/// Uses the Gaussian binomial coefficient [n choose k]_q, whose q^U
/// coefficient counts subsets with U statistic U.
fn untied_distribution(k: usize, m: usize) -> (Vec<(u64, u128)>, u128) {
    let degree = k * m;
    let mut poly = vec![0i128; degree + 1];
    poly[0] = 1;
    for i in 1..=k {
        // multiply by (1 - q^(m+i))
        let shift = m + i;
        for d in (shift..=degree).rev() {
            poly[d] -= poly[d - shift];
        }
        // divide by (1 - q^i)
        for d in i..=degree {
            poly[d] += poly[d - i];
        }
    }
    let base = (k * (k + 1)) as u64;
    let mut total = 0u128;
    let counts = poly
        .into_iter()
        .enumerate()
        .filter(|&(_, c)| c > 0)
        .map(|(u, c)| {
            total += c as u128;
            (2 * u as u64 + base, c as u128)
        })
        .collect();
    (counts, total)
}

/// Same distribution with tie groups: each group contributes j members with
/// multiplicity C(t, j).
fn tied_distribution(groups: &[(usize, u64)], k: usize) -> (Vec<(u64, u128)>, u128) {
    let max_rank = groups.last().map_or(0, |g| g.1) as usize;
    let width = k * max_rank + 1;
    // dp[j * width + s]
    let mut dp = vec![0u128; (k + 1) * width];
    dp[0] = 1;
    for &(t, twice_rank) in groups {
        let binom = binomials(t, k);
        let mut next = vec![0u128; (k + 1) * width];
        for used in 0..=k {
            for s in 0..width {
                let c = dp[used * width + s];
                if c == 0 {
                    continue;
                }
                for take in 0..=t.min(k - used) {
                    let s2 = s + take * twice_rank as usize;
                    next[(used + take) * width + s2] += c * binom[take];
                }
            }
        }
        dp = next;
    }
    let row = &dp[k * width..];
    let mut total = 0u128;
    let counts = row
        .iter()
        .enumerate()
        .filter(|(_, c)| **c > 0)
        .map(|(s, &c)| {
            total += c;
            (s as u64, c)
        })
        .collect();
    (counts, total)
}

/// C(n, j) for j in 0..=min(n, upto).
fn binomials(n: usize, upto: usize) -> Vec<u128> {
    let len = n.min(upto) + 1;
    let mut row = vec![1u128; len];
    for i in 1..len {
        row[i] = row[i - 1] * (n - i + 1) as u128 / i as u128;
    }
    row
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// U by pair counting and exact p by enumerating every relabeling.
    fn oracle(a: &[f64], b: &[f64]) -> (f64, f64) {
        let u_of = |x: &[f64], y: &[f64]| -> f64 {
            x.iter()
                .flat_map(|xi| y.iter().map(move |yj| (xi, yj)))
                .map(|(xi, yj)| {
                    if xi > yj {
                        1.0
                    } else if xi == yj {
                        0.5
                    } else {
                        0.0
                    }
                })
                .sum()
        };
        let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
        let n = pooled.len();
        let na = a.len();
        let center = (na * b.len()) as f64 / 2.0;
        let u_obs = u_of(a, b);
        let dev = (u_obs - center).abs();
        let (mut hits, mut total) = (0u64, 0u64);
        for mask in 0u32..(1 << n) {
            if mask.count_ones() as usize != na {
                continue;
            }
            let (x, y): (Vec<f64>, Vec<f64>) = {
                let mut x = Vec::new();
                let mut y = Vec::new();
                for (i, v) in pooled.iter().enumerate() {
                    if mask & (1 << i) != 0 {
                        x.push(*v)
                    } else {
                        y.push(*v)
                    }
                }
                (x, y)
            };
            total += 1;
            if (u_of(&x, &y) - center).abs() >= dev - 1e-9 {
                hits += 1;
            }
        }
        (u_obs, hits as f64 / total as f64)
    }

    #[test]
    fn separated_triplets() {
        let r = mann_whitney(&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0]).unwrap();
        assert_eq!(r.u, 0.0);
        assert_eq!(r.method, PMethod::Exact);
        assert!((r.p_two_sided - 0.1).abs() < 1e-15);
    }

    #[test]
    fn identical_samples() {
        let a = [3.0, 1.0, 4.0, 1.0, 5.0];
        let r = mann_whitney(&a, &a).unwrap();
        assert_eq!(r.u, 12.5);
        assert_eq!(r.p_two_sided, 1.0);
        let big: Vec<f64> = (0..40).map(|i| (i % 7) as f64).collect();
        let r = mann_whitney(&big, &big).unwrap();
        assert_eq!(r.method, PMethod::Normal);
        assert_eq!(r.u, 800.0);
        assert!((r.p_two_sided - 1.0).abs() < 1e-12);
    }

    #[test]
    fn u_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let a: Vec<f64> = (0..rng.gen_range(1..15)).map(|_| rng.gen_range(0..6) as f64).collect();
            let b: Vec<f64> = (0..rng.gen_range(1..15)).map(|_| rng.gen_range(0..6) as f64).collect();
            let ua = mann_whitney(&a, &b).unwrap().u;
            let ub = mann_whitney(&b, &a).unwrap().u;
            assert_eq!(ua + ub, (a.len() * b.len()) as f64);
        }
    }

    #[test]
    fn exact_matches_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..150 {
            let na = rng.gen_range(1..=6);
            let nb = rng.gen_range(1..=6);
            let hi = rng.gen_range(2..20);
            let a: Vec<f64> = (0..na).map(|_| rng.gen_range(0..hi) as f64).collect();
            let b: Vec<f64> = (0..nb).map(|_| rng.gen_range(0..hi) as f64).collect();
            let (u, p) = oracle(&a, &b);
            let r = mann_whitney_exact(&a, &b).unwrap();
            assert_eq!(r.u, u);
            assert!((r.p_two_sided - p).abs() < 1e-12, "{a:?} {b:?}");
        }
    }

    #[test]
    fn untied_and_tied_distributions_agree_without_ties() {
        for k in 1..6 {
            for m in 1..7 {
                let groups: Vec<_> = (1..=(k + m) as u64).map(|r| (1, 2 * r)).collect();
                assert_eq!(tied_distribution(&groups, k), untied_distribution(k, m), "{k} {m}");
            }
        }
    }

    #[test]
    fn large_untied_exact_is_fast_and_sane() {
        let a: Vec<f64> = (0..8).map(|i| i as f64 * 3.5).collect();
        let b: Vec<f64> = (0..2000).map(|i| i as f64 * 0.013 + 0.001).collect();
        let r = mann_whitney(&a, &b).unwrap();
        assert_eq!(r.method, PMethod::Exact);
        assert!(r.p_two_sided > 0.0 && r.p_two_sided <= 1.0);
    }

    #[test]
    fn normal_tracks_exact_at_eight() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut worst: f64 = 0.0;
        for _ in 0..300 {
            let a: Vec<f64> = (0..8).map(|_| rng.gen::<f64>()).collect();
            let b: Vec<f64> = (0..8).map(|_| rng.gen::<f64>() + rng.gen_range(-0.5..0.5)).collect();
            let e = mann_whitney_exact(&a, &b).unwrap().p_two_sided;
            let n = mann_whitney_normal(&a, &b).unwrap().p_two_sided;
            worst = worst.max((e - n).abs());
        }
        assert!(worst <= 0.02, "max |exact - normal| = {worst}");
    }

    #[test]
    fn empty_and_nan_are_rejected() {
        assert!(matches!(mann_whitney(&[], &[1.0]), Err(InferenceError::EmptySample)));
        assert!(matches!(
            mann_whitney(&[f64::NAN], &[1.0]),
            Err(InferenceError::NonFiniteValue)
        ));
    }
}
