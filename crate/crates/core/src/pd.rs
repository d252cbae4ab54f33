//! Poisson–Dirichlet sampling by stick breaking, normalized cycle lengths of
//! the walk, and the statistics used to compare the two.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::perm::{ClassSampler, ConjClassSpec, Permutation};
use crate::theta::{c_gamma, limit_profile, theta};

/// Default number of sticks.
pub const DEFAULT_STICKS: usize = 60;

/// Finitely many parts, descending, plus the unbroken remainder.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MassPartition {
    pub parts: Vec<f64>,
    pub remainder: f64,
}

impl MassPartition {
    pub fn total(&self) -> f64 {
        self.parts.iter().sum::<f64>() + self.remainder
    }

    pub fn largest(&self) -> f64 {
        self.parts.first().copied().unwrap_or(0.0)
    }
}

/// The first `m` size-biased sticks `Z*_i = U_i (1 − Σ_{j<i} Z*_j)`, in
/// the order drawn, and the remainder.
pub fn size_biased_sticks<R: Rng + ?Sized>(m: usize, rng: &mut R) -> (Vec<f64>, f64) {
    let mut rest = 1.0f64;
    let mut sticks = Vec::with_capacity(m);
    for _ in 0..m {
        let u: f64 = rng.random();
        let piece = u * rest;
        sticks.push(piece);
        rest -= piece;
    }
    (sticks, rest)
}

/// `m` sticks sorted descending.
pub fn stick_breaking<R: Rng + ?Sized>(m: usize, rng: &mut R) -> Result<MassPartition> {
    if m == 0 {
        return Err(Error::Domain {
            value: 0.0,
            domain: "m >= 1",
        });
    }
    let (mut parts, remainder) = size_biased_sticks(m, rng);
    parts.sort_unstable_by(|a, b| b.total_cmp(a));
    Ok(MassPartition { parts, remainder })
}

/// The `m` largest cycle lengths of `X_s`, `s = ⌊cn/k⌋`, over `n θ(sk/n)`.
/// Missing cycles count as 0.
pub fn top_cycles_normalized<R: Rng + ?Sized>(spec: &ConjClassSpec, c: f64, m: usize, rng: &mut R) -> Result<Vec<f64>> {
    let profile = limit_profile(spec);
    if c <= c_gamma(&profile) {
        return Err(Error::Unsupported(format!(
            "c = {c} is not above the critical value {}",
            c_gamma(&profile)
        )));
    }
    let n = spec.n();
    let k = spec.size();
    let s = (c * n as f64 / k as f64).floor() as u64;
    let c_eff = s as f64 * k as f64 / n as f64;
    let th = theta(c_eff, &profile)?.theta;
    if th == 0.0 {
        return Err(Error::Unsupported(format!("θ({c_eff}) = 0 at n = {n}")));
    }
    let mut x = Permutation::identity(n);
    let mut sampler = ClassSampler::new(spec);
    for _ in 0..s {
        sampler.step(&mut x, rng);
    }
    let lengths = x.cycle_lengths();
    Ok((0..m)
        .map(|i| lengths.get(i).map_or(0.0, |&l| l as f64 / (n as f64 * th)))
        .collect())
}

/// Sum of the parts strictly below `eps`.
pub fn small_parts_mass(sample: &MassPartition, eps: f64) -> Result<f64> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::Domain {
            value: eps,
            domain: "(0, 1]",
        });
    }
    Ok(sample.parts.iter().filter(|&&p| p < eps).sum())
}

/// Two-sample Kolmogorov–Smirnov statistic.
pub fn ks_distance(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySample);
    }
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_unstable_by(f64::total_cmp);
    b.sort_unstable_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut best = 0.0f64;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        best = best.max((i as f64 / na - j as f64 / nb).abs());
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::{rng_from_seed, run_replicates};
    use crate::theta::LimitProfile;

    fn mean(v: &[f64]) -> f64 {
        v.iter().sum::<f64>() / v.len() as f64
    }

    #[test]
    fn first_stick_is_uniform() {
        let mut rng = rng_from_seed(1);
        let draws: Vec<f64> = (0..1_000_000).map(|_| size_biased_sticks(1, &mut rng).0[0]).collect();
        assert!((mean(&draws) - 0.5).abs() < 0.002);
    }

    #[test]
    fn second_stick_mean() {
        let mut rng = rng_from_seed(2);
        let draws: Vec<f64> = (0..400_000).map(|_| size_biased_sticks(2, &mut rng).0[1]).collect();
        assert!((mean(&draws) - 0.25).abs() < 0.002);
    }

    #[test]
    fn mass_is_conserved() {
        let mut rng = rng_from_seed(3);
        for m in [1, 2, 10, 60, 200] {
            for _ in 0..1000 {
                let p = stick_breaking(m, &mut rng).unwrap();
                assert!((p.total() - 1.0).abs() <= 1e-12);
                assert!(p.parts.windows(2).all(|w| w[0] >= w[1]));
                assert!(p.remainder >= 0.0);
            }
        }
        assert!(stick_breaking(0, &mut rng).is_err());
    }

    #[test]
    fn largest_part_has_golomb_dickman_mean() {
        let mut rng = rng_from_seed(4);
        let draws: Vec<f64> = (0..400_000)
            .map(|_| stick_breaking(DEFAULT_STICKS, &mut rng).unwrap().largest())
            .collect();
        assert!((mean(&draws) - 0.624_329_988).abs() < 0.003);
    }

    #[test]
    fn small_parts_examples() {
        let p = MassPartition {
            parts: vec![0.5, 0.3, 0.15],
            remainder: 0.05,
        };
        assert!((small_parts_mass(&p, 1.0).unwrap() - 0.95).abs() < 1e-15);
        assert_eq!(small_parts_mass(&p, 0.1).unwrap(), 0.0);
        assert!((small_parts_mass(&p, 0.4).unwrap() - 0.45).abs() < 1e-15);
        assert!(small_parts_mass(&p, 0.0).is_err());
    }

    #[test]
    fn small_parts_identity() {
        let mut rng = rng_from_seed(5);
        for eps in [0.1, 0.3] {
            let v: Vec<f64> = (0..100_000)
                .map(|_| small_parts_mass(&stick_breaking(DEFAULT_STICKS, &mut rng).unwrap(), eps).unwrap())
                .collect();
            assert!((mean(&v) - eps).abs() < 0.003, "eps = {eps}: {}", mean(&v));
        }
    }

    #[test]
    fn ks_examples() {
        let a = [0.1, 0.4, 0.2, 0.9];
        assert_eq!(ks_distance(&a, &a).unwrap(), 0.0);
        assert_eq!(ks_distance(&[0.1, 0.2], &[0.5, 0.7, 0.8]).unwrap(), 1.0);
        assert!(ks_distance(&[], &a).is_err());
        assert!((ks_distance(&[1.0, 2.0], &[1.0, 3.0]).unwrap() - 0.5).abs() < 1e-15);
        let mut rng = rng_from_seed(6);
        let mut fails = 0;
        for _ in 0..50 {
            let u: Vec<f64> = (0..10_000).map(|_| rng.random()).collect();
            let v: Vec<f64> = (0..10_000).map(|_| rng.random()).collect();
            fails += usize::from(ks_distance(&u, &v).unwrap() > 0.03);
        }
        assert!(fails <= 1);
    }

    #[test]
    fn top_cycles_properties() {
        let spec = ConjClassSpec::transpositions(10_000).unwrap();
        let th = theta(2.0, &LimitProfile::transpositions()).unwrap().theta;
        let samples = run_replicates(200, 7, 0, |_, s| top_cycles_normalized(&spec, 2.0, 20, &mut rng_from_seed(s)).unwrap());
        for v in &samples {
            assert!(v.iter().all(|&x| x >= 0.0));
            assert!(v.windows(2).all(|w| w[0] >= w[1]));
            assert!(v.iter().sum::<f64>() <= 1.0 / th + 0.01);
        }
        let mut rng = rng_from_seed(1);
        assert!(matches!(
            top_cycles_normalized(&spec, 0.9, 5, &mut rng),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn top_two_means_match_pd() {
        let spec = ConjClassSpec::transpositions(10_000).unwrap();
        let samples = run_replicates(1500, 8, 0, |_, s| top_cycles_normalized(&spec, 2.0, 2, &mut rng_from_seed(s)).unwrap());
        let mut rng = rng_from_seed(9);
        let pd: Vec<MassPartition> = (0..200_000).map(|_| stick_breaking(DEFAULT_STICKS, &mut rng).unwrap()).collect();
        for i in 0..2 {
            let walk = mean(&samples.iter().map(|v| v[i]).collect::<Vec<_>>());
            let reference = mean(&pd.iter().map(|p| p.parts[i]).collect::<Vec<_>>());
            assert!((walk - reference).abs() < 0.02, "coordinate {i}: {walk} vs {reference}");
        }
    }
}
