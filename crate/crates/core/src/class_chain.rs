//! The walk projected onto conjugacy classes.
//!
//! The law of `X_t` started at the identity is constant on conjugacy
//! classes, so it is carried by a probability vector over the integer
//! partitions of `n`. One step from class `λ` is computed from a single
//! representative of `λ` against every element of the step class.

use std::collections::{BTreeMap, HashMap};

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::perm::{class_elements, class_size, ClassSampler, ConjClassSpec, CycleType, Permutation};
use crate::seed::{rng_from_seed, run_replicates};
use crate::walk::poisson_steps;

/// A partition of `n` as weakly decreasing parts.
pub type Partition = Vec<u32>;

/// Largest step class enumerated exactly.
pub const MAX_CLASS_ELEMENTS: usize = 1_000_000;
/// Largest number of partitions handled by the exact chain.
pub const MAX_PARTITIONS: usize = 10_000;
/// Rational arithmetic is used up to this `n`.
pub const EXACT_RATIONAL_MAX_N: usize = 8;

/// All partitions of `n`, in reverse lexicographic order (`[n]` first).
pub fn partitions(n: usize) -> Vec<Partition> {
    let mut out = Vec::new();
    let mut current = Vec::new();
    fn rec(rest: u32, max: u32, current: &mut Vec<u32>, out: &mut Vec<Partition>) {
        if rest == 0 {
            out.push(current.clone());
            return;
        }
        for part in (1..=rest.min(max)).rev() {
            current.push(part);
            rec(rest - part, part, current, out);
            current.pop();
        }
    }
    rec(n as u32, n as u32, &mut current, &mut out);
    out
}

/// `p(n)` without listing the partitions; saturates at `u64::MAX`.
pub fn partition_count(n: usize) -> u64 {
    let mut p = vec![0u64; n + 1];
    p[0] = 1;
    for part in 1..=n {
        for total in part..=n {
            p[total] = p[total].saturating_add(p[total - part]);
        }
    }
    p[n]
}

fn partition_of(perm: &Permutation) -> Partition {
    perm.cycle_lengths()
}

fn cycle_type_of(part: &Partition) -> CycleType {
    let parts: Vec<usize> = part.iter().map(|&p| p as usize).collect();
    CycleType::from_parts(&parts).expect("partition parts are positive")
}

fn partition_is_even(part: &Partition) -> bool {
    let n: u32 = part.iter().sum();
    (n as usize - part.len()) % 2 == 0
}

/// Neumaier-compensated running sum.
#[derive(Clone, Copy, Debug, Default)]
struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(self) -> f64 {
        self.sum + self.carry
    }
}

/// One-step transition counts between cycle types.
///
/// Row `λ` lists `(μ, count)`; the transition probability is
/// `count / samples_per_row`. For an exactly enumerated matrix
/// `samples_per_row = |Γ|`.
#[derive(Clone, Debug)]
pub struct TransitionMatrix {
    spec: ConjClassSpec,
    partitions: Vec<Partition>,
    index: HashMap<Partition, usize>,
    rows: Vec<Vec<(usize, u64)>>,
    samples_per_row: u64,
    exact: bool,
}

fn partition_table(n: usize) -> Result<(Vec<Partition>, HashMap<Partition, usize>)> {
    let count = partition_count(n);
    if count > MAX_PARTITIONS as u64 {
        return Err(Error::Resource(format!(
            "p({n}) = {count} partitions exceeds {MAX_PARTITIONS}; use Monte Carlo mode"
        )));
    }
    let parts = partitions(n);
    let index = parts.iter().enumerate().map(|(i, p)| (p.clone(), i)).collect();
    Ok((parts, index))
}

fn tally(row: HashMap<usize, u64>) -> Vec<(usize, u64)> {
    let mut row: Vec<(usize, u64)> = row.into_iter().collect();
    row.sort_unstable();
    row
}

/// Exact transition matrix by enumerating the whole step class against one
/// representative per partition.
pub fn build_transition(spec: &ConjClassSpec) -> Result<TransitionMatrix> {
    let n = spec.n();
    let (partitions, index) = partition_table(n)?;
    let gamma = class_elements(spec, MAX_CLASS_ELEMENTS).map_err(|e| match e {
        Error::Resource(msg) => Error::Resource(format!("{msg}; use Monte Carlo mode")),
        other => other,
    })?;
    let rows = partitions
        .par_iter()
        .map(|lambda| {
            let rep = cycle_type_of(lambda).representative();
            let mut row = HashMap::new();
            let mut product = rep.clone();
            for g in &gamma {
                for (dst, &q) in product.images.iter_mut().zip(g.images()) {
                    *dst = rep.images()[q as usize];
                }
                *row.entry(index[&partition_of(&product)]).or_insert(0u64) += 1;
            }
            tally(row)
        })
        .collect();
    Ok(TransitionMatrix {
        spec: spec.clone(),
        partitions,
        index,
        rows,
        samples_per_row: gamma.len() as u64,
        exact: true,
    })
}

/// Transition matrix with each row estimated from `samples` uniform class
/// elements, for classes too large to enumerate.
pub fn estimate_transition(spec: &ConjClassSpec, samples: u64, seed: u64) -> Result<TransitionMatrix> {
    if samples == 0 {
        return Err(Error::EmptySample);
    }
    let (partitions, index) = partition_table(spec.n())?;
    let rows = partitions
        .par_iter()
        .enumerate()
        .map(|(r, lambda)| {
            let mut rng = rng_from_seed(crate::seed::derive_seed(seed, r as u64));
            let mut sampler = ClassSampler::new(spec);
            let rep = cycle_type_of(lambda).representative();
            let mut row = HashMap::new();
            for _ in 0..samples {
                let mut product = rep.clone();
                sampler.step(&mut product, &mut rng);
                *row.entry(index[&partition_of(&product)]).or_insert(0u64) += 1;
            }
            tally(row)
        })
        .collect();
    Ok(TransitionMatrix {
        spec: spec.clone(),
        partitions,
        index,
        rows,
        samples_per_row: samples,
        exact: false,
    })
}

impl TransitionMatrix {
    pub fn spec(&self) -> &ConjClassSpec {
        &self.spec
    }

    pub fn n(&self) -> usize {
        self.spec.n()
    }

    pub fn partitions(&self) -> &[Partition] {
        &self.partitions
    }

    pub fn index_of(&self, part: &[u32]) -> Option<usize> {
        self.index.get(part).copied()
    }

    pub fn is_exact(&self) -> bool {
        self.exact
    }

    pub fn samples_per_row(&self) -> u64 {
        self.samples_per_row
    }

    /// Raw `(target, count)` pairs of row `from`.
    pub fn row_counts(&self, from: usize) -> &[(usize, u64)] {
        &self.rows[from]
    }

    pub fn probability(&self, from: &[u32], to: &[u32]) -> f64 {
        let (Some(i), Some(j)) = (self.index_of(from), self.index_of(to)) else {
            return 0.0;
        };
        self.rows[i]
            .iter()
            .find(|&&(k, _)| k == j)
            .map_or(0.0, |&(_, c)| c as f64 / self.samples_per_row as f64)
    }

    pub fn probability_exact(&self, from: &[u32], to: &[u32]) -> BigRational {
        let (Some(i), Some(j)) = (self.index_of(from), self.index_of(to)) else {
            return BigRational::zero();
        };
        let count = self.rows[i].iter().find(|&&(k, _)| k == j).map_or(0, |&(_, c)| c);
        BigRational::new(BigInt::from(count), BigInt::from(self.samples_per_row))
    }

    /// Binomial standard error of an entry; zero for an exact matrix.
    pub fn standard_error(&self, from: &[u32], to: &[u32]) -> f64 {
        if self.exact {
            return 0.0;
        }
        let p = self.probability(from, to);
        (p * (1.0 - p) / self.samples_per_row as f64).sqrt()
    }

    pub fn identity_index(&self) -> usize {
        self.partitions.len() - 1
    }

    pub fn point_mass_at_identity(&self) -> ClassDistribution {
        let mut probs = vec![0.0; self.partitions.len()];
        probs[self.identity_index()] = 1.0;
        ClassDistribution { probs }
    }

    pub fn step(&self, dist: &ClassDistribution) -> ClassDistribution {
        let mut acc = vec![CompensatedSum::default(); self.partitions.len()];
        let denom = self.samples_per_row as f64;
        for (from, &p) in dist.probs.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            for &(to, count) in &self.rows[from] {
                acc[to].add(p * count as f64 / denom);
            }
        }
        ClassDistribution {
            probs: acc.into_iter().map(CompensatedSum::value).collect(),
        }
    }

    pub fn step_exact(&self, dist: &[BigRational]) -> Vec<BigRational> {
        let mut out = vec![BigRational::zero(); self.partitions.len()];
        let denom = BigInt::from(self.samples_per_row);
        for (from, p) in dist.iter().enumerate() {
            if p.is_zero() {
                continue;
            }
            for &(to, count) in &self.rows[from] {
                out[to] += p * BigRational::new(BigInt::from(count), denom.clone());
            }
        }
        out
    }

    /// Exact class distributions at `t = 0..=t_max`.
    pub fn evolve_exact(&self, t_max: usize) -> Vec<Vec<BigRational>> {
        let mut current = vec![BigRational::zero(); self.partitions.len()];
        current[self.identity_index()] = BigRational::one();
        let mut out = Vec::with_capacity(t_max + 1);
        for _ in 0..t_max {
            let next = self.step_exact(&current);
            out.push(current);
            current = next;
        }
        out.push(current);
        out
    }

    pub fn evolve(&self, t_max: usize) -> Vec<ClassDistribution> {
        let mut current = self.point_mass_at_identity();
        let mut out = Vec::with_capacity(t_max + 1);
        for _ in 0..t_max {
            let next = self.step(&current);
            out.push(current);
            current = next;
        }
        out.push(current);
        out
    }

    /// Uniform measure on the permutations of the given parity, as a class
    /// distribution.
    pub fn coset_measure(&self, even: bool) -> Vec<BigRational> {
        coset_measure(&self.partitions, self.n(), even)
    }

    /// Parity of `X_t` started at the identity.
    pub fn coset_is_even(&self, t: u64) -> bool {
        self.spec.is_even() || t % 2 == 0
    }
}

fn coset_size(n: usize) -> BigUint {
    let fact: BigUint = (1..=n as u64).product();
    if n >= 2 {
        fact / 2u32
    } else {
        fact
    }
}

fn coset_measure(parts: &[Partition], n: usize, even: bool) -> Vec<BigRational> {
    let size = BigInt::from(coset_size(n));
    parts
        .iter()
        .map(|p| {
            if n >= 2 && partition_is_even(p) != even {
                BigRational::zero()
            } else {
                BigRational::new(BigInt::from(class_size(&cycle_type_of(p))), size.clone())
            }
        })
        .collect()
}

/// A probability vector indexed like the partitions of its matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct ClassDistribution {
    pub probs: Vec<f64>,
}

impl ClassDistribution {
    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }
}

pub fn tv_exact(p: &[BigRational], q: &[BigRational]) -> BigRational {
    let sum = p
        .iter()
        .zip(q)
        .fold(BigRational::zero(), |acc, (a, b)| acc + (a - b).abs());
    sum / BigRational::from_integer(BigInt::from(2))
}

pub fn tv(p: &[f64], q: &[f64]) -> f64 {
    let mut acc = CompensatedSum::default();
    for (a, b) in p.iter().zip(q) {
        acc.add((a - b).abs());
    }
    0.5 * acc.value()
}

fn to_f64s(v: &[BigRational]) -> Vec<f64> {
    v.iter().map(|x| x.to_f64().unwrap_or(f64::NAN)).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TvPoint {
    pub t: u64,
    /// Distance to the uniform measure on the coset reachable at time `t`.
    pub tv_coset: f64,
    /// Continuous-time walk at time `t` against the parity-weighted mixture
    /// of the two coset measures.
    pub tv_poissonized: f64,
}

/// Exact total-variation profile started at the identity for
/// `t = 0..=t_max`. Rational arithmetic for `n <= 8`.
pub fn tv_profile(matrix: &TransitionMatrix, t_max: u64) -> Vec<TvPoint> {
    let t_max_us = t_max as usize;
    let even = to_f64s(&matrix.coset_measure(true));
    let odd = to_f64s(&matrix.coset_measure(false));
    let coset: Vec<f64> = if matrix.exact && matrix.n() <= EXACT_RATIONAL_MAX_N {
        let ev = matrix.coset_measure(true);
        let od = matrix.coset_measure(false);
        matrix
            .evolve_exact(t_max_us)
            .iter()
            .enumerate()
            .map(|(t, d)| {
                let target = if matrix.coset_is_even(t as u64) { &ev } else { &od };
                tv_exact(d, target).to_f64().unwrap_or(f64::NAN)
            })
            .collect()
    } else {
        Vec::new()
    };

    // Poisson(t) has negligible mass beyond t + 12 sqrt(t) + 40.
    let horizon = t_max_us + 12 * (t_max as f64).sqrt().ceil() as usize + 40;
    let laws = matrix.evolve(horizon);
    (0..=t_max)
        .map(|t| {
            let tv_coset = if coset.is_empty() {
                let target = if matrix.coset_is_even(t) { &even } else { &odd };
                tv(&laws[t as usize].probs, target)
            } else {
                coset[t as usize]
            };
            TvPoint {
                t,
                tv_coset,
                tv_poissonized: poissonized_tv(matrix, &laws, &even, &odd, t as f64),
            }
        })
        .collect()
}

fn poissonized_tv(matrix: &TransitionMatrix, laws: &[ClassDistribution], even: &[f64], odd: &[f64], t: f64) -> f64 {
    let (law, p_even) = poisson_mixture(laws, t);
    let reference: Vec<f64> = if matrix.spec.is_even() {
        even.to_vec()
    } else {
        even.iter()
            .zip(odd)
            .map(|(e, o)| p_even * e + (1.0 - p_even) * o)
            .collect()
    };
    tv(&law, &reference)
}

/// First real time at which the continuous-time distance falls below
/// `threshold`, searched up to `t_max` and refined by bisection to `1e-9`.
pub fn poissonized_crossing_time(matrix: &TransitionMatrix, threshold: f64, t_max: u64) -> Option<f64> {
    let even = to_f64s(&matrix.coset_measure(true));
    let odd = to_f64s(&matrix.coset_measure(false));
    let horizon = t_max as usize + 12 * (t_max as f64).sqrt().ceil() as usize + 40;
    let laws = matrix.evolve(horizon);
    let dist = |t: f64| poissonized_tv(matrix, &laws, &even, &odd, t);
    let hi = (0..=t_max).find(|&t| dist(t as f64) < threshold)?;
    if hi == 0 {
        return Some(0.0);
    }
    let (mut lo, mut hi) = ((hi - 1) as f64, hi as f64);
    while hi - lo > 1e-9 {
        let mid = 0.5 * (lo + hi);
        if dist(mid) < threshold {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(hi)
}

/// `Σ_s P(N_t = s) laws[s]` and `P(N_t even)`.
fn poisson_mixture(laws: &[ClassDistribution], t: f64) -> (Vec<f64>, f64) {
    let dim = laws[0].probs.len();
    let mut acc = vec![CompensatedSum::default(); dim];
    let mut p_even = CompensatedSum::default();
    let mut log_w = -t;
    for (s, law) in laws.iter().enumerate() {
        if s > 0 {
            log_w += t.ln() - (s as f64).ln();
        }
        let w = if t == 0.0 {
            if s == 0 {
                1.0
            } else {
                0.0
            }
        } else {
            log_w.exp()
        };
        if s % 2 == 0 {
            p_even.add(w);
        }
        for (a, &p) in acc.iter_mut().zip(&law.probs) {
            a.add(w * p);
        }
    }
    (acc.into_iter().map(CompensatedSum::value).collect(), p_even.value())
}

/// Monte Carlo estimate of the coset and Poissonized profiles from
/// `reps` walks per time point, for `n` beyond the exact regime.
pub fn tv_profile_mc(spec: &ConjClassSpec, t_max: u64, reps: usize, seed: u64, workers: usize) -> Vec<TvPoint> {
    let n = spec.n();
    let ln_fact = ln_factorials(n);
    let ln_coset = ln_fact[n] - if n >= 2 { 2f64.ln() } else { 0.0 };
    let ln_pi = |part: &Partition| ln_class_size(part, &ln_fact) - ln_coset;

    // Discrete: histograms of X_t for every t from one trajectory per replicate.
    let discrete: Vec<Vec<Partition>> = run_replicates(reps, seed, workers, |_, s| {
        let mut rng = rng_from_seed(s);
        let mut sampler = ClassSampler::new(spec);
        let mut perm = Permutation::identity(n);
        let mut out = Vec::with_capacity(t_max as usize + 1);
        out.push(perm.cycle_lengths());
        for _ in 0..t_max {
            sampler.step(&mut perm, &mut rng);
            out.push(perm.cycle_lengths());
        }
        out
    });
    let poisson: Vec<Vec<Partition>> = run_replicates(reps, seed ^ 0x5eed_0f_9015_5011, workers, |_, s| {
        let mut rng = rng_from_seed(s);
        let mut sampler = ClassSampler::new(spec);
        (0..=t_max)
            .map(|t| {
                let steps = poisson_steps(t as f64, &mut rng).unwrap_or(0);
                let mut perm = Permutation::identity(n);
                crate::walk::run_steps(&mut sampler, &mut perm, steps, &mut rng);
                perm.cycle_lengths()
            })
            .collect()
    });

    let p_even = |t: f64| 0.5 * (1.0 + (-2.0 * t).exp());
    (0..=t_max)
        .map(|t| {
            let coset_even = spec.is_even() || t % 2 == 0;
            let tv_coset = mc_tv(discrete.iter().map(|row| &row[t as usize]), reps, |p| {
                if n >= 2 && partition_is_even(p) != coset_even {
                    0.0
                } else {
                    ln_pi(p).exp()
                }
            });
            let pe = if spec.is_even() { 1.0 } else { p_even(t as f64) };
            let tv_poissonized = mc_tv(poisson.iter().map(|row| &row[t as usize]), reps, |p| {
                let w = if n < 2 || partition_is_even(p) { pe } else { 1.0 - pe };
                w * ln_pi(p).exp()
            });
            TvPoint {
                t,
                tv_coset,
                tv_poissonized,
            }
        })
        .collect()
}

/// `Σ_λ (p̂(λ) − π(λ))^+` over the observed classes.
fn mc_tv<'a>(sample: impl Iterator<Item = &'a Partition>, reps: usize, pi: impl Fn(&Partition) -> f64) -> f64 {
    let mut counts: BTreeMap<&Partition, u64> = BTreeMap::new();
    for p in sample {
        *counts.entry(p).or_insert(0) += 1;
    }
    let mut acc = CompensatedSum::default();
    for (p, c) in counts {
        acc.add((c as f64 / reps as f64 - pi(p)).max(0.0));
    }
    acc.value()
}

fn ln_factorials(n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n + 1];
    for i in 1..=n {
        out[i] = out[i - 1] + (i as f64).ln();
    }
    out
}

fn ln_class_size(part: &Partition, ln_fact: &[f64]) -> f64 {
    let mut counts: BTreeMap<u32, usize> = BTreeMap::new();
    for &p in part {
        *counts.entry(p).or_insert(0) += 1;
    }
    let n: u32 = part.iter().sum();
    let mut out = ln_fact[n as usize];
    for (j, m) in counts {
        out -= m as f64 * (j as f64).ln() + ln_fact[m];
    }
    out
}

/// First `t` with coset TV below `threshold`.
pub fn tv_crossing_time(profile: &[TvPoint], threshold: f64) -> Option<u64> {
    profile.iter().find(|p| p.tv_coset < threshold).map(|p| p.t)
}

/// Number of derangements of `m` points of each parity, `(even, odd)`.
pub fn derangements_by_parity(m: usize) -> (BigInt, BigInt) {
    let mut d0 = BigInt::one();
    let mut d1 = BigInt::zero();
    let total = match m {
        0 => d0.clone(),
        1 => d1.clone(),
        _ => {
            for i in 2..=m {
                let next = BigInt::from(i - 1) * (&d0 + &d1);
                d0 = d1;
                d1 = next;
            }
            d1.clone()
        }
    };
    // D_even − D_odd = (−1)^{m−1} (m − 1)
    let signed = if m == 0 {
        BigInt::one()
    } else {
        let diff = BigInt::from(m as i64 - 1);
        if (m - 1) % 2 == 0 {
            diff
        } else {
            -diff
        }
    };
    let even: BigInt = (&total + &signed) / 2;
    let odd = total - &even;
    (even, odd)
}

/// Exact uniform measure of `{σ : σ has at least m fixed points}` within the
/// even (`even = true`) or odd permutations of `S_n`.
pub fn fixed_point_set_measure(n: usize, m: usize, even: bool) -> BigRational {
    if m == 0 {
        return BigRational::one();
    }
    if m > n {
        return BigRational::zero();
    }
    // Complement: exactly j < m fixed points.
    let mut below = BigInt::zero();
    let mut binom = BigInt::one();
    for j in 0..m {
        if j > 0 {
            binom = binom * BigInt::from(n - j + 1) / BigInt::from(j);
        }
        let (de, dodd) = derangements_by_parity(n - j);
        below += &binom * if even || n < 2 { de } else { dodd };
    }
    let size = BigInt::from(coset_size(n));
    BigRational::one() - BigRational::new(below, size)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FixedPointBound {
    /// `|P(X_t ∈ K_m) − μ(K_m)|`, a lower bound on the TV distance.
    pub bound: f64,
    pub walk_probability: f64,
    pub stationary_probability: f64,
    pub exact: bool,
}

/// Lower bound on `d_TV(t)` from the event "at least `m` fixed points".
/// Uses the exact class chain when it is small, Monte Carlo otherwise.
pub fn fixed_point_tv_lower(
    spec: &ConjClassSpec,
    t: u64,
    m: usize,
    reps: usize,
    seed: u64,
    workers: usize,
) -> Result<FixedPointBound> {
    if m == 0 {
        return Err(Error::Domain {
            value: 0.0,
            domain: "m >= 1",
        });
    }
    let n = spec.n();
    let even = spec.is_even() || t % 2 == 0;
    let mu = fixed_point_set_measure(n, m, even).to_f64().unwrap_or(f64::NAN);
    let small = n <= 20 && partition_count(n) as usize * spec.size() <= 10_000_000;
    let (walk_probability, exact) = match small.then(|| build_transition(spec)) {
        Some(Ok(matrix)) if t <= 100_000 => {
            let mut dist = matrix.point_mass_at_identity();
            for _ in 0..t {
                dist = matrix.step(&dist);
            }
            let p: f64 = matrix
                .partitions()
                .iter()
                .zip(&dist.probs)
                .filter(|(part, _)| part.iter().filter(|&&x| x == 1).count() >= m)
                .map(|(_, &p)| p)
                .sum();
            (p, true)
        }
        _ => {
            if reps == 0 {
                return Err(Error::EmptySample);
            }
            let hits = run_replicates(reps, seed, workers, |_, s| {
                let mut rng = rng_from_seed(s);
                let perm = crate::walk::walk_discrete_with(spec, &Permutation::identity(n), t, &mut rng);
                perm.fixed_points() >= m
            });
            (hits.iter().filter(|&&h| h).count() as f64 / reps as f64, false)
        }
    };
    Ok(FixedPointBound {
        bound: (walk_probability - mu).abs(),
        walk_probability,
        stationary_probability: mu,
        exact,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MixingBound {
    /// Number of curvature blocks `s` needed to reach distance `δ`.
    pub blocks: u64,
    /// `s · ⌊cn/k⌋` walk steps.
    pub steps: u64,
}

/// Mixing bound implied by a curvature `κ` at time scale `⌊cn/k⌋`:
/// `s = ⌈(ln n − ln δ) / (−ln(1 − κ))⌉`.
pub fn curvature_mixing_bound(kappa: f64, n: usize, k: usize, delta: f64, c: f64) -> Result<MixingBound> {
    if kappa.is_nan() || kappa <= 0.0 {
        return Err(Error::NoBound(format!("curvature {kappa} is not positive")));
    }
    if kappa > 1.0 {
        return Err(Error::Domain {
            value: kappa,
            domain: "(0, 1]",
        });
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Domain {
            value: delta,
            domain: "(0, 1)",
        });
    }
    let blocks = if kappa == 1.0 {
        1
    } else {
        let s = ((n as f64).ln() - delta.ln()) / -(1.0 - kappa).ln();
        (s.ceil() as u64).max(1)
    };
    let block_len = (c * n as f64 / k as f64).floor() as u64;
    Ok(MixingBound {
        blocks,
        steps: blocks * block_len,
    })
}

/// Draws one step of the class chain directly, for cross-checks.
pub fn sample_class_step<R: Rng + ?Sized>(spec: &ConjClassSpec, from: &[u32], rng: &mut R) -> Partition {
    let mut perm = cycle_type_of(&from.to_vec()).representative();
    ClassSampler::new(spec).step(&mut perm, rng);
    perm.cycle_lengths()
}
