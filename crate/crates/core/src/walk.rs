//! The random walk driven by a conjugacy class, in discrete time, in
//! Poissonized continuous time, and on the finer transposition time scale.

use std::collections::BTreeSet;
use std::fmt;

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::perm::{ClassSampler, ConjClassSpec, Permutation};
use crate::seed::{rng_from_seed, SimRng};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WalkConfig {
    pub spec: ConjClassSpec,
    pub start: Permutation,
    pub seed: u64,
}

impl WalkConfig {
    pub fn new(spec: ConjClassSpec, start: Permutation, seed: u64) -> Result<Self> {
        if start.n() != spec.n() {
            return Err(Error::SizeMismatch {
                left: start.n(),
                right: spec.n(),
            });
        }
        Ok(WalkConfig { spec, start, seed })
    }

    pub fn from_identity(spec: ConjClassSpec, seed: u64) -> Self {
        let start = Permutation::identity(spec.n());
        WalkConfig { spec, start, seed }
    }

    fn rng(&self) -> SimRng {
        rng_from_seed(self.seed)
    }
}

/// Runs `t` steps in place.
pub fn run_steps<R: Rng + ?Sized>(
    sampler: &mut ClassSampler,
    perm: &mut Permutation,
    t: u64,
    rng: &mut R,
) {
    for _ in 0..t {
        sampler.step(perm, rng);
    }
}

/// `start ∘ γ_1 ∘ … ∘ γ_t` with i.i.d. uniform class elements.
pub fn walk_discrete(cfg: &WalkConfig, t: u64) -> Permutation {
    let mut rng = cfg.rng();
    walk_discrete_with(&cfg.spec, &cfg.start, t, &mut rng)
}

pub fn walk_discrete_with<R: Rng + ?Sized>(
    spec: &ConjClassSpec,
    start: &Permutation,
    t: u64,
    rng: &mut R,
) -> Permutation {
    let mut perm = start.clone();
    run_steps(&mut ClassSampler::new(spec), &mut perm, t, rng);
    perm
}

/// A Poisson(`mean`) step count.
pub fn poisson_steps<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> Result<u64> {
    if !(mean >= 0.0 && mean.is_finite()) {
        return Err(Error::Domain {
            value: mean,
            domain: "[0, inf)",
        });
    }
    if mean == 0.0 {
        return Ok(0);
    }
    let dist = Poisson::new(mean).map_err(|_| Error::Domain {
        value: mean,
        domain: "(0, inf)",
    })?;
    Ok(dist.sample(rng) as u64)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PoissonWalk {
    pub perm: Permutation,
    pub steps: u64,
}

/// The discrete walk observed after an independent Poisson(`t_real`) number
/// of steps.
pub fn walk_poissonized(cfg: &WalkConfig, t_real: f64) -> Result<PoissonWalk> {
    let mut rng = cfg.rng();
    let steps = poisson_steps(t_real, &mut rng)?;
    let perm = walk_discrete_with(&cfg.spec, &cfg.start, steps, &mut rng);
    Ok(PoissonWalk { perm, steps })
}

/// A transposition of two 0-based points, displayed 1-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Transposition(pub u32, pub u32);

impl Transposition {
    pub fn to_permutation(self, n: usize) -> Permutation {
        let mut p = Permutation::identity(n);
        p.mul_transposition(self.0 as usize, self.1 as usize);
        p
    }
}

impl fmt::Display for Transposition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({} {})", self.0 + 1, self.1 + 1)
    }
}

/// Writes a class element as `ρ` transpositions: cycles in nondecreasing
/// length order, each cycle `(x_1 … x_j)` as `(x_1 x_2) ∘ … ∘ (x_{j−1} x_j)`.
/// Multiplying them left to right reproduces `g`.
pub fn decompose_to_transpositions(
    g: &Permutation,
    spec: &ConjClassSpec,
) -> Result<Vec<Transposition>> {
    if g.n() != spec.n() {
        return Err(Error::SizeMismatch {
            left: g.n(),
            right: spec.n(),
        });
    }
    if g.cycle_type() != spec.cycle_type() {
        return Err(Error::TypeMismatch);
    }
    let mut cycles: Vec<Vec<u32>> = g.cycles().into_iter().filter(|c| c.len() > 1).collect();
    cycles.sort_by_key(|c| c.len());
    let mut out = Vec::with_capacity(spec.rho());
    for cycle in cycles {
        out.extend(cycle.windows(2).map(|w| Transposition(w[0], w[1])));
    }
    Ok(out)
}

/// Offsets within a step (0-based transposition index modulo `ρ`) at which
/// a new cycle of the class element begins.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FineSchedule {
    spec: ConjClassSpec,
    refresh_offsets: BTreeSet<usize>,
}

impl FineSchedule {
    pub fn new(spec: &ConjClassSpec) -> Self {
        let mut refresh_offsets = BTreeSet::new();
        let mut offset = 0;
        for len in spec.lengths_ascending() {
            refresh_offsets.insert(offset);
            offset += len - 1;
        }
        FineSchedule {
            spec: spec.clone(),
            refresh_offsets,
        }
    }

    pub fn spec(&self) -> &ConjClassSpec {
        &self.spec
    }

    pub fn rho(&self) -> usize {
        self.spec.rho()
    }

    pub fn refresh_offsets(&self) -> &BTreeSet<usize> {
        &self.refresh_offsets
    }
}

pub fn is_refreshment(u: u64, sched: &FineSchedule) -> bool {
    sched
        .refresh_offsets
        .contains(&((u % sched.rho() as u64) as usize))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Uniformity {
    /// Markers avoid every point already used within the current step.
    Strict,
    /// Markers ignore the within-step constraint.
    Relaxed,
}

impl std::str::FromStr for Uniformity {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "strict" => Ok(Uniformity::Strict),
            "relaxed" => Ok(Uniformity::Relaxed),
            other => Err(Error::Parse(format!("unknown mode {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FineWalk {
    pub perm: Permutation,
    /// Transpositions whose markers broke the strict constraint.
    /// Always zero in strict mode.
    pub violations: u64,
}

/// The walk on the transposition time scale: after `u = sρ + i` fine steps,
/// `X_s ∘ τ^{(1)}_{s+1} ∘ … ∘ τ^{(i)}_{s+1}`.
///
/// Strict mode consumes randomness exactly like [`walk_discrete`], so with
/// equal seeds `fine_walk(cfg, sρ, Strict)` equals `walk_discrete(cfg, s)`.
pub fn fine_walk(cfg: &WalkConfig, u: u64, mode: Uniformity) -> FineWalk {
    let mut rng = cfg.rng();
    match mode {
        Uniformity::Strict => FineWalk {
            perm: fine_walk_strict(&cfg.spec, &cfg.start, u, &mut rng),
            violations: 0,
        },
        Uniformity::Relaxed => fine_walk_relaxed(&cfg.spec, &cfg.start, u, &mut rng),
    }
}

fn fine_walk_strict<R: Rng + ?Sized>(
    spec: &ConjClassSpec,
    start: &Permutation,
    u: u64,
    rng: &mut R,
) -> Permutation {
    let rho = spec.rho() as u64;
    let mut perm = start.clone();
    let mut sampler = ClassSampler::new(spec);
    run_steps(&mut sampler, &mut perm, u / rho, rng);
    let mut partial = (u % rho) as usize;
    if partial == 0 {
        return perm;
    }
    let lengths = sampler.lengths().to_vec();
    let points = sampler.sample_points(rng);
    let mut start_idx = 0;
    for len in lengths {
        for w in points[start_idx..start_idx + len].windows(2) {
            if partial == 0 {
                return perm;
            }
            perm.mul_transposition(w[0] as usize, w[1] as usize);
            partial -= 1;
        }
        start_idx += len;
    }
    perm
}

fn fine_walk_relaxed<R: Rng + ?Sized>(
    spec: &ConjClassSpec,
    start: &Permutation,
    u: u64,
    rng: &mut R,
) -> FineWalk {
    let n = spec.n();
    let sched = FineSchedule::new(spec);
    let rho = spec.rho() as u64;
    let mut perm = start.clone();
    let mut used = vec![false; n];
    let mut used_list: Vec<usize> = Vec::with_capacity(2 * spec.rho());
    let mut violations = 0;
    let mut second = 0usize;
    for idx in 0..u {
        if idx % rho == 0 {
            for &p in &used_list {
                used[p] = false;
            }
            used_list.clear();
        }
        let mut violated = false;
        let first = if is_refreshment(idx, &sched) {
            let x = rng.random_range(0..n);
            violated |= used[x];
            x
        } else {
            second
        };
        let y = rng.random_range(0..n - 1);
        let y = if y >= first { y + 1 } else { y };
        violated |= used[y];
        for p in [first, y] {
            if !used[p] {
                used[p] = true;
                used_list.push(p);
            }
        }
        violations += violated as u64;
        perm.mul_transposition(first, y);
        second = y;
    }
    FineWalk { perm, violations }
}
