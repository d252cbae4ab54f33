//! The tiling coupling of two cycle structures, the three-phase coupling of
//! the walks from `id` and from `τ1∘τ2`, and Monte Carlo curvature
//! estimators.
//!
//! Lengths are integers in units of `1/n`. A tiling is the multiset of
//! cycle lengths of a permutation together with a marked tile.

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::perm::{disjoint_transposition_pair, uniform_transposition, ClassSampler, ConjClassSpec, Permutation};
use crate::seed::{rng_from_seed, run_replicates};
use crate::theta::{limit_profile, theta};
use crate::walk::{is_refreshment, FineSchedule};

/// The grid bijection used to couple fragmentation of two unmatched marked
/// tiles of lengths `a <= b`, on `{2, …, n}`.
///
/// Points up to `γ + 1` with `γ = ⌈a/2 − 1⌉` are fixed, `(γ+1, a]` moves up
/// by `b − a` and `(a, b]` moves down by `a − γ − 1`, so that the image is
/// again `{2, …, n}`. Points above `b` are fixed.
pub fn phi(w: u32, a: u32, b: u32, n: u32) -> Result<u32> {
    if a > b {
        return Err(Error::ArgumentOrder(format!("a = {a} > b = {b}")));
    }
    if !(2..=n).contains(&w) || a == 0 || b > n {
        return Err(Error::Domain {
            value: w as f64,
            domain: "grid point in {2..n} with 1 <= a <= b <= n",
        });
    }
    let gamma = a.div_ceil(2).saturating_sub(1);
    Ok(if w > b || w <= gamma + 1 {
        w
    } else if w > a {
        w - (a - gamma - 1)
    } else {
        w + (b - a)
    })
}

/// Multiset of tile lengths, descending, with an optional marked tile.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tiling {
    n: u32,
    parts: Vec<u32>,
    marked: Option<usize>,
}

impl Tiling {
    pub fn new(mut parts: Vec<u32>) -> Result<Self> {
        if parts.contains(&0) {
            return Err(Error::InvalidClass("tile of length 0".into()));
        }
        parts.sort_unstable_by(|a, b| b.cmp(a));
        let n = parts.iter().sum();
        Ok(Tiling {
            n,
            parts,
            marked: None,
        })
    }

    pub fn from_permutation(p: &Permutation) -> Self {
        Tiling {
            n: p.n() as u32,
            parts: p.cycle_lengths(),
            marked: None,
        }
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn parts(&self) -> &[u32] {
        &self.parts
    }

    pub fn marked(&self) -> Option<usize> {
        self.marked
    }

    pub fn marked_len(&self) -> Option<u32> {
        self.marked.map(|i| self.parts[i])
    }

    pub fn largest(&self) -> u32 {
        self.parts.first().copied().unwrap_or(0)
    }

    fn set(&mut self, mut parts: Vec<u32>, marked_len: u32) {
        parts.sort_unstable_by(|a, b| b.cmp(a));
        self.marked = parts.iter().position(|&p| p == marked_len);
        self.parts = parts;
    }
}

/// Lengths present in both multisets, with multiplicity, and the leftovers of
/// each side. All three lists are descending.
fn split_matched(x: &[u32], y: &[u32]) -> (Vec<u32>, Vec<u32>, Vec<u32>) {
    let mut counts: BTreeMap<u32, (u32, u32)> = BTreeMap::new();
    for &p in x {
        counts.entry(p).or_default().0 += 1;
    }
    for &p in y {
        counts.entry(p).or_default().1 += 1;
    }
    let (mut ux, mut uy, mut m) = (Vec::new(), Vec::new(), Vec::new());
    for (&len, &(cx, cy)) in counts.iter().rev() {
        let common = cx.min(cy);
        m.extend(std::iter::repeat_n(len, common as usize));
        ux.extend(std::iter::repeat_n(len, (cx - common) as usize));
        uy.extend(std::iter::repeat_n(len, (cy - common) as usize));
    }
    (ux, uy, m)
}

/// Index of the tile containing grid point `pos` (1-based) in a layout.
fn tile_at(layout: &[u32], pos: u32) -> usize {
    let mut end = 0;
    for (i, &len) in layout.iter().enumerate() {
        end += len;
        if pos <= end {
            return i;
        }
    }
    unreachable!("position {pos} beyond total mass {end}")
}

fn remove_one(parts: &mut Vec<u32>, len: u32) {
    let i = parts.iter().position(|&p| p == len).expect("tile present");
    parts.remove(i);
}

/// Applies marker `v` to a tiling laid out as `[marked] ++ rest`.
fn fragment_or_merge(mut rest_layout: Vec<u32>, marked: u32, v: u32) -> (Vec<u32>, u32) {
    if v <= marked {
        rest_layout.push(v - 1);
        rest_layout.push(marked - v + 1);
        (rest_layout, v - 1)
    } else {
        let j = tile_at(&rest_layout, v - marked);
        let other = rest_layout.remove(j);
        rest_layout.push(marked + other);
        (rest_layout, marked + other)
    }
}

/// Two coupled tilings.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CouplingState {
    pub x: Tiling,
    pub y: Tiling,
}

impl CouplingState {
    pub fn new(x: Tiling, y: Tiling) -> Result<Self> {
        if x.n != y.n {
            return Err(Error::SizeMismatch {
                left: x.n as usize,
                right: y.n as usize,
            });
        }
        Ok(CouplingState { x, y })
    }

    pub fn from_permutations(p: &Permutation, q: &Permutation) -> Result<Self> {
        Self::new(Tiling::from_permutation(p), Tiling::from_permutation(q))
    }

    pub fn n(&self) -> u32 {
        self.x.n
    }

    /// Unmatched lengths of `x` and of `y`, descending.
    pub fn unmatched(&self) -> (Vec<u32>, Vec<u32>) {
        let (ux, uy, _) = split_matched(&self.x.parts, &self.y.parts);
        (ux, uy)
    }

    /// Pairs of equal-length tiles `(index in x, index in y)`, ties broken
    /// by position.
    pub fn matching(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        let (mut i, mut j) = (0, 0);
        let (x, y) = (&self.x.parts, &self.y.parts);
        while i < x.len() && j < y.len() {
            match x[i].cmp(&y[j]) {
                std::cmp::Ordering::Equal => {
                    out.push((i, j));
                    i += 1;
                    j += 1;
                }
                std::cmp::Ordering::Greater => i += 1,
                std::cmp::Ordering::Less => j += 1,
            }
        }
        out
    }

    pub fn unmatched_count(&self) -> usize {
        let (ux, uy) = self.unmatched();
        ux.len() + uy.len()
    }

    /// Smallest unmatched length on either side.
    pub fn smallest_unmatched(&self) -> Option<u32> {
        let (ux, uy) = self.unmatched();
        ux.iter().chain(&uy).copied().min()
    }

    pub fn is_matched(&self) -> bool {
        self.x.parts == self.y.parts
    }

    /// Minimal transposition distance between permutations with these cycle
    /// structures.
    pub fn min_distance(&self) -> u32 {
        let (ux, uy) = self.unmatched();
        block_distance(&ux, &uy)
    }

    /// One coupled transposition. A new marked pair is drawn when `refresh`
    /// holds or nothing is marked yet.
    pub fn step<R: Rng + ?Sized>(&mut self, refresh: bool, rng: &mut R) {
        let n = self.n();
        if refresh || self.x.marked.is_none() || self.y.marked.is_none() {
            // Unmatched tiles on the left, matched tiles on the right in the
            // same order on both sides.
            let (ux, uy, m) = split_matched(&self.x.parts, &self.y.parts);
            let u = rng.random_range(1..=n);
            let lx: Vec<u32> = ux.iter().chain(&m).copied().collect();
            let ly: Vec<u32> = uy.iter().chain(&m).copied().collect();
            let (mx, my) = (lx[tile_at(&lx, u)], ly[tile_at(&ly, u)]);
            self.x.marked = self.x.parts.iter().position(|&p| p == mx);
            self.y.marked = self.y.parts.iter().position(|&p| p == my);
        }
        let a = self.x.marked_len().expect("marked");
        let b = self.y.marked_len().expect("marked");

        let mut rest_x = self.x.parts.clone();
        remove_one(&mut rest_x, a);
        let mut rest_y = self.y.parts.clone();
        remove_one(&mut rest_y, b);
        let (rux, ruy, rm) = split_matched(&rest_x, &rest_y);
        let layout_x: Vec<u32> = rux.into_iter().chain(rm.iter().copied()).collect();
        let layout_y: Vec<u32> = ruy.into_iter().chain(rm).collect();

        let v = rng.random_range(2..=n);
        let (vx, vy) = if a == b {
            (v, v)
        } else if a < b {
            (v, phi(v, a, b, n).expect("valid grid"))
        } else {
            (phi(v, b, a, n).expect("valid grid"), v)
        };
        let (px, mx) = fragment_or_merge(layout_x, a, vx);
        let (py, my) = fragment_or_merge(layout_y, b, vy);
        self.x.set(px, mx);
        self.y.set(py, my);
    }
}

/// `coupled_step` on a copy.
pub fn coupled_step<R: Rng + ?Sized>(st: &CouplingState, refresh: bool, rng: &mut R) -> CouplingState {
    let mut next = st.clone();
    next.step(refresh, rng);
    next
}

/// `|P| + |Q| − 2B` where `B` is the largest number of blocks in a joint
/// partition of `P` and `Q` into pieces with equal sums.
pub fn block_distance(p: &[u32], q: &[u32]) -> u32 {
    if p.is_empty() && q.is_empty() {
        return 0;
    }
    let items: Vec<i64> = p.iter().map(|&x| x as i64).chain(q.iter().map(|&x| -(x as i64))).collect();
    let m = items.len();
    if m > 20 {
        // Too many pieces to search; one block is always available.
        return m as u32 - 2;
    }
    let full = (1usize << m) - 1;
    let mut sum = vec![0i64; full + 1];
    let mut best = vec![0u32; full + 1];
    for mask in 1..=full {
        let low = mask.trailing_zeros() as usize;
        sum[mask] = sum[mask & (mask - 1)] + items[low];
        let mut b = 0;
        let mut rest = mask;
        while rest != 0 {
            let i = rest.trailing_zeros() as usize;
            b = b.max(best[mask & !(1 << i)]);
            rest &= rest - 1;
        }
        best[mask] = b + u32::from(sum[mask] == 0);
    }
    m as u32 - 2 * best[full]
}

/// Fine-time indices of the three phases.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CouplingSchedule {
    pub c: f64,
    pub delta: f64,
    /// Length of the middle phase in transpositions.
    pub big_delta: u64,
    pub s1: u64,
    pub s2: u64,
    pub s3: u64,
}

/// `⌈δ^{-2}⌉`.
pub fn default_big_delta(delta: f64) -> u64 {
    (delta.powi(-2) - 1e-9).ceil() as u64
}

impl CouplingSchedule {
    /// `t = ⌊cn/k⌋`, `s3 = tρ`, `s1 = ρ (t − ⌈Δ/ρ⌉)` and `s2 = s1 + Δ`.
    pub fn new(spec: &ConjClassSpec, c: f64, delta: f64, big_delta: Option<u64>) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::Domain {
                value: c,
                domain: "(0, inf)",
            });
        }
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::Domain {
                value: delta,
                domain: "(0, 1)",
            });
        }
        let big_delta = big_delta.unwrap_or_else(|| default_big_delta(delta));
        if big_delta == 0 {
            return Err(Error::Schedule("middle phase must be non-empty".into()));
        }
        let rho = spec.rho() as u64;
        let t = steps_at(spec, c);
        let blocks = big_delta.div_ceil(rho);
        if blocks > t {
            return Err(Error::Schedule(format!(
                "middle phase of {big_delta} transpositions does not fit in t = {t} steps"
            )));
        }
        let s1 = rho * (t - blocks);
        Ok(CouplingSchedule {
            c,
            delta,
            big_delta,
            s1,
            s2: s1 + big_delta,
            s3: t * rho,
        })
    }
}

/// `⌊cn/k⌋`.
pub fn steps_at(spec: &ConjClassSpec, c: f64) -> u64 {
    (c * spec.n() as f64 / spec.size() as f64).floor() as u64
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CouplingRecord {
    pub final_distance: u32,
    pub a_delta_held: bool,
    pub matched_at_s2: bool,
    /// Combined unmatched count when the middle phase starts.
    pub initial_unmatched: usize,
    /// Both tilings kept an entry larger than `δ θ(c) n` throughout the
    /// middle phase.
    pub big_entry_throughout: bool,
}

/// End of the first phase: `X_{s1/ρ}` and `X_{s1/ρ} ∘ τ1 ∘ τ2` with
/// disjoint uniform transpositions.
pub fn phase_one<R: Rng + ?Sized>(spec: &ConjClassSpec, steps: u64, rng: &mut R) -> (Permutation, Permutation) {
    let n = spec.n();
    let mut x = Permutation::identity(n);
    let mut sampler = ClassSampler::new(spec);
    for _ in 0..steps {
        sampler.step(&mut x, rng);
    }
    let [(a, b), (c, d)] = disjoint_transposition_pair(n, rng);
    let mut y = x.clone();
    y.mul_transposition(a, b);
    y.mul_transposition(c, d);
    (x, y)
}

/// One replicate of the three-phase coupling between the walks started at
/// `id` and at `τ1 ∘ τ2`.
pub fn three_phase_couple<R: Rng + ?Sized>(
    spec: &ConjClassSpec,
    sched: &CouplingSchedule,
    rng: &mut R,
) -> CouplingRecord {
    let rho = spec.rho() as u64;
    let n = spec.n();
    let (x, y) = phase_one(spec, sched.s1 / rho, rng);
    let mut state = CouplingState::from_permutations(&x, &y).expect("same n");
    let initial_unmatched = state.unmatched_count();
    let held = state
        .smallest_unmatched()
        .is_none_or(|u| u as f64 > sched.delta * n as f64);
    if !held {
        // Shared increments for the rest of the run keep the distance.
        return CouplingRecord {
            final_distance: 2,
            a_delta_held: false,
            matched_at_s2: false,
            initial_unmatched,
            big_entry_throughout: false,
        };
    }
    let theta_c = theta(sched.c, &limit_profile(spec)).map(|r| r.theta).unwrap_or(0.0);
    let big = sched.delta * theta_c * n as f64;
    let has_big = |st: &CouplingState| st.x.largest() as f64 > big && st.y.largest() as f64 > big;
    let mut big_entry_throughout = has_big(&state);
    let fine = FineSchedule::new(spec);
    for u in sched.s1..sched.s2 {
        state.step(is_refreshment(u, &fine), rng);
        big_entry_throughout &= has_big(&state);
    }
    CouplingRecord {
        final_distance: state.min_distance(),
        a_delta_held: true,
        matched_at_s2: state.is_matched(),
        initial_unmatched,
        big_entry_throughout,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LowerEstimate {
    /// `1 − E[final distance] / 2`.
    pub estimate: f64,
    pub schedule: CouplingSchedule,
    /// Probability bound `2Δk/n` for violating the within-step constraints
    /// during the middle phase.
    pub violation_bound: f64,
    pub records: Vec<CouplingRecord>,
}

/// Coupling-based estimate of the curvature between `id` and `τ1∘τ2`; the
/// mean coupled distance bounds `W_1` from above.
pub fn curvature_lower_estimate(
    spec: &ConjClassSpec,
    c: f64,
    reps: usize,
    delta: f64,
    big_delta: Option<u64>,
    seed: u64,
    workers: usize,
) -> Result<LowerEstimate> {
    if reps == 0 {
        return Err(Error::EmptySample);
    }
    let schedule = CouplingSchedule::new(spec, c, delta, big_delta)?;
    let records = run_replicates(reps, seed, workers, |_, s| {
        three_phase_couple(spec, &schedule, &mut rng_from_seed(s))
    });
    let mean = records.iter().map(|r| r.final_distance as f64).sum::<f64>() / reps as f64;
    Ok(LowerEstimate {
        estimate: 1.0 - mean / 2.0,
        schedule,
        violation_bound: 2.0 * schedule.big_delta as f64 * spec.size() as f64 / spec.n() as f64,
        records,
    })
}

/// Per-replicate quantities of the dual estimator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DualSample {
    /// `d(id, X_t ∘ τ1 ∘ τ2) − d(id, X_t)`.
    pub pair_increment: i32,
    /// `d(id, X_t ∘ τ1) − d(id, X_t)`.
    pub single_increment: i32,
    /// `τ1` has both endpoints in one cycle of `X_t`.
    pub fragments: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UpperEstimate {
    /// `1 − E[d(id, X_t τ1 τ2) − d(id, X_t)] / 2`.
    pub estimate: f64,
    pub drift: f64,
    pub fragmentation: f64,
    pub samples: Vec<DualSample>,
}

fn dual_sample<R: Rng + ?Sized>(spec: &ConjClassSpec, t: u64, rng: &mut R) -> DualSample {
    let n = spec.n();
    let mut x = Permutation::identity(n);
    let mut sampler = ClassSampler::new(spec);
    for _ in 0..t {
        sampler.step(&mut x, rng);
    }
    let base = x.cycle_count() as i32;
    let [(a, b), (c, d)] = disjoint_transposition_pair(n, rng);
    let labels = x.cycle_labels();
    let fragments = labels[a] == labels[b];
    x.mul_transposition(a, b);
    let one = x.cycle_count() as i32;
    x.mul_transposition(c, d);
    let two = x.cycle_count() as i32;
    DualSample {
        pair_increment: base - two,
        single_increment: base - one,
        fragments,
    }
}

/// Upper bound on the curvature from the 1-Lipschitz test function
/// `d(id, ·)` at `t = ⌊cn/k⌋`.
pub fn curvature_upper_estimate(spec: &ConjClassSpec, c: f64, reps: usize, seed: u64, workers: usize) -> Result<UpperEstimate> {
    if reps == 0 {
        return Err(Error::EmptySample);
    }
    let t = steps_at(spec, c);
    let samples = run_replicates(reps, seed, workers, |_, s| dual_sample(spec, t, &mut rng_from_seed(s)));
    let r = reps as f64;
    let mean_pair = samples.iter().map(|s| s.pair_increment as f64).sum::<f64>() / r;
    Ok(UpperEstimate {
        estimate: 1.0 - mean_pair / 2.0,
        drift: samples.iter().map(|s| s.single_increment as f64).sum::<f64>() / r,
        fragmentation: samples.iter().filter(|s| s.fragments).count() as f64 / r,
        samples,
    })
}

/// Per replicate: whether a fresh uniform transposition has both endpoints
/// in one cycle of `X_t`, `t = ⌊cn/k⌋`.
pub fn fragmentation_samples(spec: &ConjClassSpec, c: f64, reps: usize, seed: u64, workers: usize) -> Result<Vec<bool>> {
    if reps == 0 {
        return Err(Error::EmptySample);
    }
    let t = steps_at(spec, c);
    Ok(run_replicates(reps, seed, workers, |_, s| {
        let mut rng = rng_from_seed(s);
        let mut x = Permutation::identity(spec.n());
        let mut sampler = ClassSampler::new(spec);
        for _ in 0..t {
            sampler.step(&mut x, &mut rng);
        }
        let (a, b) = uniform_transposition(spec.n(), &mut rng);
        let labels = x.cycle_labels();
        labels[a] == labels[b]
    }))
}

/// Frequency of [`fragmentation_samples`].
pub fn fragmentation_probability(spec: &ConjClassSpec, c: f64, reps: usize, seed: u64, workers: usize) -> Result<f64> {
    let hits = fragmentation_samples(spec, c, reps, seed, workers)?;
    Ok(hits.iter().filter(|&&h| h).count() as f64 / reps as f64)
}
