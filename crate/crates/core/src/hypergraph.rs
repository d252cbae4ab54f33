//! The random hypergraph traced out by the walk: every step contributes one
//! packet of hyperedges, the supports of the cycles of its class element.

use std::collections::{BTreeSet, HashMap};

use rand::seq::index::sample as sample_indices;
use rand::Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::perm::{ClassSampler, ConjClassSpec};
use crate::seed::{rng_from_seed, run_replicates};

/// Default `β` in the `β ln n` threshold for large components.
pub const DEFAULT_BETA: f64 = 5.0;

/// `s` packets of hyperedges on `{0..n}`. Every packet has the same edge
/// sizes, listed by `edge_lengths`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HypergraphProcess {
    n: usize,
    edge_lengths: Vec<usize>,
    packet_size: usize,
    points: Vec<u32>,
}

impl HypergraphProcess {
    pub fn empty(spec: &ConjClassSpec) -> Self {
        let edge_lengths = ClassSampler::new(spec).lengths().to_vec();
        HypergraphProcess {
            n: spec.n(),
            packet_size: edge_lengths.iter().sum(),
            edge_lengths,
            points: Vec::new(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn packet_count(&self) -> usize {
        self.points.len().checked_div(self.packet_size).unwrap_or(0)
    }

    pub fn edge_count(&self) -> usize {
        self.packet_count() * self.edge_lengths.len()
    }

    pub fn edge_lengths(&self) -> &[usize] {
        &self.edge_lengths
    }

    /// Appends a packet given as `k` distinct points, cut into edges in
    /// `edge_lengths` order.
    pub fn push_packet(&mut self, points: &[u32]) -> Result<()> {
        if points.len() != self.packet_size {
            return Err(Error::SizeMismatch {
                left: points.len(),
                right: self.packet_size,
            });
        }
        let distinct: BTreeSet<_> = points.iter().collect();
        if distinct.len() != points.len() || points.iter().any(|&p| p as usize >= self.n) {
            return Err(Error::InvalidClass("packet points must be distinct and in range".into()));
        }
        self.points.extend_from_slice(points);
        Ok(())
    }

    /// Hyperedges of packet `t` (0-based).
    pub fn packet(&self, t: usize) -> impl Iterator<Item = &[u32]> + '_ {
        let mut start = t * self.packet_size;
        self.edge_lengths.iter().map(move |&len| {
            let edge = &self.points[start..start + len];
            start += len;
            edge
        })
    }

    /// All hyperedges with their packet index.
    pub fn edges(&self) -> impl Iterator<Item = (usize, &[u32])> + '_ {
        (0..self.packet_count()).flat_map(move |t| self.packet(t).map(move |e| (t, e)))
    }

    /// The same packets in a different order.
    pub fn reorder_packets(&self, order: &[usize]) -> Self {
        let mut points = Vec::with_capacity(self.points.len());
        for &t in order {
            points.extend_from_slice(&self.points[t * self.packet_size..(t + 1) * self.packet_size]);
        }
        HypergraphProcess {
            points,
            ..self.clone()
        }
    }
}

/// `s` packets, each the cycle supports of an independent uniform element
/// of the class.
pub fn hypergraph_from_walk<R: Rng + ?Sized>(spec: &ConjClassSpec, s: usize, rng: &mut R) -> HypergraphProcess {
    let mut h = HypergraphProcess::empty(spec);
    let mut sampler = ClassSampler::new(spec);
    h.points.reserve(s * h.packet_size);
    for _ in 0..s {
        h.points.extend_from_slice(sampler.sample_points(rng));
    }
    h
}

/// Disjoint-set forest with path compression and union by size.
#[derive(Clone, Debug)]
pub struct UnionFind {
    parent: Vec<u32>,
    size: Vec<u32>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n as u32).collect(),
            size: vec![1; n],
        }
    }

    pub fn find(&mut self, mut x: u32) -> u32 {
        let mut root = x;
        while self.parent[root as usize] != root {
            root = self.parent[root as usize];
        }
        while self.parent[x as usize] != root {
            let next = self.parent[x as usize];
            self.parent[x as usize] = root;
            x = next;
        }
        root
    }

    pub fn union(&mut self, a: u32, b: u32) -> u32 {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return ra;
        }
        if self.size[ra as usize] < self.size[rb as usize] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb as usize] = ra;
        self.size[ra as usize] += self.size[rb as usize];
        ra
    }

    pub fn component_size(&mut self, x: u32) -> usize {
        let r = self.find(x);
        self.size[r as usize] as usize
    }
}

pub fn union_find(h: &HypergraphProcess) -> UnionFind {
    let mut uf = UnionFind::new(h.n);
    for (_, edge) in h.edges() {
        for w in edge.windows(2) {
            uf.union(w[0], w[1]);
        }
    }
    uf
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComponentStats {
    pub largest: usize,
    pub second_largest: usize,
    /// Component sizes, descending.
    pub sizes: Vec<usize>,
    /// Fraction of vertices in components of size at least `β ln n`.
    pub fraction_large: f64,
}

pub fn component_stats(h: &HypergraphProcess, beta: f64) -> ComponentStats {
    let uf = union_find(h);
    let n = h.n;
    let mut sizes: Vec<usize> = (0..n as u32)
        .filter(|&v| uf.parent[v as usize] == v)
        .map(|v| uf.size[v as usize] as usize)
        .collect();
    sizes.sort_unstable_by(|a, b| b.cmp(a));
    let threshold = beta * (n as f64).ln();
    let large: usize = sizes.iter().filter(|&&s| s as f64 >= threshold).sum();
    ComponentStats {
        largest: sizes.first().copied().unwrap_or(0),
        second_largest: sizes.get(1).copied().unwrap_or(0),
        fraction_large: large as f64 / n as f64,
        sizes,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum VertexState {
    Unexplored,
    Active,
    Removed,
}

/// Counts after step `i` of the exploration.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExplorationStep {
    pub step: usize,
    pub active: usize,
    pub removed: usize,
    pub unexplored: usize,
    /// Vertex removed at this step (`None` at step 0).
    pub explored: Option<u32>,
    /// `|A_i| − |A_{i−1}|`.
    pub net_change: i64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExplorationState {
    pub states: Vec<VertexState>,
    /// `Y^{(t)}_j`: number of size-`j` edges of packet `t` revealed so far.
    pub usage: HashMap<(usize, usize), usize>,
    pub step: usize,
}

impl ExplorationState {
    pub fn count(&self, s: VertexState) -> usize {
        self.states.iter().filter(|&&x| x == s).count()
    }

    /// Removed and active vertices.
    pub fn discovered(&self) -> Vec<u32> {
        (0..self.states.len() as u32)
            .filter(|&v| self.states[v as usize] != VertexState::Unexplored)
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Exploration {
    pub trace: Vec<ExplorationStep>,
    pub state: ExplorationState,
    /// The run stopped because `|A_i| + i` exceeded the cap.
    pub capped: bool,
}

/// `2 n^{2/3}`.
pub fn default_cap(n: usize) -> usize {
    (2.0 * (n as f64).powf(2.0 / 3.0)).floor() as usize
}

struct Incidence {
    offsets: Vec<usize>,
    edges: Vec<u32>,
}

fn incidence(h: &HypergraphProcess) -> (Incidence, Vec<(usize, &[u32])>) {
    let edges: Vec<(usize, &[u32])> = h.edges().collect();
    let mut degree = vec![0usize; h.n + 1];
    for (_, e) in &edges {
        for &v in *e {
            degree[v as usize + 1] += 1;
        }
    }
    for i in 0..h.n {
        degree[i + 1] += degree[i];
    }
    let mut fill = degree.clone();
    let mut flat = vec![0u32; degree[h.n]];
    for (id, (_, e)) in edges.iter().enumerate() {
        for &v in *e {
            flat[fill[v as usize]] = id as u32;
            fill[v as usize] += 1;
        }
    }
    (
        Incidence {
            offsets: degree,
            edges: flat,
        },
        edges,
    )
}

/// Breadth-first exploration of the component of `v` (0-based), removing the
/// active vertex of smallest label at each step. Stops when the active set
/// empties or `|A_i| + i > cap`.
pub fn explore(h: &HypergraphProcess, v: u32, cap: Option<usize>) -> Result<Exploration> {
    if v as usize >= h.n {
        return Err(Error::Domain {
            value: v as f64,
            domain: "vertex in 0..n",
        });
    }
    let (inc, edges) = incidence(h);
    let mut states = vec![VertexState::Unexplored; h.n];
    let mut used = vec![false; edges.len()];
    let mut usage = HashMap::new();
    let mut active = BTreeSet::from([v]);
    states[v as usize] = VertexState::Active;
    let mut removed = 0usize;
    let mut trace = vec![ExplorationStep {
        step: 0,
        active: 1,
        removed: 0,
        unexplored: h.n - 1,
        explored: None,
        net_change: 1,
    }];
    let mut capped = false;
    while let Some(w) = active.pop_first() {
        states[w as usize] = VertexState::Removed;
        removed += 1;
        let before = active.len() + 1;
        for &id in &inc.edges[inc.offsets[w as usize]..inc.offsets[w as usize + 1]] {
            if used[id as usize] {
                continue;
            }
            used[id as usize] = true;
            let (t, edge) = edges[id as usize];
            *usage.entry((t, edge.len())).or_insert(0) += 1;
            for &x in edge {
                if states[x as usize] == VertexState::Unexplored {
                    states[x as usize] = VertexState::Active;
                    active.insert(x);
                }
            }
        }
        let unexplored = h.n - removed - active.len();
        trace.push(ExplorationStep {
            step: removed,
            active: active.len(),
            removed,
            unexplored,
            explored: Some(w),
            net_change: active.len() as i64 - before as i64,
        });
        if let Some(cap) = cap {
            if active.len() + removed > cap {
                capped = true;
                break;
            }
        }
    }
    Ok(Exploration {
        trace,
        state: ExplorationState {
            states,
            usage,
            step: removed,
        },
        capped,
    })
}

/// `|A_1| − |A_0|` for a vertex of a fresh hypergraph with `s` packets,
/// sampled from the exact law of the neighbourhood of a fixed vertex: each
/// packet touches it independently with probability `k/n`, through an edge
/// of size `j` with probability `j k_j / k`, whose other `j − 1` points are
/// uniform among the remaining vertices.
pub fn first_step_change<R: Rng + ?Sized>(spec: &ConjClassSpec, s: u64, rng: &mut R) -> i64 {
    let n = spec.n();
    let k = spec.size();
    let hits = Binomial::new(s, k as f64 / n as f64)
        .expect("k <= n")
        .sample(rng);
    let lengths: Vec<(usize, usize)> = spec.cycles().iter().map(|(&j, &kj)| (j, j * kj)).collect();
    let mut reached = BTreeSet::new();
    for _ in 0..hits {
        let mut r = rng.random_range(0..k);
        let j = lengths
            .iter()
            .find(|&&(_, w)| {
                if r < w {
                    true
                } else {
                    r -= w;
                    false
                }
            })
            .map(|&(j, _)| j)
            .expect("weights sum to k");
        // Vertex 0 is the explored vertex; the others are 1..n.
        for idx in sample_indices(rng, n - 1, j - 1) {
            reached.insert(idx + 1);
        }
    }
    reached.len() as i64 - 1
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OffspringCheck {
    pub estimate: f64,
    pub target: f64,
    pub standard_error: f64,
}

/// Monte Carlo `E[x^{|A_1| − |A_0|}]` at `c = sk/n` against `Ψ(1 − x, c)/x`.
pub fn offspring_check(
    spec: &ConjClassSpec,
    s: u64,
    x: f64,
    reps: usize,
    seed: u64,
    workers: usize,
) -> Result<OffspringCheck> {
    if !(x > 0.0 && x < 1.0) {
        return Err(Error::Domain {
            value: x,
            domain: "(0, 1)",
        });
    }
    if reps == 0 {
        return Err(Error::EmptySample);
    }
    let c = s as f64 * spec.size() as f64 / spec.n() as f64;
    if !(0.1..=10.0).contains(&c) {
        return Err(Error::Domain {
            value: c,
            domain: "sk/n in [0.1, 10]",
        });
    }
    let values = run_replicates(reps, seed, workers, |_, sd| {
        x.powi(first_step_change(spec, s, &mut rng_from_seed(sd)) as i32)
    });
    let mean = values.iter().sum::<f64>() / reps as f64;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (reps.max(2) - 1) as f64;
    let profile = crate::theta::limit_profile(spec);
    let target = crate::theta::psi(1.0 - x, c, &profile)? / x;
    Ok(OffspringCheck {
        estimate: mean,
        target,
        standard_error: (var / reps as f64).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::two_sample_chi_square_p;
    use crate::theta::{theta, LimitProfile};
    use rand::seq::SliceRandom;

    fn tr(n: usize) -> ConjClassSpec {
        ConjClassSpec::transpositions(n).unwrap()
    }

    #[test]
    fn packet_structure() {
        let mut rng = rng_from_seed(1);
        let spec = ConjClassSpec::parse(50, "2:2,3:1,5:2").unwrap();
        assert_eq!(hypergraph_from_walk(&spec, 0, &mut rng).edge_count(), 0);
        let h = hypergraph_from_walk(&spec, 1, &mut rng);
        let mut by_size: HashMap<usize, usize> = HashMap::new();
        for e in h.packet(0) {
            *by_size.entry(e.len()).or_insert(0) += 1;
        }
        assert_eq!(by_size, HashMap::from([(2, 2), (3, 1), (5, 2)]));
        let h = hypergraph_from_walk(&spec, 40, &mut rng);
        for t in 0..40 {
            let pts: BTreeSet<u32> = h.packet(t).flatten().copied().collect();
            assert_eq!(pts.len(), spec.size());
        }
        let h = hypergraph_from_walk(&tr(30), 17, &mut rng);
        assert_eq!(h.edge_count(), 17);
        assert!(h.edges().all(|(_, e)| e.len() == 2));
    }

    #[test]
    fn no_edges() {
        let h = HypergraphProcess::empty(&tr(100));
        let st = component_stats(&h, DEFAULT_BETA);
        assert_eq!(st.largest, 1);
        assert_eq!(st.fraction_large, 0.0);
        assert_eq!(st.sizes.len(), 100);
    }

    #[test]
    fn stats_invariants_and_order_independence() {
        let mut rng = rng_from_seed(5);
        let spec = ConjClassSpec::parse(300, "2:1,4:1").unwrap();
        for _ in 0..10 {
            let h = hypergraph_from_walk(&spec, 60, &mut rng);
            let st = component_stats(&h, 1.0);
            assert!(st.largest >= st.second_largest);
            assert_eq!(st.sizes.iter().sum::<usize>(), 300);
            let mut order: Vec<usize> = (0..h.packet_count()).collect();
            order.shuffle(&mut rng);
            assert_eq!(component_stats(&h.reorder_packets(&order), 1.0), st);
        }
    }

    #[test]
    fn giant_and_subcritical_at_moderate_n() {
        let n = 20_000;
        let mut rng = rng_from_seed(9);
        let target = theta(2.0, &LimitProfile::transpositions()).unwrap().theta;
        let st = component_stats(&hypergraph_from_walk(&tr(n), n, &mut rng), DEFAULT_BETA);
        assert!((st.largest as f64 / n as f64 - target).abs() < 0.02);
        assert!((st.fraction_large - target).abs() < 0.02);
        assert!((st.second_largest as f64) < 10.0 * (n as f64).ln());
        let st = component_stats(&hypergraph_from_walk(&tr(n), n / 4, &mut rng), DEFAULT_BETA);
        assert!((st.largest as f64) / (n as f64) < 0.01);
    }

    #[test]
    fn three_cycle_giant() {
        // k = 3, c_Γ = 1/2
        let n = 30_000;
        let spec = ConjClassSpec::k_cycles(n, 3).unwrap();
        let mut rng = rng_from_seed(3);
        let s = (1.5 * n as f64 / 3.0) as usize;
        let target = theta(1.5, &LimitProfile::k_cycles(3).unwrap()).unwrap().theta;
        let st = component_stats(&hypergraph_from_walk(&spec, s, &mut rng), DEFAULT_BETA);
        assert!((st.largest as f64 / n as f64 - target).abs() < 0.02);
    }

    #[test]
    fn exploration_recovers_components() {
        for seed in 0..10 {
            let mut rng = rng_from_seed(seed);
            let spec = if seed % 2 == 0 { tr(200) } else { ConjClassSpec::parse(200, "2:1,3:1").unwrap() };
            let h = hypergraph_from_walk(&spec, 90, &mut rng);
            let mut uf = union_find(&h);
            for v in 0..200u32 {
                let ex = explore(&h, v, None).unwrap();
                assert!(!ex.capped);
                let root = uf.find(v);
                let comp: Vec<u32> = (0..200u32).filter(|&w| uf.find(w) == root).collect();
                assert_eq!(ex.state.discovered(), comp);
                assert_eq!(ex.state.count(VertexState::Active), 0);
            }
        }
    }

    #[test]
    fn exploration_trace_invariants() {
        let mut rng = rng_from_seed(2);
        let spec = ConjClassSpec::parse(500, "2:1,3:2").unwrap();
        let h = hypergraph_from_walk(&spec, 100, &mut rng);
        for v in [0u32, 17, 250] {
            let ex = explore(&h, v, None).unwrap();
            for st in &ex.trace {
                assert_eq!(st.active + st.step, 500 - st.unexplored);
                assert_eq!(st.active + st.removed + st.unexplored, 500);
            }
            for (&(t, j), &y) in &ex.state.usage {
                assert!(t < 100);
                assert!(y <= spec.count(j));
            }
        }
        let isolated = HypergraphProcess::empty(&tr(10));
        let ex = explore(&isolated, 3, None).unwrap();
        assert_eq!(ex.state.step, 1);
        assert_eq!(ex.state.discovered(), vec![3]);
    }

    #[test]
    fn exploration_cap_fires() {
        let n = 5000;
        let mut rng = rng_from_seed(4);
        let h = hypergraph_from_walk(&tr(n), 2 * n, &mut rng);
        let cap = default_cap(n);
        let st = component_stats(&h, DEFAULT_BETA);
        let mut uf = union_find(&h);
        let v = (0..n as u32).find(|&v| uf.component_size(v) == st.largest).unwrap();
        let ex = explore(&h, v, Some(cap)).unwrap();
        assert!(ex.capped);
        let last = ex.trace.last().unwrap();
        assert!(last.active + last.step > cap);
    }

    /// The first exploration step of a full hypergraph has the same law as
    /// the local sampler.
    #[test]
    fn local_sampler_matches_full_exploration() {
        let spec = ConjClassSpec::parse(60, "2:1,3:1").unwrap();
        let s = 24;
        let reps = 20_000;
        let offset = 2usize;
        let mut full = vec![0u64; 40];
        let mut local = vec![0u64; 40];
        let mut rng = rng_from_seed(8);
        for _ in 0..reps {
            let h = hypergraph_from_walk(&spec, s, &mut rng);
            let d = explore(&h, 0, None).unwrap().trace[1].net_change;
            full[(d + offset as i64) as usize] += 1;
            local[(first_step_change(&spec, s as u64, &mut rng) + offset as i64) as usize] += 1;
        }
        assert!(two_sample_chi_square_p(&full, &local) > 0.001);
    }

    #[test]
    fn offspring_examples() {
        let spec = tr(100_000);
        let r = offspring_check(&spec, 100_000, 0.5, 4000, 1, 0).unwrap();
        assert!((r.target - 0.735_758_882).abs() < 1e-8);
        assert!((r.estimate - r.target).abs() < 4.0 * r.standard_error + 0.005);
        let near_one = offspring_check(&spec, 100_000, 0.999_999, 200, 1, 0).unwrap();
        assert!((near_one.target - 1.0).abs() < 1e-4 && (near_one.estimate - 1.0).abs() < 1e-4);
        assert!(offspring_check(&spec, 1, 0.5, 10, 1, 1).is_err());
        assert!(offspring_check(&spec, 100_000, 1.5, 10, 1, 1).is_err());
    }

    #[test]
    fn mesoscopic_component_exists() {
        let n: usize = 1 << 12;
        let root = (n as f64).sqrt() as usize;
        let cube = (n as f64).cbrt().round() as usize;
        let spec = ConjClassSpec::new(n, std::collections::BTreeMap::from([(2, root), (cube, 1)])).unwrap();
        let mut rng = rng_from_seed(6);
        let st = component_stats(&hypergraph_from_walk(&spec, 1, &mut rng), DEFAULT_BETA);
        assert!(st.largest >= cube);
    }
}
