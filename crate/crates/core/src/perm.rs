//! Permutations of `{1..n}`, their cycle structure, the transposition
//! metric and uniform sampling from a conjugacy class.
//!
//! Composition is fixed globally as `(p ∘ q)(i) = p(q(i))`. A walk step
//! multiplies on the right: `X_{t+1} = X_t ∘ γ`. Points are 1-based in every
//! external representation (JSON, CLI, FFI) and 0-based internally.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::One;
use rand::Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// A bijection of `{0..n}` stored as its image table.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Permutation {
    pub(crate) images: Vec<u32>,
}

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Permutation {
            images: (0..n as u32).collect(),
        }
    }

    /// Builds a permutation from 0-based images, checking bijectivity.
    pub fn from_images(images: Vec<u32>) -> Result<Self> {
        let n = images.len();
        let mut seen = vec![false; n];
        for &v in &images {
            let v = v as usize;
            if v >= n {
                return Err(Error::InvalidPermutation(format!(
                    "image {} out of range for n = {n}",
                    v + 1
                )));
            }
            if std::mem::replace(&mut seen[v], true) {
                return Err(Error::InvalidPermutation(format!(
                    "image {} repeated",
                    v + 1
                )));
            }
        }
        Ok(Permutation { images })
    }

    /// Builds a permutation from 1-based images, the external convention.
    pub fn from_one_based(images: &[usize]) -> Result<Self> {
        let zero = images
            .iter()
            .map(|&v| {
                if v == 0 || v > images.len() {
                    Err(Error::InvalidPermutation(format!(
                        "image {v} out of range for n = {}",
                        images.len()
                    )))
                } else {
                    Ok((v - 1) as u32)
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_images(zero)
    }

    /// Product of the given disjoint cycles (1-based points).
    pub fn from_cycles(n: usize, cycles: &[&[usize]]) -> Result<Self> {
        let mut images: Vec<u32> = (0..n as u32).collect();
        let mut touched = vec![false; n];
        for cycle in cycles {
            for (idx, &x) in cycle.iter().enumerate() {
                if x == 0 || x > n {
                    return Err(Error::InvalidPermutation(format!("point {x} out of range")));
                }
                if std::mem::replace(&mut touched[x - 1], true) {
                    return Err(Error::InvalidPermutation(format!("point {x} in two cycles")));
                }
                let next = cycle[(idx + 1) % cycle.len()];
                images[x - 1] = (next - 1) as u32;
            }
        }
        Self::from_images(images)
    }

    /// The transposition of the 1-based points `a` and `b`.
    pub fn transposition(n: usize, a: usize, b: usize) -> Result<Self> {
        if a == b {
            return Err(Error::InvalidPermutation(format!("degenerate transposition ({a} {a})")));
        }
        Self::from_cycles(n, &[&[a, b]])
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.images.len()
    }

    /// 0-based image table.
    #[inline]
    pub fn images(&self) -> &[u32] {
        &self.images
    }

    pub fn to_one_based(&self) -> Vec<usize> {
        self.images.iter().map(|&v| v as usize + 1).collect()
    }

    #[inline]
    pub fn apply(&self, i: usize) -> usize {
        self.images[i] as usize
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(i, &v)| i == v as usize)
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0u32; self.n()];
        for (i, &v) in self.images.iter().enumerate() {
            inv[v as usize] = i as u32;
        }
        Permutation { images: inv }
    }

    /// `self ∘ (a b)` in place, 0-based points.
    #[inline]
    pub fn mul_transposition(&mut self, a: usize, b: usize) {
        self.images.swap(a, b);
    }

    /// `self ∘ γ` in place where `γ` is the cycle `points[0] → points[1] → …`.
    #[inline]
    pub fn mul_cycle(&mut self, points: &[u32]) {
        if points.len() < 2 {
            return;
        }
        let first = self.images[points[0] as usize];
        for w in points.windows(2) {
            self.images[w[0] as usize] = self.images[w[1] as usize];
        }
        self.images[points[points.len() - 1] as usize] = first;
    }

    /// Cycles as 0-based point lists, each starting from its smallest point,
    /// ordered by that point. Fixed points are included.
    pub fn cycles(&self) -> Vec<Vec<u32>> {
        let n = self.n();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            let mut cycle = Vec::new();
            let mut x = start;
            while !seen[x] {
                seen[x] = true;
                cycle.push(x as u32);
                x = self.images[x] as usize;
            }
            out.push(cycle);
        }
        out
    }

    /// Cycle lengths in decreasing order, fixed points included.
    pub fn cycle_lengths(&self) -> Vec<u32> {
        let n = self.n();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            let mut len = 0u32;
            let mut x = start;
            while !seen[x] {
                seen[x] = true;
                len += 1;
                x = self.images[x] as usize;
            }
            out.push(len);
        }
        out.sort_unstable_by(|a, b| b.cmp(a));
        out
    }

    pub fn cycle_count(&self) -> usize {
        let n = self.n();
        let mut seen = vec![false; n];
        let mut count = 0;
        for start in 0..n {
            if seen[start] {
                continue;
            }
            count += 1;
            let mut x = start;
            while !seen[x] {
                seen[x] = true;
                x = self.images[x] as usize;
            }
        }
        count
    }

    /// Per-point cycle label; two points share a label iff they lie on the same cycle.
    pub fn cycle_labels(&self) -> Vec<u32> {
        let n = self.n();
        let mut label = vec![u32::MAX; n];
        let mut next = 0u32;
        for start in 0..n {
            if label[start] != u32::MAX {
                continue;
            }
            let mut x = start;
            while label[x] == u32::MAX {
                label[x] = next;
                x = self.images[x] as usize;
            }
            next += 1;
        }
        label
    }

    pub fn fixed_points(&self) -> usize {
        self.images
            .iter()
            .enumerate()
            .filter(|(i, &v)| *i == v as usize)
            .count()
    }

    pub fn cycle_type(&self) -> CycleType {
        CycleType::from_lengths(self.n(), self.cycle_lengths().into_iter().map(|l| l as usize))
    }

    /// True when the permutation lies in the alternating group.
    pub fn is_even(&self) -> bool {
        (self.n() - self.cycle_count()) % 2 == 0
    }
}

impl fmt::Display for Permutation {
    /// Cycle notation with 1-based points, fixed points omitted.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut any = false;
        for cycle in self.cycles().into_iter().filter(|c| c.len() > 1) {
            any = true;
            write!(f, "(")?;
            for (i, x) in cycle.iter().enumerate() {
                if i > 0 {
                    write!(f, " ")?;
                }
                write!(f, "{}", x + 1)?;
            }
            write!(f, ")")?;
        }
        if !any {
            write!(f, "id")?;
        }
        Ok(())
    }
}

impl Serialize for Permutation {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_one_based().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Permutation {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let images = Vec::<usize>::deserialize(deserializer)?;
        Permutation::from_one_based(&images).map_err(serde::de::Error::custom)
    }
}

/// `p ∘ q`, i.e. `r(i) = p(q(i))`.
pub fn compose(p: &Permutation, q: &Permutation) -> Result<Permutation> {
    if p.n() != q.n() {
        return Err(Error::SizeMismatch {
            left: p.n(),
            right: q.n(),
        });
    }
    Ok(Permutation {
        images: q.images.iter().map(|&i| p.images[i as usize]).collect(),
    })
}

/// Word distance in the Cayley graph generated by all transpositions:
/// `n − #cycles(p⁻¹ ∘ q)`.
pub fn transposition_distance(p: &Permutation, q: &Permutation) -> Result<usize> {
    let quotient = compose(&p.inverse(), q)?;
    Ok(quotient.n() - quotient.cycle_count())
}

pub fn cycle_type(p: &Permutation) -> CycleType {
    p.cycle_type()
}

/// Number of cycles of each length, fixed points included.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CycleType {
    n: usize,
    counts: BTreeMap<usize, usize>,
}

impl CycleType {
    pub fn new(n: usize, counts: BTreeMap<usize, usize>) -> Result<Self> {
        let total: usize = counts.iter().map(|(j, m)| j * m).sum();
        if counts.contains_key(&0) {
            return Err(Error::InvalidClass("cycle length 0".into()));
        }
        if total != n {
            return Err(Error::InvalidClass(format!(
                "cycle lengths sum to {total}, expected {n}"
            )));
        }
        let counts = counts.into_iter().filter(|&(_, m)| m > 0).collect();
        Ok(CycleType { n, counts })
    }

    pub(crate) fn from_lengths(n: usize, lengths: impl IntoIterator<Item = usize>) -> Self {
        let mut counts = BTreeMap::new();
        for l in lengths {
            *counts.entry(l).or_insert(0) += 1;
        }
        CycleType { n, counts }
    }

    /// Builds a cycle type from a multiset of parts summing to `n`.
    pub fn from_parts(parts: &[usize]) -> Result<Self> {
        let n = parts.iter().sum();
        let mut counts = BTreeMap::new();
        for &p in parts {
            *counts.entry(p).or_insert(0) += 1;
        }
        Self::new(n, counts)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `m_j`, the number of cycles of length `j`.
    pub fn count(&self, j: usize) -> usize {
        self.counts.get(&j).copied().unwrap_or(0)
    }

    pub fn counts(&self) -> &BTreeMap<usize, usize> {
        &self.counts
    }

    pub fn cycle_count(&self) -> usize {
        self.counts.values().sum()
    }

    /// Parts in weakly decreasing order.
    pub fn parts(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.cycle_count());
        for (&j, &m) in self.counts.iter().rev() {
            out.extend(std::iter::repeat_n(j, m));
        }
        out
    }

    pub fn is_even(&self) -> bool {
        (self.n - self.cycle_count()) % 2 == 0
    }

    /// A fixed representative: cycles laid out on consecutive points,
    /// longest first.
    pub fn representative(&self) -> Permutation {
        let mut images: Vec<u32> = (0..self.n as u32).collect();
        let mut start = 0usize;
        for len in self.parts() {
            for i in 0..len {
                images[start + i] = (start + (i + 1) % len) as u32;
            }
            start += len;
        }
        Permutation { images }
    }
}

/// `n! / Π_j j^{m_j} m_j!`, exactly.
pub fn class_size(t: &CycleType) -> BigUint {
    let mut num = BigUint::one();
    for i in 2..=t.n {
        num *= i as u64;
    }
    let mut den = BigUint::one();
    for (&j, &m) in &t.counts {
        for _ in 0..m {
            den *= j as u64;
        }
        for i in 2..=m {
            den *= i as u64;
        }
    }
    num / den
}

/// A conjugacy class of `S_n`, given by its non-trivial cycle counts `k_j`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ConjClassSpec {
    n: usize,
    cycles: BTreeMap<usize, usize>,
}

impl ConjClassSpec {
    pub fn new(n: usize, cycles: BTreeMap<usize, usize>) -> Result<Self> {
        if let Some((&j, _)) = cycles.iter().find(|(&j, _)| j < 2) {
            return Err(Error::InvalidClass(format!("cycle length {j} < 2")));
        }
        let cycles: BTreeMap<usize, usize> = cycles.into_iter().filter(|&(_, k)| k > 0).collect();
        if cycles.is_empty() {
            return Err(Error::InvalidClass("the identity class does not move".into()));
        }
        let needed: usize = cycles.iter().map(|(j, k)| j * k).sum();
        if needed > n {
            return Err(Error::InfeasibleClass { needed, n });
        }
        Ok(ConjClassSpec { n, cycles })
    }

    /// Parses `"j1:c1,j2:c2"`.
    pub fn parse(n: usize, s: &str) -> Result<Self> {
        Self::new(n, parse_counts(s)?)
    }

    pub fn transpositions(n: usize) -> Result<Self> {
        Self::new(n, BTreeMap::from([(2, 1)]))
    }

    pub fn k_cycles(n: usize, k: usize) -> Result<Self> {
        Self::new(n, BTreeMap::from([(k, 1)]))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Same class, different ground set.
    pub fn with_n(&self, n: usize) -> Result<Self> {
        Self::new(n, self.cycles.clone())
    }

    pub fn cycles(&self) -> &BTreeMap<usize, usize> {
        &self.cycles
    }

    /// `k_j`.
    pub fn count(&self, j: usize) -> usize {
        self.cycles.get(&j).copied().unwrap_or(0)
    }

    /// `|Γ| = Σ j·k_j`, the number of points a class element moves.
    pub fn size(&self) -> usize {
        self.cycles.iter().map(|(j, k)| j * k).sum()
    }

    /// `ρ = Σ (j−1)·k_j`, transpositions per step.
    pub fn rho(&self) -> usize {
        self.cycles.iter().map(|(j, k)| (j - 1) * k).sum()
    }

    pub fn num_cycles(&self) -> usize {
        self.cycles.values().sum()
    }

    /// Cycle lengths of one class element, smallest first.
    pub fn lengths_ascending(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.num_cycles());
        for (&j, &k) in &self.cycles {
            out.extend(std::iter::repeat_n(j, k));
        }
        out
    }

    pub fn is_even(&self) -> bool {
        self.rho() % 2 == 0
    }

    pub fn cycle_type(&self) -> CycleType {
        let mut counts = self.cycles.clone();
        let fixed = self.n - self.size();
        if fixed > 0 {
            counts.insert(1, fixed);
        }
        CycleType {
            n: self.n,
            counts,
        }
    }

    /// `"j1:c1,j2:c2"`.
    pub fn class_string(&self) -> String {
        format_counts(&self.cycles)
    }
}

impl fmt::Display for ConjClassSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.class_string())
    }
}

/// Parses the `"j:c,..."` cycle-count format.
pub fn parse_counts(s: &str) -> Result<BTreeMap<usize, usize>> {
    let mut out = BTreeMap::new();
    for item in s.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (j, c) = item
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("expected j:c, got {item:?}")))?;
        let j = usize::from_str(j.trim()).map_err(|e| Error::Parse(format!("{item:?}: {e}")))?;
        let c = usize::from_str(c.trim()).map_err(|e| Error::Parse(format!("{item:?}: {e}")))?;
        if out.insert(j, c).is_some() {
            return Err(Error::Parse(format!("cycle length {j} given twice")));
        }
    }
    if out.is_empty() {
        return Err(Error::Parse("empty cycle specification".into()));
    }
    Ok(out)
}

pub fn format_counts(counts: &BTreeMap<usize, usize>) -> String {
    counts
        .iter()
        .map(|(j, c)| format!("{j}:{c}"))
        .collect::<Vec<_>>()
        .join(",")
}

/// Draws uniform class elements as ordered point sequences.
///
/// The first `k` entries of a partial Fisher–Yates shuffle fill the cycle
/// slots smallest length first. The scratch array is restored after every
/// draw so a draw costs `O(k)` rather than `O(n)`.
#[derive(Clone, Debug)]
pub struct ClassSampler {
    lengths: Vec<usize>,
    scratch: Vec<u32>,
    swaps: Vec<u32>,
    points: Vec<u32>,
}

impl ClassSampler {
    pub fn new(spec: &ConjClassSpec) -> Self {
        let k = spec.size();
        ClassSampler {
            lengths: spec.lengths_ascending(),
            scratch: (0..spec.n() as u32).collect(),
            swaps: Vec::with_capacity(k),
            points: Vec::with_capacity(k),
        }
    }

    pub fn lengths(&self) -> &[usize] {
        &self.lengths
    }

    /// Uniformly ordered distinct points, cycles laid out consecutively.
    pub fn sample_points<R: Rng + ?Sized>(&mut self, rng: &mut R) -> &[u32] {
        let n = self.scratch.len();
        let k: usize = self.lengths.iter().sum();
        self.swaps.clear();
        self.points.clear();
        for i in 0..k {
            let r = rng.random_range(i..n);
            self.scratch.swap(i, r);
            self.swaps.push(r as u32);
            self.points.push(self.scratch[i]);
        }
        for i in (0..k).rev() {
            self.scratch.swap(i, self.swaps[i] as usize);
        }
        &self.points
    }

    /// Right-multiplies `perm` by a fresh uniform class element.
    pub fn step<R: Rng + ?Sized>(&mut self, perm: &mut Permutation, rng: &mut R) {
        self.sample_points(rng);
        let mut start = 0;
        for &len in &self.lengths {
            perm.mul_cycle(&self.points[start..start + len]);
            start += len;
        }
    }

    pub fn sample<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Permutation {
        let mut p = Permutation::identity(self.scratch.len());
        self.step(&mut p, rng);
        p
    }
}

/// A uniform element of the class.
pub fn sample_conjugacy<R: Rng + ?Sized>(spec: &ConjClassSpec, rng: &mut R) -> Permutation {
    ClassSampler::new(spec).sample(rng)
}

/// Every element of the class, for exhaustive work at small `n`.
pub fn class_elements(spec: &ConjClassSpec, limit: usize) -> Result<Vec<Permutation>> {
    let size = class_size(&spec.cycle_type());
    if size > BigUint::from(limit) {
        return Err(Error::Resource(format!(
            "class {} of S_{} has {size} elements (limit {limit})",
            spec,
            spec.n()
        )));
    }
    let n = spec.n();
    let mut remaining: BTreeMap<usize, usize> = spec.cycles().clone();
    let fixed = n - spec.size();
    if fixed > 0 {
        remaining.insert(1, fixed);
    }
    let mut out = Vec::new();
    let mut images: Vec<u32> = (0..n as u32).collect();
    let mut used = vec![false; n];
    enumerate_rec(&mut remaining, &mut images, &mut used, &mut out);
    Ok(out)
}

fn enumerate_rec(
    remaining: &mut BTreeMap<usize, usize>,
    images: &mut Vec<u32>,
    used: &mut Vec<bool>,
    out: &mut Vec<Permutation>,
) {
    let Some(first) = used.iter().position(|&u| !u) else {
        out.push(Permutation {
            images: images.clone(),
        });
        return;
    };
    let lens: Vec<usize> = remaining
        .iter()
        .filter(|(_, &c)| c > 0)
        .map(|(&j, _)| j)
        .collect();
    for len in lens {
        *remaining.get_mut(&len).unwrap() -= 1;
        used[first] = true;
        let mut cycle = vec![first as u32];
        extend_cycle(len, &mut cycle, remaining, images, used, out);
        used[first] = false;
        *remaining.get_mut(&len).unwrap() += 1;
    }
}

fn extend_cycle(
    len: usize,
    cycle: &mut Vec<u32>,
    remaining: &mut BTreeMap<usize, usize>,
    images: &mut Vec<u32>,
    used: &mut Vec<bool>,
    out: &mut Vec<Permutation>,
) {
    if cycle.len() == len {
        for (i, &x) in cycle.iter().enumerate() {
            images[x as usize] = cycle[(i + 1) % len];
        }
        enumerate_rec(remaining, images, used, out);
        for &x in cycle.iter() {
            images[x as usize] = x;
        }
        return;
    }
    for p in 0..used.len() {
        if used[p] {
            continue;
        }
        used[p] = true;
        cycle.push(p as u32);
        extend_cycle(len, cycle, remaining, images, used, out);
        cycle.pop();
        used[p] = false;
    }
}

/// Every permutation of `S_n`, lexicographic by image table.
pub fn all_permutations(n: usize) -> Vec<Permutation> {
    fn rec(prefix: &mut Vec<u32>, used: &mut Vec<bool>, out: &mut Vec<Permutation>) {
        let n = used.len();
        if prefix.len() == n {
            out.push(Permutation {
                images: prefix.clone(),
            });
            return;
        }
        for v in 0..n {
            if !used[v] {
                used[v] = true;
                prefix.push(v as u32);
                rec(prefix, used, out);
                prefix.pop();
                used[v] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::with_capacity(n), &mut vec![false; n], &mut out);
    out
}

/// Two independent uniform transpositions conditioned on disjoint support,
/// as 0-based point pairs.
pub fn disjoint_transposition_pair<R: Rng + ?Sized>(n: usize, rng: &mut R) -> [(usize, usize); 2] {
    assert!(n >= 4, "two disjoint transpositions need n >= 4");
    loop {
        let a = rng.random_range(0..n);
        let b = rng.random_range(0..n - 1);
        let b = if b >= a { b + 1 } else { b };
        let c = rng.random_range(0..n);
        let d = rng.random_range(0..n - 1);
        let d = if d >= c { d + 1 } else { d };
        if c != a && c != b && d != a && d != b {
            return [(a, b), (c, d)];
        }
    }
}

/// Uniform transposition as a 0-based point pair.
pub fn uniform_transposition<R: Rng + ?Sized>(n: usize, rng: &mut R) -> (usize, usize) {
    let a = rng.random_range(0..n);
    let b = rng.random_range(0..n - 1);
    (a, if b >= a { b + 1 } else { b })
}
