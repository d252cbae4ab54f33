//! The generating function `Ψ(x, c)`, the critical value `c_Γ`, the giant
//! fraction `θ(c)` and the mixing-time scale.
//!
//! `θ(c)` is the largest root in `[0, 1]` of `θ = 1 − Ψ(θ, c)`. Internally
//! the solver works with the complement `q = 1 − θ`, which is what stays
//! accurate when `θ` is within machine precision of 1.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::perm::ConjClassSpec;

/// Tolerance used when deciding whether a profile has full mass.
pub const MASS_TOL: f64 = 1e-12;
/// Required fixed-point residual `|1 − Ψ(θ, c) − θ|`.
pub const RESIDUAL_TOL: f64 = 1e-12;
/// Fixed-point iteration cap before falling back to bisection.
pub const MAX_ITERATIONS: usize = 1_000_000;

/// Limit cycle profile `k'_j`: the fraction of moved points lying in
/// `j`-cycles.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LimitProfile {
    kprime: BTreeMap<usize, f64>,
}

impl LimitProfile {
    pub fn new(kprime: BTreeMap<usize, f64>) -> Result<Self> {
        for (&j, &v) in &kprime {
            if j < 2 {
                return Err(Error::InvalidClass(format!("profile entry for j = {j} < 2")));
            }
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Domain {
                    value: v,
                    domain: "[0, 1]",
                });
            }
        }
        let kprime: BTreeMap<usize, f64> = kprime.into_iter().filter(|&(_, v)| v > 0.0).collect();
        let mass: f64 = kprime.values().sum();
        if mass > 1.0 + MASS_TOL {
            return Err(Error::Domain {
                value: mass,
                domain: "profile mass <= 1",
            });
        }
        Ok(LimitProfile { kprime })
    }

    pub fn transpositions() -> Self {
        LimitProfile {
            kprime: BTreeMap::from([(2, 1.0)]),
        }
    }

    pub fn k_cycles(k: usize) -> Result<Self> {
        Self::new(BTreeMap::from([(k, 1.0)]))
    }

    /// The profile of a fixed class `"j:c,..."` as the ground set grows.
    pub fn from_class(class: &str) -> Result<Self> {
        let counts = crate::perm::parse_counts(class)?;
        let support = counts.iter().map(|(j, c)| j * c).sum();
        Ok(limit_profile(&ConjClassSpec::new(support, counts)?))
    }

    /// Parses `"j:v,..."` with real weights.
    pub fn parse(s: &str) -> Result<Self> {
        let mut out = BTreeMap::new();
        for item in s.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (j, v) = item
                .split_once(':')
                .ok_or_else(|| Error::Parse(format!("expected j:v, got {item:?}")))?;
            let j: usize = j.trim().parse().map_err(|e| Error::Parse(format!("{item:?}: {e}")))?;
            let v: f64 = v.trim().parse().map_err(|e| Error::Parse(format!("{item:?}: {e}")))?;
            out.insert(j, v);
        }
        Self::new(out)
    }

    pub fn kprime(&self) -> &BTreeMap<usize, f64> {
        &self.kprime
    }

    pub fn get(&self, j: usize) -> f64 {
        self.kprime.get(&j).copied().unwrap_or(0.0)
    }

    pub fn mass(&self) -> f64 {
        self.kprime.values().sum()
    }

    pub fn is_full(&self) -> bool {
        (self.mass() - 1.0).abs() <= MASS_TOL
    }

    /// `Σ_j k'_j q^{j−1}`.
    fn series(&self, q: f64) -> f64 {
        self.kprime.iter().map(|(&j, &v)| v * q.powi(j as i32 - 1)).sum()
    }
}

/// `Ψ(x, c) = exp(−c (1 − Σ_j k'_j (1 − x)^{j−1}))`.
pub fn psi(x: f64, c: f64, p: &LimitProfile) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Domain {
            value: x,
            domain: "[0, 1]",
        });
    }
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::Domain {
            value: c,
            domain: "(0, inf)",
        });
    }
    Ok(psi_at_complement(1.0 - x, c, p))
}

/// `Ψ(1 − q, c)`.
fn psi_at_complement(q: f64, c: f64, p: &LimitProfile) -> f64 {
    (-c * (1.0 - p.series(q))).exp()
}

/// `(Σ (j−1) k'_j)^{-1}` for a full profile, 0 otherwise.
pub fn c_gamma(p: &LimitProfile) -> f64 {
    if !p.is_full() {
        return 0.0;
    }
    let excess: f64 = p.kprime.iter().map(|(&j, &v)| (j - 1) as f64 * v).sum();
    1.0 / excess
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThetaResult {
    pub c: f64,
    pub theta: f64,
    /// `1 − θ`, computed directly rather than by subtraction.
    pub complement: f64,
    pub iterations: usize,
    pub residual: f64,
}

/// The giant fraction: the unique root of `θ = 1 − Ψ(θ, c)` in `(0, 1)` above
/// `c_Γ`, and exactly 0 at or below it.
pub fn theta(c: f64, p: &LimitProfile) -> Result<ThetaResult> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::Domain {
            value: c,
            domain: "(0, inf)",
        });
    }
    let h = |q: f64| q - psi_at_complement(q, c, p);
    if c <= c_gamma(p) {
        return Ok(ThetaResult {
            c,
            theta: 0.0,
            complement: 1.0,
            iterations: 0,
            residual: h(1.0).abs(),
        });
    }

    // From q = 0 the iteration q ← Ψ(1 − q, c) increases monotonically to the
    // smallest root, i.e. to the largest θ.
    let mut q = 0.0f64;
    let mut iterations = 0;
    let mut converged = false;
    while iterations < MAX_ITERATIONS {
        let next = psi_at_complement(q, c, p);
        iterations += 1;
        if (next - q).abs() <= 1e-17_f64.max(f64::EPSILON * next * 0.5) {
            q = next;
            converged = true;
            break;
        }
        q = next;
    }

    if !converged || h(q).abs() > RESIDUAL_TOL {
        q = bisect_complement(q, &h, &mut iterations);
    }
    let residual = h(q).abs();
    if residual > RESIDUAL_TOL {
        return Err(Error::NoConvergence {
            iterations,
            residual,
        });
    }
    Ok(ThetaResult {
        c,
        theta: 1.0 - q,
        complement: q,
        iterations,
        residual,
    })
}

/// Bisection on `h(q) = q − Ψ(1 − q, c)`; `lo` satisfies `h(lo) <= 0`.
fn bisect_complement(mut lo: f64, h: &impl Fn(f64) -> f64, iterations: &mut usize) -> f64 {
    let mut hi = 0.5 * (lo + 1.0);
    while h(hi) <= 0.0 && hi < 1.0 {
        lo = hi;
        hi = 0.5 * (hi + 1.0);
        *iterations += 1;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if h(mid) <= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        *iterations += 1;
    }
    if h(lo).abs() <= h(hi).abs() {
        lo
    } else {
        hi
    }
}

/// `k'_j = j·k_j / |Γ|` for a single class.
pub fn limit_profile(spec: &ConjClassSpec) -> LimitProfile {
    let k = spec.size() as f64;
    LimitProfile {
        kprime: spec
            .cycles()
            .iter()
            .map(|(&j, &kj)| (j, (j * kj) as f64 / k))
            .collect(),
    }
}

/// `n ln n / |Γ|`.
pub fn mixing_time(spec: &ConjClassSpec) -> f64 {
    let n = spec.n() as f64;
    n * n.ln() / spec.size() as f64
}

/// `c / ln(1 − θ(c)^4)`, which tends to −1 as `c → ∞`.
pub fn log_theta_ratio(c: f64, p: &LimitProfile) -> Result<f64> {
    let res = theta(c, p)?;
    if res.theta == 0.0 {
        return Err(Error::UndefinedRatio("theta(c) = 0 at or below c_gamma"));
    }
    // 1 − (1 − q)^4 = q (4 − 6q + 4q² − q³)
    let q = res.complement;
    let log = q.ln() + (4.0 - 6.0 * q + 4.0 * q * q - q * q * q).ln();
    Ok(c / log)
}
