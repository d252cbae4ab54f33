//! C ABI over `permix`.
//!
//! Every fallible function returns a [`PermixStatus`]; on failure the
//! message is kept per thread and can be read with
//! [`permix_last_error_message`]. Walks are opaque handles created by
//! [`permix_walk_new`] and released by [`permix_walk_free`]. Points are
//! 1-based at this boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};

use permix::class_chain::{build_transition, tv_profile};
use permix::hypergraph::{component_stats, hypergraph_from_walk, DEFAULT_BETA};
use permix::perm::ClassSampler;
use permix::seed::{rng_from_seed, SimRng};
use permix::theta::{theta, LimitProfile};
use permix::{ConjClassSpec, Error, Permutation};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PermixStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Infeasible = 3,
    Numeric = 4,
    Resource = 5,
    Panic = 6,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: impl Into<String>) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg.into());
}

struct Failure(PermixStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::InfeasibleClass { .. } => PermixStatus::Infeasible,
            Error::Resource(_) => PermixStatus::Resource,
            Error::NoConvergence { .. } | Error::UndefinedRatio(_) | Error::NoBound(_) => PermixStatus::Numeric,
            _ => PermixStatus::InvalidArgument,
        };
        Failure(status, e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(PermixStatus::NullPointer, format!("{what} is null"))
}

fn invalid(msg: impl Into<String>) -> Failure {
    Failure(PermixStatus::InvalidArgument, msg.into())
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> PermixStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            PermixStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            PermixStatus::Panic
        }
    }
}

/// # Safety
/// `s` must be null or a valid NUL-terminated string.
unsafe fn read_str<'a>(s: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if s.is_null() {
        return Err(null(what));
    }
    unsafe { CStr::from_ptr(s) }
        .to_str()
        .map_err(|_| invalid(format!("{what} is not UTF-8")))
}

/// Copies the last error message of this thread into `buf` (truncated and
/// NUL-terminated) and returns its full length in bytes, excluding the NUL.
/// Passing a null `buf` only returns the length.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn permix_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            unsafe {
                std::ptr::copy_nonoverlapping(msg.as_ptr().cast::<c_char>(), buf, n);
                *buf.add(n) = 0;
            }
        }
        msg.len()
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn permix_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// A walk driven by a conjugacy class, started at the identity.
pub struct PermixWalk {
    perm: Permutation,
    sampler: ClassSampler,
    rng: SimRng,
    steps: u64,
}

/// Creates a walk on `n` points for the class `"j:c,..."`.
///
/// # Safety
/// `class_spec` must be a valid NUL-terminated string and `out` a valid
/// pointer. The handle written to `*out` must be released with
/// [`permix_walk_free`].
#[no_mangle]
pub unsafe extern "C" fn permix_walk_new(
    n: usize,
    class_spec: *const c_char,
    seed: u64,
    out: *mut *mut PermixWalk,
) -> PermixStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let spec = ConjClassSpec::parse(n, unsafe { read_str(class_spec, "class_spec")? })?;
        let walk = PermixWalk {
            perm: Permutation::identity(n),
            sampler: ClassSampler::new(&spec),
            rng: rng_from_seed(seed),
            steps: 0,
        };
        unsafe { *out = Box::into_raw(Box::new(walk)) };
        Ok(())
    })
}

/// Advances the walk by `steps` steps.
///
/// # Safety
/// `walk` must be a live handle from [`permix_walk_new`].
#[no_mangle]
pub unsafe extern "C" fn permix_walk_step(walk: *mut PermixWalk, steps: u64) -> PermixStatus {
    guard(|| {
        let w = unsafe { walk.as_mut() }.ok_or_else(|| null("walk"))?;
        for _ in 0..steps {
            w.sampler.step(&mut w.perm, &mut w.rng);
        }
        w.steps += steps;
        Ok(())
    })
}

/// Number of points, or 0 for a null handle.
///
/// # Safety
/// `walk` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn permix_walk_n(walk: *const PermixWalk) -> usize {
    unsafe { walk.as_ref() }.map_or(0, |w| w.perm.n())
}

/// Steps taken so far, or 0 for a null handle.
///
/// # Safety
/// `walk` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn permix_walk_steps(walk: *const PermixWalk) -> u64 {
    unsafe { walk.as_ref() }.map_or(0, |w| w.steps)
}

/// Writes the 1-based images of the current permutation into `buf`, which
/// must hold exactly `n` entries.
///
/// # Safety
/// `walk` must be a live handle and `buf` must point to `len` writable
/// `uint32_t`.
#[no_mangle]
pub unsafe extern "C" fn permix_walk_images(walk: *const PermixWalk, buf: *mut u32, len: usize) -> PermixStatus {
    guard(|| {
        let w = unsafe { walk.as_ref() }.ok_or_else(|| null("walk"))?;
        if buf.is_null() {
            return Err(null("buf"));
        }
        let n = w.perm.n();
        if len != n {
            return Err(invalid(format!("buffer holds {len} entries, walk has {n} points")));
        }
        let out = unsafe { std::slice::from_raw_parts_mut(buf, len) };
        for (o, &i) in out.iter_mut().zip(w.perm.images()) {
            *o = i + 1;
        }
        Ok(())
    })
}

/// Number of cycles of the current permutation, fixed points included.
///
/// # Safety
/// `walk` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn permix_walk_cycle_count(walk: *const PermixWalk, out: *mut usize) -> PermixStatus {
    guard(|| {
        let w = unsafe { walk.as_ref() }.ok_or_else(|| null("walk"))?;
        let out = unsafe { out.as_mut() }.ok_or_else(|| null("out"))?;
        *out = w.perm.cycle_count();
        Ok(())
    })
}

/// Releases a walk. Null is ignored.
///
/// # Safety
/// `walk` must be null or a handle from [`permix_walk_new`] that has not
/// been freed.
#[no_mangle]
pub unsafe extern "C" fn permix_walk_free(walk: *mut PermixWalk) {
    if !walk.is_null() {
        drop(unsafe { Box::from_raw(walk) });
    }
}

/// The giant fraction `θ(c)` for the limit profile of `class_spec`, with the
/// solver residual.
///
/// # Safety
/// `class_spec` must be a valid NUL-terminated string; `theta_out` must be
/// valid; `residual_out` may be null.
#[no_mangle]
pub unsafe extern "C" fn permix_theta(
    class_spec: *const c_char,
    c: f64,
    theta_out: *mut f64,
    residual_out: *mut f64,
) -> PermixStatus {
    guard(|| {
        let profile = LimitProfile::from_class(unsafe { read_str(class_spec, "class_spec")? })?;
        let out = unsafe { theta_out.as_mut() }.ok_or_else(|| null("theta_out"))?;
        let r = theta(c, &profile)?;
        *out = r.theta;
        if let Some(res) = unsafe { residual_out.as_mut() } {
            *res = r.residual;
        }
        Ok(())
    })
}

/// Exact total-variation profile from the identity for `t = 0..=t_max`.
/// Both buffers must hold `t_max + 1` entries.
///
/// # Safety
/// `class_spec` must be a valid NUL-terminated string; `tv_coset` and
/// `tv_poissonized` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn permix_tv_profile(
    n: usize,
    class_spec: *const c_char,
    t_max: u64,
    tv_coset: *mut f64,
    tv_poissonized: *mut f64,
    len: usize,
) -> PermixStatus {
    guard(|| {
        let spec = ConjClassSpec::parse(n, unsafe { read_str(class_spec, "class_spec")? })?;
        if tv_coset.is_null() || tv_poissonized.is_null() {
            return Err(null("output buffer"));
        }
        if t_max.checked_add(1) != Some(len as u64) {
            return Err(invalid(format!("buffers hold {len} entries, need t_max + 1")));
        }
        let profile = tv_profile(&build_transition(&spec)?, t_max);
        let coset = unsafe { std::slice::from_raw_parts_mut(tv_coset, len) };
        let pois = unsafe { std::slice::from_raw_parts_mut(tv_poissonized, len) };
        for ((a, b), p) in coset.iter_mut().zip(pois.iter_mut()).zip(&profile) {
            *a = p.tv_coset;
            *b = p.tv_poissonized;
        }
        Ok(())
    })
}

/// Largest component of the hypergraph process after `⌊cn/k⌋` packets,
/// as a fraction of `n`.
///
/// # Safety
/// `class_spec` must be a valid NUL-terminated string and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn permix_giant_fraction(
    n: usize,
    class_spec: *const c_char,
    c: f64,
    seed: u64,
    out: *mut f64,
) -> PermixStatus {
    guard(|| {
        let spec = ConjClassSpec::parse(n, unsafe { read_str(class_spec, "class_spec")? })?;
        let out = unsafe { out.as_mut() }.ok_or_else(|| null("out"))?;
        if !(c >= 0.0 && c.is_finite()) {
            return Err(invalid(format!("c = {c} must be finite and non-negative")));
        }
        let s = (c * n as f64 / spec.size() as f64).floor() as usize;
        let h = hypergraph_from_walk(&spec, s, &mut rng_from_seed(seed));
        *out = component_stats(&h, DEFAULT_BETA).largest as f64 / n as f64;
        Ok(())
    })
}
