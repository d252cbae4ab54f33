use std::ffi::{c_char, CStr, CString};
use std::ptr;

use permix_ffi::*;

fn last_error() -> String {
    let mut buf = vec![0 as c_char; 256];
    let len = unsafe { permix_last_error_message(buf.as_mut_ptr(), buf.len()) };
    let msg = unsafe { CStr::from_ptr(buf.as_ptr()) }.to_string_lossy().into_owned();
    assert_eq!(msg.len(), len.min(255));
    msg
}

fn cstr(s: &str) -> CString {
    CString::new(s).unwrap()
}

#[test]
fn walk_lifecycle() {
    let class = cstr("2:1");
    let mut walk: *mut PermixWalk = ptr::null_mut();
    assert_eq!(unsafe { permix_walk_new(6, class.as_ptr(), 3, &mut walk) }, PermixStatus::Ok);
    assert!(!walk.is_null());
    assert_eq!(unsafe { permix_walk_n(walk) }, 6);

    let mut images = [0u32; 6];
    assert_eq!(unsafe { permix_walk_images(walk, images.as_mut_ptr(), 6) }, PermixStatus::Ok);
    assert_eq!(images, [1, 2, 3, 4, 5, 6]);

    assert_eq!(unsafe { permix_walk_step(walk, 1) }, PermixStatus::Ok);
    let mut cycles = 0usize;
    assert_eq!(unsafe { permix_walk_cycle_count(walk, &mut cycles) }, PermixStatus::Ok);
    assert_eq!(cycles, 5);
    assert_eq!(unsafe { permix_walk_step(walk, 9) }, PermixStatus::Ok);
    assert_eq!(unsafe { permix_walk_steps(walk) }, 10);
    assert_eq!(unsafe { permix_walk_images(walk, images.as_mut_ptr(), 6) }, PermixStatus::Ok);
    let mut sorted = images;
    sorted.sort_unstable();
    assert_eq!(sorted, [1, 2, 3, 4, 5, 6]);

    assert_eq!(unsafe { permix_walk_images(walk, images.as_mut_ptr(), 5) }, PermixStatus::InvalidArgument);
    assert!(last_error().contains("5 entries"));
    unsafe { permix_walk_free(walk) };
    unsafe { permix_walk_free(ptr::null_mut()) };
}

#[test]
fn walks_with_equal_seeds_agree() {
    let class = cstr("3:1");
    let run = |seed| {
        let mut walk: *mut PermixWalk = ptr::null_mut();
        assert_eq!(unsafe { permix_walk_new(20, class.as_ptr(), seed, &mut walk) }, PermixStatus::Ok);
        assert_eq!(unsafe { permix_walk_step(walk, 50) }, PermixStatus::Ok);
        let mut images = [0u32; 20];
        assert_eq!(unsafe { permix_walk_images(walk, images.as_mut_ptr(), 20) }, PermixStatus::Ok);
        unsafe { permix_walk_free(walk) };
        images
    };
    assert_eq!(run(5), run(5));
    assert_ne!(run(5), run(6));
}

#[test]
fn error_codes() {
    let mut walk: *mut PermixWalk = ptr::null_mut();
    let bad = cstr("7:1");
    assert_eq!(unsafe { permix_walk_new(5, bad.as_ptr(), 1, &mut walk) }, PermixStatus::Infeasible);
    assert!(walk.is_null());
    assert!(!last_error().is_empty());
    let garbage = cstr("two");
    assert_eq!(unsafe { permix_walk_new(5, garbage.as_ptr(), 1, &mut walk) }, PermixStatus::InvalidArgument);
    assert_eq!(unsafe { permix_walk_new(5, ptr::null(), 1, &mut walk) }, PermixStatus::NullPointer);
    let ok = cstr("2:1");
    assert_eq!(unsafe { permix_walk_new(5, ok.as_ptr(), 1, ptr::null_mut()) }, PermixStatus::NullPointer);
    assert_eq!(unsafe { permix_walk_step(ptr::null_mut(), 1) }, PermixStatus::NullPointer);
    assert_eq!(unsafe { permix_walk_n(ptr::null()) }, 0);

    let mut coset = [0.0f64; 3];
    let mut pois = [0.0f64; 3];
    assert_eq!(
        unsafe { permix_tv_profile(60, ok.as_ptr(), 2, coset.as_mut_ptr(), pois.as_mut_ptr(), 3) },
        PermixStatus::Resource
    );
    let mut th = 0.0;
    assert_eq!(unsafe { permix_theta(ok.as_ptr(), -1.0, &mut th, ptr::null_mut()) }, PermixStatus::InvalidArgument);
    assert_eq!(unsafe { permix_theta(ok.as_ptr(), 2.0, &mut th, ptr::null_mut()) }, PermixStatus::Ok);
    assert_eq!(last_error(), "");
}

#[test]
fn theta_values() {
    let class = cstr("2:1");
    let (mut th, mut res) = (0.0, 1.0);
    assert_eq!(unsafe { permix_theta(class.as_ptr(), 2.0, &mut th, &mut res) }, PermixStatus::Ok);
    assert!((th - 0.796_812_1).abs() < 1e-7);
    assert!(res <= 1e-12);
    assert_eq!(unsafe { permix_theta(class.as_ptr(), 1.0, &mut th, &mut res) }, PermixStatus::Ok);
    assert_eq!(th, 0.0);
    let three = cstr("3:1");
    assert_eq!(unsafe { permix_theta(three.as_ptr(), 0.5, &mut th, ptr::null_mut()) }, PermixStatus::Ok);
    assert_eq!(th, 0.0);
}

#[test]
fn tv_profile_of_three_points() {
    let class = cstr("2:1");
    let mut coset = [0.0f64; 4];
    let mut pois = [0.0f64; 4];
    assert_eq!(
        unsafe { permix_tv_profile(3, class.as_ptr(), 3, coset.as_mut_ptr(), pois.as_mut_ptr(), 4) },
        PermixStatus::Ok
    );
    assert!((coset[0] - 2.0 / 3.0).abs() < 1e-15);
    assert_eq!(coset[2], 0.0);
    assert!(pois.iter().all(|&p| (0.0..=1.0).contains(&p)));
    assert_eq!(
        unsafe { permix_tv_profile(3, class.as_ptr(), 3, coset.as_mut_ptr(), pois.as_mut_ptr(), 3) },
        PermixStatus::InvalidArgument
    );
}

#[test]
fn giant_fraction_tracks_theta() {
    let class = cstr("2:1");
    let mut frac = 0.0;
    assert_eq!(unsafe { permix_giant_fraction(50_000, class.as_ptr(), 2.0, 9, &mut frac) }, PermixStatus::Ok);
    assert!((frac - 0.796_812_1).abs() < 0.02, "{frac}");
    assert_eq!(unsafe { permix_giant_fraction(50_000, class.as_ptr(), 0.5, 9, &mut frac) }, PermixStatus::Ok);
    assert!(frac < 0.01);
    assert_eq!(
        unsafe { permix_giant_fraction(100, class.as_ptr(), f64::NAN, 9, &mut frac) },
        PermixStatus::InvalidArgument
    );
}

#[test]
fn version_string() {
    let v = unsafe { CStr::from_ptr(permix_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}
