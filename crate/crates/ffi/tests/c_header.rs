//! Compiles a C program against the generated header and the static
//! library, then runs it.

use std::path::{Path, PathBuf};
use std::process::Command;

fn staticlib() -> PathBuf {
    // target/tmp -> target/<profile>/libpermix_ffi.a
    let tmp = Path::new(env!("CARGO_TARGET_TMPDIR"));
    let target = tmp.parent().unwrap();
    for profile in ["debug", "release"] {
        let lib = target.join(profile).join("libpermix_ffi.a");
        if lib.exists() {
            return lib;
        }
    }
    panic!("libpermix_ffi.a not found under {}", target.display());
}

#[test]
fn header_declares_the_api() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/permix.h")).unwrap();
    for name in [
        "PERMIX_STATUS_OK = 0",
        "typedef struct PermixWalk PermixWalk",
        "permix_walk_new(",
        "permix_walk_step(",
        "permix_walk_images(",
        "permix_walk_free(",
        "permix_theta(",
        "permix_tv_profile(",
        "permix_giant_fraction(",
        "permix_last_error_message(",
    ] {
        assert!(header.contains(name), "missing {name}");
    }
}

#[test]
fn c_program_links_and_runs() {
    let dir = tempfile::tempdir().unwrap();
    let exe = dir.path().join("smoke");
    let manifest = Path::new(env!("CARGO_MANIFEST_DIR"));
    let status = Command::new("cc")
        .arg(manifest.join("tests/c/smoke.c"))
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(staticlib())
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .expect("run cc");
    assert!(status.success());
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "exit {:?}", out.status.code());
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "0.7968121");
}
