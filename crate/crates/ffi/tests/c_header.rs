//! Compiles `tests/c/smoke.c` against the generated header and links it to
//! the static library, then runs it.

use std::path::PathBuf;
use std::process::Command;

#[test]
fn c_program_builds_and_runs_against_the_header() {
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    // Integration test binaries live in `<target>/<profile>/deps` next to
    // the freshly built static library. The copy one level up is only
    // refreshed by `cargo build`, so it may be stale here.
    let exe = std::env::current_exe().unwrap();
    let lib = exe.parent().unwrap().join("libfusetrack_ffi.a");
    assert!(lib.exists(), "static library not found at {}", lib.display());

    let dir = tempfile::tempdir().unwrap();
    let bin = dir.path().join("smoke");
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    let status = Command::new(&cc)
        .args(["-std=c99", "-Wall", "-Werror", "-o"])
        .arg(&bin)
        .arg(manifest.join("tests/c/smoke.c"))
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm"])
        .status()
        .expect("C compiler not runnable");
    assert!(status.success(), "C compilation failed");

    let out = Command::new(&bin).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("ok "));
}
