//! Compiles `examples/smoke.c` against `include/aitlab.h` and the built
//! shared library, then runs it. Skips quietly when no C compiler is on PATH.

use std::path::PathBuf;
use std::process::Command;

fn find_cc() -> Option<&'static str> {
    ["cc", "gcc", "clang"].into_iter().find(|cc| {
        Command::new(cc)
            .arg("--version")
            .output()
            .map(|out| out.status.success())
            .unwrap_or(false)
    })
}

/// target/<profile> directory, derived from this test binary's own path
/// (target/<profile>/deps/c_smoke-<hash>).
fn profile_dir() -> PathBuf {
    let mut dir = std::env::current_exe().unwrap();
    dir.pop();
    if dir.ends_with("deps") {
        dir.pop();
    }
    dir
}

#[test]
fn c_program_links_and_runs() {
    let Some(cc) = find_cc() else {
        eprintln!("skipping: no C compiler found");
        return;
    };
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let profile = profile_dir();
    let lib = profile.join("libaitlab_ffi.so");
    if !lib.exists() {
        // `cargo test` links tests against the rlib and may skip the cdylib;
        // produce it explicitly. The build lock is free while tests run.
        let mut build = Command::new(env!("CARGO"));
        build.args(["build", "-p", "aitlab-ffi", "--quiet"]);
        if profile.file_name().is_some_and(|name| name == "release") {
            build.arg("--release");
        }
        let output = build.output().unwrap();
        assert!(
            output.status.success(),
            "cargo build failed:\n{}",
            String::from_utf8_lossy(&output.stderr)
        );
    }
    assert!(lib.exists(), "cdylib not built at {}", lib.display());

    let binary = profile.join("aitlab_c_smoke");
    let compile = Command::new(cc)
        .arg(manifest.join("examples/smoke.c"))
        .arg("-I")
        .arg(manifest.join("include"))
        .arg("-L")
        .arg(&profile)
        .arg(format!("-Wl,-rpath,{}", profile.display()))
        .args([
            "-laitlab_ffi",
            "-lm",
            "-std=c99",
            "-Wall",
            "-Wextra",
            "-Werror",
            "-o",
        ])
        .arg(&binary)
        .output()
        .unwrap();
    assert!(
        compile.status.success(),
        "compile failed:\n{}",
        String::from_utf8_lossy(&compile.stderr)
    );

    let run = Command::new(&binary).output().unwrap();
    assert!(
        run.status.success(),
        "smoke binary failed:\nstdout: {}\nstderr: {}",
        String::from_utf8_lossy(&run.stdout),
        String::from_utf8_lossy(&run.stderr)
    );
    assert!(String::from_utf8_lossy(&run.stdout).contains("c smoke: ok"));
}
