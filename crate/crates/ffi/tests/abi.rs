use std::ffi::CStr;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use bayesvote_ffi::*;

const BORDA3: [u64; 3] = [2, 1, 0];

fn last_error() -> String {
    let p = bv_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn solve_and_read_back() {
    // Two samples; only the first can be won with two manipulators.
    let scores = [1u64, 3, 2, 0, 6, 0];
    let mut res = ptr::null_mut();
    let status = unsafe {
        bv_solve(
            BORDA3.as_ptr(),
            3,
            scores.as_ptr(),
            2,
            3,
            2,
            0,
            0.0,
            &mut res,
        )
    };
    assert_eq!(status, BvStatus::Ok);
    assert!(bv_last_error_message().is_null());
    unsafe {
        assert_eq!(bv_solve_result_objective(res), 1);
        assert_eq!(bv_solve_result_samples(res), 2);
        assert!(bv_solve_result_optimal(res));
        assert_eq!(bv_solve_result_win_probability(res), 0.5);

        let mut psm = [0u32; 9];
        assert_eq!(
            bv_solve_result_strategy(res, psm.as_mut_ptr(), 9),
            BvStatus::Ok
        );
        assert_eq!(&psm[..3], &[2, 0, 0]);
        for j in 0..3 {
            assert_eq!(psm[j] + psm[3 + j] + psm[6 + j], 2);
        }

        let mut ballots = [9u32; 6];
        assert_eq!(
            bv_solve_result_ballots(res, ballots.as_mut_ptr(), 6),
            BvStatus::Ok
        );
        for vote in ballots.chunks(3) {
            let mut sorted = vote.to_vec();
            sorted.sort();
            assert_eq!(sorted, [0, 1, 2]);
            assert_eq!(vote[0], 0);
        }
        bv_solve_result_free(res);
    }
}

#[test]
fn errors_set_status_and_message() {
    let scores = [1u64, 3, 2];
    let mut res = ptr::null_mut();
    let status = unsafe {
        bv_solve(
            BORDA3.as_ptr(),
            3,
            scores.as_ptr(),
            1,
            2,
            2,
            5,
            0.0,
            &mut res,
        )
    };
    assert_eq!(status, BvStatus::InvalidInput);
    assert!(res.is_null());
    assert!(!last_error().is_empty());

    let status = unsafe { bv_solve(ptr::null(), 3, scores.as_ptr(), 1, 2, 2, 0, 0.0, &mut res) };
    assert_eq!(status, BvStatus::NullPointer);
    assert!(last_error().contains("alpha"));

    let status = unsafe {
        bv_solve(
            BORDA3.as_ptr(),
            3,
            scores.as_ptr(),
            1,
            2,
            2,
            0,
            0.0,
            ptr::null_mut(),
        )
    };
    assert_eq!(status, BvStatus::NullPointer);

    // A sincere total above n * alpha1 is impossible.
    let bad = [100u64, 0, 0];
    let status = unsafe { bv_solve(BORDA3.as_ptr(), 3, bad.as_ptr(), 1, 2, 2, 0, 0.0, &mut res) };
    assert_eq!(status, BvStatus::InvalidInput);
}

#[test]
fn null_handles_are_harmless() {
    unsafe {
        bv_solve_result_free(ptr::null_mut());
        assert_eq!(bv_solve_result_objective(ptr::null()), 0);
        assert!(bv_solve_result_win_probability(ptr::null()).is_nan());
        assert!(!bv_solve_result_optimal(ptr::null()));
        let mut buf = [0u32; 9];
        assert_eq!(
            bv_solve_result_strategy(ptr::null(), buf.as_mut_ptr(), 9),
            BvStatus::NullPointer
        );
    }
}

#[test]
fn recover_ballots_from_matrix() {
    let psm = [2u32, 1, 0, 1, 1, 1, 0, 1, 2];
    let mut out = [0u32; 9];
    unsafe {
        assert_eq!(
            bv_recover_ballots(psm.as_ptr(), 3, 3, out.as_mut_ptr(), 9),
            BvStatus::Ok
        );
        let mut counts = [0u32; 9];
        for vote in out.chunks(3) {
            for (pos, &cand) in vote.iter().enumerate() {
                counts[cand as usize * 3 + pos] += 1;
            }
        }
        assert_eq!(counts, psm);

        assert_eq!(
            bv_recover_ballots(psm.as_ptr(), 3, 3, out.as_mut_ptr(), 8),
            BvStatus::BufferTooSmall
        );
        let uneven = [2u32, 1, 0, 1, 1, 1, 0, 1, 1];
        assert_eq!(
            bv_recover_ballots(uneven.as_ptr(), 3, 3, out.as_mut_ptr(), 9),
            BvStatus::InvalidPsm
        );
    }
}

#[test]
fn regret_of_a_flip() {
    // Sincere: 0 > 1 > 2 twice, 2 > 0 > 1 once; Borda winner 0 with 5.
    let votes = [0u32, 1, 2, 0, 1, 2, 2, 0, 1];
    let coalition = [2u32, 1, 0, 2, 1, 0];
    let mut regret = 0;
    let status = unsafe {
        bv_regret(
            BORDA3.as_ptr(),
            3,
            votes.as_ptr(),
            3,
            coalition.as_ptr(),
            2,
            2,
            &mut regret,
        )
    };
    assert_eq!(status, BvStatus::Ok);
    // Candidate 2 reaches 6 > 5 and had 2 sincere points.
    assert_eq!(regret, 3);

    let not_a_ranking = [0u32, 0, 2, 0, 1, 2, 2, 0, 1];
    let status = unsafe {
        bv_regret(
            BORDA3.as_ptr(),
            3,
            not_a_ranking.as_ptr(),
            3,
            coalition.as_ptr(),
            2,
            2,
            &mut regret,
        )
    };
    assert_eq!(status, BvStatus::InvalidInput);
}

#[test]
fn complexity_and_version() {
    let mut t = 0;
    assert_eq!(
        unsafe { bv_sample_complexity_kapproval(2, 1, 3, 0.1, 0.05, &mut t) },
        BvStatus::Ok
    );
    assert_eq!(t, 214_580);
    assert_eq!(
        unsafe { bv_sample_complexity_kapproval(2, 3, 3, 0.1, 0.05, &mut t) },
        BvStatus::InvalidInput
    );
    let v = unsafe { CStr::from_ptr(bv_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

fn manifest() -> &'static Path {
    Path::new(env!("CARGO_MANIFEST_DIR"))
}

#[test]
fn header_declares_every_export() {
    let header = std::fs::read_to_string(manifest().join("include/bayesvote.h")).unwrap();
    let source = std::fs::read_to_string(manifest().join("src/lib.rs")).unwrap();
    let exports: Vec<&str> = source
        .lines()
        .filter_map(|l| l.split("extern \"C\" fn ").nth(1))
        .map(|rest| rest.split('(').next().unwrap())
        .collect();
    assert!(exports.len() >= 10);
    for name in exports {
        assert!(
            header.contains(&format!("{name}(")),
            "{name} missing from header"
        );
    }
    assert!(header.contains("typedef struct BvSolveResult BvSolveResult;"));
}

/// Builds the static library into its own target directory, so the outer
/// cargo lock is never contended.
fn static_library() -> PathBuf {
    let exe = std::env::current_exe().unwrap();
    let target = exe.ancestors().nth(3).unwrap().join("c-abi-check");
    let cargo = option_env!("CARGO").unwrap_or("cargo");
    let status = Command::new(cargo)
        .args([
            "build",
            "--quiet",
            "--lib",
            "-p",
            "bayesvote-ffi",
            "--manifest-path",
        ])
        .arg(manifest().join("Cargo.toml"))
        .env("CARGO_TARGET_DIR", &target)
        .status()
        .unwrap();
    assert!(status.success(), "building the static library failed");
    target.join("debug").join("libbayesvote_ffi.a")
}

#[test]
fn c_program_links_against_static_library() {
    let lib = static_library();
    let compiler = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    if Command::new(&compiler).arg("--version").output().is_err() {
        eprintln!("no C compiler `{compiler}`; skipping");
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let exe = dir.path().join("smoke");
    let build = Command::new(&compiler)
        .arg(manifest().join("tests/c/smoke.c"))
        .arg("-I")
        .arg(manifest().join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .output()
        .unwrap();
    assert!(
        build.status.success(),
        "{}",
        String::from_utf8_lossy(&build.stderr)
    );
    let run = Command::new(&exe).output().unwrap();
    assert!(
        run.status.success(),
        "{}",
        String::from_utf8_lossy(&run.stderr)
    );
    assert!(String::from_utf8_lossy(&run.stdout).starts_with("ok "));
}
