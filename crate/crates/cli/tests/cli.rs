//! End-to-end checks of the command-line surface: file formats in, exact
//! rationals out, documented exit codes.

use std::path::PathBuf;
use std::process::{Command, Output};

fn riesz(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_riesz"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_temp(name: &str, contents: &str) -> PathBuf {
    let dir = std::env::temp_dir().join("riesz-cli-tests");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, contents).unwrap();
    path
}

fn stdout_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn integrate_prints_exact_rationals() {
    let file = write_temp(
        "integrate.txt",
        "space interval\nstep { [0/1,2/1): 2/1, [1/1,3/1): -1/1 }\n",
    );
    let out = riesz(&["integrate", file.to_str().unwrap()]);
    assert!(out.status.success());
    assert_eq!(stdout_of(&out), "2\n");

    let counting = write_temp(
        "integrate_counting.txt",
        "space counting\nstep { {a,b}: 3/1 }\n",
    );
    let out = riesz(&["integrate", counting.to_str().unwrap()]);
    assert_eq!(stdout_of(&out), "6\n");
}

#[test]
fn r1_ladder_with_declaration() {
    let file = write_temp("r1.txt", "space interval\nseq chi_prefix(0/1, ratio(1/1))\n");
    let out = riesz(&[
        "r1",
        file.to_str().unwrap(),
        "--budget",
        "50",
        "--declare",
        "1",
    ]);
    assert!(out.status.success());
    let text = stdout_of(&out);
    assert!(text.contains("partial[0] = 0"));
    assert!(text.contains("integral: 1 (declared)"));

    // declaring below a computed partial is rejected with a nonzero status
    let out = riesz(&[
        "r1",
        file.to_str().unwrap(),
        "--budget",
        "50",
        "--declare",
        "1/2",
    ]);
    assert!(!out.status.success());
}

#[test]
fn r2_certifies_differences() {
    let pos = write_temp("r2pos.txt", "space interval\nseq chi_prefix(0/1, ratio(1/1))\n");
    let neg = write_temp(
        "r2neg.txt",
        "space interval\nstep { [0/1,1/2): 1/1 }\ntail constant\n",
    );
    let out = riesz(&[
        "r2",
        "--pos",
        pos.to_str().unwrap(),
        "--neg",
        neg.to_str().unwrap(),
        "--declare-pos",
        "1",
    ]);
    assert!(out.status.success());
    let text = stdout_of(&out);
    assert!(text.contains("finite side: Both"));
    assert!(text.contains("integral: 1/2 (declared)"));
}

#[test]
fn beppo_levi_reports_the_ladder() {
    let file = write_temp("bl.txt", "space interval\nseq chi_prefix(0/1, ratio(1/1))\n");
    let out = riesz(&[
        "beppo-levi",
        file.to_str().unwrap(),
        "--horizon",
        "100",
        "--declare",
        "1",
    ]);
    assert!(out.status.success());
    let text = stdout_of(&out);
    assert!(text.contains("remainder partials stay at or below 1: yes"));
    assert!(text.contains("last-ladder gap 1/100"));
}

#[test]
fn fatou_and_dominated_tables() {
    let file = write_temp(
        "fatou.txt",
        "space interval\nseq scale_chi(invlinear(1/1), const(0/1), const(1/1))\n",
    );
    let out = riesz(&["fatou", file.to_str().unwrap(), "--horizon", "6"]);
    assert!(out.status.success());
    assert!(stdout_of(&out).contains("all rows ok: true"));

    let bound = write_temp("bound.txt", "space interval\nstep { [0/1,1/1): 1/1 }\n");
    let out = riesz(&[
        "dominated",
        file.to_str().unwrap(),
        "--bound",
        bound.to_str().unwrap(),
        "--horizon",
        "6",
    ]);
    assert!(out.status.success());
    assert!(stdout_of(&out).contains("all rows ok: true"));
}

#[test]
fn measure_and_sigma_ops() {
    let a = write_temp("seta.txt", "space interval\nset { [0/1,2/1) }\n");
    let b = write_temp("setb.txt", "space interval\nset { [1/1,3/1) }\n");
    let out = riesz(&["measure", a.to_str().unwrap()]);
    assert_eq!(stdout_of(&out), "2 (exact)\n");

    let out = riesz(&[
        "sigma-ops",
        "diff",
        a.to_str().unwrap(),
        b.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = stdout_of(&out);
    assert!(text.contains("[0, 1)"));
    assert!(text.contains("measure: 1 (exact)"));

    let out = riesz(&[
        "sigma-ops",
        "union",
        a.to_str().unwrap(),
        b.to_str().unwrap(),
    ]);
    // [0,2) and [1,3) overlap: the disjointness check must trip
    assert!(!out.status.success());

    let c = write_temp("setc.txt", "space interval\nset { [5/1,6/1) }\n");
    let out = riesz(&[
        "sigma-ops",
        "union",
        a.to_str().unwrap(),
        c.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(stdout_of(&out).contains("stage 1: measure 3"));
}

#[test]
fn fubini_on_files() {
    let file = write_temp(
        "fubini.txt",
        "space product(interval,counting)\nstep { [0/1,2/1) x {a,b}: 1/2 }\n",
    );
    let out = riesz(&[
        "fubini",
        file.to_str().unwrap(),
        "--spaces",
        "interval,counting",
    ]);
    assert!(out.status.success());
    let text = stdout_of(&out);
    assert!(text.contains("double integral:        2 (exact)"));
    assert!(text.contains("verdict: ExactEqual"));

    // mismatched --spaces is a usage error
    let out = riesz(&[
        "fubini",
        file.to_str().unwrap(),
        "--spaces",
        "interval,interval",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn counterexample_and_gallery_are_deterministic() {
    let a = riesz(&["fubini-counterexample", "--window", "5"]);
    let b = riesz(&["fubini-counterexample", "--window", "5"]);
    assert!(a.status.success());
    assert_eq!(stdout_of(&a), stdout_of(&b));
    assert!(stdout_of(&a).contains("iterated (x then y): 0"));

    let a = riesz(&["gallery", "weir-set", "--depth", "20"]);
    let b = riesz(&["gallery", "weir-set", "--depth", "20"]);
    assert!(a.status.success());
    assert_eq!(stdout_of(&a), stdout_of(&b));
    assert!(stdout_of(&a).contains("status: pass"));
}

#[test]
fn exit_codes_follow_the_contract() {
    // usage error: unknown subcommand
    let out = riesz(&["no-such-command"]);
    assert_eq!(out.status.code(), Some(2));
    // usage error: malformed file
    let bad = write_temp("bad.txt", "space interval\nstep { oops }\n");
    let out = riesz(&["integrate", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    // claim failure: unknown gallery id is reported as an error
    let out = riesz(&["gallery", "nope"]);
    assert_eq!(out.status.code(), Some(1));
    // success
    let ok = write_temp("ok.txt", "space interval\nstep { [0/1,1/1): 1/1 }\n");
    let out = riesz(&["integrate", ok.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn budget_env_variable_is_honored() {
    let file = write_temp("env.txt", "space interval\nseq chi_prefix(0/1, ratio(1/1))\n");
    let out = Command::new(env!("CARGO_BIN_EXE_riesz"))
        .args(["r1", file.to_str().unwrap()])
        .env("RIESZ_BUDGET", "10")
        .output()
        .expect("binary runs");
    assert!(out.status.success());
    assert!(stdout_of(&out).contains("partial[9] = 9/10"));
}
