use grassb::fock::{evolve_exact, expectation, FockOperator};
use grassb::model::ModelSpec;
use grassb_cli::*;
use proptest::prelude::*;
use std::path::{Path, PathBuf};
use std::process::Command;

fn models() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../models")
}

fn grassb(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_grassb")).args(args).output().unwrap()
}

fn table(mode: Mode, model: &str) -> ResultTable {
    let mut cfg = RunConfig::new(mode);
    cfg.model = Some(models().join(model));
    simulate(&cfg).unwrap()
}

fn strip_timestamp(s: &str) -> String {
    s.lines().filter(|l| !l.contains("timestamp")).collect::<Vec<_>>().join("\n")
}

#[test]
fn exact_free_dimer_follows_cos_squared() {
    let t = table(Mode::Exact, "free_dimer.toml");
    let n1: Vec<&Row> = t.rows.iter().filter(|r| r.observable == "n1").collect();
    assert_eq!(n1.len(), 21);
    for r in n1 {
        assert!((r.mean_re - r.t.cos().powi(2)).abs() <= 1e-10, "t={}", r.t);
        assert!(r.mean_im.abs() <= 1e-10);
    }
}

#[test]
fn hubbard_model_file_matches_builtin_model() {
    let t = table(Mode::Exact, "hubbard_dimer.toml");
    let times = vec![0.0, 0.2, 0.4, 0.6, 0.8, 1.0];
    let spec = ModelSpec::hubbard_dimer(1.0, 1.0, times.clone());
    let rhos = evolve_exact(&spec, &spec.initial_density()).unwrap();
    for (k, rho) in rhos.iter().enumerate() {
        for j in 0..4 {
            let want = expectation(rho, &FockOperator::number(4, j)).unwrap().re;
            let row = &t.rows[4 * k + j];
            assert_eq!(row.observable, format!("n{}", j + 1));
            assert!((row.mean_re - want).abs() < 1e-12);
        }
    }
}

#[test]
fn exact_and_b_master_agree() {
    let a = table(Mode::Exact, "hubbard_dimer.toml");
    let b = table(Mode::BMaster, "hubbard_dimer.toml");
    let rep = compare_report(&a, &b).unwrap();
    assert!(rep.max_abs <= 1e-8, "{}", rep.summary());
    assert_eq!(rep.max_z, None);
}

#[test]
fn self_comparison_is_all_zero() {
    let a = table(Mode::Exact, "free_dimer.toml");
    let rep = compare_report(&a, &a).unwrap();
    assert_eq!(rep.max_abs, 0.0);
    assert!(rep.points.iter().all(|p| p.diff_re == 0.0 && p.diff_im == 0.0));
}

#[test]
fn grid_mismatch_is_reported() {
    let a = table(Mode::Exact, "free_dimer.toml");
    let mut b = a.clone();
    b.rows[3].t += 0.5;
    let err = compare_report(&a, &b).unwrap_err().to_string();
    assert!(err.contains("grid mismatch"), "{err}");
    b.rows.pop();
    assert!(compare_report(&a, &b).is_err());
}

#[test]
fn sde_against_exact_gives_z_scores() {
    let mut cfg = RunConfig::new(Mode::Sde);
    cfg.model = Some(models().join("hubbard_dimer.toml"));
    cfg.seed = Some(3);
    cfg.n_traj = 4000;
    cfg.dt = 2e-3;
    let s = simulate(&cfg).unwrap();
    assert!(s.rows.iter().any(|r| r.engine == "sde-ratio"));
    assert!(s.metadata.diverged.is_empty());
    let e = table(Mode::Exact, "hubbard_dimer.toml");
    let rep = compare_report(&s, &e).unwrap();
    let z = rep.max_z.unwrap();
    assert!(z <= 4.0, "{}", rep.summary());
    // t = 0 carries no noise
    assert!(rep.points[0].z.is_none() && rep.points[0].abs_diff == 0.0);
}

#[test]
fn csv_and_json_round_trip() {
    let mut cfg = RunConfig::new(Mode::Sde);
    cfg.model = Some(models().join("hubbard_dimer.toml"));
    cfg.seed = Some(5);
    cfg.n_traj = 300;
    cfg.dt = 1e-2;
    cfg.observables = vec!["n1".into(), "ad1a2".into()];
    let t = simulate(&cfg).unwrap();
    for f in [Format::Csv, Format::Json] {
        let back = ResultTable::parse(&t.render(f).unwrap()).unwrap();
        assert_eq!(back, t, "{f:?}");
    }
}

#[test]
fn observable_names() {
    let (id, op) = parse_observable("ad1a2", 2).unwrap();
    assert_eq!(id, "ad1a2");
    let want = &FockOperator::creation(2, 0) * &FockOperator::annihilation(2, 1);
    assert_eq!(op, want);
    assert_eq!(parse_observable("n2", 3).unwrap().1, FockOperator::number(3, 1));
    assert!(parse_observable("n4", 3).is_err());
    assert!(parse_observable("ad0a1", 3).is_err());
    assert!(parse_observable("spin", 3).is_err());

    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("n1.json");
    std::fs::write(&p, r#"{"real": [[1, 0, 0], [0, 0, 0], [0, 0, 0]]}"#).unwrap();
    let (id, op) = parse_observable(p.to_str().unwrap(), 3).unwrap();
    assert_eq!(id, "n1");
    assert!(op.max_abs_diff(&FockOperator::number(3, 0)) == 0.0);
}

#[test]
fn binary_exact_run_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.csv");
    let o = grassb(&[
        "--mode",
        "exact",
        "--model",
        models().join("free_dimer.toml").to_str().unwrap(),
        "--observables",
        "n1,ad1a2",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.contains("# model_sha256: "));
    assert!(text.lines().any(|l| l == "t,observable,mean_re,mean_im,se_re,se_im,engine"));
    let t = ResultTable::parse(&text).unwrap();
    assert_eq!(t.rows.len(), 42);
    // <a+_1 a_2>(t) = -i sin t cos t for tau = 1
    let r = t.rows.iter().find(|r| r.observable == "ad1a2" && r.t > 0.5).unwrap();
    assert!(r.mean_re.abs() < 1e-10);
    assert!((r.mean_im + r.t.sin() * r.t.cos()).abs() < 1e-10);
}

#[test]
fn sde_requires_a_seed() {
    let o = grassb(&["--mode", "sde", "--model", models().join("free_dimer.toml").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("--seed"));
}

#[test]
fn malformed_model_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.toml");
    std::fs::write(
        &p,
        "modes = 2\n[hopping]\nentries = [[1, 3, 1.0, 0.0]]\n[initial]\noccupation = \"10\"\n[time]\nt_max = 1.0\nn_points = 3\n",
    )
    .unwrap();
    let o = grassb(&["--mode", "exact", "--model", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("hopping.entries"));
}

#[test]
fn repeated_sde_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let model = models().join("hubbard_dimer.toml");
    for fmt in ["csv", "json"] {
        let files: Vec<String> = (0..2)
            .map(|i| {
                let out = dir.path().join(format!("{i}.{fmt}"));
                let o = grassb(&[
                    "--mode", "sde", "--model", model.to_str().unwrap(), "--seed", "9", "--n-traj", "400",
                    "--dt", "5e-3", "--scheme", "ito", "--format", fmt, "--out", out.to_str().unwrap(),
                ]);
                assert!(o.status.success());
                std::fs::read_to_string(out).unwrap()
            })
            .collect();
        assert_eq!(strip_timestamp(&files[0]), strip_timestamp(&files[1]));
        assert!(files[0].contains("ito-euler"));
    }
}

#[test]
fn compare_mode_via_binary() {
    let dir = tempfile::tempdir().unwrap();
    let model = models().join("hubbard_dimer.toml");
    let (a, b, r) = (dir.path().join("a.json"), dir.path().join("b.csv"), dir.path().join("r.csv"));
    for (mode, out, fmt) in [("exact", &a, "json"), ("b-master", &b, "csv")] {
        let o = grassb(&["--mode", mode, "--model", model.to_str().unwrap(), "--format", fmt, "--out", out.to_str().unwrap()]);
        assert!(o.status.success());
    }
    let o = grassb(&["--mode", "compare", a.to_str().unwrap(), b.to_str().unwrap(), "--out", r.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(r).unwrap();
    let max_abs: f64 = text.lines().find_map(|l| l.strip_prefix("# max_abs: ")).unwrap().parse().unwrap();
    assert!(max_abs <= 1e-8);
    let o = grassb(&["--mode", "compare", a.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn validate_mode_exits_zero() {
    let o = grassb(&["--mode", "validate"]);
    let text = String::from_utf8_lossy(&o.stdout);
    assert!(o.status.success(), "{text}");
    assert!(text.contains("0 failed"));
}

proptest! {
    #[test]
    fn csv_numbers_are_lossless(x in proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL | proptest::num::f64::ZERO) {
        let mut t = table(Mode::Exact, "free_dimer.toml");
        t.rows.truncate(1);
        t.rows[0].mean_re = x;
        t.rows[0].se_im = x.abs();
        let back = ResultTable::parse(&t.render(Format::Csv).unwrap()).unwrap();
        prop_assert_eq!(back.rows[0].mean_re.to_bits(), x.to_bits());
        prop_assert_eq!(back.rows[0].se_im.to_bits(), x.abs().to_bits());
    }
}
