use std::f64::consts::PI;
use std::path::Path;
use std::process::{Command, Output};

fn nlblow(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nlblow"))
        .args(args)
        .env("NLBLOW_OUT_DIR", out)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn read(path: impl AsRef<Path>) -> String {
    std::fs::read_to_string(path.as_ref())
        .unwrap_or_else(|e| panic!("{}: {e}", path.as_ref().display()))
}

fn header(csv: &str) -> &str {
    csv.lines().find(|l| !l.starts_with('#')).unwrap()
}

fn printed(text: &str, key: &str) -> f64 {
    let line = text
        .lines()
        .find(|l| l.starts_with(&format!("{key}=")))
        .unwrap_or_else(|| panic!("no {key} in {text}"));
    line[key.len() + 1..]
        .split_whitespace()
        .next()
        .unwrap()
        .parse()
        .unwrap()
}

#[test]
fn constants_for_the_classical_case() {
    let dir = tempfile::tempdir().unwrap();
    let o = nlblow(
        dir.path(),
        &["constants", "--alpha", "2", "--p", "3", "--d", "5"],
    );
    assert!(o.status.success());
    let text = stdout(&o);
    assert!((printed(&text, "s") - 2f64.sqrt()).abs() < 1e-7);
    // σ_5 = 8π²/3
    assert!((printed(&text, "σ_5") - 8.0 * PI * PI / 3.0).abs() < 1e-6);
    // s 2^{-1} Γ(2)/Γ(5/2) = √2 / (2 · 3√π/4)
    let k = 2f64.sqrt() * 2.0 / (3.0 * PI.sqrt());
    assert!((printed(&text, "K") - k).abs() < 1e-7);
    assert_eq!(
        header(&read(dir.path().join("constants.csv"))),
        "alpha,d,p,s,K,sigma_d,morrey_norm"
    );
}

#[test]
fn criterion_for_a_heavy_gaussian() {
    let dir = tempfile::tempdir().unwrap();
    let o = nlblow(
        dir.path(),
        &[
            "criterion",
            "--profile",
            "gauss",
            "--mass",
            "10",
            "--p",
            "2",
        ],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let curve = read(dir.path().join("criterion_curve.csv"));
    assert_eq!(header(&curve), "T,W,hinv,ratio");
    let verdict: serde_json::Value =
        serde_json::from_str(&read(dir.path().join("verdict.json"))).unwrap();
    assert_eq!(verdict["classification"], "criterion_met");
    assert!(verdict["t_star"].as_f64().unwrap() > 0.0);
}

#[test]
fn criterion_ingests_a_radial_profile_file() {
    let dir = tempfile::tempdir().unwrap();
    let profile = dir.path().join("u0.csv");
    let mut body = String::from("# unit-variance gaussian of mass 10\nr,u\n");
    for i in 0..=400 {
        let r = 0.02 * f64::from(i);
        body.push_str(&format!(
            "{r},{}\n",
            10.0 / (2.0 * PI).sqrt() * (-0.5 * r * r).exp()
        ));
    }
    std::fs::write(&profile, body).unwrap();
    let from_file = dir.path().join("file");
    let from_flag = dir.path().join("flag");
    let a = nlblow(
        &from_file,
        &[
            "criterion",
            "--profile",
            "file",
            "--path",
            profile.to_str().unwrap(),
        ],
    );
    let b = nlblow(
        &from_flag,
        &["criterion", "--profile", "gauss", "--mass", "10"],
    );
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    assert!(b.status.success());
    let t_star = |d: &Path| {
        let v: serde_json::Value = serde_json::from_str(&read(d.join("verdict.json"))).unwrap();
        v["t_star"].as_f64().unwrap()
    };
    assert_eq!(t_star(&from_file), t_star(&from_flag));
}

#[test]
fn singular_data_through_the_radial_route() {
    let dir = tempfile::tempdir().unwrap();
    let args = |m: &'static str| {
        vec![
            "criterion",
            "--profile",
            "singular",
            "--kernel",
            "fractional",
            "--alpha",
            "2",
            "--d",
            "5",
            "--p",
            "3",
            "--mass",
            m,
        ]
    };
    let below = nlblow(dir.path(), &args("1"));
    assert!(stdout(&below).contains("fujita_supercritical_small_data"));
    let above = nlblow(dir.path(), &args("1.4"));
    assert!(stdout(&above).contains("\"criterion_met\""));
}

const SIM: &str = r#"
[kernel]
kind = "gaussian"
a = 1.0

[source]
kind = "power"
p = 2.0

[grid]
points = 512
half_width = 32.0

[initial]
profile = "gauss"
mass = 20.0

[run]
t_end = 5.0
moment_targets = [0.1, 0.25]
"#;

#[test]
fn simulate_writes_its_tables_deterministically() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("sim.toml");
    std::fs::write(&config, SIM).unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        let o = nlblow(out, &["simulate", "--config", config.to_str().unwrap()]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        assert!(stdout(&o).contains("outcome: blew_up"));
    }
    for name in [
        "trajectory.csv",
        "moments_0.csv",
        "moments_1.csv",
        "final_state.csv",
    ] {
        assert_eq!(read(a.join(name)), read(b.join(name)), "{name}");
    }
    assert_eq!(header(&read(a.join("trajectory.csv"))), "t,sup_u,mass,dt");
    assert_eq!(
        header(&read(a.join("moments_0.csv"))),
        "t,W,F_of_W,dW_dt_fd"
    );
    assert_eq!(header(&read(a.join("final_state.csv"))), "x,u");
}

#[test]
fn sweep_is_deterministic_and_reports_the_slope() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        let o = nlblow(out, &["sweep-L", "--alpha", "1", "--p", "3", "--d", "3:50"]);
        assert!(o.status.success());
        assert!(stdout(&o).contains("predicted -0.2500"));
    }
    let table = read(a.join("sweep_L.csv"));
    assert_eq!(table, read(b.join("sweep_L.csv")));
    assert_eq!(
        header(&table),
        "quantity,alpha,p,d,value,normalized,t0_or_rho0"
    );
    assert_eq!(
        table.lines().filter(|l| !l.starts_with('#')).count(),
        1 + 48
    );
}

#[test]
fn bad_input_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = nlblow(dir.path(), &["preset", "no-such-preset"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("unknown preset"));

    let config = dir.path().join("bad.toml");
    std::fs::write(&config, "[grid]\npoint = 12\n").unwrap();
    let o = nlblow(
        dir.path(),
        &["simulate", "--config", config.to_str().unwrap()],
    );
    assert_eq!(o.status.code(), Some(2));

    let o = nlblow(
        dir.path(),
        &["sweep-K", "--alpha", "2", "--p", "3", "--d", "9:4"],
    );
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn presets_cover_every_criterion_and_write_manifests() {
    let dir = tempfile::tempdir().unwrap();
    let listing = stdout(&nlblow(dir.path(), &["preset"]));
    assert_eq!(listing.lines().count(), 12);

    let o = nlblow(dir.path(), &["preset", "window-bound", "--set", "p=5"]);
    assert!(o.status.success());
    let manifest: serde_json::Value =
        serde_json::from_str(&read(dir.path().join("window-bound/manifest.json"))).unwrap();
    assert_eq!(manifest["report"]["passed"], true);
    assert_eq!(manifest["report"]["parameters"]["p"], 5.0);
    assert_eq!(manifest["report"]["criterion"], 12);
}

#[test]
fn a_failed_check_exits_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    // with almost no mass the criterion is never met on the T grid
    let o = nlblow(
        dir.path(),
        &["preset", "criterion-soundness", "--set", "mass=0.01"],
    );
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).starts_with("FAIL C6"));
}

#[test]
fn selftest_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = nlblow(dir.path(), &["selftest"]);
    let text = stdout(&o);
    assert!(o.status.success(), "{text}");
    assert_eq!(text.lines().filter(|l| l.starts_with("PASS C")).count(), 12);
}
