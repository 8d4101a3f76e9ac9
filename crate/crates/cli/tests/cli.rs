use std::path::Path;
use std::process::{Command, Output};

fn lienard(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lienard"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    assert!(
        out.status.success(),
        "exit {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

/// Columns of a CSV document keyed by header.
fn column(text: &str, name: &str) -> Vec<f64> {
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let idx = rdr.headers().unwrap().iter().position(|h| h == name).expect("column exists");
    rdr.records()
        .map(|r| r.unwrap()[idx].parse::<f64>().unwrap())
        .collect()
}

fn assert_exit(out: &Output, code: i32, needle: &str) {
    let err = stderr(out);
    assert_eq!(out.status.code(), Some(code), "stderr: {err}");
    assert!(err.contains(needle), "expected '{needle}' in: {err}");
    assert!(!err.contains("panicked"), "{err}");
}

#[test]
fn harmonic_run_returns_to_start() {
    let text = stdout(&lienard(&[
        "simulate", "--k", "0", "--omega", "1", "--x0", "1", "--v0", "0", "--t-end", "6.2832",
    ]));
    assert!(text.starts_with("t,x,v\n"));
    let x = column(&text, "x");
    assert!((x.last().unwrap() - 1.0).abs() < 1e-6);
}

#[test]
fn ten_periods_ten_crossings() {
    let text = stdout(&lienard(&[
        "simulate", "--k", "3", "--omega", "1", "--x0", "0.1", "--v0", "0", "--t-end", "62.832",
    ]));
    let x = column(&text, "x");
    let down = x.windows(2).filter(|w| w[0] > 0.0 && w[1] <= 0.0).count();
    assert_eq!(down, 10);
}

#[test]
fn negative_omega_is_a_validation_error() {
    let out = lienard(&["simulate", "--k", "3", "--omega", "-1", "--x0", "0.1", "--v0", "0", "--t-end", "1"]);
    assert_exit(&out, 2, "omega");
}

#[test]
fn escape_is_a_numerical_failure() {
    let out = lienard(&["simulate", "--k", "3", "--omega", "1", "--x0", "0", "--v0", "-1", "--t-end", "50"]);
    assert_exit(&out, 3, "numerical failure");
}

#[test]
fn bad_usage_exits_two() {
    assert_exit(&lienard(&["simulate", "--bogus", "1"]), 2, "--bogus");
    assert_exit(&lienard(&["simulate", "--k", "3", "--omega", "1"]), 2, "--x0");
    assert_exit(&lienard(&["simulate", "--k", "abc"]), 2, "abc");
    assert_exit(&lienard(&["nonsense"]), 2, "nonsense");
    assert_exit(&lienard(&["chiellini", "--family", "poly", "--f", "x", "--g", "1:1"]), 2, "power:coeff");
    assert_exit(&lienard(&["flow", "--class", "III", "--k", "3", "--omega", "1"]), 2, "class");
    assert_exit(
        &lienard(&["spectrum", "--class", "I+", "--k", "1", "--omega", "1", "--method", "closed"]),
        2,
        "numeric",
    );
    assert_exit(&lienard(&["chiellini", "--k", "3", "--omega", "1", "--format", "svg"]), 2, "svg");
}

#[test]
fn isochronous_scan_is_flat() {
    let text = stdout(&lienard(&[
        "period-scan", "--k", "3", "--omega", "1", "--amplitudes", "0.05,0.1,0.2,0.4",
    ]));
    let dev = column(&text, "deviation");
    assert_eq!(dev.len(), 4);
    assert!(dev.iter().all(|&d| d < 1e-6), "{dev:?}");
}

#[test]
fn generalized_scan_grows() {
    let text = stdout(&lienard(&[
        "period-scan", "--family", "gen", "--r", "4", "--a1", "1", "--a2", "1", "--amplitudes", "0.1,0.5",
    ]));
    let dev = column(&text, "deviation");
    assert!(dev[1] > dev[0] && dev[1] > 1e-3, "{dev:?}");
}

#[test]
fn empty_amplitudes_rejected() {
    assert_exit(&lienard(&["period-scan", "--k", "3", "--omega", "1", "--amplitudes", ""]), 2, "amplitudes");
    assert_exit(&lienard(&["period-scan", "--k", "3", "--omega", "1"]), 2, "amplitude");
}

#[test]
fn class_ii_spectrum_cross_check() {
    let text = stdout(&lienard(&[
        "spectrum", "--class", "II", "--preset", "zhu-kroemer", "--k", "1", "--omega", "1", "--levels", "5",
        "--method", "both",
    ]));
    assert!(text.starts_with("n,E_closed,E_numeric,abs_err\n0,"));
    let err = column(&text, "abs_err");
    assert_eq!(err.len(), 5);
    assert!(err.iter().all(|&e| e < 1e-4), "{err:?}");
}

#[test]
fn class_i_spectrum_contains_hermite_level() {
    let text = stdout(&lienard(&[
        "spectrum", "--class", "I+", "--preset", "mustafa", "--k", "1.5", "--omega", "1", "--levels", "5",
        "--method", "numeric",
    ]));
    // E = 4·𝓔 with 𝓔 = (ω/4)(2 + ½) − k/(24ω²) = 0.5625.
    let e = column(&text, "E_numeric");
    assert!(e.iter().any(|&v| (v - 2.25).abs() < 4e-4), "{e:?}");
}

#[test]
fn unknown_preset_lists_valid_ones() {
    let out = lienard(&["spectrum", "--class", "II", "--preset", "unknown", "--k", "1", "--omega", "1"]);
    assert_exit(&out, 2, "zhu-kroemer");
    assert!(stderr(&out).contains("ben-daniel-duke"));
}

#[test]
fn output_is_deterministic() {
    let args = ["simulate", "--k", "3", "--omega", "1", "--x0", "0.2", "--v0", "0", "--t-end", "20"];
    assert_eq!(lienard(&args).stdout, lienard(&args).stdout);
    let args = ["bound-scan", "--format", "csv"];
    assert_eq!(lienard(&args).stdout, lienard(&args).stdout);
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

#[test]
fn figures_data() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("figs");
    stdout(&lienard(&["figures", "--out", out_dir.to_str().unwrap()]));

    let summary: serde_json::Value = serde_json::from_str(&read(&out_dir, "summary.json")).unwrap();
    let z = summary["class_ii_eps_1"]["zeta_star_numeric"].as_f64().unwrap();
    assert!((z - 96.75f64.powf(0.25)).abs() < 1e-6);

    let surf = read(&out_dir, "surface_class_i.csv");
    let p = column(&surf, "ptilde");
    let (hp, hm) = (column(&surf, "H_plus"), column(&surf, "H_minus"));
    let boundary: Vec<usize> = (0..p.len()).filter(|&i| p[i] == 0.0).collect();
    assert_eq!(boundary.len(), 41);
    assert!(boundary.iter().all(|&i| hp[i] == hm[i]));
    // Away from the boundary the branches differ.
    assert!((0..p.len()).any(|i| p[i] > 0.0 && (hp[i] - hm[i]).abs() > 1e-3));

    let ii = read(&out_dir, "surface_class_ii.csv");
    assert!(column(&ii, "ptilde").iter().all(|&v| v > 0.0));

    for eps in ["1", "0.25", "0"] {
        let curve = read(&out_dir, &format!("potential_class_i_eps_{eps}.csv"));
        assert_eq!(column(&curve, "xi").len(), 400);
        let svg = read(&out_dir, &format!("potential_class_i_eps_{eps}.svg"));
        assert!(svg.starts_with("<svg") && svg.contains("<polyline"));
    }
    let ii_curve = read(&out_dir, "potential_class_ii.csv");
    let (zeta, v) = (column(&ii_curve, "zeta"), column(&ii_curve, "V_eps_1"));
    let i_min = (0..v.len()).min_by(|&a, &b| v[a].total_cmp(&v[b])).unwrap();
    assert!((zeta[i_min] - 96.75f64.powf(0.25)).abs() < 0.02);

    // Re-running reproduces every file byte for byte.
    let again = dir.path().join("again");
    stdout(&lienard(&["figures", "--out", again.to_str().unwrap()]));
    for entry in std::fs::read_dir(&out_dir).unwrap() {
        let name = entry.unwrap().file_name();
        let name = name.to_str().unwrap();
        assert_eq!(read(&out_dir, name), read(&again, name), "{name}");
    }
}

#[test]
fn config_file_supplies_parameters() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("iso.json");
    std::fs::write(&cfg, r#"{"k": 3, "omega": 1, "x0": 0.1, "v0": 0, "t_end": 6.283185307179586}"#).unwrap();
    let from_cfg = stdout(&lienard(&["simulate", "--config", cfg.to_str().unwrap()]));
    let from_flags = stdout(&lienard(&[
        "simulate", "--k", "3", "--omega", "1", "--x0", "0.1", "--v0", "0", "--t-end", "6.283185307179586",
    ]));
    assert_eq!(from_cfg, from_flags);

    // Flags override the file.
    let out = lienard(&["simulate", "--config", cfg.to_str().unwrap(), "--omega", "-2"]);
    assert_exit(&out, 2, "omega");

    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"k": 3, "omegaa": 1}"#).unwrap();
    assert_exit(&lienard(&["simulate", "--config", bad.to_str().unwrap()]), 2, "omegaa");

    let broken = dir.path().join("broken.json");
    std::fs::write(&broken, "{").unwrap();
    assert_exit(&lienard(&["simulate", "--config", broken.to_str().unwrap()]), 2, "JSON");
}

#[test]
fn config_accepts_model_descriptor() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("model.json");
    std::fs::write(
        &cfg,
        r#"{"class_tag": "II", "ell": -0.6666666666666666, "params": {"k": 3, "omega": 1}}"#,
    )
    .unwrap();
    let text = stdout(&lienard(&[
        "flow", "--config", cfg.to_str().unwrap(), "--x0", "0.3", "--v0", "0", "--t-end", "6.283185307179586",
    ]));
    assert!(text.starts_with("t,x,ptilde,H\n"));
    let h = column(&text, "H");
    assert!(h.iter().all(|&v| (v - h[0]).abs() < 1e-8));
    let x = column(&text, "x");
    assert!((x.last().unwrap() - 0.3).abs() < 1e-6);

    std::fs::write(&cfg, r#"{"class_tag": "II", "ell": 0.5, "params": {"k": 3, "omega": 1}}"#).unwrap();
    assert_exit(&lienard(&["flow", "--config", cfg.to_str().unwrap()]), 2, "ell");
}

#[test]
fn chiellini_and_certificate() {
    let text = stdout(&lienard(&["chiellini", "--k", "3", "--omega", "1"]));
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["status"], "SATISFIABLE");
    let vdp = stdout(&lienard(&["chiellini", "--family", "poly", "--f", "0:-1,2:1", "--g", "1:1"]));
    assert!(vdp.contains("NOT_SATISFIABLE"));

    let cert: serde_json::Value =
        serde_json::from_str(&stdout(&lienard(&["certificate", "--k", "3", "--omega", "1"]))).unwrap();
    let c = &cert["certificate"];
    assert_eq!(c["valid"], true);
    assert_eq!(c["A_coeff"], -1.0);
    assert_eq!(c["residuals"].as_array().unwrap().len(), 3);
    let broken = stdout(&lienard(&[
        "certificate", "--alpha1", "3", "--alpha2", "1", "--c1", "1", "--c-minus1", "0.5",
    ]));
    assert!(broken.contains("\"valid\": false"));
}

#[test]
fn wavefunction_and_bound_scan() {
    let text = stdout(&lienard(&["wavefunction", "--k", "1", "--omega", "1", "--n", "2"]));
    assert!(text.starts_with("s,phi,psi\n"));
    let phi = column(&text, "phi");
    let peak = phi.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let signs: Vec<bool> = phi.iter().filter(|v| v.abs() > 1e-8 * peak).map(|&v| v > 0.0).collect();
    assert_eq!(signs.windows(2).filter(|w| w[0] != w[1]).count(), 2);

    let scan = stdout(&lienard(&["bound-scan", "--n-max", "3", "--omega", "1", "--format", "csv"]));
    let k = column(&scan, "k_star");
    assert_eq!(k.len(), 2);
    assert!((k[0] - 1.5).abs() < 1e-8 && (k[1] - 4.5).abs() < 1e-8);
    assert!(column(&scan, "eigen_residual").iter().all(|&r| r < 1e-4));
}

#[test]
fn out_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("spec.json");
    let out = lienard(&[
        "spectrum", "--k", "96", "--omega", "2", "--levels", "3", "--method", "closed", "--format", "json", "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success() && out.stdout.is_empty());
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let e = v["closed"]["energies"].as_array().unwrap();
    // ε = 1, 96/k = 1: E₀ = 2(½ + ½√2).
    assert!((e[0].as_f64().unwrap() - (1.0 + 2f64.sqrt())).abs() < 1e-12);
}
