use std::fs;
use std::path::Path;
use std::process::{Command, Output};
use std::time::Instant;

use serde_json::Value;
use tempfile::TempDir;

fn bellcat(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bellcat")).args(args).output().unwrap()
}

fn run_ok(args: &[&str]) {
    let out = bellcat(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
}

fn manifest(dir: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

fn summary(dir: &Path, key: &str) -> f64 {
    manifest(dir)["summary"][key].as_f64().unwrap_or_else(|| panic!("missing {key}"))
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r.records().map(|rec| rec.unwrap().iter().map(String::from).collect()).collect();
    (header, rows)
}

fn column(path: &Path, name: &str) -> Vec<f64> {
    let (header, rows) = read_csv(path);
    let i = header.iter().position(|h| h == name).unwrap();
    rows.iter().map(|r| r[i].parse().unwrap()).collect()
}

fn out_arg(dir: &TempDir, sub: &str) -> String {
    dir.path().join(sub).display().to_string()
}

#[test]
fn spectrum_smoke_and_determinism() {
    let tmp = TempDir::new().unwrap();
    let start = Instant::now();
    run_ok(&["spectrum", "--n-spins", "1", "--out", &out_arg(&tmp, "n1")]);
    assert!(start.elapsed().as_secs_f64() < 1.0);

    let (a, b) = (out_arg(&tmp, "a"), out_arg(&tmp, "b"));
    run_ok(&["spectrum", "--out", &a]);
    run_ok(&["spectrum", "--out", &b]);
    let bytes_a = fs::read(tmp.path().join("a/spectrum.csv")).unwrap();
    assert_eq!(bytes_a, fs::read(tmp.path().join("b/spectrum.csv")).unwrap());
    assert!(!bytes_a.contains(&b'\r'));

    let (header, rows) = read_csv(&tmp.path().join("a/spectrum.csv"));
    assert_eq!(header.len(), 1 + 22);
    assert_eq!(rows.len(), 101);
    for row in &rows {
        let v: f64 = row[0].parse().unwrap();
        let mut mags: Vec<f64> = row[1..].iter().map(|x| x.parse::<f64>().unwrap().abs()).collect();
        mags.sort_by(f64::total_cmp);
        if v < 0.6 {
            assert!(mags[1] < 0.1 * mags[2], "no mid-gap pair at v = {v}");
        }
        if v > 1.2 {
            assert!(mags[1] > 0.1 * mags[2], "unexpected pair at v = {v}");
        }
    }
    assert_eq!(manifest(&tmp.path().join("a"))["files"][0]["rows"], 101);
}

#[test]
fn floats_carry_seventeen_significant_digits() {
    let tmp = TempDir::new().unwrap();
    let dir = out_arg(&tmp, "s");
    run_ok(&["spectrum", "--n-spins", "2", "--v-points", "3", "--out", &dir]);
    let (_, rows) = read_csv(&tmp.path().join("s/spectrum.csv"));
    for cell in rows.iter().flatten() {
        let mantissa = cell.trim_start_matches('-').split('e').next().unwrap();
        assert_eq!(mantissa.chars().filter(|c| c.is_ascii_digit()).count(), 17, "{cell}");
    }
}

#[test]
fn boundstates_profiles_match_analytic() {
    let tmp = TempDir::new().unwrap();
    let dir = out_arg(&tmp, "b");
    run_ok(&["boundstates", "--out", &dir]);
    let d = tmp.path().join("b");
    let disc = column(&d.join("zero_mode_profiles.csv"), "l2_discrepancy");
    assert!(disc.iter().copied().fold(0.0, f64::max) < 0.01);
    assert!(summary(&d, "fidelity_up") > 0.99);
    let (header, rows) = read_csv(&d.join("fock_energy_up.csv"));
    assert_eq!(header, ["n", "k", "E", "P"]);
    assert_eq!(rows.len(), 181 * 362);

    let start = Instant::now();
    run_ok(&["boundstates", "--n-spins", "40", "--out", &out_arg(&tmp, "quick")]);
    assert!(start.elapsed().as_secs_f64() < 5.0);
}

#[test]
fn boundstates_in_trivial_phase_fails_cleanly() {
    let tmp = TempDir::new().unwrap();
    let dir = out_arg(&tmp, "t");
    let out = bellcat(&["boundstates", "--v", "1.3", "--out", &dir]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("no zero modes: trivial phase"));
    let m = manifest(&tmp.path().join("t"));
    assert!(m["error"].as_str().unwrap().contains("no zero modes: trivial phase"));
    assert_eq!(m["files"].as_array().unwrap().len(), 0);
}

#[test]
fn drive_emits_wigner_grids_and_timeseries() {
    let tmp = TempDir::new().unwrap();
    let dir = out_arg(&tmp, "d");
    run_ok(&["drive", "--n-spins", "40", "--gamma", "0.01", "--sample-every", "1000", "--out", &dir]);
    let d = tmp.path().join("d");
    for name in ["wigner_initial.csv", "wigner_final.csv"] {
        let (header, rows) = read_csv(&d.join(name));
        assert_eq!(header, ["n", "p", "phi_p", "W0", "Wx", "W0+Wx"]);
        assert_eq!(rows.len(), 41 * 41);
        let total: f64 = column(&d.join(name), "W0").iter().sum();
        assert!((total - 1.0).abs() < 1e-10);
    }
    let (header, rows) = read_csv(&d.join("protocol_timeseries.csv"));
    assert_eq!(header, ["t", "v", "coherence", "fidelity", "entropy", "norm_drift"]);
    assert_eq!(rows.len(), 7);
    let m = manifest(&d);
    assert!(m["timescales"]["t1"].as_f64().unwrap() > 29.9);
    assert!(m["error"].is_null());
}

#[test]
fn sudden_quench_has_low_fidelity() {
    let tmp = TempDir::new().unwrap();
    let dir = out_arg(&tmp, "q");
    run_ok(&["drive", "--n-spins", "60", "--gamma", "1.0", "--out", &dir]);
    assert!(summary(&tmp.path().join("q"), "final_fidelity") < 0.5);
}

#[test]
fn lindblad_strong_dephasing_decays_before_transition() {
    let tmp = TempDir::new().unwrap();
    let dir = out_arg(&tmp, "l");
    run_ok(&["lindblad", "--n-spins", "12", "--vf", "0.95", "--dephasing", "0.02", "--out", &dir]);
    let d = tmp.path().join("l");
    let t = column(&d.join("coherence_vs_v.csv"), "t");
    let predicted = column(&d.join("coherence_vs_v.csv"), "sigma_x_predicted");
    for (t, p) in t.iter().zip(&predicted) {
        assert_eq!(*p, (-2.0 * 0.02 * t).exp());
    }
    let m = manifest(&d);
    let t1 = m["timescales"]["t1"].as_f64().unwrap();
    assert!((m["timescales"]["d_c"].as_f64().unwrap() - 2.0e-3).abs() < 1e-12);
    assert!(summary(&d, "coherence_below_0.1_at") < t1);
}

#[test]
fn bosonic_distribution_peaks_at_49() {
    let tmp = TempDir::new().unwrap();
    let dir = out_arg(&tmp, "b");
    run_ok(&["bosonic", "--out", &dir]);
    let d = tmp.path().join("b");
    for col in ["P_bound_state", "P_coherent"] {
        let p = column(&d.join("bosonic_distribution.csv"), col);
        let max = p.iter().copied().fold(0.0, f64::max);
        assert!(p[49] >= max * (1.0 - 1e-6), "{col}");
    }
    assert!(summary(&d, "artifact_mean_number") > 100.0);
    assert_eq!(summary(&d, "peak_m_a"), 49.0);

    let lifted = out_arg(&tmp, "eps");
    run_ok(&["bosonic", "--epsilon", "1e-6", "--out", &lifted]);
    let e = tmp.path().join("eps");
    assert!(summary(&e, "physical_energy").abs() < 1e-3);
    assert!(summary(&e, "artifact_energy").abs() > 1e3 * summary(&d, "artifact_energy").abs().max(1e-15));

    let vac = out_arg(&tmp, "vac");
    run_ok(&["bosonic", "--v", "0", "--n-mode", "20", "--out", &vac]);
    let p = column(&tmp.path().join("vac/bosonic_distribution.csv"), "P_bound_state");
    assert!((p[0] - 1.0).abs() < 1e-12);
    assert!(p[1..].iter().all(|x| *x < 1e-12));
}

#[test]
fn sweep_grid_writes_manifests_and_index() {
    let tmp = TempDir::new().unwrap();
    let dir = out_arg(&tmp, "s");
    run_ok(&[
        "sweep",
        "--sweep-command",
        "spectrum",
        "--set",
        "n_spins=2,3",
        "--set",
        "w=1,2",
        "--workers",
        "2",
        "--out",
        &dir,
    ]);
    let d = tmp.path().join("s");
    let manifests =
        fs::read_dir(&d).unwrap().filter_map(|e| e.ok()).filter(|e| e.path().join("manifest.json").exists()).count();
    assert_eq!(manifests, 4);
    let index: Value = serde_json::from_str(&fs::read_to_string(d.join("index.json")).unwrap()).unwrap();
    let points = index["points"].as_array().unwrap();
    assert_eq!(points.len(), 4);
    assert_eq!(points[1]["assignments"]["w"], "2");
    assert_eq!(manifest(&d.join("point_001"))["config"]["w"], 2.0);
}

#[test]
fn sweep_over_v0_reproduces_fidelity_trend() {
    let tmp = TempDir::new().unwrap();
    let dir = out_arg(&tmp, "f");
    run_ok(&["sweep", "--set", "v0=1.1,1.3,1.5,2.0", "--n-spins", "150", "--sample-every", "1000000", "--out", &dir]);
    let index: Value = serde_json::from_str(&fs::read_to_string(tmp.path().join("f/index.json")).unwrap()).unwrap();
    let fids: Vec<f64> =
        index["points"].as_array().unwrap().iter().map(|p| p["summary"]["final_fidelity"].as_f64().unwrap()).collect();
    assert!(fids.windows(2).all(|w| w[1] >= w[0]), "{fids:?}");
}

#[test]
fn empty_sweep_is_a_config_error() {
    let tmp = TempDir::new().unwrap();
    let out = bellcat(&["sweep", "--out", &out_arg(&tmp, "e")]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("no sweep points"));
}

#[test]
fn config_file_with_flag_overrides() {
    let tmp = TempDir::new().unwrap();
    let cfg = tmp.path().join("run.toml");
    fs::write(&cfg, "experiment = \"fig4a\"\nn_spins = 4\nv_points = 5\nw = 1.5\n").unwrap();
    let dir = out_arg(&tmp, "c");
    run_ok(&["spectrum", "--config", cfg.to_str().unwrap(), "--w", "2", "--out", &dir]);
    let m = manifest(&tmp.path().join("c"));
    assert_eq!(m["config"]["experiment"], "fig4a");
    assert_eq!(m["config"]["n_spins"], 4);
    assert_eq!(m["config"]["w"], 2.0);
    assert_eq!(m["files"][0]["rows"], 5);

    fs::write(&cfg, "n_spins = \"lots\"\n").unwrap();
    let out = bellcat(&["spectrum", "--config", cfg.to_str().unwrap(), "--out", &dir]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unwritable_output_is_an_io_error() {
    let tmp = TempDir::new().unwrap();
    let blocker = tmp.path().join("file");
    fs::write(&blocker, "x").unwrap();
    let out = bellcat(&["spectrum", "--n-spins", "1", "--out", blocker.join("sub").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("I/O error"));
}

#[test]
fn invalid_physics_arguments_exit_with_config_code() {
    let tmp = TempDir::new().unwrap();
    let out = bellcat(&["drive", "--n-spins", "10", "--v0", "0.5", "--vf", "0.7", "--out", &out_arg(&tmp, "x")]);
    assert_eq!(out.status.code(), Some(2));
    assert!(manifest(&tmp.path().join("x"))["error"].as_str().unwrap().contains("ramp must go down"));
}
