use serde_json::Value;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use vqeac::exactsolver::fci_energy;
use vqeac::integrals::load_fixture;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(format!("{name}.fcidump"))
}

fn vqeac(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vqeac")).args(args).output().expect("binary runs")
}

fn ok_json(args: &[&str]) -> Value {
    let out = vqeac(args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn fci_subcommand_matches_exact_solver() {
    let path = fixture("h2_sto3g_0.735");
    let (ints, _) = load_fixture(&path).unwrap();
    let want = fci_energy(&ints).unwrap();
    let rec = ok_json(&["fci", s(&path)]);
    assert!((rec["e_total"].as_f64().unwrap() - want).abs() < 1e-10);
    let rec = ok_json(&["run", "--method", "fci", s(&path)]);
    assert!((rec["e_total"].as_f64().unwrap() - want).abs() < 1e-10);
}

#[test]
fn hf_matches_fixture_metadata() {
    let path = fixture("lih_sto3g_1.6");
    let (_, meta) = load_fixture(&path).unwrap();
    let rec = ok_json(&["run", "--method", "hf", s(&path)]);
    assert!((rec["e_total"].as_f64().unwrap() - meta.unwrap().hf_energy).abs() < 1e-8);
    assert_eq!(rec["e_corr"].as_f64().unwrap(), 0.0);
}

#[test]
fn oo_uccd_ac0_emits_correlation() {
    let rec =
        ok_json(&["run", "--method", "oo-uccd", "--correction", "ac0", "--cas", "2,2", s(&fixture("h2_631g_1.0"))]);
    let corr = rec["e_corr"].as_f64().unwrap();
    assert!(corr < -1e-4, "E_corr = {corr}");
    let (e_ref, e_total) = (rec["e_ref"].as_f64().unwrap(), rec["e_total"].as_f64().unwrap());
    assert!((e_total - e_ref - corr).abs() < 1e-14);
    assert_eq!(rec["label"], "OO-UCCD-AC0");
    assert!(!rec["traces"]["orbital_optimization"].as_array().unwrap().is_empty());
    assert!(rec["cnots"].as_u64().unwrap() > 0);
}

#[test]
fn config_errors_exit_with_two() {
    let h2 = fixture("h2_631g_1.0");
    assert_eq!(code(&vqeac(&["run", s(&h2)])), 2);
    assert_eq!(code(&vqeac(&["run", "--method", "casci", "--cas", "2", s(&h2)])), 2);
    assert_eq!(code(&vqeac(&["run", "--method", "casci", "--cas", "2,9", s(&h2)])), 2);
    assert_eq!(code(&vqeac(&["run", "--method", "hf", "--correction", "ac0", s(&h2)])), 2);
    assert_eq!(code(&vqeac(&["run", "--method", "fci", "/nonexistent.fcidump"])), 2);

    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, r#"{"method": "casci", "no_such_key": 1}"#).unwrap();
    assert_eq!(code(&vqeac(&["run", "--config", s(&cfg), s(&h2)])), 2);
}

#[test]
fn non_oo_corrections_need_force() {
    let h2 = fixture("h2_631g_1.0");
    let args = ["run", "--method", "uccsd", "--correction", "ac0", "--cas", "2,2", s(&h2)];
    assert_eq!(code(&vqeac(&args)), 2);
    let mut forced = args.to_vec();
    forced.push("--force");
    let rec = ok_json(&forced);
    assert!(rec["ac"]["warnings"].as_array().is_some());
}

#[test]
fn unstable_erpa_exits_with_three() {
    // Canonical-orbital CASCI reference: the full-Hamiltonian ERPA is unstable.
    let out = vqeac(&["run", "--method", "casci", "--correction", "ac", "--cas", "2,2", s(&fixture("lih_sto3g_1.6"))]);
    assert_eq!(code(&out), 3, "{}", String::from_utf8_lossy(&out.stderr));
}

fn scan_config(dir: &Path, methods: &[&str], names: &[&str], cas: [usize; 2]) -> PathBuf {
    let fixtures: Vec<String> = names.iter().map(|n| s(&fixture(n)).to_string()).collect();
    let cfg = serde_json::json!({ "fixtures": fixtures, "methods": methods, "cas": cas });
    let path = dir.join("scan.json");
    std::fs::write(&path, cfg.to_string()).unwrap();
    path
}

#[test]
fn n2_scan_shape_and_trend() {
    let dir = tempfile::tempdir().unwrap();
    // deliberately unordered; the scan sorts by bond length
    let names = [
        "n2_sto3g_2.0",
        "n2_sto3g_1.0",
        "n2_sto3g_1.1",
        "n2_sto3g_3.0",
        "n2_sto3g_1.3",
        "n2_sto3g_2.5",
        "n2_sto3g_1.5",
    ];
    let cfg = scan_config(dir.path(), &["fci", "casci", "uccsd"], &names, [6, 6]);
    let csv = dir.path().join("n2.csv");
    let out = vqeac(&["scan", "--config", s(&cfg), "--out", s(&csv)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "parameter,system,method,e_total,e_corr,pct_corr");
    assert_eq!(lines.len(), 1 + 7 * 3);

    let rows: Vec<Vec<&str>> = lines[1..].iter().map(|l| l.split(',').collect()).collect();
    let params: Vec<f64> = rows.iter().step_by(3).map(|r| r[0].parse().unwrap()).collect();
    assert_eq!(params, vec![1.0, 1.1, 1.3, 1.5, 2.0, 2.5, 3.0]);
    let mut gaps = Vec::new();
    for chunk in rows.chunks(3) {
        assert_eq!(chunk[0][2], "FCI");
        assert_eq!(chunk[0][5], "1.00000000000e2");
        for r in chunk {
            let mantissa = r[3].split('e').next().unwrap();
            assert_eq!(mantissa.chars().filter(|c| c.is_ascii_digit()).count(), 12);
        }
        let casci: f64 = chunk[1][3].parse().unwrap();
        let uccsd: f64 = chunk[2][3].parse().unwrap();
        gaps.push((uccsd - casci).abs());
    }
    assert!(gaps.windows(2).all(|w| w[1] > w[0]), "UCCSD-CASCI gaps {gaps:?}");
    assert!(std::fs::read_to_string(dir.path().join("n2.gp")).unwrap().contains("'n2.csv'"));
}

#[test]
fn identical_configs_give_identical_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let lih = fixture("lih_sto3g_2.0");
    let args = ["run", "--method", "oo-uccd", "--correction", "ac0", "--cas", "2,2", s(&lih)];
    assert_eq!(vqeac(&args).stdout, vqeac(&args).stdout);

    let cfg = scan_config(
        dir.path(),
        &["casscf+ac0", "uccsd", "qubit-adapt"],
        &["lih_sto3g_1.2", "lih_sto3g_2.5", "lih_sto3g_1.6"],
        [2, 3],
    );
    let scan = |name: &str| {
        let out = dir.path().join(name);
        assert!(vqeac(&["scan", "--config", s(&cfg), "--out", s(&out)]).status.success());
        std::fs::read(out).unwrap()
    };
    assert_eq!(scan("a.csv"), scan("b.csv"));
}

#[test]
fn table_from_records_with_spin_gap() {
    let dir = tempfile::tempdir().unwrap();
    let h4 = fixture("h4_square_sto3g_0.9");
    let triplet = dir.path().join("triplet.json");
    std::fs::write(&triplet, r#"{"ms2": 2}"#).unwrap();
    let mut records = Vec::new();
    for (i, extra) in [vec![], vec!["--config", s(&triplet)]].into_iter().enumerate() {
        let out = dir.path().join(format!("rec{i}.json"));
        let mut args = vec!["run", "--method", "uccsd", "--cas", "2,2", "--out", s(&out)];
        args.extend(extra);
        args.push(s(&h4));
        assert!(vqeac(&args).status.success());
        records.push(out);
    }
    let recs: Vec<Value> =
        records.iter().map(|p| serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()).collect();
    let gap_mha = 1e3 * (recs[1]["e_total"].as_f64().unwrap() - recs[0]["e_total"].as_f64().unwrap());

    let out = vqeac(&["table", s(&records[0]), s(&records[1])]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let blocks: Vec<&str> = text.split("\n\n").collect();
    assert_eq!(blocks.len(), 2);
    assert_eq!(blocks[0].lines().count(), 3);
    let gap_row = blocks[1].lines().nth(1).unwrap();
    let shown: f64 = gap_row.split_whitespace().nth(2).unwrap().parse().unwrap();
    assert!((shown - gap_mha).abs() < 1e-4);

    let empty = vqeac(&["table"]);
    assert_eq!(String::from_utf8(empty.stdout).unwrap().lines().count(), 1);
}
