use std::path::PathBuf;
use std::process::Command;

use cpkit::{Complex64, ComplexMatrix, FrobeniusStructure};
use cpkit_cli::run_command;
use serde_json::{json, Value};
use tempfile::TempDir;

fn c(re: f64) -> Value {
    json!([re, 0.0])
}

/// Structure constants typed out by hand.
fn classical2() -> Value {
    json!({
        "kind": "frobenius", "dim": 2,
        "mult": [[c(1.0), c(0.0), c(0.0), c(0.0)], [c(0.0), c(0.0), c(0.0), c(1.0)]],
        "unit": [c(1.0), c(1.0)]
    })
}

/// `m[(i, j), ((k, l), (p, n))] = δ_ik δ_lp δ_jn / √2`, unit `√2 · vec(1)`.
fn pants2() -> Value {
    let z = std::f64::consts::FRAC_1_SQRT_2;
    let mut mult = vec![vec![c(0.0); 16]; 4];
    for i in 0..2 {
        for j in 0..2 {
            for l in 0..2 {
                mult[i * 2 + j][(i * 2 + l) * 4 + l * 2 + j] = c(z);
            }
        }
    }
    let s = std::f64::consts::SQRT_2;
    json!({"kind": "frobenius", "dim": 4, "carrier": [2, 2], "mult": mult, "unit": [c(s), c(0.0), c(0.0), c(s)]})
}

fn transpose_map() -> Value {
    let data: Vec<Vec<Value>> = (0..4)
        .map(|r| {
            (0..4)
                .map(|col| c(if r / 2 == col % 2 && r % 2 == col / 2 { 1.0 } else { 0.0 }))
                .collect()
        })
        .collect();
    json!({"kind": "matrix", "data": data})
}

fn bit_flip() -> Value {
    let (a, b) = (0.75f64.sqrt(), 0.25f64.sqrt());
    json!({"kind": "cpm", "dim_in": 2, "dim_out": 2, "kraus": [
        [[c(a), c(0.0)], [c(0.0), c(a)]],
        [[c(0.0), c(b)], [c(b), c(0.0)]]
    ]})
}

fn prepare() -> Value {
    json!({"kind": "cpm", "dim_in": 1, "dim_out": 2, "kraus": [[[c(1.0)], [c(0.0)]]]})
}

struct Fixture {
    dir: TempDir,
}

impl Fixture {
    fn new() -> Self {
        Fixture {
            dir: tempfile::tempdir().unwrap(),
        }
    }

    fn write(&self, name: &str, entities: Value) -> String {
        self.write_raw(name, &json!({"version": 1, "entities": entities}).to_string())
    }

    fn write_raw(&self, name: &str, text: &str) -> String {
        let path: PathBuf = self.dir.path().join(name);
        std::fs::write(&path, text).unwrap();
        path.to_string_lossy().into_owned()
    }

    fn gens(&self) -> String {
        self.write(
            "gens.json",
            json!({
                "c2": classical2(),
                "pants2": pants2(),
                "transpose_map": transpose_map(),
                "bit_flip": bit_flip(),
                "prepare": prepare(),
                "stochastic": {"kind": "cpstar", "dom": "c2", "cod": "c2", "map": [[c(0.9), c(0.2)], [c(0.1), c(0.8)]]},
                "negative": {"kind": "cpstar", "dom": "c2", "cod": "c2", "map": [[c(1.1), c(0.2)], [c(-0.1), c(0.8)]]},
                "flip": {"kind": "cpstar", "dom": "c2", "cod": "c2", "kraus": [[[c(0.0), c(1.0)], [c(1.0), c(0.0)]]]},
            }),
        )
    }
}

fn run(args: &[&str]) -> (i32, Value) {
    let mut argv = vec!["cpkit", "--json"];
    argv.extend_from_slice(args);
    let out = run_command(argv);
    assert!(out.stderr.is_empty(), "{}", out.stderr);
    (out.code, serde_json::from_str(&out.stdout).unwrap())
}

fn residual(report: &Value, name: &str) -> f64 {
    report["residuals"]
        .as_array()
        .unwrap()
        .iter()
        .find(|r| r["name"] == name)
        .unwrap_or_else(|| panic!("no residual {name} in {report}"))["value"]
        .as_f64()
        .unwrap()
}

fn decode(v: &Value) -> ComplexMatrix {
    let rows: Vec<Vec<Complex64>> = v
        .as_array()
        .unwrap()
        .iter()
        .map(|r| {
            r.as_array()
                .unwrap()
                .iter()
                .map(|z| Complex64::new(z[0].as_f64().unwrap(), z[1].as_f64().unwrap()))
                .collect()
        })
        .collect();
    ComplexMatrix::from_rows(rows).unwrap()
}

#[test]
fn pants_check_passes_with_axiom_table() {
    let fx = Fixture::new();
    let file = fx.gens();
    let (code, report) = run(&["check", "frobenius", &file, "pants2"]);
    assert_eq!(code, 0);
    assert_eq!(report["pass"], true);
    let names: Vec<&str> = report["residuals"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["name"].as_str().unwrap())
        .collect();
    assert_eq!(
        names,
        [
            "associativity",
            "left_unit",
            "right_unit",
            "specialty",
            "frobenius_left",
            "frobenius_right"
        ]
    );
    for r in report["residuals"].as_array().unwrap() {
        assert!(r["value"].as_f64().unwrap() <= 1e-9);
        assert_eq!(r["eps"], 1e-9);
    }

    let text = run_command(["cpkit", "check", "frobenius", &file, "pants2"]);
    assert_eq!(text.code, 0);
    assert!(text.stdout.contains("check frobenius pants2: PASS"));
    assert!(text.stdout.contains("frobenius_left"));
}

#[test]
fn hand_written_classical_structure_matches_the_library() {
    let fx = Fixture::new();
    let file = fx.gens();
    let (code, report) = run(&["check", "frobenius", &file, "c2"]);
    assert_eq!(code, 0);
    let model = cpkit_cli::parse_model(&file).unwrap();
    let loaded = model.fhilb_frobenius("c2").unwrap();
    assert_eq!(loaded, &FrobeniusStructure::classical(2).unwrap());
    assert_eq!(report["details"]["commutative"], true);
}

#[test]
fn broken_unit_fails_the_unit_axioms() {
    let fx = Fixture::new();
    let mut bad = classical2();
    bad["unit"] = json!([c(1.0), c(0.0)]);
    let file = fx.write("bad.json", json!({ "bad": bad }));
    let (code, report) = run(&["check", "frobenius", &file, "bad"]);
    assert_eq!(code, 1);
    assert!(residual(&report, "left_unit") > 0.5);
    assert!(residual(&report, "associativity") <= 1e-9);
}

#[test]
fn rel_groupoids() {
    let fx = Fixture::new();
    let z2 =
        json!({"kind": "frobenius", "category": "rel", "dim": 2, "mult": [[1, 0, 0, 1], [0, 1, 1, 0]], "unit": [1, 0]});
    let broken =
        json!({"kind": "frobenius", "category": "rel", "dim": 2, "mult": [[1, 0, 0, 0], [0, 1, 1, 0]], "unit": [1, 0]});
    let file = fx.write("rel.json", json!({ "z2": z2, "broken": broken }));
    let (code, report) = run(&["check", "frobenius", &file, "z2"]);
    assert_eq!(code, 0);
    assert_eq!(report["details"]["category"], "rel");
    let (code, report) = run(&["check", "frobenius", &file, "broken"]);
    assert_eq!(code, 1);
    assert_eq!(residual(&report, "frobenius_left"), 1.0);
}

#[test]
fn transpose_is_not_cp() {
    let fx = Fixture::new();
    let file = fx.gens();
    let (code, report) = run(&["cpm", "is-cp", &file, "transpose_map"]);
    assert_eq!(code, 1);
    assert_eq!(report["pass"], false);
    assert!((residual(&report, "min_eigenvalue") + 1.0).abs() <= 1e-9);

    let (code, report) = run(&["cpm", "is-cp", &file, "bit_flip"]);
    assert_eq!(code, 0);
    assert!(residual(&report, "min_eigenvalue") >= 0.0);

    let (code, report) = run(&["cpm", "purify", &file, "transpose_map"]);
    assert_eq!(code, 1);
    assert!((residual(&report, "min_eigenvalue") + 1.0).abs() <= 1e-9);
}

#[test]
fn realize_matches_index_loops() {
    let fx = Fixture::new();
    let file = fx.gens();
    let (code, report) = run(&["cpm", "realize", &file, "bit_flip"]);
    assert_eq!(code, 0);
    let s = decode(&report["details"]["superoperator"]);
    let k: Vec<ComplexMatrix> = bit_flip()["kraus"].as_array().unwrap().iter().map(decode).collect();
    for r in 0..4 {
        for col in 0..4 {
            let expected: Complex64 = k
                .iter()
                .map(|k| k.get(r / 2, col / 2) * k.get(r % 2, col % 2).conj())
                .sum();
            assert!((s.get(r, col) - expected).norm() <= 1e-12);
        }
    }
}

#[test]
fn transformation_results_reload_as_entities() {
    let fx = Fixture::new();
    let file = fx.gens();
    let (code, composed) = run(&["cpm", "compose", &file, "bit_flip", "prepare"]);
    assert_eq!(code, 0);
    let (_, tensored) = run(&["cpm", "tensor", &file, "bit_flip", "prepare"]);
    let (_, dagger) = run(&["cpm", "dagger", &file, "prepare"]);
    assert_eq!(tensored["details"]["result"]["dim_out"], 4);
    assert_eq!(dagger["details"]["result"]["dim_in"], 2);

    let again = fx.write(
        "again.json",
        json!({ "composed": composed["details"]["result"].clone(), "ref": transpose_map() }),
    );
    let (code, realized) = run(&["cpm", "realize", &again, "composed"]);
    assert_eq!(code, 0);
    let s = decode(&realized["details"]["superoperator"]);
    // bit flip applied to |0><0| gives diag(0.75, 0.25).
    assert!((s.get(0, 0).re - 0.75).abs() <= 1e-12);
    assert!((s.get(3, 0).re - 0.25).abs() <= 1e-12);
}

#[test]
fn choi_of_identity() {
    let fx = Fixture::new();
    let file = fx.write(
        "id.json",
        json!({"id": {"kind": "cpm", "dim_in": 2, "dim_out": 2, "kraus": [[[c(1.0), c(0.0)], [c(0.0), c(1.0)]]]}}),
    );
    let (code, report) = run(&["cpm", "choi", &file, "id"]);
    assert_eq!(code, 0);
    let ev: Vec<f64> = report["details"]["eigenvalues"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_f64().unwrap())
        .collect();
    assert_eq!(ev.len(), 4);
    for (x, y) in ev.iter().zip([2.0, 0.0, 0.0, 0.0]) {
        assert!((x - y).abs() <= 1e-9);
    }
}

#[test]
fn cpstar_commands() {
    let fx = Fixture::new();
    let file = fx.gens();
    assert_eq!(run(&["cpstar", "is-member", &file, "stochastic"]).0, 0);
    let (code, report) = run(&["cpstar", "is-member", &file, "negative"]);
    assert_eq!(code, 1);
    assert!(residual(&report, "min_eigenvalue") < 0.0);

    let (code, report) = run(&["cpstar", "purify", &file, "stochastic"]);
    assert_eq!(code, 0);
    assert!(residual(&report, "roundtrip") <= 1e-8);
    assert_eq!(run(&["cpstar", "purify", &file, "negative"]).0, 1);

    let (code, report) = run(&["cpstar", "realize", &file, "flip"]);
    assert_eq!(code, 0);
    let map = decode(&report["details"]["map"]);
    assert!((map.get(0, 1).re - 1.0).abs() <= 1e-12 && map.get(0, 0).norm() <= 1e-12);

    let (code, report) = run(&["cpstar", "compose", &file, "flip", "stochastic"]);
    assert_eq!(code, 0);
    let map = decode(&report["details"]["map"]);
    assert!((map.get(0, 0).re - 0.1).abs() <= 1e-12 && (map.get(1, 0).re - 0.9).abs() <= 1e-12);

    // No witness to realize.
    let out = run_command(["cpkit", "cpstar", "realize", &file, "stochastic"]);
    assert_eq!(out.code, 2);
}

#[test]
fn env_and_dec_checks() {
    let fx = Fixture::new();
    let file = fx.gens();
    let (code, report) = run(&["env", "check", &file, "--samples", "6", "--seed", "3"]);
    assert_eq!(code, 0, "{report}");
    assert_eq!(report["details"]["model_morphisms"], json!(["bit_flip", "prepare"]));
    let (code, _) = run(&["env", "check", &file, "--samples", "6", "--family", "sign-flipped"]);
    assert_eq!(code, 1);

    let (code, report) = run(&["dec", "check", &file, "--samples", "4"]);
    assert_eq!(code, 0, "{report}");
    assert_eq!(report["details"]["structures"], json!(["c2", "pants2"]));
    assert_eq!(report["details"]["model_morphisms"], json!(["flip"]));
    let (code, report) = run(&["dec", "check", &file, "--samples", "4", "--family", "sign-flipped"]);
    assert_eq!(code, 1);
    assert!(report["details"]["failures"]
        .as_array()
        .unwrap()
        .iter()
        .any(|f| f.as_str().unwrap().starts_with("ii/")));
}

#[test]
fn theorems_with_no_samples_is_an_empty_pass() {
    let (code, report) = run(&["theorems", "run", "--kind", "cpm", "--samples", "0", "--seed", "1"]);
    assert_eq!(code, 0);
    assert_eq!(report["pass"], true);
    assert_eq!(report["residuals"], json!([]));
    assert_eq!(report["details"]["failures"], json!([]));
}

#[test]
fn theorems_small_runs_pass() {
    for kind in ["cpm", "cpstar"] {
        let (code, report) = run(&["theorems", "run", "--kind", kind, "--samples", "3", "--seed", "7"]);
        assert_eq!(code, 0, "{report}");
        assert!(!report["residuals"].as_array().unwrap().is_empty());
    }
}

#[test]
fn json_output_is_deterministic() {
    let fx = Fixture::new();
    let file = fx.gens();
    for args in [
        vec![
            "--json",
            "env",
            "check",
            file.as_str(),
            "--samples",
            "5",
            "--seed",
            "11",
        ],
        vec![
            "--json",
            "dec",
            "check",
            file.as_str(),
            "--samples",
            "3",
            "--seed",
            "11",
        ],
        vec![
            "--json",
            "theorems",
            "run",
            "--kind",
            "cpstar",
            "--samples",
            "2",
            "--seed",
            "11",
        ],
    ] {
        let mut argv = vec!["cpkit"];
        argv.extend(args);
        let a = run_command(argv.clone());
        let b = run_command(argv);
        assert_eq!(a, b);
    }
}

#[test]
fn load_errors_exit_2_with_the_entity_name() {
    let fx = Fixture::new();
    let bad = json!({"kind": "cpm", "dim_in": 2, "dim_out": 2, "kraus": [[[c(1.0), c(0.0)]]]});
    let file = fx.write("bad.json", json!({ "broken_channel": bad }));
    let out = run_command(["cpkit", "cpm", "realize", &file, "broken_channel"]);
    assert_eq!(out.code, 2);
    assert!(out.stdout.is_empty());
    assert!(
        out.stderr.contains("broken_channel") && out.stderr.contains("kraus"),
        "{}",
        out.stderr
    );

    let typo = fx.write(
        "typo.json",
        json!({ "c2": {"kind": "frobenius", "dim": 2, "mult": [], "unit": [], "units": []} }),
    );
    let out = run_command(["cpkit", "check", "frobenius", &typo, "c2"]);
    assert_eq!(out.code, 2);
    assert!(out.stderr.contains("units"), "{}", out.stderr);

    let junk = fx.write_raw("junk.json", "{ not json");
    assert_eq!(run_command(["cpkit", "check", "frobenius", &junk, "x"]).code, 2);
    let missing = fx.dir.path().join("absent.json");
    assert_eq!(
        run_command(["cpkit", "check", "frobenius", missing.to_str().unwrap(), "x"]).code,
        2
    );
}

#[test]
fn empty_model_is_valid() {
    let fx = Fixture::new();
    let file = fx.write("empty.json", json!({}));
    let (code, report) = run(&["dec", "check", &file, "--samples", "5"]);
    assert_eq!(code, 0);
    assert_eq!(report["residuals"], json!([]));
    let out = run_command(["cpkit", "cpm", "realize", &file, "nothing"]);
    assert_eq!(out.code, 2);
    assert!(out.stderr.contains("nothing"));
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(run_command(["cpkit", "frobnicate"]).code, 2);
    assert_eq!(run_command(["cpkit", "theorems", "run", "--kind", "zx"]).code, 2);
    let out = run_command([
        "cpkit",
        "--eps",
        "-1",
        "theorems",
        "run",
        "--kind",
        "cpm",
        "--samples",
        "0",
    ]);
    assert_eq!(out.code, 2);
    assert!(out.stderr.contains("structural_eps"));
    let help = run_command(["cpkit", "--help"]);
    assert_eq!(help.code, 0);
    assert!(help.stdout.contains("theorems"));
}

#[test]
fn wrong_entity_kinds_exit_2() {
    let fx = Fixture::new();
    let file = fx.gens();
    assert_eq!(run_command(["cpkit", "cpm", "realize", &file, "c2"]).code, 2);
    assert_eq!(run_command(["cpkit", "check", "frobenius", &file, "bit_flip"]).code, 2);
    assert_eq!(
        run_command(["cpkit", "cpm", "compose", &file, "prepare", "prepare"]).code,
        2
    );
}

#[test]
fn binary_uses_the_same_exit_codes() {
    let fx = Fixture::new();
    let file = fx.gens();
    let bin = env!("CARGO_BIN_EXE_cpkit");
    let ok = Command::new(bin)
        .args(["check", "frobenius", &file, "pants2"])
        .output()
        .unwrap();
    assert_eq!(ok.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&ok.stdout).contains("PASS"));
    let fail = Command::new(bin)
        .args(["--json", "cpm", "is-cp", &file, "transpose_map"])
        .output()
        .unwrap();
    assert_eq!(fail.status.code(), Some(1));
    let v: Value = serde_json::from_slice(&fail.stdout).unwrap();
    assert_eq!(v["command"], "cpm is-cp transpose_map");
    let bad = Command::new(bin)
        .args(["check", "frobenius", "/nonexistent/model.json", "x"])
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
    assert!(!bad.stderr.is_empty());
}
