use std::process::{Command, Output};

use mdl_core::record::{from_json, read_csv, ExperimentRecord};
use mdl_core::realnum::rat;

fn mdl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mdl")).args(args).output().expect("binary runs")
}

fn records(args: &[&str]) -> Vec<ExperimentRecord> {
    let out = mdl(args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    read_csv(&out.stdout[..]).unwrap()
}

fn find<'a>(rs: &'a [ExperimentRecord], name: &str) -> &'a ExperimentRecord {
    rs.iter().rev().find(|r| r.experiment == name).unwrap_or_else(|| panic!("no {name} record"))
}

#[test]
fn bc_ratio_example() {
    let rs = records(&["bc-ratio", "--psi", "const:1/10", "--gamma", "rat:0", "--Q", "3"]);
    let r = find(&rs, "bc-ratio");
    assert_eq!((r.q, r.value().unwrap(), r.err().unwrap()), (3, rat(27, 80), rat(0, 1)));
}

#[test]
fn sigma_pair_example() {
    let rs = records(&["sigma-pair", "--gamma", "sqrt:2", "--beta", "sqrt:3", "--N", "2"]);
    let r = find(&rs, "sigma-pair");
    assert!(r.params.contains("witness=(1,-2)"));
    let v = r.as_enclosure().unwrap();
    assert!((v.to_f64() - 4.3252).abs() < 1e-3);
}

#[test]
fn etk_example() {
    let rs = records(&["etk", "--alpha", "const:golden", "--N", "10", "--H", "1"]);
    let v = find(&rs, "etk").as_enclosure().unwrap().to_f64();
    assert!((v - 184.2492).abs() < 1e-3, "{v}");
}

#[test]
fn json_matches_csv() {
    let args = ["cf", "--alpha", "sqrt:2", "--terms", "4"];
    let csv = records(&args);
    let out = mdl(&[&args[..], &["--format", "json"]].concat());
    assert!(out.status.success());
    assert_eq!(from_json(&String::from_utf8(out.stdout).unwrap()).unwrap(), csv);
    let quotients: Vec<String> = csv.iter().filter(|r| r.experiment == "cf.quotient").map(|r| r.value_num.clone()).collect();
    assert_eq!(quotients, ["1", "2", "2", "2", "2"]);
    assert_eq!(find(&csv, "cf.convergent").value().unwrap(), rat(41, 29));
}

#[test]
fn output_independent_of_threads() {
    let base = ["mc-survey", "--psi", "inv:1/4", "--gamma", "sqrt:3", "--Q", "500", "--samples", "16", "--seed", "5"];
    let a = mdl(&[&base[..], &["--threads", "1"]].concat());
    let b = mdl(&[&base[..], &["--threads", "3"]].concat());
    assert!(a.status.success() && b.status.success());
    assert_eq!(a.stdout, b.stdout);
    let c = mdl(&[&base[..8], &["--seed", "6"]].concat());
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn cells_are_integers() {
    let rs = records(&["disc", "--alpha", "sqrt:2", "--Q", "50"]);
    for r in &rs {
        for cell in [&r.value_num, &r.value_den, &r.err_num, &r.err_den] {
            assert!(cell.trim_start_matches('-').chars().all(|c| c.is_ascii_digit()), "{cell}");
        }
    }
}

#[test]
fn config_file_and_overrides() {
    let dir = std::env::temp_dir().join(format!("mdl-cli-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("run.cfg");
    std::fs::write(&path, "# union of arcs\nexperiment=union\npsi=const:1/10\ngamma=rat:0\nQ=2\n").unwrap();
    let p = path.to_str().unwrap();
    let rs = records(&["--config", p]);
    assert_eq!(find(&rs, "union").value().unwrap(), rat(3, 10));
    let rs = records(&["--config", p, "union", "--Q", "1"]);
    assert_eq!(find(&rs, "union").value().unwrap(), rat(1, 5));

    std::fs::write(&path, "experiment=union\npsi=const:1/10\ngamma=rat:0\nQ=2\nextra=1\n").unwrap();
    let out = mdl(&["--config", p]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 5") && err.contains("extra"), "{err}");
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn exit_codes() {
    assert_eq!(mdl(&["sigma", "--gamma", "sqrt:2"]).status.code(), Some(1));
    assert_eq!(mdl(&["sigma", "--gamma", "rat:1/2", "--N", "5"]).status.code(), Some(1));
    assert_eq!(mdl(&["cf", "--alpha", "sqrt:2", "--nope", "1"]).status.code(), Some(1));
    let lit = ["sigma", "--gamma", "dec:1.41421356237@1e-11", "--N", "5"];
    assert_eq!(mdl(&lit).status.code(), Some(1));
    assert_eq!(mdl(&[&lit[..], &["--allow-literal"]].concat()).status.code(), Some(0));
    assert_eq!(mdl(&["sklr", "--psi", "const:1/24", "--beta", "sqrt:2", "--gamma", "sqrt:3", "--q", "12", "--k", "1", "--l", "0", "--r", "5"]).status.code(), Some(1));
    // a decimal literal that cannot be refined leaves every ψ′ support test open
    let out = mdl(&["psi-prime", "--psi", "inv:1/4", "--beta", "dec:0.25@1e-3", "--omega", "1", "--Q", "40", "--precision-bits", "64"]);
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn every_subcommand_runs() {
    let runs: &[&[&str]] = &[
        &["sigma", "--gamma", "sqrt:2", "--N", "5"],
        &["omega", "--omega", "main:1", "--Q", "20"],
        &["divisors", "--q", "12"],
        &["f-avg", "--Q", "100"],
        &["aq", "--psi", "1/10", "--gamma", "sqrt:2", "--q", "3"],
        &["pairs", "--psi", "const:1/10", "--gamma", "rat:0", "--Q", "3"],
        &["master-sweep", "--psi", "inv:1/4", "--gamma", "sqrt:2", "--Q", "20"],
        &["box-count", "--params", "sqrt:2,sqrt:3", "--Q", "100", "--box", "0:1/2,1/4:1"],
        &["disc", "--alpha", "sqrt:2", "--beta", "sqrt:3", "--Q", "100", "--m", "8"],
        &["etk-auto", "--gamma", "sqrt:2", "--beta", "sqrt:3", "--N", "1000", "--sigma", "3"],
        &["div-sum", "--psi", "inv:1/2", "--beta", "sqrt:2", "--Q", "4"],
        &["gl-census", "--beta", "sqrt:2", "--Q", "100"],
        &["sklr", "--psi", "const:1/24", "--beta", "sqrt:2", "--gamma", "sqrt:3", "--q", "12", "--k", "1", "--l", "0", "--r", "4"],
        &["f-moments", "--beta", "sqrt:2", "--Q", "8", "--l", "0", "--K", "2"],
        &["hits", "--x", "rat:1/2", "--psi", "const:1/10", "--gamma", "rat:0", "--beta", "sqrt:2", "--Q", "2"],
        &["doubly-metric", "--gamma", "sqrt:2", "--N", "10", "--samples", "20"],
    ];
    for args in runs {
        let rs = records(args);
        assert!(!rs.is_empty(), "{args:?}");
    }
    let rs = records(&["divisors", "--q", "12"]);
    assert_eq!(find(&rs, "divisors.d").value().unwrap(), rat(6, 1));
    let rs = records(&["hits", "--x", "rat:1/2", "--psi", "const:1/10", "--gamma", "rat:0", "--beta", "sqrt:2", "--Q", "2"]);
    assert_eq!(find(&rs, "hits").value().unwrap(), rat(1, 1));
    let rs = records(&["div-sum", "--psi", "inv:1/2", "--beta", "sqrt:2", "--Q", "4"]);
    assert!((find(&rs, "div-sum").as_enclosure().unwrap().to_f64() - 0.3643).abs() < 1e-4);
}
