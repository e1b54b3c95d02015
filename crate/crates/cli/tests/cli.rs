use serde_json::Value;
use std::path::Path;
use std::process::{Command, Output};

fn fermat(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fermat")).args(args).env_remove("FERMAT_BITS").output().expect("spawn fermat")
}

fn json(args: &[&str]) -> Value {
    let mut a = args.to_vec();
    a.extend(["--format", "json"]);
    let out = fermat(&a);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stdout));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn validate(schema: &str, v: &Value) {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("schema").join(format!("{schema}.schema.json"));
    let s: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    let compiled = jsonschema::JSONSchema::compile(&s).unwrap();
    let msgs: Vec<String> = match compiled.validate(v) {
        Ok(()) => return,
        Err(errs) => errs.map(|e| format!("{} at {}", e, e.instance_path)).collect(),
    };
    panic!("{schema}: {msgs:?}");
}

const EQ: &str = "x_10*x_12/x_8/x_14";

#[test]
fn mt_equations_m15() {
    let v = json(&["mt-equations", "--m", "15", "--equation", EQ]);
    validate("mt-equations", &v);
    assert_eq!(v["rank"], 9);
    assert_eq!(v["contains"]["in_kernel"], true);
    let v = json(&["mt-equations", "--m", "15", "--equation", "x_1*x_2/x_3/x_4"]);
    assert_eq!(v["contains"]["in_kernel"], false);
}

#[test]
fn frobenius_m15_p31() {
    let v = json(&["verify-frobenius", "--m", "15", "--p", "31", "--equation", EQ]);
    validate("verify-frobenius", &v);
    assert_eq!(v["value"]["conductor"], 1);
    assert_eq!(v["value"]["coeffs"], serde_json::json!(["-1"]));
    let t = fermat(&["verify-frobenius", "--m", "15", "--p", "31", "--equation", EQ]);
    assert!(String::from_utf8(t.stdout).unwrap().trim_end().ends_with("-> -1"));
}

#[test]
fn rank_table_to_45() {
    let v = json(&["table", "--odd", "--max", "45"]);
    validate("table", &v);
    let ones: Vec<u64> =
        v["rows"].as_array().unwrap().iter().filter(|r| r["rank"] == 1).map(|r| r["m"].as_u64().unwrap()).collect();
    assert_eq!(ones, [15, 21, 33, 35, 39, 45]);
    assert!(v["rows"].as_array().unwrap().iter().all(|r| r["rank"].as_u64().unwrap() <= 1));
}

#[test]
fn monodromy_m15() {
    let v = json(&["monodromy-field", "--m", "15"]);
    validate("monodromy-field", &v);
    assert_eq!(v["rank"], 1);
    assert_eq!(v["degree_over_Q"], 16);
}

#[test]
fn polarization_m5() {
    let v = json(&["polarization", "--m", "5"]);
    validate("polarization", &v);
    let vals: Vec<&str> = v["entries"].as_array().unwrap().iter().map(|e| e[2].as_str().unwrap()).collect();
    assert_eq!(vals, ["-5/12", "-5/4", "5/4", "5/12"]);
}

#[test]
fn decompose_reports() {
    let v = json(&["decompose", "--m", "15"]);
    validate("decompose", &v);
    assert_eq!(v["genus"], 7);
    let a = json(&["decompose", "--m", "15", "--random", "--seed", "11"]);
    validate("decompose", &a);
    assert_eq!(a, json(&["decompose", "--m", "15", "--random", "--seed", "11"]));
    let f = json(&["decompose", "--m", "5", "--function", "1,1,1,1,1"]);
    validate("decompose", &f);
    assert_eq!(f["terms"].as_array().unwrap().len(), 3);
    let bad = fermat(&["decompose", "--m", "5", "--function", "0,1,0,1,0"]);
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn gross_koblitz_m5() {
    let v = json(&["gross-koblitz", "--m", "5", "--p", "11", "--gamma", "1,4", "--padic-precision", "3"]);
    validate("gross-koblitz", &v);
    assert_eq!(v["outcome"]["verdict"], "Verified");
}

#[test]
fn sato_tate_m15() {
    let v = json(&["sato-tate", "--m", "15", "--element", "8,+", "--reference"]);
    validate("sato-tate", &v);
    assert_eq!(v["group"]["order"], 16);
    assert_eq!(v["group"]["exponent"], 8);
    assert_eq!(v["identity_component"]["lattice"].as_array().unwrap().len(), 10);
    let id = json(&["sato-tate", "--m", "15", "--element", "1,+"]);
    let entries = id["rho"]["entries"].as_array().unwrap();
    assert_eq!(entries.len(), 40);
    assert!(entries.iter().all(|e| e["row"] == e["column"]));
}

#[test]
fn output_is_byte_identical() {
    let args = ["sato-tate", "--m", "15", "--format", "json"];
    assert_eq!(fermat(&args).stdout, fermat(&args).stdout);
    let args = ["monodromy-field", "--m", "21", "--format", "json"];
    assert_eq!(fermat(&args).stdout, fermat(&args).stdout);
}

#[test]
fn exit_codes() {
    assert_eq!(fermat(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(fermat(&["mt-equations"]).status.code(), Some(2));
    assert_eq!(fermat(&["mt-equations", "--m", "15", "--bits", "8"]).status.code(), Some(2));
    let out = fermat(&["verify-frobenius", "--m", "15", "--p", "7", "--equation", "x_1/x_2"]);
    assert_eq!(out.status.code(), Some(1));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    validate("error", &v);
    assert_eq!(v["error"]["code"], "NotAnEquation");
    let out = fermat(&["sato-tate", "--m", "8"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn precision_from_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_fermat"))
        .args(["monodromy-field", "--m", "9"])
        .env("FERMAT_BITS", "12")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn out_flag_writes_file() {
    let dir = std::env::temp_dir().join(format!("fermat-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let p = dir.join("pol.json");
    let out = fermat(&["polarization", "--m", "7", "--format", "json", "--out", p.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&p).unwrap()).unwrap();
    assert_eq!(v["m"], 7);
    std::fs::remove_dir_all(&dir).unwrap();
}
