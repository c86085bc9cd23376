mod common;

use common::{stderr_json, stdout, trident};
use serde_json::Value;

fn json_out(args: &[&str]) -> Value {
    let o = trident(args);
    assert_eq!(o.status.code(), Some(0), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_str(&stdout(&o)).unwrap()
}

#[test]
fn triple_classify() {
    let v = json_out(&["triple", "classify", "2", "3", "7"]);
    assert_eq!(v["chi"], "-1/42");
    assert_eq!(v["class"], "hyperbolic");
    assert_eq!(v["maximal"], true);
    assert_eq!(v["beta_pretty"], "lambda_7 - 1");
    let v = json_out(&["triple", "classify", "2", "3", "6"]);
    assert_eq!(v["class"], "euclidean");
}

#[test]
fn curve_report() {
    let v = json_out(&["curve", "--triple", "2,3,7", "--p", "13", "--format", "json"]);
    assert_eq!(v["group"], "PSL2(F13)");
    assert_eq!(v["genus"], 14);
    assert!(v.get("generators").is_none());
    let v = json_out(&["curve", "--triple", "2,3,7", "--p", "7", "--tower", "--with-generators"]);
    assert_eq!(v["genus_x0"], 0);
    assert_eq!(v["generators"].as_array().unwrap().len(), 3);
}

#[test]
fn curve_pretty() {
    let o = trident(&["curve", "--triple", "2,4,6", "--p", "5", "--format", "pretty"]);
    assert!(stdout(&o).lines().any(|l| l == "group: PGL2(F5)"));
}

#[test]
fn domain_errors_exit_1_with_json() {
    let o = trident(&["curve", "--triple", "2,3,9", "--p", "3"]);
    assert_eq!(o.status.code(), Some(1));
    let e = stderr_json(&o);
    assert_eq!(e["code"], "inadmissible");
    assert_eq!(e["context"]["reason"], "divides_orders");

    let o = trident(&["curve", "--triple", "2,3,6", "--p", "5"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(stderr_json(&o)["code"], "non_hyperbolic");
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(trident(&["curve", "--triple", "2,3,7"]).status.code(), Some(2));
    assert_eq!(trident(&["nonsense"]).status.code(), Some(2));
    let o = trident(&["curve", "--triple", "2,x,7", "--p", "13"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(stderr_json(&o)["code"], "invalid_input");
    assert_eq!(trident(&["census", "--gmax", "102"]).status.code(), Some(2));
}

#[test]
fn macbeath_commands() {
    let v = json_out(&["macbeath", "classify", "--q", "7", "--t", "0,1,2"]);
    assert_eq!(v["projective"], true);
    assert_eq!(v["order_triple"], serde_json::json!([2, 3, 7]));
    let o = trident(&["macbeath", "census", "--q", "7"]);
    let out = stdout(&o);
    assert_eq!(out.lines().count(), 344);
    assert_eq!(out.lines().next().unwrap(), trident::macbeath::CENSUS_HEADER);
}

#[test]
fn census_tsv_and_json() {
    let o = trident(&["census", "--gmax", "3"]);
    let lines: Vec<String> = stdout(&o).lines().map(String::from).collect();
    assert_eq!(lines[0], trident::census::TSV_HEADER);
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("3\t(2,3,7)\tPSL2(F7)\tT\t0\t"));
    let v = json_out(&["census", "--gmax", "3", "--format", "json"]);
    assert_eq!(v.as_array().unwrap().len(), 2);
    assert_eq!(v[1]["G"], "PGL2(F3)");
    assert_eq!(v[1]["arithmetic"], "T");
}

#[test]
fn fields_command() {
    let v = json_out(&["fields", "--triple", "2,3,8", "--p", "7"]);
    assert_eq!(v["F"]["pretty"], "Q(lambda_16)");
    assert_eq!(v["D_pprime_frob"], "Q(sqrt(2))");
}

#[test]
fn output_is_deterministic() {
    let a = trident(&["census", "--gmax", "8"]);
    let b = trident(&["census", "--gmax", "8"]);
    assert_eq!(a.stdout, b.stdout);
    let env = std::process::Command::new(env!("CARGO_BIN_EXE_trident"))
        .args(["census", "--gmax", "8"])
        .env("TRIDENT_THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(a.stdout, env.stdout);
}

#[test]
fn oracle_quick() {
    let o = trident(&["oracle", "--quick"]);
    let out = stdout(&o);
    assert!(out.lines().all(|l| l.starts_with("PASS ") || l.starts_with("FAIL ")));
    assert!(out.contains("PASS construct_triple_q9"));
}
