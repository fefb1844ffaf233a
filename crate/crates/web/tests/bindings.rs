use epochsim_web::{clamp, compare, vote};
use serde_json::Value;

fn parse(s: String) -> Value {
    serde_json::from_str(&s).unwrap()
}

#[test]
fn compare_reports_three_runs() {
    let v = parse(compare("s3", 1));
    assert_eq!(v["scenario"], "s3");
    for k in ["baseline", "oe", "eov"] {
        assert_eq!(v[k]["daily"].as_array().unwrap().len(), 30, "{k}");
    }
    assert_eq!(v["eov"]["monthly_saving"], v["baseline"]["monthly_saving"]);
    assert_ne!(v["oe"]["monthly_saving"], v["baseline"]["monthly_saving"]);
    assert!(v["eov"]["receipts"]["invalidated_mvcc_conflict"].as_u64().unwrap() >= 25);
}

#[test]
fn compare_rejects_unknown_scenario() {
    assert!(parse(compare("s9", 1))["error"].is_string());
}

#[test]
fn vote_picks_the_agreeing_pair() {
    let v = parse(vote("20,1000,50", "20.4,1002,51", "23,1000,50", "1,1,1"));
    assert_eq!(v["sample"], serde_json::json!(["20.200", "1001.000", "50.500"]));
    assert_eq!(v["reliability"], "2.000");

    let v = parse(vote("", "", "5,,", "1,1,2"));
    assert_eq!(v["sample"], serde_json::json!(["5.000", null, null]));
    assert_eq!(v["reliability"], "2.000");

    assert!(parse(vote("1,2", "", "", "1,1,1"))["error"].is_string());
    assert!(parse(vote("", "", "", "1,1"))["error"].is_string());
}

#[test]
fn clamp_reports_changes_and_nulls() {
    let v = parse(clamp("0,0,0"));
    assert_eq!(v["sample"], serde_json::json!(["0.000", "850.000", "0.000"]));
    assert_eq!(v["changed"], true);
    assert_eq!(parse(clamp("20,1000,50"))["changed"], false);
    assert!(parse(clamp(",1000,50"))["exception"].is_string());
}
