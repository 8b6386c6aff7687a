use std::io::Write;

use coleman_core::cli::*;
use coleman_core::PrecisionProfile;

fn argv(s: &str) -> Vec<String> {
    s.split_whitespace().map(String::from).collect()
}

fn temp_config(name: &str, body: &str) -> std::path::PathBuf {
    let path = std::env::temp_dir().join(format!("coleman-{}-{name}.json", std::process::id()));
    std::fs::File::create(&path)
        .unwrap()
        .write_all(body.as_bytes())
        .unwrap();
    path
}

#[test]
fn empty_file_gives_defaults() {
    let path = temp_config("empty", "");
    let c = load_config(&path).unwrap();
    assert_eq!(c.p, 3);
    assert_eq!(c.profile, PrecisionProfile::new(20, 200, 32).unwrap());
}

#[test]
fn flags_override_file_values() {
    let path = temp_config("override", r#"{"p": 5, "profile": "15,80,16", "ap": 5, "k": 2}"#);
    let c = parse_args(&argv(&format!("rho --config {} --p 3 --ap 0", path.display()))).unwrap();
    assert_eq!((c.p, c.ap, c.k), (3, Some(0), Some(2)));
    assert_eq!(c.profile, PrecisionProfile::new(15, 80, 16).unwrap());
}

#[test]
fn invalid_configurations_are_usage_errors() {
    let bad_prime = temp_config("prime", r#"{"p": 4}"#);
    assert!(load_config(&bad_prime).is_err());
    let bad_key = temp_config("key", r#"{"prime": 3}"#);
    assert!(load_config(&bad_key).is_err());
    let missing = std::env::temp_dir().join("coleman-does-not-exist.json");
    let ex = run(&argv(&format!(
        "verify --suite operators --config {}",
        missing.display()
    )));
    assert_eq!(ex.code, EXIT_USAGE);
    assert_eq!(
        run(&argv("verify --suite operators --profile 20,10,32")).code,
        EXIT_USAGE
    );
}

#[test]
fn reports_are_versioned_and_deterministic() {
    let cmd = argv("image --p 3 --k 3 --ap 0 --eta 1 --profile 15,80,16 --seed 5");
    let a = run(&cmd);
    assert_eq!(a.code, EXIT_PASS, "{}", a.summary);
    let r = a.report.clone().unwrap();
    assert_eq!(r["schema"], SCHEMA);
    assert_eq!(r["profile"]["DX"], 16);
    assert!(r["precision"].as_i64().unwrap() >= 15);
    let ids: Vec<&str> = r["checks"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["id"].as_str().unwrap())
        .collect();
    let mut sorted = ids.clone();
    sorted.sort();
    assert_eq!(ids, sorted);
    assert_eq!(a.report_text(), run(&cmd).report_text());
}

#[test]
fn ordinary_and_weil_violations_are_rejected() {
    assert_eq!(
        run(&argv("image --p 3 --k 2 --ap 1 --profile 15,80,16")).code,
        EXIT_USAGE
    );
    assert_eq!(
        run(&argv("image --p 3 --k 2 --ap 9 --eta 1 --profile 15,80,16")).code,
        EXIT_USAGE
    );
    assert_eq!(
        run(&argv("image --p 5 --k 2 --ap 5 --formal --profile 15,80,16")).code,
        EXIT_PASS
    );
}

#[test]
fn help_exits_cleanly() {
    let ex = run(&argv("--help"));
    assert_eq!(ex.code, EXIT_PASS);
    assert!(ex.summary.contains("logmatrix"));
}
