use std::collections::BTreeMap;

use betapot::convention::ExponentConvention;
use betapot::metric::BetaParams;
use betapot::verify::{check_example1, run_suite, suite_ids, Status, SuiteConfig, VerificationReport, SUITES};

#[test]
fn every_check_is_registered_exactly_once() {
    let src = concat!(env!("CARGO_MANIFEST_DIR"), "/src");
    let mut defined = Vec::new();
    for entry in std::fs::read_dir(src).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "rs") {
            let text = std::fs::read_to_string(&path).unwrap();
            for line in text.lines() {
                if let Some(rest) = line.trim_start().strip_prefix("pub fn check_") {
                    let name: String = rest.chars().take_while(|c| c.is_alphanumeric() || *c == '_').collect();
                    defined.push(format!("check_{name}"));
                }
            }
        }
    }
    let mut registered: BTreeMap<&str, usize> = BTreeMap::new();
    for (_, checks) in SUITES {
        for c in *checks {
            *registered.entry(c).or_default() += 1;
        }
    }
    for name in &defined {
        assert_eq!(registered.get(name.as_str()), Some(&1), "{name}");
    }
    assert_eq!(defined.len(), registered.len(), "{defined:?} vs {registered:?}");
}

#[test]
fn suite_ids_are_unique() {
    let mut ids = suite_ids();
    ids.sort();
    ids.dedup();
    assert_eq!(ids.len(), SUITES.len());
}

#[test]
fn unknown_suite_is_an_error() {
    assert!(run_suite("lemma9", &SuiteConfig::default()).is_err());
}

#[test]
fn reports_are_deterministic_and_round_trip() {
    let cfg = SuiteConfig { metric_samples: 2_000, ..SuiteConfig::default() };
    let a = run_suite("metric-axioms", &cfg).unwrap();
    let b = run_suite("metric-axioms", &cfg).unwrap();
    assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
    assert_eq!(a.hash().unwrap(), b.hash().unwrap());
    assert_eq!(a.config_hash, cfg.hash());
    assert!(a.passed());
    let back = VerificationReport::from_json(&a.to_json().unwrap()).unwrap();
    assert_eq!(back.to_json().unwrap(), a.to_json().unwrap());
    assert_eq!(back.entries.len(), a.entries.len());
    let other = run_suite("metric-axioms", &SuiteConfig { seed: 7, ..cfg }).unwrap();
    assert_ne!(other.config_hash, a.config_hash);
}

#[test]
fn example1_holds_under_both_conventions_for_isotropic_beta() {
    let bp = BetaParams::isotropic(2);
    for conv in [ExponentConvention::PaperLiteral, ExponentConvention::Generalized] {
        let cfg = SuiteConfig { example1_convention: conv, ..SuiteConfig::default() };
        let entries = check_example1(&bp, &cfg).unwrap();
        for part in ["example1.i", "example1.ii"] {
            let e = entries.iter().find(|e| e.claim_id.starts_with(part) && !e.claim_id.starts_with("example1.iii")).unwrap();
            assert_eq!(e.status, Status::Pass, "{conv:?} {}: {:?}", e.claim_id, e.notes);
        }
        assert!(entries.iter().all(|e| e.status != Status::Fail), "{conv:?}");
    }
}
