use ipfe_core::config::{parse_config, RunConfig};
use ipfe_core::validate::{check_a2, check_a3, check_a8, run_validate};
use ipfe_core::Execution;

fn reference() -> RunConfig {
    parse_config(include_str!("../../../configs/reference.json")).unwrap()
}

#[test]
fn statistical_checks_pass_with_another_seed() {
    let base = reference();
    let cfg = base.clone().with_seed(987_654_321);
    let exec = Execution::default();
    for (a, b) in [
        (check_a2(&base, exec), check_a2(&cfg, exec)),
        (check_a3(&base, exec), check_a3(&cfg, exec)),
        (check_a8(&base, exec), check_a8(&cfg, exec)),
    ] {
        println!("{}\n{}", a.line(), b.line());
        assert!(b.passed, "{}", b.line());
        assert_ne!(a.measured, b.measured);
    }
}

#[test]
fn report_is_deterministic_and_complete() {
    let mut cfg = reference();
    cfg.plan.n_realizations = 500;
    let a = run_validate(&cfg, Execution::Sequential, 1);
    let b = run_validate(&cfg, Execution::Parallel, 4);
    let ids: Vec<_> = a.checks.iter().map(|c| c.id.as_str()).collect();
    assert_eq!(ids, ["A1", "A2", "A3", "A4", "A5", "A6", "A7", "A8", "A9"]);
    for (x, y) in a.checks.iter().zip(&b.checks) {
        assert_eq!(x.measured.to_bits(), y.measured.to_bits(), "{}", x.id);
    }
    assert_eq!(a.passed, a.checks.iter().all(|c| c.passed));

    let json: serde_json::Value = serde_json::from_str(&a.to_json()).unwrap();
    assert_eq!(json["checks"].as_array().unwrap().len(), 9);
    assert_eq!(json["environment"]["master_seed"], cfg.plan.master_seed);
    assert!(json["checks"][1]["standard_error"].as_f64().is_some());
    let text = a.to_text();
    assert_eq!(text.lines().filter(|l| l.starts_with("PASS A") || l.starts_with("FAIL A")).count(), 9);
    assert!(text.ends_with("overall: PASS\n") || text.ends_with("overall: FAIL\n"));
}

#[test]
fn too_few_realizations_fail_coherence_check() {
    let mut cfg = reference();
    cfg.plan.n_realizations = 100;
    let r = check_a3(&cfg, Execution::default());
    assert!(!r.passed);
}
