use fqre::reproduce::{render_table, run_all, run_criterion, CRITERIA};

#[test]
fn reports_are_complete_and_deterministic() {
    let first = run_all().unwrap();
    assert_eq!(first.len(), CRITERIA as usize);
    for (k, report) in first.iter().enumerate() {
        assert_eq!(report.number as usize, k + 1);
        assert!(!report.checks.is_empty(), "criterion {}", report.number);
        assert_eq!(report.passed, report.checks.iter().all(|c| c.pass != Some(false)));
    }
    assert_eq!(run_all().unwrap(), first);

    let table = render_table(&first);
    for report in &first {
        let status = if report.passed { "PASS" } else { "FAIL" };
        assert!(table.contains(&format!("criterion {}: {} [{status}]", report.number, report.title)));
    }
}

#[test]
fn single_criteria_match_the_full_run() {
    assert_eq!(run_criterion(9).unwrap(), run_all().unwrap().pop().unwrap());
    assert!(run_criterion(0).is_err());
    assert!(run_criterion(CRITERIA + 1).is_err());
}
