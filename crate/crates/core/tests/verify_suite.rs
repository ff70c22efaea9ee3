use hybridswap::verify::run_checks;

#[test]
fn every_check_passes() {
    let results = run_checks();
    assert_eq!(results.len(), 10);
    let failed: Vec<_> = results.iter().filter(|c| !c.passed).collect();
    assert!(failed.is_empty(), "{failed:#?}");
}
