use holant::acceptance::{run_all, CRITERIA};

#[test]
fn acceptance() {
    let reports = run_all(2024);
    assert_eq!(reports.len(), CRITERIA.len());
    for r in &reports {
        println!("{r}");
    }
    let failed: Vec<u8> = reports.iter().filter(|r| !r.passed).map(|r| r.id).collect();
    assert!(failed.is_empty(), "failing criteria: {failed:?}");
}
