use zeno_transfer::acceptance;

#[test]
fn acceptance_criteria() {
    let reports = acceptance::run_all();
    for r in &reports {
        println!("{r}");
    }
    let failed: Vec<u8> = reports.iter().filter(|r| !r.passed).map(|r| r.id).collect();
    assert!(failed.is_empty(), "failing criteria: {failed:?}");
}
