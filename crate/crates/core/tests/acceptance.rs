//! Runs every acceptance criterion and prints one PASS/FAIL line each.
//!
//! A single criterion can be selected with `RWL_CRITERIA=4,7`.

use rwl_core::selftest;

fn main() {
    let selected: Vec<u32> = match std::env::var("RWL_CRITERIA") {
        Ok(list) => list.split(',').filter_map(|s| s.trim().parse().ok()).collect(),
        Err(_) => selftest::CRITERIA.iter().map(|(id, _)| *id).collect(),
    };
    let mut failed = Vec::new();
    for id in selected {
        let r = selftest::run(id);
        println!("{}", r.line());
        if !r.pass {
            failed.push(id);
        }
    }
    if !failed.is_empty() {
        eprintln!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
