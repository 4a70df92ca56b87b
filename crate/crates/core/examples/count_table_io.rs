//! Count tables as CSV, JSON reports and the structured errors produced for
//! malformed input.
//!
//!     cargo run --example count_table_io

use steering::io::{error_json, read_count_tables, write_count_tables};
use steering::{analyze, AliceOutcome, BoundParams, CountTable, SignificanceMode, Sign};

fn main() -> steering::Result<()> {
    // Hand-built tables for a perfect singlet seen through an ideal apparatus.
    let tables: Vec<CountTable> = (0..3)
        .map(|s| {
            let mut t = CountTable::new(s);
            t.set(AliceOutcome::Plus, Sign::Minus, 500);
            t.set(AliceOutcome::Minus, Sign::Plus, 500);
            t.set(AliceOutcome::Inconclusive, Sign::Plus, 250);
            t.set(AliceOutcome::Inconclusive, Sign::Minus, 250);
            t
        })
        .collect();

    let mut csv = Vec::new();
    write_count_tables(&mut csv, &tables)?;
    let text = String::from_utf8(csv).expect("csv is utf-8");
    print!("{text}");

    let back = read_count_tables(text.as_bytes())?;
    assert_eq!(back, tables);
    let report = analyze(&back, BoundParams::ideal(), SignificanceMode::Quadrature)?;
    println!("\n{}", serde_json::to_string_pretty(&report)?);

    for bad in [
        "setting,a,b,count\n0,+1,+1,3\n0,+1,+1,4\n",
        "setting,a,b,count\n0,+2,+1,3\n",
        "setting,a,b,count\n0,+1,-1,2.5\n",
        "setting,alice,bob,n\n",
    ] {
        let err = read_count_tables(bad.as_bytes()).unwrap_err();
        println!("{}", error_json(&err));
    }
    Ok(())
}
