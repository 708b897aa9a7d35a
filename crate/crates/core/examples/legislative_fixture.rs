//! Writes the synthetic legislative records used by the demos and tests.
//!
//! cargo run --example legislative_fixture -- data/legislative/records.csv [seed]

use stickydp::io::write_legislative_records;
use stickydp::simulation::gen_legislative_records;

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let path = args.get(1).map_or("records.csv", String::as_str);
    let seed: u64 = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(1);
    std::fs::write(path, write_legislative_records(&gen_legislative_records(seed))).expect("write records");
    println!("{path}");
}
