// Round-trip a fixture through JSONL and export its samples as CSV.

use std::error::Error;

use vmpt::generator::{paper_fixture, FixtureId};
use vmpt::trace_io::{from_bytes, to_bytes, write_csv};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let trace = paper_fixture(FixtureId::Example3Env10);
    let doc = to_bytes(&trace)?;
    assert_eq!(from_bytes(&doc)?, trace);
    print!("{}", String::from_utf8(doc)?.lines().take(3).collect::<Vec<_>>().join("\n"));
    println!();

    let mut csv = Vec::new();
    write_csv(&trace, &mut csv)?;
    print!("{}", String::from_utf8(csv)?);
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
