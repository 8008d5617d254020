// Print the per-tick cells of each worked-example fixture.

use std::error::Error;

use vmpt::generator::{paper_fixture, FixtureId};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    for id in FixtureId::ALL {
        let trace = paper_fixture(id);
        println!("fixture {id} (declared {})", trace.header.environment);
        for d in &trace.descriptors {
            let cells: Vec<String> = trace
                .samples_of(d.id)
                .map(|s| format!("{}/{}/{}", s.util.cpu, s.util.ram, s.util.net))
                .collect();
            println!("  {}  t={}..{}  U cpu/ram/net: {}", d.id, d.t_init, d.t_end, cells.join("  "));
        }
    }
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
