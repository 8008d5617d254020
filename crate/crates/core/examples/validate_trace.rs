// Validate the server-overbooking fixture in both modes, then break a static
// trace on purpose.

use std::error::Error;

use vmpt::analysis::{validate, validate_as, Mode};
use vmpt::generator::{generate, paper_fixture, FixtureId, GeneratorConfig};
use vmpt::quantity::Quantity;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let fixture = paper_fixture(FixtureId::Example1Env01);
    print!("{}", validate(&fixture, Mode::Paper).render_table());
    print!("{}", validate(&fixture, Mode::Strict).render_table());

    let mut trace = generate(&GeneratorConfig::new("0,0".parse()?, 10, 2, 5))?;
    let last = trace.samples.len() - 1;
    trace.samples[last].util.net = trace.samples[last].spec.net.saturating_sub(Quantity::ONE);
    let report = validate(&trace, Mode::Strict);
    print!("{}", report.render_table());

    // The same trace declared as network-overbooked conforms.
    println!("as (0,2): ok = {}", validate_as(&trace, Mode::Strict, "0,2".parse()?).ok);
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
