// Aggregate requested and utilized resources per datacenter and tick.

use std::error::Error;

use vmpt::analysis::{stats, stats_with_precision};
use vmpt::generator::{generate, paper_fixture, FixtureId, GeneratorConfig};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    print!("{}", stats(&paper_fixture(FixtureId::Example2Env02)).render_table());

    let mut cfg = GeneratorConfig::new("0,3".parse()?, 12, 2, 3);
    cfg.utilization_policy.allow_exceed_request = true;
    let series = stats_with_precision(&generate(&cfg)?, 2);
    for t in 0..cfg.horizon {
        let (requested, utilized, vms) = series.tick_totals(t);
        println!("t={t:<2} vms={vms:<2} cpu {}/{}  net {}/{}", utilized.cpu, requested.cpu, utilized.net, requested.net);
    }
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
