// Generate a trace for environment (3,3) and print a short summary.

use std::error::Error;

use vmpt::generator::{generate, GeneratorConfig};
use vmpt::trace_io;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let mut cfg = GeneratorConfig::new("3,3".parse()?, 20, 2, 7);
    cfg.guarantee_dynamics = true;
    let trace = generate(&cfg)?;

    println!("environment {}  seed {}", trace.header.environment, cfg.seed);
    println!(
        "{} services, {} VMs, {} events, {} samples",
        trace.service_ids().len(),
        trace.descriptors.len(),
        trace.events.len(),
        trace.samples.len()
    );
    for e in trace.events.iter().take(5) {
        println!("  t={:<3} {:?} service {}", e.t, e.kind, e.service);
    }
    let doc = trace_io::to_bytes(&trace)?;
    println!("{} bytes of JSONL, config digest {}", doc.len(), cfg.digest());
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
