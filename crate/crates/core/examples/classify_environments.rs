// Classify generated traces and the fixtures, with and without counting
// service arrivals as horizontal elasticity.

use std::error::Error;

use vmpt::analysis::classify;
use vmpt::environments::enumerate_environments;
use vmpt::generator::{generate, paper_fixture, FixtureId, GeneratorConfig};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    for env in enumerate_environments() {
        let mut cfg = GeneratorConfig::new(env, 30, 3, 11);
        cfg.guarantee_dynamics = true;
        let got = classify(&generate(&cfg)?, false)?;
        println!("generated for {env} -> classified {got}");
    }
    for id in FixtureId::ALL {
        let trace = paper_fixture(id);
        println!(
            "fixture {id}: strict {}  arrivals as horizontal {}",
            classify(&trace, false)?,
            classify(&trace, true)?
        );
    }
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
