// Walk the 16 environments and the capabilities each one enables.

use std::error::Error;

use vmpt::environments::enumerate_environments;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    for env in enumerate_environments() {
        let c = env.capabilities();
        let mut on = Vec::new();
        if c.horizontal {
            on.push("horizontal");
        }
        if c.vertical {
            on.push("vertical");
        }
        if c.server_overbooking {
            on.push("server-ob");
        }
        if c.network_overbooking {
            on.push("net-ob");
        }
        println!("{:<48} [{}]", env.table_row(), on.join(", "));
    }
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
