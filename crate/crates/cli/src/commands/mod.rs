mod audit;
mod boundary;
mod render;
mod simulate;
mod table;
mod verify;

use std::fs;
use std::sync::Arc;

use fractal_chain::adjacency::Levels;
use fractal_chain::chain::Chain;

use crate::args::{Command, Invocation};
use crate::config::{parse_config, Fixture};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATION: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

pub fn run(inv: Invocation) -> i32 {
    let text = match fs::read_to_string(&inv.config_path) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("cannot read {}: {e}", inv.config_path.display());
            return EXIT_USAGE;
        }
    };
    let fixture = match parse_config(&text) {
        Ok(f) => f,
        Err(e) => {
            eprintln!("{e}");
            return EXIT_USAGE;
        }
    };
    if let fractal_chain::ifs::Arithmetic::Tolerance(eps) = fixture.ifs.arithmetic() {
        eprintln!("note: tolerance mode, two points coincide below ε = {eps:e}");
    }
    match inv.command {
        Command::Verify => verify::run(&inv, &fixture),
        Command::Audit => audit::run(&inv, &fixture),
        Command::Table => table::run(&inv, &fixture),
        Command::Render => render::run(&inv, &fixture),
        Command::Simulate => simulate::run(&inv, &fixture),
        Command::Boundary => boundary::run(&inv, &fixture),
    }
}

/// Builds the level structures for a fixture, reporting errors on stderr.
pub fn build_levels(fixture: &Fixture, depth: usize) -> Result<Arc<Levels>, i32> {
    let levels = Levels::build(fixture.ifs.clone(), fixture.mode.clone(), depth)
        .map(Arc::new)
        .map_err(|e| {
            eprintln!("cannot build level structures: {e}");
            EXIT_USAGE
        })?;
    for level in &levels.levels {
        if level.ambiguous {
            eprintln!(
                "warning: cell distances in (ε, 2ε) at depth {}; equivalence verdicts there \
                 are sensitive to the tolerance",
                level.depth
            );
        }
    }
    Ok(levels)
}

/// Builds the weighted chain for a fixture.
pub fn build_chain(fixture: &Fixture, depth: usize) -> Result<Chain, i32> {
    let levels = build_levels(fixture, depth)?;
    Chain::build(levels, fixture.masses.clone()).map_err(|e| {
        eprintln!("cannot build chain: {e}");
        EXIT_USAGE
    })
}
