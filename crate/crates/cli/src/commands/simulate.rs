//! `simulate`: Monte-Carlo occupancy of the chain against the predicted
//! law `P(X_n = w) = m(w)`, with per-word z-scores.

use std::collections::BTreeMap;

use fractal_chain::chain::path_stream_seed;
use fractal_chain::rat::{self, to_f64};
use fractal_chain::word::Word;
use serde_json::json;

use crate::args::Invocation;
use crate::commands::{build_chain, EXIT_OK, EXIT_USAGE};
use crate::config::Fixture;

pub fn run(inv: &Invocation, fixture: &Fixture) -> i32 {
    let depth = inv.depth.unwrap_or(3);
    if inv.paths == 0 {
        eprintln!("--paths must be at least 1");
        return EXIT_USAGE;
    }
    let chain = match build_chain(fixture, depth) {
        Ok(c) => c,
        Err(code) => return code,
    };

    let mut counts: BTreeMap<Word, u64> = BTreeMap::new();
    for i in 0..inv.paths as u64 {
        let path = chain.sample_path(path_stream_seed(inv.seed, i), depth);
        *counts.entry(path.last().expect("nonempty").clone()).or_insert(0) += 1;
    }

    let n = fixture.ifs.alphabet;
    let total = inv.paths as f64;
    let mut any_flagged = false;
    let mut rows = Vec::new();
    for w in &chain.levels.level(depth).words {
        let mass = chain.mass(w);
        let m = to_f64(&mass);
        let count = counts.get(w).copied().unwrap_or(0);
        let freq = count as f64 / total;
        let stderr = (m * (1.0 - m) / total).sqrt();
        let z = if stderr > 0.0 { (freq - m) / stderr } else { 0.0 };
        any_flagged |= z.abs() > 4.0;
        rows.push((w.clone(), mass, count, freq, z));
    }

    if inv.json {
        let body = json!({
            "fixture": fixture.name,
            "depth": depth,
            "paths": inv.paths,
            "seed": inv.seed,
            "flagged": any_flagged,
            "words": rows
                .iter()
                .map(|(w, mass, count, freq, z)| json!({
                    "word": w.render(n),
                    "mass": rat::format(mass),
                    "count": count,
                    "frequency": freq,
                    "z": z,
                }))
                .collect::<Vec<_>>(),
        });
        println!("{}", serde_json::to_string_pretty(&body).unwrap());
    } else {
        println!(
            "{} paths to depth {depth} on {} (seed {})",
            inv.paths, fixture.name, inv.seed
        );
        println!("{:<12} {:>12} {:>10} {:>12} {:>8}", "word", "m(w)", "count", "freq", "z");
        for (w, mass, count, freq, z) in &rows {
            println!(
                "{:<12} {:>12} {:>10} {:>12.6} {:>8.2}",
                w.render(n),
                rat::format(mass),
                count,
                freq,
                z
            );
        }
        println!(
            "occupancy {} the 4-sigma band",
            if any_flagged { "LEFT" } else { "stays within" }
        );
    }
    EXIT_OK
}
