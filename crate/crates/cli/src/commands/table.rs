//! `table`: deterministic CSV export of the chain and kernel tables.
//!
//! `chain.csv` holds `v,w,gap,g,q`; `kernel.csv` holds
//! `v,w,k,k_hom,bridge_factor`. Values are exact `num/den` strings; rows are
//! sorted lexicographically by `(v, w)`, so identical inputs give identical
//! bytes.

use std::fs;
use std::path::Path;

use fractal_chain::kernel::{bridge_factor, martin_kernel, KernelPair};
use fractal_chain::rat;
use fractal_chain::word::gap;

use crate::args::Invocation;
use crate::commands::{build_levels, EXIT_OK, EXIT_USAGE};
use crate::config::Fixture;

/// RFC-4180-style quoting; only needed when words carry commas (N > 9).
fn field(s: String) -> String {
    if s.contains(',') || s.contains('"') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s
    }
}

pub fn run(inv: &Invocation, fixture: &Fixture) -> i32 {
    let depth = inv.depth.unwrap_or(4);
    let out_dir = inv
        .out
        .clone()
        .unwrap_or_else(|| Path::new("tables").join(&fixture.name));
    if let Err(e) = fs::create_dir_all(&out_dir) {
        eprintln!("cannot create {}: {e}", out_dir.display());
        return EXIT_USAGE;
    }

    let levels = match build_levels(fixture, depth) {
        Ok(l) => l,
        Err(code) => return code,
    };
    let pair = match KernelPair::build(levels, fixture.masses.clone()) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("cannot build chain: {e}");
            return EXIT_USAGE;
        }
    };
    let n = fixture.ifs.alphabet;

    let mut chain_csv = String::from("v,w,gap,g,q\r\n");
    let mut kernel_csv = String::from("v,w,k,k_hom,bridge_factor\r\n");
    for (v, w, g, q) in pair.chain.all_entries() {
        chain_csv.push_str(&format!(
            "{},{},{},{},{}\r\n",
            field(v.render(n)),
            field(w.render(n)),
            gap(&v, &w),
            rat::format(&g),
            rat::format(&q)
        ));
        kernel_csv.push_str(&format!(
            "{},{},{},{},{}\r\n",
            field(v.render(n)),
            field(w.render(n)),
            rat::format(&(&g / pair.chain.mass(&w))),
            rat::format(&martin_kernel(&pair.hom, &v, &w)),
            rat::format(&bridge_factor(&pair.chain, &v))
        ));
    }

    for (name, data) in [("chain.csv", chain_csv), ("kernel.csv", kernel_csv)] {
        let path = out_dir.join(name);
        if let Err(e) = fs::write(&path, data) {
            eprintln!("cannot write {}: {e}", path.display());
            return EXIT_USAGE;
        }
        println!("wrote {}", path.display());
    }
    EXIT_OK
}
