//! `boundary`: homeomorphism diagnostics over a file of eventually-periodic
//! word pairs, reported as JSON.

use std::fs;
use std::sync::Arc;

use fractal_chain::boundary::{homeomorphism_diagnostic, BoundaryVerdict};
use fractal_chain::kernel::KernelPair;
use fractal_chain::rat::{self, to_f64};
use fractal_chain::word::InfiniteWord;
use serde_json::json;

use crate::args::Invocation;
use crate::commands::{build_levels, EXIT_OK, EXIT_USAGE};
use crate::config::Fixture;

pub fn run(inv: &Invocation, fixture: &Fixture) -> i32 {
    let depths = inv.depths.clone().unwrap_or_else(|| vec![4, 6, 8]);
    if depths.is_empty() {
        eprintln!("--depths must name at least one truncation depth");
        return EXIT_USAGE;
    }
    let table_depth = inv.depth.unwrap_or(0).max(*depths.iter().max().unwrap());

    let Some(pairs_path) = &inv.pairs else {
        eprintln!("boundary needs --pairs FILE");
        return EXIT_USAGE;
    };
    let text = match fs::read_to_string(pairs_path) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("cannot read {}: {e}", pairs_path.display());
            return EXIT_USAGE;
        }
    };
    let n = fixture.ifs.alphabet;
    let mut pairs = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split_whitespace();
        let (Some(left), Some(right), None) = (parts.next(), parts.next(), parts.next()) else {
            eprintln!("{}:{}: expected `u(c) u'(c')`", pairs_path.display(), lineno + 1);
            return EXIT_USAGE;
        };
        let parse = |s: &str| InfiniteWord::parse(s, n);
        match (parse(left), parse(right)) {
            (Ok(l), Ok(r)) => pairs.push((l, r)),
            (Err(e), _) | (_, Err(e)) => {
                eprintln!("{}:{}: {e}", pairs_path.display(), lineno + 1);
                return EXIT_USAGE;
            }
        }
    }
    if pairs.is_empty() {
        eprintln!("{}: no pairs found", pairs_path.display());
        return EXIT_USAGE;
    }

    let levels = match build_levels(fixture, table_depth) {
        Ok(l) => l,
        Err(code) => return code,
    };
    let kernel_pair = match KernelPair::build(Arc::clone(&levels), fixture.masses.clone()) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("cannot build chains: {e}");
            return EXIT_USAGE;
        }
    };
    let report = match homeomorphism_diagnostic(&kernel_pair, &pairs, &depths, 2) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("boundary diagnostic failed: {e}");
            return EXIT_USAGE;
        }
    };

    let body = json!({
        "fixture": fixture.name,
        "truncation_depths": report.truncation_depths,
        "fingerprint_depth": report.fingerprint_depth,
        "rank_correlation": report.rank_correlation,
        "pairs": report
            .pairs
            .iter()
            .map(|p| {
                let (n0, equivalent) = match p.verdict {
                    BoundaryVerdict::EquivalentFrom(n0) => (Some(n0), true),
                    BoundaryVerdict::NotEquivalentUpTo(_) => (None, false),
                };
                json!({
                    "left": p.left.render(n),
                    "right": p.right.render(n),
                    "equivalent": equivalent,
                    "n0": n0,
                    "address_distance": p.address_distance,
                    "addresses_equal_exact": p.addresses_equal_exact,
                    "rho_by_depth": p.rho_by_depth.iter()
                        .map(|(d, r)| json!([d, rat::format(r), to_f64(r)]))
                        .collect::<Vec<_>>(),
                    "hom_rho_by_depth": p.hom_rho_by_depth.iter()
                        .map(|(d, r)| json!([d, rat::format(r), to_f64(r)]))
                        .collect::<Vec<_>>(),
                    "kernel_limits_equal": p.kernel_limits_equal,
                    "hom_kernel_limits_equal": p.hom_kernel_limits_equal,
                })
            })
            .collect::<Vec<_>>(),
    });
    let rendered = serde_json::to_string_pretty(&body).unwrap();
    match &inv.out {
        Some(path) => {
            if let Err(e) = fs::write(path, rendered + "\n") {
                eprintln!("cannot write {}: {e}", path.display());
                return EXIT_USAGE;
            }
            println!("wrote {}", path.display());
        }
        None => println!("{rendered}"),
    }
    EXIT_OK
}
