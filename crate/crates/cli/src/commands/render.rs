//! `render`: one polygon per depth-`d` word, shaded by cell mass.
//!
//! Opacity is proportional to `m(w)·N^{|w|}`, normalised by the level
//! maximum, so heavier cells draw darker and uniform masses draw flat.
//! Output is SVG 1.1 or binary PPM (P6), chosen by the file extension.

use std::fs;
use std::path::PathBuf;

use fractal_chain::rat::{self, pow, to_f64, Rational};
use num_bigint::BigInt;

use crate::args::Invocation;
use crate::commands::{build_chain, EXIT_OK, EXIT_USAGE};
use crate::config::Fixture;

struct Cell {
    word: String,
    polygon: Vec<[f64; 2]>,
    mass: Rational,
    opacity: f64,
}

pub fn run(inv: &Invocation, fixture: &Fixture) -> i32 {
    if fixture.dimension != 2 {
        eprintln!(
            "render needs a 2-D fractal; {} has dimension {}",
            fixture.name, fixture.dimension
        );
        return EXIT_USAGE;
    }
    let depth = inv.depth.unwrap_or(3);
    let out = inv
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from(format!("{}-depth{}.svg", fixture.name, depth)));

    let chain = match build_chain(fixture, depth) {
        Ok(c) => c,
        Err(code) => return code,
    };
    let n_factor = Rational::from_integer(BigInt::from(fixture.ifs.alphabet as i64));
    let scale = pow(&n_factor, depth);
    let level = chain.levels.level(depth);
    let shades: Vec<Rational> = level
        .words
        .iter()
        .map(|w| chain.mass(w) * &scale)
        .collect();
    let max_shade = shades.iter().max().expect("level nonempty").clone();

    let mut cells = Vec::with_capacity(level.words.len());
    for (w, shade) in level.words.iter().zip(&shades) {
        let polygon = match fixture.ifs.cell_polygon_f64(w) {
            Ok(p) => p
                .into_iter()
                .map(|pt| [pt[0], pt[1]])
                .collect::<Vec<[f64; 2]>>(),
            Err(e) => {
                eprintln!("cannot compute cell polygon: {e}");
                return EXIT_USAGE;
            }
        };
        cells.push(Cell {
            word: w.render(fixture.ifs.alphabet),
            polygon,
            mass: chain.mass(w),
            opacity: to_f64(&(shade / &max_shade)).clamp(0.0, 1.0),
        });
    }

    let bytes = match out.extension().and_then(|e| e.to_str()) {
        Some("svg") | None => svg(&cells, &inv.palette).into_bytes(),
        Some("ppm") => ppm(&cells),
        Some(other) => {
            eprintln!("unsupported render format {other:?} (use .svg or .ppm)");
            return EXIT_USAGE;
        }
    };
    if let Err(e) = fs::write(&out, bytes) {
        eprintln!("cannot write {}: {e}", out.display());
        return EXIT_USAGE;
    }
    println!("wrote {} ({} cells)", out.display(), cells.len());
    EXIT_OK
}

fn bounds(cells: &[Cell]) -> (f64, f64, f64, f64) {
    let mut min_x = f64::INFINITY;
    let mut min_y = f64::INFINITY;
    let mut max_x = f64::NEG_INFINITY;
    let mut max_y = f64::NEG_INFINITY;
    for c in cells {
        for p in &c.polygon {
            min_x = min_x.min(p[0]);
            max_x = max_x.max(p[0]);
            min_y = min_y.min(p[1]);
            max_y = max_y.max(p[1]);
        }
    }
    (min_x, min_y, max_x, max_y)
}

fn svg(cells: &[Cell], palette: &str) -> String {
    let (min_x, min_y, max_x, max_y) = bounds(cells);
    let w = max_x - min_x;
    let h = max_y - min_y;
    let margin = 0.02 * w.max(h);
    let mut out = String::new();
    out.push_str(&format!(
        "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n\
         <svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" \
         viewBox=\"{:.6} {:.6} {:.6} {:.6}\">\n",
        min_x - margin,
        min_y - margin,
        w + 2.0 * margin,
        h + 2.0 * margin
    ));
    out.push_str("<g stroke=\"none\">\n");
    for c in cells {
        // Flip y so the fractal draws upright in screen coordinates.
        let points: Vec<String> = c
            .polygon
            .iter()
            .map(|p| format!("{:.6},{:.6}", p[0], min_y + max_y - p[1]))
            .collect();
        out.push_str(&format!(
            "<polygon points=\"{}\" fill=\"{}\" fill-opacity=\"{:.6}\" \
             data-word=\"{}\" data-mass=\"{}\"/>\n",
            points.join(" "),
            palette,
            c.opacity,
            c.word,
            rat::format(&c.mass)
        ));
    }
    out.push_str("</g>\n</svg>\n");
    out
}

fn ppm(cells: &[Cell]) -> Vec<u8> {
    let (min_x, min_y, max_x, max_y) = bounds(cells);
    let width: usize = 640;
    let aspect = (max_y - min_y) / (max_x - min_x);
    let height = ((width as f64) * aspect).ceil().max(1.0) as usize;
    let mut shade = vec![0.0f64; width * height];
    let to_px = |x: f64| (x - min_x) / (max_x - min_x) * (width as f64 - 1.0);
    let to_py = |y: f64| (max_y - y) / (max_y - min_y) * (height as f64 - 1.0);
    for c in cells {
        let xs: Vec<f64> = c.polygon.iter().map(|p| to_px(p[0])).collect();
        let ys: Vec<f64> = c.polygon.iter().map(|p| to_py(p[1])).collect();
        let x0 = xs.iter().cloned().fold(f64::INFINITY, f64::min).floor() as usize;
        let x1 = (xs.iter().cloned().fold(0.0, f64::max).ceil() as usize).min(width - 1);
        let y0 = ys.iter().cloned().fold(f64::INFINITY, f64::min).floor() as usize;
        let y1 = (ys.iter().cloned().fold(0.0, f64::max).ceil() as usize).min(height - 1);
        for py in y0..=y1 {
            for px in x0..=x1 {
                if inside(&xs, &ys, px as f64 + 0.5, py as f64 + 0.5) {
                    let cell = &mut shade[py * width + px];
                    *cell = cell.max(c.opacity);
                }
            }
        }
    }
    let mut out = format!("P6\n{width} {height}\n255\n").into_bytes();
    for s in shade {
        let v = (255.0 * (1.0 - 0.88 * s)) as u8;
        out.extend_from_slice(&[v, v, v]);
    }
    out
}

/// Point-in-convex-polygon by uniform orientation of edge cross products.
fn inside(xs: &[f64], ys: &[f64], px: f64, py: f64) -> bool {
    let n = xs.len();
    let mut sign = 0.0f64;
    for i in 0..n {
        let j = (i + 1) % n;
        let cross = (xs[j] - xs[i]) * (py - ys[i]) - (ys[j] - ys[i]) * (px - xs[i]);
        if cross.abs() < 1e-12 {
            continue;
        }
        if sign == 0.0 {
            sign = cross.signum();
        } else if cross.signum() != sign {
            return false;
        }
    }
    true
}
