//! Replays the checked-in fuzz corpus through the same round-trip checks the
//! fuzz targets make.

use std::fs;
use std::path::PathBuf;

use cqoa::algebras::{bc_algebra, parse_selector};
use cqoa::engine::Engine;
use cqoa::syntax::{parse, parse_coefficient, parse_expr, render};

fn seeds(target: &str) -> Vec<String> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut paths: Vec<PathBuf> = fs::read_dir(&dir).unwrap().map(|e| e.unwrap().path()).collect();
    paths.sort();
    assert!(!paths.is_empty(), "no seeds in {}", dir.display());
    paths.into_iter().filter_map(|p| String::from_utf8(fs::read(p).unwrap()).ok()).collect()
}

#[test]
fn parse_seeds() {
    for src in seeds("parse") {
        if let Err(e) = parse(&src) {
            assert!(e.pos.line >= 1 && e.pos.line <= src.split('\n').count(), "{e}");
        }
    }
}

#[test]
fn parse_expr_seeds() {
    let e = Engine::new(bc_algebra(2)).unwrap();
    let mut parsed = 0;
    for src in seeds("parse_expr") {
        let Ok(x) = parse_expr(&src, &e) else { continue };
        let nf = e.normal_form(&x).unwrap();
        let text = render(&nf, e.algebra());
        assert_eq!(e.normal_form(&parse_expr(&text, &e).unwrap()).unwrap(), nf, "{text}");
        parsed += 1;
    }
    assert!(parsed > 0);
}

#[test]
fn coefficient_seeds() {
    for src in seeds("coefficient") {
        if let Ok(c) = parse_coefficient(&src) {
            assert_eq!(parse_coefficient(&c.to_string()).unwrap(), c, "{src}");
        }
    }
}

#[test]
fn selector_seeds() {
    for src in seeds("selector") {
        if let Ok(s) = parse_selector(&src) {
            assert_eq!(parse_selector(&s.to_string()).unwrap(), s, "{src}");
        }
    }
}
