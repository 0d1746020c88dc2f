#![no_main]

use std::sync::OnceLock;

use cqoa::algebras::bc_algebra;
use cqoa::engine::Engine;
use cqoa::syntax::{parse_expr, render};
use libfuzzer_sys::fuzz_target;

fn engine() -> &'static Engine {
    static E: OnceLock<Engine> = OnceLock::new();
    E.get_or_init(|| Engine::new(bc_algebra(2)).unwrap())
}

fuzz_target!(|data: &[u8]| {
    let Ok(src) = std::str::from_utf8(data) else {
        return;
    };
    let e = engine();
    let Ok(x) = parse_expr(src, e) else {
        return;
    };
    // keep the state spaces small
    if x.monomials().any(|m| m.weight() > 10 || m.len() > 6) {
        return;
    }
    let nf = e.normal_form(&x).unwrap();
    let text = render(&nf, e.algebra());
    let back = parse_expr(&text, e).unwrap();
    assert_eq!(e.normal_form(&back).unwrap(), nf, "{text}");
});
