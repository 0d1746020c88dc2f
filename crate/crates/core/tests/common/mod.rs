//! Helpers shared by the integration tests. Everything here is computed from
//! first principles so it can serve as an independent check on the engine.
#![allow(dead_code)]

use cqoa::algebras::{bc_algebra, brst_algebra, virasoro_algebra, AlgebraSpec};
use cqoa::coeff::Coefficient;
use cqoa::engine::Engine;
use cqoa::expr::FieldExpr;
use cqoa::syntax::parse_expr;

pub const LAMBDAS: [i64; 5] = [0, 1, 2, 3, -1];

pub fn int(n: i64) -> Coefficient {
    Coefficient::from_int(n)
}

pub fn sign(odd: bool) -> Coefficient {
    if odd {
        int(-1)
    } else {
        int(1)
    }
}

pub fn ghost(u: &FieldExpr) -> i32 {
    u.bidegree().map_or(0, |(g, _)| g)
}

pub fn weight(u: &FieldExpr) -> i32 {
    u.bidegree().map_or(0, |(_, w)| w)
}

/// `(−1)^{|u||v|}` for homogeneous `u`, `v`.
pub fn koszul(u: &FieldExpr, v: &FieldExpr) -> Coefficient {
    sign(ghost(u) * ghost(v) % 2 != 0)
}

pub fn nf(e: &Engine, src: &str) -> FieldExpr {
    let x = parse_expr(src, e).unwrap_or_else(|err| panic!("{src}: {err}"));
    e.normal_form(&x).unwrap()
}

/// `∂^k x / k!` by repeated differentiation.
pub fn divided(e: &Engine, x: &FieldExpr, k: u32) -> FieldExpr {
    let mut d = x.clone();
    let mut fact = int(1);
    for i in 1..=k {
        d = e.derivative(&d).unwrap();
        fact = &fact * &int(i64::from(i));
    }
    d.scale(&fact.recip().unwrap())
}

pub fn bc(lambda: i64) -> Engine {
    Engine::new(bc_algebra(lambda)).unwrap()
}

pub fn vir() -> Engine {
    Engine::new(virasoro_algebra(Coefficient::kappa())).unwrap()
}

pub fn brst(kappa: Coefficient) -> Engine {
    Engine::new(brst_algebra(kappa).unwrap().0).unwrap()
}

pub fn generators(e: &Engine) -> Vec<FieldExpr> {
    let alg: &AlgebraSpec = e.algebra();
    alg.generators().iter().map(|g| alg.field(&g.name, 0).unwrap()).collect()
}
