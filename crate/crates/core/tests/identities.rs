//! Exhaustive checks of the structural identities over small monomial sets.

mod common;

use common::*;
use cqoa::algebras::{bc_algebra, bc_central_charge, bc_stress_tensor_in, tensor, virasoro_algebra};
use cqoa::brst::BrstContext;
use cqoa::coeff::Coefficient;
use cqoa::engine::Engine;
use cqoa::expr::FieldExpr;
use cqoa::states::StateVector;

#[test]
fn constructed_algebras_commute() {
    let mut engines: Vec<Engine> = LAMBDAS.iter().map(|&l| bc(l)).collect();
    engines.push(vir());
    engines.push(Engine::new(virasoro_algebra(int(26))).unwrap());
    engines.push(brst(Coefficient::kappa()));
    for e in &engines {
        for g in generators(e) {
            for h in generators(e) {
                assert!(e.verify_commutativity(&g, &h, -3).unwrap(), "{} {g:?} {h:?}", e.algebra().key());
            }
        }
    }
}

#[test]
fn central_charge_adds_under_tensor() {
    for lambda in LAMBDAS {
        let alg = tensor(&bc_algebra(lambda), &virasoro_algebra(Coefficient::kappa())).unwrap();
        let mut t = bc_stress_tensor_in(&alg, lambda);
        t.add_scaled(&alg.field("L", 0).unwrap(), &int(1)).unwrap();
        let e = Engine::new(alg).unwrap();
        let quartic = e.circle(&t, 3, &t).unwrap();
        let charge = &Coefficient::kappa() + &bc_central_charge(lambda);
        assert_eq!(quartic, nf(&e, "1").scale(&(&charge / &int(2))), "lambda = {lambda}");
    }
}

#[test]
fn products_of_generators_commute_with_generators() {
    for e in [bc(2), bc(-1), vir(), brst(Coefficient::kappa())] {
        let gens = generators(&e);
        for g in &gens {
            for h in &gens {
                for n in -3..i64::from(e.is_local(g, h).unwrap()) {
                    let p = e.circle(g, n, h).unwrap();
                    for k in &gens {
                        assert!(e.verify_commutativity(&p, k, -3).unwrap(), "{g:?} ∘_{n} {h:?} with {k:?}");
                    }
                }
            }
        }
    }
}

/// `:vu: = (−1)^{|u||v|} :uv: + Σ_{m≥0} (−1)^m ∂^{(m+1)}(v ∘ₘ u)`.
fn skew_symmetry(e: &Engine, max_weight: i64) {
    let monos = e.canonical_monomials_up_to(max_weight);
    for u in &monos {
        for v in &monos {
            let mut rhs = e.wick(u, v).unwrap().scale(&koszul(u, v));
            for m in 0..e.is_local(v, u).unwrap() {
                let p = e.circle(v, i64::from(m), u).unwrap();
                rhs.add_scaled(&divided(e, &p, m + 1), &sign(m % 2 == 1)).unwrap();
            }
            assert_eq!(e.wick(v, u).unwrap(), rhs, "{u:?} {v:?}");
        }
    }
}

#[test]
fn skew_symmetry_at_minus_one_to_weight_5() {
    skew_symmetry(&bc(2), 5);
    skew_symmetry(&vir(), 5);
    skew_symmetry(&brst(int(26)), 3);
}

fn quasi_associativity(e: &Engine, max_total: i32) {
    let monos = e.canonical_monomials_up_to(i64::from(max_total));
    for a in &monos {
        for b in &monos {
            let ab = e.wick(a, b).unwrap();
            for c in &monos {
                if weight(a) + weight(b) + weight(c) > max_total {
                    continue;
                }
                let mut rhs = e.wick(a, &e.wick(b, c).unwrap()).unwrap();
                for j in 0..e.is_local(b, c).unwrap() {
                    let t = e.wick(&divided(e, a, j + 1), &e.circle(b, i64::from(j), c).unwrap()).unwrap();
                    rhs.add_scaled(&t, &int(1)).unwrap();
                }
                for j in 0..e.is_local(a, c).unwrap() {
                    let t = e.wick(&divided(e, b, j + 1), &e.circle(a, i64::from(j), c).unwrap()).unwrap();
                    rhs.add_scaled(&t, &koszul(a, b)).unwrap();
                }
                assert_eq!(e.wick(&ab, c).unwrap(), rhs, "{a:?} {b:?} {c:?}");
            }
        }
    }
}

#[test]
fn quasi_associativity_to_weight_5() {
    quasi_associativity(&bc(2), 5);
    quasi_associativity(&vir(), 5);
    quasi_associativity(&brst(Coefficient::kappa()), 4);
}

#[test]
fn mode_commutators_on_states() {
    for e in [bc(2), vir(), brst(Coefficient::kappa())] {
        let space = e.space();
        let monos = e.canonical_monomials_up_to(2);
        let states: Vec<_> = space.states_up_to(2);
        for u in &monos {
            for v in &monos {
                let s_uv = koszul(u, v);
                for m in -4..=4 {
                    let bracket = e.mode_commutator(u, m, v).unwrap();
                    for k in -4..=4 {
                        for s in &states {
                            let out_weight = space.weight(s) - (m - i64::from(weight(u)) + 1) - (k - i64::from(weight(v)) + 1);
                            if out_weight > 6 {
                                continue;
                            }
                            let x = StateVector::basis(s.clone());
                            let mut lhs = space.apply(u, m, &space.apply(v, k, &x).unwrap()).unwrap();
                            lhs.accumulate(&space.apply(v, k, &space.apply(u, m, &x).unwrap()).unwrap(), &-&s_uv);
                            let mut rhs = StateVector::zero();
                            for (w, p) in &bracket {
                                rhs.accumulate(&space.apply(w, p + k, &x).unwrap(), &int(1));
                            }
                            assert_eq!(lhs, rhs, "[{u:?}({m}), {v:?}({k})] on {s:?}");
                        }
                    }
                }
            }
        }
    }
}

#[test]
fn brst_differential_is_a_derivation() {
    for kappa in [int(26), Coefficient::kappa()] {
        let ctx = BrstContext::new(kappa).unwrap();
        let e = ctx.engine();
        let monos = e.canonical_monomials_up_to(4);
        let d: Vec<FieldExpr> = monos.iter().map(|u| ctx.brst_d(u).unwrap()).collect();
        for (u, du) in monos.iter().zip(&d) {
            let s = sign(ghost(u) % 2 != 0);
            for (v, dv) in monos.iter().zip(&d) {
                if weight(u) + weight(v) > 4 {
                    continue;
                }
                for n in -2..=3 {
                    let lhs = ctx.brst_d(&e.circle(u, n, v).unwrap()).unwrap();
                    let mut rhs = e.circle(du, n, v).unwrap();
                    rhs.add_scaled(&e.circle(u, n, dv).unwrap(), &s).unwrap();
                    assert_eq!(lhs, rhs, "{u:?} ∘_{n} {v:?}");
                }
            }
        }
    }
}

#[test]
fn differential_and_delta_anticommute_to_weight() {
    for kappa in [int(26), Coefficient::kappa()] {
        let ctx = BrstContext::new(kappa).unwrap();
        let e = ctx.engine();
        for u in e.canonical_monomials_up_to(4) {
            let mut x = ctx.brst_d(&ctx.bv_delta(&u).unwrap()).unwrap();
            x.add_scaled(&ctx.bv_delta(&ctx.brst_d(&u).unwrap()).unwrap(), &int(1)).unwrap();
            assert_eq!(x, u.scale(&int(i64::from(weight(&u)))), "{u:?}");
            assert_eq!(e.circle(ctx.l_total(), 1, &u).unwrap(), x);
        }
    }
}

#[test]
fn nilpotency_dichotomy() {
    let mut kappas: Vec<Coefficient> = (-30..=30).map(int).collect();
    kappas.extend([Coefficient::ratio(51, 2), Coefficient::ratio(-1, 3), Coefficient::ratio(79, 3)]);
    for k in kappas {
        let ctx = BrstContext::new(k.clone()).unwrap();
        let e = ctx.engine();
        let reduced = ctx.reduce_mod_derivative(&ctx.j_square().unwrap()).unwrap();
        let want = nf(e, ":d3(c) c:").scale(&(&(&k - &int(26)) / &int(12)));
        assert_eq!(reduced, want, "kappa = {k}");
        assert_eq!(reduced.is_zero(), k == int(26));
    }
}

#[test]
fn axioms_hold_below_the_default_floor() {
    for e in [bc(2), vir(), brst(Coefficient::kappa())] {
        let report = e.check_semi_infinite_axioms(3, -6).unwrap();
        assert!(report.passed(), "{}: {:?}", e.algebra().key(), report.failure);
    }
}
