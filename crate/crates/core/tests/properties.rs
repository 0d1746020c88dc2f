//! Property tests over random combinations of canonical monomials.

mod common;

use std::sync::OnceLock;

use common::*;
use cqoa::brst::BrstContext;
use cqoa::coeff::Coefficient;
use cqoa::engine::Engine;
use cqoa::expr::FieldExpr;
use cqoa::algebras::parse_selector;
use cqoa::syntax::{parse, parse_coefficient, parse_expr, render};
use proptest::prelude::*;

fn bc2() -> &'static Engine {
    static E: OnceLock<Engine> = OnceLock::new();
    E.get_or_init(|| bc(2))
}

fn virasoro() -> &'static Engine {
    static E: OnceLock<Engine> = OnceLock::new();
    E.get_or_init(vir)
}

fn critical() -> &'static BrstContext {
    static C: OnceLock<BrstContext> = OnceLock::new();
    C.get_or_init(|| BrstContext::new(int(26)).unwrap())
}

fn formal() -> &'static BrstContext {
    static C: OnceLock<BrstContext> = OnceLock::new();
    C.get_or_init(|| BrstContext::new(Coefficient::kappa()).unwrap())
}

fn small_coefficient() -> impl Strategy<Value = Coefficient> {
    (-6i64..=6, 1i64..=4).prop_map(|(n, d)| Coefficient::ratio(n, d))
}

/// `(a + bκ + cκ²) / (d + eκ)` with a nonzero denominator.
fn kappa_coefficient() -> impl Strategy<Value = Coefficient> {
    let k = Coefficient::kappa;
    (small_coefficient(), small_coefficient(), small_coefficient(), 1i64..=5, -3i64..=3).prop_map(
        move |(a, b, c, d, e)| {
            let num = &(&a + &(&b * &k())) + &(&c * &(&k() * &k()));
            let den = &int(d) + &(&int(e) * &k());
            num.checked_div(&den).unwrap()
        },
    )
}

/// A combination of up to four canonical monomials of weight at most `max`,
/// with coefficients drawn by `coeff`.
fn combination<S>(e: &'static Engine, max: i64, coeff: fn() -> S) -> impl Strategy<Value = FieldExpr>
where
    S: Strategy<Value = Coefficient> + 'static,
{
    let monos = e.canonical_monomials_up_to(max);
    let n = monos.len();
    prop::collection::vec((0..n, coeff()), 1..=4).prop_map(move |picks| {
        let mut x = FieldExpr::zero().with_algebra(e.algebra().key().clone());
        for (i, c) in picks {
            x.add_scaled(&monos[i], &c).unwrap();
        }
        x
    })
}

fn monomial(e: &'static Engine, max: i64) -> impl Strategy<Value = FieldExpr> {
    let monos = e.canonical_monomials_up_to(max);
    prop::sample::select(monos)
}

fn engines() -> impl Strategy<Value = &'static Engine> {
    prop::sample::select(vec![bc2(), virasoro(), formal().engine()])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn coefficients_round_trip(c in kappa_coefficient()) {
        let text = c.to_string();
        prop_assert_eq!(parse_coefficient(&text).unwrap(), c, "{}", text);
    }

    #[test]
    fn rendering_round_trips(
        e in engines(),
        seed in (0usize..1000, 0usize..1000, -3i64..=3, kappa_coefficient()),
    ) {
        let monos = e.canonical_monomials_up_to(3);
        let (i, j, n, c) = seed;
        let (u, v) = (&monos[i % monos.len()], &monos[j % monos.len()]);
        let c = if e.algebra().kappa_is_formal() { c } else { int(1) };
        let x = e.circle(u, n, v).unwrap().scale(&c);
        let text = render(&x, e.algebra());
        let back = e.normal_form(&parse_expr(&text, e).unwrap()).unwrap();
        prop_assert_eq!(back, x, "{}", text);
    }

    #[test]
    fn derivative_shifts_weight(x in combination(formal().engine(), 4, kappa_coefficient)) {
        let e = formal().engine();
        let d = e.derivative(&x).unwrap();
        let before: Vec<(i32, i32)> = x.grading().iter().map(|(g, w, _)| (*g, w + 1)).collect();
        for (g, w, _) in d.grading() {
            prop_assert!(before.contains(&(g, w)));
        }
        prop_assert_eq!(d, e.normal_form(&x.formal_derivative()).unwrap());
    }

    #[test]
    fn repeated_fermions_vanish(name in prop::sample::select(vec!["b", "c"]), k in 0u32..4, matter in 0usize..3) {
        let e = formal().engine();
        let field = if k == 0 { name.to_string() } else { format!("d{k}({name})") };
        let middle = vec!["L"; matter].join(" ");
        let x = parse_expr(&format!(":{field} {middle} {field}:"), e).unwrap();
        prop_assert!(e.normal_form(&x).unwrap().is_zero());
    }

    #[test]
    fn circle_products_are_bilinear(
        x in combination(bc2(), 3, small_coefficient),
        y in combination(bc2(), 3, small_coefficient),
        v in combination(bc2(), 3, small_coefficient),
        a in small_coefficient(),
        n in -3i64..=3,
    ) {
        let e = bc2();
        let mut xy = x.scale(&a);
        xy.add_scaled(&y, &int(1)).unwrap();
        let mut want = e.circle(&x, n, &v).unwrap().scale(&a);
        want.add_scaled(&e.circle(&y, n, &v).unwrap(), &int(1)).unwrap();
        prop_assert_eq!(e.circle(&xy, n, &v).unwrap(), want);
    }

    #[test]
    fn zero_mode_is_a_derivation(
        t in monomial(formal().engine(), 2),
        u in monomial(formal().engine(), 3),
        v in monomial(formal().engine(), 3),
        n in -3i64..=4,
    ) {
        let e = formal().engine();
        let lhs = e.circle(&t, 0, &e.circle(&u, n, &v).unwrap()).unwrap();
        let mut rhs = e.circle(&e.circle(&t, 0, &u).unwrap(), n, &v).unwrap();
        rhs.add_scaled(&e.circle(&u, n, &e.circle(&t, 0, &v).unwrap()).unwrap(), &koszul(&t, &u)).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn skew_symmetry_holds_for_all_n(
        e in engines(),
        picks in (0usize..1000, 0usize..1000),
        n in -3i64..=4,
    ) {
        let monos = e.canonical_monomials_up_to(4);
        let (u, v) = (&monos[picks.0 % monos.len()], &monos[picks.1 % monos.len()]);
        let mut rhs = FieldExpr::zero();
        for j in 0..=(i64::from(e.is_local(u, v).unwrap()) - n).max(0) {
            let p = e.circle(u, n + j, v).unwrap();
            rhs.add_scaled(&divided(e, &p, j as u32), &sign((n + j + 1) % 2 != 0)).unwrap();
        }
        prop_assert_eq!(e.circle(v, n, u).unwrap(), rhs.scale(&koszul(u, v)));
    }

    #[test]
    fn engine_agrees_with_mode_oracle(
        u in monomial(bc2(), 2),
        v in monomial(bc2(), 2),
        n in -2i64..=3,
    ) {
        let e = bc2();
        prop_assert!(e.oracle_disagreements(&u, n, &v, 4).unwrap().is_empty());
    }

    #[test]
    fn brst_differential_is_a_derivation(
        u in combination(critical().engine(), 3, small_coefficient),
        v in monomial(critical().engine(), 3),
        n in -2i64..=3,
    ) {
        let ctx = critical();
        let e = ctx.engine();
        for (g, _, part) in u.grading() {
            let lhs = ctx.brst_d(&e.circle(&part, n, &v).unwrap()).unwrap();
            let mut rhs = e.circle(&ctx.brst_d(&part).unwrap(), n, &v).unwrap();
            rhs.add_scaled(&e.circle(&part, n, &ctx.brst_d(&v).unwrap()).unwrap(), &sign(g % 2 != 0)).unwrap();
            prop_assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn differential_squares_to_zero_at_critical_charge(u in combination(critical().engine(), 4, small_coefficient)) {
        let ctx = critical();
        prop_assert!(ctx.brst_d(&ctx.brst_d(&u).unwrap()).unwrap().is_zero());
        prop_assert!(ctx.bv_delta(&ctx.bv_delta(&u).unwrap()).unwrap().is_zero());
    }

    #[test]
    fn differential_and_delta_anticommute_to_weight(u in combination(formal().engine(), 4, kappa_coefficient)) {
        let ctx = formal();
        let mut x = ctx.brst_d(&ctx.bv_delta(&u).unwrap()).unwrap();
        x.add_scaled(&ctx.bv_delta(&ctx.brst_d(&u).unwrap()).unwrap(), &int(1)).unwrap();
        let mut want = FieldExpr::zero();
        for (_, w, part) in u.grading() {
            want.add_scaled(&part, &int(i64::from(w))).unwrap();
        }
        prop_assert_eq!(x, ctx.engine().normal_form(&want).unwrap());
    }

    #[test]
    fn virasoro_basis_counts_partitions(n in 0i64..=14) {
        fn partitions(n: i64, min: i64) -> usize {
            if n == 0 { 1 } else { (min..=n).map(|p| partitions(n - p, p)).sum() }
        }
        prop_assert_eq!(virasoro().space().enumerate(n, 0).len(), partitions(n, 2));
    }

    #[test]
    fn state_map_has_full_rank(e in engines(), w in 0i64..=5, g in -2i64..=2) {
        let space = e.space();
        if space.min_weight(g).is_some_and(|m| m <= w) {
            let (rank, n) = space.state_map_rank(w, g).unwrap();
            prop_assert_eq!(rank, n);
        }
    }

    #[test]
    fn parsers_are_total(src in "\\PC{0,40}") {
        let _ = parse(&src);
        if let Ok(c) = parse_coefficient(&src) {
            prop_assert_eq!(parse_coefficient(&c.to_string()).unwrap(), c);
        }
        if let Ok(sel) = parse_selector(&src) {
            prop_assert_eq!(parse_selector(&sel.to_string()).unwrap(), sel);
        }
    }

    #[test]
    fn near_grammar_inputs_round_trip(src in "([bc]|d[0-3]?\\(|\\)|:|kappa|[0-9]|[ +*/-]){1,24}") {
        let e = bc2();
        if let Ok(x) = parse_expr(&src, e) {
            if x.monomials().all(|m| m.weight() <= 10 && m.len() <= 6) {
                let nf = e.normal_form(&x).unwrap();
                let text = render(&nf, e.algebra());
                prop_assert_eq!(e.normal_form(&parse_expr(&text, e).unwrap()).unwrap(), nf, "{}", text);
            }
        }
    }
}
