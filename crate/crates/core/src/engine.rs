//! Circle products `u ∘_n v` for every integer `n`, normal forms, OPEs and
//! the semi-infinite commutativity axioms.
//!
//! Products of monomials are computed by recursion on the length of the left
//! factor, then of the right factor, bottoming out in the generator table.
//! Every result is put in normal form through the state map, which also gives
//! an independent second route: `u ∘_n v = reconstruct(u(n) · state(v))`.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::RangeInclusive;
use std::sync::{Arc, Mutex};

use rustc_hash::FxHashMap as HashMap;
use thiserror::Error;

use crate::algebras::AlgebraSpec;
use crate::coeff::Coefficient;
use crate::expr::{ExprError, FieldExpr, FieldTerm, WickMonomial};
use crate::states::{factorial_coeff, BasisState, OperatorMatrix, StateError, StateSpace};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error("algebra `{0}` is not flagged commutative; the product recursion does not apply")]
    NonCommutative(String),
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error(transparent)]
    State(#[from] StateError),
    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, EngineError>;

/// Singular part of an OPE: `n ↦ u ∘_n v` for the nonzero products with `n ≥ 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OpeResult {
    pub singular: BTreeMap<u32, FieldExpr>,
    pub locality_order: u32,
}

/// Outcome of a sweep over monomial pairs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AxiomReport {
    pub monomials: usize,
    pub pairs: usize,
    pub checks: usize,
    pub failure: Option<String>,
}

impl AxiomReport {
    pub fn passed(&self) -> bool {
        self.failure.is_none()
    }
}

type CircleKey = (WickMonomial, i64, WickMonomial);

/// Matrix entries `(mode, state)` of an operator.
pub type Entries = Vec<(i64, BasisState)>;

pub struct Engine {
    alg: Arc<AlgebraSpec>,
    space: StateSpace,
    nf_cache: Mutex<HashMap<WickMonomial, Arc<FieldExpr>>>,
    circle_cache: Mutex<HashMap<CircleKey, Arc<FieldExpr>>>,
}

impl fmt::Debug for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Engine").field("algebra", &self.alg.key()).finish_non_exhaustive()
    }
}

fn sign(odd: bool) -> Coefficient {
    if odd {
        -Coefficient::one()
    } else {
        Coefficient::one()
    }
}

impl Engine {
    pub fn new(alg: impl Into<Arc<AlgebraSpec>>) -> Result<Engine> {
        let alg = alg.into();
        if !alg.is_commutative() {
            return Err(EngineError::NonCommutative(alg.key().to_string()));
        }
        let space = StateSpace::new(&alg);
        space.check_realized()?;
        Ok(Engine {
            alg,
            space,
            nf_cache: Mutex::new(HashMap::default()),
            circle_cache: Mutex::new(HashMap::default()),
        })
    }

    pub fn algebra(&self) -> &AlgebraSpec {
        &self.alg
    }

    pub fn algebra_arc(&self) -> Arc<AlgebraSpec> {
        self.alg.clone()
    }

    pub fn space(&self) -> &StateSpace {
        &self.space
    }

    fn check(&self, e: &FieldExpr) -> Result<()> {
        match e.algebra() {
            Some(k) if k != self.alg.key() => Err(ExprError::AlgebraMismatch {
                left: self.alg.key().to_string(),
                right: k.to_string(),
            }
            .into()),
            _ => Ok(()),
        }
    }

    fn zero(&self) -> FieldExpr {
        FieldExpr::zero().with_algebra(self.alg.key().clone())
    }

    fn tagged(&self, m: WickMonomial, c: Coefficient) -> FieldExpr {
        FieldExpr::monomial(Some(self.alg.key().clone()), m, c)
    }

    fn below_floor(&self, ghost: i32, weight: i64) -> bool {
        self.space
            .min_weight(i64::from(ghost))
            .is_none_or(|lo| weight < lo)
    }

    fn nf_mono(&self, m: &WickMonomial) -> Result<Arc<FieldExpr>> {
        if m.is_canonical() {
            return Ok(Arc::new(self.tagged(m.clone(), Coefficient::one())));
        }
        if let Some(r) = self.nf_cache.lock().unwrap().get(m) {
            return Ok(r.clone());
        }
        let e = self.tagged(m.clone(), Coefficient::one());
        let r = Arc::new(self.space.reconstruct(&self.space.state_of(&e)?)?);
        self.nf_cache.lock().unwrap().insert(m.clone(), r.clone());
        Ok(r)
    }

    /// Canonical representative: reconstruct(state_of(e)).
    pub fn normal_form(&self, e: &FieldExpr) -> Result<FieldExpr> {
        self.check(e)?;
        let mut out = self.zero();
        for (m, c) in e.terms() {
            out.accumulate(&*self.nf_mono(m)?, c);
        }
        Ok(out)
    }

    /// `∂e` in normal form.
    pub fn derivative(&self, e: &FieldExpr) -> Result<FieldExpr> {
        self.normal_form(&e.formal_derivative())
    }

    /// `∂^k e / k!` in normal form.
    pub fn divided_derivative(&self, e: &FieldExpr, k: u32) -> Result<FieldExpr> {
        let mut d = e.clone();
        for _ in 0..k {
            d = d.formal_derivative();
        }
        let d = self.normal_form(&d)?;
        Ok(d.scale(&factorial_coeff(k).recip().expect("nonzero factorial")))
    }

    /// `u ∘_n v`.
    pub fn circle(&self, u: &FieldExpr, n: i64, v: &FieldExpr) -> Result<FieldExpr> {
        self.check(u)?;
        self.check(v)?;
        let mut out = self.zero();
        for (mu, cu) in u.terms() {
            for (mv, cv) in v.terms() {
                out.accumulate(&*self.circle_mono(mu, n, mv)?, &(cu * cv));
            }
        }
        Ok(out)
    }

    /// `:uv: = u ∘_{−1} v`.
    pub fn wick(&self, u: &FieldExpr, v: &FieldExpr) -> Result<FieldExpr> {
        self.circle(u, -1, v)
    }

    /// `u ∘_n v` computed from states alone: `reconstruct(u(n) · state(v))`.
    pub fn circle_via_states(&self, u: &FieldExpr, n: i64, v: &FieldExpr) -> Result<FieldExpr> {
        self.check(u)?;
        self.check(v)?;
        let s = self.space.state_of(v)?;
        Ok(self.space.reconstruct(&self.space.apply(u, n, &s)?)?)
    }

    fn circle_mono(&self, u: &WickMonomial, n: i64, v: &WickMonomial) -> Result<Arc<FieldExpr>> {
        if u.is_identity() {
            return if n == -1 {
                self.nf_mono(v)
            } else {
                Ok(Arc::new(self.zero()))
            };
        }
        if v.is_identity() {
            if n >= 0 {
                return Ok(Arc::new(self.zero()));
            }
            let e = self.tagged(u.clone(), Coefficient::one());
            return Ok(Arc::new(self.divided_derivative(&e, (-n - 1) as u32)?));
        }
        let ghost = u.ghost() + v.ghost();
        let weight = i64::from(u.weight() + v.weight()) - n - 1;
        if self.below_floor(ghost, weight) {
            return Ok(Arc::new(self.zero()));
        }
        let key = (u.clone(), n, v.clone());
        if let Some(r) = self.circle_cache.lock().unwrap().get(&key) {
            return Ok(r.clone());
        }
        let r = if n < -1 || (n == -1 && u.len() == 1) {
            self.negative(u, n, v)?
        } else if u.len() > 1 {
            self.left_composite(u, n, v)?
        } else if v.len() > 1 {
            self.right_composite(&u.factors()[0], n, v)?
        } else {
            self.pair(&u.factors()[0], n, &v.factors()[0])?
        };
        debug_assert!(
            r.terms().all(|(m, _)| m.ghost() == ghost && i64::from(m.weight()) == weight),
            "grading violated in {u} ∘{n} {v}"
        );
        let r = Arc::new(r);
        self.circle_cache.lock().unwrap().insert(key, r.clone());
        Ok(r)
    }

    /// `u ∘_{−k−1} v = :(∂^k u) v: / k!`.
    fn negative(&self, u: &WickMonomial, n: i64, v: &WickMonomial) -> Result<FieldExpr> {
        let k = (-n - 1) as u32;
        let inv = factorial_coeff(k).recip().expect("nonzero factorial");
        let mut out = self.zero();
        if u.len() == 1 {
            let t = u.factors()[0].differentiated(k);
            out.accumulate(&*self.nf_mono(&v.prepend(t))?, &inv);
            return Ok(out);
        }
        let mut d = self.tagged(u.clone(), Coefficient::one());
        for _ in 0..k {
            d = d.formal_derivative();
        }
        for (m, c) in d.terms() {
            out.accumulate(&*self.circle_mono(m, -1, v)?, &(c * &inv));
        }
        Ok(out)
    }

    /// `(:tA:)_(n) v = Σ_j t_(−1−j)(A_(n+j) v) + (−1)^{|t||A|} A_(n−1−j)(t_(j) v)`.
    fn left_composite(&self, u: &WickMonomial, n: i64, v: &WickMonomial) -> Result<FieldExpr> {
        let (t, a) = u.split_first().expect("composite");
        let tm = WickMonomial::single(t);
        let s = sign(t.is_odd() && a.is_odd());
        let mut out = self.zero();
        if let Some(lo) = self.space.min_weight(i64::from(a.ghost() + v.ghost())) {
            let j_max = i64::from(a.weight() + v.weight()) - n - 1 - lo;
            for j in 0..=j_max {
                let x = self.circle_mono(&a, n + j, v)?;
                for (m, c) in x.terms() {
                    out.accumulate(&*self.circle_mono(&tm, -1 - j, m)?, c);
                }
            }
        }
        if let Some(lo) = self.space.min_weight(i64::from(t.ghost() + v.ghost())) {
            let j_max = i64::from(t.weight() + v.weight()) - 1 - lo;
            for j in 0..=j_max {
                let y = self.circle_mono(&tm, j, v)?;
                for (m, c) in y.terms() {
                    out.accumulate(&*self.circle_mono(&a, n - 1 - j, m)?, &(c * &s));
                }
            }
        }
        Ok(out)
    }

    /// `t_(n)(:hR:) = (−1)^{|t||h|} :h (t_(n)R): + Σ_{j≤n} C(n,j) (t_(j)h)_(n−1−j) R`, `n ≥ 0`.
    fn right_composite(&self, t: &FieldTerm, n: i64, v: &WickMonomial) -> Result<FieldExpr> {
        let (h, r) = v.split_first().expect("composite");
        let tm = WickMonomial::single(*t);
        let hm = WickMonomial::single(h);
        let s = sign(t.is_odd() && h.is_odd());
        let mut out = self.zero();
        let x = self.circle_mono(&tm, n, &r)?;
        for (m, c) in x.terms() {
            out.accumulate(&*self.circle_mono(&hm, -1, m)?, &(c * &s));
        }
        for j in 0..=n {
            let y = self.circle_mono(&tm, j, &hm)?;
            if y.is_zero() {
                continue;
            }
            let b = Coefficient::binomial(n, j as u32);
            for (m, c) in y.terms() {
                out.accumulate(&*self.circle_mono(m, n - 1 - j, &r)?, &(c * &b));
            }
        }
        Ok(out)
    }

    /// Two derivative terms, `n ≥ 0`: shift derivatives onto the table.
    fn pair(&self, t: &FieldTerm, n: i64, h: &FieldTerm) -> Result<FieldExpr> {
        if t.order > 0 {
            // (∂^p g) ∘_n h = (−1)^p n(n−1)⋯(n−p+1) g ∘_{n−p} h
            let p = i64::from(t.order);
            if p > n {
                return Ok(self.zero());
            }
            let mut f = Coefficient::one();
            for i in 0..p {
                f *= &Coefficient::from_int(-(n - i));
            }
            let base = WickMonomial::single(t.with_order(0));
            return Ok(self.circle_mono(&base, n - p, &WickMonomial::single(*h))?.scale(&f));
        }
        if h.order > 0 {
            // g ∘_n ∂h' = ∂(g ∘_n h') + n g ∘_{n−1} h'
            let tm = WickMonomial::single(*t);
            let lower = WickMonomial::single(h.with_order(h.order - 1));
            let mut out = self.derivative(&*self.circle_mono(&tm, n, &lower)?)?;
            if n > 0 {
                out.accumulate(&*self.circle_mono(&tm, n - 1, &lower)?, &Coefficient::from_int(n));
            }
            return Ok(out);
        }
        match self.alg.ope_entry(t.generator, h.generator, n as u32) {
            Some(e) => {
                let e = e.clone().with_algebra(self.alg.key().clone());
                self.normal_form(&e)
            }
            None => Ok(self.zero()),
        }
    }

    /// Largest `n` for which some monomial pair of `u ∘_n v` lands above the weight floor.
    fn product_bound(&self, u: &FieldExpr, v: &FieldExpr) -> i64 {
        let mut n_max = -1;
        for mu in u.monomials() {
            for mv in v.monomials() {
                if let Some(lo) = self.space.min_weight(i64::from(mu.ghost() + mv.ghost())) {
                    n_max = n_max.max(i64::from(mu.weight() + mv.weight()) - 1 - lo);
                }
            }
        }
        n_max
    }

    pub fn ope(&self, u: &FieldExpr, v: &FieldExpr) -> Result<OpeResult> {
        let mut singular = BTreeMap::new();
        for n in 0..=self.product_bound(u, v) {
            let r = self.circle(u, n, v)?;
            if !r.is_zero() {
                singular.insert(n as u32, r);
            }
        }
        let locality_order = singular.keys().next_back().map_or(0, |n| n + 1);
        Ok(OpeResult {
            singular,
            locality_order,
        })
    }

    pub fn is_local(&self, u: &FieldExpr, v: &FieldExpr) -> Result<u32> {
        Ok(self.ope(u, v)?.locality_order)
    }

    /// `[u(m), v(w)] = Σ_{n≥0} C(m,n) (u ∘_n v)(w) w^{m−n}` as `(C(m,n) u ∘_n v, m − n)` pairs.
    pub fn mode_commutator(&self, u: &FieldExpr, m: i64, v: &FieldExpr) -> Result<Vec<(FieldExpr, i64)>> {
        let mut out = Vec::new();
        for (n, e) in self.ope(u, v)?.singular {
            let b = Coefficient::binomial(m, n);
            if b.is_zero() {
                continue;
            }
            out.push((e.scale(&b), m - i64::from(n)));
        }
        out.sort_by_key(|(_, p)| std::cmp::Reverse(*p));
        Ok(out)
    }

    /// Right side of axiom (ii):
    /// `(−1)^{|u||v|} Σ_{p≥n} (−1)^{p+1} ∂^{p−n}(v ∘_p u)/(p−n)!`.
    pub fn commutativity_rhs(&self, u: &FieldExpr, n: i64, v: &FieldExpr) -> Result<FieldExpr> {
        let mut out = self.zero();
        for (mu, cu) in u.terms() {
            for (mv, cv) in v.terms() {
                let eu = self.tagged(mu.clone(), Coefficient::one());
                let ev = self.tagged(mv.clone(), Coefficient::one());
                let koszul = sign(mu.is_odd() && mv.is_odd());
                let p_max = self.product_bound(&ev, &eu).max(n - 1);
                for p in n..=p_max {
                    let x = self.circle(&ev, p, &eu)?;
                    if x.is_zero() {
                        continue;
                    }
                    let d = self.divided_derivative(&x, (p - n) as u32)?;
                    let f = &koszul * &sign(p.rem_euclid(2) == 0) * cu * cv;
                    out.accumulate(&d, &f);
                }
            }
        }
        Ok(out)
    }

    /// Axiom (ii) for every `n` from `n_floor` up to the larger locality order.
    pub fn verify_commutativity(&self, u: &FieldExpr, v: &FieldExpr, n_floor: i64) -> Result<bool> {
        Ok(self.commutativity_failure(u, v, n_floor)?.is_none())
    }

    /// First `n` at which axiom (ii) fails.
    pub fn commutativity_failure(&self, u: &FieldExpr, v: &FieldExpr, n_floor: i64) -> Result<Option<i64>> {
        let top = self.product_bound(u, v).max(self.product_bound(v, u)).max(n_floor);
        // rhs[n - n_floor] accumulates (−1)^{p+1} ∂^{p−n}(v ∘_p u)/(p−n)! over p.
        let mut rhs = vec![self.zero(); (top - n_floor + 1) as usize];
        for (mu, cu) in u.terms() {
            for (mv, cv) in v.terms() {
                let eu = self.tagged(mu.clone(), Coefficient::one());
                let ev = self.tagged(mv.clone(), Coefficient::one());
                let koszul = &sign(mu.is_odd() && mv.is_odd()) * &(cu * cv);
                for p in n_floor..=self.product_bound(&ev, &eu).min(top) {
                    let mut d = self.circle(&ev, p, &eu)?;
                    let f = &koszul * &sign(p.rem_euclid(2) == 0);
                    for n in (n_floor..=p).rev() {
                        if d.is_zero() {
                            break;
                        }
                        if n < p {
                            d = self.derivative(&d)?.scale(&Coefficient::ratio(1, p - n));
                        }
                        rhs[(n - n_floor) as usize].accumulate(&d, &f);
                    }
                }
            }
        }
        for (i, r) in rhs.iter().enumerate() {
            let n = n_floor + i as i64;
            if self.circle(u, n, v)? != *r {
                return Ok(Some(n));
            }
        }
        Ok(None)
    }

    /// Canonical monomials of weight at most `max_weight`, over all ghost numbers.
    pub fn canonical_monomials_up_to(&self, max_weight: i64) -> Vec<FieldExpr> {
        let mut out = Vec::new();
        for g in self.space.ghost_range(max_weight) {
            let lo = self.space.min_weight(g).expect("ghost in range");
            for w in lo..=max_weight {
                for m in self.space.canonical_monomials(w, g) {
                    out.push(self.tagged(m, Coefficient::one()));
                }
            }
        }
        out
    }

    /// Axiom (i) on every canonical monomial and axiom (ii) on every ordered
    /// pair, up to `max_weight`.
    pub fn check_semi_infinite_axioms(&self, max_weight: i64, n_floor: i64) -> Result<AxiomReport> {
        let monos = self.canonical_monomials_up_to(max_weight);
        let one = FieldExpr::one();
        let render = |e: &FieldExpr| crate::syntax::render(e, &self.alg);
        let mut report = AxiomReport {
            monomials: monos.len(),
            pairs: 0,
            checks: 0,
            failure: None,
        };
        for u in &monos {
            for n in -1..=2 {
                report.checks += 1;
                let want = if n == -1 { u.clone() } else { self.zero() };
                if self.circle(u, n, &one)? != want {
                    report.failure = Some(format!("axiom (i) fails for {} at n = {n}", render(u)));
                    return Ok(report);
                }
            }
        }
        for u in &monos {
            for v in &monos {
                report.pairs += 1;
                report.checks += 1;
                if let Some(n) = self.commutativity_failure(u, v, n_floor)? {
                    report.failure = Some(format!(
                        "axiom (ii) fails for ({}, {}) at n = {n}",
                        render(u),
                        render(v)
                    ));
                    return Ok(report);
                }
            }
        }
        Ok(report)
    }

    /// `(m, y)` entries where the engine's `u ∘_n v` and the oracle disagree,
    /// on all states up to `cutoff`.
    pub fn oracle_disagreements(&self, u: &FieldExpr, n: i64, v: &FieldExpr, cutoff: i64) -> Result<Vec<(i64, BasisState)>> {
        Ok(self
            .oracle_compare(u, v, n..=n, cutoff)?
            .into_iter()
            .flat_map(|(_, bad)| bad)
            .collect())
    }

    /// Engine against oracle for every `n` in `ns`: the disagreeing entries
    /// of each `n` that has any.
    pub fn oracle_compare(&self, u: &FieldExpr, v: &FieldExpr, ns: RangeInclusive<i64>, cutoff: i64) -> Result<Vec<(i64, Entries)>> {
        self.check(u)?;
        self.check(v)?;
        let blocks: Vec<(i64, Vec<(i64, BasisState)>)> = ns.map(|n| (n, self.space.circle_domain(u, n, v, cutoff))).collect();
        let mut oracle = vec![OperatorMatrix::default(); blocks.len()];
        for (mu, cu) in u.terms() {
            for (mv, cv) in v.terms() {
                let c = cu * cv;
                for (acc, part) in oracle.iter_mut().zip(self.space.oracle_blocks((mu, mv), &blocks)?) {
                    acc.accumulate(&part, &c);
                }
            }
        }
        let mut out = Vec::new();
        for ((n, domain), oracle_side) in blocks.iter().zip(&oracle) {
            let engine_side = self.space.field_matrix(&self.circle(u, *n, v)?, domain)?;
            let bad: Vec<_> = engine_side.differences(oracle_side).into_iter().cloned().collect();
            if !bad.is_empty() {
                out.push((*n, bad));
            }
        }
        Ok(out)
    }
}
