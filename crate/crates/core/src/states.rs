//! State modules: the ghost Fock space, the Verma quotient `M(κ)` and their
//! tensor product, with exact mode actions, the state map `u ↦ u(−1)𝟏`, its
//! inverse on canonical monomials, and the definition-level circle-product
//! oracle.
//!
//! Mode labels follow the field convention `u(z) = Σ u(n) z^{-n-1}`. A basis
//! state stores the positive labels `n` of its creation modes `b(−n)`, `c(−m)`
//! and the Virasoro parts `k` of `L_{−k} = L(1−k)`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::sync::{Arc, Mutex};

use rustc_hash::FxHashMap as HashMap;
use smallvec::SmallVec;
use thiserror::Error;

use crate::algebras::AlgebraSpec;
use crate::coeff::{factorial, Coefficient};
use crate::expr::{AlgebraKey, FieldExpr, FieldTerm, GenId, WickMonomial};
use crate::linalg;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StateError {
    #[error("cutoff {cutoff} is too small: {what} reaches weight {weight}")]
    CutoffTooSmall { cutoff: i64, weight: i64, what: String },
    #[error("state is not in the span of canonical monomials ({0})")]
    NotInSpan(String),
    #[error("generator `{0}` has no realization on the state module")]
    Unrealized(String),
}

/// Mode labels of one sector of a basis state.
pub type Word = SmallVec<[u32; 8]>;

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BasisState {
    /// `n` for each `b(−n)`, strictly decreasing.
    pub b: Word,
    /// `m` for each `c(−m)`, strictly decreasing.
    pub c: Word,
    /// Virasoro parts `k ≥ 2` of `L_{−k}`, weakly decreasing.
    pub matter: Word,
}

impl BasisState {
    pub fn vacuum() -> Self {
        BasisState::default()
    }

    pub fn ghost(&self) -> i64 {
        self.c.len() as i64 - self.b.len() as i64
    }

    pub fn is_vacuum(&self) -> bool {
        self.b.is_empty() && self.c.is_empty() && self.matter.is_empty()
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct StateVector(BTreeMap<BasisState, Coefficient>);

impl StateVector {
    pub fn zero() -> Self {
        StateVector::default()
    }

    pub fn basis(s: BasisState) -> Self {
        StateVector::term(s, Coefficient::one())
    }

    pub fn term(s: BasisState, c: Coefficient) -> Self {
        let mut v = StateVector::zero();
        v.add_term(s, &c);
        v
    }

    pub fn vacuum() -> Self {
        StateVector::basis(BasisState::vacuum())
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&BasisState, &Coefficient)> {
        self.0.iter()
    }

    pub fn coefficient(&self, s: &BasisState) -> Coefficient {
        self.0.get(s).cloned().unwrap_or_default()
    }

    pub fn add_term(&mut self, s: BasisState, c: &Coefficient) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.0.entry(s) {
            Entry::Vacant(e) => {
                e.insert(c.clone());
            }
            Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    /// `self += c * other`.
    pub fn accumulate(&mut self, other: &StateVector, c: &Coefficient) {
        if c.is_zero() {
            return;
        }
        for (s, a) in &other.0 {
            let x = if c.is_one() { a.clone() } else { a * c };
            match self.0.get_mut(s) {
                Some(y) => {
                    *y += &x;
                    if y.is_zero() {
                        self.0.remove(s);
                    }
                }
                None => {
                    self.0.insert(s.clone(), x);
                }
            }
        }
    }

    pub fn scale(&self, c: &Coefficient) -> StateVector {
        let mut out = StateVector::zero();
        out.accumulate(self, c);
        out
    }

    pub fn as_map(&self) -> &BTreeMap<BasisState, Coefficient> {
        &self.0
    }
}

type MatterVec = BTreeMap<Word, Coefficient>;

fn matter_add(acc: &mut MatterVec, w: Word, c: &Coefficient) {
    if c.is_zero() {
        return;
    }
    use std::collections::btree_map::Entry;
    match acc.entry(w) {
        Entry::Vacant(e) => {
            e.insert(c.clone());
        }
        Entry::Occupied(mut e) => {
            *e.get_mut() += c;
            if e.get().is_zero() {
                e.remove();
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Realization {
    B,
    C,
    L,
}

/// Matrix of a mode family `w(m)` restricted to a finite domain of
/// `(m, input state)` pairs; only nonzero columns are stored.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct OperatorMatrix {
    pub entries: BTreeMap<(i64, BasisState), StateVector>,
}

impl OperatorMatrix {
    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    /// Entries on which the two matrices differ.
    /// `self += c · other`.
    pub fn accumulate(&mut self, other: &OperatorMatrix, c: &Coefficient) {
        for (key, col) in &other.entries {
            let slot = self.entries.entry(key.clone()).or_default();
            slot.accumulate(col, c);
            if slot.is_zero() {
                self.entries.remove(key);
            }
        }
    }

    pub fn differences<'a>(&'a self, other: &'a OperatorMatrix) -> Vec<&'a (i64, BasisState)> {
        let keys: BTreeSet<_> = self.entries.keys().chain(other.entries.keys()).collect();
        keys.into_iter()
            .filter(|k| self.entries.get(*k) != other.entries.get(*k))
            .collect()
    }
}

/// Memoized composite mode actions, dropped wholesale once it holds
/// `MODE_CACHE_LIMIT` vectors.
#[derive(Default)]
struct ModeCache {
    map: HashMap<WickMonomial, HashMap<i64, HashMap<BasisState, Arc<StateVector>>>>,
    len: usize,
}

const MODE_CACHE_LIMIT: usize = 1 << 20;

/// Exact realization of an algebra's generators on `∧* ⊗ M(κ)`.
pub struct StateSpace {
    key: AlgebraKey,
    lambda: Option<i64>,
    kappa: Coefficient,
    realization: Vec<Option<Realization>>,
    names: Vec<String>,
    terms: BTreeMap<u8, FieldTerm>,
    mode_cache: Mutex<ModeCache>,
    matter_cache: Mutex<HashMap<(i64, Word), Arc<MatterVec>>>,
    scalar_cache: Mutex<HashMap<BasisState, (WickMonomial, Coefficient)>>,
}

const B_SLOT: u8 = 0;
const C_SLOT: u8 = 1;
const L_SLOT: u8 = 2;

impl StateSpace {
    pub fn new(alg: &AlgebraSpec) -> Self {
        let n = alg.generators().len();
        let mut realization = vec![None; n];
        let mut terms = BTreeMap::new();
        if let Some(g) = alg.ghost_sector() {
            realization[g.b as usize] = Some(Realization::B);
            realization[g.c as usize] = Some(Realization::C);
            terms.insert(B_SLOT, alg.term(g.b, 0));
            terms.insert(C_SLOT, alg.term(g.c, 0));
        }
        if let Some(m) = alg.matter_sector() {
            realization[m.l as usize] = Some(Realization::L);
            terms.insert(L_SLOT, alg.term(m.l, 0));
        }
        StateSpace {
            key: alg.key().clone(),
            lambda: alg.lambda(),
            kappa: alg.kappa().cloned().unwrap_or_default(),
            realization,
            names: alg.generators().iter().map(|g| g.name.clone()).collect(),
            terms,
            mode_cache: Mutex::new(ModeCache::default()),
            matter_cache: Mutex::new(HashMap::default()),
            scalar_cache: Mutex::new(HashMap::default()),
        }
    }

    pub fn has_ghosts(&self) -> bool {
        self.lambda.is_some()
    }

    pub fn has_matter(&self) -> bool {
        self.terms.contains_key(&L_SLOT)
    }

    /// Checks that every generator acts on the module.
    pub fn check_realized(&self) -> Result<(), StateError> {
        for (i, r) in self.realization.iter().enumerate() {
            if r.is_none() {
                return Err(StateError::Unrealized(self.names[i].clone()));
            }
        }
        Ok(())
    }

    pub fn weight(&self, s: &BasisState) -> i64 {
        let lambda = self.lambda.unwrap_or(0);
        let b: i64 = s.b.iter().map(|&n| lambda + i64::from(n) - 1).sum();
        let c: i64 = s.c.iter().map(|&m| i64::from(m) - lambda).sum();
        let l: i64 = s.matter.iter().map(|&k| i64::from(k)).sum();
        b + c + l
    }

    /// Lowest weight of a state with the given ghost number, if any exists.
    pub fn min_weight(&self, ghost: i64) -> Option<i64> {
        match self.lambda {
            None => (ghost == 0).then_some(0),
            Some(lambda) => {
                let k = ghost.abs();
                Some(if ghost >= 0 {
                    (1..=k).map(|m| m - lambda).sum()
                } else {
                    (1..=k).map(|n| lambda + n - 1).sum()
                })
            }
        }
    }

    /// Ghost numbers that have states of weight at most `cutoff`.
    pub fn ghost_range(&self, cutoff: i64) -> Vec<i64> {
        let Some(lambda) = self.lambda else {
            return if cutoff >= 0 { vec![0] } else { vec![] };
        };
        let mut out = Vec::new();
        let mut g = 0i64;
        loop {
            let w = self.min_weight(g).expect("ghost sector");
            if w <= cutoff {
                out.push(g);
            } else if g > lambda.abs() {
                break;
            }
            g += 1;
        }
        let mut g = -1i64;
        loop {
            let w = self.min_weight(g).expect("ghost sector");
            if w <= cutoff {
                out.push(g);
            } else if -g > lambda.abs() {
                break;
            }
            g -= 1;
        }
        out.sort_unstable();
        out
    }

    /// All basis states of the given weight and ghost number, sorted.
    pub fn enumerate(&self, weight: i64, ghost: i64) -> Vec<BasisState> {
        let mut out = Vec::new();
        match self.lambda {
            None => {
                if ghost == 0 && weight >= 0 {
                    for p in partitions(weight as u32, 2, weight as u32) {
                        out.push(BasisState {
                            matter: p.into(),
                            ..BasisState::default()
                        });
                    }
                }
            }
            Some(lambda) => {
                let matter = self.has_matter();
                let mut i = 0i64.max(-ghost);
                loop {
                    let j = i + ghost;
                    let base_b = i * (lambda - 1);
                    let base_c = -j * lambda;
                    let min_nb = i * (i + 1) / 2;
                    let min_mc = j * (j + 1) / 2;
                    if base_b + base_c + min_nb + min_mc > weight {
                        break;
                    }
                    let budget = weight - base_b - base_c;
                    for sb in min_nb..=budget - min_mc {
                        let bs = strict_parts(i as u32, sb as u32);
                        if bs.is_empty() {
                            continue;
                        }
                        for sc in min_mc..=budget - sb {
                            let rest = budget - sb - sc;
                            if !matter && rest != 0 {
                                continue;
                            }
                            let cs = strict_parts(j as u32, sc as u32);
                            if cs.is_empty() {
                                continue;
                            }
                            let ms = if matter {
                                partitions(rest as u32, 2, rest as u32)
                            } else {
                                vec![vec![]]
                            };
                            for b in &bs {
                                for c in &cs {
                                    for m in &ms {
                                        out.push(BasisState {
                                            b: Word::from_slice(b),
                                            c: Word::from_slice(c),
                                            matter: Word::from_slice(m),
                                        });
                                    }
                                }
                            }
                        }
                    }
                    i += 1;
                }
            }
        }
        out.sort();
        out
    }

    /// Every basis state of weight at most `cutoff`.
    pub fn states_up_to(&self, cutoff: i64) -> Vec<BasisState> {
        let mut out = Vec::new();
        for g in self.ghost_range(cutoff) {
            let lo = self.min_weight(g).expect("ghost in range");
            for w in lo..=cutoff {
                out.extend(self.enumerate(w, g));
            }
        }
        out.sort();
        out
    }

    /// The canonical monomial whose state is a multiple of `s`.
    pub fn monomial_of(&self, s: &BasisState) -> WickMonomial {
        let mut ts = Vec::new();
        if let Some(b) = self.terms.get(&B_SLOT) {
            ts.extend(s.b.iter().map(|&n| b.differentiated(n - 1)));
        }
        if let Some(c) = self.terms.get(&C_SLOT) {
            ts.extend(s.c.iter().map(|&m| c.differentiated(m - 1)));
        }
        if let Some(l) = self.terms.get(&L_SLOT) {
            ts.extend(s.matter.iter().map(|&k| l.differentiated(k - 2)));
        }
        ts.sort_by_key(|t| (t.generator, std::cmp::Reverse(t.order)));
        WickMonomial::new(ts)
    }

    /// Canonical monomials at a bidegree, in basis-state order.
    pub fn canonical_monomials(&self, weight: i64, ghost: i64) -> Vec<WickMonomial> {
        self.enumerate(weight, ghost)
            .iter()
            .map(|s| self.monomial_of(s))
            .collect()
    }

    fn realization(&self, g: GenId) -> Result<Realization, StateError> {
        self.realization
            .get(g as usize)
            .copied()
            .flatten()
            .ok_or_else(|| StateError::Unrealized(self.names.get(g as usize).cloned().unwrap_or_default()))
    }

    /// `L_m` on a PBW word (Virasoro index, not field index).
    fn virasoro(&self, m: i64, word: &[u32]) -> Arc<MatterVec> {
        let key = (m, Word::from_slice(word));
        if let Some(v) = self.matter_cache.lock().unwrap().get(&key) {
            return v.clone();
        }
        let mut out = MatterVec::new();
        if m == 0 {
            let w: i64 = word.iter().map(|&k| i64::from(k)).sum();
            matter_add(&mut out, Word::from_slice(word), &Coefficient::from_int(w));
        } else if word.is_empty() {
            if m <= -2 {
                out.insert(smallvec::smallvec![(-m) as u32], Coefficient::one());
            }
        } else if m <= -2 && -m >= i64::from(word[0]) {
            let mut w = Word::with_capacity(word.len() + 1);
            w.push((-m) as u32);
            w.extend_from_slice(word);
            out.insert(w, Coefficient::one());
        } else {
            let k1 = i64::from(word[0]);
            let rest = &word[1..];
            // L_m L_{-k} = L_{-k} L_m + (m + k) L_{m-k} + (κ/12)(m³ − m) δ_{m,k}
            let inner = self.virasoro(m, rest);
            for (w, c) in inner.iter() {
                let outer = self.virasoro(-k1, w);
                for (w2, c2) in outer.iter() {
                    matter_add(&mut out, w2.clone(), &(c * c2));
                }
            }
            if m + k1 != 0 {
                let shifted = self.virasoro(m - k1, rest);
                let f = Coefficient::from_int(m + k1);
                for (w, c) in shifted.iter() {
                    matter_add(&mut out, w.clone(), &(c * &f));
                }
            }
            if m == k1 {
                let f = &self.kappa * &Coefficient::ratio(m * m * m - m, 12);
                matter_add(&mut out, Word::from_slice(rest), &f);
            }
        }
        let out = Arc::new(out);
        self.matter_cache.lock().unwrap().insert(key, out.clone());
        out
    }

    fn generator_mode(&self, r: Realization, k: i64, s: &BasisState, out: &mut StateVector, c: &Coefficient) {
        let sign = |p: usize| if p.is_multiple_of(2) { c.clone() } else { -c };
        match r {
            Realization::B if k >= 0 => {
                let m = (k + 1) as u32;
                if let Some(p) = s.c.iter().position(|&x| x == m) {
                    let mut t = s.clone();
                    t.c.remove(p);
                    out.add_term(t, &sign(s.b.len() + p));
                }
            }
            Realization::B => {
                let n = (-k) as u32;
                if s.b.contains(&n) {
                    return;
                }
                let pos = s.b.iter().take_while(|&&x| x > n).count();
                let mut t = s.clone();
                t.b.insert(pos, n);
                out.add_term(t, &sign(pos));
            }
            Realization::C if k >= 0 => {
                let n = (k + 1) as u32;
                if let Some(p) = s.b.iter().position(|&x| x == n) {
                    let mut t = s.clone();
                    t.b.remove(p);
                    out.add_term(t, &sign(p));
                }
            }
            Realization::C => {
                let m = (-k) as u32;
                if s.c.contains(&m) {
                    return;
                }
                let pos = s.c.iter().take_while(|&&x| x > m).count();
                let mut t = s.clone();
                t.c.insert(pos, m);
                out.add_term(t, &sign(s.b.len() + pos));
            }
            Realization::L => {
                let res = self.virasoro(k - 1, &s.matter);
                for (w, a) in res.iter() {
                    let t = BasisState {
                        b: s.b.clone(),
                        c: s.c.clone(),
                        matter: w.clone(),
                    };
                    out.add_term(t, &(a * c));
                }
            }
        }
    }

    /// `(∂^p g)(k) · s`.
    pub fn term_mode(&self, t: &FieldTerm, k: i64, s: &BasisState) -> Result<StateVector, StateError> {
        let r = self.realization(t.generator)?;
        // (∂^p g)(k) = (−1)^p k(k−1)⋯(k−p+1) g(k−p)
        let mut f = Coefficient::falling(k, t.order);
        if t.order % 2 == 1 {
            f = -f;
        }
        let mut out = StateVector::zero();
        if !f.is_zero() {
            self.generator_mode(r, k - i64::from(t.order), s, &mut out, &f);
        }
        Ok(out)
    }

    fn out_of_range(&self, ghost: i64, weight: i64) -> bool {
        self.min_weight(ghost).is_none_or(|lo| weight < lo)
    }

    /// `m(k) · s` for a Wick monomial, by the normal-ordered mode expansion.
    pub fn monomial_mode(&self, m: &WickMonomial, k: i64, s: &BasisState) -> Result<Arc<StateVector>, StateError> {
        if m.is_identity() {
            let v = if k == -1 { StateVector::basis(s.clone()) } else { StateVector::zero() };
            return Ok(Arc::new(v));
        }
        if m.len() == 1 {
            return Ok(Arc::new(self.term_mode(&m.factors()[0], k, s)?));
        }
        let ws = self.weight(s);
        let gs = s.ghost();
        let out_w = ws + i64::from(m.weight()) - k - 1;
        if self.out_of_range(gs + i64::from(m.ghost()), out_w) {
            return Ok(Arc::new(StateVector::zero()));
        }
        let hit = self
            .mode_cache
            .lock()
            .unwrap()
            .map
            .get(m)
            .and_then(|by_k| by_k.get(&k))
            .and_then(|by_s| by_s.get(s))
            .cloned();
        if let Some(v) = hit {
            return Ok(v);
        }
        let (t, rest) = m.split_first().expect("composite");
        let tw = i64::from(t.weight());
        let tg = i64::from(t.ghost());
        let rw = i64::from(rest.weight());
        let rg = i64::from(rest.ghost());
        let mut out = StateVector::zero();
        // creation part of t: Σ_{j<0} t(j) rest(k−j−1)
        if let Some(lo) = self.min_weight(gs + rg) {
            let j_min = lo - ws - rw + k;
            for j in j_min.min(0)..0 {
                let inner = self.monomial_mode(&rest, k - j - 1, s)?;
                for (y, a) in inner.iter() {
                    let v = self.term_mode(&t, j, y)?;
                    out.accumulate(&v, a);
                }
            }
        }
        // annihilation part of t: ± Σ_{j≥0} rest(k−j−1) t(j)
        if let Some(lo) = self.min_weight(gs + tg) {
            let sign = if t.is_odd() && rest.is_odd() {
                -Coefficient::one()
            } else {
                Coefficient::one()
            };
            let j_max = ws + tw - 1 - lo;
            for j in 0..=j_max {
                let inner = self.term_mode(&t, j, s)?;
                for (y, a) in inner.iter() {
                    let v = self.monomial_mode(&rest, k - j - 1, y)?;
                    out.accumulate(&v, &(a * &sign));
                }
            }
        }
        let out = Arc::new(out);
        let mut cache = self.mode_cache.lock().unwrap();
        if cache.len >= MODE_CACHE_LIMIT {
            *cache = ModeCache::default();
        }
        cache.len += 1;
        cache.map.entry(m.clone()).or_default().entry(k).or_default().insert(s.clone(), out.clone());
        Ok(out)
    }

    /// `u(k) · v`, exact.
    pub fn apply(&self, u: &FieldExpr, k: i64, v: &StateVector) -> Result<StateVector, StateError> {
        let mut out = StateVector::zero();
        for (m, c) in u.terms() {
            for (s, a) in v.iter() {
                let r = self.monomial_mode(m, k, s)?;
                out.accumulate(&r, &(c * a));
            }
        }
        Ok(out)
    }

    fn check_cutoff(&self, v: &StateVector, cutoff: i64, what: &str) -> Result<(), StateError> {
        if let Some(w) = v.iter().map(|(s, _)| self.weight(s)).max() {
            if w > cutoff {
                return Err(StateError::CutoffTooSmall {
                    cutoff,
                    weight: w,
                    what: what.to_string(),
                });
            }
        }
        Ok(())
    }

    /// `u(n) · s` with both input and output confined to weight `≤ cutoff`.
    ///
    /// The action itself is exact at every intermediate step, so the cutoff
    /// only certifies that nothing outside the requested window was needed.
    pub fn mode_action(&self, u: &FieldExpr, n: i64, s: &StateVector, cutoff: i64) -> Result<StateVector, StateError> {
        self.check_cutoff(s, cutoff, "input state")?;
        let out = self.apply(u, n, s)?;
        self.check_cutoff(&out, cutoff, "output state")?;
        Ok(out)
    }

    /// `u(−1)` applied to the vacuum.
    pub fn state_of(&self, u: &FieldExpr) -> Result<StateVector, StateError> {
        let mut out = StateVector::zero();
        for (m, c) in u.terms() {
            let mut v = StateVector::vacuum();
            for t in m.factors().iter().rev() {
                let mut next = StateVector::zero();
                for (s, a) in v.iter() {
                    next.accumulate(&self.term_mode(t, -1, s)?, a);
                }
                v = next;
                if v.is_zero() {
                    break;
                }
            }
            out.accumulate(&v, c);
        }
        Ok(out)
    }

    /// Canonical monomial for `s` and the scalar with `state_of(monomial) = scalar · s`.
    fn image_scalar(&self, s: &BasisState) -> Result<(WickMonomial, Coefficient), StateError> {
        if let Some(r) = self.scalar_cache.lock().unwrap().get(s) {
            return Ok(r.clone());
        }
        let m = self.monomial_of(s);
        let e = FieldExpr::monomial(Some(self.key.clone()), m.clone(), Coefficient::one());
        let img = self.state_of(&e)?;
        let c = img.coefficient(s);
        if img.len() != 1 || c.is_zero() {
            return Err(StateError::NotInSpan(format!("canonical monomial {m} does not map to its basis state")));
        }
        self.scalar_cache.lock().unwrap().insert(s.clone(), (m.clone(), c.clone()));
        Ok((m, c))
    }

    /// The unique combination of canonical monomials whose state is `v`.
    ///
    /// Canonical monomials map to nonzero multiples of distinct basis states,
    /// so the solve is diagonal; each pivot is checked when first used.
    pub fn reconstruct(&self, v: &StateVector) -> Result<FieldExpr, StateError> {
        let mut out = FieldExpr::zero();
        for (s, a) in v.iter() {
            let (m, c) = self.image_scalar(s)?;
            out.add_term(m, &(a.checked_div(&c).expect("nonzero pivot")));
        }
        Ok(out.with_algebra(self.key.clone()))
    }

    /// Rank of the state map on canonical monomials at a bidegree, by
    /// exact elimination.
    pub fn state_map_rank(&self, weight: i64, ghost: i64) -> Result<(usize, usize), StateError> {
        let monos = self.canonical_monomials(weight, ghost);
        let mut images = Vec::with_capacity(monos.len());
        for m in &monos {
            let e = FieldExpr::monomial(Some(self.key.clone()), m.clone(), Coefficient::one());
            images.push(self.state_of(&e)?.0);
        }
        Ok((linalg::rank(images), monos.len()))
    }

    /// `(m, y)` pairs for which some component of a field with the given
    /// `(ghost, weight)` shifts maps `y` into weight range `[min, cutoff]`.
    pub fn mode_domain(&self, shifts: &[(i32, i32)], cutoff: i64) -> Vec<(i64, BasisState)> {
        let mut out = BTreeSet::new();
        for y in self.states_up_to(cutoff) {
            let wy = self.weight(&y);
            for &(g, w) in shifts {
                let Some(lo) = self.min_weight(y.ghost() + i64::from(g)) else {
                    continue;
                };
                let base = wy + i64::from(w) - 1;
                for m in base - cutoff..=base - lo {
                    out.insert((m, y.clone()));
                }
            }
        }
        out.into_iter().collect()
    }

    /// Matrix of `w(m)` on a domain.
    pub fn field_matrix(&self, w: &FieldExpr, domain: &[(i64, BasisState)]) -> Result<OperatorMatrix, StateError> {
        let mut entries = BTreeMap::new();
        for (m, y) in domain {
            let v = self.apply(w, *m, &StateVector::basis(y.clone()))?;
            if !v.is_zero() {
                entries.insert((*m, y.clone()), v);
            }
        }
        Ok(OperatorMatrix { entries })
    }

    /// `first(a) second(b) y`, memoized in `cache`.
    fn composite<'a>(
        &self,
        cache: &'a mut HashMap<(bool, i64, i64), StateVector>,
        swap: bool,
        (first, second): (&WickMonomial, &WickMonomial),
        (a, b): (i64, i64),
        y: &BasisState,
    ) -> Result<&'a StateVector, StateError> {
        use std::collections::hash_map::Entry;
        match cache.entry((swap, a, b)) {
            Entry::Occupied(e) => Ok(e.into_mut()),
            Entry::Vacant(e) => {
                let mut out = StateVector::zero();
                for (x, c) in self.monomial_mode(second, b, y)?.iter() {
                    out.accumulate(&*self.monomial_mode(first, a, x)?, c);
                }
                Ok(e.insert(out))
            }
        }
    }

    /// Column `(m, y)` of `(u ∘_n v)(m)` from the mode definition:
    /// `Σ_i (−1)^i C(n,i) [u(n−i) v(m+i) − (−1)^{n+|u||v|} v(n+m−i) u(i)] y`.
    fn oracle_column(
        &self,
        cache: &mut HashMap<(bool, i64, i64), StateVector>,
        (mu, mv): (&WickMonomial, &WickMonomial),
        n: i64,
        m: i64,
        y: &BasisState,
    ) -> Result<StateVector, StateError> {
        let wy = self.weight(y);
        let gy = y.ghost();
        let (wu, gu) = (i64::from(mu.weight()), i64::from(mu.ghost()));
        let (wv, gv) = (i64::from(mv.weight()), i64::from(mv.ghost()));
        let mut out = StateVector::zero();
        let cap = |i_max: i64| if n >= 0 { i_max.min(n) } else { i_max };
        if let Some(lo) = self.min_weight(gy + gv) {
            for i in 0..=cap(wy + wv - m - 1 - lo) {
                let c = Coefficient::binomial(n, i as u32);
                let c = if i % 2 == 0 { c } else { -c };
                out.accumulate(self.composite(cache, false, (mu, mv), (n - i, m + i), y)?, &c);
            }
        }
        if let Some(lo) = self.min_weight(gy + gu) {
            let odd = (n.rem_euclid(2) == 1) != (mu.is_odd() && mv.is_odd());
            for i in 0..=cap(wy + wu - 1 - lo) {
                let c = Coefficient::binomial(n, i as u32);
                let neg = (i % 2 == 0) != odd;
                let c = if neg { -c } else { c };
                out.accumulate(self.composite(cache, true, (mv, mu), (n + m - i, i), y)?, &c);
            }
        }
        Ok(out)
    }

    /// Matrix of `(u ∘_n v)(m)` on `domain`, computed from modes of `u` and
    /// `v` alone.
    pub fn oracle_matrix(&self, u: &FieldExpr, n: i64, v: &FieldExpr, domain: &[(i64, BasisState)]) -> Result<OperatorMatrix, StateError> {
        let blocks = [(n, domain.to_vec())];
        let mut out = OperatorMatrix::default();
        for (mu, cu) in u.terms() {
            for (mv, cv) in v.terms() {
                let part = self.oracle_blocks((mu, mv), &blocks)?;
                out.accumulate(&part[0], &(cu * cv));
            }
        }
        Ok(out)
    }

    /// Oracle matrices of `u ∘_n v` for several `(n, domain)` at once, sharing
    /// the composite mode actions between them.
    pub fn oracle_blocks(&self, pair: (&WickMonomial, &WickMonomial), blocks: &[(i64, Vec<(i64, BasisState)>)]) -> Result<Vec<OperatorMatrix>, StateError> {
        let mut by_state: BTreeMap<&BasisState, Vec<(usize, i64, i64)>> = BTreeMap::new();
        for (idx, (n, domain)) in blocks.iter().enumerate() {
            for (m, y) in domain {
                by_state.entry(y).or_default().push((idx, *n, *m));
            }
        }
        let mut out = vec![OperatorMatrix::default(); blocks.len()];
        let mut cache = HashMap::default();
        for (y, cols) in by_state {
            cache.clear();
            for (idx, n, m) in cols {
                let col = self.oracle_column(&mut cache, pair, n, m, y)?;
                if !col.is_zero() {
                    out[idx].entries.insert((m, y.clone()), col);
                }
            }
        }
        Ok(out)
    }

    pub fn circle_domain(&self, u: &FieldExpr, n: i64, v: &FieldExpr, cutoff: i64) -> Vec<(i64, BasisState)> {
        let mut shifts = BTreeSet::new();
        for mu in u.monomials() {
            for mv in v.monomials() {
                shifts.insert((
                    mu.ghost() + mv.ghost(),
                    mu.weight() + mv.weight() - n as i32 - 1,
                ));
            }
        }
        self.mode_domain(&shifts.into_iter().collect::<Vec<_>>(), cutoff)
    }

    /// Oracle matrix of `u ∘_n v` on all states up to `cutoff`.
    pub fn oracle_circle(&self, u: &FieldExpr, n: i64, v: &FieldExpr, cutoff: i64) -> Result<OperatorMatrix, StateError> {
        let domain = self.circle_domain(u, n, v, cutoff);
        self.oracle_matrix(u, n, v, &domain)
    }

    /// One plus the largest `n ≥ 0` for which the oracle sees a nonzero
    /// `u ∘_n v` on states up to `cutoff`; zero if there is none.
    pub fn pole_order_check(&self, u: &FieldExpr, v: &FieldExpr, cutoff: i64) -> Result<u32, StateError> {
        let mut n_max = -1i64;
        for mu in u.monomials() {
            for mv in v.monomials() {
                if let Some(lo) = self.min_weight(i64::from(mu.ghost() + mv.ghost())) {
                    n_max = n_max.max(i64::from(mu.weight() + mv.weight()) - 1 - lo);
                }
            }
        }
        let mut order = 0;
        for n in 0..=n_max {
            if !self.oracle_circle(u, n, v, cutoff)?.is_zero() {
                order = n as u32 + 1;
            }
        }
        Ok(order)
    }

    /// Mode word of a basis state, e.g. `b(-1) c(-2) L(-1) |0>`.
    pub fn format_state(&self, s: &BasisState) -> String {
        let mut out = String::new();
        let name = |slot: u8, fallback: &str| {
            self.terms
                .get(&slot)
                .map(|t| self.names[t.generator as usize].clone())
                .unwrap_or_else(|| fallback.to_string())
        };
        for &n in &s.b {
            let _ = write!(out, "{}(-{n}) ", name(B_SLOT, "b"));
        }
        for &m in &s.c {
            let _ = write!(out, "{}(-{m}) ", name(C_SLOT, "c"));
        }
        for &k in &s.matter {
            let _ = write!(out, "{}({}) ", name(L_SLOT, "L"), 1 - i64::from(k));
        }
        out.push_str("|0>");
        out
    }

    /// One state per line: mode word, then coefficient.
    pub fn dump(&self, v: &StateVector) -> String {
        let mut out = String::new();
        for (s, c) in v.iter() {
            let _ = writeln!(out, "{}  {}", self.format_state(s), c);
        }
        out
    }
}

/// Strictly decreasing sequences of exactly `count` positive integers with the given sum.
fn strict_parts(count: u32, sum: u32) -> Vec<Vec<u32>> {
    fn go(count: u32, sum: u32, max: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if count == 0 {
            if sum == 0 {
                out.push(prefix.clone());
            }
            return;
        }
        let min_rest = (count - 1) * count / 2;
        for p in (1..=max.min(sum)).rev() {
            if p < count || sum - p < min_rest {
                continue;
            }
            if (count - 1) * (2 * p - count) / 2 + p < sum {
                // even the largest completion below p is too small
                break;
            }
            prefix.push(p);
            go(count - 1, sum - p, p - 1, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    go(count, sum, sum, &mut Vec::new(), &mut out);
    out
}

/// Weakly decreasing partitions of `n` into parts in `[min, max]`.
fn partitions(n: u32, min: u32, max: u32) -> Vec<Vec<u32>> {
    fn go(n: u32, min: u32, max: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if n == 0 {
            out.push(prefix.clone());
            return;
        }
        for p in (min..=max.min(n)).rev() {
            prefix.push(p);
            go(n - p, min, p, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    go(n, min, max, &mut Vec::new(), &mut out);
    out
}

/// `k!` as a coefficient.
pub fn factorial_coeff(k: u32) -> Coefficient {
    Coefficient::from_bigint(factorial(k))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebras::{bc_algebra, brst_algebra, virasoro_algebra};

    fn bs(b: &[u32], c: &[u32], m: &[u32]) -> BasisState {
        BasisState {
            b: Word::from_slice(b),
            c: Word::from_slice(c),
            matter: Word::from_slice(m),
        }
    }

    #[test]
    fn clifford_action() {
        let a = bc_algebra(2);
        let sp = StateSpace::new(&a);
        let b = a.term(0, 0);
        let c = a.term(1, 0);
        let c1 = sp.term_mode(&c, -1, &BasisState::vacuum()).unwrap();
        assert_eq!(c1, StateVector::basis(bs(&[], &[1], &[])));
        let back = sp.term_mode(&b, 0, &bs(&[], &[1], &[])).unwrap();
        assert_eq!(back, StateVector::vacuum());
        // b(−1) c(−1)|0> then c(−2): passes one b, inserts ahead of c(−1)
        let v = sp.term_mode(&c, -2, &bs(&[1], &[1], &[])).unwrap();
        assert_eq!(v, StateVector::term(bs(&[1], &[2, 1], &[]), -Coefficient::one()));
        // (∂b)(0) = 0
        let db = a.term(0, 1);
        assert!(sp.term_mode(&db, 0, &bs(&[], &[1], &[])).unwrap().is_zero());
    }

    #[test]
    fn virasoro_action() {
        let a = virasoro_algebra(Coefficient::kappa());
        let sp = StateSpace::new(&a);
        let l = a.term(0, 0);
        for n in 0..4 {
            assert!(sp.term_mode(&l, n, &BasisState::vacuum()).unwrap().is_zero());
        }
        // L_2 L_{-2} v0 = (κ/2) v0
        let v = sp.term_mode(&l, 3, &bs(&[], &[], &[2])).unwrap();
        assert_eq!(v, StateVector::term(BasisState::vacuum(), Coefficient::kappa() * Coefficient::ratio(1, 2)));
        // L_{-2} L_{-3} v0 = L_{-3} L_{-2} v0 + L_{-5} v0
        let v = sp.term_mode(&l, -1, &bs(&[], &[], &[3])).unwrap();
        let mut want = StateVector::basis(bs(&[], &[], &[3, 2]));
        want.add_term(bs(&[], &[], &[5]), &Coefficient::one());
        assert_eq!(v, want);
    }

    #[test]
    fn partition_counts() {
        let a = virasoro_algebra(Coefficient::kappa());
        let sp = StateSpace::new(&a);
        assert_eq!(sp.enumerate(4, 0).len(), 2);
        assert_eq!(sp.enumerate(6, 0).len(), 4);
        assert_eq!(sp.enumerate(1, 0).len(), 0);
        let g = StateSpace::new(&bc_algebra(2));
        assert_eq!(g.enumerate(0, 0), vec![BasisState::vacuum()]);
        assert_eq!(g.min_weight(1), Some(-1));
        assert_eq!(g.min_weight(-1), Some(2));
    }

    #[test]
    fn state_map_examples() {
        let a = bc_algebra(2);
        let sp = StateSpace::new(&a);
        assert_eq!(sp.state_of(&FieldExpr::one()).unwrap(), StateVector::vacuum());
        let b = a.field("b", 0).unwrap();
        let sb = sp.state_of(&b).unwrap();
        assert_eq!(sb, StateVector::basis(bs(&[1], &[], &[])));
        assert_eq!(sp.weight(&bs(&[1], &[], &[])), 2);
        let bc = a.wick_monomial(&[("b", 0), ("c", 0)]).unwrap();
        let cb = a.wick_monomial(&[("c", 0), ("b", 0)]).unwrap();
        let sum = {
            let mut v = sp.state_of(&bc).unwrap();
            v.accumulate(&sp.state_of(&cb).unwrap(), &Coefficient::one());
            v
        };
        assert!(sum.is_zero());
        assert_eq!(sp.reconstruct(&sp.state_of(&cb).unwrap()).unwrap(), bc.neg());
    }

    #[test]
    fn tensor_state_round_trip() {
        let (a, _) = brst_algebra(Coefficient::kappa()).unwrap();
        let sp = StateSpace::new(&a);
        for w in -1..=3 {
            for g in sp.ghost_range(3) {
                for m in sp.canonical_monomials(w, g) {
                    let e = FieldExpr::monomial(Some(a.key().clone()), m.clone(), Coefficient::one());
                    assert!(m.is_canonical());
                    assert_eq!(sp.reconstruct(&sp.state_of(&e).unwrap()).unwrap(), e);
                }
            }
        }
    }

    #[test]
    fn cutoff_is_enforced() {
        let a = virasoro_algebra(Coefficient::kappa());
        let sp = StateSpace::new(&a);
        let l = a.field("L", 0).unwrap();
        let err = sp.mode_action(&l, -3, &StateVector::vacuum(), 2).unwrap_err();
        assert!(matches!(err, StateError::CutoffTooSmall { weight: 4, .. }));
        assert!(sp.mode_action(&l, -3, &StateVector::vacuum(), 4).is_ok());
    }

    #[test]
    fn oracle_basics() {
        let a = bc_algebra(2);
        let sp = StateSpace::new(&a);
        let b = a.field("b", 0).unwrap();
        let c = a.field("c", 0).unwrap();
        let m = sp.oracle_circle(&b, 0, &c, 3).unwrap();
        let id = sp.field_matrix(&FieldExpr::one(), &sp.circle_domain(&b, 0, &c, 3)).unwrap();
        assert_eq!(m, id);
        assert_eq!(sp.pole_order_check(&b, &c, 3).unwrap(), 1);
        assert_eq!(sp.pole_order_check(&b, &b, 3).unwrap(), 0);
    }

    #[test]
    fn strict_parts_enumeration() {
        assert_eq!(strict_parts(2, 5), vec![vec![4, 1], vec![3, 2]]);
        assert_eq!(strict_parts(0, 0), vec![Vec::<u32>::new()]);
        assert!(strict_parts(3, 5).is_empty());
        assert_eq!(partitions(6, 2, 6).len(), 4);
    }
}
