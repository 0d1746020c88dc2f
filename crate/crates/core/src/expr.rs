//! Field expressions: linear combinations of right-nested Wick monomials in
//! derivatives of generators, with ghost/weight bookkeeping.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::coeff::Coefficient;

/// Index of a generator inside its algebra's roster.
pub type GenId = u8;

/// Identifies the algebra an expression belongs to.
pub type AlgebraKey = Arc<str>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExprError {
    #[error("operands belong to different algebras ({left} vs {right})")]
    AlgebraMismatch { left: String, right: String },
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GeneratorSymbol {
    pub name: String,
    /// Ghost number `|g|`.
    pub ghost: i32,
    /// Conformal weight `||g||`.
    pub weight: i32,
}

impl GeneratorSymbol {
    pub fn new(name: impl Into<String>, ghost: i32, weight: i32) -> Self {
        GeneratorSymbol {
            name: name.into(),
            ghost,
            weight,
        }
    }

    pub fn is_odd(&self) -> bool {
        self.ghost.rem_euclid(2) == 1
    }
}

/// `d^order(g)` for a generator `g`.
///
/// The base ghost number and weight are carried along so that gradings can be
/// computed without consulting the algebra.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FieldTerm {
    pub generator: GenId,
    pub order: u32,
    base_ghost: i32,
    base_weight: i32,
}

impl FieldTerm {
    pub fn new(generator: GenId, symbol: &GeneratorSymbol, order: u32) -> Self {
        FieldTerm {
            generator,
            order,
            base_ghost: symbol.ghost,
            base_weight: symbol.weight,
        }
    }

    pub fn ghost(&self) -> i32 {
        self.base_ghost
    }

    pub fn weight(&self) -> i32 {
        self.base_weight + self.order as i32
    }

    pub fn base_weight(&self) -> i32 {
        self.base_weight
    }

    pub fn is_odd(&self) -> bool {
        self.base_ghost.rem_euclid(2) == 1
    }

    pub fn with_order(&self, order: u32) -> FieldTerm {
        FieldTerm { order, ..*self }
    }

    pub fn differentiated(&self, times: u32) -> FieldTerm {
        FieldTerm {
            order: self.order + times,
            ..*self
        }
    }
}

/// `:u1 (:u2 ( ... un ...):):` stored flat; the empty list is the identity.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct WickMonomial(Vec<FieldTerm>);

impl WickMonomial {
    pub fn identity() -> Self {
        WickMonomial(Vec::new())
    }

    pub fn new(factors: Vec<FieldTerm>) -> Self {
        WickMonomial(factors)
    }

    pub fn single(t: FieldTerm) -> Self {
        WickMonomial(vec![t])
    }

    pub fn factors(&self) -> &[FieldTerm] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.0.is_empty()
    }

    pub fn ghost(&self) -> i32 {
        self.0.iter().map(FieldTerm::ghost).sum()
    }

    pub fn weight(&self) -> i32 {
        self.0.iter().map(FieldTerm::weight).sum()
    }

    pub fn is_odd(&self) -> bool {
        self.ghost().rem_euclid(2) == 1
    }

    /// First factor and the remaining monomial.
    pub fn split_first(&self) -> Option<(FieldTerm, WickMonomial)> {
        let (first, rest) = self.0.split_first()?;
        Some((*first, WickMonomial(rest.to_vec())))
    }

    pub fn prepend(&self, t: FieldTerm) -> WickMonomial {
        let mut v = Vec::with_capacity(self.0.len() + 1);
        v.push(t);
        v.extend_from_slice(&self.0);
        WickMonomial(v)
    }

    /// Canonical basis order: generators grouped by roster index; odd
    /// generators with strictly decreasing derivative order, even ones weakly
    /// decreasing.
    pub fn is_canonical(&self) -> bool {
        self.0.windows(2).all(|w| {
            let (a, b) = (w[0], w[1]);
            match a.generator.cmp(&b.generator) {
                std::cmp::Ordering::Less => true,
                std::cmp::Ordering::Greater => false,
                std::cmp::Ordering::Equal => {
                    if a.is_odd() {
                        a.order > b.order
                    } else {
                        a.order >= b.order
                    }
                }
            }
        })
    }
}

/// Finite linear combination of Wick monomials; zero coefficients are never stored.
#[derive(Clone, Debug, Default)]
pub struct FieldExpr {
    algebra: Option<AlgebraKey>,
    terms: BTreeMap<WickMonomial, Coefficient>,
}

impl PartialEq for FieldExpr {
    fn eq(&self, other: &Self) -> bool {
        self.terms == other.terms
            && match (&self.algebra, &other.algebra) {
                (Some(a), Some(b)) => a == b || self.terms.keys().all(WickMonomial::is_identity),
                _ => true,
            }
    }
}

impl Eq for FieldExpr {}

impl FieldExpr {
    pub fn zero() -> Self {
        FieldExpr::default()
    }

    pub fn one() -> Self {
        FieldExpr::monomial(None, WickMonomial::identity(), Coefficient::one())
    }

    pub fn scalar(c: Coefficient) -> Self {
        FieldExpr::monomial(None, WickMonomial::identity(), c)
    }

    pub fn monomial(algebra: Option<AlgebraKey>, m: WickMonomial, c: Coefficient) -> Self {
        let mut terms = BTreeMap::new();
        let algebra = if m.is_identity() { None } else { algebra };
        if !c.is_zero() {
            terms.insert(m, c);
        }
        FieldExpr { algebra, terms }
    }

    pub fn algebra(&self) -> Option<&AlgebraKey> {
        self.algebra.as_ref()
    }

    /// Tags the expression with an algebra; identity-only expressions stay untagged
    /// until they contain a generator.
    pub fn with_algebra(mut self, key: AlgebraKey) -> Self {
        if self.terms.keys().any(|m| !m.is_identity()) {
            self.algebra = Some(key);
        }
        self
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&WickMonomial, &Coefficient)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, m: &WickMonomial) -> Coefficient {
        self.terms.get(m).cloned().unwrap_or_default()
    }

    pub fn monomials(&self) -> impl Iterator<Item = &WickMonomial> {
        self.terms.keys()
    }

    fn merged_key(&self, other: &FieldExpr) -> Result<Option<AlgebraKey>, ExprError> {
        match (&self.algebra, &other.algebra) {
            (Some(a), Some(b)) if a != b => Err(ExprError::AlgebraMismatch {
                left: a.to_string(),
                right: b.to_string(),
            }),
            (Some(a), _) => Ok(Some(a.clone())),
            (None, b) => Ok(b.clone()),
        }
    }

    pub fn add(&self, other: &FieldExpr) -> Result<FieldExpr, ExprError> {
        let mut out = self.clone();
        out.add_scaled(other, &Coefficient::one())?;
        Ok(out)
    }

    pub fn sub(&self, other: &FieldExpr) -> Result<FieldExpr, ExprError> {
        let mut out = self.clone();
        out.add_scaled(other, &-Coefficient::one())?;
        Ok(out)
    }

    /// `self += c * other`.
    pub fn add_scaled(&mut self, other: &FieldExpr, c: &Coefficient) -> Result<(), ExprError> {
        self.algebra = self.merged_key(other)?;
        self.accumulate(other, c);
        Ok(())
    }

    /// `self += c * other` for operands already known to share an algebra.
    pub(crate) fn accumulate(&mut self, other: &FieldExpr, c: &Coefficient) {
        if c.is_zero() {
            return;
        }
        if self.algebra.is_none() {
            self.algebra = other.algebra.clone();
        }
        for (m, a) in &other.terms {
            let x = if c.is_one() { a.clone() } else { a * c };
            match self.terms.get_mut(m) {
                Some(y) => {
                    *y += &x;
                    if y.is_zero() {
                        self.terms.remove(m);
                    }
                }
                None => {
                    self.terms.insert(m.clone(), x);
                }
            }
        }
    }

    /// Adds `c * m` in place, pruning a cancelled term.
    pub fn add_term(&mut self, m: WickMonomial, c: &Coefficient) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(v) => {
                v.insert(c.clone());
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn scale(&self, c: &Coefficient) -> FieldExpr {
        if c.is_zero() {
            return FieldExpr {
                algebra: self.algebra.clone(),
                terms: BTreeMap::new(),
            };
        }
        FieldExpr {
            algebra: self.algebra.clone(),
            terms: self.terms.iter().map(|(m, a)| (m.clone(), a * c)).collect(),
        }
    }

    pub fn neg(&self) -> FieldExpr {
        self.scale(&-Coefficient::one())
    }

    /// Splits into bigraded homogeneous parts `(ghost, weight, component)`,
    /// ordered by `(ghost, weight)`.
    pub fn grading(&self) -> Vec<(i32, i32, FieldExpr)> {
        let mut parts: BTreeMap<(i32, i32), FieldExpr> = BTreeMap::new();
        for (m, c) in &self.terms {
            let e = parts.entry((m.ghost(), m.weight())).or_insert_with(|| FieldExpr {
                algebra: self.algebra.clone(),
                terms: BTreeMap::new(),
            });
            e.terms.insert(m.clone(), c.clone());
        }
        parts
            .into_iter()
            .map(|((g, w), mut e)| {
                if e.terms.keys().all(WickMonomial::is_identity) {
                    e.algebra = None;
                }
                (g, w, e)
            })
            .collect()
    }

    /// `Some((ghost, weight))` if every term has the same bidegree. Zero has none.
    pub fn bidegree(&self) -> Option<(i32, i32)> {
        let mut it = self.terms.keys().map(|m| (m.ghost(), m.weight()));
        let first = it.next()?;
        it.all(|d| d == first).then_some(first)
    }

    /// Leibniz rule over the factor list. The result is not re-canonicalized.
    pub fn formal_derivative(&self) -> FieldExpr {
        let mut out = FieldExpr {
            algebra: self.algebra.clone(),
            terms: BTreeMap::new(),
        };
        for (m, c) in &self.terms {
            for i in 0..m.len() {
                let mut f = m.0.clone();
                f[i] = f[i].differentiated(1);
                out.add_term(WickMonomial(f), c);
            }
        }
        out
    }

    /// Applies `c -> f(c)` to every coefficient.
    pub fn map_coefficients(&self, f: impl Fn(&Coefficient) -> Coefficient) -> FieldExpr {
        let mut out = FieldExpr {
            algebra: self.algebra.clone(),
            terms: BTreeMap::new(),
        };
        for (m, c) in &self.terms {
            out.add_term(m.clone(), &f(c));
        }
        out
    }

    /// True if every coefficient has denominator 1.
    pub fn has_polynomial_coefficients(&self) -> bool {
        self.terms.values().all(Coefficient::is_polynomial)
    }
}

impl fmt::Display for WickMonomial {
    /// Debug-ish rendering by generator index; use `syntax::render` for names.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        write!(f, ":")?;
        for (i, t) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "g{}'{}", t.generator, t.order)?;
        }
        write!(f, ":")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn syms() -> (GeneratorSymbol, GeneratorSymbol, GeneratorSymbol) {
        (
            GeneratorSymbol::new("b", -1, 2),
            GeneratorSymbol::new("c", 1, -1),
            GeneratorSymbol::new("L", 0, 2),
        )
    }

    fn key() -> AlgebraKey {
        Arc::from("test")
    }

    fn mono(ts: &[(GenId, u32)]) -> WickMonomial {
        let (b, c, l) = syms();
        WickMonomial::new(
            ts.iter()
                .map(|&(g, k)| {
                    let s = match g {
                        0 => &b,
                        1 => &c,
                        _ => &l,
                    };
                    FieldTerm::new(g, s, k)
                })
                .collect(),
        )
    }

    fn e(ts: &[(GenId, u32)]) -> FieldExpr {
        FieldExpr::monomial(Some(key()), mono(ts), Coefficient::one())
    }

    #[test]
    fn additive_inverse_and_linearity() {
        let b = e(&[(0, 0)]);
        assert!(b.add(&b.neg()).unwrap().is_zero());
        let bc = e(&[(0, 0), (1, 0)]);
        let two = bc.add(&bc).unwrap();
        assert_eq!(two.coefficient(&mono(&[(0, 0), (1, 0)])), Coefficient::from_int(2));
        let l = e(&[(2, 0)]);
        assert_eq!(l.scale(&Coefficient::one()), l);
    }

    #[test]
    fn mismatched_algebras_are_rejected() {
        let a = e(&[(0, 0)]);
        let other = FieldExpr::monomial(Some(Arc::from("other")), mono(&[(0, 0)]), Coefficient::one());
        assert!(matches!(a.add(&other), Err(ExprError::AlgebraMismatch { .. })));
        // the identity is shared by every algebra
        assert!(a.add(&FieldExpr::one()).is_ok());
    }

    #[test]
    fn grading_examples() {
        let bc = e(&[(0, 0), (1, 0)]);
        let g = bc.grading();
        assert_eq!(g.len(), 1);
        assert_eq!((g[0].0, g[0].1), (0, 1));
        let one = FieldExpr::one().grading();
        assert_eq!((one[0].0, one[0].1), (0, 0));
        let mixed = bc.add(&e(&[(2, 0)])).unwrap().add(&FieldExpr::one()).unwrap();
        let parts = mixed.grading();
        assert_eq!(parts.len(), 3);
        let mut total = FieldExpr::zero();
        for (_, _, p) in &parts {
            total = total.add(p).unwrap();
        }
        assert_eq!(total, mixed);
    }

    #[test]
    fn leibniz_derivative() {
        assert!(FieldExpr::one().formal_derivative().is_zero());
        assert_eq!(e(&[(0, 0)]).formal_derivative(), e(&[(0, 1)]));
        let d = e(&[(0, 0), (1, 0)]).formal_derivative();
        assert_eq!(d, e(&[(0, 1), (1, 0)]).add(&e(&[(0, 0), (1, 1)])).unwrap());
    }

    #[test]
    fn canonical_order_rules() {
        assert!(mono(&[(0, 1), (0, 0), (1, 2), (1, 0), (2, 1), (2, 1)]).is_canonical());
        assert!(!mono(&[(0, 0), (0, 0)]).is_canonical());
        assert!(!mono(&[(1, 0), (0, 0)]).is_canonical());
        assert!(!mono(&[(2, 0), (2, 1)]).is_canonical());
    }
}
