//! Concrete algebras: the bc ghost system, the Virasoro algebra, their tensor
//! products, and the stress tensors that make them conformal.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use thiserror::Error;

use crate::coeff::Coefficient;
use crate::engine::{Engine, EngineError};
use crate::expr::{AlgebraKey, FieldExpr, FieldTerm, GenId, GeneratorSymbol, WickMonomial};

#[derive(Debug, Error)]
pub enum AlgebraError {
    #[error("generator name `{0}` appears in both tensor factors")]
    NameClash(String),
    #[error("both tensor factors carry a {0} sector")]
    SectorClash(&'static str),
    #[error("internal consistency check failed: {0}")]
    Inconsistent(String),
    #[error("invalid algebra selector `{input}`: {reason}")]
    Selector { input: String, reason: String },
    #[error(transparent)]
    Engine(#[from] EngineError),
}

/// Generators realized on the ghost Fock space.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GhostSector {
    pub lambda: i64,
    pub b: GenId,
    pub c: GenId,
}

/// Generator realized on the Verma quotient.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MatterSector {
    pub kappa: Coefficient,
    pub l: GenId,
}

/// Generator roster plus the singular part of the generator OPE table.
#[derive(Clone, Debug)]
pub struct AlgebraSpec {
    key: AlgebraKey,
    generators: Vec<GeneratorSymbol>,
    table: BTreeMap<(GenId, GenId, u32), FieldExpr>,
    locality: BTreeMap<(GenId, GenId), u32>,
    commutative: bool,
    ghost: Option<GhostSector>,
    matter: Option<MatterSector>,
}

fn kappa_label(kappa: &Coefficient) -> String {
    if *kappa == Coefficient::kappa() {
        "sym".to_string()
    } else {
        kappa.to_string()
    }
}

impl AlgebraSpec {
    pub fn key(&self) -> &AlgebraKey {
        &self.key
    }

    pub fn generators(&self) -> &[GeneratorSymbol] {
        &self.generators
    }

    pub fn generator(&self, id: GenId) -> &GeneratorSymbol {
        &self.generators[id as usize]
    }

    pub fn find(&self, name: &str) -> Option<GenId> {
        self.generators
            .iter()
            .position(|g| g.name == name)
            .map(|i| i as GenId)
    }

    /// `d^order(g)` for the generator at `id`.
    pub fn term(&self, id: GenId, order: u32) -> FieldTerm {
        FieldTerm::new(id, self.generator(id), order)
    }

    /// The generator named `name` (or its derivative) as an expression.
    pub fn field(&self, name: &str, order: u32) -> Option<FieldExpr> {
        let id = self.find(name)?;
        Some(FieldExpr::monomial(
            Some(self.key.clone()),
            WickMonomial::single(self.term(id, order)),
            Coefficient::one(),
        ))
    }

    /// Builds a monomial expression from `(name, order)` factors.
    pub fn wick_monomial(&self, factors: &[(&str, u32)]) -> Option<FieldExpr> {
        let mut terms = Vec::with_capacity(factors.len());
        for &(name, order) in factors {
            terms.push(self.term(self.find(name)?, order));
        }
        Some(FieldExpr::monomial(
            Some(self.key.clone()),
            WickMonomial::new(terms),
            Coefficient::one(),
        ))
    }

    /// `g_i ∘_n g_j` for `n ≥ 0`; `None` means zero.
    pub fn ope_entry(&self, i: GenId, j: GenId, n: u32) -> Option<&FieldExpr> {
        self.table.get(&(i, j, n))
    }

    pub fn table(&self) -> impl Iterator<Item = (&(GenId, GenId, u32), &FieldExpr)> {
        self.table.iter()
    }

    pub fn locality_bound(&self, i: GenId, j: GenId) -> u32 {
        self.locality.get(&(i, j)).copied().unwrap_or(0)
    }

    pub fn is_commutative(&self) -> bool {
        self.commutative
    }

    pub fn ghost_sector(&self) -> Option<&GhostSector> {
        self.ghost.as_ref()
    }

    pub fn matter_sector(&self) -> Option<&MatterSector> {
        self.matter.as_ref()
    }

    pub fn lambda(&self) -> Option<i64> {
        self.ghost.as_ref().map(|g| g.lambda)
    }

    pub fn kappa(&self) -> Option<&Coefficient> {
        self.matter.as_ref().map(|m| &m.kappa)
    }

    /// True when κ is the formal parameter rather than a number.
    pub fn kappa_is_formal(&self) -> bool {
        self.kappa().is_some_and(|k| !k.is_constant())
    }

    /// Sum of the central charges of the sectors present.
    pub fn central_charge(&self) -> Coefficient {
        let mut c = Coefficient::zero();
        if let Some(g) = &self.ghost {
            c += &bc_central_charge(g.lambda);
        }
        if let Some(m) = &self.matter {
            c += &m.kappa;
        }
        c
    }

    /// Same algebra with the commutativity flag overridden. Engines refuse
    /// algebras flagged non-commutative.
    pub fn with_commutativity(mut self, commutative: bool) -> Self {
        self.commutative = commutative;
        self
    }

    pub fn renamed(mut self, key: &str) -> Self {
        self.key = Arc::from(key);
        self
    }

    fn remap(expr: &FieldExpr, offset: GenId, roster: &[GeneratorSymbol]) -> FieldExpr {
        let mut out = FieldExpr::zero();
        for (m, c) in expr.terms() {
            let ts = m
                .factors()
                .iter()
                .map(|t| {
                    let g = t.generator + offset;
                    FieldTerm::new(g, &roster[g as usize], t.order)
                })
                .collect();
            out.add_term(WickMonomial::new(ts), c);
        }
        out
    }
}

/// `−12λ² + 12λ − 2`.
pub fn bc_central_charge(lambda: i64) -> Coefficient {
    Coefficient::from_int(-12 * lambda * lambda + 12 * lambda - 2)
}

pub fn bc_algebra(lambda: i64) -> AlgebraSpec {
    let weight = i32::try_from(lambda).expect("lambda fits in i32");
    let generators = vec![
        GeneratorSymbol::new("b", -1, weight),
        GeneratorSymbol::new("c", 1, 1 - weight),
    ];
    let mut table = BTreeMap::new();
    table.insert((0, 1, 0), FieldExpr::one());
    table.insert((1, 0, 0), FieldExpr::one());
    let mut locality = BTreeMap::new();
    locality.insert((0, 1), 1);
    locality.insert((1, 0), 1);
    AlgebraSpec {
        key: Arc::from(format!("bc:{lambda}")),
        generators,
        table,
        locality,
        commutative: true,
        ghost: Some(GhostSector { lambda, b: 0, c: 1 }),
        matter: None,
    }
}

pub fn virasoro_algebra(kappa: Coefficient) -> AlgebraSpec {
    let generators = vec![GeneratorSymbol::new("L", 0, 2)];
    let l = |order| {
        FieldExpr::monomial(
            None,
            WickMonomial::single(FieldTerm::new(0, &generators[0], order)),
            Coefficient::one(),
        )
    };
    let mut table = BTreeMap::new();
    table.insert((0, 0, 3), FieldExpr::scalar(&kappa * &Coefficient::ratio(1, 2)));
    table.insert((0, 0, 1), l(0).scale(&Coefficient::from_int(2)));
    table.insert((0, 0, 0), l(1));
    let mut locality = BTreeMap::new();
    locality.insert((0, 0), 4);
    AlgebraSpec {
        key: Arc::from(format!("vir:kappa={}", kappa_label(&kappa))),
        generators,
        table,
        locality,
        commutative: true,
        ghost: None,
        matter: Some(MatterSector { kappa, l: 0 }),
    }
}

/// Tensor product with regular cross OPEs; B's generators follow A's.
pub fn tensor(a: &AlgebraSpec, b: &AlgebraSpec) -> Result<AlgebraSpec, AlgebraError> {
    for g in &b.generators {
        if a.find(&g.name).is_some() {
            return Err(AlgebraError::NameClash(g.name.clone()));
        }
    }
    if a.ghost.is_some() && b.ghost.is_some() {
        return Err(AlgebraError::SectorClash("ghost"));
    }
    if a.matter.is_some() && b.matter.is_some() {
        return Err(AlgebraError::SectorClash("matter"));
    }
    let offset = a.generators.len() as GenId;
    let mut generators = a.generators.clone();
    generators.extend(b.generators.iter().cloned());
    let mut table = BTreeMap::new();
    for (k, e) in &a.table {
        table.insert(*k, AlgebraSpec::remap(e, 0, &generators));
    }
    for (&(i, j, n), e) in &b.table {
        table.insert((i + offset, j + offset, n), AlgebraSpec::remap(e, offset, &generators));
    }
    let mut locality = a.locality.clone();
    for (&(i, j), &n) in &b.locality {
        locality.insert((i + offset, j + offset), n);
    }
    let shift = |s: &GhostSector| GhostSector {
        lambda: s.lambda,
        b: s.b + offset,
        c: s.c + offset,
    };
    Ok(AlgebraSpec {
        key: Arc::from(format!("{}*{}", a.key, b.key)),
        generators,
        table,
        locality,
        commutative: a.commutative && b.commutative,
        ghost: a.ghost.clone().or_else(|| b.ghost.as_ref().map(shift)),
        matter: a.matter.clone().or_else(|| {
            b.matter.as_ref().map(|m| MatterSector {
                kappa: m.kappa.clone(),
                l: m.l + offset,
            })
        }),
    })
}

/// A stress tensor together with its central charge.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConformalStructure {
    pub stress_tensor: FieldExpr,
    pub central_charge: Coefficient,
}

impl ConformalStructure {
    /// Checks the Virasoro OPE of `T` with itself and the primary conditions
    /// `T∘₁g = ||g|| g`, `T∘₀g = ∂g` on every generator.
    pub fn verify(&self, engine: &Engine) -> Result<(), AlgebraError> {
        let t = &self.stress_tensor;
        let alg = engine.algebra();
        let check = |what: String, got: FieldExpr, want: FieldExpr| {
            if got == want {
                Ok(())
            } else {
                Err(AlgebraError::Inconsistent(format!(
                    "{what}: expected {}, got {}",
                    crate::syntax::render(&want, alg),
                    crate::syntax::render(&got, alg)
                )))
            }
        };
        let half_c = FieldExpr::scalar(&self.central_charge * &Coefficient::ratio(1, 2));
        check("T∘3T".into(), engine.circle(t, 3, t)?, half_c)?;
        check("T∘2T".into(), engine.circle(t, 2, t)?, FieldExpr::zero())?;
        check("T∘1T".into(), engine.circle(t, 1, t)?, t.scale(&Coefficient::from_int(2)))?;
        check("T∘0T".into(), engine.circle(t, 0, t)?, engine.derivative(t)?)?;
        for n in 4..8 {
            check(format!("T∘{n}T"), engine.circle(t, n, t)?, FieldExpr::zero())?;
        }
        for g in alg.generators() {
            let u = alg.field(&g.name, 0).expect("roster generator");
            let w = Coefficient::from_int(i64::from(g.weight));
            check(format!("T∘1{}", g.name), engine.circle(t, 1, &u)?, u.scale(&w))?;
            check(
                format!("T∘0{}", g.name),
                engine.circle(t, 0, &u)?,
                engine.derivative(&u)?,
            )?;
        }
        Ok(())
    }
}

/// `(1−λ):∂b c: − λ:b ∂c:` in the given algebra, which must contain b and c.
pub fn bc_stress_tensor_in(alg: &AlgebraSpec, lambda: i64) -> FieldExpr {
    let dbc = alg.wick_monomial(&[("b", 1), ("c", 0)]).expect("b and c present");
    let bdc = alg.wick_monomial(&[("b", 0), ("c", 1)]).expect("b and c present");
    let mut t = dbc.scale(&Coefficient::from_int(1 - lambda));
    t.accumulate(&bdc, &Coefficient::from_int(-lambda));
    t
}

/// The bc stress tensor, verified against the engine.
pub fn bc_stress_tensor(lambda: i64) -> Result<ConformalStructure, AlgebraError> {
    let alg = Arc::new(bc_algebra(lambda));
    let engine = Engine::new(alg.clone())?;
    let cs = ConformalStructure {
        stress_tensor: bc_stress_tensor_in(&alg, lambda),
        central_charge: bc_central_charge(lambda),
    };
    cs.verify(&engine)?;
    Ok(cs)
}

/// The stress tensor `L` of the Virasoro algebra.
pub fn virasoro_conformal(alg: &AlgebraSpec) -> Option<ConformalStructure> {
    let m = alg.matter_sector()?;
    Some(ConformalStructure {
        stress_tensor: alg.field(&alg.generator(m.l).name, 0)?,
        central_charge: m.kappa.clone(),
    })
}

/// `O(b,c) ⊗ O_κ(L)` at λ = 2 with total stress tensor `T_bc + L`.
pub fn brst_algebra(kappa: Coefficient) -> Result<(AlgebraSpec, ConformalStructure), AlgebraError> {
    let key = format!("brst:kappa={}", kappa_label(&kappa));
    let alg = tensor(&bc_algebra(2), &virasoro_algebra(kappa))?.renamed(&key);
    let mut t = bc_stress_tensor_in(&alg, 2);
    t.accumulate(&alg.field("L", 0).expect("L present"), &Coefficient::one());
    let cs = ConformalStructure {
        stress_tensor: t,
        central_charge: alg.central_charge(),
    };
    Ok((alg, cs))
}

/// Parsed `--algebra` selector.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Selector {
    Bc(i64),
    Vir(Option<Coefficient>),
    Brst(Option<Coefficient>),
}

impl fmt::Display for Selector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Selector::Bc(l) => write!(f, "bc:{l}"),
            Selector::Vir(None) => write!(f, "vir"),
            Selector::Brst(None) => write!(f, "brst"),
            Selector::Vir(Some(k)) => write!(f, "vir:kappa={}", kappa_label(k)),
            Selector::Brst(Some(k)) => write!(f, "brst:kappa={}", kappa_label(k)),
        }
    }
}

/// Parses `sym` or an exact rational such as `26`, `-1/2`.
pub fn parse_kappa(s: &str) -> Result<Coefficient, String> {
    let s = s.trim();
    if s == "sym" {
        return Ok(Coefficient::kappa());
    }
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let parse = |t: &str| -> Result<BigInt, String> {
        let digits = t.strip_prefix(['-', '+']).unwrap_or(t);
        if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) || digits.len() > 256 {
            return Err(format!("`{s}` is not `sym` or an exact rational"));
        }
        t.parse::<BigInt>().map_err(|e| e.to_string())
    };
    let (n, d) = (parse(num)?, parse(den)?);
    if d == BigInt::from(0) {
        return Err("zero denominator".into());
    }
    Ok(Coefficient::from_rational(BigRational::new(n, d)))
}

pub fn parse_selector(input: &str) -> Result<Selector, AlgebraError> {
    let err = |reason: &str| AlgebraError::Selector {
        input: input.to_string(),
        reason: reason.to_string(),
    };
    let s = input.trim();
    let (head, tail) = match s.split_once(':') {
        Some((h, t)) => (h, Some(t)),
        None => (s, None),
    };
    let kappa = |tail: Option<&str>| -> Result<Option<Coefficient>, AlgebraError> {
        match tail {
            None => Ok(None),
            Some(t) => {
                let v = t
                    .strip_prefix("kappa=")
                    .ok_or_else(|| err("expected `kappa=<rational|sym>`"))?;
                parse_kappa(v).map(Some).map_err(|r| err(&r))
            }
        }
    };
    match head {
        "bc" => {
            let t = tail.ok_or_else(|| err("expected `bc:<integer lambda>`"))?;
            let lambda: i64 = t.trim().parse().map_err(|_| err("lambda must be an integer"))?;
            if lambda.abs() > 1000 {
                return Err(err("lambda out of range"));
            }
            Ok(Selector::Bc(lambda))
        }
        "vir" => Ok(Selector::Vir(kappa(tail)?)),
        "brst" => Ok(Selector::Brst(kappa(tail)?)),
        _ => Err(err("unknown algebra; expected bc, vir or brst")),
    }
}

impl Selector {
    /// Replaces the κ value; `None` leaves the selector unchanged.
    pub fn with_kappa(self, kappa: Option<Coefficient>) -> Selector {
        match (self, kappa) {
            (Selector::Vir(_), Some(k)) => Selector::Vir(Some(k)),
            (Selector::Brst(_), Some(k)) => Selector::Brst(Some(k)),
            (s, _) => s,
        }
    }

    /// Builds the algebra and its conformal structure. Unspecified κ is formal.
    pub fn build(&self) -> Result<(AlgebraSpec, ConformalStructure), AlgebraError> {
        let k = |k: &Option<Coefficient>| k.clone().unwrap_or_else(Coefficient::kappa);
        match self {
            Selector::Bc(l) => {
                let alg = bc_algebra(*l);
                let cs = ConformalStructure {
                    stress_tensor: bc_stress_tensor_in(&alg, *l),
                    central_charge: bc_central_charge(*l),
                };
                Ok((alg, cs))
            }
            Selector::Vir(kappa) => {
                let alg = virasoro_algebra(k(kappa));
                let cs = virasoro_conformal(&alg).expect("matter sector");
                Ok((alg, cs))
            }
            Selector::Brst(kappa) => brst_algebra(k(kappa)),
        }
    }
}
