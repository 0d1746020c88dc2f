//! BRST current and differential on `O(b,c) ⊗ O_κ(L)`, the nilpotency
//! computation, homotopies on closed elements, and the BV operator and bracket.

use thiserror::Error;

use crate::algebras::{brst_algebra, ConformalStructure};
use crate::coeff::Coefficient;
use crate::engine::{Engine, EngineError, OpeResult};
use crate::expr::{FieldExpr, WickMonomial};
use crate::linalg::{self, Echelon, SparseVec};
use crate::states::{StateVector, factorial_coeff};
use crate::syntax::render;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BrstError {
    #[error("this operation needs kappa = 26, but kappa is {0}")]
    NotCritical(String),
    #[error("{0} is not BRST closed")]
    NotClosed(String),
    #[error("{0} is not homogeneous")]
    NotHomogeneous(String),
    #[error("identity check failed: {0}")]
    Contract(String),
    #[error(transparent)]
    Engine(#[from] EngineError),
}

pub type Result<T> = std::result::Result<T, BrstError>;

/// The four pieces of `J ∘₀ J` for `J = :cL: + :bc∂c:`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JSquareParts {
    /// `(:cL:) ∘₀ (:cL:)`
    pub matter: FieldExpr,
    /// `(:cL:) ∘₀ (:bc∂c:)`
    pub matter_ghost: FieldExpr,
    /// `(:bc∂c:) ∘₀ (:cL:)`
    pub ghost_matter: FieldExpr,
    /// `(:bc∂c:) ∘₀ (:bc∂c:)`
    pub ghost: FieldExpr,
    pub total: FieldExpr,
}

/// Kernel of the differential at one bidegree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClosedBasis {
    pub weight: i64,
    pub ghost: i64,
    pub kernel: Vec<FieldExpr>,
    /// Images `d(m)` of the canonical monomials one ghost number lower.
    pub image: Vec<FieldExpr>,
    pub kernel_dim: usize,
    pub image_dim: usize,
}

pub struct BrstContext {
    engine: Engine,
    conformal: ConformalStructure,
    b: FieldExpr,
    j: FieldExpr,
    j_matter: FieldExpr,
    j_ghost: FieldExpr,
}

fn to_vec(e: &FieldExpr) -> SparseVec<WickMonomial> {
    e.terms().map(|(m, c)| (m.clone(), c.clone())).collect()
}

impl BrstContext {
    /// Builds the tensor algebra at the given κ, the current `J`, and checks
    /// the Cartan identity `ope(J, b) = {0 ↦ L^C}`.
    pub fn new(kappa: Coefficient) -> Result<BrstContext> {
        let (alg, conformal) = brst_algebra(kappa).map_err(|e| BrstError::Contract(e.to_string()))?;
        let j_matter = alg.wick_monomial(&[("c", 0), ("L", 0)]).expect("brst roster");
        let j_ghost = alg.wick_monomial(&[("b", 0), ("c", 0), ("c", 1)]).expect("brst roster");
        let b = alg.field("b", 0).expect("brst roster");
        let engine = Engine::new(alg)?;
        let j = engine.normal_form(&j_matter.add(&j_ghost).map_err(EngineError::from)?)?;
        let ctx = BrstContext {
            engine,
            conformal,
            b,
            j,
            j_matter,
            j_ghost,
        };
        ctx.check_cartan()?;
        Ok(ctx)
    }

    fn check_cartan(&self) -> Result<()> {
        let first = self.engine.circle(&self.j, 0, &self.b)?;
        if &first != self.l_total() {
            return Err(BrstError::Contract(format!("J ∘0 b = {} instead of L^C", self.show(&first))));
        }
        Ok(())
    }

    /// The full singular part of `J(z) b(w)`.
    pub fn cartan_ope(&self) -> Result<OpeResult> {
        Ok(self.engine.ope(&self.j, &self.b)?)
    }

    pub fn engine(&self) -> &Engine {
        &self.engine
    }

    pub fn kappa(&self) -> &Coefficient {
        self.engine.algebra().kappa().expect("matter sector")
    }

    pub fn is_critical(&self) -> bool {
        *self.kappa() == Coefficient::from_int(26)
    }

    fn require_critical(&self) -> Result<()> {
        if self.is_critical() {
            Ok(())
        } else {
            let k = self.kappa();
            Err(BrstError::NotCritical(if k.is_constant() { k.to_string() } else { "formal".into() }))
        }
    }

    fn show(&self, e: &FieldExpr) -> String {
        render(e, self.engine.algebra())
    }

    /// `L^C = T_bc + L`.
    pub fn l_total(&self) -> &FieldExpr {
        &self.conformal.stress_tensor
    }

    pub fn conformal(&self) -> &ConformalStructure {
        &self.conformal
    }

    /// `J = :cL: + :bc∂c:`.
    pub fn brst_current(&self) -> &FieldExpr {
        &self.j
    }

    /// `[Q, u] = J ∘₀ u`.
    pub fn brst_d(&self, u: &FieldExpr) -> Result<FieldExpr> {
        Ok(self.engine.circle(&self.j, 0, u)?)
    }

    pub fn j_square(&self) -> Result<FieldExpr> {
        self.brst_d(&self.j)
    }

    /// `J ∘₀ J` split along `J = :cL: + :bc∂c:`.
    pub fn j_square_parts(&self) -> Result<JSquareParts> {
        let e = &self.engine;
        let (m, g) = (&self.j_matter, &self.j_ghost);
        let parts = JSquareParts {
            matter: e.circle(m, 0, m)?,
            matter_ghost: e.circle(m, 0, g)?,
            ghost_matter: e.circle(g, 0, m)?,
            ghost: e.circle(g, 0, g)?,
            total: self.j_square()?,
        };
        let mut sum = parts.matter.clone();
        for p in [&parts.matter_ghost, &parts.ghost_matter, &parts.ghost] {
            sum.add_scaled(p, &Coefficient::one()).map_err(EngineError::from)?;
        }
        if sum != parts.total {
            return Err(BrstError::Contract("the four pieces do not add up to J ∘0 J".into()));
        }
        Ok(parts)
    }

    fn derivative_image(&self, ghost: i32, weight: i32) -> Result<Echelon<WickMonomial>> {
        let mut ech = Echelon::new();
        for m in self.engine.space().canonical_monomials(i64::from(weight) - 1, i64::from(ghost)) {
            let e = FieldExpr::monomial(Some(self.engine.algebra().key().clone()), m, Coefficient::one());
            ech.insert(to_vec(&self.engine.derivative(&e)?));
        }
        Ok(ech)
    }

    fn sources(&self, ghost: i32, weight: i32) -> Vec<FieldExpr> {
        self.engine
            .space()
            .canonical_monomials(i64::from(weight) - 1, i64::from(ghost))
            .into_iter()
            .map(|m| FieldExpr::monomial(Some(self.engine.algebra().key().clone()), m, Coefficient::one()))
            .collect()
    }

    /// `e = ∂p + r` with `r` the canonical remainder modulo the image of `∂`.
    pub fn split_mod_derivative(&self, e: &FieldExpr) -> Result<(FieldExpr, FieldExpr)> {
        let e = self.engine.normal_form(e)?;
        let Some((ghost, weight)) = e.bidegree() else {
            if e.is_zero() {
                return Ok((e.clone(), e));
            }
            return Err(BrstError::NotHomogeneous(self.show(&e)));
        };
        let ech = self.derivative_image(ghost, weight)?;
        let (rem, used) = ech.reduce(&to_vec(&e));
        let sources = self.sources(ghost, weight);
        let mut primitive = FieldExpr::zero();
        for (i, c) in &used {
            primitive.add_scaled(&sources[*i], c).map_err(EngineError::from)?;
        }
        let mut r = FieldExpr::zero();
        for (m, c) in rem {
            r.add_term(m, &c);
        }
        let key = self.engine.algebra().key().clone();
        Ok((primitive.with_algebra(key.clone()), r.with_algebra(key)))
    }

    /// Canonical representative of `e` modulo total derivatives.
    pub fn reduce_mod_derivative(&self, e: &FieldExpr) -> Result<FieldExpr> {
        Ok(self.split_mod_derivative(e)?.1)
    }

    /// True if the zero mode `Res_w e(w) = e(0)` kills every state up to `cutoff`.
    pub fn residue_vanishes(&self, e: &FieldExpr, cutoff: i64) -> Result<bool> {
        let space = self.engine.space();
        for s in space.states_up_to(cutoff) {
            let v = space
                .apply(e, 0, &StateVector::basis(s))
                .map_err(EngineError::from)?;
            if !v.is_zero() {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Basis of the kernel of `[Q, −]` on canonical monomials at `(weight, ghost)`.
    pub fn q_closed_basis(&self, weight: i64, ghost: i64) -> Result<ClosedBasis> {
        self.require_critical()?;
        let key = self.engine.algebra().key().clone();
        let space = self.engine.space();
        let expr = |m: WickMonomial| FieldExpr::monomial(Some(key.clone()), m, Coefficient::one());
        let monos: Vec<FieldExpr> = space.canonical_monomials(weight, ghost).into_iter().map(expr).collect();
        let mut images = Vec::with_capacity(monos.len());
        for m in &monos {
            images.push(to_vec(&self.brst_d(m)?));
        }
        let mut kernel = Vec::new();
        for combo in linalg::kernel(images) {
            let mut k = FieldExpr::zero();
            for (i, c) in combo {
                k.add_scaled(&monos[i], &c).map_err(EngineError::from)?;
            }
            kernel.push(k.with_algebra(key.clone()));
        }
        let mut image = Vec::new();
        for m in space.canonical_monomials(weight, ghost - 1).into_iter().map(expr) {
            let d = self.brst_d(&m)?;
            if !d.is_zero() {
                image.push(d);
            }
        }
        let image_dim = linalg::rank(image.iter().map(to_vec));
        Ok(ClosedBasis {
            weight,
            ghost,
            kernel_dim: kernel.len(),
            kernel,
            image,
            image_dim,
        })
    }

    fn require_closed(&self, u: &FieldExpr) -> Result<()> {
        if self.brst_d(u)?.is_zero() {
            Ok(())
        } else {
            Err(BrstError::NotClosed(self.show(u)))
        }
    }

    /// `A = Σ_{m≥0} (−1)^{m+1} ∂^m(v ∘_m u)/(m+1)!`, so that
    /// `:vu: − (−1)^{|u||v|} :uv: = −∂A`.
    pub fn homotopy_primitive(&self, u: &FieldExpr, v: &FieldExpr) -> Result<FieldExpr> {
        let e = &self.engine;
        let mut a = FieldExpr::zero().with_algebra(e.algebra().key().clone());
        for (m, x) in e.ope(v, u)?.singular {
            let d = e.divided_derivative(&x, m)?;
            let f = factorial_coeff(m)
                .checked_div(&factorial_coeff(m + 1))
                .expect("nonzero factorial");
            let f = if m % 2 == 0 { -f } else { f };
            a.add_scaled(&d, &f).map_err(EngineError::from)?;
        }
        Ok(a)
    }

    /// `h = b ∘₀ A` with `:vu: − (−1)^{|u||v|} :uv: = −[Q, h]` for closed `u`, `v`.
    pub fn commutativity_homotopy(&self, u: &FieldExpr, v: &FieldExpr) -> Result<FieldExpr> {
        self.require_critical()?;
        self.require_closed(u)?;
        self.require_closed(v)?;
        let e = &self.engine;
        let a = self.homotopy_primitive(u, v)?;
        if !self.brst_d(&a)?.is_zero() {
            return Err(BrstError::Contract("[Q, A] ≠ 0".into()));
        }
        let h = e.circle(&self.b, 0, &a)?;
        let mut lhs = e.wick(v, u)?;
        for (gu, _, cu) in u.grading() {
            for (gv, _, cv) in v.grading() {
                let s = if gu.rem_euclid(2) == 1 && gv.rem_euclid(2) == 1 {
                    Coefficient::one()
                } else {
                    -Coefficient::one()
                };
                lhs.add_scaled(&e.wick(&cu, &cv)?, &s).map_err(EngineError::from)?;
            }
        }
        if lhs != self.brst_d(&h)?.neg() {
            return Err(BrstError::Contract(format!(
                "commutativity homotopy fails for ({}, {})",
                self.show(u),
                self.show(v)
            )));
        }
        Ok(h)
    }

    /// `b ∘₁ u`, with `[Q, b ∘₁ u] = ||u|| u` checked for closed homogeneous `u`.
    pub fn weight_homotopy(&self, u: &FieldExpr) -> Result<FieldExpr> {
        self.require_critical()?;
        self.require_closed(u)?;
        let u = self.engine.normal_form(u)?;
        let weight = match u.bidegree() {
            Some((_, w)) => w,
            None if u.is_zero() => 0,
            None => return Err(BrstError::NotHomogeneous(self.show(&u))),
        };
        let h = self.bv_delta(&u)?;
        if self.brst_d(&h)? != u.scale(&Coefficient::from_int(i64::from(weight))) {
            return Err(BrstError::Contract(format!(
                "[Q, b∘1 u] ≠ ||u|| u for u = {}",
                self.show(&u)
            )));
        }
        Ok(h)
    }

    /// `Δu = b ∘₁ u`.
    pub fn bv_delta(&self, u: &FieldExpr) -> Result<FieldExpr> {
        Ok(self.engine.circle(&self.b, 1, u)?)
    }

    /// `{u, v}` from `(−1)^{|u|}{u,v} = Δ:uv: − :(Δu)v: − (−1)^{|u|} :u(Δv):`.
    pub fn bv_bracket(&self, u: &FieldExpr, v: &FieldExpr) -> Result<FieldExpr> {
        let e = &self.engine;
        let dv = self.bv_delta(v)?;
        let mut out = FieldExpr::zero().with_algebra(e.algebra().key().clone());
        for (g, _, uc) in u.grading() {
            let odd = g.rem_euclid(2) == 1;
            let mut x = self.bv_delta(&e.wick(&uc, v)?)?;
            x.add_scaled(&e.wick(&self.bv_delta(&uc)?, v)?, &-Coefficient::one())
                .map_err(EngineError::from)?;
            let s = if odd { Coefficient::one() } else { -Coefficient::one() };
            x.add_scaled(&e.wick(&uc, &dv)?, &s).map_err(EngineError::from)?;
            let s = if odd { -Coefficient::one() } else { Coefficient::one() };
            out.add_scaled(&x, &s).map_err(EngineError::from)?;
        }
        Ok(out)
    }

    /// `A∘₁:BC: − :(A∘₁B)C: − (−1)^{|A||B|} :B(A∘₁C): = (A∘₀B)∘₀C`.
    pub fn second_order_identity_check(&self, a: &FieldExpr, b: &FieldExpr, c: &FieldExpr) -> Result<bool> {
        let e = &self.engine;
        let mut lhs = e.circle(a, 1, &e.wick(b, c)?)?;
        lhs.add_scaled(&e.wick(&e.circle(a, 1, b)?, c)?, &-Coefficient::one())
            .map_err(EngineError::from)?;
        for (ga, _, ac) in a.grading() {
            for (gb, _, bc) in b.grading() {
                let s = if ga.rem_euclid(2) == 1 && gb.rem_euclid(2) == 1 {
                    Coefficient::one()
                } else {
                    -Coefficient::one()
                };
                lhs.add_scaled(&e.wick(&bc, &e.circle(&ac, 1, c)?)?, &s)
                    .map_err(EngineError::from)?;
            }
        }
        let rhs = e.circle(&e.circle(a, 0, b)?, 0, c)?;
        Ok(lhs == rhs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_expr;

    #[test]
    fn current_and_cartan() {
        let ctx = BrstContext::new(Coefficient::kappa()).unwrap();
        assert_eq!(ctx.brst_current().bidegree(), Some((1, 1)));
        let b = ctx.engine().algebra().field("b", 0).unwrap();
        assert_eq!(&ctx.brst_d(&b).unwrap(), ctx.l_total());
        let ope = ctx.cartan_ope().unwrap();
        let bc = ctx.engine().algebra().wick_monomial(&[("b", 0), ("c", 0)]).unwrap();
        assert_eq!(ope.singular.get(&1), Some(&bc.neg()));
        assert_eq!(ope.locality_order, 2);
        assert!(ctx.brst_d(&FieldExpr::one()).unwrap().is_zero());
    }

    #[test]
    fn j_square_matches_closed_form() {
        let ctx = BrstContext::new(Coefficient::kappa()).unwrap();
        let e = ctx.engine();
        let want = parse_expr("3/2*d(:d2(c) c:) + (kappa - 26)/12*:d3(c) c:", e).unwrap();
        assert_eq!(ctx.j_square().unwrap(), e.normal_form(&want).unwrap());
        let r = ctx.reduce_mod_derivative(&ctx.j_square().unwrap()).unwrap();
        let want = parse_expr("(kappa - 26)/12*:d3(c) c:", e).unwrap();
        assert_eq!(r, want);
        let (p, _) = ctx.split_mod_derivative(&ctx.j_square().unwrap()).unwrap();
        assert_eq!(p, parse_expr("3/2*:d2(c) c:", e).unwrap());
    }

    #[test]
    fn critical_only_operations() {
        let ctx = BrstContext::new(Coefficient::kappa()).unwrap();
        assert!(matches!(ctx.q_closed_basis(0, 0), Err(BrstError::NotCritical(_))));
        let crit = BrstContext::new(Coefficient::from_int(26)).unwrap();
        let basis = crit.q_closed_basis(0, 0).unwrap();
        assert!(basis.kernel.contains(&FieldExpr::one()));
    }

    #[test]
    fn bv_basics() {
        let ctx = BrstContext::new(Coefficient::from_int(26)).unwrap();
        let a = ctx.engine().algebra();
        let c = a.field("c", 0).unwrap();
        assert!(ctx.bv_delta(&FieldExpr::one()).unwrap().is_zero());
        assert!(ctx.bv_delta(&c).unwrap().is_zero());
        assert!(ctx.bv_bracket(&c, &FieldExpr::one()).unwrap().is_zero());
        assert!(ctx.bv_bracket(&FieldExpr::one(), &c).unwrap().is_zero());
        let one = FieldExpr::one();
        assert!(ctx.second_order_identity_check(&one, &one, &one).unwrap());
    }
}
