//! Exact coefficients: rational functions in the central-charge parameter `kappa`.
//!
//! A [`Coefficient`] is stored as `num / den` with `den` monic and
//! `gcd(num, den) = 1`, so structural equality is mathematical equality.

use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Dense univariate polynomial in `kappa` over the rationals, lowest degree first.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Poly(Vec<BigRational>);

impl Poly {
    pub fn zero() -> Self {
        Poly(Vec::new())
    }

    pub fn one() -> Self {
        Poly::constant(BigRational::one())
    }

    pub fn constant(c: BigRational) -> Self {
        let mut p = Poly(vec![c]);
        p.trim();
        p
    }

    /// The monomial `kappa^k`.
    pub fn kappa_pow(k: usize) -> Self {
        let mut v = vec![BigRational::zero(); k + 1];
        v[k] = BigRational::one();
        Poly(v)
    }

    pub fn from_coeffs(coeffs: Vec<BigRational>) -> Self {
        let mut p = Poly(coeffs);
        p.trim();
        p
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.0
    }

    fn trim(&mut self) {
        while self.0.last().is_some_and(|c| c.is_zero()) {
            self.0.pop();
        }
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.0.len() == 1 && self.0[0].is_one()
    }

    /// Degree, with `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.0.len().checked_sub(1)
    }

    pub fn leading(&self) -> Option<&BigRational> {
        self.0.last()
    }

    pub fn scale(&self, c: &BigRational) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly(self.0.iter().map(|a| a * c).collect())
    }

    pub fn eval(&self, at: &BigRational) -> BigRational {
        let mut acc = BigRational::zero();
        for c in self.0.iter().rev() {
            acc = acc * at + c;
        }
        acc
    }

    fn add_ref(&self, other: &Poly) -> Poly {
        let n = self.0.len().max(other.0.len());
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            match (self.0.get(i), other.0.get(i)) {
                (Some(a), Some(b)) => out.push(a + b),
                (Some(a), None) => out.push(a.clone()),
                (None, Some(b)) => out.push(b.clone()),
                (None, None) => unreachable!(),
            }
        }
        Poly::from_coeffs(out)
    }

    fn neg_ref(&self) -> Poly {
        Poly(self.0.iter().map(|c| -c).collect())
    }

    fn mul_ref(&self, other: &Poly) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![BigRational::zero(); self.0.len() + other.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.0.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly::from_coeffs(out)
    }

    /// Euclidean division; panics on a zero divisor.
    pub fn div_rem(&self, divisor: &Poly) -> (Poly, Poly) {
        let dd = divisor.degree().expect("polynomial division by zero");
        let lead = divisor.0[dd].clone();
        let mut rem = self.0.clone();
        let mut quot = vec![BigRational::zero(); self.0.len().saturating_sub(dd)];
        while rem.len() > dd && !rem.is_empty() {
            let top = rem.len() - 1;
            let q = &rem[top] / &lead;
            if !q.is_zero() {
                for (k, c) in divisor.0.iter().enumerate() {
                    rem[top - dd + k] -= &q * c;
                }
            }
            quot[top - dd] = q;
            rem.pop();
            while rem.last().is_some_and(|c| c.is_zero()) {
                rem.pop();
            }
        }
        (Poly::from_coeffs(quot), Poly::from_coeffs(rem))
    }

    fn monic(&self) -> Poly {
        match self.leading() {
            None => Poly::zero(),
            Some(l) if l.is_one() => self.clone(),
            Some(l) => self.scale(&l.recip()),
        }
    }

    /// Monic greatest common divisor.
    pub fn gcd(&self, other: &Poly) -> Poly {
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let (_, r) = a.div_rem(&b);
            a = b;
            b = r;
        }
        a.monic()
    }

    /// Splits into `content * primitive`, where `primitive` has coprime integer
    /// coefficients and a positive leading coefficient.
    pub fn content_split(&self) -> (BigRational, Vec<BigInt>) {
        if self.is_zero() {
            return (BigRational::zero(), Vec::new());
        }
        let mut lcm_den = BigInt::one();
        for c in &self.0 {
            lcm_den = lcm_den.lcm(c.denom());
        }
        let ints: Vec<BigInt> = self
            .0
            .iter()
            .map(|c| c.numer() * (&lcm_den / c.denom()))
            .collect();
        let mut g = BigInt::zero();
        for i in &ints {
            g = g.gcd(i);
        }
        if ints.last().is_some_and(|l| l.is_negative()) {
            g = -g;
        }
        let prim = ints.iter().map(|i| i / &g).collect();
        (BigRational::new(g, lcm_den), prim)
    }
}

/// An exact rational function `num(kappa) / den(kappa)`. Constants that fit
/// in `i64` are stored inline; every value has exactly one representation.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Coefficient(Repr);

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
enum Repr {
    /// `num / den` in lowest terms with `den > 0`.
    Small(i64, i64),
    Frac(Frac),
}

fn gcd_i128(mut a: i128, mut b: i128) -> i128 {
    a = a.abs();
    b = b.abs();
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

impl Default for Coefficient {
    fn default() -> Self {
        Coefficient::zero()
    }
}

impl Coefficient {
    fn small(num: i128, den: i128) -> Self {
        debug_assert!(den != 0);
        if den == 1 {
            if let Ok(n) = i64::try_from(num) {
                if n != i64::MIN {
                    return Coefficient(Repr::Small(n, 1));
                }
            }
        }
        let g = gcd_i128(num, den).max(1);
        let (mut n, mut d) = (num / g, den / g);
        if d < 0 {
            n = -n;
            d = -d;
        }
        match (i64::try_from(n), i64::try_from(d)) {
            (Ok(n), Ok(d)) if n != i64::MIN => Coefficient(Repr::Small(n, d)),
            _ => Coefficient::from_frac(Frac::from_rational(BigRational::new(n.into(), d.into()))),
        }
    }

    fn from_frac(f: Frac) -> Self {
        if let Some(r) = f.as_rational() {
            if let (Some(n), Some(d)) = (r.numer().to_i64(), r.denom().to_i64()) {
                if n != i64::MIN {
                    return Coefficient(Repr::Small(n, d));
                }
            }
        }
        Coefficient(Repr::Frac(f))
    }

    fn frac(&self) -> std::borrow::Cow<'_, Frac> {
        match &self.0 {
            Repr::Small(n, d) => std::borrow::Cow::Owned(Frac::from_rational(BigRational::new((*n).into(), (*d).into()))),
            Repr::Frac(f) => std::borrow::Cow::Borrowed(f),
        }
    }

    pub fn zero() -> Self {
        Coefficient(Repr::Small(0, 1))
    }

    pub fn one() -> Self {
        Coefficient(Repr::Small(1, 1))
    }

    pub fn from_int(n: i64) -> Self {
        Coefficient::small(n.into(), 1)
    }

    pub fn from_bigint(n: BigInt) -> Self {
        Coefficient::from_rational(BigRational::from_integer(n))
    }

    pub fn ratio(n: i64, d: i64) -> Self {
        assert!(d != 0, "zero denominator");
        Coefficient::small(n.into(), d.into())
    }

    pub fn from_rational(r: BigRational) -> Self {
        Coefficient::from_frac(Frac::from_rational(r))
    }

    /// The formal parameter `kappa`.
    pub fn kappa() -> Self {
        Coefficient(Repr::Frac(Frac::kappa()))
    }

    pub fn from_poly(p: Poly) -> Self {
        Coefficient::from_frac(Frac::from_poly(p))
    }

    /// Builds `num / den` in lowest terms. Returns `None` if `den` is zero.
    pub fn from_fraction(num: Poly, den: Poly) -> Option<Self> {
        Frac::from_fraction(num, den).map(Coefficient::from_frac)
    }

    pub fn numer(&self) -> Poly {
        self.frac().num.clone()
    }

    pub fn denom(&self) -> Poly {
        self.frac().den.clone()
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.0, Repr::Small(0, _))
    }

    pub fn is_one(&self) -> bool {
        matches!(self.0, Repr::Small(1, 1))
    }

    /// True when the denominator is 1 (a polynomial in `kappa`).
    pub fn is_polynomial(&self) -> bool {
        match &self.0 {
            Repr::Small(_, d) => *d == 1,
            Repr::Frac(f) => f.is_polynomial(),
        }
    }

    /// The value as a rational number, if it does not depend on `kappa`.
    pub fn as_rational(&self) -> Option<BigRational> {
        match &self.0 {
            Repr::Small(n, d) => Some(BigRational::new((*n).into(), (*d).into())),
            Repr::Frac(f) => f.as_rational(),
        }
    }

    pub fn as_i64(&self) -> Option<i64> {
        match &self.0 {
            Repr::Small(n, 1) => Some(*n),
            Repr::Small(..) => None,
            Repr::Frac(f) => f.as_i64(),
        }
    }

    pub fn is_constant(&self) -> bool {
        match &self.0 {
            Repr::Small(..) => true,
            Repr::Frac(f) => f.is_constant(),
        }
    }

    /// Substitutes a rational value for `kappa`. `None` if it hits a pole.
    pub fn eval_kappa(&self, at: &BigRational) -> Option<BigRational> {
        self.frac().eval_kappa(at)
    }

    /// `Some(self / other)`, or `None` when `other` is zero.
    pub fn checked_div(&self, other: &Coefficient) -> Option<Coefficient> {
        if other.is_zero() {
            return None;
        }
        if let (Repr::Small(a, b), Repr::Small(c, d)) = (&self.0, &other.0) {
            return Some(Coefficient::small(i128::from(*a) * i128::from(*d), i128::from(*b) * i128::from(*c)));
        }
        self.frac().checked_div(&other.frac()).map(Coefficient::from_frac)
    }

    pub fn recip(&self) -> Option<Coefficient> {
        Coefficient::one().checked_div(self)
    }

    /// `C(n, i)` for any integer `n`.
    pub fn binomial(n: i64, i: u32) -> Coefficient {
        let mut acc: i128 = 1;
        for j in 0..i128::from(i) {
            match acc.checked_mul(i128::from(n) - j) {
                Some(x) => acc = x / (j + 1),
                None => return Coefficient::from_bigint(binomial(n, i)),
            }
        }
        Coefficient::small(acc, 1)
    }

    /// `k(k−1)⋯(k−p+1)`.
    pub fn falling(k: i64, p: u32) -> Coefficient {
        let mut acc: i128 = 1;
        for j in 0..i128::from(p) {
            match acc.checked_mul(i128::from(k) - j) {
                Some(x) => acc = x,
                None => {
                    let mut big = Coefficient::small(acc, 1);
                    for j in j..i128::from(p) {
                        big *= &Coefficient::from_bigint(BigInt::from(i128::from(k) - j));
                    }
                    return big;
                }
            }
        }
        Coefficient::small(acc, 1)
    }

    pub fn pow(&self, k: u32) -> Coefficient {
        let mut acc = Coefficient::one();
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }

    /// Sign of the leading rational factor used for rendering (`-1`, `0` or `1`).
    pub fn render_sign(&self) -> i32 {
        match &self.0 {
            Repr::Small(n, _) => n.signum() as i32,
            Repr::Frac(f) => f.render_sign(),
        }
    }

    fn add_ref(&self, other: &Coefficient) -> Coefficient {
        if let (Repr::Small(a, 1), Repr::Small(c, 1)) = (&self.0, &other.0) {
            if let Some(n) = a.checked_add(*c).filter(|n| *n != i64::MIN) {
                return Coefficient(Repr::Small(n, 1));
            }
        }
        if let (Repr::Small(a, b), Repr::Small(c, d)) = (&self.0, &other.0) {
            let (a, b, c, d) = (i128::from(*a), i128::from(*b), i128::from(*c), i128::from(*d));
            if b == d {
                return Coefficient::small(a + c, b);
            }
            return Coefficient::small(a * d + c * b, b * d);
        }
        Coefficient::from_frac(self.frac().add_ref(&other.frac()))
    }

    fn mul_ref(&self, other: &Coefficient) -> Coefficient {
        if let (Repr::Small(a, 1), Repr::Small(c, 1)) = (&self.0, &other.0) {
            if let Some(n) = a.checked_mul(*c).filter(|n| *n != i64::MIN) {
                return Coefficient(Repr::Small(n, 1));
            }
        }
        if let (Repr::Small(a, b), Repr::Small(c, d)) = (&self.0, &other.0) {
            return Coefficient::small(i128::from(*a) * i128::from(*c), i128::from(*b) * i128::from(*d));
        }
        if self.is_zero() || other.is_zero() {
            return Coefficient::zero();
        }
        if self.is_one() {
            return other.clone();
        }
        if other.is_one() {
            return self.clone();
        }
        Coefficient::from_frac(self.frac().mul_ref(&other.frac()))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
struct Frac {
    num: Poly,
    den: Poly,
}

impl Frac {
    fn zero() -> Self {
        Frac {
            num: Poly::zero(),
            den: Poly::one(),
        }
    }

    fn from_rational(r: BigRational) -> Self {
        Frac {
            num: Poly::constant(r),
            den: Poly::one(),
        }
    }

    /// The formal parameter `kappa`.
    fn kappa() -> Self {
        Frac::from_poly(Poly::kappa_pow(1))
    }

    fn from_poly(p: Poly) -> Self {
        Frac {
            num: p,
            den: Poly::one(),
        }
    }

    /// Builds `num / den` in lowest terms. Returns `None` if `den` is zero.
    fn from_fraction(num: Poly, den: Poly) -> Option<Self> {
        if den.is_zero() {
            return None;
        }
        Some(Frac::normalized(num, den))
    }

    fn normalized(num: Poly, den: Poly) -> Self {
        if num.is_zero() {
            return Frac::zero();
        }
        if den.degree() == Some(0) {
            let inv = den.0[0].recip();
            return Frac {
                num: num.scale(&inv),
                den: Poly::one(),
            };
        }
        let g = num.gcd(&den);
        let (mut num, mut den) = if g.is_one() {
            (num, den)
        } else {
            (num.div_rem(&g).0, den.div_rem(&g).0)
        };
        let lead = den.leading().expect("nonzero denominator").clone();
        if !lead.is_one() {
            let inv = lead.recip();
            num = num.scale(&inv);
            den = den.scale(&inv);
        }
        Frac { num, den }
    }

    fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    /// True when the denominator is 1 (a polynomial in `kappa`).
    fn is_polynomial(&self) -> bool {
        self.den.is_one()
    }

    /// The value as a rational number, if it does not depend on `kappa`.
    fn as_rational(&self) -> Option<BigRational> {
        if !self.den.is_one() {
            return None;
        }
        match self.num.degree() {
            None => Some(BigRational::zero()),
            Some(0) => Some(self.num.0[0].clone()),
            Some(_) => None,
        }
    }

    fn as_i64(&self) -> Option<i64> {
        let r = self.as_rational()?;
        if r.is_integer() {
            r.to_integer().to_i64()
        } else {
            None
        }
    }

    fn is_constant(&self) -> bool {
        self.as_rational().is_some()
    }

    /// Substitutes a rational value for `kappa`. `None` if it hits a pole.
    fn eval_kappa(&self, at: &BigRational) -> Option<BigRational> {
        let d = self.den.eval(at);
        if d.is_zero() {
            return None;
        }
        Some(self.num.eval(at) / d)
    }

    /// `Some(self / other)`, or `None` when `other` is zero.
    fn checked_div(&self, other: &Frac) -> Option<Frac> {
        if other.is_zero() {
            return None;
        }
        if other.den.is_one() && other.num.degree() == Some(0) && self.den.is_one() {
            let inv = other.num.0[0].recip();
            return Some(Frac {
                num: self.num.scale(&inv),
                den: Poly::one(),
            });
        }
        Some(Frac::normalized(
            self.num.mul_ref(&other.den),
            self.den.mul_ref(&other.num),
        ))
    }

    fn neg_ref(&self) -> Frac {
        Frac {
            num: self.num.neg_ref(),
            den: self.den.clone(),
        }
    }


    /// Sign of the leading rational factor used for rendering (`-1`, `0` or `1`).
    fn render_sign(&self) -> i32 {
        if self.is_zero() {
            return 0;
        }
        let (c, _) = self.num.content_split();
        if c.is_negative() {
            -1
        } else {
            1
        }
    }

    fn add_ref(&self, other: &Frac) -> Frac {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        if self.den == other.den {
            let num = self.num.add_ref(&other.num);
            if self.den.is_one() {
                return Frac {
                    num,
                    den: Poly::one(),
                };
            }
            return Frac::normalized(num, self.den.clone());
        }
        Frac::normalized(
            self.num
                .mul_ref(&other.den)
                .add_ref(&other.num.mul_ref(&self.den)),
            self.den.mul_ref(&other.den),
        )
    }

    fn mul_ref(&self, other: &Frac) -> Frac {
        if self.is_zero() || other.is_zero() {
            return Frac::zero();
        }
        if self.den.is_one() && other.den.is_one() {
            return Frac {
                num: self.num.mul_ref(&other.num),
                den: Poly::one(),
            };
        }
        Frac::normalized(
            self.num.mul_ref(&other.num),
            self.den.mul_ref(&other.den),
        )
    }
}

/// Generalized binomial `C(n, i) = n(n-1)...(n-i+1)/i!` for any integer `n`.
pub fn binomial(n: i64, i: u32) -> BigInt {
    let mut num = BigInt::one();
    let mut den = BigInt::one();
    for j in 0..i64::from(i) {
        num *= BigInt::from(n - j);
        den *= BigInt::from(j + 1);
    }
    num / den
}

/// `k!`.
pub fn factorial(k: u32) -> BigInt {
    (1..=u64::from(k)).fold(BigInt::one(), |acc, j| acc * BigInt::from(j))
}

impl From<i64> for Coefficient {
    fn from(n: i64) -> Self {
        Coefficient::from_int(n)
    }
}

impl From<BigRational> for Coefficient {
    fn from(r: BigRational) -> Self {
        Coefficient::from_rational(r)
    }
}

impl Neg for &Coefficient {
    type Output = Coefficient;
    fn neg(self) -> Coefficient {
        match &self.0 {
            Repr::Small(n, d) => Coefficient(Repr::Small(-n, *d)),
            Repr::Frac(f) => Coefficient(Repr::Frac(f.neg_ref())),
        }
    }
}

impl Neg for Coefficient {
    type Output = Coefficient;
    fn neg(self) -> Coefficient {
        -&self
    }
}

macro_rules! forward_binop {
    ($tr:ident, $method:ident, $body:expr) => {
        impl $tr<&Coefficient> for &Coefficient {
            type Output = Coefficient;
            fn $method(self, rhs: &Coefficient) -> Coefficient {
                let f: fn(&Coefficient, &Coefficient) -> Coefficient = $body;
                f(self, rhs)
            }
        }
        impl $tr<Coefficient> for Coefficient {
            type Output = Coefficient;
            fn $method(self, rhs: Coefficient) -> Coefficient {
                (&self).$method(&rhs)
            }
        }
        impl $tr<&Coefficient> for Coefficient {
            type Output = Coefficient;
            fn $method(self, rhs: &Coefficient) -> Coefficient {
                (&self).$method(rhs)
            }
        }
        impl $tr<Coefficient> for &Coefficient {
            type Output = Coefficient;
            fn $method(self, rhs: Coefficient) -> Coefficient {
                self.$method(&rhs)
            }
        }
    };
}

forward_binop!(Add, add, |a, b| a.add_ref(b));
forward_binop!(Sub, sub, |a, b| a.add_ref(&-b));
forward_binop!(Mul, mul, |a, b| a.mul_ref(b));
forward_binop!(Div, div, |a, b| a
    .checked_div(b)
    .expect("coefficient division by zero"));

impl AddAssign<&Coefficient> for Coefficient {
    fn add_assign(&mut self, rhs: &Coefficient) {
        if let (Repr::Frac(f), Repr::Frac(g)) = (&mut self.0, &rhs.0) {
            if f.den.is_one() && g.den.is_one() {
                let num = std::mem::take(&mut f.num);
                f.num = num.add_into(&g.num);
                if f.num.degree().is_none_or(|d| d == 0) {
                    *self = Coefficient::from_frac(f.clone());
                }
                return;
            }
        }
        *self = self.add_ref(rhs);
    }
}

impl SubAssign<&Coefficient> for Coefficient {
    fn sub_assign(&mut self, rhs: &Coefficient) {
        *self += &-rhs;
    }
}

impl MulAssign<&Coefficient> for Coefficient {
    fn mul_assign(&mut self, rhs: &Coefficient) {
        *self = self.mul_ref(rhs);
    }
}

impl fmt::Display for Coefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.0 {
            Repr::Small(n, 1) => write!(f, "{n}"),
            Repr::Small(n, d) => write!(f, "{n}/{d}"),
            Repr::Frac(x) => x.fmt(f),
        }
    }
}

impl Poly {
    fn add_into(mut self, other: &Poly) -> Poly {
        if self.0.len() < other.0.len() {
            self.0.resize(other.0.len(), BigRational::zero());
        }
        for (a, b) in self.0.iter_mut().zip(other.0.iter()) {
            *a += b;
        }
        self.trim();
        self
    }
}

fn write_int_poly(f: &mut fmt::Formatter<'_>, prim: &[BigInt]) -> fmt::Result {
    let mut first = true;
    for (deg, c) in prim.iter().enumerate().rev() {
        if c.is_zero() {
            continue;
        }
        let mag = c.abs();
        if first {
            if c.is_negative() {
                write!(f, "-")?;
            }
        } else if c.is_negative() {
            write!(f, " - ")?;
        } else {
            write!(f, " + ")?;
        }
        first = false;
        match deg {
            0 => write!(f, "{mag}")?,
            _ => {
                if !mag.is_one() {
                    write!(f, "{mag}*")?;
                }
                if deg == 1 {
                    write!(f, "kappa")?;
                } else {
                    write!(f, "kappa^{deg}")?;
                }
            }
        }
    }
    Ok(())
}

/// How a primitive polynomial factor is printed.
enum PolyText<'a> {
    One,
    Atom(&'a [BigInt]),
    Group(&'a [BigInt]),
}

fn classify(prim: &[BigInt]) -> PolyText<'_> {
    let nonzero = prim.iter().filter(|c| !c.is_zero()).count();
    if prim.len() == 1 {
        PolyText::One
    } else if nonzero == 1 {
        PolyText::Atom(prim)
    } else {
        PolyText::Group(prim)
    }
}

impl fmt::Display for Frac {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let (cn, pn) = self.num.content_split();
        let (cd, pd) = self.den.content_split();
        let scalar = cn / cd;
        let a = scalar.numer().abs();
        let d = scalar.denom().clone();
        if scalar.is_negative() {
            write!(f, "-")?;
        }
        match classify(&pn) {
            PolyText::One => write!(f, "{a}")?,
            PolyText::Atom(p) => {
                if !a.is_one() {
                    write!(f, "{a}*")?;
                }
                write_int_poly(f, p)?;
            }
            PolyText::Group(p) => {
                if !a.is_one() {
                    write!(f, "{a}*")?;
                }
                write!(f, "(")?;
                write_int_poly(f, p)?;
                write!(f, ")")?;
            }
        }
        match classify(&pd) {
            PolyText::One => {
                if !d.is_one() {
                    write!(f, "/{d}")?;
                }
            }
            PolyText::Atom(p) | PolyText::Group(p) => {
                let grouped = matches!(classify(&pd), PolyText::Group(_));
                write!(f, "/")?;
                if d.is_one() {
                    if grouped {
                        write!(f, "(")?;
                    }
                    write_int_poly(f, p)?;
                    if grouped {
                        write!(f, ")")?;
                    }
                } else {
                    write!(f, "({d}*")?;
                    if grouped {
                        write!(f, "(")?;
                    }
                    write_int_poly(f, p)?;
                    if grouped {
                        write!(f, ")")?;
                    }
                    write!(f, ")")?;
                }
            }
        }
        Ok(())
    }
}
