//! Exact coefficient arithmetic.
//!
//! The coefficient domain used throughout the crate is [`ExactScalar`]: an
//! exact rational number, or a reduced ratio of integer-coefficient Laurent
//! polynomials in the formal variable `u`, where `u` stands for `q^{1/2}`.
//! Working with the half-power of q keeps every half-integer power of q that
//! shows up in the quantum identities an exact Laurent monomial.
//!
//! The module also provides the q-combinatorics built on top of the scalars:
//! symmetric and nonsymmetric q-numbers, q-factorials, falling q-factorial
//! ratios and the coefficients of the two q-exponentials.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

// ---------------------------------------------------------------------------
// Laurent polynomials in u with integer coefficients
// ---------------------------------------------------------------------------

/// Integer-coefficient Laurent polynomial in the formal variable `u`.
///
/// Exponents may be negative; `u` is a unit of the ring.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct UPoly {
    /// exponent -> nonzero coefficient
    terms: BTreeMap<i64, BigInt>,
}

impl UPoly {
    pub fn zero() -> Self {
        UPoly {
            terms: BTreeMap::new(),
        }
    }

    pub fn one() -> Self {
        Self::monomial(0, BigInt::one())
    }

    pub fn monomial(exp: i64, coeff: BigInt) -> Self {
        let mut terms = BTreeMap::new();
        if !coeff.is_zero() {
            terms.insert(exp, coeff);
        }
        UPoly { terms }
    }

    pub fn from_int(n: i64) -> Self {
        Self::monomial(0, BigInt::from(n))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.terms.get(&0).map(|c| c.is_one()).unwrap_or(false)
    }

    /// Lowest exponent present (None for the zero polynomial).
    pub fn lo(&self) -> Option<i64> {
        self.terms.keys().next().copied()
    }

    /// Highest exponent present.
    pub fn hi(&self) -> Option<i64> {
        self.terms.keys().next_back().copied()
    }

    pub fn leading_coeff(&self) -> BigInt {
        self.hi()
            .map(|e| self.terms[&e].clone())
            .unwrap_or_else(BigInt::zero)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&i64, &BigInt)> {
        self.terms.iter()
    }

    fn insert(&mut self, exp: i64, coeff: BigInt) {
        if coeff.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(exp) {
            Entry::Vacant(v) => {
                v.insert(coeff);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += coeff;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn add(&self, other: &UPoly) -> UPoly {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.insert(*e, c.clone());
        }
        out
    }

    pub fn neg(&self) -> UPoly {
        UPoly {
            terms: self.terms.iter().map(|(e, c)| (*e, -c.clone())).collect(),
        }
    }

    pub fn sub(&self, other: &UPoly) -> UPoly {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &UPoly) -> UPoly {
        let mut out = UPoly::zero();
        for (e1, c1) in &self.terms {
            for (e2, c2) in &other.terms {
                out.insert(e1 + e2, c1 * c2);
            }
        }
        out
    }

    pub fn shift(&self, k: i64) -> UPoly {
        UPoly {
            terms: self.terms.iter().map(|(e, c)| (e + k, c.clone())).collect(),
        }
    }

    /// Substitute u -> u^k (exponent scaling). `k` must be nonzero.
    pub fn scale_exponents(&self, k: i64) -> UPoly {
        assert!(k != 0, "exponent scale must be nonzero");
        UPoly {
            terms: self.terms.iter().map(|(e, c)| (e * k, c.clone())).collect(),
        }
    }

    /// Substitute u -> 1 (sum of coefficients).
    pub fn eval_one(&self) -> BigInt {
        self.terms.values().fold(BigInt::zero(), |a, c| a + c)
    }

    /// Evaluate at a complex point (for numeric cross-checks).
    pub fn eval_complex(&self, u: num_complex::Complex64) -> num_complex::Complex64 {
        use num_traits::ToPrimitive;
        let mut acc = num_complex::Complex64::new(0.0, 0.0);
        for (e, c) in &self.terms {
            let cf = c.to_f64().unwrap_or(f64::NAN);
            acc += cf * u.powi(*e as i32);
        }
        acc
    }

    fn content(&self) -> BigInt {
        let mut g = BigInt::zero();
        for c in self.terms.values() {
            g = g.gcd(c);
            if g.is_one() {
                break;
            }
        }
        g
    }

    fn div_int(&self, d: &BigInt) -> UPoly {
        UPoly {
            terms: self
                .terms
                .iter()
                .map(|(e, c)| (*e, c / d))
                .collect(),
        }
    }

    /// Exact polynomial division by a non-Laurent divisor with the lowest
    /// term at exponent 0. Panics if the division is not exact (internal
    /// use after a gcd computation only).
    fn div_exact(&self, div: &UPoly) -> UPoly {
        assert!(!div.is_zero());
        if div.is_one() {
            return self.clone();
        }
        let shift = self.lo().unwrap_or(0);
        let mut rem = self.shift(-shift);
        let mut quo = UPoly::zero();
        let dhi = div.hi().unwrap();
        let dlc = div.leading_coeff();
        while !rem.is_zero() {
            let rhi = rem.hi().unwrap();
            let rlc = rem.leading_coeff();
            let (q, r) = rlc.div_rem(&dlc);
            assert!(r.is_zero(), "non-exact division in UPoly::div_exact");
            let qexp = rhi - dhi;
            quo.insert(qexp, q.clone());
            rem = rem.sub(&div.mul(&UPoly::monomial(qexp, q)));
            if let Some(l) = rem.hi() {
                assert!(l < rhi, "division failed to reduce degree");
            }
        }
        quo.shift(shift)
    }

    /// Primitive non-Laurent representative: strip the u-power so the lowest
    /// exponent is 0, divide by the integer content, make the leading
    /// coefficient positive. Returns the canonical factor.
    fn primitive_part(&self) -> UPoly {
        if self.is_zero() {
            return UPoly::zero();
        }
        let mut p = self.shift(-self.lo().unwrap());
        let c = p.content();
        if !c.is_one() {
            p = p.div_int(&c);
        }
        if p.leading_coeff().is_negative() {
            p = p.neg();
        }
        p
    }

    fn mul_int(&self, k: &BigInt) -> UPoly {
        if k.is_zero() {
            return UPoly::zero();
        }
        UPoly {
            terms: self.terms.iter().map(|(e, c)| (*e, c * k)).collect(),
        }
    }

    /// Gcd of the primitive parts (ordinary polynomial gcd; the u-power
    /// ambiguity is fixed by returning a primitive polynomial with nonzero
    /// constant term and positive leading coefficient).
    fn gcd(&self, other: &UPoly) -> UPoly {
        if self.is_zero() {
            return other.primitive_part();
        }
        if other.is_zero() {
            return self.primitive_part();
        }
        let mut a = self.primitive_part();
        let mut b = other.primitive_part();
        while !b.is_zero() {
            // primitive-PRS pseudo-remainder of a by b
            let db = b.hi().unwrap();
            let lb = b.leading_coeff();
            let mut r = a.clone();
            loop {
                let Some(dr) = r.hi() else { break };
                if dr < db {
                    break;
                }
                let lr = r.leading_coeff();
                let g = lr.gcd(&lb);
                let scale = &lb / &g;
                if !scale.is_one() {
                    r = r.mul_int(&scale);
                }
                let q = &r.leading_coeff() / &lb;
                r = r.sub(&b.mul(&UPoly::monomial(dr - db, q)));
            }
            a = b;
            b = r.primitive_part();
        }
        a.primitive_part()
    }
}

// ---------------------------------------------------------------------------
// Reduced ratios of Laurent polynomials
// ---------------------------------------------------------------------------

/// Normalized ratio `num(u) / den(u)`.
///
/// Invariants: `den` is a non-Laurent polynomial with nonzero constant term
/// and positive leading coefficient; `gcd(num, den) = 1` as polynomials; the
/// joint integer content of `num` and `den` is 1.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct URat {
    num: UPoly,
    den: UPoly,
}

impl URat {
    fn normalized(mut num: UPoly, mut den: UPoly) -> Result<URat> {
        if den.is_zero() {
            return Err(Error::DivisionByZero);
        }
        if num.is_zero() {
            return Ok(URat {
                num: UPoly::zero(),
                den: UPoly::one(),
            });
        }
        // push the u-power of den into num
        let dlo = den.lo().unwrap();
        if dlo != 0 {
            den = den.shift(-dlo);
            num = num.shift(-dlo);
        }
        let g = num.gcd(&den);
        if !g.is_one() {
            num = num.div_exact(&g);
            den = den.div_exact(&g);
            let dlo = den.lo().unwrap();
            if dlo != 0 {
                den = den.shift(-dlo);
                num = num.shift(-dlo);
            }
        }
        let cn = num.content();
        let cd = den.content();
        let c = cn.gcd(&cd);
        if !c.is_one() {
            num = num.div_int(&c);
            den = den.div_int(&c);
        }
        if den.leading_coeff().is_negative() {
            num = num.neg();
            den = den.neg();
        }
        Ok(URat { num, den })
    }

    pub fn num(&self) -> &UPoly {
        &self.num
    }

    pub fn den(&self) -> &UPoly {
        &self.den
    }
}

// ---------------------------------------------------------------------------
// ExactScalar
// ---------------------------------------------------------------------------

/// Exact coefficient: a rational number or a reduced rational function of u.
///
/// Plain rationals are kept in a dedicated variant so the common
/// deformation-free computations never touch polynomial arithmetic.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum ExactScalar {
    Rat(BigRational),
    U(URat),
}

impl ExactScalar {
    pub fn zero() -> Self {
        ExactScalar::Rat(BigRational::zero())
    }

    pub fn one() -> Self {
        ExactScalar::Rat(BigRational::one())
    }

    pub fn from_int(n: i64) -> Self {
        ExactScalar::Rat(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn ratio(num: i64, den: i64) -> Self {
        assert!(den != 0);
        ExactScalar::Rat(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    /// The monomial `u^k` (i.e. `q^{k/2}`).
    pub fn u_pow(k: i64) -> Self {
        if k == 0 {
            return Self::one();
        }
        ExactScalar::U(URat {
            num: UPoly::monomial(k, BigInt::one()),
            den: UPoly::one(),
        })
    }

    /// The monomial `q^k`.
    pub fn q_pow(k: i64) -> Self {
        Self::u_pow(2 * k)
    }

    pub fn is_zero(&self) -> bool {
        match self {
            ExactScalar::Rat(r) => r.is_zero(),
            ExactScalar::U(r) => r.num.is_zero(),
        }
    }

    pub fn is_one(&self) -> bool {
        match self {
            ExactScalar::Rat(r) => r.is_one(),
            ExactScalar::U(r) => r.num.is_one() && r.den.is_one(),
        }
    }

    fn to_urat(&self) -> URat {
        match self {
            ExactScalar::Rat(r) => URat {
                num: UPoly::monomial(0, r.numer().clone()),
                den: UPoly::monomial(0, r.denom().clone()),
            },
            ExactScalar::U(r) => r.clone(),
        }
    }

    /// Demote a u-free rational function back to the Rat variant.
    fn compress(r: URat) -> ExactScalar {
        let num_const = r.num.is_zero() || (r.num.hi() == Some(0) && r.num.lo() == Some(0));
        let den_const = r.den.hi() == Some(0);
        if num_const && den_const {
            let n = r
                .num
                .terms
                .get(&0)
                .cloned()
                .unwrap_or_else(BigInt::zero);
            let d = r.den.terms[&0].clone();
            ExactScalar::Rat(BigRational::new(n, d))
        } else {
            ExactScalar::U(r)
        }
    }

    pub fn checked_div(&self, other: &ExactScalar) -> Result<ExactScalar> {
        if other.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(self / other)
    }

    pub fn inv(&self) -> Result<ExactScalar> {
        ExactScalar::one().checked_div(self)
    }

    pub fn pow(&self, k: i64) -> Result<ExactScalar> {
        match k.cmp(&0) {
            Ordering::Equal => Ok(Self::one()),
            Ordering::Greater => {
                let mut acc = Self::one();
                for _ in 0..k {
                    acc = &acc * self;
                }
                Ok(acc)
            }
            Ordering::Less => self.pow(-k)?.inv(),
        }
    }

    /// Substitute u -> u^k (used to move between the bases q, q^2, q^3, ...).
    pub fn scale_u(&self, k: i64) -> ExactScalar {
        match self {
            ExactScalar::Rat(_) => self.clone(),
            ExactScalar::U(r) => {
                let num = r.num.scale_exponents(k);
                let den = r.den.scale_exponents(k);
                Self::compress(URat::normalized(num, den).expect("nonzero denominator"))
            }
        }
    }

    /// Classical limit u -> 1. Errors when the reduced denominator vanishes
    /// at u = 1 (a genuine pole).
    pub fn eval_u1(&self) -> Result<BigRational> {
        match self {
            ExactScalar::Rat(r) => Ok(r.clone()),
            ExactScalar::U(r) => {
                let d = r.den.eval_one();
                if d.is_zero() {
                    return Err(Error::LimitPole);
                }
                Ok(BigRational::new(r.num.eval_one(), d))
            }
        }
    }

    /// Numeric evaluation at a complex value of u.
    pub fn eval_complex(&self, u: num_complex::Complex64) -> num_complex::Complex64 {
        use num_traits::ToPrimitive;
        match self {
            ExactScalar::Rat(r) => num_complex::Complex64::new(
                r.numer().to_f64().unwrap_or(f64::NAN) / r.denom().to_f64().unwrap_or(f64::NAN),
                0.0,
            ),
            ExactScalar::U(r) => r.num.eval_complex(u) / r.den.eval_complex(u),
        }
    }

    /// True if the scalar does not involve u.
    pub fn is_rational(&self) -> bool {
        matches!(self, ExactScalar::Rat(_))
    }

    /// Substitution q -> q^{-1} (u -> u^{-1}); exact.
    pub fn invert_q(&self) -> ExactScalar {
        match self {
            ExactScalar::Rat(_) => self.clone(),
            ExactScalar::U(r) => {
                let num = r.num.scale_exponents(-1);
                let den = r.den.scale_exponents(-1);
                Self::compress(URat::normalized(num, den).expect("nonzero denominator"))
            }
        }
    }
}

impl Zero for ExactScalar {
    fn zero() -> Self {
        ExactScalar::zero()
    }
    fn is_zero(&self) -> bool {
        ExactScalar::is_zero(self)
    }
}

impl One for ExactScalar {
    fn one() -> Self {
        ExactScalar::one()
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident, $impl_fn:ident) => {
        impl $trait for &ExactScalar {
            type Output = ExactScalar;
            fn $method(self, rhs: &ExactScalar) -> ExactScalar {
                ExactScalar::$impl_fn(self, rhs)
            }
        }
        impl $trait for ExactScalar {
            type Output = ExactScalar;
            fn $method(self, rhs: ExactScalar) -> ExactScalar {
                ExactScalar::$impl_fn(&self, &rhs)
            }
        }
        impl $trait<&ExactScalar> for ExactScalar {
            type Output = ExactScalar;
            fn $method(self, rhs: &ExactScalar) -> ExactScalar {
                ExactScalar::$impl_fn(&self, rhs)
            }
        }
    };
}

impl ExactScalar {
    fn add_impl(&self, rhs: &ExactScalar) -> ExactScalar {
        match (self, rhs) {
            (ExactScalar::Rat(a), ExactScalar::Rat(b)) => ExactScalar::Rat(a + b),
            _ => {
                let a = self.to_urat();
                let b = rhs.to_urat();
                let num = a.num.mul(&b.den).add(&b.num.mul(&a.den));
                let den = a.den.mul(&b.den);
                Self::compress(URat::normalized(num, den).expect("nonzero denominator"))
            }
        }
    }

    fn sub_impl(&self, rhs: &ExactScalar) -> ExactScalar {
        self.add_impl(&rhs.neg_impl())
    }

    fn mul_impl(&self, rhs: &ExactScalar) -> ExactScalar {
        match (self, rhs) {
            (ExactScalar::Rat(a), ExactScalar::Rat(b)) => ExactScalar::Rat(a * b),
            _ => {
                if self.is_zero() || rhs.is_zero() {
                    return ExactScalar::zero();
                }
                let a = self.to_urat();
                let b = rhs.to_urat();
                let num = a.num.mul(&b.num);
                let den = a.den.mul(&b.den);
                Self::compress(URat::normalized(num, den).expect("nonzero denominator"))
            }
        }
    }

    fn div_impl(&self, rhs: &ExactScalar) -> ExactScalar {
        match (self, rhs) {
            (ExactScalar::Rat(a), ExactScalar::Rat(b)) => {
                assert!(!b.is_zero(), "division by zero");
                ExactScalar::Rat(a / b)
            }
            _ => {
                let a = self.to_urat();
                let b = rhs.to_urat();
                assert!(!b.num.is_zero(), "division by zero");
                let num = a.num.mul(&b.den);
                let den = a.den.mul(&b.num);
                Self::compress(URat::normalized(num, den).expect("nonzero denominator"))
            }
        }
    }

    fn neg_impl(&self) -> ExactScalar {
        match self {
            ExactScalar::Rat(r) => ExactScalar::Rat(-r.clone()),
            ExactScalar::U(r) => ExactScalar::U(URat {
                num: r.num.neg(),
                den: r.den.clone(),
            }),
        }
    }
}

binop!(Add, add, add_impl);
binop!(Sub, sub, sub_impl);
binop!(Mul, mul, mul_impl);
binop!(Div, div, div_impl);

impl Neg for &ExactScalar {
    type Output = ExactScalar;
    fn neg(self) -> ExactScalar {
        self.neg_impl()
    }
}

impl Neg for ExactScalar {
    type Output = ExactScalar;
    fn neg(self) -> ExactScalar {
        self.neg_impl()
    }
}

impl AddAssign<&ExactScalar> for ExactScalar {
    fn add_assign(&mut self, rhs: &ExactScalar) {
        *self = self.add_impl(rhs);
    }
}

impl SubAssign<&ExactScalar> for ExactScalar {
    fn sub_assign(&mut self, rhs: &ExactScalar) {
        *self = self.sub_impl(rhs);
    }
}

impl MulAssign<&ExactScalar> for ExactScalar {
    fn mul_assign(&mut self, rhs: &ExactScalar) {
        *self = self.mul_impl(rhs);
    }
}

// ---------------------------------------------------------------------------
// Display / parse
// ---------------------------------------------------------------------------

fn fmt_upoly(p: &UPoly, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if p.is_zero() {
        return write!(f, "0");
    }
    // print in q when every exponent is even, in u otherwise
    let use_q = p.terms.keys().all(|e| e % 2 == 0);
    let (var, scale) = if use_q { ("q", 2) } else { ("u", 1) };
    let mut first = true;
    for (e, c) in p.terms.iter().rev() {
        let mag = c.abs();
        if first {
            if c.is_negative() {
                write!(f, "-")?;
            }
            first = false;
        } else if c.is_negative() {
            write!(f, " - ")?;
        } else {
            write!(f, " + ")?;
        }
        let e = e / scale;
        if e == 0 {
            write!(f, "{mag}")?;
        } else {
            if !mag.is_one() {
                write!(f, "{mag}*")?;
            }
            if e == 1 {
                write!(f, "{var}")?;
            } else {
                write!(f, "{var}^{e}")?;
            }
        }
    }
    Ok(())
}

impl fmt::Display for ExactScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExactScalar::Rat(r) => {
                if r.denom().is_one() {
                    write!(f, "{}", r.numer())
                } else {
                    write!(f, "{}/{}", r.numer(), r.denom())
                }
            }
            ExactScalar::U(r) => {
                struct P<'a>(&'a UPoly);
                impl fmt::Display for P<'_> {
                    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                        fmt_upoly(self.0, f)
                    }
                }
                let multi_num = r.num.terms.len() > 1;
                if r.den.is_one() {
                    if multi_num {
                        write!(f, "({})", P(&r.num))
                    } else {
                        write!(f, "{}", P(&r.num))
                    }
                } else {
                    let multi_den = r.den.terms.len() > 1;
                    match (multi_num, multi_den) {
                        (true, true) => write!(f, "({})/({})", P(&r.num), P(&r.den)),
                        (true, false) => write!(f, "({})/{}", P(&r.num), P(&r.den)),
                        (false, true) => write!(f, "{}/({})", P(&r.num), P(&r.den)),
                        (false, false) => write!(f, "{}/{}", P(&r.num), P(&r.den)),
                    }
                }
            }
        }
    }
}

// ---------------------------------------------------------------------------
// HalfInt
// ---------------------------------------------------------------------------

/// Half-integer spin, stored as twice its value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HalfInt {
    twice: i64,
}

impl HalfInt {
    pub fn from_twice(twice: i64) -> Self {
        HalfInt { twice }
    }

    pub fn from_int(n: i64) -> Self {
        HalfInt { twice: 2 * n }
    }

    pub const HALF: HalfInt = HalfInt { twice: 1 };
    pub const ZERO: HalfInt = HalfInt { twice: 0 };
    pub const ONE: HalfInt = HalfInt { twice: 2 };

    pub fn twice(&self) -> i64 {
        self.twice
    }

    pub fn is_integer(&self) -> bool {
        self.twice % 2 == 0
    }

    pub fn as_integer(&self) -> Option<i64> {
        if self.is_integer() {
            Some(self.twice / 2)
        } else {
            None
        }
    }

    pub fn minus_half(&self) -> HalfInt {
        HalfInt {
            twice: self.twice - 1,
        }
    }

    pub fn plus_half(&self) -> HalfInt {
        HalfInt {
            twice: self.twice + 1,
        }
    }
}

impl fmt::Display for HalfInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.twice % 2 == 0 {
            write!(f, "{}", self.twice / 2)
        } else {
            write!(f, "{}/2", self.twice)
        }
    }
}

// ---------------------------------------------------------------------------
// q-combinatorics
// ---------------------------------------------------------------------------

/// Which q-number convention an operation uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QVariant {
    /// `[x]_q = (q^x - q^{-x}) / (q - q^{-1})`, invariant under q -> 1/q.
    Symmetric,
    /// `(n)_q = (1 - q^{2n}) / (1 - q^2)`.
    Nonsymmetric,
}

/// The symmetric q-number `[n]_q` as an exact Laurent polynomial.
pub fn qnum_sym(n: i64) -> ExactScalar {
    if n == 0 {
        return ExactScalar::zero();
    }
    let (sign, n) = if n < 0 { (-1, -n) } else { (1, n) };
    // [n]_q = u^{2(n-1)} + u^{2(n-3)} + ... + u^{-2(n-1)}
    let mut p = UPoly::zero();
    for j in 0..n {
        p.insert(2 * (n - 1) - 4 * j, BigInt::from(sign));
    }
    ExactScalar::compress(URat::normalized(p, UPoly::one()).unwrap())
}

/// The nonsymmetric q-number `(n)_q = (1 - q^{2n})/(1 - q^2)`.
pub fn qnum_nonsym(n: i64) -> ExactScalar {
    if n == 0 {
        return ExactScalar::zero();
    }
    if n > 0 {
        // 1 + q^2 + ... + q^{2(n-1)}
        let mut p = UPoly::zero();
        for j in 0..n {
            p.insert(4 * j, BigInt::one());
        }
        ExactScalar::compress(URat::normalized(p, UPoly::one()).unwrap())
    } else {
        let num = UPoly::one().sub(&UPoly::monomial(4 * n, BigInt::one()));
        let den = UPoly::one().sub(&UPoly::monomial(4, BigInt::one()));
        ExactScalar::compress(URat::normalized(num, den).unwrap())
    }
}

/// q-number in the requested convention.
pub fn qnum(n: i64, variant: QVariant) -> ExactScalar {
    match variant {
        QVariant::Symmetric => qnum_sym(n),
        QVariant::Nonsymmetric => qnum_nonsym(n),
    }
}

/// q-factorial `[n]_q! = [1]_q [2]_q ... [n]_q` (or the nonsymmetric analog).
pub fn qfactorial(n: i64, variant: QVariant) -> Result<ExactScalar> {
    if n < 0 {
        return Err(Error::Domain(format!("qfactorial of negative {n}")));
    }
    let mut acc = ExactScalar::one();
    for k in 1..=n {
        acc = &acc * &qnum(k, variant);
    }
    Ok(acc)
}

/// Falling-factorial ratio `Gamma_q(2 lambda + 1) / Gamma_q(2 lambda + 1 - i)
/// = prod_{k=0}^{i-1} [2 lambda - k]_q` for half-integer `lambda`.
///
/// Returns 0 when the falling product crosses `[0]_q` (i > 2 lambda >= 0).
pub fn qgamma_ratio(lambda: HalfInt, i: i64) -> Result<ExactScalar> {
    if i < 0 {
        return Err(Error::Domain(format!("qgamma_ratio with negative i = {i}")));
    }
    let two_lambda = lambda.twice();
    let mut acc = ExactScalar::one();
    for k in 0..i {
        let f = qnum_sym(two_lambda - k);
        if f.is_zero() {
            return Ok(ExactScalar::zero());
        }
        acc = &acc * &f;
    }
    Ok(acc)
}

/// Which q-exponential a coefficient belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QExp {
    /// `e_q(x) = sum x^n / [n]_q!`
    Small,
    /// `E_q(x) = sum x^k / (k)_q!` (the inverse of `e_q(-x)`).
    Big,
}

/// Coefficient of `x^k` in the requested q-exponential.
pub fn qexp_coeff(k: i64, variant: QExp) -> Result<ExactScalar> {
    if k < 0 {
        return Err(Error::Domain(format!("qexp_coeff with negative k = {k}")));
    }
    let fact = match variant {
        QExp::Small => qfactorial(k, QVariant::Symmetric)?,
        QExp::Big => qfactorial(k, QVariant::Nonsymmetric)?,
    };
    fact.inv()
}

/// Coefficient of `x^k` in `E_{q^base}(x)`, the big q-exponential with the
/// deformation base `q^base`.
pub fn qexp_coeff_base(k: i64, base: i64) -> Result<ExactScalar> {
    Ok(qexp_coeff(k, QExp::Big)?.scale_u(base))
}

// ---------------------------------------------------------------------------
// Scalar text form
// ---------------------------------------------------------------------------

/// Parse the canonical text form of a scalar: `p/q` for rationals,
/// `num(u)/den(u)` with explicit integer coefficients for deformed scalars.
/// `q` is accepted as a synonym for `u^2`.
pub fn parse_scalar(s: &str) -> Result<ExactScalar> {
    let mut p = ScalarParser {
        chars: s.chars().collect(),
        pos: 0,
    };
    let v = p.parse_ratio()?;
    p.skip_ws();
    if p.pos != p.chars.len() {
        return Err(Error::Parse(format!(
            "trailing input at byte {} in scalar `{s}`",
            p.pos
        )));
    }
    Ok(v)
}

struct ScalarParser {
    chars: Vec<char>,
    pos: usize,
}

impl ScalarParser {
    fn skip_ws(&mut self) {
        while self.pos < self.chars.len() && self.chars[self.pos].is_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<char> {
        self.skip_ws();
        let c = self.chars.get(self.pos).copied();
        if c.is_some() {
            self.pos += 1;
        }
        c
    }

    fn parse_ratio(&mut self) -> Result<ExactScalar> {
        let num = self.parse_poly()?;
        if self.peek() == Some('/') {
            self.bump();
            let den = self.parse_poly()?;
            if den.is_zero() {
                return Err(Error::DivisionByZero);
            }
            Ok(&num / &den)
        } else {
            Ok(num)
        }
    }

    /// polynomial: optionally parenthesized signed monomial sum
    fn parse_poly(&mut self) -> Result<ExactScalar> {
        if self.peek() == Some('(') {
            self.bump();
            let mut acc = self.parse_signed_term()?;
            loop {
                match self.peek() {
                    Some('+') => {
                        self.bump();
                        let t = self.parse_term()?;
                        acc = &acc + &t;
                    }
                    Some('-') => {
                        self.bump();
                        let t = self.parse_term()?;
                        acc = &acc - &t;
                    }
                    Some(')') => {
                        self.bump();
                        return Ok(acc);
                    }
                    other => {
                        return Err(Error::Parse(format!("expected + - or ) , got {other:?}")))
                    }
                }
            }
        } else {
            self.parse_signed_term()
        }
    }

    fn parse_signed_term(&mut self) -> Result<ExactScalar> {
        match self.peek() {
            Some('-') => {
                self.bump();
                Ok(-self.parse_term()?)
            }
            Some('+') => {
                self.bump();
                self.parse_term()
            }
            _ => self.parse_term(),
        }
    }

    /// term: INT ['*' VAR['^'INT]] | VAR['^'INT]
    fn parse_term(&mut self) -> Result<ExactScalar> {
        let mut coeff: Option<BigInt> = None;
        if matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            coeff = Some(self.parse_int()?);
            if self.peek() == Some('*') {
                self.bump();
            } else if !matches!(self.peek(), Some('u') | Some('q')) {
                return Ok(ExactScalar::Rat(BigRational::from_integer(coeff.unwrap())));
            }
        }
        match self.peek() {
            Some(v @ ('u' | 'q')) => {
                self.bump();
                let mut exp: i64 = 1;
                if self.peek() == Some('^') {
                    self.bump();
                    let neg = if self.peek() == Some('-') {
                        self.bump();
                        true
                    } else {
                        false
                    };
                    let e = self.parse_int()?;
                    use num_traits::ToPrimitive;
                    exp = e.to_i64().ok_or_else(|| {
                        Error::Parse("exponent out of range".to_string())
                    })?;
                    if neg {
                        exp = -exp;
                    }
                }
                if v == 'q' {
                    exp *= 2;
                }
                let c = coeff.unwrap_or_else(BigInt::one);
                Ok(ExactScalar::compress(
                    URat::normalized(UPoly::monomial(exp, c), UPoly::one()).unwrap(),
                ))
            }
            _ => match coeff {
                Some(c) => Ok(ExactScalar::Rat(BigRational::from_integer(c))),
                None => Err(Error::Parse("expected a term".to_string())),
            },
        }
    }

    fn parse_int(&mut self) -> Result<BigInt> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.chars.len() && self.chars[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(Error::Parse("expected an integer".to_string()));
        }
        let s: String = self.chars[start..self.pos].iter().collect();
        s.parse::<BigInt>()
            .map_err(|e| Error::Parse(format!("bad integer `{s}`: {e}")))
    }
}

// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;

    fn q() -> ExactScalar {
        ExactScalar::q_pow(1)
    }

    #[test]
    fn qnum_zero_and_one() {
        assert!(qnum_sym(0).is_zero());
        assert!(qnum_sym(1).is_one());
        assert!(qnum_nonsym(0).is_zero());
        assert!(qnum_nonsym(1).is_one());
    }

    #[test]
    fn qnum_two_symmetric() {
        // [2]_q = q + 1/q
        let expected = &q() + &q().inv().unwrap();
        assert_eq!(qnum_sym(2), expected);
    }

    #[test]
    fn qnum_symmetric_is_q_inversion_invariant() {
        for n in -6..=6 {
            assert_eq!(qnum_sym(n), qnum_sym(n).invert_q(), "n = {n}");
        }
    }

    #[test]
    fn qnum_classical_limit_is_n() {
        for n in -5..=5 {
            for variant in [QVariant::Symmetric, QVariant::Nonsymmetric] {
                let v = qnum(n, variant).eval_u1().unwrap();
                assert_eq!(v, BigRational::from_integer(BigInt::from(n)), "n = {n}");
            }
        }
    }

    #[test]
    fn qfactorial_small_values() {
        assert!(qfactorial(0, QVariant::Symmetric).unwrap().is_one());
        assert_eq!(qfactorial(2, QVariant::Symmetric).unwrap(), qnum_sym(2));
        let expected = &qnum_sym(2) * &qnum_sym(3);
        assert_eq!(qfactorial(3, QVariant::Symmetric).unwrap(), expected);
        assert!(qfactorial(-1, QVariant::Symmetric).is_err());
    }

    #[test]
    fn qgamma_ratio_edges() {
        assert!(qgamma_ratio(HalfInt::ONE, 0).unwrap().is_one());
        assert!(qgamma_ratio(HalfInt::HALF, 1).unwrap().is_one());
        // [2][1][0] contains [0]_q = 0
        assert!(qgamma_ratio(HalfInt::ONE, 3).unwrap().is_zero());
    }

    #[test]
    fn qgamma_ratio_reconstructs_factorial() {
        // ratio(lambda, i) * [2l - i]_q! = [2l]_q!
        for two_l in 0..=5 {
            let l = HalfInt::from_twice(two_l);
            for i in 0..=two_l {
                let lhs = &qgamma_ratio(l, i).unwrap()
                    * &qfactorial(two_l - i, QVariant::Symmetric).unwrap();
                assert_eq!(lhs, qfactorial(two_l, QVariant::Symmetric).unwrap());
            }
        }
    }

    #[test]
    fn qexp_coeffs() {
        assert!(qexp_coeff(0, QExp::Small).unwrap().is_one());
        // 1/[2]_q! = 1/(q + q^-1)
        assert_eq!(
            qexp_coeff(2, QExp::Small).unwrap(),
            (&q() + &q().inv().unwrap()).inv().unwrap()
        );
        // 1/(2)_q! = 1/(1 + q^2)
        assert_eq!(
            qexp_coeff(2, QExp::Big).unwrap(),
            (&ExactScalar::one() + &ExactScalar::q_pow(2)).inv().unwrap()
        );
    }

    #[test]
    fn nonsym_is_shifted_sym() {
        // (n)_q = q^{n-1} [n]_q
        for n in 1..=6 {
            let lhs = qnum_nonsym(n);
            let rhs = &ExactScalar::u_pow(2 * (n - 1)) * &qnum_sym(n);
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn display_and_parse_round_trip() {
        let vals = [
            ExactScalar::ratio(-3, 7),
            ExactScalar::from_int(4),
            qnum_sym(3),
            &qnum_sym(2) / &qnum_nonsym(3),
            ExactScalar::u_pow(-5),
            &(&q() - &q().inv().unwrap()) / &ExactScalar::from_int(2),
        ];
        for v in vals {
            let s = v.to_string();
            let back = parse_scalar(&s).unwrap();
            assert_eq!(back, v, "round trip failed for `{s}`");
        }
    }

    #[test]
    fn parse_accepts_q_and_u_forms() {
        assert_eq!(parse_scalar("q").unwrap(), ExactScalar::q_pow(1));
        assert_eq!(parse_scalar("u^2").unwrap(), ExactScalar::q_pow(1));
        assert_eq!(
            parse_scalar("(q - q^-1)").unwrap(),
            &ExactScalar::q_pow(1) - &ExactScalar::q_pow(-1)
        );
        assert_eq!(parse_scalar("-5/3").unwrap(), ExactScalar::ratio(-5, 3));
    }

    #[test]
    fn reduction_cancels_common_factors() {
        // (q^2 - 1)/(q - 1) should not keep the common factor
        let n = &ExactScalar::q_pow(2) - &ExactScalar::one();
        let d = &ExactScalar::q_pow(1) - &ExactScalar::one();
        let r = &n / &d;
        let expected = &ExactScalar::q_pow(1) + &ExactScalar::one();
        assert_eq!(r, expected);
    }

    #[test]
    fn limit_pole_detected() {
        // 1/(q - 1) has no u -> 1 limit
        let d = &ExactScalar::q_pow(1) - &ExactScalar::one();
        assert!(matches!(d.inv().unwrap().eval_u1(), Err(Error::LimitPole)));
    }

    #[test]
    fn scale_u_changes_base() {
        // (2)_{q^3} = 1 + q^6
        let v = qnum_nonsym(2).scale_u(3);
        let expected = &ExactScalar::one() + &ExactScalar::q_pow(3).pow(2).unwrap();
        assert_eq!(v, expected);
    }
}
