//! Sparse commutative multivariate Laurent-polynomial engine over
//! [`ExactScalar`].
//!
//! Variables are declared up front in a [`VarTable`]; polynomials store a map
//! from exponent vectors to nonzero coefficients. Exponents may be negative,
//! which is how invertible generators (such as the exponential generator of
//! the extension ring, or the spectral parameter `alpha` of the c-number
//! quantum tau) are handled.
//!
//! Besides ordinary arithmetic the module provides the exact operators used
//! by the identity checks: partial derivations (with the extension-ring rule
//! for exponential generators), multiplicative q-shifts, and the symmetric
//! and nonsymmetric q-difference operators.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;


use crate::error::{Error, Result};
use crate::scalars::{qnum_nonsym, qnum_sym, ExactScalar, HalfInt};

// ---------------------------------------------------------------------------
// Variable table
// ---------------------------------------------------------------------------

/// Declared variable: name, whether negative exponents are allowed in
/// canonical output, and an optional exponential-derivation rule.
#[derive(Clone, Debug)]
pub struct VarDecl {
    pub name: String,
    pub invertible: bool,
    /// Some((phi, rate)) marks this variable E as the exponential of
    /// `rate * phi`: the derivation by `phi` then acts as
    /// `d/d phi E^k = rate * k * E^k`.
    pub exp_of: Option<(usize, i64)>,
}

/// Ordered table of declared variables shared by the polynomials of a ring.
#[derive(Clone, Debug)]
pub struct VarTable {
    vars: Vec<VarDecl>,
}

impl VarTable {
    pub fn new<S: AsRef<str>>(names: &[S]) -> Arc<VarTable> {
        Arc::new(VarTable {
            vars: names
                .iter()
                .map(|n| VarDecl {
                    name: n.as_ref().to_string(),
                    invertible: false,
                    exp_of: None,
                })
                .collect(),
        })
    }

    /// Build a table with full control over each declaration.
    pub fn with_decls(vars: Vec<VarDecl>) -> Arc<VarTable> {
        Arc::new(VarTable { vars })
    }

    /// Indexed family `prefix1 ... prefixK` (1-based), e.g. `t1, t2, t3`.
    pub fn indexed(prefix: &str, k: usize) -> Vec<String> {
        (1..=k).map(|i| format!("{prefix}{i}")).collect()
    }

    pub fn len(&self) -> usize {
        self.vars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vars.is_empty()
    }

    pub fn name(&self, idx: usize) -> &str {
        &self.vars[idx].name
    }

    pub fn decl(&self, idx: usize) -> &VarDecl {
        &self.vars[idx]
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.vars
            .iter()
            .position(|v| v.name == name)
            .ok_or_else(|| Error::UnknownVariable(name.to_string()))
    }
}

/// Convenience builder for tables mixing plain, invertible and exponential
/// variables.
pub struct VarTableBuilder {
    vars: Vec<VarDecl>,
}

impl VarTableBuilder {
    pub fn new() -> Self {
        VarTableBuilder { vars: Vec::new() }
    }

    pub fn plain(mut self, name: &str) -> Self {
        self.vars.push(VarDecl {
            name: name.to_string(),
            invertible: false,
            exp_of: None,
        });
        self
    }

    pub fn plain_many<S: AsRef<str>>(mut self, names: &[S]) -> Self {
        for n in names {
            self.vars.push(VarDecl {
                name: n.as_ref().to_string(),
                invertible: false,
                exp_of: None,
            });
        }
        self
    }

    pub fn invertible(mut self, name: &str) -> Self {
        self.vars.push(VarDecl {
            name: name.to_string(),
            invertible: true,
            exp_of: None,
        });
        self
    }

    /// Declare `name` as the exponential `exp(rate * phi)` of an existing
    /// plain variable `phi`.
    pub fn exponential(mut self, name: &str, phi: &str, rate: i64) -> Self {
        let phi_idx = self
            .vars
            .iter()
            .position(|v| v.name == phi)
            .expect("exponential base must be declared first");
        self.vars.push(VarDecl {
            name: name.to_string(),
            invertible: true,
            exp_of: Some((phi_idx, rate)),
        });
        self
    }

    pub fn build(self) -> Arc<VarTable> {
        Arc::new(VarTable { vars: self.vars })
    }
}

impl Default for VarTableBuilder {
    fn default() -> Self {
        Self::new()
    }
}

// ---------------------------------------------------------------------------
// MultiPoly
// ---------------------------------------------------------------------------

type Expo = Vec<i32>;

/// Sparse multivariate Laurent polynomial over [`ExactScalar`].
#[derive(Clone)]
pub struct MultiPoly {
    vars: Arc<VarTable>,
    terms: BTreeMap<Expo, ExactScalar>,
}

impl MultiPoly {
    pub fn zero(vars: &Arc<VarTable>) -> Self {
        MultiPoly {
            vars: vars.clone(),
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(vars: &Arc<VarTable>, c: ExactScalar) -> Self {
        let mut p = Self::zero(vars);
        if !c.is_zero() {
            p.terms.insert(vec![0; vars.len()], c);
        }
        p
    }

    pub fn one(vars: &Arc<VarTable>) -> Self {
        Self::constant(vars, ExactScalar::one())
    }

    pub fn var(vars: &Arc<VarTable>, name: &str) -> Result<Self> {
        Self::var_pow(vars, name, 1)
    }

    pub fn var_pow(vars: &Arc<VarTable>, name: &str, exp: i32) -> Result<Self> {
        let idx = vars.index_of(name)?;
        let mut e = vec![0; vars.len()];
        e[idx] = exp;
        let mut p = Self::zero(vars);
        p.terms.insert(e, ExactScalar::one());
        Ok(p)
    }

    pub fn monomial(vars: &Arc<VarTable>, exps: &[(usize, i32)], coeff: ExactScalar) -> Self {
        let mut e = vec![0; vars.len()];
        for (i, k) in exps {
            e[*i] = *k;
        }
        let mut p = Self::zero(vars);
        if !coeff.is_zero() {
            p.terms.insert(e, coeff);
        }
        p
    }

    pub fn vars(&self) -> &Arc<VarTable> {
        &self.vars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Expo, &ExactScalar)> {
        self.terms.iter()
    }

    /// Coefficient of the given exponent vector.
    pub fn coeff(&self, e: &[i32]) -> ExactScalar {
        self.terms.get(e).cloned().unwrap_or_else(ExactScalar::zero)
    }

    fn same_table(&self, other: &MultiPoly) {
        assert!(
            Arc::ptr_eq(&self.vars, &other.vars) || self.vars.vars.len() == other.vars.vars.len(),
            "mixing polynomials over different variable tables"
        );
    }

    fn insert(&mut self, e: Expo, c: ExactScalar) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(e) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                let s = o.get() + &c;
                if s.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }

    pub fn add(&self, other: &MultiPoly) -> MultiPoly {
        self.same_table(other);
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.insert(e.clone(), c.clone());
        }
        out
    }

    pub fn neg(&self) -> MultiPoly {
        MultiPoly {
            vars: self.vars.clone(),
            terms: self
                .terms
                .iter()
                .map(|(e, c)| (e.clone(), -c.clone()))
                .collect(),
        }
    }

    pub fn sub(&self, other: &MultiPoly) -> MultiPoly {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &MultiPoly) -> MultiPoly {
        self.same_table(other);
        let mut out = Self::zero(&self.vars);
        for (e1, c1) in &self.terms {
            for (e2, c2) in &other.terms {
                let e: Expo = e1.iter().zip(e2.iter()).map(|(a, b)| a + b).collect();
                out.insert(e, c1 * c2);
            }
        }
        out
    }

    pub fn scale(&self, c: &ExactScalar) -> MultiPoly {
        if c.is_zero() {
            return Self::zero(&self.vars);
        }
        MultiPoly {
            vars: self.vars.clone(),
            terms: self
                .terms
                .iter()
                .map(|(e, k)| (e.clone(), k * c))
                .collect(),
        }
    }

    pub fn pow(&self, k: u32) -> MultiPoly {
        let mut acc = Self::one(&self.vars);
        for _ in 0..k {
            acc = acc.mul(self);
        }
        acc
    }

    /// Multiply by `var^k` (k may be negative).
    pub fn mul_var_pow(&self, var: usize, k: i32) -> MultiPoly {
        MultiPoly {
            vars: self.vars.clone(),
            terms: self
                .terms
                .iter()
                .map(|(e, c)| {
                    let mut e = e.clone();
                    e[var] += k;
                    (e, c.clone())
                })
                .collect(),
        }
    }

    /// Exact division by `var^k`; errors if some term is not divisible
    /// (for non-invertible `var` this guards the q-difference operators).
    pub fn div_var_exact(&self, var: usize) -> Result<MultiPoly> {
        if !self.vars.decl(var).invertible {
            for e in self.terms.keys() {
                if e[var] < 1 {
                    return Err(Error::Domain(format!(
                        "polynomial not divisible by {}",
                        self.vars.name(var)
                    )));
                }
            }
        }
        Ok(self.mul_var_pow(var, -1))
    }

    // -- operators ----------------------------------------------------------

    /// Exact partial derivative of the given order.
    ///
    /// In an extension ring the derivation also acts on exponential
    /// generators: if `E = exp(rate * phi)` then `d/d phi` maps `E^k` to
    /// `rate * k * E^k`.
    pub fn derive(&self, var: &str, order: u32) -> Result<MultiPoly> {
        let idx = self.vars.index_of(var)?;
        // exponential generators attached to this base variable
        let exps: Vec<(usize, i64)> = (0..self.vars.len())
            .filter_map(|j| {
                self.vars.decl(j).exp_of.and_then(|(phi, rate)| {
                    if phi == idx {
                        Some((j, rate))
                    } else {
                        None
                    }
                })
            })
            .collect();
        let mut p = self.clone();
        for _ in 0..order {
            let mut out = Self::zero(&self.vars);
            for (e, c) in &p.terms {
                // ordinary power rule
                if e[idx] != 0 {
                    let mut e2 = e.clone();
                    let n = e2[idx];
                    e2[idx] -= 1;
                    out.insert(e2, c * &ExactScalar::from_int(n as i64));
                }
                // exponential rule
                for (j, rate) in &exps {
                    if e[*j] != 0 {
                        let factor = ExactScalar::from_int(*rate * e[*j] as i64);
                        out.insert(e.clone(), c * &factor);
                    }
                }
            }
            p = out;
        }
        Ok(p)
    }

    /// Multiplicative shift: every monomial `var^n` picks up `u^{half * n}`,
    /// i.e. `var -> q^{half/2} var`. The classical shift `M^+ : t -> q t`
    /// is `half = +2`.
    pub fn qshift(&self, var: &str, half: i64) -> Result<MultiPoly> {
        let idx = self.vars.index_of(var)?;
        let mut out = Self::zero(&self.vars);
        for (e, c) in &self.terms {
            let f = ExactScalar::u_pow(half * e[idx] as i64);
            out.insert(e.clone(), c * &f);
        }
        Ok(out)
    }

    /// Symmetric q-difference operator
    /// `D^{(alpha)} f = (q^{-alpha} f(q t) - q^{alpha} f(t/q)) / ((q - 1/q) t)`;
    /// on a monomial `t^n` it produces `[n - alpha]_q t^{n-1}`.
    ///
    /// For `alpha != 0` the operator maps constants to `t^{-1}` terms; the
    /// result lives in the Laurent extension, and compositions like
    /// `t D^{(alpha)}` land back in polynomials.
    pub fn qdiff_sym(&self, var: &str, alpha: HalfInt) -> Result<MultiPoly> {
        let idx = self.vars.index_of(var)?;
        let mut out = Self::zero(&self.vars);
        for (e, c) in &self.terms {
            // [n - alpha]_q with n - alpha a half integer in general; here
            // alpha is a half-integer and n an integer, so 2(n - alpha) is
            // an integer and the symmetric q-number generalizes as
            // (u^{2x} - u^{-2x})/(u^2 - u^-2) with 2x = 2n - 2 alpha.
            let two_x = 2 * e[idx] as i64 - alpha.twice();
            let coeff = half_qnum_sym(two_x);
            if coeff.is_zero() {
                continue;
            }
            let mut e2 = e.clone();
            e2[idx] -= 1;
            out.insert(e2, c * &coeff);
        }
        Ok(out)
    }

    /// Nonsymmetric q-difference operator with deformation base `q^base`:
    /// on a monomial `t^n` it produces `(n + alpha)_{q^base} t^{n-1}`.
    /// The plain difference operator entering the KOS hierarchy is
    /// `alpha = 0`, `base = 1`.
    pub fn qdiff_nonsym(&self, var: &str, alpha: i64, base: i64) -> Result<MultiPoly> {
        let idx = self.vars.index_of(var)?;
        let mut out = Self::zero(&self.vars);
        for (e, c) in &self.terms {
            let coeff = qnum_nonsym(e[idx] as i64 + alpha).scale_u(base);
            if coeff.is_zero() {
                continue;
            }
            let mut e2 = e.clone();
            e2[idx] -= 1;
            out.insert(e2, c * &coeff);
        }
        Ok(out)
    }

    /// Simultaneous substitution of variables by polynomials or scalars.
    /// Bindings for variables with negative exponents must be invertible
    /// monomials.
    pub fn substitute(&self, bindings: &[(&str, Binding)]) -> Result<MultiPoly> {
        let mut map: Vec<Option<&Binding>> = vec![None; self.vars.len()];
        for (name, b) in bindings {
            map[self.vars.index_of(name)?] = Some(b);
        }
        let mut out = Self::zero(&self.vars);
        for (e, c) in &self.terms {
            let mut term = MultiPoly::constant(&self.vars, c.clone());
            let mut e_rest = e.clone();
            for (i, b) in map.iter().enumerate() {
                let Some(b) = b else { continue };
                let k = e_rest[i];
                e_rest[i] = 0;
                if k == 0 {
                    continue;
                }
                match b {
                    Binding::Scalar(s) => {
                        if k < 0 {
                            let inv = s.inv()?;
                            term = term.scale(&inv.pow(-k as i64)?);
                        } else {
                            term = term.scale(&s.pow(k as i64)?);
                        }
                    }
                    Binding::Poly(p) => {
                        if k < 0 {
                            // only monomial substitutions can be inverted
                            if p.terms.len() != 1 {
                                return Err(Error::Domain(
                                    "cannot substitute a non-monomial into a negative power"
                                        .to_string(),
                                ));
                            }
                            let (pe, pc) = p.terms.iter().next().unwrap();
                            let inv_c = pc.inv()?;
                            let mut q = MultiPoly::zero(&self.vars);
                            q.insert(
                                pe.iter().map(|x| -x).collect(),
                                inv_c,
                            );
                            term = term.mul(&q.pow(-k as u32));
                        } else {
                            term = term.mul(&p.pow(k as u32));
                        }
                    }
                }
            }
            let mut base = MultiPoly::zero(&self.vars);
            base.insert(e_rest, ExactScalar::one());
            out = out.add(&term.mul(&base));
        }
        Ok(out)
    }

    /// Substitute u -> 1 in every coefficient (classical limit).
    pub fn eval_u1(&self) -> Result<MultiPoly> {
        let mut out = Self::zero(&self.vars);
        for (e, c) in &self.terms {
            let r = c.eval_u1()?;
            out.insert(e.clone(), ExactScalar::Rat(r));
        }
        Ok(out)
    }

    /// Total degree of the named variable.
    pub fn degree_in(&self, var: &str) -> Result<i32> {
        let idx = self.vars.index_of(var)?;
        Ok(self.terms.keys().map(|e| e[idx]).max().unwrap_or(0))
    }

    /// Numeric evaluation: assign complex values to all variables and to u.
    pub fn eval_complex(
        &self,
        u: num_complex::Complex64,
        values: &[num_complex::Complex64],
    ) -> num_complex::Complex64 {
        let mut acc = num_complex::Complex64::new(0.0, 0.0);
        for (e, c) in &self.terms {
            let mut t = c.eval_complex(u);
            for (i, k) in e.iter().enumerate() {
                if *k != 0 {
                    t *= values[i].powi(*k);
                }
            }
            acc += t;
        }
        acc
    }
}

/// Symmetric q-number with a half-integer argument `x = two_x / 2`:
/// `(u^{2x} - u^{-2x}) / (u^2 - u^{-2})`.
pub fn half_qnum_sym(two_x: i64) -> ExactScalar {
    if two_x % 2 == 0 {
        return qnum_sym(two_x / 2);
    }
    let num = &ExactScalar::u_pow(two_x) - &ExactScalar::u_pow(-two_x);
    let den = &ExactScalar::u_pow(2) - &ExactScalar::u_pow(-2);
    &num / &den
}

/// Substitution target.
pub enum Binding {
    Scalar(ExactScalar),
    Poly(MultiPoly),
}

impl PartialEq for MultiPoly {
    fn eq(&self, other: &Self) -> bool {
        self.terms == other.terms
    }
}

impl Eq for MultiPoly {}

impl fmt::Debug for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MultiPoly({self})")
    }
}

impl fmt::Display for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        // canonical order: graded lex, highest total degree first
        let mut keys: Vec<&Expo> = self.terms.keys().collect();
        keys.sort_by(|a, b| {
            let da: i64 = a.iter().map(|x| *x as i64).sum();
            let db: i64 = b.iter().map(|x| *x as i64).sum();
            db.cmp(&da).then_with(|| b.cmp(a))
        });
        let mut first = true;
        for e in keys {
            let c = &self.terms[e];
            let cs = c.to_string();
            let (neg, mag) = match cs.strip_prefix('-') {
                // only strip the sign of plain leading-negative scalars
                Some(rest) if !cs.starts_with("-(") => (true, rest.to_string()),
                _ => (false, cs),
            };
            if first {
                if neg {
                    write!(f, "-")?;
                }
                first = false;
            } else if neg {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let needs_parens = mag.contains(' ') && !mag.starts_with('(');
            let is_const_term = e.iter().all(|k| *k == 0);
            let mut wrote_coeff = false;
            if is_const_term || mag != "1" {
                if needs_parens {
                    write!(f, "({mag})")?;
                } else {
                    write!(f, "{mag}")?;
                }
                wrote_coeff = true;
            }
            let mut first_var = !wrote_coeff;
            for (i, k) in e.iter().enumerate() {
                if *k == 0 {
                    continue;
                }
                if !first_var || wrote_coeff {
                    write!(f, "*")?;
                }
                first_var = false;
                if *k == 1 {
                    write!(f, "{}", self.vars.name(i))?;
                } else {
                    write!(f, "{}^{}", self.vars.name(i), k)?;
                }
            }
            let _ = first_var;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalars::QVariant;

    fn table() -> Arc<VarTable> {
        VarTable::new(&["t1", "t2", "tb1"])
    }

    fn v(t: &Arc<VarTable>, n: &str) -> MultiPoly {
        MultiPoly::var(t, n).unwrap()
    }

    #[test]
    fn derive_power_rule() {
        let t = table();
        let t1 = v(&t, "t1");
        let p = t1.mul(&t1); // t1^2
        let d = p.derive("t1", 1).unwrap();
        assert_eq!(d, t1.scale(&ExactScalar::from_int(2)));
        let c = MultiPoly::constant(&t, ExactScalar::from_int(5));
        assert!(c.derive("t1", 1).unwrap().is_zero());
    }

    #[test]
    fn derive_unknown_var_errors() {
        let t = table();
        assert!(v(&t, "t1").derive("nope", 1).is_err());
    }

    #[test]
    fn exponential_extension_rule() {
        let t = VarTableBuilder::new()
            .plain("phi")
            .exponential("E", "phi", -2)
            .build();
        let e = MultiPoly::var(&t, "E").unwrap();
        let d = e.derive("phi", 1).unwrap();
        assert_eq!(d, e.scale(&ExactScalar::from_int(-2)));
        // E^{-1} = e^{+2 phi}
        let einv = MultiPoly::var_pow(&t, "E", -1).unwrap();
        let d = einv.derive("phi", 1).unwrap();
        assert_eq!(d, einv.scale(&ExactScalar::from_int(2)));
    }

    #[test]
    fn qshift_rules() {
        let t = table();
        let t1 = v(&t, "t1");
        // M^+ t1 = q t1
        let shifted = t1.qshift("t1", 2).unwrap();
        assert_eq!(shifted, t1.scale(&ExactScalar::q_pow(1)));
        // constants are fixed
        let c = MultiPoly::one(&t);
        assert_eq!(c.qshift("t1", 2).unwrap(), c);
        // degree 2 with M^-
        let p = t1.pow(2).qshift("t1", -2).unwrap();
        assert_eq!(p, t1.pow(2).scale(&ExactScalar::q_pow(-2)));
        // inverse property
        let p = v(&t, "t1").mul(&v(&t, "t2")).add(&v(&t, "tb1").pow(3));
        let round = p.qshift("t2", 2).unwrap().qshift("t2", -2).unwrap();
        assert_eq!(round, p);
    }

    #[test]
    fn qdiff_symmetric_examples() {
        let t = table();
        let t1 = v(&t, "t1");
        // D^{(0)} t1 = 1
        let d = t1.qdiff_sym("t1", HalfInt::ZERO).unwrap();
        assert_eq!(d, MultiPoly::one(&t));
        // D^{(0)} 1 = 0
        assert!(MultiPoly::one(&t)
            .qdiff_sym("t1", HalfInt::ZERO)
            .unwrap()
            .is_zero());
        // D^{(0)} t1^2 = [2]_q t1
        let d = t1.pow(2).qdiff_sym("t1", HalfInt::ZERO).unwrap();
        assert_eq!(d, t1.scale(&crate::scalars::qnum(2, QVariant::Symmetric)));
    }

    #[test]
    fn qdiff_nonsym_counts() {
        let t = table();
        let t1 = v(&t, "t1");
        let d = t1.pow(3).qdiff_nonsym("t1", 0, 1).unwrap();
        assert_eq!(d, t1.pow(2).scale(&qnum_nonsym(3)));
        // base change: (1)_{q^2} = 1 still, (2)_{q^2} = 1 + q^4
        let d = t1.pow(2).qdiff_nonsym("t1", 0, 2).unwrap();
        assert_eq!(d, t1.scale(&qnum_nonsym(2).scale_u(2)));
    }

    #[test]
    fn substitution() {
        let t = table();
        let t1 = v(&t, "t1");
        let tb1 = v(&t, "tb1");
        let p = t1.mul(&tb1);
        let z = p
            .substitute(&[("t1", Binding::Scalar(ExactScalar::zero()))])
            .unwrap();
        assert!(z.is_zero());
        let two_tb = t1
            .add(&tb1)
            .substitute(&[("t1", Binding::Poly(tb1.clone()))])
            .unwrap();
        assert_eq!(two_tb, tb1.scale(&ExactScalar::from_int(2)));
    }

    #[test]
    fn display_sorted_graded_lex() {
        let t = table();
        let p = v(&t, "t2")
            .scale(&(&ExactScalar::q_pow(1) - &ExactScalar::q_pow(-1)))
            .add(&v(&t, "t1").pow(2).mul(&v(&t, "tb1")).scale(&ExactScalar::ratio(3, 2)));
        assert_eq!(p.to_string(), "3/2*t1^2*tb1 + (q - q^-1)*t2");
    }

    #[test]
    fn leibniz_product_rule() {
        let t = table();
        let p = v(&t, "t1").pow(2).add(&v(&t, "t2"));
        let q = v(&t, "t1").mul(&v(&t, "tb1")).add(&MultiPoly::one(&t));
        let lhs = p.mul(&q).derive("t1", 1).unwrap();
        let rhs = p
            .derive("t1", 1)
            .unwrap()
            .mul(&q)
            .add(&p.mul(&q.derive("t1", 1).unwrap()));
        assert_eq!(lhs, rhs);
    }
}
