//! Classical and q-deformed Schur polynomials, the s -> t time map and Miwa
//! point multisets.
//!
//! The classical polynomials `P_k` are the coefficients of
//! `exp(sum_k t_k x^k)`; the deformed family `P^{(q)}_j` comes from the
//! product of big q-exponentials `prod_i E_{q^i}(s_i z^i)`. Expanding the
//! logarithm of that product expresses the ordinary times through the
//! deformed ones, which is the exact change of variables the difference
//! hierarchy rides on.

use std::sync::Arc;


use crate::error::{Error, Result};
use crate::poly::{MultiPoly, VarTable};
use crate::scalars::{qexp_coeff_base, qnum_nonsym, ExactScalar};

/// Which alphabet of time variables a vector refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TimeFlavor {
    T,
    TBar,
    S,
    SBar,
}

impl TimeFlavor {
    pub fn prefix(&self) -> &'static str {
        match self {
            TimeFlavor::T => "t",
            TimeFlavor::TBar => "tb",
            TimeFlavor::S => "s",
            TimeFlavor::SBar => "sb",
        }
    }
}

/// A finite family of time variables, either symbolic (variables of a ring)
/// or explicit polynomials (e.g. the output of [`times_from_s`]).
#[derive(Clone)]
pub struct TimeVector {
    pub flavor: TimeFlavor,
    /// `coeffs[k-1]` is the polynomial standing for the k-th time.
    pub coeffs: Vec<MultiPoly>,
}

impl TimeVector {
    /// Symbolic times `prefix1 .. prefixK` looked up in `vars`.
    pub fn symbolic(vars: &Arc<VarTable>, flavor: TimeFlavor, k: usize) -> Result<TimeVector> {
        let coeffs = (1..=k)
            .map(|i| MultiPoly::var(vars, &format!("{}{}", flavor.prefix(), i)))
            .collect::<Result<Vec<_>>>()?;
        Ok(TimeVector { flavor, coeffs })
    }

    pub fn from_polys(flavor: TimeFlavor, coeffs: Vec<MultiPoly>) -> TimeVector {
        TimeVector { flavor, coeffs }
    }

    pub fn cutoff(&self) -> usize {
        self.coeffs.len()
    }

    pub fn time(&self, k: usize) -> &MultiPoly {
        &self.coeffs[k - 1]
    }

    fn ring(&self) -> &Arc<VarTable> {
        self.coeffs
            .first()
            .expect("empty time vector")
            .vars()
    }
}

/// Classical Schur polynomial `P_k(t)`: zero for `k < 0`, one for `k = 0`,
/// and otherwise determined by `k P_k = sum_{m=1}^{k} m t_m P_{k-m}` with
/// `t_m = 0` above the cutoff.
pub fn schur_poly(k: i64, t: &TimeVector) -> MultiPoly {
    let vars = t.ring();
    if k < 0 {
        return MultiPoly::zero(vars);
    }
    let k = k as usize;
    let mut p: Vec<MultiPoly> = Vec::with_capacity(k + 1);
    p.push(MultiPoly::one(vars));
    for n in 1..=k {
        let mut acc = MultiPoly::zero(vars);
        for m in 1..=n.min(t.cutoff()) {
            acc = acc.add(&t.time(m).mul(&p[n - m]).scale(&ExactScalar::from_int(m as i64)));
        }
        p.push(acc.scale(&ExactScalar::ratio(1, n as i64)));
    }
    p.pop().unwrap()
}

/// All classical Schur polynomials `P_0 .. P_k` at once.
pub fn schur_polys_upto(k: usize, t: &TimeVector) -> Vec<MultiPoly> {
    let vars = t.ring();
    let mut p: Vec<MultiPoly> = Vec::with_capacity(k + 1);
    p.push(MultiPoly::one(vars));
    for n in 1..=k {
        let mut acc = MultiPoly::zero(vars);
        for m in 1..=n.min(t.cutoff()) {
            acc = acc.add(&t.time(m).mul(&p[n - m]).scale(&ExactScalar::from_int(m as i64)));
        }
        p.push(acc.scale(&ExactScalar::ratio(1, n as i64)));
    }
    p
}

/// q-Schur polynomial `P^{(q)}_j(s)`: the coefficient of `z^j` in
/// `prod_{i=1..K} E_{q^i}(s_i z^i)`.
pub fn qschur_poly(j: i64, s: &TimeVector) -> Result<MultiPoly> {
    Ok(qschur_polys_upto(j.max(0) as usize, s)?
        .into_iter()
        .nth(j.max(0) as usize)
        .unwrap_or_else(|| MultiPoly::zero(s.ring())))
}

/// All q-Schur polynomials `P^{(q)}_0 .. P^{(q)}_j`.
pub fn qschur_polys_upto(j: usize, s: &TimeVector) -> Result<Vec<MultiPoly>> {
    let vars = s.ring();
    // coefficients of the truncated product of big q-exponentials
    let mut acc: Vec<MultiPoly> = vec![MultiPoly::zero(vars); j + 1];
    acc[0] = MultiPoly::one(vars);
    for i in 1..=s.cutoff().min(j) {
        // E_{q^i}(s_i z^i) = sum_n s_i^n z^{i n} / (n)_{q^i}!
        let mut factor: Vec<MultiPoly> = vec![MultiPoly::zero(vars); j + 1];
        let mut n = 0usize;
        while i * n <= j {
            let c = qexp_coeff_base(n as i64, i as i64)?;
            factor[i * n] = s.time(i).pow(n as u32).scale(&c);
            n += 1;
        }
        let mut next: Vec<MultiPoly> = vec![MultiPoly::zero(vars); j + 1];
        for (d1, a) in acc.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (d2, b) in factor.iter().enumerate() {
                if d1 + d2 > j || b.is_zero() {
                    continue;
                }
                next[d1 + d2] = next[d1 + d2].add(&a.mul(b));
            }
        }
        acc = next;
    }
    Ok(acc)
}

/// Express the ordinary times through the deformed ones:
/// `t_m = sum_{n k = m} s_k^n (1 - Q_k)^n / (n (1 - Q_k^n))` with
/// `Q_k = q^{2k}` the square of the base of `E_{q^k}`.
///
/// The exact consistency check is `P^{(q)}_k(s) = P_k(t(s))`, which pins the
/// base convention; see the module tests.
pub fn times_from_s(s: &TimeVector, k_max: usize) -> Result<TimeVector> {
    let vars = s.ring();
    let mut times = Vec::with_capacity(k_max);
    for m in 1..=k_max {
        let mut acc = MultiPoly::zero(vars);
        for k in 1..=m.min(s.cutoff()) {
            if m % k != 0 {
                continue;
            }
            let n = (m / k) as i64;
            // (1 - Q)^n / (n (1 - Q^n)) with Q = q^{2k} = u^{4k}
            let one = ExactScalar::one();
            let qq = ExactScalar::u_pow(4 * k as i64);
            let num = (&one - &qq).pow(n)?;
            let den = &ExactScalar::from_int(n) * &(&one - &qq.pow(n)?);
            let coeff = num.checked_div(&den)?;
            acc = acc.add(&s.time(k).pow(n as u32).scale(&coeff));
        }
        times.push(acc);
    }
    let flavor = match s.flavor {
        TimeFlavor::S => TimeFlavor::T,
        TimeFlavor::SBar => TimeFlavor::TBar,
        other => other,
    };
    Ok(TimeVector::from_polys(flavor, times))
}

/// Symbolic Miwa multiset for a single deformed time `s_k`: the points
/// `omega^a mu_k Q_k^{-l/k}` for `a = 0..k-1`, `l = 0..L-1`, with
/// `mu_k^{-k} = (1 - Q_k) s_k` and `omega` a primitive k-th root of unity.
///
/// Individual points involve formal k-th roots; all *power sums* of the
/// inverse points are exact scalars, because the root-of-unity average
/// kills every power that is not a multiple of k. That exactness is the
/// content of [`MiwaPoints::power_sum_time`].
#[derive(Clone, Debug)]
pub struct MiwaPoints {
    pub k: usize,
    pub l_cutoff: usize,
    pub s_value: ExactScalar,
}

/// Build the Miwa multiset for time index `k >= 1` with `L` shells.
pub fn miwa_points(k: usize, s_value: ExactScalar, l_cutoff: usize) -> Result<MiwaPoints> {
    if k == 0 {
        return Err(Error::Domain("miwa_points needs k >= 1".to_string()));
    }
    if s_value.is_zero() {
        return Err(Error::Domain("miwa_points needs s_k != 0".to_string()));
    }
    Ok(MiwaPoints {
        k,
        l_cutoff,
        s_value,
    })
}

impl MiwaPoints {
    /// Number of points in the multiset.
    pub fn len(&self) -> usize {
        self.k * self.l_cutoff
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// The induced time `t_m = (1/m) sum_points (point)^{-m}`, exactly.
    ///
    /// Vanishes unless `k | m`; for `m = n k` the value is
    /// `(1/m) k ((1 - Q) s_k)^n sum_{l < L} Q^{l n}` with `Q = q^{2k}`.
    pub fn power_sum_time(&self, m: usize) -> Result<ExactScalar> {
        if m == 0 {
            return Err(Error::Domain("power sums need m >= 1".to_string()));
        }
        if m % self.k != 0 {
            return Ok(ExactScalar::zero());
        }
        let n = (m / self.k) as i64;
        let qq = ExactScalar::u_pow(4 * self.k as i64);
        let base = &(&ExactScalar::one() - &qq) * &self.s_value;
        let mut shell_sum = ExactScalar::zero();
        for l in 0..self.l_cutoff {
            shell_sum = &shell_sum + &qq.pow(l as i64 * n)?;
        }
        let coeff = ExactScalar::ratio(self.k as i64, m as i64);
        Ok(&(&coeff * &base.pow(n)?) * &shell_sum)
    }

    /// The closed-form (L -> infinity) value of the induced time:
    /// `t_m = (1/m) ((1 - Q) s_k)^n / (1 - Q^n)` for `m = n k`.
    pub fn power_sum_time_closed(&self, m: usize) -> Result<ExactScalar> {
        if m % self.k != 0 {
            return Ok(ExactScalar::zero());
        }
        let n = (m / self.k) as i64;
        let qq = ExactScalar::u_pow(4 * self.k as i64);
        let base = &(&ExactScalar::one() - &qq) * &self.s_value;
        let den = &ExactScalar::from_int(n) * &(&ExactScalar::one() - &qq.pow(n)?);
        base.pow(n)?.checked_div(&den)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::Binding;
    use crate::scalars::HalfInt;

    fn t_ring(k: usize) -> Arc<VarTable> {
        let names = VarTable::indexed("t", k);
        VarTable::new(&names)
    }

    fn s_ring(k: usize) -> Arc<VarTable> {
        let names = VarTable::indexed("s", k);
        VarTable::new(&names)
    }

    #[test]
    fn schur_edge_cases() {
        let vars = t_ring(3);
        let t = TimeVector::symbolic(&vars, TimeFlavor::T, 3).unwrap();
        assert_eq!(schur_poly(0, &t), MultiPoly::one(&vars));
        assert!(schur_poly(-3, &t).is_zero());
        // P_2 = t2 + t1^2/2
        let t1 = MultiPoly::var(&vars, "t1").unwrap();
        let t2 = MultiPoly::var(&vars, "t2").unwrap();
        let expected = t2.add(&t1.pow(2).scale(&ExactScalar::ratio(1, 2)));
        assert_eq!(schur_poly(2, &t), expected);
    }

    #[test]
    fn schur_derivative_property() {
        // dP_k/dt_p = P_{k-p}
        let vars = t_ring(4);
        let t = TimeVector::symbolic(&vars, TimeFlavor::T, 4).unwrap();
        let ps = schur_polys_upto(6, &t);
        for k in 0..=6usize {
            for p in 1..=4usize {
                let d = ps[k].derive(&format!("t{p}"), 1).unwrap();
                let expected = if k >= p {
                    ps[k - p].clone()
                } else {
                    MultiPoly::zero(&vars)
                };
                assert_eq!(d, expected, "k={k} p={p}");
            }
        }
    }

    #[test]
    fn qschur_small_cases() {
        let vars = s_ring(3);
        let s = TimeVector::symbolic(&vars, TimeFlavor::S, 3).unwrap();
        assert_eq!(qschur_poly(0, &s).unwrap(), MultiPoly::one(&vars));
        let s1 = MultiPoly::var(&vars, "s1").unwrap();
        assert_eq!(qschur_poly(1, &s).unwrap(), s1);
        // P^{(q)}_2 = s2 + s1^2/(1 + q^2)
        let s2 = MultiPoly::var(&vars, "s2").unwrap();
        let c = (&ExactScalar::one() + &ExactScalar::q_pow(2)).inv().unwrap();
        let expected = s2.add(&s1.pow(2).scale(&c));
        assert_eq!(qschur_poly(2, &s).unwrap(), expected);
    }

    #[test]
    fn qschur_difference_ladder() {
        // the nonsymmetric q-difference in s1 lowers the label by one
        let vars = s_ring(4);
        let s = TimeVector::symbolic(&vars, TimeFlavor::S, 4).unwrap();
        let ps = qschur_polys_upto(6, &s).unwrap();
        for j in 1..=6usize {
            let d = ps[j].qdiff_nonsym("s1", 0, 1).unwrap();
            assert_eq!(d, ps[j - 1], "j={j}");
        }
        // and the base-i operator in s_i lowers it by i
        for (i, j) in [(2usize, 5usize), (3, 6)] {
            let d = ps[j].qdiff_nonsym(&format!("s{i}"), 0, i as i64).unwrap();
            assert_eq!(d, ps[j - i], "i={i} j={j}");
        }
    }

    #[test]
    fn times_from_s_leading_terms() {
        let vars = s_ring(2);
        let s = TimeVector::symbolic(&vars, TimeFlavor::S, 2).unwrap();
        let t = times_from_s(&s, 2).unwrap();
        // t1 = s1
        assert_eq!(t.coeffs[0], MultiPoly::var(&vars, "s1").unwrap());
        // coefficient of s1^2 in t2 is (1-Q)^2/(2(1-Q^2)) = (1-Q)/(2(1+Q))
        let qq = ExactScalar::u_pow(4);
        let expected = (&ExactScalar::one() - &qq)
            .checked_div(&(&ExactScalar::from_int(2) * &(&ExactScalar::one() + &qq)))
            .unwrap();
        let e = {
            let mut e = vec![0i32; vars.len()];
            e[0] = 2;
            e
        };
        assert_eq!(t.coeffs[1].coeff(&e), expected);
    }

    #[test]
    fn keystone_qschur_equals_schur_of_mapped_times() {
        // P^{(q)}_k(s) = P_k(t(s)) for k <= 8
        let k_max = 8usize;
        let vars = s_ring(k_max);
        let s = TimeVector::symbolic(&vars, TimeFlavor::S, k_max).unwrap();
        let t = times_from_s(&s, k_max).unwrap();
        let qs = qschur_polys_upto(k_max, &s).unwrap();
        let cs = schur_polys_upto(k_max, &t);
        for k in 0..=k_max {
            assert_eq!(qs[k], cs[k], "keystone identity fails at k = {k}");
        }
    }

    #[test]
    fn qschur_classical_limit_is_schur() {
        // at u = 1 the q-Schur polynomials become the classical ones under
        // the identification s -> t
        let vars = s_ring(4);
        let s = TimeVector::symbolic(&vars, TimeFlavor::S, 4).unwrap();
        let qs = qschur_polys_upto(5, &s).unwrap();
        let cs = schur_polys_upto(5, &s); // same variables, classical recurrence
        for k in 0..=5usize {
            assert_eq!(qs[k].eval_u1().unwrap(), cs[k], "k={k}");
        }
    }

    #[test]
    fn miwa_truncated_sums_approach_closed_form() {
        // k = 1: finite shell sums are partial geometric sums of the closed form
        let s_val = ExactScalar::ratio(2, 3);
        for l in [0usize, 1, 4] {
            let pts = miwa_points(1, s_val.clone(), l).unwrap();
            for m in 1..=4usize {
                let truncated = pts.power_sum_time(m).unwrap();
                // closed form equals the infinite geometric sum; the truncated
                // value is the partial sum, so their difference is the tail
                // Q^{L m} * closed
                let closed = pts.power_sum_time_closed(m).unwrap();
                let qq = ExactScalar::u_pow(4);
                let tail = &qq.pow((l * m) as i64).unwrap() * &closed;
                assert_eq!(&truncated + &tail, closed, "m={m} L={l}");
            }
        }
        // L = 0 gives the empty multiset and zero times
        let pts = miwa_points(1, s_val, 0).unwrap();
        assert!(pts.is_empty());
        assert!(pts.power_sum_time(3).unwrap().is_zero());
    }

    #[test]
    fn miwa_roots_of_unity_kill_non_multiples() {
        let pts = miwa_points(3, ExactScalar::from_int(1), 2).unwrap();
        assert!(pts.power_sum_time(1).unwrap().is_zero());
        assert!(pts.power_sum_time(2).unwrap().is_zero());
        assert!(!pts.power_sum_time(3).unwrap().is_zero());
    }

    #[test]
    fn miwa_times_match_times_from_s() {
        // the closed-form induced times reproduce times_from_s when only one
        // s_k is switched on
        let k = 2usize;
        let vars = s_ring(k);
        let s = TimeVector::symbolic(&vars, TimeFlavor::S, k).unwrap();
        let t = times_from_s(&s, 6).unwrap();
        let s_val = ExactScalar::ratio(5, 7);
        let pts = miwa_points(k, s_val.clone(), 0).unwrap();
        for m in 1..=6usize {
            let closed = pts.power_sum_time_closed(m).unwrap();
            // substitute s2 = 5/7, s1 = 0 into t_m
            let tm = t.coeffs[m - 1]
                .substitute(&[
                    ("s1", Binding::Scalar(ExactScalar::zero())),
                    ("s2", Binding::Scalar(s_val.clone())),
                ])
                .unwrap();
            let c = tm.coeff(&vec![0i32; vars.len()]);
            assert_eq!(c, closed, "m={m}");
        }
    }

    #[test]
    fn half_qnum_consistency() {
        let _ = HalfInt::HALF;
    }
}
