//! Numeric finite free-fermion Fock space in a Jordan-Wigner realization,
//! used as an independent oracle for the correlator definition of tau and
//! for the operator bilinear identity.
//!
//! The mode window is `-M .. M-1` (2M modes, dimension `2^{2M}`). The
//! filled-sea convention follows the correlator picture: in the state
//! `|n>` every window mode `m >= n` is occupied and every `m < n` empty;
//! `psi_m` empties a mode, `psi*_m` fills it. Currents truncate to the
//! window, which keeps them nilpotent, so the time evolutions are exact
//! finite polynomials in the times.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};

type CMat = DMatrix<Complex64>;
type CVec = nalgebra::DVector<Complex64>;

/// Finite free-fermion Fock space over the mode window `-M .. M-1`.
pub struct FockSpace {
    pub m_window: usize,
    pub dim: usize,
}

impl FockSpace {
    /// Number of modes.
    pub fn modes(&self) -> usize {
        2 * self.m_window
    }

    /// Site index of a mode label.
    fn site(&self, mode: i64) -> Option<usize> {
        let s = mode + self.m_window as i64;
        if s < 0 || s >= self.modes() as i64 {
            None
        } else {
            Some(s as usize)
        }
    }

    /// Apply `psi_mode` (empty the mode) to a basis state; returns
    /// (sign, new mask) or None.
    fn psi_basis(&self, mode: i64, mask: usize) -> Option<(f64, usize)> {
        let s = self.site(mode)?;
        if mask & (1 << s) == 0 {
            return None;
        }
        let below = (mask & ((1 << s) - 1)).count_ones();
        let sign = if below % 2 == 0 { 1.0 } else { -1.0 };
        Some((sign, mask & !(1 << s)))
    }

    /// Apply `psi*_mode` (fill the mode).
    fn psi_star_basis(&self, mode: i64, mask: usize) -> Option<(f64, usize)> {
        let s = self.site(mode)?;
        if mask & (1 << s) != 0 {
            return None;
        }
        let below = (mask & ((1 << s) - 1)).count_ones();
        let sign = if below % 2 == 0 { 1.0 } else { -1.0 };
        Some((sign, mask | (1 << s)))
    }

    /// Dense matrix of `psi_mode`.
    pub fn psi(&self, mode: i64) -> CMat {
        let mut m = CMat::zeros(self.dim, self.dim);
        for mask in 0..self.dim {
            if let Some((sign, out)) = self.psi_basis(mode, mask) {
                m[(out, mask)] = Complex64::new(sign, 0.0);
            }
        }
        m
    }

    /// Dense matrix of `psi*_mode`.
    pub fn psi_star(&self, mode: i64) -> CMat {
        let mut m = CMat::zeros(self.dim, self.dim);
        for mask in 0..self.dim {
            if let Some((sign, out)) = self.psi_star_basis(mode, mask) {
                m[(out, mask)] = Complex64::new(sign, 0.0);
            }
        }
        m
    }

    /// Basis index of the shifted vacuum `|n>`: window modes `>= n` filled.
    pub fn vacuum_mask(&self, n: i64) -> Result<usize> {
        let mw = self.m_window as i64;
        if n < -mw || n > mw {
            return Err(Error::Index(format!("vacuum label {n} outside window")));
        }
        let mut mask = 0usize;
        for m in n..mw {
            mask |= 1 << self.site(m).unwrap();
        }
        Ok(mask)
    }

    pub fn vacuum_vec(&self, n: i64) -> Result<CVec> {
        let mut v = CVec::zeros(self.dim);
        v[self.vacuum_mask(n)?] = Complex64::new(1.0, 0.0);
        Ok(v)
    }

    /// Max residual of the canonical anticommutation relations over all
    /// mode pairs, applied to every basis state.
    pub fn car_residual(&self) -> f64 {
        let mw = self.m_window as i64;
        let mut worst: f64 = 0.0;
        let apply2 =
            |f: &dyn Fn(usize) -> Option<(f64, usize)>, g: &dyn Fn(usize) -> Option<(f64, usize)>, mask: usize| -> Vec<(f64, usize)> {
                match g(mask) {
                    None => vec![],
                    Some((s1, m1)) => match f(m1) {
                        None => vec![],
                        Some((s2, m2)) => vec![(s1 * s2, m2)],
                    },
                }
            };
        for a in -mw..mw {
            for b in -mw..mw {
                for mask in 0..self.dim {
                    // {psi_a, psi*_b} = delta_{ab}
                    let mut acc = std::collections::HashMap::new();
                    for (s, m) in apply2(&|m| self.psi_basis(a, m), &|m| self.psi_star_basis(b, m), mask) {
                        *acc.entry(m).or_insert(0.0) += s;
                    }
                    for (s, m) in apply2(&|m| self.psi_star_basis(b, m), &|m| self.psi_basis(a, m), mask) {
                        *acc.entry(m).or_insert(0.0) += s;
                    }
                    let delta = if a == b { 1.0 } else { 0.0 };
                    for (m, v) in &acc {
                        let target = if *m == mask { delta } else { 0.0 };
                        worst = worst.max((v - target).abs());
                    }
                    if !acc.contains_key(&mask) {
                        worst = worst.max(delta);
                    }
                    // {psi_a, psi_b} = 0
                    let mut acc = std::collections::HashMap::new();
                    for (s, m) in apply2(&|m| self.psi_basis(a, m), &|m| self.psi_basis(b, m), mask) {
                        *acc.entry(m).or_insert(0.0) += s;
                    }
                    for (s, m) in apply2(&|m| self.psi_basis(b, m), &|m| self.psi_basis(a, m), mask) {
                        *acc.entry(m).or_insert(0.0) += s;
                    }
                    for v in acc.values() {
                        worst = worst.max(v.abs());
                    }
                }
            }
        }
        worst
    }

    /// Truncated current `J_k = sum_i psi_i psi*_{i+k}` over the window.
    pub fn current(&self, k: i64) -> CMat {
        let mw = self.m_window as i64;
        let mut m = CMat::zeros(self.dim, self.dim);
        for i in -mw..mw {
            if self.site(i + k).is_none() {
                continue;
            }
            for mask in 0..self.dim {
                if let Some((s1, m1)) = self.psi_star_basis(i + k, mask) {
                    if let Some((s2, m2)) = self.psi_basis(i, m1) {
                        m[(m2, mask)] += Complex64::new(s1 * s2, 0.0);
                    }
                }
            }
        }
        m
    }

    /// `H(t) = sum_{k >= 1} t_k J_k` (positive current labels).
    pub fn hamiltonian_plus(&self, times: &[f64]) -> CMat {
        let mut h = CMat::zeros(self.dim, self.dim);
        for (k, t) in times.iter().enumerate() {
            if *t != 0.0 {
                h += self.current((k + 1) as i64) * Complex64::new(*t, 0.0);
            }
        }
        h
    }

    /// `Hbar(tbar) = sum_{k >= 1} tbar_k J_{-k}`.
    pub fn hamiltonian_minus(&self, times: &[f64]) -> CMat {
        let mut h = CMat::zeros(self.dim, self.dim);
        for (k, t) in times.iter().enumerate() {
            if *t != 0.0 {
                h += self.current(-((k + 1) as i64)) * Complex64::new(*t, 0.0);
            }
        }
        h
    }
}

/// Build a Fock space; `1 <= M <= 6`.
pub fn build_fock(m_window: usize) -> Result<FockSpace> {
    if !(1..=6).contains(&m_window) {
        return Err(Error::Domain(format!(
            "window half-size {m_window} outside 1..=6"
        )));
    }
    Ok(FockSpace {
        m_window,
        dim: 1usize << (2 * m_window),
    })
}

// ---------------------------------------------------------------------------
// Matrix exponentials
// ---------------------------------------------------------------------------

/// Exponential of a nilpotent matrix (exact polynomial; errors if the
/// powers do not vanish).
pub fn expm_nilpotent(h: &CMat) -> Result<CMat> {
    let n = h.nrows();
    let mut acc = CMat::identity(n, n);
    let mut term = CMat::identity(n, n);
    for k in 1..=(4 * n) {
        term = (&term * h) / Complex64::new(k as f64, 0.0);
        if term.iter().all(|c| c.norm() == 0.0) {
            return Ok(acc);
        }
        acc += &term;
    }
    Err(Error::Domain(
        "matrix is not nilpotent within the expected order".to_string(),
    ))
}

/// Scaling-and-squaring exponential with a Taylor core (adequate at these
/// dimensions and norms).
pub fn expm(a: &CMat) -> CMat {
    let n = a.nrows();
    let norm = a.iter().map(|c| c.norm()).fold(0.0f64, f64::max) * n as f64;
    let mut s = 0u32;
    let mut scale = 1.0f64;
    while norm * scale > 0.25 {
        s += 1;
        scale *= 0.5;
    }
    let b = a * Complex64::new(scale, 0.0);
    let mut acc = CMat::identity(n, n);
    let mut term = CMat::identity(n, n);
    for k in 1..=24 {
        term = (&term * &b) / Complex64::new(k as f64, 0.0);
        acc += &term;
        if term.iter().map(|c| c.norm()).fold(0.0f64, f64::max) < 1e-18 {
            break;
        }
    }
    for _ in 0..s {
        acc = &acc * &acc;
    }
    acc
}

// ---------------------------------------------------------------------------
// Group elements and tau
// ---------------------------------------------------------------------------

/// A Grassmannian group element on the window: the operator
/// `G = exp(sum_{m,n} bil[m][n] psi*_m psi_n)` together with its one-body
/// rotation matrix.
pub struct GroupData {
    pub g: CMat,
    pub g_inv: CMat,
    /// `R = exp(-bil^T)` with window-relative indices (`0 = mode -M`).
    pub r: DMatrix<Complex64>,
    pub conjugation_residual: f64,
}

/// Seeded random small bilinear on the window.
pub fn random_bilinear<R: Rng>(rng: &mut R, f: &FockSpace, scale: f64) -> DMatrix<Complex64> {
    let n = f.modes();
    DMatrix::from_fn(n, n, |_, _| {
        Complex64::new(
            scale * (rng.gen::<f64>() - 0.5),
            scale * (rng.gen::<f64>() - 0.5),
        )
    })
}

/// Exponentiate the fermion bilinear and extract the one-body rotation:
/// `G psi_k G^{-1} = sum_j psi_j R_{jk}` with `R = exp(-bil^T)`; the
/// derivation is pinned by measuring the conjugation residual.
pub fn group_exp(f: &FockSpace, bil: &DMatrix<Complex64>) -> Result<GroupData> {
    if f.m_window > 5 {
        return Err(Error::Domain(
            "dense exponentials are limited to M <= 5".to_string(),
        ));
    }
    let n = f.modes();
    let mut x = CMat::zeros(f.dim, f.dim);
    for m in 0..n {
        for nn in 0..n {
            if bil[(m, nn)].norm() == 0.0 {
                continue;
            }
            let mode_m = m as i64 - f.m_window as i64;
            let mode_n = nn as i64 - f.m_window as i64;
            for mask in 0..f.dim {
                if let Some((s1, m1)) = f.psi_basis(mode_n, mask) {
                    if let Some((s2, m2)) = f.psi_star_basis(mode_m, m1) {
                        x[(m2, mask)] += bil[(m, nn)] * s1 * s2;
                    }
                }
            }
        }
    }
    let g = expm(&x);
    let g_inv = expm(&(-&x));
    let r = expm_small(&(-bil.transpose()));
    // conjugation residual: || G psi_k G^{-1} - sum_j psi_j R_{jk} ||_max
    let mut worst: f64 = 0.0;
    for k in 0..n {
        let mode_k = k as i64 - f.m_window as i64;
        let lhs = &g * f.psi(mode_k) * &g_inv;
        let mut rhs = CMat::zeros(f.dim, f.dim);
        for j in 0..n {
            if r[(j, k)].norm() == 0.0 {
                continue;
            }
            let mode_j = j as i64 - f.m_window as i64;
            rhs += f.psi(mode_j) * r[(j, k)];
        }
        let diff = lhs - rhs;
        worst = worst.max(diff.iter().map(|c| c.norm()).fold(0.0f64, f64::max));
    }
    if worst > 1e-8 {
        return Err(Error::Domain(format!(
            "conjugation residual {worst} above tolerance"
        )));
    }
    Ok(GroupData {
        g,
        g_inv,
        r,
        conjugation_residual: worst,
    })
}

fn expm_small(a: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    expm(a)
}

/// Correlator tau: `<n| e^H G e^Hbar |n> / <n| G |n>`.
pub fn tau_fock(
    f: &FockSpace,
    n: i64,
    g: &GroupData,
    t: &[f64],
    tbar: &[f64],
) -> Result<Complex64> {
    let bra = f.vacuum_vec(n)?;
    let ket = f.vacuum_vec(n)?;
    let eh = expm_nilpotent(&f.hamiltonian_plus(t))?;
    let ehb = expm_nilpotent(&f.hamiltonian_minus(tbar))?;
    let num = (bra.transpose() * &eh * &g.g * &ehb * &ket)[(0, 0)];
    let den = (bra.transpose() * &g.g * &ket)[(0, 0)];
    if den.norm() < 1e-12 {
        return Err(Error::SingularNormalization);
    }
    Ok(num / den)
}

/// Charge-sector residual: `<n| G |m>` must vanish for `n != m`.
pub fn charge_conservation_residual(f: &FockSpace, g: &GroupData, range: i64) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for n in -range..=range {
        for m in -range..=range {
            if n == m {
                continue;
            }
            let bra = f.vacuum_vec(n)?;
            let ket = f.vacuum_vec(m)?;
            let v = (bra.transpose() * &g.g * &ket)[(0, 0)];
            worst = worst.max(v.norm());
        }
    }
    Ok(worst)
}

// ---------------------------------------------------------------------------
// Determinant cross-check
// ---------------------------------------------------------------------------

/// Classical Schur polynomial values at numeric times.
pub fn schur_values(k_max: usize, times: &[f64]) -> Vec<f64> {
    let mut p = vec![0.0; k_max + 1];
    p[0] = 1.0;
    for n in 1..=k_max {
        let mut acc = 0.0;
        for m in 1..=n.min(times.len()) {
            acc += m as f64 * times[m - 1] * p[n - m];
        }
        p[n] = acc / n as f64;
    }
    p
}

/// Windowed determinant tau from a one-body rotation matrix: the ratio
/// `det_{-M <= i,j < n} C_{ij}(t, tbar) / det C(0, 0)` with
/// `C_{ij} = sum_{k,l} R_{kl} P_{k-i}(t) P_{l-j}(tbar)` over the window.
pub fn tau_det_window(
    f: &FockSpace,
    r: &DMatrix<Complex64>,
    n: i64,
    t: &[f64],
    tbar: &[f64],
) -> Result<Complex64> {
    let mw = f.m_window as i64;
    if n < -mw || n > mw {
        return Err(Error::Index("label outside window".to_string()));
    }
    let size = (n + mw) as usize;
    if size == 0 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    let modes = f.modes();
    let pt = schur_values(modes, t);
    let ptb = schur_values(modes, tbar);
    let pt0 = schur_values(modes, &[]);
    let entry = |pt: &[f64], ptb: &[f64], i: usize, j: usize| -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for k in i..modes {
            for l in j..modes {
                acc += r[(k, l)] * pt[k - i] * ptb[l - j];
            }
        }
        acc
    };
    let num = CMat::from_fn(size, size, |i, j| entry(&pt, &ptb, i, j));
    let den = CMat::from_fn(size, size, |i, j| entry(&pt0, &pt0, i, j));
    let dn = num.determinant();
    let dd = den.determinant();
    if dd.norm() < 1e-12 {
        return Err(Error::SingularNormalization);
    }
    Ok(dn / dd)
}

// ---------------------------------------------------------------------------
// Bilinear identity and vertex relation
// ---------------------------------------------------------------------------

/// Residual of the operator bilinear identity sandwiched between dressed
/// vacua:
/// `sum_i <n+1| U psi_i G Ubar |n> <m-1| U' psi*_i G Ubar' |m>
///  = sum_i <n+1| U G psi_i Ubar |n> <m-1| U' G psi*_i Ubar' |m>`.
pub fn verify_bi_fock(
    f: &FockSpace,
    g: &GroupData,
    n: i64,
    m: i64,
    t: &[f64],
    tbar: &[f64],
    tp: &[f64],
    tbp: &[f64],
) -> Result<f64> {
    let u = expm_nilpotent(&f.hamiltonian_plus(t))?;
    let ub = expm_nilpotent(&f.hamiltonian_minus(tbar))?;
    let up = expm_nilpotent(&f.hamiltonian_plus(tp))?;
    let ubp = expm_nilpotent(&f.hamiltonian_minus(tbp))?;
    let bra1 = f.vacuum_vec(n + 1)?.transpose() * &u;
    let ket1 = &ub * f.vacuum_vec(n)?;
    let bra2 = f.vacuum_vec(m - 1)?.transpose() * &up;
    let ket2 = &ubp * f.vacuum_vec(m)?;
    let mw = f.m_window as i64;
    let mut lhs = Complex64::new(0.0, 0.0);
    let mut rhs = Complex64::new(0.0, 0.0);
    for i in -mw..mw {
        let psi = f.psi(i);
        let psi_star = f.psi_star(i);
        let a = (&bra1 * &psi * &g.g * &ket1)[(0, 0)];
        let b = (&bra2 * &psi_star * &g.g * &ket2)[(0, 0)];
        lhs += a * b;
        let a2 = (&bra1 * &g.g * &psi * &ket1)[(0, 0)];
        let b2 = (&bra2 * &g.g * &psi_star * &ket2)[(0, 0)];
        rhs += a2 * b2;
    }
    Ok((lhs - rhs).norm())
}

/// Residual of the vertex-operator relation
/// `<n| psi(z) e^{H(t)} = z^{n-1} <n-1| e^{H(t - eps(1/z))}` compared
/// componentwise on the basis; `eps(1/z)_k = z^{-k}/k` for every window
/// current label.
pub fn verify_vertex(f: &FockSpace, n: i64, t: &[f64], z: f64) -> Result<f64> {
    let modes = f.modes();
    let eh = expm_nilpotent(&f.hamiltonian_plus(t))?;
    let mw = f.m_window as i64;
    // <n| psi(z) e^H
    let bra_n = f.vacuum_vec(n)?.transpose();
    let mut lhs = nalgebra::RowDVector::<Complex64>::zeros(f.dim);
    for j in -mw..mw {
        let w = z.powi(j as i32);
        if w == 0.0 {
            continue;
        }
        lhs += (&bra_n * f.psi(j)) * Complex64::new(w, 0.0);
    }
    lhs = &lhs * &eh;
    // z^{n-1} <n-1| e^{H(t - eps)}
    let mut shifted = vec![0.0; modes - 1];
    for (k, v) in shifted.iter_mut().enumerate() {
        let kk = k + 1;
        let base = if kk <= t.len() { t[kk - 1] } else { 0.0 };
        *v = base - z.powi(-(kk as i32)) / kk as f64;
    }
    // outside the window the shifted bra is the zero covector (the whole
    // sector is annihilated)
    if n - 1 < -mw {
        return Ok(lhs.iter().map(|c| c.norm()).fold(0.0f64, f64::max));
    }
    let ehs = expm_nilpotent(&f.hamiltonian_plus(&shifted))?;
    let rhs = (f.vacuum_vec(n - 1)?.transpose() * &ehs)
        * Complex64::new(z.powi((n - 1) as i32), 0.0);
    let diff = lhs - rhs;
    Ok(diff.iter().map(|c| c.norm()).fold(0.0f64, f64::max))
}

/// Safe-window predicate: with highest used time index K and total series
/// degree D, mode transport `K * D` must stay two modes away from the
/// window boundary around the charge sector `n`.
pub fn safe_window(f: &FockSpace, n: i64, k_max: usize, degree: usize) -> bool {
    let mw = f.m_window as i64;
    let transport = (k_max * degree) as i64;
    n + transport + 2 <= mw && n - transport - 2 >= -mw
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn car_relations_exact() {
        let f = build_fock(1).unwrap();
        assert_eq!(f.dim, 4);
        assert_eq!(f.car_residual(), 0.0);
        let f = build_fock(2).unwrap();
        assert_eq!(f.car_residual(), 0.0);
        assert!(build_fock(0).is_err());
        assert!(build_fock(7).is_err());
    }

    #[test]
    fn vacua_orthonormal() {
        let f = build_fock(2).unwrap();
        for n in -2..=2i64 {
            for m in -2..=2i64 {
                let dot = (f.vacuum_vec(n).unwrap().transpose() * f.vacuum_vec(m).unwrap())[(0, 0)];
                let expected = if n == m { 1.0 } else { 0.0 };
                assert_eq!(dot, Complex64::new(expected, 0.0));
            }
        }
    }

    #[test]
    fn group_exp_conjugation() {
        let f = build_fock(3).unwrap();
        // zero bilinear: G = 1, R = 1
        let zero = DMatrix::zeros(f.modes(), f.modes());
        let g = group_exp(&f, &zero).unwrap();
        assert!(g.conjugation_residual < 1e-12);
        assert!((&g.g - CMat::identity(f.dim, f.dim))
            .iter()
            .all(|c| c.norm() < 1e-14));
        // diagonal bilinear: R = diag(exp(-g_k))
        let mut diag = DMatrix::zeros(f.modes(), f.modes());
        for k in 0..f.modes() {
            diag[(k, k)] = Complex64::new(0.1 * (k as f64 + 1.0), 0.0);
        }
        let g = group_exp(&f, &diag).unwrap();
        for k in 0..f.modes() {
            let expected = (-0.1 * (k as f64 + 1.0)).exp();
            assert!((g.r[(k, k)] - Complex64::new(expected, 0.0)).norm() < 1e-12);
        }
        // random bilinear: residual below tolerance
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let bil = random_bilinear(&mut rng, &f, 0.4);
        let g = group_exp(&f, &bil).unwrap();
        assert!(g.conjugation_residual < 1e-10, "{}", g.conjugation_residual);
    }

    #[test]
    fn tau_normalizations() {
        let f = build_fock(3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let bil = random_bilinear(&mut rng, &f, 0.3);
        let g = group_exp(&f, &bil).unwrap();
        // t = tbar = 0 -> 1
        let v = tau_fock(&f, 1, &g, &[], &[]).unwrap();
        assert!((v - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        // zero bilinear with a single-sided dressing: charge conservation
        // makes the correlator exactly 1
        let id = group_exp(&f, &DMatrix::zeros(f.modes(), f.modes())).unwrap();
        let v = tau_fock(&f, 0, &id, &[0.1, 0.05], &[]).unwrap();
        assert!((v - Complex64::new(1.0, 0.0)).norm() < 1e-12, "{v}");
        let v = tau_fock(&f, 1, &id, &[], &[0.3, 0.02]).unwrap();
        assert!((v - Complex64::new(1.0, 0.0)).norm() < 1e-12, "{v}");
        // with both time sets switched on the identity element gives the
        // free-vacuum exponential, reproduced by the window determinant
        let t = [0.11, -0.07];
        let tb = [0.06, 0.04];
        let lhs = tau_fock(&f, 0, &id, &t, &tb).unwrap();
        let rhs = tau_det_window(&f, &id.r, 0, &t, &tb).unwrap();
        assert!((lhs - rhs).norm() < 1e-12);
    }

    #[test]
    fn charge_conservation() {
        let f = build_fock(3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        let bil = random_bilinear(&mut rng, &f, 0.3);
        let g = group_exp(&f, &bil).unwrap();
        let r = charge_conservation_residual(&f, &g, 2).unwrap();
        assert!(r < 1e-12, "charge leakage {r}");
    }

    #[test]
    fn correlator_matches_window_determinant() {
        let f = build_fock(3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(44);
        for _ in 0..3 {
            let bil = random_bilinear(&mut rng, &f, 0.35);
            let g = group_exp(&f, &bil).unwrap();
            for n in [0i64, 1] {
                let t = [0.21, -0.13];
                let tb = [0.17, 0.09];
                let lhs = tau_fock(&f, n, &g, &t, &tb).unwrap();
                let rhs = tau_det_window(&f, &g.r, n, &t, &tb).unwrap();
                assert!(
                    (lhs - rhs).norm() < 1e-10,
                    "correlator vs determinant: {lhs} vs {rhs}"
                );
            }
        }
    }

    #[test]
    fn bilinear_identity_small_residual() {
        let f = build_fock(3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(45);
        // zero bilinear first: equality by inspection
        let id = group_exp(&f, &DMatrix::zeros(f.modes(), f.modes())).unwrap();
        let r = verify_bi_fock(&f, &id, 0, 0, &[0.1], &[0.2], &[0.05], &[0.07]).unwrap();
        assert!(r < 1e-12, "identity-G residual {r}");
        let bil = random_bilinear(&mut rng, &f, 0.3);
        let g = group_exp(&f, &bil).unwrap();
        let r = verify_bi_fock(&f, &g, 0, 0, &[0.1, 0.04], &[0.2], &[0.05], &[0.07, 0.03]).unwrap();
        assert!(r < 1e-10, "bilinear identity residual {r}");
    }

    #[test]
    fn vertex_relation() {
        let f = build_fock(4).unwrap();
        // t = 0, z = 1, central charge sector
        let r = verify_vertex(&f, 0, &[], 1.0).unwrap();
        assert!(r < 1e-12, "zero-time vertex residual {r}");
        // small times within the safe window
        assert!(safe_window(&f, 0, 1, 1));
        let r = verify_vertex(&f, 0, &[0.02], 1.25).unwrap();
        assert!(r < 1e-8, "vertex residual {r}");
    }

    #[test]
    fn vertex_annihilating_sector() {
        // at the bottom of the window the bra has no modes left to empty:
        // both sides vanish
        let f = build_fock(2).unwrap();
        let n = -2i64;
        let r = verify_vertex(&f, n, &[], 1.0).unwrap();
        assert!(r < 1e-13);
    }
}
