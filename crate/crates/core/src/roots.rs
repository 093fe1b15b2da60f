//! Roots of distinguished polynomials in p^w Z_p by digit-by-digit search
//! with valuation pruning and Hensel certificates, the bijection between
//! zeroes of L_p on Z_p and roots of G on p^w Z_p, and the non-integrality
//! heuristic for certified roots.

use crate::arith::{big_inv_mod, big_pow, big_val};
use crate::error::{Error, Result};
use crate::ring::{padic_log_scalar, unit_power_scalar, PadicElement, Ring};
use num_bigint::BigUint;
use num_traits::One;

#[derive(Clone, Debug)]
pub struct RootCertificate {
    /// residue of the root modulo p^{prec}
    pub residue: BigUint,
    /// certified digits of the root: M - m
    pub prec: u32,
    /// pi-valuation of D'(r)
    pub deriv_val: i64,
    /// pi-valuation of the root itself
    pub valuation: i64,
}

/// Evaluate a polynomial with ring coefficients at an integer scalar.
fn eval_poly(coeffs: &[PadicElement], r: &BigUint, ring: &Ring, prec: u32) -> PadicElement {
    let pm = big_pow(ring.p(), prec);
    let rr = r % &pm;
    let mut acc = ring.zero(prec);
    for c in coeffs.iter().rev() {
        acc = acc.mul_scalar(&rr).add(c);
    }
    acc
}

fn derivative(coeffs: &[PadicElement]) -> Vec<PadicElement> {
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, c)| c.mul_scalar(&BigUint::from(i as u64)))
        .collect()
}

/// All roots of the monic polynomial D (coefficients in O) lying in p^w Z_p,
/// by depth-first digit search: a residue r mod p^k survives only when
/// v(D(r)) >= e*k, and a branch is certified once v(D(r)) > 2 v(D'(r))
/// (then the root is unique in its disc with m = v(D'(r)) < M/2).
pub fn positive_valuation_roots(
    dpoly: &[PadicElement],
    ring: &Ring,
    w: u32,
) -> Result<Vec<RootCertificate>> {
    let p = ring.p();
    let e = ring.e() as i64;
    let dprime = derivative(dpoly);
    // available pi-precision of evaluations
    let prec_pi = dpoly.iter().map(|c| c.pi_prec).min().unwrap_or(0);
    let prec_digits = (prec_pi / e).max(1) as u32;
    let mut out = Vec::new();
    let mut stack: Vec<(BigUint, u32)> = vec![(BigUint::ZERO, w)];
    while let Some((r, k)) = stack.pop() {
        let fr = eval_poly(dpoly, &r, ring, prec_digits + 2);
        let fval = fr.valuation().unwrap_or(fr.pi_prec).min(fr.pi_prec);
        if fval < e * k as i64 {
            continue; // no root extends this residue
        }
        let dr = eval_poly(&dprime, &r, ring, prec_digits + 2);
        let m = dr.valuation().unwrap_or(dr.pi_prec);
        let m_is_certified = m < dr.pi_prec;
        if m_is_certified && fval > 2 * m {
            if fval >= fr.pi_prec {
                // D(r) is zero at the working precision: the paper's M/2 test
                let big_m = fr.pi_prec;
                if 2 * m >= big_m {
                    return Err(Error::RootEscalation {
                        m,
                        half_m: big_m / 2,
                    });
                }
            }
            let digits = ((fval - m) / e) as u32;
            let root_val = big_val(&r, p).map(|v| e * v as i64).unwrap_or(e * k as i64);
            out.push(RootCertificate {
                residue: &r % big_pow(p, digits),
                prec: digits,
                deriv_val: m,
                valuation: root_val,
            });
            continue;
        }
        if e * (k as i64 + 1) > prec_pi {
            // cannot descend further at this precision
            if fval >= fr.pi_prec {
                return Err(Error::RootEscalation {
                    m: if m_is_certified { m } else { prec_pi },
                    half_m: prec_pi / 2,
                });
            }
            continue;
        }
        let pk = big_pow(p, k);
        for digit in 0..p {
            stack.push((&r + &pk * digit, k + 1));
        }
    }
    out.sort_by(|a, b| a.residue.cmp(&b.residue));
    Ok(out)
}

/// t = u^{1-s} - 1 for s given as a residue mod p^{prec}.
pub fn zero_map_s_to_t(p: u64, u: u64, s: &BigUint, prec: u32) -> BigUint {
    let pm = big_pow(p, prec);
    // u^{1-s} = u * u^{-s}
    let um = BigUint::from(u) % &pm;
    let us = unit_power_scalar(p, u, s, true, prec);
    (um * us + &pm - BigUint::one()) % &pm
}

/// s = 1 - log(1+t)/log(u) for t in p^w Z_p; the division by log u costs w
/// digits of precision.
pub fn zero_map_t_to_s(p: u64, u: u64, t: &BigUint, prec: u32) -> Result<BigUint> {
    let w = if p == 2 { 2 } else { 1 };
    if let Some(v) = big_val(t, p) {
        if v < w {
            return Err(Error::invalid("t must lie in p^w Z_p"));
        }
    }
    let pm = big_pow(p, prec);
    let one_plus = (t + BigUint::one()) % &pm;
    let lt = padic_log_scalar(p, &one_plus, prec + w)?;
    let lu = padic_log_scalar(p, &BigUint::from(u), prec + w)?;
    let pw = big_pow(p, w);
    let ratio = (lt / &pw) * big_inv_mod(&(lu / &pw), p, prec) % &pm;
    Ok((&pm + BigUint::one() - ratio % &pm) % &pm)
}

/// Verdicts of the digit-comparison heuristic.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum IntegralityVerdict {
    /// a mod p^E differs from a mod p^{E'}: infinite expansion likely
    NonzeroNonintegerLikely { checked_to: u32 },
    /// all extra digits vanish even after escalation: could be an integer
    IntegerSuspect { checked_to: u32 },
    /// the refinement oracle gave up
    Escalated(u32),
}

/// Compare a root residue at increasing precision: refine(E) must return the
/// residue of the same root modulo p^E. The heuristic never claims a proof.
pub fn nonintegrality_heuristic<F>(mut refine: F, p: u64, e0: u32) -> IntegralityVerdict
where
    F: FnMut(u32) -> Result<BigUint>,
{
    let base = match refine(e0) {
        Ok(x) => x % big_pow(p, e0),
        Err(_) => return IntegralityVerdict::Escalated(e0),
    };
    for extra in [3u32, 6] {
        let ee = e0 + extra;
        let wide = match refine(ee) {
            Ok(x) => x % big_pow(p, ee),
            Err(_) => return IntegralityVerdict::Escalated(ee),
        };
        if wide != base {
            return IntegralityVerdict::NonzeroNonintegerLikely { checked_to: ee };
        }
    }
    IntegralityVerdict::IntegerSuspect { checked_to: e0 + 6 }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::make_ring;
    use crate::series::SeriesApprox;

    #[test]
    fn linear_root() {
        // D = T - p: one root p, m = 0
        let r = make_ring(5, 1, 1, 12).unwrap();
        let d = vec![r.from_i64(-5, 12), r.one(12)];
        let roots = positive_valuation_roots(&d, &r, 1).unwrap();
        assert_eq!(roots.len(), 1);
        assert_eq!(roots[0].deriv_val, 0);
        assert_eq!(&roots[0].residue % 25u32, BigUint::from(5u32));
    }

    #[test]
    fn two_planted_roots() {
        // D = (T - p)(T - p - p^2), distinct mod p^2
        let r = make_ring(5, 1, 1, 12).unwrap();
        let a = r.from_i64(5, 12);
        let b = r.from_i64(30, 12);
        // (T - a)(T - b) = T^2 - (a+b) T + ab
        let d = vec![a.mul(&b), a.add(&b).neg(), r.one(12)];
        let roots = positive_valuation_roots(&d, &r, 1).unwrap();
        assert_eq!(roots.len(), 2);
        let res: Vec<u32> = roots
            .iter()
            .map(|c| (&c.residue % 125u32).try_into().unwrap())
            .collect();
        assert!(res.contains(&5));
        assert!(res.contains(&30));
    }

    #[test]
    fn eisenstein_no_integral_root() {
        // T^2 - p has no roots in pZ_p (root valuation 1/2)
        let r = make_ring(5, 1, 1, 12).unwrap();
        let d = vec![r.from_i64(-5, 12), r.zero(12), r.one(12)];
        let roots = positive_valuation_roots(&d, &r, 1).unwrap();
        assert!(roots.is_empty());
    }

    #[test]
    fn zero_map_round_trip() {
        let p = 5u64;
        let u = 6u64;
        let prec = 8u32;
        // s = 1 <-> t = 0
        let t = zero_map_s_to_t(p, u, &BigUint::one(), prec);
        assert_eq!(t, BigUint::ZERO);
        // s = 0 <-> t = u - 1
        let t = zero_map_s_to_t(p, u, &BigUint::ZERO, prec);
        assert_eq!(t, BigUint::from(5u32));
        // s = -1 -> t = u^2 - 1 = 35
        let pm = big_pow(p, prec);
        let s = (&pm - BigUint::one()) % &pm;
        let t = zero_map_s_to_t(p, u, &s, prec);
        assert_eq!(t, BigUint::from(35u32));
        // roundtrip on assorted residues
        for sv in [2u64, 7, 12, 123, 3124] {
            let s = BigUint::from(sv);
            let t = zero_map_s_to_t(p, u, &s, prec + 2);
            let s2 = zero_map_t_to_s(p, u, &t, prec).unwrap();
            assert_eq!(s % big_pow(p, prec - 1), s2 % big_pow(p, prec - 1));
        }
    }

    #[test]
    fn heuristic_verdicts() {
        // planted integer root: residues agree at every precision
        let a = BigUint::from(5u32);
        let v = nonintegrality_heuristic(|e| Ok(&a % big_pow(5, e)), 5, 4);
        assert!(matches!(v, IntegralityVerdict::IntegerSuspect { .. }));
        // digits of 1/3 in Z_5: infinite expansion
        let third = |e: u32| -> Result<BigUint> { Ok(big_inv_mod(&BigUint::from(3u32), 5, e)) };
        let v = nonintegrality_heuristic(third, 5, 4);
        assert!(matches!(
            v,
            IntegralityVerdict::NonzeroNonintegerLikely { .. }
        ));
    }

    #[test]
    fn series_root_cross_check() {
        // roots of a planted series with unit cofactor: the distinguished
        // factor's roots match the series' positive-valuation zero set
        let r = make_ring(5, 1, 1, 14).unwrap();
        let lin = SeriesApprox::from_i64(&r, &[-5, 1, 0, 0, 0, 0, 0], 14);
        let unit = SeriesApprox::from_i64(&r, &[1, 2, 1, 0, 3, 0, 1], 14);
        let s = lin.mul(&unit);
        let wd = crate::weier::weierstrass_distinguished(&s, 1).unwrap();
        let roots = positive_valuation_roots(&wd.distinguished, &r, 1).unwrap();
        assert_eq!(roots.len(), 1);
        assert_eq!(&roots[0].residue % 25u32, BigUint::from(5u32));
    }
}
