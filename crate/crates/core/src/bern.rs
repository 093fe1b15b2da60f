//! The exact interpolation oracle: generalized Bernoulli numbers computed
//! over the rationals in the group ring Q[U, V]/(U^N - 1, V^{phi(q)} - 1),
//! never p-adically, then embedded into the coefficient ring through the
//! fixed realization of the two root families. This side must stay
//! independent of the level-sum construction it validates.

use crate::arith::{big_inv_mod, big_pow, gcd};
use crate::dirichlet::{CharPair, JointRel, OmegaChar, ZChar};
use crate::error::{Error, Result};
use crate::ring::{PadicElement, Ring};
use num_bigint::{BigInt, BigUint, Sign};
use num_rational::BigRational;
use num_traits::{One, Zero};
use std::collections::BTreeMap;
use std::sync::{Mutex, OnceLock};

/// Exact Bernoulli numbers B_0, B_1 = -1/2, B_2 = 1/6, ... (cached).
pub fn bernoulli_number(n: usize) -> BigRational {
    static CACHE: OnceLock<Mutex<Vec<BigRational>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(vec![BigRational::one()]));
    let mut c = cache.lock().unwrap();
    while c.len() <= n {
        let m = c.len(); // compute B_m from sum_{k<m+1} C(m+1,k) B_k = 0
        let mut acc = BigRational::zero();
        let mut binom = BigInt::one(); // C(m+1, 0)
        for (k, b) in c.iter().enumerate() {
            acc += BigRational::from(binom.clone()) * b;
            binom = binom * BigInt::from(m + 1 - k) / BigInt::from(k + 1);
        }
        // C(m+1, m) = m+1
        let bm = -acc / BigRational::from(BigInt::from(m + 1));
        c.push(bm);
    }
    c[n].clone()
}

/// B_n(x) evaluated exactly at the rational a/f.
pub fn bernoulli_poly_at(n: u32, a: u64, f: u64) -> BigRational {
    let x = BigRational::new(BigInt::from(a), BigInt::from(f));
    let mut acc = BigRational::zero();
    let mut binom = BigInt::one();
    let mut xpow = vec![BigRational::one()];
    for k in 1..=n as usize {
        xpow.push(xpow[k - 1].clone() * &x);
    }
    for k in 0..=n {
        // C(n, k) B_k x^{n-k}
        let term = BigRational::from(binom.clone())
            * bernoulli_number(k as usize)
            * &xpow[(n - k) as usize];
        acc += term;
        if k < n {
            binom = binom * BigInt::from(n - k) / BigInt::from(k + 1);
        }
    }
    acc
}

/// An element of Q[U, V]/(U^nu - 1, V^nv - 1): sparse rational combination of
/// root-of-unity monomials.
#[derive(Clone, Debug, PartialEq)]
pub struct CycRat {
    pub nu: u64,
    pub nv: u64,
    pub terms: BTreeMap<(u64, u64), BigRational>,
}

impl CycRat {
    pub fn zero(nu: u64, nv: u64) -> Self {
        CycRat {
            nu,
            nv,
            terms: BTreeMap::new(),
        }
    }

    pub fn add_term(&mut self, i: u64, j: u64, c: BigRational) {
        if c.is_zero() {
            return;
        }
        let key = (i % self.nu, j % self.nv);
        let entry = self.terms.entry(key).or_insert_with(BigRational::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&key);
        }
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        if c.is_zero() {
            return CycRat::zero(self.nu, self.nv);
        }
        CycRat {
            nu: self.nu,
            nv: self.nv,
            terms: self
                .terms
                .iter()
                .map(|(k, v)| (*k, v * c))
                .collect(),
        }
    }

    pub fn mul_monomial(&self, i: u64, j: u64, c: &BigRational) -> Self {
        let mut out = CycRat::zero(self.nu, self.nv);
        for ((a, b), v) in &self.terms {
            out.add_term(a + i, b + j, v * c);
        }
        out
    }

    pub fn sub(&self, o: &Self) -> Self {
        let mut out = self.clone();
        for ((a, b), v) in &o.terms {
            out.add_term(*a, *b, -v.clone());
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Embed into the ring: U -> zeta_N = y(1+z), V -> rho = teichmuller(g).
    /// Returns (x, shift) representing x / p^shift at precision p^prec for x.
    pub fn embed(
        &self,
        ring: &Ring,
        omega: &OmegaChar,
        prec: u32,
    ) -> Result<(PadicElement, u32)> {
        let p = ring.p();
        // common p-power in denominators
        let mut shift = 0u32;
        for v in self.terms.values() {
            let den = v.denom().magnitude();
            let vp = crate::arith::big_val(den, p).unwrap_or(0);
            shift = shift.max(vp);
        }
        let work = prec + shift;
        let pm = big_pow(p, work);
        let mut acc = ring.zero(work);
        for ((i, j), v) in &self.terms {
            // v * p^shift is p-integral
            let num = v.numer();
            let den = v.denom();
            let num_mag = num.magnitude() % &pm;
            let den_mag = den.magnitude().clone();
            let dv = crate::arith::big_val(&den_mag, p).unwrap_or(0);
            let den_unit = &den_mag / big_pow(p, dv);
            let scal = (num_mag * big_pow(p, shift - dv) % &pm) * big_inv_mod(&den_unit, p, work)
                % &pm;
            let root = ring
                .realized_root(ring.0.m0 * ring.0.pk, *i, work)
                .mul(&ring.omega_root(omega.g, *j, work));
            let mut term = root.mul_scalar(&scal);
            if num.sign() == Sign::Minus {
                term = term.neg();
            }
            acc = acc.add(&term);
        }
        Ok((acc, shift))
    }
}

/// A p-adic value represented as elem / pi^shift_pi (the element integral).
#[derive(Clone, Debug)]
pub struct ShiftedValue {
    pub elem: PadicElement,
    pub shift_pi: i64,
}

impl ShiftedValue {
    pub fn integral(elem: PadicElement) -> Self {
        ShiftedValue { elem, shift_pi: 0 }
    }

    /// pi-valuation of the value (can be negative).
    pub fn valuation(&self) -> Option<i64> {
        self.elem.valuation().map(|v| v - self.shift_pi)
    }

    /// pi-precision of the value.
    pub fn precision(&self) -> i64 {
        self.elem.pi_prec - self.shift_pi
    }
}

/// The exact-rational interpolation oracle for one character family.
pub struct Oracle {
    pub p: u64,
    pub q: u64,
    pub omega: OmegaChar,
    pub joint: JointRel,
    /// the primitive even character chi (realization order = chi.order)
    pub chi: ZChar,
}

impl Oracle {
    pub fn new(p: u64, chi: ZChar, joint: JointRel) -> Self {
        let omega = OmegaChar::new(p);
        Oracle {
            p,
            q: omega.q,
            omega,
            joint,
            chi,
        }
    }

    /// chi * omega^k as a pair.
    pub fn twist(&self, k: i64) -> CharPair {
        CharPair::new(
            self.chi.clone(),
            self.chi.order.max(1),
            k,
            self.omega.clone(),
        )
    }

    /// B_{n, eta} for eta given as a primitive character pair of conductor f,
    /// computed exactly: f^{n-1} sum_{a=1..f} eta(a) B_n(a/f).
    pub fn generalized_bernoulli(&self, n: u32, eta: &CharPair, f_eta: u64) -> CycRat {
        assert!(n >= 1);
        let nu = eta.realize_order.max(1);
        let nv = self.omega.phi_q;
        let mut acc = CycRat::zero(nu, nv);
        let fpow = BigRational::from(BigInt::from(f_eta)).pow(n as i32 - 1);
        for a in 1..=f_eta {
            if f_eta > 1 && gcd(a, f_eta) != 1 {
                continue;
            }
            if let Some((i, j)) = eta.primitive_exps_at(a % f_eta.max(1), f_eta) {
                let b = bernoulli_poly_at(n, a, f_eta) * &fpow;
                acc.add_term(i, j, b);
            }
        }
        acc
    }

    /// Exact value of L_p(chi, m) for m <= 0:
    /// -(B_{n, eta}/n) (1 - eta(p) p^{n-1}), n = 1 - m, eta = chi omega^{m-1}
    /// primitive; the Euler factor is 1 when p divides the conductor of eta.
    pub fn lp_value(&self, m: i64) -> Result<CycRat> {
        if m > 0 {
            return Err(Error::invalid("oracle only interpolates at m <= 0"));
        }
        let n = (1 - m) as u32;
        let eta = self.twist(m - 1);
        let f_eta = eta.conductor(&self.joint);
        let b = self.generalized_bernoulli(n, &eta, f_eta);
        let minus_over_n = BigRational::new(BigInt::from(-1), BigInt::from(n));
        let b = b.scale(&minus_over_n);
        if f_eta % self.p == 0 {
            return Ok(b);
        }
        // Euler factor 1 - eta(p) p^{n-1}
        let (i, j) = eta
            .primitive_exps_at(self.p % f_eta.max(1), f_eta)
            .expect("p is prime to the conductor here");
        let pn1 = BigRational::from(BigInt::from(self.p).pow(n - 1));
        Ok(b.sub(&b.mul_monomial(i, j, &pn1)))
    }

    /// The oracle value embedded into the coefficient ring.
    pub fn lp_value_embedded(&self, m: i64, ring: &Ring, prec: u32) -> Result<ShiftedValue> {
        let v = self.lp_value(m)?;
        let (elem, shift) = v.embed(ring, &self.omega, prec)?;
        Ok(ShiftedValue {
            elem,
            shift_pi: ring.e() as i64 * shift as i64,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dirichlet::unit_group;
    use crate::ring::{compute_joint_rel, make_ring};

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn bernoulli_numbers() {
        assert_eq!(bernoulli_number(0), rat(1, 1));
        assert_eq!(bernoulli_number(1), rat(-1, 2));
        assert_eq!(bernoulli_number(2), rat(1, 6));
        assert_eq!(bernoulli_number(3), rat(0, 1));
        assert_eq!(bernoulli_number(4), rat(-1, 30));
        assert_eq!(bernoulli_number(12), rat(-691, 2730));
    }

    #[test]
    fn trivial_character_values() {
        // B_{n,1} = B_n for n >= 2 and B_{1,1} = +1/2
        let p = 5;
        let ring = make_ring(p, 1, 1, 8).unwrap();
        let omega = OmegaChar::new(p);
        let joint = compute_joint_rel(&ring, &omega);
        let oracle = Oracle::new(p, ZChar::trivial(1), joint);
        let eta = oracle.twist(0);
        let b4 = oracle.generalized_bernoulli(4, &eta, 1);
        assert_eq!(b4.terms.get(&(0, 0)), Some(&rat(-1, 30)));
        let b1 = oracle.generalized_bernoulli(1, &eta, 1);
        assert_eq!(b1.terms.get(&(0, 0)), Some(&rat(1, 2)));
    }

    #[test]
    fn quadratic_character_values() {
        // odd quadratic mod 4: B_1 = -1/2 after substituting U = -1
        let g4 = unit_group(4);
        let chi4 = ZChar::from_exponents(&g4, 2, &[1]);
        let ring = make_ring(3, 2, 1, 8).unwrap();
        let omega = OmegaChar::new(3);
        let joint = compute_joint_rel(&ring, &omega);
        let oracle = Oracle::new(3, chi4, joint);
        let eta = oracle.twist(0);
        let b = oracle.generalized_bernoulli(1, &eta, 4);
        let signed = b.terms.iter().fold(rat(0, 1), |acc, ((i, _), v)| {
            if i % 2 == 0 {
                acc + v
            } else {
                acc - v
            }
        });
        assert_eq!(signed, rat(-1, 2));

        // even quadratic mod 5: B_2 = 4/5
        let g5 = unit_group(5);
        let chi5 = ZChar::from_exponents(&g5, 4, &[2]);
        assert!(chi5.is_even());
        assert_eq!(chi5.order, 2);
        let ring = make_ring(3, 10, 1, 8).unwrap();
        let omega = OmegaChar::new(3);
        let joint = compute_joint_rel(&ring, &omega);
        let oracle = Oracle::new(3, chi5, joint);
        let eta = oracle.twist(0);
        let b = oracle.generalized_bernoulli(2, &eta, 5);
        let signed = b.terms.iter().fold(rat(0, 1), |acc, ((i, _), v)| {
            if i % 2 == 0 {
                acc + v
            } else {
                acc - v
            }
        });
        assert_eq!(signed, rat(4, 5));
    }

    #[test]
    fn zeta_values_embed() {
        // p = 5, trivial chi, m = -3: eta = omega^{-4} = trivial;
        // value = -(B_4/4)(1 - 5^3) = -31/30; v_5 = 0 and = -31/30 mod 5^6
        let p = 5;
        let ring = make_ring(p, 1, 1, 10).unwrap();
        let omega = OmegaChar::new(p);
        let joint = compute_joint_rel(&ring, &omega);
        let oracle = Oracle::new(p, ZChar::trivial(1), joint);
        let v = oracle.lp_value(-3).unwrap();
        let expect = rat(-31, 30);
        assert_eq!(v.terms.get(&(0, 0)), Some(&expect));
        let emb = oracle.lp_value_embedded(-3, &ring, 6).unwrap();
        assert_eq!(emb.shift_pi, 0);
        // -31/30 mod 5^6: 30 invertible
        let pm = big_pow(5, 6);
        let inv30 = big_inv_mod(&BigUint::from(30u32), 5, 6);
        let expect_mod = (&pm - BigUint::from(31u32)) * inv30 % &pm;
        assert_eq!(emb.elem.scalar_value().unwrap() % &pm, expect_mod);
    }

    #[test]
    fn omega_square_interpolation() {
        // p = 5, chi = the even quadratic character mod 5 (= omega^2),
        // m = -1: eta = chi omega^{-2} is trivial, so the value is
        // -(B_2/2)(1 - 5) = 1/3, which is 2 mod 5.
        let p = 5;
        let g5 = unit_group(5);
        let chi = ZChar::from_exponents(&g5, 4, &[2]);
        let ring = make_ring(p, 2, 1, 10).unwrap();
        let omega = OmegaChar::new(p);
        let joint = compute_joint_rel(&ring, &omega);
        let oracle = Oracle::new(p, chi, joint);
        let v = oracle.lp_value(-1).unwrap();
        // all monomials must collapse to the single rational 1/3
        let emb = oracle.lp_value_embedded(-1, &ring, 4).unwrap();
        assert_eq!(emb.shift_pi, 0);
        let pm = big_pow(5, 4);
        let third = big_inv_mod(&BigUint::from(3u32), 5, 4);
        assert_eq!(emb.elem.c[0].clone() % &pm, third);
        let _ = v;
    }
}
