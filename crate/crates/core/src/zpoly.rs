//! Polynomials over Z/p^M: Hensel lifting of mod-p factorizations and the
//! recursive factorization of cyclotomic polynomials over Q_p.

use crate::arith::{big_inv_mod, big_pow, mult_order};
use crate::error::{Error, Result};
use crate::fp::{equal_degree_factor, FpPoly};
use num_bigint::BigUint;
use num_traits::{One, Zero};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ZpPoly {
    pub p: u64,
    pub m: u32,
    pub c: Vec<BigUint>, // little-endian mod p^m, last nonzero
}

impl ZpPoly {
    pub fn new(p: u64, m: u32, mut c: Vec<BigUint>) -> Self {
        let pm = big_pow(p, m);
        for x in &mut c {
            *x %= &pm;
        }
        while c.last().map(BigUint::is_zero) == Some(true) {
            c.pop();
        }
        ZpPoly { p, m, c }
    }

    pub fn from_fp(f: &FpPoly, m: u32) -> Self {
        ZpPoly::new(f.p, m, f.c.iter().map(|&x| BigUint::from(x)).collect())
    }

    pub fn to_fp(&self) -> FpPoly {
        FpPoly::new(
            self.p,
            self.c
                .iter()
                .map(|x| (x % self.p).try_into().unwrap())
                .collect(),
        )
    }

    pub fn is_zero(&self) -> bool {
        self.c.is_empty()
    }

    pub fn degree(&self) -> usize {
        assert!(!self.is_zero());
        self.c.len() - 1
    }

    pub fn truncate_prec(&self, m: u32) -> Self {
        ZpPoly::new(self.p, m, self.c.clone())
    }

    pub fn add(&self, o: &Self) -> Self {
        let m = self.m.min(o.m);
        let mut c = vec![BigUint::zero(); self.c.len().max(o.c.len())];
        for (i, x) in self.c.iter().enumerate() {
            c[i] = x.clone();
        }
        for (i, x) in o.c.iter().enumerate() {
            c[i] += x;
        }
        ZpPoly::new(self.p, m, c)
    }

    pub fn sub(&self, o: &Self) -> Self {
        let m = self.m.min(o.m);
        let pm = big_pow(self.p, m);
        let mut c = vec![BigUint::zero(); self.c.len().max(o.c.len())];
        for (i, x) in self.c.iter().enumerate() {
            c[i] = x % &pm;
        }
        for (i, x) in o.c.iter().enumerate() {
            c[i] = (&c[i] + &pm - (x % &pm)) % &pm;
        }
        ZpPoly::new(self.p, m, c)
    }

    pub fn mul(&self, o: &Self) -> Self {
        let m = self.m.min(o.m);
        if self.is_zero() || o.is_zero() {
            return ZpPoly::new(self.p, m, vec![]);
        }
        let mut c = vec![BigUint::zero(); self.c.len() + o.c.len() - 1];
        for (i, a) in self.c.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.c.iter().enumerate() {
                c[i + j] += a * b;
            }
        }
        ZpPoly::new(self.p, m, c)
    }

    /// Division with remainder by a polynomial with unit leading coefficient.
    pub fn div_rem(&self, d: &Self) -> (Self, Self) {
        let m = self.m.min(d.m);
        let pm = big_pow(self.p, m);
        let lead_inv = big_inv_mod(d.c.last().unwrap(), self.p, m);
        let dd = d.degree();
        let mut r: Vec<BigUint> = self.c.iter().map(|x| x % &pm).collect();
        while r.last().map(BigUint::is_zero) == Some(true) {
            r.pop();
        }
        if r.len() <= dd {
            return (ZpPoly::new(self.p, m, vec![]), ZpPoly::new(self.p, m, r));
        }
        let mut q = vec![BigUint::zero(); r.len() - dd];
        while r.len() > dd {
            let shift = r.len() - 1 - dd;
            let qc = (r.last().unwrap() * &lead_inv) % &pm;
            q[shift] = qc.clone();
            for (j, dc) in d.c.iter().enumerate() {
                let t = (&qc * dc) % &pm;
                r[shift + j] = (&r[shift + j] + &pm - t) % &pm;
            }
            while r.last().map(BigUint::is_zero) == Some(true) {
                r.pop();
            }
            if r.is_empty() {
                break;
            }
        }
        (ZpPoly::new(self.p, m, q), ZpPoly::new(self.p, m, r))
    }

    pub fn div_exact(&self, d: &Self) -> Result<Self> {
        let (q, r) = self.div_rem(d);
        if !r.is_zero() {
            return Err(Error::invalid("inexact polynomial division"));
        }
        Ok(q)
    }

    /// Substitute X -> X^k.
    pub fn inflate(&self, k: usize) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let mut c = vec![BigUint::zero(); self.degree() * k + 1];
        for (i, a) in self.c.iter().enumerate() {
            c[i * k] = a.clone();
        }
        ZpPoly::new(self.p, self.m, c)
    }
}

/// Hensel-lift a coprime mod-p factorization f = g*h to mod p^m.
/// All inputs monic; returns (g, h) monic mod p^m.
fn hensel_pair(f: &ZpPoly, g0: &FpPoly, h0: &FpPoly, m: u32) -> (ZpPoly, ZpPoly) {
    let p = f.p;
    // Bezout a*g0 + b*h0 = 1 over F_p
    let (_a0, b0) = bezout_fp(g0, h0);
    let mut g = ZpPoly::from_fp(g0, m);
    let mut h = ZpPoly::from_fp(h0, m);
    let mut k = 1u32;
    let fp_m = f.truncate_prec(m);
    while k < m {
        // e = (f - g*h)/p^k, solve dg*h + dh*g = e mod p, degrees bounded
        let e = fp_m.sub(&g.mul(&h));
        let pk = big_pow(p, k);
        let e_over: FpPoly = FpPoly::new(
            p,
            e.c.iter()
                .map(|x| ((x / &pk) % p).try_into().unwrap())
                .collect(),
        );
        if !e_over.is_zero() {
            // dg = b*e mod g0 ; dh = (e - dg*h0)/g0
            let dg = b0.mul(&e_over).rem(g0);
            let dh = e_over.sub(&dg.mul(h0)).div_exact(g0);
            let lift = |f: &mut ZpPoly, df: &FpPoly| {
                let mut c = f.c.clone();
                if c.len() < df.c.len() {
                    c.resize(df.c.len(), BigUint::zero());
                }
                for (i, &x) in df.c.iter().enumerate() {
                    c[i] += &pk * x;
                }
                *f = ZpPoly::new(p, m, c);
            };
            lift(&mut g, &dg);
            lift(&mut h, &dh);
        }
        k += 1;
    }
    (g, h)
}

/// Extended Euclid over F_p for coprime g, h: a*g + b*h = 1.
fn bezout_fp(g: &FpPoly, h: &FpPoly) -> (FpPoly, FpPoly) {
    let p = g.p;
    let (mut r0, mut r1) = (g.clone(), h.clone());
    let (mut a0, mut a1) = (FpPoly::one(p), FpPoly::zero(p));
    let (mut b0, mut b1) = (FpPoly::zero(p), FpPoly::one(p));
    while !r1.is_zero() {
        let (q, r) = r0.div_rem(&r1);
        let na = a0.sub(&q.mul(&a1));
        let nb = b0.sub(&q.mul(&b1));
        r0 = r1;
        r1 = r;
        a0 = a1;
        a1 = na;
        b0 = b1;
        b1 = nb;
    }
    assert_eq!(r0.degree(), 0, "bezout of non-coprime polynomials");
    let inv = crate::arith::inv_mod_u128(r0.c[0] as u128, p as u128) as u64;
    (a0.scale(inv), b0.scale(inv))
}

/// Lift the full list of pairwise-coprime monic mod-p factors of f to mod p^m.
pub fn hensel_lift_factors(f: &ZpPoly, factors: &[FpPoly], m: u32) -> Vec<ZpPoly> {
    if factors.len() == 1 {
        return vec![f.truncate_prec(m)];
    }
    let g0 = &factors[0];
    let mut h0 = FpPoly::one(f.p);
    for fac in &factors[1..] {
        h0 = h0.mul(fac);
    }
    let (g, h) = hensel_pair(f, g0, &h0, m);
    let mut out = vec![g];
    out.extend(hensel_lift_factors(&h, &factors[1..], m));
    out
}

/// Exact cyclotomic polynomial Phi_n over Z (as a ZpPoly mod p^m).
pub fn cyclotomic_mod(n: u64, p: u64, m: u32) -> ZpPoly {
    // Phi_n = prod_{d | n} (X^d - 1)^{mu(n/d)}; do numerator then exact division.
    // Simpler: recursively divide X^n - 1 by Phi_d for proper divisors d.
    let pm = big_pow(p, m);
    let xn_minus_1 = |k: u64| -> ZpPoly {
        let mut c = vec![BigUint::zero(); k as usize + 1];
        c[0] = &pm - BigUint::one();
        c[k as usize] = BigUint::one();
        ZpPoly::new(p, m, c)
    };
    let mut phi = xn_minus_1(n);
    for d in crate::arith::divisors(n) {
        if d == n {
            continue;
        }
        let phid = cyclotomic_mod(d, p, m);
        phi = phi.div_exact(&phid).expect("cyclotomic division is exact");
    }
    phi
}

/// Irreducible factors of Phi_n over Q_p, each monic mod p^m, sorted
/// lexicographically by coefficient sequence. For p | n the factorization is
/// built recursively: factors of Phi_{np} are F_i(X^p) when p | n, and
/// F_i(X^p)/F_i(X) when p does not divide n.
pub fn cyclotomic_factorization_qp(n: u64, p: u64, m: u32) -> Result<Vec<ZpPoly>> {
    if n == 1 {
        // X - 1
        let pm = big_pow(p, m);
        return Ok(vec![ZpPoly::new(
            p,
            m,
            vec![&pm - BigUint::one(), BigUint::one()],
        )]);
    }
    let (n0, pk) = split_p_part(n, p);
    if pk == 1 {
        let phi = cyclotomic_mod(n, p, m);
        let phi_bar = phi.to_fp();
        if !phi_bar.is_squarefree() {
            return Err(Error::HenselSeparation(m));
        }
        let d = mult_order(p, n) as usize;
        let factors = equal_degree_factor(&phi_bar, d);
        let mut lifted = hensel_lift_factors(&phi, &factors, m);
        lifted.sort_by(|a, b| a.c.iter().rev().cmp(b.c.iter().rev()));
        return Ok(lifted);
    }
    // recurse on n/p
    let prev = cyclotomic_factorization_qp(n / p, p, m)?;
    let parent_has_p = split_p_part(n / p, p).1 > 1;
    let mut out = Vec::with_capacity(prev.len());
    for f in &prev {
        let fxp = f.inflate(p as usize);
        if parent_has_p {
            out.push(fxp);
        } else {
            out.push(fxp.div_exact(f)?);
        }
    }
    let _ = n0;
    Ok(out)
}

pub fn split_p_part(n: u64, p: u64) -> (u64, u64) {
    let mut n0 = n;
    let mut pk = 1;
    while n0 % p == 0 {
        n0 /= p;
        pk *= p;
    }
    (n0, pk)
}

/// Number of irreducible factors of Phi_n over Q_p: phi(n)/(phi(p^k) ord_{n0}(p)).
pub fn cyclotomic_factor_count(n: u64, p: u64) -> u64 {
    let (n0, pk) = split_p_part(n, p);
    let d = if n0 == 1 { 1 } else { mult_order(p, n0) };
    crate::arith::euler_phi(n) / (crate::arith::euler_phi(pk) * d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::euler_phi;

    #[test]
    fn cyclotomic_exact() {
        // Phi_12 = x^4 - x^2 + 1
        let phi = cyclotomic_mod(12, 5, 4);
        let pm = big_pow(5, 4);
        assert_eq!(phi.degree(), 4);
        assert_eq!(phi.c[2], &pm - BigUint::one());
        assert_eq!(phi.c[0], BigUint::one());
    }

    #[test]
    fn factor_phi4_over_q2_irreducible() {
        // Phi_4 = x^2 + 1 irreducible over Q_2; Phi_8 = x^4 + 1 via F(x^2)
        let f4 = cyclotomic_factorization_qp(4, 2, 8).unwrap();
        assert_eq!(f4.len(), 1);
        assert_eq!(f4[0].degree(), 2);
        let f8 = cyclotomic_factorization_qp(8, 2, 8).unwrap();
        assert_eq!(f8.len(), 1);
        assert_eq!(f8[0].degree(), 4);
        assert_eq!(f8[0].c[0], BigUint::one());
    }

    #[test]
    fn factor_phi3_over_q2() {
        // ord_3(2) = 2 so Phi_3 stays irreducible
        let f = cyclotomic_factorization_qp(3, 2, 10).unwrap();
        assert_eq!(f.len(), 1);
        assert_eq!(f[0].degree(), 2);
    }

    #[test]
    fn factor_phi12_over_q5() {
        // ord_12(5) = 2: two quadratic factors, product = Phi_12 mod 5^6
        let fs = cyclotomic_factorization_qp(12, 5, 6).unwrap();
        assert_eq!(fs.len(), 2);
        assert!(fs.iter().all(|f| f.degree() == 2));
        let prod = fs[0].mul(&fs[1]);
        assert_eq!(prod, cyclotomic_mod(12, 5, 6));
    }

    #[test]
    fn factor_counts() {
        assert_eq!(cyclotomic_factor_count(3, 7), 2); // 7 = 1 mod 3
        assert_eq!(cyclotomic_factor_count(3, 2), 1);
        for (n, p) in [(5u64, 3u64), (16, 3), (15, 7), (9, 2)] {
            let fs = cyclotomic_factorization_qp(n, p, 6).unwrap();
            assert_eq!(fs.len() as u64, cyclotomic_factor_count(n, p));
            assert_eq!(
                fs.iter().map(|f| f.degree() as u64).sum::<u64>(),
                euler_phi(n)
            );
        }
    }
}
