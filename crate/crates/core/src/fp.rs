//! Polynomial arithmetic over F_p and over F_q = F_p[y]/(g), plus the
//! factorization needed for cyclotomic polynomials: all irreducible factors
//! of a squarefree polynomial whose factors share one common degree.

use crate::arith::inv_mod_u128;

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct FpPoly {
    pub p: u64,
    pub c: Vec<u64>, // little-endian, last entry nonzero (empty = zero poly)
}

impl FpPoly {
    pub fn new(p: u64, mut c: Vec<u64>) -> Self {
        for x in &mut c {
            *x %= p;
        }
        let mut f = FpPoly { p, c };
        f.normalize();
        f
    }

    pub fn zero(p: u64) -> Self {
        FpPoly { p, c: vec![] }
    }

    pub fn one(p: u64) -> Self {
        FpPoly { p, c: vec![1] }
    }

    pub fn x(p: u64) -> Self {
        FpPoly { p, c: vec![0, 1] }
    }

    fn normalize(&mut self) {
        while self.c.last() == Some(&0) {
            self.c.pop();
        }
    }

    pub fn is_zero(&self) -> bool {
        self.c.is_empty()
    }

    pub fn degree(&self) -> usize {
        assert!(!self.is_zero(), "degree of zero polynomial");
        self.c.len() - 1
    }

    pub fn lead(&self) -> u64 {
        *self.c.last().expect("lead of zero polynomial")
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut c = vec![0u64; self.c.len().max(o.c.len())];
        for (i, x) in self.c.iter().enumerate() {
            c[i] = *x;
        }
        for (i, x) in o.c.iter().enumerate() {
            c[i] = (c[i] + x) % self.p;
        }
        FpPoly::new(self.p, c)
    }

    pub fn sub(&self, o: &Self) -> Self {
        let mut c = vec![0u64; self.c.len().max(o.c.len())];
        for (i, x) in self.c.iter().enumerate() {
            c[i] = *x;
        }
        for (i, x) in o.c.iter().enumerate() {
            c[i] = (c[i] + self.p - x) % self.p;
        }
        FpPoly::new(self.p, c)
    }

    pub fn mul(&self, o: &Self) -> Self {
        if self.is_zero() || o.is_zero() {
            return Self::zero(self.p);
        }
        let mut c = vec![0u64; self.c.len() + o.c.len() - 1];
        for (i, &a) in self.c.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in o.c.iter().enumerate() {
                c[i + j] = ((c[i + j] as u128 + (a as u128) * (b as u128)) % self.p as u128) as u64;
            }
        }
        FpPoly::new(self.p, c)
    }

    pub fn scale(&self, k: u64) -> Self {
        FpPoly::new(
            self.p,
            self.c
                .iter()
                .map(|&a| ((a as u128 * k as u128) % self.p as u128) as u64)
                .collect(),
        )
    }

    pub fn rem(&self, m: &Self) -> Self {
        let mut r = self.clone();
        let dm = m.degree();
        let lead_inv = inv_mod_u128(m.lead() as u128, m.p as u128) as u64;
        while !r.is_zero() && r.degree() >= dm {
            let shift = r.degree() - dm;
            let q = ((r.lead() as u128 * lead_inv as u128) % r.p as u128) as u64;
            for (j, &mc) in m.c.iter().enumerate() {
                let t = (q as u128 * mc as u128) % r.p as u128;
                let idx = shift + j;
                r.c[idx] = ((r.c[idx] as u128 + r.p as u128 - t) % r.p as u128) as u64;
            }
            r.normalize();
        }
        r
    }

    pub fn div_exact(&self, m: &Self) -> Self {
        let (q, r) = self.div_rem(m);
        assert!(r.is_zero(), "division not exact");
        q
    }

    pub fn div_rem(&self, m: &Self) -> (Self, Self) {
        let mut r = self.clone();
        let dm = m.degree();
        let lead_inv = inv_mod_u128(m.lead() as u128, m.p as u128) as u64;
        if r.is_zero() || r.degree() < dm {
            return (Self::zero(self.p), r);
        }
        let mut q = vec![0u64; r.degree() - dm + 1];
        while !r.is_zero() && r.degree() >= dm {
            let shift = r.degree() - dm;
            let qc = ((r.lead() as u128 * lead_inv as u128) % r.p as u128) as u64;
            q[shift] = qc;
            for (j, &mc) in m.c.iter().enumerate() {
                let t = (qc as u128 * mc as u128) % r.p as u128;
                let idx = shift + j;
                r.c[idx] = ((r.c[idx] as u128 + r.p as u128 - t) % r.p as u128) as u64;
            }
            r.normalize();
        }
        (FpPoly::new(self.p, q), r)
    }

    pub fn monic(&self) -> Self {
        let inv = inv_mod_u128(self.lead() as u128, self.p as u128) as u64;
        self.scale(inv)
    }

    pub fn gcd(&self, o: &Self) -> Self {
        let (mut a, mut b) = (self.clone(), o.clone());
        while !b.is_zero() {
            let r = a.rem(&b);
            a = b;
            b = r;
        }
        if a.is_zero() {
            a
        } else {
            a.monic()
        }
    }

    pub fn derivative(&self) -> Self {
        if self.c.len() <= 1 {
            return Self::zero(self.p);
        }
        let c = self
            .c
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, &a)| ((i as u128 % self.p as u128) * a as u128 % self.p as u128) as u64)
            .collect();
        FpPoly::new(self.p, c)
    }

    /// self^e modulo m.
    pub fn pow_mod(&self, mut e: u128, m: &Self) -> Self {
        let mut acc = Self::one(self.p);
        let mut b = self.rem(m);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&b).rem(m);
            }
            b = b.mul(&b).rem(m);
            e >>= 1;
        }
        acc
    }

    /// Substitute X -> X^k.
    pub fn inflate(&self, k: usize) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let mut c = vec![0u64; self.degree() * k + 1];
        for (i, &a) in self.c.iter().enumerate() {
            c[i * k] = a;
        }
        FpPoly::new(self.p, c)
    }

    pub fn eval(&self, x: u64) -> u64 {
        let mut acc: u128 = 0;
        for &a in self.c.iter().rev() {
            acc = (acc * x as u128 + a as u128) % self.p as u128;
        }
        acc as u64
    }

    /// True if self is a p-th power, and if so its p-th root (Frobenius inverse
    /// on coefficients is identity over F_p, so just deflate the exponents).
    pub fn pth_root(&self) -> Option<Self> {
        let p = self.p as usize;
        if self.is_zero() {
            return Some(self.clone());
        }
        let mut c = Vec::with_capacity(self.c.len() / p + 1);
        for (i, &a) in self.c.iter().enumerate() {
            if i % p == 0 {
                c.push(a);
            } else if a != 0 {
                return None;
            }
        }
        Some(FpPoly::new(self.p, c))
    }

    pub fn is_squarefree(&self) -> bool {
        let d = self.derivative();
        if d.is_zero() {
            return self.degree() == 0;
        }
        let g = self.gcd(&d);
        g.degree() == 0
    }

    pub fn is_irreducible(&self) -> bool {
        // Rabin: x^(p^n) = x mod f and gcd(x^(p^(n/q)) - x, f) = 1
        let n = self.degree();
        if n == 0 {
            return false;
        }
        if n == 1 {
            return true;
        }
        let x = Self::x(self.p);
        let mut fr = x.clone();
        let mut frobs = vec![x.clone()]; // frobs[i] = x^(p^i) mod f
        for _ in 0..n {
            fr = fr.pow_mod(self.p as u128, self);
            frobs.push(fr.clone());
        }
        if frobs[n].sub(&x) != Self::zero(self.p) {
            return false;
        }
        for (q, _) in crate::arith::factorize(n as u64) {
            let h = frobs[n / q as usize].sub(&x);
            if h.is_zero() || self.gcd(&h).degree() > 0 {
                return false;
            }
        }
        true
    }
}

/// Deterministic xorshift for the equal-degree splitting.
struct Rng64(u64);

impl Rng64 {
    fn next(&mut self) -> u64 {
        let mut x = self.0;
        x ^= x << 13;
        x ^= x >> 7;
        x ^= x << 17;
        self.0 = x;
        x
    }
}

/// All monic irreducible factors of a squarefree polynomial whose irreducible
/// factors all have degree d (Cantor-Zassenhaus; deterministic seeding).
pub fn equal_degree_factor(f: &FpPoly, d: usize) -> Vec<FpPoly> {
    let mut out = Vec::new();
    let mut stack = vec![f.monic()];
    let mut rng = Rng64(0x9e3779b97f4a7c15);
    let p = f.p;
    while let Some(g) = stack.pop() {
        if g.degree() == d {
            out.push(g);
            continue;
        }
        // draw random h, split via gcd
        loop {
            let deg = g.degree() - 1;
            let mut c = vec![0u64; deg + 1];
            for x in &mut c {
                *x = rng.next() % p;
            }
            let h = FpPoly::new(p, c);
            if h.is_zero() {
                continue;
            }
            let split = if p == 2 {
                // trace map: h + h^2 + h^4 + ... + h^(2^(d-1))
                let mut tr = h.clone();
                let mut cur = h.clone();
                for _ in 1..d {
                    cur = cur.mul(&cur).rem(&g);
                    tr = tr.add(&cur);
                }
                g.gcd(&tr)
            } else {
                let e = (pow_big(p, d as u32) - 1) / 2;
                let hq = h.pow_mod(e, &g);
                g.gcd(&hq.sub(&FpPoly::one(p)))
            };
            if !split.is_zero() && split.degree() > 0 && split.degree() < g.degree() {
                let other = g.div_exact(&split).monic();
                stack.push(split.monic());
                stack.push(other);
                break;
            }
        }
    }
    out.sort_by(|a, b| a.c.iter().rev().cmp(b.c.iter().rev()));
    out
}

fn pow_big(p: u64, d: u32) -> u128 {
    (p as u128).pow(d)
}

// ---- F_q = F_p[y]/(g) and polynomials over it ----

#[derive(Clone, Debug)]
pub struct Fq {
    pub p: u64,
    pub modulus: FpPoly,
}

pub type FqElem = FpPoly; // residue of degree < deg(modulus)

impl Fq {
    pub fn new(p: u64, modulus: FpPoly) -> Self {
        Fq { p, modulus }
    }

    pub fn deg(&self) -> usize {
        self.modulus.degree()
    }

    pub fn reduce(&self, x: &FpPoly) -> FqElem {
        x.rem(&self.modulus)
    }

    pub fn mul(&self, a: &FqElem, b: &FqElem) -> FqElem {
        a.mul(b).rem(&self.modulus)
    }

    pub fn inv(&self, a: &FqElem) -> FqElem {
        // a^(q-2) with q = p^deg
        let q = (self.p as u128).pow(self.deg() as u32);
        a.pow_mod(q - 2, &self.modulus)
    }

    pub fn is_zero(&self, a: &FqElem) -> bool {
        a.is_zero()
    }
}

/// Polynomial over F_q, little-endian coefficients.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FqPoly {
    pub c: Vec<FqElem>,
}

impl FqPoly {
    pub fn new(fq: &Fq, mut c: Vec<FqElem>) -> Self {
        while c.last().map(|x| fq.is_zero(x)) == Some(true) {
            c.pop();
        }
        FqPoly { c }
    }

    pub fn is_zero(&self) -> bool {
        self.c.is_empty()
    }

    pub fn degree(&self) -> usize {
        assert!(!self.is_zero());
        self.c.len() - 1
    }

    pub fn derivative(&self, fq: &Fq) -> Self {
        if self.c.len() <= 1 {
            return FqPoly { c: vec![] };
        }
        let c = self
            .c
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, a)| a.scale(i as u64 % fq.p))
            .collect();
        FqPoly::new(fq, c)
    }

    pub fn rem(&self, fq: &Fq, m: &Self) -> Self {
        let mut r = self.clone();
        let dm = m.degree();
        let lead_inv = fq.inv(m.c.last().unwrap());
        while !r.is_zero() && r.degree() >= dm {
            let shift = r.degree() - dm;
            let q = fq.mul(r.c.last().unwrap(), &lead_inv);
            for (j, mc) in m.c.iter().enumerate() {
                let t = fq.mul(&q, mc);
                r.c[shift + j] = r.c[shift + j].sub(&t);
            }
            while r.c.last().map(|x| fq.is_zero(x)) == Some(true) {
                r.c.pop();
            }
        }
        r
    }

    pub fn gcd(&self, fq: &Fq, o: &Self) -> Self {
        let (mut a, mut b) = (self.clone(), o.clone());
        while !b.is_zero() {
            let r = a.rem(fq, &b);
            a = b;
            b = r;
        }
        a
    }

    /// Squarefree test over F_q with the characteristic-p fallback: if the
    /// derivative vanishes the polynomial is a p-th power, hence not squarefree
    /// (unless constant).
    pub fn is_squarefree(&self, fq: &Fq) -> bool {
        if self.is_zero() {
            return false;
        }
        if self.degree() == 0 {
            return true;
        }
        let d = self.derivative(fq);
        if d.is_zero() {
            return false;
        }
        let g = self.gcd(fq, &d);
        g.degree() == 0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn poly_basics() {
        let p = 5;
        let f = FpPoly::new(p, vec![4, 0, 1]); // y^2 + 4 = y^2 - 1 = (y-1)(y+1)
        assert!(!f.is_irreducible());
        let g = FpPoly::new(p, vec![2, 0, 1]); // y^2 + 2, irreducible mod 5
        assert!(g.is_irreducible());
        assert!(g.is_squarefree());
    }

    #[test]
    fn equal_degree_splitting() {
        // Phi_12 = x^4 - x^2 + 1 factors mod 5 into two quadratics
        let f = FpPoly::new(5, vec![1, 0, 4, 0, 1]);
        let fs = equal_degree_factor(&f, 2);
        assert_eq!(fs.len(), 2);
        let prod = fs[0].mul(&fs[1]);
        assert_eq!(prod, f.monic());
        assert!(fs.iter().all(|g| g.is_irreducible()));
    }

    #[test]
    fn char2_splitting() {
        // Phi_7 mod 2 = (x^3+x+1)(x^3+x^2+1)
        let f = FpPoly::new(2, vec![1, 1, 1, 1, 1, 1, 1]);
        let fs = equal_degree_factor(&f, 3);
        assert_eq!(fs.len(), 2);
        assert!(fs.iter().all(|g| g.is_irreducible()));
    }

    #[test]
    fn squarefree_char2() {
        // (1 + x^2 + x^3)^2 over F_2 = 1 + x^4 + x^6
        let fq = Fq::new(2, FpPoly::new(2, vec![1, 1])); // F_2 itself via y+1
        let one = FpPoly::one(2);
        let zero = FpPoly::zero(2);
        let sq = FqPoly::new(
            &fq,
            vec![
                one.clone(),
                zero.clone(),
                zero.clone(),
                zero.clone(),
                one.clone(),
                zero,
                one,
            ],
        );
        assert!(!sq.is_squarefree(&fq));
    }
}
