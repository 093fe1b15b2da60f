//! Fixed-precision arithmetic in Z_p and in the two-stage coefficient tower
//! O = Z_p[y]/(g(y)) [z]/(E(z)), with g an irreducible-mod-p lift of a factor
//! of Phi_m0 and E(z) = Phi_{p^k}(1+z) Eisenstein. The unramified variable y
//! is a primitive m0-th root of unity, 1+z a primitive p^k-th root, pi = z
//! (or p when e = 1), and the residue field kappa has p^d elements.
//!
//! Valuations are measured in pi-units: an i64 value v stands for v/e as a
//! power of p. Elements carry a certified pi-adic precision alongside the
//! p-power modulus their coefficients are stored at.

use crate::arith::{big_inv_mod, big_pow, big_val, euler_phi, gcd, is_prime, mult_order};
use crate::error::{Error, Result};
use crate::fp::{equal_degree_factor, Fq, FqElem, FpPoly};
use crate::zpoly::{cyclotomic_mod, hensel_lift_factors, ZpPoly};
use num_bigint::BigUint;
use num_traits::{One, Zero};
use std::fmt;
use std::sync::Arc;

/// Valuation in pi-units (v_p = Val/e). `None` from `valuation()` means
/// "indistinguishable from zero at the certified precision".
pub type Val = i64;

#[derive(Debug)]
pub struct RingData {
    pub p: u64,
    pub q: u64,
    pub m0: u64,
    pub pk: u64,
    pub e: u32,
    pub d: u32,
    pub prec: u32,
    /// monic degree-d lift of the lexicographically smallest irreducible
    /// factor of Phi_m0 mod p, coefficients mod p^prec
    pub g: Vec<BigUint>,
    /// E(z) = Phi_{pk}(1+z), exact integer coefficients, degree e, monic
    pub eis: Vec<BigUint>,
    pub g_bar: FpPoly,
}

#[derive(Clone)]
pub struct Ring(pub Arc<RingData>);

impl fmt::Debug for Ring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "Ring(p={}, m0={}, pk={}, e={}, d={}, prec={})",
            self.0.p, self.0.m0, self.0.pk, self.0.e, self.0.d, self.0.prec
        )
    }
}

/// Data attached to the cyclotomic Z_p-extension of Q: the chosen topological
/// generator acts on p-power roots of unity as the power u = 1 + q.
#[derive(Clone, Debug)]
pub struct CyclotomicData {
    pub p: u64,
    pub u: u64,
    pub w: u32,
    pub r: u32,
}

impl CyclotomicData {
    pub fn new(p: u64) -> Self {
        let q = if p == 2 { 4 } else { p };
        let w = if p == 2 { 2 } else { 1 };
        CyclotomicData {
            p,
            u: 1 + q,
            w,
            r: w,
        }
    }

    /// |z|_p < p^r p^{-1/(p-1)} described as the pair (r, p).
    pub fn domain_radius(&self) -> (u32, u64) {
        (self.r, self.p)
    }
}

pub fn make_ring(p: u64, m0: u64, pk: u64, prec: u32) -> Result<Ring> {
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    if gcd(m0, p) != 1 {
        return Err(Error::NotCoprime(m0, p));
    }
    if pk != 1 {
        let mut t = pk;
        while t % p == 0 {
            t /= p;
        }
        if t != 1 {
            return Err(Error::invalid(format!("{pk} is not a power of {p}")));
        }
    }
    let e = if pk == 1 { 1 } else { euler_phi(pk) as u32 };
    let d = if m0 == 1 { 1 } else { mult_order(p, m0) as u32 };

    // unramified defining polynomial
    let (g, g_bar) = if m0 == 1 {
        (
            vec![BigUint::zero(), BigUint::one()],
            FpPoly::new(p, vec![0, 1]),
        )
    } else {
        let phi = cyclotomic_mod(m0, p, prec);
        let phi_bar = phi.to_fp();
        if !phi_bar.is_squarefree() {
            return Err(Error::invalid("Phi_m0 not squarefree mod p"));
        }
        let factors = equal_degree_factor(&phi_bar, d as usize);
        let lifted = hensel_lift_factors(&phi, &factors, prec);
        // factors are sorted lex by equal_degree_factor; keep the lift of the first
        let mut pairs: Vec<(FpPoly, ZpPoly)> = factors.into_iter().zip(lifted).collect();
        pairs.sort_by(|a, b| a.0.c.iter().rev().cmp(b.0.c.iter().rev()));
        let (gb, gz) = pairs.swap_remove(0);
        (gz.c, gb)
    };

    // E(z) = Phi_{pk}(1 + z); for pk = 1 use z itself (unused)
    let eis = if pk == 1 {
        vec![BigUint::zero(), BigUint::one()]
    } else {
        eisenstein_poly(p, pk)
    };
    debug_assert_eq!(eis.len() as u32 - 1, e);
    debug_assert!(pk == 1 || eis[0] == BigUint::from(p));

    Ok(Ring(Arc::new(RingData {
        p,
        q: if p == 2 { 4 } else { p },
        m0,
        pk,
        e,
        d,
        prec,
        g,
        eis,
        g_bar,
    })))
}

/// Phi_{p^k}(1+z) = sum_{i<p} (1+z)^{i p^{k-1}}, exact integer coefficients.
fn eisenstein_poly(p: u64, pk: u64) -> Vec<BigUint> {
    let e = euler_phi(pk) as usize;
    let step = (pk / p) as usize;
    let mut out = vec![BigUint::zero(); e + 1];
    for i in 0..p as usize {
        // (1+z)^(i*step)
        let n = i * step;
        let mut binom = BigUint::one();
        for j in 0..=n.min(e) {
            out[j] += &binom;
            binom = binom * BigUint::from(n - j) / BigUint::from(j + 1);
        }
    }
    out
}

impl Ring {
    pub fn p(&self) -> u64 {
        self.0.p
    }

    pub fn e(&self) -> u32 {
        self.0.e
    }

    pub fn d(&self) -> u32 {
        self.0.d
    }

    pub fn dim(&self) -> usize {
        (self.0.d * self.0.e) as usize
    }

    pub fn prec(&self) -> u32 {
        self.0.prec
    }

    pub fn residue_field(&self) -> Fq {
        Fq::new(self.0.p, self.0.g_bar.clone())
    }

    pub fn zero(&self, prec: u32) -> PadicElement {
        PadicElement {
            ring: self.clone(),
            m: prec.min(self.0.prec),
            pi_prec: (prec.min(self.0.prec) as i64) * self.0.e as i64,
            c: vec![BigUint::zero(); self.dim()],
        }
    }

    pub fn one(&self, prec: u32) -> PadicElement {
        self.from_biguint(BigUint::one(), prec)
    }

    pub fn from_biguint(&self, x: BigUint, prec: u32) -> PadicElement {
        let mut z = self.zero(prec);
        z.c[0] = x % big_pow(self.0.p, z.m);
        z
    }

    pub fn from_i64(&self, x: i64, prec: u32) -> PadicElement {
        let m = prec.min(self.0.prec);
        let pm = big_pow(self.0.p, m);
        let v = if x < 0 {
            &pm - (BigUint::from(x.unsigned_abs()) % &pm)
        } else {
            BigUint::from(x as u64) % &pm
        };
        self.from_biguint(v % &pm, prec)
    }

    /// y^i (1+z)^j as a ring element.
    pub fn root_of_unity(&self, i: u64, j: u64, prec: u32) -> PadicElement {
        let mut acc = self.zeta_unram(prec).pow(i % self.0.m0.max(1));
        if self.0.pk > 1 {
            acc = acc.mul(&self.zeta_ram(prec).pow(j % self.0.pk));
        }
        acc
    }

    /// The unramified root of unity y (order m0).
    pub fn zeta_unram(&self, prec: u32) -> PadicElement {
        if self.0.m0 == 1 {
            return self.one(prec);
        }
        let mut z = self.zero(prec);
        if self.0.d == 1 {
            // y is a scalar: root of the linear g(y) = y + g0
            let m = z.m;
            let pm = big_pow(self.0.p, m);
            let r = (&pm - (&self.0.g[0] % &pm)) % &pm;
            z.c[0] = r;
        } else {
            z.c[1] = BigUint::one();
        }
        z
    }

    /// The ramified root of unity 1 + z (order pk).
    pub fn zeta_ram(&self, prec: u32) -> PadicElement {
        let mut z = self.one(prec);
        if self.0.e > 1 {
            z.c[self.0.d as usize] = BigUint::one();
        }
        z
    }

    /// zeta_N^i for the canonical N-th root zeta_N = y (1+z), N = m0 * pk.
    pub fn realized_root(&self, n_total: u64, i: u64, prec: u32) -> PadicElement {
        debug_assert_eq!(n_total, self.0.m0 * self.0.pk);
        self.root_of_unity(i % self.0.m0.max(1), i % self.0.pk.max(1), prec)
    }

    /// rho^j where rho = teichmuller(g) realizes the abstract zeta_{phi(q)}.
    pub fn omega_root(&self, omega_g: u64, j: u64, prec: u32) -> PadicElement {
        let q = self.0.q;
        let gj = crate::arith::pow_mod(omega_g, j, q);
        let t = teichmuller_scalar(self.0.p, gj, prec).expect("omega generator is a unit");
        self.from_biguint(t, prec)
    }
}

/// Determine the relation joining the unramified root y (order m0) with
/// rho = teichmuller(g): y^{m0/g} = rho^{c phi(q)/g} on the intersection
/// mu_{gcd}. Roots of unity of order prime to p are separated mod p, so a
/// low-precision comparison suffices.
pub fn compute_joint_rel(ring: &Ring, omega: &crate::dirichlet::OmegaChar) -> crate::dirichlet::JointRel {
    let m0 = ring.0.m0;
    let pk = ring.0.pk;
    let rho_ord = omega.phi_q;
    let g = crate::arith::gcd(m0, rho_ord);
    let mut c = 0u64;
    if g > 1 {
        let prec = 2u32;
        let target = ring.zeta_unram(prec).pow(m0 / g);
        let mut found = None;
        for cand in 0..g {
            let val = ring.omega_root(omega.g, cand * (rho_ord / g), prec);
            if target.sub(&val).valuation().is_none() {
                found = Some(cand);
                break;
            }
        }
        c = found.expect("joint root-of-unity relation must exist");
    }
    crate::dirichlet::JointRel {
        m0,
        pk,
        rho_ord,
        g,
        c,
    }
}

#[derive(Clone)]
pub struct PadicElement {
    pub ring: Ring,
    /// coefficients stored mod p^m
    pub m: u32,
    /// certified precision in pi-units (<= e*m)
    pub pi_prec: i64,
    /// length d*e, index i + d*j for y^i z^j
    pub c: Vec<BigUint>,
}

impl fmt::Debug for PadicElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "O(p^{}/e):[", self.pi_prec)?;
        for (k, x) in self.c.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, "]")
    }
}

impl PadicElement {
    fn d(&self) -> usize {
        self.ring.0.d as usize
    }

    fn e(&self) -> usize {
        self.ring.0.e as usize
    }

    pub fn p(&self) -> u64 {
        self.ring.0.p
    }

    fn pm(&self) -> BigUint {
        big_pow(self.p(), self.m)
    }

    pub fn is_scalar(&self) -> bool {
        self.c.iter().skip(1).all(BigUint::is_zero)
    }

    pub fn scalar_value(&self) -> Option<&BigUint> {
        if self.is_scalar() {
            Some(&self.c[0])
        } else {
            None
        }
    }

    /// Reduce the stored modulus / certified precision.
    pub fn with_prec(&self, m: u32, pi_prec: i64) -> Self {
        let m = m.min(self.m);
        let pm = big_pow(self.p(), m);
        PadicElement {
            ring: self.ring.clone(),
            m,
            pi_prec: pi_prec.min(self.pi_prec).min(m as i64 * self.e() as i64),
            c: self.c.iter().map(|x| x % &pm).collect(),
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        self.zip(o, |a, b, pm| (a + b) % pm)
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.zip(o, |a, b, pm| (a + pm - (b % pm)) % pm)
    }

    fn zip(&self, o: &Self, f: impl Fn(&BigUint, &BigUint, &BigUint) -> BigUint) -> Self {
        let m = self.m.min(o.m);
        let pi_prec = self.pi_prec.min(o.pi_prec);
        let pm = big_pow(self.p(), m);
        let c = self
            .c
            .iter()
            .zip(&o.c)
            .map(|(a, b)| f(&(a % &pm), b, &pm))
            .collect();
        PadicElement {
            ring: self.ring.clone(),
            m,
            pi_prec,
            c,
        }
    }

    pub fn neg(&self) -> Self {
        let pm = self.pm();
        let c = self
            .c
            .iter()
            .map(|a| if a.is_zero() { a.clone() } else { &pm - a })
            .collect();
        PadicElement {
            ring: self.ring.clone(),
            m: self.m,
            pi_prec: self.pi_prec,
            c,
        }
    }

    pub fn mul(&self, o: &Self) -> Self {
        let m = self.m.min(o.m);
        // precision可 gain from factors of positive valuation
        let v1 = self.valuation_floor();
        let v2 = o.valuation_floor();
        let e = self.e() as i64;
        let pi_prec = (self.pi_prec + v2.min(e * m as i64))
            .min(o.pi_prec + v1.min(e * m as i64))
            .min(e * m as i64);
        let pm = big_pow(self.p(), m);
        let (d, e_us) = (self.d(), self.e());

        // z-convolution of y-products
        let mut zc: Vec<Vec<BigUint>> = vec![vec![BigUint::zero(); 2 * d - 1]; 2 * e_us - 1];
        for j1 in 0..e_us {
            for j2 in 0..e_us {
                let tgt = &mut zc[j1 + j2];
                for i1 in 0..d {
                    let a = &self.c[i1 + d * j1];
                    if a.is_zero() {
                        continue;
                    }
                    for i2 in 0..d {
                        let b = &o.c[i2 + d * j2];
                        if !b.is_zero() {
                            tgt[i1 + i2] += a * b;
                        }
                    }
                }
            }
        }
        // reduce y via g, z via E
        let mut out = PadicElement {
            ring: self.ring.clone(),
            m,
            pi_prec,
            c: vec![BigUint::zero(); d * e_us],
        };
        let g = &self.ring.0.g;
        let eis = &self.ring.0.eis;
        // y-reduction per z-slot
        let reduce_y = |slot: &mut Vec<BigUint>| {
            for i in (d..slot.len()).rev() {
                let top = std::mem::replace(&mut slot[i], BigUint::zero());
                if top.is_zero() {
                    continue;
                }
                for k in 0..d {
                    // y^i = y^(i-d) * y^d, y^d = -sum g_k y^k
                    let t = (&top * (&g[k] % &pm)) % &pm;
                    let idx = i - d + k;
                    slot[idx] = (&slot[idx] + (&pm - t)) % &pm;
                }
            }
            for x in slot.iter_mut().take(d) {
                *x %= &pm;
            }
        };
        for slot in zc.iter_mut() {
            reduce_y(slot);
        }
        // z-reduction: z^j for j >= e folds down via z^e = -(E - z^e)
        for j in (e_us..zc.len()).rev() {
            let slot = std::mem::take(&mut zc[j]);
            for (k, ek) in eis.iter().enumerate().take(e_us) {
                let ekm = ek % &pm;
                if ekm.is_zero() {
                    continue;
                }
                for (i, x) in slot.iter().enumerate().take(d) {
                    if x.is_zero() {
                        continue;
                    }
                    let t = (x * &ekm) % &pm;
                    let dst = &mut zc[j - e_us + k][i];
                    *dst = (&*dst + (&pm - t)) % &pm;
                }
            }
        }
        for j in 0..e_us {
            for i in 0..d {
                out.c[i + d * j] = std::mem::take(&mut zc[j][i]) % &pm;
            }
        }
        out
    }

    pub fn pow(&self, mut k: u64) -> Self {
        let mut acc = self.ring.one(self.m);
        acc.pi_prec = self.pi_prec;
        let mut b = self.clone();
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul(&b);
            }
            b = b.mul(&b);
            k >>= 1;
        }
        acc
    }

    pub fn mul_scalar(&self, k: &BigUint) -> Self {
        let pm = self.pm();
        let kk = k % &pm;
        let extra = big_val(&kk, self.p()).unwrap_or(self.m) as i64 * self.e() as i64;
        PadicElement {
            ring: self.ring.clone(),
            m: self.m,
            pi_prec: (self.pi_prec + extra).min(self.m as i64 * self.e() as i64),
            c: self.c.iter().map(|x| (x * &kk) % &pm).collect(),
        }
    }

    /// Exact pi-adic valuation: min over z-slots of e * v_p(y-slot) + j.
    /// None when every coefficient vanishes at the stored modulus.
    pub fn valuation(&self) -> Option<Val> {
        let (d, e) = (self.d(), self.e());
        let mut best: Option<i64> = None;
        for j in 0..e {
            let mut vy: Option<u32> = None;
            for i in 0..d {
                if let Some(v) = big_val(&self.c[i + d * j], self.p()) {
                    vy = Some(vy.map_or(v, |w| w.min(v)));
                    if v == 0 {
                        break;
                    }
                }
            }
            if let Some(v) = vy {
                let cand = (v as i64) * e as i64 + j as i64;
                best = Some(best.map_or(cand, |b| b.min(cand)));
            }
        }
        best
    }

    /// Lower bound on the valuation usable as an error floor: valuation if a
    /// nonzero digit is visible, otherwise the certified precision.
    fn valuation_floor(&self) -> i64 {
        self.valuation().unwrap_or(self.pi_prec).min(self.pi_prec)
    }

    /// Valuation certified against the element's precision.
    pub fn certified_valuation(&self) -> Result<Val> {
        match self.valuation() {
            Some(v) if v < self.pi_prec => Ok(v),
            _ => Err(Error::Undetermined),
        }
    }

    pub fn is_zero_at_prec(&self) -> bool {
        self.valuation().map_or(true, |v| v >= self.pi_prec)
    }

    /// True unit test: valuation 0 visible within precision.
    pub fn is_unit(&self) -> bool {
        self.pi_prec > 0 && self.valuation() == Some(0)
    }

    /// Reduce a valuation-zero element into kappa = F_p[y]/(g).
    pub fn residue(&self) -> FqElem {
        let d = self.d();
        let coeffs: Vec<u64> = (0..d)
            .map(|i| (&self.c[i] % self.p()).try_into().unwrap())
            .collect();
        FpPoly::new(self.p(), coeffs)
    }

    /// Divide by p (all slots must be divisible by p).
    pub fn div_p(&self) -> Result<Self> {
        let p = BigUint::from(self.p());
        let mut c = Vec::with_capacity(self.c.len());
        for x in &self.c {
            if (x % &p).is_zero() {
                c.push(x / &p);
            } else {
                return Err(Error::invalid("element not divisible by p"));
            }
        }
        Ok(PadicElement {
            ring: self.ring.clone(),
            m: self.m - 1,
            pi_prec: self.pi_prec - self.e() as i64,
            c,
        })
    }

    /// Divide by the uniformizer z (only for e > 1). Constant z-slot must be
    /// divisible by p; uses p = -z * B(z) from the Eisenstein relation.
    pub fn div_z(&self) -> Result<Self> {
        let (d, e) = (self.d(), self.e());
        assert!(e > 1, "div_z needs a ramified tower");
        let pm = self.pm();
        let p = BigUint::from(self.p());
        // x = x0(y) + z * rest(y,z); x/z = rest + x0/z, x0/z = -(x0/p) B(z)
        let mut c = vec![BigUint::zero(); d * e];
        for j in 1..e {
            for i in 0..d {
                c[i + d * (j - 1)] = self.c[i + d * j].clone();
            }
        }
        // B(z) = (E(z) - E(0))/z has coefficients eis[1..=e]
        for i in 0..d {
            let x0 = &self.c[i];
            if !(x0 % &p).is_zero() {
                return Err(Error::invalid("element not divisible by z"));
            }
            let t = x0 / &p;
            for j in 0..e {
                let ej = &self.ring.0.eis[j + 1] % &pm;
                if ej.is_zero() {
                    continue;
                }
                let sub = (&t * ej) % &pm;
                let dst = &mut c[i + d * j];
                *dst = (&*dst + (&pm - sub)) % &pm;
            }
        }
        Ok(PadicElement {
            ring: self.ring.clone(),
            m: self.m,
            pi_prec: self.pi_prec - 1,
            c,
        })
    }

    /// Divide by pi^k (pi = z when e > 1, else p).
    pub fn div_uniformizer(&self, k: u32) -> Result<Self> {
        let mut x = self.clone();
        if self.e() == 1 {
            for _ in 0..k {
                x = x.div_p()?;
            }
        } else {
            for _ in 0..k {
                x = x.div_z()?;
            }
        }
        Ok(x)
    }

    /// Multiplicative inverse of a unit, by Newton iteration from the residue
    /// field inverse.
    pub fn inverse(&self) -> Result<Self> {
        if !self.is_unit() {
            return Err(Error::NotUnit);
        }
        let fq = self.ring.residue_field();
        let r0 = self.residue();
        if r0.is_zero() {
            return Err(Error::NotUnit);
        }
        let inv0 = fq.inv(&r0);
        let mut u = self.ring.zero(self.m);
        for (i, &x) in inv0.c.iter().enumerate() {
            u.c[i] = BigUint::from(x);
        }
        u.pi_prec = self.pi_prec;
        // u <- u(2 - x u), doubling pi-adic accuracy each round
        let two = self.ring.from_i64(2, self.m);
        let total = (self.m as i64) * self.e() as i64;
        let mut have: i64 = 1;
        while have < total {
            let t = two.sub(&self.mul(&u));
            u = u.mul(&t);
            have *= 2;
        }
        u.pi_prec = self.pi_prec;
        Ok(u)
    }

    pub fn div(&self, o: &Self) -> Result<Self> {
        Ok(self.mul(&o.inverse()?))
    }

    /// Strip pi^v, returning (unit part, v).
    pub fn unit_part(&self) -> Result<(Self, Val)> {
        let v = self.certified_valuation()?;
        if self.e() == 1 {
            let unit = self.div_uniformizer(v as u32)?;
            return Ok((unit, v));
        }
        // pull out p-powers first, then z-powers
        let vp = v / self.e() as i64;
        let vz = v % self.e() as i64;
        let mut x = self.clone();
        for _ in 0..vp {
            x = x.div_p()?;
        }
        for _ in 0..vz {
            x = x.div_z()?;
        }
        Ok((x, v))
    }
}

// ---- scalar Z_p operations ----

/// Teichmuller lift of a unit a to precision p^m: the phi(q)-th root of unity
/// congruent to a mod q.
pub fn teichmuller_scalar(p: u64, a: u64, m: u32) -> Result<BigUint> {
    if gcd(a % p.max(2), p) != 1 || a % p == 0 {
        return Err(Error::NotUnit);
    }
    let pm = big_pow(p, m);
    if p == 2 {
        return Ok(if a % 4 == 1 {
            BigUint::one()
        } else {
            &pm - BigUint::one()
        });
    }
    let mut x = BigUint::from(a) % &pm;
    for _ in 0..=m {
        x = x.modpow(&BigUint::from(p), &pm);
    }
    Ok(x)
}

/// <a> = a * omega(a)^{-1} in 1 + qZ_p, to precision p^m.
pub fn angle_scalar(p: u64, a: u64, m: u32) -> Result<BigUint> {
    let pm = big_pow(p, m);
    let om = teichmuller_scalar(p, a, m)?;
    let om_inv = big_inv_mod(&om, p, m);
    Ok((BigUint::from(a) * om_inv) % &pm)
}

/// log_p of a scalar x with v_p(x - 1) > 1/(p-1), result mod p^m.
pub fn padic_log_scalar(p: u64, x: &BigUint, m: u32) -> Result<BigUint> {
    let pm = big_pow(p, m);
    let x = x % &pm;
    if x.is_one() {
        return Ok(BigUint::zero());
    }
    let t_plus = (&x + &pm - BigUint::one()) % &pm; // x - 1
    let w = big_val(&t_plus, p).unwrap_or(m);
    if w == 0 || (p == 2 && w < 2) {
        return Err(Error::LogDiverges(format!("v(x-1) = {w}")));
    }
    // truncation K: K*w - log_p(K) >= m; work at extended precision
    let mut k_max = 1u32;
    while (k_max as i64) * (w as i64) - ilog_p(p, k_max) < m as i64 {
        k_max += 1;
    }
    let extra = ilog_p(p, k_max) as u32 + 1;
    let mw = m + extra;
    let pmw = big_pow(p, mw);
    let t = (&x + &pmw - BigUint::one()) % &pmw;
    let mut term = BigUint::one();
    let mut acc_pos = BigUint::zero();
    let mut acc_neg = BigUint::zero();
    for k in 1..=k_max {
        term = (&term * &t) % &pmw;
        // term / k: strip p-part of k then invert the unit part
        let kv = crate::arith::val_u128(k as u128, p).unwrap_or(0);
        let kp = big_pow(p, kv);
        let num = &term / &kp;
        let kunit = BigUint::from(k) / &kp;
        let contrib = (num * big_inv_mod(&kunit, p, mw)) % &pmw;
        if k % 2 == 1 {
            acc_pos = (acc_pos + contrib) % &pmw;
        } else {
            acc_neg = (acc_neg + contrib) % &pmw;
        }
    }
    let res = (acc_pos + &pmw - acc_neg) % &pmw;
    Ok(res % &pm)
}

fn ilog_p(p: u64, k: u32) -> i64 {
    let mut v = 0i64;
    let mut t = 1u64;
    while t <= k as u64 {
        t = t.saturating_mul(p);
        v += 1;
    }
    v
}

/// u^x mod p^m for x given as a p-adic integer residue (mod p^{m'}), using the
/// binomial series for u = 1 + q: truncation is exact at precision m once
/// k*w - v(k!) exceeds m.
pub fn unit_power_scalar(p: u64, u_base: u64, x: &BigUint, neg: bool, m: u32) -> BigUint {
    let q = if p == 2 { 4u64 } else { p };
    debug_assert_eq!(u_base, 1 + q);
    let w = if p == 2 { 2u32 } else { 1 };
    let mut k_max = 1u32;
    while (k_max as i64) * (w as i64) - v_factorial(p, k_max) < m as i64 {
        k_max += 1;
    }
    let extra = v_factorial(p, k_max).max(0) as u32 + 1;
    let mw = m + extra;
    let pmw = big_pow(p, mw);
    // C(x, k) q^k summed; x may be negated
    let xx = x % &pmw;
    let mut acc = BigUint::one();
    let mut numer = BigUint::one(); // prod (x - i) or (-x - i), tracked mod p^mw
    let mut qpow = BigUint::one();
    for k in 1..=k_max {
        // factor (x - (k-1)), with sign handling via mod arithmetic
        let i = BigUint::from(k - 1) % &pmw;
        let factor = if neg {
            // (-x - (k-1)) mod p^mw
            (&pmw - ((&xx + i) % &pmw)) % &pmw
        } else {
            (&xx + &pmw - i) % &pmw
        };
        numer = (numer * factor) % &pmw;
        qpow = (&qpow * q) % &pmw;
        // term = numer/k! * q^k
        let kfv = v_factorial(p, k).max(0) as u32;
        let kf = factorial_unit_part(p, k, mw);
        let pkf = big_pow(p, kfv);
        let t = (&numer * &qpow) % &pmw;
        debug_assert!((&t % &pkf).is_zero());
        let t = (&t / &pkf) * big_inv_mod(&kf, p, mw) % &pmw;
        acc = (acc + t) % &pmw;
    }
    acc % big_pow(p, m)
}

fn v_factorial(p: u64, k: u32) -> i64 {
    let mut v = 0i64;
    let mut pk = p;
    while pk <= k as u64 {
        v += (k as u64 / pk) as i64;
        match pk.checked_mul(p) {
            Some(n) => pk = n,
            None => break,
        }
    }
    v
}

fn factorial_unit_part(p: u64, k: u32, m: u32) -> BigUint {
    let pm = big_pow(p, m);
    let mut acc = BigUint::one();
    for i in 1..=k as u64 {
        let mut i = i;
        while i % p == 0 {
            i /= p;
        }
        acc = (acc * i) % &pm;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn make_ring_examples() {
        let r = make_ring(2, 1, 1, 10).unwrap();
        assert_eq!((r.e(), r.d()), (1, 1));
        let r = make_ring(2, 7, 1, 10).unwrap();
        assert_eq!(r.d(), 3); // ord_7(2) = 3
        let r = make_ring(3, 1, 9, 10).unwrap();
        assert_eq!(r.e(), 6); // phi(9)
        assert!(make_ring(4, 1, 1, 10).is_err());
        assert!(make_ring(3, 6, 1, 10).is_err());
    }

    #[test]
    fn teichmuller_values() {
        // omega_5(1) = 1
        assert_eq!(teichmuller_scalar(5, 1, 6).unwrap(), BigUint::one());
        // omega_5(2) = 7 mod 25
        let t = teichmuller_scalar(5, 2, 2).unwrap();
        assert_eq!(t % 25u32, BigUint::from(7u32));
        // omega_2(3) = -1
        let t = teichmuller_scalar(2, 3, 8).unwrap();
        assert_eq!(t, big_pow(2, 8) - BigUint::one());
        // omega^{phi(q)} = 1 and omega = a mod q
        for a in [2u64, 3, 4, 6] {
            let t = teichmuller_scalar(7, a, 8).unwrap();
            let pm = big_pow(7, 8);
            assert!(t.modpow(&BigUint::from(6u32), &pm).is_one());
            assert_eq!(&t % 7u32, BigUint::from(a % 7));
        }
    }

    #[test]
    fn angle_values() {
        // <1> = 1
        assert!(angle_scalar(5, 1, 6).unwrap().is_one());
        // p=5: <2> = 11 mod 25
        assert_eq!(angle_scalar(5, 2, 2).unwrap() % 25u32, BigUint::from(11u32));
        // p=2: <7> = -7
        let a = angle_scalar(2, 7, 8).unwrap();
        assert_eq!(a, big_pow(2, 8) - BigUint::from(7u32));
        // <x> = 1 mod q always
        for a in [3u64, 7, 9, 11] {
            let x = angle_scalar(5, a, 7).unwrap();
            assert!((x % 5u32).is_one());
        }
    }

    #[test]
    fn log_values() {
        // log(1) = 0
        assert!(padic_log_scalar(5, &BigUint::one(), 8).unwrap().is_zero());
        // p=5: v(log 6) = 1
        let l = padic_log_scalar(5, &BigUint::from(6u32), 8).unwrap();
        assert_eq!(big_val(&l, 5), Some(1));
        // p=2: v(log 5) = 2
        let l = padic_log_scalar(2, &BigUint::from(5u32), 12).unwrap();
        assert_eq!(big_val(&l, 2), Some(2));
        // additivity: log(6*11) = log 6 + log 11 mod 5^8
        let pm = big_pow(5, 8);
        let l6 = padic_log_scalar(5, &BigUint::from(6u32), 8).unwrap();
        let l11 = padic_log_scalar(5, &BigUint::from(11u32), 8).unwrap();
        let l66 = padic_log_scalar(5, &BigUint::from(66u32), 8).unwrap();
        assert_eq!((l6 + l11) % &pm, l66);
        // convergence precondition
        assert!(padic_log_scalar(5, &BigUint::from(2u32), 8).is_err());
    }

    #[test]
    fn unit_power() {
        // (1+q)^x at integer x matches modpow
        let pm = big_pow(5, 8);
        let got = unit_power_scalar(5, 6, &BigUint::from(13u32), false, 8);
        assert_eq!(got, BigUint::from(6u32).modpow(&BigUint::from(13u32), &pm));
        // negative exponent: u^{-2} * u^2 = 1
        let got = unit_power_scalar(5, 6, &BigUint::from(2u32), true, 8);
        let dir = BigUint::from(6u32).modpow(&BigUint::from(2u32), &pm);
        assert!((got * dir % &pm).is_one());
        // p = 2
        let pm = big_pow(2, 20);
        let got = unit_power_scalar(2, 5, &BigUint::from(9u32), false, 20);
        assert_eq!(got, BigUint::from(5u32).modpow(&BigUint::from(9u32), &pm));
    }

    #[test]
    fn tower_arithmetic() {
        // Z_3[zeta_9]: e = 6, z = zeta_9 - 1, (1+z)^9 = 1
        let r = make_ring(3, 1, 9, 8).unwrap();
        let z9 = r.zeta_ram(8);
        let one = r.one(8);
        assert!(z9.pow(9).sub(&one).is_zero_at_prec());
        assert!(!z9.pow(3).sub(&one).is_zero_at_prec());
        // v(z) = 1 in pi-units
        let z = z9.sub(&one);
        assert_eq!(z.valuation(), Some(1));
        // v(3) = e = 6
        let three = r.from_i64(3, 8);
        assert_eq!(three.valuation(), Some(6));
        // inverse of a unit
        let x = z9.add(&r.from_i64(2, 8));
        let xi = x.inverse().unwrap();
        assert!(x.mul(&xi).sub(&one).is_zero_at_prec());
        // div_z round trip
        let y = z.mul(&x);
        let back = y.div_z().unwrap().mul(&z.clone());
        let diff = back.sub(&y);
        assert!(diff.valuation().unwrap_or(i64::MAX) >= diff.pi_prec.min(40));
    }

    #[test]
    fn unramified_tower() {
        // Z_2[zeta_7]: d = 3; y has order 7
        let r = make_ring(2, 7, 1, 12).unwrap();
        let y = r.zeta_unram(12);
        let one = r.one(12);
        assert!(y.pow(7).sub(&one).is_zero_at_prec());
        assert!(!y.sub(&one).is_zero_at_prec());
        // norm-ish sanity: y is a unit
        assert!(y.is_unit());
        let yi = y.inverse().unwrap();
        assert!(y.mul(&yi).sub(&one).is_zero_at_prec());
    }

    #[test]
    fn mixed_tower() {
        // Z_5[zeta_3, zeta_5]: d = ord_3(5) = 2, e = 4
        let r = make_ring(5, 3, 5, 6).unwrap();
        assert_eq!((r.d(), r.e()), (2, 4));
        let z3 = r.zeta_unram(6);
        let z5 = r.zeta_ram(6);
        let z15 = z3.mul(&z5);
        let one = r.one(6);
        assert!(z15.pow(15).sub(&one).is_zero_at_prec());
        assert!(!z15.pow(5).sub(&one).is_zero_at_prec());
        assert!(!z15.pow(3).sub(&one).is_zero_at_prec());
    }
}
