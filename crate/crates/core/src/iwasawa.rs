//! Iwasawa power series of even Dirichlet characters from regularized
//! Stickelberger-type level sums, certified by level agreement and calibrated
//! against the exact Bernoulli interpolation oracle; plus evaluation of
//! L_p(chi, s), a direct high-precision value formula used for root
//! refinement, and truncated Euler factors.
//!
//! The level-n sum runs over 0 < a < F p^n coprime to F = lcm(f_theta, q),
//! theta = chi omega^{-1}, with integral weights floor(c*a~/N) - (c-1)/2
//! (a~ = c^{-1} a mod N) and the group-like variable (1+T)^{c_n(a)} where
//! c_n(a) is the discrete log of <a> base u. Dividing the limit by
//! h_c(T) = 1 - chi(c)(1+T)^{log_u c} and multiplying by H recovers G_chi.
//! The exact sign and inversion convention is selected once per prime by
//! oracle calibration and recorded.

use crate::arith::{
    big_inv_mod, big_pow, big_val, gcd, inv_mod_u128, val_u128,
};
use crate::bern::{bernoulli_number, Oracle, ShiftedValue};
use crate::dirichlet::{decompose_first_kind, CharPair, JointRel, OmegaChar, ZChar};
use crate::error::{Error, Result};
use crate::ring::{
    compute_joint_rel, make_ring, padic_log_scalar, teichmuller_scalar, unit_power_scalar,
    CyclotomicData, PadicElement, Ring,
};
use crate::series::SeriesApprox;
use crate::zpoly::split_p_part;
use num_bigint::BigUint;
use num_traits::{One, Zero};
use std::collections::HashMap;

/// H_chi: either 1, or zeta (1+T) - 1 with zeta = chi(gamma) a p-power root
/// of unity (zeta = 1 for the trivial character, giving H = T).
#[derive(Clone, Debug)]
pub struct HPoly {
    pub zeta: Option<PadicElement>,
}

impl HPoly {
    pub fn one() -> Self {
        HPoly { zeta: None }
    }

    pub fn is_one(&self) -> bool {
        self.zeta.is_none()
    }

    /// lambda of H: 1 for the type-W form, 0 otherwise.
    pub fn lambda(&self) -> i64 {
        if self.zeta.is_some() {
            1
        } else {
            0
        }
    }

    pub fn eval(&self, one_plus_t: &PadicElement) -> PadicElement {
        match &self.zeta {
            None => {
                let mut x = one_plus_t.ring.one(one_plus_t.m);
                x.pi_prec = one_plus_t.pi_prec;
                x
            }
            Some(z) => {
                let one = one_plus_t.ring.one(u32::MAX);
                z.mul(one_plus_t).sub(&one)
            }
        }
    }
}

/// Whether chi is of type W over Q: the first-kind part is trivial.
pub fn h_poly(chi: &ZChar, p: u64, ring: &Ring, prec: u32) -> HPoly {
    let split = decompose_first_kind(chi, p);
    if !split.chi1.is_trivial() {
        return HPoly::one();
    }
    let q = if p == 2 { 4 } else { p };
    let u = 1 + q;
    let n = chi.order;
    let exp = chi.exponent_at(u % chi.modulus.max(1)).unwrap_or(0);
    let zeta = ring.realized_root(ring.0.m0 * ring.0.pk, exp * (ring.0.m0 * ring.0.pk / n.max(1)), prec);
    HPoly { zeta: Some(zeta) }
}

/// Construction convention, fixed by calibration and recorded.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Convention {
    pub invert: bool,
    pub symmetrize: bool,
    pub negate: bool,
}

impl Convention {
    pub const ALL: [Convention; 8] = [
        Convention { invert: false, symmetrize: false, negate: false },
        Convention { invert: false, symmetrize: false, negate: true },
        Convention { invert: true, symmetrize: false, negate: false },
        Convention { invert: true, symmetrize: false, negate: true },
        Convention { invert: false, symmetrize: true, negate: false },
        Convention { invert: false, symmetrize: true, negate: true },
        Convention { invert: true, symmetrize: true, negate: false },
        Convention { invert: true, symmetrize: true, negate: true },
    ];

    pub fn tag(&self) -> String {
        format!(
            "{}{}{}",
            if self.invert { "i" } else { "d" },
            if self.symmetrize { "s" } else { "p" },
            if self.negate { "n" } else { "p" }
        )
    }
}

/// Everything fixed for one character class: the coefficient ring, the
/// realization of roots, the oracle, the first-kind decomposition.
pub struct LSetup {
    pub p: u64,
    pub q: u64,
    pub cyc: CyclotomicData,
    pub chi: ZChar,
    pub n_total: u64,
    pub chi1: ZChar,
    pub wild_order: u64,
    pub wild_exp_at_u: u64,
    pub ring: Ring,
    pub omega: OmegaChar,
    pub joint: JointRel,
    pub oracle: Oracle,
    pub h: HPoly,
    /// conductor of theta = chi1 omega^{-1} and the sum modulus F
    pub f_theta: u64,
    pub f_sum: u64,
    /// regularization parameter
    pub c_reg: u64,
    /// pi-valuation of h_c(0) when nonzero; h_c(0) = 0 exactly iff cancel = 1
    pub cancel: usize,
}

impl LSetup {
    pub fn new(p: u64, chi: &ZChar, ring_prec: u32) -> Result<LSetup> {
        let chi = chi.primitive();
        if !chi.is_even() {
            return Err(Error::invalid("only even characters carry an L_p"));
        }
        let cyc = CyclotomicData::new(p);
        let q = if p == 2 { 4 } else { p };
        let n_total = chi.order;
        let (m0, pk) = split_p_part(n_total, p);
        let ring = make_ring(p, m0, pk, ring_prec)?;
        let omega = OmegaChar::new(p);
        let joint = compute_joint_rel(&ring, &omega);
        let oracle = Oracle::new(p, chi.clone(), joint.clone());
        let split = decompose_first_kind(&chi, p);
        let h = h_poly(&chi, p, &ring, ring_prec);
        // theta = chi1 * omega^{-1}
        let theta = CharPair::new(split.chi1.clone(), n_total, -1, omega.clone());
        let f_theta = theta.conductor(&joint);
        let f_sum = num_integer::lcm(f_theta, q);
        let (c_reg, cancel) = choose_regulator(&split.chi1, p, q, f_sum, &ring, n_total, cyc.w);
        Ok(LSetup {
            p,
            q,
            cyc,
            chi: chi.clone(),
            n_total,
            chi1: split.chi1,
            wild_order: split.wild_order,
            wild_exp_at_u: split.wild_exp_at_u,
            ring,
            omega,
            joint,
            oracle,
            h,
            f_theta,
            f_sum,
            c_reg,
            cancel,
        })
    }

    pub fn realize_chi1_value(&self, exp: u64, prec: u32) -> PadicElement {
        let scale = self.n_total / self.chi1.order.max(1);
        self.ring
            .realized_root(self.n_total.max(1), exp * scale % self.n_total.max(1), prec)
    }
}

/// Pick c = 1 mod q with gcd(c, F) = 1: prefer chi1(c) far from 1 (so h_c(0)
/// is closest to a unit); when chi1 is trivial on all candidates (conductor
/// dividing q), take v_p(c - 1) = w so that log_u(c) is a unit.
fn choose_regulator(
    chi1: &ZChar,
    p: u64,
    q: u64,
    f_sum: u64,
    ring: &Ring,
    n_total: u64,
    w: u32,
) -> (u64, usize) {
    let mut best: Option<(i64, u64)> = None; // (v0, c)
    let scale = n_total / chi1.order.max(1);
    for k in 1..=(4 * f_sum / q + 8) {
        let c = 1 + q * k;
        if gcd(c, f_sum) != 1 {
            continue;
        }
        let exp = chi1.exponent_at(c % chi1.modulus.max(1)).unwrap_or(0);
        if exp == 0 {
            continue;
        }
        let val = ring.realized_root(n_total.max(1), exp * scale % n_total.max(1), 3);
        let one = ring.one(3);
        let v0 = val.sub(&one).valuation().unwrap_or(i64::MAX);
        if best.map_or(true, |(bv, _)| v0 < bv) {
            best = Some((v0, c));
        }
        if v0 == 0 {
            break;
        }
    }
    if let Some((_, c)) = best {
        return (c, 0);
    }
    // chi1 trivial on 1 + qZ: pick v_p(c-1) = w exactly
    let mut k = 1;
    loop {
        let c = 1 + q * k;
        if gcd(c, f_sum) == 1 && big_val(&BigUint::from(c - 1), p) == Some(w) {
            return (c, 1);
        }
        k += 1;
    }
}

/// Discrete-log tables for one level: u^j mod p^{n+w} for j < p^n.
struct DlogTable {
    modulus: u64,
    map: HashMap<u64, u64>,
    pn: u64,
}

fn dlog_table(p: u64, u: u64, n: u32, w: u32) -> Result<DlogTable> {
    let bits = (n + w) as f64 * (p as f64).log2();
    if bits > 62.0 {
        return Err(Error::PrecisionExhausted {
            what: "level-sum scalar modulus",
            have: 62,
            need: bits as i64 + 1,
        });
    }
    let modulus = p.pow(n + w);
    let pn = p.pow(n);
    let mut map = HashMap::with_capacity(pn as usize);
    let mut x = 1u64;
    for j in 0..pn {
        map.insert(x, j);
        x = ((x as u128 * u as u128) % modulus as u128) as u64;
    }
    Ok(DlogTable { modulus, map, pn })
}

/// One level-n regularized sum, bucketed by (dlog class, chi1 exponent):
/// returns the T-power coefficients c_0..c_{L-1} as ring elements, all
/// integral, at scalar working precision p^mw.
fn level_sum(
    setup: &LSetup,
    conv: Convention,
    n: u32,
    l_len: usize,
    mw: u32,
) -> Result<Vec<PadicElement>> {
    let p = setup.p;
    let u = setup.cyc.u;
    let w = setup.cyc.w;
    let table = dlog_table(p, u, n, w)?;
    let pmw = p.checked_pow(mw).filter(|&x| x < (1 << 62)).ok_or(
        Error::PrecisionExhausted {
            what: "scalar modulus",
            have: 62,
            need: mw as i64,
        },
    )?;
    let pmw128 = pmw as u128;
    let big_n = setup.f_sum * table.pn;
    let c = setup.c_reg;
    let c_inv_mod_n = inv_mod_u128(c as u128 % big_n as u128, big_n as u128) as u64;
    let half_c_minus_1 = if (c - 1) % 2 == 0 {
        ((c - 1) / 2) as u128 % pmw128
    } else {
        // p odd: divide by 2 modularly
        mul_mod(
            (c - 1) as u128 % pmw128,
            inv_mod_u128(2, pmw128),
            pmw128,
        )
    };
    // omega table mod p^mw per residue class mod q
    let q = setup.q;
    let mut omega_table = vec![0u64; q as usize];
    for r in 1..q {
        if gcd(r, p) == 1 {
            let t = teichmuller_scalar(p, r, mw)?;
            omega_table[r as usize] = (&t % pmw).try_into().unwrap();
        }
    }
    let n1 = setup.chi1.order.max(1);
    let mut buckets = vec![0u64; (table.pn as usize) * n1 as usize];
    let chi1 = &setup.chi1;
    let fm = chi1.modulus.max(1);

    // batched modular inversion of a over blocks
    let block = 512usize;
    let mut batch_a: Vec<u64> = Vec::with_capacity(block);
    let mut batch_data: Vec<(u64, u64, u64)> = Vec::with_capacity(block); // (a, dlog, chiexp)
    let flush = |batch_a: &mut Vec<u64>,
                     batch_data: &mut Vec<(u64, u64, u64)>,
                     buckets: &mut Vec<u64>| {
        if batch_a.is_empty() {
            return;
        }
        // prefix products
        let mut pref = Vec::with_capacity(batch_a.len() + 1);
        pref.push(1u64);
        for &x in batch_a.iter() {
            let last = *pref.last().unwrap() as u128;
            pref.push(mul_mod(last, x as u128, pmw128) as u64);
        }
        let mut inv_all = inv_mod_u128(*pref.last().unwrap() as u128, pmw128);
        for i in (0..batch_a.len()).rev() {
            let inv_a = mul_mod(inv_all, pref[i] as u128, pmw128);
            inv_all = mul_mod(inv_all, batch_a[i] as u128, pmw128);
            let (a, dl, chiexp) = batch_data[i];
            // weight w_c(a)
            let at = ((c_inv_mod_n as u128 * a as u128) % big_n as u128) as u64;
            let floor_term = ((c as u128 * at as u128) / big_n as u128) % pmw128;
            let mut weight = (floor_term + pmw128 - half_c_minus_1) % pmw128;
            if conv.symmetrize {
                let at2 = big_n - at; // c^{-1}(N - a) = N - a~
                let f2 = ((c as u128 * at2 as u128) / big_n as u128) % pmw128;
                let w2 = (f2 + pmw128 - half_c_minus_1) % pmw128;
                // (w(a) - w(N-a))/2
                let inv2 = inv_mod_u128(2, pmw128);
                weight = mul_mod((weight + pmw128 - w2) % pmw128, inv2, pmw128);
            }
            // scalar = omega_extra(a) * a^{-1} * weight
            let mut scal = mul_mod(inv_a, weight, pmw128);
            if conv.invert {
                // theta^{-1}: chi1^{-1}(a) omega^2(a) a^{-1} w; the chi-part
                // sign is folded into the bucket exponent below
                let om = omega_table[(a % q) as usize] as u128;
                let om2 = mul_mod(om, om, pmw128);
                scal = mul_mod(scal, om2, pmw128);
            }
            let idx = (dl as usize) * n1 as usize + chiexp as usize;
            let cur = buckets[idx] as u128;
            buckets[idx] = ((cur + scal) % pmw128) as u64;
        }
        batch_a.clear();
        batch_data.clear();
    };

    for a in 1..big_n {
        if gcd(a, setup.f_sum) != 1 {
            continue;
        }
        let chiexp_raw = match chi1.exponent_at(a % fm) {
            Some(e) => e,
            None => continue, // a shares a factor with chi1's modulus beyond F: impossible
        };
        let chiexp = if conv.invert {
            (n1 - chiexp_raw) % n1
        } else {
            chiexp_raw
        };
        // <a> mod p^{n+w} and its dlog
        let om = omega_table[(a % q) as usize];
        let om_inv = inv_mod_u128(om as u128 % table.modulus as u128, table.modulus as u128);
        let angle = mul_mod(a as u128 % table.modulus as u128, om_inv, table.modulus as u128) as u64;
        let dl = *table
            .map
            .get(&angle)
            .expect("angle projection lies in the dlog table");
        batch_a.push(a % pmw);
        batch_data.push((a, dl, chiexp));
        if batch_a.len() == block {
            flush(&mut batch_a, &mut batch_data, &mut buckets);
        }
    }
    flush(&mut batch_a, &mut batch_data, &mut buckets);

    // binomial fold to T-coefficients, per chi exponent, scalar arithmetic
    let mut ct = vec![0u64; l_len * n1 as usize];
    let mut row = vec![0u64; l_len]; // C(j, i) mod p^mw
    for j in 0..table.pn {
        // update row: C(j, i) from C(j-1, i) (+ C(j-1, i-1))
        if j == 0 {
            row[0] = 1;
        } else {
            for i in (1..l_len).rev() {
                row[i] = ((row[i] as u128 + row[i - 1] as u128) % pmw128) as u64;
            }
        }
        let base = (j as usize) * n1 as usize;
        for e in 0..n1 as usize {
            let b = buckets[base + e];
            if b == 0 {
                continue;
            }
            let bb = b as u128;
            let tgt = e;
            for i in 0..l_len.min(j as usize + 1) {
                let add = mul_mod(row[i] as u128, bb, pmw128);
                let cell = &mut ct[i * n1 as usize + tgt];
                *cell = ((*cell as u128 + add) % pmw128) as u64;
            }
        }
    }

    // assemble ring elements: c_i = sum_e root(e) * ct[i][e]
    let prec = mw.min(setup.ring.prec());
    let mut roots = Vec::with_capacity(n1 as usize);
    for e in 0..n1 {
        roots.push(setup.realize_chi1_value(e, prec));
    }
    let mut out = Vec::with_capacity(l_len);
    for i in 0..l_len {
        let mut acc = setup.ring.zero(prec);
        for e in 0..n1 as usize {
            let s = ct[i * n1 as usize + e];
            if s != 0 {
                acc = acc.add(&roots[e].mul_scalar(&BigUint::from(s)));
            }
        }
        if conv.negate {
            acc = acc.neg();
        }
        out.push(acc);
    }
    Ok(out)
}

fn mul_mod(a: u128, b: u128, m: u128) -> u128 {
    a % m * (b % m) % m
}

/// log_u(c) as a p-adic integer mod p^(mw - w): log_p(c)/log_p(u).
pub fn dlog_u(p: u64, u: u64, c: u64, w: u32, mw: u32) -> Result<BigUint> {
    let lc = padic_log_scalar(p, &BigUint::from(c), mw + w)?;
    let lu = padic_log_scalar(p, &BigUint::from(u), mw + w)?;
    let pw = big_pow(p, w);
    let lc_red = lc / &pw;
    let lu_red = lu / &pw;
    // lu_red is a unit
    Ok((lc_red * big_inv_mod(&lu_red, p, mw)) % big_pow(p, mw))
}

/// The binomial row C(x, i) mod p^m for i = 0..len-1, x given mod p^{m'}.
pub fn binom_row(x: &BigUint, p: u64, m: u32, len: usize) -> Vec<BigUint> {
    let mut extra = 0u32;
    for i in 1..len as u64 {
        extra += val_u128(i as u128, p).unwrap_or(0);
    }
    let mwork = m + extra + 1;
    let pm = big_pow(p, mwork);
    let target = big_pow(p, m);
    let mut out = Vec::with_capacity(len);
    out.push(BigUint::one());
    let mut numer = BigUint::one();
    let mut denom_val = 0u32;
    let mut denom_unit = BigUint::one();
    for i in 1..len {
        let factor = (x + &pm - BigUint::from((i - 1) as u64)) % &pm;
        numer = numer * factor % &pm;
        let mut ii = i as u64;
        while ii % p == 0 {
            denom_val += 1;
            ii /= p;
        }
        denom_unit = denom_unit * ii % &pm;
        let pv = big_pow(p, denom_val);
        let shifted = &numer / &pv;
        let c = shifted * big_inv_mod(&denom_unit, p, mwork) % &pm;
        out.push(c % &target);
    }
    out
}

/// h_c(T) = 1 - chi1(c) (1+T)^{log_u c} as a length-L series.
fn h_c_series(setup: &LSetup, l_len: usize, mw: u32) -> Result<SeriesApprox> {
    let p = setup.p;
    let prec = mw.min(setup.ring.prec());
    let d = dlog_u(p, setup.cyc.u, setup.c_reg, setup.cyc.w, mw)?;
    let row = binom_row(&d, p, prec, l_len);
    let exp = setup
        .chi1
        .exponent_at(setup.c_reg % setup.chi1.modulus.max(1))
        .unwrap_or(0);
    let chi_c = setup.realize_chi1_value(exp, prec);
    let one = setup.ring.one(prec);
    let mut coeffs = Vec::with_capacity(l_len);
    for (i, b) in row.iter().enumerate() {
        let t = chi_c.mul_scalar(b).neg();
        if i == 0 {
            coeffs.push(one.add(&t));
        } else {
            coeffs.push(t);
        }
    }
    Ok(SeriesApprox::new(setup.ring.clone(), coeffs, 64, 0))
}

/// Full G_chi construction at level n (certified against level n+1):
/// first-kind series A/h (times H for the trivial character), then the wild
/// twist T -> zeta(1+T) - 1.
pub struct GSeries {
    pub series: SeriesApprox,
    pub h: HPoly,
    pub tag: String,
}

pub fn stickelberger_series(
    setup: &LSetup,
    conv: Convention,
    level: u32,
    l_len: usize,
) -> Result<SeriesApprox> {
    if (l_len as u64) > setup.p.pow(level) {
        return Err(Error::invalid("series length exceeds p^level"));
    }
    let p = setup.p;
    let w = setup.cyc.w;
    let mw = level + 1 + w + 1;
    let low = level_sum(setup, conv, level, l_len, mw)?;
    let high = level_sum(setup, conv, level + 1, l_len, mw + 1)?;
    // certify: per-coefficient precision = valuation of the difference
    let e = setup.ring.e() as i64;
    let cap = e * (mw as i64);
    let mut coeffs = Vec::with_capacity(l_len);
    for (lo, hi) in low.iter().zip(&high) {
        let diff = lo.sub(hi);
        let agree = diff.valuation().unwrap_or(cap).min(cap);
        if agree <= 0 {
            return Err(Error::PrecisionExhausted {
                what: "level agreement",
                have: agree,
                need: 1,
            });
        }
        let mut c = hi.clone();
        c.pi_prec = c.pi_prec.min(agree);
        coeffs.push(c);
    }
    let a_series = SeriesApprox::new(setup.ring.clone(), coeffs, level, 0);
    let h_c = h_c_series(setup, l_len, mw)?;
    // numerator: A * H_{chi1}; H of the first-kind part is T exactly when
    // chi1 is trivial, else 1
    let num = if setup.chi1.is_trivial() {
        let zero = setup.ring.zero(u32::MAX);
        let one = setup.ring.one(u32::MAX);
        a_series.mul_linear(&zero, &one)
    } else {
        a_series
    };
    let mut g1 = num.divide(&h_c, setup.cancel)?;
    // integrality floor from the construction: 0 for p odd, e for p = 2
    g1.mu_floor = if p == 2 { e } else { 0 };
    // wild twist
    if setup.wild_order > 1 {
        let scale = setup.n_total / setup.wild_order;
        let zeta = setup.ring.realized_root(
            setup.n_total,
            (setup.wild_exp_at_u * scale) % setup.n_total,
            setup.ring.prec(),
        );
        g1 = g1.substitute_twist(&zeta, &setup.ring)?;
        g1.mu_floor = if p == 2 { e } else { 0 };
    }
    Ok(g1)
}

/// Evaluate L_p(chi, s) = G(u^{1-s} - 1)/H(u^{1-s} - 1) at an integer s = m.
pub fn lp_evaluate_int(setup: &LSetup, g: &GSeries, m: i64) -> Result<ShiftedValue> {
    let prec = series_eval_prec(g);
    let one_plus_t = u_power_elem(setup, 1 - m, prec);
    lp_evaluate_at(setup, g, &one_plus_t)
}

fn series_eval_prec(g: &GSeries) -> u32 {
    (g.series.min_prec().max(1) as u32 / g.series.ring.e()).max(2) + 4
}

/// u^k as a ring element (k may be negative).
pub fn u_power_elem(setup: &LSetup, k: i64, prec: u32) -> PadicElement {
    let p = setup.p;
    let pm = big_pow(p, prec);
    let u = BigUint::from(setup.cyc.u);
    let val = if k >= 0 {
        u.modpow(&BigUint::from(k as u64), &pm)
    } else {
        let v = u.modpow(&BigUint::from((-k) as u64), &pm);
        big_inv_mod(&v, p, prec)
    };
    setup.ring.from_biguint(val, prec)
}

/// Evaluate at a point given as 1 + t = u^{1-s}.
pub fn lp_evaluate_at(
    setup: &LSetup,
    g: &GSeries,
    one_plus_t: &PadicElement,
) -> Result<ShiftedValue> {
    let one = setup.ring.one(u32::MAX);
    let t = one_plus_t.sub(&one);
    let gv = g.series.eval(&t)?;
    match &g.h.zeta {
        None => Ok(ShiftedValue::integral(gv)),
        Some(_) => {
            let hv = g.h.eval(one_plus_t);
            let v_h = hv.certified_valuation().map_err(|_| Error::PoleAtOne)?;
            let (hu, _) = hv.unit_part()?;
            let inv = hu.inverse()?;
            let elem = gv.mul(&inv);
            Ok(ShiftedValue {
                elem,
                shift_pi: v_h,
            })
        }
    }
}

/// Calibrate the construction convention against the oracle at m = -1,-2,-3
/// and return the convention together with its tag.
pub fn calibrate(setup: &LSetup, level: u32, l_len: usize) -> Result<(Convention, String)> {
    for conv in Convention::ALL {
        match stickelberger_series(setup, conv, level, l_len) {
            Ok(series) => {
                let g = GSeries {
                    series,
                    h: setup.h.clone(),
                    tag: conv.tag(),
                };
                if oracle_consistent(setup, &g, &[-1, -2, -3]).unwrap_or(false) {
                    let tag = format!("{}:c{}", conv.tag(), setup.c_reg);
                    return Ok((conv, tag));
                }
            }
            Err(_) => continue,
        }
    }
    Err(Error::CalibrationFailed(setup.p))
}

/// Check series values against the interpolation oracle at the given m's.
pub fn oracle_consistent(setup: &LSetup, g: &GSeries, ms: &[i64]) -> Result<bool> {
    for &m in ms {
        let lhs = lp_evaluate_int(setup, g, m)?;
        let prec = lhs.elem.pi_prec - lhs.shift_pi;
        let rhs = setup
            .oracle
            .lp_value_embedded(m, &setup.ring, (prec.max(2) as u32 / setup.ring.e()) + 2)?;
        if rhs.elem.valuation().is_none() && m == 0 {
            continue;
        }
        let (dv, joint_prec) = shifted_difference(&lhs, &rhs, setup.ring.e());
        let need = (joint_prec - 1).max(1);
        match dv {
            None => {}
            Some(v) if v >= need => {}
            _ => return Ok(false),
        }
    }
    Ok(true)
}

/// Difference valuation of two shifted values (pi-units, after aligning the
/// shifts), together with the joint certified precision.
pub fn shifted_difference(a: &ShiftedValue, b: &ShiftedValue, _e: u32) -> (Option<i64>, i64) {
    let s = a.shift_pi.max(b.shift_pi);
    let lift = |x: &ShiftedValue| -> PadicElement {
        let k = (s - x.shift_pi) as u32;
        if k == 0 {
            x.elem.clone()
        } else {
            // multiply by pi^k
            let mut y = x.elem.clone();
            let e = y.ring.e();
            let full = k / e;
            let part = k % e;
            if full > 0 {
                y = y.mul_scalar(&big_pow(y.p(), full));
            }
            if part > 0 {
                let z = y.ring.zeta_ram(y.m).sub(&y.ring.one(y.m));
                for _ in 0..part {
                    y = y.mul(&z);
                }
            }
            y
        }
    };
    let av = lift(a);
    let bv = lift(b);
    let diff = av.sub(&bv);
    let prec = diff.pi_prec - s;
    (diff.valuation().map(|v| v - s), prec)
}

/// Truncated Euler machinery: Eulpol_l(t, eta) = 1 - eta(l) t when l does not
/// divide the conductor of eta, else 1; dEul_l(eta, s) = Eulpol(<l>^{-s}).
pub struct EulerFactorInput<'a> {
    pub setup: &'a LSetup,
    /// eta = chi omega^{-1} as a pair with its conductor
    pub eta: CharPair,
    pub f_eta: u64,
}

impl<'a> EulerFactorInput<'a> {
    pub fn new(setup: &'a LSetup) -> Self {
        let eta = CharPair::new(setup.chi.clone(), setup.n_total.max(1), -1, setup.omega.clone());
        let f_eta = eta.conductor(&setup.joint);
        EulerFactorInput { setup, eta, f_eta }
    }

    /// dEul_l(eta, s) at integer s.
    pub fn deul_int(&self, ell: u64, s: i64, prec: u32) -> Result<PadicElement> {
        let setup = self.setup;
        if ell == setup.p {
            return Err(Error::invalid("l must avoid p"));
        }
        let one = setup.ring.one(prec);
        if self.f_eta % ell == 0 {
            return Ok(one);
        }
        let (i, j) = self
            .eta
            .primitive_exps_at(ell % self.f_eta.max(1), self.f_eta)
            .expect("l unramified");
        let root = setup
            .ring
            .realized_root(setup.n_total.max(1), i, prec)
            .mul(&setup.ring.omega_root(setup.omega.g, j, prec));
        // <l>^{-s}
        let angle = crate::ring::angle_scalar(setup.p, ell, prec)?;
        let pm = big_pow(setup.p, prec);
        let pw = if s >= 0 {
            let v = angle.modpow(&BigUint::from(s as u64), &pm);
            big_inv_mod(&v, setup.p, prec)
        } else {
            angle.modpow(&BigUint::from((-s) as u64), &pm)
        };
        Ok(one.sub(&root.mul_scalar(&pw)))
    }

    /// L_{p,S}(chi, s) = L_p(chi, s) prod_{l in S, l != p} dEul_l(chi omega^{-1}, s).
    pub fn lp_truncated_int(
        &self,
        g: &GSeries,
        extra_primes: &[u64],
        m: i64,
    ) -> Result<ShiftedValue> {
        let mut v = lp_evaluate_int(self.setup, g, m)?;
        for &ell in extra_primes {
            if ell == self.setup.p {
                continue;
            }
            let prec = (v.elem.pi_prec.max(2) as u32 / self.setup.ring.e()) + 2;
            let f = self.deul_int(ell, m, prec)?;
            v = ShiftedValue {
                elem: v.elem.mul(&f),
                shift_pi: v.shift_pi,
            };
        }
        Ok(v)
    }
}

/// Direct value of L_p(chi1, s) for a first-kind character at any s in Z_p
/// (s given as a residue mod p^{prec+extra}), to precision p^prec. This is
/// the classical absolutely-convergent expansion over a = 1..F with the
/// binomial tail in (F/a); it is what the root-refinement oracle runs on.
pub fn lp_direct_first_kind(
    setup: &LSetup,
    s_residue: &BigUint,
    prec: u32,
) -> Result<ShiftedValue> {
    if setup.wild_order > 1 {
        return Err(Error::invalid("direct value only for first-kind chi"));
    }
    let p = setup.p;
    let f = setup.f_sum;
    let vf = big_val(&BigUint::from(f), p).unwrap_or(1).max(1);
    // j-range: j*vf - 1 >= prec
    let jmax = ((prec + 2) / vf + 2) as usize;
    let work = prec + 3 + jmax as u32 / 8;
    let pm = big_pow(p, work);
    // x = 1 - s
    let one_minus_s = (&pm + BigUint::one() - (s_residue % &pm)) % &pm;
    let binoms = binom_row(&one_minus_s, p, work, jmax);
    // Bernoulli numbers as (unit mod p^work, p-valuation >= -1): store p*B_j
    let mut pbj: Vec<BigUint> = Vec::with_capacity(jmax);
    for j in 0..jmax {
        let b = bernoulli_number(j);
        let num = b.numer();
        let den = b.denom().magnitude().clone();
        let dv = big_val(&den, p).unwrap_or(0);
        debug_assert!(dv <= 1);
        let den_unit = &den / big_pow(p, dv);
        let mut x = (num.magnitude() % &pm) * big_pow(p, 1 - dv) % &pm;
        x = x * big_inv_mod(&den_unit, p, work) % &pm;
        if num.sign() == num_bigint::Sign::Minus && !x.is_zero() {
            x = &pm - x;
        }
        pbj.push(x);
    }
    let mut acc = setup.ring.zero(work);
    let _n1 = setup.chi1.order.max(1);
    for a in 1..=f {
        if gcd(a, f) != 1 {
            continue;
        }
        let chiexp = match setup.chi1.exponent_at(a % setup.chi1.modulus.max(1)) {
            Some(e) => e,
            None => continue,
        };
        // inner = sum_j C(1-s, j) (p B_j) (F/a)^j   (integral, = p * true inner)
        let fa = BigUint::from(f) * big_inv_mod(&BigUint::from(a), p, work) % &pm;
        let mut fap = BigUint::one();
        let mut inner = BigUint::zero();
        for j in 0..jmax {
            let t = (&binoms[j] * &pbj[j]) % &pm;
            inner = (inner + t * &fap) % &pm;
            fap = fap * &fa % &pm;
        }
        // <a>^{1-s} = <a> * u^{-s dlog<a>}
        let angle = crate::ring::angle_scalar(p, a, work)?;
        let la = padic_log_scalar(p, &angle, work + setup.cyc.w)?;
        let lu = padic_log_scalar(p, &BigUint::from(setup.cyc.u), work + setup.cyc.w)?;
        let pw = big_pow(p, setup.cyc.w);
        let dlog_a = (la / &pw) * big_inv_mod(&(lu / &pw), p, work) % &pm;
        let exp = (s_residue % &pm) * &dlog_a % &pm;
        let upow = unit_power_scalar(p, setup.cyc.u, &exp, true, work);
        let scal = angle * upow % &pm * inner % &pm;
        let root = setup.realize_chi1_value(chiexp, work);
        acc = acc.add(&root.mul_scalar(&scal));
    }
    // divide by F (s - 1) p  (the extra p undoes the p*B_j scaling)
    let fv = big_val(&BigUint::from(f), p).unwrap_or(0);
    let funit = BigUint::from(f) / big_pow(p, fv);
    acc = acc.mul_scalar(&big_inv_mod(&funit, p, work));
    // s - 1 = -(1 - s)
    let sv = big_val(&one_minus_s, p).unwrap_or(work);
    if sv >= work {
        return Err(Error::PoleAtOne);
    }
    let sunit = &one_minus_s / big_pow(p, sv);
    acc = acc.mul_scalar(&big_inv_mod(&sunit, p, work)).neg();
    let e = setup.ring.e() as i64;
    let shift_pi = e * (fv as i64 + sv as i64 + 1);
    let mut elem = acc;
    elem.pi_prec = elem
        .pi_prec
        .min(e * (prec as i64 + fv as i64 + sv as i64 + 1));
    Ok(ShiftedValue { elem, shift_pi })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dirichlet::unit_group;

    fn setup_for(p: u64, chi: ZChar) -> LSetup {
        LSetup::new(p, &chi, 40.min(62 / (64 - p.leading_zeros()) as u32)).unwrap()
    }

    fn quick_g(setup: &LSetup, level: u32, l: usize) -> GSeries {
        let (conv, tag) = calibrate(setup, level.min(6), l.min(4)).unwrap();
        let series = stickelberger_series(setup, conv, level, l).unwrap();
        GSeries {
            series,
            h: setup.h.clone(),
            tag,
        }
    }

    #[test]
    fn omega_square_series_p5() {
        // chi = omega^2 at p = 5: regular pair, G is a unit series, and
        // L_p(chi, -1) = 1/3 (2 mod 5, 42 mod 125 is 1/3? 1/3 = 42 mod 125)
        let g5 = unit_group(5);
        let chi = ZChar::from_exponents(&g5, 4, &[2]);
        let setup = setup_for(5, chi);
        let g = quick_g(&setup, 3, 4);
        assert!(oracle_consistent(&setup, &g, &[-1, -2, -3, -4]).unwrap());
        // lambda = 0: constant term is a unit
        assert_eq!(g.series.coeffs[0].valuation(), Some(0));
        let v = lp_evaluate_int(&setup, &g, -1).unwrap();
        // 1/3 mod 25 = 17
        let pm = BigUint::from(25u32);
        assert_eq!(
            v.elem.scalar_value().unwrap() % &pm,
            big_inv_mod(&BigUint::from(3u32), 5, 2) % &pm
        );
    }

    #[test]
    fn trivial_character_pole_and_values() {
        // trivial chi at p = 5: H = T, pole at s = 1, and
        // zeta_{5,p}(-3) = -(B_4/4)(1 - 5^3) = -31/30
        let setup = setup_for(5, ZChar::trivial(1));
        let g = quick_g(&setup, 3, 4);
        assert!(oracle_consistent(&setup, &g, &[-1, -2, -3]).unwrap());
        // pole at s = 1: H(u^0) = 0
        let one_plus_t = setup.ring.one(20);
        assert!(matches!(
            lp_evaluate_at(&setup, &g, &one_plus_t),
            Err(Error::PoleAtOne)
        ));
        let v = lp_evaluate_int(&setup, &g, -3).unwrap();
        let prec = 3u32;
        let pm = big_pow(5, prec);
        let expect = (&pm - BigUint::from(31u32)) * big_inv_mod(&BigUint::from(30u32), 5, prec) % &pm;
        assert_eq!(v.shift_pi, 0);
        assert_eq!(v.elem.scalar_value().unwrap() % &pm, expect);
    }

    #[test]
    fn order3_mod7_p2() {
        // p = 2, chi of order 3 mod 7: unramified degree-2 values
        let g7 = unit_group(7);
        let chi = ZChar::from_exponents(&g7, 6, &[2]);
        assert_eq!(chi.order, 3);
        let setup = setup_for(2, chi);
        let g = quick_g(&setup, 6, 4);
        assert!(oracle_consistent(&setup, &g, &[-1, -2, -3]).unwrap());
        // p = 2: mu = 1, so all coefficients are even and some c_i/2 is a unit
        let vals: Vec<_> = g.series.coeffs.iter().map(|c| c.valuation()).collect();
        assert!(vals.iter().all(|v| v.map_or(true, |x| x >= 1)));
        assert!(vals.iter().any(|v| *v == Some(1)));
    }

    #[test]
    fn direct_value_matches_series() {
        // lp_direct at integer s agrees with the oracle
        let g5 = unit_group(5);
        let chi = ZChar::from_exponents(&g5, 4, &[2]);
        let setup = setup_for(5, chi);
        for m in [-1i64, -2, -3] {
            let pmw = big_pow(5, 12);
            let s_res = if m >= 0 {
                BigUint::from(m as u64)
            } else {
                (&pmw - BigUint::from((-m) as u64)) % &pmw
            };
            let direct = lp_direct_first_kind(&setup, &s_res, 6).unwrap();
            let oracle = setup.oracle.lp_value_embedded(m, &setup.ring, 8).unwrap();
            let (dv, prec) = shifted_difference(&direct, &oracle, setup.ring.e());
            assert!(prec >= 4, "joint precision too small: {prec}");
            assert!(
                dv.map_or(true, |v| v >= prec.min(5)),
                "m={m}: difference valuation {dv:?}, prec {prec}"
            );
        }
    }
}
