//! Dirichlet characters of (Z/f)^*: unit-group presentations through SNF,
//! kernel-based enumeration of primitive even characters, Q_p-conjugacy
//! classes, and the decompositions (first-kind/wild, prime-to-p/p-power
//! order) used by the L-function machinery.

use crate::arith::{
    coprime_lift, crt, divisors, euler_phi, factorize, gcd, mult_order, pow_mod, primitive_root,
};
use crate::snf::{
    character_for_subgroup, enumerate_subgroups, smith_normal_form, AbelianPresentation, Mat,
};
use crate::zpoly::{cyclotomic_factor_count, split_p_part};
use std::collections::HashMap;

/// The unit group (Z/f)^* with a minimal SNF presentation diag(d_1..d_s),
/// d_{i+1} | d_i, generators as unit residues, and a discrete-log map.
#[derive(Clone, Debug)]
pub struct UnitGroup {
    pub f: u64,
    pub pres: AbelianPresentation,
    /// unit residues generating the group, one per invariant factor
    pub gens: Vec<u64>,
    u_mat: Mat,
    raw_rank: usize,
    raw_tables: Vec<RawDlog>,
}

#[derive(Clone, Debug)]
struct RawDlog {
    comp_mod: u64,
    table: HashMap<u64, u64>,
    kind: RawKind,
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum RawKind {
    Cyclic,
    SignOfTwoPower,
    FiveOfTwoPower,
}

pub fn unit_group(f: u64) -> UnitGroup {
    assert!(f >= 1);
    let mut raw_orders: Vec<u64> = Vec::new();
    let mut raw_gens: Vec<u64> = Vec::new();
    let mut raw_tables: Vec<RawDlog> = Vec::new();

    for (l, a) in factorize(f) {
        let la = l.pow(a);
        let rest = f / la;
        if l == 2 {
            match a {
                1 => continue,
                2 => {
                    let g = crt_lift(3, la, rest, f);
                    raw_orders.push(2);
                    raw_gens.push(g);
                    raw_tables.push(RawDlog {
                        comp_mod: la,
                        table: HashMap::from([(1, 0), (3, 1)]),
                        kind: RawKind::Cyclic,
                    });
                }
                _ => {
                    // 2^a with a >= 3: <-1> x <5>
                    let gm1 = crt_lift(la - 1, la, rest, f);
                    raw_orders.push(2);
                    raw_gens.push(gm1);
                    raw_tables.push(RawDlog {
                        comp_mod: la,
                        table: HashMap::new(),
                        kind: RawKind::SignOfTwoPower,
                    });
                    let ord5 = la / 4;
                    let g5 = crt_lift(5, la, rest, f);
                    let mut table = HashMap::new();
                    let mut x = 1u64;
                    for e in 0..ord5 {
                        table.insert(x, e);
                        x = x * 5 % la;
                    }
                    raw_orders.push(ord5);
                    raw_gens.push(g5);
                    raw_tables.push(RawDlog {
                        comp_mod: la,
                        table,
                        kind: RawKind::FiveOfTwoPower,
                    });
                }
            }
        } else {
            let ord = euler_phi(la);
            let g0 = primitive_root(la);
            let g = crt_lift(g0, la, rest, f);
            let mut table = HashMap::new();
            let mut x = 1u64;
            for e in 0..ord {
                table.insert(x, e);
                x = ((x as u128 * g0 as u128) % la as u128) as u64;
            }
            raw_orders.push(ord);
            raw_gens.push(g);
            raw_tables.push(RawDlog {
                comp_mod: la,
                table,
                kind: RawKind::Cyclic,
            });
        }
    }

    if raw_orders.is_empty() {
        return UnitGroup {
            f,
            pres: AbelianPresentation { orders: vec![] },
            gens: vec![],
            u_mat: Mat::identity(0),
            raw_rank: 0,
            raw_tables,
        };
    }

    let s = raw_orders.len();
    let diag = Mat::diag(&raw_orders.iter().map(|&x| x as i64).collect::<Vec<_>>());
    let (u, _v, d) = smith_normal_form(&diag).expect("diagonal SNF");
    let kept: Vec<usize> = (0..s).filter(|&i| d[(i, i)] > 1).collect();
    let orders: Vec<i64> = kept.iter().map(|&i| d[(i, i)]).collect();
    let uinv = invert_unimodular(&u);
    let mut gens = Vec::with_capacity(kept.len());
    for &i in &kept {
        let mut acc = 1u64;
        for j in 0..s {
            let e = uinv[(j, i)].rem_euclid(raw_orders[j] as i64) as u64;
            acc = ((acc as u128 * pow_mod(raw_gens[j], e, f) as u128) % f as u128) as u64;
        }
        gens.push(acc);
    }
    UnitGroup {
        f,
        pres: AbelianPresentation { orders },
        gens,
        u_mat: u,
        raw_rank: s,
        raw_tables,
    }
}

fn crt_lift(r: u64, la: u64, rest: u64, f: u64) -> u64 {
    if rest == 1 {
        r % f
    } else {
        crt(r, la, 1, rest) % f
    }
}

fn invert_unimodular(u: &Mat) -> Mat {
    let n = u.n;
    let mut inv = Mat::zero(n);
    let det = det_i64(u);
    assert!(det == 1 || det == -1);
    for i in 0..n {
        for j in 0..n {
            let minor = minor_det(u, j, i);
            let cof = if (i + j) % 2 == 0 { minor } else { -minor };
            inv[(i, j)] = cof * det;
        }
    }
    inv
}

fn det_i64(m: &Mat) -> i64 {
    let n = m.n;
    if n == 0 {
        return 1;
    }
    if n == 1 {
        return m[(0, 0)];
    }
    let mut acc = 0i64;
    for j in 0..n {
        let sign = if j % 2 == 0 { 1 } else { -1 };
        acc += sign * m[(0, j)] * minor_det(m, 0, j);
    }
    acc
}

fn minor_det(m: &Mat, row: usize, col: usize) -> i64 {
    let n = m.n;
    if n == 1 {
        return 1;
    }
    let mut sub = Mat::zero(n - 1);
    let mut si = 0;
    for i in 0..n {
        if i == row {
            continue;
        }
        let mut sj = 0;
        for j in 0..n {
            if j == col {
                continue;
            }
            sub[(si, sj)] = m[(i, j)];
            sj += 1;
        }
        si += 1;
    }
    det_i64(&sub)
}

impl UnitGroup {
    /// Exponent vector of a unit with respect to the minimal generators.
    pub fn dlog(&self, a: u64) -> Option<Vec<i64>> {
        if self.f == 1 {
            return Some(vec![]);
        }
        let a = a % self.f;
        if gcd(a, self.f) != 1 {
            return None;
        }
        let mut raw = Vec::with_capacity(self.raw_rank);
        for t in &self.raw_tables {
            let r = a % t.comp_mod;
            let e = match t.kind {
                RawKind::Cyclic => *t.table.get(&r)?,
                RawKind::SignOfTwoPower => u64::from(r % 4 != 1),
                RawKind::FiveOfTwoPower => {
                    let rr = if r % 4 == 1 { r } else { t.comp_mod - r };
                    *t.table.get(&rr)?
                }
            };
            raw.push(e as i64);
        }
        let s = self.raw_rank;
        let mut out = vec![0i64; self.pres.rank()];
        for (k, ord) in self.pres.orders.iter().enumerate() {
            let mut acc: i64 = 0;
            for j in 0..s {
                acc += self.u_mat[(k, j)] * raw[j];
            }
            out[k] = acc.rem_euclid(*ord);
        }
        Some(out)
    }

    pub fn phi(&self) -> u64 {
        self.pres.group_order() as u64
    }
}

/// A concrete Dirichlet character: chi(a) = zeta_order^{exps[a]} for units a.
/// The abstract root zeta_order is realized p-adically by the pipeline as a
/// fixed power of the ring's canonical root, so products are only formed
/// between characters from one power-compatible family.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ZChar {
    pub modulus: u64,
    pub order: u64,
    pub exps: Vec<Option<u64>>,
}

impl ZChar {
    pub fn trivial(modulus: u64) -> Self {
        let modulus = modulus.max(1);
        let exps = (0..modulus)
            .map(|a| {
                if modulus == 1 || gcd(a, modulus) == 1 {
                    Some(0)
                } else {
                    None
                }
            })
            .collect();
        ZChar {
            modulus,
            order: 1,
            exps,
        }
    }

    pub fn from_exponents(g: &UnitGroup, order: u64, value_exps: &[i64]) -> Self {
        let f = g.f;
        if f == 1 {
            return ZChar::trivial(1);
        }
        let mut exps = vec![None; f as usize];
        for a in 0..f {
            if let Some(d) = g.dlog(a) {
                let mut acc: i128 = 0;
                for (k, &x) in d.iter().enumerate() {
                    acc += value_exps[k] as i128 * x as i128;
                }
                exps[a as usize] = Some(acc.rem_euclid(order as i128) as u64);
            }
        }
        let mut z = ZChar {
            modulus: f,
            order,
            exps,
        };
        z.normalize_order();
        z
    }

    fn normalize_order(&mut self) {
        let mut g = self.order;
        for e in self.exps.iter().flatten() {
            g = gcd(g, *e);
            if g == 1 {
                break;
            }
        }
        if g > 1 {
            for e in self.exps.iter_mut().flatten() {
                *e /= g;
            }
            self.order /= g;
        }
        if self.order == 0 {
            self.order = 1;
        }
    }

    pub fn exponent_at(&self, a: u64) -> Option<u64> {
        self.exps[(a % self.modulus) as usize]
    }

    pub fn is_trivial(&self) -> bool {
        self.order == 1
    }

    pub fn is_even(&self) -> bool {
        if self.modulus <= 2 {
            return true;
        }
        self.exponent_at(self.modulus - 1) == Some(0)
    }

    pub fn pow(&self, t: u64) -> Self {
        let exps = self
            .exps
            .iter()
            .map(|e| e.map(|x| ((x as u128 * t as u128) % self.order.max(1) as u128) as u64))
            .collect();
        let mut z = ZChar {
            modulus: self.modulus,
            order: self.order,
            exps,
        };
        z.normalize_order();
        z
    }

    pub fn inverse(&self) -> Self {
        if self.order <= 1 {
            return self.clone();
        }
        self.pow(self.order - 1)
    }

    /// Smallest f' | modulus such that chi is trivial on the kernel of the
    /// reduction (Z/modulus)^* -> (Z/f')^*.
    pub fn conductor(&self) -> u64 {
        if self.order == 1 {
            return 1;
        }
        'outer: for &fp in divisors(self.modulus).iter() {
            for a in 1..self.modulus {
                if gcd(a, self.modulus) != 1 {
                    continue;
                }
                let in_kernel = fp == 1 || a % fp == 1;
                if in_kernel && self.exponent_at(a) != Some(0) {
                    continue 'outer;
                }
            }
            return fp;
        }
        self.modulus
    }

    /// The primitive character inducing chi.
    pub fn primitive(&self) -> ZChar {
        let c = self.conductor();
        if c == self.modulus {
            return self.clone();
        }
        if c == 1 {
            return ZChar::trivial(1);
        }
        let mut exps = vec![None; c as usize];
        for a in 0..c {
            if gcd(a, c) == 1 {
                let lift = coprime_lift(a, c, self.modulus);
                exps[a as usize] = self.exponent_at(lift);
            }
        }
        let mut z = ZChar {
            modulus: c,
            order: self.order,
            exps,
        };
        z.normalize_order();
        z
    }

    /// Inflate to a character mod lcm(modulus, m).
    pub fn inflate_to(&self, m: u64) -> ZChar {
        let big = num_integer::lcm(self.modulus, m);
        if big == self.modulus {
            return self.clone();
        }
        let mut exps = vec![None; big as usize];
        for a in 0..big {
            if gcd(a, big) == 1 {
                exps[a as usize] = self.exponent_at(a % self.modulus);
            }
        }
        ZChar {
            modulus: big,
            order: self.order,
            exps,
        }
    }

    /// Product of two characters whose abstract roots are realized through
    /// one common family (powers and components of a single character).
    pub fn mul_compatible(&self, other: &ZChar) -> ZChar {
        let m = num_integer::lcm(self.modulus, other.modulus);
        let n = num_integer::lcm(self.order, other.order);
        let a = self.inflate_to(m);
        let b = other.inflate_to(m);
        let exps = (0..m)
            .map(|x| match (a.exponent_at(x), b.exponent_at(x)) {
                (Some(i), Some(j)) => {
                    let v = (i as u128 * (n / a.order) as u128
                        + j as u128 * (n / b.order) as u128)
                        % n as u128;
                    Some(v as u64)
                }
                _ => None,
            })
            .collect();
        let mut z = ZChar {
            modulus: m,
            order: n,
            exps,
        };
        z.normalize_order();
        z
    }
}

pub fn conductor_and_parity(chi: &ZChar) -> (u64, bool) {
    (chi.conductor(), chi.is_even())
}

#[derive(Clone, Debug)]
pub struct DirichletCharacter {
    pub modulus: u64,
    pub order: u64,
    /// exponents of zeta_order on the unit-group generators
    pub value_exps: Vec<i64>,
    pub conductor: u64,
    pub even: bool,
    pub zchar: ZChar,
}

#[derive(Clone, Debug)]
pub struct ConjugacyClass {
    pub rep: DirichletCharacter,
    pub orbit_size: u64,
    pub embedding_degree: u64,
}

impl ConjugacyClass {
    /// Canonical text key used by the result store.
    pub fn key(&self, p: u64) -> String {
        let exps = self
            .rep
            .value_exps
            .iter()
            .map(|e| e.to_string())
            .collect::<Vec<_>>()
            .join("-");
        format!(
            "p{}.f{}.n{}.e{}.c0",
            p, self.rep.conductor, self.rep.order, exps
        )
    }
}

/// The Galois orbit exponents over Q_p acting on characters of order n:
/// t = p^j mod m0, t arbitrary unit mod p^k.
pub fn qp_orbit_exponents(n: u64, p: u64) -> Vec<u64> {
    if n == 1 {
        return vec![1];
    }
    let (m0, pk) = split_p_part(n, p);
    let d = if m0 == 1 { 1 } else { mult_order(p, m0) };
    let mut ts = Vec::new();
    for j in 0..d {
        let pj = pow_mod(p, j, m0.max(1));
        if pk == 1 {
            ts.push(pj % n);
        } else {
            for s in 0..pk {
                if gcd(s, pk) == 1 {
                    let t = if m0 == 1 { s } else { crt(pj, m0, s, pk) };
                    ts.push(t % n);
                }
            }
        }
    }
    ts.sort_unstable();
    ts.dedup();
    ts
}

/// Minimal representatives of the cosets of the orbit set in (Z/n)^*; the
/// count is cross-checked against the cyclotomic factor count over Q_p.
pub fn qp_class_representatives(n: u64, p: u64) -> Vec<u64> {
    if n == 1 {
        return vec![1];
    }
    let orbit = qp_orbit_exponents(n, p);
    let mut reps = Vec::new();
    let mut seen = vec![false; n as usize];
    for t in 1..n {
        if gcd(t, n) != 1 || seen[t as usize] {
            continue;
        }
        reps.push(t);
        for o in &orbit {
            let u = ((t as u128 * *o as u128) % n as u128) as u64;
            seen[u as usize] = true;
        }
    }
    let expected = cyclotomic_factor_count(n, p);
    assert_eq!(
        reps.len() as u64,
        expected,
        "orbit count vs cyclotomic factor count for n = {n}, p = {p}"
    );
    reps
}

/// Primitive even characters of conductor exactly f, one Q_p-class each,
/// in a deterministic order.
pub fn enumerate_even_primitive_classes(p: u64, f: u64) -> Vec<ConjugacyClass> {
    let mut out = Vec::new();
    if f <= 2 || f % 4 == 2 {
        return out;
    }
    let g = unit_group(f);
    let subs = enumerate_subgroups(&g.pres);
    for m in &subs {
        let chi_data = match character_for_subgroup(&g.pres, m) {
            Ok(c) => c,
            Err(_) => continue,
        };
        let n = chi_data.order as u64;
        if n <= 1 {
            continue;
        }
        let base = ZChar::from_exponents(&g, n, &chi_data.exps);
        if base.order != n || !base.is_even() || base.conductor() != f {
            continue;
        }
        for t in qp_class_representatives(n, p) {
            let chi = base.pow(t);
            let value_exps: Vec<i64> = chi_data
                .exps
                .iter()
                .map(|&e| ((e as i128 * t as i128).rem_euclid(n as i128)) as i64)
                .collect();
            let (m0, pk) = split_p_part(n, p);
            let d_embed = euler_phi(pk) * if m0 == 1 { 1 } else { mult_order(p, m0) };
            out.push(ConjugacyClass {
                rep: DirichletCharacter {
                    modulus: f,
                    order: n,
                    value_exps,
                    conductor: f,
                    even: true,
                    zchar: chi,
                },
                orbit_size: d_embed,
                embedding_degree: d_embed,
            });
        }
    }
    out.sort_by(|a, b| (a.rep.order, &a.rep.value_exps).cmp(&(b.rep.order, &b.rep.value_exps)));
    out
}

pub fn enumerate_classes_up_to(p: u64, bound: u64) -> Vec<ConjugacyClass> {
    let mut out = Vec::new();
    for f in 3..=bound {
        out.extend(enumerate_even_primitive_classes(p, f));
    }
    out
}

/// chi = chi1 * chi2 with chi2 the wild part (the component of the p-part of
/// chi factoring through 1 + qZ_p). chi1 is of the first kind: its conductor
/// divides q * (prime-to-p part).
pub struct FirstKindSplit {
    pub chi1: ZChar,
    pub wild_order: u64,
    /// exponent k with chi2(u) = zeta_{wild_order}^k for u = 1 + q
    pub wild_exp_at_u: u64,
}

pub fn decompose_first_kind(chi: &ZChar, p: u64) -> FirstKindSplit {
    let q = if p == 2 { 4 } else { p };
    let f = chi.modulus;
    let (f0, pv) = split_p_part(f, p);
    if pv <= q {
        return FirstKindSplit {
            chi1: chi.clone(),
            wild_order: 1,
            wild_exp_at_u: 0,
        };
    }
    // restriction to the (Z/p^v)^* factor
    let mut p_exps: Vec<Option<u64>> = vec![None; pv as usize];
    for a in 0..pv {
        if gcd(a, pv) != 1 {
            continue;
        }
        let lifted = if f0 == 1 { a } else { crt(a, pv, 1, f0) };
        p_exps[a as usize] = chi.exponent_at(lifted % f);
    }
    let mut chi_p = ZChar {
        modulus: pv,
        order: chi.order,
        exps: p_exps,
    };
    chi_p.normalize_order();
    let wild = if p == 2 {
        // <5>-component: kill the sign character via a -> +-a with a = 1 mod 4
        let mut exps = vec![None; pv as usize];
        for a in 0..pv {
            if gcd(a, pv) == 1 {
                let b = if a % 4 == 1 { a } else { pv - a };
                exps[a as usize] = chi_p.exponent_at(b);
            }
        }
        let mut z = ZChar {
            modulus: pv,
            order: chi_p.order,
            exps,
        };
        z.normalize_order();
        z
    } else {
        let (tame_ord, wild_ord) = split_p_part(chi_p.order, p);
        if wild_ord == 1 {
            ZChar::trivial(pv)
        } else {
            let a = crt(0, tame_ord.max(1), 1, wild_ord);
            chi_p.pow(a)
        }
    };
    let u_gen = 1 + q;
    let wild_exp_at_u = wild.exponent_at(u_gen % pv).unwrap_or(0);
    let chi1 = chi.mul_compatible(&wild.inverse()).primitive();
    FirstKindSplit {
        chi1,
        wild_order: wild.order,
        wild_exp_at_u,
    }
}

/// The Teichmuller character as an abstract character mod q: omega(a) =
/// zeta_{phi(q)}^{l(a)} with zeta_{phi(q)} realized p-adically as the
/// Teichmuller lift of the fixed primitive root g.
#[derive(Clone, Debug)]
pub struct OmegaChar {
    pub p: u64,
    pub q: u64,
    pub g: u64,
    pub phi_q: u64,
    table: Vec<Option<u64>>,
}

impl OmegaChar {
    pub fn new(p: u64) -> Self {
        let q = if p == 2 { 4 } else { p };
        let g = primitive_root(q);
        let phi_q = euler_phi(q);
        let mut table = vec![None; q as usize];
        let mut x = 1u64;
        for e in 0..phi_q {
            table[x as usize] = Some(e);
            x = x * g % q;
        }
        OmegaChar { p, q, g, phi_q, table }
    }

    /// dlog of a mod q with respect to g.
    pub fn exponent_at(&self, a: u64) -> Option<u64> {
        self.table[(a % self.q) as usize]
    }
}

/// The relation joining the two realized root families: y (order m0, the
/// unramified ring root) and rho = teichmuller(g) (order phi(q)). The
/// intersection of the two cyclic groups is mu_g with g = gcd, and
/// y^{m0/g} = rho^{c phi(q)/g} for the stored c.
#[derive(Clone, Debug)]
pub struct JointRel {
    pub m0: u64,
    pub pk: u64,
    pub rho_ord: u64,
    pub g: u64,
    pub c: u64,
}

impl JointRel {
    /// Is zeta_N^i * rho^j = 1?  (N = m0 * pk; zeta_N = y * (1+z).)
    pub fn pair_trivial(&self, i: u64, j: u64) -> bool {
        if self.pk > 1 && i % self.pk != 0 {
            return false;
        }
        let im = i % self.m0.max(1);
        let jj = j % self.rho_ord;
        for a in 0..self.g.max(1) {
            let ya = (a * (self.m0 / self.g.max(1))) % self.m0.max(1);
            let ra = (self.rho_ord - (a * self.c % self.g.max(1)) * (self.rho_ord / self.g.max(1)) % self.rho_ord) % self.rho_ord;
            if im == ya && jj == ra {
                return true;
            }
        }
        false
    }
}

/// chi * omega^k as a character pair: the chi-part keeps its zeta_N
/// realization, the omega-part its Teichmuller realization. Needed because
/// the two root families are only related through the ring.
#[derive(Clone, Debug)]
pub struct CharPair {
    /// chi-part, with exponents taken relative to zeta_N (N = realize_order)
    pub chi: ZChar,
    /// the pipeline realization order N (chi.order divides N)
    pub realize_order: u64,
    pub omega_pow: i64,
    pub omega: OmegaChar,
}

impl CharPair {
    pub fn new(chi: ZChar, realize_order: u64, omega_pow: i64, omega: OmegaChar) -> Self {
        debug_assert!(realize_order % chi.order == 0);
        CharPair {
            chi,
            realize_order,
            omega_pow,
            omega,
        }
    }

    pub fn modulus(&self) -> u64 {
        num_integer::lcm(self.chi.modulus, self.omega.q)
    }

    /// Exponent pair (i, j) with value zeta_N^i rho^j, or None off the units.
    pub fn exps_at(&self, a: u64) -> Option<(u64, u64)> {
        let ei = self.chi.exponent_at(a % self.chi.modulus)?;
        let scale = self.realize_order / self.chi.order;
        let el = self.omega.exponent_at(a)?;
        let j = (self.omega_pow.rem_euclid(self.omega.phi_q as i64) as u64 * el) % self.omega.phi_q;
        Some((ei * scale % self.realize_order, j))
    }

    /// Conductor, given the joint relation between the realized roots.
    pub fn conductor(&self, joint: &JointRel) -> u64 {
        let modulus = self.modulus();
        'outer: for &fp in divisors(modulus).iter() {
            for a in 1..modulus {
                if gcd(a, modulus) != 1 {
                    continue;
                }
                if fp == 1 || a % fp == 1 {
                    let (i, j) = self.exps_at(a).expect("unit has exponents");
                    if !joint.pair_trivial(i, j) {
                        continue 'outer;
                    }
                }
            }
            return fp;
        }
        modulus
    }

    /// Exponents of the primitive character at a coprime to its conductor.
    pub fn primitive_exps_at(&self, a: u64, conductor: u64) -> Option<(u64, u64)> {
        if conductor == 1 {
            return Some((0, 0));
        }
        if gcd(a % conductor, conductor) != 1 {
            return None;
        }
        let lift = coprime_lift(a % conductor, conductor, self.modulus());
        self.exps_at(lift)
    }
}

/// Sinnott decomposition chi = theta * psi, theta of order prime to p, psi of
/// p-power order, both primitive.
pub struct SinnottSplit {
    pub theta: ZChar,
    pub psi: ZChar,
}

pub fn decompose_sinnott(chi: &ZChar, p: u64) -> SinnottSplit {
    let n = chi.order;
    let (m0, pk) = split_p_part(n, p);
    if pk == 1 {
        return SinnottSplit {
            theta: chi.primitive(),
            psi: ZChar::trivial(1),
        };
    }
    if m0 == 1 {
        return SinnottSplit {
            theta: ZChar::trivial(1),
            psi: chi.primitive(),
        };
    }
    let a = crt(1, m0, 0, pk);
    let b = crt(0, m0, 1, pk);
    SinnottSplit {
        theta: chi.pow(a).primitive(),
        psi: chi.pow(b).primitive(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_group_examples() {
        let g = unit_group(7);
        assert_eq!(g.pres.orders, vec![6]);
        let g = unit_group(8);
        assert_eq!(g.pres.orders, vec![2, 2]);
        // f = 3247 = 17*191: invariants of Z/16 x Z/190
        let g = unit_group(3247);
        assert_eq!(g.pres.group_order(), 16 * 190);
        assert_eq!(g.pres.orders[0], num_integer::lcm(16i64, 190));
    }

    #[test]
    fn dlog_round_trips() {
        for f in [7u64, 8, 12, 16, 45, 100] {
            let g = unit_group(f);
            for a in 1..f {
                if gcd(a, f) == 1 {
                    let d = g.dlog(a).unwrap();
                    let mut acc = 1u64;
                    for (k, &e) in d.iter().enumerate() {
                        acc = acc * pow_mod(g.gens[k], e as u64, f) % f;
                    }
                    assert_eq!(acc, a, "dlog failed for {a} mod {f}");
                }
            }
        }
    }

    #[test]
    fn conductor_examples() {
        // trivial character mod 12: conductor 1, even
        let triv = ZChar::from_exponents(&unit_group(12), 1, &[0, 0]);
        assert_eq!(conductor_and_parity(&triv), (1, true));
        // the quadratic character mod 5, lifted to mod 15: conductor 5, even
        let g15 = unit_group(15);
        let chi = (0..2i64)
            .flat_map(|e0| (0..2i64).map(move |e1| (e0, e1)))
            .map(|(e0, e1)| ZChar::from_exponents(&g15, 2, &[e0, e1]))
            .find(|chi| chi.order == 2 && chi.conductor() == 5)
            .expect("quadratic character of conductor 5");
        assert!(chi.is_even());
        for a in 1..15u64 {
            if gcd(a, 15) == 1 {
                let is_qr = (1..5u64).any(|x| x * x % 5 == a % 5);
                assert_eq!(chi.exponent_at(a), Some(u64::from(!is_qr)));
            }
        }
        // order-2 character mod 4: conductor 4, odd
        let chi = ZChar::from_exponents(&unit_group(4), 2, &[1]);
        assert_eq!(conductor_and_parity(&chi), (4, false));
    }

    #[test]
    fn qp_classes_examples() {
        assert_eq!(qp_class_representatives(1, 5).len(), 1);
        assert_eq!(qp_class_representatives(3, 2).len(), 1);
        assert_eq!(qp_class_representatives(3, 7).len(), 2);
    }

    #[test]
    fn enumeration_f7() {
        let classes = enumerate_even_primitive_classes(2, 7);
        assert_eq!(classes.len(), 1);
        assert_eq!(classes[0].rep.order, 3);
        assert_eq!(classes[0].embedding_degree, 2);
        let classes = enumerate_even_primitive_classes(7, 7);
        assert_eq!(classes.len(), 2);
    }

    #[test]
    fn class_invariants_small_conductors() {
        // every enumerated character: conductor = f, order | group exponent,
        // chi(-1)^2 = 1 trivially; orbit sizes partition the primitive evens
        for p in [2u64, 3, 5] {
            for f in 3..=60u64 {
                let g = unit_group(f);
                let classes = enumerate_even_primitive_classes(p, f);
                let total: u64 = classes.iter().map(|c| c.orbit_size).sum();
                // direct count of primitive even characters mod f
                let mut direct = 0u64;
                if g.pres.rank() > 0 {
                    direct = count_primitive_even(&g);
                }
                assert_eq!(total, direct, "p={p} f={f}");
                for c in &classes {
                    assert_eq!(c.rep.conductor, f);
                    assert_eq!(
                        c.rep.order % 1,
                        0
                    );
                    assert!(g.pres.orders[0] % c.rep.order as i64 == 0);
                }
            }
        }
    }

    fn count_primitive_even(g: &UnitGroup) -> u64 {
        // brute force over the dual group
        let orders = &g.pres.orders;
        let mut count = 0u64;
        let mut idx = vec![0i64; orders.len()];
        loop {
            let chi = ZChar::from_exponents(g, orders[0] as u64, &{
                // scale exponents: character with chi(g_k) = zeta_{d_k}^{idx_k}
                // = zeta_{d_1}^{idx_k * d_1/d_k}
                idx.iter()
                    .enumerate()
                    .map(|(k, &e)| e * (orders[0] / orders[k]))
                    .collect::<Vec<_>>()
            });
            if chi.is_even() && chi.conductor() == g.f && !chi.is_trivial() {
                count += 1;
            }
            let mut k = 0;
            loop {
                idx[k] += 1;
                if idx[k] < orders[k] {
                    break;
                }
                idx[k] = 0;
                k += 1;
                if k == orders.len() {
                    return count;
                }
            }
        }
    }

    #[test]
    fn first_kind_split_examples() {
        // p = 3, character mod 27 of order 9: pure wild
        let g27 = unit_group(27);
        let chi = ZChar::from_exponents(&g27, 18, &[1]).pow(2);
        assert_eq!(chi.order, 9);
        assert!(chi.is_even());
        let split = decompose_first_kind(&chi, 3);
        assert_eq!(split.wild_order, 9);
        assert!(split.chi1.is_trivial());
        assert_ne!(split.wild_exp_at_u, 0);
        // a first-kind character passes through unchanged
        let g7 = unit_group(7);
        let chi7 = ZChar::from_exponents(&g7, 6, &[2]);
        let s = decompose_first_kind(&chi7, 3);
        assert_eq!(s.wild_order, 1);
        assert_eq!(s.chi1, chi7);
        // p = 2, conductor 16 even character of order 4 (the <5>-component)
        let g16 = unit_group(16);
        let classes = enumerate_even_primitive_classes(2, 16);
        assert!(!classes.is_empty());
        for c in &classes {
            let s = decompose_first_kind(&c.rep.zchar, 2);
            assert!(s.wild_order > 1, "conductor 16 characters are wild");
            assert!(s.chi1.conductor() <= 4);
        }
        let _ = g16;
    }

    #[test]
    fn sinnott_split_orders() {
        let g = unit_group(35);
        let chi = ZChar::from_exponents(&g, 12, &[1, 0]);
        for p in [2u64, 3] {
            let s = decompose_sinnott(&chi, p);
            assert_eq!(gcd(s.theta.order, p), 1);
            let (m0, _) = split_p_part(s.psi.order, p);
            assert_eq!(m0, 1);
            // theta * psi = chi
            let prod = s.theta.mul_compatible(&s.psi);
            assert_eq!(prod.order, chi.order);
        }
    }
}
