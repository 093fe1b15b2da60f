//! Verdict routines: the Gross rank and order-of-vanishing check at s = 0,
//! the non-vanishing verdict over the positive integers, the mu = 0 check,
//! Sinnott's lambda formula with its layer-index bookkeeping, and the
//! lambda-statistics family membership.

use crate::arith::{big_pow, big_val, coprime_lift, gcd};
use crate::dirichlet::{decompose_sinnott, CharPair, JointRel, OmegaChar, ZChar};
use crate::error::{Error, Result};
use crate::iwasawa::LSetup;
use crate::ring::{angle_scalar, Val};
use crate::roots::IntegralityVerdict;
use crate::series::SeriesApprox;
use num_bigint::BigUint;
use num_traits::One;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GrossData {
    pub r_p: u32,
    pub r_prime: u32,
    pub matched: bool,
}

/// r_p(chi) for k = Q: 1 exactly when chi omega^{-1} is trivial on the
/// decomposition subgroup at p inside (Z/lcm(f, q))^*, generated by the
/// kernel of reduction to the prime-to-p part together with a lift of p.
pub fn gross_rank(chi: &ZChar, p: u64, omega: &OmegaChar, joint: &JointRel) -> u32 {
    let eta = CharPair::new(chi.clone(), chi.order.max(1), -1, omega.clone());
    let modulus = eta.modulus();
    let (m0_part, _pv) = crate::zpoly::split_p_part(modulus, p);
    // eta trivial on all units = 1 mod m0_part?
    for a in 1..modulus {
        if gcd(a, modulus) != 1 || (m0_part > 1 && a % m0_part != 1) {
            continue;
        }
        let (i, j) = eta.exps_at(a).expect("unit");
        if !joint.pair_trivial(i, j) {
            return 0;
        }
    }
    // eta trivial at a lift of p coprime to the modulus
    if m0_part == 1 {
        return 1;
    }
    let lift = coprime_lift(p % m0_part, m0_part, modulus);
    let (i, j) = eta.exps_at(lift).expect("unit lift of p");
    u32::from(joint.pair_trivial(i, j))
}

/// Order of vanishing of G at T = u - 1 by evaluating G and successive
/// derivatives until a certified nonzero shows up.
pub fn gross_check(setup: &LSetup, g: &SeriesApprox, r_p: u32) -> Result<GrossData> {
    let prec = ((g.min_prec().max(2) as u32) / setup.ring.e()).max(2) + setup.cyc.w + 2;
    let t0 = setup.ring.from_i64(setup.cyc.u as i64 - 1, prec);
    let mut cur = g.clone();
    let cap = (r_p + 3).max(4);
    for k in 0..cap {
        let v = cur.eval(&t0)?;
        match v.valuation() {
            Some(val) if val < v.pi_prec => {
                return Ok(GrossData {
                    r_p,
                    r_prime: k,
                    matched: k == r_p,
                });
            }
            _ => {
                cur = cur.derivative();
                if cur.is_empty() {
                    break;
                }
            }
        }
    }
    Err(Error::PrecisionExhausted {
        what: "gross derivative chain",
        have: g.min_prec(),
        need: g.min_prec() + 4,
    })
}

/// mu = 0 for odd p and mu = [Q:Q] = 1 for p = 2 (in pi-units: e).
pub fn mu_check(p: u64, mu_pi: Val, e: u32) -> bool {
    if p == 2 {
        mu_pi == e as i64
    } else {
        mu_pi == 0
    }
}

/// Analysis of a single nonzero zero of L_p on Z_p.
#[derive(Clone, Debug)]
pub struct RootAnalysis {
    /// residue of the zero s in Z_p, little-endian base-p digits
    pub s_digits: Vec<u64>,
    pub s_prec: u32,
    pub verdict: IntegralityVerdict,
    /// true when the residue excludes every integer 1..=m_max
    pub excludes_small_integers: bool,
}

#[derive(Clone, Debug)]
pub enum MainConjectureVerdict {
    /// lambda = 0 for G#: no zero anywhere in Z_p other than s = 0
    NoNonzeroZero,
    /// every root analyzed; counterexample_candidate when some root looks
    /// like an integer in 1..=m_max
    RootsAnalyzed {
        roots: Vec<RootAnalysis>,
        counterexample_candidate: bool,
    },
}

impl MainConjectureVerdict {
    pub fn flagged(&self) -> bool {
        match self {
            MainConjectureVerdict::NoNonzeroZero => false,
            MainConjectureVerdict::RootsAnalyzed {
                counterexample_candidate,
                ..
            } => *counterexample_candidate,
        }
    }
}

/// The verdict for m = 1..m_max: roots mapped to s-space must avoid the
/// integers; an s-residue of prec E with p^E > m_max excludes them all unless
/// the residue itself is a small integer (then it is flagged).
pub fn main_conjecture_verdict(
    p: u64,
    roots: &[(BigUint, u32, IntegralityVerdict)],
    m_max: u64,
) -> MainConjectureVerdict {
    if roots.is_empty() {
        return MainConjectureVerdict::NoNonzeroZero;
    }
    let mut out = Vec::new();
    let mut counterexample = false;
    for (s_res, s_prec, verdict) in roots {
        let pe = big_pow(p, *s_prec);
        let as_int = s_res % &pe;
        let small = as_int <= BigUint::from(m_max) && as_int >= BigUint::one();
        let covers = pe > BigUint::from(m_max);
        let excludes = covers && !small;
        if small {
            counterexample = true;
        }
        out.push(RootAnalysis {
            s_digits: crate::arith::big_digits(&as_int, p, *s_prec),
            s_prec: *s_prec,
            verdict: verdict.clone(),
            excludes_small_integers: excludes,
        });
    }
    MainConjectureVerdict::RootsAnalyzed {
        roots: out,
        counterexample_candidate: counterexample,
    }
}

/// Formula-level input: lambda of the prime-to-p-order part (or of the
/// trivial character), the layer index e >= 0 of the base field inside the
/// cyclotomic tower, and the residue norms of the primes dividing the
/// conductor of the p-power part, each with its split flag.
#[derive(Clone, Debug)]
pub struct SinnottInput {
    pub lambda_base: i64,
    pub layer_index: u32,
    /// (norm, split flag)
    pub split_primes: Vec<(u64, bool)>,
}

/// a_N = v_p((<N> - 1)/q).
pub fn a_invariant(p: u64, norm: u64) -> u32 {
    let q: u32 = if p == 2 { 2 } else { 1 };
    let prec = 64.min((62.0 / (p as f64).log2()) as u32);
    let angle = angle_scalar(p, norm, prec).expect("norm is prime to p");
    let am1 = (&angle + big_pow(p, prec) - BigUint::one()) % big_pow(p, prec);
    let v = big_val(&am1, p).unwrap_or(prec);
    v - q
}

/// lambda(theta psi) = lambda(theta) + sum over split primes of p^{a_N - e}.
pub fn sinnott_formula(input: &SinnottInput, p: u64) -> Result<i64> {
    let mut lambda = input.lambda_base;
    for &(norm, split) in &input.split_primes {
        if !split {
            continue;
        }
        let a = a_invariant(p, norm);
        if a < input.layer_index {
            return Err(Error::invalid(format!(
                "contributing prime with a = {a} below the layer index {}",
                input.layer_index
            )));
        }
        lambda += (p as i64).pow(a - input.layer_index);
    }
    Ok(lambda)
}

/// Sinnott's formula over Q: chi = theta psi with psi the p-power-order part;
/// a prime l | cond(psi), l != p contributes p^{a_l} exactly when
/// theta omega^{p-2}(l) = 1 with l unramified in that character's field.
/// lambda(theta) comes from the series pipeline (lambda_theta), with the
/// trivial theta contributing lambda = -1.
pub fn lambda_via_sinnott_q(
    chi: &ZChar,
    p: u64,
    lambda_theta: i64,
    omega: &OmegaChar,
    joint: &JointRel,
) -> Result<i64> {
    let split = decompose_sinnott(chi, p);
    if split.psi.is_trivial() {
        return Ok(lambda_theta);
    }
    let test_char = CharPair::new(
        split.theta.clone(),
        chi.order.max(1),
        (p as i64) - 2,
        omega.clone(),
    );
    let f_test = test_char.conductor(joint);
    let f_psi = split.psi.conductor();
    let mut input = SinnottInput {
        lambda_base: lambda_theta,
        layer_index: 0,
        split_primes: vec![],
    };
    for (l, _) in crate::arith::factorize(f_psi) {
        if l == p {
            continue;
        }
        // unramified and split in the fixed field of theta omega^{p-2}
        let split_flag = if f_test % l == 0 {
            false
        } else {
            match test_char.primitive_exps_at(l % f_test.max(1), f_test) {
                Some((i, j)) => joint.pair_trivial(i, j),
                None => false,
            }
        };
        input.split_primes.push((l, split_flag));
    }
    sinnott_formula(&input, p)
}

/// Membership of the class representative in the statistics family: chi of
/// the form omega^i psi with psi of conductor and order prime to p and both
/// psi and i even; returns the embedding degree d.
pub fn x_family_degree(chi: &ZChar, p: u64) -> Option<u64> {
    if chi.is_trivial() {
        return None;
    }
    let q = if p == 2 { 4 } else { p };
    let (_, pk_order) = crate::zpoly::split_p_part(chi.order, p);
    if pk_order != 1 {
        return None; // order must be prime to p
    }
    let f = chi.modulus;
    let (f0, fp) = crate::zpoly::split_p_part(f, p);
    if fp > q {
        return None; // wild conductor excluded
    }
    // psi := prime-to-p conductor component; both psi and omega^i even
    if fp > 1 {
        // the p-component of chi is omega^i: even iff trivial at -1 mod q
        let minus_one_lift = if f0 == 1 {
            f - 1
        } else {
            crate::arith::crt(fp - 1, fp, 1, f0)
        };
        if chi.exponent_at(minus_one_lift) != Some(0) {
            return None;
        }
        // psi-part parity: chi(-1 mod f0 lift)
        let psi_minus = if f0 == 1 {
            1
        } else {
            crate::arith::crt(1, fp, f0 - 1, f0)
        };
        if chi.exponent_at(psi_minus % f) != Some(0) {
            return None;
        }
    }
    let (m0, _) = crate::zpoly::split_p_part(chi.order, p);
    let d = if m0 == 1 {
        1
    } else {
        crate::arith::mult_order(p, m0)
    };
    Some(d)
}

/// One aggregated record for the two cumulative statistics curves.
#[derive(Clone, Debug)]
pub struct StatsPoint {
    pub conductor: u64,
    pub lambda_positive_weight: u64,
    pub model_weight: f64,
}

pub fn stats_weight(d: u64, p: u64, lambda: i64, orbit: u64) -> StatsPoint {
    StatsPoint {
        conductor: 0,
        lambda_positive_weight: if lambda > 0 { orbit } else { 0 },
        model_weight: orbit as f64 * (p as f64).powi(-(d as i32)),
    }
}

/// Type-W structural facts: lambda(chi) = lambda(G) - lambda(H).
pub fn lambda_of_chi(lambda_g: i64, h: &crate::iwasawa::HPoly) -> i64 {
    lambda_g - h.lambda()
}

/// Planted regression helper: a series with a double root at u - 1.
pub fn plant_double_trivial_zero(setup: &LSetup, len: usize, prec: u32) -> SeriesApprox {
    let ring = &setup.ring;
    let t0 = ring.from_i64(setup.cyc.u as i64 - 1, prec);
    let mut unit_coeffs = vec![ring.one(prec)];
    for i in 1..len {
        unit_coeffs.push(ring.from_i64(((i as i64) * 3 + 1) % 7, prec));
    }
    let unit = SeriesApprox::new(ring.clone(), unit_coeffs, 32, 0);
    let neg = t0.neg();
    let one = ring.one(prec);
    unit.mul_linear(&neg, &one).mul_linear(&neg, &one)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dirichlet::unit_group;
    use crate::ring::{compute_joint_rel, make_ring};

    #[test]
    fn gross_rank_examples() {
        // chi = omega (odd!) is not in our even pipeline; use the defining
        // test cases directly.
        // p = 5, chi = omega^2 (even quadratic mod 5): eta = omega, nontrivial
        // on the inertia part: r_p = 0.
        let g5 = unit_group(5);
        let chi = ZChar::from_exponents(&g5, 4, &[2]);
        let ring = make_ring(5, 2, 1, 8).unwrap();
        let omega = OmegaChar::new(5);
        let joint = compute_joint_rel(&ring, &omega);
        assert_eq!(gross_rank(&chi, 5, &omega, &joint), 0);

        // p = 2, chi of order 3 mod 7: chi(2) != 1 since 2 = 3^2 in (Z/7)^*:
        // r_p = 0
        let g7 = unit_group(7);
        let chi = ZChar::from_exponents(&g7, 6, &[2]);
        let ring = make_ring(2, 3, 1, 8).unwrap();
        let omega = OmegaChar::new(2);
        let joint = compute_joint_rel(&ring, &omega);
        assert_eq!(gross_rank(&chi, 2, &omega, &joint), 0);

        // p = 7, chi of order 3 mod 7 with chi = omega^2-style: eta can be
        // trivial on the decomposition group when chi omega^{-1} dies on it;
        // the quadratic character mod 29 with p = 29... keep to a direct
        // positive case: chi of conductor 11, order 5, p = 11: eta = chi
        // omega^{-1} has chi trivial at the p-lift iff 11-power residue: the
        // decomposition group is everything (m0_part = 11): r_p = 0 unless
        // eta trivial; sanity: result is 0 or 1
        let g11 = unit_group(11);
        let chi = ZChar::from_exponents(&g11, 10, &[2]);
        let ring = make_ring(11, 5, 1, 6).unwrap();
        let omega = OmegaChar::new(11);
        let joint = compute_joint_rel(&ring, &omega);
        let r = gross_rank(&chi, 11, &omega, &joint);
        assert!(r <= 1);
    }

    #[test]
    fn sinnott_formula_paper_rows() {
        // lambda_base = -1, e = 0, p = 2, norms 17 (a = 2) and 191 (a = 4):
        // 2^2 + 2^4 - 1 = 19
        assert_eq!(a_invariant(2, 17), 2);
        assert_eq!(a_invariant(2, 191), 4);
        let i = SinnottInput {
            lambda_base: -1,
            layer_index: 0,
            split_primes: vec![(17, true), (191, true)],
        };
        assert_eq!(sinnott_formula(&i, 2).unwrap(), 19);
        // quadratic-field rows at formula level:
        // e = 1, norm 257 (a = 6): 2^5 - 1 = 31
        assert_eq!(a_invariant(2, 257), 6);
        let i = SinnottInput {
            lambda_base: -1,
            layer_index: 1,
            split_primes: vec![(257, true)],
        };
        assert_eq!(sinnott_formula(&i, 2).unwrap(), 31);
        // lambda_base = 0, e = 0, norms 3 (a = 0) and 31 (a = 3): 2^0 + 2^3 = 9
        assert_eq!(a_invariant(2, 3), 0);
        assert_eq!(a_invariant(2, 31), 3);
        let i = SinnottInput {
            lambda_base: 0,
            layer_index: 0,
            split_primes: vec![(3, true), (31, true)],
        };
        assert_eq!(sinnott_formula(&i, 2).unwrap(), 9);
    }

    #[test]
    fn sinnott_q_conductor_2917() {
        // p = 3, f = 2917 prime, any order-3^j character: 2916 = 4 * 3^6,
        // a_2917 = v_3(2916/3) = 5 (hmm: v_3((<2917> - 1)/3))
        assert_eq!(a_invariant(3, 2917), 5);
        let g = unit_group(2917);
        // order-3 character
        let chi = ZChar::from_exponents(&g, 2916, &[1]).pow(2916 / 3);
        assert_eq!(chi.order, 3);
        assert!(chi.is_even());
        let ring = make_ring(3, 1, 3, 6).unwrap();
        let omega = OmegaChar::new(3);
        let joint = compute_joint_rel(&ring, &omega);
        let lam = lambda_via_sinnott_q(&chi, 3, -1, &omega, &joint).unwrap();
        assert_eq!(lam, 242);
    }

    #[test]
    fn verdict_digit_exclusion() {
        // a residue that is a small integer gets flagged
        let roots = vec![(
            BigUint::from(3u32),
            30,
            IntegralityVerdict::IntegerSuspect { checked_to: 36 },
        )];
        let v = main_conjecture_verdict(2, &roots, 100_000_000);
        assert!(v.flagged());
        // a clearly non-integer residue excludes all m <= 10^8 once p^E is big
        let big = BigUint::from(123_456_789_012_345_678u64);
        let roots = vec![(
            big,
            60,
            IntegralityVerdict::NonzeroNonintegerLikely { checked_to: 60 },
        )];
        let v = main_conjecture_verdict(2, &roots, 100_000_000);
        assert!(!v.flagged());
    }

    #[test]
    fn x_family_examples() {
        // p = 3: even quadratic characters of conductor 5, 8, 13, 17 are in
        // the family with d = 1; conductor 12 and 21 are divisible by 3
        for f in [5u64, 8, 13, 17] {
            let classes = crate::dirichlet::enumerate_even_primitive_classes(3, f);
            let quad: Vec<_> = classes
                .iter()
                .filter(|c| c.rep.order == 2)
                .collect();
            assert_eq!(quad.len(), 1, "conductor {f}");
            assert_eq!(x_family_degree(&quad[0].rep.zchar, 3), Some(1));
        }
        for f in [12u64, 21] {
            let classes = crate::dirichlet::enumerate_even_primitive_classes(3, f);
            for c in classes.iter().filter(|c| c.rep.order == 2) {
                assert_eq!(x_family_degree(&c.rep.zchar, 3), None);
            }
        }
    }
}
