//! Per-class orchestration: build the Iwasawa series at escalating length and
//! level until mu, lambda, the distinguished polynomial, the roots and the
//! simplicity criteria are all certified; then produce the conjecture report
//! for the class.

use crate::arith::{big_pow, gcd};
use crate::bern::ShiftedValue;
use crate::conj::{
    gross_check, gross_rank, lambda_via_sinnott_q, main_conjecture_verdict, mu_check,
    x_family_degree, GrossData, MainConjectureVerdict,
};
use crate::dirichlet::{decompose_sinnott, ConjugacyClass, ZChar};
use crate::error::{Error, Result};
use crate::iwasawa::{
    calibrate, lp_direct_first_kind, oracle_consistent, stickelberger_series, Convention, GSeries,
    LSetup,
};
use crate::newton::{simplicity_criteria, SegmentVerdict, SimplicityReport};
use crate::ring::Val;
use crate::roots::{
    nonintegrality_heuristic, positive_valuation_roots, zero_map_t_to_s, IntegralityVerdict,
    RootCertificate,
};
use crate::weier::{gsharp_reduce, mu_lambda, weierstrass_distinguished};
use num_bigint::BigUint;
use num_traits::Zero;
use std::collections::HashMap;
use std::sync::RwLock;

#[derive(Clone, Debug)]
pub struct PipelineConfig {
    pub p: u64,
    pub start_len: usize,
    /// coefficient digits wanted before analysis starts
    pub target_digits: u32,
    pub m_max: u64,
    pub lambda_cap: usize,
    /// digits for the non-integrality comparison base E
    pub refine_digits: u32,
    pub max_attempts: u32,
}

impl PipelineConfig {
    pub fn new(p: u64) -> Self {
        PipelineConfig {
            p,
            start_len: 3,
            target_digits: 4,
            m_max: 100_000_000,
            lambda_cap: 64,
            refine_digits: 6,
            max_attempts: 6,
        }
    }

    /// largest level keeping the scalar tables in u64 range
    pub fn max_level(&self) -> u32 {
        let w = if self.p == 2 { 2 } else { 1 };
        ((62.0 / (self.p as f64).log2()) as u32).saturating_sub(w + 2)
    }
}

/// Cache of lambda(theta) values for the Sinnott cross-check, keyed by a
/// canonical character tag; read-mostly with single-writer insertion.
#[derive(Default)]
pub struct LambdaCache {
    map: RwLock<HashMap<String, i64>>,
}

impl LambdaCache {
    pub fn new() -> Self {
        Self::default()
    }

    fn get(&self, key: &str) -> Option<i64> {
        self.map.read().unwrap().get(key).copied()
    }

    fn put(&self, key: String, v: i64) {
        self.map.write().unwrap().insert(key, v);
    }
}

fn char_tag(chi: &ZChar) -> String {
    let exps: Vec<String> = chi
        .exps
        .iter()
        .map(|e| e.map_or("x".into(), |v| v.to_string()))
        .collect();
    format!("f{}n{}:{}", chi.modulus, chi.order, exps.join(","))
}

#[derive(Clone, Debug)]
pub struct RootRecord {
    pub cert: RootCertificate,
    pub s_residue: BigUint,
    pub s_prec: u32,
    pub verdict: IntegralityVerdict,
}

#[derive(Clone, Debug)]
pub struct ClassReport {
    pub key: String,
    pub p: u64,
    pub conductor: u64,
    pub order: u64,
    pub degree: u64,
    pub orbit_size: u64,
    pub calibration: String,
    /// mu of G/H as a rational: mu_pi / e
    pub mu_pi: Val,
    pub e: u32,
    pub lambda_g: usize,
    pub lambda_chi: i64,
    pub dist_digest: String,
    pub gross: GrossData,
    pub roots: Vec<RootRecord>,
    pub simple: SimplicityOutcome,
    pub main: MainConjectureVerdict,
    pub mu_conjecture_ok: bool,
    pub sinnott_expected: Option<i64>,
    pub sinnott_matches: Option<bool>,
    pub x_family_d: Option<u64>,
    pub level_used: u32,
    pub len_used: usize,
    pub oracle_checked: bool,
}

#[derive(Clone, Debug)]
pub struct SimplicityOutcome {
    pub certified: bool,
    pub global: Option<&'static str>,
    pub per_segment: Vec<String>,
}

fn simplicity_outcome(rep: &SimplicityReport) -> SimplicityOutcome {
    SimplicityOutcome {
        certified: rep.all_simple,
        global: rep.global,
        per_segment: rep
            .segments
            .iter()
            .map(|(s, v)| {
                let tag = match v {
                    SegmentVerdict::CertifiedBy(t) => t,
                    SegmentVerdict::Inconclusive => "inconclusive",
                };
                format!("slope {}/{}: {}", s.n, s.d, tag)
            })
            .collect(),
    }
}

/// lambda(chi) alone (for the cache): series until the invariants settle.
pub fn lambda_of_character(cfg: &PipelineConfig, chi: &ZChar) -> Result<i64> {
    let setup = make_setup(cfg, chi)?;
    let (conv, _tag) = calibrate_setup(&setup, cfg)?;
    let mut len = cfg.start_len.max(3);
    let mut level = level_for(cfg, len);
    for _ in 0..cfg.max_attempts {
        let series = match stickelberger_series(&setup, conv, level, len) {
            Ok(s) => s,
            Err(_) => {
                level = (level + 1).min(cfg.max_level());
                continue;
            }
        };
        match mu_lambda(&series) {
            Ok((_, lam)) => return Ok(lam as i64 - setup.h.lambda()),
            Err(_) => {
                len += len / 2 + 3;
                level = level_for(cfg, len).max(level + 1).min(cfg.max_level());
            }
        }
    }
    Err(Error::Undetermined)
}

fn make_setup(cfg: &PipelineConfig, chi: &ZChar) -> Result<LSetup> {
    let w = if cfg.p == 2 { 2 } else { 1 };
    let ring_prec = (cfg.max_level() + w + 4).max(cfg.refine_digits + 16);
    LSetup::new(cfg.p, chi, ring_prec)
}

fn level_for(cfg: &PipelineConfig, len: usize) -> u32 {
    let p = cfg.p;
    let mut lvl = 1u32;
    while (p as u128).pow(lvl) < len as u128 {
        lvl += 1;
    }
    (lvl + 1).max(cfg.target_digits.min(6)).min(cfg.max_level())
}

fn calibrate_setup(setup: &LSetup, cfg: &PipelineConfig) -> Result<(Convention, String)> {
    let lvl = level_for(cfg, 4).min(cfg.max_level());
    calibrate(setup, lvl, 3)
}

/// Predicted lambda(G) via Sinnott when p divides the order; needs
/// lambda(theta) from the cache (computed on demand).
pub fn sinnott_prediction(
    cfg: &PipelineConfig,
    setup: &LSetup,
    cache: &LambdaCache,
) -> Result<Option<i64>> {
    let p = cfg.p;
    let (_, pk) = crate::zpoly::split_p_part(setup.chi.order, p);
    if pk == 1 {
        return Ok(None);
    }
    let split = decompose_sinnott(&setup.chi, p);
    let lam_theta = if split.theta.is_trivial() {
        -1
    } else {
        let tag = char_tag(&split.theta);
        match cache.get(&tag) {
            Some(v) => v,
            None => {
                let v = lambda_of_character(cfg, &split.theta)?;
                cache.put(tag, v);
                v
            }
        }
    };
    let lam = lambda_via_sinnott_q(&setup.chi, p, lam_theta, &setup.omega, &setup.joint)?;
    Ok(Some(lam))
}

/// Refine an s-zero of L_p to `target` digits through the direct value
/// formula (first-kind characters): Hensel iteration with a finite-difference
/// derivative.
pub fn refine_lp_zero(
    setup: &LSetup,
    s0: &BigUint,
    s0_digits: u32,
    target: u32,
) -> Result<BigUint> {
    let p = setup.p;
    if setup.wild_order > 1 {
        return Err(Error::invalid("refinement needs a first-kind character"));
    }
    if s0_digits >= target {
        return Ok(s0 % big_pow(p, target));
    }
    let work = target + 8;
    let pm = big_pow(p, work);
    let mut s = s0 % &pm;
    let mut known = s0_digits.max(1);
    // derivative estimate at scale p^{known-1}
    let step_k = known.saturating_sub(1).max(1);
    let delta = big_pow(p, step_k);
    let f0 = lp_direct_first_kind(setup, &s, work)?;
    let f1 = lp_direct_first_kind(setup, &((&s + &delta) % &pm), work)?;
    // d = (f1 - f0)/p^{step_k} as a ring element; for refinement the values
    // are scalars (first-kind chi might still have unramified degree > 1, in
    // which case Newton runs on the full element)
    let diff = f1.elem.sub(&f0.elem);
    let m_pi = diff
        .valuation()
        .ok_or(Error::PrecisionCollapse("zero refinement derivative"))?
        - setup.ring.e() as i64 * step_k as i64;
    if m_pi < 0 {
        return Err(Error::invalid("derivative estimate has negative valuation"));
    }
    let deriv = {
        let shifted = scalar_div_pow(&diff, p, step_k)?;
        shifted
    };
    let (du, dv) = deriv.unit_part()?;
    let du_inv = du.inverse()?;
    for _ in 0..(2 * target + 16) {
        let fv = lp_direct_first_kind(setup, &s, work)?;
        let fval = fv
            .elem
            .valuation()
            .unwrap_or(fv.elem.pi_prec)
            .min(fv.elem.pi_prec);
        let gained = ((fval - fv.shift_pi - dv) / setup.ring.e() as i64).max(0) as u32;
        if gained >= target {
            return Ok(s % big_pow(p, target));
        }
        // s <- s - f/deriv: the correction must be a scalar; project
        let corr_elem = fv.elem.mul(&du_inv);
        let corr_shift = fv.shift_pi + dv;
        let corr = scalar_part(&corr_elem)?;
        let e = setup.ring.e() as i64;
        debug_assert!(corr_shift % e == 0);
        let corr_p = scalar_shift_down(&corr, p, (corr_shift / e).max(0) as u32, work)?;
        s = (&s + &pm - corr_p % &pm) % &pm;
        known = known.max(gained.max(1));
    }
    let _ = known;
    Err(Error::PrecisionExhausted {
        what: "zero refinement",
        have: known as i64,
        need: target as i64,
    })
}

fn scalar_div_pow(x: &crate::ring::PadicElement, p: u64, k: u32) -> Result<crate::ring::PadicElement> {
    let mut y = x.clone();
    for _ in 0..k {
        y = y.div_p().map_err(|_| {
            Error::invalid("finite difference not divisible by the step")
        })?;
    }
    let _ = p;
    Ok(y)
}

fn scalar_part(x: &crate::ring::PadicElement) -> Result<BigUint> {
    // roots on Z_p: corrections must be scalar; tolerate tiny non-scalar
    // noise below the certified precision
    for (i, c) in x.c.iter().enumerate() {
        if i > 0 && !c.is_zero() {
            let v = crate::arith::big_val(c, x.p()).unwrap_or(u32::MAX) as i64
                * x.ring.e() as i64;
            if v < x.pi_prec - 2 {
                return Err(Error::invalid("correction is not a scalar"));
            }
        }
    }
    Ok(x.c[0].clone())
}

fn scalar_shift_down(x: &BigUint, p: u64, k: u32, work: u32) -> Result<BigUint> {
    let pk = big_pow(p, k);
    if (x % &pk).is_zero() {
        Ok(x / &pk)
    } else {
        // negative-valuation correction cannot happen for a certified zero
        let _ = work;
        Err(Error::invalid("correction has negative valuation"))
    }
}

/// Full per-class analysis.
pub fn analyze_class(
    cfg: &PipelineConfig,
    class: &ConjugacyClass,
    cache: &LambdaCache,
) -> Result<ClassReport> {
    let chi = &class.rep.zchar;
    let setup = make_setup(cfg, chi)?;
    let (conv, tag) = calibrate_setup(&setup, cfg)?;
    let sinnott_expected = sinnott_prediction(cfg, &setup, cache).unwrap_or(None);
    let predicted_lambda_g =
        sinnott_expected.map(|l| (l + setup.h.lambda()).max(0) as usize);
    if let Some(lg) = predicted_lambda_g {
        if lg > cfg.lambda_cap {
            return Err(Error::invalid(format!(
                "predicted lambda {lg} above the cap {}",
                cfg.lambda_cap
            )));
        }
    }

    let mut len = cfg
        .start_len
        .max(predicted_lambda_g.map_or(3, |l| l + 3))
        .max(3);
    let mut level = level_for(cfg, len);
    let mut last_err: Error = Error::Undetermined;
    for _attempt in 0..cfg.max_attempts {
        match attempt_class(cfg, &setup, conv, &tag, class, len, level, sinnott_expected) {
            Ok(report) => return Ok(report),
            Err(Error::Undetermined)
            | Err(Error::PrecisionExhausted { .. })
            | Err(Error::RootEscalation { .. })
            | Err(Error::HenselSeparation(_)) => {
                last_err = Error::Undetermined;
                len += len / 2 + 3;
                level = level_for(cfg, len).max(level + 1).min(cfg.max_level());
            }
            Err(e) => return Err(e),
        }
    }
    Err(last_err)
}

#[allow(clippy::too_many_arguments)]
fn attempt_class(
    cfg: &PipelineConfig,
    setup: &LSetup,
    conv: Convention,
    tag: &str,
    class: &ConjugacyClass,
    len: usize,
    level: u32,
    sinnott_expected: Option<i64>,
) -> Result<ClassReport> {
    let p = cfg.p;
    let series = stickelberger_series(setup, conv, level, len)?;
    let g = GSeries {
        series,
        h: setup.h.clone(),
        tag: tag.to_string(),
    };
    let oracle_checked = oracle_consistent(setup, &g, &[-1, -2, -3])?;
    if !oracle_checked {
        return Err(Error::invalid("series fails the interpolation oracle"));
    }
    let (mu_pi, lambda_g) = mu_lambda(&g.series)?;
    if len < lambda_g + 2 {
        return Err(Error::Undetermined);
    }
    let r_p = gross_rank(&setup.chi, p, &setup.omega, &setup.joint);
    let gross = gross_check(setup, &g.series, r_p)?;
    let gsharp = gsharp_reduce(&g.series, gross.r_prime.min(1), setup.cyc.u, p)?;
    let (mu_sharp, lambda_sharp) = mu_lambda(&gsharp)?;
    if mu_sharp != 0 {
        return Err(Error::invalid("G# should have unit content"));
    }
    let simple_rep = simplicity_criteria(&gsharp)?;
    if !simple_rep.all_simple {
        return Err(Error::Undetermined); // escalate L per the outer loop
    }
    let wd = weierstrass_distinguished(&gsharp, lambda_sharp)?;
    let certs = positive_valuation_roots(&wd.distinguished, &setup.ring, setup.cyc.w)?;

    // map roots to s-space, refine, and run the heuristic
    let mut roots = Vec::new();
    let need_digits = {
        // p^E must exceed m_max for the digit exclusion
        let mut e0 = 1u32;
        while (p as u128).pow(e0) <= cfg.m_max as u128 {
            e0 += 1;
        }
        e0.max(cfg.refine_digits)
    };
    for cert in &certs {
        let t_res = &cert.residue;
        let s_guess = zero_map_t_to_s(p, setup.cyc.u, t_res, cert.prec.saturating_sub(1).max(2))?;
        let s_prec0 = cert.prec.saturating_sub(setup.cyc.w + 1).max(1);
        let refine = |e: u32| -> Result<BigUint> {
            refine_lp_zero(setup, &s_guess, s_prec0, e)
        };
        let (verdict, s_res, s_prec) = match refine_lp_zero(setup, &s_guess, s_prec0, need_digits) {
            Ok(refined) => {
                let v = nonintegrality_heuristic(refine, p, need_digits);
                let prec = match &v {
                    IntegralityVerdict::NonzeroNonintegerLikely { checked_to } => *checked_to,
                    IntegralityVerdict::IntegerSuspect { checked_to } => *checked_to,
                    IntegralityVerdict::Escalated(e) => *e,
                };
                let res = refine_lp_zero(setup, &s_guess, s_prec0, prec)
                    .unwrap_or_else(|_| refined.clone());
                (v, res, prec)
            }
            Err(_) => (
                IntegralityVerdict::Escalated(need_digits),
                s_guess.clone() % big_pow(p, s_prec0),
                s_prec0,
            ),
        };
        roots.push(RootRecord {
            cert: cert.clone(),
            s_residue: s_res,
            s_prec,
            verdict,
        });
    }
    let main = main_conjecture_verdict(
        p,
        &roots
            .iter()
            .map(|r| (r.s_residue.clone(), r.s_prec, r.verdict.clone()))
            .collect::<Vec<_>>(),
        cfg.m_max,
    );
    let lambda_chi = lambda_g as i64 - setup.h.lambda();
    let mu_ok = mu_check(p, mu_pi, setup.ring.e());
    let sinnott_matches = sinnott_expected.map(|s| s == lambda_chi);
    let digest = digest_poly(&wd.distinguished, p);
    Ok(ClassReport {
        key: class.key(p),
        p,
        conductor: class.rep.conductor,
        order: class.rep.order,
        degree: class.embedding_degree,
        orbit_size: class.orbit_size,
        calibration: format!("{}@n{}", tag, level),
        mu_pi,
        e: setup.ring.e(),
        lambda_g,
        lambda_chi,
        dist_digest: digest,
        gross,
        roots,
        simple: simplicity_outcome(&simple_rep),
        main,
        mu_conjecture_ok: mu_ok,
        sinnott_expected,
        sinnott_matches,
        x_family_d: x_family_degree(&setup.chi, p),
        level_used: level,
        len_used: len,
        oracle_checked,
    })
}

fn digest_poly(coeffs: &[crate::ring::PadicElement], p: u64) -> String {
    use std::fmt::Write;
    let mut out = String::new();
    for c in coeffs {
        let digits = (c.pi_prec.max(1) as u32 / c.ring.e()).clamp(1, 8);
        for x in &c.c {
            let _ = write!(out, "{:x}.", x % big_pow(p, digits));
        }
        out.push('|');
    }
    out
}

/// Locate the class of omega^a among the conductor-q classes (odd p, even a):
/// chi = omega^a iff chi(g) = rho^a for the fixed primitive root g.
pub fn omega_power_class(p: u64, a: u64) -> Result<ConjugacyClass> {
    if p == 2 {
        return Err(Error::invalid("omega powers over p = 2 have conductor 4"));
    }
    let classes = crate::dirichlet::enumerate_even_primitive_classes(p, p);
    let omega = crate::dirichlet::OmegaChar::new(p);
    let n = (p - 1) / gcd(a, p - 1);
    for class in classes {
        if class.rep.order != n {
            continue;
        }
        let chi = &class.rep.zchar;
        // chi(g) = zeta_n^{e}; zeta_n = y with y = rho^{c (p-1)/n} from the
        // joint relation; equality with rho^a is pure exponent arithmetic
        let ring = crate::ring::make_ring(p, n, 1, 4)?;
        let joint = crate::ring::compute_joint_rel(&ring, &omega);
        let e = chi.exponent_at(omega.g).unwrap_or(0);
        // y^e rho^{-a} = 1?
        let neg_a = (omega.phi_q - a % omega.phi_q) % omega.phi_q;
        if joint.pair_trivial(e, neg_a) {
            return Ok(class);
        }
    }
    Err(Error::invalid(format!("omega^{a} class not found for p = {p}")))
}

/// The interpolation-oracle consistency sweep used by the acceptance suite:
/// every class of conductor <= bound, m in ms, certified agreement >= digits.
pub fn oracle_sweep(
    cfg: &PipelineConfig,
    bound: u64,
    ms: &[i64],
    digits: u32,
) -> Result<(usize, usize)> {
    let classes = crate::dirichlet::enumerate_classes_up_to(cfg.p, bound);
    let mut checked = 0usize;
    let total = classes.len();
    for class in &classes {
        let setup = make_setup(cfg, &class.rep.zchar)?;
        let (conv, tag) = calibrate_setup(&setup, cfg)?;
        let level = (digits + 1).max(level_for(cfg, 3)).min(cfg.max_level());
        let series = stickelberger_series(&setup, conv, level, 3)?;
        let g = GSeries {
            series,
            h: setup.h.clone(),
            tag,
        };
        for &m in ms {
            let lhs = crate::iwasawa::lp_evaluate_int(&setup, &g, m)?;
            let rhs = setup.oracle.lp_value_embedded(
                m,
                &setup.ring,
                digits + setup.cyc.w + 3,
            )?;
            let (dv, joint_prec) = crate::iwasawa::shifted_difference(&lhs, &rhs, setup.ring.e());
            let e = setup.ring.e() as i64;
            let cert = joint_prec.min(lhs.precision());
            if cert < digits as i64 * e {
                return Err(Error::PrecisionExhausted {
                    what: "oracle sweep certified precision",
                    have: cert,
                    need: digits as i64 * e,
                });
            }
            if let Some(v) = dv {
                if v < cert - 1 {
                    return Err(Error::invalid(format!(
                        "oracle mismatch for {} at m = {m}: v(diff) = {v}, cert = {cert}",
                        class.key(cfg.p)
                    )));
                }
            }
        }
        checked += 1;
    }
    Ok((checked, total))
}

/// Shifted-value helper re-export for the acceptance tests.
pub fn value_valuation(v: &ShiftedValue) -> Option<i64> {
    v.valuation()
}
