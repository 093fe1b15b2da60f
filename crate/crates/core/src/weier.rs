//! Weierstrass data of a series approximation: the invariants mu and lambda,
//! the distinguished polynomial through a contraction iteration, and the
//! reduction G -> G# that strips the trivial zero at T = u - 1 and the
//! 2-power content.

use crate::error::{Error, Result};
use crate::ring::{PadicElement, Val};
use crate::series::SeriesApprox;

#[derive(Clone, Debug)]
pub struct WeierstrassData {
    /// in pi-units (divide by e for the p-valuation)
    pub mu: Val,
    pub lambda: usize,
    /// monic polynomial of degree lambda, non-leading coefficients in the
    /// maximal ideal, satisfying S = pi^mu D U within certified precision
    pub distinguished: Vec<PadicElement>,
}

/// mu = min certified coefficient valuation (must be witnessed and consistent
/// with the certified floor), lambda = least index attaining it.
pub fn mu_lambda(s: &SeriesApprox) -> Result<(Val, usize)> {
    let mut mu_cand: Option<Val> = None;
    for c in &s.coeffs {
        if let Some(v) = c.valuation() {
            if v < c.pi_prec {
                mu_cand = Some(mu_cand.map_or(v, |m| m.min(v)));
            }
        }
    }
    let mu = match mu_cand {
        Some(m) => m,
        None => {
            // nothing certified nonzero: all-zero at precision is an upstream
            // bug, insufficient precision is escalation
            if s.coeffs.iter().all(|c| c.is_zero_at_prec()) {
                return Err(Error::ZeroSeries);
            }
            return Err(Error::Undetermined);
        }
    };
    if mu > s.mu_floor {
        // a coefficient beyond the stored length could still attain the floor
        return Err(Error::Undetermined);
    }
    // lambda: least index with v = mu; all earlier coefficients must be
    // certified strictly above mu
    for (i, c) in s.coeffs.iter().enumerate() {
        match c.valuation() {
            Some(v) if v == mu && v < c.pi_prec => return Ok((mu, i)),
            Some(v) if v > mu || v >= c.pi_prec => {
                if c.pi_prec <= mu {
                    return Err(Error::Undetermined);
                }
            }
            Some(_) => unreachable!("valuation below the certified minimum"),
            None => {
                if c.pi_prec <= mu {
                    return Err(Error::Undetermined);
                }
            }
        }
    }
    Err(Error::Undetermined)
}

/// Divide out pi^mu, leaving a series with a unit coefficient at lambda.
pub fn normalize_mu(s: &SeriesApprox, mu: Val) -> Result<SeriesApprox> {
    if mu == 0 {
        return Ok(s.clone());
    }
    let mut coeffs = Vec::with_capacity(s.len());
    for c in &s.coeffs {
        coeffs.push(c.div_uniformizer(mu as u32)?);
    }
    Ok(SeriesApprox::new(
        s.ring.clone(),
        coeffs,
        s.level,
        s.mu_floor - mu,
    ))
}

/// The degree-lambda distinguished factor of a mu-normalized series, by the
/// fixed-point division iteration; the residual S - D U is checked to vanish
/// within the certified precision.
pub fn weierstrass_distinguished(s: &SeriesApprox, lambda: usize) -> Result<WeierstrassData> {
    if s.len() <= lambda {
        return Err(Error::invalid("series too short for the requested degree"));
    }
    let ring = &s.ring;
    let _l = s.len();
    // initial unit: the T^lambda..T^{L-1} part shifted down
    let mut unit = SeriesApprox::new(
        ring.clone(),
        s.coeffs[lambda..].to_vec(),
        s.level,
        s.mu_floor,
    );
    if !unit.coeffs[0].is_unit() {
        return Err(Error::invalid("coefficient at lambda is not a unit"));
    }
    let max_iter = 4 * (s.min_prec().max(1) as usize) + 8;
    let mut low = Vec::new();
    for _ in 0..max_iter {
        let q = s.divide(&unit, 0)?;
        low = q.coeffs[..lambda].to_vec();
        // R = T^{-lambda} (Q - low): want R = 1
        let r = SeriesApprox::new(ring.clone(), q.coeffs[lambda..].to_vec(), q.level, 0);
        // distance of R from 1
        let one = ring.one(u32::MAX);
        let mut dist: Option<Val> = None;
        for (i, c) in r.coeffs.iter().enumerate() {
            let d = if i == 0 { c.sub(&one) } else { c.clone() };
            if let Some(v) = d.valuation() {
                if v < d.pi_prec {
                    dist = Some(dist.map_or(v, |x: i64| x.min(v)));
                }
            }
        }
        match dist {
            None => {
                // converged within precision
                let mut dpoly = low;
                dpoly.push(ring.one(u32::MAX));
                check_residual(s, &dpoly, &unit)?;
                return Ok(WeierstrassData {
                    mu: 0,
                    lambda,
                    distinguished: dpoly,
                });
            }
            Some(v) if v <= 0 => {
                return Err(Error::invalid(
                    "weierstrass iteration does not contract (lambda wrong?)",
                ));
            }
            Some(_) => {
                unit = unit.mul(&r);
            }
        }
    }
    // ran out of iterations: accept if the residual already vanishes
    let mut dpoly = low;
    dpoly.push(ring.one(u32::MAX));
    check_residual(s, &dpoly, &unit)?;
    Ok(WeierstrassData {
        mu: 0,
        lambda,
        distinguished: dpoly,
    })
}

fn check_residual(
    s: &SeriesApprox,
    dpoly: &[PadicElement],
    unit: &SeriesApprox,
) -> Result<()> {
    let ring = &s.ring;
    let l = s.len();
    let mut prod = vec![ring.zero(u32::MAX); l];
    for (i, d) in dpoly.iter().enumerate() {
        for (j, u) in unit.coeffs.iter().enumerate() {
            if i + j < l {
                prod[i + j] = prod[i + j].add(&d.mul(u));
            }
        }
    }
    for (i, c) in s.coeffs.iter().enumerate() {
        let diff = c.sub(&prod[i]);
        if let Some(v) = diff.valuation() {
            if v < diff.pi_prec.min(c.pi_prec) - 1 {
                return Err(Error::invalid(format!(
                    "weierstrass residual visible at T^{i}: v = {v}, prec = {}",
                    diff.pi_prec
                )));
            }
        }
    }
    Ok(())
}

/// G# = c_p G / (T - (u-1))^{r_p} with c_p = 1 for odd p and 1/2 for p = 2.
/// Division by the linear factor runs the forward recurrence
/// Q_i = (Q_{i-1} - G_i)/(u-1)-style and costs w pi-digits per T-power.
pub fn gsharp_reduce(
    g: &SeriesApprox,
    r_p: u32,
    u: u64,
    p: u64,
) -> Result<SeriesApprox> {
    let ring = &g.ring;
    let e = ring.e() as i64;
    let mut cur = g.clone();
    // 2-power content first
    if p == 2 {
        let mut coeffs = Vec::with_capacity(cur.len());
        for c in &cur.coeffs {
            coeffs.push(c.div_p().map_err(|_| {
                Error::invalid("mu = 1 content missing: coefficient not divisible by 2")
            })?);
        }
        cur = SeriesApprox::new(ring.clone(), coeffs, cur.level, cur.mu_floor - e);
    }
    let t0 = ring.from_i64(u as i64 - 1, ring.prec());
    let w = t0.valuation().expect("u - 1 has positive valuation");
    for _ in 0..r_p {
        // G = (T - t0) Q: Q_i = (Q_{i-1} - G_i) / t0
        let t0_unit = t0.div_uniformizer(w as u32)?;
        let t0_inv = t0_unit.inverse()?;
        let mut qs: Vec<PadicElement> = Vec::with_capacity(cur.len().saturating_sub(1));
        let mut prev = ring.zero(u32::MAX);
        for i in 0..cur.len().saturating_sub(1) {
            let num = prev.sub(&cur.coeffs[i]);
            let prec_before = num.pi_prec;
            let shifted = num.div_uniformizer(w as u32).map_err(|_| {
                Error::PrecisionExhausted {
                    what: "gsharp linear division",
                    have: prec_before,
                    need: w,
                }
            })?;
            let q = shifted.mul(&t0_inv);
            prev = q.clone();
            qs.push(q);
        }
        cur = SeriesApprox::new(ring.clone(), qs, cur.level, 0);
        // quotient integrality holds because u-1 is a certified root
        cur.mu_floor = 0;
    }
    Ok(cur)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::make_ring;
    use num_bigint::BigUint;

    #[test]
    fn mu_lambda_basics() {
        let r = make_ring(5, 1, 1, 12).unwrap();
        // S = p + pT + T^2: mu 0, lambda 2
        let s = SeriesApprox::from_i64(&r, &[5, 5, 1, 3], 12);
        assert_eq!(mu_lambda(&s).unwrap(), (0, 2));
        // S = p(1 + T): with floor 0 the min visible valuation 1 cannot be
        // certified as mu since the tail might be lower
        let mut s = SeriesApprox::from_i64(&r, &[5, 5, 5, 5], 12);
        assert!(matches!(mu_lambda(&s), Err(Error::Undetermined)));
        // with a certified floor of 1 it becomes mu = 1, lambda = 0
        s.mu_floor = 1;
        assert_eq!(mu_lambda(&s).unwrap(), (1, 0));
    }

    #[test]
    fn figure_series_lambda() {
        // valuations 6,_,_,5,4,5,3,_,4,_,_,2,1,_,_,3,0: mu 0 lambda 16
        let r = make_ring(2, 1, 1, 24).unwrap();
        let pw = |k: u32| 2i64.pow(k);
        let s = SeriesApprox::from_i64(
            &r,
            &[
                pw(6),
                0,
                0,
                pw(5),
                pw(4),
                pw(5),
                pw(3),
                0,
                pw(4),
                0,
                0,
                pw(2),
                pw(1),
                0,
                0,
                pw(3),
                1,
            ],
            20,
        );
        assert_eq!(mu_lambda(&s).unwrap(), (0, 16));
    }

    #[test]
    fn distinguished_linear() {
        let r = make_ring(5, 1, 1, 12).unwrap();
        // S = T + p exactly (padded with a unit tail so the division sees a unit)
        let s = SeriesApprox::from_i64(&r, &[5, 1, 0, 0, 0], 12);
        let wd = weierstrass_distinguished(&s, 1).unwrap();
        assert_eq!(wd.lambda, 1);
        assert_eq!(
            wd.distinguished[0].scalar_value().unwrap(),
            &BigUint::from(5u32)
        );
    }

    #[test]
    fn distinguished_planted() {
        // S = (T - p)(1 + T) = -p + (1-p)T + T^2
        let r = make_ring(5, 1, 1, 12).unwrap();
        let s = SeriesApprox::from_i64(&r, &[-5, -4, 1, 0, 0, 0], 12);
        let wd = weierstrass_distinguished(&s, 1).unwrap();
        // D = T - p
        let d0 = wd.distinguished[0].clone();
        let expect = r.from_i64(-5, 12);
        assert!(d0.sub(&expect).is_zero_at_prec() || d0.sub(&expect).valuation().unwrap() >= 10);
    }

    #[test]
    fn distinguished_unit_series() {
        let r = make_ring(3, 1, 1, 10).unwrap();
        let s = SeriesApprox::from_i64(&r, &[2, 1, 1], 10);
        let wd = weierstrass_distinguished(&s, 0).unwrap();
        assert_eq!(wd.lambda, 0);
        assert_eq!(wd.distinguished.len(), 1);
    }

    #[test]
    fn gsharp_planted_factor() {
        // G = (T - (u-1)) * U with u = 6, U = 1 + 2T + T^3
        let r = make_ring(5, 1, 1, 12).unwrap();
        let u_series = SeriesApprox::from_i64(&r, &[1, 2, 0, 1, 0, 0], 12);
        let t0 = r.from_i64(5, 12);
        let lin_a = t0.neg();
        let lin_b = r.one(12);
        let g = u_series.mul_linear(&lin_a, &lin_b);
        let gs = gsharp_reduce(&g, 1, 6, 5).unwrap();
        for i in 0..3 {
            let diff = gs.coeffs[i].sub(&u_series.coeffs[i]);
            assert!(
                diff.is_zero_at_prec() || diff.valuation().unwrap() >= diff.pi_prec,
                "coefficient {i} mismatch"
            );
        }
    }

    #[test]
    fn gsharp_halves_for_p2() {
        let r = make_ring(2, 1, 1, 12).unwrap();
        let g = SeriesApprox::from_i64(&r, &[6, 2, 4], 12);
        let gs = gsharp_reduce(&g, 0, 5, 2).unwrap();
        assert_eq!(gs.coeffs[0].scalar_value().unwrap(), &BigUint::from(3u32));
        assert_eq!(gs.coeffs[1].scalar_value().unwrap(), &BigUint::from(1u32));
    }
}
