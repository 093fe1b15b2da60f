//! Power series known modulo (per-coefficient p-powers, T^L), with level
//! metadata from the level-sum construction and a certified valuation floor
//! for the coefficients beyond the stored length.

use crate::error::{Error, Result};
use crate::ring::{PadicElement, Ring, Val};
use num_bigint::BigUint;

/// Sentinel floor for series whose tail bound must come from theory.
pub const NO_FLOOR: Val = i64::MIN / 4;

#[derive(Clone, Debug)]
pub struct SeriesApprox {
    pub ring: Ring,
    /// coefficients of T^0 .. T^{L-1}; each carries its certified pi-precision
    pub coeffs: Vec<PadicElement>,
    /// the series is certified modulo ((1+T)^{p^level} - 1, stated precisions)
    pub level: u32,
    /// certified lower bound, in pi-units, for the valuation of every
    /// coefficient including those beyond T^L
    pub mu_floor: Val,
}

impl SeriesApprox {
    pub fn new(ring: Ring, coeffs: Vec<PadicElement>, level: u32, mu_floor: Val) -> Self {
        SeriesApprox {
            ring,
            coeffs,
            level,
            mu_floor,
        }
    }

    /// Build from i64 coefficients at uniform precision (test/planting helper).
    pub fn from_i64(ring: &Ring, coeffs: &[i64], prec: u32) -> Self {
        let c = coeffs.iter().map(|&x| ring.from_i64(x, prec)).collect();
        SeriesApprox::new(ring.clone(), c, 32, 0)
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn per_coeff_precision(&self) -> Vec<Val> {
        self.coeffs.iter().map(|c| c.pi_prec).collect()
    }

    pub fn coeff(&self, i: usize) -> &PadicElement {
        &self.coeffs[i]
    }

    pub fn truncate(&self, l: usize) -> Self {
        SeriesApprox::new(
            self.ring.clone(),
            self.coeffs[..l.min(self.len())].to_vec(),
            self.level,
            self.mu_floor,
        )
    }

    /// Evaluate at t with v(t) > 0. The reported precision folds the
    /// per-coefficient precisions (improved by i*v(t)) and the tail bound
    /// mu_floor + L*v(t).
    pub fn eval(&self, t: &PadicElement) -> Result<PadicElement> {
        let vt = match t.valuation() {
            None => {
                // t = 0 at precision: value is the constant term
                return Ok(self.coeffs[0].clone());
            }
            Some(v) if v > 0 => v,
            _ => return Err(Error::invalid("series evaluated at a unit")),
        };
        // Horner from the top
        let mut acc = self.ring.zero(t.m);
        for c in self.coeffs.iter().rev() {
            acc = acc.mul(t).add(c);
        }
        let mut prec = self.mu_floor + self.len() as i64 * vt;
        for (i, c) in self.coeffs.iter().enumerate() {
            prec = prec.min(c.pi_prec + i as i64 * vt);
        }
        prec = prec.min(t.pi_prec + self.min_val_floor());
        if prec <= 0 {
            return Err(Error::PrecisionCollapse("series_eval"));
        }
        acc.pi_prec = acc.pi_prec.min(prec);
        Ok(acc)
    }

    fn min_val_floor(&self) -> Val {
        self.coeffs
            .iter()
            .map(|c| c.valuation().unwrap_or(c.pi_prec))
            .min()
            .unwrap_or(0)
            .min(self.mu_floor)
            .max(0)
    }

    /// Termwise derivative; length drops by one.
    pub fn derivative(&self) -> Self {
        let c: Vec<PadicElement> = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, x)| x.mul_scalar(&BigUint::from(i as u64)))
            .collect();
        SeriesApprox::new(self.ring.clone(), c, self.level, self.mu_floor)
    }

    pub fn add(&self, o: &Self) -> Self {
        let l = self.len().min(o.len());
        let c = (0..l).map(|i| self.coeffs[i].add(&o.coeffs[i])).collect();
        SeriesApprox::new(
            self.ring.clone(),
            c,
            self.level.min(o.level),
            self.mu_floor.min(o.mu_floor),
        )
    }

    pub fn sub(&self, o: &Self) -> Self {
        let l = self.len().min(o.len());
        let c = (0..l).map(|i| self.coeffs[i].sub(&o.coeffs[i])).collect();
        SeriesApprox::new(
            self.ring.clone(),
            c,
            self.level.min(o.level),
            self.mu_floor.min(o.mu_floor),
        )
    }

    pub fn scale_elem(&self, x: &PadicElement) -> Self {
        let c = self.coeffs.iter().map(|a| a.mul(x)).collect();
        let vx = x.valuation().unwrap_or(0).max(0);
        SeriesApprox::new(self.ring.clone(), c, self.level, self.mu_floor + vx)
    }

    /// Product truncated to min(L1, L2). mu floors add.
    pub fn mul(&self, o: &Self) -> Self {
        let l = self.len().min(o.len());
        let mut c = Vec::with_capacity(l);
        for k in 0..l {
            let mut acc = self.ring.zero(u32::MAX);
            for i in 0..=k {
                acc = acc.add(&self.coeffs[i].mul(&o.coeffs[k - i]));
            }
            // tail of the partner series contributes beyond stored length only
            // for k >= min length, which we truncated away
            c.push(acc);
        }
        SeriesApprox::new(
            self.ring.clone(),
            c,
            self.level.min(o.level),
            self.mu_floor + o.mu_floor,
        )
    }

    /// Multiply by the linear polynomial a + b T.
    pub fn mul_linear(&self, a: &PadicElement, b: &PadicElement) -> Self {
        let l = self.len();
        let mut c = Vec::with_capacity(l);
        for k in 0..l {
            let mut acc = self.coeffs[k].mul(a);
            if k > 0 {
                acc = acc.add(&self.coeffs[k - 1].mul(b));
            }
            c.push(acc);
        }
        // mu floor: min(v(a), v(b)) added
        let va = a.valuation().unwrap_or(a.pi_prec).max(0);
        let vb = b.valuation().unwrap_or(b.pi_prec).max(0);
        SeriesApprox::new(self.ring.clone(), c, self.level, self.mu_floor + va.min(vb))
    }

    /// Divide by a series whose constant term is a unit (after cancelling
    /// `cancel` leading T-powers from both, which the caller asserts vanish).
    /// Per-coefficient precision degrades by the valuation of the divisor's
    /// constant term at each step.
    pub fn divide(&self, den: &Self, cancel: usize) -> Result<Self> {
        let mut num = self.clone();
        let mut den = den.clone();
        for _ in 0..cancel {
            num = num.shift_down()?;
            den = den.shift_down()?;
        }
        let l = num.len().min(den.len());
        let d0 = den.coeffs[0].clone();
        let v0 = d0.certified_valuation().map_err(|_| {
            Error::invalid("series division: divisor constant term indistinguishable from 0")
        })?;
        let (d0u, _) = d0.unit_part()?;
        let d0inv = d0u.inverse()?;
        let mut q: Vec<PadicElement> = Vec::with_capacity(l);
        for k in 0..l {
            let mut acc = num.coeffs[k].clone();
            for i in 1..=k {
                if i < den.len() {
                    acc = acc.sub(&den.coeffs[i].mul(&q[k - i]));
                }
            }
            // acc / d0 = (acc / pi^v0) * d0u^{-1}
            let acc_prec = acc.pi_prec;
            let shifted = acc.div_uniformizer(v0 as u32).map_err(|_| {
                Error::PrecisionExhausted {
                    what: "series division",
                    have: acc_prec,
                    need: v0,
                }
            })?;
            let mut qk = shifted.mul(&d0inv);
            qk.pi_prec = qk.pi_prec.min(acc_prec - v0);
            q.push(qk);
        }
        // a unit-constant integral divisor has an integral inverse, so the
        // numerator's floor survives; otherwise the caller must supply a
        // floor from theory (NO_FLOOR poisons eval until overridden)
        let floor = if v0 == 0 && den.mu_floor >= 0 {
            num.mu_floor
        } else {
            NO_FLOOR
        };
        Ok(SeriesApprox::new(
            self.ring.clone(),
            q,
            num.level.min(den.level),
            floor,
        ))
    }

    /// Drop the constant term and shift by one T-power. The constant must be
    /// indistinguishable from zero at its precision (consistency check).
    pub fn shift_down(&self) -> Result<Self> {
        let c0 = &self.coeffs[0];
        if !c0.is_zero_at_prec() {
            return Err(Error::invalid(format!(
                "shift_down: constant term has valuation {:?} < precision {}",
                c0.valuation(),
                c0.pi_prec
            )));
        }
        Ok(SeriesApprox::new(
            self.ring.clone(),
            self.coeffs[1..].to_vec(),
            self.level,
            self.mu_floor,
        ))
    }

    /// Substitute T -> zeta (1+T) - 1 where zeta is a root of unity in the
    /// (possibly larger) target ring. Precision of the new T^j coefficient is
    /// cut by the tail bound mu_floor + (L - j) * v(zeta - 1).
    pub fn substitute_twist(&self, zeta: &PadicElement, target: &Ring) -> Result<Self> {
        let l = self.len();
        let one = target.one(u32::MAX);
        let zm1 = zeta.sub(&one);
        let vz = if zm1.is_zero_at_prec() {
            // zeta = 1: identity substitution
            return Ok(self.map_into(target));
        } else {
            zm1.certified_valuation()?
        };
        let ratio = (target.e() / self.ring.e()) as i64;
        let floor_t = self.mu_floor.saturating_mul(ratio.max(1));
        let mut out = Vec::with_capacity(l);
        // B_j = sum_{i >= j} b_i C(i, j) zeta^j (zeta-1)^{i-j}
        let mut zeta_pow_j = target.one(u32::MAX);
        for j in 0..l {
            let mut acc = target.zero(u32::MAX);
            let mut prec = i64::MAX;
            let mut zm1_pow = target.one(u32::MAX);
            for i in j..l {
                let b = embed(&self.coeffs[i], target);
                let binom = binom_u64(i as u64, j as u64);
                let term = b.mul(&zm1_pow).mul_scalar(&binom);
                prec = prec.min(b.pi_prec + (i - j) as i64 * vz);
                acc = acc.add(&term);
                zm1_pow = zm1_pow.mul(&zm1);
            }
            acc = acc.mul(&zeta_pow_j);
            // tail of the original series past T^L
            prec = prec.min(floor_t + (l - j) as i64 * vz);
            if prec <= 0 {
                return Err(Error::PrecisionCollapse("substitute_twist"));
            }
            acc.pi_prec = acc.pi_prec.min(prec);
            out.push(acc);
            zeta_pow_j = zeta_pow_j.mul(zeta);
        }
        Ok(SeriesApprox::new(target.clone(), out, self.level, floor_t))
    }

    /// Re-embed coefficients into a compatible (same p, same unramified part)
    /// target ring.
    pub fn map_into(&self, target: &Ring) -> Self {
        let ratio = (target.e() / self.ring.e()) as i64;
        let c = self.coeffs.iter().map(|x| embed(x, target)).collect();
        SeriesApprox::new(
            target.clone(),
            c,
            self.level,
            self.mu_floor.saturating_mul(ratio.max(1)),
        )
    }

    /// Minimal certified precision across stored coefficients.
    pub fn min_prec(&self) -> Val {
        self.coeffs
            .iter()
            .map(|c| c.pi_prec)
            .min()
            .unwrap_or(i64::MAX)
    }
}

/// Embed an element of a subtower into `target` (same p, same unramified
/// polynomial; target may add or share the ramified stage).
pub fn embed(x: &PadicElement, target: &Ring) -> PadicElement {
    if std::sync::Arc::ptr_eq(&x.ring.0, &target.0) {
        return x.clone();
    }
    assert_eq!(x.ring.0.p, target.0.p);
    assert_eq!(x.ring.0.m0, target.0.m0);
    assert_eq!(x.ring.0.g.first(), target.0.g.first());
    let mut out = target.zero(x.m);
    let d = x.ring.0.d as usize;
    let de = target.0.d as usize;
    assert_eq!(d, de, "unramified degrees must agree");
    assert!(x.ring.0.e == 1 || x.ring.0.e == target.0.e);
    let src_e = x.ring.0.e as usize;
    for j in 0..src_e {
        for i in 0..d {
            out.c[i + de * j] = x.c[i + d * j].clone();
        }
    }
    out.pi_prec = if x.ring.0.e == target.0.e {
        x.pi_prec
    } else {
        // unramified precision p^m becomes e*m pi-units
        x.pi_prec * target.0.e as i64
    };
    out
}

fn binom_u64(n: u64, k: u64) -> BigUint {
    let mut acc = BigUint::from(1u8);
    for j in 0..k {
        acc = acc * BigUint::from(n - j) / BigUint::from(j + 1);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::make_ring;

    #[test]
    fn eval_simple() {
        // S = 1 + T at t = p
        let r = make_ring(5, 1, 1, 8).unwrap();
        let s = SeriesApprox::from_i64(&r, &[1, 1], 8);
        let t = r.from_i64(5, 8);
        let v = s.eval(&t).unwrap();
        assert_eq!(v.scalar_value().unwrap(), &BigUint::from(6u32));
    }

    #[test]
    fn eval_precision_algebra() {
        // c_i known mod p^3, t = p, L = 5: result precision floor = 3
        let r = make_ring(5, 1, 1, 8).unwrap();
        let mut s = SeriesApprox::from_i64(&r, &[2, 3, 1, 4, 2], 3);
        s.mu_floor = 0;
        let t = r.from_i64(5, 8);
        let v = s.eval(&t).unwrap();
        assert_eq!(v.pi_prec, 3);
    }

    #[test]
    fn eval_hull_valuation() {
        // valuations (i, v): min_i(v + i) at t = p is 6 for the figure series
        let r = make_ring(2, 1, 1, 24).unwrap();
        let pow = |k: u32| 2i64.pow(k);
        let s = SeriesApprox::from_i64(
            &r,
            &[
                pow(6),
                0,
                0,
                pow(5),
                pow(4),
                pow(5),
                pow(3),
                0,
                pow(4),
                0,
                0,
                pow(2),
                pow(1),
                0,
                0,
                pow(3),
                1,
            ],
            20,
        );
        let t = r.from_i64(2, 20);
        let v = s.eval(&t).unwrap();
        assert_eq!(v.valuation(), Some(6));
    }

    #[test]
    fn derivative_and_linearity() {
        let r = make_ring(3, 1, 1, 10).unwrap();
        // d/dT (T^2) = 2T
        let s = SeriesApprox::from_i64(&r, &[0, 0, 1], 10);
        let d = s.derivative();
        assert!(d.coeffs[0].is_zero_at_prec());
        assert_eq!(d.coeffs[1].scalar_value().unwrap(), &BigUint::from(2u32));
        // constant -> 0
        let c = SeriesApprox::from_i64(&r, &[7], 10);
        assert!(c.derivative().is_empty());
    }

    #[test]
    fn division_round_trip() {
        let r = make_ring(5, 1, 1, 10).unwrap();
        let a = SeriesApprox::from_i64(&r, &[1, 3, 2, 4, 1, 0, 2, 1], 10);
        let b = SeriesApprox::from_i64(&r, &[2, 1, 4, 1, 3, 2, 0, 1], 10);
        let prod = a.mul(&b);
        let back = prod.divide(&b, 0).unwrap();
        for i in 0..back.len() {
            let diff = back.coeffs[i].sub(&a.coeffs[i]);
            assert!(
                diff.is_zero_at_prec(),
                "coefficient {i} differs: {:?}",
                diff.valuation()
            );
        }
    }

    #[test]
    fn twist_identity() {
        let r = make_ring(3, 1, 1, 10).unwrap();
        let s = SeriesApprox::from_i64(&r, &[4, 1, 3], 10);
        let one = r.one(10);
        let t = s.substitute_twist(&one, &r).unwrap();
        for i in 0..3 {
            assert!(t.coeffs[i].sub(&s.coeffs[i]).is_zero_at_prec());
        }
    }
}
