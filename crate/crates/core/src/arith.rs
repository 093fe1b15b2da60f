//! Small integer arithmetic helpers: primality, orders, primitive roots,
//! discrete logs in (Z/f)^*, and modular arithmetic on u128/BigUint.

use num_bigint::BigUint;
use num_traits::{One, Zero};

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for q in [2u64, 3, 5, 7] {
        if n == q {
            return true;
        }
        if n % q == 0 {
            return false;
        }
    }
    let mut d = 11u64;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            let mut e = 0;
            while n % d == 0 {
                n /= d;
                e += 1;
            }
            out.push((d, e));
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

pub fn euler_phi(n: u64) -> u64 {
    factorize(n)
        .iter()
        .fold(n, |acc, &(p, _)| acc / p * (p - 1))
}

pub fn divisors(n: u64) -> Vec<u64> {
    let mut ds = vec![1u64];
    for (p, e) in factorize(n) {
        let snapshot = ds.clone();
        let mut pe = 1u64;
        for _ in 0..e {
            pe *= p;
            ds.extend(snapshot.iter().map(|d| d * pe));
        }
    }
    ds.sort_unstable();
    ds
}

pub fn pow_mod(b: u64, mut e: u64, m: u64) -> u64 {
    let mut acc: u128 = 1;
    let mm = m as u128;
    let mut bb = (b % m) as u128;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * bb % mm;
        }
        bb = bb * bb % mm;
        e >>= 1;
    }
    acc as u64
}

/// Multiplicative order of a modulo m; panics unless gcd(a, m) = 1.
pub fn mult_order(a: u64, m: u64) -> u64 {
    assert_eq!(gcd(a % m, m), 1, "mult_order of a non-unit");
    if m == 1 {
        return 1;
    }
    let phi = euler_phi(m);
    let mut ord = phi;
    for (q, _) in factorize(phi) {
        while ord % q == 0 && pow_mod(a, ord / q, m) == 1 {
            ord /= q;
        }
    }
    ord
}

/// Smallest primitive root modulo an odd prime power (or modulo 2 and 4).
pub fn primitive_root(m: u64) -> u64 {
    if m == 1 || m == 2 {
        return 1;
    }
    if m == 4 {
        return 3;
    }
    let phi = euler_phi(m);
    'outer: for g in 2..m {
        if gcd(g, m) != 1 {
            continue;
        }
        for (q, _) in factorize(phi) {
            if pow_mod(g, phi / q, m) == 1 {
                continue 'outer;
            }
        }
        return g;
    }
    unreachable!("no primitive root mod {m}")
}

/// CRT for two coprime moduli: x = a (mod m), x = b (mod n).
pub fn crt(a: u64, m: u64, b: u64, n: u64) -> u64 {
    let (mut x, mn) = (a % m, (m as u128) * (n as u128));
    let step = m as u128;
    let mut xx = x as u128;
    while (xx % n as u128) != (b % n) as u128 {
        xx += step;
    }
    debug_assert!(xx < mn);
    x = xx as u64;
    x
}

/// A representative of a mod f that is coprime to big_f (f | big_f).
pub fn coprime_lift(a: u64, f: u64, big_f: u64) -> u64 {
    debug_assert_eq!(big_f % f, 0);
    if f == big_f || f == 1 {
        if f == 1 {
            // any unit works
            let mut x = 1;
            while gcd(x, big_f) != 1 {
                x += 1;
            }
            return x;
        }
        return a % f;
    }
    let mut x = a % f;
    if x == 0 {
        x = f;
    }
    while gcd(x, big_f) != 1 {
        x += f;
    }
    x
}

// ---- u128 arithmetic modulo p^M (p^M < 2^63 so products fit) ----

pub fn mul_mod_u128(a: u128, b: u128, m: u128) -> u128 {
    debug_assert!(m < (1 << 63));
    (a % m) * (b % m) % m
}

pub fn pow_mod_u128(mut b: u128, mut e: u128, m: u128) -> u128 {
    let mut acc = 1u128 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_mod_u128(acc, b, m);
        }
        b = mul_mod_u128(b, b, m);
        e >>= 1;
    }
    acc
}

/// Inverse of a modulo m (m a prime power, a a unit).
pub fn inv_mod_u128(a: u128, m: u128) -> u128 {
    // extended Euclid over i256 is overkill; m is a prime power so use
    // Newton-Hensel on the inverse mod p lifted to mod m.
    let (mut g, mut x, mut prev_g, mut prev_x) = (m as i128, 0i128, (a % m) as i128, 1i128);
    while g != 0 {
        let q = prev_g / g;
        let tmp = prev_g - q * g;
        prev_g = g;
        g = tmp;
        let tmp = prev_x - q * x;
        prev_x = x;
        x = tmp;
    }
    assert_eq!(prev_g, 1, "inv_mod_u128 of non-unit");
    let red = prev_x.rem_euclid(m as i128);
    red as u128
}

pub fn val_u128(mut x: u128, p: u64) -> Option<u32> {
    if x == 0 {
        return None;
    }
    let p = p as u128;
    let mut v = 0;
    while x % p == 0 {
        x /= p;
        v += 1;
    }
    Some(v)
}

// ---- BigUint helpers ----

pub fn big_pow(p: u64, m: u32) -> BigUint {
    BigUint::from(p).pow(m)
}

pub fn big_val(x: &BigUint, p: u64) -> Option<u32> {
    if x.is_zero() {
        return None;
    }
    let p = BigUint::from(p);
    let mut v = 0;
    let mut x = x.clone();
    loop {
        let (q, r) = num_integer::Integer::div_rem(&x, &p);
        if !r.is_zero() {
            return Some(v);
        }
        x = q;
        v += 1;
    }
}

/// Inverse of a modulo p^m (a a unit mod p).
pub fn big_inv_mod(a: &BigUint, p: u64, m: u32) -> BigUint {
    let modulus = big_pow(p, m);
    let a = a % &modulus;
    // Hensel: x_{k+1} = x_k (2 - a x_k)
    let a0 = (&a % p).try_into().ok().and_then(|r: u64| {
        if gcd(r, p) == 1 {
            Some(r)
        } else {
            None
        }
    });
    let a0 = a0.expect("big_inv_mod of non-unit");
    let mut x = BigUint::from(inv_mod_u128(a0 as u128, p as u128) as u64);
    let two = BigUint::from(2u8);
    let mut prec = 1u32;
    while prec < m {
        prec = (prec * 2).min(m);
        let pm = big_pow(p, prec);
        let t = (&a * &x) % &pm;
        let corr = if two >= t {
            (&two - &t) % &pm
        } else {
            &pm - ((t - &two) % &pm)
        };
        x = (&x * corr) % &pm;
    }
    debug_assert!(((&a * &x) % &modulus).is_one() || modulus.is_one());
    x
}

/// Base-p little-endian digits of x, exactly `len` of them.
pub fn big_digits(x: &BigUint, p: u64, len: u32) -> Vec<u64> {
    let p = BigUint::from(p);
    let mut digits = Vec::with_capacity(len as usize);
    let mut x = x.clone();
    for _ in 0..len {
        let (q, r) = num_integer::Integer::div_rem(&x, &p);
        digits.push(r.try_into().unwrap());
        x = q;
    }
    digits
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_and_roots() {
        assert_eq!(mult_order(2, 7), 3); // 2^3 = 8 = 1 mod 7
        assert_eq!(mult_order(7, 3), 1);
        assert!(is_prime(37));
        assert!(!is_prime(3247));
        assert_eq!(factorize(3247), vec![(17, 1), (191, 1)]);
        assert_eq!(primitive_root(7), 3);
        assert_eq!(euler_phi(8), 4);
    }

    #[test]
    fn crt_and_lift() {
        let x = crt(2, 5, 3, 7);
        assert_eq!(x % 5, 2);
        assert_eq!(x % 7, 3);
        let l = coprime_lift(5, 5, 15);
        assert_eq!(l % 5, 0);
        // coprime_lift only used with unit residues; check a unit case
        let l = coprime_lift(2, 5, 15);
        assert_eq!(l % 5, 2);
        assert_eq!(gcd(l, 15), 1);
    }

    #[test]
    fn big_inverse() {
        let a = BigUint::from(7u32);
        let inv = big_inv_mod(&a, 5, 6);
        let pm = big_pow(5, 6);
        assert!(((a * inv) % pm).is_one());
    }
}
