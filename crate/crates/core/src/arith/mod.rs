//! Exact elementary number theory on machine integers and factored integers.

mod factored;
pub mod sieve;

pub use factored::{gcd_lcm, ratio_log, FactoredInteger, LOG_SLACK};
pub use sieve::{sieve_primes_in_ap, PrimeSieve, DEFAULT_CAPACITY};

use crate::error::{Error, Result};

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

#[inline]
pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Deterministic Miller–Rabin for all `u64`.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    const SMALL: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    for p in SMALL {
        if n % p == 0 {
            return n == p;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for a in SMALL {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn pollard_brent(n: u64) -> u64 {
    if n % 2 == 0 {
        return 2;
    }
    let mut c = 1u64;
    loop {
        let f = |x: u64| (mul_mod(x, x, n) + c) % n;
        let (mut x, mut y, mut g) = (2u64, 2u64, 1u64);
        let mut q = 1u64;
        let mut r = 1usize;
        let mut ys = y;
        while g == 1 {
            x = y;
            for _ in 0..r {
                y = f(y);
            }
            let mut k = 0;
            while k < r && g == 1 {
                ys = y;
                for _ in 0..(128.min(r - k)) {
                    y = f(y);
                    q = mul_mod(q, x.abs_diff(y), n);
                }
                g = gcd(q, n);
                k += 128;
            }
            r *= 2;
        }
        if g == n {
            loop {
                ys = f(ys);
                g = gcd(x.abs_diff(ys), n);
                if g > 1 {
                    break;
                }
            }
        }
        if g != n {
            return g;
        }
        c += 1;
    }
}

fn factor_into(n: u64, out: &mut Vec<u64>) {
    if n == 1 {
        return;
    }
    if is_prime(n) {
        out.push(n);
        return;
    }
    let f = pollard_brent(n);
    factor_into(f, out);
    factor_into(n / f, out);
}

/// Prime factorisation as sorted `(prime, exponent)` pairs; empty for 1.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    assert!(n > 0, "factorize(0)");
    let mut primes = Vec::new();
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47] {
        while n % p == 0 {
            primes.push(p);
            n /= p;
        }
    }
    factor_into(n, &mut primes);
    primes.sort_unstable();
    let mut out: Vec<(u64, u32)> = Vec::new();
    for p in primes {
        match out.last_mut() {
            Some((q, e)) if *q == p => *e += 1,
            _ => out.push((p, 1)),
        }
    }
    out
}

pub fn euler_phi(d: u64) -> u64 {
    if d == 0 {
        return 0;
    }
    factorize(d)
        .into_iter()
        .map(|(p, e)| (p - 1) * p.pow(e - 1))
        .product()
}

pub fn omega(n: &FactoredInteger) -> usize {
    n.omega()
}

pub fn p_plus(n: &FactoredInteger) -> u64 {
    n.p_plus()
}

pub fn divisors(n: u64) -> Vec<u64> {
    let mut out = vec![1u64];
    for (p, e) in factorize(n) {
        let len = out.len();
        let mut pk = 1;
        for _ in 0..e {
            pk *= p;
            for i in 0..len {
                out.push(out[i] * pk);
            }
        }
    }
    out.sort_unstable();
    out
}

/// Smallest `f >= 1` with `p^f ≡ 1 (mod m)`.
pub fn multiplicative_order(p: u64, m: u64) -> Result<u64> {
    if m == 0 {
        return Err(Error::invalid("m", "modulus must be >= 1"));
    }
    if m == 1 {
        return Ok(1);
    }
    if gcd(p % m, m) != 1 {
        return Err(Error::NotCoprime { a: p, m });
    }
    let mut f = euler_phi(m);
    for (q, _) in factorize(f) {
        while f % q == 0 && pow_mod(p, f / q, m) == 1 {
            f /= q;
        }
    }
    Ok(f)
}

/// Number of ways to write `j` as an ordered sum of `r` non-negative
/// integers, `binomial(j + r - 1, r - 1)`.
pub fn compositions_count(j: u64, r: u64) -> Result<u64> {
    if r == 0 {
        return Ok(u64::from(j == 0));
    }
    let n = j + r - 1;
    let k = (r - 1).min(j);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) is divisible by (i + 1) at every step
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > u64::MAX as u128 {
            return Err(Error::Overflow("compositions_count"));
        }
    }
    Ok(acc as u64)
}

/// Natural logarithm iterated `k` times.
pub fn iterated_log(x: f64, k: u32) -> f64 {
    (0..k).fold(x, |acc, _| acc.ln())
}
