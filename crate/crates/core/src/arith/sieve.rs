//! Segmented sieve of Eratosthenes with arithmetic-progression filtering.

use crate::error::{Error, Result};
use crate::arith::gcd;

/// Default largest sieve bound accepted by [`PrimeSieve`].
pub const DEFAULT_CAPACITY: u64 = 100_000_000;

const SEGMENT: u64 = 1 << 18;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PrimeSieve {
    capacity: u64,
}

impl Default for PrimeSieve {
    fn default() -> Self {
        Self {
            capacity: DEFAULT_CAPACITY,
        }
    }
}

impl PrimeSieve {
    pub fn with_capacity(capacity: u64) -> Self {
        Self { capacity }
    }

    pub fn capacity(&self) -> u64 {
        self.capacity
    }

    fn check(&self, hi: u64) -> Result<()> {
        if hi > self.capacity {
            return Err(Error::CapacityExceeded {
                requested: hi,
                capacity: self.capacity,
            });
        }
        Ok(())
    }

    /// All primes `p` with `lo < p <= hi`, ascending.
    pub fn primes_between(&self, lo: u64, hi: u64) -> Result<Vec<u64>> {
        self.check(hi)?;
        let mut out = Vec::new();
        for_each_prime(lo, hi, |p| out.push(p));
        Ok(out)
    }

    pub fn primes_up_to(&self, hi: u64) -> Result<Vec<u64>> {
        self.primes_between(0, hi)
    }

    /// Number of primes `p <= x`.
    pub fn prime_count(&self, x: u64) -> Result<u64> {
        self.check(x)?;
        let mut n = 0;
        for_each_prime(0, x, |_| n += 1);
        Ok(n)
    }

    /// Number of primes `p <= x` with `p ≡ residue (mod d)`.
    pub fn prime_count_ap(&self, x: u64, d: u64, residue: u64) -> Result<u64> {
        self.check(x)?;
        validate_progression(d, residue)?;
        let r = residue % d;
        let mut n = 0;
        for_each_prime(0, x, |p| {
            if p % d == r {
                n += 1
            }
        });
        Ok(n)
    }

    /// Primes `p` with `lo < p <= hi` and `p ≡ residue (mod d)`, ascending.
    /// Real bounds are floored, so `(10, 10.5]` contains no integers above 10.
    pub fn primes_in_ap(&self, lo: f64, hi: f64, d: u64, residue: u64) -> Result<Vec<u64>> {
        if !(lo >= 0.0 && lo < hi && hi.is_finite()) {
            return Err(Error::invalid("range", format!("need 0 <= lo < hi, got ({lo}, {hi}]")));
        }
        validate_progression(d, residue)?;
        let hi_int = hi.floor() as u64;
        self.check(hi_int)?;
        let lo_int = lo.floor() as u64;
        let r = residue % d;
        let mut out = Vec::new();
        for_each_prime(lo_int, hi_int, |p| {
            if p % d == r {
                out.push(p)
            }
        });
        Ok(out)
    }
}

fn validate_progression(d: u64, residue: u64) -> Result<()> {
    if d == 0 {
        return Err(Error::invalid("d", "modulus must be >= 1"));
    }
    if d > 1 && gcd(residue % d, d) != 1 {
        return Err(Error::NotCoprime { a: residue, m: d });
    }
    Ok(())
}

/// Free-function form using the default capacity.
pub fn sieve_primes_in_ap(lo: f64, hi: f64, d: u64, residue: u64) -> Result<Vec<u64>> {
    PrimeSieve::default().primes_in_ap(lo, hi, d, residue)
}

fn small_primes(limit: u64) -> Vec<u64> {
    let limit = limit as usize;
    let mut composite = vec![false; limit + 1];
    let mut out = Vec::new();
    for i in 2..=limit {
        if !composite[i] {
            out.push(i as u64);
            let mut j = i * i;
            while j <= limit {
                composite[j] = true;
                j += i;
            }
        }
    }
    out
}

/// Calls `f` on every prime in `(lo, hi]` in increasing order.
fn for_each_prime(lo: u64, hi: u64, mut f: impl FnMut(u64)) {
    if hi < 2 || lo >= hi {
        return;
    }
    let base = small_primes(isqrt(hi));
    let mut start = lo + 1;
    let mut seg = vec![true; SEGMENT as usize];
    while start <= hi {
        let end = (start + SEGMENT - 1).min(hi);
        let len = (end - start + 1) as usize;
        seg[..len].fill(true);
        for &p in &base {
            if p * p > end {
                break;
            }
            let first = (start.div_ceil(p) * p).max(p * p);
            let mut m = first;
            while m <= end {
                seg[(m - start) as usize] = false;
                m += p;
            }
        }
        for (i, &is_p) in seg[..len].iter().enumerate() {
            let n = start + i as u64;
            if is_p && n >= 2 {
                f(n);
            }
        }
        start = end + 1;
    }
}

pub(crate) fn isqrt(n: u64) -> u64 {
    let mut r = (n as f64).sqrt() as u64;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r
}
