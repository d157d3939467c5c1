//! Dirichlet coefficients `a(n)` of the Dedekind zeta function of `Q(ζ_d)`:
//! the number of ideals of norm `n`.

use std::collections::HashMap;
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};

use crate::arith::{compositions_count, euler_phi, is_prime, multiplicative_order, FactoredInteger};
use crate::characters::CharacterGroup;
use crate::error::{Error, Result};

/// Ramification index `e`, residue degree `f` and number `g` of primes above
/// a rational prime `p` in `Q(ζ_d)`; `e f g = φ(d)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SplittingData {
    pub p: u64,
    pub d: u64,
    pub e: u64,
    pub f: u64,
    pub g: u64,
}

fn check_modulus(d: u64) -> Result<()> {
    if d < 3 {
        return Err(Error::invalid("d", format!("need d >= 3, got {d}")));
    }
    Ok(())
}

/// Splitting law in `Q(ζ_d)`. For `d = p^v m` with `p ∤ m` the prime `p`
/// has `e = φ(p^v)`, `f = ord_m(p)` and `g = φ(m)/f`.
pub fn splitting_data(p: u64, d: u64) -> Result<SplittingData> {
    check_modulus(d)?;
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    let mut m = d;
    let mut pv = 1;
    while m % p == 0 {
        m /= p;
        pv *= p;
    }
    let e = euler_phi(pv);
    let f = multiplicative_order(p, m)?;
    let g = euler_phi(m) / f;
    Ok(SplittingData { p, d, e, f, g })
}

/// `a(p^k)`: the number of ways to write `k/f` as a sum of `g` non-negative
/// integers when `f | k`, and 0 otherwise.
pub fn coefficient_prime_power(p: u64, k: u32, d: u64) -> Result<u64> {
    let s = splitting_data(p, d)?;
    Ok(local_coefficient(&s, k)?)
}

fn local_coefficient(s: &SplittingData, k: u32) -> Result<u64> {
    let k = k as u64;
    if k % s.f != 0 {
        return Ok(0);
    }
    compositions_count(k / s.f, s.g)
}

/// `a(n)`, extended multiplicatively from prime powers.
pub fn coefficient(n: &FactoredInteger, d: u64) -> Result<u64> {
    check_modulus(d)?;
    let mut acc: u64 = 1;
    for &(p, k) in n.factors() {
        let local = coefficient_prime_power(p, k, d)?;
        if local == 0 {
            return Ok(0);
        }
        acc = acc.checked_mul(local).ok_or(Error::Overflow("coefficient"))?;
    }
    Ok(acc)
}

/// Memoised `a(p^k)` lookups for repeated evaluation over the same primes.
#[derive(Debug, Clone)]
pub struct LocalFactors {
    d: u64,
    cache: HashMap<u64, SplittingData>,
}

impl LocalFactors {
    pub fn new(d: u64) -> Result<Self> {
        check_modulus(d)?;
        Ok(Self {
            d,
            cache: HashMap::new(),
        })
    }

    pub fn modulus(&self) -> u64 {
        self.d
    }

    pub fn splitting(&mut self, p: u64) -> Result<SplittingData> {
        if let Some(s) = self.cache.get(&p) {
            return Ok(*s);
        }
        let s = splitting_data(p, self.d)?;
        self.cache.insert(p, s);
        Ok(s)
    }

    pub fn prime_power(&mut self, p: u64, k: u32) -> Result<u64> {
        let s = self.splitting(p)?;
        local_coefficient(&s, k)
    }

    pub fn coefficient(&mut self, n: &FactoredInteger) -> Result<u64> {
        let mut acc: u64 = 1;
        for &(p, k) in n.factors() {
            let local = self.prime_power(p, k)?;
            acc = acc.checked_mul(local).ok_or(Error::Overflow("coefficient"))?;
        }
        Ok(acc)
    }

    /// `a(n)` as an exact big integer (no overflow).
    pub fn coefficient_big(&mut self, n: &FactoredInteger) -> Result<BigInt> {
        let mut acc = BigInt::one();
        for &(p, k) in n.factors() {
            acc *= BigInt::from(self.prime_power(p, k)?);
        }
        Ok(acc)
    }
}

/// Largest table accepted by [`CoefficientTable::new`].
pub const TABLE_CAPACITY: usize = 50_000_000;

/// `a(1..=n_max)` built by a smallest-prime-factor sieve.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoefficientTable {
    d: u64,
    /// `values[n]` = a(n); `values[0]` is unused and 0.
    values: Vec<u32>,
}

impl CoefficientTable {
    pub fn new(d: u64, n_max: usize) -> Result<Self> {
        check_modulus(d)?;
        if n_max > TABLE_CAPACITY {
            return Err(Error::CapacityExceeded {
                requested: n_max as u64,
                capacity: TABLE_CAPACITY as u64,
            });
        }
        let mut spf = vec![0u32; n_max + 1];
        let mut values = vec![0u32; n_max + 1];
        if n_max >= 1 {
            values[1] = 1;
        }
        let mut local = LocalFactors::new(d)?;
        for n in 2..=n_max {
            if spf[n] == 0 {
                let mut j = n;
                while j <= n_max {
                    if spf[j] == 0 {
                        spf[j] = n as u32;
                    }
                    j += n;
                }
            }
            let p = spf[n] as usize;
            let mut rest = n;
            let mut k = 0;
            while rest % p == 0 {
                rest /= p;
                k += 1;
            }
            let ap = local.prime_power(p as u64, k)?;
            let v = (values[rest] as u64)
                .checked_mul(ap)
                .filter(|&v| v <= u32::MAX as u64)
                .ok_or(Error::Overflow("coefficient table"))?;
            values[n] = v as u32;
        }
        Ok(Self { d, values })
    }

    pub fn modulus(&self) -> u64 {
        self.d
    }

    pub fn len(&self) -> usize {
        self.values.len().saturating_sub(1)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get(&self, n: usize) -> u32 {
        self.values[n]
    }

    /// Indexed by `n`; entry 0 is unused.
    pub fn as_slice(&self) -> &[u32] {
        &self.values
    }

    /// CSV with header `n,a_n`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("n,a_n\n");
        for n in 1..self.values.len() {
            let _ = writeln!(s, "{},{}", n, self.values[n]);
        }
        s
    }

    pub fn from_csv(d: u64, text: &str) -> Result<Self> {
        let mut lines = text.lines();
        if lines.next().map(str::trim) != Some("n,a_n") {
            return Err(Error::Parse("missing `n,a_n` header".into()));
        }
        let mut values = vec![0u32];
        for (i, line) in lines.enumerate() {
            let (n, a) = line
                .split_once(',')
                .ok_or_else(|| Error::Parse(format!("bad row `{line}`")))?;
            let n: usize = n.trim().parse().map_err(|_| Error::Parse(format!("bad n `{n}`")))?;
            if n != i + 1 {
                return Err(Error::Parse(format!("expected n = {}, found {n}", i + 1)));
            }
            values.push(a.trim().parse().map_err(|_| Error::Parse(format!("bad a(n) `{a}`")))?);
        }
        Ok(Self { d, values })
    }
}

/// `a(1..=n_max)` as the Dirichlet convolution of `1` with `χ*(n)` for every
/// non-principal `χ` mod `d`. Independent of the splitting law. The result
/// is indexed by `n` (entry 0 is 0).
pub fn coefficient_oracle(n_max: usize, d: u64) -> Result<Vec<u64>> {
    if n_max == 0 {
        return Err(Error::invalid("n_max", "need n_max >= 1"));
    }
    let group = CharacterGroup::new(d)?;
    let mut acc = vec![Complex64::new(1.0, 0.0); n_max + 1];
    acc[0] = Complex64::new(0.0, 0.0);
    for chi in group.characters().iter().skip(1) {
        let (_, prim) = chi.conductor_and_primitive();
        let table = prim.value_table();
        let q = prim.modulus() as usize;
        let mut next = vec![Complex64::new(0.0, 0.0); n_max + 1];
        for k in 1..=n_max {
            let ck = acc[k];
            if ck.norm_sqr() == 0.0 {
                continue;
            }
            let mut j = 1;
            while k * j <= n_max {
                next[k * j] += ck * table[j % q];
                j += 1;
            }
        }
        acc = next;
    }
    let mut out = vec![0u64; n_max + 1];
    for n in 1..=n_max {
        let z = acc[n];
        let r = z.re.round();
        if z.im.abs() > 1e-6 || (z.re - r).abs() > 1e-6 || r < 0.0 {
            return Err(Error::NonIntegralCoefficient {
                n,
                value: format!("{z}"),
            });
        }
        out[n] = r as u64;
    }
    Ok(out)
}

/// `a'(n) = ((φ(d) + 1)/2)^ω(n)`, exactly.
pub fn a_prime_companion(n: &FactoredInteger, d: u64) -> Result<BigRational> {
    check_modulus(d)?;
    let base = BigRational::new(BigInt::from(euler_phi(d) + 1), BigInt::from(2));
    Ok(num_traits::pow(base, n.omega()))
}

fn lemma1_precondition(x: &FactoredInteger, d: u64, name: &'static str) -> Result<()> {
    if !x.is_squarefree() {
        return Err(Error::invalid(name, format!("{x} is not squarefree")));
    }
    if let Some(p) = x.primes().find(|p| p % d != 1) {
        return Err(Error::invalid(name, format!("prime factor {p} is not 1 mod {d}")));
    }
    Ok(())
}

/// Checks `a(mn) >= a'(m) a(n)` exactly for squarefree `m, n` built from
/// primes `≡ 1 (mod d)`.
pub fn verify_lemma1_part2(m: &FactoredInteger, n: &FactoredInteger, d: u64) -> Result<bool> {
    check_modulus(d)?;
    lemma1_precondition(m, d, "m")?;
    lemma1_precondition(n, d, "n")?;
    let mut local = LocalFactors::new(d)?;
    let lhs = BigRational::from_integer(local.coefficient_big(&m.mul(n))?);
    let rhs = a_prime_companion(m, d)? * BigRational::from_integer(local.coefficient_big(n)?);
    Ok(lhs >= rhs)
}

/// Exact rational to `f64`, for reporting.
pub fn rational_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}
