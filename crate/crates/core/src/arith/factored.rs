use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};

use crate::arith::factorize;
use crate::error::{Error, Result};
use crate::summation::NeumaierSum;

/// Relative slack used when ordering by magnitude.
pub const LOG_SLACK: f64 = 1e-12;

/// A positive integer held as its prime factorisation. The integer value is
/// never materialised, so elements far beyond `u64` are fine.
#[derive(Clone, Default)]
pub struct FactoredInteger {
    factors: Vec<(u64, u32)>,
    log_value: f64,
}

impl FactoredInteger {
    pub fn one() -> Self {
        Self::default()
    }

    pub fn from_u64(n: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("n", "zero has no factorisation"));
        }
        Ok(Self::from_sorted_unchecked(factorize(n)))
    }

    pub fn prime(p: u64) -> Self {
        Self::from_sorted_unchecked(vec![(p, 1)])
    }

    /// Builds from `(prime, exponent)` pairs. Pairs may come in any order;
    /// zero exponents are dropped and repeated primes rejected. Primality of
    /// the bases is the caller's responsibility.
    pub fn from_factors(mut factors: Vec<(u64, u32)>) -> Result<Self> {
        factors.retain(|&(_, e)| e > 0);
        factors.sort_unstable();
        for w in factors.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(Error::invalid("factors", format!("prime {} repeated", w[0].0)));
            }
        }
        if factors.iter().any(|&(p, _)| p < 2) {
            return Err(Error::invalid("factors", "bases must be >= 2"));
        }
        Ok(Self::from_sorted_unchecked(factors))
    }

    /// Product of distinct primes.
    pub fn squarefree(primes: &[u64]) -> Result<Self> {
        Self::from_factors(primes.iter().map(|&p| (p, 1)).collect())
    }

    pub(crate) fn from_sorted_unchecked(factors: Vec<(u64, u32)>) -> Self {
        let log_value = factors
            .iter()
            .map(|&(p, e)| e as f64 * (p as f64).ln())
            .collect::<NeumaierSum>()
            .total();
        Self { factors, log_value }
    }

    pub fn factors(&self) -> &[(u64, u32)] {
        &self.factors
    }

    pub fn log_value(&self) -> f64 {
        self.log_value
    }

    pub fn is_one(&self) -> bool {
        self.factors.is_empty()
    }

    /// Number of distinct prime factors.
    pub fn omega(&self) -> usize {
        self.factors.len()
    }

    /// Largest prime factor, with `P+(1) = 1`.
    pub fn p_plus(&self) -> u64 {
        self.factors.last().map_or(1, |&(p, _)| p)
    }

    pub fn is_squarefree(&self) -> bool {
        self.factors.iter().all(|&(_, e)| e == 1)
    }

    pub fn exponent_of(&self, p: u64) -> u32 {
        self.factors
            .binary_search_by_key(&p, |&(q, _)| q)
            .map_or(0, |i| self.factors[i].1)
    }

    pub fn primes(&self) -> impl Iterator<Item = u64> + '_ {
        self.factors.iter().map(|&(p, _)| p)
    }

    /// The integer value when it fits in a `u64`.
    pub fn to_u64(&self) -> Option<u64> {
        let mut acc: u64 = 1;
        for &(p, e) in &self.factors {
            acc = acc.checked_mul(p.checked_pow(e)?)?;
        }
        Some(acc)
    }

    pub fn is_coprime(&self, other: &Self) -> bool {
        merge(&self.factors, &other.factors).all(|(_, a, b)| a == 0 || b == 0)
    }

    pub fn divides(&self, other: &Self) -> bool {
        merge(&self.factors, &other.factors).all(|(_, a, b)| a <= b)
    }

    fn combine(&self, other: &Self, f: impl Fn(u32, u32) -> u32) -> Self {
        let v = merge(&self.factors, &other.factors)
            .filter_map(|(p, a, b)| {
                let e = f(a, b);
                (e > 0).then_some((p, e))
            })
            .collect();
        Self::from_sorted_unchecked(v)
    }

    pub fn gcd(&self, other: &Self) -> Self {
        self.combine(other, u32::min)
    }

    pub fn lcm(&self, other: &Self) -> Self {
        self.combine(other, u32::max)
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.combine(other, |a, b| a + b)
    }

    /// `self / other` when the division is exact.
    pub fn checked_div(&self, other: &Self) -> Option<Self> {
        if !other.divides(self) {
            return None;
        }
        Some(self.combine(other, |a, b| a - b))
    }

    /// `ln((m, n) / [m, n])`, always `<= 0`. The exponent differences are
    /// formed exactly before the single conversion to floating point.
    pub fn ratio_log(&self, other: &Self) -> f64 {
        -merge(&self.factors, &other.factors)
            .map(|(p, a, b)| a.abs_diff(b) as f64 * (p as f64).ln())
            .collect::<NeumaierSum>()
            .total()
    }

    /// Magnitude order by `log_value` with a relative slack, breaking ties
    /// on the exponent vector.
    pub fn cmp_magnitude(&self, other: &Self) -> Ordering {
        let (a, b) = (self.log_value, other.log_value);
        let slack = LOG_SLACK * a.abs().max(b.abs()).max(1.0);
        if a < b - slack {
            Ordering::Less
        } else if a > b + slack {
            Ordering::Greater
        } else {
            self.factors.cmp(&other.factors)
        }
    }

    /// Text form `p:e p:e ...`, or `1` for the empty product.
    pub fn to_record(&self) -> String {
        if self.is_one() {
            return "1".into();
        }
        self.factors
            .iter()
            .map(|(p, e)| format!("{p}:{e}"))
            .collect::<Vec<_>>()
            .join(" ")
    }

    pub fn parse_record(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "1" {
            return Ok(Self::one());
        }
        let mut v = Vec::new();
        for tok in s.split_whitespace() {
            let (p, e) = tok
                .split_once(':')
                .ok_or_else(|| Error::Parse(format!("expected prime:exponent, got `{tok}`")))?;
            let p = p.parse().map_err(|_| Error::Parse(format!("bad prime `{p}`")))?;
            let e = e.parse().map_err(|_| Error::Parse(format!("bad exponent `{e}`")))?;
            v.push((p, e));
        }
        Self::from_factors(v).map_err(|e| Error::Parse(e.to_string()))
    }
}

/// Joint walk over two sorted factor lists yielding `(p, exp_a, exp_b)`.
pub(crate) fn merge<'a>(
    a: &'a [(u64, u32)],
    b: &'a [(u64, u32)],
) -> impl Iterator<Item = (u64, u32, u32)> + 'a {
    let (mut i, mut j) = (0, 0);
    std::iter::from_fn(move || match (a.get(i), b.get(j)) {
        (Some(&(p, e)), Some(&(q, f))) => match p.cmp(&q) {
            Ordering::Less => {
                i += 1;
                Some((p, e, 0))
            }
            Ordering::Greater => {
                j += 1;
                Some((q, 0, f))
            }
            Ordering::Equal => {
                i += 1;
                j += 1;
                Some((p, e, f))
            }
        },
        (Some(&(p, e)), None) => {
            i += 1;
            Some((p, e, 0))
        }
        (None, Some(&(q, f))) => {
            j += 1;
            Some((q, 0, f))
        }
        (None, None) => None,
    })
}

/// `(gcd, lcm)` computed componentwise.
pub fn gcd_lcm(m: &FactoredInteger, n: &FactoredInteger) -> (FactoredInteger, FactoredInteger) {
    (m.gcd(n), m.lcm(n))
}

pub fn ratio_log(m: &FactoredInteger, n: &FactoredInteger) -> f64 {
    m.ratio_log(n)
}

impl PartialEq for FactoredInteger {
    fn eq(&self, other: &Self) -> bool {
        self.factors == other.factors
    }
}

impl Eq for FactoredInteger {}

impl Hash for FactoredInteger {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.factors.hash(state);
    }
}

impl PartialOrd for FactoredInteger {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for FactoredInteger {
    fn cmp(&self, other: &Self) -> Ordering {
        self.cmp_magnitude(other)
    }
}

impl fmt::Debug for FactoredInteger {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FactoredInteger({})", self)
    }
}

impl fmt::Display for FactoredInteger {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(v) = self.to_u64() {
            return write!(f, "{v}");
        }
        let parts: Vec<String> = self
            .factors
            .iter()
            .map(|&(p, e)| if e == 1 { p.to_string() } else { format!("{p}^{e}") })
            .collect();
        write!(f, "{}", parts.join("*"))
    }
}
