//! The resonator set: primes `≡ 1 (mod d)` in geometric intervals `I_k`,
//! divisor budgets `J_k`, component sets `M_k = {(ℓ/q) N_k}` and their
//! product set `M`.

use std::f64::consts::E;
use std::fmt::Write as _;

use rayon::prelude::*;

use crate::arith::{euler_phi, iterated_log, FactoredInteger, PrimeSieve};
use crate::error::{Error, Result};

pub const DEFAULT_U: f64 = 2.4;
pub const DEFAULT_B: f64 = 1.2;
pub const DEFAULT_GAMMA: f64 = 0.3;

/// `h = e² b (√u - 1)/(√u + 1)`.
pub fn h_constant(u: f64, b: f64) -> f64 {
    let r = u.sqrt();
    E * E * b * (r - 1.0) / (r + 1.0)
}

/// `λ = √h / e`.
pub fn default_lambda(u: f64, b: f64) -> f64 {
    h_constant(u, b).sqrt() / E
}

/// `L(x) = exp(√(log x · log₃x / log₂x))` for `x > 16`.
pub fn growth_scale(x: f64) -> f64 {
    (x.ln() * iterated_log(x, 3) / iterated_log(x, 2)).sqrt().exp()
}

/// One level `k` of the construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Level {
    pub k: usize,
    /// `I_k ⊂ (lo, hi]`.
    pub lo: f64,
    pub hi: f64,
    pub primes: Vec<u64>,
    /// `J_k`, the divisor-count budget (even).
    pub budget: u64,
    /// `j_k = ⌊(λ/k) √(log N / (log₂N log₃N))⌋`.
    pub small_budget: u64,
    pub n_k: FactoredInteger,
}

impl Level {
    /// `P_k = |I_k|`.
    pub fn prime_count(&self) -> usize {
        self.primes.len()
    }

    /// Number of admissible `(ℓ, q)` pairs, saturating.
    pub fn component_count(&self) -> u128 {
        pair_count(self.primes.len() as u64, self.budget / 2)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResonatorParams {
    pub d: u64,
    pub n: u64,
    pub u: f64,
    pub b: f64,
    pub gamma: f64,
    pub lambda: f64,
    pub levels: Vec<Level>,
    pub warnings: Vec<String>,
}

fn check_params(d: u64, n: u64, u: f64, b: f64, gamma: f64, lambda: f64) -> Result<()> {
    if d < 3 {
        return Err(Error::invalid("d", format!("need d >= 3, got {d}")));
    }
    if n <= 16 {
        return Err(Error::invalid("N", format!("need N > 16, got {n}")));
    }
    if !(u > 1.0 && u <= E + 1e-12) {
        return Err(Error::invalid("u", format!("need u in (1, e], got {u}")));
    }
    if !(b > 1.0 && b.is_finite()) {
        return Err(Error::invalid("b", format!("need b > 1, got {b}")));
    }
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::invalid("gamma", format!("need gamma in (0, 1), got {gamma}")));
    }
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::invalid("lambda", format!("need lambda > 0, got {lambda}")));
    }
    let bound = 1.0 / u.ln();
    if b * gamma >= bound - 1e-12 {
        return Err(Error::Admissibility {
            product: b * gamma,
            bound,
        });
    }
    Ok(())
}

/// Validates the parameters and computes every level with the default sieve.
pub fn build_params(d: u64, n: u64, u: f64, b: f64, gamma: f64, lambda: f64) -> Result<ResonatorParams> {
    build_params_with(&PrimeSieve::default(), d, n, u, b, gamma, lambda)
}

pub fn build_params_with(
    sieve: &PrimeSieve,
    d: u64,
    n: u64,
    u: f64,
    b: f64,
    gamma: f64,
    lambda: f64,
) -> Result<ResonatorParams> {
    check_params(d, n, u, b, gamma, lambda)?;
    let phi = euler_phi(d);
    let nf = n as f64;
    let (l1, l2, l3) = (nf.ln(), iterated_log(nf, 2), iterated_log(nf, 3));
    let k_levels = l2.powf(gamma * phi as f64).floor() as usize;
    let mut warnings = Vec::new();
    if d as f64 > l2 * l2 {
        warnings.push(format!(
            "d = {d} exceeds (log2 N)^2 = {:.3}; outside the uniform Siegel-Walfisz range",
            l2 * l2
        ));
    }
    let scale = l1 * l2;
    let levels = (1..=k_levels)
        .into_par_iter()
        .map(|k| {
            let kf = k as f64;
            let lo = u.powi(k as i32) * scale;
            let hi = u.powi(k as i32 + 1) * scale;
            let primes = sieve.primes_in_ap(lo, hi, d, 1)?;
            let budget = 2 * (b * l1 / (2.0 * kf * kf * phi as f64 * l3)).floor() as u64;
            let small_budget = ((lambda / kf) * (l1 / (l2 * l3)).sqrt()).floor() as u64;
            Ok(Level {
                k,
                lo,
                hi,
                n_k: FactoredInteger::squarefree(&primes)?,
                primes,
                budget,
                small_budget,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ResonatorParams {
        d,
        n,
        u,
        b,
        gamma,
        lambda,
        levels,
        warnings,
    })
}

impl ResonatorParams {
    /// Parameters with the default `(u, b, γ)` and `λ = √h/e`.
    pub fn with_defaults(d: u64, n: u64) -> Result<Self> {
        build_params(d, n, DEFAULT_U, DEFAULT_B, DEFAULT_GAMMA, default_lambda(DEFAULT_U, DEFAULT_B))
    }

    /// `K_levels = ⌊(log₂N)^{γφ(d)}⌋`.
    pub fn k_levels(&self) -> usize {
        self.levels.len()
    }

    pub fn phi(&self) -> u64 {
        euler_phi(self.d)
    }

    pub fn h(&self) -> f64 {
        h_constant(self.u, self.b)
    }

    /// Level `k` (1-based).
    pub fn level(&self, k: usize) -> Result<&Level> {
        k.checked_sub(1)
            .and_then(|i| self.levels.get(i))
            .ok_or_else(|| Error::invalid("k", format!("need 1 <= k <= {}, got {k}", self.levels.len())))
    }
}

/// `Σ_{i, j ≤ h, i + j ≤ p} C(p, i) C(p - i, j)`, saturating.
fn pair_count(p: u64, h: u64) -> u128 {
    let binom = |n: u64, k: u64| -> u128 {
        if k > n {
            return 0;
        }
        let mut acc: u128 = 1;
        for i in 0..k.min(n - k) {
            acc = acc.saturating_mul((n - i) as u128) / (i + 1) as u128;
        }
        acc
    };
    let mut total: u128 = 0;
    for i in 0..=h.min(p) {
        for j in 0..=h.min(p - i) {
            total = total.saturating_add(binom(p, i).saturating_mul(binom(p - i, j)));
        }
    }
    total
}

/// An element `m = (ℓ/q) N_k` of `M_k` with its decomposition.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ComponentElement {
    pub ell: FactoredInteger,
    pub q: FactoredInteger,
    pub m: FactoredInteger,
}

/// `(ℓ/q) N_k` for `ℓ, q` disjoint subsets of `primes`: exponent 2 on `ℓ`,
/// 0 on `q` and 1 elsewhere.
pub fn component_element(primes: &[u64], ell: &[u64], q: &[u64]) -> Result<ComponentElement> {
    let mut m = Vec::with_capacity(primes.len());
    for &p in primes {
        match (ell.contains(&p), q.contains(&p)) {
            (true, true) => return Err(Error::Construction(format!("{p} lies in both ell and q"))),
            (true, false) => m.push((p, 2)),
            (false, true) => {}
            (false, false) => m.push((p, 1)),
        }
    }
    for &p in ell.iter().chain(q) {
        if !primes.contains(&p) {
            return Err(Error::Construction(format!("{p} does not divide N_k")));
        }
    }
    Ok(ComponentElement {
        ell: FactoredInteger::squarefree(ell)?,
        q: FactoredInteger::squarefree(q)?,
        m: FactoredInteger::from_factors(m)?,
    })
}

/// All of `M_k` for a level with the given primes and budget `J_k`, sorted
/// by magnitude.
pub fn component_from_primes(primes: &[u64], budget: u64) -> Result<Vec<ComponentElement>> {
    let mut sorted = primes.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != primes.len() {
        return Err(Error::invalid("primes", "must be distinct"));
    }
    let half = (budget / 2) as usize;
    let mut out = Vec::new();
    let mut ell = Vec::new();
    let mut q = Vec::new();
    enumerate_pairs(&sorted, 0, half, &mut ell, &mut q, &mut out)?;
    out.sort_by(|a, b| a.m.cmp(&b.m));
    Ok(out)
}

fn enumerate_pairs(
    primes: &[u64],
    i: usize,
    half: usize,
    ell: &mut Vec<u64>,
    q: &mut Vec<u64>,
    out: &mut Vec<ComponentElement>,
) -> Result<()> {
    if i == primes.len() {
        out.push(component_element(primes, ell, q)?);
        return Ok(());
    }
    enumerate_pairs(primes, i + 1, half, ell, q, out)?;
    if ell.len() < half {
        ell.push(primes[i]);
        enumerate_pairs(primes, i + 1, half, ell, q, out)?;
        ell.pop();
    }
    if q.len() < half {
        q.push(primes[i]);
        enumerate_pairs(primes, i + 1, half, ell, q, out)?;
        q.pop();
    }
    Ok(())
}

/// Recovers `(ℓ, q)` from `m ∈ M_k` and checks the budget `ω ≤ J_k/2`.
pub fn decompose(level: &Level, m: &FactoredInteger) -> Result<(FactoredInteger, FactoredInteger)> {
    let mut ell = Vec::new();
    let mut q = Vec::new();
    for &p in &level.primes {
        match m.exponent_of(p) {
            0 => q.push(p),
            1 => {}
            2 => ell.push(p),
            e => return Err(Error::Decomposition(format!("{p}^{e} in {m} exceeds exponent 2"))),
        }
    }
    if let Some(p) = m.primes().find(|p| !level.primes.contains(p)) {
        return Err(Error::Decomposition(format!("{p} does not divide N_{}", level.k)));
    }
    let half = (level.budget / 2) as usize;
    if ell.len() > half || q.len() > half {
        return Err(Error::Decomposition(format!(
            "omega(ell) = {}, omega(q) = {} exceed J_{}/2 = {half}",
            ell.len(),
            q.len(),
            level.k
        )));
    }
    Ok((FactoredInteger::squarefree(&ell)?, FactoredInteger::squarefree(&q)?))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResonatorSet {
    pub params: ResonatorParams,
    /// `M_k` for `k = 1..=K_levels`.
    pub components: Vec<Vec<ComponentElement>>,
    /// `M`, deduplicated and sorted by magnitude.
    pub elements: Vec<FactoredInteger>,
}

/// Enumerates every `M_k` and the product set `M`. Fails if the number of
/// candidate products exceeds `10 N`, or if `|M| > N`.
pub fn build_set(params: &ResonatorParams) -> Result<ResonatorSet> {
    let cap = 10u128 * params.n as u128;
    let candidates = params
        .levels
        .iter()
        .fold(1u128, |acc, l| acc.saturating_mul(l.component_count()));
    if candidates > cap {
        return Err(Error::CapacityExceeded {
            requested: candidates.min(u64::MAX as u128) as u64,
            capacity: cap.min(u64::MAX as u128) as u64,
        });
    }
    let components = params
        .levels
        .par_iter()
        .map(|l| component_from_primes(&l.primes, l.budget))
        .collect::<Result<Vec<_>>>()?;
    let elements = product_set(&components);
    if elements.len() as u64 > params.n {
        return Err(Error::Construction(format!(
            "|M| = {} exceeds N = {}",
            elements.len(),
            params.n
        )));
    }
    Ok(ResonatorSet {
        params: params.clone(),
        components,
        elements,
    })
}

/// `{∏ m_k : m_k ∈ M_k}`, deduplicated and sorted by magnitude.
pub fn product_set(components: &[Vec<ComponentElement>]) -> Vec<FactoredInteger> {
    let mut acc = vec![FactoredInteger::one()];
    for comp in components {
        if comp.is_empty() {
            continue;
        }
        let mut next = Vec::with_capacity(acc.len() * comp.len());
        for a in &acc {
            for c in comp {
                next.push(a.mul(&c.m));
            }
        }
        acc = next;
    }
    acc.sort();
    acc.dedup();
    acc
}

impl ResonatorSet {
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn component(&self, k: usize) -> Result<&[ComponentElement]> {
        self.params.level(k)?;
        Ok(&self.components[k - 1])
    }

    /// Splits `m ∈ M` into its per-level factors `m_k`.
    pub fn split_by_level(&self, m: &FactoredInteger) -> Result<Vec<FactoredInteger>> {
        let mut parts = Vec::with_capacity(self.params.levels.len());
        let mut used = 0;
        for level in &self.params.levels {
            let f: Vec<(u64, u32)> = m
                .factors()
                .iter()
                .copied()
                .filter(|(p, _)| level.primes.binary_search(p).is_ok())
                .collect();
            used += f.len();
            parts.push(FactoredInteger::from_factors(f)?);
        }
        if used != m.omega() {
            return Err(Error::Decomposition(format!("{m} has a prime outside every I_k")));
        }
        Ok(parts)
    }

    /// Checks the element-form invariant on every component and every
    /// element of `M`.
    pub fn check_element_form(&self) -> Result<()> {
        for (level, comp) in self.params.levels.iter().zip(&self.components) {
            for c in comp {
                let (ell, q) = decompose(level, &c.m)?;
                if ell != c.ell || q != c.q || !ell.is_coprime(&q) {
                    return Err(Error::Decomposition(format!("{} has inconsistent (ell, q)", c.m)));
                }
                if !ell.mul(&q).divides(&level.n_k) {
                    return Err(Error::Decomposition(format!("ell q does not divide N_{}", level.k)));
                }
                let rebuilt = level.n_k.mul(&ell).checked_div(&q);
                if rebuilt.as_ref() != Some(&c.m) {
                    return Err(Error::Decomposition(format!("{} != (ell/q) N_{}", c.m, level.k)));
                }
            }
        }
        let d = self.params.d;
        for m in &self.elements {
            if let Some(p) = m.primes().find(|p| p % d != 1) {
                return Err(Error::Decomposition(format!("{m} has prime {p} not 1 mod {d}")));
            }
            for (level, part) in self.params.levels.iter().zip(self.split_by_level(m)?) {
                if level.primes.is_empty() {
                    continue;
                }
                decompose(level, &part)?;
            }
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let p = &self.params;
        let mut s = String::from("resonator-set v1\n");
        let _ = writeln!(
            s,
            "params d={} N={} u={} b={} gamma={} lambda={}",
            p.d, p.n, p.u, p.b, p.gamma, p.lambda
        );
        for w in &p.warnings {
            let _ = writeln!(s, "warning {w}");
        }
        for (level, comp) in p.levels.iter().zip(&self.components) {
            let primes: Vec<String> = level.primes.iter().map(u64::to_string).collect();
            let _ = writeln!(
                s,
                "level k={} lo={} hi={} J={} j={} primes={}",
                level.k,
                level.lo,
                level.hi,
                level.budget,
                level.small_budget,
                primes.join(",")
            );
            for c in comp {
                let _ = writeln!(s, "component {} | {} | {}", level.k, c.ell.to_record(), c.q.to_record());
            }
        }
        let _ = writeln!(s, "elements {}", self.elements.len());
        for m in &self.elements {
            let _ = writeln!(s, "{}", m.to_record());
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let bad = |msg: &str| Error::Parse(msg.to_string());
        let mut lines = text.lines();
        if lines.next() != Some("resonator-set v1") {
            return Err(bad("missing `resonator-set v1` header"));
        }
        let head = lines.next().and_then(|l| l.strip_prefix("params ")).ok_or_else(|| bad("missing params line"))?;
        let kv = parse_kv(head)?;
        let get = |k: &str| kv.iter().find(|(key, _)| key == k).map(|(_, v)| v.as_str()).ok_or_else(|| bad(k));
        let num = |k: &str| -> Result<f64> { get(k)?.parse().map_err(|_| bad(k)) };
        let int = |k: &str| -> Result<u64> { get(k)?.parse().map_err(|_| bad(k)) };
        let mut params = ResonatorParams {
            d: int("d")?,
            n: int("N")?,
            u: num("u")?,
            b: num("b")?,
            gamma: num("gamma")?,
            lambda: num("lambda")?,
            levels: Vec::new(),
            warnings: Vec::new(),
        };
        let mut components: Vec<Vec<ComponentElement>> = Vec::new();
        let mut elements = Vec::new();
        let mut expected = None;
        for line in lines.by_ref() {
            if let Some(w) = line.strip_prefix("warning ") {
                params.warnings.push(w.to_string());
            } else if let Some(rest) = line.strip_prefix("level ") {
                let kv = parse_kv(rest)?;
                let get = |k: &str| kv.iter().find(|(key, _)| key == k).map(|(_, v)| v.as_str()).ok_or_else(|| bad(k));
                let primes: Vec<u64> = match get("primes")? {
                    "" => Vec::new(),
                    list => list
                        .split(',')
                        .map(|p| p.parse().map_err(|_| bad("prime")))
                        .collect::<Result<_>>()?,
                };
                params.levels.push(Level {
                    k: get("k")?.parse().map_err(|_| bad("k"))?,
                    lo: get("lo")?.parse().map_err(|_| bad("lo"))?,
                    hi: get("hi")?.parse().map_err(|_| bad("hi"))?,
                    budget: get("J")?.parse().map_err(|_| bad("J"))?,
                    small_budget: get("j")?.parse().map_err(|_| bad("j"))?,
                    n_k: FactoredInteger::squarefree(&primes)?,
                    primes,
                });
                components.push(Vec::new());
            } else if let Some(rest) = line.strip_prefix("component ") {
                let mut parts = rest.split(" | ");
                let k: usize = parts.next().and_then(|k| k.parse().ok()).ok_or_else(|| bad("component level"))?;
                let ell = FactoredInteger::parse_record(parts.next().ok_or_else(|| bad("ell"))?)?;
                let q = FactoredInteger::parse_record(parts.next().ok_or_else(|| bad("q"))?)?;
                let level = params.levels.get(k.wrapping_sub(1)).ok_or_else(|| bad("component before level"))?;
                let ell_p: Vec<u64> = ell.primes().collect();
                let q_p: Vec<u64> = q.primes().collect();
                components[k - 1].push(component_element(&level.primes, &ell_p, &q_p)?);
            } else if let Some(count) = line.strip_prefix("elements ") {
                expected = Some(count.parse::<usize>().map_err(|_| bad("element count"))?);
                break;
            } else {
                return Err(Error::Parse(format!("unexpected line `{line}`")));
            }
        }
        let expected = expected.ok_or_else(|| bad("missing elements section"))?;
        for line in lines {
            elements.push(FactoredInteger::parse_record(line)?);
        }
        if elements.len() != expected {
            return Err(Error::Parse(format!("expected {expected} elements, found {}", elements.len())));
        }
        Ok(Self {
            params,
            components,
            elements,
        })
    }
}

fn parse_kv(s: &str) -> Result<Vec<(String, String)>> {
    s.split_whitespace()
        .map(|tok| {
            tok.split_once('=')
                .map(|(k, v)| (k.to_string(), v.to_string()))
                .ok_or_else(|| Error::Parse(format!("expected key=value, got `{tok}`")))
        })
        .collect()
}

/// `π(x; d, 1) φ(d) / π(x)`, by exact sieving.
pub fn siegel_walfisz_check(x: f64, d: u64) -> Result<f64> {
    siegel_walfisz_check_with(&PrimeSieve::default(), x, d)
}

pub fn siegel_walfisz_check_with(sieve: &PrimeSieve, x: f64, d: u64) -> Result<f64> {
    if !(x >= 1e3 && x.is_finite()) {
        return Err(Error::invalid("x", format!("need x >= 1000, got {x}")));
    }
    if d == 0 {
        return Err(Error::invalid("d", "need d >= 1"));
    }
    let xi = x.floor() as u64;
    let all = sieve.prime_count(xi)?;
    let ap = sieve.prime_count_ap(xi, d, 1)?;
    Ok(ap as f64 * euler_phi(d) as f64 / all as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec_params(d: u64, n: u64) -> Result<ResonatorParams> {
        build_params(d, n, E, 1.2, 0.3, 1.0)
    }

    #[test]
    fn params_example() {
        let p = spec_params(3, 1_000_000).unwrap();
        assert_eq!(p.k_levels(), 1);
        assert_eq!(p.levels[0].budget, 8);
        assert!(p.warnings.is_empty());
        assert!(matches!(build_params(3, 1_000_000, E, 2.0, 0.6, 1.0), Err(Error::Admissibility { .. })));
        assert!(build_params(3, 16, E, 1.2, 0.3, 1.0).is_err());
        assert!(build_params(3, 1000, 1.0, 1.2, 0.3, 1.0).is_err());
        assert!(build_params(3, 1000, 2.0, 1.2, 1.0, 1.0).is_err());
    }

    #[test]
    fn level_invariants() {
        for n in [1u64 << 10, 1 << 14, 1_000_000, 1 << 30] {
            let p = ResonatorParams::with_defaults(3, n).unwrap();
            for l in &p.levels {
                assert_eq!(l.budget % 2, 0);
                assert_eq!(l.prime_count(), l.primes.len());
                assert_eq!(l.n_k.omega(), l.primes.len());
                assert!(l.n_k.is_squarefree());
                for &q in &l.primes {
                    assert!(q as f64 > l.lo && q as f64 <= l.hi && q % 3 == 1);
                }
            }
        }
    }

    #[test]
    fn regime_warning() {
        let p = ResonatorParams::with_defaults(5, 1000).unwrap();
        assert_eq!(p.warnings.len(), 1);
    }

    #[test]
    fn single_prime_component() {
        let comp = component_from_primes(&[7], 2).unwrap();
        let ms: Vec<u64> = comp.iter().map(|c| c.m.to_u64().unwrap()).collect();
        assert_eq!(ms, vec![1, 7, 49]);
        let comp = component_from_primes(&[7], 0).unwrap();
        assert_eq!(comp.len(), 1);
        assert_eq!(comp[0].m.to_u64(), Some(7));
        assert_eq!(component_from_primes(&[], 4).unwrap()[0].m, FactoredInteger::one());
    }

    #[test]
    fn component_counts_match_formula() {
        let primes = [7u64, 13, 19, 31, 37];
        for budget in [0u64, 2, 4, 6, 10] {
            let comp = component_from_primes(&primes, budget).unwrap();
            assert_eq!(comp.len() as u128, pair_count(5, budget / 2));
            let mut ms: Vec<_> = comp.iter().map(|c| c.m.clone()).collect();
            ms.dedup();
            assert_eq!(ms.len(), comp.len());
        }
        assert_eq!(pair_count(3, 10), 27);
    }

    #[test]
    fn empty_levels_give_trivial_set() {
        let mut p = ResonatorParams::with_defaults(3, 1 << 10).unwrap();
        for l in &mut p.levels {
            l.primes.clear();
            l.n_k = FactoredInteger::one();
        }
        let set = build_set(&p).unwrap();
        assert_eq!(set.elements, vec![FactoredInteger::one()]);
    }

    #[test]
    fn sweep_respects_cardinality_and_form() {
        let mut prev = 0;
        for e in 8..=14 {
            let p = ResonatorParams::with_defaults(3, 1 << e).unwrap();
            let set = build_set(&p).unwrap();
            assert!(set.len() as u64 <= p.n, "N = 2^{e}: |M| = {}", set.len());
            assert!(set.len() >= prev);
            prev = set.len();
            set.check_element_form().unwrap();
            assert!(set.elements.windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn spec_parameters_overflow_cardinality() {
        let p = spec_params(3, 1 << 14).unwrap();
        assert!(matches!(build_set(&p), Err(Error::Construction(_)) | Err(Error::CapacityExceeded { .. })));
    }

    #[test]
    fn text_round_trip_and_determinism() {
        let p = ResonatorParams::with_defaults(3, 1 << 12).unwrap();
        let a = build_set(&p).unwrap();
        let b = build_set(&p).unwrap();
        assert_eq!(a.to_text(), b.to_text());
        let parsed = ResonatorSet::from_text(&a.to_text()).unwrap();
        assert_eq!(parsed, a);
        assert!(ResonatorSet::from_text("resonator-set v2\n").is_err());
    }

    #[test]
    fn decomposition_rejects_foreign_elements() {
        let p = ResonatorParams::with_defaults(3, 1 << 12).unwrap();
        let level = &p.levels[0];
        let q0 = level.primes[0];
        assert!(decompose(level, &FactoredInteger::from_u64(q0.pow(3)).unwrap()).is_err());
        assert!(decompose(level, &FactoredInteger::from_u64(5).unwrap()).is_err());
        let (ell, q) = decompose(level, &level.n_k).unwrap();
        assert!(ell.is_one() && q.is_one());
    }

    #[test]
    fn siegel_walfisz_small() {
        let r = siegel_walfisz_check(1e6, 3).unwrap();
        assert!((0.95..=1.05).contains(&r));
        assert!(siegel_walfisz_check(1e3, 3).unwrap() > 0.0);
        assert!(siegel_walfisz_check(999.0, 3).is_err());
    }

    #[test]
    fn lambda_default_maximises_beta() {
        let (u, b) = (DEFAULT_U, DEFAULT_B);
        let h = h_constant(u, b);
        let beta = |l: f64| 2.0 * l * (h / (l * l)).ln();
        let l0 = default_lambda(u, b);
        assert!((beta(l0) - 4.0 * h.sqrt() / E).abs() < 1e-12);
        for f in [0.5, 0.9, 1.1, 2.0] {
            assert!(beta(l0 * f) < beta(l0));
        }
    }
}
