//! Property sweeps shared by the command line and the acceptance suite.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::arith::{euler_phi, is_prime, FactoredInteger, PrimeSieve};
use crate::dedekind::{coefficient, coefficient_oracle, coefficient_prime_power, verify_lemma1_part2};
use crate::error::{Error, Result};
use crate::galsums::{gal_sum_weighted, log_grid, rankin_check_with, relation5_sum, verify_gcd_identity, verify_lemma2, PairSums};
use crate::lfunc::{dedekind_zeta_direct, dedekind_zeta_value, suggest_direct_length, EvalConfig, Smoothing};
use crate::resonator::{component_from_primes, siegel_walfisz_check_with, ResonatorSet};

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyOutcome {
    pub suite: String,
    pub checked: u64,
    pub violations: u64,
    pub detail: String,
}

impl VerifyOutcome {
    fn new(suite: &str, checked: u64, violations: u64, detail: impl Into<String>) -> Self {
        Self {
            suite: suite.to_string(),
            checked,
            violations,
            detail: detail.into(),
        }
    }

    pub fn passed(&self) -> bool {
        self.violations == 0 && self.checked > 0
    }
}

/// The first `count` primes `≡ 1 (mod d)`.
pub fn split_primes(d: u64, count: usize) -> Vec<u64> {
    (d + 1..).step_by(d as usize).filter(|&p| is_prime(p)).take(count).collect()
}

/// `a(p) = φ(d)` and `a(p²) = φ(φ+1)/2` for the first `count` split primes.
pub fn lemma1_values(d: u64, count: usize) -> Result<VerifyOutcome> {
    let phi = euler_phi(d);
    let mut bad = 0;
    for p in split_primes(d, count) {
        if coefficient_prime_power(p, 1, d)? != phi || coefficient_prime_power(p, 2, d)? != phi * (phi + 1) / 2 {
            bad += 1;
        }
    }
    Ok(VerifyOutcome::new("lemma1-values", count as u64, bad, format!("d={d} phi={phi}")))
}

fn random_squarefree(rng: &mut ChaCha8Rng, pool: &[u64], max_omega: usize) -> FactoredInteger {
    let k = rng.random_range(0..=max_omega);
    let mut chosen: Vec<u64> = Vec::with_capacity(k);
    while chosen.len() < k {
        let p = pool[rng.random_range(0..pool.len())];
        if !chosen.contains(&p) {
            chosen.push(p);
        }
    }
    FactoredInteger::squarefree(&chosen).expect("distinct primes")
}

/// `a(mn) ≥ a′(m) a(n)` on random squarefree `m, n` over the first 200 split
/// primes, `ω ≤ 4`.
pub fn lemma1_pairs(d: u64, pairs: usize, seed: u64) -> Result<VerifyOutcome> {
    let pool = split_primes(d, 200);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut bad = 0;
    for _ in 0..pairs {
        let m = random_squarefree(&mut rng, &pool, 4);
        let n = random_squarefree(&mut rng, &pool, 4);
        if !verify_lemma1_part2(&m, &n, d)? {
            bad += 1;
        }
    }
    Ok(VerifyOutcome::new("lemma1-pairs", pairs as u64, bad, format!("d={d} seed={seed}")))
}

/// Random `(k, m, m′)` with `m, m′` in the same component `M_k`.
fn component_pairs<F>(set: &ResonatorSet, pairs: usize, seed: u64, suite: &str, check: F) -> Result<VerifyOutcome>
where
    F: Fn(usize, &FactoredInteger, &FactoredInteger) -> Result<bool>,
{
    let levels: Vec<usize> = (0..set.components.len()).filter(|&i| set.components[i].len() > 1).collect();
    if levels.is_empty() {
        return Err(Error::invalid("set", "no component with more than one element"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut bad = 0;
    for _ in 0..pairs {
        let i = levels[rng.random_range(0..levels.len())];
        let comp = &set.components[i];
        let a = &comp[rng.random_range(0..comp.len())].m;
        let b = &comp[rng.random_range(0..comp.len())].m;
        if !check(i + 1, a, b)? {
            bad += 1;
        }
    }
    Ok(VerifyOutcome::new(
        suite,
        pairs as u64,
        bad,
        format!("d={} N={} seed={seed}", set.params.d, set.params.n),
    ))
}

pub fn lemma2_pairs(set: &ResonatorSet, pairs: usize, seed: u64) -> Result<VerifyOutcome> {
    component_pairs(set, pairs, seed, "lemma2", |k, a, b| verify_lemma2(k, a, b, &set.params))
}

pub fn gcd_identity_pairs(set: &ResonatorSet, pairs: usize, seed: u64) -> Result<VerifyOutcome> {
    component_pairs(set, pairs, seed, "gcd", |k, a, b| verify_gcd_identity(k, a, b, &set.params))
}

/// Sieve table against the convolution oracle for `n ≤ n_max`.
pub fn coefficient_check(d: u64, n_max: usize) -> Result<VerifyOutcome> {
    let oracle = coefficient_oracle(n_max, d)?;
    let mut bad = 0;
    for (n, &want) in oracle.iter().enumerate().skip(1) {
        if coefficient(&FactoredInteger::from_u64(n as u64)?, d)? != want {
            bad += 1;
        }
    }
    Ok(VerifyOutcome::new("coeffs", n_max as u64, bad, format!("d={d} n_max={n_max}")))
}

/// `S_{1/2}(M_k, a)` against the exhaustive double sum on random components
/// with `|I_k| ≤ 4`.
pub fn relation5_instances(d: u64, count: usize, seed: u64) -> Result<VerifyOutcome> {
    let pool = split_primes(d, 60);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut bad = 0;
    let mut worst = f64::INFINITY;
    for _ in 0..count {
        let size = rng.random_range(1..=4);
        let mut primes: Vec<u64> = Vec::with_capacity(size);
        while primes.len() < size {
            let p = pool[rng.random_range(0..pool.len())];
            if !primes.contains(&p) {
                primes.push(p);
            }
        }
        primes.sort_unstable();
        let budget = 2 * rng.random_range(0..=size as u64);
        let comp: Vec<FactoredInteger> = component_from_primes(&primes, budget)?.into_iter().map(|c| c.m).collect();
        let lhs = gal_sum_weighted(&comp, d, 0.5)?;
        let rhs = relation5_sum(&primes, budget, d)?;
        worst = worst.min(lhs / rhs);
        if lhs < rhs * (1.0 - 1e-12) {
            bad += 1;
        }
    }
    Ok(VerifyOutcome::new("relation5", count as u64, bad, format!("d={d} seed={seed} min_ratio={worst:.6}")))
}

/// Rankin bound at every cutoff of a log grid, monotonicity of the profile,
/// and agreement of the last cutoff with the full sum to `1e-12` relative.
pub fn rankin_profile(set: &ResonatorSet, points: usize) -> Result<VerifyOutcome> {
    let sums = PairSums::weighted(&set.elements, set.params.d)?;
    let xs = log_grid(sums.max_ratio_log(), points);
    let prof = sums.profile(0.5, &xs)?;
    let full = sums.sum(0.5)?;
    let mut bad = 0;
    for &x in &xs {
        if !rankin_check_with(&sums, x)? {
            bad += 1;
        }
    }
    bad += prof.windows(2).filter(|w| w[1] < w[0]).count() as u64;
    let last = *prof.last().unwrap_or(&f64::NAN);
    if !((last - full).abs() <= 1e-12 * full) {
        bad += 1;
    }
    Ok(VerifyOutcome::new(
        "rankin",
        xs.len() as u64,
        bad,
        format!("d={} N={} |M|={} S_half={full:.12e}", set.params.d, set.params.n, set.len()),
    ))
}

/// `π(x; d, 1) φ(d) / π(x) ∈ [0.95, 1.05]`.
pub fn siegel_walfisz(sieve: &PrimeSieve, x: f64, ds: &[u64]) -> Result<VerifyOutcome> {
    let mut bad = 0;
    let mut parts = Vec::new();
    for &d in ds {
        let r = siegel_walfisz_check_with(sieve, x, d)?;
        if !(0.95..=1.05).contains(&r) {
            bad += 1;
        }
        parts.push(format!("d={d}:{r:.5}"));
    }
    Ok(VerifyOutcome::new("sw", ds.len() as u64, bad, parts.join(" ")))
}

/// Product formula against the smoothed direct sum at `1/2 + it`, relative
/// error at most `bound`.
pub fn zeta_consistency(d: u64, ts: &[f64], bound: f64) -> Result<VerifyOutcome> {
    let cfg = EvalConfig::default();
    let direct_cfg = EvalConfig::new(1e-8, cfg.max_terms, Smoothing::SmoothCutoff)?;
    let mut bad = 0;
    let mut parts = Vec::new();
    for &t in ts {
        let s = Complex64::new(0.5, t);
        let product = dedekind_zeta_value(s, d, &cfg)?;
        let x = suggest_direct_length(s, d, 0.1 * bound * product.norm())?;
        let direct = dedekind_zeta_direct(s, d, x, &direct_cfg)?.value;
        let rel = (product - direct).norm() / product.norm();
        if !(rel <= bound) {
            bad += 1;
        }
        parts.push(format!("t={t}:X={x}:rel={rel:.2e}"));
    }
    Ok(VerifyOutcome::new("zeta", ts.len() as u64, bad, format!("d={d} {}", parts.join(" "))))
}
