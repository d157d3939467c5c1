//! Plain and weighted Gál sums
//! `S_α(M, a) = Σ_{m,n} a(m/(m,n)) a(n/(m,n)) ((m,n)/[m,n])^α`, their
//! truncations, the σ sums of the lower-bound argument, and the coefficient
//! comparison checks on resonator components.

use std::collections::HashMap;
use std::f64::consts::E;
use std::fmt::Write as _;

use num_rational::BigRational;
use rayon::prelude::*;

use crate::arith::{euler_phi, iterated_log, FactoredInteger, LOG_SLACK};
use crate::dedekind::{a_prime_companion, LocalFactors};
use crate::error::{Error, Result};
use crate::resonator::{decompose, growth_scale, ResonatorParams, ResonatorSet};
use crate::summation::NeumaierSum;

const ROW_BLOCK: usize = 32;

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::invalid("alpha", format!("need alpha in (0, 1], got {alpha}")));
    }
    Ok(())
}

/// `M` re-indexed over its prime support, with `a(p^e)` and `ln p` tables.
#[derive(Debug, Clone)]
pub struct PairSums {
    rows: Vec<Vec<(u32, u32)>>,
    logs: Vec<f64>,
    /// `local[i][e] = a(p_i^e)`; empty when unweighted.
    local: Vec<Vec<f64>>,
}

impl PairSums {
    /// Unweighted sums over `M`.
    pub fn plain(elements: &[FactoredInteger]) -> Self {
        Self::build(elements, None).expect("unweighted indexing cannot fail")
    }

    /// Sums weighted by the coefficients of `Q(ζ_d)`.
    pub fn weighted(elements: &[FactoredInteger], d: u64) -> Result<Self> {
        Self::build(elements, Some(d))
    }

    fn build(elements: &[FactoredInteger], d: Option<u64>) -> Result<Self> {
        let mut max_exp: HashMap<u64, u32> = HashMap::new();
        for m in elements {
            for &(p, e) in m.factors() {
                let slot = max_exp.entry(p).or_insert(0);
                *slot = (*slot).max(e);
            }
        }
        let mut primes: Vec<u64> = max_exp.keys().copied().collect();
        primes.sort_unstable();
        let index: HashMap<u64, u32> = primes.iter().enumerate().map(|(i, &p)| (p, i as u32)).collect();
        let rows = elements
            .iter()
            .map(|m| m.factors().iter().map(|&(p, e)| (index[&p], e)).collect())
            .collect();
        let logs = primes.iter().map(|&p| (p as f64).ln()).collect();
        let local = match d {
            None => Vec::new(),
            Some(d) => {
                let mut lf = LocalFactors::new(d)?;
                primes
                    .iter()
                    .map(|&p| (0..=max_exp[&p]).map(|e| lf.prime_power(p, e).map(|v| v as f64)).collect())
                    .collect::<Result<_>>()?
            }
        };
        Ok(Self { rows, logs, local })
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// `(ln([m,n]/(m,n)), a(m/(m,n)) a(n/(m,n)))` for rows `i`, `j`.
    #[inline]
    fn pair(&self, i: usize, j: usize) -> (f64, f64) {
        let (a, b) = (&self.rows[i], &self.rows[j]);
        let weighted = !self.local.is_empty();
        let (mut x, mut y) = (0, 0);
        let mut log = 0.0;
        let mut w = 1.0;
        let mut visit = |p: u32, ea: u32, eb: u32| {
            let g = ea.min(eb);
            log += (ea.max(eb) - g) as f64 * self.logs[p as usize];
            if weighted {
                let t = &self.local[p as usize];
                w *= t[(ea - g) as usize] * t[(eb - g) as usize];
            }
        };
        while x < a.len() || y < b.len() {
            match (a.get(x), b.get(y)) {
                (Some(&(pa, ea)), Some(&(pb, eb))) if pa == pb => {
                    visit(pa, ea, eb);
                    x += 1;
                    y += 1;
                }
                (Some(&(pa, ea)), Some(&(pb, _))) if pa < pb => {
                    visit(pa, ea, 0);
                    x += 1;
                }
                (Some(&(pa, ea)), None) => {
                    visit(pa, ea, 0);
                    x += 1;
                }
                (_, Some(&(pb, eb))) => {
                    visit(pb, 0, eb);
                    y += 1;
                }
                (None, None) => unreachable!(),
            }
        }
        (log, w)
    }

    /// Diagonal plus twice the upper triangle, reduced over fixed row blocks.
    fn reduce<F>(&self, buckets: usize, place: F) -> Vec<f64>
    where
        F: Fn(f64, f64) -> Option<(usize, f64)> + Sync,
    {
        let n = self.len();
        let blocks = n.div_ceil(ROW_BLOCK);
        let partial: Vec<Vec<NeumaierSum>> = (0..blocks)
            .into_par_iter()
            .map(|blk| {
                let mut acc = vec![NeumaierSum::new(); buckets];
                for i in blk * ROW_BLOCK..((blk + 1) * ROW_BLOCK).min(n) {
                    for j in i + 1..n {
                        let (log, w) = self.pair(i, j);
                        if w == 0.0 {
                            continue;
                        }
                        if let Some((b, v)) = place(log, w) {
                            acc[b].add(v);
                        }
                    }
                }
                acc
            })
            .collect();
        let mut total = vec![NeumaierSum::new(); buckets];
        for block in &partial {
            for (t, b) in total.iter_mut().zip(block) {
                t.add(b.total());
            }
        }
        total.iter().map(NeumaierSum::total).collect()
    }

    fn diagonal(&self) -> f64 {
        // a(1)^2 = 1 and ratio 1 on the diagonal
        self.len() as f64
    }

    /// `S_α`.
    pub fn sum(&self, alpha: f64) -> Result<f64> {
        check_alpha(alpha)?;
        let off = self.reduce(1, |log, w| Some((0, w * (-alpha * log).exp())))[0];
        Ok(self.diagonal() + 2.0 * off)
    }

    /// `S_α` restricted to pairs with `[m,n]/(m,n) ≤ X`.
    pub fn truncated(&self, alpha: f64, x: f64) -> Result<f64> {
        Ok(self.profile(alpha, &[x])?[0])
    }

    /// Truncated sums at every cutoff in `xs`, from one pass over the pairs.
    pub fn profile(&self, alpha: f64, xs: &[f64]) -> Result<Vec<f64>> {
        check_alpha(alpha)?;
        if let Some(&x) = xs.iter().find(|&&x| !(x >= 1.0)) {
            return Err(Error::invalid("X", format!("need X >= 1, got {x}")));
        }
        let mut order: Vec<usize> = (0..xs.len()).collect();
        order.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
        let cut: Vec<f64> = order
            .iter()
            .map(|&i| {
                let l = xs[i].ln();
                l + LOG_SLACK * l.abs().max(1.0)
            })
            .collect();
        let buckets = self.reduce(cut.len() + 1, |log, w| {
            let b = cut.partition_point(|&c| c < log);
            Some((b, w * (-alpha * log).exp()))
        });
        let mut out = vec![0.0; xs.len()];
        let mut running = NeumaierSum::new();
        for (rank, &i) in order.iter().enumerate() {
            running.add(buckets[rank]);
            out[i] = self.diagonal() + 2.0 * running.total();
        }
        Ok(out)
    }

    /// `max ln([m,n]/(m,n))` over pairs; 0 for `|M| ≤ 1`.
    pub fn max_ratio_log(&self) -> f64 {
        let n = self.len();
        (0..n)
            .into_par_iter()
            .map(|i| (i + 1..n).map(|j| self.pair(i, j).0).fold(0.0, f64::max))
            .reduce(|| 0.0, f64::max)
    }
}

/// `S_α(M) = Σ ((m,n)/[m,n])^α`.
pub fn gal_sum(elements: &[FactoredInteger], alpha: f64) -> Result<f64> {
    PairSums::plain(elements).sum(alpha)
}

pub fn gal_sum_weighted(elements: &[FactoredInteger], d: u64, alpha: f64) -> Result<f64> {
    PairSums::weighted(elements, d)?.sum(alpha)
}

pub fn gal_sum_truncated(elements: &[FactoredInteger], d: u64, alpha: f64, x: f64) -> Result<f64> {
    PairSums::weighted(elements, d)?.truncated(alpha, x)
}

/// `S_{1/2}` truncated at `X` against `S_{1/2} - S_{1/3} X^{-1/6}`, with
/// `1e-9` absolute slack.
pub fn rankin_check(elements: &[FactoredInteger], d: u64, x: f64) -> Result<bool> {
    let sums = PairSums::weighted(elements, d)?;
    rankin_check_with(&sums, x)
}

pub fn rankin_check_with(sums: &PairSums, x: f64) -> Result<bool> {
    let lhs = sums.truncated(0.5, x)?;
    let rhs = sums.sum(0.5)? - sums.sum(1.0 / 3.0)? * x.powf(-1.0 / 6.0);
    Ok(lhs >= rhs - 1e-9)
}

/// `σ(a, R, r) = Σ_{n | N_k, ω(n) ≤ R, (n, r) = 1} a(n)/√n`, computed as
/// `Σ_{j ≤ R} e_j(a(p)/√p)` over the primes of `I_k` coprime to `r`.
pub fn sigma_sum(params: &ResonatorParams, k: usize, r_max: u64, r: &FactoredInteger) -> Result<f64> {
    let level = params.level(k)?;
    let mut lf = LocalFactors::new(params.d)?;
    let xs = level
        .primes
        .iter()
        .filter(|&&p| r.exponent_of(p) == 0)
        .map(|&p| Ok(lf.prime_power(p, 1)? as f64 / (p as f64).sqrt()))
        .collect::<Result<Vec<f64>>>()?;
    Ok(elementary_sum(&xs, r_max as usize))
}

/// `Σ_{j ≤ R} e_j(x)`.
fn elementary_sum(xs: &[f64], r_max: usize) -> f64 {
    let mut e = vec![0.0; r_max + 1];
    e[0] = 1.0;
    for &x in xs {
        for j in (1..=r_max).rev() {
            e[j] += x * e[j - 1];
        }
    }
    crate::summation::sum(e)
}

/// `2k e (√u - 1) u^{k/2} √(log₃N) / α`, the leading term of the quantity
/// the σ lower bound is stated in.
pub fn t_sigma(params: &ResonatorParams, k: usize, alpha: f64) -> f64 {
    let kf = k as f64;
    2.0 * kf * E * (params.u.sqrt() - 1.0) * params.u.powf(kf / 2.0) * iterated_log(params.n as f64, 3).sqrt() / alpha
}

/// `a(m/(m,m′)) a(m′/(m,m′)) ≥ a′(ℓ)a′(ℓ′)a(q)a(q′) / (a′((ℓ,ℓ′)) a((q,q′)))²` for `m, m′ ∈ M_k`, exactly.
pub fn verify_lemma2(k: usize, m: &FactoredInteger, m2: &FactoredInteger, params: &ResonatorParams) -> Result<bool> {
    let level = params.level(k)?;
    let (l1, q1) = decompose(level, m)?;
    let (l2, q2) = decompose(level, m2)?;
    let d = params.d;
    let mut lf = LocalFactors::new(d)?;
    let g = m.gcd(m2);
    let cof1 = m.checked_div(&g).expect("gcd divides");
    let cof2 = m2.checked_div(&g).expect("gcd divides");
    let lhs = BigRational::from_integer(lf.coefficient_big(&cof1)? * lf.coefficient_big(&cof2)?);
    let a = |lf: &mut LocalFactors, x: &FactoredInteger| lf.coefficient_big(x).map(BigRational::from_integer);
    let lg = l1.gcd(&l2);
    let qg = q1.gcd(&q2);
    let num = a_prime_companion(&l1, d)? * a_prime_companion(&l2, d)? * a(&mut lf, &q1)? * a(&mut lf, &q2)?;
    let ap = a_prime_companion(&lg, d)?;
    let aq = a(&mut lf, &qg)?;
    let rhs = num / (ap.clone() * ap * aq.clone() * aq);
    Ok(lhs >= rhs)
}

/// `(m, m′) = N_k (ℓ, ℓ′)/[q, q′]` and the cofactor identities, exactly.
pub fn verify_gcd_identity(
    k: usize,
    m: &FactoredInteger,
    m2: &FactoredInteger,
    params: &ResonatorParams,
) -> Result<bool> {
    let level = params.level(k)?;
    let (l1, q1) = decompose(level, m)?;
    let (l2, q2) = decompose(level, m2)?;
    let g = m.gcd(m2);
    let lg = l1.gcd(&l2);
    let qg = q1.gcd(&q2);
    let expected = level.n_k.mul(&lg).checked_div(&q1.lcm(&q2));
    if expected.as_ref() != Some(&g) {
        return Ok(false);
    }
    let cof = |l: &FactoredInteger, q_other: &FactoredInteger| {
        l.checked_div(&lg)
            .zip(q_other.checked_div(&qg))
            .map(|(a, b)| a.mul(&b))
    };
    Ok(m.checked_div(&g) == cof(&l1, &q2) && m2.checked_div(&g) == cof(&l2, &q1))
}

/// The double sum of the ℓ, q lower bound for one component, by
/// exhaustive enumeration over `ℓ, ℓ′, q, q′ | N_k`.
pub fn relation5_sum(primes: &[u64], budget: u64, d: u64) -> Result<f64> {
    if primes.len() > 16 {
        return Err(Error::invalid("primes", "exhaustive enumeration limited to 16 primes"));
    }
    let half = (budget / 2) as u32;
    let mut lf = LocalFactors::new(d)?;
    let comp = (euler_phi(d) as f64 + 1.0) / 2.0;
    let n = primes.len();
    let subsets: Vec<u32> = (0..1u32 << n).filter(|s| s.count_ones() <= half).collect();
    let value = |s: u32| -> f64 {
        (0..n).filter(|i| s >> i & 1 == 1).map(|i| primes[i] as f64).product()
    };
    let mut a_of = vec![0.0; 1 << n];
    for &s in &subsets {
        let mut v = 1.0;
        for (i, &p) in primes.iter().enumerate() {
            if s >> i & 1 == 1 {
                v *= lf.prime_power(p, 1)? as f64;
            }
        }
        a_of[s as usize] = v;
    }
    let a_prime = |s: u32| comp.powi(s.count_ones() as i32);
    let inner = |l1: u32, l2: u32| -> f64 {
        let mut acc = NeumaierSum::new();
        for &q1 in subsets.iter().filter(|&&q| q & l1 == 0) {
            for &q2 in subsets.iter().filter(|&&q| q & l2 == 0) {
                let g = q1 & q2;
                acc.add(
                    value(g) * a_of[q1 as usize] * a_of[q2 as usize]
                        / (a_of[g as usize] * a_of[g as usize] * (value(q1) * value(q2)).sqrt()),
                );
            }
        }
        acc.total()
    };
    let mut acc = NeumaierSum::new();
    for &l1 in &subsets {
        for &l2 in &subsets {
            let g = l1 & l2;
            let outer = value(g) * a_prime(l1) * a_prime(l2) / (a_prime(g) * a_prime(g) * (value(l1) * value(l2)).sqrt());
            acc.add(outer * inner(l1, l2));
        }
    }
    Ok(acc.total())
}

/// Per-level σ bookkeeping in the report.
#[derive(Debug, Clone, PartialEq)]
pub struct SigmaLevel {
    pub k: usize,
    pub j_k: u64,
    /// `σ(a, j_k, 1)`, exact.
    pub sigma: f64,
    pub t_sigma: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GalSumReport {
    pub d: u64,
    pub n: u64,
    pub size: usize,
    pub s_half_weighted: f64,
    pub s_third_weighted: f64,
    pub s_alpha_plain: Option<(f64, f64)>,
    /// `(X, truncated S_{1/2}(M, a))`, ascending in `X`.
    pub truncated: Vec<(f64, f64)>,
    pub normalized: f64,
    pub beta_empirical: f64,
    pub beta_theoretical: f64,
    pub h: f64,
    pub lcal_n: f64,
    pub sigma_levels: Vec<SigmaLevel>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReportOptions {
    /// Exponent for the optional plain sum `S_α(M)`.
    pub plain_alpha: Option<f64>,
    /// Number of log-spaced cutoffs in `[1, max ratio]`.
    pub grid_points: usize,
    /// `α` in the `T_sigma` expression.
    pub t_alpha: f64,
}

impl Default for ReportOptions {
    fn default() -> Self {
        Self {
            plain_alpha: None,
            grid_points: 20,
            t_alpha: 0.5,
        }
    }
}

/// `n` log-spaced cutoffs from 1 to `e^{max_log}` inclusive.
pub fn log_grid(max_log: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![max_log.exp()],
        _ => (0..n).map(|i| (max_log * i as f64 / (n - 1) as f64).exp()).collect(),
    }
}

pub fn report(set: &ResonatorSet) -> Result<GalSumReport> {
    report_with(set, &ReportOptions::default())
}

pub fn report_with(set: &ResonatorSet, opts: &ReportOptions) -> Result<GalSumReport> {
    let p = &set.params;
    let sums = PairSums::weighted(&set.elements, p.d)?;
    let s_half = sums.sum(0.5)?;
    let s_third = sums.sum(1.0 / 3.0)?;
    let xs = log_grid(sums.max_ratio_log(), opts.grid_points);
    let truncated = xs.iter().copied().zip(sums.profile(0.5, &xs)?).collect();
    let s_alpha_plain = match opts.plain_alpha {
        Some(a) => Some((a, gal_sum(&set.elements, a)?)),
        None => None,
    };
    let normalized = s_half / set.len() as f64;
    let lcal_n = growth_scale(p.n as f64);
    let h = p.h();
    let phi = p.phi() as f64;
    let sigma_levels = p
        .levels
        .iter()
        .map(|l| {
            Ok(SigmaLevel {
                k: l.k,
                j_k: l.small_budget,
                sigma: sigma_sum(p, l.k, l.small_budget, &FactoredInteger::one())?,
                t_sigma: t_sigma(p, l.k, opts.t_alpha),
            })
        })
        .collect::<Result<_>>()?;
    Ok(GalSumReport {
        d: p.d,
        n: p.n,
        size: set.len(),
        s_half_weighted: s_half,
        s_third_weighted: s_third,
        s_alpha_plain,
        truncated,
        normalized,
        beta_empirical: normalized.ln() / lcal_n.ln(),
        beta_theoretical: 2.0 * p.gamma * phi * p.lambda * (h / (p.lambda * p.lambda)).ln(),
        h,
        lcal_n,
        sigma_levels,
    })
}

/// Geometric sequence `lo, lo·factor, …` up to `hi`.
pub fn geometric_range(lo: u64, hi: u64, factor: u64) -> Result<Vec<u64>> {
    if lo < 2 || hi < lo {
        return Err(Error::invalid("range", format!("need 2 <= lo <= hi, got [{lo}, {hi}]")));
    }
    if factor < 2 {
        return Err(Error::invalid("factor", "need factor >= 2"));
    }
    let mut out = vec![lo];
    while let Some(next) = out.last().unwrap().checked_mul(factor).filter(|&n| n <= hi) {
        out.push(next);
    }
    Ok(out)
}

/// One report per `N`, default construction parameters.
pub fn sweep(d: u64, ns: &[u64], opts: &ReportOptions) -> Result<Vec<GalSumReport>> {
    ns.iter()
        .map(|&n| {
            let params = ResonatorParams::with_defaults(d, n)?;
            report_with(&crate::resonator::build_set(&params)?, opts)
        })
        .collect()
}

/// Least-squares slope of `log(S_{1/2}(M, a)/|M|)` against
/// `φ(d) √(log N log₃N / log₂N)`; `None` for fewer than two distinct abscissae.
pub fn trend_slope(reports: &[GalSumReport]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = reports
        .iter()
        .map(|r| (euler_phi(r.d) as f64 * r.lcal_n.ln(), r.normalized.ln()))
        .collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (pts.len() >= 2 && sxx > 0.0).then(|| sxy / sxx)
}

impl GalSumReport {
    pub const CSV_HEADER: &'static str =
        "d,N,size,s_half_weighted,s_third_weighted,normalized,beta_empirical,beta_theoretical,h,lcal_N";

    pub fn to_csv_row(&self) -> String {
        format!(
            "{},{},{},{:.15e},{:.15e},{:.15e},{:.15e},{:.15e},{:.15e},{:.15e}",
            self.d,
            self.n,
            self.size,
            self.s_half_weighted,
            self.s_third_weighted,
            self.normalized,
            self.beta_empirical,
            self.beta_theoretical,
            self.h,
            self.lcal_n
        )
    }

    /// Flat `key=value` lines.
    pub fn to_record(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "d={}", self.d);
        let _ = writeln!(s, "N={}", self.n);
        let _ = writeln!(s, "size={}", self.size);
        let _ = writeln!(s, "s_half_weighted={}", self.s_half_weighted);
        let _ = writeln!(s, "s_third_weighted={}", self.s_third_weighted);
        if let Some((a, v)) = self.s_alpha_plain {
            let _ = writeln!(s, "s_alpha_plain[{a}]={v}");
        }
        for (x, v) in &self.truncated {
            let _ = writeln!(s, "truncated[{x}]={v}");
        }
        let _ = writeln!(s, "normalized={}", self.normalized);
        let _ = writeln!(s, "beta_empirical={}", self.beta_empirical);
        let _ = writeln!(s, "beta_theoretical={}", self.beta_theoretical);
        let _ = writeln!(s, "h={}", self.h);
        let _ = writeln!(s, "lcal_N={}", self.lcal_n);
        for l in &self.sigma_levels {
            let _ = writeln!(s, "sigma[{}]={} j_k={} T_sigma={}", l.k, l.sigma, l.j_k, l.t_sigma);
        }
        s
    }
}
