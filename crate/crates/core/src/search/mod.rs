//! Resonator-guided search for large `|ζ_K(1/2 + it)|` on `[0, T]`.

pub mod buckets;
pub mod kernel;

use std::io::Write as _;
use std::path::Path;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lfunc::{DedekindZeta, EvalConfig};
use crate::resonator::{build_set, growth_scale, ResonatorParams, ResonatorSet};

pub use buckets::{bucket_elements, bucket_index, build_buckets, resonator_power_grid, resonator_value, Bucket, ResonatorBuckets};
pub use kernel::{kernel_hat, kernel_hat_imag, kernel_value, lemma4_report, verify_lemma4, KernelParams, Lemma4Report};

/// Grid points scored per `ζ_K` evaluation.
pub const GRID_FACTOR: usize = 50;
const GOLDEN: f64 = 0.618_033_988_749_894_8;

#[derive(Debug, Clone, PartialEq)]
pub struct SearchResult {
    pub d: u64,
    pub t_max: f64,
    pub t_star: f64,
    pub zeta_abs: f64,
    pub baseline_t: f64,
    pub baseline_max: f64,
    /// `L(T)^{φ(d)}`.
    pub reference: f64,
    pub budget: usize,
    pub seed: u64,
    /// `ζ_K` evaluations spent by the resonator side.
    pub evaluations: usize,
    /// False if refinement ran out of budget before reaching `1e-9·T`.
    pub complete: bool,
}

/// `Φ(t) = e^{-t²/2}`.
pub fn gaussian(t: f64) -> f64 {
    (-0.5 * t * t).exp()
}

/// `⌊T^{1-β}⌋`, halved until the construction succeeds.
pub fn search_set(d: u64, t_max: f64, beta: f64) -> Result<ResonatorSet> {
    if !(0.0..1.0).contains(&beta) {
        return Err(Error::invalid("beta", format!("need beta in [0, 1), got {beta}")));
    }
    let mut n = t_max.powf(1.0 - beta).floor() as u64;
    loop {
        if n < 2 {
            return Err(Error::Construction(format!("no admissible N below T^(1-beta) for d = {d}")));
        }
        match ResonatorParams::with_defaults(d, n).and_then(|p| build_set(&p)) {
            Ok(set) => return Ok(set),
            Err(Error::Construction(_) | Error::CapacityExceeded { .. }) => n /= 2,
            Err(e) => return Err(e),
        }
    }
}

/// Weight multiplying `|R(t)|²` in the grid score.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ScoreWeight {
    /// `Φ(t log T / T)`.
    #[default]
    Gaussian,
    Flat,
}

impl std::fmt::Display for ScoreWeight {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ScoreWeight::Gaussian => "gaussian",
            ScoreWeight::Flat => "flat",
        })
    }
}

impl std::str::FromStr for ScoreWeight {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian" => Ok(ScoreWeight::Gaussian),
            "flat" => Ok(ScoreWeight::Flat),
            _ => Err(Error::invalid("weight", format!("expected gaussian or flat, got {s:?}"))),
        }
    }
}

/// `(t, score)` on the scoring grid.
pub fn score_grid(rb: &ResonatorBuckets, t_max: f64, points: usize, weight: ScoreWeight) -> Vec<(f64, f64)> {
    let step = t_max / (points - 1) as f64;
    let scale = t_max.ln() / t_max;
    resonator_power_grid(rb, 0.0, step, points)
        .into_iter()
        .enumerate()
        .map(|(i, p)| {
            let t = i as f64 * step;
            let w = match weight {
                ScoreWeight::Gaussian => gaussian(t * scale),
                ScoreWeight::Flat => 1.0,
            };
            (t, p * w)
        })
        .collect()
}

/// Indices of the `n` best grid points: local maxima first, then the rest,
/// each by descending score.
fn select(scores: &[(f64, f64)], n: usize) -> Vec<usize> {
    let len = scores.len();
    let is_peak = |i: usize| {
        let s = scores[i].1;
        (i == 0 || scores[i - 1].1 <= s) && (i + 1 == len || scores[i + 1].1 <= s)
    };
    let by_score = |a: &usize, b: &usize| scores[*b].1.total_cmp(&scores[*a].1).then(a.cmp(b));
    let (mut peaks, mut rest): (Vec<usize>, Vec<usize>) = (0..len).partition(|&i| is_peak(i));
    peaks.sort_by(by_score);
    if peaks.len() < n {
        rest.sort_by(by_score);
        peaks.extend(rest);
    }
    peaks.truncate(n);
    peaks
}

fn zeta_abs(zk: &DedekindZeta, t: f64, cfg: &EvalConfig) -> Result<f64> {
    Ok(zk.value(Complex64::new(0.5, t), cfg)?.norm())
}

fn best(points: &[(f64, f64)]) -> (f64, f64) {
    points
        .iter()
        .copied()
        .fold((0.0, f64::NEG_INFINITY), |acc, p| if p.1 > acc.1 { p } else { acc })
}

/// Nearest evaluated abscissae on either side of `t`, or the ends of `[0, T]`.
fn bracket(points: &[(f64, f64)], t: f64, t_max: f64) -> (f64, f64) {
    let lo = points.iter().map(|p| p.0).filter(|&x| x < t).fold(0.0, f64::max);
    let hi = points.iter().map(|p| p.0).filter(|&x| x > t).fold(t_max, f64::min);
    (lo, hi)
}

pub fn search_large_values(
    d: u64,
    t_max: f64,
    set: &ResonatorSet,
    budget: usize,
    seed: u64,
    cfg: &EvalConfig,
) -> Result<SearchResult> {
    search_large_values_weighted(d, t_max, set, budget, seed, cfg, ScoreWeight::Gaussian)
}

pub fn search_large_values_weighted(
    d: u64,
    t_max: f64,
    set: &ResonatorSet,
    budget: usize,
    seed: u64,
    cfg: &EvalConfig,
    weight: ScoreWeight,
) -> Result<SearchResult> {
    if budget < 10 {
        return Err(Error::invalid("budget", format!("need budget >= 10, got {budget}")));
    }
    if !(t_max > 16.0 && t_max <= cfg.height_ceiling) {
        return Err(Error::invalid(
            "T",
            format!("need 16 < T <= {}, got {t_max}", cfg.height_ceiling),
        ));
    }
    let zk = DedekindZeta::new(d)?;
    let rb = build_buckets(set, t_max)?;
    let points = GRID_FACTOR * budget;
    let scores = score_grid(&rb, t_max, points, weight);
    let refine_budget = (budget / 10).clamp(1, 32);
    let chosen = select(&scores, budget - refine_budget);
    let evaluated = chosen
        .par_iter()
        .map(|&i| Ok((scores[i].0, zeta_abs(&zk, scores[i].0, cfg)?)))
        .collect::<Result<Vec<_>>>()?;
    let (mut t_star, mut z_star) = best(&evaluated);
    let (mut lo, mut hi) = bracket(&evaluated, t_star, t_max);
    let mut spent = evaluated.len();
    let target = 1e-9 * t_max;
    let mut x1 = hi - GOLDEN * (hi - lo);
    let mut x2 = lo + GOLDEN * (hi - lo);
    let mut f1 = f64::NAN;
    let mut f2 = f64::NAN;
    let mut left = refine_budget;
    while hi - lo > target && left > 0 {
        if f1.is_nan() {
            f1 = zeta_abs(&zk, x1, cfg)?;
            left -= 1;
            spent += 1;
            if f1 > z_star {
                (t_star, z_star) = (x1, f1);
            }
            continue;
        }
        if f2.is_nan() {
            f2 = zeta_abs(&zk, x2, cfg)?;
            left -= 1;
            spent += 1;
            if f2 > z_star {
                (t_star, z_star) = (x2, f2);
            }
            continue;
        }
        if f1 >= f2 {
            hi = x2;
            (x2, f2) = (x1, f1);
            x1 = hi - GOLDEN * (hi - lo);
            f1 = f64::NAN;
        } else {
            lo = x1;
            (x1, f1) = (x2, f2);
            x2 = lo + GOLDEN * (hi - lo);
            f2 = f64::NAN;
        }
    }
    let complete = hi - lo <= target;
    let (baseline_t, baseline_max) = random_baseline(&zk, t_max, budget, seed, cfg)?;
    Ok(SearchResult {
        d,
        t_max,
        t_star,
        zeta_abs: z_star,
        baseline_t,
        baseline_max,
        reference: growth_scale(t_max).powf(zk.degree() as f64),
        budget,
        seed,
        evaluations: spent,
        complete,
    })
}

/// Best of `budget` uniform draws on `[0, T]`, from the seed's stream 1.
pub fn random_baseline(zk: &DedekindZeta, t_max: f64, budget: usize, seed: u64, cfg: &EvalConfig) -> Result<(f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    let ts: Vec<f64> = (0..budget).map(|_| rng.random_range(0.0..=t_max)).collect();
    let vals = ts
        .par_iter()
        .map(|&t| Ok((t, zeta_abs(zk, t, cfg)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(best(&vals))
}

impl SearchResult {
    pub const CSV_HEADER: &'static str = "seed,T,d,budget,t_star,zeta_abs,baseline_max,reference";

    pub fn to_csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{:e},{:e},{:e}",
            self.seed, self.t_max, self.d, self.budget, self.t_star, self.zeta_abs, self.baseline_max, self.reference
        )
    }

    pub fn to_record(&self) -> String {
        format!(
            "d={}\nT={}\nbudget={}\nseed={}\nt_star={}\nzeta_abs={}\nbaseline_t={}\nbaseline_max={}\nreference={}\nevaluations={}\ncomplete={}\n",
            self.d,
            self.t_max,
            self.budget,
            self.seed,
            self.t_star,
            self.zeta_abs,
            self.baseline_t,
            self.baseline_max,
            self.reference,
            self.evaluations,
            self.complete
        )
    }

    /// Appends a CSV row, writing the header first if the file is new or empty.
    pub fn append_to_ledger(&self, path: &Path) -> Result<()> {
        let fresh = std::fs::metadata(path).map(|m| m.len() == 0).unwrap_or(true);
        let mut f = std::fs::OpenOptions::new().create(true).append(true).open(path)?;
        if fresh {
            writeln!(f, "{}", Self::CSV_HEADER)?;
        }
        writeln!(f, "{}", self.to_csv_row())?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::FactoredInteger;

    fn cfg() -> EvalConfig {
        EvalConfig::default().with_tolerance(1e-8).unwrap()
    }

    fn trivial_set() -> ResonatorSet {
        let mut set = build_set(&ResonatorParams::with_defaults(3, 1 << 10).unwrap()).unwrap();
        set.elements = vec![FactoredInteger::one()];
        set
    }

    #[test]
    fn degenerate_resonator() {
        let r = search_large_values(3, 100.0, &trivial_set(), 20, 1, &cfg()).unwrap();
        assert!((0.0..=100.0).contains(&r.t_star));
        assert!(r.zeta_abs >= 0.0 && r.baseline_max >= 0.0);
        assert!(r.evaluations <= 20);
    }

    #[test]
    fn refined_search_is_deterministic_and_dense() {
        let t = 30.0;
        let set = search_set(3, t, 0.0).unwrap();
        let r = search_large_values(3, t, &set, 200, 9, &cfg()).unwrap();
        let again = search_large_values(3, t, &set, 200, 9, &cfg()).unwrap();
        assert_eq!(r, again);
        let zk = DedekindZeta::new(3).unwrap();
        assert!(r.zeta_abs >= r.baseline_max * (1.0 - 1e-6));
        let fine: f64 = (0..6000)
            .map(|i| zeta_abs(&zk, i as f64 * t / 5999.0, &cfg()).unwrap())
            .fold(0.0, f64::max);
        assert!(r.zeta_abs >= fine * (1.0 - 1e-6));
    }

    #[test]
    fn flat_weight_changes_only_scores() {
        let set = build_set(&ResonatorParams::with_defaults(3, 64).unwrap()).unwrap();
        let rb = build_buckets(&set, 200.0).unwrap();
        let g = score_grid(&rb, 200.0, 1000, ScoreWeight::Gaussian);
        let f = score_grid(&rb, 200.0, 1000, ScoreWeight::Flat);
        assert_eq!(f[0], g[0]);
        assert!(g.iter().zip(&f).all(|(a, b)| a.0 == b.0 && a.1 <= b.1));
        assert_eq!("flat".parse::<ScoreWeight>().unwrap(), ScoreWeight::Flat);
        assert!("cosine".parse::<ScoreWeight>().is_err());
    }

    #[test]
    fn validation() {
        let set = trivial_set();
        assert!(search_large_values(3, 100.0, &set, 9, 1, &cfg()).is_err());
        assert!(search_large_values(3, 10.0, &set, 20, 1, &cfg()).is_err());
        assert!(search_large_values(3, 2e5, &set, 20, 1, &cfg()).is_err());
    }

    #[test]
    fn select_prefers_peaks() {
        let s: Vec<(f64, f64)> = [1.0, 3.0, 2.0, 2.5, 0.5].iter().enumerate().map(|(i, &v)| (i as f64, v)).collect();
        assert_eq!(select(&s, 2), vec![1, 3]);
        assert_eq!(select(&s, 4), vec![1, 3, 2, 0]);
    }

    #[test]
    fn ledger_round_trip() {
        let r = search_large_values(3, 50.0, &trivial_set(), 10, 2, &cfg()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ledger.csv");
        r.append_to_ledger(&path).unwrap();
        r.append_to_ledger(&path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines, vec![SearchResult::CSV_HEADER, &r.to_csv_row(), &r.to_csv_row()]);
    }

    #[test]
    fn search_set_respects_cap() {
        let set = search_set(3, 1e4, 0.0).unwrap();
        assert!(set.len() as u64 <= set.params.n && set.params.n <= 10_000);
        assert!(search_set(3, 1e4, 1.0).is_err());
    }
}
