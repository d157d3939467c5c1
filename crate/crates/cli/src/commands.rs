use num_complex::Complex64;
use resonance_core::arith::{euler_phi, PrimeSieve};
use resonance_core::cache::Cache;
use resonance_core::dedekind::{coefficient_oracle, CoefficientTable};
use resonance_core::galsums::{self, geometric_range, trend_slope, GalSumReport, ReportOptions};
use resonance_core::lfunc::{dedekind_zeta_grid, EvalConfig};
use resonance_core::resonator::{build_params, build_set, default_lambda, ResonatorParams, ResonatorSet};
use resonance_core::search::kernel::{default_grid, kernel_hat, lemma4_report};
use resonance_core::search::{search_large_values_weighted, search_set, KernelParams};
use resonance_core::verify::{self, VerifyOutcome};
use serde_json::Value;

use crate::output::{num, Output};
use crate::{cache_dir, Cli, Cmd, Failure, GalTable, Shape, Suite};

type Run = Result<(Output, bool), Failure>;

fn cache(cli: &Cli) -> Option<Cache> {
    (!cli.no_cache).then(|| Cache::new(cache_dir(cli)))
}

fn params(shape: &Shape, n: u64) -> Result<ResonatorParams, Failure> {
    let lambda = shape.lambda.unwrap_or_else(|| default_lambda(shape.u, shape.b));
    Ok(build_params(shape.d, n, shape.u, shape.b, shape.gamma, lambda)?)
}

fn resonator_set(cli: &Cli, shape: &Shape, n: u64) -> Result<ResonatorSet, Failure> {
    let p = params(shape, n)?;
    for w in &p.warnings {
        eprintln!("warning: {w}");
    }
    let Some(cache) = cache(cli) else {
        return Ok(build_set(&p)?);
    };
    let key = format!("d={};N={};u={};b={};gamma={};lambda={}", p.d, p.n, p.u, p.b, p.gamma, p.lambda);
    let text = cache.text("resonator-set", &key, || build_set(&p).map(|s| s.to_text()))?;
    match ResonatorSet::from_text(&text) {
        Ok(set) if set.params == p && set.check_element_form().is_ok() => Ok(set),
        _ => {
            let set = build_set(&p)?;
            cache.put("resonator-set", &key, set.to_text().as_bytes())?;
            Ok(set)
        }
    }
}

fn report_row(r: &GalSumReport) -> Vec<Value> {
    vec![
        r.d.into(),
        r.n.into(),
        (r.size as u64).into(),
        num(r.s_half_weighted),
        num(r.s_third_weighted),
        num(r.normalized),
        num(r.beta_empirical),
        num(r.beta_theoretical),
        num(r.h),
        num(r.lcal_n),
    ]
}

fn report_columns() -> Vec<&'static str> {
    GalSumReport::CSV_HEADER.split(',').collect()
}

fn outcome_table(list: &[VerifyOutcome]) -> Output {
    let mut out = Output::new(&["suite", "checked", "violations", "passed", "detail"]);
    for o in list {
        out.push(vec![
            o.suite.clone().into(),
            o.checked.into(),
            o.violations.into(),
            o.passed().into(),
            o.detail.clone().into(),
        ]);
    }
    out
}

fn invalid(name: &str, reason: impl std::fmt::Display) -> Failure {
    Failure::invalid(format!("invalid parameter `{name}`: {reason}"))
}

pub fn run(cli: &Cli) -> Run {
    match &cli.command {
        Cmd::Coeffs { d, n_max, check } => {
            let build = || CoefficientTable::new(*d, *n_max);
            let table = match cache(cli) {
                Some(c) => {
                    let text = c.text("coeffs", &format!("d={d};n_max={n_max}"), || build().map(|t| t.to_csv()))?;
                    match CoefficientTable::from_csv(*d, &text) {
                        Ok(t) if t.len() == *n_max => t,
                        _ => build()?,
                    }
                }
                None => build()?,
            };
            let mut out = Output::new(&["n", "a_n"]);
            for n in 1..=*n_max {
                out.push(vec![(n as u64).into(), table.get(n).into()]);
            }
            let mut ok = true;
            if *check {
                let oracle = coefficient_oracle(*n_max, *d)?;
                let mismatches = (1..=*n_max).filter(|&n| table.get(n) as u64 != oracle[n]).count();
                out.note("oracle_mismatches", (mismatches as u64).into());
                ok = mismatches == 0;
            }
            Ok((out, ok))
        }
        Cmd::Construct { shape, n, save } => {
            let set = resonator_set(cli, shape, *n)?;
            if let Some(path) = save {
                std::fs::write(path, set.to_text()).map_err(|e| Failure::failed(format!("cannot write {}: {e}", path.display())))?;
            }
            let mut out = Output::new(&["index", "m", "omega", "log_value"]);
            for (i, m) in set.elements.iter().enumerate() {
                out.push(vec![(i as u64).into(), m.to_record().into(), (m.omega() as u64).into(), num(m.log_value())]);
            }
            out.note("d", set.params.d.into());
            out.note("N", set.params.n.into());
            out.note("size", (set.len() as u64).into());
            out.note("levels", (set.params.k_levels() as u64).into());
            Ok((out, true))
        }
        Cmd::Galsum { shape, n, alpha, grid, t_alpha, table } => {
            let set = resonator_set(cli, shape, *n)?;
            let opts = ReportOptions {
                plain_alpha: *alpha,
                grid_points: *grid,
                t_alpha: *t_alpha,
            };
            if !(*t_alpha > 0.0) {
                return Err(invalid("t-alpha", "must be positive"));
            }
            let r = galsums::report_with(&set, &opts)?;
            let out = match table {
                GalTable::Report => {
                    let mut cols = report_columns();
                    let mut row = report_row(&r);
                    if let Some((_, v)) = r.s_alpha_plain {
                        cols.push("s_alpha_plain");
                        row.push(num(v));
                    }
                    let mut out = Output::new(&cols);
                    out.push(row);
                    out
                }
                GalTable::Profile => {
                    let mut out = Output::new(&["X", "truncated"]);
                    for &(x, v) in &r.truncated {
                        out.push(vec![num(x), num(v)]);
                    }
                    out
                }
                GalTable::Sigma => {
                    let mut out = Output::new(&["k", "j_k", "sigma", "t_sigma"]);
                    for l in &r.sigma_levels {
                        out.push(vec![(l.k as u64).into(), l.j_k.into(), num(l.sigma), num(l.t_sigma)]);
                    }
                    out
                }
            };
            Ok((out, true))
        }
        Cmd::Kernel { eta, d, epsilon, t, check, points } => {
            let eta = match (eta, d) {
                (Some(e), _) => *e,
                (None, Some(d)) => u32::try_from(2 * euler_phi(*d)).map_err(|_| invalid("d", "eta out of range"))?,
                (None, None) => return Err(invalid("eta", "give --eta or --d")),
            };
            let kp = KernelParams::new(eta, *epsilon, *t)?;
            if *points < 1 {
                return Err(invalid("points", "must be positive"));
            }
            let grid: Vec<f64> = if *points == 200 {
                default_grid(&kp)
            } else {
                let top = kp.band_limit();
                (0..*points).map(|i| top * i as f64 / (*points - 1).max(1) as f64).collect()
            };
            let mut out = Output::new(&["v", "k_hat"]);
            for &v in &grid {
                out.push(vec![num(v), num(kernel_hat(v, &kp)?)]);
            }
            out.note("eta", eta.into());
            out.note("c", num(kp.c()));
            out.note("hat_zero", num(kernel_hat(0.0, &kp)?));
            out.note("asymptotic", num((3.0 * std::f64::consts::PI / eta as f64).sqrt()));
            let mut ok = true;
            match check.as_deref() {
                None => {}
                Some("lemma4") => {
                    let r = lemma4_report(&kp, &grid, 0.0)?;
                    out.note("bounded", r.bounded.into());
                    out.note("monotone", r.monotone.into());
                    out.note("max_derivative", num(r.max_derivative));
                    out.note("derivative_bound", num(r.derivative_bound));
                    out.note("lemma4", r.holds().into());
                    ok = r.holds();
                }
                Some(other) => return Err(invalid("check", format!("unknown check `{other}` (expected lemma4)"))),
            }
            Ok((out, ok))
        }
        Cmd::Search { d, t, budget, seed, beta, tolerance, weight, results } => {
            let cfg = EvalConfig::default().with_tolerance(*tolerance)?;
            let set = search_set(*d, *t, *beta)?;
            let r = search_large_values_weighted(*d, *t, &set, *budget, *seed, &cfg, *weight)?;
            let ledger = results.clone().unwrap_or_else(|| cache_dir(cli).join("search-ledger.csv"));
            if let Some(dir) = ledger.parent().filter(|p| !p.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir).map_err(|e| Failure::failed(e.to_string()))?;
            }
            r.append_to_ledger(&ledger)?;
            let mut out = Output::new(&[
                "d", "T", "N", "size", "budget", "seed", "t_star", "zeta_abs", "baseline_t", "baseline_max", "reference",
                "evaluations", "complete",
            ]);
            out.push(vec![
                r.d.into(),
                num(r.t_max),
                set.params.n.into(),
                (set.len() as u64).into(),
                (r.budget as u64).into(),
                r.seed.into(),
                num(r.t_star),
                num(r.zeta_abs),
                num(r.baseline_t),
                num(r.baseline_max),
                num(r.reference),
                (r.evaluations as u64).into(),
                r.complete.into(),
            ]);
            Ok((out, true))
        }
        Cmd::Verify { suite, d, n, pairs, seed, n_max, count, x, t } => {
            let shape = Shape {
                d: *d,
                u: resonance_core::resonator::DEFAULT_U,
                b: resonance_core::resonator::DEFAULT_B,
                gamma: resonance_core::resonator::DEFAULT_GAMMA,
                lambda: None,
            };
            let list = match suite {
                Suite::Coeffs => vec![verify::coefficient_check(*d, *n_max)?],
                Suite::Lemma1 => vec![verify::lemma1_values(*d, *count)?, verify::lemma1_pairs(*d, *pairs, *seed)?],
                Suite::Lemma2 => vec![verify::lemma2_pairs(&resonator_set(cli, &shape, *n)?, *pairs, *seed)?],
                Suite::Gcd => vec![verify::gcd_identity_pairs(&resonator_set(cli, &shape, *n)?, *pairs, *seed)?],
                Suite::Relation5 => vec![verify::relation5_instances(*d, *count, *seed)?],
                Suite::Rankin => vec![verify::rankin_profile(&resonator_set(cli, &shape, *n)?, *count)?],
                Suite::Sw => {
                    if !(*x >= 1e3) {
                        return Err(invalid("x", "need x >= 1000"));
                    }
                    let sieve = PrimeSieve::default();
                    vec![verify::siegel_walfisz(&sieve, *x, &[*d])?]
                }
                Suite::Zeta => vec![verify::zeta_consistency(*d, t, 1e-6)?],
            };
            let ok = list.iter().all(VerifyOutcome::passed);
            Ok((outcome_table(&list), ok))
        }
        Cmd::Sweep { shape, n_lo, n_hi, factor } => {
            let ns = geometric_range(*n_lo, *n_hi, *factor)?;
            let mut reports = Vec::with_capacity(ns.len());
            for &n in &ns {
                reports.push(galsums::report(&resonator_set(cli, shape, n)?)?);
            }
            let mut out = Output::new(&report_columns());
            for r in &reports {
                out.push(report_row(r));
            }
            out.note("slope", trend_slope(&reports).map_or(Value::Null, num));
            Ok((out, true))
        }
        Cmd::Zeta { d, sigma, t_lo, t_hi, steps, tolerance, smoothing } => {
            if t_hi < t_lo {
                return Err(invalid("t-hi", "must be >= t-lo"));
            }
            if *steps < 1 {
                return Err(invalid("steps", "must be positive"));
            }
            let cfg = EvalConfig::new(*tolerance, EvalConfig::default().max_terms, *smoothing)?;
            let ts: Vec<f64> = (0..*steps)
                .map(|i| if *steps == 1 { *t_lo } else { t_lo + (t_hi - t_lo) * i as f64 / (*steps - 1) as f64 })
                .collect();
            let rows = dedekind_zeta_grid(*d, *sigma, &ts, &cfg)?;
            let mut out = Output::new(&["t", "re", "im", "abs", "est_error"]);
            for r in rows {
                let v: Complex64 = r.value;
                out.push(vec![num(r.t), num(v.re), num(v.im), num(v.norm()), num(r.est_error)]);
            }
            Ok((out, true))
        }
    }
}
