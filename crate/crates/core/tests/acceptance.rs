//! Acceptance criteria, one PASS/FAIL line each.

use std::time::Instant;

use num_complex::Complex64;
use resonance_core::arith::PrimeSieve;
use resonance_core::galsums::{geometric_range, sweep, trend_slope, ReportOptions};
use resonance_core::lfunc::{dedekind_zeta_value, zeta_value, EvalConfig};
use resonance_core::resonator::{build_set, ResonatorParams, ResonatorSet};
use resonance_core::search::kernel::{default_grid, kernel_hat, kernel_hat_imag, lemma4_report, DEFAULT_EPSILON};
use resonance_core::search::{search_large_values, search_set, KernelParams};
use resonance_core::verify::{self, VerifyOutcome};
use resonance_core::Result;

type Check = fn() -> Result<(bool, String)>;

fn outcomes(list: Vec<VerifyOutcome>) -> (bool, String) {
    let ok = list.iter().all(VerifyOutcome::passed);
    let detail = list
        .iter()
        .map(|o| format!("{} {}/{} violations ({})", o.suite, o.violations, o.checked, o.detail))
        .collect::<Vec<_>>()
        .join("; ");
    (ok, detail)
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    v[v.len() / 2]
}

fn set(d: u64, n: u64) -> Result<ResonatorSet> {
    build_set(&ResonatorParams::with_defaults(d, n)?)
}

fn coefficient_oracle() -> Result<(bool, String)> {
    let list = [3, 4, 5, 6, 8, 12]
        .iter()
        .map(|&d| verify::coefficient_check(d, 5000))
        .collect::<Result<_>>()?;
    Ok(outcomes(list))
}

fn lemma1_values() -> Result<(bool, String)> {
    let list = [3, 5, 7].iter().map(|&d| verify::lemma1_values(d, 50)).collect::<Result<_>>()?;
    Ok(outcomes(list))
}

fn lemma_inequalities() -> Result<(bool, String)> {
    let mut list = Vec::new();
    for (d, n) in [(3, 1 << 14), (5, 1 << 14)] {
        list.push(verify::lemma1_pairs(d, 10_000, 11)?);
        list.push(verify::lemma2_pairs(&set(d, n)?, 10_000, 12)?);
    }
    Ok(outcomes(list))
}

fn gcd_identity() -> Result<(bool, String)> {
    let list = vec![
        verify::gcd_identity_pairs(&set(3, 1 << 14)?, 10_000, 13)?,
        verify::gcd_identity_pairs(&set(5, 1 << 14)?, 10_000, 14)?,
    ];
    Ok(outcomes(list))
}

fn zeta_consistency() -> Result<(bool, String)> {
    let mut list = Vec::new();
    for d in [3, 4, 5] {
        list.push(verify::zeta_consistency(d, &[10.0, 20.0, 50.0], 1e-6)?);
    }
    let (mut ok, mut detail) = outcomes(list);
    let cfg = EvalConfig::default();
    let two = Complex64::new(2.0, 0.0);
    let qi = dedekind_zeta_value(two, 4, &cfg)?.re;
    let want = zeta_value(two, &cfg)?.re * 0.915_965_594_2;
    let err = (qi - want).abs();
    ok &= err <= 1e-8;
    detail.push_str(&format!("; Q(i) at 2: |diff| = {err:.2e}"));
    Ok((ok, detail))
}

fn kernel_suite() -> Result<(bool, String)> {
    let mut ok = true;
    let mut parts = Vec::new();
    for eta in [4, 10, 100] {
        let kp = KernelParams::new(eta, DEFAULT_EPSILON, 1e4)?;
        let grid = default_grid(&kp);
        let r = lemma4_report(&kp, &grid, 0.01)?;
        let mut worst_imag: f64 = 0.0;
        let mut worst_even: f64 = 0.0;
        for &v in &grid {
            worst_imag = worst_imag.max(kernel_hat_imag(v, &kp)?.abs());
            worst_even = worst_even.max((kernel_hat(v, &kp)? - kernel_hat(-v, &kp)?).abs());
        }
        let mut good = r.holds() && worst_imag <= 1e-10 && worst_even <= 1e-10;
        if eta == 100 {
            let ratio = r.hat_zero / r.asymptotic;
            good &= (0.95..=1.05).contains(&ratio);
            parts.push(format!("eta=100 ratio={ratio:.5}"));
        }
        ok &= good;
        parts.push(format!(
            "eta={eta} bounded={} monotone={} deriv={:.4e}<={:.4e} imag={worst_imag:.1e} even={worst_even:.1e}",
            r.bounded, r.monotone, r.max_derivative, r.derivative_bound
        ));
    }
    Ok((ok, parts.join("; ")))
}

fn sweep_ns() -> Vec<u64> {
    geometric_range(1 << 8, 1 << 14, 2).expect("valid range")
}

fn construction_invariants() -> Result<(bool, String)> {
    let mut ok = true;
    let mut parts = Vec::new();
    for n in sweep_ns() {
        let params = ResonatorParams::with_defaults(3, n)?;
        let a = build_set(&params)?;
        let b = build_set(&params)?;
        let form = a.check_element_form().is_ok();
        let same = a.to_text() == b.to_text();
        let good = a.len() as u64 <= n && form && same;
        ok &= good;
        parts.push(format!("N={n}:|M|={}", a.len()));
    }
    Ok((ok, parts.join(" ")))
}

fn relation5() -> Result<(bool, String)> {
    Ok(outcomes(vec![verify::relation5_instances(3, 100, 15)?]))
}

fn rankin() -> Result<(bool, String)> {
    Ok(outcomes(vec![verify::rankin_profile(&set(3, 1 << 12)?, 20)?]))
}

fn growth_trend() -> Result<(bool, String)> {
    let reports = sweep(3, &sweep_ns(), &ReportOptions::default())?;
    let slope = trend_slope(&reports);
    let norm: Vec<String> = reports.iter().map(|r| format!("{:.4}", r.normalized)).collect();
    Ok((
        slope.is_some_and(|s| s > 0.0),
        format!("slope={slope:?} normalized=[{}]", norm.join(", ")),
    ))
}

fn search_efficacy() -> Result<(bool, String)> {
    let t = 1e4;
    let cfg = EvalConfig::default().with_tolerance(1e-8)?;
    let set = search_set(3, t, 0.0)?;
    let mut res = Vec::new();
    let mut base = Vec::new();
    for seed in 0..5 {
        let r = search_large_values(3, t, &set, 2000, seed, &cfg)?;
        res.push(r.zeta_abs);
        base.push(r.baseline_max);
    }
    let (mr, mb) = (median(res), median(base.clone()));
    Ok((
        mr >= mb,
        format!("N={} |M|={} resonator median={mr:.4} random median={mb:.4} random={base:.4?}", set.params.n, set.len()),
    ))
}

fn siegel_walfisz() -> Result<(bool, String)> {
    let sieve = PrimeSieve::with_capacity(10_000_000);
    let count = sieve.prime_count(10_000_000)?;
    let (mut ok, detail) = outcomes(vec![verify::siegel_walfisz(&sieve, 1e7, &[3, 4, 5, 8])?]);
    ok &= count == 620_538;
    Ok((ok, format!("pi(1e7)={count} (expected 620538); {detail}")))
}

fn main() {
    let criteria: [(&str, Check); 12] = [
        ("coefficient oracle equivalence", coefficient_oracle),
        ("split-prime coefficient values", lemma1_values),
        ("coefficient inequalities", lemma_inequalities),
        ("component gcd identity", gcd_identity),
        ("zeta_K consistency", zeta_consistency),
        ("kernel transform properties", kernel_suite),
        ("construction invariants", construction_invariants),
        ("component lower bound by enumeration", relation5),
        ("truncation bound", rankin),
        ("growth trend", growth_trend),
        ("resonance search efficacy", search_efficacy),
        ("Siegel-Walfisz sanity", siegel_walfisz),
    ];
    let mut passed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (ok, detail) = match check() {
            Ok(r) => r,
            Err(e) => (false, format!("error: {e}")),
        };
        passed += ok as usize;
        println!(
            "{} {:>2} {name} [{:.1}s]: {detail}",
            if ok { "PASS" } else { "FAIL" },
            i + 1,
            start.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {passed}/{} criteria passed", criteria.len());
}
