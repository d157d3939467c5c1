//! Resonator buckets `M_j = M ∩ ((1+1/T)^j, (1+1/T)^{j+1}]` and `R(t)`.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::arith::{FactoredInteger, LOG_SLACK};
use crate::error::{Error, Result};
use crate::resonator::ResonatorSet;
use crate::summation::ComplexSum;

#[derive(Debug, Clone, PartialEq)]
pub struct Bucket {
    pub j: i64,
    /// `h_j = min M_j`.
    pub h: FactoredInteger,
    /// `r(h_j) = √|M_j|`.
    pub r: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResonatorBuckets {
    pub buckets: Vec<Bucket>,
    pub t: f64,
}

/// Index `j` with `(1+1/T)^j < m ≤ (1+1/T)^{j+1}`.
pub fn bucket_index(log_m: f64, t: f64) -> i64 {
    let x = log_m / (1.0 / t).ln_1p();
    let nearest = x.round();
    if (x - nearest).abs() <= LOG_SLACK * x.abs().max(1.0) {
        nearest as i64 - 1
    } else {
        x.floor() as i64
    }
}

pub fn build_buckets(set: &ResonatorSet, t: f64) -> Result<ResonatorBuckets> {
    bucket_elements(&set.elements, t)
}

pub fn bucket_elements(elements: &[FactoredInteger], t: f64) -> Result<ResonatorBuckets> {
    if !(t > 16.0 && t.is_finite()) {
        return Err(Error::invalid("T", format!("need T > 16, got {t}")));
    }
    let mut map: BTreeMap<i64, (&FactoredInteger, usize)> = BTreeMap::new();
    for m in elements {
        map.entry(bucket_index(m.log_value(), t))
            .and_modify(|(h, n)| {
                if m < *h {
                    *h = m;
                }
                *n += 1;
            })
            .or_insert((m, 1));
    }
    let buckets = map
        .into_iter()
        .map(|(j, (h, count))| Bucket {
            j,
            h: h.clone(),
            r: (count as f64).sqrt(),
            count,
        })
        .collect();
    Ok(ResonatorBuckets { buckets, t })
}

impl ResonatorBuckets {
    pub fn len(&self) -> usize {
        self.buckets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.buckets.is_empty()
    }

    /// `Σ r(h_j)²`, which equals `|M|`.
    pub fn total_mass(&self) -> usize {
        self.buckets.iter().map(|b| b.count).sum()
    }

    /// `R(0) = Σ r(h_j)`.
    pub fn r_zero(&self) -> f64 {
        crate::summation::sum(self.buckets.iter().map(|b| b.r))
    }

    /// `(r, log h)` pairs.
    pub fn terms(&self) -> Vec<(f64, f64)> {
        self.buckets.iter().map(|b| (b.r, b.h.log_value())).collect()
    }
}

/// `R(t) = Σ_j r(h_j) e^{-it log h_j}`.
pub fn resonator_value(t: f64, rb: &ResonatorBuckets) -> Complex64 {
    let mut acc = ComplexSum::new();
    for b in &rb.buckets {
        acc.add(b.r * Complex64::from_polar(1.0, -t * b.h.log_value()));
    }
    acc.total()
}

/// `|R(t_0 + iΔ)|²` for `i < count`, by phasor recurrence resynchronised
/// every `RESYNC` steps.
pub fn resonator_power_grid(rb: &ResonatorBuckets, t0: f64, step: f64, count: usize) -> Vec<f64> {
    use rayon::prelude::*;
    const RESYNC: usize = 512;
    let terms = rb.terms();
    let steps: Vec<Complex64> = terms.iter().map(|&(_, l)| Complex64::from_polar(1.0, -step * l)).collect();
    (0..count.div_ceil(RESYNC))
        .into_par_iter()
        .flat_map_iter(|chunk| {
            let start = chunk * RESYNC;
            let end = (start + RESYNC).min(count);
            let t = t0 + start as f64 * step;
            let mut z: Vec<Complex64> = terms.iter().map(|&(r, l)| Complex64::from_polar(r, -t * l)).collect();
            let mut out = Vec::with_capacity(end - start);
            for _ in start..end {
                let mut s = Complex64::new(0.0, 0.0);
                for (zi, &w) in z.iter_mut().zip(&steps) {
                    s += *zi;
                    *zi *= w;
                }
                out.push(s.norm_sqr());
            }
            out
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::resonator::{build_set, ResonatorParams};

    fn fis(ns: &[u64]) -> Vec<FactoredInteger> {
        ns.iter().map(|&n| FactoredInteger::from_u64(n).unwrap()).collect()
    }

    #[test]
    fn single_element() {
        let rb = bucket_elements(&fis(&[1]), 100.0).unwrap();
        assert_eq!(rb.len(), 1);
        assert_eq!(rb.buckets[0].r, 1.0);
        assert_eq!(rb.buckets[0].j, -1);
        for t in [0.0, 1.0, 123.4] {
            assert!((resonator_value(t, &rb).norm() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn shared_bucket() {
        let rb = bucket_elements(&fis(&[1_000_003, 1_000_033, 7]), 1e4).unwrap();
        assert_eq!(rb.len(), 2);
        let b = rb.buckets.iter().find(|b| b.count == 2).unwrap();
        assert_eq!(b.h.to_u64(), Some(1_000_003));
        assert!((b.r - 2f64.sqrt()).abs() < 1e-15);
        assert!(bucket_elements(&fis(&[1]), 16.0).is_err());
    }

    #[test]
    fn half_open_boundaries() {
        let t = 17.0;
        let q = (1.0f64 / t).ln_1p();
        assert_eq!(bucket_index(3.0 * q, t), 2);
        assert_eq!(bucket_index(3.5 * q, t), 3);
        assert_eq!(bucket_index(0.0, t), -1);
    }

    #[test]
    fn partition_and_r_zero_bound() {
        let set = build_set(&ResonatorParams::with_defaults(3, 1 << 12).unwrap()).unwrap();
        let rb = build_buckets(&set, 1e4).unwrap();
        assert_eq!(rb.total_mass(), set.len());
        let r0 = rb.r_zero();
        assert!((resonator_value(0.0, &rb).re - r0).abs() < 1e-9 * r0);
        assert!(r0 * r0 <= (set.params.n as f64) * set.len() as f64);
        for t in [3.1, 77.0, 512.5] {
            assert!(resonator_value(t, &rb).norm() <= r0 * (1.0 + 1e-12));
        }
    }

    #[test]
    fn grid_matches_direct() {
        let set = build_set(&ResonatorParams::with_defaults(3, 1 << 11).unwrap()).unwrap();
        let rb = build_buckets(&set, 1e4).unwrap();
        let grid = resonator_power_grid(&rb, 5.0, 0.25, 1500);
        for i in [0usize, 1, 511, 512, 1499] {
            let want = resonator_value(5.0 + i as f64 * 0.25, &rb).norm_sqr();
            assert!((grid[i] - want).abs() < 1e-9 * want.max(1.0), "{i}");
        }
    }
}
