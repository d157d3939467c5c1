//! Compensated (Neumaier) summation and a block reduction whose result does
//! not depend on the number of worker threads.

use num_complex::Complex64;
use rayon::prelude::*;

/// Items per block in [`par_block_sum`]. Block boundaries are fixed, so the
/// reduction tree is the same for any thread count.
pub const BLOCK: usize = 1024;

#[derive(Debug, Clone, Copy, Default)]
pub struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn total(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for NeumaierSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = NeumaierSum::new();
        for x in iter {
            s.add(x);
        }
        s
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ComplexSum {
    re: NeumaierSum,
    im: NeumaierSum,
}

impl ComplexSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, z: Complex64) {
        self.re.add(z.re);
        self.im.add(z.im);
    }

    pub fn total(&self) -> Complex64 {
        Complex64::new(self.re.total(), self.im.total())
    }
}

pub fn sum(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().collect::<NeumaierSum>().total()
}

/// Sums `f(i)` for `i in 0..n`. Each fixed-size block is summed with
/// compensation (in parallel), then block totals are combined in index order.
pub fn par_block_sum<F>(n: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync,
{
    let blocks = n.div_ceil(BLOCK);
    let partials: Vec<f64> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let lo = b * BLOCK;
            let hi = (lo + BLOCK).min(n);
            let mut acc = NeumaierSum::new();
            for i in lo..hi {
                acc.add(f(i));
            }
            acc.total()
        })
        .collect();
    sum(partials)
}

/// Serial counterpart of [`par_block_sum`] with the identical reduction tree.
pub fn block_sum<F>(n: usize, f: F) -> f64
where
    F: Fn(usize) -> f64,
{
    let mut outer = NeumaierSum::new();
    let mut lo = 0;
    while lo < n {
        let hi = (lo + BLOCK).min(n);
        let mut acc = NeumaierSum::new();
        for i in lo..hi {
            acc.add(f(i));
        }
        outer.add(acc.total());
        lo = hi;
    }
    outer.total()
}

/// Complex counterpart of [`par_block_sum`], with blocks of `block` items.
pub fn par_block_sum_complex<F>(n: usize, block: usize, f: F) -> Complex64
where
    F: Fn(usize) -> Complex64 + Sync,
{
    let blocks = n.div_ceil(block);
    let partials: Vec<Complex64> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let lo = b * block;
            let hi = (lo + block).min(n);
            let mut acc = ComplexSum::new();
            for i in lo..hi {
                acc.add(f(i));
            }
            acc.total()
        })
        .collect();
    let mut acc = ComplexSum::new();
    for z in partials {
        acc.add(z);
    }
    acc.total()
}
