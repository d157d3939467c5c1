//! The kernel `K_η(u) = sin^{2η}(cu) / (c^{2η-1} u^{2η})`, `c = ε log T / η`,
//! and its Fourier transform.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::summation::NeumaierSum;

pub const DEFAULT_EPSILON: f64 = 0.05;
/// Absolute error target of `kernel_hat`.
pub const HAT_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelParams {
    pub eta: u32,
    pub epsilon: f64,
    pub t: f64,
}

impl KernelParams {
    pub fn new(eta: u32, epsilon: f64, t: f64) -> Result<Self> {
        if eta < 1 {
            return Err(Error::invalid("eta", "need eta >= 1"));
        }
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::invalid("epsilon", format!("need epsilon > 0, got {epsilon}")));
        }
        if !(t > 16.0 && t.is_finite()) {
            return Err(Error::invalid("T", format!("need T > 16, got {t}")));
        }
        Ok(Self { eta, epsilon, t })
    }

    /// `η = 2φ(d)`.
    pub fn for_field(d: u64, epsilon: f64, t: f64) -> Result<Self> {
        let eta = 2 * crate::arith::euler_phi(d);
        Self::new(u32::try_from(eta).map_err(|_| Error::invalid("d", "eta out of range"))?, epsilon, t)
    }

    pub fn c(&self) -> f64 {
        self.epsilon * self.t.ln() / self.eta as f64
    }

    /// `2ε log T`; `K̂` vanishes beyond it.
    pub fn band_limit(&self) -> f64 {
        2.0 * self.epsilon * self.t.ln()
    }

    fn with_eta(&self, eta: u32) -> Self {
        Self { eta, ..*self }
    }
}

/// `(sin x / x)^n`, in log space away from the origin.
fn sinc_pow(x: f64, n: u32) -> f64 {
    let x = x.abs();
    if x < 1e-4 {
        let s = 1.0 - x * x / 6.0;
        return s.powi(n as i32);
    }
    let r = x.sin() / x;
    if r == 0.0 {
        return 0.0;
    }
    let v = n as f64 * r.abs().ln();
    let mag = v.exp();
    if n % 2 == 1 && r < 0.0 {
        -mag
    } else {
        mag
    }
}

pub fn kernel_value(u: f64, kp: &KernelParams) -> f64 {
    let c = kp.c();
    c * sinc_pow(c * u, 2 * kp.eta)
}

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// 15-point Kronrod estimate and its difference from the embedded 7-point
/// Gauss rule.
fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(mid);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for i in 0..7 {
        let dx = half * XGK[i];
        let s = f(mid - dx) + f(mid + dx);
        k += WGK[i] * s;
        if i % 2 == 1 {
            g += WG[i / 2] * s;
        }
    }
    (k * half, ((k - g) * half).abs())
}

/// Adaptive Gauss–Kronrod on `[a, b]` to absolute tolerance `tol`.
pub fn integrate<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> Result<f64> {
    let mut acc = NeumaierSum::new();
    let mut stack = vec![(a, b, tol, 0u32)];
    while let Some((lo, hi, t, depth)) = stack.pop() {
        let (v, e) = gk15(f, lo, hi);
        if e <= t.max(1e-15 * v.abs()) {
            acc.add(v);
        } else if depth >= 40 {
            return Err(Error::Quadrature(format!("no convergence on [{lo}, {hi}]")));
        } else {
            let mid = 0.5 * (lo + hi);
            stack.push((mid, hi, 0.5 * t, depth + 1));
            stack.push((lo, mid, 0.5 * t, depth + 1));
        }
    }
    Ok(acc.total())
}

/// Upper end of the `x = cu` integration range: `2 ∫_X^∞ x^{-2η} dx` below
/// `tol`, rounded up to a multiple of `π`.
fn x_max(eta: u32, tol: f64) -> f64 {
    let n = 2.0 * eta as f64 - 1.0;
    let x = (0.5 * tol * n).powf(-1.0 / n);
    (x / PI).ceil().max(1.0) * PI
}

/// `K̂_η(v) = ∫ K_η(u) cos(uv) du = ∫ (sin x/x)^{2η} cos(xv/c) dx`.
/// For `η = 1` the transform is the triangle `π(1 - |w|/2)₊`, `w = v/c`.
pub fn kernel_hat(v: f64, kp: &KernelParams) -> Result<f64> {
    let w = (v / kp.c()).abs();
    let n = 2 * kp.eta;
    if w >= n as f64 {
        return Ok(0.0);
    }
    if kp.eta == 1 {
        return Ok(PI * (1.0 - 0.5 * w));
    }
    let xm = x_max(kp.eta, 0.5 * HAT_TOLERANCE);
    let panels = (xm / PI).round() as usize;
    let per_panel = 0.25 * HAT_TOLERANCE / panels as f64;
    let f = |x: f64| sinc_pow(x, n) * (w * x).cos();
    let mut acc = NeumaierSum::new();
    for k in 0..panels {
        acc.add(integrate(&f, k as f64 * PI, (k + 1) as f64 * PI, per_panel)?);
    }
    Ok(2.0 * acc.total())
}

/// `∫ K_η(u) sin(uv) du` over the full symmetric range, without folding.
pub fn kernel_hat_imag(v: f64, kp: &KernelParams) -> Result<f64> {
    let n = 2 * kp.eta;
    let w = v / kp.c();
    let xm = x_max(kp.eta.max(2), 0.5 * HAT_TOLERANCE);
    let panels = (xm / PI).round() as i64;
    let per_panel = 0.25 * HAT_TOLERANCE / panels as f64;
    let f = |x: f64| sinc_pow(x, n) * (w * x).sin();
    let mut acc = NeumaierSum::new();
    for k in -panels..panels {
        acc.add(integrate(&f, k as f64 * PI, (k + 1) as f64 * PI, per_panel)?);
    }
    Ok(acc.total())
}

/// `200` points on `[0, 2ε log T]`.
pub fn default_grid(kp: &KernelParams) -> Vec<f64> {
    let top = kp.band_limit();
    (0..200).map(|i| top * i as f64 / 199.0).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Lemma4Report {
    pub eta: u32,
    pub hat_zero: f64,
    /// `√(3π/η)`.
    pub asymptotic: f64,
    pub bounded: bool,
    pub monotone: bool,
    /// Largest central-difference `|K̂′(v)|` on the grid.
    pub max_derivative: f64,
    /// `K̂_{η-1}(0) / c`; infinite for `η = 1`.
    pub derivative_bound: f64,
    pub derivative_ok: bool,
}

impl Lemma4Report {
    pub fn holds(&self) -> bool {
        self.bounded && self.monotone && self.derivative_ok
    }
}

/// Checks `0 ≤ K̂ ≤ K̂(0)`, monotonicity and the derivative bound on `grid`,
/// allowing `HAT_TOLERANCE` in comparisons and relative `slack` on the
/// derivative bound.
pub fn lemma4_report(kp: &KernelParams, grid: &[f64], slack: f64) -> Result<Lemma4Report> {
    if grid.iter().any(|&v| !(v >= 0.0)) || grid.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::invalid("grid", "must be sorted and nonnegative"));
    }
    let hat_zero = kernel_hat(0.0, kp)?;
    let values = grid.iter().map(|&v| kernel_hat(v, kp)).collect::<Result<Vec<_>>>()?;
    let tol = HAT_TOLERANCE;
    let bounded = values.iter().all(|&k| k >= -tol && k <= hat_zero + tol);
    let monotone = values.windows(2).all(|w| w[1] <= w[0] + tol);
    let c = kp.c();
    let derivative_bound = if kp.eta == 1 {
        f64::INFINITY
    } else {
        kernel_hat(0.0, &kp.with_eta(kp.eta - 1))? / c
    };
    let h = 1e-4 * c;
    let mut max_derivative: f64 = 0.0;
    for &v in grid {
        let lo = (v - h).max(0.0);
        let hi = v + h;
        let dk = (kernel_hat(hi, kp)? - kernel_hat(lo, kp)?) / (hi - lo);
        max_derivative = max_derivative.max(dk.abs());
    }
    Ok(Lemma4Report {
        eta: kp.eta,
        hat_zero,
        asymptotic: (3.0 * PI / kp.eta as f64).sqrt(),
        bounded,
        monotone,
        max_derivative,
        derivative_bound,
        derivative_ok: max_derivative <= derivative_bound * (1.0 + slack),
    })
}

pub fn verify_lemma4(kp: &KernelParams, grid: &[f64]) -> Result<bool> {
    Ok(lemma4_report(kp, grid, 0.0)?.holds())
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;
    use num_rational::BigRational;
    use num_traits::{One, ToPrimitive, Zero};

    /// `∫ (sin x/x)^n cos(wx) dx` as `π` times an exact B-spline value, for
    /// rational `w`.
    fn hat_exact(n: u32, w: &BigRational) -> f64 {
        let mut acc = BigRational::zero();
        let mut binom = BigInt::one();
        for k in 0..=n {
            let base = BigRational::from_integer(BigInt::from(n as i64 - 2 * k as i64)) + w;
            if base > BigRational::zero() {
                let term = num_traits::pow(base, (n - 1) as usize) * BigRational::from_integer(binom.clone());
                if k % 2 == 0 {
                    acc += term;
                } else {
                    acc -= term;
                }
            }
            binom = binom * BigInt::from(n - k) / BigInt::from(k + 1);
        }
        let denom: BigInt = (1..n).map(BigInt::from).product::<BigInt>() * num_traits::pow(BigInt::from(2), (n - 1) as usize);
        PI * (acc / BigRational::from_integer(denom)).to_f64().unwrap()
    }

    fn kp(eta: u32) -> KernelParams {
        KernelParams::new(eta, DEFAULT_EPSILON, 1e4).unwrap()
    }

    #[test]
    fn kernel_values() {
        let k = kp(4);
        let c = k.c();
        assert_eq!(kernel_value(0.0, &k), c);
        assert!(kernel_value(PI / c, &k).abs() < 1e-30);
        for i in 1..50 {
            let u = i as f64 * 0.37;
            assert_eq!(kernel_value(u, &k), kernel_value(-u, &k));
            assert!(kernel_value(u, &k) >= 0.0);
        }
        // log-space evaluation stays finite for large η
        let big = kp(400);
        assert!(kernel_value(3.0 / big.c(), &big).is_finite());
        assert!(KernelParams::new(0, 0.05, 1e4).is_err());
        assert!(KernelParams::new(2, 0.05, 16.0).is_err());
    }

    #[test]
    fn hat_matches_bspline() {
        for eta in [2u32, 4, 10] {
            let k = kp(eta);
            for (num, den) in [(0i64, 1i64), (1, 3), (1, 1), (7, 2), (5, 1)] {
                let w = BigRational::new(BigInt::from(num), BigInt::from(den));
                if w.to_f64().unwrap() >= 2.0 * eta as f64 {
                    continue;
                }
                let v = w.to_f64().unwrap() * k.c();
                let got = kernel_hat(v, &k).unwrap();
                let want = hat_exact(2 * eta, &w);
                assert!((got - want).abs() < 1e-10, "eta={eta} w={w}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn hat_eta_one_and_band_limit() {
        let k = kp(1);
        assert!((kernel_hat(0.0, &k).unwrap() - PI).abs() < 1e-15);
        let k4 = kp(4);
        assert_eq!(kernel_hat(1.01 * k4.band_limit(), &k4).unwrap(), 0.0);
    }

    #[test]
    fn hat_zero_asymptotic() {
        let k = kp(100);
        let r = kernel_hat(0.0, &k).unwrap() / (3.0 * PI / 100.0).sqrt();
        assert!((0.95..=1.05).contains(&r), "{r}");
    }

    #[test]
    fn even_and_real() {
        let k = kp(4);
        for v in [0.1, 0.3, 0.7] {
            assert!((kernel_hat(v, &k).unwrap() - kernel_hat(-v, &k).unwrap()).abs() < 1e-10);
            assert!(kernel_hat_imag(v, &k).unwrap().abs() < 1e-10);
        }
    }

    #[test]
    fn transform_property_sweeps() {
        for eta in [4, 10] {
            let k = kp(eta);
            let r = lemma4_report(&k, &default_grid(&k), 0.0).unwrap();
            assert!(r.holds(), "{r:?}");
        }
        assert!(verify_lemma4(&kp(4), &[0.0]).unwrap());
        assert!(verify_lemma4(&kp(4), &[0.3, 0.1]).is_err());
    }

    #[test]
    fn integrate_polynomial_and_oscillatory() {
        let v = integrate(&|x: f64| x * x, 0.0, 3.0, 1e-14).unwrap();
        assert!((v - 9.0).abs() < 1e-13);
        let v = integrate(&|x: f64| (40.0 * x).cos(), 0.0, PI, 1e-13).unwrap();
        assert!(v.abs() < 1e-12);
    }
}
