//! Numeric kernels shared across modules: compensated summation and the
//! additive character `e(θ) = exp(2πiθ)` with careful range reduction.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::ToPrimitive;

/// Kahan–Babuška compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct Kahan {
    sum: f64,
    c: f64,
}

impl Kahan {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.c += (self.sum - t) + x;
        } else {
            self.c += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.c
    }
}

/// Compensated complex accumulator (independent real/imaginary parts).
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanComplex {
    re: Kahan,
    im: Kahan,
}

impl KahanComplex {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, z: Complex64) {
        self.re.add(z.re);
        self.im.add(z.im);
    }

    #[inline]
    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re.value(), self.im.value())
    }
}

/// `e(θ)` for a phase already reduced to a moderate magnitude.
#[inline]
pub fn e_unit(theta: f64) -> Complex64 {
    let t = theta - theta.round();
    let (s, c) = (std::f64::consts::TAU * t).sin_cos();
    Complex64::new(c, s)
}

/// `e(α·f)` where `f` is an exact integer.
///
/// The product is formed with an FMA two-product so the fractional part keeps
/// full precision even when `α·f` is many orders of magnitude above 1.
#[inline]
pub fn e_alpha_times(alpha: f64, f: &BigInt) -> Complex64 {
    // desk-scale polynomial values fit in f64 exactly (|f| < 2^53)
    let fv = f.to_f64().expect("polynomial value out of f64 range");
    e_alpha_times_f64(alpha, fv)
}

#[inline]
pub fn e_alpha_times_f64(alpha: f64, fv: f64) -> Complex64 {
    let hi = alpha * fv;
    let lo = alpha.mul_add(fv, -hi);
    let frac = (hi - hi.round()) + lo;
    e_unit(frac)
}

/// `e(a·f/q)` with the phase reduced exactly in integer arithmetic.
#[inline]
pub fn e_rational(a: i64, f: &BigInt, q: i64) -> Complex64 {
    debug_assert!(q > 0);
    let r = ((f % q).to_i64().unwrap() * (a % q)).rem_euclid(q);
    e_unit(r as f64 / q as f64)
}

/// Least-squares slope of `y` against `x`.
pub fn fit_slope(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len());
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for (&a, &b) in x.iter().zip(y) {
        num += (a - mx) * (b - my);
        den += (a - mx) * (a - mx);
    }
    num / den
}

/// Distance from `z` to the nearest integer.
#[inline]
pub fn dist_to_int(z: f64) -> f64 {
    (z - z.round()).abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    #[test]
    fn kahan_recovers_cancellation() {
        let mut k = Kahan::new();
        k.add(1e16);
        for _ in 0..1000 {
            k.add(1.0);
        }
        k.add(-1e16);
        assert_eq!(k.value(), 1000.0);
    }

    #[test]
    fn rational_phase_is_exact() {
        // e(3*7/4) = e(21/4) = e(1/4) = i
        let z = e_rational(3, &BigInt::from(7), 4);
        assert!((z.re).abs() < 1e-15);
        assert!((z.im - 1.0).abs() < 1e-15);
    }

    #[test]
    fn phase_reduction_matches_naive_for_small_args() {
        for i in 0..100 {
            let alpha = 0.01 * i as f64 - 0.5;
            let f = BigInt::from(37);
            let a = e_alpha_times(alpha, &f);
            let b = e_unit(alpha * 37.0);
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn slope_of_line() {
        let x: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let y: Vec<f64> = x.iter().map(|v| 3.0 - 2.0 * v).collect();
        assert!((fit_slope(&x, &y) + 2.0).abs() < 1e-12);
    }
}
