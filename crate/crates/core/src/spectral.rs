//! FFT helpers: band-limited translation and differentiation of sampled
//! wavefunctions. The `n` samples are treated as one period of length `n h`.

use std::cell::RefCell;
use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use rustfft::FftPlanner;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// Angular wavenumbers in FFT order. The Nyquist entry (even `n`) is
/// reported with a positive sign.
fn wavenumbers(n: usize, h: f64) -> Vec<f64> {
    let dk = 2.0 * PI / (n as f64 * h);
    (0..n)
        .map(|m| {
            let m = m as isize;
            let signed = if m > n as isize / 2 { m - n as isize } else { m };
            signed as f64 * dk
        })
        .collect()
}

fn transform(buf: &mut [C64], inverse: bool) {
    PLANNER.with(|p| {
        let mut planner = p.borrow_mut();
        let fft = if inverse {
            planner.plan_fft_inverse(buf.len())
        } else {
            planner.plan_fft_forward(buf.len())
        };
        fft.process(buf);
    });
}

/// Applies the spectral multiplier `mult(k)` to `values`. `nyquist` is used
/// for the unpaired Nyquist mode of an even-length transform.
fn apply_multiplier(
    values: &[C64],
    h: f64,
    mult: impl Fn(f64) -> C64,
    nyquist: impl Fn(f64) -> C64,
) -> Vec<C64> {
    let n = values.len();
    let mut buf = values.to_vec();
    transform(&mut buf, false);
    let ks = wavenumbers(n, h);
    for (m, (c, &k)) in buf.iter_mut().zip(&ks).enumerate() {
        let f = if n % 2 == 0 && m == n / 2 { nyquist(k) } else { mult(k) };
        *c *= f;
    }
    transform(&mut buf, true);
    let scale = 1.0 / n as f64;
    buf.iter_mut().for_each(|c| *c *= scale);
    buf
}

/// Returns samples of `f(x - shift)`.
pub(crate) fn translate(values: &[C64], h: f64, shift: f64) -> Vec<C64> {
    apply_multiplier(
        values,
        h,
        |k| C64::from_polar(1.0, -k * shift),
        |k| C64::new((k * shift).cos(), 0.0),
    )
}

/// Returns samples of `df/dx`.
pub(crate) fn derivative(values: &[C64], h: f64) -> Vec<C64> {
    apply_multiplier(values, h, |k| C64::new(0.0, k), |_| C64::new(0.0, 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn gaussian(xs: &[f64], c: f64) -> Vec<C64> {
        xs.iter().map(|x| C64::new((-(x - c) * (x - c)).exp(), 0.0)).collect()
    }

    #[test]
    fn translation_by_fraction_of_step() {
        let n = 512;
        let h = 16.0 / (n - 1) as f64;
        let xs: Vec<f64> = (0..n).map(|k| -8.0 + k as f64 * h).collect();
        let shifted = translate(&gaussian(&xs, 0.0), h, 0.377 * h + 1.1);
        let want = gaussian(&xs, 0.377 * h + 1.1);
        for (a, b) in shifted.iter().zip(&want) {
            assert_abs_diff_eq!(a.re, b.re, epsilon = 1e-12);
            assert_abs_diff_eq!(a.im, b.im, epsilon = 1e-12);
        }
    }

    #[test]
    fn derivative_of_gaussian() {
        let n = 256;
        let h = 16.0 / (n - 1) as f64;
        let xs: Vec<f64> = (0..n).map(|k| -8.0 + k as f64 * h).collect();
        let d = derivative(&gaussian(&xs, 0.5), h);
        for (x, v) in xs.iter().zip(&d) {
            let want = -2.0 * (x - 0.5) * (-(x - 0.5) * (x - 0.5)).exp();
            assert_abs_diff_eq!(v.re, want, epsilon = 1e-10);
            assert_abs_diff_eq!(v.im, 0.0, epsilon = 1e-10);
        }
    }
}
