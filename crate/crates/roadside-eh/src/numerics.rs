//! Small numerical toolkit: adaptive quadrature, safeguarded root finding,
//! normal distribution helpers and binomial coefficients.

use crate::error::{Error, Result};

const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_677_9;
const FRAC_1_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// Standard normal density.
#[inline]
pub fn normal_pdf(x: f64) -> f64 {
    INV_SQRT_2PI * (-0.5 * x * x).exp()
}

/// Standard normal CDF, accurate in both tails.
#[inline]
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x * FRAC_1_SQRT_2)
}

/// Gamma function.
#[inline]
pub fn gamma(x: f64) -> f64 {
    libm::tgamma(x)
}

/// Natural log of the gamma function.
#[inline]
pub fn ln_gamma(x: f64) -> f64 {
    libm::lgamma(x)
}

/// Adaptive Simpson quadrature of `f` over `[a, b]` to absolute tolerance `tol`.
///
/// Subdivides until the local Richardson error estimate meets the (split)
/// tolerance. Errors out if the recursion depth limit is reached without
/// meeting the tolerance, which flags a genuinely hostile integrand.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::domain("adaptive_simpson", "non-finite integration bounds"));
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = simpson(a, b, fa, fm, fb);
    let mut acc = 0.0;
    simpson_rec(f, a, b, fa, fm, fb, whole, tol.max(f64::MIN_POSITIVE), 60, &mut acc)?;
    Ok(acc)
}

#[inline]
fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn simpson_rec<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
    acc: &mut f64,
) -> Result<()> {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if delta.abs() <= 15.0 * tol || (b - a).abs() < 1e-14 * (a.abs() + b.abs()) {
        *acc += left + right + delta / 15.0;
        return Ok(());
    }
    if depth == 0 {
        return Err(Error::numerical(
            "adaptive_simpson",
            format!("depth limit on [{a}, {b}], residual {delta:e}"),
        ));
    }
    simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1, acc)?;
    simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1, acc)
}

/// Root of a monotone function on a bracket, by Newton steps safeguarded
/// with bisection.
///
/// `f` must be increasing with `f(lo) <= 0 <= f(hi)`. `df` supplies the
/// derivative. Converges when the residual drops below `ftol` or the
/// bracket shrinks below `xtol` (both absolute).
pub fn newton_bisect<F, D>(f: F, df: D, lo: f64, hi: f64, xtol: f64, ftol: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    let (mut lo, mut hi) = (lo, hi);
    let flo = f(lo);
    let fhi = f(hi);
    if flo > 0.0 || fhi < 0.0 {
        return Err(Error::numerical(
            "newton_bisect",
            format!("root not bracketed: f({lo}) = {flo:e}, f({hi}) = {fhi:e}"),
        ));
    }
    let mut x = 0.5 * (lo + hi);
    for _ in 0..200 {
        let fx = f(x);
        if fx.abs() <= ftol {
            return Ok(x);
        }
        if fx > 0.0 {
            hi = x;
        } else {
            lo = x;
        }
        if hi - lo <= xtol {
            return Ok(0.5 * (lo + hi));
        }
        let d = df(x);
        let step = fx / d;
        let newton = x - step;
        x = if d > 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
    }
    Err(Error::numerical("newton_bisect", "iteration limit reached".to_string()))
}

/// Binomial coefficient as `f64`; exact (single rounding) for n <= 60,
/// log-space via `ln_gamma` above that to avoid overflow.
pub fn binomial(n: i64, k: i64) -> f64 {
    if k < 0 || n < 0 || k > n {
        return 0.0;
    }
    if n <= 60 {
        binomial_u128(n as u64, k as u64) as f64
    } else {
        let n = n as f64;
        let k = k as f64;
        (ln_gamma(n + 1.0) - ln_gamma(k + 1.0) - ln_gamma(n - k + 1.0)).exp()
    }
}

/// Exact binomial coefficient for small arguments (n <= 60 stays in range).
pub fn binomial_u128(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// Mean and symmetric 95% normal-approximation half-width of a sample.
pub fn mean_and_half_width(samples: &[f64]) -> (f64, f64) {
    let n = samples.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = samples.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, f64::NAN);
    }
    let var = samples.iter().map(|s| (s - mean) * (s - mean)).sum::<f64>() / (n as f64 - 1.0);
    (mean, 1.96 * (var / n as f64).sqrt())
}
