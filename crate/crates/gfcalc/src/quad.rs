//! Gauss–Kronrod quadrature building blocks.

use crate::error::{Error, Result};

// 15-point Kronrod nodes/weights with the embedded 7-point Gauss rule
// (QUADPACK qk15 constants). Nodes are strictly interior, so integrands
// with endpoint singularities are never evaluated at the endpoints.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_69,
    0.279_705_391_489_276_67,
    0.381_830_050_505_118_94,
    0.417_959_183_673_469_4,
];

/// One 15-point Gauss–Kronrod panel on [a, b]; returns (integral, error estimate).
pub(crate) fn gk15<F: Fn(f64) -> f64 + ?Sized>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let fc = f(mid);
    let mut result_k = WGK[7] * fc;
    let mut result_g = WG[3] * fc;
    for j in 0..7 {
        let x = half * XGK[j];
        let fsum = f(mid - x) + f(mid + x);
        result_k += WGK[j] * fsum;
        if j % 2 == 1 {
            result_g += WG[j / 2] * fsum;
        }
    }
    let integral = result_k * half;
    let err = ((result_k - result_g) * half).abs();
    (integral, err)
}

/// Adaptive bisection on top of `gk15`, targeting a relative tolerance.
pub(crate) fn adaptive<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, rel_tol: f64) -> Result<f64> {
    let (whole, err) = gk15(f, a, b);
    let scale = whole.abs().max(1e-300);
    let total = refine(f, a, b, whole, err, rel_tol * scale, 0)?;
    if !total.is_finite() {
        return Err(Error::QuadratureFailed(format!(
            "non-finite integral on [{a}, {b}]"
        )));
    }
    Ok(total)
}

fn refine<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    whole: f64,
    err: f64,
    abs_tol: f64,
    depth: usize,
) -> Result<f64> {
    if err <= abs_tol || err <= 1e-16 * whole.abs() {
        return Ok(whole);
    }
    if depth >= 48 {
        if err > abs_tol.max(1e-10 * whole.abs()) * 1e3 {
            return Err(Error::QuadratureFailed(format!(
                "refinement stalled on [{a}, {b}], err {err:.3e}"
            )));
        }
        return Ok(whole);
    }
    let mid = 0.5 * (a + b);
    if mid <= a || mid >= b {
        return Ok(whole); // interval exhausted at f64 resolution
    }
    let (l, le) = gk15(f, a, mid);
    let (r, re) = gk15(f, mid, b);
    let left = refine(f, a, mid, l, le, 0.5 * abs_tol, depth + 1)?;
    let right = refine(f, mid, b, r, re, 0.5 * abs_tol, depth + 1)?;
    Ok(left + right)
}
