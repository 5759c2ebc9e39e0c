//! Numerical Laplace transform machinery: Gaver–Stehfest and fixed-Talbot
//! inversion plus a singularity-aware forward transform.
//!
//! Every solver in the crate works through Laplace-domain formulas, so this
//! module is the engine room. Stehfest is the default for completely
//! monotone targets; Talbot serves as an independent cross-check for maps
//! that extend analytically off the negative real axis.

use crate::error::{Error, Result};
use crate::quad;
use crate::sampled::SampledFunction;
use num_complex::Complex64;
use std::f64::consts::{LN_2, PI};

/// Inversion method selector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InversionMethod {
    /// Gaver–Stehfest with an even order between 8 and 20.
    Stehfest { order: usize },
    /// Fixed Talbot contour with `nodes` quadrature points and a contour
    /// radius multiplier (1.0 = the standard 2M/(5t) rule).
    Talbot { nodes: usize, scale: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InversionConfig {
    pub method: InversionMethod,
    pub target_rel_tol: f64,
}

impl Default for InversionConfig {
    fn default() -> Self {
        InversionConfig {
            method: InversionMethod::Stehfest { order: 16 },
            target_rel_tol: 1e-8,
        }
    }
}

impl InversionConfig {
    pub fn talbot() -> Self {
        InversionConfig {
            method: InversionMethod::Talbot {
                nodes: 32,
                scale: 1.0,
            },
            target_rel_tol: 1e-10,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self.method {
            InversionMethod::Stehfest { order } => {
                if order % 2 != 0 || !(8..=20).contains(&order) {
                    return Err(Error::Domain(format!(
                        "Stehfest order must be even and in [8, 20], got {order}"
                    )));
                }
            }
            InversionMethod::Talbot { nodes, scale } => {
                if nodes < 16 {
                    return Err(Error::Domain(format!(
                        "Talbot needs at least 16 nodes, got {nodes}"
                    )));
                }
                if scale <= 0.0 {
                    return Err(Error::Domain("Talbot scale must be positive".into()));
                }
            }
        }
        Ok(())
    }
}

/// Gaver–Stehfest weights V_1..V_n for an even order n.
///
/// Each inner term is a ratio of factorials with all-positive summands, so
/// the weights themselves carry full f64 accuracy; the alternating outer sum
/// is what limits the attainable precision (~7 digits at order 16).
pub fn stehfest_weights(order: usize) -> Vec<f64> {
    let half = order / 2;
    let mut fact = vec![1.0_f64; 2 * order + 1];
    for i in 1..fact.len() {
        fact[i] = fact[i - 1] * i as f64;
    }
    let mut weights = Vec::with_capacity(order);
    for i in 1..=order {
        let mut sum = 0.0;
        let lo = i.div_ceil(2);
        let hi = i.min(half);
        for k in lo..=hi {
            sum += (k as f64).powi(half as i32) * fact[2 * k]
                / (fact[half - k] * fact[k] * fact[k - 1] * fact[i - k] * fact[2 * k - i]);
        }
        let sign = if (half + i) % 2 == 0 { 1.0 } else { -1.0 };
        weights.push(sign * sum);
    }
    weights
}

/// Invert a Laplace transform known on the positive real axis, assuming the
/// original is completely monotone (or at least smooth and nonoscillatory).
pub fn invert_cm<F: Fn(f64) -> f64>(transform: F, t: f64, cfg: &InversionConfig) -> Result<f64> {
    cfg.validate()?;
    if t <= 0.0 {
        return Err(Error::Domain(format!("inversion requires t > 0, got {t}")));
    }
    let order = match cfg.method {
        InversionMethod::Stehfest { order } => order,
        InversionMethod::Talbot { .. } => {
            return Err(Error::Unsupported(
                "a real-valued transform cannot be evaluated on the Talbot contour; \
                 use invert_talbot with a complex-capable map"
                    .into(),
            ))
        }
    };
    let weights = stehfest_weights(order);
    let a = LN_2 / t;
    let mut sum = 0.0;
    for (k, w) in weights.iter().enumerate() {
        let v = transform((k as f64 + 1.0) * a);
        if !v.is_finite() {
            return Err(Error::InversionFailed(format!(
                "transform returned {v} at p = {:.3e}",
                (k as f64 + 1.0) * a
            )));
        }
        sum += w * v;
    }
    let out = a * sum;
    if !out.is_finite() {
        return Err(Error::InversionFailed(
            "catastrophic cancellation in the Stehfest sum".into(),
        ));
    }
    Ok(out)
}

/// Fixed-Talbot inversion for transforms analytic on the cut plane
/// C \ (−∞, 0].
pub fn invert_talbot<F: Fn(Complex64) -> Complex64>(
    transform: F,
    t: f64,
    cfg: &InversionConfig,
) -> Result<f64> {
    if t <= 0.0 {
        return Err(Error::Domain(format!("inversion requires t > 0, got {t}")));
    }
    let (nodes, scale) = match cfg.method {
        InversionMethod::Talbot { nodes, scale } => (nodes, scale),
        InversionMethod::Stehfest { .. } => (32, 1.0),
    };
    if nodes < 16 {
        return Err(Error::Domain(format!(
            "Talbot needs at least 16 nodes, got {nodes}"
        )));
    }
    let m = nodes as f64;
    let r = scale * 2.0 * m / (5.0 * t);
    // θ = 0 endpoint: s = r, σ-factor reduces to 1/2.
    let f0 = transform(Complex64::new(r, 0.0));
    if !f0.re.is_finite() || !f0.im.is_finite() {
        return Err(Error::InversionFailed("contour node evaluation failed".into()));
    }
    let mut sum = 0.5 * f0.re * (r * t).exp();
    for k in 1..nodes {
        let theta = k as f64 * PI / m;
        let cot = theta.cos() / theta.sin();
        let s = Complex64::new(r * theta * cot, r * theta);
        let sigma = theta + (theta * cot - 1.0) * cot;
        let fv = transform(s);
        if !fv.re.is_finite() || !fv.im.is_finite() {
            return Err(Error::InversionFailed(format!(
                "contour node evaluation failed at θ = {theta:.3}"
            )));
        }
        let term = ((s * t).exp() * fv * Complex64::new(1.0, sigma)).re;
        sum += term;
    }
    let out = r / m * sum;
    if !out.is_finite() {
        return Err(Error::InversionFailed("non-finite Talbot sum".into()));
    }
    Ok(out)
}

/// Forward transform ∫₀^∞ e^(−pt) f(t) dt by adaptive quadrature.
///
/// The head [0, 1] is integrated under the substitution t = u^m with m chosen
/// from the estimated power behavior of f near zero, which turns an
/// integrable singularity t^(−γ), γ < 1 into a smooth integrand. The tail is
/// summed over geometric panels until the exponential factor exhausts it.
pub fn forward_laplace<F: Fn(f64) -> f64>(f: F, p: f64, rel_tol: f64) -> Result<f64> {
    if p <= 0.0 {
        return Err(Error::Domain(format!(
            "forward transform requires p > 0, got {p}"
        )));
    }
    let gamma_hat = estimate_singularity_order(&f)?;
    let m = if gamma_hat <= 0.0 {
        1
    } else {
        ((2.5 / (1.0 - gamma_hat)).ceil() as i32).clamp(1, 64)
    };
    let head = quad::adaptive(
        &|u: f64| {
            let t = u.powi(m);
            (-p * t).exp() * f(t) * m as f64 * u.powi(m - 1)
        },
        0.0,
        1.0,
        rel_tol * 0.5,
    )?;

    let mut acc = head;
    let mut a = 1.0_f64;
    for _ in 0..64 {
        let b = 2.0 * a;
        let panel = quad::adaptive(&|t: f64| (-p * t).exp() * f(t), a, b, rel_tol)?;
        acc += panel;
        let exhausted = panel.abs() < 1e-16 * acc.abs().max(1e-300);
        if exhausted && p * a > 40.0 {
            break;
        }
        // Even before the hard cutoff, stop once panels are decaying and
        // contribute nothing at the requested tolerance.
        if exhausted && panel.abs() < rel_tol * 1e-3 * acc.abs() {
            break;
        }
        a = b;
    }
    if !acc.is_finite() {
        return Err(Error::QuadratureFailed("non-finite forward transform".into()));
    }
    Ok(acc)
}

/// Forward transform of a sampled function: the piecewise-linear interpolant
/// is integrated against e^(−pt) in closed form cell by cell. Below the first
/// grid point the local power behavior is extrapolated; beyond the last grid
/// point the function is treated as zero.
pub fn forward_laplace_sampled(sf: &SampledFunction, p: f64) -> Result<f64> {
    if p <= 0.0 {
        return Err(Error::Domain(format!(
            "forward transform requires p > 0, got {p}"
        )));
    }
    let grid = sf.grid();
    let values = sf.values();
    let mut acc = 0.0;
    for j in 0..grid.len() - 1 {
        let (a, b) = (grid[j], grid[j + 1]);
        let (va, vb) = (values[j], values[j + 1]);
        let slope = (vb - va) / (b - a);
        // ∫ e^(−pt)(va + slope (t−a)) dt with antiderivative
        // −e^(−pt) ((va + slope (t−a))/p + slope/p²)
        let anti = |t: f64, v: f64| -(-p * t).exp() * (v / p + slope / (p * p));
        acc += anti(b, vb) - anti(a, va);
    }
    // Head extrapolation, c t^(−γ) fit through the first two samples.
    let t0 = grid[0];
    if t0 > 0.0 && values[0] > 0.0 && values[1] > 0.0 {
        let g = -(values[1] / values[0]).ln() / (grid[1] / grid[0]).ln();
        if g >= 1.0 {
            return Err(Error::NonIntegrable(format!(
                "sampled head behaves like t^(−{g:.3})"
            )));
        }
        if g > 0.0 {
            let c = values[0] * t0.powf(g);
            // two-term expansion of ∫₀^(t0) e^(−pt) c t^(−γ) dt
            acc += c * (t0.powf(1.0 - g) / (1.0 - g) - p * t0.powf(2.0 - g) / (2.0 - g));
        } else {
            acc += values[0] * t0 * (-0.5 * p * t0).exp();
        }
    }
    Ok(acc)
}

/// Probe f near zero and estimate γ in f(t) ~ t^(−γ). Errors out when the
/// probe indicates a nonintegrable (γ ≥ 1) singularity.
fn estimate_singularity_order<F: Fn(f64) -> f64>(f: &F) -> Result<f64> {
    let mut gamma_hat: f64 = 0.0;
    for eps in [1e-7, 1e-10] {
        let f1 = f(eps);
        let f2 = f(2.0 * eps);
        if !f1.is_finite() || !f2.is_finite() {
            return Err(Error::Domain(format!(
                "integrand not finite near 0 (f({eps:.0e}) = {f1})"
            )));
        }
        if f1 > 0.0 && f2 > 0.0 {
            gamma_hat = (f1 / f2).ln() / std::f64::consts::LN_2;
        }
        if gamma_hat < 0.98 {
            break;
        }
    }
    if gamma_hat >= 0.995 {
        return Err(Error::NonIntegrable(format!(
            "integrand behaves like t^(−{gamma_hat:.3}) near 0"
        )));
    }
    Ok(gamma_hat.clamp(-5.0, 0.99))
}
