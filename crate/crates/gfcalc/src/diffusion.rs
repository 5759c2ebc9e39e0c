//! Fundamental solution of the kernel-heat equation 𝔻w = Δw by
//! subordination, and the Laplace-domain solution contract.
//!
//! Everything hangs off the operational-time mixing kernel G(s, t), whose
//! Laplace transform in t is g(s, p) = 𝒦(p) e^(−s p𝒦(p)): for admissible
//! kernels G(s, ·) ≥ 0 and ∫₀^∞ G(s, t) ds = 1, so
//!
//!   Z(t, x) = ∫₀^∞ (4πs)^(−n/2) e^(−|x|²/4s) G(s, t) ds
//!
//! is a probability density in x. The same object has a closed Laplace form
//! Z̃(p, x) ∝ 𝒦(p) (p𝒦(p))^((n/2−1)/2) K_(n/2−1)(|x|√(p𝒦(p))) through the
//! modified Bessel function; the two routes are kept separate and their
//! agreement is part of the verification surface. Z̃ is the fundamental
//! solution of −Δv + p𝒦(p) v = 0, which is what the residual check of the
//! Laplace-domain solution contract measures.

use crate::error::{Error, Result};
use crate::kernel::{require_admissible, KernelSpec};
use crate::laplace::{self, InversionConfig};
use crate::par;
use crate::quad;
use crate::sampled::SampledFunction;
use crate::special::bessel_k;
use serde::Serialize;
use std::f64::consts::PI;

/// g(s, p) = 𝒦(p) e^(−s·p𝒦(p)), the Laplace transform (in t) of G(s, ·).
/// The exponent is guarded: anything below −700 underflows to 0.
pub fn subordination_kernel_lt(spec: &KernelSpec, s: f64, p: f64) -> Result<f64> {
    if s < 0.0 {
        return Err(Error::Domain(format!("operational time must be >= 0, got {s}")));
    }
    let k = spec.laplace(p)?;
    let expo = -s * p * k;
    if expo < -700.0 {
        return Ok(0.0);
    }
    Ok(k * expo.exp())
}

/// G(s, t): inverse Laplace transform of p ↦ g(s, p) at t. For the power
/// kernel this is the density of the inverse stable subordinator.
pub fn subordination_kernel(spec: &KernelSpec, s: f64, t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::Domain(format!("subordination kernel requires t > 0, got {t}")));
    }
    if s < 0.0 {
        return Err(Error::Domain(format!("operational time must be >= 0, got {s}")));
    }
    laplace::invert_cm(
        |p| subordination_kernel_lt(spec, s, p).unwrap_or(f64::NAN),
        t,
        &InversionConfig::default(),
    )
}

/// G sampled on an (s, t) product grid, with the two structural invariants
/// checked at build time: nonnegativity and unit mass in s for each t.
#[derive(Debug, Clone)]
pub struct SubordinationProfile {
    pub spec: KernelSpec,
    pub s_grid: Vec<f64>,
    pub t_grid: Vec<f64>,
    /// row-major: g_values[it][is] = G(s_grid[is], t_grid[it])
    pub g_values: Vec<Vec<f64>>,
    /// ∫ G(s, t) ds per t row, for the mass diagnostic
    pub row_mass: Vec<f64>,
}

impl SubordinationProfile {
    pub fn build(spec: &KernelSpec, s_grid: Vec<f64>, t_grid: Vec<f64>) -> Result<Self> {
        require_admissible(spec)?;
        if s_grid.len() < 2 || t_grid.is_empty() {
            return Err(Error::Grid("subordination profile needs s and t grids".into()));
        }
        let rows: Vec<Vec<f64>> = par::map_slice(&t_grid, |&t| -> Result<Vec<f64>> {
            s_grid
                .iter()
                .map(|&s| subordination_kernel(spec, s, t))
                .collect()
        })
        .into_iter()
        .collect::<Result<_>>()?;
        let mut row_mass = Vec::with_capacity(t_grid.len());
        for row in &rows {
            if row.iter().any(|&g| g < -1e-8) {
                return Err(Error::InversionFailed(
                    "negative subordination kernel value beyond tolerance".into(),
                ));
            }
            row_mass.push(trapezoid(&s_grid, row));
        }
        Ok(SubordinationProfile {
            spec: spec.clone(),
            s_grid,
            t_grid,
            g_values: rows,
            row_mass,
        })
    }
}

fn trapezoid(x: &[f64], y: &[f64]) -> f64 {
    x.windows(2)
        .zip(y.windows(2))
        .map(|(xs, ys)| 0.5 * (ys[0] + ys[1]) * (xs[1] - xs[0]))
        .sum()
}

/// Z̃(p, x) by the closed Bessel form. The n = 1 and n = 3 cases reduce to
/// exponentials (half-integer order); n = 2 evaluates K₀ numerically.
/// x = 0 is rejected: the kernel is defined away from the source point.
pub fn heat_kernel_lt(spec: &KernelSpec, p: f64, x: f64, n: usize) -> Result<f64> {
    let r = x.abs();
    if r == 0.0 {
        return Err(Error::Domain("heat kernel transform is singular at x = 0".into()));
    }
    check_dimension(n)?;
    let k = spec.laplace(p)?;
    let q = p * k; // p𝒦(p)
    let z = r * q.sqrt();
    let guarded_exp = |e: f64| if e < -700.0 { 0.0 } else { e.exp() };
    Ok(match n {
        1 => 0.5 * k / q.sqrt() * guarded_exp(-z),
        2 => k / (2.0 * PI) * bessel_k(0.0, z)?,
        3 => k * guarded_exp(-z) / (4.0 * PI * r),
        _ => unreachable!(),
    })
}

/// Z̃(p, x) by the operational-time integral
/// 𝒦(p) ∫₀^∞ (4πs)^(−n/2) e^(−|x|²/4s − s·p𝒦(p)) ds, evaluated in log
/// coordinates around the saddle. Kept deliberately independent of the
/// Bessel route; the pair forms the two-route agreement check.
pub fn heat_kernel_lt_subordination(spec: &KernelSpec, p: f64, x: f64, n: usize) -> Result<f64> {
    let r = x.abs();
    if r == 0.0 {
        return Err(Error::Domain("heat kernel transform is singular at x = 0".into()));
    }
    check_dimension(n)?;
    let k = spec.laplace(p)?;
    let q = p * k;
    let a = 0.25 * r * r;
    // in v = ln s the exponent is −z cosh(v − v*) with z = |x|√q
    let v_star = 0.5 * (a / q).ln();
    let z = r * q.sqrt();
    let width = {
        let c = (z + 45.0) / z;
        (c + (c * c - 1.0).sqrt()).ln() + 3.0
    };
    let integrand = |v: f64| {
        let s = v.exp();
        let expo = -a / s - q * s;
        if expo < -740.0 {
            return 0.0;
        }
        (4.0 * PI * s).powf(-(n as f64) / 2.0) * expo.exp() * s
    };
    let mut total = 0.0;
    let mut lo = v_star - width;
    let hi = v_star + width;
    while lo < hi {
        let up = (lo + 1.0).min(hi);
        total += quad::adaptive(&integrand, lo, up, 1e-11)?;
        lo = up;
    }
    Ok(k * total)
}

fn check_dimension(n: usize) -> Result<()> {
    if !(1..=3).contains(&n) {
        return Err(Error::Unsupported(format!(
            "closed-form verification covers n in {{1, 2, 3}}, got {n}"
        )));
    }
    Ok(())
}

/// Which construction of Z(t, ·) to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ZRoute {
    /// mixture of Gaussians over operational time weighted by G(s, t)
    Subordination,
    /// Laplace inversion of the closed Bessel form of Z̃(·, x)
    LaplaceClosedForm,
}

/// A fundamental-solution profile at fixed t, optionally with the solution
/// w = Z ∗ w₀ of the Cauchy problem.
#[derive(Debug, Clone)]
pub struct HeatSolution {
    pub spec: KernelSpec,
    pub dimension: usize,
    pub t: f64,
    pub x_grid: Vec<f64>,
    pub z_values: Vec<f64>,
    pub w_values: Option<Vec<f64>>,
    pub w0: Option<SampledFunction>,
    /// Hölder data (C, γ) of w₀, supplied or estimated from samples
    pub holder: Option<(f64, f64)>,
    pub diagnostics: HeatDiagnostics,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct HeatDiagnostics {
    /// ∫ Z dx over the computed profile (n = 1), or the radial mass for n ≥ 2
    pub mass: f64,
    pub min_z: f64,
    pub notes: Vec<String>,
}

/// Build Z(t, ·) on `x_grid`. For n = 1 the value at x = 0 is finite and
/// computed by its limit rule; for n ≥ 2 the grid must exclude 0 (the grid
/// is then read as radii).
pub fn heat_kernel_profile(
    spec: &KernelSpec,
    t: f64,
    x_grid: &[f64],
    n: usize,
    route: ZRoute,
) -> Result<HeatSolution> {
    if !(t > 0.0) {
        return Err(Error::Domain(format!("profile requires t > 0, got {t}")));
    }
    check_dimension(n)?;
    if x_grid.is_empty() {
        return Err(Error::Grid("empty x grid".into()));
    }
    if n >= 2 && x_grid.iter().any(|&x| x == 0.0) {
        return Err(Error::Domain(
            "x = 0 is a singular point of the kernel for n >= 2".into(),
        ));
    }
    require_admissible(spec)?;

    let z_values = match route {
        ZRoute::LaplaceClosedForm => par::map_slice(x_grid, |&x| -> Result<f64> {
            if n == 1 && x == 0.0 {
                // finite limit: invert 𝒦/(2√(p𝒦)) directly
                return laplace::invert_cm(
                    |p| {
                        spec.laplace(p)
                            .map(|k| 0.5 * k / (p * k).sqrt())
                            .unwrap_or(f64::NAN)
                    },
                    t,
                    &InversionConfig::default(),
                );
            }
            laplace::invert_cm(
                |p| heat_kernel_lt(spec, p, x, n).unwrap_or(f64::NAN),
                t,
                &InversionConfig::default(),
            )
        })
        .into_iter()
        .collect::<Result<Vec<f64>>>()?,
        ZRoute::Subordination => {
            let table = GTable::build(spec, t)?;
            par::map_slice(x_grid, |&x| table.gaussian_mixture(x, n))
                .into_iter()
                .collect::<Result<Vec<f64>>>()?
        }
    };

    let mass = profile_mass(x_grid, &z_values, n);
    let min_z = z_values.iter().cloned().fold(f64::INFINITY, f64::min);
    let mut notes = Vec::new();
    if (mass - 1.0).abs() > 1e-3 {
        notes.push(format!(
            "profile mass {mass:.6} deviates from 1; widen or refine the x grid"
        ));
    }
    Ok(HeatSolution {
        spec: spec.clone(),
        dimension: n,
        t,
        x_grid: x_grid.to_vec(),
        z_values,
        w_values: None,
        w0: None,
        holder: None,
        diagnostics: HeatDiagnostics { mass, min_z, notes },
    })
}

/// Quadrature mass of a sampled profile: plain trapezoid for n = 1, radial
/// surface-weighted trapezoid for n ∈ {2, 3}.
fn profile_mass(x_grid: &[f64], z: &[f64], n: usize) -> f64 {
    match n {
        1 => trapezoid(x_grid, z),
        2 => {
            let weighted: Vec<f64> = x_grid
                .iter()
                .zip(z)
                .map(|(&r, &v)| 2.0 * PI * r.abs() * v)
                .collect();
            trapezoid(x_grid, &weighted)
        }
        _ => {
            let weighted: Vec<f64> = x_grid
                .iter()
                .zip(z)
                .map(|(&r, &v)| 4.0 * PI * r * r * v)
                .collect();
            trapezoid(x_grid, &weighted)
        }
    }
}

/// G(·, t) tabulated on a log grid in operational time, sized by probing the
/// decay of G so that the Gaussian factor and G jointly capture the mass.
struct GTable {
    v_grid: Vec<f64>, // ln s
    g: Vec<f64>,
    dv: f64,
}

impl GTable {
    const PTS_PER_DECADE: usize = 14;

    fn build(spec: &KernelSpec, t: f64) -> Result<Self> {
        // probe outward from a dimensional seed until G decays away
        let mut s_peak = t.max(1e-6);
        let mut g_peak = subordination_kernel(spec, s_peak, t)?;
        for _ in 0..80 {
            let cand = s_peak * 0.5;
            let g = subordination_kernel(spec, cand, t)?;
            if g > g_peak {
                s_peak = cand;
                g_peak = g;
            } else {
                break;
            }
        }
        let mut s_hi = s_peak;
        for _ in 0..200 {
            s_hi *= 1.6;
            let g_hi = subordination_kernel(spec, s_hi, t)?;
            if g_hi < 1e-12 * g_peak.max(1e-300) {
                break;
            }
        }
        let s_lo = s_hi * 1e-14;
        let decades = (s_hi / s_lo).log10();
        let npts = (decades * Self::PTS_PER_DECADE as f64).ceil() as usize + 1;
        let v_lo = s_lo.ln();
        let v_hi = s_hi.ln();
        let dv = (v_hi - v_lo) / (npts - 1) as f64;
        let v_grid: Vec<f64> = (0..npts).map(|i| v_lo + dv * i as f64).collect();
        let g: Vec<f64> = par::map_slice(&v_grid, |&v| subordination_kernel(spec, v.exp(), t))
            .into_iter()
            .collect::<Result<_>>()?;
        if g.iter().any(|&x| x < -1e-8) {
            return Err(Error::InversionFailed(
                "negative subordination kernel value beyond tolerance".into(),
            ));
        }
        Ok(GTable { v_grid, g, dv })
    }

    /// ∫ (4πs)^(−n/2) e^(−x²/4s) G(s, t) ds as a trapezoid sum in ln s; the
    /// integrand is analytic and decays at both ends, where the uniform
    /// trapezoid rule converges root-exponentially.
    fn gaussian_mixture(&self, x: f64, n: usize) -> Result<f64> {
        let a = 0.25 * x * x;
        let mut acc = 0.0;
        let last = self.v_grid.len() - 1;
        for (i, (&v, &g)) in self.v_grid.iter().zip(&self.g).enumerate() {
            if g <= 0.0 {
                continue;
            }
            let s = v.exp();
            let expo = -a / s;
            if expo < -700.0 {
                continue;
            }
            let val = (4.0 * PI * s).powf(-(n as f64) / 2.0) * expo.exp() * g * s;
            let w = if i == 0 || i == last { 0.5 } else { 1.0 };
            acc += w * val;
        }
        Ok(acc * self.dv)
    }
}

/// Solve the Cauchy problem for bounded Hölder initial data by convolution
/// with Z(t, ·). One-dimensional: the initial datum is a sampled profile on
/// a line. Outside its grid w₀ is extended by its edge values; if the tail
/// mass of Z reaching beyond the grid exceeds 1e−3 while the edges are not
/// flat, the grid does not cover the effective support and the call errors.
pub fn solve_heat(
    spec: &KernelSpec,
    w0: &SampledFunction,
    t: f64,
    n: usize,
    holder: Option<(f64, f64)>,
) -> Result<HeatSolution> {
    if n != 1 {
        return Err(Error::Unsupported(
            "initial-value convolution is implemented for n = 1; use heat_kernel_profile for the kernel itself"
                .into(),
        ));
    }
    if !(t > 0.0) {
        return Err(Error::Domain(format!("solve_heat requires t > 0, got {t}")));
    }
    require_admissible(spec)?;

    let holder = holder.or_else(|| estimate_holder(w0));
    let grid = w0.grid();
    let vals = w0.values();
    let span = grid[grid.len() - 1] - grid[0];

    let ztab = ZTable::build(spec, t, span)?;
    let total_mass = ztab.mass();
    let mut notes = Vec::new();
    if (total_mass - 1.0).abs() > 1e-3 {
        notes.push(format!("kernel mass {total_mass:.6} deviates from 1"));
    }

    let edge_flat = (vals[1] - vals[0]).abs() <= 1e-9 * (1.0 + vals[0].abs())
        && (vals[vals.len() - 1] - vals[vals.len() - 2]).abs()
            <= 1e-9 * (1.0 + vals[vals.len() - 1].abs());

    let w_values: Vec<f64> = par::map_slice(grid, |&x| -> Result<f64> {
        let mut acc = 0.0;
        for j in 0..grid.len() - 1 {
            let (a, b) = (grid[j], grid[j + 1]);
            let (va, vb) = (vals[j], vals[j + 1]);
            let q = (vb - va) / (b - a);
            const GX: [f64; 4] = [
                -0.861_136_311_594_052_6,
                -0.339_981_043_584_856_3,
                0.339_981_043_584_856_3,
                0.861_136_311_594_052_6,
            ];
            const GW: [f64; 4] = [
                0.347_854_845_137_453_9,
                0.652_145_154_862_546,
                0.652_145_154_862_546,
                0.347_854_845_137_453_9,
            ];
            let half = 0.5 * (b - a);
            let mid = 0.5 * (a + b);
            for (gx, gw) in GX.iter().zip(&GW) {
                let xi = mid + half * gx;
                acc += gw * half * ztab.eval((x - xi).abs()) * (va + q * (xi - a));
            }
        }
        // constant extension beyond the grid through the cumulative tail
        let left_tail = ztab.tail_beyond(x - grid[0]);
        let right_tail = ztab.tail_beyond(grid[grid.len() - 1] - x);
        let tail_mass = left_tail + right_tail;
        if tail_mass > 1e-3 && !edge_flat {
            return Err(Error::MassDeficiency { deficit: tail_mass });
        }
        acc += vals[0] * left_tail + vals[vals.len() - 1] * right_tail;
        Ok(acc)
    })
    .into_iter()
    .collect::<Result<_>>()?;

    let z_values: Vec<f64> = grid.iter().map(|&x| ztab.eval(x.abs())).collect();
    let mass = profile_mass(grid, &z_values, 1);
    let min_z = z_values.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(HeatSolution {
        spec: spec.clone(),
        dimension: 1,
        t,
        x_grid: grid.to_vec(),
        z_values,
        w_values: Some(w_values),
        w0: Some(w0.clone()),
        holder,
        diagnostics: HeatDiagnostics {
            mass,
            min_z,
            notes,
        },
    })
}

/// Hölder data estimated from samples: γ = 1 with C the largest slope.
fn estimate_holder(w0: &SampledFunction) -> Option<(f64, f64)> {
    let g = w0.grid();
    let v = w0.values();
    let c = g
        .windows(2)
        .zip(v.windows(2))
        .map(|(gs, vs)| ((vs[1] - vs[0]) / (gs[1] - gs[0])).abs())
        .fold(0.0_f64, f64::max);
    Some((c, 1.0))
}

/// Dense even profile of Z(t, |x|) with its cumulative integral, for fast
/// interpolation inside convolutions.
struct ZTable {
    r: Vec<f64>,
    z: Vec<f64>,
    cum: Vec<f64>, // ∫₀^r Z
}

impl ZTable {
    fn build(spec: &KernelSpec, t: f64, min_span: f64) -> Result<Self> {
        let mut radius = min_span.max(1.0);
        for _ in 0..60 {
            let z_edge = z_point(spec, t, radius)?;
            let z_mid = z_point(spec, t, radius * 0.25)?.max(1e-300);
            if z_edge < 1e-10 * z_mid {
                break;
            }
            radius *= 1.5;
        }
        let npts = 2400;
        let r: Vec<f64> = (0..npts)
            .map(|i| radius * i as f64 / (npts - 1) as f64)
            .collect();
        let z: Vec<f64> = par::map_slice(&r, |&ri| {
            if ri == 0.0 {
                laplace::invert_cm(
                    |p| {
                        spec.laplace(p)
                            .map(|k| 0.5 * k / (p * k).sqrt())
                            .unwrap_or(f64::NAN)
                    },
                    t,
                    &InversionConfig::default(),
                )
            } else {
                z_point(spec, t, ri)
            }
        })
        .into_iter()
        .collect::<Result<_>>()?;
        let mut cum = vec![0.0; npts];
        for i in 1..npts {
            cum[i] = cum[i - 1] + 0.5 * (z[i] + z[i - 1]) * (r[i] - r[i - 1]);
        }
        Ok(ZTable { r, z, cum })
    }

    fn eval(&self, r: f64) -> f64 {
        let n = self.r.len();
        if r >= self.r[n - 1] {
            return 0.0;
        }
        let h = self.r[1] - self.r[0];
        let j = ((r / h) as usize).min(n - 2);
        let w = (r - self.r[j]) / h;
        self.z[j] * (1.0 - w) + self.z[j + 1] * w
    }

    fn mass(&self) -> f64 {
        2.0 * self.cum[self.cum.len() - 1]
    }

    /// one-sided mass of Z beyond distance d: ∫_d^∞ Z
    fn tail_beyond(&self, d: f64) -> f64 {
        let end = self.cum[self.cum.len() - 1];
        if d <= 0.0 {
            return end;
        }
        let n = self.r.len();
        if d >= self.r[n - 1] {
            return 0.0;
        }
        let h = self.r[1] - self.r[0];
        let j = ((d / h) as usize).min(n - 2);
        let w = (d - self.r[j]) / h;
        let c = self.cum[j] * (1.0 - w) + self.cum[j + 1] * w;
        (end - c).max(0.0)
    }
}

/// Z(t, x) for n = 1 by Laplace inversion of the closed form.
fn z_point(spec: &KernelSpec, t: f64, r: f64) -> Result<f64> {
    laplace::invert_cm(
        |p| heat_kernel_lt(spec, p, r, 1).unwrap_or(f64::NAN),
        t,
        &InversionConfig::default(),
    )
}

/// Residual of the Laplace-domain solution contract on a uniform grid:
/// max over interior points of |Δ_h w̃ − p𝒦 w̃ + 𝒦 w₀| / max|𝒦 w₀|, with
/// w̃(p, x) = ∫ Z̃(p, x−ξ) w₀(ξ) dξ computed exactly per cell (the n = 1
/// kernel is an exponential, so piecewise-linear w₀ integrates in closed
/// form) and constant extension of w₀ beyond its grid.
pub fn lt_solution_residual(
    spec: &KernelSpec,
    w0: &SampledFunction,
    p: f64,
    eval_window: (f64, f64),
) -> Result<f64> {
    require_admissible(spec)?;
    if !(p > 0.0) {
        return Err(Error::Domain(format!("residual check requires p > 0, got {p}")));
    }
    let grid = w0.grid();
    if !w0.is_uniform() {
        return Err(Error::Grid(
            "the second-difference residual needs a uniform grid".into(),
        ));
    }
    let h = grid[1] - grid[0];
    let k = spec.laplace(p)?;
    let c = (p * k).sqrt();

    let idx: Vec<usize> = (0..grid.len())
        .filter(|&i| grid[i] >= eval_window.0 - h * 1.5 && grid[i] <= eval_window.1 + h * 1.5)
        .collect();
    if idx.len() < 3 {
        return Err(Error::Grid(
            "evaluation window holds fewer than 3 grid points".into(),
        ));
    }
    let w_tilde: Vec<f64> = par::map_slice(&idx, |&i| w_tilde_exact(w0, grid[i], k, c))
        .into_iter()
        .collect::<Result<_>>()?;

    let norm = w0
        .values()
        .iter()
        .map(|v| (k * v).abs())
        .fold(0.0_f64, f64::max)
        .max(1e-300);
    let mut worst = 0.0_f64;
    for j in 1..idx.len() - 1 {
        if idx[j] != idx[j - 1] + 1 || idx[j + 1] != idx[j] + 1 {
            continue;
        }
        let x = grid[idx[j]];
        if x < eval_window.0 || x > eval_window.1 {
            continue;
        }
        let lap = (w_tilde[j + 1] - 2.0 * w_tilde[j] + w_tilde[j - 1]) / (h * h);
        let resid = lap - p * k * w_tilde[j] + k * w0.values()[idx[j]];
        worst = worst.max(resid.abs());
    }
    Ok(worst / norm)
}

/// ∫ Z̃(p, x−ξ) w₀(ξ) dξ with Z̃(p, u) = A e^(−c|u|), A = 𝒦/(2c), by exact
/// integration of the piecewise-linear w₀ against the exponential, plus the
/// constant-extension tails.
fn w_tilde_exact(w0: &SampledFunction, x: f64, k: f64, c: f64) -> Result<f64> {
    let grid = w0.grid();
    let vals = w0.values();
    let a_coef = 0.5 * k / c;
    let mut acc = 0.0;

    for j in 0..grid.len() - 1 {
        let (a, b) = (grid[j], grid[j + 1]);
        let (va, vb) = (vals[j], vals[j + 1]);
        let q = (vb - va) / (b - a);
        let cell = |lo: f64, hi: f64, vlo: f64| -> f64 {
            if hi <= x {
                // weight e^(−c(x−ξ)); antiderivative e^(−c(x−ξ)) (v(ξ)/c − q/c²)
                let anti = |xi: f64, v: f64| (-c * (x - xi)).exp() * (v / c - q / (c * c));
                anti(hi, vlo + q * (hi - lo)) - anti(lo, vlo)
            } else {
                // weight e^(−c(ξ−x)); antiderivative −e^(−c(ξ−x)) (v(ξ)/c + q/c²)
                let anti = |xi: f64, v: f64| -(-c * (xi - x)).exp() * (v / c + q / (c * c));
                anti(hi, vlo + q * (hi - lo)) - anti(lo, vlo)
            }
        };
        if b <= x || a >= x {
            acc += cell(a, b, va);
        } else {
            let vx = va + q * (x - a);
            acc += cell(a, x, va) + cell(x, b, vx);
        }
    }
    let d_left = x - grid[0];
    let d_right = grid[grid.len() - 1] - x;
    acc += vals[0] * (-c * d_left).exp() / c;
    acc += vals[vals.len() - 1] * (-c * d_right).exp() / c;
    Ok(a_coef * acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampled::lin_grid;

    fn caputo_half() -> KernelSpec {
        KernelSpec::caputo(0.5).unwrap()
    }

    #[test]
    fn g_lt_values() {
        let spec = caputo_half();
        // s = 0 → 𝒦(p)
        let v = subordination_kernel_lt(&spec, 0.0, 2.0).unwrap();
        assert!((v - spec.laplace(2.0).unwrap()).abs() < 1e-15);
        // 𝒦(1) = 1, p𝒦 = 1: g(1, 1) = e^(−1)
        let v = subordination_kernel_lt(&spec, 1.0, 1.0).unwrap();
        assert!((v - (-1.0_f64).exp()).abs() < 1e-15);
        // overflow guard
        assert_eq!(subordination_kernel_lt(&spec, 1e6, 100.0).unwrap(), 0.0);
    }

    #[test]
    fn g_lt_integrates_to_one_over_p() {
        // ∫₀^∞ g(s, p) ds = 1/p
        let spec = caputo_half();
        let p = 2.0;
        let v = quad::adaptive(
            &|s: f64| subordination_kernel_lt(&spec, s, p).unwrap(),
            0.0,
            200.0,
            1e-10,
        )
        .unwrap();
        assert!((v - 0.5).abs() < 1e-8, "got {v}");
    }

    #[test]
    fn g_profile_matches_m_wright_oracle() {
        // For the half-order kernel G(s, t) = t^(−α) M_α(s t^(−α)) with
        // M_{1/2}(z) = e^(−z²/4)/√π; mpmath values at t = 1.
        let spec = caputo_half();
        let cases = [
            (1.0, 0.439_391_289_467_722_4),
            (0.3, 0.551_637_063_325_411_9),
            (2.0, 0.207_553_748_710_297_35),
        ];
        for (s, expect) in cases {
            let g = subordination_kernel(&spec, s, 1.0).unwrap();
            assert!((g - expect).abs() < 1e-7, "s={s}: {g} vs {expect}");
        }
        // s = 0 recovers k(t)
        let g0 = subordination_kernel(&spec, 0.0, 1.0).unwrap();
        assert!((g0 - 0.564_189_583_547_756_3).abs() < 1e-7);
    }

    #[test]
    fn subordination_profile_invariants() {
        let spec = caputo_half();
        let s_grid: Vec<f64> = (0..240).map(|i| 1e-6 + 14.0 * i as f64 / 239.0).collect();
        let profile = SubordinationProfile::build(&spec, s_grid, vec![0.5, 1.0, 2.0]).unwrap();
        assert!(profile
            .g_values
            .iter()
            .all(|row| row.iter().all(|&g| g >= -1e-8)));
        for (&t, &m) in profile.t_grid.iter().zip(&profile.row_mass) {
            assert!((m - 1.0).abs() < 5e-3, "t={t}: mass {m}");
        }
    }

    #[test]
    fn heat_kernel_lt_closed_forms() {
        let spec = caputo_half();
        // n=1, p=1, x=1: 𝒦=1, p𝒦=1 → e^(−1)/2
        let v = heat_kernel_lt(&spec, 1.0, 1.0, 1).unwrap();
        assert!((v - 0.5 * (-1.0_f64).exp()).abs() < 1e-14);
        // symmetric in x
        assert_eq!(
            heat_kernel_lt(&spec, 1.0, -1.0, 1).unwrap(),
            heat_kernel_lt(&spec, 1.0, 1.0, 1).unwrap()
        );
        assert!(heat_kernel_lt(&spec, 1.0, 0.0, 1).is_err());
        assert!(heat_kernel_lt(&spec, 1.0, 1.0, 4).is_err());
    }

    #[test]
    fn heat_kernel_lt_two_routes_agree() {
        let spec = caputo_half();
        for n in 1..=3usize {
            for &(p, x) in &[(0.5, 0.3), (1.0, 1.0), (2.0, 0.7), (1.0, 3.0), (0.7, 1.7)] {
                let closed = heat_kernel_lt(&spec, p, x, n).unwrap();
                let sub = heat_kernel_lt_subordination(&spec, p, x, n).unwrap();
                assert!(
                    ((closed - sub) / closed).abs() < 1e-6,
                    "n={n}, p={p}, x={x}: {closed} vs {sub}"
                );
            }
        }
    }

    #[test]
    fn heat_kernel_lt_mass_one_over_p() {
        // ∫ Z̃(p, x) dx over the line = 1/p (n = 1)
        let spec = caputo_half();
        let p = 2.0;
        let v = quad::adaptive(
            &|x: f64| heat_kernel_lt(&spec, p, x, 1).unwrap(),
            1e-9,
            60.0,
            1e-10,
        )
        .unwrap();
        assert!((2.0 * v - 0.5).abs() < 1e-6, "got {}", 2.0 * v);
    }

    #[test]
    fn lt_ode_structure_second_difference() {
        // Δ Z̃ = p𝒦 Z̃ away from x = 0 (n = 1), h = 1e−3
        let spec = caputo_half();
        let p = 1.3;
        let k = spec.laplace(p).unwrap();
        let h = 1e-3;
        for &x in &[0.5, 1.0, 2.5] {
            let zm = heat_kernel_lt(&spec, p, x - h, 1).unwrap();
            let z0 = heat_kernel_lt(&spec, p, x, 1).unwrap();
            let zp = heat_kernel_lt(&spec, p, x + h, 1).unwrap();
            let lap = (zp - 2.0 * z0 + zm) / (h * h);
            assert!(((lap - p * k * z0) / (p * k * z0)).abs() < 1e-4, "x={x}");
        }
    }

    #[test]
    fn profile_routes_and_mass() {
        let spec = caputo_half();
        let grid = lin_grid(-12.0, 12.0, 481);
        let a = heat_kernel_profile(&spec, 1.0, &grid, 1, ZRoute::Subordination).unwrap();
        let b = heat_kernel_profile(&spec, 1.0, &grid, 1, ZRoute::LaplaceClosedForm).unwrap();
        assert!(
            (a.diagnostics.mass - 1.0).abs() < 1e-3,
            "mass {}",
            a.diagnostics.mass
        );
        assert!(a.diagnostics.min_z >= -1e-8);
        // symmetry Z(t, x) = Z(t, −x)
        let n = grid.len();
        for i in 0..n / 2 {
            let (l, r) = (a.z_values[i], a.z_values[n - 1 - i]);
            assert!((l - r).abs() < 1e-9 * (1.0 + r.abs()), "i={i}");
        }
        // route agreement away from the far tail
        for i in 0..n {
            if a.z_values[i] > 1e-4 {
                let rel = (a.z_values[i] - b.z_values[i]) / b.z_values[i];
                assert!(
                    rel.abs() < 1e-3,
                    "x={}: {} vs {}",
                    grid[i],
                    a.z_values[i],
                    b.z_values[i]
                );
            }
        }
    }

    #[test]
    fn profile_matches_m_wright_self_similar_form() {
        // n=1, α=1/2: Z(1, 1) = (1/2) M_{1/4}(1); mpmath 0.19166770828534177
        let spec = caputo_half();
        let grid = vec![1.0];
        let z = heat_kernel_profile(&spec, 1.0, &grid, 1, ZRoute::Subordination).unwrap();
        assert!(
            (z.z_values[0] - 0.191_667_708_285_341_77).abs() < 1e-4,
            "got {}",
            z.z_values[0]
        );
        let z2 = heat_kernel_profile(&spec, 1.0, &grid, 1, ZRoute::LaplaceClosedForm).unwrap();
        assert!(
            (z2.z_values[0] - 0.191_667_708_285_341_77).abs() < 1e-6,
            "got {}",
            z2.z_values[0]
        );
    }

    #[test]
    fn profile_rejects_origin_for_higher_dimensions() {
        let spec = caputo_half();
        assert!(
            heat_kernel_profile(&spec, 1.0, &[0.0, 1.0], 2, ZRoute::LaplaceClosedForm).is_err()
        );
        assert!(
            heat_kernel_profile(&spec, 1.0, &[0.5, 1.0], 2, ZRoute::LaplaceClosedForm).is_ok()
        );
    }

    #[test]
    fn radial_mass_n2_n3() {
        let spec = caputo_half();
        for n in [2usize, 3] {
            let grid = lin_grid(5e-3, 14.0, 1401);
            let prof =
                heat_kernel_profile(&spec, 1.0, &grid, n, ZRoute::LaplaceClosedForm).unwrap();
            assert!(
                (prof.diagnostics.mass - 1.0).abs() < 2e-3,
                "n={n}: mass {}",
                prof.diagnostics.mass
            );
        }
    }

    #[test]
    fn box_kernel_refused() {
        let b = KernelSpec::box_kernel();
        assert!(matches!(
            heat_kernel_profile(&b, 1.0, &[1.0], 1, ZRoute::LaplaceClosedForm),
            Err(Error::NotAdmissible { .. })
        ));
        let w0 = SampledFunction::from_fn(|_| 1.0, lin_grid(-1.0, 1.0, 11)).unwrap();
        assert!(matches!(
            lt_solution_residual(&b, &w0, 1.0, (-0.5, 0.5)),
            Err(Error::NotAdmissible { .. })
        ));
    }

    #[test]
    fn solve_heat_preserves_constants() {
        let spec = caputo_half();
        let w0 = SampledFunction::from_fn(|_| 1.0, lin_grid(-30.0, 30.0, 601)).unwrap();
        let sol = solve_heat(&spec, &w0, 1.0, 1, None).unwrap();
        let w = sol.w_values.unwrap();
        for (i, &x) in sol.x_grid.iter().enumerate() {
            if x.abs() < 5.0 {
                assert!((w[i] - 1.0).abs() < 2e-3, "x={x}: {}", w[i]);
            }
        }
    }

    #[test]
    fn solve_heat_step_symmetry_and_max_principle() {
        let spec = caputo_half();
        let w0 = SampledFunction::from_fn(
            |x: f64| 0.5 * (1.0 + (2.0 * x).tanh()),
            lin_grid(-25.0, 25.0, 1001),
        )
        .unwrap();
        let sol = solve_heat(&spec, &w0, 0.5, 1, None).unwrap();
        let w = sol.w_values.unwrap();
        let mid = sol.x_grid.iter().position(|&x| x.abs() < 1e-12).unwrap();
        assert!((w[mid] - 0.5).abs() < 1e-3, "w(0) = {}", w[mid]);
        for (i, &x) in sol.x_grid.iter().enumerate() {
            if x.abs() < 10.0 {
                assert!(w[i] >= -1e-6 && w[i] <= 1.0 + 1e-6, "x={x}: {}", w[i]);
            }
        }
    }

    #[test]
    fn solve_heat_converges_to_initial_datum() {
        let spec = caputo_half();
        let w0 =
            SampledFunction::from_fn(|x: f64| (-x * x).exp(), lin_grid(-22.0, 22.0, 881)).unwrap();
        let dev = |t: f64| {
            let sol = solve_heat(&spec, &w0, t, 1, None).unwrap();
            let w = sol.w_values.unwrap();
            sol.x_grid
                .iter()
                .enumerate()
                .filter(|(_, x)| x.abs() < 8.0)
                .map(|(i, _)| (w[i] - w0.values()[i]).abs())
                .fold(0.0_f64, f64::max)
        };
        let d_small = dev(1e-4);
        let d_large = dev(1e-2);
        assert!(d_small < d_large, "{d_small} vs {d_large}");
    }

    #[test]
    fn solve_heat_reports_mass_deficiency() {
        let spec = caputo_half();
        // non-flat data on a grid far narrower than the kernel support
        let w0 = SampledFunction::from_fn(|x| x, lin_grid(-0.5, 0.5, 21)).unwrap();
        assert!(matches!(
            solve_heat(&spec, &w0, 1.0, 1, None),
            Err(Error::MassDeficiency { .. })
        ));
    }

    #[test]
    fn solve_heat_rejects_higher_dimensions() {
        let spec = caputo_half();
        let w0 = SampledFunction::from_fn(|_| 1.0, lin_grid(-1.0, 1.0, 11)).unwrap();
        assert!(matches!(
            solve_heat(&spec, &w0, 1.0, 2, None),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn lt_residual_constant_datum_machine_zero() {
        let spec = caputo_half();
        let w0 = SampledFunction::from_fn(|_| 1.0, lin_grid(-30.0, 30.0, 6001)).unwrap();
        for &p in &[0.5, 1.0, 2.0] {
            let r = lt_solution_residual(&spec, &w0, p, (-2.0, 2.0)).unwrap();
            assert!(r < 1e-6, "p={p}: residual {r:e}");
        }
    }

    #[test]
    fn lt_residual_gaussian_datum() {
        let spec = caputo_half();
        let w0 =
            SampledFunction::from_fn(|x: f64| (-x * x).exp(), lin_grid(-30.0, 30.0, 6001)).unwrap();
        for &p in &[0.5, 1.0, 2.0] {
            let r = lt_solution_residual(&spec, &w0, p, (-2.0, 2.0)).unwrap();
            assert!(r < 5e-3, "p={p}: residual {r:e}");
        }
    }

    #[test]
    fn w_tilde_exact_matches_quadrature() {
        let spec = caputo_half();
        let p = 1.0;
        let k = spec.laplace(p).unwrap();
        let c = (p * k).sqrt();
        let w0 =
            SampledFunction::from_fn(|x: f64| (-0.5 * x * x).exp(), lin_grid(-20.0, 20.0, 801))
                .unwrap();
        let x = 0.4;
        let exact = w_tilde_exact(&w0, x, k, c).unwrap();
        let a_coef = 0.5 * k / c;
        let numeric = quad::adaptive(
            &|xi: f64| a_coef * (-c * (x - xi).abs()).exp() * w0.eval(xi),
            -20.0,
            20.0,
            1e-11,
        )
        .unwrap();
        assert!((exact - numeric).abs() < 1e-8, "{exact} vs {numeric}");
    }
}
