//! Memory-kernel specifications, built-in families, and the numerical
//! certification of the structural hypotheses that gate the whole calculus.
//!
//! A kernel k is handled through its Laplace transform 𝒦(p). The admissible
//! class consists of kernels whose 𝒦 is a Stieltjes function with
//! 𝒦(p) → ∞, p𝒦(p) → 0 as p → 0 and 𝒦(p) → 0, p𝒦(p) → ∞ as p → ∞; those
//! limits make p ↦ p𝒦(p) a complete Bernstein function and guarantee a
//! Sonine partner ϰ with (k ∗ ϰ) ≡ 1. The box kernel is kept as the
//! canonical negative control: its transform is bounded at 0, so it fails
//! the certification on the limit probes.

use crate::error::{Error, Result};
use crate::laplace::{self, InversionConfig};
use crate::quad;
use crate::sampled::{log_grid, SampledFunction};
use crate::special::gamma;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::sync::Arc;

type RealMap = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Kernel family. The built-ins carry closed-form Laplace transforms; custom
/// kernels are defined by a user-supplied transform (positive real axis only)
/// with an optional closed form for k itself.
#[derive(Clone)]
pub enum KernelFamily {
    /// k(t) = t^(−α)/Γ(1−α), 𝒦(p) = p^(α−1), 0 < α < 1.
    Caputo { alpha: f64 },
    /// Finite mixture Σ wᵢ t^(−αᵢ)/Γ(1−αᵢ); 𝒦(p) = Σ wᵢ p^(αᵢ−1).
    DistributedOrder { atoms: Vec<(f64, f64)> },
    /// 𝒦(p) = p^(−1) log(1 + p^β), 0 < β < 1. No closed form for k.
    LogBernstein { beta: f64 },
    /// k = indicator of [0, 1]; 𝒦(p) = (1 − e^(−p))/p. Fails admissibility.
    Box,
    /// User-supplied transform p ↦ 𝒦(p) > 0 and optional closed form k(t).
    Custom {
        laplace: RealMap,
        closed_k: Option<RealMap>,
    },
}

#[derive(Clone)]
pub struct KernelSpec {
    pub family: KernelFamily,
    pub label: String,
}

impl fmt::Debug for KernelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "KernelSpec({})", self.label)
    }
}

impl PartialEq for KernelSpec {
    fn eq(&self, other: &Self) -> bool {
        use KernelFamily::*;
        match (&self.family, &other.family) {
            (Caputo { alpha: a }, Caputo { alpha: b }) => a == b,
            (DistributedOrder { atoms: a }, DistributedOrder { atoms: b }) => a == b,
            (LogBernstein { beta: a }, LogBernstein { beta: b }) => a == b,
            (Box, Box) => true,
            (Custom { laplace: a, .. }, Custom { laplace: b, .. }) => Arc::ptr_eq(a, b),
            _ => false,
        }
    }
}

impl KernelSpec {
    pub fn caputo(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::Domain(format!(
                "caputo order must lie in (0,1), got {alpha}"
            )));
        }
        Ok(KernelSpec {
            family: KernelFamily::Caputo { alpha },
            label: format!("caputo({alpha})"),
        })
    }

    pub fn distributed(atoms: Vec<(f64, f64)>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::Domain("distributed order needs at least one atom".into()));
        }
        for &(a, w) in &atoms {
            if !(a > 0.0 && a < 1.0) {
                return Err(Error::Domain(format!(
                    "distributed-order exponent must lie in (0,1), got {a}"
                )));
            }
            if !(w > 0.0) {
                return Err(Error::Domain(format!(
                    "distributed-order weight must be positive, got {w}"
                )));
            }
        }
        let label = format!(
            "distributed({})",
            atoms
                .iter()
                .map(|(a, w)| format!("{a}@{w}"))
                .collect::<Vec<_>>()
                .join(",")
        );
        Ok(KernelSpec {
            family: KernelFamily::DistributedOrder { atoms },
            label,
        })
    }

    pub fn log_bernstein(beta: f64) -> Result<Self> {
        if !(beta > 0.0 && beta < 1.0) {
            return Err(Error::Domain(format!(
                "log-kernel exponent must lie in (0,1), got {beta}"
            )));
        }
        Ok(KernelSpec {
            family: KernelFamily::LogBernstein { beta },
            label: format!("log_bernstein({beta})"),
        })
    }

    pub fn box_kernel() -> Self {
        KernelSpec {
            family: KernelFamily::Box,
            label: "box".into(),
        }
    }

    pub fn custom<F>(label: &str, laplace: F, closed_k: Option<RealMap>) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        KernelSpec {
            family: KernelFamily::Custom {
                laplace: Arc::new(laplace),
                closed_k,
            },
            label: label.to_string(),
        }
    }

    /// 𝒦(p) for p > 0.
    pub fn laplace(&self, p: f64) -> Result<f64> {
        if !(p > 0.0) || !p.is_finite() {
            return Err(Error::Domain(format!("laplace transform requires p > 0, got {p}")));
        }
        let v = match &self.family {
            KernelFamily::Caputo { alpha } => p.powf(alpha - 1.0),
            KernelFamily::DistributedOrder { atoms } => {
                atoms.iter().map(|&(a, w)| w * p.powf(a - 1.0)).sum()
            }
            KernelFamily::LogBernstein { beta } => p.powf(*beta).ln_1p() / p,
            // 1 − e^(−p) via exp_m1 to keep accuracy at small p
            KernelFamily::Box => -(-p).exp_m1() / p,
            KernelFamily::Custom { laplace, .. } => {
                let v = laplace(p);
                if !v.is_finite() || v <= 0.0 {
                    return Err(Error::Domain(format!(
                        "custom transform returned {v} at p = {p:.6e}; must be finite and positive"
                    )));
                }
                v
            }
        };
        Ok(v)
    }

    /// d𝒦/dp. Closed form for built-ins, central finite difference for
    /// custom kernels.
    pub fn laplace_deriv(&self, p: f64) -> Result<f64> {
        if !(p > 0.0) {
            return Err(Error::Domain(format!("derivative requires p > 0, got {p}")));
        }
        let v = match &self.family {
            KernelFamily::Caputo { alpha } => (alpha - 1.0) * p.powf(alpha - 2.0),
            KernelFamily::DistributedOrder { atoms } => atoms
                .iter()
                .map(|&(a, w)| w * (a - 1.0) * p.powf(a - 2.0))
                .sum(),
            KernelFamily::LogBernstein { beta } => {
                let pb = p.powf(*beta);
                -pb.ln_1p() / (p * p) + beta * pb / (p * p * (1.0 + pb))
            }
            KernelFamily::Box => {
                let em = (-p).exp();
                em / p - -(-p).exp_m1() / (p * p)
            }
            KernelFamily::Custom { .. } => {
                let h = p * 1e-6;
                (self.laplace(p + h)? - self.laplace(p - h)?) / (2.0 * h)
            }
        };
        Ok(v)
    }

    /// Analytic continuation of 𝒦 to the cut plane, for contour inversion.
    /// `None` for custom kernels, which are defined on the real axis only.
    pub fn laplace_complex(&self, p: Complex64) -> Option<Complex64> {
        match &self.family {
            KernelFamily::Caputo { alpha } => Some(p.powf(alpha - 1.0)),
            KernelFamily::DistributedOrder { atoms } => Some(
                atoms
                    .iter()
                    .map(|&(a, w)| p.powf(a - 1.0) * w)
                    .sum::<Complex64>(),
            ),
            KernelFamily::LogBernstein { beta } => {
                Some((p.powf(*beta) + 1.0).ln() / p)
            }
            KernelFamily::Box => Some((-(-p).exp() + 1.0) / p),
            KernelFamily::Custom { .. } => None,
        }
    }

    pub fn has_closed_k(&self) -> bool {
        !matches!(
            self.family,
            KernelFamily::LogBernstein { .. } | KernelFamily::Custom { closed_k: None, .. }
        )
    }

    /// k(t) for t > 0: closed form when available, otherwise numerical
    /// inversion of 𝒦. Inversion failures surface as `InversionFailed`,
    /// distinct from domain errors.
    pub fn eval_k(&self, t: f64) -> Result<f64> {
        if !(t > 0.0) {
            return Err(Error::Domain(format!("eval_k requires t > 0, got {t}")));
        }
        match &self.family {
            KernelFamily::Caputo { alpha } => Ok(t.powf(-alpha) / gamma(1.0 - alpha)),
            KernelFamily::DistributedOrder { atoms } => Ok(atoms
                .iter()
                .map(|&(a, w)| w * t.powf(-a) / gamma(1.0 - a))
                .sum()),
            KernelFamily::Box => Ok(if t <= 1.0 { 1.0 } else { 0.0 }),
            KernelFamily::Custom {
                closed_k: Some(k), ..
            } => Ok(k(t)),
            _ => laplace::invert_cm(
                |p| self.laplace(p).unwrap_or(f64::NAN),
                t,
                &InversionConfig::default(),
            ),
        }
    }

    /// Cumulative kernel ∫₀^t k(s) ds. For kernels without a closed form the
    /// Laplace route 𝒦(p)/p is inverted; the target is a Bernstein function,
    /// smooth and monotone, which the Stehfest rule handles well.
    pub fn cum_k(&self, t: f64) -> Result<f64> {
        if t == 0.0 {
            return Ok(0.0);
        }
        if !(t > 0.0) {
            return Err(Error::Domain(format!("cum_k requires t >= 0, got {t}")));
        }
        match &self.family {
            KernelFamily::Caputo { alpha } => Ok(t.powf(1.0 - alpha) / gamma(2.0 - alpha)),
            KernelFamily::DistributedOrder { atoms } => Ok(atoms
                .iter()
                .map(|&(a, w)| w * t.powf(1.0 - a) / gamma(2.0 - a))
                .sum()),
            KernelFamily::Box => Ok(t.min(1.0)),
            _ => laplace::invert_cm(
                |p| self.laplace(p).map(|v| v / p).unwrap_or(f64::NAN),
                t,
                &InversionConfig::default(),
            ),
        }
    }

    /// First moment ∫₀^t s k(s) ds, via −d𝒦/dp /p in the Laplace domain when
    /// no closed form exists.
    pub fn cum_tk(&self, t: f64) -> Result<f64> {
        if t == 0.0 {
            return Ok(0.0);
        }
        if !(t > 0.0) {
            return Err(Error::Domain(format!("cum_tk requires t >= 0, got {t}")));
        }
        match &self.family {
            KernelFamily::Caputo { alpha } => {
                Ok(t.powf(2.0 - alpha) / ((2.0 - alpha) * gamma(1.0 - alpha)))
            }
            KernelFamily::DistributedOrder { atoms } => Ok(atoms
                .iter()
                .map(|&(a, w)| w * t.powf(2.0 - a) / ((2.0 - a) * gamma(1.0 - a)))
                .sum()),
            KernelFamily::Box => {
                let x = t.min(1.0);
                Ok(0.5 * x * x)
            }
            _ => laplace::invert_cm(
                |p| self.laplace_deriv(p).map(|d| -d / p).unwrap_or(f64::NAN),
                t,
                &InversionConfig::default(),
            ),
        }
    }
}

// --- serialization -----------------------------------------------------

/// Wire form of a kernel spec. Custom kernels serialize as an opaque label
/// and cannot be deserialized (they are in-process only).
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum KernelWire {
    Caputo { alpha: f64 },
    Distributed { atoms: Vec<AtomWire> },
    LogBernstein { beta: f64 },
    Box,
    Custom { label: String },
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct AtomWire {
    pub alpha: f64,
    pub weight: f64,
}

impl KernelSpec {
    pub fn to_wire(&self) -> KernelWire {
        match &self.family {
            KernelFamily::Caputo { alpha } => KernelWire::Caputo { alpha: *alpha },
            KernelFamily::DistributedOrder { atoms } => KernelWire::Distributed {
                atoms: atoms
                    .iter()
                    .map(|&(alpha, weight)| AtomWire { alpha, weight })
                    .collect(),
            },
            KernelFamily::LogBernstein { beta } => KernelWire::LogBernstein { beta: *beta },
            KernelFamily::Box => KernelWire::Box,
            KernelFamily::Custom { .. } => KernelWire::Custom {
                label: self.label.clone(),
            },
        }
    }

    pub fn from_wire(wire: KernelWire) -> Result<Self> {
        match wire {
            KernelWire::Caputo { alpha } => KernelSpec::caputo(alpha),
            KernelWire::Distributed { atoms } => {
                KernelSpec::distributed(atoms.into_iter().map(|a| (a.alpha, a.weight)).collect())
            }
            KernelWire::LogBernstein { beta } => KernelSpec::log_bernstein(beta),
            KernelWire::Box => Ok(KernelSpec::box_kernel()),
            KernelWire::Custom { label } => Err(Error::Unsupported(format!(
                "custom kernel `{label}` cannot be deserialized; custom kernels are in-process only"
            ))),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_wire()).expect("kernel wire form serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let wire: KernelWire =
            serde_json::from_str(s).map_err(|e| Error::Domain(format!("kernel json: {e}")))?;
        KernelSpec::from_wire(wire)
    }
}

impl Serialize for KernelSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_wire().serialize(s)
    }
}

// --- admissibility certification ----------------------------------------

/// One recorded probe of the certification run.
#[derive(Debug, Clone, Serialize)]
pub struct Probe {
    pub quantity: String,
    pub p: f64,
    pub observed: f64,
    pub expected_trend: String,
    pub ok: bool,
}

/// Structured pass/fail evidence for the admissibility probes and the
/// complete-monotonicity certificate.
#[derive(Debug, Clone, Serialize)]
pub struct ConditionReport {
    pub kernel: KernelWire,
    pub passed: bool,
    pub probes: Vec<Probe>,
    pub monotonicity_orders_checked: usize,
    pub notes: String,
}

impl ConditionReport {
    pub fn first_failure(&self) -> Option<&Probe> {
        self.probes.iter().find(|p| !p.ok)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct AdmissibilityOptions {
    /// Probe decades: p ranges over [10^lo, 10^hi].
    pub decade_lo: i32,
    pub decade_hi: i32,
    pub points_per_decade: usize,
    /// Number of decades at each end used for the limit trend tests.
    pub trend_decades: usize,
    /// Required cumulative growth/decay factor over the trend window.
    pub trend_factor: f64,
    /// Divided-difference order for the complete-monotonicity certificate.
    pub cm_order: usize,
    pub cm_slack: f64,
}

impl Default for AdmissibilityOptions {
    fn default() -> Self {
        AdmissibilityOptions {
            decade_lo: -8,
            decade_hi: 8,
            points_per_decade: 4,
            trend_decades: 4,
            trend_factor: 1.5,
            cm_order: 6,
            cm_slack: 1e-9,
        }
    }
}

/// Certify the structural hypotheses on 𝒦 numerically:
/// 𝒦 → ∞ (p → 0), 𝒦 → 0 (p → ∞), p𝒦 → 0 (p → 0), p𝒦 → ∞ (p → ∞),
/// plus a complete-monotonicity certificate for p ↦ 𝒦(p) on the probe grid.
/// Failures are encoded in the report, never raised.
pub fn check_admissibility(spec: &KernelSpec) -> ConditionReport {
    check_admissibility_with(spec, &AdmissibilityOptions::default())
}

pub fn check_admissibility_with(spec: &KernelSpec, opt: &AdmissibilityOptions) -> ConditionReport {
    let n = ((opt.decade_hi - opt.decade_lo) as usize) * opt.points_per_decade + 1;
    let ps = log_grid(
        10f64.powi(opt.decade_lo),
        10f64.powi(opt.decade_hi),
        n.max(2),
    );
    let mut probes = Vec::new();
    let mut notes = vec![format!(
        "limit probes use trend tests over {} decades at each end of [1e{}, 1e{}]; \
         decade ranges are a pragmatic choice, not a convergence-rate bound",
        opt.trend_decades, opt.decade_lo, opt.decade_hi
    )];

    let values: Vec<Option<f64>> = ps.iter().map(|&p| spec.laplace(p).ok()).collect();
    if values.iter().any(|v| v.is_none()) {
        probes.push(Probe {
            quantity: "K(p)".into(),
            p: f64::NAN,
            observed: f64::NAN,
            expected_trend: "finite and positive on the probe grid".into(),
            ok: false,
        });
        return ConditionReport {
            kernel: spec.to_wire(),
            passed: false,
            probes,
            monotonicity_orders_checked: 0,
            notes: notes.join("; "),
        };
    }
    let kv: Vec<f64> = values.into_iter().map(Option::unwrap).collect();
    let pkv: Vec<f64> = ps.iter().zip(&kv).map(|(&p, &k)| p * k).collect();

    // positivity
    let pos_ok = kv.iter().all(|&v| v > 0.0);
    probes.push(Probe {
        quantity: "K(p)".into(),
        p: ps[0],
        observed: kv[0],
        expected_trend: "positive on the probe grid".into(),
        ok: pos_ok,
    });

    let w = opt.trend_decades * opt.points_per_decade;
    // 𝒦 increases without bound as p ↓ 0: examine the lowest window, ordered
    // from larger p down to p_min.
    let low: Vec<f64> = kv[..=w].iter().rev().cloned().collect();
    let grow_small = trend_to_infinity(&low, opt.trend_factor);
    probes.push(Probe {
        quantity: "K(p), p->0".into(),
        p: ps[0],
        observed: kv[0] / kv[w],
        expected_trend: format!("grows by >= {} over {} decades", opt.trend_factor, opt.trend_decades),
        ok: grow_small,
    });

    // 𝒦 → 0 as p → ∞
    let hi: Vec<f64> = kv[kv.len() - 1 - w..].to_vec();
    let decay_large = trend_to_zero(&hi, opt.trend_factor);
    probes.push(Probe {
        quantity: "K(p), p->inf".into(),
        p: *ps.last().unwrap(),
        observed: kv[kv.len() - 1] / kv[kv.len() - 1 - w],
        expected_trend: format!("decays by >= {} over {} decades", opt.trend_factor, opt.trend_decades),
        ok: decay_large,
    });

    // p𝒦 → 0 as p → 0
    let low_pk: Vec<f64> = pkv[..=w].to_vec();
    let pk_small = trend_to_zero(&low_pk.iter().rev().cloned().collect::<Vec<_>>(), opt.trend_factor);
    probes.push(Probe {
        quantity: "p*K(p), p->0".into(),
        p: ps[0],
        observed: pkv[0] / pkv[w],
        expected_trend: format!("decays by >= {} over {} decades", opt.trend_factor, opt.trend_decades),
        ok: pk_small,
    });

    // p𝒦 → ∞ as p → ∞
    let hi_pk: Vec<f64> = pkv[pkv.len() - 1 - w..].to_vec();
    let pk_large = trend_to_infinity(&hi_pk, opt.trend_factor);
    probes.push(Probe {
        quantity: "p*K(p), p->inf".into(),
        p: *ps.last().unwrap(),
        observed: pkv[pkv.len() - 1] / pkv[pkv.len() - 1 - w],
        expected_trend: format!("grows by >= {} over {} decades", opt.trend_factor, opt.trend_decades),
        ok: pk_large,
    });

    // complete monotonicity of 𝒦 on the probe grid
    let cm_ok = match SampledFunction::new(
        ps.clone(),
        kv.clone(),
        crate::sampled::Interpolation::PiecewiseLinear,
    ) {
        Ok(sf) => complete_monotonicity_check(
            &sf,
            opt.cm_order,
            CmOptions {
                rel_slack: opt.cm_slack,
            },
        )
        .unwrap_or(false),
        Err(_) => false,
    };
    probes.push(Probe {
        quantity: "K(p) complete monotonicity".into(),
        p: 1.0,
        observed: if cm_ok { 1.0 } else { 0.0 },
        expected_trend: format!("alternating divided differences to order {}", opt.cm_order),
        ok: cm_ok,
    });
    if !cm_ok {
        notes.push("complete-monotonicity certificate failed".into());
    }

    let passed = probes.iter().all(|p| p.ok);
    ConditionReport {
        kernel: spec.to_wire(),
        passed,
        probes,
        monotonicity_orders_checked: opt.cm_order,
        notes: notes.join("; "),
    }
}

/// Monotone growth with a cumulative factor: rejects bounded functions whose
/// probe values flatten out.
fn trend_to_infinity(vals: &[f64], factor: f64) -> bool {
    let strict = vals.windows(2).all(|w| w[1] > w[0] * (1.0 + 1e-4));
    let cum = vals[vals.len() - 1] / vals[0];
    strict && cum >= factor
}

fn trend_to_zero(vals: &[f64], factor: f64) -> bool {
    let strict = vals.windows(2).all(|w| w[1] < w[0] * (1.0 - 1e-4));
    let cum = vals[0] / vals[vals.len() - 1];
    strict && cum >= factor
}

/// Internal gate used by the constructions that require an admissible kernel.
pub(crate) fn require_admissible(spec: &KernelSpec) -> Result<()> {
    let report = check_admissibility(spec);
    if report.passed {
        Ok(())
    } else {
        let reason = report
            .first_failure()
            .map(|p| format!("probe `{}` failed ({} expected)", p.quantity, p.expected_trend))
            .unwrap_or_else(|| "certification failed".into());
        Err(Error::NotAdmissible {
            label: spec.label.clone(),
            reason,
        })
    }
}

// --- complete monotonicity on sampled data -------------------------------

#[derive(Debug, Clone, Copy)]
pub struct CmOptions {
    /// Sign slack relative to the magnitude of each divided-difference
    /// stencil, covering rounding and sampling noise in the input.
    pub rel_slack: f64,
}

impl Default for CmOptions {
    fn default() -> Self {
        CmOptions { rel_slack: 1e-9 }
    }
}

/// Certify (−1)^n f^(n) ≥ 0 for n = 0..=max_order on sampled data, using
/// divided differences: order-k differences of a completely monotone
/// function carry the sign (−1)^k. Each comparison allows a slack
/// proportional to the stencil's magnitude Σ|wⱼ||fⱼ|, which is the natural
/// scale of rounding noise in the difference.
pub fn complete_monotonicity_check(
    f: &SampledFunction,
    max_order: usize,
    opt: CmOptions,
) -> Result<bool> {
    if max_order > 8 {
        return Err(Error::Domain(format!(
            "divided-difference certification supports order <= 8, got {max_order}"
        )));
    }
    let grid = f.grid();
    let n = grid.len();
    if n < max_order + 1 {
        return Err(Error::Grid(format!(
            "grid of {n} points is too short for order {max_order}"
        )));
    }
    let mut dd: Vec<f64> = f.values().to_vec();
    let mut mag: Vec<f64> = f.values().iter().map(|v| v.abs()).collect();
    for order in 0..=max_order {
        let sign = if order % 2 == 0 { 1.0 } else { -1.0 };
        let m = n - order;
        for i in 0..m {
            if sign * dd[i] < -opt.rel_slack * mag[i] {
                return Ok(false);
            }
        }
        if order == max_order {
            break;
        }
        for i in 0..m - 1 {
            let dx = grid[i + order + 1] - grid[i];
            dd[i] = (dd[i + 1] - dd[i]) / dx;
            mag[i] = (mag[i + 1] + mag[i]) / dx;
        }
    }
    Ok(true)
}

// --- conjugate of a complete Bernstein function ---------------------------

/// Result of probing f*(λ) = λ / f(λ): the conjugate value at the requested
/// point and its limiting constants a* = f*(0+), b* = lim f*(λ)/λ.
#[derive(Debug, Clone, Copy)]
pub struct CbfConjugate {
    pub value: f64,
    pub a_star: f64,
    pub b_star: f64,
}

/// Evaluate the conjugate f*(λ) = λ/f(λ) of a (complete) Bernstein function
/// together with its limit constants, probed at the ends of the standard
/// 16-decade window.
pub fn cbf_conjugate<F: Fn(f64) -> f64>(f: F, probe: f64) -> Result<CbfConjugate> {
    if !(probe > 0.0) {
        return Err(Error::Domain(format!("probe must be positive, got {probe}")));
    }
    let star = |l: f64| -> Result<f64> {
        let v = f(l);
        if !v.is_finite() || v == 0.0 {
            return Err(Error::Domain(format!("f vanishes or is not finite at λ = {l:.3e}")));
        }
        Ok(l / v)
    };
    Ok(CbfConjugate {
        value: star(probe)?,
        a_star: star(1e-8)?,
        b_star: star(1e8)? / 1e8,
    })
}

// --- Bernstein triples ----------------------------------------------------

/// Representation (a, b, measure) of a Bernstein function
/// f(λ) = a + bλ + ∫ (1 − e^(−λt)) μ(dt), with the measure carried as
/// finitely many atoms plus an optional sampled density on a log grid.
#[derive(Debug, Clone)]
pub struct BernsteinTriple {
    pub a: f64,
    pub b: f64,
    pub atoms: Vec<(f64, f64)>,
    pub density: Option<SampledFunction>,
}

impl BernsteinTriple {
    pub fn new(
        a: f64,
        b: f64,
        atoms: Vec<(f64, f64)>,
        density: Option<SampledFunction>,
    ) -> Result<Self> {
        if a < 0.0 || b < 0.0 {
            return Err(Error::Domain("triple constants must be nonnegative".into()));
        }
        for &(t, w) in &atoms {
            if !(t > 0.0 && w > 0.0) {
                return Err(Error::Domain(format!(
                    "atoms need positive location and mass, got ({t}, {w})"
                )));
            }
        }
        let triple = BernsteinTriple {
            a,
            b,
            atoms,
            density,
        };
        let probe = triple.levy_integrability();
        if !probe.is_finite() {
            return Err(Error::Domain(
                "Lévy integrability probe ∫ min(1,t) dμ diverges on the represented support".into(),
            ));
        }
        Ok(triple)
    }

    /// ∫ min(1, t) dμ over the represented support.
    pub fn levy_integrability(&self) -> f64 {
        let mut s: f64 = self.atoms.iter().map(|&(t, w)| t.min(1.0) * w).sum();
        if let Some(d) = &self.density {
            let g = d.grid();
            let v = d.values();
            for j in 0..g.len() - 1 {
                let mid = 0.5 * (g[j] + g[j + 1]);
                s += mid.min(1.0) * 0.5 * (v[j] + v[j + 1]) * (g[j + 1] - g[j]);
            }
        }
        s
    }

    /// f(λ) for the represented measure.
    pub fn eval(&self, lambda: f64) -> f64 {
        let mut s = self.a + self.b * lambda;
        for &(t, w) in &self.atoms {
            s += w * -(-lambda * t).exp_m1();
        }
        if let Some(d) = &self.density {
            let g = d.grid();
            let v = d.values();
            for j in 0..g.len() - 1 {
                let h = g[j + 1] - g[j];
                let f0 = -(-lambda * g[j]).exp_m1() * v[j];
                let f1 = -(-lambda * g[j + 1]).exp_m1() * v[j + 1];
                s += 0.5 * (f0 + f1) * h;
            }
        }
        s
    }
}

// --- misc numerical helpers shared with other modules ---------------------

/// ∫_a^b f(x) w(x) dx where w has the cumulative pair (M0, M1):
/// M0(x) = ∫₀^x w, M1(x) = ∫₀^x s w(s) ds, and f is taken piecewise linear
/// between the cell endpoints. Exact for linear f given exact moments.
pub(crate) fn weighted_panel<F, M0, M1>(f: F, m0: M0, m1: M1, a: f64, b: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
    M0: Fn(f64) -> Result<f64>,
    M1: Fn(f64) -> Result<f64>,
{
    let fa = f(a);
    let fb = f(b);
    let q = (fb - fa) / (b - a);
    let dm0 = m0(b)? - m0(a)?;
    let dm1 = m1(b)? - m1(a)?;
    Ok(fa * dm0 + q * (dm1 - a * dm0))
}

/// Fallback quadrature for custom kernels with a closed-form k but no usable
/// Laplace derivative: direct singularity-split integration of ∫ s^j k(s).
#[allow(dead_code)]
pub(crate) fn moment_by_quadrature(
    spec: &KernelSpec,
    j: u32,
    x: f64,
) -> Result<f64> {
    quad::adaptive(
        &|s: f64| s.powi(j as i32) * spec.eval_k(s).unwrap_or(f64::NAN),
        0.0,
        x,
        1e-9,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampled::Interpolation;

    #[test]
    fn caputo_laplace_closed_form() {
        let k = KernelSpec::caputo(0.5).unwrap();
        assert!((k.laplace(4.0).unwrap() - 0.5).abs() < 1e-15);
        assert!((k.laplace(1.0).unwrap() - 1.0).abs() < 1e-15);
        assert!(k.laplace(0.0).is_err());
        assert!(k.laplace(-1.0).is_err());
    }

    #[test]
    fn caputo_forward_quadrature_agreement() {
        // 𝒦(1) for α = 1/2 equals the forward transform of t^(−1/2)/Γ(1/2).
        let k = KernelSpec::caputo(0.5).unwrap();
        let q = laplace::forward_laplace(|t| k.eval_k(t).unwrap(), 1.0, 1e-9).unwrap();
        assert!((q - k.laplace(1.0).unwrap()).abs() < 1e-8, "got {q}");
    }

    #[test]
    fn box_laplace_bounded_at_zero() {
        let b = KernelSpec::box_kernel();
        // 𝒦(p) → 1 as p → 0: bounded, which is exactly why the box fails.
        let v = b.laplace(1e-12).unwrap();
        assert!((v - 1.0).abs() < 1e-9);
        assert!((b.eval_k(0.5).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(b.eval_k(2.0).unwrap(), 0.0);
    }

    #[test]
    fn caputo_eval_k_matches_gamma_oracle() {
        let k = KernelSpec::caputo(0.5).unwrap();
        assert!((k.eval_k(1.0).unwrap() - 0.564_189_583_547_756_3).abs() < 1e-13);
    }

    #[test]
    fn log_kernel_eval_by_inversion_decays() {
        let k = KernelSpec::log_bernstein(0.5).unwrap();
        let grid = log_grid(0.01, 1e4, 40);
        let vals: Vec<f64> = grid.iter().map(|&t| k.eval_k(t).unwrap()).collect();
        assert!(vals.windows(2).all(|w| w[1] < w[0]), "not monotone: {vals:?}");
        assert!(vals.last().unwrap() / vals[0] < 0.01);
    }

    #[test]
    fn log_kernel_forward_roundtrip_log2() {
        let k = KernelSpec::log_bernstein(0.5).unwrap();
        let q = laplace::forward_laplace(|t| k.eval_k(t).unwrap(), 1.0, 1e-8).unwrap();
        assert!((q - std::f64::consts::LN_2).abs() < 1e-5, "got {q}");
    }

    #[test]
    fn laplace_deriv_matches_finite_difference() {
        for spec in [
            KernelSpec::caputo(0.3).unwrap(),
            KernelSpec::log_bernstein(0.5).unwrap(),
            KernelSpec::box_kernel(),
            KernelSpec::distributed(vec![(0.3, 0.5), (0.8, 0.5)]).unwrap(),
        ] {
            for &p in &[0.1, 1.0, 7.0] {
                let h = p * 1e-6;
                let fd = (spec.laplace(p + h).unwrap() - spec.laplace(p - h).unwrap()) / (2.0 * h);
                let an = spec.laplace_deriv(p).unwrap();
                assert!(
                    (fd - an).abs() < 1e-6 * an.abs().max(1e-12),
                    "{}: p={p}, fd={fd}, an={an}",
                    spec.label
                );
            }
        }
    }

    #[test]
    fn admissibility_matrix() {
        for spec in [
            KernelSpec::caputo(0.3).unwrap(),
            KernelSpec::caputo(0.5).unwrap(),
            KernelSpec::caputo(0.7).unwrap(),
            KernelSpec::log_bernstein(0.5).unwrap(),
            KernelSpec::distributed(vec![(0.3, 0.5), (0.8, 0.5)]).unwrap(),
        ] {
            let rep = check_admissibility(&spec);
            assert!(rep.passed, "{} failed: {:?}", spec.label, rep.first_failure());
        }
        let rep = check_admissibility(&KernelSpec::box_kernel());
        assert!(!rep.passed);
        // the failure is on the limit probes, not on positivity
        assert!(rep.first_failure().unwrap().quantity.contains("p->"));
    }

    #[test]
    fn stieltjes_transform_nonincreasing() {
        for spec in [
            KernelSpec::caputo(0.5).unwrap(),
            KernelSpec::log_bernstein(0.5).unwrap(),
            KernelSpec::distributed(vec![(0.3, 0.5), (0.8, 0.5)]).unwrap(),
        ] {
            let ps = log_grid(1e-8, 1e8, 80);
            let vals: Vec<f64> = ps.iter().map(|&p| spec.laplace(p).unwrap()).collect();
            assert!(vals.iter().all(|&v| v > 0.0));
            assert!(vals.windows(2).all(|w| w[1] <= w[0]), "{}", spec.label);
        }
    }

    #[test]
    fn kernel_decays_at_infinity() {
        for spec in [
            KernelSpec::caputo(0.3).unwrap(),
            KernelSpec::caputo(0.5).unwrap(),
            KernelSpec::caputo(0.7).unwrap(),
            KernelSpec::log_bernstein(0.5).unwrap(),
            KernelSpec::distributed(vec![(0.3, 0.5), (0.8, 0.5)]).unwrap(),
        ] {
            let k1 = spec.eval_k(1.0).unwrap();
            let k4 = spec.eval_k(1e4).unwrap();
            assert!(k4 < k1 / 10.0, "{}: k(1e4)={k4}, k(1)={k1}", spec.label);
        }
    }

    #[test]
    fn roundtrip_forward_of_inverted_transform() {
        // forward_laplace(t ↦ k(t), p) recovers 𝒦(p) for every built-in.
        for spec in [
            KernelSpec::caputo(0.5).unwrap(),
            KernelSpec::distributed(vec![(0.3, 0.5), (0.8, 0.5)]).unwrap(),
            KernelSpec::log_bernstein(0.5).unwrap(),
        ] {
            for &p in &[0.5, 1.0, 2.0, 5.0] {
                let q = laplace::forward_laplace(|t| spec.eval_k(t).unwrap(), p, 1e-8).unwrap();
                let k = spec.laplace(p).unwrap();
                assert!(
                    ((q - k) / k).abs() < 1e-5,
                    "{} at p={p}: quadrature {q} vs closed {k}",
                    spec.label
                );
            }
        }
    }

    #[test]
    fn cm_check_exponential_and_sine() {
        let grid = log_grid(0.1, 10.0, 60);
        let e = SampledFunction::from_fn(|t| (-t).exp(), grid.clone()).unwrap();
        assert!(complete_monotonicity_check(&e, 6, CmOptions::default()).unwrap());
        let s = SampledFunction::from_fn(|t| t.sin() + 2.0, log_grid(0.1, 10.0, 60)).unwrap();
        assert!(!complete_monotonicity_check(&s, 2, CmOptions::default()).unwrap());
    }

    #[test]
    fn cm_check_errors() {
        let short = SampledFunction::from_fn(|t| t, vec![1.0, 2.0, 3.0]).unwrap();
        assert!(complete_monotonicity_check(&short, 6, CmOptions::default()).is_err());
        let f = SampledFunction::from_fn(|t| t, log_grid(1.0, 2.0, 12)).unwrap();
        assert!(complete_monotonicity_check(&f, 9, CmOptions::default()).is_err());
    }

    #[test]
    fn conjugate_of_sqrt_is_sqrt() {
        let c = cbf_conjugate(|l: f64| l.sqrt(), 4.0).unwrap();
        assert!((c.value - 2.0).abs() < 1e-12);
    }

    #[test]
    fn conjugate_constants() {
        // f with f(0+) = a > 0 forces a* = 0.
        let c = cbf_conjugate(|l: f64| 1.0 + l, 1.0).unwrap();
        assert!(c.a_star < 1e-6, "a* = {}", c.a_star);
        // f(λ) = λ𝒦(λ) for the half-order kernel: both conjugate constants vanish.
        let k = KernelSpec::caputo(0.5).unwrap();
        let c = cbf_conjugate(|l: f64| l * k.laplace(l).unwrap(), 1.0).unwrap();
        assert!(c.a_star.abs() < 1e-3, "a* = {}", c.a_star);
        assert!(c.b_star.abs() < 1e-3, "b* = {}", c.b_star);
        assert!((c.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn conjugate_rejects_vanishing() {
        assert!(cbf_conjugate(|_| 0.0, 1.0).is_err());
    }

    #[test]
    fn bernstein_triple_limits() {
        let triple = BernsteinTriple::new(0.25, 0.125, vec![(0.5, 1.0), (2.0, 3.0)], None).unwrap();
        assert!(triple.levy_integrability().is_finite());
        // a = f(0+)
        assert!((triple.eval(1e-9) - 0.25).abs() < 1e-7);
        // b = lim f(λ)/λ
        let big = 1e9;
        assert!((triple.eval(big) / big - 0.125).abs() < 1e-8);
    }

    #[test]
    fn bernstein_triple_rejects_bad_atoms() {
        assert!(BernsteinTriple::new(0.0, 0.0, vec![(-1.0, 1.0)], None).is_err());
        assert!(BernsteinTriple::new(-0.5, 0.0, vec![], None).is_err());
    }

    #[test]
    fn wire_round_trip_and_custom_rejection() {
        let spec = KernelSpec::distributed(vec![(0.3, 1.0), (0.8, 2.0)]).unwrap();
        let json = spec.to_json();
        let back = KernelSpec::from_json(&json).unwrap();
        assert_eq!(spec, back);

        let custom = KernelSpec::custom("mystery", |p| p.powf(-0.25), None);
        let j = custom.to_json();
        assert!(j.contains("custom"));
        assert!(KernelSpec::from_json(&j).is_err());
    }

    #[test]
    fn constructor_validation() {
        assert!(KernelSpec::caputo(1.0).is_err());
        assert!(KernelSpec::caputo(0.0).is_err());
        assert!(KernelSpec::log_bernstein(1.5).is_err());
        assert!(KernelSpec::distributed(vec![]).is_err());
        assert!(KernelSpec::distributed(vec![(0.5, -1.0)]).is_err());
    }

    #[test]
    fn custom_kernel_gate_and_eval() {
        // custom kernel mirroring the half-order family passes the gate
        let spec = KernelSpec::custom("halforder", |p| p.powf(-0.5), None);
        assert!(check_admissibility(&spec).passed);
        let v = spec.eval_k(1.0).unwrap();
        assert!((v - 0.564_189_583_547_756_3).abs() < 1e-7, "got {v}");
        // a custom map returning a nonpositive value errors out
        let bad = KernelSpec::custom("bad", |_| -1.0, None);
        assert!(bad.laplace(1.0).is_err());
    }
}
