//! Fractional calculus with respect to a memory kernel.
//!
//! A nonnegative locally integrable kernel k defines the convolution
//! derivative (𝔻u)(t) = d/dt ∫₀^t k(t−τ) u(τ) dτ − k(t) u(0). When the
//! Laplace transform 𝒦 of k is a Stieltjes function with the right limit
//! behavior at 0 and ∞, the operator behaves like a fractional derivative:
//! it has a right inverse 𝕀 built from the Sonine partner ϰ of k, the
//! relaxation problem 𝔻u = −λu has a completely monotone solution, and the
//! 𝔻-heat equation has a subordination-built fundamental solution that is a
//! probability density. This crate certifies the admissibility of a kernel
//! numerically and implements all of those constructions, along with a
//! Monte Carlo validation of the renewal-process identity
//! P[Jₙ > t] = E[e^(−λE(t))] = u_λ(t) for the time-changed Poisson process.
//!
//! Everything is driven through the Laplace domain: the built-in kernel
//! families carry closed-form transforms, and the numerical engine combines
//! Gaver–Stehfest and fixed-Talbot inversion with singularity-aware forward
//! quadrature.
//!
//! The `parallel` feature (on by default) runs grid sweeps and Monte Carlo
//! paths on rayon; without it every code path falls back to an equivalent
//! sequential loop.

pub mod diffusion;
pub mod error;
pub mod kernel;
pub mod laplace;
mod par;
mod quad;
pub mod relaxation;
pub mod renewal;
pub mod sampled;
pub mod sonine;
pub mod special;
pub mod verify;

pub use error::{Error, Result};
pub use kernel::{check_admissibility, ConditionReport, KernelSpec};
pub use sampled::SampledFunction;
