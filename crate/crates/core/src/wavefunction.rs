//! The total spatial singlet wavefunction
//!
//! ```text
//! psi(r, R) = (2/sqrt(pi)) e^{-2 R^2} (1/sqrt(2 pi)) u(r)/sqrt(r)
//! ```
//!
//! together with the maps between the single-particle polar coordinates
//! `(r1, r2, theta)` and the relative/center-of-mass radii `(r, R)`.
//! The spin singlet factor enters the observables only as the constant
//! 1/2 in the participation ratio and is not represented here.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::radial::RadialSolution;
use crate::wigner::HarmonicU;

/// `(r, R)` from `(r1, r2, theta)`:
/// `r = sqrt(r1^2 + r2^2 - 2 r1 r2 cos theta)`,
/// `R = sqrt(r1^2 + r2^2 + 2 r1 r2 cos theta) / 2`.
///
/// Radicands that dip below zero by rounding (>= -1e-14) are clamped.
pub fn rel_cm_coords(r1: f64, r2: f64, theta: f64) -> Result<(f64, f64)> {
    if r1 < 0.0 || r2 < 0.0 || !r1.is_finite() || !r2.is_finite() {
        return Err(Error::InvalidInput(format!(
            "radii must be finite and >= 0, got ({r1}, {r2})"
        )));
    }
    let s = r1 * r1 + r2 * r2;
    let x = 2.0 * r1 * r2 * theta.cos();
    let clamp = |v: f64| {
        if v < 0.0 {
            debug_assert!(v >= -1e-14 * (1.0 + s), "radicand {v} below clamp window");
            0.0
        } else {
            v
        }
    };
    Ok((clamp(s - x).sqrt(), clamp(s + x).sqrt() / 2.0))
}

/// Radial amplitude feeding the evaluator: either a converged variational
/// solution or the strong-coupling harmonic form.
#[derive(Debug, Clone)]
pub enum RadialAmplitude {
    Variational(RadialSolution),
    Harmonic(HarmonicU),
}

impl RadialAmplitude {
    pub fn g(&self) -> f64 {
        match self {
            RadialAmplitude::Variational(s) => s.g(),
            RadialAmplitude::Harmonic(h) => h.g(),
        }
    }

    pub fn u(&self, r: f64) -> f64 {
        match self {
            RadialAmplitude::Variational(s) => s.u(r),
            RadialAmplitude::Harmonic(h) => h.eval(r),
        }
    }

    pub fn u_over_sqrt_r(&self, r: f64) -> f64 {
        match self {
            RadialAmplitude::Variational(s) => s.u_over_sqrt_r(r),
            RadialAmplitude::Harmonic(h) => h.u_over_sqrt_r(r),
        }
    }
}

/// Evaluator for the spatial part of the singlet ground state.
#[derive(Debug, Clone)]
pub struct SpatialWavefunction {
    radial: RadialAmplitude,
}

impl SpatialWavefunction {
    pub fn new(radial: RadialAmplitude) -> Result<Self> {
        if let RadialAmplitude::Variational(sol) = &radial {
            if !sol.is_converged() {
                return Err(Error::State(
                    "spatial wavefunction requires a converged radial solution".into(),
                ));
            }
        }
        Ok(SpatialWavefunction { radial })
    }

    pub fn from_solution(solution: RadialSolution) -> Result<Self> {
        Self::new(RadialAmplitude::Variational(solution))
    }

    pub fn from_harmonic(h: HarmonicU) -> Self {
        SpatialWavefunction {
            radial: RadialAmplitude::Harmonic(h),
        }
    }

    pub fn g(&self) -> f64 {
        self.radial.g()
    }

    pub fn radial(&self) -> &RadialAmplitude {
        &self.radial
    }

    /// `psi(r1, r2, theta)`. Depends on theta only through cos(theta),
    /// hence symmetric under particle exchange and under theta -> -theta.
    ///
    /// Hot path: callers guarantee `r1, r2 >= 0`.
    #[inline]
    pub fn eval(&self, r1: f64, r2: f64, theta: f64) -> f64 {
        self.eval_costheta(r1, r2, theta.cos())
    }

    /// Same as [`eval`](Self::eval) with the cosine already taken; kernel
    /// loops precompute the cosine table once.
    #[inline]
    pub fn eval_costheta(&self, r1: f64, r2: f64, cos_theta: f64) -> f64 {
        let s = r1 * r1 + r2 * r2;
        let x = 2.0 * r1 * r2 * cos_theta;
        let rel2 = (s - x).max(0.0);
        let cm2 = (s + x).max(0.0) * 0.25;
        let prefactor = 2.0 / PI.sqrt() / (2.0 * PI).sqrt();
        prefactor * (-2.0 * cm2).exp() * self.radial.u_over_sqrt_r(rel2.sqrt())
    }
}
