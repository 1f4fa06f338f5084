//! Strong-coupling (Wigner-molecule) asymptotics.
//!
//! For g -> infinity the electrons localize at antipodal classical
//! positions of radius `(1/2)(g/2)^{1/3}` and the relative motion reduces
//! to Gaussian oscillations about `r0 = (g/2)^{1/3}`: expanding
//! `V(r) = r^2 + g/r` about its minimum gives `V''(r0) = 6`, hence the
//! normalized harmonic ground state
//!
//! ```text
//! u(r) = (sqrt(3)/pi)^{1/4} exp(-sqrt(3) (r - r0)^2 / 2),
//! eps ~ V(r0) + sqrt(3) = 3 r0^2 + sqrt(3).
//! ```
//!
//! Channel quantities computed from this wavefunction approach their
//! limits with leading corrections in powers of `r0^{-1} = (g/2)^{-1/3}`,
//! so each limit is extrapolated by fitting `a + b g^{-1/3}` over the
//! largest couplings of the list.

use rayon::prelude::*;
use serde::Serialize;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::numerics::{build_radial_grid, AngularGrid};
use crate::partial_waves::{compute_kernels, kernel_parity_overlap};
use crate::schmidt::schmidt_decompose;
use crate::wavefunction::SpatialWavefunction;

/// Classical single-particle radius `(1/2)(g/2)^{1/3}`.
pub fn classical_radius(g: f64) -> Result<f64> {
    if !(g > 0.0) || !g.is_finite() {
        return Err(Error::InvalidInput(format!(
            "classical radius needs g > 0, got {g}"
        )));
    }
    Ok(0.5 * (g / 2.0).powf(1.0 / 3.0))
}

/// Harmonic-approximation relative radial ground state.
#[derive(Debug, Clone)]
pub struct HarmonicU {
    g: f64,
    r0: f64,
}

impl HarmonicU {
    pub fn new(g: f64) -> Result<Self> {
        if !(g > 0.0) || !g.is_finite() {
            return Err(Error::InvalidInput(format!(
                "harmonic approximation needs g > 0, got {g}"
            )));
        }
        Ok(HarmonicU {
            g,
            r0: (g / 2.0).powf(1.0 / 3.0),
        })
    }

    pub fn g(&self) -> f64 {
        self.g
    }

    /// Equilibrium radius of the relative coordinate, `(g/2)^{1/3}`.
    pub fn r0(&self) -> f64 {
        self.r0
    }

    /// `(sqrt(3)/pi)^{1/4} exp(-sqrt(3)(r - r0)^2/2)`.
    pub fn eval(&self, r: f64) -> f64 {
        let s3 = 3.0f64.sqrt();
        (s3 / std::f64::consts::PI).powf(0.25) * (-0.5 * s3 * (r - self.r0) * (r - self.r0)).exp()
    }

    /// `u(r)/sqrt(r)` with a floor on the radius; the Gaussian is already
    /// doubly suppressed at coincidence (relative factor at r ~ 0 and
    /// center-of-mass factor at R ~ r1), so the floor only prevents the
    /// 0/0 at the theta = 0 sample.
    pub fn u_over_sqrt_r(&self, r: f64) -> f64 {
        self.eval(r) / r.max(1e-8).sqrt()
    }
}

/// Free-function form of the harmonic amplitude.
pub fn harmonic_u(g: f64, r: f64) -> Result<f64> {
    Ok(HarmonicU::new(g)?.eval(r))
}

/// Per-coupling record of the asymptotic study.
#[derive(Debug, Clone, Serialize)]
pub struct WignerPoint {
    pub g: f64,
    pub classical_radius: f64,
    /// resolved grid sizes, echoed for reproducibility
    pub grid_points: usize,
    pub r_max: f64,
    pub angular_points: usize,
    pub omega_0: f64,
    /// Omega_l for l = 1..=3 via the trace route
    pub omega_higher: Vec<f64>,
    /// lambda_0 / lambda_s of the l = 0 channel, s = 1..=3
    pub lambda_ratios: Vec<f64>,
    /// normalized overlaps of adjacent kernels, l = 0..=2
    pub parity_overlaps: Vec<f64>,
    /// circular variance of the inter-electronic angle under |psi|^2
    pub circular_variance: f64,
}

/// Extrapolated strong-coupling limits with per-g diagnostics.
#[derive(Debug, Clone, Serialize)]
pub struct WignerAsymptotics {
    pub g_list: Vec<f64>,
    pub points: Vec<WignerPoint>,
    /// extrapolated channel purity Omega
    pub omega_inf: f64,
    /// extrapolated lambda_0 / lambda_s for s = 1..=3
    pub lambda_ratios_inf: Vec<f64>,
    /// |Omega_0(g) - omega_inf| along the list; must shrink monotonically
    pub omega_convergence: Vec<f64>,
    /// max_l |Omega_l - Omega_0| at the largest coupling
    pub channel_independence_dev: f64,
    /// number of trailing couplings entering each fit
    pub fit_points: usize,
}

/// Tuning for [`asymptotic_spectrum`]; the defaults reproduce the
/// published limits.
#[derive(Debug, Clone)]
pub struct WignerConfig {
    /// couplings used in the extrapolation fit (taken from the tail)
    pub fit_points: usize,
    /// nodes per Gaussian width 3^{-1/4} of the radial oscillation
    pub nodes_per_width: f64,
    /// tolerance on channel independence at the largest coupling
    pub channel_independence_tol: f64,
}

impl Default for WignerConfig {
    fn default() -> Self {
        WignerConfig {
            fit_points: 3,
            nodes_per_width: 12.0,
            channel_independence_tol: 1e-3,
        }
    }
}

/// Default coupling list for the asymptotic study.
pub fn default_g_list() -> Vec<f64> {
    vec![200.0, 500.0, 1000.0, 2000.0]
}

fn wigner_point(g: f64, config: &WignerConfig) -> Result<WignerPoint> {
    let h = HarmonicU::new(g)?;
    let r0 = h.r0();
    let r_max = 2.0 * r0 + 10.0;
    let width = 3.0f64.powf(-0.25);
    let n = ((config.nodes_per_width * r_max / width).ceil() as usize).max(64);
    let grid = Arc::new(build_radial_grid(n, r_max)?);
    let l_top = 3usize;
    let m = (16.0 * r0).ceil().max(64.0) as usize;
    let m = m.max(4 * (l_top + 1));
    let angular = AngularGrid::new(m)?;
    let w = SpatialWavefunction::from_harmonic(h);

    let kernels = compute_kernels(&w, &grid, &angular, l_top)?;
    let spec0 = schmidt_decompose(&kernels[0])?;
    let lambdas = spec0.lambdas();
    if lambdas.len() < 4 {
        return Err(Error::Numerical(format!(
            "l = 0 channel at g = {g} retained only {} ranks",
            lambdas.len()
        )));
    }
    let omega_0 = kernels[0].omega()?;
    let omega_higher: Vec<f64> = kernels[1..]
        .iter()
        .map(|k| k.omega())
        .collect::<Result<_>>()?;
    let lambda_ratios: Vec<f64> = (1..=3).map(|s| lambdas[0] / lambdas[s]).collect();
    let parity_overlaps: Vec<f64> = (0..l_top)
        .map(|l| kernel_parity_overlap(&kernels[l], &kernels[l + 1]))
        .collect::<Result<_>>()?;

    // circular statistics of theta under |psi|^2 on the same grids
    let (mut c_acc, mut s_acc, mut norm) = (0.0, 0.0, 0.0);
    let nodes = grid.nodes();
    let weights = grid.weights();
    for i in 0..grid.len() {
        for j in 0..grid.len() {
            let base = weights[i] * weights[j] * nodes[i] * nodes[j];
            for t in angular.nodes() {
                let p = w.eval(nodes[i], nodes[j], t);
                let p2 = base * p * p;
                c_acc += p2 * t.cos();
                s_acc += p2 * t.sin();
                norm += p2;
            }
        }
    }
    let resultant = (c_acc * c_acc + s_acc * s_acc).sqrt() / norm;
    let circular_variance = 1.0 - resultant;

    Ok(WignerPoint {
        g,
        classical_radius: classical_radius(g)?,
        grid_points: n,
        r_max,
        angular_points: m,
        omega_0,
        omega_higher,
        lambda_ratios,
        parity_overlaps,
        circular_variance,
    })
}

/// Least-squares fit of `y = a + b x`; returns `a`.
fn fit_intercept(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let sx: f64 = x.iter().sum();
    let sy: f64 = y.iter().sum();
    let sxx: f64 = x.iter().map(|v| v * v).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    let det = n * sxx - sx * sx;
    let b = (n * sxy - sx * sy) / det;
    (sy - b * sx) / n
}

/// Run the harmonic-approximation pipeline over `g_list` and extrapolate
/// the channel purity and occupancy ratios to the strong-coupling limit.
pub fn asymptotic_spectrum(g_list: &[f64], config: &WignerConfig) -> Result<WignerAsymptotics> {
    if g_list.len() < 3 {
        return Err(Error::InvalidInput(format!(
            "asymptotic study needs at least 3 couplings, got {}",
            g_list.len()
        )));
    }
    if g_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidInput("coupling list must be increasing".into()));
    }
    if g_list[0] < 100.0 {
        return Err(Error::InvalidInput(format!(
            "harmonic approximation needs g >= 100, got {}",
            g_list[0]
        )));
    }
    if config.fit_points < 2 || config.fit_points > g_list.len() {
        return Err(Error::Config(format!(
            "fit_points must lie in [2, {}], got {}",
            g_list.len(),
            config.fit_points
        )));
    }

    let points: Vec<WignerPoint> = g_list
        .par_iter()
        .map(|&g| wigner_point(g, config))
        .collect::<Result<_>>()?;

    let tail = &points[points.len() - config.fit_points..];
    let x: Vec<f64> = tail.iter().map(|p| p.g.powf(-1.0 / 3.0)).collect();
    let omega_inf = fit_intercept(&x, &tail.iter().map(|p| p.omega_0).collect::<Vec<_>>());
    let lambda_ratios_inf: Vec<f64> = (0..3)
        .map(|s| {
            fit_intercept(
                &x,
                &tail.iter().map(|p| p.lambda_ratios[s]).collect::<Vec<_>>(),
            )
        })
        .collect();

    let omega_convergence: Vec<f64> = points
        .iter()
        .map(|p| (p.omega_0 - omega_inf).abs())
        .collect();
    if omega_convergence.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Extrapolation(format!(
            "approach to the fitted limit is not monotone along the coupling list: {omega_convergence:?}"
        )));
    }
    let last = points.last().expect("nonempty by construction");
    let channel_independence_dev = last
        .omega_higher
        .iter()
        .map(|o| (o - last.omega_0).abs())
        .fold(0.0f64, f64::max);
    if channel_independence_dev >= config.channel_independence_tol {
        return Err(Error::Extrapolation(format!(
            "channel purities not angular-momentum independent at g = {}: max deviation {channel_independence_dev:.3e}",
            last.g
        )));
    }

    Ok(WignerAsymptotics {
        g_list: g_list.to_vec(),
        points,
        omega_inf,
        lambda_ratios_inf,
        omega_convergence,
        channel_independence_dev,
        fit_points: config.fit_points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::build_radial_grid;
    use crate::radial::solve_ground_radial;
    use approx::assert_abs_diff_eq;

    #[test]
    fn classical_radius_formula() {
        assert_abs_diff_eq!(classical_radius(2.0).unwrap(), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(classical_radius(16.0).unwrap(), 1.0, epsilon = 1e-15);
        assert!(classical_radius(0.0).is_err());
        assert!(classical_radius(-3.0).is_err());
    }

    #[test]
    fn classical_radius_minimizes_relative_potential() {
        // r0 = 2 * classical_radius is the stationary point of r^2 + g/r
        let g = 37.0;
        let r0 = 2.0 * classical_radius(g).unwrap();
        let v = |r: f64| r * r + g / r;
        let h = 1e-6 * r0;
        let slope = (v(r0 + h) - v(r0 - h)) / (2.0 * h);
        assert!(slope.abs() < 1e-6, "dV/dr at r0: {slope}");
        assert!(v(r0 - 0.1) > v(r0) && v(r0 + 0.1) > v(r0));
    }

    #[test]
    fn harmonic_u_peak_and_norm() {
        for g in [100.0, 1000.0] {
            let h = HarmonicU::new(g).unwrap();
            let r0 = h.r0();
            assert!(h.eval(r0) > h.eval(r0 + 0.3));
            assert!(h.eval(r0) > h.eval(r0 - 0.3));
            let grid = build_radial_grid(400, 2.0 * r0 + 10.0).unwrap();
            let norm = grid.integrate(|r| h.eval(r) * h.eval(r));
            assert_abs_diff_eq!(norm, 1.0, epsilon = 1e-10);
        }
        assert!(HarmonicU::new(-2.0).is_err());
        assert!(harmonic_u(50.0, 1.0).is_ok());
    }

    #[test]
    fn harmonic_matches_variational_at_strong_coupling() {
        // L2 distance between the solved and harmonic ground states shrinks
        // like g^{-1/3}; about 0.035 at g = 1000
        let dist = |g: f64, k: usize| {
            let r_max = 2.0 * (g / 2.0).powf(1.0 / 3.0) + 10.0;
            let grid = Arc::new(build_radial_grid(420, r_max).unwrap());
            let sol = solve_ground_radial(g, k, 1.0, grid.clone()).unwrap();
            let h = HarmonicU::new(g).unwrap();
            grid.integrate(|r| (sol.u(r) - h.eval(r)).powi(2)).sqrt()
        };
        let d1000 = dist(1000.0, 70);
        assert!(d1000 <= 0.05, "harmonic distance at g=1000: {d1000}");
        let d2000 = dist(2000.0, 95);
        let ratio = d2000 / d1000;
        assert!(
            ratio > 0.72 && ratio < 0.87,
            "distance should shrink like g^(-1/3): {d1000} -> {d2000} (ratio {ratio})"
        );
    }

    #[test]
    fn input_validation() {
        let cfg = WignerConfig::default();
        assert!(asymptotic_spectrum(&[200.0, 500.0], &cfg).is_err());
        assert!(asymptotic_spectrum(&[500.0, 200.0, 1000.0], &cfg).is_err());
        assert!(asymptotic_spectrum(&[50.0, 200.0, 500.0], &cfg).is_err());
    }

    #[test]
    fn asymptotic_structure_small_list() {
        // structural checks on a cheap list; the published limit values are
        // exercised by the acceptance suite on the default list
        let cfg = WignerConfig::default();
        let out = asymptotic_spectrum(&[150.0, 300.0, 1000.0], &cfg).unwrap();
        assert!(out.omega_inf > 0.0 && out.omega_inf < 1.0);
        for p in &out.points {
            assert_abs_diff_eq!(
                p.classical_radius,
                0.5 * (p.g / 2.0).powf(1.0 / 3.0),
                epsilon = 1e-15
            );
            // ratios grow rapidly with s
            assert!(p.lambda_ratios[0] < p.lambda_ratios[1]);
            assert!(p.lambda_ratios[1] < p.lambda_ratios[2]);
            // adjacent kernels anti-align
            assert!(p.parity_overlaps.iter().all(|&o| o < -0.9));
        }
        // angular correlation tightens along the list
        let cv: Vec<f64> = out.points.iter().map(|p| p.circular_variance).collect();
        assert!(cv.windows(2).all(|w| w[1] < w[0]), "circular variances {cv:?}");
        // channel equality improves along the list
        let dev: Vec<f64> = out
            .points
            .iter()
            .map(|p| {
                p.omega_higher
                    .iter()
                    .map(|o| (o - p.omega_0).abs())
                    .fold(0.0f64, f64::max)
            })
            .collect();
        assert!(dev.windows(2).all(|w| w[1] < w[0]), "channel deviations {dev:?}");
    }
}
