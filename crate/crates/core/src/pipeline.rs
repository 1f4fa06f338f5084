//! End-to-end analysis driver: resolve numerical parameters for a
//! coupling, solve the radial problem, build the channel kernels, and
//! assemble the entanglement report. Sweeps fan the driver out over a
//! worker pool and reassemble rows in coupling order.

use rayon::prelude::*;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::measures::{
    effective_slater_rank, linear_entropy, partial_wave_count, participation_ratio,
    spatial_purity,
};
use crate::numerics::{build_radial_grid, AngularGrid};
use crate::partial_waves::{compute_kernels, PartialWaveKernel};
use crate::radial::solve_ground_radial;
use crate::report::{EntanglementReport, ReportMetadata};
use crate::wavefunction::SpatialWavefunction;

/// Channels whose doubled occupancy falls below this are treated as the
/// converged tail; the channel list stops at the first such l.
pub const CHANNEL_TAIL_THRESHOLD: f64 = 1e-8;

/// A minor channel (l > 1) counts as "vanishingly small" while
/// `2 eta_l / eta_0` stays below this; the fraction itself is echoed in
/// the report metadata.
pub const VANISHING_CHANNEL_THRESHOLD: f64 = 1e-3;

/// Initial cap on the channel scan; escalated once before giving up.
pub const DEFAULT_L_CAP: usize = 28;
/// Hard cap on the channel scan.
pub const MAX_L_CAP: usize = 64;

/// User-facing knobs; `None` means resolve automatically from g.
#[derive(Debug, Clone)]
pub struct AnalysisConfig {
    pub basis_size: Option<usize>,
    pub basis_scale: f64,
    pub grid_points: Option<usize>,
    pub r_max: Option<f64>,
    pub l_max: Option<usize>,
    pub angular_points: Option<usize>,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig {
            basis_size: None,
            basis_scale: 1.0,
            grid_points: None,
            r_max: None,
            l_max: None,
            angular_points: None,
        }
    }
}

/// Truncation radius: twice the relative equilibrium radius plus ten
/// oscillator widths, so both the Wigner shell and the weak-coupling
/// Gaussian fit comfortably.
pub fn auto_r_max(g: f64) -> f64 {
    2.0 * (g / 2.0).powf(1.0 / 3.0) + 10.0
}

/// Basis size: 60 suffices through g ~ 1000; beyond that the shell radius
/// grows and the polynomial degree must track r0^2.
pub fn auto_basis_size(g: f64) -> usize {
    let shell = 0.75 * (g / 2.0).powf(2.0 / 3.0);
    60usize.max(20 + shell.ceil() as usize)
}

/// Radial points: enough for the basis Gram matrix plus margin.
pub fn auto_grid_points(basis_size: usize) -> usize {
    360usize.max(2 * basis_size + 80)
}

/// Angular points: floor of 160 (the particle-coincidence cusp converges
/// slowly in the angle), at least 4 samples per channel, and 16 per unit
/// of the Wigner shell radius so the strong-coupling angular peak stays
/// resolved.
pub fn auto_angular_points(g: f64, l_cap: usize) -> usize {
    let peak = (16.0 * (g / 2.0).powf(1.0 / 3.0)).ceil() as usize;
    160usize.max(4 * (l_cap + 1)).max(peak)
}

/// Parameters after auto-resolution, echoed into every report.
#[derive(Debug, Clone)]
pub struct ResolvedParams {
    pub g: f64,
    pub r_max: f64,
    pub grid_points: usize,
    pub basis_size: usize,
    pub basis_scale: f64,
}

fn resolve(g: f64, config: &AnalysisConfig) -> Result<ResolvedParams> {
    if !(g >= 0.0) || !g.is_finite() {
        return Err(Error::InvalidInput(format!(
            "coupling must be finite and >= 0, got {g}"
        )));
    }
    if !(config.basis_scale > 0.0) || !config.basis_scale.is_finite() {
        return Err(Error::Config(format!(
            "basis scale must be positive, got {}",
            config.basis_scale
        )));
    }
    let basis_size = config.basis_size.unwrap_or_else(|| auto_basis_size(g));
    let grid_points = config.grid_points.unwrap_or_else(|| auto_grid_points(basis_size));
    let r_max = config.r_max.unwrap_or_else(|| auto_r_max(g));
    if let Some(l) = config.l_max {
        if l > MAX_L_CAP {
            return Err(Error::Config(format!(
                "l_max {l} exceeds the supported cap {MAX_L_CAP}"
            )));
        }
    }
    Ok(ResolvedParams {
        g,
        r_max,
        grid_points,
        basis_size,
        basis_scale: config.basis_scale,
    })
}

struct ChannelSet {
    kernels: Vec<PartialWaveKernel>,
    l_max_used: usize,
    tail_converged: bool,
    angular_points: usize,
    l_cap: usize,
}

fn compute_channel_set(
    w: &SpatialWavefunction,
    grid: &Arc<crate::numerics::RadialGrid>,
    config: &AnalysisConfig,
    g: f64,
) -> Result<ChannelSet> {
    // explicit l_max: compute exactly that many channels
    if let Some(l_fixed) = config.l_max {
        let m = config
            .angular_points
            .unwrap_or_else(|| auto_angular_points(g, l_fixed));
        let angular = AngularGrid::new(m)?;
        let kernels = compute_kernels(w, grid, &angular, l_fixed)?;
        let tail_converged =
            2.0 * kernels.last().expect("nonempty").occupancy() < CHANNEL_TAIL_THRESHOLD;
        return Ok(ChannelSet {
            kernels,
            l_max_used: l_fixed,
            tail_converged,
            angular_points: m,
            l_cap: l_fixed,
        });
    }

    let mut cap = DEFAULT_L_CAP;
    loop {
        let mut m = config
            .angular_points
            .unwrap_or_else(|| auto_angular_points(g, cap));
        if config.angular_points.is_some() {
            // an explicit angular grid limits how many channels it can carry
            cap = cap.min(m / 4 - 1);
        } else {
            m = m.max(4 * (cap + 1));
        }
        let angular = AngularGrid::new(m)?;
        let mut kernels = compute_kernels(w, grid, &angular, cap)?;
        let found = kernels
            .iter()
            .position(|k| 2.0 * k.occupancy() < CHANNEL_TAIL_THRESHOLD);
        match found {
            Some(l) => {
                kernels.truncate(l + 1);
                return Ok(ChannelSet {
                    kernels,
                    l_max_used: l,
                    tail_converged: true,
                    angular_points: m,
                    l_cap: cap,
                });
            }
            None if cap < MAX_L_CAP && config.angular_points.is_none() => {
                cap = MAX_L_CAP;
            }
            None => {
                // tail warning: report everything computed
                return Ok(ChannelSet {
                    kernels,
                    l_max_used: cap,
                    tail_converged: false,
                    angular_points: m,
                    l_cap: cap,
                });
            }
        }
    }
}

/// Full single-coupling analysis: radial solve, channel kernels, Schmidt
/// traces, and every scalar diagnostic.
pub fn analyze(g: f64, config: &AnalysisConfig) -> Result<EntanglementReport> {
    let params = resolve(g, config)?;
    let grid = Arc::new(build_radial_grid(params.grid_points, params.r_max)?);
    let solution = solve_ground_radial(
        params.g,
        params.basis_size,
        params.basis_scale,
        grid.clone(),
    )?;
    let energy = solution.energy();
    let convergence_defect = solution.convergence_defect();
    let w = SpatialWavefunction::from_solution(solution)?;

    let set = compute_channel_set(&w, &grid, config, g)?;
    let eta: Vec<f64> = set.kernels.iter().map(|k| k.occupancy()).collect();
    let channel_purities: Vec<f64> = set.kernels.iter().map(|k| k.purity()).collect();
    let omega: Vec<Option<f64>> = set.kernels.iter().map(|k| k.omega().ok()).collect();

    let participation = participation_ratio(&channel_purities)?;
    let slater_rank = effective_slater_rank(participation)?;
    let ent = linear_entropy(participation);
    let count = partial_wave_count(&channel_purities, participation)?;
    let purity = spatial_purity(&channel_purities);

    let eta_tail = if eta.len() > 6 {
        2.0 * eta[6..].iter().sum::<f64>()
    } else {
        0.0
    };
    let max_minor_channel_fraction = eta
        .iter()
        .skip(2)
        .map(|e| 2.0 * e / eta[0])
        .fold(0.0f64, f64::max);
    let last_eta = *eta.last().expect("at least one channel");
    let r_truncation_bias_bound = 2.0 * participation * participation * last_eta * last_eta;

    Ok(EntanglementReport {
        g,
        ln_g: g.ln(),
        wigner_parameter: g / 2.0f64.sqrt(),
        eps_rel: energy,
        eta,
        eta_tail,
        omega,
        channel_purities,
        purity_spatial: purity,
        participation,
        slater_rank,
        linear_entropy: ent,
        n_partial: count.count,
        n_partial_saturated: count.saturated,
        slater_estimate: 2 * count.count as i64 - 1,
        l_max_used: set.l_max_used,
        tail_converged: set.tail_converged,
        max_minor_channel_fraction,
        metadata: ReportMetadata {
            r_max: params.r_max,
            grid_points: params.grid_points,
            basis_size: params.basis_size,
            basis_scale: params.basis_scale,
            angular_points: set.angular_points,
            l_cap: set.l_cap,
            energy_convergence_defect: convergence_defect,
            r_truncation_bias_bound,
            vanishing_channel_threshold: VANISHING_CHANNEL_THRESHOLD,
        },
    })
}

/// Log- or linear-spaced coupling ladder.
pub fn coupling_ladder(g_min: f64, g_max: f64, points: usize, log_scale: bool) -> Result<Vec<f64>> {
    if points < 2 {
        return Err(Error::Config(format!("sweep needs >= 2 points, got {points}")));
    }
    if !(g_min < g_max) {
        return Err(Error::Config(format!(
            "sweep needs g_min < g_max, got [{g_min}, {g_max}]"
        )));
    }
    if log_scale && g_min <= 0.0 {
        return Err(Error::Config(format!(
            "log sweep needs g_min > 0, got {g_min}"
        )));
    }
    if g_min < 0.0 {
        return Err(Error::Config(format!("couplings must be >= 0, got {g_min}")));
    }
    let n = points as f64 - 1.0;
    Ok((0..points)
        .map(|i| {
            let t = i as f64 / n;
            if log_scale {
                (g_min.ln() + t * (g_max.ln() - g_min.ln())).exp()
            } else {
                g_min + t * (g_max - g_min)
            }
        })
        .collect())
}

/// One sweep row: the coupling plus the analysis outcome.
pub struct SweepRow {
    pub g: f64,
    pub outcome: Result<EntanglementReport>,
}

pub struct SweepResult {
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    pub fn any_failed(&self) -> bool {
        self.rows.iter().any(|r| r.outcome.is_err())
    }
}

/// Run the analysis over each coupling; points are independent, computed
/// on the worker pool, and reassembled in input order. Per-point failures
/// become error rows; the sweep keeps going.
pub fn sweep(couplings: &[f64], config: &AnalysisConfig, jobs: Option<usize>) -> Result<SweepResult> {
    let run = || -> Vec<SweepRow> {
        couplings
            .par_iter()
            .map(|&g| SweepRow {
                g,
                outcome: analyze(g, config),
            })
            .collect()
    };
    let rows = match jobs {
        Some(j) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(j.max(1))
                .build()
                .map_err(|e| Error::Config(format!("worker pool: {e}")))?;
            pool.install(run)
        }
        None => run(),
    };
    Ok(SweepResult { rows })
}
