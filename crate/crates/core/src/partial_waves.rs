//! Partial-wave radial kernels
//!
//! ```text
//! A_l(r1, r2) = sqrt(r1 r2) int_0^{2pi} psi(r1, r2, cos theta) cos(l theta) dtheta
//! ```
//!
//! computed by the uniform trapezoid rule on a shared set of wavefunction
//! samples, plus the trace-level channel quantities that need no
//! eigendecomposition: the collective occupancy `eta_l = ||A_l||^2`, the
//! channel purity `tr rho_l^2` and its trace-normalized form, and the
//! cross-channel overlap used to probe the strong-coupling sign
//! alternation.

use nalgebra::DMatrix;
use rayon::prelude::*;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::numerics::{AngularGrid, RadialGrid};
use crate::wavefunction::SpatialWavefunction;

/// One angular channel of the wavefunction, sampled on the radial grid.
///
/// Only `l >= 0` is stored; `A_{-l} = A_l` because psi depends on the
/// inter-electronic angle through its cosine alone.
#[derive(Debug, Clone)]
pub struct PartialWaveKernel {
    l: usize,
    g: f64,
    grid: Arc<RadialGrid>,
    values: DMatrix<f64>,
}

impl PartialWaveKernel {
    pub fn l(&self) -> usize {
        self.l
    }

    pub fn g(&self) -> f64 {
        self.g
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    /// Kernel samples `A_l(r_i, r_j)`.
    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    /// Weight-symmetrized form `B = D^{1/2} A D^{1/2}`, `D = diag(w_i)`.
    /// Traces of powers of `B` are the quadrature discretizations of the
    /// corresponding kernel traces.
    pub fn b_matrix(&self) -> DMatrix<f64> {
        let n = self.grid.len();
        let sw: Vec<f64> = self.grid.weights().iter().map(|w| w.sqrt()).collect();
        let mut b = DMatrix::zeros(n, n);
        for j in 0..n {
            for i in 0..n {
                b[(i, j)] = sw[i] * self.values[(i, j)] * sw[j];
            }
        }
        b
    }

    /// `eta_l = tr rho_l = ||A_l||^2` (weighted Frobenius norm squared).
    pub fn occupancy(&self) -> f64 {
        let w = self.grid.weights();
        let n = self.grid.len();
        let mut acc = 0.0;
        for j in 0..n {
            for i in 0..n {
                let a = self.values[(i, j)];
                acc += w[i] * w[j] * a * a;
            }
        }
        acc
    }

    /// `tr rho_l^2` straight from the kernel matrix (`tr B^4`), without an
    /// eigendecomposition; the spectral route lives in
    /// [`channel_purity`](crate::schmidt::channel_purity).
    pub fn purity(&self) -> f64 {
        let b = self.b_matrix();
        let b2 = &b * &b;
        b2.iter().map(|x| x * x).sum()
    }

    /// Inverse participation ratio `Omega_l = tr rho_l^2 / eta_l^2` of the
    /// trace-normalized channel.
    pub fn omega(&self) -> Result<f64> {
        let eta = self.occupancy();
        if eta <= 1e-14 {
            return Err(Error::UndefinedChannel(format!(
                "channel l = {} has occupancy {eta:.3e}; its normalized purity is undefined",
                self.l
            )));
        }
        Ok(self.purity() / (eta * eta))
    }
}

fn check_angular(l: usize, angular: &AngularGrid) -> Result<()> {
    let m = angular.m_points();
    if 2 * l >= m {
        return Err(Error::Aliasing(format!(
            "channel l = {l} aliases on {m} angular points (need l < M/2)"
        )));
    }
    if m < 4 * (l + 1) {
        return Err(Error::Aliasing(format!(
            "channel l = {l} needs at least {} angular points, got {m}",
            4 * (l + 1)
        )));
    }
    Ok(())
}

/// Kernels for all channels `l = 0..=l_max` in one pass over a shared set
/// of wavefunction samples: for each node pair the `M` angle samples are
/// evaluated once and contracted against every cosine row.
pub fn compute_kernels(
    w: &SpatialWavefunction,
    grid: &Arc<RadialGrid>,
    angular: &AngularGrid,
    l_max: usize,
) -> Result<Vec<PartialWaveKernel>> {
    check_angular(l_max, angular)?;
    let n = grid.len();
    let m = angular.m_points();
    let r = grid.nodes();
    let dtheta = angular.weight();

    // cos(l theta_k) table, rows by l
    let cos_theta: Vec<f64> = angular.nodes().map(|t| t.cos()).collect();
    let mut cos_table = vec![vec![0.0; m]; l_max + 1];
    for (l, row) in cos_table.iter_mut().enumerate() {
        for (k, c) in row.iter_mut().enumerate() {
            *c = (l as f64 * angular.node(k)).cos();
        }
    }

    // upper triangle rows in parallel, mirrored afterwards
    let rows: Vec<Vec<Vec<f64>>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut psi_buf = vec![0.0; m];
            let mut out = vec![vec![0.0; n - i]; l_max + 1];
            for j in i..n {
                for k in 0..m {
                    psi_buf[k] = w.eval_costheta(r[i], r[j], cos_theta[k]);
                }
                let scale = (r[i] * r[j]).sqrt() * dtheta;
                for (l, row) in cos_table.iter().enumerate() {
                    let mut acc = 0.0;
                    for k in 0..m {
                        acc += psi_buf[k] * row[k];
                    }
                    out[l][j - i] = scale * acc;
                }
            }
            out
        })
        .collect();

    let kernels = (0..=l_max)
        .map(|l| {
            let mut values = DMatrix::zeros(n, n);
            for i in 0..n {
                for j in i..n {
                    let v = rows[i][l][j - i];
                    values[(i, j)] = v;
                    values[(j, i)] = v;
                }
            }
            PartialWaveKernel {
                l,
                g: w.g(),
                grid: grid.clone(),
                values,
            }
        })
        .collect();
    Ok(kernels)
}

/// Kernel for a single channel; equivalent to picking entry `l` out of
/// [`compute_kernels`].
pub fn compute_kernel(
    w: &SpatialWavefunction,
    grid: &Arc<RadialGrid>,
    l: usize,
    angular: &AngularGrid,
) -> Result<PartialWaveKernel> {
    check_angular(l, angular)?;
    let mut all = compute_kernels(w, grid, angular, l)?;
    Ok(all.pop().expect("compute_kernels returned l_max + 1 kernels"))
}

/// `eta_l` of a computed kernel.
pub fn collective_occupancy(kernel: &PartialWaveKernel) -> f64 {
    kernel.occupancy()
}

/// Normalized weighted-Frobenius overlap `<A_a, A_b> / (||A_a|| ||A_b||)`
/// between adjacent channels; approaches -1 for every adjacent pair in
/// the strong-coupling limit where `A_l -> (-1)^l A`.
pub fn kernel_parity_overlap(a: &PartialWaveKernel, b: &PartialWaveKernel) -> Result<f64> {
    if !Arc::ptr_eq(&a.grid, &b.grid) && a.grid.nodes() != b.grid.nodes() {
        return Err(Error::InvalidInput(
            "parity overlap requires kernels on the same grid".into(),
        ));
    }
    if a.g != b.g {
        return Err(Error::InvalidInput(format!(
            "parity overlap requires equal couplings, got {} and {}",
            a.g, b.g
        )));
    }
    if b.l != a.l + 1 {
        return Err(Error::InvalidInput(format!(
            "parity overlap is defined for adjacent channels, got l = {} and {}",
            a.l, b.l
        )));
    }
    let w = a.grid.weights();
    let n = a.grid.len();
    let (mut dot, mut na, mut nb) = (0.0, 0.0, 0.0);
    for j in 0..n {
        for i in 0..n {
            let ww = w[i] * w[j];
            let x = a.values[(i, j)];
            let y = b.values[(i, j)];
            dot += ww * x * y;
            na += ww * x * x;
            nb += ww * y * y;
        }
    }
    Ok(dot / (na.sqrt() * nb.sqrt()))
}
