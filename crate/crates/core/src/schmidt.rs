//! Schmidt analysis of the partial-wave kernels.
//!
//! Each channel kernel solves the integral eigenproblem
//!
//! ```text
//! int_0^inf A_l(r1, r2) chi_s(r2) dr2 = kappa_s chi_s(r1)
//! ```
//!
//! by the Nystrom method: form `B = D^{1/2} A D^{1/2}` with `D = diag(w)`,
//! eigendecompose the symmetric `B`, and map eigenvectors back through
//! `chi(r_i) = v_i / sqrt(w_i)`. The symmetrization keeps the discrete
//! occupancies exactly real and makes the orbitals come out orthonormal
//! in the quadrature inner product.

use nalgebra::{DMatrix, DVector};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::numerics::{symmetric_eigendecompose, AngularGrid, RadialGrid};
use crate::partial_waves::PartialWaveKernel;
use crate::wavefunction::SpatialWavefunction;

/// Relative retention threshold on |kappa| (below the quadrature noise
/// floor), with an absolute guard for channels that are numerically zero.
const RANK_RETENTION_REL: f64 = 1e-10;
const RANK_RETENTION_ABS: f64 = 1e-16;

/// Schmidt data of one angular channel: coefficients `kappa_s` ordered by
/// descending magnitude (signs allowed), occupancies `lambda_s = kappa_s^2`,
/// and radial orbitals sampled on the grid, orthonormal under
/// `sum_i w_i chi chi'`.
#[derive(Debug, Clone)]
pub struct ChannelSpectrum {
    l: usize,
    g: f64,
    grid: Arc<RadialGrid>,
    kappas: Vec<f64>,
    /// column s holds chi_s on the grid nodes
    chis: DMatrix<f64>,
}

impl ChannelSpectrum {
    pub fn l(&self) -> usize {
        self.l
    }

    pub fn g(&self) -> f64 {
        self.g
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    /// Number of retained ranks.
    pub fn rank(&self) -> usize {
        self.kappas.len()
    }

    pub fn kappas(&self) -> &[f64] {
        &self.kappas
    }

    pub fn lambdas(&self) -> Vec<f64> {
        self.kappas.iter().map(|k| k * k).collect()
    }

    /// `eta_l` as the eigenvalue sum over retained ranks.
    pub fn eta(&self) -> f64 {
        self.kappas.iter().map(|k| k * k).sum()
    }

    /// Orbital `chi_s` sampled on the grid.
    pub fn chi(&self, s: usize) -> nalgebra::DVectorView<'_, f64> {
        self.chis.column(s)
    }
}

/// Nystrom eigendecomposition of one kernel.
pub fn schmidt_decompose(kernel: &PartialWaveKernel) -> Result<ChannelSpectrum> {
    let b = kernel.b_matrix();
    let (vals, vecs) = symmetric_eigendecompose(&b).map_err(|e| {
        Error::Numerical(format!(
            "eigendecomposition failed for channel l = {} at g = {}: {e}",
            kernel.l(),
            kernel.g()
        ))
    })?;
    let grid = kernel.grid();
    let n = grid.len();
    let sqrt_w: Vec<f64> = grid.weights().iter().map(|w| w.sqrt()).collect();

    let kappa0 = vals[0].abs();
    let threshold = (RANK_RETENTION_REL * kappa0).max(RANK_RETENTION_ABS);
    let retained = vals.iter().take_while(|k| k.abs() > threshold).count();

    let mut kappas = Vec::with_capacity(retained);
    let mut chis = DMatrix::zeros(n, retained);
    for s in 0..retained {
        kappas.push(vals[s]);
        let col = vecs.column(s);
        let mut chi: Vec<f64> = (0..n).map(|i| col[i] / sqrt_w[i]).collect();
        // deterministic sign: positive at the first node where |chi|
        // exceeds half its maximum
        let peak = chi.iter().fold(0.0f64, |m, &x| m.max(x.abs()));
        if let Some(first) = chi.iter().position(|&x| x.abs() > 0.5 * peak) {
            if chi[first] < 0.0 {
                for x in chi.iter_mut() {
                    *x = -*x;
                }
            }
        }
        for (i, &x) in chi.iter().enumerate() {
            chis[(i, s)] = x;
        }
    }
    Ok(ChannelSpectrum {
        l: kernel.l(),
        g: kernel.g(),
        grid: grid.clone(),
        kappas,
        chis,
    })
}

/// `tr rho_l^2 = sum_s lambda_s^2` from the spectrum. The matrix route
/// without an eigendecomposition is
/// [`PartialWaveKernel::purity`](crate::partial_waves::PartialWaveKernel::purity);
/// the two are cross-checked in the tests.
pub fn channel_purity(spectrum: &ChannelSpectrum) -> f64 {
    spectrum.kappas.iter().map(|k| k.powi(4)).sum()
}

/// `Omega_l = sum lambda^2 / (sum lambda)^2`, the purity of the
/// trace-normalized channel; 1 for a rank-1 (radially uncorrelated)
/// channel.
pub fn channel_participation(spectrum: &ChannelSpectrum) -> Result<f64> {
    let eta = spectrum.eta();
    if eta <= 1e-14 {
        return Err(Error::UndefinedChannel(format!(
            "channel l = {} has occupancy {eta:.3e}",
            spectrum.l
        )));
    }
    Ok(channel_purity(spectrum) / (eta * eta))
}

/// Angular factor carried by a real Schmidt mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AngularKind {
    /// `1/sqrt(2 pi)`, the only kind at l = 0
    Isotropic,
    /// `cos(l phi)/sqrt(pi)`
    Cosine,
    /// `sin(l phi)/sqrt(pi)`
    Sine,
}

/// One real 2D Schmidt mode `chi(r)/sqrt(r) * angular(phi)`.
#[derive(Debug, Clone)]
pub struct SchmidtMode {
    pub s: usize,
    pub l: usize,
    pub kind: AngularKind,
    pub kappa: f64,
    chi: DVector<f64>,
    grid: Arc<RadialGrid>,
}

impl SchmidtMode {
    pub fn chi(&self) -> &DVector<f64> {
        &self.chi
    }

    pub fn angular(&self, phi: f64) -> f64 {
        use std::f64::consts::PI;
        match self.kind {
            AngularKind::Isotropic => 1.0 / (2.0 * PI).sqrt(),
            AngularKind::Cosine => (self.l as f64 * phi).cos() / PI.sqrt(),
            AngularKind::Sine => (self.l as f64 * phi).sin() / PI.sqrt(),
        }
    }

    /// Mode value at grid node `i` and angle `phi`.
    pub fn eval_node(&self, i: usize, phi: f64) -> f64 {
        self.chi[i] / self.grid.nodes()[i].sqrt() * self.angular(phi)
    }
}

/// Real orthonormal modes of a channel: one isotropic mode per retained
/// rank at l = 0, a cosine/sine pair sharing `chi` and `kappa` for l >= 1.
pub fn real_modes(spectrum: &ChannelSpectrum) -> Vec<SchmidtMode> {
    let mut out = Vec::new();
    for s in 0..spectrum.rank() {
        let chi = spectrum.chis.column(s).into_owned();
        let base = SchmidtMode {
            s,
            l: spectrum.l,
            kind: AngularKind::Isotropic,
            kappa: spectrum.kappas[s],
            chi,
            grid: spectrum.grid.clone(),
        };
        if spectrum.l == 0 {
            out.push(base);
        } else {
            let mut cosine = base.clone();
            cosine.kind = AngularKind::Cosine;
            let mut sine = base;
            sine.kind = AngularKind::Sine;
            out.push(cosine);
            out.push(sine);
        }
    }
    out
}

/// Channel spectra for l = 0..=l_max plus tail bookkeeping; the
/// reconstruction entry point.
#[derive(Debug, Clone)]
pub struct SchmidtExpansion {
    spectra: Vec<ChannelSpectrum>,
    /// set when the channel list was cut off before its occupancy tail
    /// dropped below threshold
    pub tail_warning: bool,
}

impl SchmidtExpansion {
    pub fn new(spectra: Vec<ChannelSpectrum>, tail_warning: bool) -> Result<Self> {
        if spectra.is_empty() {
            return Err(Error::InvalidInput("no channel spectra supplied".into()));
        }
        for (l, s) in spectra.iter().enumerate() {
            if s.l() != l {
                return Err(Error::InvalidInput(format!(
                    "spectra must cover l = 0..=l_max contiguously; slot {l} holds l = {}",
                    s.l()
                )));
            }
        }
        Ok(SchmidtExpansion {
            spectra,
            tail_warning,
        })
    }

    pub fn spectra(&self) -> &[ChannelSpectrum] {
        &self.spectra
    }

    pub fn l_max(&self) -> usize {
        self.spectra.len() - 1
    }
}

/// Evaluate `chi_s/sqrt(r)` at an arbitrary radius by the Nystrom
/// extension `chi(r) = (1/kappa) sum_j w_j A_l(r, r_j) chi(r_j)`, where the
/// off-node kernel column comes from a fresh angular quadrature of psi.
fn chi_over_sqrt_r_extended(
    w: &SpatialWavefunction,
    angular: &AngularGrid,
    spectrum: &ChannelSpectrum,
    s: usize,
    r: f64,
) -> f64 {
    let grid = spectrum.grid();
    let nodes = grid.nodes();
    let weights = grid.weights();
    let l = spectrum.l() as f64;
    let mut acc = 0.0;
    for (j, (&rj, &wj)) in nodes.iter().zip(weights).enumerate() {
        // A_l(r, r_j) / sqrt(r) = sqrt(r_j) * int psi cos(l theta) dtheta
        let mut th_sum = 0.0;
        for t in angular.nodes() {
            th_sum += w.eval(r, rj, t) * (l * t).cos();
        }
        acc += wj * rj.sqrt() * th_sum * angular.weight() * spectrum.chis[(j, s)];
    }
    acc / spectrum.kappas[s]
}

/// Truncated Schmidt reconstruction of psi at `(r1, r2, theta)` keeping at
/// most `max_rank` ranks per channel. Node radii use stored samples; other
/// radii use the Nystrom extension.
pub fn reconstruct_psi(
    w: &SpatialWavefunction,
    angular: &AngularGrid,
    expansion: &SchmidtExpansion,
    max_rank: usize,
    r1: f64,
    r2: f64,
    theta: f64,
) -> Result<f64> {
    use std::f64::consts::PI;
    if max_rank == 0 {
        return Err(Error::InvalidInput("max_rank must be >= 1".into()));
    }
    let mut total = 0.0;
    for spectrum in expansion.spectra() {
        let l = spectrum.l();
        let ranks = spectrum.rank().min(max_rank);
        if ranks == 0 {
            continue;
        }
        let grid = spectrum.grid();
        let phi_of = |s: usize, r: f64| -> f64 {
            match grid.node_index(r) {
                Some(i) => spectrum.chis[(i, s)] / r.sqrt(),
                None => chi_over_sqrt_r_extended(w, angular, spectrum, s, r),
            }
        };
        let ang = if l == 0 {
            1.0 / (2.0 * PI)
        } else {
            (l as f64 * theta).cos() / PI
        };
        for s in 0..ranks {
            total += spectrum.kappas[s] * phi_of(s, r1) * phi_of(s, r2) * ang;
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::build_radial_grid;
    use crate::partial_waves::{compute_kernels, kernel_parity_overlap};
    use crate::radial::solve_ground_radial;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn setup_k(
        g: f64,
        k_basis: usize,
        n: usize,
        m: usize,
        l_max: usize,
    ) -> (SpatialWavefunction, Arc<RadialGrid>, Vec<PartialWaveKernel>) {
        let r_max = 2.0 * (g / 2.0).powf(1.0 / 3.0) + 10.0;
        let grid = Arc::new(build_radial_grid(n, r_max).unwrap());
        let w = SpatialWavefunction::from_solution(
            solve_ground_radial(g, k_basis, 1.0, grid.clone()).unwrap(),
        )
        .unwrap();
        let ang = AngularGrid::new(m).unwrap();
        let kernels = compute_kernels(&w, &grid, &ang, l_max).unwrap();
        (w, grid, kernels)
    }

    fn setup(g: f64, n: usize, m: usize, l_max: usize) -> (SpatialWavefunction, Arc<RadialGrid>, Vec<PartialWaveKernel>) {
        setup_k(g, 50, n, m, l_max)
    }

    #[test]
    fn free_limit_is_rank_one() {
        let (_, grid, kernels) = setup(0.0, 200, 64, 1);
        let spec = schmidt_decompose(&kernels[0]).unwrap();
        assert_eq!(spec.rank(), 1, "kappas: {:?}", &spec.kappas()[..spec.rank().min(4)]);
        assert_abs_diff_eq!(spec.kappas()[0], 1.0, epsilon = 1e-8);
        // chi_0 = 2 sqrt(r) e^{-r^2}: kappa = 1 with int chi^2 dr = 1
        for (i, &r) in grid.nodes().iter().enumerate().step_by(19) {
            let exact = 2.0 * r.sqrt() * (-r * r).exp();
            assert_abs_diff_eq!(spec.chi(0)[i], exact, epsilon = 1e-8);
        }
        assert_abs_diff_eq!(channel_purity(&spec), 1.0, epsilon = 1e-8);
        assert_abs_diff_eq!(channel_participation(&spec).unwrap(), 1.0, epsilon = 1e-10);
        // l = 1 channel is numerically zero
        let spec1 = schmidt_decompose(&kernels[1]).unwrap();
        assert!(spec1.eta() <= 1e-10);
        assert!(channel_participation(&spec1).is_err());
        assert!(channel_purity(&spec1) <= 1e-10);
    }

    #[test]
    fn trace_identities() {
        let (_, _, kernels) = setup(2.0f64.sqrt(), 240, 128, 6);
        for k in &kernels {
            let spec = schmidt_decompose(k).unwrap();
            // sum kappa^2 = eta from the kernel (trace vs eigen-sum)
            assert_abs_diff_eq!(spec.eta(), k.occupancy(), epsilon = 1e-10);
            // spectral purity = matrix purity
            assert_abs_diff_eq!(channel_purity(&spec), k.purity(), epsilon = 1e-10);
            // Cauchy-Schwarz: tr rho^2 <= eta^2
            assert!(channel_purity(&spec) <= spec.eta() * spec.eta() + 1e-12);
        }
    }

    #[test]
    fn orbitals_are_orthonormal() {
        let (_, grid, kernels) = setup(5.0, 220, 128, 2);
        let spec = schmidt_decompose(&kernels[1]).unwrap();
        let s_max = spec.rank().min(6);
        for a in 0..s_max {
            for b in 0..s_max {
                let dot = grid.inner(spec.chi(a).as_slice(), spec.chi(b).as_slice());
                let expect = if a == b { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(dot, expect, epsilon = 1e-8);
            }
        }
    }

    #[test]
    fn kernel_reconstruction_over_retained_ranks() {
        let (_, grid, kernels) = setup(2.0f64.sqrt(), 160, 96, 3);
        for k in &kernels[..2] {
            let spec = schmidt_decompose(k).unwrap();
            let n = grid.len();
            let mut err = 0.0f64;
            let mut nrm = 0.0f64;
            for i in 0..n {
                for j in 0..n {
                    let mut rec = 0.0;
                    for s in 0..spec.rank() {
                        rec += spec.kappas()[s] * spec.chis[(i, s)] * spec.chis[(j, s)];
                    }
                    let ww = grid.weights()[i] * grid.weights()[j];
                    err += ww * (rec - k.values()[(i, j)]).powi(2);
                    nrm += ww * k.values()[(i, j)].powi(2);
                }
            }
            assert!(
                (err / nrm).sqrt() <= 1e-8,
                "l = {}: reconstruction error {}",
                k.l(),
                (err / nrm).sqrt()
            );
        }
    }

    #[test]
    fn resolution_doubling_oracle() {
        // retained occupancies shift by < 1e-6 when the radial grid doubles
        let g = 2.0f64.sqrt();
        let (_, _, k1) = setup(g, 360, 132, 0);
        let (_, _, k2) = setup(g, 720, 132, 0);
        let s1 = schmidt_decompose(&k1[0]).unwrap();
        let s2 = schmidt_decompose(&k2[0]).unwrap();
        for s in 0..8 {
            let d = (s1.lambdas()[s] - s2.lambdas()[s]).abs();
            assert!(d <= 1e-6, "lambda_{s} moved by {d} under grid doubling");
        }
    }

    #[test]
    fn participation_examples() {
        let grid = Arc::new(build_radial_grid(32, 5.0).unwrap());
        let mk = |kappas: Vec<f64>| ChannelSpectrum {
            l: 0,
            g: 0.0,
            grid: grid.clone(),
            chis: DMatrix::zeros(32, kappas.len()),
            kappas,
        };
        assert_abs_diff_eq!(channel_participation(&mk(vec![0.7])).unwrap(), 1.0);
        let two = mk(vec![0.5, -0.5]);
        assert_abs_diff_eq!(channel_participation(&two).unwrap(), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn real_mode_structure() {
        let (_, grid, kernels) = setup(5.0, 200, 128, 2);
        let spec0 = schmidt_decompose(&kernels[0]).unwrap();
        let modes0 = real_modes(&spec0);
        assert_eq!(modes0.len(), spec0.rank());
        assert!(modes0.iter().all(|m| m.kind == AngularKind::Isotropic));

        let spec1 = schmidt_decompose(&kernels[1]).unwrap();
        let modes1 = real_modes(&spec1);
        assert_eq!(modes1.len(), 2 * spec1.rank());
        // cosine/sine pairs share kappa, and <nu|upsilon> = 0 by angular
        // orthogonality under the full 2D inner product
        let ang = AngularGrid::new(64).unwrap();
        let (nu, upsilon) = (&modes1[0], &modes1[1]);
        assert_eq!(nu.kappa, upsilon.kappa);
        let mut dot = 0.0;
        for i in 0..grid.len() {
            for phi in ang.nodes() {
                dot += grid.weights()[i] * grid.nodes()[i]
                    * nu.eval_node(i, phi)
                    * upsilon.eval_node(i, phi)
                    * ang.weight();
            }
        }
        assert_abs_diff_eq!(dot, 0.0, epsilon = 1e-10);
    }

    #[test]
    fn near_rank_one_at_strong_coupling() {
        let (_, _, kernels) = setup(100.0, 300, 160, 6);
        for k in &kernels {
            if k.occupancy() > 1e-3 {
                let spec = schmidt_decompose(k).unwrap();
                let frac = spec.lambdas()[0] / spec.eta();
                assert!(
                    frac >= 0.95,
                    "l = {}: lambda_0/eta = {frac} below near-rank-1 bound",
                    k.l()
                );
            }
        }
    }

    #[test]
    fn strong_coupling_parity_alternation() {
        // paper's A_l -> (-1)^l A at large finite coupling, variational side
        let (_, _, kernels) = setup_k(1000.0, 80, 420, 160, 2);
        let o01 = kernel_parity_overlap(&kernels[0], &kernels[1]).unwrap();
        let o12 = kernel_parity_overlap(&kernels[1], &kernels[2]).unwrap();
        assert!(o01 <= -0.99, "overlap(0,1) = {o01}");
        assert!(o12 <= -0.99, "overlap(1,2) = {o12}");
    }

    #[test]
    fn reconstruction_free_limit_and_taut() {
        // g = 0: single channel, single rank reproduces psi pointwise
        let (w, grid, kernels) = setup(0.0, 200, 64, 0);
        let ang = AngularGrid::new(64).unwrap();
        let exp = SchmidtExpansion::new(vec![schmidt_decompose(&kernels[0]).unwrap()], false).unwrap();
        for &(i, j, th) in &[(10usize, 40usize, 0.3), (80, 80, 2.2), (30, 150, 3.9)] {
            let (r1, r2) = (grid.nodes()[i], grid.nodes()[j]);
            let rec = reconstruct_psi(&w, &ang, &exp, 1, r1, r2, th).unwrap();
            assert_abs_diff_eq!(rec, w.eval(r1, r2, th), epsilon = 1e-8);
        }
        // off-node radii go through the Nystrom extension
        let rec = reconstruct_psi(&w, &ang, &exp, 1, 0.77, 1.31, 1.0).unwrap();
        assert_abs_diff_eq!(rec, w.eval(0.77, 1.31, 1.0), epsilon = 1e-8);
    }

    #[test]
    fn reconstruction_error_full_and_rank_one() {
        // relative L2 errors of the truncated expansions, measured by grid
        // quadrature against the evaluator
        let g = 20.0;
        let (w, grid, kernels) = setup(g, 140, 96, 5);
        let ang = AngularGrid::new(96).unwrap();
        let spectra: Vec<_> = kernels.iter().map(|k| schmidt_decompose(k).unwrap()).collect();
        let exp = SchmidtExpansion::new(spectra, false).unwrap();
        let rel_l2 = |max_rank: usize| {
            let mut err2 = 0.0;
            let mut nrm2 = 0.0;
            for (i, &r1) in grid.nodes().iter().enumerate() {
                for (j, &r2) in grid.nodes().iter().enumerate() {
                    for t in ang.nodes() {
                        let p = w.eval(r1, r2, t);
                        let q = reconstruct_psi(&w, &ang, &exp, max_rank, r1, r2, t).unwrap();
                        let ww = grid.weights()[i] * grid.weights()[j] * r1 * r2 * ang.weight();
                        err2 += ww * (p - q) * (p - q);
                        nrm2 += ww * p * p;
                    }
                }
            }
            (err2 / nrm2).sqrt()
        };
        // rank-1 per channel: error set by the dropped occupancies,
        // sqrt(1 - sum_l (2 - delta_l0) lambda_{0,l}); ~0.13 at g = 20
        let identity_route = {
            let dropped: f64 = exp
                .spectra()
                .iter()
                .map(|s| {
                    let mult = if s.l() == 0 { 1.0 } else { 2.0 };
                    mult * (s.eta() - s.lambdas()[0])
                })
                .sum();
            dropped.sqrt()
        };
        let e1 = rel_l2(1);
        assert!(
            (e1 - identity_route).abs() <= 0.02 * identity_route,
            "rank-1 L2 error {e1} vs occupancy route {identity_route}"
        );
        assert!(e1 > 0.10 && e1 < 0.15, "rank-1 error at g=20: {e1}");
        // full retained ranks: limited only by the angular tail
        let ef = rel_l2(64);
        assert!(ef <= 1e-3, "full-rank reconstruction error {ef}");
    }

    #[test]
    fn reconstruction_is_independent_of_individual_angles() {
        // sum kappa [nu(1)nu(2) + ups(1)ups(2)] depends on phi2 - phi1 only
        let (w, grid, kernels) = setup(5.0, 160, 96, 3);
        let ang = AngularGrid::new(96).unwrap();
        let spectra: Vec<_> = kernels.iter().map(|k| schmidt_decompose(k).unwrap()).collect();
        let exp = SchmidtExpansion::new(spectra, false).unwrap();
        let modes: Vec<SchmidtMode> = exp.spectra().iter().flat_map(real_modes).collect();
        let (i, j) = (40usize, 90usize);
        let theta = 1.7;
        let via_modes = |phi1: f64| -> f64 {
            modes
                .iter()
                .map(|m| m.kappa * m.eval_node(i, phi1) * m.eval_node(j, phi1 + theta))
                .sum()
        };
        let direct = reconstruct_psi(
            &w,
            &ang,
            &exp,
            usize::MAX,
            grid.nodes()[i],
            grid.nodes()[j],
            theta,
        )
        .unwrap();
        for phi1 in [0.0, 0.9, 2.4, 5.1] {
            assert_abs_diff_eq!(via_modes(phi1), direct, epsilon = 1e-10);
        }
    }

    #[test]
    fn expansion_requires_contiguous_channels() {
        let (_, _, kernels) = setup(0.5, 120, 96, 2);
        let s0 = schmidt_decompose(&kernels[0]).unwrap();
        let s2 = schmidt_decompose(&kernels[2]).unwrap();
        assert!(SchmidtExpansion::new(vec![s0.clone(), s2], false).is_err());
        assert!(SchmidtExpansion::new(vec![], false).is_err());
        assert!(SchmidtExpansion::new(vec![s0], false).is_ok());
    }
}
