//! Quadrature grids and the symmetric eigendecomposition shared by the
//! rest of the crate.
//!
//! Radial integrals use Gauss-Legendre on a truncated interval `[0, r_max]`;
//! the kernels are Gaussian-damped but drift to large radii at strong
//! coupling, and a truncated rule with an adaptive `r_max` covers both
//! regimes uniformly. Angular integrals use the uniform trapezoid rule,
//! which is spectrally accurate for periodic integrands and lets one set
//! of wavefunction samples serve every angular momentum channel.

use nalgebra::{DMatrix, DVector};
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
///
/// Newton iteration on the Legendre recurrence; nodes accurate to a few
/// ulps for the orders used here (n up to ~1000).
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "gauss_legendre needs at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for j in 0..m {
        // Tricomi-style initial guess for the j-th root of P_n.
        let mut x = (PI * (j as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // p0, p1 walk the three-term recurrence up to P_n.
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 1..n {
                let kf = k as f64;
                let p2 = ((2.0 * kf + 1.0) * x * p1 - kf * p0) / (kf + 1.0);
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                // one clean-up step after convergence
                let mut q0 = 1.0;
                let mut q1 = x;
                for k in 1..n {
                    let kf = k as f64;
                    let q2 = ((2.0 * kf + 1.0) * x * q1 - kf * q0) / (kf + 1.0);
                    q0 = q1;
                    q1 = q2;
                }
                dp = n as f64 * (x * q1 - q0) / (x * x - 1.0);
                x -= q1 / dp;
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[j] = -x;
        weights[j] = w;
        nodes[n - 1 - j] = x;
        weights[n - 1 - j] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// Radial quadrature rule on `(0, r_max)`.
///
/// Nodes are strictly increasing and interior; weights are positive and
/// sum to `r_max`. All kernel matrices in the crate are sampled on one
/// shared grid.
#[derive(Debug, Clone)]
pub struct RadialGrid {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    r_max: f64,
}

/// Gauss-Legendre rule mapped affinely from `[-1, 1]` to `[0, r_max]`.
pub fn build_radial_grid(n_points: usize, r_max: f64) -> Result<RadialGrid> {
    if n_points < 16 {
        return Err(Error::Config(format!(
            "radial grid needs at least 16 points, got {n_points}"
        )));
    }
    if !(r_max > 0.0) || !r_max.is_finite() {
        return Err(Error::Config(format!("r_max must be positive, got {r_max}")));
    }
    let (x, w) = gauss_legendre(n_points);
    let half = 0.5 * r_max;
    let nodes: Vec<f64> = x.iter().map(|&xi| half * (xi + 1.0)).collect();
    let weights: Vec<f64> = w.iter().map(|&wi| half * wi).collect();
    Ok(RadialGrid {
        nodes,
        weights,
        r_max,
    })
}

impl RadialGrid {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    /// Quadrature of `f` over `(0, r_max)`.
    pub fn integrate(&self, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&r, &w)| w * f(r))
            .sum()
    }

    /// Weighted inner product of two functions sampled on the nodes.
    pub fn inner(&self, u: &[f64], v: &[f64]) -> f64 {
        debug_assert_eq!(u.len(), self.len());
        debug_assert_eq!(v.len(), self.len());
        self.weights
            .iter()
            .zip(u.iter().zip(v))
            .map(|(&w, (&a, &b))| w * a * b)
            .sum()
    }

    /// Index of the node closest to `r`, if it matches to tight tolerance.
    pub fn node_index(&self, r: f64) -> Option<usize> {
        let idx = self
            .nodes
            .partition_point(|&x| x < r)
            .min(self.nodes.len() - 1);
        let mut best = idx;
        if idx > 0 && (self.nodes[idx - 1] - r).abs() < (self.nodes[idx] - r).abs() {
            best = idx - 1;
        }
        if (self.nodes[best] - r).abs() <= 1e-12 * self.r_max {
            Some(best)
        } else {
            None
        }
    }
}

/// Uniform angular grid `theta_k = 2 pi k / M` with weight `2 pi / M`.
#[derive(Debug, Clone)]
pub struct AngularGrid {
    m_points: usize,
}

impl AngularGrid {
    pub fn new(m_points: usize) -> Result<Self> {
        if m_points < 4 {
            return Err(Error::Config(format!(
                "angular grid needs at least 4 points, got {m_points}"
            )));
        }
        Ok(AngularGrid { m_points })
    }

    pub fn m_points(&self) -> usize {
        self.m_points
    }

    pub fn weight(&self) -> f64 {
        2.0 * PI / self.m_points as f64
    }

    pub fn node(&self, k: usize) -> f64 {
        2.0 * PI * k as f64 / self.m_points as f64
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.m_points).map(|k| self.node(k))
    }

    /// Largest angular momentum representable without aliasing.
    pub fn max_l(&self) -> usize {
        self.m_points / 2 - 1
    }
}

/// Eigendecomposition of a real symmetric matrix.
///
/// The input is symmetrized as `(M + M^T)/2` before solving. Eigenvalues
/// come back ordered by descending absolute value (Schmidt coefficients
/// may be negative while occupancies rank by magnitude) with the matching
/// orthonormal eigenvectors as columns.
pub fn symmetric_eigendecompose(m: &DMatrix<f64>) -> Result<(DVector<f64>, DMatrix<f64>)> {
    if m.nrows() != m.ncols() {
        return Err(Error::InvalidInput(format!(
            "matrix must be square, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    if m.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidInput(
            "matrix contains non-finite entries".into(),
        ));
    }
    let n = m.nrows();
    let sym = 0.5 * (m + m.transpose());
    let eig = sym.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .abs()
            .partial_cmp(&eig.eigenvalues[a].abs())
            .unwrap()
    });
    let mut values = DVector::zeros(n);
    let mut vectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        values[dst] = eig.eigenvalues[src];
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    Ok((values, vectors))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn weights_sum_to_interval_length() {
        let g = build_radial_grid(16, 6.0).unwrap();
        let sum: f64 = g.weights().iter().sum();
        assert_abs_diff_eq!(sum, 6.0, epsilon = 1e-12);
    }

    #[test]
    fn nodes_interior_increasing_weights_positive() {
        let g = build_radial_grid(48, 9.0).unwrap();
        assert!(g.nodes().windows(2).all(|w| w[0] < w[1]));
        assert!(g.nodes().iter().all(|&r| r > 0.0 && r < 9.0));
        assert!(g.weights().iter().all(|&w| w > 0.0));
    }

    #[test]
    fn gaussian_moments() {
        let g = build_radial_grid(64, 8.0).unwrap();
        // normalized g=0 radial density
        let m0 = g.integrate(|r| 2.0 * r * (-r * r).exp());
        assert_abs_diff_eq!(m0, 1.0, epsilon = 1e-10);
        // closed-form moment: int r^3 e^{-r^2} dr = 1/2
        let m3 = g.integrate(|r| r.powi(3) * (-r * r).exp());
        assert_abs_diff_eq!(m3, 0.5, epsilon = 1e-10);
        // int e^{-r^2} dr = sqrt(pi)/2 once r_max >= 6
        let m = g.integrate(|r| (-r * r).exp());
        assert_abs_diff_eq!(m, PI.sqrt() / 2.0, epsilon = 1e-10);
    }

    #[test]
    fn rejects_bad_configuration() {
        assert!(build_radial_grid(8, 6.0).is_err());
        assert!(build_radial_grid(32, 0.0).is_err());
        assert!(build_radial_grid(32, -1.0).is_err());
        assert!(AngularGrid::new(2).is_err());
    }

    #[test]
    fn angular_rule_is_orthogonal_on_cosines() {
        let g = AngularGrid::new(64).unwrap();
        for m in 0..8usize {
            for mp in 1..8usize {
                let s: f64 = g
                    .nodes()
                    .map(|t| (m as f64 * t).cos() * (mp as f64 * t).cos())
                    .sum::<f64>()
                    * g.weight();
                let expect = if m == mp { PI } else { 0.0 };
                assert_abs_diff_eq!(s, expect, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn node_index_round_trip() {
        let g = build_radial_grid(32, 5.0).unwrap();
        for (i, &r) in g.nodes().iter().enumerate() {
            assert_eq!(g.node_index(r), Some(i));
        }
        assert_eq!(g.node_index(1.2345), None);
    }

    #[test]
    fn eigendecompose_identity_and_ordering() {
        let (vals, _) = symmetric_eigendecompose(&DMatrix::identity(3, 3)).unwrap();
        for i in 0..3 {
            assert_abs_diff_eq!(vals[i], 1.0, epsilon = 1e-14);
        }
        let d = DMatrix::from_diagonal(&DVector::from_vec(vec![3.0, -5.0, 2.0]));
        let (vals, _) = symmetric_eigendecompose(&d).unwrap();
        assert_eq!(
            vals.iter().copied().collect::<Vec<_>>(),
            vec![-5.0, 3.0, 2.0]
        );
    }

    #[test]
    fn eigendecompose_two_by_two() {
        let m = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let (vals, vecs) = symmetric_eigendecompose(&m).unwrap();
        let mut v: Vec<f64> = vals.iter().copied().collect();
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_abs_diff_eq!(v[0], -1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(v[1], 1.0, epsilon = 1e-14);
        let s = 1.0 / 2.0f64.sqrt();
        for c in 0..2 {
            let col = vecs.column(c);
            assert_abs_diff_eq!(col[0].abs(), s, epsilon = 1e-14);
            assert_abs_diff_eq!(col[1].abs(), s, epsilon = 1e-14);
        }
    }

    #[test]
    fn eigendecompose_rejects_bad_input() {
        assert!(symmetric_eigendecompose(&DMatrix::zeros(2, 3)).is_err());
        let mut m = DMatrix::zeros(2, 2);
        m[(0, 1)] = f64::NAN;
        assert!(symmetric_eigendecompose(&m).is_err());
    }

    #[test]
    fn eigendecompose_reconstructs_and_is_orthonormal() {
        let n = 24;
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let v = ((i * 7 + j * 3) as f64 * 0.1).sin();
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        let (vals, vecs) = symmetric_eigendecompose(&m).unwrap();
        let sym = 0.5 * (&m + m.transpose());
        let rec = &vecs * DMatrix::from_diagonal(&vals) * vecs.transpose();
        let err = (&rec - &sym).norm() / sym.norm();
        assert!(err <= 1e-10, "reconstruction error {err}");
        let gram = vecs.transpose() * &vecs;
        let orth = (&gram - DMatrix::identity(n, n)).norm();
        assert!(orth <= 1e-10, "orthonormality defect {orth}");
    }

    #[test]
    fn psd_matrix_has_nonnegative_spectrum() {
        let n = 16;
        let mut b = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                b[(i, j)] = ((i + 2 * j) as f64 * 0.07).cos();
            }
        }
        let psd = &b * b.transpose();
        let (vals, _) = symmetric_eigendecompose(&psd).unwrap();
        assert!(vals.iter().all(|&v| v >= -1e-10));
    }

    proptest! {
        // Exactness for polynomials of degree <= 2n-1 under the affine map.
        #[test]
        fn quadrature_integrates_polynomials_exactly(
            coeffs in proptest::collection::vec(-1.0f64..1.0, 1..8),
            n in 16usize..48,
        ) {
            let r_max = 3.0;
            let g = build_radial_grid(n, r_max).unwrap();
            let q = g.integrate(|r| {
                coeffs.iter().rev().fold(0.0, |acc, &c| acc * r + c)
            });
            // exact integral of sum c_k r^k
            let exact: f64 = coeffs
                .iter()
                .enumerate()
                .map(|(k, &c)| c * r_max.powi(k as i32 + 1) / (k as f64 + 1.0))
                .sum();
            let scale = 1.0 + exact.abs();
            prop_assert!((q - exact).abs() <= 1e-12 * scale);
        }

        #[test]
        fn rel_weights_follow_r_max(r_max in 0.5f64..40.0) {
            let g = build_radial_grid(24, r_max).unwrap();
            let sum: f64 = g.weights().iter().sum();
            prop_assert!((sum - r_max).abs() <= 1e-12 * r_max);
        }
    }
}
