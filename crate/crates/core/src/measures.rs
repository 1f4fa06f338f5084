//! Entanglement diagnostics assembled from the channel purities.
//!
//! The reduced density matrix of the singlet factors into the spatial part
//! times `diag(1/2, 1/2)` in spin, so the purity of the full RDM is
//! `tr rho_red^2 = (1/2) tr rho^2` with
//! `tr rho^2 = tr rho_0^2 + 2 sum_{l>=1} tr rho_l^2`. The participation
//! ratio is the inverse of that half purity; the effective Slater rank is
//! half the participation ratio; the linear entropy is `1 - 1/R`.

use crate::error::{Error, Result};

/// Guard against quadrature noise flipping an integer-part test: values
/// within 1e-9 below an integer are rounded up before taking the floor.
pub fn guarded_floor(x: f64) -> i64 {
    (x + 1e-9).floor() as i64
}

/// `tr rho^2` from the channel purities (`l >= 1` doubled).
pub fn spatial_purity(channel_purities: &[f64]) -> f64 {
    match channel_purities.split_first() {
        Some((p0, rest)) => p0 + 2.0 * rest.iter().sum::<f64>(),
        None => 0.0,
    }
}

/// Participation ratio `R = [p_0/2 + sum_{l>=1} p_l]^{-1}` from the
/// channel purities `p_l = tr rho_l^2` for `l = 0..=l_max`. The factor
/// 1/2 on the l = 0 term is the spin-singlet contribution.
pub fn participation_ratio(channel_purities: &[f64]) -> Result<f64> {
    let (p0, rest) = channel_purities
        .split_first()
        .ok_or_else(|| Error::InvalidInput("channel purity list is empty".into()))?;
    let denom = 0.5 * p0 + rest.iter().sum::<f64>();
    if !(denom > 0.0) {
        return Err(Error::InvalidInput(format!(
            "purity sum must be positive, got {denom}"
        )));
    }
    Ok(1.0 / denom)
}

/// `SR = R / 2`; a Slater determinant uses two spin-orbitals, so the
/// participation ratio double counts.
pub fn effective_slater_rank(r: f64) -> Result<f64> {
    if r < 2.0 - 1e-9 {
        return Err(Error::Consistency(format!(
            "participation ratio {r} below the singlet floor of 2; upstream normalization is broken"
        )));
    }
    Ok(r / 2.0)
}

/// Linear entropy `L = 1 - 1/R`.
pub fn linear_entropy(r: f64) -> f64 {
    1.0 - 1.0 / r
}

/// Result of the partial-wave counting procedure.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PartialWaveCount {
    /// Minimal number of terms of the participation-ratio sum whose
    /// truncated R shares its integer part with the converged value.
    pub count: usize,
    /// Set when no truncation matched within the available channels; the
    /// count then saturates at the channel-list length.
    pub saturated: bool,
}

/// Smallest `N` such that `floor(R_approx(N)) = floor(R_exact)`, where
/// `R_approx(N)` keeps channels `l = 0..N-1` in the purity sum.
pub fn partial_wave_count(channel_purities: &[f64], exact_r: f64) -> Result<PartialWaveCount> {
    if channel_purities.is_empty() {
        return Err(Error::InvalidInput("channel purity list is empty".into()));
    }
    let target = guarded_floor(exact_r);
    for n in 1..=channel_purities.len() {
        let r_approx = participation_ratio(&channel_purities[..n])?;
        if guarded_floor(r_approx) == target {
            return Ok(PartialWaveCount {
                count: n,
                saturated: false,
            });
        }
    }
    Ok(PartialWaveCount {
        count: channel_purities.len(),
        saturated: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn uncorrelated_singlet() {
        let r = participation_ratio(&[1.0]).unwrap();
        assert_abs_diff_eq!(r, 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(effective_slater_rank(r).unwrap(), 1.0);
        assert_abs_diff_eq!(linear_entropy(r), 0.5);
        let n = partial_wave_count(&[1.0], r).unwrap();
        assert_eq!(n, PartialWaveCount { count: 1, saturated: false });
    }

    #[test]
    fn arithmetic_contract() {
        let r = participation_ratio(&[0.25, 0.25]).unwrap();
        assert_abs_diff_eq!(r, 8.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(effective_slater_rank(8.0 / 3.0).unwrap(), 4.0 / 3.0);
        assert_abs_diff_eq!(linear_entropy(4.0), 0.75);
        assert!(linear_entropy(1e12) > 1.0 - 1e-11);
    }

    #[test]
    fn purity_decomposition() {
        let p = [0.3, 0.1, 0.05];
        assert_abs_diff_eq!(spatial_purity(&p), 0.3 + 2.0 * 0.15, epsilon = 1e-15);
    }

    #[test]
    fn consistency_guard() {
        assert!(effective_slater_rank(1.5).is_err());
        assert!(effective_slater_rank(2.0 - 1e-10).is_ok());
        assert!(participation_ratio(&[]).is_err());
        assert!(partial_wave_count(&[], 2.0).is_err());
    }

    #[test]
    fn synthetic_partial_wave_count() {
        // exact R = 5.7; the three-term truncation is the first whose
        // integer part reaches 5
        let p = [0.31, 0.01, 0.0075, 1.0 / 5.7 - 0.155 - 0.0175];
        let r = participation_ratio(&p).unwrap();
        assert_abs_diff_eq!(r, 5.7, epsilon = 1e-12);
        assert!(participation_ratio(&p[..2]).unwrap() > 6.0);
        let got = partial_wave_count(&p, r).unwrap();
        assert_eq!(got, PartialWaveCount { count: 3, saturated: false });
    }

    #[test]
    fn saturation_is_flagged() {
        // truncations never reach the (fictitious) target floor
        let got = partial_wave_count(&[0.31, 0.01], 3.2).unwrap();
        assert_eq!(got, PartialWaveCount { count: 2, saturated: true });
    }

    #[test]
    fn floor_guard_rounds_up_noise() {
        assert_eq!(guarded_floor(4.9999999996), 5);
        assert_eq!(guarded_floor(5.0000000002), 5);
        assert_eq!(guarded_floor(5.3), 5);
        assert_eq!(guarded_floor(4.99), 4);
    }

    proptest! {
        #[test]
        fn approximants_decrease_toward_r(
            purities in proptest::collection::vec(1e-6f64..0.5, 1..10),
        ) {
            let r = participation_ratio(&purities).unwrap();
            let mut prev = f64::INFINITY;
            for n in 1..=purities.len() {
                let ra = participation_ratio(&purities[..n]).unwrap();
                prop_assert!(ra <= prev + 1e-12);
                prop_assert!(ra >= r - 1e-12);
                prev = ra;
            }
            // L = 1 - 1/R identity
            let l = linear_entropy(r);
            prop_assert!((l - (1.0 - 1.0 / r)).abs() < 1e-15);
        }
    }
}
