//! The published numerical studies, shared by the CLI and the test suites.

use rayon::prelude::*;

use crate::chain::{pstar_p_spectrum, ProbabilityVector, SpectralData, StochasticMatrix, DEFAULT_KPOW, DEFAULT_TOL};
use crate::coarse::Partition;
use crate::diagnostics::{error_operator, report_with_spectrum, rho_hat_p, rho_j_direct, is_reversible, RateReport};
use crate::error::Result;
use crate::models::{grid2d, split1d, stripes2d, uniform1d, ModelConfig};

/// Mixing weights of the irreversible one-dimensional family.
pub const ALPHAS: [f64; 3] = [0.0, 0.05, 0.15];

/// A chain together with its steady state and the spectrum of `P^* P`.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub chain: StochasticMatrix,
    pub mu: ProbabilityVector,
    pub spectrum: SpectralData,
}

impl Prepared {
    pub fn new(cfg: &ModelConfig) -> Result<Self> {
        let model = cfg.build()?;
        let mu = model.steady_state(DEFAULT_TOL, DEFAULT_KPOW)?;
        let spectrum = pstar_p_spectrum(&model.chain, &mu)?;
        Ok(Prepared { chain: model.chain, mu, spectrum })
    }

    /// The one-dimensional chain mixed with the shift at weight `alpha`.
    pub fn ring(alpha: f64) -> Result<Self> {
        Self::new(&ModelConfig { alpha, ..ModelConfig::reference_1d() })
    }

    pub fn report(&self, part: &Partition, k_list: &[usize]) -> Result<RateReport> {
        report_with_spectrum(&self.chain, &self.mu, &self.spectrum, part, k_list)
    }

    pub fn rho_j(&self, part: &Partition) -> Result<f64> {
        rho_j_direct(&error_operator(&self.chain, &self.mu, part)?)
    }

    pub fn rho_hat_p(&self) -> Result<f64> {
        let rev = is_reversible(&self.chain, &self.mu)?;
        rho_hat_p(&self.chain, &self.mu, &self.spectrum, rev)
    }

    /// `sqrt(lambda_1), ..., sqrt(lambda_count)`.
    pub fn leading_sqrt_lambdas(&self, count: usize) -> Vec<f64> {
        (0..count.min(self.spectrum.dim())).map(|k| self.spectrum.sqrt_lambda(k)).collect()
    }
}

/// `rho(P_hat_alpha)` for each `alpha`.
pub fn power_rates(alphas: &[f64]) -> Result<Vec<(f64, f64)>> {
    alphas
        .par_iter()
        .map(|&a| Ok((a, Prepared::ring(a)?.rho_hat_p()?)))
        .collect()
}

/// The two partitions of the two-dimensional study: three stripes and a
/// six-by-six grid.
pub fn grid_partitions(cfg: &ModelConfig) -> Result<[Partition; 2]> {
    Ok([
        stripes2d(cfg.n, 3, cfg.spacing)?,
        grid2d(cfg.n, 6, cfg.spacing)?,
    ])
}

/// Reports for the three-stripe and six-by-six partitions of the
/// two-dimensional chain, with angle bounds for `k = 2, 3`.
pub fn grid_study(cfg: &ModelConfig) -> Result<(Prepared, [RateReport; 2])> {
    let prep = Prepared::new(cfg)?;
    let [stripes, blocks] = grid_partitions(cfg)?;
    let (a, b) = rayon::join(|| prep.report(&stripes, &[2, 3]), || prep.report(&blocks, &[2, 3]));
    Ok((prep, [a?, b?]))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShiftRow {
    pub ell: usize,
    pub rho: f64,
    pub norm_bound: f64,
    pub angle_bound: f64,
}

/// Two-block partitions `{0..ell}`, `{ell+1..N-1}` for every admissible `ell`,
/// with the angle bound at `k`.
pub fn shift_study(prep: &Prepared, k: usize) -> Result<Vec<ShiftRow>> {
    let n = prep.chain.dim();
    (0..n.saturating_sub(1))
        .into_par_iter()
        .map(|ell| {
            let r = prep.report(&split1d(n, ell)?, &[k])?;
            Ok(ShiftRow {
                ell,
                rho: r.rho_j,
                norm_bound: r.norm_bound,
                angle_bound: r.angle_bounds[&k].bound,
            })
        })
        .collect()
}

/// Largest `rho(J)` over the rotations `ell = 0..=N/n` of the uniform
/// `n`-block partition.
pub fn max_rho_uniform(prep: &Prepared, n: usize) -> Result<f64> {
    let len = prep.chain.dim();
    let rhos: Vec<f64> = (0..=len / n)
        .into_par_iter()
        .map(|ell| prep.rho_j(&uniform1d(len, n, ell)?))
        .collect::<Result<_>>()?;
    Ok(rhos.into_iter().fold(0.0, f64::max))
}

/// `(n, alpha, max rho)` for `n = 1..=max_n` and each `alpha`, on the ring
/// model `base` with its mixing weight replaced.
pub fn refinement_study(base: &ModelConfig, alphas: &[f64], max_n: usize) -> Result<Vec<(usize, f64, f64)>> {
    let mut rows = Vec::new();
    for &alpha in alphas {
        let prep = Prepared::new(&ModelConfig { alpha, ..base.clone() })?;
        let maxima: Vec<f64> = (1..=max_n)
            .into_par_iter()
            .map(|n| max_rho_uniform(&prep, n))
            .collect::<Result<_>>()?;
        rows.extend(maxima.into_iter().enumerate().map(|(i, r)| (i + 1, alpha, r)));
    }
    rows.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn leading_values_of_ring() {
        let prep = Prepared::ring(0.0).unwrap();
        let s = prep.leading_sqrt_lambdas(5);
        assert!((s[0] - 1.0).abs() < 1e-12);
        assert!((s[1] - 0.999992).abs() < 2e-5);
        assert!((prep.rho_hat_p().unwrap() - s[1]).abs() < 1e-12);
    }

    #[test]
    fn single_block_maximum_is_power_rate() {
        let prep = Prepared::ring(0.05).unwrap();
        let m = max_rho_uniform(&prep, 1).unwrap();
        assert!((m - prep.rho_hat_p().unwrap()).abs() < 1e-9);
    }

    #[test]
    fn refinement_rows_are_sorted() {
        let rows = refinement_study(&ModelConfig::reference_1d(), &[0.0, 0.15], 2).unwrap();
        let keys: Vec<(usize, f64)> = rows.iter().map(|r| (r.0, r.1)).collect();
        assert_eq!(keys, vec![(1, 0.0), (1, 0.15), (2, 0.0), (2, 0.15)]);
    }
}
