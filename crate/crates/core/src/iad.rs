//! Iterative aggregation/disaggregation.
//!
//! Each outer step solves the coarse chain `C(mu_k) = A P D(mu_k)` for its
//! steady state `z`, disaggregates it to `D(mu_k) z`, and applies one step of
//! the fine chain.

use crate::chain::{is_irreducible, normalize_mass, power_refined_steady_state, ProbabilityVector, StochasticMatrix};
use crate::coarse::{coarse_matrix, disaggregate, Partition};
use crate::error::{Error, Result};
use crate::linalg::weighted_norm;

/// Iterates needed before a rate can be fitted.
pub const MIN_RATE_ITERATES: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IadConfig {
    /// Relative tolerance on both the change between iterates and the
    /// residual of the fine chain.
    pub tau: f64,
    /// Relative tolerance of the coarse steady-state solve.
    pub coarse_tau: f64,
    /// Applications of the lazy coarse chain per refinement round.
    pub coarse_k: usize,
    pub max_outer: usize,
}

impl Default for IadConfig {
    fn default() -> Self {
        IadConfig {
            tau: 1e-9,
            coarse_tau: 1e-9,
            coarse_k: 1 << 15,
            max_outer: 10_000,
        }
    }
}

impl IadConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tau > 0.0) || !(self.coarse_tau > 0.0) {
            return Err(Error::InvalidParameter("tolerances must be positive".into()));
        }
        if self.coarse_k == 0 {
            return Err(Error::InvalidParameter("coarse_k must be at least 1".into()));
        }
        Ok(())
    }
}

/// History of an IAD run. `iterates[0]` is the starting vector; step `k`
/// produced `iterates[k]` with change `rel_changes[k-1]` and residual
/// `residuals[k-1]`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct IadTrace {
    pub iterates: Vec<ProbabilityVector>,
    pub rel_changes: Vec<f64>,
    pub residuals: Vec<f64>,
}

impl IadTrace {
    /// Number of outer steps taken.
    pub fn steps(&self) -> usize {
        self.rel_changes.len()
    }
}

/// Steady state of an irreducible coarse chain.
pub fn coarse_steady_state(c: &StochasticMatrix, cfg: &IadConfig) -> Result<ProbabilityVector> {
    if !is_irreducible(c) {
        return Err(Error::ReducibleCoarseMatrix);
    }
    power_refined_steady_state(c, cfg.coarse_tau, cfg.coarse_k)
}

/// One coarse correction followed by one smoothing step.
pub fn iad_step(
    p: &StochasticMatrix,
    part: &Partition,
    mu_k: &ProbabilityVector,
    cfg: &IadConfig,
) -> Result<ProbabilityVector> {
    let coarse = coarse_matrix(p, mu_k, part)?;
    let z = coarse_steady_state(&coarse.matrix, cfg)?;
    let corrected = disaggregate(z.as_slice(), mu_k, part)?;
    let mut next = p.apply(&corrected);
    normalize_mass(&mut next);
    ProbabilityVector::new(next)
}

/// `max_i |a_i - b_i| / d_i`.
fn max_relative_to(a: &[f64], b: &[f64], d: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .zip(d)
        .fold(0.0, |m: f64, ((x, y), z)| {
            let diff = (x - y).abs();
            if diff == 0.0 {
                m
            } else {
                m.max(diff / z.abs())
            }
        })
}

/// Runs IAD from `mu0` until both the relative change between iterates and
/// the relative residual `|P mu - mu| / (P mu)` are at most `tau` in every
/// component.
///
/// A starting vector with zero entries is accepted; if it makes a coarse
/// chain reducible the run stops with [`Error::ReducibleCoarseMatrix`].
/// Exceeding `max_outer` yields [`Error::NotConverged`] carrying the trace.
pub fn iad_solve(
    p: &StochasticMatrix,
    part: &Partition,
    mu0: &ProbabilityVector,
    cfg: &IadConfig,
) -> Result<(ProbabilityVector, IadTrace)> {
    cfg.validate()?;
    if mu0.len() != p.dim() || part.len() != p.dim() {
        return Err(Error::Dimension(format!(
            "chain on {} states, starting vector of length {}, partition of {}",
            p.dim(),
            mu0.len(),
            part.len()
        )));
    }
    let mut trace = IadTrace {
        iterates: vec![mu0.clone()],
        ..IadTrace::default()
    };
    for _ in 0..cfg.max_outer {
        let old = trace.iterates.last().expect("trace starts non-empty");
        let new = iad_step(p, part, old, cfg)?;
        let change = max_relative_to(new.as_slice(), old.as_slice(), old.as_slice());
        let pn = p.apply(new.as_slice());
        let residual = max_relative_to(&pn, new.as_slice(), &pn);
        trace.rel_changes.push(change);
        trace.residuals.push(residual);
        trace.iterates.push(new);
        if change <= cfg.tau && residual <= cfg.tau {
            let mu = trace.iterates.last().expect("just pushed").clone();
            return Ok((mu, trace));
        }
    }
    Err(Error::NotConverged {
        iterations: cfg.max_outer,
        trace: Box::new(trace),
    })
}

/// Errors `||mu_k - mu||_{1/mu}` of every iterate.
pub fn trace_errors(trace: &IadTrace, mu: &ProbabilityVector) -> Result<Vec<f64>> {
    let w = mu.inverse_weights()?;
    trace
        .iterates
        .iter()
        .map(|it| {
            let diff: Vec<f64> = it.as_slice().iter().zip(mu.as_slice()).map(|(a, b)| a - b).collect();
            weighted_norm(&diff, &w)
        })
        .collect()
}

/// Asymptotic contraction factor estimated from a trace: the exponential of
/// the least-squares slope of `log ||mu_k - mu||_{1/mu}` over the second half
/// of the iterates, ignoring errors at roundoff level.
pub fn empirical_rate(trace: &IadTrace, mu: &ProbabilityVector) -> Result<f64> {
    let errors = trace_errors(trace, mu)?;
    let floor = 100.0 * f64::EPSILON;
    let start = errors.len() / 2;
    let points: Vec<(f64, f64)> = errors
        .iter()
        .enumerate()
        .skip(start)
        .filter(|(_, &e)| e > floor)
        .map(|(k, &e)| (k as f64, e.ln()))
        .collect();
    if errors.len() < MIN_RATE_ITERATES || points.len() < MIN_RATE_ITERATES {
        return Err(Error::InsufficientData {
            usable: points.len().min(errors.len()),
            needed: MIN_RATE_ITERATES,
        });
    }
    let n = points.len() as f64;
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|(x, y)| (x - mean_x) * (y - mean_y)).sum();
    let sxx: f64 = points.iter().map(|(x, _)| (x - mean_x).powi(2)).sum();
    Ok((sxy / sxx).exp())
}
