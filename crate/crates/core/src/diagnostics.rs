//! Convergence-rate diagnostics for IAD.
//!
//! Near the steady state `mu` the IAD error evolves by the linear map
//! `J(mu) = P_hat (I - S(mu))`, where `P_hat = P - mu 1^T` and `S` is the
//! coarse projection. This module computes its spectral radius directly and
//! through the spectrum of the projected resolvent
//! `K = (I - Pi)(I - P_hat)^{-1}(I - Pi)`, together with the norm and angle
//! bounds that control it.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::chain::{
    deviation, pstar_p_spectrum, steady_state, time_reversal, ProbabilityVector, SpectralData,
    StochasticMatrix, DEFAULT_KPOW, DEFAULT_TOL,
};
use crate::coarse::{aggregate, coarse_projection_factors, orthogonal_projection, Partition};
use crate::error::{Error, Result};
use crate::linalg::{
    general_eigenvalues, spectral_radius, spectral_radius_symmetric_psd, sym_eigs, sym_eigvals,
    symmetrize_weighted, weighted_operator_norm, DenseMatrix, LuFactorization, WeightVector,
};

/// Largest entry of `|P - P*|` for which a chain counts as reversible.
pub const REVERSIBLE_TOL: f64 = 1e-10;
/// Eigenvalues of `K` below this modulus are treated as exact zeros.
pub const FORMULA_DROP_TOL: f64 = 1e-9;

/// Whether `P` equals its time reversal to within [`REVERSIBLE_TOL`].
pub fn is_reversible(p: &StochasticMatrix, mu: &ProbabilityVector) -> Result<bool> {
    let rev = time_reversal(p, mu)?;
    Ok(rev.matrix().max_abs_diff(p.matrix()) <= REVERSIBLE_TOL)
}

/// `Pi y` computed stratum by stratum without forming `Pi`.
fn project_rows(mu: &ProbabilityVector, part: &Partition, y: &DenseMatrix) -> Result<DenseMatrix> {
    let masses = aggregate(mu.as_slice(), part)?;
    let mut sums = DenseMatrix::zeros(part.coarse_count(), y.cols());
    for i in 0..y.rows() {
        let c = part.coarse_index(i);
        for (s, v) in sums.row_mut(c).iter_mut().zip(y.row(i)) {
            *s += v;
        }
    }
    Ok(DenseMatrix::from_fn(y.rows(), y.cols(), |i, j| {
        let c = part.coarse_index(i);
        mu[i] / masses[c] * sums[(c, j)]
    }))
}

/// `(I - Pi) B^{-1} (I - Pi)`.
fn projected_inverse(b: &DenseMatrix, mu: &ProbabilityVector, part: &Partition) -> Result<DenseMatrix> {
    let complement = orthogonal_projection(mu, part)?.identity_minus();
    let y = LuFactorization::new(b)?.solve(&complement)?;
    let py = project_rows(mu, part, &y)?;
    y.sub(&py)
}

/// The error propagation operator `J(mu) = P_hat (I - S(mu))`.
pub fn error_operator(p: &StochasticMatrix, mu: &ProbabilityVector, part: &Partition) -> Result<DenseMatrix> {
    let (d, m) = coarse_projection_factors(p, mu, mu, part)?;
    // P_hat D = P D - mu 1^T since the columns of D sum to one.
    let mut pd = p.matrix().matmul(&d)?;
    for i in 0..pd.rows() {
        pd.row_mut(i).iter_mut().for_each(|x| *x -= mu[i]);
    }
    deviation(p, mu).sub(&pd.matmul(&m)?)
}

/// Largest eigenvalue modulus of `J`.
pub fn rho_j_direct(j: &DenseMatrix) -> Result<f64> {
    spectral_radius(j)
}

/// `K = (I - Pi)(I - P_hat)^{-1}(I - Pi)`.
pub fn projected_resolvent(p: &StochasticMatrix, mu: &ProbabilityVector, part: &Partition) -> Result<DenseMatrix> {
    projected_inverse(&deviation(p, mu).identity_minus(), mu, part)
}

/// `(I - Pi)(I - P_hat^* P_hat)^{-1}(I - Pi)`, using `P_hat^* P_hat = P^* P - mu 1^T`.
fn projected_reversal_resolvent(
    p: &StochasticMatrix,
    mu: &ProbabilityVector,
    part: &Partition,
) -> Result<DenseMatrix> {
    let rev = time_reversal(p, mu)?;
    let pstar_p = rev.matrix().matmul(p.matrix())?;
    let n = p.dim();
    let b = DenseMatrix::from_fn(n, n, |i, j| {
        let id = if i == j { 1.0 } else { 0.0 };
        id - pstar_p[(i, j)] + mu[i]
    });
    projected_inverse(&b, mu, part)
}

/// Eigenvalues of `K` when it is self-adjoint in `l2(1/mu)`.
fn self_adjoint_eigenvalues(k: &DenseMatrix, mu: &ProbabilityVector) -> Result<Vec<f64>> {
    let s = symmetrize_weighted(k, &mu.inverse_weights()?);
    let n = s.rows();
    let sym = DenseMatrix::from_fn(n, n, |i, j| 0.5 * (s[(i, j)] + s[(j, i)]));
    sym_eigvals(&sym)
}

fn formula_map(eigs: impl IntoIterator<Item = Complex64>) -> Vec<Complex64> {
    let one = Complex64::new(1.0, 0.0);
    let mut out: Vec<Complex64> = eigs
        .into_iter()
        .filter(|l| l.norm() >= FORMULA_DROP_TOL)
        .map(|l| one - one / l)
        .collect();
    out.push(Complex64::new(0.0, 0.0));
    out
}

/// The spectrum of `J(mu)` as `{0} u {1 - 1/lambda : lambda in sigma(K)}`,
/// dropping eigenvalues of `K` that vanish to roundoff.
pub fn rho_j_exact_formula(
    p: &StochasticMatrix,
    mu: &ProbabilityVector,
    part: &Partition,
) -> Result<Vec<Complex64>> {
    let k = projected_resolvent(p, mu, part)?;
    if is_reversible(p, mu)? {
        let eigs = self_adjoint_eigenvalues(&k, mu)?;
        Ok(formula_map(eigs.into_iter().map(|l| Complex64::new(l, 0.0))))
    } else {
        Ok(formula_map(general_eigenvalues(&k)?))
    }
}

/// Largest modulus in a list of eigenvalues.
pub fn max_modulus(values: &[Complex64]) -> f64 {
    values.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn bound_from_norm(norm: f64) -> f64 {
    if norm > 0.0 {
        1.0 - 1.0 / norm
    } else {
        0.0
    }
}

/// Upper bound on `rho(J)` from the norm of the projected resolvent. Exact
/// for reversible chains.
pub fn norm_bound(p: &StochasticMatrix, mu: &ProbabilityVector, part: &Partition) -> Result<f64> {
    let reversible = is_reversible(p, mu)?;
    norm_bound_with(p, mu, part, reversible)
}

/// [`norm_bound`] with reversibility decided by the caller.
pub fn norm_bound_with(
    p: &StochasticMatrix,
    mu: &ProbabilityVector,
    part: &Partition,
    reversible: bool,
) -> Result<f64> {
    let w = mu.inverse_weights()?;
    if reversible {
        let k = projected_resolvent(p, mu, part)?;
        Ok(bound_from_norm(spectral_radius_symmetric_psd(&k, &w)?))
    } else {
        let k = projected_reversal_resolvent(p, mu, part)?;
        Ok(bound_from_norm(spectral_radius_symmetric_psd(&k, &w)?).max(0.0).sqrt())
    }
}

/// `Q_k = mu 1^T + sum_{i=2..k} v_i v_i'^T`, the projection onto the leading
/// `k` eigenvectors of `P^* P`, orthogonal in `l2(1/mu)`.
pub fn spectral_projector(spec: &SpectralData, k: usize) -> Result<DenseMatrix> {
    check_k(k, spec.dim())?;
    let n = spec.dim();
    let mut q = DenseMatrix::zeros(n, n);
    for c in 0..k {
        let v = spec.right_vectors.column(c);
        let vl = spec.left_vectors.column(c);
        for i in 0..n {
            let vi = v[i];
            for (dst, x) in q.row_mut(i).iter_mut().zip(&vl) {
                *dst += vi * x;
            }
        }
    }
    Ok(q)
}

/// The two projections compared by the angle `theta`.
#[derive(Debug, Clone)]
pub struct ProjectionPair {
    pub pi: DenseMatrix,
    pub q: DenseMatrix,
}

pub fn projection_pair(
    spec: &SpectralData,
    mu: &ProbabilityVector,
    part: &Partition,
    k: usize,
) -> Result<ProjectionPair> {
    Ok(ProjectionPair {
        pi: orthogonal_projection(mu, part)?,
        q: spectral_projector(spec, k)?,
    })
}

fn check_k(k: usize, n: usize) -> Result<()> {
    if k < 2 || k >= n {
        return Err(Error::InvalidParameter(format!(
            "k = {k} outside 2..{} for a chain on {n} states",
            n.saturating_sub(1)
        )));
    }
    Ok(())
}

/// `sin(theta) = ||Q_k (I - Pi)||_{1/mu}`.
///
/// Computed in the symmetrized coordinates `x -> x / sqrt(mu)`, where `Q_k`
/// and `Pi` become orthogonal projections `U U^T` and `Pi_s`, so that
/// `sin^2(theta)` is the largest eigenvalue of the small matrix
/// `U^T (I - Pi_s) U`.
pub fn sin_theta(spec: &SpectralData, mu: &ProbabilityVector, part: &Partition, k: usize) -> Result<f64> {
    let n = spec.dim();
    check_k(k, n)?;
    if mu.len() != n || part.len() != n {
        return Err(Error::Dimension("spectral data, steady state and partition disagree".into()));
    }
    let masses = aggregate(mu.as_slice(), part)?;
    // The leading vector sqrt(mu) lies in the range of Pi_s and drops out.
    let m = k - 1;
    let u: Vec<Vec<f64>> = (1..k)
        .map(|c| {
            spec.right_vectors
                .column(c)
                .iter()
                .zip(mu.as_slice())
                .map(|(v, w)| v / w.sqrt())
                .collect()
        })
        .collect();
    // Stratum sums of sqrt(mu) u for each column.
    let mut coef = vec![vec![0.0; m]; part.coarse_count()];
    for i in 0..n {
        let c = part.coarse_index(i);
        let s = mu[i].sqrt();
        for (a, col) in coef[c].iter_mut().zip(&u) {
            *a += s * col[i];
        }
    }
    let g = DenseMatrix::from_fn(m, m, |a, b| {
        let full: f64 = u[a].iter().zip(&u[b]).map(|(x, y)| x * y).sum();
        let projected: f64 = coef
            .iter()
            .zip(&masses)
            .map(|(cf, mass)| cf[a] * cf[b] / mass)
            .sum();
        full - projected
    });
    let sym = DenseMatrix::from_fn(m, m, |a, b| 0.5 * (g[(a, b)] + g[(b, a)]));
    let top = sym_eigs(&sym)?.values[0];
    Ok(top.clamp(0.0, 1.0).sqrt())
}

/// [`sin_theta`] evaluated from the dense operator `Q_k (I - Pi)`.
pub fn sin_theta_dense(spec: &SpectralData, mu: &ProbabilityVector, part: &Partition, k: usize) -> Result<f64> {
    let pair = projection_pair(spec, mu, part, k)?;
    let m = pair.q.matmul(&pair.pi.identity_minus())?;
    Ok(weighted_operator_norm(&m, &mu.inverse_weights()?)?.clamp(0.0, 1.0))
}

/// Bound on `rho(J)` interpolating between `sqrt(lambda_{k+1})` at
/// `sin^2 = 0` and `sqrt(lambda_2)` at `sin^2 = 1`. `lambdas` are the
/// eigenvalues of `P^* P` in descending order.
pub fn angle_bound(lambdas: &[f64], sin2_theta: f64, k: usize, reversible: bool) -> Result<f64> {
    check_k(k, lambdas.len())?;
    let (l2, lk) = (lambdas[1], lambdas[k]);
    if l2 >= 1.0 {
        return Err(Error::InvalidParameter(
            "lambda_2 = 1 (P^T P reducible); the angle bound is undefined".into(),
        ));
    }
    let s2 = sin2_theta.clamp(0.0, 1.0);
    let c2 = 1.0 - s2;
    if reversible {
        let (g2, gk) = (1.0 - l2.max(0.0).sqrt(), 1.0 - lk.max(0.0).sqrt());
        Ok(1.0 - 1.0 / (s2 / g2 + c2 / gk))
    } else {
        Ok((1.0 - 1.0 / (s2 / (1.0 - l2) + c2 / (1.0 - lk))).max(0.0).sqrt())
    }
}

/// `rho(P_hat)`, the asymptotic rate of the power method. For a reversible
/// chain `P^* P = P^2`, so this is `sqrt(lambda_2)`.
pub fn rho_hat_p(p: &StochasticMatrix, mu: &ProbabilityVector, spec: &SpectralData, reversible: bool) -> Result<f64> {
    if reversible {
        Ok(spec.sqrt_lambda(1))
    } else {
        spectral_radius(&deviation(p, mu))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AngleBound {
    pub sin2_theta: f64,
    pub bound: f64,
}

/// Every rate quantity for one chain and one partition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    pub states: usize,
    pub coarse_states: usize,
    /// Spectral radius of `J(mu)` from its eigenvalues.
    pub rho_j: f64,
    /// The same radius from the spectrum of the projected resolvent.
    pub rho_exact_formula: f64,
    pub norm_bound: f64,
    /// `k -> (sin^2 theta, bound)`.
    pub angle_bounds: BTreeMap<usize, AngleBound>,
    /// Contraction factor of the power method in `l2(1/mu)`.
    pub sqrt_lambda2: f64,
    /// Asymptotic rate of the power method.
    pub rho_hat_p: f64,
    pub reversible: bool,
}

/// [`full_report_with`] after computing the steady state.
pub fn full_report(p: &StochasticMatrix, part: &Partition, k_list: &[usize]) -> Result<RateReport> {
    let mu = steady_state(p, DEFAULT_TOL, DEFAULT_KPOW)?;
    full_report_with(p, &mu, part, k_list)
}

/// Computes a [`RateReport`] given the steady state `mu`.
pub fn full_report_with(
    p: &StochasticMatrix,
    mu: &ProbabilityVector,
    part: &Partition,
    k_list: &[usize],
) -> Result<RateReport> {
    let spec = pstar_p_spectrum(p, mu)?;
    report_with_spectrum(p, mu, &spec, part, k_list)
}

/// Computes a [`RateReport`] reusing a precomputed spectrum of `P^* P`, so
/// that sweeps over partitions decompose `P^* P` only once.
pub fn report_with_spectrum(
    p: &StochasticMatrix,
    mu: &ProbabilityVector,
    spec: &SpectralData,
    part: &Partition,
    k_list: &[usize],
) -> Result<RateReport> {
    let reversible = is_reversible(p, mu)?;
    let rho_j = rho_j_direct(&error_operator(p, mu, part)?)?;
    let k = projected_resolvent(p, mu, part)?;
    let (rho_exact_formula, norm_bound) = if reversible {
        let eigs = self_adjoint_eigenvalues(&k, mu)?;
        let top = eigs.iter().copied().fold(0.0, f64::max);
        let formula = formula_map(eigs.into_iter().map(|l| Complex64::new(l, 0.0)));
        (max_modulus(&formula), bound_from_norm(top))
    } else {
        let formula = formula_map(general_eigenvalues(&k)?);
        (max_modulus(&formula), norm_bound_with(p, mu, part, false)?)
    };
    let mut angle_bounds = BTreeMap::new();
    for &kk in k_list {
        let s = sin_theta(spec, mu, part, kk)?;
        let s2 = s * s;
        angle_bounds.insert(
            kk,
            AngleBound {
                sin2_theta: s2,
                bound: angle_bound(&spec.lambdas, s2, kk, reversible)?,
            },
        );
    }
    Ok(RateReport {
        states: p.dim(),
        coarse_states: part.coarse_count(),
        rho_j,
        rho_exact_formula,
        norm_bound,
        angle_bounds,
        sqrt_lambda2: spec.sqrt_lambda(1),
        rho_hat_p: rho_hat_p(p, mu, spec, reversible)?,
        reversible,
    })
}

/// `(rho_coarse, rho_refined)` for a partition and one of its refinements.
/// For reversible chains refining never increases the rate.
pub fn refinement_compare(
    p: &StochasticMatrix,
    mu: &ProbabilityVector,
    coarse: &Partition,
    refined: &Partition,
) -> Result<(f64, f64)> {
    refined.refines(coarse)?;
    let rho = |part: &Partition| rho_j_direct(&error_operator(p, mu, part)?);
    Ok((rho(coarse)?, rho(refined)?))
}

/// Operator norm of `m` for the inner product
/// `<x, y>_eps = <x, (I - Pi) y>_{1/mu} + eps <x, Pi y>_{1/mu}`.
pub fn epsilon_norm(m: &DenseMatrix, mu: &ProbabilityVector, part: &Partition, eps: f64) -> Result<f64> {
    if !(eps > 0.0) {
        return Err(Error::InvalidParameter("eps must be positive".into()));
    }
    let n = m.rows();
    let sqrt_mu: Vec<f64> = mu.as_slice().iter().map(|x| x.sqrt()).collect();
    let inv_sqrt: Vec<f64> = sqrt_mu.iter().map(|x| 1.0 / x).collect();
    let pi_s = symmetrize_weighted(&orthogonal_projection(mu, part)?, &mu.inverse_weights()?);
    let m_s = m.scale_rows(&inv_sqrt).scale_cols(&sqrt_mu);
    // Gram matrix G = I - (1 - eps) Pi_s; its square root and inverse root
    // are I - (1 - eps^{+-1/2}) Pi_s.
    let root = |t: f64| {
        DenseMatrix::from_fn(n, n, |i, j| {
            let id = if i == j { 1.0 } else { 0.0 };
            id - (1.0 - t) * pi_s[(i, j)]
        })
    };
    let g_half = root(eps.sqrt());
    let g_inv_half = root(1.0 / eps.sqrt());
    let core = g_half.matmul(&m_s)?.matmul(&g_inv_half)?;
    let gram = core.transpose().matmul(&core)?;
    Ok(spectral_radius_symmetric_psd(&gram, &WeightVector::ones(n))?.sqrt())
}
