//! Column-stochastic transition matrices and their steady states.
//!
//! The convention throughout is `P[j][i] = Prob(next = j | current = i)`, so
//! probability vectors are columns and evolve as `mu -> P mu`.

use crate::error::{Error, Result};
use crate::linalg::{qr_null_vector, sym_eigs, DenseMatrix, WeightVector};

/// Entries between this and zero are treated as roundoff and clamped.
pub const NEGATIVE_CLAMP: f64 = 1e-14;
/// Allowed deviation of each column sum from one.
pub const COLUMN_SUM_TOL: f64 = 1e-12;

/// Refinement rounds allowed before the steady-state solver gives up.
const MAX_REFINEMENT_ROUNDS: usize = 50;
/// Power iterates are renormalized to unit mass this often.
const RENORMALIZE_EVERY: usize = 64;

/// A validated column-stochastic matrix.
///
/// Besides the dense entries it keeps a compressed view of each column so that
/// applying the chain to a vector costs only the number of nonzeros.
#[derive(Debug, Clone)]
pub struct StochasticMatrix {
    mat: DenseMatrix,
    columns: Vec<Vec<(usize, f64)>>,
}

impl PartialEq for StochasticMatrix {
    fn eq(&self, other: &Self) -> bool {
        self.mat == other.mat
    }
}

impl StochasticMatrix {
    /// Validates `p`: square, entries no more negative than `-1e-14` (those
    /// above are clamped to zero), columns summing to one within `1e-12`.
    pub fn new(p: DenseMatrix) -> Result<Self> {
        validate(p)
    }

    /// Loads a row-stochastic matrix by transposing it.
    pub fn from_row_stochastic(p: &DenseMatrix) -> Result<Self> {
        validate(p.transpose())
    }

    /// Divides each column by its sum before validating. Used where the
    /// columns are stochastic analytically but accumulate roundoff.
    pub(crate) fn renormalized(mut p: DenseMatrix) -> Result<Self> {
        let n = p.rows();
        for j in 0..p.cols() {
            let s: f64 = (0..n).map(|i| p[(i, j)]).sum();
            if s > 0.0 {
                for i in 0..n {
                    p[(i, j)] /= s;
                }
            }
        }
        validate(p)
    }

    fn from_clean(mat: DenseMatrix) -> Self {
        let n = mat.rows();
        let mut columns = vec![Vec::new(); n];
        for i in 0..n {
            for (j, &x) in mat.row(i).iter().enumerate() {
                if x != 0.0 {
                    columns[j].push((i, x));
                }
            }
        }
        StochasticMatrix { mat, columns }
    }

    pub fn dim(&self) -> usize {
        self.mat.rows()
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> DenseMatrix {
        self.mat
    }

    /// Nonzero entries `(row, value)` of column `j`.
    pub fn column_entries(&self, j: usize) -> &[(usize, f64)] {
        &self.columns[j]
    }

    /// `P x`, using the sparsity of `P`.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.dim()];
        self.apply_into(x, &mut y);
        y
    }

    fn apply_into(&self, x: &[f64], y: &mut [f64]) {
        y.iter_mut().for_each(|v| *v = 0.0);
        for (col, &xj) in self.columns.iter().zip(x) {
            if xj != 0.0 {
                for &(i, p) in col {
                    y[i] += p * xj;
                }
            }
        }
    }

    /// The lazy chain `(I + P) / 2`.
    pub fn lazy(&self) -> StochasticMatrix {
        let mut m = self.mat.scale(0.5);
        for i in 0..self.dim() {
            m[(i, i)] += 0.5;
        }
        StochasticMatrix::from_clean(m)
    }

    /// Convex combination `(1 - alpha) self + alpha other`.
    pub fn mix(&self, other: &StochasticMatrix, alpha: f64) -> Result<StochasticMatrix> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::InvalidParameter(format!("mixing weight {alpha} outside [0, 1]")));
        }
        if self.dim() != other.dim() {
            return Err(Error::Dimension(format!(
                "cannot mix chains of size {} and {}",
                self.dim(),
                other.dim()
            )));
        }
        let m = self.mat.scale(1.0 - alpha).add(&other.mat.scale(alpha))?;
        StochasticMatrix::renormalized(m)
    }
}

/// See [`StochasticMatrix::new`].
pub fn validate(mut p: DenseMatrix) -> Result<StochasticMatrix> {
    if !p.is_square() {
        return Err(Error::Dimension(format!(
            "transition matrix is {}x{}",
            p.rows(),
            p.cols()
        )));
    }
    let n = p.rows();
    let mut sums = vec![0.0; n];
    for i in 0..n {
        for (j, x) in p.row_mut(i).iter_mut().enumerate() {
            if *x < 0.0 {
                if *x < -NEGATIVE_CLAMP {
                    return Err(Error::NegativeEntry {
                        row: i,
                        col: j,
                        value: *x,
                    });
                }
                *x = 0.0;
            }
            if *x < NEGATIVE_CLAMP {
                *x = 0.0;
            }
            sums[j] += *x;
        }
    }
    if let Some((column, &sum)) = sums
        .iter()
        .enumerate()
        .find(|(_, s)| (**s - 1.0).abs() > COLUMN_SUM_TOL)
    {
        return Err(Error::NotStochastic { column, sum });
    }
    Ok(StochasticMatrix::from_clean(p))
}

/// A nonnegative vector of unit mass.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityVector(Vec<f64>);

impl ProbabilityVector {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if let Some(x) = probs.iter().find(|x| !(x.is_finite() && **x >= 0.0)) {
            return Err(Error::NotProbability(format!("entry {x} is negative or not finite")));
        }
        let s: f64 = probs.iter().sum();
        if (s - 1.0).abs() > COLUMN_SUM_TOL {
            return Err(Error::NotProbability(format!("entries sum to {s}")));
        }
        Ok(ProbabilityVector(probs))
    }

    /// Scales a nonnegative vector with positive mass to sum to one.
    pub fn normalized(mut v: Vec<f64>) -> Result<Self> {
        let s: f64 = v.iter().sum();
        if !(s.is_finite() && s > 0.0) {
            return Err(Error::NotProbability(format!("cannot normalize mass {s}")));
        }
        v.iter_mut().for_each(|x| *x /= s);
        Self::new(v)
    }

    pub fn uniform(n: usize) -> Self {
        ProbabilityVector(vec![1.0 / n as f64; n])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_strictly_positive(&self) -> bool {
        self.0.iter().all(|&x| x > 0.0)
    }

    /// The weights `1/mu` of the inner product used to measure errors.
    pub fn inverse_weights(&self) -> Result<WeightVector> {
        WeightVector::new(self.0.iter().map(|x| 1.0 / x).collect())
    }

    /// The weights `mu` themselves.
    pub fn weights(&self) -> Result<WeightVector> {
        WeightVector::new(self.0.clone())
    }
}

impl std::ops::Index<usize> for ProbabilityVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// Number of strongly connected components of the directed graph with an edge
/// `i -> j` for each `(i, j)` in `edges(i)`. Iterative Tarjan.
pub(crate) fn strongly_connected_components(n: usize, succ: &[Vec<usize>]) -> usize {
    const UNVISITED: usize = usize::MAX;
    let mut index = vec![UNVISITED; n];
    let mut low = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut next_index = 0;
    let mut count = 0;
    for root in 0..n {
        if index[root] != UNVISITED {
            continue;
        }
        // (node, position in its successor list)
        let mut call: Vec<(usize, usize)> = vec![(root, 0)];
        index[root] = next_index;
        low[root] = next_index;
        next_index += 1;
        stack.push(root);
        on_stack[root] = true;
        while let Some(&mut (v, ref mut pos)) = call.last_mut() {
            if *pos < succ[v].len() {
                let w = succ[v][*pos];
                *pos += 1;
                if index[w] == UNVISITED {
                    index[w] = next_index;
                    low[w] = next_index;
                    next_index += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                call.pop();
                if let Some(&(parent, _)) = call.last() {
                    low[parent] = low[parent].min(low[v]);
                }
                if low[v] == index[v] {
                    count += 1;
                    while let Some(w) = stack.pop() {
                        on_stack[w] = false;
                        if w == v {
                            break;
                        }
                    }
                }
            }
        }
    }
    count
}

/// Whether the chain can reach every state from every state.
pub fn is_irreducible(p: &StochasticMatrix) -> bool {
    let n = p.dim();
    let succ: Vec<Vec<usize>> = (0..n)
        .map(|i| p.column_entries(i).iter().map(|&(j, _)| j).collect())
        .collect();
    n > 0 && strongly_connected_components(n, &succ) == 1
}

/// Whether `P^T P` is irreducible: columns `i` and `j` are linked when they
/// share a nonzero row. The pattern is symmetric, so this is connectivity.
pub fn is_ptp_irreducible(p: &StochasticMatrix) -> bool {
    let n = p.dim();
    if n == 0 {
        return false;
    }
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    // Columns sharing row r all join the first column seen in that row.
    let mut first_in_row: Vec<Option<usize>> = vec![None; n];
    for j in 0..n {
        for &(r, _) in p.column_entries(j) {
            match first_in_row[r] {
                None => first_in_row[r] = Some(j),
                Some(k) => {
                    let (a, b) = (find(&mut parent, j), find(&mut parent, k));
                    if a != b {
                        parent[a] = b;
                    }
                }
            }
        }
    }
    let root = find(&mut parent, 0);
    (1..n).all(|j| find(&mut parent, j) == root)
}

/// Returns `p` if `P^T P` is irreducible, otherwise the lazy chain `(I + P)/2`,
/// which has the same steady state and a positive diagonal.
pub fn ensure_contractive(p: &StochasticMatrix) -> Result<StochasticMatrix> {
    if !is_irreducible(p) {
        return Err(Error::Reducible);
    }
    if is_ptp_irreducible(p) {
        Ok(p.clone())
    } else {
        Ok(p.lazy())
    }
}

/// Default relative tolerance of [`steady_state`].
pub const DEFAULT_TOL: f64 = 1e-9;
/// Default number of lazy steps per refinement round.
pub const DEFAULT_KPOW: usize = 1 << 15;

/// Steady state of an irreducible chain.
///
/// Forms the lazy chain `Pbar = (I + P)/2`, takes the null vector of
/// `I - Pbar` from a Householder QR factorization, and refines it by rounds of
/// `kpow` applications of `Pbar` until the relative self-consistency
/// `|z - P z| / z` and the relative change between rounds are both below
/// `tol` in every component.
pub fn steady_state(p: &StochasticMatrix, tol: f64, kpow: usize) -> Result<ProbabilityVector> {
    if !is_irreducible(p) {
        return Err(Error::Reducible);
    }
    power_refined_steady_state(p, tol, kpow)
}

/// The steady-state algorithm without the irreducibility check; callers that
/// know the chain is irreducible (or want the failure to surface as
/// non-convergence) use this directly.
pub(crate) fn power_refined_steady_state(
    p: &StochasticMatrix,
    tol: f64,
    kpow: usize,
) -> Result<ProbabilityVector> {
    let n = p.dim();
    if n == 1 {
        return Ok(ProbabilityVector(vec![1.0]));
    }
    let lazy = p.lazy();
    let initial = qr_null_vector(&lazy.matrix().identity_minus())?;
    let sign = if initial.iter().sum::<f64>() < 0.0 { -1.0 } else { 1.0 };
    let mut z_old: Vec<f64> = initial.iter().map(|x| (sign * x).max(0.0)).collect();
    normalize_mass(&mut z_old);

    let mut z = vec![0.0; n];
    let mut scratch = vec![0.0; n];
    for _ in 0..MAX_REFINEMENT_ROUNDS {
        z.copy_from_slice(&z_old);
        for step in 1..=kpow.max(1) {
            lazy.apply_into(&z, &mut scratch);
            std::mem::swap(&mut z, &mut scratch);
            if step % RENORMALIZE_EVERY == 0 {
                normalize_mass(&mut z);
            }
        }
        normalize_mass(&mut z);
        let pz = p.apply(&z);
        let residual = max_relative(&pz, &z);
        let change = max_relative(&z, &z_old);
        if residual < tol && change < tol && z.iter().all(|&x| x > 0.0) {
            return ProbabilityVector::new(z);
        }
        std::mem::swap(&mut z_old, &mut z);
    }
    Err(Error::SteadyStateNotConverged {
        rounds: MAX_REFINEMENT_ROUNDS,
    })
}

pub(crate) fn normalize_mass(v: &mut [f64]) {
    let s: f64 = v.iter().sum();
    if s != 0.0 {
        v.iter_mut().for_each(|x| *x /= s);
    }
}

/// `max_i |a_i - b_i| / b_i`, infinite if some `b_i` is zero while `a_i` is not.
pub(crate) fn max_relative(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m: f64, (x, y)| {
        let d = (x - y).abs();
        if d == 0.0 {
            m
        } else {
            m.max(d / y.abs())
        }
    })
}

/// Largest entry of `|P mu - mu|`.
pub fn invariance_residual(p: &StochasticMatrix, mu: &ProbabilityVector) -> f64 {
    p.apply(mu.as_slice())
        .iter()
        .zip(mu.as_slice())
        .fold(0.0, |m: f64, (a, b)| m.max((a - b).abs()))
}

fn check_steady_state(p: &StochasticMatrix, mu: &ProbabilityVector) -> Result<()> {
    if mu.len() != p.dim() {
        return Err(Error::Dimension(format!(
            "steady state of length {} for a chain on {} states",
            mu.len(),
            p.dim()
        )));
    }
    if !mu.is_strictly_positive() {
        return Err(Error::NotProbability("steady state must be strictly positive".into()));
    }
    let residual = invariance_residual(p, mu);
    if residual > 1e-8 {
        return Err(Error::NotInvariant { residual });
    }
    Ok(())
}

/// The time reversal `diag(mu) P^T diag(1/mu)`, the adjoint of `P` in the
/// inner product weighted by `1/mu`.
pub fn time_reversal(p: &StochasticMatrix, mu: &ProbabilityVector) -> Result<StochasticMatrix> {
    check_steady_state(p, mu)?;
    let inv: Vec<f64> = mu.as_slice().iter().map(|x| 1.0 / x).collect();
    let rev = p.matrix().transpose().scale_rows(mu.as_slice()).scale_cols(&inv);
    StochasticMatrix::renormalized(rev)
}

/// `P - mu 1^T`, the part of `P` that acts on errors.
pub fn deviation(p: &StochasticMatrix, mu: &ProbabilityVector) -> DenseMatrix {
    let n = p.dim();
    let mut d = p.matrix().clone();
    for i in 0..n {
        let m = mu[i];
        d.row_mut(i).iter_mut().for_each(|x| *x -= m);
    }
    d
}

/// Eigen-decomposition of `P^* P`, where `P^*` is the time reversal.
#[derive(Debug, Clone)]
pub struct SpectralData {
    /// Eigenvalues in descending order; the first is exactly one.
    pub lambdas: Vec<f64>,
    /// Right eigenvectors as columns, orthonormal in the `1/mu` inner product.
    /// The first column is `mu`.
    pub right_vectors: DenseMatrix,
    /// Left eigenvectors `diag(1/mu) v_k` as columns. The first is all ones.
    pub left_vectors: DenseMatrix,
}

impl SpectralData {
    pub fn sqrt_lambda(&self, k: usize) -> f64 {
        self.lambdas[k].max(0.0).sqrt()
    }

    pub fn dim(&self) -> usize {
        self.lambdas.len()
    }
}

/// Spectrum of `P^* P` through the symmetric matrix `M^T M` with
/// `M = diag(mu^{-1/2}) P diag(mu^{1/2})`.
pub fn pstar_p_spectrum(p: &StochasticMatrix, mu: &ProbabilityVector) -> Result<SpectralData> {
    check_steady_state(p, mu)?;
    let n = p.dim();
    let sqrt_mu: Vec<f64> = mu.as_slice().iter().map(|x| x.sqrt()).collect();
    let inv_sqrt: Vec<f64> = sqrt_mu.iter().map(|x| 1.0 / x).collect();
    let m = p.matrix().scale_rows(&inv_sqrt).scale_cols(&sqrt_mu);
    let gram = m.transpose().matmul(&m)?;
    let sym = DenseMatrix::from_fn(n, n, |i, j| 0.5 * (gram[(i, j)] + gram[(j, i)]));
    let eig = sym_eigs(&sym)?;
    let lambda1 = eig.values[0];
    if (lambda1 - 1.0).abs() > 1e-8 {
        return Err(Error::InconsistentSteadyState { lambda1 });
    }
    let mut lambdas = eig.values;
    lambdas[0] = 1.0;
    let mut right = eig.vectors.scale_rows(&sqrt_mu);
    for i in 0..n {
        right[(i, 0)] = mu[i];
    }
    let inv_mu: Vec<f64> = mu.as_slice().iter().map(|x| 1.0 / x).collect();
    let mut left = right.scale_rows(&inv_mu);
    for i in 0..n {
        left[(i, 0)] = 1.0;
    }
    Ok(SpectralData {
        lambdas,
        right_vectors: right,
        left_vectors: left,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::weighted_inner;

    fn shift3() -> StochasticMatrix {
        StochasticMatrix::new(
            DenseMatrix::from_rows(&[
                vec![0.0, 0.0, 1.0],
                vec![1.0, 0.0, 0.0],
                vec![0.0, 1.0, 0.0],
            ])
            .unwrap(),
        )
        .unwrap()
    }

    fn small_reversible() -> (StochasticMatrix, ProbabilityVector) {
        // Nearest-neighbour chain on 4 states in detailed balance with mu.
        let mu = [0.1, 0.2, 0.3, 0.4];
        let n = 4;
        let mut p = DenseMatrix::zeros(n, n);
        for i in 0..n {
            for j in [(i + 1) % n, (i + n - 1) % n] {
                p[(j, i)] = 0.25 * mu[j] / (mu[i] + mu[j]);
            }
        }
        for i in 0..n {
            let off: f64 = (0..n).filter(|&j| j != i).map(|j| p[(j, i)]).sum();
            p[(i, i)] = 1.0 - off;
        }
        (
            StochasticMatrix::new(p).unwrap(),
            ProbabilityVector::new(mu.to_vec()).unwrap(),
        )
    }

    #[test]
    fn validate_examples() {
        assert!(StochasticMatrix::new(DenseMatrix::identity(3)).is_ok());
        let bad = DenseMatrix::from_rows(&[vec![0.5, 0.7], vec![0.5, 0.2]]).unwrap();
        match StochasticMatrix::new(bad) {
            Err(Error::NotStochastic { column, sum }) => {
                assert_eq!(column, 1);
                assert!((sum - 0.9).abs() < 1e-12);
            }
            other => panic!("unexpected {other:?}"),
        }
        let neg = DenseMatrix::from_rows(&[vec![1.1, 0.0], vec![-0.1, 1.0]]).unwrap();
        assert!(matches!(StochasticMatrix::new(neg), Err(Error::NegativeEntry { .. })));
        let tiny = DenseMatrix::from_rows(&[vec![1.0, 0.0], vec![-1e-16, 1.0]]).unwrap();
        assert_eq!(StochasticMatrix::new(tiny).unwrap().matrix()[(1, 0)], 0.0);
    }

    #[test]
    fn row_stochastic_loader_transposes() {
        let rows = DenseMatrix::from_rows(&[vec![0.5, 0.5], vec![0.2, 0.8]]).unwrap();
        let p = StochasticMatrix::from_row_stochastic(&rows).unwrap();
        assert_eq!(p.matrix()[(0, 1)], 0.2);
    }

    #[test]
    fn irreducibility_examples() {
        assert!(is_irreducible(&shift3()));
        let block = DenseMatrix::from_rows(&[
            vec![0.5, 0.5, 0.0, 0.0],
            vec![0.5, 0.5, 0.0, 0.0],
            vec![0.0, 0.0, 0.3, 0.6],
            vec![0.0, 0.0, 0.7, 0.4],
        ])
        .unwrap();
        assert!(!is_irreducible(&StochasticMatrix::new(block).unwrap()));
        let one_way = DenseMatrix::from_rows(&[vec![0.5, 0.0], vec![0.5, 1.0]]).unwrap();
        assert!(!is_irreducible(&StochasticMatrix::new(one_way).unwrap()));
    }

    #[test]
    fn ptp_irreducibility() {
        assert!(!is_ptp_irreducible(&shift3()));
        assert!(is_ptp_irreducible(&shift3().lazy()));
        let (p, _) = small_reversible();
        assert!(is_ptp_irreducible(&p));
    }

    #[test]
    fn ensure_contractive_examples() {
        let w = shift3();
        let fixed = ensure_contractive(&w).unwrap();
        assert_eq!(fixed, w.lazy());
        assert_eq!(ensure_contractive(&fixed).unwrap(), fixed);
        let block = DenseMatrix::identity(2);
        assert!(matches!(
            ensure_contractive(&StochasticMatrix::new(block).unwrap()),
            Err(Error::Reducible)
        ));
    }

    #[test]
    fn steady_state_of_doubly_stochastic_is_uniform() {
        let mu = steady_state(&shift3(), 1e-9, 1 << 15).unwrap();
        for &x in mu.as_slice() {
            assert!((x - 1.0 / 3.0).abs() < 1e-12);
        }
        let p = DenseMatrix::from_rows(&[
            vec![0.2, 0.3, 0.5],
            vec![0.5, 0.2, 0.3],
            vec![0.3, 0.5, 0.2],
        ])
        .unwrap();
        let mu = steady_state(&StochasticMatrix::new(p).unwrap(), 1e-9, 1 << 15).unwrap();
        assert!(mu.as_slice().iter().all(|x| (x - 1.0 / 3.0).abs() < 1e-12));
    }

    #[test]
    fn steady_state_of_reversible_chain() {
        let (p, mu) = small_reversible();
        let got = steady_state(&p, 1e-9, 1 << 15).unwrap();
        for (a, b) in got.as_slice().iter().zip(mu.as_slice()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn steady_state_rejects_reducible() {
        let p = StochasticMatrix::new(DenseMatrix::identity(2)).unwrap();
        assert!(matches!(steady_state(&p, 1e-9, 4), Err(Error::Reducible)));
    }

    #[test]
    fn time_reversal_examples() {
        let w = shift3();
        let mu = ProbabilityVector::uniform(3);
        let rev = time_reversal(&w, &mu).unwrap();
        assert_eq!(rev.matrix(), &w.matrix().transpose());
        let (p, mu) = small_reversible();
        let rev = time_reversal(&p, &mu).unwrap();
        assert!(rev.matrix().max_abs_diff(p.matrix()) < 1e-15);
        let wrong = ProbabilityVector::new(vec![0.4, 0.3, 0.2, 0.1]).unwrap();
        assert!(matches!(time_reversal(&p, &wrong), Err(Error::NotInvariant { .. })));
    }

    #[test]
    fn deviation_annihilates_mu_and_ones() {
        let (p, mu) = small_reversible();
        let d = deviation(&p, &mu);
        assert!(d.matvec(mu.as_slice()).iter().all(|x| x.abs() < 1e-15));
        assert!(d.vecmat(&[1.0; 4]).iter().all(|x| x.abs() < 1e-15));
        let rank_one = DenseMatrix::outer(mu.as_slice(), &[1.0; 4]);
        let p1 = StochasticMatrix::new(rank_one).unwrap();
        assert_eq!(deviation(&p1, &mu).max_abs(), 0.0);
    }

    #[test]
    fn spectrum_of_rank_one_chain() {
        let mu = ProbabilityVector::new(vec![0.1, 0.6, 0.3]).unwrap();
        let p = StochasticMatrix::new(DenseMatrix::outer(mu.as_slice(), &[1.0; 3])).unwrap();
        let spec = pstar_p_spectrum(&p, &mu).unwrap();
        assert_eq!(spec.lambdas[0], 1.0);
        assert!(spec.lambdas[1].abs() < 1e-14 && spec.lambdas[2].abs() < 1e-14);
    }

    #[test]
    fn spectral_vectors_are_orthonormal() {
        let (p, mu) = small_reversible();
        let spec = pstar_p_spectrum(&p, &mu).unwrap();
        let w = mu.inverse_weights().unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let ip = weighted_inner(
                    &spec.right_vectors.column(i),
                    &spec.right_vectors.column(j),
                    &w,
                )
                .unwrap();
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((ip - expect).abs() < 1e-8);
            }
        }
        assert_eq!(spec.left_vectors.column(0), vec![1.0; 4]);
        // Reversible: P* P = P^2, so sqrt(lambda_k) are |eigenvalues of P|.
        let mut eig: Vec<f64> = crate::linalg::general_eigenvalues(p.matrix())
            .unwrap()
            .iter()
            .map(|z| z.norm())
            .collect();
        eig.sort_by(|a, b| b.total_cmp(a));
        for k in 0..4 {
            assert!((spec.sqrt_lambda(k) - eig[k]).abs() < 1e-10);
        }
    }

    #[test]
    fn shift_spectrum_is_degenerate() {
        let spec = pstar_p_spectrum(&shift3(), &ProbabilityVector::uniform(3)).unwrap();
        assert!(spec.lambdas.iter().all(|l| (l - 1.0).abs() < 1e-12));
    }

    #[test]
    fn tarjan_counts_components() {
        let succ = vec![vec![1], vec![2], vec![0], vec![2, 4], vec![3], vec![]];
        assert_eq!(strongly_connected_components(6, &succ), 3);
    }
}
