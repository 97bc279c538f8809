//! Partitions of the state space and the aggregation/disaggregation operators
//! built on them.

use std::io::{BufRead, Write};

use crate::chain::{ProbabilityVector, StochasticMatrix};
use crate::error::{Error, Result};
use crate::linalg::{DenseMatrix, LuFactorization};

/// Relative pivot below which the inner matrix of the coarse projection is
/// considered singular.
const SINGULAR_PIVOT_RATIO: f64 = 1e-12;

/// Assignment of each fine state to one of `n` coarse states, none empty.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    assignment: Vec<usize>,
    n: usize,
}

impl Partition {
    /// Builds a partition whose coarse count is one past the largest index.
    pub fn new(assignment: Vec<usize>) -> Result<Self> {
        let n = assignment.iter().max().map_or(0, |m| m + 1);
        Self::with_count(assignment, n)
    }

    /// Builds a partition with exactly `n` coarse states.
    pub fn with_count(assignment: Vec<usize>, n: usize) -> Result<Self> {
        if assignment.is_empty() {
            return Err(Error::InvalidPartition("no fine states".into()));
        }
        let mut seen = vec![false; n];
        for (j, &c) in assignment.iter().enumerate() {
            if c >= n {
                return Err(Error::InvalidPartition(format!(
                    "fine state {j} assigned to coarse state {c}, but there are only {n}"
                )));
            }
            seen[c] = true;
        }
        if let Some(empty) = seen.iter().position(|s| !s) {
            return Err(Error::InvalidPartition(format!("coarse state {empty} is empty")));
        }
        Ok(Partition { assignment, n })
    }

    /// Every fine state its own coarse state.
    pub fn singletons(len: usize) -> Self {
        Partition {
            assignment: (0..len).collect(),
            n: len,
        }
    }

    /// All fine states in one coarse state.
    pub fn single(len: usize) -> Self {
        Partition {
            assignment: vec![0; len],
            n: 1,
        }
    }

    /// Number of coarse states.
    pub fn coarse_count(&self) -> usize {
        self.n
    }

    /// Number of fine states.
    pub fn len(&self) -> usize {
        self.assignment.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignment.is_empty()
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn coarse_index(&self, fine: usize) -> usize {
        self.assignment[fine]
    }

    /// Fine states of each coarse state, in increasing order.
    pub fn strata(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.n];
        for (j, &c) in self.assignment.iter().enumerate() {
            out[c].push(j);
        }
        out
    }

    pub fn stratum_sizes(&self) -> Vec<usize> {
        let mut out = vec![0; self.n];
        for &c in &self.assignment {
            out[c] += 1;
        }
        out
    }

    /// Whether some coarse state holds more than one fine state.
    pub fn has_multi_state_stratum(&self) -> bool {
        self.n < self.assignment.len()
    }

    /// Whether every stratum of `self` lies inside a stratum of `coarser`.
    pub fn refines(&self, coarser: &Partition) -> Result<()> {
        check_len(self.len(), coarser.len())?;
        let mut parent: Vec<Option<usize>> = vec![None; self.n];
        for (j, (&f, &c)) in self.assignment.iter().zip(&coarser.assignment).enumerate() {
            match parent[f] {
                None => parent[f] = Some(c),
                Some(p) if p != c => return Err(Error::NotRefinement { state: j }),
                _ => {}
            }
        }
        Ok(())
    }

    /// Reads `fine coarse` pairs, one per line. Blank lines and lines starting
    /// with `#` are skipped. Every fine index `0..N-1` must appear once.
    pub fn read<R: BufRead>(reader: R) -> Result<Self> {
        let mut pairs = Vec::new();
        for (lineno, line) in reader.lines().enumerate() {
            let line = line?;
            let t = line.trim();
            if t.is_empty() || t.starts_with('#') {
                continue;
            }
            let parse = |s: Option<&str>| -> Result<usize> {
                s.ok_or_else(|| Error::Parse {
                    line: lineno + 1,
                    message: "expected `fine coarse`".into(),
                })?
                .parse()
                .map_err(|e| Error::Parse {
                    line: lineno + 1,
                    message: format!("{e}"),
                })
            };
            let mut it = t.split_whitespace();
            let fine = parse(it.next())?;
            let coarse = parse(it.next())?;
            if it.next().is_some() {
                return Err(Error::Parse {
                    line: lineno + 1,
                    message: "trailing fields".into(),
                });
            }
            pairs.push((fine, coarse));
        }
        let len = pairs.len();
        let mut assignment = vec![usize::MAX; len];
        for (fine, coarse) in pairs {
            if fine >= len || assignment[fine] != usize::MAX {
                return Err(Error::InvalidPartition(format!(
                    "fine state {fine} is out of range or listed twice"
                )));
            }
            assignment[fine] = coarse;
        }
        Partition::new(assignment)
    }

    pub fn write<W: Write>(&self, mut w: W) -> Result<()> {
        for (j, c) in self.assignment.iter().enumerate() {
            writeln!(w, "{j} {c}")?;
        }
        Ok(())
    }
}

fn check_len(got: usize, expected: usize) -> Result<()> {
    if got == expected {
        Ok(())
    } else {
        Err(Error::Dimension(format!(
            "vector or partition of length {got}, expected {expected}"
        )))
    }
}

/// Total mass of each coarse state.
pub fn aggregate(nu: &[f64], part: &Partition) -> Result<Vec<f64>> {
    check_len(nu.len(), part.len())?;
    let mut out = vec![0.0; part.n];
    for (x, &c) in nu.iter().zip(&part.assignment) {
        out[c] += x;
    }
    Ok(out)
}

fn positive_masses(nu: &ProbabilityVector, part: &Partition) -> Result<Vec<f64>> {
    let masses = aggregate(nu.as_slice(), part)?;
    match masses.iter().position(|&m| m <= 0.0) {
        Some(stratum) => Err(Error::ZeroMassStratum { stratum }),
        None => Ok(masses),
    }
}

/// Spreads each coarse value over its stratum in proportion to `nu`.
pub fn disaggregate(z: &[f64], nu: &ProbabilityVector, part: &Partition) -> Result<Vec<f64>> {
    check_len(z.len(), part.n)?;
    let masses = positive_masses(nu, part)?;
    Ok(nu
        .as_slice()
        .iter()
        .zip(&part.assignment)
        .map(|(x, &c)| z[c] * x / masses[c])
        .collect())
}

/// The aggregation operator as an `n x N` matrix.
pub fn aggregation_matrix(part: &Partition) -> DenseMatrix {
    let mut a = DenseMatrix::zeros(part.n, part.len());
    for (j, &c) in part.assignment.iter().enumerate() {
        a[(c, j)] = 1.0;
    }
    a
}

/// The disaggregation operator `D(nu)` as an `N x n` matrix.
pub fn disaggregation_matrix(nu: &ProbabilityVector, part: &Partition) -> Result<DenseMatrix> {
    check_len(nu.len(), part.len())?;
    let masses = positive_masses(nu, part)?;
    let mut d = DenseMatrix::zeros(part.len(), part.n);
    for (j, &c) in part.assignment.iter().enumerate() {
        d[(j, c)] = nu[j] / masses[c];
    }
    Ok(d)
}

/// The coarse chain together with the data it was built from.
#[derive(Debug, Clone)]
pub struct CoarseModel {
    pub partition: Partition,
    pub base: ProbabilityVector,
    pub matrix: StochasticMatrix,
}

/// `C(nu) = A P D(nu)`.
pub fn coarse_matrix(
    p: &StochasticMatrix,
    nu: &ProbabilityVector,
    part: &Partition,
) -> Result<CoarseModel> {
    check_len(p.dim(), part.len())?;
    check_len(nu.len(), part.len())?;
    let masses = positive_masses(nu, part)?;
    let mut c = DenseMatrix::zeros(part.n, part.n);
    for j in 0..p.dim() {
        let cj = part.assignment[j];
        let weight = nu[j] / masses[cj];
        if weight == 0.0 {
            continue;
        }
        for &(i, pij) in p.column_entries(j) {
            c[(part.assignment[i], cj)] += pij * weight;
        }
    }
    Ok(CoarseModel {
        partition: part.clone(),
        base: nu.clone(),
        matrix: StochasticMatrix::renormalized(c)?,
    })
}

/// `Pi(nu) = D(nu) A`, the orthogonal projection in `l2(1/nu)` onto vectors
/// proportional to `nu` on each stratum.
pub fn orthogonal_projection(nu: &ProbabilityVector, part: &Partition) -> Result<DenseMatrix> {
    check_len(nu.len(), part.len())?;
    if !nu.is_strictly_positive() {
        return Err(Error::NotProbability(
            "projection base must be strictly positive".into(),
        ));
    }
    let masses = positive_masses(nu, part)?;
    let n = part.len();
    let a = &part.assignment;
    Ok(DenseMatrix::from_fn(n, n, |i, j| {
        if a[i] == a[j] {
            nu[i] / masses[a[i]]
        } else {
            0.0
        }
    }))
}

/// `S(nu) = D [A B D]^{-1} A B` with `B = I - P + mu 1^T`.
pub fn coarse_projection(
    p: &StochasticMatrix,
    mu: &ProbabilityVector,
    nu: &ProbabilityVector,
    part: &Partition,
) -> Result<DenseMatrix> {
    let (d, m) = coarse_projection_factors(p, mu, nu, part)?;
    d.matmul(&m)
}

/// `S(nu) = D M` with `D = D(nu)` (N x n) and `M = (A B D)^{-1} A B` (n x N).
pub fn coarse_projection_factors(
    p: &StochasticMatrix,
    mu: &ProbabilityVector,
    nu: &ProbabilityVector,
    part: &Partition,
) -> Result<(DenseMatrix, DenseMatrix)> {
    check_len(mu.len(), p.dim())?;
    check_len(p.dim(), part.len())?;
    if !nu.is_strictly_positive() {
        return Err(Error::NotProbability(
            "projection base must be strictly positive".into(),
        ));
    }
    let n = p.dim();
    let b = DenseMatrix::from_fn(n, n, |i, j| {
        let id = if i == j { 1.0 } else { 0.0 };
        id - p.matrix()[(i, j)] + mu[i]
    });
    // A B: sum the rows of B within each stratum.
    let mut ab = DenseMatrix::zeros(part.n, n);
    for i in 0..n {
        let c = part.assignment[i];
        for (dst, src) in ab.row_mut(c).iter_mut().zip(b.row(i)) {
            *dst += src;
        }
    }
    let d = disaggregation_matrix(nu, part)?;
    let inner = ab.matmul(&d)?;
    let lu = LuFactorization::new(&inner)?;
    let ratio = lu.min_pivot_ratio();
    if ratio < SINGULAR_PIVOT_RATIO {
        return Err(Error::SingularMatrix { pivot: ratio });
    }
    Ok((d, lu.solve(&ab)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::steady_state;

    fn two_strata() -> Partition {
        Partition::new(vec![0, 0, 1]).unwrap()
    }

    fn chain4() -> (StochasticMatrix, ProbabilityVector) {
        let p = DenseMatrix::from_rows(&[
            vec![0.5, 0.2, 0.0, 0.3],
            vec![0.3, 0.4, 0.2, 0.0],
            vec![0.0, 0.4, 0.5, 0.1],
            vec![0.2, 0.0, 0.3, 0.6],
        ])
        .unwrap();
        let p = StochasticMatrix::new(p).unwrap();
        let mu = steady_state(&p, 1e-12, 1 << 12).unwrap();
        (p, mu)
    }

    #[test]
    fn partition_validation() {
        assert!(Partition::new(vec![0, 2, 2]).is_err());
        assert!(Partition::with_count(vec![0, 1], 3).is_err());
        assert!(Partition::new(vec![]).is_err());
        assert_eq!(two_strata().strata(), vec![vec![0, 1], vec![2]]);
    }

    #[test]
    fn partition_file_round_trip() {
        let part = Partition::new(vec![1, 0, 1, 2]).unwrap();
        let mut buf = Vec::new();
        part.write(&mut buf).unwrap();
        assert_eq!(Partition::read(&buf[..]).unwrap(), part);
        let shuffled = "# comment\n2 1\n0 1\n\n1 0\n3 2\n";
        assert_eq!(Partition::read(shuffled.as_bytes()).unwrap(), part);
        assert!(Partition::read("0 0\n0 1\n".as_bytes()).is_err());
        assert!(matches!(
            Partition::read("0 x\n".as_bytes()),
            Err(Error::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn aggregate_examples() {
        assert_eq!(aggregate(&[0.5, 0.25, 0.25], &two_strata()).unwrap(), vec![0.75, 0.25]);
        let nu = [0.1, 0.2, 0.7];
        assert_eq!(aggregate(&nu, &Partition::singletons(3)).unwrap(), nu.to_vec());
    }

    #[test]
    fn disaggregate_examples() {
        let nu = ProbabilityVector::new(vec![0.2, 0.3, 0.5]).unwrap();
        let got = disaggregate(&[0.4, 0.6], &nu, &two_strata()).unwrap();
        for (a, b) in got.iter().zip([0.16, 0.24, 0.6]) {
            assert!((a - b).abs() < 1e-15);
        }
        let z = aggregate(nu.as_slice(), &two_strata()).unwrap();
        assert_eq!(disaggregate(&z, &nu, &two_strata()).unwrap(), nu.as_slice());
        assert_eq!(disaggregate(&[1.0], &nu, &Partition::single(3)).unwrap(), nu.as_slice());
        let zero = ProbabilityVector::new(vec![0.0, 0.0, 1.0]).unwrap();
        assert!(matches!(
            disaggregate(&[0.5, 0.5], &zero, &two_strata()),
            Err(Error::ZeroMassStratum { stratum: 0 })
        ));
    }

    #[test]
    fn coarse_matrix_examples() {
        let (p, mu) = chain4();
        let c = coarse_matrix(&p, &mu, &Partition::singletons(4)).unwrap();
        assert!(c.matrix.matrix().max_abs_diff(p.matrix()) < 1e-15);
        let c = coarse_matrix(&p, &mu, &Partition::single(4)).unwrap();
        assert_eq!(c.matrix.matrix().as_slice(), &[1.0]);
        let part = Partition::new(vec![0, 0, 1, 1]).unwrap();
        let c = coarse_matrix(&p, &mu, &part).unwrap();
        let dense = aggregation_matrix(&part)
            .matmul(p.matrix())
            .unwrap()
            .matmul(&disaggregation_matrix(&mu, &part).unwrap())
            .unwrap();
        assert!(c.matrix.matrix().max_abs_diff(&dense) < 1e-15);
    }

    #[test]
    fn projection_examples() {
        let (p, mu) = chain4();
        let part = Partition::new(vec![0, 1, 1, 0]).unwrap();
        let pi = orthogonal_projection(&mu, &part).unwrap();
        assert!(pi.matmul(&pi).unwrap().max_abs_diff(&pi) < 1e-12);
        assert!(pi
            .matvec(mu.as_slice())
            .iter()
            .zip(mu.as_slice())
            .all(|(a, b)| (a - b).abs() < 1e-15));
        let ad = aggregation_matrix(&part)
            .matmul(&disaggregation_matrix(&mu, &part).unwrap())
            .unwrap();
        assert!(ad.max_abs_diff(&DenseMatrix::identity(2)) < 1e-12);
        assert_eq!(
            orthogonal_projection(&mu, &Partition::singletons(4)).unwrap(),
            DenseMatrix::identity(4)
        );
        let rank_one = orthogonal_projection(&mu, &Partition::single(4)).unwrap();
        assert!(rank_one.max_abs_diff(&DenseMatrix::outer(mu.as_slice(), &[1.0; 4])) < 1e-15);

        let s = coarse_projection(&p, &mu, &mu, &part).unwrap();
        assert!(s.matmul(&s).unwrap().max_abs_diff(&s) < 1e-10);
        assert!(pi.matmul(&s).unwrap().max_abs_diff(&s) < 1e-10);
        assert!(s.matmul(&pi).unwrap().max_abs_diff(&pi) < 1e-10);
        let s_id = coarse_projection(&p, &mu, &mu, &Partition::singletons(4)).unwrap();
        assert!(s_id.max_abs_diff(&DenseMatrix::identity(4)) < 1e-12);
    }

    #[test]
    fn refinement_check() {
        let fine = Partition::new(vec![0, 1, 2, 2]).unwrap();
        let coarse = Partition::new(vec![0, 0, 1, 1]).unwrap();
        assert!(fine.refines(&coarse).is_ok());
        assert!(matches!(coarse.refines(&fine), Err(Error::NotRefinement { state: 1 })));
    }
}
