#![allow(dead_code)]

use iad_core::chain::{ProbabilityVector, StochasticMatrix};
use iad_core::coarse::Partition;
use iad_core::linalg::DenseMatrix;
use rand::seq::SliceRandom;
use rand::Rng;

fn column_normalize(mut m: DenseMatrix) -> StochasticMatrix {
    let n = m.rows();
    for j in 0..n {
        let s: f64 = (0..n).map(|i| m[(i, j)]).sum();
        for i in 0..n {
            m[(i, j)] /= s;
        }
    }
    StochasticMatrix::new(m).expect("normalized columns")
}

/// Irreducible column-stochastic chain with a positive diagonal. A directed
/// cycle through all states guarantees irreducibility.
pub fn random_chain<R: Rng>(rng: &mut R, n: usize, density: f64) -> StochasticMatrix {
    let mut m = DenseMatrix::zeros(n, n);
    for j in 0..n {
        m[(j, j)] = rng.gen_range(0.1..1.0);
        m[((j + 1) % n, j)] += rng.gen_range(0.1..1.0);
        for i in 0..n {
            if rng.gen_bool(density) {
                m[(i, j)] += rng.gen_range(0.0..1.0);
            }
        }
    }
    column_normalize(m)
}

/// Reversible chain `P_ij = W_ij / d_j` from symmetric weights, with its exact
/// steady state `d / sum(d)`.
pub fn random_reversible<R: Rng>(rng: &mut R, n: usize, density: f64) -> (StochasticMatrix, ProbabilityVector) {
    let mut w = DenseMatrix::zeros(n, n);
    for i in 0..n {
        w[(i, i)] = rng.gen_range(0.1..1.0);
        let next = (i + 1) % n;
        if next != i {
            let x = rng.gen_range(0.1..1.0);
            w[(i, next)] += x;
            w[(next, i)] += x;
        }
        for j in 0..i {
            if rng.gen_bool(density) {
                let x = rng.gen_range(0.0..1.0);
                w[(i, j)] += x;
                w[(j, i)] += x;
            }
        }
    }
    let d: Vec<f64> = (0..n).map(|j| (0..n).map(|i| w[(i, j)]).sum()).collect();
    let mu = ProbabilityVector::normalized(d).expect("positive degrees");
    (column_normalize(w), mu)
}

/// Random partition of `len` states into exactly `n` nonempty strata.
pub fn random_partition<R: Rng>(rng: &mut R, len: usize, n: usize) -> Partition {
    let mut labels: Vec<usize> = (0..n).chain((n..len).map(|_| rng.gen_range(0..n))).collect();
    labels.shuffle(rng);
    Partition::with_count(labels, n).expect("every label used")
}

/// Splits each stratum of `coarse` into up to `pieces` random substrata.
pub fn random_refinement<R: Rng>(rng: &mut R, coarse: &Partition, pieces: usize) -> Partition {
    let raw: Vec<usize> = coarse
        .assignment()
        .iter()
        .map(|&c| c * pieces + rng.gen_range(0..pieces))
        .collect();
    let mut used: Vec<usize> = raw.clone();
    used.sort_unstable();
    used.dedup();
    let labels = raw.iter().map(|r| used.binary_search(r).expect("present")).collect();
    Partition::new(labels).expect("compact labels")
}
