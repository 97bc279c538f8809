//! Example chains: discretized overdamped Langevin dynamics on periodic grids
//! in one and two dimensions, their irreversible perturbations, the partition
//! families used to study them, and a few pathological small chains.

use std::collections::BTreeMap;
use std::fmt;
use std::io::BufRead;
use std::str::FromStr;
use std::sync::Arc;

use crate::chain::{steady_state, ProbabilityVector, StochasticMatrix};
use crate::coarse::Partition;
use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;

pub type Potential1D = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
pub type Potential2D = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// Tilted double well `(1 - x^2)^2 + x/2`.
pub fn double_well(x: f64) -> f64 {
    (1.0 - x * x).powi(2) + 0.5 * x
}

/// Options for [`three_well`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ThreeWellOptions {
    /// Use `(y - 5/3)^2` in the second exponential instead of `(y^2 - 5/3)^2`.
    pub park_variant: bool,
    /// Add the confining term `0.2 x^4 + 0.2 (y - 1/3)^4`.
    pub confinement: bool,
}

impl Default for ThreeWellOptions {
    fn default() -> Self {
        ThreeWellOptions {
            park_variant: false,
            confinement: true,
        }
    }
}

/// Three-well potential with two deep wells near `(+-1, 0)` and a shallow one
/// near the top.
pub fn three_well(x: f64, y: f64, opts: ThreeWellOptions) -> f64 {
    let second = if opts.park_variant {
        (y - 5.0 / 3.0).powi(2)
    } else {
        (y * y - 5.0 / 3.0).powi(2)
    };
    let wells = 3.0 * (-x * x - (y - 1.0 / 3.0).powi(2)).exp() - 3.0 * (-x * x - second).exp()
        - 5.0 * (-(x - 1.0).powi(2) - y * y).exp()
        - 5.0 * (-(x + 1.0).powi(2) - y * y).exp();
    if opts.confinement {
        wells + 0.2 * x.powi(4) + 0.2 * (y - 1.0 / 3.0).powi(4)
    } else {
        wells
    }
}

/// Placement of the `N` grid points on `[a, b]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GridSpacing {
    /// `N` points including both endpoints, spacing `(b - a)/(N - 1)`.
    /// States carry the labels `1..N` of the points, with label `N` stored
    /// as state 0.
    #[default]
    Endpoints,
    /// State `i` sits at `a + (b - a) i / N`, so `b` itself is not a point.
    Uniform,
}

impl GridSpacing {
    /// Position of state `i` among the grid points, `0..N-1` from `a` to `b`.
    fn rank(self, i: usize, n: usize) -> usize {
        match self {
            GridSpacing::Endpoints => (i + n - 1) % n,
            GridSpacing::Uniform => i,
        }
    }

    /// Coordinate of state `i`.
    pub fn point(self, a: f64, b: f64, n: usize, i: usize) -> f64 {
        let denom = match self {
            GridSpacing::Endpoints => n - 1,
            GridSpacing::Uniform => n,
        };
        a + (b - a) / denom as f64 * self.rank(i, n) as f64
    }

    /// Index of the equal-width subinterval of `[a, b]` (one of `s`) that
    /// holds state `i`; the right endpoint joins the last subinterval.
    fn interval(self, i: usize, n: usize, s: usize) -> usize {
        match self {
            GridSpacing::Endpoints => (s * self.rank(i, n) / (n - 1)).min(s - 1),
            GridSpacing::Uniform => s * i / n,
        }
    }
}

impl FromStr for GridSpacing {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "endpoints" => Ok(GridSpacing::Endpoints),
            "uniform" => Ok(GridSpacing::Uniform),
            _ => Err(Error::InvalidParameter(format!("unknown grid spacing `{s}`"))),
        }
    }
}

#[derive(Clone)]
pub struct Chain1DParams {
    pub potential: Potential1D,
    pub a: f64,
    pub b: f64,
    pub n: usize,
    pub temperature: f64,
    pub spacing: GridSpacing,
}

impl fmt::Debug for Chain1DParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Chain1DParams")
            .field("a", &self.a)
            .field("b", &self.b)
            .field("n", &self.n)
            .field("temperature", &self.temperature)
            .field("spacing", &self.spacing)
            .finish_non_exhaustive()
    }
}

impl Chain1DParams {
    /// The double well on `[-1.7, 1.55]` with 100 points at `T = 0.1`.
    pub fn reference() -> Self {
        Chain1DParams {
            potential: Arc::new(double_well),
            a: -1.7,
            b: 1.55,
            n: 100,
            temperature: 0.1,
            spacing: GridSpacing::Endpoints,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.a < self.b) || self.n < 3 || !(self.temperature > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "need a < b, N >= 3 and T > 0 (got a={}, b={}, N={}, T={})",
                self.a, self.b, self.n, self.temperature
            )));
        }
        Ok(())
    }

    pub fn grid_point(&self, i: usize) -> f64 {
        self.spacing.point(self.a, self.b, self.n, i)
    }
}

/// Neighbour structure of the two-dimensional chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MoveSet {
    /// Moves to `(i +- 1, j +- 1)`.
    Diagonal,
    /// Moves to `(i +- 1, j)` and `(i, j +- 1)`.
    AxisAligned,
}

impl MoveSet {
    fn offsets(self) -> [(isize, isize); 4] {
        match self {
            MoveSet::Diagonal => [(-1, -1), (-1, 1), (1, -1), (1, 1)],
            MoveSet::AxisAligned => [(-1, 0), (1, 0), (0, -1), (0, 1)],
        }
    }
}

impl FromStr for MoveSet {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "diagonal" => Ok(MoveSet::Diagonal),
            "axis_aligned" | "axis" => Ok(MoveSet::AxisAligned),
            _ => Err(Error::InvalidParameter(format!("unknown move set `{s}`"))),
        }
    }
}

#[derive(Clone)]
pub struct Chain2DParams {
    pub potential: Potential2D,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub n: usize,
    pub temperature: f64,
    pub move_set: MoveSet,
    pub spacing: GridSpacing,
}

impl fmt::Debug for Chain2DParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Chain2DParams")
            .field("box", &(self.a, self.b, self.c, self.d))
            .field("n", &self.n)
            .field("temperature", &self.temperature)
            .field("move_set", &self.move_set)
            .field("spacing", &self.spacing)
            .finish_non_exhaustive()
    }
}

/// Move set used by [`Chain2DParams::reference`]. Diagonal moves on a grid of even
/// side never change the parity of `i + j`, so that chain is reducible.
pub const DEFAULT_MOVE_SET: MoveSet = MoveSet::AxisAligned;

impl Chain2DParams {
    /// The three-well potential on `[-1.7, 1.7] x [-1.7, 2]`, 50 points per
    /// axis, `T = 1/4`.
    pub fn reference() -> Self {
        Self::reference_with(DEFAULT_MOVE_SET, ThreeWellOptions::default())
    }

    pub fn reference_with(move_set: MoveSet, opts: ThreeWellOptions) -> Self {
        Chain2DParams {
            potential: Arc::new(move |x, y| three_well(x, y, opts)),
            a: -1.7,
            b: 1.7,
            c: -1.7,
            d: 2.0,
            n: 50,
            temperature: 0.25,
            move_set,
            spacing: GridSpacing::Endpoints,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.a < self.b && self.c < self.d) || self.n < 3 || !(self.temperature > 0.0) {
            return Err(Error::InvalidParameter(
                "need a < b, c < d, N >= 3 and T > 0".into(),
            ));
        }
        Ok(())
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.n + j
    }
}

/// Normalized `exp(-V / T)` with the minimum of `V` subtracted first.
fn boltzmann_weights(values: Vec<f64>, temperature: f64) -> Result<ProbabilityVector> {
    if let Some(k) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter(format!("potential is not finite at grid point {k}")));
    }
    let vmin = values.iter().copied().fold(f64::INFINITY, f64::min);
    let w: Vec<f64> = values.iter().map(|v| (-(v - vmin) / temperature).exp()).collect();
    ProbabilityVector::normalized(w)
}

/// Discrete Boltzmann distribution on the periodic grid `x_i`, `i = 0..N-1`.
pub fn boltzmann_1d(spec: &Chain1DParams) -> Result<ProbabilityVector> {
    spec.validate()?;
    let v = (0..spec.n).map(|i| (spec.potential)(spec.grid_point(i))).collect();
    boltzmann_weights(v, spec.temperature)
}

/// Nearest-neighbour chain on a ring in detailed balance with `mu`.
pub fn reversible_chain_1d(mu: &ProbabilityVector) -> Result<StochasticMatrix> {
    let n = mu.len();
    if n < 3 || !mu.is_strictly_positive() {
        return Err(Error::InvalidParameter(
            "need at least 3 states with positive mass".into(),
        ));
    }
    let mut p = DenseMatrix::zeros(n, n);
    for i in 0..n {
        let mut off = 0.0;
        for j in [(i + 1) % n, (i + n - 1) % n] {
            let t = 0.5 * mu[j] / (mu[j] + mu[i]);
            p[(j, i)] = t;
            off += t;
        }
        p[(i, i)] = 1.0 - off;
    }
    StochasticMatrix::new(p)
}

/// Cyclic shift `i -> i + 1`.
pub fn right_shift(n: usize) -> Result<StochasticMatrix> {
    if n < 2 {
        return Err(Error::InvalidParameter("right shift needs N >= 2".into()));
    }
    let mut w = DenseMatrix::zeros(n, n);
    for i in 0..n {
        w[((i + 1) % n, i)] = 1.0;
    }
    StochasticMatrix::new(w)
}

/// Cyclic shift `i -> i - 1`, the transpose of [`right_shift`].
pub fn left_shift(n: usize) -> Result<StochasticMatrix> {
    StochasticMatrix::new(right_shift(n)?.matrix().transpose())
}

/// Direction of the shift mixed into the one-dimensional chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ShiftDirection {
    /// `i -> i - 1`. Reproduces the published power-method rates.
    #[default]
    Left,
    /// `i -> i + 1`.
    Right,
}

impl ShiftDirection {
    pub fn matrix(self, n: usize) -> Result<StochasticMatrix> {
        match self {
            ShiftDirection::Left => left_shift(n),
            ShiftDirection::Right => right_shift(n),
        }
    }
}

impl FromStr for ShiftDirection {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "left" => Ok(ShiftDirection::Left),
            "right" => Ok(ShiftDirection::Right),
            _ => Err(Error::InvalidParameter(format!("unknown shift direction `{s}`"))),
        }
    }
}

/// `(1 - alpha) P + alpha W`.
pub fn mix(p: &StochasticMatrix, w: &StochasticMatrix, alpha: f64) -> Result<StochasticMatrix> {
    p.mix(w, alpha)
}

/// Discrete Boltzmann distribution on the `N x N` grid, flattened row-major.
pub fn boltzmann_2d(spec: &Chain2DParams) -> Result<ProbabilityVector> {
    spec.validate()?;
    let n = spec.n;
    let mut v = Vec::with_capacity(n * n);
    for i in 0..n {
        let x = spec.spacing.point(spec.a, spec.b, n, i);
        for j in 0..n {
            v.push((spec.potential)(x, spec.spacing.point(spec.c, spec.d, n, j)));
        }
    }
    boltzmann_weights(v, spec.temperature)
}

/// Periodic chain on the grid moving to the four neighbours of `move_set`.
pub fn reversible_chain_2d(mu: &ProbabilityVector, spec: &Chain2DParams) -> Result<StochasticMatrix> {
    let n = spec.n;
    if mu.len() != n * n {
        return Err(Error::Dimension(format!(
            "steady state of length {} for a {n}x{n} grid",
            mu.len()
        )));
    }
    if !mu.is_strictly_positive() {
        return Err(Error::InvalidParameter("steady state must be positive".into()));
    }
    let wrap = |i: usize, k: isize| (i as isize + k).rem_euclid(n as isize) as usize;
    let mut p = DenseMatrix::zeros(n * n, n * n);
    for i in 0..n {
        for j in 0..n {
            let s = spec.index(i, j);
            let mut off = 0.0;
            for (di, dj) in spec.move_set.offsets() {
                let t = spec.index(wrap(i, di), wrap(j, dj));
                let w = 0.25 * mu[t] / (mu[t] + mu[s]);
                p[(t, s)] += w;
                off += w;
            }
            p[(s, s)] += 1.0 - off;
        }
    }
    StochasticMatrix::new(p)
}

/// Named partition families.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PartitionKind {
    /// `n` equal blocks on a ring of `N`, rotated by `ell`.
    Uniform1D { n: usize, ell: usize },
    /// `{0..ell}` and `{ell+1..N-1}`.
    Split1D { ell: usize },
    /// `s` stripes in the first grid coordinate.
    Stripes2D { s: usize },
    /// `s x s` blocks of the grid.
    Grid2D { s: usize },
    /// One coarse state per fine state.
    Singletons,
    /// One coarse state.
    Single,
}

impl FromStr for PartitionKind {
    type Err = Error;

    /// Parses `uniform1d:n,ell`, `split1d:ell`, `stripes2d:s`, `grid2d:s`,
    /// `singletons` or `single`.
    fn from_str(s: &str) -> Result<Self> {
        let (kind, args) = s.split_once(':').unwrap_or((s, ""));
        let nums: Vec<usize> = if args.is_empty() {
            Vec::new()
        } else {
            args.split(',')
                .map(|t| {
                    t.trim()
                        .parse()
                        .map_err(|_| Error::InvalidParameter(format!("bad partition argument `{t}`")))
                })
                .collect::<Result<_>>()?
        };
        let arity = |k: usize| -> Result<()> {
            if nums.len() == k {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!(
                    "partition `{kind}` takes {k} argument(s), got {}",
                    nums.len()
                )))
            }
        };
        match kind {
            "uniform1d" => {
                arity(2)?;
                Ok(PartitionKind::Uniform1D { n: nums[0], ell: nums[1] })
            }
            "split1d" => {
                arity(1)?;
                Ok(PartitionKind::Split1D { ell: nums[0] })
            }
            "stripes2d" => {
                arity(1)?;
                Ok(PartitionKind::Stripes2D { s: nums[0] })
            }
            "grid2d" => {
                arity(1)?;
                Ok(PartitionKind::Grid2D { s: nums[0] })
            }
            "singletons" => {
                arity(0)?;
                Ok(PartitionKind::Singletons)
            }
            "single" => {
                arity(0)?;
                Ok(PartitionKind::Single)
            }
            _ => Err(Error::InvalidParameter(format!("unknown partition kind `{kind}`"))),
        }
    }
}

/// Builds a partition of `len` fine states. For the 2D kinds `len` must be a
/// perfect square `N^2` and `spacing` says where the grid points sit.
pub fn partition_family(kind: PartitionKind, len: usize, spacing: GridSpacing) -> Result<Partition> {
    match kind {
        PartitionKind::Uniform1D { n, ell } => uniform1d(len, n, ell),
        PartitionKind::Split1D { ell } => split1d(len, ell),
        PartitionKind::Stripes2D { s } => stripes2d(grid_side(len)?, s, spacing),
        PartitionKind::Grid2D { s } => grid2d(grid_side(len)?, s, spacing),
        PartitionKind::Singletons => Ok(Partition::singletons(len)),
        PartitionKind::Single => Ok(Partition::single(len)),
    }
}

fn grid_side(len: usize) -> Result<usize> {
    let n = (len as f64).sqrt().round() as usize;
    if n * n == len {
        Ok(n)
    } else {
        Err(Error::InvalidParameter(format!("{len} states do not form a square grid")))
    }
}

/// Blocks `S_J = {floor(J N/n) + ell, ..., floor((J+1) N/n) + ell - 1}` for
/// `J < n - 1`; the last block takes the rest of the ring, wrapping around to
/// `{0, ..., ell - 1}`.
pub fn uniform1d(len: usize, n: usize, ell: usize) -> Result<Partition> {
    if n == 0 || n > len {
        return Err(Error::InvalidPartition(format!(
            "cannot split {len} states into {n} nonempty blocks"
        )));
    }
    let edge = |j: usize| j * len / n;
    if ell > len - edge(n - 1) {
        return Err(Error::InvalidPartition(format!(
            "offset {ell} too large for {n} blocks of {len} states"
        )));
    }
    let mut assignment = vec![n - 1; len];
    for j in 0..n - 1 {
        for x in edge(j) + ell..edge(j + 1) + ell {
            assignment[x] = j;
        }
    }
    Partition::with_count(assignment, n)
}

/// `{0..ell}` and `{ell+1..N-1}`.
pub fn split1d(len: usize, ell: usize) -> Result<Partition> {
    if ell + 1 >= len {
        return Err(Error::InvalidPartition(format!(
            "split point {ell} leaves the second block of {len} states empty"
        )));
    }
    Partition::new((0..len).map(|x| usize::from(x > ell)).collect())
}

/// Stripes across the first coordinate: `(i, j)` goes to the one of `s`
/// equal-width subintervals of `[a, b]` containing its first coordinate. With
/// [`GridSpacing::Uniform`] this is `floor(s i / N)`.
pub fn stripes2d(side: usize, s: usize, spacing: GridSpacing) -> Result<Partition> {
    if s == 0 || s > side || side < 2 {
        return Err(Error::InvalidPartition(format!("{s} stripes on a grid of side {side}")));
    }
    let assignment = (0..side * side)
        .map(|k| spacing.interval(k / side, side, s))
        .collect();
    Partition::with_count(assignment, s)
}

/// `s x s` blocks of equal-width subintervals in both coordinates, flattened
/// row-major.
pub fn grid2d(side: usize, s: usize, spacing: GridSpacing) -> Result<Partition> {
    if s == 0 || s > side || side < 2 {
        return Err(Error::InvalidPartition(format!("{s} blocks per axis on a grid of side {side}")));
    }
    let assignment = (0..side * side)
        .map(|k| spacing.interval(k / side, side, s) * s + spacing.interval(k % side, side, s))
        .collect();
    Partition::with_count(assignment, s * s)
}

/// A small chain on which IAD misbehaves in a documented way.
#[derive(Debug, Clone)]
pub struct Fixture {
    pub name: &'static str,
    pub chain: StochasticMatrix,
    pub partition: Partition,
    pub initial: ProbabilityVector,
}

/// The three pathological examples: a chain whose coarse matrix at the given
/// starting vector is reducible, a chain with reducible `P^T P`, and the
/// periodic three-state shift.
pub fn pathological_fixtures() -> Vec<Fixture> {
    let third = 1.0 / 3.0;
    let reducible_coarse = DenseMatrix::from_rows(&[
        vec![0.0, third, 0.0],
        vec![1.0, third, 1.0],
        vec![0.0, third, 0.0],
    ])
    .expect("fixture shape");
    let marek = DenseMatrix::from_rows(&[
        vec![0.0, 1.0, 0.0, 0.5],
        vec![0.5, 0.0, 0.0, 0.0],
        vec![0.5, 0.0, 0.0, 0.5],
        vec![0.0, 0.0, 1.0, 0.0],
    ])
    .expect("fixture shape");
    vec![
        Fixture {
            name: "reducible_coarse",
            chain: StochasticMatrix::renormalized(reducible_coarse).expect("fixture is stochastic"),
            partition: Partition::new(vec![0, 0, 1]).expect("fixture partition"),
            initial: ProbabilityVector::new(vec![0.5, 0.0, 0.5]).expect("fixture vector"),
        },
        Fixture {
            name: "marek",
            chain: StochasticMatrix::new(marek).expect("fixture is stochastic"),
            partition: Partition::new(vec![0, 0, 1, 1]).expect("fixture partition"),
            // The uniform start happens to lie on a convergent path; a generic
            // start settles into a two-cycle.
            initial: ProbabilityVector::new(vec![0.1, 0.2, 0.3, 0.4]).expect("fixture vector"),
        },
        Fixture {
            name: "shift3",
            chain: right_shift(3).expect("fixture is stochastic"),
            partition: Partition::new(vec![0, 0, 1]).expect("fixture partition"),
            initial: ProbabilityVector::uniform(3),
        },
    ]
}

/// Which example chain a config describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    /// Double well on a ring, optionally mixed with a shift.
    Ring1D,
    /// Three-well potential on a torus.
    Grid2D,
}

/// Flat `key=value` description of a model and a partition.
///
/// Recognized keys: `model` (`1d` or `2d`), `N`, `T`, `a`, `b`, `c`, `d`,
/// `alpha`, `shift` (`left` or `right`), `spacing` (`endpoints` or
/// `uniform`), `move_set`, `park_variant`, `confinement`, `partition.kind`,
/// `partition.n`, `partition.ell`, `partition.s`. Missing keys take the
/// values of the published examples.
#[derive(Debug, Clone)]
pub struct ModelConfig {
    pub kind: ModelKind,
    pub n: usize,
    pub temperature: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub alpha: f64,
    pub shift: ShiftDirection,
    pub spacing: GridSpacing,
    pub move_set: MoveSet,
    pub potential: ThreeWellOptions,
    pub partition: Option<PartitionKind>,
}

/// A constructed model.
#[derive(Debug, Clone)]
pub struct Model {
    pub chain: StochasticMatrix,
    /// Closed-form steady state when one is known.
    pub exact_steady_state: Option<ProbabilityVector>,
    pub partition: Option<Partition>,
}

impl ModelConfig {
    pub fn reference_1d() -> Self {
        let s = Chain1DParams::reference();
        ModelConfig {
            kind: ModelKind::Ring1D,
            n: s.n,
            temperature: s.temperature,
            a: s.a,
            b: s.b,
            c: 0.0,
            d: 0.0,
            alpha: 0.0,
            shift: ShiftDirection::default(),
            spacing: s.spacing,
            move_set: DEFAULT_MOVE_SET,
            potential: ThreeWellOptions::default(),
            partition: None,
        }
    }

    pub fn reference_2d() -> Self {
        let s = Chain2DParams::reference();
        ModelConfig {
            kind: ModelKind::Grid2D,
            n: s.n,
            temperature: s.temperature,
            a: s.a,
            b: s.b,
            c: s.c,
            d: s.d,
            alpha: 0.0,
            shift: ShiftDirection::default(),
            spacing: s.spacing,
            move_set: s.move_set,
            potential: ThreeWellOptions::default(),
            partition: None,
        }
    }

    /// Looks up a built-in model by name: `1d`, `2d`.
    pub fn named(name: &str) -> Result<Self> {
        match name {
            "1d" => Ok(Self::reference_1d()),
            "2d" => Ok(Self::reference_2d()),
            _ => Err(Error::InvalidParameter(format!("unknown model `{name}`"))),
        }
    }

    pub fn parse<R: BufRead>(reader: R) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (lineno, line) in reader.lines().enumerate() {
            let line = line?;
            let t = line.trim();
            if t.is_empty() || t.starts_with('#') {
                continue;
            }
            let (k, v) = t.split_once('=').ok_or_else(|| Error::Parse {
                line: lineno + 1,
                message: "expected key=value".into(),
            })?;
            entries.insert(k.trim().to_string(), (lineno + 1, v.trim().to_string()));
        }
        let get = |k: &str| entries.get(k);
        let mut cfg = match get("model") {
            Some((_, m)) => Self::named(m)?,
            None => Self::reference_1d(),
        };
        fn num<T: FromStr>(entry: &(usize, String)) -> Result<T> {
            entry.1.parse().map_err(|_| Error::Parse {
                line: entry.0,
                message: format!("cannot parse `{}`", entry.1),
            })
        }
        for (key, entry) in &entries {
            match key.as_str() {
                "model" => {}
                "N" => cfg.n = num(entry)?,
                "T" => cfg.temperature = num(entry)?,
                "a" => cfg.a = num(entry)?,
                "b" => cfg.b = num(entry)?,
                "c" => cfg.c = num(entry)?,
                "d" => cfg.d = num(entry)?,
                "alpha" => cfg.alpha = num(entry)?,
                "shift" => cfg.shift = entry.1.parse()?,
                "spacing" => cfg.spacing = entry.1.parse()?,
                "move_set" => cfg.move_set = entry.1.parse()?,
                "park_variant" => cfg.potential.park_variant = num(entry)?,
                "confinement" => cfg.potential.confinement = num(entry)?,
                "partition.kind" | "partition.n" | "partition.ell" | "partition.s" => {}
                _ => {
                    return Err(Error::Parse {
                        line: entry.0,
                        message: format!("unknown key `{key}`"),
                    })
                }
            }
        }
        if let Some(kind) = get("partition.kind") {
            let param = |k: &str| -> Result<usize> {
                get(k).map(num).unwrap_or_else(|| {
                    Err(Error::Parse {
                        line: kind.0,
                        message: format!("partition kind `{}` needs `{k}`", kind.1),
                    })
                })
            };
            cfg.partition = Some(match kind.1.as_str() {
                "uniform1d" => PartitionKind::Uniform1D {
                    n: param("partition.n")?,
                    ell: param("partition.ell").or_else(|_| Ok::<_, Error>(0))?,
                },
                "split1d" => PartitionKind::Split1D { ell: param("partition.ell")? },
                "stripes2d" => PartitionKind::Stripes2D { s: param("partition.s")? },
                "grid2d" => PartitionKind::Grid2D { s: param("partition.s")? },
                other => other.parse()?,
            });
        }
        Ok(cfg)
    }

    pub fn chain_1d_params(&self) -> Chain1DParams {
        Chain1DParams {
            potential: Arc::new(double_well),
            a: self.a,
            b: self.b,
            n: self.n,
            temperature: self.temperature,
            spacing: self.spacing,
        }
    }

    pub fn chain_2d_params(&self) -> Chain2DParams {
        let opts = self.potential;
        Chain2DParams {
            potential: Arc::new(move |x, y| three_well(x, y, opts)),
            a: self.a,
            b: self.b,
            c: self.c,
            d: self.d,
            n: self.n,
            temperature: self.temperature,
            move_set: self.move_set,
            spacing: self.spacing,
        }
    }

    /// Number of fine states.
    pub fn state_count(&self) -> usize {
        match self.kind {
            ModelKind::Ring1D => self.n,
            ModelKind::Grid2D => self.n * self.n,
        }
    }

    pub fn build(&self) -> Result<Model> {
        let (chain, exact) = match self.kind {
            ModelKind::Ring1D => {
                let mu = boltzmann_1d(&self.chain_1d_params())?;
                let p = reversible_chain_1d(&mu)?;
                if self.alpha == 0.0 {
                    (p, Some(mu))
                } else {
                    (mix(&p, &self.shift.matrix(self.n)?, self.alpha)?, None)
                }
            }
            ModelKind::Grid2D => {
                if self.alpha != 0.0 {
                    return Err(Error::InvalidParameter(
                        "mixing is only defined for the 1d model".into(),
                    ));
                }
                let spec = self.chain_2d_params();
                let mu = boltzmann_2d(&spec)?;
                (reversible_chain_2d(&mu, &spec)?, Some(mu))
            }
        };
        let partition = self
            .partition
            .map(|k| partition_family(k, chain.dim(), self.spacing))
            .transpose()?;
        Ok(Model {
            chain,
            exact_steady_state: exact,
            partition,
        })
    }
}

impl Model {
    /// The closed-form steady state if known, otherwise a computed one.
    pub fn steady_state(&self, tol: f64, kpow: usize) -> Result<ProbabilityVector> {
        match &self.exact_steady_state {
            Some(mu) => Ok(mu.clone()),
            None => steady_state(&self.chain, tol, kpow),
        }
    }
}
