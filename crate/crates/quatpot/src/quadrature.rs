//! Deterministic quadrature over boxes and tori in high dimension.
//!
//! Two node sources are supported: tensor-product grids (Gauss-Legendre on
//! boxes, uniform trapezoid on the torus, where it is the spectrally accurate
//! choice) and randomized Halton quasi-Monte-Carlo for dimensions where a
//! tensor grid blows past the node budget.
//!
//! Every reduction over nodes runs as a fixed binary tree on the node index
//! range, split at the midpoint down to a constant leaf size. The tree shape
//! depends only on the node count, never on the thread count, so parallel
//! results are bit-for-bit reproducible.

use crate::error::{Error, Result};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Hard cap on the number of quadrature nodes in a single pass.
pub const NODE_CAP: u128 = 100_000_000;

/// Below this many nodes a range is summed sequentially instead of split.
const LEAF_CHUNK: u64 = 1024;

/// One-dimensional rule replicated across axes of a tensor grid.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QuadRule {
    /// Gauss-Legendre nodes and weights, exact through degree `2m - 1`.
    GaussLegendre,
    /// Uniform nodes with equal weights; exact for trigonometric
    /// polynomials of degree below the node count. Torus only.
    TrapezoidPeriodic,
}

/// Node-placement request attached to a [`Domain`].
#[derive(Clone, Debug)]
pub struct QuadSpec {
    /// Nodes per axis for the tensor-grid rules.
    pub nodes_per_axis: usize,
    /// Which one-dimensional rule the grid replicates.
    pub rule: QuadRule,
    /// When set, a randomized Halton sequence with this many samples
    /// replaces the tensor grid entirely.
    pub qmc_samples: Option<u64>,
}

/// Integration region. Boxes are axis-aligned cubes `[lo, hi]^d`; the torus
/// is `[0, 2*pi)^d` with all fields understood as periodic.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DomainKind {
    Box { lo: f64, hi: f64 },
    Torus,
}

/// Integration region plus the quadrature rule to use on it.
#[derive(Clone, Debug)]
pub struct Domain {
    pub kind: DomainKind,
    pub quad: QuadSpec,
}

impl Domain {
    /// Cube `[lo, hi]^d` with an `m`-point Gauss-Legendre rule per axis.
    pub fn cube(lo: f64, hi: f64, nodes_per_axis: usize) -> Result<Self> {
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "box bounds must be finite with lo < hi, got [{lo}, {hi}]"
            )));
        }
        if nodes_per_axis == 0 {
            return Err(Error::InvalidConfig(
                "nodes_per_axis must be at least 1".into(),
            ));
        }
        Ok(Domain {
            kind: DomainKind::Box { lo, hi },
            quad: QuadSpec {
                nodes_per_axis,
                rule: QuadRule::GaussLegendre,
                qmc_samples: None,
            },
        })
    }

    /// Torus `[0, 2*pi)^d` with an `m`-point periodic trapezoid rule per axis.
    pub fn torus(nodes_per_axis: usize) -> Result<Self> {
        if nodes_per_axis == 0 {
            return Err(Error::InvalidConfig(
                "nodes_per_axis must be at least 1".into(),
            ));
        }
        Ok(Domain {
            kind: DomainKind::Torus,
            quad: QuadSpec {
                nodes_per_axis,
                rule: QuadRule::TrapezoidPeriodic,
                qmc_samples: None,
            },
        })
    }

    /// Switch this domain to randomized quasi-Monte-Carlo sampling.
    pub fn with_qmc(mut self, samples: u64) -> Self {
        self.quad.qmc_samples = Some(samples);
        self
    }

    /// Total node count for a `dims`-dimensional pass, after the budget check.
    pub fn node_count(&self, dims: usize) -> Result<u64> {
        let requested: u128 = match self.quad.qmc_samples {
            Some(s) => s as u128,
            None => {
                let m = self.quad.nodes_per_axis as u128;
                let mut total: u128 = 1;
                for _ in 0..dims {
                    total = total.checked_mul(m).unwrap_or(u128::MAX);
                    if total > NODE_CAP {
                        return Err(Error::NodeBudgetExceeded {
                            requested: total,
                            cap: NODE_CAP,
                        });
                    }
                }
                total
            }
        };
        if requested == 0 {
            return Err(Error::InvalidConfig("node count must be positive".into()));
        }
        if requested > NODE_CAP {
            return Err(Error::NodeBudgetExceeded {
                requested,
                cap: NODE_CAP,
            });
        }
        Ok(requested as u64)
    }

    /// Volume of the region in `dims` dimensions.
    pub fn volume(&self, dims: usize) -> f64 {
        match self.kind {
            DomainKind::Box { lo, hi } => (hi - lo).powi(dims as i32),
            DomainKind::Torus => (2.0 * std::f64::consts::PI).powi(dims as i32),
        }
    }

    /// Short label of the active rule, recorded in pairing results.
    pub fn rule_label(&self) -> String {
        match self.quad.qmc_samples {
            Some(s) => format!("qmc:{s}"),
            None => match self.quad.rule {
                QuadRule::GaussLegendre => format!("gauss-legendre:{}", self.quad.nodes_per_axis),
                QuadRule::TrapezoidPeriodic => {
                    format!("trapezoid-periodic:{}", self.quad.nodes_per_axis)
                }
            },
        }
    }

    /// Coarser copy for the refinement-difference error estimate: one fewer
    /// node per axis on grids, half the samples for QMC.
    pub fn coarsened(&self) -> Self {
        let mut out = self.clone();
        match out.quad.qmc_samples {
            Some(s) => out.quad.qmc_samples = Some((s / 2).max(1)),
            None => out.quad.nodes_per_axis = (out.quad.nodes_per_axis - 1).max(1),
        }
        out
    }
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
///
/// Newton iteration from the Chebyshev-like initial guess; converges in a
/// handful of steps for any practical `m`.
pub fn gauss_legendre(m: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(m >= 1);
    let mut nodes = vec![0.0; m];
    let mut weights = vec![0.0; m];
    let mf = m as f64;
    for i in 0..m.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (mf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // Recurrence for P_m(x) and P_m'(x).
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 2..=m {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let p = if m == 1 { x } else { p1 };
            let pm1 = if m == 1 { 1.0 } else { p0 };
            dp = mf * (x * p - pm1) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[m - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[m - 1 - i] = w;
    }
    if m % 2 == 1 {
        nodes[m / 2] = 0.0;
    }
    (nodes, weights)
}

/// First sixteen primes, the Halton bases. Caps QMC at 16 dimensions.
const HALTON_PRIMES: [u64; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];

/// Van der Corput radical inverse of `i` in the given base, in `[0, 1)`.
fn radical_inverse(base: u64, mut i: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut r = 0.0;
    while i > 0 {
        r += f * (i % base) as f64;
        i /= base;
        f *= inv;
    }
    r
}

enum SourceKind {
    /// Tensor grid: per-axis nodes plus weights, already mapped to the domain.
    Grid { nodes: Vec<f64>, weights: Vec<f64> },
    /// Randomized Halton points; `shift` is the Cranley-Patterson rotation
    /// and `weight` the constant volume / count.
    Qmc { shift: Vec<f64>, weight: f64 },
}

/// Concrete, fully determined set of quadrature nodes.
///
/// A node is addressed by its index in `0..len()`; [`NodeSet::fill`] writes
/// its coordinates and returns its weight. Index order is the canonical
/// order used for witnesses and for the reduction tree.
pub struct NodeSet {
    source: SourceKind,
    dims: usize,
    count: u64,
    nodes_per_axis: usize,
    kind: DomainKind,
}

impl NodeSet {
    /// Materializes the rule for the given domain and dimension.
    ///
    /// `seed` drives the QMC rotation and is mandatory in QMC mode; grid
    /// rules ignore it.
    pub fn build(domain: &Domain, dims: usize, seed: Option<u64>) -> Result<NodeSet> {
        let count = domain.node_count(dims)?;
        let source = match domain.quad.qmc_samples {
            Some(_) => {
                let seed = seed.ok_or_else(|| {
                    Error::InvalidConfig(
                        "quasi-Monte-Carlo quadrature requires an explicit seed".into(),
                    )
                })?;
                if dims > HALTON_PRIMES.len() {
                    return Err(Error::InvalidConfig(format!(
                        "QMC supports at most {} dimensions, got {dims}",
                        HALTON_PRIMES.len()
                    )));
                }
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let shift: Vec<f64> = (0..dims).map(|_| rng.gen::<f64>()).collect();
                SourceKind::Qmc {
                    shift,
                    weight: domain.volume(dims) / count as f64,
                }
            }
            None => {
                let m = domain.quad.nodes_per_axis;
                let (mut nodes, mut weights) = match domain.quad.rule {
                    QuadRule::GaussLegendre => gauss_legendre(m),
                    QuadRule::TrapezoidPeriodic => {
                        let h = 2.0 * std::f64::consts::PI / m as f64;
                        ((0..m).map(|j| j as f64 * h).collect(), vec![h; m])
                    }
                };
                if let DomainKind::Box { lo, hi } = domain.kind {
                    if domain.quad.rule == QuadRule::TrapezoidPeriodic {
                        return Err(Error::InvalidConfig(
                            "periodic trapezoid rule is only valid on the torus".into(),
                        ));
                    }
                    let c = 0.5 * (lo + hi);
                    let h = 0.5 * (hi - lo);
                    for x in nodes.iter_mut() {
                        *x = c + h * *x;
                    }
                    for w in weights.iter_mut() {
                        *w *= h;
                    }
                }
                SourceKind::Grid { nodes, weights }
            }
        };
        Ok(NodeSet {
            source,
            dims,
            count,
            nodes_per_axis: domain.quad.nodes_per_axis,
            kind: domain.kind,
        })
    }

    pub fn len(&self) -> u64 {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    /// Writes the coordinates of node `idx` into `x` and returns its weight.
    pub fn fill(&self, idx: u64, x: &mut [f64]) -> f64 {
        debug_assert!(idx < self.count);
        debug_assert_eq!(x.len(), self.dims);
        match &self.source {
            SourceKind::Grid { nodes, weights } => {
                let m = self.nodes_per_axis as u64;
                let mut rem = idx;
                let mut w = 1.0;
                for j in 0..self.dims {
                    let digit = (rem % m) as usize;
                    rem /= m;
                    x[j] = nodes[digit];
                    w *= weights[digit];
                }
                w
            }
            SourceKind::Qmc { shift, weight } => {
                for j in 0..self.dims {
                    let u = radical_inverse(HALTON_PRIMES[j], idx + 1) + shift[j];
                    let u = u - u.floor();
                    x[j] = match self.kind {
                        DomainKind::Box { lo, hi } => lo + (hi - lo) * u,
                        DomainKind::Torus => 2.0 * std::f64::consts::PI * u,
                    };
                }
                *weight
            }
        }
    }

    /// Coordinates of node `idx` as a fresh vector.
    pub fn point(&self, idx: u64) -> Vec<f64> {
        let mut x = vec![0.0; self.dims];
        self.fill(idx, &mut x);
        x
    }
}

/// Weighted sum of `eval` over all nodes, reduced over the fixed midpoint
/// tree. `factory` is called once per leaf so evaluators can carry scratch.
pub fn weighted_sum<F, M>(nodes: &NodeSet, factory: &F) -> f64
where
    F: Fn() -> M + Sync,
    M: FnMut(&[f64]) -> f64,
{
    sum_range(nodes, factory, 0, nodes.len())
}

fn sum_range<F, M>(nodes: &NodeSet, factory: &F, start: u64, end: u64) -> f64
where
    F: Fn() -> M + Sync,
    M: FnMut(&[f64]) -> f64,
{
    if end - start <= LEAF_CHUNK {
        let mut eval = factory();
        let mut x = vec![0.0; nodes.dims()];
        let mut acc = 0.0;
        for idx in start..end {
            let w = nodes.fill(idx, &mut x);
            acc += w * eval(&x);
        }
        acc
    } else {
        let mid = start + (end - start) / 2;
        let (a, b) = rayon::join(
            || sum_range(nodes, factory, start, mid),
            || sum_range(nodes, factory, mid, end),
        );
        a + b
    }
}

/// Scans all nodes for a violation and returns the one with the smallest
/// node index, so the reported witness does not depend on thread count.
///
/// `eval` returns `Some(payload)` at a violating node.
pub fn first_violation<F, M, W>(nodes: &NodeSet, factory: &F) -> Option<(u64, W)>
where
    F: Fn() -> M + Sync,
    M: FnMut(&[f64]) -> Option<W>,
    W: Send,
{
    violation_range(nodes, factory, 0, nodes.len())
}

fn violation_range<F, M, W>(nodes: &NodeSet, factory: &F, start: u64, end: u64) -> Option<(u64, W)>
where
    F: Fn() -> M + Sync,
    M: FnMut(&[f64]) -> Option<W>,
    W: Send,
{
    if end - start <= LEAF_CHUNK {
        let mut eval = factory();
        let mut x = vec![0.0; nodes.dims()];
        for idx in start..end {
            nodes.fill(idx, &mut x);
            if let Some(w) = eval(&x) {
                return Some((idx, w));
            }
        }
        None
    } else {
        let mid = start + (end - start) / 2;
        let (a, b) = rayon::join(
            || violation_range(nodes, factory, start, mid),
            || violation_range(nodes, factory, mid, end),
        );
        a.or(b)
    }
}

/// Integral value together with the node count and a refinement-difference
/// error estimate.
#[derive(Clone, Copy, Debug)]
pub struct IntegralEstimate {
    pub value: f64,
    pub nodes: u64,
    /// Absolute difference against one coarsening step; zero only when the
    /// two passes agree exactly.
    pub error_estimate: f64,
}

/// Integrates `eval` over the domain and estimates the error by comparing
/// against the coarsened rule. Both passes share the seed.
pub fn integrate_estimate<F, M>(
    domain: &Domain,
    dims: usize,
    seed: Option<u64>,
    factory: &F,
) -> Result<IntegralEstimate>
where
    F: Fn() -> M + Sync,
    M: FnMut(&[f64]) -> f64,
{
    let fine = NodeSet::build(domain, dims, seed)?;
    let value = weighted_sum(&fine, factory);
    let coarse_domain = domain.coarsened();
    let coarse_nodes = NodeSet::build(&coarse_domain, dims, seed)?;
    let coarse = weighted_sum(&coarse_nodes, factory);
    Ok(IntegralEstimate {
        value,
        nodes: fine.len(),
        error_estimate: (value - coarse).abs(),
    })
}
