//! Candidate-scoring policies for the link-prediction phase.
//!
//! A policy scores non-adjacent node pairs; the simulator softmaxes those
//! scores and samples recommendations. Policies may carry internal state
//! (refit features) that the simulator refreshes on the retrain schedule.
//!
//! The refit stand-in for a trained link predictor is a truncated spectral
//! embedding of the current adjacency: subspace iteration on `A + cI` (the
//! shift `c` exceeds the maximum degree, making the top of the spectrum
//! positive and algebraically dominant) with a fixed internal seed, so a
//! refit is a pure function of the adjacency. Node features are the rows of
//! the resulting orthonormal basis, re-normalized to unit length; rows that
//! vanish (isolated nodes carry no spectral signal) keep their previous
//! features.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{cosine, NetsimError, TemporalGraph};

/// Additive same-group score bonus of the amplifying policy.
pub const DEFAULT_HOMOPHILY_BONUS: f64 = 0.5;
/// Additive cross-group score bonus of the mitigating policy.
pub const DEFAULT_CROSS_BONUS: f64 = 0.5;
/// Feature dimension used by [`builtin_policies`].
pub const DEFAULT_POLICY_DIM: usize = 16;
/// Subspace-iteration sweeps per refit.
const REFIT_ITERATIONS: usize = 30;
/// Internal seed making refits a pure function of the adjacency.
const REFIT_SEED: u64 = 0x5eed_0001;

/// Group-awareness posture of a policy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FairnessMode {
    /// Scores ignore group labels (they may still correlate via features).
    Neutral,
    /// Scores push cross-group pairs upward.
    CrossGroupBoost,
    /// Scores carry no signal at all: recommendations are uniform.
    GroupBlind,
}

/// Scoring interface the simulator drives.
pub trait RecommenderPolicy {
    /// Stable identifier (used in file names and reports).
    fn name(&self) -> &str;

    /// Group-awareness posture.
    fn fairness_mode(&self) -> FairnessMode {
        FairnessMode::Neutral
    }

    /// Score for recommending `v` to `u` at time `t`. Must be finite for
    /// every non-adjacent pair.
    fn score(&self, u: usize, v: usize, graph: &TemporalGraph, t: f64) -> f64;

    /// Refreshes internal state from the current graph. Default: stateless.
    fn refit(&mut self, _graph: &TemporalGraph, _t: f64) {}
}

/// Cosine on the frozen pre-network features.
#[derive(Debug, Default, Clone)]
pub struct CosineStatic;

impl RecommenderPolicy for CosineStatic {
    fn name(&self) -> &str {
        "cosine-static"
    }

    fn score(&self, u: usize, v: usize, graph: &TemporalGraph, _t: f64) -> f64 {
        cosine(graph.embedding(u), graph.embedding(v))
    }
}

/// Cosine on spectral features re-estimated from the adjacency at refit.
#[derive(Debug, Clone)]
pub struct CosineRefit {
    dim: usize,
    features: Option<Vec<Vec<f64>>>,
}

impl CosineRefit {
    /// New policy producing `dim`-dimensional refit features.
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            features: None,
        }
    }

    /// Current feature of `u`: refit features once available, otherwise the
    /// graph's pre-network features.
    fn feature<'a>(&'a self, graph: &'a TemporalGraph, u: usize) -> &'a [f64] {
        match &self.features {
            Some(f) => &f[u],
            None => graph.embedding(u),
        }
    }
}

impl RecommenderPolicy for CosineRefit {
    fn name(&self) -> &str {
        "cosine-refit"
    }

    fn score(&self, u: usize, v: usize, graph: &TemporalGraph, _t: f64) -> f64 {
        cosine(self.feature(graph, u), self.feature(graph, v))
    }

    fn refit(&mut self, graph: &TemporalGraph, _t: f64) {
        let previous: Vec<Vec<f64>> = match &self.features {
            Some(f) => f.clone(),
            None => (0..graph.n_nodes())
                .map(|u| graph.embedding(u).to_vec())
                .collect(),
        };
        self.features = Some(spectral_features(graph, self.dim, &previous));
    }
}

/// Refit cosine plus an additive same-group bonus.
#[derive(Debug, Clone)]
pub struct HomophilyBoost {
    inner: CosineRefit,
    bonus: f64,
}

impl HomophilyBoost {
    /// New amplifier with the given same-group bonus.
    pub fn new(dim: usize, bonus: f64) -> Self {
        Self {
            inner: CosineRefit::new(dim),
            bonus,
        }
    }
}

impl RecommenderPolicy for HomophilyBoost {
    fn name(&self) -> &str {
        "homophily-boost"
    }

    fn score(&self, u: usize, v: usize, graph: &TemporalGraph, t: f64) -> f64 {
        let same = (graph.group(u) == graph.group(v)) as u8 as f64;
        self.inner.score(u, v, graph, t) + self.bonus * same
    }

    fn refit(&mut self, graph: &TemporalGraph, t: f64) {
        self.inner.refit(graph, t);
    }
}

/// Refit cosine plus an additive cross-group bonus.
#[derive(Debug, Clone)]
pub struct CrossBoost {
    inner: CosineRefit,
    bonus: f64,
}

impl CrossBoost {
    /// New mitigator with the given cross-group bonus.
    pub fn new(dim: usize, bonus: f64) -> Self {
        Self {
            inner: CosineRefit::new(dim),
            bonus,
        }
    }
}

impl RecommenderPolicy for CrossBoost {
    fn name(&self) -> &str {
        "cross-boost"
    }

    fn fairness_mode(&self) -> FairnessMode {
        FairnessMode::CrossGroupBoost
    }

    fn score(&self, u: usize, v: usize, graph: &TemporalGraph, t: f64) -> f64 {
        let cross = (graph.group(u) != graph.group(v)) as u8 as f64;
        self.inner.score(u, v, graph, t) + self.bonus * cross
    }

    fn refit(&mut self, graph: &TemporalGraph, t: f64) {
        self.inner.refit(graph, t);
    }
}

/// Constant score: the softmax turns this into uniform recommendations.
#[derive(Debug, Default, Clone)]
pub struct GroupBlindRandom;

impl RecommenderPolicy for GroupBlindRandom {
    fn name(&self) -> &str {
        "group-blind-random"
    }

    fn fairness_mode(&self) -> FairnessMode {
        FairnessMode::GroupBlind
    }

    fn score(&self, _u: usize, _v: usize, _graph: &TemporalGraph, _t: f64) -> f64 {
        0.0
    }
}

/// Fresh instances of every built-in policy (feature dimension
/// [`DEFAULT_POLICY_DIM`]).
pub fn builtin_policies() -> Vec<Box<dyn RecommenderPolicy>> {
    vec![
        Box::new(CosineStatic),
        Box::new(CosineRefit::new(DEFAULT_POLICY_DIM)),
        Box::new(HomophilyBoost::new(
            DEFAULT_POLICY_DIM,
            DEFAULT_HOMOPHILY_BONUS,
        )),
        Box::new(CrossBoost::new(DEFAULT_POLICY_DIM, DEFAULT_CROSS_BONUS)),
        Box::new(GroupBlindRandom),
    ]
}

/// Built-in policy by name, with the feature dimension to use on refits.
///
/// # Errors
///
/// [`NetsimError::UnknownPolicy`] for names outside the built-in set.
pub fn policy_by_name(name: &str, dim: usize) -> Result<Box<dyn RecommenderPolicy>, NetsimError> {
    match name {
        "cosine-static" => Ok(Box::new(CosineStatic)),
        "cosine-refit" => Ok(Box::new(CosineRefit::new(dim))),
        "homophily-boost" => Ok(Box::new(HomophilyBoost::new(dim, DEFAULT_HOMOPHILY_BONUS))),
        "cross-boost" => Ok(Box::new(CrossBoost::new(dim, DEFAULT_CROSS_BONUS))),
        "group-blind-random" => Ok(Box::new(GroupBlindRandom)),
        other => Err(NetsimError::UnknownPolicy {
            name: other.to_string(),
        }),
    }
}

/// Truncated spectral embedding of the current adjacency.
///
/// Runs a fixed number of orthonormalized subspace-iteration sweeps on
/// `A + cI` with `c = max_degree + 1` and returns the unit-normalized rows.
/// Rows with vanishing norm inherit `previous`.
pub fn spectral_features(
    graph: &TemporalGraph,
    dim: usize,
    previous: &[Vec<f64>],
) -> Vec<Vec<f64>> {
    let n = graph.n_nodes();
    let d = dim.min(n);
    let shift = (0..n).map(|u| graph.neighbors(u).len()).max().unwrap_or(0) as f64 + 1.0;

    let mut rng = ChaCha8Rng::seed_from_u64(REFIT_SEED);
    let mut cols: Vec<Vec<f64>> = (0..d)
        .map(|_| (0..n).map(|_| StandardNormal.sample(&mut rng)).collect())
        .collect();
    orthonormalize(&mut cols);

    let mut scratch = vec![0.0f64; n];
    for _ in 0..REFIT_ITERATIONS {
        for col in cols.iter_mut() {
            for u in 0..n {
                let mut acc = shift * col[u];
                for &v in graph.neighbors(u) {
                    acc += col[v as usize];
                }
                scratch[u] = acc;
            }
            std::mem::swap(col, &mut scratch);
        }
        orthonormalize(&mut cols);
    }

    (0..n)
        .map(|u| {
            let mut row: Vec<f64> = cols.iter().map(|c| c[u]).collect();
            let norm: f64 = row.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm < 1e-9 {
                previous[u].clone()
            } else {
                for x in &mut row {
                    *x /= norm;
                }
                row
            }
        })
        .collect()
}

/// Modified Gram-Schmidt over column vectors; degenerate columns are replaced
/// by deterministic basis vectors before re-orthogonalization.
fn orthonormalize(cols: &mut [Vec<f64>]) {
    let n = cols.first().map(Vec::len).unwrap_or(0);
    for j in 0..cols.len() {
        let (done, rest) = cols.split_at_mut(j);
        let col = &mut rest[0];
        for prev in done.iter() {
            project_out(prev, col);
        }
        let norm: f64 = col.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm < 1e-12 {
            for (idx, x) in col.iter_mut().enumerate() {
                *x = if idx == (j * 37 + 1) % n { 1.0 } else { 0.0 };
            }
            for prev in done.iter() {
                project_out(prev, col);
            }
            let renorm: f64 = col.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-12);
            for x in col.iter_mut() {
                *x /= renorm;
            }
        } else {
            for x in col.iter_mut() {
                *x /= norm;
            }
        }
    }
}

/// Subtracts from `col` its projection onto the unit vector `prev`.
fn project_out(prev: &[f64], col: &mut [f64]) {
    let r: f64 = prev.iter().zip(col.iter()).map(|(a, b)| a * b).sum();
    for (x, &p) in col.iter_mut().zip(prev) {
        *x -= r * p;
    }
}
