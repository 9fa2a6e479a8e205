//! Agent-based temporal-network simulator with recommender feedback.
//!
//! A fixed node set carries group labels, latent-cluster feature vectors
//! (independent of the groups), and static popularity weights. Time advances
//! in discrete steps through two phases:
//!
//! 1. **pre-network phase** — per step, each node activates independently
//!    with probability `activity_rate`; an active node's non-adjacent peers
//!    are scored by feature cosine, turned into a distribution by a
//!    temperature-1 softmax, and up to three candidates are sampled without
//!    replacement. Candidate `v` at rank `r` is accepted with probability
//!    `(prob_matrix[g_u][g_v] + top_probs[r]) * popularity[v]`.
//! 2. **link-prediction phase** — the same loop, but candidate scoring is
//!    delegated to a [`policy::RecommenderPolicy`] (refit at phase start and
//!    every `retrain_period` steps thereafter) and the softmax uses the
//!    configured low temperature.
//!
//! Accepted interactions within a step receive deterministic fractional
//! offsets `step + (r+1)/(m+1)` in acceptance order, so the projected event
//! log has strictly ordered per-pair times while preserving the step clock.
//! The adjacency records first activations only; with `allow_multi_edges`
//! repeat interactions of an adjacent pair become fresh events.
//!
//! Every evaluated recommendation is recorded in an audit trail from which
//! dyad-level parity measures are computed: a candidate dyad counts as
//! positive when it was both recommended and accepted.

pub mod policy;

use std::collections::HashMap;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bias::DyadPrediction;
use crate::events::{Event, EventLog, EventLogError};
use crate::pair::GroupPair;

use self::policy::RecommenderPolicy;

/// Spread of the Gaussian noise added to a node's cluster center.
const CLUSTER_NOISE: f64 = 0.3;
/// Number of candidates recommended per activation.
const TOP_K: usize = 3;

/// Errors from configuration validation and simulation.
#[derive(Debug, Error)]
pub enum NetsimError {
    /// Candidate sampling needs at least `TOP_K + 1` nodes.
    #[error("n_nodes = {n_nodes} leaves fewer than {TOP_K} possible candidates")]
    TooFewNodes { n_nodes: usize },
    /// Equal-size groups require divisibility.
    #[error("n_nodes = {n_nodes} is not divisible into {k_groups} equal groups")]
    UnevenGroups { n_nodes: usize, k_groups: usize },
    /// The link-formation matrix must be K x K, symmetric, entries in [0, 1].
    #[error("prob_matrix must be {k_groups}x{k_groups}, symmetric, entries in [0, 1]")]
    BadProbMatrix { k_groups: usize },
    /// Rank bonuses must be finite and nonnegative.
    #[error("top_probs must hold {TOP_K} finite nonnegative entries")]
    BadTopProbs,
    /// Activation probability outside [0, 1].
    #[error("activity_rate must lie in [0, 1]")]
    BadActivityRate,
    /// Popularity bounds must satisfy 0 <= min <= max <= 1.
    #[error("popularity bounds must satisfy 0 <= min <= max <= 1")]
    BadPopularity,
    /// Softmax temperature must be finite and strictly positive.
    #[error("softmax_temperature must be finite and > 0")]
    BadTemperature,
    /// Feature dimension must be in [1, n_nodes].
    #[error("embedding_dim must lie in [1, n_nodes]")]
    BadEmbeddingDim,
    /// Cluster count must be at least 1.
    #[error("n_clusters must be >= 1")]
    BadClusterCount,
    /// Phase lengths must be at least one step.
    #[error("phase horizons must be >= 1 step")]
    BadHorizon,
    /// Group labels handed to a graph must lie in 1..=K.
    #[error("node {node} carries group label {label}, outside 1..={k_groups}")]
    BadGroupLabel {
        node: usize,
        label: usize,
        k_groups: usize,
    },
    /// Graph construction arrays must agree in length.
    #[error("graph arrays disagree in length: {detail}")]
    LengthMismatch { detail: &'static str },
    /// Feature vectors must be finite, non-empty, and share one dimension.
    #[error("node {node} has an invalid feature vector")]
    BadEmbedding { node: usize },
    /// Interactions must connect two distinct existing nodes.
    #[error("interaction ({u}, {v}) is not a valid node pair")]
    BadInteraction { u: usize, v: usize },
    /// A policy returned a non-finite candidate score.
    #[error("policy '{policy}' produced a non-finite score for ({u}, {v})")]
    NonFiniteScore { policy: String, u: usize, v: usize },
    /// No built-in policy under the requested name.
    #[error("unknown policy '{name}'")]
    UnknownPolicy { name: String },
    /// Projection of the edge sequence failed event-log validation.
    #[error(transparent)]
    Log(#[from] EventLogError),
}

/// One undirected interaction, canonical `u < v`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Interaction {
    /// Event time: step index plus fractional within-step offset.
    pub t: f64,
    /// Smaller endpoint.
    pub u: usize,
    /// Larger endpoint.
    pub v: usize,
}

/// Fixed node set with group labels, features, popularity, and the growing
/// interaction record.
#[derive(Debug, Clone)]
pub struct TemporalGraph {
    k_groups: usize,
    /// 1-based group label per node.
    groups: Vec<usize>,
    /// Unit-norm feature vector per node (the pre-network features; policies
    /// keep refit features internally).
    embeddings: Vec<Vec<f64>>,
    /// Static acceptance propensity per node, in [0, 1].
    popularity: Vec<f64>,
    /// Chronological interaction sequence (repeat activations included).
    interactions: Vec<Interaction>,
    /// Sorted neighbor lists; first activations only.
    adjacency: Vec<Vec<u32>>,
}

impl TemporalGraph {
    /// Assembles a graph from externally built node attributes.
    ///
    /// # Errors
    ///
    /// Rejects inconsistent lengths, out-of-range labels, non-finite or
    /// mixed-dimension features, and popularity outside [0, 1].
    pub fn from_parts(
        k_groups: usize,
        groups: Vec<usize>,
        embeddings: Vec<Vec<f64>>,
        popularity: Vec<f64>,
    ) -> Result<Self, NetsimError> {
        let n = groups.len();
        if embeddings.len() != n || popularity.len() != n {
            return Err(NetsimError::LengthMismatch {
                detail: "groups, embeddings, and popularity must be per-node",
            });
        }
        for (node, &label) in groups.iter().enumerate() {
            if label == 0 || label > k_groups {
                return Err(NetsimError::BadGroupLabel {
                    node,
                    label,
                    k_groups,
                });
            }
        }
        let dim = embeddings.first().map(Vec::len).unwrap_or(0);
        for (node, e) in embeddings.iter().enumerate() {
            if e.is_empty() || e.len() != dim || e.iter().any(|x| !x.is_finite()) {
                return Err(NetsimError::BadEmbedding { node });
            }
        }
        if popularity.iter().any(|&p| !(0.0..=1.0).contains(&p)) {
            return Err(NetsimError::BadPopularity);
        }
        Ok(Self {
            k_groups,
            groups,
            embeddings,
            popularity,
            interactions: Vec::new(),
            adjacency: vec![Vec::new(); n],
        })
    }

    /// Number of nodes.
    pub fn n_nodes(&self) -> usize {
        self.groups.len()
    }

    /// Number of groups behind the labels.
    pub fn k_groups(&self) -> usize {
        self.k_groups
    }

    /// 1-based group label of `u`.
    pub fn group(&self, u: usize) -> usize {
        self.groups[u]
    }

    /// All group labels, node order.
    pub fn groups(&self) -> &[usize] {
        &self.groups
    }

    /// Pre-network feature vector of `u` (unit norm).
    pub fn embedding(&self, u: usize) -> &[f64] {
        &self.embeddings[u]
    }

    /// Popularity weight of `u`.
    pub fn popularity(&self, u: usize) -> f64 {
        self.popularity[u]
    }

    /// Chronological interaction sequence.
    pub fn interactions(&self) -> &[Interaction] {
        &self.interactions
    }

    /// Sorted neighbors of `u` (first activations).
    pub fn neighbors(&self, u: usize) -> &[u32] {
        &self.adjacency[u]
    }

    /// Whether `u` and `v` have ever interacted.
    pub fn is_adjacent(&self, u: usize, v: usize) -> bool {
        self.adjacency[u].binary_search(&(v as u32)).is_ok()
    }

    /// Number of distinct activated edges.
    pub fn n_edges(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Appends an interaction; returns whether it activated a new edge.
    ///
    /// # Errors
    ///
    /// Rejects self-loops and out-of-range endpoints.
    pub fn add_interaction(&mut self, t: f64, u: usize, v: usize) -> Result<bool, NetsimError> {
        let n = self.n_nodes();
        if u == v || u >= n || v >= n {
            return Err(NetsimError::BadInteraction { u, v });
        }
        let (a, b) = if u < v { (u, v) } else { (v, u) };
        self.interactions.push(Interaction { t, u: a, v: b });
        match self.adjacency[a].binary_search(&(b as u32)) {
            Ok(_) => Ok(false),
            Err(pos) => {
                self.adjacency[a].insert(pos, b as u32);
                let pos_b = self.adjacency[b]
                    .binary_search(&(a as u32))
                    .expect_err("adjacency lists must stay symmetric");
                self.adjacency[b].insert(pos_b, a as u32);
                Ok(true)
            }
        }
    }

    /// Group-pair mark of an interaction's endpoints.
    pub fn mark_of(&self, u: usize, v: usize) -> GroupPair {
        GroupPair::new(self.groups[u] as u32, self.groups[v] as u32)
            .expect("stored group labels are always nonzero")
    }

    /// Projects the interaction sequence onto a group-pair event log.
    ///
    /// # Errors
    ///
    /// Propagates event-log validation (cannot fail for simulator-built
    /// graphs, whose offsets keep per-pair times strictly increasing).
    pub fn event_log(&self, horizon: f64) -> Result<EventLog<f64>, NetsimError> {
        let events = self
            .interactions
            .iter()
            .map(|e| Event {
                t: e.t,
                mark: self.mark_of(e.u, e.v),
            })
            .collect();
        Ok(EventLog::new(self.k_groups, horizon, events)?)
    }

    /// Renders the interaction sequence as CSV `t,u,v,g_u,g_v`.
    pub fn edges_csv(&self) -> String {
        let mut out = String::from("t,u,v,g_u,g_v\n");
        for e in &self.interactions {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                e.t, e.u, e.v, self.groups[e.u], self.groups[e.v]
            ));
        }
        out
    }
}

/// Simulation configuration; flat keys, JSON-friendly, fully defaulted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimConfig {
    /// Node count.
    pub n_nodes: usize,
    /// Number of equally sized groups.
    pub k_groups: usize,
    /// Symmetric K x K base link-formation probabilities.
    pub prob_matrix: Vec<Vec<f64>>,
    /// Per-step activation probability of each node.
    pub activity_rate: f64,
    /// Acceptance bonuses by recommendation rank.
    pub top_probs: [f64; TOP_K],
    /// Lower bound of the uniform popularity initialization.
    pub popularity_min: f64,
    /// Upper bound of the uniform popularity initialization.
    pub popularity_max: f64,
    /// Steps between policy refits in the link-prediction phase (0 = only
    /// the refit at phase start).
    pub retrain_period: usize,
    /// Pre-network phase length in steps.
    pub horizon_pre: usize,
    /// Link-prediction phase length in steps.
    pub horizon_lp: usize,
    /// Softmax temperature of the link-prediction phase.
    pub softmax_temperature: f64,
    /// Feature dimension.
    pub embedding_dim: usize,
    /// Number of latent clusters seeding the pre-network features.
    pub n_clusters: usize,
    /// Keep already-adjacent pairs eligible for recommendation, producing
    /// repeat events on the same pair.
    pub allow_multi_edges: bool,
    /// Root seed for the whole run.
    pub seed: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            n_nodes: 300,
            k_groups: 3,
            prob_matrix: vec![
                vec![0.30, 0.05, 0.05],
                vec![0.05, 0.30, 0.05],
                vec![0.05, 0.05, 0.30],
            ],
            activity_rate: 0.1,
            top_probs: [0.3, 0.2, 0.1],
            popularity_min: 0.5,
            popularity_max: 1.0,
            retrain_period: 10,
            horizon_pre: 50,
            horizon_lp: 100,
            softmax_temperature: 0.1,
            embedding_dim: 16,
            n_clusters: 5,
            allow_multi_edges: false,
            seed: 0,
        }
    }
}

impl SimConfig {
    /// Validates every field combination.
    ///
    /// # Errors
    ///
    /// One [`NetsimError`] variant per violated constraint.
    pub fn validate(&self) -> Result<(), NetsimError> {
        if self.n_nodes <= TOP_K {
            return Err(NetsimError::TooFewNodes {
                n_nodes: self.n_nodes,
            });
        }
        if self.k_groups == 0 || !self.n_nodes.is_multiple_of(self.k_groups) {
            return Err(NetsimError::UnevenGroups {
                n_nodes: self.n_nodes,
                k_groups: self.k_groups,
            });
        }
        let k = self.k_groups;
        let m = &self.prob_matrix;
        let shape_ok = m.len() == k && m.iter().all(|row| row.len() == k);
        if !shape_ok {
            return Err(NetsimError::BadProbMatrix { k_groups: k });
        }
        for (i, row) in m.iter().enumerate() {
            for (j, &p) in row.iter().enumerate() {
                if !(0.0..=1.0).contains(&p) || p != m[j][i] {
                    return Err(NetsimError::BadProbMatrix { k_groups: k });
                }
            }
        }
        if self.top_probs.iter().any(|b| !b.is_finite() || *b < 0.0) {
            return Err(NetsimError::BadTopProbs);
        }
        if !(0.0..=1.0).contains(&self.activity_rate) {
            return Err(NetsimError::BadActivityRate);
        }
        let pop_ok = self.popularity_min.is_finite()
            && self.popularity_max.is_finite()
            && 0.0 <= self.popularity_min
            && self.popularity_min <= self.popularity_max
            && self.popularity_max <= 1.0;
        if !pop_ok {
            return Err(NetsimError::BadPopularity);
        }
        if !self.softmax_temperature.is_finite() || self.softmax_temperature <= 0.0 {
            return Err(NetsimError::BadTemperature);
        }
        if self.embedding_dim == 0 || self.embedding_dim > self.n_nodes {
            return Err(NetsimError::BadEmbeddingDim);
        }
        if self.n_clusters == 0 {
            return Err(NetsimError::BadClusterCount);
        }
        if self.horizon_pre == 0 || self.horizon_lp == 0 {
            return Err(NetsimError::BadHorizon);
        }
        Ok(())
    }

    /// Total simulated horizon in steps.
    pub fn total_horizon(&self) -> f64 {
        (self.horizon_pre + self.horizon_lp) as f64
    }

    /// 1-based group label of node `u` (contiguous equal blocks).
    fn group_of(&self, u: usize) -> usize {
        u / (self.n_nodes / self.k_groups) + 1
    }
}

/// One evaluated candidate inside an audit record.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AuditCandidate {
    /// Recommended node.
    pub node: usize,
    /// Rank within the recommendation (0 = first).
    pub rank: usize,
    /// Raw policy/cosine score that produced the recommendation.
    pub score: f64,
    /// Whether the recommended dyad was within one group.
    pub same_group: bool,
    /// Whether the recommendation was accepted.
    pub accepted: bool,
}

/// One activation's recommendation set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditRecord {
    /// Step index the activation happened in.
    pub step: usize,
    /// Activating node.
    pub user: usize,
    /// Evaluated candidates in rank order.
    pub candidates: Vec<AuditCandidate>,
}

/// Renders audit records as CSV with semicolon-joined sublists.
pub fn audit_csv(records: &[AuditRecord]) -> String {
    let mut out = String::from("t,u,candidates,scores,accepted\n");
    for rec in records {
        let join = |f: &dyn Fn(&AuditCandidate) -> String| {
            rec.candidates.iter().map(f).collect::<Vec<_>>().join(";")
        };
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            rec.step,
            rec.user,
            join(&|c| c.node.to_string()),
            join(&|c| format!("{}", c.score)),
            join(&|c| (c.accepted as u8).to_string()),
        ));
    }
    out
}

/// Aggregated parity counts over evaluated candidate dyads.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct ParityTally {
    /// Same-group dyads recommended and accepted.
    pub same_positive: usize,
    /// Same-group dyads recommended.
    pub same_total: usize,
    /// Cross-group dyads recommended and accepted.
    pub cross_positive: usize,
    /// Cross-group dyads recommended.
    pub cross_total: usize,
}

impl ParityTally {
    /// Tallies every evaluated candidate across audit records.
    pub fn from_audit(records: &[AuditRecord]) -> Self {
        let mut tally = Self::default();
        for rec in records {
            for c in &rec.candidates {
                if c.same_group {
                    tally.same_total += 1;
                    tally.same_positive += c.accepted as usize;
                } else {
                    tally.cross_total += 1;
                    tally.cross_positive += c.accepted as usize;
                }
            }
        }
        tally
    }

    /// Absolute acceptance-rate gap between the two dyad classes.
    ///
    /// `None` when either class was never evaluated.
    pub fn gap(&self) -> Option<f64> {
        if self.same_total == 0 || self.cross_total == 0 {
            return None;
        }
        let p_same = self.same_positive as f64 / self.same_total as f64;
        let p_cross = self.cross_positive as f64 / self.cross_total as f64;
        Some((p_same - p_cross).abs())
    }

    /// Expands the tally into dyad predictions (for cross-checks against the
    /// generic parity-gap computation).
    pub fn to_predictions(&self) -> Vec<DyadPrediction> {
        let mut preds = Vec::with_capacity(self.same_total + self.cross_total);
        let push = |preds: &mut Vec<DyadPrediction>, same: bool, pos: usize, tot: usize| {
            for idx in 0..tot {
                preds.push(DyadPrediction {
                    same_group: same,
                    positive: idx < pos,
                });
            }
        };
        push(&mut preds, true, self.same_positive, self.same_total);
        push(&mut preds, false, self.cross_positive, self.cross_total);
        preds
    }
}

/// Two-phase simulator holding the evolving graph and the RNG stream.
pub struct Simulator {
    config: SimConfig,
    graph: TemporalGraph,
    rng: ChaCha8Rng,
    /// Next step index to simulate.
    clock: usize,
    audit: Vec<AuditRecord>,
}

impl Simulator {
    /// Builds the node population (groups, features, popularity) from the
    /// config's seed. No steps are simulated yet.
    ///
    /// # Errors
    ///
    /// Propagates config validation.
    pub fn new(config: SimConfig) -> Result<Self, NetsimError> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let n = config.n_nodes;
        let d = config.embedding_dim;

        // Latent cluster centers and assignments are drawn independently of
        // the contiguous group blocks, so features carry no group signal.
        let centers: Vec<Vec<f64>> = (0..config.n_clusters)
            .map(|_| random_unit_vector(&mut rng, d))
            .collect();
        let mut embeddings = Vec::with_capacity(n);
        for _ in 0..n {
            let c = rng.random_range(0..config.n_clusters);
            let mut e: Vec<f64> = centers[c]
                .iter()
                .map(|&x| x + CLUSTER_NOISE * rng.sample::<f64, _>(StandardNormal))
                .collect();
            normalize_in_place(&mut e);
            embeddings.push(e);
        }
        let popularity: Vec<f64> = (0..n)
            .map(|_| {
                config.popularity_min
                    + (config.popularity_max - config.popularity_min) * rng.random::<f64>()
            })
            .collect();
        let groups: Vec<usize> = (0..n).map(|u| config.group_of(u)).collect();
        let graph = TemporalGraph::from_parts(config.k_groups, groups, embeddings, popularity)?;
        Ok(Self {
            config,
            graph,
            rng,
            clock: 0,
            audit: Vec::new(),
        })
    }

    /// The configuration the simulator was built from.
    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    /// Current graph state.
    pub fn graph(&self) -> &TemporalGraph {
        &self.graph
    }

    /// Audit records accumulated so far (both phases).
    pub fn audit(&self) -> &[AuditRecord] {
        &self.audit
    }

    /// Audit records restricted to steps at or after `from_step`.
    pub fn audit_from(&self, from_step: usize) -> Vec<AuditRecord> {
        self.audit
            .iter()
            .filter(|r| r.step >= from_step)
            .cloned()
            .collect()
    }

    /// Runs the pre-network phase (cosine scoring on the latent features).
    ///
    /// # Errors
    ///
    /// Infallible in practice; kept fallible for interface symmetry.
    pub fn run_pre_phase(&mut self) -> Result<(), NetsimError> {
        for _ in 0..self.config.horizon_pre {
            self.run_step(None)?;
        }
        Ok(())
    }

    /// Runs the link-prediction phase under `policy`.
    ///
    /// The policy is refit at phase start and every `retrain_period` steps
    /// thereafter.
    ///
    /// # Errors
    ///
    /// [`NetsimError::NonFiniteScore`] if the policy ever scores a candidate
    /// as NaN or infinite.
    pub fn run_lp_phase(&mut self, policy: &mut dyn RecommenderPolicy) -> Result<(), NetsimError> {
        let start = self.clock;
        for step in 0..self.config.horizon_lp {
            let due = step == 0
                || (self.config.retrain_period > 0 && step % self.config.retrain_period == 0);
            if due {
                policy.refit(&self.graph, (start + step) as f64);
            }
            self.run_step(Some(&*policy))?;
        }
        Ok(())
    }

    /// Event-log projection of everything simulated so far.
    ///
    /// # Errors
    ///
    /// Propagates event-log validation.
    pub fn event_log(&self) -> Result<EventLog<f64>, NetsimError> {
        self.graph.event_log(self.clock as f64)
    }

    /// One step: activations, recommendations, acceptances, timestamping.
    fn run_step(&mut self, policy: Option<&dyn RecommenderPolicy>) -> Result<(), NetsimError> {
        let step = self.clock;
        let n = self.config.n_nodes;
        let t_step = step as f64;
        let mut accepted: Vec<(usize, usize)> = Vec::new();

        for u in 0..n {
            if self.rng.random::<f64>() >= self.config.activity_rate {
                continue;
            }
            let candidates = self.candidates_of(u);
            if candidates.is_empty() {
                continue;
            }
            // Scores come from the policy in the LP phase, otherwise from the
            // latent-feature cosine; both run through a softmax (shift-
            // invariant, stabilized by the max) at the phase's temperature.
            let mut scores = Vec::with_capacity(candidates.len());
            let temperature = match policy {
                Some(p) => {
                    for &v in &candidates {
                        let s = p.score(u, v, &self.graph, t_step);
                        if !s.is_finite() {
                            return Err(NetsimError::NonFiniteScore {
                                policy: p.name().to_string(),
                                u,
                                v,
                            });
                        }
                        scores.push(s);
                    }
                    self.config.softmax_temperature
                }
                None => {
                    for &v in &candidates {
                        scores.push(cosine(self.graph.embedding(u), self.graph.embedding(v)));
                    }
                    1.0
                }
            };
            let probs = softmax(&scores, temperature);
            let picks =
                sample_without_replacement(&mut self.rng, &probs, TOP_K.min(candidates.len()));

            let mut record = AuditRecord {
                step,
                user: u,
                candidates: Vec::with_capacity(picks.len()),
            };
            for (rank, &pick) in picks.iter().enumerate() {
                let v = candidates[pick];
                let (gu, gv) = (self.graph.group(u), self.graph.group(v));
                let base = self.config.prob_matrix[gu - 1][gv - 1];
                let p_acc =
                    ((base + self.config.top_probs[rank]) * self.graph.popularity(v)).min(1.0);
                let is_accepted = self.rng.random::<f64>() < p_acc;
                record.candidates.push(AuditCandidate {
                    node: v,
                    rank,
                    score: scores[pick],
                    same_group: gu == gv,
                    accepted: is_accepted,
                });
                if is_accepted {
                    accepted.push((u, v));
                    // Immediate adjacency update: later activations in the
                    // same step already see the new edge.
                    self.graph.add_interaction(t_step, u, v)?;
                }
            }
            self.audit.push(record);
        }

        // Second pass: replace the provisional step timestamps by evenly
        // spread offsets in acceptance order, keeping every within-step time
        // distinct and strictly inside [step, step + 1).
        let m = accepted.len();
        if m > 0 {
            let base = self.graph.interactions.len() - m;
            for (r, slot) in self.graph.interactions[base..].iter_mut().enumerate() {
                slot.t = t_step + (r + 1) as f64 / (m + 1) as f64;
            }
        }
        self.clock += 1;
        Ok(())
    }

    /// Eligible candidates for `u`: other nodes, excluding current neighbors
    /// unless multi-edge mode keeps them eligible.
    fn candidates_of(&self, u: usize) -> Vec<usize> {
        (0..self.config.n_nodes)
            .filter(|&v| v != u && (self.config.allow_multi_edges || !self.graph.is_adjacent(u, v)))
            .collect()
    }
}

/// Completed two-phase run with derived outputs.
pub struct NetsimOutcome {
    /// Final graph (both phases applied).
    pub graph: TemporalGraph,
    /// Event-log projection over the full horizon.
    pub log: EventLog<f64>,
    /// Audit records of both phases.
    pub audit: Vec<AuditRecord>,
    /// Step index where the link-prediction phase began.
    pub lp_start: f64,
}

impl NetsimOutcome {
    /// Parity tally restricted to the link-prediction phase.
    pub fn lp_parity(&self) -> ParityTally {
        let lp: Vec<AuditRecord> = self
            .audit
            .iter()
            .filter(|r| (r.step as f64) >= self.lp_start)
            .cloned()
            .collect();
        ParityTally::from_audit(&lp)
    }
}

/// Runs the pre-network phase alone.
///
/// # Errors
///
/// Propagates config validation and projection failures.
pub fn generate_pre_network(
    config: &SimConfig,
) -> Result<(TemporalGraph, EventLog<f64>), NetsimError> {
    let mut sim = Simulator::new(config.clone())?;
    sim.run_pre_phase()?;
    let log = sim.graph.event_log(config.horizon_pre as f64)?;
    Ok((sim.graph, log))
}

/// Runs both phases under `policy` and collects all outputs.
///
/// # Errors
///
/// Propagates config validation, policy scoring failures, and projection
/// failures.
pub fn run_full_simulation(
    config: &SimConfig,
    policy: &mut dyn RecommenderPolicy,
) -> Result<NetsimOutcome, NetsimError> {
    let mut sim = Simulator::new(config.clone())?;
    sim.run_pre_phase()?;
    sim.run_lp_phase(policy)?;
    let log = sim.event_log()?;
    Ok(NetsimOutcome {
        graph: sim.graph,
        log,
        audit: sim.audit,
        lp_start: config.horizon_pre as f64,
    })
}

/// Numerically stable softmax with temperature.
fn softmax(scores: &[f64], temperature: f64) -> Vec<f64> {
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = scores
        .iter()
        .map(|&s| ((s - max) / temperature).exp())
        .collect();
    let total: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / total).collect()
}

/// Samples `k` distinct indices proportionally to `weights`, renormalizing
/// after each draw.
fn sample_without_replacement(rng: &mut ChaCha8Rng, weights: &[f64], k: usize) -> Vec<usize> {
    let mut picks = Vec::with_capacity(k);
    let mut remaining: Vec<f64> = weights.to_vec();
    for _ in 0..k {
        let total: f64 = remaining.iter().sum();
        if total <= 0.0 {
            break;
        }
        let mut target = rng.random::<f64>() * total;
        let mut chosen = None;
        for (idx, &w) in remaining.iter().enumerate() {
            if w <= 0.0 {
                continue;
            }
            target -= w;
            if target < 0.0 {
                chosen = Some(idx);
                break;
            }
        }
        // Roundoff can leave target at exactly 0; fall back to the last
        // positive weight.
        let idx = chosen.unwrap_or_else(|| {
            remaining
                .iter()
                .rposition(|&w| w > 0.0)
                .expect("total > 0 guarantees a positive weight")
        });
        picks.push(idx);
        remaining[idx] = 0.0;
    }
    picks
}

/// Uniform random direction on the unit sphere.
fn random_unit_vector(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    loop {
        let mut v: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        let norm: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-12 {
            for x in &mut v {
                *x /= norm;
            }
            return v;
        }
    }
}

fn normalize_in_place(v: &mut [f64]) {
    let norm: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 1e-12 {
        for x in v.iter_mut() {
            *x /= norm;
        }
    }
}

/// Cosine similarity; inputs are unit vectors so this is the dot product,
/// but the denominator guards callers holding unnormalized features.
pub(crate) fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot / (na * nb)
    }
}

/// Per-group node counts, 1-based label order.
pub fn group_sizes(graph: &TemporalGraph) -> Vec<usize> {
    let mut counts: HashMap<usize, usize> = HashMap::new();
    for &g in graph.groups() {
        *counts.entry(g).or_default() += 1;
    }
    (1..=graph.k_groups())
        .map(|g| counts.get(&g).copied().unwrap_or(0))
        .collect()
}
