//! Synchronous round engine for `rcast(n, r, b)`.
//!
//! Every node runs its own [`NodeProgram`]. In each round the engine asks every
//! node (in id order) for an [`Outbox`], checks it against the model limits,
//! records metrics and delivers it. A node may send at most `r` *distinct*
//! non-silent payloads per round, each of at most `b` bits. Silence is free.

mod cache;
mod unicast;

use std::collections::HashSet;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bits::Bits;
use crate::graph::{EdgeKey, Graph, NodeId};
use crate::math::{id_bits, mix_all};

pub use cache::SharedCache;
pub use unicast::{simulate_unicast_round, UnicastPlan, UnicastResult};

/// Environment variable overriding the default round cap.
pub const ROUND_CAP_ENV: &str = "CLIQUE_SIM_ROUND_CAP";

/// Networks up to this size run with replication auditing on by default.
pub const AUDIT_THRESHOLD: usize = 128;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub n: usize,
    /// Maximum distinct non-silent payloads per node per round.
    pub r: usize,
    /// Maximum payload length in bits.
    pub b: usize,
}

impl ModelConfig {
    pub fn new(n: usize, r: usize, b: usize) -> Result<Self, EngineError> {
        if n == 0 {
            return Err(EngineError::Config("n must be at least 1".into()));
        }
        if r == 0 || r > n {
            return Err(EngineError::Config(format!("range r = {r} must lie in [1, {n}]")));
        }
        if b == 0 {
            return Err(EngineError::Config("bandwidth b must be at least 1".into()));
        }
        Ok(ModelConfig { n, r, b })
    }

    /// `r` capped at `n`, bandwidth one weighted edge.
    pub fn rcast(n: usize, r: usize) -> Self {
        ModelConfig { n, r: r.clamp(1, n.max(1)), b: Self::default_bandwidth(n) }
    }

    /// Enough bits for one weighted edge: `5⌈log₂ n⌉`.
    pub fn default_bandwidth(n: usize) -> usize {
        5 * id_bits(n)
    }
}

/// Where a payload goes. The sender is never a recipient.
#[derive(Clone)]
pub enum Target {
    All,
    Node(NodeId),
    /// Every member of set `i` of a family.
    Group(Arc<SetFamily>, usize),
}

impl fmt::Debug for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Target::All => f.write_str("All"),
            Target::Node(v) => write!(f, "Node({v})"),
            Target::Group(fam, i) => write!(f, "Group({:p}, {i})", Arc::as_ptr(fam)),
        }
    }
}

/// Pairwise disjoint node sets, usable as multicast destinations.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SetFamily {
    sets: Vec<Vec<NodeId>>,
    owner: Vec<u32>,
}

const NO_OWNER: u32 = u32::MAX;

impl SetFamily {
    pub fn new(n: usize, sets: Vec<Vec<NodeId>>) -> Result<Self, EngineError> {
        let mut owner = vec![NO_OWNER; n];
        for (i, set) in sets.iter().enumerate() {
            for &v in set {
                let slot = owner
                    .get_mut(v as usize)
                    .ok_or_else(|| EngineError::Config(format!("set member {v} is not a node")))?;
                if *slot != NO_OWNER {
                    return Err(EngineError::Config(format!("node {v} appears in two sets of a family")));
                }
                *slot = i as u32;
            }
        }
        Ok(SetFamily { sets, owner })
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    pub fn set(&self, i: usize) -> &[NodeId] {
        &self.sets[i]
    }

    pub fn sets(&self) -> &[Vec<NodeId>] {
        &self.sets
    }

    pub fn owner_of(&self, v: NodeId) -> Option<usize> {
        match self.owner.get(v as usize) {
            Some(&o) if o != NO_OWNER => Some(o as usize),
            _ => None,
        }
    }

    fn n(&self) -> usize {
        self.owner.len()
    }
}

#[derive(Clone, Debug)]
pub struct Send {
    pub to: Target,
    pub payload: Bits,
}

/// One node's messages for one round. Empty means silent.
#[derive(Clone, Debug, Default)]
pub struct Outbox {
    sends: Vec<Send>,
}

impl Outbox {
    pub fn silent() -> Self {
        Outbox::default()
    }

    pub fn broadcast(payload: Bits) -> Self {
        Outbox { sends: vec![Send { to: Target::All, payload }] }
    }

    pub fn send(&mut self, to: NodeId, payload: Bits) -> &mut Self {
        self.sends.push(Send { to: Target::Node(to), payload });
        self
    }

    pub fn send_group(&mut self, family: &Arc<SetFamily>, set: usize, payload: Bits) -> &mut Self {
        self.sends.push(Send { to: Target::Group(family.clone(), set), payload });
        self
    }

    pub fn push(&mut self, send: Send) -> &mut Self {
        self.sends.push(send);
        self
    }

    /// Appends another outbox's sends. The caller is responsible for keeping
    /// recipients disjoint.
    pub fn merge(&mut self, other: Outbox) -> &mut Self {
        self.sends.extend(other.sends);
        self
    }

    pub fn sends(&self) -> &[Send] {
        &self.sends
    }

    pub fn is_silent(&self) -> bool {
        self.sends.is_empty()
    }
}

#[derive(Default)]
struct GroupDelivery {
    family: Option<Arc<SetFamily>>,
    per_set: Vec<Vec<(NodeId, Bits)>>,
}

/// Everything delivered in one round, shared by all per-node [`Inbox`] views.
pub struct Delivery {
    board: Vec<Option<Bits>>,
    uni_offsets: Vec<usize>,
    uni: Vec<(NodeId, Bits)>,
    groups: Vec<GroupDelivery>,
}

impl Delivery {
    fn empty(n: usize) -> Self {
        Delivery { board: vec![None; n], uni_offsets: vec![0; n + 1], uni: Vec::new(), groups: Vec::new() }
    }

    fn build(n: usize, outboxes: Vec<Outbox>) -> Self {
        let mut board = vec![None; n];
        let mut uni_raw: Vec<(NodeId, NodeId, Bits)> = Vec::new();
        let mut groups: Vec<GroupDelivery> = Vec::new();
        for (sender, outbox) in outboxes.into_iter().enumerate() {
            let sender = sender as NodeId;
            for send in outbox.sends {
                match send.to {
                    Target::All => board[sender as usize] = Some(send.payload),
                    Target::Node(to) => uni_raw.push((to, sender, send.payload)),
                    Target::Group(family, i) => {
                        let slot = match groups
                            .iter()
                            .position(|g| g.family.as_ref().is_some_and(|f| Arc::ptr_eq(f, &family)))
                        {
                            Some(p) => p,
                            None => {
                                let len = family.len();
                                groups.push(GroupDelivery {
                                    family: Some(family),
                                    per_set: (0..len).map(|_| Vec::new()).collect(),
                                });
                                groups.len() - 1
                            }
                        };
                        groups[slot].per_set[i].push((sender, send.payload));
                    }
                }
            }
        }
        // Senders were visited in id order, so a stable sort keeps each
        // receiver's list sorted by sender.
        uni_raw.sort_by_key(|(to, _, _)| *to);
        let mut uni_offsets = vec![0usize; n + 1];
        for (to, _, _) in &uni_raw {
            uni_offsets[*to as usize + 1] += 1;
        }
        for i in 0..n {
            uni_offsets[i + 1] += uni_offsets[i];
        }
        let uni = uni_raw.into_iter().map(|(_, s, p)| (s, p)).collect();
        Delivery { board, uni_offsets, uni, groups }
    }
}

/// What one node received in the previous round.
#[derive(Clone, Copy)]
pub struct Inbox<'a> {
    me: NodeId,
    d: &'a Delivery,
}

impl<'a> Inbox<'a> {
    /// The payload `sender` broadcast to everyone, if any.
    pub fn broadcast(&self, sender: NodeId) -> Option<&'a Bits> {
        self.d.board[sender as usize].as_ref()
    }

    /// All broadcasts of the round, indexed by sender. Identical at every node
    /// (a node's own broadcast is included; it knows what it sent).
    pub fn board(&self) -> &'a [Option<Bits>] {
        &self.d.board
    }

    /// Point-to-point messages addressed to this node, sorted by sender.
    pub fn unicasts(&self) -> &'a [(NodeId, Bits)] {
        let me = self.me as usize;
        &self.d.uni[self.d.uni_offsets[me]..self.d.uni_offsets[me + 1]]
    }

    pub fn unicast(&self, sender: NodeId) -> Option<&'a Bits> {
        let list = self.unicasts();
        list.binary_search_by_key(&sender, |(s, _)| *s).ok().map(|i| &list[i].1)
    }

    /// Messages sent to the set of `family` this node belongs to, in sender order.
    /// Every member of that set sees the same slice, including a member's own
    /// message to the set.
    pub fn group(&self, family: &Arc<SetFamily>) -> &'a [(NodeId, Bits)] {
        let Some(set) = family.owner_of(self.me) else { return &[] };
        self.d
            .groups
            .iter()
            .find(|g| g.family.as_ref().is_some_and(|f| Arc::ptr_eq(f, family)))
            .map(|g| g.per_set[set].as_slice())
            .unwrap_or(&[])
    }

    /// The message `sender` addressed to this node by any means.
    pub fn from(&self, sender: NodeId) -> Option<&'a Bits> {
        if sender == self.me {
            return None;
        }
        if let Some(p) = self.broadcast(sender) {
            return Some(p);
        }
        if let Some(p) = self.unicast(sender) {
            return Some(p);
        }
        for g in &self.d.groups {
            let Some(fam) = &g.family else { continue };
            if let Some(set) = fam.owner_of(self.me) {
                if let Some((_, p)) = g.per_set[set].iter().find(|(s, _)| *s == sender) {
                    return Some(p);
                }
            }
        }
        None
    }

    pub fn is_empty(&self) -> bool {
        self.d.uni.is_empty() && self.d.groups.is_empty() && self.d.board.iter().all(Option::is_none)
    }
}

/// A node's knowledge at start-up: its id, `n`, and its incident edges.
#[derive(Clone)]
pub struct NodeView {
    id: NodeId,
    graph: Arc<Graph>,
}

impl NodeView {
    pub fn id(&self) -> NodeId {
        self.id
    }

    pub fn n(&self) -> usize {
        self.graph.n()
    }

    /// `(neighbor, weight)` pairs sorted by neighbor.
    pub fn neighbors(&self) -> &[(NodeId, u64)] {
        self.graph.neighbors(self.id)
    }

    pub fn degree(&self) -> usize {
        self.graph.degree(self.id)
    }

    pub fn incident_edges(&self) -> impl Iterator<Item = EdgeKey> + '_ {
        self.graph.incident_edges(self.id)
    }
}

pub struct NodeInit {
    pub id: NodeId,
    pub cfg: ModelConfig,
    pub view: NodeView,
    /// Shared by all nodes.
    pub public_seed: u64,
    /// Different at every node.
    pub private_seed: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("{0}")]
pub struct ProgramError(pub String);

impl From<String> for ProgramError {
    fn from(s: String) -> Self {
        ProgramError(s)
    }
}

impl From<&str> for ProgramError {
    fn from(s: &str) -> Self {
        ProgramError(s.to_string())
    }
}

/// Per-round handle passed to [`NodeProgram::on_round`].
pub struct RoundContext<'a> {
    /// 1-based index of the round whose outbox is being produced.
    pub round: usize,
    pub id: NodeId,
    pub cfg: &'a ModelConfig,
    cache: &'a SharedCache,
}

impl<'a> RoundContext<'a> {
    pub fn n(&self) -> usize {
        self.cfg.n
    }

    /// Returns the value of a pure computation that every node calling it this
    /// round performs on identical knowledge; it is evaluated once and shared.
    ///
    /// `compute` must only use data this node knows. With auditing on the
    /// engine re-evaluates it at every caller and fails the run on any
    /// difference.
    pub fn shared<K, T, F>(&self, key: K, compute: F) -> Arc<T>
    where
        K: std::hash::Hash,
        T: PartialEq + fmt::Debug + std::any::Any + std::marker::Send + Sync,
        F: FnOnce() -> T,
    {
        self.cache.get_or_compute(self.id, key, compute)
    }
}

/// A distributed algorithm as seen from one node.
pub trait NodeProgram {
    type Output: PartialEq + fmt::Debug;

    /// Whether all nodes must end with the same output.
    const GLOBAL_OUTPUT: bool = true;

    /// Consumes the previous round's inbox (empty before round 1) and returns
    /// this round's messages.
    fn on_round(&mut self, ctx: &RoundContext<'_>, inbox: &Inbox<'_>) -> Result<Outbox, ProgramError>;

    /// `Some` once the node has its final output.
    fn output(&self) -> Option<Arc<Self::Output>>;
}

/// Result of one step of a multi-round subroutine.
#[derive(Debug)]
pub enum Step<T> {
    Send(Outbox),
    Done(T),
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error("node {node} sent {count} distinct payloads in round {round}, range is {r}")]
    RangeViolation { node: NodeId, round: usize, count: usize, r: usize },
    #[error("node {node} sent a {bits}-bit payload in round {round}, bandwidth is {b}")]
    BandwidthViolation { node: NodeId, round: usize, bits: usize, b: usize },
    #[error("node {node} addressed itself in round {round}")]
    SelfSend { node: NodeId, round: usize },
    #[error("node {node} addressed some recipient twice in round {round}")]
    OverlappingRecipients { node: NodeId, round: usize },
    #[error("node {node} used an invalid target in round {round}: {msg}")]
    BadTarget { node: NodeId, round: usize, msg: String },
    #[error("no termination within {cap} rounds")]
    NonTermination { cap: usize },
    #[error("node {node} disagrees with node 0 on the output")]
    OutputDisagreement { node: NodeId },
    #[error("node {node} computed a different shared value in round {round}: {detail}")]
    ReplicationMismatch { node: NodeId, round: usize, detail: String },
    #[error("node {node} failed in round {round}: {source}")]
    Program { node: NodeId, round: usize, source: ProgramError },
    #[error("all nodes finished but node {node} still sent messages in round {round}")]
    SendAfterFinish { node: NodeId, round: usize },
    #[error("invalid configuration: {0}")]
    Config(String),
}

impl EngineError {
    /// Violations of the model limits, as opposed to program bugs.
    pub fn is_model_violation(&self) -> bool {
        matches!(
            self,
            EngineError::RangeViolation { .. }
                | EngineError::BandwidthViolation { .. }
                | EngineError::SelfSend { .. }
                | EngineError::OverlappingRecipients { .. }
        )
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunMetrics {
    pub rounds: usize,
    /// Longest payload in each round (0 for a silent round).
    pub beta: Vec<usize>,
    /// Sum of `beta`.
    pub total_capacity: usize,
    /// Largest per-node count of distinct payloads in each round.
    pub max_range: Vec<usize>,
    /// Bits sent by each node; a broadcast or multicast counts once.
    pub per_node_bits: Vec<u64>,
}

/// Flat summary of [`RunMetrics`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetricsSummary {
    pub rounds: usize,
    pub total_capacity: usize,
    pub max_beta: usize,
    pub max_range: usize,
    pub per_node_bits_max: u64,
}

impl RunMetrics {
    fn new(n: usize) -> Self {
        RunMetrics { per_node_bits: vec![0; n], ..Default::default() }
    }

    pub fn summary(&self) -> MetricsSummary {
        MetricsSummary {
            rounds: self.rounds,
            total_capacity: self.total_capacity,
            max_beta: self.beta.iter().copied().max().unwrap_or(0),
            max_range: self.max_range.iter().copied().max().unwrap_or(0),
            per_node_bits_max: self.per_node_bits.iter().copied().max().unwrap_or(0),
        }
    }

    /// Sum of `beta` over rounds `[from, to)` (0-based).
    pub fn capacity_between(&self, from: usize, to: usize) -> usize {
        self.beta[from.min(self.beta.len())..to.min(self.beta.len())].iter().sum()
    }
}

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    /// Overrides the default `64·⌈log₂ n⌉` cap (and the environment variable).
    pub round_cap: Option<usize>,
    /// Forces replication auditing on or off; default on for small `n`.
    pub audit: Option<bool>,
    /// Replaces the range the algorithm asks for.
    pub range: Option<usize>,
    /// Replaces the bandwidth the algorithm asks for.
    pub bandwidth: Option<usize>,
}

impl RunOptions {
    pub fn round_cap_for(&self, n: usize) -> usize {
        self.round_cap
            .or_else(|| std::env::var(ROUND_CAP_ENV).ok().and_then(|v| v.trim().parse().ok()))
            .unwrap_or(64 * id_bits(n))
    }
}

#[derive(Debug)]
pub struct RunResult<O> {
    /// One output per node.
    pub outputs: Vec<Arc<O>>,
    pub metrics: RunMetrics,
}

impl<O> RunResult<O> {
    /// Node 0's output (all agree for global-output programs).
    pub fn output(&self) -> &O {
        &self.outputs[0]
    }
}

/// Seed handed to node `id`.
pub fn private_seed(seed: u64, id: NodeId) -> u64 {
    mix_all(&[seed, 0x7072_6976, id as u64])
}

/// Runs one program per node until every node has an output.
pub fn run<P, F>(
    graph: &Arc<Graph>,
    cfg: ModelConfig,
    seed: u64,
    opts: &RunOptions,
    mut factory: F,
) -> Result<RunResult<P::Output>, EngineError>
where
    P: NodeProgram,
    F: FnMut(NodeInit) -> P,
{
    let n = graph.n();
    if cfg.n != n {
        return Err(EngineError::Config(format!("config is for n = {}, graph has n = {n}", cfg.n)));
    }
    let cfg = ModelConfig::new(n, opts.range.unwrap_or(cfg.r), opts.bandwidth.unwrap_or(cfg.b))?;
    let cap = opts.round_cap_for(n);
    let audit = opts.audit.unwrap_or(n <= AUDIT_THRESHOLD);
    let mut nodes: Vec<P> = (0..n as NodeId)
        .map(|id| {
            factory(NodeInit {
                id,
                cfg,
                view: NodeView { id, graph: graph.clone() },
                public_seed: seed,
                private_seed: private_seed(seed, id),
            })
        })
        .collect();
    let mut metrics = RunMetrics::new(n);
    let mut delivery = Delivery::empty(n);
    let mut validator = Validator::new(n);
    let mut round = 1usize;
    loop {
        let cache = SharedCache::new(audit);
        let mut outboxes = Vec::with_capacity(n);
        for (id, node) in nodes.iter_mut().enumerate() {
            let ctx = RoundContext { round, id: id as NodeId, cfg: &cfg, cache: &cache };
            let inbox = Inbox { me: id as NodeId, d: &delivery };
            let out = node.on_round(&ctx, &inbox).map_err(|source| EngineError::Program {
                node: id as NodeId,
                round,
                source,
            })?;
            if let Some((node, detail)) = cache.take_mismatch() {
                return Err(EngineError::ReplicationMismatch { node, round, detail });
            }
            outboxes.push(out);
        }
        if nodes.iter().all(|p| p.output().is_some()) {
            if let Some(node) = outboxes.iter().position(|o| !o.is_silent()) {
                return Err(EngineError::SendAfterFinish { node: node as NodeId, round });
            }
            break;
        }
        if round > cap {
            return Err(EngineError::NonTermination { cap });
        }
        let mut beta = 0;
        let mut range = 0;
        for (id, out) in outboxes.iter().enumerate() {
            let stats = validator.check(id as NodeId, out, &cfg, round)?;
            beta = beta.max(stats.max_len);
            range = range.max(stats.distinct);
            metrics.per_node_bits[id] += stats.bits;
        }
        metrics.beta.push(beta);
        metrics.max_range.push(range);
        metrics.total_capacity += beta;
        metrics.rounds = round;
        delivery = Delivery::build(n, outboxes);
        round += 1;
    }
    let outputs: Vec<Arc<P::Output>> = nodes.iter().map(|p| p.output().expect("finished")).collect();
    if P::GLOBAL_OUTPUT {
        for (id, out) in outputs.iter().enumerate().skip(1) {
            if !Arc::ptr_eq(out, &outputs[0]) && **out != *outputs[0] {
                return Err(EngineError::OutputDisagreement { node: id as NodeId });
            }
        }
    }
    Ok(RunResult { outputs, metrics })
}

struct SendStats {
    distinct: usize,
    max_len: usize,
    bits: u64,
}

struct Validator {
    stamp: Vec<u32>,
    generation: u32,
}

impl Validator {
    fn new(n: usize) -> Self {
        Validator { stamp: vec![0; n], generation: 0 }
    }

    fn check(&mut self, node: NodeId, out: &Outbox, cfg: &ModelConfig, round: usize) -> Result<SendStats, EngineError> {
        let sends = out.sends();
        let mut stats = SendStats { distinct: 0, max_len: 0, bits: 0 };
        if sends.is_empty() {
            return Ok(stats);
        }
        let bad = |msg: String| EngineError::BadTarget { node, round, msg };
        for s in sends {
            if s.payload.len() > cfg.b {
                return Err(EngineError::BandwidthViolation { node, round, bits: s.payload.len(), b: cfg.b });
            }
            match &s.to {
                Target::Node(to) if *to == node => return Err(EngineError::SelfSend { node, round }),
                Target::Node(to) if *to as usize >= cfg.n => return Err(bad(format!("node {to} does not exist"))),
                Target::Group(f, i) if f.n() != cfg.n || *i >= f.len() => {
                    return Err(bad(format!("set {i} of a family with {} sets over {} nodes", f.len(), f.n())))
                }
                _ => {}
            }
            stats.max_len = stats.max_len.max(s.payload.len());
            stats.bits += s.payload.len() as u64;
        }
        self.check_disjoint(node, sends).then_some(()).ok_or(EngineError::OverlappingRecipients { node, round })?;
        stats.distinct =
            if sends.len() == 1 { 1 } else { sends.iter().map(|s| &s.payload).collect::<HashSet<_>>().len() };
        if stats.distinct > cfg.r {
            return Err(EngineError::RangeViolation { node, round, count: stats.distinct, r: cfg.r });
        }
        Ok(stats)
    }

    fn check_disjoint(&mut self, node: NodeId, sends: &[Send]) -> bool {
        if sends.len() == 1 {
            return true;
        }
        if sends.iter().any(|s| matches!(s.to, Target::All)) {
            return false;
        }
        // Fast path: unicasts plus sets of a single family.
        let mut family: Option<&Arc<SetFamily>> = None;
        let mut single_family = true;
        for s in sends {
            if let Target::Group(f, _) = &s.to {
                match family {
                    None => family = Some(f),
                    Some(g) if Arc::ptr_eq(f, g) => {}
                    Some(_) => single_family = false,
                }
            }
        }
        if single_family {
            let mut nodes: Vec<NodeId> = Vec::new();
            let mut sets: Vec<usize> = Vec::new();
            for s in sends {
                match &s.to {
                    Target::Node(v) => nodes.push(*v),
                    Target::Group(_, i) => sets.push(*i),
                    Target::All => unreachable!(),
                }
            }
            nodes.sort_unstable();
            sets.sort_unstable();
            if nodes.windows(2).any(|w| w[0] == w[1]) || sets.windows(2).any(|w| w[0] == w[1]) {
                return false;
            }
            if let Some(f) = family {
                return nodes.iter().all(|&v| f.owner_of(v).is_none_or(|o| sets.binary_search(&o).is_err()));
            }
            return true;
        }
        self.generation += 1;
        if self.generation == u32::MAX {
            self.stamp.fill(0);
            self.generation = 1;
        }
        let gen = self.generation;
        for s in sends {
            let members: &[NodeId] = match &s.to {
                Target::Node(v) => std::slice::from_ref(v),
                Target::Group(f, i) => f.set(*i),
                Target::All => unreachable!(),
            };
            for &v in members {
                if v == node {
                    continue;
                }
                if self.stamp[v as usize] == gen {
                    return false;
                }
                self.stamp[v as usize] = gen;
            }
        }
        true
    }
}
