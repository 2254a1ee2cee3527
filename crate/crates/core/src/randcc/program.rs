use std::collections::BTreeMap;
use std::sync::Arc;

use serde::Serialize;

use super::{boruvka_on_sketches, meta_forest, random_meta_edge, RandccVariant, RepSets};
use crate::bits::Bits;
use crate::codec::Codec;
use crate::dsu::DisjointSets;
use crate::engine::{
    run, EngineError, Inbox, ModelConfig, NodeProgram, NodeView, Outbox, ProgramError, RoundContext, RunMetrics,
    RunOptions, Step,
};
use crate::graph::{EdgeKey, Graph, NodeId, Partition};
use crate::primitives::{GbPlan, GbSpec, GlobalBroadcast, LbPlan, LbSpec, LocalBroadcast};
use crate::sketch::{phase_seed, row_from_bits, row_to_bits, MultiSketch, SketchParams};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum PhaseKind {
    /// One broadcast round of lightest outgoing edges.
    Boruvka,
    /// Sketches, local Boruvka, real edges, random edges.
    Sketch,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RandccPhase {
    /// 1-based.
    pub index: usize,
    pub kind: PhaseKind,
    pub log_x: Option<u32>,
    pub x: Option<u64>,
    pub active_before: usize,
    /// Representatives per component.
    pub rep_size: usize,
    /// Sketch decodes that named an edge leaving the group.
    pub decoded: usize,
    /// Meta-edges the local Boruvka steps merged along.
    pub sketch_merges: usize,
    /// Decoded meta-edges with no real edge behind them; dropped.
    pub false_meta_edges: usize,
    /// Real edges announced for the local Boruvka merges (for a Boruvka
    /// phase, the edges broadcast).
    pub real_edges: usize,
    pub random_edges: usize,
    pub deactivated: usize,
    pub active_after: usize,
    /// Components with an edge to another component once the phase is over.
    pub growable_after: Option<usize>,
    /// Largest payload of the sketch announcement.
    pub sketch_beta: usize,
    pub first_round: usize,
    pub last_round: usize,
    #[serde(skip)]
    pub partition_after: Arc<Partition>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RandccOutcome {
    #[serde(skip)]
    pub partition: Partition,
    /// Announced edges that joined two components, in the order they did.
    pub forest: Vec<(NodeId, NodeId)>,
    pub phases: Vec<RandccPhase>,
}

#[derive(Debug)]
pub struct RandccRun {
    pub outcome: Arc<RandccOutcome>,
    pub variant: RandccVariant,
    pub seed: u64,
    pub metrics: RunMetrics,
}

impl RandccRun {
    pub fn partition(&self) -> &Partition {
        &self.outcome.partition
    }

    pub fn phases(&self) -> &[RandccPhase] {
        &self.outcome.phases
    }

    pub fn phase_beta(&self, i: usize) -> usize {
        let p = &self.phases()[i];
        self.metrics.beta[p.first_round - 1..p.last_round].iter().copied().max().unwrap_or(0)
    }

    /// `Σ β` over the rounds of phase `i`.
    pub fn phase_capacity(&self, i: usize) -> usize {
        let p = &self.phases()[i];
        self.metrics.capacity_between(p.first_round - 1, p.last_round)
    }
}

/// Connected components in `rcast(n, 2)` with `O(log* n)` phases.
pub fn cc_logstar(g: &Arc<Graph>, seed: u64, opts: &RunOptions) -> Result<RandccRun, EngineError> {
    cc_randomized(g, RandccVariant::LogStar, seed, opts)
}

/// Connected components in `rcast(n, 2)` with total capacity `O(log n)`.
pub fn cc_capacity_optimal(g: &Arc<Graph>, seed: u64, opts: &RunOptions) -> Result<RandccRun, EngineError> {
    cc_randomized(g, RandccVariant::CapacityOptimal, seed, opts)
}

pub fn cc_randomized(
    g: &Arc<Graph>,
    variant: RandccVariant,
    seed: u64,
    opts: &RunOptions,
) -> Result<RandccRun, EngineError> {
    cc_randomized_from(g, variant, seed, Partition::singletons(g.n()), None, opts)
}

/// Runs from a partition every node already knows, for at most `phase_limit`
/// phases. Inactive parts of `start` must have no edge leaving them.
pub fn cc_randomized_from(
    g: &Arc<Graph>,
    variant: RandccVariant,
    seed: u64,
    start: Partition,
    phase_limit: Option<usize>,
    opts: &RunOptions,
) -> Result<RandccRun, EngineError> {
    let n = g.n();
    if start.n() != n {
        return Err(EngineError::Config("partition does not match the graph".into()));
    }
    let cfg = ModelConfig::new(n, 2.min(n), ModelConfig::default_bandwidth(n))?;
    let start = Arc::new(start);
    let res = run(g, cfg, seed, opts, |init| CcNode {
        view: init.view,
        variant,
        codec: Codec::new(n),
        seed: init.public_seed,
        start: start.clone(),
        limit: phase_limit,
        state: None,
        plan: None,
        after: None,
        random: None,
        choice: None,
        stage: Stage::Start,
        out: None,
    })?;
    let mut outcome = (*res.outputs[0]).clone();
    for p in &mut outcome.phases {
        p.growable_after = Some(growable_count(g, &p.partition_after));
    }
    Ok(RandccRun { outcome: Arc::new(outcome), variant, seed, metrics: res.metrics })
}

/// Parts of `p` with an edge to another part.
pub(crate) fn growable_count(g: &Graph, p: &Partition) -> usize {
    let mut growable = vec![false; g.n()];
    for e in g.edges() {
        let (a, b) = (p.component_of(e.u), p.component_of(e.v));
        if a != b {
            growable[a as usize] = true;
            growable[b as usize] = true;
        }
    }
    growable.iter().filter(|&&x| x).count()
}

fn as_keys(pairs: &[(NodeId, NodeId)]) -> Vec<EdgeKey> {
    pairs.iter().map(|&(u, v)| EdgeKey::new(u, v, 0)).collect()
}

/// Distinct components of `v`'s neighbours other than its own.
fn neighbor_components(view: &NodeView, p: &Partition) -> Vec<NodeId> {
    let own = p.component_of(view.id());
    let mut out: Vec<NodeId> = view.neighbors().iter().map(|&(u, _)| p.component_of(u)).filter(|&c| c != own).collect();
    out.sort_unstable();
    out.dedup();
    out
}

/// Round 1 of the sketch computation: tell the block of every neighbouring
/// component that an edge into it exists. Silence means no edge.
fn neighborhood_outbox(view: &NodeView, p: &Partition, reps: &RepSets) -> Outbox {
    let mut out = Outbox::silent();
    if p.is_active(p.component_of(view.id())) {
        for c in neighbor_components(view, p) {
            if let Some(i) = reps.index_of(c) {
                out.send_group(reps.family(), i, Bits::bit(true));
            }
        }
    }
    out
}

/// Components that reported an edge into this node's block.
fn reported_components(inbox: &Inbox<'_>, p: &Partition, reps: &RepSets) -> Vec<NodeId> {
    let mut out: Vec<NodeId> = inbox.group(reps.family()).iter().map(|(s, _)| p.component_of(*s)).collect();
    out.sort_unstable();
    out.dedup();
    out
}

/// Everything about the sketch rounds of one phase.
#[derive(Debug, PartialEq)]
pub(super) struct SketchPlan {
    log_x: u32,
    params: SketchParams,
    /// Rows per multi-sketch; the first `rows` nodes of a block own one each.
    rows: usize,
    reps: Arc<RepSets>,
    lb: Option<Arc<LbPlan>>,
    gb: Option<Arc<GbPlan>>,
}

impl SketchPlan {
    pub(super) fn new(
        n: usize,
        comps: Vec<NodeId>,
        log_x: u32,
        seed: u64,
        variant: RandccVariant,
    ) -> Result<Self, String> {
        let params = SketchParams::new(n, 1u64 << log_x, seed);
        let rows = params.multi_rows();
        let reps = Arc::new(RepSets::new(n, comps, variant.rep_size(log_x))?);
        let (lb, gb) = match variant {
            RandccVariant::LogStar => (None, None),
            RandccVariant::CapacityOptimal => {
                let k = reps.comps().len();
                let lb_specs = (0..k)
                    .map(|i| LbSpec {
                        transmitters: reps.set(i)[..rows].to_vec(),
                        receivers: reps.set(i).to_vec(),
                        bits: params.row_bits(),
                    })
                    .collect();
                let gb_specs =
                    (0..k).map(|i| GbSpec { holders: reps.set(i).to_vec(), bits: rows * params.row_bits() }).collect();
                let lb = LbPlan::new(n, lb_specs, usize::MAX).map_err(|e| e.to_string())?;
                let gb = GbPlan::new(n, gb_specs).map_err(|e| e.to_string())?;
                (Some(Arc::new(lb)), Some(Arc::new(gb)))
            }
        };
        Ok(SketchPlan { log_x, params, rows, reps, lb, gb })
    }

    pub(super) fn announce_beta(&self) -> usize {
        self.gb.as_ref().map_or(self.params.row_bits(), |gb| gb.beta())
    }
}

enum SkStage {
    Neighbors,
    Sample,
    Row,
    Lb(LocalBroadcast),
    Gb(GlobalBroadcast),
    Assemble(Option<Arc<Vec<Bits>>>),
}

/// The three sketch rounds: neighbourhoods to the blocks, sampling bits
/// between blocks, rows to everybody. Ends with every active component's
/// multi-sketch, in block order.
struct SketchRounds {
    plan: Arc<SketchPlan>,
    partition: Arc<Partition>,
    tag: u64,
    stage: SkStage,
    row: u128,
}

impl SketchRounds {
    fn new(plan: Arc<SketchPlan>, partition: Arc<Partition>, tag: u64) -> Self {
        SketchRounds { plan, partition, tag, stage: SkStage::Neighbors, row: 0 }
    }

    /// `(i, r)` if this node owns row `r` of component `i`.
    fn slot(&self, me: NodeId) -> Option<(usize, usize)> {
        self.plan.reps.position(me).filter(|&(_, r)| r < self.plan.rows)
    }

    fn step(
        &mut self,
        ctx: &RoundContext<'_>,
        inbox: &Inbox<'_>,
        view: &NodeView,
    ) -> Result<Step<Arc<Vec<MultiSketch>>>, ProgramError> {
        let me = view.id();
        let plan = self.plan.clone();
        let reps = &plan.reps;
        loop {
            match &mut self.stage {
                SkStage::Neighbors => {
                    self.stage = SkStage::Sample;
                    return Ok(Step::Send(neighborhood_outbox(view, &self.partition, reps)));
                }
                SkStage::Sample => {
                    self.row = 0;
                    let mut out = Outbox::silent();
                    if let Some((i, r)) = self.slot(me) {
                        let cp = reps.comps()[i];
                        let per = plan.params.rows();
                        let (t, j) = (r / per, 1 + r % per);
                        for l in reported_components(inbox, &self.partition, reps) {
                            let Some(li) = reps.index_of(l) else { continue };
                            if li > i && plan.params.row_membership(cp, l, t, j) {
                                self.row ^= plan.params.edge_id(cp, l).expect("distinct components").value();
                                out.send(reps.set(li)[r], Bits::bit(true));
                            }
                        }
                    }
                    self.stage = SkStage::Row;
                    return Ok(Step::Send(out));
                }
                SkStage::Row => {
                    let slot = self.slot(me);
                    if let Some((i, r)) = slot {
                        let cp = reps.comps()[i];
                        for (s, _) in inbox.unicasts() {
                            if let Some((li, lr)) = reps.position(*s) {
                                if lr == r && li < i {
                                    self.row ^=
                                        plan.params.edge_id(cp, reps.comps()[li]).expect("distinct components").value();
                                }
                            }
                        }
                    }
                    let msg = slot.map(|_| row_to_bits(plan.params, self.row));
                    match &plan.lb {
                        Some(lb) => self.stage = SkStage::Lb(LocalBroadcast::new(lb.clone(), me, msg, self.tag)),
                        None => {
                            self.stage = SkStage::Assemble(None);
                            return Ok(Step::Send(msg.map_or_else(Outbox::silent, Outbox::broadcast)));
                        }
                    }
                }
                SkStage::Lb(lb) => match lb.step(ctx, inbox)? {
                    Step::Send(o) => return Ok(Step::Send(o)),
                    Step::Done(got) => {
                        let msg = got.map(|rows| Bits::concat(rows.iter()));
                        let gb = plan.gb.clone().expect("capacity-optimal plans have both");
                        self.stage = SkStage::Gb(GlobalBroadcast::new(gb, me, msg, self.tag));
                    }
                },
                SkStage::Gb(gb) => match gb.step(ctx, inbox)? {
                    Step::Send(o) => return Ok(Step::Send(o)),
                    Step::Done(msgs) => self.stage = SkStage::Assemble(Some(msgs)),
                },
                SkStage::Assemble(src) => {
                    let src = src.clone();
                    let sketches = ctx.shared(("rc-sketches", self.tag), || {
                        (0..reps.comps().len())
                            .map(|i| match &src {
                                Some(msgs) => MultiSketch::from_bits(plan.params, &msgs[i])
                                    .unwrap_or_else(|_| MultiSketch::zero(plan.params)),
                                None => {
                                    let rows: Vec<u128> = (0..plan.rows)
                                        .map(|r| {
                                            inbox.broadcast(reps.set(i)[r]).map_or(0, |b| row_from_bits(plan.params, b))
                                        })
                                        .collect();
                                    MultiSketch::from_rows(plan.params, &rows).expect("row count matches")
                                }
                            })
                            .collect::<Vec<_>>()
                    });
                    return Ok(Step::Done(sketches));
                }
            }
        }
    }
}

/// Components that must each announce one real edge into a target component.
#[derive(Debug, PartialEq)]
struct Targets {
    partition: Arc<Partition>,
    /// `(component, target)`, sorted by component.
    pairs: Vec<(NodeId, NodeId)>,
    /// Blocks to route through (capacity-optimal).
    reps: Option<Arc<RepSets>>,
}

impl Targets {
    fn target_of(&self, c: NodeId) -> Option<NodeId> {
        self.pairs.binary_search_by_key(&c, |&(a, _)| a).ok().map(|i| self.pairs[i].1)
    }
}

/// Who announces for each component, and how.
#[derive(Debug, PartialEq)]
struct Routing {
    /// `(component, smallest signalling node)`.
    chosen: Vec<(NodeId, NodeId)>,
    lb: Option<Arc<LbPlan>>,
    gb: Option<Arc<GbPlan>>,
}

impl Routing {
    fn new(t: &Targets, board: &[Option<Bits>], codec: Codec) -> Result<Routing, String> {
        let mut first: BTreeMap<NodeId, NodeId> = BTreeMap::new();
        for (v, b) in board.iter().enumerate() {
            if b.is_some() {
                let c = t.partition.component_of(v as NodeId);
                if t.target_of(c).is_some() {
                    first.entry(c).or_insert(v as NodeId);
                }
            }
        }
        let chosen: Vec<(NodeId, NodeId)> = first.into_iter().collect();
        let (mut lb, mut gb) = (None, None);
        if let Some(reps) = &t.reps {
            let n = board.len();
            let block = |c: NodeId| reps.index_of(c).map(|i| reps.set(i).to_vec()).ok_or("component without a block");
            let mut lb_specs = Vec::with_capacity(chosen.len());
            let mut gb_specs = Vec::with_capacity(chosen.len());
            for &(c, v) in &chosen {
                let set = block(c)?;
                lb_specs.push(LbSpec { transmitters: vec![v], receivers: set.clone(), bits: codec.pair_bits() });
                gb_specs.push(GbSpec { holders: set, bits: codec.pair_bits() });
            }
            lb = Some(Arc::new(LbPlan::new(n, lb_specs, usize::MAX).map_err(|e| e.to_string())?));
            gb = Some(Arc::new(GbPlan::new(n, gb_specs).map_err(|e| e.to_string())?));
        }
        Ok(Routing { chosen, lb, gb })
    }
}

enum ReStage {
    Signal,
    Announce,
    Collect(Arc<Routing>),
    Lb(LocalBroadcast, Arc<Routing>),
    Gb(GlobalBroadcast),
}

/// One round in which every node with an edge into its component's target
/// raises its hand, then the smallest such node per component announces its
/// lightest edge there (directly, or through the component's block).
struct RealEdges {
    targets: Arc<Targets>,
    tag: u64,
    stage: ReStage,
}

impl RealEdges {
    fn new(targets: Arc<Targets>, tag: u64) -> Self {
        RealEdges { targets, tag, stage: ReStage::Signal }
    }

    fn my_edge(&self, view: &NodeView) -> Option<(NodeId, NodeId)> {
        let p = &self.targets.partition;
        let t = self.targets.target_of(p.component_of(view.id()))?;
        let e = view.incident_edges().filter(|e| p.component_of(e.other(view.id())) == t).min()?;
        Some((e.u, e.v))
    }

    fn step(
        &mut self,
        ctx: &RoundContext<'_>,
        inbox: &Inbox<'_>,
        view: &NodeView,
        codec: Codec,
    ) -> Result<Step<Arc<Vec<(NodeId, NodeId)>>>, ProgramError> {
        let me = view.id();
        loop {
            match &mut self.stage {
                ReStage::Signal => {
                    if self.targets.pairs.is_empty() {
                        return Ok(Step::Done(Arc::new(Vec::new())));
                    }
                    let signal = self.my_edge(view).is_some();
                    self.stage = ReStage::Announce;
                    return Ok(Step::Send(if signal { Outbox::broadcast(Bits::bit(true)) } else { Outbox::silent() }));
                }
                ReStage::Announce => {
                    let t = self.targets.clone();
                    let routing =
                        ctx.shared(("rc-route", self.tag), || Routing::new(&t, inbox.board(), codec).map(Arc::new));
                    let routing = match &*routing {
                        Ok(r) => r.clone(),
                        Err(e) => return Err(e.clone().into()),
                    };
                    let mine = routing.chosen.iter().any(|&(_, v)| v == me).then(|| self.my_edge(view)).flatten();
                    let msg = mine.map(|e| codec.encode_pairs(&[e]));
                    match &routing.lb {
                        Some(lb) => {
                            self.stage = ReStage::Lb(LocalBroadcast::new(lb.clone(), me, msg, self.tag), routing)
                        }
                        None => {
                            self.stage = ReStage::Collect(routing);
                            return Ok(Step::Send(msg.map_or_else(Outbox::silent, Outbox::broadcast)));
                        }
                    }
                }
                ReStage::Collect(routing) => {
                    let routing = routing.clone();
                    let edges = ctx.shared(("rc-edges", self.tag), || {
                        routing
                            .chosen
                            .iter()
                            .filter_map(|&(_, v)| codec.decode_pairs(inbox.broadcast(v)?).first().copied())
                            .collect::<Vec<_>>()
                    });
                    return Ok(Step::Done(edges));
                }
                ReStage::Lb(lb, routing) => match lb.step(ctx, inbox)? {
                    Step::Send(o) => return Ok(Step::Send(o)),
                    Step::Done(got) => {
                        let routing = routing.clone();
                        let msg = got.and_then(|d| d.first().cloned());
                        let gb = routing.gb.clone().expect("routed plans have both");
                        self.stage = ReStage::Gb(GlobalBroadcast::new(gb, me, msg, self.tag));
                    }
                },
                ReStage::Gb(gb) => match gb.step(ctx, inbox)? {
                    Step::Send(o) => return Ok(Step::Send(o)),
                    Step::Done(msgs) => {
                        let edges = ctx.shared(("rc-gb-edges", self.tag), || {
                            msgs.iter().filter_map(|m| codec.decode_pairs(m).first().copied()).collect::<Vec<_>>()
                        });
                        return Ok(Step::Done(edges));
                    }
                },
            }
        }
    }
}

#[derive(Debug, PartialEq)]
struct State {
    partition: Arc<Partition>,
    forest: Vec<(NodeId, NodeId)>,
    phases: Vec<RandccPhase>,
    limit: Option<usize>,
    done: Option<Arc<RandccOutcome>>,
}

impl State {
    fn new(partition: Partition, limit: Option<usize>) -> State {
        let mut s = State {
            partition: Arc::new(lone_settled(partition)),
            forest: Vec::new(),
            phases: Vec::new(),
            limit,
            done: None,
        };
        s.check_done();
        s
    }

    fn check_done(&mut self) {
        if self.partition.active_count() == 0 || self.limit.is_some_and(|l| self.phases.len() >= l) {
            self.done = Some(Arc::new(RandccOutcome {
                partition: (*self.partition).clone(),
                forest: self.forest.clone(),
                phases: self.phases.clone(),
            }));
        }
    }

    /// Replays `edges` over the current partition, keeping those that join
    /// two parts.
    fn joining(&self, edges: &[(NodeId, NodeId)]) -> Vec<(NodeId, NodeId)> {
        let mut d = DisjointSets::new(self.partition.n());
        for (v, &c) in self.partition.assignment().iter().enumerate() {
            d.union(v as NodeId, c);
        }
        edges.iter().copied().filter(|&(u, v)| d.union(u, v)).collect()
    }

    fn close(&self, partition: Partition, edges: &[(NodeId, NodeId)], mut phase: RandccPhase) -> State {
        let partition = Arc::new(lone_settled(partition));
        let mut forest = self.forest.clone();
        forest.extend(self.joining(edges));
        phase.active_after = partition.active_count();
        phase.partition_after = partition.clone();
        let mut phases = self.phases.clone();
        phases.push(phase);
        let mut s = State { partition, forest, phases, limit: self.limit, done: None };
        s.check_done();
        s
    }

    fn blank_phase(&self, plan: &PhasePlan, last_round: usize) -> RandccPhase {
        let sk = plan.sketch.as_ref();
        RandccPhase {
            index: plan.index,
            kind: if sk.is_some() { PhaseKind::Sketch } else { PhaseKind::Boruvka },
            log_x: sk.map(|s| s.log_x),
            x: sk.map(|s| s.params.x()),
            active_before: plan.active_before,
            rep_size: sk.map_or(0, |s| s.reps.y()),
            decoded: 0,
            sketch_merges: 0,
            false_meta_edges: 0,
            real_edges: 0,
            random_edges: 0,
            deactivated: 0,
            active_after: 0,
            growable_after: None,
            sketch_beta: sk.map_or(0, |s| s.announce_beta()),
            first_round: plan.first_round,
            last_round,
            partition_after: self.partition.clone(),
        }
    }

    /// Boruvka phase: merge along the broadcast edges, retire silent parts.
    fn boruvka(&self, plan: &PhasePlan, board: &[Option<Bits>], codec: Codec, last_round: usize) -> State {
        let p = &self.partition;
        let mut spoke = vec![false; p.n()];
        let mut edges = Vec::new();
        for (v, b) in board.iter().enumerate() {
            if let Some(&e) = b.as_ref().and_then(|b| codec.decode_pairs(b).first().copied()).as_ref() {
                spoke[p.component_of(v as NodeId) as usize] = true;
                edges.push(e);
            }
        }
        edges.sort_unstable();
        edges.dedup();
        let mut next = (**p).clone();
        let mut phase = self.blank_phase(plan, last_round);
        for c in p.active_ids() {
            if !spoke[c as usize] {
                next.set_active(c, false);
                phase.deactivated += 1;
            }
        }
        phase.real_edges = edges.len();
        self.close(next.merged(&as_keys(&edges)), &edges, phase)
    }

    fn finish(
        &self,
        plan: &PhasePlan,
        after: &AfterSketch,
        random: &RandomPlan,
        choice: &Choice,
        random_edges: &[(NodeId, NodeId)],
        last_round: usize,
    ) -> State {
        let mut next = (*random.partition).clone();
        for &c in &choice.deactivated {
            next.set_active(c, false);
        }
        let next = next.merged(&as_keys(random_edges));
        let mut phase = self.blank_phase(plan, last_round);
        phase.decoded = after.decoded;
        phase.sketch_merges = after.merges;
        phase.false_meta_edges = after.targets.pairs.len() - random.extracted.len();
        phase.real_edges = random.extracted.len();
        phase.random_edges = random_edges.len();
        phase.deactivated = choice.deactivated.len();
        let all: Vec<(NodeId, NodeId)> = random.extracted.iter().chain(random_edges).copied().collect();
        self.close(next, &all, phase)
    }
}

/// A single active component has no other component to grow into.
fn lone_settled(mut p: Partition) -> Partition {
    if p.active_count() == 1 {
        for c in p.active_ids() {
            p.set_active(c, false);
        }
    }
    p
}

#[derive(Debug, PartialEq)]
struct PhasePlan {
    index: usize,
    first_round: usize,
    active_before: usize,
    sketch: Option<Arc<SketchPlan>>,
}

impl PhasePlan {
    fn new(state: &State, variant: RandccVariant, seed: u64, round: usize) -> Result<PhasePlan, String> {
        let p = &state.partition;
        let n = p.n();
        let index = state.phases.len() + 1;
        let active = p.active_ids();
        let active_before = active.len();
        let sketch = match variant.choose_scale(n, active.len()) {
            Some(k) => Some(Arc::new(SketchPlan::new(n, active, k, phase_seed(seed, index), variant)?)),
            None => None,
        };
        Ok(PhasePlan { index, first_round: round, active_before, sketch })
    }
}

/// After the local Boruvka steps: which old component points to which.
#[derive(Debug, PartialEq)]
struct AfterSketch {
    decoded: usize,
    merges: usize,
    targets: Arc<Targets>,
}

impl AfterSketch {
    fn new(state: &State, sp: &SketchPlan, sketches: &[MultiSketch]) -> AfterSketch {
        let b = boruvka_on_sketches(sp.reps.comps(), sketches);
        let pairs = meta_forest(sp.reps.comps(), &b.used);
        let targets =
            Targets { partition: state.partition.clone(), pairs, reps: sp.lb.as_ref().map(|_| sp.reps.clone()) };
        AfterSketch { decoded: b.decoded, merges: b.used.len(), targets: Arc::new(targets) }
    }
}

/// The partition after the real-edge announcements, with fresh blocks for
/// the random-edge step.
#[derive(Debug, PartialEq)]
struct RandomPlan {
    partition: Arc<Partition>,
    extracted: Vec<(NodeId, NodeId)>,
    reps: Arc<RepSets>,
    gb: Option<Arc<GbPlan>>,
}

impl RandomPlan {
    fn new(state: &State, sp: &SketchPlan, extracted: &[(NodeId, NodeId)], codec: Codec) -> Result<RandomPlan, String> {
        let partition = state.partition.merged(&as_keys(extracted));
        let n = partition.n();
        let reps = RepSets::new(n, partition.active_ids(), sp.reps.y())?;
        let gb = match sp.gb {
            Some(_) => {
                let specs = (0..reps.comps().len())
                    .map(|i| GbSpec { holders: reps.set(i).to_vec(), bits: 1 + codec.id_bits() })
                    .collect();
                Some(Arc::new(GbPlan::new(n, specs).map_err(|e| e.to_string())?))
            }
            None => None,
        };
        Ok(RandomPlan { partition: Arc::new(partition), extracted: extracted.to_vec(), reps: Arc::new(reps), gb })
    }
}

#[derive(Debug, PartialEq)]
struct Choice {
    targets: Arc<Targets>,
    deactivated: Vec<NodeId>,
}

impl Choice {
    fn new(rp: &RandomPlan, src: Option<&[Bits]>, board: &[Option<Bits>], codec: Codec) -> Choice {
        let p = &rp.partition;
        let mut pairs = Vec::new();
        let mut deactivated = Vec::new();
        for (i, &c) in rp.reps.comps().iter().enumerate() {
            let pick = match src {
                Some(msgs) => {
                    msgs.get(i).filter(|m| !m.is_empty() && m.get(0)).map(|m| m.read_uint(1, codec.id_bits()))
                }
                None => board[rp.reps.set(i)[0] as usize].as_ref().map(|b| codec.decode_uint(b)),
            };
            let pick = pick
                .map(|l| l as NodeId)
                .filter(|&l| (l as usize) < p.n() && l != c && p.component_of(l) == l && p.is_active(l));
            match pick {
                Some(l) => pairs.push((c, l)),
                None => deactivated.push(c),
            }
        }
        let reps = rp.gb.as_ref().map(|_| rp.reps.clone());
        Choice { targets: Arc::new(Targets { partition: rp.partition.clone(), pairs, reps }), deactivated }
    }
}

enum Stage {
    Start,
    Boruvka,
    BoruvkaMerge,
    Sketch(SketchRounds),
    Extract(RealEdges),
    RandomNeighbors,
    Choose,
    ChooseGb(GlobalBroadcast),
    Chosen(Option<Arc<Vec<Bits>>>),
    RandomEdges(RealEdges),
    Done,
}

struct CcNode {
    view: NodeView,
    variant: RandccVariant,
    codec: Codec,
    seed: u64,
    start: Arc<Partition>,
    limit: Option<usize>,
    state: Option<Arc<State>>,
    plan: Option<Arc<PhasePlan>>,
    after: Option<Arc<AfterSketch>>,
    random: Option<Arc<RandomPlan>>,
    choice: Option<Arc<Choice>>,
    stage: Stage,
    out: Option<Arc<RandccOutcome>>,
}

impl NodeProgram for CcNode {
    type Output = RandccOutcome;

    fn on_round(&mut self, ctx: &RoundContext<'_>, inbox: &Inbox<'_>) -> Result<Outbox, ProgramError> {
        let me = self.view.id();
        let codec = self.codec;
        loop {
            match &mut self.stage {
                Stage::Done => return Ok(Outbox::silent()),
                Stage::Start => {
                    let state = match &self.state {
                        Some(s) => s.clone(),
                        None => {
                            let (start, limit) = (&self.start, self.limit);
                            ctx.shared("rc-init", || State::new((**start).clone(), limit))
                        }
                    };
                    self.state = Some(state.clone());
                    if let Some(done) = &state.done {
                        self.out = Some(done.clone());
                        self.stage = Stage::Done;
                        continue;
                    }
                    let (variant, seed) = (self.variant, self.seed);
                    let plan = ctx.shared(("rc-plan", state.phases.len()), || {
                        PhasePlan::new(&state, variant, seed, ctx.round).map(Arc::new)
                    });
                    let plan = match &*plan {
                        Ok(p) => p.clone(),
                        Err(e) => return Err(e.clone().into()),
                    };
                    self.stage = match &plan.sketch {
                        Some(sp) => {
                            Stage::Sketch(SketchRounds::new(sp.clone(), state.partition.clone(), 4 * plan.index as u64))
                        }
                        None => Stage::Boruvka,
                    };
                    self.plan = Some(plan);
                }
                Stage::Boruvka => {
                    let p = &self.state.as_ref().unwrap().partition;
                    let own = p.component_of(me);
                    let lightest = p
                        .is_active(own)
                        .then(|| self.view.incident_edges().filter(|e| p.component_of(e.other(me)) != own).min())
                        .flatten();
                    self.stage = Stage::BoruvkaMerge;
                    return Ok(match lightest {
                        Some(e) => Outbox::broadcast(codec.encode_pairs(&[(e.u, e.v)])),
                        None => Outbox::silent(),
                    });
                }
                Stage::BoruvkaMerge => {
                    let state = self.state.clone().unwrap();
                    let plan = self.plan.clone().unwrap();
                    let next = ctx.shared(("rc-boruvka", plan.index), || {
                        state.boruvka(&plan, inbox.board(), codec, ctx.round - 1)
                    });
                    self.state = Some(next);
                    self.stage = Stage::Start;
                }
                Stage::Sketch(sk) => match sk.step(ctx, inbox, &self.view)? {
                    Step::Send(o) => return Ok(o),
                    Step::Done(sketches) => {
                        let state = self.state.clone().unwrap();
                        let plan = self.plan.clone().unwrap();
                        let sp = plan.sketch.clone().unwrap();
                        let after = ctx.shared(("rc-after", plan.index), || AfterSketch::new(&state, &sp, &sketches));
                        self.stage = Stage::Extract(RealEdges::new(after.targets.clone(), 4 * plan.index as u64 + 1));
                        self.after = Some(after);
                    }
                },
                Stage::Extract(re) => match re.step(ctx, inbox, &self.view, codec)? {
                    Step::Send(o) => return Ok(o),
                    Step::Done(edges) => {
                        let state = self.state.clone().unwrap();
                        let plan = self.plan.clone().unwrap();
                        let sp = plan.sketch.clone().unwrap();
                        let random = ctx.shared(("rc-random", plan.index), || {
                            RandomPlan::new(&state, &sp, &edges, codec).map(Arc::new)
                        });
                        let random = match &*random {
                            Ok(r) => r.clone(),
                            Err(e) => return Err(e.clone().into()),
                        };
                        self.random = Some(random);
                        self.stage = Stage::RandomNeighbors;
                    }
                },
                Stage::RandomNeighbors => {
                    let rp = self.random.as_ref().unwrap();
                    self.stage = Stage::Choose;
                    return Ok(neighborhood_outbox(&self.view, &rp.partition, &rp.reps));
                }
                Stage::Choose => {
                    let rp = self.random.clone().unwrap();
                    let index = self.plan.as_ref().unwrap().index;
                    let pos = rp.reps.position(me);
                    let pick = pos.and_then(|(i, _)| {
                        let seen = reported_components(inbox, &rp.partition, &rp.reps);
                        random_meta_edge(self.seed, index, rp.reps.comps()[i], &seen)
                    });
                    match &rp.gb {
                        Some(gb) => {
                            let msg = pos.map(|_| {
                                let mut m = Bits::bit(pick.is_some());
                                m.push_uint(pick.unwrap_or(0) as u64, codec.id_bits());
                                m
                            });
                            self.stage =
                                Stage::ChooseGb(GlobalBroadcast::new(gb.clone(), me, msg, 4 * index as u64 + 2));
                        }
                        None => {
                            self.stage = Stage::Chosen(None);
                            return Ok(match (pos, pick) {
                                (Some((_, 0)), Some(l)) => Outbox::broadcast(codec.encode_uint(l as u64)),
                                _ => Outbox::silent(),
                            });
                        }
                    }
                }
                Stage::ChooseGb(gb) => match gb.step(ctx, inbox)? {
                    Step::Send(o) => return Ok(o),
                    Step::Done(msgs) => self.stage = Stage::Chosen(Some(msgs)),
                },
                Stage::Chosen(src) => {
                    let src = src.clone();
                    let rp = self.random.clone().unwrap();
                    let index = self.plan.as_ref().unwrap().index;
                    let choice = ctx.shared(("rc-choice", index), || {
                        Choice::new(&rp, src.as_ref().map(|m| m.as_slice()), inbox.board(), codec)
                    });
                    self.stage = Stage::RandomEdges(RealEdges::new(choice.targets.clone(), 4 * index as u64 + 3));
                    self.choice = Some(choice);
                }
                Stage::RandomEdges(re) => match re.step(ctx, inbox, &self.view, codec)? {
                    Step::Send(o) => return Ok(o),
                    Step::Done(edges) => {
                        let state = self.state.clone().unwrap();
                        let plan = self.plan.clone().unwrap();
                        let (after, random, choice) =
                            (self.after.clone().unwrap(), self.random.clone().unwrap(), self.choice.clone().unwrap());
                        let next = ctx.shared(("rc-finish", plan.index), || {
                            state.finish(&plan, &after, &random, &choice, &edges, ctx.round - 1)
                        });
                        self.state = Some(next);
                        self.stage = Stage::Start;
                    }
                },
            }
        }
    }

    fn output(&self) -> Option<Arc<RandccOutcome>> {
        self.out.clone()
    }
}

/// Outcome of [`meta_sketch_phase`].
#[derive(Debug)]
pub struct MetaSketchRun {
    /// Active components, in block order.
    pub comps: Vec<NodeId>,
    pub params: SketchParams,
    /// What every node learned: one multi-sketch per component.
    pub sketches: Arc<Vec<MultiSketch>>,
    pub metrics: RunMetrics,
}

/// Runs only the sketch rounds for the active parts of `partition`, with
/// `x = 2^log_x` and the sketch seed `seed`.
pub fn meta_sketch_phase(
    g: &Arc<Graph>,
    partition: &Partition,
    log_x: u32,
    seed: u64,
    variant: RandccVariant,
    opts: &RunOptions,
) -> Result<MetaSketchRun, EngineError> {
    let n = g.n();
    if partition.n() != n {
        return Err(EngineError::Config("partition does not match the graph".into()));
    }
    let comps = partition.active_ids();
    let plan = Arc::new(SketchPlan::new(n, comps.clone(), log_x, seed, variant).map_err(EngineError::Config)?);
    let partition = Arc::new(partition.clone());
    let cfg = ModelConfig::new(n, 2.min(n), ModelConfig::default_bandwidth(n))?;
    let res = run(g, cfg, seed, opts, |init| MetaNode {
        rounds: SketchRounds::new(plan.clone(), partition.clone(), 0),
        view: init.view,
        out: None,
    })?;
    Ok(MetaSketchRun { comps, params: plan.params, sketches: res.outputs[0].clone(), metrics: res.metrics })
}

struct MetaNode {
    rounds: SketchRounds,
    view: NodeView,
    out: Option<Arc<Vec<MultiSketch>>>,
}

impl NodeProgram for MetaNode {
    type Output = Vec<MultiSketch>;

    fn on_round(&mut self, ctx: &RoundContext<'_>, inbox: &Inbox<'_>) -> Result<Outbox, ProgramError> {
        if self.out.is_some() {
            return Ok(Outbox::silent());
        }
        match self.rounds.step(ctx, inbox, &self.view)? {
            Step::Send(o) => Ok(o),
            Step::Done(s) => {
                self.out = Some(s);
                Ok(Outbox::silent())
            }
        }
    }

    fn output(&self) -> Option<Arc<Vec<MultiSketch>>> {
        self.out.clone()
    }
}
