use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::sync::Arc;

use serde::Serialize;

use crate::bits::Bits;
use crate::codec::Codec;
use crate::engine::{
    run, EngineError, Inbox, ModelConfig, NodeProgram, NodeView, Outbox, ProgramError, RoundContext, RunMetrics,
    RunOptions,
};
use crate::graph::{EdgeKey, Graph, NodeId, Partition};

/// `max(2, ⌈log₂ n / log₂ log₂ n⌉)`.
pub fn default_threshold(n: usize) -> usize {
    let l = (n.max(2) as f64).log2();
    if l <= 2.0 {
        return 2;
    }
    ((l / l.log2()).ceil() as usize).max(2)
}

/// What happened in one phase, in terms of the components at its start.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct BccPhase {
    pub active_before: usize,
    /// `(component, degree)` for every active component after Round 1.
    pub start_degrees: Vec<(NodeId, usize)>,
    /// Component edges `C^v → C_max(v)` from Round 2.
    pub round2: Vec<(NodeId, NodeId)>,
    /// Local maximum `L` → the lost neighbor it connected to in Round 3.
    pub round3: Vec<(NodeId, NodeId)>,
    /// `L → C_max(w)` where `w` is the far end of `L`'s Round-3 edge.
    pub type2: Vec<(NodeId, NodeId)>,
    /// Node-level edges broadcast in Rounds 2 and 3.
    pub edges: Vec<(NodeId, NodeId)>,
    /// Start component → component it ended up in.
    pub merged_into: Vec<(NodeId, NodeId)>,
    /// `(component, degree)` after Round 4.
    pub end_degrees: Vec<(NodeId, usize)>,
    pub deactivated: usize,
    pub active_after: usize,
    /// The phase stopped after Round 1 because no active component had a
    /// neighbor.
    pub stopped_early: bool,
}

impl BccPhase {
    /// Checks the structural facts the round bound rests on.
    ///
    /// With `G` the graph on start components whose arcs are `round2` and
    /// `type2`: `G` is acyclic, a component with no outgoing arc has at least
    /// as many incoming arcs as its degree, every end component contains such
    /// a sink, and every end component either absorbed at least `s + 1` start
    /// components or was built only from components of degree below `s`.
    pub fn check_invariants(&self, s: usize) -> Result<(), String> {
        if self.stopped_early {
            return if self.start_degrees.iter().all(|&(_, d)| d == 0) {
                Ok(())
            } else {
                Err("stopped early with a positive degree".into())
            };
        }
        let deg: BTreeMap<NodeId, usize> = self.start_degrees.iter().copied().collect();
        let mut out: BTreeMap<NodeId, BTreeSet<NodeId>> = BTreeMap::new();
        let mut inc: BTreeMap<NodeId, BTreeSet<NodeId>> = BTreeMap::new();
        for &(a, b) in self.round2.iter().chain(&self.type2) {
            if !deg.contains_key(&a) || !deg.contains_key(&b) {
                return Err(format!("arc ({a},{b}) leaves the active components"));
            }
            if a == b {
                return Err(format!("self-loop at {a}"));
            }
            out.entry(a).or_default().insert(b);
            inc.entry(b).or_default().insert(a);
        }
        // Kahn's algorithm
        let mut indeg: BTreeMap<NodeId, usize> = deg.keys().map(|&c| (c, inc.get(&c).map_or(0, |s| s.len()))).collect();
        let mut ready: Vec<NodeId> = indeg.iter().filter(|(_, &d)| d == 0).map(|(&c, _)| c).collect();
        let mut seen = 0;
        while let Some(c) = ready.pop() {
            seen += 1;
            for &t in out.get(&c).into_iter().flatten() {
                let d = indeg.get_mut(&t).unwrap();
                *d -= 1;
                if *d == 0 {
                    ready.push(t);
                }
            }
        }
        if seen != deg.len() {
            return Err("phase graph has a cycle".into());
        }
        let is_sink = |c: &NodeId| out.get(c).is_none_or(|s| s.is_empty());
        for (c, &d) in &deg {
            if is_sink(c) && inc.get(c).map_or(0, |s| s.len()) < d {
                return Err(format!("sink {c} of degree {d} has too few incoming arcs"));
            }
        }
        let mut parts: BTreeMap<NodeId, Vec<NodeId>> = BTreeMap::new();
        for &(c, e) in &self.merged_into {
            parts.entry(e).or_default().push(c);
        }
        for (e, cs) in &parts {
            if !cs.iter().any(is_sink) {
                return Err(format!("end component {e} has no sink"));
            }
            if cs.len() < s + 1 && cs.iter().any(|c| deg[c] >= s) {
                return Err(format!("end component {e} has {} parts but one has degree >= {s}", cs.len()));
            }
        }
        if self.active_after * s > self.active_before {
            return Err(format!("{} -> {} active components", self.active_before, self.active_after));
        }
        Ok(())
    }
}

#[derive(Debug, PartialEq, Serialize)]
pub struct BccOutcome {
    pub partition: Partition,
    pub phases: Vec<BccPhase>,
    pub playoff_rounds: usize,
}

#[derive(Debug)]
pub struct BccRun {
    pub outcome: Arc<BccOutcome>,
    pub s: usize,
    pub d: usize,
    pub metrics: RunMetrics,
}

impl BccRun {
    pub fn partition(&self) -> &Partition {
        &self.outcome.partition
    }

    pub fn phases(&self) -> &[BccPhase] {
        &self.outcome.phases
    }
}

/// Connected components in `rcast(n, 1, d·5⌈log₂ n⌉)` with threshold `s ≥ 2`.
///
/// Each phase takes four rounds: degrees, an edge to the largest neighbor,
/// rescue edges from local maxima, and new degrees, after which components
/// of degree below `s` retire. Retired nodes then announce their remaining
/// component edges, `d` per round.
pub fn broadcast_cc(g: &Arc<Graph>, s: usize, d: usize, opts: &RunOptions) -> Result<BccRun, EngineError> {
    if s < 2 {
        return Err(EngineError::Config(format!("threshold s must be at least 2, got {s}")));
    }
    if d < 1 {
        return Err(EngineError::Config("bandwidth multiplier d must be at least 1".into()));
    }
    let n = g.n();
    let codec = Codec::new(n);
    let cfg = ModelConfig::new(n, 1, d * codec.edge_bits())?;
    let params = Params { codec, s, d };
    let res = run(g, cfg, 0, opts, |init| BccNode {
        view: init.view,
        params,
        state: None,
        was_active: true,
        links: Vec::new(),
        playoff: Vec::new(),
        out: None,
    })?;
    Ok(BccRun { outcome: res.outputs[0].clone(), s, d, metrics: res.metrics })
}

#[derive(Clone, Copy)]
struct Params {
    codec: Codec,
    s: usize,
    d: usize,
}

/// What nodes send in the current round.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Stage {
    Degrees,
    ToMax,
    Lost,
    NewDegrees,
    Playoff { round: usize, total: usize },
    Done,
}

#[derive(Debug, PartialEq)]
struct State {
    stage: Stage,
    comps: Partition,
    /// Round-1 degree by component id.
    comp_deg: Vec<usize>,
    /// Round-2 target component by node.
    target: Vec<Option<NodeId>>,
    /// Active components none of whose members spoke in Round 2.
    local_max: Vec<bool>,
    /// Component pairs `(min, max)` joined by a Round-2 edge.
    joined: HashSet<(NodeId, NodeId)>,
    round2_edges: Vec<(NodeId, NodeId)>,
    /// Longest list a retired node holds.
    longest_list: usize,
    playoff_edges: Vec<(NodeId, NodeId)>,
    phases: Vec<BccPhase>,
    done: Option<Arc<BccOutcome>>,
}

impl State {
    fn initial(n: usize) -> State {
        State {
            stage: Stage::Degrees,
            comps: Partition::singletons(n),
            comp_deg: vec![0; n],
            target: vec![None; n],
            local_max: vec![false; n],
            joined: HashSet::new(),
            round2_edges: Vec::new(),
            longest_list: 0,
            playoff_edges: Vec::new(),
            phases: vec![BccPhase { active_before: n, ..Default::default() }],
            done: None,
        }
    }

    fn advance(&self, p: &Params, board: &[Option<Bits>]) -> State {
        let n = self.comps.n();
        let mut next = State {
            stage: self.stage,
            comps: self.comps.clone(),
            comp_deg: Vec::new(),
            target: Vec::new(),
            local_max: Vec::new(),
            joined: HashSet::new(),
            round2_edges: Vec::new(),
            longest_list: self.longest_list,
            playoff_edges: self.playoff_edges.clone(),
            phases: self.phases.clone(),
            done: None,
        };
        let degree_of = |v: usize| board[v].as_ref().map_or(0, |b| p.codec.decode_uint(b) as usize);
        match self.stage {
            Stage::Degrees => {
                let deg = component_degrees(&self.comps, degree_of);
                let phase = next.phases.last_mut().unwrap();
                phase.start_degrees = self.comps.active_ids().into_iter().map(|c| (c, deg[c as usize])).collect();
                if phase.start_degrees.iter().all(|&(_, d)| d == 0) {
                    // nobody has an active neighbor: everyone retires now
                    phase.stopped_early = true;
                    phase.deactivated = phase.start_degrees.len();
                    phase.merged_into = phase.start_degrees.iter().map(|&(c, _)| (c, c)).collect();
                    for c in self.comps.active_ids() {
                        next.comps.set_active(c, false);
                    }
                    next.enter_playoff(p);
                } else {
                    next.comp_deg = deg;
                    next.stage = Stage::ToMax;
                }
            }
            Stage::ToMax => {
                next.comp_deg = self.comp_deg.clone();
                next.target = vec![None; n];
                next.local_max = vec![false; n];
                for c in self.comps.active_ids() {
                    next.local_max[c as usize] = true;
                }
                for (v, e) in decode_pairs(p, board) {
                    let t = self.comps.component_of(other(e, v));
                    let c = self.comps.component_of(v);
                    next.target[v as usize] = Some(t);
                    next.local_max[c as usize] = false;
                    next.joined.insert((c.min(t), c.max(t)));
                    next.round2_edges.push(e);
                }
                next.stage = Stage::Lost;
            }
            Stage::Lost => {
                let mut round2 = BTreeSet::new();
                for (v, t) in self.target.iter().enumerate() {
                    if let Some(t) = t {
                        round2.insert((self.comps.component_of(v as NodeId), *t));
                    }
                }
                let mut round3 = BTreeSet::new();
                let mut type2 = BTreeSet::new();
                let mut edges = self.round2_edges.clone();
                for (v, e) in decode_pairs(p, board) {
                    let w = other(e, v);
                    let l = self.comps.component_of(v);
                    round3.insert((l, self.comps.component_of(w)));
                    if let Some(t) = self.target[w as usize] {
                        type2.insert((l, t));
                    }
                    edges.push(e);
                }
                let keys: Vec<EdgeKey> = edges.iter().map(|&(u, v)| EdgeKey::new(u, v, 0)).collect();
                next.comps = self.comps.merged(&keys);
                let phase = next.phases.last_mut().unwrap();
                phase.round2 = round2.into_iter().collect();
                phase.round3 = round3.into_iter().collect();
                phase.type2 = type2.into_iter().collect();
                edges.sort_unstable();
                phase.edges = edges;
                phase.merged_into =
                    self.comps.active_ids().into_iter().map(|c| (c, next.comps.component_of(c))).collect();
                next.stage = Stage::NewDegrees;
            }
            Stage::NewDegrees => {
                let deg = component_degrees(&self.comps, degree_of);
                let active = self.comps.active_ids();
                let phase = next.phases.last_mut().unwrap();
                phase.end_degrees = active.iter().map(|&c| (c, deg[c as usize])).collect();
                for &c in &active {
                    if deg[c as usize] < p.s {
                        next.comps.set_active(c, false);
                        phase.deactivated += 1;
                    }
                }
                phase.active_after = active.len() - phase.deactivated;
                for v in 0..n {
                    if !next.comps.is_active(self.comps.component_of(v as NodeId)) {
                        next.longest_list = next.longest_list.max(degree_of(v));
                    }
                }
                if phase.active_after > 0 {
                    let before = phase.active_after;
                    next.phases.push(BccPhase { active_before: before, ..Default::default() });
                    next.stage = Stage::Degrees;
                } else {
                    next.enter_playoff(p);
                }
            }
            Stage::Playoff { round, total } => {
                next.playoff_edges.extend(board.iter().flatten().flat_map(|b| p.codec.decode_pairs(b)));
                if round + 1 < total {
                    next.stage = Stage::Playoff { round: round + 1, total };
                } else {
                    next.finish(total);
                }
            }
            Stage::Done => unreachable!("no rounds after the end"),
        }
        next
    }

    fn enter_playoff(&mut self, p: &Params) {
        let total = self.longest_list.div_ceil(p.d);
        if total == 0 {
            self.finish(0);
        } else {
            self.stage = Stage::Playoff { round: 0, total };
        }
    }

    fn finish(&mut self, playoff_rounds: usize) {
        let keys: Vec<EdgeKey> = self.playoff_edges.iter().map(|&(u, v)| EdgeKey::new(u, v, 0)).collect();
        self.stage = Stage::Done;
        self.done = Some(Arc::new(BccOutcome {
            partition: self.comps.merged(&keys).all_active(),
            phases: self.phases.clone(),
            playoff_rounds,
        }));
    }
}

fn other(e: (NodeId, NodeId), v: NodeId) -> NodeId {
    if e.0 == v {
        e.1
    } else {
        e.0
    }
}

/// Maximum member degree per active component id.
fn component_degrees(comps: &Partition, degree_of: impl Fn(usize) -> usize) -> Vec<usize> {
    let mut deg = vec![0; comps.n()];
    for v in 0..comps.n() {
        let c = comps.component_of(v as NodeId);
        if comps.is_active(c) {
            deg[c as usize] = deg[c as usize].max(degree_of(v));
        }
    }
    deg
}

/// `(sender, edge)` for every single-edge broadcast on the board.
fn decode_pairs(p: &Params, board: &[Option<Bits>]) -> Vec<(NodeId, (NodeId, NodeId))> {
    board
        .iter()
        .enumerate()
        .filter_map(|(v, b)| {
            let e = *p.codec.decode_pairs(b.as_ref()?).first()?;
            Some((v as NodeId, e))
        })
        .collect()
}

struct BccNode {
    view: NodeView,
    params: Params,
    state: Option<Arc<State>>,
    was_active: bool,
    /// Lightest edge to each neighboring active component, as last computed.
    links: Vec<(NodeId, EdgeKey)>,
    /// Edges to announce in the playoff.
    playoff: Vec<(NodeId, NodeId)>,
    out: Option<Arc<BccOutcome>>,
}

impl BccNode {
    fn refresh_links(&mut self, comps: &Partition) {
        let me = self.view.id();
        self.links = comps.lightest_per_component(me, self.view.neighbors(), |c| comps.is_active(c));
    }

    fn degree_message(&self) -> Outbox {
        Outbox::broadcast(self.params.codec.encode_uint(self.links.len() as u64))
    }

    fn pair_message(&self, e: &EdgeKey) -> Outbox {
        Outbox::broadcast(self.params.codec.encode_pairs(&[(e.u, e.v)]))
    }
}

impl NodeProgram for BccNode {
    type Output = BccOutcome;

    fn on_round(&mut self, ctx: &RoundContext<'_>, inbox: &Inbox<'_>) -> Result<Outbox, ProgramError> {
        if self.out.is_some() {
            return Ok(Outbox::silent());
        }
        let state = match &self.state {
            None => ctx.shared("bcc-init", || State::initial(ctx.n())),
            Some(prev) => ctx.shared(("bcc", ctx.round), || prev.advance(&self.params, inbox.board())),
        };
        self.state = Some(state.clone());
        let me = self.view.id();
        let comps = &state.comps;
        let own = comps.component_of(me);
        let active = comps.is_active(own);
        if self.was_active && !active {
            self.playoff = self.links.iter().map(|(_, e)| (e.u, e.v)).collect();
        }
        self.was_active = active;
        let ordered = |c: NodeId| (state.comp_deg[c as usize], c);
        Ok(match state.stage {
            Stage::Degrees | Stage::NewDegrees if active => {
                self.refresh_links(comps);
                self.degree_message()
            }
            Stage::ToMax if active => match self.links.iter().max_by_key(|(c, _)| ordered(*c)) {
                Some((c, e)) if ordered(*c) > ordered(own) => self.pair_message(e),
                _ => Outbox::silent(),
            },
            Stage::Lost if state.local_max[own as usize] => {
                let lost = self.links.iter().find(|(c, _)| !state.joined.contains(&((*c).min(own), (*c).max(own))));
                match lost {
                    Some((_, e)) => self.pair_message(e),
                    None => Outbox::silent(),
                }
            }
            Stage::Playoff { round, .. } => {
                let d = self.params.d;
                let batch: Vec<_> = self.playoff.iter().skip(round * d).take(d).copied().collect();
                if batch.is_empty() {
                    Outbox::silent()
                } else {
                    Outbox::broadcast(self.params.codec.encode_pairs(&batch))
                }
            }
            Stage::Done => {
                self.out = state.done.clone();
                Outbox::silent()
            }
            _ => Outbox::silent(),
        })
    }

    fn output(&self) -> Option<Arc<BccOutcome>> {
        self.out.clone()
    }
}
