use std::sync::Arc;

use serde::Serialize;

use super::lightest_relevant;
use super::schedule::MuSchedule;
use super::select::{SelectPlan, Selector};
use crate::codec::Codec;
use crate::dsu::DisjointSets;
use crate::engine::{
    run, EngineError, Inbox, ModelConfig, NodeProgram, NodeView, Outbox, ProgramError, RoundContext, RunMetrics,
    RunOptions, SetFamily, Step,
};
use crate::graph::{EdgeKey, Graph, NodeId, Partition};
use crate::primitives::{GbPlan, GbSpec, GlobalBroadcast};

/// How fragments find and announce their edges.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum MsfVariant {
    /// Selection by local broadcast; members broadcast the selected edges
    /// one each. Range 2.
    Rcast2,
    /// As `Rcast2` but fragments announce by global broadcast, each member
    /// sending a slice, under the capacity-optimal schedule. Range 2.
    CapacityOptimal,
    /// Baseline: every node sends its lightest edge into each fragment to
    /// that fragment directly. Range up to `n`.
    Lotker,
}

impl MsfVariant {
    pub fn schedule(self) -> MuSchedule {
        match self {
            MsfVariant::Rcast2 => MuSchedule::Rcast2,
            MsfVariant::CapacityOptimal => MuSchedule::CapacityOptimal,
            MsfVariant::Lotker => MuSchedule::Uncapped,
        }
    }
}

/// One iteration of the phase loop.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MsfPhase {
    /// 1-based.
    pub index: usize,
    pub mu: usize,
    /// Edges each fragment actually selects.
    pub mu_effective: usize,
    /// Stage-two recurrence value, for comparison (capacity-optimal only).
    pub mu_recurrence: Option<usize>,
    /// Smallest fragment not yet known to be non-growable.
    pub min_fragment: usize,
    pub fragments: usize,
    pub select_levels: usize,
    pub select_rounds: usize,
    pub announce_rounds: usize,
    /// Rounds `first..=last` of this phase (1-based).
    pub first_round: usize,
    pub last_round: usize,
    /// Distinct edges announced.
    pub announced: usize,
    /// Edges that joined the forest.
    pub added: Vec<EdgeKey>,
}

#[derive(Debug, PartialEq, Serialize)]
pub struct MsfOutcome {
    /// In `EdgeKey` order.
    pub edges: Vec<EdgeKey>,
    pub phases: Vec<MsfPhase>,
}

#[derive(Debug)]
pub struct MsfRun {
    pub outcome: Arc<MsfOutcome>,
    pub variant: MsfVariant,
    pub metrics: RunMetrics,
}

impl MsfRun {
    pub fn edges(&self) -> &[EdgeKey] {
        &self.outcome.edges
    }

    pub fn phases(&self) -> &[MsfPhase] {
        &self.outcome.phases
    }

    /// Phases that announced at least one edge.
    pub fn phase_count(&self) -> usize {
        self.phases().iter().filter(|p| p.announced > 0).count()
    }

    /// Largest payload sent during phase `i` (0-based in [`Self::phases`]).
    pub fn phase_beta(&self, i: usize) -> usize {
        let p = &self.phases()[i];
        self.metrics.beta[p.first_round - 1..p.last_round].iter().copied().max().unwrap_or(0)
    }

    /// Largest payload sent during the announcement rounds of phase `i`.
    pub fn announce_beta(&self, i: usize) -> usize {
        let p = &self.phases()[i];
        let from = p.last_round + 1 - p.announce_rounds;
        self.metrics.beta[from - 1..p.last_round].iter().copied().max().unwrap_or(0)
    }
}

/// MSF in `rcast(n, 2, 5⌈log₂ n⌉)`.
pub fn msf_rcast2(g: &Arc<Graph>, opts: &RunOptions) -> Result<MsfRun, EngineError> {
    msf_generic(g, MsfVariant::Rcast2, opts)
}

/// MSF in `rcast(n, 2)` with total capacity `O(log n)`.
pub fn msf_capacity_optimal(g: &Arc<Graph>, opts: &RunOptions) -> Result<MsfRun, EngineError> {
    msf_generic(g, MsfVariant::CapacityOptimal, opts)
}

/// The unrestricted-range baseline.
pub fn msf_lotker(g: &Arc<Graph>, opts: &RunOptions) -> Result<MsfRun, EngineError> {
    msf_generic(g, MsfVariant::Lotker, opts)
}

/// The phase loop shared by all variants.
pub fn msf_generic(g: &Arc<Graph>, variant: MsfVariant, opts: &RunOptions) -> Result<MsfRun, EngineError> {
    let n = g.n();
    let codec = Codec::new(n);
    let r = match variant {
        MsfVariant::Lotker => n,
        _ => 2.min(n),
    };
    let cfg = ModelConfig::new(n, r, codec.edge_bits())?;
    let res = run(g, cfg, 0, opts, |init| MsfNode {
        view: init.view,
        variant,
        codec,
        state: None,
        plan: None,
        stage: Stage::Start,
        announced: Vec::new(),
        out: None,
    })?;
    Ok(MsfRun { outcome: res.outputs[0].clone(), variant, metrics: res.metrics })
}

#[derive(Debug, PartialEq)]
struct State {
    fragments: Arc<Partition>,
    /// By fragment id: announced nothing, so has no outgoing edge.
    frozen: Vec<bool>,
    forest: Vec<EdgeKey>,
    phases: Vec<MsfPhase>,
    prev_mu: usize,
    done: Option<Arc<MsfOutcome>>,
}

impl State {
    fn initial(n: usize) -> State {
        let mut s = State {
            fragments: Arc::new(Partition::singletons(n)),
            frozen: vec![false; n],
            forest: Vec::new(),
            phases: Vec::new(),
            prev_mu: 0,
            done: None,
        };
        s.check_done();
        s
    }

    fn live(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.fragments.component_ids().into_iter().filter(|&c| !self.frozen[c as usize])
    }

    fn check_done(&mut self) {
        if self.fragments.count() <= 1 || self.live().next().is_none() {
            self.done = Some(Arc::new(MsfOutcome { edges: self.forest.clone(), phases: self.phases.clone() }));
        }
    }

    /// Merges along announced edges in `EdgeKey` order, adding an edge only
    /// when it is provably the lightest edge leaving one of the two current
    /// clusters.
    ///
    /// A fragment whose list is full (`μ'` edges) vouches only for edges up to
    /// its heaviest listed one: anything heavier leaving it may be unknown. A
    /// cluster's bound is the smallest such vouch among its fragments. Plain
    /// Kruskal over the announced edges can pick an edge that closes a cycle
    /// through unannounced lighter edges.
    fn merge(&self, plan: &PhasePlan, announced: &[Arc<Vec<(NodeId, EdgeKey)>>], last_round: usize) -> State {
        let n = self.fragments.n();
        let mut count = vec![0usize; n];
        let mut heaviest: Vec<Option<EdgeKey>> = vec![None; n];
        let mut edges: Vec<EdgeKey> = Vec::new();
        for &(f, e) in announced.iter().flat_map(|a| a.iter()) {
            count[f as usize] += 1;
            heaviest[f as usize] = heaviest[f as usize].max(Some(e));
            edges.push(e);
        }
        edges.sort_unstable();
        edges.dedup();
        let mut bound: Vec<Option<EdgeKey>> = vec![None; n];
        for c in 0..n {
            if count[c] >= plan.mu_effective {
                bound[c] = heaviest[c];
            }
        }
        let safe = |b: Option<EdgeKey>, e: &EdgeKey| b.is_none_or(|b| *e <= b);
        let mut d = DisjointSets::new(n);
        for (v, &c) in self.fragments.assignment().iter().enumerate() {
            d.union(v as NodeId, c);
        }
        let mut bound_at = vec![None; n];
        for c in self.fragments.component_ids() {
            bound_at[d.find(c) as usize] = bound[c as usize];
        }
        let mut added = Vec::new();
        for e in &edges {
            let (a, b) = (d.find(e.u), d.find(e.v));
            if a == b || !(safe(bound_at[a as usize], e) || safe(bound_at[b as usize], e)) {
                continue;
            }
            let merged = match (bound_at[a as usize], bound_at[b as usize]) {
                (Some(x), Some(y)) => Some(x.min(y)),
                (x, y) => x.or(y),
            };
            d.union(a, b);
            bound_at[d.find(a) as usize] = merged;
            added.push(*e);
        }
        let spoke: Vec<bool> = count.iter().map(|&k| k > 0).collect();
        let fragments = self.fragments.merged(&added);
        let mut frozen = self.frozen.clone();
        for c in self.live() {
            if !spoke[c as usize] {
                frozen[c as usize] = true;
            }
        }
        let mut forest = self.forest.clone();
        forest.extend(added.iter().copied());
        forest.sort_unstable();
        let mut phases = self.phases.clone();
        phases.push(MsfPhase {
            index: plan.index,
            mu: plan.mu,
            mu_effective: plan.mu_effective,
            mu_recurrence: plan.mu_recurrence,
            min_fragment: plan.min_fragment,
            fragments: plan.live,
            select_levels: plan.select.as_ref().map_or(1, |s| s.levels()),
            select_rounds: plan.select.as_ref().map_or(1, |s| s.rounds()),
            announce_rounds: plan.announce_rounds,
            first_round: plan.first_round,
            last_round,
            announced: edges.len(),
            added,
        });
        let mut s = State { fragments: Arc::new(fragments), frozen, forest, phases, prev_mu: plan.mu, done: None };
        s.check_done();
        s
    }
}

/// Everything about a phase that follows from the fragments alone.
#[derive(Debug, PartialEq)]
struct PhasePlan {
    index: usize,
    mu: usize,
    mu_effective: usize,
    mu_recurrence: Option<usize>,
    min_fragment: usize,
    live: usize,
    first_round: usize,
    /// Position of each node within its fragment.
    rank: Vec<u32>,
    sizes: Vec<usize>,
    /// Local-broadcast selection (range-2 variants).
    select: Option<Arc<SelectPlan>>,
    /// Fragments as multicast groups, and each fragment's index (baseline).
    groups: Option<(Arc<SetFamily>, Vec<u32>)>,
    /// Global-broadcast announcement (capacity-optimal).
    gb: Option<Arc<GbPlan>>,
    announce_rounds: usize,
}

impl PhasePlan {
    fn new(state: &State, variant: MsfVariant, round: usize) -> Result<PhasePlan, String> {
        let f = &state.fragments;
        let n = f.n();
        let members = f.members();
        let live: Vec<NodeId> = state.live().collect();
        let min_fragment = live.iter().map(|&c| members[c as usize].len()).min().unwrap_or(0);
        let index = state.phases.len() + 1;
        let schedule = variant.schedule();
        let mu = schedule.mu(index, n, state.prev_mu, min_fragment);
        let mu_effective = schedule.effective(n, mu);
        let mu_recurrence = (variant == MsfVariant::CapacityOptimal && index > MuSchedule::stage_one_phases(n))
            .then(|| MuSchedule::recurrence(n, state.prev_mu));
        let mut rank = vec![0u32; n];
        for m in &members {
            for (j, &v) in m.iter().enumerate() {
                rank[v as usize] = j as u32;
            }
        }
        let sizes: Vec<usize> = members.iter().map(Vec::len).collect();
        let is_live = |c: NodeId| !state.frozen[c as usize];
        let mut plan = PhasePlan {
            index,
            mu,
            mu_effective,
            mu_recurrence,
            min_fragment,
            live: live.len(),
            first_round: round,
            rank,
            sizes,
            select: None,
            groups: None,
            gb: None,
            announce_rounds: live.iter().map(|&c| mu_effective.div_ceil(members[c as usize].len())).max().unwrap_or(0),
        };
        match variant {
            MsfVariant::Lotker => {
                let mut index_of = vec![u32::MAX; n];
                for (i, &c) in live.iter().enumerate() {
                    index_of[c as usize] = i as u32;
                }
                let sets = live.iter().map(|&c| members[c as usize].clone()).collect();
                let fam = SetFamily::new(n, sets).map_err(|e| e.to_string())?;
                plan.groups = Some((Arc::new(fam), index_of));
            }
            _ => {
                let sel = SelectPlan::new(n, &members, is_live, mu_effective).map_err(|e| e.to_string())?;
                plan.select = Some(Arc::new(sel));
            }
        }
        if variant == MsfVariant::CapacityOptimal {
            let bits = mu_effective * Codec::new(n).edge_bits();
            let specs = live.iter().map(|&c| GbSpec { holders: members[c as usize].clone(), bits }).collect();
            plan.gb = Some(Arc::new(GbPlan::new(n, specs).map_err(|e| e.to_string())?));
            plan.announce_rounds = 1;
        }
        Ok(plan)
    }
}

enum Stage {
    Start,
    Select(Selector),
    GroupSend,
    GroupReceive,
    Announce { round: usize, mine: Arc<Vec<EdgeKey>> },
    Spread(GlobalBroadcast),
    Merge,
    Done,
}

struct MsfNode {
    view: NodeView,
    variant: MsfVariant,
    codec: Codec,
    state: Option<Arc<State>>,
    plan: Option<Arc<PhasePlan>>,
    stage: Stage,
    /// Edges learned from announcements this phase.
    announced: Vec<Arc<Vec<(NodeId, EdgeKey)>>>,
    out: Option<Arc<MsfOutcome>>,
}

impl MsfNode {
    fn own(&self) -> NodeId {
        self.state.as_ref().unwrap().fragments.component_of(self.view.id())
    }

    /// Moves on once `E_F` is known (`None` for frozen fragments).
    fn selected(&mut self, known: Option<Arc<Vec<EdgeKey>>>) {
        let mine = known.unwrap_or_default();
        let plan = self.plan.as_ref().unwrap();
        self.stage = match &plan.gb {
            Some(gb) => {
                let live = !self.state.as_ref().unwrap().frozen[self.own() as usize];
                let msg = live.then(|| self.codec.encode_edges(&mine, plan.mu_effective));
                Stage::Spread(GlobalBroadcast::new(gb.clone(), self.view.id(), msg, plan.index as u64))
            }
            None => Stage::Announce { round: 0, mine },
        };
    }
}

impl NodeProgram for MsfNode {
    type Output = MsfOutcome;

    fn on_round(&mut self, ctx: &RoundContext<'_>, inbox: &Inbox<'_>) -> Result<Outbox, ProgramError> {
        let me = self.view.id();
        loop {
            match &mut self.stage {
                Stage::Done => return Ok(Outbox::silent()),
                Stage::Start => {
                    let state = match &self.state {
                        None => ctx.shared("msf-init", || State::initial(ctx.n())),
                        Some(s) => s.clone(),
                    };
                    self.state = Some(state.clone());
                    if let Some(done) = &state.done {
                        self.out = Some(done.clone());
                        self.stage = Stage::Done;
                        continue;
                    }
                    let variant = self.variant;
                    let plan = ctx.shared(("msf-plan", state.phases.len()), || {
                        PhasePlan::new(&state, variant, ctx.round).map(Arc::new)
                    });
                    let plan = match &*plan {
                        Ok(p) => p.clone(),
                        Err(e) => return Err(e.clone().into()),
                    };
                    self.announced.clear();
                    self.stage = match &plan.select {
                        Some(sel) => Stage::Select(Selector::new(
                            sel.clone(),
                            state.fragments.clone(),
                            &self.view,
                            plan.index as u64,
                        )),
                        None => Stage::GroupSend,
                    };
                    self.plan = Some(plan);
                }
                Stage::Select(sel) => match sel.step(ctx, inbox)? {
                    Step::Send(o) => return Ok(o),
                    Step::Done(known) => self.selected(known),
                },
                Stage::GroupSend => {
                    let state = self.state.as_ref().unwrap();
                    let (fam, index_of) = self.plan.as_ref().unwrap().groups.as_ref().unwrap();
                    let f = &state.fragments;
                    let mut out = Outbox::silent();
                    for (c, e) in f.lightest_per_component(me, self.view.neighbors(), |c| !state.frozen[c as usize]) {
                        out.send_group(fam, index_of[c as usize] as usize, self.codec.encode_edge(&e));
                    }
                    self.stage = Stage::GroupReceive;
                    return Ok(out);
                }
                Stage::GroupReceive => {
                    let state = self.state.clone().unwrap();
                    let plan = self.plan.clone().unwrap();
                    let own = self.own();
                    let known = (!state.frozen[own as usize]).then(|| {
                        let (fam, _) = plan.groups.as_ref().unwrap();
                        let got = inbox.group(fam);
                        let edges = got.iter().filter_map(|(_, p)| self.codec.decode_edge(p));
                        ctx.shared(("lotker", plan.index, own), || {
                            lightest_relevant(edges, &state.fragments, own, plan.mu_effective)
                        })
                    });
                    self.selected(known);
                }
                Stage::Announce { round, mine } => {
                    let plan = self.plan.clone().unwrap();
                    if *round > 0 {
                        let codec = self.codec;
                        let f = &self.state.as_ref().unwrap().fragments;
                        self.announced.push(ctx.shared(("msf-ann", ctx.round), || {
                            let board = inbox.board().iter().enumerate();
                            board
                                .filter_map(|(v, p)| {
                                    Some((f.component_of(v as NodeId), codec.decode_edge(p.as_ref()?)?))
                                })
                                .collect::<Vec<_>>()
                        }));
                    }
                    if *round == plan.announce_rounds {
                        self.stage = Stage::Merge;
                        continue;
                    }
                    let own = self.state.as_ref().unwrap().fragments.component_of(me);
                    let j = plan.rank[me as usize] as usize + *round * plan.sizes[own as usize];
                    *round += 1;
                    return Ok(match mine.get(j) {
                        Some(e) => Outbox::broadcast(self.codec.encode_edge(e)),
                        None => Outbox::silent(),
                    });
                }
                Stage::Spread(gb) => match gb.step(ctx, inbox)? {
                    Step::Send(o) => return Ok(o),
                    Step::Done(msgs) => {
                        let codec = self.codec;
                        let plan = self.plan.clone().unwrap();
                        let specs = plan.gb.as_ref().unwrap().specs();
                        self.announced.push(ctx.shared(("msf-spread", plan.index), || {
                            let per_fragment = specs.iter().zip(msgs.iter());
                            per_fragment
                                .flat_map(|(spec, m)| codec.decode_edges(m).into_iter().map(|e| (spec.holders[0], e)))
                                .collect::<Vec<_>>()
                        }));
                        self.stage = Stage::Merge;
                    }
                },
                Stage::Merge => {
                    let state = self.state.clone().unwrap();
                    let plan = self.plan.clone().unwrap();
                    let announced = &self.announced;
                    let next = ctx.shared(("msf-merge", plan.index), || state.merge(&plan, announced, ctx.round - 1));
                    self.state = Some(next);
                    self.stage = Stage::Start;
                }
            }
        }
    }

    fn output(&self) -> Option<Arc<MsfOutcome>> {
        self.out.clone()
    }
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeSet;

    use super::*;

    #[test]
    fn merge_skips_edges_closing_unannounced_cycles() {
        // a=0 lists its edges to b and c; b and c list lighter edges elsewhere,
        // so the path a-b-c (10, 20) beats a-c (30) without b-c being announced
        let state = State::initial(7);
        let mut plan = PhasePlan::new(&state, MsfVariant::Rcast2, 1).unwrap();
        plan.mu_effective = 2;
        let e = |u, v, w| EdgeKey::new(u, v, w);
        let lists = vec![
            (0, e(0, 1, 10)),
            (0, e(0, 2, 30)),
            (1, e(1, 3, 5)),
            (1, e(1, 4, 7)),
            (2, e(2, 5, 1)),
            (2, e(2, 6, 2)),
            (3, e(1, 3, 5)),
            (4, e(1, 4, 7)),
            (5, e(2, 5, 1)),
            (6, e(2, 6, 2)),
        ];
        let next = state.merge(&plan, &[Arc::new(lists)], 1);
        let added: BTreeSet<EdgeKey> = next.forest.iter().copied().collect();
        assert!(!added.contains(&e(0, 2, 30)));
        assert_eq!(added.len(), 5);
        assert!(added.contains(&e(0, 1, 10)));
    }
}
