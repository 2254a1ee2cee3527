use std::sync::Arc;

use super::lightest_relevant;
use crate::bits::Bits;
use crate::codec::Codec;
use crate::engine::{
    run, EngineError, Inbox, ModelConfig, NodeProgram, NodeView, Outbox, ProgramError, RoundContext, RunMetrics,
    RunOptions, Step,
};
use crate::graph::{EdgeKey, Graph, NodeId, Partition};
use crate::math::ceil_cbrt;
use crate::primitives::{Delivered, LbPlan, LbSpec, LocalBroadcast, PlanError};

/// Local broadcasts that leave every member of each selected fragment `F`
/// knowing `E_{F,μ'}`.
///
/// A fragment with `|F|·μ'·⌈log₂ n⌉ ≤ n` runs one broadcast among all its
/// members. A larger fragment is cut into groups small enough for one
/// repetition; each group shares its members' lists, its minimum-id node keeps
/// the group's `μ'` lightest edges, and the leaders repeat until few enough
/// remain to broadcast to the whole fragment.
#[derive(Debug, PartialEq)]
pub(crate) struct SelectPlan {
    pub mu: usize,
    codec: Codec,
    levels: Vec<Arc<LbPlan>>,
    kinds: Vec<Vec<Kind>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Kind {
    Group,
    Whole(NodeId),
}

impl SelectPlan {
    /// `members[c]` lists fragment `c` in increasing order; only fragments
    /// for which `include` holds take part. `mu` is already capped.
    pub fn new(
        n: usize,
        members: &[Vec<NodeId>],
        include: impl Fn(NodeId) -> bool,
        mu: usize,
    ) -> Result<Self, PlanError> {
        let codec = Codec::new(n);
        let msg_bits = mu * codec.edge_bits();
        let group = (n / msg_bits).max(2);
        let mut levels: Vec<(Vec<LbSpec>, Vec<Kind>)> = Vec::new();
        for (c, f) in members.iter().enumerate() {
            if f.is_empty() || !include(c as NodeId) {
                continue;
            }
            let mut a = f.clone();
            let mut level = 0;
            loop {
                if levels.len() == level {
                    levels.push(Default::default());
                }
                let (specs, kinds) = &mut levels[level];
                if a.len() == 1 || a.len() * mu * codec.id_bits() <= n {
                    specs.push(LbSpec { transmitters: a, receivers: f.clone(), bits: msg_bits });
                    kinds.push(Kind::Whole(c as NodeId));
                    break;
                }
                for g in a.chunks(group) {
                    specs.push(LbSpec { transmitters: g.to_vec(), receivers: g.to_vec(), bits: msg_bits });
                    kinds.push(Kind::Group);
                }
                a = a.iter().step_by(group).copied().collect();
                level += 1;
            }
        }
        let mut plans = Vec::with_capacity(levels.len());
        let mut all_kinds = Vec::with_capacity(levels.len());
        for (specs, kinds) in levels {
            plans.push(Arc::new(LbPlan::new(n, specs, usize::MAX)?));
            all_kinds.push(kinds);
        }
        Ok(SelectPlan { mu, codec, levels: plans, kinds: all_kinds })
    }

    pub fn rounds(&self) -> usize {
        self.levels.iter().map(|p| p.rounds()).sum()
    }

    pub fn levels(&self) -> usize {
        self.levels.len()
    }
}

/// One node's side of a [`SelectPlan`].
pub(crate) struct Selector {
    plan: Arc<SelectPlan>,
    fragments: Arc<Partition>,
    me: NodeId,
    tag: u64,
    level: usize,
    lb: Option<LocalBroadcast>,
    list: Option<Vec<EdgeKey>>,
    result: Option<Arc<Vec<EdgeKey>>>,
}

impl Selector {
    /// `tag` must differ between selections that overlap in time.
    pub fn new(plan: Arc<SelectPlan>, fragments: Arc<Partition>, view: &NodeView, tag: u64) -> Self {
        let me = view.id();
        let own = fragments.component_of(me);
        let list = lightest_relevant(view.incident_edges(), &fragments, own, plan.mu);
        Selector { plan, fragments, me, tag, level: 0, lb: None, list: Some(list), result: None }
    }

    /// Finishes with `E_{F,μ'}` for this node's fragment, or `None` if the
    /// fragment did not take part.
    pub fn step(
        &mut self,
        ctx: &RoundContext<'_>,
        inbox: &Inbox<'_>,
    ) -> Result<Step<Option<Arc<Vec<EdgeKey>>>>, ProgramError> {
        loop {
            if self.lb.is_none() {
                if self.level == self.plan.levels.len() {
                    return Ok(Step::Done(self.result.take()));
                }
                let msg = self.list.as_ref().map(|l| self.plan.codec.encode_edges(l, self.plan.mu));
                let tag = self.tag.wrapping_mul(64).wrapping_add(self.level as u64);
                self.lb = Some(LocalBroadcast::new(self.plan.levels[self.level].clone(), self.me, msg, tag));
            }
            match self.lb.as_mut().unwrap().step(ctx, inbox)? {
                Step::Send(o) => return Ok(Step::Send(o)),
                Step::Done(got) => {
                    self.finish_level(ctx, got);
                    self.lb = None;
                    self.level += 1;
                }
            }
        }
    }

    fn finish_level(&mut self, ctx: &RoundContext<'_>, got: Option<Delivered>) {
        let plan = &self.plan;
        let Some(i) = plan.levels[self.level].receiver_instance(self.me) else { return };
        let got = got.expect("receivers get a delivery");
        let own = self.fragments.component_of(self.me);
        let merge = |msgs: &[Bits]| {
            lightest_relevant(msgs.iter().flat_map(|m| plan.codec.decode_edges(m)), &self.fragments, own, plan.mu)
        };
        match plan.kinds[self.level][i] {
            Kind::Group => {
                let leader = plan.levels[self.level].specs()[i].receivers[0];
                self.list = (leader == self.me).then(|| merge(&got));
            }
            Kind::Whole(f) => {
                self.list = None;
                self.result = Some(ctx.shared(("select", self.tag, f), || merge(&got)));
            }
        }
    }
}

/// Outcome of [`select_edges`].
#[derive(Debug)]
pub struct SelectRun {
    /// `E_{F^v,μ'}` as known to node `v`.
    pub known: Vec<Arc<Vec<EdgeKey>>>,
    pub mu: usize,
    /// Number of local-broadcast levels used.
    pub levels: usize,
    pub metrics: RunMetrics,
}

/// Runs one edge selection for the given fragments in `rcast(n, 2, 1)`, with
/// `μ' = min(⌈n^{1/3}⌉, mu)`.
pub fn select_edges(
    g: &Arc<Graph>,
    fragments: &Partition,
    mu: usize,
    opts: &RunOptions,
) -> Result<SelectRun, EngineError> {
    let n = g.n();
    if fragments.n() != n {
        return Err(EngineError::Config("partition does not match the graph".into()));
    }
    let mu = mu.min(ceil_cbrt(n as u64) as usize).max(1);
    let plan =
        SelectPlan::new(n, &fragments.members(), |_| true, mu).map_err(|e| EngineError::Config(e.to_string()))?;
    let levels = plan.levels();
    let plan = Arc::new(plan);
    let fragments = Arc::new(fragments.clone());
    let cfg = ModelConfig::new(n, 2.min(n), 1)?;
    let res = run(g, cfg, 0, opts, |init| SelectNode {
        sel: Selector::new(plan.clone(), fragments.clone(), &init.view, 0),
        out: None,
    })?;
    Ok(SelectRun { known: res.outputs, mu, levels, metrics: res.metrics })
}

struct SelectNode {
    sel: Selector,
    out: Option<Arc<Vec<EdgeKey>>>,
}

impl NodeProgram for SelectNode {
    type Output = Vec<EdgeKey>;
    const GLOBAL_OUTPUT: bool = false;

    fn on_round(&mut self, ctx: &RoundContext<'_>, inbox: &Inbox<'_>) -> Result<Outbox, ProgramError> {
        if self.out.is_some() {
            return Ok(Outbox::silent());
        }
        match self.sel.step(ctx, inbox)? {
            Step::Send(o) => Ok(o),
            Step::Done(r) => {
                self.out = Some(r.unwrap_or_default());
                Ok(Outbox::silent())
            }
        }
    }

    fn output(&self) -> Option<Arc<Vec<EdgeKey>>> {
        self.out.clone()
    }
}
