//! Reusable communication subroutines.
//!
//! [`LocalBroadcast`] moves one `b`-bit message from every transmitter in `T`
//! to every receiver in `R` in two rounds of one-bit payloads with range 2, as
//! long as `|T|·b ≤ n` (more repetitions otherwise). [`GlobalBroadcast`] lets
//! the holders of a common message spread it in one round by broadcasting one
//! chunk each.
//!
//! Both are step machines: the owning program calls `step` once per round and
//! gets back either this round's outbox or the final result.

mod global_broadcast;
mod local_broadcast;

use std::sync::Arc;

pub use global_broadcast::{GbPlan, GbSpec, GlobalBroadcast};
pub use local_broadcast::{Delivered, LbPlan, LbSpec, LocalBroadcast, PlanError, DEFAULT_MAX_REPETITIONS};

use crate::bits::Bits;
use crate::engine::{
    run, EngineError, Inbox, ModelConfig, NodeProgram, Outbox, ProgramError, RoundContext, RunMetrics, RunOptions, Step,
};
use crate::graph::{Graph, NodeId};

/// Outcome of [`run_local_broadcast`].
#[derive(Debug)]
pub struct LocalBroadcastRun {
    /// For each node, the messages of the instance it receives in (transmitter
    /// order), if any.
    pub received: Vec<Option<Delivered>>,
    pub metrics: RunMetrics,
}

/// Runs a set of local broadcasts on their own in `rcast(n, 2, 1)`.
///
/// `messages[v]` is node `v`'s message if it transmits.
pub fn run_local_broadcast(
    n: usize,
    specs: Vec<LbSpec>,
    messages: &[Option<Bits>],
    max_repetitions: usize,
) -> Result<LocalBroadcastRun, EngineError> {
    let plan = Arc::new(LbPlan::new(n, specs, max_repetitions).map_err(|e| EngineError::Config(e.to_string()))?);
    let graph = Arc::new(Graph::empty(n));
    let cfg = ModelConfig::new(n, 2.min(n), 1)?;
    let res = run(&graph, cfg, 0, &RunOptions::default(), |init| LbNode {
        lb: LocalBroadcast::new(plan.clone(), init.id, messages.get(init.id as usize).cloned().flatten(), 0),
        out: None,
    })?;
    Ok(LocalBroadcastRun { received: res.outputs.iter().map(|o| (**o).clone()).collect(), metrics: res.metrics })
}

struct LbNode {
    lb: LocalBroadcast,
    out: Option<Arc<Option<Delivered>>>,
}

impl NodeProgram for LbNode {
    type Output = Option<Delivered>;
    const GLOBAL_OUTPUT: bool = false;

    fn on_round(&mut self, ctx: &RoundContext<'_>, inbox: &Inbox<'_>) -> Result<Outbox, ProgramError> {
        if self.out.is_some() {
            return Ok(Outbox::silent());
        }
        match self.lb.step(ctx, inbox)? {
            Step::Send(o) => Ok(o),
            Step::Done(d) => {
                self.out = Some(Arc::new(d));
                Ok(Outbox::silent())
            }
        }
    }

    fn output(&self) -> Option<Arc<Self::Output>> {
        self.out.clone()
    }
}

/// Outcome of [`run_global_broadcast`].
#[derive(Debug)]
pub struct GlobalBroadcastRun {
    /// Every instance's message, as known to all nodes.
    pub messages: Arc<Vec<Bits>>,
    pub metrics: RunMetrics,
}

/// Runs global broadcasts with disjoint holder sets in `rcast(n, 1, b)` where
/// `b` is the largest chunk. `messages[i]` is instance `i`'s common message.
pub fn run_global_broadcast(
    n: usize,
    specs: Vec<GbSpec>,
    messages: &[Bits],
) -> Result<GlobalBroadcastRun, EngineError> {
    let plan = GbPlan::new(n, specs).map_err(|e| EngineError::Config(e.to_string()))?;
    let holder_msg: Vec<Option<Bits>> = {
        let mut v = vec![None; n];
        for (spec, m) in plan.specs().iter().zip(messages) {
            for &h in &spec.holders {
                v[h as usize] = Some(m.clone());
            }
        }
        v
    };
    let cfg = ModelConfig::new(n, 1, plan.beta().max(1))?;
    let plan = Arc::new(plan);
    let graph = Arc::new(Graph::empty(n));
    let res = run(&graph, cfg, 0, &RunOptions::default(), |init| GbNode {
        gb: GlobalBroadcast::new(plan.clone(), init.id, holder_msg[init.id as usize].clone(), 0),
        out: None,
    })?;
    Ok(GlobalBroadcastRun { messages: res.outputs[0].clone(), metrics: res.metrics })
}

struct GbNode {
    gb: GlobalBroadcast,
    out: Option<Arc<Vec<Bits>>>,
}

impl NodeProgram for GbNode {
    type Output = Vec<Bits>;

    fn on_round(&mut self, ctx: &RoundContext<'_>, inbox: &Inbox<'_>) -> Result<Outbox, ProgramError> {
        if self.out.is_some() {
            return Ok(Outbox::silent());
        }
        match self.gb.step(ctx, inbox)? {
            Step::Send(o) => Ok(o),
            Step::Done(d) => {
                self.out = Some(d);
                Ok(Outbox::silent())
            }
        }
    }

    fn output(&self) -> Option<Arc<Vec<Bits>>> {
        self.out.clone()
    }
}

/// Sorted list of the nodes `0..n` for which `keep` holds.
pub fn nodes_where(n: usize, keep: impl Fn(NodeId) -> bool) -> Vec<NodeId> {
    (0..n as NodeId).filter(|&v| keep(v)).collect()
}

#[cfg(test)]
mod tests;
