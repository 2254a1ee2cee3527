use std::collections::BTreeMap;
use std::sync::Arc;

use super::{
    run, EngineError, Inbox, ModelConfig, NodeProgram, Outbox, ProgramError, RoundContext, RunMetrics, RunOptions,
};
use crate::bits::Bits;
use crate::graph::{Graph, NodeId};
use crate::math::floor_log2;

/// One unicast round: `messages[v]` lists `(recipient, payload)` for sender `v`.
///
/// Every payload must be exactly `len` bits so that receivers know where each
/// message ends.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UnicastPlan {
    pub len: usize,
    pub messages: Vec<Vec<(NodeId, Bits)>>,
}

#[derive(Debug)]
pub struct UnicastResult {
    /// `received[v]` lists `(sender, payload)` sorted by sender.
    pub received: Vec<Vec<(NodeId, Bits)>>,
    pub metrics: RunMetrics,
}

/// Replays one unicast round in `rcast(n, r)` by cutting every payload into
/// blocks of `⌊log₂ r⌋` bits, one block per round.
///
/// A node then sends at most `2^⌊log₂ r⌋ ≤ r` distinct blocks per round. Needs
/// `r ≥ 2`.
pub fn simulate_unicast_round(plan: &UnicastPlan, r: usize) -> Result<UnicastResult, EngineError> {
    let n = plan.messages.len();
    if r < 2 {
        return Err(EngineError::Config("unicast simulation needs range r >= 2".into()));
    }
    let k = floor_log2(r as u64) as usize;
    for (v, list) in plan.messages.iter().enumerate() {
        let mut seen: Vec<NodeId> = list.iter().map(|(to, _)| *to).collect();
        seen.sort_unstable();
        if seen.windows(2).any(|w| w[0] == w[1]) {
            return Err(EngineError::Config(format!("node {v} has two messages for one recipient")));
        }
        if let Some((to, p)) = list.iter().find(|(_, p)| p.len() != plan.len) {
            return Err(EngineError::Config(format!(
                "message {v} -> {to} has {} bits, plan length is {}",
                p.len(),
                plan.len
            )));
        }
    }
    let cfg = ModelConfig::new(n, r.min(n), k)?;
    let rounds = plan.len.div_ceil(k);
    let plan = Arc::new(plan.clone());
    let graph = Arc::new(Graph::empty(n));
    let opts = RunOptions { round_cap: Some(rounds + 1), audit: Some(false), ..Default::default() };
    let result = run(&graph, cfg, 0, &opts, |init| UnicastNode {
        me: init.id,
        plan: plan.clone(),
        k,
        rounds,
        acc: BTreeMap::new(),
        out: None,
    })?;
    Ok(UnicastResult { received: result.outputs.iter().map(|o| (**o).clone()).collect(), metrics: result.metrics })
}

struct UnicastNode {
    me: NodeId,
    plan: Arc<UnicastPlan>,
    k: usize,
    rounds: usize,
    acc: BTreeMap<NodeId, Bits>,
    out: Option<Arc<Vec<(NodeId, Bits)>>>,
}

impl NodeProgram for UnicastNode {
    type Output = Vec<(NodeId, Bits)>;
    const GLOBAL_OUTPUT: bool = false;

    fn on_round(&mut self, ctx: &RoundContext<'_>, inbox: &Inbox<'_>) -> Result<Outbox, ProgramError> {
        for (s, p) in inbox.unicasts() {
            self.acc.entry(*s).or_default().extend(p);
        }
        let t = ctx.round - 1;
        if t >= self.rounds {
            if self.out.is_none() {
                self.out = Some(Arc::new(std::mem::take(&mut self.acc).into_iter().collect()));
            }
            return Ok(Outbox::silent());
        }
        let mut out = Outbox::silent();
        for (to, p) in &self.plan.messages[self.me as usize] {
            out.send(*to, p.slice(t * self.k, self.k));
        }
        Ok(out)
    }

    fn output(&self) -> Option<Arc<Self::Output>> {
        self.out.clone()
    }
}
