use std::collections::BTreeSet;
use std::sync::Arc;

use crate::bits::Bits;
use crate::codec::Codec;
use crate::engine::{
    run, EngineError, Inbox, ModelConfig, NodeProgram, NodeView, Outbox, ProgramError, RoundContext, RunMetrics,
    RunOptions,
};
use crate::graph::{EdgeKey, Graph, NodeId, Partition};

#[derive(Debug)]
pub struct BoruvkaRun {
    /// Forest edges in `EdgeKey` order.
    pub edges: Vec<EdgeKey>,
    pub phases: usize,
    pub metrics: RunMetrics,
}

/// Minimum spanning forest in `rcast(n, 1, 5⌈log₂ n⌉)`, one round per phase.
///
/// A fragment none of whose members announced anything has no outgoing edge
/// and is frozen. The run ends when every fragment is frozen or one fragment
/// spans all nodes, so at most `⌈log₂ n⌉` phases are used.
pub fn boruvka_msf_broadcast(g: &Arc<Graph>, opts: &RunOptions) -> Result<BoruvkaRun, EngineError> {
    let n = g.n();
    let codec = Codec::new(n);
    let cfg = ModelConfig::new(n, 1, codec.edge_bits())?;
    let res = run(g, cfg, 0, opts, |init| BoruvkaNode { view: init.view, codec, state: None, out: None })?;
    let out = res.outputs[0].clone();
    Ok(BoruvkaRun { edges: out.edges.clone(), phases: out.phases, metrics: res.metrics })
}

#[derive(Debug, PartialEq)]
struct State {
    fragments: Partition,
    /// Indexed by fragment id.
    frozen: Vec<bool>,
    forest: BTreeSet<EdgeKey>,
    phases: usize,
    done: Option<Arc<Outcome>>,
}

#[derive(Debug, PartialEq)]
struct Outcome {
    edges: Vec<EdgeKey>,
    phases: usize,
}

impl State {
    fn initial(n: usize) -> State {
        let mut s = State {
            fragments: Partition::singletons(n),
            frozen: vec![false; n],
            forest: BTreeSet::new(),
            phases: 0,
            done: None,
        };
        s.check_done();
        s
    }

    fn check_done(&mut self) {
        let ids = self.fragments.component_ids();
        if ids.len() == 1 || ids.iter().all(|&c| self.frozen[c as usize]) {
            self.done = Some(Arc::new(Outcome { edges: self.forest.iter().copied().collect(), phases: self.phases }));
        }
    }

    /// Merges along each fragment's lightest announced edge.
    fn advance(&self, codec: &Codec, board: &[Option<Bits>]) -> State {
        let n = self.fragments.n();
        let mut best: Vec<Option<EdgeKey>> = vec![None; n];
        for (v, p) in board.iter().enumerate() {
            let Some(e) = p.as_ref().and_then(|p| codec.decode_edge(p)) else { continue };
            let f = self.fragments.component_of(v as NodeId) as usize;
            if best[f].is_none_or(|b| e < b) {
                best[f] = Some(e);
            }
        }
        let chosen: Vec<EdgeKey> = best.iter().flatten().copied().collect();
        let mut forest = self.forest.clone();
        forest.extend(chosen.iter().copied());
        let fragments = self.fragments.merged(&chosen);
        let mut frozen = vec![false; n];
        for c in self.fragments.component_ids() {
            if best[c as usize].is_none() {
                frozen[c as usize] = true;
            }
        }
        let mut s = State { fragments, frozen, forest, phases: self.phases + 1, done: None };
        s.check_done();
        s
    }
}

struct BoruvkaNode {
    view: NodeView,
    codec: Codec,
    state: Option<Arc<State>>,
    out: Option<Arc<Outcome>>,
}

impl NodeProgram for BoruvkaNode {
    type Output = Outcome;

    fn on_round(&mut self, ctx: &RoundContext<'_>, inbox: &Inbox<'_>) -> Result<Outbox, ProgramError> {
        if self.out.is_some() {
            return Ok(Outbox::silent());
        }
        let state = match &self.state {
            None => ctx.shared("boruvka-init", || State::initial(ctx.n())),
            Some(prev) => ctx.shared(("boruvka", ctx.round), || prev.advance(&self.codec, inbox.board())),
        };
        self.state = Some(state.clone());
        if let Some(done) = &state.done {
            self.out = Some(done.clone());
            return Ok(Outbox::silent());
        }
        let me = self.view.id();
        let f = &state.fragments;
        let own = f.component_of(me);
        let lightest = self.view.incident_edges().filter(|e| f.component_of(e.other(me)) != own).min();
        Ok(match lightest {
            Some(e) => Outbox::broadcast(self.codec.encode_edge(&e)),
            None => Outbox::silent(),
        })
    }

    fn output(&self) -> Option<Arc<Outcome>> {
        self.out.clone()
    }
}
