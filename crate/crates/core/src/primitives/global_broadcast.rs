use std::sync::Arc;

use super::local_broadcast::PlanError;
use crate::bits::Bits;
use crate::engine::{Inbox, Outbox, ProgramError, RoundContext, Step};
use crate::graph::NodeId;

/// Holders `S` of a common `bits`-bit message.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GbSpec {
    pub holders: Vec<NodeId>,
    pub bits: usize,
}

impl GbSpec {
    /// `⌈b / |S|⌉`.
    pub fn chunk(&self) -> usize {
        self.bits.div_ceil(self.holders.len().max(1))
    }
}

/// Several global broadcasts with disjoint holder sets, done in one round.
#[derive(Debug, PartialEq, Eq)]
pub struct GbPlan {
    specs: Vec<GbSpec>,
    slot: Vec<Option<(u32, u32)>>,
}

impl GbPlan {
    pub fn new(n: usize, specs: Vec<GbSpec>) -> Result<Self, PlanError> {
        let mut specs = specs;
        let mut slot = vec![None; n];
        for (i, spec) in specs.iter_mut().enumerate() {
            spec.holders.sort_unstable();
            spec.holders.dedup();
            for (pos, &h) in spec.holders.iter().enumerate() {
                let s = slot.get_mut(h as usize).ok_or(PlanError::UnknownNode(h))?;
                if s.is_some() {
                    return Err(PlanError::SharedTransmitter(h));
                }
                *s = Some((i as u32, pos as u32));
            }
        }
        Ok(GbPlan { specs, slot })
    }

    pub fn specs(&self) -> &[GbSpec] {
        &self.specs
    }

    /// Largest chunk any holder sends.
    pub fn beta(&self) -> usize {
        self.specs.iter().map(GbSpec::chunk).max().unwrap_or(0)
    }
}

/// One node's side of a [`GbPlan`]: one round, then every node knows every
/// instance's message.
pub struct GlobalBroadcast {
    plan: Arc<GbPlan>,
    me: NodeId,
    message: Option<Bits>,
    tag: u64,
    sent: bool,
}

impl GlobalBroadcast {
    /// `message` is the common message if this node is a holder.
    pub fn new(plan: Arc<GbPlan>, me: NodeId, message: Option<Bits>, tag: u64) -> Self {
        GlobalBroadcast { plan, me, message, tag, sent: false }
    }

    pub fn step(&mut self, ctx: &RoundContext<'_>, inbox: &Inbox<'_>) -> Result<Step<Arc<Vec<Bits>>>, ProgramError> {
        if !self.sent {
            self.sent = true;
            let mut out = Outbox::silent();
            if let Some((i, pos)) = self.plan.slot[self.me as usize] {
                let spec = &self.plan.specs[i as usize];
                let msg = self.message.as_ref().ok_or("holder has no message")?;
                if msg.len() != spec.bits {
                    return Err(format!("holder message has {} bits, expected {}", msg.len(), spec.bits).into());
                }
                let chunk = spec.chunk();
                let piece = msg.slice(pos as usize * chunk, chunk);
                if !piece.is_empty() {
                    out = Outbox::broadcast(piece);
                }
            }
            return Ok(Step::Send(out));
        }
        let board = inbox.board();
        let plan = &self.plan;
        Ok(Step::Done(ctx.shared(("gb", self.tag), || {
            plan.specs
                .iter()
                .map(|spec| {
                    let chunk = spec.chunk();
                    let mut m = Bits::with_capacity(spec.bits);
                    for (pos, h) in spec.holders.iter().enumerate() {
                        let want = chunk.min(spec.bits.saturating_sub(pos * chunk));
                        match &board[*h as usize] {
                            Some(p) => m.extend(&p.slice(0, want)),
                            None => m.extend(&Bits::zeros(want)),
                        }
                    }
                    m
                })
                .collect::<Vec<_>>()
        })))
    }
}
