use std::sync::Arc;

use crate::bits::Bits;
use crate::engine::{Inbox, Outbox, ProgramError, RoundContext, SetFamily, Step};
use crate::graph::NodeId;

/// Default cap on repetitions, i.e. on `⌈|T|·b / n⌉`.
pub const DEFAULT_MAX_REPETITIONS: usize = 64;

/// One transmitter/receiver triple `(T, R, b)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LbSpec {
    pub transmitters: Vec<NodeId>,
    pub receivers: Vec<NodeId>,
    pub bits: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum PlanError {
    #[error("node {0} is a transmitter in two instances")]
    SharedTransmitter(NodeId),
    #[error("node {0} is a receiver in two instances")]
    SharedReceiver(NodeId),
    #[error("instance {instance} needs {needed} repetitions, limit is {limit}")]
    TooManyRepetitions { instance: usize, needed: usize, limit: usize },
    #[error("node {0} does not exist")]
    UnknownNode(NodeId),
}

impl From<PlanError> for ProgramError {
    fn from(e: PlanError) -> Self {
        ProgramError(e.to_string())
    }
}

/// A schedule for running several local broadcasts at once.
///
/// Transmitter `t` (by position in sorted `T`) owns global bit indices
/// `t·b .. (t+1)·b`. Bit `g` is relayed by node `g mod n` in repetition
/// `⌊g / n⌋`; each repetition takes two rounds.
#[derive(Debug, PartialEq, Eq)]
pub struct LbPlan {
    n: usize,
    specs: Vec<LbSpec>,
    repetitions: usize,
    /// `(instance, position)` of each transmitter.
    sender_slot: Vec<Option<(u32, u32)>>,
    receivers: Arc<SetFamily>,
}

impl LbPlan {
    pub fn new(n: usize, specs: Vec<LbSpec>, max_repetitions: usize) -> Result<Self, PlanError> {
        let mut specs = specs;
        let mut sender_slot = vec![None; n];
        let mut repetitions = 1;
        for (i, spec) in specs.iter_mut().enumerate() {
            spec.transmitters.sort_unstable();
            spec.transmitters.dedup();
            spec.receivers.sort_unstable();
            spec.receivers.dedup();
            for (pos, &t) in spec.transmitters.iter().enumerate() {
                let slot = sender_slot.get_mut(t as usize).ok_or(PlanError::UnknownNode(t))?;
                if slot.is_some() {
                    return Err(PlanError::SharedTransmitter(t));
                }
                *slot = Some((i as u32, pos as u32));
            }
            let needed = (spec.transmitters.len() * spec.bits).div_ceil(n).max(1);
            if needed > max_repetitions {
                return Err(PlanError::TooManyRepetitions { instance: i, needed, limit: max_repetitions });
            }
            repetitions = repetitions.max(needed);
        }
        let mut seen = vec![false; n];
        for spec in &specs {
            for &v in &spec.receivers {
                let slot = seen.get_mut(v as usize).ok_or(PlanError::UnknownNode(v))?;
                if *slot {
                    return Err(PlanError::SharedReceiver(v));
                }
                *slot = true;
            }
        }
        let sets = specs.iter().map(|s| s.receivers.clone()).collect();
        let receivers = SetFamily::new(n, sets).expect("receiver sets checked above");
        Ok(LbPlan { n, specs, repetitions, sender_slot, receivers: Arc::new(receivers) })
    }

    /// Rounds the plan takes: two per repetition. An empty plan takes none.
    pub fn rounds(&self) -> usize {
        if self.specs.is_empty() {
            0
        } else {
            2 * self.repetitions
        }
    }

    pub fn specs(&self) -> &[LbSpec] {
        &self.specs
    }

    pub fn receiver_instance(&self, v: NodeId) -> Option<usize> {
        self.receivers.owner_of(v)
    }

    fn transmitter_slot(&self, v: NodeId) -> Option<(usize, usize)> {
        self.sender_slot[v as usize].map(|(i, p)| (i as usize, p as usize))
    }
}

/// Messages an instance delivered, in transmitter order.
pub type Delivered = Arc<Vec<Bits>>;

/// One node's side of an [`LbPlan`].
pub struct LocalBroadcast {
    plan: Arc<LbPlan>,
    me: NodeId,
    message: Option<Bits>,
    tag: u64,
    step: usize,
    /// Bits this node relays in the current repetition: `(instance, bit)`.
    relay: Vec<(usize, bool)>,
    partial: Vec<Arc<Vec<(NodeId, bool)>>>,
}

impl LocalBroadcast {
    /// `message` is this node's `M^v` if it is a transmitter (padded or
    /// truncated to the instance's `b`). `tag` separates concurrent plans in the
    /// shared cache.
    pub fn new(plan: Arc<LbPlan>, me: NodeId, message: Option<Bits>, tag: u64) -> Self {
        LocalBroadcast { plan, me, message, tag, step: 0, relay: Vec::new(), partial: Vec::new() }
    }

    /// Advances by one round. Returns the messages of this node's receiver
    /// instance (or `None` if it receives nothing) when finished.
    pub fn step(&mut self, ctx: &RoundContext<'_>, inbox: &Inbox<'_>) -> Result<Step<Option<Delivered>>, ProgramError> {
        let k = self.step;
        self.step += 1;
        let total = self.plan.rounds();
        if k % 2 == 1 {
            // Round 2 of repetition (k - 1) / 2: forward relayed bits.
            for (s, p) in inbox.unicasts() {
                if let Some((i, _)) = self.plan.transmitter_slot(*s) {
                    self.relay.push((i, p.get(0)));
                }
            }
            let mut out = Outbox::silent();
            self.relay.sort_unstable();
            for (i, bit) in self.relay.drain(..) {
                out.send_group(&self.plan.receivers, i, Bits::bit(bit));
            }
            return Ok(Step::Send(out));
        }
        if k > 0 {
            if let Some(i) = self.plan.receiver_instance(self.me) {
                let rep = k / 2 - 1;
                let got = inbox.group(&self.plan.receivers);
                self.partial.push(ctx.shared(("lb-rep", self.tag, i, rep), || {
                    got.iter().map(|(s, p)| (*s, p.get(0))).collect::<Vec<_>>()
                }));
            }
        }
        if k >= total {
            let Some(i) = self.plan.receiver_instance(self.me) else { return Ok(Step::Done(None)) };
            let plan = &self.plan;
            let partial = &self.partial;
            let msgs = ctx.shared(("lb-final", self.tag, i), || assemble(plan, i, partial));
            return Ok(Step::Done(Some(msgs)));
        }
        // Round 1 of repetition k / 2: hand bits to relays.
        let rep = k / 2;
        let mut out = Outbox::silent();
        if let Some((i, pos)) = self.plan.transmitter_slot(self.me) {
            let b = self.plan.specs[i].bits;
            let n = self.plan.n;
            let msg = self.message.as_ref().ok_or("transmitter has no message")?;
            for j in 0..b {
                let g = pos * b + j;
                if g / n != rep {
                    continue;
                }
                let bit = j < msg.len() && msg.get(j);
                let relay = (g % n) as NodeId;
                if relay == self.me {
                    self.relay.push((i, bit));
                } else {
                    out.send(relay, Bits::bit(bit));
                }
            }
        }
        Ok(Step::Send(out))
    }
}

fn assemble(plan: &LbPlan, instance: usize, partial: &[Arc<Vec<(NodeId, bool)>>]) -> Vec<Bits> {
    let spec = &plan.specs[instance];
    let b = spec.bits;
    let mut msgs = vec![Bits::zeros(b); spec.transmitters.len()];
    if b == 0 {
        return msgs;
    }
    for (rep, bits) in partial.iter().enumerate() {
        for &(relay, bit) in bits.iter() {
            let g = rep * plan.n + relay as usize;
            let t = g / b;
            if t < msgs.len() && bit {
                msgs[t].set(g % b, true);
            }
        }
    }
    msgs
}
