//! Algorithms for the broadcast clique `rcast(n, 1)`.
//!
//! [`boruvka_msf_broadcast`] runs Boruvka with one round per phase: every node
//! broadcasts the lightest edge leaving its fragment. [`broadcast_cc`] finds
//! connected components in `O(log n / log log n)` rounds by merging each
//! component into a higher-degree neighbor and retiring components whose
//! degree falls below a threshold `s`.

mod boruvka;
mod broadcast_cc;

pub use boruvka::{boruvka_msf_broadcast, BoruvkaRun};
pub use broadcast_cc::{broadcast_cc, default_threshold, BccOutcome, BccPhase, BccRun};
