//! Fixed-width encodings of edges, degrees and edge lists.
//!
//! Node ids take `id_bits(n)` bits. A weighted edge is `u ‖ v ‖ w` with the
//! weight in `3·id_bits(n)` bits, so `5·id_bits(n)` in total; an endpoint pair
//! alone is `2·id_bits(n)`. Since `u < v`, a real edge never encodes to all
//! zeros, and the all-zero word is used as the "no edge" filler.

use crate::bits::Bits;
use crate::graph::{EdgeKey, NodeId};
use crate::math::id_bits;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Codec {
    idb: usize,
}

impl Codec {
    pub fn new(n: usize) -> Self {
        Codec { idb: id_bits(n) }
    }

    pub fn id_bits(&self) -> usize {
        self.idb
    }

    /// Bits of one weighted edge.
    pub fn edge_bits(&self) -> usize {
        5 * self.idb
    }

    /// Bits of one endpoint pair.
    pub fn pair_bits(&self) -> usize {
        2 * self.idb
    }

    pub fn encode_uint(&self, x: u64) -> Bits {
        Bits::from_uint(x, self.idb)
    }

    pub fn decode_uint(&self, bits: &Bits) -> u64 {
        bits.read_uint(0, self.idb.min(bits.len()))
    }

    pub fn push_edge(&self, out: &mut Bits, e: &EdgeKey) {
        out.push_uint(e.u as u64, self.idb);
        out.push_uint(e.v as u64, self.idb);
        out.push_uint(e.w, 3 * self.idb);
    }

    pub fn encode_edge(&self, e: &EdgeKey) -> Bits {
        let mut out = Bits::with_capacity(self.edge_bits());
        self.push_edge(&mut out, e);
        out
    }

    /// Reads the edge at `offset`; `None` for the filler word.
    pub fn read_edge(&self, bits: &Bits, offset: usize) -> Option<EdgeKey> {
        let u = bits.read_uint(offset, self.idb) as NodeId;
        let v = bits.read_uint(offset + self.idb, self.idb) as NodeId;
        let w = bits.read_uint(offset + 2 * self.idb, 3 * self.idb);
        (u < v).then_some(EdgeKey { w, u, v })
    }

    pub fn decode_edge(&self, bits: &Bits) -> Option<EdgeKey> {
        if bits.len() < self.edge_bits() {
            return None;
        }
        self.read_edge(bits, 0)
    }

    /// Concatenated edges, padded with fillers to `slots` entries.
    pub fn encode_edges(&self, edges: &[EdgeKey], slots: usize) -> Bits {
        assert!(edges.len() <= slots, "{} edges do not fit {slots} slots", edges.len());
        let mut out = Bits::with_capacity(slots * self.edge_bits());
        for e in edges {
            self.push_edge(&mut out, e);
        }
        out.extend(&Bits::zeros((slots - edges.len()) * self.edge_bits()));
        out
    }

    /// Every non-filler edge in a concatenation.
    pub fn decode_edges(&self, bits: &Bits) -> Vec<EdgeKey> {
        let w = self.edge_bits();
        (0..bits.len() / w).filter_map(|i| self.read_edge(bits, i * w)).collect()
    }

    pub fn push_pair(&self, out: &mut Bits, u: NodeId, v: NodeId) {
        let (a, b) = if u < v { (u, v) } else { (v, u) };
        out.push_uint(a as u64, self.idb);
        out.push_uint(b as u64, self.idb);
    }

    pub fn encode_pairs(&self, pairs: &[(NodeId, NodeId)]) -> Bits {
        let mut out = Bits::with_capacity(pairs.len() * self.pair_bits());
        for &(u, v) in pairs {
            self.push_pair(&mut out, u, v);
        }
        out
    }

    /// Every non-filler pair, as `(min, max)`.
    pub fn decode_pairs(&self, bits: &Bits) -> Vec<(NodeId, NodeId)> {
        let w = self.pair_bits();
        (0..bits.len() / w)
            .filter_map(|i| {
                let u = bits.read_uint(i * w, self.idb) as NodeId;
                let v = bits.read_uint(i * w + self.idb, self.idb) as NodeId;
                (u < v).then_some((u, v))
            })
            .collect()
    }
}
