//! XOR sketches of edge sets.
//!
//! Every possible edge `{u, v}` gets an ID `name ‖ check` of `4ℓ` bits, where
//! `ℓ = ⌈log₂ n⌉`: the name is `u ‖ v` with `u < v`, the check is a keyed hash
//! of the name cut to `2ℓ` bits. Row `j` of a sketch of a node set `A` is the
//! xor of the IDs of the boundary edges of `A` that were sampled into row `j`,
//! each with probability `2^{-j}`.
//!
//! Sketches of disjoint sets xor to the sketch of their union, since an edge
//! between the two parts appears twice. A row holding exactly one edge passes
//! the check and names that edge; a row holding several passes it with
//! probability about `2^{-2ℓ}`.
//!
//! ```
//! use clique_sim::sketch::{Sketch, SketchParams};
//!
//! let p = SketchParams::new(64, 16, 7);
//! // boundary of {3}: the single edge {3, 9}
//! let a = Sketch::build(p, 0, [(3, 9)]).unwrap();
//! let b = Sketch::build(p, 0, [(9, 3)]).unwrap();
//! assert!(a.xor(&b).unwrap().is_zero());
//! if !a.is_zero() {
//!     assert_eq!(a.decode(), Some((3, 9)));
//! }
//! ```

use thiserror::Error;

use crate::bits::Bits;
use crate::graph::{Graph, NodeId};
use crate::math::{ceil_log2, id_bits, mix64, mix_all};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum SketchError {
    #[error("edge ({0}, {0}) is a self-loop")]
    SelfLoop(NodeId),
    #[error("node {node} is out of range for n = {n}")]
    NodeOutOfRange { node: NodeId, n: usize },
    #[error("sketch shapes differ")]
    ShapeMismatch,
    #[error("expected {expected} bits, got {got}")]
    Length { expected: usize, got: usize },
}

/// Everything two sketches must share to be combined: `n` (ID width), the
/// scale `x` and the seed that fixes IDs and row membership.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SketchParams {
    n: usize,
    x: u64,
    seed: u64,
}

const CHECK_SALT: u64 = 0x6368_6563_6b00;
const ROW_SALT: u64 = 0x726f_7773_0000;

impl SketchParams {
    /// `x` below 4 is raised to 4.
    pub fn new(n: usize, x: u64, seed: u64) -> Self {
        SketchParams { n: n.max(1), x: x.max(4), seed }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn x(&self) -> u64 {
        self.x
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// `⌈log₂ x⌉`: the number of sketches in a multi-sketch.
    pub fn log_x(&self) -> usize {
        ceil_log2(self.x) as usize
    }

    /// Rows per sketch, `10⌈log₂ x⌉`.
    pub fn rows(&self) -> usize {
        10 * self.log_x()
    }

    /// Rows per multi-sketch, `10⌈log₂ x⌉²`.
    pub fn multi_rows(&self) -> usize {
        self.rows() * self.log_x()
    }

    fn half(&self) -> usize {
        2 * id_bits(self.n)
    }

    /// Bits in one ID and hence in one row: `4⌈log₂ n⌉`.
    pub fn row_bits(&self) -> usize {
        2 * self.half()
    }

    fn check_of(&self, name: u64) -> u64 {
        let h = mix_all(&[self.seed, CHECK_SALT, name]);
        h & low_mask(self.half())
    }

    pub fn edge_id(&self, u: NodeId, v: NodeId) -> Result<EdgeIdCode, SketchError> {
        if u == v {
            return Err(SketchError::SelfLoop(u));
        }
        for node in [u, v] {
            if node as usize >= self.n {
                return Err(SketchError::NodeOutOfRange { node, n: self.n });
            }
        }
        let (u, v) = if u < v { (u, v) } else { (v, u) };
        let name = ((u as u64) << id_bits(self.n)) | v as u64;
        Ok(EdgeIdCode { name, check: self.check_of(name), half: self.half() as u32 })
    }

    /// Reads a row value as an ID; `None` unless the check matches a valid
    /// name. The all-zero row never parses.
    pub fn parse(&self, value: u128) -> Option<(NodeId, NodeId)> {
        if value == 0 {
            return None;
        }
        let half = self.half();
        let name = (value >> half) as u64;
        let check = (value as u64) & low_mask(half);
        let idb = id_bits(self.n);
        let (u, v) = (name >> idb, name & low_mask(idb));
        if u >= v || v as usize >= self.n || check != self.check_of(name) {
            return None;
        }
        Some((u as NodeId, v as NodeId))
    }

    /// Whether `{u, v}` belongs to row `j` (1-based) of sketch `t` (0-based):
    /// the first `j` bits of a keyed hash are all zero, so probability `2^{-j}`.
    pub fn row_membership(&self, u: NodeId, v: NodeId, t: usize, j: usize) -> bool {
        let (u, v) = if u < v { (u, v) } else { (v, u) };
        let mut left = j;
        let mut word = 0u64;
        loop {
            let h = mix_all(&[self.seed, ROW_SALT, u as u64, v as u64, t as u64, j as u64, word]);
            if left <= 64 {
                return left == 0 || h >> (64 - left) == 0;
            }
            if h != 0 {
                return false;
            }
            left -= 64;
            word += 1;
        }
    }
}

fn low_mask(bits: usize) -> u64 {
    if bits >= 64 {
        u64::MAX
    } else {
        (1u64 << bits) - 1
    }
}

/// The ID of one edge.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct EdgeIdCode {
    /// `u ‖ v` with `u < v`.
    pub name: u64,
    pub check: u64,
    half: u32,
}

impl EdgeIdCode {
    pub fn value(&self) -> u128 {
        ((self.name as u128) << self.half) | self.check as u128
    }

    pub fn endpoints(&self) -> (NodeId, NodeId) {
        let idb = self.half / 2;
        ((self.name >> idb) as NodeId, (self.name & low_mask(idb as usize)) as NodeId)
    }
}

/// `10⌈log₂ x⌉` rows, row `j` the xor of sampled IDs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Sketch {
    params: SketchParams,
    t: usize,
    rows: Vec<u128>,
}

impl Sketch {
    /// Sketch `t` of the empty edge set.
    pub fn zero(params: SketchParams, t: usize) -> Self {
        Sketch { params, t, rows: vec![0; params.rows()] }
    }

    /// Sketch `t` of a set whose boundary edges are `edges`.
    pub fn build<I>(params: SketchParams, t: usize, edges: I) -> Result<Self, SketchError>
    where
        I: IntoIterator<Item = (NodeId, NodeId)>,
    {
        let mut s = Sketch::zero(params, t);
        for (u, v) in edges {
            s.toggle(u, v)?;
        }
        Ok(s)
    }

    /// Sketch of a single node: all its incident edges.
    pub fn of_node(params: SketchParams, t: usize, g: &Graph, v: NodeId) -> Self {
        Sketch::build(params, t, g.neighbors(v).iter().map(|&(u, _)| (v, u))).expect("graph edges are valid")
    }

    /// Sketch of a node set built directly from its boundary.
    pub fn of_set(params: SketchParams, t: usize, g: &Graph, set: &[NodeId]) -> Self {
        let mut inside = vec![false; g.n()];
        for &v in set {
            inside[v as usize] = true;
        }
        let boundary = set
            .iter()
            .flat_map(|&v| g.neighbors(v).iter().map(move |&(u, _)| (v, u)))
            .filter(|&(_, u)| !inside[u as usize]);
        Sketch::build(params, t, boundary).expect("graph edges are valid")
    }

    /// Adds or removes one edge.
    pub fn toggle(&mut self, u: NodeId, v: NodeId) -> Result<(), SketchError> {
        let id = self.params.edge_id(u, v)?.value();
        for j in 1..=self.rows.len() {
            if self.params.row_membership(u, v, self.t, j) {
                self.rows[j - 1] ^= id;
            }
        }
        Ok(())
    }

    pub fn params(&self) -> SketchParams {
        self.params
    }

    /// Index of this sketch inside a multi-sketch.
    pub fn index(&self) -> usize {
        self.t
    }

    pub fn rows(&self) -> &[u128] {
        &self.rows
    }

    pub fn is_zero(&self) -> bool {
        self.rows.iter().all(|&r| r == 0)
    }

    pub fn xor(&self, other: &Sketch) -> Result<Sketch, SketchError> {
        let mut out = self.clone();
        out.xor_assign(other)?;
        Ok(out)
    }

    pub fn xor_assign(&mut self, other: &Sketch) -> Result<(), SketchError> {
        if self.params != other.params || self.t != other.t || self.rows.len() != other.rows.len() {
            return Err(SketchError::ShapeMismatch);
        }
        for (a, b) in self.rows.iter_mut().zip(&other.rows) {
            *a ^= b;
        }
        Ok(())
    }

    /// The first row, scanning `j = 1, 2, …`, that parses as an ID.
    pub fn decode(&self) -> Option<(NodeId, NodeId)> {
        self.rows.iter().find_map(|&r| self.params.parse(r))
    }
}

/// `⌈log₂ x⌉` independent sketches, one per Boruvka step.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultiSketch {
    params: SketchParams,
    sketches: Vec<Sketch>,
}

impl MultiSketch {
    pub fn zero(params: SketchParams) -> Self {
        MultiSketch { params, sketches: (0..params.log_x()).map(|t| Sketch::zero(params, t)).collect() }
    }

    pub fn build<I>(params: SketchParams, edges: I) -> Result<Self, SketchError>
    where
        I: IntoIterator<Item = (NodeId, NodeId)>,
    {
        let mut m = MultiSketch::zero(params);
        for (u, v) in edges {
            for s in &mut m.sketches {
                s.toggle(u, v)?;
            }
        }
        Ok(m)
    }

    /// Reassembles a multi-sketch from its `10⌈log₂ x⌉²` rows; row `r`
    /// (0-based) is row `r mod 10⌈log₂ x⌉ + 1` of sketch `⌊r / 10⌈log₂ x⌉⌋`.
    pub fn from_rows(params: SketchParams, rows: &[u128]) -> Result<Self, SketchError> {
        if rows.len() != params.multi_rows() {
            return Err(SketchError::ShapeMismatch);
        }
        let sketches = rows
            .chunks(params.rows())
            .enumerate()
            .map(|(t, chunk)| Sketch { params, t, rows: chunk.to_vec() })
            .collect();
        Ok(MultiSketch { params, sketches })
    }

    /// Flat row `r` (0-based), with the layout of [`MultiSketch::from_rows`].
    pub fn row(&self, r: usize) -> u128 {
        let per = self.params.rows();
        self.sketches[r / per].rows[r % per]
    }

    pub fn params(&self) -> SketchParams {
        self.params
    }

    pub fn sketch(&self, t: usize) -> &Sketch {
        &self.sketches[t]
    }

    pub fn sketches(&self) -> &[Sketch] {
        &self.sketches
    }

    pub fn is_zero(&self) -> bool {
        self.sketches.iter().all(Sketch::is_zero)
    }

    pub fn xor(&self, other: &MultiSketch) -> Result<MultiSketch, SketchError> {
        let mut out = self.clone();
        out.xor_assign(other)?;
        Ok(out)
    }

    pub fn xor_assign(&mut self, other: &MultiSketch) -> Result<(), SketchError> {
        if self.params != other.params || self.sketches.len() != other.sketches.len() {
            return Err(SketchError::ShapeMismatch);
        }
        for (a, b) in self.sketches.iter_mut().zip(&other.sketches) {
            a.xor_assign(b)?;
        }
        Ok(())
    }

    /// Row-major concatenation of `4⌈log₂ n⌉`-bit rows.
    pub fn to_bits(&self) -> Bits {
        let w = self.params.row_bits();
        let mut out = Bits::with_capacity(w * self.params.multi_rows());
        for s in &self.sketches {
            for &r in &s.rows {
                out.push_u128(r, w);
            }
        }
        out
    }

    pub fn from_bits(params: SketchParams, bits: &Bits) -> Result<Self, SketchError> {
        let w = params.row_bits();
        let expected = w * params.multi_rows();
        if bits.len() != expected {
            return Err(SketchError::Length { expected, got: bits.len() });
        }
        let rows: Vec<u128> = (0..params.multi_rows()).map(|r| bits.read_u128(r * w, w)).collect();
        MultiSketch::from_rows(params, &rows)
    }
}

/// Reads one `4⌈log₂ n⌉`-bit row.
pub fn row_from_bits(params: SketchParams, bits: &Bits) -> u128 {
    bits.read_u128(0, params.row_bits().min(bits.len()))
}

/// Writes one row.
pub fn row_to_bits(params: SketchParams, row: u128) -> Bits {
    let mut b = Bits::with_capacity(params.row_bits());
    b.push_u128(row, params.row_bits());
    b
}

/// Seed for phase `phase` derived from a run seed, so sketches of different
/// phases are independent.
pub fn phase_seed(seed: u64, phase: usize) -> u64 {
    mix64(mix_all(&[seed, 0x706861_7365, phase as u64]))
}

#[cfg(test)]
mod tests;
