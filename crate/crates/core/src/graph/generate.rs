use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{weight_bound, EdgeKey, Graph, GraphError, NodeId, DEFAULT_WEIGHT_EXPONENT};

/// Graph family with its size parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum GraphFamily {
    /// Erdős–Rényi `G(n, p)`.
    Gnp {
        n: usize,
        p: f64,
    },
    Path {
        n: usize,
    },
    /// Node 0 is the center.
    Star {
        n: usize,
    },
    /// `rows x cols` grid, node `r * cols + c`.
    Grid {
        rows: usize,
        cols: usize,
    },
    /// `k` disjoint blocks of `size` consecutive ids, each an independent `G(size, p)`.
    Components {
        k: usize,
        size: usize,
        p: f64,
    },
}

/// A generator descriptor such as `gnp(1024,8/n)` or `path(4):unweighted`.
///
/// In `gnp` and `components` the probability may be written as `c/n`, meaning
/// `c` divided by the node count (block size for `components`).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub family: GraphFamily,
    pub weighted: bool,
}

impl GeneratorSpec {
    pub fn new(family: GraphFamily) -> Self {
        GeneratorSpec { family, weighted: true }
    }

    pub fn unweighted(family: GraphFamily) -> Self {
        GeneratorSpec { family, weighted: false }
    }

    pub fn n(&self) -> usize {
        match self.family {
            GraphFamily::Gnp { n, .. } | GraphFamily::Path { n } | GraphFamily::Star { n } => n,
            GraphFamily::Grid { rows, cols } => rows * cols,
            GraphFamily::Components { k, size, .. } => k * size,
        }
    }

    fn validate(&self) -> Result<(), GraphError> {
        let bad = |m: &str| Err(GraphError::Generator(m.to_string()));
        if self.n() == 0 {
            return bad("node count must be positive");
        }
        match self.family {
            GraphFamily::Gnp { p, .. } | GraphFamily::Components { p, .. } if !(0.0..=1.0).contains(&p) => {
                bad(&format!("edge probability {p} is outside [0, 1]"))
            }
            _ => Ok(()),
        }
    }
}

impl fmt::Display for GeneratorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.family {
            GraphFamily::Gnp { n, p } => write!(f, "gnp({n},{p})")?,
            GraphFamily::Path { n } => write!(f, "path({n})")?,
            GraphFamily::Star { n } => write!(f, "star({n})")?,
            GraphFamily::Grid { rows, cols } => write!(f, "grid({rows},{cols})")?,
            GraphFamily::Components { k, size, p } => write!(f, "components({k},{size},{p})")?,
        }
        if !self.weighted {
            f.write_str(":unweighted")?;
        }
        Ok(())
    }
}

impl FromStr for GeneratorSpec {
    type Err = GraphError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = |m: String| GraphError::Generator(m);
        let s = s.trim();
        let (body, weighted) = match s.rsplit_once(':') {
            Some((b, "unweighted")) | Some((b, "u")) => (b, false),
            Some((_, other)) => return Err(err(format!("unknown suffix {other:?}"))),
            None => (s, true),
        };
        let open = body.find('(').ok_or_else(|| err(format!("expected name(args) in {s:?}")))?;
        if !body.ends_with(')') {
            return Err(err(format!("missing ')' in {s:?}")));
        }
        let name = body[..open].trim();
        let args: Vec<&str> = body[open + 1..body.len() - 1].split(',').map(str::trim).collect();
        let int = |i: usize| -> Result<usize, GraphError> {
            args.get(i)
                .ok_or_else(|| err(format!("{name}: missing argument {}", i + 1)))?
                .parse::<usize>()
                .map_err(|_| err(format!("{name}: argument {} must be an integer", i + 1)))
        };
        let prob = |i: usize, scale: usize| -> Result<f64, GraphError> {
            let tok = args.get(i).ok_or_else(|| err(format!("{name}: missing probability")))?;
            let parsed = match tok.strip_suffix("/n") {
                Some(c) => c.trim().parse::<f64>().map(|c| if scale == 0 { 0.0 } else { c / scale as f64 }),
                None => tok.parse::<f64>(),
            };
            parsed.map_err(|_| err(format!("{name}: invalid probability {tok:?}")))
        };
        let expect = |k: usize| {
            if args.len() == k {
                Ok(())
            } else {
                Err(err(format!("{name} takes {k} argument(s), got {}", args.len())))
            }
        };
        let family = match name {
            "gnp" => {
                expect(2)?;
                let n = int(0)?;
                GraphFamily::Gnp { n, p: prob(1, n)? }
            }
            "path" => {
                expect(1)?;
                GraphFamily::Path { n: int(0)? }
            }
            "star" => {
                expect(1)?;
                GraphFamily::Star { n: int(0)? }
            }
            "grid" => {
                expect(2)?;
                GraphFamily::Grid { rows: int(0)?, cols: int(1)? }
            }
            "components" => {
                expect(3)?;
                let size = int(1)?;
                GraphFamily::Components { k: int(0)?, size, p: prob(2, size)? }
            }
            other => return Err(err(format!("unknown generator {other:?}"))),
        };
        let spec = GeneratorSpec { family, weighted };
        spec.validate()?;
        Ok(spec)
    }
}

/// Samples `G(n, p)` pairs by geometric skipping, calling `emit(v, w)` with `w < v`.
fn gnp_pairs<R: Rng>(rng: &mut R, n: usize, p: f64, offset: NodeId, mut emit: impl FnMut(&mut R, NodeId, NodeId)) {
    if n < 2 || p <= 0.0 {
        return;
    }
    if p >= 1.0 {
        for v in 1..n {
            for w in 0..v {
                emit(rng, offset + v as NodeId, offset + w as NodeId);
            }
        }
        return;
    }
    let log_q = (1.0 - p).ln();
    let (mut v, mut w) = (1usize, -1i64);
    while v < n {
        let r: f64 = rng.gen();
        w += 1 + ((1.0 - r).ln() / log_q).floor() as i64;
        while w >= v as i64 && v < n {
            w -= v as i64;
            v += 1;
        }
        if v < n {
            emit(rng, offset + v as NodeId, offset + w as NodeId);
        }
    }
}

/// Generates a graph; deterministic in `(spec, seed)`.
///
/// Weighted graphs draw each weight uniformly from `[1, n^3 - 1]`, so every
/// weight stays strictly below the `n^3` bound; unweighted graphs use `w = 1`.
pub fn generate(spec: &GeneratorSpec, seed: u64) -> Result<Graph, GraphError> {
    spec.validate()?;
    let n = spec.n();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let max_w = weight_bound(n, DEFAULT_WEIGHT_EXPONENT).saturating_sub(1).max(1);
    let weighted = spec.weighted;
    let mut edges: Vec<EdgeKey> = Vec::new();
    let mut push = |rng: &mut ChaCha8Rng, a: NodeId, b: NodeId| {
        let w = if weighted { rng.gen_range(1..=max_w) } else { 1 };
        edges.push(EdgeKey::new(a, b, w));
    };
    match spec.family {
        GraphFamily::Gnp { n, p } => gnp_pairs(&mut rng, n, p, 0, &mut push),
        GraphFamily::Path { n } => {
            for v in 1..n as NodeId {
                push(&mut rng, v - 1, v);
            }
        }
        GraphFamily::Star { n } => {
            for v in 1..n as NodeId {
                push(&mut rng, 0, v);
            }
        }
        GraphFamily::Grid { rows, cols } => {
            for r in 0..rows {
                for c in 0..cols {
                    let id = (r * cols + c) as NodeId;
                    if c + 1 < cols {
                        push(&mut rng, id, id + 1);
                    }
                    if r + 1 < rows {
                        push(&mut rng, id, id + cols as NodeId);
                    }
                }
            }
        }
        GraphFamily::Components { k, size, p } => {
            for block in 0..k {
                gnp_pairs(&mut rng, size, p, (block * size) as NodeId, &mut push);
            }
        }
    }
    edges.sort_by_key(|e| (e.u, e.v));
    Ok(Graph::from_sorted_unchecked(n, edges))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(s: &str) -> GeneratorSpec {
        s.parse().unwrap()
    }

    #[test]
    fn path_edges() {
        let g = generate(&spec("path(4):unweighted"), 0).unwrap();
        let pairs: Vec<_> = g.edges().iter().map(|e| (e.u, e.v, e.w)).collect();
        assert_eq!(pairs, vec![(0, 1, 1), (1, 2, 1), (2, 3, 1)]);
    }

    #[test]
    fn gnp_zero_probability_has_no_edges() {
        assert_eq!(generate(&spec("gnp(100,0)"), 3).unwrap().m(), 0);
    }

    #[test]
    fn gnp_is_deterministic_per_seed() {
        let a = generate(&spec("gnp(64,0.5)"), 7).unwrap();
        let b = generate(&spec("gnp(64,0.5)"), 7).unwrap();
        let c = generate(&spec("gnp(64,0.5)"), 8).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn gnp_full_probability_is_complete() {
        assert_eq!(generate(&spec("gnp(10,1)"), 1).unwrap().m(), 45);
    }

    #[test]
    fn gnp_edge_count_near_expectation() {
        let g = generate(&spec("gnp(2000,0.01)"), 11).unwrap();
        let expected = 0.01 * 2000.0 * 1999.0 / 2.0;
        assert!((g.m() as f64 - expected).abs() < 5.0 * expected.sqrt(), "m = {}", g.m());
    }

    #[test]
    fn weights_stay_below_bound() {
        let g = generate(&spec("gnp(8,1)"), 5).unwrap();
        assert!(g.edges().iter().all(|e| e.w >= 1 && e.w < 512));
    }

    #[test]
    fn grid_and_star_shapes() {
        assert_eq!(generate(&spec("grid(3,4)"), 0).unwrap().m(), 3 * 3 + 2 * 4);
        let s = generate(&spec("star(16)"), 0).unwrap();
        assert_eq!(s.degree(0), 15);
    }

    #[test]
    fn relative_probability_syntax() {
        match spec("gnp(1000,8/n)").family {
            GraphFamily::Gnp { p, .. } => assert!((p - 0.008).abs() < 1e-12),
            _ => unreachable!(),
        }
    }

    #[test]
    fn rejects_bad_descriptors() {
        assert!("gnp(10,1.5)".parse::<GeneratorSpec>().is_err());
        assert!("gnp(0,0.5)".parse::<GeneratorSpec>().is_err());
        assert!("path(0)".parse::<GeneratorSpec>().is_err());
        assert!("ring(5)".parse::<GeneratorSpec>().is_err());
        assert!("path(4):heavy".parse::<GeneratorSpec>().is_err());
    }

    #[test]
    fn display_round_trips() {
        for s in ["gnp(64,0.5)", "path(4):unweighted", "components(4,8,1)", "grid(2,3)"] {
            assert_eq!(spec(s), spec(&spec(s).to_string()));
        }
    }
}
