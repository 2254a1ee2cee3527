//! One entry point for every algorithm, checked against the sequential oracles.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::Serialize;

use crate::bcc::{boruvka_msf_broadcast, broadcast_cc, default_threshold};
use crate::detmsf::{msf_capacity_optimal, msf_rcast2};
use crate::engine::{EngineError, RunMetrics, RunOptions};
use crate::graph::{oracle_components, oracle_msf, EdgeKey, Graph, Partition};
use crate::randcc::{cc_capacity_optimal, cc_logstar};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    BoruvkaMsf,
    BroadcastCc,
    MsfRcast2,
    MsfCapopt,
    CcLogstar,
    CcCapopt,
}

impl Algorithm {
    pub const ALL: [Algorithm; 6] = [
        Algorithm::BoruvkaMsf,
        Algorithm::BroadcastCc,
        Algorithm::MsfRcast2,
        Algorithm::MsfCapopt,
        Algorithm::CcLogstar,
        Algorithm::CcCapopt,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::BoruvkaMsf => "boruvka-msf",
            Algorithm::BroadcastCc => "broadcast-cc",
            Algorithm::MsfRcast2 => "msf-rcast2",
            Algorithm::MsfCapopt => "msf-capopt",
            Algorithm::CcLogstar => "cc-logstar",
            Algorithm::CcCapopt => "cc-capopt",
        }
    }

    /// Range the algorithm is built for.
    pub fn range(self) -> usize {
        match self {
            Algorithm::BoruvkaMsf | Algorithm::BroadcastCc => 1,
            _ => 2,
        }
    }

    pub fn computes_msf(self) -> bool {
        matches!(self, Algorithm::BoruvkaMsf | Algorithm::MsfRcast2 | Algorithm::MsfCapopt)
    }

    pub fn is_randomized(self) -> bool {
        matches!(self, Algorithm::CcLogstar | Algorithm::CcCapopt)
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Algorithm::ALL.into_iter().find(|a| a.name() == s).ok_or_else(|| {
            let names: Vec<&str> = Algorithm::ALL.iter().map(|a| a.name()).collect();
            format!("unknown algorithm `{s}`, expected one of {}", names.join(", "))
        })
    }
}

/// Knobs of `broadcast-cc`; the other algorithms ignore them.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct AlgoParams {
    /// Degree threshold; `⌈log₂ n / log₂ log₂ n⌉` when unset.
    pub s: Option<usize>,
    /// Bandwidth multiplier; 1 when unset.
    pub d: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum AlgoOutput {
    Forest(Vec<EdgeKey>),
    Components(Partition),
}

/// One line of a report.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RunRecord {
    pub algorithm: Algorithm,
    pub n: usize,
    pub m: usize,
    pub seed: u64,
    pub rounds: usize,
    pub total_capacity: usize,
    pub max_beta: usize,
    pub max_range: usize,
    pub per_node_bits_max: u64,
    pub phases: usize,
    pub correct: bool,
    /// What differs from the oracle, if anything.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mismatch: Option<String>,
}

#[derive(Debug)]
pub struct AlgoRun {
    pub record: RunRecord,
    pub output: AlgoOutput,
    pub metrics: RunMetrics,
    /// The algorithm's own phase records.
    pub phase_log: serde_json::Value,
}

/// Runs `algo` on `g` and compares the result with the oracle.
pub fn run_algorithm(
    algo: Algorithm,
    g: &Arc<Graph>,
    seed: u64,
    params: AlgoParams,
    opts: &RunOptions,
) -> Result<AlgoRun, EngineError> {
    let n = g.n();
    let log = |v: Result<serde_json::Value, serde_json::Error>| v.unwrap_or(serde_json::Value::Null);
    let (output, metrics, phases, phase_log) = match algo {
        Algorithm::BoruvkaMsf => {
            let r = boruvka_msf_broadcast(g, opts)?;
            let count = r.phases;
            (AlgoOutput::Forest(r.edges), r.metrics, count, serde_json::Value::Array(Vec::new()))
        }
        Algorithm::BroadcastCc => {
            let s = params.s.unwrap_or_else(|| default_threshold(n));
            let r = broadcast_cc(g, s, params.d.unwrap_or(1), opts)?;
            let log = log(serde_json::to_value(&r.outcome.phases));
            (AlgoOutput::Components(r.outcome.partition.clone()), r.metrics, r.outcome.phases.len(), log)
        }
        Algorithm::MsfRcast2 | Algorithm::MsfCapopt => {
            let r = if algo == Algorithm::MsfRcast2 { msf_rcast2(g, opts)? } else { msf_capacity_optimal(g, opts)? };
            let log = log(serde_json::to_value(r.phases()));
            let count = r.phases().len();
            (AlgoOutput::Forest(r.edges().to_vec()), r.metrics, count, log)
        }
        Algorithm::CcLogstar | Algorithm::CcCapopt => {
            let r = if algo == Algorithm::CcLogstar {
                cc_logstar(g, seed, opts)?
            } else {
                cc_capacity_optimal(g, seed, opts)?
            };
            let log = log(serde_json::to_value(r.phases()));
            let count = r.phases().len();
            (AlgoOutput::Components(r.partition().clone()), r.metrics, count, log)
        }
    };
    let mismatch = compare(g, &output);
    let s = metrics.summary();
    let record = RunRecord {
        algorithm: algo,
        n,
        m: g.m(),
        seed,
        rounds: s.rounds,
        total_capacity: s.total_capacity,
        max_beta: s.max_beta,
        max_range: s.max_range,
        per_node_bits_max: s.per_node_bits_max,
        phases,
        correct: mismatch.is_none(),
        mismatch,
    };
    Ok(AlgoRun { record, output, metrics, phase_log })
}

/// `None` if `output` is what the oracle computes, else a short diff.
pub fn compare(g: &Graph, output: &AlgoOutput) -> Option<String> {
    match output {
        AlgoOutput::Forest(edges) => {
            let mut got = edges.clone();
            got.sort_unstable();
            got.dedup();
            let want = oracle_msf(g);
            if got == want {
                return None;
            }
            let missing = want.iter().filter(|e| got.binary_search(e).is_err()).count();
            let extra = got.iter().filter(|e| want.binary_search(e).is_err()).count();
            Some(format!("{missing} forest edges missing, {extra} extra"))
        }
        AlgoOutput::Components(p) => {
            let want = oracle_components(g);
            if p.same_components(&want) {
                return None;
            }
            Some(format!("{} components found, {} expected", p.count(), want.count()))
        }
    }
}
