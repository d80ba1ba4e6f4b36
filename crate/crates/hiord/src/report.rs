//! Run reports written by `hiord solve`.

use std::collections::BTreeMap;

use hiord_core::outer::{OuterConfig, OuterTrace, TerminationCertificate};
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Counters {
    pub phase1_f: usize,
    pub phase1_df: usize,
    pub phase2_f: usize,
    pub phase2_df: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveSettings {
    pub eps_p: f64,
    pub eps_d: f64,
    pub delta: f64,
    pub q: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema: u32,
    pub problem: String,
    pub settings: SolveSettings,
    pub termination: String,
    pub x: Vec<f64>,
    pub t: Option<f64>,
    pub y: Option<Vec<f64>>,
    pub delta: f64,
    /// Measure values keyed by order.
    pub phi: BTreeMap<String, f64>,
    pub objective: f64,
    pub constraint_norm: f64,
    pub counters: Counters,
    /// Derivative evaluations spent re-checking the certificate; not part
    /// of `counters`.
    pub verification_df: usize,
    pub t_history: Vec<f64>,
    pub partition: Vec<String>,
    pub invariant_checks: BTreeMap<String, usize>,
}

impl RunReport {
    pub fn new(problem: &str, cfg: &OuterConfig, cert: &TerminationCertificate, trace: &OuterTrace) -> Self {
        let c = &trace.counters;
        RunReport {
            schema: SCHEMA_VERSION,
            problem: problem.to_string(),
            settings: SolveSettings {
                eps_p: cfg.eps_p,
                eps_d: cfg.eps_d,
                delta: cfg.delta,
                q: cfg.q,
                seed: cfg.phase2.phi.seed,
            },
            termination: cert.kind.as_str().to_string(),
            x: cert.x.clone(),
            t: cert.t,
            y: cert.y.clone(),
            delta: cert.delta,
            phi: cert
                .phi
                .iter()
                .enumerate()
                .map(|(j, v)| ((j + 1).to_string(), *v))
                .collect(),
            objective: cert.objective,
            constraint_norm: cert.constraint_norm,
            counters: Counters {
                phase1_f: c.phase1_f,
                phase1_df: c.phase1_df,
                phase2_f: c.phase2_f,
                phase2_df: c.phase2_df,
            },
            verification_df: c.verification_df,
            t_history: trace.t_history.clone(),
            partition: trace.partition().iter().map(|p| p.symbol().to_string()).collect(),
            invariant_checks: trace
                .invariant_checks
                .iter()
                .map(|(k, v)| (k.to_string(), *v))
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports always serialize")
    }
}
