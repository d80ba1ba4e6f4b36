//! Text rendering of the worked examples and JSON views of condition
//! checks.

use std::fmt::Write;

use hiord_core::conditions::{demo_penalty, demo_saddle, ConditionsReport, DemoReport};
use serde::Serialize;

use crate::error::Result;

/// Tolerance of the saddle reproduction.
pub const SADDLE_TOL: f64 = 1e-12;
/// Tolerance of the penalty reproduction.
pub const PENALTY_TOL: f64 = 1e-10;
pub const PENALTY_EPS: [f64; 4] = [0.01, 0.25, 0.5, 1.0];
pub const PENALTY_TAUS: [f64; 3] = [0.5, 1.0, 2.0];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderView {
    pub order: usize,
    pub value: f64,
    pub feasibility: Vec<f64>,
    pub feasibility_holds: bool,
    pub vanishes: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ArcView {
    pub alpha: f64,
    pub distance: f64,
    pub slack: f64,
    pub constraint_norm: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionsView {
    pub schema: u32,
    pub first_order_cone: bool,
    pub orders: Vec<OrderView>,
    pub arc: Vec<ArcView>,
    pub final_value: f64,
    pub verdict: bool,
}

impl From<&ConditionsReport> for ConditionsView {
    fn from(r: &ConditionsReport) -> Self {
        ConditionsView {
            schema: crate::report::SCHEMA_VERSION,
            first_order_cone: r.first_order_cone,
            orders: r
                .orders
                .iter()
                .map(|o| OrderView {
                    order: o.order,
                    value: o.value,
                    feasibility: o.feasibility.clone(),
                    feasibility_holds: o.feasibility_holds,
                    vanishes: o.vanishes,
                })
                .collect(),
            arc: r
                .arc
                .iter()
                .map(|a| ArcView {
                    alpha: a.alpha,
                    distance: a.distance,
                    slack: a.slack,
                    constraint_norm: a.constraint_norm,
                    holds: a.holds,
                })
                .collect(),
            final_value: r.final_value(),
            verdict: r.verdict,
        }
    }
}

fn render_items(out: &mut String, demo: &DemoReport) {
    writeln!(out, "== {}", demo.title).unwrap();
    for item in &demo.items {
        let status = if item.pass() { "ok" } else { "DEVIATES" };
        writeln!(
            out,
            "{}: {:.6}  (expected {}, deviation {:.3e}, {status})",
            item.label,
            item.computed,
            item.expected,
            item.deviation()
        )
        .unwrap();
    }
    for (label, report) in &demo.conditions {
        let verdict = if report.verdict { "holds" } else { "fails" };
        writeln!(
            out,
            "conditions [{label}]: final value {:.6}, {verdict}",
            report.final_value()
        )
        .unwrap();
    }
}

/// Text of a demo and whether every reproduced value matched.
#[derive(Debug, Clone, PartialEq)]
pub struct DemoOutput {
    pub text: String,
    pub pass: bool,
}

pub fn saddle3() -> Result<DemoOutput> {
    let demo = demo_saddle(SADDLE_TOL)?;
    let mut text = String::new();
    render_items(&mut text, &demo);
    let pass = demo.pass();
    writeln!(
        text,
        "result: {}",
        if pass {
            "all values reproduced"
        } else {
            "deviations found"
        }
    )
    .unwrap();
    Ok(DemoOutput { text, pass })
}

pub fn penalty4() -> Result<DemoOutput> {
    let mut text = String::new();
    let mut pass = true;
    for eps in PENALTY_EPS {
        let demo = demo_penalty(eps, &PENALTY_TAUS, PENALTY_TOL)?;
        render_items(&mut text, &demo);
        if let Some(item) = demo.items.iter().find(|i| i.label == "D4 Lambda(0, 1)[e1]^4") {
            writeln!(text, "Lambda^{{(4)}}[e1]^4 = {}", item.computed).unwrap();
        }
        let verdict = |prefix: &str| {
            let all = demo
                .conditions
                .iter()
                .filter(|(l, _)| l.starts_with(prefix))
                .all(|(_, r)| r.verdict);
            if all {
                "PASS"
            } else {
                "FAIL"
            }
        };
        writeln!(
            text,
            "verdict: mu fourth-order necessary {}, Lambda fourth-order {}",
            verdict("mu"),
            verdict("Lambda")
        )
        .unwrap();
        pass &= demo.pass();
    }
    writeln!(
        text,
        "result: {}",
        if pass {
            "all values reproduced"
        } else {
            "deviations found"
        }
    )
    .unwrap();
    Ok(DemoOutput { text, pass })
}
