//! Summary of one solver run, as written by the command-line tool.

use serde::{Deserialize, Serialize};

use crate::allocation::EfxVerdict;
use crate::audit::{AuditReport, FamilyStatus, InvariantFamily};
use crate::io::{AllocationDocument, Labels};
use crate::solvers::{Method, Solution};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComponentSummary {
    pub agents: Vec<String>,
    pub method: Method,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub colors: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessDoc {
    pub envier: String,
    pub envied: String,
    pub good: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerdictDoc {
    pub ok: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<WitnessDoc>,
}

impl VerdictDoc {
    pub fn new(v: &EfxVerdict, labels: &Labels) -> Self {
        VerdictDoc {
            ok: v.ok(),
            witness: v.witness.map(|w| WitnessDoc {
                envier: labels.agent(w.envier).to_string(),
                envied: labels.agent(w.envied).to_string(),
                good: labels.edge(w.good).to_string(),
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditLine {
    pub family: InvariantFamily,
    pub status: FamilyStatus,
    pub checked: usize,
    pub violations: usize,
}

pub fn audit_summary(report: &AuditReport) -> Vec<AuditLine> {
    report
        .families
        .iter()
        .map(|f| AuditLine {
            family: f.family,
            status: f.status(),
            checked: f.checked,
            violations: f.violations.len(),
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunReport {
    pub method_used: Method,
    pub components: Vec<ComponentSummary>,
    pub allocation: AllocationDocument,
    pub verdict: VerdictDoc,
    /// Solve time in microseconds.
    pub wall_time_us: u64,
    pub audit: Vec<AuditLine>,
}

impl RunReport {
    pub fn new(
        solution: &Solution,
        verdict: &EfxVerdict,
        audit: &AuditReport,
        labels: &Labels,
        wall_time_us: u64,
    ) -> Self {
        RunReport {
            method_used: solution.method,
            components: solution
                .components
                .iter()
                .map(|c| ComponentSummary {
                    agents: c
                        .agents
                        .iter()
                        .map(|&u| labels.agent(u).to_string())
                        .collect(),
                    method: c.method,
                    colors: c.colors,
                })
                .collect(),
            allocation: AllocationDocument::from_allocation(&solution.allocation, labels),
            verdict: VerdictDoc::new(verdict, labels),
            wall_time_us,
            audit: audit_summary(audit),
        }
    }
}
