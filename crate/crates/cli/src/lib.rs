//! Report model and rendering for the `dnloop` command-line tool.
//!
//! The same [`Report`] value backs both the text table and the JSON
//! encoding, so the two always carry the same facts.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use dnloop_core::analyzer::{ProgramReport, Status};

pub const REPORT_VERSION: u32 = 1;

/// Exit code for a completed run, whatever it found.
pub const EXIT_OK: u8 = 0;
/// Exit code for unreadable, malformed or inconsistent input.
pub const EXIT_INPUT: u8 = 2;
/// Exit code when a quantifier elimination hit its size ceiling.
pub const EXIT_RESOURCE: u8 = 3;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Report {
    pub version: u32,
    pub clauses: Vec<ClauseRecord>,
    pub propagated: Vec<PropagatedRecord>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClauseRecord {
    pub source: String,
    pub results: Vec<ResultRecord>,
    pub classes: Vec<Vec<usize>>,
    pub status: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub tau: Vec<usize>,
    pub delta: String,
    pub witness: String,
    pub verified_steps: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PropagatedRecord {
    /// 1-based clause number.
    pub clause: usize,
    pub head_query: String,
    pub via: String,
}

impl Report {
    pub fn from_analysis(report: &ProgramReport) -> Self {
        let clauses = report
            .clauses
            .iter()
            .map(|cr| ClauseRecord {
                source: cr.clause.to_string(),
                results: cr
                    .passing
                    .iter()
                    .map(|f| ResultRecord {
                        tau: f.positions.iter().copied().collect(),
                        delta: f.delta.to_string(),
                        witness: f.witness.to_string(),
                        verified_steps: f.verified_steps,
                    })
                    .collect(),
                classes: cr.classes.iter().map(|c| c.iter().copied().collect()).collect(),
                status: cr.status.label().to_string(),
            })
            .collect();
        let propagated = report
            .propagated
            .iter()
            .map(|p| PropagatedRecord {
                clause: p.clause_index + 1,
                head_query: p.head_query.to_string(),
                via: p.via.to_string(),
            })
            .collect();
        Report {
            version: REPORT_VERSION,
            clauses,
            propagated,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report is plain data")
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }

    pub fn looping_count(&self) -> usize {
        let looping = Status::Looping.label();
        self.clauses.iter().filter(|c| c.status == looping).count()
    }

    /// One row per passing filter, one row for a clause without any; then
    /// the propagated loops.
    pub fn to_text(&self) -> String {
        const HEADER: [&str; 8] = ["#", "clause", "tau", "delta", "looping query", "verified", "classes", "status"];
        let mut rows: Vec<[String; 8]> = Vec::new();
        for (i, c) in self.clauses.iter().enumerate() {
            let classes = c.classes.iter().map(|s| render_set(s)).collect::<Vec<_>>().join(" ");
            if c.results.is_empty() {
                rows.push([
                    (i + 1).to_string(),
                    c.source.clone(),
                    String::new(),
                    String::new(),
                    String::new(),
                    String::new(),
                    classes,
                    c.status.clone(),
                ]);
                continue;
            }
            for (k, r) in c.results.iter().enumerate() {
                let first = k == 0;
                rows.push([
                    if first { (i + 1).to_string() } else { String::new() },
                    if first { c.source.clone() } else { String::new() },
                    render_set(&r.tau),
                    r.delta.clone(),
                    r.witness.clone(),
                    r.verified_steps.to_string(),
                    if first { classes.clone() } else { String::new() },
                    if first { c.status.clone() } else { String::new() },
                ]);
            }
        }
        let mut widths = HEADER.map(|h| h.chars().count());
        for row in &rows {
            for (w, cell) in widths.iter_mut().zip(row) {
                *w = (*w).max(cell.chars().count());
            }
        }
        let mut out = String::new();
        push_row(&mut out, &HEADER.map(String::from), &widths);
        for row in &rows {
            push_row(&mut out, row, &widths);
        }
        if !self.propagated.is_empty() {
            out.push_str("\npropagated:\n");
            for p in &self.propagated {
                let _ = writeln!(out, "  clause {}: {} loops via {}", p.clause, p.head_query, p.via);
            }
        }
        out
    }
}

fn push_row(out: &mut String, row: &[String; 8], widths: &[usize; 8]) {
    let mut line = String::new();
    for (k, (cell, w)) in row.iter().zip(widths).enumerate() {
        if k > 0 {
            line.push_str("  ");
        }
        let pad = w - cell.chars().count();
        line.push_str(cell);
        line.extend(std::iter::repeat(' ').take(pad));
    }
    out.push_str(line.trim_end());
    out.push('\n');
}

/// `{1,2}`, or `{}` for the empty set.
pub fn render_set(items: &[usize]) -> String {
    let inner: Vec<String> = items.iter().map(usize::to_string).collect();
    format!("{{{}}}", inner.join(","))
}
