//! Run reports: what a solver did, what it decided, and whether the
//! decision is trustworthy. Reports serialize to JSON; rationals appear in
//! "p/q" text form like everywhere else.

use crate::rat::format_rat;
use crate::vecn::QVec;
use serde::{Deserialize, Serialize};

/// Process exit codes shared by the CLI and the test harness.
pub mod exit_codes {
    /// Success; any verdict produced was verified.
    pub const OK: i32 = 0;
    /// The solver's verdict disagrees with the ground-truth sidecar.
    pub const VERDICT_MISMATCH: i32 = 2;
    /// A query/iteration/time budget was exhausted before a decision.
    pub const RESOURCE_BUDGET: i32 = 3;
    /// The solver finished but could not confirm its answer through the
    /// oracle; the verdict is a best-effort guess.
    pub const NONCONFORMANT: i32 = 4;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportStatus {
    /// Confirmed through the oracle (feasible reply or exact certificate
    /// over oracle-confirmed facts).
    Verified,
    /// Best-effort answer after budget or precision exhaustion.
    Nonconformant,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportVerdict {
    Feasible,
    Infeasible,
}

/// One solver run against one oracle over one instance.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolveReport {
    pub solver: String,
    pub oracle: String,
    pub m: usize,
    pub n: usize,
    #[serde(rename = "L")]
    pub l: u64,
    pub seed: u64,
    pub status: ReportStatus,
    pub verdict: ReportVerdict,
    /// Witness in "p/q" form when the verdict is feasible.
    pub witness: Option<Vec<String>>,
    pub queries: usize,
    /// Furthest-solver detail; zero for the covering solver.
    pub ellipsoid_iterations: usize,
    /// Furthest-solver detail; zero for the covering solver.
    pub samevor_probes: usize,
    /// Where the query-by-query transcript was written, if anywhere.
    pub transcript_path: Option<String>,
}

impl SolveReport {
    pub fn witness_from(x: &[crate::rat::Rat]) -> Vec<String> {
        x.iter().map(format_rat).collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization is infallible")
    }
}

/// Row of the chamber experiment table.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChamberRow {
    pub m: usize,
    pub n: usize,
    pub count: String,
    pub bound: String,
    pub tight: bool,
}

/// Row of the lower-bound experiment table.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LowerBoundRow {
    pub n: usize,
    pub m: usize,
    pub k: usize,
    pub seed: u64,
    pub queries: usize,
}

/// Renders rows as delimiter-separated text with a header line.
pub fn tsv<T: Serialize>(rows: &[T]) -> String {
    let mut out = String::new();
    for (i, row) in rows.iter().enumerate() {
        let v = serde_json::to_value(row).expect("row serialization is infallible");
        let obj = v.as_object().expect("rows are flat structs");
        if i == 0 {
            out.push_str(&obj.keys().cloned().collect::<Vec<_>>().join("\t"));
            out.push('\n');
        }
        let cells: Vec<String> = obj
            .values()
            .map(|c| match c {
                serde_json::Value::String(s) => s.clone(),
                other => other.to_string(),
            })
            .collect();
        out.push_str(&cells.join("\t"));
        out.push('\n');
    }
    out
}

/// Convenience: formats a rational witness vector for logs.
pub fn witness_text(x: &QVec) -> String {
    x.iter().map(format_rat).collect::<Vec<_>>().join(" ")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::{int, rat};

    #[test]
    fn report_json_round_trip() {
        let r = SolveReport {
            solver: "covering".into(),
            oracle: "worst".into(),
            m: 3,
            n: 2,
            l: 12,
            seed: 7,
            status: ReportStatus::Verified,
            verdict: ReportVerdict::Feasible,
            witness: Some(SolveReport::witness_from(&[rat(1, 2), int(-3)])),
            queries: 19,
            ellipsoid_iterations: 0,
            samevor_probes: 0,
            transcript_path: None,
        };
        let back: SolveReport = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(back.witness, Some(vec!["1/2".to_string(), "-3".to_string()]));
        assert_eq!(back.status, ReportStatus::Verified);
        assert_eq!(back.queries, 19);
    }

    #[test]
    fn tsv_has_header_and_one_line_per_row() {
        let rows = vec![
            LowerBoundRow { n: 2, m: 6, k: 6, seed: 0, queries: 9 },
            LowerBoundRow { n: 2, m: 6, k: 6, seed: 1, queries: 11 },
        ];
        let text = tsv(&rows);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        let col = lines[0]
            .split('\t')
            .position(|h| h == "queries")
            .expect("queries column present");
        assert_eq!(lines[1].split('\t').nth(col), Some("9"));
        assert_eq!(lines[2].split('\t').nth(col), Some("11"));
    }
}
