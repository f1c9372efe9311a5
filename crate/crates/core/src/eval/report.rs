use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::Target;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metric {
    pub hr: f64,
    pub ndcg: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stratum {
    pub num_cases: usize,
    pub metrics: BTreeMap<usize, Metric>,
}

/// Metrics per group-size bin and per item-activity bin. Empty bins are omitted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Strata {
    pub group_size: BTreeMap<String, Stratum>,
    pub item_activity: BTreeMap<String, Stratum>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub target: Target,
    pub num_test_cases: usize,
    /// Cutoff `N` to HR@N and NDCG@N.
    pub metrics: BTreeMap<usize, Metric>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub strata: Option<Strata>,
}

impl EvalReport {
    pub fn to_json(&self) -> serde_json::Result<String> {
        serde_json::to_string_pretty(self)
    }

    /// Aligned text table: one row per (stratum), HR columns then NDCG columns.
    pub fn to_table(&self) -> String {
        let cutoffs: Vec<usize> = self.metrics.keys().copied().collect();
        let mut header = vec!["subset".to_string(), "cases".to_string()];
        header.extend(cutoffs.iter().map(|n| format!("HR@{n}")));
        header.extend(cutoffs.iter().map(|n| format!("NDCG@{n}")));
        let row = |name: &str, cases: usize, m: &BTreeMap<usize, Metric>| {
            let mut r = vec![name.to_string(), cases.to_string()];
            r.extend(cutoffs.iter().map(|n| m.get(n).map_or("-".into(), |x| format!("{:.4}", x.hr))));
            r.extend(cutoffs.iter().map(|n| m.get(n).map_or("-".into(), |x| format!("{:.4}", x.ndcg))));
            r
        };
        let target = match self.target {
            Target::Groups => "groups",
            Target::Users => "users",
        };
        let mut rows = vec![header, row(&format!("all {target}"), self.num_test_cases, &self.metrics)];
        if let Some(strata) = &self.strata {
            for (k, s) in strata.group_size.iter().chain(&strata.item_activity) {
                rows.push(row(k, s.num_cases, &s.metrics));
            }
        }
        let widths: Vec<usize> = (0..rows[0].len())
            .map(|c| rows.iter().map(|r| r[c].len()).max().unwrap_or(0))
            .collect();
        let mut out = String::new();
        for r in &rows {
            let cells: Vec<String> = r
                .iter()
                .enumerate()
                .map(|(c, cell)| {
                    if c == 0 {
                        format!("{cell:<w$}", w = widths[c])
                    } else {
                        format!("{cell:>w$}", w = widths[c])
                    }
                })
                .collect();
            let _ = writeln!(out, "{}", cells.join("  ").trim_end());
        }
        out
    }
}
