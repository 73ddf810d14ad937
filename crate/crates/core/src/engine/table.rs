//! Result rows, their CSV form, and end-of-run summaries.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::EngineError;

/// One sample of one `(alpha, replicate)` cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub topology: String,
    pub alpha: f64,
    pub replicate: u64,
    pub t: u64,
    pub pref_similarity: Option<f64>,
    pub pref_congruence: Option<f64>,
    pub assoc_similarity: Option<f64>,
    pub mean_mutual_info: Option<f64>,
    pub excluded_pairs: u64,
    /// Skipped rounds so far (empty out-neighborhood).
    pub skipped_steps: u64,
    #[serde(default)]
    pub cluster_count: Option<usize>,
}

const HEADER: [&str; 10] = [
    "topology",
    "alpha",
    "replicate",
    "t",
    "pref_similarity",
    "pref_congruence",
    "assoc_similarity",
    "mean_mutual_info",
    "excluded_pairs",
    "skipped_steps",
];

/// Nine significant digits, `%.9g` style; `None` prints as an empty field.
pub fn format_value(value: Option<f64>) -> String {
    let Some(x) = value else {
        return String::new();
    };
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.8e}");
    let (mantissa, exp) = sci.split_once('e').unwrap_or((&sci, "0"));
    let exp: i32 = exp.parse().unwrap_or(0);
    if (-5..9).contains(&exp) {
        let decimals = (8 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}"))
    } else {
        format!(
            "{}e{}{:02}",
            trim_zeros(mantissa),
            if exp < 0 { '-' } else { '+' },
            exp.abs()
        )
    }
}

fn trim_zeros(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}

/// CSV text with the fixed header; a trailing `cluster_count` column appears
/// only when some row carries one.
pub fn to_csv(rows: &[ResultRow]) -> String {
    let with_clusters = rows.iter().any(|r| r.cluster_count.is_some());
    let mut out = HEADER.join(",");
    if with_clusters {
        out.push_str(",cluster_count");
    }
    out.push('\n');
    for r in rows {
        let fields = [
            r.topology.clone(),
            format_value(Some(r.alpha)),
            r.replicate.to_string(),
            r.t.to_string(),
            format_value(r.pref_similarity),
            format_value(r.pref_congruence),
            format_value(r.assoc_similarity),
            format_value(r.mean_mutual_info),
            r.excluded_pairs.to_string(),
            r.skipped_steps.to_string(),
        ];
        out.push_str(&fields.join(","));
        if with_clusters {
            out.push(',');
            if let Some(c) = r.cluster_count {
                out.push_str(&c.to_string());
            }
        }
        out.push('\n');
    }
    out
}

pub fn write_csv(rows: &[ResultRow], path: impl AsRef<Path>) -> Result<(), EngineError> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(to_csv(rows).as_bytes())?;
    w.flush()?;
    Ok(())
}

pub fn read_csv(path: impl AsRef<Path>) -> Result<Vec<ResultRow>, EngineError> {
    let mut reader = csv::Reader::from_path(path)?;
    let headers = reader.headers()?.clone();
    if headers.iter().take(HEADER.len()).ne(HEADER.iter().copied()) {
        return Err(EngineError::Config(format!(
            "unexpected CSV header `{}`",
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    reader
        .deserialize()
        .map(|row| row.map_err(EngineError::from))
        .collect()
}

/// Replicate mean and sample standard deviation of one measure.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MeasureSummary {
    pub mean: Option<f64>,
    /// Zero when fewer than two values are defined.
    pub std: f64,
    /// Replicates with a defined value.
    pub count: usize,
}

impl MeasureSummary {
    fn of(values: impl Iterator<Item = Option<f64>>) -> Self {
        let defined: Vec<f64> = values.flatten().collect();
        let count = defined.len();
        if count == 0 {
            return Self {
                mean: None,
                std: 0.0,
                count,
            };
        }
        let mean = defined.iter().sum::<f64>() / count as f64;
        let std = if count > 1 {
            (defined.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (count - 1) as f64).sqrt()
        } else {
            0.0
        };
        Self {
            mean: Some(mean),
            std,
            count,
        }
    }
}

/// Final-time statistics for one `(topology, alpha)` group.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FinalSummary {
    pub topology: String,
    pub alpha: f64,
    pub t: u64,
    pub replicates: usize,
    pub pref_similarity: MeasureSummary,
    pub pref_congruence: MeasureSummary,
    pub assoc_similarity: MeasureSummary,
    pub mean_mutual_info: MeasureSummary,
}

/// Per `(topology, alpha)`: statistics across replicates at the group's final
/// time. Fails if a replicate never reached that time.
pub fn final_comparison(rows: &[ResultRow]) -> Result<Vec<FinalSummary>, EngineError> {
    // (topology, alpha bits) -> replicate -> last row
    let mut groups: BTreeMap<(String, u64), BTreeMap<u64, &ResultRow>> = BTreeMap::new();
    for r in rows {
        let slot = groups
            .entry((r.topology.clone(), r.alpha.to_bits()))
            .or_default()
            .entry(r.replicate)
            .or_insert(r);
        if r.t > slot.t {
            *slot = r;
        }
    }
    let mut missing = Vec::new();
    let mut out = Vec::new();
    for ((topology, alpha_bits), reps) in groups {
        let alpha = f64::from_bits(alpha_bits);
        let t = reps.values().map(|r| r.t).max().unwrap_or(0);
        for (rep, r) in &reps {
            if r.t != t {
                missing.push(format!("{topology}/alpha={alpha}/replicate={rep}"));
            }
        }
        let finals: Vec<&ResultRow> = reps.values().copied().collect();
        out.push(FinalSummary {
            topology,
            alpha,
            t,
            replicates: finals.len(),
            pref_similarity: MeasureSummary::of(finals.iter().map(|r| r.pref_similarity)),
            pref_congruence: MeasureSummary::of(finals.iter().map(|r| r.pref_congruence)),
            assoc_similarity: MeasureSummary::of(finals.iter().map(|r| r.assoc_similarity)),
            mean_mutual_info: MeasureSummary::of(finals.iter().map(|r| r.mean_mutual_info)),
        });
    }
    if !missing.is_empty() {
        return Err(EngineError::MissingCells(missing.join(", ")));
    }
    out.sort_by(|a, b| {
        a.topology
            .cmp(&b.topology)
            .then(a.alpha.total_cmp(&b.alpha))
    });
    Ok(out)
}
