//! SVG line charts: one replicate-averaged curve per alpha over time.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use super::{EngineError, ResultRow};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Measure {
    PrefSimilarity,
    PrefCongruence,
    AssocSimilarity,
    MeanMutualInfo,
}

impl Measure {
    pub const ALL: [Measure; 4] = [
        Measure::PrefSimilarity,
        Measure::PrefCongruence,
        Measure::AssocSimilarity,
        Measure::MeanMutualInfo,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Measure::PrefSimilarity => "pref_similarity",
            Measure::PrefCongruence => "pref_congruence",
            Measure::AssocSimilarity => "assoc_similarity",
            Measure::MeanMutualInfo => "mean_mutual_info",
        }
    }

    fn axis_label(self) -> &'static str {
        match self {
            Measure::PrefSimilarity => "preference similarity",
            Measure::PrefCongruence => "preference congruence",
            Measure::AssocSimilarity => "association similarity",
            Measure::MeanMutualInfo => "mean mutual information (nats)",
        }
    }

    pub fn of(self, row: &ResultRow) -> Option<f64> {
        match self {
            Measure::PrefSimilarity => row.pref_similarity,
            Measure::PrefCongruence => row.pref_congruence,
            Measure::AssocSimilarity => row.assoc_similarity,
            Measure::MeanMutualInfo => row.mean_mutual_info,
        }
    }
}

impl FromStr for Measure {
    type Err = EngineError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Measure::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| EngineError::UnknownMeasure(s.to_string()))
    }
}

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf",
];
const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 440.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 150.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 55.0;

/// Replicate mean per `(alpha, t)`, skipping undefined values.
fn curves(rows: &[&ResultRow], measure: Measure) -> BTreeMap<u64, (f64, Vec<(u64, f64)>)> {
    let mut acc: BTreeMap<u64, BTreeMap<u64, (f64, usize)>> = BTreeMap::new();
    for r in rows {
        if let Some(v) = measure.of(r) {
            let cell = acc
                .entry(r.alpha.to_bits())
                .or_default()
                .entry(r.t)
                .or_insert((0.0, 0));
            cell.0 += v;
            cell.1 += 1;
        }
    }
    // Order curves by alpha value; to_bits order matches for non-negative floats.
    acc.into_iter()
        .map(|(bits, pts)| {
            let series = pts
                .into_iter()
                .map(|(t, (s, n))| (t, s / n as f64))
                .collect();
            (bits, (f64::from_bits(bits), series))
        })
        .collect()
}

fn tick(x: f64) -> String {
    let s = format!("{x:.3}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.into()
    }
}

/// Renders the chart. `topology` filters rows when given.
pub fn render_plot(
    rows: &[ResultRow],
    measure: Measure,
    topology: Option<&str>,
) -> Result<String, EngineError> {
    let selected: Vec<&ResultRow> = rows
        .iter()
        .filter(|r| topology.is_none_or(|t| r.topology == t))
        .collect();
    if selected.is_empty() {
        return Err(EngineError::EmptySelection(match topology {
            Some(t) => format!("topology `{t}`"),
            None => "empty table".into(),
        }));
    }
    let series = curves(&selected, measure);
    let t_max = selected.iter().map(|r| r.t).max().unwrap_or(0).max(1) as f64;
    let values = series.values().flat_map(|(_, s)| s.iter().map(|p| p.1));
    let (mut lo, mut hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
        (lo.min(v), hi.max(v))
    });
    if !lo.is_finite() {
        (lo, hi) = (0.0, 1.0);
    }
    if measure != Measure::MeanMutualInfo {
        lo = lo.min(0.0);
        hi = hi.max(1.0);
    }
    if hi - lo < 1e-9 {
        hi = lo + 1.0;
    }
    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let sx = |t: f64| LEFT + t / t_max * plot_w;
    let sy = |v: f64| TOP + (hi - v) / (hi - lo) * plot_h;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(
        svg,
        r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
    );
    let _ = writeln!(
        svg,
        r#"<rect x="{LEFT}" y="{TOP}" width="{plot_w}" height="{plot_h}" fill="none" stroke="black"/>"#
    );
    for i in 0..=4 {
        let v = lo + (hi - lo) * i as f64 / 4.0;
        let y = sy(v);
        let _ = writeln!(
            svg,
            r##"<line x1="{LEFT}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#dddddd"/><text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"##,
            LEFT + plot_w,
            LEFT - 6.0,
            y + 4.0,
            tick(v)
        );
        let t = t_max * i as f64 / 4.0;
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            sx(t),
            TOP + plot_h + 18.0,
            t.round() as u64
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">t</text>"#,
        LEFT + plot_w / 2.0,
        HEIGHT - 12.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="18" y="{:.2}" text-anchor="middle" transform="rotate(-90 18 {:.2})">{}</text>"#,
        TOP + plot_h / 2.0,
        TOP + plot_h / 2.0,
        measure.axis_label()
    );
    for (idx, (alpha, pts)) in series.values().enumerate() {
        let color = PALETTE[idx % PALETTE.len()];
        let points: Vec<String> = pts
            .iter()
            .map(|&(t, v)| format!("{:.2},{:.2}", sx(t as f64), sy(v)))
            .collect();
        let _ = writeln!(
            svg,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
            points.join(" ")
        );
        let ly = TOP + 10.0 + idx as f64 * 18.0;
        let lx = LEFT + plot_w + 15.0;
        let _ = writeln!(
            svg,
            r#"<g class="legend"><line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="2"/><text x="{:.2}" y="{:.2}">alpha = {}</text></g>"#,
            lx + 20.0,
            lx + 26.0,
            ly + 4.0,
            tick(*alpha)
        );
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

/// Writes the chart for `measure`; nothing is written on error.
pub fn emit_plot(
    rows: &[ResultRow],
    measure: &str,
    topology: Option<&str>,
    out_path: impl AsRef<Path>,
) -> Result<(), EngineError> {
    let measure: Measure = measure.parse()?;
    let svg = render_plot(rows, measure, topology)?;
    fs::write(out_path, svg)?;
    Ok(())
}
