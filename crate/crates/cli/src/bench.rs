//! Query-count benchmark records, their CSV form and a log-log SVG plot.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::io;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use fairdiv_core::protocols::{self, ProtocolKind, RunOptions};
use fairdiv_core::rational::{self, Point};
use fairdiv_core::{scaling, Allocation, Instance, Rational};

use crate::error::Result;

/// One protocol run. `total_queries = eval_queries + cut_queries`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkRecord {
    pub protocol: ProtocolKind,
    pub n: usize,
    pub eps: Option<String>,
    pub seed: u64,
    pub total_queries: u64,
    pub eval_queries: u64,
    pub cut_queries: u64,
    pub super_evals: u64,
    pub super_cuts: u64,
    pub wall_time: f64,
    /// Distinct cut points inside `(0, 1)` in the output allocation.
    pub cuts_produced: usize,
    /// Set when the run failed; the counters are then zero.
    pub error: Option<String>,
}

fn cuts_produced(allocation: &Allocation) -> usize {
    let mut points = BTreeSet::new();
    for piece in allocation.pieces() {
        for i in piece.intervals() {
            points.insert(Point(i.lo().clone()));
            points.insert(Point(i.hi().clone()));
        }
    }
    points.remove(&Point(rational::zero()));
    points.remove(&Point(rational::one()));
    points.len()
}

/// Runs `kind` once and records the outcome; failures become a row.
pub fn record(
    kind: ProtocolKind,
    instance: &Instance,
    eps: Option<&Rational>,
    seed: u64,
) -> BenchmarkRecord {
    let options = RunOptions {
        eps: eps.cloned(),
        seed,
        audit: false,
    };
    let start = Instant::now();
    let result = protocols::run(kind, instance, &options);
    let wall_time = start.elapsed().as_secs_f64();
    let mut row = BenchmarkRecord {
        protocol: kind,
        n: instance.n(),
        eps: eps.map(rational::format),
        seed,
        total_queries: 0,
        eval_queries: 0,
        cut_queries: 0,
        super_evals: 0,
        super_cuts: 0,
        wall_time,
        cuts_produced: 0,
        error: None,
    };
    match result {
        Ok(r) => {
            let totals = r.ledger.export().totals;
            row.total_queries = totals.actual;
            row.eval_queries = totals.eval;
            row.cut_queries = totals.cut;
            row.super_evals = totals.super_eval;
            row.super_cuts = totals.super_cut;
            row.cuts_produced = cuts_produced(&r.allocation);
        }
        Err(e) => row.error = Some(e.to_string()),
    }
    row
}

pub fn write_csv<W: io::Write>(out: W, records: &[BenchmarkRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in records {
        w.serialize(r)?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn read_csv<R: io::Read>(input: R) -> Result<Vec<BenchmarkRecord>> {
    let mut r = csv::Reader::from_reader(input);
    Ok(r.deserialize().collect::<Result<Vec<_>, _>>()?)
}

/// Median total queries per `n` over successful rows, ascending in `n`.
pub fn medians(records: &[BenchmarkRecord]) -> Vec<(f64, f64)> {
    let ns: BTreeSet<usize> = records.iter().map(|r| r.n).collect();
    ns.into_iter()
        .filter_map(|n| {
            let q: Vec<f64> = records
                .iter()
                .filter(|r| r.n == n && r.error.is_none())
                .map(|r| r.total_queries as f64)
                .collect();
            scaling::median(&q).map(|m| (n as f64, m))
        })
        .collect()
}

/// Log-log polyline of `points` with the fitted slope in the title.
pub fn svg_plot(title: &str, points: &[(f64, f64)]) -> String {
    const W: f64 = 640.0;
    const H: f64 = 420.0;
    const PAD: f64 = 60.0;
    let logs: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0)
        .map(|(x, y)| (x.log10(), y.log10()))
        .collect();
    let slope = scaling::loglog_slope(points);
    let (x0, x1) = bounds(logs.iter().map(|p| p.0));
    let (y0, y1) = bounds(logs.iter().map(|p| p.1));
    let sx = |x: f64| PAD + (x - x0) / (x1 - x0) * (W - 2.0 * PAD);
    let sy = |y: f64| H - PAD - (y - y0) / (y1 - y0) * (H - 2.0 * PAD);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<line x1="{PAD}" y1="{b}" x2="{r}" y2="{b}" stroke="black"/><line x1="{PAD}" y1="{PAD}" x2="{PAD}" y2="{b}" stroke="black"/>"#,
        b = H - PAD,
        r = W - PAD
    );
    let label = match slope {
        Some(m) => format!("{title}: log-log slope {m:.3}"),
        None => format!("{title}: slope undefined"),
    };
    let _ = writeln!(
        s,
        r#"<text x="{}" y="30" text-anchor="middle" font-size="14">{}</text>"#,
        W / 2.0,
        escape(&label)
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">n (log scale)</text>"#,
        W / 2.0,
        H - 15.0
    );
    let _ = writeln!(
        s,
        r#"<text x="18" y="{}" text-anchor="middle" transform="rotate(-90 18 {})">median total queries (log scale)</text>"#,
        H / 2.0,
        H / 2.0
    );
    let path: Vec<String> = logs
        .iter()
        .map(|&(x, y)| format!("{:.1},{:.1}", sx(x), sy(y)))
        .collect();
    let _ = writeln!(
        s,
        r#"<polyline fill="none" stroke="steelblue" stroke-width="2" points="{}"/>"#,
        path.join(" ")
    );
    for (&(x, y), &(px, py)) in logs
        .iter()
        .zip(points.iter().filter(|(x, y)| *x > 0.0 && *y > 0.0))
    {
        let _ = writeln!(
            s,
            r#"<circle cx="{:.1}" cy="{:.1}" r="3" fill="steelblue"/>"#,
            sx(x),
            sy(y)
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}">n={px}: {py}</text>"#,
            sx(x) + 5.0,
            sy(y) - 6.0
        );
    }
    s.push_str("</svg>\n");
    s
}

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| {
        (a.min(v), b.max(v))
    });
    if !lo.is_finite() {
        (0.0, 1.0)
    } else if hi - lo < 1e-9 {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}
