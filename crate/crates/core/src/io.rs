//! CSV and JSON output, and readers for everything the tool writes.
//!
//! Every CSV starts with a comment line `# herbidyn v1 <schema>` naming its
//! layout. Floats are written in their shortest round-trip form.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use serde::Serialize;

use crate::bifurcation::{AttractorLabel, BifurcationCurve, CurveKind, CurvePoint, ScanCell};
use crate::bursting::{BurstStats, RunStats};
use crate::error::{Error, Result};
use crate::system::{State, Trajectory};

pub const FORMAT_VERSION: &str = "v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Schema {
    Trajectory,
    Scan,
    Curve,
    BurstRuns,
    BurstSummary,
}

impl Schema {
    pub fn name(&self) -> &'static str {
        match self {
            Schema::Trajectory => "trajectory",
            Schema::Scan => "scan",
            Schema::Curve => "curve",
            Schema::BurstRuns => "burst-runs",
            Schema::BurstSummary => "burst-summary",
        }
    }

    pub fn columns(&self) -> &'static [&'static str] {
        match self {
            Schema::Trajectory => &["t", "P", "H"],
            Schema::Scan => &["r", "a", "label", "min_H", "max_H", "max_P", "period", "return_cv", "rho_interior"],
            Schema::Curve => &["r", "a", "kind", "residual"],
            Schema::BurstRuns => &["omega", "run", "ratio", "period", "n_bursts"],
            Schema::BurstSummary => &[
                "omega",
                "threshold",
                "runs",
                "mean_period",
                "period_std",
                "ratio",
                "ratio_std",
                "n_bursts",
                "n_undefined",
            ],
        }
    }

    fn header_line(&self) -> String {
        format!("# herbidyn {FORMAT_VERSION} {}", self.name())
    }
}

/// Shortest string that parses back to exactly `x`.
pub fn fmt_f64(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || !x.is_finite() || (1e-4..1e15).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

/// Writes a schema header and rows to any sink.
pub fn write_csv<W: Write, I>(sink: W, schema: Schema, rows: I) -> Result<()>
where
    I: IntoIterator<Item = Vec<String>>,
{
    let mut sink = sink;
    writeln!(sink, "{}", schema.header_line())?;
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(schema.columns())?;
    for row in rows {
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    Ok(BufWriter::new(File::create(path)?))
}

pub fn trajectory_rows(traj: &Trajectory) -> impl Iterator<Item = Vec<String>> + '_ {
    traj.states
        .iter()
        .enumerate()
        .map(|(k, s)| vec![traj.time(k).to_string(), fmt_f64(s.p), fmt_f64(s.h)])
}

pub fn write_trajectory(path: &Path, traj: &Trajectory) -> Result<()> {
    write_csv(create(path)?, Schema::Trajectory, trajectory_rows(traj))
}

pub fn write_scan<W: Write>(sink: W, cells: &[ScanCell]) -> Result<()> {
    write_csv(
        sink,
        Schema::Scan,
        cells.iter().map(|c| {
            let d = &c.class.diagnostics;
            vec![
                fmt_f64(c.r),
                fmt_f64(c.a),
                c.class.label.to_string(),
                fmt_f64(d.min_h_tail),
                fmt_f64(d.max_h_tail),
                fmt_f64(d.max_p_tail),
                fmt_opt(d.cycle_period_estimate),
                fmt_opt(d.return_time_cv),
                fmt_opt(d.spectral_radius_at_interior),
            ]
        }),
    )
}

pub fn write_curves<W: Write>(sink: W, curves: &[&BifurcationCurve]) -> Result<()> {
    let rows = curves.iter().flat_map(|c| {
        c.points
            .iter()
            .map(move |p| vec![fmt_f64(p.r), fmt_f64(p.a), c.kind.to_string(), fmt_f64(p.residual)])
    });
    write_csv(sink, Schema::Curve, rows)
}

pub fn write_burst_runs<W: Write>(sink: W, stats: &[BurstStats]) -> Result<()> {
    let rows = stats.iter().flat_map(|b| {
        b.per_trajectory.iter().map(move |r| {
            vec![fmt_f64(b.omega), r.run.to_string(), fmt_f64(r.ratio), fmt_opt(r.period), r.n_bursts.to_string()]
        })
    });
    write_csv(sink, Schema::BurstRuns, rows)
}

pub fn write_burst_summary<W: Write>(sink: W, stats: &[BurstStats]) -> Result<()> {
    let rows = stats.iter().map(|b| {
        vec![
            fmt_f64(b.omega),
            fmt_f64(b.threshold),
            b.per_trajectory.len().to_string(),
            fmt_opt(b.mean_period),
            fmt_opt(b.period_std),
            fmt_f64(b.resident_time_ratio),
            fmt_f64(b.ratio_std),
            b.n_bursts.to_string(),
            b.n_undefined.to_string(),
        ]
    });
    write_csv(sink, Schema::BurstSummary, rows)
}

pub fn write_json<W: Write, T: Serialize>(mut sink: W, value: &T) -> Result<()> {
    serde_json::to_writer_pretty(&mut sink, value)?;
    writeln!(sink)?;
    Ok(())
}

/// Writes through `f` into `path`, creating parent directories.
pub fn to_file<F>(path: &Path, f: F) -> Result<()>
where
    F: FnOnce(&mut BufWriter<File>) -> Result<()>,
{
    let mut w = create(path)?;
    f(&mut w)?;
    w.flush()?;
    Ok(())
}

/// A parsed CSV: the schema named on its first line and its data rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub schema: Schema,
    pub rows: Vec<csv::StringRecord>,
}

const ALL_SCHEMAS: [Schema; 5] =
    [Schema::Trajectory, Schema::Scan, Schema::Curve, Schema::BurstRuns, Schema::BurstSummary];

pub fn read_table<R: Read>(mut source: R) -> Result<Table> {
    let mut text = String::new();
    source.read_to_string(&mut text)?;
    let first = text.lines().next().unwrap_or_default();
    let schema = ALL_SCHEMAS
        .into_iter()
        .find(|s| s.header_line() == first.trim_end())
        .ok_or_else(|| Error::Domain(format!("unrecognised CSV header `{first}`")))?;
    let mut rd = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    let headers = rd.headers()?.clone();
    if headers.iter().ne(schema.columns().iter().copied()) {
        return Err(Error::Domain(format!("columns of {} file do not match its schema", schema.name())));
    }
    let rows = rd.records().collect::<std::result::Result<Vec<_>, _>>()?;
    Ok(Table { schema, rows })
}

pub fn read_table_file(path: &Path) -> Result<Table> {
    read_table(File::open(path)?)
}

fn expect(table: &Table, schema: Schema) -> Result<()> {
    if table.schema != schema {
        return Err(Error::Domain(format!("expected a {} file, found {}", schema.name(), table.schema.name())));
    }
    Ok(())
}

fn num(rec: &csv::StringRecord, i: usize) -> Result<f64> {
    let s = rec.get(i).unwrap_or_default();
    s.parse().map_err(|_| Error::Domain(format!("bad number `{s}` in column {i}")))
}

fn opt_num(rec: &csv::StringRecord, i: usize) -> Result<Option<f64>> {
    if rec.get(i).unwrap_or_default().is_empty() {
        Ok(None)
    } else {
        num(rec, i).map(Some)
    }
}

fn int(rec: &csv::StringRecord, i: usize) -> Result<usize> {
    let s = rec.get(i).unwrap_or_default();
    s.parse().map_err(|_| Error::Domain(format!("bad integer `{s}` in column {i}")))
}

pub fn parse_trajectory(table: &Table) -> Result<Trajectory> {
    expect(table, Schema::Trajectory)?;
    let mut states = Vec::with_capacity(table.rows.len());
    let mut times = Vec::with_capacity(table.rows.len());
    for rec in &table.rows {
        times.push(int(rec, 0)?);
        states.push(State { p: num(rec, 1)?, h: num(rec, 2)? });
    }
    if states.is_empty() {
        return Err(Error::Domain("empty trajectory".into()));
    }
    let stride = if times.len() > 1 { times[1] - times[0] } else { 1 };
    Ok(Trajectory { states, t0: times[0], stride })
}

/// A scan row as read back: the label and the diagnostics columns.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanRow {
    pub r: f64,
    pub a: f64,
    pub label: AttractorLabel,
    pub min_h: f64,
    pub max_h: f64,
}

pub fn parse_scan(table: &Table) -> Result<Vec<ScanRow>> {
    expect(table, Schema::Scan)?;
    table
        .rows
        .iter()
        .map(|rec| {
            let label = rec.get(2).unwrap_or_default();
            Ok(ScanRow {
                r: num(rec, 0)?,
                a: num(rec, 1)?,
                label: AttractorLabel::parse(label).ok_or_else(|| Error::Domain(format!("unknown label `{label}`")))?,
                min_h: num(rec, 3)?,
                max_h: num(rec, 4)?,
            })
        })
        .collect()
}

pub fn parse_curve(table: &Table) -> Result<Vec<(CurveKind, CurvePoint)>> {
    expect(table, Schema::Curve)?;
    table
        .rows
        .iter()
        .map(|rec| {
            let kind = rec.get(2).unwrap_or_default();
            let kind = CurveKind::parse(kind).ok_or_else(|| Error::Domain(format!("unknown curve kind `{kind}`")))?;
            Ok((kind, CurvePoint { r: num(rec, 0)?, a: num(rec, 1)?, residual: num(rec, 3)? }))
        })
        .collect()
}

/// `(omega, run stats)` pairs; the seed is not stored and reads back as 0.
pub fn parse_burst_runs(table: &Table) -> Result<Vec<(f64, RunStats)>> {
    expect(table, Schema::BurstRuns)?;
    table
        .rows
        .iter()
        .map(|rec| {
            Ok((
                num(rec, 0)?,
                RunStats { run: int(rec, 1)?, seed: 0, ratio: num(rec, 2)?, period: opt_num(rec, 3)?, n_bursts: int(rec, 4)? },
            ))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct BurstSummaryRow {
    pub omega: f64,
    pub mean_period: Option<f64>,
    pub ratio: f64,
}

pub fn parse_burst_summary(table: &Table) -> Result<Vec<BurstSummaryRow>> {
    expect(table, Schema::BurstSummary)?;
    table
        .rows
        .iter()
        .map(|rec| Ok(BurstSummaryRow { omega: num(rec, 0)?, mean_period: opt_num(rec, 3)?, ratio: num(rec, 5)? }))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format_round_trips() {
        for x in [0.0, 1.0, 2.5, 1e-7, 1e-300, 0.1 + 0.2, 123456.789, 3.2e20, -4e-9] {
            let s = fmt_f64(x);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), x.to_bits(), "{s}");
        }
        assert_eq!(fmt_f64(2.5), "2.5");
        assert_eq!(fmt_f64(1e-7), "1e-7");
    }

    #[test]
    fn trajectory_round_trip() {
        let traj = Trajectory {
            states: vec![State { p: 1.0, h: 0.5 }, State { p: 0.1 + 0.2, h: 1e-300 }],
            t0: 0,
            stride: 1,
        };
        let mut buf = Vec::new();
        write_csv(&mut buf, Schema::Trajectory, trajectory_rows(&traj)).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("# herbidyn v1 trajectory\nt,P,H\n"));
        let back = parse_trajectory(&read_table(buf.as_slice()).unwrap()).unwrap();
        assert_eq!(back, traj);
    }

    #[test]
    fn wrong_schema_rejected() {
        let mut buf = Vec::new();
        write_csv(&mut buf, Schema::Curve, vec![vec!["1".into(), "2".into(), "collapse".into(), "0".into()]]).unwrap();
        let t = read_table(buf.as_slice()).unwrap();
        assert!(parse_trajectory(&t).is_err());
        assert_eq!(parse_curve(&t).unwrap()[0].0, CurveKind::Collapse);
        assert!(read_table("r,a\n1,2\n".as_bytes()).is_err());
    }
}
