//! Derived performance metrics, CSV serialization and grouped summaries.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use crate::accel::RunResult;
use crate::error::{Error, Result};

/// One CSV row describing a finished run.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricRow {
    pub accelerator: String,
    pub problem: String,
    pub graph: String,
    pub dram: String,
    pub channels: usize,
    pub optimizations: String,
    pub vertices: usize,
    pub edges: u64,
    pub elapsed_ns: f64,
    pub iterations: u32,
    pub mteps: f64,
    pub mreps: f64,
    pub bytes_per_edge: f64,
    pub edges_read_total: u64,
    pub edges_read_per_iteration: Vec<u64>,
    pub values_read_per_iteration: Vec<u64>,
    pub updates_written: u64,
    pub requests: u64,
    pub row_hits: u64,
    pub row_misses: u64,
    pub row_conflicts: u64,
    pub utilization: f64,
}

/// Column names in output order.
pub const CSV_COLUMNS: [&str; 22] = [
    "accelerator",
    "problem",
    "graph",
    "dram",
    "channels",
    "optimizations",
    "vertices",
    "edges",
    "elapsed_ns",
    "iterations",
    "mteps",
    "mreps",
    "bytes_per_edge",
    "edges_read_total",
    "edges_read_per_iteration",
    "values_read_per_iteration",
    "updates_written",
    "requests",
    "row_hits",
    "row_misses",
    "row_conflicts",
    "utilization",
];

/// Columns that identify a configuration; used to resume sweeps.
pub const KEY_COLUMNS: usize = 6;

impl MetricRow {
    /// Identity of the configuration that produced this row.
    pub fn key(&self) -> String {
        self.fields()[..KEY_COLUMNS].join(",")
    }

    pub fn average_degree(&self) -> f64 {
        self.edges as f64 / self.vertices.max(1) as f64
    }

    fn fields(&self) -> Vec<String> {
        let list = |v: &[u64]| v.iter().map(u64::to_string).collect::<Vec<_>>().join(";");
        vec![
            self.accelerator.clone(),
            self.problem.clone(),
            self.graph.clone(),
            self.dram.clone(),
            self.channels.to_string(),
            self.optimizations.clone(),
            self.vertices.to_string(),
            self.edges.to_string(),
            format!("{:.3}", self.elapsed_ns),
            self.iterations.to_string(),
            format!("{:.6}", self.mteps),
            format!("{:.6}", self.mreps),
            format!("{:.6}", self.bytes_per_edge),
            self.edges_read_total.to_string(),
            list(&self.edges_read_per_iteration),
            list(&self.values_read_per_iteration),
            self.updates_written.to_string(),
            self.requests.to_string(),
            self.row_hits.to_string(),
            self.row_misses.to_string(),
            self.row_conflicts.to_string(),
            format!("{:.6}", self.utilization),
        ]
    }

    pub fn to_csv_line(&self) -> String {
        self.fields().join(",")
    }

    /// Parses one line produced by [`MetricRow::to_csv_line`].
    pub fn parse(line: &str) -> std::result::Result<MetricRow, String> {
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != CSV_COLUMNS.len() {
            return Err(format!(
                "expected {} columns, found {}",
                CSV_COLUMNS.len(),
                f.len()
            ));
        }
        fn num<T: std::str::FromStr>(f: &[&str], i: usize) -> std::result::Result<T, String> {
            f[i].parse()
                .map_err(|_| format!("bad {} value {:?}", CSV_COLUMNS[i], f[i]))
        }
        let list = |i: usize| -> std::result::Result<Vec<u64>, String> {
            if f[i].is_empty() {
                return Ok(Vec::new());
            }
            f[i].split(';')
                .map(|x| {
                    x.parse()
                        .map_err(|_| format!("bad {} entry {x:?}", CSV_COLUMNS[i]))
                })
                .collect()
        };
        Ok(MetricRow {
            accelerator: f[0].to_string(),
            problem: f[1].to_string(),
            graph: f[2].to_string(),
            dram: f[3].to_string(),
            channels: num(&f, 4)?,
            optimizations: f[5].to_string(),
            vertices: num(&f, 6)?,
            edges: num(&f, 7)?,
            elapsed_ns: num(&f, 8)?,
            iterations: num(&f, 9)?,
            mteps: num(&f, 10)?,
            mreps: num(&f, 11)?,
            bytes_per_edge: num(&f, 12)?,
            edges_read_total: num(&f, 13)?,
            edges_read_per_iteration: list(14)?,
            values_read_per_iteration: list(15)?,
            updates_written: num(&f, 16)?,
            requests: num(&f, 17)?,
            row_hits: num(&f, 18)?,
            row_misses: num(&f, 19)?,
            row_conflicts: num(&f, 20)?,
            utilization: num(&f, 21)?,
        })
    }
}

pub fn csv_header() -> String {
    CSV_COLUMNS.join(",")
}

/// Derives the metric row of a run. Fails for runs that took no time.
pub fn compute_metrics(run: &RunResult) -> Result<MetricRow> {
    if run.elapsed_ns.is_nan() || run.elapsed_ns <= 0.0 {
        return Err(Error::Degenerate(format!(
            "{} {} on {} finished in zero time",
            run.accelerator, run.problem, run.graph
        )));
    }
    let stats = run.total_dram_stats();
    Ok(MetricRow {
        accelerator: run.accelerator.to_string(),
        problem: run.problem.to_string(),
        graph: run.graph.clone(),
        dram: run.dram.clone(),
        channels: run.channels,
        optimizations: run.optimizations.to_string(),
        vertices: run.vertices,
        edges: run.original_edge_count,
        elapsed_ns: run.elapsed_ns,
        iterations: run.iterations,
        mteps: run.mteps(),
        mreps: run.mreps(),
        bytes_per_edge: run.bytes_per_edge(),
        edges_read_total: run.edges_read_total,
        edges_read_per_iteration: run.edges_read_per_iteration.clone(),
        values_read_per_iteration: run.values_read_per_iteration.clone(),
        updates_written: run.updates_written,
        requests: run.total_requests(),
        row_hits: stats.row_hits,
        row_misses: stats.row_misses,
        row_conflicts: stats.row_conflicts,
        utilization: run.utilization,
    })
}

/// Writes a header and one line per row.
pub fn write_csv(rows: &[MetricRow], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::new();
    out.push_str(&csv_header());
    out.push('\n');
    for r in rows {
        out.push_str(&r.to_csv_line());
        out.push('\n');
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Appends rows to a CSV file, writing the header if the file is new.
pub fn append_csv(rows: &[MetricRow], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let fresh = !path.exists()
        || std::fs::metadata(path)
            .map(|m| m.len() == 0)
            .unwrap_or(true);
    let mut f = std::fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(|e| Error::io(path, e))?;
    let mut out = String::new();
    if fresh {
        out.push_str(&csv_header());
        out.push('\n');
    }
    for r in rows {
        out.push_str(&r.to_csv_line());
        out.push('\n');
    }
    f.write_all(out.as_bytes()).map_err(|e| Error::io(path, e))
}

/// Configuration keys of the rows already present in a CSV file.
pub fn read_csv_keys(path: impl AsRef<Path>) -> Result<BTreeSet<String>> {
    let path = path.as_ref();
    let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut keys = BTreeSet::new();
    for (i, line) in BufReader::new(f).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if i == 0 || line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != CSV_COLUMNS.len() {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: i + 1,
                message: format!(
                    "expected {} columns, found {}",
                    CSV_COLUMNS.len(),
                    fields.len()
                ),
            });
        }
        keys.insert(fields[..KEY_COLUMNS].join(","));
    }
    Ok(keys)
}

/// Reads every row of a CSV file written by [`write_csv`] or [`append_csv`].
pub fn read_csv(path: impl AsRef<Path>) -> Result<Vec<MetricRow>> {
    let path = path.as_ref();
    let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut rows = Vec::new();
    for (i, line) in BufReader::new(f).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if i == 0 || line.trim().is_empty() {
            continue;
        }
        let row = MetricRow::parse(&line).map_err(|message| Error::Parse {
            path: path.to_path_buf(),
            line: i + 1,
            message,
        })?;
        rows.push(row);
    }
    Ok(rows)
}

/// How much faster `elapsed` is than `baseline`.
pub fn speedup(baseline_ns: f64, elapsed_ns: f64) -> f64 {
    baseline_ns / elapsed_ns
}

/// One speedup entry: the row, its baseline, and the ratio.
#[derive(Debug, Clone, PartialEq)]
pub struct Speedup {
    pub row: usize,
    pub baseline: usize,
    pub speedup: f64,
}

/// Pairs every row with the baseline row that agrees on all key columns
/// except the varied one.
pub fn speedups(
    rows: &[MetricRow],
    group: impl Fn(&MetricRow) -> String,
    is_baseline: impl Fn(&MetricRow) -> bool,
) -> Vec<Speedup> {
    let mut baselines: BTreeMap<String, usize> = BTreeMap::new();
    for (i, r) in rows.iter().enumerate() {
        if is_baseline(r) {
            baselines.entry(group(r)).or_insert(i);
        }
    }
    rows.iter()
        .enumerate()
        .filter_map(|(i, r)| {
            let b = *baselines.get(&group(r))?;
            Some(Speedup {
                row: i,
                baseline: b,
                speedup: speedup(rows[b].elapsed_ns, r.elapsed_ns),
            })
        })
        .collect()
}

fn table(out: &mut String, title: &str, header: &[&str], body: Vec<Vec<String>>) {
    let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for row in &body {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.len());
        }
    }
    let _ = writeln!(out, "== {title} ==");
    let line = |cells: Vec<&str>| {
        cells
            .iter()
            .zip(&widths)
            .map(|(c, w)| format!("{c:<w$}"))
            .collect::<Vec<_>>()
            .join("  ")
            .trim_end()
            .to_string()
    };
    let _ = writeln!(out, "{}", line(header.to_vec()));
    for row in &body {
        let _ = writeln!(out, "{}", line(row.iter().map(String::as_str).collect()));
    }
    let _ = writeln!(out);
}

fn speedup_table(
    out: &mut String,
    title: &str,
    rows: &[MetricRow],
    entries: Vec<Speedup>,
    varied: impl Fn(&MetricRow) -> String,
) {
    let body: Vec<Vec<String>> = entries
        .into_iter()
        .filter(|s| s.row != s.baseline)
        .map(|s| {
            let r = &rows[s.row];
            vec![
                r.graph.clone(),
                r.accelerator.clone(),
                r.problem.clone(),
                r.dram.clone(),
                r.channels.to_string(),
                r.optimizations.clone(),
                varied(&rows[s.baseline]),
                format!("{:.3}", s.speedup),
            ]
        })
        .collect();
    if !body.is_empty() {
        table(
            out,
            title,
            &[
                "graph",
                "accelerator",
                "problem",
                "dram",
                "channels",
                "opts",
                "baseline",
                "speedup",
            ],
            body,
        );
    }
}

/// Plain-text summary grouped by graph, memory type, channel count,
/// optimization set and average degree.
pub fn summary(rows: &[MetricRow]) -> String {
    let mut out = String::new();
    let mut by_graph: Vec<&MetricRow> = rows.iter().collect();
    by_graph.sort_by(|a, b| {
        (&a.graph, &a.problem, &a.accelerator).cmp(&(&b.graph, &b.problem, &b.accelerator))
    });
    table(
        &mut out,
        "runs by graph",
        &[
            "graph",
            "problem",
            "accelerator",
            "dram",
            "channels",
            "opts",
            "seconds",
            "iters",
            "MTEPS",
            "MREPS",
            "B/edge",
        ],
        by_graph
            .iter()
            .map(|r| {
                vec![
                    r.graph.clone(),
                    r.problem.clone(),
                    r.accelerator.clone(),
                    r.dram.clone(),
                    r.channels.to_string(),
                    r.optimizations.clone(),
                    format!("{:.4e}", r.elapsed_ns * 1e-9),
                    r.iterations.to_string(),
                    format!("{:.1}", r.mteps),
                    format!("{:.1}", r.mreps),
                    format!("{:.2}", r.bytes_per_edge),
                ]
            })
            .collect(),
    );

    let key = |r: &MetricRow, skip: usize| {
        let f = r.fields();
        f[..KEY_COLUMNS]
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != skip)
            .map(|(_, s)| s.as_str())
            .collect::<Vec<_>>()
            .join(",")
    };
    speedup_table(
        &mut out,
        "speedup over DDR4",
        rows,
        speedups(
            rows,
            |r| key(r, 3),
            |r| r.dram.to_ascii_uppercase().starts_with("DDR4"),
        ),
        |r| r.dram.clone(),
    );
    speedup_table(
        &mut out,
        "speedup over one channel",
        rows,
        speedups(rows, |r| key(r, 4), |r| r.channels == 1),
        |r| r.channels.to_string(),
    );
    speedup_table(
        &mut out,
        "speedup over unoptimized",
        rows,
        speedups(rows, |r| key(r, 5), |r| r.optimizations == "none"),
        |r| r.optimizations.clone(),
    );

    let mut by_degree: Vec<&MetricRow> = rows.iter().collect();
    by_degree.sort_by(|a, b| {
        a.average_degree()
            .total_cmp(&b.average_degree())
            .then_with(|| a.graph.cmp(&b.graph))
            .then_with(|| a.accelerator.cmp(&b.accelerator))
    });
    table(
        &mut out,
        "MREPS by average degree",
        &[
            "avg degree",
            "graph",
            "accelerator",
            "problem",
            "dram",
            "channels",
            "opts",
            "MREPS",
        ],
        by_degree
            .iter()
            .map(|r| {
                vec![
                    format!("{:.2}", r.average_degree()),
                    r.graph.clone(),
                    r.accelerator.clone(),
                    r.problem.clone(),
                    r.dram.clone(),
                    r.channels.to_string(),
                    r.optimizations.clone(),
                    format!("{:.1}", r.mreps),
                ]
            })
            .collect(),
    );
    out
}

/// Writes [`summary`] to a file.
pub fn write_summary(rows: &[MetricRow], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, summary(rows)).map_err(|e| Error::io(path, e))
}
