use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::Path;

use crate::pipeline::Strategy;

use super::{BenchError, BenchRecord, RunStatus};

const HEADER: [&str; 10] = [
    "wps",
    "runtime_monolithic",
    "runtime_dbscan",
    "runtime_recursive",
    "distance_monolithic",
    "distance_dbscan",
    "distance_recursive",
    "cars_monolithic",
    "cars_dbscan",
    "cars_recursive",
];

const MISSING: &str = "-";

fn column(strategy: Strategy) -> usize {
    match strategy {
        Strategy::Monolithic => 0,
        Strategy::Dbscan => 1,
        Strategy::RecursiveDbscan => 2,
    }
}

/// One row of the results table. Runtimes are seconds rounded to the
/// millisecond, distances whole meters.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvRow {
    pub wps: usize,
    pub runtime_s: [Option<f64>; 3],
    pub distance_m: [Option<f64>; 3],
    pub cars: [Option<usize>; 3],
}

impl CsvRow {
    /// Groups records by (size, repetition). Strategies that did not finish
    /// OK are left empty.
    pub fn from_records(records: &[BenchRecord]) -> Vec<CsvRow> {
        let mut rows: BTreeMap<(usize, usize), CsvRow> = BTreeMap::new();
        for r in records {
            let row = rows.entry((r.n_waypoints, r.repetition)).or_insert(CsvRow {
                wps: r.n_waypoints,
                runtime_s: [None; 3],
                distance_m: [None; 3],
                cars: [None; 3],
            });
            if r.status != RunStatus::Ok {
                continue;
            }
            let k = column(r.strategy);
            row.runtime_s[k] = Some((r.runtime_s * 1000.0).round() / 1000.0);
            row.distance_m[k] = r.distance_m.map(f64::round);
            row.cars[k] = r.busy_vehicles;
        }
        rows.into_values().collect()
    }

    fn fields(&self) -> Vec<String> {
        let opt = |v: Option<String>| v.unwrap_or_else(|| MISSING.to_string());
        let mut out = vec![self.wps.to_string()];
        out.extend(self.runtime_s.iter().map(|v| opt(v.map(|x| format!("{x:.3}")))));
        out.extend(self.distance_m.iter().map(|v| opt(v.map(|x| format!("{x:.0}")))));
        out.extend(self.cars.iter().map(|v| opt(v.map(|x| x.to_string()))));
        out
    }
}

pub fn write_csv<W: Write>(records: &[BenchRecord], out: W) -> Result<(), BenchError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(HEADER)?;
    for row in CsvRow::from_records(records) {
        w.write_record(row.fields())?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn export_csv(records: &[BenchRecord], path: &Path) -> Result<(), BenchError> {
    let mut buf = Vec::new();
    write_csv(records, &mut buf)?;
    std::fs::write(path, buf).map_err(|source| BenchError::Io { path: path.to_path_buf(), source })
}

pub fn parse_csv<R: Read>(input: R) -> Result<Vec<CsvRow>, BenchError> {
    let mut reader = csv::Reader::from_reader(input);
    let header = reader.headers()?.clone();
    if header.iter().ne(HEADER) {
        return Err(BenchError::Parse { row: 0, reason: format!("unexpected header {header:?}") });
    }
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        let bad = |reason: String| BenchError::Parse { row: i + 1, reason };
        let cell = |k: usize| record.get(k).filter(|s| *s != MISSING);
        let float = |k: usize| cell(k).map(|s| s.parse::<f64>().map_err(|e| bad(format!("{s:?}: {e}")))).transpose();
        let count = |k: usize| cell(k).map(|s| s.parse::<usize>().map_err(|e| bad(format!("{s:?}: {e}")))).transpose();
        rows.push(CsvRow {
            wps: count(0)?.ok_or_else(|| bad("missing wps".into()))?,
            runtime_s: [float(1)?, float(2)?, float(3)?],
            distance_m: [float(4)?, float(5)?, float(6)?],
            cars: [count(7)?, count(8)?, count(9)?],
        });
    }
    Ok(rows)
}
