//! Report envelopes and the csv / text-table renderings.

use serde::Serialize;
use serde_json::{Map, Value};

use bellscope_core::detection::CoincidenceMatrix;
use bellscope_core::scenarios::REPORT_SCHEMA_VERSION;

/// Serializes `body` into an object carrying `schema_version` and `kind`.
pub fn envelope<T: Serialize>(kind: &str, body: &T) -> Value {
    let mut obj = match serde_json::to_value(body).expect("report serializes") {
        Value::Object(m) => m,
        other => {
            let mut m = Map::new();
            m.insert("value".into(), other);
            m
        }
    };
    obj.insert("schema_version".into(), REPORT_SCHEMA_VERSION.into());
    obj.insert("kind".into(), kind.into());
    Value::Object(obj)
}

pub fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json renders");
    s.push('\n');
    s
}

/// One header row plus data rows, quoted where needed.
pub fn csv(header: &[String], rows: &[Vec<String>]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 cells")
}

/// Left-aligned columns padded to their widest cell.
pub fn table(header: &[String], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for r in rows {
        for (w, c) in widths.iter_mut().zip(r) {
            *w = (*w).max(c.chars().count());
        }
    }
    let line = |cells: &[String]| -> String {
        let padded: Vec<String> = cells
            .iter()
            .zip(&widths)
            .map(|(c, &w)| format!("{c:<w$}"))
            .collect();
        padded.join("  ").trim_end().to_string()
    };
    let mut out = line(header);
    out.push('\n');
    let rule: Vec<String> = widths.iter().map(|&w| "-".repeat(w)).collect();
    out.push_str(&line(&rule));
    out.push('\n');
    for r in rows {
        out.push_str(&line(r));
        out.push('\n');
    }
    out
}

pub fn pattern_names(m: &CoincidenceMatrix, labels: Option<&[usize]>) -> Vec<String> {
    m.columns.iter().map(|p| p.name(labels)).collect()
}

/// `state, D_{i,j}, ...` with probabilities.
pub fn coincidence_csv(m: &CoincidenceMatrix, labels: Option<&[usize]>) -> String {
    let mut header = vec!["state".to_string()];
    header.extend(pattern_names(m, labels));
    let rows: Vec<Vec<String>> = m
        .rows
        .iter()
        .zip(&m.entries)
        .map(|(l, e)| {
            let mut r = vec![l.to_string()];
            r.extend(e.iter().map(|p| format!("{p:.12}")));
            r
        })
        .collect();
    csv(&header, &rows)
}

/// States x detector patterns with filled (`#`) and empty (`.`) cells.
pub fn coincidence_grid(m: &CoincidenceMatrix, labels: Option<&[usize]>, tol: f64) -> String {
    let mut header = vec!["state".to_string()];
    header.extend(pattern_names(m, labels));
    let rows: Vec<Vec<String>> = m
        .rows
        .iter()
        .zip(&m.entries)
        .map(|(l, e)| {
            let mut r = vec![l.to_string()];
            r.extend(e.iter().map(|&p| if p > tol { "#" } else { "." }.to_string()));
            r
        })
        .collect();
    table(&header, &rows)
}
