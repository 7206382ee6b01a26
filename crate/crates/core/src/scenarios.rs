//! Reproduction scenarios and the tolerant JSON comparison used against their
//! committed golden outputs.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use serde_json::{json, Value};

use crate::criteria::limits;
use crate::detection::{
    bell_states, distinguishability_partition, hyper_states, outcome_supports, partition_supports,
    requires_number_resolving, DetectorModel, PartitionReport, SUPPORT_TOL,
};
use crate::error::{Error, Result};
use crate::fock::{evolve, StateVector, Statistics};
use crate::hyper::{all_hyper_labels, HyperLabel};
use crate::optics::{build_fig1_circuit, build_fig3_circuit, compose_circuit, device_unitary, DeviceKind, DeviceSpec};

pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// The six `(n, D)` systems of the limit table with their `nD - n + 1` values.
pub const TABLE1: [(usize, usize, usize); 6] = [(3, 2, 4), (3, 3, 7), (3, 4, 10), (4, 2, 5), (4, 3, 9), (4, 4, 13)];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    Table1,
    Fig1,
    Fig4,
    Hom,
}

impl Scenario {
    pub const ALL: [Scenario; 4] = [Scenario::Table1, Scenario::Fig1, Scenario::Fig4, Scenario::Hom];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::Table1 => "table1",
            Scenario::Fig1 => "fig1",
            Scenario::Fig4 => "fig4",
            Scenario::Hom => "hom",
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Scenario::ALL
            .into_iter()
            .find(|sc| sc.name() == s)
            .ok_or_else(|| Error::Parse(format!("unknown scenario `{s}` (table1, fig1, fig4, hom)")))
    }
}

fn class_label_lists(report: &PartitionReport) -> Vec<Vec<String>> {
    (0..report.classes.len())
        .map(|c| report.class_labels(c).iter().map(ToString::to_string).collect())
        .collect()
}

fn table1() -> Result<Value> {
    let rows = TABLE1
        .iter()
        .map(|&(n, d, _)| limits(n, d).map(|l| serde_json::to_value(l).expect("limits serialize")))
        .collect::<Result<Vec<_>>>()?;
    Ok(json!({ "rows": rows }))
}

fn fig1() -> Result<Value> {
    let u = compose_circuit(&build_fig1_circuit(4, 2))?;
    let states = bell_states(4, 2, Statistics::Boson)?;
    let report = distinguishability_partition(&u, &states, DetectorModel::NumberResolving, SUPPORT_TOL)?;
    Ok(json!({
        "n": 4,
        "d": 2,
        "class_count": report.class_count,
        "singleton_count": report.singleton_count,
        "class_sizes": report.class_sizes(),
        "classes": class_label_lists(&report),
    }))
}

/// The fig3 circuit on the 64 hyperentangled states, both detector models.
pub struct Fig4Analysis {
    pub number_resolving: PartitionReport,
    pub threshold: PartitionReport,
    /// Classes of the number-resolving report flagged by
    /// `requires_number_resolving`.
    pub flagged: Vec<usize>,
    /// `Phi_1` patterns (relabeled detectors) with probabilities.
    pub phi1: Vec<(String, f64)>,
    /// `Phi_49` patterns (relabeled detectors) with probabilities.
    pub phi49: Vec<(String, f64)>,
    /// Largest deviation of any support total from one.
    pub max_norm_error: f64,
}

pub fn fig4_analysis() -> Result<Fig4Analysis> {
    let circuit = build_fig3_circuit();
    let labels = circuit.detector_labels.clone().unwrap_or_default();
    let u = compose_circuit(&circuit)?;
    let states = hyper_states(&all_hyper_labels())?;
    let nr = outcome_supports(&u, &states, DetectorModel::NumberResolving, SUPPORT_TOL)?;
    let th = outcome_supports(&u, &states, DetectorModel::Threshold, SUPPORT_TOL)?;
    let number_resolving = partition_supports(&nr, DetectorModel::NumberResolving)?;
    let threshold = partition_supports(&th, DetectorModel::Threshold)?;
    let flagged = requires_number_resolving(&number_resolving, &threshold)?;
    let named = |seq: usize| -> Result<Vec<(String, f64)>> {
        let idx = HyperLabel::from_sequence(seq)?.sequence_number() - 1;
        let mut rows: Vec<(String, f64)> = nr[idx]
            .probabilities
            .iter()
            .map(|(p, &pr)| (p.name(Some(&labels)), pr))
            .collect();
        rows.sort_by(|a, b| natural_key(&a.0).cmp(&natural_key(&b.0)));
        Ok(rows)
    };
    let max_norm_error = nr
        .iter()
        .chain(&th)
        .map(|s| (s.total() - 1.0).abs())
        .fold(0.0, f64::max);
    Ok(Fig4Analysis {
        phi1: named(1)?,
        phi49: named(49)?,
        number_resolving,
        threshold,
        flagged,
        max_norm_error,
    })
}

fn natural_key(name: &str) -> Vec<usize> {
    name.trim_start_matches("D_{")
        .trim_end_matches('}')
        .split(',')
        .filter_map(|s| s.parse().ok())
        .collect()
}

fn fig4() -> Result<Value> {
    let a = fig4_analysis()?;
    let pairs = |rows: &[(String, f64)]| -> Vec<Value> {
        rows.iter()
            .map(|(p, pr)| json!({ "pattern": p, "probability": pr }))
            .collect()
    };
    let flagged_labels: Vec<Vec<String>> = a
        .flagged
        .iter()
        .map(|&c| a.number_resolving.class_labels(c).iter().map(ToString::to_string).collect())
        .collect();
    Ok(json!({
        "class_count": a.number_resolving.class_count,
        "class_sizes": a.number_resolving.class_sizes(),
        "classes": class_label_lists(&a.number_resolving),
        "phi1_coincidences": pairs(&a.phi1),
        "phi49_coincidences": pairs(&a.phi49),
        "threshold_class_count": a.threshold.class_count,
        "threshold_certified_classes": a.threshold.class_count - a.flagged.len(),
        "flagged_classes": flagged_labels,
    }))
}

/// Two photons entering the two ports of a 50:50 beam splitter.
pub fn hom_distribution() -> Result<Vec<(String, f64)>> {
    let u = device_unitary(&DeviceSpec::pair(DeviceKind::BeamSplitter, 0, 1), 2)?;
    let psi = StateVector::from_terms([(vec![0, 1], num_complex::Complex64::new(1.0, 0.0))], 2, Statistics::Boson)?;
    let dist = evolve(&u, &psi)?;
    Ok(crate::fock::enumerate_patterns(2, 2, Statistics::Boson)
        .into_iter()
        .map(|p| {
            let pr = dist.get(&p).copied().unwrap_or(0.0);
            (p.to_string(), pr)
        })
        .collect())
}

fn hom() -> Result<Value> {
    let rows = hom_distribution()?;
    Ok(json!({
        "outcomes": rows
            .iter()
            .map(|(p, pr)| json!({ "pattern": p, "probability": pr }))
            .collect::<Vec<_>>(),
    }))
}

/// Computed values of a scenario, tagged with schema version and name.
pub fn run_scenario(s: Scenario) -> Result<Value> {
    let mut body = match s {
        Scenario::Table1 => table1()?,
        Scenario::Fig1 => fig1()?,
        Scenario::Fig4 => fig4()?,
        Scenario::Hom => hom()?,
    };
    let obj = body.as_object_mut().expect("scenario bodies are objects");
    obj.insert("schema_version".into(), json!(REPORT_SCHEMA_VERSION));
    obj.insert("scenario".into(), json!(s.name()));
    Ok(body)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Mismatch {
    pub path: String,
    pub expected: String,
    pub actual: String,
}

/// Structural comparison with absolute tolerance `tol` on numbers.
pub fn compare_json(expected: &Value, actual: &Value, tol: f64) -> Vec<Mismatch> {
    let mut out = Vec::new();
    walk("$", expected, actual, tol, &mut out);
    out
}

fn walk(path: &str, e: &Value, a: &Value, tol: f64, out: &mut Vec<Mismatch>) {
    let mut miss = || {
        out.push(Mismatch {
            path: path.to_string(),
            expected: e.to_string(),
            actual: a.to_string(),
        })
    };
    match (e, a) {
        (Value::Number(x), Value::Number(y)) => {
            let (x, y) = (x.as_f64().unwrap_or(f64::NAN), y.as_f64().unwrap_or(f64::NAN));
            if !((x - y).abs() <= tol) {
                miss();
            }
        }
        (Value::Array(xs), Value::Array(ys)) => {
            if xs.len() != ys.len() {
                miss();
                return;
            }
            for (i, (x, y)) in xs.iter().zip(ys).enumerate() {
                walk(&format!("{path}[{i}]"), x, y, tol, out);
            }
        }
        (Value::Object(xs), Value::Object(ys)) => {
            for (k, x) in xs {
                match ys.get(k) {
                    Some(y) => walk(&format!("{path}.{k}"), x, y, tol, out),
                    None => out.push(Mismatch {
                        path: format!("{path}.{k}"),
                        expected: x.to_string(),
                        actual: "missing".into(),
                    }),
                }
            }
            for (k, y) in ys {
                if !xs.contains_key(k) {
                    out.push(Mismatch {
                        path: format!("{path}.{k}"),
                        expected: "missing".into(),
                        actual: y.to_string(),
                    });
                }
            }
        }
        _ if e == a => {}
        _ => miss(),
    }
}
