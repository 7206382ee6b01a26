use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::Command as Process;

use serde::Serialize;
use serde_json::{json, Value};

use bellscope_core::criteria::{ll_distinguishability, limits, simplified_g1_distinguishability, LL_TOL};
use bellscope_core::detection::{
    bell_states, classify_states, coincidence_matrix, outcome_supports, partition_supports,
    requires_number_resolving, DetectorModel, LabeledState, OutcomeSupport, SUPPORT_TOL,
};
use bellscope_core::optics::{classify_group, compose_circuit, haar_random_unitary, CircuitSpec, Group, G1_TOL};
use bellscope_core::scenarios::{compare_json, run_scenario, Scenario};
use bellscope_core::search::{bound_audit, maximize_classes, SearchConfig};
use bellscope_core::{Error, Statistics, StateVector};

use crate::render::{coincidence_csv, coincidence_grid, csv, envelope, pretty, table};
use crate::selector::Selector;
use crate::{Command, Format, Model, OutputArgs};

/// Numeric tolerance when comparing scenario output with golden files.
pub const GOLDEN_TOL: f64 = 1e-9;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Io(String),
    Core(Error),
    Mismatch(String),
    Dirty(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl CliError {
    pub fn code(&self) -> (&'static str, u8) {
        match self {
            CliError::Usage(_) => ("E_USAGE", 2),
            CliError::Io(_) => ("E_IO", 3),
            CliError::Core(Error::Parse(_)) => ("E_PARSE", 3),
            CliError::Core(Error::BoundViolation(_)) => ("E_BOUND", 5),
            CliError::Core(_) => ("E_VALIDATION", 3),
            CliError::Mismatch(_) => ("E_MISMATCH", 4),
            CliError::Dirty(_) => ("E_DIRTY", 3),
        }
    }

    pub fn message(&self) -> String {
        match self {
            CliError::Core(e) => e.to_string(),
            CliError::Usage(m) | CliError::Io(m) | CliError::Mismatch(m) | CliError::Dirty(m) => m.clone(),
        }
    }
}

type CliResult<T> = Result<T, CliError>;

pub fn run(cmd: Command) -> CliResult<()> {
    match cmd {
        Command::Limits { n, d, out } => cmd_limits(n, d, &out),
        Command::Analyze {
            circuit,
            states,
            model,
            tol,
            coincidence_csv,
            out,
        } => cmd_analyze(&circuit, &states, model, tol, coincidence_csv.as_deref(), &out),
        Command::ClassifyGroup {
            circuit,
            haar_seed,
            n,
            d,
            statistics,
            tol,
            out,
        } => cmd_classify(circuit.as_deref(), haar_seed, n, d, statistics.map(Into::into), tol, &out),
        Command::LlCheck {
            circuit,
            states,
            tol,
            out,
        } => cmd_ll_check(&circuit, states.as_deref(), tol, &out),
        Command::Search {
            n,
            d,
            statistics,
            budget,
            restarts,
            step_scale,
            seed,
            target,
            basis,
            start,
            circuit_out,
            out,
        } => {
            let cfg = SearchConfig {
                n,
                d,
                statistics: statistics.into(),
                budget,
                restarts,
                step_scale,
                seed,
                target,
                basis: basis.into(),
                start: start.into(),
            };
            cmd_search(&cfg, circuit_out.as_deref(), &out)
        }
        Command::Audit {
            n,
            d,
            statistics,
            samples,
            seed,
            out,
        } => cmd_audit(n, d, statistics.into(), samples, seed, &out),
        Command::Reproduce {
            scenario,
            golden_dir,
            regenerate,
        } => cmd_reproduce(&scenario, &golden_dir, regenerate),
    }
}

fn positive_tol(tol: Option<f64>, default: f64) -> CliResult<f64> {
    match tol {
        None => Ok(default),
        Some(t) if t > 0.0 && t.is_finite() => Ok(t),
        Some(t) => Err(CliError::Usage(format!("tolerance must be positive, got {t}"))),
    }
}

fn read_text(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn write_text(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn load_circuit(path: &Path) -> CliResult<CircuitSpec> {
    CircuitSpec::from_json(&read_text(path)?).map_err(|e| match e {
        Error::Parse(m) => CliError::Core(Error::Parse(format!("{}: {m}", path.display()))),
        other => CliError::Core(other),
    })
}

fn emit(out: &OutputArgs, text: &str) -> CliResult<()> {
    match &out.output {
        Some(p) => write_text(p, text),
        None => {
            // A closed pipe (`| head`) is not an error worth reporting.
            match std::io::stdout().lock().write_all(text.as_bytes()) {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => {
                    Err(CliError::Io(format!("stdout: {e}")))
                }
                _ => Ok(()),
            }
        }
    }
}

/// Renders a flat list of key/value rows in the requested format.
fn emit_record(out: &OutputArgs, kind: &str, body: &impl Serialize) -> CliResult<()> {
    let v = envelope(kind, body);
    let text = match out.format {
        Format::Json => pretty(&v),
        Format::Csv | Format::TextTable => {
            let obj = v.as_object().expect("envelope is an object");
            let keys: Vec<String> = obj.keys().cloned().collect();
            let vals: Vec<String> = obj.values().map(scalar_text).collect();
            if out.format == Format::Csv {
                csv(&keys, &[vals])
            } else {
                let rows: Vec<Vec<String>> = keys.into_iter().zip(vals).map(|(k, v)| vec![k, v]).collect();
                table(&["field".into(), "value".into()], &rows)
            }
        }
    };
    emit(out, &text)
}

fn scalar_text(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn cmd_limits(n: usize, d: usize, out: &OutputArgs) -> CliResult<()> {
    let lim = limits(n, d).map_err(|e| CliError::Usage(e.to_string()))?;
    emit_record(out, "limits", &lim)
}

struct Analysis {
    supports: Vec<OutcomeSupport>,
    report: bellscope_core::detection::PartitionReport,
    flagged: Vec<usize>,
    flagged_labels: Vec<Vec<String>>,
}

fn analyze_states(u: &bellscope_core::Unitary, states: &[LabeledState], model: Model, tol: f64) -> CliResult<Analysis> {
    let nr_sup = outcome_supports(u, states, DetectorModel::NumberResolving, tol)?;
    let th_sup = outcome_supports(u, states, DetectorModel::Threshold, tol)?;
    let nr = partition_supports(&nr_sup, DetectorModel::NumberResolving)?;
    let th = partition_supports(&th_sup, DetectorModel::Threshold)?;
    let flagged = requires_number_resolving(&nr, &th)?;
    let flagged_labels = flagged
        .iter()
        .map(|&c| nr.class_labels(c).iter().map(ToString::to_string).collect())
        .collect();
    Ok(match model {
        Model::NumberResolving => Analysis {
            supports: nr_sup,
            report: nr,
            flagged,
            flagged_labels,
        },
        Model::Threshold => Analysis {
            supports: th_sup,
            report: th,
            flagged,
            flagged_labels,
        },
    })
}

fn cmd_analyze(
    circuit_path: &Path,
    selector: &str,
    model: Model,
    tol: Option<f64>,
    csv_path: Option<&Path>,
    out: &OutputArgs,
) -> CliResult<()> {
    let tol = positive_tol(tol, SUPPORT_TOL)?;
    let circuit = load_circuit(circuit_path)?;
    let states = Selector::parse(selector)?.states_for(&circuit)?;
    let u = compose_circuit(&circuit)?;
    let a = analyze_states(&u, &states, model, tol)?;
    let labels = circuit.detector_labels.as_deref();
    let matrix = coincidence_matrix(&a.report, &a.supports)?;
    if let Some(p) = csv_path {
        write_text(p, &coincidence_csv(&matrix, labels))?;
    }
    let class_labels: Vec<Vec<String>> = (0..a.report.class_count)
        .map(|c| a.report.class_labels(c).iter().map(ToString::to_string).collect())
        .collect();
    let text = match out.format {
        Format::Json => {
            let mut v = envelope("partition", &a.report);
            let obj = v.as_object_mut().expect("object");
            obj.insert("class_labels".into(), json!(class_labels));
            obj.insert("class_sizes".into(), json!(a.report.class_sizes()));
            obj.insert("requires_number_resolving".into(), json!(a.flagged_labels));
            obj.insert(
                "certified_classes".into(),
                json!(a.report.class_count - a.flagged.len()),
            );
            pretty(&v)
        }
        Format::Csv => {
            let rows: Vec<Vec<String>> = class_labels
                .iter()
                .enumerate()
                .map(|(i, l)| vec![i.to_string(), l.len().to_string(), l.join(" ")])
                .collect();
            csv(&["class".into(), "size".into(), "states".into()], &rows)
        }
        Format::TextTable => {
            let mut s = format!(
                "classes: {}  singletons: {}  number-resolving classes: {}\n\n",
                a.report.class_count,
                a.report.singleton_count,
                a.flagged.len()
            );
            s.push_str(&coincidence_grid(&matrix, labels, tol));
            s
        }
    };
    emit(out, &text)
}

#[allow(clippy::too_many_arguments)]
fn cmd_classify(
    circuit: Option<&Path>,
    haar_seed: Option<u64>,
    n: Option<usize>,
    d: Option<usize>,
    statistics: Option<Statistics>,
    tol: Option<f64>,
    out: &OutputArgs,
) -> CliResult<()> {
    let tol = positive_tol(tol, G1_TOL)?;
    let (u, n, d, stats, source) = match (circuit, haar_seed) {
        (Some(path), None) => {
            let c = load_circuit(path)?;
            let stats = statistics.unwrap_or(c.statistics);
            (compose_circuit(&c)?, c.photon_count, c.levels(), stats, path.display().to_string())
        }
        (None, Some(seed)) => {
            let (n, d) = (n.unwrap_or(0), d.unwrap_or(0));
            if n < 2 || d < 2 {
                return Err(CliError::Usage("--haar-seed needs --n >= 2 and --d >= 2".into()));
            }
            let stats = statistics.unwrap_or(Statistics::Boson);
            (haar_random_unitary(n * d, seed), n, d, stats, format!("haar seed {seed}"))
        }
        _ => return Err(CliError::Usage("give exactly one of --circuit or --haar-seed".into())),
    };
    let tag = classify_group(&u, n, d, stats, tol)?;
    let body = json!({
        "source": source,
        "n": n,
        "d": d,
        "statistics": stats,
        "group": tag.group,
        "witness": tag.witness.as_ref().map(|w| json!({
            "state": w.label.to_string(),
            "prefix": w.prefix.to_string(),
            "marginal": w.marginal,
        })),
    });
    emit_record(out, "group", &body)
}

fn cmd_ll_check(circuit_path: &Path, selector: Option<&str>, tol: Option<f64>, out: &OutputArgs) -> CliResult<()> {
    let tol = positive_tol(tol, LL_TOL)?;
    let circuit = load_circuit(circuit_path)?;
    let states = match selector {
        Some(s) => Selector::parse(s)?.states_for(&circuit)?,
        None => bell_states(circuit.photon_count, circuit.levels(), circuit.statistics)?,
    };
    let u = compose_circuit(&circuit)?;
    let vectors: Vec<StateVector> = states.iter().map(|s| s.state.clone()).collect();
    let ll = ll_distinguishability(&u, &vectors, tol)?;
    let supports = outcome_supports(&u, &states, DetectorModel::NumberResolving, SUPPORT_TOL)?;
    let group = classify_states(&u, &states, G1_TOL)?.group;
    let simplified = if group == Group::G1 {
        Some(simplified_g1_distinguishability(&u, &vectors, tol)?)
    } else {
        None
    };
    let mut rows = Vec::new();
    let mut disagreements = 0;
    for i in 0..states.len() {
        for j in i + 1..states.len() {
            let disjoint = supports[i].patterns().all(|p| !supports[j].probabilities.contains_key(p));
            let simp = simplified.as_ref().map(|s| s[i][j]);
            if ll[i][j] != disjoint || simp.is_some_and(|s| s != ll[i][j]) {
                disagreements += 1;
            }
            rows.push((states[i].label.to_string(), states[j].label.to_string(), ll[i][j], disjoint, simp));
        }
    }
    let text = match out.format {
        Format::Json => pretty(&envelope(
            "ll-check",
            &json!({
                "group": group,
                "pairs": rows.iter().map(|(a, b, l, dj, s)| json!({
                    "a": a, "b": b, "ll": l, "disjoint_supports": dj, "simplified": s,
                })).collect::<Vec<_>>(),
                "disagreements": disagreements,
            }),
        )),
        Format::Csv | Format::TextTable => {
            let header: Vec<String> = ["a", "b", "ll", "disjoint_supports", "simplified"]
                .iter()
                .map(ToString::to_string)
                .collect();
            let body: Vec<Vec<String>> = rows
                .iter()
                .map(|(a, b, l, dj, s)| {
                    vec![
                        a.clone(),
                        b.clone(),
                        l.to_string(),
                        dj.to_string(),
                        s.map_or("-".into(), |x| x.to_string()),
                    ]
                })
                .collect();
            if out.format == Format::Csv {
                csv(&header, &body)
            } else {
                format!("{}disagreements: {disagreements}\n", table(&header, &body))
            }
        }
    };
    emit(out, &text)?;
    if disagreements > 0 {
        return Err(CliError::Core(Error::Contract(format!(
            "{disagreements} pairs where the LL criterion and support disjointness disagree"
        ))));
    }
    Ok(())
}

fn cmd_search(cfg: &SearchConfig, circuit_out: Option<&Path>, out: &OutputArgs) -> CliResult<()> {
    let result = maximize_classes(cfg)?;
    if let Some(p) = circuit_out {
        write_text(p, &(result.to_circuit().to_json() + "\n"))?;
    }
    match out.format {
        Format::Json => emit(out, &pretty(&envelope("search", &result))),
        _ => emit_record(
            out,
            "search",
            &json!({
                "n": cfg.n,
                "d": cfg.d,
                "best_classes": result.best_classes,
                "best_singletons": result.best_singletons,
                "group": result.group.group,
                "evaluations": result.evaluations,
                "not_converged": result.not_converged,
            }),
        ),
    }
}

fn cmd_audit(n: usize, d: usize, stats: Statistics, samples: usize, seed: u64, out: &OutputArgs) -> CliResult<()> {
    let report = bound_audit(n, d, stats, samples, seed)?;
    match out.format {
        Format::Json => emit(out, &pretty(&envelope("audit", &report))),
        Format::Csv | Format::TextTable => {
            let header = vec!["classes".to_string(), "samples".to_string()];
            let rows: Vec<Vec<String>> = report
                .histogram
                .iter()
                .map(|(k, v)| vec![k.to_string(), v.to_string()])
                .collect();
            let text = if out.format == Format::Csv {
                csv(&header, &rows)
            } else {
                format!(
                    "{}G1 fraction: {:.4}  max G1 classes: {}  bound: {}\n",
                    table(&header, &rows),
                    report.g1_fraction,
                    report.max_g1_classes,
                    report.bound
                )
            };
            emit(out, &text)
        }
    }
}

fn working_tree_clean(dir: &Path) -> CliResult<()> {
    let output = Process::new("git")
        .arg("-C")
        .arg(dir)
        .args(["status", "--porcelain"])
        .output()
        .map_err(|e| CliError::Dirty(format!("cannot run git to check the working tree: {e}")))?;
    if !output.status.success() {
        return Err(CliError::Dirty(format!(
            "{} is not inside a git working tree",
            dir.display()
        )));
    }
    if !output.stdout.is_empty() {
        return Err(CliError::Dirty(
            "working tree has uncommitted changes; commit or stash before --regenerate".into(),
        ));
    }
    Ok(())
}

fn golden_path(dir: &Path, s: Scenario) -> PathBuf {
    dir.join(format!("{}.json", s.name()))
}

fn cmd_reproduce(which: &str, dir: &Path, regenerate: bool) -> CliResult<()> {
    let scenarios: Vec<Scenario> = if which == "all" {
        Scenario::ALL.to_vec()
    } else {
        vec![which.parse::<Scenario>().map_err(|e| CliError::Usage(e.to_string()))?]
    };
    if regenerate {
        working_tree_clean(dir)?;
        for s in scenarios {
            let path = golden_path(dir, s);
            write_text(&path, &pretty(&run_scenario(s)?))?;
            println!("WROTE {}", path.display());
        }
        return Ok(());
    }
    let mut failed = Vec::new();
    for s in scenarios {
        let path = golden_path(dir, s);
        let expected: Value = serde_json::from_str(&read_text(&path)?)
            .map_err(|e| CliError::Core(Error::Parse(format!("{}: {e}", path.display()))))?;
        let actual = run_scenario(s)?;
        let diffs = compare_json(&expected, &actual, GOLDEN_TOL);
        if diffs.is_empty() {
            println!("PASS {s}");
        } else {
            println!("FAIL {s}");
            for m in &diffs {
                println!("  {}: expected {} got {}", m.path, m.expected, m.actual);
            }
            failed.push(s.name());
        }
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Mismatch(format!("golden mismatch in {}", failed.join(", "))))
    }
}
