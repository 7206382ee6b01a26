//! Outcome supports and the partition of a state set into classes that a
//! single click pattern can tell apart.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize, Serializer};

use crate::bell::{all_labels, bell_state_with, BellLabel};
use crate::error::{Error, Result};
use crate::fock::{ClickPattern, Distribution, PatternSpace, StateVector, Statistics, NORM_TOL};
use crate::hyper::{hyper_bell_state, HyperLabel};
use crate::linalg::Unitary;
use crate::optics::{first_zero_prefix, Group, GroupTag, Witness};

/// Support-membership tolerance on probabilities.
pub const SUPPORT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DetectorModel {
    NumberResolving,
    Threshold,
}

/// Name of an input state: a qudit Bell label or a hyperentangled label.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum StateLabel {
    Bell(BellLabel),
    Hyper(HyperLabel),
}

impl fmt::Display for StateLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StateLabel::Bell(b) => write!(f, "{b}"),
            StateLabel::Hyper(h) => write!(f, "{h}"),
        }
    }
}

impl Serialize for StateLabel {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// A labeled input state.
#[derive(Debug, Clone)]
pub struct LabeledState {
    pub label: StateLabel,
    pub state: StateVector,
}

/// All `D^n` Bell states in label order.
pub fn bell_states(n: usize, d: usize, statistics: Statistics) -> Result<Vec<LabeledState>> {
    all_labels(n, d)?
        .into_iter()
        .map(|l| {
            Ok(LabeledState {
                state: bell_state_with(&l, statistics)?,
                label: StateLabel::Bell(l),
            })
        })
        .collect()
}

/// Hyperentangled states for the given labels, in the given order.
pub fn hyper_states(labels: &[HyperLabel]) -> Result<Vec<LabeledState>> {
    labels
        .iter()
        .map(|h| {
            Ok(LabeledState {
                state: hyper_bell_state(h)?,
                label: StateLabel::Hyper(*h),
            })
        })
        .collect()
}

/// Output patterns of one state that occur with probability above `tol`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutcomeSupport {
    pub state: StateLabel,
    pub probabilities: BTreeMap<ClickPattern, f64>,
}

impl OutcomeSupport {
    pub fn patterns(&self) -> impl Iterator<Item = &ClickPattern> {
        self.probabilities.keys()
    }

    pub fn total(&self) -> f64 {
        self.probabilities.values().sum()
    }
}

/// Merges patterns with equal detector sets, as seen by on/off detectors.
pub fn threshold_collapse(dist: &Distribution) -> Distribution {
    let mut out = Distribution::new();
    for (pattern, &p) in dist {
        *out.entry(pattern.support()).or_insert(0.0) += p;
    }
    out
}

fn support_from(label: StateLabel, dist: Distribution, model: DetectorModel, tol: f64) -> OutcomeSupport {
    let dist = match model {
        DetectorModel::NumberResolving => dist,
        DetectorModel::Threshold => threshold_collapse(&dist),
    };
    OutcomeSupport {
        state: label,
        probabilities: dist.into_iter().filter(|(_, p)| *p > tol).collect(),
    }
}

pub fn outcome_support(
    u: &Unitary,
    state: &LabeledState,
    model: DetectorModel,
    tol: f64,
) -> Result<OutcomeSupport> {
    let dist = crate::fock::evolve(u, &state.state)?;
    Ok(support_from(state.label.clone(), dist, model, tol))
}

/// Supports of every state, computed in parallel, in input order.
pub fn outcome_supports(
    u: &Unitary,
    states: &[LabeledState],
    model: DetectorModel,
    tol: f64,
) -> Result<Vec<OutcomeSupport>> {
    let first = states.first().ok_or(Error::Arity { expected: 1, got: 0 })?;
    let (m, n, stats) = (
        first.state.mode_count(),
        first.state.photon_number(),
        first.state.statistics(),
    );
    for s in states {
        if s.state.mode_count() != m || s.state.photon_number() != n || s.state.statistics() != stats {
            return Err(Error::Arity {
                expected: n,
                got: s.state.photon_number(),
            });
        }
    }
    let space = PatternSpace::new(m, n, stats);
    states
        .par_iter()
        .map(|s| Ok(support_from(s.label.clone(), space.evolve(u, &s.state)?, model, tol)))
        .collect()
}

/// Disjoint-set forest with path halving; merges keep the smaller root.
#[derive(Debug, Clone)]
pub(crate) struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    pub(crate) fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    pub(crate) fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    pub(crate) fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }

    /// Components as sorted member lists, ordered by smallest member.
    pub(crate) fn components(&mut self) -> Vec<Vec<usize>> {
        let mut by_root: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for x in 0..self.parent.len() {
            let r = self.find(x);
            by_root.entry(r).or_default().push(x);
        }
        by_root.into_values().collect()
    }
}

/// Class count and singleton count from per-state probability rows over a
/// shared pattern list.
pub fn count_classes(rows: &[Vec<f64>], tol: f64) -> (usize, usize) {
    let mut uf = UnionFind::new(rows.len());
    let width = rows.first().map_or(0, Vec::len);
    let mut owner = vec![usize::MAX; width];
    for (s, row) in rows.iter().enumerate() {
        for (k, &p) in row.iter().enumerate() {
            if p > tol {
                if owner[k] == usize::MAX {
                    owner[k] = s;
                } else {
                    uf.union(owner[k], s);
                }
            }
        }
    }
    let comps = uf.components();
    let singles = comps.iter().filter(|c| c.len() == 1).count();
    (comps.len(), singles)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PartitionReport {
    pub detector_model: DetectorModel,
    /// Input state labels, in input order.
    pub states: Vec<StateLabel>,
    /// Classes as indices into `states`, ordered by smallest member.
    pub classes: Vec<Vec<usize>>,
    /// Union of the member supports, per class.
    pub class_supports: Vec<Vec<ClickPattern>>,
    /// Indices of states that form a class on their own.
    pub fully_distinguished: Vec<usize>,
    pub class_count: usize,
    pub singleton_count: usize,
    pub channel_capacity_bits: f64,
    pub notes: Vec<String>,
}

impl PartitionReport {
    pub fn class_labels(&self, class: usize) -> Vec<&StateLabel> {
        self.classes[class].iter().map(|&i| &self.states[i]).collect()
    }

    /// Multiset of class sizes, ascending.
    pub fn class_sizes(&self) -> Vec<usize> {
        let mut sizes: Vec<usize> = self.classes.iter().map(Vec::len).collect();
        sizes.sort_unstable();
        sizes
    }

    /// Index of the class containing state `i`.
    pub fn class_of(&self, i: usize) -> usize {
        self.classes
            .iter()
            .position(|c| c.contains(&i))
            .expect("classes cover every state")
    }
}

/// Connected components of the state/pattern graph built from supports.
pub fn partition_supports(supports: &[OutcomeSupport], model: DetectorModel) -> Result<PartitionReport> {
    if supports.is_empty() {
        return Err(Error::Arity { expected: 1, got: 0 });
    }
    let mut uf = UnionFind::new(supports.len());
    let mut owner: BTreeMap<&ClickPattern, usize> = BTreeMap::new();
    for (i, s) in supports.iter().enumerate() {
        for p in s.patterns() {
            match owner.get(p) {
                Some(&j) => uf.union(i, j),
                None => {
                    owner.insert(p, i);
                }
            }
        }
    }
    let classes = uf.components();
    let class_supports: Vec<Vec<ClickPattern>> = classes
        .iter()
        .map(|members| {
            let set: BTreeSet<&ClickPattern> =
                members.iter().flat_map(|&i| supports[i].patterns()).collect();
            set.into_iter().cloned().collect()
        })
        .collect();
    let fully_distinguished: Vec<usize> = classes
        .iter()
        .filter(|c| c.len() == 1)
        .map(|c| c[0])
        .collect();
    let mut notes = Vec::new();
    if class_supports
        .iter()
        .any(|sup| sup.iter().any(ClickPattern::has_repeats))
    {
        notes.push("requires number resolving".to_string());
    }
    if supports.iter().any(|s| s.probabilities.is_empty()) {
        notes.push("a state has empty support".to_string());
    }
    Ok(PartitionReport {
        detector_model: model,
        states: supports.iter().map(|s| s.state.clone()).collect(),
        class_count: classes.len(),
        singleton_count: fully_distinguished.len(),
        channel_capacity_bits: (classes.len() as f64).log2(),
        classes,
        class_supports,
        fully_distinguished,
        notes,
    })
}

pub fn distinguishability_partition(
    u: &Unitary,
    states: &[LabeledState],
    model: DetectorModel,
    tol: f64,
) -> Result<PartitionReport> {
    partition_supports(&outcome_supports(u, states, model, tol)?, model)
}

/// Dense state x pattern probability table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoincidenceMatrix {
    pub rows: Vec<StateLabel>,
    pub columns: Vec<ClickPattern>,
    pub entries: Vec<Vec<f64>>,
}

/// Rows in state order; columns are every pattern in any class support,
/// ordered lexicographically.
pub fn coincidence_matrix(report: &PartitionReport, supports: &[OutcomeSupport]) -> Result<CoincidenceMatrix> {
    if supports.len() != report.states.len()
        || supports.iter().zip(&report.states).any(|(s, l)| &s.state != l)
    {
        return Err(Error::Contract("supports do not match the report's states".into()));
    }
    let columns: Vec<ClickPattern> = report
        .class_supports
        .iter()
        .flatten()
        .cloned()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let entries = supports
        .iter()
        .map(|s| {
            columns
                .iter()
                .map(|c| s.probabilities.get(c).copied().unwrap_or(0.0))
                .collect()
        })
        .collect();
    Ok(CoincidenceMatrix {
        rows: report.states.clone(),
        columns,
        entries,
    })
}

/// Number-resolving classes that cannot be certified with on/off detectors:
/// those whose support contains a pattern with two clicks in one detector,
/// or that merge with another class once multiplicities are erased.
/// Returned as class indices of `report_nr`.
pub fn requires_number_resolving(
    report_nr: &PartitionReport,
    report_th: &PartitionReport,
) -> Result<Vec<usize>> {
    if report_nr.detector_model != DetectorModel::NumberResolving
        || report_th.detector_model != DetectorModel::Threshold
    {
        return Err(Error::Contract(
            "expected a number-resolving and a threshold report".into(),
        ));
    }
    if report_nr.states != report_th.states {
        return Err(Error::Contract("reports cover different states".into()));
    }
    Ok((0..report_nr.classes.len())
        .filter(|&c| {
            let repeated = report_nr.class_supports[c].iter().any(ClickPattern::has_repeats);
            let members = &report_nr.classes[c];
            let th_class = report_th.class_of(members[0]);
            let merged = report_th.classes[th_class].len() != members.len();
            repeated || merged
        })
        .collect())
}

/// Checks that every support row sums to one.
pub fn check_normalization(supports: &[OutcomeSupport], model_tol: f64) -> Result<()> {
    for s in supports {
        let total = s.total();
        if (total - 1.0).abs() > NORM_TOL + model_tol * s.probabilities.len() as f64 {
            return Err(Error::Contract(format!(
                "support of {} sums to {total}",
                s.state
            )));
        }
    }
    Ok(())
}

/// G1/G2 classification over an arbitrary labeled state set.
pub fn classify_states(u: &Unitary, states: &[LabeledState], tol: f64) -> Result<GroupTag<StateLabel>> {
    let vectors: Vec<StateVector> = states.iter().map(|s| s.state.clone()).collect();
    Ok(match first_zero_prefix(u, &vectors, tol)? {
        None => GroupTag {
            group: Group::G1,
            witness: None,
        },
        Some((idx, prefix, marginal)) => GroupTag {
            group: Group::G2,
            witness: Some(Witness {
                label: states[idx].label.clone(),
                prefix,
                marginal,
            }),
        },
    })
}
