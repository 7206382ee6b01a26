//! Class-count maximization over passive unitaries and the Haar audit of the
//! G1 bound.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use nalgebra::linalg::SymmetricEigen;
use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution as _, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::criteria::limits;
use crate::detection::{bell_states, classify_states, count_classes, hyper_states, StateLabel, SUPPORT_TOL};
use crate::error::{Error, Result};
use crate::fock::{PatternSpace, StateVector, Statistics, MAX_PHOTONS};
use crate::hyper::{all_hyper_labels, LEVELS};
use crate::linalg::{CMatrix, Unitary, ONE, ZERO};
use crate::optics::{
    classify_group, haar_random_unitary, haar_with_rng, CircuitSpec, DeviceSpec, Group, GroupTag, Provenance,
    G1_TOL,
};

/// Largest mode count the search accepts.
pub const MAX_SEARCH_MODES: usize = 16;
/// Largest photon number the search accepts.
pub const MAX_SEARCH_PHOTONS: usize = 4;

const SHRINK: f64 = 0.8;
const PATIENCE: usize = 20;
const MIN_STEP: f64 = 1e-4;
const REORTHO_EVERY: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SearchBasis {
    /// The `D^n` cyclic Bell states.
    Cyclic,
    /// The 64 hyperentangled two-photon states (requires n = 2, D = 8).
    Hyper,
}

/// Where each restart begins.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StartMode {
    Identity,
    Haar,
    /// Identity on even restarts, Haar on odd ones.
    Alternate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub n: usize,
    pub d: usize,
    pub statistics: Statistics,
    /// Proposal evaluations shared across restarts. Zero evaluates the start
    /// points only.
    pub budget: usize,
    pub restarts: usize,
    /// Initial continuous step size in (0, 1].
    pub step_scale: f64,
    pub seed: u64,
    /// Stop a restart once it reaches this many classes.
    #[serde(default)]
    pub target: Option<usize>,
    pub basis: SearchBasis,
    pub start: StartMode,
}

impl SearchConfig {
    pub fn new(n: usize, d: usize, budget: usize, seed: u64) -> Self {
        SearchConfig {
            n,
            d,
            statistics: Statistics::Boson,
            budget,
            restarts: 1,
            step_scale: 0.3,
            seed,
            target: None,
            basis: SearchBasis::Cyclic,
            start: StartMode::Alternate,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 || self.d < 2 {
            return Err(Error::Contract(format!("search needs n >= 2 and D >= 2, got ({}, {})", self.n, self.d)));
        }
        if self.n > MAX_SEARCH_PHOTONS || self.n > MAX_PHOTONS || self.n * self.d > MAX_SEARCH_MODES {
            return Err(Error::Resource(format!(
                "search limited to n <= {MAX_SEARCH_PHOTONS} and nD <= {MAX_SEARCH_MODES}, got ({}, {})",
                self.n, self.d
            )));
        }
        if self.restarts == 0 {
            return Err(Error::Contract("restarts must be at least 1".into()));
        }
        if self.budget > 0 && self.budget < self.restarts {
            return Err(Error::Contract(format!(
                "budget {} is smaller than restarts {}",
                self.budget, self.restarts
            )));
        }
        if !(self.step_scale > 0.0 && self.step_scale <= 1.0) {
            return Err(Error::Contract(format!("step_scale must lie in (0, 1], got {}", self.step_scale)));
        }
        if self.basis == SearchBasis::Hyper && (self.n != 2 || self.d != LEVELS) {
            return Err(Error::Contract(format!(
                "hyper basis needs (n, D) = (2, {LEVELS}), got ({}, {})",
                self.n, self.d
            )));
        }
        if self.basis == SearchBasis::Hyper && self.statistics != Statistics::Boson {
            return Err(Error::Statistics("hyper basis is bosonic".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SearchResult {
    pub config: SearchConfig,
    pub best_unitary: Unitary,
    pub best_classes: usize,
    pub best_singletons: usize,
    pub group: GroupTag<StateLabel>,
    /// `(evaluation index, best class count so far)` at every improvement.
    pub trace: Vec<(usize, usize)>,
    pub evaluations: usize,
    /// Index of the restart that produced the best unitary.
    pub best_restart: usize,
    /// Target (or the G1 bound when no target is set) not reached.
    pub not_converged: bool,
}

impl SearchResult {
    /// The best unitary as a one-device circuit with its search provenance.
    pub fn to_circuit(&self) -> CircuitSpec {
        let modes = self.best_unitary.dim();
        let mut c = CircuitSpec::new(modes, self.config.n, self.config.statistics);
        c.devices
            .push(DeviceSpec::custom((0..modes).collect(), self.best_unitary.matrix()));
        c.provenance = Some(Provenance {
            generator: "bellscope search".into(),
            seed: self.config.seed,
            budget: self.config.budget,
            restarts: self.config.restarts,
            evaluations: self.evaluations,
            best_classes: self.best_classes,
            trace: self.trace.clone(),
        });
        c
    }
}

/// Lexicographic objective: classes, then singletons, then the summed
/// pairwise total-variation distance.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Score {
    classes: usize,
    singletons: usize,
    spread: f64,
}

impl Score {
    fn at_least(&self, other: &Score) -> bool {
        (self.classes, self.singletons) > (other.classes, other.singletons)
            || ((self.classes, self.singletons) == (other.classes, other.singletons) && self.spread >= other.spread)
    }
}

struct Evaluator {
    space: PatternSpace,
    states: Vec<StateVector>,
}

impl Evaluator {
    fn score(&self, u: &Unitary) -> Result<Score> {
        let rows: Vec<Vec<f64>> = self
            .states
            .iter()
            .map(|psi| self.space.probabilities(u, psi))
            .collect::<Result<_>>()?;
        let (classes, singletons) = count_classes(&rows, SUPPORT_TOL);
        let mut spread = 0.0;
        for i in 0..rows.len() {
            for j in i + 1..rows.len() {
                let tv: f64 = rows[i].iter().zip(&rows[j]).map(|(a, b)| (a - b).abs()).sum();
                spread += 0.5 * tv;
            }
        }
        Ok(Score {
            classes,
            singletons,
            spread,
        })
    }
}

fn search_states(cfg: &SearchConfig) -> Result<Vec<crate::detection::LabeledState>> {
    match cfg.basis {
        SearchBasis::Cyclic => bell_states(cfg.n, cfg.d, cfg.statistics),
        SearchBasis::Hyper => hyper_states(&all_hyper_labels()),
    }
}

/// Random Hermitian generator with unit Frobenius norm.
fn random_hermitian<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CMatrix {
    let mut h = CMatrix::from_fn(dim, dim, |_, _| {
        Complex64::new(StandardNormal.sample(rng), StandardNormal.sample(rng))
    });
    h = (&h + h.adjoint()) * Complex64::new(0.5, 0.0);
    let norm = h.norm();
    h / Complex64::new(norm.max(f64::MIN_POSITIVE), 0.0)
}

/// `exp(i eps H)` for Hermitian `H`.
fn exp_i_hermitian(h: CMatrix, eps: f64) -> CMatrix {
    let eig = SymmetricEigen::new(h);
    let v = eig.eigenvectors;
    let phases = CMatrix::from_diagonal(&eig.eigenvalues.map(|l| Complex64::from_polar(1.0, eps * l)));
    &v * phases * v.adjoint()
}

/// One elementary device on `n` blocks of `d` levels, as a full matrix.
fn elementary_move<R: Rng + ?Sized>(n: usize, d: usize, rng: &mut R) -> CMatrix {
    let m = n * d;
    let mut g = CMatrix::identity(m, m);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let pick_pair = |rng: &mut R| {
        let a = rng.random_range(0..m);
        let mut b = rng.random_range(0..m - 1);
        if b >= a {
            b += 1;
        }
        (a, b)
    };
    match rng.random_range(0..6) {
        0 => {
            let (a, b) = pick_pair(rng);
            let h = Complex64::new(s, 0.0);
            g[(a, a)] = h;
            g[(a, b)] = h;
            g[(b, a)] = h;
            g[(b, b)] = -h;
        }
        1 => {
            let a = rng.random_range(0..m);
            let q = if rng.random_bool(0.5) { 4.0 } else { d as f64 };
            g[(a, a)] = Complex64::from_polar(1.0, 2.0 * PI / q);
        }
        2 => {
            let (a, b) = pick_pair(rng);
            g[(a, a)] = ZERO;
            g[(b, b)] = ZERO;
            g[(a, b)] = ONE;
            g[(b, a)] = ONE;
        }
        3 => {
            let k1 = rng.random_range(0..n);
            let mut k2 = rng.random_range(0..n - 1);
            if k2 >= k1 {
                k2 += 1;
            }
            let h = Complex64::new(s, 0.0);
            for l in 0..d {
                let (a, b) = (k1 * d + l, k2 * d + l);
                g[(a, a)] = h;
                g[(a, b)] = h;
                g[(b, a)] = h;
                g[(b, b)] = -h;
            }
        }
        4 => {
            let k = rng.random_range(0..n);
            let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            let norm = Complex64::new(1.0 / (d as f64).sqrt(), 0.0);
            for r in 0..d {
                for c in 0..d {
                    g[(k * d + r, k * d + c)] =
                        norm * Complex64::from_polar(1.0, sign * 2.0 * PI * (r * c) as f64 / d as f64);
                }
            }
        }
        _ => {
            let k = rng.random_range(0..n);
            let mut perm: Vec<usize> = (0..d).collect();
            perm.shuffle(rng);
            for r in 0..d {
                for c in 0..d {
                    g[(k * d + r, k * d + c)] = if perm[c] == r { ONE } else { ZERO };
                }
            }
        }
    }
    g
}

/// Product of `depth` random elementary devices (beam splitters, phases,
/// swaps, block beam splitters, block DFTs, block permutations). These
/// structured unitaries carry exact zeros that Haar samples never have.
pub fn random_elementary_circuit(n: usize, d: usize, depth: usize, seed: u64) -> Unitary {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut m = CMatrix::identity(n * d, n * d);
    for _ in 0..depth {
        m = elementary_move(n, d, &mut rng) * m;
    }
    Unitary::new_unchecked(m).reorthonormalize()
}

struct RestartOutcome {
    best: Unitary,
    score: Score,
    /// `(local evaluation index, classes)` at every improvement.
    trace: Vec<(usize, usize)>,
    evaluations: usize,
}

fn start_point(cfg: &SearchConfig, restart: usize, rng: &mut ChaCha8Rng) -> Unitary {
    let dim = cfg.n * cfg.d;
    let haar = match cfg.start {
        StartMode::Identity => false,
        StartMode::Haar => true,
        StartMode::Alternate => restart % 2 == 1,
    };
    if haar {
        haar_with_rng(dim, rng)
    } else {
        Unitary::identity(dim)
    }
}

fn run_restart(cfg: &SearchConfig, eval: &Evaluator, restart: usize, budget: usize) -> Result<RestartOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(restart as u64));
    let target = cfg.target.unwrap_or(usize::MAX);
    let mut current = start_point(cfg, restart, &mut rng);
    let mut cur_score = eval.score(&current)?;
    let mut best = current.clone();
    let mut best_score = cur_score;
    let mut trace = vec![(0, cur_score.classes)];
    let mut evaluations = 1;
    let mut eps = cfg.step_scale;
    let mut rejections = 0;
    let mut accepted = 0;
    let mut spent = 0;

    while spent < budget && best_score.classes < target {
        spent += 1;
        if eps < MIN_STEP {
            current = start_point(cfg, restart + 1, &mut rng);
            cur_score = eval.score(&current)?;
            evaluations += 1;
            eps = cfg.step_scale;
            rejections = 0;
        } else {
            let g = if rng.random_bool(0.5) {
                exp_i_hermitian(random_hermitian(current.dim(), &mut rng), eps)
            } else {
                elementary_move(cfg.n, cfg.d, &mut rng)
            };
            let m = if rng.random_bool(0.5) {
                g * current.matrix()
            } else {
                current.matrix() * g
            };
            let mut proposal = Unitary::new_unchecked(m);
            accepted += 1;
            if accepted % REORTHO_EVERY == 0 {
                proposal = proposal.reorthonormalize();
            }
            let score = eval.score(&proposal)?;
            evaluations += 1;
            if score.at_least(&cur_score) {
                current = proposal;
                cur_score = score;
                rejections = 0;
            } else {
                accepted -= 1;
                rejections += 1;
                if rejections >= PATIENCE {
                    eps *= SHRINK;
                    rejections = 0;
                }
            }
        }
        if cur_score.classes > best_score.classes
            || (cur_score.classes == best_score.classes && cur_score.singletons > best_score.singletons)
        {
            best = current.clone();
            best_score = cur_score;
            trace.push((evaluations - 1, best_score.classes));
        }
    }
    Ok(RestartOutcome {
        best,
        score: best_score,
        trace,
        evaluations,
    })
}

/// Searches for a unitary maximizing the class count of the configured state
/// set. Restarts run in parallel and the result depends only on the config.
pub fn maximize_classes(cfg: &SearchConfig) -> Result<SearchResult> {
    cfg.validate()?;
    let states = search_states(cfg)?;
    let dim = cfg.n * cfg.d;
    let eval = Evaluator {
        space: PatternSpace::new(dim, cfg.n, cfg.statistics),
        states: states.iter().map(|s| s.state.clone()).collect(),
    };
    let per = cfg.budget / cfg.restarts;
    let extra = cfg.budget % cfg.restarts;
    let outcomes: Vec<RestartOutcome> = (0..cfg.restarts)
        .into_par_iter()
        .map(|r| run_restart(cfg, &eval, r, per + usize::from(r < extra)))
        .collect::<Result<_>>()?;

    let mut trace = Vec::new();
    let mut offset = 0;
    let mut best_idx = 0;
    let mut running: Option<usize> = None;
    for (r, out) in outcomes.iter().enumerate() {
        for &(i, classes) in &out.trace {
            if running.is_none_or(|b| classes > b) {
                running = Some(classes);
                trace.push((offset + i, classes));
            }
        }
        let b = &outcomes[best_idx].score;
        if (out.score.classes, out.score.singletons) > (b.classes, b.singletons) {
            best_idx = r;
        }
        offset += out.evaluations;
    }
    let winner = &outcomes[best_idx];
    let group = classify_states(&winner.best, &states, G1_TOL)?;
    let lim = limits(cfg.n, cfg.d)?;
    if cfg.basis == SearchBasis::Cyclic && group.group == Group::G1 && winner.score.classes > lim.n1 {
        return Err(Error::BoundViolation(format!(
            "G1 unitary with {} classes exceeds nD-n+1 = {} at ({}, {})",
            winner.score.classes, lim.n1, cfg.n, cfg.d
        )));
    }
    let goal = cfg.target.unwrap_or(lim.n1);
    Ok(SearchResult {
        config: cfg.clone(),
        best_unitary: winner.best.clone(),
        best_classes: winner.score.classes,
        best_singletons: winner.score.singletons,
        group,
        trace,
        evaluations: offset,
        best_restart: best_idx,
        not_converged: winner.score.classes < goal,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct AuditReport {
    pub n: usize,
    pub d: usize,
    pub statistics: Statistics,
    pub samples: usize,
    pub seed: u64,
    pub bound: usize,
    /// Class count -> number of samples.
    pub histogram: BTreeMap<usize, usize>,
    pub g1_count: usize,
    pub g1_fraction: f64,
    pub max_g1_classes: usize,
}

/// Samples Haar unitaries (seeds `seed + i`), classifies each and records its
/// class count. A G1 sample above `nD - n + 1` is a `BoundViolation`.
pub fn bound_audit(n: usize, d: usize, statistics: Statistics, samples: usize, seed: u64) -> Result<AuditReport> {
    let lim = limits(n, d)?;
    if n * d > MAX_SEARCH_MODES || n > MAX_SEARCH_PHOTONS {
        return Err(Error::Resource(format!("audit limited to nD <= {MAX_SEARCH_MODES}, got ({n}, {d})")));
    }
    let states = bell_states(n, d, statistics)?;
    let vectors: Vec<StateVector> = states.iter().map(|s| s.state.clone()).collect();
    let space = PatternSpace::new(n * d, n, statistics);
    let rows: Vec<(Group, usize)> = (0..samples)
        .into_par_iter()
        .map(|i| -> Result<_> {
            let u = haar_random_unitary(n * d, seed.wrapping_add(i as u64));
            let probs: Vec<Vec<f64>> = vectors
                .iter()
                .map(|psi| space.probabilities(&u, psi))
                .collect::<Result<_>>()?;
            let (classes, _) = count_classes(&probs, SUPPORT_TOL);
            let group = classify_group(&u, n, d, statistics, G1_TOL)?.group;
            Ok((group, classes))
        })
        .collect::<Result<_>>()?;
    let mut histogram = BTreeMap::new();
    let mut g1_count = 0;
    let mut max_g1_classes = 0;
    for (i, &(group, classes)) in rows.iter().enumerate() {
        *histogram.entry(classes).or_insert(0) += 1;
        if group == Group::G1 {
            g1_count += 1;
            max_g1_classes = max_g1_classes.max(classes);
            if classes > lim.n1 {
                return Err(Error::BoundViolation(format!(
                    "Haar sample {} (seed {}) is G1 with {classes} classes > {}",
                    i,
                    seed.wrapping_add(i as u64),
                    lim.n1
                )));
            }
        }
    }
    Ok(AuditReport {
        n,
        d,
        statistics,
        samples,
        seed,
        bound: lim.n1,
        histogram,
        g1_count,
        g1_fraction: if samples == 0 { 0.0 } else { g1_count as f64 / samples as f64 },
        max_g1_classes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::unitarity_deviation;

    #[test]
    fn zero_budget_reports_identity_start() {
        let mut cfg = SearchConfig::new(4, 2, 0, 1);
        cfg.start = StartMode::Identity;
        let r = maximize_classes(&cfg).unwrap();
        assert_eq!(r.best_classes, 8);
        assert_eq!(r.evaluations, 1);
        assert_eq!(r.group.group, Group::G2);
    }

    #[test]
    fn moves_and_steps_are_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let g = elementary_move(3, 3, &mut rng);
            assert!(unitarity_deviation(&g) < 1e-12);
        }
        let h = random_hermitian(6, &mut rng);
        assert!(unitarity_deviation(&exp_i_hermitian(h, 0.7)) < 1e-12);
    }

    #[test]
    fn deterministic_in_seed() {
        let mut cfg = SearchConfig::new(2, 2, 120, 11);
        cfg.restarts = 3;
        let a = maximize_classes(&cfg).unwrap();
        let b = maximize_classes(&cfg).unwrap();
        assert_eq!(a.trace, b.trace);
        assert_eq!(a.best_unitary, b.best_unitary);
    }

    #[test]
    fn trace_is_monotone() {
        let mut cfg = SearchConfig::new(2, 3, 300, 5);
        cfg.restarts = 3;
        let r = maximize_classes(&cfg).unwrap();
        assert!(r.trace.windows(2).all(|w| w[0].0 < w[1].0 && w[0].1 < w[1].1));
        assert_eq!(r.trace.last().unwrap().1, r.best_classes);
    }

    #[test]
    fn rejects_bad_configs() {
        let mut cfg = SearchConfig::new(2, 2, 10, 0);
        cfg.step_scale = 0.0;
        assert!(matches!(maximize_classes(&cfg), Err(Error::Contract(_))));
        let mut cfg = SearchConfig::new(2, 2, 2, 0);
        cfg.restarts = 3;
        assert!(matches!(maximize_classes(&cfg), Err(Error::Contract(_))));
        assert!(matches!(maximize_classes(&SearchConfig::new(3, 8, 10, 0)), Err(Error::Resource(_))));
        let mut cfg = SearchConfig::new(2, 4, 10, 0);
        cfg.basis = SearchBasis::Hyper;
        assert!(matches!(maximize_classes(&cfg), Err(Error::Contract(_))));
    }

    #[test]
    fn small_audit_respects_bound() {
        let a = bound_audit(2, 2, Statistics::Boson, 20, 9).unwrap();
        assert_eq!(a.histogram.values().sum::<usize>(), 20);
        assert!(a.max_g1_classes <= 3);
    }
}
