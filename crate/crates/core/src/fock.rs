//! Fock-state bookkeeping and multi-photon transfer amplitudes.
//!
//! Modes are numbered globally as `block * D + level`, where `block` is the
//! photon (particle) the mode belongs to at the input and `level` its internal
//! state. A unitary `U` maps input creation operators to output ones,
//! `a_p^dag -> sum_s U[s, p] c_s^dag`; output modes are detectors.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{Unitary, ZERO};
use crate::permanent::{determinant_flat, permanent_flat};

/// Amplitudes at or below this fraction of the largest one are dropped.
pub const AMPLITUDE_ZERO_REL: f64 = 1e-9;
/// Probabilities at or below this are treated as exact zeros.
pub const PROBABILITY_ZERO: f64 = 1e-18;
/// Normalization slack for state vectors and distributions.
pub const NORM_TOL: f64 = 1e-9;

/// Largest photon number handled by the stack-buffered amplitude kernel.
pub const MAX_PHOTONS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Statistics {
    Boson,
    Fermion,
}

impl fmt::Display for Statistics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Statistics::Boson => f.write_str("boson"),
            Statistics::Fermion => f.write_str("fermion"),
        }
    }
}

/// A global mode index, decomposable into (photon block, level).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ModeIndex(usize);

impl ModeIndex {
    pub fn new(value: usize, mode_count: usize) -> Result<Self> {
        if value >= mode_count {
            return Err(Error::Dimension {
                expected: mode_count,
                got: value,
            });
        }
        Ok(ModeIndex(value))
    }

    pub fn from_parts(block: usize, level: usize, levels: usize) -> Self {
        debug_assert!(level < levels);
        ModeIndex(block * levels + level)
    }

    pub fn value(self) -> usize {
        self.0
    }

    pub fn block(self, levels: usize) -> usize {
        self.0 / levels
    }

    pub fn level(self, levels: usize) -> usize {
        self.0 % levels
    }
}

/// An occupation basis state: the sorted multiset of occupied modes.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FockState {
    modes: Vec<usize>,
}

impl FockState {
    /// Builds the canonical (sorted) state. Fermionic states may not repeat a mode.
    pub fn new(mut modes: Vec<usize>, statistics: Statistics) -> Result<Self> {
        modes.sort_unstable();
        check_repeats(&modes, statistics)?;
        Ok(FockState { modes })
    }

    /// Canonicalizes the product `a_{m0}^dag a_{m1}^dag ... |0>` and returns the
    /// sign picked up by reordering (always `+1` for bosons).
    pub fn from_ordered(modes: &[usize], statistics: Statistics) -> Result<(Self, f64)> {
        let sign = match statistics {
            Statistics::Boson => 1.0,
            Statistics::Fermion => permutation_parity(modes),
        };
        Ok((FockState::new(modes.to_vec(), statistics)?, sign))
    }

    pub fn modes(&self) -> &[usize] {
        &self.modes
    }

    pub fn photon_number(&self) -> usize {
        self.modes.len()
    }

    /// `(mode, multiplicity)` pairs in ascending mode order.
    pub fn occupations(&self) -> Vec<(usize, usize)> {
        occupations(&self.modes)
    }
}

/// A detector click record: sorted multiset of output modes.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ClickPattern {
    detectors: Vec<usize>,
}

impl ClickPattern {
    pub fn new(mut detectors: Vec<usize>) -> Result<Self> {
        if detectors.is_empty() {
            return Err(Error::Arity {
                expected: 1,
                got: 0,
            });
        }
        detectors.sort_unstable();
        Ok(ClickPattern { detectors })
    }

    pub(crate) fn from_sorted(detectors: Vec<usize>) -> Self {
        debug_assert!(detectors.windows(2).all(|w| w[0] <= w[1]));
        ClickPattern { detectors }
    }

    pub fn detectors(&self) -> &[usize] {
        &self.detectors
    }

    pub fn clicks(&self) -> usize {
        self.detectors.len()
    }

    pub fn multiplicity(&self, mode: usize) -> usize {
        self.detectors.iter().filter(|&&d| d == mode).count()
    }

    pub fn occupations(&self) -> Vec<(usize, usize)> {
        occupations(&self.detectors)
    }

    pub fn has_repeats(&self) -> bool {
        self.detectors.windows(2).any(|w| w[0] == w[1])
    }

    /// The set of detectors that fired, as seen by threshold detectors.
    pub fn support(&self) -> ClickPattern {
        let mut d = self.detectors.clone();
        d.dedup();
        ClickPattern { detectors: d }
    }

    /// The pattern with one more click in `mode`.
    pub fn extended(&self, mode: usize) -> ClickPattern {
        let mut d = self.detectors.clone();
        let at = d.partition_point(|&x| x <= mode);
        d.insert(at, mode);
        ClickPattern { detectors: d }
    }

    /// Renders as `D_{i,j,...}` with 1-based detector numbers, optionally
    /// through a relabeling table indexed by output mode.
    pub fn name(&self, labels: Option<&[usize]>) -> String {
        let mut nums: Vec<usize> = self
            .detectors
            .iter()
            .map(|&d| labels.map_or(d + 1, |l| l[d]))
            .collect();
        nums.sort_unstable();
        let parts: Vec<String> = nums.iter().map(ToString::to_string).collect();
        format!("D_{{{}}}", parts.join(","))
    }
}

impl fmt::Display for ClickPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name(None))
    }
}

fn occupations(sorted: &[usize]) -> Vec<(usize, usize)> {
    let mut out: Vec<(usize, usize)> = Vec::new();
    for &m in sorted {
        match out.last_mut() {
            Some((mode, count)) if *mode == m => *count += 1,
            _ => out.push((m, 1)),
        }
    }
    out
}

fn check_repeats(sorted: &[usize], statistics: Statistics) -> Result<()> {
    if statistics == Statistics::Fermion && sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::Statistics(format!(
            "fermionic modes {sorted:?} contain a repeat"
        )));
    }
    Ok(())
}

fn permutation_parity(modes: &[usize]) -> f64 {
    let inversions = (0..modes.len())
        .flat_map(|i| (i + 1..modes.len()).map(move |j| (i, j)))
        .filter(|&(i, j)| modes[i] > modes[j])
        .count();
    if inversions % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|x| x as f64).product()
}

/// Product of the factorials of the multiplicities in a sorted mode list.
fn multiplicity_factorials(sorted: &[usize]) -> f64 {
    occupations(sorted)
        .iter()
        .map(|&(_, c)| factorial(c))
        .product()
}

/// A normalized superposition of Fock states with fixed photon number.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amplitudes: BTreeMap<FockState, Complex64>,
    photon_number: usize,
    mode_count: usize,
    statistics: Statistics,
}

impl StateVector {
    /// Builds a state from `(modes, amplitude)` terms, where each `modes` list is
    /// read as the ordered creation product (fermionic reordering signs are
    /// applied). Duplicate terms are summed; the result is normalized.
    pub fn from_terms<I>(terms: I, mode_count: usize, statistics: Statistics) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<usize>, Complex64)>,
    {
        let mut amplitudes: BTreeMap<FockState, Complex64> = BTreeMap::new();
        let mut photon_number = None;
        for (modes, amp) in terms {
            if let Some(&bad) = modes.iter().find(|&&m| m >= mode_count) {
                return Err(Error::Dimension {
                    expected: mode_count,
                    got: bad,
                });
            }
            match photon_number {
                None => photon_number = Some(modes.len()),
                Some(n) if n != modes.len() => {
                    return Err(Error::Arity {
                        expected: n,
                        got: modes.len(),
                    })
                }
                _ => {}
            }
            let (state, sign) = FockState::from_ordered(&modes, statistics)?;
            *amplitudes.entry(state).or_insert(ZERO) += amp * sign;
        }
        let photon_number = photon_number.ok_or(Error::Arity {
            expected: 1,
            got: 0,
        })?;
        if photon_number > MAX_PHOTONS {
            return Err(Error::Resource(format!(
                "{photon_number} photons exceeds the cap of {MAX_PHOTONS}"
            )));
        }
        let mut state = StateVector {
            amplitudes,
            photon_number,
            mode_count,
            statistics,
        };
        state.normalize()?;
        Ok(state)
    }

    fn normalize(&mut self) -> Result<()> {
        let max = self.amplitudes.values().map(|a| a.norm()).fold(0.0, f64::max);
        self.amplitudes
            .retain(|_, a| a.norm() > AMPLITUDE_ZERO_REL * max);
        let norm = self.norm_sqr().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::Contract("state vector has zero norm".into()));
        }
        for a in self.amplitudes.values_mut() {
            *a /= norm;
        }
        Ok(())
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.values().map(|a| a.norm_sqr()).sum()
    }

    pub fn photon_number(&self) -> usize {
        self.photon_number
    }

    pub fn mode_count(&self) -> usize {
        self.mode_count
    }

    pub fn statistics(&self) -> Statistics {
        self.statistics
    }

    pub fn amplitude(&self, basis: &FockState) -> Complex64 {
        self.amplitudes.get(basis).copied().unwrap_or(ZERO)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&FockState, &Complex64)> {
        self.amplitudes.iter()
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &StateVector) -> Complex64 {
        self.amplitudes
            .iter()
            .map(|(k, a)| a.conj() * other.amplitude(k))
            .sum()
    }

    /// Copy with every amplitude multiplied by `phase`.
    pub fn scaled(&self, phase: Complex64) -> StateVector {
        let mut out = self.clone();
        for a in out.amplitudes.values_mut() {
            *a *= phase;
        }
        out
    }

    fn check_unitary(&self, u: &Unitary) -> Result<()> {
        if u.dim() != self.mode_count {
            return Err(Error::Dimension {
                expected: self.mode_count,
                got: u.dim(),
            });
        }
        Ok(())
    }
}

/// Output coefficients of input creation operator `p`: column `p` of `U`.
pub fn apply_unitary_to_creation(u: &Unitary, p: ModeIndex) -> Result<Vec<Complex64>> {
    if p.value() >= u.dim() {
        return Err(Error::Dimension {
            expected: u.dim(),
            got: p.value(),
        });
    }
    Ok((0..u.dim()).map(|s| u.get(s, p.value())).collect())
}

/// Transfer amplitude `<output| U |input>` for `n` quanta.
///
/// Bosons: `perm(M) / sqrt(prod mu_out! prod mu_in!)`; fermions: `det(M)` in
/// canonical sorted order, with `M[k][l] = U[s_k, p_l]`.
pub fn outcome_amplitude(
    u: &Unitary,
    input: &FockState,
    output: &ClickPattern,
    statistics: Statistics,
) -> Result<Complex64> {
    let n = input.photon_number();
    if output.clicks() != n {
        return Err(Error::Arity {
            expected: n,
            got: output.clicks(),
        });
    }
    if n > MAX_PHOTONS {
        return Err(Error::Resource(format!("{n} photons exceeds cap")));
    }
    let dim = u.dim();
    if let Some(&bad) = input
        .modes()
        .iter()
        .chain(output.detectors())
        .find(|&&m| m >= dim)
    {
        return Err(Error::Dimension {
            expected: dim,
            got: bad,
        });
    }
    check_repeats(input.modes(), statistics)?;
    check_repeats(output.detectors(), statistics)?;
    Ok(amplitude_kernel(u, input.modes(), output.detectors(), statistics))
}

/// Unchecked amplitude kernel; both mode lists sorted, equal length, in range.
#[inline]
pub(crate) fn amplitude_kernel(
    u: &Unitary,
    input: &[usize],
    output: &[usize],
    statistics: Statistics,
) -> Complex64 {
    let n = input.len();
    let mut buf = [ZERO; MAX_PHOTONS * MAX_PHOTONS];
    let m = &mut buf[..n * n];
    for (k, &s) in output.iter().enumerate() {
        for (l, &p) in input.iter().enumerate() {
            m[k * n + l] = u.get(s, p);
        }
    }
    match statistics {
        Statistics::Boson => {
            let norm = (multiplicity_factorials(input) * multiplicity_factorials(output)).sqrt();
            permanent_flat(n, m) / norm
        }
        Statistics::Fermion => determinant_flat(n, m),
    }
}

/// All size-`clicks` patterns over `mode_count` detectors in lexicographic
/// order: multisets for bosons, sets for fermions.
pub fn enumerate_patterns(
    mode_count: usize,
    clicks: usize,
    statistics: Statistics,
) -> Vec<ClickPattern> {
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(clicks);
    fn rec(
        start: usize,
        mode_count: usize,
        clicks: usize,
        repeat: bool,
        current: &mut Vec<usize>,
        out: &mut Vec<ClickPattern>,
    ) {
        if current.len() == clicks {
            out.push(ClickPattern::from_sorted(current.clone()));
            return;
        }
        for m in start..mode_count {
            current.push(m);
            rec(
                if repeat { m } else { m + 1 },
                mode_count,
                clicks,
                repeat,
                current,
                out,
            );
            current.pop();
        }
    }
    if clicks > 0 {
        rec(
            0,
            mode_count,
            clicks,
            statistics == Statistics::Boson,
            &mut current,
            &mut out,
        );
    }
    out
}

/// Output probability distribution over full click patterns.
pub type Distribution = BTreeMap<ClickPattern, f64>;

/// The set of full output patterns for a fixed photon number and statistics,
/// reused across many evaluations.
#[derive(Debug, Clone)]
pub struct PatternSpace {
    mode_count: usize,
    photons: usize,
    statistics: Statistics,
    patterns: Vec<ClickPattern>,
}

impl PatternSpace {
    pub fn new(mode_count: usize, photons: usize, statistics: Statistics) -> Self {
        PatternSpace {
            mode_count,
            photons,
            statistics,
            patterns: enumerate_patterns(mode_count, photons, statistics),
        }
    }

    pub fn patterns(&self) -> &[ClickPattern] {
        &self.patterns
    }

    pub fn mode_count(&self) -> usize {
        self.mode_count
    }

    pub fn photons(&self) -> usize {
        self.photons
    }

    pub fn statistics(&self) -> Statistics {
        self.statistics
    }

    fn check(&self, u: &Unitary, psi: &StateVector) -> Result<()> {
        psi.check_unitary(u)?;
        if psi.photon_number() != self.photons
            || psi.mode_count() != self.mode_count
            || psi.statistics() != self.statistics
        {
            return Err(Error::Arity {
                expected: self.photons,
                got: psi.photon_number(),
            });
        }
        Ok(())
    }

    /// Output amplitude of every pattern, in pattern order.
    pub fn amplitudes(&self, u: &Unitary, psi: &StateVector) -> Result<Vec<Complex64>> {
        self.check(u, psi)?;
        Ok(self
            .patterns
            .iter()
            .map(|pat| {
                psi.terms()
                    .map(|(basis, amp)| {
                        amp * amplitude_kernel(u, basis.modes(), pat.detectors(), self.statistics)
                    })
                    .sum()
            })
            .collect())
    }

    /// Probability of every pattern, in pattern order.
    pub fn probabilities(&self, u: &Unitary, psi: &StateVector) -> Result<Vec<f64>> {
        Ok(self
            .amplitudes(u, psi)?
            .into_iter()
            .map(|a| a.norm_sqr())
            .collect())
    }

    pub fn evolve(&self, u: &Unitary, psi: &StateVector) -> Result<Distribution> {
        let probs = self.probabilities(u, psi)?;
        Ok(self
            .patterns
            .iter()
            .zip(probs)
            .filter(|(_, p)| *p > PROBABILITY_ZERO)
            .map(|(pat, p)| (pat.clone(), p))
            .collect())
    }
}

/// Evolves `psi` through `u` and returns the output state in the Fock basis.
pub fn transform(u: &Unitary, psi: &StateVector) -> Result<StateVector> {
    let space = PatternSpace::new(psi.mode_count(), psi.photon_number(), psi.statistics());
    let amps = space.amplitudes(u, psi)?;
    let terms = space
        .patterns
        .iter()
        .zip(amps)
        .map(|(pat, a)| (pat.detectors().to_vec(), a));
    StateVector::from_terms(terms, psi.mode_count(), psi.statistics())
}

/// Probability of every full click pattern after `u`; exact zeros omitted.
pub fn evolve(u: &Unitary, psi: &StateVector) -> Result<Distribution> {
    PatternSpace::new(psi.mode_count(), psi.photon_number(), psi.statistics()).evolve(u, psi)
}

/// Norm of the post-click state after the clicks in `prefix` (`n-1` clicks),
/// up to the constant `prod_s mu_prefix(s)!`:
/// `sum_t P(prefix + t) * mu_{prefix+t}(t)`.
pub fn marginal_prefix_probability(
    u: &Unitary,
    psi: &StateVector,
    prefix: &ClickPattern,
) -> Result<f64> {
    psi.check_unitary(u)?;
    let n = psi.photon_number();
    if prefix.clicks() + 1 != n {
        return Err(Error::Arity {
            expected: n - 1,
            got: prefix.clicks(),
        });
    }
    if let Some(&bad) = prefix.detectors().iter().find(|&&d| d >= u.dim()) {
        return Err(Error::Dimension {
            expected: u.dim(),
            got: bad,
        });
    }
    let statistics = psi.statistics();
    check_repeats(prefix.detectors(), statistics)?;
    let mut total = 0.0;
    for t in 0..u.dim() {
        if statistics == Statistics::Fermion && prefix.multiplicity(t) > 0 {
            continue;
        }
        let full = prefix.extended(t);
        let amp: Complex64 = psi
            .terms()
            .map(|(basis, a)| a * amplitude_kernel(u, basis.modes(), full.detectors(), statistics))
            .sum();
        total += amp.norm_sqr() * full.multiplicity(t) as f64;
    }
    Ok(total)
}

/// Prefix marginals for every `(n-1)`-click prefix, derived from a full
/// distribution. Same normalization as [`marginal_prefix_probability`].
pub fn prefix_marginals(dist: &Distribution) -> BTreeMap<ClickPattern, f64> {
    let mut out: BTreeMap<ClickPattern, f64> = BTreeMap::new();
    for (pat, &p) in dist {
        for (mode, count) in pat.occupations() {
            let mut rest = pat.detectors().to_vec();
            let at = rest.iter().position(|&d| d == mode).unwrap();
            rest.remove(at);
            if rest.is_empty() {
                continue;
            }
            *out.entry(ClickPattern::from_sorted(rest)).or_insert(0.0) += p * count as f64;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn bs50() -> Unitary {
        let h = FRAC_1_SQRT_2;
        Unitary::from_real_rows(&[&[h, h], &[h, -h]]).unwrap()
    }

    fn pat(d: &[usize]) -> ClickPattern {
        ClickPattern::new(d.to_vec()).unwrap()
    }

    #[test]
    fn creation_operator_reads_a_column() {
        let id = Unitary::identity(4);
        let col = apply_unitary_to_creation(&id, ModeIndex::new(2, 4).unwrap()).unwrap();
        assert_eq!(col, vec![c(0.0), c(0.0), c(1.0), c(0.0)]);

        let bs = bs50();
        let col0 = apply_unitary_to_creation(&bs, ModeIndex::new(0, 2).unwrap()).unwrap();
        assert!((col0[0] - c(FRAC_1_SQRT_2)).norm() < 1e-15);
        assert!((col0[1] - c(FRAC_1_SQRT_2)).norm() < 1e-15);
        let col1 = apply_unitary_to_creation(&bs, ModeIndex::new(1, 2).unwrap()).unwrap();
        assert!((col1[1] - c(-FRAC_1_SQRT_2)).norm() < 1e-15);
        let weight: f64 = col1.iter().map(|a| a.norm_sqr()).sum();
        assert!((weight - 1.0).abs() < 1e-15);

        let bad = ModeIndex(5);
        assert!(matches!(
            apply_unitary_to_creation(&bs, bad),
            Err(Error::Dimension { .. })
        ));
    }

    #[test]
    fn mode_index_decomposes() {
        let m = ModeIndex::new(11, 12).unwrap();
        assert_eq!((m.block(4), m.level(4)), (2, 3));
        assert_eq!(ModeIndex::from_parts(2, 3, 4), m);
        assert!(ModeIndex::new(12, 12).is_err());
    }

    #[test]
    fn identity_amplitude_is_one() {
        let u = Unitary::identity(4);
        let input = FockState::new(vec![0, 3], Statistics::Boson).unwrap();
        let a = outcome_amplitude(&u, &input, &pat(&[0, 3]), Statistics::Boson).unwrap();
        assert!((a - c(1.0)).norm() < 1e-15);
    }

    #[test]
    fn hong_ou_mandel_amplitudes() {
        let bs = bs50();
        let input = FockState::new(vec![0, 1], Statistics::Boson).unwrap();
        let coincidence = outcome_amplitude(&bs, &input, &pat(&[0, 1]), Statistics::Boson).unwrap();
        assert!(coincidence.norm() < 1e-15);
        let bunched = outcome_amplitude(&bs, &input, &pat(&[0, 0]), Statistics::Boson).unwrap();
        assert!((bunched - c(FRAC_1_SQRT_2)).norm() < 1e-15);

        let psi = StateVector::from_terms([(vec![0, 1], c(1.0))], 2, Statistics::Boson).unwrap();
        let dist = evolve(&bs, &psi).unwrap();
        assert_eq!(dist.len(), 2);
        assert!((dist[&pat(&[0, 0])] - 0.5).abs() < 1e-15);
        assert!((dist[&pat(&[1, 1])] - 0.5).abs() < 1e-15);
        assert!(!dist.contains_key(&pat(&[0, 1])));
    }

    #[test]
    fn fermions_antibunch() {
        let bs = bs50();
        let psi = StateVector::from_terms([(vec![0, 1], c(1.0))], 2, Statistics::Fermion).unwrap();
        let dist = evolve(&bs, &psi).unwrap();
        assert_eq!(dist.len(), 1);
        assert!((dist[&pat(&[0, 1])] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn amplitude_errors() {
        let u = Unitary::identity(4);
        let input = FockState::new(vec![0, 3], Statistics::Boson).unwrap();
        assert!(matches!(
            outcome_amplitude(&u, &input, &pat(&[0]), Statistics::Boson),
            Err(Error::Arity { expected: 2, got: 1 })
        ));
        assert!(matches!(
            outcome_amplitude(&u, &input, &pat(&[1, 1]), Statistics::Fermion),
            Err(Error::Statistics(_))
        ));
        assert!(FockState::new(vec![2, 2], Statistics::Fermion).is_err());
    }

    #[test]
    fn fermionic_reordering_sign() {
        let (s, sign) = FockState::from_ordered(&[3, 1], Statistics::Fermion).unwrap();
        assert_eq!(s.modes(), &[1, 3]);
        assert_eq!(sign, -1.0);
        let (_, sign) = FockState::from_ordered(&[3, 1], Statistics::Boson).unwrap();
        assert_eq!(sign, 1.0);
    }

    #[test]
    fn identity_evolution_is_deterministic() {
        let psi = StateVector::from_terms([(vec![0, 2], c(1.0))], 4, Statistics::Boson).unwrap();
        let dist = evolve(&Unitary::identity(4), &psi).unwrap();
        assert_eq!(dist.len(), 1);
        assert!((dist[&pat(&[0, 2])] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn pattern_counts() {
        // C(nD + n - 1, n) multisets, C(nD, n) sets.
        assert_eq!(enumerate_patterns(4, 2, Statistics::Boson).len(), 10);
        assert_eq!(enumerate_patterns(8, 4, Statistics::Boson).len(), 330);
        assert_eq!(enumerate_patterns(6, 3, Statistics::Fermion).len(), 20);
        let p = enumerate_patterns(3, 2, Statistics::Boson);
        assert!(p.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn prefix_marginal_arity_and_sign() {
        let psi = StateVector::from_terms(
            [(vec![0, 2], c(1.0)), (vec![1, 3], c(1.0))],
            4,
            Statistics::Boson,
        )
        .unwrap();
        let u = Unitary::identity(4);
        let m = marginal_prefix_probability(&u, &psi, &pat(&[0])).unwrap();
        assert!((m - 0.5).abs() < 1e-15);
        assert!(matches!(
            marginal_prefix_probability(&u, &psi, &pat(&[0, 1])),
            Err(Error::Arity { .. })
        ));
    }

    #[test]
    fn pattern_helpers() {
        let p = pat(&[3, 1, 3]);
        assert_eq!(p.detectors(), &[1, 3, 3]);
        assert!(p.has_repeats());
        assert_eq!(p.support().detectors(), &[1, 3]);
        assert_eq!(p.extended(2).detectors(), &[1, 2, 3, 3]);
        assert_eq!(p.name(None), "D_{2,4,4}");
        assert_eq!(p.occupations(), vec![(1, 1), (3, 2)]);
    }
}
