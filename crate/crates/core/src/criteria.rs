//! Distinguishability criteria: LL matrix elements, the single-mode (G1)
//! simplification, detection signatures and their rank, and closed-form limits.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fock::{enumerate_patterns, ClickPattern, ModeIndex, StateVector, Statistics, MAX_PHOTONS};
use crate::linalg::{CMatrix, Unitary, ZERO};
use crate::optics::{classify_group, Group, G1_TOL};
use crate::permanent::{determinant_flat, permanent_flat};

/// Matrix elements at or below this magnitude count as vanishing.
pub const LL_TOL: f64 = 1e-10;
/// Relative singular-value cutoff for signature ranks.
pub const RANK_TOL: f64 = 1e-9;

/// Sparse Fock-basis state with any photon number (sorted mode lists).
type Sparse = BTreeMap<Vec<usize>, Complex64>;

fn sparse_of(psi: &StateVector) -> Sparse {
    psi.terms().map(|(b, a)| (b.modes().to_vec(), *a)).collect()
}

/// `a_p` on a normalized Fock basis state: `sqrt(m_p)` for bosons, the
/// reordering sign `(-1)^(modes before p)` for fermions.
fn annihilate_input(state: &Sparse, p: usize, statistics: Statistics, coeff: Complex64, out: &mut Sparse) {
    for (modes, amp) in state {
        let Some(first) = modes.iter().position(|&m| m == p) else {
            continue;
        };
        let factor = match statistics {
            Statistics::Boson => (modes.iter().filter(|&&m| m == p).count() as f64).sqrt(),
            Statistics::Fermion => {
                if first % 2 == 0 {
                    1.0
                } else {
                    -1.0
                }
            }
        };
        let mut rest = modes.clone();
        rest.remove(first);
        *out.entry(rest).or_insert(ZERO) += amp * coeff * factor;
    }
}

/// Output annihilator `c_s = sum_p U[s, p] a_p`.
fn annihilate_output(u: &Unitary, state: &Sparse, s: usize, statistics: Statistics) -> Sparse {
    let mut out = Sparse::new();
    for p in 0..u.dim() {
        let coeff = u.get(s, p);
        if coeff != ZERO {
            annihilate_input(state, p, statistics, coeff, &mut out);
        }
    }
    out
}

fn inner(a: &Sparse, b: &Sparse) -> Complex64 {
    a.iter()
        .filter_map(|(k, x)| b.get(k).map(|y| x.conj() * y))
        .sum()
}

/// `c_{s_m} ... c_{s_1} |psi>`.
fn post_click(u: &Unitary, psi: &Sparse, pattern: &[usize], statistics: Statistics) -> Sparse {
    pattern
        .iter()
        .fold(psi.clone(), |acc, &s| annihilate_output(u, &acc, s, statistics))
}

fn check_pair(u: &Unitary, phi_i: &StateVector, phi_j: &StateVector) -> Result<()> {
    for phi in [phi_i, phi_j] {
        if phi.mode_count() != u.dim() {
            return Err(Error::Dimension {
                expected: u.dim(),
                got: phi.mode_count(),
            });
        }
    }
    if phi_i.photon_number() != phi_j.photon_number() {
        return Err(Error::Arity {
            expected: phi_i.photon_number(),
            got: phi_j.photon_number(),
        });
    }
    if phi_i.statistics() != phi_j.statistics() {
        return Err(Error::Statistics("states have different statistics".into()));
    }
    Ok(())
}

/// `<phi_i| c_{s_1}^dag ... c_{s_m}^dag c_{s_m} ... c_{s_1} |phi_j>` for a
/// pattern of `1 <= m <= n` clicks.
pub fn ll_matrix_element(
    u: &Unitary,
    phi_i: &StateVector,
    phi_j: &StateVector,
    pattern: &ClickPattern,
) -> Result<Complex64> {
    check_pair(u, phi_i, phi_j)?;
    let n = phi_i.photon_number();
    if pattern.clicks() > n {
        return Err(Error::Arity {
            expected: n,
            got: pattern.clicks(),
        });
    }
    if let Some(&bad) = pattern.detectors().iter().find(|&&s| s >= u.dim()) {
        return Err(Error::Dimension {
            expected: u.dim(),
            got: bad,
        });
    }
    let stats = phi_i.statistics();
    let chi_i = post_click(u, &sparse_of(phi_i), pattern.detectors(), stats);
    let chi_j = post_click(u, &sparse_of(phi_j), pattern.detectors(), stats);
    Ok(inner(&chi_i, &chi_j))
}

fn reject_identical(phi_i: &StateVector, phi_j: &StateVector) -> Result<()> {
    if (phi_i.inner(phi_j).norm() - 1.0).abs() < 1e-9 {
        return Err(Error::Contract(
            "distinguishability of a state from itself is undefined".into(),
        ));
    }
    Ok(())
}

/// True iff every LL matrix element between the two states vanishes, over
/// all click patterns of every order `1..=n`.
pub fn ll_pairwise_distinguishable(
    u: &Unitary,
    phi_i: &StateVector,
    phi_j: &StateVector,
    tol: f64,
) -> Result<bool> {
    check_pair(u, phi_i, phi_j)?;
    reject_identical(phi_i, phi_j)?;
    let table = LlTable::new(u, &[phi_i.clone(), phi_j.clone()])?;
    Ok(table.distinguishable(0, 1, tol))
}

/// Post-click vectors for every state and every pattern of order `1..=n`.
struct LlTable {
    /// `chi[pattern][state]`.
    chi: Vec<Vec<Sparse>>,
}

impl LlTable {
    fn new(u: &Unitary, states: &[StateVector]) -> Result<Self> {
        let first = states.first().ok_or(Error::Arity { expected: 1, got: 0 })?;
        for s in states {
            check_pair(u, first, s)?;
        }
        let n = first.photon_number();
        let stats = first.statistics();
        let sparse: Vec<Sparse> = states.iter().map(sparse_of).collect();
        let patterns: Vec<ClickPattern> = (1..=n)
            .flat_map(|m| enumerate_patterns(u.dim(), m, stats))
            .collect();
        let chi = patterns
            .par_iter()
            .map(|p| {
                sparse
                    .iter()
                    .map(|psi| post_click(u, psi, p.detectors(), stats))
                    .collect()
            })
            .collect();
        Ok(LlTable { chi })
    }

    fn distinguishable(&self, i: usize, j: usize, tol: f64) -> bool {
        self.chi
            .iter()
            .all(|row| inner(&row[i], &row[j]).norm() <= tol)
    }
}

/// Symmetric LL verdicts for every pair; the diagonal is `false`.
pub fn ll_distinguishability(u: &Unitary, states: &[StateVector], tol: f64) -> Result<Vec<Vec<bool>>> {
    let table = LlTable::new(u, states)?;
    let k = states.len();
    let mut out = vec![vec![false; k]; k];
    for i in 0..k {
        for j in i + 1..k {
            let v = table.distinguishable(i, j, tol);
            out[i][j] = v;
            out[j][i] = v;
        }
    }
    Ok(out)
}

/// Single-mode power states `c_s^m |phi>` for every mode `s` and `m = 1..=n`.
fn single_mode_powers(u: &Unitary, psi: &StateVector) -> Vec<Sparse> {
    let stats = psi.statistics();
    let base = sparse_of(psi);
    let mut out = Vec::new();
    for s in 0..u.dim() {
        let mut acc = base.clone();
        for _ in 0..psi.photon_number() {
            acc = annihilate_output(u, &acc, s, stats);
            out.push(acc.clone());
        }
    }
    out
}

fn require_g1(u: &Unitary, phi: &StateVector) -> Result<(usize, usize)> {
    let n = phi.photon_number();
    if n == 0 || phi.mode_count() % n != 0 {
        return Err(Error::Dimension {
            expected: n,
            got: phi.mode_count(),
        });
    }
    let d = phi.mode_count() / n;
    let tag = classify_group(u, n, d, phi.statistics(), G1_TOL)?;
    if tag.group != Group::G1 {
        return Err(Error::Contract(
            "the single-mode criterion is only valid for G1 unitaries".into(),
        ));
    }
    Ok((n, d))
}

/// Distinguishability from single-mode conditions only:
/// `<phi_i| (c_s^dag)^m c_s^m |phi_j> = 0` for all `s` and `m = 1..=n`.
/// Refused for G2 unitaries.
pub fn simplified_g1_distinguishable(
    u: &Unitary,
    phi_i: &StateVector,
    phi_j: &StateVector,
    tol: f64,
) -> Result<bool> {
    check_pair(u, phi_i, phi_j)?;
    reject_identical(phi_i, phi_j)?;
    require_g1(u, phi_i)?;
    let a = single_mode_powers(u, phi_i);
    let b = single_mode_powers(u, phi_j);
    Ok(a.iter().zip(&b).all(|(x, y)| inner(x, y).norm() <= tol))
}

/// Pairwise single-mode verdicts over a state set (one G1 check).
pub fn simplified_g1_distinguishability(
    u: &Unitary,
    states: &[StateVector],
    tol: f64,
) -> Result<Vec<Vec<bool>>> {
    let first = states.first().ok_or(Error::Arity { expected: 1, got: 0 })?;
    for s in states {
        check_pair(u, first, s)?;
    }
    require_g1(u, first)?;
    let powers: Vec<Vec<Sparse>> = states.par_iter().map(|s| single_mode_powers(u, s)).collect();
    let k = states.len();
    let mut out = vec![vec![false; k]; k];
    for i in 0..k {
        for j in i + 1..k {
            let v = powers[i]
                .iter()
                .zip(&powers[j])
                .all(|(x, y)| inner(x, y).norm() <= tol);
            out[i][j] = v;
            out[j][i] = v;
        }
    }
    Ok(out)
}

/// A detector mode `c_i^dag |0>` split into per-photon coefficient blocks:
/// `coefficients[k][l] = conj(U[i, k*D + l])`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DetectorMode {
    pub index: usize,
    pub coefficients: Vec<Vec<Complex64>>,
}

pub fn detector_mode(u: &Unitary, index: ModeIndex, n: usize) -> Result<DetectorMode> {
    let d = levels(u, n)?;
    if index.value() >= u.dim() {
        return Err(Error::Dimension {
            expected: u.dim(),
            got: index.value(),
        });
    }
    let coefficients = (0..n)
        .map(|k| (0..d).map(|l| u.get(index.value(), k * d + l).conj()).collect())
        .collect();
    Ok(DetectorMode {
        index: index.value(),
        coefficients,
    })
}

fn levels(u: &Unitary, n: usize) -> Result<usize> {
    if n == 0 || u.dim() % n != 0 {
        return Err(Error::Dimension {
            expected: n,
            got: u.dim(),
        });
    }
    Ok(u.dim() / n)
}

/// (Anti)symmetrized product of the `n` detector modes in `prefix + final`,
/// projected onto one particle per photon block. Entry order: per-photon
/// levels `(l_0, ..., l_{n-1})`, `l_0` most significant.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DetectionSignature {
    pub vector: Vec<Complex64>,
    pub click_prefix: ClickPattern,
    pub final_click: usize,
}

impl DetectionSignature {
    pub fn norm(&self) -> f64 {
        self.vector.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `<S|phi>` for a state with one particle per photon block.
    pub fn overlap(&self, phi: &StateVector) -> Result<Complex64> {
        let n = phi.photon_number();
        let d = phi.mode_count() / n;
        let mut total = ZERO;
        for (basis, amp) in phi.terms() {
            let mut idx = 0;
            for (k, &m) in basis.modes().iter().enumerate() {
                if m / d != k {
                    return Err(Error::Contract(
                        "signature overlaps need one particle per photon block".into(),
                    ));
                }
                idx = idx * d + m % d;
            }
            total += self.vector[idx].conj() * amp;
        }
        Ok(total)
    }
}

pub fn detection_signature(
    u: &Unitary,
    prefix: &ClickPattern,
    final_click: ModeIndex,
    statistics: Statistics,
) -> Result<DetectionSignature> {
    let n = prefix.clicks() + 1;
    if n > MAX_PHOTONS {
        return Err(Error::Resource(format!("{n} photons exceeds cap")));
    }
    let d = levels(u, n)?;
    let dim = u.dim();
    if let Some(&bad) = prefix
        .detectors()
        .iter()
        .chain(std::iter::once(&final_click.value()))
        .find(|&&s| s >= dim)
    {
        return Err(Error::Dimension {
            expected: dim,
            got: bad,
        });
    }
    let detectors: Vec<usize> = prefix
        .detectors()
        .iter()
        .copied()
        .chain(std::iter::once(final_click.value()))
        .collect();
    let size = d.pow(n as u32);
    let mut vector = vec![ZERO; size];
    let mut buf = vec![ZERO; n * n];
    for (idx, slot) in vector.iter_mut().enumerate() {
        // Row k = photon k at level l_k, column j = detector j.
        let mut rem = idx;
        let mut lv = vec![0; n];
        for k in (0..n).rev() {
            lv[k] = rem % d;
            rem /= d;
        }
        for k in 0..n {
            for (j, &det) in detectors.iter().enumerate() {
                buf[k * n + j] = u.get(det, k * d + lv[k]).conj();
            }
        }
        *slot = match statistics {
            Statistics::Boson => permanent_flat(n, &buf),
            Statistics::Fermion => determinant_flat(n, &mut buf),
        };
    }
    Ok(DetectionSignature {
        vector,
        click_prefix: prefix.clone(),
        final_click: final_click.value(),
    })
}

/// Numerical rank of `vectors` (as columns): singular values above
/// `tol * sigma_max`.
pub fn numerical_rank(vectors: &[Vec<Complex64>], tol: f64) -> usize {
    let Some(first) = vectors.first() else {
        return 0;
    };
    let m = CMatrix::from_fn(first.len(), vectors.len(), |r, c| vectors[c][r]);
    let sv = m.singular_values();
    let max = sv.iter().copied().fold(0.0, f64::max);
    if max == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > tol * max).count()
}

/// Rank of the `nD` signatures obtained by sweeping the final click over
/// every detector with `prefix` fixed.
pub fn signature_rank(u: &Unitary, prefix: &ClickPattern, statistics: Statistics, tol: f64) -> Result<usize> {
    let vectors: Vec<Vec<Complex64>> = (0..u.dim())
        .map(|f| {
            detection_signature(u, prefix, ModeIndex::new(f, u.dim())?, statistics).map(|s| s.vector)
        })
        .collect::<Result<_>>()?;
    Ok(numerical_rank(&vectors, tol))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LimitValue {
    pub n: usize,
    pub d: usize,
    /// Class limit for G1 circuits, `nD - (n - 1)`.
    pub n1: usize,
    /// Classes reached by the identity circuit, `D^(n-1)`.
    pub n2_lower: usize,
    /// `log2(n1)`.
    pub cc_bits: f64,
    /// Measurement efficiency: `(2D - 1) / D^2` for two photons; for more
    /// photons the lower bound `1 / D`.
    pub me: f64,
    pub me_is_lower_bound: bool,
}

pub fn limits(n: usize, d: usize) -> Result<LimitValue> {
    if n < 2 || d < 2 {
        return Err(Error::Contract(format!("limits need n >= 2 and D >= 2, got ({n}, {d})")));
    }
    let n1 = n * d - (n - 1);
    let n2_lower = u32::try_from(n - 1)
        .ok()
        .and_then(|e| d.checked_pow(e))
        .ok_or_else(|| Error::Resource(format!("{d}^{} overflows", n - 1)))?;
    let (me, me_is_lower_bound) = if n == 2 {
        ((2 * d - 1) as f64 / (d * d) as f64, false)
    } else {
        (1.0 / d as f64, true)
    };
    Ok(LimitValue {
        n,
        d,
        n1,
        n2_lower,
        cc_bits: (n1 as f64).log2(),
        me,
        me_is_lower_bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bell::{bell_state, bell_state_with, BellLabel};
    use crate::fock::outcome_amplitude;
    use crate::optics::haar_random_unitary;

    fn bell(n: usize, d: usize, p: usize, i: &[usize]) -> StateVector {
        bell_state(&BellLabel::new(n, d, p, i.to_vec()).unwrap()).unwrap()
    }

    fn pat(d: &[usize]) -> ClickPattern {
        ClickPattern::new(d.to_vec()).unwrap()
    }

    /// A Hadamard on photon A alone is G1, and it maps Phi+ and Psi- onto
    /// states with identical click supports. Every single-mode overlap still
    /// cancels, so the single-mode conditions are not sufficient on G1.
    #[test]
    fn single_mode_conditions_miss_local_hadamard_overlap() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let had = CMatrix::from_fn(2, 2, |r, c| Complex64::new(if r == 1 && c == 1 { -s } else { s }, 0.0));
        let u = crate::bell::embed_block(&had, 0, 2).unwrap();
        assert_eq!(classify_group(&u, 2, 2, Statistics::Boson, G1_TOL).unwrap().group, Group::G1);
        let phi_plus = bell(2, 2, 0, &[0]);
        let psi_minus = bell(2, 2, 1, &[1]);
        assert!(!ll_pairwise_distinguishable(&u, &phi_plus, &psi_minus, LL_TOL).unwrap());
        assert!(simplified_g1_distinguishable(&u, &phi_plus, &psi_minus, LL_TOL).unwrap());
    }

    #[test]
    fn ll_identity_examples() {
        let u = Unitary::identity(4);
        let a = bell(2, 2, 0, &[0]);
        let b = bell(2, 2, 0, &[1]);
        let c = bell(2, 2, 1, &[0]);
        assert!(ll_matrix_element(&u, &a, &b, &pat(&[0])).unwrap().norm() < 1e-15);
        let v = ll_matrix_element(&u, &a, &c, &pat(&[0])).unwrap();
        assert!((v.re - 0.5).abs() < 1e-15 && v.im.abs() < 1e-15);
        assert!(matches!(
            ll_matrix_element(&u, &a, &b, &pat(&[0, 1, 2])),
            Err(Error::Arity { .. })
        ));
    }

    #[test]
    fn ll_diagonal_is_nonnegative_and_hermitian() {
        let u = haar_random_unitary(6, 11);
        let a = bell(3, 2, 1, &[0, 1]);
        let b = bell(3, 2, 0, &[1, 1]);
        for p in [pat(&[0]), pat(&[2, 5]), pat(&[1, 1]), pat(&[0, 3, 3])] {
            let d = ll_matrix_element(&u, &a, &a, &p).unwrap();
            assert!(d.re >= -1e-15 && d.im.abs() < 1e-14);
            let x = ll_matrix_element(&u, &a, &b, &p).unwrap();
            let y = ll_matrix_element(&u, &b, &a, &p).unwrap();
            assert!((x - y.conj()).norm() < 1e-14);
        }
    }

    #[test]
    fn full_order_element_matches_outcome_amplitudes() {
        // For m = n the element reduces to conj(A_i) A_j times prod mu!.
        let u = haar_random_unitary(4, 5);
        let a = bell(2, 2, 1, &[0]);
        let b = bell(2, 2, 0, &[1]);
        for p in [pat(&[0, 3]), pat(&[2, 2])] {
            let amp = |psi: &StateVector| -> Complex64 {
                psi.terms()
                    .map(|(basis, x)| x * outcome_amplitude(&u, basis, &p, Statistics::Boson).unwrap())
                    .sum()
            };
            let mu: f64 = p.occupations().iter().map(|&(_, c)| (1..=c).product::<usize>() as f64).product();
            let expect = amp(&a).conj() * amp(&b) * mu;
            let got = ll_matrix_element(&u, &a, &b, &p).unwrap();
            assert!((got - expect).norm() < 1e-13);
        }
    }

    #[test]
    fn ll_rejects_identical_states() {
        let u = Unitary::identity(4);
        let a = bell(2, 2, 0, &[0]);
        assert!(matches!(
            ll_pairwise_distinguishable(&u, &a, &a, LL_TOL),
            Err(Error::Contract(_))
        ));
    }

    fn bs_analyzer() -> Unitary {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        // 50:50 BS between the photons, level by level: pairs (0,2), (1,3).
        Unitary::from_real_rows(&[
            &[h, 0.0, h, 0.0],
            &[0.0, h, 0.0, h],
            &[h, 0.0, -h, 0.0],
            &[0.0, h, 0.0, -h],
        ])
        .unwrap()
    }

    #[test]
    fn ll_on_beam_splitter_analyzer() {
        let u = bs_analyzer();
        let psi_plus = bell(2, 2, 0, &[1]);
        let psi_minus = bell(2, 2, 1, &[1]);
        let phi_plus = bell(2, 2, 0, &[0]);
        let phi_minus = bell(2, 2, 1, &[0]);
        assert!(ll_pairwise_distinguishable(&u, &psi_plus, &psi_minus, LL_TOL).unwrap());
        assert!(!ll_pairwise_distinguishable(&u, &phi_plus, &phi_minus, LL_TOL).unwrap());
        assert!(simplified_g1_distinguishable(&u, &psi_plus, &psi_minus, LL_TOL).unwrap());
        assert!(!simplified_g1_distinguishable(&u, &phi_plus, &phi_minus, LL_TOL).unwrap());
    }

    #[test]
    fn simplified_refused_for_g2() {
        let u = Unitary::identity(6);
        let a = bell(3, 2, 0, &[0, 0]);
        let b = bell(3, 2, 1, &[0, 0]);
        assert!(matches!(
            simplified_g1_distinguishable(&u, &a, &b, LL_TOL),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn signature_identity_two_photons() {
        let u = Unitary::identity(4);
        let s = detection_signature(&u, &pat(&[0]), ModeIndex::new(2, 4).unwrap(), Statistics::Boson).unwrap();
        let nonzero: Vec<usize> = (0..4).filter(|&i| s.vector[i].norm() > 0.0).collect();
        assert_eq!(nonzero, vec![0]);
    }

    #[test]
    fn signature_symmetry_and_antisymmetry() {
        let u = haar_random_unitary(6, 9);
        let a = detection_signature(&u, &pat(&[1]), ModeIndex::new(4, 6).unwrap(), Statistics::Boson).unwrap();
        let b = detection_signature(&u, &pat(&[4]), ModeIndex::new(1, 6).unwrap(), Statistics::Boson).unwrap();
        for (x, y) in a.vector.iter().zip(&b.vector) {
            assert!((x - y).norm() < 1e-14);
        }
        let f = detection_signature(&u, &pat(&[1]), ModeIndex::new(1, 6).unwrap(), Statistics::Fermion).unwrap();
        assert!(f.norm() < 1e-14);
    }

    #[test]
    fn signature_overlap_reproduces_pattern_amplitude() {
        let u = haar_random_unitary(6, 21);
        let label = BellLabel::new(3, 2, 1, vec![1, 0]).unwrap();
        for stats in [Statistics::Boson, Statistics::Fermion] {
            let psi = bell_state_with(&label, stats).unwrap();
            for (prefix, last) in [(vec![0, 3], 5), (vec![2, 2], 1), (vec![1, 4], 4)] {
                let full = pat(&prefix).extended(last);
                if stats == Statistics::Fermion && full.has_repeats() {
                    continue;
                }
                let sig = detection_signature(&u, &pat(&prefix), ModeIndex::new(last, 6).unwrap(), stats).unwrap();
                let mu: f64 = full.occupations().iter().map(|&(_, c)| (1..=c).product::<usize>() as f64).product();
                let via_sig = sig.overlap(&psi).unwrap() / mu.sqrt();
                let direct: Complex64 = psi
                    .terms()
                    .map(|(b, x)| x * outcome_amplitude(&u, b, &full, stats).unwrap())
                    .sum();
                // Same up to the fermionic ordering sign of the detector list.
                assert!((via_sig.norm() - direct.norm()).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn signature_rank_generic_values() {
        let u = haar_random_unitary(6, 1);
        assert_eq!(signature_rank(&u, &pat(&[2, 2]), Statistics::Boson, RANK_TOL).unwrap(), 4);
        let u = haar_random_unitary(8, 2);
        for s in 0..8 {
            assert_eq!(signature_rank(&u, &pat(&[s]), Statistics::Boson, RANK_TOL).unwrap(), 7);
        }
    }

    #[test]
    fn rank_of_empty_and_zero_sets() {
        assert_eq!(numerical_rank(&[], RANK_TOL), 0);
        assert_eq!(numerical_rank(&[vec![ZERO; 3]], RANK_TOL), 0);
    }

    #[test]
    fn limit_values() {
        let table = [(3, 2, 4), (3, 3, 7), (3, 4, 10), (4, 2, 5), (4, 3, 9), (4, 4, 13)];
        for (n, d, n1) in table {
            assert_eq!(limits(n, d).unwrap().n1, n1);
        }
        let l = limits(2, 8).unwrap();
        assert_eq!(l.n1, 15);
        assert!((l.cc_bits - 15f64.log2()).abs() < 1e-15);
        assert!((l.cc_bits - 3.9069).abs() < 1e-4);
        assert!((l.me - 15.0 / 64.0).abs() < 1e-15);
        assert_eq!(limits(4, 2).unwrap().n2_lower, 8);
        assert!(limits(1, 2).is_err());
    }
}
