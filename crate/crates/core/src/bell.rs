//! n-particle, D-level Bell states and local operations on them.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{self, StateVector, Statistics, MAX_PHOTONS};
use crate::linalg::{unitarity_deviation, CMatrix, Unitary, ONE, UNITARITY_TOL, ZERO};

/// Cap on `n * D` for explicit Bell-state construction.
pub const MAX_MODES: usize = 20;
/// Cap on the number of Bell states in a Gram audit.
pub const MAX_GRAM: usize = 4096;

/// Label `(P; i_1, ..., i_{n-1})` of an n-particle D-level Bell state.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BellLabel {
    n: usize,
    d: usize,
    p: usize,
    indices: Vec<usize>,
}

impl BellLabel {
    pub fn new(n: usize, d: usize, p: usize, indices: Vec<usize>) -> Result<Self> {
        if n < 2 || d < 2 {
            return Err(Error::Label(format!("need n >= 2 and D >= 2, got n={n}, D={d}")));
        }
        if indices.len() != n - 1 {
            return Err(Error::Label(format!(
                "expected {} shift indices, got {}",
                n - 1,
                indices.len()
            )));
        }
        if p >= d || indices.iter().any(|&i| i >= d) {
            return Err(Error::Label(format!(
                "components of ({p}; {indices:?}) must lie in [0, {d})"
            )));
        }
        Ok(BellLabel { n, d, p, indices })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn phase_index(&self) -> usize {
        self.p
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    /// Position in the lexicographic order of [`all_labels`].
    pub fn ordinal(&self) -> usize {
        std::iter::once(self.p)
            .chain(self.indices.iter().copied())
            .fold(0, |acc, x| acc * self.d + x)
    }

    pub fn from_ordinal(n: usize, d: usize, mut ordinal: usize) -> Result<Self> {
        let mut digits = vec![0; n];
        for slot in digits.iter_mut().rev() {
            *slot = ordinal % d;
            ordinal /= d;
        }
        if ordinal != 0 {
            return Err(Error::Label(format!("ordinal out of range for n={n}, D={d}")));
        }
        BellLabel::new(n, d, digits[0], digits[1..].to_vec())
    }
}

impl fmt::Display for BellLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let idx: Vec<String> = self.indices.iter().map(ToString::to_string).collect();
        write!(f, "({};{})", self.p, idx.join(","))
    }
}

/// All `D^n` labels, `P` most significant.
pub fn all_labels(n: usize, d: usize) -> Result<Vec<BellLabel>> {
    let count = checked_pow(d, n)?;
    (0..count).map(|o| BellLabel::from_ordinal(n, d, o)).collect()
}

fn checked_pow(d: usize, n: usize) -> Result<usize> {
    u32::try_from(n)
        .ok()
        .and_then(|e| d.checked_pow(e))
        .ok_or_else(|| Error::Resource(format!("{d}^{n} overflows")))
}

/// `sum_j exp(2 pi i j P / D) / sqrt(D)` times photon `k` in level
/// `(j + i_{k-1}) mod D` (with `i_0 = 0`), as a bosonic state.
pub fn bell_state(label: &BellLabel) -> Result<StateVector> {
    bell_state_with(label, Statistics::Boson)
}

/// As [`bell_state`], for either statistics. Photons are created in block
/// order, so fermionic states carry no extra reordering sign.
pub fn bell_state_with(label: &BellLabel, statistics: Statistics) -> Result<StateVector> {
    let (n, d) = (label.n, label.d);
    if n * d > MAX_MODES || n > MAX_PHOTONS {
        return Err(Error::Resource(format!(
            "n*D = {} exceeds the cap of {MAX_MODES}",
            n * d
        )));
    }
    let norm = 1.0 / (d as f64).sqrt();
    let terms = (0..d).map(|j| {
        let phase = Complex64::from_polar(norm, 2.0 * PI * (j * label.p) as f64 / d as f64);
        let modes: Vec<usize> = (0..n)
            .map(|k| {
                let shift = if k == 0 { 0 } else { label.indices[k - 1] };
                k * d + (j + shift) % d
            })
            .collect();
        (modes, phase)
    });
    StateVector::from_terms(terms, n * d, statistics)
}

/// Gram matrix `<B_a|B_b>` over all Bell states, in [`all_labels`] order.
pub fn bell_gram(n: usize, d: usize) -> Result<CMatrix> {
    let count = checked_pow(d, n)?;
    if count > MAX_GRAM {
        return Err(Error::Resource(format!(
            "{count} Bell states exceeds the Gram cap of {MAX_GRAM}"
        )));
    }
    let states: Vec<StateVector> = all_labels(n, d)?
        .iter()
        .map(bell_state)
        .collect::<Result<_>>()?;
    Ok(CMatrix::from_fn(count, count, |a, b| {
        states[a].inner(&states[b])
    }))
}

/// Embeds a `D x D` matrix on photon block `photon` of an `nD`-mode system.
pub fn embed_block(u: &CMatrix, photon: usize, n: usize) -> Result<Unitary> {
    let d = u.nrows();
    if u.ncols() != d {
        return Err(Error::Shape {
            rows: d,
            cols: u.ncols(),
        });
    }
    if photon >= n {
        return Err(Error::Dimension {
            expected: n,
            got: photon,
        });
    }
    let deviation = unitarity_deviation(u);
    if !(deviation <= UNITARITY_TOL) {
        return Err(Error::NonUnitary { deviation });
    }
    let mut m = CMatrix::identity(n * d, n * d);
    m.view_mut((photon * d, photon * d), (d, d)).copy_from(u);
    Ok(Unitary::new_unchecked(m))
}

/// Applies `u` to the internal levels of one photon block.
pub fn local_unitary(psi: &StateVector, photon: usize, u: &CMatrix) -> Result<StateVector> {
    let n = psi.photon_number();
    let d = u.nrows();
    if d == 0 || d * n != psi.mode_count() {
        return Err(Error::Dimension {
            expected: psi.mode_count() / n.max(1),
            got: d,
        });
    }
    let full = embed_block(u, photon, n)?;
    fock::transform(&full, psi)
}

/// Cyclic level shift `|l> -> |l+1 mod D>`.
pub fn weyl_x(d: usize) -> CMatrix {
    CMatrix::from_fn(d, d, |r, c| if r == (c + 1) % d { ONE } else { ZERO })
}

/// Clock operator `|l> -> exp(2 pi i l / D) |l>`.
pub fn weyl_z(d: usize) -> CMatrix {
    CMatrix::from_fn(d, d, |r, c| {
        if r == c {
            Complex64::from_polar(1.0, 2.0 * PI * r as f64 / d as f64)
        } else {
            ZERO
        }
    })
}

/// Discrete Fourier matrix `F[r][c] = exp(2 pi i r c / D) / sqrt(D)`.
pub fn dft(d: usize) -> CMatrix {
    let norm = 1.0 / (d as f64).sqrt();
    CMatrix::from_fn(d, d, |r, c| {
        Complex64::from_polar(norm, 2.0 * PI * ((r * c) % d) as f64 / d as f64)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::FockState;
    use proptest::prelude::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn label(n: usize, d: usize, p: usize, i: &[usize]) -> BellLabel {
        BellLabel::new(n, d, p, i.to_vec()).unwrap()
    }

    fn basis(modes: &[usize]) -> FockState {
        FockState::new(modes.to_vec(), Statistics::Boson).unwrap()
    }

    #[test]
    fn two_qubit_phi_plus() {
        let psi = bell_state(&label(2, 2, 0, &[0])).unwrap();
        assert_eq!(psi.len(), 2);
        for m in [[0, 2], [1, 3]] {
            assert!((psi.amplitude(&basis(&m)) - Complex64::new(FRAC_1_SQRT_2, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn two_qubit_singlet_sign() {
        let psi = bell_state(&label(2, 2, 1, &[1])).unwrap();
        // |0>|1> - |1>|0>: modes {0,3} and {1,2}.
        assert!((psi.amplitude(&basis(&[0, 3])).re - FRAC_1_SQRT_2).abs() < 1e-15);
        assert!((psi.amplitude(&basis(&[1, 2])).re + FRAC_1_SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn three_qutrit_example() {
        let psi = bell_state(&label(3, 3, 1, &[1, 2])).unwrap();
        let w = |j: usize| Complex64::from_polar(1.0 / 3f64.sqrt(), 2.0 * PI * j as f64 / 3.0);
        for j in 0..3 {
            let modes = [j, 3 + (j + 1) % 3, 6 + (j + 2) % 3];
            assert!((psi.amplitude(&basis(&modes)) - w(j)).norm() < 1e-15);
        }
        assert_eq!(psi.len(), 3);
    }

    #[test]
    fn label_validation() {
        assert!(matches!(BellLabel::new(2, 2, 2, vec![0]), Err(Error::Label(_))));
        assert!(matches!(BellLabel::new(3, 2, 0, vec![0]), Err(Error::Label(_))));
        assert!(matches!(BellLabel::new(2, 2, 0, vec![5]), Err(Error::Label(_))));
        let big = BellLabel::new(3, 7, 0, vec![0, 0]).unwrap();
        assert!(matches!(bell_state(&big), Err(Error::Resource(_))));
    }

    #[test]
    fn ordinal_round_trip() {
        let labels = all_labels(3, 3).unwrap();
        assert_eq!(labels.len(), 27);
        for (k, l) in labels.iter().enumerate() {
            assert_eq!(l.ordinal(), k);
        }
        assert!(labels.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn gram_is_identity() {
        for (n, d) in [(2, 2), (2, 3), (3, 2), (2, 5), (4, 2)] {
            let g = bell_gram(n, d).unwrap();
            let dim = g.nrows();
            let id = CMatrix::identity(dim, dim);
            assert!(crate::linalg::max_abs_diff(&g, &id) < 1e-10, "({n},{d})");
        }
        assert!(matches!(bell_gram(2, 65), Err(Error::Resource(_))));
    }

    #[test]
    fn pauli_on_photon_zero() {
        let phi = bell_state(&label(2, 2, 0, &[0])).unwrap();
        let same = local_unitary(&phi, 0, &CMatrix::identity(2, 2)).unwrap();
        assert!((phi.inner(&same).norm() - 1.0).abs() < 1e-12);

        let x = local_unitary(&phi, 0, &weyl_x(2)).unwrap();
        let target = bell_state(&label(2, 2, 0, &[1])).unwrap();
        assert!((target.inner(&x).norm() - 1.0).abs() < 1e-12);

        let z = local_unitary(&phi, 0, &weyl_z(2)).unwrap();
        let target = bell_state(&label(2, 2, 1, &[0])).unwrap();
        assert!((target.inner(&z).norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn local_unitary_rejects_bad_shapes() {
        let phi = bell_state(&label(2, 2, 0, &[0])).unwrap();
        assert!(local_unitary(&phi, 0, &CMatrix::identity(3, 3)).is_err());
        assert!(local_unitary(&phi, 2, &CMatrix::identity(2, 2)).is_err());
        let bad = CMatrix::from_element(2, 2, ONE);
        assert!(matches!(
            local_unitary(&phi, 0, &bad),
            Err(Error::NonUnitary { .. })
        ));
    }

    fn label_strategy() -> impl Strategy<Value = BellLabel> {
        prop_oneof![
            Just((2usize, 2usize)),
            Just((2, 3)),
            Just((2, 4)),
            Just((3, 2)),
            Just((3, 3)),
            Just((4, 2))
        ]
        .prop_flat_map(|(n, d)| (Just(n), Just(d), 0..d.pow(n as u32)))
        .prop_map(|(n, d, o)| BellLabel::from_ordinal(n, d, o).unwrap())
    }

    proptest! {
        // X on photon 0 maps (P; i) to (P; i - 1) up to a phase; Z maps P to P + 1.
        #[test]
        fn weyl_covariance(l in label_strategy()) {
            let (n, d) = (l.n(), l.d());
            let psi = bell_state(&l).unwrap();

            let shifted = local_unitary(&psi, 0, &weyl_x(d)).unwrap();
            let idx: Vec<usize> = l.indices().iter().map(|&i| (i + d - 1) % d).collect();
            let expect = bell_state(&BellLabel::new(n, d, l.phase_index(), idx).unwrap()).unwrap();
            prop_assert!((expect.inner(&shifted).norm() - 1.0).abs() < 1e-12);

            let clocked = local_unitary(&psi, 0, &weyl_z(d)).unwrap();
            let expect = bell_state(
                &BellLabel::new(n, d, (l.phase_index() + 1) % d, l.indices().to_vec()).unwrap(),
            )
            .unwrap();
            prop_assert!((expect.inner(&clocked).norm() - 1.0).abs() < 1e-12);
        }
    }
}
