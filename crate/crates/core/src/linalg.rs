//! Dense complex matrices and the validated [`Unitary`] newtype.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

/// Maximum tolerated `max |U^dag U - I|` for a matrix to count as unitary.
pub const UNITARITY_TOL: f64 = 1e-10;

pub(crate) const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub(crate) const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Largest entry of `|M^dag M - I|`.
pub fn unitarity_deviation(m: &CMatrix) -> f64 {
    let gram = m.adjoint() * m;
    let mut worst = 0.0f64;
    for i in 0..gram.nrows() {
        for j in 0..gram.ncols() {
            let target = if i == j { ONE } else { ZERO };
            worst = worst.max((gram[(i, j)] - target).norm());
        }
    }
    worst
}

/// Largest entrywise distance between two matrices of equal shape.
pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// A square complex matrix validated as unitary at construction.
///
/// Column `p` holds the output-mode coefficients of input mode `p`:
/// `a_p^dag -> sum_s U[s, p] c_s^dag`.
#[derive(Debug, Clone, PartialEq)]
pub struct Unitary {
    matrix: CMatrix,
}

impl Unitary {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::Shape {
                rows: matrix.nrows(),
                cols: matrix.ncols(),
            });
        }
        let deviation = unitarity_deviation(&matrix);
        if !(deviation <= UNITARITY_TOL) {
            return Err(Error::NonUnitary { deviation });
        }
        Ok(Unitary { matrix })
    }

    /// Wraps a matrix that is unitary by construction (products of catalog
    /// devices, exponentials of Hermitian generators).
    pub(crate) fn new_unchecked(matrix: CMatrix) -> Self {
        debug_assert!(unitarity_deviation(&matrix) <= 1e-8);
        Unitary { matrix }
    }

    pub fn identity(dim: usize) -> Self {
        Unitary {
            matrix: CMatrix::identity(dim, dim),
        }
    }

    /// Real rows-of-rows constructor, mostly for tests and fixed devices.
    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let n = rows.len();
        let mut m = CMatrix::zeros(n, n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::Shape {
                    rows: n,
                    cols: row.len(),
                });
            }
            for (j, v) in row.iter().enumerate() {
                m[(i, j)] = Complex64::new(*v, 0.0);
            }
        }
        Unitary::new(m)
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.matrix[(row, col)]
    }

    pub fn adjoint(&self) -> Unitary {
        Unitary {
            matrix: self.matrix.adjoint(),
        }
    }

    /// `self` applied after `first`, i.e. the product `self * first`.
    pub fn after(&self, first: &Unitary) -> Result<Unitary> {
        if self.dim() != first.dim() {
            return Err(Error::Dimension {
                expected: self.dim(),
                got: first.dim(),
            });
        }
        Ok(Unitary {
            matrix: &self.matrix * &first.matrix,
        })
    }

    pub fn deviation(&self) -> f64 {
        unitarity_deviation(&self.matrix)
    }

    /// Permutes output rows: row `s` of the result is row `perm[s]` of `self`.
    pub fn permute_rows(&self, perm: &[usize]) -> Result<Unitary> {
        let n = self.dim();
        if perm.len() != n {
            return Err(Error::Dimension {
                expected: n,
                got: perm.len(),
            });
        }
        let mut seen = vec![false; n];
        for &p in perm {
            if p >= n || seen[p] {
                return Err(Error::Wiring(format!("{perm:?} is not a permutation")));
            }
            seen[p] = true;
        }
        let m = CMatrix::from_fn(n, n, |i, j| self.matrix[(perm[i], j)]);
        Ok(Unitary { matrix: m })
    }

    /// Re-orthonormalizes the columns (QR with a phase-fixed diagonal), removing
    /// accumulated round-off drift.
    pub fn reorthonormalize(&self) -> Unitary {
        Unitary {
            matrix: phase_fixed_q(self.matrix.clone()),
        }
    }
}

/// Q factor of a QR decomposition with R's diagonal made real positive.
pub(crate) fn phase_fixed_q(m: CMatrix) -> CMatrix {
    let n = m.ncols();
    let qr = m.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..n {
        let d = r[(j, j)];
        let norm = d.norm();
        let phase = if norm > 0.0 { d / norm } else { ONE };
        for i in 0..q.nrows() {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Serialized form: row-major list of `[re, im]` pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MatrixRepr(pub Vec<Vec<[f64; 2]>>);

impl From<&CMatrix> for MatrixRepr {
    fn from(m: &CMatrix) -> Self {
        MatrixRepr(
            (0..m.nrows())
                .map(|i| {
                    (0..m.ncols())
                        .map(|j| [m[(i, j)].re, m[(i, j)].im])
                        .collect()
                })
                .collect(),
        )
    }
}

impl MatrixRepr {
    pub fn to_matrix(&self) -> Result<CMatrix> {
        let rows = self.0.len();
        let cols = self.0.first().map_or(0, Vec::len);
        if self.0.iter().any(|r| r.len() != cols) {
            return Err(Error::Parse("ragged matrix rows".into()));
        }
        Ok(CMatrix::from_fn(rows, cols, |i, j| {
            let [re, im] = self.0[i][j];
            Complex64::new(re, im)
        }))
    }
}

impl Serialize for Unitary {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        MatrixRepr::from(&self.matrix).serialize(s)
    }
}

impl<'de> Deserialize<'de> for Unitary {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = MatrixRepr::deserialize(d)?;
        let m = repr.to_matrix().map_err(serde::de::Error::custom)?;
        Unitary::new(m).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_square_and_non_unitary() {
        assert!(matches!(
            Unitary::new(CMatrix::zeros(2, 3)),
            Err(Error::Shape { rows: 2, cols: 3 })
        ));
        let err = Unitary::from_real_rows(&[&[1.0, 1.0], &[0.0, 1.0]]).unwrap_err();
        match err {
            Error::NonUnitary { deviation } => assert!((deviation - 1.0).abs() < 1e-12),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn serde_round_trip_preserves_entries() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let u = Unitary::from_real_rows(&[&[h, h], &[h, -h]]).unwrap();
        let text = serde_json::to_string(&u).unwrap();
        let back: Unitary = serde_json::from_str(&text).unwrap();
        assert_eq!(u, back);
    }

    #[test]
    fn reorthonormalize_removes_drift() {
        let mut m = CMatrix::identity(3, 3);
        m[(0, 1)] = Complex64::new(1e-7, 0.0);
        let u = Unitary { matrix: m }.reorthonormalize();
        assert!(u.deviation() < 1e-14);
    }
}
