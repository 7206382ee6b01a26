//! Matrix permanents and determinants, the bosonic and fermionic transfer
//! amplitude kernels.
//!
//! Both operate on row-major `k x k` slices so the hot path in
//! [`crate::fock`] can use stack buffers.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, ONE, ZERO};

/// Permanent of a square matrix.
pub fn permanent(m: &CMatrix) -> Result<Complex64> {
    let k = square_dim(m)?;
    let flat: Vec<Complex64> = (0..k)
        .flat_map(|i| (0..k).map(move |j| (i, j)))
        .map(|(i, j)| m[(i, j)])
        .collect();
    Ok(permanent_flat(k, &flat))
}

/// Determinant of a square matrix.
pub fn determinant(m: &CMatrix) -> Result<Complex64> {
    let k = square_dim(m)?;
    let mut flat: Vec<Complex64> = (0..k)
        .flat_map(|i| (0..k).map(move |j| (i, j)))
        .map(|(i, j)| m[(i, j)])
        .collect();
    Ok(determinant_flat(k, &mut flat))
}

fn square_dim(m: &CMatrix) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::Shape {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    Ok(m.nrows())
}

/// Permanent of the row-major `k x k` matrix `a`.
///
/// Direct expansion for `k <= 3`, Ryser's inclusion-exclusion formula with
/// Gray-code subset updates above that.
pub fn permanent_flat(k: usize, a: &[Complex64]) -> Complex64 {
    debug_assert_eq!(a.len(), k * k);
    match k {
        0 => ONE,
        1 => a[0],
        2 => a[0] * a[3] + a[1] * a[2],
        3 => {
            a[0] * (a[4] * a[8] + a[5] * a[7])
                + a[1] * (a[3] * a[8] + a[5] * a[6])
                + a[2] * (a[3] * a[7] + a[4] * a[6])
        }
        _ => ryser(k, a),
    }
}

fn ryser(k: usize, a: &[Complex64]) -> Complex64 {
    assert!(k < 64, "permanent size {k} out of range");
    let mut row_sums = vec![ZERO; k];
    let mut total = ZERO;
    let mut subset: u64 = 0;
    for step in 1u64..(1u64 << k) {
        // Gray code: exactly one column enters or leaves the subset.
        let col = step.trailing_zeros() as usize;
        let bit = 1u64 << col;
        let entering = subset & bit == 0;
        subset ^= bit;
        for (i, sum) in row_sums.iter_mut().enumerate() {
            if entering {
                *sum += a[i * k + col];
            } else {
                *sum -= a[i * k + col];
            }
        }
        let prod = row_sums.iter().fold(ONE, |acc, s| acc * s);
        if (k - subset.count_ones() as usize) % 2 == 0 {
            total += prod;
        } else {
            total -= prod;
        }
    }
    total
}

/// Determinant of the row-major `k x k` matrix `a` by LU with partial
/// pivoting. `a` is overwritten.
pub fn determinant_flat(k: usize, a: &mut [Complex64]) -> Complex64 {
    debug_assert_eq!(a.len(), k * k);
    match k {
        0 => return ONE,
        1 => return a[0],
        2 => return a[0] * a[3] - a[1] * a[2],
        _ => {}
    }
    let mut det = ONE;
    for col in 0..k {
        let pivot = (col..k)
            .max_by(|&x, &y| a[x * k + col].norm().total_cmp(&a[y * k + col].norm()))
            .unwrap();
        if a[pivot * k + col] == ZERO {
            return ZERO;
        }
        if pivot != col {
            for j in 0..k {
                a.swap(pivot * k + j, col * k + j);
            }
            det = -det;
        }
        let p = a[col * k + col];
        det *= p;
        for row in col + 1..k {
            let factor = a[row * k + col] / p;
            if factor == ZERO {
                continue;
            }
            for j in col..k {
                let v = a[col * k + j];
                a[row * k + j] -= factor * v;
            }
        }
    }
    det
}
