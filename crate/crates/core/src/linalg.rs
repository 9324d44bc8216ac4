//! Dense matrix helpers shared by the other modules.

use alloc::vec::Vec;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type Mat = DMatrix<f64>;
pub type CMat = DMatrix<Complex64>;

/// Relative size of the imaginary residue tolerated when a complex
/// expression must come out real.
pub const IMAG_RESIDUE_TOL: f64 = 1e-9;

pub fn max_abs(m: &Mat) -> f64 {
    m.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
}

pub fn cmax_abs(m: &CMat) -> f64 {
    m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

pub fn to_complex(m: &Mat) -> CMat {
    m.map(|x| Complex64::new(x, 0.0))
}

/// Drops the imaginary part of `m` after checking it is below
/// `IMAG_RESIDUE_TOL * (1 + largest entry magnitude)`.
///
/// Returns the offending residue on failure so callers can map it to
/// their own error variant.
pub fn real_part_checked(m: &CMat) -> core::result::Result<Mat, f64> {
    let scale = 1.0 + cmax_abs(m);
    let residue = m.iter().fold(0.0_f64, |acc, z| acc.max(z.im.abs()));
    if residue > IMAG_RESIDUE_TOL * scale {
        return Err(residue);
    }
    Ok(m.map(|z| z.re))
}

/// Horizontal concatenation; all blocks must share the row count.
pub fn hstack(rows: usize, blocks: &[&Mat]) -> Mat {
    let cols: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = Mat::zeros(rows, cols);
    let mut c = 0;
    for b in blocks {
        debug_assert_eq!(b.nrows(), rows);
        out.view_mut((0, c), (rows, b.ncols())).copy_from(*b);
        c += b.ncols();
    }
    out
}

pub fn block_diag(blocks: &[&Mat]) -> Mat {
    let rows: usize = blocks.iter().map(|b| b.nrows()).sum();
    let cols: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = Mat::zeros(rows, cols);
    let (mut r, mut c) = (0, 0);
    for b in blocks {
        out.view_mut((r, c), (b.nrows(), b.ncols())).copy_from(*b);
        r += b.nrows();
        c += b.ncols();
    }
    out
}

pub fn symmetrize(m: &Mat) -> Mat {
    (m + m.transpose()) * 0.5
}

pub fn skew_part(m: &Mat) -> Mat {
    (m - m.transpose()) * 0.5
}

pub fn kron(a: &Mat, b: &Mat) -> Mat {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    let mut out = Mat::zeros(ar * br, ac * bc);
    for i in 0..ar {
        for j in 0..ac {
            let s = a[(i, j)];
            if s != 0.0 {
                out.view_mut((i * br, j * bc), (br, bc)).copy_from(&(b * s));
            }
        }
    }
    out
}

pub fn eigenvalues(m: &Mat) -> Vec<Complex64> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    m.clone().complex_eigenvalues().iter().copied().collect()
}

/// Largest real part over the spectrum; `-inf` for an empty matrix.
pub fn max_real_part(m: &Mat) -> f64 {
    eigenvalues(m)
        .iter()
        .fold(f64::NEG_INFINITY, |acc, z| acc.max(z.re))
}

pub fn spectral_radius(m: &Mat) -> f64 {
    eigenvalues(m)
        .iter()
        .fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

pub fn is_hurwitz(m: &Mat) -> bool {
    max_real_part(m) < 0.0
}

/// Ratio of the smallest to the largest singular value (0 for a zero matrix).
pub fn rcond(m: &Mat) -> f64 {
    let sv = m.clone().singular_values();
    let max = sv.iter().fold(0.0_f64, |a, &s| a.max(s));
    let min = sv.iter().fold(f64::INFINITY, |a, &s| a.min(s));
    if max == 0.0 {
        0.0
    } else {
        min / max
    }
}

pub fn inverse(m: &Mat) -> Result<Mat> {
    m.clone()
        .lu()
        .try_inverse()
        .ok_or(Error::Domain("matrix is singular"))
}

pub fn check_square(what: &'static str, m: &Mat, n: usize) -> Result<()> {
    check_shape(what, m, n, n)
}

pub fn check_shape(what: &'static str, m: &Mat, rows: usize, cols: usize) -> Result<()> {
    if m.nrows() != rows {
        return Err(Error::DimensionMismatch {
            what,
            expected: rows,
            found: m.nrows(),
        });
    }
    if m.ncols() != cols {
        return Err(Error::DimensionMismatch {
            what,
            expected: cols,
            found: m.ncols(),
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kron_of_identities_is_identity() {
        let k = kron(&Mat::identity(2, 2), &Mat::identity(3, 3));
        assert_eq!(k, Mat::identity(6, 6));
    }

    #[test]
    fn real_part_rejects_imaginary_residue() {
        let m = CMat::from_element(2, 2, Complex64::new(1.0, 1e-3));
        assert!(real_part_checked(&m).is_err());
        let m = CMat::from_element(2, 2, Complex64::new(1.0, 1e-12));
        assert_eq!(real_part_checked(&m).unwrap(), Mat::from_element(2, 2, 1.0));
    }

    #[test]
    fn block_diag_places_blocks() {
        let a = Mat::from_element(1, 1, 2.0);
        let b = Mat::from_element(2, 1, 3.0);
        let m = block_diag(&[&a, &b]);
        assert_eq!(m.shape(), (3, 2));
        assert_eq!(m[(0, 0)], 2.0);
        assert_eq!(m[(2, 1)], 3.0);
        assert_eq!(m[(0, 1)], 0.0);
    }
}
