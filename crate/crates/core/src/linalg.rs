//! Small dense helpers shared by the geometric modules.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Residual tolerance below which a vector is treated as linearly dependent.
pub const RANK_TOL: f64 = 1e-10;

/// Orthonormality tolerance for frames.
pub const ORTHO_TOL: f64 = 1e-12;

/// Orthonormalizes `vectors` (modified Gram–Schmidt, two passes).
///
/// Fails when a residual drops below `RANK_TOL` relative to the input norm.
pub fn gram_schmidt(dim: usize, vectors: &[DVector<f64>]) -> Result<DMatrix<f64>> {
    let mut out = DMatrix::zeros(dim, vectors.len());
    for (j, v) in vectors.iter().enumerate() {
        if v.len() != dim {
            return Err(Error::Dimension(format!(
                "vector of length {} in ambient dimension {dim}",
                v.len()
            )));
        }
        let scale = v.norm().max(1.0);
        let mut w = v.clone();
        for _ in 0..2 {
            for i in 0..j {
                let c = out.column(i).dot(&w);
                w.axpy(-c, &out.column(i), 1.0);
            }
        }
        let n = w.norm();
        if n <= RANK_TOL * scale {
            return Err(Error::RankDeficient {
                residual: n / scale,
                tol: RANK_TOL,
            });
        }
        out.set_column(j, &(w / n));
    }
    Ok(out)
}

/// Extends the orthonormal columns of `frame` to an orthonormal basis of the
/// ambient space by Gram–Schmidt over `e_1, …, e_d` in index order.
///
/// The first `frame.ncols()` columns of the result are `frame` itself.
pub fn complete_basis(frame: &DMatrix<f64>) -> DMatrix<f64> {
    let d = frame.nrows();
    let k = frame.ncols();
    let mut out = DMatrix::zeros(d, d);
    out.columns_mut(0, k).copy_from(frame);
    let mut filled = k;
    for e in 0..d {
        if filled == d {
            break;
        }
        let mut w = DVector::zeros(d);
        w[e] = 1.0;
        for _ in 0..2 {
            for i in 0..filled {
                let c = out.column(i).dot(&w);
                w.axpy(-c, &out.column(i), 1.0);
            }
        }
        let n = w.norm();
        // Each unit vector leaves a residual of at least 1/sqrt(d) for some e.
        if n > 1e-6 {
            out.set_column(filled, &(w / n));
            filled += 1;
        }
    }
    debug_assert_eq!(filled, d);
    out
}

/// Orthonormal basis (as columns) of the orthogonal complement of the column
/// span of an orthonormal `frame`.
pub fn complement(frame: &DMatrix<f64>) -> DMatrix<f64> {
    let full = complete_basis(frame);
    let k = frame.ncols();
    full.columns(k, frame.nrows() - k).into_owned()
}

/// Determinant of a square matrix (zero-sized matrices have determinant 1).
pub fn det(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 {
        return 1.0;
    }
    m.clone().determinant()
}

/// Smallest singular value of `m`.
pub fn smallest_singular_value(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    m.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min)
}

/// Maximum deviation of `frame^T frame` from the identity.
pub fn orthonormality_defect(frame: &DMatrix<f64>) -> f64 {
    let g = frame.transpose() * frame;
    let k = g.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..k {
        for j in 0..k {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((g[(i, j)] - target).abs());
        }
    }
    worst
}

/// Affine rank of a point set together with an orthonormal frame of the
/// linear space parallel to its affine hull.
pub fn affine_frame(points: &[&DVector<f64>], dim: usize) -> DMatrix<f64> {
    let Some(origin) = points.first() else {
        return DMatrix::zeros(dim, 0);
    };
    let mut cols: Vec<DVector<f64>> = Vec::new();
    let scale = points
        .iter()
        .map(|p| (*p - *origin).norm())
        .fold(0.0, f64::max)
        .max(1e-300);
    for p in points.iter().skip(1) {
        let mut w = *p - *origin;
        for _ in 0..2 {
            for c in &cols {
                let t = c.dot(&w);
                w.axpy(-t, c, 1.0);
            }
        }
        let n = w.norm();
        if n > 1e-9 * scale {
            cols.push(w / n);
        }
        if cols.len() == dim {
            break;
        }
    }
    if cols.is_empty() {
        DMatrix::zeros(dim, 0)
    } else {
        DMatrix::from_columns(&cols)
    }
}

/// Clamped arc-cosine of the cosine between two unit vectors.
pub fn angle_between(u: &DVector<f64>, v: &DVector<f64>) -> f64 {
    u.dot(v).clamp(-1.0, 1.0).acos()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn completion_keeps_frame_and_is_orthonormal() {
        let f = gram_schmidt(
            4,
            &[
                DVector::from_vec(vec![1.0, 1.0, 0.0, 0.0]),
                DVector::from_vec(vec![0.0, 1.0, 1.0, 0.0]),
            ],
        )
        .unwrap();
        let full = complete_basis(&f);
        assert!(orthonormality_defect(&full) < 1e-12);
        assert_eq!(full.columns(0, 2), f.columns(0, 2));
    }

    #[test]
    fn dependent_vectors_rejected() {
        let v = DVector::from_vec(vec![1.0, 2.0, 3.0]);
        let err = gram_schmidt(3, &[v.clone(), v * 2.0]).unwrap_err();
        assert!(matches!(err, Error::RankDeficient { .. }));
    }

    #[test]
    fn empty_determinant_is_one() {
        assert_eq!(det(&DMatrix::zeros(0, 0)), 1.0);
    }
}
