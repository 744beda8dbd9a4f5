//! Invariant random sampling on spheres, Grassmannians and `O(d)`.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::linalg;
use crate::multilinear::Subspace;

pub fn gaussian_vector<R: Rng + ?Sized>(d: usize, rng: &mut R) -> DVector<f64> {
    DVector::from_fn(d, |_, _| rng.sample(StandardNormal))
}

pub fn gaussian_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

/// Uniform point on `S^{d−1}` (normalized Gaussian).
pub fn sample_sphere<R: Rng + ?Sized>(d: usize, rng: &mut R) -> DVector<f64> {
    assert!(d >= 1);
    loop {
        let g = gaussian_vector(d, rng);
        let n = g.norm();
        if n > 1e-12 {
            return g / n;
        }
    }
}

/// Uniform subspace of dimension `k` in `R^d` (law `ν_k^d`).
pub fn sample_grassmann<R: Rng + ?Sized>(d: usize, k: usize, rng: &mut R) -> Subspace {
    assert!(k <= d);
    if k == 0 {
        return Subspace::zero(d);
    }
    loop {
        let g = gaussian_matrix(d, k, rng);
        let cols: Vec<_> = g.column_iter().map(|c| c.into_owned()).collect();
        if let Ok(frame) = linalg::gram_schmidt(d, &cols) {
            return Subspace::from_orthonormal(frame).expect("Gram–Schmidt output is orthonormal");
        }
    }
}

/// Uniform `j`-dimensional subspace of the span of `w`, as a subspace of `R^d`.
pub fn sample_grassmann_in<R: Rng + ?Sized>(w: &Subspace, j: usize, rng: &mut R) -> Subspace {
    let m = w.grade();
    assert!(j <= m, "cannot sample a {j}-subspace of a {m}-subspace");
    let local = sample_grassmann(m, j, rng);
    Subspace::from_orthonormal(w.frame() * local.frame())
        .expect("image of an orthonormal frame under an isometric embedding")
}

/// Random `j`-subspace `U` of the span of `w` with law `⟨A, U⟩² ν(dU)`,
/// normalized, where `A ⊂ w` has dimension `j`.
///
/// Rejection from the uniform law; the acceptance rate is `E⟨A, U⟩² = 1/C(m, j)`.
pub fn sample_grassmann_weighted<R: Rng + ?Sized>(
    w: &Subspace,
    a: &Subspace,
    rng: &mut R,
) -> Subspace {
    let j = a.grade();
    loop {
        let u = sample_grassmann_in(w, j, rng);
        let c = crate::multilinear::blade_inner(a, &u).expect("equal grades");
        if rng.random::<f64>() < c * c {
            return u;
        }
    }
}

/// Haar-distributed orthogonal matrix (Gaussian QR with sign correction).
pub fn sample_rotation<R: Rng + ?Sized>(d: usize, rng: &mut R) -> DMatrix<f64> {
    loop {
        let g = gaussian_matrix(d, d, rng);
        let qr = g.qr();
        let r = qr.r();
        if (0..d).any(|i| r[(i, i)].abs() < 1e-12) {
            continue;
        }
        let mut q = qr.q();
        for i in 0..d {
            if r[(i, i)] < 0.0 {
                q.column_mut(i).neg_mut();
            }
        }
        return q;
    }
}

/// The hyperplane `u^⊥` of a unit vector.
pub fn orthogonal_hyperplane(u: &DVector<f64>) -> Subspace {
    let frame = DMatrix::from_column_slice(u.len(), 1, u.as_slice());
    Subspace::from_orthonormal(linalg::complement(&frame)).expect("completion is orthonormal")
}
