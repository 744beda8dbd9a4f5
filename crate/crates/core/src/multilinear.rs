//! Exterior algebra over `R^d` for small `d`.
//!
//! A [`MultiVector`] of grade `k` stores its coordinates in the basis
//! `e_I = e_{i_1} ∧ … ∧ e_{i_k}`, `i_1 < … < i_k`, with the index sets `I`
//! listed in lexicographic order. Signs of products follow the parity of the
//! sorted merge of the index sets.
//!
//! A [`Subspace`] is a linear subspace carried by an orthonormal frame; its
//! blade (the simple unit k-vector of the frame) is defined up to sign, and
//! every quantity derived from it downstream is a square.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;

/// Largest supported ambient dimension.
pub const MAX_DIM: usize = 8;

/// Binomial coefficient `C(n, k)`, zero for `k > n`.
pub fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u64 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u64 / (i + 1) as u64;
    }
    acc
}

/// Binomial coefficient on signed arguments: zero unless `0 ≤ b ≤ a`.
pub fn binomial_signed(a: i64, b: i64) -> f64 {
    if a < 0 || b < 0 || b > a {
        0.0
    } else {
        binomial(a as usize, b as usize) as f64
    }
}

/// All `k`-subsets of `{0, …, n-1}` in lexicographic order, as sorted index lists.
pub fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if k <= n {
        rec(0, n, k, &mut Vec::with_capacity(k), &mut out);
    }
    out
}

fn mask_of(set: &[usize]) -> u32 {
    set.iter().fold(0u32, |m, &i| m | (1 << i))
}

/// Lookup table between lexicographic positions and bitmasks of k-subsets.
struct BasisIndex {
    masks: Vec<u32>,
    position: Vec<usize>,
}

impl BasisIndex {
    fn new(d: usize, k: usize) -> Self {
        let masks: Vec<u32> = subsets(d, k).iter().map(|s| mask_of(s)).collect();
        let mut position = vec![usize::MAX; 1 << d];
        for (i, &m) in masks.iter().enumerate() {
            position[m as usize] = i;
        }
        Self { masks, position }
    }
}

/// Sign of `e_I ∧ e_J` relative to `e_{I ∪ J}` for disjoint masks.
fn merge_sign(i: u32, j: u32) -> f64 {
    let mut inversions = 0u32;
    let mut rest = j;
    while rest != 0 {
        let b = rest.trailing_zeros();
        // elements of I above b must pass over it
        inversions += (i >> (b + 1)).count_ones();
        rest &= rest - 1;
    }
    if inversions % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// A homogeneous k-vector in `⋀_k R^d`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MultiVector {
    dim: usize,
    grade: usize,
    coeffs: Vec<f64>,
}

impl MultiVector {
    pub fn zero(dim: usize, grade: usize) -> Self {
        assert!(dim <= MAX_DIM && grade <= dim, "grade {grade} in dimension {dim}");
        Self {
            dim,
            grade,
            coeffs: vec![0.0; binomial(dim, grade) as usize],
        }
    }

    pub fn scalar(dim: usize, value: f64) -> Self {
        let mut s = Self::zero(dim, 0);
        s.coeffs[0] = value;
        s
    }

    /// The basis blade `e_I` for a strictly increasing index list (0-based).
    pub fn basis(dim: usize, indices: &[usize]) -> Result<Self> {
        if indices.windows(2).any(|w| w[0] >= w[1]) || indices.iter().any(|&i| i >= dim) {
            return Err(Error::Dimension(format!(
                "basis indices {indices:?} not increasing in 0..{dim}"
            )));
        }
        let mut out = Self::zero(dim, indices.len());
        let idx = BasisIndex::new(dim, indices.len());
        out.coeffs[idx.position[mask_of(indices) as usize]] = 1.0;
        Ok(out)
    }

    pub fn from_vector(v: &DVector<f64>) -> Self {
        Self {
            dim: v.len(),
            grade: 1,
            coeffs: v.iter().cloned().collect(),
        }
    }

    pub fn from_coeffs(dim: usize, grade: usize, coeffs: Vec<f64>) -> Result<Self> {
        if grade > dim || coeffs.len() as u64 != binomial(dim, grade) {
            return Err(Error::Dimension(format!(
                "{} coefficients for grade {grade} in dimension {dim}",
                coeffs.len()
            )));
        }
        Ok(Self { dim, grade, coeffs })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn grade(&self) -> usize {
        self.grade
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Coefficient of `e_I` for a sorted 0-based index list.
    pub fn coeff(&self, indices: &[usize]) -> f64 {
        let idx = BasisIndex::new(self.dim, self.grade);
        let m = mask_of(indices) as usize;
        match idx.position.get(m) {
            Some(&p) if p != usize::MAX => self.coeffs[p],
            _ => 0.0,
        }
    }

    pub fn norm_squared(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_squared().sqrt()
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
            ..self.clone()
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        Ok(Self {
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a + b)
                .collect(),
            ..self.clone()
        })
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::Dimension(format!(
                "ambient dimensions {} and {}",
                self.dim, other.dim
            )));
        }
        if self.grade != other.grade {
            return Err(Error::Grade {
                left: self.grade,
                right: other.grade,
            });
        }
        Ok(())
    }
}

/// Exterior product `x ∧ y`.
pub fn wedge(x: &MultiVector, y: &MultiVector) -> Result<MultiVector> {
    if x.dim != y.dim {
        return Err(Error::Dimension(format!(
            "ambient dimensions {} and {}",
            x.dim, y.dim
        )));
    }
    let d = x.dim;
    let grade = x.grade + y.grade;
    if grade > d {
        return Err(Error::Dimension(format!(
            "grades {} + {} exceed dimension {d}",
            x.grade, y.grade
        )));
    }
    let ix = BasisIndex::new(d, x.grade);
    let iy = BasisIndex::new(d, y.grade);
    let iout = BasisIndex::new(d, grade);
    let mut out = MultiVector::zero(d, grade);
    for (a, &ma) in x.coeffs.iter().zip(&ix.masks) {
        if *a == 0.0 {
            continue;
        }
        for (b, &mb) in y.coeffs.iter().zip(&iy.masks) {
            if *b == 0.0 || ma & mb != 0 {
                continue;
            }
            let pos = iout.position[(ma | mb) as usize];
            out.coeffs[pos] += merge_sign(ma, mb) * a * b;
        }
    }
    Ok(out)
}

/// Scalar product on `⋀_k R^d` (Gram determinant on simple inputs).
pub fn inner(x: &MultiVector, y: &MultiVector) -> Result<f64> {
    x.check_same(y)?;
    Ok(x.coeffs.iter().zip(&y.coeffs).map(|(a, b)| a * b).sum())
}

/// A k-dimensional linear subspace of `R^d` with an orthonormal frame.
#[derive(Clone, Debug, PartialEq)]
pub struct Subspace {
    frame: DMatrix<f64>,
}

impl Subspace {
    /// Wraps a frame that is already orthonormal (checked to `ORTHO_TOL`·10).
    pub fn from_orthonormal(frame: DMatrix<f64>) -> Result<Self> {
        if frame.ncols() > frame.nrows() {
            return Err(Error::Dimension(format!(
                "{} vectors in dimension {}",
                frame.ncols(),
                frame.nrows()
            )));
        }
        let defect = linalg::orthonormality_defect(&frame);
        if defect > 1e-10 {
            return Err(Error::Dimension(format!(
                "frame not orthonormal (defect {defect:e})"
            )));
        }
        Ok(Self { frame })
    }

    /// The zero subspace of `R^d`.
    pub fn zero(dim: usize) -> Self {
        Self {
            frame: DMatrix::zeros(dim, 0),
        }
    }

    /// Span of the first `k` canonical basis vectors.
    pub fn coordinate(dim: usize, indices: &[usize]) -> Self {
        let mut frame = DMatrix::zeros(dim, indices.len());
        for (c, &i) in indices.iter().enumerate() {
            frame[(i, c)] = 1.0;
        }
        Self { frame }
    }

    pub fn dim(&self) -> usize {
        self.frame.nrows()
    }

    pub fn grade(&self) -> usize {
        self.frame.ncols()
    }

    pub fn frame(&self) -> &DMatrix<f64> {
        &self.frame
    }

    /// The simple unit k-vector `u_1 ∧ … ∧ u_k` of the frame (defined up to sign).
    pub fn blade(&self) -> MultiVector {
        let d = self.dim();
        let k = self.grade();
        let coeffs = subsets(d, k)
            .iter()
            .map(|rows| {
                let minor = DMatrix::from_fn(k, k, |r, c| self.frame[(rows[r], c)]);
                linalg::det(&minor)
            })
            .collect();
        MultiVector {
            dim: d,
            grade: k,
            coeffs,
        }
    }

    /// Orthonormal basis of `R^d` whose first `k` vectors are this frame,
    /// completed deterministically over the canonical basis.
    pub fn extended_basis(&self) -> DMatrix<f64> {
        linalg::complete_basis(&self.frame)
    }

    pub fn orthogonal_complement(&self) -> Subspace {
        Subspace {
            frame: linalg::complement(&self.frame),
        }
    }

    /// Orthogonal projection of `x` onto the subspace.
    pub fn project(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.frame * (self.frame.transpose() * x)
    }

    /// Applies a linear map to the frame (the map must be orthogonal).
    pub fn transformed(&self, rho: &DMatrix<f64>) -> Subspace {
        Subspace {
            frame: rho * &self.frame,
        }
    }
}

/// Orthonormalizes `vectors` and returns their span with its blade.
pub fn blade_from_frame(dim: usize, vectors: &[DVector<f64>]) -> Result<Subspace> {
    let frame = linalg::gram_schmidt(dim, vectors)?;
    Ok(Subspace { frame })
}

/// `⟨A, B⟩` of the blades of two subspaces of equal grade, as `det(A^T B)`.
pub fn blade_inner(a: &Subspace, b: &Subspace) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::Dimension(format!(
            "ambient dimensions {} and {}",
            a.dim(),
            b.dim()
        )));
    }
    if a.grade() != b.grade() {
        return Err(Error::Grade {
            left: a.grade(),
            right: b.grade(),
        });
    }
    Ok(linalg::det(&(a.frame.transpose() * &b.frame)))
}

/// Squared norm of the wedge of the columns of `vectors`
/// (the Gram determinant).
pub fn wedge_norm_squared(vectors: &DMatrix<f64>) -> f64 {
    if vectors.ncols() == vectors.nrows() {
        let det = linalg::det(vectors);
        det * det
    } else {
        linalg::det(&(vectors.transpose() * vectors)).max(0.0)
    }
}

/// Orthonormal basis of the summand `T_i A` of `⋀_k R^d`.
#[derive(Clone, Debug)]
pub struct TiaBasis {
    base: Subspace,
    index: usize,
    elements: Vec<Subspace>,
}

impl TiaBasis {
    pub fn base(&self) -> &Subspace {
        &self.base
    }

    pub fn index(&self) -> usize {
        self.index
    }

    /// Basis elements as simple subspaces `∧_{j∈I} a_j`.
    pub fn elements(&self) -> &[Subspace] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }
}

/// Dimension of `T_i A`, `C(k, i)·C(d−k, i)`.
pub fn tia_dim(d: usize, k: usize, i: usize) -> u64 {
    binomial(k, i) * binomial(d - k, i)
}

/// Index sets `I ⊂ {0..d-1}`, `|I| = k`, with exactly `k − i` elements in `{0..k-1}`.
pub fn tia_index_sets(d: usize, k: usize, i: usize) -> Vec<Vec<usize>> {
    subsets(d, k)
        .into_iter()
        .filter(|s| s.iter().filter(|&&j| j < k).count() + i == k)
        .collect()
}

/// The orthonormal basis of `T_i A` built from the extended basis of `A`.
pub fn tia_basis(a: &Subspace, i: usize) -> Result<TiaBasis> {
    let d = a.dim();
    let k = a.grade();
    let max = k.min(d - k);
    if i > max {
        return Err(Error::IndexOutOfRange { index: i, max });
    }
    let basis = a.extended_basis();
    let elements = tia_index_sets(d, k, i)
        .into_iter()
        .map(|set| {
            let cols: Vec<_> = set.iter().map(|&j| basis.column(j).into_owned()).collect();
            Subspace {
                frame: if cols.is_empty() {
                    DMatrix::zeros(d, 0)
                } else {
                    DMatrix::from_columns(&cols)
                },
            }
        })
        .collect();
    Ok(TiaBasis {
        base: a.clone(),
        index: i,
        elements,
    })
}

/// The i-th product `⟨A, B⟩_i = ‖p_{T_i A} B‖`.
pub fn subspace_product_i(a: &Subspace, b: &Subspace, i: usize) -> Result<f64> {
    if a.grade() != b.grade() {
        return Err(Error::Grade {
            left: a.grade(),
            right: b.grade(),
        });
    }
    let basis = tia_basis(a, i)?;
    let mut sum = 0.0;
    for eta in basis.elements() {
        let c = blade_inner(eta, b)?;
        sum += c * c;
    }
    Ok(sum.sqrt())
}

/// All squared products `⟨A, B⟩_i²`, `i = 0..=min(k, d−k)`, sharing one basis.
pub fn subspace_products_squared(a: &Subspace, b: &Subspace) -> Result<Vec<f64>> {
    if a.grade() != b.grade() {
        return Err(Error::Grade {
            left: a.grade(),
            right: b.grade(),
        });
    }
    let d = a.dim();
    let k = a.grade();
    let basis = a.extended_basis();
    // coordinates of B's frame in the adapted basis
    let coords = basis.transpose() * b.frame();
    let mut out = vec![0.0; k.min(d - k) + 1];
    for set in subsets(d, k) {
        let i = k - set.iter().filter(|&&j| j < k).count();
        let minor = DMatrix::from_fn(k, k, |r, c| coords[(set[r], c)]);
        let m = linalg::det(&minor);
        out[i] += m * m;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn e(d: usize, i: usize) -> MultiVector {
        MultiVector::basis(d, &[i]).unwrap()
    }

    #[test]
    fn basis_wedges() {
        let e12 = wedge(&e(3, 0), &e(3, 1)).unwrap();
        assert_eq!(e12.coeffs(), &[1.0, 0.0, 0.0]);
        assert_eq!(wedge(&e(3, 0), &e(3, 0)).unwrap().norm(), 0.0);
        let sum = e(3, 0).add(&e(3, 1)).unwrap();
        assert_eq!(wedge(&sum, &e(3, 1)).unwrap(), e12);
        // e2 ∧ e1 = −e1 ∧ e2
        assert_eq!(wedge(&e(3, 1), &e(3, 0)).unwrap(), e12.scale(-1.0));
    }

    #[test]
    fn wedge_rejects_overflowing_grade() {
        let e12 = MultiVector::basis(2, &[0, 1]).unwrap();
        assert!(wedge(&e12, &e(2, 0)).is_err());
        assert!(wedge(&e(2, 0), &e(3, 0)).is_err());
    }

    #[test]
    fn inner_of_basis_blades() {
        let e12 = MultiVector::basis(3, &[0, 1]).unwrap();
        let e13 = MultiVector::basis(3, &[0, 2]).unwrap();
        assert_eq!(inner(&e12, &e12).unwrap(), 1.0);
        assert_eq!(inner(&e12, &e13).unwrap(), 0.0);
        assert!(inner(&e12, &e(3, 0)).is_err());
    }

    #[test]
    fn blade_examples() {
        let s = blade_from_frame(3, &[DVector::from_vec(vec![0.0, 0.0, 2.0])]).unwrap();
        assert_abs_diff_eq!(s.blade().coeff(&[2]).abs(), 1.0);
        let p = blade_from_frame(
            3,
            &[
                DVector::from_vec(vec![1.0, 0.0, 0.0]),
                DVector::from_vec(vec![1.0, 1.0, 0.0]),
            ],
        )
        .unwrap();
        assert_abs_diff_eq!(p.blade().coeff(&[0, 1]).abs(), 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(p.blade().norm(), 1.0, epsilon = 1e-14);
        assert!(blade_from_frame(3, &[DVector::zeros(3)]).is_err());
    }

    #[test]
    fn tia_examples() {
        let a = Subspace::coordinate(4, &[0, 1]);
        let t0 = tia_basis(&a, 0).unwrap();
        assert_eq!(t0.len(), 1);
        assert_abs_diff_eq!(
            blade_inner(&t0.elements()[0], &a).unwrap().abs(),
            1.0,
            epsilon = 1e-14
        );
        assert_eq!(tia_basis(&a, 1).unwrap().len(), 4);
        assert_eq!(tia_basis(&a, 2).unwrap().len(), 1);
        assert!(matches!(
            tia_basis(&a, 3),
            Err(Error::IndexOutOfRange { index: 3, max: 2 })
        ));
        let t1 = tia_basis(&a, 1).unwrap();
        let t2 = tia_basis(&a, 2).unwrap();
        assert_abs_diff_eq!(
            blade_inner(&t1.elements()[0], &t2.elements()[0]).unwrap(),
            0.0
        );
    }

    #[test]
    fn products_of_a_subspace_with_itself() {
        let a = Subspace::coordinate(5, &[1, 3]);
        assert_abs_diff_eq!(subspace_product_i(&a, &a, 0).unwrap(), 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(subspace_product_i(&a, &a, 1).unwrap(), 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(subspace_product_i(&a, &a, 2).unwrap(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(5, 2), 10);
        assert_eq!(binomial(2, 5), 0);
        assert_eq!(binomial_signed(3, -1), 0.0);
        assert_eq!(binomial_signed(-1, 0), 0.0);
        assert_eq!(subsets(4, 2).len(), 6);
        assert_eq!(subsets(4, 2)[1], vec![0, 2]);
        assert_eq!(subsets(3, 0), vec![Vec::<usize>::new()]);
    }
}
