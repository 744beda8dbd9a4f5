//! Convex polytopes with explicit face lattices, face volumes and normal cones.
//!
//! Faces are stored as sorted vertex-id lists. The lattice is the closure of
//! the facet vertex sets under intersection; for a body of dimension below the
//! ambient dimension the body itself is kept as a face, with the whole
//! orthogonal complement of its affine hull as normal cone.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fs;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::cone::NormalCone;
use crate::error::{Error, Result};
use crate::linalg;
use crate::multilinear::{subsets, Subspace};

/// Tolerance on affine dependence and on support-plane membership.
pub const GEOM_TOL: f64 = 1e-9;
/// Largest number of zonotope generators accepted.
pub const MAX_ZONOTOPE_GENERATORS: usize = 12;

/// A face `F` of a polytope.
#[derive(Clone, Debug)]
pub struct Face {
    pub dim: usize,
    pub vertex_ids: Vec<usize>,
    /// Orthonormal frame of the tangent space `L(F)` (`d × dim`).
    pub tangent: DMatrix<f64>,
    /// `H^dim(F)`; 1 for vertices.
    pub volume: f64,
    /// Centroid of the face's vertices.
    pub anchor: DVector<f64>,
    /// `N(K, F)` inside `L(F)^⊥`.
    pub cone: NormalCone,
}

impl Face {
    /// Dimension `k* = d − 1 − dim` of the spherical normal patch.
    pub fn patch_dim(&self) -> usize {
        self.cone.dim() - 1
    }

    /// `H^{k*}(ν(K,F))`.
    pub fn patch_measure(&self) -> f64 {
        self.cone.measure()
    }

    /// `γ(F, K)`, the external angle.
    pub fn external_angle(&self) -> f64 {
        self.cone.external_angle()
    }

    pub fn tangent_space(&self) -> Subspace {
        Subspace::from_orthonormal(self.tangent.clone()).expect("orthonormal tangent frame")
    }
}

/// A convex polytope in `R^d`, possibly lower dimensional.
#[derive(Clone, Debug)]
pub struct Polytope {
    dim: usize,
    body_dim: usize,
    vertices: Vec<DVector<f64>>,
    faces: Vec<Face>,
    body_volume: f64,
}

/// A face pair with linearly dependent tangent spaces.
#[derive(Clone, Debug, PartialEq)]
pub struct ParallelPair {
    pub face_k: usize,
    pub face_l: usize,
    pub sigma: f64,
}

fn affine_rank(points: &[&DVector<f64>], dim: usize) -> DMatrix<f64> {
    linalg::affine_frame(points, dim)
}

fn null_vector(rows: &DMatrix<f64>) -> Option<DVector<f64>> {
    // unit vector orthogonal to the rows of a (r−1) × r matrix of full row rank
    let r = rows.ncols();
    let mut basis: Vec<DVector<f64>> = Vec::new();
    for row in rows.row_iter() {
        basis.push(row.transpose());
    }
    let frame = linalg::gram_schmidt(r, &basis).ok()?;
    let comp = linalg::complement(&frame);
    (comp.ncols() == 1).then(|| comp.column(0).into_owned())
}

impl Polytope {
    /// Builds the lattice from facet vertex sets (relative facets for
    /// lower-dimensional bodies). Points that are not vertices are dropped.
    pub fn from_facets(vertices: Vec<DVector<f64>>, facets: &[Vec<usize>]) -> Result<Polytope> {
        let Some(first) = vertices.first() else {
            return Err(Error::InvalidPolytope("no vertices".into()));
        };
        let dim = first.len();
        if vertices.iter().any(|v| v.len() != dim) {
            return Err(Error::InvalidPolytope("vertices of mixed dimension".into()));
        }
        let all: Vec<&DVector<f64>> = vertices.iter().collect();
        let body_frame = affine_rank(&all, dim);
        let body_dim = body_frame.ncols();

        let mut sets: BTreeSet<Vec<usize>> = BTreeSet::new();
        let facet_sets: Vec<Vec<usize>> = facets
            .iter()
            .map(|f| {
                let mut f = f.clone();
                f.sort_unstable();
                f.dedup();
                f
            })
            .collect();
        if facet_sets.iter().flatten().any(|&i| i >= vertices.len()) {
            return Err(Error::InvalidPolytope("facet refers to a missing vertex".into()));
        }
        let mut queue: Vec<Vec<usize>> = Vec::new();
        for f in &facet_sets {
            if sets.insert(f.clone()) {
                queue.push(f.clone());
            }
        }
        while let Some(s) = queue.pop() {
            for f in &facet_sets {
                let inter: Vec<usize> = s.iter().copied().filter(|i| f.binary_search(i).is_ok()).collect();
                if !inter.is_empty() && inter.len() < s.len() && sets.insert(inter.clone()) {
                    queue.push(inter);
                }
            }
        }
        let body: Vec<usize> = (0..vertices.len()).collect();
        if body_dim == 0 {
            sets.clear();
        }
        sets.insert(body.clone());

        // keep only points that are 0-faces
        let is_vertex: Vec<bool> = {
            let mut v = vec![false; vertices.len()];
            for s in &sets {
                let pts: Vec<&DVector<f64>> = s.iter().map(|&i| &vertices[i]).collect();
                if affine_rank(&pts, dim).ncols() == 0 {
                    for &i in s {
                        v[i] = true;
                    }
                }
            }
            v
        };
        let mut remap = vec![usize::MAX; vertices.len()];
        let mut kept = Vec::new();
        for (i, v) in vertices.iter().enumerate() {
            if is_vertex[i] {
                remap[i] = kept.len();
                kept.push(v.clone());
            }
        }
        // a 0-face may list coincident copies of one point
        let mut faces_ids: BTreeSet<Vec<usize>> = BTreeSet::new();
        for s in &sets {
            let mut ids: Vec<usize> = s.iter().filter(|&&i| is_vertex[i]).map(|&i| remap[i]).collect();
            ids.sort_unstable();
            ids.dedup();
            if !ids.is_empty() {
                faces_ids.insert(ids);
            }
        }
        Self::assemble(dim, body_dim, kept, faces_ids.into_iter().collect())
    }

    fn assemble(
        dim: usize,
        body_dim: usize,
        vertices: Vec<DVector<f64>>,
        face_sets: Vec<Vec<usize>>,
    ) -> Result<Polytope> {
        struct Raw {
            ids: Vec<usize>,
            dim: usize,
            tangent: DMatrix<f64>,
            anchor: DVector<f64>,
        }
        let mut raw: Vec<Raw> = face_sets
            .into_iter()
            .map(|ids| {
                let pts: Vec<&DVector<f64>> = ids.iter().map(|&i| &vertices[i]).collect();
                let tangent = affine_rank(&pts, dim);
                let mut anchor = DVector::zeros(dim);
                for p in &pts {
                    anchor += *p;
                }
                anchor /= pts.len() as f64;
                Raw {
                    dim: tangent.ncols(),
                    ids,
                    tangent,
                    anchor,
                }
            })
            .collect();
        raw.sort_by(|a, b| (a.dim, &a.ids).cmp(&(b.dim, &b.ids)));
        let n0 = raw.iter().filter(|r| r.dim == 0).count();
        if n0 != vertices.len() {
            return Err(Error::InvalidPolytope(format!(
                "{} points but {n0} vertices in the lattice",
                vertices.len()
            )));
        }
        // sub-faces one dimension down
        let contains = |big: &[usize], small: &[usize]| small.iter().all(|i| big.binary_search(i).is_ok());
        let mut below: Vec<Vec<usize>> = vec![Vec::new(); raw.len()];
        let mut above: Vec<Vec<usize>> = vec![Vec::new(); raw.len()];
        for (a, fa) in raw.iter().enumerate() {
            for (b, fb) in raw.iter().enumerate() {
                if fb.dim + 1 == fa.dim && contains(&fa.ids, &fb.ids) {
                    below[a].push(b);
                    above[b].push(a);
                }
            }
        }
        // volumes by pyramids over sub-faces
        let mut volume = vec![0.0; raw.len()];
        for a in 0..raw.len() {
            let f = &raw[a];
            if f.dim == 0 {
                volume[a] = 1.0;
                continue;
            }
            let mut acc = 0.0;
            for &b in &below[a] {
                let g = &raw[b];
                let mut h = &f.anchor - &g.anchor;
                let t = &g.tangent;
                if t.ncols() > 0 {
                    h -= t * (t.transpose() * &h);
                }
                acc += h.norm() * volume[b];
            }
            volume[a] = acc / f.dim as f64;
            if volume[a] <= 0.0 {
                return Err(Error::InvalidPolytope(format!(
                    "face {:?} has zero {}-volume",
                    f.ids, f.dim
                )));
            }
        }
        // Euler relation over the bounded lattice
        let euler: i64 = raw.iter().map(|f| if f.dim % 2 == 0 { 1 } else { -1 }).sum();
        if euler != 1 {
            return Err(Error::InvalidPolytope(format!(
                "face counts violate the Euler relation (sum {euler})"
            )));
        }
        let body_idx = raw.iter().position(|f| f.dim == body_dim);
        let body_volume = body_idx.map(|i| volume[i]).unwrap_or(0.0);
        let mut faces = Vec::new();
        for (a, f) in raw.iter().enumerate() {
            if f.dim == dim {
                continue;
            }
            let normal = linalg::complement(&f.tangent);
            let gens: Vec<DVector<f64>> = above[a]
                .iter()
                .flat_map(|&b| raw[b].ids.iter())
                .map(|&i| &vertices[i] - &f.anchor)
                .collect();
            faces.push(Face {
                dim: f.dim,
                vertex_ids: f.ids.clone(),
                tangent: f.tangent.clone(),
                volume: volume[a],
                anchor: f.anchor.clone(),
                cone: NormalCone::new(normal, &gens),
            });
        }
        Ok(Polytope {
            dim,
            body_dim,
            vertices,
            faces,
            body_volume,
        })
    }

    /// Convex hull of a point set by brute-force facet search in the affine hull.
    pub fn from_vertices(points: Vec<DVector<f64>>) -> Result<Polytope> {
        let Some(first) = points.first() else {
            return Err(Error::InvalidPolytope("no points".into()));
        };
        let dim = first.len();
        let mut uniq: Vec<DVector<f64>> = Vec::new();
        for p in points {
            if p.len() != dim {
                return Err(Error::InvalidPolytope("points of mixed dimension".into()));
            }
            if !uniq.iter().any(|q| (q - &p).norm() <= GEOM_TOL) {
                uniq.push(p);
            }
        }
        let refs: Vec<&DVector<f64>> = uniq.iter().collect();
        let frame = affine_rank(&refs, dim);
        let r = frame.ncols();
        let origin = uniq[0].clone();
        let local: Vec<DVector<f64>> = uniq.iter().map(|p| frame.transpose() * (p - &origin)).collect();
        let scale = local.iter().map(|y| y.norm()).fold(1.0, f64::max);
        let tol = GEOM_TOL * scale;
        let mut facets: BTreeSet<Vec<usize>> = BTreeSet::new();
        if r == 1 {
            let (mut lo, mut hi) = (0, 0);
            for (i, y) in local.iter().enumerate() {
                if y[0] < local[lo][0] {
                    lo = i;
                }
                if y[0] > local[hi][0] {
                    hi = i;
                }
            }
            facets.insert(vec![lo]);
            facets.insert(vec![hi]);
        } else if r >= 2 {
            for s in subsets(local.len(), r) {
                let diffs = DMatrix::from_fn(r - 1, r, |i, j| local[s[i + 1]][j] - local[s[0]][j]);
                let Some(n) = null_vector(&diffs) else {
                    continue;
                };
                let h = n.dot(&local[s[0]]);
                let vals: Vec<f64> = local.iter().map(|y| n.dot(y) - h).collect();
                let below = vals.iter().all(|&v| v <= tol);
                let above = vals.iter().all(|&v| v >= -tol);
                if below || above {
                    let set: Vec<usize> = (0..local.len()).filter(|&i| vals[i].abs() <= tol).collect();
                    facets.insert(set);
                }
            }
        }
        let facets: Vec<Vec<usize>> = facets.into_iter().collect();
        Self::from_facets(uniq, &facets)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Dimension of the affine hull.
    pub fn body_dim(&self) -> usize {
        self.body_dim
    }

    pub fn vertices(&self) -> &[DVector<f64>] {
        &self.vertices
    }

    /// All faces of dimension below `d` (the body itself is included when it
    /// is lower dimensional).
    pub fn faces(&self) -> &[Face] {
        &self.faces
    }

    pub fn faces_of_dim(&self, k: usize) -> impl Iterator<Item = (usize, &Face)> {
        self.faces.iter().enumerate().filter(move |(_, f)| f.dim == k)
    }

    pub fn face_count(&self, k: usize) -> usize {
        self.faces_of_dim(k).count()
    }

    /// `H^{body_dim}` of the body.
    pub fn volume(&self) -> f64 {
        self.body_volume
    }

    /// `V_k(K) = Σ_{F ∈ F_k} H^k(F) γ(F, K)` for `k < d`, the volume for `k = d`.
    pub fn intrinsic_volume(&self, k: usize) -> f64 {
        if k == self.dim {
            return if self.body_dim == self.dim { self.body_volume } else { 0.0 };
        }
        self.faces_of_dim(k).map(|(_, f)| f.volume * f.external_angle()).sum()
    }

    /// Maximum of `⟨x, u⟩` over the vertices.
    pub fn support(&self, u: &DVector<f64>) -> f64 {
        self.vertices.iter().map(|v| v.dot(u)).fold(f64::NEG_INFINITY, f64::max)
    }

    /// Applies an orthogonal map; volumes and external angles are unchanged.
    pub fn rotate(&self, rho: &DMatrix<f64>) -> Result<Polytope> {
        if rho.nrows() != self.dim || rho.ncols() != self.dim {
            return Err(Error::Dimension(format!(
                "{}x{} map on R^{}",
                rho.nrows(),
                rho.ncols(),
                self.dim
            )));
        }
        let defect = linalg::orthonormality_defect(rho);
        if defect > 1e-10 {
            return Err(Error::Precondition(format!(
                "map is not orthogonal (defect {defect:e})"
            )));
        }
        Ok(Polytope {
            vertices: self.vertices.iter().map(|v| rho * v).collect(),
            faces: self
                .faces
                .iter()
                .map(|f| Face {
                    tangent: rho * &f.tangent,
                    anchor: rho * &f.anchor,
                    cone: f.cone.transformed(rho),
                    ..f.clone()
                })
                .collect(),
            ..self.clone()
        })
    }

    pub fn translate(&self, t: &DVector<f64>) -> Polytope {
        Polytope {
            vertices: self.vertices.iter().map(|v| v + t).collect(),
            faces: self
                .faces
                .iter()
                .map(|f| Face {
                    anchor: &f.anchor + t,
                    ..f.clone()
                })
                .collect(),
            ..self.clone()
        }
    }

    /// Dilation by `s > 0` about the origin.
    pub fn scale(&self, s: f64) -> Result<Polytope> {
        if !(s > 0.0 && s.is_finite()) {
            return Err(Error::Precondition(format!("scale factor {s} must be positive")));
        }
        Ok(Polytope {
            vertices: self.vertices.iter().map(|v| v * s).collect(),
            faces: self
                .faces
                .iter()
                .map(|f| Face {
                    anchor: &f.anchor * s,
                    volume: f.volume * s.powi(f.dim as i32),
                    ..f.clone()
                })
                .collect(),
            body_volume: self.body_volume * s.powi(self.body_dim as i32),
            ..self.clone()
        })
    }

    /// Reflection `x ↦ −x`.
    pub fn reflect(&self) -> Polytope {
        let minus = -DMatrix::<f64>::identity(self.dim, self.dim);
        self.rotate(&minus).expect("−I is orthogonal")
    }

    /// A uniform direction of `ν(K, F)` for the face with index `face`.
    pub fn sample_normal_patch<R: Rng + ?Sized>(&self, face: usize, rng: &mut R) -> Result<(DVector<f64>, f64)> {
        let f = self
            .faces
            .get(face)
            .ok_or(Error::IndexOutOfRange { index: face, max: self.faces.len().saturating_sub(1) })?;
        let u = f.cone.sample(rng)?;
        Ok((u, f.patch_measure()))
    }

    /// Orthonormal frame of `L(F)^⊥ ∩ u^⊥` for `u ∈ ν(K, F)`.
    pub fn face_tangent_normal_frames(&self, face: usize, u: &DVector<f64>) -> Result<Subspace> {
        let f = self
            .faces
            .get(face)
            .ok_or(Error::IndexOutOfRange { index: face, max: self.faces.len().saturating_sub(1) })?;
        if !f.cone.contains(u) {
            return Err(Error::NotInCone);
        }
        Ok(normal_frame(&f.cone, u))
    }

    /// The first pair `(F, G) ∈ F_k(K) × F_l(L)` with `L(F) ∩ L(G) ≠ {o}`.
    pub fn find_parallel_pair(&self, other: &Polytope, k: usize) -> Option<ParallelPair> {
        let l = self.dim.checked_sub(k)?;
        for (i, f) in self.faces_of_dim(k) {
            for (j, g) in other.faces_of_dim(l) {
                let mut m = DMatrix::zeros(self.dim, self.dim);
                m.columns_mut(0, k).copy_from(&f.tangent);
                m.columns_mut(k, l).copy_from(&g.tangent);
                let sigma = linalg::smallest_singular_value(&m);
                if sigma <= 1e-10 {
                    return Some(ParallelPair { face_k: i, face_l: j, sigma });
                }
            }
        }
        None
    }
}

/// `L(F)^⊥ ∩ u^⊥` for a direction `u` in the span of the cone.
pub fn normal_frame(cone: &NormalCone, u: &DVector<f64>) -> Subspace {
    let y = cone.local(u);
    let y = &y / y.norm();
    let frame = DMatrix::from_column_slice(y.len(), 1, y.as_slice());
    let rest = linalg::complement(&frame);
    Subspace::from_orthonormal(cone.space() * rest).expect("orthonormal normal frame")
}

/// `true` when no `k`-face of `K` and `(d−k)`-face of `L` have dependent tangent spaces.
pub fn general_relative_position(k_body: &Polytope, l_body: &Polytope, k: usize) -> bool {
    k_body.find_parallel_pair(l_body, k).is_none()
}

/// `conv{0, e_1, …, e_d}`.
pub fn make_simplex(d: usize) -> Result<Polytope> {
    if d == 0 || d > crate::multilinear::MAX_DIM {
        return Err(Error::Unsupported(format!("simplex in dimension {d}")));
    }
    let mut pts = vec![DVector::zeros(d)];
    for i in 0..d {
        let mut e = DVector::zeros(d);
        e[i] = 1.0;
        pts.push(e);
    }
    let facets: Vec<Vec<usize>> = (0..=d).map(|skip| (0..=d).filter(|&i| i != skip).collect()).collect();
    Polytope::from_facets(pts, &facets)
}

/// `[0, s_1] × … × [0, s_d]`.
pub fn make_box(d: usize, sides: &[f64]) -> Result<Polytope> {
    if d == 0 || d > crate::multilinear::MAX_DIM || sides.len() != d {
        return Err(Error::Unsupported(format!("box with {} sides in dimension {d}", sides.len())));
    }
    if sides.iter().any(|&s| !(s > 0.0)) {
        return Err(Error::Precondition("box sides must be positive".into()));
    }
    let n = 1usize << d;
    let pts: Vec<DVector<f64>> = (0..n)
        .map(|m| DVector::from_fn(d, |i, _| if m >> i & 1 == 1 { sides[i] } else { 0.0 }))
        .collect();
    let mut facets = Vec::new();
    for i in 0..d {
        for bit in 0..2 {
            facets.push((0..n).filter(|m| (m >> i & 1) == bit).collect());
        }
    }
    Polytope::from_facets(pts, &facets)
}

/// The unit cube `[0,1]^d`.
pub fn make_cube(d: usize) -> Result<Polytope> {
    make_box(d, &vec![1.0; d])
}

/// `conv{±e_1, …, ±e_d}`.
pub fn make_cross(d: usize) -> Result<Polytope> {
    if d < 2 || d > crate::multilinear::MAX_DIM {
        return Err(Error::Unsupported(format!("cross-polytope in dimension {d}")));
    }
    let mut pts = Vec::new();
    for i in 0..d {
        for s in [1.0, -1.0] {
            let mut e = DVector::zeros(d);
            e[i] = s;
            pts.push(e);
        }
    }
    // one facet per sign pattern
    let facets: Vec<Vec<usize>> = (0..1usize << d)
        .map(|m| (0..d).map(|i| 2 * i + (m >> i & 1)).collect())
        .collect();
    Polytope::from_facets(pts, &facets)
}

/// The unit square `[0,1]² × {0}²` in `span(e_1, e_2) ⊂ R^4`.
pub fn make_square4d() -> Result<Polytope> {
    let pts: Vec<DVector<f64>> = [[0., 0.], [1., 0.], [1., 1.], [0., 1.]]
        .iter()
        .map(|p| DVector::from_vec(vec![p[0], p[1], 0.0, 0.0]))
        .collect();
    Polytope::from_facets(pts, &[vec![0, 1], vec![1, 2], vec![2, 3], vec![3, 0]])
}

/// The zonotope `Σ_i [0, g_i]` of full dimension.
pub fn make_zonotope(generators: &[DVector<f64>]) -> Result<Polytope> {
    let m = generators.len();
    let Some(first) = generators.first() else {
        return Err(Error::Precondition("zonotope needs at least one generator".into()));
    };
    let d = first.len();
    if m > MAX_ZONOTOPE_GENERATORS {
        return Err(Error::Unsupported(format!(
            "{m} generators (at most {MAX_ZONOTOPE_GENERATORS})"
        )));
    }
    if generators.iter().any(|g| g.len() != d) {
        return Err(Error::Dimension("generators of mixed dimension".into()));
    }
    let gmat = DMatrix::from_columns(generators);
    if gmat.rank(1e-9 * gmat.amax().max(1e-300)) < d {
        return Err(Error::Unsupported("generators do not span the space".into()));
    }
    let sums: Vec<DVector<f64>> = (0..1usize << m)
        .map(|mask| {
            let mut s = DVector::zeros(d);
            for (i, g) in generators.iter().enumerate() {
                if mask >> i & 1 == 1 {
                    s += g;
                }
            }
            s
        })
        .collect();
    let scale = sums.iter().map(|s| s.norm()).fold(1.0, f64::max);
    let mut normals: Vec<DVector<f64>> = Vec::new();
    for s in subsets(m, d - 1) {
        let rows = DMatrix::from_fn(d - 1, d, |i, j| generators[s[i]][j]);
        if let Some(n) = null_vector(&rows) {
            if !normals.iter().any(|o| o.dot(&n).abs() > 1.0 - 1e-12) {
                normals.push(n);
            }
        }
    }
    let mut facets: HashSet<Vec<usize>> = HashSet::new();
    for n in &normals {
        for sign in [1.0, -1.0] {
            let n = n * sign;
            let h = generators.iter().map(|g| n.dot(g).max(0.0)).sum::<f64>();
            let set: Vec<usize> = (0..sums.len())
                .filter(|&i| (n.dot(&sums[i]) - h).abs() <= GEOM_TOL * scale)
                .collect();
            facets.insert(set);
        }
    }
    // drop points on no facet before building the lattice
    let mut used: Vec<usize> = facets.iter().flatten().copied().collect();
    used.sort_unstable();
    used.dedup();
    let index: HashMap<usize, usize> = used.iter().enumerate().map(|(a, &b)| (b, a)).collect();
    let pts: Vec<DVector<f64>> = used.iter().map(|&i| sums[i].clone()).collect();
    let facets: Vec<Vec<usize>> = facets
        .into_iter()
        .map(|f| f.iter().map(|i| index[i]).collect())
        .collect();
    Polytope::from_facets(pts, &facets)
}

/// On-disk polytope description.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PolytopeFile {
    pub d: usize,
    pub vertices: Vec<Vec<f64>>,
    #[serde(default)]
    pub faces: Vec<FaceFile>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FaceFile {
    pub dim: usize,
    pub vertex_ids: Vec<usize>,
}

impl Polytope {
    pub fn to_file(&self) -> PolytopeFile {
        PolytopeFile {
            d: self.dim,
            vertices: self.vertices.iter().map(|v| v.iter().cloned().collect()).collect(),
            faces: self
                .faces
                .iter()
                .map(|f| FaceFile {
                    dim: f.dim,
                    vertex_ids: f.vertex_ids.clone(),
                })
                .collect(),
        }
    }

    /// Rebuilds a polytope from its file form; a listed lattice is checked
    /// against the recomputed one, an empty list triggers a hull computation.
    pub fn from_file(file: &PolytopeFile) -> Result<Polytope> {
        let vertices: Vec<DVector<f64>> = file
            .vertices
            .iter()
            .map(|v| {
                if v.len() == file.d {
                    Ok(DVector::from_row_slice(v))
                } else {
                    Err(Error::InvalidPolytope(format!("vertex of length {} in R^{}", v.len(), file.d)))
                }
            })
            .collect::<Result<_>>()?;
        if file.faces.is_empty() {
            return Self::from_vertices(vertices);
        }
        let refs: Vec<&DVector<f64>> = vertices.iter().collect();
        let body_dim = affine_rank(&refs, file.d).ncols();
        if body_dim == 0 {
            return Self::from_facets(vertices, &[]);
        }
        let facets: Vec<Vec<usize>> = file
            .faces
            .iter()
            .filter(|f| f.dim + 1 == body_dim)
            .map(|f| f.vertex_ids.clone())
            .collect();
        let p = Self::from_facets(vertices, &facets)?;
        if p.vertices.len() != file.vertices.len() {
            return Err(Error::InvalidPolytope("some listed points are not vertices".into()));
        }
        let computed: HashMap<Vec<usize>, usize> =
            p.faces.iter().map(|f| (f.vertex_ids.clone(), f.dim)).collect();
        for f in &file.faces {
            let mut ids = f.vertex_ids.clone();
            ids.sort_unstable();
            match computed.get(&ids) {
                Some(&dim) if dim == f.dim => {}
                Some(&dim) => {
                    return Err(Error::InvalidPolytope(format!(
                        "face {ids:?} listed with dimension {} but spans {dim}",
                        f.dim
                    )))
                }
                None => return Err(Error::InvalidPolytope(format!("{ids:?} is not a face"))),
            }
        }
        Ok(p)
    }

    pub fn load(path: &Path) -> Result<Polytope> {
        let file: PolytopeFile = serde_json::from_str(&fs::read_to_string(path)?)?;
        Self::from_file(&file)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, serde_json::to_string_pretty(&self.to_file())?)?;
        Ok(())
    }
}
