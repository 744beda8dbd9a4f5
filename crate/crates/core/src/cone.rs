//! Polyhedral normal cones and their spherical measure.
//!
//! A cone lives in an `m`-dimensional linear subspace `N` of `R^d` (the
//! orthogonal complement of a face's tangent space) and is cut out by
//! homogeneous inequalities `⟨c_i, y⟩ ≤ 0` in coordinates of `N`. The
//! spherical measure `H^{m−1}(N ∩ S^{d−1} ∩ cone)` is exact for `m ≤ 3`
//! (counting, arcs, Gauss–Bonnet) and a fixed-seed Monte Carlo value above.

use std::f64::consts::PI;
use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::constants::sphere_area;
use crate::error::{Error, Result};
use crate::sampling;

/// Slack allowed on the support inequalities.
pub const CONE_TOL: f64 = 1e-10;

/// Draws used for the measure of cones of dimension four and more.
const MC_MEASURE_SAMPLES: usize = 400_000;
const MC_MEASURE_SEED: u64 = 0x6e63_6f6e_6573;
/// Rejection budget when sampling a direction.
const MAX_REJECTIONS: usize = 10_000_000;

#[derive(Debug)]
pub struct NormalCone {
    space: DMatrix<f64>,
    constraints: Vec<DVector<f64>>,
    measure: OnceLock<f64>,
    arcs: OnceLock<Vec<(f64, f64)>>,
}

impl Clone for NormalCone {
    fn clone(&self) -> Self {
        Self {
            space: self.space.clone(),
            constraints: self.constraints.clone(),
            measure: self.measure.clone(),
            arcs: self.arcs.clone(),
        }
    }
}

impl NormalCone {
    /// Cone `{u ∈ span(space) : ⟨u, g⟩ ≤ 0 for all g}` for ambient vectors `g`.
    pub fn new(space: DMatrix<f64>, generators: &[DVector<f64>]) -> Self {
        let m = space.ncols();
        let scale = generators.iter().map(|g| g.norm()).fold(0.0, f64::max).max(1e-300);
        let mut constraints: Vec<DVector<f64>> = Vec::new();
        for g in generators {
            let c = space.transpose() * g;
            let n = c.norm();
            if n <= 1e-10 * scale || m == 0 {
                continue;
            }
            let c = c / n;
            if !constraints.iter().any(|o| o.dot(&c) > 1.0 - 1e-12) {
                constraints.push(c);
            }
        }
        Self::from_local(space, constraints)
    }

    /// Cone from unit constraint normals already in the coordinates of `space`.
    pub fn from_local(space: DMatrix<f64>, constraints: Vec<DVector<f64>>) -> Self {
        Self {
            space,
            constraints,
            measure: OnceLock::new(),
            arcs: OnceLock::new(),
        }
    }

    /// Dimension `m` of the ambient linear subspace.
    pub fn dim(&self) -> usize {
        self.space.ncols()
    }

    /// Orthonormal basis of the linear span (as columns).
    pub fn space(&self) -> &DMatrix<f64> {
        &self.space
    }

    pub fn constraints(&self) -> &[DVector<f64>] {
        &self.constraints
    }

    fn feasible_local(&self, y: &DVector<f64>) -> bool {
        self.constraints.iter().all(|c| c.dot(y) <= CONE_TOL)
    }

    /// Membership of an ambient unit vector in the cone.
    pub fn contains(&self, u: &DVector<f64>) -> bool {
        if u.len() != self.space.nrows() {
            return false;
        }
        let y = self.space.transpose() * u;
        let off = (u - &self.space * &y).norm();
        off <= CONE_TOL.max(1e-10 * u.norm()) * 10.0 && self.feasible_local(&y)
    }

    /// Local coordinates of an ambient vector.
    pub fn local(&self, u: &DVector<f64>) -> DVector<f64> {
        self.space.transpose() * u
    }

    /// `H^{m−1}` of the cone's trace on the unit sphere of its span
    /// (counting measure when `m = 1`).
    pub fn measure(&self) -> f64 {
        *self.measure.get_or_init(|| match self.dim() {
            0 => 0.0,
            1 => [1.0, -1.0]
                .iter()
                .filter(|&&s| self.feasible_local(&DVector::from_element(1, s)))
                .count() as f64,
            2 => self.arc_list().iter().map(|a| a.1).sum(),
            3 => self.gauss_bonnet(),
            m => self.mc_measure(m),
        })
    }

    /// The measure normalized by the full sphere `S^{m−1}`.
    pub fn external_angle(&self) -> f64 {
        match self.dim() {
            0 => 0.0,
            m => self.measure() / sphere_area(m - 1),
        }
    }

    fn arc_list(&self) -> &Vec<(f64, f64)> {
        self.arcs.get_or_init(|| {
            let planar: Vec<[f64; 2]> = self.constraints.iter().map(|c| [c[0], c[1]]).collect();
            feasible_arcs(&planar)
        })
    }

    fn gauss_bonnet(&self) -> f64 {
        let cs: Vec<Vector3<f64>> = self
            .constraints
            .iter()
            .map(|c| Vector3::new(c[0], c[1], c[2]))
            .collect();
        spherical_polygon_area(&cs)
    }

    fn mc_measure(&self, m: usize) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(MC_MEASURE_SEED);
        let hits = (0..MC_MEASURE_SAMPLES)
            .filter(|_| self.feasible_local(&sampling::sample_sphere(m, &mut rng)))
            .count();
        sphere_area(m - 1) * hits as f64 / MC_MEASURE_SAMPLES as f64
    }

    /// A direction drawn uniformly from the cone (ambient coordinates).
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<DVector<f64>> {
        let m = self.dim();
        let y = match m {
            0 => return Err(Error::DegenerateCone(0)),
            1 => {
                let signs: Vec<f64> = [1.0, -1.0]
                    .into_iter()
                    .filter(|&s| self.feasible_local(&DVector::from_element(1, s)))
                    .collect();
                if signs.is_empty() {
                    return Err(Error::DegenerateCone(0));
                }
                DVector::from_element(1, signs[rng.random_range(0..signs.len())])
            }
            2 => {
                let arcs = self.arc_list();
                let total: f64 = arcs.iter().map(|a| a.1).sum();
                if total <= 0.0 {
                    return Err(Error::DegenerateCone(0));
                }
                let mut t = rng.random::<f64>() * total;
                let mut theta = arcs[arcs.len() - 1].0 + arcs[arcs.len() - 1].1;
                for &(start, len) in arcs {
                    if t < len {
                        theta = start + t;
                        break;
                    }
                    t -= len;
                }
                DVector::from_vec(vec![theta.cos(), theta.sin()])
            }
            _ => {
                let mut found = None;
                for _ in 0..MAX_REJECTIONS {
                    let y = sampling::sample_sphere(m, rng);
                    if self.feasible_local(&y) {
                        found = Some(y);
                        break;
                    }
                }
                found.ok_or(Error::DegenerateCone(MAX_REJECTIONS))?
            }
        };
        Ok(&self.space * y)
    }

    /// The image of the cone under an orthogonal map of the ambient space.
    pub fn transformed(&self, rho: &DMatrix<f64>) -> Self {
        Self {
            space: rho * &self.space,
            ..self.clone()
        }
    }
}

/// Arcs `(start, length)` of the unit circle where `⟨c_i, y⟩ ≤ 0` for all `i`.
pub fn feasible_arcs(constraints: &[[f64; 2]]) -> Vec<(f64, f64)> {
    if constraints.is_empty() {
        return vec![(0.0, 2.0 * PI)];
    }
    let two_pi = 2.0 * PI;
    let feasible = |t: f64| {
        let (s, c) = t.sin_cos();
        constraints.iter().all(|n| n[0] * c + n[1] * s <= CONE_TOL)
    };
    let mut cuts: Vec<f64> = Vec::with_capacity(2 * constraints.len());
    for n in constraints {
        let psi = n[1].atan2(n[0]);
        for t in [psi + 0.5 * PI, psi - 0.5 * PI] {
            cuts.push(t.rem_euclid(two_pi));
        }
    }
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-14);
    let mut arcs = Vec::new();
    for (i, &a) in cuts.iter().enumerate() {
        let b = if i + 1 < cuts.len() {
            cuts[i + 1]
        } else {
            cuts[0] + two_pi
        };
        let len = b - a;
        if len > 0.0 && feasible(a + 0.5 * len) {
            arcs.push((a, len));
        }
    }
    arcs
}

/// Area of `{y ∈ S² : ⟨c_i, y⟩ ≤ 0}` via Gauss–Bonnet over the vertex rays.
pub fn spherical_polygon_area(constraints: &[Vector3<f64>]) -> f64 {
    if constraints.is_empty() {
        return 4.0 * PI;
    }
    let feasible = |y: &Vector3<f64>| constraints.iter().all(|c| c.dot(y) <= 1e-9);
    let mut rays: Vec<Vector3<f64>> = Vec::new();
    for (i, a) in constraints.iter().enumerate() {
        for b in &constraints[i + 1..] {
            let r = a.cross(b);
            let n = r.norm();
            if n < 1e-9 {
                continue;
            }
            for s in [r / n, -r / n] {
                if feasible(&s) && !rays.iter().any(|o| o.dot(&s) > 1.0 - 1e-9) {
                    rays.push(s);
                }
            }
        }
    }
    if rays.is_empty() {
        // a half-space, or a cone without interior
        let c0 = constraints[0];
        return if constraints.iter().all(|c| c.dot(&c0) > 1.0 - 1e-9) {
            2.0 * PI
        } else {
            0.0
        };
    }
    let mut excess = 0.0;
    for r in &rays {
        let e1 = if r.x.abs() < 0.9 {
            Vector3::x()
        } else {
            Vector3::y()
        };
        let e1 = (e1 - r * r.dot(&e1)).normalize();
        let e2 = r.cross(&e1);
        let tight: Vec<[f64; 2]> = constraints
            .iter()
            .filter(|c| c.dot(r).abs() < 1e-9)
            .map(|c| [c.dot(&e1), c.dot(&e2)])
            .collect();
        let angle: f64 = feasible_arcs(&tight).iter().map(|a| a.1).sum();
        excess += PI - angle;
    }
    (2.0 * PI - excess).max(0.0)
}
