//! Incremental convex hull in `R^3`, used for volumes of Minkowski sums.

use std::collections::HashMap;

use nalgebra::Vector3;

use crate::error::{Error, Result};

/// Triangulated boundary of a 3-d convex hull with outward orientation.
#[derive(Clone, Debug)]
pub struct Hull3 {
    pub points: Vec<Vector3<f64>>,
    pub triangles: Vec<[usize; 3]>,
}

fn normal(p: &[Vector3<f64>], t: &[usize; 3]) -> Vector3<f64> {
    (p[t[1]] - p[t[0]]).cross(&(p[t[2]] - p[t[0]]))
}

impl Hull3 {
    /// Hull of a point cloud; `None` when the points are coplanar.
    pub fn new(points: &[Vector3<f64>]) -> Result<Option<Hull3>> {
        if points.iter().any(|p| !p.iter().all(|x| x.is_finite())) {
            return Err(Error::Precondition("non-finite point".into()));
        }
        if points.len() < 4 {
            return Ok(None);
        }
        let pts = points.to_vec();
        let scale = pts.iter().map(|p| p.norm()).fold(1.0, f64::max);
        let tol = 1e-12 * scale;

        // initial tetrahedron from extreme points
        let a = 0;
        let b = far_index(&pts, |p| (p - pts[a]).norm());
        let ab = pts[b] - pts[a];
        if ab.norm() <= tol {
            return Ok(None);
        }
        let c = far_index(&pts, |p| ab.cross(&(p - pts[a])).norm());
        let n = ab.cross(&(pts[c] - pts[a]));
        if n.norm() <= tol * ab.norm() {
            return Ok(None);
        }
        let dd = far_index(&pts, |p| n.dot(&(p - pts[a])).abs());
        if n.dot(&(pts[dd] - pts[a])).abs() <= tol * n.norm() {
            return Ok(None);
        }
        let centroid = (pts[a] + pts[b] + pts[c] + pts[dd]) / 4.0;
        let mut tris: Vec<Option<[usize; 3]>> = Vec::new();
        for t in [[a, b, c], [a, b, dd], [a, c, dd], [b, c, dd]] {
            tris.push(Some(orient(&pts, t, &centroid)));
        }
        for (i, p) in pts.iter().enumerate() {
            if i == a || i == b || i == c || i == dd {
                continue;
            }
            let visible: Vec<usize> = tris
                .iter()
                .enumerate()
                .filter_map(|(j, t)| {
                    let t = t.as_ref()?;
                    let nrm = normal(&pts, t);
                    (nrm.dot(&(p - pts[t[0]])) > tol * nrm.norm()).then_some(j)
                })
                .collect();
            if visible.is_empty() {
                continue;
            }
            // directed edges of visible faces; the horizon is those whose reverse is not visible
            let mut edges: HashMap<(usize, usize), ()> = HashMap::new();
            for &j in &visible {
                let t = tris[j].unwrap();
                for e in [(t[0], t[1]), (t[1], t[2]), (t[2], t[0])] {
                    edges.insert(e, ());
                }
            }
            let horizon: Vec<(usize, usize)> = edges
                .keys()
                .filter(|(x, y)| !edges.contains_key(&(*y, *x)))
                .copied()
                .collect();
            for j in visible {
                tris[j] = None;
            }
            for (x, y) in horizon {
                tris.push(Some([x, y, i]));
            }
        }
        let triangles: Vec<[usize; 3]> = tris.into_iter().flatten().collect();
        Ok(Some(Hull3 { points: pts, triangles }))
    }

    /// Enclosed volume (fan from an interior point).
    pub fn volume(&self) -> f64 {
        let mut o = Vector3::zeros();
        for t in &self.triangles {
            o += self.points[t[0]];
        }
        o /= self.triangles.len() as f64;
        self.triangles
            .iter()
            .map(|t| {
                let [x, y, z] = t.map(|i| self.points[i] - o);
                x.dot(&y.cross(&z)) / 6.0
            })
            .sum()
    }
}

fn far_index<F: Fn(&Vector3<f64>) -> f64>(pts: &[Vector3<f64>], f: F) -> usize {
    let mut best = 0;
    let mut val = f64::NEG_INFINITY;
    for (i, p) in pts.iter().enumerate() {
        let v = f(p);
        if v > val {
            val = v;
            best = i;
        }
    }
    best
}

fn orient(p: &[Vector3<f64>], t: [usize; 3], inside: &Vector3<f64>) -> [usize; 3] {
    if normal(p, &t).dot(&(inside - p[t[0]])) > 0.0 {
        [t[0], t[2], t[1]]
    } else {
        t
    }
}

/// Volume of the convex hull, zero for flat point sets.
pub fn hull_volume(points: &[Vector3<f64>]) -> Result<f64> {
    Ok(Hull3::new(points)?.map(|h| h.volume()).unwrap_or(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn cube_with_interior_points() {
        let mut pts = Vec::new();
        for m in 0..8 {
            pts.push(Vector3::new((m & 1) as f64, (m >> 1 & 1) as f64, (m >> 2 & 1) as f64) * 2.0);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            pts.push(Vector3::new(rng.random(), rng.random(), rng.random()) * 2.0);
        }
        // points on faces and edges
        pts.push(Vector3::new(1.0, 0.0, 0.0));
        pts.push(Vector3::new(1.0, 1.0, 2.0));
        assert_relative_eq!(hull_volume(&pts).unwrap(), 8.0, epsilon = 1e-12);
    }

    #[test]
    fn flat_sets_have_no_volume() {
        let pts = vec![
            Vector3::new(0.0, 0.0, 0.0),
            Vector3::new(1.0, 0.0, 0.0),
            Vector3::new(0.0, 1.0, 0.0),
            Vector3::new(1.0, 1.0, 0.0),
        ];
        assert_eq!(hull_volume(&pts).unwrap(), 0.0);
    }

    #[test]
    fn sphere_points_approach_the_ball() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let pts: Vec<Vector3<f64>> = (0..3000)
            .map(|_| {
                let v = crate::sampling::sample_sphere(3, &mut rng);
                Vector3::new(v[0], v[1], v[2])
            })
            .collect();
        let v = hull_volume(&pts).unwrap();
        assert!(v < 4.0 / 3.0 * std::f64::consts::PI && v > 4.1);
    }
}
