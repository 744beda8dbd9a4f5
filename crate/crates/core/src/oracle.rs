//! Independent reference values for `V_{k,l}(K, L) = C(d,k) V(K[k], −L[l])`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, Vector3};
use serde::Serialize;

use crate::constants::ball_volume;
use crate::error::{Error, Result};
use crate::flag::Flag;
use crate::hull3d;
use crate::multilinear::subsets;
use crate::polytope::Polytope;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleMethod {
    ZonotopeDeterminants,
    MinkowskiPolynomial,
}

/// `values[j] = V_{j,d−j}(K, L)` for `j = 0..=d`.
#[derive(Clone, Debug, Serialize)]
pub struct OracleResult {
    pub values: Vec<f64>,
    pub method: OracleMethod,
    /// `false` for fitted coefficients.
    pub exact: bool,
}

impl OracleResult {
    pub fn get(&self, k: usize) -> f64 {
        self.values[k]
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }
}

fn check_generators(gens: &[DVector<f64>], d: usize) -> Result<()> {
    if gens.iter().any(|g| g.len() != d) {
        return Err(Error::Dimension(format!("generators must lie in R^{d}")));
    }
    Ok(())
}

/// `Σ_{|S|=k, |T|=d−k} |det(S ∪ T)|` over generator subsets of the two zonotopes.
pub fn zonotope_mixed(gens_k: &[DVector<f64>], gens_l: &[DVector<f64>], k: usize) -> Result<f64> {
    let d = gens_k
        .first()
        .or(gens_l.first())
        .map(|g| g.len())
        .ok_or_else(|| Error::Precondition("no generators".into()))?;
    check_generators(gens_k, d)?;
    check_generators(gens_l, d)?;
    if k > d {
        return Err(Error::IndexOutOfRange { index: k, max: d });
    }
    let l = d - k;
    if gens_k.len() < k || gens_l.len() < l {
        return Ok(0.0);
    }
    let mut m = DMatrix::zeros(d, d);
    let mut acc = 0.0;
    let ss = subsets(gens_k.len(), k);
    let ts = subsets(gens_l.len(), l);
    for s in &ss {
        for (c, &i) in s.iter().enumerate() {
            m.set_column(c, &gens_k[i]);
        }
        for t in &ts {
            for (c, &j) in t.iter().enumerate() {
                m.set_column(k + c, &gens_l[j]);
            }
            acc += crate::linalg::det(&m).abs();
        }
    }
    Ok(acc)
}

/// `Vol(Σ [0, g_i]) = Σ_{|S|=d} |det S|`.
pub fn zonotope_volume(gens: &[DVector<f64>]) -> Result<f64> {
    let d = gens
        .first()
        .map(|g| g.len())
        .ok_or_else(|| Error::Precondition("no generators".into()))?;
    zonotope_mixed(gens, &[], d)
}

/// All `V_{j,d−j}` of two zonotopes.
pub fn zonotope_oracle(gens_k: &[DVector<f64>], gens_l: &[DVector<f64>]) -> Result<OracleResult> {
    let d = gens_k
        .first()
        .or(gens_l.first())
        .map(|g| g.len())
        .ok_or_else(|| Error::Precondition("no generators".into()))?;
    let values = (0..=d)
        .map(|j| zonotope_mixed(gens_k, gens_l, j))
        .collect::<Result<Vec<_>>>()?;
    Ok(OracleResult {
        values,
        method: OracleMethod::ZonotopeDeterminants,
        exact: true,
    })
}

fn to3(p: &DVector<f64>) -> Vector3<f64> {
    Vector3::new(p[0], p[1], p[2])
}

/// `Vol(K ⊕ t(−L))` from the hull of all vertex differences.
pub fn minkowski_volume_3d(k_body: &Polytope, l_body: &Polytope, t: f64) -> Result<f64> {
    if k_body.dim() != 3 || l_body.dim() != 3 {
        return Err(Error::Unsupported("Minkowski-sum volumes are implemented in R^3 only".into()));
    }
    let mut pts = Vec::with_capacity(k_body.vertices().len() * l_body.vertices().len());
    for x in k_body.vertices() {
        for y in l_body.vertices() {
            pts.push(to3(x) - to3(y) * t);
        }
    }
    hull3d::hull_volume(&pts)
}

/// Fits `Vol(K ⊕ t(−L)) = Σ_j V_{j,3−j}(K,L) t^{3−j}` through the given `t`
/// values (at least four, distinct).
pub fn minkowski_poly_3d(k_body: &Polytope, l_body: &Polytope, ts: &[f64]) -> Result<OracleResult> {
    if ts.len() < 4 {
        return Err(Error::Precondition("the cubic fit needs at least four t values".into()));
    }
    let vols: Vec<f64> = ts
        .iter()
        .map(|&t| minkowski_volume_3d(k_body, l_body, t))
        .collect::<Result<_>>()?;
    // column p holds t^p, so the coefficient of t^p is V_{3−p,p}
    let a = DMatrix::from_fn(ts.len(), 4, |i, p| ts[i].powi(p as i32));
    let svd = a.clone().svd(true, true);
    let sv = &svd.singular_values;
    let smin = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    let smax = sv.iter().cloned().fold(0.0, f64::max);
    if !(smin > 1e-10 * smax) {
        return Err(Error::Singular(format!(
            "t grid {ts:?} gives a degenerate Vandermonde system"
        )));
    }
    let coef = svd
        .solve(&DVector::from_vec(vols), 1e-14)
        .map_err(|e| Error::Singular(e.to_string()))?;
    let values = (0..=3).map(|j| coef[3 - j]).collect();
    Ok(OracleResult {
        values,
        method: OracleMethod::MinkowskiPolynomial,
        exact: false,
    })
}

/// `κ_{d−k} V_k(K) = C(d,k) V(K[k], B^d[d−k])`.
pub fn ball_identity(body: &Polytope, k: usize) -> f64 {
    ball_volume(body.dim() - k) * body.intrinsic_volume(k)
}

/// `|Σ_j V_{j,d−j} − Vol(K ⊕ (−L))|` relative to the volume.
pub fn sum_identity_defect(result: &OracleResult, sum_volume: f64) -> f64 {
    (result.total() - sum_volume).abs() / sum_volume.abs().max(1e-300)
}

/// `φ^{2,2}` in `R^4` from angles alone:
/// `π² sin²β (25 sin²γ cos²α_U cos²α_V + sin²α_U + sin²α_V − 4cos²α_U − 4cos²α_V)`
/// with `sin²γ cos²α_U cos²α_V` written as a Gram determinant of the projections.
/// Both flags must carry lines in `R^4`.
pub fn phi22_closed_form(fu: &Flag, fv: &Flag) -> f64 {
    let (u, v) = (fu.u(), fv.u());
    let x = fu.space().frame().column(0).into_owned();
    let y = fv.space().frame().column(0).into_owned();
    let cos_b = u.dot(v);
    let sin2_b = 1.0 - cos_b * cos_b;
    let w = (v - u * cos_b) / sin2_b.sqrt();
    let project = |z: &DVector<f64>| z - u * u.dot(z) - &w * w.dot(z);
    let (xl, yl) = (project(&x), project(&y));
    let (cu, cv) = (xl.norm_squared(), yl.norm_squared());
    let gram = cu * cv - xl.dot(&yl).powi(2);
    PI * PI * sin2_b * (25.0 * gram + (1.0 - cu) + (1.0 - cv) - 4.0 * cu - 4.0 * cv)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polytope::{make_cube, make_simplex, make_square4d, make_zonotope};
    use approx::assert_relative_eq;

    fn unit_gens(d: usize) -> Vec<DVector<f64>> {
        (0..d)
            .map(|i| DVector::from_fn(d, |j, _| if i == j { 1.0 } else { 0.0 }))
            .collect()
    }

    #[test]
    fn cubes_split_into_coordinate_choices() {
        for d in 2..5 {
            let e = unit_gens(d);
            for k in 0..=d {
                let expect = crate::multilinear::binomial(d, k) as f64;
                assert_relative_eq!(zonotope_mixed(&e, &e, k).unwrap(), expect, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn one_determinant_when_counts_match() {
        let g = vec![
            DVector::from_vec(vec![1.0, 2.0, 0.0]),
            DVector::from_vec(vec![0.0, 1.0, 3.0]),
        ];
        let h = vec![DVector::from_vec(vec![1.0, 0.0, 1.0])];
        let m = DMatrix::from_columns(&[g[0].clone(), g[1].clone(), h[0].clone()]);
        assert_relative_eq!(zonotope_mixed(&g, &h, 2).unwrap(), m.determinant().abs(), epsilon = 1e-12);
        assert_eq!(zonotope_mixed(&g, &h, 1).unwrap(), 0.0);
    }

    #[test]
    fn cube_polynomial() {
        let c = make_cube(3).unwrap();
        let r = minkowski_poly_3d(&c, &c, &[1.0, 2.0, 3.0, 4.0]).unwrap();
        for (j, v) in r.values.iter().enumerate() {
            assert_relative_eq!(*v, [1.0, 3.0, 3.0, 1.0][j], epsilon = 1e-9);
        }
        assert_relative_eq!(minkowski_volume_3d(&c, &c, 1.0).unwrap(), 8.0, epsilon = 1e-12);
        assert!(minkowski_poly_3d(&c, &c, &[1.0, 1.0, 2.0, 2.0]).is_err());
    }

    #[test]
    fn polynomial_matches_determinants_for_zonotopes() {
        let g = vec![
            DVector::from_vec(vec![1.0, 0.3, -0.2]),
            DVector::from_vec(vec![0.1, 0.9, 0.4]),
            DVector::from_vec(vec![-0.3, 0.2, 1.1]),
            DVector::from_vec(vec![0.5, 0.5, 0.5]),
        ];
        let h = vec![
            DVector::from_vec(vec![0.7, -0.1, 0.0]),
            DVector::from_vec(vec![0.2, 1.0, 0.3]),
            DVector::from_vec(vec![0.0, 0.1, 0.8]),
        ];
        let zk = make_zonotope(&g).unwrap();
        let zl = make_zonotope(&h).unwrap();
        let fit = minkowski_poly_3d(&zk, &zl, &[1.0, 2.0, 3.0, 4.0]).unwrap();
        let det = zonotope_oracle(&g, &h).unwrap();
        for j in 0..=3 {
            assert_relative_eq!(fit.values[j], det.values[j], epsilon = 1e-8);
        }
        let all: Vec<DVector<f64>> = g.iter().chain(&h).cloned().collect();
        assert!(sum_identity_defect(&det, zonotope_volume(&all).unwrap()) < 1e-12);
    }

    #[test]
    fn simplex_roles_swap_with_reflection() {
        let s = make_simplex(3).unwrap();
        let t = make_simplex(3)
            .unwrap()
            .rotate(&DMatrix::from_row_slice(3, 3, &[0., 1., 0., 0., 0., 1., 1., 0., 0.]))
            .unwrap()
            .scale(1.3)
            .unwrap();
        let a = minkowski_poly_3d(&s, &t, &[1.0, 2.0, 3.0, 4.0]).unwrap();
        let b = minkowski_poly_3d(&t, &s, &[1.0, 2.0, 3.0, 4.0]).unwrap();
        for j in 0..=3 {
            assert!(a.values[j] > 0.0);
            // V(K[j], −L[3−j]) = V(L[3−j], −K[j]) after reflecting the whole sum
            assert_relative_eq!(a.values[j], b.values[3 - j], max_relative = 1e-8);
        }
        assert_relative_eq!(a.values[3], 1.0 / 6.0, epsilon = 1e-10);
    }

    #[test]
    fn ball_identities() {
        assert_relative_eq!(ball_identity(&make_cube(3).unwrap(), 2), 6.0, epsilon = 1e-12);
        assert_relative_eq!(ball_identity(&make_cube(4).unwrap(), 2), 6.0 * PI, epsilon = 1e-10);
        assert_relative_eq!(ball_identity(&make_square4d().unwrap(), 2), PI, epsilon = 1e-12);
    }
}
