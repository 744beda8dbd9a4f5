//! Grassmannian moment constants and the kernel `φ^{k,l}`.
//!
//! `c^d_{k,i} = ∫ ⟨A,V⟩² ⟨V,ξ⟩² ν_k^d(dV)` for a unit `ξ ∈ T_i A`; the matrix
//! `D(d,k)` collects the moments `∫ ⟨A,V⟩_i² ⟨V,B⟩² dν = Σ_j d_{i,j} ⟨A,B⟩_j²`.
//! The coefficients `α_{p,q}` solve
//! `α · (D(d−1,k*) ⊗ D(d−1,l*)) = ((γ(d,k)γ(d,l))^{−1}, 0, …, 0)`
//! and `φ^{k,l} = Σ α_{p,q} φ_{p,q}`.

use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::constants::gamma_dk;
use crate::error::{Error, Result};
use crate::flag::Flag;
use crate::linalg;
use crate::mc::{mc_integrate_multi, McConfig, McEstimate};
use crate::multilinear::{
    binomial, binomial_signed, blade_inner, subsets, subspace_products_squared, tia_dim,
    Subspace,
};
use crate::sampling;

/// Version tag written into cached tables.
pub const TABLE_VERSION: u32 = 1;

/// Relative tolerance on `|det D|` after scaling by the largest entry.
pub const REGULARITY_TOL: f64 = 1e-12;

/// Where the moment constants come from.
#[derive(Clone, Debug, PartialEq)]
pub enum CSource {
    /// Closed forms; available for `k ∈ {0, 1, d−1, d}`.
    Exact,
    MonteCarlo(McConfig),
}

/// Origin of a set of constants.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Provenance {
    Exact,
    MonteCarlo {
        seed: u64,
        n: u64,
        /// Set when some relative standard error exceeds the configured target.
        flagged: bool,
    },
}

/// The vector `(c^d_{k,0}, …, c^d_{k,min(k,d−k)})`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CVector {
    pub d: usize,
    pub k: usize,
    pub values: Vec<f64>,
    pub std_errors: Vec<f64>,
    pub provenance: Provenance,
}

/// Closed-form constants, when known.
///
/// For lines, `c_0 = E v_1⁴ = 3/(d(d+2))` and `c_1 = E v_1² v_2² = 1/(d(d+2))`;
/// hyperplanes give the same values through `V ↦ V^⊥`.
pub fn exact_c_constants(d: usize, k: usize) -> Option<Vec<f64>> {
    if k > d {
        return None;
    }
    if k == 0 || k == d {
        return Some(vec![1.0]);
    }
    if k == 1 || k == d - 1 {
        let s = (d * (d + 2)) as f64;
        return Some(vec![3.0 / s, 1.0 / s]);
    }
    None
}

/// `c^d_{k,i}` for `i = 0..=min(k, d−k)`.
///
/// The Monte Carlo route draws `V ~ ν_k^d`, fixes `A = span(e_1..e_k)` and
/// averages `⟨A,V⟩² ⟨V,η⟩²` over the whole orthonormal basis `η` of `T_i A`,
/// which is `⟨A,V⟩² ⟨A,V⟩_i² / dim T_i A` per draw.
pub fn c_constants(d: usize, k: usize, source: &CSource) -> Result<CVector> {
    if d == 0 || k > d {
        return Err(Error::IndexOutOfRange { index: k, max: d });
    }
    if k == 0 || k == d {
        return Ok(CVector {
            d,
            k,
            values: vec![1.0],
            std_errors: vec![0.0],
            provenance: Provenance::Exact,
        });
    }
    match source {
        CSource::Exact => {
            let values = exact_c_constants(d, k).ok_or_else(|| {
                Error::Unsupported(format!(
                    "no closed form for c^{d}_{{{k},i}}; use Monte Carlo constants"
                ))
            })?;
            Ok(CVector {
                d,
                k,
                std_errors: vec![0.0; values.len()],
                values,
                provenance: Provenance::Exact,
            })
        }
        CSource::MonteCarlo(config) => {
            let m = k.min(d - k) + 1;
            let a = Subspace::coordinate(d, &(0..k).collect::<Vec<_>>());
            let dims: Vec<f64> = (0..m).map(|i| tia_dim(d, k, i) as f64).collect();
            let est = mc_integrate_multi(config, m, |rng, out| {
                let v = sampling::sample_grassmann(d, k, rng);
                let p = subspace_products_squared(&a, &v)?;
                for i in 0..m {
                    out[i] = p[0] * p[i] / dims[i];
                }
                Ok(())
            })?;
            let flagged = match config.target_rel_error {
                Some(t) => est.iter().any(|e| e.rel_error() > t),
                None => false,
            };
            Ok(CVector {
                d,
                k,
                values: est.iter().map(|e| e.mean).collect(),
                std_errors: est.iter().map(|e| e.std_error).collect(),
                provenance: Provenance::MonteCarlo {
                    seed: config.seed,
                    n: config.samples,
                    flagged,
                },
            })
        }
    }
}

/// The matrix `D(d,k)` from the constants `c^d_{k,·}`:
/// `d_{i,j} = Σ_m c_m Σ_l C(k−j,l) C(j,k−i−l) C(j,k−m−l) C(d−k−j,m+l+i−k)`.
pub fn d_matrix(d: usize, k: usize, c: &[f64]) -> Result<DMatrix<f64>> {
    if k > d {
        return Err(Error::IndexOutOfRange { index: k, max: d });
    }
    let n = k.min(d - k) + 1;
    if c.len() != n {
        return Err(Error::Dimension(format!(
            "D({d},{k}) needs {n} constants, got {}",
            c.len()
        )));
    }
    let (d, k) = (d as i64, k as i64);
    let mut out = DMatrix::zeros(n, n);
    for i in 0..n as i64 {
        for j in 0..n as i64 {
            let mut acc = 0.0;
            for (m, &cm) in c.iter().enumerate() {
                let m = m as i64;
                let mut inner = 0.0;
                for l in 0..=k {
                    inner += binomial_signed(k - j, l)
                        * binomial_signed(j, k - i - l)
                        * binomial_signed(j, k - m - l)
                        * binomial_signed(d - k - j, m + l + i - k);
                }
                acc += cm * inner;
            }
            out[(i as usize, j as usize)] = acc;
        }
    }
    let scale = out.amax();
    if scale == 0.0 || linalg::det(&(&out / scale)).abs() <= REGULARITY_TOL {
        return Err(Error::Singular(format!(
            "D({d},{k}) is not regular; the moment constants are inconsistent"
        )));
    }
    Ok(out)
}

/// Diagnostics attached to a table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableErrors {
    pub c_k: Vec<f64>,
    pub c_l: Vec<f64>,
    /// `‖α (D_k ⊗ D_l) − rhs‖ / ‖rhs‖`.
    pub residual: f64,
    /// 2-norm condition number of `D_k ⊗ D_l`.
    pub condition: f64,
}

/// Constants for the kernel `φ^{k,l}` in dimension `d = k + l`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhiTable {
    pub version: u32,
    pub d: usize,
    pub k: usize,
    pub l: usize,
    /// `c^{d−1}_{k*,i}`.
    pub c_k: Vec<f64>,
    /// `c^{d−1}_{l*,j}`.
    pub c_l: Vec<f64>,
    #[serde(rename = "D_k")]
    pub d_k: Vec<Vec<f64>>,
    #[serde(rename = "D_l")]
    pub d_l: Vec<Vec<f64>>,
    /// `α_{p,q}`, `p ≤ min(k,k*)`, `q ≤ min(l,l*)`.
    pub alpha: Vec<Vec<f64>>,
    pub errors: TableErrors,
    pub gamma_product: f64,
    pub seed: Option<u64>,
    pub n: Option<u64>,
    pub provenance_k: Provenance,
    pub provenance_l: Provenance,
}

fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().cloned().collect()).collect()
}

fn from_rows(r: &[Vec<f64>]) -> DMatrix<f64> {
    let n = r.len();
    let m = r.first().map_or(0, Vec::len);
    DMatrix::from_fn(n, m, |i, j| r[i][j])
}

/// Builds `D(d−1,k*)`, `D(d−1,l*)` and solves for `α`.
pub fn alpha_table(d: usize, k: usize, source: &CSource) -> Result<PhiTable> {
    if d < 2 || k == 0 || k >= d {
        return Err(Error::Precondition(format!(
            "the kernel needs 1 <= k <= d-1 (d = {d}, k = {k})"
        )));
    }
    let l = d - k;
    let kstar = d - 1 - k;
    let lstar = d - 1 - l;
    let ck = c_constants(d - 1, kstar, source)?;
    let cl = c_constants(d - 1, lstar, source)?;
    let dk = d_matrix(d - 1, kstar, &ck.values)?;
    let dl = d_matrix(d - 1, lstar, &cl.values)?;
    let m = dk.kronecker(&dl);
    let gamma_product = gamma_dk(d, k) * gamma_dk(d, l);
    let mut rhs = nalgebra::DVector::zeros(m.nrows());
    rhs[0] = 1.0 / gamma_product;
    let mt = m.transpose();
    let a = mt
        .clone()
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Singular("Kronecker product of the D matrices".into()))?;
    let residual = (&mt * &a - &rhs).norm() / rhs.norm();
    if residual > 1e-10 {
        return Err(Error::Consistency(format!(
            "alpha system residual {residual:e} exceeds 1e-10"
        )));
    }
    let sv = m.clone().svd(false, false).singular_values;
    let condition = sv.max() / sv.min();
    let nl = dl.nrows();
    let alpha = DMatrix::from_fn(dk.nrows(), nl, |p, q| a[p * nl + q]);
    let (seed, n) = match source {
        CSource::Exact => (None, None),
        CSource::MonteCarlo(c) => (Some(c.seed), Some(c.samples)),
    };
    Ok(PhiTable {
        version: TABLE_VERSION,
        d,
        k,
        l,
        c_k: ck.values,
        c_l: cl.values,
        d_k: rows(&dk),
        d_l: rows(&dl),
        alpha: rows(&alpha),
        errors: TableErrors {
            c_k: ck.std_errors,
            c_l: cl.std_errors,
            residual,
            condition,
        },
        gamma_product,
        seed,
        n,
        provenance_k: ck.provenance,
        provenance_l: cl.provenance,
    })
}

impl PhiTable {
    pub fn kstar(&self) -> usize {
        self.d - 1 - self.k
    }

    pub fn lstar(&self) -> usize {
        self.d - 1 - self.l
    }

    pub fn alpha_matrix(&self) -> DMatrix<f64> {
        from_rows(&self.alpha)
    }

    pub fn d_k_matrix(&self) -> DMatrix<f64> {
        from_rows(&self.d_k)
    }

    pub fn d_l_matrix(&self) -> DMatrix<f64> {
        from_rows(&self.d_l)
    }

    /// `D_k ⊗ D_l` in the row-major `(p, q)` layout.
    pub fn kronecker(&self) -> DMatrix<f64> {
        self.d_k_matrix().kronecker(&self.d_l_matrix())
    }

    /// True when every constant is a closed form.
    pub fn is_exact(&self) -> bool {
        self.provenance_k == Provenance::Exact && self.provenance_l == Provenance::Exact
    }

    /// The table for the swapped pair `(l, k)`.
    pub fn swapped(&self) -> PhiTable {
        PhiTable {
            k: self.l,
            l: self.k,
            c_k: self.c_l.clone(),
            c_l: self.c_k.clone(),
            d_k: self.d_l.clone(),
            d_l: self.d_k.clone(),
            alpha: rows(&self.alpha_matrix().transpose()),
            errors: TableErrors {
                c_k: self.errors.c_l.clone(),
                c_l: self.errors.c_k.clone(),
                ..self.errors.clone()
            },
            provenance_k: self.provenance_l.clone(),
            provenance_l: self.provenance_k.clone(),
            ..self.clone()
        }
    }

    /// File name under which a table for `(d, k, source)` is cached.
    pub fn cache_name(d: usize, k: usize, source: &CSource) -> String {
        match source {
            CSource::Exact => format!("phi_d{d}_k{k}_exact.json"),
            CSource::MonteCarlo(c) => format!(
                "phi_d{d}_k{k}_seed{}_n{}_b{}.json",
                c.seed, c.samples, c.batches
            ),
        }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<PhiTable> {
        let table: PhiTable = serde_json::from_str(&fs::read_to_string(path)?)?;
        if table.version != TABLE_VERSION {
            return Err(Error::Consistency(format!(
                "cached table version {} (expected {TABLE_VERSION})",
                table.version
            )));
        }
        Ok(table)
    }

    /// Loads the cached table from `dir` or builds and stores it.
    pub fn load_or_build(dir: Option<&Path>, d: usize, k: usize, source: &CSource) -> Result<PhiTable> {
        let Some(dir) = dir else {
            return alpha_table(d, k, source);
        };
        let path: PathBuf = dir.join(Self::cache_name(d, k, source));
        if path.exists() {
            if let Ok(t) = Self::load(&path) {
                if t.d == d && t.k == k {
                    return Ok(t);
                }
            }
        }
        let table = alpha_table(d, k, source)?;
        fs::create_dir_all(dir)?;
        table.save(&path)?;
        Ok(table)
    }

    /// `Σ_{p,q} |α_{p,q}| · C(d−1,k*) C(d−1,l*)`, a bound for `|φ| / sin²∠(u,v)`.
    pub fn phi_bound(&self) -> f64 {
        let terms = binomial(self.d - 1, self.kstar()) * binomial(self.d - 1, self.lstar());
        self.alpha.iter().flatten().map(|a| a.abs()).sum::<f64>() * terms as f64
    }
}

fn check_flags(d: usize, kstar: usize, lstar: usize, fu: &Flag, fv: &Flag) -> Result<()> {
    if fu.dim() != d || fv.dim() != d {
        return Err(Error::Dimension(format!(
            "flags in R^{} and R^{} for a kernel in R^{d}",
            fu.dim(),
            fv.dim()
        )));
    }
    if fu.grade() != kstar || fv.grade() != lstar {
        return Err(Error::InvalidFlag(format!(
            "flag grades ({}, {}) but the kernel needs ({kstar}, {lstar})",
            fu.grade(),
            fv.grade()
        )));
    }
    Ok(())
}

/// All `φ_{p,q}(u,U,v,V) = Σ ‖(∧u_I) ∧ u ∧ (∧v_J) ∧ v‖²` for `d = k + l`,
/// summed over `|I| = k*`, `|J| = l*` with `p = k* − |I ∩ I_0|`,
/// `q = l* − |J ∩ J_0|`.
pub fn phi_components(d: usize, k: usize, fu: &Flag, fv: &Flag) -> Result<DMatrix<f64>> {
    if k == 0 || k >= d {
        return Err(Error::Precondition(format!("1 <= k <= d-1 (d = {d}, k = {k})")));
    }
    let l = d - k;
    let (kstar, lstar) = (d - 1 - k, d - 1 - l);
    check_flags(d, kstar, lstar, fu, fv)?;
    Ok(components_in(d, k, &fu.adapted_basis(), &fv.adapted_basis()))
}

/// [`phi_components`] for explicit orthonormal bases `[u_1..u_{d−1}, u]` and
/// `[v_1..v_{d−1}, v]` whose first `k*` (resp. `l*`) columns span `U` (resp. `V`).
pub fn phi_components_in(d: usize, k: usize, bu: &DMatrix<f64>, bv: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if k == 0 || k >= d {
        return Err(Error::Precondition(format!("1 <= k <= d-1 (d = {d}, k = {k})")));
    }
    for b in [bu, bv] {
        if b.nrows() != d || b.ncols() != d {
            return Err(Error::Dimension(format!("basis of shape {}x{} in R^{d}", b.nrows(), b.ncols())));
        }
        let defect = linalg::orthonormality_defect(b);
        if defect > 1e-10 {
            return Err(Error::Dimension(format!("basis not orthonormal (defect {defect:e})")));
        }
    }
    Ok(components_in(d, k, bu, bv))
}

fn components_in(d: usize, k: usize, bu: &DMatrix<f64>, bv: &DMatrix<f64>) -> DMatrix<f64> {
    let l = d - k;
    let (kstar, lstar) = (d - 1 - k, d - 1 - l);
    let mut out = DMatrix::zeros(k.min(kstar) + 1, l.min(lstar) + 1);
    let is = subsets(d - 1, kstar);
    let js = subsets(d - 1, lstar);
    let mut m = DMatrix::zeros(d, d);
    for i in &is {
        let p = kstar - i.iter().filter(|&&x| x < kstar).count();
        for (c, &x) in i.iter().enumerate() {
            m.set_column(c, &bu.column(x));
        }
        m.set_column(kstar, &bu.column(d - 1));
        for j in &js {
            let q = lstar - j.iter().filter(|&&x| x < lstar).count();
            for (c, &x) in j.iter().enumerate() {
                m.set_column(kstar + 1 + c, &bv.column(x));
            }
            m.set_column(d - 1, &bv.column(d - 1));
            let det = linalg::det(&m);
            out[(p, q)] += det * det;
        }
    }
    out
}

/// `Σ α_{p,q} φ_{p,q}` for a matrix of components.
pub fn phi_from_components(comps: &DMatrix<f64>, table: &PhiTable) -> f64 {
    let mut acc = 0.0;
    for (p, row) in table.alpha.iter().enumerate() {
        for (q, a) in row.iter().enumerate() {
            acc += a * comps[(p, q)];
        }
    }
    acc
}

/// `φ_{p,q}` for a single index pair.
pub fn phi_pq(d: usize, k: usize, fu: &Flag, fv: &Flag, p: usize, q: usize) -> Result<f64> {
    let all = phi_components(d, k, fu, fv)?;
    if p >= all.nrows() || q >= all.ncols() {
        return Err(Error::IndexOutOfRange {
            index: p.max(q),
            max: all.nrows().min(all.ncols()) - 1,
        });
    }
    Ok(all[(p, q)])
}

/// `φ^{k,l}(u,U,v,V) = Σ α_{p,q} φ_{p,q}`.
pub fn phi(fu: &Flag, fv: &Flag, table: &PhiTable) -> Result<f64> {
    let comps = phi_components(table.d, table.k, fu, fv)?;
    Ok(phi_from_components(&comps, table))
}

/// Both sides of `∬ ⟨A,U⟩² φ(u,U,v,V) ⟨V,B⟩² dν dν = ‖A∧u∧B∧v‖² / (γ(d,k)γ(d,l))`.
#[derive(Clone, Debug, Serialize)]
pub struct PdintReport {
    pub lhs: McEstimate,
    pub rhs: f64,
    pub z: f64,
    pub pass: bool,
}

/// Nested Monte Carlo check of the defining identity of `φ^{k,l}` at the
/// flags `(u, A)` and `(v, B)`.
///
/// `U` and `V` are drawn from `⟨A,U⟩² ν(dU)` and `⟨V,B⟩² ν(dV)` (normalized
/// by rejection), so the integrand reduces to `φ`.
pub fn verify_pdint(
    table: &PhiTable,
    fa: &Flag,
    fb: &Flag,
    config: &McConfig,
) -> Result<PdintReport> {
    let d = table.d;
    check_flags(d, table.kstar(), table.lstar(), fa, fb)?;
    let wu = sampling::orthogonal_hyperplane(fa.u());
    let wv = sampling::orthogonal_hyperplane(fb.u());
    let norm = (binomial(d - 1, table.kstar()) * binomial(d - 1, table.lstar())) as f64;
    let est = mc_integrate_multi(config, 1, |rng, out| {
        let u_space = sampling::sample_grassmann_weighted(&wu, fa.space(), rng);
        let v_space = sampling::sample_grassmann_weighted(&wv, fb.space(), rng);
        let fu = Flag::new(fa.u().clone(), u_space)?;
        let fv = Flag::new(fb.u().clone(), v_space)?;
        out[0] = phi(&fu, &fv, table)?;
        Ok(())
    })?
    .remove(0)
    .scaled(1.0 / norm);
    let mut m = DMatrix::zeros(d, d);
    let ks = table.kstar();
    m.columns_mut(0, ks).copy_from(fa.space().frame());
    m.set_column(ks, fa.u());
    m.columns_mut(ks + 1, table.lstar()).copy_from(fb.space().frame());
    m.set_column(d - 1, fb.u());
    let det = linalg::det(&m);
    let rhs = det * det / table.gamma_product;
    let z = est.z_score(rhs);
    Ok(PdintReport {
        lhs: est,
        rhs,
        z,
        pass: z <= 3.0,
    })
}

/// `⟨A, B⟩²` for subspaces of equal grade.
pub fn blade_inner_squared(a: &Subspace, b: &Subspace) -> Result<f64> {
    blade_inner(a, b).map(|c| c * c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flag::random_flag;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn exact_constants_in_three_dimensions() {
        let c = c_constants(3, 1, &CSource::Exact).unwrap();
        assert_relative_eq!(c.values[0], 0.2, epsilon = 1e-15);
        assert_relative_eq!(c.values[1], 1.0 / 15.0, epsilon = 1e-15);
        assert!(c_constants(4, 2, &CSource::Exact).is_err());
    }

    #[test]
    fn d31_from_exact_constants() {
        let d = d_matrix(3, 1, &[0.2, 1.0 / 15.0]).unwrap();
        let expect = DMatrix::from_row_slice(2, 2, &[3.0, 1.0, 2.0, 4.0]) / 15.0;
        assert!((d - expect).amax() < 1e-15);
    }

    #[test]
    fn endpoint_matrices_are_one() {
        for d in 1..6 {
            let m = d_matrix(d, 0, &[1.0]).unwrap();
            assert_eq!(m[(0, 0)], 1.0);
        }
    }

    #[test]
    fn singular_d_is_rejected() {
        let err = d_matrix(3, 1, &[0.5, 0.5]).unwrap_err();
        assert!(matches!(err, Error::Singular(_)));
    }

    #[test]
    fn alpha_in_four_dimensions() {
        let t = alpha_table(4, 2, &CSource::Exact).unwrap();
        let expect = DMatrix::from_row_slice(2, 2, &[16.0, -4.0, -4.0, 1.0]) * (PI * PI);
        assert!((t.alpha_matrix() - expect).amax() < 1e-10);
        let kron = t.kronecker() * 225.0;
        let expected = DMatrix::from_row_slice(
            4,
            4,
            &[9., 3., 3., 1., 6., 12., 2., 4., 6., 2., 12., 4., 4., 8., 8., 16.],
        );
        assert!((kron - expected).amax() < 1e-12);
    }

    #[test]
    fn swapped_table_matches_direct_build() {
        let a = alpha_table(3, 1, &CSource::Exact).unwrap().swapped();
        let b = alpha_table(3, 2, &CSource::Exact).unwrap();
        assert!((a.alpha_matrix() - b.alpha_matrix()).amax() < 1e-12);
    }

    #[test]
    fn phi_vanishes_for_opposite_directions() {
        let t = alpha_table(4, 2, &CSource::Exact).unwrap();
        let mut rng = McConfig::new(1, 17).stream(0);
        let fu = random_flag(4, 1, &mut rng);
        let w = sampling::orthogonal_hyperplane(&(-fu.u()));
        let fv = Flag::new(-fu.u(), sampling::sample_grassmann_in(&w, 1, &mut rng)).unwrap();
        assert!(phi_components(4, 2, &fu, &fv).unwrap().amax() < 1e-24);
        assert!(phi(&fu, &fv, &t).unwrap().abs() < 1e-20);
    }

    #[test]
    fn components_sum_to_twice_sine_squared_in_four_dimensions() {
        let mut rng = McConfig::new(1, 5).stream(0);
        for _ in 0..50 {
            let fu = random_flag(4, 1, &mut rng);
            let fv = random_flag(4, 1, &mut rng);
            let s2 = 1.0 - fu.u().dot(fv.u()).powi(2);
            let total = phi_components(4, 2, &fu, &fv).unwrap().sum();
            assert!((total - 2.0 * s2).abs() < 1e-12);
        }
    }

    #[test]
    fn grade_mismatch_is_an_error() {
        let mut rng = McConfig::new(1, 5).stream(0);
        let fu = random_flag(4, 2, &mut rng);
        let fv = random_flag(4, 1, &mut rng);
        assert!(matches!(
            phi_components(4, 2, &fu, &fv).unwrap_err(),
            Error::InvalidFlag(_)
        ));
    }

    #[test]
    fn defining_identity_holds_on_random_flags() {
        let mut rng = McConfig::new(1, 23).stream(0);
        for (d, k) in [(3, 1), (3, 2), (4, 2), (4, 1)] {
            let t = alpha_table(d, k, &CSource::Exact).unwrap();
            let fa = random_flag(d, t.kstar(), &mut rng);
            let fb = random_flag(d, t.lstar(), &mut rng);
            let r = verify_pdint(&t, &fa, &fb, &McConfig::new(20_000, 3)).unwrap();
            assert!(r.z < 4.0, "d={d} k={k}: {:?} vs {}", r.lhs, r.rhs);
        }
    }

    #[test]
    fn cache_round_trip() {
        let dir = std::env::temp_dir().join(format!("flagvol-cache-{}", std::process::id()));
        let a = PhiTable::load_or_build(Some(&dir), 4, 2, &CSource::Exact).unwrap();
        let b = PhiTable::load_or_build(Some(&dir), 4, 2, &CSource::Exact).unwrap();
        assert_eq!(a, b);
        let json = fs::read_to_string(dir.join(PhiTable::cache_name(4, 2, &CSource::Exact))).unwrap();
        for key in ["\"D_k\"", "\"alpha\"", "\"version\"", "\"errors\""] {
            assert!(json.contains(key), "{key}");
        }
        fs::remove_dir_all(dir).ok();
    }
}
