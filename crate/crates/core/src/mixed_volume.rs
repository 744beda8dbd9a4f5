//! Estimators of `V_{k,l}(K, L) = C(d,k) V(K[k], −L[l])`, `k + l = d`.
//!
//! * flag route: `∬ F_{k,l}(∠(u,v)) φ^{k,l}(u,U,v,V) Ω_k(K; d(u,U)) Ω_l(L; d(v,V))`,
//!   optionally with the cut-off weight `F^{(ε)}`;
//! * direct route for polytopes:
//!   `Σ_{F,G} H^k(F) H^l(G) ∫∫ F_{k,l}(∠(u,v)) ‖A_F(u) ∧ u ∧ A_G(v) ∧ v‖² du dv`
//!   over `ν(K,F) × ν(L,G)`.
//!
//! The normal data of both bodies enter as given: the reflection of `L` in
//! the target is produced by the representation itself.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::Serialize;

use crate::constants::f_kl;
use crate::error::{Error, Result};
use crate::flag::Flag;
use crate::flag_measure::{Body, FlagSampler};
use crate::kernel::{self, PhiTable};
use crate::linalg;
use crate::mc::{self, McConfig, McEstimate};
use crate::multilinear::Subspace;
use crate::polytope::{self, Polytope};
use crate::sampling;

/// Angles with `sin∠` below this contribute nothing to the direct route.
pub const SIN_FLOOR: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Cut-off representation with parameter `ε`.
    FlagIr1 { eps: f64 },
    /// Uncut flag representation.
    FlagIr2,
    /// Face-pair sum for polytopes.
    DirectIr,
}

impl Mode {
    pub fn name(&self) -> &'static str {
        match self {
            Mode::FlagIr1 { .. } => "flag_IR1",
            Mode::FlagIr2 => "flag_IR2",
            Mode::DirectIr => "direct_IR",
        }
    }
}

/// Result of a mixed-volume run.
#[derive(Clone, Debug, Serialize)]
pub struct MixedVolumeReport {
    pub value: f64,
    pub std_error: f64,
    pub n: u64,
    pub seed: u64,
    pub mode: &'static str,
    pub k: usize,
    pub l: usize,
    pub preconditions_checked: Vec<String>,
    /// `∬ sin^{3−d}∠(u,v)` against the product of the two flag-measure marginals.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub guard: Option<McEstimate>,
}

impl MixedVolumeReport {
    pub fn estimate(&self) -> McEstimate {
        McEstimate {
            mean: self.value,
            std_error: self.std_error,
            n: self.n,
            seed: self.seed,
        }
    }
}

fn check_pair(k_body: &Body, l_body: &Body, k: usize) -> Result<(usize, usize)> {
    let d = k_body.dim();
    if l_body.dim() != d {
        return Err(Error::Dimension(format!(
            "bodies in R^{d} and R^{}",
            l_body.dim()
        )));
    }
    if k == 0 || k >= d {
        return Err(Error::IndexOutOfRange {
            index: k,
            max: d.saturating_sub(1),
        });
    }
    Ok((d, d - k))
}

fn check_table(table: &PhiTable, d: usize, k: usize) -> Result<()> {
    if table.d != d || table.k != k {
        return Err(Error::Precondition(format!(
            "kernel table is for (d, k) = ({}, {}), run needs ({d}, {k})",
            table.d, table.k
        )));
    }
    Ok(())
}

struct PairDraw {
    theta: f64,
    phi: f64,
}

fn draw_pair<R: Rng + ?Sized>(
    sk: &FlagSampler,
    sl: &FlagSampler,
    table: &PhiTable,
    rng: &mut R,
) -> Result<PairDraw> {
    let a = sk.sample(rng)?;
    let b = sl.sample(rng)?;
    let theta = linalg::angle_between(a.flag.u(), b.flag.u());
    let phi = kernel::phi(&a.flag, &b.flag, table)?;
    Ok(PairDraw { theta, phi })
}

/// Cut-off estimates over a decreasing `ε` grid from one sample stream.
#[derive(Clone, Debug, Serialize)]
pub struct EpsScan {
    pub eps: Vec<f64>,
    pub values: Vec<McEstimate>,
    /// `V^{(ε_{i+1})} − V^{(ε_i)}`, estimated on the same draws.
    pub increments: Vec<McEstimate>,
}

/// `V^{(ε)}_{k,l}(K, L)` and its increments over a strictly decreasing grid.
pub fn v_kl_eps_scan(
    k_body: &Body,
    l_body: &Body,
    k: usize,
    eps: &[f64],
    table: &PhiTable,
    config: &McConfig,
) -> Result<EpsScan> {
    let (d, l) = check_pair(k_body, l_body, k)?;
    check_table(table, d, k)?;
    if let Some(e) = eps.iter().find(|e| !(**e > 0.0 && **e < PI)) {
        return Err(Error::Precondition(format!("cut-off {e} outside (0, pi)")));
    }
    if eps.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Precondition("cut-off grid must be strictly decreasing".into()));
    }
    let m = eps.len();
    let sk = FlagSampler::new(k_body, k)?;
    let sl = FlagSampler::new(l_body, l)?;
    if sk.is_empty() || sl.is_empty() || m == 0 {
        return Ok(EpsScan {
            eps: eps.to_vec(),
            values: vec![McEstimate::exact(0.0); m],
            increments: vec![McEstimate::exact(0.0); m.saturating_sub(1)],
        });
    }
    let mass = sk.mass() * sl.mass();
    let out = mc::mc_integrate_multi(config, 2 * m - 1, |rng, out| {
        let p = draw_pair(&sk, &sl, table, rng)?;
        let value = mass * f_kl(p.theta, k, l) * p.phi;
        for (i, &e) in eps.iter().enumerate() {
            if p.theta <= PI - e {
                out[i] = value;
                if i > 0 && p.theta > PI - eps[i - 1] {
                    out[m + i - 1] = value;
                }
            }
        }
        Ok(())
    })?;
    Ok(EpsScan {
        eps: eps.to_vec(),
        values: out[..m].to_vec(),
        increments: out[m..].to_vec(),
    })
}

/// `V^{(ε)}_{k,l}(K, L)` for each `ε` of a strictly decreasing grid,
/// sharing one sample stream.
pub fn v_kl_eps_grid(
    k_body: &Body,
    l_body: &Body,
    k: usize,
    eps: &[f64],
    table: &PhiTable,
    config: &McConfig,
) -> Result<Vec<McEstimate>> {
    Ok(v_kl_eps_scan(k_body, l_body, k, eps, table, config)?.values)
}

/// `V^{(ε)}_{k,l}(K, L)`.
pub fn v_kl_eps(
    k_body: &Body,
    l_body: &Body,
    k: usize,
    eps: f64,
    table: &PhiTable,
    config: &McConfig,
) -> Result<McEstimate> {
    Ok(v_kl_eps_grid(k_body, l_body, k, &[eps], table, config)?.remove(0))
}

/// Conditions under which the uncut representation holds. Returns the audit
/// lines, or the first face pair that breaks general relative position.
pub fn check_flag_preconditions(
    k_body: &Body,
    l_body: &Body,
    k: usize,
    acknowledge_rotation: bool,
) -> Result<Vec<String>> {
    let (_, l) = check_pair(k_body, l_body, k)?;
    let mut audit = Vec::new();
    match (k_body, l_body) {
        (Body::Polytope(p), Body::Polytope(q)) => match p.find_parallel_pair(q, k) {
            None => audit.push(format!(
                "general relative position: all {}x{} face pairs transversal",
                p.face_count(k),
                q.face_count(l)
            )),
            Some(pair) if acknowledge_rotation => audit.push(format!(
                "general relative position fails ({k}-face #{} vs {l}-face #{}); \
                 random rotation acknowledged by caller",
                pair.face_k, pair.face_l
            )),
            Some(pair) => {
                return Err(Error::NotGeneralPosition {
                    k,
                    l,
                    face_k: pair.face_k,
                    face_l: pair.face_l,
                    sigma: pair.sigma,
                })
            }
        },
        _ => audit.push("one body is a ball: support function of class C^{1,1}".into()),
    }
    Ok(audit)
}

/// `V_{k,l}(K, L)` through the uncut flag representation.
pub fn v_kl_flag(
    k_body: &Body,
    l_body: &Body,
    k: usize,
    table: &PhiTable,
    config: &McConfig,
    acknowledge_rotation: bool,
) -> Result<MixedVolumeReport> {
    let (d, l) = check_pair(k_body, l_body, k)?;
    check_table(table, d, k)?;
    let audit = check_flag_preconditions(k_body, l_body, k, acknowledge_rotation)?;
    let sk = FlagSampler::new(k_body, k)?;
    let sl = FlagSampler::new(l_body, l)?;
    let (value, guard) = if sk.is_empty() || sl.is_empty() {
        (McEstimate::exact(0.0), McEstimate::exact(0.0))
    } else {
        let mass = sk.mass() * sl.mass();
        let power = 3 - d as i32;
        let out = mc::mc_integrate_multi(config, 2, |rng, out| {
            let p = draw_pair(&sk, &sl, table, rng)?;
            out[0] = mass * f_kl(p.theta, k, l) * p.phi;
            out[1] = mass * p.theta.sin().powi(power);
            Ok(())
        })?;
        (out[0], out[1])
    };
    Ok(MixedVolumeReport {
        value: value.mean,
        std_error: value.std_error,
        n: value.n,
        seed: value.seed,
        mode: Mode::FlagIr2.name(),
        k,
        l,
        preconditions_checked: audit,
        guard: Some(guard),
    })
}

fn wedge_squared(a: &Subspace, u: &DVector<f64>, b: &Subspace, v: &DVector<f64>) -> f64 {
    let d = u.len();
    let (ka, kb) = (a.grade(), b.grade());
    let mut m = DMatrix::zeros(d, d);
    m.columns_mut(0, ka).copy_from(a.frame());
    m.set_column(ka, u);
    m.columns_mut(ka + 1, kb).copy_from(b.frame());
    m.set_column(d - 1, v);
    let det = linalg::det(&m);
    det * det
}

/// `V_{k,l}(K, L)` for polytopes through the face-pair sum.
pub fn v_kl_direct(k_body: &Polytope, l_body: &Polytope, k: usize, config: &McConfig) -> Result<McEstimate> {
    let kb = Body::Polytope(k_body.clone());
    let lb = Body::Polytope(l_body.clone());
    let (_, l) = check_pair(&kb, &lb, k)?;
    let sk = FlagSampler::new(&kb, k)?;
    let sl = FlagSampler::new(&lb, l)?;
    if sk.is_empty() || sl.is_empty() {
        return Ok(McEstimate::exact(0.0));
    }
    let weight = sk.patch_weight() * sl.patch_weight();
    Ok(mc::mc_integrate_multi(config, 1, |rng, out| {
        let (u, _, a) = sk.sample_direction(rng)?;
        let (v, _, b) = sl.sample_direction(rng)?;
        let theta = linalg::angle_between(&u, &v);
        if theta.sin() < SIN_FLOOR {
            return Ok(());
        }
        let (a, b) = (a.expect("polytope face"), b.expect("polytope face"));
        out[0] = weight * f_kl(theta, k, l) * wedge_squared(&a, &u, &b, &v);
        Ok(())
    })?
    .remove(0))
}

/// Negative and positive parts of the cut-off flag integral over a
/// decreasing `ε` grid, for the unit square in `R^4` against itself (`k = 2`).
#[derive(Clone, Debug, Serialize)]
pub struct DivergenceScan {
    pub eps: Vec<f64>,
    /// `N(ε) = ∬ F^{(ε)} φ_− dΩ_2 dΩ_2`.
    pub negative: Vec<McEstimate>,
    /// `P(ε) = ∬ F^{(ε)} φ_+ dΩ_2 dΩ_2`.
    pub positive: Vec<McEstimate>,
    /// `N(ε_{i+1}) − N(ε_i)`, estimated on the same draws.
    pub increments: Vec<McEstimate>,
    /// Successive increment ratios.
    pub ratios: Vec<f64>,
    /// Every increment is positive beyond 3σ.
    pub strictly_increasing: bool,
    /// No increment is negative beyond 3σ.
    pub monotone: bool,
}

impl DivergenceScan {
    /// All ratios within `[lo, hi]`.
    pub fn ratios_within(&self, lo: f64, hi: f64) -> bool {
        !self.ratios.is_empty() && self.ratios.iter().all(|r| (lo..=hi).contains(r))
    }
}

/// Divergence scan of `∬ F^{(ε)}_{2,2} φ^{2,2}_−` for two copies of the unit
/// square in `span(e_1, e_2) ⊂ R^4`.
pub fn divergence_scan(eps: &[f64], table: &PhiTable, config: &McConfig) -> Result<DivergenceScan> {
    if eps.is_empty() {
        return Err(Error::Precondition("empty cut-off grid".into()));
    }
    if eps.windows(2).any(|w| w[1] >= w[0]) || eps.iter().any(|e| !(*e > 0.0 && *e < PI)) {
        return Err(Error::Precondition(
            "cut-off grid must be strictly decreasing inside (0, pi)".into(),
        ));
    }
    check_table(table, 4, 2)?;
    let square = Body::Polytope(polytope::make_square4d()?);
    let s = FlagSampler::new(&square, 2)?;
    let mass = s.mass() * s.mass();
    let m = eps.len();
    let out = mc::mc_integrate_multi(config, 3 * m - 1, |rng, out| {
        let p = draw_pair(&s, &s, table, rng)?;
        let f = f_kl(p.theta, 2, 2) * mass;
        let (neg, pos) = ((-p.phi).max(0.0), p.phi.max(0.0));
        for (i, &e) in eps.iter().enumerate() {
            if p.theta <= PI - e {
                out[i] = f * neg;
                out[m + i] = f * pos;
            }
            if i > 0 && p.theta > PI - eps[i - 1] && p.theta <= PI - e {
                out[2 * m + i - 1] = f * neg;
            }
        }
        Ok(())
    })?;
    let negative = out[..m].to_vec();
    let positive = out[m..2 * m].to_vec();
    let increments = out[2 * m..].to_vec();
    let ratios = increments
        .windows(2)
        .map(|w| w[1].mean / w[0].mean)
        .collect();
    Ok(DivergenceScan {
        eps: eps.to_vec(),
        negative,
        positive,
        strictly_increasing: increments.iter().all(|i| i.mean > 3.0 * i.std_error),
        monotone: increments.iter().all(|i| i.mean >= -3.0 * i.std_error),
        increments,
        ratios,
    })
}

/// `(1/36π) arcsin(1/5)`.
pub fn region_integral_target() -> f64 {
    (0.2f64).asin() / (36.0 * PI)
}

/// `∬_{D} ⟨A,U⟩² ⟨B,V⟩² ν(dU) ν(dV)` over the region where both lines make an
/// angle below `π/4` with `L = span(e_1, e_2)` and the azimuths of their
/// projections to `L` satisfy `|sin(γ_U − γ_V)| ≤ 1/5`; here
/// `A = L^⊥ ∩ u^⊥`, `B = L^⊥ ∩ v^⊥` for random `u, v` in the unit circle of `L^⊥`.
pub fn square4d_region_integral(config: &McConfig) -> Result<McEstimate> {
    let line_in = |rng: &mut mc::McRng| -> Result<(f64, f64)> {
        let t = rng.random::<f64>() * 2.0 * PI;
        let (s, c) = t.sin_cos();
        let u = DVector::from_vec(vec![0.0, 0.0, c, s]);
        let a = DVector::from_vec(vec![0.0, 0.0, -s, c]);
        let w = sampling::orthogonal_hyperplane(&u);
        let line = sampling::sample_grassmann_in(&w, 1, rng);
        let x = line.frame().column(0).into_owned();
        let _ = Flag::new(u, line)?;
        let sin_alpha = x.dot(&a).abs().min(1.0);
        let azimuth = x[1].atan2(x[0]);
        Ok((sin_alpha, azimuth))
    };
    let limit = (PI / 4.0).sin();
    Ok(mc::mc_integrate_multi(config, 1, |rng, out| {
        let (sa, ga) = line_in(rng)?;
        let (sb, gb) = line_in(rng)?;
        if sa < limit && sb < limit && (ga - gb).sin().abs() <= 0.2 {
            out[0] = sa * sa * sb * sb;
        }
        Ok(())
    })?
    .remove(0))
}
