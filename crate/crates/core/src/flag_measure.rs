//! Integration against the flag measures `Ω_k(K; ·)` on `F^⊥(d, k*)`.
//!
//! For a polytope the measure is carried by the faces of dimension `k`:
//!
//! `∫ g dΩ_k = γ(d,k) Σ_F H^k(F) ∫_{ν(K,F)} ∫_{G^{u^⊥}(d−1,k*)} g(u,V) ⟨V, A_F(u)⟩² ν(dV) H^{k*}(du)`
//!
//! with `A_F(u) = L(F)^⊥ ∩ u^⊥`. For a ball of radius `r` all curvature
//! products coincide and `∫ g dΩ_k = γ(d,k) r^k ∫_{S^{d−1}} ∫ g(u,V) ν(dV) du`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use serde::Serialize;

use crate::constants::{gamma_dk, sphere_area};
use crate::error::{Error, Result};
use crate::flag::Flag;
use crate::mc::{self, McConfig, McEstimate};
use crate::multilinear::{binomial, blade_inner, Subspace};
use crate::polytope::{self, Polytope};
use crate::sampling;

/// A body with computable flag measures.
#[derive(Clone, Debug)]
pub enum Body {
    Polytope(Polytope),
    Ball {
        center: DVector<f64>,
        radius: f64,
    },
}

impl From<Polytope> for Body {
    fn from(p: Polytope) -> Self {
        Body::Polytope(p)
    }
}

impl Body {
    /// The unit ball of `R^d` centred at the origin.
    pub fn unit_ball(d: usize) -> Body {
        Body::Ball {
            center: DVector::zeros(d),
            radius: 1.0,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Body::Polytope(p) => p.dim(),
            Body::Ball { center, .. } => center.len(),
        }
    }

    pub fn as_polytope(&self) -> Option<&Polytope> {
        match self {
            Body::Polytope(p) => Some(p),
            Body::Ball { .. } => None,
        }
    }

    pub fn is_ball(&self) -> bool {
        matches!(self, Body::Ball { .. })
    }

    /// `V_k` of the body.
    pub fn intrinsic_volume(&self, k: usize) -> f64 {
        match self {
            Body::Polytope(p) => p.intrinsic_volume(k),
            Body::Ball { center, radius } => {
                crate::constants::ball_intrinsic_volume(center.len(), k) * radius.powi(k as i32)
            }
        }
    }

    pub fn rotate(&self, rho: &DMatrix<f64>) -> Result<Body> {
        match self {
            Body::Polytope(p) => p.rotate(rho).map(Body::Polytope),
            Body::Ball { center, radius } => Ok(Body::Ball {
                center: rho * center,
                radius: *radius,
            }),
        }
    }

    pub fn translate(&self, t: &DVector<f64>) -> Body {
        match self {
            Body::Polytope(p) => Body::Polytope(p.translate(t)),
            Body::Ball { center, radius } => Body::Ball {
                center: center + t,
                radius: *radius,
            },
        }
    }

    pub fn scale(&self, s: f64) -> Result<Body> {
        match self {
            Body::Polytope(p) => p.scale(s).map(Body::Polytope),
            Body::Ball { center, radius } => {
                if !(s > 0.0 && s.is_finite()) {
                    return Err(Error::Precondition(format!("scale factor {s} must be positive")));
                }
                Ok(Body::Ball {
                    center: center * s,
                    radius: radius * s,
                })
            }
        }
    }
}

/// One draw from a flag sampler.
#[derive(Clone, Debug)]
pub struct FlagDraw {
    pub flag: Flag,
    /// Index of the face (polytopes only).
    pub face: Option<usize>,
    /// `A_F(u)`; `None` for the ball.
    pub normal_space: Option<Subspace>,
}

/// Sampler for the normalized flag measure `Ω_k(K; ·) / V_k(K)`.
///
/// Faces are picked with probability proportional to `H^k(F) H^{k*}(ν(K,F))`
/// and `u` uniformly on the normal patch.
#[derive(Clone, Debug)]
pub struct FlagSampler<'a> {
    body: &'a Body,
    d: usize,
    k: usize,
    faces: Vec<usize>,
    face_weights: Vec<f64>,
    picker: Option<WeightedIndex<f64>>,
    total_weight: f64,
    gamma: f64,
}

impl<'a> FlagSampler<'a> {
    pub fn new(body: &'a Body, k: usize) -> Result<Self> {
        let d = body.dim();
        if d < 2 || k >= d {
            return Err(Error::IndexOutOfRange {
                index: k,
                max: d.saturating_sub(1),
            });
        }
        let gamma = gamma_dk(d, k);
        let (faces, face_weights) = match body {
            Body::Polytope(p) => p
                .faces_of_dim(k)
                .map(|(i, f)| (i, f.volume * f.patch_measure()))
                .filter(|(_, w)| *w > 0.0)
                .unzip(),
            Body::Ball { .. } => (Vec::new(), Vec::new()),
        };
        let total_weight: f64 = face_weights.iter().sum();
        let picker = if face_weights.is_empty() {
            None
        } else {
            Some(WeightedIndex::new(&face_weights).map_err(|e| Error::Consistency(e.to_string()))?)
        };
        Ok(Self {
            body,
            d,
            k,
            faces,
            face_weights,
            picker,
            total_weight,
            gamma,
        })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn kstar(&self) -> usize {
        self.d - 1 - self.k
    }

    /// `true` when the measure vanishes (no faces of dimension `k`).
    pub fn is_empty(&self) -> bool {
        match self.body {
            Body::Polytope(_) => self.picker.is_none(),
            Body::Ball { radius, .. } => *radius == 0.0,
        }
    }

    /// `Σ_F H^k(F) H^{k*}(ν(K,F))`, or `r^k H^{d−1}(S^{d−1})` for the ball.
    pub fn patch_weight(&self) -> f64 {
        match self.body {
            Body::Polytope(_) => self.total_weight,
            Body::Ball { radius, .. } => radius.powi(self.k as i32) * sphere_area(self.d - 1),
        }
    }

    /// Per-face weights `H^k(F) H^{k*}(ν(K,F))` with face indices.
    pub fn face_weights(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.faces.iter().copied().zip(self.face_weights.iter().copied())
    }

    /// Total mass `Ω_k(K; F^⊥(d,k*)) = V_k(K)`.
    pub fn mass(&self) -> f64 {
        match self.body {
            Body::Polytope(_) => {
                self.gamma * self.total_weight / binomial(self.d - 1, self.kstar()) as f64
            }
            Body::Ball { .. } => self.gamma * self.patch_weight(),
        }
    }

    /// `γ(d,k)`.
    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// A direction `u` with law proportional to the `k`-th area measure,
    /// together with its face and `A_F(u)`.
    pub fn sample_direction<R: Rng + ?Sized>(
        &self,
        rng: &mut R,
    ) -> Result<(DVector<f64>, Option<usize>, Option<Subspace>)> {
        match self.body {
            Body::Polytope(p) => {
                let picker = self
                    .picker
                    .as_ref()
                    .ok_or_else(|| Error::Precondition(format!("no {}-faces to sample", self.k)))?;
                let face = self.faces[picker.sample(rng)];
                let cone = &p.faces()[face].cone;
                let u = cone.sample(rng)?;
                let a = polytope::normal_frame(cone, &u);
                Ok((u, Some(face), Some(a)))
            }
            Body::Ball { .. } => Ok((sampling::sample_sphere(self.d, rng), None, None)),
        }
    }

    /// A flag from the normalized measure: `V` is drawn from
    /// `⟨V, A_F(u)⟩² ν(dV)` by rejection.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<FlagDraw> {
        let (u, face, a) = self.sample_direction(rng)?;
        let w = sampling::orthogonal_hyperplane(&u);
        let space = match &a {
            Some(a) => sampling::sample_grassmann_weighted(&w, a, rng),
            None => sampling::sample_grassmann_in(&w, self.kstar(), rng),
        };
        Ok(FlagDraw {
            flag: Flag::new(u, space)?,
            face,
            normal_space: a,
        })
    }

    /// A flag with `V` uniform on `G^{u^⊥}` and the weight making
    /// `E[g · weight] = ∫ g dΩ_k`.
    pub fn sample_weighted<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<(FlagDraw, f64)> {
        let (u, face, a) = self.sample_direction(rng)?;
        let w = sampling::orthogonal_hyperplane(&u);
        let space = sampling::sample_grassmann_in(&w, self.kstar(), rng);
        let weight = match &a {
            Some(a) => {
                let c = blade_inner(&space, a)?;
                self.gamma * self.total_weight * c * c
            }
            None => self.gamma * self.patch_weight(),
        };
        Ok((
            FlagDraw {
                flag: Flag::new(u, space)?,
                face,
                normal_space: a,
            },
            weight,
        ))
    }
}

/// How `V` is drawn in [`omega_integrate_with`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum OmegaMode {
    /// Uniform `V` with weight `⟨V, A_F(u)⟩²`.
    Weighted,
    /// `V` from the normalized law, constant weight `V_k(K)`.
    Rejection,
}

/// Estimate of `∫ g dΩ_k` with an optional diagnostic.
#[derive(Clone, Debug, Serialize)]
pub struct OmegaEstimate {
    pub estimate: McEstimate,
    pub note: Option<String>,
}

/// `∫ g dΩ_k(K; ·)`, sampled in the weighted form.
pub fn omega_integrate<G>(body: &Body, k: usize, g: G, config: &McConfig) -> Result<OmegaEstimate>
where
    G: Fn(&Flag) -> f64 + Sync,
{
    omega_integrate_with(body, k, g, config, OmegaMode::Weighted)
}

pub fn omega_integrate_with<G>(
    body: &Body,
    k: usize,
    g: G,
    config: &McConfig,
    mode: OmegaMode,
) -> Result<OmegaEstimate>
where
    G: Fn(&Flag) -> f64 + Sync,
{
    let sampler = FlagSampler::new(body, k)?;
    if sampler.is_empty() {
        return Ok(OmegaEstimate {
            estimate: McEstimate::exact(0.0),
            note: Some(format!("body has no {k}-faces; the flag measure vanishes")),
        });
    }
    let mass = sampler.mass();
    let estimate = mc::mc_integrate_multi(config, 1, |rng, out| {
        out[0] = match mode {
            OmegaMode::Weighted => {
                let (draw, w) = sampler.sample_weighted(rng)?;
                g(&draw.flag) * w
            }
            OmegaMode::Rejection => g(&sampler.sample(rng)?.flag) * mass,
        };
        Ok(())
    })?
    .remove(0);
    Ok(OmegaEstimate { estimate, note: None })
}

/// The unit square's `Ω_2` in `R^4` through its two-level form
/// `(3/2π) ∫_{S^1_{L^⊥}} ∫_{G^{u^⊥}(3,1)} g(u,V) ⟨V, L^⊥ ∩ u^⊥⟩² ν(dV) du`,
/// with `L = span(e_1, e_2)`.
pub fn omega_square4d<G>(g: G, config: &McConfig) -> Result<McEstimate>
where
    G: Fn(&Flag) -> f64 + Sync,
{
    let prefactor = 3.0 / (2.0 * PI) * (2.0 * PI);
    let est = mc::mc_integrate_multi(config, 1, |rng, out| {
        let t = rng.random::<f64>() * 2.0 * PI;
        let (s, c) = t.sin_cos();
        let u = DVector::from_vec(vec![0.0, 0.0, c, s]);
        let a = Subspace::from_orthonormal(DMatrix::from_column_slice(4, 1, &[0.0, 0.0, -s, c]))?;
        let w = sampling::orthogonal_hyperplane(&u);
        let v = sampling::sample_grassmann_in(&w, 1, rng);
        let c = blade_inner(&v, &a)?;
        out[0] = prefactor * g(&Flag::new(u, v)?) * c * c;
        Ok(())
    })?;
    Ok(est[0])
}

/// Two estimates of the `u`-marginal of `Ω_k` against a test function `h`.
#[derive(Clone, Debug, Serialize)]
pub struct MarginalReport {
    /// `∫ h(u) dΩ_k(K; d(u,V))`.
    pub omega: McEstimate,
    /// `Σ_F H^k(F) ∫_{ν(K,F)} h dH^{k*} / H^{k*}(S^{k*})`.
    pub direct: McEstimate,
    pub z: f64,
    pub pass: bool,
}

/// Compares the flag-measure marginal with the polytope area-measure sum
/// (independent streams, 3σ).
pub fn area_measure_marginal_check<H>(
    body: &Polytope,
    k: usize,
    h: H,
    config: &McConfig,
) -> Result<MarginalReport>
where
    H: Fn(&DVector<f64>) -> f64 + Sync,
{
    let wrapped = Body::Polytope(body.clone());
    let omega = omega_integrate(&wrapped, k, |f| h(f.u()), config)?.estimate;
    let sampler = FlagSampler::new(&wrapped, k)?;
    let direct = if sampler.is_empty() {
        McEstimate::exact(0.0)
    } else {
        let scale = sampler.patch_weight() / sphere_area(sampler.kstar());
        let other = config.clone().with_seed(config.seed ^ 0x5eed_0f_a4ea);
        mc::mc_integrate_multi(&other, 1, |rng, out| {
            let (u, _, _) = sampler.sample_direction(rng)?;
            out[0] = scale * h(&u);
            Ok(())
        })?
        .remove(0)
    };
    let sigma = mc::combined_sigma(&omega, &direct);
    let diff = (omega.mean - direct.mean).abs();
    let z = if diff == 0.0 { 0.0 } else { diff / sigma };
    Ok(MarginalReport {
        omega,
        direct,
        z,
        pass: z <= 3.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::ball_intrinsic_volume;
    use crate::polytope::{make_cube, make_square4d};
    use approx::assert_relative_eq;

    fn cfg(n: u64, seed: u64) -> McConfig {
        McConfig::new(n, seed)
    }

    #[test]
    fn masses_are_intrinsic_volumes() {
        let cube = Body::Polytope(make_cube(3).unwrap());
        for k in 0..3 {
            let s = FlagSampler::new(&cube, k).unwrap();
            assert_relative_eq!(s.mass(), [1.0, 3.0, 3.0][k], epsilon = 1e-12);
        }
        for d in 2..6 {
            let ball = Body::unit_ball(d);
            for k in 0..d {
                let s = FlagSampler::new(&ball, k).unwrap();
                assert_relative_eq!(s.mass(), ball_intrinsic_volume(d, k), max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn cube_total_mass_by_sampling() {
        let cube = Body::Polytope(make_cube(3).unwrap());
        let est = omega_integrate(&cube, 1, |_| 1.0, &cfg(40_000, 1)).unwrap().estimate;
        assert!(est.within_sigma(3.0, 4.0), "{est:?}");
    }

    #[test]
    fn square_two_level_form() {
        let one = omega_square4d(|_| 1.0, &cfg(40_000, 2)).unwrap();
        assert!(one.within_sigma(1.0, 4.0), "{one:?}");
        let odd = omega_square4d(|f| f.u()[2], &cfg(40_000, 3)).unwrap();
        assert!(odd.within_sigma(0.0, 4.0), "{odd:?}");
    }

    #[test]
    fn square_has_no_three_faces() {
        let sq = Body::Polytope(make_square4d().unwrap());
        let out = omega_integrate(&sq, 3, |_| 1.0, &cfg(10, 1)).unwrap();
        assert_eq!(out.estimate.mean, 0.0);
        assert!(out.note.is_some());
    }

    #[test]
    fn rejection_mode_matches_weighted_mode() {
        let sq = Body::Polytope(make_square4d().unwrap());
        let g = |f: &Flag| f.space().frame()[(0, 0)].powi(2);
        let a = omega_integrate_with(&sq, 2, g, &cfg(40_000, 4), OmegaMode::Weighted).unwrap();
        let b = omega_integrate_with(&sq, 2, g, &cfg(40_000, 5), OmegaMode::Rejection).unwrap();
        let sigma = mc::combined_sigma(&a.estimate, &b.estimate);
        assert!((a.estimate.mean - b.estimate.mean).abs() < 4.0 * sigma);
    }

    #[test]
    fn marginal_of_cube_edges() {
        let cube = make_cube(3).unwrap();
        let r = area_measure_marginal_check(&cube, 1, |u| u[0] * u[0], &cfg(40_000, 6)).unwrap();
        assert!(r.z < 4.0, "{r:?}");
        let facets = area_measure_marginal_check(&cube, 2, |u| u[0] * u[0], &cfg(20_000, 7)).unwrap();
        assert!(facets.direct.within_sigma(1.0, 4.0), "{facets:?}");
    }
}
