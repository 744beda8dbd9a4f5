//! Normalizing constants and the angular weight `F_{k,l}`.

use std::f64::consts::PI;

use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::multilinear::binomial;

/// `H^m(S^m) = 2 π^{(m+1)/2} / Γ((m+1)/2)`.
pub fn sphere_area(m: usize) -> f64 {
    let h = (m as f64 + 1.0) / 2.0;
    2.0 * PI.powf(h) / gamma(h)
}

/// Volume `κ_j` of the `j`-dimensional unit ball.
pub fn ball_volume(j: usize) -> f64 {
    let h = j as f64 / 2.0;
    PI.powf(h) / gamma(h + 1.0)
}

/// Intrinsic volume `V_k(B^d) = C(d,k) κ_d / κ_{d−k}`.
pub fn ball_intrinsic_volume(d: usize, k: usize) -> f64 {
    binomial(d, k) as f64 * ball_volume(d) / ball_volume(d - k)
}

/// Total Hausdorff measure `β(d,k)` of the Grassmannian `G(d,k)`.
pub fn beta_const(d: usize, k: usize) -> f64 {
    assert!(k <= d);
    let mut acc = PI.sqrt().powi((k * (d - k)) as i32);
    for j in 1..=k {
        acc *= gamma(j as f64 / 2.0) / gamma((d - j + 1) as f64 / 2.0);
    }
    acc
}

/// `(γ̃(d,k), γ(d,k))`, the flag-measure normalizations, with the identity
/// `γ = γ̃ · β(d−1,k*) / β(d,k*)` checked to 1e-10 relative.
pub fn gamma_consts(d: usize, k: usize) -> Result<(f64, f64)> {
    if d == 0 || k > d - 1 {
        return Err(Error::IndexOutOfRange {
            index: k,
            max: d.saturating_sub(1),
        });
    }
    let kstar = d - 1 - k;
    let binom = binomial(d - 1, k) as f64;
    let tilde = 0.5 * binom * gamma((d - k) as f64 / 2.0) * gamma((k + 1) as f64 / 2.0)
        / (PI.sqrt() * gamma(d as f64 / 2.0));
    let direct = binom / sphere_area(kstar);
    let via_beta = tilde * beta_const(d - 1, kstar) / beta_const(d, kstar);
    if ((direct - via_beta) / direct).abs() > 1e-10 {
        return Err(Error::Consistency(format!(
            "gamma({d},{k}): {direct} vs {via_beta} through the Grassmannian measures"
        )));
    }
    Ok((tilde, direct))
}

/// `γ(d,k)`; panics outside `0 ≤ k ≤ d−1`.
pub fn gamma_dk(d: usize, k: usize) -> f64 {
    gamma_consts(d, k).expect("0 <= k <= d-1").1
}

// Gauss–Kronrod 7/15 nodes and weights on [-1, 1].
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for i in 0..7 {
        let x = h * XGK[i];
        let s = f(c - x) + f(c + x);
        kronrod += WGK[i] * s;
        if i % 2 == 1 {
            gauss += WG[i / 2] * s;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

/// Adaptive Gauss–Kronrod quadrature of `f` on `[a, b]`.
///
/// Subdivides until the Kronrod/Gauss difference on every piece is below
/// `max(abs_tol, rel_tol·|integral|)` scaled by the piece length.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> f64 {
    fn rec<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        b: f64,
        whole: (f64, f64),
        tol: f64,
        depth: u32,
    ) -> f64 {
        let (value, err) = whole;
        if err <= tol || depth >= 40 {
            return value;
        }
        let m = 0.5 * (a + b);
        let left = gk15(f, a, m);
        let right = gk15(f, m, b);
        rec(f, a, m, left, 0.5 * tol, depth + 1) + rec(f, m, b, right, 0.5 * tol, depth + 1)
    }
    let whole = gk15(&f, a, b);
    let tol = abs_tol.max(rel_tol * whole.0.abs());
    rec(&f, a, b, whole, tol, 0)
}

/// Below this angle `F_{k,l}` is evaluated through its `θ → 0` limit.
const SMALL_ANGLE: f64 = 1e-7;

/// Angular weight `F_{k,l}(θ)` of the translative representation, `d = k + l`.
///
/// `F_{k,l}(π)` is fixed to zero; the wedge factor it multiplies vanishes there.
pub fn f_kl(theta: f64, k: usize, l: usize) -> f64 {
    assert!(k >= 1 && l >= 1, "F_kl needs k, l >= 1");
    assert!((0.0..=PI).contains(&theta), "angle {theta} outside [0, pi]");
    let d = k + l;
    let kstar = (d - 1 - k) as i32;
    let lstar = (d - 1 - l) as i32;
    let norm = 1.0 / sphere_area(d - 1);
    if theta >= PI {
        return 0.0;
    }
    if theta < SMALL_ANGLE {
        // sin(tθ)/sinθ → t and sin((1−t)θ)/sinθ → 1−t
        let beta = integrate(
            |t| t.powi(kstar) * (1.0 - t).powi(lstar),
            0.0,
            1.0,
            1e-14,
            1e-12,
        );
        return norm * beta;
    }
    let s = theta.sin();
    let inner = integrate(
        |t| (t * theta).sin().powi(kstar) * ((1.0 - t) * theta).sin().powi(lstar),
        0.0,
        1.0,
        1e-12 * s.powi(kstar + lstar),
        1e-10,
    );
    norm * (theta / s) * inner / s.powi(kstar + lstar)
}

/// Cut-off weight `F^{(ε)}_{k,l}(θ) = F_{k,l}(θ) · 1{θ ≤ π − ε}`.
pub fn f_kl_eps(theta: f64, eps: f64, k: usize, l: usize) -> f64 {
    if theta <= PI - eps {
        f_kl(theta, k, l)
    } else {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn sphere_areas() {
        assert_relative_eq!(sphere_area(0), 2.0, max_relative = 1e-13);
        assert_relative_eq!(sphere_area(1), 2.0 * PI, max_relative = 1e-13);
        assert_relative_eq!(sphere_area(2), 4.0 * PI, max_relative = 1e-13);
        assert_relative_eq!(sphere_area(3), 2.0 * PI * PI, max_relative = 1e-13);
    }

    #[test]
    fn grassmannian_measures() {
        assert_eq!(beta_const(5, 0), 1.0);
        // G(d,1) is projective space: half the sphere
        assert_relative_eq!(beta_const(3, 1), 2.0 * PI, epsilon = 1e-13);
        assert_relative_eq!(beta_const(4, 1), PI * PI, epsilon = 1e-13);
        // duality G(d,k) ≅ G(d,d−k)
        assert_relative_eq!(beta_const(5, 2), beta_const(5, 3), epsilon = 1e-12);
    }

    #[test]
    fn flag_normalizations() {
        let (tilde, g) = gamma_consts(4, 2).unwrap();
        assert_relative_eq!(g, 3.0 / (2.0 * PI), epsilon = 1e-14);
        assert_relative_eq!(tilde, 0.75, epsilon = 1e-14);
        assert_relative_eq!(gamma_dk(3, 0), 1.0 / (4.0 * PI), epsilon = 1e-14);
        for d in 1..7 {
            for k in 0..d {
                gamma_consts(d, k).unwrap();
            }
        }
        assert!(gamma_consts(3, 3).is_err());
    }

    #[test]
    fn quadrature_handles_known_integrals() {
        assert_relative_eq!(integrate(|x| x.sin(), 0.0, PI, 1e-14, 1e-12), 2.0, epsilon = 1e-12);
        assert_relative_eq!(
            integrate(|x| (-x * x).exp(), -6.0, 6.0, 1e-14, 1e-12),
            PI.sqrt(),
            epsilon = 1e-12
        );
        assert_relative_eq!(integrate(|x| x.sqrt(), 0.0, 1.0, 1e-13, 1e-12), 2.0 / 3.0, epsilon = 1e-9);
    }

    #[test]
    fn f_kl_in_the_plane_is_flat_at_zero() {
        // d = 2: both exponents vanish and F(0) = 1/H^1(S^1)
        assert_relative_eq!(f_kl(0.0, 1, 1), 1.0 / (2.0 * PI), epsilon = 1e-14);
        assert_relative_eq!(f_kl(1.0, 1, 1), 1.0 / (2.0 * PI) / 1.0f64.sin(), epsilon = 1e-12);
    }

    #[test]
    fn f_kl_is_continuous_at_zero() {
        for (k, l) in [(2, 2), (1, 2), (2, 1), (1, 3)] {
            assert_relative_eq!(f_kl(0.0, k, l), f_kl(1e-5, k, l), max_relative = 1e-8);
        }
        assert_relative_eq!(f_kl(0.0, 2, 2), 1.0 / (12.0 * PI * PI), epsilon = 1e-14);
    }

    #[test]
    fn cutoff_and_endpoint() {
        assert_eq!(f_kl(PI, 2, 2), 0.0);
        assert_eq!(f_kl_eps(3.0, 0.5, 2, 2), 0.0);
        assert_eq!(f_kl_eps(1.0, 0.5, 2, 2), f_kl(1.0, 2, 2));
    }
}
