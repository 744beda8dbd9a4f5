//! Flags `(u, U)`: a unit vector together with a subspace of `u^⊥`.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg;
use crate::multilinear::Subspace;
use crate::sampling;

/// Tolerance on `‖u‖ = 1`.
pub const UNIT_TOL: f64 = 1e-12;
/// Tolerance on `|⟨u, U⟩|` per frame vector.
pub const ORTHO_TOL: f64 = 1e-10;

/// A point of the flag manifold `F^⊥(d, j)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Flag {
    u: DVector<f64>,
    space: Subspace,
}

impl Flag {
    pub fn new(u: DVector<f64>, space: Subspace) -> Result<Self> {
        if u.len() != space.dim() {
            return Err(Error::Dimension(format!(
                "direction in R^{} with subspace of R^{}",
                u.len(),
                space.dim()
            )));
        }
        let norm = u.norm();
        if (norm - 1.0).abs() > UNIT_TOL * 10.0 {
            return Err(Error::InvalidFlag(format!("|u| = {norm}")));
        }
        if space.grade() >= u.len() {
            return Err(Error::InvalidFlag(format!(
                "subspace of dimension {} cannot lie in u^perp of R^{}",
                space.grade(),
                u.len()
            )));
        }
        let overlap = (space.frame().transpose() * &u).amax();
        if overlap > ORTHO_TOL {
            return Err(Error::InvalidFlag(format!(
                "subspace not orthogonal to u (|<u, U>| = {overlap:e})"
            )));
        }
        Ok(Self { u, space })
    }

    pub fn u(&self) -> &DVector<f64> {
        &self.u
    }

    pub fn space(&self) -> &Subspace {
        &self.space
    }

    pub fn dim(&self) -> usize {
        self.u.len()
    }

    pub fn grade(&self) -> usize {
        self.space.grade()
    }

    /// Orthonormal basis `u_1, …, u_d` of `R^d` with `u_1..u_j` the frame of
    /// `U`, `u_d = u`, and the rest a deterministic completion.
    pub fn adapted_basis(&self) -> DMatrix<f64> {
        let d = self.dim();
        let j = self.grade();
        let mut head = DMatrix::zeros(d, j + 1);
        head.columns_mut(0, j).copy_from(self.space.frame());
        head.set_column(j, &self.u);
        let full = linalg::complete_basis(&head);
        let mut out = DMatrix::zeros(d, d);
        out.columns_mut(0, j).copy_from(&full.columns(0, j));
        out.columns_mut(j, d - 1 - j)
            .copy_from(&full.columns(j + 1, d - 1 - j));
        out.set_column(d - 1, &self.u);
        out
    }

    /// The image under an orthogonal map.
    pub fn transformed(&self, rho: &DMatrix<f64>) -> Flag {
        Flag {
            u: rho * &self.u,
            space: self.space.transformed(rho),
        }
    }
}

/// A uniformly random flag of `F^⊥(d, j)`.
pub fn random_flag<R: Rng + ?Sized>(d: usize, j: usize, rng: &mut R) -> Flag {
    let u = sampling::sample_sphere(d, rng);
    let w = sampling::orthogonal_hyperplane(&u);
    let space = sampling::sample_grassmann_in(&w, j, rng);
    Flag { u, space }
}
