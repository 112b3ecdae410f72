//! Planes in level-set form and the intersection line of two planes.
//!
//! A plane with unit normal `n` and signed distance `s` is the zero set of
//! `λ(x) − s` with `λ(x) = ⟨x − x̄, n⟩`, where `x̄` is the base point of the
//! polyhedron at hand. The negative half-space `λ < s` is the one that gets
//! truncated.

use thiserror::Error;

use crate::geometry::Vec3;

/// Normals with `|⟨n1, n2⟩| ≥ 1 − DEFAULT_GAMMA_TOL` count as (anti)parallel.
pub const DEFAULT_GAMMA_TOL: f64 = 1e-12;

const UNIT_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PlaneError {
    #[error("normal {0:?} is not a unit vector")]
    NotUnit([f64; 3]),
    #[error("normals are (anti)parallel: ⟨n1, n2⟩ = {gamma}")]
    DegenerateNormals { gamma: f64 },
    #[error("intersection line is parallel to the face: |⟨μ, n_F⟩| = {value:e} < {tol:e}")]
    LineParallelToFace { value: f64, tol: f64 },
}

fn check_unit(n: &Vec3) -> Result<(), PlaneError> {
    if (n.norm() - 1.0).abs() > UNIT_TOL {
        return Err(PlaneError::NotUnit([n.x, n.y, n.z]));
    }
    Ok(())
}

/// A plane `⟨x − base, normal⟩ = signed_distance`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlaneConfig {
    normal: Vec3,
    signed_distance: f64,
    base_point: Vec3,
}

impl PlaneConfig {
    pub fn new(normal: Vec3, signed_distance: f64, base_point: Vec3) -> Result<Self, PlaneError> {
        check_unit(&normal)?;
        Ok(Self {
            normal,
            signed_distance,
            base_point,
        })
    }

    pub fn normal(&self) -> &Vec3 {
        &self.normal
    }

    pub fn signed_distance(&self) -> f64 {
        self.signed_distance
    }

    pub fn base_point(&self) -> &Vec3 {
        &self.base_point
    }

    pub fn levelset(&self, x: &Vec3) -> f64 {
        (x - self.base_point).dot(&self.normal)
    }

    /// Signed distance of `x` from the plane; negative inside the truncated half-space.
    pub fn offset(&self, x: &Vec3) -> f64 {
        self.levelset(x) - self.signed_distance
    }

    /// The point of the plane closest to the base point.
    pub fn foot_point(&self) -> Vec3 {
        self.base_point + self.signed_distance * self.normal
    }

    pub fn flipped(&self) -> Self {
        Self {
            normal: -self.normal,
            signed_distance: -self.signed_distance,
            base_point: self.base_point,
        }
    }
}

/// Relative orientation of two planes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DegeneracyClass {
    General,
    Parallel,
    Antiparallel,
}

pub fn degeneracy_class(n1: &Vec3, n2: &Vec3, gamma_tol: f64) -> DegeneracyClass {
    let gamma = n1.dot(n2);
    if gamma >= 1.0 - gamma_tol {
        DegeneracyClass::Parallel
    } else if gamma <= -1.0 + gamma_tol {
        DegeneracyClass::Antiparallel
    } else {
        DegeneracyClass::General
    }
}

/// Parametrization `y0 + t·tau` of the line where `λ1 = s` meets `λ2 = t`.
///
/// `mu` spans the line; `tau` moves along the line such that `λ2` grows at
/// unit rate while `λ1` stays constant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntersectionFrame {
    pub y0: Vec3,
    pub tau: Vec3,
    pub mu: Vec3,
    pub gamma: f64,
}

impl IntersectionFrame {
    pub fn new(
        n1: &Vec3,
        n2: &Vec3,
        s: f64,
        base: &Vec3,
        gamma_tol: f64,
    ) -> Result<Self, PlaneError> {
        check_unit(n1)?;
        check_unit(n2)?;
        let gamma = n1.dot(n2);
        if gamma.abs() >= 1.0 - gamma_tol {
            return Err(PlaneError::DegenerateNormals { gamma });
        }
        let denom = 1.0 - gamma * gamma;
        Ok(Self {
            y0: base + s * (n1 - gamma * n2) / denom,
            tau: (n2 - gamma * n1) / denom,
            mu: n1.cross(n2) / denom,
            gamma,
        })
    }

    /// Point of the line at secondary signed distance `t`.
    pub fn point(&self, t: f64) -> Vec3 {
        self.y0 + t * self.tau
    }
}

/// [`IntersectionFrame::new`] with [`DEFAULT_GAMMA_TOL`].
pub fn intersection_frame(
    n1: &Vec3,
    n2: &Vec3,
    s: f64,
    base: &Vec3,
) -> Result<IntersectionFrame, PlaneError> {
    IntersectionFrame::new(n1, n2, s, base, DEFAULT_GAMMA_TOL)
}

/// Threshold on `|⟨μ, n_F⟩|` below which [`face_origin`] refuses to work,
/// for a face of characteristic length `h`.
pub fn default_mu_tol(t: f64, h: f64) -> f64 {
    1e-12 * (1.0 + t.abs() / h)
}

/// The point where the intersection line at `t` pierces the plane of a face.
///
/// `face_vertex` is any vertex of the face.
pub fn face_origin(
    frame: &IntersectionFrame,
    t: f64,
    face_vertex: &Vec3,
    face_normal: &Vec3,
    mu_tol: f64,
) -> Result<Vec3, PlaneError> {
    let mu_n = frame.mu.dot(face_normal);
    if mu_n.abs() < mu_tol {
        return Err(PlaneError::LineParallelToFace {
            value: mu_n.abs(),
            tol: mu_tol,
        });
    }
    let y0k = frame.y0 - ((frame.y0 - face_vertex).dot(face_normal) / mu_n) * frame.mu;
    let tauk = frame.tau - (frame.tau.dot(face_normal) / mu_n) * frame.mu;
    Ok(y0k + t * tauk)
}
