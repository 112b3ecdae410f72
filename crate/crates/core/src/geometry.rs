//! Immutable polyhedron representation and logical status classification.
//!
//! A [`Polyhedron`] stores its vertices, counter-clockwise face loops (seen
//! from outside), unit outward face normals, per-edge outer co-normals and a
//! base point used as the common origin of every level-set function
//! `λ(x) = ⟨x − base, n⟩`.

use nalgebra::Vector3;
use thiserror::Error;

pub type Vec3 = Vector3<f64>;

/// Half-width of the tubular neighbourhood in which a vertex counts as lying
/// on a plane.
pub const DEFAULT_ZERO_TOL: f64 = 1e-14;

/// Allowed face planarity deviation, relative to the face's longest edge.
pub const DEFAULT_PLANARITY_TOL: f64 = 1e-9;

const CLOSURE_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("a polyhedron needs at least 4 vertices and 4 faces (got {vertices} and {faces})")]
    TooFewElements { vertices: usize, faces: usize },
    #[error("face {face} references vertex {index}, but only {count} vertices exist")]
    IndexOutOfRange {
        face: usize,
        index: usize,
        count: usize,
    },
    #[error("face {face} is degenerate (fewer than 3 vertices or zero area)")]
    DegenerateFace { face: usize },
    #[error("face {face} is not planar: deviation {deviation:e} exceeds {limit:e}")]
    NonPlanarFace {
        face: usize,
        deviation: f64,
        limit: f64,
    },
    #[error("surface is not closed: |Σ area·normal| = {residual:e} (limit {limit:e})")]
    OpenSurface { residual: f64, limit: f64 },
    #[error("enclosed volume {volume:e} is not positive; are the face loops oriented outwards?")]
    NonPositiveVolume { volume: f64 },
}

/// Logical status of a vertex with respect to an oriented plane.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(i8)]
pub enum VertexStatus {
    Interior = -1,
    OnPlane = 0,
    Exterior = 1,
}

impl VertexStatus {
    /// Classifies a level-set value; `|λ| < zero_tol` counts as on the plane.
    pub fn classify(levelset: f64, zero_tol: f64) -> Self {
        if levelset.abs() < zero_tol {
            VertexStatus::OnPlane
        } else if levelset > 0.0 {
            VertexStatus::Exterior
        } else {
            VertexStatus::Interior
        }
    }

    pub fn value(self) -> i8 {
        self as i8
    }
}

/// Convenience wrapper around [`VertexStatus::classify`].
pub fn vertex_status(levelset: f64, zero_tol: f64) -> VertexStatus {
    VertexStatus::classify(levelset, zero_tol)
}

/// Logical status of an edge, determined by the status of its two vertices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(i8)]
pub enum EdgeStatus {
    Exterior = 1,
    Interior = -1,
    Intersected = 0,
    DegenerateExterior = 2,
    DegenerateInterior = -2,
    /// Both vertices on the plane.
    DegenerateIntersected = 3,
}

impl EdgeStatus {
    pub fn from_vertices(u: VertexStatus, v: VertexStatus) -> Self {
        use VertexStatus::*;
        match (u, v) {
            (Exterior, Exterior) => EdgeStatus::Exterior,
            (Interior, Interior) => EdgeStatus::Interior,
            (Exterior, Interior) | (Interior, Exterior) => EdgeStatus::Intersected,
            (Exterior, OnPlane) | (OnPlane, Exterior) => EdgeStatus::DegenerateExterior,
            (Interior, OnPlane) | (OnPlane, Interior) => EdgeStatus::DegenerateInterior,
            (OnPlane, OnPlane) => EdgeStatus::DegenerateIntersected,
        }
    }

    pub fn value(self) -> i8 {
        self as i8
    }
}

pub fn edge_status(u: VertexStatus, v: VertexStatus) -> EdgeStatus {
    EdgeStatus::from_vertices(u, v)
}

/// A planar polygonal face of a [`Polyhedron`].
#[derive(Debug, Clone)]
pub struct Face {
    indices: Vec<usize>,
    normal: Vec3,
    co_normals: Vec<Vec3>,
    area: f64,
    convex: bool,
    char_length: f64,
}

impl Face {
    /// Vertex indices, counter-clockwise with respect to the outward normal.
    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn normal(&self) -> &Vec3 {
        &self.normal
    }

    /// Outer co-normal of the edge from vertex `m` to vertex `m + 1`.
    pub fn co_normal(&self, m: usize) -> &Vec3 {
        &self.co_normals[m % self.co_normals.len()]
    }

    pub fn co_normals(&self) -> &[Vec3] {
        &self.co_normals
    }

    pub fn area(&self) -> f64 {
        self.area
    }

    pub fn is_convex(&self) -> bool {
        self.convex
    }

    /// Longest edge length.
    pub fn characteristic_length(&self) -> f64 {
        self.char_length
    }
}

/// Closed polyhedral surface with planar faces. Immutable after construction.
#[derive(Debug, Clone)]
pub struct Polyhedron {
    vertices: Vec<Vec3>,
    faces: Vec<Face>,
    base_point: Vec3,
    volume: f64,
    char_length: f64,
}

impl Polyhedron {
    /// Builds a polyhedron from vertices and counter-clockwise face loops.
    ///
    /// `planarity_tol` is relative to each face's longest edge. The base point
    /// is the arithmetic mean of all vertices.
    pub fn new(
        vertices: Vec<Vec3>,
        face_loops: Vec<Vec<usize>>,
        planarity_tol: f64,
    ) -> Result<Self, GeometryError> {
        if vertices.len() < 4 || face_loops.len() < 4 {
            return Err(GeometryError::TooFewElements {
                vertices: vertices.len(),
                faces: face_loops.len(),
            });
        }
        let mut faces = Vec::with_capacity(face_loops.len());
        for (k, indices) in face_loops.into_iter().enumerate() {
            if indices.len() < 3 {
                return Err(GeometryError::DegenerateFace { face: k });
            }
            if let Some(&bad) = indices.iter().find(|&&i| i >= vertices.len()) {
                return Err(GeometryError::IndexOutOfRange {
                    face: k,
                    index: bad,
                    count: vertices.len(),
                });
            }
            faces.push(build_face(k, &vertices, indices, planarity_tol)?);
        }

        let total_area: f64 = faces.iter().map(|f| f.area).sum();
        let closure: Vec3 = faces.iter().map(|f| f.normal * f.area).sum();
        let limit = CLOSURE_TOL * total_area;
        if closure.norm() > limit {
            return Err(GeometryError::OpenSurface {
                residual: closure.norm(),
                limit,
            });
        }

        let base_point = vertices.iter().sum::<Vec3>() / vertices.len() as f64;
        let volume = faces
            .iter()
            .map(|f| (vertices[f.indices[0]] - base_point).dot(&f.normal) * f.area)
            .sum::<f64>()
            / 3.0;
        if volume <= 0.0 || !volume.is_finite() {
            return Err(GeometryError::NonPositiveVolume { volume });
        }
        let char_length = faces.iter().map(|f| f.char_length).fold(0.0, f64::max);

        Ok(Self {
            vertices,
            faces,
            base_point,
            volume,
            char_length,
        })
    }

    pub fn vertices(&self) -> &[Vec3] {
        &self.vertices
    }

    pub fn faces(&self) -> &[Face] {
        &self.faces
    }

    pub fn face(&self, k: usize) -> &Face {
        &self.faces[k]
    }

    /// Vertex `m` of face `k`; `m` is taken periodically.
    pub fn face_vertex(&self, k: usize, m: usize) -> &Vec3 {
        let face = &self.faces[k];
        &self.vertices[face.indices[m % face.indices.len()]]
    }

    pub fn base_point(&self) -> &Vec3 {
        &self.base_point
    }

    pub fn volume(&self) -> f64 {
        self.volume
    }

    /// Longest edge over all faces.
    pub fn characteristic_length(&self) -> f64 {
        self.char_length
    }

    /// Level-set value `⟨x − base, n⟩`.
    pub fn levelset(&self, x: &Vec3, normal: &Vec3) -> f64 {
        (x - self.base_point).dot(normal)
    }

    /// Signed distances of all vertices along `normal`.
    pub fn projections(&self, normal: &Vec3) -> Vec<f64> {
        self.vertices
            .iter()
            .map(|x| self.levelset(x, normal))
            .collect()
    }
}

/// Area of face `k`.
pub fn face_area(poly: &Polyhedron, k: usize) -> f64 {
    poly.faces[k].area
}

fn build_face(
    k: usize,
    vertices: &[Vec3],
    indices: Vec<usize>,
    planarity_tol: f64,
) -> Result<Face, GeometryError> {
    let n = indices.len();
    let p = |m: usize| &vertices[indices[m % n]];
    let origin = p(0);

    // Newell's construction, relative to the first vertex.
    let area_vector: Vec3 = (1..n - 1)
        .map(|m| (p(m) - origin).cross(&(p(m + 1) - origin)))
        .sum::<Vec3>()
        * 0.5;
    let area = area_vector.norm();
    let char_length = (0..n).map(|m| (p(m + 1) - p(m)).norm()).fold(0.0, f64::max);
    // Written as a negation so that a NaN area is rejected as well.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    let degenerate = !(area > f64::EPSILON * char_length * char_length);
    if degenerate {
        return Err(GeometryError::DegenerateFace { face: k });
    }
    let normal = area_vector / area;

    let deviation = (0..n)
        .map(|m| (p(m) - origin).dot(&normal).abs())
        .fold(0.0, f64::max);
    let limit = planarity_tol * char_length;
    if deviation > limit {
        return Err(GeometryError::NonPlanarFace {
            face: k,
            deviation,
            limit,
        });
    }

    let co_normals = (0..n)
        .map(|m| (p(m + 1) - p(m)).cross(&normal).normalize())
        .collect();
    let turn_tol = 1e-12 * char_length * char_length;
    let convex = (0..n).all(|m| {
        let a = p(m + 1) - p(m);
        let b = p(m + 2) - p(m + 1);
        a.cross(&b).dot(&normal) >= -turn_tol
    });

    Ok(Face {
        indices,
        normal,
        co_normals,
        area,
        convex,
        char_length,
    })
}
