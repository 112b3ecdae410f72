//! Cube-specific reference algorithms: the closed-form inverse of the cube
//! volume function and a decomposition-based bisection positioner used as a
//! performance baseline.

use std::collections::HashMap;
use std::f64::consts::PI;

use thiserror::Error;

use crate::geometry::{Polyhedron, Vec3};
use crate::oracle::HalfSpace;
use crate::positioning::{check_fractions, PositioningError, TopologyClass};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CubeError {
    #[error("tetrahedron with negative volume {0} in fan decomposition")]
    StarPointViolation(f64),
    #[error("polyhedron is not an axis-aligned cube")]
    NotACube,
    #[error("no convergence after {0} iterations")]
    NoConvergence(usize),
    #[error(transparent)]
    Positioning(#[from] PositioningError),
}

/// Normal components sorted in descending order of magnitude, with the map
/// back to the original axes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CanonicalCubeNormal {
    /// `n1 ≥ n2 ≥ n3 ≥ 0`.
    pub components: [f64; 3],
    /// `components[i] = |n[axes[i]]|`.
    pub axes: [usize; 3],
    /// Sign of the original component on each original axis.
    pub signs: [f64; 3],
}

impl CanonicalCubeNormal {
    pub fn new(n: &Vec3) -> Self {
        let mut axes = [0, 1, 2];
        axes.sort_by(|&a, &b| n[b].abs().total_cmp(&n[a].abs()));
        let signs = [0, 1, 2].map(|i| if n[i] < 0.0 { -1.0 } else { 1.0 });
        Self {
            components: axes.map(|i| n[i].abs()),
            axes,
            signs,
        }
    }

    pub fn l1_norm(&self) -> f64 {
        self.components.iter().sum()
    }

    /// Maps a vector given in the canonical frame back to the original axes.
    pub fn to_original(&self, v: &Vec3) -> Vec3 {
        let mut out = Vec3::zeros();
        for i in 0..3 {
            let axis = self.axes[i];
            out[axis] = self.signs[axis] * v[i];
        }
        out
    }
}

/// Components at or below this magnitude are treated as exact zeros.
const ZERO_COMPONENT: f64 = 1e-15;

/// Breakpoints `α̂_0 … α̂_4` of the closed-form inverse on `[0, ½]` for a
/// canonical normal with three non-zero components.
pub fn cube_breakpoints(c: &[f64; 3]) -> [f64; 5] {
    let [n1, n2, n3] = *c;
    let p = 6.0 * n1 * n2 * n3;
    let third = if n1 >= n2 + n3 {
        (n2 + n3) / (2.0 * n1)
    } else {
        (n1.powi(3) - (n1 - n2).powi(3) - (n1 - n3).powi(3)) / p
    };
    [
        0.0,
        n3 * n3 / (6.0 * n1 * n2),
        (n2.powi(3) - (n2 - n3).powi(3)) / p,
        third,
        0.5,
    ]
}

/// Branch `k ∈ 1..=4` of the closed-form inverse on the unit cube, measured
/// from the corner where the level set is smallest.
pub fn cube_branch(k: usize, c: &[f64; 3], alpha: f64) -> f64 {
    let [n1, n2, n3] = *c;
    match k {
        1 => (6.0 * alpha * n1 * n2 * n3).cbrt(),
        2 => 0.5 * n3 + (2.0 * alpha * n1 * n2 - n3 * n3 / 12.0).sqrt(),
        3 => {
            let arg = 0.375 * (2.0 / (n2 * n3)).sqrt() * (n2 + n3 - 2.0 * n1 * alpha);
            n2 + n3 - (8.0 * n2 * n3).sqrt() * (arg.clamp(-1.0, 1.0).acos() / 3.0 + PI / 3.0).cos()
        }
        4 if n1 >= n2 + n3 => 0.5 * (2.0 * alpha * n1 + n2 + n3),
        4 => {
            let sum = n1 + n2 + n3;
            let p = 0.75 * (2.0 * n1 * n1 - sum * sum + 2.0 * n2 * n2 + 2.0 * n3 * n3);
            let q = 1.5 * n1 * n2 * n3 * (2.0 * alpha - 1.0);
            let arg = 1.5 * q / p * (-3.0 / p).sqrt();
            0.5 * sum
                + 2.0
                    * (-p / 3.0).sqrt()
                    * (arg.clamp(-1.0, 1.0).acos() / 3.0 - 2.0 * PI / 3.0).cos()
        }
        _ => panic!("cube inverse has branches 1 to 4, got {k}"),
    }
}

/// Position on the unit cube for `α ≤ ½`, from the minimum corner.
fn unit_position_lower(c: &[f64; 3], alpha: f64) -> f64 {
    let [n1, n2, n3] = *c;
    if n2 <= ZERO_COMPONENT {
        return alpha * n1;
    }
    if n3 <= ZERO_COMPONENT {
        // tan φ = n2 / n1; the third branch only applies for α > ½.
        let half_tan = 0.5 * n2 / n1;
        return if alpha <= half_tan {
            (alpha * 2.0 * n1 * n2).sqrt()
        } else {
            n2 + n1 * (alpha - half_tan)
        };
    }
    let hat = cube_breakpoints(c);
    let k = (1..4).find(|&k| alpha <= hat[k]).unwrap_or(4);
    cube_branch(k, c, alpha)
}

/// Closed-form position of the plane with normal `n` that cuts a fraction
/// `alpha` from a cube of edge `dx`, measured from the cube corner at which
/// `⟨x, n⟩` is smallest.
///
/// The library's level sets are taken from the cube centre instead; see
/// [`cube_position_from_center`].
pub fn cube_explicit_position(n: &Vec3, alpha: f64, dx: f64) -> f64 {
    let canon = CanonicalCubeNormal::new(n);
    let c = canon.components;
    let s = if alpha <= 0.5 {
        unit_position_lower(&c, alpha)
    } else {
        canon.l1_norm() - unit_position_lower(&c, 1.0 - alpha)
    };
    s * dx
}

/// [`cube_explicit_position`] shifted to a level set based at the cube centre.
pub fn cube_position_from_center(n: &Vec3, alpha: f64, dx: f64) -> f64 {
    cube_explicit_position(n, alpha, dx) - 0.5 * dx * CanonicalCubeNormal::new(n).l1_norm()
}

/// Volume fraction of `{⟨x, c⟩ ≤ s}` in the unit cube, for a canonical normal
/// with three non-zero components.
pub fn cube_volume_fraction(c: &[f64; 3], s: f64) -> f64 {
    let cube = |x: f64| if x > 0.0 { x * x * x } else { 0.0 };
    let [n1, n2, n3] = *c;
    let sum = cube(s) - cube(s - n1) - cube(s - n2) - cube(s - n3)
        + cube(s - n1 - n2)
        + cube(s - n1 - n3)
        + cube(s - n2 - n3)
        - cube(s - n1 - n2 - n3);
    sum / (6.0 * n1 * n2 * n3)
}

/// Convex polyhedron stored as vertex loops; used by the decomposition
/// baseline, which rebuilds this connectivity on every clip.
#[derive(Debug, Clone)]
pub struct ConvexPolyhedron {
    vertices: Vec<Vec3>,
    faces: Vec<Vec<usize>>,
}

impl ConvexPolyhedron {
    pub fn new(vertices: Vec<Vec3>, faces: Vec<Vec<usize>>) -> Self {
        Self { vertices, faces }
    }

    pub fn from_polyhedron(poly: &Polyhedron) -> Self {
        Self::new(
            poly.vertices().to_vec(),
            poly.faces().iter().map(|f| f.indices().to_vec()).collect(),
        )
    }

    pub fn vertices(&self) -> &[Vec3] {
        &self.vertices
    }

    pub fn faces(&self) -> &[Vec<usize>] {
        &self.faces
    }

    pub fn is_empty(&self) -> bool {
        self.faces.is_empty()
    }

    /// Keeps `⟨x − base, n⟩ ≤ d`. Vertices within `tol` of the plane are
    /// snapped onto it, so a plane grazing a vertex changes nothing.
    pub fn clip(&self, plane: &HalfSpace, base: &Vec3, tol: f64) -> ConvexPolyhedron {
        let f: Vec<f64> = self
            .vertices
            .iter()
            .map(|x| {
                let v = (x - base).dot(&plane.normal) - plane.signed_distance;
                if v.abs() <= tol {
                    0.0
                } else {
                    v
                }
            })
            .collect();
        if f.iter().all(|&v| v <= 0.0) {
            return self.clone();
        }
        if f.iter().all(|&v| v >= 0.0) {
            return ConvexPolyhedron::new(Vec::new(), Vec::new());
        }

        let mut vertices = Vec::new();
        let mut kept: HashMap<usize, usize> = HashMap::new();
        let mut crossing: HashMap<(usize, usize), usize> = HashMap::new();
        let mut on_cap = Vec::new();
        let mut faces = Vec::new();
        for face in &self.faces {
            let mut out = Vec::with_capacity(face.len() + 1);
            for m in 0..face.len() {
                let (a, b) = (face[m], face[(m + 1) % face.len()]);
                if f[a] <= 0.0 {
                    let id = *kept.entry(a).or_insert_with(|| {
                        vertices.push(self.vertices[a]);
                        if f[a] == 0.0 {
                            on_cap.push(vertices.len() - 1);
                        }
                        vertices.len() - 1
                    });
                    out.push(id);
                }
                if (f[a] < 0.0 && f[b] > 0.0) || (f[a] > 0.0 && f[b] < 0.0) {
                    let key = (a.min(b), a.max(b));
                    let id = *crossing.entry(key).or_insert_with(|| {
                        let (p, q) = (self.vertices[a], self.vertices[b]);
                        vertices.push(p + (q - p) * (f[a] / (f[a] - f[b])));
                        on_cap.push(vertices.len() - 1);
                        vertices.len() - 1
                    });
                    out.push(id);
                }
            }
            if out.len() >= 3 {
                faces.push(out);
            }
        }

        // Cap: the plane section is convex, so its vertices can be ordered by
        // angle about their mean.
        if on_cap.len() >= 3 {
            let centre = on_cap.iter().map(|&i| vertices[i]).sum::<Vec3>() / on_cap.len() as f64;
            let u = (vertices[on_cap[0]] - centre).normalize();
            let w = plane.normal.cross(&u);
            let angle = |i: usize| {
                let d = vertices[i] - centre;
                d.dot(&w).atan2(d.dot(&u))
            };
            on_cap.sort_by(|&a, &b| angle(a).total_cmp(&angle(b)));
            // Counter-clockwise about n is outward for the kept side.
            faces.push(on_cap);
        }
        ConvexPolyhedron::new(vertices, faces)
    }

    /// Volume by a tetrahedral fan from the vertex mean.
    pub fn volume(&self) -> Result<f64, CubeError> {
        if self.is_empty() {
            return Ok(0.0);
        }
        let apex = self.vertices.iter().sum::<Vec3>() / self.vertices.len() as f64;
        let scale = self
            .vertices
            .iter()
            .map(|v| (v - apex).norm())
            .fold(0.0, f64::max)
            .powi(3);
        let mut total = 0.0;
        for face in &self.faces {
            let a = self.vertices[face[0]];
            for m in 1..face.len() - 1 {
                let (b, c) = (self.vertices[face[m]], self.vertices[face[m + 1]]);
                let tet = (b - a).cross(&(c - a)).dot(&(a - apex)) / 6.0;
                if tet < -1e-12 * scale {
                    return Err(CubeError::StarPointViolation(tet));
                }
                total += tet;
            }
        }
        Ok(total)
    }
}

/// Volume of `body ∩ plane`, with the plane relative to `base`.
pub fn decomposition_volume(
    body: &ConvexPolyhedron,
    plane: &HalfSpace,
    base: &Vec3,
    tol: f64,
) -> Result<f64, CubeError> {
    body.clip(plane, base, tol).volume()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BaselineResult {
    pub t_star: f64,
    /// Number of clips of the truncated cube by the secondary plane.
    pub truncations: usize,
    pub topology: TopologyClass,
    /// Final `Δα2`, relative to the whole cube.
    pub error: f64,
}

pub const DEFAULT_BASELINE_MAX_ITER: usize = 200;

/// Edge length of an axis-aligned cube, or `NotACube`.
fn cube_edge(poly: &Polyhedron) -> Result<f64, CubeError> {
    let v = poly.vertices();
    if v.len() != 8 {
        return Err(CubeError::NotACube);
    }
    let mut lo = v[0];
    let mut hi = v[0];
    for p in v {
        lo = lo.inf(p);
        hi = hi.sup(p);
    }
    let d = hi - lo;
    let dx = d.x;
    let scale = 1e-12 * dx;
    let corner_ok = v
        .iter()
        .all(|p| (0..3).all(|i| (p[i] - lo[i]).abs() <= scale || (p[i] - hi[i]).abs() <= scale));
    if !corner_ok || (d.y - dx).abs() > scale || (d.z - dx).abs() > scale || dx <= 0.0 {
        return Err(CubeError::NotACube);
    }
    Ok(dx)
}

/// Secondary plane position on a cube by accelerated bisection over the
/// whole-cell fraction enclosed by the secondary plane.
///
/// The primary plane is placed with the closed-form inverse. Every trial
/// position is obtained from the same inverse, and the fraction of the
/// second phase is measured by clipping the truncated cube; each such clip
/// counts as one truncation.
pub fn baseline_position_secondary(
    cube: &Polyhedron,
    n1: &Vec3,
    alpha1: f64,
    n2: &Vec3,
    alpha2: f64,
    eps: f64,
    max_iter: usize,
) -> Result<BaselineResult, CubeError> {
    check_fractions(alpha1, alpha2)?;
    let dx = cube_edge(cube)?;
    let base = *cube.base_point();
    let tol = 1e-14 * dx;
    let volume = dx * dx * dx;
    let s_star = cube_position_from_center(n1, alpha1, dx);
    let cut =
        ConvexPolyhedron::from_polyhedron(cube).clip(&HalfSpace::new(-n1, -s_star), &base, tol);

    let mut truncations = 0;
    let mut error_at = |w: f64| -> Result<(f64, f64), CubeError> {
        let t = cube_position_from_center(n2, w, dx);
        truncations += 1;
        let enclosed = decomposition_volume(&cut, &HalfSpace::new(*n2, t), &base, tol)?;
        Ok((t, alpha2 - enclosed / volume))
    };

    let (t, delta) = error_at(alpha2)?;
    if delta.abs() < eps {
        return Ok(BaselineResult {
            t_star: t,
            truncations: 1,
            topology: TopologyClass::NonWetted,
            error: delta,
        });
    }
    let mut lower = alpha2 + delta.max(0.0);
    let upper_start = (alpha1 + alpha2).min(1.0);
    let (t, delta) = error_at(upper_start)?;
    if delta.abs() < eps {
        return Ok(BaselineResult {
            t_star: t,
            truncations: 2,
            topology: TopologyClass::FullyWetted,
            error: delta,
        });
    }
    let mut upper = upper_start + delta.min(0.0);

    for _ in 0..max_iter {
        // The error bounds the change of the whole-cell fraction from below;
        // bisect within the tightened bracket.
        let w = 0.5 * (lower + upper);
        let (t, delta) = error_at(w)?;
        if delta.abs() < eps {
            return Ok(BaselineResult {
                t_star: t,
                truncations,
                topology: TopologyClass::Triple,
                error: delta,
            });
        }
        if delta > 0.0 {
            lower = (w + delta).min(upper);
        } else {
            upper = (w + delta).max(lower);
        }
        if upper - lower <= f64::EPSILON * upper {
            // Bracket exhausted at working precision.
            let w = 0.5 * (lower + upper);
            let (t, delta) = error_at(w)?;
            return Ok(BaselineResult {
                t_star: t,
                truncations,
                topology: TopologyClass::Triple,
                error: delta,
            });
        }
    }
    Err(CubeError::NoConvergence(max_iter))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shapes;

    #[test]
    fn trivial_and_two_component_cases() {
        assert!((cube_explicit_position(&Vec3::x(), 0.25, 1.0) - 0.25).abs() < 1e-15);
        let n = Vec3::new(1.0, 1.0, 0.0).normalize();
        assert!((cube_explicit_position(&n, 0.25, 1.0) - 0.5).abs() < 1e-15);
        assert!((cube_explicit_position(&-Vec3::y(), 0.3, 2.0) - 0.6).abs() < 1e-15);
    }

    #[test]
    fn canonical_frame_round_trip() {
        let n = Vec3::new(-0.2, 0.9, -0.5).normalize();
        let c = CanonicalCubeNormal::new(&n);
        assert_eq!(c.axes, [1, 2, 0]);
        let v = c.to_original(&Vec3::from(c.components));
        assert!((v - n).norm() < 1e-15);
    }

    #[test]
    fn clip_half_cube() {
        let cube = shapes::unit_cube();
        let base = *cube.base_point();
        let body = ConvexPolyhedron::from_polyhedron(&cube);
        let half = body.clip(&HalfSpace::new(Vec3::x(), 0.0), &base, 1e-14);
        assert!((half.volume().unwrap() - 0.5).abs() < 1e-15);
        let v = decomposition_volume(&half, &HalfSpace::new(Vec3::y(), 0.0), &base, 1e-14).unwrap();
        assert!((v - 0.25).abs() < 1e-15);
        // A plane through a single vertex leaves the body unchanged.
        let n = Vec3::new(1.0, 1.0, 1.0).normalize();
        let s = 3f64.sqrt() / 2.0 + 1e-15;
        let v = decomposition_volume(&body, &HalfSpace::new(n, s), &base, 1e-14).unwrap();
        assert!((v - 1.0).abs() < 1e-15);
    }

    #[test]
    fn baseline_symmetric_case() {
        let cube = shapes::unit_cube();
        let r = baseline_position_secondary(&cube, &Vec3::x(), 0.5, &Vec3::y(), 0.25, 1e-12, 200)
            .unwrap();
        assert!(r.t_star.abs() < 1e-12);
        assert_eq!(r.topology, TopologyClass::Triple);
    }

    #[test]
    fn baseline_non_wetted_shortcut() {
        let cube = shapes::unit_cube();
        let r = baseline_position_secondary(&cube, &Vec3::x(), 0.01, &-Vec3::x(), 0.02, 1e-12, 200)
            .unwrap();
        assert_eq!(r.truncations, 1);
        assert_eq!(r.topology, TopologyClass::NonWetted);
    }
}
