//! Parametrized volume fractions and their one-sided derivatives.
//!
//! Both volume functions are sums over faces of `⅓·⟨x_F − o, n_F⟩·A_F`, where
//! `o` is an origin on every cutting plane (so caps contribute nothing) and
//! `A_F` is the immersed area of face `F`. Immersed areas are again boundary
//! sums, `½·Σ ⟨x_E − p, N_E⟩·ℓ_E`, over immersed edge lengths `ℓ_E` with an
//! in-face origin `p` on the cutting line(s). Within a bracket of signed
//! distances `ℓ_E` and `p` are affine, so areas are quadratic and volumes
//! cubic; at bracket boundaries all derivatives are left-sided limits.

use crate::geometry::{EdgeStatus, Polyhedron, Vec3, VertexStatus, DEFAULT_ZERO_TOL};
use crate::truncation::{SecondaryFace, SecondaryStage, TruncatedPolyhedron, TruncationError};

/// Volume fraction and its first three left-sided derivatives with respect
/// to the signed distance.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct VolumeEvaluation {
    pub value: f64,
    pub d1: f64,
    pub d2: f64,
    pub d3: f64,
}

impl VolumeEvaluation {
    /// The cubic Taylor polynomial around `at`, evaluated at `x`.
    pub fn taylor(&self, at: f64, x: f64) -> f64 {
        let h = x - at;
        self.value + h * (self.d1 + h * (0.5 * self.d2 + h * self.d3 / 6.0))
    }

    /// Derivative of [`Self::taylor`].
    pub fn taylor_slope(&self, at: f64, x: f64) -> f64 {
        let h = x - at;
        self.d1 + h * (self.d2 + 0.5 * h * self.d3)
    }
}

/// Sorted, deduplicated signed distances of the vertices of a body.
///
/// Bracket `i` is the half-open interval `(ŝ_i, ŝ_{i+1}]`; the first bracket
/// also contains `ŝ_0`.
#[derive(Debug, Clone, PartialEq)]
pub struct BracketTable {
    values: Vec<f64>,
    tol: f64,
}

impl BracketTable {
    /// Sorts `values` and merges entries closer than `tol` to their predecessor.
    pub fn from_values(mut values: Vec<f64>, tol: f64) -> Self {
        values.sort_by(f64::total_cmp);
        let mut merged: Vec<f64> = Vec::with_capacity(values.len());
        for v in values {
            match merged.last() {
                Some(&last) if v - last < tol => {}
                _ => merged.push(v),
            }
        }
        Self {
            values: merged,
            tol,
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn min(&self) -> f64 {
        self.values[0]
    }

    pub fn max(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    /// Number of brackets, `len() − 1` (zero for a single value).
    pub fn bracket_count(&self) -> usize {
        self.values.len().saturating_sub(1)
    }

    /// Index of the bracket containing `s`, clamped to the valid range.
    ///
    /// Values within the merge tolerance above a boundary count as lying on
    /// it, matching the vertex classification of the volume functions.
    pub fn bracket_of(&self, s: f64) -> usize {
        let below = self.values.partition_point(|&v| v + self.tol < s);
        below
            .saturating_sub(1)
            .min(self.bracket_count().saturating_sub(1))
    }

    /// End points of bracket `i`.
    pub fn bounds(&self, i: usize) -> (f64, f64) {
        (self.values[i], self.values[i + 1])
    }
}

pub fn build_bracket_table(points: &[Vec3], n: &Vec3, base: &Vec3, zero_tol: f64) -> BracketTable {
    BracketTable::from_values(points.iter().map(|x| (x - base).dot(n)).collect(), zero_tol)
}

/// An edge reduced to the level-set values of its end points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct SweptEdge {
    lo: f64,
    hi: f64,
    length: f64,
}

impl SweptEdge {
    pub(crate) fn new(a: f64, b: f64, length: f64) -> Self {
        Self {
            lo: a.min(b),
            hi: a.max(b),
            length,
        }
    }

    /// Length inside `{λ ≤ t}` and its left derivative.
    fn immersed(&self, t: f64, tol: f64) -> (f64, f64) {
        let lo = VertexStatus::classify(self.lo - t, tol);
        let hi = VertexStatus::classify(self.hi - t, tol);
        match EdgeStatus::from_vertices(lo, hi) {
            EdgeStatus::Interior | EdgeStatus::DegenerateIntersected => (self.length, 0.0),
            EdgeStatus::Exterior | EdgeStatus::DegenerateExterior => (0.0, 0.0),
            EdgeStatus::Intersected | EdgeStatus::DegenerateInterior => {
                let rate = self.length / (self.hi - self.lo);
                (rate * (t - self.lo), rate)
            }
        }
    }
}

/// Affine coefficient `offset − (t − centre)·slope` of an edge in a boundary sum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct EdgeCoefficient {
    pub(crate) offset: f64,
    pub(crate) slope: f64,
}

/// A quadratic in the signed distance: value and two derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
struct Quad {
    v: f64,
    d1: f64,
    d2: f64,
}

impl Quad {
    fn constant(v: f64) -> Self {
        Self {
            v,
            d1: 0.0,
            d2: 0.0,
        }
    }
}

/// `½·Σ (offset − (t − centre)·slope)·ℓ(t)`, or with `ℓ` replaced by its
/// complement `|E| − ℓ` when `complement` is set.
fn swept_area(
    edges: &[SweptEdge],
    coeffs: &[EdgeCoefficient],
    centre: f64,
    t: f64,
    tol: f64,
    complement: bool,
) -> Quad {
    let mut q = Quad::default();
    for (e, c) in edges.iter().zip(coeffs) {
        let (mut l, mut dl) = e.immersed(t, tol);
        if complement {
            l = e.length - l;
            dl = -dl;
        }
        let a = c.offset - (t - centre) * c.slope;
        let da = -c.slope;
        q.v += a * l;
        q.d1 += da * l + a * dl;
        q.d2 += 2.0 * da * dl;
    }
    Quad {
        v: 0.5 * q.v,
        d1: 0.5 * q.d1,
        d2: 0.5 * q.d2,
    }
}

/// Adds `(w0 − offset·w1)·A(t)` and its derivatives.
fn accumulate(acc: &mut [f64; 4], w0: f64, w1: f64, offset: f64, area: Quad) {
    let w = w0 - offset * w1;
    acc[0] += w * area.v;
    acc[1] += w * area.d1 - w1 * area.v;
    acc[2] += w * area.d2 - 2.0 * w1 * area.d1;
    acc[3] += -3.0 * w1 * area.d2;
}

fn finish(acc: [f64; 4], volume: f64) -> VolumeEvaluation {
    let scale = 1.0 / (3.0 * volume);
    VolumeEvaluation {
        value: (acc[0] * scale).clamp(0.0, 1.0),
        d1: acc[1] * scale,
        d2: acc[2] * scale,
        d3: acc[3] * scale,
    }
}

/// Length of the part of segment `v1 → v2` inside `⟨x − base, n⟩ ≤ t`.
pub fn immersed_edge_length(
    v1: &Vec3,
    v2: &Vec3,
    n: &Vec3,
    base: &Vec3,
    t: f64,
    zero_tol: f64,
) -> f64 {
    let e = SweptEdge::new((v1 - base).dot(n), (v2 - base).dot(n), (v2 - v1).norm());
    e.immersed(t, zero_tol).0
}

#[derive(Debug, Clone)]
struct PrimaryFace {
    face_min: f64,
    face_max: f64,
    edges: Vec<SweptEdge>,
    coeffs: Vec<EdgeCoefficient>,
    lambda_centre: f64,
    area: f64,
    w0: f64,
    w1: f64,
}

/// Static coefficients of `α1(s)` on a polyhedron for a fixed normal.
#[derive(Debug, Clone)]
pub struct PrimaryStage<'p> {
    poly: &'p Polyhedron,
    normal: Vec3,
    zero_tol: f64,
    faces: Vec<PrimaryFace>,
    brackets: BracketTable,
}

impl<'p> PrimaryStage<'p> {
    pub fn new(poly: &'p Polyhedron, n1: &Vec3, zero_tol: f64) -> Self {
        let base = *poly.base_point();
        let lambda = |x: &Vec3| (x - base).dot(n1);
        let faces = poly
            .faces()
            .iter()
            .enumerate()
            .map(|(k, face)| {
                let verts: Vec<Vec3> = (0..face.len()).map(|m| *poly.face_vertex(k, m)).collect();
                let levels: Vec<f64> = verts.iter().map(lambda).collect();
                let centre = verts.iter().sum::<Vec3>() / verts.len() as f64;
                let nf = face.normal();
                let in_plane_sq = (n1 - n1.dot(nf) * nf).norm_squared();
                let edges = (0..face.len())
                    .map(|m| {
                        let (a, b) = (&verts[m], &verts[(m + 1) % verts.len()]);
                        SweptEdge::new(levels[m], levels[(m + 1) % verts.len()], (b - a).norm())
                    })
                    .collect();
                let coeffs = (0..face.len())
                    .map(|m| {
                        let cn = face.co_normal(m);
                        EdgeCoefficient {
                            offset: (verts[m] - centre).dot(cn),
                            slope: if in_plane_sq > 0.0 {
                                n1.dot(cn) / in_plane_sq
                            } else {
                                0.0
                            },
                        }
                    })
                    .collect();
                PrimaryFace {
                    face_min: levels.iter().copied().fold(f64::INFINITY, f64::min),
                    face_max: levels.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                    edges,
                    coeffs,
                    lambda_centre: lambda(&centre),
                    area: face.area(),
                    w0: (verts[0] - base).dot(nf),
                    w1: n1.dot(nf),
                }
            })
            .collect();
        let brackets = BracketTable::from_values(poly.projections(n1), zero_tol);
        Self {
            poly,
            normal: *n1,
            zero_tol,
            faces,
            brackets,
        }
    }

    pub fn polyhedron(&self) -> &'p Polyhedron {
        self.poly
    }

    pub fn normal(&self) -> &Vec3 {
        &self.normal
    }

    pub fn brackets(&self) -> &BracketTable {
        &self.brackets
    }

    /// `α1(s)` with derivatives.
    pub fn evaluate(&self, s: f64) -> VolumeEvaluation {
        let tol = self.zero_tol;
        let mut acc = [0.0; 4];
        for f in &self.faces {
            let area = if s <= f.face_min + tol {
                continue;
            } else if s > f.face_max + tol {
                Quad::constant(f.area)
            } else if f.face_max - f.face_min <= tol {
                continue;
            } else {
                swept_area(&f.edges, &f.coeffs, f.lambda_centre, s, tol, false)
            };
            accumulate(&mut acc, f.w0, f.w1, s, area);
        }
        finish(acc, self.poly.volume())
    }
}

/// `α1(s)`: fraction of `P` inside `⟨x − x̄, n1⟩ < s`.
pub fn primary_volume_fraction(poly: &Polyhedron, n1: &Vec3, s: f64) -> VolumeEvaluation {
    PrimaryStage::new(poly, n1, DEFAULT_ZERO_TOL).evaluate(s)
}

impl SecondaryStage<'_, '_> {
    /// `α2(t)` relative to `|P^cut|`, with derivatives.
    pub fn evaluate(&self, t: f64) -> VolumeEvaluation {
        finish(self.sums(t), self.truncated.cut_volume())
    }

    /// Volume of `P^cut ∩ {λ2 < t}`.
    pub fn volume(&self, t: f64) -> f64 {
        self.sums(t)[0] / 3.0
    }

    fn sums(&self, t: f64) -> [f64; 4] {
        let tol = self.truncated.zero_tol();
        let mut acc = [0.0; 4];
        let faces = self.faces.iter().flatten();
        match self.line {
            Some(line) if t > line.t_lo + tol && t <= line.t_hi + tol => {
                for f in faces {
                    let area = secondary_face_area(f, t, tol);
                    accumulate(&mut acc, f.line_w0, f.line_w1, t - line.t_ref, area);
                }
            }
            Some(line) if t > line.t_hi + tol => {
                // The primary cap is fully immersed: subtract the part of
                // P^cut above the secondary plane, which has no primary cap.
                for f in faces {
                    let a = secondary_face_area(f, t, tol);
                    let above = Quad {
                        v: f.retained_area - a.v,
                        d1: -a.d1,
                        d2: -a.d2,
                    };
                    accumulate(&mut acc, f.w0, f.w1, t, above);
                }
                acc = [
                    3.0 * self.truncated.cut_volume() - acc[0],
                    -acc[1],
                    -acc[2],
                    -acc[3],
                ];
            }
            _ => {
                // No primary cap below the secondary plane.
                for f in faces {
                    let area = secondary_face_area(f, t, tol);
                    accumulate(&mut acc, f.w0, f.w1, t, area);
                }
            }
        }
        acc
    }
}

fn secondary_face_area(f: &SecondaryFace, t: f64, tol: f64) -> Quad {
    let d = &f.delimiters;
    if t <= d.face_min + tol {
        return Quad::default();
    }
    if t > d.face_max + tol {
        return Quad::constant(f.retained_area);
    }
    if d.face_max - d.face_min <= tol {
        return Quad::default();
    }
    let lower = || swept_area(&f.edges, &f.coeffs, f.lambda_centre, t, tol, false);
    let Some((t_lo, t_hi)) = d.triple.filter(|_| f.cut) else {
        return lower();
    };
    if t <= t_lo + tol {
        // The primary cut segment lies above the secondary plane.
        lower()
    } else if t > t_hi + tol {
        // The primary cut segment is fully immersed; sum over the part of the
        // retained face above the secondary plane instead.
        let above = swept_area(&f.edges, &f.coeffs, f.lambda_centre, t, tol, true);
        Quad {
            v: f.retained_area - above.v,
            d1: -above.d1,
            d2: -above.d2,
        }
    } else {
        match &f.triple {
            Some(tr) => swept_area(&f.edges, &tr.coeffs, tr.t_centre, t, tol, false),
            None => lower(),
        }
    }
}

/// `α2(t)` on `P^cut` for the secondary normal `n2`.
pub fn secondary_volume_fraction(
    truncated: &TruncatedPolyhedron<'_>,
    n2: &Vec3,
    t: f64,
) -> Result<VolumeEvaluation, TruncationError> {
    Ok(truncated
        .with_secondary_normal(n2, crate::plane::DEFAULT_GAMMA_TOL)?
        .evaluate(t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shapes;
    use crate::truncation::truncate_faces;

    #[test]
    fn cube_axis_aligned() {
        let cube = shapes::unit_cube();
        let e = primary_volume_fraction(&cube, &Vec3::x(), 0.0);
        assert!((e.value - 0.5).abs() < 1e-15);
        assert!((e.d1 - 1.0).abs() < 1e-15);
        assert!(e.d2.abs() < 1e-15 && e.d3.abs() < 1e-15);
        assert_eq!(primary_volume_fraction(&cube, &Vec3::x(), -0.5).value, 0.0);
        assert_eq!(primary_volume_fraction(&cube, &Vec3::x(), 0.5).value, 1.0);
        let e = primary_volume_fraction(&cube, &Vec3::x(), -0.13);
        assert!((e.value - 0.37).abs() < 1e-15);
    }

    #[test]
    fn cube_corner_is_cubic() {
        let cube = shapes::unit_cube();
        let n = Vec3::new(1.0, 1.0, 1.0).normalize();
        let s_min = -0.5 * 3f64.sqrt();
        for delta in [1e-3, 0.05, 0.3] {
            let e = primary_volume_fraction(&cube, &n, s_min + delta);
            // Corner tetrahedron in corner coordinates.
            let expected = delta.powi(3) / (6.0 * n.x * n.y * n.z);
            assert!((e.value - expected).abs() < 1e-15, "{delta}");
            assert!((e.d1 - 3.0 * delta * delta / (6.0 * n.x * n.y * n.z)).abs() < 1e-13);
            assert!((e.d3 - 1.0 / (n.x * n.y * n.z)).abs() < 1e-12);
        }
    }

    #[test]
    fn secondary_on_half_cube() {
        let cube = shapes::unit_cube();
        let t = truncate_faces(&cube, &Vec3::x(), 0.0, 1e-14).unwrap();
        let e = secondary_volume_fraction(&t, &Vec3::y(), 0.0).unwrap();
        assert!((e.value - 0.5).abs() < 1e-15);
        assert!((e.d1 - 1.0).abs() < 1e-15);
        assert_eq!(
            secondary_volume_fraction(&t, &Vec3::y(), -0.6)
                .unwrap()
                .value,
            0.0
        );
        assert_eq!(
            secondary_volume_fraction(&t, &Vec3::y(), 0.6)
                .unwrap()
                .value,
            1.0
        );
    }

    #[test]
    fn immersed_lengths() {
        let (a, b, o) = (Vec3::zeros(), Vec3::x(), Vec3::zeros());
        assert_eq!(
            immersed_edge_length(&a, &b, &Vec3::x(), &o, 0.25, 1e-14),
            0.25
        );
        assert_eq!(
            immersed_edge_length(&b, &a, &Vec3::x(), &o, 0.25, 1e-14),
            0.25
        );
        // Both ends on the plane.
        assert_eq!(
            immersed_edge_length(&a, &b, &Vec3::y(), &o, 0.0, 1e-14),
            1.0
        );
        // One end on the plane, the other outside.
        assert_eq!(
            immersed_edge_length(&a, &b, &Vec3::x(), &o, 0.0, 1e-14),
            0.0
        );
        // One end on the plane, the other inside.
        assert_eq!(
            immersed_edge_length(&a, &b, &Vec3::x(), &o, 1.0, 1e-14),
            1.0
        );
    }

    #[test]
    fn bracket_tables() {
        let cube = shapes::unit_cube();
        let c = *cube.base_point();
        let t = build_bracket_table(cube.vertices(), &Vec3::x(), &c, 1e-14);
        assert_eq!(t.values(), &[-0.5, 0.5]);
        let n = Vec3::new(1.0, 1.0, 1.0).normalize();
        let t = build_bracket_table(cube.vertices(), &n, &c, 1e-14);
        assert_eq!(t.len(), 4);
        let r3 = 3f64.sqrt();
        for (got, want) in t
            .values()
            .iter()
            .zip([-r3 / 2.0, -r3 / 6.0, r3 / 6.0, r3 / 2.0])
        {
            assert!((got - want).abs() < 1e-15);
        }
        let t = BracketTable::from_values(vec![0.0, 1.0, 1e-15, 0.5], 1e-14);
        assert_eq!(t.values(), &[0.0, 0.5, 1.0]);
        assert_eq!(t.bracket_of(0.0), 0);
        assert_eq!(t.bracket_of(0.5), 0);
        assert_eq!(t.bracket_of(0.5 + 1e-15), 0);
        assert_eq!(t.bracket_of(0.50001), 1);
        assert_eq!(t.bracket_of(7.0), 1);
        assert_eq!(t.bracket_of(-7.0), 0);
    }
}
