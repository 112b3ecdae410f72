//! Reference volumes by explicit clipping.
//!
//! This is deliberately independent of the face-based volume functions: the
//! polyhedron surface is clipped plane by plane, every cut is closed with a
//! cap polygon, and the volume of the resulting closed surface is summed over
//! signed tetrahedra. Nothing here assumes convexity or a star point; faces
//! are kept as sets of oriented boundary segments, so a clipped face may have
//! several components.

use crate::geometry::{Polyhedron, Vec3};

/// The half-space `⟨x − base, normal⟩ ≤ signed_distance` that is retained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HalfSpace {
    pub normal: Vec3,
    pub signed_distance: f64,
}

impl HalfSpace {
    pub fn new(normal: Vec3, signed_distance: f64) -> Self {
        Self {
            normal,
            signed_distance,
        }
    }

    /// The complementary half-space (up to the shared boundary plane).
    pub fn flipped(&self) -> Self {
        Self::new(-self.normal, -self.signed_distance)
    }
}

#[derive(Debug, Clone)]
struct ClipFace {
    normal: Vec3,
    anchor: Vec3,
    segments: Vec<(Vec3, Vec3)>,
}

/// Volume of `P ∩ H_1 ∩ … ∩ H_m`, with each `H_j` given relative to the base
/// point of `P`. Returns 0 for an empty intersection.
pub fn oracle_truncated_volume(poly: &Polyhedron, planes: &[HalfSpace]) -> f64 {
    let base = *poly.base_point();
    let mut faces: Vec<ClipFace> = (0..poly.faces().len())
        .map(|k| {
            let face = poly.face(k);
            ClipFace {
                normal: *face.normal(),
                anchor: *poly.face_vertex(k, 0),
                segments: (0..face.len())
                    .map(|m| (*poly.face_vertex(k, m), *poly.face_vertex(k, m + 1)))
                    .collect(),
            }
        })
        .collect();

    let snap = 1e-14 * poly.characteristic_length();
    for plane in planes {
        faces = clip(faces, plane, &base, snap);
        if faces.is_empty() {
            return 0.0;
        }
    }
    surface_volume(&faces, &base)
}

fn clip(faces: Vec<ClipFace>, plane: &HalfSpace, base: &Vec3, snap: f64) -> Vec<ClipFace> {
    let n = plane.normal;
    // Points on the plane count as outside; this symbolic tie-break keeps
    // crossings paired consistently when vertices sit exactly on the plane.
    // Values within `snap` of zero are treated as on the plane, so rounding
    // noise from an earlier cut cannot create sliver crossings.
    let f = |x: &Vec3| {
        let v = (x - base).dot(&n) - plane.signed_distance;
        if v.abs() <= snap {
            0.0
        } else {
            v
        }
    };
    let mut cap = Vec::new();
    let mut out = Vec::with_capacity(faces.len() + 1);

    for face in faces {
        let mut kept = Vec::with_capacity(face.segments.len());
        let mut crossings = Vec::new();
        for (a, b) in face.segments {
            let (fa, fb) = (f(&a), f(&b));
            match (fa < 0.0, fb < 0.0) {
                (true, true) => kept.push((a, b)),
                (false, false) => {}
                (true, false) => {
                    let x = a + (b - a) * (fa / (fa - fb));
                    kept.push((a, x));
                    crossings.push(x);
                }
                (false, true) => {
                    let x = a + (b - a) * (fa / (fa - fb));
                    kept.push((x, b));
                    crossings.push(x);
                }
            }
        }
        if !crossings.is_empty() {
            // Along u the retained region lies to the left, so consecutive
            // crossings bound the chords of the face that close the boundary.
            let u = face.normal.cross(&n);
            crossings.sort_by(|p, q| p.dot(&u).total_cmp(&q.dot(&u)));
            for pair in crossings.chunks_exact(2) {
                kept.push((pair[0], pair[1]));
                cap.push((pair[1], pair[0]));
            }
        }
        if !kept.is_empty() {
            out.push(ClipFace {
                normal: face.normal,
                anchor: face.anchor,
                segments: kept,
            });
        }
    }
    if !cap.is_empty() {
        out.push(ClipFace {
            normal: n,
            anchor: base + plane.signed_distance * n,
            segments: cap,
        });
    }
    out
}

fn surface_volume(faces: &[ClipFace], apex: &Vec3) -> f64 {
    faces
        .iter()
        .map(|face| {
            let r = face.anchor;
            face.segments
                .iter()
                .map(|(a, b)| (a - r).cross(&(b - r)).dot(&(r - apex)))
                .sum::<f64>()
        })
        .sum::<f64>()
        / 6.0
}
