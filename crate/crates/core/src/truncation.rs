//! The once-truncated polyhedron `P ∩ {λ1 ≥ s*}` in face-indexed form.
//!
//! Every original face keeps its identity; only its edge list is replaced by
//! the part of the boundary that survives the primary plane. No connectivity
//! is rebuilt and the cut polygon on the primary plane is never materialized:
//! all volume sums later use origins on the primary plane, where its
//! contribution vanishes.

use thiserror::Error;

use crate::geometry::{EdgeStatus, Polyhedron, Vec3, VertexStatus};
use crate::plane::{IntersectionFrame, PlaneConfig, PlaneError};
use crate::volume::{BracketTable, EdgeCoefficient, SweptEdge};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TruncationError {
    #[error(transparent)]
    Plane(#[from] PlaneError),
    #[error("plane at s = {s_star} leaves no vertex in the truncated half-space")]
    EmptyTruncation { s_star: f64 },
    #[error("plane at s = {s_star} leaves no vertex outside the truncated half-space")]
    FullTruncation { s_star: f64 },
    #[error("edge is parallel to the plane although its end points lie on opposite sides")]
    ParallelEdge,
}

/// The point where the segment `x_m → x_m1` crosses `⟨x − base, n1⟩ = s`.
pub fn edge_intersection_point(
    x_m: &Vec3,
    x_m1: &Vec3,
    n1: &Vec3,
    s: f64,
    base: &Vec3,
) -> Result<Vec3, TruncationError> {
    let la = (x_m - base).dot(n1);
    let lb = (x_m1 - base).dot(n1);
    let d = lb - la;
    if d.abs() <= f64::EPSILON * (la.abs() + lb.abs()) || !d.is_finite() {
        return Err(TruncationError::ParallelEdge);
    }
    Ok(x_m + (x_m1 - x_m) * ((s - la) / d))
}

/// How a truncated edge came about.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EdgeOrigin {
    /// The original edge, kept as a whole.
    Copied,
    /// Part of an intersected edge. `beta` is the relative position of the
    /// intersection point along the parent edge, measured from its start.
    Truncated { retained_start: bool, beta: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedEdge {
    /// End points in the orientation of the parent face loop.
    pub start: Vec3,
    pub end: Vec3,
    pub origin: EdgeOrigin,
    /// Face index and local edge index of the parent edge.
    pub parent: (usize, usize),
    pub co_normal: Vec3,
    pub length: f64,
}

/// What remains of a face after truncation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FaceKind {
    /// No vertex outside the primary plane; the face is gone.
    Empty,
    /// Entirely outside the primary plane.
    Whole,
    /// Crossed or touched by the primary plane.
    Cut,
}

#[derive(Debug, Clone)]
pub struct TruncatedFace {
    kind: FaceKind,
    edges: Vec<TruncatedEdge>,
    exterior: Vec<Vec3>,
    cut_points: Vec<Vec3>,
    immersed_area: f64,
    area: f64,
    normal: Vec3,
    anchor: Vec3,
}

impl TruncatedFace {
    pub fn kind(&self) -> FaceKind {
        self.kind
    }

    pub fn edges(&self) -> &[TruncatedEdge] {
        &self.edges
    }

    /// Original vertices strictly outside the primary plane.
    pub fn exterior_vertices(&self) -> &[Vec3] {
        &self.exterior
    }

    /// Points of the face on the primary plane: edge intersections and
    /// original vertices within the zero tolerance.
    pub fn cut_points(&self) -> &[Vec3] {
        &self.cut_points
    }

    /// Vertices of the truncated face.
    pub fn vertices(&self) -> impl Iterator<Item = &Vec3> {
        self.exterior.iter().chain(self.cut_points.iter())
    }

    /// Area of the part of the face inside the primary half-space.
    pub fn immersed_area(&self) -> f64 {
        self.immersed_area
    }

    /// Area of the retained part of the face.
    pub fn retained_area(&self) -> f64 {
        self.area - self.immersed_area
    }

    pub fn area(&self) -> f64 {
        self.area
    }
}

/// The polyhedron `P^cut = P ∩ {λ1 ≥ s*}`.
#[derive(Debug, Clone)]
pub struct TruncatedPolyhedron<'p> {
    parent: &'p Polyhedron,
    primary: PlaneConfig,
    zero_tol: f64,
    faces: Vec<TruncatedFace>,
    cut_volume: f64,
}

/// Builds the truncated representation of `poly` for the primary plane
/// `(n1, s_star)`.
pub fn truncate_faces<'p>(
    poly: &'p Polyhedron,
    n1: &Vec3,
    s_star: f64,
    zero_tol: f64,
) -> Result<TruncatedPolyhedron<'p>, TruncationError> {
    TruncatedPolyhedron::new(poly, n1, s_star, zero_tol)
}

impl<'p> TruncatedPolyhedron<'p> {
    pub fn new(
        poly: &'p Polyhedron,
        n1: &Vec3,
        s_star: f64,
        zero_tol: f64,
    ) -> Result<Self, TruncationError> {
        let primary = PlaneConfig::new(*n1, s_star, *poly.base_point())?;
        let status: Vec<VertexStatus> = poly
            .vertices()
            .iter()
            .map(|x| VertexStatus::classify(primary.offset(x), zero_tol))
            .collect();
        if !status.contains(&VertexStatus::Interior) {
            return Err(TruncationError::EmptyTruncation { s_star });
        }
        if !status.contains(&VertexStatus::Exterior) {
            return Err(TruncationError::FullTruncation { s_star });
        }

        let mut faces = Vec::with_capacity(poly.faces().len());
        for (k, face) in poly.faces().iter().enumerate() {
            faces.push(truncate_face(poly, k, &status, &primary)?);
            debug_assert_eq!(faces[k].area, face.area());
        }

        // Volume of P^cut with the origin on the primary plane, where the cap
        // contributes nothing.
        let origin = primary.foot_point();
        let cut_volume = faces
            .iter()
            .map(|f| (f.anchor - origin).dot(&f.normal) * f.retained_area())
            .sum::<f64>()
            / 3.0;

        Ok(Self {
            parent: poly,
            primary,
            zero_tol,
            faces,
            cut_volume,
        })
    }

    pub fn parent(&self) -> &'p Polyhedron {
        self.parent
    }

    pub fn primary_plane(&self) -> &PlaneConfig {
        &self.primary
    }

    pub fn zero_tol(&self) -> f64 {
        self.zero_tol
    }

    pub fn faces(&self) -> &[TruncatedFace] {
        &self.faces
    }

    pub fn face(&self, k: usize) -> &TruncatedFace {
        &self.faces[k]
    }

    /// `|P^cut|`.
    pub fn cut_volume(&self) -> f64 {
        self.cut_volume
    }

    /// Prepares the secondary volume function for the normal `n2`.
    pub fn with_secondary_normal(
        &self,
        n2: &Vec3,
        gamma_tol: f64,
    ) -> Result<SecondaryStage<'_, 'p>, TruncationError> {
        SecondaryStage::new(self, n2, gamma_tol)
    }
}

fn truncate_face(
    poly: &Polyhedron,
    k: usize,
    status: &[VertexStatus],
    primary: &PlaneConfig,
) -> Result<TruncatedFace, TruncationError> {
    let face = poly.face(k);
    let idx = face.indices();
    let n = idx.len();
    let mut edges = Vec::new();
    let mut exterior = Vec::new();
    let mut cut_points = Vec::new();

    for m in 0..n {
        let (i, j) = (idx[m], idx[(m + 1) % n]);
        let (a, b) = (&poly.vertices()[i], &poly.vertices()[j]);
        match status[i] {
            VertexStatus::Exterior => exterior.push(*a),
            VertexStatus::OnPlane => cut_points.push(*a),
            VertexStatus::Interior => {}
        }
        let co_normal = *face.co_normal(m);
        match EdgeStatus::from_vertices(status[i], status[j]) {
            EdgeStatus::Exterior
            | EdgeStatus::DegenerateExterior
            | EdgeStatus::DegenerateIntersected => edges.push(TruncatedEdge {
                start: *a,
                end: *b,
                origin: EdgeOrigin::Copied,
                parent: (k, m),
                co_normal,
                length: (b - a).norm(),
            }),
            EdgeStatus::Interior | EdgeStatus::DegenerateInterior => {}
            EdgeStatus::Intersected => {
                let (fa, fb) = (primary.offset(a), primary.offset(b));
                let beta = fa / (fa - fb);
                let x = edge_intersection_point(
                    a,
                    b,
                    primary.normal(),
                    primary.signed_distance(),
                    primary.base_point(),
                )?;
                cut_points.push(x);
                let retained_start = status[i] == VertexStatus::Exterior;
                let (start, end) = if retained_start { (*a, x) } else { (x, *b) };
                edges.push(TruncatedEdge {
                    start,
                    end,
                    origin: EdgeOrigin::Truncated {
                        retained_start,
                        beta,
                    },
                    parent: (k, m),
                    co_normal,
                    length: (end - start).norm(),
                });
            }
        }
    }

    let has_interior = idx.iter().any(|&i| status[i] == VertexStatus::Interior);
    let (kind, immersed_area) = if exterior.is_empty() {
        (FaceKind::Empty, face.area())
    } else if cut_points.is_empty() && !has_interior {
        (FaceKind::Whole, 0.0)
    } else {
        // The retained part is bounded by truncated edges and by segments on
        // the primary plane; the latter drop out with an origin on that line.
        let origin = cut_points.iter().sum::<Vec3>() / cut_points.len() as f64;
        let retained = 0.5
            * edges
                .iter()
                .map(|e| (e.start - origin).dot(&e.co_normal) * e.length)
                .sum::<f64>();
        (FaceKind::Cut, face.area() - retained)
    };
    if kind == FaceKind::Empty {
        edges.clear();
        cut_points.clear();
    }

    Ok(TruncatedFace {
        kind,
        edges,
        exterior,
        cut_points,
        immersed_area,
        area: face.area(),
        normal: *face.normal(),
        anchor: *poly.face_vertex(k, 0),
    })
}

/// Signed-distance delimiters of a truncated face for the secondary normal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FaceDelimiters {
    /// Extremes of `λ2` over the vertices of the truncated face.
    pub face_min: f64,
    pub face_max: f64,
    /// Extremes of `λ2` over the face's points on the primary plane; `None`
    /// for faces the primary plane does not reach.
    pub triple: Option<(f64, f64)>,
}

/// Data for the triple-line branch of a cut face.
#[derive(Debug, Clone)]
pub(crate) struct TripleBranch {
    /// Signed distance at which the intersection line passes through `centre`.
    pub(crate) t_centre: f64,
    pub(crate) coeffs: Vec<EdgeCoefficient>,
}

#[derive(Debug, Clone)]
pub(crate) struct SecondaryFace {
    pub(crate) delimiters: FaceDelimiters,
    pub(crate) edges: Vec<SweptEdge>,
    /// Coefficients for an origin on the secondary line through the face centre.
    pub(crate) coeffs: Vec<EdgeCoefficient>,
    pub(crate) lambda_centre: f64,
    pub(crate) triple: Option<TripleBranch>,
    pub(crate) cut: bool,
    pub(crate) retained_area: f64,
    /// `⟨x_F − o(t), n_F⟩ = w0 − t·w1` for the foot point `o(t)` of the
    /// secondary plane.
    pub(crate) w0: f64,
    pub(crate) w1: f64,
    /// Same weight for an origin on the intersection line,
    /// `line_w0 − (t − t_ref)·line_w1`.
    pub(crate) line_w0: f64,
    pub(crate) line_w1: f64,
}

/// Range of `t` over which the intersection line meets `P^cut`, with the
/// parameter of the reference point on it.
#[derive(Debug, Clone, Copy)]
pub(crate) struct LineOrigin {
    pub(crate) t_lo: f64,
    pub(crate) t_hi: f64,
    pub(crate) t_ref: f64,
}

/// All static coefficients of the secondary volume function `α2(t)` on a
/// truncated polyhedron for a fixed normal `n2`.
#[derive(Debug, Clone)]
pub struct SecondaryStage<'t, 'p> {
    pub(crate) truncated: &'t TruncatedPolyhedron<'p>,
    pub(crate) n2: Vec3,
    pub(crate) frame: IntersectionFrame,
    pub(crate) line: Option<LineOrigin>,
    pub(crate) faces: Vec<Option<SecondaryFace>>,
    pub(crate) brackets: BracketTable,
}

impl<'t, 'p> SecondaryStage<'t, 'p> {
    pub fn new(
        truncated: &'t TruncatedPolyhedron<'p>,
        n2: &Vec3,
        gamma_tol: f64,
    ) -> Result<Self, TruncationError> {
        let primary = truncated.primary_plane();
        let base = *primary.base_point();
        let n1 = *primary.normal();
        let s = primary.signed_distance();
        let frame = IntersectionFrame::new(&n1, n2, s, &base, gamma_tol)?;
        let tol = truncated.zero_tol();
        let lambda = |x: &Vec3| (x - base).dot(n2);

        let all_levels: Vec<f64> = truncated
            .faces()
            .iter()
            .flat_map(|f| f.vertices().map(lambda))
            .collect();
        let brackets = BracketTable::from_values(all_levels, tol);

        let mut faces: Vec<Option<SecondaryFace>> = truncated
            .faces()
            .iter()
            .map(|f| {
                if f.kind == FaceKind::Empty {
                    return None;
                }
                Some(secondary_face(f, n2, &base, tol))
            })
            .collect();

        // While the intersection line crosses P^cut, volumes are taken about a
        // point on it. The point is built from the extreme cut points rather
        // than from the two plane equations, which lose accuracy as the
        // normals approach (anti)parallel.
        let mut line = None;
        let cut_points = truncated.faces().iter().flat_map(|f| f.cut_points.iter());
        if let Some(first) = cut_points.clone().next() {
            let (lo, hi) = cut_points.fold((*first, *first), |(lo, hi), p| {
                (
                    if lambda(p) < lambda(&lo) { *p } else { lo },
                    if lambda(p) > lambda(&hi) { *p } else { hi },
                )
            });
            let (t_lo, t_hi) = (lambda(&lo), lambda(&hi));
            if t_hi - t_lo > tol {
                let origin = 0.5 * (lo + hi);
                let rate = (hi - lo) / (t_hi - t_lo);
                for (sf, f) in faces.iter_mut().zip(truncated.faces()) {
                    if let Some(sf) = sf {
                        sf.line_w0 = (f.anchor - origin).dot(&f.normal);
                        sf.line_w1 = rate.dot(&f.normal);
                    }
                }
                line = Some(LineOrigin {
                    t_lo,
                    t_hi,
                    t_ref: 0.5 * (t_lo + t_hi),
                });
            }
        }

        Ok(Self {
            truncated,
            n2: *n2,
            frame,
            line,
            faces,
            brackets,
        })
    }

    pub fn truncated(&self) -> &'t TruncatedPolyhedron<'p> {
        self.truncated
    }

    pub fn normal(&self) -> &Vec3 {
        &self.n2
    }

    pub fn frame(&self) -> &IntersectionFrame {
        &self.frame
    }

    pub fn brackets(&self) -> &BracketTable {
        &self.brackets
    }

    /// Delimiters of face `k`; `None` for faces removed by the truncation.
    pub fn delimiters(&self, k: usize) -> Option<FaceDelimiters> {
        self.faces[k].as_ref().map(|f| f.delimiters)
    }

    /// Smallest and largest `λ2` over all points of `P^cut` on the primary
    /// plane.
    pub fn triple_range(&self) -> Option<(f64, f64)> {
        self.faces
            .iter()
            .flatten()
            .filter_map(|f| f.delimiters.triple)
            .fold(None, |acc, (lo, hi)| match acc {
                None => Some((lo, hi)),
                Some((a, b)) => Some((f64::min(a, lo), f64::max(b, hi))),
            })
    }
}

fn secondary_face(f: &TruncatedFace, n2: &Vec3, base: &Vec3, tol: f64) -> SecondaryFace {
    let lambda = |x: &Vec3| (x - base).dot(n2);
    let (face_min, face_max) = min_max(f.vertices().map(lambda));
    let centre = f.vertices().sum::<Vec3>() / (f.exterior.len() + f.cut_points.len()) as f64;
    let lambda_centre = lambda(&centre);
    let in_plane = n2 - n2.dot(&f.normal) * f.normal;
    let in_plane_sq = in_plane.norm_squared();

    let edges: Vec<SweptEdge> = f
        .edges
        .iter()
        .map(|e| SweptEdge::new(lambda(&e.start), lambda(&e.end), e.length))
        .collect();
    let coeffs = f
        .edges
        .iter()
        .map(|e| EdgeCoefficient {
            offset: (e.start - centre).dot(&e.co_normal),
            slope: if in_plane_sq > 0.0 {
                n2.dot(&e.co_normal) / in_plane_sq
            } else {
                0.0
            },
        })
        .collect();

    let mut triple_range = None;
    let mut triple = None;
    if f.kind == FaceKind::Cut {
        let (lo, hi) = extreme_points(&f.cut_points, &lambda);
        let (t_lo, t_hi) = (lambda(&lo), lambda(&hi));
        triple_range = Some((t_lo, t_hi));
        if t_hi - t_lo > tol {
            // The midpoint of the extreme cut points lies on both the primary
            // line and the secondary line at t_centre; the line origin moves
            // along the primary line at the rate below.
            let centre = 0.5 * (lo + hi);
            let rate = (hi - lo) / (t_hi - t_lo);
            triple = Some(TripleBranch {
                t_centre: 0.5 * (t_lo + t_hi),
                coeffs: f
                    .edges
                    .iter()
                    .map(|e| EdgeCoefficient {
                        offset: (e.start - centre).dot(&e.co_normal),
                        slope: rate.dot(&e.co_normal),
                    })
                    .collect(),
            });
        }
    }

    SecondaryFace {
        delimiters: FaceDelimiters {
            face_min,
            face_max,
            triple: triple_range,
        },
        edges,
        coeffs,
        lambda_centre,
        triple,
        cut: f.kind == FaceKind::Cut,
        retained_area: f.retained_area(),
        w0: (f.anchor - base).dot(&f.normal),
        w1: n2.dot(&f.normal),
        line_w0: 0.0,
        line_w1: 0.0,
    }
}

fn min_max(values: impl Iterator<Item = f64>) -> (f64, f64) {
    values.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| {
        (a.min(v), b.max(v))
    })
}

fn extreme_points(points: &[Vec3], lambda: &impl Fn(&Vec3) -> f64) -> (Vec3, Vec3) {
    let mut lo = points[0];
    let mut hi = points[0];
    for p in &points[1..] {
        if lambda(p) < lambda(&lo) {
            lo = *p;
        }
        if lambda(p) > lambda(&hi) {
            hi = *p;
        }
    }
    (lo, hi)
}
