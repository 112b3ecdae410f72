//! Root finding on piecewise-cubic volume functions and the two-plane
//! positioning driver.

use std::f64::consts::PI;

use thiserror::Error;

use crate::geometry::{Polyhedron, Vec3, DEFAULT_ZERO_TOL};
use crate::plane::{degeneracy_class, DegeneracyClass, DEFAULT_GAMMA_TOL};
use crate::truncation::{truncate_faces, SecondaryStage, TruncationError};
use crate::volume::{BracketTable, PrimaryStage, VolumeEvaluation};

pub const DEFAULT_VOF_TOL: f64 = 1e-12;
pub const DEFAULT_MAX_ITER: usize = 50;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PositioningError {
    #[error("volume fractions ({alpha1}, {alpha2}) are not admissible")]
    InfeasibleFractions { alpha1: f64, alpha2: f64 },
    #[error("no root for target {target} after {iterations} evaluations")]
    NoConvergence { target: f64, iterations: usize },
    #[error("target fraction {0} outside (0, 1)")]
    InvalidTarget(f64),
    #[error(transparent)]
    Truncation(#[from] TruncationError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Length tolerance for vertex status and bracket merging.
    pub zero_tol: f64,
    /// Acceptable volume-fraction error.
    pub vof_tol: f64,
    /// Threshold on `1 − |⟨n1, n2⟩|` below which the normals count as aligned.
    pub gamma_tol: f64,
    pub max_iter: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            zero_tol: DEFAULT_ZERO_TOL,
            vof_tol: DEFAULT_VOF_TOL,
            gamma_tol: DEFAULT_GAMMA_TOL,
            max_iter: DEFAULT_MAX_ITER,
        }
    }
}

/// How the secondary plane meets the primary phase boundary inside the cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TopologyClass {
    /// All three phases meet along a line inside the cell.
    Triple,
    /// The primary interface lies entirely inside the second phase.
    FullyWetted,
    /// The second phase does not touch the primary interface.
    NonWetted,
    ParallelDegenerate,
    AntiparallelDegenerate,
}

impl TopologyClass {
    pub const ALL: [TopologyClass; 5] = [
        TopologyClass::Triple,
        TopologyClass::FullyWetted,
        TopologyClass::NonWetted,
        TopologyClass::ParallelDegenerate,
        TopologyClass::AntiparallelDegenerate,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TopologyClass::Triple => "triple",
            TopologyClass::FullyWetted => "fully_wetted",
            TopologyClass::NonWetted => "non_wetted",
            TopologyClass::ParallelDegenerate => "parallel_degenerate",
            TopologyClass::AntiparallelDegenerate => "antiparallel_degenerate",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PositioningResult {
    pub s_star: f64,
    pub t_star: f64,
    pub truncations_primary: usize,
    pub truncations_secondary: usize,
    pub topology: TopologyClass,
    /// `|α1(s*) − α1*|`.
    pub residual_primary: f64,
    /// Error of the second phase volume relative to the whole cell.
    pub residual_secondary: f64,
}

/// Starting point from the inverse of the smoothstep-shaped cubic through
/// `(s_min, 0)` and `(s_max, 1)` with zero end slopes.
pub fn initial_guess(alpha_ref: f64, s_min: f64, s_max: f64) -> f64 {
    let a = alpha_ref.clamp(0.0, 1.0);
    let u = 0.5 - (((2.0 * a - 1.0).acos() - 2.0 * PI) / 3.0).cos();
    s_min + (s_max - s_min) * u
}

/// Finds `s` with `α(s) = alpha_ref` for a monotone, piecewise-cubic `α`
/// whose breakpoints are listed in `table`.
///
/// Every call of `evaluator` counts as one truncation; the returned pair is
/// the position and that count.
pub fn find_position<F>(
    mut evaluator: F,
    table: &BracketTable,
    alpha_ref: f64,
    vof_tol: f64,
    max_iter: usize,
) -> Result<(f64, usize), PositioningError>
where
    F: FnMut(f64) -> VolumeEvaluation,
{
    if !(alpha_ref > 0.0 && alpha_ref < 1.0) {
        return Err(PositioningError::InvalidTarget(alpha_ref));
    }
    if table.bracket_count() == 0 {
        return Ok((table.min(), 0));
    }
    let slack = 0.25 * vof_tol;
    let (mut ilo, mut ihi) = (0, table.bracket_count() - 1);
    let mut s = initial_guess(alpha_ref, table.min(), table.max());
    let mut count = 0;

    while count < max_iter {
        let eval = evaluator(s);
        count += 1;
        let i = table.bracket_of(s);
        let (a, b) = table.bounds(i);
        let (sa, sb) = (eval.taylor(s, a), eval.taylor(s, b));
        if alpha_ref >= sa - slack && alpha_ref <= sb + slack {
            return Ok((bracket_root(&eval, s, a, b, alpha_ref), count));
        }
        if alpha_ref > sb {
            ilo = ilo.max(i + 1);
        } else {
            ihi = ihi.min(i.saturating_sub(1));
            if i == 0 {
                ilo = 1;
            }
        }
        if ilo > ihi {
            // Only reachable through rounding at a bracket boundary.
            let edge = if alpha_ref > sb { b } else { a };
            return Ok((edge, count));
        }
        s = match quadratic_step(&eval, alpha_ref) {
            Some(d) if in_brackets(table, s + d, ilo, ihi) => s + d,
            _ => {
                let (l, r) = table.bounds((ilo + ihi) / 2);
                0.5 * (l + r)
            }
        };
    }
    Err(PositioningError::NoConvergence {
        target: alpha_ref,
        iterations: count,
    })
}

fn in_brackets(table: &BracketTable, s: f64, ilo: usize, ihi: usize) -> bool {
    let (lo, _) = table.bounds(ilo);
    let (_, hi) = table.bounds(ihi);
    s > lo && s <= hi && (ilo..=ihi).contains(&table.bracket_of(s))
}

/// Step `δ` solving `α + α′δ + ½α″δ² = target`, taking the root closest to 0.
fn quadratic_step(e: &VolumeEvaluation, target: f64) -> Option<f64> {
    let r = target - e.value;
    let (a, b, c) = (0.5 * e.d2, e.d1, -r);
    if a.abs() <= 1e-14 * b.abs() {
        return (b != 0.0).then(|| r / b);
    }
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return None;
    }
    let q = -0.5 * (b + b.signum() * disc.sqrt());
    let roots = [q / a, if q != 0.0 { c / q } else { f64::NAN }];
    roots
        .into_iter()
        .filter(|d| d.is_finite() && d * r >= 0.0)
        .min_by(|x, y| x.abs().total_cmp(&y.abs()))
}

/// Root of the local cubic in `[a, b]`: closed form, then safeguarded Newton.
fn bracket_root(e: &VolumeEvaluation, s: f64, a: f64, b: f64, target: f64) -> f64 {
    let c = [e.value - target, e.d1, 0.5 * e.d2, e.d3 / 6.0];
    let p = |y: f64| c[0] + y * (c[1] + y * (c[2] + y * c[3]));
    let dp = |y: f64| c[1] + y * (2.0 * c[2] + y * 3.0 * c[3]);
    let (mut lo, mut hi) = (a - s, b - s);
    if p(lo) >= 0.0 {
        return a;
    }
    if p(hi) <= 0.0 {
        return b;
    }
    let mid = 0.5 * (lo + hi);
    let mut y = cubic_roots(c)
        .into_iter()
        .filter(|r| *r >= lo && *r <= hi)
        .min_by(|x, y| (x - mid).abs().total_cmp(&(y - mid).abs()))
        .unwrap_or(mid);
    for _ in 0..60 {
        let f = p(y);
        if f == 0.0 {
            break;
        }
        if f < 0.0 {
            lo = y;
        } else {
            hi = y;
        }
        let d = dp(y);
        let mut next = y - f / d;
        if !(d > 0.0 && next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - y).abs() <= 4.0 * f64::EPSILON * (s.abs() + y.abs()) {
            y = next;
            break;
        }
        y = next;
    }
    s + y
}

/// Real roots of `c0 + c1·y + c2·y² + c3·y³`.
pub fn cubic_roots(c: [f64; 4]) -> Vec<f64> {
    let scale = c[1].abs().max(c[2].abs()).max(c[0].abs());
    if c[3].abs() <= 1e-14 * scale {
        return quadratic_roots(c[0], c[1], c[2]);
    }
    // Depressed cubic x³ + p·x + q with y = x − b/3.
    let (b, cc, d) = (c[2] / c[3], c[1] / c[3], c[0] / c[3]);
    let shift = -b / 3.0;
    let p = cc - b * b / 3.0;
    let q = 2.0 * b * b * b / 27.0 - b * cc / 3.0 + d;
    let disc = (q / 2.0).powi(2) + (p / 3.0).powi(3);
    if disc > 0.0 {
        let u = (-q / 2.0 + disc.sqrt()).cbrt();
        let v = (-q / 2.0 - disc.sqrt()).cbrt();
        vec![u + v + shift]
    } else if p == 0.0 {
        vec![shift]
    } else {
        let m = 2.0 * (-p / 3.0).sqrt();
        let arg = (3.0 * q / (p * m)).clamp(-1.0, 1.0);
        let theta = arg.acos() / 3.0;
        (0..3)
            .map(|k| m * (theta - 2.0 * PI * k as f64 / 3.0).cos() + shift)
            .collect()
    }
}

fn quadratic_roots(c0: f64, c1: f64, c2: f64) -> Vec<f64> {
    if c2 == 0.0 {
        return if c1 != 0.0 {
            vec![-c0 / c1]
        } else {
            Vec::new()
        };
    }
    let disc = c1 * c1 - 4.0 * c2 * c0;
    if disc < 0.0 {
        return Vec::new();
    }
    let q = -0.5 * (c1 + c1.signum() * disc.sqrt());
    let mut r = vec![q / c2];
    if q != 0.0 {
        r.push(c0 / q);
    }
    r
}

/// Topology of the secondary plane at `t_star` relative to the primary cap.
pub fn classify_topology(stage: &SecondaryStage<'_, '_>, t_star: f64) -> TopologyClass {
    let tol = stage.truncated().zero_tol();
    match stage.triple_range() {
        Some((lo, _)) if t_star <= lo + tol => TopologyClass::NonWetted,
        Some((_, hi)) if t_star >= hi - tol => TopologyClass::FullyWetted,
        Some(_) => TopologyClass::Triple,
        None => TopologyClass::NonWetted,
    }
}

/// Checks `0 < α1`, `0 < α2` and `α1 + α2 < 1`.
pub fn check_fractions(alpha1: f64, alpha2: f64) -> Result<(), PositioningError> {
    let ok = alpha1 > 0.0 && alpha2 > 0.0 && alpha1 + alpha2 < 1.0;
    if ok {
        Ok(())
    } else {
        Err(PositioningError::InfeasibleFractions { alpha1, alpha2 })
    }
}

/// Solves `α(s) = alpha` for a single plane on the whole cell.
pub fn position_single(
    poly: &Polyhedron,
    n: &Vec3,
    alpha: f64,
    tol: &Tolerances,
) -> Result<(f64, usize), PositioningError> {
    let stage = PrimaryStage::new(poly, n, tol.zero_tol);
    find_position(
        |s| stage.evaluate(s),
        stage.brackets(),
        alpha,
        tol.vof_tol,
        tol.max_iter,
    )
}

/// Places the primary plane `(n1, s*)` enclosing `alpha1` of `poly`, then the
/// secondary plane `(n2, t*)` enclosing `alpha2` of `poly` inside the region
/// the first plane leaves over.
pub fn position_sequential(
    poly: &Polyhedron,
    n1: &Vec3,
    alpha1: f64,
    n2: &Vec3,
    alpha2: f64,
    tol: &Tolerances,
) -> Result<PositioningResult, PositioningError> {
    check_fractions(alpha1, alpha2)?;
    let (s_star, truncations_primary) = position_single(poly, n1, alpha1, tol)?;
    let primary = PrimaryStage::new(poly, n1, tol.zero_tol);
    let residual_primary = (primary.evaluate(s_star).value - alpha1).abs();

    match degeneracy_class(n1, n2, tol.gamma_tol) {
        DegeneracyClass::Parallel => {
            let (t_star, count) = position_single(poly, n2, alpha1 + alpha2, tol)?;
            let secondary = PrimaryStage::new(poly, n2, tol.zero_tol);
            let enclosed = secondary.evaluate(t_star).value - primary.evaluate(s_star).value;
            Ok(PositioningResult {
                s_star,
                t_star,
                truncations_primary,
                truncations_secondary: count,
                topology: TopologyClass::ParallelDegenerate,
                residual_primary,
                residual_secondary: (enclosed - alpha2).abs(),
            })
        }
        DegeneracyClass::Antiparallel => {
            let (t_star, count) = position_single(poly, n2, alpha2, tol)?;
            let secondary = PrimaryStage::new(poly, n2, tol.zero_tol);
            Ok(PositioningResult {
                s_star,
                t_star,
                truncations_primary,
                truncations_secondary: count,
                topology: TopologyClass::AntiparallelDegenerate,
                residual_primary,
                residual_secondary: (secondary.evaluate(t_star).value - alpha2).abs(),
            })
        }
        DegeneracyClass::General => {
            let cut = truncate_faces(poly, n1, s_star, tol.zero_tol)?;
            let stage = cut.with_secondary_normal(n2, tol.gamma_tol)?;
            // Rescale to P^cut using its actual volume, so that the second
            // phase holds alpha2 of the whole cell even when s* carries a
            // residual.
            let ratio = poly.volume() / cut.cut_volume();
            let target = alpha2 * ratio;
            let (t_star, count) = find_position(
                |t| stage.evaluate(t),
                stage.brackets(),
                target,
                tol.vof_tol * ratio,
                tol.max_iter,
            )?;
            let enclosed = stage.volume(t_star) / poly.volume();
            Ok(PositioningResult {
                s_star,
                t_star,
                truncations_primary,
                truncations_secondary: count,
                topology: classify_topology(&stage, t_star),
                residual_primary,
                residual_secondary: (enclosed - alpha2).abs(),
            })
        }
    }
}
