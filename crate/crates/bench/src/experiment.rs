//! Sweeps over a sample grid and aggregation of the outcomes per cell.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use seqplic::cube::{baseline_position_secondary, BaselineResult, DEFAULT_BASELINE_MAX_ITER};
use seqplic::geometry::{Polyhedron, Vec3, DEFAULT_PLANARITY_TOL};
use seqplic::off::read_off;
use seqplic::oracle::{oracle_truncated_volume, HalfSpace};
use seqplic::positioning::{position_sequential, PositioningResult, Tolerances, TopologyClass};
use seqplic::shapes;

use crate::grid::SampleGrid;
use crate::HarnessError;

/// Topology classes in report order.
pub const CLASSES: [TopologyClass; 5] = TopologyClass::ALL;

fn class_index(c: TopologyClass) -> usize {
    CLASSES
        .iter()
        .position(|&k| k == c)
        .expect("every class is listed")
}

#[derive(Debug, Clone, PartialEq)]
pub enum ShapeSpec {
    Cube,
    Dodecahedron,
    NotchedCube,
    Off(PathBuf),
}

impl ShapeSpec {
    pub fn load(&self) -> Result<Polyhedron, HarnessError> {
        Ok(match self {
            ShapeSpec::Cube => shapes::unit_cube(),
            ShapeSpec::Dodecahedron => shapes::dodecahedron(),
            ShapeSpec::NotchedCube => shapes::notched_cube(),
            ShapeSpec::Off(path) => {
                read_off(path, DEFAULT_PLANARITY_TOL).map_err(|source| HarnessError::Shape {
                    path: path.clone(),
                    source,
                })?
            }
        })
    }

    pub fn is_cube(&self) -> bool {
        matches!(self, ShapeSpec::Cube)
    }
}

impl FromStr for ShapeSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "cube" => Ok(ShapeSpec::Cube),
            "dodeca" | "dodecahedron" => Ok(ShapeSpec::Dodecahedron),
            "notched" => Ok(ShapeSpec::NotchedCube),
            _ => match s.strip_prefix("off:") {
                Some(path) if !path.is_empty() => Ok(ShapeSpec::Off(PathBuf::from(path))),
                _ => Err(format!(
                    "unknown shape '{s}'; expected cube, dodeca, notched or off:<path>"
                )),
            },
        }
    }
}

impl fmt::Display for ShapeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ShapeSpec::Cube => write!(f, "cube"),
            ShapeSpec::Dodecahedron => write!(f, "dodeca"),
            ShapeSpec::NotchedCube => write!(f, "notched"),
            ShapeSpec::Off(p) => write!(f, "off:{}", p.display()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Proposed,
    Baseline,
    Both,
}

impl Method {
    pub fn runs_proposed(self) -> bool {
        matches!(self, Method::Proposed | Method::Both)
    }

    pub fn runs_baseline(self) -> bool {
        matches!(self, Method::Baseline | Method::Both)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExperimentConfig {
    pub tolerances: Tolerances,
    /// Termination threshold of the baseline on the whole-cell fraction.
    pub baseline_eps: f64,
    /// Seeds the choice of audited instances.
    pub seed: u64,
    /// Share of instances re-checked against the clipping oracle.
    pub audit_rate: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            tolerances: Tolerances::default(),
            baseline_eps: 1e-12,
            seed: 0,
            audit_rate: 0.01,
        }
    }
}

/// Count and summed secondary truncations of one topology class.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ClassStats {
    pub count: usize,
    pub truncations: usize,
}

impl ClassStats {
    fn add(&mut self, truncations: usize) {
        self.count += 1;
        self.truncations += truncations;
    }

    fn merge(&mut self, other: &ClassStats) {
        self.count += other.count;
        self.truncations += other.truncations;
    }

    /// Average truncation count, `None` for an empty class.
    pub fn average(&self) -> Option<f64> {
        (self.count > 0).then(|| self.truncations as f64 / self.count as f64)
    }
}

/// Aggregates of one (α1, α2) pair over all normal pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct CellStats {
    pub alpha1: f64,
    pub alpha2: f64,
    pub proposed: [ClassStats; 5],
    pub baseline: [ClassStats; 5],
    /// Instances classified by both methods, and how many disagree.
    pub compared: usize,
    pub mismatches: usize,
}

impl CellStats {
    pub fn total(stats: &[ClassStats; 5]) -> ClassStats {
        let mut t = ClassStats::default();
        for s in stats {
            t.merge(s);
        }
        t
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct AuditSummary {
    pub audited: usize,
    pub failures: usize,
    /// Largest `| |P ∩ phase 2| / |P| − α2 |` seen.
    pub max_error: f64,
}

/// A failed instance, with everything needed to replay it.
#[derive(Debug, Clone, PartialEq)]
pub struct Defect {
    pub instance: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AggregateReport {
    pub shape: String,
    pub method: Method,
    pub instances: usize,
    pub cells: Vec<CellStats>,
    /// `mismatch[p][b]`: instances classified `p` by the proposed method and
    /// `b` by the baseline.
    pub mismatch: [[usize; 5]; 5],
    pub audit: AuditSummary,
    pub max_residual_primary: f64,
    pub max_residual_secondary: f64,
    pub defects: Vec<Defect>,
}

impl AggregateReport {
    /// Class totals over the whole grid.
    pub fn totals(&self, baseline: bool) -> [ClassStats; 5] {
        let mut out = [ClassStats::default(); 5];
        for cell in &self.cells {
            let stats = if baseline {
                &cell.baseline
            } else {
                &cell.proposed
            };
            for (o, s) in out.iter_mut().zip(stats) {
                o.merge(s);
            }
        }
        out
    }

    pub fn compared(&self) -> usize {
        self.cells.iter().map(|c| c.compared).sum()
    }

    pub fn mismatches(&self) -> usize {
        self.cells.iter().map(|c| c.mismatches).sum()
    }
}

struct CellOutcome {
    stats: CellStats,
    mismatch: [[usize; 5]; 5],
    audit: AuditSummary,
    max_residual_primary: f64,
    max_residual_secondary: f64,
    defects: Vec<Defect>,
}

fn replay_string(shape: &str, n1: &Vec3, a1: f64, n2: &Vec3, a2: f64) -> String {
    format!(
        "shape={shape} n1=[{:?},{:?},{:?}] alpha1={a1:?} n2=[{:?},{:?},{:?}] alpha2={a2:?}",
        n1.x, n1.y, n1.z, n2.x, n2.y, n2.z
    )
}

/// Runs every instance of `grid` on `poly`.
///
/// The baseline only runs on cubes and only for non-degenerate normal
/// pairs. Results do not depend on the number of threads.
pub fn run_experiment(
    grid: &SampleGrid,
    shape: &ShapeSpec,
    method: Method,
    threads: usize,
    config: &ExperimentConfig,
) -> Result<AggregateReport, HarnessError> {
    let poly = shape.load()?;
    if method == Method::Baseline && !shape.is_cube() {
        return Err(HarnessError::BaselineNeedsCube(shape.to_string()));
    }
    let with_baseline = method.runs_baseline() && shape.is_cube();
    let with_proposed = method.runs_proposed();
    let name = shape.to_string();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| HarnessError::Threads(e.to_string()))?;
    let outcomes: Vec<CellOutcome> = pool.install(|| {
        (0..grid.pairs.len())
            .into_par_iter()
            .map(|cell| {
                run_cell(
                    grid,
                    cell,
                    &poly,
                    &name,
                    with_proposed,
                    with_baseline,
                    config,
                )
            })
            .collect()
    });

    let mut report = AggregateReport {
        shape: name,
        method,
        instances: grid.instance_count(),
        cells: Vec::with_capacity(outcomes.len()),
        mismatch: [[0; 5]; 5],
        audit: AuditSummary::default(),
        max_residual_primary: 0.0,
        max_residual_secondary: 0.0,
        defects: Vec::new(),
    };
    for o in outcomes {
        for (row, orow) in report.mismatch.iter_mut().zip(&o.mismatch) {
            for (x, y) in row.iter_mut().zip(orow) {
                *x += y;
            }
        }
        report.audit.audited += o.audit.audited;
        report.audit.failures += o.audit.failures;
        report.audit.max_error = report.audit.max_error.max(o.audit.max_error);
        report.max_residual_primary = report.max_residual_primary.max(o.max_residual_primary);
        report.max_residual_secondary = report.max_residual_secondary.max(o.max_residual_secondary);
        report.defects.extend(o.defects);
        report.cells.push(o.stats);
    }
    Ok(report)
}

fn run_cell(
    grid: &SampleGrid,
    cell: usize,
    poly: &Polyhedron,
    shape: &str,
    with_proposed: bool,
    with_baseline: bool,
    config: &ExperimentConfig,
) -> CellOutcome {
    let (alpha1, alpha2) = grid.pair_values(cell);
    let tol = &config.tolerances;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed.wrapping_add(cell as u64));
    let mut out = CellOutcome {
        stats: CellStats {
            alpha1,
            alpha2,
            proposed: [ClassStats::default(); 5],
            baseline: [ClassStats::default(); 5],
            compared: 0,
            mismatches: 0,
        },
        mismatch: [[0; 5]; 5],
        audit: AuditSummary::default(),
        max_residual_primary: 0.0,
        max_residual_secondary: 0.0,
        defects: Vec::new(),
    };
    let volume = poly.volume();

    for n1 in &grid.normals {
        for n2 in &grid.normals {
            let audit = rng.random_bool(config.audit_rate);
            let defect = |message: String| Defect {
                instance: replay_string(shape, n1, alpha1, n2, alpha2),
                message,
            };

            let mut proposed: Option<PositioningResult> = None;
            if with_proposed {
                match position_sequential(poly, n1, alpha1, n2, alpha2, tol) {
                    Ok(r) => {
                        out.max_residual_primary = out.max_residual_primary.max(r.residual_primary);
                        out.max_residual_secondary =
                            out.max_residual_secondary.max(r.residual_secondary);
                        if r.residual_primary > tol.vof_tol || r.residual_secondary > tol.vof_tol {
                            out.defects.push(defect(format!(
                                "residuals {:e}, {:e} exceed {:e}",
                                r.residual_primary, r.residual_secondary, tol.vof_tol
                            )));
                        }
                        out.stats.proposed[class_index(r.topology)].add(r.truncations_secondary);
                        if audit {
                            let enclosed = oracle_truncated_volume(
                                poly,
                                &[
                                    HalfSpace::new(-n1, -r.s_star),
                                    HalfSpace::new(*n2, r.t_star),
                                ],
                            );
                            let err = (enclosed / volume - alpha2).abs();
                            out.audit.audited += 1;
                            out.audit.max_error = out.audit.max_error.max(err);
                            if err > tol.vof_tol {
                                out.audit.failures += 1;
                                out.defects
                                    .push(defect(format!("oracle audit error {err:e}")));
                            }
                        }
                        proposed = Some(r);
                    }
                    Err(e) => out.defects.push(defect(e.to_string())),
                }
            }

            let degenerate = proposed.is_some_and(|r| {
                matches!(
                    r.topology,
                    TopologyClass::ParallelDegenerate | TopologyClass::AntiparallelDegenerate
                )
            }) || (1.0 - n1.dot(n2).abs()) <= tol.gamma_tol;
            if !with_baseline || degenerate {
                continue;
            }
            let baseline: BaselineResult = match baseline_position_secondary(
                poly,
                n1,
                alpha1,
                n2,
                alpha2,
                config.baseline_eps,
                DEFAULT_BASELINE_MAX_ITER,
            ) {
                Ok(b) => b,
                Err(e) => {
                    out.defects.push(defect(format!("baseline: {e}")));
                    continue;
                }
            };
            out.stats.baseline[class_index(baseline.topology)].add(baseline.truncations);
            if let Some(r) = proposed {
                out.stats.compared += 1;
                out.mismatch[class_index(r.topology)][class_index(baseline.topology)] += 1;
                if r.topology != baseline.topology {
                    out.stats.mismatches += 1;
                }
            }
        }
    }
    out
}
