//! Sample sets of normals and volume-fraction pairs.

use std::f64::consts::PI;

use seqplic::geometry::Vec3;

/// Normals and admissible volume-fraction pairs for one experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleGrid {
    pub m_normal: usize,
    pub m_vof: usize,
    pub eps1: f64,
    pub eps2: f64,
    pub normals: Vec<Vec3>,
    /// Sorted ascending.
    pub fractions: Vec<f64>,
    /// Index pairs into `fractions` with `α1 + α2 ≤ 1 − eps1`.
    pub pairs: Vec<(usize, usize)>,
}

impl SampleGrid {
    pub fn normal_pair_count(&self) -> usize {
        self.normals.len() * self.normals.len()
    }

    /// Number of (α1, α2, n1, n2) instances.
    pub fn instance_count(&self) -> usize {
        self.pairs.len() * self.normal_pair_count()
    }

    pub fn pair_values(&self, pair: usize) -> (f64, f64) {
        let (i, j) = self.pairs[pair];
        (self.fractions[i], self.fractions[j])
    }
}

/// Components this small are rounding residue of `cos(π/2)` and friends;
/// they are set to zero so that axis-aligned normals are exact.
const COMPONENT_SNAP: f64 = 1e-15;

/// Spherical lattice `φ ∈ (π/M)·{1…2M}`, `θ ∈ (π/M)·{0…M}`, with the
/// poles listed once each.
pub fn normal_set(m: usize) -> Vec<Vec3> {
    let step = PI / m as f64;
    let mut out = vec![Vec3::z()];
    for j in 1..m {
        let theta = step * j as f64;
        for i in 1..=2 * m {
            let phi = step * i as f64;
            let mut n = Vec3::new(
                phi.cos() * theta.sin(),
                phi.sin() * theta.sin(),
                theta.cos(),
            );
            for c in n.iter_mut() {
                if c.abs() < COMPONENT_SNAP {
                    *c = 0.0;
                }
            }
            out.push(n.normalize());
        }
    }
    out.push(-Vec3::z());
    out
}

/// `M` linearly spaced fractions in `[1e-4, 1 − 1e-4]` plus logarithmic
/// tails towards 0 and 1.
pub fn fraction_set(m: usize, eps1: f64, eps2: f64) -> Vec<f64> {
    let lin_lo = 1e-4;
    let mut out: Vec<f64> = (0..m)
        .map(|k| lin_lo + k as f64 / (m - 1) as f64 * (1.0 - 2.0 * lin_lo))
        .collect();
    // Decades from eps1 up to eps2.
    // Shifting the decimal exponent keeps 1e-7 exactly the literal 1e-7.
    let decades = (eps2 / eps1).log10().round() as i32;
    let text = format!("{eps1:e}");
    let (mantissa, exponent) = text.split_once('e').expect("exponent notation");
    let exponent: i32 = exponent.parse().expect("integer exponent");
    for k in 0..=decades {
        let v: f64 = format!("{mantissa}e{}", exponent + k)
            .parse()
            .expect("decimal literal");
        out.push(v);
        out.push(if k == 0 { 1.0 - 2.0 * eps1 } else { 1.0 - v });
    }
    out.sort_by(f64::total_cmp);
    out.dedup();
    out
}

/// Builds the sample grid; `m_normal` and `m_vof` must be at least 2.
pub fn generate_grid(m_normal: usize, m_vof: usize, eps1: f64, eps2: f64) -> SampleGrid {
    assert!(
        m_normal >= 2 && m_vof >= 2,
        "grid resolutions must be at least 2"
    );
    let normals = normal_set(m_normal);
    let fractions = fraction_set(m_vof, eps1, eps2);
    // A little slack keeps pairs that sum to 1 − eps1 up to rounding.
    let limit = 1.0 - eps1 + 4.0 * f64::EPSILON;
    let mut pairs = Vec::new();
    for i in 0..fractions.len() {
        for j in 0..fractions.len() {
            if fractions[i] + fractions[j] <= limit {
                pairs.push((i, j));
            }
        }
    }
    SampleGrid {
        m_normal,
        m_vof,
        eps1,
        eps2,
        normals,
        fractions,
        pairs,
    }
}
