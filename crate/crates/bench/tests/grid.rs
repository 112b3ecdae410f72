use plicbench::grid::{fraction_set, generate_grid, normal_set};
use seqplic::geometry::Vec3;

#[test]
fn normal_set_sizes() {
    for m in 2..12 {
        assert_eq!(normal_set(m).len(), 2 + 2 * m * (m - 1));
    }
    assert_eq!(normal_set(10).len(), 182);
}

#[test]
fn octahedral_directions_at_two() {
    let found = normal_set(2);
    assert_eq!(found.len(), 6);
    for want in [
        Vec3::x(),
        -Vec3::x(),
        Vec3::y(),
        -Vec3::y(),
        Vec3::z(),
        -Vec3::z(),
    ] {
        assert!(found.contains(&want), "{want:?} missing from {found:?}");
    }
}

#[test]
fn normals_are_distinct_units() {
    let set = normal_set(6);
    for (i, a) in set.iter().enumerate() {
        assert!((a.norm() - 1.0).abs() < 1e-15);
        for b in &set[i + 1..] {
            assert!((a - b).norm() > 1e-6);
        }
    }
}

#[test]
fn fraction_tails() {
    let f = fraction_set(10, 1e-9, 1e-5);
    assert_eq!(f.len(), 20);
    for v in [
        1e-9,
        1e-8,
        1e-7,
        1e-6,
        1e-5,
        1.0 - 1e-5,
        1.0 - 1e-8,
        1.0 - 2e-9,
        1e-4,
        1.0 - 1e-4,
    ] {
        assert!(f.iter().any(|x| (x - v).abs() < 1e-18), "{v}");
    }
}

#[test]
fn pairs_are_admissible() {
    let g = generate_grid(6, 10, 1e-9, 1e-5);
    for p in 0..g.pairs.len() {
        let (a1, a2) = g.pair_values(p);
        assert!((1e-9..=1.0 - 2e-9).contains(&a1));
        assert!((1e-9..=1.0 - 2e-9).contains(&a2));
        assert!(a1 + a2 <= 1.0 - 1e-9 + 1e-15);
    }
    // The extreme pair (ε1, 1 − 2ε1) sums to 1 − ε1 and is kept.
    assert!(g
        .pairs
        .iter()
        .any(|&(i, j)| g.fractions[i] == 1e-9 && g.fractions[j] == 1.0 - 2e-9));
}

#[test]
fn full_grid_instance_count() {
    let g = generate_grid(10, 20, 1e-9, 1e-5);
    let n = g.instance_count() as f64;
    assert!((n / 1.45e7 - 1.0).abs() < 0.01, "{n}");
}

#[test]
fn decades_are_exact_literals() {
    let f = fraction_set(10, 1e-9, 1e-5);
    for v in [
        1e-9,
        1e-8,
        1e-7,
        1e-6,
        1e-5,
        1.0 - 1e-5,
        1.0 - 1e-8,
        1.0 - 2e-9,
    ] {
        assert!(f.contains(&v), "{v}");
    }
}
