use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use seqplic::geometry::{Polyhedron, Vec3, DEFAULT_ZERO_TOL};
use seqplic::oracle::{oracle_truncated_volume, HalfSpace};
use seqplic::plane::DEFAULT_GAMMA_TOL;
use seqplic::shapes;
use seqplic::truncation::truncate_faces;
use seqplic::volume::PrimaryStage;

fn random_unit(rng: &mut impl Rng) -> Vec3 {
    loop {
        let v = Vec3::new(
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        );
        let n = v.norm();
        if n > 0.1 && n <= 1.0 {
            return v / n;
        }
    }
}

fn range(poly: &Polyhedron, n: &Vec3) -> (f64, f64) {
    poly.projections(n)
        .into_iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| {
            (a.min(v), b.max(v))
        })
}

fn all_shapes() -> Vec<(&'static str, Polyhedron)> {
    vec![
        ("cube", shapes::unit_cube()),
        ("dodecahedron", shapes::dodecahedron()),
        ("notched", shapes::notched_cube()),
    ]
}

#[test]
fn single_truncations_match_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for (name, poly) in all_shapes() {
        for _ in 0..3400 {
            let n = random_unit(&mut rng);
            let (lo, hi) = range(&poly, &n);
            let s = rng.random_range(lo - 0.05..hi + 0.05);
            let got = PrimaryStage::new(&poly, &n, DEFAULT_ZERO_TOL)
                .evaluate(s)
                .value
                * poly.volume();
            let want = oracle_truncated_volume(&poly, &[HalfSpace::new(n, s)]);
            assert!(
                (got - want).abs() <= 1e-12 * poly.volume(),
                "{name}: n = {n:?}, s = {s}: {got} vs {want}"
            );
        }
    }
}

#[test]
fn double_truncations_match_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for (name, poly) in all_shapes() {
        let mut checked = 0;
        while checked < 3400 {
            let n1 = random_unit(&mut rng);
            let n2 = random_unit(&mut rng);
            let (lo, hi) = range(&poly, &n1);
            let s = rng.random_range(lo..hi);
            let Ok(cut) = truncate_faces(&poly, &n1, s, DEFAULT_ZERO_TOL) else {
                continue;
            };
            let stage = cut.with_secondary_normal(&n2, DEFAULT_GAMMA_TOL).unwrap();
            let (tlo, thi) = (stage.brackets().min(), stage.brackets().max());
            for _ in 0..4 {
                let t = rng.random_range(tlo - 0.05..thi + 0.05);
                let got = stage.volume(t);
                let want = oracle_truncated_volume(
                    &poly,
                    &[HalfSpace::new(-n1, -s), HalfSpace::new(n2, t)],
                );
                assert!(
                    (got - want).abs() <= 1e-12 * poly.volume(),
                    "{name}: n1 = {n1:?}, s = {s}, n2 = {n2:?}, t = {t}: {got} vs {want}"
                );
                let frac = stage.evaluate(t).value * cut.cut_volume();
                assert!((frac - want).abs() <= 1e-12 * poly.volume());
            }
            checked += 4;
        }
    }
}

#[test]
fn vertex_aligned_truncations_match_oracle() {
    // Planes through vertices and along faces exercise the degenerate statuses.
    let poly = shapes::notched_cube();
    let normals = [
        Vec3::x(),
        Vec3::y(),
        Vec3::z(),
        Vec3::new(1.0, 1.0, 0.0).normalize(),
        Vec3::new(1.0, 0.0, 1.0).normalize(),
        Vec3::new(1.0, 1.0, 1.0).normalize(),
        Vec3::new(-1.0, 2.0, 0.5).normalize(),
    ];
    for n1 in &normals {
        for &s in poly.projections(n1).iter() {
            let Ok(cut) = truncate_faces(&poly, n1, s, DEFAULT_ZERO_TOL) else {
                continue;
            };
            for n2 in &normals {
                for sign in [1.0, -1.0] {
                    let n2 = sign * n2;
                    let Ok(stage) = cut.with_secondary_normal(&n2, DEFAULT_GAMMA_TOL) else {
                        continue;
                    };
                    for &t in stage.brackets().values() {
                        let got = stage.volume(t);
                        let want = oracle_truncated_volume(
                            &poly,
                            &[HalfSpace::new(-n1, -s), HalfSpace::new(n2, t)],
                        );
                        assert!(
                            (got - want).abs() <= 1e-12,
                            "n1 = {n1:?}, s = {s}, n2 = {n2:?}, t = {t}: {got} vs {want}"
                        );
                    }
                }
            }
        }
    }
}

#[test]
fn nearly_aligned_normals_match_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for (name, poly) in all_shapes() {
        for _ in 0..300 {
            let n1 = random_unit(&mut rng);
            let eps = 10f64.powf(rng.random_range(-5.0..-1.0));
            let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            let n2 = (sign * n1 + eps * random_unit(&mut rng)).normalize();
            let (lo, hi) = range(&poly, &n1);
            let s = rng.random_range(lo..hi);
            let Ok(cut) = truncate_faces(&poly, &n1, s, DEFAULT_ZERO_TOL) else {
                continue;
            };
            let Ok(stage) = cut.with_secondary_normal(&n2, DEFAULT_GAMMA_TOL) else {
                continue;
            };
            let (tlo, thi) = (stage.brackets().min(), stage.brackets().max());
            for _ in 0..4 {
                let t = rng.random_range(tlo..thi);
                let got = stage.volume(t);
                let want = oracle_truncated_volume(
                    &poly,
                    &[HalfSpace::new(-n1, -s), HalfSpace::new(n2, t)],
                );
                assert!(
                    (got - want).abs() <= 1e-12 * poly.volume(),
                    "{name}: n1 = {n1:?}, s = {s}, n2 = {n2:?}, t = {t}: {got} vs {want}"
                );
            }
        }
    }
}
