//! Built-in test polyhedra.

use crate::geometry::{Polyhedron, Vec3, DEFAULT_PLANARITY_TOL};

/// Axis-aligned cuboid with minimum corner `min` and edge lengths `size`.
pub fn cuboid(min: Vec3, size: Vec3) -> Polyhedron {
    let vertices = (0..8)
        .map(|i| {
            Vec3::new(
                min.x + size.x * (i & 1) as f64,
                min.y + size.y * ((i >> 1) & 1) as f64,
                min.z + size.z * ((i >> 2) & 1) as f64,
            )
        })
        .collect();
    Polyhedron::new(vertices, cube_loops(), DEFAULT_PLANARITY_TOL)
        .expect("cuboid with positive edge lengths is valid")
}

/// The unit cube `[0, 1]³`.
pub fn unit_cube() -> Polyhedron {
    cuboid(Vec3::zeros(), Vec3::new(1.0, 1.0, 1.0))
}

/// Face order: x = 0, x = 1, y = 0, y = 1, z = 0, z = 1.
fn cube_loops() -> Vec<Vec<usize>> {
    vec![
        vec![0, 4, 6, 2],
        vec![1, 3, 7, 5],
        vec![0, 1, 5, 4],
        vec![2, 6, 7, 3],
        vec![0, 2, 3, 1],
        vec![4, 5, 7, 6],
    ]
}

/// Regular dodecahedron with unit edge length, centred at the origin.
pub fn dodecahedron() -> Polyhedron {
    let phi = 0.5 * (1.0 + 5f64.sqrt());
    let inv = 1.0 / phi;
    let mut vertices = Vec::with_capacity(20);
    for &x in &[-1.0, 1.0] {
        for &y in &[-1.0, 1.0] {
            for &z in &[-1.0, 1.0] {
                vertices.push(Vec3::new(x, y, z));
            }
        }
    }
    for &a in &[-1.0, 1.0] {
        for &b in &[-1.0, 1.0] {
            vertices.push(Vec3::new(0.0, a * inv, b * phi));
            vertices.push(Vec3::new(a * inv, b * phi, 0.0));
            vertices.push(Vec3::new(a * phi, 0.0, b * inv));
        }
    }
    // Edge length of this embedding is 2/φ.
    let scale = 0.5 * phi;
    for v in &mut vertices {
        *v *= scale;
    }

    // Face normals point at the vertices of the dual icosahedron.
    let mut normals = Vec::with_capacity(12);
    for &a in &[-1.0, 1.0] {
        for &b in &[-1.0, 1.0] {
            normals.push(Vec3::new(0.0, a * phi, b));
            normals.push(Vec3::new(a, 0.0, b * phi));
            normals.push(Vec3::new(a * phi, b, 0.0));
        }
    }
    let faces = normals
        .iter()
        .map(|n| {
            let n = n.normalize();
            let top = vertices.iter().map(|v| v.dot(&n)).fold(f64::MIN, f64::max);
            let members: Vec<usize> = (0..vertices.len())
                .filter(|&i| (vertices[i].dot(&n) - top).abs() < 1e-9)
                .collect();
            sort_counter_clockwise(&vertices, members, &n)
        })
        .collect();
    Polyhedron::new(vertices, faces, DEFAULT_PLANARITY_TOL)
        .expect("dodecahedron construction is valid")
}

fn sort_counter_clockwise(vertices: &[Vec3], mut members: Vec<usize>, normal: &Vec3) -> Vec<usize> {
    let center = members.iter().map(|&i| vertices[i]).sum::<Vec3>() / members.len() as f64;
    let u = (vertices[members[0]] - center).normalize();
    let w = normal.cross(&u);
    let angle = |i: usize| {
        let d = vertices[i] - center;
        d.dot(&w).atan2(d.dot(&u))
    };
    members.sort_by(|&a, &b| angle(a).total_cmp(&angle(b)));
    members
}

/// Unit cube with the box `[0.5, 1] × [0.25, 0.75] × [0.5, 1]` removed.
///
/// The faces `x = 1` and `z = 1` become non-convex octagons; the volume is
/// 0.875.
pub fn notched_cube() -> Polyhedron {
    let mut vertices: Vec<Vec3> = (0..8)
        .map(|i| Vec3::new((i & 1) as f64, ((i >> 1) & 1) as f64, ((i >> 2) & 1) as f64))
        .collect();
    vertices.extend([
        Vec3::new(1.0, 0.25, 1.0),
        Vec3::new(1.0, 0.75, 1.0),
        Vec3::new(1.0, 0.25, 0.5),
        Vec3::new(1.0, 0.75, 0.5),
        Vec3::new(0.5, 0.25, 1.0),
        Vec3::new(0.5, 0.75, 1.0),
        Vec3::new(0.5, 0.25, 0.5),
        Vec3::new(0.5, 0.75, 0.5),
    ]);
    let faces = vec![
        vec![0, 4, 6, 2],
        vec![1, 3, 7, 9, 11, 10, 8, 5],
        vec![0, 1, 5, 4],
        vec![2, 6, 7, 3],
        vec![0, 2, 3, 1],
        vec![4, 5, 8, 12, 13, 9, 7, 6],
        vec![14, 10, 11, 15],
        vec![14, 15, 13, 12],
        vec![14, 12, 8, 10],
        vec![11, 9, 13, 15],
    ];
    Polyhedron::new(vertices, faces, DEFAULT_PLANARITY_TOL)
        .expect("notched cube construction is valid")
}
