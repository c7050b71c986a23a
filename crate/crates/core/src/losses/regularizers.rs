use crate::geometry::{Adjacency, Mesh, Vec3};

use super::MeshLoss;

/// Uniform Laplacian energy `sum_i |v_i - mean(neighbours of i)|^2`.
pub fn laplacian_loss(mesh: &Mesh, adjacency: &Adjacency) -> MeshLoss {
    let n = mesh.vertices.len();
    let mut loss = MeshLoss::zero(n);
    for (i, ring) in adjacency.neighbors.iter().enumerate().take(n) {
        if ring.is_empty() {
            continue;
        }
        let inv = 1.0 / ring.len() as f64;
        let centroid = ring.iter().map(|&j| mesh.vertices[j]).sum::<Vec3>() * inv;
        let delta = mesh.vertices[i] - centroid;
        loss.value += delta.norm_squared();
        loss.grad[i] += delta * 2.0;
        for &j in ring {
            loss.grad[j] -= delta * (2.0 * inv);
        }
    }
    loss
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlattenLoss {
    pub loss: MeshLoss,
    /// Edges with a single incident face, which carry no dihedral angle.
    pub boundary_edges: usize,
}

/// `sum_e (cos theta_e + 1)^2` over interior edges, `theta_e` the interior
/// dihedral angle. With outward unit normals `cos theta = -n1 . n2`.
pub fn flatten_loss(mesh: &Mesh, adjacency: &Adjacency) -> FlattenLoss {
    let mut loss = MeshLoss::zero(mesh.vertices.len());
    let mut boundary_edges = 0;
    for edge in &adjacency.edges {
        if edge.face_count < 2 {
            boundary_edges += 1;
            continue;
        }
        let [f1, f2] = edge.faces;
        let c1 = mesh.face_cross(f1);
        let c2 = mesh.face_cross(f2);
        let (l1, l2) = (c1.norm(), c2.norm());
        if l1 < 1e-12 || l2 < 1e-12 {
            continue;
        }
        let (n1, n2) = (c1 / l1, c2 / l2);
        let dot = n1.dot(&n2);
        let term = 1.0 - dot;
        loss.value += term * term;
        let d_dot = -2.0 * term;
        // d(n1 . n2)/dc1 = (I - n1 n1^T) n2 / |c1|
        let g1 = (n2 - n1 * n1.dot(&n2)) * (d_dot / l1);
        let g2 = (n1 - n2 * n2.dot(&n1)) * (d_dot / l2);
        add_cross_grad(mesh, f1, g1, &mut loss.grad);
        add_cross_grad(mesh, f2, g2, &mut loss.grad);
    }
    FlattenLoss {
        loss,
        boundary_edges,
    }
}

/// Pulls a gradient on `c = (b - a) x (c - a)` back to the face's vertices.
fn add_cross_grad(mesh: &Mesh, face: usize, g: Vec3, grad: &mut [Vec3]) {
    let [a, b, c] = mesh.faces[face];
    let e1 = mesh.vertices[b] - mesh.vertices[a];
    let e2 = mesh.vertices[c] - mesh.vertices[a];
    let gb = e2.cross(&g);
    let gc = g.cross(&e1);
    grad[b] += gb;
    grad[c] += gc;
    grad[a] -= gb + gc;
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{adjacency, icosphere, primitives};

    fn check_grad(f: impl Fn(&Mesh) -> MeshLoss, mesh: &Mesh) {
        let analytic = f(mesh).grad;
        let h = 1e-6;
        for i in 0..mesh.vertices.len() {
            for k in 0..3 {
                let mut p = mesh.clone();
                p.vertices[i][k] += h;
                let mut m = mesh.clone();
                m.vertices[i][k] -= h;
                let fd = (f(&p).value - f(&m).value) / (2.0 * h);
                let a = analytic[i][k];
                let rel = (a - fd).abs() / a.abs().max(fd.abs()).max(1e-8);
                assert!(
                    rel < 1e-6 || (a - fd).abs() < 1e-9,
                    "v{i}[{k}]: {a} vs {fd}"
                );
            }
        }
    }

    fn bumpy() -> Mesh {
        icosphere(1)
            .unwrap()
            .map_vertices(|v| v * (1.0 + 0.15 * (3.0 * v.x).sin() * v.y + 0.1 * v.z * v.z))
    }

    #[test]
    fn laplacian_zero_on_centroid_mesh() {
        // All vertices coincide, so each equals its neighbour centroid.
        let collapsed = icosphere(1)
            .unwrap()
            .map_vertices(|_| Vec3::new(0.3, -0.2, 1.0));
        let adj = adjacency(&collapsed).unwrap();
        assert!(laplacian_loss(&collapsed, &adj).value < 1e-30);

        // Interior grid vertices sit at their ring centroid; only the
        // boundary ring contributes.
        let g = primitives::grid(4);
        let adj = adjacency(&g).unwrap();
        let l = laplacian_loss(&g, &adj);
        let interior = |i: usize| {
            let (x, y) = (i % 5, i / 5);
            (1..4).contains(&x) && (1..4).contains(&y)
        };
        for i in (0..25).filter(|&i| interior(i)) {
            let ring = &adj.neighbors[i];
            let c = ring.iter().map(|&j| g.vertices[j]).sum::<Vec3>() / ring.len() as f64;
            assert!((g.vertices[i] - c).norm() < 1e-15);
        }
        assert!(l.value > 0.0);
    }

    #[test]
    fn laplacian_is_homogeneous_of_degree_two() {
        let mesh = bumpy();
        let adj = adjacency(&mesh).unwrap();
        let base = laplacian_loss(&mesh, &adj).value;
        let s = 2.5;
        let scaled = laplacian_loss(&mesh.scaled(Vec3::repeat(s)), &adj).value;
        assert!((scaled - s * s * base).abs() < 1e-12 * scaled);
    }

    #[test]
    fn laplacian_ignores_isolated_vertices() {
        let mut mesh = primitives::cube(1.0);
        mesh.vertices.push(Vec3::new(5.0, 5.0, 5.0));
        let adj = adjacency(&mesh).unwrap();
        let with = laplacian_loss(&mesh, &adj);
        let without = laplacian_loss(
            &primitives::cube(1.0),
            &adjacency(&primitives::cube(1.0)).unwrap(),
        );
        assert_eq!(with.value, without.value);
        assert_eq!(with.grad[8], Vec3::zeros());
    }

    #[test]
    fn laplacian_gradient() {
        let mesh = bumpy();
        let adj = adjacency(&mesh).unwrap();
        check_grad(|m| laplacian_loss(m, &adj), &mesh);
    }

    #[test]
    fn flatten_zero_on_plane() {
        let g = primitives::grid(4);
        let adj = adjacency(&g).unwrap();
        let f = flatten_loss(&g, &adj);
        assert!(f.loss.value < 1e-24);
        assert_eq!(f.boundary_edges, 16);
    }

    #[test]
    fn flatten_cube_edges() {
        let cube = primitives::cube(1.0);
        let adj = adjacency(&cube).unwrap();
        let f = flatten_loss(&cube, &adj);
        // 12 cube edges at 90 degrees contribute 1 each; the 6 face diagonals are flat.
        assert!((f.loss.value - 12.0).abs() < 1e-9 * 12.0);
        assert_eq!(f.boundary_edges, 0);
    }

    #[test]
    fn flatten_tetrahedron_edges() {
        let tet = primitives::tetrahedron(1.0);
        let adj = adjacency(&tet).unwrap();
        let per_edge = flatten_loss(&tet, &adj).loss.value / 6.0;
        assert!((per_edge - 16.0 / 9.0).abs() < 1e-9);
    }

    #[test]
    fn flatten_gradient() {
        let mesh = bumpy();
        let adj = adjacency(&mesh).unwrap();
        check_grad(|m| flatten_loss(m, &adj).loss, &mesh);
    }

    #[test]
    fn degenerate_faces_contribute_nothing() {
        let mut mesh = primitives::cube(1.0);
        // Collapse vertex 7 onto vertex 3: faces touching both become slivers.
        mesh.vertices[7] = mesh.vertices[3];
        let adj = adjacency(&mesh).unwrap();
        let f = flatten_loss(&mesh, &adj);
        assert!(f.loss.value.is_finite());
        assert!(f.loss.grad.iter().all(|g| g.iter().all(|c| c.is_finite())));
    }
}
