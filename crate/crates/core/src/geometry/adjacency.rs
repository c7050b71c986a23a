use std::collections::HashMap;

use crate::error::{Error, Result};

use super::Mesh;

/// Undirected edge with its (one or two) incident faces.
#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    /// Endpoints, smaller index first.
    pub vertices: [usize; 2],
    pub faces: [usize; 2],
    pub face_count: usize,
}

impl Edge {
    pub fn is_boundary(&self) -> bool {
        self.face_count == 1
    }

    pub fn incident_faces(&self) -> &[usize] {
        &self.faces[..self.face_count]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Adjacency {
    /// Edges in first-seen order while walking faces.
    pub edges: Vec<Edge>,
    /// Sorted one-ring neighbours per vertex.
    pub neighbors: Vec<Vec<usize>>,
}

impl Adjacency {
    pub fn is_closed(&self) -> bool {
        self.edges.iter().all(|e| e.face_count == 2)
    }

    pub fn boundary_edges(&self) -> usize {
        self.edges.iter().filter(|e| e.is_boundary()).count()
    }

    pub fn euler_characteristic(&self, faces: usize) -> i64 {
        self.neighbors.len() as i64 - self.edges.len() as i64 + faces as i64
    }
}

/// Edge list and vertex one-rings. Fails on edges shared by three or more faces.
pub fn adjacency(mesh: &Mesh) -> Result<Adjacency> {
    let mut index: HashMap<(usize, usize), usize> = HashMap::with_capacity(mesh.faces.len() * 2);
    let mut edges: Vec<Edge> = Vec::new();
    for (fi, f) in mesh.faces.iter().enumerate() {
        for k in 0..3 {
            let (a, b) = (f[k], f[(k + 1) % 3]);
            let key = (a.min(b), a.max(b));
            match index.get(&key) {
                Some(&ei) => {
                    let e = &mut edges[ei];
                    if e.face_count == 2 {
                        return Err(Error::NonManifold(key.0, key.1));
                    }
                    e.faces[1] = fi;
                    e.face_count = 2;
                }
                None => {
                    index.insert(key, edges.len());
                    edges.push(Edge {
                        vertices: [key.0, key.1],
                        faces: [fi, fi],
                        face_count: 1,
                    });
                }
            }
        }
    }
    let mut neighbors = vec![Vec::new(); mesh.vertices.len()];
    for e in &edges {
        let [a, b] = e.vertices;
        neighbors[a].push(b);
        neighbors[b].push(a);
    }
    for n in &mut neighbors {
        n.sort_unstable();
    }
    Ok(Adjacency { edges, neighbors })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{icosphere, primitives, Vec3};

    #[test]
    fn cube_has_eighteen_edges() {
        let cube = primitives::cube(1.0);
        let adj = adjacency(&cube).unwrap();
        assert_eq!(adj.edges.len(), 18);
        assert!(adj.is_closed());
        assert_eq!(adj.euler_characteristic(cube.faces.len()), 2);
    }

    #[test]
    fn icosahedron_has_thirty_edges() {
        let ico = icosphere(0).unwrap();
        let adj = adjacency(&ico).unwrap();
        assert_eq!(adj.edges.len(), 30);
        assert!(adj.neighbors.iter().all(|n| n.len() == 5));
    }

    #[test]
    fn single_triangle_edges_are_boundary() {
        let tri = primitives::triangle(Vec3::zeros(), Vec3::x(), Vec3::y());
        let adj = adjacency(&tri).unwrap();
        assert_eq!(adj.edges.len(), 3);
        assert!(adj.edges.iter().all(|e| e.face_count == 1));
        assert_eq!(adj.boundary_edges(), 3);
    }

    #[test]
    fn three_faces_on_one_edge_is_non_manifold() {
        let mesh = Mesh::new(
            vec![
                Vec3::zeros(),
                Vec3::x(),
                Vec3::y(),
                Vec3::z(),
                Vec3::new(0.0, -1.0, 0.0),
            ],
            vec![[0, 1, 2], [1, 0, 3], [0, 1, 4]],
        )
        .unwrap();
        assert!(matches!(adjacency(&mesh), Err(Error::NonManifold(0, 1))));
    }

    #[test]
    fn isolated_vertex_has_no_neighbors() {
        let mut tri = primitives::triangle(Vec3::zeros(), Vec3::x(), Vec3::y());
        tri.vertices.push(Vec3::z());
        let adj = adjacency(&tri).unwrap();
        assert!(adj.neighbors[3].is_empty());
        assert_eq!(adj.neighbors[0], vec![1, 2]);
    }
}
