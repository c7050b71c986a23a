//! Wavefront OBJ subset: `v` and triangular `f` records with positive,
//! 1-based indices. Texture and normal references (`f 1/2/3 ...`) are
//! accepted and ignored; relative (negative) indices are rejected.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::{Mesh, Vec3};

/// Serializes with 9 significant digits per coordinate.
pub fn obj_string(mesh: &Mesh) -> String {
    let mut out = String::with_capacity(40 * (mesh.vertices.len() + mesh.faces.len()));
    for v in &mesh.vertices {
        writeln!(out, "v {:.8e} {:.8e} {:.8e}", v.x, v.y, v.z).unwrap();
    }
    for f in &mesh.faces {
        writeln!(out, "f {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1).unwrap();
    }
    out
}

pub fn parse_obj(text: &str) -> Result<Mesh> {
    let mut vertices = Vec::new();
    let mut faces = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("");
        let mut tokens = line.split_whitespace();
        let err = |msg: String| Error::Format(format!("line {}: {msg}", lineno + 1));
        match tokens.next() {
            Some("v") => {
                let coords: Vec<f64> = tokens
                    .map(|t| {
                        t.parse::<f64>()
                            .map_err(|_| err(format!("bad coordinate {t:?}")))
                    })
                    .collect::<Result<_>>()?;
                if !(3..=4).contains(&coords.len()) {
                    return Err(err(format!("vertex has {} coordinates", coords.len())));
                }
                vertices.push(Vec3::new(coords[0], coords[1], coords[2]));
            }
            Some("f") => {
                let idx: Vec<usize> = tokens
                    .map(|t| {
                        let head = t.split('/').next().unwrap_or("");
                        let i: i64 = head
                            .parse()
                            .map_err(|_| err(format!("bad face index {t:?}")))?;
                        if i <= 0 {
                            return Err(err(format!(
                                "face index {i} is not a positive 1-based index"
                            )));
                        }
                        Ok(i as usize - 1)
                    })
                    .collect::<Result<_>>()?;
                if idx.len() != 3 {
                    return Err(err(format!(
                        "face has {} vertices, only triangles are supported",
                        idx.len()
                    )));
                }
                faces.push([idx[0], idx[1], idx[2]]);
            }
            _ => {}
        }
    }
    for (i, f) in faces.iter().enumerate() {
        if let Some(&bad) = f.iter().find(|&&j| j >= vertices.len()) {
            return Err(Error::Format(format!(
                "face {i} references vertex {} of {}",
                bad + 1,
                vertices.len()
            )));
        }
    }
    Mesh::new(vertices, faces).map_err(|e| Error::Format(e.to_string()))
}

pub fn save_obj(mesh: &Mesh, path: &Path) -> Result<()> {
    mesh.validate()?;
    fs::write(path, obj_string(mesh)).map_err(|e| Error::io(path, e))
}

pub fn load_obj(path: &Path) -> Result<Mesh> {
    parse_obj(&fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::icosphere;

    #[test]
    fn icosphere_round_trip() {
        let m = icosphere(1).unwrap();
        let back = parse_obj(&obj_string(&m)).unwrap();
        assert_eq!(back.vertices.len(), 42);
        assert_eq!(back.faces, m.faces);
        for (a, b) in m.vertices.iter().zip(&back.vertices) {
            assert!((a - b).amax() < 1e-6);
        }
    }

    #[test]
    fn accepts_slashes_comments_and_other_records() {
        let text = "# tri\no t\nv 0 0 0\nv 1 0 0 1.0\nvn 0 0 1\nv 0 1 0 # top\nf 1/1/1 2//1 3\n";
        let m = parse_obj(text).unwrap();
        assert_eq!(m.faces, vec![[0, 1, 2]]);
    }

    #[test]
    fn rejects_unsupported_faces() {
        let verts = "v 0 0 0\nv 1 0 0\nv 0 1 0\nv 1 1 0\n";
        for f in [
            "f 1 2 3 4",
            "f -3 -2 -1",
            "f 0 1 2",
            "f 1 2 9",
            "f 1 2",
            "f 1 1 2",
            "f a b c",
        ] {
            let r = parse_obj(&format!("{verts}{f}\n"));
            assert!(matches!(r, Err(Error::Format(_))), "{f}: {r:?}");
        }
        assert!(matches!(parse_obj("v 1 2\n"), Err(Error::Format(_))));
    }
}
