//! OBJ and ASCII PLY reading/writing.
//!
//! Only positions and triangle connectivity are carried. Texture and normal
//! references in OBJ face records are accepted and dropped; normals are
//! always recomputed from geometry.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use nalgebra::Point3;

use crate::error::{MeshError, MeshResult};
use crate::mesh::TriMesh;
use crate::segment::ClusterLabels;

pub fn read_obj(path: impl AsRef<Path>) -> MeshResult<TriMesh> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| MeshError::io(path, e))?;
    parse_obj(BufReader::new(file), path)
}

/// Parses OBJ text; `path` is only used in error messages.
pub fn parse_obj<R: BufRead>(reader: R, path: &Path) -> MeshResult<TriMesh> {
    let parse_err = |line: usize, message: String| MeshError::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut vertices = Vec::new();
    let mut faces = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let lineno = i + 1;
        let line = line.map_err(|e| MeshError::io(path, e))?;
        let mut tokens = line.split_whitespace();
        match tokens.next() {
            Some("v") => {
                let coords: Vec<f64> = tokens
                    .take(3)
                    .map(|t| t.parse::<f64>())
                    .collect::<Result<_, _>>()
                    .map_err(|e| parse_err(lineno, format!("bad vertex coordinate: {e}")))?;
                if coords.len() != 3 {
                    return Err(parse_err(lineno, "vertex needs three coordinates".into()));
                }
                vertices.push(Point3::new(coords[0], coords[1], coords[2]));
            }
            Some("f") => {
                let refs: Vec<&str> = tokens.collect();
                if refs.len() != 3 {
                    return Err(MeshError::NonTriangleFace {
                        path: path.to_path_buf(),
                        line: lineno,
                        count: refs.len(),
                    });
                }
                let mut face = [0usize; 3];
                for (slot, r) in face.iter_mut().zip(&refs) {
                    let head = r.split('/').next().unwrap_or("");
                    let idx: i64 = head
                        .parse()
                        .map_err(|_| parse_err(lineno, format!("bad face index {r:?}")))?;
                    // negative indices count back from the most recent vertex
                    let resolved = match idx {
                        i if i > 0 => i - 1,
                        i if i < 0 => vertices.len() as i64 + i,
                        _ => return Err(parse_err(lineno, "face index 0 is invalid".into())),
                    };
                    if resolved < 0 {
                        return Err(parse_err(lineno, format!("face index {idx} out of range")));
                    }
                    *slot = resolved as usize;
                }
                faces.push(face);
            }
            _ => {}
        }
    }
    TriMesh::new(vertices, faces)
}

pub fn write_obj(mesh: &TriMesh, path: impl AsRef<Path>) -> MeshResult<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| MeshError::io(path, e))?;
    let mut out = BufWriter::new(file);
    write_obj_to(mesh, &mut out)
        .and_then(|_| out.flush())
        .map_err(|e| MeshError::io(path, e))
}

/// Shortest round-trip float formatting, so positions survive exactly.
pub fn write_obj_to<W: Write>(mesh: &TriMesh, out: &mut W) -> std::io::Result<()> {
    for v in mesh.vertices() {
        writeln!(out, "v {:?} {:?} {:?}", v.x, v.y, v.z)?;
    }
    for f in mesh.faces() {
        writeln!(out, "f {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1)?;
    }
    Ok(())
}

/// Deterministic label → RGB assignment by golden-ratio hue stepping.
#[derive(Debug, Clone, Copy, Default)]
pub struct ColorMap;

impl ColorMap {
    const GOLDEN: f64 = 0.618034;

    pub fn color(&self, label: usize) -> [u8; 3] {
        let hue = (label as f64 * Self::GOLDEN).fract();
        hsv_to_rgb(hue, 1.0, 1.0)
    }
}

fn hsv_to_rgb(h: f64, s: f64, v: f64) -> [u8; 3] {
    let h6 = h * 6.0;
    let sector = h6.floor();
    let f = h6 - sector;
    let p = v * (1.0 - s);
    let q = v * (1.0 - s * f);
    let t = v * (1.0 - s * (1.0 - f));
    let (r, g, b) = match sector as i64 % 6 {
        0 => (v, t, p),
        1 => (q, v, p),
        2 => (p, v, t),
        3 => (p, q, v),
        4 => (t, p, v),
        _ => (v, p, q),
    };
    let to_byte = |x: f64| (x * 255.0).round().clamp(0.0, 255.0) as u8;
    [to_byte(r), to_byte(g), to_byte(b)]
}

/// ASCII PLY with per-face colors taken from the cluster labels.
pub fn write_ply_colored(mesh: &TriMesh, labels: &ClusterLabels, path: impl AsRef<Path>) -> MeshResult<()> {
    let path = path.as_ref();
    if labels.label.len() != mesh.face_count() {
        return Err(MeshError::LabelLengthMismatch {
            labels: labels.label.len(),
            faces: mesh.face_count(),
        });
    }
    let file = File::create(path).map_err(|e| MeshError::io(path, e))?;
    let mut out = BufWriter::new(file);
    write_ply_colored_to(mesh, &labels.label, &mut out)
        .and_then(|_| out.flush())
        .map_err(|e| MeshError::io(path, e))
}

pub fn write_ply_colored_to<W: Write>(mesh: &TriMesh, labels: &[usize], out: &mut W) -> std::io::Result<()> {
    let colors = ColorMap;
    writeln!(out, "ply")?;
    writeln!(out, "format ascii 1.0")?;
    writeln!(out, "element vertex {}", mesh.vertex_count())?;
    writeln!(out, "property float x")?;
    writeln!(out, "property float y")?;
    writeln!(out, "property float z")?;
    writeln!(out, "element face {}", mesh.face_count())?;
    writeln!(out, "property list uchar int vertex_indices")?;
    writeln!(out, "property uchar red")?;
    writeln!(out, "property uchar green")?;
    writeln!(out, "property uchar blue")?;
    writeln!(out, "end_header")?;
    for v in mesh.vertices() {
        writeln!(out, "{:?} {:?} {:?}", v.x, v.y, v.z)?;
    }
    for (f, &label) in mesh.faces().iter().zip(labels) {
        let [r, g, b] = colors.color(label);
        writeln!(out, "3 {} {} {} {r} {g} {b}", f[0], f[1], f[2])?;
    }
    Ok(())
}

/// Text label dump: line `i` holds the label of face `i`.
pub fn write_labels(labels: &ClusterLabels, path: impl AsRef<Path>) -> MeshResult<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| MeshError::io(path, e))?;
    let mut out = BufWriter::new(file);
    let res: std::io::Result<()> = (|| {
        for l in &labels.label {
            writeln!(out, "{l}")?;
        }
        out.flush()
    })();
    res.map_err(|e| MeshError::io(path, e))
}

pub fn read_labels(path: impl AsRef<Path>) -> MeshResult<ClusterLabels> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| MeshError::io(path, e))?;
    let mut label = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| MeshError::io(path, e))?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        label.push(line.parse::<usize>().map_err(|e| MeshError::Parse {
            path: path.to_path_buf(),
            line: i + 1,
            message: format!("bad label: {e}"),
        })?);
    }
    Ok(ClusterLabels::from_raw(label))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use std::collections::HashSet;

    fn parse(text: &str) -> MeshResult<TriMesh> {
        parse_obj(text.as_bytes(), Path::new("inline.obj"))
    }

    #[test]
    fn reads_minimal_obj() {
        let m = parse("# tri\nv 0 0 0\nv 1 0 0\nv 0 1 0\nvn 0 0 1\nf 1//1 2//1 3//1\n").unwrap();
        assert_eq!(m.vertex_count(), 3);
        assert_eq!(m.faces(), &[[0, 1, 2]]);
        let m = parse("v 0 0 0\nv 1 0 0\nv 0 1 0\nf -3/1 -2/2 -1/3\n").unwrap();
        assert_eq!(m.faces(), &[[0, 1, 2]]);
    }

    #[test]
    fn rejects_quads_and_garbage() {
        let quad = "v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1 2 3 4\n";
        assert!(matches!(parse(quad), Err(MeshError::NonTriangleFace { line: 5, count: 4, .. })));
        assert!(matches!(parse("v 0 zero 0\n"), Err(MeshError::Parse { line: 1, .. })));
        assert!(matches!(parse("v 0 0 0\nf 1 2 x\n"), Err(MeshError::Parse { line: 2, .. })));
    }

    #[test]
    fn obj_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ico.obj");
        let mesh = fixtures::icosphere(2);
        write_obj(&mesh, &path).unwrap();
        let back = read_obj(&path).unwrap();
        assert!(back.same_connectivity(&mesh));
        for (a, b) in back.vertices().iter().zip(mesh.vertices()) {
            assert!((a - b).norm() < 1e-6);
        }
    }

    #[test]
    fn small_obj_outputs() {
        let mut buf = Vec::new();
        write_obj_to(&TriMesh::new(vec![], vec![]).unwrap(), &mut buf).unwrap();
        assert!(buf.is_empty());
        let tri = parse("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 3\n").unwrap();
        let mut buf = Vec::new();
        write_obj_to(&tri, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 4);
    }

    #[test]
    fn colormap_is_distinct_for_256_labels() {
        let cm = ColorMap;
        let colors: HashSet<[u8; 3]> = (0..256).map(|k| cm.color(k)).collect();
        assert_eq!(colors.len(), 256);
        assert_eq!(cm.color(0), [255, 0, 0]);
        assert_eq!(cm.color(17), ColorMap.color(17));
    }

    #[test]
    fn label_length_mismatch() {
        let cube = fixtures::cube(1);
        let labels = ClusterLabels::from_raw(vec![0; 5]);
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(
            write_ply_colored(&cube, &labels, dir.path().join("x.ply")),
            Err(MeshError::LabelLengthMismatch { labels: 5, faces: 12 })
        ));
    }

    #[test]
    fn labels_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("l.txt");
        let labels = ClusterLabels::from_raw(vec![0, 0, 1, 2, 1]);
        write_labels(&labels, &path).unwrap();
        assert_eq!(read_labels(&path).unwrap().label, labels.label);
    }
}
