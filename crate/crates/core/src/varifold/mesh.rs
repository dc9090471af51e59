//! Mesh generators and OFF / multiplicity-sidecar I/O.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::geom::Vec3;

use super::TriVarifold;

/// Unit icosphere: the icosahedron subdivided `subdiv` times, `20·4^subdiv` triangles.
pub fn icosphere(subdiv: usize) -> TriVarifold {
    let t = (1.0 + 5f64.sqrt()) / 2.0;
    let mut verts: Vec<Vec3> = [
        (-1.0, t, 0.0),
        (1.0, t, 0.0),
        (-1.0, -t, 0.0),
        (1.0, -t, 0.0),
        (0.0, -1.0, t),
        (0.0, 1.0, t),
        (0.0, -1.0, -t),
        (0.0, 1.0, -t),
        (t, 0.0, -1.0),
        (t, 0.0, 1.0),
        (-t, 0.0, -1.0),
        (-t, 0.0, 1.0),
    ]
    .iter()
    .map(|&(x, y, z)| Vec3::new(x, y, z).normalize())
    .collect();
    let mut faces: Vec<[usize; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    for _ in 0..subdiv {
        let mut cache: HashMap<(usize, usize), usize> = HashMap::new();
        let mut mid = |a: usize, b: usize, verts: &mut Vec<Vec3>| -> usize {
            let key = (a.min(b), a.max(b));
            *cache.entry(key).or_insert_with(|| {
                verts.push(((verts[a] + verts[b]) * 0.5).normalize());
                verts.len() - 1
            })
        };
        let mut next = Vec::with_capacity(faces.len() * 4);
        for [a, b, c] in faces {
            let ab = mid(a, b, &mut verts);
            let bc = mid(b, c, &mut verts);
            let ca = mid(c, a, &mut verts);
            next.push([a, ab, ca]);
            next.push([b, bc, ab]);
            next.push([c, ca, bc]);
            next.push([ab, bc, ca]);
        }
        faces = next;
    }
    let n = faces.len();
    TriVarifold::new(verts, faces, vec![1.0; n]).expect("icosphere is valid")
}

/// Torus with major radius `big_r` and minor radius `r`, `nu × nv` quads split in two.
pub fn torus(big_r: f64, r: f64, nu: usize, nv: usize) -> Result<TriVarifold> {
    if nu < 3 || nv < 3 || !(big_r > r && r > 0.0) {
        return Err(Error::InvalidParameter(format!("torus R={big_r} r={r} {nu}x{nv}")));
    }
    let tau = std::f64::consts::TAU;
    let mut verts = Vec::with_capacity(nu * nv);
    for i in 0..nu {
        let u = tau * i as f64 / nu as f64;
        for j in 0..nv {
            let v = tau * j as f64 / nv as f64;
            let rr = big_r + r * v.cos();
            verts.push(Vec3::new(rr * u.cos(), rr * u.sin(), r * v.sin()));
        }
    }
    let id = |i: usize, j: usize| (i % nu) * nv + (j % nv);
    let mut faces = Vec::with_capacity(2 * nu * nv);
    for i in 0..nu {
        for j in 0..nv {
            faces.push([id(i, j), id(i + 1, j), id(i + 1, j + 1)]);
            faces.push([id(i, j), id(i + 1, j + 1), id(i, j + 1)]);
        }
    }
    let n = faces.len();
    TriVarifold::new(verts, faces, vec![1.0; n])
}

/// Graph of `z = amp · sin(πx) sin(πy)` over `[−1, 1]²`, `n × n` quads split in two.
pub fn graph_over_square(n: usize, amp: f64) -> Result<TriVarifold> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("graph resolution {n}")));
    }
    let pi = std::f64::consts::PI;
    let mut verts = Vec::with_capacity((n + 1) * (n + 1));
    for i in 0..=n {
        let x = -1.0 + 2.0 * i as f64 / n as f64;
        for j in 0..=n {
            let y = -1.0 + 2.0 * j as f64 / n as f64;
            verts.push(Vec3::new(x, y, amp * (pi * x).sin() * (pi * y).sin()));
        }
    }
    let faces = grid_faces(n, n);
    let m = faces.len();
    TriVarifold::new(verts, faces, vec![1.0; m])
}

fn grid_faces(nx: usize, ny: usize) -> Vec<[usize; 3]> {
    let id = |i: usize, j: usize| i * (ny + 1) + j;
    let mut faces = Vec::with_capacity(2 * nx * ny);
    for i in 0..nx {
        for j in 0..ny {
            faces.push([id(i, j), id(i + 1, j), id(i + 1, j + 1)]);
            faces.push([id(i, j), id(i + 1, j + 1), id(i, j + 1)]);
        }
    }
    faces
}

/// Flat square `[0, side]²` at height `z`, split into `2n²` triangles.
pub fn flat_square(n: usize, side: f64, z: f64) -> TriVarifold {
    let mut verts = Vec::with_capacity((n + 1) * (n + 1));
    for i in 0..=n {
        for j in 0..=n {
            verts.push(Vec3::new(side * i as f64 / n as f64, side * j as f64 / n as f64, z));
        }
    }
    let faces = grid_faces(n, n);
    let m = faces.len();
    TriVarifold::new(verts, faces, vec![1.0; m]).expect("square is valid")
}

/// Flat disk of radius `radius` in the plane spanned by axes `a` and `b`, as a triangle fan.
pub fn disk(segments: usize, radius: f64, a: usize, b: usize) -> TriVarifold {
    let mut verts = vec![Vec3::zeros()];
    for k in 0..segments {
        let t = std::f64::consts::TAU * k as f64 / segments as f64;
        let mut v = Vec3::zeros();
        v[a] = radius * t.cos();
        v[b] = radius * t.sin();
        verts.push(v);
    }
    let faces: Vec<[usize; 3]> = (0..segments).map(|k| [0, 1 + k, 1 + (k + 1) % segments]).collect();
    TriVarifold::new(verts, faces, vec![1.0; segments]).expect("disk is valid")
}

pub fn to_off(v: &TriVarifold) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "OFF");
    let _ = writeln!(s, "{} {} 0", v.vertices.len(), v.triangles.len());
    for p in &v.vertices {
        let _ = writeln!(s, "{:?} {:?} {:?}", p[0], p[1], p[2]);
    }
    for t in &v.triangles {
        let _ = writeln!(s, "3 {} {} {}", t[0], t[1], t[2]);
    }
    s
}

/// Parses OFF text; multiplicities default to 1.
pub fn parse_off(text: &str) -> Result<(Vec<Vec3>, Vec<[usize; 3]>)> {
    let mut tokens = text
        .lines()
        .map(|l| l.split('#').next().unwrap_or(""))
        .flat_map(|l| l.split_whitespace())
        .peekable();
    if tokens.peek() == Some(&"OFF") {
        tokens.next();
    }
    let mut next_num = |what: &str| -> Result<String> {
        tokens.next().map(str::to_string).ok_or_else(|| Error::Parse(format!("OFF: missing {what}")))
    };
    let parse_usize = |s: String| s.parse::<usize>().map_err(|e| Error::Parse(format!("OFF: {e}")));
    let parse_f64 = |s: String| s.parse::<f64>().map_err(|e| Error::Parse(format!("OFF: {e}")));
    let nv = parse_usize(next_num("vertex count")?)?;
    let nf = parse_usize(next_num("face count")?)?;
    let _ne = next_num("edge count")?;
    let mut verts = Vec::with_capacity(nv);
    for _ in 0..nv {
        let x = parse_f64(next_num("x")?)?;
        let y = parse_f64(next_num("y")?)?;
        let z = parse_f64(next_num("z")?)?;
        verts.push(Vec3::new(x, y, z));
    }
    let mut faces = Vec::with_capacity(nf);
    for _ in 0..nf {
        let k = parse_usize(next_num("face size")?)?;
        if k != 3 {
            return Err(Error::Parse(format!("OFF: only triangles supported, got {k}-gon")));
        }
        let a = parse_usize(next_num("index")?)?;
        let b = parse_usize(next_num("index")?)?;
        let c = parse_usize(next_num("index")?)?;
        faces.push([a, b, c]);
    }
    Ok((verts, faces))
}

pub fn parse_multiplicity(text: &str) -> Result<Vec<f64>> {
    text.split_whitespace()
        .map(|s| s.parse::<f64>().map_err(|e| Error::Parse(format!("multiplicity: {e}"))))
        .collect()
}

/// Reads an OFF mesh and an optional sidecar with one multiplicity per triangle.
pub fn read_off(path: &Path, multiplicity: Option<&Path>) -> Result<TriVarifold> {
    let (verts, faces) = parse_off(&std::fs::read_to_string(path)?)?;
    let theta = match multiplicity {
        Some(m) => {
            let th = parse_multiplicity(&std::fs::read_to_string(m)?)?;
            if th.len() != faces.len() {
                return Err(Error::InvalidMesh(format!(
                    "{} multiplicities for {} triangles",
                    th.len(),
                    faces.len()
                )));
            }
            th
        }
        None => vec![1.0; faces.len()],
    };
    TriVarifold::new(verts, faces, theta)
}

pub fn write_off(v: &TriVarifold, path: &Path) -> Result<()> {
    std::fs::write(path, to_off(v))?;
    Ok(())
}

pub fn write_multiplicity(v: &TriVarifold, path: &Path) -> Result<()> {
    let mut s = String::new();
    for t in &v.theta {
        let _ = writeln!(s, "{t:?}");
    }
    std::fs::write(path, s)?;
    Ok(())
}
