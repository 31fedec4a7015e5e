//! ASCII mesh and surface files.
//!
//! Mesh file:
//! ```text
//! $Vertices
//! <count>
//! x y z
//! $Wedges
//! <count>
//! v1 v2 v3 v4 v5 v6
//! $Tets
//! <count>
//! v1 v2 v3 v4
//! $Media
//! <count>
//! rho kappa
//! $Boundary
//! <count>
//! element face tag
//! ```
//! Indices (vertices, elements, local faces) are 1-based. Media are listed
//! per element, wedges first. Blank lines and lines starting with `#` are
//! ignored. Surface files use `$SurfaceVertices` (`x y z_bottom z_top`) and
//! `$Triangles` (`v1 v2 v3`).

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use super::generate::SurfaceMesh;
use super::{BoundaryFace, HybridMesh, Medium};
use crate::{Error, Result};

fn fmt_f(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn mesh_to_string(mesh: &HybridMesh) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "$Vertices\n{}", mesh.vertices.len());
    for p in &mesh.vertices {
        let _ = writeln!(s, "{} {} {}", fmt_f(p[0]), fmt_f(p[1]), fmt_f(p[2]));
    }
    let _ = writeln!(s, "$Wedges\n{}", mesh.wedges.len());
    for w in &mesh.wedges {
        let ids: Vec<String> = w.iter().map(|v| (v + 1).to_string()).collect();
        let _ = writeln!(s, "{}", ids.join(" "));
    }
    let _ = writeln!(s, "$Tets\n{}", mesh.tets.len());
    for t in &mesh.tets {
        let ids: Vec<String> = t.iter().map(|v| (v + 1).to_string()).collect();
        let _ = writeln!(s, "{}", ids.join(" "));
    }
    let _ = writeln!(s, "$Media\n{}", mesh.media.len());
    for m in &mesh.media {
        let _ = writeln!(s, "{} {}", fmt_f(m.rho), fmt_f(m.kappa));
    }
    let _ = writeln!(s, "$Boundary\n{}", mesh.boundary.len());
    for b in &mesh.boundary {
        let _ = writeln!(s, "{} {} {}", b.element + 1, b.face + 1, b.tag);
    }
    s
}

pub fn save_mesh(mesh: &HybridMesh, path: &Path) -> Result<()> {
    std::fs::write(path, mesh_to_string(mesh))?;
    Ok(())
}

/// Sections of a line-oriented file: name -> (header line, records as
/// `(line number, fields)`).
type Sections<'a> = HashMap<&'a str, (usize, Vec<(usize, Vec<&'a str>)>)>;

fn split_sections(text: &str) -> Result<Sections<'_>> {
    let mut out: Sections = HashMap::new();
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    while let Some((ln, line)) = lines.next() {
        let Some(name) = line.strip_prefix('$') else {
            return Err(Error::Parse { line: ln, msg: format!("expected a section header, found '{line}'") });
        };
        let (cl, count) = lines
            .next()
            .ok_or_else(|| Error::Parse { line: ln, msg: format!("section ${name} is missing its record count") })?;
        let count: usize = count
            .parse()
            .map_err(|_| Error::Parse { line: cl, msg: format!("invalid record count '{count}'") })?;
        let mut records = Vec::with_capacity(count);
        for k in 0..count {
            let (rl, rec) = lines.next().ok_or_else(|| Error::Parse {
                line: cl,
                msg: format!("section ${name} ends after {k} of {count} records"),
            })?;
            if rec.starts_with('$') {
                return Err(Error::Parse {
                    line: rl,
                    msg: format!("section ${name} ends after {k} of {count} records"),
                });
            }
            records.push((rl, rec.split_whitespace().collect()));
        }
        if out.insert(name, (ln, records)).is_some() {
            return Err(Error::Parse { line: ln, msg: format!("duplicate section ${name}") });
        }
    }
    Ok(out)
}

fn fields<T: std::str::FromStr>(ln: usize, rec: &[&str], n: usize, what: &str) -> Result<Vec<T>> {
    if rec.len() != n {
        return Err(Error::Parse { line: ln, msg: format!("{what} record needs {n} fields, found {}", rec.len()) });
    }
    rec.iter()
        .map(|f| f.parse().map_err(|_| Error::Parse { line: ln, msg: format!("invalid {what} field '{f}'") }))
        .collect()
}

fn one_based(ln: usize, v: usize, limit: usize, what: &str) -> Result<usize> {
    if v == 0 || v > limit {
        return Err(Error::Parse { line: ln, msg: format!("{what} index {v} outside 1..={limit}") });
    }
    Ok(v - 1)
}

pub fn parse_mesh(text: &str) -> Result<HybridMesh> {
    let sec = split_sections(text)?;
    let get = |name: &str| sec.get(name).map(|(_, r)| r.as_slice()).unwrap_or(&[]);
    if !sec.contains_key("Vertices") {
        return Err(Error::Parse { line: 1, msg: "missing $Vertices section".into() });
    }
    let mut vertices = Vec::new();
    for (ln, rec) in get("Vertices") {
        let v: Vec<f64> = fields(*ln, rec, 3, "vertex")?;
        vertices.push([v[0], v[1], v[2]]);
    }
    let nv = vertices.len();
    let mut wedges = Vec::new();
    for (ln, rec) in get("Wedges") {
        let v: Vec<usize> = fields(*ln, rec, 6, "wedge")?;
        let mut w = [0; 6];
        for k in 0..6 {
            w[k] = one_based(*ln, v[k], nv, "vertex")?;
        }
        wedges.push(w);
    }
    let mut tets = Vec::new();
    for (ln, rec) in get("Tets") {
        let v: Vec<usize> = fields(*ln, rec, 4, "tet")?;
        let mut t = [0; 4];
        for k in 0..4 {
            t[k] = one_based(*ln, v[k], nv, "vertex")?;
        }
        tets.push(t);
    }
    let ne = wedges.len() + tets.len();
    let media = if let Some((hl, recs)) = sec.get("Media") {
        if recs.len() != ne {
            return Err(Error::Parse { line: *hl, msg: format!("{} media records for {ne} elements", recs.len()) });
        }
        recs.iter()
            .map(|(ln, rec)| {
                let v: Vec<f64> = fields(*ln, rec, 2, "medium")?;
                Ok(Medium::new(v[0], v[1]))
            })
            .collect::<Result<Vec<_>>>()?
    } else {
        vec![Medium::UNIT; ne]
    };
    let mut boundary = Vec::new();
    for (ln, rec) in get("Boundary") {
        let v: Vec<usize> = fields(*ln, rec, 3, "boundary")?;
        let element = one_based(*ln, v[0], ne, "element")?;
        let nf = if element < wedges.len() { 5 } else { 4 };
        let face = one_based(*ln, v[1], nf, "face")?;
        boundary.push(BoundaryFace { element, face, tag: v[2] as u32 });
    }
    let mesh = HybridMesh { vertices, wedges, tets, media, boundary };
    mesh.validate()?;
    Ok(mesh)
}

/// Load and validate a mesh file.
pub fn load_mesh(path: &Path) -> Result<HybridMesh> {
    parse_mesh(&std::fs::read_to_string(path)?)
}

pub fn save_surface(surface: &SurfaceMesh, path: &Path) -> Result<()> {
    let mut s = String::new();
    let _ = writeln!(s, "$SurfaceVertices\n{}", surface.xy.len());
    for (v, p) in surface.xy.iter().enumerate() {
        let _ = writeln!(
            s,
            "{} {} {} {}",
            fmt_f(p[0]),
            fmt_f(p[1]),
            fmt_f(surface.z_bottom[v]),
            fmt_f(surface.z_top[v])
        );
    }
    let _ = writeln!(s, "$Triangles\n{}", surface.triangles.len());
    for t in &surface.triangles {
        let _ = writeln!(s, "{} {} {}", t[0] + 1, t[1] + 1, t[2] + 1);
    }
    std::fs::write(path, s)?;
    Ok(())
}

pub fn parse_surface(text: &str) -> Result<SurfaceMesh> {
    let sec = split_sections(text)?;
    let (_, verts) = sec
        .get("SurfaceVertices")
        .ok_or_else(|| Error::Parse { line: 1, msg: "missing $SurfaceVertices section".into() })?;
    let (_, tris) = sec
        .get("Triangles")
        .ok_or_else(|| Error::Parse { line: 1, msg: "missing $Triangles section".into() })?;
    let mut surface = SurfaceMesh { xy: Vec::new(), triangles: Vec::new(), z_bottom: Vec::new(), z_top: Vec::new() };
    for (ln, rec) in verts {
        let v: Vec<f64> = fields(*ln, rec, 4, "surface vertex")?;
        surface.xy.push([v[0], v[1]]);
        surface.z_bottom.push(v[2]);
        surface.z_top.push(v[3]);
    }
    let nv = surface.xy.len();
    for (ln, rec) in tris {
        let v: Vec<usize> = fields(*ln, rec, 3, "triangle")?;
        surface.triangles.push([
            one_based(*ln, v[0], nv, "vertex")?,
            one_based(*ln, v[1], nv, "vertex")?,
            one_based(*ln, v[2], nv, "vertex")?,
        ]);
    }
    Ok(surface)
}

pub fn load_surface(path: &Path) -> Result<SurfaceMesh> {
    parse_surface(&std::fs::read_to_string(path)?)
}
