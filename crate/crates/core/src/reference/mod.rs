//! Reference elements: interval, bi-unit triangle, wedge (triangle ⊗ line)
//! and tetrahedron.
//!
//! Conventions used throughout the crate:
//! - triangle vertices (-1,-1), (1,-1), (-1,1), area 2;
//! - interval [-1, 1] with GLL nodes;
//! - wedge = triangle × [-1, 1], node `(i, j)` has flat index `i * (N+1) + j`;
//! - tet vertices (-1,-1,-1), (1,-1,-1), (-1,1,-1), (-1,-1,1), volume 4/3.

pub mod interval;
pub mod jacobi;
pub mod nodes;
pub mod tet;
pub mod triangle;
pub mod wedge;

use std::io::Write;
use std::path::Path;

pub use interval::{build_interval, Interval1D};
pub use tet::{build_tet_ref, TetRef};
pub use triangle::{build_triangle, TriangleRef};
pub use wedge::{build_wedge_ref, WedgeRef};

use crate::{Error, Result};

pub const MAX_DEGREE: usize = 9;

pub(crate) fn check_degree(n: usize) -> Result<()> {
    if (1..=MAX_DEGREE).contains(&n) {
        Ok(())
    } else {
        Err(Error::Config(format!(
            "polynomial degree N = {n} outside supported range 1..={MAX_DEGREE}"
        )))
    }
}

/// All reference data needed at one polynomial degree.
#[derive(Debug, Clone)]
pub struct ReferenceSet {
    pub degree: usize,
    pub interval: Interval1D,
    pub tri: TriangleRef,
    pub wedge: WedgeRef,
    pub tet: TetRef,
}

impl ReferenceSet {
    pub fn new(n: usize) -> Result<Self> {
        let interval = build_interval(n)?;
        let tri = build_triangle(n)?;
        let wedge = build_wedge_ref(&tri, &interval)?;
        let tet = build_tet_ref(n)?;
        Ok(Self {
            degree: n,
            interval,
            tri,
            wedge,
            tet,
        })
    }

    /// Write every node set and reference matrix as CSV (row-major, 17
    /// significant digits), one file per matrix.
    pub fn dump_csv(&self, dir: &Path) -> Result<Vec<std::path::PathBuf>> {
        std::fs::create_dir_all(dir)?;
        let mut written = Vec::new();
        let mut put = |name: &str, m: &nalgebra::DMatrix<f64>| -> Result<()> {
            let path = dir.join(format!("{name}.csv"));
            let mut f = std::io::BufWriter::new(std::fs::File::create(&path)?);
            for i in 0..m.nrows() {
                let row: Vec<String> = (0..m.ncols()).map(|j| format!("{:.16e}", m[(i, j)])).collect();
                writeln!(f, "{}", row.join(","))?;
            }
            written.push(path);
            Ok(())
        };
        let col = |v: &[f64]| nalgebra::DMatrix::from_column_slice(v.len(), 1, v);
        let cols = |vs: &[&[f64]]| {
            nalgebra::DMatrix::from_fn(vs[0].len(), vs.len(), |i, j| vs[j][i])
        };
        let iv = &self.interval;
        put("interval_nodes", &cols(&[&iv.nodes, &iv.weights]))?;
        put("interval_dt", &iv.dt)?;
        put("interval_mass", &iv.mass)?;
        put("interval_lift_bottom", &col(&iv.lift_bottom))?;
        put("interval_lift_top", &col(&iv.lift_top))?;
        let tri = &self.tri;
        put("tri_nodes", &cols(&[&tri.r, &tri.s]))?;
        put("tri_vandermonde", &tri.v)?;
        put("tri_dr", &tri.dr)?;
        put("tri_ds", &tri.ds)?;
        put("tri_mass", &tri.mass)?;
        let w = &self.wedge;
        put("wedge_nodes", &cols(&[&w.r, &w.s, &w.t]))?;
        let tet = &self.tet;
        put("tet_nodes", &cols(&[&tet.r, &tet.s, &tet.t]))?;
        put("tet_vandermonde", &tet.v)?;
        put("tet_dr", &tet.dr)?;
        put("tet_ds", &tet.ds)?;
        put("tet_dt", &tet.dt)?;
        put("tet_mass", &tet.mass)?;
        for f in 0..4 {
            put(&format!("tet_lift_face{f}"), &tet.lift[f])?;
        }
        Ok(written)
    }
}
