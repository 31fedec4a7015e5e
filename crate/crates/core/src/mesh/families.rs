//! Refinement families on the box `[-1,1]^3` used by the convergence study.
//!
//! - `Structured`: `n × n` quads split along one diagonal, `n` flat layers.
//! - `Unstructured`: the structured surface with interior vertices jittered
//!   horizontally by up to `0.15 h` per coordinate, extruded, then vertically
//!   perturbed with amplitude 0.3 (seeded).
//! - `Arnold`: a self-similar, non-asymptotically-affine family. Interior
//!   level `k` of column `(i, j)` is displaced by
//!   `0.25 h (-1)^k ([i odd] + [j odd]) / 2`, so every refinement repeats the
//!   same trapezoidal pattern at half the scale.
//!
//! `h = 2 / n`; at `h = 2` all three families coincide.

use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::generate::{perturb_vertically, stack_levels_uniform, structured_surface, DiagonalSplit};
use super::{HybridMesh, Medium};
use crate::{Error, Result};

pub const UNSTRUCTURED_JITTER: f64 = 0.15;
pub const UNSTRUCTURED_AMPLITUDE: f64 = 0.3;
pub const ARNOLD_AMPLITUDE: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeshFamily {
    Structured,
    Unstructured,
    Arnold,
}

impl MeshFamily {
    pub fn name(&self) -> &'static str {
        match self {
            MeshFamily::Structured => "structured",
            MeshFamily::Unstructured => "unstructured",
            MeshFamily::Arnold => "arnold",
        }
    }
}

impl FromStr for MeshFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "structured" => Ok(MeshFamily::Structured),
            "unstructured" => Ok(MeshFamily::Unstructured),
            "arnold" | "arnold-type" => Ok(MeshFamily::Arnold),
            other => Err(Error::Config(format!(
                "unknown mesh family '{other}' (expected structured, unstructured or arnold)"
            ))),
        }
    }
}

/// Number of cells per direction for mesh size `h` on `[-1, 1]`.
pub fn cells_for_h(h: f64) -> Result<usize> {
    let n = (2.0 / h).round();
    if !(n >= 1.0) || ((2.0 / n) - h).abs() > 1e-9 * h {
        return Err(Error::Config(format!("mesh size h = {h} must be 2/n for a positive integer n")));
    }
    Ok(n as usize)
}

/// Wedge mesh of the family at mesh size `h`, unit media.
pub fn family_mesh(family: MeshFamily, h: f64, seed: u64) -> Result<HybridMesh> {
    let n = cells_for_h(h)?;
    let (mut xy, tris) = structured_surface(n, n, [-1.0, 1.0], [-1.0, 1.0], DiagonalSplit::Main);
    let h = 2.0 / n as f64;
    let mut levels: Vec<Vec<f64>> = (0..=n).map(|k| vec![-1.0 + k as f64 * h; xy.len()]).collect();
    match family {
        MeshFamily::Structured => {}
        MeshFamily::Unstructured => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_0f_5a7f);
            for j in 1..n {
                for i in 1..n {
                    let v = j * (n + 1) + i;
                    xy[v][0] += UNSTRUCTURED_JITTER * h * rng.gen_range(-1.0..1.0);
                    xy[v][1] += UNSTRUCTURED_JITTER * h * rng.gen_range(-1.0..1.0);
                }
            }
        }
        MeshFamily::Arnold => {
            for (k, level) in levels.iter_mut().enumerate().take(n).skip(1) {
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                for j in 0..=n {
                    for i in 0..=n {
                        let pattern = ((i % 2) + (j % 2)) as f64 / 2.0;
                        level[j * (n + 1) + i] += ARNOLD_AMPLITUDE * h * sign * pattern;
                    }
                }
            }
        }
    }
    let mesh = stack_levels_uniform(&xy, &tris, &levels, Medium::UNIT);
    mesh.validate()?;
    if family == MeshFamily::Unstructured {
        perturb_vertically(&mesh, UNSTRUCTURED_AMPLITUDE, seed)
    } else {
        Ok(mesh)
    }
}

/// The 16-wedge box (2 × 2 quads, 2 layers) with randomly perturbed interior
/// vertex heights, as used for operator spectra.
pub fn sixteen_wedge_mesh(amplitude: f64, seed: u64) -> Result<HybridMesh> {
    let base = family_mesh(MeshFamily::Structured, 1.0, seed)?;
    perturb_vertically(&base, amplitude, seed)
}
