//! Analytic fields used as initial conditions and reference solutions.

use std::f64::consts::PI;

use crate::mesh::{Medium, Point};

/// Angular frequency `c √3 π / 2` of the cube standing wave.
pub fn standing_wave_frequency(medium: Medium) -> f64 {
    medium.speed() * 3f64.sqrt() * PI / 2.0
}

/// Standing wave on `[-1,1]^3` with `p = 0` on the boundary:
/// `p = cos(πx/2) cos(πy/2) cos(πz/2) cos(ωt)`, `u = -(1/ρ) ∫ ∇p dt`.
pub fn standing_wave(x: Point, t: f64, medium: Medium) -> [f64; 4] {
    let k = PI / 2.0;
    let (cx, cy, cz) = ((k * x[0]).cos(), (k * x[1]).cos(), (k * x[2]).cos());
    let (sx, sy, sz) = ((k * x[0]).sin(), (k * x[1]).sin(), (k * x[2]).sin());
    let w = standing_wave_frequency(medium);
    let a = k * (w * t).sin() / (medium.rho * w);
    [cx * cy * cz * (w * t).cos(), a * sx * cy * cz, a * cx * sy * cz, a * cx * cy * sz]
}

/// Pressure pulse `exp(-|x - x0|² / (2 σ²))` at rest.
pub fn gaussian_pulse(x: Point, center: Point, width: f64) -> [f64; 4] {
    let r2: f64 = (0..3).map(|d| (x[d] - center[d]).powi(2)).sum();
    [(-r2 / (2.0 * width * width)).exp(), 0.0, 0.0, 0.0]
}
