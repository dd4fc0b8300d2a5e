// SPDX-License-Identifier: Apache-2.0

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::point::Vec2;

use super::{BoundaryCurve, GeometryError};

/// Initial geometries, each a polar curve `r(θ)` sampled at uniform angles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Preset {
    Circle,
    SmoothAsterisk,
    SharpAsterisk,
    Amoeba,
}

impl Preset {
    pub const ALL: [Preset; 4] = [
        Preset::Circle,
        Preset::SmoothAsterisk,
        Preset::SharpAsterisk,
        Preset::Amoeba,
    ];

    /// Unscaled polar radius.
    pub fn radius(self, theta: f64) -> f64 {
        match self {
            Preset::Circle => 1.0,
            Preset::SmoothAsterisk => 1.0 + 0.15 * (7.0 * theta).cos(),
            Preset::SharpAsterisk => 1.0 + 0.35 * (7.0 * theta).cos(),
            Preset::Amoeba => {
                1.0 + 0.25 * (3.0 * theta).cos() + 0.18 * (5.0 * theta).sin() + 0.12 * (8.0 * theta + 1.1).cos()
            }
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Preset::Circle => "circle",
            Preset::SmoothAsterisk => "smooth_asterisk",
            Preset::SharpAsterisk => "sharp_asterisk",
            Preset::Amoeba => "amoeba",
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = GeometryError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| GeometryError::UnknownPreset(s.to_string()))
    }
}

/// Counterclockwise preset curve with `n_nodes` nodes at `θ_k = 2πk/n`.
pub fn preset(name: Preset, n_nodes: usize, scale: f64) -> Result<BoundaryCurve, GeometryError> {
    if n_nodes < 32 {
        return Err(GeometryError::PresetTooCoarse(n_nodes));
    }
    let nodes = (0..n_nodes)
        .map(|k| {
            let theta = 2.0 * PI * k as f64 / n_nodes as f64;
            Vec2::from_polar(scale * name.radius(theta), theta)
        })
        .collect();
    BoundaryCurve::new(nodes, true)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn circle_nodes_on_unit_radius() {
        let c = preset(Preset::Circle, 64, 1.0).unwrap();
        assert!(c.nodes().iter().all(|p| (p.norm() - 1.0).abs() < 1e-15));
        assert!(c.is_counterclockwise());
    }

    #[test]
    fn smooth_asterisk_peak_radius() {
        let c = preset(Preset::SmoothAsterisk, 64, 2.0).unwrap();
        assert!((c.node(0).norm() - 2.3).abs() < 1e-14);
        let max = c.nodes().iter().map(|p| p.norm()).fold(0.0, f64::max);
        assert!((max - 2.3).abs() < 1e-14);
    }

    #[test]
    fn names_round_trip() {
        for p in Preset::ALL {
            assert_eq!(p.name().parse::<Preset>().unwrap(), p);
        }
        assert!(matches!("blob".parse::<Preset>(), Err(GeometryError::UnknownPreset(_))));
        assert!(matches!(
            preset(Preset::Circle, 16, 1.0),
            Err(GeometryError::PresetTooCoarse(16))
        ));
    }
}
