use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flowfield::FlowField;
use crate::navigator::{on_path, EpisodeGeometry};
use crate::scalar::Scalar;

pub const DEFAULT_GROWTH_FACTOR: f64 = 100.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensitivityConfig<T> {
    /// Heading perturbation `ε` in radians.
    pub epsilon: T,
    pub dt: T,
    pub horizon: T,
    /// Length converting `ε` into an initial separation scale.
    pub length_scale: T,
    pub growth_factor: T,
}

impl<T: Scalar> SensitivityConfig<T> {
    pub fn new(epsilon: T, dt: T, horizon: T, length_scale: T) -> Self {
        Self {
            epsilon,
            dt,
            horizon,
            length_scale,
            growth_factor: T::lit(DEFAULT_GROWTH_FACTOR),
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("epsilon", self.epsilon),
            ("dt", self.dt),
            ("horizon", self.horizon),
            ("length_scale", self.length_scale),
            ("growth_factor", self.growth_factor),
        ] {
            if !(v > T::zero()) || !v.is_finite() {
                return Err(Error::param(name, format!("must be > 0, got {v}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitivityCurve<T> {
    pub times: Vec<T>,
    pub separation: Vec<T>,
    /// `growth_factor · (initial separation + ε · length_scale)`.
    pub threshold: T,
    /// First sample time at which the separation exceeds `threshold`.
    pub threshold_time: Option<T>,
}

impl<T: Scalar> SensitivityCurve<T> {
    /// Least-squares slope of `ln |ΔX|` against `t` over the second half of
    /// the curve.
    pub fn growth_rate(&self) -> f64 {
        let n = self.times.len();
        let pts: Vec<(f64, f64)> = (n / 2..n)
            .filter(|&i| self.separation[i] > T::zero())
            .map(|i| (self.times[i].to_f64_lossy(), self.separation[i].to_f64_lossy().ln()))
            .collect();
        if pts.len() < 2 {
            return 0.0;
        }
        let m = pts.len() as f64;
        let (mx, my) = pts.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0 / m, a.1 + p.1 / m));
        let (sxy, sxx) = pts
            .iter()
            .fold((0.0, 0.0), |a, p| (a.0 + (p.0 - mx) * (p.1 - my), a.1 + (p.0 - mx) * (p.0 - mx)));
        sxy / sxx
    }
}

/// Follows two optimal-navigation paths from the start centre with headings
/// `θ0` and `θ0 + ε`, ignoring the target, and records their separation.
pub fn sensitivity<T: Scalar>(
    flow: &FlowField<T>,
    geometry: &EpisodeGeometry<T>,
    theta0: T,
    cfg: &SensitivityConfig<T>,
) -> Result<SensitivityCurve<T>> {
    cfg.validate()?;
    let steps = (cfg.horizon / cfg.dt).ceil().to_usize().unwrap_or(0);
    let a = on_path(flow, geometry.start, theta0, geometry.speed, cfg.dt, steps, T::zero());
    let b = on_path(flow, geometry.start, theta0 + cfg.epsilon, geometry.speed, cfg.dt, steps, T::zero());
    let separation: Vec<T> = a.iter().zip(&b).map(|(p, q)| p.position.distance(q.position)).collect();
    let threshold = cfg.growth_factor * (separation[0] + cfg.epsilon * cfg.length_scale);
    let threshold_time = a
        .iter()
        .zip(&separation)
        .find(|(_, s)| **s > threshold)
        .map(|(p, _)| p.t);
    Ok(SensitivityCurve {
        times: a.iter().map(|p| p.t).collect(),
        separation,
        threshold,
        threshold_time,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Vec2;

    fn geometry(speed: f64) -> EpisodeGeometry<f64> {
        EpisodeGeometry::new(Vec2::new(1.0, 1.0), Vec2::new(5.0, 1.0), 0.1, 0.1, speed).unwrap()
    }

    #[test]
    fn quiescent_separation_is_linear() {
        let cfg = SensitivityConfig::new(1e-6, 0.05, 20.0, 0.6);
        let c = sensitivity(&FlowField::quiescent(), &geometry(0.5), 0.3, &cfg).unwrap();
        let t_end = *c.times.last().unwrap();
        let s_end = *c.separation.last().unwrap();
        let chord = 2.0 * 0.5 * t_end * (0.5e-6_f64).sin();
        assert!((s_end - chord).abs() < 1e-12);
        assert!(c.threshold_time.is_none());
        assert!(c.growth_rate().abs() < 0.1);
    }

    #[test]
    fn uniform_flow_is_also_linear() {
        let cfg = SensitivityConfig::new(1e-6, 0.05, 20.0, 0.6);
        let flow = FlowField::uniform(Vec2::new(0.3, -0.2));
        let c = sensitivity(&flow, &geometry(0.5), 1.0, &cfg).unwrap();
        assert!(c.threshold_time.is_none());
        assert!(c.growth_rate().abs() < 0.1);
    }

    #[test]
    fn rejects_zero_epsilon() {
        let cfg = SensitivityConfig::new(0.0, 0.05, 1.0, 1.0);
        assert!(sensitivity(&FlowField::quiescent(), &geometry(1.0), 0.0, &cfg).is_err());
    }
}
