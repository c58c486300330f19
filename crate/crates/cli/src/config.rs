//! Experiment configuration, read from TOML.
//!
//! Every section is optional and falls back to the defaults below. Relative
//! paths are resolved against the directory holding the config file.

use std::f64::consts::TAU;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub output_dir: PathBuf,
    pub flow: FlowSection,
    pub geometry: GeometrySection,
    pub rl: RlSection,
    pub eval: EvalSection,
    pub on: OnSection,
    pub occupancy: OccupancySection,
    pub ow_map: OwMapSection,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FlowKindName {
    Spectrum,
    Import,
    Quiescent,
    Uniform,
    TaylorGreen,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FlowSection {
    pub kind: FlowKindName,
    /// Flow file for `kind = "import"`.
    pub path: Option<PathBuf>,
    pub k_min: u32,
    pub k_max: u32,
    pub slope: f64,
    pub energy_scale: f64,
    /// Rescale the spectrum so the maximum speed at `t = 0` equals this.
    pub normalize_u_max: Option<f64>,
    pub seed: u64,
    pub period: f64,
    pub unsteady: bool,
    /// Decorrelation time of the largest-scale modes.
    pub decorrelation_time: f64,
    pub velocity: [f64; 2],
    pub amplitude: f64,
}

impl Default for FlowSection {
    fn default() -> Self {
        Self {
            kind: FlowKindName::Spectrum,
            path: None,
            k_min: 1,
            k_max: 12,
            slope: -5.0 / 3.0,
            energy_scale: 1.0,
            normalize_u_max: Some(1.0),
            seed: 1,
            period: TAU,
            unsteady: false,
            decorrelation_time: 5.0,
            velocity: [0.0, 0.0],
            amplitude: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GeometrySection {
    pub x_a: [f64; 2],
    pub x_b: [f64; 2],
    pub d_a: f64,
    pub d_b: f64,
    /// Propulsion speed as a fraction of the flow's maximum speed.
    pub v_s_ratio: f64,
    /// Absolute propulsion speed; replaces `v_s_ratio · u_max`.
    pub v_s: Option<f64>,
    pub t_max_factor: f64,
}

impl Default for GeometrySection {
    fn default() -> Self {
        Self {
            x_a: [0.6 * TAU, TAU],
            x_b: [1.4 * TAU, TAU],
            d_a: TAU / 20.0,
            d_b: TAU / 20.0,
            v_s_ratio: 0.8,
            v_s: None,
            t_max_factor: znav_core::navigator::DEFAULT_T_MAX_FACTOR,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RlSection {
    pub tiles: [usize; 2],
    pub origin: [f64; 2],
    pub tile_size: f64,
    pub include_off: bool,
    pub lambda: f64,
    pub decision_interval: f64,
    pub substeps: usize,
    pub actor_lr: f64,
    pub critic_lr: f64,
    pub lr_decay: bool,
    pub n_episodes: usize,
    pub seed: u64,
}

impl Default for RlSection {
    fn default() -> Self {
        Self {
            tiles: [30, 30],
            origin: [-0.5 * TAU, -0.5 * TAU],
            tile_size: TAU / 10.0,
            include_off: true,
            lambda: 0.0,
            decision_interval: 0.5,
            substeps: 10,
            actor_lr: 0.1,
            critic_lr: 0.1,
            lr_decay: false,
            n_episodes: 10_000,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvalSection {
    pub n_traj: usize,
    pub mode: znav_core::rl::EvalMode,
    pub seed: u64,
    pub fixed_start: bool,
    pub write_trajectories: bool,
    pub n_bins: usize,
}

impl Default for EvalSection {
    fn default() -> Self {
        Self {
            n_traj: 2000,
            mode: znav_core::rl::EvalMode::Stochastic,
            seed: 1000,
            fixed_start: false,
            write_trajectories: false,
            n_bins: znav_core::stats::DEFAULT_BINS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OnSection {
    pub n_angles: usize,
    pub n_starts: usize,
    pub dt: f64,
    pub seed: u64,
    pub start_at_center: bool,
    /// Keep every n-th integration step of each trajectory.
    pub record_stride: usize,
    pub write_trajectories: bool,
}

impl Default for OnSection {
    fn default() -> Self {
        Self {
            n_angles: 100,
            n_starts: 200,
            dt: 0.1,
            seed: 7,
            start_at_center: false,
            record_stride: 10,
            write_trajectories: false,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OccupancySection {
    /// Defaults to half a tile.
    pub pixel: Option<f64>,
    /// `[x_min, y_min, x_max, y_max]`; defaults to the tiled arena.
    pub bounds: Option<[f64; 4]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OwMapSection {
    pub n: usize,
    pub t: f64,
}

impl Default for OwMapSection {
    fn default() -> Self {
        Self { n: 256, t: 0.0 }
    }
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            output_dir: PathBuf::from("out"),
            flow: FlowSection::default(),
            geometry: GeometrySection::default(),
            rl: RlSection::default(),
            eval: EvalSection::default(),
            on: OnSection::default(),
            occupancy: OccupancySection::default(),
            ow_map: OwMapSection::default(),
        }
    }
}

fn positive(field: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(CliError::field(field, format!("must be a finite number > 0, got {v}")))
    }
}

fn finite(field: &str, v: &[f64]) -> Result<()> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(CliError::field(field, "must be finite"))
    }
}

fn at_least_one(field: &str, v: usize) -> Result<()> {
    if v >= 1 {
        Ok(())
    } else {
        Err(CliError::field(field, "must be >= 1"))
    }
}

impl ExperimentConfig {
    /// Parses TOML text; relative paths are resolved against `base`.
    pub fn from_toml(text: &str, base: &Path, origin: &str) -> Result<Self> {
        let mut cfg: Self = toml::from_str(text).map_err(|e| CliError::ConfigSyntax {
            path: origin.to_owned(),
            reason: e.to_string(),
        })?;
        if cfg.output_dir.is_relative() {
            cfg.output_dir = base.join(&cfg.output_dir);
        }
        if let Some(p) = &cfg.flow.path {
            if p.is_relative() {
                cfg.flow.path = Some(base.join(p));
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<(Self, Vec<u8>)> {
        let bytes = std::fs::read(path).map_err(|e| CliError::ConfigSyntax {
            path: path.display().to_string(),
            reason: e.to_string(),
        })?;
        let text = std::str::from_utf8(&bytes).map_err(|_| CliError::ConfigSyntax {
            path: path.display().to_string(),
            reason: "not valid UTF-8".into(),
        })?;
        let base = path.parent().unwrap_or(Path::new("."));
        let cfg = Self::from_toml(text, base, &path.display().to_string())?;
        Ok((cfg, bytes))
    }

    /// Range checks with the offending field named in the error.
    pub fn validate(&self) -> Result<()> {
        let f = &self.flow;
        match f.kind {
            FlowKindName::Import => match &f.path {
                None => return Err(CliError::field("flow.path", "required when flow.kind = \"import\"")),
                Some(p) if !p.exists() => {
                    return Err(CliError::field("flow.path", format!("{} does not exist", p.display())))
                }
                _ => {}
            },
            FlowKindName::Spectrum => {
                if f.k_min < 1 {
                    return Err(CliError::field("flow.k_min", "must be >= 1"));
                }
                if f.k_max <= f.k_min || f.k_max as i64 > znav_core::flowfield::MAX_WAVENUMBER as i64 {
                    return Err(CliError::field(
                        "flow.k_max",
                        format!(
                            "must satisfy k_min < k_max <= {}, got {}",
                            znav_core::flowfield::MAX_WAVENUMBER,
                            f.k_max
                        ),
                    ));
                }
                finite("flow.slope", &[f.slope])?;
                positive("flow.energy_scale", f.energy_scale)?;
                if let Some(u) = f.normalize_u_max {
                    positive("flow.normalize_u_max", u)?;
                }
                if f.unsteady {
                    positive("flow.decorrelation_time", f.decorrelation_time)?;
                }
            }
            FlowKindName::Uniform => finite("flow.velocity", &f.velocity)?,
            FlowKindName::TaylorGreen => finite("flow.amplitude", &[f.amplitude])?,
            FlowKindName::Quiescent => {}
        }
        if f.unsteady && f.kind != FlowKindName::Spectrum {
            return Err(CliError::field("flow.unsteady", "only spectrum flows can evolve in time"));
        }
        positive("flow.period", f.period)?;

        let g = &self.geometry;
        finite("geometry.x_a", &g.x_a)?;
        finite("geometry.x_b", &g.x_b)?;
        positive("geometry.d_a", g.d_a)?;
        positive("geometry.d_b", g.d_b)?;
        if !(g.v_s_ratio > 0.0 && g.v_s_ratio <= 1.0) {
            return Err(CliError::field("geometry.v_s_ratio", format!("must lie in (0, 1], got {}", g.v_s_ratio)));
        }
        if let Some(v) = g.v_s {
            positive("geometry.v_s", v)?;
        }
        positive("geometry.t_max_factor", g.t_max_factor)?;
        let sep = ((g.x_b[0] - g.x_a[0]).powi(2) + (g.x_b[1] - g.x_a[1]).powi(2)).sqrt();
        if sep <= g.d_a + g.d_b {
            return Err(CliError::field("geometry.x_b", "start and target discs overlap"));
        }

        let r = &self.rl;
        at_least_one("rl.tiles", r.tiles[0].min(r.tiles[1]))?;
        finite("rl.origin", &r.origin)?;
        positive("rl.tile_size", r.tile_size)?;
        if !(r.lambda >= 0.0 && r.lambda.is_finite()) {
            return Err(CliError::field("rl.lambda", format!("must be >= 0, got {}", r.lambda)));
        }
        positive("rl.decision_interval", r.decision_interval)?;
        at_least_one("rl.substeps", r.substeps)?;
        positive("rl.actor_lr", r.actor_lr)?;
        positive("rl.critic_lr", r.critic_lr)?;
        at_least_one("rl.n_episodes", r.n_episodes)?;

        at_least_one("eval.n_bins", self.eval.n_bins)?;
        at_least_one("on.n_angles", self.on.n_angles)?;
        at_least_one("on.n_starts", self.on.n_starts)?;
        positive("on.dt", self.on.dt)?;
        at_least_one("on.record_stride", self.on.record_stride)?;
        if let Some(p) = self.occupancy.pixel {
            positive("occupancy.pixel", p)?;
        }
        if let Some(b) = self.occupancy.bounds {
            finite("occupancy.bounds", &b)?;
            if !(b[2] > b[0] && b[3] > b[1]) {
                return Err(CliError::field("occupancy.bounds", "need x_min < x_max and y_min < y_max"));
            }
        }
        if self.ow_map.n < 2 {
            return Err(CliError::field("ow_map.n", "must be >= 2"));
        }
        finite("ow_map.t", &[self.ow_map.t])?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<ExperimentConfig> {
        ExperimentConfig::from_toml(text, Path::new("/tmp"), "test.toml")
    }

    #[test]
    fn empty_config_is_default() {
        let c = parse("").unwrap();
        assert_eq!(c.rl, RlSection::default());
        assert_eq!(c.output_dir, PathBuf::from("/tmp/out"));
    }

    #[test]
    fn errors_name_the_field() {
        let cases = [
            ("[geometry]\nv_s_ratio = 1.5", "geometry.v_s_ratio"),
            ("[geometry]\nv_s_ratio = 0.0", "geometry.v_s_ratio"),
            ("[rl]\nlambda = -1.0", "rl.lambda"),
            ("[rl]\nn_episodes = 0", "rl.n_episodes"),
            ("[flow]\nkind = \"import\"", "flow.path"),
            ("[flow]\nkind = \"import\"\npath = \"no/such/file\"", "flow.path"),
            ("[flow]\nk_max = 1", "flow.k_max"),
        ];
        for (text, field) in cases {
            let err = parse(text).unwrap_err();
            assert_eq!(err.exit_code(), 1);
            assert!(err.to_string().contains(field), "{text}: {err}");
        }
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = parse("[rl]\nlamda = 2.0").unwrap_err();
        assert!(matches!(err, CliError::ConfigSyntax { .. }));
        assert_eq!(err.exit_code(), 1);
    }
}
