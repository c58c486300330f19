//! Divergence-free 2D periodic flows: closed-form test flows, synthetic
//! power-law turbulence (frozen or evolving) and gridded imports.

mod analytic;
mod gridded;
mod io;
mod modesum;
mod spectrum;

pub use analytic::AnalyticFlow;
pub use gridded::GriddedFlow;
pub use io::{export_flow, import_flow, read_flow, write_flow, FLOW_FORMAT, FLOW_VERSION};
pub use modesum::{
    half_plane_wavevectors, shell_of, spectrum_modes, EvolutionParams, FourierMode, ModeSum,
    SpectrumSpec, MAX_WAVENUMBER,
};
pub use spectrum::{measure_spectrum, ShellSpectrum};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{Mat2, Vec2};
use crate::scalar::Scalar;

/// Velocity and velocity gradient `A_ij = ∂_j u_i` at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlowSample<T> {
    pub velocity: Vec2<T>,
    pub gradient: Mat2<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum FlowKind<T> {
    Analytic(AnalyticFlow<T>),
    ModeSum(ModeSum<T>),
    Gridded(GriddedFlow<T>),
}

/// An immutable, `L`-periodic, divergence-free velocity field.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowField<T> {
    kind: FlowKind<T>,
    period: T,
}

/// Knots per decorrelation time used by [`generate_unsteady`].
pub const DEFAULT_KNOTS_PER_DECORRELATION: u32 = 4;
/// Default path horizon of [`generate_unsteady`], in units of the
/// decorrelation time at `k_min`.
pub const DEFAULT_HORIZON_DECORRELATIONS: f64 = 100.0;

impl<T: Scalar> FlowField<T> {
    pub fn analytic(flow: AnalyticFlow<T>, period: T) -> Result<Self> {
        if !(period > T::zero()) || !period.is_finite() {
            return Err(Error::param("period", format!("must be positive, got {period}")));
        }
        if let AnalyticFlow::Uniform(u) = flow {
            if !u.is_finite() {
                return Err(Error::param("uniform velocity", "must be finite"));
            }
        }
        if let AnalyticFlow::TaylorGreen { amplitude } = flow {
            if !amplitude.is_finite() {
                return Err(Error::param("amplitude", "must be finite"));
            }
        }
        Ok(Self {
            kind: FlowKind::Analytic(flow),
            period,
        })
    }

    pub fn quiescent() -> Self {
        Self {
            kind: FlowKind::Analytic(AnalyticFlow::Quiescent),
            period: T::two_pi(),
        }
    }

    pub fn uniform(u: Vec2<T>) -> Self {
        Self {
            kind: FlowKind::Analytic(AnalyticFlow::Uniform(u)),
            period: T::two_pi(),
        }
    }

    /// `u = (sin x cos y, -cos x sin y)` scaled by `amplitude`, period `2π`.
    pub fn taylor_green(amplitude: T) -> Self {
        Self {
            kind: FlowKind::Analytic(AnalyticFlow::TaylorGreen { amplitude }),
            period: T::two_pi(),
        }
    }

    pub fn from_mode_sum(modes: ModeSum<T>) -> Self {
        let period = modes.period();
        Self {
            kind: FlowKind::ModeSum(modes),
            period,
        }
    }

    pub fn from_grid(grid: GriddedFlow<T>) -> Self {
        let period = grid.period();
        Self {
            kind: FlowKind::Gridded(grid),
            period,
        }
    }

    pub fn kind(&self) -> &FlowKind<T> {
        &self.kind
    }

    pub fn period(&self) -> T {
        self.period
    }

    pub fn is_time_dependent(&self) -> bool {
        matches!(&self.kind, FlowKind::ModeSum(m) if m.is_time_dependent())
    }

    /// Period of the time evolution, if the flow evolves.
    pub fn time_period(&self) -> Option<T> {
        match &self.kind {
            FlowKind::ModeSum(m) if m.is_time_dependent() => m.evolution().map(|e| e.horizon),
            _ => None,
        }
    }

    /// Velocity only; cheaper than [`FlowField::sample`] for mode sums.
    #[inline]
    pub fn velocity(&self, x: Vec2<T>, t: T) -> Vec2<T> {
        match &self.kind {
            FlowKind::Analytic(AnalyticFlow::Quiescent) => Vec2::zero(),
            FlowKind::Analytic(AnalyticFlow::Uniform(u)) => *u,
            FlowKind::Analytic(a) => a.sample(x, self.period).0,
            FlowKind::ModeSum(m) => m.velocity(x, t),
            FlowKind::Gridded(g) => g.velocity(x),
        }
    }

    /// Velocity and gradient at `(x mod L, t)`.
    #[inline]
    pub fn sample(&self, x: Vec2<T>, t: T) -> FlowSample<T> {
        let (velocity, gradient) = match &self.kind {
            FlowKind::Analytic(a) => a.sample(x, self.period),
            FlowKind::ModeSum(m) => m.velocity_and_gradient(x, t),
            FlowKind::Gridded(g) => g.sample(x),
        };
        FlowSample { velocity, gradient }
    }

    /// Maximum speed over a uniform scan of one period cell with at least
    /// 256 points per side.
    pub fn u_max(&self, t: T) -> T {
        let n = match &self.kind {
            FlowKind::Gridded(g) => g.dims().0.max(g.dims().1).max(256),
            _ => 256,
        };
        self.u_max_with_resolution(t, n)
    }

    pub fn u_max_with_resolution(&self, t: T, n: usize) -> T {
        let h = self.period / T::from_usize_lossy(n);
        let mut best = T::zero();
        for j in 0..n {
            for i in 0..n {
                let x = Vec2::new(T::from_usize_lossy(i) * h, T::from_usize_lossy(j) * h);
                best = best.max(self.velocity(x, t).norm());
            }
        }
        best
    }

    pub fn okubo_weiss(&self, x: Vec2<T>, t: T) -> T {
        okubo_weiss(&self.sample(x, t).gradient)
    }

    /// The same flow rotated counter-clockwise by `quarter_turns · π/2`
    /// about the origin.
    pub fn rotated_quarter_turns(&self, quarter_turns: i32) -> Result<Self> {
        let kind = match &self.kind {
            FlowKind::Analytic(a) => FlowKind::Analytic(a.rotated_quarter_turns(quarter_turns)),
            FlowKind::ModeSum(m) => FlowKind::ModeSum(m.rotated_quarter_turns(quarter_turns)?),
            FlowKind::Gridded(g) => FlowKind::Gridded(g.rotated_quarter_turns(quarter_turns)?),
        };
        Ok(Self {
            kind,
            period: self.period,
        })
    }

    /// Tabulates the velocity at time `t` on an `n × n` grid.
    pub fn rasterize(&self, n: usize, t: T) -> Result<GriddedFlow<T>> {
        let h = self.period / T::from_usize_lossy(n);
        let mut u = Vec::with_capacity(n * n);
        let mut v = Vec::with_capacity(n * n);
        for j in 0..n {
            for i in 0..n {
                let x = Vec2::new(T::from_usize_lossy(i) * h, T::from_usize_lossy(j) * h);
                let vel = self.velocity(x, t);
                u.push(vel.x);
                v.push(vel.y);
            }
        }
        GriddedFlow::new(n, n, self.period, u, v)
    }
}

/// Okubo-Weiss parameter `(A11 - A22)² + (A21 + A12)² - (A21 - A12)²`:
/// positive where strain dominates, negative where vorticity dominates.
pub fn okubo_weiss<T: Scalar>(a: &Mat2<T>) -> T {
    let normal = a.a11() - a.a22();
    let shear = a.a21() + a.a12();
    let vort = a.a21() - a.a12();
    normal * normal + shear * shear - vort * vort
}

/// Frozen synthetic turbulence with the power-law spectrum of `spec`.
pub fn generate_snapshot<T: Scalar>(spec: &SpectrumSpec<T>) -> Result<FlowField<T>> {
    let modes = spectrum_modes(spec)?;
    let mut sum = ModeSum::new(modes, spec.period)?;
    sum.set_spectrum(Some(*spec));
    Ok(FlowField::from_mode_sum(sum))
}

/// Evolving synthetic turbulence: the snapshot of `spec`, with each modal
/// coefficient decorrelating at rate `(|k|/k_min)^(2/3) / τ`, where
/// `τ = decorrelation_time_at_kmin`. An infinite `τ` yields a frozen field.
pub fn generate_unsteady<T: Scalar>(
    spec: &SpectrumSpec<T>,
    decorrelation_time_at_kmin: T,
) -> Result<FlowField<T>> {
    let horizon = decorrelation_time_at_kmin * T::lit(DEFAULT_HORIZON_DECORRELATIONS);
    generate_unsteady_with_horizon(spec, decorrelation_time_at_kmin, horizon)
}

/// As [`generate_unsteady`], with an explicit time period for the
/// precomputed coefficient paths.
pub fn generate_unsteady_with_horizon<T: Scalar>(
    spec: &SpectrumSpec<T>,
    decorrelation_time_at_kmin: T,
    horizon: T,
) -> Result<FlowField<T>> {
    let tau = decorrelation_time_at_kmin;
    if !(tau > T::zero()) {
        return Err(Error::param(
            "decorrelation_time",
            format!("must be positive, got {tau}"),
        ));
    }
    let mut modes = spectrum_modes(spec)?;
    let k_min = spec.k_min as f64;
    if tau.is_finite() {
        for m in &mut modes {
            let ratio = (m.wavenumber() / k_min).powf(2.0 / 3.0);
            m.decorrelation_rate = T::lit(ratio) / tau;
        }
    }
    let mut sum = ModeSum::new(modes, spec.period)?;
    if tau.is_finite() {
        sum = sum.evolving(EvolutionParams {
            // decorrelate the path stream from the phase stream
            seed: spec.seed ^ 0x9E37_79B9_7F4A_7C15,
            horizon,
            knots_per_decorrelation: DEFAULT_KNOTS_PER_DECORRELATION,
        })?;
    }
    sum.set_spectrum(Some(*spec));
    Ok(FlowField::from_mode_sum(sum))
}
