//! Streamfunction mode sums: `ψ(x, t) = Σ a_k sin(κ k·x + φ_k)` with optional
//! stochastic evolution of each modal coefficient.
//!
//! Velocity is `u = (∂_y ψ, -∂_x ψ)`, so every field built here is exactly
//! divergence free and its gradient has zero trace by construction.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{Mat2, Vec2};
use crate::scalar::Scalar;

/// Largest wavevector component a mode sum may contain.
pub const MAX_WAVENUMBER: i32 = 64;
const TABLE: usize = 2 * MAX_WAVENUMBER as usize + 1;

/// Power-law target spectrum for synthetic turbulence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumSpec<T> {
    /// Smallest shell, in units of `2π/L`.
    pub k_min: u32,
    /// Largest shell, in units of `2π/L`.
    pub k_max: u32,
    pub slope: T,
    /// Energy of shell `k = 1`; shell `k` receives `energy_scale · k^slope`.
    pub energy_scale: T,
    pub seed: u64,
    pub period: T,
}

impl<T: Scalar> SpectrumSpec<T> {
    /// A `k^(-5/3)` spectrum on the default `2π` period.
    pub fn kolmogorov(k_min: u32, k_max: u32, seed: u64) -> Self {
        Self {
            k_min,
            k_max,
            slope: T::lit(-5.0 / 3.0),
            energy_scale: T::one(),
            seed,
            period: T::two_pi(),
        }
    }

    pub fn with_energy_scale(mut self, energy_scale: T) -> Self {
        self.energy_scale = energy_scale;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.k_min < 1 || self.k_min >= self.k_max {
            return Err(Error::param(
                "k_min",
                format!("need 1 <= k_min < k_max, got {} and {}", self.k_min, self.k_max),
            ));
        }
        if self.k_max as i32 >= MAX_WAVENUMBER {
            return Err(Error::param(
                "k_max",
                format!("must be below {MAX_WAVENUMBER}, got {}", self.k_max),
            ));
        }
        if !(self.slope < T::zero()) {
            return Err(Error::param("slope", format!("must be negative, got {}", self.slope)));
        }
        if !(self.energy_scale > T::zero()) || !self.energy_scale.is_finite() {
            return Err(Error::param(
                "energy_scale",
                format!("must be positive, got {}", self.energy_scale),
            ));
        }
        if !(self.period > T::zero()) || !self.period.is_finite() {
            return Err(Error::param("period", format!("must be positive, got {}", self.period)));
        }
        Ok(())
    }
}

/// One streamfunction Fourier component.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FourierMode<T> {
    /// Integer wavevector in units of `2π/L`.
    pub wavevector: (i32, i32),
    /// Streamfunction amplitude.
    pub amplitude: T,
    pub phase: T,
    /// Decorrelation rate of the modal coefficient; zero for frozen modes.
    pub decorrelation_rate: T,
}

impl<T: Scalar> FourierMode<T> {
    pub fn frozen(kx: i32, ky: i32, amplitude: T, phase: T) -> Self {
        Self {
            wavevector: (kx, ky),
            amplitude,
            phase,
            decorrelation_rate: T::zero(),
        }
    }

    /// Wavenumber magnitude `|k|` in units of `2π/L`.
    pub fn wavenumber(&self) -> f64 {
        let (kx, ky) = self.wavevector;
        (kx as f64).hypot(ky as f64)
    }

    fn validate(&self) -> Result<()> {
        let (kx, ky) = self.wavevector;
        if kx == 0 && ky == 0 {
            return Err(Error::param("wavevector", "the (0, 0) mode carries no velocity"));
        }
        if kx.abs() > MAX_WAVENUMBER || ky.abs() > MAX_WAVENUMBER {
            return Err(Error::param(
                "wavevector",
                format!("components must be within ±{MAX_WAVENUMBER}, got ({kx}, {ky})"),
            ));
        }
        if !(self.amplitude >= T::zero()) || !self.amplitude.is_finite() {
            return Err(Error::param("amplitude", format!("must be >= 0, got {}", self.amplitude)));
        }
        if !self.phase.is_finite() {
            return Err(Error::param("phase", "must be finite"));
        }
        if !(self.decorrelation_rate >= T::zero()) || !self.decorrelation_rate.is_finite() {
            return Err(Error::param(
                "decorrelation_rate",
                format!("must be >= 0, got {}", self.decorrelation_rate),
            ));
        }
        Ok(())
    }
}

/// Parameters that regenerate the stochastic coefficient paths of an
/// evolving mode sum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvolutionParams<T> {
    pub seed: u64,
    /// Paths are periodic in time with this period.
    pub horizon: T,
    /// Knots per decorrelation time of each mode.
    pub knots_per_decorrelation: u32,
}

#[derive(Debug, Clone, PartialEq)]
struct Term<T> {
    ix: usize,
    iy: usize,
    kx: T,
    ky: T,
    /// `a e^{iφ}`
    coeff: (T, T),
    /// Knots of the unit-variance complex Ornstein-Uhlenbeck multiplier, or
    /// `None` for frozen modes.
    path: Option<Vec<(T, T)>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModeSum<T> {
    modes: Vec<FourierMode<T>>,
    terms: Vec<Term<T>>,
    period: T,
    kmax: usize,
    evolution: Option<EvolutionParams<T>>,
    spectrum: Option<SpectrumSpec<T>>,
}

#[inline]
fn cmul<T: Scalar>(a: (T, T), b: (T, T)) -> (T, T) {
    (a.0 * b.0 - a.1 * b.1, a.0 * b.1 + a.1 * b.0)
}

impl<T: Scalar> ModeSum<T> {
    /// Frozen mode sum over period `period`.
    pub fn new(modes: Vec<FourierMode<T>>, period: T) -> Result<Self> {
        if !(period > T::zero()) || !period.is_finite() {
            return Err(Error::param("period", format!("must be positive, got {period}")));
        }
        for m in &modes {
            m.validate()?;
        }
        let kappa = T::two_pi() / period;
        let k = MAX_WAVENUMBER as usize;
        let mut kmax = 0usize;
        let terms = modes
            .iter()
            .map(|m| {
                let (kx, ky) = m.wavevector;
                kmax = kmax.max(kx.unsigned_abs() as usize).max(ky.unsigned_abs() as usize);
                let (s, c) = m.phase.sin_cos();
                Term {
                    ix: (k as i32 + kx) as usize,
                    iy: (k as i32 + ky) as usize,
                    kx: kappa * T::lit(kx as f64),
                    ky: kappa * T::lit(ky as f64),
                    coeff: (m.amplitude * c, m.amplitude * s),
                    path: None,
                }
            })
            .collect();
        Ok(Self {
            modes,
            terms,
            period,
            kmax,
            evolution: None,
            spectrum: None,
        })
    }

    /// Attaches seeded stochastic paths to every mode with a nonzero
    /// decorrelation rate.
    ///
    /// Each modal coefficient is multiplied by a complex Ornstein-Uhlenbeck
    /// process `z(t)` with `z(0) = 1`, `E|z|² = 1` and correlation
    /// `exp(-rate·s)`, sampled on a periodic knot grid and linearly
    /// interpolated.
    pub fn evolving(mut self, params: EvolutionParams<T>) -> Result<Self> {
        if !(params.horizon > T::zero()) || !params.horizon.is_finite() {
            return Err(Error::param(
                "horizon",
                format!("must be positive and finite, got {}", params.horizon),
            ));
        }
        if params.knots_per_decorrelation == 0 {
            return Err(Error::param("knots_per_decorrelation", "must be >= 1"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
        let horizon = params.horizon.to_f64_lossy();
        for (mode, term) in self.modes.iter().zip(self.terms.iter_mut()) {
            let rate = mode.decorrelation_rate.to_f64_lossy();
            if rate == 0.0 {
                term.path = None;
                continue;
            }
            let n = (horizon * rate * params.knots_per_decorrelation as f64).ceil().max(2.0) as usize;
            let h = horizon / n as f64;
            let rho = (-rate * h).exp();
            let kick = ((1.0 - rho * rho) / 2.0).sqrt();
            let mut z = (1.0_f64, 0.0_f64);
            let mut knots = Vec::with_capacity(n);
            for _ in 0..n {
                knots.push((T::lit(z.0), T::lit(z.1)));
                let gx: f64 = StandardNormal.sample(&mut rng);
                let gy: f64 = StandardNormal.sample(&mut rng);
                z = (rho * z.0 + kick * gx, rho * z.1 + kick * gy);
            }
            term.path = Some(knots);
        }
        self.evolution = Some(params);
        Ok(self)
    }

    pub fn modes(&self) -> &[FourierMode<T>] {
        &self.modes
    }

    pub fn period(&self) -> T {
        self.period
    }

    pub fn evolution(&self) -> Option<&EvolutionParams<T>> {
        self.evolution.as_ref()
    }

    pub fn spectrum(&self) -> Option<&SpectrumSpec<T>> {
        self.spectrum.as_ref()
    }

    pub(crate) fn set_spectrum(&mut self, spec: Option<SpectrumSpec<T>>) {
        self.spectrum = spec;
    }

    pub fn is_time_dependent(&self) -> bool {
        self.terms.iter().any(|t| t.path.is_some())
    }

    /// Time multiplier `z(t)` of one term.
    #[inline]
    fn multiplier(&self, path: &[(T, T)], t: T) -> (T, T) {
        let horizon = self.evolution.as_ref().map(|e| e.horizon).unwrap_or(T::one());
        let n = path.len();
        let s = t.rem_euclid(&horizon) / horizon * T::from_usize_lossy(n);
        let i = s.floor();
        let frac = s - i;
        let i = i.to_usize().unwrap_or(0).min(n - 1);
        let a = path[i];
        let b = path[(i + 1) % n];
        (a.0 + (b.0 - a.0) * frac, a.1 + (b.1 - a.1) * frac)
    }

    fn fill_table(&self, phase: T, table: &mut [(T, T); TABLE]) {
        let k = MAX_WAVENUMBER as usize;
        let (s, c) = phase.sin_cos();
        let e1 = (c, s);
        table[k] = (T::one(), T::zero());
        for n in 1..=self.kmax {
            let e = cmul(table[k + n - 1], e1);
            table[k + n] = e;
            table[k - n] = (e.0, -e.1);
        }
    }

    #[inline]
    fn evaluate<const GRAD: bool>(&self, x: Vec2<T>, t: T) -> (Vec2<T>, Mat2<T>) {
        let kappa = T::two_pi() / self.period;
        let xw = x.x.rem_euclid(&self.period);
        let yw = x.y.rem_euclid(&self.period);
        let zero = (T::zero(), T::zero());
        let mut ex = [zero; TABLE];
        let mut ey = [zero; TABLE];
        self.fill_table(kappa * xw, &mut ex);
        self.fill_table(kappa * yw, &mut ey);

        let (mut u, mut v) = (T::zero(), T::zero());
        let (mut a11, mut a12, mut a21) = (T::zero(), T::zero(), T::zero());
        for term in &self.terms {
            let coeff = match &term.path {
                None => term.coeff,
                Some(path) => cmul(term.coeff, self.multiplier(path, t)),
            };
            let w = cmul(coeff, cmul(ex[term.ix], ey[term.iy]));
            u += term.ky * w.0;
            v -= term.kx * w.0;
            if GRAD {
                a11 -= term.kx * term.ky * w.1;
                a12 -= term.ky * term.ky * w.1;
                a21 += term.kx * term.kx * w.1;
            }
        }
        (Vec2::new(u, v), Mat2::new(a11, a12, a21, -a11))
    }

    #[inline]
    pub fn velocity(&self, x: Vec2<T>, t: T) -> Vec2<T> {
        self.evaluate::<false>(x, t).0
    }

    #[inline]
    pub fn velocity_and_gradient(&self, x: Vec2<T>, t: T) -> (Vec2<T>, Mat2<T>) {
        self.evaluate::<true>(x, t)
    }

    /// Streamfunction value, mainly for diagnostics and tests.
    pub fn streamfunction(&self, x: Vec2<T>, t: T) -> T {
        let kappa = T::two_pi() / self.period;
        let mut psi = T::zero();
        for (mode, term) in self.modes.iter().zip(&self.terms) {
            let (kx, ky) = mode.wavevector;
            let arg = kappa * (T::lit(kx as f64) * x.x + T::lit(ky as f64) * x.y);
            let coeff = match &term.path {
                None => term.coeff,
                Some(path) => cmul(term.coeff, self.multiplier(path, t)),
            };
            let (s, c) = arg.sin_cos();
            psi += cmul(coeff, (c, s)).1;
        }
        psi
    }

    /// The same flow rotated counter-clockwise by `quarter_turns · π/2`.
    pub fn rotated_quarter_turns(&self, quarter_turns: i32) -> Result<Self> {
        let modes = self
            .modes
            .iter()
            .map(|m| {
                let mut k = m.wavevector;
                for _ in 0..quarter_turns.rem_euclid(4) {
                    k = (-k.1, k.0);
                }
                FourierMode { wavevector: k, ..*m }
            })
            .collect();
        let mut out = Self::new(modes, self.period)?;
        if let Some(params) = self.evolution {
            out = out.evolving(params)?;
        }
        Ok(out)
    }
}

/// Integer wavevectors of the half plane (`kx > 0`, or `kx = 0, ky > 0`)
/// whose magnitude lies in `[k_min, k_max + 1)`, in a fixed order.
pub fn half_plane_wavevectors(k_min: u32, k_max: u32) -> Vec<(i32, i32)> {
    let kmax = k_max as i32 + 1;
    let lo2 = (k_min * k_min) as i32;
    let hi2 = kmax * kmax;
    let mut out = Vec::new();
    for kx in 0..=kmax {
        for ky in -kmax..=kmax {
            if kx == 0 && ky <= 0 {
                continue;
            }
            let r2 = kx * kx + ky * ky;
            if r2 >= lo2 && r2 < hi2 {
                out.push((kx, ky));
            }
        }
    }
    out
}

/// Shell index `floor(|k|)` of an integer wavevector.
pub fn shell_of(kx: i32, ky: i32) -> u32 {
    let r2 = (kx as i64 * kx as i64 + ky as i64 * ky as i64) as u64;
    let mut s = (r2 as f64).sqrt() as u64;
    while s * s > r2 {
        s -= 1;
    }
    while (s + 1) * (s + 1) <= r2 {
        s += 1;
    }
    s as u32
}

/// Builds the frozen mode list of a synthetic power-law snapshot.
///
/// All modes in shell `k` share one amplitude, chosen so that the shell's
/// kinetic energy `½⟨|u|²⟩` equals `energy_scale · k^slope`. Phases are
/// uniform on `[0, 2π)` from the spec seed.
pub fn spectrum_modes<T: Scalar>(spec: &SpectrumSpec<T>) -> Result<Vec<FourierMode<T>>> {
    spec.validate()?;
    let kappa = std::f64::consts::TAU / spec.period.to_f64_lossy();
    let wavevectors = half_plane_wavevectors(spec.k_min, spec.k_max);
    let n_shells = spec.k_max as usize + 1;
    let mut shell_k2 = vec![0.0_f64; n_shells + 1];
    for &(kx, ky) in &wavevectors {
        shell_k2[shell_of(kx, ky) as usize] += (kx * kx + ky * ky) as f64;
    }
    let slope = spec.slope.to_f64_lossy();
    let scale = spec.energy_scale.to_f64_lossy();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let modes = wavevectors
        .iter()
        .map(|&(kx, ky)| {
            let shell = shell_of(kx, ky);
            let target = scale * (shell as f64).powf(slope);
            // Each mode contributes (a κ |k|)² / 4 to ½⟨|u|²⟩.
            let amplitude = (4.0 * target / (kappa * kappa * shell_k2[shell as usize])).sqrt();
            let phase = rng.random_range(0.0..std::f64::consts::TAU);
            FourierMode::frozen(kx, ky, T::lit(amplitude), T::lit(phase))
        })
        .collect();
    Ok(modes)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shells_are_floor_of_magnitude() {
        assert_eq!(shell_of(1, 0), 1);
        assert_eq!(shell_of(1, 1), 1);
        assert_eq!(shell_of(3, 4), 5);
        assert_eq!(shell_of(7, 7), 9);
    }

    #[test]
    fn half_plane_has_no_opposite_pairs() {
        let ks = half_plane_wavevectors(1, 10);
        for &(kx, ky) in &ks {
            assert!(!ks.contains(&(-kx, -ky)));
            let s = shell_of(kx, ky);
            assert!((1..=10).contains(&s));
        }
        // every shell is populated
        for s in 1..=10 {
            assert!(ks.iter().any(|&(kx, ky)| shell_of(kx, ky) == s));
        }
    }

    #[test]
    fn rejects_zero_mode() {
        let m = FourierMode::frozen(0, 0, 1.0_f64, 0.0);
        assert!(ModeSum::new(vec![m], std::f64::consts::TAU).is_err());
    }

    #[test]
    fn invalid_spectra_are_rejected() {
        let ok = SpectrumSpec::<f64>::kolmogorov(1, 10, 7);
        assert!(ok.validate().is_ok());
        assert!(SpectrumSpec { k_min: 0, ..ok }.validate().is_err());
        assert!(SpectrumSpec { k_min: 10, ..ok }.validate().is_err());
        assert!(SpectrumSpec { slope: 0.5, ..ok }.validate().is_err());
        assert!(SpectrumSpec { energy_scale: 0.0, ..ok }.validate().is_err());
    }

    #[test]
    fn evolving_path_starts_at_frozen_value() {
        let m = FourierMode {
            decorrelation_rate: 0.5,
            ..FourierMode::frozen(1, 2, 0.3_f64, 0.7)
        };
        let frozen = ModeSum::new(vec![m], std::f64::consts::TAU).unwrap();
        let evolving = frozen
            .clone()
            .evolving(EvolutionParams {
                seed: 3,
                horizon: 50.0,
                knots_per_decorrelation: 4,
            })
            .unwrap();
        let x = Vec2::new(0.4, 1.9);
        assert_eq!(frozen.velocity(x, 0.0), evolving.velocity(x, 0.0));
        assert_ne!(frozen.velocity(x, 10.0), evolving.velocity(x, 10.0));
        // periodic in time with the horizon
        let a = evolving.velocity(x, 3.3);
        let b = evolving.velocity(x, 53.3);
        assert!((a - b).norm() < 1e-12);
    }
}
