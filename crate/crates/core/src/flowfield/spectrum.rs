//! Shell-summed kinetic-energy spectra measured from sampled velocity.

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use super::FlowField;
use crate::error::{Error, Result};
use crate::geom::Vec2;
use crate::scalar::Scalar;

/// `E(k)` for integer shells `k = 0, 1, …`, where shell `k` collects the
/// Fourier coefficients with `k ≤ |k| < k + 1`. Normalized so that
/// `Σ_k E(k) = ½⟨|u|²⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct ShellSpectrum {
    pub energy: Vec<f64>,
}

fn fft2(data: &mut [Complex<f64>], n: usize, planner: &mut FftPlanner<f64>) {
    let fft = planner.plan_fft_forward(n);
    for row in data.chunks_mut(n) {
        fft.process(row);
    }
    let mut col = vec![Complex::new(0.0, 0.0); n];
    for i in 0..n {
        for j in 0..n {
            col[j] = data[j * n + i];
        }
        fft.process(&mut col);
        for j in 0..n {
            data[j * n + i] = col[j];
        }
    }
}

/// Samples `flow` on an `n × n` grid at time `t` and shell-sums the energy of
/// its discrete Fourier coefficients.
pub fn measure_spectrum<T: Scalar>(flow: &FlowField<T>, n: usize, t: T) -> Result<ShellSpectrum> {
    if n < 4 {
        return Err(Error::param("n", format!("spectrum grid needs n >= 4, got {n}")));
    }
    let period = flow.period().to_f64_lossy();
    let h = period / n as f64;
    let mut u = vec![Complex::new(0.0, 0.0); n * n];
    let mut v = vec![Complex::new(0.0, 0.0); n * n];
    for j in 0..n {
        for i in 0..n {
            let x = Vec2::new(T::lit(i as f64 * h), T::lit(j as f64 * h));
            let vel = flow.velocity(x, t);
            u[j * n + i] = Complex::new(vel.x.to_f64_lossy(), 0.0);
            v[j * n + i] = Complex::new(vel.y.to_f64_lossy(), 0.0);
        }
    }
    let mut planner = FftPlanner::new();
    fft2(&mut u, n, &mut planner);
    fft2(&mut v, n, &mut planner);
    let norm = 1.0 / (n as f64 * n as f64);
    let signed = |m: usize| if m <= n / 2 { m as f64 } else { m as f64 - n as f64 };
    let n_shells = (n as f64 / 2.0 * std::f64::consts::SQRT_2) as usize + 2;
    let mut energy = vec![0.0; n_shells];
    for j in 0..n {
        for i in 0..n {
            let k = signed(i).hypot(signed(j));
            let shell = k.floor() as usize;
            let cu = u[j * n + i] * norm;
            let cv = v[j * n + i] * norm;
            energy[shell] += 0.5 * (cu.norm_sqr() + cv.norm_sqr());
        }
    }
    Ok(ShellSpectrum { energy })
}

impl ShellSpectrum {
    /// Least-squares slope of `ln E` against `ln k` over shells
    /// `k_lo..=k_hi`, skipping empty shells.
    pub fn fit_slope(&self, k_lo: usize, k_hi: usize) -> Result<f64> {
        let pts: Vec<(f64, f64)> = (k_lo.max(1)..=k_hi.min(self.energy.len().saturating_sub(1)))
            .filter(|&k| self.energy[k] > 0.0)
            .map(|k| ((k as f64).ln(), self.energy[k].ln()))
            .collect();
        if pts.len() < 2 {
            return Err(Error::param(
                "shell range",
                format!("need two non-empty shells in {k_lo}..={k_hi} to fit a slope"),
            ));
        }
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
        Ok(sxy / sxx)
    }

    pub fn total(&self) -> f64 {
        self.energy.iter().sum()
    }
}
