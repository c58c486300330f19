use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::navigator::Trajectory;
use crate::scalar::Scalar;

pub const DEFAULT_BINS: usize = 50;
/// Upper edge of the default histogram range, in units of `T_free`.
pub const DEFAULT_RANGE: f64 = 5.0;

/// Equal-width histogram over `[0, max)`. Values at or beyond `max` go to the
/// last bin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub bin_edges: Vec<f64>,
    pub counts: Vec<u64>,
    /// `counts[i] / n_total` of the owning ensemble.
    pub masses: Vec<f64>,
}

impl Histogram {
    fn build(values: &[f64], n_bins: usize, max: f64, n_total: usize) -> Self {
        let width = max / n_bins as f64;
        let bin_edges = (0..=n_bins).map(|i| i as f64 * width).collect();
        let mut counts = vec![0u64; n_bins];
        for &v in values {
            let i = ((v / width).floor().max(0.0) as usize).min(n_bins - 1);
            counts[i] += 1;
        }
        let masses = counts
            .iter()
            .map(|&c| if n_total == 0 { 0.0 } else { c as f64 / n_total as f64 })
            .collect();
        Self {
            bin_edges,
            counts,
            masses,
        }
    }

    pub fn total_count(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn total_mass(&self) -> f64 {
        self.masses.iter().sum()
    }

    /// Probability density: mass per unit of the binned variable.
    pub fn density(&self) -> Vec<f64> {
        self.masses
            .iter()
            .zip(self.bin_edges.windows(2))
            .map(|(m, e)| m / (e[1] - e[0]))
            .collect()
    }
}

/// Arrival and power-on time statistics of an ensemble, normalized by the
/// free-flight time. Failed trajectories are counted but excluded from the
/// histograms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSummary {
    pub n_total: usize,
    pub n_failed: usize,
    pub failure_rate: f64,
    pub t_free: f64,
    /// Histogram of `T / T_free`.
    pub arrival_pdf: Histogram,
    /// Histogram of `T_pow / T_free`.
    pub power_pdf: Histogram,
    pub median_t: Option<f64>,
    pub median_t_pow: Option<f64>,
}

fn median(mut v: Vec<f64>) -> Option<f64> {
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Some(if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    })
}

/// [`summarize_with_range`] over `[0, 5)·T_free`.
pub fn summarize<T: Scalar>(trajectories: &[Trajectory<T>], t_free: T, n_bins: usize) -> Result<EnsembleSummary> {
    summarize_with_range(trajectories, t_free, n_bins, DEFAULT_RANGE)
}

pub fn summarize_with_range<T: Scalar>(
    trajectories: &[Trajectory<T>],
    t_free: T,
    n_bins: usize,
    max: f64,
) -> Result<EnsembleSummary> {
    let t_free = t_free.to_f64_lossy();
    if n_bins == 0 {
        return Err(Error::param("n_bins", "must be >= 1"));
    }
    if !(t_free > 0.0) || !t_free.is_finite() {
        return Err(Error::param("t_free", format!("must be > 0, got {t_free}")));
    }
    if !(max > 0.0) || !max.is_finite() {
        return Err(Error::param("range", format!("must be > 0, got {max}")));
    }
    let n_total = trajectories.len();
    let (times, powers): (Vec<f64>, Vec<f64>) = trajectories
        .iter()
        .filter_map(|t| {
            t.arrival_time()
                .map(|a| (a.to_f64_lossy(), t.power_on_time.to_f64_lossy()))
        })
        .unzip();
    let n_failed = n_total - times.len();
    let scaled = |v: &[f64]| v.iter().map(|x| x / t_free).collect::<Vec<_>>();
    Ok(EnsembleSummary {
        n_total,
        n_failed,
        failure_rate: if n_total == 0 { 0.0 } else { n_failed as f64 / n_total as f64 },
        t_free,
        arrival_pdf: Histogram::build(&scaled(&times), n_bins, max, n_total),
        power_pdf: Histogram::build(&scaled(&powers), n_bins, max, n_total),
        median_t: median(times),
        median_t_pow: median(powers),
    })
}

impl EnsembleSummary {
    pub fn write_json<W: Write>(&self, out: W) -> Result<()> {
        serde_json::to_writer_pretty(out, self)?;
        Ok(())
    }
}

/// Share of decision epochs that chose `action`.
pub fn action_fraction<T: Scalar>(trajectories: &[Trajectory<T>], action: usize) -> f64 {
    let (mut hits, mut total) = (0usize, 0usize);
    for a in trajectories.iter().flat_map(|t| t.samples.iter().filter_map(|s| s.action)) {
        total += 1;
        hits += usize::from(a == action);
    }
    if total == 0 {
        0.0
    } else {
        hits as f64 / total as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Vec2;
    use crate::navigator::{Outcome, TrajectorySample, VesselState};

    pub(crate) fn fake(arrival: Option<f64>, t_pow: f64) -> Trajectory<f64> {
        let end = arrival.unwrap_or(10.0);
        let s = |t| TrajectorySample {
            t,
            state: VesselState::new(Vec2::new(t, 0.0), 0.0, true),
            action: Some(0),
            reward: 0.0,
        };
        Trajectory {
            samples: vec![s(0.0), s(end)],
            outcome: arrival.map_or(Outcome::Failed, |a| Outcome::Reached { arrival_time: a }),
            power_on_time: t_pow,
            flow_time_offset: 0.0,
        }
    }

    #[test]
    fn all_at_free_flight_time() {
        let trajs: Vec<_> = (0..10).map(|_| fake(Some(2.0), 2.0)).collect();
        let s = summarize(&trajs, 2.0, DEFAULT_BINS).unwrap();
        assert_eq!(s.failure_rate, 0.0);
        let occupied: Vec<_> = s.arrival_pdf.counts.iter().enumerate().filter(|c| *c.1 > 0).collect();
        assert_eq!(occupied.len(), 1);
        let i = occupied[0].0;
        assert!(s.arrival_pdf.bin_edges[i] <= 1.0 && 1.0 < s.arrival_pdf.bin_edges[i + 1]);
        assert_eq!(s.median_t, Some(2.0));
    }

    #[test]
    fn one_in_a_thousand() {
        let mut trajs: Vec<_> = (0..999).map(|i| fake(Some(1.0 + i as f64 * 1e-3), 1.0)).collect();
        trajs.push(fake(None, 10.0));
        let s = summarize(&trajs, 1.0, 20).unwrap();
        assert_eq!(s.n_failed, 1);
        assert!((s.failure_rate - 1e-3).abs() < 1e-15);
        assert!((s.arrival_pdf.total_mass() + s.failure_rate - 1.0).abs() < 1e-12);
    }

    #[test]
    fn all_failed() {
        let trajs: Vec<_> = (0..3).map(|_| fake(None, 10.0)).collect();
        let s = summarize(&trajs, 1.0, 5).unwrap();
        assert_eq!(s.failure_rate, 1.0);
        assert_eq!(s.arrival_pdf.total_count(), 0);
        assert_eq!(s.median_t, None);
    }

    #[test]
    fn empty_input() {
        let s = summarize::<f64>(&[], 1.0, 5).unwrap();
        assert_eq!(s.n_total, 0);
        assert_eq!(s.arrival_pdf.total_mass(), 0.0);
    }

    #[test]
    fn overflow_goes_to_last_bin() {
        let s = summarize(&[fake(Some(100.0), 0.0)], 1.0, 10).unwrap();
        assert_eq!(s.arrival_pdf.counts[9], 1);
        assert_eq!(s.power_pdf.counts[0], 1);
    }

    #[test]
    fn bad_parameters() {
        assert!(summarize::<f64>(&[], 1.0, 0).is_err());
        assert!(summarize::<f64>(&[], 0.0, 3).is_err());
    }

    #[test]
    fn json_has_bin_edges() {
        let s = summarize(&[fake(Some(1.0), 1.0)], 1.0, 4).unwrap();
        let mut buf = Vec::new();
        s.write_json(&mut buf).unwrap();
        let v: serde_json::Value = serde_json::from_slice(&buf).unwrap();
        assert_eq!(v["arrival_pdf"]["bin_edges"].as_array().unwrap().len(), 5);
        assert_eq!(v["n_failed"], 0);
    }
}
