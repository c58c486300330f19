use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::Vec2;
use crate::navigator::Trajectory;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub x_min: f64,
    pub y_min: f64,
    pub x_max: f64,
    pub y_max: f64,
}

impl Bounds {
    pub fn new(x_min: f64, y_min: f64, x_max: f64, y_max: f64) -> Result<Self> {
        if !(x_max > x_min) || !(y_max > y_min) || ![x_min, y_min, x_max, y_max].iter().all(|v| v.is_finite()) {
            return Err(Error::param("bounds", "need finite x_min < x_max and y_min < y_max"));
        }
        Ok(Self {
            x_min,
            y_min,
            x_max,
            y_max,
        })
    }
}

/// Residence time per square pixel. Rows run along `y` from `y_min`, columns
/// along `x` from `x_min`; the grid covers whole pixels, so its upper edges
/// may slightly exceed the requested bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OccupancyGrid {
    pub bounds: Bounds,
    pub pixel: f64,
    pub nx: usize,
    pub ny: usize,
    /// Row-major, `ny × nx`.
    pub time: Vec<f64>,
    /// Time spent outside the grid.
    pub outside: f64,
}

#[derive(Serialize)]
struct Sidecar<'a> {
    bounds: &'a Bounds,
    pixel: f64,
    nx: usize,
    ny: usize,
    row_axis: &'static str,
    outside_time: f64,
    total_time: f64,
}

impl OccupancyGrid {
    pub fn empty(pixel: f64, bounds: Bounds) -> Result<Self> {
        if !(pixel > 0.0) || !pixel.is_finite() {
            return Err(Error::param("pixel", format!("must be > 0, got {pixel}")));
        }
        let nx = ((bounds.x_max - bounds.x_min) / pixel).ceil() as usize;
        let ny = ((bounds.y_max - bounds.y_min) / pixel).ceil() as usize;
        Ok(Self {
            bounds,
            pixel,
            nx,
            ny,
            time: vec![0.0; nx * ny],
            outside: 0.0,
        })
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.time[j * self.nx + i]
    }

    /// Grid time plus outside time.
    pub fn total(&self) -> f64 {
        self.time.iter().sum::<f64>() + self.outside
    }

    fn cell(&self, p: Vec2<f64>) -> Option<usize> {
        let i = ((p.x - self.bounds.x_min) / self.pixel).floor();
        let j = ((p.y - self.bounds.y_min) / self.pixel).floor();
        if i >= 0.0 && j >= 0.0 && (i as usize) < self.nx && (j as usize) < self.ny {
            Some(j as usize * self.nx + i as usize)
        } else {
            None
        }
    }

    fn deposit(&mut self, p: Vec2<f64>, dt: f64) {
        match self.cell(p) {
            Some(c) => self.time[c] += dt,
            None => self.outside += dt,
        }
    }

    /// Splits the straight segment `a → b`, traversed in time `dt`, at pixel
    /// boundaries and deposits each piece's share of `dt`.
    fn add_segment(&mut self, a: Vec2<f64>, b: Vec2<f64>, dt: f64) {
        if dt <= 0.0 {
            return;
        }
        let d = b - a;
        if d.x == 0.0 && d.y == 0.0 {
            self.deposit(a, dt);
            return;
        }
        let mut cuts = vec![0.0, 1.0];
        let mut crossings = |a0: f64, d0: f64, origin: f64| {
            if d0 == 0.0 {
                return;
            }
            let (lo, hi) = if d0 > 0.0 { (a0, a0 + d0) } else { (a0 + d0, a0) };
            let first = ((lo - origin) / self.pixel).ceil() as i64;
            let last = ((hi - origin) / self.pixel).floor() as i64;
            for k in first..=last {
                let s = (origin + k as f64 * self.pixel - a0) / d0;
                if s > 0.0 && s < 1.0 {
                    cuts.push(s);
                }
            }
        };
        crossings(a.x, d.x, self.bounds.x_min);
        crossings(a.y, d.y, self.bounds.y_min);
        cuts.sort_by(f64::total_cmp);
        for w in cuts.windows(2) {
            let ds = w[1] - w[0];
            if ds > 0.0 {
                let mid = a + d.scale(0.5 * (w[0] + w[1]));
                self.deposit(mid, dt * ds);
            }
        }
    }

    pub fn add_trajectory<T: Scalar>(&mut self, trajectory: &Trajectory<T>) {
        for w in trajectory.samples.windows(2) {
            self.add_segment(
                w[0].state.position.cast(),
                w[1].state.position.cast(),
                (w[1].t - w[0].t).to_f64_lossy(),
            );
        }
    }

    /// Elementwise sum of two grids with identical layout.
    pub fn merge(&mut self, other: &OccupancyGrid) -> Result<()> {
        if self.nx != other.nx || self.ny != other.ny || self.pixel != other.pixel || self.bounds != other.bounds {
            return Err(Error::param("occupancy", "grids have different layouts"));
        }
        for (a, b) in self.time.iter_mut().zip(&other.time) {
            *a += b;
        }
        self.outside += other.outside;
        Ok(())
    }

    /// `ny` lines of `nx` comma-separated values, first line at `y_min`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
        for row in self.time.chunks(self.nx.max(1)) {
            w.write_record(row.iter().map(|v| v.to_string()))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_sidecar_json<W: Write>(&self, out: W) -> Result<()> {
        let s = Sidecar {
            bounds: &self.bounds,
            pixel: self.pixel,
            nx: self.nx,
            ny: self.ny,
            row_axis: "y",
            outside_time: self.outside,
            total_time: self.total(),
        };
        serde_json::to_writer_pretty(out, &s)?;
        Ok(())
    }
}

/// Accumulates residence times of all trajectories, assuming straight motion
/// between consecutive samples.
pub fn occupancy<T: Scalar>(trajectories: &[Trajectory<T>], pixel: f64, bounds: Bounds) -> Result<OccupancyGrid> {
    let mut g = OccupancyGrid::empty(pixel, bounds)?;
    for t in trajectories {
        g.add_trajectory(t);
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::navigator::{Outcome, TrajectorySample, VesselState};

    fn path(points: &[(f64, f64, f64)]) -> Trajectory<f64> {
        Trajectory {
            samples: points
                .iter()
                .map(|&(t, x, y)| TrajectorySample {
                    t,
                    state: VesselState::new(Vec2::new(x, y), 0.0, true),
                    action: None,
                    reward: 0.0,
                })
                .collect(),
            outcome: Outcome::Failed,
            power_on_time: 0.0,
            flow_time_offset: 0.0,
        }
    }

    fn unit() -> Bounds {
        Bounds::new(0.0, 0.0, 4.0, 4.0).unwrap()
    }

    #[test]
    fn at_rest() {
        let g = occupancy(&[path(&[(0.0, 1.5, 2.5), (3.0, 1.5, 2.5)])], 1.0, unit()).unwrap();
        assert_eq!(g.at(1, 2), 3.0);
        assert_eq!(g.time.iter().filter(|v| **v != 0.0).count(), 1);
    }

    #[test]
    fn equal_split() {
        let g = occupancy(&[path(&[(0.0, 0.5, 0.5), (2.0, 1.5, 0.5)])], 1.0, unit()).unwrap();
        assert!((g.at(0, 0) - 1.0).abs() < 1e-9);
        assert!((g.at(1, 0) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn diagonal_and_outside() {
        let g = occupancy(&[path(&[(0.0, 3.5, 3.5), (2.0, 5.5, 5.5)])], 1.0, unit()).unwrap();
        assert!((g.at(3, 3) - 0.5).abs() < 1e-12);
        assert!((g.outside - 1.5).abs() < 1e-12);
        assert!((g.total() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn csv_and_sidecar() {
        let g = occupancy(&[path(&[(0.0, 0.5, 0.5), (1.0, 0.5, 0.5)])], 2.0, unit()).unwrap();
        let mut buf = Vec::new();
        g.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "1,0\n0,0\n");
        let mut buf = Vec::new();
        g.write_sidecar_json(&mut buf).unwrap();
        let v: serde_json::Value = serde_json::from_slice(&buf).unwrap();
        assert_eq!(v["nx"], 2);
        assert_eq!(v["total_time"], 1.0);
    }

    #[test]
    fn rejects_bad_pixel() {
        assert!(OccupancyGrid::empty(0.0, unit()).is_err());
        assert!(Bounds::new(1.0, 0.0, 1.0, 2.0).is_err());
    }
}
