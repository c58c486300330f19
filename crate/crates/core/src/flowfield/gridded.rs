//! Velocity fields tabulated on a uniform periodic grid.

use crate::error::{Error, Result};
use crate::geom::{Mat2, Vec2};
use crate::scalar::Scalar;

/// Velocity arrays on an `nx × ny` grid covering `[0, L)²`, stored row-major
/// (`index = j·nx + i`, with `j` the y index).
///
/// Gradients are centred differences on the grid, precomputed once and
/// bilinearly interpolated like the velocity.
#[derive(Debug, Clone, PartialEq)]
pub struct GriddedFlow<T> {
    nx: usize,
    ny: usize,
    period: T,
    u: Vec<T>,
    v: Vec<T>,
    // [du/dx, du/dy, dv/dx, dv/dy]
    grad: [Vec<T>; 4],
}

impl<T: Scalar> GriddedFlow<T> {
    pub fn new(nx: usize, ny: usize, period: T, u: Vec<T>, v: Vec<T>) -> Result<Self> {
        if nx < 3 || ny < 3 {
            return Err(Error::param("grid", format!("need at least 3x3 points, got {nx}x{ny}")));
        }
        if u.len() != nx * ny || v.len() != nx * ny {
            return Err(Error::param(
                "grid",
                format!("expected {} values per component, got {} and {}", nx * ny, u.len(), v.len()),
            ));
        }
        if !(period > T::zero()) || !period.is_finite() {
            return Err(Error::param("period", format!("must be positive, got {period}")));
        }
        if u.iter().chain(&v).any(|x| !x.is_finite()) {
            return Err(Error::param("grid", "velocity values must be finite"));
        }
        let dx = period / T::from_usize_lossy(nx);
        let dy = period / T::from_usize_lossy(ny);
        let two = T::lit(2.0);
        let idx = |i: usize, j: usize| j * nx + i;
        let mut grad: [Vec<T>; 4] = std::array::from_fn(|_| vec![T::zero(); nx * ny]);
        for j in 0..ny {
            let jp = (j + 1) % ny;
            let jm = (j + ny - 1) % ny;
            for i in 0..nx {
                let ip = (i + 1) % nx;
                let im = (i + nx - 1) % nx;
                let k = idx(i, j);
                grad[0][k] = (u[idx(ip, j)] - u[idx(im, j)]) / (two * dx);
                grad[1][k] = (u[idx(i, jp)] - u[idx(i, jm)]) / (two * dy);
                grad[2][k] = (v[idx(ip, j)] - v[idx(im, j)]) / (two * dx);
                grad[3][k] = (v[idx(i, jp)] - v[idx(i, jm)]) / (two * dy);
            }
        }
        Ok(Self {
            nx,
            ny,
            period,
            u,
            v,
            grad,
        })
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.nx, self.ny)
    }

    pub fn period(&self) -> T {
        self.period
    }

    pub fn u(&self) -> &[T] {
        &self.u
    }

    pub fn v(&self) -> &[T] {
        &self.v
    }

    /// Corner indices and weights of the cell containing `x`.
    fn stencil(&self, x: Vec2<T>) -> ([usize; 4], [T; 4]) {
        let fx = x.x.rem_euclid(&self.period) / self.period * T::from_usize_lossy(self.nx);
        let fy = x.y.rem_euclid(&self.period) / self.period * T::from_usize_lossy(self.ny);
        let i0 = fx.floor();
        let j0 = fy.floor();
        let tx = fx - i0;
        let ty = fy - j0;
        let i0 = i0.to_usize().unwrap_or(0) % self.nx;
        let j0 = j0.to_usize().unwrap_or(0) % self.ny;
        let i1 = (i0 + 1) % self.nx;
        let j1 = (j0 + 1) % self.ny;
        let one = T::one();
        (
            [j0 * self.nx + i0, j0 * self.nx + i1, j1 * self.nx + i0, j1 * self.nx + i1],
            [(one - tx) * (one - ty), tx * (one - ty), (one - tx) * ty, tx * ty],
        )
    }

    fn interp(field: &[T], idx: &[usize; 4], w: &[T; 4]) -> T {
        w[0] * field[idx[0]] + w[1] * field[idx[1]] + w[2] * field[idx[2]] + w[3] * field[idx[3]]
    }

    pub fn velocity(&self, x: Vec2<T>) -> Vec2<T> {
        let (idx, w) = self.stencil(x);
        Vec2::new(Self::interp(&self.u, &idx, &w), Self::interp(&self.v, &idx, &w))
    }

    pub fn sample(&self, x: Vec2<T>) -> (Vec2<T>, Mat2<T>) {
        let (idx, w) = self.stencil(x);
        let vel = Vec2::new(Self::interp(&self.u, &idx, &w), Self::interp(&self.v, &idx, &w));
        let g = Mat2::new(
            Self::interp(&self.grad[0], &idx, &w),
            Self::interp(&self.grad[1], &idx, &w),
            Self::interp(&self.grad[2], &idx, &w),
            Self::interp(&self.grad[3], &idx, &w),
        );
        (vel, g)
    }

    pub fn rotated_quarter_turns(&self, quarter_turns: i32) -> Result<Self> {
        let n = quarter_turns.rem_euclid(4);
        if n == 0 {
            return Ok(self.clone());
        }
        if self.nx != self.ny {
            return Err(Error::param("grid", "quarter-turn rotation needs a square grid"));
        }
        let m = self.nx;
        let mut u = self.u.clone();
        let mut v = self.v.clone();
        for _ in 0..n {
            // u'(x) = R u(R⁻¹ x), R⁻¹ (i, j) = (j, -i)
            let mut nu = vec![T::zero(); m * m];
            let mut nv = vec![T::zero(); m * m];
            for j in 0..m {
                for i in 0..m {
                    let src = ((m - i) % m) * m + j;
                    nu[j * m + i] = -v[src];
                    nv[j * m + i] = u[src];
                }
            }
            u = nu;
            v = nv;
        }
        Self::new(m, m, self.period, u, v)
    }
}
