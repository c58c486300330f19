//! Closed-form test flows.

use serde::{Deserialize, Serialize};

use crate::geom::{Mat2, Vec2};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum AnalyticFlow<T> {
    /// `u ≡ 0`.
    Quiescent,
    /// Spatially constant velocity.
    Uniform(Vec2<T>),
    /// Cellular flow from `ψ = A sin(κx) sin(κy)`, `κ = 2π/L`:
    /// `u = A κ (sin κx cos κy, -cos κx sin κy)`. With `L = 2π` and `A = 1`
    /// this is `(sin x cos y, -cos x sin y)`.
    TaylorGreen { amplitude: T },
}

impl<T: Scalar> AnalyticFlow<T> {
    pub fn name(&self) -> &'static str {
        match self {
            AnalyticFlow::Quiescent => "quiescent",
            AnalyticFlow::Uniform(_) => "uniform",
            AnalyticFlow::TaylorGreen { .. } => "taylor_green",
        }
    }

    pub fn sample(&self, x: Vec2<T>, period: T) -> (Vec2<T>, Mat2<T>) {
        match *self {
            AnalyticFlow::Quiescent => (Vec2::zero(), Mat2::zero()),
            AnalyticFlow::Uniform(u) => (u, Mat2::zero()),
            AnalyticFlow::TaylorGreen { amplitude } => {
                let kappa = T::two_pi() / period;
                let (sx, cx) = (kappa * x.x).sin_cos();
                let (sy, cy) = (kappa * x.y).sin_cos();
                let a = amplitude * kappa;
                let g = a * kappa;
                let u = Vec2::new(a * sx * cy, -a * cx * sy);
                let dudx = g * cx * cy;
                let dudy = -g * sx * sy;
                let dvdx = g * sx * sy;
                (u, Mat2::new(dudx, dudy, dvdx, -dudx))
            }
        }
    }

    pub fn rotated_quarter_turns(&self, quarter_turns: i32) -> Self {
        let n = quarter_turns.rem_euclid(4);
        match *self {
            AnalyticFlow::Quiescent => AnalyticFlow::Quiescent,
            AnalyticFlow::Uniform(u) => {
                let mut r = u;
                for _ in 0..n {
                    r = Vec2::new(-r.y, r.x);
                }
                AnalyticFlow::Uniform(r)
            }
            // A quarter turn maps the cellular pattern onto its mirror image.
            AnalyticFlow::TaylorGreen { amplitude } => AnalyticFlow::TaylorGreen {
                amplitude: if n % 2 == 1 { -amplitude } else { amplitude },
            },
        }
    }
}
