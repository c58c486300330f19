use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::Vec2;
use crate::scalar::Scalar;

/// Weights of the per-interval reward.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RewardConfig<T> {
    /// Energy weight `λ`; zero gives the pure minimum-time reward.
    pub lambda: T,
    /// Speed used to convert distances into free-flight times. Stays fixed
    /// when the engine is off so that the shaping terms telescope.
    pub nominal_speed: T,
}

impl<T: Scalar> RewardConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda >= T::zero()) || !self.lambda.is_finite() {
            return Err(Error::param("lambda", format!("must be >= 0, got {}", self.lambda)));
        }
        if !(self.nominal_speed > T::zero()) || !self.nominal_speed.is_finite() {
            return Err(Error::param(
                "nominal_speed",
                format!("must be > 0, got {}", self.nominal_speed),
            ));
        }
        Ok(())
    }
}

/// `-(Δt + λ Δt_pow) + |x_B - x_prev| / V_s - |x_B - x_new| / V_s`, where
/// `Δt_pow = Δt` if the engine was on during the interval and 0 otherwise.
///
/// Summed over an episode the distance terms telescope, so the return is
/// `-(T + λ T_pow)` plus the change of free-flight time to the target.
pub fn reward_step<T: Scalar>(
    target: Vec2<T>,
    prev: Vec2<T>,
    new: Vec2<T>,
    elapsed: T,
    engine_on: bool,
    cfg: &RewardConfig<T>,
) -> T {
    let powered = if engine_on { elapsed } else { T::zero() };
    -(elapsed + cfg.lambda * powered) + target.distance(prev) / cfg.nominal_speed
        - target.distance(new) / cfg.nominal_speed
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(lambda: f64) -> RewardConfig<f64> {
        RewardConfig {
            lambda,
            nominal_speed: 1.0,
        }
    }

    #[test]
    fn minimum_time_reward() {
        let b = Vec2::new(0.0, 0.0);
        let r = reward_step(b, Vec2::new(5.0, 0.0), Vec2::new(3.0, 0.0), 1.0, true, &cfg(0.0));
        assert_eq!(r, 1.0);
    }

    #[test]
    fn energy_penalty_when_powered() {
        let b = Vec2::new(0.0, 0.0);
        let x = Vec2::new(0.0, 4.0);
        assert_eq!(reward_step(b, x, x, 1.0, true, &cfg(2.0)), -3.0);
    }

    #[test]
    fn no_energy_penalty_when_drifting() {
        let b = Vec2::new(0.0, 0.0);
        let r = reward_step(b, Vec2::new(5.0, 0.0), Vec2::new(4.0, 0.0), 1.0, false, &cfg(2.0));
        assert_eq!(r, 0.0);
    }

    #[test]
    fn rejects_negative_lambda() {
        assert!(cfg(-1.0).validate().is_err());
        assert!(RewardConfig { lambda: 0.0, nominal_speed: 0.0 }.validate().is_err());
    }
}
