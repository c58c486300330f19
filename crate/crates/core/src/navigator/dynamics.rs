use super::{Control, VesselState};
use crate::flowfield::FlowField;
use crate::geom::Vec2;
use crate::scalar::Scalar;

/// One classical RK4 step of `Ẋ = u(X, t) + propulsion` with constant
/// propulsion over the step.
#[inline]
pub(crate) fn rk4_position<T: Scalar>(
    flow: &FlowField<T>,
    x: Vec2<T>,
    propulsion: Vec2<T>,
    t: T,
    dt: T,
) -> Vec2<T> {
    let half = dt * T::lit(0.5);
    let k1 = flow.velocity(x, t) + propulsion;
    let k2 = flow.velocity(x + k1 * half, t + half) + propulsion;
    let k3 = flow.velocity(x + k2 * half, t + half) + propulsion;
    let k4 = flow.velocity(x + k3 * dt, t + dt) + propulsion;
    let two = T::lit(2.0);
    x + (k1 + k2 * two + k3 * two + k4) * (dt / T::lit(6.0))
}

#[inline]
pub(crate) fn propulsion<T: Scalar>(control: Control<T>, speed: T) -> Vec2<T> {
    match control {
        Control::Steer(theta) => Vec2::from_angle(theta) * speed,
        Control::Off => Vec2::zero(),
    }
}

/// Advances the vessel by `dt` from flow time `t` with its heading held
/// fixed. Propulsion is `speed · (cos θ, sin θ)` when the engine is on and
/// zero otherwise.
pub fn step_vessel<T: Scalar>(flow: &FlowField<T>, state: &VesselState<T>, speed: T, dt: T, t: T) -> VesselState<T> {
    let control = if state.engine_on {
        Control::Steer(state.heading)
    } else {
        Control::Off
    };
    VesselState {
        position: rk4_position(flow, state.position, propulsion(control, speed), t, dt),
        ..*state
    }
}

/// Passive tracer step; identical to [`step_vessel`] with the engine off.
pub fn advect_tracer<T: Scalar>(flow: &FlowField<T>, x: Vec2<T>, t: T, dt: T) -> Vec2<T> {
    rk4_position(flow, x, Vec2::zero(), t, dt)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quiescent_engine_on() {
        let flow = FlowField::<f64>::quiescent();
        let s = VesselState::new(Vec2::zero(), 0.0, true);
        let n = step_vessel(&flow, &s, 1.0, 0.5, 0.0);
        assert_eq!(n.position, Vec2::new(0.5, 0.0));
    }

    #[test]
    fn quiescent_engine_off() {
        let flow = FlowField::<f64>::quiescent();
        let s = VesselState::new(Vec2::new(1.0, 2.0), 1.0, false);
        assert_eq!(step_vessel(&flow, &s, 1.0, 0.5, 0.0).position, Vec2::new(1.0, 2.0));
    }

    #[test]
    fn uniform_advection_is_exact() {
        let flow = FlowField::uniform(Vec2::new(1.0_f64, 0.0));
        let s = VesselState::new(Vec2::zero(), 0.3, false);
        assert_eq!(step_vessel(&flow, &s, 1.0, 1.0, 0.0).position, Vec2::new(1.0, 0.0));
    }

    #[test]
    fn engine_off_matches_tracer_bitwise() {
        let flow = FlowField::<f64>::taylor_green(1.0);
        let mut s = VesselState::new(Vec2::new(0.4, 0.9), 2.0, false);
        let mut x = s.position;
        for i in 0..200 {
            let t = i as f64 * 0.05;
            s = step_vessel(&flow, &s, 0.8, 0.05, t);
            x = advect_tracer(&flow, x, t, 0.05);
        }
        assert_eq!(s.position, x);
    }
}
