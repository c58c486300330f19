use std::io::Write;

use super::{Outcome, Trajectory};
use crate::error::Result;
use crate::scalar::Scalar;

/// Writes `trajectory_id,t,x,y,theta,engine_on,action_id,reward` rows.
/// `action_id` is `-1` where no discrete action applies.
pub fn write_trajectories_csv<T: Scalar, W: Write>(out: W, trajectories: &[Trajectory<T>]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["trajectory_id", "t", "x", "y", "theta", "engine_on", "action_id", "reward"])?;
    for (id, tr) in trajectories.iter().enumerate() {
        for s in &tr.samples {
            let action = s.action.map_or(-1, |a| a as i64);
            w.write_record([
                id.to_string(),
                s.t.to_f64_lossy().to_string(),
                s.state.position.x.to_f64_lossy().to_string(),
                s.state.position.y.to_f64_lossy().to_string(),
                s.state.heading.to_f64_lossy().to_string(),
                u8::from(s.state.engine_on).to_string(),
                action.to_string(),
                s.reward.to_f64_lossy().to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Writes `trajectory_id,outcome,T,T_pow,start_x,start_y` rows. For failed
/// trajectories `T` is the time at which the episode was cut off.
pub fn write_outcomes_csv<T: Scalar, W: Write>(out: W, trajectories: &[Trajectory<T>]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["trajectory_id", "outcome", "T", "T_pow", "start_x", "start_y"])?;
    for (id, tr) in trajectories.iter().enumerate() {
        let outcome = match tr.outcome {
            Outcome::Reached { .. } => "reached",
            Outcome::Failed => "failed",
        };
        let start = tr.start_position();
        w.write_record([
            id.to_string(),
            outcome.to_string(),
            tr.duration().to_f64_lossy().to_string(),
            tr.power_on_time.to_f64_lossy().to_string(),
            start.x.to_f64_lossy().to_string(),
            start.y.to_f64_lossy().to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flowfield::FlowField;
    use crate::geom::Vec2;
    use crate::navigator::{run_episode, Control, EpisodeConfig, EpisodeGeometry, FixedController};

    #[test]
    fn csv_columns() {
        let g = EpisodeGeometry::new(Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0), 0.0, 0.1, 1.0).unwrap();
        let tr = run_episode(
            &FlowField::<f64>::quiescent(),
            &mut FixedController(0),
            &[Control::Steer(0.0)],
            &g,
            &EpisodeConfig::new(0.25),
            g.start,
            0.0,
        )
        .unwrap();
        let mut buf = Vec::new();
        write_trajectories_csv(&mut buf, std::slice::from_ref(&tr)).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("trajectory_id,t,x,y,theta,engine_on,action_id,reward\n"));
        assert_eq!(text.lines().count(), tr.samples.len() + 1);
        let mut buf = Vec::new();
        write_outcomes_csv(&mut buf, &[tr]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.lines().nth(1).unwrap().starts_with("0,reached,"));
    }
}
