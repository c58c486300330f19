//! `ZNAV-FLOW` files.
//!
//! Header keys (after the shared `ZNAV-FLOW` / `version=1` preamble):
//!
//! | key | kinds | meaning |
//! |-----|-------|---------|
//! | `kind` | all | `analytic`, `modesum` or `gridded` |
//! | `period` | all | side length `L` |
//! | `time_dependent` | all | `0` or `1` (informational) |
//! | `flow`, `ux`, `uy`, `amplitude` | analytic | named flow and its parameters |
//! | `k_min`, `k_max`, `slope`, `energy_scale`, `seed` | modesum, optional | generating spectrum |
//! | `evolution_seed`, `horizon`, `knots_per_decorrelation` | modesum, optional | stochastic paths |
//! | `n_modes` | modesum | number of 32-byte mode records |
//! | `nx`, `ny` | gridded | grid dimensions |
//!
//! Payloads: a mode record is `k_x: i32, k_y: i32, amplitude: f64,
//! phase: f64, decorrelation_rate: f64`, all little endian. A gridded payload
//! is `nx·ny` row-major `f64` values of `u` followed by the same for `v`.

use std::path::Path;

use super::{AnalyticFlow, EvolutionParams, FlowField, FlowKind, FourierMode, GriddedFlow, ModeSum, SpectrumSpec};
use crate::container::{parse_header, HeaderWriter, PayloadReader};
use crate::error::{Error, Result};
use crate::geom::Vec2;
use crate::scalar::Scalar;

pub const FLOW_FORMAT: &str = "ZNAV-FLOW";
pub const FLOW_VERSION: u32 = 1;

fn f(x: impl Scalar) -> f64 {
    x.to_f64_lossy()
}

/// Serializes a flow to bytes.
pub fn write_flow<T: Scalar>(flow: &FlowField<T>) -> Vec<u8> {
    let mut h = HeaderWriter::new(FLOW_FORMAT, FLOW_VERSION);
    h.entry("period", f(flow.period()));
    h.entry("time_dependent", u8::from(flow.is_time_dependent()));
    let mut payload = Vec::new();
    match flow.kind() {
        FlowKind::Analytic(a) => {
            h.entry("kind", "analytic").entry("flow", a.name());
            match a {
                AnalyticFlow::Quiescent => {}
                AnalyticFlow::Uniform(u) => {
                    h.entry("ux", f(u.x)).entry("uy", f(u.y));
                }
                AnalyticFlow::TaylorGreen { amplitude } => {
                    h.entry("amplitude", f(*amplitude));
                }
            }
        }
        FlowKind::ModeSum(m) => {
            h.entry("kind", "modesum");
            if let Some(s) = m.spectrum() {
                h.entry("k_min", s.k_min)
                    .entry("k_max", s.k_max)
                    .entry("slope", f(s.slope))
                    .entry("energy_scale", f(s.energy_scale))
                    .entry("seed", s.seed);
            }
            if let Some(e) = m.evolution() {
                h.entry("evolution_seed", e.seed)
                    .entry("horizon", f(e.horizon))
                    .entry("knots_per_decorrelation", e.knots_per_decorrelation);
            }
            h.entry("n_modes", m.modes().len());
            for mode in m.modes() {
                payload.extend_from_slice(&mode.wavevector.0.to_le_bytes());
                payload.extend_from_slice(&mode.wavevector.1.to_le_bytes());
                payload.extend_from_slice(&f(mode.amplitude).to_le_bytes());
                payload.extend_from_slice(&f(mode.phase).to_le_bytes());
                payload.extend_from_slice(&f(mode.decorrelation_rate).to_le_bytes());
            }
        }
        FlowKind::Gridded(g) => {
            let (nx, ny) = g.dims();
            h.entry("kind", "gridded").entry("nx", nx).entry("ny", ny);
            for x in g.u().iter().chain(g.v()) {
                payload.extend_from_slice(&f(*x).to_le_bytes());
            }
        }
    }
    let mut bytes = h.finish();
    bytes.extend_from_slice(&payload);
    bytes
}

/// Parses a flow from bytes. Never returns a partially read field.
pub fn read_flow<T: Scalar>(bytes: &[u8]) -> Result<FlowField<T>> {
    let h = parse_header(bytes, FLOW_FORMAT, FLOW_VERSION)?;
    let period = T::lit(h.parse::<f64>("period")?);
    let mut r = PayloadReader::new(bytes, h.payload_offset);
    let at_payload = h.payload_offset;
    let flow = match h.get("kind")? {
        "analytic" => {
            let flow = match h.get("flow")? {
                "quiescent" => AnalyticFlow::Quiescent,
                "uniform" => AnalyticFlow::Uniform(Vec2::new(
                    T::lit(h.parse("ux")?),
                    T::lit(h.parse("uy")?),
                )),
                "taylor_green" => AnalyticFlow::TaylorGreen {
                    amplitude: T::lit(h.parse("amplitude")?),
                },
                other => {
                    return Err(Error::format(at_payload, format!("unknown analytic flow `{other}`")))
                }
            };
            FlowField::analytic(flow, period)?
        }
        "modesum" => {
            let n: usize = h.parse("n_modes")?;
            if n.checked_mul(32).map_or(true, |len| len > bytes.len()) {
                return Err(Error::format(
                    bytes.len(),
                    format!("payload truncated: {n} mode records declared"),
                ));
            }
            let mut modes = Vec::with_capacity(n);
            for _ in 0..n {
                let kx = r.i32("k_x")?;
                let ky = r.i32("k_y")?;
                let amplitude = T::lit(r.f64("amplitude")?);
                let phase = T::lit(r.f64("phase")?);
                let decorrelation_rate = T::lit(r.f64("decorrelation_rate")?);
                modes.push(FourierMode {
                    wavevector: (kx, ky),
                    amplitude,
                    phase,
                    decorrelation_rate,
                });
            }
            let mut sum = ModeSum::new(modes, period)
                .map_err(|e| Error::format(at_payload, format!("invalid mode list: {e}")))?;
            if h.opt("evolution_seed").is_some() {
                sum = sum.evolving(EvolutionParams {
                    seed: h.parse("evolution_seed")?,
                    horizon: T::lit(h.parse("horizon")?),
                    knots_per_decorrelation: h.parse("knots_per_decorrelation")?,
                })?;
            }
            if h.opt("k_min").is_some() {
                sum.set_spectrum(Some(SpectrumSpec {
                    k_min: h.parse("k_min")?,
                    k_max: h.parse("k_max")?,
                    slope: T::lit(h.parse("slope")?),
                    energy_scale: T::lit(h.parse("energy_scale")?),
                    seed: h.parse("seed")?,
                    period,
                }));
            }
            FlowField::from_mode_sum(sum)
        }
        "gridded" => {
            let nx: usize = h.parse("nx")?;
            let ny: usize = h.parse("ny")?;
            let count = nx.checked_mul(ny).unwrap_or(usize::MAX);
            if count.checked_mul(16).map_or(true, |len| len > bytes.len()) {
                return Err(Error::format(
                    bytes.len(),
                    format!("payload truncated: {nx}x{ny} grid declared"),
                ));
            }
            let mut read = |what| -> Result<Vec<T>> {
                (0..count).map(|_| r.f64(what).map(T::lit)).collect()
            };
            let u = read("u")?;
            let v = read("v")?;
            FlowField::from_grid(
                GriddedFlow::new(nx, ny, period, u, v)
                    .map_err(|e| Error::format(at_payload, format!("invalid grid: {e}")))?,
            )
        }
        other => return Err(Error::format(at_payload, format!("unknown flow kind `{other}`"))),
    };
    r.finish()?;
    Ok(flow)
}

pub fn export_flow<T: Scalar>(flow: &FlowField<T>, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, write_flow(flow))?;
    Ok(())
}

pub fn import_flow<T: Scalar>(path: impl AsRef<Path>) -> Result<FlowField<T>> {
    read_flow(&std::fs::read(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flowfield::{generate_snapshot, generate_unsteady};

    fn spec() -> SpectrumSpec<f64> {
        SpectrumSpec::kolmogorov(1, 10, 7).with_energy_scale(0.05)
    }

    #[test]
    fn snapshot_round_trip_is_exact() {
        let flow = generate_snapshot(&spec()).unwrap();
        let back: FlowField<f64> = read_flow(&write_flow(&flow)).unwrap();
        for i in 0..100 {
            let x = Vec2::new(0.37 * i as f64, -0.11 * i as f64 + 2.0);
            assert_eq!(flow.sample(x, 0.0), back.sample(x, 0.0));
        }
        assert_eq!(write_flow(&flow), write_flow(&back));
    }

    #[test]
    fn unsteady_round_trip_is_exact() {
        let flow = generate_unsteady(&SpectrumSpec::kolmogorov(1, 5, 3), 2.0).unwrap();
        let back: FlowField<f64> = read_flow(&write_flow(&flow)).unwrap();
        assert!(back.is_time_dependent());
        for i in 0..50 {
            let x = Vec2::new(0.3 * i as f64, 1.0);
            let t = 0.77 * i as f64;
            assert_eq!(flow.velocity(x, t), back.velocity(x, t));
        }
    }

    #[test]
    fn gridded_and_analytic_round_trip() {
        let tg = FlowField::<f64>::taylor_green(0.5);
        let grid = FlowField::from_grid(tg.rasterize(16, 0.0).unwrap());
        for flow in [tg, grid, FlowField::uniform(Vec2::new(0.1, -0.2)), FlowField::quiescent()] {
            let back: FlowField<f64> = read_flow(&write_flow(&flow)).unwrap();
            let x = Vec2::new(0.4, 1.3);
            assert_eq!(flow.sample(x, 0.0), back.sample(x, 0.0));
        }
    }

    #[test]
    fn truncated_file_is_rejected() {
        let bytes = write_flow(&generate_snapshot(&spec()).unwrap());
        for cut in [5, 40, bytes.len() - 1, bytes.len() - 17] {
            match read_flow::<f64>(&bytes[..cut]) {
                Err(Error::Format { .. }) => {}
                other => panic!("cut {cut}: {:?}", other.map(|_| ())),
            }
        }
    }

    #[test]
    fn unknown_version_is_named() {
        let bytes = write_flow(&FlowField::<f64>::quiescent());
        let text = String::from_utf8(bytes).unwrap().replace("version=1", "version=7b");
        match read_flow::<f64>(text.as_bytes()) {
            Err(Error::Version { found, .. }) => assert_eq!(found, "7b"),
            other => panic!("{:?}", other.map(|_| ())),
        }
    }

    #[test]
    fn trailing_bytes_are_rejected() {
        let mut bytes = write_flow(&FlowField::<f64>::quiescent());
        bytes.push(0);
        assert!(matches!(read_flow::<f64>(&bytes), Err(Error::Format { .. })));
    }
}
