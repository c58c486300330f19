//! `ZNAV-POLICY` files.
//!
//! Header keys: `n_states`, `n_actions`, `origin_x`, `origin_y`,
//! `tile_size`, `n_x`, `n_y`, `angles` (comma separated, radians) and
//! `include_off` (`0`/`1`). The payload is `H` row-major
//! (`n_states × n_actions`) followed by `V`, all `f64` little endian.

use std::path::Path;

use super::policy::PolicyParams;
use super::tiles::{ActionSet, TileCoder};
use super::train::Policy;
use crate::container::{parse_header, HeaderWriter, PayloadReader};
use crate::error::{Error, Result};
use crate::geom::Vec2;
use crate::scalar::Scalar;

pub const POLICY_FORMAT: &str = "ZNAV-POLICY";
pub const POLICY_VERSION: u32 = 1;

pub fn write_policy<T: Scalar>(policy: &Policy<T>) -> Vec<u8> {
    let c = &policy.coder;
    let angles: Vec<String> = policy.actions.angles.iter().map(|a| a.to_f64_lossy().to_string()).collect();
    let mut h = HeaderWriter::new(POLICY_FORMAT, POLICY_VERSION);
    h.entry("n_states", policy.params.n_states())
        .entry("n_actions", policy.params.n_actions())
        .entry("origin_x", c.origin.x.to_f64_lossy())
        .entry("origin_y", c.origin.y.to_f64_lossy())
        .entry("tile_size", c.tile_size.to_f64_lossy())
        .entry("n_x", c.n_x)
        .entry("n_y", c.n_y)
        .entry("angles", angles.join(","))
        .entry("include_off", u8::from(policy.actions.include_off));
    let mut out = h.finish();
    for x in policy.params.preferences().iter().chain(policy.params.values()) {
        out.extend_from_slice(&x.to_f64_lossy().to_le_bytes());
    }
    out
}

/// Parses a policy. When `expected` is given, the stored coder must match
/// it exactly.
pub fn read_policy<T: Scalar>(bytes: &[u8], expected: Option<&TileCoder<T>>) -> Result<Policy<T>> {
    let h = parse_header(bytes, POLICY_FORMAT, POLICY_VERSION)?;
    let at = h.payload_offset;
    let n_states: usize = h.parse("n_states")?;
    let n_actions: usize = h.parse("n_actions")?;
    let n_x: usize = h.parse("n_x")?;
    let n_y: usize = h.parse("n_y")?;
    let coder = TileCoder {
        origin: Vec2::new(T::lit(h.parse("origin_x")?), T::lit(h.parse("origin_y")?)),
        tile_size: T::lit(h.parse("tile_size")?),
        n_x,
        n_y,
    };
    coder
        .validate()
        .map_err(|e| Error::format(at, format!("invalid tile coder: {e}")))?;
    let include_off = match h.get("include_off")? {
        "0" => false,
        "1" => true,
        other => return Err(Error::format(at, format!("include_off must be 0 or 1, found `{other}`"))),
    };
    let actions = ActionSet {
        angles: h.parse_f64_list("angles")?.into_iter().map(T::lit).collect(),
        include_off,
    };
    if n_states != coder.n_states() {
        return Err(Error::format(
            at,
            format!("n_states = {n_states} but the stored coder has {} tiles", coder.n_states()),
        ));
    }
    if n_actions != actions.n_actions() {
        return Err(Error::format(
            at,
            format!("n_actions = {n_actions} but the stored action set has {}", actions.n_actions()),
        ));
    }
    if let Some(exp) = expected {
        if exp.n_states() != n_states {
            return Err(Error::format(
                at,
                format!("policy has {n_states} states, the declared coder has {}", exp.n_states()),
            ));
        }
        if *exp != coder {
            return Err(Error::format(at, "policy tile coder differs from the declared coder"));
        }
    }
    let mut r = PayloadReader::new(bytes, at);
    let mut prefs = Vec::with_capacity(n_states * n_actions);
    for _ in 0..n_states * n_actions {
        prefs.push(T::lit(r.f64("preference")?));
    }
    let mut values = Vec::with_capacity(n_states);
    for _ in 0..n_states {
        values.push(T::lit(r.f64("value")?));
    }
    r.finish()?;
    Ok(Policy {
        coder,
        actions,
        params: PolicyParams::from_parts(n_states, n_actions, prefs, values),
    })
}

pub fn save_policy<T: Scalar>(policy: &Policy<T>, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, write_policy(policy))?;
    Ok(())
}

pub fn load_policy<T: Scalar>(path: impl AsRef<Path>, expected: Option<&TileCoder<T>>) -> Result<Policy<T>> {
    read_policy(&std::fs::read(path)?, expected)
}
