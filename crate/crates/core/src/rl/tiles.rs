use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::Vec2;
use crate::scalar::Scalar;

/// Square tiling of the navigation arena; each tile is one discrete state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TileCoder<T> {
    pub origin: Vec2<T>,
    pub tile_size: T,
    pub n_x: usize,
    pub n_y: usize,
}

impl<T: Scalar> TileCoder<T> {
    pub fn new(origin: Vec2<T>, tile_size: T, n_x: usize, n_y: usize) -> Result<Self> {
        let c = Self {
            origin,
            tile_size,
            n_x,
            n_y,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tile_size > T::zero()) || !self.tile_size.is_finite() {
            return Err(Error::param("tile_size", format!("must be > 0, got {}", self.tile_size)));
        }
        if self.n_x == 0 || self.n_y == 0 {
            return Err(Error::param("tiles", "need at least one tile per axis"));
        }
        if !self.origin.is_finite() {
            return Err(Error::param("origin", "must be finite"));
        }
        Ok(())
    }

    pub fn n_states(&self) -> usize {
        self.n_x * self.n_y
    }

    /// Upper-right corner of the arena.
    pub fn extent(&self) -> Vec2<T> {
        self.origin
            + Vec2::new(
                self.tile_size * T::from_usize_lossy(self.n_x),
                self.tile_size * T::from_usize_lossy(self.n_y),
            )
    }

    /// Row-major tile index of `x`, and whether `x` lay outside the arena
    /// and was clamped to the nearest boundary tile.
    pub fn locate(&self, x: Vec2<T>) -> (usize, bool) {
        let axis = |coord: T, origin: T, n: usize| -> (usize, bool) {
            let f = ((coord - origin) / self.tile_size).floor();
            if !(f >= T::zero()) {
                (0, true)
            } else {
                match f.to_usize() {
                    Some(i) if i < n => (i, false),
                    _ => (n - 1, true),
                }
            }
        };
        let (i, cx) = axis(x.x, self.origin.x, self.n_x);
        let (j, cy) = axis(x.y, self.origin.y, self.n_y);
        (j * self.n_x + i, cx || cy)
    }

    pub fn state_of(&self, x: Vec2<T>) -> usize {
        self.locate(x).0
    }

    /// Centre of tile `state`.
    pub fn center(&self, state: usize) -> Vec2<T> {
        let i = state % self.n_x;
        let j = state / self.n_x;
        let half = T::lit(0.5);
        self.origin
            + Vec2::new(
                (T::from_usize_lossy(i) + half) * self.tile_size,
                (T::from_usize_lossy(j) + half) * self.tile_size,
            )
    }
}

/// Compass steering directions `θ_j = (j - 1)·π/4`, optionally followed by
/// the engine-off action.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionSet<T> {
    pub angles: Vec<T>,
    pub include_off: bool,
}

impl<T: Scalar> ActionSet<T> {
    pub fn compass(include_off: bool) -> Self {
        let step = T::FRAC_PI_4();
        Self {
            angles: (0..8).map(|j| step * T::from_usize_lossy(j)).collect(),
            include_off,
        }
    }

    pub fn n_actions(&self) -> usize {
        self.angles.len() + usize::from(self.include_off)
    }

    /// Index of the engine-off action, when present.
    pub fn off_action(&self) -> Option<usize> {
        self.include_off.then_some(self.angles.len())
    }

    pub fn controls(&self) -> Vec<crate::navigator::Control<T>> {
        use crate::navigator::Control;
        let mut c: Vec<_> = self.angles.iter().map(|&a| Control::Steer(a)).collect();
        if self.include_off {
            c.push(Control::Off);
        }
        c
    }
}
