use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Uniform MAC grid on the unit square: `n x n` pressure cells, mesh width
/// `h = 1/n`. Velocity components live on cell faces (x-faces carry u,
/// y-faces carry v), pressure lives at cell centers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridSpec {
    n: usize,
}

impl GridSpec {
    pub const MIN_CELLS: usize = 8;

    /// Square grid with `n` cells per direction. Rejects `n < 8` and any `n`
    /// for which `h * n` does not round back to exactly 1.0.
    pub fn square(n: usize) -> Result<Self> {
        if n < Self::MIN_CELLS {
            return Err(Error::InvalidGrid(format!(
                "need at least {} cells per direction, got {n}",
                Self::MIN_CELLS
            )));
        }
        let h = 1.0 / n as f64;
        if h * n as f64 != 1.0 {
            return Err(Error::InvalidGrid(format!(
                "h * n != 1 in f64 arithmetic for n = {n}"
            )));
        }
        Ok(GridSpec { n })
    }

    /// Rectangular constructor kept for symmetry with the field types;
    /// only square grids are accepted.
    pub fn new(nx: usize, ny: usize) -> Result<Self> {
        if nx != ny {
            return Err(Error::InvalidGrid(format!(
                "grid must be square, got {nx}x{ny}"
            )));
        }
        Self::square(nx)
    }

    #[inline]
    pub fn nx(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn ny(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn h(&self) -> f64 {
        1.0 / self.n as f64
    }

    /// Number of u samples: (n+1) x n.
    #[inline]
    pub fn u_len(&self) -> usize {
        (self.n + 1) * self.n
    }

    /// Number of v samples: n x (n+1).
    #[inline]
    pub fn v_len(&self) -> usize {
        self.n * (self.n + 1)
    }

    /// Number of pressure cells: n x n.
    #[inline]
    pub fn p_len(&self) -> usize {
        self.n * self.n
    }

    /// Interior velocity degrees of freedom (boundary faces are pinned to 0).
    #[inline]
    pub fn interior_dof(&self) -> usize {
        2 * (self.n - 1) * self.n
    }

    pub fn check_same(&self, other: &GridSpec) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::GridMismatch {
                left: self.n,
                right: other.n,
            })
        }
    }
}
