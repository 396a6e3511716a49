//! The coefficient ring: polynomials in `z, zb` over Q(i), tensored with a
//! power series in `t` truncated at a fixed order.

mod matrix;
mod monomial;
mod poly;
mod rational;

pub use matrix::SeriesMatrix;
pub use monomial::{Monomial, MAX_EXPONENT};
pub(crate) use monomial::Var;
pub use poly::PolySeries;
pub use rational::GaussRational;

use crate::error::{KernelError, Result};

/// Largest supported chart dimension.
pub const MAX_DIM: usize = 7;

/// Chart dimension `n` and t-truncation order `N` shared by every value
/// that takes part in one computation.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct Chart {
    pub dim: usize,
    pub order: usize,
}

impl Chart {
    pub fn new(dim: usize, order: usize) -> Result<Chart> {
        if dim == 0 || dim > MAX_DIM {
            return Err(KernelError::UnsupportedDimension(dim));
        }
        if order > MAX_EXPONENT as usize {
            return Err(KernelError::ExponentOverflow);
        }
        Ok(Chart { dim, order })
    }

    pub(crate) fn check(self, other: Chart) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(KernelError::ChartMismatch(self.dim, self.order, other.dim, other.order))
        }
    }

    pub(crate) fn assert_same(self, other: Chart) {
        if let Err(e) = self.check(other) {
            panic!("{e}");
        }
    }

    pub(crate) fn check_axis(self, axis: usize) -> Result<()> {
        if axis < self.dim {
            Ok(())
        } else {
            Err(KernelError::AxisOutOfRange { axis, dim: self.dim })
        }
    }
}
