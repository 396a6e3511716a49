use std::fmt;

use super::MAX_DIM;

const FIELD_BITS: u32 = 8;
const FIELDS: usize = 1 + 2 * MAX_DIM;
const HIGH_BITS: u128 = {
    let mut m = 0u128;
    let mut f = 0;
    while f < FIELDS {
        m |= 0x80u128 << (FIELD_BITS as usize * f);
        f += 1;
    }
    m
};

/// Largest exponent a single variable may carry.
pub const MAX_EXPONENT: u32 = 127;

/// Exponent vector `t^m z^a zb^b` packed into one integer.
///
/// Field 0 (most significant) is the t-degree, fields `1..=MAX_DIM` the
/// z-exponents and the remaining fields the zb-exponents, so integer order
/// is lexicographic order on `(m, a, b)`. Every field stays below 128, which
/// lets two monomials be multiplied by a single addition.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Monomial(u128);

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub(crate) enum Var {
    T,
    Z(usize),
    Zb(usize),
}

impl Var {
    fn field(self) -> usize {
        match self {
            Var::T => 0,
            Var::Z(i) => 1 + i,
            Var::Zb(i) => 1 + MAX_DIM + i,
        }
    }
}

fn shift(field: usize) -> u32 {
    FIELD_BITS * (FIELDS - 1 - field) as u32
}

impl Monomial {
    pub const ONE: Monomial = Monomial(0);

    pub(crate) fn var(v: Var, exp: u32) -> Monomial {
        assert!(exp <= MAX_EXPONENT, "exponent {exp} exceeds {MAX_EXPONENT}");
        Monomial((exp as u128) << shift(v.field()))
    }

    pub(crate) fn exp(self, v: Var) -> u32 {
        ((self.0 >> shift(v.field())) & 0xff) as u32
    }

    pub fn t_degree(self) -> u32 {
        self.exp(Var::T)
    }

    pub fn z_exp(self, i: usize) -> u32 {
        self.exp(Var::Z(i))
    }

    pub fn zb_exp(self, i: usize) -> u32 {
        self.exp(Var::Zb(i))
    }

    /// Total zb-degree.
    pub fn zb_degree(self) -> u32 {
        (0..MAX_DIM).map(|i| self.zb_exp(i)).sum()
    }

    pub fn z_degree(self) -> u32 {
        (0..MAX_DIM).map(|i| self.z_exp(i)).sum()
    }

    /// Product of monomials; `None` if an exponent would exceed [`MAX_EXPONENT`].
    pub fn checked_mul(self, other: Monomial) -> Option<Monomial> {
        let s = self.0 + other.0;
        if s & HIGH_BITS != 0 {
            None
        } else {
            Some(Monomial(s))
        }
    }

    pub(crate) fn mul(self, other: Monomial) -> Monomial {
        self.checked_mul(other)
            .unwrap_or_else(|| panic!("monomial exponent overflow (max {MAX_EXPONENT})"))
    }

    /// Lowers the exponent of `v` by one, returning the old exponent.
    pub(crate) fn lower(self, v: Var) -> Option<(u32, Monomial)> {
        let e = self.exp(v);
        if e == 0 {
            None
        } else {
            Some((e, Monomial(self.0 - (1u128 << shift(v.field())))))
        }
    }

    /// The same monomial with its t-exponent cleared.
    pub(crate) fn without_t(self) -> Monomial {
        Monomial(self.0 & !(0xffu128 << shift(0)))
    }
}

impl fmt::Debug for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Monomial(")?;
        fmt::Display::fmt(self, f)?;
        write!(f, ")")
    }
}

/// `t^2*z1*zb2^3`; the unit monomial prints as `1`.
impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        let mut put = |f: &mut fmt::Formatter<'_>, name: String, e: u32| -> fmt::Result {
            if e == 0 {
                return Ok(());
            }
            if !first {
                write!(f, "*")?;
            }
            first = false;
            if e == 1 {
                write!(f, "{name}")
            } else {
                write!(f, "{name}^{e}")
            }
        };
        put(f, "t".into(), self.t_degree())?;
        for i in 0..MAX_DIM {
            put(f, format!("z{}", i + 1), self.z_exp(i))?;
        }
        for i in 0..MAX_DIM {
            put(f, format!("zb{}", i + 1), self.zb_exp(i))?;
        }
        if first {
            write!(f, "1")?;
        }
        Ok(())
    }
}
