use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// An element of Q(i): `re + im * i` with exact rational parts.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct GaussRational {
    pub re: BigRational,
    pub im: BigRational,
}

impl GaussRational {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        GaussRational { re, im }
    }

    pub fn from_int(v: i64) -> Self {
        GaussRational {
            re: BigRational::from_integer(BigInt::from(v)),
            im: BigRational::zero(),
        }
    }

    /// `num / den`; panics if `den == 0`.
    pub fn from_frac(num: i64, den: i64) -> Self {
        GaussRational {
            re: BigRational::new(BigInt::from(num), BigInt::from(den)),
            im: BigRational::zero(),
        }
    }

    pub fn i() -> Self {
        GaussRational {
            re: BigRational::zero(),
            im: BigRational::one(),
        }
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.re.is_one() && self.im.is_zero()
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn inv(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        let norm = &self.re * &self.re + &self.im * &self.im;
        Some(GaussRational {
            re: &self.re / &norm,
            im: -(&self.im / &norm),
        })
    }

    pub fn scale_int(&self, k: i64) -> Self {
        let k = BigRational::from_integer(BigInt::from(k));
        GaussRational {
            re: &self.re * &k,
            im: &self.im * &k,
        }
    }
}

impl Zero for GaussRational {
    fn zero() -> Self {
        GaussRational {
            re: BigRational::zero(),
            im: BigRational::zero(),
        }
    }
    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }
}

impl One for GaussRational {
    fn one() -> Self {
        GaussRational::from_int(1)
    }
}

impl<'a> Add<&'a GaussRational> for &'a GaussRational {
    type Output = GaussRational;
    fn add(self, rhs: &GaussRational) -> GaussRational {
        GaussRational {
            re: &self.re + &rhs.re,
            im: &self.im + &rhs.im,
        }
    }
}

impl Add for GaussRational {
    type Output = GaussRational;
    fn add(self, rhs: GaussRational) -> GaussRational {
        GaussRational {
            re: self.re + rhs.re,
            im: self.im + rhs.im,
        }
    }
}

impl AddAssign<&GaussRational> for GaussRational {
    fn add_assign(&mut self, rhs: &GaussRational) {
        self.re += &rhs.re;
        self.im += &rhs.im;
    }
}

impl<'a> Sub<&'a GaussRational> for &'a GaussRational {
    type Output = GaussRational;
    fn sub(self, rhs: &GaussRational) -> GaussRational {
        GaussRational {
            re: &self.re - &rhs.re,
            im: &self.im - &rhs.im,
        }
    }
}

impl<'a> Mul<&'a GaussRational> for &'a GaussRational {
    type Output = GaussRational;
    fn mul(self, rhs: &GaussRational) -> GaussRational {
        if self.im.is_zero() && rhs.im.is_zero() {
            return GaussRational {
                re: &self.re * &rhs.re,
                im: BigRational::zero(),
            };
        }
        GaussRational {
            re: &self.re * &rhs.re - &self.im * &rhs.im,
            im: &self.re * &rhs.im + &self.im * &rhs.re,
        }
    }
}

impl Mul for GaussRational {
    type Output = GaussRational;
    fn mul(self, rhs: GaussRational) -> GaussRational {
        &self * &rhs
    }
}

impl Neg for GaussRational {
    type Output = GaussRational;
    fn neg(self) -> GaussRational {
        GaussRational {
            re: -self.re,
            im: -self.im,
        }
    }
}

impl Neg for &GaussRational {
    type Output = GaussRational;
    fn neg(self) -> GaussRational {
        GaussRational {
            re: -&self.re,
            im: -&self.im,
        }
    }
}

fn fmt_rat(r: &BigRational, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if r.denom().is_one() {
        write!(f, "{}", r.numer())
    } else {
        write!(f, "{}/{}", r.numer(), r.denom())
    }
}

/// Prints in the expression grammar: `3/2`, `-i`, `2/3*i`, `(1-2*i)`.
impl fmt::Display for GaussRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let imag = |f: &mut fmt::Formatter<'_>, v: &BigRational| -> fmt::Result {
            if v.is_one() {
                write!(f, "i")
            } else if (-v).is_one() {
                write!(f, "-i")
            } else {
                fmt_rat(v, f)?;
                write!(f, "*i")
            }
        };
        match (self.re.is_zero(), self.im.is_zero()) {
            (_, true) => fmt_rat(&self.re, f),
            (true, false) => imag(f, &self.im),
            (false, false) => {
                write!(f, "(")?;
                fmt_rat(&self.re, f)?;
                if self.im.is_positive() {
                    write!(f, "+")?;
                    imag(f, &self.im)?;
                } else {
                    write!(f, "-")?;
                    imag(f, &(-&self.im))?;
                }
                write!(f, ")")
            }
        }
    }
}
