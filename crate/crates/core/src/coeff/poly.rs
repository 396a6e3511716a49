use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Zero};

use super::{Chart, GaussRational, Monomial, Var};
use crate::error::{KernelError, Result};

/// A polynomial in `z1..zn, zb1..zbn` over Q(i) with coefficients that are
/// power series in `t`, truncated so that every stored t-degree is at most
/// the chart order.
///
/// Stored coefficients are never zero, so structural equality is equality
/// in the ring.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PolySeries {
    chart: Chart,
    terms: BTreeMap<Monomial, GaussRational>,
}

impl PolySeries {
    pub fn zero(chart: Chart) -> Self {
        PolySeries { chart, terms: BTreeMap::new() }
    }

    pub fn one(chart: Chart) -> Self {
        Self::constant(chart, GaussRational::one())
    }

    pub fn constant(chart: Chart, c: GaussRational) -> Self {
        Self::monomial(chart, Monomial::ONE, c)
    }

    pub fn from_int(chart: Chart, v: i64) -> Self {
        Self::constant(chart, GaussRational::from_int(v))
    }

    pub(crate) fn monomial(chart: Chart, m: Monomial, c: GaussRational) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() && m.t_degree() as usize <= chart.order {
            terms.insert(m, c);
        }
        PolySeries { chart, terms }
    }

    /// The coordinate `z^{i+1}`.
    pub fn z(chart: Chart, i: usize) -> Result<Self> {
        chart.check_axis(i)?;
        Ok(Self::monomial(chart, Monomial::var(Var::Z(i), 1), GaussRational::one()))
    }

    /// The conjugate coordinate `zb^{i+1}`.
    pub fn zb(chart: Chart, i: usize) -> Result<Self> {
        chart.check_axis(i)?;
        Ok(Self::monomial(chart, Monomial::var(Var::Zb(i), 1), GaussRational::one()))
    }

    /// The deformation parameter (zero when the chart order is 0).
    pub fn t(chart: Chart) -> Self {
        Self::monomial(chart, Monomial::var(Var::T, 1), GaussRational::one())
    }

    /// `t^k`, zero beyond the truncation order.
    pub fn t_pow(chart: Chart, k: usize) -> Self {
        if k > chart.order {
            return Self::zero(chart);
        }
        Self::monomial(chart, Monomial::var(Var::T, k as u32), GaussRational::one())
    }

    pub fn chart(&self) -> Chart {
        self.chart
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1
            && self.terms.get(&Monomial::ONE).is_some_and(GaussRational::is_one)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &GaussRational)> {
        self.terms.iter()
    }

    pub fn coeff(&self, m: &Monomial) -> GaussRational {
        self.terms.get(m).cloned().unwrap_or_else(GaussRational::zero)
    }

    /// Builds a series from raw terms, dropping zeros and truncating.
    pub fn from_terms<I>(chart: Chart, terms: I) -> Self
    where
        I: IntoIterator<Item = (Monomial, GaussRational)>,
    {
        let mut out = Self::zero(chart);
        for (m, c) in terms {
            out.add_term(m, &c);
        }
        out
    }

    pub(crate) fn add_term(&mut self, m: Monomial, c: &GaussRational) {
        if c.is_zero() || m.t_degree() as usize > self.chart.order {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c.clone());
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        self.chart.check(other.chart)?;
        let (big, small) = if self.len() >= other.len() { (self, other) } else { (other, self) };
        let mut out = big.clone();
        for (m, c) in &small.terms {
            out.add_term(*m, c);
        }
        Ok(out)
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        self.chart.check(other.chart)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(*m, &-c);
        }
        Ok(out)
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self> {
        self.chart.check(other.chart)?;
        let order = self.chart.order as u32;
        let mut out = Self::zero(self.chart);
        for (ma, ca) in &self.terms {
            let ta = ma.t_degree();
            for (mb, cb) in &other.terms {
                if ta + mb.t_degree() > order {
                    continue;
                }
                let m = ma.checked_mul(*mb).ok_or(KernelError::ExponentOverflow)?;
                out.add_term(m, &(ca * cb));
            }
        }
        Ok(out)
    }

    pub fn scale(&self, c: &GaussRational) -> Self {
        if c.is_zero() {
            return Self::zero(self.chart);
        }
        PolySeries {
            chart: self.chart,
            terms: self.terms.iter().map(|(m, v)| (*m, v * c)).collect(),
        }
    }

    pub fn scale_int(&self, k: i64) -> Self {
        self.scale(&GaussRational::from_int(k))
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Self::one(self.chart);
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    fn derivative(&self, v: Var) -> Self {
        let mut out = Self::zero(self.chart);
        for (m, c) in &self.terms {
            if let Some((e, lowered)) = m.lower(v) {
                out.add_term(lowered, &c.scale_int(e as i64));
            }
        }
        out
    }

    /// Partial derivative in `z^{i+1}`; `t` is inert.
    pub fn d_z(&self, i: usize) -> Result<Self> {
        self.chart.check_axis(i)?;
        Ok(self.derivative(Var::Z(i)))
    }

    /// Partial derivative in `zb^{i+1}`.
    pub fn d_zbar(&self, i: usize) -> Result<Self> {
        self.chart.check_axis(i)?;
        Ok(self.derivative(Var::Zb(i)))
    }

    /// Largest t-degree present, `None` for zero.
    pub fn t_degree(&self) -> Option<usize> {
        self.terms.keys().map(|m| m.t_degree() as usize).max()
    }

    /// The coefficient of `t^k`, as a t-free series.
    pub fn t_coeff(&self, k: usize) -> Self {
        PolySeries {
            chart: self.chart,
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.t_degree() as usize == k)
                .map(|(m, c)| (m.without_t(), c.clone()))
                .collect(),
        }
    }

    /// Multiplies by `t^k` and truncates.
    pub fn shift_t(&self, k: usize) -> Self {
        Self::from_terms(
            self.chart,
            self.terms
                .iter()
                .map(|(m, c)| (m.mul(Monomial::var(Var::T, k.min(127) as u32)), c.clone())),
        )
    }

    /// Sum of the terms whose t-degree is below `k`.
    pub fn truncate_below(&self, k: usize) -> Self {
        PolySeries {
            chart: self.chart,
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| (m.t_degree() as usize) < k)
                .map(|(m, c)| (*m, c.clone()))
                .collect(),
        }
    }

    /// True when no monomial involves `z`, `zb`.
    pub fn is_constant_in_chart(&self) -> bool {
        self.terms.keys().all(|m| m.without_t() == Monomial::ONE)
    }

    /// True when no monomial involves `zb` (holomorphic in the chart).
    pub fn is_holomorphic(&self) -> bool {
        self.terms.keys().all(|m| m.zb_degree() == 0)
    }

    /// Re-embeds into a chart with another truncation order.
    pub fn with_order(&self, order: usize) -> Self {
        let chart = Chart { dim: self.chart.dim, order };
        Self::from_terms(chart, self.terms.iter().map(|(m, c)| (*m, c.clone())))
    }
}

impl<'a> Add<&'a PolySeries> for &'a PolySeries {
    type Output = PolySeries;
    fn add(self, rhs: &PolySeries) -> PolySeries {
        self.checked_add(rhs).unwrap_or_else(|e| panic!("{e}"))
    }
}

impl<'a> Sub<&'a PolySeries> for &'a PolySeries {
    type Output = PolySeries;
    fn sub(self, rhs: &PolySeries) -> PolySeries {
        self.checked_sub(rhs).unwrap_or_else(|e| panic!("{e}"))
    }
}

impl<'a> Mul<&'a PolySeries> for &'a PolySeries {
    type Output = PolySeries;
    fn mul(self, rhs: &PolySeries) -> PolySeries {
        self.checked_mul(rhs).unwrap_or_else(|e| panic!("{e}"))
    }
}

impl Neg for &PolySeries {
    type Output = PolySeries;
    fn neg(self) -> PolySeries {
        PolySeries {
            chart: self.chart,
            terms: self.terms.iter().map(|(m, c)| (*m, -c)).collect(),
        }
    }
}

impl Neg for PolySeries {
    type Output = PolySeries;
    fn neg(self) -> PolySeries {
        -&self
    }
}

impl fmt::Debug for PolySeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PolySeries[n={}, N={}](", self.chart.dim, self.chart.order)?;
        fmt::Display::fmt(self, f)?;
        write!(f, ")")
    }
}

/// Prints in the expression grammar, terms in ascending monomial order
/// (t-degree first). The output parses back to the same value.
impl fmt::Display for PolySeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (m, c)) in self.terms.iter().enumerate() {
            let neg_real = c.is_real() && c.re < num_rational::BigRational::zero();
            let mag = if neg_real { -c } else { c.clone() };
            if k == 0 {
                if neg_real {
                    write!(f, "-")?;
                }
            } else if neg_real {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            if *m == Monomial::ONE {
                write!(f, "{mag}")?;
            } else if mag.is_one() {
                write!(f, "{m}")?;
            } else {
                write!(f, "{mag}*{m}")?;
            }
        }
        Ok(())
    }
}
