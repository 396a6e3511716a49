//! Scalar differential forms on the chart in the normal form
//! `sum f_{I,J} dzb^J ^ dz^I`, with the antiholomorphic block first.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Neg, Sub};

use crate::coeff::{Chart, GaussRational, PolySeries};
use crate::error::{KernelError, Result};

/// A strictly increasing set of axis indices, stored as a bit mask.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct MultiIndex(u16);

impl MultiIndex {
    pub const EMPTY: MultiIndex = MultiIndex(0);

    pub fn from_mask(mask: u16) -> Self {
        MultiIndex(mask)
    }

    pub fn single(axis: usize) -> Self {
        MultiIndex(1 << axis)
    }

    /// `None` if the entries are not strictly increasing.
    pub fn from_sorted(entries: &[usize]) -> Option<Self> {
        let mut mask = 0u16;
        let mut prev: Option<usize> = None;
        for &e in entries {
            if prev.is_some_and(|p| e <= p) || e >= 16 {
                return None;
            }
            mask |= 1 << e;
            prev = Some(e);
        }
        Some(MultiIndex(mask))
    }

    /// The full index `{0..n-1}`.
    pub fn full(n: usize) -> Self {
        MultiIndex(((1u32 << n) - 1) as u16)
    }

    pub fn mask(self) -> u16 {
        self.0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn contains(self, axis: usize) -> bool {
        self.0 & (1 << axis) != 0
    }

    pub fn entries(self) -> impl Iterator<Item = usize> + Clone {
        (0..16).filter(move |b| self.0 & (1 << b) != 0)
    }

    pub fn max_axis(self) -> Option<usize> {
        self.entries().last()
    }

    /// Number of entries strictly below `axis`.
    pub fn rank_of(self, axis: usize) -> usize {
        (self.0 & ((1u16 << axis) - 1)).count_ones() as usize
    }

    pub fn with(self, axis: usize) -> Self {
        MultiIndex(self.0 | (1 << axis))
    }

    pub fn without(self, axis: usize) -> Self {
        MultiIndex(self.0 & !(1 << axis))
    }

    /// All increasing index sets of size `p` drawn from `0..n`, in
    /// lexicographic order.
    pub fn all_of_size(n: usize, p: usize) -> Vec<MultiIndex> {
        let mut out: Vec<MultiIndex> = (0u32..(1 << n))
            .filter(|m| m.count_ones() as usize == p)
            .map(|m| MultiIndex(m as u16))
            .collect();
        out.sort();
        out
    }
}

/// Lexicographic order on the increasing entry lists (a proper prefix
/// sorts first).
impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.entries().cmp(other.entries())
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let v: Vec<usize> = self.entries().map(|e| e + 1).collect();
        write!(f, "{v:?}")
    }
}

/// Basis element `dzb^J ^ dz^I`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Default)]
pub struct FormKey {
    pub dzb: MultiIndex,
    pub dz: MultiIndex,
}

impl FormKey {
    pub const UNIT: FormKey = FormKey { dzb: MultiIndex::EMPTY, dz: MultiIndex::EMPTY };

    pub fn new(dzb: MultiIndex, dz: MultiIndex) -> Self {
        FormKey { dzb, dz }
    }

    /// `(p, q)` = (holomorphic, antiholomorphic) degree.
    pub fn bidegree(self) -> (usize, usize) {
        (self.dz.len(), self.dzb.len())
    }

    pub fn degree(self) -> usize {
        self.dz.len() + self.dzb.len()
    }

    /// Generators as slots: `dzb^j -> j`, `dz^i -> 8 + i`.
    fn slots(self) -> u16 {
        self.dzb.0 | (self.dz.0 << 8)
    }

    fn from_slots(s: u16) -> Self {
        FormKey { dzb: MultiIndex(s & 0xff), dz: MultiIndex(s >> 8) }
    }

    /// `self ^ other` as `(sign, key)`, or `None` when a generator repeats.
    pub fn wedge(self, other: FormKey) -> Option<(i64, FormKey)> {
        let a = self.slots();
        let b = other.slots();
        if a & b != 0 {
            return None;
        }
        let mut inversions = 0u32;
        let mut rest = b;
        while rest != 0 {
            let y = rest.trailing_zeros();
            inversions += (a >> (y + 1)).count_ones();
            rest &= rest - 1;
        }
        let sign = if inversions.is_multiple_of(2) { 1 } else { -1 };
        Some((sign, FormKey::from_slots(a | b)))
    }

    /// Interior product with `d/dz^{axis}`: sign from the generator's position.
    pub fn interior_dz(self, axis: usize) -> Option<(i64, FormKey)> {
        if !self.dz.contains(axis) {
            return None;
        }
        let pos = self.dzb.len() + self.dz.rank_of(axis);
        let sign = if pos.is_multiple_of(2) { 1 } else { -1 };
        Some((sign, FormKey { dzb: self.dzb, dz: self.dz.without(axis) }))
    }

    /// Interior product with `d/dzb^{axis}`.
    pub fn interior_dzb(self, axis: usize) -> Option<(i64, FormKey)> {
        if !self.dzb.contains(axis) {
            return None;
        }
        let pos = self.dzb.rank_of(axis);
        let sign = if pos.is_multiple_of(2) { 1 } else { -1 };
        Some((sign, FormKey { dzb: self.dzb.without(axis), dz: self.dz }))
    }

    /// `dzb1^dzb2^dz1`, or `1` for the unit.
    pub fn label(self) -> String {
        let parts: Vec<String> = self
            .dzb
            .entries()
            .map(|j| format!("dzb{}", j + 1))
            .chain(self.dz.entries().map(|i| format!("dz{}", i + 1)))
            .collect();
        if parts.is_empty() {
            "1".to_string()
        } else {
            parts.join("^")
        }
    }
}

/// An element of the bigraded exterior algebra over the coefficient ring.
/// Forms may be inhomogeneous.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Form {
    chart: Chart,
    terms: BTreeMap<FormKey, PolySeries>,
}

impl Form {
    pub fn zero(chart: Chart) -> Self {
        Form { chart, terms: BTreeMap::new() }
    }

    pub fn one(chart: Chart) -> Self {
        Self::scalar(PolySeries::one(chart))
    }

    /// A 0-form.
    pub fn scalar(f: PolySeries) -> Self {
        Self::term(FormKey::UNIT, f)
    }

    pub fn term(key: FormKey, f: PolySeries) -> Self {
        let chart = f.chart();
        let mut terms = BTreeMap::new();
        if !f.is_zero() {
            terms.insert(key, f);
        }
        Form { chart, terms }
    }

    pub fn basis(chart: Chart, key: FormKey) -> Self {
        Self::term(key, PolySeries::one(chart))
    }

    pub fn dz(chart: Chart, axis: usize) -> Result<Self> {
        chart.check_axis(axis)?;
        Ok(Self::basis(chart, FormKey::new(MultiIndex::EMPTY, MultiIndex::single(axis))))
    }

    pub fn dzb(chart: Chart, axis: usize) -> Result<Self> {
        chart.check_axis(axis)?;
        Ok(Self::basis(chart, FormKey::new(MultiIndex::single(axis), MultiIndex::EMPTY)))
    }

    /// `dz^1 ^ ... ^ dz^n`.
    pub fn volume(chart: Chart) -> Self {
        Self::basis(chart, FormKey::new(MultiIndex::EMPTY, MultiIndex::full(chart.dim)))
    }

    pub fn chart(&self) -> Chart {
        self.chart
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&FormKey, &PolySeries)> {
        self.terms.iter()
    }

    pub fn coeff(&self, key: FormKey) -> PolySeries {
        self.terms.get(&key).cloned().unwrap_or_else(|| PolySeries::zero(self.chart))
    }

    pub(crate) fn add_term(&mut self, key: FormKey, f: &PolySeries) {
        if f.is_zero() {
            return;
        }
        match self.terms.entry(key) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(f.clone());
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let s = e.get() + f;
                if s.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = s;
                }
            }
        }
    }

    pub fn from_terms<I>(chart: Chart, terms: I) -> Self
    where
        I: IntoIterator<Item = (FormKey, PolySeries)>,
    {
        let mut out = Self::zero(chart);
        for (k, f) in terms {
            chart.assert_same(f.chart());
            out.add_term(k, &f);
        }
        out
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        self.chart.check(other.chart)?;
        let mut out = self.clone();
        for (k, f) in &other.terms {
            out.add_term(*k, f);
        }
        Ok(out)
    }

    pub fn checked_wedge(&self, other: &Self) -> Result<Self> {
        self.chart.check(other.chart)?;
        let mut out = Self::zero(self.chart);
        for (ka, fa) in &self.terms {
            for (kb, fb) in &other.terms {
                if let Some((sign, k)) = ka.wedge(*kb) {
                    let prod = fa * fb;
                    out.add_term(k, &if sign < 0 { -prod } else { prod });
                }
            }
        }
        Ok(out)
    }

    /// Graded-commutative product; panics on chart mismatch (see
    /// [`Form::checked_wedge`]).
    pub fn wedge(&self, other: &Self) -> Self {
        self.checked_wedge(other).unwrap_or_else(|e| panic!("{e}"))
    }

    /// Multiplies every coefficient by a function.
    pub fn mul_scalar(&self, f: &PolySeries) -> Self {
        self.map_coeffs(|c| c * f)
    }

    pub fn scale(&self, c: &GaussRational) -> Self {
        self.map_coeffs(|f| f.scale(c))
    }

    pub fn scale_int(&self, k: i64) -> Self {
        self.map_coeffs(|f| f.scale_int(k))
    }

    pub fn map_coeffs(&self, mut f: impl FnMut(&PolySeries) -> PolySeries) -> Self {
        let mut out = Self::zero(self.chart);
        for (k, c) in &self.terms {
            let v = f(c);
            if !v.is_zero() {
                out.terms.insert(*k, v);
            }
        }
        out
    }

    /// Exterior derivative in the given family of generators, new generator
    /// wedged on the left.
    fn derive(&self, holomorphic: bool) -> Self {
        let mut out = Self::zero(self.chart);
        for (k, f) in &self.terms {
            for axis in 0..self.chart.dim {
                let df = if holomorphic {
                    f.d_z(axis).expect("axis in range")
                } else {
                    f.d_zbar(axis).expect("axis in range")
                };
                if df.is_zero() {
                    continue;
                }
                let g = if holomorphic {
                    FormKey::new(MultiIndex::EMPTY, MultiIndex::single(axis))
                } else {
                    FormKey::new(MultiIndex::single(axis), MultiIndex::EMPTY)
                };
                if let Some((sign, nk)) = g.wedge(*k) {
                    out.add_term(nk, &if sign < 0 { -df } else { df });
                }
            }
        }
        out
    }

    /// The operator `∂`.
    pub fn partial(&self) -> Self {
        self.derive(true)
    }

    /// The operator `∂̄`.
    pub fn dbar(&self) -> Self {
        self.derive(false)
    }

    /// Interior product with the coordinate field `d/dz^{axis}` (an
    /// antiderivation).
    pub fn interior_dz(&self, axis: usize) -> Self {
        let mut out = Self::zero(self.chart);
        for (k, f) in &self.terms {
            if let Some((sign, nk)) = k.interior_dz(axis) {
                out.add_term(nk, &if sign < 0 { -f } else { f.clone() });
            }
        }
        out
    }

    /// Coefficient-wise partial derivative in `z^{axis}`.
    pub fn coeff_d_z(&self, axis: usize) -> Self {
        self.map_coeffs(|f| f.d_z(axis).expect("axis in range"))
    }

    /// The `(p, q)`-homogeneous part.
    pub fn component(&self, p: usize, q: usize) -> Self {
        Form {
            chart: self.chart,
            terms: self
                .terms
                .iter()
                .filter(|(k, _)| k.bidegree() == (p, q))
                .map(|(k, f)| (*k, f.clone()))
                .collect(),
        }
    }

    /// Distinct bidegrees present, ascending.
    pub fn bidegrees(&self) -> Vec<(usize, usize)> {
        let mut v: Vec<_> = self.terms.keys().map(|k| k.bidegree()).collect();
        v.sort();
        v.dedup();
        v
    }

    /// True for zero and for forms with a single bidegree `(p, q)`.
    pub fn is_homogeneous_of(&self, p: usize, q: usize) -> bool {
        self.terms.keys().all(|k| k.bidegree() == (p, q))
    }

    pub fn t_coeff(&self, k: usize) -> Self {
        self.map_coeffs(|f| f.t_coeff(k))
    }

    pub fn shift_t(&self, k: usize) -> Self {
        self.map_coeffs(|f| f.shift_t(k))
    }

    pub fn truncate_below(&self, k: usize) -> Self {
        self.map_coeffs(|f| f.truncate_below(k))
    }

    pub fn t_degree(&self) -> Option<usize> {
        self.terms.values().filter_map(PolySeries::t_degree).max()
    }
}

impl<'a> Add<&'a Form> for &'a Form {
    type Output = Form;
    fn add(self, rhs: &Form) -> Form {
        self.checked_add(rhs).unwrap_or_else(|e| panic!("{e}"))
    }
}

impl<'a> Sub<&'a Form> for &'a Form {
    type Output = Form;
    fn sub(self, rhs: &Form) -> Form {
        self + &(-rhs)
    }
}

impl Neg for &Form {
    type Output = Form;
    fn neg(self) -> Form {
        self.map_coeffs(|f| -f)
    }
}

impl Neg for Form {
    type Output = Form;
    fn neg(self) -> Form {
        -&self
    }
}

impl fmt::Debug for Form {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// `(coeff)*dzb1^dz2 + ...`, terms ordered by `(J, I)`.
impl fmt::Display for Form {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (n, (k, c)) in self.terms.iter().enumerate() {
            if n > 0 {
                write!(f, " + ")?;
            }
            if *k == FormKey::UNIT {
                write!(f, "({c})")?;
            } else if c.is_one() {
                write!(f, "{}", k.label())?;
            } else {
                write!(f, "({c})*{}", k.label())?;
            }
        }
        Ok(())
    }
}

/// Parses a basis label such as `dz2^dzb1` into a sign and normal-form key.
pub fn parse_label(chart: Chart, label: &str) -> Result<(i64, FormKey)> {
    let label = label.trim();
    if label == "1" || label.is_empty() {
        return Ok((1, FormKey::UNIT));
    }
    let mut acc = (1i64, FormKey::UNIT);
    for part in label.split('^') {
        let part = part.trim();
        let (holo, digits) = if let Some(d) = part.strip_prefix("dzb") {
            (false, d)
        } else if let Some(d) = part.strip_prefix("dz") {
            (true, d)
        } else {
            return Err(KernelError::RankMismatch(format!("bad form generator '{part}'")));
        };
        let axis: usize = digits
            .parse::<usize>()
            .ok()
            .filter(|&a| a >= 1)
            .ok_or_else(|| KernelError::RankMismatch(format!("bad form generator '{part}'")))?
            - 1;
        chart.check_axis(axis)?;
        let g = if holo {
            FormKey::new(MultiIndex::EMPTY, MultiIndex::single(axis))
        } else {
            FormKey::new(MultiIndex::single(axis), MultiIndex::EMPTY)
        };
        match acc.1.wedge(g) {
            Some((s, k)) => acc = (acc.0 * s, k),
            None => return Ok((0, FormKey::UNIT)),
        }
    }
    Ok(acc)
}
