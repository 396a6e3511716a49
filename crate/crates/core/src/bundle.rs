//! Forms with values in tensor words over `E`, `T^{1,0}`, `Ω^p`, `K^{-1}`
//! and `End(E)`, together with connections and fiber endomorphisms.
//!
//! Every fiber carries a fixed holomorphic frame, so `∂̄` acts on
//! components. A fiber endomorphism with form coefficients acts by wedging
//! its coefficient on the left of the form part:
//! `A(α ⊗ b) = Σ A[b][b'] ∧ α ⊗ b'`. The `(1,0)` connection is
//! `∇^{1,0} = ∂ + A` with `A` the induced connection matrix, which is the
//! same as `∂α ⊗ b + (-1)^{|α|} α ∧ ∇b`.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Neg, Sub};

use smallvec::SmallVec;

use crate::coeff::{Chart, PolySeries};
use crate::error::{KernelError, Result};
use crate::forms::{Form, FormKey, MultiIndex};

/// One tensor factor of a value bundle.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub enum Factor {
    /// The bundle `E`, rank `r`, frame `e_k`.
    E,
    /// Holomorphic tangent bundle, frame `d/dz^i`.
    T,
    /// `Ω^p`, frame `dz^I` with `|I| = p`.
    OmegaP(usize),
    /// `K^{-1}`, frame `1/<dz>`.
    Kinv,
    /// `End(E)`, frame `E_{kl}: e_k -> e_l`.
    EndE,
}

impl Factor {
    pub fn rank(self, n: usize, r: usize) -> usize {
        self.basis(n, r).len()
    }

    /// Basis labels of the factor. `OmegaP` uses index masks, `EndE` uses
    /// `k * r + l`.
    pub fn basis(self, n: usize, r: usize) -> Vec<u16> {
        match self {
            Factor::E => (0..r as u16).collect(),
            Factor::T => (0..n as u16).collect(),
            Factor::OmegaP(p) => MultiIndex::all_of_size(n, p).into_iter().map(MultiIndex::mask).collect(),
            Factor::Kinv => vec![0],
            Factor::EndE => (0..(r * r) as u16).collect(),
        }
    }

    fn valid(self, b: u16, n: usize, r: usize) -> bool {
        match self {
            Factor::E => (b as usize) < r,
            Factor::T => (b as usize) < n,
            Factor::OmegaP(p) => {
                let m = MultiIndex::from_mask(b);
                m.len() == p && m.max_axis().is_none_or(|a| a < n)
            }
            Factor::Kinv => b == 0,
            Factor::EndE => (b as usize) < r * r,
        }
    }

    pub fn basis_label(self, b: u16, r: usize) -> String {
        match self {
            Factor::E => format!("e{}", b + 1),
            Factor::T => format!("d/dz{}", b + 1),
            Factor::OmegaP(_) => {
                let m = MultiIndex::from_mask(b);
                if m.is_empty() {
                    "1".into()
                } else {
                    FormKey::new(MultiIndex::EMPTY, m).label()
                }
            }
            Factor::Kinv => "1/<dz>".into(),
            Factor::EndE => {
                let r = r as u16;
                format!("E[{},{}]", b / r + 1, b % r + 1)
            }
        }
    }

    fn name(self) -> String {
        match self {
            Factor::E => "E".into(),
            Factor::T => "T".into(),
            Factor::OmegaP(p) => format!("Omega^{p}"),
            Factor::Kinv => "K^-1".into(),
            Factor::EndE => "End(E)".into(),
        }
    }

}

/// An ordered tensor product of factors; empty means scalar forms.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default, PartialOrd, Ord)]
pub struct FiberWord(pub Vec<Factor>);

impl FiberWord {
    pub fn scalar() -> Self {
        FiberWord(Vec::new())
    }

    pub fn e() -> Self {
        FiberWord(vec![Factor::E])
    }

    pub fn end_e() -> Self {
        FiberWord(vec![Factor::EndE])
    }

    pub fn factors(&self) -> &[Factor] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn rank(&self, n: usize, r: usize) -> usize {
        self.0.iter().map(|f| f.rank(n, r)).product()
    }

    pub fn concat(&self, other: &FiberWord) -> FiberWord {
        FiberWord(self.0.iter().chain(&other.0).copied().collect())
    }

    /// Every basis tuple, in lexicographic order.
    pub fn basis(&self, n: usize, r: usize) -> Vec<Basis> {
        let mut out: Vec<Basis> = vec![Basis::new()];
        for f in &self.0 {
            let fb = f.basis(n, r);
            out = out
                .into_iter()
                .flat_map(|t| {
                    fb.iter().map(move |b| {
                        let mut t2 = t.clone();
                        t2.push(*b);
                        t2
                    })
                })
                .collect();
        }
        out
    }
}

impl fmt::Display for FiberWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "scalar");
        }
        let names: Vec<String> = self.0.iter().map(|x| x.name()).collect();
        write!(f, "{}", names.join("⊗"))
    }
}

/// One basis index per factor of the word.
pub type Basis = SmallVec<[u16; 4]>;

/// A square matrix of forms. Entry `(src, dst)` is the coefficient with
/// which basis vector `src` is sent to `dst`: `A(b_src) = Σ A[src][dst] b_dst`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct FormMatrix {
    chart: Chart,
    size: usize,
    entries: Vec<Form>,
}

/// A `(0,1)`-form valued in `End(E)`.
pub type EndoField = FormMatrix;

impl FormMatrix {
    pub fn zero(chart: Chart, size: usize) -> Self {
        FormMatrix { chart, size, entries: vec![Form::zero(chart); size * size] }
    }

    pub fn identity(chart: Chart, size: usize) -> Self {
        let mut m = Self::zero(chart, size);
        for i in 0..size {
            m.set(i, i, Form::one(chart));
        }
        m
    }

    pub fn from_rows(chart: Chart, rows: Vec<Vec<Form>>) -> Result<Self> {
        let size = rows.len();
        let mut entries = Vec::with_capacity(size * size);
        for row in rows {
            if row.len() != size {
                return Err(KernelError::RankMismatch(format!("row of length {} in {size}x{size} matrix", row.len())));
            }
            for e in row {
                chart.check(e.chart())?;
                entries.push(e);
            }
        }
        Ok(FormMatrix { chart, size, entries })
    }

    pub fn chart(&self) -> Chart {
        self.chart
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn get(&self, src: usize, dst: usize) -> &Form {
        &self.entries[src * self.size + dst]
    }

    pub fn set(&mut self, src: usize, dst: usize, f: Form) {
        self.chart.assert_same(f.chart());
        self.entries[src * self.size + dst] = f;
    }

    pub fn rows(&self) -> Vec<Vec<Form>> {
        self.entries.chunks(self.size).map(|r| r.to_vec()).collect()
    }

    pub fn map(&self, f: impl Fn(&Form) -> Form) -> Self {
        FormMatrix { chart: self.chart, size: self.size, entries: self.entries.iter().map(f).collect() }
    }

    pub fn add(&self, other: &Self) -> Self {
        FormMatrix {
            chart: self.chart,
            size: self.size,
            entries: self.entries.iter().zip(&other.entries).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn neg(&self) -> Self {
        self.map(|f| -f)
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zero(self.chart, self.size);
        for i in 0..self.size {
            for j in 0..self.size {
                out.set(j, i, self.get(i, j).clone());
            }
        }
        out
    }

    /// Matrix product with wedge of entries: `(A∧B)[k][m] = Σ_l A[k][l] ∧ B[l][m]`.
    pub fn wedge(&self, other: &Self) -> Self {
        let n = self.size;
        let mut out = Self::zero(self.chart, n);
        for k in 0..n {
            for m in 0..n {
                let mut acc = Form::zero(self.chart);
                for l in 0..n {
                    let a = self.get(k, l);
                    let b = other.get(l, m);
                    if !a.is_zero() && !b.is_zero() {
                        acc = &acc + &a.wedge(b);
                    }
                }
                out.set(k, m, acc);
            }
        }
        out
    }

    pub fn trace(&self) -> Form {
        (0..self.size).fold(Form::zero(self.chart), |acc, i| &acc + self.get(i, i))
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(Form::is_zero)
    }

    /// True when every entry is homogeneous of bidegree `(p, q)`.
    pub fn is_homogeneous_of(&self, p: usize, q: usize) -> bool {
        self.entries.iter().all(|e| e.is_homogeneous_of(p, q))
    }

    /// As a form valued in `End(E)`, basis `E_{kl} = k * r + l`.
    pub fn to_end_valued(&self) -> ValuedForm {
        let mut out = ValuedForm::zero(self.chart, self.size, FiberWord::end_e());
        for k in 0..self.size {
            for l in 0..self.size {
                out.add_component(Basis::from_slice(&[(k * self.size + l) as u16]), self.get(k, l));
            }
        }
        out
    }

    /// Inverse of [`FormMatrix::to_end_valued`].
    pub fn from_end_valued(v: &ValuedForm) -> Result<Self> {
        if v.word() != &FiberWord::end_e() {
            return Err(KernelError::RankMismatch(format!("expected End(E)-valued form, got {}", v.word())));
        }
        let r = v.rank_e();
        let mut out = Self::zero(v.chart(), r);
        for (b, f) in v.components() {
            let idx = b[0] as usize;
            out.set(idx / r, idx % r, f.clone());
        }
        Ok(out)
    }

    fn row_list(&self, src: usize) -> Vec<(u16, Form)> {
        (0..self.size)
            .filter_map(|dst| {
                let f = self.get(src, dst);
                (!f.is_zero()).then(|| (dst as u16, f.clone()))
            })
            .collect()
    }
}

/// Sends a factor basis index to its images with form coefficients.
type FactorMatrix = BTreeMap<u16, Vec<(u16, Form)>>;

/// Endomorphism data from which the action on every factor is induced:
/// a matrix on the cotangent frame `dz^k` (inducing `T`, `Ω^p`, `K^{-1}`)
/// and a matrix on `E` (inducing `End(E)`). Factors act as derivations.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct FiberOperator {
    pub cotangent: Option<FormMatrix>,
    pub bundle: Option<FormMatrix>,
}

impl FiberOperator {
    pub fn bundle_only(m: FormMatrix) -> Self {
        FiberOperator { cotangent: None, bundle: Some(m) }
    }

    pub fn cotangent_only(m: FormMatrix) -> Self {
        FiberOperator { cotangent: Some(m), bundle: None }
    }

    fn factor_matrix(&self, factor: Factor, n: usize, r: usize) -> Option<FactorMatrix> {
        match factor {
            Factor::E => self.bundle.as_ref().map(|m| (0..r).map(|k| (k as u16, m.row_list(k))).collect()),
            Factor::EndE => self.bundle.as_ref().map(|m| end_lift(m, r)),
            Factor::T => self.cotangent.as_ref().map(|c| {
                let t = c.transpose().neg();
                (0..n).map(|k| (k as u16, t.row_list(k))).collect()
            }),
            Factor::OmegaP(p) => self.cotangent.as_ref().map(|c| exterior_lift(c, n, p)),
            Factor::Kinv => self.cotangent.as_ref().map(|c| {
                let tr = -c.trace();
                let mut m = FactorMatrix::new();
                m.insert(0, if tr.is_zero() { vec![] } else { vec![(0, tr)] });
                m
            }),
        }
    }

    /// The induced matrix on one factor, rows and columns in the order of
    /// [`Factor::basis`].
    pub fn factor_form_matrix(&self, factor: Factor, n: usize, r: usize) -> Option<FormMatrix> {
        let chart = self.cotangent.as_ref().or(self.bundle.as_ref())?.chart();
        let m = self.factor_matrix(factor, n, r)?;
        let basis = factor.basis(n, r);
        let pos: BTreeMap<u16, usize> = basis.iter().enumerate().map(|(i, b)| (*b, i)).collect();
        let mut out = FormMatrix::zero(chart, basis.len());
        for (src, images) in m {
            for (dst, f) in images {
                out.set(pos[&src], pos[&dst], f);
            }
        }
        Some(out)
    }

    /// Derivation action over every factor of the word. Fails if a factor
    /// of the word has no data.
    pub fn act(&self, s: &ValuedForm) -> Result<ValuedForm> {
        let (n, r) = (s.chart.dim, s.rank_e);
        let mut mats = Vec::with_capacity(s.word.len());
        for f in s.word.factors() {
            match self.factor_matrix(*f, n, r) {
                Some(m) => mats.push(m),
                None => {
                    return Err(KernelError::MissingConnection { word: s.word.to_string(), factor: f.name() })
                }
            }
        }
        Ok(apply_factor_matrices(s, mats.iter().enumerate()))
    }

    /// Action on the single factor at `position`.
    pub fn act_on_factor(&self, s: &ValuedForm, position: usize) -> Result<ValuedForm> {
        let f = *s.word.factors().get(position).ok_or_else(|| {
            KernelError::RankMismatch(format!("word {} has no factor {position}", s.word))
        })?;
        let m = self
            .factor_matrix(f, s.chart.dim, s.rank_e)
            .ok_or_else(|| KernelError::MissingConnection { word: s.word.to_string(), factor: f.name() })?;
        Ok(apply_factor_matrices(s, std::iter::once((position, &m))))
    }

    /// Action on the factors for which data is present; factors without
    /// data are left alone.
    pub fn act_where_defined(&self, s: &ValuedForm) -> ValuedForm {
        let (n, r) = (s.chart.dim, s.rank_e);
        let mats: Vec<(usize, FactorMatrix)> = s
            .word
            .factors()
            .iter()
            .enumerate()
            .filter_map(|(i, f)| self.factor_matrix(*f, n, r).map(|m| (i, m)))
            .collect();
        apply_factor_matrices(s, mats.iter().map(|(i, m)| (*i, m)))
    }

    pub fn is_zero(&self) -> bool {
        self.cotangent.as_ref().is_none_or(FormMatrix::is_zero) && self.bundle.as_ref().is_none_or(FormMatrix::is_zero)
    }
}

fn apply_factor_matrices<'a>(
    s: &ValuedForm,
    mats: impl Iterator<Item = (usize, &'a FactorMatrix)> + Clone,
) -> ValuedForm {
    let mut out = ValuedForm::zero(s.chart, s.rank_e, s.word.clone());
    for (basis, form) in &s.components {
        for (pos, m) in mats.clone() {
            if let Some(images) = m.get(&basis[pos]) {
                for (dst, coeff) in images {
                    let mut b = basis.clone();
                    b[pos] = *dst;
                    out.add_component(b, &coeff.wedge(form));
                }
            }
        }
    }
    out
}

/// `End(E)` action induced from `A` on `E`:
/// `E_{kl} -> Σ_m A[l][m] E_{km} - Σ_j A[j][k] E_{jl}`.
fn end_lift(a: &FormMatrix, r: usize) -> FactorMatrix {
    let mut out = FactorMatrix::new();
    for k in 0..r {
        for l in 0..r {
            let mut acc: BTreeMap<u16, Form> = BTreeMap::new();
            for m in 0..r {
                let c = a.get(l, m);
                if !c.is_zero() {
                    let e = acc.entry((k * r + m) as u16).or_insert_with(|| Form::zero(a.chart));
                    *e = &*e + c;
                }
            }
            for j in 0..r {
                let c = a.get(j, k);
                if !c.is_zero() {
                    let e = acc.entry((j * r + l) as u16).or_insert_with(|| Form::zero(a.chart));
                    *e = &*e - c;
                }
            }
            out.insert((k * r + l) as u16, acc.into_iter().filter(|(_, f)| !f.is_zero()).collect());
        }
    }
    out
}

/// Derivation extension of a cotangent matrix to `Λ^p`: in `dz^I`, each
/// `dz^{i}` is replaced by `Σ_l C[i][l] dz^l` and the result re-sorted.
fn exterior_lift(c: &FormMatrix, n: usize, p: usize) -> FactorMatrix {
    let mut out = FactorMatrix::new();
    for idx in MultiIndex::all_of_size(n, p) {
        let mut acc: BTreeMap<u16, Form> = BTreeMap::new();
        for i in idx.entries() {
            let rest = idx.without(i);
            for l in 0..n {
                let coeff = c.get(i, l);
                if coeff.is_zero() || rest.contains(l) {
                    continue;
                }
                let (lo, hi) = if i < l { (i, l) } else { (l, i) };
                let between = rest.entries().filter(|&e| e > lo && e < hi).count();
                let target = rest.with(l).mask();
                let term = if between % 2 == 0 { coeff.clone() } else { -coeff };
                let e = acc.entry(target).or_insert_with(|| Form::zero(c.chart));
                *e = &*e + &term;
            }
        }
        out.insert(idx.mask(), acc.into_iter().filter(|(_, f)| !f.is_zero()).collect());
    }
    out
}

/// A form with values in a tensor word: one [`Form`] per basis tuple.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ValuedForm {
    chart: Chart,
    rank_e: usize,
    word: FiberWord,
    components: BTreeMap<Basis, Form>,
}

impl ValuedForm {
    pub fn zero(chart: Chart, rank_e: usize, word: FiberWord) -> Self {
        ValuedForm { chart, rank_e, word, components: BTreeMap::new() }
    }

    /// A scalar form as a valued form over the empty word.
    pub fn scalar(f: Form) -> Self {
        let mut out = Self::zero(f.chart(), 1, FiberWord::scalar());
        out.add_component(Basis::new(), &f);
        out
    }

    /// `f ⊗ b` for a single basis tuple.
    pub fn single(rank_e: usize, word: FiberWord, basis: &[u16], f: Form) -> Result<Self> {
        let mut out = Self::zero(f.chart(), rank_e, word);
        out.check_basis(basis)?;
        out.add_component(Basis::from_slice(basis), &f);
        Ok(out)
    }

    /// An `E`-valued form `Σ_k f_k ⊗ e_k`.
    pub fn e_valued(forms: Vec<Form>) -> Result<Self> {
        let chart = forms.first().map(Form::chart).ok_or_else(|| KernelError::RankMismatch("rank 0".into()))?;
        let mut out = Self::zero(chart, forms.len(), FiberWord::e());
        for (k, f) in forms.iter().enumerate() {
            chart.check(f.chart())?;
            out.add_component(Basis::from_slice(&[k as u16]), f);
        }
        Ok(out)
    }

    fn check_basis(&self, basis: &[u16]) -> Result<()> {
        let (n, r) = (self.chart.dim, self.rank_e);
        let ok = basis.len() == self.word.len()
            && self.word.factors().iter().zip(basis).all(|(f, b)| f.valid(*b, n, r));
        if ok {
            Ok(())
        } else {
            Err(KernelError::RankMismatch(format!("basis {basis:?} does not fit word {}", self.word)))
        }
    }

    pub fn chart(&self) -> Chart {
        self.chart
    }

    pub fn rank_e(&self) -> usize {
        self.rank_e
    }

    pub fn word(&self) -> &FiberWord {
        &self.word
    }

    pub fn components(&self) -> impl Iterator<Item = (&Basis, &Form)> {
        self.components.iter()
    }

    pub fn component_at(&self, basis: &[u16]) -> Form {
        self.components.get(basis).cloned().unwrap_or_else(|| Form::zero(self.chart))
    }

    pub fn is_zero(&self) -> bool {
        self.components.is_empty()
    }

    pub(crate) fn add_component(&mut self, basis: Basis, f: &Form) {
        if f.is_zero() {
            return;
        }
        match self.components.entry(basis) {
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

    fn check_compatible(&self, other: &Self) -> Result<()> {
        self.chart.check(other.chart)?;
        if self.word != other.word || (self.rank_e != other.rank_e && !self.word.is_empty()) {
            return Err(KernelError::RankMismatch(format!(
                "cannot combine {} (r={}) with {} (r={})",
                self.word, self.rank_e, other.word, other.rank_e
            )));
        }
        Ok(())
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        for (b, f) in &other.components {
            out.add_component(b.clone(), f);
        }
        Ok(out)
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        self.checked_add(&-other)
    }

    pub fn map_forms(&self, mut f: impl FnMut(&Form) -> Form) -> Self {
        let mut out = Self::zero(self.chart, self.rank_e, self.word.clone());
        for (b, form) in &self.components {
            out.add_component(b.clone(), &f(form));
        }
        out
    }

    /// Tensor product `(α ⊗ b) ⊗ (β ⊗ c) = (α ∧ β) ⊗ (b, c)`.
    pub fn tensor(&self, other: &Self) -> Result<Self> {
        self.chart.check(other.chart)?;
        let rank_e = if self.word.is_empty() { other.rank_e } else { self.rank_e };
        let mut out = Self::zero(self.chart, rank_e, self.word.concat(&other.word));
        for (b1, f1) in &self.components {
            for (b2, f2) in &other.components {
                let mut b = b1.clone();
                b.extend_from_slice(b2);
                out.add_component(b, &f1.wedge(f2));
            }
        }
        Ok(out)
    }

    /// Wedges a scalar form on the left of every component.
    pub fn wedge_left(&self, f: &Form) -> Self {
        self.map_forms(|g| f.wedge(g))
    }

    pub fn component(&self, p: usize, q: usize) -> Self {
        self.map_forms(|f| f.component(p, q))
    }

    pub fn bidegrees(&self) -> Vec<(usize, usize)> {
        let mut v: Vec<_> = self.components.values().flat_map(Form::bidegrees).collect();
        v.sort();
        v.dedup();
        v
    }

    pub fn is_homogeneous_of(&self, p: usize, q: usize) -> bool {
        self.components.values().all(|f| f.is_homogeneous_of(p, q))
    }

    pub fn t_coeff(&self, k: usize) -> Self {
        self.map_forms(|f| f.t_coeff(k))
    }

    pub fn shift_t(&self, k: usize) -> Self {
        self.map_forms(|f| f.shift_t(k))
    }

    /// Replaces the word after a relabeling; basis tuples must fit.
    pub(crate) fn with_word(chart: Chart, rank_e: usize, word: FiberWord, comps: Vec<(Basis, Form)>) -> Self {
        let mut out = Self::zero(chart, rank_e, word);
        for (b, f) in comps {
            out.add_component(b, &f);
        }
        out
    }
}

impl<'a> Add<&'a ValuedForm> for &'a ValuedForm {
    type Output = ValuedForm;
    fn add(self, rhs: &ValuedForm) -> ValuedForm {
        self.checked_add(rhs).unwrap_or_else(|e| panic!("{e}"))
    }
}

impl<'a> Sub<&'a ValuedForm> for &'a ValuedForm {
    type Output = ValuedForm;
    fn sub(self, rhs: &ValuedForm) -> ValuedForm {
        self.checked_sub(rhs).unwrap_or_else(|e| panic!("{e}"))
    }
}

impl Neg for &ValuedForm {
    type Output = ValuedForm;
    fn neg(self) -> ValuedForm {
        self.map_forms(|f| -f)
    }
}

impl fmt::Debug for ValuedForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for ValuedForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.components.is_empty() {
            return write!(f, "0");
        }
        for (n, (b, form)) in self.components.iter().enumerate() {
            if n > 0 {
                write!(f, " + ")?;
            }
            write!(f, "[{form}]")?;
            for (factor, idx) in self.word.factors().iter().zip(b) {
                write!(f, " ⊗ {}", factor.basis_label(*idx, self.rank_e))?;
            }
        }
        Ok(())
    }
}

/// Christoffel symbols `Γ^k_{ij}` of the `(1,0)` connection on `T^{1,0}`:
/// `∇_{d/dz^i} d/dz^j = Γ^k_{ij} d/dz^k`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Christoffel {
    chart: Chart,
    symbols: Vec<PolySeries>,
}

impl Christoffel {
    pub fn zero(chart: Chart) -> Self {
        let n = chart.dim;
        Christoffel { chart, symbols: vec![PolySeries::zero(chart); n * n * n] }
    }

    pub fn chart(&self) -> Chart {
        self.chart
    }

    /// `Γ^k_{ij}` (0-based indices).
    pub fn get(&self, k: usize, i: usize, j: usize) -> &PolySeries {
        let n = self.chart.dim;
        &self.symbols[(k * n + i) * n + j]
    }

    pub fn set(&mut self, k: usize, i: usize, j: usize, v: PolySeries) {
        self.chart.assert_same(v.chart());
        let n = self.chart.dim;
        self.symbols[(k * n + i) * n + j] = v;
    }

    pub fn is_zero(&self) -> bool {
        self.symbols.iter().all(PolySeries::is_zero)
    }

    /// Connection matrix on the cotangent frame:
    /// `∇ dz^k = -Σ_{i,l} Γ^k_{il} dz^i ⊗ dz^l`.
    pub fn cotangent_matrix(&self) -> FormMatrix {
        let n = self.chart.dim;
        let mut m = FormMatrix::zero(self.chart, n);
        for k in 0..n {
            for l in 0..n {
                let mut f = Form::zero(self.chart);
                for i in 0..n {
                    let g = self.get(k, i, l);
                    if !g.is_zero() {
                        f = &f - &Form::dz(self.chart, i).expect("axis").mul_scalar(g);
                    }
                }
                m.set(k, l, f);
            }
        }
        m
    }
}

/// Connection data on the chart: the `(1,0)` connection matrix `θ` of `E`
/// (`∇e_k = Σ_j θ[k][j] e_j`) and the Christoffel symbols of `T^{1,0}`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ConnectionData {
    pub theta: Option<FormMatrix>,
    pub gamma: Option<Christoffel>,
}

impl ConnectionData {
    /// `θ = 0`, `Γ = 0`.
    pub fn flat(chart: Chart, r: usize) -> Self {
        ConnectionData { theta: Some(FormMatrix::zero(chart, r)), gamma: Some(Christoffel::zero(chart)) }
    }

    pub fn new(theta: FormMatrix, gamma: Christoffel) -> Result<Self> {
        theta.chart().check(gamma.chart())?;
        if !theta.is_homogeneous_of(1, 0) {
            return Err(KernelError::NotHomogeneous { p: 1, q: 0 });
        }
        Ok(ConnectionData { theta: Some(theta), gamma: Some(gamma) })
    }

    pub fn operator(&self) -> FiberOperator {
        FiberOperator {
            cotangent: self.gamma.as_ref().map(Christoffel::cotangent_matrix),
            bundle: self.theta.clone(),
        }
    }

    /// `∂θ - θ∧θ`, the `(2,0)` part of the curvature of `θ`.
    pub fn curvature_20(&self) -> Option<FormMatrix> {
        self.theta.as_ref().map(|t| t.map(Form::partial).add(&t.wedge(t).neg()))
    }
}

/// `∇^{1,0} = ∂ + (induced connection)` over every factor of the word.
pub fn nabla10(conn: &ConnectionData, s: &ValuedForm) -> Result<ValuedForm> {
    let d = s.map_forms(Form::partial);
    if s.word.is_empty() {
        return Ok(d);
    }
    Ok(&d + &conn.operator().act(s)?)
}

/// Component-wise `∂̄`.
pub fn dbar_valued(s: &ValuedForm) -> ValuedForm {
    s.map_forms(Form::dbar)
}

/// `Θ = ∂̄θ` as an `End(E)`-valued `(1,1)` form.
pub fn curvature(conn: &ConnectionData) -> Result<FormMatrix> {
    let theta = conn.theta.as_ref().ok_or_else(|| KernelError::MissingConnection {
        word: "E".into(),
        factor: "E".into(),
    })?;
    Ok(theta.map(Form::dbar))
}

/// Action of an `End(E)`-valued form: on the factor at `position` when
/// given, otherwise as a derivation over every `E` and `End(E)` factor.
pub fn end_act(psi: &FormMatrix, s: &ValuedForm, position: Option<usize>) -> Result<ValuedForm> {
    psi.chart().check(s.chart())?;
    if psi.size() != s.rank_e() && s.word.factors().iter().any(|f| matches!(f, Factor::E | Factor::EndE)) {
        return Err(KernelError::RankMismatch(format!("endomorphism of rank {} on r = {}", psi.size(), s.rank_e())));
    }
    let op = FiberOperator::bundle_only(psi.clone());
    match position {
        Some(p) => {
            if !matches!(s.word.factors().get(p), Some(Factor::E) | Some(Factor::EndE)) {
                return Err(KernelError::RankMismatch(format!("factor {p} of {} is not E or End(E)", s.word)));
            }
            op.act_on_factor(s, p)
        }
        None => Ok(op.act_where_defined(s)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chart(n: usize) -> Chart {
        Chart::new(n, 2).unwrap()
    }

    #[test]
    fn scalar_nabla_is_partial() {
        let c = chart(2);
        let f = Form::scalar(&PolySeries::z(c, 0).unwrap() * &PolySeries::zb(c, 1).unwrap());
        let conn = ConnectionData::flat(c, 1);
        assert_eq!(nabla10(&conn, &ValuedForm::scalar(f.clone())).unwrap(), ValuedForm::scalar(f.partial()));
    }

    #[test]
    fn kinv_connection() {
        let c = chart(1);
        let unit = ValuedForm::single(1, FiberWord(vec![Factor::Kinv]), &[0], Form::one(c)).unwrap();
        assert!(nabla10(&ConnectionData::flat(c, 1), &unit).unwrap().is_zero());
        let mut gamma = Christoffel::zero(c);
        gamma.set(0, 0, 0, PolySeries::zb(c, 0).unwrap());
        let conn = ConnectionData::new(FormMatrix::zero(c, 1), gamma).unwrap();
        let expected = ValuedForm::single(
            1,
            FiberWord(vec![Factor::Kinv]),
            &[0],
            Form::dz(c, 0).unwrap().mul_scalar(&PolySeries::zb(c, 0).unwrap()),
        )
        .unwrap();
        assert_eq!(nabla10(&conn, &unit).unwrap(), expected);
    }

    #[test]
    fn dbar_valued_basic() {
        let c = chart(2);
        let s = ValuedForm::e_valued(vec![Form::scalar(PolySeries::zb(c, 0).unwrap())]).unwrap();
        let expected = ValuedForm::e_valued(vec![Form::dzb(c, 0).unwrap()]).unwrap();
        assert_eq!(dbar_valued(&s), expected);
    }

    #[test]
    fn curvature_examples() {
        let c = chart(1);
        let zb = PolySeries::zb(c, 0).unwrap();
        let theta = FormMatrix::from_rows(c, vec![vec![Form::dz(c, 0).unwrap().mul_scalar(&zb)]]).unwrap();
        let conn = ConnectionData::new(theta, Christoffel::zero(c)).unwrap();
        let expected = Form::dzb(c, 0).unwrap().wedge(&Form::dz(c, 0).unwrap());
        assert_eq!(curvature(&conn).unwrap().get(0, 0), &expected);
        assert!(curvature(&ConnectionData::flat(c, 2)).unwrap().is_zero());

        let c = chart(2);
        let zb2 = PolySeries::zb(c, 1).unwrap();
        let theta = FormMatrix::from_rows(c, vec![vec![Form::dz(c, 0).unwrap().mul_scalar(&zb2)]]).unwrap();
        let conn = ConnectionData::new(theta, Christoffel::zero(c)).unwrap();
        let expected = Form::dzb(c, 1).unwrap().wedge(&Form::dz(c, 0).unwrap());
        assert_eq!(curvature(&conn).unwrap().get(0, 0), &expected);
    }

    #[test]
    fn end_act_examples() {
        let c = chart(2);
        let one = FormMatrix::identity(c, 2);
        let s = ValuedForm::e_valued(vec![Form::scalar(PolySeries::z(c, 1).unwrap()), Form::one(c)]).unwrap();
        assert_eq!(end_act(&one, &s, None).unwrap(), s);

        let mut psi = FormMatrix::zero(c, 2);
        psi.set(0, 1, Form::dzb(c, 0).unwrap());
        let e1 = ValuedForm::e_valued(vec![Form::one(c), Form::zero(c)]).unwrap();
        let e2 = ValuedForm::e_valued(vec![Form::zero(c), Form::dzb(c, 0).unwrap()]).unwrap();
        assert_eq!(end_act(&psi, &e1, None).unwrap(), e2);

        let ee = e1.tensor(&e1).unwrap();
        let got = end_act(&psi, &ee, None).unwrap();
        let d = Form::dzb(c, 0).unwrap();
        let mut expected = ValuedForm::zero(c, 2, FiberWord(vec![Factor::E, Factor::E]));
        expected.add_component(Basis::from_slice(&[1, 0]), &d);
        expected.add_component(Basis::from_slice(&[0, 1]), &d);
        assert_eq!(got, expected);
    }

    #[test]
    fn missing_connection_reported() {
        let c = chart(1);
        let conn = ConnectionData { theta: None, gamma: None };
        let s = ValuedForm::e_valued(vec![Form::one(c)]).unwrap();
        assert!(matches!(nabla10(&conn, &s), Err(KernelError::MissingConnection { .. })));
    }
}
