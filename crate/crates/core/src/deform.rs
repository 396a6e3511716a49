//! Contraction with Beltrami differentials, brackets, Lie derivatives,
//! Maurer-Cartan residuals and the `ψ` constructors.

use std::fmt;

use crate::bundle::{curvature, nabla10, Christoffel, ConnectionData, EndoField, Factor, FiberOperator, FormMatrix, ValuedForm};
use crate::coeff::{Chart, GaussRational, PolySeries, SeriesMatrix};
use crate::error::{KernelError, Result};
use crate::forms::{Form, MultiIndex};

/// `Σ_i φ^i ⊗ d/dz^i` with each `φ^i` a `(0,k)`-form.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BeltramiField {
    chart: Chart,
    k: usize,
    comps: Vec<Form>,
}

impl BeltramiField {
    pub fn zero(chart: Chart, k: usize) -> Self {
        BeltramiField { chart, k, comps: vec![Form::zero(chart); chart.dim] }
    }

    /// From the coefficient forms `φ^1..φ^n`, each homogeneous `(0,k)`.
    pub fn from_components(chart: Chart, k: usize, comps: Vec<Form>) -> Result<Self> {
        if comps.len() != chart.dim {
            return Err(KernelError::RankMismatch(format!("{} components for n = {}", comps.len(), chart.dim)));
        }
        for c in &comps {
            chart.check(c.chart())?;
            if !c.is_homogeneous_of(0, k) {
                return Err(KernelError::NotHomogeneous { p: 0, q: k });
            }
        }
        Ok(BeltramiField { chart, k, comps })
    }

    /// From coefficients `φ^i_J` on `dzb^J ⊗ d/dz^i`.
    pub fn from_coeffs<I>(chart: Chart, k: usize, coeffs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, MultiIndex, PolySeries)>,
    {
        let mut out = Self::zero(chart, k);
        for (i, j, f) in coeffs {
            chart.check_axis(i)?;
            if j.len() != k || j.max_axis().is_some_and(|a| a >= chart.dim) {
                return Err(KernelError::NotHomogeneous { p: 0, q: k });
            }
            let term = Form::term(crate::forms::FormKey::new(j, MultiIndex::EMPTY), f);
            out.comps[i] = &out.comps[i] + &term;
        }
        Ok(out)
    }

    pub fn chart(&self) -> Chart {
        self.chart
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn component(&self, i: usize) -> &Form {
        &self.comps[i]
    }

    pub fn components(&self) -> &[Form] {
        &self.comps
    }

    pub fn is_zero(&self) -> bool {
        self.comps.iter().all(Form::is_zero)
    }

    fn map(&self, k: usize, f: impl Fn(&Form) -> Form) -> Self {
        BeltramiField { chart: self.chart, k, comps: self.comps.iter().map(f).collect() }
    }

    fn zip(&self, other: &Self, f: impl Fn(&Form, &Form) -> Form) -> Result<Self> {
        self.chart.check(other.chart)?;
        if self.k != other.k {
            return Err(KernelError::WrongBeltramiDegree { expected: self.k, found: other.k });
        }
        Ok(BeltramiField { chart: self.chart, k: self.k, comps: self.comps.iter().zip(&other.comps).map(|(a, b)| f(a, b)).collect() })
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        self.zip(other, |a, b| a + b)
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        self.zip(other, |a, b| a - b)
    }

    pub fn scale(&self, c: &GaussRational) -> Self {
        self.map(self.k, |f| f.scale(c))
    }

    /// Component-wise `∂̄`, raising `k` by one.
    pub fn dbar(&self) -> Self {
        self.map(self.k + 1, Form::dbar)
    }

    pub fn t_coeff(&self, m: usize) -> Self {
        self.map(self.k, |f| f.t_coeff(m))
    }

    pub fn shift_t(&self, m: usize) -> Self {
        self.map(self.k, |f| f.shift_t(m))
    }

    pub fn truncate_below(&self, m: usize) -> Self {
        self.map(self.k, |f| f.truncate_below(m))
    }

    pub fn t_degree(&self) -> Option<usize> {
        self.comps.iter().filter_map(Form::t_degree).max()
    }

    fn require_k(&self, k: usize) -> Result<()> {
        if self.k == k {
            Ok(())
        } else {
            Err(KernelError::WrongBeltramiDegree { expected: k, found: self.k })
        }
    }
}

impl fmt::Debug for BeltramiField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for BeltramiField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, c) in self.comps.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "[{c}] ⊗ d/dz{}", i + 1)?;
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

/// `i_φ α = Σ_i φ^i ∧ (d/dz^i ⌟ α)`.
pub fn contract_form(phi: &BeltramiField, a: &Form) -> Form {
    phi.chart.assert_same(a.chart());
    let mut out = Form::zero(phi.chart);
    for (i, c) in phi.comps.iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        let inner = a.interior_dz(i);
        if !inner.is_zero() {
            out = &out + &c.wedge(&inner);
        }
    }
    out
}

/// `i_φ` on the form part of a valued form.
pub fn contract(phi: &BeltramiField, s: &ValuedForm) -> ValuedForm {
    s.map_forms(|f| contract_form(phi, f))
}

/// `i_φ` applied to every entry.
pub fn contract_matrix(phi: &BeltramiField, m: &FormMatrix) -> FormMatrix {
    m.map(|f| contract_form(phi, f))
}

/// `e^{i_φ} = Σ_k i_φ^k / k!`, terminating after at most `n` steps.
pub fn exp_contract(phi: &BeltramiField, s: &ValuedForm) -> Result<ValuedForm> {
    phi.require_k(1)?;
    let mut acc = s.clone();
    let mut term = s.clone();
    for k in 1..=phi.chart.dim as i64 {
        let inv = GaussRational::from_frac(1, k);
        term = contract(phi, &term).map_forms(|f| f.scale(&inv));
        if term.is_zero() {
            break;
        }
        acc = &acc + &term;
    }
    Ok(acc)
}

/// `[φ,ψ]^k = φ^i ∧ ∂_i ψ^k + ψ^i ∧ ∂_i φ^k`.
pub fn bracket(phi: &BeltramiField, psi: &BeltramiField) -> Result<BeltramiField> {
    phi.require_k(1)?;
    psi.require_k(1)?;
    phi.chart.check(psi.chart)?;
    let n = phi.chart.dim;
    let mut out = BeltramiField::zero(phi.chart, 2);
    for k in 0..n {
        let mut acc = Form::zero(phi.chart);
        for i in 0..n {
            let (a, b) = (&phi.comps[i], &psi.comps[i]);
            if !a.is_zero() {
                acc = &acc + &a.wedge(&psi.comps[k].coeff_d_z(i));
            }
            if !b.is_zero() {
                acc = &acc + &b.wedge(&phi.comps[k].coeff_d_z(i));
            }
        }
        out.comps[k] = acc;
    }
    Ok(out)
}

/// `L^{1,0}_φ = i_φ ∂ - ∂ i_φ` on scalar forms.
pub fn lie10_scalar(phi: &BeltramiField, s: &Form) -> Form {
    &contract_form(phi, &s.partial()) - &contract_form(phi, s).partial()
}

/// `𝓛^{1,0}_φ = i_φ ∇^{1,0} - ∇^{1,0} i_φ`.
pub fn lie10_conn(conn: &ConnectionData, phi: &BeltramiField, s: &ValuedForm) -> Result<ValuedForm> {
    let a = contract(phi, &nabla10(conn, s)?);
    let b = nabla10(conn, &contract(phi, s))?;
    Ok(&a - &b)
}

/// `∇ = ∂̄ + ∇^{1,0}`.
pub fn nabla_full(conn: &ConnectionData, s: &ValuedForm) -> Result<ValuedForm> {
    Ok(&s.map_forms(Form::dbar) + &nabla10(conn, s)?)
}

/// `𝓛_φ = i_φ ∇ - ∇ i_φ` with the full connection.
pub fn lie_full(conn: &ConnectionData, phi: &BeltramiField, s: &ValuedForm) -> Result<ValuedForm> {
    let a = contract(phi, &nabla_full(conn, s)?);
    let b = nabla_full(conn, &contract(phi, s))?;
    Ok(&a - &b)
}

/// `∂̄φ - ½[φ,φ]`.
pub fn mc_residual(phi: &BeltramiField) -> Result<BeltramiField> {
    let half = GaussRational::from_frac(1, 2);
    phi.dbar().checked_sub(&bracket(phi, phi)?.scale(&half))
}

/// Fails with [`KernelError::OffShell`] unless the Maurer-Cartan residual is zero.
pub fn require_on_shell(phi: &BeltramiField) -> Result<()> {
    let r = mc_residual(phi)?;
    if r.is_zero() {
        Ok(())
    } else {
        Err(KernelError::OffShell { residual: r.to_string() })
    }
}

fn theta_of(conn: &ConnectionData) -> Result<&FormMatrix> {
    conn.theta.as_ref().ok_or_else(|| KernelError::MissingConnection { word: "E".into(), factor: "E".into() })
}

fn gamma_or_zero(gamma: Option<&Christoffel>, chart: Chart) -> Christoffel {
    gamma.cloned().unwrap_or_else(|| Christoffel::zero(chart))
}

/// `(∂̄ - 𝓛_φ)ψ - ψ∧ψ - i_φΘ`, with `𝓛_φ` acting through the connection
/// induced on `End(E)`. Vanishes for geometric data only when `∂θ = θ∧θ`;
/// otherwise a term quadratic in `φ` remains.
pub fn second_residual(conn: &ConnectionData, phi: &BeltramiField, psi: &EndoField) -> Result<FormMatrix> {
    phi.require_k(1)?;
    let theta = theta_of(conn)?;
    if theta.size() != psi.size() {
        return Err(KernelError::RankMismatch(format!("theta is {0}x{0}, psi is {1}x{1}", theta.size(), psi.size())));
    }
    let v = psi.to_end_valued();
    let lhs = &v.map_forms(Form::dbar) - &lie_full(conn, phi, &v)?;
    let lhs = FormMatrix::from_end_valued(&lhs)?;
    let i_theta = contract_matrix(phi, &curvature(conn)?);
    Ok(lhs.add(&psi.wedge(psi).neg()).add(&i_theta.neg()))
}

/// `ψ_Ω[k][l] = -∂_l φ^k - Γ^k_{jl} φ^j`, acting on the cotangent frame as
/// `dz^k -> Σ_l ψ_Ω[k][l] dz^l`.
pub fn psi_omega(phi: &BeltramiField, gamma: Option<&Christoffel>) -> Result<FormMatrix> {
    phi.require_k(1)?;
    let chart = phi.chart;
    let n = chart.dim;
    let gamma = gamma_or_zero(gamma, chart);
    chart.check(gamma.chart())?;
    let mut m = FormMatrix::zero(chart, n);
    for k in 0..n {
        for l in 0..n {
            let mut f = -phi.comps[k].coeff_d_z(l);
            for j in 0..n {
                let g = gamma.get(k, j, l);
                if !g.is_zero() {
                    f = &f - &phi.comps[j].mul_scalar(g);
                }
            }
            m.set(k, l, f);
        }
    }
    Ok(m)
}

/// Derivation operator on tangent-type factors, with `ψ_E` on `E` factors
/// when given.
pub fn psi_tensor(phi: &BeltramiField, gamma: Option<&Christoffel>, psi_e: Option<&EndoField>) -> Result<FiberOperator> {
    Ok(FiberOperator { cotangent: Some(psi_omega(phi, gamma)?), bundle: psi_e.cloned() })
}

/// `ψ_{Ω^p}` on the basis `dz^I`, `|I| = p`, in the order of
/// [`MultiIndex::all_of_size`].
pub fn psi_omega_p(phi: &BeltramiField, gamma: Option<&Christoffel>, p: usize) -> Result<FormMatrix> {
    let op = psi_tensor(phi, gamma, None)?;
    Ok(op.factor_form_matrix(Factor::OmegaP(p), phi.chart.dim, 1).expect("cotangent data present"))
}

/// `ψ_{K^{-1}}(1/<dz>) = (Σ_l ∂_l φ^l + Γ^l_{jl} φ^j) ⊗ 1/<dz>`; returns the coefficient.
pub fn psi_kinv(phi: &BeltramiField, gamma: Option<&Christoffel>) -> Result<Form> {
    Ok(-psi_omega(phi, gamma)?.trace())
}

/// `(∂̄ - L_φ) f = ∂̄f - i_φ ∂f` for a function `f`.
fn dbar_minus_lie(phi: &BeltramiField, f: &PolySeries) -> Form {
    let s = Form::scalar(f.clone());
    &s.dbar() - &contract_form(phi, &s.partial())
}

/// `ψ[k][l] = Σ_j (w^{-1})[l][j] (∂̄ - L_φ) w[j][k] + i_φ θ[k][l]`.
pub fn psi_from_transition(w: &SeriesMatrix, conn: &ConnectionData, phi: &BeltramiField) -> Result<EndoField> {
    phi.require_k(1)?;
    let theta = theta_of(conn)?;
    let r = w.size();
    if theta.size() != r {
        return Err(KernelError::RankMismatch(format!("w is {r}x{r}, theta is {0}x{0}", theta.size())));
    }
    phi.chart.check(w.chart())?;
    let winv = w.inverse_unipotent()?;
    let dw: Vec<Vec<Form>> = (0..r).map(|j| (0..r).map(|k| dbar_minus_lie(phi, w.get(j, k))).collect()).collect();
    let mut psi = FormMatrix::zero(phi.chart, r);
    for k in 0..r {
        for l in 0..r {
            let mut f = contract_form(phi, theta.get(k, l));
            for (j, row) in dw.iter().enumerate() {
                let c = winv.get(l, j);
                if !c.is_zero() && !row[k].is_zero() {
                    f = &f + &row[k].mul_scalar(c);
                }
            }
            psi.set(k, l, f);
        }
    }
    Ok(psi)
}

/// `φ^i = Σ_k (A^{-1})[i][k] ∂̄ z_t^k` with `A[k][i] = ∂ z_t^k / ∂ z^i`.
pub fn phi_from_trivialization(zt: &[PolySeries]) -> Result<BeltramiField> {
    let chart = zt.first().map(PolySeries::chart).ok_or(KernelError::UnsupportedDimension(0))?;
    let n = chart.dim;
    if zt.len() != n {
        return Err(KernelError::RankMismatch(format!("{} coordinate functions for n = {n}", zt.len())));
    }
    let mut jac = SeriesMatrix::zero(chart, n);
    for (k, f) in zt.iter().enumerate() {
        chart.check(f.chart())?;
        for i in 0..n {
            jac.set(k, i, f.d_z(i)?);
        }
    }
    let inv = jac.inverse_unipotent()?;
    let dbars: Vec<Form> = zt.iter().map(|f| Form::scalar(f.clone()).dbar()).collect();
    let comps = (0..n)
        .map(|i| {
            (0..n).fold(Form::zero(chart), |acc, k| {
                let c = inv.get(i, k);
                if c.is_zero() {
                    acc
                } else {
                    &acc + &dbars[k].mul_scalar(c)
                }
            })
        })
        .collect();
    BeltramiField::from_components(chart, 1, comps)
}

/// Outcome of [`integrability_check`]: the witness has word `E⊗E`, with
/// component `(k, l)` the `e_l` coefficient of `β^{k,(0,1)} - i_φ β^{k,(1,0)}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntegrabilityReport {
    pub holds: bool,
    pub witness: ValuedForm,
}

/// For `β^k = (∇ + ψ)(e_t^k)`, `e_t^k = Σ_l (w^{-1})[l][k] e_l`, checks
/// `β^{0,1} = i_φ β^{1,0}`.
pub fn integrability_check(
    w: &SeriesMatrix,
    conn: &ConnectionData,
    phi: &BeltramiField,
    psi: &EndoField,
) -> Result<IntegrabilityReport> {
    phi.require_k(1)?;
    let r = w.size();
    let chart = phi.chart;
    let winv = w.inverse_unipotent()?;
    let mut witness = ValuedForm::zero(chart, r, crate::bundle::FiberWord(vec![Factor::E, Factor::E]));
    for k in 0..r {
        let frame = ValuedForm::e_valued((0..r).map(|l| Form::scalar(winv.get(l, k).clone())).collect())?;
        let beta = &nabla_full(conn, &frame)? + &crate::bundle::end_act(psi, &frame, None)?;
        let res = &beta.component(0, 1) - &contract(phi, &beta.component(1, 0));
        let e_k = ValuedForm::single(r, crate::bundle::FiberWord::e(), &[k as u16], Form::one(chart))?;
        witness = &witness + &e_k.tensor(&res)?;
    }
    Ok(IntegrabilityReport { holds: witness.is_zero(), witness })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bundle::FiberWord;

    fn chart(n: usize, order: usize) -> Chart {
        Chart::new(n, order).unwrap()
    }

    fn z(c: Chart, i: usize) -> PolySeries {
        PolySeries::z(c, i).unwrap()
    }

    fn zb(c: Chart, i: usize) -> PolySeries {
        PolySeries::zb(c, i).unwrap()
    }

    fn dz(c: Chart, i: usize) -> Form {
        Form::dz(c, i).unwrap()
    }

    fn dzb(c: Chart, i: usize) -> Form {
        Form::dzb(c, i).unwrap()
    }

    fn field(c: Chart, comps: Vec<Form>) -> BeltramiField {
        BeltramiField::from_components(c, 1, comps).unwrap()
    }

    #[test]
    fn contract_basis() {
        let c = chart(2, 1);
        let phi = field(c, vec![Form::zero(c), dzb(c, 0)]);
        assert_eq!(contract_form(&phi, &dz(c, 1)), dzb(c, 0));
        assert!(contract_form(&phi, &dz(c, 0)).is_zero());
        let three = PolySeries::from_int(c, 3);
        let phi = field(c, vec![Form::zero(c), dzb(c, 0).mul_scalar(&three)]);
        let got = contract_form(&phi, &dz(c, 0).wedge(&dz(c, 1)));
        assert_eq!(got, dz(c, 0).wedge(&dzb(c, 0)).mul_scalar(&three));
        assert_eq!(got.coeff(crate::forms::FormKey::new(MultiIndex::single(0), MultiIndex::single(0))), PolySeries::from_int(c, -3));
        assert!(contract_form(&phi, &Form::scalar(z(c, 0))).is_zero());
    }

    #[test]
    fn exp_contract_examples() {
        let c = chart(2, 1);
        let s = ValuedForm::scalar(Form::volume(c));
        assert_eq!(exp_contract(&BeltramiField::zero(c, 1), &s).unwrap(), s);
        let two = PolySeries::from_int(c, 2);
        let phi = field(c, vec![Form::zero(c), dzb(c, 0).mul_scalar(&two)]);
        let expected = &Form::volume(c) + &dz(c, 0).wedge(&dzb(c, 0)).mul_scalar(&two);
        assert_eq!(exp_contract(&phi, &s).unwrap(), ValuedForm::scalar(expected));

        let c = chart(1, 2);
        let phi = field(c, vec![dzb(c, 0).mul_scalar(&z(c, 0))]);
        let s = ValuedForm::scalar(dzb(c, 0).wedge(&dz(c, 0)));
        assert_eq!(exp_contract(&phi, &s).unwrap(), s);
    }

    #[test]
    fn bracket_examples() {
        let c = chart(1, 2);
        let phi = field(c, vec![dzb(c, 0).mul_scalar(&(&z(c, 0) * &zb(c, 0)))]);
        assert!(bracket(&phi, &phi).unwrap().is_zero());

        let c = chart(2, 1);
        let phi = field(c, vec![dzb(c, 0).mul_scalar(&z(c, 1)), dzb(c, 1)]);
        let b = bracket(&phi, &phi).unwrap();
        let expected = dzb(c, 0).wedge(&dzb(c, 1)).scale_int(-2);
        assert_eq!(b.component(0), &expected);
        assert!(b.component(1).is_zero());
    }

    #[test]
    fn lie10_scalar_worked() {
        let c = chart(1, 1);
        let f = &z(c, 0) * &zb(c, 0);
        let g = &z(c, 0) * &z(c, 0);
        let phi = field(c, vec![dzb(c, 0).mul_scalar(&f)]);
        let s = dz(c, 0).mul_scalar(&g);
        let expected = dzb(c, 0).wedge(&dz(c, 0)).mul_scalar(&(&g * &f).d_z(0).unwrap());
        assert_eq!(lie10_scalar(&phi, &s), expected);
        let h = Form::scalar(g.clone());
        assert_eq!(lie10_scalar(&phi, &h), contract_form(&phi, &h.partial()));
    }

    #[test]
    fn lie10_conn_reduces() {
        let c = chart(2, 1);
        let phi = field(c, vec![dzb(c, 1).mul_scalar(&z(c, 0)), dzb(c, 0).mul_scalar(&zb(c, 1))]);
        let s = dz(c, 0).mul_scalar(&(&z(c, 1) * &zb(c, 0)));
        let conn = ConnectionData::flat(c, 1);
        assert_eq!(lie10_conn(&conn, &phi, &ValuedForm::scalar(s.clone())).unwrap(), ValuedForm::scalar(lie10_scalar(&phi, &s)));
    }

    #[test]
    fn mc_examples() {
        let c = chart(1, 2);
        let phi = field(c, vec![dzb(c, 0).mul_scalar(&(&z(c, 0) * &zb(c, 0)))]);
        assert!(mc_residual(&phi).unwrap().is_zero());

        let c = chart(2, 1);
        let phi = field(c, vec![dzb(c, 1).mul_scalar(&zb(c, 0)), Form::zero(c)]);
        let r = mc_residual(&phi).unwrap();
        assert_eq!(r.component(0), &dzb(c, 0).wedge(&dzb(c, 1)));
    }

    #[test]
    fn psi_examples() {
        let c = chart(1, 1);
        let f = &(&z(c, 0) * &z(c, 0)) * &zb(c, 0);
        let phi = field(c, vec![dzb(c, 0).mul_scalar(&f)]);
        let m = psi_omega(&phi, None).unwrap();
        assert_eq!(m.get(0, 0), &dzb(c, 0).mul_scalar(&(&z(c, 0) * &zb(c, 0)).scale_int(-2)));

        let phi = field(c, vec![dzb(c, 0).mul_scalar(&(&z(c, 0) * &zb(c, 0)))]);
        assert_eq!(psi_kinv(&phi, None).unwrap(), dzb(c, 0).mul_scalar(&zb(c, 0)));

        let zero = BeltramiField::zero(c, 1);
        assert!(psi_omega(&zero, None).unwrap().is_zero());
        assert!(psi_kinv(&zero, None).unwrap().is_zero());
    }

    #[test]
    fn psi_transition_examples() {
        let c = chart(1, 3);
        let conn = ConnectionData::flat(c, 1);
        let phi0 = BeltramiField::zero(c, 1);
        let id = SeriesMatrix::identity(c, 1);
        assert!(psi_from_transition(&id, &conn, &phi0).unwrap().is_zero());

        let tz = &PolySeries::t(c) * &zb(c, 0);
        let w = SeriesMatrix::from_rows(c, vec![vec![&PolySeries::one(c) + &tz]]).unwrap();
        let psi = psi_from_transition(&w, &conn, &phi0).unwrap();
        let back = psi.get(0, 0).mul_scalar(w.get(0, 0));
        assert_eq!(back, dzb(c, 0).mul_scalar(&PolySeries::t(c)));

        let theta = FormMatrix::from_rows(c, vec![vec![dz(c, 0).mul_scalar(&zb(c, 0))]]).unwrap();
        let conn = ConnectionData::new(theta.clone(), Christoffel::zero(c)).unwrap();
        let phi = field(c, vec![dzb(c, 0).mul_scalar(&PolySeries::t(c))]);
        let psi = psi_from_transition(&id, &conn, &phi).unwrap();
        assert_eq!(psi.get(0, 0), &contract_form(&phi, theta.get(0, 0)));
    }

    #[test]
    fn trivialization_examples() {
        let c = chart(1, 3);
        let t = PolySeries::t(c);
        assert!(phi_from_trivialization(&[z(c, 0)]).unwrap().is_zero());
        let phi = phi_from_trivialization(&[&z(c, 0) + &(&t * &zb(c, 0))]).unwrap();
        assert_eq!(phi.component(0), &dzb(c, 0).mul_scalar(&t));

        let phi = phi_from_trivialization(&[&z(c, 0) + &(&t * &(&z(c, 0) * &zb(c, 0)))]).unwrap();
        // (1 + t zb)^{-1} t z dzb
        let inv = &(&PolySeries::one(c) - &(&t * &zb(c, 0))) + &(&(&t * &t) * &(&zb(c, 0) * &zb(c, 0)));
        assert_eq!(phi.component(0), &dzb(c, 0).mul_scalar(&(&(&t * &z(c, 0)) * &inv)));

        let bad = [&z(c, 0) + &z(c, 0)];
        assert_eq!(phi_from_trivialization(&bad), Err(KernelError::NotUnipotent));
    }

    #[test]
    fn integrability_trivial_and_perturbed() {
        let c = chart(1, 2);
        let conn = ConnectionData::flat(c, 1);
        let phi = BeltramiField::zero(c, 1);
        let id = SeriesMatrix::identity(c, 1);
        let psi = FormMatrix::zero(c, 1);
        assert!(integrability_check(&id, &conn, &phi, &psi).unwrap().holds);
        let mut bad = psi.clone();
        bad.set(0, 0, dzb(c, 0));
        let rep = integrability_check(&id, &conn, &phi, &bad).unwrap();
        assert!(!rep.holds);
        assert_eq!(rep.witness.word(), &FiberWord(vec![Factor::E, Factor::E]));
    }

    #[test]
    fn second_residual_line_bundle() {
        let c = chart(1, 2);
        let theta = FormMatrix::from_rows(c, vec![vec![dz(c, 0).mul_scalar(&zb(c, 0))]]).unwrap();
        let conn = ConnectionData::new(theta, Christoffel::zero(c)).unwrap();
        let phi = field(c, vec![dzb(c, 0).mul_scalar(&PolySeries::t(c))]);
        assert!(second_residual(&conn, &phi, &FormMatrix::zero(c, 1)).unwrap().is_zero());
    }

    #[test]
    fn geometric_families_on_shell() {
        use crate::random::{self, Shape};
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for n in 1..=3 {
            for r in 1..=2 {
                let c = chart(n, 3);
                let shape = Shape::default();
                let zt = random::trivialization(&mut rng, c, shape);
                let phi = phi_from_trivialization(&zt).unwrap();
                assert!(mc_residual(&phi).unwrap().is_zero(), "n={n}");
                let w = random::transition(&mut rng, c, r, shape);
                let conn = random::connection(&mut rng, c, r, shape, true);
                let psi = psi_from_transition(&w, &conn, &phi).unwrap();
                let rep = integrability_check(&w, &conn, &phi, &psi).unwrap();
                assert!(rep.holds, "n={n} r={r}: {}", rep.witness);
                let res = second_residual(&conn, &phi, &psi).unwrap();
                assert!(res.is_zero(), "n={n} r={r}: {:?}", res.rows());
            }
        }
    }

    #[test]
    fn second_residual_needs_flat_theta() {
        // theta = z1 zb1 dz2 has d'theta = zb1 dz1^dz2; by hand the residual is
        // t^2 z1 zb1 dzb1^dzb2.
        let c = chart(2, 3);
        let zt = vec![&z(c, 0) + &(&PolySeries::t(c) * &zb(c, 1)), &z(c, 1) + &(&(&PolySeries::t(c) * &z(c, 0)) * &zb(c, 0))];
        let phi = phi_from_trivialization(&zt).unwrap();
        let theta = FormMatrix::from_rows(c, vec![vec![dz(c, 1).mul_scalar(&(&z(c, 0) * &zb(c, 0)))]]).unwrap();
        let conn = ConnectionData::new(theta, Christoffel::zero(c)).unwrap();
        let w = SeriesMatrix::identity(c, 1);
        let psi = psi_from_transition(&w, &conn, &phi).unwrap();
        assert!(integrability_check(&w, &conn, &phi, &psi).unwrap().holds);
        let t2 = &PolySeries::t_pow(c, 2) * &(&z(c, 0) * &zb(c, 0));
        let want = dzb(c, 0).wedge(&dzb(c, 1)).mul_scalar(&t2);
        assert_eq!(second_residual(&conn, &phi, &psi).unwrap().get(0, 0), &want);
    }
}
