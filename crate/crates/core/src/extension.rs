//! Order-by-order extension of `∂̄`-closed forms along a deformation, using
//! the radial `∂̄`-homotopy in the `zb` variables.

use crate::bundle::{end_act, nabla10, ConnectionData, EndoField, FiberWord, ValuedForm};
use crate::coeff::{Chart, GaussRational, Monomial, PolySeries, Var};
use crate::deform::{contract, lie10_conn, require_on_shell, BeltramiField};
use crate::error::{KernelError, Result};
use crate::forms::Form;

/// `h = (ι_E / (|b| + q))` on `z^a zb^b dzb^J ∧ dz^I`, with
/// `E = Σ zb^j d/dzb^j`. Requires antiholomorphic degree `q ≥ 1` on every term.
pub fn homotopy_h(w: &Form) -> Result<Form> {
    let chart = w.chart();
    let mut out = Form::zero(chart);
    for (key, coeff) in w.terms() {
        let q = key.dzb.len();
        if q == 0 {
            return Err(KernelError::ZeroAntiholomorphicDegree);
        }
        for j in key.dzb.entries() {
            let (sign, nk) = key.interior_dzb(j).expect("j in J");
            let zbj = Monomial::var(Var::Zb(j), 1);
            let terms: Vec<(Monomial, GaussRational)> = coeff
                .terms()
                .map(|(m, c)| {
                    let weight = (m.zb_degree() as usize + q) as i64;
                    let m2 = m.checked_mul(zbj).expect("exponent in range");
                    (m2, &GaussRational::from_frac(sign, weight) * c)
                })
                .collect();
            out = &out + &Form::term(nk, PolySeries::from_terms(chart, terms));
        }
    }
    Ok(out)
}

/// A solution `u` of `∂̄u = beta` for `∂̄`-closed `beta` of positive
/// antiholomorphic degree.
pub fn dbar_solve(beta: &Form) -> Result<Form> {
    if beta.is_zero() {
        return Ok(beta.clone());
    }
    let d = beta.dbar();
    if !d.is_zero() {
        return Err(KernelError::NotClosed { witness: d.to_string() });
    }
    homotopy_h(beta)
}

/// [`dbar_solve`] component by component.
pub fn dbar_solve_valued(beta: &ValuedForm) -> Result<ValuedForm> {
    let mut err = None;
    let out = beta.map_forms(|f| match dbar_solve(f) {
        Ok(u) => u,
        Err(e) => {
            err.get_or_insert(e);
            Form::zero(f.chart())
        }
    });
    err.map_or(Ok(out), Err)
}

/// `φ(t) = Σ_{k≥1} t^k φ_k` and optionally `ψ(t) = Σ_{k≥1} t^k ψ_k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DeformationFamily {
    phi_orders: Vec<BeltramiField>,
    psi_orders: Option<Vec<EndoField>>,
    phi: BeltramiField,
    psi: Option<EndoField>,
}

impl DeformationFamily {
    /// From `t`-dependent series; both must vanish at `t = 0`.
    pub fn from_series(phi: BeltramiField, psi: Option<EndoField>) -> Result<Self> {
        if phi.k() != 1 {
            return Err(KernelError::WrongBeltramiDegree { expected: 1, found: phi.k() });
        }
        let order = phi.chart().order;
        if !phi.t_coeff(0).is_zero() || psi.as_ref().is_some_and(|p| !p.map(|f| f.t_coeff(0)).is_zero()) {
            return Err(KernelError::FamilyNotCentered);
        }
        let phi_orders = (1..=order).map(|k| phi.t_coeff(k)).collect();
        let psi_orders = psi.as_ref().map(|p| (1..=order).map(|k| p.map(|f| f.t_coeff(k))).collect());
        Ok(DeformationFamily { phi_orders, psi_orders, phi, psi })
    }

    /// From the `t`-free coefficients `φ_1, φ_2, ...`.
    pub fn from_orders(phi_orders: Vec<BeltramiField>, psi_orders: Option<Vec<EndoField>>) -> Result<Self> {
        let first = phi_orders.first().ok_or(KernelError::FamilyNotCentered)?;
        let chart = first.chart();
        let mut phi = BeltramiField::zero(chart, 1);
        for (k, f) in phi_orders.iter().enumerate() {
            phi = phi.checked_add(&f.shift_t(k + 1))?;
        }
        let psi = match &psi_orders {
            Some(list) if !list.is_empty() => {
                let mut acc = EndoField::zero(chart, list[0].size());
                for (k, m) in list.iter().enumerate() {
                    acc = acc.add(&m.map(|f| f.shift_t(k + 1)));
                }
                Some(acc)
            }
            _ => None,
        };
        Self::from_series(phi, psi)
    }

    pub fn chart(&self) -> Chart {
        self.phi.chart()
    }

    pub fn phi(&self) -> &BeltramiField {
        &self.phi
    }

    pub fn psi(&self) -> Option<&EndoField> {
        self.psi.as_ref()
    }

    pub fn phi_orders(&self) -> &[BeltramiField] {
        &self.phi_orders
    }

    pub fn psi_orders(&self) -> Option<&[EndoField]> {
        self.psi_orders.as_deref()
    }
}

/// One order of an extension: `∂̄σ_m = rhs_m`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrderStep {
    pub order: usize,
    pub rhs: ValuedForm,
    pub solution: ValuedForm,
}

/// Result of an extension: `σ(t)`, the per-order steps and the residual of
/// the full equation through the requested order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExtensionReport {
    pub sigma: ValuedForm,
    pub steps: Vec<OrderStep>,
    pub residual: ValuedForm,
}

impl ExtensionReport {
    pub fn residual_is_zero(&self) -> bool {
        self.residual.is_zero()
    }
}

fn truncate(s: &ValuedForm, order: usize) -> ValuedForm {
    s.map_forms(|f| f.truncate_below(order + 1))
}

/// Solves `∂̄σ = P(σ)` order by order, where `P` has no `t^0` part.
fn iterate(sigma0: &ValuedForm, order: usize, rhs_op: impl Fn(&ValuedForm) -> Result<ValuedForm>) -> Result<ExtensionReport> {
    let chart = sigma0.chart();
    if sigma0.components().any(|(_, f)| f.t_degree().is_some_and(|d| d > 0)) {
        return Err(KernelError::SeedDependsOnT);
    }
    let d0 = sigma0.map_forms(Form::dbar);
    if !d0.is_zero() {
        return Err(KernelError::NotClosed { witness: d0.to_string() });
    }
    let order = order.min(chart.order);
    let mut sigma = sigma0.clone();
    let mut steps = Vec::with_capacity(order);
    for m in 1..=order {
        let rhs = rhs_op(&sigma)?.t_coeff(m);
        let d = rhs.map_forms(Form::dbar);
        if !d.is_zero() {
            return Err(KernelError::Obstructed { order: m, witness: d.to_string() });
        }
        let solution = dbar_solve_valued(&rhs)?;
        sigma = &sigma + &solution.shift_t(m);
        steps.push(OrderStep { order: m, rhs, solution });
    }
    let residual = truncate(&(&sigma.map_forms(Form::dbar) - &rhs_op(&sigma)?), order);
    Ok(ExtensionReport { sigma, steps, residual })
}

/// `(∂̄ - L^{1,0}_{φ(t)})σ(t) = 0` for scalar `σ₀`.
pub fn extend_scalar(family: &DeformationFamily, sigma0: &Form, order: usize) -> Result<ExtensionReport> {
    require_on_shell(family.phi())?;
    let conn = ConnectionData::flat(family.chart(), 1);
    let phi = family.phi().clone();
    iterate(&ValuedForm::scalar(sigma0.clone()), order, |s| lie10_conn(&conn, &phi, s))
}

/// `(∂̄ - 𝓛^{1,0}_{φ(t)} + ψ_{E_t})σ(t) = 0` for `E`-valued `σ₀`.
pub fn extend_bundle(family: &DeformationFamily, conn: &ConnectionData, sigma0: &ValuedForm, order: usize) -> Result<ExtensionReport> {
    require_on_shell(family.phi())?;
    if sigma0.word() != &FiberWord::e() {
        return Err(KernelError::RankMismatch(format!("expected an E-valued form, got {}", sigma0.word())));
    }
    let phi = family.phi().clone();
    let psi = family.psi().cloned();
    iterate(sigma0, order, |s| {
        let lie = lie10_conn(conn, &phi, s)?;
        match &psi {
            Some(p) => Ok(&lie - &end_act(p, s, None)?),
            None => Ok(lie),
        }
    })
}

/// `∂̄σ(t) + ∂ i_{φ(t)} σ(t) = 0` for an `(n,q)` form `σ₀`.
pub fn extend_nq(family: &DeformationFamily, sigma0: &Form, order: usize) -> Result<ExtensionReport> {
    require_on_shell(family.phi())?;
    let n = family.chart().dim;
    if sigma0.bidegrees().iter().any(|(p, _)| *p != n) {
        return Err(KernelError::NotHomogeneous { p: n, q: sigma0.bidegrees().first().map_or(0, |b| b.1) });
    }
    let phi = family.phi().clone();
    let conn = ConnectionData::flat(family.chart(), 1);
    iterate(&ValuedForm::scalar(sigma0.clone()), order, |s| Ok(-&nabla10(&conn, &contract(&phi, s))?))
}
