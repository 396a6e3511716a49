//! The isomorphism `I^{p,q}`, the conjugated connection and residuals of
//! the chart identities between the deformed and undeformed complexes.

use crate::bundle::{curvature, end_act, nabla10, Basis, ConnectionData, EndoField, Factor, FiberOperator, FiberWord, FormMatrix, ValuedForm};
use crate::coeff::{Chart, GaussRational};
use crate::deform::{
    contract, contract_matrix, exp_contract, lie10_conn, lie10_scalar, lie_full, mc_residual, nabla_full, psi_tensor,
    require_on_shell, BeltramiField,
};
use crate::error::{KernelError, Result};
use crate::forms::{Form, FormKey, MultiIndex};

/// Data shared by the correspondence identities.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CorrespondenceContext {
    pub chart: Chart,
    pub r: usize,
    pub conn: ConnectionData,
    pub phi: BeltramiField,
    pub psi_e: Option<EndoField>,
}

impl CorrespondenceContext {
    pub fn new(conn: ConnectionData, phi: BeltramiField, psi_e: Option<EndoField>) -> Result<Self> {
        if phi.k() != 1 {
            return Err(KernelError::WrongBeltramiDegree { expected: 1, found: phi.k() });
        }
        let chart = phi.chart();
        let r = match (&conn.theta, &psi_e) {
            (Some(t), _) => t.size(),
            (None, Some(p)) => p.size(),
            (None, None) => 1,
        };
        for m in conn.theta.iter().chain(psi_e.iter()) {
            chart.check(m.chart())?;
            if m.size() != r {
                return Err(KernelError::RankMismatch(format!("matrices of size {} and {r}", m.size())));
            }
        }
        if let Some(g) = &conn.gamma {
            chart.check(g.chart())?;
        }
        Ok(CorrespondenceContext { chart, r, conn, phi, psi_e })
    }

    fn psi_e_or_zero(&self) -> EndoField {
        self.psi_e.clone().unwrap_or_else(|| FormMatrix::zero(self.chart, self.r))
    }
}

fn has_e(word: &FiberWord) -> Result<bool> {
    match word.factors() {
        [] => Ok(false),
        [Factor::E] => Ok(true),
        _ => Err(KernelError::RankMismatch(format!("expected a scalar or E-valued form, got {word}"))),
    }
}

fn target_word(p: usize, with_e: bool) -> FiberWord {
    let mut f = vec![Factor::OmegaP(p), Factor::Kinv];
    if with_e {
        f.push(Factor::E);
    }
    FiberWord(f)
}

/// `I^{p,q}`: `s dzb^J ∧ dz^I (⊗ e_k) -> s dzb^J ∧ <dz> ⊗ dz^I ⊗ 1/<dz> (⊗ e_k)`.
pub fn iso_i(s: &ValuedForm, p: usize, q: usize) -> Result<ValuedForm> {
    let with_e = has_e(s.word())?;
    if !s.is_homogeneous_of(p, q) {
        return Err(KernelError::NotHomogeneous { p, q });
    }
    let chart = s.chart();
    let full = MultiIndex::full(chart.dim);
    let mut comps = Vec::new();
    for (b, form) in s.components() {
        for (key, c) in form.terms() {
            let mut basis = Basis::from_slice(&[key.dz.mask(), 0]);
            basis.extend_from_slice(b);
            comps.push((basis, Form::term(FormKey::new(key.dzb, full), c.clone())));
        }
    }
    Ok(ValuedForm::with_word(chart, s.rank_e(), target_word(p, with_e), comps))
}

/// Inverse of [`iso_i`] on `(n,q)` forms valued in `Ω^p ⊗ K^{-1} (⊗ E)`.
pub fn iso_i_inv(v: &ValuedForm) -> Result<ValuedForm> {
    let chart = v.chart();
    let (p, with_e) = match v.word().factors() {
        [Factor::OmegaP(p), Factor::Kinv] => (*p, false),
        [Factor::OmegaP(p), Factor::Kinv, Factor::E] => (*p, true),
        _ => return Err(KernelError::RankMismatch(format!("{} is not Omega^p⊗K^-1(⊗E)", v.word()))),
    };
    let full = MultiIndex::full(chart.dim);
    let word = if with_e { FiberWord::e() } else { FiberWord::scalar() };
    let mut comps = Vec::new();
    for (b, form) in v.components() {
        let idx = MultiIndex::from_mask(b[0]);
        for (key, c) in form.terms() {
            if key.dz != full {
                return Err(KernelError::NotHomogeneous { p: chart.dim, q: key.dzb.len() });
            }
            comps.push((Basis::from_slice(&b[2..]), Form::term(FormKey::new(key.dzb, idx), c.clone())));
        }
    }
    debug_assert!(p <= chart.dim);
    Ok(ValuedForm::with_word(chart, v.rank_e(), word, comps))
}

fn neg_field(phi: &BeltramiField) -> BeltramiField {
    phi.scale(&GaussRational::from_int(-1))
}

/// `e^{-i_φ} ∇ e^{i_φ} s`.
pub fn conjugated_nabla(ctx: &CorrespondenceContext, s: &ValuedForm) -> Result<ValuedForm> {
    let up = exp_contract(&ctx.phi, s)?;
    exp_contract(&neg_field(&ctx.phi), &nabla_full(&ctx.conn, &up)?)
}

/// `e^{-i_φ}∇e^{i_φ}s - (∇ - 𝓛^{1,0}_φ + i_{∂̄φ - ½[φ,φ]})s`.
pub fn identity_lry(ctx: &CorrespondenceContext, s: &ValuedForm) -> Result<ValuedForm> {
    let lhs = conjugated_nabla(ctx, s)?;
    let defect = mc_residual(&ctx.phi)?;
    let rhs = &(&nabla_full(&ctx.conn, s)? - &lie10_conn(&ctx.conn, &ctx.phi, s)?) + &contract(&defect, s);
    Ok(&lhs - &rhs)
}

fn require_e_valued_nq(ctx: &CorrespondenceContext, sigma: &ValuedForm) -> Result<()> {
    if sigma.word() != &FiberWord::e() {
        return Err(KernelError::RankMismatch(format!("expected an E-valued form, got {}", sigma.word())));
    }
    let n = ctx.chart.dim;
    if sigma.bidegrees().iter().any(|(p, _)| *p != n) || sigma.bidegrees().iter().map(|b| b.1).collect::<std::collections::BTreeSet<_>>().len() > 1 {
        let q = sigma.bidegrees().first().map_or(0, |b| b.1);
        return Err(KernelError::NotHomogeneous { p: n, q });
    }
    Ok(())
}

/// `e^{-i_φ}(∇ + ψ_E)e^{i_φ}σ - (∂̄σ + ∇^{1,0} i_φ σ + ψ_E σ)` for `(n,q)`
/// forms `σ`. Zero when `φ` is on-shell; otherwise equal to `i_{∂̄φ-½[φ,φ]}σ`.
pub fn identity_pro2(ctx: &CorrespondenceContext, sigma: &ValuedForm) -> Result<ValuedForm> {
    require_e_valued_nq(ctx, sigma)?;
    let psi = ctx.psi_e_or_zero();
    let up = exp_contract(&ctx.phi, sigma)?;
    let inner = &nabla_full(&ctx.conn, &up)? + &end_act(&psi, &up, None)?;
    let lhs = exp_contract(&neg_field(&ctx.phi), &inner)?;
    let rhs = &(&sigma.map_forms(Form::dbar) + &nabla10(&ctx.conn, &contract(&ctx.phi, sigma))?) + &end_act(&psi, sigma, None)?;
    Ok(&lhs - &rhs)
}

/// Left side of the correspondence identity for scalar or `E`-valued `s`:
/// `∇^{1,0} i_φ I(s) + ψ I(s)`, with `ψ` acting on `Ω^p ⊗ K^{-1}`, and on
/// `E` through `ψ_E` when `with_psi_e`.
fn correspondence_lhs(ctx: &CorrespondenceContext, is: &ValuedForm, with_psi_e: bool) -> Result<ValuedForm> {
    let op = psi_tensor(&ctx.phi, ctx.conn.gamma.as_ref(), if with_psi_e { ctx.psi_e.as_ref() } else { None })?;
    let op = FiberOperator { bundle: op.bundle.or_else(|| Some(FormMatrix::zero(ctx.chart, ctx.r))), ..op };
    Ok(&nabla10(&ctx.conn, &contract(&ctx.phi, is))? + &op.act(is)?)
}

/// `(∇^{1,0} i_φ + ψ_{Ω^p⊗K^{-1}}) I^{p,q}(s) - I^{p,q+1}(-L^{1,0}_φ s)` for a
/// scalar `(p,q)` form `s`. Holds for every `φ` and `Γ`.
pub fn identity_thm1(ctx: &CorrespondenceContext, s: &Form, p: usize, q: usize) -> Result<ValuedForm> {
    let sv = ValuedForm::scalar(s.clone());
    let is = iso_i(&sv, p, q)?;
    let lhs = correspondence_lhs(ctx, &is, false)?;
    let rhs = iso_i(&ValuedForm::scalar(-lie10_scalar(&ctx.phi, s)), p, q + 1)?;
    Ok(&lhs - &rhs)
}

/// Bundle version: `(∇^{1,0} i_φ + ψ_{Ω^p⊗K^{-1}⊗E}) I(s) - I(-𝓛^{1,0}_φ s + ψ_E s)`.
pub fn identity_thm2(ctx: &CorrespondenceContext, s: &ValuedForm, p: usize, q: usize) -> Result<ValuedForm> {
    if s.word() != &FiberWord::e() {
        return Err(KernelError::RankMismatch(format!("expected an E-valued form, got {}", s.word())));
    }
    let is = iso_i(s, p, q)?;
    let lhs = correspondence_lhs(ctx, &is, true)?;
    let inner = &end_act(&ctx.psi_e_or_zero(), s, None)? - &lie10_conn(&ctx.conn, &ctx.phi, s)?;
    let rhs = iso_i(&inner, p, q + 1)?;
    Ok(&lhs - &rhs)
}

/// `(∂̄ + ∇^{1,0} i_φ + ψ_{Ω^p⊗K^{-1}}) I(s) - I((∂̄ - 𝓛^{1,0}_φ)s)` for
/// scalar or `E`-valued `s`.
pub fn identity_nabla01(ctx: &CorrespondenceContext, s: &ValuedForm, p: usize, q: usize) -> Result<ValuedForm> {
    has_e(s.word())?;
    let is = iso_i(s, p, q)?;
    let lhs = &is.map_forms(Form::dbar) + &correspondence_lhs(ctx, &is, false)?;
    let inner = &s.map_forms(Form::dbar) - &lie10_conn(&ctx.conn, &ctx.phi, s)?;
    Ok(&lhs - &iso_i(&inner, p, q + 1)?)
}

/// The same comparison without the `ψ_{Ω^p⊗K^{-1}}` term:
/// `(∂̄ + ∇^{1,0} i_φ) I(s) - I((∂̄ - 𝓛^{1,0}_φ)s)`. Differs from
/// [`identity_nabla01`] by exactly `-ψ_{Ω^p⊗K^{-1}} I(s)`.
pub fn nabla01_without_psi(ctx: &CorrespondenceContext, s: &ValuedForm, p: usize, q: usize) -> Result<ValuedForm> {
    has_e(s.word())?;
    let is = iso_i(s, p, q)?;
    let lhs = &is.map_forms(Form::dbar) + &nabla10(&ctx.conn, &contract(&ctx.phi, &is))?;
    let inner = &s.map_forms(Form::dbar) - &lie10_conn(&ctx.conn, &ctx.phi, s)?;
    Ok(&lhs - &iso_i(&inner, p, q + 1)?)
}

/// `ψ_{Ω^p⊗K^{-1}}` applied to `I(s)`.
pub fn psi_tangent_on_iso(ctx: &CorrespondenceContext, is: &ValuedForm) -> Result<ValuedForm> {
    let op = psi_tensor(&ctx.phi, ctx.conn.gamma.as_ref(), None)?;
    Ok(op.act_where_defined(is))
}

/// Fails with [`KernelError::NotFlat`] unless `∂θ = θ∧θ`.
pub fn require_flat(conn: &ConnectionData) -> Result<()> {
    match conn.curvature_20() {
        Some(c) if !c.is_zero() => Err(KernelError::NotFlat { residual: format!("{:?}", c.rows()) }),
        _ => Ok(()),
    }
}

/// `(∂̄ - 𝓛^{1,0}_φ)² s + i_φΘ · s` for scalar or `E`-valued `s`. Requires
/// on-shell `φ` and `∂θ = θ∧θ`.
pub fn identity_pro4(ctx: &CorrespondenceContext, s: &ValuedForm) -> Result<ValuedForm> {
    has_e(s.word())?;
    require_on_shell(&ctx.phi)?;
    require_flat(&ctx.conn)?;
    let d = |x: &ValuedForm| -> Result<ValuedForm> { Ok(&x.map_forms(Form::dbar) - &lie10_conn(&ctx.conn, &ctx.phi, x)?) };
    let twice = d(&d(s)?)?;
    if s.word().is_empty() {
        return Ok(twice);
    }
    let i_theta = contract_matrix(&ctx.phi, &curvature(&ctx.conn)?);
    Ok(&twice + &end_act(&i_theta, s, None)?)
}

/// `i_φ Θ`.
pub fn contracted_curvature(ctx: &CorrespondenceContext) -> Result<FormMatrix> {
    Ok(contract_matrix(&ctx.phi, &curvature(&ctx.conn)?))
}

/// Line bundle residual `(∂̄ - L_φ)ψ - i_φΘ` with `L_φ = i_φ d - d i_φ`.
/// Zero for geometric data when `∂θ = 0`.
pub fn coro1_residual(ctx: &CorrespondenceContext) -> Result<Form> {
    if ctx.r != 1 {
        return Err(KernelError::RankMismatch(format!("line bundle required, r = {}", ctx.r)));
    }
    let psi = ctx.psi_e_or_zero().get(0, 0).clone();
    let sv = ValuedForm::scalar(psi.clone());
    let lie = lie_full(&ConnectionData::flat(ctx.chart, 1), &ctx.phi, &sv)?.component_at(&[]);
    let theta = contracted_curvature(ctx)?.get(0, 0).clone();
    Ok(&(&psi.dbar() - &lie) - &theta)
}

/// `ψ_{Ω^p}(dz^I) - (∂ i_φ dz^I + i_φ ∇^{1,0} dz^I)` over all `|I| = p`, with
/// the scalar form `∂ i_φ dz^I` read as `Σ c dzb^j ⊗ dz^J`.
pub fn prop_omega_p_residual(ctx: &CorrespondenceContext, p: usize) -> Result<ValuedForm> {
    let chart = ctx.chart;
    let word = FiberWord(vec![Factor::OmegaP(p)]);
    let op = psi_tensor(&ctx.phi, ctx.conn.gamma.as_ref(), None)?;
    let mut out = ValuedForm::zero(chart, ctx.r, word.clone());
    for idx in MultiIndex::all_of_size(chart.dim, p) {
        let e = ValuedForm::single(ctx.r, word.clone(), &[idx.mask()], Form::one(chart))?;
        let lhs = op.act(&e)?;
        let scalar = contract_form_scalar(&ctx.phi, &Form::basis(chart, FormKey::new(MultiIndex::EMPTY, idx))).partial();
        let mut split = ValuedForm::zero(chart, ctx.r, word.clone());
        for (key, c) in scalar.terms() {
            let one = FormKey::new(key.dzb, MultiIndex::EMPTY);
            let piece = ValuedForm::single(ctx.r, word.clone(), &[key.dz.mask()], Form::term(one, c.clone()))?;
            split = &split + &piece;
        }
        let rhs = &split + &contract(&ctx.phi, &nabla10(&ctx.conn, &e)?);
        out = &out + &(&lhs - &rhs);
    }
    Ok(out)
}

/// `ψ_{K^{-1}}(1/<dz>) - (∂_l φ^l ⊗ 1/<dz> + i_φ ∇^{1,0}(1/<dz>))`.
pub fn prop_kinv_residual(ctx: &CorrespondenceContext) -> Result<ValuedForm> {
    let chart = ctx.chart;
    let word = FiberWord(vec![Factor::Kinv]);
    let e = ValuedForm::single(ctx.r, word.clone(), &[0], Form::one(chart))?;
    let lhs = psi_tensor(&ctx.phi, ctx.conn.gamma.as_ref(), None)?.act(&e)?;
    let div = (0..chart.dim).fold(Form::zero(chart), |acc, l| &acc + &ctx.phi.component(l).coeff_d_z(l));
    let rhs = &e.wedge_left(&div) + &contract(&ctx.phi, &nabla10(&ctx.conn, &e)?);
    Ok(&lhs - &rhs)
}

fn contract_form_scalar(phi: &BeltramiField, f: &Form) -> Form {
    crate::deform::contract_form(phi, f)
}
