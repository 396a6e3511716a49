//! Seeded generators for polynomials, forms, connections and geometric
//! deformation data.

use rand::Rng;

use crate::bundle::{Christoffel, ConnectionData, FormMatrix};
use crate::coeff::{Chart, GaussRational, PolySeries, SeriesMatrix};
use crate::deform::BeltramiField;
use crate::forms::{Form, FormKey, MultiIndex};

/// Size knobs for random data.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Shape {
    /// Maximum total degree in `z, zb` of a monomial.
    pub degree: u32,
    /// Number of monomials drawn per coefficient (before cancellation).
    pub terms: usize,
}

impl Default for Shape {
    fn default() -> Self {
        Shape { degree: 2, terms: 2 }
    }
}

fn coefficient<R: Rng>(rng: &mut R) -> GaussRational {
    let mut re = rng.gen_range(-3i64..=3);
    if re == 0 {
        re = 1;
    }
    match rng.gen_range(0..6) {
        0 => GaussRational::from_frac(re, rng.gen_range(2..=3)),
        1 => &GaussRational::from_int(re) * &GaussRational::i(),
        2 => &GaussRational::from_int(re) + &GaussRational::i(),
        _ => GaussRational::from_int(re),
    }
}

fn monomial<R: Rng>(rng: &mut R, chart: Chart, degree: u32, t_min: usize, t_max: usize) -> PolySeries {
    let mut m = PolySeries::t_pow(chart, rng.gen_range(t_min..=t_max));
    let total = rng.gen_range(0..=degree);
    for _ in 0..total {
        let axis = rng.gen_range(0..chart.dim);
        let v = if rng.gen_bool(0.5) { PolySeries::z(chart, axis) } else { PolySeries::zb(chart, axis) };
        m = &m * &v.expect("axis in range");
    }
    m
}

/// Random polynomial with `t`-degrees in `t_min..=t_max` (clamped to `N`).
pub fn poly_in<R: Rng>(rng: &mut R, chart: Chart, shape: Shape, t_min: usize, t_max: usize) -> PolySeries {
    let t_max = t_max.min(chart.order);
    if t_min > t_max {
        return PolySeries::zero(chart);
    }
    let mut out = PolySeries::zero(chart);
    for _ in 0..shape.terms {
        out = &out + &monomial(rng, chart, shape.degree, t_min, t_max).scale(&coefficient(rng));
    }
    out
}

/// Random polynomial in `z, zb, t` through order `N`.
pub fn poly<R: Rng>(rng: &mut R, chart: Chart, shape: Shape) -> PolySeries {
    poly_in(rng, chart, shape, 0, chart.order)
}

/// Random polynomial without `t`.
pub fn poly_t0<R: Rng>(rng: &mut R, chart: Chart, shape: Shape) -> PolySeries {
    poly_in(rng, chart, shape, 0, 0)
}

/// Random multi-index of size `p` in `0..n`.
pub fn multi_index<R: Rng>(rng: &mut R, n: usize, p: usize) -> MultiIndex {
    let all = MultiIndex::all_of_size(n, p);
    all[rng.gen_range(0..all.len())]
}

/// Random homogeneous `(p, q)`-form; `p, q ≤ n` required.
pub fn form<R: Rng>(rng: &mut R, chart: Chart, p: usize, q: usize, shape: Shape) -> Form {
    let mut out = Form::zero(chart);
    let count = rng.gen_range(1..=2);
    for _ in 0..count {
        let key = FormKey::new(multi_index(rng, chart.dim, q), multi_index(rng, chart.dim, p));
        out = &out + &Form::term(key, poly(rng, chart, shape));
    }
    out
}

/// Random form with `t`-free coefficients.
pub fn form_t0<R: Rng>(rng: &mut R, chart: Chart, p: usize, q: usize, shape: Shape) -> Form {
    form(rng, chart, p, q, shape).t_coeff(0)
}

/// Random `∂̄`-closed `(p, q)`-form without `t`: holomorphic coefficients when
/// `q = 0`, otherwise `∂̄` of a random `(p, q-1)`-form.
pub fn closed_form<R: Rng>(rng: &mut R, chart: Chart, p: usize, q: usize, shape: Shape) -> Form {
    if q == 0 {
        form_t0(rng, chart, p, 0, shape).map_coeffs(|f| {
            PolySeries::from_terms(chart, f.terms().filter(|(m, _)| m.zb_degree() == 0).map(|(m, c)| (*m, c.clone())))
        })
    } else {
        let mut bigger = Shape { degree: shape.degree + 1, ..shape };
        loop {
            let f = form_t0(rng, chart, p, q - 1, bigger).dbar();
            if !f.is_zero() {
                return f;
            }
            bigger.terms += 1;
        }
    }
}

/// Random form mixing every bidegree.
pub fn mixed_form<R: Rng>(rng: &mut R, chart: Chart, shape: Shape) -> Form {
    let mut out = Form::zero(chart);
    for _ in 0..3 {
        let p = rng.gen_range(0..=chart.dim);
        let q = rng.gen_range(0..=chart.dim);
        out = &out + &form(rng, chart, p, q, shape);
    }
    out
}

/// Random `t`-dependent Beltrami field of degree `k`, vanishing at `t = 0`.
/// Generally violates Maurer-Cartan.
pub fn beltrami<R: Rng>(rng: &mut R, chart: Chart, k: usize, shape: Shape) -> BeltramiField {
    let comps = (0..chart.dim)
        .map(|_| {
            let mut f = Form::zero(chart);
            for _ in 0..rng.gen_range(1..=2) {
                let key = FormKey::new(multi_index(rng, chart.dim, k), MultiIndex::EMPTY);
                f = &f + &Form::term(key, poly_in(rng, chart, shape, 1, chart.order));
            }
            f
        })
        .collect();
    BeltramiField::from_components(chart, k, comps).expect("homogeneous by construction")
}

/// `z_t^k = z^k + O(t)` with random polynomial corrections.
pub fn trivialization<R: Rng>(rng: &mut R, chart: Chart, shape: Shape) -> Vec<PolySeries> {
    (0..chart.dim)
        .map(|k| &PolySeries::z(chart, k).expect("axis") + &poly_in(rng, chart, shape, 1, chart.order))
        .collect()
}

/// `w = 1 + O(t)`, an `r x r` transition matrix.
pub fn transition<R: Rng>(rng: &mut R, chart: Chart, r: usize, shape: Shape) -> SeriesMatrix {
    let mut w = SeriesMatrix::identity(chart, r);
    for i in 0..r {
        for j in 0..r {
            let e = w.get(i, j) + &poly_in(rng, chart, shape, 1, chart.order);
            w.set(i, j, e);
        }
    }
    w
}

/// Random Christoffel symbols without `t`.
pub fn christoffel<R: Rng>(rng: &mut R, chart: Chart, shape: Shape) -> Christoffel {
    let n = chart.dim;
    let mut g = Christoffel::zero(chart);
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if rng.gen_bool(0.5) {
                    g.set(k, i, j, poly_t0(rng, chart, shape));
                }
            }
        }
    }
    g
}

/// Random `(1,0)` connection matrix without `t`; generally not flat.
pub fn theta<R: Rng>(rng: &mut R, chart: Chart, r: usize, shape: Shape) -> FormMatrix {
    let mut m = FormMatrix::zero(chart, r);
    for k in 0..r {
        for l in 0..r {
            m.set(k, l, form_t0(rng, chart, 1, 0, shape));
        }
    }
    m
}

/// A connection matrix with `∂θ = θ∧θ`: `θ = ∂u · 1 + (∂g) g^{-1}` for a
/// product `g` of unipotent triangular polynomial matrices.
pub fn flat_theta<R: Rng>(rng: &mut R, chart: Chart, r: usize, shape: Shape) -> FormMatrix {
    let small = Shape { degree: shape.degree.min(2), terms: 1 };
    let mut upper = SeriesMatrix::identity(chart, r);
    let mut lower = SeriesMatrix::identity(chart, r);
    for i in 0..r {
        for j in 0..r {
            if i < j {
                upper.set(i, j, poly_t0(rng, chart, small));
            } else if i > j {
                lower.set(i, j, poly_t0(rng, chart, small));
            }
        }
    }
    let g = upper.mul(&lower);
    let inv = invert_triangular(&lower).mul(&invert_triangular(&upper));
    let du = Form::scalar(poly_t0(rng, chart, shape)).partial();
    let mut out = FormMatrix::zero(chart, r);
    for k in 0..r {
        for l in 0..r {
            let mut f = if k == l { du.clone() } else { Form::zero(chart) };
            for m in 0..r {
                let dg = Form::scalar(g.get(k, m).clone()).partial();
                f = &f + &dg.mul_scalar(inv.get(m, l));
            }
            out.set(k, l, f);
        }
    }
    out
}

/// Inverse of a unipotent triangular matrix by the finite Neumann series.
fn invert_triangular(m: &SeriesMatrix) -> SeriesMatrix {
    let r = m.size();
    let id = SeriesMatrix::identity(m.chart(), r);
    let nil = m.sub(&id);
    let mut acc = id.clone();
    let mut power = id;
    for k in 1..r {
        power = power.mul(&nil);
        acc = if k % 2 == 1 { acc.sub(&power) } else { acc.add(&power) };
    }
    acc
}

/// Random connection data; flat `θ` when requested.
pub fn connection<R: Rng>(rng: &mut R, chart: Chart, r: usize, shape: Shape, flat: bool) -> ConnectionData {
    let theta = if flat { flat_theta(rng, chart, r, shape) } else { theta(rng, chart, r, shape) };
    ConnectionData::new(theta, christoffel(rng, chart, shape)).expect("valid by construction")
}

/// Random `(0,1)` endomorphism field vanishing at `t = 0`.
pub fn endo_field<R: Rng>(rng: &mut R, chart: Chart, r: usize, shape: Shape) -> FormMatrix {
    let mut m = FormMatrix::zero(chart, r);
    for k in 0..r {
        for l in 0..r {
            let key = FormKey::new(multi_index(rng, chart.dim, 1), MultiIndex::EMPTY);
            m.set(k, l, Form::term(key, poly_in(rng, chart, shape, 1, chart.order)));
        }
    }
    m
}
