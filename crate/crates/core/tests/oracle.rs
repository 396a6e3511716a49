//! Brute-force reference for the exterior calculus: forms as lists of
//! unsorted generator words, normalized by counting transpositions.

use beltrami::coeff::{Chart, PolySeries};
use beltrami::deform::{contract_form, BeltramiField};
use beltrami::forms::{Form, FormKey, MultiIndex};
use beltrami::random::{self, Shape};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Gen {
    // dzb sorts before dz, matching the kernel's normal form.
    Dzb(usize),
    Dz(usize),
}

type Word = Vec<Gen>;

#[derive(Clone, Debug)]
struct Naive {
    chart: Chart,
    terms: Vec<(Word, PolySeries)>,
}

fn from_form(f: &Form) -> Naive {
    let terms = f
        .terms()
        .map(|(k, c)| {
            let mut w: Word = k.dzb.entries().map(Gen::Dzb).collect();
            w.extend(k.dz.entries().map(Gen::Dz));
            (w, c.clone())
        })
        .collect();
    Naive { chart: f.chart(), terms }
}

/// Bubble sort, flipping the sign per swap; repeated generators give zero.
fn normalize(word: &Word) -> Option<(i64, Word)> {
    let mut w = word.clone();
    let mut sign = 1;
    for i in 0..w.len() {
        for j in 0..w.len() - 1 - i {
            if w[j] > w[j + 1] {
                w.swap(j, j + 1);
                sign = -sign;
            }
        }
    }
    if w.windows(2).any(|p| p[0] == p[1]) {
        return None;
    }
    Some((sign, w))
}

fn to_form(n: &Naive) -> Form {
    let mut out = Form::zero(n.chart);
    for (w, c) in &n.terms {
        if let Some((sign, w)) = normalize(w) {
            let mut dzb = MultiIndex::EMPTY;
            let mut dz = MultiIndex::EMPTY;
            for g in w {
                match g {
                    Gen::Dzb(j) => dzb = dzb.with(j),
                    Gen::Dz(i) => dz = dz.with(i),
                }
            }
            out = &out + &Form::term(FormKey::new(dzb, dz), c.scale_int(sign));
        }
    }
    out
}

fn wedge(a: &Naive, b: &Naive) -> Naive {
    let mut terms = Vec::new();
    for (wa, ca) in &a.terms {
        for (wb, cb) in &b.terms {
            let mut w = wa.clone();
            w.extend(wb);
            terms.push((w, ca * cb));
        }
    }
    Naive { chart: a.chart, terms }
}

/// Rebuilds a monomial from its exponents.
fn monomial(chart: Chart, t: u32, z: &[u32], zb: &[u32]) -> PolySeries {
    let mut m = PolySeries::t_pow(chart, t as usize);
    for i in 0..chart.dim {
        m = &m * &PolySeries::z(chart, i).unwrap().pow(z[i]);
        m = &m * &PolySeries::zb(chart, i).unwrap().pow(zb[i]);
    }
    m
}

/// Power-rule derivative in `z^i` (or `zb^i`).
fn derivative(p: &PolySeries, i: usize, bar: bool) -> PolySeries {
    let chart = p.chart();
    let mut out = PolySeries::zero(chart);
    for (m, c) in p.terms() {
        let mut z: Vec<u32> = (0..chart.dim).map(|k| m.z_exp(k)).collect();
        let mut zb: Vec<u32> = (0..chart.dim).map(|k| m.zb_exp(k)).collect();
        let e = if bar { &mut zb[i] } else { &mut z[i] };
        if *e == 0 {
            continue;
        }
        let k = *e as i64;
        *e -= 1;
        out = &out + &monomial(chart, m.t_degree(), &z, &zb).scale(&c.scale_int(k));
    }
    out
}

/// `d'` or `d''`: the new generator goes on the left.
fn differential(a: &Naive, bar: bool) -> Naive {
    let mut terms = Vec::new();
    for (w, c) in &a.terms {
        for i in 0..a.chart.dim {
            let mut nw = vec![if bar { Gen::Dzb(i) } else { Gen::Dz(i) }];
            nw.extend(w);
            terms.push((nw, derivative(c, i, bar)));
        }
    }
    Naive { chart: a.chart, terms }
}

/// `Σ_i φ^i ∧ (d/dz^i ⌟ α)`; the interior product picks up `(-1)^position`.
fn contract(phi: &[Naive], a: &Naive) -> Naive {
    let mut terms = Vec::new();
    for (w, c) in &a.terms {
        for (pos, g) in w.iter().enumerate() {
            let Gen::Dz(i) = *g else { continue };
            let mut rest = w.clone();
            rest.remove(pos);
            let sign = if pos % 2 == 0 { 1 } else { -1 };
            for (pw, pc) in &phi[i].terms {
                let mut nw = pw.clone();
                nw.extend(&rest);
                terms.push((nw, (pc * c).scale_int(sign)));
            }
        }
    }
    Naive { chart: a.chart, terms }
}

fn sample(rng: &mut ChaCha8Rng) -> (Chart, Form, Form) {
    let n = rng.gen_range(1..=3);
    let chart = Chart::new(n, 2).unwrap();
    let shape = Shape { degree: 3, terms: 3 };
    let a = random::mixed_form(rng, chart, shape);
    let b = random::mixed_form(rng, chart, shape);
    (chart, a, b)
}

#[test]
fn wedge_matches_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    for _ in 0..300 {
        let (_, a, b) = sample(&mut rng);
        assert_eq!(a.wedge(&b), to_form(&wedge(&from_form(&a), &from_form(&b))));
    }
}

#[test]
fn differentials_match_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(102);
    for _ in 0..300 {
        let (_, a, _) = sample(&mut rng);
        assert_eq!(a.partial(), to_form(&differential(&from_form(&a), false)));
        assert_eq!(a.dbar(), to_form(&differential(&from_form(&a), true)));
    }
}

#[test]
fn contraction_matches_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(103);
    for _ in 0..300 {
        let (chart, a, _) = sample(&mut rng);
        let phi = random::beltrami(&mut rng, chart, 1, Shape::default());
        let naive: Vec<Naive> = phi.components().iter().map(from_form).collect();
        assert_eq!(contract_form(&phi, &a), to_form(&contract(&naive, &from_form(&a))));
    }
}

#[test]
fn degree_two_contraction_matches_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(104);
    for _ in 0..100 {
        let chart = Chart::new(3, 1).unwrap();
        let a = random::mixed_form(&mut rng, chart, Shape::default());
        let phi = random::beltrami(&mut rng, chart, 2, Shape::default());
        let naive: Vec<Naive> = phi.components().iter().map(from_form).collect();
        assert_eq!(contract_form(&phi, &a), to_form(&contract(&naive, &from_form(&a))));
    }
}

#[test]
fn single_term_dbar_of_beltrami() {
    // phi = zb1 dzb2 ⊗ d/dz1 on n = 2: dbar phi = dzb1 ^ dzb2 ⊗ d/dz1.
    let c = Chart::new(2, 1).unwrap();
    let term = Form::dzb(c, 1).unwrap().mul_scalar(&PolySeries::zb(c, 0).unwrap());
    let phi = BeltramiField::from_components(c, 1, vec![term.clone(), Form::zero(c)]).unwrap();
    let want = to_form(&differential(&from_form(&term), true));
    assert_eq!(phi.dbar().component(0), &want);
    let basis = Form::dzb(c, 0).unwrap().wedge(&Form::dzb(c, 1).unwrap());
    assert_eq!(want, basis);
}
