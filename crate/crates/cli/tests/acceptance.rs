//! Acceptance run: one line per criterion, exact residuals throughout.

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use beltrami::bundle::{ConnectionData, FormMatrix, ValuedForm};
use beltrami::coeff::{Chart, PolySeries};
use beltrami::correspondence::{
    contracted_curvature, coro1_residual, identity_lry, identity_pro2, identity_pro4, identity_thm1, identity_thm2,
    CorrespondenceContext,
};
use beltrami::deform::{
    contract, contract_form, integrability_check, mc_residual, phi_from_trivialization, psi_from_transition, second_residual,
    BeltramiField,
};
use beltrami::extension::{extend_bundle, extend_nq, extend_scalar, homotopy_h, DeformationFamily};
use beltrami::forms::Form;
use beltrami::random::{self, Shape};
use beltrami::scenario::{parse_scenario, print_scenario, random_scenario, RandomParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (u32, &'static str, fn() -> Outcome);

const SHAPE: Shape = Shape { degree: 2, terms: 2 };

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn chart(n: usize, order: usize) -> Chart {
    Chart::new(n, order).unwrap()
}

fn random_e_form(rng: &mut ChaCha8Rng, c: Chart, r: usize, p: usize, q: usize) -> ValuedForm {
    ValuedForm::e_valued((0..r).map(|_| random::form(rng, c, p, q, SHAPE)).collect()).unwrap()
}

struct Geometric {
    conn: ConnectionData,
    w: beltrami::coeff::SeriesMatrix,
    phi: BeltramiField,
    psi: FormMatrix,
}

/// Resamples until both `phi` and `psi` are nonzero, so no check is vacuous.
fn geometric(rng: &mut ChaCha8Rng, c: Chart, r: usize, flat: bool) -> Geometric {
    loop {
        let zt = random::trivialization(rng, c, SHAPE);
        let phi = phi_from_trivialization(&zt).unwrap();
        let w = random::transition(rng, c, r, SHAPE);
        let conn = random::connection(rng, c, r, SHAPE, flat);
        let psi = psi_from_transition(&w, &conn, &phi).unwrap();
        if !phi.is_zero() && !psi.is_zero() {
            return Geometric { conn, w, phi, psi };
        }
    }
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (mut checks, mut corrected) = (0, 0);
    for n in 1..=3 {
        for k in 0..100 {
            let c = chart(n, 2);
            let r = rng.gen_range(1..=2);
            let conn = random::connection(&mut rng, c, r, SHAPE, false);
            let phi = random::beltrami(&mut rng, c, 1, SHAPE);
            let defect = mc_residual(&phi).unwrap();
            let ctx = CorrespondenceContext::new(conn, phi, None).unwrap();
            let (p, q) = (rng.gen_range(0..=n), rng.gen_range(0..=n));
            let s = if k % 2 == 0 { ValuedForm::scalar(random::form(&mut rng, c, p, q, SHAPE)) } else { random_e_form(&mut rng, c, r, p, q) };
            if !contract(&defect, &s).is_zero() {
                corrected += 1;
            }
            let res = identity_lry(&ctx, &s).unwrap();
            ensure(res.is_zero(), || format!("n={n} scenario {k}: residual {res}"))?;
            checks += 1;
        }
    }
    let t = start.elapsed();
    ensure(t < Duration::from_secs(60), || format!("took {t:?}"))?;
    ensure(corrected > 0, || "correction term never nonzero".into())?;
    Ok(format!("{checks} scenarios, correction term nonzero in {corrected}"))
}

fn criterion_2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut checks = 0;
    for k in 0..50 {
        let n = rng.gen_range(1..=3);
        let r = 1 + k % 2;
        let c = chart(n, 3);
        let g = geometric(&mut rng, c, r, false);
        let ctx = CorrespondenceContext::new(g.conn, g.phi, Some(g.psi)).unwrap();
        for q in 0..=n {
            let sigma = random_e_form(&mut rng, c, r, n, q);
            let res = identity_pro2(&ctx, &sigma).unwrap();
            ensure(res.is_zero(), || format!("scenario {k} q={q}: residual {res}"))?;
            checks += 1;
        }
    }
    Ok(format!("50 geometric scenarios, {checks} (n,q) forms"))
}

fn criterion_3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut caught = 0;
    for k in 0..50 {
        let n = rng.gen_range(1..=3);
        let r = rng.gen_range(1..=2);
        let c = chart(n, 4);
        let g = geometric(&mut rng, c, r, false);
        let rep = integrability_check(&g.w, &g.conn, &g.phi, &g.psi).unwrap();
        ensure(rep.holds, || format!("scenario {k}: witness {}", rep.witness))?;
        for _ in 0..3 {
            let delta = random::endo_field(&mut rng, c, r, SHAPE);
            if delta.is_zero() {
                continue;
            }
            let bad = integrability_check(&g.w, &g.conn, &g.phi, &g.psi.add(&delta)).unwrap();
            ensure(!bad.holds && !bad.witness.is_zero(), || format!("scenario {k}: perturbation not detected"))?;
            caught += 1;
        }
    }
    Ok(format!("50 scenarios at N=4 hold; {caught} perturbations detected"))
}

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for k in 0..100 {
        let n = rng.gen_range(1..=3);
        let r = rng.gen_range(1..=2);
        let c = chart(n, 4);
        let g = geometric(&mut rng, c, r, true);
        let mc = mc_residual(&g.phi).unwrap();
        ensure(mc.is_zero(), || format!("scenario {k}: MC residual {mc}"))?;
        let second = second_residual(&g.conn, &g.phi, &g.psi).unwrap();
        ensure(second.is_zero(), || format!("scenario {k}: second residual {:?}", second.rows()))?;
    }
    Ok("100 trivializations at N=4; MC and second equation exact (flat theta)".into())
}

fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut checks = 0;
    for n in 1..=3 {
        let c = chart(n, 2);
        for p in 0..=n {
            for q in 0..=n {
                for _ in 0..3 {
                    let conn = random::connection(&mut rng, c, 1, SHAPE, false);
                    let phi = random::beltrami(&mut rng, c, 1, SHAPE);
                    let ctx = CorrespondenceContext::new(conn, phi, None).unwrap();
                    let s = random::form(&mut rng, c, p, q, SHAPE);
                    let res = identity_thm1(&ctx, &s, p, q).unwrap();
                    ensure(res.is_zero(), || format!("n={n} ({p},{q}): residual {res}"))?;
                    checks += 1;
                }
            }
        }
    }
    Ok(format!("{checks} checks over the (p,q) grid, off-shell phi"))
}

fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let (mut checks, mut column0) = (0, 0);
    for n in 1..=3 {
        let c = chart(n, 2);
        for p in 0..=n {
            for q in 0..=n {
                for _ in 0..3 {
                    let conn = random::connection(&mut rng, c, 2, SHAPE, false);
                    let phi = random::beltrami(&mut rng, c, 1, SHAPE);
                    let psi = random::endo_field(&mut rng, c, 2, SHAPE);
                    let ctx = CorrespondenceContext::new(conn, phi, Some(psi)).unwrap();
                    let s = random_e_form(&mut rng, c, 2, p, q);
                    let res = identity_thm2(&ctx, &s, p, q).unwrap();
                    ensure(res.is_zero(), || format!("n={n} ({p},{q}): residual {res}"))?;
                    checks += 1;
                    column0 += usize::from(p == 0);
                }
            }
        }
    }
    Ok(format!("{checks} checks at r=2, {column0} in the p=0 column"))
}

fn criterion_7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut found, mut tries, mut checks) = (0, 0, 0);
    while found < 20 {
        tries += 1;
        ensure(tries < 500, || format!("only {found} non-vacuous instances"))?;
        let c = chart(2, 2);
        let r = rng.gen_range(1..=2);
        let g = geometric(&mut rng, c, r, true);
        let ctx = CorrespondenceContext::new(g.conn, g.phi, Some(g.psi)).unwrap();
        if contracted_curvature(&ctx).unwrap().is_zero() {
            continue;
        }
        found += 1;
        for p in 0..=2 {
            for q in 0..=2 {
                let s = random_e_form(&mut rng, c, r, p, q);
                let res = identity_pro4(&ctx, &s).unwrap();
                ensure(res.is_zero(), || format!("({p},{q}): residual {res}"))?;
                let f = ValuedForm::scalar(random::form(&mut rng, c, p, q, SHAPE));
                let res = identity_pro4(&ctx, &f).unwrap();
                ensure(res.is_zero(), || format!("scalar ({p},{q}): residual {res}"))?;
                checks += 2;
            }
        }
    }
    Ok(format!("{found} n=2 scenarios with i_phi Theta != 0, {checks} checks"))
}

fn criterion_8() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    // The residual is a (0,2)-form, so n = 1 is vacuous.
    for k in 0..50 {
        let n = rng.gen_range(2..=3);
        let c = chart(n, 3);
        let g = geometric(&mut rng, c, 1, true);
        let ctx = CorrespondenceContext::new(g.conn.clone(), g.phi.clone(), Some(g.psi.clone())).unwrap();
        let res = coro1_residual(&ctx).unwrap();
        ensure(res.is_zero(), || format!("scenario {k}: residual {res}"))?;
        let delta = (0..100)
            .map(|_| random::endo_field(&mut rng, c, 1, SHAPE))
            .find(|d| !d.get(0, 0).dbar().is_zero())
            .ok_or_else(|| format!("scenario {k}: no perturbation with nonzero dbar"))?;
        let bad = CorrespondenceContext::new(g.conn, g.phi, Some(g.psi.add(&delta))).unwrap();
        ensure(!coro1_residual(&bad).unwrap().is_zero(), || format!("scenario {k}: perturbation not detected"))?;
    }
    Ok("50 line-bundle scenarios (n = 2, 3) exact; perturbations detected".into())
}

fn criterion_9() -> Outcome {
    let start = Instant::now();
    let c = chart(1, 4);
    let t = PolySeries::t(c);
    let z = PolySeries::z(c, 0).unwrap();
    let zb = PolySeries::zb(c, 0).unwrap();
    let dz = Form::dz(c, 0).unwrap();
    let phi = BeltramiField::from_components(c, 1, vec![Form::dzb(c, 0).unwrap().mul_scalar(&t)]).unwrap();
    let fam = DeformationFamily::from_series(phi, None).unwrap();
    let rep = extend_scalar(&fam, &dz.mul_scalar(&z), 4).unwrap();
    let want = ValuedForm::scalar(dz.mul_scalar(&(&z + &(&t * &zb))));
    ensure(rep.sigma == want, || format!("worked example gave {}", rep.sigma))?;
    ensure(rep.steps.iter().filter(|s| s.order >= 2).all(|s| s.solution.is_zero()), || "nonzero order >= 2".into())?;

    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut solved = 0;
    for k in 0..50 {
        let n = rng.gen_range(1..=3);
        let r = rng.gen_range(1..=2);
        let c = chart(n, 4);
        let g = geometric(&mut rng, c, r, k % 2 == 0);
        let fam = DeformationFamily::from_series(g.phi, Some(g.psi)).unwrap();
        let p = rng.gen_range(0..=n);
        let q = rng.gen_range(0..n);
        let s = random::closed_form(&mut rng, c, p, q, SHAPE);
        let rep = extend_scalar(&fam, &s, 4).map_err(|e| format!("scenario {k} scalar: {e}"))?;
        ensure(rep.residual_is_zero(), || format!("scenario {k} scalar: residual {}", rep.residual))?;
        let sv = ValuedForm::e_valued((0..r).map(|_| random::closed_form(&mut rng, c, p, q, SHAPE)).collect()).unwrap();
        let rep = extend_bundle(&fam, &g.conn, &sv, 4).map_err(|e| format!("scenario {k} bundle: {e}"))?;
        ensure(rep.residual_is_zero(), || format!("scenario {k} bundle: residual {}", rep.residual))?;
        let top = random::closed_form(&mut rng, c, n, q, SHAPE);
        let rep = extend_nq(&fam, &top, 4).map_err(|e| format!("scenario {k} (n,q): {e}"))?;
        ensure(rep.residual_is_zero(), || format!("scenario {k} (n,q): residual {}", rep.residual))?;
        solved += 3;
    }
    let t = start.elapsed();
    ensure(t < Duration::from_secs(120), || format!("took {t:?}"))?;
    Ok(format!("worked example exact; {solved} random extensions exact through N=4"))
}

fn criterion_10() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let sign = |k: usize| if k.is_multiple_of(2) { 1 } else { -1 };
    for i in 0..1000 {
        let n = rng.gen_range(1..=3);
        let c = chart(n, 2);
        let (pa, qa) = (rng.gen_range(0..=n), rng.gen_range(0..=n));
        let a = random::form(&mut rng, c, pa, qa, SHAPE);
        let b = random::mixed_form(&mut rng, c, SHAPE);
        let da = pa + qa;
        ensure(a.partial().partial().is_zero() && a.dbar().dbar().is_zero(), || format!("case {i}: d^2"))?;
        ensure((&a.partial().dbar() + &a.dbar().partial()).is_zero(), || format!("case {i}: anticommutator"))?;
        let (pb, qb) = (rng.gen_range(0..=n), rng.gen_range(0..=n));
        let hb = random::form(&mut rng, c, pb, qb, SHAPE);
        ensure(a.wedge(&hb) == hb.wedge(&a).scale_int(sign(da * (pb + qb))), || format!("case {i}: commutativity"))?;
        let ab = a.wedge(&b);
        ensure(ab.partial() == &a.partial().wedge(&b) + &a.wedge(&b.partial()).scale_int(sign(da)), || format!("case {i}: Leibniz d'"))?;
        ensure(ab.dbar() == &a.dbar().wedge(&b) + &a.wedge(&b.dbar()).scale_int(sign(da)), || format!("case {i}: Leibniz d''"))?;
        let phi = random::beltrami(&mut rng, c, 1, SHAPE);
        ensure(
            contract_form(&phi, &ab) == &contract_form(&phi, &a).wedge(&b) + &a.wedge(&contract_form(&phi, &b)),
            || format!("case {i}: Leibniz i_phi"),
        )?;
        let q = rng.gen_range(1..=n);
        let w = random::form(&mut rng, c, pa, q, SHAPE);
        let dw = w.dbar();
        let h_dw = if dw.is_zero() { dw } else { homotopy_h(&dw).unwrap() };
        ensure(&homotopy_h(&w).unwrap().dbar() + &h_dw == w, || format!("case {i}: homotopy"))?;
    }
    Ok("1000 random inputs for each identity".into())
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_beltrami"))
}

fn scenarios_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios")
}

fn exit_code(args: &[&str]) -> Result<i32, String> {
    let out = bin().args(args).output().map_err(|e| e.to_string())?;
    out.status.code().ok_or_else(|| "terminated by signal".into())
}

fn criterion_11() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    for seed in 0..30 {
        let s = random_scenario(RandomParams { n: 1 + seed as usize % 3, r: 1 + seed as usize % 2, ..RandomParams::default() }, seed).unwrap();
        let text = print_scenario(&s);
        let back = parse_scenario(&text).map_err(|e| e.to_string())?.scenario;
        ensure(back == s && print_scenario(&back) == text, || format!("seed {seed}: round trip differs"))?;
    }
    let dir = scenarios_dir();
    let good = dir.join("line_bundle.json");
    let bad = dir.join("corrupted_psi.json");
    let axis = tmp.path().join("axis.json");
    std::fs::write(&axis, r#"{"n": 2, "N": 2, "family": {"phi": {"1,1": "zb3"}}}"#).map_err(|e| e.to_string())?;
    let cases: [(Vec<&str>, i32); 6] = [
        (vec!["verify", good.to_str().unwrap()], 0),
        (vec!["verify", bad.to_str().unwrap()], 1),
        (vec!["verify", axis.to_str().unwrap()], 2),
        (vec!["verify", good.to_str().unwrap(), "--suite", "nope"], 2),
        (vec!["verify", "/nonexistent.json"], 2),
        (vec!["random", "--n", "2", "--count", "3", "--seed", "5"], 0),
    ];
    for (args, want) in &cases {
        let got = exit_code(args)?;
        ensure(got == *want, || format!("{args:?}: exit {got}, expected {want}"))?;
    }
    let a = tmp.path().join("a.json");
    let b = tmp.path().join("b.json");
    exit_code(&["verify", good.to_str().unwrap(), "--json", a.to_str().unwrap()])?;
    exit_code(&["--sequential", "verify", good.to_str().unwrap(), "--json", b.to_str().unwrap()])?;
    let (ja, jb) = (std::fs::read(&a).map_err(|e| e.to_string())?, std::fs::read(&b).map_err(|e| e.to_string())?);
    ensure(ja == jb, || "JSON reports differ between runs".into())?;
    Ok(format!("30 round trips, {} exit-code cases, byte-identical reports", cases.len()))
}

fn main() {
    let criteria: [Criterion; 11] = [
        (1, "lry exactness", criterion_1),
        (2, "pro2 on geometric scenarios", criterion_2),
        (3, "pro3 integrability and detection", criterion_3),
        (4, "Maurer-Cartan and second equation", criterion_4),
        (5, "thm1 grid", criterion_5),
        (6, "thm2 grid", criterion_6),
        (7, "pro4 non-vacuous", criterion_7),
        (8, "coro1 line bundle", criterion_8),
        (9, "extension solver", criterion_9),
        (10, "kernel algebra", criterion_10),
        (11, "cli contract", criterion_11),
    ];
    let mut failed = 0;
    for (k, name, run) in criteria {
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {k:>2} PASS  {name}: {detail} [{secs:.1} s]"),
            Err(detail) => {
                failed += 1;
                println!("criterion {k:>2} FAIL  {name}: {detail} [{secs:.1} s]");
            }
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
