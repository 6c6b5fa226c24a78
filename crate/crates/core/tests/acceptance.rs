//! Acceptance criteria. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any fails.

use qinduce::catalog::{self, values_on_group};
use qinduce::cli::run_cli;
use qinduce::induction::{self, find_intertwiner};
use qinduce::report::induce_report;
use qinduce::spec_file::{catalog_bundle, catalog_bundles, Problem, SpecFile, WeightSpec};
use qinduce::suites::{self, CheckLine};
use qinduce::weight_correspondence as wc;
use qinduce::Complex64 as C64;
use std::time::Instant;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn problem(name: &str) -> Result<Problem, qinduce::Error> {
    Problem::from_spec(&catalog_bundle(name)?)
}

fn max_diff(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn frobenius() -> Result<Outcome, Box<dyn std::error::Error>> {
    let start = Instant::now();
    let p = problem("S3/C3")?;
    let ind = induction::induce(&p.bundle, &p.u, p.spec.seed)?;
    let chi = values_on_group(&ind.corep.character()?);
    let elapsed = start.elapsed().as_secs_f64();
    let expect: Vec<C64> = [2.0, -1.0, -1.0, 0.0, 0.0, 0.0].iter().map(|&x| C64::new(x, 0.0)).collect();
    let err = max_diff(&chi, &expect);
    let oracle_err = max_diff(&chi, &p.oracle_character()?.expect("classical"));
    let p2 = problem("S3/C2")?;
    let ind2 = induction::induce(&p2.bundle, &p2.u, p2.spec.seed)?;
    let err2 = max_diff(&values_on_group(&ind2.corep.character()?), &p2.oracle_character()?.expect("classical"));
    let pass = err <= 1e-8 && oracle_err <= 1e-8 && ind.carrier.rank == 2 && elapsed < 10.0 && ind2.carrier.rank == 3 && err2 <= 1e-8;
    Ok(outcome(
        pass,
        format!(
            "S3/C3 χ err {err:.1e}, dim {} in {elapsed:.2}s; S3/C2 sign dim {}, χ err {err2:.1e}",
            ind.carrier.rank, ind2.carrier.rank
        ),
    ))
}

fn boundary() -> Result<Outcome, Box<dyn std::error::Error>> {
    let mut pass = true;
    let mut parts = Vec::new();
    for (g, rep) in [("Z4", "chi1"), ("S3", "std")] {
        let p = Problem::from_spec(&SpecFile::subgroup(g, "full", rep))?;
        let ind = induction::induce(&p.bundle, &p.u, 1)?;
        let (_, res) = find_intertwiner(&ind.corep.rho, &p.u, 1)?;
        pass &= res <= 1e-8;
        parts.push(format!("{g}/{g} ρ≅U {res:.1e}"));
    }
    let d = 2;
    for g in ["Z4", "S3"] {
        let p = Problem::from_spec(&SpecFile::subgroup(g, "trivial", &format!("trivial{d}")))?;
        let ind = induction::induce(&p.bundle, &p.u, 1)?;
        let cd = p.classical.as_ref().expect("classical");
        let reg = catalog::regular_corep(&cd.group, d);
        let (_, res) = find_intertwiner(&ind.corep.rho, &reg, 1)?;
        let dim_ok = ind.carrier.rank == cd.group.order() * d;
        pass &= dim_ok && res <= 1e-8;
        parts.push(format!("{g}/e dim {} ρ≅reg⊗1 {res:.1e}", ind.carrier.rank));
    }
    Ok(outcome(pass, parts.join("; ")))
}

fn unitarity_and_dense() -> Result<(Outcome, Outcome), Box<dyn std::error::Error>> {
    let (mut worst, mut deficits) = (0.0f64, 0usize);
    let mut count = 0;
    for (_, spec) in catalog_bundles() {
        let r = induce_report(&Problem::from_spec(&spec)?)?;
        worst = worst.max(r.residuals.unitarity).max(r.residuals.corep);
        deficits += r.residuals.dense_span_deficit + r.residuals.k0_deficit + r.certificates.dense.deficit;
        count += 1;
    }
    Ok((
        outcome(worst <= 1e-8, format!("worst unitarity/corep residual {worst:.1e} over {count} bundles")),
        outcome(deficits == 0, format!("total span and 𝒦₀ deficit {deficits} over {count} bundles")),
    ))
}

fn weight_independence() -> Result<Outcome, Box<dyn std::error::Error>> {
    let dens = |a: f64, b: f64| WeightSpec { density: vec![vec![vec![[a, 0.0]]], vec![vec![[b, 0.0]]]] };
    let mut worst: f64 = 0.0;
    for (theta, eta) in [((1.0, 1.0), (1.0, 3.0)), ((2.0, 0.5), (0.25, 4.0))] {
        let mut s = catalog_bundle("S3/C3")?;
        s.theta = Some(dens(theta.0, theta.1));
        s.eta = Some(dens(eta.0, eta.1));
        let p = Problem::from_spec(&s)?;
        let ind = induction::induce(&p.bundle, &p.u, 2)?;
        let w = induction::weight_change(&p.bundle, &p.u, &ind, p.eta.density(), 2)?;
        worst = worst.max(w.equivalence).max(w.u_unitarity);
    }
    Ok(outcome(worst <= 1e-8, format!("equivalence residual {worst:.1e}")))
}

fn certificates() -> Result<Outcome, Box<dyn std::error::Error>> {
    let (mut impl_worst, mut agree_worst) = (0.0f64, 0.0f64);
    let mut closed_count = 0;
    for (name, spec) in catalog_bundles() {
        let p = Problem::from_spec(&spec)?;
        let r = &p.bundle.upsilon_report;
        impl_worst = impl_worst.max(r.impl1).max(r.impl2);
        let Some(cd) = &p.classical else { continue };
        let (c1, c2) = r.closed_form_impl.ok_or_else(|| format!("{name}: no closed form"))?;
        impl_worst = impl_worst.max(c1).max(c2);
        // closed-form Υ and crossed-product Υ induce the same ρ
        let ups = catalog::classical_upsilon(&cd.group, &p.bundle.q.units)?;
        let cf = p.bundle.core.clone().with_upsilon(ups, "closed form")?;
        let a = induction::induce(&p.bundle, &p.u, 3)?;
        let b = induction::induce(&cf, &p.u, 3)?;
        let (_, res) = find_intertwiner(&a.corep.rho, &b.corep.rho, 3)?;
        agree_worst = agree_worst.max(res);
        closed_count += 1;
    }
    Ok(outcome(
        impl_worst <= 1e-9 && agree_worst <= 1e-8,
        format!("worst impl {impl_worst:.1e}; closed form vs crossed product ρ {agree_worst:.1e} on {closed_count} bundles"),
    ))
}

fn correspondence() -> Result<Outcome, Box<dyn std::error::Error>> {
    let p = problem("S3/C3")?;
    let c = wc::certificate(&p.bundle.core, 10, 11)?;
    let cocycle = c.cocycle_residuals.iter().map(|x| x.1).fold(0.0, f64::max);
    let v = &c.v_phi_residuals;
    let vphi = [v.unitarity, v.intertwining, v.corep, v.membership, v.consistency, v.scaling].into_iter().fold(0.0, f64::max);
    let counter = c.counterexample_fails == Some(true);
    let pass = cocycle <= 1e-8 && counter && c.roundtrip_error <= 1e-8 && vphi <= 1e-8 && c.relative_modular <= 1e-8;
    Ok(outcome(
        pass,
        format!(
            "cocycle {cocycle:.1e} at t ∈ {{0.3, 1, √2}}; counterexample {}; round trip {:.1e}; V_φ {vphi:.1e}; relative modular {:.1e}",
            if counter { "rejected" } else { "NOT rejected" },
            c.roundtrip_error,
            c.relative_modular
        ),
    ))
}

fn modular() -> Result<Outcome, Box<dyn std::error::Error>> {
    let mut lines: Vec<CheckLine> = Vec::new();
    for name in ["S3/C3", "C[S3]->C[Z2]", "Q8/C4"] {
        let p = problem(name)?;
        lines.extend(suites::weights_suite(&p)?);
        lines.extend(suites::qgroup_suite(&p)?);
    }
    let kp = catalog::kac_paljutkin(1e-9)?;
    let kp_lines = suites::qgroup_lines("KP", &kp);
    lines.extend(kp_lines);
    let failed: Vec<&CheckLine> = lines.iter().filter(|l| !l.pass || l.tol > 1e-10).collect();
    let worst = lines.iter().map(|l| l.residual).fold(0.0, f64::max);
    let detail = if failed.is_empty() {
        format!("{} identities, worst {worst:.1e}", lines.len())
    } else {
        format!("{} of {} failed, first: {} = {:.1e}", failed.len(), lines.len(), failed[0].name, failed[0].residual)
    };
    Ok(outcome(failed.is_empty(), detail))
}

fn runtime() -> Result<Outcome, Box<dyn std::error::Error>> {
    let start = Instant::now();
    let mut sink = Vec::new();
    let code = run_cli(["qinduce", "verify", "--spec", "catalog:all", "--suite", "all"], &mut sink);
    let secs = start.elapsed().as_secs_f64();
    Ok(outcome(code == 0 && secs < 120.0, format!("verify --suite all over the catalog: exit {code} in {secs:.1}s")))
}

fn report(n: usize, title: &str, r: Result<Outcome, Box<dyn std::error::Error>>) -> bool {
    let (pass, detail) = match r {
        Ok(o) => (o.pass, o.detail),
        Err(e) => (false, format!("error: {e}")),
    };
    println!("{} {n}. {title}: {detail}", if pass { "PASS" } else { "FAIL" });
    pass
}

fn main() {
    type Res = Result<Outcome, Box<dyn std::error::Error>>;
    let (unitarity, dense): (Res, Res) = match unitarity_and_dense() {
        Ok((u, d)) => (Ok(u), Ok(d)),
        Err(e) => (Err(e.to_string().into()), Err(e)),
    };
    let results = [
        (1, "Frobenius reconciliation", frobenius()),
        (2, "boundary subgroups", boundary()),
        (3, "unitarity", unitarity),
        (4, "weight independence", weight_independence()),
        (5, "dense spans", dense),
        (6, "implementation certificates", certificates()),
        (7, "weight correspondence", correspondence()),
        (8, "modular and KSGNS suite", modular()),
        (9, "runtime", runtime()),
    ];
    let mut all = true;
    for (n, title, r) in results {
        all &= report(n, title, r);
    }
    if !all {
        std::process::exit(1);
    }
}
