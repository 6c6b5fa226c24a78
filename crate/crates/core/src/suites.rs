//! Certificate suites run by `verify`: each returns one line per checked
//! identity with its residual and the tolerance it is held to.

use crate::action::{analytic_slice_lemmas, random_element, random_functional};
use crate::algebra::{Element, Functional, LinearAlgebraMap};
use crate::catalog::values_on_group;
use crate::induction::{self, find_intertwiner};
use crate::linalg::{self, cr, CMat, CVec};
use crate::quantum_group::QuantumGroup;
use crate::spec_file::Problem;
use crate::weight_correspondence as wc;
use crate::weights::{connes_cocycle, gns, ksgns, modular_data, ovw_slice, relative_modular, Weight};
use crate::{par, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::str::FromStr;

/// Tolerance for the modular, KSGNS and quantum-group identities.
pub const STRICT_TOL: f64 = 1e-10;
/// Tolerance for the pipeline-level identities.
pub const PIPELINE_TOL: f64 = 1e-8;
/// Tolerance for the implementation residuals of `Υ`.
pub const IMPL_TOL: f64 = 1e-9;

#[derive(Clone, Debug, Serialize)]
pub struct CheckLine {
    pub suite: &'static str,
    pub name: String,
    pub residual: f64,
    pub tol: f64,
    pub pass: bool,
}

impl CheckLine {
    pub fn new(suite: &'static str, name: impl Into<String>, residual: f64, tol: f64) -> Self {
        let pass = residual.is_finite() && residual <= tol;
        CheckLine { suite, name: name.into(), residual, tol, pass }
    }

    /// A rank deficit or other count that must vanish.
    pub fn count(suite: &'static str, name: impl Into<String>, count: usize) -> Self {
        CheckLine::new(suite, name, count as f64, 0.0)
    }

    pub fn flag(suite: &'static str, name: impl Into<String>, ok: bool) -> Self {
        CheckLine::new(suite, name, if ok { 0.0 } else { 1.0 }, 0.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Suite {
    Weights,
    Qgroup,
    Action,
    Induction,
    Correspondence,
    All,
}

impl FromStr for Suite {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        <Suite as clap::ValueEnum>::from_str(s, true)
    }
}

fn rand_weight(layout: &crate::algebra::LegLayout, rng: &mut ChaCha8Rng) -> Result<Weight> {
    let x = random_element(layout, rng);
    Weight::new(&(&x * &x.adjoint()) + &Element::scalar(layout, cr(0.3)))
}

/// GNS, modular, KSGNS, tensor-weight and cocycle identities on random weights of `M` and `N`.
pub fn weights_suite(p: &Problem) -> Result<Vec<CheckLine>> {
    const S: &str = "weights";
    let mut rng = ChaCha8Rng::seed_from_u64(p.spec.seed ^ 0x3e1);
    let m = &p.bundle.m;
    let n = &p.bundle.n;
    let ml = m.layout();
    let nl = n.layout();
    let mut out = Vec::new();
    let (phi, psi, chi) = (rand_weight(&ml, &mut rng)?, rand_weight(&ml, &mut rng)?, rand_weight(&ml, &mut rng)?);
    let g = gns(&phi);
    let md = modular_data(&phi, &g);
    let (mut ip, mut hom, mut jn, mut nit): (f64, f64, f64, f64) = (0.0, 0.0, 0.0, 0.0);
    for _ in 0..20 {
        let x = random_element(&ml, &mut rng);
        let y = random_element(&ml, &mut rng);
        ip = ip.max((g.lambda(&y).dotc(&g.lambda(&x)) - phi.eval(&(&y.adjoint() * &x))).norm());
        hom = hom.max((g.lambda(&(&x * &y)) - g.pi(&x) * g.lambda(&y)).norm());
        jn = jn.max((md.j.apply(&(md.nabla_pow(0.5) * g.lambda(&x))) - g.lambda(&x.adjoint())).norm());
        nit = nit.max((md.nabla_it(0.37) * g.lambda(&x) - g.lambda(&md.sigma(0.37, &x))).norm());
    }
    out.push(CheckLine::new(S, "GNS inner product", ip, STRICT_TOL));
    out.push(CheckLine::new(S, "GNS Λ(xy) = π(x)Λ(y)", hom, STRICT_TOL));
    out.push(CheckLine::new(S, "J∇^{1/2}Λ(x) = Λ(x*)", jn, STRICT_TOL));
    out.push(CheckLine::new(S, "∇^{it}Λ(x) = Λ(σ_t(x))", nit, STRICT_TOL));
    let dim = g.dim();
    out.push(CheckLine::new(S, "J² = 1", linalg::op_norm(&(md.j.compose(&md.j) - CMat::identity(dim, dim))), STRICT_TOL));
    // KSGNS with N on H_N
    let mnl = ml.concat(&nl);
    let rep: &LinearAlgebraMap = &n.gns.pi;
    let hn = n.gns.dim();
    let (mut expansion, mut kip, mut bound): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for _ in 0..5 {
        let x = random_element(&mnl, &mut rng);
        let y = random_element(&mnl, &mut rng);
        let kx = ksgns(&x, &phi, &g, rep)?;
        let ky = ksgns(&y, &phi, &g, rep)?;
        let slice = ovw_slice(&(&y.adjoint() * &x), &phi, 0)?;
        kip = kip.max(linalg::op_norm(&(ky.adjoint() * &kx - rep.apply(&slice)?.into_mat())));
        let v = CVec::from_fn(hn, |_, _| linalg::c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        let mut col = CVec::zeros(dim * hn);
        for i in 0..hn {
            let mut e = CVec::zeros(hn);
            e[i] = cr(1.0);
            let om = Functional::vector_through(rep, &v, &e)?;
            col += g.lambda(&x.slice(1, &om)?).kronecker(&e);
        }
        expansion = expansion.max((col - &kx * &v).norm());
        let om = random_functional(&nl, &mut rng);
        let lhs = g.lambda(&x.slice(1, &om)?).norm();
        bound = bound.max(lhs - om.norm() * linalg::op_norm(&kx));
    }
    out.push(CheckLine::new(S, "KSGNS (λ⊗ι)(y)*(λ⊗ι)(x) = (φ⊗ι)(y*x)", kip, STRICT_TOL));
    out.push(CheckLine::new(S, "KSGNS column expansion", expansion, STRICT_TOL));
    out.push(CheckLine::new(S, "KSGNS norm bound excess", bound.max(0.0), STRICT_TOL));
    // tensor weight
    let wn = rand_weight(&nl, &mut rng)?;
    let tw = phi.tensor(&wn);
    let a = random_element(&ml, &mut rng);
    let b = random_element(&nl, &mut rng);
    let tensor_res = (gns(&tw).lambda(&a.tensor(&b)) - g.lambda(&a).kronecker(&gns(&wn).lambda(&b))).norm();
    out.push(CheckLine::new(S, "tensor weight GNS", tensor_res, STRICT_TOL));
    // Connes cocycles
    let (s, t) = (0.3, 0.7);
    let mdpsi = modular_data(&psi, &gns(&psi));
    let lhs = connes_cocycle(&phi, &psi, s + t)?;
    let rhs = &connes_cocycle(&phi, &psi, s)? * &mdpsi.sigma(s, &connes_cocycle(&phi, &psi, t)?);
    out.push(CheckLine::new(S, "cocycle identity", lhs.dist(&rhs), STRICT_TOL));
    let chain = &connes_cocycle(&phi, &psi, t)? * &connes_cocycle(&psi, &chi, t)?;
    out.push(CheckLine::new(S, "Connes cocycle chain rule", chain.dist(&connes_cocycle(&phi, &chi, t)?), STRICT_TOL));
    out.push(CheckLine::new(S, "Connes cocycle unitary", linalg::unitarity_residual(connes_cocycle(&phi, &psi, 1.9)?.mat()), STRICT_TOL));
    let rel = relative_modular(&gns(&phi), &gns(&psi));
    let via = linalg::herm_fn(&rel.nabla, |x| num_complex::Complex64::from_polar(1.0, t * x.ln())) * mdpsi.nabla_it(-t);
    let gpsi = gns(&psi);
    out.push(CheckLine::new(S, "∇_{φ,ψ}^{it}∇_ψ^{-it} = π((Dφ:Dψ)_t)", linalg::op_norm(&(via - gpsi.pi(&connes_cocycle(&phi, &psi, t)?))), STRICT_TOL));
    let rel_same = relative_modular(&g, &g);
    out.push(CheckLine::new(S, "∇_{φ,φ} = ∇_φ", linalg::op_norm(&(&rel_same.nabla - &md.nabla)), STRICT_TOL));
    Ok(out)
}

pub fn qgroup_lines(name: &str, q: &QuantumGroup) -> Vec<CheckLine> {
    const S: &str = "qgroup";
    let r = &q.residuals;
    let items = [
        ("Δ *-homomorphism", r.star_hom),
        ("Δ unital", r.unital),
        ("coassociativity", r.coassociativity),
        ("left invariance of φ", r.left_invariance),
        ("right invariance of φ", r.right_invariance),
        ("Haar weight tracial", r.haar_trace),
        ("antipode defining identity", r.antipode_consistency),
        ("S² = ι", r.s_squared),
        ("R anti-homomorphism", r.r_anti_hom),
        ("right invariance of ψ", r.psi_right_invariance),
        ("Δ(δ) = δ⊗δ", r.delta_group_like),
        ("δ = 1", r.delta_minus_one),
        ("σ_t(δ) = δ", r.delta_sigma_invariance),
        ("ν = 1", r.nu_minus_one),
        ("τ = ι", r.tau_minus_id),
        ("P = 1", r.p_minus_one),
        ("W unitary", r.w_unitarity),
        ("Δ(x) = W*(1⊗x)W", r.w_implements_comult),
        ("pentagon", r.pentagon),
        ("V unitary", r.v_unitarity),
        ("Δ(x) = V(x⊗1)V*", r.v_implements_comult),
        ("(ι⊗Δ)(V) = V₁₂V₁₃", r.v_corep),
        ("V slice formula", r.v_slice),
    ];
    items.iter().map(|&(n, v)| CheckLine::new(S, format!("{name}: {n}"), v, STRICT_TOL)).collect()
}

pub fn qgroup_suite(p: &Problem) -> Result<Vec<CheckLine>> {
    let mut out = qgroup_lines("M", &p.bundle.m);
    out.extend(qgroup_lines("N", &p.bundle.n));
    Ok(out)
}

pub fn action_suite(p: &Problem) -> Result<Vec<CheckLine>> {
    const S: &str = "action";
    let b = &p.bundle;
    let r = &b.residuals;
    let tol = b.tol;
    let mut out: Vec<CheckLine> = [
        ("α *-homomorphism", r.star_hom),
        ("α unital", r.unital),
        ("(ι⊗Δ_N)α = (α⊗ι)α", r.action_identity),
        ("(Δ_M⊗ι)α = (ι⊗α)Δ_M", r.compatibility),
        ("Q fixed by α", r.fixed_points),
        ("Δ_M(Q) ⊆ M ⊗ Q", r.comult_into_q),
        ("β *-homomorphism", r.beta_star_hom),
        ("β coassociative", r.beta_coassociative),
        ("T_α(M) ⊆ Q", r.t_alpha_membership),
        ("T_α bimodule", r.t_alpha_bimodule),
        ("T_α positive", r.t_alpha_positivity),
        ("T_α(1) = 1", r.t_alpha_unit),
        ("slice bound", r.slice_bound),
    ]
    .iter()
    .map(|&(n, v)| CheckLine::new(S, n, v, tol * 10.0))
    .collect();
    let u = &b.upsilon_report;
    out.push(CheckLine::new(S, "Υ impl1", u.impl1, IMPL_TOL));
    out.push(CheckLine::new(S, "Υ impl2", u.impl2, IMPL_TOL));
    out.push(CheckLine::new(S, "Υ unitary", linalg::unitarity_residual(b.upsilon.mat()), IMPL_TOL));
    if let Some((c1, c2)) = u.closed_form_impl {
        out.push(CheckLine::new(S, "closed-form Υ impl1", c1, IMPL_TOL));
        out.push(CheckLine::new(S, "closed-form Υ impl2", c2, IMPL_TOL));
    }
    let ig = b.integrability();
    out.push(CheckLine::flag(S, "α integrable", ig.integrable));
    let mut rng = ChaCha8Rng::seed_from_u64(p.spec.seed ^ 0x51);
    let om = random_functional(&b.n.layout(), &mut rng);
    let a = random_element(&b.n.layout(), &mut rng);
    let x = random_element(&b.m.layout().concat(&b.n.layout()), &mut rng);
    let sl = analytic_slice_lemmas(b, &p.u, &om, &a, &x)?;
    out.push(CheckLine::new(S, "slice lemma on N", sl.single_leg, STRICT_TOL));
    out.push(CheckLine::new(S, "slice lemma on M ⊗ N", sl.lifted, STRICT_TOL));
    Ok(out)
}

pub fn induction_suite(p: &Problem) -> Result<Vec<CheckLine>> {
    const S: &str = "induction";
    let b = &p.bundle;
    let seed = p.spec.seed;
    let ind = induction::induce(b, &p.u, seed)?;
    let mut out = vec![
        CheckLine::new(S, "𝒫 equation", ind.p.equation_residual, PIPELINE_TOL),
        CheckLine::new(S, "𝒫 module closure", ind.p.closure_residual, PIPELINE_TOL),
        CheckLine::new(S, "Y*X ∈ B(H) ⊗ Q ⊗ B(K)", ind.carrier.q_membership, PIPELINE_TOL),
        CheckLine::new(S, "Gram factorization", ind.carrier.reproduction, PIPELINE_TOL),
    ];
    let r = &ind.corep.residuals;
    out.push(CheckLine::new(S, "λ well-defined", r.consistency, PIPELINE_TOL));
    out.push(CheckLine::new(S, "(Δ⊗ι)(X) columns in 𝒫", r.column_membership, PIPELINE_TOL));
    out.push(CheckLine::new(S, "λ*λ = 1", r.isometry, PIPELINE_TOL));
    out.push(CheckLine::new(S, "λ ∈ M ⊗ B(𝒦)", r.membership, PIPELINE_TOL));
    out.push(CheckLine::new(S, "λ commutes with M′ ⊗ 1", r.commutant, PIPELINE_TOL));
    out.push(CheckLine::new(S, "(Δ⊗ι)(λ) = λ₂₃λ₁₃", r.lambda_corep, PIPELINE_TOL));
    out.push(CheckLine::new(S, "(Δ⊗ι)(ρ) = ρ₁₃ρ₂₃", r.corep, PIPELINE_TOL));
    out.push(CheckLine::new(S, "ρρ* = ρ*ρ = 1", r.unitarity, PIPELINE_TOL));
    let dense = induction::dense_families(b, &p.u, &ind.p, &ind.carrier, seed)?;
    out.push(CheckLine::count(S, "dense family span deficit", dense.deficit));
    out.push(CheckLine::new(S, "dense family generators in 𝒫", dense.membership, PIPELINE_TOL));
    let un = induction::unitarity_certificate(b, &p.u, &ind.p, &ind.carrier, &ind.corep)?;
    out.push(CheckLine::count(S, "span{(ω⊗ι)Δ(a)} deficit", un.dim_m - un.n0_rank));
    out.push(CheckLine::count(S, "𝒦₀ deficit", un.k0_deficit));
    out.push(CheckLine::new(S, "λ(H ⊗ 𝒦) ⊆ H ⊗ 𝒦₀", un.lambda_into_k0, PIPELINE_TOL));
    out.push(CheckLine::new(S, "(a⊗1)λ(H ⊗ 𝒦₀) ⊆ H ⊗ 𝒦₀", un.module_into_k0, PIPELINE_TOL));
    out.push(CheckLine::new(S, "λ(H ⊗ 𝒦₀) ⊆ H ⊗ 𝒦₀", un.lambda_onto_k0, PIPELINE_TOL));
    out.push(CheckLine::count(S, "λ(H ⊗ 𝒦₀) = H ⊗ 𝒦₀ rank deficit", un.lambda_onto_rank_deficit));
    out.push(CheckLine::new(S, "λλ* = 1", un.lambda_coisometry, PIPELINE_TOL));
    let w = induction::weight_change(b, &p.u, &ind, p.eta.density(), seed)?;
    out.push(CheckLine::new(S, "weight change 𝒰 unitary", w.u_unitarity, PIPELINE_TOL));
    out.push(CheckLine::new(S, "weight change equivalence", w.equivalence, PIPELINE_TOL));
    out.push(CheckLine::new(S, "Ξ impl1", w.xi_impl1, IMPL_TOL));
    out.push(CheckLine::new(S, "Ξ impl2", w.xi_impl2, IMPL_TOL));
    let sm = induction::star_map_certificate(b, &p.u, 2, seed)?;
    out.push(CheckLine::count(S, "dim 𝒦_H − 2 dim 𝒦", sm.dim_k_h.abs_diff(2 * sm.dim_k)));
    out.push(CheckLine::new(S, "U_H unitary", sm.u_h_unitarity.max(sm.u_h_consistency), PIPELINE_TOL));
    out.push(CheckLine::new(S, "star-map column expansion", sm.column_expansion, PIPELINE_TOL));
    out.push(CheckLine::new(S, "star-map inner products", sm.inner_products, PIPELINE_TOL));
    out.push(CheckLine::new(S, "star-map right module rule", sm.right_module, PIPELINE_TOL));
    out.push(CheckLine::new(S, "star-map left module rule", sm.left_module, PIPELINE_TOL));
    if let Some(oracle) = p.oracle_character()? {
        let chi = values_on_group(&ind.corep.character()?);
        let err = oracle.iter().zip(&chi).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        out.push(CheckLine::new(S, "character = Frobenius oracle", err, PIPELINE_TOL));
        let cd = p.classical.as_ref().expect("oracle implies classical data");
        let expect = cd.group.order() / cd.subgroup.len() * cd.rep.dim;
        out.push(CheckLine::count(S, "dim 𝒦 = [G:H] dim u", ind.carrier.rank.abs_diff(expect)));
        if cd.subgroup.len() == cd.group.order() {
            let (_, res) = find_intertwiner(&ind.corep.rho, &p.u, seed)?;
            out.push(CheckLine::new(S, "ρ ≅ U", res, PIPELINE_TOL));
        }
    }
    Ok(out)
}

pub fn correspondence_suite(p: &Problem) -> Result<Vec<CheckLine>> {
    const S: &str = "correspondence";
    let core = &p.bundle.core;
    let cert = wc::certificate(core, 10, p.spec.seed)?;
    let mut out: Vec<CheckLine> = cert
        .cocycle_residuals
        .iter()
        .map(|&(t, r)| CheckLine::new(S, format!("cocycle condition at t = {t:.4}"), r, PIPELINE_TOL))
        .collect();
    out.push(CheckLine::new(S, "round trip η → η̃ → η", cert.roundtrip_error, PIPELINE_TOL));
    let v = &cert.v_phi_residuals;
    out.push(CheckLine::new(S, "V_φ unitary", v.unitarity, PIPELINE_TOL));
    out.push(CheckLine::new(S, "V_φ intertwines", v.intertwining, PIPELINE_TOL));
    out.push(CheckLine::new(S, "(ι⊗Δ_N)(V_φ) = V_φ₁₂V_φ₁₃", v.corep, PIPELINE_TOL));
    out.push(CheckLine::new(S, "V_φ ∈ B(H_φ) ⊗ N", v.membership, PIPELINE_TOL));
    out.push(CheckLine::new(S, "relative-modular commutation", cert.relative_modular, PIPELINE_TOL));
    for &(t, r) in &cert.kappa {
        out.push(CheckLine::new(S, format!("ασ_t = (σ_t⊗κ_-t)α at t = {t}"), r, IMPL_TOL));
    }
    out.push(CheckLine::new(S, "ψ_M((ι⊗ω)α(a)) = ψ_M(a)ω(1)", cert.psi_invariance, STRICT_TOL));
    out.push(CheckLine::new(S, "η̃ invariance", cert.pull_down_invariance, PIPELINE_TOL));
    out.push(CheckLine::new(S, "chain rule", cert.chain_rule, STRICT_TOL));
    if let Some(fails) = cert.counterexample_fails {
        out.push(CheckLine::flag(S, "non-pulled-down weight fails the cocycle test", fails));
    }
    Ok(out)
}

/// Runs one suite, or all of them in parallel.
pub fn run(p: &Problem, suite: Suite) -> Result<Vec<CheckLine>> {
    let one = |s: Suite| -> Result<Vec<CheckLine>> {
        match s {
            Suite::Weights => weights_suite(p),
            Suite::Qgroup => qgroup_suite(p),
            Suite::Action => action_suite(p),
            Suite::Induction => induction_suite(p),
            Suite::Correspondence => correspondence_suite(p),
            Suite::All => unreachable!(),
        }
    };
    if suite != Suite::All {
        return one(suite);
    }
    let all = [Suite::Weights, Suite::Qgroup, Suite::Action, Suite::Induction, Suite::Correspondence];
    let parts = par::map_slice(&all, |&s| one(s));
    let mut out = Vec::new();
    for part in parts {
        out.extend(part?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spec_file::catalog_bundle;

    #[test]
    fn all_suites_pass_on_s3_mod_c3() {
        let spec = catalog_bundle("S3/C3").unwrap();
        let p = Problem::from_spec(&spec).unwrap();
        let lines = run(&p, Suite::All).unwrap();
        let failed: Vec<_> = lines.iter().filter(|l| !l.pass).collect();
        assert!(failed.is_empty(), "{failed:#?}");
        assert!(lines.len() > 60);
    }
}
