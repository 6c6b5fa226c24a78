//! Weights on `M` pulled down from `Q` through `T_α`, the unitaries `V_φ`,
//! the relative-modular commutation, the cocycle test and the converse
//! reconstruction of `η` from `η̃`.

use crate::action::{random_element, ActionCore};
use crate::algebra::{Element, Functional, LegLayout, LinearAlgebraMap, MatFn};
use crate::linalg::{self, c, cr, CMat, CVec, C64};
use crate::quantum_group::pull_back_leg;
use crate::weights::{connes_cocycle, gns, modular_data, relative_modular, Weight};
use crate::{check, par, Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

/// Continuation steps used when extracting the generator of `u_t`.
pub const CONTINUATION_STEPS: usize = 64;

#[derive(Clone, Debug)]
pub struct PulledDown {
    pub weight: Weight,
    /// `|η̃((ι⊗ω_{v,w})α(a)) − ⟨δ^{1/2}v, δ^{1/2}w⟩η̃(a)|` over basis triples.
    pub invariance: f64,
}

fn unit(n: usize, i: usize) -> CVec {
    let mut v = CVec::zeros(n);
    v[i] = cr(1.0);
    v
}

/// `ω_{v,w}` on `N` through its GNS representation.
fn n_vector_functional(core: &ActionCore, v: &CVec, w: &CVec) -> Result<Functional> {
    Functional::vector_through(&core.n.gns.pi, v, w)
}

fn density_of(f: &Functional) -> Result<Element> {
    Ok(Element::from_matrix(f.layout(), f.density())?.0)
}

/// `η̃ = η ∘ T_α`.
pub fn pull_down(core: &ActionCore, eta: &Weight) -> Result<PulledDown> {
    let ml = core.m.layout();
    if eta.layout() != &core.q.layout() {
        return Err(Error::Dimension("η must be a weight on Q".into()));
    }
    let vals = CVec::from_iterator(ml.lin_dim(), (0..ml.lin_dim()).map(|b| eta.eval(&core.t_alpha.apply(&Element::basis(&ml, b)).expect("basis"))));
    let weight = Weight::new(density_of(&Functional::from_values(&ml, &vals)?)?)
        .map_err(|e| Error::Numerical(format!("pulled-down weight is not faithful: {e}")))?;
    let delta = core.n.gns.pi(&core.n.modular_element.matrix_function(MatFn::Sqrt)?);
    let invariance = scaling_residual(core, &weight, &delta)?;
    Ok(PulledDown { weight, invariance })
}

/// `max |φ((ι⊗ω_{v,w})α(a)) − φ(a)⟨g v, g w⟩|` over basis triples, with `g = γ^{1/2}` on `H_N`.
fn scaling_residual(core: &ActionCore, phi: &Weight, g: &CMat) -> Result<f64> {
    let ml = core.m.layout();
    let hn = core.n.gns.dim();
    let images: Vec<Element> = (0..ml.lin_dim()).map(|a| core.alpha.apply(&Element::basis(&ml, a))).collect::<Result<_>>()?;
    let rows: Vec<Result<f64>> = par::map_range(hn * hn, |idx| {
        let (v, w) = (unit(hn, idx / hn), unit(hn, idx % hn));
        let om = n_vector_functional(core, &v, &w)?;
        let scal = (g * &w).dotc(&(g * &v));
        let mut worst: f64 = 0.0;
        for (a, img) in images.iter().enumerate() {
            let lhs = phi.eval(&img.slice(1, &om)?);
            let rhs = phi.eval(&Element::basis(&ml, a)) * scal;
            worst = worst.max((lhs - rhs).norm());
        }
        Ok(worst)
    });
    rows.into_iter().try_fold(0.0, |m, r| Ok(f64::max(m, r?)))
}

/// `ψ_M((ι⊗ω)α(a)) = ψ_M(a)ω(1)` over basis elements and basis functionals.
pub fn psi_invariance(core: &ActionCore) -> Result<f64> {
    let ml = core.m.layout();
    let nl = core.n.layout();
    let psi = &core.m.right_haar;
    let one = Element::identity(&nl);
    let mut worst: f64 = 0.0;
    for b in 0..nl.lin_dim() {
        let om = Functional::from_values(&nl, &unit(nl.lin_dim(), b))?;
        for a in 0..ml.lin_dim() {
            let x = Element::basis(&ml, a);
            let lhs = psi.eval(&core.alpha.apply(&x)?.slice(1, &om)?);
            worst = worst.max((lhs - psi.eval(&x) * om.eval(&one)).norm());
        }
    }
    Ok(worst)
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct VPhiResiduals {
    /// `φ((ι⊗ω_{v,w})α(a)) = φ(a)⟨γ^{1/2}v, γ^{1/2}w⟩`
    pub scaling: f64,
    /// `Δ_N(γ) = γ⊗γ`
    pub gamma_group_like: f64,
    pub consistency: f64,
    pub unitarity: f64,
    /// `(π_φ⊗ι)(α(a))V_φ = V_φ(π_φ(a)⊗1)`
    pub intertwining: f64,
    /// `V_φ ∈ B(H_φ) ⊗ N`
    pub membership: f64,
    /// `(ι⊗Δ_N)(V_φ) = V_φ₁₂V_φ₁₃`
    pub corep: f64,
    /// `‖Λ_φ((ι⊗ω_{v,w})α(a))‖ − ‖Λ_φ(a)‖‖γ^{1/2}v‖‖w‖`, positive part.
    pub column_bound_excess: f64,
}

#[derive(Clone, Debug)]
pub struct VPhi {
    pub v: CMat,
    pub residuals: VPhiResiduals,
}

/// `V_φ(Λ_φ(a)⊗v) = Σ_i Λ_φ((ι⊗ω_{γ^{-1/2}v,e_i})α(a))⊗e_i`.
pub fn build_v_phi(core: &ActionCore, phi: &Weight, gamma: &Element, seed: u64) -> Result<VPhi> {
    let tol = core.tol;
    let nl = core.n.layout();
    if gamma.layout() != &nl {
        return Err(Error::Dimension("γ must lie in N".into()));
    }
    let mut res = VPhiResiduals::default();
    res.gamma_group_like = core.n.comult.apply(gamma)?.dist(&gamma.tensor(gamma));
    let g_half = core.n.gns.pi(&gamma.matrix_function(MatFn::Sqrt)?);
    let g_inv_half = core.n.gns.pi(&gamma.matrix_function(MatFn::InvSqrt)?);
    res.scaling = scaling_residual(core, phi, &g_half)?;
    if res.scaling > tol * 10.0 {
        return Err(Error::Numerical(format!("not a (φ,γ)-invariant pair (scaling residual {:.3e})", res.scaling)));
    }
    let g = gns(phi);
    let ml = core.m.layout();
    let hn = core.n.gns.dim();
    let hp = g.dim();
    let images: Vec<Element> = (0..ml.lin_dim()).map(|a| core.alpha.apply(&Element::basis(&ml, a))).collect::<Result<_>>()?;
    let cols: Vec<Result<(CVec, CVec)>> = par::map_range(ml.lin_dim() * hn, |idx| {
        let (a, j) = (idx / hn, idx % hn);
        let src = g.lambda(&Element::basis(&ml, a)).kronecker(&unit(hn, j));
        let v = &g_inv_half * unit(hn, j);
        let mut dst = CVec::zeros(hp * hn);
        for i in 0..hn {
            let om = n_vector_functional(core, &v, &unit(hn, i))?;
            dst += g.lambda(&images[a].slice(1, &om)?).kronecker(&unit(hn, i));
        }
        Ok((src, dst))
    });
    let (mut srcs, mut dsts) = (Vec::new(), Vec::new());
    for col in cols {
        let (s, d) = col?;
        srcs.push(s);
        dsts.push(d);
    }
    let (v, cons) = linalg::solve_right(&CMat::from_columns(&dsts), &CMat::from_columns(&srcs), 1e-12);
    res.consistency = cons;
    res.unitarity = linalg::unitarity_residual(&v);
    let id_n = CMat::identity(hn, hn);
    for (a, img) in images.iter().enumerate() {
        let lhs = img.map_leg(0, &g.pi)?.map_leg(1, &core.n.gns.pi)?.into_mat() * &v;
        let rhs = &v * g.pi(&Element::basis(&ml, a)).kronecker(&id_n);
        res.intertwining = res.intertwining.max(linalg::op_norm(&(lhs - rhs)));
    }
    let vel = Element::from_matrix_unchecked(&LegLayout::new(vec![g.operators(), core.n.gns.operators()]), v.clone());
    let (vn, memb) = pull_back_leg(&vel, 1, &core.n.gns)?;
    res.membership = memb;
    let l3 = LegLayout::new(vec![g.operators(), core.n.algebra.clone(), core.n.algebra.clone()]);
    res.corep = vn.map_leg(1, &core.n.comult)?.dist(&(&vn.embed(&l3, &[0, 1])? * &vn.embed(&l3, &[0, 2])?));
    // norm bound on random samples
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xb0);
    let mut excess: f64 = 0.0;
    for _ in 0..8 {
        let a = random_element(&ml, &mut rng);
        let v = CVec::from_fn(hn, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        let w = CVec::from_fn(hn, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        let om = n_vector_functional(core, &v, &w)?;
        let lhs = g.lambda(&core.alpha.apply(&a)?.slice(1, &om)?).norm();
        let rhs = g.lambda(&a).norm() * (&g_half * &v).norm() * w.norm();
        excess = excess.max(lhs - rhs);
    }
    res.column_bound_excess = excess.max(0.0);
    Ok(VPhi { v, residuals: res })
}

#[derive(Clone, Debug, Serialize)]
pub struct CommutationReport {
    /// `‖V_{φ₁}(∇⊗γ₁⁻¹P⁻¹) − (∇⊗γ₂⁻¹P⁻¹)V_{φ₁}‖`
    pub residual: f64,
    /// `max ‖[γᵢ, P]‖`
    pub gamma_p_commutator: f64,
    pub v_phi1: VPhiResiduals,
    pub v_phi2: VPhiResiduals,
}

/// Commutation of `V_{φ₁}` with the relative modular operator of `(φ₂, φ₁)`.
pub fn relative_modular_commutation(core: &ActionCore, phi1: &Weight, gamma1: &Element, phi2: &Weight, gamma2: &Element, seed: u64) -> Result<CommutationReport> {
    let v1 = build_v_phi(core, phi1, gamma1, seed)?;
    let v2 = build_v_phi(core, phi2, gamma2, seed)?;
    let nabla = relative_modular(&gns(phi2), &gns(phi1)).nabla;
    let p = &core.n.p;
    let p_inv = linalg::herm_fn(p, |x| cr(1.0 / x));
    let on_hn = |g: &Element| -> Result<CMat> { Ok(core.n.gns.pi(&g.matrix_function(MatFn::Inverse)?)) };
    let (g1, g2) = (on_hn(gamma1)?, on_hn(gamma2)?);
    let comm = |a: &CMat| linalg::op_norm(&(a * p - p * a));
    let lhs = &v1.v * nabla.kronecker(&(&g1 * &p_inv));
    let rhs = nabla.kronecker(&(&g2 * &p_inv)) * &v1.v;
    Ok(CommutationReport {
        residual: linalg::op_norm(&(lhs - rhs)),
        gamma_p_commutator: comm(&g1).max(comm(&g2)),
        v_phi1: v1.residuals,
        v_phi2: v2.residuals,
    })
}

/// `α σ_t^{θ̃} = (σ_t^{θ̃} ⊗ κ_{-t}) α` with `κ_t(x) = δ^{it} τ_t(x) δ^{-it}`.
pub fn kappa_residual(core: &ActionCore, theta_tilde: &Weight, t: f64) -> Result<f64> {
    let ml = core.m.layout();
    let nl = core.n.layout();
    let md = modular_data(theta_tilde, &gns(theta_tilde));
    let sig: Vec<Element> = (0..ml.lin_dim()).map(|b| md.sigma(t, &Element::basis(&ml, b))).collect();
    let sigma = LinearAlgebraMap::from_images(&ml, &ml, &sig)?;
    // κ_{-t}(x) = δ^{-it} τ_{-t}(x) δ^{it}
    let d_left = core.n.modular_element.matrix_function(MatFn::PowerIt(-t))?;
    let d_right = core.n.modular_element.matrix_function(MatFn::PowerIt(t))?;
    let kap: Vec<Element> = (0..nl.lin_dim()).map(|b| &(&d_left * &core.n.tau(-t, &Element::basis(&nl, b))) * &d_right).collect();
    let kappa = LinearAlgebraMap::from_images(&nl, &nl, &kap)?;
    let mut worst: f64 = 0.0;
    for (b, s) in sig.iter().enumerate() {
        let lhs = core.alpha.apply(s)?;
        let rhs = core.alpha.apply(&Element::basis(&ml, b))?.map_leg(0, &sigma)?.map_leg(1, &kappa)?;
        worst = worst.max(lhs.dist(&rhs));
    }
    Ok(worst)
}

#[derive(Clone, Debug, Serialize)]
pub struct CocycleCertificate {
    /// `(t, ‖α((Dφ:Dψ_M)_t) − (Dφ:Dψ_M)_t ⊗ δ^{-it}‖)`
    pub residuals: Vec<(f64, f64)>,
    pub pass: bool,
}

pub fn cocycle_condition(core: &ActionCore, phi: &Weight, t_grid: &[f64]) -> Result<CocycleCertificate> {
    let psi = &core.m.right_haar;
    let rows: Vec<Result<(f64, f64)>> = par::map_slice(t_grid, |&t| {
        let u = connes_cocycle(phi, psi, t)?;
        let d = core.n.modular_element.matrix_function(MatFn::PowerIt(-t))?;
        Ok((t, core.alpha.apply(&u)?.dist(&u.tensor(&d))))
    });
    let residuals: Vec<(f64, f64)> = rows.into_iter().collect::<Result<_>>()?;
    let pass = residuals.iter().all(|&(_, r)| r <= core.tol);
    Ok(CocycleCertificate { residuals, pass })
}

#[derive(Clone, Debug, Serialize)]
pub struct Reconstruction {
    #[serde(skip)]
    pub eta: Option<Weight>,
    /// Largest distance of `(Dφ:Dθ̃)_t` from `Q`.
    pub q_membership: f64,
    /// `c_{s+t} = c_s σ_s^θ(c_t)`
    pub cocycle_identity: f64,
    /// `(Dφ:Dθ̃)_t = (Dφ:Dψ_M)_t (Dψ_M:Dθ̃)_t`
    pub chain_rule: f64,
    /// `u_{s+t} = u_s u_t`
    pub group_law: f64,
    /// `max_k ‖exp(ikB) − u_{k/64}‖` for the step generator `B`.
    pub continuation: f64,
    /// Relative density error `‖pull_down(η) − φ‖ / ‖φ‖`.
    pub roundtrip: f64,
}

/// Recovers `η` on `Q` with `η̃ = φ`.
pub fn reconstruct_eta(core: &ActionCore, phi: &Weight) -> Result<Reconstruction> {
    let tol = core.tol;
    let theta_tilde = pull_down(core, &core.theta)?.weight;
    let psi = &core.m.right_haar;
    let c_in_q = |t: f64| -> Result<(Element, f64)> {
        let ct = connes_cocycle(phi, &theta_tilde, t)?;
        core.q.pull_back(&ct)
    };
    let grid = [0.25, 0.5, 1.0, 1.5];
    let mut memb: f64 = 0.0;
    let mut ident: f64 = 0.0;
    let mut chain: f64 = 0.0;
    let mut group: f64 = 0.0;
    let h_it = |t: f64| core.theta.density().matrix_function(MatFn::PowerIt(t));
    let u_at = |t: f64| -> Result<(Element, f64)> {
        let (c, d) = c_in_q(t)?;
        Ok((&c * &h_it(t)?, d))
    };
    for &s in &grid {
        let a = connes_cocycle(phi, psi, s)?;
        let b = connes_cocycle(psi, &theta_tilde, s)?;
        chain = chain.max(connes_cocycle(phi, &theta_tilde, s)?.dist(&(&a * &b)));
        for &t in &grid {
            let (cs, d1) = c_in_q(s)?;
            let (ct, d2) = c_in_q(t)?;
            let (cst, d3) = c_in_q(s + t)?;
            memb = memb.max(d1).max(d2).max(d3);
            ident = ident.max(cst.dist(&(&cs * &core.theta_modular.sigma(s, &ct))));
            let (us, _) = u_at(s)?;
            let (ut, _) = u_at(t)?;
            let (ust, _) = u_at(s + t)?;
            group = group.max(ust.dist(&(&us * &ut)));
        }
    }
    check("(Dφ:Dθ̃)_t ∈ Q", memb, tol, 1.0)?;
    check("u_{s+t} = u_s u_t", group, tol, 1.0)?;
    let steps = CONTINUATION_STEPS as f64;
    let (w, _) = u_at(1.0 / steps)?;
    let ql = core.q.layout();
    let i = C64::new(0.0, 1.0);
    let sin_b = (&w - &w.adjoint()).scale(-i * 0.5);
    let cos_b = (&w + &w.adjoint()).scale(cr(0.5));
    let (cv, _) = linalg::herm_eig(cos_b.mat());
    if cv.last().copied().unwrap_or(0.0) <= 0.0 {
        return Err(Error::Numerical("step generator leaves the principal branch".into()));
    }
    let b = Element::from_matrix(&ql, &linalg::herm_fn(sin_b.mat(), |x| cr(x.clamp(-1.0, 1.0).asin())))?.0;
    let mut cont: f64 = 0.0;
    for k in 1..=CONTINUATION_STEPS {
        let kf = k as f64;
        let ek = Element::from_matrix(&ql, &linalg::herm_fn(b.mat(), |x| C64::from_polar(1.0, kf * x)))?.0;
        cont = cont.max(ek.dist(&u_at(kf / steps)?.0));
    }
    check("generator continuation", cont, tol, 1.0)?;
    let h_eta = Element::from_matrix(&ql, &linalg::herm_fn(b.mat(), |x| cr((steps * x).exp())))?.0;
    let eta = Weight::new(h_eta)?;
    let back = pull_down(core, &eta)?.weight;
    let roundtrip = back.density().dist(phi.density()) / phi.density().norm();
    Ok(Reconstruction {
        eta: Some(eta),
        q_membership: memb,
        cocycle_identity: ident,
        chain_rule: chain,
        group_law: group,
        continuation: cont,
        roundtrip,
    })
}

/// A random faithful weight on `Q`.
pub fn random_q_weight(core: &ActionCore, rng: &mut ChaCha8Rng) -> Result<Weight> {
    let ql = core.q.layout();
    let x = random_element(&ql, rng);
    let scale = rng.gen_range(0.2..2.0);
    Weight::new(&(&x * &x.adjoint()) + &Element::scalar(&ql, cr(scale)))
}

/// Summary object of the correspondence checks on one bundle.
#[derive(Clone, Debug, Serialize)]
pub struct CorrespondenceCertificate {
    pub cocycle_residuals: Vec<(f64, f64)>,
    pub roundtrip_error: f64,
    #[serde(rename = "V_phi_residuals")]
    pub v_phi_residuals: VPhiResiduals,
    pub counterexample_fails: Option<bool>,
    pub relative_modular: f64,
    pub kappa: Vec<(f64, f64)>,
    pub psi_invariance: f64,
    pub pull_down_invariance: f64,
    pub chain_rule: f64,
}

pub const T_GRID: [f64; 3] = [0.3, 1.0, std::f64::consts::SQRT_2];

/// Runs the suite for `samples` random `η` on `Q`.
pub fn certificate(core: &ActionCore, samples: usize, seed: u64) -> Result<CorrespondenceCertificate> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cocycle: Vec<(f64, f64)> = T_GRID.iter().map(|&t| (t, 0.0)).collect();
    let mut roundtrip: f64 = 0.0;
    let mut inv: f64 = 0.0;
    let mut chain: f64 = 0.0;
    let mut last = None;
    for _ in 0..samples {
        let eta = random_q_weight(core, &mut rng)?;
        let pd = pull_down(core, &eta)?;
        inv = inv.max(pd.invariance);
        let cc = cocycle_condition(core, &pd.weight, &T_GRID)?;
        for (slot, &(t, r)) in cocycle.iter_mut().zip(&cc.residuals) {
            *slot = (t, slot.1.max(r));
        }
        let rec = reconstruct_eta(core, &pd.weight)?;
        roundtrip = roundtrip.max(rec.roundtrip);
        chain = chain.max(rec.chain_rule);
        last = Some(pd.weight);
    }
    let eta_tilde = last.ok_or_else(|| Error::InvalidInput("at least one sample is required".into()))?;
    let one_n = Element::identity(&core.n.layout());
    let delta = core.n.modular_element.clone();
    let vphi = build_v_phi(core, &core.m.right_haar, &one_n, seed)?;
    let rel = relative_modular_commutation(core, &eta_tilde, &delta, &core.m.right_haar, &one_n, seed)?;
    let theta_tilde = pull_down(core, &core.theta)?.weight;
    let kappa = [0.5, 1.0].iter().map(|&t| Ok((t, kappa_residual(core, &theta_tilde, t)?))).collect::<Result<Vec<_>>>()?;
    Ok(CorrespondenceCertificate {
        cocycle_residuals: cocycle,
        roundtrip_error: roundtrip,
        v_phi_residuals: vphi.residuals,
        counterexample_fails: non_pulled_down_fails(core)?,
        relative_modular: rel.residual,
        kappa,
        psi_invariance: psi_invariance(core)?,
        pull_down_invariance: inv,
        chain_rule: chain,
    })
}

/// A weight `ψ_M(h ·)` with `h` outside `Q`; `None` when `Q = M`.
pub fn non_pulled_down_weight(core: &ActionCore) -> Result<Option<Weight>> {
    let ml = core.m.layout();
    if core.q.dim() == ml.lin_dim() {
        return Ok(None);
    }
    let d = ml.real_dim();
    let h = CMat::from_diagonal(&CVec::from_fn(d, |i, _| cr(1.0 + i as f64)));
    let (h, _) = Element::from_matrix(&ml, &h)?;
    if core.q.distance(&h) < 1e-3 {
        return Ok(None);
    }
    let psi = core.m.right_haar.density();
    let hh = h.matrix_function(MatFn::Sqrt)?;
    Ok(Some(Weight::new(&(&hh * psi) * &hh)?))
}

fn non_pulled_down_fails(core: &ActionCore) -> Result<Option<bool>> {
    match non_pulled_down_weight(core)? {
        None => Ok(None),
        Some(w) => Ok(Some(!cocycle_condition(core, &w, &T_GRID)?.pass)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{self, FiniteGroup};

    const TOL: f64 = 1e-9;

    fn s3_c3() -> (FiniteGroup, Vec<usize>, ActionCore) {
        let g = FiniteGroup::s3().unwrap();
        let h = g.subgroup_by_spec("C3").unwrap();
        let m = catalog::function_algebra(&g, TOL).unwrap();
        let n = catalog::function_algebra(&g.restrict(&h).unwrap(), TOL).unwrap();
        let alpha = catalog::subgroup_action_map(&g, &h).unwrap();
        (g, h.clone(), ActionCore::new(m, n, alpha, None, TOL).unwrap())
    }

    #[test]
    fn counting_weight_on_cosets_pulls_down_to_one_third() {
        let (g, _, core) = s3_c3();
        let ql = core.q.layout();
        let counting = Weight::trace(&ql);
        let pd = pull_down(&core, &counting).unwrap();
        let vals = catalog::values_on_group(pd.weight.density());
        assert_eq!(vals.len(), g.order());
        for v in vals {
            assert!((v - cr(1.0 / 3.0)).norm() < 1e-12);
        }
        assert!(pd.invariance < 1e-12);
    }

    #[test]
    fn pull_down_is_additive() {
        let (_, _, core) = s3_c3();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = random_q_weight(&core, &mut rng).unwrap();
        let b = random_q_weight(&core, &mut rng).unwrap();
        let lhs = pull_down(&core, &a.add(&b).unwrap()).unwrap().weight;
        let rhs = pull_down(&core, &a).unwrap().weight.add(&pull_down(&core, &b).unwrap().weight).unwrap();
        assert!(lhs.density().dist(rhs.density()) < 1e-12);
    }

    #[test]
    fn v_phi_for_right_haar() {
        let (_, _, core) = s3_c3();
        let one = Element::identity(&core.n.layout());
        let v = build_v_phi(&core, &core.m.right_haar, &one, 1).unwrap();
        let r = &v.residuals;
        for x in [r.unitarity, r.intertwining, r.corep, r.membership, r.consistency] {
            assert!(x < 1e-9, "{r:?}");
        }
        assert!(r.column_bound_excess < 1e-12);
        assert!(psi_invariance(&core).unwrap() < 1e-10);
    }

    #[test]
    fn trivial_action_gives_identity_v_phi() {
        let g = FiniteGroup::s3().unwrap();
        let m = catalog::function_algebra(&g, TOL).unwrap();
        let n = catalog::function_algebra(&FiniteGroup::cyclic(1).unwrap(), TOL).unwrap();
        let alpha = catalog::trivial_action_map(&m.algebra).unwrap();
        let core = ActionCore::new(m, n, alpha, None, TOL).unwrap();
        let one = Element::identity(&core.n.layout());
        let v = build_v_phi(&core, &core.m.haar, &one, 2).unwrap();
        assert!(linalg::op_norm(&(&v.v - CMat::identity(v.v.nrows(), v.v.nrows()))) < 1e-12);
        let eta = pull_down(&core, &core.theta).unwrap();
        assert!(eta.weight.density().dist(core.theta.density()) < 1e-12);
    }

    #[test]
    fn cocycle_and_roundtrip_for_random_weights() {
        let (_, _, core) = s3_c3();
        let cert = certificate(&core, 4, 11).unwrap();
        for &(_, r) in &cert.cocycle_residuals {
            assert!(r < 1e-8, "{cert:?}");
        }
        assert!(cert.roundtrip_error < 1e-8);
        assert_eq!(cert.counterexample_fails, Some(true));
        assert!(cert.relative_modular < 1e-9);
        assert!(cert.kappa.iter().all(|&(_, r)| r < 1e-9));
        assert!(cert.chain_rule < 1e-10);
    }

    #[test]
    fn reconstruction_of_theta_and_its_multiple() {
        let (_, _, core) = s3_c3();
        let tt = pull_down(&core, &core.theta).unwrap().weight;
        let rec = reconstruct_eta(&core, &tt).unwrap();
        assert!(rec.eta.unwrap().density().dist(core.theta.density()) < 1e-10);
        let rec2 = reconstruct_eta(&core, &tt.scale(2.0).unwrap()).unwrap();
        assert!(rec2.eta.unwrap().density().dist(core.theta.scale(2.0).unwrap().density()) < 1e-10);
    }
}
