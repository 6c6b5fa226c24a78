//! Actions `α : M → M ⊗ N` of a quantum subgroup, the fixed-point algebra `Q`,
//! the left action `β` of `M` on `Q`, its unitary implementation `Υ`, and the
//! map `T_α = (ι ⊗ φ_N)α`.

use crate::algebra::{generated_subalgebra, Element, Functional, LegLayout, LinearAlgebraMap, MultiMatrixAlgebra, Subalgebra};
use crate::linalg::{self, antilinear_polar, AntiLinear, CMat, CVec, C64};
use crate::quantum_group::{coassociativity_residual, pull_back_leg, DualQuantumGroup, QuantumGroup};
use crate::weights::{gns, modular_data, star_permutation, GNSData, ModularData, Weight};
use crate::{check, Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

#[derive(Clone, Debug, Default, Serialize)]
pub struct ActionResiduals {
    pub star_hom: f64,
    pub unital: f64,
    /// `(α ⊗ ι)α = (ι ⊗ Δ_N)α`
    pub action_identity: f64,
    /// `(Δ_M ⊗ ι)α = (ι ⊗ α)Δ_M`
    pub compatibility: f64,
    pub fixed_points: f64,
    /// `Δ_M(Q) ⊆ M ⊗ Q`
    pub comult_into_q: f64,
    pub beta_star_hom: f64,
    pub beta_coassociative: f64,
    pub t_alpha_membership: f64,
    pub t_alpha_bimodule: f64,
    pub t_alpha_positivity: f64,
    pub t_alpha_unit: f64,
    pub slice_bound: f64,
}

/// One candidate for `Υ` with its certificates.
#[derive(Clone, Debug, Serialize)]
pub struct UpsilonCandidate {
    pub label: String,
    pub membership: f64,
    pub impl1: f64,
    pub impl2: f64,
    pub passes: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct UpsilonReport {
    pub source: String,
    pub candidates: Vec<UpsilonCandidate>,
    /// More than one essentially distinct candidate passed.
    pub non_unique: bool,
    pub impl1: f64,
    pub impl2: f64,
    /// Consistency of the dual-weight prescription on the crossed product.
    pub prescription: f64,
    /// `Λ̃(cd) = cΛ̃(d)` on the crossed product.
    pub module_property: f64,
    pub closed_form_impl: Option<(f64, f64)>,
}

/// Everything attached to an action except its implementation.
#[derive(Clone, Debug)]
pub struct ActionCore {
    pub m: QuantumGroup,
    pub n: QuantumGroup,
    pub alpha: LinearAlgebraMap,
    pub q: Subalgebra,
    pub theta: Weight,
    pub theta_gns: GNSData,
    pub theta_modular: ModularData,
    /// `β : Q → M ⊗ Q`, `β(x) = Δ_M(x)`.
    pub beta: LinearAlgebraMap,
    /// `T_α : M → Q`.
    pub t_alpha: LinearAlgebraMap,
    pub residuals: ActionResiduals,
    pub tol: f64,
}

#[derive(Clone, Debug)]
pub struct ActionBundle {
    pub core: ActionCore,
    /// `Υ ∈ M ⊗ B(H_θ)`.
    pub upsilon: Element,
    pub upsilon_report: UpsilonReport,
}

impl std::ops::Deref for ActionBundle {
    type Target = ActionCore;
    fn deref(&self) -> &ActionCore {
        &self.core
    }
}

fn unit_element(q: &Subalgebra, b: usize) -> Element {
    Element::basis(&q.layout(), b)
}

impl ActionCore {
    /// Validates `α`, computes `Q`, `β`, `T_α`. `theta` is a density on the
    /// recovered algebra of `Q` (block trace when absent).
    pub fn new(m: QuantumGroup, n: QuantumGroup, alpha: LinearAlgebraMap, theta: Option<Element>, tol: f64) -> Result<Self> {
        let ml = m.layout();
        let nl = n.layout();
        let mn = LegLayout::new(vec![m.algebra.clone(), n.algebra.clone()]);
        if alpha.source != ml || alpha.target != mn {
            return Err(Error::Dimension("α must map M into M ⊗ N".into()));
        }
        let mut r = ActionResiduals { star_hom: alpha.star_hom_residual(), unital: alpha.unital_residual(), ..Default::default() };
        check("α ∗-homomorphism", r.star_hom, tol, 1.0)?;
        check("α unital", r.unital, tol, 1.0)?;
        if linalg::rank(&alpha.matrix, 1e-10) != ml.lin_dim() {
            return Err(Error::InvalidInput("α is not injective".into()));
        }
        let dim = ml.lin_dim();
        let basis: Vec<Element> = (0..dim).map(|b| Element::basis(&ml, b)).collect();
        let images: Vec<Element> = basis.iter().map(|x| alpha.apply(x)).collect::<Result<_>>()?;
        let mut act: f64 = 0.0;
        let mut comp: f64 = 0.0;
        for (x, ax) in basis.iter().zip(&images) {
            let lhs = ax.map_leg(0, &alpha)?;
            let rhs = ax.map_leg(1, &n.comult)?;
            act = act.max(lhs.dist(&rhs));
            let dx = m.comult.apply(x)?;
            let lhs = ax.map_leg(0, &m.comult)?;
            let rhs = dx.map_leg(1, &alpha)?;
            comp = comp.max(lhs.dist(&rhs));
        }
        r.action_identity = act;
        r.compatibility = comp;
        check("(α⊗ι)α = (ι⊗Δ_N)α", act, tol, 1.0)?;
        check("(Δ_M⊗ι)α = (ι⊗α)Δ_M", comp, tol, 1.0)?;

        // Q = ker(x ↦ α(x) − x⊗1)
        let one_n = Element::identity(&nl);
        let mut sys = alpha.matrix.clone();
        for (b, x) in basis.iter().enumerate() {
            let c = x.tensor(&one_n).coeffs();
            for i in 0..sys.nrows() {
                sys[(i, b)] -= c[i];
            }
        }
        let ker = linalg::null_space_abs(&sys, tol.max(1e-12) * 10.0);
        let gens: Vec<Element> = (0..ker.ncols()).map(|k| Element::from_coeffs(&ml, &ker.column(k).into_owned())).collect::<Result<_>>()?;
        let q = generated_subalgebra(&ml, &gens, tol)?;
        if q.dim() != ker.ncols() {
            return Err(Error::Numerical(format!("fixed points have dimension {} but generate {}", ker.ncols(), q.dim())));
        }
        r.fixed_points = q
            .units
            .iter()
            .map(|u| alpha.apply(u).map(|a| a.dist(&u.tensor(&one_n))))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .fold(0.0, f64::max);
        check("fixed-point algebra", r.fixed_points, tol, 1.0)?;

        let ql = q.layout();
        let theta = match theta {
            Some(h) => Weight::new(h)?,
            None => Weight::trace(&ql),
        };
        if theta.layout() != &ql {
            return Err(Error::Dimension("θ must be a weight on Q".into()));
        }
        let theta_gns = gns(&theta);
        let theta_modular = modular_data(&theta, &theta_gns);

        // β(x) = Δ_M(x) with the second leg pulled back to Q
        let mq = LegLayout::new(vec![m.algebra.clone(), q.algebra.clone()]);
        let mut beta_imgs = Vec::with_capacity(q.dim());
        let mut into_q: f64 = 0.0;
        for b in 0..q.dim() {
            let dx = m.comult.apply(&q.units[b])?;
            let y = dx.map_leg(1, &q.projection)?;
            into_q = into_q.max(y.map_leg(1, &q.embedding)?.dist(&dx));
            beta_imgs.push(y);
        }
        r.comult_into_q = into_q;
        check("Δ_M(Q) ⊆ M ⊗ Q", into_q, tol, 1.0)?;
        let beta = LinearAlgebraMap::from_images(&ql, &mq, &beta_imgs)?;
        r.beta_star_hom = beta.star_hom_residual();
        // (Δ_M ⊗ ι)β = (ι ⊗ β)β
        let mut bc: f64 = 0.0;
        for img in &beta_imgs {
            bc = bc.max(img.map_leg(0, &m.comult)?.dist(&img.map_leg(1, &beta)?));
        }
        r.beta_coassociative = bc;

        // T_α = (ι ⊗ φ_N)α
        let phi_n = n.haar.functional();
        let mut t_imgs = Vec::with_capacity(dim);
        let mut memb: f64 = 0.0;
        for ax in &images {
            let s = ax.slice(1, &phi_n)?;
            let (y, d) = q.pull_back(&s)?;
            memb = memb.max(d);
            t_imgs.push(y);
        }
        r.t_alpha_membership = memb;
        let t_alpha = LinearAlgebraMap::from_images(&ml, &ql, &t_imgs)?;
        let core = Self { m, n, alpha, q, theta, theta_gns, theta_modular, beta, t_alpha, residuals: r, tol };
        let mut core = core;
        core.certify_t_alpha()?;
        Ok(core)
    }

    /// `T_α(x)` as an element of `M`.
    pub fn t_alpha_in_m(&self, x: &Element) -> Result<Element> {
        self.q.embed(&self.t_alpha.apply(x)?)
    }

    fn certify_t_alpha(&mut self) -> Result<()> {
        let ml = self.m.layout();
        let dim = ml.lin_dim();
        let mut bim: f64 = 0.0;
        for a in &self.q.units {
            for b in &self.q.units {
                for x in 0..dim {
                    let e = Element::basis(&ml, x);
                    let lhs = self.t_alpha_in_m(&(&(a * &e) * b))?;
                    let rhs = &(a * &self.t_alpha_in_m(&e)?) * b;
                    bim = bim.max(lhs.dist(&rhs));
                }
            }
        }
        self.residuals.t_alpha_bimodule = bim;
        let mut rng = ChaCha8Rng::seed_from_u64(0x7a1);
        let mut neg: f64 = 0.0;
        let mut slice_excess: f64 = 0.0;
        for _ in 0..8 {
            let x = random_element(&ml, &mut rng);
            let t = self.t_alpha_in_m(&(&x.adjoint() * &x))?;
            let (vals, _) = linalg::herm_eig(t.mat());
            neg = neg.max(-vals.iter().copied().fold(0.0, f64::min));
            // ‖(ι⊗Λ_N)α((ω⊗ι)Δ(x))‖ ≤ ‖ω‖ ‖(ι⊗Λ_N)α(x)‖
            let om = random_functional(&ml, &mut rng);
            let y = self.m.comult.apply(&x)?.slice(0, &om)?;
            let lhs = self.gns_slice_norm(&y)?;
            let rhs = om.norm() * self.gns_slice_norm(&x)?;
            slice_excess = slice_excess.max(lhs - rhs);
        }
        self.residuals.t_alpha_positivity = neg;
        self.residuals.slice_bound = slice_excess.max(0.0);
        self.residuals.t_alpha_unit = self.t_alpha_in_m(&Element::identity(&ml))?.dist(&Element::identity(&ml));
        let tol = self.tol;
        check("T_α(M) ⊆ Q", self.residuals.t_alpha_membership, tol, 1.0)?;
        check("T_α bimodule property", bim, tol, 1.0)?;
        check("T_α positivity", neg, tol, 1.0)?;
        Ok(())
    }

    /// `‖(ι ⊗ Λ_N)(α(x))‖ = ‖(ι ⊗ φ_N)(α(x)*α(x))‖^{1/2}`.
    pub fn gns_slice_norm(&self, x: &Element) -> Result<f64> {
        let ax = self.alpha.apply(x)?;
        let s = (&ax.adjoint() * &ax).slice(1, &self.n.haar.functional())?;
        Ok(s.norm().sqrt())
    }

    /// Integrability: `rank T_α(M) = dim Q` and `T_α(1) = 1`.
    pub fn integrability(&self) -> IntegrabilityReport {
        let rank = linalg::rank(&self.t_alpha.matrix, 1e-10);
        IntegrabilityReport {
            integrable: rank == self.q.dim() && self.residuals.t_alpha_unit <= self.tol,
            rank,
            dim_q: self.q.dim(),
            unit_residual: self.residuals.t_alpha_unit,
        }
    }

    pub fn q_layout(&self) -> LegLayout {
        self.q.layout()
    }

    /// Dimension of `H_θ`.
    pub fn h_theta(&self) -> usize {
        self.theta_gns.dim()
    }

    /// `π_θ : Q → B(H_θ)`.
    pub fn pi_theta(&self) -> &LinearAlgebraMap {
        &self.theta_gns.pi
    }

    /// `(ι ⊗ π_θ)β` as a map `Q → M ⊗ B(H_θ)`.
    pub fn beta_theta(&self, x: &Element) -> Result<Element> {
        self.beta.apply(x)?.map_leg(1, &self.theta_gns.pi)
    }

    /// impl1 and impl2 residuals of a unitary `Υ ∈ M ⊗ B(H_θ)`.
    pub fn impl_residuals(&self, ups: &Element) -> Result<(f64, f64)> {
        let bh = self.theta_gns.operators();
        let m_bh = LegLayout::new(vec![self.m.algebra.clone(), bh.clone()]);
        if ups.layout() != &m_bh {
            return Err(Error::Dimension("Υ must lie in M ⊗ B(H_θ)".into()));
        }
        let one_m = Element::identity(&self.m.layout());
        let mut i1: f64 = 0.0;
        for b in 0..self.q.dim() {
            let x = unit_element(&self.q, b);
            let lhs = self.beta_theta(&x)?;
            let px = self.theta_gns.pi.apply(&x)?;
            let rhs = &(&ups.adjoint() * &one_m.tensor(&px)) * ups;
            i1 = i1.max(lhs.dist(&rhs));
        }
        let mmb = LegLayout::new(vec![self.m.algebra.clone(), self.m.algebra.clone(), bh]);
        let lhs = ups.map_leg(0, &self.m.comult)?;
        let rhs = &ups.embed(&mmb, &[0, 2])? * &ups.embed(&mmb, &[1, 2])?;
        Ok((i1, lhs.dist(&rhs)))
    }

    /// Wraps an externally supplied `Υ` after certifying it.
    pub fn with_upsilon(self, ups: Element, source: &str) -> Result<ActionBundle> {
        let accept = self.tol * 10.0;
        check("Υ unitary", linalg::unitarity_residual(ups.mat()), self.tol, 1.0)?;
        let (i1, i2) = self.impl_residuals(&ups)?;
        check("Υ impl1", i1, accept, 1.0)?;
        check("Υ impl2", i2, accept, 1.0)?;
        let report = UpsilonReport {
            source: source.to_string(),
            candidates: Vec::new(),
            non_unique: false,
            impl1: i1,
            impl2: i2,
            prescription: f64::NAN,
            module_property: f64::NAN,
            closed_form_impl: None,
        };
        Ok(ActionBundle { core: self, upsilon: ups, upsilon_report: report })
    }

    /// Builds `Υ` from the crossed product and certifies it; `fallback` is used
    /// only if no crossed-product candidate passes.
    pub fn implement(self, dual: &DualQuantumGroup, fallback: Option<(Element, String)>) -> Result<ActionBundle> {
        let tol = self.tol;
        let accept = tol * 10.0;
        let crossed = crossed_product_candidates(&self, dual);
        let (mut candidates, prescription, module_property) = match &crossed {
            Ok((c, p, mp)) => (c.clone(), *p, *mp),
            Err(_) => (Vec::new(), f64::INFINITY, f64::INFINITY),
        };
        let mut reports = Vec::new();
        let mut passing: Vec<(usize, Element)> = Vec::new();
        for (k, (label, op)) in candidates.drain(..).enumerate() {
            let el = Element::from_matrix_unchecked(&LegLayout::new(vec![self.m.operators(), self.theta_gns.operators()]), op);
            let (ups, memb) = pull_back_leg(&el, 0, &self.m.gns)?;
            let (i1, i2) = self.impl_residuals(&ups)?;
            let passes = memb <= accept && i1 <= accept && i2 <= accept;
            reports.push(UpsilonCandidate { label, membership: memb, impl1: i1, impl2: i2, passes });
            if passes {
                passing.push((k, ups));
            }
        }
        let mut distinct: Vec<&Element> = Vec::new();
        for (_, u) in &passing {
            if distinct.iter().all(|d| d.dist(u) > accept) {
                distinct.push(u);
            }
        }
        let non_unique = distinct.len() > 1;
        let closed = match &fallback {
            Some((u, _)) => Some(self.impl_residuals(u)?),
            None => None,
        };
        let (source, ups) = if let Some((k, u)) = passing.first() {
            (format!("crossed product: {}", reports[*k].label), u.clone())
        } else if let Some((u, label)) = fallback {
            let (i1, i2) = closed.expect("computed");
            if i1 > accept || i2 > accept {
                return Err(Error::Numerical(format!(
                    "no implementation passes: crossed product {crossed_err}, closed form impl1 {i1:.3e} impl2 {i2:.3e}",
                    crossed_err = describe(&crossed, &reports)
                )));
            }
            (format!("closed form: {label}"), u)
        } else {
            return Err(Error::Numerical(format!("no implementation passes: {}", describe(&crossed, &reports))));
        };
        let unit = linalg::unitarity_residual(ups.mat());
        check("Υ unitary", unit, tol, 1.0)?;
        let (i1, i2) = self.impl_residuals(&ups)?;
        let report = UpsilonReport {
            source,
            candidates: reports,
            non_unique,
            impl1: i1,
            impl2: i2,
            prescription,
            module_property,
            closed_form_impl: closed,
        };
        Ok(ActionBundle { core: self, upsilon: ups, upsilon_report: report })
    }
}

fn describe(crossed: &Result<Crossed>, reports: &[UpsilonCandidate]) -> String {
    match crossed {
        Err(e) => format!("construction failed ({e})"),
        Ok(_) => reports
            .iter()
            .map(|r| format!("{}: membership {:.2e} impl1 {:.2e} impl2 {:.2e}", r.label, r.membership, r.impl1, r.impl2))
            .collect::<Vec<_>>()
            .join("; "),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct IntegrabilityReport {
    pub integrable: bool,
    pub rank: usize,
    pub dim_q: usize,
    pub unit_residual: f64,
}

/// Candidates for `Υ` as operators on `H_M ⊗ H_θ`, together with the
/// consistency residual of the dual-weight prescription and its module defect.
/// Labelled candidates, prescription residual, module-property residual.
type Crossed = (Vec<(String, CMat)>, f64, f64);

fn crossed_product_candidates(core: &ActionCore, dual: &DualQuantumGroup) -> Result<Crossed> {
    let tol = core.tol;
    let n = core.m.gns.dim();
    let qd = core.h_theta();
    let amb = LegLayout::new(vec![MultiMatrixAlgebra::full(n), MultiMatrixAlgebra::full(qd)]);
    let id_q = Element::identity(&MultiMatrixAlgebra::full(qd).layout());
    let beta_ops: Vec<Element> = (0..core.q.dim())
        .map(|b| -> Result<Element> {
            let y = core.beta_theta(&unit_element(&core.q, b))?;
            y.map_leg(0, &core.m.gns.pi)
        })
        .collect::<Result<_>>()?;
    let dl = dual.sub.layout();
    let hat_ops: Vec<Element> = (0..dual.sub.dim())
        .map(|b| -> Result<Element> { Ok(dual.sub.embed(&Element::basis(&dl, b))?.tensor(&id_q)) })
        .collect::<Result<_>>()?;
    let gens: Vec<Element> = beta_ops.iter().chain(hat_ops.iter()).cloned().collect();
    let c = generated_subalgebra(&amb, &gens, tol)?;
    let cdim = c.dim();
    if cdim != n * qd {
        return Err(Error::Numerical(format!("crossed product has dimension {cdim}, expected {}", n * qd)));
    }
    // Λ̃((a ⊗ 1)β(x)) = Λ̂(a) ⊗ Λ_θ(x)
    let fam = dual.sub.dim() * core.q.dim();
    let mut src = CMat::zeros(cdim, fam);
    let mut dst = CMat::zeros(n * qd, fam);
    let mut member: f64 = 0.0;
    for a in 0..dual.sub.dim() {
        let la = &dual.lambda_hat * Element::basis(&dl, a).coeffs();
        for x in 0..core.q.dim() {
            let col = a * core.q.dim() + x;
            let prod = &hat_ops[a] * &beta_ops[x];
            let (pc, d) = c.pull_back(&prod)?;
            member = member.max(d);
            src.set_column(col, &pc.coeffs());
            let lx = core.theta_gns.lambda(&unit_element(&core.q, x));
            dst.set_column(col, &la.kronecker(&lx));
        }
    }
    let (lt, res) = linalg::solve_right(&dst, &src, 1e-12);
    let prescription = res.max(member);
    if linalg::rank(&lt, 1e-10) != cdim {
        return Err(Error::Numerical("dual-weight GNS map on the crossed product is not injective".into()));
    }
    // module property Λ̃(cd) = cΛ̃(d) over matrix units
    let cl = c.layout();
    let mut module: f64 = 0.0;
    for i in 0..cdim {
        let ci = Element::basis(&cl, i);
        let ci_op = c.embed(&ci)?;
        for j in 0..cdim {
            let cj = Element::basis(&cl, j);
            let lhs = &lt * (&ci * &cj).coeffs();
            let rhs = ci_op.mat() * (&lt * cj.coeffs());
            module = module.max((lhs - rhs).norm());
        }
    }
    let p = star_permutation(&cl);
    let lt_inv = linalg::pinv(&lt, 1e-14);
    let t = AntiLinear::new(&lt * p * lt_inv.conjugate());
    let (j_tilde, _) = antilinear_polar(&t);
    let j_theta = &core.theta_modular.j;
    let cand = |jm: &AntiLinear| j_tilde.compose(&jm.kron(j_theta));
    let a = cand(&dual.j_hat);
    let b = cand(&core.m.modular.j);
    Ok((
        vec![
            ("J̃(Ĵ⊗J_θ)".to_string(), a.clone()),
            ("(J̃(Ĵ⊗J_θ))*".to_string(), a.adjoint()),
            ("J̃(J_M⊗J_θ)".to_string(), b.clone()),
            ("(J̃(J_M⊗J_θ))*".to_string(), b.adjoint()),
        ],
        prescription,
        module,
    ))
}

pub(crate) fn random_element(l: &LegLayout, rng: &mut ChaCha8Rng) -> Element {
    let c = CVec::from_fn(l.lin_dim(), |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    Element::from_coeffs(l, &c).expect("dimension")
}

pub(crate) fn random_functional(l: &LegLayout, rng: &mut ChaCha8Rng) -> Functional {
    let c = CVec::from_fn(l.lin_dim(), |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    Functional::from_values(l, &c).expect("dimension")
}

/// `σ*_z(ω) = ω ∘ σ_z^{ψ_N}`.
pub fn sigma_star(n: &QuantumGroup, z: C64, om: &Functional) -> Result<Functional> {
    let l = n.layout();
    let g = gns(&n.right_haar);
    let md = modular_data(&n.right_haar, &g);
    let vals = CVec::from_fn(l.lin_dim(), |b, _| om.eval(&md.sigma_z(z, &Element::basis(&l, b))));
    Functional::from_values(&l, &vals)
}

/// Operator `(ι ⊗ Λ ⊗ ι)(Y)` obtained by applying a GNS map to leg `leg` of
/// `Y`; the other legs act through their block realization. Maps
/// `ℂ^{pre} ⊗ ℂ^{post}` into `ℂ^{pre} ⊗ H ⊗ ℂ^{post}`.
pub fn leg_gns(y: &Element, leg: usize, g: &GNSData) -> Result<CMat> {
    let l = y.layout();
    if leg >= l.legs() || l.factor(leg) != g.layout().factor(0) {
        return Err(Error::Dimension(format!("GNS map does not act on leg {leg}")));
    }
    let lins = l.lin_dims();
    let reals = l.real_dims();
    let pre_l: usize = lins[..leg].iter().product();
    let post_l: usize = lins[leg + 1..].iter().product();
    let pre_r: usize = reals[..leg].iter().product();
    let post_r: usize = reals[leg + 1..].iter().product();
    let k = lins[leg];
    let h = g.dim();
    let rest = l.without_leg(leg);
    let coeffs = y.coeffs();
    let fl = l.factor(leg).layout();
    let mut out = CMat::zeros(pre_r * h * post_r, pre_r * post_r);
    for b in 0..k {
        let cb = CVec::from_fn(pre_l * post_l, |i, _| {
            let (p, s) = (i / post_l, i % post_l);
            coeffs[(p * k + b) * post_l + s]
        });
        if cb.iter().all(|z| z.norm() == 0.0) {
            continue;
        }
        let eb = Element::from_coeffs(&rest, &cb)?;
        let lam = g.lambda(&Element::basis(&fl, b));
        let m = eb.mat();
        for pr in 0..pre_r {
            for hi in 0..h {
                for po in 0..post_r {
                    let row = (pr * h + hi) * post_r + po;
                    for pc in 0..pre_r {
                        for qc in 0..post_r {
                            out[(row, pc * post_r + qc)] += lam[hi] * m[(pr * post_r + po, pc * post_r + qc)];
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Residuals of the two analytic slice identities for a corepresentation `U`
/// of `N` on `ℂ^d`, a functional `ω` on `N`, `a ∈ N`, and `X ∈ M ⊗ N`.
#[derive(Clone, Debug, Serialize)]
pub struct SliceLemmaReport {
    pub single_leg: f64,
    pub lifted: f64,
    pub sigma_star_trivial: f64,
}

pub fn analytic_slice_lemmas(core: &ActionCore, u: &Element, om: &Functional, a: &Element, x: &Element) -> Result<SliceLemmaReport> {
    let n = &core.n;
    let nl = n.layout();
    let d = u.layout().factor(1).real_dim();
    let bk = MultiMatrixAlgebra::full(d).layout();
    let i = C64::new(0.0, 1.0);
    let om_an = sigma_star(n, i * 0.5, om)?;
    let sigma_trivial = (om_an.values() - om.values()).norm();
    // (ω ⊗ ι)(U*) and (σ*_{i/2}(ω) R ⊗ ι)(U)
    let b = u.adjoint().slice(0, om)?;
    let om_r_vals = CVec::from_fn(nl.lin_dim(), |k, _| om_an.eval(&n.unitary_antipode.apply(&Element::basis(&nl, k)).expect("basis")));
    let om_r = Functional::from_values(&nl, &om_r_vals)?;
    let cmat = u.slice(0, &om_r)?;
    // (TR ⊗ ι)(U) on H_N ⊗ K
    let hn = n.gns.operators().layout();
    let tr_imgs: Vec<Element> = (0..nl.lin_dim())
        .map(|k| -> Result<Element> {
            let r = n.unitary_antipode.apply(&Element::basis(&nl, k))?;
            Ok(Element::from_matrix_unchecked(&hn, n.modular.t_j(&n.gns.pi(&r))))
        })
        .collect::<Result<_>>()?;
    let trmap = LinearAlgebraMap::from_images(&nl, &hn, &tr_imgs)?;
    let tru = u.map_leg(0, &trmap)?.into_mat();
    let hdim = n.gns.dim();

    // single leg
    let z = &a.tensor(&b) * &u.adjoint();
    let lhs = leg_gns(&z, 0, &n.gns)?;
    let la = n.gns.lambda(a);
    let rhs = CMat::identity(hdim, hdim).kronecker(cmat.mat()) * &tru * CMat::from_column_slice(hdim, 1, la.as_slice()).kronecker(&CMat::identity(d, d));
    let single = linalg::op_norm(&(lhs - rhs));

    // lifted to X ∈ M ⊗ N
    let ml = core.m.layout();
    let mnk = LegLayout::new(vec![core.m.algebra.clone(), n.algebra.clone(), bk.factor(0).clone()]);
    let xb = x.tensor(&Element::from_matrix_unchecked(&bk, b.mat().clone()));
    let u23 = u.adjoint().embed(&mnk, &[1, 2])?;
    let y = &xb * &u23;
    let lhs = leg_gns(&y, 1, &n.gns)?;
    let rm = ml.real_dim();
    let xg = leg_gns(x, 1, &n.gns)?;
    let rhs = CMat::identity(rm * hdim, rm * hdim).kronecker(cmat.mat())
        * CMat::identity(rm, rm).kronecker(&tru)
        * xg.kronecker(&CMat::identity(d, d));
    let lifted = linalg::op_norm(&(lhs - rhs));
    Ok(SliceLemmaReport { single_leg: single, lifted, sigma_star_trivial: sigma_trivial })
}

/// Corepresentation identity `(Δ_N ⊗ ι)(U) = U₁₃U₂₃` and unitarity.
pub fn corep_residual(n: &QuantumGroup, u: &Element) -> Result<f64> {
    let l = u.layout();
    if l.legs() != 2 || l.factor(0) != &n.algebra {
        return Err(Error::Dimension("corepresentation must lie in N ⊗ B(K)".into()));
    }
    let nnk = LegLayout::new(vec![n.algebra.clone(), n.algebra.clone(), l.factor(1).clone()]);
    let lhs = u.map_leg(0, &n.comult)?;
    let rhs = &u.embed(&nnk, &[0, 2])? * &u.embed(&nnk, &[1, 2])?;
    Ok(lhs.dist(&rhs).max(linalg::unitarity_residual(u.mat())))
}

/// Whether `β` is a coassociative left action (both sides of `(Δ⊗ι)β = (ι⊗β)β`).
pub fn beta_is_action(core: &ActionCore) -> bool {
    core.residuals.beta_coassociative <= core.tol && coassociativity_residual(&core.m.comult).map(|r| r <= core.tol).unwrap_or(false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{self, FiniteGroup};
    use crate::linalg::cr;
    use crate::quantum_group::dual_quantum_group;

    const TOL: f64 = 1e-9;

    fn subgroup_core(gname: &str, spec: &str) -> (FiniteGroup, Vec<usize>, ActionCore) {
        let g = FiniteGroup::by_name(gname).unwrap();
        let h = g.subgroup_by_spec(spec).unwrap();
        let m = catalog::function_algebra(&g, TOL).unwrap();
        let n = catalog::function_algebra(&g.restrict(&h).unwrap(), TOL).unwrap();
        let alpha = catalog::subgroup_action_map(&g, &h).unwrap();
        let core = ActionCore::new(m, n, alpha, None, TOL).unwrap();
        (g, h, core)
    }

    #[test]
    fn s3_mod_c3_fixed_points() {
        let (g, h, core) = subgroup_core("S3", "C3");
        assert_eq!(core.q.dim(), 2);
        assert!(core.integrability().integrable);
        let ml = core.m.layout();
        for x in 0..g.order() {
            let t = core.t_alpha_in_m(&Element::basis(&ml, x)).unwrap();
            let vals = catalog::values_on_group(&t);
            for y in 0..g.order() {
                let same = h.iter().any(|&k| g.mul(x, k) == y);
                let want = if same { 1.0 / h.len() as f64 } else { 0.0 };
                assert!((vals[y] - cr(want)).norm() < 1e-10, "T_α(δ_{x})({y}) = {}", vals[y]);
            }
        }
    }

    #[test]
    fn trivial_action_fixes_everything() {
        let g = FiniteGroup::s3().unwrap();
        let m = catalog::function_algebra(&g, TOL).unwrap();
        let n = catalog::function_algebra(&g.restrict(&[0]).unwrap(), TOL).unwrap();
        let alpha = catalog::subgroup_action_map(&g, &[0]).unwrap();
        let core = ActionCore::new(m, n, alpha, None, TOL).unwrap();
        assert_eq!(core.q.dim(), 6);
    }

    #[test]
    fn comultiplication_as_action_has_scalar_fixed_points() {
        let g = FiniteGroup::s3().unwrap();
        let m = catalog::function_algebra(&g, TOL).unwrap();
        let alpha = m.comult.clone();
        let core = ActionCore::new(m.clone(), m, alpha, None, TOL).unwrap();
        assert_eq!(core.q.dim(), 1);
    }

    #[test]
    fn upsilon_for_subgroup_actions() {
        for (gname, spec) in [("S3", "C3"), ("S3", "C2"), ("Z4", "C2")] {
            let (g, _, core) = subgroup_core(gname, spec);
            let closed = catalog::classical_upsilon(&g, &core.q.units).unwrap();
            let (c1, c2) = core.impl_residuals(&closed).unwrap();
            assert!(c1 < 1e-10 && c2 < 1e-10, "closed form {gname}/{spec}: {c1:e} {c2:e}");
            let dual = dual_quantum_group(&core.m, TOL).unwrap();
            let b = core.implement(&dual, Some((closed, "translation".into()))).unwrap();
            let r = &b.upsilon_report;
            assert!(r.impl1 < 1e-8 && r.impl2 < 1e-8, "{gname}/{spec}: {r:?}");
            assert!(r.prescription < 1e-8, "{r:?}");
        }
    }

    #[test]
    fn quotient_action_on_group_algebra() {
        let g = FiniteGroup::s3().unwrap();
        let k = FiniteGroup::cyclic(2).unwrap();
        let (m, ga) = catalog::group_algebra(&g, TOL).unwrap();
        let (n, ka) = catalog::group_algebra(&k, TOL).unwrap();
        let alpha = catalog::quotient_action_map(&g, &ga, &k, &ka, &catalog::s3_sign_map()).unwrap();
        let core = ActionCore::new(m, n, alpha, None, TOL).unwrap();
        // Q = ℂ[A3]
        assert_eq!(core.q.dim(), 3);
        let dual = dual_quantum_group(&core.m, TOL).unwrap();
        let b = core.implement(&dual, None).unwrap();
        assert!(b.upsilon_report.impl1 < 1e-8 && b.upsilon_report.impl2 < 1e-8);
    }

    #[test]
    fn slice_lemmas_hold_for_group_coreps() {
        let (g, h, core) = subgroup_core("S3", "C3");
        let u = catalog::corep_from_rep(&catalog::rep_by_label(&g, &h, "chi1", TOL).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let nl = core.n.layout();
        let om = random_functional(&nl, &mut rng);
        let a = random_element(&nl, &mut rng);
        let x = random_element(&core.alpha.target, &mut rng);
        let r = analytic_slice_lemmas(&core, &u, &om, &a, &x).unwrap();
        assert!(r.single_leg < 1e-10 && r.lifted < 1e-10 && r.sigma_star_trivial < 1e-12, "{r:?}");
        assert!(corep_residual(&core.n, &u).unwrap() < 1e-12);
    }

    #[test]
    fn non_action_is_rejected() {
        let g = FiniteGroup::s3().unwrap();
        let m = catalog::function_algebra(&g, TOL).unwrap();
        let n = catalog::function_algebra(&g.restrict(&[0, 3]).unwrap(), TOL).unwrap();
        let mut alpha = catalog::subgroup_action_map(&g, &[0, 3]).unwrap();
        alpha.matrix.swap_columns(0, 1);
        assert!(ActionCore::new(m, n, alpha, None, TOL).is_err());
    }
}
