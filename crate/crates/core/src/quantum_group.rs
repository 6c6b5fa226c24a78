//! Finite quantum groups: Haar weight, antipode, modular element, the
//! multiplicative unitaries `W` and `V`, and the dual quantum group.

use crate::algebra::{generated_subalgebra, Element, Functional, LegLayout, LinearAlgebraMap, MatFn, MultiMatrixAlgebra, Subalgebra};
use crate::linalg::{self, antilinear_polar, cr, AntiLinear, CMat, CVec, ZERO};
use crate::weights::{gns, modular_data, star_permutation, GNSData, ModularData, Weight};
use crate::{check, Error, Result};
use serde::Serialize;

/// Residuals certified while building a [`QuantumGroup`].
#[derive(Clone, Debug, Default, Serialize)]
pub struct QgResiduals {
    pub star_hom: f64,
    pub unital: f64,
    pub coassociativity: f64,
    pub left_invariance: f64,
    pub right_invariance: f64,
    pub haar_trace: f64,
    pub antipode_consistency: f64,
    pub s_squared: f64,
    pub r_anti_hom: f64,
    pub psi_right_invariance: f64,
    pub delta_group_like: f64,
    pub delta_minus_one: f64,
    pub delta_sigma_invariance: f64,
    pub nu_minus_one: f64,
    pub tau_minus_id: f64,
    pub p_minus_one: f64,
    pub w_unitarity: f64,
    pub w_implements_comult: f64,
    pub pentagon: f64,
    pub v_unitarity: f64,
    pub v_implements_comult: f64,
    pub v_corep: f64,
    pub v_slice: f64,
}

impl QgResiduals {
    pub fn max(&self) -> f64 {
        [
            self.star_hom,
            self.unital,
            self.coassociativity,
            self.left_invariance,
            self.right_invariance,
            self.haar_trace,
            self.antipode_consistency,
            self.s_squared,
            self.r_anti_hom,
            self.psi_right_invariance,
            self.delta_group_like,
            self.delta_minus_one,
            self.delta_sigma_invariance,
            self.nu_minus_one,
            self.tau_minus_id,
            self.p_minus_one,
            self.w_unitarity,
            self.w_implements_comult,
            self.pentagon,
            self.v_unitarity,
            self.v_implements_comult,
            self.v_corep,
            self.v_slice,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

/// A finite (hence Kac type) quantum group with all derived structure.
#[derive(Clone, Debug)]
pub struct QuantumGroup {
    pub name: String,
    pub algebra: MultiMatrixAlgebra,
    pub comult: LinearAlgebraMap,
    pub haar: Weight,
    pub gns: GNSData,
    pub modular: ModularData,
    pub antipode: LinearAlgebraMap,
    pub unitary_antipode: LinearAlgebraMap,
    pub scaling_constant: f64,
    pub modular_element: Element,
    pub right_haar: Weight,
    /// `W` on `H_φ ⊗ H_φ`.
    pub w: CMat,
    /// `V` on `H_φ ⊗ H_φ`.
    pub v: CMat,
    /// `P` on `H_φ`.
    pub p: CMat,
    pub residuals: QgResiduals,
}

fn layout2(a: &MultiMatrixAlgebra) -> LegLayout {
    LegLayout::new(vec![a.clone(), a.clone()])
}

/// Largest coassociativity defect over the basis.
pub fn coassociativity_residual(comult: &LinearAlgebraMap) -> Result<f64> {
    let l = comult.source.clone();
    let n = l.lin_dim();
    let mut worst: f64 = 0.0;
    for b in 0..n {
        let d = comult.apply(&Element::basis(&l, b))?;
        let lhs = d.map_leg(0, comult)?;
        let rhs = d.map_leg(1, comult)?;
        worst = worst.max(lhs.dist(&rhs));
    }
    Ok(worst)
}

/// Left and right invariance defects of the functional with basis values `f`.
fn invariance_residuals(comult: &LinearAlgebraMap, f: &CVec, one: &CVec) -> (f64, f64) {
    let n = f.len();
    let d = &comult.matrix;
    let (mut left, mut right): (f64, f64) = (0.0, 0.0);
    for c in 0..n {
        for a in 0..n {
            let mut l = -f[a] * one[c];
            let mut r = -f[a] * one[c];
            for b in 0..n {
                l += f[b] * d[(c * n + b, a)];
                r += f[b] * d[(b * n + c, a)];
            }
            left = left.max(l.norm());
            right = right.max(r.norm());
        }
    }
    (left, right)
}

/// Haar state: the unique state that is both left and right invariant.
pub fn haar(algebra: &MultiMatrixAlgebra, comult: &LinearAlgebraMap, tol: f64) -> Result<Weight> {
    let n = algebra.lin_dim();
    let one = algebra.one_coeffs();
    let d = &comult.matrix;
    let mut sys = CMat::zeros(2 * n * n, n);
    for c in 0..n {
        for a in 0..n {
            let (rl, rr) = (c * n + a, n * n + c * n + a);
            for b in 0..n {
                sys[(rl, b)] += d[(c * n + b, a)];
                sys[(rr, b)] += d[(b * n + c, a)];
            }
            sys[(rl, a)] -= one[c];
            sys[(rr, a)] -= one[c];
        }
    }
    let ker = linalg::null_space(&sys, tol.max(1e-12) * 10.0);
    if ker.ncols() != 1 {
        return Err(Error::InvalidInput(format!(
            "invariant functionals form a space of dimension {} (expected 1): not a finite quantum group",
            ker.ncols()
        )));
    }
    let f = ker.column(0).into_owned();
    let norm = f.dot(&one);
    if norm.norm() < 1e-14 {
        return Err(Error::InvalidInput("invariant functional vanishes on the unit".into()));
    }
    let f = f / norm;
    let func = Functional::from_values(&algebra.layout(), &f)?;
    let h = Element::from_matrix(&algebra.layout(), &func.density().clone())?.0;
    let h = (&h + &h.adjoint()).scale(cr(0.5));
    Weight::new(h).map_err(|e| Error::InvalidInput(format!("Haar density is not positive definite: {e}")))
}

/// `(ι ⊗ φ)(x)` for `x ∈ M ⊗ M`.
fn slice_right(x: &Element, phi: &Weight) -> Result<Element> {
    x.slice(1, &phi.functional())
}

/// Embeds an operator on `H ⊗ H` given as a matrix into `B(H) ⊗ B(H)`.
fn op2(h: &MultiMatrixAlgebra, m: CMat) -> Element {
    Element::from_matrix_unchecked(&layout2(h), m)
}

/// Flip `Σ` on `ℂ^n ⊗ ℂ^n`.
pub fn flip_operator(n: usize) -> CMat {
    let mut s = CMat::zeros(n * n, n * n);
    for i in 0..n {
        for j in 0..n {
            s[(j * n + i, i * n + j)] = cr(1.0);
        }
    }
    s
}

impl QuantumGroup {
    /// Validates `Δ` and derives every piece of structure, certifying each.
    pub fn new(name: &str, algebra: MultiMatrixAlgebra, comult: LinearAlgebraMap, tol: f64) -> Result<Self> {
        let l = algebra.layout();
        if comult.source != l || comult.target != layout2(&algebra) {
            return Err(Error::Dimension("comultiplication must map M into M ⊗ M".into()));
        }
        let n = algebra.lin_dim();
        let mut r = QgResiduals { star_hom: comult.star_hom_residual(), unital: comult.unital_residual(), ..Default::default() };
        check("comultiplication ∗-homomorphism", r.star_hom, tol, 1.0)?;
        check("comultiplication unital", r.unital, tol, 1.0)?;
        r.coassociativity = coassociativity_residual(&comult)?;
        check("coassociativity", r.coassociativity, tol, 1.0)?;

        let phi = haar(&algebra, &comult, tol)?;
        let f = phi.functional().values();
        let one = algebra.one_coeffs();
        let (li, ri) = invariance_residuals(&comult, &f, &one);
        r.left_invariance = li;
        r.right_invariance = ri;
        check("Haar invariance", li.max(ri), tol, 1.0)?;
        r.haar_trace = phi.trace_defect();
        check("Haar weight tracial", r.haar_trace, tol, 1.0)?;

        let g = gns(&phi);
        let md = modular_data(&phi, &g);
        let basis: Vec<Element> = (0..n).map(|b| Element::basis(&l, b)).collect();

        // antipode from S((ι⊗φ)(Δ(a*)(1⊗b))) = (ι⊗φ)((1⊗a*)Δ(b))
        let one_m = Element::identity(&l);
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| (0..n).map(move |b| (a, b))).collect();
        let cols: Vec<Result<(CVec, CVec)>> = crate::par::map_slice(&pairs, |&(a, b)| {
            let da = comult.apply(&basis[a].adjoint())?;
            let db = comult.apply(&basis[b])?;
            let s = slice_right(&(&da * &one_m.tensor(&basis[b])), &phi)?;
            let t = slice_right(&(&one_m.tensor(&basis[a].adjoint()) * &db), &phi)?;
            Ok((s.coeffs(), t.coeffs()))
        });
        let mut src = CMat::zeros(n, pairs.len());
        let mut dst = CMat::zeros(n, pairs.len());
        for (k, c) in cols.into_iter().enumerate() {
            let (s, t) = c?;
            src.set_column(k, &s);
            dst.set_column(k, &t);
        }
        let (smat, res) = linalg::solve_right(&dst, &src, 1e-12);
        r.antipode_consistency = res;
        check("antipode system consistency", res, tol, 1.0)?;
        if linalg::rank(&src, 1e-10) != n {
            return Err(Error::InvalidInput("antipode system does not determine S on all of M".into()));
        }
        let antipode = LinearAlgebraMap::new(l.clone(), l.clone(), smat.clone())?;
        r.s_squared = linalg::fro(&(&smat * &smat - CMat::identity(n, n)));
        if r.s_squared > tol * 10.0 {
            return Err(Error::InvalidInput(format!("S² ≠ ι (residual {:.3e}): non-Kac input rejected", r.s_squared)));
        }
        // R := S, anti-multiplicative and ∗-preserving
        let unitary_antipode = antipode.clone();
        let rimg: Vec<Element> = basis.iter().map(|x| unitary_antipode.apply(x)).collect::<Result<_>>()?;
        let mut anti: f64 = 0.0;
        for a in 0..n {
            anti = anti.max(unitary_antipode.apply(&basis[a].adjoint())?.dist(&rimg[a].adjoint()));
            for b in 0..n {
                let lhs = unitary_antipode.apply(&(&basis[a] * &basis[b]))?;
                anti = anti.max(lhs.dist(&(&rimg[b] * &rimg[a])));
            }
        }
        r.r_anti_hom = anti;
        check("R anti-∗-automorphism", anti, tol, 1.0)?;

        // scaling group from Δσ_t^φ = (τ_t ⊗ σ_t^φ)Δ, scaling constant from φτ_t = ν^{-t}φ
        let t = 0.7;
        let mut tau_src = Vec::new();
        let mut tau_dst = Vec::new();
        for x in &basis {
            let lhs = comult.apply(&md.sigma(t, x))?;
            let dx = comult.apply(x)?;
            for c in 0..n {
                let om = Functional::from_values(&l, &CVec::from_fn(n, |k, _| if k == c { cr(1.0) } else { ZERO }))?;
                // (ι⊗ω)Δ(x) ↦ (ι⊗ωσ_{-t})Δσ_t(x)
                tau_src.push(dx.slice(1, &om)?.coeffs());
                let om_sigma_vals = CVec::from_fn(n, |b, _| om.eval(&md.sigma(-t, &basis[b])));
                let om_sigma = Functional::from_values(&l, &om_sigma_vals)?;
                tau_dst.push(lhs.slice(1, &om_sigma)?.coeffs());
            }
        }
        let (tau, tau_res) = linalg::solve_right(&CMat::from_columns(&tau_dst), &CMat::from_columns(&tau_src), 1e-12);
        check("scaling group system consistency", tau_res, tol, 1.0)?;
        r.tau_minus_id = linalg::fro(&(&tau - CMat::identity(n, n)));
        // φ∘τ_t = ν^{-t} φ, fitted on the basis values
        let phi_tau = (f.transpose() * &tau).transpose();
        let ratio = f.dotc(&phi_tau).re / f.norm_squared();
        let nu = ratio.powf(-1.0 / t);
        r.nu_minus_one = (nu - 1.0).abs();

        // right Haar ψ = φ∘R and modular element δ
        let psi_vals = CVec::from_fn(n, |b, _| phi.eval(&rimg[b]));
        let psi_f = Functional::from_values(&l, &psi_vals)?;
        let hpsi = Element::from_matrix(&l, psi_f.density())?.0;
        let psi = Weight::new((&hpsi + &hpsi.adjoint()).scale(cr(0.5)))?;
        let (_, pri) = invariance_residuals(&comult, &psi_vals, &one);
        r.psi_right_invariance = pri;
        check("ψ right invariance", pri, tol, 1.0)?;
        let hinv = phi.density().matrix_function(MatFn::InvSqrt)?;
        let delta = &(&hinv * psi.density()) * &hinv;
        let dd = comult.apply(&delta)?;
        r.delta_group_like = dd.dist(&delta.tensor(&delta));
        r.delta_minus_one = delta.dist(&one_m);
        r.delta_sigma_invariance = md.sigma(0.9, &delta).dist(&delta).max(delta.commutator_norm(phi.density()));

        // W from W*(Λ(a)⊗Λ(b)) = (Λ⊗Λ)(Δ(b)(a⊗1))
        let ll = g.lambda.kronecker(&g.lambda);
        let mut wt_img = CMat::zeros(n * n, n * n);
        for a in 0..n {
            for b in 0..n {
                let z = &comult.apply(&basis[b])? * &basis[a].tensor(&one_m);
                wt_img.set_column(a * n + b, &(&ll * z.coeffs()));
            }
        }
        let w_star = &wt_img * linalg::pinv(&ll, 1e-14);
        let w = w_star.adjoint();
        r.w_unitarity = linalg::unitarity_residual(&w);
        let h = g.operators();
        let pi2 = |x: &Element| -> Result<CMat> { Ok(comult.apply(x)?.map_leg(0, &g.pi)?.map_leg(1, &g.pi)?.into_mat()) };
        let id_h = CMat::identity(n, n);
        let mut wimpl: f64 = 0.0;
        for x in &basis {
            let rhs = &w_star * id_h.kronecker(&g.pi(x)) * &w;
            wimpl = wimpl.max(linalg::op_norm(&(pi2(x)? - rhs)));
        }
        r.w_implements_comult = wimpl;
        let h3 = LegLayout::new(vec![h.clone(), h.clone(), h.clone()]);
        let w_el = op2(&h, w.clone());
        let w12 = w_el.embed(&h3, &[0, 1])?;
        let w13 = w_el.embed(&h3, &[0, 2])?;
        let w23 = w_el.embed(&h3, &[1, 2])?;
        r.pentagon = (&(&w12 * &w13) * &w23).dist(&(&w23 * &w12));

        // V from V(Γ(a)⊗Γ(b)) = (Γ⊗Γ)(Δ(a)(1⊗b)), Γ(a) = Λ(a δ^{1/2})
        let dhalf = delta.matrix_function(MatFn::Sqrt)?;
        let gamma = &g.lambda * crate::weights::right_mult(&dhalf);
        let gg = gamma.kronecker(&gamma);
        let mut v_img = CMat::zeros(n * n, n * n);
        for a in 0..n {
            for b in 0..n {
                let z = &comult.apply(&basis[a])? * &one_m.tensor(&basis[b]);
                v_img.set_column(a * n + b, &(&gg * z.coeffs()));
            }
        }
        let v = &v_img * linalg::pinv(&gg, 1e-14);
        r.v_unitarity = linalg::unitarity_residual(&v);
        let mut vimpl: f64 = 0.0;
        for x in &basis {
            let rhs = &v * g.pi(x).kronecker(&id_h) * v.adjoint();
            vimpl = vimpl.max(linalg::op_norm(&(pi2(x)? - rhs)));
        }
        r.v_implements_comult = vimpl;
        // V ∈ B(H) ⊗ M: (ι⊗Δ)(V) = V₁₂V₁₃
        let (v_bm, v_mem) = pull_back_leg(&op2(&h, v.clone()), 1, &g)?;
        let lhs = v_bm.map_leg(1, &comult)?;
        let hmm = LegLayout::new(vec![h.clone(), algebra.clone(), algebra.clone()]);
        let rhs = &v_bm.embed(&hmm, &[0, 1])? * &v_bm.embed(&hmm, &[0, 2])?;
        r.v_corep = lhs.dist(&rhs).max(v_mem);
        // (ω_{Γ(a),Γ(b)} ⊗ ι)(V*) = (ψ⊗ι)(Δ(b*)(a⊗1))
        let v_star = v_bm.adjoint();
        let mut vs: f64 = 0.0;
        for a in 0..n {
            for b in 0..n {
                let om = Functional::vector(&gamma.column(a).into_owned(), &gamma.column(b).into_owned())?;
                let lhs = v_star.slice(0, &om)?;
                let z = &comult.apply(&basis[b].adjoint())? * &basis[a].tensor(&one_m);
                let rhs = z.slice(0, &psi.functional())?;
                vs = vs.max(lhs.dist(&rhs));
            }
        }
        r.v_slice = vs;

        // P with P^{it}Λ(a) = ν^{t/2}Λ(τ_t(a))
        let p = CMat::identity(n, n);
        let mut pres: f64 = 0.0;
        for (b, x) in basis.iter().enumerate() {
            let tau_x = Element::from_coeffs(&l, &tau.column(b).into_owned())?;
            let rhs = g.lambda(&tau_x) * cr(nu.powf(t / 2.0));
            pres = pres.max((&p * g.lambda(x) - rhs).norm());
        }
        r.p_minus_one = pres;

        for (what, val) in [
            ("δ group-like", r.delta_group_like),
            ("W unitary", r.w_unitarity),
            ("Δ(x) = W*(1⊗x)W", r.w_implements_comult),
            ("pentagon", r.pentagon),
            ("V unitary", r.v_unitarity),
            ("Δ(x) = V(x⊗1)V*", r.v_implements_comult),
            ("(ι⊗Δ)(V) = V₁₂V₁₃", r.v_corep),
            ("V slice identity", r.v_slice),
        ] {
            check(what, val, tol, 1.0)?;
        }
        Ok(Self {
            name: name.to_string(),
            algebra,
            comult,
            haar: phi,
            gns: g,
            modular: md,
            antipode,
            unitary_antipode,
            scaling_constant: nu,
            modular_element: delta,
            right_haar: psi,
            w,
            v,
            p,
            residuals: r,
        })
    }

    pub fn layout(&self) -> LegLayout {
        self.algebra.layout()
    }

    pub fn dim(&self) -> usize {
        self.algebra.lin_dim()
    }

    /// `B(H_φ)`.
    pub fn operators(&self) -> MultiMatrixAlgebra {
        self.gns.operators()
    }

    /// Scaling group `τ_t` (the identity for finite quantum groups).
    pub fn tau(&self, _t: f64, x: &Element) -> Element {
        x.clone()
    }

    /// `Δ(x)` for a basis index.
    pub fn comult_basis(&self, b: usize) -> Element {
        self.comult.apply(&Element::basis(&self.layout(), b)).expect("basis")
    }
}

/// Replaces an operator leg `B(H_φ)` by `M`, for elements of `⋯ ⊗ π_φ(M) ⊗ ⋯`.
/// Returns the element and the distance from the image of `π_φ` on that leg.
pub fn pull_back_leg(x: &Element, leg: usize, g: &GNSData) -> Result<(Element, f64)> {
    let inv = g.pi.left_inverse();
    let y = x.map_leg(leg, &inv)?;
    let back = y.map_leg(leg, &g.pi)?;
    Ok((y, back.dist(x)))
}

/// Which comultiplication convention the dual uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum DualConvention {
    /// `Δ̂(x) = Σ W (x⊗1) W* Σ`
    Primary,
    /// `Δ̂(x) = Σ W* (1⊗x) W Σ`
    Adjoint,
}

/// Dual quantum group `M̂ = span{(ω⊗ι)(W)}` acting on `H_φ`.
#[derive(Clone, Debug)]
pub struct DualQuantumGroup {
    pub sub: Subalgebra,
    pub comult: LinearAlgebraMap,
    pub convention: DualConvention,
    /// Haar state of `(M̂, Δ̂)`.
    pub haar: Weight,
    /// GNS map `Λ̂ : M̂ → H_φ`, `Λ̂((ω⊗ι)(W)) = ξ(ω)` with `⟨ξ(ω), Λ(x)⟩ = ω(x*)`.
    pub lambda_hat: CMat,
    /// Modular conjugation of the dual weight on `H_φ`.
    pub j_hat: AntiLinear,
    /// Largest residual met while certifying the dual.
    pub residual: f64,
}

fn dual_comult(sub: &Subalgebra, w: &CMat, conv: DualConvention) -> Result<(LinearAlgebraMap, f64)> {
    let n = sub.ambient.real_dim();
    let sigma = flip_operator(n);
    let alg = &sub.algebra;
    let target = layout2(alg);
    let id = CMat::identity(n, n);
    let h = sub.ambient.factor(0).clone();
    let mut images = Vec::with_capacity(alg.lin_dim());
    let mut worst: f64 = 0.0;
    for b in 0..alg.lin_dim() {
        let x = sub.units[b].mat();
        let op = match conv {
            DualConvention::Primary => &sigma * w * x.kronecker(&id) * w.adjoint() * &sigma,
            DualConvention::Adjoint => &sigma * w.adjoint() * id.kronecker(x) * w * &sigma,
        };
        let el = op2(&h, op);
        let y = el.map_leg(0, &sub.projection)?.map_leg(1, &sub.projection)?;
        let back = y.map_leg(0, &sub.embedding)?.map_leg(1, &sub.embedding)?;
        worst = worst.max(back.dist(&el));
        images.push(y);
    }
    Ok((LinearAlgebraMap::from_images(&alg.layout(), &target, &images)?, worst))
}

pub fn dual_quantum_group(qg: &QuantumGroup, tol: f64) -> Result<DualQuantumGroup> {
    let n = qg.gns.dim();
    let h = qg.operators();
    let hl = h.layout();
    // (ω_{e_j,e_i} ⊗ ι)(W) is the (i, j) block of W
    let block = |i: usize, j: usize| qg.w.view((i * n, j * n), (n, n)).into_owned();
    let gens: Vec<Element> = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| Element::from_matrix_unchecked(&hl, block(i, j)))
        .collect();
    let sub = generated_subalgebra(&hl, &gens, tol)?;
    let mut residual: f64 = 0.0;
    let mut chosen = None;
    for conv in [DualConvention::Primary, DualConvention::Adjoint] {
        let (cm, res) = dual_comult(&sub, &qg.w, conv)?;
        let ok = res <= tol * 10.0
            && cm.star_hom_residual() <= tol * 10.0
            && coassociativity_residual(&cm)? <= tol * 10.0;
        if ok {
            if let Ok(hh) = haar(&sub.algebra, &cm, tol) {
                residual = residual.max(res);
                chosen = Some((cm, conv, hh));
                break;
            }
        }
    }
    let (comult, convention, dual_haar) =
        chosen.ok_or_else(|| Error::Numerical("no dual comultiplication convention passed coassociativity and Haar existence".into()))?;

    // Λ̂ from the vectors ξ(ω)
    let m = qg.dim();
    let l = qg.layout();
    let lam_adj_inv = linalg::pinv(&qg.gns.lambda.adjoint(), 1e-14);
    let mut src = CMat::zeros(sub.algebra.lin_dim(), n * n);
    let mut dst = CMat::zeros(n, n * n);
    for i in 0..n {
        for j in 0..n {
            let col = i * n + j;
            let (c, _) = sub.pull_back(&gens[col])?;
            src.set_column(col, &c.coeffs());
            // ⟨ξ, Λ(e_b)⟩ = ω_{e_j,e_i}(π(e_b*)) = π(e_b*)_{ij}
            let rhs = CVec::from_fn(m, |b, _| qg.gns.pi(&Element::basis(&l, b).adjoint())[(i, j)]);
            dst.set_column(col, &(&lam_adj_inv * rhs));
        }
    }
    let (lambda_hat, res) = linalg::solve_right(&dst, &src, 1e-12);
    residual = residual.max(res);
    check("dual GNS map well defined", res, tol, 1.0)?;
    let lh_inv = linalg::pinv(&lambda_hat, 1e-14);
    let p = star_permutation(&sub.algebra.layout());
    let t_hat = AntiLinear::new(&lambda_hat * p * lh_inv.conjugate());
    let (j_hat, _) = antilinear_polar(&t_hat);
    // the weight carried by Λ̂ must be the Haar weight of (M̂, Δ̂)
    let al = sub.algebra.layout();
    let vals = CVec::from_fn(sub.algebra.lin_dim(), |b, _| {
        let (k, i, j) = sub.algebra.basis_label(b);
        let e1j = Element::basis(&al, sub.algebra.basis_index(k, 0, j));
        let e1i = Element::basis(&al, sub.algebra.basis_index(k, 0, i));
        (&lambda_hat * e1i.coeffs()).dotc(&(&lambda_hat * e1j.coeffs()))
    });
    let hv = dual_haar.functional().values();
    let scale = vals.dot(&sub.algebra.one_coeffs()) / hv.dot(&sub.algebra.one_coeffs());
    let prop = (&vals - &hv * scale).norm() / vals.norm().max(1e-300);
    residual = residual.max(prop);
    check("dual GNS weight is the dual Haar weight", prop, tol, 1.0)?;
    Ok(DualQuantumGroup { sub, comult, convention, haar: dual_haar, lambda_hat, j_hat, residual })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn function_algebra(table: &[Vec<usize>]) -> QuantumGroup {
        let n = table.len();
        let m = MultiMatrixAlgebra::diagonal(n);
        let l2 = layout2(&m);
        let mut mat = CMat::zeros(n * n, n);
        for a in 0..n {
            for b in 0..n {
                mat[(a * n + b, table[a][b])] = cr(1.0);
            }
        }
        let cm = LinearAlgebraMap::new(m.layout(), l2, mat).unwrap();
        QuantumGroup::new("test", m, cm, 1e-9).unwrap()
    }

    fn cyclic(n: usize) -> Vec<Vec<usize>> {
        (0..n).map(|a| (0..n).map(|b| (a + b) % n).collect()).collect()
    }

    #[test]
    fn haar_of_cyclic_function_algebras() {
        let q = function_algebra(&cyclic(2));
        let h = q.haar.density().mat();
        assert!((h[(0, 0)] - cr(0.5)).norm() < 1e-12 && (h[(1, 1)] - cr(0.5)).norm() < 1e-12);
        let q = function_algebra(&cyclic(3));
        for i in 0..3 {
            assert!((q.haar.density().mat()[(i, i)] - cr(1.0 / 3.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn antipode_of_function_algebra_inverts() {
        let q = function_algebra(&cyclic(3));
        for g in 0..3 {
            let s = q.antipode.apply(&Element::basis(&q.layout(), g)).unwrap();
            let inv = (3 - g) % 3;
            assert!(s.dist(&Element::basis(&q.layout(), inv)) < 1e-10);
        }
        assert!(q.residuals.s_squared < 1e-10);
    }

    #[test]
    fn multiplicative_unitary_of_z2() {
        let q = function_algebra(&cyclic(2));
        assert_eq!(q.w.nrows(), 4);
        assert!(q.residuals.pentagon < 1e-11);
        assert!(q.residuals.w_unitarity < 1e-11);
    }

    #[test]
    fn trivial_quantum_group() {
        let m = MultiMatrixAlgebra::scalars();
        let cm = LinearAlgebraMap::new(m.layout(), layout2(&m), CMat::identity(1, 1)).unwrap();
        let q = QuantumGroup::new("trivial", m, cm, 1e-9).unwrap();
        assert!((q.w[(0, 0)] - cr(1.0)).norm() < 1e-14);
    }

    #[test]
    fn dual_of_z2_is_group_algebra() {
        let q = function_algebra(&cyclic(2));
        let d = dual_quantum_group(&q, 1e-9).unwrap();
        assert_eq!(d.sub.algebra.block_dims(), &[1, 1]);
        // cocommutative: χ∘Δ̂ = Δ̂
        for b in 0..2 {
            let x = d.comult.apply(&Element::basis(&d.sub.layout(), b)).unwrap();
            assert!(x.flip().unwrap().dist(&x) < 1e-10);
        }
    }

    #[test]
    fn malformed_comultiplication_is_rejected() {
        let m = MultiMatrixAlgebra::diagonal(2);
        // Δ(δ_0) = δ_0⊗δ_0, Δ(δ_1) = δ_1⊗δ_1 is not unital
        let mut mat = CMat::zeros(4, 2);
        mat[(0, 0)] = cr(1.0);
        mat[(3, 1)] = cr(1.0);
        let cm = LinearAlgebraMap::new(m.layout(), layout2(&m), mat).unwrap();
        assert!(QuantumGroup::new("bad", m, cm, 1e-9).is_err());
    }
}
