//! The induced corepresentation: the solution space `𝒫`, the Gram-quotient
//! carrier `𝒦`, star maps `X ↦ X_*`, the isometry `λ` and `ρ = λ*`, the
//! dense spanning families and the unitarity certificate.

use crate::action::{corep_residual, random_element, ActionBundle, ActionCore};
use crate::algebra::{Element, Functional, LegLayout, MultiMatrixAlgebra};
use crate::linalg::{self, cr, CMat, CVec, C64};
use crate::quantum_group::pull_back_leg;
use crate::weights::{canonical_gns_intertwiner, right_mult};
use crate::{check, par, Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

/// Solutions `X ∈ B(H) ⊗ M ⊗ B(K)` of `(ι⊗α⊗ι)(X) = U₃₄* X₁₂₄`.
#[derive(Clone, Debug)]
pub struct PSpace {
    pub h: usize,
    pub k: usize,
    pub layout: LegLayout,
    pub basis: Vec<Element>,
    /// Orthonormal coefficient vectors of the basis (columns).
    pub coeffs: CMat,
    pub equation_residual: f64,
    /// Distance of `(Y⊗1)X` and `XZ` from the span, relative.
    pub closure_residual: f64,
}

impl PSpace {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Coordinates of `x` in the basis and its relative distance from the span.
    pub fn project(&self, x: &Element) -> (CVec, f64) {
        let c = x.coeffs();
        let a = self.coeffs.adjoint() * &c;
        let back = &self.coeffs * &a;
        let res = (&c - back).norm() / c.norm().max(1.0);
        (a, res)
    }
}

fn k_layout(k: usize) -> LegLayout {
    MultiMatrixAlgebra::full(k).layout()
}

/// `X ∈ M ⊗ B(K)` seen in `B(ℂ) ⊗ M ⊗ B(K)`.
pub fn lift(x: &Element) -> Element {
    Element::identity(&k_layout(1)).tensor(x)
}

pub fn solve_p(h: usize, core: &ActionCore, u: &Element, seed: u64) -> Result<PSpace> {
    let tol = core.tol;
    let cr_res = corep_residual(&core.n, u)?;
    check("corep identity residual", cr_res, tol, 1.0)?;
    let k = u.layout().factor(1).real_dim();
    let ma = core.m.algebra.clone();
    let layout = LegLayout::new(vec![MultiMatrixAlgebra::full(h), ma.clone(), MultiMatrixAlgebra::full(k)]);
    let l4 = LegLayout::new(vec![MultiMatrixAlgebra::full(h), ma, core.n.algebra.clone(), MultiMatrixAlgebra::full(k)]);
    let u34 = u.adjoint().embed(&l4, &[2, 3])?;
    let eq = |x: &Element| -> Result<Element> { Ok(&x.map_leg(1, &core.alpha)? - &(&u34 * &x.embed(&l4, &[0, 1, 3])?)) };
    let dim = layout.lin_dim();
    let cols: Vec<Result<CVec>> = par::map_range(dim, |b| Ok(eq(&Element::basis(&layout, b))?.coeffs()));
    let cols: Vec<CVec> = cols.into_iter().collect::<Result<_>>()?;
    let sys = CMat::from_columns(&cols);
    let ns = linalg::null_space(&sys, tol.max(1e-12));
    let basis: Vec<Element> = (0..ns.ncols()).map(|j| Element::from_coeffs(&layout, &ns.column(j).into_owned())).collect::<Result<_>>()?;
    let mut eqres: f64 = 0.0;
    for x in &basis {
        eqres = eqres.max(eq(x)?.norm());
    }
    let mut p = PSpace { h, k, layout, basis, coeffs: ns, equation_residual: eqres, closure_residual: 0.0 };
    // module closure under B(H) ⊗ Q on the left and B(H) ⊗ Q ⊗ B(K) on the right
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9c1);
    let ql = core.q.layout();
    let mut clos: f64 = 0.0;
    for _ in 0..2 {
        let y = random_element(&k_layout(h), &mut rng).tensor(&core.q.embed(&random_element(&ql, &mut rng))?);
        let z = y.tensor(&random_element(&k_layout(k), &mut rng));
        let y1 = y.tensor(&Element::identity(&k_layout(k)));
        for x in &p.basis {
            clos = clos.max(p.project(&(&y1 * x)).1).max(p.project(&(x * &z)).1);
        }
    }
    p.closure_residual = clos;
    check("𝒫 equation", eqres, tol, 1.0)?;
    check("𝒫 module closure", clos, tol, 1.0)?;
    Ok(p)
}

/// Gram-quotient carrier of `𝒫 ⊙ (H ⊗ H_θ ⊗ K)`.
#[derive(Clone, Debug)]
pub struct CarrierSpace {
    pub h: usize,
    /// `dim(H ⊗ H_θ ⊗ K)`.
    pub s: usize,
    pub gram: CMat,
    pub eigenvalues: Vec<f64>,
    pub rank: usize,
    /// `Φ` with `X_a ⊗̇ f_m ↦ Φ[:, a·s + m]`.
    pub cobasis: CMat,
    /// Largest distance of `Y*X` from `B(H) ⊗ Q ⊗ B(K)`.
    pub q_membership: f64,
    /// `‖Φ*Φ − G‖`.
    pub reproduction: f64,
}

impl CarrierSpace {
    pub fn raw_dim(&self) -> usize {
        self.gram.nrows()
    }

    /// `(X_a)_*` as a map `H ⊗ H_θ ⊗ K → 𝒦_H`.
    pub fn star_basis(&self, a: usize) -> CMat {
        self.cobasis.columns(a * self.s, self.s).into_owned()
    }

    /// `X_*` for `X` in the span of `𝒫`, with the distance of `X` from it.
    pub fn star(&self, p: &PSpace, x: &Element) -> (CMat, f64) {
        let (c, res) = p.project(x);
        let mut out = CMat::zeros(self.rank, self.s);
        for (a, z) in c.iter().enumerate() {
            if z.norm() != 0.0 {
                out += self.star_basis(a) * *z;
            }
        }
        (out, res)
    }

    /// `Y_* : H' ⊗ H_θ ⊗ K → H' ⊗ 𝒦` for `Y ∈ 𝒫_{H'}` (first leg `B(H')`),
    /// through the column expansion over `(ω_{e_j,e_i} ⊗ ι ⊗ ι)(Y)`. Needs the
    /// carrier of `𝒫 = 𝒫_ℂ`.
    pub fn star_columns(&self, p: &PSpace, y: &Element) -> Result<(CMat, f64)> {
        let hp = y.layout().factor(0).real_dim();
        let (r, s) = (self.rank, self.s);
        let mut out = CMat::zeros(hp * r, hp * s);
        let mut worst: f64 = 0.0;
        for i in 0..hp {
            for j in 0..hp {
                let om = Functional::vector(&unit(hp, j), &unit(hp, i))?;
                let yij = lift(&y.slice(0, &om)?);
                let (st, res) = self.star(p, &yij);
                worst = worst.max(res);
                out.view_mut((i * r, j * s), (r, s)).copy_from(&st);
            }
        }
        Ok((out, worst))
    }
}

fn unit(n: usize, i: usize) -> CVec {
    let mut v = CVec::zeros(n);
    v[i] = cr(1.0);
    v
}

/// `(ι ⊗ π_θ ⊗ ι)(Y*X)` with the distance of `Y*X` from `B(H) ⊗ Q ⊗ B(K)`.
fn pi_theta_product(core: &ActionCore, y: &Element, x: &Element) -> Result<(CMat, f64)> {
    let z = &y.adjoint() * x;
    let pulled = z.map_leg(1, &core.q.projection)?;
    let d = pulled.map_leg(1, &core.q.embedding)?.dist(&z);
    Ok((pulled.map_leg(1, &core.theta_gns.pi)?.into_mat(), d))
}

pub fn carrier_space(p: &PSpace, core: &ActionCore) -> Result<CarrierSpace> {
    let tol = core.tol;
    let pd = p.dim();
    if pd == 0 {
        return Err(Error::Numerical("𝒫 is zero".into()));
    }
    let s = p.h * core.h_theta() * p.k;
    let blocks: Vec<Result<(CMat, f64)>> = par::map_range(pd * pd, |idx| pi_theta_product(core, &p.basis[idx / pd], &p.basis[idx % pd]));
    let mut gram = CMat::zeros(pd * s, pd * s);
    let mut memb: f64 = 0.0;
    for (idx, blk) in blocks.into_iter().enumerate() {
        let (op, d) = blk?;
        memb = memb.max(d);
        let (b, a) = (idx / pd, idx % pd);
        gram.view_mut((b * s, a * s), (s, s)).copy_from(&op);
    }
    check("Y*X ∈ B(H) ⊗ Q ⊗ B(K)", memb, tol, 1.0)?;
    let herm = linalg::fro(&(&gram - gram.adjoint()));
    check("Gram matrix Hermitian", herm, tol, 1.0)?;
    let (vals, vecs) = linalg::herm_eig(&gram);
    let top = vals.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let thr = tol * top.max(1.0);
    if let Some(&low) = vals.last() {
        if low < -thr {
            return Err(Error::Numerical(format!("Gram matrix has eigenvalue {low:.3e} < 0")));
        }
    }
    let rank = vals.iter().filter(|&&v| v > thr).count();
    if rank == 0 {
        return Err(Error::Numerical("carrier space is zero".into()));
    }
    let mut cobasis = CMat::zeros(rank, pd * s);
    for i in 0..rank {
        let mut e = vecs.column(i).into_owned();
        linalg::sign_fix(&mut e);
        let row = e.adjoint() * cr(vals[i].sqrt());
        cobasis.set_row(i, &row);
    }
    let reproduction = linalg::op_norm(&(cobasis.adjoint() * &cobasis - &gram));
    Ok(CarrierSpace { h: p.h, s, gram, eigenvalues: vals, rank, cobasis, q_membership: memb, reproduction })
}

/// Certificates for the identification `U_H : H ⊗ 𝒦 → 𝒦_H` and the star-map rules.
#[derive(Clone, Debug, Serialize)]
pub struct StarMapReport {
    pub h: usize,
    pub dim_k: usize,
    pub dim_k_h: usize,
    pub u_h_consistency: f64,
    pub u_h_unitarity: f64,
    /// `U_H* X_*^{(H)} = X_*` by the column expansion.
    pub column_expansion: f64,
    /// `(XY)_* = X_*(ι⊗π_θ⊗ι)(Y)`.
    pub right_module: f64,
    /// `((a⊗1⊗1)X)_* = (a⊗1)X_*`.
    pub left_module: f64,
    /// `(Y_*)*(X_*) = (ι⊗π_θ⊗ι)(Y*X)`.
    pub inner_products: f64,
}

pub fn star_map_certificate(core: &ActionCore, u: &Element, h: usize, seed: u64) -> Result<StarMapReport> {
    let p = solve_p(1, core, u, seed)?;
    let car = carrier_space(&p, core)?;
    let ph = solve_p(h, core, u, seed)?;
    let carh = carrier_space(&ph, core)?;
    let (r, s, rh) = (car.rank, car.s, carh.rank);
    // U_H(v ⊗ X_* w) = (1⊗X)_* (v⊗w)
    let id_h = Element::identity(&k_layout(h));
    let mut src = Vec::new();
    let mut dst = Vec::new();
    for (a, x) in p.basis.iter().enumerate() {
        let one_x = id_h.tensor(&x.slice(0, &Functional::trace(&k_layout(1)))?);
        let (sx, _) = carh.star(&ph, &one_x);
        let phi = car.star_basis(a);
        for v in 0..h {
            for m in 0..s {
                let mut lhs = CVec::zeros(h * r);
                lhs.rows_mut(v * r, r).copy_from(&phi.column(m));
                src.push(lhs);
                dst.push(sx.column(v * s + m).into_owned());
            }
        }
    }
    let (uh, cons) = linalg::solve_right(&CMat::from_columns(&dst), &CMat::from_columns(&src), 1e-12);
    let unit_res = if uh.nrows() == uh.ncols() { linalg::unitarity_residual(&uh) } else { f64::INFINITY };
    let mut col: f64 = 0.0;
    let mut inner: f64 = 0.0;
    for (a, x) in ph.basis.iter().enumerate() {
        let (via, _) = car.star_columns(&p, x)?;
        col = col.max(linalg::op_norm(&(uh.adjoint() * carh.star_basis(a) - via)));
    }
    for (b, y) in ph.basis.iter().enumerate() {
        for (a, x) in ph.basis.iter().enumerate() {
            let (op, _) = pi_theta_product(core, y, x)?;
            inner = inner.max(linalg::op_norm(&(carh.star_basis(b).adjoint() * carh.star_basis(a) - op)));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5a);
    let ql = core.q.layout();
    let k = p.k;
    let mut right: f64 = 0.0;
    let mut left: f64 = 0.0;
    for x in &ph.basis {
        let y = random_element(&k_layout(h), &mut rng)
            .tensor(&core.q.embed(&random_element(&ql, &mut rng))?)
            .tensor(&random_element(&k_layout(k), &mut rng));
        let (xs, _) = carh.star(&ph, x);
        let (xys, _) = carh.star(&ph, &(x * &y));
        let piy = y.map_leg(1, &core.q.projection)?.map_leg(1, &core.theta_gns.pi)?.into_mat();
        right = right.max(linalg::op_norm(&(xys - &xs * piy)));
        let a = random_element(&k_layout(h), &mut rng);
        let a11 = a.tensor(&Element::identity(&LegLayout::new(vec![core.m.algebra.clone(), MultiMatrixAlgebra::full(k)])));
        let (axs, _) = carh.star(&ph, &(&a11 * x));
        // (a ⊗ 1) acts on 𝒦_H through U_H
        let a_on = &uh * a.mat().kronecker(&CMat::identity(r, r)) * uh.adjoint();
        left = left.max(linalg::op_norm(&(axs - a_on * xs)));
    }
    Ok(StarMapReport {
        h,
        dim_k: r,
        dim_k_h: rh,
        u_h_consistency: cons,
        u_h_unitarity: unit_res,
        column_expansion: col,
        right_module: right,
        left_module: left,
        inner_products: inner,
    })
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct CorepResiduals {
    /// Least-squares consistency of the defining relation of `λ`.
    pub consistency: f64,
    /// Distance of `(Δ⊗ι)(X)` column slices from `𝒫`.
    pub column_membership: f64,
    pub isometry: f64,
    pub membership: f64,
    pub commutant: f64,
    /// `(Δ⊗ι)(λ) = λ₂₃λ₁₃`
    pub lambda_corep: f64,
    /// `(Δ⊗ι)(ρ) = ρ₁₃ρ₂₃`
    pub corep: f64,
    pub unitarity: f64,
}

#[derive(Clone, Debug)]
pub struct InducedCorep {
    /// `λ` on `H_M ⊗ 𝒦`.
    pub lambda: CMat,
    /// `ρ = λ* ∈ M ⊗ B(𝒦)`.
    pub rho: Element,
    pub residuals: CorepResiduals,
}

impl InducedCorep {
    /// `(ι ⊗ Tr)(ρ)`.
    pub fn character(&self) -> Result<Element> {
        let k = self.rho.layout().factor(1).clone();
        self.rho.slice(1, &Functional::trace(&k.layout()))
    }
}

/// `Υ₁₂` on `H_M ⊗ H_θ ⊗ K`.
fn upsilon12(b: &ActionBundle, k: usize) -> Result<CMat> {
    Ok(b.upsilon.map_leg(0, &b.m.gns.pi)?.into_mat().kronecker(&CMat::identity(k, k)))
}

pub fn build_lambda_rho(b: &ActionBundle, p: &PSpace, car: &CarrierSpace) -> Result<InducedCorep> {
    if p.h != 1 {
        return Err(Error::InvalidInput("λ is built from 𝒫 = 𝒫_ℂ".into()));
    }
    let tol = b.tol;
    let n = b.m.gns.dim();
    let (r, k) = (car.rank, p.k);
    let ups = upsilon12(b, k)?;
    let trace1 = Functional::trace(&k_layout(1));
    let parts: Vec<Result<(CMat, CMat, f64)>> = par::map_range(p.dim(), |a| {
        let x = p.basis[a].slice(0, &trace1)?;
        let y = x.map_leg(0, &b.m.comult)?.map_leg(0, &b.m.gns.pi)?;
        let (ystar, res) = car.star_columns(p, &y)?;
        let src = CMat::identity(n, n).kronecker(&car.star_basis(a));
        Ok((src, ystar * ups.adjoint(), res))
    });
    let mut srcs = Vec::new();
    let mut dsts = Vec::new();
    let mut colm: f64 = 0.0;
    for part in parts {
        let (sm, dm, res) = part?;
        colm = colm.max(res);
        srcs.push(sm);
        dsts.push(dm);
    }
    let hcat = |ms: &[CMat]| -> CMat {
        let cols: usize = ms.iter().map(|m| m.ncols()).sum();
        let mut out = CMat::zeros(n * r, cols);
        let mut off = 0;
        for m in ms {
            out.view_mut((0, off), (m.nrows(), m.ncols())).copy_from(m);
            off += m.ncols();
        }
        out
    };
    let (lambda, consistency) = linalg::solve_right(&hcat(&dsts), &hcat(&srcs), 1e-12);
    let mut res = CorepResiduals { consistency, column_membership: colm, ..Default::default() };
    check("λ well-defined", consistency, tol, 1.0)?;
    res.isometry = linalg::op_norm(&(lambda.adjoint() * &lambda - CMat::identity(n * r, n * r)));
    let kl = k_layout(r);
    let lam_op = Element::from_matrix_unchecked(&LegLayout::new(vec![b.m.gns.operators(), kl.factor(0).clone()]), lambda.clone());
    let (lam, memb) = pull_back_leg(&lam_op, 0, &b.m.gns)?;
    res.membership = memb;
    let ml = b.m.layout();
    let id_r = CMat::identity(r, r);
    res.commutant = (0..ml.lin_dim())
        .map(|j| {
            let rx = right_mult(&Element::basis(&ml, j)).kronecker(&id_r);
            linalg::op_norm(&(&lambda * &rx - &rx * &lambda))
        })
        .fold(0.0, f64::max);
    let mmk = LegLayout::new(vec![b.m.algebra.clone(), b.m.algebra.clone(), kl.factor(0).clone()]);
    let lhs = lam.map_leg(0, &b.m.comult)?;
    res.lambda_corep = lhs.dist(&(&lam.embed(&mmk, &[1, 2])? * &lam.embed(&mmk, &[0, 2])?));
    let rho = lam.adjoint();
    let lhs = rho.map_leg(0, &b.m.comult)?;
    res.corep = lhs.dist(&(&rho.embed(&mmk, &[0, 2])? * &rho.embed(&mmk, &[1, 2])?));
    res.unitarity = linalg::unitarity_residual(rho.mat()).max(linalg::unitarity_residual(&lambda));
    check("λ isometry", res.isometry, tol, 1.0)?;
    Ok(InducedCorep { lambda, rho, residuals: res })
}

/// Rank reports for the spanning families of `𝒦`.
#[derive(Clone, Debug, Serialize)]
pub struct DenseReport {
    pub dim_k: usize,
    /// Family `(ι⊗φ_N⊗ι)(U₂₃[α(x)⊗(ω⊗ι)(U)])_* v`.
    pub slice_family_rank: usize,
    /// Family `(ι⊗φ_N⊗ι)(U₂₃(α⊗ι)([a*⊗(ω⊗ι)(U)]X))_* v`.
    pub lifted_family_rank: usize,
    /// Largest distance of a family generator from `𝒫`.
    pub membership: f64,
    pub deficit: usize,
}

/// Functionals dual to the canonical basis of `N`.
fn dual_basis(l: &LegLayout) -> Vec<Functional> {
    (0..l.lin_dim())
        .map(|b| {
            let mut v = CVec::zeros(l.lin_dim());
            v[b] = cr(1.0);
            Functional::from_values(l, &v).expect("dimension")
        })
        .collect()
}

/// `(ι⊗φ_N⊗ι)(U₂₃ Z)` for `Z ∈ M ⊗ N ⊗ B(K)`.
fn haar_slice(core: &ActionCore, u: &Element, z: &Element) -> Result<Element> {
    let l3 = z.layout().clone();
    let u23 = u.embed(&l3, &[1, 2])?;
    (&u23 * z).slice(1, &core.n.haar.functional())
}

fn span_rank(vectors: &[CVec], dim: usize) -> usize {
    if vectors.is_empty() {
        return 0;
    }
    let m = CMat::from_columns(vectors);
    let top = linalg::op_norm(&m);
    if top == 0.0 {
        return 0;
    }
    linalg::rank(&m, 1e-8).min(dim)
}

fn push_star_vectors(car: &CarrierSpace, p: &PSpace, x: &Element, out: &mut Vec<CVec>) -> f64 {
    let (st, res) = car.star(p, &lift(x));
    for j in 0..st.ncols() {
        out.push(st.column(j).into_owned());
    }
    res
}

pub fn dense_families(core: &ActionCore, u: &Element, p: &PSpace, car: &CarrierSpace, seed: u64) -> Result<DenseReport> {
    let ml = core.m.layout();
    let nl = core.n.layout();
    let k = p.k;
    let oms = dual_basis(&nl);
    let slices: Vec<Element> = oms.iter().map(|om| u.slice(0, om)).collect::<Result<_>>()?;
    let mut memb: f64 = 0.0;
    let mut fam = Vec::new();
    for x in 0..ml.lin_dim() {
        let ax = core.alpha.apply(&Element::basis(&ml, x))?;
        for b in &slices {
            let y = haar_slice(core, u, &ax.tensor(b))?;
            memb = memb.max(push_star_vectors(car, p, &y, &mut fam));
        }
    }
    let slice_rank = span_rank(&fam, car.rank);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x612);
    let mkl = LegLayout::new(vec![core.m.algebra.clone(), MultiMatrixAlgebra::full(k)]);
    let xs: Vec<Element> = (0..2).map(|_| random_element(&mkl, &mut rng)).collect();
    let mut fam2 = Vec::new();
    for a in 0..ml.lin_dim() {
        let ea = Element::basis(&ml, a).adjoint();
        for b in &slices {
            let left = ea.tensor(b);
            for x in &xs {
                let w = (&left * x).map_leg(0, &core.alpha)?;
                let y = haar_slice(core, u, &w)?;
                memb = memb.max(push_star_vectors(car, p, &y, &mut fam2));
            }
        }
    }
    let lifted_rank = span_rank(&fam2, car.rank);
    let deficit = car.rank - slice_rank.min(lifted_rank);
    Ok(DenseReport { dim_k: car.rank, slice_family_rank: slice_rank, lifted_family_rank: lifted_rank, membership: memb, deficit })
}

/// Certificate for unitarity of `ρ` through `𝒦₀`.
#[derive(Clone, Debug, Serialize)]
pub struct UnitarityReport {
    pub n0_rank: usize,
    pub dim_m: usize,
    pub dim_k0: usize,
    pub dim_k: usize,
    pub k0_deficit: usize,
    /// `‖(1 ⊗ (1−p₀))λ‖`
    pub lambda_into_k0: f64,
    /// `‖(1 ⊗ (1−p₀))(a⊗1)λ(1⊗p₀)‖` over a basis of `M`.
    pub module_into_k0: f64,
    /// `λ(H_M ⊗ 𝒦₀) = H_M ⊗ 𝒦₀`: inclusion residual and rank deficit.
    pub lambda_onto_k0: f64,
    pub lambda_onto_rank_deficit: usize,
    pub lambda_coisometry: f64,
    pub rho_unitarity: f64,
}

pub fn unitarity_certificate(b: &ActionBundle, u: &Element, p: &PSpace, car: &CarrierSpace, corep: &InducedCorep) -> Result<UnitarityReport> {
    let ml = b.m.layout();
    let m = ml.lin_dim();
    // 𝒩₀ = span{(ω⊗ι)Δ(a)}
    let moms = dual_basis(&ml);
    let mut n0 = Vec::new();
    for a in 0..m {
        let da = b.m.comult.apply(&Element::basis(&ml, a))?;
        for om in &moms {
            n0.push(da.slice(0, om)?.coeffs());
        }
    }
    let n0_basis = linalg::range_basis(&CMat::from_columns(&n0), 1e-10);
    let n0_rank = n0_basis.ncols();
    let n0_elems: Vec<Element> = (0..n0_rank).map(|j| Element::from_coeffs(&ml, &n0_basis.column(j).into_owned())).collect::<Result<_>>()?;
    let nl = b.n.layout();
    let slices: Vec<Element> = dual_basis(&nl).iter().map(|om| u.slice(0, om)).collect::<Result<_>>()?;
    let pairs: Vec<(usize, usize)> = (0..n0_rank).flat_map(|i| (0..n0_rank).map(move |j| (i, j))).collect();
    let chunks: Vec<Result<Vec<CVec>>> = par::map_slice(&pairs, |&(i, j)| {
        let yx = &n0_elems[i].adjoint() * &n0_elems[j];
        let ayx = b.alpha.apply(&yx)?;
        let mut out = Vec::new();
        for s in &slices {
            let y = haar_slice(&b.core, u, &ayx.tensor(s))?;
            push_star_vectors(car, p, &y, &mut out);
        }
        Ok(out)
    });
    let mut fam = Vec::new();
    for c in chunks {
        fam.extend(c?);
    }
    let r = car.rank;
    let k0 = if fam.is_empty() { CMat::zeros(r, 0) } else { linalg::range_basis(&CMat::from_columns(&fam), 1e-8) };
    let dim_k0 = k0.ncols();
    let p0 = &k0 * k0.adjoint();
    let n = b.m.gns.dim();
    let id_n = CMat::identity(n, n);
    let q0 = id_n.kronecker(&(CMat::identity(r, r) - &p0));
    let p0f = id_n.kronecker(&p0);
    let lam = &corep.lambda;
    let into = linalg::op_norm(&(&q0 * lam));
    let mut module: f64 = 0.0;
    for a in 0..m {
        let pa = b.m.gns.pi(&Element::basis(&ml, a)).kronecker(&CMat::identity(r, r));
        module = module.max(linalg::op_norm(&(&q0 * pa * lam * &p0f)));
    }
    let lp = lam * &p0f;
    let onto = linalg::op_norm(&(&p0f * &lp - &lp));
    let onto_rank = linalg::rank(&lp, 1e-8);
    Ok(UnitarityReport {
        n0_rank,
        dim_m: m,
        dim_k0,
        dim_k: r,
        k0_deficit: r - dim_k0,
        lambda_into_k0: into,
        module_into_k0: module,
        lambda_onto_k0: onto,
        lambda_onto_rank_deficit: (n * dim_k0).saturating_sub(onto_rank),
        lambda_coisometry: linalg::op_norm(&(lam * lam.adjoint() - CMat::identity(n * r, n * r))),
        rho_unitarity: corep.residuals.unitarity,
    })
}

/// Everything produced by one run of the construction.
#[derive(Clone, Debug)]
pub struct Induction {
    pub p: PSpace,
    pub carrier: CarrierSpace,
    pub corep: InducedCorep,
}

pub fn induce(b: &ActionBundle, u: &Element, seed: u64) -> Result<Induction> {
    let p = solve_p(1, &b.core, u, seed)?;
    let carrier = carrier_space(&p, &b.core)?;
    let corep = build_lambda_rho(b, &p, &carrier)?;
    Ok(Induction { p, carrier, corep })
}

#[derive(Clone, Debug, Serialize)]
pub struct WeightChangeReport {
    pub intertwiner_unitarity: f64,
    pub xi_impl1: f64,
    pub xi_impl2: f64,
    pub u_consistency: f64,
    pub u_unitarity: f64,
    /// `‖ϱ − (1⊗𝒰)ρ(1⊗𝒰*)‖`
    pub equivalence: f64,
}

/// Compares the constructions for `θ` and for `η` (a density on `Q`).
pub fn weight_change(b: &ActionBundle, u: &Element, ind: &Induction, eta: &Element, seed: u64) -> Result<WeightChangeReport> {
    let core_eta = ActionCore::new(b.m.clone(), b.n.clone(), b.alpha.clone(), Some(eta.clone()), b.tol)?;
    let w = canonical_gns_intertwiner(&b.theta, &core_eta.theta)?;
    let rm = b.m.layout().real_dim();
    let wl = CMat::identity(rm, rm).kronecker(&w);
    let xi = Element::from_matrix_unchecked(b.upsilon.layout(), &wl * b.upsilon.mat() * wl.adjoint());
    let (i1, i2) = core_eta.impl_residuals(&xi)?;
    let b_eta = core_eta.with_upsilon(xi, "transported from θ")?;
    let ind_eta = induce(&b_eta, u, seed)?;
    let (pd, k) = (ind.p.dim(), ind.p.k);
    let wk = w.kronecker(&CMat::identity(k, k));
    let src: Vec<CMat> = (0..pd).map(|a| ind.carrier.star_basis(a)).collect();
    let dst: Vec<CMat> = (0..pd).map(|a| ind_eta.carrier.star_basis(a) * &wk).collect();
    let hcat = |ms: &[CMat]| -> CMat {
        let rows = ms[0].nrows();
        let cols: usize = ms.iter().map(|m| m.ncols()).sum();
        let mut out = CMat::zeros(rows, cols);
        let mut off = 0;
        for m in ms {
            out.view_mut((0, off), (rows, m.ncols())).copy_from(m);
            off += m.ncols();
        }
        out
    };
    let (uu, cons) = linalg::solve_right(&hcat(&dst), &hcat(&src), 1e-12);
    let uu_unit = if uu.nrows() == uu.ncols() { linalg::unitarity_residual(&uu) } else { f64::INFINITY };
    let equivalence = if uu.nrows() == uu.ncols() {
        let big = CMat::identity(rm, rm).kronecker(&uu);
        linalg::op_norm(&(ind_eta.corep.rho.mat() - &big * ind.corep.rho.mat() * big.adjoint()))
    } else {
        f64::INFINITY
    };
    Ok(WeightChangeReport {
        intertwiner_unitarity: linalg::unitarity_residual(&w),
        xi_impl1: i1,
        xi_impl2: i2,
        u_consistency: cons,
        u_unitarity: uu_unit,
        equivalence,
    })
}

/// Unitary `T : K₁ → K₂` with `(1⊗T)A(1⊗T*) = B` for `A ∈ M⊗B(K₁)`,
/// `B ∈ M⊗B(K₂)`; returns the intertwiner and its residual.
pub fn find_intertwiner(a: &Element, b: &Element, seed: u64) -> Result<(CMat, f64)> {
    let (k1, k2) = (a.layout().factor(1).real_dim(), b.layout().factor(1).real_dim());
    if a.layout().factor(0) != b.layout().factor(0) {
        return Err(Error::Dimension("intertwiner between different algebras".into()));
    }
    if k1 != k2 {
        return Ok((CMat::zeros(k2, k1), f64::INFINITY));
    }
    let rm = a.layout().factor(0).real_dim();
    let id = CMat::identity(rm, rm);
    let mut cols = Vec::with_capacity(k1 * k2);
    for i in 0..k2 {
        for j in 0..k1 {
            let mut e = CMat::zeros(k2, k1);
            e[(i, j)] = cr(1.0);
            let t = id.kronecker(&e);
            let l = &t * a.mat() - b.mat() * &t;
            cols.push(CVec::from_iterator(l.len(), l.iter().copied()));
        }
    }
    let ns = linalg::null_space_abs(&CMat::from_columns(&cols), 1e-8);
    if ns.ncols() == 0 {
        return Ok((CMat::zeros(k2, k1), f64::INFINITY));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coef = CVec::from_fn(ns.ncols(), |_, _| C64::new(rng.gen_range(0.5..1.5), rng.gen_range(-0.5..0.5)));
    let v = &ns * coef;
    let t = CMat::from_fn(k2, k1, |i, j| v[i * k1 + j]);
    // unitary part of the polar decomposition
    let tt = t.adjoint() * &t;
    let inv_sqrt = linalg::herm_fn(&tt, |x| cr(if x > 1e-12 { 1.0 / x.sqrt() } else { 0.0 }));
    let w = &t * inv_sqrt;
    let big = id.kronecker(&w);
    let res = linalg::op_norm(&(&big * a.mat() * big.adjoint() - b.mat())).max(linalg::unitarity_residual(&w));
    Ok((w, res))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{self, FiniteGroup};
    use crate::quantum_group::dual_quantum_group;

    const TOL: f64 = 1e-9;

    fn subgroup_bundle(gname: &str, spec: &str) -> (FiniteGroup, Vec<usize>, ActionBundle) {
        let g = FiniteGroup::by_name(gname).unwrap();
        let h = g.subgroup_by_spec(spec).unwrap();
        let m = catalog::function_algebra(&g, TOL).unwrap();
        let n = catalog::function_algebra(&g.restrict(&h).unwrap(), TOL).unwrap();
        let alpha = catalog::subgroup_action_map(&g, &h).unwrap();
        let core = ActionCore::new(m, n, alpha, None, TOL).unwrap();
        let closed = catalog::classical_upsilon(&g, &core.q.units).unwrap();
        let dual = dual_quantum_group(&core.m, TOL).unwrap();
        let b = core.implement(&dual, Some((closed, "translation".into()))).unwrap();
        (g, h, b)
    }

    #[test]
    fn frobenius_s3_c3() {
        let (g, h, b) = subgroup_bundle("S3", "C3");
        let rep = catalog::rep_by_label(&g, &h, "chi1", TOL).unwrap();
        let u = catalog::corep_from_rep(&rep);
        let ind = induce(&b, &u, 1).unwrap();
        assert_eq!(ind.p.dim(), 2);
        assert_eq!(ind.carrier.rank, 2);
        let chi = catalog::values_on_group(&ind.corep.character().unwrap());
        let want = catalog::classical_induction_oracle(&g, &h, &rep).unwrap();
        for (a, w) in chi.iter().zip(&want) {
            assert!((a - w).norm() < 1e-8, "{chi:?} vs {want:?}");
        }
        let r = &ind.corep.residuals;
        assert!(r.isometry < 1e-9 && r.corep < 1e-9 && r.unitarity < 1e-9 && r.commutant < 1e-9, "{r:?}");
        let d = dense_families(&b, &u, &ind.p, &ind.carrier, 1).unwrap();
        assert_eq!(d.deficit, 0, "{d:?}");
        let un = unitarity_certificate(&b, &u, &ind.p, &ind.carrier, &ind.corep).unwrap();
        assert_eq!(un.k0_deficit, 0);
        assert_eq!(un.n0_rank, 6);
        assert!(un.lambda_into_k0 < 1e-9 && un.lambda_onto_rank_deficit == 0, "{un:?}");
    }

    #[test]
    fn complex_character_orientation() {
        let (g, h, b) = subgroup_bundle("Z6", "C3");
        let rep = catalog::rep_by_label(&g, &h, "chi1", TOL).unwrap();
        let ind = induce(&b, &catalog::corep_from_rep(&rep), 2).unwrap();
        let chi = catalog::values_on_group(&ind.corep.character().unwrap());
        let want = catalog::classical_induction_oracle(&g, &h, &rep).unwrap();
        for (a, w) in chi.iter().zip(&want) {
            assert!((a - w).norm() < 1e-8, "{chi:?} vs {want:?}");
        }
    }

    #[test]
    fn full_subgroup_returns_u() {
        let (g, h, b) = subgroup_bundle("S3", "full");
        let u = catalog::corep_from_rep(&catalog::rep_by_label(&g, &h, "std", TOL).unwrap());
        let ind = induce(&b, &u, 3).unwrap();
        assert_eq!(ind.carrier.rank, 2);
        let (_, res) = find_intertwiner(&ind.corep.rho, &u, 3).unwrap();
        assert!(res < 1e-8, "{res:e}");
    }

    #[test]
    fn trivial_subgroup_gives_regular() {
        let (g, h, b) = subgroup_bundle("Z4", "trivial");
        let d = 2;
        let u = catalog::corep_from_rep(&catalog::rep_by_label(&g, &h, &format!("trivial{d}"), TOL).unwrap());
        let ind = induce(&b, &u, 4).unwrap();
        assert_eq!(ind.carrier.rank, g.order() * d);
        let reg = catalog::regular_corep(&g, d);
        let (_, res) = find_intertwiner(&ind.corep.rho, &reg, 4).unwrap();
        assert!(res < 1e-8, "{res:e}");
    }

    #[test]
    fn star_maps_for_two_dimensional_h() {
        let (g, h, b) = subgroup_bundle("S3", "C2");
        let u = catalog::corep_from_rep(&catalog::rep_by_label(&g, &h, "sign", TOL).unwrap());
        let r = star_map_certificate(&b, &u, 2, 5).unwrap();
        assert_eq!(r.dim_k_h, 2 * r.dim_k);
        for v in [r.u_h_consistency, r.u_h_unitarity, r.column_expansion, r.right_module, r.left_module, r.inner_products] {
            assert!(v < 1e-9, "{r:?}");
        }
    }

    #[test]
    fn weight_change_is_an_equivalence() {
        let (g, h, b) = subgroup_bundle("S3", "C3");
        let u = catalog::corep_from_rep(&catalog::rep_by_label(&g, &h, "chi1", TOL).unwrap());
        let ind = induce(&b, &u, 6).unwrap();
        let ql = b.q.layout();
        let eta = Element::from_coeffs(&ql, &CVec::from_vec(vec![cr(2.0), cr(1.0)])).unwrap();
        let r = weight_change(&b, &u, &ind, &eta, 6).unwrap();
        assert!(r.equivalence < 1e-8 && r.u_unitarity < 1e-9 && r.xi_impl1 < 1e-9 && r.xi_impl2 < 1e-9, "{r:?}");
    }

    #[test]
    fn quotient_action_with_two_dimensional_corep() {
        let g = FiniteGroup::s3().unwrap();
        let k = FiniteGroup::cyclic(2).unwrap();
        let (m, ga) = catalog::group_algebra(&g, TOL).unwrap();
        let (n, ka) = catalog::group_algebra(&k, TOL).unwrap();
        let alpha = catalog::quotient_action_map(&g, &ga, &k, &ka, &catalog::s3_sign_map()).unwrap();
        let core = ActionCore::new(m, n, alpha, None, TOL).unwrap();
        let dual = dual_quantum_group(&core.m, TOL).unwrap();
        let b = core.implement(&dual, None).unwrap();
        let sw = CMat::from_row_slice(2, 2, &[cr(0.0), cr(1.0), cr(1.0), cr(0.0)]);
        let id = CMat::identity(2, 2);
        let u = catalog::grading_corep(&ka, &[(&id + &sw) * cr(0.5), (&id - &sw) * cr(0.5)]).unwrap();
        let ind = induce(&b, &u, 7).unwrap();
        let r = &ind.corep.residuals;
        assert!(r.unitarity < 1e-8 && r.corep < 1e-8, "{r:?}");
        let d = dense_families(&b, &u, &ind.p, &ind.carrier, 7).unwrap();
        assert_eq!(d.deficit, 0);
    }
}
