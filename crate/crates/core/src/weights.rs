//! Weights given by densities, their GNS constructions and modular theory.
//!
//! The GNS space of a faithful weight `φ = Tr(h ·)` is the algebra itself with
//! the Hilbert–Schmidt inner product. Matrix units are orthonormal, so vectors
//! are coefficient vectors; `Λ_φ(x) = x h^{1/2}` and `π_φ` is left
//! multiplication. This is a standard form for every faithful weight, which is
//! why the canonical intertwiner between two of them comes out as the identity.

use crate::algebra::{Element, Functional, LegLayout, LinearAlgebraMap, MatFn, MultiMatrixAlgebra};
use crate::linalg::{self, antilinear_polar, cr, AntiLinear, CMat, CVec, C64, ZERO};
use crate::{Error, Result};

/// Faithful positive functional `x ↦ Tr(h x)`.
#[derive(Clone, Debug)]
pub struct Weight {
    density: Element,
}

impl Weight {
    pub fn new(density: Element) -> Result<Self> {
        let tol = crate::default_tol();
        if !density.is_hermitian(tol) {
            return Err(Error::InvalidInput("weight density is not self-adjoint".into()));
        }
        let (vals, _) = linalg::herm_eig(density.mat());
        let top = vals.first().copied().unwrap_or(0.0);
        let low = vals.last().copied().unwrap_or(0.0);
        if top <= 0.0 || low <= tol * top {
            return Err(Error::InvalidInput(format!("weight density is not positive invertible (spectrum in [{low:.3e}, {top:.3e}])")));
        }
        Ok(Self { density })
    }

    /// The un-normalized block trace.
    pub fn trace(layout: &LegLayout) -> Self {
        Self { density: Element::identity(layout) }
    }

    /// Weight with a diagonal density given blockwise by `diag`, for commutative
    /// or general algebras (entries along the realization diagonal).
    pub fn diagonal(layout: &LegLayout, diag: &[f64]) -> Result<Self> {
        if diag.len() != layout.real_dim() {
            return Err(Error::Dimension("diagonal density of the wrong length".into()));
        }
        let m = CMat::from_diagonal(&CVec::from_iterator(diag.len(), diag.iter().map(|&x| cr(x))));
        Self::new(Element::from_matrix(layout, &m)?.0)
    }

    pub fn layout(&self) -> &LegLayout {
        self.density.layout()
    }

    pub fn density(&self) -> &Element {
        &self.density
    }

    pub fn functional(&self) -> Functional {
        Functional::from_density(&self.density)
    }

    pub fn eval(&self, x: &Element) -> C64 {
        (self.density.mat() * x.mat()).trace()
    }

    pub fn scale(&self, c: f64) -> Result<Self> {
        Self::new(self.density.scale(cr(c)))
    }

    pub fn add(&self, other: &Weight) -> Result<Self> {
        Self::new(&self.density + &other.density)
    }

    /// Tensor product weight with density `h ⊗ k`.
    pub fn tensor(&self, other: &Weight) -> Weight {
        Weight { density: self.density.tensor(&other.density) }
    }

    /// Largest `|φ(xy) − φ(yx)|` over basis pairs.
    pub fn trace_defect(&self) -> f64 {
        let l = self.layout();
        let n = l.lin_dim();
        let basis: Vec<Element> = (0..n).map(|b| Element::basis(l, b)).collect();
        crate::par::max_range(n * n, |p| {
            let (a, b) = (&basis[p / n], &basis[p % n]);
            (self.eval(&(a * b)) - self.eval(&(b * a))).norm()
        })
    }
}

/// Left multiplication by `x` on coefficient vectors.
pub fn left_mult(x: &Element) -> CMat {
    let entries = x.layout().entries();
    let n = entries.len();
    let m = x.mat();
    CMat::from_fn(n, n, |a, b| {
        let (ra, ca) = entries[a];
        let (rb, cb) = entries[b];
        if ca == cb {
            m[(ra, rb)]
        } else {
            ZERO
        }
    })
}

/// Right multiplication by `y` on coefficient vectors.
pub fn right_mult(y: &Element) -> CMat {
    let entries = y.layout().entries();
    let n = entries.len();
    let m = y.mat();
    CMat::from_fn(n, n, |a, b| {
        let (ra, ca) = entries[a];
        let (rb, cb) = entries[b];
        if ra == rb {
            m[(cb, ca)]
        } else {
            ZERO
        }
    })
}

/// Permutation implementing `x ↦ x*` on coefficients up to conjugation:
/// `coeffs(x*) = P · conj(coeffs(x))`.
pub fn star_permutation(layout: &LegLayout) -> CMat {
    let entries = layout.entries();
    let n = entries.len();
    let index: std::collections::HashMap<(usize, usize), usize> =
        entries.iter().enumerate().map(|(b, &e)| (e, b)).collect();
    let mut p = CMat::zeros(n, n);
    for (b, &(r, c)) in entries.iter().enumerate() {
        p[(index[&(c, r)], b)] = cr(1.0);
    }
    p
}

/// GNS construction in the Hilbert–Schmidt model.
#[derive(Clone, Debug)]
pub struct GNSData {
    layout: LegLayout,
    /// `π_φ` as a map into `B(H_φ)`.
    pub pi: LinearAlgebraMap,
    /// Matrix of `Λ_φ` from coefficients to `H_φ`.
    pub lambda: CMat,
    lambda_inv: CMat,
}

impl GNSData {
    pub fn layout(&self) -> &LegLayout {
        &self.layout
    }

    pub fn dim(&self) -> usize {
        self.lambda.nrows()
    }

    /// `B(H_φ)` as an algebra.
    pub fn operators(&self) -> MultiMatrixAlgebra {
        MultiMatrixAlgebra::full(self.dim())
    }

    pub fn lambda(&self, x: &Element) -> CVec {
        &self.lambda * x.coeffs()
    }

    /// Element `x` with `Λ_φ(x) = ξ`.
    pub fn lambda_inverse(&self, xi: &CVec) -> Element {
        Element::from_coeffs(&self.layout, &(&self.lambda_inv * xi)).expect("dimension")
    }

    pub fn pi(&self, x: &Element) -> CMat {
        left_mult(x)
    }

    pub fn cyclic_vector(&self) -> CVec {
        self.lambda(&Element::identity(&self.layout))
    }

    /// Pulls an operator on `H_φ` that lies in `π_φ(M)` back to `M`; returns the
    /// element and the distance of the operator from `π_φ(M)`.
    pub fn pi_inverse(&self, op: &CMat) -> (Element, f64) {
        let one = self.layout.factors().iter().fold(CVec::from_element(1, cr(1.0)), |acc, f| acc.kronecker(&f.one_coeffs()));
        let x = Element::from_coeffs(&self.layout, &(op * one)).expect("dimension");
        let back = self.pi(&x);
        let res = linalg::op_norm(&(back - op));
        (x, res)
    }
}

pub fn gns(w: &Weight) -> GNSData {
    let h_half = w.density.matrix_function(MatFn::Sqrt).expect("faithful weight");
    let lambda = right_mult(&h_half);
    let h_inv_half = w.density.matrix_function(MatFn::InvSqrt).expect("faithful weight");
    let lambda_inv = right_mult(&h_inv_half);
    let layout = w.layout().clone();
    let n = layout.lin_dim();
    let ops = MultiMatrixAlgebra::full(n).layout();
    let images: Vec<Element> = (0..n)
        .map(|b| Element::from_matrix_unchecked(&ops, left_mult(&Element::basis(&layout, b))))
        .collect();
    let pi = LinearAlgebraMap::from_images(&layout, &ops, &images).expect("dimensions");
    GNSData { layout, pi, lambda, lambda_inv }
}

/// Tomita–Takesaki data of a weight.
#[derive(Clone, Debug)]
pub struct ModularData {
    pub nabla: CMat,
    pub j: AntiLinear,
    density: Element,
}

impl ModularData {
    /// `σ_t(x) = h^{it} x h^{-it}`.
    pub fn sigma(&self, t: f64, x: &Element) -> Element {
        self.sigma_z(C64::new(t, 0.0), x)
    }

    /// Analytic extension `σ_z(x) = h^{iz} x h^{-iz}`.
    pub fn sigma_z(&self, z: C64, x: &Element) -> Element {
        let i = C64::new(0.0, 1.0);
        let a = self.density.matrix_function(MatFn::Pow(i * z)).expect("density");
        let b = self.density.matrix_function(MatFn::Pow(-i * z)).expect("density");
        &(&a * x) * &b
    }

    /// `∇^{it}` on `H_φ`.
    pub fn nabla_it(&self, t: f64) -> CMat {
        linalg::herm_fn(&self.nabla, |x| C64::from_polar(1.0, t * x.ln()))
    }

    pub fn nabla_pow(&self, p: f64) -> CMat {
        linalg::herm_fn(&self.nabla, |x| cr(x.powf(p)))
    }

    /// `T_J(y) = J y* J` for an operator `y` on `H_φ`.
    pub fn t_j(&self, y: &CMat) -> CMat {
        // J y* J = (A K) y* (A K) = A conj(y*) conj(A)
        &self.j.lin * y.adjoint().conjugate() * self.j.lin.conjugate()
    }
}

/// `T: Λ_1(x) ↦ Λ_2(x*)` as an antilinear map.
fn t_map(g1: &GNSData, g2: &GNSData) -> AntiLinear {
    let p = star_permutation(&g1.layout);
    AntiLinear::new(&g2.lambda * p * g1.lambda_inv.conjugate())
}

pub fn modular_data(w: &Weight, g: &GNSData) -> ModularData {
    let t = t_map(g, g);
    let (j, nabla) = antilinear_polar(&t);
    ModularData { nabla, j, density: w.density.clone() }
}

/// Relative modular data of a pair `(φ₂, φ₁)`.
#[derive(Clone, Debug)]
pub struct RelativeModularData {
    pub t: AntiLinear,
    pub j: AntiLinear,
    /// `∇_{φ₂,φ₁}` on `H_{φ₁}`.
    pub nabla: CMat,
}

pub fn relative_modular(g2: &GNSData, g1: &GNSData) -> RelativeModularData {
    let t = t_map(g1, g2);
    let (j, nabla) = antilinear_polar(&t);
    RelativeModularData { t, j, nabla }
}

/// Connes cocycle `(Dφ : Dψ)_t = h_φ^{it} h_ψ^{-it}`.
pub fn connes_cocycle(phi: &Weight, psi: &Weight, t: f64) -> Result<Element> {
    if phi.layout() != psi.layout() {
        return Err(Error::Dimension("Connes cocycle of weights on different algebras".into()));
    }
    let a = phi.density.matrix_function(MatFn::PowerIt(t))?;
    let b = psi.density.matrix_function(MatFn::PowerIt(-t))?;
    Ok(&a * &b)
}

/// Operator-valued weight `(φ ⊗ ι)` applied to leg `leg`.
pub fn ovw_slice(x: &Element, phi: &Weight, leg: usize) -> Result<Element> {
    x.slice(leg, &phi.functional())
}

/// KSGNS map `(λ_φ ⊗ ι)(x) : H → H_φ ⊗ H` for `x ∈ M ⊗ N`, with `N` represented
/// on `H` by `rep`.
pub fn ksgns(x: &Element, phi: &Weight, g: &GNSData, rep: &LinearAlgebraMap) -> Result<CMat> {
    let l = x.layout();
    if l.legs() != 2 || l.factor(0) != phi.layout().factor(0) || rep.source.factor(0) != l.factor(1) {
        return Err(Error::Dimension("KSGNS needs x ∈ M ⊗ N with φ on M and a representation of N".into()));
    }
    let dh = rep.target.real_dim();
    let m = l.factor(0).lin_dim();
    let nn = l.factor(1).lin_dim();
    let coeffs = x.coeffs();
    let mut out = CMat::zeros(g.dim() * dh, dh);
    let mlayout = l.factor(0).layout();
    let nlayout = l.factor(1).layout();
    for a in 0..m {
        let xa = CVec::from_iterator(nn, (0..nn).map(|b| coeffs[a * nn + b]));
        if xa.iter().all(|z| *z == ZERO) {
            continue;
        }
        let xb = Element::from_coeffs(&nlayout, &xa)?;
        let op = rep.apply(&xb)?.into_mat();
        let la = g.lambda(&Element::basis(&mlayout, a));
        out += la.kronecker(&op);
    }
    Ok(out)
}

/// Vector of the natural cone representing the state `Tr(d ·)`:
/// `∇^{1/4} Λ(h^{-1/4} d^{1/2} h^{-1/4})`.
pub fn cone_vector(w: &Weight, g: &GNSData, md: &ModularData, d: &Element) -> Result<CVec> {
    let hq = w.density.matrix_function(MatFn::Pow(cr(-0.25)))?;
    let ds = d.matrix_function(MatFn::Sqrt)?;
    let a = &(&hq * &ds) * &hq;
    Ok(md.nabla_pow(0.25) * g.lambda(&a))
}

/// Canonical unitary `u : H_θ → H_η`, sending the natural cone of `θ` onto that
/// of `η`.
pub fn canonical_gns_intertwiner(theta: &Weight, eta: &Weight) -> Result<CMat> {
    if theta.layout() != eta.layout() {
        return Err(Error::Dimension("intertwiner between weights on different algebras".into()));
    }
    let layout = theta.layout().clone();
    let (gt, ge) = (gns(theta), gns(eta));
    let (mt, me) = (modular_data(theta, &gt), modular_data(eta, &ge));
    let n = layout.lin_dim();
    // positive densities 1 + ε(e_b + e_b*) and 1 + ε i(e_b − e_b*) span the algebra
    let one = Element::identity(&layout);
    let mut src = Vec::new();
    let mut dst = Vec::new();
    for b in 0..n {
        let e = Element::basis(&layout, b);
        for z in [&e + &e.adjoint(), (&e - &e.adjoint()).scale(C64::new(0.0, 1.0))] {
            let d = &one + &z.scale(cr(0.25));
            src.push(cone_vector(theta, &gt, &mt, &d)?);
            dst.push(cone_vector(eta, &ge, &me, &d)?);
        }
    }
    let s = CMat::from_columns(&src);
    let t = CMat::from_columns(&dst);
    let (u, res) = linalg::solve_right(&t, &s, 1e-12);
    crate::check("canonical intertwiner consistency", res, crate::default_tol(), 1.0)?;
    crate::check("canonical intertwiner unitarity", linalg::unitarity_residual(&u), crate::default_tol(), 1.0)?;
    Ok(u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rand_elem(layout: &LegLayout, rng: &mut ChaCha8Rng) -> Element {
        let v = CVec::from_iterator(layout.lin_dim(), (0..layout.lin_dim()).map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))));
        Element::from_coeffs(layout, &v).unwrap()
    }

    fn rand_weight(layout: &LegLayout, rng: &mut ChaCha8Rng) -> Weight {
        let x = rand_elem(layout, rng);
        Weight::new(&(&x * &x.adjoint()) + &Element::scalar(layout, cr(0.3))).unwrap()
    }

    #[test]
    fn gns_examples() {
        let d2 = MultiMatrixAlgebra::diagonal(2).layout();
        let w = Weight::diagonal(&d2, &[0.5, 0.5]).unwrap();
        let g = gns(&w);
        assert!((g.cyclic_vector().norm_squared() - 1.0).abs() < 1e-14);
        let m2 = MultiMatrixAlgebra::full(2).layout();
        let e12 = Element::basis(&m2, 1);
        let g = gns(&Weight::trace(&m2));
        assert!((g.lambda(&e12).norm_squared() - 1.0).abs() < 1e-14);
        let g = gns(&Weight::diagonal(&m2, &[1.0, 2.0]).unwrap());
        assert!((g.lambda(&e12).norm_squared() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn gns_inner_product_and_modular_identities() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let l = MultiMatrixAlgebra::new(vec![1, 2]).unwrap().layout();
        let w = rand_weight(&l, &mut rng);
        let g = gns(&w);
        let md = modular_data(&w, &g);
        for _ in 0..20 {
            let x = rand_elem(&l, &mut rng);
            let y = rand_elem(&l, &mut rng);
            let ip = g.lambda(&y).dotc(&g.lambda(&x));
            assert!((ip - w.eval(&(&y.adjoint() * &x))).norm() < 1e-12);
            assert!((g.lambda(&(&x * &y)) - g.pi(&x) * g.lambda(&y)).norm() < 1e-12);
            let lhs = md.j.apply(&(md.nabla_pow(0.5) * g.lambda(&x)));
            assert!((lhs - g.lambda(&x.adjoint())).norm() < 1e-10);
            let t = 0.37;
            let lhs = md.nabla_it(t) * g.lambda(&x);
            assert!((lhs - g.lambda(&md.sigma(t, &x))).norm() < 1e-10);
        }
        // J² = 1 and J π(M) J ⊆ π(M)′
        assert!(linalg::fro(&(md.j.compose(&md.j) - CMat::identity(g.dim(), g.dim()))) < 1e-10);
        let x = rand_elem(&l, &mut rng);
        let y = rand_elem(&l, &mut rng);
        let jx = md.t_j(&g.pi(&x));
        assert!(linalg::fro(&(&jx * g.pi(&y) - g.pi(&y) * &jx)) < 1e-10);
    }

    #[test]
    fn modular_examples() {
        let m2 = MultiMatrixAlgebra::full(2).layout();
        let w = Weight::new(Element::scalar(&m2, cr(3.0))).unwrap();
        let md = modular_data(&w, &gns(&w));
        assert!(linalg::fro(&(&md.nabla - CMat::identity(4, 4))) < 1e-12);
        let w = Weight::diagonal(&m2, &[1.0, 2.0]).unwrap();
        let md = modular_data(&w, &gns(&w));
        let e12 = Element::basis(&m2, 1);
        let t = 0.8;
        let s = md.sigma(t, &e12);
        assert!(s.dist(&e12.scale(C64::from_polar(1.0, -t * 2f64.ln()))) < 1e-14);
    }

    #[test]
    fn cocycle_examples() {
        let m2 = MultiMatrixAlgebra::full(2).layout();
        let w = Weight::diagonal(&m2, &[1.0, 2.0]).unwrap();
        let tr = Weight::trace(&m2);
        let t = 1.3;
        let u = connes_cocycle(&w, &tr, t).unwrap();
        let expect = CMat::from_diagonal(&CVec::from_vec(vec![cr(1.0), C64::from_polar(1.0, t * 2f64.ln())]));
        assert!(linalg::fro(&(u.mat() - expect)) < 1e-14);
        assert!(connes_cocycle(&w, &w, t).unwrap().dist(&Element::identity(&m2)) < 1e-14);
        // cocycle identity and chain rule on random densities
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let l = MultiMatrixAlgebra::new(vec![2, 1]).unwrap().layout();
        let (phi, psi, chi) = (rand_weight(&l, &mut rng), rand_weight(&l, &mut rng), rand_weight(&l, &mut rng));
        let mdpsi = modular_data(&psi, &gns(&psi));
        let (s, t) = (0.3, 0.7);
        let lhs = connes_cocycle(&phi, &psi, s + t).unwrap();
        let rhs = &connes_cocycle(&phi, &psi, s).unwrap() * &mdpsi.sigma(s, &connes_cocycle(&phi, &psi, t).unwrap());
        assert!(lhs.dist(&rhs) < 1e-10);
        let chain = &connes_cocycle(&phi, &psi, t).unwrap() * &connes_cocycle(&psi, &chi, t).unwrap();
        assert!(chain.dist(&connes_cocycle(&phi, &chi, t).unwrap()) < 1e-10);
        // ∇_{φ,ψ}^{it} ∇_ψ^{-it} is left multiplication by the cocycle
        let (gphi, gpsi) = (gns(&phi), gns(&psi));
        let rel = relative_modular(&gphi, &gpsi);
        let a = linalg::herm_fn(&rel.nabla, |x| C64::from_polar(1.0, t * x.ln()));
        let b = mdpsi.nabla_it(-t);
        let u = connes_cocycle(&phi, &psi, t).unwrap();
        assert!(linalg::fro(&(a * b - gpsi.pi(&u))) < 1e-10);
    }

    #[test]
    fn relative_modular_of_equal_weights() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let l = MultiMatrixAlgebra::new(vec![2, 1]).unwrap().layout();
        let w = rand_weight(&l, &mut rng);
        let g = gns(&w);
        let md = modular_data(&w, &g);
        let rel = relative_modular(&g, &g);
        assert!(linalg::fro(&(&rel.nabla - &md.nabla)) < 1e-10);
        let jn = md.j.after_linear(&md.nabla_pow(0.5));
        assert!(linalg::fro(&(&rel.t.lin - &jn.lin)) < 1e-10);
    }

    #[test]
    fn ovw_slice_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let a_l = MultiMatrixAlgebra::new(vec![1, 2]).unwrap().layout();
        let b_l = MultiMatrixAlgebra::full(2).layout();
        let phi = rand_weight(&a_l, &mut rng);
        let (a, b) = (rand_elem(&a_l, &mut rng), rand_elem(&b_l, &mut rng));
        let s = ovw_slice(&a.tensor(&b), &phi, 0).unwrap();
        assert!(s.dist(&b.scale(phi.eval(&a))) < 1e-12);
        let x = rand_elem(&a_l.concat(&b_l), &mut rng);
        let om = Functional::from_density(&rand_elem(&b_l, &mut rng));
        let lhs = om.eval(&ovw_slice(&x, &phi, 0).unwrap());
        let rhs = phi.eval(&x.slice(1, &om).unwrap());
        assert!((lhs - rhs).norm() < 1e-11);
        assert!(ovw_slice(&Element::zeros(&a_l.concat(&b_l)), &phi, 0).unwrap().fro() == 0.0);
    }

    #[test]
    fn ksgns_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let m_l = MultiMatrixAlgebra::diagonal(2).layout();
        let n_l = MultiMatrixAlgebra::full(2).layout();
        let phi = rand_weight(&m_l, &mut rng);
        let g = gns(&phi);
        let rep = LinearAlgebraMap::identity(&n_l);
        let (a, b) = (rand_elem(&m_l, &mut rng), rand_elem(&n_l, &mut rng));
        let v = CVec::from_vec(vec![c(0.2, 0.4), c(-0.6, 0.1)]);
        let k = ksgns(&a.tensor(&b), &phi, &g, &rep).unwrap();
        assert!((&k * &v - g.lambda(&a).kronecker(&(b.mat() * &v))).norm() < 1e-12);
        let x = rand_elem(&m_l.concat(&n_l), &mut rng);
        let y = rand_elem(&m_l.concat(&n_l), &mut rng);
        let kx = ksgns(&x, &phi, &g, &rep).unwrap();
        let ky = ksgns(&y, &phi, &g, &rep).unwrap();
        let lhs = ky.adjoint() * &kx;
        let rhs = ovw_slice(&(&y.adjoint() * &x), &phi, 0).unwrap();
        assert!(linalg::fro(&(lhs - rhs.mat())) < 1e-11);
        // column expansion over an orthonormal basis
        let mut col = CVec::zeros(g.dim() * 2);
        for i in 0..2 {
            let mut e = CVec::zeros(2);
            e[i] = cr(1.0);
            let om = Functional::vector(&v, &e).unwrap();
            col += g.lambda(&x.slice(1, &om).unwrap()).kronecker(&e);
        }
        assert!((col - &kx * &v).norm() < 1e-11);
        assert!(linalg::fro(&ksgns(&Element::zeros(&m_l.concat(&n_l)), &phi, &g, &rep).unwrap()) == 0.0);
    }

    #[test]
    fn tensor_weight_gns() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let a_l = MultiMatrixAlgebra::new(vec![1, 2]).unwrap().layout();
        let b_l = MultiMatrixAlgebra::diagonal(2).layout();
        let (phi, psi) = (rand_weight(&a_l, &mut rng), rand_weight(&b_l, &mut rng));
        let t = phi.tensor(&psi);
        let (a, b) = (rand_elem(&a_l, &mut rng), rand_elem(&b_l, &mut rng));
        let lhs = gns(&t).lambda(&a.tensor(&b));
        let rhs = gns(&phi).lambda(&a).kronecker(&gns(&psi).lambda(&b));
        assert!((lhs - rhs).norm() < 1e-12);
        assert!((t.eval(&a.tensor(&b)) - phi.eval(&a) * psi.eval(&b)).norm() < 1e-12);
    }

    #[test]
    fn canonical_intertwiner_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let m2 = MultiMatrixAlgebra::full(2).layout();
        let th = rand_weight(&m2, &mut rng);
        let u = canonical_gns_intertwiner(&th, &th).unwrap();
        assert!(linalg::fro(&(&u - CMat::identity(4, 4))) < 1e-10);
        let u = canonical_gns_intertwiner(&th, &th.scale(2.5).unwrap()).unwrap();
        assert!(linalg::fro(&(&u - CMat::identity(4, 4))) < 1e-10);
        let eta = rand_weight(&m2, &mut rng);
        let u = canonical_gns_intertwiner(&th, &eta).unwrap();
        let (gt, ge) = (gns(&th), gns(&eta));
        let (mt, me) = (modular_data(&th, &gt), modular_data(&eta, &ge));
        for b in 0..4 {
            let x = Element::basis(&m2, b);
            assert!(linalg::fro(&(&u * gt.pi(&x) * u.adjoint() - ge.pi(&x))) < 1e-10);
        }
        // u J_θ = J_η u
        let lhs = mt.j.before_linear(&u);
        let rhs = me.j.after_linear(&u);
        assert!(linalg::fro(&(lhs.lin - rhs.lin)) < 1e-10);
        // the polar part of Λ_η ∘ Λ_θ⁻¹ also intertwines the representations
        let map = &ge.lambda * &gt.lambda_inv;
        let polar = &map * linalg::herm_fn(&(map.adjoint() * &map), |x| cr(1.0 / x.sqrt()));
        for b in 0..4 {
            let x = Element::basis(&m2, b);
            assert!(linalg::fro(&(&polar * gt.pi(&x) * polar.adjoint() - ge.pi(&x))) < 1e-10);
        }
    }
}
