//! Multi-matrix ∗-algebras and their tensor products.
//!
//! An algebra `⊕_k Mat_{n_k}` has the matrix-unit basis `e^{(k)}_{ij}` ordered
//! by `(k, i, j)`. It is realized block-diagonally on `ℂ^{Σ n_k}`. A tensor
//! product is described by a [`LegLayout`]; its elements are realized on the
//! tensor product of the factor realizations, and its coefficients are taken
//! in the product basis ordered lexicographically by leg.

use crate::linalg::{self, cr, herm_eig, CMat, CVec, C64, ONE, ZERO};
use crate::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::ops::{Add, Mul, Neg, Sub};

/// Direct sum of full matrix blocks.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MultiMatrixAlgebra {
    block_dims: Vec<usize>,
    offsets: Vec<usize>,
    lin_offsets: Vec<usize>,
}

impl MultiMatrixAlgebra {
    pub fn new(block_dims: Vec<usize>) -> Result<Self> {
        if block_dims.is_empty() || block_dims.contains(&0) {
            return Err(Error::InvalidInput(format!("block dimensions must be positive, got {block_dims:?}")));
        }
        let mut offsets = Vec::with_capacity(block_dims.len());
        let mut lin_offsets = Vec::with_capacity(block_dims.len());
        let (mut o, mut l) = (0, 0);
        for &n in &block_dims {
            offsets.push(o);
            lin_offsets.push(l);
            o += n;
            l += n * n;
        }
        Ok(Self { block_dims, offsets, lin_offsets })
    }

    /// `Mat_n`, i.e. `B(ℂ^n)`.
    pub fn full(n: usize) -> Self {
        Self::new(vec![n.max(1)]).expect("positive block")
    }

    /// `ℂ^n` as `n` one-dimensional blocks.
    pub fn diagonal(n: usize) -> Self {
        Self::new(vec![1; n.max(1)]).expect("positive blocks")
    }

    /// The scalars `ℂ`.
    pub fn scalars() -> Self {
        Self::full(1)
    }

    pub fn block_dims(&self) -> &[usize] {
        &self.block_dims
    }

    pub fn num_blocks(&self) -> usize {
        self.block_dims.len()
    }

    pub fn lin_dim(&self) -> usize {
        self.block_dims.iter().map(|n| n * n).sum()
    }

    /// Dimension of the block realization space.
    pub fn real_dim(&self) -> usize {
        self.block_dims.iter().sum()
    }

    pub fn block_offset(&self, k: usize) -> usize {
        self.offsets[k]
    }

    pub fn basis_index(&self, k: usize, i: usize, j: usize) -> usize {
        self.lin_offsets[k] + i * self.block_dims[k] + j
    }

    /// `(k, i, j)` label of a basis index.
    pub fn basis_label(&self, b: usize) -> (usize, usize, usize) {
        let k = match self.lin_offsets.binary_search(&b) {
            Ok(k) => k,
            Err(k) => k - 1,
        };
        let r = b - self.lin_offsets[k];
        let n = self.block_dims[k];
        (k, r / n, r % n)
    }

    /// Realization entry `(row, col)` carrying basis element `b`.
    pub fn entry(&self, b: usize) -> (usize, usize) {
        let (k, i, j) = self.basis_label(b);
        (self.offsets[k] + i, self.offsets[k] + j)
    }

    pub fn entries(&self) -> Vec<(usize, usize)> {
        (0..self.lin_dim()).map(|b| self.entry(b)).collect()
    }

    /// Coefficients of the unit.
    pub fn one_coeffs(&self) -> CVec {
        let mut v = CVec::zeros(self.lin_dim());
        for (k, &n) in self.block_dims.iter().enumerate() {
            for i in 0..n {
                v[self.basis_index(k, i, i)] = ONE;
            }
        }
        v
    }

    pub fn layout(&self) -> LegLayout {
        LegLayout::single(self.clone())
    }

    pub fn is_commutative(&self) -> bool {
        self.block_dims.iter().all(|&n| n == 1)
    }
}

/// Relabeling of the product basis of `A ⊗ B` onto the canonical basis of the
/// flattened tensor algebra.
#[derive(Clone, Debug)]
pub struct TensorEmbedding {
    pub left: MultiMatrixAlgebra,
    pub right: MultiMatrixAlgebra,
    /// `perm[a * lin(B) + b]` is the canonical index of `e_a ⊗ e_b`.
    pub perm: Vec<usize>,
}

impl TensorEmbedding {
    /// Canonical coefficients of `a ⊗ b`.
    pub fn embed(&self, a: &CVec, b: &CVec) -> CVec {
        let lb = self.right.lin_dim();
        let mut out = CVec::zeros(self.perm.len());
        for i in 0..a.len() {
            for j in 0..lb {
                out[self.perm[i * lb + j]] = a[i] * b[j];
            }
        }
        out
    }
}

/// `A ⊗ B` as a multi-matrix algebra with blocks `n_k m_l`, ordered by `(k, l)`.
pub fn tensor_algebra(a: &MultiMatrixAlgebra, b: &MultiMatrixAlgebra) -> (MultiMatrixAlgebra, TensorEmbedding) {
    let mut dims = Vec::new();
    for &n in a.block_dims() {
        for &m in b.block_dims() {
            dims.push(n * m);
        }
    }
    let flat = MultiMatrixAlgebra::new(dims).expect("positive blocks");
    let nb = b.num_blocks();
    let mut perm = vec![0; a.lin_dim() * b.lin_dim()];
    for ia in 0..a.lin_dim() {
        let (k, i, j) = a.basis_label(ia);
        for ib in 0..b.lin_dim() {
            let (l, p, q) = b.basis_label(ib);
            let m = b.block_dims()[l];
            perm[ia * b.lin_dim() + ib] = flat.basis_index(k * nb + l, i * m + p, j * m + q);
        }
    }
    (flat, TensorEmbedding { left: a.clone(), right: b.clone(), perm })
}

/// Ordered tensor factors.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LegLayout {
    factors: Vec<MultiMatrixAlgebra>,
}

impl LegLayout {
    pub fn new(factors: Vec<MultiMatrixAlgebra>) -> Self {
        Self { factors }
    }

    pub fn single(a: MultiMatrixAlgebra) -> Self {
        Self { factors: vec![a] }
    }

    pub fn factors(&self) -> &[MultiMatrixAlgebra] {
        &self.factors
    }

    pub fn factor(&self, k: usize) -> &MultiMatrixAlgebra {
        &self.factors[k]
    }

    pub fn legs(&self) -> usize {
        self.factors.len()
    }

    pub fn real_dims(&self) -> Vec<usize> {
        self.factors.iter().map(|f| f.real_dim()).collect()
    }

    pub fn lin_dims(&self) -> Vec<usize> {
        self.factors.iter().map(|f| f.lin_dim()).collect()
    }

    pub fn real_dim(&self) -> usize {
        self.real_dims().iter().product()
    }

    pub fn lin_dim(&self) -> usize {
        self.lin_dims().iter().product()
    }

    pub fn concat(&self, other: &LegLayout) -> LegLayout {
        let mut f = self.factors.clone();
        f.extend(other.factors.iter().cloned());
        LegLayout::new(f)
    }

    pub fn without_leg(&self, k: usize) -> LegLayout {
        let mut f = self.factors.clone();
        f.remove(k);
        LegLayout::new(f)
    }

    /// Replaces leg `k` by all legs of `with`.
    pub fn replace_leg(&self, k: usize, with: &LegLayout) -> LegLayout {
        let mut f: Vec<_> = self.factors[..k].to_vec();
        f.extend(with.factors.iter().cloned());
        f.extend(self.factors[k + 1..].iter().cloned());
        LegLayout::new(f)
    }

    /// Layout whose leg `i` is leg `perm[i]` of `self`.
    pub fn permuted(&self, perm: &[usize]) -> LegLayout {
        LegLayout::new(perm.iter().map(|&p| self.factors[p].clone()).collect())
    }

    /// Realization entry of every product-basis coefficient.
    pub fn entries(&self) -> Vec<(usize, usize)> {
        let mut out = vec![(0usize, 0usize)];
        for f in &self.factors {
            let d = f.real_dim();
            let fe = f.entries();
            let mut next = Vec::with_capacity(out.len() * fe.len());
            for &(r, c) in &out {
                for &(fr, fc) in &fe {
                    next.push((r * d + fr, c * d + fc));
                }
            }
            out = next;
        }
        out
    }

    /// Mask of realization entries that belong to the algebra.
    fn support_mask(&self) -> Vec<bool> {
        let d = self.real_dim();
        let mut mask = vec![false; d * d];
        for (r, c) in self.entries() {
            mask[r * d + c] = true;
        }
        mask
    }
}

/// Map from old realization indices to indices after a leg permutation.
fn permutation_index_map(dims: &[usize], perm: &[usize]) -> Vec<usize> {
    let n = dims.len();
    let total: usize = dims.iter().product();
    let new_dims: Vec<usize> = perm.iter().map(|&p| dims[p]).collect();
    // position of old leg `p` in the new order
    let mut where_new = vec![0; n];
    for (i, &p) in perm.iter().enumerate() {
        where_new[p] = i;
    }
    let mut new_strides = vec![1; n];
    for i in (0..n.saturating_sub(1)).rev() {
        new_strides[i] = new_strides[i + 1] * new_dims[i + 1];
    }
    let mut map = vec![0; total];
    let mut digits = vec![0; n];
    for (idx, slot) in map.iter_mut().enumerate() {
        let mut rem = idx;
        for leg in (0..n).rev() {
            digits[leg] = rem % dims[leg];
            rem /= dims[leg];
        }
        *slot = (0..n).map(|leg| digits[leg] * new_strides[where_new[leg]]).sum();
    }
    map
}

/// Element of a (tensor product of) multi-matrix algebra(s), stored through its
/// realization matrix.
#[derive(Clone, Debug)]
pub struct Element {
    layout: LegLayout,
    mat: CMat,
}

impl Element {
    pub fn zeros(layout: &LegLayout) -> Self {
        let d = layout.real_dim();
        Self { layout: layout.clone(), mat: CMat::zeros(d, d) }
    }

    pub fn identity(layout: &LegLayout) -> Self {
        let d = layout.real_dim();
        Self { layout: layout.clone(), mat: CMat::identity(d, d) }
    }

    pub fn basis(layout: &LegLayout, b: usize) -> Self {
        let mut e = Self::zeros(layout);
        let (r, c) = layout.entries()[b];
        e.mat[(r, c)] = ONE;
        e
    }

    pub fn from_coeffs(layout: &LegLayout, coeffs: &CVec) -> Result<Self> {
        if coeffs.len() != layout.lin_dim() {
            return Err(Error::Dimension(format!("{} coefficients for an algebra of dimension {}", coeffs.len(), layout.lin_dim())));
        }
        let mut e = Self::zeros(layout);
        for (b, (r, c)) in layout.entries().into_iter().enumerate() {
            e.mat[(r, c)] = coeffs[b];
        }
        Ok(e)
    }

    /// Wraps a realization matrix that is known to lie in the algebra.
    pub fn from_matrix_unchecked(layout: &LegLayout, mat: CMat) -> Self {
        debug_assert_eq!(mat.nrows(), layout.real_dim());
        Self { layout: layout.clone(), mat }
    }

    /// Projects a realization matrix onto the algebra; returns the element and
    /// the Frobenius norm of the discarded part.
    pub fn from_matrix(layout: &LegLayout, mat: &CMat) -> Result<(Self, f64)> {
        let d = layout.real_dim();
        if mat.nrows() != d || mat.ncols() != d {
            return Err(Error::Dimension(format!("realization {}x{} for layout of dimension {d}", mat.nrows(), mat.ncols())));
        }
        let mask = layout.support_mask();
        let mut out = CMat::zeros(d, d);
        let mut dropped = 0.0;
        for r in 0..d {
            for c in 0..d {
                if mask[r * d + c] {
                    out[(r, c)] = mat[(r, c)];
                } else {
                    dropped += mat[(r, c)].norm_sqr();
                }
            }
        }
        Ok((Self { layout: layout.clone(), mat: out }, dropped.sqrt()))
    }

    pub fn scalar(layout: &LegLayout, z: C64) -> Self {
        Self::identity(layout).scale(z)
    }

    pub fn layout(&self) -> &LegLayout {
        &self.layout
    }

    pub fn mat(&self) -> &CMat {
        &self.mat
    }

    pub fn into_mat(self) -> CMat {
        self.mat
    }

    pub fn coeffs(&self) -> CVec {
        let entries = self.layout.entries();
        CVec::from_iterator(entries.len(), entries.into_iter().map(|(r, c)| self.mat[(r, c)]))
    }

    pub fn adjoint(&self) -> Self {
        Self { layout: self.layout.clone(), mat: self.mat.adjoint() }
    }

    pub fn scale(&self, z: C64) -> Self {
        Self { layout: self.layout.clone(), mat: &self.mat * z }
    }

    /// Operator norm in the block realization.
    pub fn norm(&self) -> f64 {
        linalg::op_norm(&self.mat)
    }

    /// Hilbert–Schmidt norm of the coefficient vector.
    pub fn fro(&self) -> f64 {
        linalg::fro(&self.mat)
    }

    /// Operator norm of `self − other`.
    pub fn dist(&self, other: &Element) -> f64 {
        linalg::op_norm(&(&self.mat - &other.mat))
    }

    /// Trace of the realization (un-normalized block trace on each leg).
    pub fn trace(&self) -> C64 {
        self.mat.trace()
    }

    pub fn tensor(&self, other: &Element) -> Element {
        Element { layout: self.layout.concat(&other.layout), mat: self.mat.kronecker(&other.mat) }
    }

    /// Element whose leg `i` is leg `perm[i]` of `self`.
    pub fn permute_legs(&self, perm: &[usize]) -> Result<Element> {
        let n = self.layout.legs();
        let mut seen = vec![false; n];
        if perm.len() != n || perm.iter().any(|&p| p >= n || std::mem::replace(&mut seen[p], true)) {
            return Err(Error::Dimension(format!("invalid leg permutation {perm:?} for {n} legs")));
        }
        let map = permutation_index_map(&self.layout.real_dims(), perm);
        let d = self.mat.nrows();
        let mut out = CMat::zeros(d, d);
        for c in 0..d {
            for r in 0..d {
                out[(map[r], map[c])] = self.mat[(r, c)];
            }
        }
        Ok(Element { layout: self.layout.permuted(perm), mat: out })
    }

    /// The flip `χ(a⊗b) = b⊗a` on a two-leg element.
    pub fn flip(&self) -> Result<Element> {
        if self.layout.legs() != 2 {
            return Err(Error::Dimension("flip needs exactly two legs".into()));
        }
        self.permute_legs(&[1, 0])
    }

    /// Places `self` in legs `positions` of `target` (identity elsewhere).
    pub fn embed(&self, target: &LegLayout, positions: &[usize]) -> Result<Element> {
        let n = target.legs();
        if positions.len() != self.layout.legs()
            || positions.windows(2).any(|w| w[0] >= w[1])
            || positions.iter().any(|&p| p >= n)
        {
            return Err(Error::Dimension(format!("positions {positions:?} do not fit {} legs into {n}", self.layout.legs())));
        }
        for (s, &p) in positions.iter().enumerate() {
            if target.factor(p) != self.layout.factor(s) {
                return Err(Error::Dimension(format!("leg {p} of the target does not match leg {s} of the element")));
            }
        }
        let rest: Vec<usize> = (0..n).filter(|k| !positions.contains(k)).collect();
        let rest_layout = LegLayout::new(rest.iter().map(|&k| target.factor(k).clone()).collect());
        let big = self.tensor(&Element::identity(&rest_layout));
        // big has legs (positions..., rest...); leg i of the target comes from
        let mut perm = vec![0; n];
        for (s, &p) in positions.iter().enumerate() {
            perm[p] = s;
        }
        for (s, &p) in rest.iter().enumerate() {
            perm[p] = positions.len() + s;
        }
        big.permute_legs(&perm)
    }

    /// Slices leg `leg` with the functional `f`: `(ι ⊗ f ⊗ ι)(X)`.
    pub fn slice(&self, leg: usize, f: &Functional) -> Result<Element> {
        let legs = self.layout.legs();
        if leg >= legs || f.layout.legs() != 1 || f.layout.factor(0) != self.layout.factor(leg) {
            return Err(Error::Dimension(format!("functional does not act on leg {leg}")));
        }
        let dims = self.layout.real_dims();
        let pre: usize = dims[..leg].iter().product();
        let d = dims[leg];
        let post: usize = dims[leg + 1..].iter().product();
        let out_layout = self.layout.without_leg(leg);
        let m = pre * post;
        let mut out = CMat::zeros(m, m);
        for i in 0..d {
            for j in 0..d {
                let w = f.density[(j, i)];
                if w == ZERO {
                    continue;
                }
                for p in 0..pre {
                    for q in 0..post {
                        let row = (p * d + i) * post + q;
                        for p2 in 0..pre {
                            for q2 in 0..post {
                                let col = (p2 * d + j) * post + q2;
                                out[(p * post + q, p2 * post + q2)] += w * self.mat[(row, col)];
                            }
                        }
                    }
                }
            }
        }
        Ok(Element { layout: out_layout, mat: out })
    }

    /// Applies a linear map to leg `leg`, replacing it by the map's target legs.
    pub fn map_leg(&self, leg: usize, map: &LinearAlgebraMap) -> Result<Element> {
        if leg >= self.layout.legs() || map.source.legs() != 1 || map.source.factor(0) != self.layout.factor(leg) {
            return Err(Error::Dimension(format!("map source does not match leg {leg}")));
        }
        let lins = self.layout.lin_dims();
        let pre: usize = lins[..leg].iter().product();
        let l = lins[leg];
        let post: usize = lins[leg + 1..].iter().product();
        let t = map.target.lin_dim();
        let coeffs = self.coeffs();
        let mut out = CVec::zeros(pre * t * post);
        for p in 0..pre {
            let block = CMat::from_fn(l, post, |i, q| coeffs[(p * l + i) * post + q]);
            let img = &map.matrix * block;
            for j in 0..t {
                for q in 0..post {
                    out[(p * t + j) * post + q] = img[(j, q)];
                }
            }
        }
        let layout = self.layout.replace_leg(leg, &map.target);
        Element::from_coeffs(&layout, &out)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        linalg::op_norm(&(&self.mat - self.mat.adjoint())) <= tol * self.norm().max(1.0)
    }

    /// Spectral calculus for a self-adjoint element.
    pub fn matrix_function(&self, f: MatFn) -> Result<Element> {
        let tol = crate::default_tol();
        if !self.is_hermitian(tol) {
            return Err(Error::InvalidInput("matrix function needs a self-adjoint argument".into()));
        }
        let (vals, _) = herm_eig(&self.mat);
        let top = vals.iter().map(|x| x.abs()).fold(0.0, f64::max).max(1e-300);
        if f.needs_positive() && vals.iter().any(|&x| x <= tol * top) {
            return Err(Error::InvalidInput(format!(
                "spectrum is not strictly positive (minimum {:.3e})",
                vals.last().copied().unwrap_or(0.0)
            )));
        }
        let m = linalg::herm_fn(&self.mat, |x| f.eval(x));
        Ok(Element::from_matrix(&self.layout, &m)?.0)
    }

    /// Commutator norm `‖xy − yx‖`.
    pub fn commutator_norm(&self, other: &Element) -> f64 {
        linalg::op_norm(&(&self.mat * &other.mat - &other.mat * &self.mat))
    }
}

impl<'a> Mul<&'a Element> for &'a Element {
    type Output = Element;
    fn mul(self, rhs: &'a Element) -> Element {
        assert_eq!(self.layout, rhs.layout, "product of elements of different algebras");
        Element { layout: self.layout.clone(), mat: &self.mat * &rhs.mat }
    }
}

impl<'a> Add<&'a Element> for &'a Element {
    type Output = Element;
    fn add(self, rhs: &'a Element) -> Element {
        assert_eq!(self.layout, rhs.layout, "sum of elements of different algebras");
        Element { layout: self.layout.clone(), mat: &self.mat + &rhs.mat }
    }
}

impl<'a> Sub<&'a Element> for &'a Element {
    type Output = Element;
    fn sub(self, rhs: &'a Element) -> Element {
        assert_eq!(self.layout, rhs.layout, "difference of elements of different algebras");
        Element { layout: self.layout.clone(), mat: &self.mat - &rhs.mat }
    }
}

impl Neg for &Element {
    type Output = Element;
    fn neg(self) -> Element {
        self.scale(-ONE)
    }
}

/// Functions available to [`Element::matrix_function`].
#[derive(Clone, Copy, Debug)]
pub enum MatFn {
    /// `h^{it}`
    PowerIt(f64),
    /// `h^{w}` for complex `w`
    Pow(C64),
    Sqrt,
    InvSqrt,
    Inverse,
    Log,
    Exp,
}

impl MatFn {
    fn needs_positive(&self) -> bool {
        !matches!(self, MatFn::Exp)
    }

    fn eval(&self, x: f64) -> C64 {
        match *self {
            MatFn::PowerIt(t) => C64::from_polar(1.0, t * x.ln()),
            MatFn::Pow(w) => (w * x.ln()).exp(),
            MatFn::Sqrt => cr(x.sqrt()),
            MatFn::InvSqrt => cr(1.0 / x.sqrt()),
            MatFn::Inverse => cr(1.0 / x),
            MatFn::Log => cr(x.ln()),
            MatFn::Exp => cr(x.exp()),
        }
    }
}

/// Linear functional `x ↦ Tr(F x)` on the realization of a layout.
#[derive(Clone, Debug)]
pub struct Functional {
    layout: LegLayout,
    density: CMat,
}

impl Functional {
    /// Functional with prescribed values on the basis.
    pub fn from_values(layout: &LegLayout, values: &CVec) -> Result<Self> {
        if values.len() != layout.lin_dim() {
            return Err(Error::Dimension("functional values do not match the basis".into()));
        }
        let d = layout.real_dim();
        let mut f = CMat::zeros(d, d);
        for (b, (r, c)) in layout.entries().into_iter().enumerate() {
            f[(c, r)] = values[b];
        }
        Ok(Self { layout: layout.clone(), density: f })
    }

    /// Functional `Tr(h ·)` for an element `h` of the algebra.
    pub fn from_density(h: &Element) -> Self {
        Self { layout: h.layout().clone(), density: h.mat().clone() }
    }

    /// The un-normalized block trace.
    pub fn trace(layout: &LegLayout) -> Self {
        let d = layout.real_dim();
        Self { layout: layout.clone(), density: CMat::identity(d, d) }
    }

    /// Vector functional `ω_{v,w}(x) = ⟨x v, w⟩` on `B(ℂ^n)`.
    pub fn vector(v: &CVec, w: &CVec) -> Result<Self> {
        if v.len() != w.len() {
            return Err(Error::Dimension("vector functional with vectors of different lengths".into()));
        }
        let layout = MultiMatrixAlgebra::full(v.len()).layout();
        Ok(Self { layout, density: v * w.adjoint() })
    }

    /// Vector functional `x ↦ ⟨π(x) v, w⟩` pulled back through a representation.
    pub fn vector_through(pi: &LinearAlgebraMap, v: &CVec, w: &CVec) -> Result<Self> {
        let om = Self::vector(v, w)?;
        let vals = CVec::from_iterator(
            pi.source.lin_dim(),
            (0..pi.source.lin_dim()).map(|b| om.eval(&pi.apply(&Element::basis(&pi.source, b)).expect("basis"))),
        );
        Self::from_values(&pi.source, &vals)
    }

    pub fn layout(&self) -> &LegLayout {
        &self.layout
    }

    pub fn density(&self) -> &CMat {
        &self.density
    }

    pub fn eval(&self, x: &Element) -> C64 {
        assert_eq!(&self.layout, x.layout(), "functional applied to the wrong algebra");
        let mut s = ZERO;
        let d = self.density.nrows();
        for r in 0..d {
            for c in 0..d {
                s += self.density[(c, r)] * x.mat()[(r, c)];
            }
        }
        s
    }

    /// Values on the basis.
    pub fn values(&self) -> CVec {
        let entries = self.layout.entries();
        CVec::from_iterator(entries.len(), entries.into_iter().map(|(r, c)| self.density[(c, r)]))
    }

    /// `ω̄(x) = conj(ω(x*))`.
    pub fn conj(&self) -> Self {
        Self { layout: self.layout.clone(), density: self.density.adjoint() }
    }

    /// Tensor product functional on the concatenated layout.
    pub fn tensor(&self, other: &Functional) -> Self {
        Self { layout: self.layout.concat(&other.layout), density: self.density.kronecker(&other.density) }
    }

    /// Total variation norm (trace norm of the density compressed to the algebra).
    pub fn norm(&self) -> f64 {
        let (proj, _) = Element::from_matrix(&self.layout, &self.density.transpose()).expect("layout");
        linalg::singular_values(proj.mat()).iter().sum()
    }
}

/// Linear map between algebras, in canonical coefficient bases.
#[derive(Clone, Debug)]
pub struct LinearAlgebraMap {
    pub source: LegLayout,
    pub target: LegLayout,
    pub matrix: CMat,
}

impl LinearAlgebraMap {
    pub fn new(source: LegLayout, target: LegLayout, matrix: CMat) -> Result<Self> {
        if matrix.nrows() != target.lin_dim() || matrix.ncols() != source.lin_dim() {
            return Err(Error::Dimension("map matrix does not match its source and target".into()));
        }
        Ok(Self { source, target, matrix })
    }

    /// Map determined by the images of the basis of `source`.
    pub fn from_images(source: &LegLayout, target: &LegLayout, images: &[Element]) -> Result<Self> {
        if images.len() != source.lin_dim() {
            return Err(Error::Dimension("one image per basis element is required".into()));
        }
        let mut m = CMat::zeros(target.lin_dim(), source.lin_dim());
        for (b, img) in images.iter().enumerate() {
            if img.layout() != target {
                return Err(Error::Dimension("image in the wrong algebra".into()));
            }
            m.set_column(b, &img.coeffs());
        }
        Ok(Self { source: source.clone(), target: target.clone(), matrix: m })
    }

    pub fn identity(layout: &LegLayout) -> Self {
        let n = layout.lin_dim();
        Self { source: layout.clone(), target: layout.clone(), matrix: CMat::identity(n, n) }
    }

    pub fn apply(&self, x: &Element) -> Result<Element> {
        if x.layout() != &self.source {
            return Err(Error::Dimension("map applied to an element of the wrong algebra".into()));
        }
        Element::from_coeffs(&self.target, &(&self.matrix * x.coeffs()))
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &LinearAlgebraMap) -> Result<Self> {
        if other.target != self.source {
            return Err(Error::Dimension("composition of incompatible maps".into()));
        }
        Ok(Self { source: other.source.clone(), target: self.target.clone(), matrix: &self.matrix * &other.matrix })
    }

    /// Least-squares left inverse, defined on the range of `self`.
    pub fn left_inverse(&self) -> Self {
        Self {
            source: self.target.clone(),
            target: self.source.clone(),
            matrix: linalg::pinv(&self.matrix, 1e-12),
        }
    }

    /// Largest multiplicativity / adjoint defect over basis pairs.
    pub fn star_hom_residual(&self) -> f64 {
        let n = self.source.lin_dim();
        let imgs: Vec<Element> = (0..n).map(|b| self.apply(&Element::basis(&self.source, b)).expect("basis")).collect();
        let basis: Vec<Element> = (0..n).map(|b| Element::basis(&self.source, b)).collect();
        let mult = crate::par::max_range(n * n, |p| {
            let (a, b) = (p / n, p % n);
            let prod = &basis[a] * &basis[b];
            let lhs = self.apply(&prod).expect("basis");
            lhs.dist(&(&imgs[a] * &imgs[b]))
        });
        let adj = (0..n)
            .map(|a| self.apply(&basis[a].adjoint()).expect("basis").dist(&imgs[a].adjoint()))
            .fold(0.0, f64::max);
        mult.max(adj)
    }

    pub fn unital_residual(&self) -> f64 {
        self.apply(&Element::identity(&self.source))
            .expect("unit")
            .dist(&Element::identity(&self.target))
    }

    pub fn is_star_hom(&self, tol: f64) -> bool {
        self.star_hom_residual() <= tol
    }

    pub fn is_unital(&self, tol: f64) -> bool {
        self.unital_residual() <= tol
    }

    /// Largest defect `‖T(x) − x‖`-style comparison with another map.
    pub fn dist(&self, other: &LinearAlgebraMap) -> f64 {
        linalg::fro(&(&self.matrix - &other.matrix))
    }
}

/// Unital ∗-subalgebra of a concrete algebra with recovered block structure.
#[derive(Clone, Debug)]
pub struct Subalgebra {
    /// The algebra that contains the subalgebra.
    pub ambient: LegLayout,
    /// Abstract multi-matrix algebra isomorphic to the subalgebra.
    pub algebra: MultiMatrixAlgebra,
    /// Matrix units in the ambient algebra, canonical `(k, i, j)` order.
    pub units: Vec<Element>,
    /// Orthonormal coefficient basis of the subalgebra (columns).
    pub span: CMat,
    /// Embedding of the abstract algebra into the ambient one.
    pub embedding: LinearAlgebraMap,
    /// Least-squares inverse of the embedding.
    pub projection: LinearAlgebraMap,
}

impl Subalgebra {
    pub fn dim(&self) -> usize {
        self.span.ncols()
    }

    pub fn layout(&self) -> LegLayout {
        self.algebra.layout()
    }

    pub fn embed(&self, x: &Element) -> Result<Element> {
        self.embedding.apply(x)
    }

    /// Abstract preimage of an ambient element and the distance of the element
    /// from the subalgebra.
    pub fn pull_back(&self, y: &Element) -> Result<(Element, f64)> {
        let x = self.projection.apply(y)?;
        let back = self.embedding.apply(&x)?;
        Ok((x, back.dist(y)))
    }

    /// Distance of `y` from the subalgebra (Hilbert–Schmidt).
    pub fn distance(&self, y: &Element) -> f64 {
        let c = y.coeffs();
        let proj = &self.span * (self.span.adjoint() * &c);
        (c - proj).norm()
    }
}

fn orth_add(basis: &mut Vec<CVec>, v: &CVec, rel_tol: f64) -> bool {
    orth_add_scaled(basis, v, rel_tol, 0.0)
}

/// Like `orth_add`, measuring the new component against `max(‖v‖, scale)`.
fn orth_add_scaled(basis: &mut Vec<CVec>, v: &CVec, rel_tol: f64, scale: f64) -> bool {
    let scale = v.norm().max(scale);
    if scale == 0.0 {
        return false;
    }
    let mut w = v.clone();
    for _ in 0..2 {
        for b in basis.iter() {
            let coef = b.dotc(&w);
            w -= b * coef;
        }
    }
    let n = w.norm();
    if n > rel_tol * scale {
        basis.push(w / cr(n));
        true
    } else {
        false
    }
}

fn cluster(vals: &[f64], gap: f64) -> Vec<Vec<usize>> {
    // vals sorted descending
    let mut out: Vec<Vec<usize>> = Vec::new();
    for (i, &v) in vals.iter().enumerate() {
        match out.last_mut() {
            Some(c) if (vals[*c.last().unwrap()] - v).abs() <= gap => c.push(i),
            _ => out.push(vec![i]),
        }
    }
    out
}

/// Smallest unital ∗-subalgebra of `ambient` containing `gens`, with its block
/// structure recovered from the center.
pub fn generated_subalgebra(ambient: &LegLayout, gens: &[Element], tol: f64) -> Result<Subalgebra> {
    for g in gens {
        if g.layout() != ambient {
            return Err(Error::Dimension("generator outside the ambient algebra".into()));
        }
    }
    let rel = tol.max(1e-12);
    let mut all_gens: Vec<Element> = Vec::new();
    let top = gens.iter().map(|g| g.fro()).fold(0.0, f64::max);
    for g in gens {
        if g.fro() > rel * top {
            all_gens.push(g.clone());
            all_gens.push(g.adjoint());
        }
    }
    let one = Element::identity(ambient);
    let mut basis: Vec<CVec> = Vec::new();
    let mut queue: Vec<Element> = Vec::new();
    for x in std::iter::once(&one).chain(all_gens.iter()) {
        if orth_add(&mut basis, &x.coeffs(), rel) {
            queue.push(x.clone());
        }
    }
    let limit = ambient.lin_dim() + 1;
    let mut steps = 0;
    while let Some(b) = queue.pop() {
        steps += 1;
        if steps > limit * (all_gens.len() + 1) + 10 {
            return Err(Error::Numerical("generated subalgebra did not stabilize".into()));
        }
        let bn = b.norm();
        for g in &all_gens {
            let p = g * &b;
            if orth_add_scaled(&mut basis, &p.coeffs(), rel, g.norm() * bn) {
                if basis.len() > ambient.lin_dim() {
                    return Err(Error::Numerical("generated subalgebra exceeds the ambient dimension".into()));
                }
                queue.push(p);
            }
        }
    }
    let r = basis.len();
    let span = CMat::from_columns(&basis);
    let elems: Vec<Element> = basis.iter().map(|c| Element::from_coeffs(ambient, c).expect("coeffs")).collect();

    // center: elements of the span commuting with every generator
    let d = ambient.real_dim();
    let center = if all_gens.is_empty() {
        CMat::identity(r, r)
    } else {
        let rows = all_gens.len() * d * d;
        let mut sys = CMat::zeros(rows, r);
        for (j, e) in elems.iter().enumerate() {
            let mut col = Vec::with_capacity(rows);
            for g in &all_gens {
                let cm = e.mat() * g.mat() - g.mat() * e.mat();
                col.extend(cm.iter().copied());
            }
            sys.set_column(j, &CVec::from_vec(col));
        }
        let gscale = all_gens.iter().map(|g| g.norm()).fold(1.0, f64::max);
        linalg::null_space_abs(&sys, rel.max(1e-10) * gscale)
    };
    let nz = center.ncols();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let combo = |coef: &CVec| -> Element {
        let mut m = CMat::zeros(d, d);
        for (j, e) in elems.iter().enumerate() {
            m += e.mat() * coef[j];
        }
        Element::from_matrix_unchecked(ambient, m)
    };
    // the center is ∗-closed, so real combinations of the Hermitian and
    // skew parts of its basis are generic self-adjoint central elements
    let mut zh = Element::zeros(ambient);
    for k in 0..nz {
        let z = combo(&center.column(k).into_owned());
        let re = &z + &z.adjoint();
        let im = (&z - &z.adjoint()).scale(C64::new(0.0, 1.0));
        let w1: f64 = rng.gen_range(0.5..1.5);
        let w2: f64 = rng.gen_range(0.5..1.5);
        zh = &(&zh + &re.scale(cr(w1))) + &im.scale(cr(w2));
    }
    let (vals, vecs) = herm_eig(zh.mat());
    let spread = vals.first().copied().unwrap_or(0.0) - vals.last().copied().unwrap_or(0.0);
    let groups = cluster(&vals, 1e-7 * spread.max(1.0));
    if groups.len() != nz {
        return Err(Error::Numerical(format!(
            "center has dimension {nz} but the generic central element has {} distinct eigenvalues",
            groups.len()
        )));
    }

    struct Block {
        n: usize,
        key: f64,
        units: Vec<CMat>,
    }
    let mut blocks = Vec::new();
    for g in &groups {
        let bvecs = CMat::from_columns(&g.iter().map(|&i| vecs.column(i).into_owned()).collect::<Vec<_>>());
        let p = &bvecs * bvecs.adjoint();
        let pe = Element::from_matrix_unchecked(ambient, p.clone());
        let mut block_span: Vec<CVec> = Vec::new();
        for e in &elems {
            orth_add_scaled(&mut block_span, &(&pe * e).coeffs(), rel.max(1e-10), e.fro());
        }
        let dk = block_span.len();
        let n = (dk as f64).sqrt().round() as usize;
        if n * n != dk {
            return Err(Error::Numerical(format!("central block of dimension {dk} is not a full matrix algebra")));
        }
        let rank_p = g.len();
        if rank_p % n != 0 {
            return Err(Error::Numerical("inconsistent block multiplicity".into()));
        }
        let mult = rank_p / n;
        let key = vals[g[0]];
        if n == 1 {
            blocks.push(Block { n, key, units: vec![p] });
            continue;
        }
        let block_elems: Vec<Element> =
            block_span.iter().map(|c| Element::from_coeffs(ambient, c).expect("coeffs")).collect();
        let mut a = CMat::zeros(d, d);
        let mut x = CMat::zeros(d, d);
        for e in &block_elems {
            let w: f64 = rng.gen_range(-1.0..1.0);
            let v: f64 = rng.gen_range(-1.0..1.0);
            a += (e.mat() + e.mat().adjoint()) * cr(w);
            // skew parts too: a basis of anti-Hermitian units has scalar Hermitian parts
            a += (e.mat() - e.mat().adjoint()) * C64::new(0.0, v);
            let w2 = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            x += e.mat() * w2;
        }
        let comp = bvecs.adjoint() * &a * &bvecs;
        let (cvals, cvecs) = herm_eig(&comp);
        let cspread = cvals.first().copied().unwrap_or(0.0) - cvals.last().copied().unwrap_or(0.0);
        let cgroups = cluster(&cvals, 1e-7 * cspread.max(1.0));
        if cgroups.len() != n || cgroups.iter().any(|c| c.len() != mult) {
            return Err(Error::Numerical("could not split a block into minimal projections".into()));
        }
        // ascending eigenvalue order for the diagonal units
        let diag: Vec<CMat> = cgroups
            .iter()
            .rev()
            .map(|c| {
                let v = CMat::from_columns(&c.iter().map(|&i| cvecs.column(i).into_owned()).collect::<Vec<_>>());
                let bv = &bvecs * v;
                &bv * bv.adjoint()
            })
            .collect();
        let mut first_row = vec![diag[0].clone()];
        for j in 1..n {
            let y = &diag[0] * &x * &diag[j];
            let cnorm = (y.clone() * y.adjoint()).trace().re / diag[0].trace().re;
            if cnorm <= 1e-20 {
                return Err(Error::Numerical("degenerate off-diagonal matrix unit".into()));
            }
            first_row.push(y * cr(1.0 / cnorm.sqrt()));
        }
        let mut units = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let ei1 = first_row[i].adjoint();
                units.push(ei1 * &first_row[j]);
            }
        }
        blocks.push(Block { n, key, units });
    }
    blocks.sort_by(|a, b| a.n.cmp(&b.n).then(a.key.partial_cmp(&b.key).unwrap()));
    let algebra = MultiMatrixAlgebra::new(blocks.iter().map(|b| b.n).collect())?;
    let mut units = Vec::with_capacity(algebra.lin_dim());
    for b in &blocks {
        for u in &b.units {
            let (e, _) = Element::from_matrix(ambient, u)?;
            units.push(e);
        }
    }
    if algebra.lin_dim() != r {
        return Err(Error::Numerical(format!("block structure of dimension {} for a span of dimension {r}", algebra.lin_dim())));
    }
    let embedding = LinearAlgebraMap::from_images(&algebra.layout(), ambient, &units)?;
    let projection = embedding.left_inverse();
    Ok(Subalgebra { ambient: ambient.clone(), algebra, units, span, embedding, projection })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;

    fn rand_elem(layout: &LegLayout, seed: u64) -> Element {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let v = CVec::from_iterator(layout.lin_dim(), (0..layout.lin_dim()).map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))));
        Element::from_coeffs(layout, &v).unwrap()
    }

    #[test]
    fn tensor_algebra_blocks() {
        let (t, _) = tensor_algebra(&MultiMatrixAlgebra::full(2), &MultiMatrixAlgebra::diagonal(2));
        assert_eq!(t.block_dims(), &[2, 2]);
        let a = MultiMatrixAlgebra::new(vec![1, 2]).unwrap();
        let (t, _) = tensor_algebra(&MultiMatrixAlgebra::scalars(), &a);
        assert_eq!(t, a);
        let d2 = MultiMatrixAlgebra::diagonal(2);
        let (t, emb) = tensor_algebra(&d2, &d2);
        assert_eq!(t.block_dims(), &[1, 1, 1, 1]);
        let mut de = CVec::zeros(2);
        de[0] = ONE;
        let x = Element::from_coeffs(&t.layout(), &emb.embed(&de, &de)).unwrap();
        assert!((&x * &x).dist(&x) < 1e-15);
    }

    #[test]
    fn tensor_embedding_is_multiplicative() {
        let a = MultiMatrixAlgebra::new(vec![1, 2]).unwrap();
        let b = MultiMatrixAlgebra::new(vec![2, 1]).unwrap();
        let (t, emb) = tensor_algebra(&a, &b);
        let (x1, x2) = (rand_elem(&a.layout(), 1), rand_elem(&a.layout(), 2));
        let (y1, y2) = (rand_elem(&b.layout(), 3), rand_elem(&b.layout(), 4));
        let f = |x: &Element, y: &Element| Element::from_coeffs(&t.layout(), &emb.embed(&x.coeffs(), &y.coeffs())).unwrap();
        let lhs = &f(&x1, &y1) * &f(&x2, &y2);
        let rhs = f(&(&x1 * &x2), &(&y1 * &y2));
        assert!(lhs.dist(&rhs) < 1e-12);
    }

    #[test]
    fn embed_legs_examples() {
        let a = MultiMatrixAlgebra::full(2).layout();
        let b = MultiMatrixAlgebra::diagonal(3).layout();
        let cc = MultiMatrixAlgebra::new(vec![1, 2]).unwrap().layout();
        let (x, y, z) = (rand_elem(&a, 1), rand_elem(&b, 2), rand_elem(&cc, 3));
        let target = a.concat(&cc).concat(&b);
        let xy = x.tensor(&y);
        let e = xy.embed(&target, &[0, 2]).unwrap();
        let expect = x.tensor(&Element::identity(&cc)).tensor(&y);
        assert!(e.dist(&expect) < 1e-14);
        assert!(xy.embed(xy.layout(), &[0, 1]).unwrap().dist(&xy) < 1e-15);
        let four = a.concat(&b).concat(&a).concat(&cc);
        let xyz = x.tensor(&y).tensor(&z);
        let e = xyz.embed(&four, &[0, 1, 3]).unwrap();
        let expect = x.tensor(&y).tensor(&Element::identity(&a)).tensor(&z);
        assert!(e.dist(&expect) < 1e-14);
        assert!(xy.embed(&target, &[2, 0]).is_err());
    }

    #[test]
    fn slice_examples() {
        let m2 = MultiMatrixAlgebra::full(2).layout();
        let a = rand_elem(&m2, 5);
        let b = rand_elem(&m2, 6);
        let v = CVec::from_vec(vec![c(0.3, 0.1), c(-0.2, 0.5)]);
        let w = CVec::from_vec(vec![c(0.7, -0.4), c(0.1, 0.2)]);
        let om = Functional::vector(&v, &w).unwrap();
        let s = a.tensor(&b).slice(1, &om).unwrap();
        let expect = w.dotc(&(b.mat() * &v));
        assert!(s.dist(&a.scale(expect)) < 1e-14);
        // partial trace of the swap is the identity
        let mut swap = CMat::zeros(4, 4);
        for i in 0..2 {
            for j in 0..2 {
                swap[(i * 2 + j, j * 2 + i)] = ONE;
            }
        }
        let x = Element::from_matrix_unchecked(&m2.concat(&m2), swap);
        let pt = x.slice(1, &Functional::trace(&m2)).unwrap();
        assert!(pt.dist(&Element::identity(&m2)) < 1e-15);
    }

    #[test]
    fn flip_is_involutive() {
        let l = MultiMatrixAlgebra::full(2).layout().concat(&MultiMatrixAlgebra::new(vec![1, 2]).unwrap().layout());
        let x = rand_elem(&l, 9);
        assert!(x.flip().unwrap().flip().unwrap().dist(&x) < 1e-15);
        let a = rand_elem(&MultiMatrixAlgebra::full(2).layout(), 1);
        let b = rand_elem(&MultiMatrixAlgebra::new(vec![1, 2]).unwrap().layout(), 2);
        assert!(a.tensor(&b).flip().unwrap().dist(&b.tensor(&a)) < 1e-15);
    }

    #[test]
    fn generated_subalgebra_examples() {
        let m2 = MultiMatrixAlgebra::full(2).layout();
        let s = generated_subalgebra(&m2, &[Element::basis(&m2, 0), Element::basis(&m2, 3)], 1e-10).unwrap();
        assert_eq!(s.algebra.block_dims(), &[1, 1]);
        let s = generated_subalgebra(&m2, &[Element::basis(&m2, 1)], 1e-10).unwrap();
        assert_eq!(s.algebra.block_dims(), &[2]);
        let m3 = MultiMatrixAlgebra::full(3).layout();
        let mut shift = CMat::zeros(3, 3);
        for i in 0..3 {
            shift[((i + 1) % 3, i)] = ONE;
        }
        let s = generated_subalgebra(&m3, &[Element::from_matrix_unchecked(&m3, shift)], 1e-10).unwrap();
        assert_eq!(s.algebra.block_dims(), &[1, 1, 1]);
        assert!(s.embedding.star_hom_residual() < 1e-10);
    }

    #[test]
    fn subalgebra_units_form_matrix_units() {
        // Mat_2 ⊗ 1 inside Mat_2 ⊗ Mat_3 has multiplicity 3
        let m2 = MultiMatrixAlgebra::full(2).layout();
        let m3 = MultiMatrixAlgebra::full(3).layout();
        let amb = m2.concat(&m3);
        let gens: Vec<Element> = (0..4).map(|b| Element::basis(&m2, b).tensor(&Element::identity(&m3))).collect();
        let mut gens2 = gens.clone();
        gens2.push(Element::identity(&m2).tensor(&Element::basis(&m3, 4)));
        let s = generated_subalgebra(&amb, &gens, 1e-10).unwrap();
        assert_eq!(s.algebra.block_dims(), &[2]);
        assert!(s.embedding.star_hom_residual() < 1e-10);
        assert!(s.embedding.unital_residual() < 1e-10);
        let s2 = generated_subalgebra(&amb, &gens2, 1e-10).unwrap();
        assert_eq!(s2.algebra.block_dims(), &[2, 2]);
        assert!(s2.embedding.star_hom_residual() < 1e-10);
    }

    #[test]
    fn matrix_function_examples() {
        let m2 = MultiMatrixAlgebra::full(2).layout();
        let h = Element::from_matrix_unchecked(&m2, CMat::from_diagonal(&CVec::from_vec(vec![ONE, cr(std::f64::consts::E)])));
        let u = h.matrix_function(MatFn::PowerIt(1.0)).unwrap();
        assert!((u.mat()[(1, 1)] - C64::from_polar(1.0, 1.0)).norm() < 1e-14);
        assert!((u.mat()[(0, 0)] - ONE).norm() < 1e-14);
        let h = Element::from_matrix_unchecked(&m2, CMat::from_row_slice(2, 2, &[cr(2.0), ONE, ONE, cr(2.0)]));
        let s = h.matrix_function(MatFn::Sqrt).unwrap();
        assert!((&s * &s).dist(&h) < 1e-12);
        let neg = h.scale(cr(-1.0));
        assert!(neg.matrix_function(MatFn::Sqrt).is_err());
    }
}
