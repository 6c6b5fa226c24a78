//! Dense complex linear algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn cr(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// Frobenius norm.
pub fn fro(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Largest singular value. Block-diagonal patterns (after permutation) are
/// split into their components first.
pub fn op_norm(m: &CMat) -> f64 {
    let (r, c) = m.shape();
    if r == 0 || c == 0 {
        return 0.0;
    }
    // union-find over rows 0..r and columns r..r+c joined by nonzero entries
    let mut parent: Vec<usize> = (0..r + c).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for i in 0..r {
        for j in 0..c {
            if m[(i, j)] != C64::new(0.0, 0.0) {
                let (a, b) = (find(&mut parent, i), find(&mut parent, r + j));
                if a != b {
                    parent[a] = b;
                }
            }
        }
    }
    let mut comps: std::collections::BTreeMap<usize, (Vec<usize>, Vec<usize>)> = Default::default();
    for i in 0..r {
        let root = find(&mut parent, i);
        comps.entry(root).or_default().0.push(i);
    }
    for j in 0..c {
        let root = find(&mut parent, r + j);
        comps.entry(root).or_default().1.push(j);
    }
    comps
        .values()
        .filter(|(rows, cols)| !rows.is_empty() && !cols.is_empty())
        .map(|(rows, cols)| {
            if rows.len() == 1 || cols.len() == 1 {
                return rows.iter().flat_map(|&i| cols.iter().map(move |&j| (i, j))).map(|(i, j)| m[(i, j)].norm_sqr()).sum::<f64>().sqrt();
            }
            dense_op_norm(&CMat::from_fn(rows.len(), cols.len(), |a, b| m[(rows[a], cols[b])]))
        })
        .fold(0.0, f64::max)
}

fn dense_op_norm(m: &CMat) -> f64 {
    // real embedding [[Re, −Im], [Im, Re]] has the same singular values, doubled
    let (r, c) = m.shape();
    let re = nalgebra::DMatrix::<f64>::from_fn(2 * r, 2 * c, |i, j| {
        let z = m[(i % r, j % c)];
        match (i / r, j / c) {
            (0, 1) => -z.im,
            (1, 0) => z.im,
            _ => z.re,
        }
    });
    re.singular_values().iter().copied().fold(0.0, f64::max)
}

pub fn singular_values(m: &CMat) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    full_svd(m).s.into_iter().take(m.nrows().min(m.ncols())).collect()
}

/// Eigendecomposition of the Hermitian part of `m`, eigenvalues descending.
///
/// Cyclic Jacobi: nalgebra's complex tridiagonal solver leaves residuals near
/// `1e-9` on clustered spectra, which is too coarse for block recovery.
pub fn herm_eig(m: &CMat) -> (Vec<f64>, CMat) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), CMat::zeros(0, 0));
    }
    let mut a = (m + m.adjoint()) * cr(0.5);
    let mut v = CMat::identity(n, n);
    let scale = fro(&a);
    for _ in 0..100 {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                let r = apq.norm();
                if r <= 1e-17 * scale || r <= 1e-300 {
                    continue;
                }
                rotated = true;
                let ph = apq / r;
                let tau = (a[(q, q)].re - a[(p, p)].re) / (2.0 * r);
                let t = if tau >= 0.0 { 1.0 / (tau + (1.0 + tau * tau).sqrt()) } else { -1.0 / (-tau + (1.0 + tau * tau).sqrt()) };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let (sp, sm) = (ph * s, ph.conj() * s);
                for k in 0..n {
                    let (akp, akq) = (a[(k, p)], a[(k, q)]);
                    a[(k, p)] = akp * c - sm * akq;
                    a[(k, q)] = sp * akp + akq * c;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[(p, k)], a[(q, k)]);
                    a[(p, k)] = apk * c - sp * aqk;
                    a[(q, k)] = sm * apk + aqk * c;
                }
                a[(p, q)] = C64::new(0.0, 0.0);
                a[(q, p)] = C64::new(0.0, 0.0);
                for k in 0..n {
                    let (vkp, vkq) = (v[(k, p)], v[(k, q)]);
                    v[(k, p)] = vkp * c - sm * vkq;
                    v[(k, q)] = sp * vkp + vkq * c;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| a[(y, y)].re.partial_cmp(&a[(x, x)].re).unwrap());
    let vals = order.iter().map(|&k| a[(k, k)].re).collect();
    let mut vecs = CMat::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vecs.set_column(dst, &v.column(src));
    }
    (vals, vecs)
}

/// Applies a real function to a Hermitian matrix through its spectrum.
pub fn herm_fn(m: &CMat, f: impl Fn(f64) -> C64) -> CMat {
    let (vals, vecs) = herm_eig(m);
    let d = CMat::from_diagonal(&CVec::from_iterator(vals.len(), vals.iter().map(|&x| f(x))));
    &vecs * d * vecs.adjoint()
}

struct FullSvd {
    u: CMat,
    s: Vec<f64>,
    v: CMat,
}

/// SVD with a full right factor, singular values descending.
fn full_svd(a: &CMat) -> FullSvd {
    let (m, n) = a.shape();
    if m > n {
        // reduce to the square triangular factor first
        let qr = a.clone().qr();
        let r = qr.r();
        let inner = jacobi_svd(&r);
        let q = qr.q();
        return FullSvd { u: q * inner.u, s: inner.s, v: inner.v };
    }
    let padded = if m < n {
        let mut p = CMat::zeros(n, n);
        p.view_mut((0, 0), (m, n)).copy_from(a);
        p
    } else {
        a.clone()
    };
    let out = jacobi_svd(&padded);
    FullSvd { u: out.u.rows(0, m).into_owned(), s: out.s, v: out.v }
}

/// One-sided Jacobi SVD of a square matrix. nalgebra's complex SVD is not
/// accurate enough for the pseudo-inverses used here.
fn jacobi_svd(a: &CMat) -> FullSvd {
    let n = a.ncols();
    let mut w = a.clone();
    let mut v = CMat::identity(n, n);
    for _ in 0..80 {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha = w.column(p).norm_squared();
                let beta = w.column(q).norm_squared();
                let gamma = w.column(p).dotc(&w.column(q));
                let g = gamma.norm();
                if g <= 1e-15 * (alpha * beta).sqrt() || g <= 1e-300 {
                    continue;
                }
                rotated = true;
                let ph = gamma / g;
                let tau = (beta - alpha) / (2.0 * g);
                let t = if tau >= 0.0 { 1.0 / (tau + (1.0 + tau * tau).sqrt()) } else { -1.0 / (-tau + (1.0 + tau * tau).sqrt()) };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let (sp, sm) = (ph * s, ph.conj() * s);
                for mat in [&mut w, &mut v] {
                    for k in 0..mat.nrows() {
                        let (xp, xq) = (mat[(k, p)], mat[(k, q)]);
                        mat[(k, p)] = xp * c - sm * xq;
                        mat[(k, q)] = sp * xp + xq * c;
                    }
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let norms: Vec<f64> = (0..n).map(|k| w.column(k).norm()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| norms[y].partial_cmp(&norms[x]).unwrap());
    let mut u = CMat::zeros(a.nrows(), n);
    let mut vs = CMat::zeros(n, n);
    let mut s = Vec::with_capacity(n);
    for (dst, &src) in order.iter().enumerate() {
        let sv = norms[src];
        s.push(sv);
        if sv > 0.0 {
            u.set_column(dst, &(w.column(src) / cr(sv)));
        }
        vs.set_column(dst, &v.column(src));
    }
    FullSvd { u, s, v: vs }
}

/// Numerical rank with threshold `rel_tol * σ_max`.
pub fn rank(a: &CMat, rel_tol: f64) -> usize {
    let s = singular_values(a);
    let top = s.iter().copied().fold(0.0, f64::max);
    if top == 0.0 {
        return 0;
    }
    s.iter().filter(|&&x| x > rel_tol * top).count()
}

/// Orthonormal basis (columns) of the kernel of `a`.
pub fn null_space(a: &CMat, rel_tol: f64) -> CMat {
    let n = a.ncols();
    if n == 0 {
        return CMat::zeros(0, 0);
    }
    if a.nrows() == 0 {
        return CMat::identity(n, n);
    }
    let svd = full_svd(a);
    let top = svd.s.first().copied().unwrap_or(0.0);
    let r = if top == 0.0 { 0 } else { svd.s.iter().filter(|&&x| x > rel_tol * top).count() };
    let mut k = svd.v.columns(r, n - r).into_owned();
    for j in 0..k.ncols() {
        let mut col = k.column(j).into_owned();
        sign_fix(&mut col);
        k.set_column(j, &col);
    }
    k
}

/// Kernel of `a` treating singular values up to `abs_tol` as zero.
pub fn null_space_abs(a: &CMat, abs_tol: f64) -> CMat {
    let n = a.ncols();
    if n == 0 {
        return CMat::zeros(0, 0);
    }
    if a.nrows() == 0 {
        return CMat::identity(n, n);
    }
    let svd = full_svd(a);
    let r = svd.s.iter().filter(|&&x| x > abs_tol).count();
    let mut k = svd.v.columns(r, n - r).into_owned();
    for j in 0..k.ncols() {
        let mut col = k.column(j).into_owned();
        sign_fix(&mut col);
        k.set_column(j, &col);
    }
    k
}

/// Orthonormal basis (columns) of the range of `a`.
pub fn range_basis(a: &CMat, rel_tol: f64) -> CMat {
    if a.ncols() == 0 || a.nrows() == 0 {
        return CMat::zeros(a.nrows(), 0);
    }
    let svd = full_svd(a);
    let top = svd.s.first().copied().unwrap_or(0.0);
    let r = if top == 0.0 { 0 } else { svd.s.iter().filter(|&&x| x > rel_tol * top).count() };
    svd.u.columns(0, r).into_owned()
}

/// Moore–Penrose pseudo-inverse with threshold `rel_tol * σ_max`.
pub fn pinv(a: &CMat, rel_tol: f64) -> CMat {
    let (m, n) = a.shape();
    if m == 0 || n == 0 {
        return CMat::zeros(n, m);
    }
    let svd = full_svd(a);
    let top = svd.s.first().copied().unwrap_or(0.0);
    let mut out = CMat::zeros(n, m);
    for (k, &sv) in svd.s.iter().enumerate() {
        if sv > rel_tol * top && sv > 0.0 {
            out += svd.v.column(k) * svd.u.column(k).adjoint() * cr(1.0 / sv);
        }
    }
    out
}

/// Least-squares solution `X` of `X S = T` together with the relative
/// consistency residual `‖X S − T‖ / max(1, ‖T‖)`.
pub fn solve_right(t: &CMat, s: &CMat, rel_tol: f64) -> (CMat, f64) {
    let x = t * pinv(s, rel_tol);
    let res = fro(&(&x * s - t)) / fro(t).max(1.0);
    (x, res)
}

/// Makes the first component of non-negligible modulus real positive.
pub fn sign_fix(v: &mut CVec) {
    let top = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if top == 0.0 {
        return;
    }
    if let Some(z) = v.iter().find(|z| z.norm() > 1e-8 * top).copied() {
        let phase = z.conj() / z.norm();
        *v *= phase;
    }
}

/// Orthonormalizes the columns of `a`, dropping dependent ones.
pub fn orthonormalize(a: &CMat, rel_tol: f64) -> CMat {
    range_basis(a, rel_tol)
}

/// `‖U*U − 1‖` and `‖UU* − 1‖` (operator norms).
pub fn unitarity_residual(u: &CMat) -> f64 {
    let n = u.nrows();
    if u.ncols() != n {
        return f64::INFINITY;
    }
    let id = CMat::identity(n, n);
    op_norm(&(u.adjoint() * u - &id)).max(op_norm(&(u * u.adjoint() - &id)))
}

/// Conjugate-linear map `ξ ↦ A·conj(ξ)`.
#[derive(Clone, Debug)]
pub struct AntiLinear {
    pub lin: CMat,
}

impl AntiLinear {
    pub fn new(lin: CMat) -> Self {
        Self { lin }
    }

    pub fn apply(&self, v: &CVec) -> CVec {
        &self.lin * v.conjugate()
    }

    /// `(A K)(B K) = A·conj(B)`, a linear map.
    pub fn compose(&self, other: &AntiLinear) -> CMat {
        &self.lin * other.lin.conjugate()
    }

    /// `(A K)·L = A·conj(L) K`.
    pub fn after_linear(&self, l: &CMat) -> AntiLinear {
        AntiLinear::new(&self.lin * l.conjugate())
    }

    /// `L·(A K) = (L A) K`.
    pub fn before_linear(&self, l: &CMat) -> AntiLinear {
        AntiLinear::new(l * &self.lin)
    }

    /// Adjoint of an antilinear map: `(A K)* = Aᵀ K`.
    pub fn adjoint(&self) -> AntiLinear {
        AntiLinear::new(self.lin.transpose())
    }

    /// Kronecker product of two antilinear maps on a tensor product.
    pub fn kron(&self, other: &AntiLinear) -> AntiLinear {
        AntiLinear::new(self.lin.kronecker(&other.lin))
    }
}

/// Polar decomposition `T = J ∇^{1/2}` of an invertible antilinear `T = A K`.
/// Returns `(J, ∇)` with `∇ = T*T = Aᵀ·conj(A)` positive.
pub fn antilinear_polar(t: &AntiLinear) -> (AntiLinear, CMat) {
    let a = &t.lin;
    let nabla = a.transpose() * a.conjugate();
    let nabla = (&nabla + nabla.adjoint()) * cr(0.5);
    let inv_sqrt = herm_fn(&nabla, |x| cr(1.0 / x.max(f64::MIN_POSITIVE).sqrt()));
    // J = T ∇^{-1/2} = A K ∇^{-1/2} = A conj(∇^{-1/2}) K
    let j = t.after_linear(&inv_sqrt);
    (j, nabla)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(n: usize, m: usize, seed: u64) -> CMat {
        let mut s = seed;
        CMat::from_fn(n, m, |_, _| {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let a = ((s >> 33) as f64) / (1u64 << 31) as f64 - 0.5;
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let b = ((s >> 33) as f64) / (1u64 << 31) as f64 - 0.5;
            c(a, b)
        })
    }

    #[test]
    fn null_space_of_wide_matrix() {
        let a = sample(2, 5, 3);
        let k = null_space(&a, 1e-12);
        assert_eq!(k.ncols(), 3);
        assert!(fro(&(&a * &k)) < 1e-12);
        assert!(unitarity_residual(&(k.adjoint() * &k)) < 1e-12);
    }

    #[test]
    fn pinv_solves_consistent_system() {
        let s = sample(4, 6, 7);
        let x = sample(3, 4, 9);
        let t = &x * &s;
        let (y, res) = solve_right(&t, &s, 1e-12);
        assert!(res < 1e-12);
        assert!(fro(&(&y * &s - &t)) < 1e-10);
    }

    #[test]
    fn polar_of_antilinear() {
        let a = sample(3, 3, 11) + CMat::identity(3, 3) * cr(2.0);
        let t = AntiLinear::new(a.clone());
        let (j, nabla) = antilinear_polar(&t);
        let half = herm_fn(&nabla, |x| cr(x.sqrt()));
        let back = j.after_linear(&half);
        assert!(fro(&(back.lin - a)) < 1e-10);
        assert!(unitarity_residual(&j.lin) < 1e-10);
    }

    #[test]
    fn herm_eig_is_sorted() {
        let m = sample(4, 4, 5);
        let h = &m + m.adjoint();
        let (vals, vecs) = herm_eig(&h);
        assert!(vals.windows(2).all(|w| w[0] >= w[1]));
        let back = &vecs * CMat::from_diagonal(&CVec::from_iterator(4, vals.iter().map(|&x| cr(x)))) * vecs.adjoint();
        assert!(fro(&(back - h)) < 1e-10);
    }
}
