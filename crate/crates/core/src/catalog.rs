//! Example inputs: finite groups, their function and group algebras, classical
//! and cocommutative actions, corepresentations, and the classical induction
//! oracle.

use crate::algebra::{generated_subalgebra, Element, LegLayout, LinearAlgebraMap, MultiMatrixAlgebra, Subalgebra};
use crate::linalg::{c, cr, CMat, CVec, C64, ZERO};
use crate::quantum_group::QuantumGroup;
use crate::{Error, Result};
use std::collections::BTreeSet;

/// A finite group given by its Cayley table.
#[derive(Clone, Debug, PartialEq)]
pub struct FiniteGroup {
    pub name: String,
    /// `table[a][b]` is the index of `ab`.
    pub table: Vec<Vec<usize>>,
    pub labels: Vec<String>,
    pub identity: usize,
}

impl FiniteGroup {
    /// Validates the Latin-square property, associativity, identity and inverses.
    pub fn new(name: &str, table: Vec<Vec<usize>>, labels: Vec<String>) -> Result<Self> {
        let n = table.len();
        if n == 0 || labels.len() != n || table.iter().any(|r| r.len() != n || r.iter().any(|&x| x >= n)) {
            return Err(Error::InvalidInput(format!("{name}: malformed Cayley table")));
        }
        for a in 0..n {
            let row: BTreeSet<_> = table[a].iter().collect();
            let col: BTreeSet<_> = (0..n).map(|b| &table[b][a]).collect();
            if row.len() != n || col.len() != n {
                return Err(Error::InvalidInput(format!("{name}: Cayley table is not a Latin square")));
            }
        }
        for a in 0..n {
            for b in 0..n {
                for d in 0..n {
                    if table[table[a][b]][d] != table[a][table[b][d]] {
                        return Err(Error::InvalidInput(format!("{name}: multiplication is not associative")));
                    }
                }
            }
        }
        let identity = (0..n)
            .find(|&e| (0..n).all(|a| table[e][a] == a && table[a][e] == a))
            .ok_or_else(|| Error::InvalidInput(format!("{name}: no identity element")))?;
        Ok(Self { name: name.to_string(), table, labels, identity })
    }

    fn from_mul<T: Clone + PartialEq>(name: &str, elems: &[T], labels: Vec<String>, mul: impl Fn(&T, &T) -> T) -> Result<Self> {
        let idx = |x: &T| elems.iter().position(|y| y == x).expect("closed under multiplication");
        let table = elems.iter().map(|a| elems.iter().map(|b| idx(&mul(a, b))).collect()).collect();
        Self::new(name, table, labels)
    }

    pub fn cyclic(n: usize) -> Result<Self> {
        let elems: Vec<usize> = (0..n).collect();
        Self::from_mul(&format!("Z{n}"), &elems, (0..n).map(|k| format!("g^{k}")).collect(), |a, b| (a + b) % n)
    }

    /// `S₃` as permutations of `{0,1,2}`, ordered `e, r, r², (12), (02), (01)`.
    pub fn s3() -> Result<Self> {
        let elems = s3_permutations();
        let labels = ["e", "r", "r2", "t12", "t02", "t01"].iter().map(|s| s.to_string()).collect();
        Self::from_mul("S3", &elems, labels, |a, b| compose(a, b))
    }

    /// Symmetries of the square as permutations of its vertices, `r^k` then `r^k s`.
    pub fn d4() -> Result<Self> {
        let r = vec![1, 2, 3, 0];
        let s = vec![0, 3, 2, 1];
        let mut elems = vec![vec![0, 1, 2, 3]];
        for k in 1..4 {
            let prev = elems[k - 1].clone();
            elems.push(compose(&r, &prev));
        }
        for k in 0..4 {
            elems.push(compose(&elems[k].clone(), &s));
        }
        let labels = (0..4).map(|k| format!("r{k}")).chain((0..4).map(|k| format!("r{k}s"))).collect();
        Self::from_mul("D4", &elems, labels, |a, b| compose(a, b))
    }

    /// Quaternion group, ordered `1, -1, i, -i, j, -j, k, -k`.
    pub fn q8() -> Result<Self> {
        // (sign, unit) with unit 0 = 1, 1 = i, 2 = j, 3 = k
        let unit_mul = |a: usize, b: usize| -> (i8, usize) {
            match (a, b) {
                (0, x) | (x, 0) => (1, x),
                (x, y) if x == y => (-1, 0),
                (1, 2) => (1, 3),
                (2, 3) => (1, 1),
                (3, 1) => (1, 2),
                (2, 1) => (-1, 3),
                (3, 2) => (-1, 1),
                (1, 3) => (-1, 2),
                _ => unreachable!(),
            }
        };
        let elems: Vec<(i8, usize)> = (0..4).flat_map(|u| [(1, u), (-1, u)]).collect();
        let labels = ["1", "-1", "i", "-i", "j", "-j", "k", "-k"].iter().map(|s| s.to_string()).collect();
        Self::from_mul("Q8", &elems, labels, |a, b| {
            let (s, u) = unit_mul(a.1, b.1);
            (a.0 * b.0 * s, u)
        })
    }

    /// Looks up a preset by name (`Z<n>`, `S3`, `D4`, `Q8`).
    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "S3" => Self::s3(),
            "D4" => Self::d4(),
            "Q8" => Self::q8(),
            _ => match name.strip_prefix('Z').and_then(|n| n.parse::<usize>().ok()) {
                Some(n) if (1..=48).contains(&n) => Self::cyclic(n),
                _ => Err(Error::InvalidInput(format!("unknown group '{name}'"))),
            },
        }
    }

    pub fn order(&self) -> usize {
        self.table.len()
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.table[a][b]
    }

    pub fn inv(&self, a: usize) -> usize {
        (0..self.order()).find(|&b| self.table[a][b] == self.identity).expect("inverse")
    }

    pub fn element_order(&self, a: usize) -> usize {
        let mut x = a;
        let mut k = 1;
        while x != self.identity {
            x = self.mul(x, a);
            k += 1;
        }
        k
    }

    /// Checks that `elems` is a subgroup; returns it sorted.
    pub fn subgroup(&self, elems: &[usize]) -> Result<Vec<usize>> {
        let set: BTreeSet<usize> = elems.iter().copied().collect();
        if set.iter().any(|&x| x >= self.order()) || !set.contains(&self.identity) {
            return Err(Error::InvalidInput("subgroup must contain the identity and valid indices".into()));
        }
        for &a in &set {
            if !set.contains(&self.inv(a)) || set.iter().any(|&b| !set.contains(&self.mul(a, b))) {
                return Err(Error::InvalidInput(format!("{elems:?} is not closed under product and inverse")));
            }
        }
        Ok(set.into_iter().collect())
    }

    /// The subgroup as a group of its own (elements relabeled in sorted order).
    pub fn restrict(&self, sub: &[usize]) -> Result<FiniteGroup> {
        let sub = self.subgroup(sub)?;
        let pos = |x: usize| sub.iter().position(|&y| y == x).expect("closed");
        let table = sub.iter().map(|&a| sub.iter().map(|&b| pos(self.mul(a, b))).collect()).collect();
        let labels = sub.iter().map(|&a| self.labels[a].clone()).collect();
        FiniteGroup::new(&format!("{}<{}>", self.name, sub.len()), table, labels)
    }

    /// Named subgroups: `trivial`, `full`, `C<k>` (cyclic, generated by the
    /// first element of order `k`), or an explicit index list `0,1,2`.
    pub fn subgroup_by_spec(&self, spec: &str) -> Result<Vec<usize>> {
        match spec {
            "trivial" | "e" => Ok(vec![self.identity]),
            "full" | "G" => Ok((0..self.order()).collect()),
            _ => {
                if let Some(k) = spec.strip_prefix('C').and_then(|k| k.parse::<usize>().ok()) {
                    let g = (0..self.order())
                        .find(|&g| self.element_order(g) == k)
                        .ok_or_else(|| Error::InvalidInput(format!("{} has no element of order {k}", self.name)))?;
                    return self.subgroup(&self.powers(g));
                }
                let elems: std::result::Result<Vec<usize>, _> = spec.split(',').map(|s| s.trim().parse::<usize>()).collect();
                let elems = elems.map_err(|_| Error::InvalidInput(format!("cannot parse subgroup '{spec}'")))?;
                self.subgroup(&elems)
            }
        }
    }

    pub fn powers(&self, g: usize) -> Vec<usize> {
        let mut out = vec![self.identity];
        let mut x = g;
        while x != self.identity {
            out.push(x);
            x = self.mul(x, g);
        }
        out
    }

    /// Left cosets `xH`, each sorted, ordered by smallest element.
    pub fn left_cosets(&self, sub: &[usize]) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.order()];
        let mut out = Vec::new();
        for x in 0..self.order() {
            if seen[x] {
                continue;
            }
            let mut c: Vec<usize> = sub.iter().map(|&h| self.mul(x, h)).collect();
            c.sort_unstable();
            for &y in &c {
                seen[y] = true;
            }
            out.push(c);
        }
        out
    }

    /// Parity of a permutation group element (only for `S3`).
    fn s3_sign(&self, g: usize) -> f64 {
        if g < 3 {
            1.0
        } else {
            -1.0
        }
    }
}

fn s3_permutations() -> Vec<Vec<usize>> {
    vec![vec![0, 1, 2], vec![1, 2, 0], vec![2, 0, 1], vec![0, 2, 1], vec![2, 1, 0], vec![1, 0, 2]]
}

/// `(a∘b)(i) = a(b(i))`.
fn compose(a: &[usize], b: &[usize]) -> Vec<usize> {
    b.iter().map(|&i| a[i]).collect()
}

/// A unitary representation `g ↦ u(g)` of a finite group.
#[derive(Clone, Debug)]
pub struct GroupRep {
    pub dim: usize,
    pub mats: Vec<CMat>,
}

impl GroupRep {
    /// Validates unitarity and the homomorphism property.
    pub fn new(group: &FiniteGroup, mats: Vec<CMat>, tol: f64) -> Result<Self> {
        let n = group.order();
        if mats.len() != n || mats.is_empty() {
            return Err(Error::InvalidInput("one matrix per group element is required".into()));
        }
        let dim = mats[0].nrows();
        for m in &mats {
            if m.shape() != (dim, dim) || crate::linalg::unitarity_residual(m) > tol {
                return Err(Error::InvalidInput("representation matrices must be unitary of equal size".into()));
            }
        }
        for a in 0..n {
            for b in 0..n {
                let r = crate::linalg::fro(&(&mats[a] * &mats[b] - &mats[group.mul(a, b)]));
                if r > tol {
                    return Err(Error::InvalidInput(format!("u(g)u(h) ≠ u(gh) (residual {r:.3e})")));
                }
            }
        }
        Ok(Self { dim, mats })
    }

    pub fn trivial(group: &FiniteGroup, dim: usize) -> Self {
        Self { dim, mats: vec![CMat::identity(dim, dim); group.order()] }
    }

    pub fn character(&self) -> Vec<C64> {
        self.mats.iter().map(|m| m.trace()).collect()
    }
}

/// Representation labels: `trivial`, `trivial<d>`, `sign` (subgroups of `S3`),
/// `chi<k>` (character `g^j ↦ e^{2πijk/m}` of a cyclic group), `std` (the
/// two-dimensional irreducible representation of `S3`).
pub fn rep_by_label(parent: &FiniteGroup, sub: &[usize], label: &str, tol: f64) -> Result<GroupRep> {
    let h = parent.restrict(sub)?;
    let one = |z: C64| CMat::from_element(1, 1, z);
    if label == "trivial" {
        return Ok(GroupRep::trivial(&h, 1));
    }
    if let Some(d) = label.strip_prefix("trivial").and_then(|d| d.parse::<usize>().ok()) {
        return Ok(GroupRep::trivial(&h, d.max(1)));
    }
    if label == "sign" {
        if parent.name != "S3" {
            return Err(Error::InvalidInput("the sign representation is defined for subgroups of S3".into()));
        }
        return GroupRep::new(&h, sub.iter().map(|&g| one(cr(parent.s3_sign(g)))).collect(), tol);
    }
    if label == "std" {
        if parent.name != "S3" {
            return Err(Error::InvalidInput("std is defined for subgroups of S3".into()));
        }
        let s = 1.0 / 2f64.sqrt();
        let t = 1.0 / 6f64.sqrt();
        let b = CMat::from_row_slice(3, 2, &[cr(s), cr(t), cr(-s), cr(t), ZERO, cr(-2.0 * t)]);
        let perms = s3_permutations();
        let mats = sub
            .iter()
            .map(|&g| {
                let mut p = CMat::zeros(3, 3);
                for i in 0..3 {
                    p[(perms[g][i], i)] = cr(1.0);
                }
                b.transpose() * p * &b
            })
            .collect();
        return GroupRep::new(&h, mats, tol);
    }
    if let Some(k) = label.strip_prefix("chi").and_then(|k| k.parse::<i64>().ok()) {
        let m = h.order();
        let gen = (0..m)
            .find(|&g| h.element_order(g) == m)
            .ok_or_else(|| Error::InvalidInput("chi<k> needs a cyclic subgroup".into()))?;
        let pw = h.powers(gen);
        let mut mats = vec![CMat::zeros(1, 1); m];
        for (j, &g) in pw.iter().enumerate() {
            let ang = 2.0 * std::f64::consts::PI * (j as f64) * (k as f64) / m as f64;
            mats[g] = one(c(ang.cos(), ang.sin()));
        }
        return GroupRep::new(&h, mats, tol);
    }
    Err(Error::InvalidInput(format!("unknown representation label '{label}'")))
}

/// Character of `Ind_H^G u` from the Frobenius formula.
pub fn classical_induction_oracle(g: &FiniteGroup, sub: &[usize], u: &GroupRep) -> Result<Vec<C64>> {
    let sub = g.subgroup(sub)?;
    let h = g.restrict(&sub)?;
    let u = GroupRep::new(&h, u.mats.clone(), 1e-9)?;
    let chi = u.character();
    let n = g.order();
    Ok((0..n)
        .map(|x| {
            let mut s = ZERO;
            for y in 0..n {
                let conj = g.mul(g.mul(g.inv(y), x), y);
                if let Some(p) = sub.iter().position(|&k| k == conj) {
                    s += chi[p];
                }
            }
            s / cr(sub.len() as f64)
        })
        .collect())
}

fn layout2(a: &MultiMatrixAlgebra) -> LegLayout {
    LegLayout::new(vec![a.clone(), a.clone()])
}

/// `C(G)` with `Δ(δ_g) = Σ_{ab=g} δ_a ⊗ δ_b`.
pub fn function_algebra(g: &FiniteGroup, tol: f64) -> Result<QuantumGroup> {
    let n = g.order();
    let m = MultiMatrixAlgebra::diagonal(n);
    let mut mat = CMat::zeros(n * n, n);
    for a in 0..n {
        for b in 0..n {
            mat[(a * n + b, g.mul(a, b))] = cr(1.0);
        }
    }
    let cm = LinearAlgebraMap::new(m.layout(), layout2(&m), mat)?;
    QuantumGroup::new(&format!("C({})", g.name), m, cm, tol)
}

/// `ℂ[G]` realized through the decomposition of the left regular representation.
#[derive(Clone, Debug)]
pub struct GroupAlgebra {
    pub sub: Subalgebra,
    /// Column `g` holds the coefficients of `λ_g` in the abstract algebra.
    pub lambda: CMat,
    pub lambda_inv: CMat,
}

impl GroupAlgebra {
    pub fn new(g: &FiniteGroup, tol: f64) -> Result<Self> {
        let n = g.order();
        let amb = MultiMatrixAlgebra::full(n).layout();
        let gens: Vec<Element> = (0..n).map(|x| Element::from_matrix_unchecked(&amb, regular(g, x))).collect();
        let sub = generated_subalgebra(&amb, &gens, tol)?;
        if sub.algebra.lin_dim() != n {
            return Err(Error::Numerical("regular representation generated an algebra of the wrong dimension".into()));
        }
        let mut lambda = CMat::zeros(n, n);
        for (x, gen) in gens.iter().enumerate() {
            let (el, d) = sub.pull_back(gen)?;
            if d > tol * 10.0 {
                return Err(Error::Numerical("λ_g outside the generated algebra".into()));
            }
            lambda.set_column(x, &el.coeffs());
        }
        let lambda_inv = lambda.clone().try_inverse().ok_or_else(|| Error::Numerical("group elements are not a basis".into()))?;
        Ok(Self { sub, lambda, lambda_inv })
    }

    pub fn algebra(&self) -> &MultiMatrixAlgebra {
        &self.sub.algebra
    }

    pub fn element(&self, g: usize) -> Element {
        Element::from_coeffs(&self.sub.layout(), &self.lambda.column(g).into_owned()).expect("dimension")
    }
}

/// `λ_g δ_x = δ_{gx}` on `ℓ²(G)`.
fn regular(g: &FiniteGroup, x: usize) -> CMat {
    let n = g.order();
    let mut m = CMat::zeros(n, n);
    for y in 0..n {
        m[(g.mul(x, y), y)] = cr(1.0);
    }
    m
}

/// `ℂ[G]` with `Δ(λ_g) = λ_g ⊗ λ_g`.
pub fn group_algebra(g: &FiniteGroup, tol: f64) -> Result<(QuantumGroup, GroupAlgebra)> {
    let ga = GroupAlgebra::new(g, tol)?;
    let n = g.order();
    let mut tens = CMat::zeros(n * n, n);
    for x in 0..n {
        let cx = ga.lambda.column(x).into_owned();
        tens.set_column(x, &cx.kronecker(&cx));
    }
    let mat = tens * &ga.lambda_inv;
    let m = ga.algebra().clone();
    let cm = LinearAlgebraMap::new(m.layout(), layout2(&m), mat)?;
    let qg = QuantumGroup::new(&format!("C[{}]", g.name), m, cm, tol)?;
    Ok((qg, ga))
}

/// `α(f)(x, h) = f(xh)` on `C(G)` with values in `C(G) ⊗ C(H)`.
pub fn subgroup_action_map(g: &FiniteGroup, sub: &[usize]) -> Result<LinearAlgebraMap> {
    let sub = g.subgroup(sub)?;
    let n = g.order();
    let k = sub.len();
    let m = MultiMatrixAlgebra::diagonal(n);
    let nn = MultiMatrixAlgebra::diagonal(k);
    let mut mat = CMat::zeros(n * k, n);
    for x in 0..n {
        for (hi, &h) in sub.iter().enumerate() {
            mat[(x * k + hi, g.mul(x, h))] = cr(1.0);
        }
    }
    LinearAlgebraMap::new(m.layout(), LegLayout::new(vec![m, nn]), mat)
}

/// `α(λ_g) = λ_g ⊗ λ_{π(g)}` for a homomorphism `π : G → K`.
pub fn quotient_action_map(g: &FiniteGroup, ga: &GroupAlgebra, k: &FiniteGroup, ka: &GroupAlgebra, pi: &[usize]) -> Result<LinearAlgebraMap> {
    let n = g.order();
    if pi.len() != n || pi.iter().any(|&x| x >= k.order()) {
        return Err(Error::InvalidInput("π must assign an element of K to every element of G".into()));
    }
    for a in 0..n {
        for b in 0..n {
            if pi[g.mul(a, b)] != k.mul(pi[a], pi[b]) {
                return Err(Error::InvalidInput("π is not a homomorphism".into()));
            }
        }
    }
    let image: BTreeSet<usize> = pi.iter().copied().collect();
    if image.len() != k.order() {
        return Err(Error::InvalidInput("π is not surjective".into()));
    }
    let lm = ga.algebra().lin_dim();
    let ln = ka.algebra().lin_dim();
    let mut tens = CMat::zeros(lm * ln, n);
    for x in 0..n {
        let cx = ga.lambda.column(x).into_owned();
        let cy = ka.lambda.column(pi[x]).into_owned();
        tens.set_column(x, &cx.kronecker(&cy));
    }
    let mat = tens * &ga.lambda_inv;
    LinearAlgebraMap::new(ga.algebra().layout(), LegLayout::new(vec![ga.algebra().clone(), ka.algebra().clone()]), mat)
}

/// `α(x) = x ⊗ 1` with `N = ℂ`.
pub fn trivial_action_map(m: &MultiMatrixAlgebra) -> Result<LinearAlgebraMap> {
    let n = m.lin_dim();
    LinearAlgebraMap::new(m.layout(), LegLayout::new(vec![m.clone(), MultiMatrixAlgebra::scalars()]), CMat::identity(n, n))
}

/// Closed form `Υ = Σ_g δ_g ⊗ V_g` for the subgroup action on `C(G)`, where `V_g`
/// permutes the coset indicators spanning `Q` by left translation. `units` are
/// the minimal projections of `Q` in `C(G)`, in the order of the basis of `H_θ`.
pub fn classical_upsilon(g: &FiniteGroup, units: &[Element]) -> Result<Element> {
    let n = g.order();
    let cosets: Vec<Vec<usize>> = units
        .iter()
        .map(|u| values_on_group(u).iter().enumerate().filter(|(_, z)| z.norm() > 0.5).map(|(x, _)| x).collect())
        .collect();
    let k = cosets.len();
    let find = |set: &BTreeSet<usize>| cosets.iter().position(|c| c.iter().copied().collect::<BTreeSet<_>>() == *set);
    let mut mat = CMat::zeros(n * k, n * k);
    for x in 0..n {
        for (ci, c) in cosets.iter().enumerate() {
            let moved: BTreeSet<usize> = c.iter().map(|&y| g.mul(x, y)).collect();
            let cj = find(&moved).ok_or_else(|| Error::InvalidInput("units of Q are not permuted by translation".into()))?;
            mat[(x * k + cj, x * k + ci)] = cr(1.0);
        }
    }
    let layout = LegLayout::new(vec![MultiMatrixAlgebra::diagonal(n), MultiMatrixAlgebra::full(k)]);
    Ok(Element::from_matrix_unchecked(&layout, mat))
}

/// `U = Σ_h δ_h ⊗ u(h) ∈ C(H) ⊗ B(K)`.
pub fn corep_from_rep(u: &GroupRep) -> Element {
    let k = u.mats.len();
    let d = u.dim;
    let layout = LegLayout::new(vec![MultiMatrixAlgebra::diagonal(k), MultiMatrixAlgebra::full(d)]);
    let mut m = CMat::zeros(k * d, k * d);
    for (h, mat) in u.mats.iter().enumerate() {
        m.view_mut((h * d, h * d), (d, d)).copy_from(mat);
    }
    Element::from_matrix_unchecked(&layout, m)
}

/// Left regular corepresentation tensored with `1_d`, in `C(G) ⊗ B(ℂ^{|G|} ⊗ ℂ^d)`.
pub fn regular_corep(g: &FiniteGroup, d: usize) -> Element {
    let n = g.order();
    let mats = (0..n)
        .map(|a| {
            let mut p = CMat::zeros(n, n);
            for x in 0..n {
                p[(g.mul(a, x), x)] = cr(1.0);
            }
            p.kronecker(&CMat::identity(d, d))
        })
        .collect();
    corep_from_rep(&GroupRep { dim: n * d, mats })
}

/// `U = Σ_k λ_k ⊗ P_k ∈ ℂ[K] ⊗ B(K)` for orthogonal projections summing to one.
pub fn grading_corep(ka: &GroupAlgebra, projections: &[CMat]) -> Result<Element> {
    let d = projections.first().map(|p| p.nrows()).unwrap_or(0);
    if projections.len() != ka.lambda.ncols() || d == 0 {
        return Err(Error::InvalidInput("one projection per group element is required".into()));
    }
    let bk = MultiMatrixAlgebra::full(d).layout();
    let mut acc: Option<Element> = None;
    for (k, p) in projections.iter().enumerate() {
        let term = ka.element(k).tensor(&Element::from_matrix_unchecked(&bk, p.clone()));
        acc = Some(match acc {
            None => term,
            Some(a) => &a + &term,
        });
    }
    Ok(acc.expect("nonempty"))
}

/// The 8-dimensional Kac–Paljutkin quantum group on `ℂ⁴ ⊕ M₂`.
pub fn kac_paljutkin(tol: f64) -> Result<QuantumGroup> {
    let m = MultiMatrixAlgebra::new(vec![1, 1, 1, 1, 2])?;
    let l = m.layout();
    let l2 = layout2(&m);
    let e = |k: usize| Element::basis(&l, m.basis_index(k, 0, 0));
    let u = |i: usize, j: usize| Element::basis(&l, m.basis_index(4, i, j));
    let i = c(0.0, 1.0);
    let half = cr(0.5);
    let t = |a: &Element, b: &Element, z: C64| a.tensor(b).scale(z);
    let sum = |terms: Vec<Element>| terms.into_iter().reduce(|a, b| &a + &b).expect("nonempty");
    let one = cr(1.0);
    let d_e1 = sum(vec![
        t(&e(0), &e(0), one),
        t(&e(1), &e(1), one),
        t(&e(2), &e(2), one),
        t(&e(3), &e(3), one),
        t(&u(0, 0), &u(0, 0), half),
        t(&u(0, 1), &u(0, 1), half),
        t(&u(1, 0), &u(1, 0), half),
        t(&u(1, 1), &u(1, 1), half),
    ]);
    let d_e2 = sum(vec![
        t(&e(0), &e(1), one),
        t(&e(1), &e(0), one),
        t(&e(2), &e(3), one),
        t(&e(3), &e(2), one),
        t(&u(0, 0), &u(1, 1), half),
        t(&u(1, 1), &u(0, 0), half),
        t(&u(1, 0), &u(0, 1), half * i),
        t(&u(0, 1), &u(1, 0), -half * i),
    ]);
    let d_e3 = sum(vec![
        t(&e(0), &e(2), one),
        t(&e(2), &e(0), one),
        t(&e(1), &e(3), one),
        t(&e(3), &e(1), one),
        t(&u(0, 0), &u(1, 1), half),
        t(&u(1, 1), &u(0, 0), half),
        t(&u(1, 0), &u(0, 1), -half * i),
        t(&u(0, 1), &u(1, 0), half * i),
    ]);
    let d_e4 = sum(vec![
        t(&e(0), &e(3), one),
        t(&e(3), &e(0), one),
        t(&e(1), &e(2), one),
        t(&e(2), &e(1), one),
        t(&u(0, 0), &u(0, 0), half),
        t(&u(1, 1), &u(1, 1), half),
        t(&u(0, 1), &u(0, 1), -half),
        t(&u(1, 0), &u(1, 0), -half),
    ]);
    let d_11 = sum(vec![
        t(&e(0), &u(0, 0), one),
        t(&u(0, 0), &e(0), one),
        t(&e(1), &u(1, 1), one),
        t(&u(1, 1), &e(1), one),
        t(&e(2), &u(1, 1), one),
        t(&u(1, 1), &e(2), one),
        t(&e(3), &u(0, 0), one),
        t(&u(0, 0), &e(3), one),
    ]);
    let d_22 = sum(vec![
        t(&e(0), &u(1, 1), one),
        t(&u(1, 1), &e(0), one),
        t(&e(1), &u(0, 0), one),
        t(&u(0, 0), &e(1), one),
        t(&e(2), &u(0, 0), one),
        t(&u(0, 0), &e(2), one),
        t(&e(3), &u(1, 1), one),
        t(&u(1, 1), &e(3), one),
    ]);
    let d_12 = sum(vec![
        t(&e(0), &u(0, 1), one),
        t(&u(0, 1), &e(0), one),
        t(&e(1), &u(1, 0), i),
        t(&u(1, 0), &e(1), -i),
        t(&e(2), &u(1, 0), -i),
        t(&u(1, 0), &e(2), i),
        t(&e(3), &u(0, 1), -one),
        t(&u(0, 1), &e(3), -one),
    ]);
    let d_21 = d_12.adjoint();
    let mut images = vec![Element::zeros(&l2); m.lin_dim()];
    images[m.basis_index(0, 0, 0)] = d_e1;
    images[m.basis_index(1, 0, 0)] = d_e2;
    images[m.basis_index(2, 0, 0)] = d_e3;
    images[m.basis_index(3, 0, 0)] = d_e4;
    images[m.basis_index(4, 0, 0)] = d_11;
    images[m.basis_index(4, 0, 1)] = d_12;
    images[m.basis_index(4, 1, 0)] = d_21;
    images[m.basis_index(4, 1, 1)] = d_22;
    let cm = LinearAlgebraMap::from_images(&l, &l2, &images)?;
    QuantumGroup::new("KP", m, cm, tol)
}

/// Class functions are compared through values on group elements: for `C(G)`
/// the coefficients of an element are its values.
pub fn values_on_group(x: &Element) -> Vec<C64> {
    x.coeffs().iter().copied().collect()
}

/// Named quantum-group presets.
pub fn quantum_group_preset(name: &str, tol: f64) -> Result<QuantumGroup> {
    if name == "KP" {
        return kac_paljutkin(tol);
    }
    if let Some(g) = name.strip_prefix("C(").and_then(|s| s.strip_suffix(')')) {
        if let Some((g, h)) = g.split_once(':') {
            let g = FiniteGroup::by_name(g)?;
            return function_algebra(&g.restrict(&g.subgroup_by_spec(h)?)?, tol);
        }
        return function_algebra(&FiniteGroup::by_name(g)?, tol);
    }
    if let Some(g) = name.strip_prefix("C[").and_then(|s| s.strip_suffix(']')) {
        return Ok(group_algebra(&FiniteGroup::by_name(g)?, tol)?.0);
    }
    Err(Error::InvalidInput(format!("unknown quantum group preset '{name}'")))
}

/// Lines printed by `catalog list`.
pub fn catalog_listing() -> Vec<String> {
    vec![
        "groups: Z<n> (n ≤ 48), S3, D4, Q8".into(),
        "quantum groups: C(<group>), C(<group>:<subgroup>), C[<group>], KP (Kac–Paljutkin, quantum_group suite only)".into(),
        "subgroups: trivial, full, C<k>, or an explicit index list such as 0,3".into(),
        "representations: trivial, trivial<d>, sign (S3), std (S3), chi<k> (cyclic subgroups)".into(),
        "action presets: subgroup (C(G) ← C(H)), quotient (C[G] → C[K]), trivial, comultiplication".into(),
        "bundles: S3/C3, S3/C2, S3/S3, S3/e, Z4/e, Z4/Z4, Z4/C2, Z6/C3, D4/C4, Q8/C4, C[S3]->C[Z2]".into(),
    ]
}

/// Sign homomorphism `S3 → Z2`.
pub fn s3_sign_map() -> Vec<usize> {
    vec![0, 0, 0, 1, 1, 1]
}

/// Eigen-decomposition-free check that a vector of class-function values is real.
pub fn is_real(v: &[C64], tol: f64) -> bool {
    v.iter().all(|z| z.im.abs() <= tol)
}

pub fn to_cvec(v: &[C64]) -> CVec {
    CVec::from_column_slice(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn group_presets_validate() {
        for name in ["Z2", "Z3", "Z4", "S3", "D4", "Q8"] {
            let g = FiniteGroup::by_name(name).unwrap();
            assert!(g.order() > 0);
        }
        let s3 = FiniteGroup::s3().unwrap();
        assert_eq!(s3.identity, 0);
        assert_eq!(s3.element_order(1), 3);
        assert_eq!(s3.element_order(3), 2);
        assert!(s3.mul(3, 4) != s3.mul(4, 3));
        let q8 = FiniteGroup::q8().unwrap();
        assert_eq!((0..8).filter(|&g| q8.element_order(g) == 4).count(), 6);
    }

    #[test]
    fn bad_table_is_rejected() {
        assert!(FiniteGroup::new("bad", vec![vec![0, 1], vec![0, 1]], vec!["a".into(), "b".into()]).is_err());
    }

    #[test]
    fn frobenius_examples() {
        let g = FiniteGroup::s3().unwrap();
        let c3 = g.subgroup_by_spec("C3").unwrap();
        let u = rep_by_label(&g, &c3, "chi1", 1e-9).unwrap();
        let chi = classical_induction_oracle(&g, &c3, &u).unwrap();
        let want = [2.0, -1.0, -1.0, 0.0, 0.0, 0.0];
        for (z, w) in chi.iter().zip(want) {
            assert!((z - cr(w)).norm() < 1e-12);
        }
        let c2 = g.subgroup_by_spec("C2").unwrap();
        let u = rep_by_label(&g, &c2, "sign", 1e-9).unwrap();
        let chi = classical_induction_oracle(&g, &c2, &u).unwrap();
        assert!((chi[0] - cr(3.0)).norm() < 1e-12);
        let full = g.subgroup_by_spec("full").unwrap();
        let u = rep_by_label(&g, &full, "std", 1e-9).unwrap();
        let chi = classical_induction_oracle(&g, &full, &u).unwrap();
        for (a, b) in chi.iter().zip(u.character()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn function_algebra_of_s3() {
        let q = function_algebra(&FiniteGroup::s3().unwrap(), 1e-9).unwrap();
        for g in 0..6 {
            assert!((q.haar.density().mat()[(g, g)] - cr(1.0 / 6.0)).norm() < 1e-12);
        }
        assert!(q.residuals.w_implements_comult < 1e-10);
        assert!(q.residuals.s_squared < 1e-10);
    }

    #[test]
    fn group_algebra_blocks_and_haar() {
        let (q, ga) = group_algebra(&FiniteGroup::s3().unwrap(), 1e-9).unwrap();
        assert_eq!(q.algebra.block_dims(), &[1, 1, 2]);
        for g in 0..6 {
            let v = q.haar.eval(&ga.element(g));
            let want = if g == 0 { 1.0 } else { 0.0 };
            assert!((v - cr(want)).norm() < 1e-10);
        }
        let (q3, ga3) = group_algebra(&FiniteGroup::cyclic(3).unwrap(), 1e-9).unwrap();
        assert_eq!(q3.algebra.block_dims(), &[1, 1, 1]);
        let s = q3.antipode.apply(&ga3.element(1)).unwrap();
        assert!(s.dist(&ga3.element(2)) < 1e-10);
        // cocommutative
        for b in 0..6 {
            let d = q.comult_basis(b);
            assert!(d.flip().unwrap().dist(&d) < 1e-10);
        }
    }

    #[test]
    fn kac_paljutkin_is_a_quantum_group() {
        let q = kac_paljutkin(1e-9).unwrap();
        assert!(!q.algebra.is_commutative());
        assert!(q.residuals.pentagon < 1e-10);
        // neither commutative nor cocommutative
        let d = q.comult_basis(q.algebra.basis_index(4, 0, 1));
        assert!(d.flip().unwrap().dist(&d) > 1e-3);
    }
}
