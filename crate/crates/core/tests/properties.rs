use proptest::prelude::*;
use qinduce::algebra::{Element, Functional, LegLayout, MatFn, MultiMatrixAlgebra};
use qinduce::catalog::{self, values_on_group, FiniteGroup};
use qinduce::induction;
use qinduce::linalg::{self, CVec};
use qinduce::report::induce_report;
use qinduce::spec_file::{normalize, Problem, SpecFile, WeightSpec};
use qinduce::weights::{connes_cocycle, gns, modular_data, Weight};
use qinduce::Complex64 as C64;

fn layout(blocks: &[usize]) -> LegLayout {
    MultiMatrixAlgebra::new(blocks.to_vec()).unwrap().layout()
}

fn coeffs(n: usize) -> impl Strategy<Value = CVec> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), n)
        .prop_map(|v| CVec::from_iterator(v.len(), v.into_iter().map(|(a, b)| C64::new(a, b))))
}

fn element(l: &LegLayout) -> impl Strategy<Value = Element> {
    let l = l.clone();
    coeffs(l.lin_dim()).prop_map(move |c| Element::from_coeffs(&l, &c).unwrap())
}

fn weight(l: &LegLayout) -> impl Strategy<Value = Weight> {
    let l = l.clone();
    (element(&l), 0.05..2.0f64)
        .prop_map(move |(x, s)| Weight::new(&(&x * &x.adjoint()) + &Element::scalar(&l, C64::new(s, 0.0))).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn adjoint_is_an_involutive_antiautomorphism(
        (x, y) in (element(&layout(&[1, 2])), element(&layout(&[1, 2]))),
        re in -2.0..2.0f64, im in -2.0..2.0f64,
    ) {
        let z = C64::new(re, im);
        prop_assert!(x.adjoint().adjoint().dist(&x) < 1e-12);
        prop_assert!((&x * &y).adjoint().dist(&(&y.adjoint() * &x.adjoint())) < 1e-12);
        prop_assert!(x.scale(z).adjoint().dist(&x.adjoint().scale(z.conj())) < 1e-12);
        let n = x.norm();
        prop_assert!(((&x.adjoint() * &x).norm() - n * n).abs() < 1e-10 * n * n.max(1.0));
    }

    #[test]
    fn slices_multiply_through_a_basis_sum(
        (x, y) in (element(&layout(&[1, 2]).concat(&layout(&[3]))), element(&layout(&[1, 2]).concat(&layout(&[3])))),
        v in coeffs(3), w in coeffs(3),
    ) {
        let lhs = (&x * &y).slice(1, &Functional::vector(&v, &w).unwrap()).unwrap();
        let mut sum = Element::zeros(&layout(&[1, 2]));
        for i in 0..3 {
            let mut e = CVec::zeros(3);
            e[i] = C64::new(1.0, 0.0);
            let a = x.slice(1, &Functional::vector(&e, &w).unwrap()).unwrap();
            let b = y.slice(1, &Functional::vector(&v, &e).unwrap()).unwrap();
            sum = &sum + &(&a * &b);
        }
        prop_assert!(lhs.dist(&sum) < 1e-10);
    }

    #[test]
    fn imaginary_powers_form_a_group(w in weight(&layout(&[2, 1])), s in -1.0..1.0f64, t in -1.0..1.0f64) {
        let h = w.density();
        let hs = h.matrix_function(MatFn::PowerIt(s)).unwrap();
        let ht = h.matrix_function(MatFn::PowerIt(t)).unwrap();
        let hst = h.matrix_function(MatFn::PowerIt(s + t)).unwrap();
        prop_assert!((&hs * &ht).dist(&hst) < 1e-9);
    }

    #[test]
    fn gns_and_modular_identities(phi in weight(&layout(&[1, 2])), (x, y) in (element(&layout(&[1, 2])), element(&layout(&[1, 2])))) {
        let g = gns(&phi);
        let md = modular_data(&phi, &g);
        let ip = g.lambda(&y).dotc(&g.lambda(&x)) - phi.eval(&(&y.adjoint() * &x));
        prop_assert!(ip.norm() < 1e-10);
        let jn = md.j.apply(&(md.nabla_pow(0.5) * g.lambda(&x))) - g.lambda(&x.adjoint());
        prop_assert!(jn.norm() < 1e-10);
        prop_assert!(phi.eval(&(&x.adjoint() * &x)).re >= -1e-12);
    }

    #[test]
    fn connes_cocycles_are_unitary(phi in weight(&layout(&[1, 2])), psi in weight(&layout(&[1, 2])), t in -3.0..3.0f64) {
        let u = connes_cocycle(&phi, &psi, t).unwrap();
        prop_assert!(linalg::unitarity_residual(u.mat()) < 1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn spec_round_trip(seed in any::<u64>(), tol in 1e-12..1e-6f64, a in 0.1..5.0f64, b in 0.1..5.0f64, quotient in any::<bool>()) {
        let mut s = if quotient { SpecFile::s3_quotient() } else { SpecFile::subgroup("S3", "C3", "chi1") };
        s.seed = seed;
        s.tol = tol;
        if !quotient {
            s.theta = Some(WeightSpec { density: vec![vec![vec![[a, 0.0]]], vec![vec![[b, 0.0]]]] });
        }
        let text = s.to_json().unwrap();
        let parsed = SpecFile::parse(&text).unwrap();
        prop_assert_eq!(&parsed, &s);
        prop_assert_eq!(parsed.to_value().unwrap(), normalize(&text).unwrap());
        prop_assert_eq!(parsed.hash().unwrap(), s.hash().unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(4))]

    #[test]
    fn reports_are_deterministic(seed in any::<u64>()) {
        let mut s = SpecFile::subgroup("S3", "C2", "sign");
        s.seed = seed;
        let p = Problem::from_spec(&s).unwrap();
        let a = induce_report(&p).unwrap().canonical_json().unwrap();
        qinduce::par::set_enabled(false);
        let p = Problem::from_spec(&s).unwrap();
        let b = induce_report(&p).unwrap().canonical_json().unwrap();
        qinduce::par::set_enabled(true);
        prop_assert_eq!(a, b);
    }
}

const PRESETS: &[(&str, &str, &str)] = &[
    ("Z2", "trivial", "trivial"),
    ("Z3", "full", "chi1"),
    ("Z4", "C2", "chi1"),
    ("Z5", "trivial", "trivial"),
    ("Z6", "C2", "chi1"),
    ("Z6", "C3", "chi2"),
    ("Z8", "C4", "chi1"),
    ("S3", "C3", "chi2"),
    ("S3", "C2", "trivial"),
    ("S3", "full", "sign"),
    ("D4", "C4", "chi3"),
    ("D4", "C2", "chi1"),
    ("Q8", "C4", "chi2"),
    ("Q8", "C2", "chi1"),
];

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10))]

    #[test]
    fn pipeline_matches_frobenius((g, h, rep) in prop::sample::select(PRESETS), seed in 0..1000u64) {
        let mut s = SpecFile::subgroup(g, h, rep);
        s.seed = seed;
        let p = Problem::from_spec(&s).unwrap();
        let ind = induction::induce(&p.bundle, &p.u, seed).unwrap();
        let chi = values_on_group(&ind.corep.character().unwrap());
        let oracle = p.oracle_character().unwrap().unwrap();
        let err = chi.iter().zip(&oracle).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        prop_assert!(err < 1e-8, "{g}/{h} {rep}: {err:e}");
        let group = FiniteGroup::by_name(g).unwrap();
        let sub = group.subgroup_by_spec(h).unwrap();
        let u = catalog::rep_by_label(&group, &sub, rep, 1e-9).unwrap();
        prop_assert_eq!(ind.carrier.rank, group.order() / sub.len() * u.dim);
    }
}
