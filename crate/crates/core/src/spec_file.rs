//! JSON spec files describing an action bundle and a corepresentation.
//!
//! Complex numbers are `[re, im]` pairs. Matrices are lists of rows. Explicit
//! maps act on coefficient vectors over the canonical `(block, row, col)` basis.

use crate::action::{ActionBundle, ActionCore};
use crate::algebra::{Element, LegLayout, LinearAlgebraMap, MultiMatrixAlgebra};
use crate::catalog::{self, FiniteGroup, GroupRep};
use crate::linalg::{c, CMat, C64};
use crate::quantum_group::{dual_quantum_group, QuantumGroup};
use crate::weight_correspondence::random_q_weight;
use crate::weights::Weight;
use crate::{default_tol, Error, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

pub type Matrix = Vec<Vec<[f64; 2]>>;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgebraSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub blocks: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub comult: Option<Matrix>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActionSpec {
    /// `subgroup`, `quotient`, `trivial` or `comultiplication`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subgroup: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub map: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Matrix>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorepSpec {
    /// Representation label of the subgroup (subgroup actions only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rep: Option<String>,
    /// Projections `P_k` of `U = Σ λ_k ⊗ P_k` (quotient actions only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grading: Option<Vec<Matrix>>,
    #[serde(rename = "K_dim", default, skip_serializing_if = "Option::is_none")]
    pub k_dim: Option<usize>,
    /// Realization matrix of `U ∈ N ⊗ B(K)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Matrix>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightSpec {
    /// One density matrix per block of `Q`.
    pub density: Vec<Matrix>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecFile {
    #[serde(rename = "M")]
    pub m: AlgebraSpec,
    #[serde(rename = "N")]
    pub n: AlgebraSpec,
    pub alpha: ActionSpec,
    #[serde(rename = "U")]
    pub u: CorepSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<WeightSpec>,
    /// Second weight on `Q` for the weight-change check; random when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<WeightSpec>,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default)]
    pub seed: u64,
}

fn spec_err(path: &str, msg: impl std::fmt::Display) -> Error {
    Error::Spec(format!("{path}: {msg}"))
}

impl SpecFile {
    pub fn parse(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            spec_err(if path.is_empty() { "<root>" } else { &path }, e.into_inner())
        })
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn to_value(&self) -> Result<Value> {
        Ok(serde_json::to_value(self)?)
    }

    /// SHA-256 of the compact normalized form.
    pub fn hash(&self) -> Result<String> {
        let text = serde_json::to_string(&self.to_value()?)?;
        Ok(hex::encode(Sha256::digest(text.as_bytes())))
    }

    /// Preset bundle `G/H` with the given representation label.
    pub fn subgroup(group: &str, subgroup: &str, rep: &str) -> Self {
        SpecFile {
            m: AlgebraSpec { preset: Some(format!("C({group})")), blocks: None, comult: None },
            n: AlgebraSpec { preset: Some(format!("C({group}:{subgroup})")), blocks: None, comult: None },
            alpha: ActionSpec {
                preset: Some("subgroup".into()),
                group: Some(group.into()),
                subgroup: Some(subgroup.into()),
                target: None,
                map: None,
                matrix: None,
            },
            u: CorepSpec { rep: Some(rep.into()), grading: None, k_dim: None, matrix: None },
            theta: None,
            eta: None,
            tol: default_tol(),
            seed: 0,
        }
    }

    /// `ℂ[S3] → ℂ[Z2]` with `U = p₊ ⊗ 1 + p₋ ⊗ S`, `S` the swap on `ℂ²`.
    pub fn s3_quotient() -> Self {
        let h = 0.5;
        let plus = vec![vec![[h, 0.0], [h, 0.0]], vec![[h, 0.0], [h, 0.0]]];
        let minus = vec![vec![[h, 0.0], [-h, 0.0]], vec![[-h, 0.0], [h, 0.0]]];
        SpecFile {
            m: AlgebraSpec { preset: Some("C[S3]".into()), blocks: None, comult: None },
            n: AlgebraSpec { preset: Some("C[Z2]".into()), blocks: None, comult: None },
            alpha: ActionSpec {
                preset: Some("quotient".into()),
                group: Some("S3".into()),
                subgroup: None,
                target: Some("Z2".into()),
                map: Some(catalog::s3_sign_map()),
                matrix: None,
            },
            u: CorepSpec { rep: None, grading: Some(vec![plus, minus]), k_dim: None, matrix: None },
            theta: None,
            eta: None,
            tol: default_tol(),
            seed: 0,
        }
    }
}

/// Named bundles shipped with the crate.
pub fn catalog_bundles() -> Vec<(String, SpecFile)> {
    let mut out: Vec<(String, SpecFile)> = [
        ("S3/C3", "S3", "C3", "chi1"),
        ("S3/C2", "S3", "C2", "sign"),
        ("S3/S3", "S3", "full", "std"),
        ("S3/e", "S3", "trivial", "trivial2"),
        ("Z4/e", "Z4", "trivial", "trivial2"),
        ("Z4/Z4", "Z4", "full", "chi1"),
        ("Z4/C2", "Z4", "C2", "chi1"),
        ("Z6/C3", "Z6", "C3", "chi1"),
        ("D4/C4", "D4", "C4", "chi1"),
        ("Q8/C4", "Q8", "C4", "chi1"),
    ]
    .iter()
    .map(|&(name, g, h, r)| (name.to_string(), SpecFile::subgroup(g, h, r)))
    .collect();
    out.push(("C[S3]->C[Z2]".into(), SpecFile::s3_quotient()));
    out
}

pub fn catalog_bundle(name: &str) -> Result<SpecFile> {
    catalog_bundles()
        .into_iter()
        .find(|(n, _)| n == name)
        .map(|(_, s)| s)
        .ok_or_else(|| Error::InvalidInput(format!("unknown catalog bundle '{name}'")))
}

const FLOAT_KEYS: [&str; 5] = ["comult", "matrix", "grading", "density", "tol"];

fn floats(v: &mut Value) {
    match v {
        Value::Number(n) => {
            if let Some(f) = n.as_f64() {
                *v = serde_json::json!(f);
            }
        }
        Value::Array(a) => a.iter_mut().for_each(floats),
        _ => {}
    }
}

fn normalize_value(v: &mut Value) {
    match v {
        Value::Object(map) => {
            map.retain(|_, x| !x.is_null());
            for (k, x) in map.iter_mut() {
                if FLOAT_KEYS.contains(&k.as_str()) {
                    floats(x);
                } else {
                    normalize_value(x);
                }
            }
        }
        Value::Array(a) => a.iter_mut().for_each(normalize_value),
        _ => {}
    }
}

/// Canonical JSON form of a spec text: nulls dropped, defaults filled in,
/// float-valued fields written as floats, keys sorted.
pub fn normalize(text: &str) -> Result<Value> {
    let mut v: Value = serde_json::from_str(text)?;
    if let Value::Object(map) = &mut v {
        map.entry("tol").or_insert_with(|| serde_json::json!(default_tol()));
        map.entry("seed").or_insert_with(|| serde_json::json!(0));
    }
    normalize_value(&mut v);
    Ok(v)
}

fn to_cmat(path: &str, m: &Matrix) -> Result<CMat> {
    let rows = m.len();
    let cols = m.first().map(|r| r.len()).unwrap_or(0);
    if rows == 0 || m.iter().any(|r| r.len() != cols) {
        return Err(spec_err(path, "matrix must be a non-empty list of rows of equal length"));
    }
    Ok(CMat::from_fn(rows, cols, |i, j| c(m[i][j][0], m[i][j][1])))
}

pub fn from_cmat(m: &CMat) -> Matrix {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect()).collect()
}

pub fn complex_pairs(v: &[C64]) -> Vec<[f64; 2]> {
    v.iter().map(|z| [z.re, z.im]).collect()
}

fn algebra(path: &str, spec: &AlgebraSpec, tol: f64) -> Result<QuantumGroup> {
    match (&spec.preset, &spec.blocks, &spec.comult) {
        (Some(p), None, None) => catalog::quantum_group_preset(p, tol).map_err(|e| spec_err(&format!("{path}.preset"), e)),
        (None, Some(b), Some(cm)) => {
            let alg = MultiMatrixAlgebra::new(b.clone()).map_err(|e| spec_err(&format!("{path}.blocks"), e))?;
            let l = alg.layout();
            let cmat = to_cmat(&format!("{path}.comult"), cm)?;
            let map = LinearAlgebraMap::new(l.clone(), l.concat(&l), cmat).map_err(|e| spec_err(&format!("{path}.comult"), e))?;
            QuantumGroup::new("explicit", alg, map, tol).map_err(|e| spec_err(path, e))
        }
        _ => Err(spec_err(path, "give either `preset` or both `blocks` and `comult`")),
    }
}

fn block_diag(path: &str, layout: &LegLayout, blocks: &[Matrix]) -> Result<Element> {
    let alg = layout.factor(0);
    if blocks.len() != alg.num_blocks() {
        return Err(spec_err(path, format!("expected {} blocks, got {}", alg.num_blocks(), blocks.len())));
    }
    let d = alg.real_dim();
    let mut m = CMat::zeros(d, d);
    let mut off = 0;
    for (k, b) in blocks.iter().enumerate() {
        let bm = to_cmat(&format!("{path}[{k}]"), b)?;
        let n = alg.block_dims()[k];
        if bm.nrows() != n || bm.ncols() != n {
            return Err(spec_err(&format!("{path}[{k}]"), format!("block {k} must be {n}×{n}")));
        }
        m.view_mut((off, off), (n, n)).copy_from(&bm);
        off += n;
    }
    Ok(Element::from_matrix(layout, &m)?.0)
}

/// The classical data behind a subgroup bundle, for the Frobenius oracle.
#[derive(Clone, Debug)]
pub struct ClassicalData {
    pub group: FiniteGroup,
    pub subgroup: Vec<usize>,
    pub rep: GroupRep,
}

/// A validated bundle, ready for the pipeline.
#[derive(Clone, Debug)]
pub struct Problem {
    pub spec: SpecFile,
    pub bundle: ActionBundle,
    pub u: Element,
    pub eta: Weight,
    pub classical: Option<ClassicalData>,
}

impl Problem {
    pub fn from_spec(spec: &SpecFile) -> Result<Self> {
        let tol = spec.tol;
        if !(tol.is_finite() && tol > 0.0) {
            return Err(spec_err("tol", "must be a positive number"));
        }
        let m = algebra("M", &spec.m, tol)?;
        let n = algebra("N", &spec.n, tol)?;
        let a = &spec.alpha;
        let expect_presets = |mp: String, np: String| -> Result<()> {
            if spec.m.preset.as_deref() != Some(mp.as_str()) {
                return Err(spec_err("M.preset", format!("this action needs M = {mp}")));
            }
            if spec.n.preset.as_deref() != Some(np.as_str()) {
                return Err(spec_err("N.preset", format!("this action needs N = {np}")));
            }
            Ok(())
        };
        let need = |field: &str, v: &Option<String>| -> Result<String> { v.clone().ok_or_else(|| spec_err(&format!("alpha.{field}"), "missing")) };
        let mut classical_gh: Option<(FiniteGroup, Vec<usize>)> = None;
        let mut quotient_target: Option<catalog::GroupAlgebra> = None;
        let alpha = match (a.preset.as_deref(), &a.matrix) {
            (Some("subgroup"), None) => {
                let (gn, hn) = (need("group", &a.group)?, need("subgroup", &a.subgroup)?);
                expect_presets(format!("C({gn})"), format!("C({gn}:{hn})"))?;
                let g = FiniteGroup::by_name(&gn).map_err(|e| spec_err("alpha.group", e))?;
                let h = g.subgroup_by_spec(&hn).map_err(|e| spec_err("alpha.subgroup", e))?;
                let map = catalog::subgroup_action_map(&g, &h)?;
                classical_gh = Some((g, h));
                map
            }
            (Some("quotient"), None) => {
                let (gn, kn) = (need("group", &a.group)?, need("target", &a.target)?);
                expect_presets(format!("C[{gn}]"), format!("C[{kn}]"))?;
                let g = FiniteGroup::by_name(&gn).map_err(|e| spec_err("alpha.group", e))?;
                let k = FiniteGroup::by_name(&kn).map_err(|e| spec_err("alpha.target", e))?;
                let pi = a.map.clone().ok_or_else(|| spec_err("alpha.map", "missing"))?;
                let ga = catalog::GroupAlgebra::new(&g, tol)?;
                let ka = catalog::GroupAlgebra::new(&k, tol)?;
                let map = catalog::quotient_action_map(&g, &ga, &k, &ka, &pi).map_err(|e| spec_err("alpha.map", e))?;
                quotient_target = Some(ka);
                map
            }
            (Some("trivial"), None) => {
                if n.dim() != 1 {
                    return Err(spec_err("N", "the trivial action needs N = ℂ, e.g. C(Z1)"));
                }
                catalog::trivial_action_map(&m.algebra)?
            }
            (Some("comultiplication"), None) => {
                if spec.m != spec.n {
                    return Err(spec_err("N", "the comultiplication action needs N = M"));
                }
                m.comult.clone()
            }
            (None, Some(mat)) => {
                let cm = to_cmat("alpha.matrix", mat)?;
                LinearAlgebraMap::new(m.layout(), LegLayout::new(vec![m.algebra.clone(), n.algebra.clone()]), cm).map_err(|e| spec_err("alpha.matrix", e))?
            }
            (Some(p), None) => return Err(spec_err("alpha.preset", format!("unknown preset '{p}'"))),
            _ => return Err(spec_err("alpha", "give either `preset` or `matrix`")),
        };
        // the target must match N's layout exactly
        let target = &alpha.target;
        if target.legs() != 2 || target.factor(0) != &m.algebra || target.factor(1) != &n.algebra {
            return Err(spec_err("alpha", "α must map M into M ⊗ N"));
        }
        let core = ActionCore::new(m.clone(), n.clone(), alpha.clone(), None, tol)?;
        let ql = core.q.layout();
        let core = match &spec.theta {
            None => core,
            Some(w) => {
                let h = block_diag("theta.density", &ql, &w.density)?;
                ActionCore::new(m, n, alpha, Some(h), tol)?
            }
        };
        // U
        let u_spec = &spec.u;
        let mut rep = None;
        let u = match (&u_spec.rep, &u_spec.grading, &u_spec.matrix) {
            (Some(label), None, None) => {
                let (g, h) = classical_gh.as_ref().ok_or_else(|| spec_err("U.rep", "representation labels need a subgroup action"))?;
                let r = catalog::rep_by_label(g, h, label, tol).map_err(|e| spec_err("U.rep", e))?;
                let u = catalog::corep_from_rep(&r);
                rep = Some(r);
                u
            }
            (None, Some(ps), None) => {
                let ka = quotient_target.as_ref().ok_or_else(|| spec_err("U.grading", "gradings need a quotient action"))?;
                let mats = ps.iter().enumerate().map(|(k, p)| to_cmat(&format!("U.grading[{k}]"), p)).collect::<Result<Vec<_>>>()?;
                catalog::grading_corep(ka, &mats).map_err(|e| spec_err("U.grading", e))?
            }
            (None, None, Some(mat)) => {
                let d = u_spec.k_dim.ok_or_else(|| spec_err("U.K_dim", "missing"))?;
                let layout = LegLayout::new(vec![core.n.algebra.clone(), MultiMatrixAlgebra::full(d)]);
                let cm = to_cmat("U.matrix", mat)?;
                if cm.nrows() != layout.real_dim() || cm.ncols() != layout.real_dim() {
                    return Err(spec_err("U.matrix", format!("expected a {0}×{0} matrix", layout.real_dim())));
                }
                let (el, res) = Element::from_matrix(&layout, &cm)?;
                if res > tol {
                    return Err(spec_err("U.matrix", format!("not in N ⊗ B(ℂ^{d}) (distance {res:.3e})")));
                }
                el
            }
            _ => return Err(spec_err("U", "give exactly one of `rep`, `grading` or `K_dim` with `matrix`")),
        };
        let eta = match &spec.eta {
            Some(w) => Weight::new(block_diag("eta.density", &ql, &w.density)?).map_err(|e| spec_err("eta.density", e))?,
            None => random_q_weight(&core, &mut ChaCha8Rng::seed_from_u64(spec.seed ^ 0xe7a))?,
        };
        let fallback = match &classical_gh {
            Some((g, _)) => Some((catalog::classical_upsilon(g, &core.q.units)?, "translation of cosets".to_string())),
            None => None,
        };
        let dual = dual_quantum_group(&core.m, tol)?;
        let bundle = core.implement(&dual, fallback)?;
        let classical = match (classical_gh, rep) {
            (Some((group, subgroup)), Some(rep)) => Some(ClassicalData { group, subgroup, rep }),
            _ => None,
        };
        Ok(Problem { spec: spec.clone(), bundle, u, eta, classical })
    }

    /// Frobenius character of the classical data, if any.
    pub fn oracle_character(&self) -> Result<Option<Vec<C64>>> {
        match &self.classical {
            Some(cd) => Ok(Some(catalog::classical_induction_oracle(&cd.group, &cd.subgroup, &cd.rep)?)),
            None => Ok(None),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_matches_normalized_text() {
        let text = r#"{
            "M": {"preset": "C(S3)"},
            "N": {"preset": "C(S3:C3)"},
            "alpha": {"preset": "subgroup", "group": "S3", "subgroup": "C3"},
            "U": {"rep": "chi1"},
            "theta": {"density": [[[[1, 0]]], [[[2, 0]]]]},
            "seed": 4
        }"#;
        let spec = SpecFile::parse(text).unwrap();
        assert_eq!(spec.to_value().unwrap(), normalize(text).unwrap());
        let again = SpecFile::parse(&spec.to_json().unwrap()).unwrap();
        assert_eq!(again, spec);
        for (_, s) in catalog_bundles() {
            let t = s.to_json().unwrap();
            assert_eq!(SpecFile::parse(&t).unwrap().to_value().unwrap(), normalize(&t).unwrap());
        }
    }

    #[test]
    fn diagnostics_carry_field_paths() {
        let bad = r#"{"M": {"preset": "C(S3)"}, "N": {"preset": "C(S3:C3)"},
            "alpha": {"preset": "subgroup", "group": "S3", "subgroup": "C3"},
            "U": {"K_dim": 1, "matrix": [[[1, 0, 3]]]}}"#;
        let e = SpecFile::parse(bad).unwrap_err().to_string();
        assert!(e.contains("U.matrix"), "{e}");
        let unknown = r#"{"M": {"preset": "C(S3)", "colour": 1}, "N": {"preset": "C(Z1)"}, "alpha": {"preset": "trivial"}, "U": {"rep": "x"}}"#;
        let e = SpecFile::parse(unknown).unwrap_err().to_string();
        assert!(e.contains("M"), "{e}");
        let mut s = SpecFile::subgroup("S3", "C3", "chi1");
        s.n.preset = Some("C(S3:C2)".into());
        let e = Problem::from_spec(&s).unwrap_err().to_string();
        assert!(e.contains("N.preset"), "{e}");
    }

    #[test]
    fn non_corepresentation_is_rejected() {
        let mut s = SpecFile::subgroup("S3", "C3", "chi1");
        let mut m = vec![vec![[0.0, 0.0]; 3]; 3];
        for (i, row) in m.iter_mut().enumerate() {
            row[i] = [1.0, 0.0];
        }
        m[1][1] = [0.0, 1.0];
        s.u = CorepSpec { rep: None, grading: None, k_dim: Some(1), matrix: Some(m) };
        let p = Problem::from_spec(&s).unwrap();
        let e = crate::induction::induce(&p.bundle, &p.u, 0).unwrap_err().to_string();
        assert!(e.contains("corep identity residual"), "{e}");
    }

    #[test]
    fn catalog_bundles_build() {
        for name in ["S3/C3", "C[S3]->C[Z2]"] {
            let p = Problem::from_spec(&catalog_bundle(name).unwrap()).unwrap();
            assert!(p.bundle.upsilon_report.impl1 < 1e-9);
        }
    }
}
