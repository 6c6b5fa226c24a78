//! The `induce` report.

use crate::action::UpsilonReport;
use crate::catalog::values_on_group;
use crate::induction::{self, CorepResiduals, DenseReport, UnitarityReport, WeightChangeReport};
use crate::spec_file::{complex_pairs, Problem};
use crate::Result;
use serde::{Deserialize, Serialize};
use std::time::Instant;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportResiduals {
    pub isometry: f64,
    pub corep: f64,
    pub unitarity: f64,
    pub impl1: f64,
    pub impl2: f64,
    pub dense_span_deficit: usize,
    #[serde(rename = "K0_deficit")]
    pub k0_deficit: usize,
    pub weight_change: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Versions {
    pub qinduce: String,
    pub report_format: u32,
}

#[derive(Clone, Debug, Serialize)]
pub struct Certificates {
    pub p_equation: f64,
    pub p_closure: f64,
    pub gram_size: usize,
    pub gram_reproduction: f64,
    pub q_membership: f64,
    pub gram_eigenvalues: Vec<f64>,
    pub corep: CorepResiduals,
    pub dense: DenseReport,
    pub unitarity: UnitarityReport,
    pub upsilon: UpsilonReport,
    pub weight_change: WeightChangeReport,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    #[serde(rename = "dim_P")]
    pub dim_p: usize,
    pub dim_carrier: usize,
    pub gram_rank: usize,
    pub residuals: ReportResiduals,
    /// `(ι ⊗ Tr)(ρ)` over the canonical basis of `M`.
    pub character: Vec<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle_character: Option<Vec<[f64; 2]>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub character_error: Option<f64>,
    pub certificates: Certificates,
    pub spec_hash: String,
    pub versions: Versions,
    pub wall_time_ms: u64,
}

pub fn versions() -> Versions {
    Versions { qinduce: env!("CARGO_PKG_VERSION").to_string(), report_format: 1 }
}

impl Report {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// JSON with the timing field zeroed; identical for identical spec and seed.
    pub fn canonical_json(&self) -> Result<String> {
        let mut r = self.clone();
        r.wall_time_ms = 0;
        r.to_json()
    }

    /// Largest of the floating residuals.
    pub fn worst_residual(&self) -> f64 {
        let r = &self.residuals;
        [r.isometry, r.corep, r.unitarity, r.impl1, r.impl2, r.weight_change].into_iter().fold(0.0, f64::max)
    }
}

/// Runs the full construction with certificates.
pub fn induce_report(problem: &Problem) -> Result<Report> {
    let start = Instant::now();
    let b = &problem.bundle;
    let seed = problem.spec.seed;
    let ind = induction::induce(b, &problem.u, seed)?;
    let dense = induction::dense_families(b, &problem.u, &ind.p, &ind.carrier, seed)?;
    let unitarity = induction::unitarity_certificate(b, &problem.u, &ind.p, &ind.carrier, &ind.corep)?;
    let wc = induction::weight_change(b, &problem.u, &ind, problem.eta.density(), seed)?;
    let chi = values_on_group(&ind.corep.character()?);
    let oracle = problem.oracle_character()?;
    let character_error = oracle.as_ref().map(|o| o.iter().zip(&chi).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max));
    let cr = &ind.corep.residuals;
    let residuals = ReportResiduals {
        isometry: cr.isometry,
        corep: cr.corep,
        unitarity: cr.unitarity,
        impl1: b.upsilon_report.impl1,
        impl2: b.upsilon_report.impl2,
        dense_span_deficit: dense.deficit,
        k0_deficit: unitarity.k0_deficit,
        weight_change: wc.equivalence,
    };
    let certificates = Certificates {
        p_equation: ind.p.equation_residual,
        p_closure: ind.p.closure_residual,
        gram_size: ind.carrier.raw_dim(),
        gram_reproduction: ind.carrier.reproduction,
        q_membership: ind.carrier.q_membership,
        gram_eigenvalues: ind.carrier.eigenvalues.clone(),
        corep: cr.clone(),
        dense,
        unitarity,
        upsilon: b.upsilon_report.clone(),
        weight_change: wc,
    };
    Ok(Report {
        dim_p: ind.p.dim(),
        dim_carrier: ind.carrier.rank,
        gram_rank: ind.carrier.rank,
        residuals,
        character: complex_pairs(&chi),
        oracle_character: oracle.as_deref().map(complex_pairs),
        character_error,
        certificates,
        spec_hash: problem.spec.hash()?,
        versions: versions(),
        wall_time_ms: start.elapsed().as_millis() as u64,
    })
}
