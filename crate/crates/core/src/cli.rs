//! Command-line front end.

use crate::catalog::{self, FiniteGroup};
use crate::report::induce_report;
use crate::spec_file::{catalog_bundle, catalog_bundles, complex_pairs, Problem, SpecFile};
use crate::suites::{self, CheckLine, Suite};
use crate::{default_tol, par, Error, Result};
use clap::{Parser, Subcommand};
use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

#[derive(Debug, Parser)]
#[command(name = "qinduce", version, about = "Induced corepresentations of finite quantum groups")]
pub struct Cli {
    /// Run every certificate on one thread.
    #[arg(long, global = true)]
    pub sequential: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build the induced corepresentation and write a JSON report.
    Induce {
        /// Spec file, or `catalog:NAME` for a shipped bundle.
        #[arg(long)]
        spec: String,
        #[arg(long)]
        report: PathBuf,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run certificate suites; exits 1 if any line fails.
    Verify {
        /// Spec file, `catalog:NAME`, or `catalog:all`.
        #[arg(long)]
        spec: String,
        #[arg(long, value_enum, default_value = "all")]
        suite: Suite,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
        /// Print passing lines too.
        #[arg(long, short)]
        verbose: bool,
    },
    /// Print the classical induced character.
    Oracle {
        #[arg(long)]
        group: String,
        #[arg(long)]
        subgroup: String,
        #[arg(long)]
        rep: String,
    },
    /// Shipped presets.
    Catalog {
        #[command(subcommand)]
        what: CatalogCommand,
    },
}

#[derive(Debug, Subcommand)]
pub enum CatalogCommand {
    List,
}

fn load_specs(arg: &str) -> Result<Vec<(String, SpecFile)>> {
    match arg.strip_prefix("catalog:") {
        Some("all") => Ok(catalog_bundles()),
        Some(name) => Ok(vec![(name.to_string(), catalog_bundle(name)?)]),
        None => Ok(vec![(arg.to_string(), SpecFile::load(std::path::Path::new(arg))?)]),
    }
}

fn apply_overrides(spec: &mut SpecFile, tol: Option<f64>, seed: Option<u64>) -> Result<()> {
    if let Some(t) = tol {
        if !(t.is_finite() && t > 0.0) {
            return Err(Error::InvalidInput(format!("--tol must be positive, got {t}")));
        }
        spec.tol = t;
    }
    if let Some(s) = seed {
        spec.seed = s;
    }
    Ok(())
}

fn induce(spec_arg: &str, report: &PathBuf, tol: Option<f64>, seed: Option<u64>, out: &mut dyn Write) -> Result<bool> {
    let mut specs = load_specs(spec_arg)?;
    if specs.len() != 1 {
        return Err(Error::InvalidInput("induce takes a single spec".into()));
    }
    let (_, mut spec) = specs.remove(0);
    apply_overrides(&mut spec, tol, seed)?;
    let problem = Problem::from_spec(&spec)?;
    let r = induce_report(&problem)?;
    std::fs::write(report, r.to_json()? + "\n")?;
    let bound = spec.tol.max(default_tol());
    let res = &r.residuals;
    let mut ok = true;
    for (name, v) in [
        ("isometry", res.isometry),
        ("corep", res.corep),
        ("unitarity", res.unitarity),
        ("impl1", res.impl1),
        ("impl2", res.impl2),
        ("weight_change", res.weight_change),
    ] {
        let pass = v.is_finite() && v <= bound;
        ok &= pass;
        writeln!(out, "{} {name:<16} {v:.3e} (tol {bound:.0e})", if pass { "PASS" } else { "FAIL" })?;
    }
    for (name, v) in [("dense_span_deficit", res.dense_span_deficit), ("K0_deficit", res.k0_deficit)] {
        ok &= v == 0;
        writeln!(out, "{} {name:<16} {v}", if v == 0 { "PASS" } else { "FAIL" })?;
    }
    if let Some(e) = r.character_error {
        let pass = e <= 1e-8;
        ok &= pass;
        writeln!(out, "{} {:<16} {e:.3e} (tol 1e-8)", if pass { "PASS" } else { "FAIL" }, "oracle")?;
    }
    writeln!(out, "dim_P = {}, dim_carrier = {}, wall_time_ms = {}", r.dim_p, r.dim_carrier, r.wall_time_ms)?;
    Ok(ok)
}

fn print_lines(label: &str, lines: &[CheckLine], verbose: bool, out: &mut dyn Write) -> Result<bool> {
    let mut ok = true;
    for l in lines {
        ok &= l.pass;
        if verbose || !l.pass {
            writeln!(
                out,
                "{} [{label}] {}/{}: {:.3e} (tol {:.0e})",
                if l.pass { "PASS" } else { "FAIL" },
                l.suite,
                l.name,
                l.residual,
                l.tol
            )?;
        }
    }
    let failed = lines.iter().filter(|l| !l.pass).count();
    writeln!(out, "{} [{label}] {} checks, {failed} failed", if ok { "PASS" } else { "FAIL" }, lines.len())?;
    Ok(ok)
}

fn verify(spec_arg: &str, suite: Suite, tol: Option<f64>, seed: Option<u64>, verbose: bool, out: &mut dyn Write) -> Result<bool> {
    let specs = load_specs(spec_arg)?;
    let results = par::map_slice(&specs, |(name, spec)| -> Result<(String, Vec<CheckLine>)> {
        let mut spec = spec.clone();
        apply_overrides(&mut spec, tol, seed)?;
        let problem = Problem::from_spec(&spec)?;
        Ok((name.clone(), suites::run(&problem, suite)?))
    });
    let mut ok = true;
    for (r, (name, _)) in results.into_iter().zip(&specs) {
        match r {
            Ok((label, lines)) => ok &= print_lines(&label, &lines, verbose, out)?,
            Err(e) => {
                ok = false;
                writeln!(out, "FAIL [{name}] {e}")?;
            }
        }
    }
    Ok(ok)
}

fn oracle(group: &str, subgroup: &str, rep: &str, out: &mut dyn Write) -> Result<bool> {
    let g = FiniteGroup::by_name(group)?;
    let h = g.subgroup_by_spec(subgroup)?;
    let u = catalog::rep_by_label(&g, &h, rep, default_tol())?;
    let chi = catalog::classical_induction_oracle(&g, &h, &u)?;
    let value = serde_json::json!({
        "group": group,
        "subgroup": h,
        "rep": rep,
        "dim": g.order() / h.len() * u.dim,
        "character": complex_pairs(&chi),
    });
    writeln!(out, "{}", serde_json::to_string(&value)?)?;
    Ok(true)
}

/// Runs the CLI on `argv`, writing to `out`; returns the process exit code.
pub fn run_cli<I, T>(argv: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = write!(out, "{e}");
            return code;
        }
    };
    if cli.sequential {
        par::set_enabled(false);
    }
    let res = match &cli.command {
        Command::Induce { spec, report, tol, seed } => induce(spec, report, *tol, *seed, out),
        Command::Verify { spec, suite, tol, seed, verbose } => verify(spec, *suite, *tol, *seed, *verbose, out),
        Command::Oracle { group, subgroup, rep } => oracle(group, subgroup, rep, out),
        Command::Catalog { what: CatalogCommand::List } => (|| {
            for line in catalog::catalog_listing() {
                writeln!(out, "{line}")?;
            }
            Ok(true)
        })(),
    };
    match res {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            let _ = writeln!(out, "error: {e}");
            1
        }
    }
}
