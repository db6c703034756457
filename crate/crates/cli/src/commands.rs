//! The five commands, each a thin orchestration of library calls ending in
//! plot-ready files. Shared policy:
//!
//! * every command is a pure function of its config file (plus the `--out`
//!   and `--seed` overrides), so artifacts are reproducible byte for byte;
//! * CSV and JSON renderings are gated by `output.formats`; the budget's
//!   aligned text table is always written (and echoed to stdout), since it
//!   is the command's human-readable face;
//! * every emitted number carries full `f64` precision (17 significant
//!   digits) — downstream plotting decides about rounding, not this tool.

use std::fs;
use std::path::{Path, PathBuf};

use prolate_squeeze::budget::budget;
use prolate_squeeze::homodyne::{empirical_covariance, sample};
use prolate_squeeze::serialize::{fmt17, fmt17_array};
use prolate_squeeze::squeeze::{full_covariance, squeezing_report, SqueezingProfile};
use prolate_squeeze::verify;

use crate::config::{Format, RunConfig};
use crate::error::{CliError, CliResult};

/// One resolved command invocation: the parsed config plus the directories
/// and seed the command actually uses after applying the flag overrides.
pub struct Invocation {
    pub config: RunConfig,
    /// Directory of the config file; anchors relative profile-table paths.
    pub config_dir: PathBuf,
    /// Where artifacts go: `--out` when given, else `output.directory`.
    pub out_dir: PathBuf,
    /// `--seed` when given, else `mc.seed`.
    pub seed: u64,
}

impl Invocation {
    pub fn new(config_path: &Path, out: Option<&Path>, seed: Option<u64>) -> CliResult<Self> {
        let (config, config_dir) = RunConfig::load(config_path)?;
        let out_dir = match out {
            Some(dir) => dir.to_path_buf(),
            None => PathBuf::from(&config.output.directory),
        };
        let seed = seed.unwrap_or(config.mc.seed);
        Ok(Invocation {
            config,
            config_dir,
            out_dir,
            seed,
        })
    }

    fn profile(&self) -> CliResult<SqueezingProfile> {
        self.config.resolve_profile(&self.config_dir)
    }

    /// Write one artifact into the output directory (created on demand).
    fn write(&self, name: &str, contents: &str) -> CliResult<()> {
        fs::create_dir_all(&self.out_dir).map_err(|e| CliError::io(&self.out_dir, e))?;
        let path = self.out_dir.join(name);
        fs::write(&path, contents).map_err(|e| CliError::io(&path, e))?;
        println!("wrote {}", path.display());
        Ok(())
    }
}

/// Half-extent of the mode-curve sampling grid written by `basis`: the core
/// is |s| ≤ 1, so ±2 shows one core width of wing on either side.
const CURVE_EXTENT: f64 = 2.0;
/// Sampling step of the mode-curve grid, in core units.
const CURVE_STEP: f64 = 1.0 / 64.0;

/// `basis`: build the prolate basis of the configured system and export its
/// spectrum (`lambdas.csv`), sampled image-plane modes (`modes.csv`), and a
/// JSON summary (`basis.json`).
pub fn cmd_basis(inv: &Invocation) -> CliResult<()> {
    let basis = inv.config.build_basis()?;
    if inv.config.wants(Format::Csv) {
        let mut lambdas = String::from("k,lambda\n");
        for k in 0..basis.k_count() {
            lambdas.push_str(&format!("{k},{}\n", fmt17(basis.lambda(k))));
        }
        inv.write("lambdas.csv", &lambdas)?;

        let mut curves = String::from("s");
        for k in 0..basis.k_count() {
            curves.push_str(&format!(",psi_{k}"));
        }
        curves.push('\n');
        let steps = (2.0 * CURVE_EXTENT / CURVE_STEP).round() as usize;
        for i in 0..=steps {
            let s = -CURVE_EXTENT + i as f64 * CURVE_STEP;
            curves.push_str(&fmt17(s));
            for k in 0..basis.k_count() {
                curves.push(',');
                curves.push_str(&fmt17(basis.eval_psi(k, s)?));
            }
            curves.push('\n');
        }
        inv.write("modes.csv", &curves)?;
    }
    if inv.config.wants(Format::Json) {
        let lambdas: Vec<f64> = (0..basis.k_count()).map(|k| basis.lambda(k)).collect();
        let doc = format!(
            "{{\"c\":{},\"shannon\":{},\"k\":{},\"m\":{},\"lambda\":{}}}",
            fmt17(basis.c()),
            fmt17(basis.band().shannon_number()),
            basis.k_count(),
            inv.config.basis.m,
            fmt17_array(&lambdas)
        );
        inv.write("basis.json", &doc)?;
    }
    Ok(())
}

/// `variances`: quadrature noise of every carried mode under the configured
/// profile — `variances.csv` has one row per mode with the two quadrature
/// variances and the principal-axis squeezing in dB.
pub fn cmd_variances(inv: &Invocation) -> CliResult<()> {
    let basis = inv.config.build_basis()?;
    let profile = inv.profile()?;
    let cov = full_covariance(&basis, &profile)?;
    let modes = squeezing_report(&cov);
    if inv.config.wants(Format::Csv) {
        let mut table = String::from("k,parity,var1,var2,min_db\n");
        for mode in &modes {
            let (var1, var2) = cov.variance_pair(mode.k);
            table.push_str(&format!(
                "{},{},{},{},{}\n",
                mode.k,
                parity_name(mode.k),
                fmt17(var1),
                fmt17(var2),
                fmt17(mode.squeezing_db)
            ));
        }
        inv.write("variances.csv", &table)?;
    }
    if inv.config.wants(Format::Json) {
        let rows: Vec<String> = modes
            .iter()
            .map(|mode| {
                let (var1, var2) = cov.variance_pair(mode.k);
                format!(
                    "{{\"k\":{},\"parity\":\"{}\",\"var1\":{},\"var2\":{},\
                     \"angle\":{},\"min_variance\":{},\"max_variance\":{},\
                     \"squeezing_db\":{},\"squeezed\":{}}}",
                    mode.k,
                    parity_name(mode.k),
                    fmt17(var1),
                    fmt17(var2),
                    fmt17(mode.angle),
                    fmt17(mode.min_variance),
                    fmt17(mode.max_variance),
                    fmt17(mode.squeezing_db),
                    mode.squeezed
                )
            })
            .collect();
        inv.write("variances.json", &format!("[{}]", rows.join(",")))?;
    }
    Ok(())
}

fn parity_name(k: usize) -> &'static str {
    if k % 2 == 0 {
        "even"
    } else {
        "odd"
    }
}

/// `budget`: the N-versus-S mode-budget verdict for the configured system
/// and profile — `budget.json` plus an aligned text table (`budget.txt`,
/// also echoed to stdout).
pub fn cmd_budget(inv: &Invocation) -> CliResult<()> {
    let cfg = inv.config.imaging()?;
    let profile = inv.profile()?;
    let report = budget(&cfg, &profile)?;
    if inv.config.wants(Format::Json) {
        inv.write("budget.json", &report.to_json())?;
    }
    let table = report.to_text();
    inv.write("budget.txt", &table)?;
    print!("{table}");
    Ok(())
}

/// `simulate`: draw the configured number of homodyne shots from the
/// squeezed state and export the raw batch (`samples.csv`), its seed/state
/// sidecar (`samples.json`), and the empirical-versus-analytic covariance
/// comparison (`empirical_vs_analytic.csv`).
pub fn cmd_simulate(inv: &Invocation) -> CliResult<()> {
    let basis = inv.config.build_basis()?;
    let profile = inv.profile()?;
    let cov = full_covariance(&basis, &profile)?;
    let batch = sample(&cov, None, inv.config.mc.n, inv.seed)?;
    if inv.config.wants(Format::Csv) {
        inv.write("samples.csv", &batch.to_csv())?;
        let empirical = empirical_covariance(&batch)?;
        let mut table = String::from("i,j,analytic,empirical,standard_error,z\n");
        for i in 0..cov.k_count() * 2 {
            // the matrices are symmetric: the upper triangle carries it all
            for j in i..cov.k_count() * 2 {
                let analytic = cov.entry(i, j);
                let measured = empirical.cov[i][j];
                let se = empirical.standard_errors[i][j];
                let z = if se > 0.0 { (measured - analytic) / se } else { 0.0 };
                table.push_str(&format!(
                    "{i},{j},{},{},{},{}\n",
                    fmt17(analytic),
                    fmt17(measured),
                    fmt17(se),
                    fmt17(z)
                ));
            }
        }
        inv.write("empirical_vs_analytic.csv", &table)?;
    }
    if inv.config.wants(Format::Json) {
        inv.write("samples.json", &batch.sidecar_json(&cov)?)?;
    }
    Ok(())
}

/// `verify`: run the library's self-check registry and report one line per
/// check. The registry pins its own reference inputs so the checks mean the
/// same thing everywhere; the config contributes only the seed (which any
/// passing seed must survive). Returns whether every check passed.
pub fn cmd_verify(inv: &Invocation) -> CliResult<bool> {
    let reports = verify::run_all(inv.seed)?;
    let mut failures = 0usize;
    for report in &reports {
        println!("{}", report.line());
        if !report.passed {
            failures += 1;
        }
    }
    println!(
        "verify: {} checks, {failures} failed (seed {})",
        reports.len(),
        inv.seed
    );
    Ok(failures == 0)
}
