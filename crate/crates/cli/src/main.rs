//! `kdim`: command-line front end for kdim-core.
//!
//! Exit codes: 0 success, 2 validation error, 3 search found nothing,
//! 4 insufficient precision.

mod config;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use kdim_core::gevrey::{check_power_bound, make_gevrey_family, validate_growth};
use kdim_core::kdim::{entropy_rows, estimate_psi, EpsSchedule};
use kdim_core::metric_entropy::EntropyReport;
use kdim_core::polynomials::Polydisk;
use kdim_core::smallpoly::{SearchConfig, SearchOutcome};
use kdim_core::witness::{build_witness, cheb_lower_oracle, required_grid};
use kdim_core::Complex64;
use serde_json::{json, Value};

use config::{parse_config, read_json, EntropyConfig, GevreyConfig, KdimConfig, ManifestInputs, SmallpolyConfig, WitnessConfig};
use output::{sha256_hex, to_canonical_json, with_digest, write_file, Manifest};

#[derive(Parser, Debug)]
#[command(name = "kdim", version, about = "Entropy dimension, small integer polynomials and witness sets")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct Common {
    /// Config document, or a manifest from an earlier run.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "kdim-out")]
    out: PathBuf,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long = "precision-bits", global = true)]
    precision_bits: Option<u64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Two-sided entropy bounds at explicit scales.
    Entropy,
    /// Ψ fit over a schedule of scales.
    Kdim,
    /// Search for an integer polynomial exponentially small on a cloud.
    Smallpoly,
    /// Witness sets: build a packing or check the lower-bound oracle.
    Witness {
        #[command(subcommand)]
        action: WitnessAction,
    },
    /// Gevrey calibration and power-bound check.
    Gevrey,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum WitnessAction {
    Build,
    Check,
}

/// Resolved settings of one run.
struct Run {
    command: String,
    base: PathBuf,
    doc: Value,
    seed: u64,
    precision_bits: Option<u64>,
    threads: usize,
    out: PathBuf,
}

impl Run {
    fn new(command: &str, common: &Common) -> Result<Self> {
        let path = common.config.as_ref().context("--config is required")?;
        let doc = read_json(path)?;
        Ok(Run {
            command: command.into(),
            base: path.parent().map(Path::to_path_buf).unwrap_or_default(),
            doc,
            seed: common.seed.unwrap_or(0),
            precision_bits: common.precision_bits,
            threads: common
                .threads
                .unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1))
                .max(1),
            out: common.out.clone(),
        })
    }

    /// Fills seed and precision from a manifest unless given on the command line.
    fn adopt(&mut self, common: &Common, inputs: Option<ManifestInputs>) {
        if let Some(m) = inputs {
            if common.seed.is_none() {
                self.seed = m.seed.unwrap_or(0);
            }
            if common.precision_bits.is_none() {
                self.precision_bits = m.precision_bits;
            }
        }
    }

    /// Parameters recorded in the manifest: the config with the cloud inlined.
    fn parameters(&self, cloud: Option<&Value>) -> Value {
        let mut p = self.doc.get("parameters").cloned().unwrap_or_else(|| self.doc.clone());
        if let (Some(c), Some(map)) = (cloud, p.as_object_mut()) {
            map.insert("cloud".into(), c.clone());
        }
        p
    }

    fn manifest(&self, parameters: Value, inputs: Value, outputs: &[&str]) -> Manifest {
        Manifest {
            command: self.command.clone(),
            seed: self.seed,
            precision_bits: self.precision_bits,
            parameters,
            input_digests: inputs,
            outputs: outputs.iter().map(|s| s.to_string()).collect(),
            threads: self.threads,
        }
    }

    fn finish(&self, manifest: &Manifest, started: Instant, reports: &[(&str, String)]) -> Result<()> {
        for (name, body) in reports {
            write_file(&self.out, name, body)?;
        }
        let m = manifest.to_json(started.elapsed().as_secs_f64());
        write_file(&self.out, "manifest.json", &to_canonical_json(&m))?;
        println!("{}: wrote {} (digest {})", self.command, self.out.display(), manifest.digest());
        Ok(())
    }
}

fn cloud_digest(doc: &Value) -> Value {
    json!({ "cloud": sha256_hex(to_canonical_json(doc).as_bytes()) })
}

fn csv(digest: &str, rows: &[EntropyReport]) -> String {
    let mut s = format!("# manifest_digest={digest}\n{}\n", EntropyReport::csv_header());
    for r in rows {
        s.push_str(&r.csv_row());
        s.push('\n');
    }
    s
}

fn entropy(common: &Common) -> Result<ExitCode> {
    let started = Instant::now();
    let mut run = Run::new("entropy", common)?;
    let (cfg, inputs): (EntropyConfig, _) = parse_config(&run.doc, "entropy")?;
    run.adopt(common, inputs);
    let (x, _) = cfg.cloud.load(&run.base)?;
    let cloud = x.to_json();
    if cfg.eps.is_empty() {
        bail!("eps must list at least one scale");
    }
    let sched = EpsSchedule { eps: cfg.eps.clone(), samples: cfg.samples, seed: run.seed };
    let rows = entropy_rows(&x, &sched)?;
    let manifest = run.manifest(run.parameters(Some(&cloud)), cloud_digest(&cloud), &["entropy.json", "entropy.csv"]);
    let d = manifest.digest();
    let report = with_digest(&d, json!({ "rows": rows }));
    run.finish(&manifest, started, &[("entropy.json", to_canonical_json(&report)), ("entropy.csv", csv(&d, &rows))])?;
    Ok(ExitCode::SUCCESS)
}

fn kdim(common: &Common) -> Result<ExitCode> {
    let started = Instant::now();
    let mut run = Run::new("kdim", common)?;
    let (cfg, inputs): (KdimConfig, _) = parse_config(&run.doc, "kdim")?;
    run.adopt(common, inputs);
    let (x, _) = cfg.cloud.load(&run.base)?;
    let cloud = x.to_json();
    let sched = cfg.schedule.build(run.seed)?;
    let est = estimate_psi(&x, &sched)?;
    let manifest = run.manifest(run.parameters(Some(&cloud)), cloud_digest(&cloud), &["psi.json", "psi.csv"]);
    let d = manifest.digest();
    let report = with_digest(&d, serde_json::to_value(&est)?);
    run.finish(&manifest, started, &[("psi.json", to_canonical_json(&report)), ("psi.csv", csv(&d, &est.rows))])?;
    println!("psi_upper = {:.6}, psi_lower = {:.6}", est.psi_upper, est.psi_lower);
    Ok(ExitCode::SUCCESS)
}

fn complex_pairs(v: &[f64]) -> Result<Vec<Complex64>> {
    if v.len() % 2 != 0 {
        bail!("complex coordinates must come in (re, im) pairs");
    }
    Ok(v.chunks(2).map(|c| Complex64::new(c[0], c[1])).collect())
}

fn smallpoly(common: &Common) -> Result<ExitCode> {
    let started = Instant::now();
    let mut run = Run::new("smallpoly", common)?;
    let (cfg, inputs): (SmallpolyConfig, _) = parse_config(&run.doc, "smallpoly")?;
    run.adopt(common, inputs);
    let (x, _) = cfg.cloud.load(&run.base)?;
    let cloud = x.to_json();
    let mut search = SearchConfig::new(cfg.strategy, cfg.degree, cfg.h);
    search.coeff_bound = cfg.coeff_bound;
    search.max_candidates = cfg.max_candidates;
    search.maximize_decay = cfg.maximize_decay;
    search.seed = run.seed;
    search.threads = run.threads;
    if let Some(b) = run.precision_bits {
        search.precision_bits = b;
    }
    run.precision_bits = Some(search.precision_bits);
    if let Some(secs) = cfg.time_budget_secs {
        if !(secs > 0.0 && secs.is_finite()) {
            bail!("time_budget_secs must be positive");
        }
        search.time_budget = Some(Duration::from_secs_f64(secs));
    }
    search.reference = Some(match &cfg.reference {
        Some(r) => Polydisk::new(complex_pairs(&r.center)?, r.radius)?,
        None => x.enclosing().clone(),
    });
    let outcome = kdim_core::smallpoly::search_small_poly(&x, &search)?;
    let (name, body, code) = match &outcome {
        SearchOutcome::Found(cert) => {
            println!("found: N = {}, -ln sup_X = {:.6}, coeff_max = {}", cert.degree_bound, cert.decay(), cert.coeff_max);
            ("certificate.json", json!({ "found": true, "certificate": cert.to_json() }), ExitCode::SUCCESS)
        }
        SearchOutcome::NotFound(nf) => {
            println!("not found: {}", nf.diagnosis);
            ("not_found.json", json!({ "found": false, "not_found": nf }), ExitCode::from(3))
        }
    };
    let manifest = run.manifest(run.parameters(Some(&cloud)), cloud_digest(&cloud), &[name]);
    let report = with_digest(&manifest.digest(), body);
    run.finish(&manifest, started, &[(name, to_canonical_json(&report))])?;
    Ok(code)
}

fn witness(common: &Common, action: WitnessAction) -> Result<ExitCode> {
    let started = Instant::now();
    let name = match action {
        WitnessAction::Build => "witness build",
        WitnessAction::Check => "witness check",
    };
    let mut run = Run::new(name, common)?;
    let (cfg, inputs): (WitnessConfig, _) = parse_config(&run.doc, name)?;
    run.adopt(common, inputs);
    let grid = cfg.grid.unwrap_or_else(|| required_grid(cfg.r, cfg.degree.max(1)));
    let w = build_witness(cfg.r, cfg.degree, cfg.n, grid)?;
    let set = json!({
        "r": w.r,
        "degree": w.degree,
        "n": w.n,
        "eps_used": w.eps_used,
        "grid": w.grid,
        "cloud": w.points.to_json(),
    });
    let (file, body) = match action {
        WitnessAction::Build => {
            println!("built {} points at eps = {:.6e}", w.points.len(), w.eps_used);
            ("witness.json", set)
        }
        WitnessAction::Check => {
            let torus = cfg.torus_grid.unwrap_or(256 * cfg.degree.max(1) as usize);
            let rep = cheb_lower_oracle(&w.points, cfg.degree, torus)?;
            let target = 0.5 * cfg.r.powi(cfg.degree as i32);
            let margin = rep.value - target;
            println!("oracle = {:.9}, target = {:.9}, margin = {:+.9e}, certified = {}", rep.value, target, margin, rep.certified);
            ("oracle.json", json!({ "witness": set, "oracle": rep, "target": target, "margin": margin }))
        }
    };
    let manifest = run.manifest(run.parameters(None), json!({}), &[file]);
    let report = with_digest(&manifest.digest(), body);
    run.finish(&manifest, started, &[(file, to_canonical_json(&report))])?;
    Ok(ExitCode::SUCCESS)
}

fn gevrey(common: &Common) -> Result<ExitCode> {
    let started = Instant::now();
    let mut run = Run::new("gevrey", common)?;
    let (cfg, inputs): (GevreyConfig, _) = parse_config(&run.doc, "gevrey")?;
    run.adopt(common, inputs);
    let fam = make_gevrey_family(cfg.s, cfg.function.clone(), cfg.domain.clone(), cfg.max_order)?;
    let growth = if cfg.max_order >= 4 { Some(validate_growth(&fam.calibration.per_order, cfg.s)?) } else { None };
    let power = match cfg.power_k {
        Some(k) => Some(check_power_bound(&fam, k, cfg.max_order)?),
        None => None,
    };
    println!(
        "C = {:.9}, C_direct = {:.9}{}",
        fam.calibration.c,
        fam.calibration.c_direct,
        power.as_ref().map(|p| format!(", power-bound violations = {}", p.violations.len())).unwrap_or_default()
    );
    let body = json!({ "family": fam, "growth": growth, "power_bound": power });
    let manifest = run.manifest(run.parameters(None), json!({}), &["gevrey.json"]);
    let report = with_digest(&manifest.digest(), body);
    run.finish(&manifest, started, &[("gevrey.json", to_canonical_json(&report))])?;
    Ok(ExitCode::SUCCESS)
}

fn exit_code(e: &anyhow::Error) -> u8 {
    let precision = e
        .chain()
        .any(|c| matches!(c.downcast_ref::<kdim_core::Error>(), Some(kdim_core::Error::InsufficientPrecision(_))));
    if precision {
        4
    } else {
        2
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Entropy => entropy(&cli.common),
        Command::Kdim => kdim(&cli.common),
        Command::Smallpoly => smallpoly(&cli.common),
        Command::Witness { action } => witness(&cli.common, action),
        Command::Gevrey => gevrey(&cli.common),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
