use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use log::info;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::engine::{
    estimate_observable, validate, validate_unstable, ValidationReport, REPORT_CSV_HEADER,
};
use crate::io::{fmt_f64, write_comments};
use crate::kernels::{tabulate_weights, weight_l1_norm, KernelSpec};
use crate::linalg::{CMat, CVec};
use crate::metrics::{
    cost_metric, min_truncation_k_multi, EnsembleKind, EnsembleSpec, MinKResult, SearchOptions,
    COST_CSV_HEADER, DEFAULT_K_CAP, MIN_K_CSV_HEADER,
};
use crate::propagators::{true_propagator, OdeProblem};

use super::{CliError, Command, RunConfig};

const FIGURE_EPS: [f64; 7] = [1e-4, 1e-5, 1e-6, 1e-7, 1e-8, 1e-9, 1e-10];
const DELTAS: [f64; 4] = [2.0, 4.0, 6.0, 8.0];

/// Executes one command, writing its CSV output(s). Returns the files written.
pub fn run(cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    info!("running {} with {}", cfg.command.name(), cfg.spec);
    match cfg.command {
        Command::Tabulate => tabulate(cfg),
        Command::Validate => validate_cmd(cfg, false),
        Command::Unstable => validate_cmd(cfg, true),
        Command::MinK => min_k(cfg),
        Command::Cost => cost(cfg),
        Command::Observable => observable(cfg),
        Command::Figures => figures(cfg),
    }
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    Ok(BufWriter::new(File::create(path)?))
}

/// Header comments: tool version, every setting, seeds, and a timestamp.
fn header<W: Write>(
    w: &mut W,
    cfg: &RunConfig,
    seeds: &[u64],
    extra: &[(&str, String)],
) -> Result<(), CliError> {
    let mut entries = vec![
        (
            "tool".to_string(),
            format!("lchs {}", env!("CARGO_PKG_VERSION")),
        ),
        ("command".to_string(), cfg.command.name().to_string()),
    ];
    entries.extend(cfg.settings.iter().map(|(k, v)| (k.clone(), v.clone())));
    let seeds: Vec<String> = seeds.iter().map(u64::to_string).collect();
    entries.push(("seeds".to_string(), seeds.join(" ")));
    entries.extend(extra.iter().map(|(k, v)| (k.to_string(), v.clone())));
    let now = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_secs());
    entries.push(("generated_unix".to_string(), now.to_string()));
    write_comments(w, &entries)?;
    Ok(())
}

fn stable_problems(cfg: &RunConfig) -> Result<(Vec<OdeProblem>, Vec<u64>), CliError> {
    if cfg.dim == 1 {
        return Ok((
            vec![OdeProblem::scalar(Complex64::new(1.0, 0.0))],
            Vec::new(),
        ));
    }
    let ens = EnsembleSpec::stable(cfg.dim, cfg.count, cfg.seed);
    let problems = ens.problems().map_err(CliError::compute("ensemble"))?;
    Ok((problems, vec![cfg.seed]))
}

fn tabulate(cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    let n = cfg.count;
    let nodes: Vec<f64> = (0..n)
        .map(|i| {
            let j = i as f64 - (n - 1) as f64 / 2.0;
            cfg.cutoff * j / ((n - 1) as f64 / 2.0)
        })
        .collect();
    let table = tabulate_weights(&cfg.spec, &nodes).map_err(CliError::compute("tabulate"))?;
    let mut w = create(&cfg.out)?;
    let residual = table.hermitian_residual().map(fmt_f64).unwrap_or_default();
    header(&mut w, cfg, &[], &[("hermitian_residual", residual)])?;
    table.write_csv(&mut w)?;
    w.flush()?;
    Ok(vec![cfg.out.clone()])
}

fn validate_cmd(cfg: &RunConfig, unstable: bool) -> Result<Vec<PathBuf>, CliError> {
    let (problems, seeds) = if unstable {
        if cfg.dim == 1 {
            (
                vec![OdeProblem::scalar(Complex64::new(-1.0, 0.0))],
                Vec::new(),
            )
        } else {
            let ens = EnsembleSpec {
                kind: EnsembleKind::Shifted(1.0),
                ..EnsembleSpec::stable(cfg.dim, cfg.count, cfg.seed)
            };
            let problems = ens.problems().map_err(CliError::compute("ensemble"))?;
            (problems, vec![cfg.seed])
        }
    } else {
        stable_problems(cfg)?
    };
    let stage = if unstable { "unstable" } else { "validate" };
    let mut reports: Vec<ValidationReport> = Vec::with_capacity(problems.len());
    for p in &problems {
        let r = if unstable {
            validate_unstable(p, &cfg.spec, cfg.t, cfg.cutoff, cfg.tol, cfg.mode)
        } else {
            validate(p, &cfg.spec, cfg.cutoff, cfg.t, cfg.tol, &seeds)
        }
        .map_err(CliError::compute(stage))?;
        let mut r = r;
        r.seeds = seeds.clone();
        reports.push(r);
    }
    let mut w = create(&cfg.out)?;
    header(&mut w, cfg, &seeds, &[])?;
    writeln!(w, "index,{REPORT_CSV_HEADER}")?;
    for (i, r) in reports.iter().enumerate() {
        writeln!(w, "{i},{}", r.csv_row())?;
    }
    w.flush()?;
    for (i, r) in reports.iter().enumerate() {
        println!("problem {i}");
        print!("{r}");
    }
    let worst = reports.iter().map(|r| r.recon_error).fold(0.0, f64::max);
    println!(
        "max recon error {worst:.6e} over {} problem(s)",
        reports.len()
    );
    Ok(vec![cfg.out.clone()])
}

fn write_min_k_row<W: Write>(w: &mut W, r: &MinKResult) -> std::io::Result<()> {
    writeln!(
        w,
        "{},{},{},{}",
        fmt_f64(r.epsilon),
        fmt_f64(r.k_min),
        r.spec.family_name(),
        r.spec.param_fields()
    )
}

fn min_k(cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    let (problems, seeds) = stable_problems(cfg)?;
    // An explicit K is the search cap.
    let options = SearchOptions {
        k_cap: if cfg.cutoff_given {
            cfg.cutoff
        } else {
            DEFAULT_K_CAP
        },
        ..SearchOptions::default()
    };
    let results = min_truncation_k_multi(&cfg.spec, &cfg.eps, &problems, cfg.t, options)
        .map_err(CliError::compute("min-k"))?;
    let mut w = create(&cfg.out)?;
    header(&mut w, cfg, &seeds, &[])?;
    writeln!(w, "{MIN_K_CSV_HEADER}")?;
    for r in &results {
        write_min_k_row(&mut w, r)?;
        println!(
            "eps {:.1e}  K_min {:.4}  error {:.3e}  resolution {:.3}",
            r.epsilon,
            r.k_min,
            r.error_at_min(),
            r.grid_resolution
        );
    }
    w.flush()?;
    Ok(vec![cfg.out.clone()])
}

fn cost_row<W: Write>(w: &mut W, spec: &KernelSpec, cutoff: f64) -> Result<f64, CliError> {
    let l1 = weight_l1_norm(spec, cutoff).map_err(CliError::compute("cost"))?;
    let metric = cutoff * l1;
    writeln!(
        w,
        "{},{},{},{},{}",
        fmt_f64(cutoff),
        fmt_f64(l1),
        fmt_f64(metric),
        spec.family_name(),
        spec.param_fields()
    )?;
    Ok(metric)
}

/// Cost at the given `K`, or at the minimum `K` of each target when `eps` is
/// set and `K` is not.
fn cost(cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    let use_eps = cfg.eps_given && !cfg.cutoff_given;
    let (cutoffs, seeds) = if use_eps {
        let (problems, seeds) = stable_problems(cfg)?;
        let r = min_truncation_k_multi(
            &cfg.spec,
            &cfg.eps,
            &problems,
            cfg.t,
            SearchOptions::default(),
        )
        .map_err(CliError::compute("min-k"))?;
        (r.iter().map(|r| r.k_min).collect(), seeds)
    } else {
        (vec![cfg.cutoff], Vec::new())
    };
    let mut w = create(&cfg.out)?;
    header(&mut w, cfg, &seeds, &[])?;
    writeln!(w, "{COST_CSV_HEADER}")?;
    for k in cutoffs {
        let m = cost_row(&mut w, &cfg.spec, k)?;
        println!("K {k:.4}  metric {m:.10}");
    }
    w.flush()?;
    Ok(vec![cfg.out.clone()])
}

/// Probe state and observable for problem `index`, from stream
/// `2^32 + index` of the run seed (disjoint from the ensemble streams).
fn observable_inputs(dim: usize, seed: u64, index: usize) -> (CVec, CMat) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((1u64 << 32) + index as u64);
    let mut normal = || -> Complex64 {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re, im)
    };
    let mut u0 = CVec::from_fn(dim, |_, _| normal());
    u0 /= Complex64::new(u0.norm(), 0.0);
    let g = CMat::from_fn(dim, dim, |_, _| normal());
    let o = (&g + g.adjoint()) * Complex64::new(0.5, 0.0);
    (u0, o)
}

fn observable(cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    let (problems, seeds) = stable_problems(cfg)?;
    let mut w = create(&cfg.out)?;
    header(&mut w, cfg, &seeds, &[])?;
    writeln!(w, "index,estimate,exact,abs_error")?;
    for (i, p) in problems.iter().enumerate() {
        let (u0, o) = if cfg.dim == 1 {
            (
                CVec::from_element(1, Complex64::new(1.0, 0.0)),
                CMat::identity(1, 1),
            )
        } else {
            observable_inputs(cfg.dim, cfg.seed, i)
        };
        let est = estimate_observable(p, &cfg.spec, cfg.cutoff, cfg.t, &u0, &o, cfg.tol)
            .map_err(CliError::compute("observable"))?;
        let u = true_propagator(p, cfg.t, 0.1 * cfg.tol)
            .map_err(CliError::compute("observable"))?
            .matrix
            * &u0;
        let exact = u.dotc(&(&o * &u)).re;
        writeln!(
            w,
            "{i},{},{},{}",
            fmt_f64(est),
            fmt_f64(exact),
            fmt_f64((est - exact).abs())
        )?;
        println!("problem {i}: estimate {est:.12e}  exact {exact:.12e}");
    }
    w.flush()?;
    Ok(vec![cfg.out.clone()])
}

fn figure_dir(cfg: &RunConfig) -> PathBuf {
    if cfg.out.extension().is_some() {
        cfg.out.with_extension("")
    } else {
        cfg.out.clone()
    }
}

fn glue(m: u32, delta: f64, tol: f64) -> KernelSpec {
    KernelSpec::glue(m, delta, 0.0)
        .and_then(|s| s.with_tol(tol))
        .expect("figure specs are valid")
}

fn beta(b: f64, tol: f64) -> KernelSpec {
    KernelSpec::beta(b)
        .and_then(|s| s.with_tol(tol))
        .expect("figure specs are valid")
}

fn figures(cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    let dir = figure_dir(cfg);
    let tol = cfg.spec.eval_tol;
    let eps: Vec<f64> = if cfg.eps_given {
        cfg.eps.clone()
    } else {
        FIGURE_EPS.to_vec()
    };
    let mut written = Vec::new();
    let which: Vec<u8> = cfg.which.map_or(vec![1, 2, 3], |w| vec![w]);

    if which.contains(&1) {
        let path = dir.join("figure1.csv");
        let mut w = create(&path)?;
        header(
            &mut w,
            cfg,
            &[],
            &[("grid", "k = 0, 0.25, ..., 100".into())],
        )?;
        writeln!(w, "family,beta,m,delta,a,k,abs_g")?;
        let mut specs: Vec<KernelSpec> = DELTAS.iter().map(|&d| glue(2, d, tol)).collect();
        specs.extend((1..=9).map(|i| beta(i as f64 / 10.0, tol)));
        let nodes: Vec<f64> = (0..=400).map(|i| i as f64 * 0.25).collect();
        for spec in &specs {
            let table = tabulate_weights(spec, &nodes).map_err(CliError::compute("figure 1"))?;
            for (k, g) in table.nodes().iter().zip(table.values()) {
                writeln!(
                    w,
                    "{},{},{},{}",
                    spec.family_name(),
                    spec.param_fields(),
                    fmt_f64(*k),
                    fmt_f64(g.norm())
                )?;
            }
        }
        w.flush()?;
        written.push(path);
    }

    let mut cache: BTreeMap<String, Vec<MinKResult>> = BTreeMap::new();
    let (problems, seeds) = if which.contains(&2) || which.contains(&3) {
        let ens = EnsembleSpec::stable(cfg.dim, cfg.count, cfg.seed);
        (
            ens.problems().map_err(CliError::compute("ensemble"))?,
            vec![cfg.seed],
        )
    } else {
        (Vec::new(), Vec::new())
    };
    let mut min_k_for = |spec: &KernelSpec| -> Result<Vec<MinKResult>, CliError> {
        let key = spec.to_string();
        if let Some(r) = cache.get(&key) {
            return Ok(r.clone());
        }
        info!("minimum K for {spec}");
        let r = min_truncation_k_multi(spec, &eps, &problems, cfg.t, SearchOptions::default())
            .map_err(CliError::compute("minimum K"))?;
        cache.insert(key, r.clone());
        Ok(r)
    };

    let betas = [beta(0.7, tol), beta(0.8, tol)];
    if which.contains(&2) {
        let path = dir.join("figure2.csv");
        let mut specs: Vec<KernelSpec> = Vec::new();
        for m in 1..=3 {
            specs.extend(DELTAS.iter().map(|&d| glue(m, d, tol)));
        }
        specs.extend(betas);
        let mut rows = Vec::new();
        for spec in &specs {
            rows.extend(min_k_for(spec)?);
        }
        let mut w = create(&path)?;
        header(&mut w, cfg, &seeds, &[])?;
        writeln!(w, "{MIN_K_CSV_HEADER}")?;
        for r in &rows {
            write_min_k_row(&mut w, r)?;
        }
        w.flush()?;
        written.push(path);
        if let Some(i) = eps.iter().position(|&e| e == 1e-8) {
            let best = DELTAS
                .iter()
                .map(|&d| min_k_for(&glue(2, d, tol)).map(|r| r[i].k_min))
                .collect::<Result<Vec<_>, _>>()?
                .into_iter()
                .fold(f64::INFINITY, f64::min);
            for (b, published) in [(0.7, 9.71), (0.8, 8.27)] {
                let kb = min_k_for(&beta(b, tol))?[i].k_min;
                println!(
                    "K_min(beta={b}) / K_min(glue m=2, best delta) at eps=1e-8: {:.3} (published {published})",
                    kb / best
                );
            }
        }
    }

    if which.contains(&3) {
        let path = dir.join("figure3.csv");
        let mut specs: Vec<KernelSpec> = Vec::new();
        for m in 1..=2 {
            specs.extend(DELTAS.iter().map(|&d| glue(m, d, tol)));
        }
        specs.extend(betas);
        let mut w = create(&path)?;
        header(&mut w, cfg, &seeds, &[])?;
        writeln!(w, "epsilon,K_min,l1,metric,family,beta,m,delta,a")?;
        let mut at_1e8: BTreeMap<String, f64> = BTreeMap::new();
        for spec in &specs {
            for r in min_k_for(spec)? {
                let metric = cost_metric(spec, r.k_min).map_err(CliError::compute("figure 3"))?;
                writeln!(
                    w,
                    "{},{},{},{},{},{}",
                    fmt_f64(r.epsilon),
                    fmt_f64(r.k_min),
                    fmt_f64(metric / r.k_min),
                    fmt_f64(metric),
                    spec.family_name(),
                    spec.param_fields()
                )?;
                if r.epsilon == 1e-8 {
                    at_1e8.insert(spec.to_string(), metric);
                }
            }
        }
        w.flush()?;
        written.push(path);
        if let Some(reference) = at_1e8.get(&glue(1, 2.0, tol).to_string()) {
            for (b, published) in [(0.7, 1.93), (0.8, 1.81)] {
                if let Some(mb) = at_1e8.get(&beta(b, tol).to_string()) {
                    println!(
                        "cost(beta={b}) / cost(glue m=1, delta=2) at eps=1e-8: {:.3} (published {published})",
                        mb / reference
                    );
                }
            }
        }
    }
    Ok(written)
}
