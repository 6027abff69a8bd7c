use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::engine::RegimeMode;
use crate::kernels::KernelSpec;
use crate::metrics::MIN_EPSILON;

use super::{CliError, OUT_DIR_ENV};

/// Flat settings, keyed by long flag name.
pub type Settings = BTreeMap<String, String>;

const KEYS: [&str; 15] = [
    "family", "beta", "m", "delta", "shift", "K", "eps", "t", "tol", "dim", "count", "seed", "out",
    "which", "mode",
];

/// Reads `key = value` lines; blank lines and `#` comments are skipped.
pub fn load_config_file(path: &Path) -> Result<Settings, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let mut s = Settings::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| {
            CliError::Config(format!("{}:{}: expected key=value", path.display(), n + 1))
        })?;
        s.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(s)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Tabulate,
    Validate,
    MinK,
    Cost,
    Observable,
    Unstable,
    Figures,
}

impl FromStr for Command {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        Ok(match s {
            "tabulate" => Command::Tabulate,
            "validate" => Command::Validate,
            "min-k" => Command::MinK,
            "cost" => Command::Cost,
            "observable" => Command::Observable,
            "unstable" => Command::Unstable,
            "figures" => Command::Figures,
            other => return Err(CliError::Config(format!("unknown command `{other}`"))),
        })
    }
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Tabulate => "tabulate",
            Command::Validate => "validate",
            Command::MinK => "min-k",
            Command::Cost => "cost",
            Command::Observable => "observable",
            Command::Unstable => "unstable",
            Command::Figures => "figures",
        }
    }

    fn default_cutoff(&self) -> f64 {
        match self {
            Command::Tabulate => 50.0,
            Command::Unstable => 80.0,
            Command::Cost => 40.0,
            _ => 60.0,
        }
    }
}

/// Fully resolved and validated run parameters.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: Command,
    pub spec: KernelSpec,
    pub cutoff: f64,
    /// True when `K` was given rather than defaulted.
    pub cutoff_given: bool,
    pub eps: Vec<f64>,
    /// True when `eps` was given rather than defaulted.
    pub eps_given: bool,
    pub t: f64,
    pub tol: f64,
    pub dim: usize,
    pub count: usize,
    pub seed: u64,
    pub out: PathBuf,
    pub which: Option<u8>,
    pub mode: RegimeMode,
    /// Every setting after defaults, for the output headers.
    pub settings: Settings,
}

fn parse<T: FromStr>(s: &Settings, key: &str, default: T) -> Result<T, CliError> {
    match s.get(key) {
        None => Ok(default),
        Some(v) => v
            .parse()
            .map_err(|_| CliError::Config(format!("cannot parse {key}=`{v}`"))),
    }
}

fn positive(key: &str, v: f64) -> Result<f64, CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::Config(format!("{key}={v} must be positive")))
    }
}

impl RunConfig {
    /// Merges `file` under `flags` and validates the result.
    pub fn resolve(command: &str, file: Settings, flags: Settings) -> Result<Self, CliError> {
        let command: Command = command.parse()?;
        let mut s = file;
        s.extend(flags);
        if let Some(bad) = s.keys().find(|k| !KEYS.contains(&k.as_str())) {
            return Err(CliError::Config(format!("unknown setting `{bad}`")));
        }

        let family = s.get("family").cloned().unwrap_or_else(|| "glue".into());
        let tol: f64 = positive("tol", parse(&s, "tol", 1e-10)?)?;
        let eval_tol = (0.01 * tol).clamp(1e-13, 1e-12);
        let spec = match family.as_str() {
            "beta" => KernelSpec::beta(parse(&s, "beta", 0.8)?),
            "glue" => KernelSpec::glue(
                parse(&s, "m", 2)?,
                parse(&s, "delta", 4.0)?,
                parse(&s, "shift", 0.0)?,
            ),
            other => return Err(CliError::Config(format!("unknown family `{other}`"))),
        }
        .and_then(|k| k.with_tol(eval_tol))
        .map_err(|e| CliError::Config(e.to_string()))?;

        let cutoff_given = s.contains_key("K");
        let cutoff = positive("K", parse(&s, "K", command.default_cutoff())?)?;
        let eps_given = s.contains_key("eps");
        let eps = match s.get("eps") {
            None => vec![1e-8],
            Some(list) => list
                .split(',')
                .map(|x| {
                    x.trim()
                        .parse::<f64>()
                        .map_err(|_| CliError::Config(format!("cannot parse eps entry `{x}`")))
                })
                .collect::<Result<Vec<_>, _>>()?,
        };
        if eps.is_empty() || eps.iter().any(|e| !(*e >= MIN_EPSILON && *e < 1.0)) {
            return Err(CliError::Config(format!(
                "eps entries must lie in [{MIN_EPSILON:e}, 1)"
            )));
        }
        let t: f64 = parse(&s, "t", 1.0)?;
        if !(t > 0.0 && t.is_finite()) {
            return Err(CliError::Config(format!("t={t} must be positive")));
        }
        let dim: usize = parse(&s, "dim", 4)?;
        let count: usize = parse(
            &s,
            "count",
            if command == Command::Tabulate {
                101
            } else {
                20
            },
        )?;
        if dim == 0 || count == 0 {
            return Err(CliError::Config("dim and count must be >= 1".into()));
        }
        if command == Command::Tabulate && count < 2 {
            return Err(CliError::Config("tabulate needs count >= 2 nodes".into()));
        }
        let seed: u64 = parse(&s, "seed", 1)?;
        let which = match s.get("which") {
            None => None,
            Some(w) => match w.as_str() {
                "1" => Some(1),
                "2" => Some(2),
                "3" => Some(3),
                other => return Err(CliError::Config(format!("which=`{other}` not in 1|2|3"))),
            },
        };
        let mode = match s.get("mode").map(String::as_str) {
            None | Some("strict") => RegimeMode::Strict,
            Some("diagnostic") => RegimeMode::Diagnostic,
            Some(other) => return Err(CliError::Config(format!("mode=`{other}`"))),
        };
        let out = match s.get("out") {
            Some(o) => PathBuf::from(o),
            None => {
                let dir =
                    std::env::var_os(OUT_DIR_ENV).map_or_else(|| PathBuf::from("."), PathBuf::from);
                let name = match command {
                    Command::Figures => String::new(),
                    c => format!("{}.csv", c.name()),
                };
                dir.join(name)
            }
        };

        let mut settings = s;
        for (k, v) in [
            ("family", family),
            ("spec", spec.to_string()),
            ("eval_tol", format!("{eval_tol:e}")),
            ("K", cutoff.to_string()),
            (
                "eps",
                eps.iter()
                    .map(|e| format!("{e:e}"))
                    .collect::<Vec<_>>()
                    .join(","),
            ),
            ("t", t.to_string()),
            ("tol", format!("{tol:e}")),
            ("dim", dim.to_string()),
            ("count", count.to_string()),
            ("seed", seed.to_string()),
            ("out", out.display().to_string()),
            ("mode", format!("{mode:?}").to_lowercase()),
        ] {
            settings.insert(k.to_string(), v);
        }
        Ok(RunConfig {
            command,
            spec,
            cutoff,
            cutoff_given,
            eps,
            eps_given,
            t,
            tol,
            dim,
            count,
            seed,
            out,
            which,
            mode,
            settings,
        })
    }
}
