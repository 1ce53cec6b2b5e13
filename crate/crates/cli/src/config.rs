//! Run configuration: a flat `key = value` file, then `QAE_*` environment
//! variables, then command-line flags, each layer overriding the last.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;

use qae_core::caps::{DEFAULT_CAP_CONSTANT, DEFAULT_COUNTING_CONSTANT};
use qae_core::cloning::DEFAULT_DIM_CAP;
use qae_core::density::default_eps_reg;
use qae_core::dyadic::Dyadic;
use qae_core::linalg::Tolerances;
use qae_core::machine::{Budget, DEFAULT_MAX_LEN_CAP};

use crate::CliError;

/// Largest matrix dimension the suites will build.
pub const MAX_DIM: usize = 256;
/// Largest step budget accepted.
pub const MAX_STEPS: u64 = 1 << 20;
/// Largest sample or trial count accepted.
pub const MAX_SAMPLES: usize = 10_000_000;

pub const ENV_PREFIX: &str = "QAE_";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Suite {
    Enumerate,
    Mu,
    Entropy,
    Tests,
    Clone,
    Caps,
    KqScenario,
}

impl Suite {
    pub const ALL: [Suite; 7] = [
        Suite::Enumerate,
        Suite::Mu,
        Suite::Entropy,
        Suite::Tests,
        Suite::Clone,
        Suite::Caps,
        Suite::KqScenario,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Enumerate => "enumerate",
            Suite::Mu => "mu",
            Suite::Entropy => "entropy",
            Suite::Tests => "tests",
            Suite::Clone => "clone",
            Suite::Caps => "caps",
            Suite::KqScenario => "kq-scenario",
        }
    }
}

impl FromStr for Suite {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s.trim())
            .ok_or_else(|| format!("unknown suite `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub dim: usize,
    pub budget: Budget,
    pub eps_reg: Dyadic,
    pub tolerances: Tolerances,
    pub seed: u64,
    /// Run in canonical order regardless of how they were listed.
    pub suites: Vec<Suite>,
    pub output_path: Option<PathBuf>,
    pub samples: usize,
    pub trials: usize,
    /// Worker threads; 0 leaves the choice to the runtime. Results do not
    /// depend on it.
    pub threads: usize,
    pub dim_cap: usize,
    pub cap_constant: f64,
    pub counting_constant: f64,
    pub kq_qubits: u32,
    pub kq_exponent_c: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            dim: 2,
            budget: Budget::new(10, 10_000),
            eps_reg: default_eps_reg(),
            tolerances: Tolerances::default(),
            seed: 0,
            suites: Vec::new(),
            output_path: None,
            samples: 1000,
            trials: 1000,
            threads: 0,
            dim_cap: DEFAULT_DIM_CAP,
            cap_constant: DEFAULT_CAP_CONSTANT,
            counting_constant: DEFAULT_COUNTING_CONSTANT,
            kq_qubits: 4,
            kq_exponent_c: 0.0,
        }
    }
}

fn parse_value<T: FromStr>(key: &str, value: &str) -> Result<T, String>
where
    T::Err: std::fmt::Display,
{
    value.trim().parse::<T>().map_err(|e| format!("bad value for `{key}`: {e}"))
}

impl RunConfig {
    /// Sets one key from its text form.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        let v = value.trim();
        match key {
            "dim" => self.dim = parse_value(key, v)?,
            "budget" => self.budget = parse_value(key, v)?,
            "eps_reg" => self.eps_reg = parse_value(key, v)?,
            "seed" => self.seed = parse_value(key, v)?,
            "suites" => {
                let mut s: Vec<Suite> = v
                    .split(',')
                    .filter(|x| !x.trim().is_empty())
                    .map(str::parse)
                    .collect::<Result<_, _>>()?;
                s.sort();
                s.dedup();
                self.suites = s;
            }
            "output" => self.output_path = (!v.is_empty()).then(|| PathBuf::from(v)),
            "samples" => self.samples = parse_value(key, v)?,
            "trials" => self.trials = parse_value(key, v)?,
            "threads" => self.threads = parse_value(key, v)?,
            "dim_cap" => self.dim_cap = parse_value(key, v)?,
            "cap_constant" => self.cap_constant = parse_value(key, v)?,
            "counting_constant" => self.counting_constant = parse_value(key, v)?,
            "kq_qubits" => self.kq_qubits = parse_value(key, v)?,
            "kq_exponent_c" => self.kq_exponent_c = parse_value(key, v)?,
            "herm_tol" => self.tolerances.herm_tol = parse_value(key, v)?,
            "psd_tol" => self.tolerances.psd_tol = parse_value(key, v)?,
            "ortho_tol" => self.tolerances.ortho_tol = parse_value(key, v)?,
            "recon_tol" => self.tolerances.recon_tol = parse_value(key, v)?,
            "log_floor" => self.tolerances.log_floor = parse_value(key, v)?,
            _ => return Err(format!("unknown key `{key}`")),
        }
        Ok(())
    }

    /// Applies a config file body on top of `self`. Blank lines and `#`
    /// comments are skipped.
    pub fn apply_text(&mut self, text: &str) -> Result<(), CliError> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| CliError::Config {
                line: Some(i + 1),
                msg: format!("expected `key = value`, got `{line}`"),
            })?;
            self.set(k.trim(), v).map_err(|msg| CliError::Config { line: Some(i + 1), msg })?;
        }
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut c = RunConfig::default();
        c.apply_text(text)?;
        Ok(c)
    }

    /// Applies `QAE_<KEY>` variables from the given iterator.
    pub fn apply_env(&mut self, vars: impl IntoIterator<Item = (String, String)>) -> Result<(), CliError> {
        let mut found: BTreeMap<String, String> = BTreeMap::new();
        for (k, v) in vars {
            if let Some(rest) = k.strip_prefix(ENV_PREFIX) {
                found.insert(rest.to_ascii_lowercase(), v);
            }
        }
        for (k, v) in found {
            self.set(&k, &v).map_err(|msg| CliError::Config {
                line: None,
                msg: format!("{ENV_PREFIX}{}: {msg}", k.to_ascii_uppercase()),
            })?;
        }
        Ok(())
    }

    /// (key, value) pairs in file order; the report echoes these.
    pub fn entries(&self) -> Vec<(String, String)> {
        self.to_text()
            .lines()
            .filter_map(|l| l.split_once(" = "))
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect()
    }

    /// Text form accepted by [`RunConfig::parse`]; parsing it back gives an
    /// equal config.
    pub fn to_text(&self) -> String {
        let t = &self.tolerances;
        let suites: Vec<&str> = self.suites.iter().map(|s| s.name()).collect();
        let mut out = String::new();
        let _ = writeln!(out, "dim = {}", self.dim);
        let _ = writeln!(out, "budget = {}", self.budget);
        let _ = writeln!(out, "eps_reg = {}", self.eps_reg);
        let _ = writeln!(out, "seed = {}", self.seed);
        let _ = writeln!(out, "suites = {}", suites.join(","));
        let _ = writeln!(
            out,
            "output = {}",
            self.output_path.as_ref().map(|p| p.display().to_string()).unwrap_or_default()
        );
        let _ = writeln!(out, "samples = {}", self.samples);
        let _ = writeln!(out, "trials = {}", self.trials);
        let _ = writeln!(out, "threads = {}", self.threads);
        let _ = writeln!(out, "dim_cap = {}", self.dim_cap);
        let _ = writeln!(out, "cap_constant = {:?}", self.cap_constant);
        let _ = writeln!(out, "counting_constant = {:?}", self.counting_constant);
        let _ = writeln!(out, "kq_qubits = {}", self.kq_qubits);
        let _ = writeln!(out, "kq_exponent_c = {:?}", self.kq_exponent_c);
        let _ = writeln!(out, "herm_tol = {:?}", t.herm_tol);
        let _ = writeln!(out, "psd_tol = {:?}", t.psd_tol);
        let _ = writeln!(out, "ortho_tol = {:?}", t.ortho_tol);
        let _ = writeln!(out, "recon_tol = {:?}", t.recon_tol);
        let _ = writeln!(out, "log_floor = {:?}", t.log_floor);
        out
    }

    /// Hard caps and basic sanity. Cap violations are reported separately
    /// from malformed values.
    pub fn validate(&self) -> Result<(), CliError> {
        let cfg = |msg: String| CliError::Config { line: None, msg };
        let cap = CliError::Cap;
        if self.dim == 0 {
            return Err(cfg("dim must be positive".into()));
        }
        self.tolerances.validate().map_err(|e| cfg(e.to_string()))?;
        if !(self.cap_constant > 0.0 && self.counting_constant > 0.0) {
            return Err(cfg("frozen constants must be positive".into()));
        }
        if self.eps_reg > Dyadic::ONE {
            return Err(cfg("eps_reg must be at most 1".into()));
        }
        if self.dim > MAX_DIM {
            return Err(cap(format!("dim {} exceeds {MAX_DIM}", self.dim)));
        }
        if self.budget.max_len > DEFAULT_MAX_LEN_CAP {
            return Err(cap(format!("budget length {} exceeds {DEFAULT_MAX_LEN_CAP}", self.budget.max_len)));
        }
        if self.budget.max_steps > MAX_STEPS {
            return Err(cap(format!("budget steps {} exceed {MAX_STEPS}", self.budget.max_steps)));
        }
        if self.samples > MAX_SAMPLES || self.trials > MAX_SAMPLES {
            return Err(cap(format!("sample and trial counts are capped at {MAX_SAMPLES}")));
        }
        if self.dim_cap > DEFAULT_DIM_CAP {
            return Err(cap(format!("dim_cap {} exceeds {DEFAULT_DIM_CAP}", self.dim_cap)));
        }
        if self.kq_qubits == 0 || self.kq_qubits > 6 {
            return Err(cap(format!("kq_qubits {} outside 1..=6", self.kq_qubits)));
        }
        Ok(())
    }
}
