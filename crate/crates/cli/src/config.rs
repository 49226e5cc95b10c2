//! Run configuration layered from defaults, a `key = value` file,
//! `LAPLAX_*` environment variables and command-line flags.

use std::fmt::Write as _;
use std::str::FromStr;

use laplax::{ChainConfig, SolveOptions};

pub const ENV_PREFIX: &str = "LAPLAX_";

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub seed: u64,
    pub c_s: f64,
    pub kappa_c: f64,
    pub c_stop: usize,
    pub c1: f64,
    pub c_r: f64,
    pub retries: usize,
    pub p: f64,
    pub eps: f64,
    pub max_iterations: usize,
    pub input: Option<String>,
    pub output: Option<String>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let chain = ChainConfig::default();
        let solve = SolveOptions::default();
        Self {
            seed: chain.seed,
            c_s: chain.c_s,
            kappa_c: chain.kappa_c,
            c_stop: chain.c_stop,
            c1: chain.c1,
            c_r: chain.c_r,
            retries: chain.retries,
            p: chain.p,
            eps: solve.eps,
            max_iterations: solve.max_outer_iterations,
            input: None,
            output: None,
        }
    }
}

/// Every key accepted in files, environment variables and flags.
pub const KEYS: [&str; 12] =
    ["seed", "cs", "kappa_c", "c_stop", "c1", "c_r", "retries", "p", "eps", "max_iterations", "input", "output"];

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T, String> {
    value.trim().parse().map_err(|_| format!("invalid value {value:?} for {key}"))
}

impl RunConfig {
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        match key {
            "seed" => self.seed = parse(key, value)?,
            "cs" => self.c_s = parse(key, value)?,
            "kappa_c" => self.kappa_c = parse(key, value)?,
            "c_stop" => self.c_stop = parse(key, value)?,
            "c1" => self.c1 = parse(key, value)?,
            "c_r" => self.c_r = parse(key, value)?,
            "retries" => self.retries = parse(key, value)?,
            "p" => self.p = parse(key, value)?,
            "eps" => self.eps = parse(key, value)?,
            "max_iterations" => self.max_iterations = parse(key, value)?,
            "input" => self.input = Some(value.trim().to_string()),
            "output" => self.output = Some(value.trim().to_string()),
            _ => return Err(format!("unknown configuration key {key:?}")),
        }
        Ok(())
    }

    /// Applies a `key = value` file; blank lines and `#` comments are skipped.
    pub fn apply_file(&mut self, text: &str) -> Result<(), String> {
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| format!("line {}: expected key = value", i + 1))?;
            self.set(key.trim(), value).map_err(|e| format!("line {}: {e}", i + 1))?;
        }
        Ok(())
    }

    pub fn apply_env(&mut self, lookup: impl Fn(&str) -> Option<String>) -> Result<(), String> {
        for key in KEYS {
            let var = format!("{ENV_PREFIX}{}", key.to_uppercase());
            if let Some(value) = lookup(&var) {
                self.set(key, &value).map_err(|e| format!("{var}: {e}"))?;
            }
        }
        Ok(())
    }

    pub fn apply_pairs<'a>(&mut self, pairs: impl IntoIterator<Item = (&'a str, String)>) -> Result<(), String> {
        for (key, value) in pairs {
            self.set(key, &value)?;
        }
        Ok(())
    }

    /// Defaults, then the file, then the environment, then flags.
    pub fn layered<'a>(
        file: Option<&str>,
        env: impl Fn(&str) -> Option<String>,
        flags: impl IntoIterator<Item = (&'a str, String)>,
    ) -> Result<Self, String> {
        let mut cfg = Self::default();
        if let Some(text) = file {
            cfg.apply_file(text)?;
        }
        cfg.apply_env(env)?;
        cfg.apply_pairs(flags)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_file_string(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "seed = {}", self.seed);
        let _ = writeln!(s, "cs = {:?}", self.c_s);
        let _ = writeln!(s, "kappa_c = {:?}", self.kappa_c);
        let _ = writeln!(s, "c_stop = {}", self.c_stop);
        let _ = writeln!(s, "c1 = {:?}", self.c1);
        let _ = writeln!(s, "c_r = {:?}", self.c_r);
        let _ = writeln!(s, "retries = {}", self.retries);
        let _ = writeln!(s, "p = {:?}", self.p);
        let _ = writeln!(s, "eps = {:?}", self.eps);
        let _ = writeln!(s, "max_iterations = {}", self.max_iterations);
        if let Some(v) = &self.input {
            let _ = writeln!(s, "input = {v}");
        }
        if let Some(v) = &self.output {
            let _ = writeln!(s, "output = {v}");
        }
        s
    }

    pub fn chain(&self) -> ChainConfig {
        ChainConfig {
            c1: self.c1,
            kappa_c: self.kappa_c,
            c_stop: self.c_stop,
            retries: self.retries,
            c_r: self.c_r,
            c_s: self.c_s,
            p: self.p,
            seed: self.seed,
        }
    }

    pub fn solve_options(&self) -> SolveOptions {
        SolveOptions { eps: self.eps, max_outer_iterations: self.max_iterations, chain: self.chain(), ..SolveOptions::default() }
    }

    pub fn validate(&self) -> Result<(), String> {
        self.solve_options().validate().map_err(|e| e.to_string())
    }
}
