//! Flat `key = value` solver configuration.
//!
//! Blank lines and lines starting with `#` are ignored. Keys:
//!
//! | key | value |
//! |---|---|
//! | `gamma`, `lambda` | real |
//! | `alpha`, `sigma` | schedule, e.g. `constant:0.5`, `harmonic:1,2`, `power:1,0.5,2` |
//! | `w_weights` | schedules separated by `;`, one per family member |
//! | `max_iter` | integer |
//! | `stop_tol` | real |
//! | `dykstra_max_iter`, `dykstra_stall_window` | integer |
//! | `dykstra_tol` | real |
//! | `probe_seed` | integer |

use std::path::Path;
use std::str::FromStr;

use splitvi::solver::{Schedule, SolverConfig};

use crate::error::CliError;

pub const KEYS: &[&str] = &[
    "gamma",
    "lambda",
    "alpha",
    "sigma",
    "w_weights",
    "max_iter",
    "stop_tol",
    "dykstra_max_iter",
    "dykstra_tol",
    "dykstra_stall_window",
    "probe_seed",
];

/// Parses `text` into ordered `(key, value)` pairs.
pub fn parse_pairs(text: &str) -> Result<Vec<(String, String)>, String> {
    let mut pairs = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| format!("line {}: expected `key = value`", i + 1))?;
        pairs.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(pairs)
}

fn value<T: FromStr>(key: &str, v: &str) -> Result<T, String> {
    v.parse().map_err(|_| format!("invalid value `{v}` for `{key}`"))
}

/// Applies one setting to `cfg`.
pub fn apply(cfg: &mut SolverConfig, key: &str, v: &str) -> Result<(), String> {
    let sched = |v: &str| v.parse::<Schedule>().map_err(|e| format!("`{key}`: {e}"));
    match key {
        "gamma" => cfg.gamma = value(key, v)?,
        "lambda" => cfg.lambda = value(key, v)?,
        "alpha" => cfg.alpha = sched(v)?,
        "sigma" => cfg.sigma = sched(v)?,
        "w_weights" => {
            cfg.w_weights = v.split(';').filter(|s| !s.trim().is_empty()).map(sched).collect::<Result<_, _>>()?;
        }
        "max_iter" => cfg.max_iter = value(key, v)?,
        "stop_tol" => cfg.stop_tol = value(key, v)?,
        "dykstra_max_iter" => cfg.dykstra.max_iter = value(key, v)?,
        "dykstra_tol" => cfg.dykstra.tol = value(key, v)?,
        "dykstra_stall_window" => cfg.dykstra.stall_window = value(key, v)?,
        "probe_seed" => cfg.probe_seed = value(key, v)?,
        _ => return Err(format!("unknown key `{key}` (known: {})", KEYS.join(", "))),
    }
    Ok(())
}

pub fn read_pairs(path: &Path) -> Result<Vec<(String, String)>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_pairs(&text).map_err(|m| CliError::parse(path, m))
}

/// Renders `cfg` in the same format.
pub fn render(cfg: &SolverConfig) -> String {
    let weights: Vec<String> = cfg.w_weights.iter().map(Schedule::to_string).collect();
    format!(
        "gamma = {}\nlambda = {}\nalpha = {}\nsigma = {}\nw_weights = {}\nmax_iter = {}\nstop_tol = {}\n\
         dykstra_max_iter = {}\ndykstra_tol = {}\ndykstra_stall_window = {}\nprobe_seed = {}\n",
        cfg.gamma,
        cfg.lambda,
        cfg.alpha,
        cfg.sigma,
        weights.join(";"),
        cfg.max_iter,
        cfg.stop_tol,
        cfg.dykstra.max_iter,
        cfg.dykstra.tol,
        cfg.dykstra.stall_window,
        cfg.probe_seed
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_applies() {
        let text = "# solver\ngamma = 0.2\n\nsigma = power:1,0.5,2\nw_weights = constant:0.5; harmonic:1,3\nmax_iter=40\n";
        let mut cfg = SolverConfig::default();
        for (k, v) in parse_pairs(text).unwrap() {
            apply(&mut cfg, &k, &v).unwrap();
        }
        assert_eq!(cfg.gamma, 0.2);
        assert_eq!(cfg.sigma, Schedule::power(1.0, 0.5, 2.0));
        assert_eq!(cfg.w_weights, vec![Schedule::constant(0.5), Schedule::harmonic(1.0, 3.0)]);
        assert_eq!(cfg.max_iter, 40);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(parse_pairs("gamma 0.2").is_err());
        let mut cfg = SolverConfig::default();
        assert!(apply(&mut cfg, "gama", "0.2").is_err());
        assert!(apply(&mut cfg, "gamma", "x").is_err());
        assert!(apply(&mut cfg, "sigma", "harmonic:1").is_err());
    }

    #[test]
    fn render_round_trips() {
        let mut cfg = SolverConfig { gamma: 0.1234567890123, ..SolverConfig::default() };
        cfg.w_weights = vec![Schedule::constant(0.25), Schedule::power(0.5, 2.0, 1.0)];
        let mut back = SolverConfig::default();
        for (k, v) in parse_pairs(&render(&cfg)).unwrap() {
            apply(&mut back, &k, &v).unwrap();
        }
        assert_eq!(back, cfg);
    }
}
