//! Flat `key = value` config files with `#` comments.
//!
//! Recognized keys mirror the study fields: `alpha`, `rho`, `M`, `T`, `N`
//! (comma-separated), `K`, `seed`, `scheme` (`baseline`/`modified`),
//! `epsilon`, `sigma_zero`, `f_zero`. Unknown keys are a startup error.

use spde_core::{SchemeKind, StudyConfig};

pub fn parse_scheme(s: &str) -> Result<SchemeKind, String> {
    match s {
        "baseline" => Ok(SchemeKind::Baseline),
        "modified" => Ok(SchemeKind::Modified),
        other => Err(format!("unknown scheme '{other}'; expected baseline or modified")),
    }
}

fn parse_bool(s: &str) -> Result<bool, String> {
    match s {
        "true" => Ok(true),
        "false" => Ok(false),
        other => Err(format!("expected true or false, got '{other}'")),
    }
}

pub fn parse_n_list(s: &str) -> Result<Vec<usize>, String> {
    s.split(',')
        .map(|part| {
            part.trim()
                .parse::<usize>()
                .map_err(|e| format!("invalid step count '{}': {e}", part.trim()))
        })
        .collect()
}

/// Applies a config file's contents on top of `study`.
pub fn apply_config_text(study: &mut StudyConfig, text: &str) -> Result<(), String> {
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| format!("line {}: expected key = value, got '{line}'", lineno + 1))?;
        let (key, value) = (key.trim(), value.trim());
        let context = |e: String| format!("line {}: {e}", lineno + 1);
        match key {
            "alpha" => study.alpha = parse_f64(value).map_err(context)?,
            "rho" => study.rho = parse_f64(value).map_err(context)?,
            "M" => study.modes = parse_usize(value).map_err(context)?,
            "T" => study.final_time = parse_f64(value).map_err(context)?,
            "N" => study.n_list = parse_n_list(value).map_err(context)?,
            "K" => study.trajectories = parse_usize(value).map_err(context)?,
            "seed" => {
                study.master_seed = value
                    .parse::<u64>()
                    .map_err(|e| context(format!("invalid seed '{value}': {e}")))?
            }
            "scheme" => study.scheme = parse_scheme(value).map_err(context)?,
            "epsilon" => study.epsilon = parse_f64(value).map_err(context)?,
            "sigma_zero" => study.sigma_zero = parse_bool(value).map_err(context)?,
            "f_zero" => study.f_zero = parse_bool(value).map_err(context)?,
            other => {
                return Err(format!(
                    "line {}: unknown key '{other}' (known: alpha, rho, M, T, N, K, seed, scheme, epsilon, sigma_zero, f_zero)",
                    lineno + 1
                ))
            }
        }
    }
    Ok(())
}

fn parse_f64(s: &str) -> Result<f64, String> {
    s.parse::<f64>().map_err(|e| format!("invalid number '{s}': {e}"))
}

fn parse_usize(s: &str) -> Result<usize, String> {
    s.parse::<usize>().map_err(|e| format!("invalid integer '{s}': {e}"))
}
