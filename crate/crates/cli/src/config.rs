//! Flat `key = value` experiment configuration.
//!
//! Recognized keys: `N`, `s`, `sigma`, `pi1`, `alpha`, `p`, `T` (a number or
//! `optimal`), `trials`, `seed`, `mode` (`assumption1` | `exact`),
//! `sweep.param` (`p` | `alpha` | `T` | `pi1`), `sweep.from`, `sweep.to`,
//! `sweep.step`, `output_path`. `#` starts a comment. Parse errors name the
//! offending key and line.

use std::collections::HashMap;
use std::fmt;
use std::path::PathBuf;

use eeot_core::bounds::ProbMode;

/// Fusion threshold specification: a fixed count or the per-point optimum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ThresholdSpec {
    Optimal,
    Fixed(f64),
}

/// The parameter a sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    P,
    Alpha,
    T,
    Pi1,
}

impl SweepParam {
    pub fn key(self) -> &'static str {
        match self {
            SweepParam::P => "p",
            SweepParam::Alpha => "alpha",
            SweepParam::T => "T",
            SweepParam::Pi1 => "pi1",
        }
    }

    fn parse(text: &str) -> Option<Self> {
        match text {
            "p" => Some(SweepParam::P),
            "alpha" => Some(SweepParam::Alpha),
            "T" => Some(SweepParam::T),
            "pi1" => Some(SweepParam::Pi1),
            _ => None,
        }
    }
}

/// Inclusive numeric range with a positive step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepSpec {
    pub param: SweepParam,
    pub from: f64,
    pub to: f64,
    pub step: f64,
}

impl SweepSpec {
    /// The sweep grid `from, from + step, ...` up to `to` (inclusive, with a
    /// relative guard against float drift at the far end).
    pub fn values(&self) -> Vec<f64> {
        let mut out = Vec::new();
        let mut i = 0u64;
        loop {
            let v = self.from + i as f64 * self.step;
            if v > self.to + self.step * 1e-9 {
                break;
            }
            out.push(v);
            i += 1;
        }
        out
    }
}

/// A fully validated experiment description.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub n: u64,
    pub s: f64,
    pub sigma: f64,
    pub pi1: f64,
    pub alpha: f64,
    pub p: f64,
    pub threshold: ThresholdSpec,
    pub trials: u64,
    pub seed: u64,
    pub mode: ProbMode,
    pub sweep: Option<SweepSpec>,
    pub output_path: Option<PathBuf>,
    /// Non-fatal findings (e.g. a swept parameter whose fixed value will be
    /// ignored), for the caller to surface.
    pub warnings: Vec<String>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            n: 100,
            s: 10.0,
            sigma: 1.0,
            pi1: 0.5,
            alpha: 0.3,
            p: 0.5,
            threshold: ThresholdSpec::Optimal,
            trials: 100_000,
            seed: 1,
            mode: ProbMode::Assumption1,
            sweep: None,
            output_path: None,
            warnings: Vec::new(),
        }
    }
}

/// Parse or validation failure, carrying the key and line it came from when
/// one is attributable.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub key: Option<String>,
    pub message: String,
}

impl ConfigError {
    fn at(line: usize, key: &str, message: impl Into<String>) -> Self {
        ConfigError {
            line: Some(line),
            key: Some(key.to_string()),
            message: message.into(),
        }
    }

    fn for_key(key: &str, line: Option<usize>, message: impl Into<String>) -> Self {
        ConfigError {
            line,
            key: Some(key.to_string()),
            message: message.into(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config error")?;
        if let Some(line) = self.line {
            write!(f, " at line {line}")?;
        }
        if let Some(key) = &self.key {
            write!(f, " (key `{key}`)")?;
        }
        write!(f, ": {}", self.message)
    }
}

impl std::error::Error for ConfigError {}

fn parse_f64(line: usize, key: &str, value: &str) -> Result<f64, ConfigError> {
    value
        .parse::<f64>()
        .map_err(|_| ConfigError::at(line, key, format!("malformed number `{value}`")))
}

fn parse_u64(line: usize, key: &str, value: &str) -> Result<u64, ConfigError> {
    value
        .parse::<u64>()
        .map_err(|_| ConfigError::at(line, key, format!("malformed unsigned integer `{value}`")))
}

/// Parses a flat `key = value` configuration, applies defaults, and
/// validates every field and cross-field constraint.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let mut cfg = ExperimentConfig::default();
    let mut seen: HashMap<&'static str, usize> = HashMap::new();
    let mut sweep_param: Option<SweepParam> = None;
    let mut sweep_from: Option<f64> = None;
    let mut sweep_to: Option<f64> = None;
    let mut sweep_step: Option<f64> = None;

    for (idx, raw_line) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw_line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return Err(ConfigError {
                line: Some(line),
                key: None,
                message: format!("expected `key = value`, got `{content}`"),
            });
        };
        let key = key.trim();
        let value = value.trim();
        if value.is_empty() {
            return Err(ConfigError::at(line, key, "missing value"));
        }

        match key {
            "N" => {
                cfg.n = parse_u64(line, key, value)?;
                if cfg.n == 0 {
                    return Err(ConfigError::at(line, key, "N must be >= 1"));
                }
                seen.insert("N", line);
            }
            "s" => {
                cfg.s = parse_f64(line, key, value)?;
                if !(cfg.s.is_finite() && cfg.s > 0.0) {
                    return Err(ConfigError::at(line, key, "s must be finite and > 0"));
                }
                seen.insert("s", line);
            }
            "sigma" => {
                cfg.sigma = parse_f64(line, key, value)?;
                if !(cfg.sigma.is_finite() && cfg.sigma > 0.0) {
                    return Err(ConfigError::at(line, key, "sigma must be finite and > 0"));
                }
                seen.insert("sigma", line);
            }
            "pi1" => {
                cfg.pi1 = parse_f64(line, key, value)?;
                if !(cfg.pi1 > 0.0 && cfg.pi1 < 1.0) {
                    return Err(ConfigError::at(line, key, "pi1 must lie strictly in (0, 1)"));
                }
                seen.insert("pi1", line);
            }
            "alpha" => {
                cfg.alpha = parse_f64(line, key, value)?;
                if !(0.0..=1.0).contains(&cfg.alpha) {
                    return Err(ConfigError::at(line, key, "alpha must lie in [0, 1]"));
                }
                seen.insert("alpha", line);
            }
            "p" => {
                cfg.p = parse_f64(line, key, value)?;
                if !(0.0..=1.0).contains(&cfg.p) {
                    return Err(ConfigError::at(line, key, "p must lie in [0, 1]"));
                }
                seen.insert("p", line);
            }
            "T" => {
                cfg.threshold = if value.eq_ignore_ascii_case("optimal") {
                    ThresholdSpec::Optimal
                } else {
                    ThresholdSpec::Fixed(parse_f64(line, key, value)?)
                };
                seen.insert("T", line);
            }
            "trials" => {
                cfg.trials = parse_u64(line, key, value)?;
                if cfg.trials == 0 {
                    return Err(ConfigError::at(line, key, "trials must be >= 1"));
                }
                seen.insert("trials", line);
            }
            "seed" => {
                cfg.seed = parse_u64(line, key, value)?;
                seen.insert("seed", line);
            }
            "mode" => {
                cfg.mode = match value {
                    "assumption1" => ProbMode::Assumption1,
                    "exact" => ProbMode::Exact,
                    other => {
                        return Err(ConfigError::at(
                            line,
                            key,
                            format!("mode must be `assumption1` or `exact`, got `{other}`"),
                        ))
                    }
                };
                seen.insert("mode", line);
            }
            "sweep.param" => {
                sweep_param = Some(SweepParam::parse(value).ok_or_else(|| {
                    ConfigError::at(
                        line,
                        key,
                        format!("sweep parameter must be one of p, alpha, T, pi1; got `{value}`"),
                    )
                })?);
                seen.insert("sweep.param", line);
            }
            "sweep.from" => {
                sweep_from = Some(parse_f64(line, key, value)?);
                seen.insert("sweep.from", line);
            }
            "sweep.to" => {
                sweep_to = Some(parse_f64(line, key, value)?);
                seen.insert("sweep.to", line);
            }
            "sweep.step" => {
                let step = parse_f64(line, key, value)?;
                if !(step.is_finite() && step > 0.0) {
                    return Err(ConfigError::at(line, key, "sweep.step must be > 0"));
                }
                sweep_step = Some(step);
                seen.insert("sweep.step", line);
            }
            "output_path" => {
                cfg.output_path = Some(PathBuf::from(value));
                seen.insert("output_path", line);
            }
            other => {
                return Err(ConfigError::at(line, other, "unknown key"));
            }
        }
    }

    // Assemble the sweep: all four keys or none.
    let sweep_keys_present = [
        sweep_param.is_some(),
        sweep_from.is_some(),
        sweep_to.is_some(),
        sweep_step.is_some(),
    ];
    if sweep_keys_present.iter().any(|&p| p) {
        if !sweep_keys_present.iter().all(|&p| p) {
            return Err(ConfigError::for_key(
                "sweep.param",
                seen.get("sweep.param").copied(),
                "a sweep needs all of sweep.param, sweep.from, sweep.to, sweep.step",
            ));
        }
        let spec = SweepSpec {
            param: sweep_param.unwrap(),
            from: sweep_from.unwrap(),
            to: sweep_to.unwrap(),
            step: sweep_step.unwrap(),
        };
        if !(spec.from.is_finite() && spec.to.is_finite()) || spec.from > spec.to {
            return Err(ConfigError::for_key(
                "sweep.from",
                seen.get("sweep.from").copied(),
                format!("empty sweep range [{}, {}]", spec.from, spec.to),
            ));
        }
        validate_sweep_domain(&cfg, &spec, &seen)?;
        if let Some(&line) = seen.get(spec.param.key()) {
            cfg.warnings.push(format!(
                "`{}` is swept; its fixed value from line {line} is ignored",
                spec.param.key()
            ));
        }
        cfg.sweep = Some(spec);
    }

    // Cross-field constraints on the fixed values.
    if cfg.sweep.map(|s| s.param) != Some(SweepParam::T) {
        if let ThresholdSpec::Fixed(t) = cfg.threshold {
            if !(t.is_finite() && t > 0.0 && t < cfg.n as f64) {
                return Err(ConfigError::for_key(
                    "T",
                    seen.get("T").copied(),
                    format!("T must lie in (0, {}), got {t}", cfg.n),
                ));
            }
            if t.fract() == 0.0 {
                cfg.warnings.push(format!(
                    "integer threshold T={t}: the count-at-least-T boundary convention \
                     applies; half-integer thresholds avoid boundary ties"
                ));
            }
        }
    }
    let sweeps_attack = matches!(
        cfg.sweep.map(|s| s.param),
        Some(SweepParam::P) | Some(SweepParam::Alpha)
    );
    if !sweeps_attack && cfg.alpha * cfg.p >= 0.5 {
        return Err(ConfigError::for_key(
            "alpha",
            seen.get("alpha").copied().or_else(|| seen.get("p").copied()),
            format!(
                "effective flip rate alpha*p = {} must be < 0.5",
                cfg.alpha * cfg.p
            ),
        ));
    }

    Ok(cfg)
}

/// Domain checks for the swept values, so a sweep fails at parse time
/// rather than mid-run.
fn validate_sweep_domain(
    cfg: &ExperimentConfig,
    spec: &SweepSpec,
    seen: &HashMap<&'static str, usize>,
) -> Result<(), ConfigError> {
    let line = seen.get("sweep.from").copied();
    let fail = |message: String| Err(ConfigError::for_key("sweep.from", line, message));
    match spec.param {
        SweepParam::P => {
            if spec.from < 0.0 || spec.to > 1.0 {
                return fail(format!("p sweep [{}, {}] escapes [0, 1]", spec.from, spec.to));
            }
            if cfg.alpha * spec.to >= 0.5 {
                return fail(format!(
                    "p sweep reaches alpha*p = {} >= 0.5",
                    cfg.alpha * spec.to
                ));
            }
        }
        SweepParam::Alpha => {
            if spec.from < 0.0 || spec.to > 1.0 {
                return fail(format!(
                    "alpha sweep [{}, {}] escapes [0, 1]",
                    spec.from, spec.to
                ));
            }
            if spec.to * cfg.p >= 0.5 {
                return fail(format!(
                    "alpha sweep reaches alpha*p = {} >= 0.5",
                    spec.to * cfg.p
                ));
            }
        }
        SweepParam::T => {
            if spec.from <= 0.0 || spec.to >= cfg.n as f64 {
                return fail(format!(
                    "T sweep [{}, {}] escapes (0, {})",
                    spec.from, spec.to, cfg.n
                ));
            }
        }
        SweepParam::Pi1 => {
            if spec.from <= 0.0 || spec.to >= 1.0 {
                return fail(format!(
                    "pi1 sweep [{}, {}] escapes (0, 1)",
                    spec.from, spec.to
                ));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_is_all_defaults() {
        let cfg = parse_config("").unwrap();
        assert_eq!(cfg, ExperimentConfig::default());
        assert_eq!(cfg.n, 100);
        assert_eq!(cfg.threshold, ThresholdSpec::Optimal);
        assert_eq!(cfg.trials, 100_000);
        assert_eq!(cfg.seed, 1);
    }

    #[test]
    fn fixed_threshold_and_comments() {
        let cfg = parse_config("# scenario\nT = 49.5  # fig threshold\n").unwrap();
        assert_eq!(cfg.threshold, ThresholdSpec::Fixed(49.5));
        assert!(cfg.warnings.is_empty());
    }

    #[test]
    fn optimal_threshold_keyword_is_case_insensitive() {
        let cfg = parse_config("T = Optimal\n").unwrap();
        assert_eq!(cfg.threshold, ThresholdSpec::Optimal);
    }

    #[test]
    fn out_of_range_alpha_names_key_and_line() {
        let err = parse_config("N = 100\nalpha = 1.5\n").unwrap_err();
        assert_eq!(err.line, Some(2));
        assert_eq!(err.key.as_deref(), Some("alpha"));
    }

    #[test]
    fn unknown_key_is_rejected() {
        let err = parse_config("frobnicate = 3\n").unwrap_err();
        assert_eq!(err.key.as_deref(), Some("frobnicate"));
        assert_eq!(err.line, Some(1));
    }

    #[test]
    fn malformed_number_is_rejected() {
        let err = parse_config("p = zero\n").unwrap_err();
        assert_eq!(err.key.as_deref(), Some("p"));
        assert!(err.message.contains("malformed"));
    }

    #[test]
    fn zero_trials_is_rejected() {
        let err = parse_config("trials = 0\n").unwrap_err();
        assert_eq!(err.key.as_deref(), Some("trials"));
    }

    #[test]
    fn combined_flip_rate_is_bounded() {
        let err = parse_config("alpha = 0.8\np = 0.7\n").unwrap_err();
        assert_eq!(err.key.as_deref(), Some("alpha"));
        assert!(err.message.contains("0.5"));
    }

    #[test]
    fn sweep_needs_all_four_keys() {
        let err = parse_config("sweep.param = p\nsweep.from = 0\n").unwrap_err();
        assert!(err.message.contains("sweep"));
    }

    #[test]
    fn sweep_grid_is_inclusive() {
        let cfg =
            parse_config("sweep.param = p\nsweep.from = 0\nsweep.to = 1\nsweep.step = 0.1\n")
                .unwrap();
        let values = cfg.sweep.unwrap().values();
        assert_eq!(values.len(), 11);
        assert_eq!(values[0], 0.0);
        assert!((values[10] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sweeping_a_fixed_key_warns() {
        let cfg = parse_config(
            "p = 0.25\nsweep.param = p\nsweep.from = 0\nsweep.to = 1\nsweep.step = 0.5\n",
        )
        .unwrap();
        assert_eq!(cfg.warnings.len(), 1);
        assert!(cfg.warnings[0].contains("`p` is swept"));
    }

    #[test]
    fn sweep_domain_is_validated_upfront() {
        // alpha = 0.6 fixed, p swept to 1.0 would cross alpha*p = 0.5.
        let err = parse_config(
            "alpha = 0.6\nsweep.param = p\nsweep.from = 0\nsweep.to = 1\nsweep.step = 0.1\n",
        )
        .unwrap_err();
        assert!(err.message.contains(">= 0.5"));

        let err = parse_config(
            "sweep.param = pi1\nsweep.from = 0\nsweep.to = 0.9\nsweep.step = 0.1\n",
        )
        .unwrap_err();
        assert!(err.message.contains("(0, 1)"));
    }

    #[test]
    fn integer_threshold_warns() {
        let cfg = parse_config("T = 50\n").unwrap();
        assert_eq!(cfg.warnings.len(), 1);
        assert!(cfg.warnings[0].contains("integer threshold"));
    }

    #[test]
    fn empty_sweep_range_is_rejected() {
        let err = parse_config(
            "sweep.param = p\nsweep.from = 0.8\nsweep.to = 0.2\nsweep.step = 0.1\n",
        )
        .unwrap_err();
        assert!(err.message.contains("empty sweep range"));
    }
}
