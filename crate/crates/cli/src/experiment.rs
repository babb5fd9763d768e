//! Per-point evaluation of the three layers (analytic performance, savings
//! bounds, Monte Carlo) and CSV sweep emission.
//!
//! A sweep writes one row per swept value, ordered by value. All numeric
//! columns are printed with 17 significant digits so the CSV re-parses to
//! bit-identical floats, and every quantity derives from exact integer
//! tallies or pure functions, so a sweep is byte-identical for a fixed
//! config and seed regardless of worker count.

use std::io::Write;

use anyhow::{anyhow, Context};

use eeot_core::bounds::{
    brute_force_beta, optimal_beta, savings_lower_bound, BoundConfig, BoundResult, ProbMode,
};
use eeot_core::detection::{
    decision_probs, fc_performance, optimal_threshold, AttackModel, DecisionProbs, FcPerformance,
    SensorModel,
};
use eeot_core::monte_carlo::{derive_trial_seed, estimate, EstimateRecord, TrialConfig};

use crate::config::{ExperimentConfig, SweepParam, ThresholdSpec};

/// Column order of sweep output.
pub const CSV_HEADER: &str = "sweep_param,sweep_value,T_used,pf_analytic,pd_analytic,\
pm_analytic,pe_analytic,beta_star,savings_lb_beta_star,ub_frac_beta_star,ub_frac_beta0,\
pe_mc,pe_mc_ci,pf_mc,pm_mc,mean_tx_mc,frac_tx_mc,frac_tx_mc_ci";

/// A config with one sweep override applied and the threshold resolved.
#[derive(Debug, Clone)]
pub struct ResolvedPoint {
    pub n: u64,
    pub sensor: SensorModel,
    pub attack: AttackModel,
    pub probs: DecisionProbs,
    pub t_used: f64,
    pub mode: ProbMode,
}

/// Applies a swept value (if any) and resolves the fusion threshold; an
/// `optimal` threshold is recomputed here, per point, since it depends on
/// the attacked probabilities.
pub fn resolve_point(
    cfg: &ExperimentConfig,
    sweep_value: Option<(SweepParam, f64)>,
) -> anyhow::Result<ResolvedPoint> {
    let mut pi1 = cfg.pi1;
    let mut alpha = cfg.alpha;
    let mut p = cfg.p;
    let mut threshold = cfg.threshold;
    if let Some((param, value)) = sweep_value {
        match param {
            SweepParam::P => p = value,
            SweepParam::Alpha => alpha = value,
            SweepParam::Pi1 => pi1 = value,
            SweepParam::T => threshold = ThresholdSpec::Fixed(value),
        }
    }
    let sensor = SensorModel::new(cfg.s, cfg.sigma, pi1)?;
    let attack = AttackModel::new(alpha, p)?;
    let probs = decision_probs(&sensor, &attack)?;
    let t_used = match threshold {
        ThresholdSpec::Fixed(t) => t,
        ThresholdSpec::Optimal => optimal_threshold(cfg.n, &probs, &sensor)?,
    };
    Ok(ResolvedPoint {
        n: cfg.n,
        sensor,
        attack,
        probs,
        t_used,
        mode: cfg.mode,
    })
}

/// Analytic fusion performance at the resolved threshold.
pub fn analytic_part(point: &ResolvedPoint) -> anyhow::Result<FcPerformance> {
    Ok(fc_performance(
        point.n,
        point.t_used,
        &point.probs,
        &point.sensor,
    )?)
}

/// Slack-optimized savings bound plus the zero-slack baseline, under the
/// configured probability mode.
pub fn bounds_part(point: &ResolvedPoint) -> anyhow::Result<(BoundResult, f64)> {
    let cfg = match point.mode {
        ProbMode::Assumption1 => BoundConfig::assumption1(
            point.n,
            point.t_used,
            point.sensor.pi1(),
            point.attack.flip_rate(),
        )?,
        ProbMode::Exact => {
            BoundConfig::exact(point.n, point.t_used, point.sensor.pi1(), point.probs)?
        }
    };
    let result = match point.mode {
        ProbMode::Assumption1 => optimal_beta(&cfg)?,
        ProbMode::Exact => brute_force_beta(&cfg)?,
    };
    let savings_beta0 = savings_lower_bound(0, &cfg)?;
    Ok((result, savings_beta0))
}

/// Monte Carlo estimate at the resolved point.
pub fn mc_part(point: &ResolvedPoint, trials: u64, seed: u64) -> anyhow::Result<EstimateRecord> {
    Ok(estimate(&TrialConfig {
        n: point.n as usize,
        sensor: point.sensor,
        attack: point.attack,
        t: point.t_used,
        trials,
        master_seed: seed,
    })?)
}

/// All three layers for one sweep point.
#[derive(Debug, Clone)]
pub struct PointReport {
    pub t_used: f64,
    pub performance: FcPerformance,
    pub bound: BoundResult,
    pub savings_lb_beta0: f64,
    pub estimate: EstimateRecord,
}

pub fn evaluate_point(
    cfg: &ExperimentConfig,
    sweep_value: Option<(SweepParam, f64)>,
    point_seed: u64,
) -> anyhow::Result<PointReport> {
    let point = resolve_point(cfg, sweep_value)?;
    let performance = analytic_part(&point)?;
    let (bound, savings_lb_beta0) = bounds_part(&point)?;
    let estimate = mc_part(&point, cfg.trials, point_seed)?;
    Ok(PointReport {
        t_used: point.t_used,
        performance,
        bound,
        savings_lb_beta0,
        estimate,
    })
}

/// 17 significant digits: at least 12 as required, and enough for exact f64
/// round-trips.
pub fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

fn fmt_opt_rate(rate: Option<eeot_core::monte_carlo::RateEstimate>) -> String {
    match rate {
        Some(r) => fmt_float(r.value),
        None => "nan".to_string(),
    }
}

/// One CSV data row in [`CSV_HEADER`] order.
pub fn csv_row(param: &str, sweep_value: f64, n: u64, report: &PointReport) -> String {
    let ub_frac_beta_star = report.bound.transmissions_ub / n as f64;
    let ub_frac_beta0 = (n as f64 - report.savings_lb_beta0) / n as f64;
    let est = &report.estimate;
    [
        param.to_string(),
        fmt_float(sweep_value),
        fmt_float(report.t_used),
        fmt_float(report.performance.pf.value()),
        fmt_float(report.performance.pd.value()),
        fmt_float(report.performance.pm.value()),
        fmt_float(report.performance.pe.value()),
        report.bound.beta_star.to_string(),
        fmt_float(report.bound.savings_lb),
        fmt_float(ub_frac_beta_star),
        fmt_float(ub_frac_beta0),
        fmt_float(est.pe.value),
        fmt_float(est.pe.half_width),
        fmt_opt_rate(est.pf),
        fmt_opt_rate(est.pm),
        fmt_float(est.mean_transmissions),
        fmt_float(est.fraction_transmissions),
        fmt_float(est.fraction_half_width),
    ]
    .join(",")
}

/// Runs the configured sweep and writes the CSV (header plus one row per
/// swept value, in sweep order). Each point gets its own derived master
/// seed so points are statistically independent.
pub fn run_sweep(cfg: &ExperimentConfig, out: &mut dyn Write) -> anyhow::Result<()> {
    let sweep = cfg
        .sweep
        .ok_or_else(|| anyhow!("sweep requires sweep.param, sweep.from, sweep.to, sweep.step"))?;
    writeln!(out, "{CSV_HEADER}")?;
    for (index, &value) in sweep.values().iter().enumerate() {
        let point_seed = derive_trial_seed(cfg.seed, index as u64);
        let report = evaluate_point(cfg, Some((sweep.param, value)), point_seed)
            .with_context(|| format!("sweep point {} = {value}", sweep.param.key()))?;
        writeln!(out, "{}", csv_row(sweep.param.key(), value, cfg.n, &report))?;
    }
    Ok(())
}

/// `analyze`: the analytic layer only.
pub fn analyze_text(cfg: &ExperimentConfig) -> anyhow::Result<String> {
    let point = resolve_point(cfg, None)?;
    let perf = analytic_part(&point)?;
    Ok(format!(
        "N = {}\nT_used = {}\npf = {}\npd = {}\npm = {}\npe = {}\n",
        point.n,
        fmt_float(point.t_used),
        fmt_float(perf.pf.value()),
        fmt_float(perf.pd.value()),
        fmt_float(perf.pm.value()),
        fmt_float(perf.pe.value()),
    ))
}

/// `bounds`: the slack table and both transmission upper bounds.
pub fn bounds_text(cfg: &ExperimentConfig) -> anyhow::Result<String> {
    let point = resolve_point(cfg, None)?;
    let (bound, savings_beta0) = bounds_part(&point)?;
    let n = point.n as f64;
    let mut out = String::new();
    out.push_str(&format!(
        "N = {}\nT_used = {}\nmode = {:?}\nbeta_star = {}\nsavings_lb = {}\n\
         transmissions_ub = {}\nub_frac_beta_star = {}\nub_frac_beta0 = {}\n\nbeta,f1,f2,savings_lb\n",
        point.n,
        fmt_float(point.t_used),
        point.mode,
        bound.beta_star,
        fmt_float(bound.savings_lb),
        fmt_float(bound.transmissions_ub),
        fmt_float(bound.transmissions_ub / n),
        fmt_float((n - savings_beta0) / n),
    ));
    for entry in &bound.per_beta {
        out.push_str(&format!(
            "{},{},{},{}\n",
            entry.beta,
            fmt_float(entry.savings_h1),
            fmt_float(entry.savings_h0),
            fmt_float(entry.total()),
        ));
    }
    Ok(out)
}

/// `simulate`: the Monte Carlo layer only.
pub fn simulate_text(cfg: &ExperimentConfig) -> anyhow::Result<String> {
    let point = resolve_point(cfg, None)?;
    let est = mc_part(&point, cfg.trials, cfg.seed)?;
    Ok(format!(
        "N = {}\nT_used = {}\ntrials = {}\nseed = {}\nh0_trials = {}\nh1_trials = {}\n\
         pe_mc = {}\npe_mc_ci = {}\npf_mc = {}\npm_mc = {}\nmean_tx_mc = {}\nfrac_tx_mc = {}\nfrac_tx_mc_ci = {}\n",
        point.n,
        fmt_float(point.t_used),
        est.trials,
        cfg.seed,
        est.h0_trials,
        est.h1_trials,
        fmt_float(est.pe.value),
        fmt_float(est.pe.half_width),
        fmt_opt_rate(est.pf),
        fmt_opt_rate(est.pm),
        fmt_float(est.mean_transmissions),
        fmt_float(est.fraction_transmissions),
        fmt_float(est.fraction_half_width),
    ))
}
