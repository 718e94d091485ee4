use std::fs;
use std::path::Path;

use cuberoot::dgp::{generate, Model};
use cuberoot::estimators::{manski_tamer_set, Estimator, PointEstimate};
use cuberoot::inference::{criterion_confidence_set, default_block_len, subsample_ci};
use cuberoot::limitlaw::{limit_spec_for, simulate_argmax_law, summary_quantiles};
use cuberoot::montecarlo::{
    coverage_experiment, limit_comparison, rate_experiment, CoverageConfig, CoverageTarget, LimitConfig, Procedure,
    RateConfig, SetConfig,
};
use cuberoot::sample::format_float;
use cuberoot::{BandwidthRule, Error, Grid, GridSet, Kernel, KernelKind, Result, TimeSeriesSample};
use serde_json::{json, Map, Value};

use crate::args::{Command, Opts};
use crate::output::Sink;

/// Procedure id selecting level-set estimation in `mc-rate`.
const SET_PROCEDURE: &str = "manski_tamer";
const DEFAULT_N_VALUES: [usize; 5] = [250, 500, 1000, 2000, 4000];
const DEFAULT_ALPHA: f64 = 0.1;
const SUMMARY_PROBS: [f64; 5] = [0.05, 0.25, 0.5, 0.75, 0.95];

fn config_err(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("serializable result")
}

fn fmt_row(v: &[f64]) -> Vec<String> {
    v.iter().map(|&x| format_float(x)).collect()
}

pub fn run(cmd: &Command) -> Result<()> {
    let o = cmd.opts();
    if let Some(w) = o.workers {
        if w == 0 {
            return Err(config_err("--workers must be at least 1"));
        }
        // Fails only if a pool already exists, which cannot happen here.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(w).build_global();
    }
    let sink = Sink::new(o.output.as_deref());
    let name = cmd.name();
    match cmd {
        Command::Estimate(o) => estimate(name, o, &sink),
        Command::SetEstimate(o) => set_estimate(name, o, &sink),
        Command::Subsample(o) => subsample(name, o, &sink),
        Command::Confset(o) => confset(name, o, &sink),
        Command::McRate(o) => mc_rate(name, o, &sink),
        Command::McCoverage(o) => mc_coverage(name, o, &sink),
        Command::McLimit(o) => mc_limit(name, o, &sink),
        Command::LimitSim(o) => limit_sim(name, o, &sink),
        Command::Gen(o) => gen(o),
    }
}

fn seed(o: &Opts, what: &str) -> Result<u64> {
    o.seed.ok_or_else(|| config_err(format!("--seed is required for {what}")))
}

fn parse_json<T: serde::de::DeserializeOwned>(text: &str, what: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| config_err(format!("invalid {what}: {e}")))
}

fn model(o: &Opts) -> Result<Model> {
    let s = o.dgp.as_deref().ok_or_else(|| config_err("--dgp is required"))?;
    let t = s.trim();
    let m: Model = if t.starts_with('{') {
        parse_json(t, "model JSON")?
    } else if Path::new(t).is_file() {
        parse_json(&fs::read_to_string(t)?, "model file")?
    } else {
        Model::default_for(t)?
    };
    m.validate()?;
    Ok(m)
}

fn estimator_from(s: &str, o: &Opts) -> Result<Estimator> {
    let t = s.trim();
    let mut est = if t.starts_with('{') { parse_json(t, "estimator JSON")? } else { Estimator::default_for(t)? };
    if o.bandwidth_c.is_some() || o.bandwidth_a.is_some() {
        let cur = est.bandwidth_rule();
        let rule = BandwidthRule::new(o.bandwidth_c.unwrap_or(cur.c), o.bandwidth_a.unwrap_or(cur.a))?;
        est = est.with_bandwidth(rule);
    }
    if let Some(k) = &o.kernel {
        est = est.with_kernel(Kernel::new(k.parse::<KernelKind>()?));
    }
    if let Some(v) = o.at {
        match &mut est {
            Estimator::Grenander { at } => *at = v,
            Estimator::LocalizedMaxScore { c, .. } | Estimator::MinVolume { c, .. } => *c = v,
            _ => {}
        }
    }
    est.validate()?;
    Ok(est)
}

fn estimator(o: &Opts) -> Result<Estimator> {
    estimator_from(o.estimator.as_deref().ok_or_else(|| config_err("--estimator is required"))?, o)
}

fn single_n(o: &Opts, default: Option<usize>) -> Result<usize> {
    match &o.n {
        Some(s) => s.trim().parse().map_err(|_| config_err(format!("--n must be a positive integer, got '{s}'"))),
        None => default.ok_or_else(|| config_err("--n is required")),
    }
    .and_then(|n| if n == 0 { Err(config_err("--n must be positive")) } else { Ok(n) })
}

fn n_list(o: &Opts) -> Result<Vec<usize>> {
    match &o.n {
        None => Ok(DEFAULT_N_VALUES.to_vec()),
        Some(s) => s
            .split(',')
            .map(|p| p.trim().parse().map_err(|_| config_err(format!("cannot parse sample size '{p}'"))))
            .collect(),
    }
}

fn set_config(o: &Opts) -> Result<SetConfig> {
    let mut cfg = SetConfig::default();
    if let Some(g) = &o.grid {
        cfg.grid = g.clone();
    }
    cfg.nuisance = BandwidthRule::new(o.bandwidth_c.unwrap_or(cfg.nuisance.c), o.bandwidth_a.unwrap_or(cfg.nuisance.a))?;
    cfg.cutoff = o.cutoff;
    cfg.parse_grid()?;
    Ok(cfg)
}

/// Reads `--input` or simulates from `--dgp`; returns the sample and a
/// description of its source.
fn data(o: &Opts) -> Result<(TimeSeriesSample, Value)> {
    match (&o.input, &o.dgp) {
        (Some(p), None) => {
            let s = TimeSeriesSample::read_csv_path(p)?;
            Ok((s, json!({ "input": p.display().to_string() })))
        }
        (None, Some(_)) => {
            let m = model(o)?;
            let n = single_n(o, None)?;
            let seed = seed(o, "simulated data")?;
            let s = generate(&m, n, seed)?;
            Ok((s, json!({ "dgp": to_value(&m), "n": n, "seed": seed })))
        }
        _ => Err(config_err("exactly one of --input and --dgp must be given")),
    }
}

fn merge(mut base: Value, extra: Value) -> Value {
    if let (Value::Object(a), Value::Object(b)) = (&mut base, extra) {
        a.extend(b);
    }
    base
}

fn estimate_field(e: &PointEstimate) -> Value {
    match e.theta.as_slice() {
        [v] => json!(v),
        v => json!(v),
    }
}

fn estimate(name: &str, o: &Opts, sink: &Sink) -> Result<()> {
    let est = estimator(o)?;
    let (sample, source) = data(o)?;
    let fit = est.estimate(&sample)?;
    let mut extra = Map::new();
    extra.insert("estimate".into(), estimate_field(&fit));
    let config = merge(source, json!({ "estimator": to_value(&est) }));
    sink.write_json(name, config, to_value(&fit), extra)
}

fn set_summary(set: &GridSet) -> Value {
    let members: Vec<Vec<f64>> = set.members().collect();
    let d = set.grid.dim();
    let lower: Vec<f64> = (0..d).map(|k| members.iter().map(|m| m[k]).fold(f64::INFINITY, f64::min)).collect();
    let upper: Vec<f64> = (0..d).map(|k| members.iter().map(|m| m[k]).fold(f64::NEG_INFINITY, f64::max)).collect();
    json!({ "count": members.len(), "lower": lower, "upper": upper, "members": members })
}

fn set_estimate(name: &str, o: &Opts, sink: &Sink) -> Result<()> {
    let cfg = set_config(o)?;
    let (sample, source) = data(o)?;
    let grid = cfg.parse_grid()?;
    let est = manski_tamer_set(&sample, &grid, cfg.nuisance, cfg.cutoff)?;
    let rows: Vec<Vec<String>> = grid
        .nodes()
        .zip(&est.values)
        .zip(&est.set.mask)
        .map(|((t, v), m)| {
            let mut r = fmt_row(&t);
            r.push(format_float(*v));
            r.push((*m as u8).to_string());
            r
        })
        .collect();
    sink.write_table("criterion", &["theta", "value", "in_set"], &rows)?;
    let result = json!({
        "set": set_summary(&est.set),
        "cutoff": est.cutoff,
        "threshold": est.threshold,
        "max_value": est.max_value,
    });
    sink.write_json(name, merge(source, json!({ "set_estimator": to_value(&cfg) })), result, Map::new())
}

fn subsample(name: &str, o: &Opts, sink: &Sink) -> Result<()> {
    let est = estimator(o)?;
    let (sample, source) = data(o)?;
    let s = o.block_len.unwrap_or_else(|| default_block_len(sample.n()));
    let alpha = o.alpha.unwrap_or(DEFAULT_ALPHA);
    let mut ci = subsample_ci(&sample, &est, s, alpha, o.dump_blocks)?;
    if let Some(stats) = &ci.block_stats {
        let rows: Vec<Vec<String>> = stats.iter().map(|r| fmt_row(r)).collect();
        let header: Vec<String> = (0..ci.theta_hat.len()).map(|k| format!("stat{k}")).collect();
        let header: Vec<&str> = header.iter().map(String::as_str).collect();
        if sink.write_table("blocks", &header, &rows)?.is_some() {
            ci.block_stats = None;
        }
    }
    let config = merge(source, json!({ "estimator": to_value(&est), "block_len": s, "alpha": alpha }));
    sink.write_json(name, config, to_value(&ci), Map::new())
}

fn confset(name: &str, o: &Opts, sink: &Sink) -> Result<()> {
    let est = estimator(o)?;
    let grid: Grid = o.grid.as_deref().ok_or_else(|| config_err("--grid is required for confset"))?.parse()?;
    let (sample, source) = data(o)?;
    let s = o.block_len.unwrap_or_else(|| default_block_len(sample.n()));
    let alpha = o.alpha.unwrap_or(DEFAULT_ALPHA);
    let cs = criterion_confidence_set(&sample, &est, &grid, s, alpha)?;
    let rows: Vec<Vec<String>> = grid
        .nodes()
        .enumerate()
        .map(|(i, t)| {
            let mut r = fmt_row(&t);
            r.extend([format_float(cs.statistic[i]), format_float(cs.quantile[i]), (cs.set.mask[i] as u8).to_string()]);
            r
        })
        .collect();
    let header: Vec<String> =
        (0..grid.dim()).map(|k| format!("theta{k}")).chain(["statistic", "quantile", "in_set"].map(String::from)).collect();
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    sink.write_table("grid", &header, &rows)?;
    let result = json!({
        "set": set_summary(&cs.set),
        "block_len": cs.block_len,
        "alpha": cs.alpha,
        "blocks_used": cs.blocks_used,
        "note": cs.note,
    });
    let config = merge(source, json!({ "estimator": to_value(&est), "grid": o.grid, "block_len": s, "alpha": alpha }));
    sink.write_json(name, config, result, Map::new())
}

fn mc_rate(name: &str, o: &Opts, sink: &Sink) -> Result<()> {
    let seed = seed(o, "mc-rate")?;
    let model = model(o)?;
    let id = o.estimator.as_deref().ok_or_else(|| config_err("--estimator is required"))?;
    let procedure = if id.trim() == SET_PROCEDURE {
        Procedure::Set(set_config(o)?)
    } else {
        Procedure::Point(estimator_from(id, o)?)
    };
    let cfg = RateConfig { model, procedure, n_values: n_list(o)?, reps: o.reps.unwrap_or(200), seed };
    let rep = rate_experiment(&cfg)?;
    let rows: Vec<Vec<String>> = rep
        .rows
        .iter()
        .map(|r| {
            vec![
                r.n.to_string(),
                format_float(r.bandwidth),
                format_float(r.effective_size),
                format_float(r.rmse),
                format_float(r.median_error),
                r.reps.to_string(),
                r.failures.to_string(),
            ]
        })
        .collect();
    sink.write_table("rates", &["n", "bandwidth", "effective_size", "rmse", "median_error", "reps", "failures"], &rows)?;
    sink.write_json(name, to_value(&cfg), to_value(&rep), Map::new())
}

fn mc_coverage(name: &str, o: &Opts, sink: &Sink) -> Result<()> {
    let seed = seed(o, "mc-coverage")?;
    let model = model(o)?;
    let kind = o.target.clone().unwrap_or_else(|| if o.estimator.is_some() { "subsample".into() } else { "set".into() });
    let alpha = o.alpha.unwrap_or(DEFAULT_ALPHA);
    let target = match kind.as_str() {
        "subsample" => CoverageTarget::Subsample { estimator: estimator(o)?, block_len: o.block_len, alpha },
        "confset" => CoverageTarget::ConfSet {
            estimator: estimator(o)?,
            grid: o.grid.clone().ok_or_else(|| config_err("--grid is required for confset coverage"))?,
            block_len: o.block_len,
            alpha,
        },
        "set" => CoverageTarget::SetContainment(set_config(o)?),
        other => return Err(config_err(format!("unknown coverage target '{other}'"))),
    };
    let cfg = CoverageConfig { model, n: single_n(o, Some(1000))?, reps: o.reps.unwrap_or(200), seed, target };
    let rep = coverage_experiment(&cfg)?;
    let mut extra = Map::new();
    if kind != "set" {
        extra.insert("nominal".into(), json!(1.0 - alpha));
    }
    sink.write_json(name, to_value(&cfg), to_value(&rep), extra)
}

fn mc_limit(name: &str, o: &Opts, sink: &Sink) -> Result<()> {
    let seed = seed(o, "mc-limit")?;
    let cfg = LimitConfig {
        model: model(o)?,
        estimator: estimator(o)?,
        n: single_n(o, Some(4000))?,
        reps: o.reps.unwrap_or(1000),
        seed,
        radius: o.radius.unwrap_or(3.0),
        points: o.points.unwrap_or(401),
        draws: o.draws.unwrap_or(5000),
    };
    let rep = limit_comparison(&cfg)?;
    let rows: Vec<Vec<String>> = rep.scaled.iter().map(|r| fmt_row(r)).collect();
    let header: Vec<String> = (0..rep.ks.len()).map(|k| format!("scaled{k}")).collect();
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let result = if sink.write_table("scaled", &header, &rows)?.is_some() {
        json!({ "ks": rep.ks, "boundary_mass": rep.boundary_mass, "failures": rep.failures })
    } else {
        to_value(&rep)
    };
    sink.write_json(name, to_value(&cfg), result, Map::new())
}

fn limit_sim(name: &str, o: &Opts, sink: &Sink) -> Result<()> {
    let seed = seed(o, "limit-sim")?;
    let model = model(o)?;
    let est = estimator(o)?;
    let (radius, points, draws) = (o.radius.unwrap_or(3.0), o.points.unwrap_or(401), o.draws.unwrap_or(5000));
    let spec = limit_spec_for(&model, &est, radius, points)?;
    let sample = simulate_argmax_law(&spec, draws, seed)?;
    let rows: Vec<Vec<String>> = sample.draws.iter().map(|r| fmt_row(r)).collect();
    let header: Vec<String> = (0..spec.d).map(|k| format!("argmax{k}")).collect();
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    sink.write_table("draws", &header, &rows)?;
    let result = json!({
        "boundary_mass": sample.boundary_mass,
        "jitter": sample.jitter,
        "nodes": sample.nodes,
        "probs": SUMMARY_PROBS,
        "quantiles": summary_quantiles(&sample, &SUMMARY_PROBS),
        "drift": spec.v.row_iter().map(|r| r.iter().copied().collect::<Vec<f64>>()).collect::<Vec<_>>(),
    });
    let config = json!({
        "dgp": to_value(&model),
        "estimator": to_value(&est),
        "radius": radius,
        "points": points,
        "draws": draws,
        "seed": seed,
    });
    sink.write_json(name, config, result, Map::new())
}

fn gen(o: &Opts) -> Result<()> {
    let seed = seed(o, "gen")?;
    let m = model(o)?;
    let s = generate(&m, single_n(o, None)?, seed)?;
    match &o.output {
        Some(p) => s.write_csv(fs::File::create(p)?),
        None => s.write_csv(std::io::stdout().lock()),
    }
}
