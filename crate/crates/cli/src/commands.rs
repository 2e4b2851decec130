use std::path::PathBuf;
use std::process::ExitCode;

use gcid_core::levy::PowerDensity;
use gcid_core::onoff::{check_assumptions, convergence_study, ArrayKind};
use gcid_core::stats::{cf_distance, empirical_cf, CfReport, SampleMatrix, ThetaGrid};
use gcid_core::verify::{run_verify, VerifyOptions};
use gcid_core::{CorrelationStructure, GcidProcess, LevyMeasure, OnOffArraySpec};
use num_complex::Complex64;
use serde::Serialize;

use crate::config::{checked, missing, parse_json, usage, RunConfig};
use crate::output::{csv_bytes, samples_csv, Sink};
use crate::Invocation;

/// Loads `--config` and applies flag overrides.
fn merged(name: &str, inv: &Invocation) -> anyhow::Result<RunConfig> {
    let mut cfg = RunConfig::load(inv.common.config.as_deref(), name)?;
    let i = &inv.inputs;
    let c = &inv.common;
    if c.seed.is_some() {
        cfg.seed = c.seed;
    }
    if c.reps.is_some() {
        cfg.reps = c.reps;
    }
    if let Some(s) = &i.law {
        cfg.law = Some(parse_json("--law", s)?);
    }
    if let Some(s) = &i.structure {
        cfg.structure = Some(parse_json("--structure", s)?);
    }
    if let Some(s) = &i.model {
        cfg.model = Some(parse_json("--model", s)?);
    }
    if let Some(s) = &i.array {
        cfg.array = Some(parse_json("--array", s)?);
    }
    if let Some(s) = &i.limit_measure {
        cfg.limit_measure = Some(parse_json("--limit-measure", s)?);
    }
    if let Some(s) = &i.theta_grid {
        cfg.theta_grid = Some(parse_json("--theta-grid", s)?);
    }
    if i.grid.is_some() {
        cfg.grid = i.grid.clone();
    }
    if i.theta.is_some() {
        cfg.theta = i.theta.clone();
        // A θ flag replaces any θ-grid from the file.
        if i.theta_grid.is_none() {
            cfg.theta_grid = None;
        }
    }
    if i.n.is_some() {
        cfg.n = i.n;
    }
    if i.n_list.is_some() {
        cfg.n_list = i.n_list.clone();
    }
    if i.x_probe.is_some() {
        cfg.x_probe = i.x_probe.clone();
    }
    if i.eps_list.is_some() {
        cfg.eps_list = i.eps_list.clone();
    }
    if i.bias_allowance.is_some() {
        cfg.bias_allowance = i.bias_allowance;
    }
    if i.cases.is_some() {
        cfg.cases = i.cases;
    }
    if i.mc_reps.is_some() {
        cfg.mc_reps = i.mc_reps;
    }
    Ok(cfg)
}

fn path_of(flag: &Option<PathBuf>, file: &Option<String>) -> Option<PathBuf> {
    flag.clone().or_else(|| file.as_ref().map(PathBuf::from))
}

pub fn run(name: &str, inv: &Invocation) -> anyhow::Result<ExitCode> {
    let cfg = merged(name, inv)?;
    let force = inv.common.force;
    let out = Sink::new(path_of(&inv.common.out, &cfg.out), force)?;
    let report = path_of(&inv.inputs.report, &cfg.report)
        .map(|p| Sink::new(Some(p), force))
        .transpose()?;
    let csv = path_of(&inv.inputs.csv, &cfg.csv)
        .map(|p| Sink::new(Some(p), force))
        .transpose()?;
    match name {
        "cf-eval" => cf_eval(&cfg, &out),
        "sample" => sample(&cfg, &out, report.as_ref()),
        "simulate-coverage" => simulate_coverage(&cfg, &out, report.as_ref()),
        "simulate-onoff" => simulate_onoff(&cfg, &out, report.as_ref()),
        "check-array" => check_array(&cfg, &out, inv.inputs.strict),
        "convergence" => convergence(&cfg, &out, csv.as_ref()),
        "verify" => verify(&cfg, &out),
        other => Err(usage(format!("unknown command {other}"))),
    }
}

#[derive(Serialize)]
struct ComplexOut {
    re: f64,
    im: f64,
}

impl From<Complex64> for ComplexOut {
    fn from(z: Complex64) -> Self {
        Self { re: z.re, im: z.im }
    }
}

#[derive(Serialize)]
struct CfPoint {
    theta: Vec<f64>,
    log_cf: ComplexOut,
    cf: ComplexOut,
}

#[derive(Serialize)]
struct CfEvalOut<'a> {
    grid: &'a [f64],
    points: Vec<CfPoint>,
}

fn process(cfg: &RunConfig) -> anyhow::Result<GcidProcess> {
    let law = cfg.law.clone().ok_or_else(|| missing("law", "--law"))?;
    checked("law", law.validate())?;
    // H does not enter one-epoch laws, so a single epoch needs no structure.
    let structure = match (&cfg.structure, cfg.grid.as_ref().map(Vec::len)) {
        (Some(s), _) => s.clone(),
        (None, Some(1)) => CorrelationStructure::Exponential { rate: 1.0 },
        (None, _) => return Err(missing("structure", "--structure")),
    };
    checked("structure", structure.validate())?;
    checked("law", GcidProcess::new(law, structure))
}

fn cf_eval(cfg: &RunConfig, out: &Sink) -> anyhow::Result<ExitCode> {
    let grid = cfg.grid()?;
    let p = process(cfg)?;
    let thetas = cfg.thetas(grid.len())?;
    let points = thetas
        .points()
        .into_iter()
        .map(|theta| {
            let lc = p.log_cf(&grid, &theta)?;
            Ok(CfPoint {
                theta,
                log_cf: lc.into(),
                cf: lc.exp().into(),
            })
        })
        .collect::<anyhow::Result<Vec<_>>>()?;
    out.write_json(&CfEvalOut {
        grid: grid.epochs(),
        points,
    })?;
    Ok(ExitCode::SUCCESS)
}

/// Empirical CF of `samples` against `analytic(θ)` on the configured θ-grid.
fn cf_report(
    cfg: &RunConfig,
    samples: &SampleMatrix,
    analytic: impl Fn(&[f64]) -> gcid_core::Result<Complex64>,
) -> anyhow::Result<CfReport> {
    let thetas = cfg.thetas(samples.cols())?;
    let emp = empirical_cf(samples, &thetas)?;
    let exact = thetas
        .points()
        .iter()
        .map(|th| analytic(th))
        .collect::<gcid_core::Result<Vec<_>>>()?;
    Ok(CfReport::new(&thetas, &emp, Some(cf_distance(&emp, &exact)?)))
}

fn sample(cfg: &RunConfig, out: &Sink, report: Option<&Sink>) -> anyhow::Result<ExitCode> {
    let grid = cfg.grid()?;
    let p = process(cfg)?;
    let reps = cfg.reps()?;
    let sampler = p.sampler(&grid, cfg.sampler.unwrap_or_default())?;
    let samples = sampler.sample_many(reps, cfg.seed())?;
    out.write(&samples_csv(&samples)?)?;
    if let Some(r) = report {
        r.write_json(&cf_report(cfg, &samples, |th| Ok(p.log_cf(&grid, th)?.exp()))?)?;
    }
    Ok(ExitCode::SUCCESS)
}

fn simulate_coverage(cfg: &RunConfig, out: &Sink, report: Option<&Sink>) -> anyhow::Result<ExitCode> {
    let model = cfg.model.clone().ok_or_else(|| missing("model", "--model"))?;
    checked("model", model.validate())?;
    let grid = cfg.grid()?;
    let reps = cfg.reps()?;
    let samples = checked("model", model.simulator(&grid))?.sample_many(reps, cfg.seed())?;
    out.write(&samples_csv(&samples)?)?;
    if let Some(r) = report {
        r.write_json(&cf_report(cfg, &samples, |th| Ok(model.joint_cf_analytic(&grid, th)?.exp()))?)?;
    }
    Ok(ExitCode::SUCCESS)
}

fn array(cfg: &RunConfig) -> anyhow::Result<OnOffArraySpec> {
    let spec = cfg.array.clone().ok_or_else(|| missing("array", "--array"))?;
    checked("array", spec.validate())?;
    Ok(spec)
}

fn simulate_onoff(cfg: &RunConfig, out: &Sink, report: Option<&Sink>) -> anyhow::Result<ExitCode> {
    let spec = array(cfg)?;
    let n = cfg.n.ok_or_else(|| missing("n", "--n"))?;
    let row = checked("n", spec.row(n))?;
    let grid = cfg.grid()?;
    let reps = cfg.reps()?;
    let samples = row.sampler(&grid).sample_many(reps, cfg.seed())?;
    out.write(&samples_csv(&samples)?)?;
    if let Some(r) = report {
        r.write_json(&cf_report(cfg, &samples, |th| row.exact_cf(&grid, th))?)?;
    }
    Ok(ExitCode::SUCCESS)
}

/// The configured limit measure, or the known limit of a built-in array.
fn limit_measure(cfg: &RunConfig, spec: &OnOffArraySpec) -> anyhow::Result<LevyMeasure> {
    let nu = match (&cfg.limit_measure, &spec.kind) {
        (Some(nu), _) => nu.clone(),
        (None, ArrayKind::PowerExample { b, .. }) => LevyMeasure::Density(PowerDensity::log_uniform(*b)),
        (None, ArrayKind::Uniform { c, r }) => LevyMeasure::Atomic {
            locations: vec![*r],
            masses: vec![*c],
        },
        (None, ArrayKind::Explicit { .. }) => return Err(missing("limit_measure", "--limit-measure")),
    };
    checked("limit_measure", nu.validate())?;
    Ok(nu)
}

fn check_array(cfg: &RunConfig, out: &Sink, strict: bool) -> anyhow::Result<ExitCode> {
    let spec = array(cfg)?;
    let nu = limit_measure(cfg, &spec)?;
    let n_list = cfg.n_list.clone().unwrap_or_else(|| vec![100, 1000, 10_000]);
    let x_probe = cfg.x_probe.clone().unwrap_or_else(|| vec![0.25, 0.5, 0.75]);
    let eps_list = cfg.eps_list.clone().unwrap_or_else(|| vec![0.1, 0.05]);
    let probe = cfg.probe.clone().unwrap_or_default();
    let rep = check_assumptions(&spec, &nu, &n_list, &x_probe, &eps_list, &probe)?;
    for c in &rep.checks {
        let status = if c.pass { "PASS" } else { "FAIL" };
        let last = c.observed.last().copied().unwrap_or(f64::NAN);
        eprintln!("{status} {} observed={last} target={:?} error={:?}", c.name, c.target, c.final_error);
    }
    out.write_json(&rep)?;
    Ok(if strict && !rep.all_pass() {
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    })
}

fn convergence(cfg: &RunConfig, out: &Sink, csv: Option<&Sink>) -> anyhow::Result<ExitCode> {
    let spec = array(cfg)?;
    let nu = limit_measure(cfg, &spec)?;
    let grid = cfg.grid()?;
    let thetas: ThetaGrid = cfg.thetas(grid.len())?;
    let n_list = cfg.n_list.clone().unwrap_or_else(|| vec![100, 1000, 10_000]);
    let reps = cfg.reps()?;
    let bias = cfg.bias_allowance.unwrap_or(0.0);
    let rep = convergence_study(&spec, &nu, &grid, &thetas, &n_list, reps, cfg.seed(), bias)?;
    out.write_json(&rep)?;
    if let Some(c) = csv {
        let header: Vec<String> = [
            "n",
            "sup_distance",
            "l2_distance",
            "exact_bias",
            "max_stderr",
            "noise_allowance",
            "tolerance",
            "pass",
        ]
        .map(String::from)
        .to_vec();
        let rows = rep.rows.iter().map(|r| {
            vec![
                r.n.to_string(),
                r.sup_distance.to_string(),
                r.l2_distance.to_string(),
                r.exact_bias.to_string(),
                r.max_stderr.to_string(),
                r.noise_allowance.to_string(),
                r.tolerance.to_string(),
                r.pass.to_string(),
            ]
        });
        c.write(&csv_bytes(&header, rows)?)?;
    }
    Ok(ExitCode::SUCCESS)
}

fn verify(cfg: &RunConfig, out: &Sink) -> anyhow::Result<ExitCode> {
    let d = VerifyOptions::default();
    let opts = VerifyOptions {
        seed: cfg.seed.unwrap_or(d.seed),
        cases: cfg.cases.unwrap_or(d.cases),
        mc_reps: cfg.mc_reps.unwrap_or(d.mc_reps),
    };
    if opts.cases == 0 {
        return Err(usage("field `cases`: must be at least 1"));
    }
    let rep = run_verify(&opts)?;
    let mut lines = String::new();
    for c in &rep.checks {
        if c.pass {
            lines.push_str(&format!("PASS {} worst={:e} tolerance={:e}\n", c.name, c.worst, c.tolerance));
        } else {
            lines.push_str(&format!(
                "FAIL {} worst={:e} tolerance={:e}: {}\n",
                c.name, c.worst, c.tolerance, c.detail
            ));
        }
    }
    if out.is_stdout() {
        out.write(lines.as_bytes())?;
    } else {
        print!("{lines}");
        out.write_json(&rep)?;
    }
    Ok(if rep.all_pass() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}
