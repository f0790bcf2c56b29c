use std::fmt;
use std::fs;
use std::path::PathBuf;

use rpe::harness::{
    self, failure_histogram, sidecar_path, Degenerate, EstimateHistogram, SweepAxis, SweepRun,
    SweepSpec, TrialConfig,
};
use rpe::noise;
use rpe::oracle::{self, Tolerances};
use rpe::plot;
use rpe::RpeError;

use crate::config::Config;
use crate::{Command, Options};

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Config(_) => 1,
            Self::Runtime(_) => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Config(m) | Self::Runtime(m) => f.write_str(m),
        }
    }
}

fn config_err(e: RpeError) -> CliError {
    CliError::Config(e.to_string())
}

fn runtime_err(e: RpeError) -> CliError {
    CliError::Runtime(e.to_string())
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Files written by the current command; removed again unless the command
/// finishes.
struct Outputs {
    paths: Vec<PathBuf>,
    done: bool,
}

impl Outputs {
    fn new() -> Self {
        Self {
            paths: Vec::new(),
            done: false,
        }
    }

    fn track(&mut self, p: PathBuf) -> PathBuf {
        self.paths.push(p.clone());
        p
    }

    fn write(&mut self, path: PathBuf, contents: &str) -> CliResult<()> {
        let path = self.track(path);
        fs::write(&path, contents)
            .map_err(|e| CliError::Runtime(format!("writing {}: {e}", path.display())))
    }

    fn finish(mut self) {
        self.done = true;
    }
}

impl Drop for Outputs {
    fn drop(&mut self) {
        if !self.done {
            for p in &self.paths {
                let _ = fs::remove_file(p);
            }
        }
    }
}

struct Ctx {
    config: Config,
    out: PathBuf,
    plot: bool,
    trials: Option<u64>,
    degenerate: Degenerate,
    threads: Option<usize>,
}

pub fn run(command: Command, opts: &Options) -> CliResult<()> {
    let mut config =
        Config::load(opts.config.as_deref()).map_err(|e| CliError::Config(e.to_string()))?;
    if let Some(seed) = opts.seed {
        config.seed = seed;
    }
    if opts.trials == Some(0) {
        return Err(CliError::Config("--trials must be >= 1".into()));
    }
    if opts.threads == Some(0) {
        return Err(CliError::Config("--threads must be >= 1".into()));
    }
    let ctx = Ctx {
        config,
        out: opts.out.clone(),
        plot: opts.plot,
        trials: opts.trials,
        degenerate: if opts.strict {
            Degenerate::Strict
        } else {
            Degenerate::Flag
        },
        threads: opts.threads,
    };
    match command {
        Command::Calibrate => calibrate(&ctx),
        Command::SweepDetection => sweep_detection(&ctx),
        Command::SweepPrep => sweep_prep(&ctx),
        Command::SweepDamping => sweep_damping(&ctx),
        Command::Histogram => histogram(&ctx),
        Command::Oracle => run_oracle(&ctx, opts.tolerance),
    }
}

fn base(ctx: &Ctx, samples: u32, detection: bool) -> TrialConfig {
    let mut b = ctx.config.base_trial(samples);
    b.degenerate = ctx.degenerate;
    if detection {
        b.noise.detector = Some(ctx.config.detector.model());
    }
    b
}

fn calibrate(ctx: &Ctx) -> CliResult<()> {
    let sec = &ctx.config.calibrate;
    let cfg = base(ctx, sec.samples, !sec.ideal_detection);
    cfg.validate().map_err(config_err)?;
    let trials = ctx.trials.unwrap_or(sec.trials);
    let bound = cfg.half_width();

    let mut successes = 0;
    let mut worst = 0.0f64;
    for i in 0..trials {
        let o = harness::run_trial(&cfg, i).map_err(runtime_err)?;
        let theta = o.result.theta_est;
        if i == 0 {
            println!("theta_est = {theta:.6} rad");
            println!("bound = ±{bound:.6} rad (pi/2^{})", cfg.generations());
            println!("fractional uncertainty = {:.2}%", 100.0 * bound / theta);
        }
        successes += u64::from(o.success);
        worst = worst.max(rpe::estimator::circular_distance(theta, cfg.theta_ref));
    }
    println!(
        "within bound of theta_ref = {:.6}: {successes}/{trials} trials (worst offset {worst:.6} rad)",
        cfg.theta_ref
    );
    Ok(())
}

fn finish_sweep(ctx: &Ctx, stem: &str, run: &SweepRun, title: &str, two_d: bool) -> CliResult<()> {
    fs::create_dir_all(&ctx.out)
        .map_err(|e| CliError::Runtime(format!("creating {}: {e}", ctx.out.display())))?;
    let mut outputs = Outputs::new();
    let table = outputs.track(ctx.out.join(format!("{stem}.csv")));
    outputs.track(sidecar_path(&table));
    harness::persist(&run.result, &table).map_err(runtime_err)?;
    if ctx.plot {
        let svg = if two_d {
            plot::grid_svg(&run.result, title)
        } else {
            plot::failure_rate_svg(&run.result, title)
        };
        outputs.write(ctx.out.join(format!("{stem}.svg")), &svg)?;
    }
    outputs.finish();

    for p in &run.result.points {
        let secondary = p
            .secondary_axis_value
            .map_or(String::new(), |v| format!(" / {v}"));
        println!(
            "{} = {}{secondary}: {}/{} failed ({:.2}, CI {:.2}-{:.2}), predicted delta {:.3}",
            p.axis_name,
            p.axis_value,
            p.failures,
            p.trials,
            p.failure_rate,
            p.ci_low,
            p.ci_high,
            p.predicted_delta
        );
    }
    println!("wrote {}", table.display());
    Ok(())
}

fn prepare(ctx: &Ctx, base: &TrialConfig, mut spec: SweepSpec) -> CliResult<SweepSpec> {
    spec.threads = ctx.threads;
    spec.validate().map_err(config_err)?;
    base.validate().map_err(config_err)?;
    for p in &spec.grid {
        spec.materialize(base, p).map_err(config_err)?;
    }
    Ok(spec)
}

fn run_sweep(ctx: &Ctx, base: &TrialConfig, spec: SweepSpec) -> CliResult<SweepRun> {
    let spec = prepare(ctx, base, spec)?;
    harness::sweep(base, &spec).map_err(runtime_err)
}

fn sweep_detection(ctx: &Ctx) -> CliResult<()> {
    let sec = &ctx.config.sweep_detection;
    let b = base(ctx, sec.samples, true);
    let grid: Vec<f64> = sec.threshold_counts.iter().map(|&t| f64::from(t)).collect();
    let spec = SweepSpec::one_axis(
        SweepAxis::Threshold,
        &grid,
        ctx.trials.unwrap_or(sec.trials),
    );
    let run = run_sweep(ctx, &b, spec)?;
    finish_sweep(
        ctx,
        "sweep_detection",
        &run,
        "Failure rate vs detector threshold",
        false,
    )
}

fn sweep_prep(ctx: &Ctx) -> CliResult<()> {
    let sec = &ctx.config.sweep_prep;
    let b = base(ctx, sec.samples.first().copied().unwrap_or(1), true);
    let samples: Vec<f64> = sec.samples.iter().map(|&m| f64::from(m)).collect();
    let mut spec = SweepSpec::two_axis(
        SweepAxis::PrepTime,
        &sec.prep_time_us,
        SweepAxis::Samples,
        &samples,
        ctx.trials.unwrap_or(sec.trials),
    );
    spec.prep_curve = sec.curve();
    let run = run_sweep(ctx, &b, spec)?;
    finish_sweep(
        ctx,
        "sweep_prep",
        &run,
        "Failure rate vs preparation time and samples",
        true,
    )
}

fn damping_lambda_ref(ctx: &Ctx, b: &TrialConfig) -> CliResult<f64> {
    let sec = &ctx.config.sweep_damping;
    match sec.lambda_ref {
        Some(l) => Ok(l),
        None => noise::lambda_ref_for_delta(sec.target_delta, b.longest_sequence(), sec.target_db)
            .map_err(config_err),
    }
}

fn sweep_damping(ctx: &Ctx) -> CliResult<()> {
    let sec = &ctx.config.sweep_damping;
    let b = base(ctx, sec.samples, true);
    let mut spec = SweepSpec::one_axis(
        SweepAxis::LambdaDb,
        &sec.intensity_db,
        ctx.trials.unwrap_or(sec.trials),
    );
    spec.lambda_ref = damping_lambda_ref(ctx, &b)?;
    println!("lambda_ref = {:.6}", spec.lambda_ref);
    let run = run_sweep(ctx, &b, spec)?;
    finish_sweep(
        ctx,
        "sweep_damping",
        &run,
        "Failure rate vs damping intensity",
        false,
    )
}

fn histogram(ctx: &Ctx) -> CliResult<()> {
    let sec = &ctx.config.histogram;
    let trials = ctx.trials.unwrap_or(sec.trials);
    let b = base(ctx, sec.samples, true);

    let mut runs = Vec::new();
    if !sec.intensity_db.is_empty() {
        let mut spec = SweepSpec::one_axis(SweepAxis::LambdaDb, &sec.intensity_db, trials);
        spec.lambda_ref = damping_lambda_ref(ctx, &b)?;
        runs.push(prepare(ctx, &b, spec)?);
    }
    if !sec.threshold_counts.is_empty() {
        let grid: Vec<f64> = sec.threshold_counts.iter().map(|&t| f64::from(t)).collect();
        runs.push(prepare(
            ctx,
            &b,
            SweepSpec::one_axis(SweepAxis::Threshold, &grid, trials),
        )?);
    }
    if runs.is_empty() {
        return Err(CliError::Config(
            "histogram needs intensity_db or threshold_counts".into(),
        ));
    }

    let mut panels: Vec<(String, EstimateHistogram)> = Vec::new();
    for spec in &runs {
        let run = harness::sweep(&b, spec).map_err(runtime_err)?;
        for (point, outcomes) in run.result.points.iter().zip(&run.outcomes) {
            let results: Vec<_> = outcomes.iter().map(|o| o.result.clone()).collect();
            let h =
                failure_histogram(&results, b.theta_ref, b.max_exponent).map_err(runtime_err)?;
            panels.push((format!("{} = {}", point.axis_name, point.axis_value), h));
        }
    }

    fs::create_dir_all(&ctx.out)
        .map_err(|e| CliError::Runtime(format!("creating {}: {e}", ctx.out.display())))?;
    let mut outputs = Outputs::new();
    let mut csv = String::from("panel,bin_center_rad,count\n");
    for (label, h) in &panels {
        for (center, count) in h.bin_centers().zip(&h.counts) {
            csv.push_str(&format!("{label},{center:.9},{count}\n"));
        }
    }
    outputs.write(ctx.out.join("histogram.csv"), &csv)?;
    if ctx.plot {
        let svg = plot::histogram_svg(&panels, "RPE estimates around the reference angle");
        outputs.write(ctx.out.join("histogram.svg"), &svg)?;
    }
    outputs.finish();

    for (label, h) in &panels {
        let within = h
            .fraction_failures_within_twice()
            .map_or("n/a".to_string(), |f| format!("{:.0}%", 100.0 * f));
        println!(
            "{label}: {} failures of {}, {within} of failures within twice the bound",
            h.failures, h.total
        );
    }
    Ok(())
}

fn run_oracle(ctx: &Ctx, tolerance: Option<f64>) -> CliResult<()> {
    let tol = match tolerance {
        Some(t) if !(t > 0.0 && t.is_finite()) => {
            return Err(CliError::Config(format!(
                "--tolerance must be > 0, got {t}"
            )))
        }
        Some(t) => Tolerances::uniform(t),
        None => Tolerances::default(),
    };
    let reports = oracle::run_all(&tol, ctx.config.seed);
    for r in &reports {
        println!(
            "{} {}: {} cases, max deviation {:.3e}, tolerance {:.1e}",
            if r.passed { "PASS" } else { "FAIL" },
            r.name,
            r.cases,
            r.max_deviation,
            r.tolerance
        );
    }
    match reports.iter().find(|r| !r.passed) {
        Some(r) => Err(CliError::Runtime(format!("oracle '{}' failed", r.name))),
        None => Ok(()),
    }
}
