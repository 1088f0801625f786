use std::f64::consts::PI;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::sync::Arc;
use std::time::Instant;

use jmgt_core::analysis::dissipation::fit_lyapunov;
use jmgt_core::analysis::sampling::random_state;
use jmgt_core::analysis::{
    fit_decay, generator_dissipativity, global_bound_experiment, norm_equivalence, picard_solve, picard_vs_direct,
    resolvent_residual, resolvent_solve, spatial_study, temporal_study, verify_dissipation, ConvergenceTable,
    Functional, GlobalConfig, PicardConfig, SampleSpec, ScanConfig, StudyConfig, Verdict,
};
use jmgt_core::dynamics::manufactured::SpatialProfile;
use jmgt_core::dynamics::{simulate, MemoryMode, SimulationConfig, Unforced};
use jmgt_core::energy::{EnergyObserver, EnergyReport};
use jmgt_core::io::{write_checkpoint, write_energy_csv};
use jmgt_core::kernel::{check_assumptions, MemoryKernel};
use jmgt_core::spectral::Grid;
use jmgt_core::state::SystemParams;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::config::{HistoryModeSpec, RunConfig};
use crate::error::CliError;
use crate::setup;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub struct Context {
    pub config: RunConfig,
    pub hash: String,
    pub out_dir: PathBuf,
    pub quiet: bool,
}

impl Context {
    pub fn new(config: RunConfig, out_dir: PathBuf, quiet: bool) -> Result<Self, CliError> {
        fs::create_dir_all(&out_dir).map_err(|e| CliError::io(&out_dir, e))?;
        let hash = config.hash();
        Ok(Self {
            config,
            hash,
            out_dir,
            quiet,
        })
    }

    fn say(&self, line: impl AsRef<str>) {
        if !self.quiet {
            println!("{}", line.as_ref());
        }
    }

    fn provenance(&self) -> String {
        format!("jmgt {VERSION} config {} seed {}", self.hash, self.config.seed)
    }

    fn create(&self, name: &str) -> Result<(PathBuf, BufWriter<File>), CliError> {
        let path = self.out_dir.join(name);
        let file = File::create(&path).map_err(|e| CliError::io(&path, e))?;
        Ok((path, BufWriter::new(file)))
    }

    fn write_json(&self, name: &str, mut body: Value) -> Result<(), CliError> {
        let header = json!({
            "version": VERSION,
            "config_hash": self.hash,
            "seed": self.config.seed,
        });
        if let (Value::Object(h), Value::Object(b)) = (header, &mut body) {
            for (k, v) in h.into_iter().rev() {
                b.insert(k, v);
            }
        }
        let (path, mut out) = self.create(name)?;
        serde_json::to_writer_pretty(&mut out, &body).map_err(|e| CliError::io(&path, e))?;
        writeln!(out).and_then(|_| out.flush()).map_err(|e| CliError::io(&path, e))?;
        self.say(format!("wrote {}", path.display()));
        Ok(())
    }

    fn write_text(&self, name: &str, body: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>) -> Result<(), CliError> {
        let (path, mut out) = self.create(name)?;
        body(&mut out).and_then(|_| out.flush()).map_err(|e| CliError::io(&path, e))?;
        self.say(format!("wrote {}", path.display()));
        Ok(())
    }

    /// Builds the parameters and prints admissibility.
    fn params(&self) -> Result<SystemParams, CliError> {
        let p = setup::params(&self.config)?;
        self.say(format!(
            "config {}  kernel mass {:.6}  c_g² {:.6}  b − τc² {:+.6}  regime {}",
            self.hash,
            p.mass(),
            p.cg2(),
            p.delta(),
            p.regime().as_str()
        ));
        Ok(p)
    }
}

fn params_json(p: &SystemParams) -> Value {
    json!({
        "tau": p.tau(),
        "b": p.b(),
        "c2": p.c2(),
        "k": p.k(),
        "kernel_mass": p.mass(),
        "cg2": p.cg2(),
        "delta": p.delta(),
    })
}

fn to_json(value: impl serde::Serialize) -> Value {
    serde_json::to_value(value).expect("serializable")
}

fn run_trajectory(ctx: &Context, params: &SystemParams) -> Result<(EnergyReport, jmgt_core::dynamics::SimulationOutcome), CliError> {
    let c = &ctx.config;
    setup::require_energies(c, params)?;
    let grid = setup::grid(c)?;
    let initial = setup::initial_state(c, params, &grid)?;
    let sim = SimulationConfig::new(c.run.horizon, c.run.dt, setup::rhs(c)).with_stride(c.run.stride);
    let mut obs = EnergyObserver::new(params, c.run.p, c.run.nonlinear);
    let outcome = simulate(params, initial, &sim, &Unforced, &mut [&mut obs])?;
    Ok((obs.report, outcome))
}

pub fn simulate_cmd(ctx: &Context) -> Result<(), CliError> {
    let start = Instant::now();
    let params = ctx.params()?;
    let (report, outcome) = run_trajectory(ctx, &params)?;
    let wall = start.elapsed().as_secs_f64();

    let provenance = ctx.provenance();
    let (path, mut out) = ctx.create("timeseries.csv")?;
    write_energy_csv(&mut out, &report, &provenance)?;
    out.flush().map_err(|e| CliError::io(&path, e))?;
    ctx.say(format!("wrote {}", path.display()));

    let script_e = report.series(0, |k| k.script_e);
    let fit = fit_decay(&report.times(), &script_e).ok();
    let verdict = Verdict::from_proxy(outcome.proxy_initial, outcome.proxy_final, outcome.blowup.is_some());
    ctx.say(format!(
        "t = {:.4} after {} steps: verdict {}, decay rate {}",
        outcome.t,
        outcome.steps,
        verdict.as_str(),
        fit.map_or("n/a".into(), |f| format!("{:.6} (R² {:.5})", f.rate, f.r_squared))
    ));

    if ctx.config.run.checkpoint {
        let (path, mut out) = ctx.create("final.ckpt")?;
        write_checkpoint(&mut out, &outcome.state, &params, outcome.t, &provenance)?;
        out.flush().map_err(|e| CliError::io(&path, e))?;
        ctx.say(format!("wrote {}", path.display()));
    }

    ctx.write_json(
        "summary.json",
        json!({
            "params": params_json(&params),
            "regime": params.regime(),
            "verdict": verdict,
            "decay_rate": fit.map(|f| f.rate),
            "r_squared": fit.map(|f| f.r_squared),
            "t_final": outcome.t,
            "steps": outcome.steps,
            "blowup": outcome.blowup,
            "wall_time_s": wall,
        }),
    )
}

pub fn verify_cmd(ctx: &Context) -> Result<(), CliError> {
    let c = &ctx.config;
    let params = ctx.params()?;
    let grid = setup::grid(c)?;
    let spec = SampleSpec {
        max_mode: c.verify.max_mode,
        ..SampleSpec::default()
    };
    let mut checks = Vec::new();
    let mut all = true;
    let mut record = |name: &str, pass: bool, detail: Value, ctx: &Context| {
        ctx.say(format!("{:<28} {}", name, if pass { "PASS" } else { "FAIL" }));
        all &= pass;
        checks.push(json!({ "check": name, "pass": pass, "detail": detail }));
    };

    let weights = setup::history_weights(c, &params)?;
    let kernel_report = check_assumptions(params.kernel(), params.c2(), &weights.grid().nodes(), 1e-10)?;
    record("kernel assumptions", kernel_report.all_pass(), to_json(kernel_report), ctx);

    let (report, _) = run_trajectory(ctx, &params)?;
    for kappa in 0..=c.run.p {
        for which in [Functional::E1, Functional::E2, Functional::W, Functional::Lyapunov] {
            let v = verify_dissipation(&report, which, &params, kappa)?;
            record(&format!("dissipation {} κ={kappa}", which.as_str()), v.pass, to_json(v), ctx);
        }
    }
    let lyap = fit_lyapunov(&report, &params, 0).ok().map(|(fit, residual)| {
        json!({ "l1": fit.weights.l1, "l2": fit.weights.l2, "eps": fit.weights.eps, "rate": fit.rate, "residual": residual })
    });

    let m = c.verify.m;
    let gen = generator_dissipativity(&params, &grid, &weights, m, c.verify.samples, c.seed, &spec)?;
    record("generator dissipativity", gen.max_ratio <= 1e-8, to_json(gen), ctx);

    let equiv = norm_equivalence(&params, &grid, &weights, m, c.verify.samples, c.seed, &spec)?;
    record("norm equivalence", equiv.c1 > 0.0 && equiv.c2.is_finite(), to_json(equiv), ctx);

    let (picard, _) = picard_run(ctx, &params, &grid)?;
    record("picard contraction", picard.converged, to_json(&picard), ctx);

    if c.verify.global {
        let (p0, p1, _) = setup::initial_fields(c, &grid)?;
        let cfg = GlobalConfig {
            horizon: c.verify.global_horizon,
            dt: c.verify.global_dt,
            history: setup::history(c),
            ..GlobalConfig::default()
        };
        let g = global_bound_experiment(&params, &p0, &p1, c.verify.global_amplitude, &cfg)?;
        let detail = json!({
            "amplitude": g.amplitude,
            "verdict": g.verdict,
            "reference": g.reference,
            "max_norm": g.max_norm,
            "blowup_time": g.blowup_time,
            "bootstrap": g.bootstrap,
        });
        record("small-data boundedness", g.verdict != Verdict::Growth, detail, ctx);
    }

    ctx.say(format!("verification {}", if all { "passed" } else { "failed" }));
    ctx.write_json(
        "verification.json",
        json!({
            "params": params_json(&params),
            "regime": params.regime(),
            "pass": all,
            "checks": checks,
            "constants": {
                "c1": equiv.c1,
                "c2": equiv.c2,
                "picard_q": picard.q,
                "lyapunov": lyap,
            },
            "seeds": { "sampling": c.seed },
        }),
    )
}

fn picard_run(
    ctx: &Context,
    params: &SystemParams,
    grid: &Arc<Grid>,
) -> Result<(jmgt_core::analysis::PicardResult, f64), CliError> {
    let c = &ctx.config;
    let initial = setup::initial_state(c, params, grid)?.scaled(c.picard.scale);
    let mut cfg = PicardConfig::new(c.picard.horizon, c.picard.dt);
    cfg.tol = c.picard.tol;
    cfg.max_iter = c.picard.max_iter;
    cfg.memory_mode = setup::memory_mode(c);
    let (result, path) = picard_solve(params, &initial, &cfg)?;
    let diff = picard_vs_direct(params, &initial, &cfg, &path)?;
    Ok((result, diff))
}

pub fn picard_cmd(ctx: &Context) -> Result<(), CliError> {
    let params = ctx.params()?;
    let grid = setup::grid(&ctx.config)?;
    let start = Instant::now();
    let (result, diff) = picard_run(ctx, &params, &grid)?;
    ctx.say(format!(
        "{} iterations, q = {}, converged {}, max difference to direct integration {diff:.3e}",
        result.iterations,
        result.q.map_or("n/a".into(), |q| format!("{q:.4e}")),
        result.converged
    ));
    ctx.write_json(
        "picard.json",
        json!({
            "params": params_json(&params),
            "horizon": ctx.config.picard.horizon,
            "dt": ctx.config.picard.dt,
            "result": result,
            "direct_difference": diff,
            "wall_time_s": start.elapsed().as_secs_f64(),
        }),
    )
}

pub fn resolvent_cmd(ctx: &Context) -> Result<(), CliError> {
    let c = &ctx.config;
    if c.history.mode != HistoryModeSpec::Dafermos {
        return Err(CliError::Config("history.mode: the resolvent needs the dafermos history".into()));
    }
    let params = ctx.params()?;
    let grid = setup::grid(c)?;
    let weights = setup::history_weights(c, &params)?;
    let spec = SampleSpec {
        max_mode: c.verify.max_mode,
        ..SampleSpec::default()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(c.seed);
    let mut residuals = Vec::with_capacity(c.resolvent.samples);
    let mut coefficients = None;
    for _ in 0..c.resolvent.samples {
        let data = random_state(&grid, &weights, &mut rng, &spec)?;
        let (sol, coef) = resolvent_solve(&params, &data)?;
        coefficients = Some(coef);
        residuals.push(resolvent_residual(&params, &sol, &data, c.resolvent.m)?);
    }
    let worst = residuals.iter().copied().fold(0.0f64, f64::max);
    let mean = residuals.iter().sum::<f64>() / residuals.len().max(1) as f64;
    ctx.say(format!("{} samples: worst relative residual {worst:.3e}", residuals.len()));
    ctx.write_json(
        "resolvent.json",
        json!({
            "params": params_json(&params),
            "samples": residuals.len(),
            "m": c.resolvent.m,
            "coefficients": coefficients,
            "worst_residual": worst,
            "mean_residual": mean,
            "residuals": residuals,
        }),
    )
}

pub fn scan_cmd(ctx: &Context) -> Result<(), CliError> {
    let c = &ctx.config;
    let params = ctx.params()?;
    let grid = setup::grid(c)?;
    let data = setup::initial_fields(c, &grid)?;
    let cfg = ScanConfig {
        tau: params.tau(),
        c2: params.c2(),
        k: params.k(),
        tau_r: c.kernel.tau_r,
        horizon: c.scan.horizon,
        dt: c.run.dt,
        stride: c.run.stride,
        history: setup::history(c),
    };
    let rows = jmgt_core::analysis::decay_scan(&cfg, &c.scan.b_ratios, &c.scan.masses, &data)?;
    for r in &rows {
        ctx.say(format!(
            "b/τc² {:<6} mass {:<6} {:<14} rate {}",
            r.b_ratio,
            r.mass,
            r.regime.as_str(),
            r.rate.map_or("n/a".into(), |x| format!("{x:.6}"))
        ));
    }
    let provenance = ctx.provenance();
    ctx.write_text("scan.csv", |out| {
        writeln!(out, "# {provenance}")?;
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["b_ratio", "mass", "b", "regime", "rate", "r_squared", "nonincreasing"])?;
        let opt = |x: Option<f64>| x.map(|v| v.to_string()).unwrap_or_default();
        for r in &rows {
            w.write_record([
                r.b_ratio.to_string(),
                r.mass.to_string(),
                r.b.to_string(),
                r.regime.as_str().to_string(),
                opt(r.rate),
                opt(r.r_squared),
                r.nonincreasing.to_string(),
            ])?;
        }
        w.flush()
    })
}

fn table_csv(
    ctx: &Context,
    name: &str,
    column: &str,
    table: &ConvergenceTable,
) -> Result<(), CliError> {
    let provenance = ctx.provenance();
    let orders = table.orders();
    ctx.write_text(name, |out| {
        writeln!(out, "# {provenance}")?;
        let mut w = csv::Writer::from_writer(out);
        w.write_record([column, "error", "ratio", "order"])?;
        for (i, row) in table.rows.iter().enumerate() {
            let (ratio, order) = match i.checked_sub(1) {
                Some(j) => (table.ratios[j].to_string(), orders[j].to_string()),
                None => (String::new(), String::new()),
            };
            w.write_record([row.resolution.to_string(), row.error.to_string(), ratio, order])?;
        }
        w.flush()
    })
}

fn supports_closure(kernel: &MemoryKernel) -> bool {
    matches!(kernel, MemoryKernel::Memoryless | MemoryKernel::Exponential { .. })
}

pub fn convergence_cmd(ctx: &Context) -> Result<(), CliError> {
    let c = &ctx.config;
    let params = ctx.params()?;
    let cv = &c.convergence;
    // Closure is exact in s, so only time and space discretisation remain.
    let memory_mode = if supports_closure(params.kernel()) {
        MemoryMode::Closure
    } else {
        MemoryMode::Dafermos
    };
    let study = |profile, horizon| StudyConfig {
        profile,
        amplitude: cv.amplitude,
        omega: cv.omega,
        horizon,
        memory_mode,
        nonlinear: c.run.nonlinear,
        n_s: c.history.n_s,
        s_max: c.history.s_max,
    };
    let period = 2.0 * PI / cv.omega;
    let line = Grid::cube(1, cv.temporal_points, 2.0 * PI)?;
    let temporal = temporal_study(&params, &line, &cv.dts, &study(SpatialProfile::Mode([1, 0, 0]), period))?;
    let spatial = spatial_study(
        &params,
        &cv.points,
        2.0 * PI,
        cv.spatial_dt,
        &study(SpatialProfile::ExpSine, cv.spatial_horizon),
    )?;
    ctx.say(format!("temporal orders {:?}", temporal.orders()));
    ctx.say(format!(
        "spatial errors {:?}",
        spatial.rows.iter().map(|r| r.error).collect::<Vec<_>>()
    ));
    table_csv(ctx, "convergence_dt.csv", "dt", &temporal)?;
    table_csv(ctx, "convergence_n.csv", "points", &spatial)
}
