//! Command-line front end.

pub mod config;
pub mod expr;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use crate::classical::{liouville_integral, liouville_volume, mu_average, LiouvilleOptions};
use crate::experiments::{
    candidate_laws, dirac_target, fit_scaling, geometric_h, liouville_target, predict_scaling, ratio_limit_points,
    run_scan, run_scenario, solve_window, LawBranch, ScanConfig, ScanTable, SolverOptions, SCENARIOS,
};
use crate::microlocal::{Observable, Quantization, WindowMeasures};
use crate::model::{catalog, catalog_entry, model_from_spec, SymbolModel};
use crate::{Error, Result};
use config::{ConfigFile, Interval};

#[derive(Debug, Parser)]
#[command(name = "semiclab", version, about = "Semiclassical spectra and eigenfunction concentration near critical energies")]
struct Cli {
    /// Flat key = value file supplying defaults for any long option.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads (overrides SEMICLAB_THREADS).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Built-in models.
    Models {
        #[command(subcommand)]
        action: ModelsAction,
    },
    /// Eigenvalues in the window `[E - d h, E + d h]`.
    Spectrum(SpectrumArgs),
    /// Per-eigenpair `nu_j(a)` records.
    Measure(MeasureArgs),
    /// Liouville integral, volume and average on an energy surface.
    Liouville(LiouvilleArgs),
    /// Counting and ratio scan over geometric `h` values.
    Scan(ScanArgs),
    /// Fit scaling laws (and optionally a ratio limit) to a scan CSV.
    Fit(FitArgs),
    /// Named acceptance scenarios.
    Scenario {
        #[command(subcommand)]
        action: ScenarioAction,
    },
}

#[derive(Debug, Subcommand)]
enum ModelsAction {
    List,
}

#[derive(Debug, Subcommand)]
enum ScenarioAction {
    List,
    Run {
        name: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
struct WindowArgs {
    /// Catalog name, or poly1d:c0,c1,..., radial:c0,..., phase:i:j:c,...
    #[arg(long)]
    model: Option<String>,
    /// Window centre; defaults to the catalog critical energy.
    #[arg(long, allow_hyphen_values = true)]
    ecenter: Option<f64>,
    #[arg(long)]
    d: Option<f64>,
    /// Grid points.
    #[arg(long)]
    n: Option<usize>,
    /// Grid interval A,B.
    #[arg(long = "box", allow_hyphen_values = true)]
    interval: Option<Interval>,
    /// Finite-difference order (2 or 4).
    #[arg(long)]
    fd: Option<u32>,
}

#[derive(Debug, Args)]
struct SpectrumArgs {
    #[command(flatten)]
    window: WindowArgs,
    #[arg(long)]
    h: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct MeasureArgs {
    #[command(flatten)]
    window: WindowArgs,
    #[arg(long)]
    h: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    obs: Option<String>,
    /// weyl, antiwick or both.
    #[arg(long)]
    quantization: Option<Quantization>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct LiouvilleArgs {
    #[arg(long)]
    model: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    obs: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    energy: Option<f64>,
    /// Probe divergence at a critical level instead of refusing it.
    #[arg(long)]
    allow_critical: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ScanArgs {
    #[command(flatten)]
    window: WindowArgs,
    #[arg(long)]
    h_from: Option<f64>,
    #[arg(long)]
    h_to: Option<f64>,
    #[arg(long)]
    h_steps: Option<usize>,
    /// Comma-separated observables.
    #[arg(long, allow_hyphen_values = true)]
    obs: Option<String>,
    #[arg(long)]
    quantization: Option<Quantization>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct FitArgs {
    #[arg(long = "in")]
    input: Option<PathBuf>,
    /// auto, regular or critical.
    #[arg(long)]
    law: Option<String>,
    /// Observable index whose ratio column is compared with a target.
    #[arg(long)]
    ratio: Option<usize>,
    /// dirac or liouville.
    #[arg(long)]
    target: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Parse arguments, run, and return the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 4 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn execute(cli: Cli) -> Result<i32> {
    let cfg = match &cli.config {
        Some(p) => ConfigFile::load(p)?,
        None => ConfigFile::default(),
    };
    configure_threads(cfg.resolve(cli.threads, "threads")?)?;
    match cli.command {
        Command::Models { action: ModelsAction::List } => models_list(),
        Command::Spectrum(a) => spectrum(&cfg, a),
        Command::Measure(a) => measure(&cfg, a),
        Command::Liouville(a) => liouville(&cfg, a),
        Command::Scan(a) => scan(&cfg, a),
        Command::Fit(a) => fit(&cfg, a),
        Command::Scenario { action: ScenarioAction::List } => {
            for s in SCENARIOS {
                println!("{s}");
            }
            Ok(0)
        }
        Command::Scenario { action: ScenarioAction::Run { name, out } } => scenario(&cfg, &name, out),
    }
}

fn configure_threads(flag: Option<usize>) -> Result<()> {
    let env = std::env::var("SEMICLAB_THREADS").ok();
    let threads = match (flag, env) {
        (Some(n), _) => Some(n),
        (None, Some(v)) => Some(v.trim().parse::<usize>().map_err(|_| Error::config(format!("SEMICLAB_THREADS = '{v}' is not a count")))?),
        (None, None) => None,
    };
    if let Some(n) = threads {
        if n == 0 {
            return Err(Error::config("thread count must be positive"));
        }
        // a second call in the same process keeps the existing pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn emit_json(value: &impl Serialize, out: Option<&Path>) -> Result<()> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| Error::numerical(format!("serialization failed: {e}")))?;
    s.push('\n');
    emit(&s, out)
}

struct Window {
    model: SymbolModel,
    e_c: f64,
    d: f64,
    solver: SolverOptions,
    echo: Value,
}

fn resolve_window(cfg: &ConfigFile, a: WindowArgs) -> Result<Window> {
    let spec: String = cfg.require(a.model, "model")?;
    let model = model_from_spec(&spec)?;
    let e_c = match cfg.resolve(a.ecenter, "ecenter")? {
        Some(e) => e,
        None => catalog_entry(&spec)
            .map(|e| e.critical_energy)
            .ok_or_else(|| Error::config("missing required option --ecenter for an inline model"))?,
    };
    let d = cfg.resolve(a.d, "d")?.unwrap_or(5.0);
    let points = cfg.resolve(a.n, "n")?;
    let interval = cfg.resolve(a.interval, "box")?;
    let fd_order = cfg.resolve(a.fd, "fd")?.unwrap_or(4);
    let solver = SolverOptions { fd_order, points, interval: interval.map(|i| (i.0, i.1)), ..SolverOptions::default() };
    let echo = json!({
        "model": spec,
        "ecenter": e_c,
        "d": d,
        "n": points,
        "box": interval.map(|i| [i.0, i.1]),
        "fd": fd_order,
    });
    Ok(Window { model, e_c, d, solver, echo })
}

fn merge(mut base: Value, extra: Value) -> Value {
    if let (Value::Object(b), Value::Object(e)) = (&mut base, extra) {
        b.extend(e);
    }
    base
}

fn models_list() -> Result<i32> {
    let list: Vec<Value> = catalog()
        .into_iter()
        .map(|e| {
            json!({
                "name": e.model.name,
                "description": e.description,
                "critical_energy": e.critical_energy,
                "dimension": e.model.dimension(),
                "family": serde_json::to_value(&e.model.family).ok().and_then(|f| f.get("family").cloned()),
            })
        })
        .collect();
    emit_json(&json!({ "models": list }), None)?;
    Ok(0)
}

fn spectrum(cfg: &ConfigFile, a: SpectrumArgs) -> Result<i32> {
    let out = cfg.resolve(a.out, "out")?;
    let w = resolve_window(cfg, a.window)?;
    let h: f64 = cfg.require(a.h, "h")?;
    let solved = solve_window(&w.model, w.e_c, w.d, h, &w.solver)?;
    let win = &solved.window;
    let mut text = String::new();
    let echo = merge(w.echo, json!({ "h": h }));
    text.push_str(&format!("# config={}\n", serde_json::to_string(&echo).unwrap_or_default()));
    text.push_str(&format!("# interval={},{}\n# d_used={}\n# points={}\n", win.interval.0, win.interval.1, win.d, win.grid.len()));
    for warning in &win.warnings {
        text.push_str(&format!("# warning={warning}\n"));
    }
    let mut wtr = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::Io(std::io::Error::other(e.to_string()));
    wtr.write_record(["j", "lambda", "weight", "channel", "residual", "boundary_tie"]).map_err(io)?;
    for (j, p) in win.pairs.iter().enumerate() {
        wtr.write_record([
            j.to_string(),
            p.value.to_string(),
            p.weight.to_string(),
            p.channel.map_or(String::new(), |c| c.to_string()),
            format!("{:e}", p.residual),
            p.boundary_tie.to_string(),
        ])
        .map_err(io)?;
    }
    let body = wtr.into_inner().map_err(|e| Error::Io(std::io::Error::other(e.to_string())))?;
    text.push_str(&String::from_utf8_lossy(&body));
    emit(&text, out.as_deref())?;
    Ok(0)
}

fn measure(cfg: &ConfigFile, a: MeasureArgs) -> Result<i32> {
    let out = cfg.resolve(a.out, "out")?;
    let w = resolve_window(cfg, a.window)?;
    let h: f64 = cfg.require(a.h, "h")?;
    let text: String = cfg.require(a.obs, "obs")?;
    let obs = Observable::parse(&text)?;
    let q = cfg.resolve(a.quantization, "quantization")?.unwrap_or(Quantization::Both);
    let solved = solve_window(&w.model, w.e_c, w.d, h, &w.solver)?;
    let measures = WindowMeasures::new(&solved.window, Some(solved.phase_box), q)?;
    let records = measures.records(&obs)?;
    let report = json!({
        "config": merge(w.echo, json!({ "h": h, "obs": text, "quantization": q })),
        "window": solved.window,
        "upsilon": solved.window.weighted_count(),
        "records": records,
    });
    emit_json(&report, out.as_deref())?;
    Ok(0)
}

fn liouville(cfg: &ConfigFile, a: LiouvilleArgs) -> Result<i32> {
    let out = cfg.resolve(a.out, "out")?;
    let spec: String = cfg.require(a.model, "model")?;
    let model = model_from_spec(&spec)?;
    let text = cfg.resolve(a.obs, "obs")?.unwrap_or_else(|| "1".to_string());
    let obs = Observable::parse(&text)?;
    let energy = match cfg.resolve(a.energy, "energy")? {
        Some(e) => e,
        None => catalog_entry(&spec).map(|e| e.critical_energy).ok_or_else(|| Error::config("missing required option --energy"))?,
    };
    let allow_critical = cfg.flag(a.allow_critical, "allow-critical")?;
    let opts = LiouvilleOptions { allow_critical, ..LiouvilleOptions::default() };
    let integral = liouville_integral(&model, &obs, energy, &opts)?;
    let volume = liouville_volume(&model, energy, &opts)?;
    let average = if integral.is_finite() && volume.is_finite() { Some(mu_average(&model, &obs, energy, &opts)?) } else { None };
    let report = json!({
        "config": { "model": spec, "obs": text, "energy": energy, "allow-critical": allow_critical },
        "integral": integral,
        "volume": volume,
        "average": average,
    });
    emit_json(&report, out.as_deref())?;
    Ok(0)
}

fn scan(cfg: &ConfigFile, a: ScanArgs) -> Result<i32> {
    let out = cfg.resolve(a.out, "out")?;
    let w = resolve_window(cfg, a.window)?;
    let h_from = cfg.resolve(a.h_from, "h-from")?.unwrap_or(0.1);
    let h_to = cfg.resolve(a.h_to, "h-to")?.unwrap_or(1e-3);
    let steps = cfg.resolve(a.h_steps, "h-steps")?.unwrap_or(12);
    if steps == 0 {
        return Err(Error::config("--h-steps must be positive"));
    }
    let obs_text = cfg.resolve(a.obs, "obs")?.unwrap_or_default();
    let observables = obs_text
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(Observable::parse)
        .collect::<Result<Vec<_>>>()?;
    let quantization = cfg.resolve(a.quantization, "quantization")?.unwrap_or(Quantization::Weyl);
    let config = ScanConfig {
        model: w.model,
        e_c: w.e_c,
        d: w.d,
        h_values: geometric_h(h_from, h_to, steps),
        observables,
        quantization,
        solver: w.solver,
    };
    let res = run_scan(&config);
    let echo = merge(
        w.echo,
        json!({ "h-from": h_from, "h-to": h_to, "h-steps": steps, "obs": obs_text, "quantization": quantization }),
    );
    let csv = res.to_csv()?;
    emit(&format!("# config={}\n{csv}", serde_json::to_string(&echo).unwrap_or_default()), out.as_deref())?;
    let failed = res.rows.iter().filter(|r| !r.ok()).count();
    if failed > 0 {
        eprintln!("error: {failed} of {} scan rows failed; see the error column", res.rows.len());
        return Ok(3);
    }
    Ok(0)
}

fn fit(cfg: &ConfigFile, a: FitArgs) -> Result<i32> {
    let out = cfg.resolve(a.out, "out")?;
    let input: PathBuf = cfg.require(a.input, "in")?;
    let table = ScanTable::parse(&std::fs::read_to_string(&input)?)?;
    let law = cfg.resolve(a.law, "law")?.unwrap_or_else(|| "auto".to_string());
    let meta = |k: &str| table.metadata.get(k).cloned().ok_or_else(|| Error::config(format!("scan file lacks '# {k}=' metadata")));
    let model = model_from_spec(&meta("model")?)?;
    let e_c: f64 = meta("e_c")?.parse().map_err(|_| Error::config("bad e_c metadata"))?;
    let all = candidate_laws(&model, e_c);
    let candidates = match law.as_str() {
        "auto" => all,
        "regular" => vec![predict_scaling(&model, None, LawBranch::Regular)],
        "critical" => all.into_iter().skip(1).collect(),
        other => return Err(Error::config(format!("--law must be auto, regular or critical, got '{other}'"))),
    };
    let result = fit_scaling(&table.fit_rows()?, &candidates)?;
    let mut report = json!({
        "config": { "in": input, "law": law, "model": meta("model")?, "e_c": e_c },
        "alpha_hat": result.alpha_hat,
        "beta_hat": result.beta_hat,
        "coeff_hat": result.coeff_hat,
        "residual": result.residual,
        "law": result.selected.as_ref().map(|s| s.law.origin.label()),
        "fit": result,
    });
    if let Some(index) = cfg.resolve(a.ratio, "ratio")? {
        let kind = cfg.resolve(a.target, "target")?.unwrap_or_else(|| "dirac".to_string());
        let expr = meta(&format!("a{index}"))?;
        let obs = Observable::parse(&expr)?;
        let target = match kind.as_str() {
            "dirac" => dirac_target(&model, &obs, e_c)?,
            "liouville" => liouville_target(&model, &obs, e_c)?,
            other => return Err(Error::config(format!("--target must be dirac or liouville, got '{other}'"))),
        };
        let h = table.column("h")?;
        let ratios = table.column(&format!("a{index}_ratio"))?;
        let rep = ratio_limit_points(&expr, &h.into_iter().zip(ratios).collect::<Vec<_>>(), target)?;
        if let Value::Object(m) = &mut report {
            m.insert("target".into(), json!(rep.target));
            m.insert("gap_at_hmin".into(), json!(rep.gap_at_hmin));
            m.insert("trend_exponent".into(), json!(rep.trend_exponent));
            m.insert("ratio".into(), json!(rep));
            if let Some(Value::Object(c)) = m.get_mut("config") {
                c.insert("ratio".into(), json!(index));
                c.insert("target".into(), json!(kind));
            }
        }
    }
    emit_json(&report, out.as_deref())?;
    Ok(0)
}

fn scenario(cfg: &ConfigFile, name: &str, out: Option<PathBuf>) -> Result<i32> {
    let out = cfg.resolve(out, "out")?;
    let rep = run_scenario(name)?;
    emit_json(&rep, out.as_deref())?;
    Ok(if rep.passed { 0 } else { 1 })
}
