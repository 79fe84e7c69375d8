//! Verification driver for the tangent-sphere-bundle differential system.
//!
//! Subcommands:
//!   verify    run identity suites over seeded samples and emit a report
//!   classify  Ricci-type classification of a metric
//!   integrate fiber-integral table (quadrature vs closed forms)
//!   surface   Weingarten functional of a catalog surface
//!
//! Options resolve as: command-line flags, then `SBL_*` environment
//! variables, then a `key = value` config file, then defaults.
//! Exit codes: 0 all checks pass, 1 an identity failed, 2 usage error.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};

use sbl_core::fiber::{FiberGrid, FiberVerdict};
use sbl_core::metric::Backend;
use sbl_core::report::{RunConfig, Tolerances};
use sbl_core::sampling::sample_base_points;
use sbl_core::suites::{run_suites, SUITE_NAMES};
use sbl_core::surface::{weingarten_functional, Branch, SurfaceImmersion};
use sbl_core::ChartMetric;

#[derive(Parser)]
#[command(
    name = "sbl",
    about = "Numerical verification of the exterior differential system on tangent sphere bundles",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run verification suites and emit a pass/fail report.
    Verify(CommonArgs),
    /// Classify the Ricci type of a metric.
    Classify(CommonArgs),
    /// Fiber-integral table: quadrature against printed closed forms.
    Integrate(IntegrateArgs),
    /// Evaluate the Weingarten functional on a catalog surface.
    Surface(SurfaceArgs),
}

#[derive(Args, Clone, Default)]
struct CommonArgs {
    /// Catalog metric: euclidean3, sphere3, hyperbolic3, halfspace3,
    /// heisenberg, perturbed, flat2d, sphere2d, hyperbolic2d.
    #[arg(long)]
    metric: Option<String>,
    /// Curvature parameter for sphere/hyperbolic metrics.
    #[arg(long, allow_hyphen_values = true)]
    c: Option<f64>,
    /// Perturbation amplitude for the perturbed metric.
    #[arg(long, allow_hyphen_values = true)]
    eps: Option<f64>,
    /// Sphere-bundle radius.
    #[arg(long)]
    s: Option<f64>,
    /// Sample count per suite.
    #[arg(long)]
    samples: Option<usize>,
    /// Random seed; identical seeds give byte-identical reports.
    #[arg(long)]
    seed: Option<u64>,
    /// Differentiation backend: dual, fd, analytic.
    #[arg(long)]
    backend: Option<String>,
    /// Comma-separated suites: structure,hodge,rho,ricci,fiber,lagrangian,surface,2d.
    #[arg(long)]
    suites: Option<String>,
    /// Tolerance overrides, repeatable: --tol structure=1e-6.
    #[arg(long = "tol")]
    tol: Vec<String>,
    /// Fiber grid azimuthal count.
    #[arg(long)]
    ntheta: Option<usize>,
    /// Fiber grid polar count.
    #[arg(long)]
    nz: Option<usize>,
    /// Output format: text or json.
    #[arg(long)]
    format: Option<String>,
    /// Write the report to a file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Line-oriented `key = value` configuration file; flags win.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct IntegrateArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Base point "x1,x2,x3"; defaults to the first seeded sample.
    #[arg(long)]
    x: Option<String>,
}

#[derive(Args)]
struct SurfaceArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Catalog surface: horosphere, geodesic_sphere, vertical_plane,
    /// euclidean_sphere, graph.
    #[arg(long)]
    surface: Option<String>,
    /// Weingarten coefficient; the ambient curvature must be -t0^2.
    #[arg(long, allow_hyphen_values = true)]
    t0: Option<f64>,
    /// Branch of the functional: minus (printed) or plus.
    #[arg(long)]
    branch: Option<String>,
    /// Surface parameter (geodesic/euclidean sphere radius, graph amplitude).
    #[arg(long)]
    a: Option<f64>,
    /// Quadrature panels per parameter direction.
    #[arg(long)]
    grid: Option<usize>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Verify(args) => cmd_verify(args),
        Command::Classify(args) => cmd_classify(args),
        Command::Integrate(args) => cmd_integrate(args),
        Command::Surface(args) => cmd_surface(args),
    };
    match code {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

// ---------------------------------------------------------------------------
// option resolution: flags > SBL_* environment > config file > defaults
// ---------------------------------------------------------------------------

fn read_config_file(path: &Option<PathBuf>) -> Result<BTreeMap<String, String>, String> {
    let mut map = BTreeMap::new();
    let Some(path) = path else {
        return Ok(map);
    };
    let text = std::fs::read_to_string(path).map_err(|e| format!("config {path:?}: {e}"))?;
    for (ln, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(format!("config {path:?} line {}: expected key = value", ln + 1));
        };
        map.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(map)
}

fn resolve<T: FromStr>(
    flag: Option<T>,
    key: &str,
    file: &BTreeMap<String, String>,
) -> Result<Option<T>, String> {
    if flag.is_some() {
        return Ok(flag);
    }
    let env_key = format!("SBL_{}", key.to_uppercase().replace('.', "_"));
    if let Ok(v) = std::env::var(&env_key) {
        return v
            .parse::<T>()
            .map(Some)
            .map_err(|_| format!("cannot parse {env_key} = '{v}'"));
    }
    if let Some(v) = file.get(key) {
        return v
            .parse::<T>()
            .map(Some)
            .map_err(|_| format!("cannot parse config {key} = '{v}'"));
    }
    Ok(None)
}

fn build_config(args: &CommonArgs, default_suites: Option<Vec<String>>) -> Result<RunConfig, String> {
    let file = read_config_file(&args.config)?;
    let metric = resolve(args.metric.clone(), "metric", &file)?
        .ok_or_else(|| "missing --metric".to_string())?;
    let c = resolve(args.c, "c", &file)?;
    let eps = resolve(args.eps, "eps", &file)?;
    let s = resolve(args.s, "s", &file)?.unwrap_or(1.0);
    let samples = resolve(args.samples, "samples", &file)?.unwrap_or(30);
    let seed = resolve(args.seed, "seed", &file)?.unwrap_or(42);
    let backend_name = resolve(args.backend.clone(), "backend", &file)?.unwrap_or_else(|| "dual".into());
    let backend = Backend::parse(&backend_name).map_err(|e| e.to_string())?;
    let ntheta = resolve(args.ntheta, "ntheta", &file)?.unwrap_or(32);
    let nz = resolve(args.nz, "nz", &file)?.unwrap_or(16);

    let m = ChartMetric::by_name(&metric, c, eps).map_err(|e| e.to_string())?;
    let suites_str = resolve(args.suites.clone(), "suites", &file)?;
    let suites: Vec<String> = match suites_str {
        Some(sv) => sv.split(',').map(|x| x.trim().to_string()).collect(),
        None => default_suites.unwrap_or_else(|| {
            if m.dim == 3 {
                SUITE_NAMES
                    .iter()
                    .filter(|&&n| n != "2d")
                    .map(|s| s.to_string())
                    .collect()
            } else {
                vec!["2d".into()]
            }
        }),
    };

    let mut tolerances = Tolerances::for_backend(backend);
    // file keys tol.<name>, env SBL_TOL_<NAME>, flags --tol name=value
    for (k, v) in &file {
        if let Some(name) = k.strip_prefix("tol.") {
            let val: f64 = v.parse().map_err(|_| format!("bad tolerance {k} = {v}"))?;
            tolerances.set(name, val).map_err(|e| e.to_string())?;
        }
    }
    for name in [
        "structure", "hodge", "laplacian", "rho", "ricci", "fiber_exact", "fiber_closed",
        "lagrangian", "surface", "functional", "frame",
    ] {
        if let Ok(v) = std::env::var(format!("SBL_TOL_{}", name.to_uppercase())) {
            let val: f64 = v.parse().map_err(|_| format!("bad SBL_TOL_{name} = {v}"))?;
            tolerances.set(name, val).map_err(|e| e.to_string())?;
        }
    }
    for item in &args.tol {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| format!("--tol expects name=value, got '{item}'"))?;
        let val: f64 = v.parse().map_err(|_| format!("bad tolerance value '{v}'"))?;
        tolerances.set(k.trim(), val).map_err(|e| e.to_string())?;
    }

    Ok(RunConfig {
        metric,
        c,
        eps,
        s,
        base_dim: m.dim,
        samples,
        seed,
        backend: backend.name().to_string(),
        suites,
        n_theta: ntheta,
        n_z: nz,
        tolerances,
        extra: BTreeMap::new(),
    })
}

fn emit(args: &CommonArgs, text: String, json: String) -> Result<(), String> {
    let file = read_config_file(&args.config)?;
    let format = resolve(args.format.clone(), "format", &file)?.unwrap_or_else(|| "text".into());
    let body = match format.as_str() {
        "text" => text,
        "json" => json,
        other => return Err(format!("unknown format '{other}'")),
    };
    let out = match resolve(args.out.clone(), "out", &file)? {
        Some(p) => p,
        None => {
            print!("{body}");
            std::io::stdout().flush().ok();
            return Ok(());
        }
    };
    std::fs::write(&out, body).map_err(|e| format!("cannot write {out:?}: {e}"))
}

// ---------------------------------------------------------------------------
// subcommands
// ---------------------------------------------------------------------------

fn cmd_verify(args: CommonArgs) -> Result<u8, String> {
    let cfg = build_config(&args, None)?;
    let report = run_suites(&cfg).map_err(|e| e.to_string())?;
    let code = report.exit_code() as u8;
    emit(&args, report.to_text(), report.to_json().map_err(|e| e.to_string())?)?;
    Ok(code)
}

fn cmd_classify(args: CommonArgs) -> Result<u8, String> {
    let cfg = build_config(&args, Some(vec!["ricci".into()]))?;
    if cfg.base_dim != 3 {
        return Err("classification needs a 3-dimensional metric".into());
    }
    let metric = ChartMetric::by_name(&cfg.metric, cfg.c, cfg.eps)
        .map_err(|e| e.to_string())?
        .with_backend(Backend::parse(&cfg.backend).map_err(|e| e.to_string())?);
    let samples = sbl_core::sampling::sample_points(&metric, cfg.s, cfg.samples, cfg.seed)
        .map_err(|e| e.to_string())?;
    let rep = sbl_core::eds::classify_ricci(&metric, &samples, cfg.tolerances.ricci)
        .map_err(|e| e.to_string())?;
    let text = format!(
        "metric {}  samples {}  tolerance {:.1e}\n\
         |F1| max {:.3e}\n|F2| max {:.3e}\n|F3| max {:.3e}\n|F4| max {:.3e}\n\
         Ricci types: {:?}\nconstant scalar curvature: {}\nrecurrent Ricci: {}\ncontainments consistent: {}\n",
        cfg.metric,
        rep.samples,
        rep.tolerance,
        rep.f_max[0],
        rep.f_max[1],
        rep.f_max[2],
        rep.f_max[3],
        rep.types,
        rep.csc,
        rep.recurrent,
        rep.containment_ok
    );
    let json = serde_json::to_string_pretty(&rep).map_err(|e| e.to_string())?;
    emit(&args, text, json)?;
    Ok(0)
}

fn cmd_integrate(args: IntegrateArgs) -> Result<u8, String> {
    let cfg = build_config(&args.common, Some(vec!["fiber".into()]))?;
    if cfg.base_dim != 3 {
        return Err("fiber integration needs a 3-dimensional metric".into());
    }
    let metric = ChartMetric::by_name(&cfg.metric, cfg.c, cfg.eps)
        .map_err(|e| e.to_string())?
        .with_backend(Backend::parse(&cfg.backend).map_err(|e| e.to_string())?);
    let x = match &args.x {
        Some(sv) => {
            let parts: Vec<f64> = sv
                .split(',')
                .map(|p| p.trim().parse::<f64>())
                .collect::<Result<_, _>>()
                .map_err(|_| format!("cannot parse --x '{sv}'"))?;
            if parts.len() != 3 {
                return Err("--x needs three comma-separated coordinates".into());
            }
            [parts[0], parts[1], parts[2]]
        }
        None => sample_base_points(&metric, 1, cfg.seed)[0],
    };
    let grid = FiberGrid::new(cfg.n_theta, cfg.n_z);
    let rep = sbl_core::fiber::identity_battery(&metric, cfg.s, &x, &grid, cfg.tolerances.fiber_closed)
        .map_err(|e| e.to_string())?;
    let push = sbl_core::fiber::pushforward_checks(&metric, cfg.s, &x, &grid)
        .map_err(|e| e.to_string())?;
    let mut text = format!(
        "metric {}  s = {}  x = [{:.4}, {:.4}, {:.4}]  grid {}x{}\n\n{:<10} {:>16} {:>16} {:>11}  verdict\n",
        cfg.metric, cfg.s, x[0], x[1], x[2], cfg.n_theta, cfg.n_z, "integral", "quadrature", "closed form", "rel err"
    );
    for row in &rep.rows {
        let verdict = match row.verdict {
            FiberVerdict::Match => "match",
            FiberVerdict::MismatchVsPaper => "mismatch-vs-paper",
        };
        text.push_str(&format!(
            "{:<10} {:>16.9} {:>16.9} {:>11.3e}  {}\n",
            row.id.trim_start_matches("fiber."),
            row.quadrature,
            row.closed_form,
            row.rel_error,
            verdict
        ));
    }
    text.push_str(&format!(
        "\npushforward residuals: vol {:.3e}, theta^alpha2 {:.3e}, alpha0^alpha2 {:.3e}\n",
        push.vol_residual, push.theta_alpha2, push.alpha0_alpha2
    ));
    let json = serde_json::to_string_pretty(&serde_json::json!({
        "config": cfg,
        "battery": rep,
        "pushforward": push,
    }))
    .map_err(|e| e.to_string())?;
    emit(&args.common, text, json)?;
    Ok(0)
}

fn cmd_surface(args: SurfaceArgs) -> Result<u8, String> {
    let file = read_config_file(&args.common.config)?;
    let surface = resolve(args.surface.clone(), "surface", &file)?
        .ok_or_else(|| "missing --surface".to_string())?;
    let t0 = resolve(args.t0, "t0", &file)?.ok_or_else(|| "missing --t0".to_string())?;
    let branch_name = resolve(args.branch.clone(), "branch", &file)?.unwrap_or_else(|| "minus".into());
    let branch = Branch::parse(&branch_name).map_err(|e| e.to_string())?;
    let param = resolve(args.a, "a", &file)?.unwrap_or(1.0);
    let grid = resolve(args.grid, "grid", &file)?.unwrap_or(8);
    let tol = Tolerances::for_backend(Backend::Dual);

    let s = SurfaceImmersion::by_name(&surface, param).map_err(|e| e.to_string())?;
    let rep = weingarten_functional(&s, t0, branch, grid, tol.surface).map_err(|e| e.to_string())?;
    let text = format!(
        "surface {} (parameter {param})  ambient {}  t0 = {t0}  branch {:?}\n\
         functional value          {:.9}\n\
         (1/t0) lift integral      {:.9}\n\
         stationarity residual     [{:.6e}, {:.6e}]\n\
         stationary                {}\n\
         pullback factor residual  {:.3e}\n\
         Legendre residual         {:.3e}\n\
         curvature route residual  {:.3e}\n",
        rep.surface,
        s.ambient.name,
        rep.branch,
        rep.value,
        rep.lift_value,
        rep.residual_min,
        rep.residual_max,
        rep.stationary,
        rep.factor_residual,
        rep.legendre_residual,
        rep.gauss_vs_intrinsic
    );
    let json = serde_json::to_string_pretty(&rep).map_err(|e| e.to_string())?;
    emit(&args.common, text, json)?;
    Ok(0)
}
