//! Command-line front end: construct solution families, run verification
//! suites, execute parameter scans, and emit plot-ready CSV/JSON.
//!
//! Exit codes: 0 success / verification passed, 1 verification failed,
//! 2 usage or parameter error.

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;
use sphere_euler::axisym::{near_zeros, scan_alpha};
use sphere_euler::families::{
    conical_axisym, conical_boundaries, irrotational, lift_2d, parallel_shear, radial,
    rotational, two_half_d, FamilyTag, HomogeneousSolution, SignProfile,
};
use sphere_euler::grid::SphereGrid;
use sphere_euler::homo2d::{elliptic_exceptional, time_span};
use sphere_euler::io::{format_f64, solution_to_json, table_csv};
use sphere_euler::landau::vanishing_viscosity_study;
use sphere_euler::onsager::{build_stream_field, check_stream_gauge, flux, moment_identities};
use sphere_euler::residuals::{
    check_bernoulli_transport, check_lie_bracket, check_system, check_vorticity_system,
    CheckOptions, Mask, ResidualReport,
};
use std::path::PathBuf;
use std::sync::Arc;

#[derive(Parser)]
#[command(
    name = "sphere-euler",
    version,
    about = "Stationary homogeneous Euler flows on the sphere"
)]
struct Cli {
    /// TOML config file; command-line flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Construct a family and verify every applicable formulation.
    Verify(FamilyArgs),
    /// Construct a family and export its sampled fields.
    Family(FamilyArgs),
    /// Tabulate the 2D time-span function T(B) at fixed α.
    Scan2d(Scan2dArgs),
    /// Shooting-defect scan of the no-swirl axisymmetric system over α.
    ScanAxisym(ScanAxisymArgs),
    /// Energy flux Π and the vanishing-moment table for a family.
    Flux(FluxArgs),
    /// Landau viscous-profile ladder.
    Landau(LandauArgs),
}

#[derive(Args, Clone)]
struct GridArgs {
    /// Colatitude node count.
    #[arg(long)]
    nlat: Option<usize>,
    /// Longitude node count (even).
    #[arg(long)]
    nlon: Option<usize>,
    /// Residual tolerance.
    #[arg(long)]
    tol: Option<f64>,
    /// Output path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format.
    #[arg(long, value_enum)]
    format: Option<OutFormat>,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum, Deserialize, Debug)]
#[serde(rename_all = "lowercase")]
enum OutFormat {
    Csv,
    Json,
}

#[derive(Args, Clone)]
struct FamilyArgs {
    #[command(flatten)]
    grid: GridArgs,
    /// shear | radial | conical | rotational | irrotational | lifted2d | two-half-d
    #[arg(long)]
    family: String,
    /// Homogeneity exponent (families with a free α).
    #[arg(long, allow_hyphen_values = true)]
    alpha: Option<f64>,
    /// Amplitude (radial c, rotational A, irrotational scale, shear z).
    #[arg(long, allow_hyphen_values = true)]
    amp: Option<f64>,
    /// Spherical-harmonic degree (irrotational).
    #[arg(long)]
    l: Option<usize>,
    /// Spherical-harmonic order (irrotational).
    #[arg(long, allow_hyphen_values = true)]
    m: Option<i64>,
    /// Conical equator components (a0² + b0² = 1).
    #[arg(long, allow_hyphen_values = true)]
    a0: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    b0: Option<f64>,
    /// 2D exceptional profile coefficients ψ = γ₁ + γ₂ cos 2θ.
    #[arg(long, allow_hyphen_values = true)]
    gamma1: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    gamma2: Option<f64>,
    /// Transport constant of the 2½D third component.
    #[arg(long)]
    const_c: Option<f64>,
}

#[derive(Args, Clone)]
struct Scan2dArgs {
    #[command(flatten)]
    grid: GridArgs,
    #[arg(long, allow_hyphen_values = true)]
    alpha: f64,
    /// B range as lo:hi:n (n samples, endpoints included).
    #[arg(long = "B-range", visible_alias = "b-range", allow_hyphen_values = true)]
    b_range: String,
}

#[derive(Args, Clone)]
struct ScanAxisymArgs {
    #[command(flatten)]
    grid: GridArgs,
    /// α range as lo:hi:n.
    #[arg(long, allow_hyphen_values = true)]
    alpha_range: String,
    /// Bernoulli constant B of the reduced no-swirl system.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    b: f64,
}

#[derive(Args, Clone)]
struct FluxArgs {
    #[command(flatten)]
    family: FamilyArgs,
    /// Highest moment ∫fHⁿ, ∫ωHⁿ to tabulate.
    #[arg(long, default_value_t = 4)]
    n_max: usize,
}

#[derive(Args, Clone)]
struct LandauArgs {
    #[command(flatten)]
    grid: GridArgs,
    /// Comma-separated viscosity ladder.
    #[arg(long, default_value = "1,0.1,0.01")]
    nu_ladder: String,
    /// Pole parameter of the smooth branch (c > 1).
    #[arg(long, default_value_t = 2.0)]
    c: f64,
}

/// Values loadable from a TOML config file; flags take precedence.
#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    nlat: Option<usize>,
    nlon: Option<usize>,
    tolerance: Option<f64>,
    format: Option<OutFormat>,
    threads: Option<usize>,
}

struct RunConfig {
    nlat: usize,
    nlon: usize,
    tol: f64,
    format: OutFormat,
    out: Option<PathBuf>,
    threads: usize,
}

fn resolve(grid: &GridArgs, file: &FileConfig) -> anyhow::Result<RunConfig> {
    let threads = std::env::var("SPHERE_EULER_THREADS")
        .ok()
        .and_then(|s| s.parse().ok())
        .or(file.threads)
        .unwrap_or(1);
    let cfg = RunConfig {
        nlat: grid.nlat.or(file.nlat).unwrap_or(64),
        nlon: grid.nlon.or(file.nlon).unwrap_or(128),
        tol: grid.tol.or(file.tolerance).unwrap_or(1e-6),
        format: grid.format.or(file.format).unwrap_or(OutFormat::Csv),
        out: grid.out.clone(),
        threads: threads.max(1),
    };
    if cfg.tol <= 0.0 {
        return Err(anyhow!("tolerance must be positive"));
    }
    Ok(cfg)
}

fn main() {
    let cli = Cli::parse();
    let file = match &cli.config {
        Some(path) => match std::fs::read_to_string(path)
            .map_err(anyhow::Error::from)
            .and_then(|s| toml::from_str::<FileConfig>(&s).map_err(Into::into))
        {
            Ok(f) => f,
            Err(e) => {
                eprintln!("error: cannot read config {}: {e}", path.display());
                std::process::exit(2);
            }
        },
        None => FileConfig::default(),
    };
    let code = match run(cli.command, &file) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            2
        }
    };
    std::process::exit(code);
}

fn run(cmd: Command, file: &FileConfig) -> anyhow::Result<i32> {
    match cmd {
        Command::Verify(args) => {
            let cfg = resolve(&args.grid, file)?;
            let (sol, opts, params) = build_family(&args, &cfg)?;
            let (report, pass) = verify_all(&sol, cfg.tol, &opts);
            let doc = serde_json::json!({
                "family": sol.family.to_string(),
                "alpha": sol.alpha,
                "params": params,
                "grid": {"nlat": cfg.nlat, "nlon": cfg.nlon},
                "tol": cfg.tol,
                "reports": report,
                "pass": pass,
            });
            emit(&cfg, &serde_json::to_string_pretty(&doc)?)?;
            Ok(if pass { 0 } else { 1 })
        }
        Command::Family(args) => {
            let cfg = resolve(&args.grid, file)?;
            let (sol, _, params) = build_family(&args, &cfg)?;
            let text = match cfg.format {
                OutFormat::Json => solution_to_json(&sol, params),
                OutFormat::Csv => {
                    let g = sol.grid();
                    let mut rows = Vec::with_capacity(g.len());
                    for i in 0..g.nlat {
                        for j in 0..g.nlon {
                            let k = g.idx(i, j);
                            rows.push(vec![
                                g.phi_nodes[i],
                                g.theta_nodes[j],
                                sol.f.values[k],
                                sol.v.a[k],
                                sol.v.b[k],
                                sol.p.values[k],
                            ]);
                        }
                    }
                    table_csv("phi,theta,f,a,b,p", &rows)
                }
            };
            emit(&cfg, &text)?;
            Ok(0)
        }
        Command::Scan2d(args) => {
            let cfg = resolve(&args.grid, file)?;
            let (lo, hi, n) = parse_range(&args.b_range)?;
            let bs: Vec<f64> = (0..n)
                .map(|i| lo + (hi - lo) * i as f64 / (n - 1).max(1) as f64)
                .collect();
            let spans = run_parallel(cfg.threads, &bs, |&b| time_span(args.alpha, b))?;
            let rows: Vec<Vec<f64>> =
                bs.iter().zip(&spans).map(|(&b, &t)| vec![b, t]).collect();
            emit(&cfg, &table_csv("B,T", &rows))?;
            Ok(0)
        }
        Command::ScanAxisym(args) => {
            let cfg = resolve(&args.grid, file)?;
            let (lo, hi, n) = parse_range(&args.alpha_range)?;
            let rows = scan_alpha(lo, hi, args.b, n, cfg.tol.min(1e-8))
                .map_err(|e| anyhow!("{e}"))?;
            let table: Vec<Vec<f64>> = rows
                .iter()
                .map(|r| vec![r.alpha, r.bern, r.defect, if r.blowup { 1.0 } else { 0.0 }])
                .collect();
            let zeros = near_zeros(&rows);
            if !zeros.is_empty() {
                eprintln!(
                    "near-zeros: {}",
                    zeros.iter().map(|z| format!("{z:.6}")).collect::<Vec<_>>().join(", ")
                );
            }
            emit(&cfg, &table_csv("alpha,B,defect,blowup_flag", &table))?;
            Ok(0)
        }
        Command::Flux(args) => {
            let cfg = resolve(&args.family.grid, file)?;
            let (sol, opts, _) = build_family(&args.family, &cfg)?;
            let pi_flux = flux(&sol);
            eprintln!("flux Π = {}", format_f64(pi_flux));
            let rows: Vec<Vec<f64>> = moment_identities(&sol, args.n_max, opts.scheme)
                .iter()
                .map(|r| vec![r.n as f64, r.f_moment, r.omega_moment])
                .collect();
            emit(&cfg, &table_csv("n,f_moment,omega_moment", &rows))?;
            Ok(0)
        }
        Command::Landau(args) => {
            let cfg = resolve(&args.grid, file)?;
            let ladder: Vec<f64> = args
                .nu_ladder
                .split(',')
                .map(|s| s.trim().parse::<f64>().context("bad viscosity ladder"))
                .collect::<Result<_, _>>()?;
            let rows = vanishing_viscosity_study(&ladder, args.c).map_err(|e| anyhow!("{e}"))?;
            let table: Vec<Vec<f64>> =
                rows.iter().map(|r| vec![r.nu, r.sup_psi, r.residual]).collect();
            emit(&cfg, &table_csv("nu,sup_psi,residual", &table))?;
            Ok(0)
        }
    }
}

/// Construct the requested family with its verification scheme.
fn build_family(
    args: &FamilyArgs,
    cfg: &RunConfig,
) -> anyhow::Result<(HomogeneousSolution, CheckOptions, serde_json::Value)> {
    let grid: Arc<SphereGrid> =
        SphereGrid::build(cfg.nlat, cfg.nlon).map_err(|e| anyhow!("{e}"))?;
    let spectral = CheckOptions::spectral();
    match args.family.as_str() {
        "shear" => {
            let alpha = args.alpha.unwrap_or(-1.0);
            let amp = args.amp.unwrap_or(1.0);
            Ok((
                parallel_shear(alpha, move |_| amp, &grid),
                spectral,
                serde_json::json!({"alpha": alpha, "z": amp}),
            ))
        }
        "radial" => {
            let c = args.amp.unwrap_or(1.0);
            Ok((radial(c, &grid), spectral, serde_json::json!({"c": c})))
        }
        "conical" => {
            let alpha = args.alpha.unwrap_or(-2.0);
            let a0 = args.a0.unwrap_or(1.0);
            let b0 = args.b0.unwrap_or(0.0);
            let sol = conical_axisym(alpha, a0, b0, &grid).map_err(|e| anyhow!("{e}"))?;
            let opts = if b0 == 0.0 {
                spectral
            } else {
                CheckOptions::fd_phi(6)
                    .with_mask(Mask::around_phi(&conical_boundaries(a0, b0), 0.35))
            };
            Ok((sol, opts, serde_json::json!({"alpha": alpha, "a0": a0, "b0": b0})))
        }
        "rotational" => {
            let alpha = args.alpha.unwrap_or(-1.0);
            let amp = args.amp.unwrap_or(1.0);
            let sol = rotational(alpha, amp, &grid).map_err(|e| anyhow!("{e}"))?;
            Ok((sol, spectral, serde_json::json!({"alpha": alpha, "amp": amp})))
        }
        "irrotational" => {
            let l = args.l.ok_or_else(|| anyhow!("irrotational needs --l"))?;
            let m = args.m.unwrap_or(0);
            let amp = args.amp.unwrap_or(1.0);
            let sol = irrotational(l, m, amp, &grid).map_err(|e| anyhow!("{e}"))?;
            Ok((sol, spectral, serde_json::json!({"l": l, "m": m, "amp": amp})))
        }
        "lifted2d" => {
            let g1 = args.gamma1.unwrap_or(2.0);
            let g2 = args.gamma2.unwrap_or(1.0);
            let sol2d = elliptic_exceptional(g1, g2).map_err(|e| anyhow!("{e}"))?;
            Ok((
                lift_2d(&sol2d, &grid),
                spectral,
                serde_json::json!({"gamma1": g1, "gamma2": g2}),
            ))
        }
        "two-half-d" => {
            let g1 = args.gamma1.unwrap_or(2.0);
            let g2 = args.gamma2.unwrap_or(1.0);
            let c = args.const_c.unwrap_or(1.0);
            let sol2d = elliptic_exceptional(g1, g2).map_err(|e| anyhow!("{e}"))?;
            let sol = two_half_d(&sol2d, c, SignProfile::Alternating, &grid)
                .map_err(|e| anyhow!("{e}"))?;
            Ok((
                sol,
                CheckOptions::fd_phi(6),
                serde_json::json!({"gamma1": g1, "gamma2": g2, "const_c": c}),
            ))
        }
        other => Err(anyhow!(
            "unknown family '{other}' (shear | radial | conical | rotational | irrotational | lifted2d | two-half-d)"
        )),
    }
}

/// All applicable residual suites for one solution.
fn verify_all(
    sol: &HomogeneousSolution,
    tol: f64,
    opts: &CheckOptions,
) -> (serde_json::Value, bool) {
    let system = check_system(sol, tol, opts);
    let transport = check_bernoulli_transport(sol, tol, opts);
    let vorticity = check_vorticity_system(sol, tol, opts);
    let lie = check_lie_bracket(sol, tol, opts);
    // The stream-field gauge needs spectral transforms, hence fields smooth
    // on the whole grid: rotational, irrotational, lifted 2D and the α ≤ -2
    // shear / conical-without-swirl branch qualify.
    let gauge: Option<ResidualReport> = match sol.family {
        FamilyTag::Rotational | FamilyTag::Irrotational | FamilyTag::Lifted2d => {
            build_stream_field(sol)
                .ok()
                .map(|sf| check_stream_gauge(sol, &sf, tol, &CheckOptions::spectral()))
        }
        FamilyTag::Shear | FamilyTag::Conical if sol.alpha <= -2.0 => build_stream_field(sol)
            .ok()
            .map(|sf| check_stream_gauge(sol, &sf, tol, &CheckOptions::spectral())),
        _ => None,
    };
    let mut pass = system.pass && transport.pass && vorticity.pass && lie.pass;
    if let Some(g) = &gauge {
        pass &= g.pass;
    }
    let doc = serde_json::json!({
        "system": system,
        "bernoulli_transport": transport,
        "vorticity_system": vorticity,
        "lie_bracket": lie,
        "stream_gauge": gauge,
    });
    (doc, pass)
}

fn parse_range(text: &str) -> anyhow::Result<(f64, f64, usize)> {
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 3 {
        return Err(anyhow!("range must be lo:hi:n, got '{text}'"));
    }
    let lo: f64 = parts[0].parse().context("range lo")?;
    let hi: f64 = parts[1].parse().context("range hi")?;
    let n: usize = parts[2].parse().context("range n")?;
    if n == 0 {
        return Err(anyhow!("range needs at least one sample"));
    }
    Ok((lo, hi, n))
}

/// Map rows across a bounded thread pool, preserving order.
fn run_parallel<T: Sync, R: Send>(
    threads: usize,
    items: &[T],
    f: impl Fn(&T) -> sphere_euler::Result<R> + Sync,
) -> anyhow::Result<Vec<R>> {
    if threads <= 1 || items.len() <= 1 {
        return items.iter().map(|it| f(it).map_err(|e| anyhow!("{e}"))).collect();
    }
    let chunk = items.len().div_ceil(threads);
    let results: Vec<Vec<sphere_euler::Result<R>>> = std::thread::scope(|scope| {
        let handles: Vec<_> = items
            .chunks(chunk)
            .map(|part| scope.spawn(|| part.iter().map(&f).collect::<Vec<_>>()))
            .collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    });
    results
        .into_iter()
        .flatten()
        .map(|r| r.map_err(|e| anyhow!("{e}")))
        .collect()
}

fn emit(cfg: &RunConfig, text: &str) -> anyhow::Result<()> {
    match &cfg.out {
        Some(path) => {
            std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?
        }
        None => print!("{text}"),
    }
    Ok(())
}
