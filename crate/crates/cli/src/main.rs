use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::{info, warn};

use slepkit::harmonics::synthesize_grid;
use slepkit::io;
use slepkit::metrics::pair_and_align;
use slepkit::reference::DEFAULT_MEMORY_LIMIT_L;
use slepkit::sphgeom::load_region;
use slepkit::{
    solve_cap, solve_conventional, solve_region, ConventionalOptions, EquiangularGrid, Keep, RegionMask,
    RegionOptions, SlepError, SpectralVector,
};

#[derive(Parser, Debug)]
#[command(name = "slepkit", version, about = "Slepian concentration bases on the sphere")]
struct Cli {
    /// Worker threads; SLEPKIT_THREADS takes precedence
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Analytic basis of a polar cap
    Cap(CapArgs),
    /// Reduced-size basis of a region built on its enclosing cap
    Region(RegionArgs),
    /// Dense conventional basis of a region
    Reference(RegionArgs),
    /// Run both region solvers and pair their functions
    Compare(RegionArgs),
    /// Time matrix assembly and eigendecomposition of both methods
    Bench(BenchArgs),
    /// Sample stored basis functions on an equiangular grid
    Eval(EvalArgs),
}

#[derive(Args, Debug)]
struct Common {
    /// Band-limit: degrees 0..L-1
    #[arg(long = "L", value_name = "L")]
    l: usize,

    /// Output directory
    #[arg(long)]
    out: PathBuf,

    /// Quadrature grid refinement factor
    #[arg(long, default_value_t = 1)]
    grid_res: usize,

    /// Largest L the dense conventional solver accepts
    #[arg(long = "memory-limit-l", default_value_t = DEFAULT_MEMORY_LIMIT_L)]
    memory_limit_l: usize,
}

#[derive(Args, Debug)]
struct CapArgs {
    #[command(flatten)]
    common: Common,

    /// Cap radius in degrees
    #[arg(long)]
    theta_deg: f64,

    /// Number of functions whose coefficients are written (default: ceil of the Shannon number)
    #[arg(long)]
    keep: Option<usize>,
}

#[derive(Args, Debug)]
struct RegionArgs {
    #[command(flatten)]
    common: Common,

    /// Boundary file: "lat lon" degree pairs, blank lines separate loops
    #[arg(long)]
    boundary: PathBuf,

    /// Number of cap functions in the reduced problem
    #[arg(long)]
    keep: Option<usize>,
}

#[derive(Args, Debug)]
struct BenchArgs {
    /// Comma-separated band-limits
    #[arg(long = "L", value_name = "L", value_delimiter = ',', required = true)]
    l: Vec<usize>,

    #[arg(long)]
    boundary: PathBuf,

    #[arg(long)]
    out: PathBuf,

    #[arg(long, default_value_t = 1)]
    grid_res: usize,

    #[arg(long = "memory-limit-l", default_value_t = DEFAULT_MEMORY_LIMIT_L)]
    memory_limit_l: usize,
}

#[derive(Args, Debug)]
struct EvalArgs {
    /// Directory written by cap, region or reference
    #[arg(long)]
    input: PathBuf,

    #[arg(long)]
    out: PathBuf,

    #[arg(long, default_value_t = 1)]
    grid_res: usize,

    /// Region whose mask goes into the grid dump
    #[arg(long)]
    boundary: Option<PathBuf>,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Slep(SlepError),
}

impl From<SlepError> for CliError {
    fn from(e: SlepError) -> Self {
        CliError::Slep(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Slep(e.into())
    }
}

type CliResult = Result<(), CliError>;

fn check_common(l: usize, grid_res: usize) -> CliResult {
    if l < 2 {
        return Err(CliError::Usage(format!("--L must be at least 2, got {l}")));
    }
    if grid_res < 1 {
        return Err(CliError::Usage("--grid-res must be at least 1".into()));
    }
    Ok(())
}

fn region_options(c: &Common, keep: Option<usize>) -> RegionOptions {
    RegionOptions {
        grid_res: c.grid_res,
        keep_override: keep,
        memory_limit_l: c.memory_limit_l,
    }
}

fn conventional_options(grid_res: usize, memory_limit_l: usize) -> ConventionalOptions {
    ConventionalOptions { grid_res, memory_limit_l }
}

fn run_cap(a: &CapArgs) -> CliResult {
    check_common(a.common.l, a.common.grid_res)?;
    if !(a.theta_deg > 0.0 && a.theta_deg <= 180.0) {
        return Err(CliError::Usage(format!("--theta-deg must lie in (0, 180], got {}", a.theta_deg)));
    }
    let keep = a.keep.map_or(Keep::Concentrated, Keep::Count);
    let basis = solve_cap(a.common.l, a.theta_deg.to_radians(), keep)?;
    io::write_cap_dir(&a.common.out, &basis)?;
    info!("cap: N_Theta = {:.4}, kept {}", basis.shannon(), basis.kept());
    Ok(())
}

fn run_region(a: &RegionArgs) -> CliResult {
    check_common(a.common.l, a.common.grid_res)?;
    let region = load_region(&a.boundary)?;
    let basis = solve_region(a.common.l, &region, &region_options(&a.common, a.keep))?;
    io::write_region_dir(&a.common.out, &basis)?;
    info!("region: N_keep = {}, N_P = {:.4}", basis.n_keep, basis.n_p);
    Ok(())
}

fn run_reference(a: &RegionArgs) -> CliResult {
    check_common(a.common.l, a.common.grid_res)?;
    let region = load_region(&a.boundary)?;
    let opts = conventional_options(a.common.grid_res, a.common.memory_limit_l);
    let basis = solve_conventional(a.common.l, &region, &opts)?;
    io::write_reference_dir(&a.common.out, &basis, Some(region.area()))?;
    info!("reference: trace K = {:.4}", basis.trace);
    Ok(())
}

fn run_compare(a: &RegionArgs) -> CliResult {
    check_common(a.common.l, a.common.grid_res)?;
    let region = load_region(&a.boundary)?;
    let fast = solve_region(a.common.l, &region, &region_options(&a.common, a.keep))?;
    let conv = solve_conventional(
        a.common.l,
        &region,
        &conventional_options(a.common.grid_res, a.common.memory_limit_l),
    )?;
    let cmp = pair_and_align(&fast, &conv)?;
    fs::create_dir_all(&a.common.out)?;
    io::write_comparison_csv(&a.common.out.join("comparison.csv"), &cmp)?;
    io::write_region_dir(&a.common.out.join("fast"), &fast)?;
    io::write_reference_dir(&a.common.out.join("reference"), &conv, Some(region.area()))?;
    let flagged = cmp.flagged().count();
    if flagged > 0 {
        warn!("{flagged} pairs flagged for degenerate-subspace mixing");
    }
    info!("compare: {} pairs, max |dlambda| {:.3e}", cmp.pairs.len(), cmp.max_abs_diff(cmp.pairs.len()));
    Ok(())
}

fn run_bench(a: &BenchArgs) -> CliResult {
    for &l in &a.l {
        check_common(l, a.grid_res)?;
    }
    let region = load_region(&a.boundary)?;
    let mut rows = String::from("L,method,phase,seconds\n");
    for &l in &a.l {
        let opts = RegionOptions {
            grid_res: a.grid_res,
            keep_override: None,
            memory_limit_l: a.memory_limit_l,
        };
        let fast = solve_region(l, &region, &opts)?;
        let t = fast.timings;
        rows += &format!("{l},fast,matrix,{}\n{l},fast,eig,{}\n", io::fmt_f64(t.matrix), io::fmt_f64(t.eig));
        if l > a.memory_limit_l {
            warn!("L = {l}: conventional method skipped, above --memory-limit-l {}", a.memory_limit_l);
            continue;
        }
        let conv = solve_conventional(l, &region, &conventional_options(a.grid_res, a.memory_limit_l))?;
        let c = conv.timings;
        rows += &format!(
            "{l},conventional,matrix,{}\n{l},conventional,eig,{}\n",
            io::fmt_f64(c.matrix),
            io::fmt_f64(c.eig)
        );
        info!("L = {l}: fast {:.3} s, conventional {:.3} s", t.total(), c.total());
    }
    fs::create_dir_all(&a.out)?;
    fs::write(a.out.join("bench.csv"), rows)?;
    Ok(())
}

/// Numbered coefficient files in `dir`, in rank order.
fn stored_vectors(dir: &Path) -> Result<Vec<SpectralVector>, CliError> {
    let mut found = Vec::new();
    for entry in fs::read_dir(dir)? {
        let name = entry?.file_name().to_string_lossy().into_owned();
        let rank = ["vector_", "spectral_"]
            .iter()
            .find_map(|p| name.strip_prefix(p))
            .and_then(|r| r.strip_suffix(".csv"))
            .and_then(|r| r.parse::<usize>().ok());
        if let Some(rank) = rank {
            found.push((rank, dir.join(&name)));
        }
    }
    if found.is_empty() {
        return Err(CliError::Usage(format!("{}: no stored basis functions", dir.display())));
    }
    found.sort();
    found.iter().map(|(_, p)| io::read_spectral_csv(p).map_err(CliError::from)).collect()
}

fn run_eval(a: &EvalArgs) -> CliResult {
    let vectors = stored_vectors(&a.input)?;
    let l = vectors[0].band_limit();
    if let Some(v) = vectors.iter().find(|v| v.band_limit() != l) {
        return Err(SlepError::BandLimitMismatch(l, v.band_limit()).into());
    }
    check_common(l, a.grid_res)?;
    let grid = EquiangularGrid::build(a.grid_res, l)?;
    let mask = match &a.boundary {
        Some(p) => RegionMask::for_region(&grid, &load_region(p)?),
        None => RegionMask::full(&grid),
    };
    let mut data = Vec::with_capacity(vectors.len() * grid.len());
    for v in &vectors {
        data.extend(synthesize_grid(v, &grid));
    }
    fs::create_dir_all(&a.out)?;
    io::write_samples_bin(&a.out.join("samples.bin"), vectors.len(), grid.len(), &data)?;
    io::write_grid_dump(&a.out.join("grid.csv"), &grid, &mask)?;
    Ok(())
}

fn configure_threads(flag: Option<usize>) -> CliResult {
    let threads = match std::env::var("SLEPKIT_THREADS") {
        Ok(s) => Some(
            s.trim()
                .parse::<usize>()
                .map_err(|_| CliError::Usage(format!("SLEPKIT_THREADS: not a thread count: {s:?}")))?,
        ),
        Err(_) => flag,
    };
    let Some(n) = threads else {
        return Ok(());
    };
    if n == 0 {
        return Err(CliError::Usage("thread count must be at least 1".into()));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Usage(e.to_string()))?;
    faer::set_global_parallelism(if n == 1 { faer::Par::Seq } else { faer::Par::rayon(n) });
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let result = configure_threads(cli.threads).and_then(|_| match &cli.command {
        Command::Cap(a) => run_cap(a),
        Command::Region(a) => run_region(a),
        Command::Reference(a) => run_reference(a),
        Command::Compare(a) => run_compare(a),
        Command::Bench(a) => run_bench(a),
        Command::Eval(a) => run_eval(a),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Slep(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_numeric_guard() { 3 } else { 2 })
        }
    }
}
