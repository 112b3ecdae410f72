use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use plicbench::experiment::{run_experiment, ExperimentConfig, Method, ShapeSpec, CLASSES};
use plicbench::grid::generate_grid;
use plicbench::report::emit_report;
use seqplic::positioning::Tolerances;

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MethodArg {
    Proposed,
    Baseline,
    Both,
}

/// Sweeps two-plane positioning over a grid of normals and volume fractions
/// and writes truncation-count statistics as CSV.
#[derive(Debug, Parser)]
#[command(name = "plicbench", version)]
struct Args {
    /// cube, dodeca, notched or off:<path>
    #[arg(long, default_value = "cube")]
    shape: ShapeSpec,
    #[arg(long, default_value_t = 6)]
    m_normal: usize,
    #[arg(long, default_value_t = 10)]
    m_vof: usize,
    #[arg(long, default_value_t = 1e-9)]
    eps1: f64,
    #[arg(long, default_value_t = 1e-5)]
    eps2: f64,
    #[arg(long, default_value_t = 1e-14)]
    zero_tol: f64,
    #[arg(long, default_value_t = 1e-12)]
    vof_tol: f64,
    #[arg(long, value_enum, default_value = "proposed")]
    method: MethodArg,
    /// Worker threads; 0 uses all cores.
    #[arg(long, env = "PLICBENCH_THREADS", default_value_t = 0)]
    threads: usize,
    #[arg(long)]
    out: PathBuf,
    /// Use the resolution M_n = 10, M_alpha = 20.
    #[arg(long)]
    full_grid: bool,
    /// Seed for the choice of oracle-audited instances.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let (m_normal, m_vof) = if args.full_grid {
        (10, 20)
    } else {
        (args.m_normal, args.m_vof)
    };
    if m_normal < 2 || m_vof < 2 {
        eprintln!("plicbench: --m-normal and --m-vof must be at least 2");
        return ExitCode::FAILURE;
    }
    let grid = generate_grid(m_normal, m_vof, args.eps1, args.eps2);
    let method = match args.method {
        MethodArg::Proposed => Method::Proposed,
        MethodArg::Baseline => Method::Baseline,
        MethodArg::Both => Method::Both,
    };
    if method == Method::Both && !args.shape.is_cube() {
        eprintln!("plicbench: baseline skipped, it only supports the cube");
    }
    let config = ExperimentConfig {
        tolerances: Tolerances {
            zero_tol: args.zero_tol,
            vof_tol: args.vof_tol,
            ..Tolerances::default()
        },
        baseline_eps: args.vof_tol,
        seed: args.seed,
        ..ExperimentConfig::default()
    };
    println!(
        "{} normals, {} fraction pairs, {} instances",
        grid.normals.len(),
        grid.pairs.len(),
        grid.instance_count()
    );

    let report = match run_experiment(&grid, &args.shape, method, args.threads, &config) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("plicbench: {e}");
            return ExitCode::FAILURE;
        }
    };
    match emit_report(&report, &args.out) {
        Ok(files) => println!("wrote {} files to {}", files.len(), args.out.display()),
        Err(e) => {
            eprintln!("plicbench: {e}");
            return ExitCode::FAILURE;
        }
    }

    for (label, baseline) in [("proposed", false), ("baseline", true)] {
        let totals = report.totals(baseline);
        let all: usize = totals.iter().map(|s| s.count).sum();
        if all == 0 {
            continue;
        }
        for (class, s) in CLASSES.iter().zip(&totals) {
            if let Some(avg) = s.average() {
                println!(
                    "{label:>9} {:<24} {:>6.2}%  N_av = {avg:.4}",
                    class.name(),
                    100.0 * s.count as f64 / all as f64
                );
            }
        }
    }
    if report.compared() > 0 {
        println!(
            "topology mismatches: {} of {} ({:.3}%)",
            report.mismatches(),
            report.compared(),
            100.0 * report.mismatches() as f64 / report.compared() as f64
        );
    }
    println!(
        "audit: {} instances, max error {:e}, {} failures",
        report.audit.audited, report.audit.max_error, report.audit.failures
    );

    if report.defects.is_empty() {
        ExitCode::SUCCESS
    } else {
        for d in &report.defects {
            eprintln!("defect: {} ({})", d.instance, d.message);
        }
        eprintln!("plicbench: {} defective instances", report.defects.len());
        ExitCode::from(2)
    }
}
