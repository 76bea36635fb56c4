use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use isolip::budget::Budgets;
use isolip::experiments::{
    run_cube_stability, run_normal_law, run_obsdiam_chain, run_torus, ExperimentConfig, FactorSpec,
};
use isolip::isoorder::{decide_iso_order, OrderDecision, SearchMode};
use isolip::isoperim::{check_ic_plus, check_icl, IcPlusReport, IclReport};
use isolip::mmspace::{make_cube, make_product_graph, make_torus, SpaceJson};
use isolip::{prohorov, AtomicMeasure, Error, FiniteMMSpace};

const CSV_VERSION: u32 = 1;

#[derive(Parser)]
#[command(name = "isolip", version, about = "Iso-Lipschitz order with additive error: decision procedures and experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// JSON configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed for the random Lipschitz fields.
    #[arg(long)]
    seed: Option<u64>,
    /// Size cap for the command's exponential step (points, cells or subset points).
    #[arg(long)]
    budget: Option<usize>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Prohorov distance of centred ν_{k,n} to a discretized standard Gaussian.
    NormalLaw(Common),
    /// Iso-dominance and min_s on scaled cubes (1/k)[k]^n.
    CubeStability(Common),
    /// Iso-dominance and ICL on discrete tori.
    Torus(Common),
    /// Observable-diameter chain on product graphs.
    ObsdiamChain(Common),
    /// Exhaustive ICL and IC⁺ checks on a finite space.
    CheckIcl(Common),
    /// Decide μ ≻′_(s,t) ν.
    DecideOrder(Common),
    /// Prohorov distance between two atomic measures.
    Prohorov(Common),
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

struct Outcome {
    json: String,
    csv: String,
    passed: bool,
}

fn read_config<T: for<'de> Deserialize<'de> + Default>(c: &Common) -> Result<T, Failure> {
    match &c.config {
        None => Ok(T::default()),
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| Failure::Usage(format!("{}: {e}", p.display())))?;
            serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("{}: {e}", p.display())))
        }
    }
}

fn require_config<T: for<'de> Deserialize<'de>>(c: &Common) -> Result<T, Failure> {
    let p = c
        .config
        .as_ref()
        .ok_or_else(|| Failure::Usage("this command needs --config <path>".into()))?;
    let text = fs::read_to_string(p).map_err(|e| Failure::Usage(format!("{}: {e}", p.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("{}: {e}", p.display())))
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("reports serialize");
    s.push('\n');
    s
}

fn csv_table(command: &str, header: &[&str], rows: Vec<Vec<String>>) -> String {
    let mut s = format!("# isolip {command} csv v{CSV_VERSION}\n{}\n", header.join(","));
    for r in rows {
        s.push_str(&r.join(","));
        s.push('\n');
    }
    s
}

fn experiment_config(c: &Common) -> Result<ExperimentConfig, Failure> {
    let mut cfg: ExperimentConfig = read_config(c)?;
    if let Some(seed) = c.seed {
        cfg.seed = seed;
    }
    if let Some(b) = c.budget {
        cfg.budgets.max_points = b;
    }
    Ok(cfg)
}

fn normal_law(c: &Common) -> Result<Outcome, Failure> {
    let cfg = experiment_config(c)?;
    let r = run_normal_law(&cfg.normal_law)?;
    for row in &r.rows {
        eprintln!("normal-law n={} runtime_ms={:.1}", row.n, row.runtime_ms);
    }
    let mut header = vec!["n", "k", "eps", "atoms", "shift", "prohorov", "bridge_s", "bridge_t"];
    let names: Vec<String> = r
        .kappas
        .iter()
        .flat_map(|k| [format!("diam_nu_{k}"), format!("diam_gauss_{k}")])
        .collect();
    header.extend(names.iter().map(String::as_str));
    let rows = r
        .rows
        .iter()
        .map(|row| {
            let mut v = vec![
                row.n.to_string(),
                row.k.to_string(),
                row.eps.to_string(),
                row.atoms.to_string(),
                row.shift.to_string(),
                row.prohorov.to_string(),
                row.bridge_s.to_string(),
                row.bridge_t.to_string(),
            ];
            for (a, b) in row.diam_nu.iter().zip(&row.diam_gauss) {
                v.push(a.to_string());
                v.push(b.to_string());
            }
            v
        })
        .collect();
    Ok(Outcome {
        csv: csv_table("normal-law", &header, rows),
        json: to_json(&r),
        passed: r.passed,
    })
}

fn cube_stability(c: &Common) -> Result<Outcome, Failure> {
    let cfg = experiment_config(c)?;
    let r = run_cube_stability(&cfg.cube_stability, cfg.seed, &cfg.budgets)?;
    for row in &r.rows {
        eprintln!("cube-stability k={} runtime_ms={:.1}", row.k, row.runtime_ms);
    }
    let rows = r
        .rows
        .iter()
        .map(|row| {
            let gap = r.gaps.iter().find(|g| g.k == row.k);
            vec![
                row.k.to_string(),
                row.n.to_string(),
                row.points.to_string(),
                row.eps.to_string(),
                row.dominance.checked.to_string(),
                row.dominance.passed().to_string(),
                row.max_min_s.to_string(),
                gap.map_or(String::new(), |g| g.prohorov.to_string()),
                gap.map_or(String::new(), |g| g.chain_bound.to_string()),
            ]
        })
        .collect();
    let header = [
        "k",
        "n",
        "points",
        "eps",
        "fields",
        "dominance_passed",
        "max_min_s",
        "prohorov_next",
        "chain_bound",
    ];
    Ok(Outcome {
        csv: csv_table("cube-stability", &header, rows),
        json: to_json(&r),
        passed: r.passed,
    })
}

fn torus(c: &Common) -> Result<Outcome, Failure> {
    let cfg = experiment_config(c)?;
    let r = run_torus(&cfg.torus, cfg.seed, &cfg.budgets)?;
    let opt = |b: Option<bool>| b.map_or(String::new(), |b| b.to_string());
    let rows = vec![vec![
        r.k.to_string(),
        r.n.to_string(),
        r.points.to_string(),
        r.delta.to_string(),
        opt(r.icl.as_ref().map(|x| x.passed)),
        opt(r.ic_plus.as_ref().map(|x| x.passed)),
        r.dominance.passed().to_string(),
        r.max_min_s.to_string(),
    ]];
    let header = ["k", "n", "points", "delta", "icl", "ic_plus", "dominance_passed", "max_min_s"];
    Ok(Outcome {
        csv: csv_table("torus", &header, rows),
        json: to_json(&r),
        passed: r.passed,
    })
}

fn obsdiam_chain(c: &Common) -> Result<Outcome, Failure> {
    let cfg = experiment_config(c)?;
    let r = run_obsdiam_chain(&cfg.obsdiam_chain, cfg.seed, &cfg.budgets)?;
    let rows = r
        .rows
        .iter()
        .map(|row| {
            vec![
                r.k.to_string(),
                r.n.to_string(),
                r.eps.to_string(),
                row.kappa.to_string(),
                row.diam_nu.to_string(),
                row.obs_graph_lower.to_string(),
                row.obs_cube_lower.to_string(),
                row.ineq1.to_string(),
                row.ineq2.to_string(),
                row.ineq3.to_string(),
            ]
        })
        .collect();
    let header = [
        "k",
        "n",
        "eps",
        "kappa",
        "diam_nu",
        "obs_graph_lower",
        "obs_cube_lower",
        "ineq1",
        "ineq2",
        "ineq3",
    ];
    Ok(Outcome {
        csv: csv_table("obsdiam-chain", &header, rows),
        json: to_json(&r),
        passed: r.passed,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
enum SpaceSpec {
    Cube {
        k: usize,
        n: usize,
        #[serde(default = "one")]
        scale: f64,
    },
    Torus {
        k: usize,
        n: usize,
    },
    ProductGraph {
        factors: Vec<FactorSpec>,
    },
    Explicit(SpaceJson),
}

fn one() -> f64 {
    1.0
}

impl SpaceSpec {
    fn build(&self, max_points: usize) -> Result<FiniteMMSpace, Error> {
        match self {
            SpaceSpec::Cube { k, n, scale } => make_cube(*k, *n, *scale, max_points),
            SpaceSpec::Torus { k, n } => make_torus(*k, *n, max_points),
            SpaceSpec::ProductGraph { factors } => {
                make_product_graph(&factors.iter().map(FactorSpec::graph).collect::<Vec<_>>(), max_points)
            }
            SpaceSpec::Explicit(raw) => FiniteMMSpace::try_from(raw.clone()),
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CheckIclInput {
    space: SpaceSpec,
    /// Defaults to the distance pushforward from point 0.
    #[serde(default)]
    nu: Option<AtomicMeasure>,
    #[serde(default)]
    eps: f64,
    #[serde(default)]
    budgets: Budgets,
}

#[derive(Serialize)]
struct CheckIclOutput {
    points: usize,
    nu: AtomicMeasure,
    icl: IclReport,
    ic_plus: IcPlusReport,
}

fn check_icl_cmd(c: &Common) -> Result<Outcome, Failure> {
    let mut input: CheckIclInput = require_config(c)?;
    if let Some(b) = c.budget {
        input.budgets.max_subset_points = b;
    }
    let x = input.space.build(input.budgets.max_points)?;
    let nu = match input.nu {
        Some(nu) => nu,
        None => x.distance_pushforward(0)?,
    };
    let icl = check_icl(&x, &nu, input.eps, input.budgets.max_subset_points)?;
    let ic_plus = check_ic_plus(&x, &nu, input.eps, input.budgets.max_subset_points)?;
    let passed = icl.passed && ic_plus.passed;
    let rows = vec![vec![
        x.len().to_string(),
        nu.len().to_string(),
        input.eps.to_string(),
        icl.passed.to_string(),
        ic_plus.passed.to_string(),
    ]];
    let out = CheckIclOutput {
        points: x.len(),
        nu,
        icl,
        ic_plus,
    };
    Ok(Outcome {
        csv: csv_table("check-icl", &["points", "atoms", "eps", "icl", "ic_plus"], rows),
        json: to_json(&out),
        passed,
    })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DecideInput {
    mu: AtomicMeasure,
    nu: AtomicMeasure,
    s: f64,
    t: f64,
    #[serde(default = "exact_mode")]
    mode: SearchMode,
    #[serde(default)]
    budgets: Budgets,
}

fn exact_mode() -> SearchMode {
    SearchMode::Exact
}

fn decide_order(c: &Common) -> Result<Outcome, Failure> {
    let mut input: DecideInput = require_config(c)?;
    if let Some(b) = c.budget {
        input.budgets.max_cells = b;
    }
    let d: OrderDecision = decide_iso_order(&input.mu, &input.nu, input.s, input.t, input.mode, input.budgets.max_cells)?;
    let verified = match &d.certificate {
        Some(cert) => cert.verify(&input.mu, &input.nu).is_ok(),
        None => true,
    };
    let cert = d.certificate.as_ref();
    let rows = vec![vec![
        input.s.to_string(),
        input.t.to_string(),
        d.holds.to_string(),
        cert.map_or(String::new(), |c| c.s_achieved.to_string()),
        cert.map_or(String::new(), |c| c.t_achieved.to_string()),
        cert.map_or(String::new(), |c| c.cells.len().to_string()),
    ]];
    Ok(Outcome {
        csv: csv_table("decide-order", &["s", "t", "holds", "s_achieved", "t_achieved", "cells"], rows),
        json: to_json(&d),
        passed: verified,
    })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ProhorovInput {
    mu: AtomicMeasure,
    nu: AtomicMeasure,
}

#[derive(Serialize)]
struct ProhorovOutput {
    prohorov: f64,
}

fn prohorov_cmd(c: &Common) -> Result<Outcome, Failure> {
    let input: ProhorovInput = require_config(c)?;
    let p = prohorov(&input.mu, &input.nu)?;
    Ok(Outcome {
        csv: csv_table("prohorov", &["prohorov"], vec![vec![p.to_string()]]),
        json: to_json(&ProhorovOutput { prohorov: p }),
        passed: true,
    })
}

fn configure_workers() -> Result<(), Failure> {
    if let Ok(v) = std::env::var("ISOLIP_WORKERS") {
        let n: usize = v
            .parse()
            .map_err(|_| Failure::Usage(format!("ISOLIP_WORKERS must be a positive integer, got {v:?}")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Usage(e.to_string()))?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<bool, Failure> {
    configure_workers()?;
    let start = Instant::now();
    let (common, outcome) = match &cli.command {
        Command::NormalLaw(c) => (c, normal_law(c)?),
        Command::CubeStability(c) => (c, cube_stability(c)?),
        Command::Torus(c) => (c, torus(c)?),
        Command::ObsdiamChain(c) => (c, obsdiam_chain(c)?),
        Command::CheckIcl(c) => (c, check_icl_cmd(c)?),
        Command::DecideOrder(c) => (c, decide_order(c)?),
        Command::Prohorov(c) => (c, prohorov_cmd(c)?),
    };
    let text = match common.format {
        Format::Csv => outcome.csv,
        Format::Json => outcome.json,
    };
    match &common.out {
        Some(p) => fs::write(p, text).map_err(|e| Failure::Lib(e.into()))?,
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| Failure::Lib(e.into()))?,
    }
    eprintln!("runtime_ms={:.1}", start.elapsed().as_secs_f64() * 1e3);
    Ok(outcome.passed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("assertion failure: see report");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
