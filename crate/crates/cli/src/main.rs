//! `geomrisk` — batch front door for the scenario engine.
//!
//! Every number in a report comes straight from a library operation; the
//! CLI only ingests files, dispatches, and formats. Commands that sample
//! (classify, recover-r) take a mandatory `--seed` and are byte-identical
//! for identical (inputs, seed). Exit codes: 0 when the run succeeds and
//! every property the command asserts holds, 1 when an asserted property
//! fails, 2 on errors (bad files, bad flags, domain violations).

mod ingest;
mod output;

use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use geomrisk_core::allocation::{car_acceptance, car_proportional, car_subdifferential};
use geomrisk_core::correspondence::{builtin_counterexamples, classify, CheckConfig, Side};
use geomrisk_core::duality::{recover_r, DualMeasure, RFunctional, RecoverConfig};
use geomrisk_core::measures::{MeasureFamily, MeasureSpec};
use geomrisk_core::portfolio::{
    check_frontier_shape, check_strategy_orderings, efficient_frontier, wealth_buy_and_hold,
    wealth_rebalanced, wealth_rebalanced_limit, GrossReturns, PortfolioProblem, SolverConfig,
};
use geomrisk_core::prob::{Position, Scenario};
use output::{emit, parse_grid, Cell, CsvTable};

#[derive(Parser)]
#[command(
    name = "geomrisk",
    version,
    about = "Scenario-based geometric (return) risk measurement",
    propagate_version = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Rule {
    /// Geometric premium of the unit under the anchored scenario.
    Subdifferential,
    /// Measure of the total, scaled by the transformed log-ratio premium.
    Proportional,
    /// Smallest acceptance level that admits the unit, on the level grid.
    Acceptance,
}

impl Rule {
    fn name(self) -> &'static str {
        match self {
            Rule::Subdifferential => "subdifferential",
            Rule::Proportional => "proportional",
            Rule::Acceptance => "acceptance",
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the configured measure on one position column.
    Eval {
        #[arg(long)]
        scenarios: PathBuf,
        #[arg(long)]
        measure: PathBuf,
        #[arg(long)]
        position: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the sampled property battery and report taxonomy flags.
    Classify {
        #[arg(long)]
        scenarios: PathBuf,
        #[arg(long)]
        measure: PathBuf,
        #[arg(long)]
        seed: u64,
        /// Samples per property (default 500).
        #[arg(long)]
        samples: Option<usize>,
        /// Relative comparison tolerance override.
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Recover the scenario-mean transform R(t; Q) on a t-grid.
    #[command(name = "recover-r")]
    RecoverR {
        #[arg(long)]
        scenarios: PathBuf,
        #[arg(long)]
        measure: PathBuf,
        /// Grid of log-mean targets, inclusive.
        #[arg(long, value_name = "lo:step:hi", allow_hyphen_values = true)]
        t_grid: String,
        /// Scenario index: into the file's d columns, or 0 for the
        /// reference measure when the file has none.
        #[arg(long, default_value_t = 0)]
        scenario: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Efficient frontier over a grid of expected-log-return caps; asserts
    /// the frontier is nonincreasing and quasi-convex.
    Frontier {
        #[arg(long)]
        scenarios: PathBuf,
        #[arg(long)]
        measure: PathBuf,
        /// Grid of caps on the basket's expected log return, inclusive.
        #[arg(long, value_name = "lo:step:hi", allow_hyphen_values = true)]
        r_grid: String,
        /// Relative tolerance for the shape assertions (default 1e-6).
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Allocate risk capital of sub-units within a total under a dual
    /// measure.
    Allocate {
        #[arg(long)]
        scenarios: PathBuf,
        #[arg(long)]
        measure: PathBuf,
        /// Comma-separated position columns to allocate to.
        #[arg(long, value_delimiter = ',')]
        units: Vec<String>,
        #[arg(long)]
        total: String,
        #[arg(long, value_enum)]
        rule: Rule,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Wealth paths: buy-and-hold, K-step rebalanced, and the continuous
    /// rebalancing limit. Rows of the scenario file are time periods here;
    /// asserts the strategy orderings.
    Simulate {
        #[arg(long)]
        scenarios: PathBuf,
        /// Rebalancing substeps per period.
        #[arg(long)]
        steps: usize,
        /// Comma-separated portfolio weights, one per asset column.
        #[arg(long = "w", value_delimiter = ',', allow_hyphen_values = true)]
        w: Vec<f64>,
        /// Initial wealth.
        #[arg(long, default_value_t = 1.0)]
        w0: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the built-in inequalities separating geometric from
    /// arithmetic convexity, with margins; asserts both hold.
    Counterexamples {
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn load_measure(path: &Path) -> Result<MeasureSpec> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read measure spec {}", path.display()))?;
    serde_json::from_str(&text)
        .with_context(|| format!("measure spec {} does not parse", path.display()))
}

/// (report, table, asserted-properties verdict if the command asserts any)
type RunOutput = (serde_json::Value, CsvTable, Option<bool>);

fn run_eval(scenarios: &Path, measure: &Path, position: &str) -> Result<RunOutput> {
    let data = ingest::ingest_scenarios(scenarios)?;
    let spec = load_measure(measure)?;
    let f = spec.bind(&data.space, data.scenarios.as_ref())?;
    let value = match f.side() {
        Side::Return => f.eval_positive(&data.positive_position(position)?)?,
        Side::Monetary => {
            f.eval(&Position::new(data.space.clone(), data.position(position)?.to_vec())?)?
        }
    };
    let json = serde_json::json!({
        "command": "eval",
        "measure": f.label(),
        "side": f.side(),
        "position": position,
        "value": value,
    });
    let table = CsvTable {
        header: vec!["measure".into(), "side".into(), "position".into(), "value".into()],
        rows: vec![vec![
            Cell::Text(f.label().to_owned()),
            Cell::Text(serde_json::to_value(f.side())?.as_str().unwrap_or("?").to_owned()),
            Cell::Text(position.to_owned()),
            Cell::Num(value),
        ]],
    };
    Ok((json, table, None))
}

fn run_classify(
    scenarios: &Path,
    measure: &Path,
    seed: u64,
    samples: Option<usize>,
    tol: Option<f64>,
) -> Result<RunOutput> {
    let data = ingest::ingest_scenarios(scenarios)?;
    let spec = load_measure(measure)?;
    let f = spec.bind(&data.space, data.scenarios.as_ref())?;
    let mut cfg = CheckConfig::seeded(seed);
    if let Some(s) = samples {
        cfg.samples = s;
    }
    if let Some(t) = tol {
        cfg.tolerance = t;
    }
    let classification = classify(&f, &cfg)?;
    let json = serde_json::json!({
        "command": "classify",
        "seed": seed,
        "samples": cfg.samples,
        "classification": serde_json::to_value(&classification)?,
    });
    let mut rows = Vec::new();
    for check in &classification.checks {
        rows.push(vec![
            Cell::Text(
                serde_json::to_value(check.property)?.as_str().unwrap_or("?").to_owned(),
            ),
            Cell::Text(serde_json::to_value(check.side)?.as_str().unwrap_or("?").to_owned()),
            Cell::Text(check.holds.to_string()),
            Cell::Int(check.samples as i64),
            Cell::Num(check.max_violation),
        ]);
    }
    let table = CsvTable {
        header: vec![
            "property".into(),
            "side".into(),
            "holds".into(),
            "samples".into(),
            "max_violation".into(),
        ],
        rows,
    };
    Ok((json, table, None))
}

fn run_recover_r(
    scenarios: &Path,
    measure: &Path,
    t_grid: &str,
    scenario: usize,
    seed: u64,
) -> Result<RunOutput> {
    let data = ingest::ingest_scenarios(scenarios)?;
    let spec = load_measure(measure)?;
    let f = spec.bind(&data.space, data.scenarios.as_ref())?;
    let q = match &data.scenarios {
        Some(qs) => {
            if scenario >= qs.len() {
                bail!("--scenario {scenario} but the file has {} density columns", qs.len());
            }
            qs.get(scenario).clone()
        }
        None => {
            if scenario != 0 {
                bail!("--scenario {scenario} but the file has no density columns");
            }
            Scenario::reference(data.space.clone())
        }
    };
    let cfg = RecoverConfig { seed, ..RecoverConfig::default() };
    let grid = parse_grid(t_grid)?;
    let mut rows = Vec::new();
    let mut points = Vec::new();
    for &t in &grid {
        let r = recover_r(&f, t, &q, &cfg)?;
        points.push(serde_json::json!({"t": t, "r": r}));
        rows.push(vec![Cell::Num(t), Cell::Num(r), Cell::Int(scenario as i64)]);
    }
    let json = serde_json::json!({
        "command": "recover-r",
        "measure": f.label(),
        "scenario": scenario,
        "seed": seed,
        "points": points,
    });
    let table =
        CsvTable { header: vec!["t".into(), "r".into(), "scenario".into()], rows };
    Ok((json, table, None))
}

fn run_frontier(
    scenarios: &Path,
    measure: &Path,
    r_grid: &str,
    tol: Option<f64>,
) -> Result<RunOutput> {
    let data = ingest::ingest_scenarios(scenarios)?;
    let spec = load_measure(measure)?;
    let f = spec.bind(&data.space, data.scenarios.as_ref())?;
    let assets = data.all_positive_positions()?;
    if assets.is_empty() {
        bail!("the scenario file has no position columns to use as assets");
    }
    let names: Vec<String> = assets.iter().map(|(n, _)| n.clone()).collect();
    let problem =
        PortfolioProblem::new(f, assets.into_iter().map(|(_, p)| p).collect::<Vec<_>>())?;
    let caps = parse_grid(r_grid)?;
    let points = efficient_frontier(&problem, &caps, &SolverConfig::default())?;
    let shape_tol = tol.unwrap_or(1e-6);
    let shape = check_frontier_shape(&points, shape_tol);
    let holds = shape.holds();

    let mut rows = Vec::new();
    for p in &points {
        let mut row = vec![Cell::Num(p.cap)];
        row.extend(p.weights.iter().map(|&w| Cell::Num(w)));
        row.push(Cell::Num(p.value));
        row.push(Cell::Text(format!("{:?}", p.status)));
        rows.push(row);
    }
    let mut header = vec!["r".into()];
    header.extend(names.iter().map(|n| format!("w_{n}")));
    header.push("value".into());
    header.push("status".into());

    let json = serde_json::json!({
        "command": "frontier",
        "assets": names,
        "caps": caps,
        "points": serde_json::to_value(&points)?,
        "shape": serde_json::to_value(&shape)?,
        "shape_tolerance": shape_tol,
        "asserted": {"nonincreasing_and_quasi_convex": holds},
    });
    Ok((json, CsvTable { header, rows }, Some(holds)))
}

fn run_allocate(
    scenarios: &Path,
    measure: &Path,
    units: &[String],
    total: &str,
    rule: Rule,
) -> Result<RunOutput> {
    let data = ingest::ingest_scenarios(scenarios)?;
    let spec = load_measure(measure)?;
    let r = match &spec.family {
        MeasureFamily::Dual { r } => RFunctional::new(r.clone())?,
        other => bail!(
            "allocate works on dual measures (family \"dual\"); the measure file configures {:?}",
            serde_json::to_value(other)?["family"]
        ),
    };
    let qs = data
        .scenarios
        .clone()
        .ok_or_else(|| anyhow!("allocate needs density columns (d1, d2, ...) in the scenario file"))?;
    let dm = DualMeasure::new(r, qs)?;
    let total_pos = data.positive_position(total)?;
    let (total_value, anchor) = dm.eval_with_scenario(&total_pos)?;
    let density = dm.scenarios().get(anchor).density().to_vec();

    let alloc = |unit: &geomrisk_core::prob::PositivePosition| -> geomrisk_core::Result<f64> {
        match rule {
            Rule::Subdifferential => car_subdifferential(&dm, unit, &total_pos),
            Rule::Proportional => car_proportional(&dm, unit, &total_pos),
            Rule::Acceptance => car_acceptance(&dm, unit, &total_pos),
        }
    };

    let mut rows = Vec::new();
    let mut allocations = Vec::new();
    for name in units {
        let unit = data.positive_position(name)?;
        let value = alloc(&unit)?;
        allocations.push(serde_json::json!({
            "unit": name,
            "rule": rule.name(),
            "allocation": value,
        }));
        rows.push(vec![
            Cell::Text(name.clone()),
            Cell::Text(rule.name().into()),
            Cell::Num(value),
        ]);
    }
    // The chosen scenario density rides along as labeled rows so the CSV
    // stays rectangular.
    for (label, d) in data.space.outcomes().iter().zip(&density) {
        rows.push(vec![
            Cell::Text(format!("density:{label}")),
            Cell::Text(rule.name().into()),
            Cell::Num(*d),
        ]);
    }

    let json = serde_json::json!({
        "command": "allocate",
        "measure": dm.as_risk_functional("dual").label(),
        "rule": rule.name(),
        "total": total,
        "total_value": total_value,
        "anchor_scenario": anchor,
        "scenario_density": density,
        "allocations": allocations,
    });
    let table = CsvTable {
        header: vec!["unit".into(), "rule".into(), "allocation".into()],
        rows,
    };
    Ok((json, table, None))
}

fn run_simulate(scenarios: &Path, steps: usize, w: &[f64], w0: f64) -> Result<RunOutput> {
    if steps == 0 {
        bail!("--steps must be at least 1");
    }
    let data = ingest::ingest_scenarios(scenarios)?;
    if data.columns.is_empty() {
        bail!("the scenario file has no asset columns");
    }
    let names: Vec<String> = data.columns.iter().map(|(n, _)| n.clone()).collect();
    let periods = data.space.len();
    let rows_matrix: Vec<Vec<f64>> = (0..periods)
        .map(|t| data.columns.iter().map(|(_, col)| col[t]).collect())
        .collect();
    let returns = GrossReturns::new(names.clone(), rows_matrix)?;

    let bh = wealth_buy_and_hold(w0, w, &returns)?;
    let reb = wealth_rebalanced(w0, w, &returns, steps)?;
    let limit = wealth_rebalanced_limit(w0, w, &returns)?;
    let orderings = check_strategy_orderings(w0, w, &returns, &[steps])?;
    let holds = orderings.holds();

    let mut rows = Vec::new();
    for (name, path) in
        [("buy_and_hold", &bh), ("rebalanced", &reb), ("rebalanced_limit", &limit)]
    {
        for (t, wealth) in path.iter().enumerate() {
            rows.push(vec![Cell::Int(t as i64), Cell::Text(name.into()), Cell::Num(*wealth)]);
        }
    }
    let json = serde_json::json!({
        "command": "simulate",
        "assets": names,
        "steps": steps,
        "w0": w0,
        "weights": w,
        "paths": {
            "buy_and_hold": bh,
            "rebalanced": reb,
            "rebalanced_limit": limit,
        },
        "orderings": serde_json::to_value(&orderings)?,
        "asserted": {"strategy_orderings": holds},
    });
    let table = CsvTable {
        header: vec!["t".into(), "strategy".into(), "wealth".into()],
        rows,
    };
    Ok((json, table, Some(holds)))
}

fn run_counterexamples() -> Result<RunOutput> {
    let report = builtin_counterexamples()?;
    let m = &report.mixture;
    let s = &report.scaling;
    let mixture_line = format!(
        "{:.4} > {:.4} (arithmetic mixture above both legs; margin {:.4})",
        m.arithmetic_mixture_value,
        m.measure_y,
        m.arithmetic_mixture_value - m.measure_y
    );
    let scaling_line = format!(
        "{:.4} > {:.4} (scaled measure above the homogeneous value; margin {:.4})",
        s.measure_scaled,
        std::f64::consts::E,
        s.measure_scaled - std::f64::consts::E
    );
    let confirmed = report.all_confirmed;
    let json = serde_json::json!({
        "command": "counterexamples",
        "summary": [mixture_line.clone(), scaling_line.clone()],
        "report": serde_json::to_value(&report)?,
        "asserted": {"all_confirmed": confirmed},
    });
    let table = CsvTable {
        header: vec!["inequality".into(), "lhs".into(), "rhs".into(), "margin".into()],
        rows: vec![
            vec![
                Cell::Text("mixture".into()),
                Cell::Num(m.arithmetic_mixture_value),
                Cell::Num(m.measure_y),
                Cell::Num(m.arithmetic_mixture_value - m.measure_y),
            ],
            vec![
                Cell::Text("scaling".into()),
                Cell::Num(s.measure_scaled),
                Cell::Num(std::f64::consts::E),
                Cell::Num(s.measure_scaled - std::f64::consts::E),
            ],
        ],
    };
    Ok((json, table, Some(confirmed)))
}

fn dispatch(cli: Cli) -> Result<(RunOutput, Option<PathBuf>)> {
    match cli.command {
        Command::Eval { scenarios, measure, position, out } => {
            Ok((run_eval(&scenarios, &measure, &position)?, out))
        }
        Command::Classify { scenarios, measure, seed, samples, tol, out } => {
            Ok((run_classify(&scenarios, &measure, seed, samples, tol)?, out))
        }
        Command::RecoverR { scenarios, measure, t_grid, scenario, seed, out } => {
            Ok((run_recover_r(&scenarios, &measure, &t_grid, scenario, seed)?, out))
        }
        Command::Frontier { scenarios, measure, r_grid, tol, out } => {
            Ok((run_frontier(&scenarios, &measure, &r_grid, tol)?, out))
        }
        Command::Allocate { scenarios, measure, units, total, rule, out } => {
            Ok((run_allocate(&scenarios, &measure, &units, &total, rule)?, out))
        }
        Command::Simulate { scenarios, steps, w, w0, out } => {
            Ok((run_simulate(&scenarios, steps, &w, w0)?, out))
        }
        Command::Counterexamples { out } => Ok((run_counterexamples()?, out)),
    }
}

fn main() {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(((json, table, asserted), out)) => {
            if let Err(e) = emit(&json, &table, out.as_deref()) {
                eprintln!("{}", serde_json::json!({"error": format!("{e:#}")}));
                std::process::exit(2);
            }
            if asserted == Some(false) {
                std::process::exit(1);
            }
        }
        Err(e) => {
            eprintln!("{}", serde_json::json!({"error": format!("{e:#}")}));
            std::process::exit(2);
        }
    }
}
