mod input;
mod report;

use std::fs::File;
use std::io::{self, BufWriter};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{ArgGroup, Parser, Subcommand, ValueEnum};

use wikigame_core::empirics::{
    equivalence_classes, validate, write_page_dir, EmpiricsError, PageData, ValidationReport,
    DEFAULT_CLASS_TOL,
};
use wikigame_core::equilibrium::{default_start, DEFAULT_DYNAMICS_TOL, DEFAULT_MAX_SWEEPS};
use wikigame_core::wiki_sim::{generate_history, HistoryConfig, SimError};
use wikigame_core::{
    asymptotic_ownership, best_response_dynamics, closed_form, feasibility, foc_residual,
    prune_active, spectral_solve, EffortProfile, EquilibriumSolution, GameError, StrategyProfile,
};

use input::{read_betas, SimConfig};
use report::{render, Format, Table};

#[derive(Parser)]
#[command(
    name = "wikigame",
    version,
    about = "Content-ownership game: solve, simulate, validate"
)]
struct Cli {
    /// Output format.
    #[arg(long, value_enum, default_value = "table", global = true)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Equilibrium contributions and ownership for an effort profile.
    Solve {
        /// File of efforts per unit contribution, one per line or comma separated.
        #[arg(long)]
        betas: PathBuf,
        #[arg(long, value_enum, default_value = "closed-form")]
        method: SolveMethod,
        /// Convergence tolerance for the dynamics method.
        #[arg(long, default_value_t = DEFAULT_DYNAMICS_TOL)]
        tol: f64,
        #[arg(long, default_value_t = DEFAULT_MAX_SWEEPS)]
        max_sweeps: usize,
        /// Write the report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate page histories and write history.tsv, edits.csv and census.csv per page.
    #[command(group(ArgGroup::new("source").required(true).args(["config", "preset"])))]
    Simulate {
        /// TOML file listing the pages to generate.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Built-in page set instead of a config file.
        #[arg(long, value_enum)]
        preset: Option<Preset>,
        #[arg(long)]
        seed: u64,
        /// Output directory; each page gets a subdirectory.
        #[arg(long)]
        out: PathBuf,
    },
    /// Compare model and observed ownership on page directories.
    Validate {
        /// Training page directories.
        #[arg(long, required = true, num_args = 1.., value_delimiter = ',')]
        train: Vec<PathBuf>,
        /// Held-out page directories; without them no fit is reported.
        #[arg(long, num_args = 1.., value_delimiter = ',')]
        holdout: Vec<PathBuf>,
        /// Ownership tolerance for equivalence classes.
        #[arg(long, default_value_t = DEFAULT_CLASS_TOL)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Group contributors of an effort profile by equilibrium ownership.
    Classes {
        #[arg(long)]
        betas: PathBuf,
        #[arg(long, default_value_t = DEFAULT_CLASS_TOL)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SolveMethod {
    ClosedForm,
    Spectral,
    Dynamics,
}

#[derive(Clone, Copy, ValueEnum)]
enum Preset {
    Articles,
}

#[derive(Debug)]
enum Failure {
    Input(String),
    Infeasible(String),
    Degenerate(String),
    Other(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Other(_) => 1,
            Failure::Input(_) => 2,
            Failure::Infeasible(_) => 3,
            Failure::Degenerate(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Input(m)
            | Failure::Infeasible(m)
            | Failure::Degenerate(m)
            | Failure::Other(m) => m,
        }
    }
}

impl From<GameError> for Failure {
    fn from(e: GameError) -> Self {
        match e {
            GameError::TooFewContributors(_)
            | GameError::PrunedBelowTwo(_)
            | GameError::Infeasible(_) => Failure::Infeasible(e.to_string()),
            GameError::NoConvergence { .. } => Failure::Other(e.to_string()),
            _ => Failure::Input(e.to_string()),
        }
    }
}

impl From<EmpiricsError> for Failure {
    fn from(e: EmpiricsError) -> Self {
        match e {
            EmpiricsError::Game(g) => g.into(),
            e if e.is_degenerate() => Failure::Degenerate(e.to_string()),
            e => Failure::Input(e.to_string()),
        }
    }
}

impl From<SimError> for Failure {
    fn from(e: SimError) -> Self {
        match e {
            SimError::Io(m) => Failure::Other(m),
            e => Failure::Input(e.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("wikigame: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Solve {
            betas,
            method,
            tol,
            max_sweeps,
            out,
        } => emit(
            &solve(&betas, method, tol, max_sweeps)?,
            cli.format,
            out.as_deref(),
        ),
        Command::Simulate {
            config,
            preset,
            seed,
            out,
        } => {
            let config = match (config, preset) {
                (Some(path), _) => SimConfig::read(&path).map_err(Failure::Input)?,
                (None, _) => SimConfig::articles(),
            };
            emit(&simulate(&config, seed, &out)?, cli.format, None)
        }
        Command::Validate {
            train,
            holdout,
            tol,
            out,
        } => emit(
            &validate_pages(&train, &holdout, tol)?,
            cli.format,
            out.as_deref(),
        ),
        Command::Classes { betas, tol, out } => {
            emit(&classes(&betas, tol)?, cli.format, out.as_deref())
        }
    }
}

fn emit(tables: &[Table], format: Format, out: Option<&Path>) -> Result<(), Failure> {
    let result = match out {
        Some(path) => File::create(path).and_then(|f| render(tables, format, BufWriter::new(f))),
        None => render(tables, format, io::stdout().lock()),
    };
    match result {
        Err(e) if e.kind() == io::ErrorKind::BrokenPipe => Ok(()),
        other => other.map_err(|e| Failure::Other(e.to_string())),
    }
}

fn load_profile(path: &Path) -> Result<EffortProfile, Failure> {
    let betas = read_betas(path).map_err(Failure::Input)?;
    Ok(EffortProfile::new(betas)?)
}

fn check_tol(tol: f64, strict: bool) -> Result<(), Failure> {
    if tol.is_finite() && (tol > 0.0 || !strict && tol == 0.0) {
        Ok(())
    } else {
        Err(Failure::Input(format!("invalid tolerance {tol}")))
    }
}

fn solve(
    path: &Path,
    method: SolveMethod,
    tol: f64,
    max_sweeps: usize,
) -> Result<Vec<Table>, Failure> {
    let efforts = load_profile(path)?;
    let sol = match method {
        SolveMethod::ClosedForm => closed_form(&efforts)?,
        SolveMethod::Spectral => {
            let active = prune_active(&efforts)?;
            let sub = spectral_solve(&efforts.restrict(&active)?)?;
            let mut strategies = vec![0.0; efforts.len()];
            let mut ownership = vec![0.0; efforts.len()];
            for (k, &i) in active.iter().enumerate() {
                strategies[i] = sub.strategies[k];
                ownership[i] = sub.ownership[k];
            }
            EquilibriumSolution {
                strategies,
                ownership,
                active,
                ..sub
            }
        }
        SolveMethod::Dynamics => {
            check_tol(tol, true)?;
            best_response_dynamics(&efforts, &default_start(&efforts), tol, max_sweeps)?
        }
    };

    let sub_efforts = efforts.restrict(&sol.active)?;
    let sub_x: Vec<f64> = sol.active.iter().map(|&i| sol.strategies[i]).collect();
    let residual = foc_residual(&StrategyProfile::new(sub_x)?, &sub_efforts)?
        .into_iter()
        .fold(0.0, |m: f64, r| m.max(r.abs()));

    let feasible = feasibility(&efforts);
    let asym = asymptotic_ownership(&efforts);
    let mut players = Table::new(
        "players",
        &[
            "player",
            "beta",
            "feasible",
            "active",
            "x",
            "u",
            "u_asymptotic",
        ],
    );
    for (i, &b) in efforts.betas().iter().enumerate() {
        players.push(vec![
            (i + 1).into(),
            b.into(),
            feasible[i].into(),
            sol.is_active(i).into(),
            sol.strategies[i].into(),
            sol.ownership[i].into(),
            asym[i].into(),
        ]);
    }
    let mut summary = Table::new(
        "summary",
        &[
            "method",
            "players",
            "active",
            "total_content",
            "foc_residual_max",
            "iterations",
        ],
    );
    summary.push(vec![
        sol.method.as_str().into(),
        efforts.len().into(),
        sol.active.len().into(),
        sol.total_content().into(),
        residual.into(),
        sol.iterations.into(),
    ]);
    Ok(vec![players, summary])
}

fn simulate(config: &SimConfig, seed: u64, out: &Path) -> Result<Vec<Table>, Failure> {
    let mut table = Table::new(
        "pages",
        &[
            "page",
            "editors",
            "edits",
            "seed",
            "sentences",
            "owners",
            "path",
        ],
    );
    for (k, page) in config.pages.iter().enumerate() {
        let page_seed = seed.wrapping_add(k as u64);
        let efforts = config.efforts(page, page_seed).map_err(Failure::Input)?;
        let history = generate_history(&HistoryConfig {
            editors: page.editors,
            edits: page.edits,
            efforts,
            seed: page_seed,
        })?;
        let dir = out.join(&page.name);
        let census = write_page_dir(&dir, &history).map_err(|e| match e {
            EmpiricsError::Io(m) => Failure::Other(m),
            e => e.into(),
        })?;
        table.push(vec![
            page.name.as_str().into(),
            page.editors.into(),
            page.edits.into(),
            page_seed.into(),
            census.total().into(),
            census.counts.len().into(),
            dir.display().to_string().into(),
        ]);
    }
    Ok(vec![table])
}

fn validate_pages(train: &[PathBuf], holdout: &[PathBuf], tol: f64) -> Result<Vec<Table>, Failure> {
    check_tol(tol, false)?;
    let load = |dirs: &[PathBuf]| {
        dirs.iter()
            .map(|d| PageData::load(d))
            .collect::<Result<Vec<_>, _>>()
    };
    let train = load(train)?;
    let holdout = load(holdout)?;
    let report = validate(&train, &holdout, tol)?;
    let sentences = |name: &str| {
        train
            .iter()
            .chain(&holdout)
            .find(|p| p.name == name)
            .map_or(0, |p| p.census.total())
    };
    Ok(validation_tables(&report, sentences))
}

fn join_ids<T: ToString>(ids: impl IntoIterator<Item = T>) -> String {
    ids.into_iter()
        .map(|i| i.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

fn validation_tables(report: &ValidationReport, sentences: impl Fn(&str) -> usize) -> Vec<Table> {
    let mut pages = Table::new(
        "pages",
        &[
            "page",
            "role",
            "contributors",
            "sentences",
            "pearson",
            "predicted_classes",
            "observed_classes",
        ],
    );
    let mut contributors = Table::new(
        "contributors",
        &["page", "contributor", "beta", "predicted", "observed"],
    );
    let mut classes = Table::new(
        "classes",
        &["page", "source", "class", "size", "ownership", "members"],
    );
    for p in &report.pages {
        let role = match p.role {
            wikigame_core::empirics::PageRole::Train => "train",
            wikigame_core::empirics::PageRole::Holdout => "holdout",
        };
        pages.push(vec![
            p.name.as_str().into(),
            role.into(),
            p.contributors.len().into(),
            sentences(&p.name).into(),
            p.pearson.into(),
            p.predicted_classes.len().into(),
            p.observed_classes.len().into(),
        ]);
        for (i, c) in p.contributors.iter().enumerate() {
            contributors.push(vec![
                p.name.as_str().into(),
                c.0.into(),
                p.betas[i].into(),
                p.predicted[i].into(),
                p.observed[i].into(),
            ]);
        }
        for (source, values, groups) in [
            ("predicted", &p.predicted, &p.predicted_classes),
            ("observed", &p.observed, &p.observed_classes),
        ] {
            for (k, group) in groups.iter().enumerate() {
                let mean = group
                    .iter()
                    .map(|c| values[p.contributors.iter().position(|x| x == c).unwrap()])
                    .sum::<f64>()
                    / group.len() as f64;
                classes.push(vec![
                    p.name.as_str().into(),
                    source.into(),
                    (k + 1).into(),
                    group.len().into(),
                    mean.into(),
                    join_ids(group.iter().map(|c| c.0)).into(),
                ]);
            }
        }
    }

    let mut tables = vec![pages, contributors, classes];
    match &report.fit {
        Some(fit) => {
            let mut summary = Table::new(
                "summary",
                &[
                    "pages",
                    "pooled_pearson",
                    "rho",
                    "delta",
                    "training_error_percent",
                ],
            );
            summary.push(vec![
                report.pages.len().into(),
                report.pooled_pearson.into(),
                fit.rho.into(),
                fit.delta.into(),
                report.training_error_percent.into(),
            ]);
            let mut holdout = Table::new("holdout", &["page", "error_percent"]);
            for h in &report.holdout_errors {
                holdout.push(vec![h.page.as_str().into(), h.error_percent.into()]);
            }
            tables.push(summary);
            tables.push(holdout);
        }
        None => {
            let mut summary = Table::new("summary", &["pages", "pooled_pearson"]);
            summary.push(vec![
                report.pages.len().into(),
                report.pooled_pearson.into(),
            ]);
            tables.push(summary);
        }
    }
    tables
}

fn classes(path: &Path, tol: f64) -> Result<Vec<Table>, Failure> {
    check_tol(tol, false)?;
    let efforts = load_profile(path)?;
    let sol = closed_form(&efforts)?;
    let groups = equivalence_classes(&sol.ownership, tol)?;
    let betas = efforts.betas();
    let mut table = Table::new(
        "classes",
        &[
            "class",
            "size",
            "ownership",
            "beta_min",
            "beta_max",
            "members",
        ],
    );
    for (k, group) in groups.iter().enumerate() {
        let mean = group.iter().map(|&i| sol.ownership[i]).sum::<f64>() / group.len() as f64;
        let lo = group
            .iter()
            .map(|&i| betas[i])
            .fold(f64::INFINITY, f64::min);
        let hi = group.iter().map(|&i| betas[i]).fold(0.0, f64::max);
        table.push(vec![
            (k + 1).into(),
            group.len().into(),
            mean.into(),
            lo.into(),
            hi.into(),
            join_ids(group.iter().map(|i| i + 1)).into(),
        ]);
    }
    Ok(vec![table])
}
