use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use fullgroup::generators::{build_U, build_schedule, rank_generators};
use fullgroup::rational::{fmt_rational, parse_rational};
use fullgroup::scenario::bundled;
use fullgroup::{Error, FieldElement, Graphing, Rational, Registry, Report, Scenario};

#[derive(Parser)]
#[command(name = "fullgroup", version, about = "Exact checks on finite-depth full groups")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct Common {
    /// Scenario file, or the name of a bundled scenario.
    #[arg(long)]
    scenario: Option<String>,
    /// Working depth, overriding the scenario.
    #[arg(long)]
    depth: Option<u32>,
    /// Output path (report JSON, or directory for element files).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long)]
    jobs: Option<usize>,
    /// Maximal word length for probes and relation searches.
    #[arg(long)]
    max_words: Option<usize>,
    /// Probe tolerance as `p/q`.
    #[arg(long)]
    epsilon: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Run every check declared in a scenario.
    Verify(Common),
    /// Write `T`, `U` and the rank generators as element files.
    ConstructGenerators(Common),
    /// Run the density probe of a scenario.
    DensitySearch(Common),
    /// Perturb `U` against every short reduced word and search for relations.
    FreeWords(Common),
    /// Per-atom C-cost of a graphing file.
    Cost {
        graphing: PathBuf,
    },
    /// `d_u`, `d_1` and `d_C` between two element files.
    Metrics {
        first: PathBuf,
        second: PathBuf,
    },
}

enum Failure {
    Checks,
    Usage(String),
    Resolution(String),
    Other(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse { .. } | Error::InvalidArgument(_) => Failure::Usage(e.to_string()),
            Error::Resolution { .. } | Error::Infeasible(_) | Error::MemoryCap { .. } => {
                Failure::Resolution(e.to_string())
            }
            Error::NotInFullGroup(_) | Error::Invariant(_) => Failure::Other(e.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Checks) => ExitCode::from(1),
        Err(Failure::Other(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Resolution(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(3)
        }
    }
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Verify(c) => {
            let scenario = load(&c)?;
            report(&c, Registry::builtin().run(&scenario)?)
        }
        Command::DensitySearch(c) => {
            let mut scenario = load(&c)?;
            scenario.checks = vec!["density".into()];
            report(&c, Registry::builtin().run(&scenario)?)
        }
        Command::FreeWords(c) => {
            let mut scenario = load(&c)?;
            scenario.checks = vec!["free-words".into()];
            report(&c, Registry::builtin().run(&scenario)?)
        }
        Command::ConstructGenerators(c) => construct(&c),
        Command::Cost { graphing } => {
            let (base, g) = Graphing::parse(&read(&graphing)?)?;
            for (a, v) in g.ccost().values().iter().enumerate() {
                println!("{} {}", base.label(a), fmt_rational(&v.to_rational()));
            }
            Ok(())
        }
        Command::Metrics { first, second } => {
            let f = FieldElement::parse(&read(&first)?)?;
            let g = FieldElement::parse(&read(&second)?)?;
            println!("d_u {}", fmt_rational(&f.d_u(&g)?));
            println!("d_1 {}", fmt_rational(&f.d_1(&g)?));
            println!("d_C {}", fmt_rational(&f.d_c(&g)?.to_rational()));
            Ok(())
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn load(c: &Common) -> Result<Scenario, Failure> {
    if let Some(jobs) = c.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs.max(1))
            .build_global()
            .map_err(|e| Failure::Other(e.to_string()))?;
    }
    let name = c
        .scenario
        .as_deref()
        .ok_or_else(|| Failure::Usage("--scenario is required".into()))?;
    let mut scenario = if Path::new(name).exists() {
        Scenario::parse(&read(Path::new(name))?)?
    } else {
        bundled(name).ok_or_else(|| Failure::Usage(format!("no scenario file or bundled scenario `{name}`")))?
    };
    if let Some(d) = c.depth {
        scenario.depth = d;
    }
    if let Some(l) = c.max_words {
        scenario.probe.max_len = l;
        scenario.params.insert("free-words.max_len".into(), l.to_string());
    }
    if let Some(e) = &c.epsilon {
        let eps: Rational = parse_rational(e)?;
        scenario.probe.epsilon = eps;
    }
    Ok(scenario)
}

fn report(c: &Common, report: Report) -> Result<(), Failure> {
    let json = report.to_json()?;
    match &c.out {
        Some(path) => fs::write(path, json + "\n").map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?,
        None => println!("{json}"),
    }
    eprint!("{}", report.summary());
    if report.pass {
        Ok(())
    } else {
        Err(Failure::Checks)
    }
}

fn construct(c: &Common) -> Result<(), Failure> {
    let scenario = load(c)?;
    let out = c.out.clone().unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&out).map_err(|e| Failure::Usage(format!("{}: {e}", out.display())))?;
    let s = build_schedule(
        std::sync::Arc::new(scenario.base.clone()),
        scenario.groups.clone(),
        scenario.epsilons.clone(),
        scenario.length,
        scenario.depth,
        &scenario.basis,
    )?;
    let mut files = vec![("t.elem".to_string(), s.t_field()?), ("u.elem".to_string(), build_U(&s)?)];
    if !scenario.graphings.is_empty() {
        let graphings: Vec<Graphing> = scenario.graphings.iter().map(|(_, g)| g.clone()).collect();
        let r = rank_generators(&s, &graphings)?;
        for (i, e) in r.elements.into_iter().enumerate() {
            files.push((format!("generator_{i}.elem"), e));
        }
    }
    for (name, element) in files {
        let path = out.join(&name);
        let mut text = element.to_lines().join("\n");
        text.push('\n');
        fs::write(&path, text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
        println!("{}", path.display());
    }
    Ok(())
}
