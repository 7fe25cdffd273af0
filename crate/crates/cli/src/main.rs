//! `folkman`: reproducible experiments around two-color Folkman numbers.

use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use folkman_core::bounds::{bound_table_csv, check_first_moment, TABLE_MAX_K};
use folkman_core::coloring::{
    doubling_coloring, exact_mono_probability, monte_carlo_mono, uniform_coloring, Coloring,
    ColoringKind,
};
use folkman_core::search::{folkman_exact, import_model, parse_model, to_cnf, SearchBudget};
use folkman_core::sumset::{
    equal_sum_disjoint_pair, finite_sums, is_sum_distinct, representative_set, KSet,
};
use folkman_core::verifier::{find_witness, verify_doubling, verify_theorem, Mode};
use folkman_core::{with_threads, Error};

const VERSION: &str = env!("CARGO_PKG_VERSION");

const EXIT_CHECK_FAILED: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_MALFORMED: u8 = 3;
const EXIT_IO: u8 = 4;
const EXIT_LIMIT: u8 = 5;

#[derive(Parser)]
#[command(
    name = "folkman",
    version,
    about = "Lower-bound experiments for two-color Folkman numbers"
)]
struct Cli {
    /// Worker threads for the verifier and the exact search (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    /// Write the main output here instead of stdout.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    /// Print per-item detail.
    #[arg(long, short, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Finite sums of a set, sum-distinctness and an equal-sum disjoint pair.
    Sums {
        /// Comma-separated positive integers, e.g. 1,2,3.
        #[arg(long)]
        set: String,
    },
    /// Emit a coloring file.
    Color {
        #[arg(long)]
        n: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "doubling", value_parser = str::parse::<ColoringKind>)]
        kind: ColoringKind,
    },
    /// Exact and Monte Carlo probability that S(A) is monochromatic under the doubling coloring.
    Prob {
        #[arg(long)]
        set: String,
        #[arg(long, default_value_t = 10_000)]
        trials: u64,
        /// First seed; trial i uses seed + i.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Scan seeded doubling colorings of [n] for witnesses.
    Verify {
        #[arg(long)]
        k: usize,
        /// Defaults to floor(2^(2^(k-1)/k)).
        #[arg(long)]
        n: Option<u64>,
        #[command(flatten)]
        seeds: SeedArgs,
        #[arg(long, default_value = "sum-distinct-pruned", value_parser = str::parse::<Mode>)]
        mode: Mode,
    },
    /// CSV of the first-moment inequalities.
    BoundTable {
        #[arg(long, default_value_t = 4)]
        kmin: u32,
        #[arg(long, default_value_t = TABLE_MAX_K)]
        kmax: u32,
    },
    /// Least n whose colorings all contain a witness, by budgeted search.
    Exact {
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 64)]
        nmax: u64,
        #[command(flatten)]
        budget: BudgetArgs,
    },
    /// DIMACS CNF whose models are the witness-free colorings of [n] with 1 red.
    Cnf {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        k: usize,
        #[command(flatten)]
        budget: BudgetArgs,
    },
    /// Validate that a SAT model or a coloring file is witness-free.
    CheckCert {
        #[arg(long)]
        k: usize,
        /// Solver output: signed literals ending in 0.
        #[arg(
            long,
            conflicts_with = "coloring",
            required_unless_present = "coloring"
        )]
        model: Option<PathBuf>,
        /// Coloring file as written by `color`.
        #[arg(long)]
        coloring: Option<PathBuf>,
        /// Size of [n] for a model; defaults to its largest variable.
        #[arg(long)]
        n: Option<u64>,
        #[arg(long, default_value = "generic", value_parser = str::parse::<Mode>)]
        mode: Mode,
    },
}

#[derive(Args)]
struct SeedArgs {
    /// Use seeds 0..N.
    #[arg(long, default_value_t = 10, conflicts_with = "seed_list")]
    seeds: u64,
    /// Explicit comma-separated seeds.
    #[arg(long, value_delimiter = ',')]
    seed_list: Option<Vec<u64>>,
}

impl SeedArgs {
    fn list(&self) -> Vec<u64> {
        self.seed_list
            .clone()
            .unwrap_or_else(|| (0..self.seeds).collect())
    }

    fn describe(&self) -> String {
        match &self.seed_list {
            Some(v) => v.iter().map(u64::to_string).collect::<Vec<_>>().join(","),
            None => format!("0..{}", self.seeds),
        }
    }
}

#[derive(Args)]
struct BudgetArgs {
    #[arg(long, default_value_t = SearchBudget::default().max_nodes)]
    node_budget: u64,
    #[arg(long, default_value_t = SearchBudget::default().max_constraints)]
    constraint_budget: usize,
}

impl BudgetArgs {
    fn budget(&self) -> SearchBudget {
        SearchBudget {
            max_constraints: self.constraint_budget,
            max_nodes: self.node_budget,
        }
    }
}

#[derive(Debug)]
enum Failure {
    Core(Error),
    Io(PathBuf, io::Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Io(..) => EXIT_IO,
            Failure::Core(e) => match e {
                Error::InvalidArgument(_) => EXIT_USAGE,
                Error::InvalidSet(_)
                | Error::Parse(_)
                | Error::OutOfRange { .. }
                | Error::PruneNeedsDoubling(_) => EXIT_MALFORMED,
                Error::SumOverflow
                | Error::SumSetTooLarge { .. }
                | Error::PrecisionLimit { .. }
                | Error::BeyondDeskScale(_)
                | Error::BudgetExceeded(_) => EXIT_LIMIT,
            },
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Core(e) => e.to_string(),
            Failure::Io(p, e) => format!("{}: {e}", p.display()),
        }
    }
}

/// Main output text and the exit code it earns.
struct Output {
    text: String,
    code: u8,
}

impl Output {
    fn checked(text: String, passed: bool) -> Self {
        let code = if passed { 0 } else { EXIT_CHECK_FAILED };
        Self { text, code }
    }
}

fn header(parts: &[(&str, String)], command: &str) -> String {
    let mut h = format!("# folkman {VERSION} {command}");
    for (k, v) in parts {
        write!(h, " {k}={v}").unwrap();
    }
    h.push('\n');
    h
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Io(path.to_path_buf(), e))
}

fn parse_set(text: &str) -> Result<KSet, Failure> {
    Ok(text.parse::<KSet>()?)
}

fn sums(set: &str, verbose: bool) -> Result<Output, Failure> {
    let a = parse_set(set)?;
    let s = finite_sums(&a)?;
    let mut out = header(&[("set", a.to_string())], "sums");
    let list: Vec<String> = s.iter().map(|v| v.to_string()).collect();
    writeln!(out, "sums={}", list.join(",")).unwrap();
    match 1u128.checked_shl(a.k() as u32) {
        Some(p) => writeln!(out, "count={} of {}", s.count(), p - 1),
        None => writeln!(out, "count={} of 2^{}-1", s.count(), a.k()),
    }
    .unwrap();
    writeln!(out, "sum_distinct={}", is_sum_distinct(&a)?).unwrap();
    match equal_sum_disjoint_pair(&a)? {
        Some(p) => writeln!(out, "pair={p} sum={}", p.sum).unwrap(),
        None => writeln!(out, "pair=none").unwrap(),
    }
    if verbose {
        let b: Vec<String> = representative_set(&s)
            .iter()
            .map(|v| v.to_string())
            .collect();
        writeln!(out, "representatives={}", b.join(",")).unwrap();
    }
    Ok(Output::checked(out, true))
}

fn color(n: u64, seed: u64, kind: ColoringKind) -> Result<Output, Failure> {
    let c = match kind {
        ColoringKind::Doubling => doubling_coloring(n, seed)?,
        ColoringKind::Uniform => uniform_coloring(n, seed)?,
    };
    Ok(Output::checked(c.encode(), true))
}

fn prob(set: &str, trials: u64, seed: u64) -> Result<Output, Failure> {
    let a = parse_set(set)?;
    let p = exact_mono_probability(&a)?;
    let mut out = header(
        &[
            ("set", a.to_string()),
            ("trials", trials.to_string()),
            ("seed", seed.to_string()),
        ],
        "prob",
    );
    writeln!(
        out,
        "exact={p} value={} odd_parts={}",
        p.value(),
        p.distinct_odd_parts
    )
    .unwrap();
    let mut passed = true;
    if a.k() <= 63 {
        let bound = 1 - (1i64 << (a.k() - 1));
        let ok = p.at_most_pow2(bound);
        passed &= ok;
        writeln!(out, "bound=2^{bound} holds={ok}").unwrap();
    }
    if trials > 0 {
        let mc = monte_carlo_mono(&a, trials, seed)?;
        let dev = mc.deviation(p.value());
        let ok = dev <= 3.0;
        passed &= ok;
        writeln!(
            out,
            "monte_carlo hits={} trials={} frequency={:.6} sigma={:.3} within_3_sigma={ok}",
            mc.hits,
            mc.trials,
            mc.frequency(),
            dev
        )
        .unwrap();
    }
    Ok(Output::checked(out, passed))
}

fn verify(
    k: usize,
    n: Option<u64>,
    seeds: &SeedArgs,
    mode: Mode,
    verbose: bool,
) -> Result<Output, Failure> {
    let list = seeds.list();
    let report = match n {
        Some(n) => verify_doubling(n, k, &list, mode)?,
        None => verify_theorem(k, &list, mode)?,
    };
    let mut out = header(
        &[
            ("k", k.to_string()),
            ("n", report.n.to_string()),
            ("seeds", seeds.describe()),
            ("mode", mode.to_string()),
        ],
        "verify",
    );
    out.push_str(&report.render(verbose));
    Ok(Output::checked(out, report.passed()))
}

fn bound_table(kmin: u32, kmax: u32) -> Result<Output, Failure> {
    let rows = check_first_moment(kmin, kmax)?;
    eprint!(
        "{}",
        header(
            &[("kmin", kmin.to_string()), ("kmax", kmax.to_string())],
            "bound-table"
        )
    );
    Ok(Output::checked(
        bound_table_csv(&rows),
        rows.iter().all(|r| r.pass),
    ))
}

fn exact(k: usize, nmax: u64, budget: &BudgetArgs) -> Result<Output, Failure> {
    let sweep = folkman_exact(k, nmax, budget.budget())?;
    let mut out = header(
        &[
            ("k", k.to_string()),
            ("nmax", nmax.to_string()),
            ("node_budget", budget.node_budget.to_string()),
            ("constraint_budget", budget.constraint_budget.to_string()),
        ],
        "exact",
    );
    out.push_str(&sweep.render());
    if let Some(n) = sweep.inconclusive_at {
        eprintln!("search inconclusive at n={n}; raise --node-budget");
        return Ok(Output {
            text: out,
            code: EXIT_LIMIT,
        });
    }
    Ok(Output::checked(out, sweep.value.is_some()))
}

fn cnf(n: u64, k: usize, budget: &BudgetArgs) -> Result<Output, Failure> {
    let body = to_cnf(n, k, budget.budget())?;
    Ok(Output::checked(
        format!("c generated by folkman {VERSION}\n{body}"),
        true,
    ))
}

fn check_cert(
    k: usize,
    model: Option<&Path>,
    coloring: Option<&Path>,
    n: Option<u64>,
    mode: Mode,
) -> Result<Output, Failure> {
    let (c, source) = match (model, coloring) {
        (Some(path), _) => {
            let lits = parse_model(&read(path)?)?;
            let n = n.unwrap_or_else(|| lits.iter().map(|l| l.unsigned_abs()).max().unwrap_or(0));
            (import_model(&lits, n)?, "model")
        }
        (None, Some(path)) => {
            let c = Coloring::decode(&read(path)?)?;
            if let Some(n) = n {
                if n != c.n() {
                    return Err(Failure::Core(Error::Parse(format!(
                        "coloring file has n={}, expected {n}",
                        c.n()
                    ))));
                }
            }
            (c, "coloring")
        }
        (None, None) => unreachable!("clap requires one source"),
    };
    let mut out = header(
        &[
            ("k", k.to_string()),
            ("n", c.n().to_string()),
            ("source", source.to_string()),
            ("mode", mode.to_string()),
        ],
        "check-cert",
    );
    let witness = find_witness(&c, k, mode)?;
    match &witness {
        Some(w) => writeln!(out, "{}\nresult=witnessed", w.report_line(&c)).unwrap(),
        None => writeln!(out, "result=witness-free").unwrap(),
    }
    Ok(Output::checked(out, witness.is_none()))
}

fn dispatch(cli: &Cli) -> Result<Output, Failure> {
    let v = cli.verbose;
    match &cli.command {
        Command::Sums { set } => sums(set, v),
        Command::Color { n, seed, kind } => color(*n, *seed, *kind),
        Command::Prob { set, trials, seed } => prob(set, *trials, *seed),
        Command::Verify { k, n, seeds, mode } => verify(*k, *n, seeds, *mode, v),
        Command::BoundTable { kmin, kmax } => bound_table(*kmin, *kmax),
        Command::Exact { k, nmax, budget } => exact(*k, *nmax, budget),
        Command::Cnf { n, k, budget } => cnf(*n, *k, budget),
        Command::CheckCert {
            k,
            model,
            coloring,
            n,
            mode,
        } => check_cert(*k, model.as_deref(), coloring.as_deref(), *n, *mode),
    }
}

fn emit(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| Failure::Io(p.to_path_buf(), e)),
        None => io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| Failure::Io(PathBuf::from("<stdout>"), e)),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let started = Instant::now();
    let result = with_threads(cli.threads, || dispatch(&cli))
        .map_err(Failure::Core)
        .and_then(|r| r)
        .and_then(|out| emit(cli.output.as_deref(), &out.text).map(|()| out.code));
    eprintln!("elapsed {:.3}s", started.elapsed().as_secs_f64());
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
