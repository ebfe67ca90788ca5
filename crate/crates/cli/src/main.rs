//! `lyapspec`: pressure, entropy spectra, typicality and domination for
//! one-step matrix cocycles read from `.cocycle` files.

mod manifest;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use lyapspec::cocycle::OneStepCocycle;
use lyapspec::cone::{ConeOptions, ConeOutcome};
use lyapspec::domination::{self, SubsystemOptions, Verdict};
use lyapspec::pressure::{GridSpec, PressureEvaluator, BRACKET_LABEL};
use lyapspec::sft::Word;
use lyapspec::spectrum::{self, SpectrumSolver};
use lyapspec::sweep::Execution;
use lyapspec::typicality::{self, Tolerances, TypicalityReport, QM_TOL};
use lyapspec::{format, table, Error};

use manifest::Manifest;

/// Environment variable holding the default thread count.
const THREADS_ENV: &str = "LYAPSPEC_THREADS";

const AFTER_HELP: &str = "\
Exit codes: 0 ok/pass, 1 check failed, 2 parse or usage error, 3 invalid cocycle,
4 enumeration budget exceeded, 5 precondition failed, 6 inconclusive, 7 search exhausted.

The default thread count is read from LYAPSPEC_THREADS, falling back to the
available parallelism. --threads 1 runs every computation serially.";

#[derive(Parser)]
#[command(name = "lyapspec", version, about = "Pressure and Lyapunov spectra of matrix cocycles", after_help = AFTER_HELP)]
struct Cli {
    /// Worker threads (0 = available parallelism).
    #[arg(long, global = true, env = THREADS_ENV, default_value_t = 0)]
    threads: usize,

    /// Seed for randomized searches.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and validate a cocycle file, printing its basic invariants.
    Validate {
        file: PathBuf,
        /// Hoelder exponent for the fiber-bunching value.
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
    },
    /// Pressure table with quasi-multiplicativity brackets.
    Pressure {
        file: PathBuf,
        /// Grid `lo:hi:step;...`, one axis per coordinate (default [-3,3] step 0.25).
        #[arg(long, allow_hyphen_values = true)]
        q: Option<String>,
        #[arg(long, default_value_t = 10)]
        n: usize,
        #[command(flatten)]
        qm: QmArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Legendre entropy spectrum, optionally against the counting oracle.
    Spectrum {
        file: PathBuf,
        /// Alpha grid `lo:hi:step;...`.
        #[arg(long, conflicts_with = "auto_grid", allow_hyphen_values = true)]
        alpha: Option<String>,
        /// Number of points on an automatic grid inside the domain.
        #[arg(long)]
        auto_grid: Option<usize>,
        #[arg(long, default_value_t = 12)]
        n: usize,
        /// Box half-widths for the oracle, comma separated.
        #[arg(long, value_delimiter = ',', default_value = "0.05")]
        eps: Vec<f64>,
        /// Also count words near each alpha and compare.
        #[arg(long)]
        oracle: bool,
        /// Word lengths for the comparison (default: --n), comma separated.
        #[arg(long, value_delimiter = ',')]
        oracle_n: Vec<usize>,
        /// Radius of the q-directions probed for the domain.
        #[arg(long, default_value_t = 8.0)]
        q_radius: f64,
        /// Shrink factor of the automatic grid toward the domain centroid.
        #[arg(long, default_value_t = 0.9)]
        shrink: f64,
        #[command(flatten)]
        qm: QmArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Typicality check for a fixed symbol and homoclinic word, or a search.
    Typical {
        file: PathBuf,
        #[command(flatten)]
        witness: WitnessArgs,
    },
    /// Singular-value-gap domination test, with optional multicone certificates.
    Dominate {
        file: PathBuf,
        /// Gap index i (ratio sigma_{i+1}/sigma_i).
        #[arg(long, conflicts_with = "all")]
        index: Option<usize>,
        /// Test every index (the default).
        #[arg(long)]
        all: bool,
        /// Word lengths `lo:hi`.
        #[arg(long, default_value = "2:14")]
        n_range: String,
        /// Search for invariant multicones as well.
        #[arg(long)]
        cone: bool,
    },
    /// Dominated subsystem from a typicality witness, with its pressure.
    Subsystem {
        file: PathBuf,
        #[arg(long, default_value_t = 4)]
        base_n: usize,
        /// Bound on each padding length.
        #[arg(long, default_value_t = 8)]
        pad_bound: usize,
        #[command(flatten)]
        witness: WitnessArgs,
        /// q grid (default: each coordinate in {0, 1}).
        #[arg(long, allow_hyphen_values = true)]
        q: Option<String>,
        /// Number of extended words per block product.
        #[arg(long, default_value_t = 2)]
        block_depth: usize,
        /// Word length of the reference pressure (default: block depth times l).
        #[arg(long)]
        ref_n: Option<usize>,
        /// Where to write the block tuple as a cocycle file.
        #[arg(long)]
        subsystem_out: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct QmArgs {
    /// Longest words I, J in the quasi-multiplicativity search (0 disables it).
    #[arg(long, default_value_t = 5)]
    qm_depth: usize,
    /// Longest connector tried.
    #[arg(long, default_value_t = 4)]
    qm_k: usize,
}

#[derive(Args)]
struct WitnessArgs {
    /// Fixed symbol a (1-based, needs Q_aa = 1).
    #[arg(long, requires = "homoclinic")]
    fixed_symbol: Option<usize>,
    /// Homoclinic core word w, 1-based symbols separated by commas.
    #[arg(long, value_delimiter = ',', requires = "fixed_symbol")]
    homoclinic: Vec<usize>,
    /// Search all fixed symbols and words up to this length instead.
    #[arg(long, conflicts_with = "fixed_symbol", default_value_t = 4)]
    search_depth: usize,
}

struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::Parse { .. } | Error::InvalidArgument(_) | Error::ZeroLength | Error::DegreeOutOfRange { .. } => 2,
            Error::NonSquare { .. }
            | Error::InvalidEntry { .. }
            | Error::StrandedSymbol { .. }
            | Error::NotPrimitive { .. }
            | Error::EmptyAlphabet
            | Error::NonFinite
            | Error::Singular { .. }
            | Error::DimensionMismatch { .. }
            | Error::SymbolOutOfRange { .. } => 3,
            Error::BudgetExceeded { .. } => 4,
            Error::Precondition(_) | Error::Inadmissible { .. } => 5,
            Error::SearchExhausted { .. } => 7,
        };
        Failure { code, message: e.to_string() }
    }
}

type CmdResult = Result<u8, Failure>;

struct Ctx {
    argv: Vec<String>,
    threads: usize,
    seed: u64,
    exec: Execution,
}

struct Input {
    path: String,
    bytes: Vec<u8>,
    cocycle: OneStepCocycle,
}

impl Ctx {
    fn load(&self, path: &Path) -> Result<Input, Failure> {
        let bytes = std::fs::read(path)
            .map_err(|e| Failure { code: 2, message: format!("cannot read {}: {e}", path.display()) })?;
        let text = String::from_utf8(bytes.clone())
            .map_err(|_| Failure { code: 2, message: format!("{} is not UTF-8", path.display()) })?;
        let cocycle = format::parse_cocycle(&text).map_err(|e| {
            let mut f = Failure::from(e);
            f.message = format!("{}: {}", path.display(), f.message);
            f
        })?;
        Ok(Input { path: path.display().to_string(), bytes, cocycle })
    }

    fn manifest(&self, input: &Input) -> Manifest {
        Manifest::new(&self.argv, &input.path, &input.bytes, self.threads, self.seed)
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(p) => std::fs::write(p, text)
            .map_err(|e| Failure { code: 2, message: format!("cannot write {}: {e}", p.display()) }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn grid_points(spec: Option<&str>, d: usize, default: GridSpec) -> Result<Vec<Vec<f64>>, Failure> {
    let grid = match spec {
        Some(s) => GridSpec::parse(s)?,
        None => default,
    };
    if grid.dim() != d {
        return Err(Failure {
            code: 2,
            message: format!("grid has {} coordinates, the cocycle has dimension {d}", grid.dim()),
        });
    }
    Ok(grid.points())
}

fn qm_report(ctx: &Ctx, c: &OneStepCocycle, args: &QmArgs, m: &mut Manifest) -> Result<Option<typicality::QMReport>, Failure> {
    if args.qm_depth == 0 {
        m.note("qm: disabled");
        return Ok(None);
    }
    let r = typicality::qm_search(c, args.qm_depth, args.qm_k, QM_TOL, ctx.exec)?;
    match r.k {
        Some(k) => m.note(format!("qm: n_max={} k={k} C={:e} ({BRACKET_LABEL})", args.qm_depth, r.constant)),
        None => m.note(format!("qm: n_max={} no k <= {} with C > {QM_TOL}", args.qm_depth, args.qm_k)),
    }
    Ok(Some(r))
}

fn cmd_validate(ctx: &Ctx, file: &Path, alpha: f64) -> CmdResult {
    let input = ctx.load(file)?;
    let c = &input.cocycle;
    let q = c.transition();
    let mut s = String::new();
    let _ = writeln!(s, "file: {} sha256={}", input.path, manifest::sha256_hex(&input.bytes));
    let _ = writeln!(s, "alphabet: {}", c.alphabet_size());
    let _ = writeln!(s, "dim: {}", c.dim());
    let _ = writeln!(s, "transition: {}", if q.is_full() { "full" } else { "explicit" });
    let _ = writeln!(s, "mixing rate: {}", q.mixing_rate());
    for (i, g) in c.generators().iter().enumerate() {
        let max = g.as_slice().iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let margin = g.det().abs() / max.powi(c.dim() as i32);
        let sv = lyapspec::matalg::svd(g).sigma;
        let _ = writeln!(
            s,
            "matrix {}: log|det| = {:.6}, invertibility margin |det|/max|a|^d = {:.6e}, condition = {:.6}",
            i + 1,
            c.log_abs_det(i),
            margin,
            sv[0] / sv[sv.len() - 1]
        );
    }
    let fb = c.fiber_bunched(alpha)?;
    let _ = writeln!(s, "fiber bunching (alpha = {alpha}): {:.6} ({})", fb.value, if fb.bunched { "bunched" } else { "not bunched" });
    print!("{s}");
    Ok(0)
}

fn cmd_pressure(ctx: &Ctx, file: &Path, q: Option<&str>, n: usize, qm: &QmArgs, out: Option<&Path>) -> CmdResult {
    let input = ctx.load(file)?;
    let c = &input.cocycle;
    let mut m = ctx.manifest(&input);
    let points = grid_points(q, c.dim(), GridSpec::default_for(c.dim()))?;
    let report = qm_report(ctx, c, qm, &mut m)?;
    let mut ev = PressureEvaluator::new(c, ctx.exec);
    let rows = points.iter().map(|p| ev.estimate(p, n, report.as_ref())).collect::<Result<Vec<_>, _>>()?;
    m.note(format!("brackets: {BRACKET_LABEL}"));
    emit(out, &m.render(&table::pressure_csv(c.dim(), &rows)))?;
    Ok(0)
}

#[allow(clippy::too_many_arguments)]
fn cmd_spectrum(
    ctx: &Ctx,
    file: &Path,
    alpha: Option<&str>,
    auto_grid: Option<usize>,
    n: usize,
    eps: &[f64],
    oracle: bool,
    oracle_n: &[usize],
    q_radius: f64,
    shrink: f64,
    qm: &QmArgs,
    out: Option<&Path>,
) -> CmdResult {
    let input = ctx.load(file)?;
    let c = &input.cocycle;
    let d = c.dim();
    let mut m = ctx.manifest(&input);
    let report = qm_report(ctx, c, qm, &mut m)?;
    let mut solver = SpectrumSolver::with_radius(c, n, report.clone(), ctx.exec, q_radius)?;
    let grid = match alpha {
        Some(s) => grid_points(Some(s), d, GridSpec::default_for(d))?,
        None => solver.domain().auto_grid(auto_grid.unwrap_or(11), shrink),
    };
    let body = if oracle {
        let ns: Vec<usize> = if oracle_n.is_empty() { vec![n] } else { oracle_n.to_vec() };
        let cmp = spectrum::compare(c, &grid, &ns, eps, report.as_ref(), ctx.exec, 0.02)?;
        for t in &cmp.trends {
            let verdict = match t.verdict_b {
                Some(true) => "pass",
                Some(false) => "fail",
                None => "waived",
            };
            m.note(format!("trend alpha={:?} eps={}: {verdict}", t.alpha, t.epsilon));
        }
        m.note(format!("upper bound holds at every row: {}", cmp.all_a()));
        table::compare_csv(d, &cmp.rows)
    } else {
        let curve = solver.curve(&grid)?;
        m.note(format!("concavity slack: {:e}", curve.concavity_slack));
        table::spectrum_csv(d, &curve.points)
    };
    emit(out, &m.render(&body))?;
    Ok(0)
}

fn one_based_word(c: &OneStepCocycle, symbols: &[usize]) -> Result<Word, Failure> {
    Ok(Word::from_one_based(symbols).map_err(|e| {
        let mut f = Failure::from(e);
        f.code = 2;
        f
    })?)
    .and_then(|w| {
        c.transition().is_admissible(&w)?;
        Ok(w)
    })
}

fn find_witness(ctx: &Ctx, c: &OneStepCocycle, w: &WitnessArgs) -> Result<TypicalityReport, Failure> {
    let _ = ctx;
    let tol = Tolerances::default();
    match w.fixed_symbol {
        Some(a) => {
            if a == 0 || a > c.alphabet_size() {
                return Err(Error::SymbolOutOfRange { symbol: a, k: c.alphabet_size() }.into());
            }
            let word = one_based_word(c, &w.homoclinic)?;
            Ok(typicality::check_typical(c, a - 1, &word, tol)?)
        }
        None => {
            let search = typicality::search_typical_pair(c, w.search_depth, tol)?;
            match search.found {
                Some(r) => Ok(r),
                None => Err(Failure {
                    code: 1,
                    message: format!(
                        "no typical pair among {} candidates with |w| <= {}",
                        search.pairs_tried, w.search_depth
                    ),
                }),
            }
        }
    }
}

fn describe_typicality(r: &TypicalityReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "fixed symbol: {}", r.a + 1);
    let _ = writeln!(s, "homoclinic word: {}", r.w);
    for l in &r.levels {
        let ind = l.independence_margin.map(|x| format!("{x:.6e}")).unwrap_or_else(|| "n/a".into());
        let _ = writeln!(
            s,
            "level {}: (i) {} gap margin {:.6e}; (ii) {} independence margin {}",
            l.t,
            if l.condition_i { "pass" } else { "fail" },
            l.gap_margin,
            if l.condition_ii { "pass" } else { "fail" },
            ind
        );
        if let (false, Some((i, j))) = (l.condition_ii, &l.worst_pair) {
            let _ = writeln!(s, "  worst pair: I = {i:?}, J = {j:?}");
        }
    }
    match r.first_failure() {
        None => {
            let _ = writeln!(s, "typical: yes");
        }
        Some((t, cond)) => {
            let _ = writeln!(s, "typical: no (level {t}, condition ({cond}))");
        }
    }
    s
}

fn cmd_typical(ctx: &Ctx, file: &Path, w: &WitnessArgs) -> CmdResult {
    let input = ctx.load(file)?;
    let c = &input.cocycle;
    if w.fixed_symbol.is_none() {
        // a failed search still reports the first candidate it tried
        let search = typicality::search_typical_pair(c, w.search_depth, Tolerances::default())?;
        return match search.found {
            Some(r) => {
                print!("{}", describe_typicality(&r));
                println!("candidates tried: {}", search.pairs_tried);
                Ok(0)
            }
            None => {
                let q = c.transition();
                let a = (0..c.alphabet_size()).find(|&a| q.allows(a, a)).unwrap_or(0);
                let first = q
                    .words(1)?
                    .find(|x| q.allows(a, x.first().unwrap()) && q.allows(x.last().unwrap(), a))
                    .map(|x| typicality::check_typical(c, a, &x, Tolerances::default()))
                    .transpose()?;
                if let Some(r) = first {
                    print!("{}", describe_typicality(&r));
                }
                println!("no typical pair among {} candidates with |w| <= {}", search.pairs_tried, w.search_depth);
                Ok(1)
            }
        };
    }
    let r = find_witness(ctx, c, w)?;
    print!("{}", describe_typicality(&r));
    Ok(if r.typical { 0 } else { 1 })
}

fn parse_range(s: &str) -> Result<Vec<usize>, Failure> {
    let bad = || Failure { code: 2, message: format!("bad range `{s}`, expected lo:hi") };
    let (lo, hi) = s.split_once(':').ok_or_else(bad)?;
    let (lo, hi): (usize, usize) = (lo.trim().parse().map_err(|_| bad())?, hi.trim().parse().map_err(|_| bad())?);
    if lo == 0 || hi < lo {
        return Err(bad());
    }
    Ok((lo..=hi).collect())
}

fn verdict_code(v: Verdict) -> u8 {
    match v {
        Verdict::Pass => 0,
        Verdict::Fail => 1,
        Verdict::Inconclusive => 6,
    }
}

fn cmd_dominate(ctx: &Ctx, file: &Path, index: Option<usize>, n_range: &str, cone: bool) -> CmdResult {
    let input = ctx.load(file)?;
    let c = &input.cocycle;
    let ns = parse_range(n_range)?;
    let report = domination::domination_report(c, &ns, ctx.exec)?;
    let entries: Vec<_> = match index {
        Some(i) => {
            if i == 0 || i >= c.dim() {
                return Err(Error::DegreeOutOfRange { t: i, d: c.dim() - 1 }.into());
            }
            vec![report.entries[i - 1].clone()]
        }
        None => report.entries.clone(),
    };
    let mut s = String::new();
    for e in &entries {
        let ratios: Vec<String> = e.log_ratios.iter().map(|r| format!("{r:.6}")).collect();
        let _ = writeln!(s, "index {}: {} (fitted rate {:.6})", e.index, e.verdict.as_str(), e.slope);
        let _ = writeln!(s, "  n = {}..{}, log r = [{}]", ns[0], ns[ns.len() - 1], ratios.join(", "));
        if cone {
            let opts = ConeOptions { seed: ctx.seed, exec: ctx.exec, ..ConeOptions::default() };
            match domination::cocycle_multicone(c, e.index, &opts)? {
                ConeOutcome::Certified(cert) => {
                    let _ = writeln!(s, "  multicone: certified, {} balls, margin {:.6e}", cert.balls.len(), cert.margin);
                    for b in &cert.balls {
                        let center: Vec<String> = b.center.iter().map(|x| format!("{x:.6}")).collect();
                        let _ = writeln!(s, "    ball center [{}] radius {}", center.join(", "), b.radius);
                    }
                }
                ConeOutcome::Inconclusive { reason } => {
                    let _ = writeln!(s, "  multicone: inconclusive ({reason})");
                }
            }
        }
    }
    let overall = match index {
        Some(_) => entries[0].verdict,
        None => report.overall,
    };
    let _ = writeln!(s, "overall: {}", overall.as_str());
    print!("{s}");
    Ok(verdict_code(overall))
}

#[allow(clippy::too_many_arguments)]
fn cmd_subsystem(
    ctx: &Ctx,
    file: &Path,
    base_n: usize,
    pad_bound: usize,
    witness: &WitnessArgs,
    q: Option<&str>,
    block_depth: usize,
    ref_n: Option<usize>,
    subsystem_out: Option<&Path>,
    out: Option<&Path>,
) -> CmdResult {
    let input = ctx.load(file)?;
    let c = &input.cocycle;
    let d = c.dim();
    let mut m = ctx.manifest(&input);
    let typ = match find_witness(ctx, c, witness) {
        Ok(r) => r,
        Err(f) if f.code == 1 => return Err(Failure { code: 5, message: f.message }),
        Err(f) => return Err(f),
    };
    let sub = domination::build_dominated_subsystem(c, base_n, &typ, &SubsystemOptions { k0: pad_bound, exec: ctx.exec })?;
    m.note(format!("witness: a={} w={}", typ.a + 1, typ.w));
    m.note(format!(
        "subsystem: base_n={} pad={} l={} words={} domination={} log_kappa={:e}",
        sub.base_n,
        sub.pad,
        sub.ell,
        sub.len(),
        sub.domination.overall.as_str(),
        sub.log_kappa_min()
    ));
    if let Some(path) = subsystem_out {
        let mut comments = m.lines();
        comments.retain(|l| !l.starts_with("wall_time"));
        comments.push(format!("block tuple over {} extended words of length {}", sub.len(), sub.ell));
        for (i, e) in sub.words.iter().enumerate() {
            comments.push(format!("symbol {}: {} = [{}] {} [{}]", i + 1, e.word, e.j1, e.core, e.j2));
        }
        let q = lyapspec::sft::TransitionMatrix::full(sub.len());
        std::fs::write(path, format::write_parts(&q, &sub.tuple, &comments))
            .map_err(|e| Failure { code: 2, message: format!("cannot write {}: {e}", path.display()) })?;
    }
    let default = GridSpec::parse(&vec!["0:1:1"; d].join(";"))?;
    let points = grid_points(q, d, default)?;
    let n_ref = ref_n.unwrap_or(sub.ell * block_depth);
    let mut ev = PressureEvaluator::new(c, ctx.exec);
    let mut body = String::new();
    let mut head: Vec<String> = (1..=d).map(|i| format!("q_{i}")).collect();
    head.extend(["l", "m", "P_sub", "lower", "upper", "n", "P_n", "gap"].map(String::from));
    let _ = writeln!(body, "{}", head.join(","));
    for p in &points {
        let sp = domination::subsystem_pressure(&sub, p, block_depth, ctx.exec)?;
        let reference = ev.pressure(p, n_ref)?;
        let l = sub.ell as f64;
        let per = sp.per_symbol();
        let mut cells: Vec<String> = p.iter().map(|x| table::real(*x)).collect();
        cells.extend([
            sub.ell.to_string(),
            block_depth.to_string(),
            table::real(per),
            table::real(sp.lower / l),
            table::opt(sp.upper.map(|u| u / l)),
            n_ref.to_string(),
            table::real(reference),
            table::real((per - reference).abs()),
        ]);
        let _ = writeln!(body, "{}", cells.join(","));
    }
    emit(out, &m.render(&body))?;
    Ok(0)
}

fn run(cli: Cli, argv: Vec<String>) -> CmdResult {
    let threads = if cli.threads == 0 {
        std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
    } else {
        cli.threads
    };
    // a pool already built (only possible in-process) keeps its size
    let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    let exec = if threads == 1 { Execution::Serial } else { Execution::Parallel };
    let ctx = Ctx { argv, threads, seed: cli.seed, exec };
    match &cli.command {
        Command::Validate { file, alpha } => cmd_validate(&ctx, file, *alpha),
        Command::Pressure { file, q, n, qm, out } => cmd_pressure(&ctx, file, q.as_deref(), *n, qm, out.as_deref()),
        Command::Spectrum { file, alpha, auto_grid, n, eps, oracle, oracle_n, q_radius, shrink, qm, out } => cmd_spectrum(
            &ctx,
            file,
            alpha.as_deref(),
            *auto_grid,
            *n,
            eps,
            *oracle,
            oracle_n,
            *q_radius,
            *shrink,
            qm,
            out.as_deref(),
        ),
        Command::Typical { file, witness } => cmd_typical(&ctx, file, witness),
        Command::Dominate { file, index, all: _, n_range, cone } => cmd_dominate(&ctx, file, *index, n_range, *cone),
        Command::Subsystem { file, base_n, pad_bound, witness, q, block_depth, ref_n, subsystem_out, out } => {
            cmd_subsystem(
                &ctx,
                file,
                *base_n,
                *pad_bound,
                witness,
                q.as_deref(),
                *block_depth,
                *ref_n,
                subsystem_out.as_deref(),
                out.as_deref(),
            )
        }
    }
}

fn main() -> ExitCode {
    // library warnings (omitted brackets, clamped values) go to stderr; RUST_LOG overrides
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let argv: Vec<String> = std::env::args().collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli, argv) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
