//! Command-line front end. [`run`] is pure apart from reading input files:
//! output text and certificate files are returned in a [`CommandResult`].

use std::fmt::{Display, Write as _};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use bvlab::boolalg::{parse_partition_lit, Algebra};
use bvlab::bvm::{HfSet, Name, TruthSession};
use bvlab::condset::{
    build_and_verify_name, check_axioms, enumerate_stable_subsets, verify_name_bridge, C3Failure, CondUniverse, Mode,
};
use bvlab::folang::{eval_formula, parse_formula, Model, ModelFile};
use bvlab::lmod::{
    entropic_risk, fenchel_moreau_check, parse_point_set, separate, subgradient_exists, verify_separation,
    verify_subgradient, GridFunction, Point, RiskFile, SeparationCertificate, StablePolytope, SubgradientCertificate,
};
use bvlab::lzero::{from_name, to_name, RandVar};
use bvlab::rational::{format_rational, parse_rational};
use bvlab::{selftest, Classify, ErrorClass};

pub const DEFAULT_SELECTOR_CAP: u128 = 1_000_000;
pub const DEFAULT_SUBSET_CAP: u128 = 100_000;
pub const CAP_ENV: &str = "BV_CAP";

pub const EXIT_OK: i32 = 0;
pub const EXIT_PARSE: i32 = 1;
pub const EXIT_PRECONDITION: i32 = 2;
pub const EXIT_CAP: i32 = 3;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Artifact {
    pub path: PathBuf,
    pub contents: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommandResult {
    pub exit_code: i32,
    pub stdout: String,
    pub stderr: String,
    pub artifacts: Vec<Artifact>,
}

impl CommandResult {
    pub fn write_artifacts(&self) -> std::io::Result<()> {
        for a in &self.artifacts {
            std::fs::write(&a.path, &a.contents)?;
        }
        Ok(())
    }
}

#[derive(Debug, Parser)]
#[command(name = "bvlab", about = "Boolean-valued models and stable convex analysis over finite algebras")]
struct Cli {
    /// Seed for randomized checks.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Dir {
    To,
    From,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Truth value of a formula in a model.
    Eval {
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long)]
        formula: String,
    },
    /// Pairwise non-equivalent elements of a bound name.
    Descend {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        name: String,
        #[arg(long)]
        cap: Option<u128>,
    },
    /// Mixture of model names along a partition such as `[{1};{2,3}]`.
    Mix {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        partition: String,
        /// Comma-separated identifiers, one per block.
        #[arg(long, value_delimiter = ',')]
        names: Vec<String>,
    },
    /// Canonical name of a hereditarily finite set.
    Canon {
        #[arg(long)]
        atoms: usize,
        #[arg(long)]
        set: String,
    },
    /// Random variable to scalar name (`to`) or back (`from`).
    Gordon {
        #[arg(long, value_enum)]
        dir: Dir,
        /// Random variable `[q1, ..., qn]`, for `--dir to`.
        #[arg(long)]
        rv: Option<String>,
        #[arg(long)]
        model: Option<PathBuf>,
        /// Bound identifier, for `--dir from`.
        #[arg(long)]
        name: Option<String>,
    },
    /// Axioms C1-C3 on a conditional universe.
    Condcheck {
        #[arg(long)]
        universe: PathBuf,
        /// Carrier members to remove, e.g. `(a,b);(b,a)`.
        #[arg(long)]
        doctored: Option<String>,
        /// Also count the stable subsets.
        #[arg(long)]
        stable: bool,
    },
    /// Event on which two carrier members agree.
    Agree {
        #[arg(long)]
        universe: PathBuf,
        #[arg(long)]
        x: String,
        #[arg(long)]
        y: String,
    },
    /// Checks that name equality of carrier members is their agreement event.
    Namecheck {
        #[arg(long)]
        universe: PathBuf,
        #[arg(long)]
        element: Option<String>,
    },
    /// Separation certificate for two atomwise disjoint polytopes.
    Separate {
        #[arg(long)]
        sets: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-checks a certificate file by its inequalities alone.
    Verify {
        #[arg(long)]
        cert: PathBuf,
        #[arg(long)]
        sets: Option<PathBuf>,
        #[arg(long = "fn")]
        function: Option<PathBuf>,
    },
    /// Conjugate and biconjugate of a grid function.
    Fenchel {
        #[arg(long = "fn")]
        function: PathBuf,
        #[arg(long)]
        dual: PathBuf,
    },
    /// Subgradient at a grid point, or a refusal naming a violated constraint.
    Subgrad {
        #[arg(long = "fn")]
        function: PathBuf,
        #[arg(long)]
        at: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Conditional entropic risk of the payoff in a risk file.
    Risk {
        #[arg(long)]
        space: PathBuf,
        #[arg(long)]
        gamma: String,
        #[arg(long, default_value_t = 100)]
        probes: usize,
    },
    /// Runs the invariant suites.
    Selftest {
        #[arg(long)]
        suite: Option<String>,
    },
}

struct Failure {
    class: ErrorClass,
    message: String,
}

impl<E: Classify + std::error::Error> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure { class: e.class(), message: e.to_string() }
    }
}

fn fail(class: ErrorClass, message: impl Display) -> Failure {
    Failure { class, message: message.to_string() }
}

fn exit_code(class: ErrorClass) -> i32 {
    match class {
        ErrorClass::Parse => EXIT_PARSE,
        ErrorClass::Precondition => EXIT_PRECONDITION,
        ErrorClass::Cap => EXIT_CAP,
    }
}

struct Ctx {
    seed: u64,
    selector_cap: u128,
    subset_cap: u128,
    out: String,
    artifacts: Vec<Artifact>,
}

macro_rules! out {
    ($ctx:expr, $($arg:tt)*) => {
        writeln!($ctx.out, $($arg)*).expect("writing to a String")
    };
}

type Outcome = Result<(), Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path)
        .map_err(|e| fail(ErrorClass::Precondition, format!("cannot read {}: {e}", path.display())))
}

fn caps_from_env() -> Result<(u128, u128), Failure> {
    match std::env::var(CAP_ENV) {
        Ok(v) => {
            let cap = v
                .trim()
                .parse::<u128>()
                .map_err(|_| fail(ErrorClass::Parse, format!("{CAP_ENV} must be a nonnegative integer, got '{v}'")))?;
            Ok((cap, cap))
        }
        Err(_) => Ok((DEFAULT_SELECTOR_CAP, DEFAULT_SUBSET_CAP)),
    }
}

/// Parses `argv` (program name first) and runs the subcommand.
pub fn run<I, T>(argv: I) -> CommandResult
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            let code = if e.use_stderr() { EXIT_PARSE } else { EXIT_OK };
            let (stdout, stderr) = if code == EXIT_OK { (text, String::new()) } else { (String::new(), text) };
            return CommandResult { exit_code: code, stdout, stderr, artifacts: Vec::new() };
        }
    };
    let (selector_cap, subset_cap) = match caps_from_env() {
        Ok(c) => c,
        Err(f) => return failure_result(String::new(), f),
    };
    let mut ctx = Ctx { seed: cli.seed, selector_cap, subset_cap, out: String::new(), artifacts: Vec::new() };
    match dispatch(cli.command, &mut ctx) {
        Ok(code) => CommandResult { exit_code: code, stdout: ctx.out, stderr: String::new(), artifacts: ctx.artifacts },
        Err(f) => failure_result(ctx.out, f),
    }
}

fn failure_result(stdout: String, f: Failure) -> CommandResult {
    CommandResult {
        exit_code: exit_code(f.class),
        stdout,
        stderr: format!("error: {}\n", f.message),
        artifacts: Vec::new(),
    }
}

fn dispatch(cmd: Command, ctx: &mut Ctx) -> Result<i32, Failure> {
    match cmd {
        Command::Eval { model, formula } => eval(ctx, model.as_deref(), &formula),
        Command::Descend { model, name, cap } => descend(ctx, &model, &name, cap),
        Command::Mix { model, partition, names } => mix(ctx, &model, &partition, &names),
        Command::Canon { atoms, set } => canon(ctx, atoms, &set),
        Command::Gordon { dir, rv, model, name } => gordon(ctx, dir, rv.as_deref(), model.as_deref(), name.as_deref()),
        Command::Condcheck { universe, doctored, stable } => condcheck(ctx, &universe, doctored.as_deref(), stable),
        Command::Agree { universe, x, y } => agree(ctx, &universe, &x, &y),
        Command::Namecheck { universe, element } => namecheck(ctx, &universe, element.as_deref()),
        Command::Separate { sets, out } => separate_cmd(ctx, &sets, out),
        Command::Verify { cert, sets, function } => return verify(ctx, &cert, sets.as_deref(), function.as_deref()),
        Command::Fenchel { function, dual } => fenchel(ctx, &function, &dual),
        Command::Subgrad { function, at, out } => subgrad(ctx, &function, &at, out),
        Command::Risk { space, gamma, probes } => risk(ctx, &space, &gamma, probes),
        Command::Selftest { suite } => return selftest_cmd(ctx, suite.as_deref()),
    }?;
    Ok(EXIT_OK)
}

/// Column-pointed rendering of a syntax error in a one-line input.
fn point_at(source: &str, line: usize, column: usize) -> String {
    let text = source.lines().nth(line.saturating_sub(1)).unwrap_or("");
    format!("  {text}\n  {}^", " ".repeat(column.saturating_sub(1)))
}

fn load_model(path: Option<&Path>) -> Result<(ModelFile, TruthSession, Model), Failure> {
    let file = match path {
        Some(p) => ModelFile::parse(&read(p)?)?,
        None => ModelFile::new(Algebra::new(1)?),
    };
    let s = TruthSession::new(file.algebra);
    let model = Model::resolve(&file, &s)?;
    Ok((file, s, model))
}

fn model_name(model: &Model, id: &str) -> Result<Name, Failure> {
    model.names.get(id).cloned().ok_or_else(|| fail(ErrorClass::Precondition, format!("unknown identifier '{id}'")))
}

fn eval(ctx: &mut Ctx, model: Option<&Path>, formula: &str) -> Outcome {
    let f = parse_formula(formula).map_err(|e| {
        let mut fl = Failure::from(e.clone());
        if let bvlab::folang::FolangError::Syntax { line, column, .. } = e {
            fl.message = format!("{}\n{}", fl.message, point_at(formula, line, column));
        }
        fl
    })?;
    let (_, mut s, m) = load_model(model)?;
    out!(ctx, "{}", eval_formula(&f, &m, &mut s)?);
    Ok(())
}

fn descend(ctx: &mut Ctx, model: &Path, id: &str, cap: Option<u128>) -> Outcome {
    let (_, mut s, m) = load_model(Some(model))?;
    let x = model_name(&m, id)?;
    let reps = s.descent(&x, cap.unwrap_or(ctx.selector_cap))?;
    out!(ctx, "{} representatives", reps.len());
    for r in reps {
        out!(ctx, "{r}");
    }
    Ok(())
}

fn mix(ctx: &mut Ctx, model: &Path, partition: &str, ids: &[String]) -> Outcome {
    let (_, mut s, m) = load_model(Some(model))?;
    let alg = *s.algebra();
    let blocks = parse_partition_lit(partition)?.iter().map(|b| b.resolve(&alg)).collect::<Result<Vec<_>, _>>()?;
    let xs = ids.iter().map(|id| model_name(&m, id)).collect::<Result<Vec<_>, _>>()?;
    let mixed = s.mix(&blocks, &xs)?;
    out!(ctx, "{mixed}");
    for (id, x) in ids.iter().zip(&xs) {
        out!(ctx, "[[m = {id}]] = {}", s.truth_eq(&mixed, x)?);
    }
    Ok(())
}

fn canon(ctx: &mut Ctx, atoms: usize, set: &str) -> Outcome {
    let alg = Algebra::new(atoms)?;
    let hf = HfSet::parse(set)?;
    let n = Name::canonical(&hf, &alg);
    out!(ctx, "{n}");
    out!(ctx, "rank {}", n.rank());
    Ok(())
}

fn gordon(ctx: &mut Ctx, dir: Dir, rv: Option<&str>, model: Option<&Path>, id: Option<&str>) -> Outcome {
    match dir {
        Dir::To => {
            let text = rv.ok_or_else(|| fail(ErrorClass::Parse, "--dir to needs --rv"))?;
            out!(ctx, "{}", to_name(&RandVar::parse(text)?));
        }
        Dir::From => {
            let (model, id) =
                model.zip(id).ok_or_else(|| fail(ErrorClass::Parse, "--dir from needs --model and --name"))?;
            let (_, s, m) = load_model(Some(model))?;
            out!(ctx, "{}", from_name(&model_name(&m, id)?, s.algebra())?);
        }
    }
    Ok(())
}

fn load_universe(path: &Path) -> Result<CondUniverse, Failure> {
    Ok(CondUniverse::parse(&read(path)?)?)
}

fn condcheck(ctx: &mut Ctx, universe: &Path, doctored: Option<&str>, stable: bool) -> Outcome {
    let u = load_universe(universe)?;
    let mode = match doctored {
        Some(list) => Mode::Doctored(u.parse_element_list(list)?),
        None => Mode::Native,
    };
    let rep = check_axioms(&u, &mode, ctx.selector_cap)?;
    let verdict = |b: bool| if b { "pass" } else { "FAIL" };
    out!(ctx, "members {}", rep.members);
    out!(ctx, "C1 {}", verdict(rep.c1));
    if let Some((x, a, y, b)) = &rep.c1_violation {
        out!(ctx, "  {}|{a} = {}|{b} with {a} != {b}", u.format_element(x), u.format_element(y));
    }
    out!(ctx, "C2 {}", verdict(rep.c2));
    if let Some((x, y, a, b)) = &rep.c2_violation {
        out!(
            ctx,
            "  {} and {} agree on {a} and on {b} but not on their join",
            u.format_element(x),
            u.format_element(y)
        );
    }
    out!(ctx, "C3 {}", verdict(rep.c3));
    if let Some(c) = &rep.c3_counterexample {
        let blocks: Vec<String> = c.partition.iter().map(ToString::to_string).collect();
        let picks: Vec<String> = c.picks.iter().map(|p| u.format_element(p)).collect();
        let failure = match &c.failure {
            C3Failure::Missing(x) => format!("paste {} is missing", u.format_element(x)),
            C3Failure::NotUnique(_) => "paste is not unique".to_string(),
        };
        out!(ctx, "  partition [{}] picks {}: {failure}", blocks.join(";"), picks.join(" "));
    }
    out!(ctx, "partitions checked {}", rep.partitions_checked);
    out!(ctx, "selections checked {}", rep.selections_checked);
    if stable {
        let (count, _) = enumerate_stable_subsets(&u, ctx.subset_cap)?;
        out!(ctx, "stable subsets {count}");
    }
    Ok(())
}

fn agree(ctx: &mut Ctx, universe: &Path, x: &str, y: &str) -> Outcome {
    let u = load_universe(universe)?;
    let (x, y) = (u.parse_element(x)?, u.parse_element(y)?);
    out!(ctx, "{}", u.agreement_event(&x, &y)?);
    Ok(())
}

fn namecheck(ctx: &mut Ctx, universe: &Path, element: Option<&str>) -> Outcome {
    let u = load_universe(universe)?;
    let mut s = TruthSession::new(*u.algebra());
    let ok = match element {
        Some(text) => {
            let x = u.parse_element(text)?;
            let (_, ok) = build_and_verify_name(&u, &x, &mut s, ctx.selector_cap)?;
            out!(ctx, "element {}", u.format_element(&x));
            ok
        }
        None => {
            let rep = verify_name_bridge(&u, &mut s, ctx.selector_cap)?;
            out!(ctx, "pairs {}", rep.pairs);
            out!(ctx, "classes {}", rep.classes);
            out!(ctx, "mismatches {}", rep.mismatches.len());
            for (x, y, t, a) in rep.mismatches.iter().take(5) {
                out!(ctx, "  {} {}: truth {t}, agreement {a}", u.format_element(x), u.format_element(y));
            }
            rep.mismatches.is_empty()
        }
    };
    out!(ctx, "verified {}", if ok { "yes" } else { "no" });
    Ok(())
}

fn load_pair(path: &Path) -> Result<(StablePolytope, StablePolytope), Failure> {
    let mut sets = StablePolytope::parse_all(&read(path)?)?;
    if sets.len() != 2 {
        return Err(fail(ErrorClass::Parse, format!("expected two polytopes, found {}", sets.len())));
    }
    let s2 = sets.pop().expect("two sets");
    let s1 = sets.pop().expect("two sets");
    Ok((s1, s2))
}

fn with_extension(path: &Path, ext: &str) -> PathBuf {
    let mut p = path.as_os_str().to_owned();
    p.push(ext);
    PathBuf::from(p)
}

fn separate_cmd(ctx: &mut Ctx, sets: &Path, out: Option<PathBuf>) -> Outcome {
    let (s1, s2) = load_pair(sets)?;
    let cert = separate(&s1, &s2)?;
    let path = out.unwrap_or_else(|| with_extension(sets, ".cert"));
    let text = cert.to_string();
    ctx.out.push_str(&text);
    out!(ctx, "wrote {}", path.display());
    ctx.artifacts.push(Artifact { path, contents: text });
    Ok(())
}

fn verify(ctx: &mut Ctx, cert: &Path, sets: Option<&Path>, function: Option<&Path>) -> Result<i32, Failure> {
    let text = read(cert)?;
    let header = text.lines().map(str::trim).find(|l| !l.is_empty() && !l.starts_with('#')).unwrap_or("");
    let failures: Vec<String> = if header.starts_with("separation") {
        let sets = sets.ok_or_else(|| fail(ErrorClass::Parse, "a separation certificate needs --sets"))?;
        let c = SeparationCertificate::parse(&text)?;
        let (s1, s2) = load_pair(sets)?;
        let check = verify_separation(&c, &s1, &s2)?;
        for (w, (lo, hi)) in check.per_atom.iter().enumerate() {
            out!(
                ctx,
                "atom {}: min mu(S1) = {}, max mu(S2) + eps = {}",
                w + 1,
                format_rational(lo),
                format_rational(hi)
            );
        }
        check.failing_atoms.iter().map(|w| format!("atom {w}: strict inequality fails")).collect()
    } else if header.starts_with("subgradient") {
        let f = function.ok_or_else(|| fail(ErrorClass::Parse, "a subgradient certificate needs --fn"))?;
        let c = SubgradientCertificate::parse(&text)?;
        let g = GridFunction::parse(&read(f)?)?;
        verify_subgradient(&c, &g)?.iter().map(|(w, p)| format!("atom {w}: inequality fails at {p}")).collect()
    } else {
        return Err(fail(ErrorClass::Parse, "unknown certificate kind; expected 'separation' or 'subgradient'"));
    };
    for f in &failures {
        out!(ctx, "{f}");
    }
    if failures.is_empty() {
        out!(ctx, "certificate valid");
        Ok(EXIT_OK)
    } else {
        Err(fail(ErrorClass::Precondition, "certificate invalid"))
    }
}

fn fenchel(ctx: &mut Ctx, function: &Path, dual: &Path) -> Outcome {
    let f = GridFunction::parse(&read(function)?)?;
    let (d, points) = parse_point_set(&read(dual)?)?;
    if d != f.dim() {
        return Err(fail(ErrorClass::Precondition, format!("dual grid has d={d}, function has d={}", f.dim())));
    }
    let rep = fenchel_moreau_check(&f, &points)?;
    out!(ctx, "# conjugate");
    ctx.out.push_str(&rep.conjugate.to_string());
    out!(ctx, "# biconjugate");
    ctx.out.push_str(&rep.biconjugate.to_string());
    for (w, eq) in rep.equal_at.iter().enumerate() {
        let pts: Vec<String> = eq.iter().map(|&i| f.points()[i].to_string()).collect();
        out!(ctx, "atom {}: f** = f at {}", w + 1, pts.join(" "));
    }
    out!(ctx, "f** = f everywhere: {}", if rep.all_equal() { "yes" } else { "no" });
    Ok(())
}

fn subgrad(ctx: &mut Ctx, function: &Path, at: &str, out: Option<PathBuf>) -> Outcome {
    let f = GridFunction::parse(&read(function)?)?;
    let x0 = Point::parse(at).ok_or_else(|| fail(ErrorClass::Parse, format!("bad point '{at}'")))?;
    let outcome = subgradient_exists(&f, &x0)?;
    for (w, r) in outcome.per_atom.iter().enumerate() {
        match r {
            Ok(mu) => out!(ctx, "atom {}: mu = {}", w + 1, Point(mu.clone())),
            Err(r) => out!(ctx, "atom {}: none; violated at {} by {}", r.atom, r.point, format_rational(&r.violation)),
        }
    }
    if let Some(cert) = outcome.certificate {
        let path = out.unwrap_or_else(|| with_extension(function, ".subgrad"));
        out!(ctx, "wrote {}", path.display());
        ctx.artifacts.push(Artifact { path, contents: cert.to_string() });
    }
    Ok(())
}

fn risk(ctx: &mut Ctx, space: &Path, gamma: &str, probes: usize) -> Outcome {
    let file = RiskFile::parse(&read(space)?)?;
    let g = parse_rational(gamma).ok_or_else(|| fail(ErrorClass::Parse, format!("bad rational '{gamma}'")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
    let rep = entropic_risk(&file.space, &file.payoff, &g, &mut rng, probes)?;
    for (b, v) in rep.values.iter().enumerate() {
        out!(ctx, "block {}: {:.12}", b + 1, v);
    }
    out!(ctx, "probes {}", rep.probes);
    out!(ctx, "normalization error {:.3e}", rep.normalization_error);
    out!(ctx, "cash invariance error {:.3e}", rep.cash_error);
    out!(ctx, "monotonicity violation {:.3e}", rep.monotonicity_violation);
    out!(ctx, "convexity violation {:.3e}", rep.convexity_violation);
    out!(ctx, "local {}", if rep.local { "yes" } else { "no" });
    out!(ctx, "axioms {}", if rep.passed() { "pass" } else { "FAIL" });
    Ok(())
}

fn selftest_cmd(ctx: &mut Ctx, suite: Option<&str>) -> Result<i32, Failure> {
    let report = match suite {
        Some(name) => {
            let r = selftest::run_suite(name, ctx.seed)
                .ok_or_else(|| fail(ErrorClass::Parse, format!("unknown suite '{name}'")))?;
            selftest::SelftestReport { seed: ctx.seed, suites: vec![r] }
        }
        None => selftest::run(ctx.seed),
    };
    ctx.out.push_str(&report.to_string());
    Ok(if report.passed() { EXIT_OK } else { EXIT_PRECONDITION })
}
