//! `ffg`: determinize coalgebras, solve equations, compare states and run
//! the law checkers from the command line.
//!
//! Exit codes: 0 success, 1 negative verdict (inequivalent states, no
//! zig-zag, failed law), 2 parse or usage error, 3 unsupported instance,
//! 4 any other error.

use std::collections::{BTreeMap, VecDeque};
use std::fmt::Write as _;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use ffg::coalgebra::{materialize, FfgCoalgebra, FiniteCoalgebra};
use ffg::dsl::{
    coalgebra_to_json, format_node, parse_coalgebra, parse_equation_source, parse_term, resolve_state, resolve_stream,
};
use ffg::elgot::{check_compositionality, check_weak_functoriality, AxiomBounds, AxiomReport, BrokenStreamSolver, ElgotAlgebra};
use ffg::functor::{builtin_law, check_dist_law, DistributiveLaw, FNode, Law, Moore, Shape};
use ffg::phi::{zigzag_witness, BisimBackend, BisimPhi, Language, StreamKey, StreamPhi};
use ffg::{Error, FreeElem, Term, Variety};

/// Output that stops quietly when the reader goes away.
macro_rules! out {
    ($($t:tt)*) => {{
        use std::io::Write as _;
        let _ = write!(std::io::stdout(), $($t)*);
    }};
}

macro_rules! outln {
    ($($t:tt)*) => {{
        use std::io::Write as _;
        let _ = writeln!(std::io::stdout(), $($t)*);
    }};
}

#[derive(Parser)]
#[command(name = "ffg", version, about = "Effectful iterative equations over ffg-coalgebras")]
struct Cli {
    /// Variety of the carrier: set, unary or jsl [default: from the backend]
    #[arg(long, global = true)]
    variety: Option<String>,

    /// Behavior shape: `id`, `moore[:LETTERS[:OUTPUTS]]`, `poly:OP/ARITY,..`
    /// or a JSON shape [default: from the backend]
    #[arg(long, global = true)]
    shape: Option<String>,

    /// Fixed point used for solutions and class equality [default: stream,
    /// bisim for determinize and language]
    #[arg(long, global = true, value_enum)]
    backend: Option<BackendKind>,

    /// Size bound for `laws`: largest |X|, |Y| for the Elgot axioms, largest
    /// generator set or counter for distributive laws
    #[arg(long, global = true, default_value_t = 2)]
    bound: usize,

    /// Seed for sampled pools
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BackendKind {
    /// Eventually periodic streams up to mean (unary carriers, `id` shape)
    Stream,
    /// Regular languages up to bisimilarity (jsl carriers, Moore shapes)
    Bisim,
    /// A stream solver whose answers depend on the size of the system
    Broken,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
    Dot,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Axiom {
    WeakFunctoriality,
    Compositionality,
    DistLaw,
    All,
}

#[derive(Subcommand)]
enum Command {
    /// Extend a coalgebra on generators to its whole free carrier
    Determinize {
        /// Coalgebra file, `-` for stdin
        file: String,
    },
    /// Solve an equation system in the backend's fixed point
    Solve {
        /// Equation file, `-` for stdin
        file: String,
    },
    /// Decide whether two states have the same behavior
    Equiv {
        /// A stream literal `(..)(..)^w` or a state of `--input`
        left: String,
        right: String,
        /// Coalgebra whose states the operands name
        #[arg(long)]
        input: Option<String>,
    },
    /// Build a zig-zag between two mean-equivalent stream states
    Zigzag {
        left: String,
        right: String,
        #[arg(long)]
        input: Option<String>,
    },
    /// Check distributive-law or Elgot axioms on bounded pools
    Laws {
        #[arg(long, value_enum, default_value_t = Axiom::All)]
        axiom: Axiom,
        /// Draw at most this many instances per size instead of all
        #[arg(long)]
        sample: Option<usize>,
    },
    /// The regular language of a state of a binary-output Moore coalgebra
    Language {
        file: String,
        /// A term over the generators, e.g. `{p,q}`
        state: String,
        /// Longest word to list
        #[arg(long, default_value_t = 6)]
        length: usize,
    },
}

enum Failure {
    Core(Error),
    Usage(String),
    Io(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) | Failure::Core(Error::Parse { .. }) => 2,
            Failure::Core(
                Error::Unsupported(_)
                | Error::UnsupportedLaw { .. }
                | Error::InfiniteCarrier(_)
                | Error::CarrierTooLarge { .. },
            ) => 3,
            _ => 4,
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Core(e) => e.to_string(),
            Failure::Usage(m) | Failure::Io(m) => m.clone(),
        }
    }
}

type Outcome = Result<bool, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(f) => {
            eprintln!("ffg: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}

fn run(cli: &Cli) -> Outcome {
    match &cli.command {
        Command::Determinize { file } => determinize(cli, file),
        Command::Solve { file } => solve(cli, file),
        Command::Equiv { left, right, input } => equiv(cli, left, right, input.as_deref()),
        Command::Zigzag { left, right, input } => zigzag(cli, left, right, input.as_deref()),
        Command::Laws { axiom, sample } => laws(cli, *axiom, *sample),
        Command::Language { file, state, length } => language(cli, file, state, *length),
    }
}

fn read(path: &str) -> Result<String, Failure> {
    if path == "-" {
        std::io::read_to_string(std::io::stdin()).map_err(|e| Failure::Io(format!("stdin: {e}")))
    } else {
        std::fs::read_to_string(path).map_err(|e| Failure::Io(format!("{path}: {e}")))
    }
}

fn parse_shape(s: &str) -> Result<Shape, Failure> {
    let s = s.trim();
    if s.starts_with('{') {
        let v: Value = serde_json::from_str(s).map_err(|e| Failure::Usage(format!("shape JSON: {e}")))?;
        return Ok(Shape::from_json(&v)?);
    }
    let list = |t: &str| -> Vec<String> { t.split(',').map(|x| x.trim().to_string()).filter(|x| !x.is_empty()).collect() };
    let (head, rest) = s.split_once(':').unwrap_or((s, ""));
    match head {
        "id" => Ok(Shape::Id),
        "moore" => {
            let (letters, outputs) = rest.split_once(':').unwrap_or((rest, ""));
            let letters = if letters.is_empty() { vec!["a".into(), "b".into()] } else { list(letters) };
            let outputs = if outputs.is_empty() { vec!["0".into(), "1".into()] } else { list(outputs) };
            Ok(Shape::Moore(Moore::new(outputs, letters)))
        }
        "poly" => {
            let mut ops = Vec::new();
            for op in list(rest) {
                let (name, arity) = op
                    .split_once('/')
                    .ok_or_else(|| Failure::Usage(format!("operation `{op}` needs an arity, as in `f/2`")))?;
                let arity = arity.parse().map_err(|_| Failure::Usage(format!("bad arity in `{op}`")))?;
                ops.push((name.to_string(), arity));
            }
            Ok(Shape::Poly(ops))
        }
        other => Err(Failure::Usage(format!("unknown shape `{other}`"))),
    }
}

fn backend_kind(cli: &Cli, fallback: BackendKind) -> BackendKind {
    cli.backend.unwrap_or(fallback)
}

/// The law named by `--variety`/`--shape`, defaulting to the backend's.
fn instance(cli: &Cli, backend: BackendKind) -> Result<Law, Failure> {
    let variety = match &cli.variety {
        Some(v) => Variety::parse(v)?,
        None if backend == BackendKind::Bisim => Variety::Jsl,
        None => Variety::Unary,
    };
    let shape = match &cli.shape {
        Some(s) => parse_shape(s)?,
        None if variety == Variety::Unary => Shape::Id,
        None => Shape::Moore(Moore::binary(2)),
    };
    Ok(builtin_law(variety, shape)?)
}

fn stream_phi(cli: &Cli) -> Result<StreamPhi, Failure> {
    let law = instance(cli, BackendKind::Stream)?;
    let phi = StreamPhi::streams();
    if &law != phi.law() {
        return Err(Error::Unsupported(format!("the stream backend needs UNARY over `id`, not {}", law.variety())).into());
    }
    Ok(phi)
}

fn bisim_phi(cli: &Cli) -> Result<BisimPhi, Failure> {
    Ok(BisimPhi::new(BisimBackend::new(instance(cli, BackendKind::Bisim)?)?))
}

fn print_json(v: &Value) {
    outln!("{}", serde_json::to_string_pretty(v).expect("values serialize"));
}

fn no_dot(verb: &str) -> Failure {
    Error::Unsupported(format!("`{verb}` has no DOT output")).into()
}

fn machine_text(m: &FiniteCoalgebra) -> String {
    let names = m.names();
    m.nodes()
        .iter()
        .zip(names)
        .map(|(n, s)| format!("{s} -> {}\n", format_node(m.shape(), n, |i| names[*i].clone(), true)))
        .collect()
}

/// A deterministic machine as a SET coalgebra over the same shape, so that
/// its JSON reads back through the coalgebra parser.
fn machine_json(m: &FiniteCoalgebra) -> Result<Value, Failure> {
    let law = builtin_law(Variety::Set, m.shape().clone())?;
    let step = m.nodes().iter().map(|n| n.map(|&i| Term::Var(i))).collect();
    let c = FfgCoalgebra::new(law, m.names().to_vec(), step)?;
    Ok(coalgebra_to_json(&c))
}

fn determinize(cli: &Cli, file: &str) -> Outcome {
    let law = instance(cli, BackendKind::Bisim)?;
    let c = parse_coalgebra(&read(file)?, &law)?;
    let (machine, _) = materialize(&c, 12)?;
    match cli.format {
        Format::Text => out!("{}", machine_text(&machine)),
        Format::Json => print_json(&machine_json(&machine)?),
        Format::Dot => out!("{}", machine.to_dot("determinized")),
    }
    Ok(true)
}

fn solve(cli: &Cli, file: &str) -> Outcome {
    let src = read(file)?;
    let rows: Vec<(String, String)> = match backend_kind(cli, BackendKind::Stream) {
        BackendKind::Stream | BackendKind::Broken => {
            let phi = stream_phi(cli)?;
            let source = parse_equation_source(&src, phi.law())?;
            let coalgebra = source.coalgebra.clone();
            let e = source.build(phi.clone(), |text| {
                let t = text.trim_start();
                if t.starts_with('(') || t.starts_with(|c: char| c.is_ascii_digit()) {
                    resolve_stream(&phi, text)
                } else {
                    resolve_state(&phi, coalgebra.as_ref(), text)
                }
            })?;
            let s = if cli.backend == Some(BackendKind::Broken) {
                let broken = BrokenStreamSolver::new();
                let e = ffg::equation::reparameterize(|p| p.clone(), broken.clone(), &e)?;
                broken.solve(&e)?.values
            } else {
                phi.solve(&e)?.values
            };
            e.vars().iter().cloned().zip(s.iter().map(|k| k.to_string())).collect()
        }
        BackendKind::Bisim => {
            let phi = bisim_phi(cli)?;
            let source = parse_equation_source(&src, phi.law())?;
            let coalgebra = source.coalgebra.clone();
            let e = source.build(phi.clone(), |text| resolve_state(&phi, coalgebra.as_ref(), text))?;
            let s = phi.solve(&e)?.values;
            e.vars().iter().cloned().zip(s.iter().map(|k| k.to_string())).collect()
        }
    };
    match cli.format {
        Format::Text => {
            for (x, k) in &rows {
                outln!("{x} = {k}");
            }
        }
        Format::Json => {
            let solution: BTreeMap<&str, &str> = rows.iter().map(|(x, k)| (x.as_str(), k.as_str())).collect();
            print_json(&json!({ "solution": solution }));
        }
        Format::Dot => return Err(no_dot("solve")),
    }
    Ok(true)
}

/// An operand: a stream literal, or a term over the generators of `input`.
fn operand(text: &str, law: &Law, input: Option<&FfgCoalgebra>) -> Result<(FfgCoalgebra, FreeElem), Failure> {
    if law.variety() == Variety::Unary && text.trim_start().starts_with('(') {
        let s: ffg::phi::EpStream = text.parse()?;
        return Ok(s.realize());
    }
    let c = input.ok_or_else(|| Failure::Usage(format!("`{text}` names a state; pass the coalgebra with --input")))?;
    let t = parse_term(text, c.variety(), c.gens())?;
    Ok((c.clone(), t))
}

fn load_input(path: Option<&str>, law: &Law) -> Result<Option<FfgCoalgebra>, Failure> {
    path.map(|p| Ok(parse_coalgebra(&read(p)?, law)?)).transpose()
}

fn show_mean(k: &StreamKey) -> String {
    if k.denom() == 1 {
        k.numer().to_string()
    } else {
        k.to_string()
    }
}

fn equiv(cli: &Cli, left: &str, right: &str, input: Option<&str>) -> Outcome {
    match backend_kind(cli, BackendKind::Stream) {
        BackendKind::Stream | BackendKind::Broken => {
            let phi = stream_phi(cli)?;
            let input = load_input(input, phi.law())?;
            let (c, s) = operand(left, phi.law(), input.as_ref())?;
            let (d, t) = operand(right, phi.law(), input.as_ref())?;
            let a = *phi.class_of(&c, &s)?.key();
            let b = *phi.class_of(&d, &t)?.key();
            let same = a == b;
            match cli.format {
                Format::Text => {
                    let rel = if same { "=" } else { "!=" };
                    outln!("mean {} {rel} mean {}", show_mean(&a), show_mean(&b));
                }
                Format::Json => print_json(&json!({ "equivalent": same, "left": a, "right": b })),
                Format::Dot => return Err(no_dot("equiv")),
            }
            Ok(same)
        }
        BackendKind::Bisim => {
            let phi = bisim_phi(cli)?;
            let input = load_input(input, phi.law())?;
            let (c, s) = operand(left, phi.law(), input.as_ref())?;
            let (d, t) = operand(right, phi.law(), input.as_ref())?;
            let a = phi.class_of(&c, &s)?;
            let b = phi.class_of(&d, &t)?;
            let same = a == b;
            let witness = if same { None } else { distinguishing_word(&phi, a.key(), b.key()) };
            match cli.format {
                Format::Text => match &witness {
                    None if same => outln!("equivalent"),
                    None => outln!("inequivalent"),
                    Some((w, outs)) => outln!("inequivalent: after {w} the outputs are {} and {}", outs.0, outs.1),
                },
                Format::Json => print_json(&json!({
                    "equivalent": same,
                    "witness": witness.as_ref().map(|(w, o)| json!({ "word": w, "left": o.0, "right": o.1 })),
                })),
                Format::Dot => return Err(no_dot("equiv")),
            }
            Ok(same)
        }
    }
}

/// Shortest word after which the two minimal machines give different
/// outputs, with those outputs.
fn distinguishing_word(
    phi: &BisimPhi,
    a: &ffg::phi::MachineKey,
    b: &ffg::phi::MachineKey,
) -> Option<(String, (String, String))> {
    let m = phi.backend().moore();
    let mut seen = BTreeMap::new();
    let mut queue = VecDeque::from([((0usize, 0usize), Vec::<usize>::new())]);
    seen.insert((0, 0), ());
    while let Some(((p, q), w)) = queue.pop_front() {
        let (np, nq) = (&a.0[p], &b.0[q]);
        if np.label != nq.label {
            let word = if w.is_empty() { "ε".to_string() } else { w.iter().map(|&l| m.alphabet()[l].as_str()).collect() };
            return Some((word, (m.outputs()[np.label].clone(), m.outputs()[nq.label].clone())));
        }
        for l in 0..m.alphabet().len() {
            let next = (np.children[l], nq.children[l]);
            if seen.insert(next, ()).is_none() {
                let mut w = w.clone();
                w.push(l);
                queue.push_back((next, w));
            }
        }
    }
    None
}

fn zigzag(cli: &Cli, left: &str, right: &str, input: Option<&str>) -> Outcome {
    if backend_kind(cli, BackendKind::Stream) != BackendKind::Stream {
        return Err(Error::Unsupported("zig-zags are built for the stream backend only".into()).into());
    }
    let phi = stream_phi(cli)?;
    let input = load_input(input, phi.law())?;
    let (c, s) = operand(left, phi.law(), input.as_ref())?;
    let (d, t) = operand(right, phi.law(), input.as_ref())?;
    let Some(z) = zigzag_witness(&c, &s, &d, &t)? else {
        let a = phi.class_of(&c, &s)?;
        let b = phi.class_of(&d, &t)?;
        match cli.format {
            Format::Json => print_json(&json!({ "zigzag": null, "left": a.key(), "right": b.key() })),
            _ => outln!("no zig-zag: mean {} != mean {}", show_mean(a.key()), show_mean(b.key())),
        }
        return Ok(false);
    };
    z.verify(&c, &d)
        .map_err(|v| Failure::Core(Error::NotHomomorphism(format!("{v:?}"))))?;
    let apex = &z.apex;
    match cli.format {
        Format::Text => {
            out!("{}", ffg::dsl::format_coalgebra(apex));
            for (i, g) in apex.gens().iter().enumerate() {
                outln!("{g}: {} | {}", c.display(&z.left[i]), d.display(&z.right[i]));
            }
            outln!("prefix {}, period {}", z.prefix_len, z.period_len);
        }
        Format::Json => print_json(&json!({
            "apex": coalgebra_to_json(apex),
            "left": z.left.iter().map(|t| c.display(t)).collect::<Vec<_>>(),
            "right": z.right.iter().map(|t| d.display(t)).collect::<Vec<_>>(),
            "prefix": z.prefix_len,
            "period": z.period_len,
        })),
        Format::Dot => {
            let mut out = String::from("digraph zigzag {\n  rankdir=TB;\n");
            for (i, g) in apex.gens().iter().enumerate() {
                let _ = writeln!(out, "  z{i} [label=\"{g}\"];");
                let _ = writeln!(out, "  l{i} [shape=box, label=\"left {}\"];", c.display(&z.left[i]));
                let _ = writeln!(out, "  r{i} [shape=box, label=\"right {}\"];", d.display(&z.right[i]));
                let _ = writeln!(out, "  z{i} -> l{i} [style=dashed];");
                let _ = writeln!(out, "  z{i} -> r{i} [style=dashed];");
                let node = apex.structure(&apex.eta(i));
                if let Term::Iter(k, j) = &node.children[0] {
                    let _ = writeln!(out, "  z{i} -> z{j} [label=\"+{k}\"];");
                }
            }
            out.push_str("}\n");
            out!("{out}");
        }
    }
    Ok(true)
}

fn mean_pool(rng: &mut ChaCha8Rng, phi: &StreamPhi, n: usize) -> Vec<ffg::phi::PhiElem<ffg::phi::StreamBackend>> {
    (0..n).map(|_| phi.mean(rng.gen_range(0..6), rng.gen_range(1..4))).collect()
}

fn random_class(rng: &mut ChaCha8Rng, phi: &BisimPhi) -> Result<ffg::phi::PhiElem<BisimBackend>, Failure> {
    let shape = phi.law().shape();
    let n = rng.gen_range(1..4);
    let step = (0..n)
        .map(|_| {
            let label = rng.gen_range(0..shape.label_count());
            let kids = (0..shape.arity(label))
                .map(|_| Term::Join((0..n).filter(|_| rng.gen_bool(0.4)).collect()))
                .collect();
            FNode::new(label, kids)
        })
        .collect();
    let gens = (0..n).map(|i| format!("q{i}")).collect();
    let c = FfgCoalgebra::new(phi.law().clone(), gens, step)?;
    let t = Term::Join((0..n).filter(|_| rng.gen_bool(0.5)).collect());
    Ok(phi.class_of(&c, &t)?)
}

fn elgot_reports<A: ElgotAlgebra>(
    alg: &A,
    axiom: Axiom,
    bounds: &AxiomBounds,
    hs: &[Vec<A::Elem>],
    pool: &[A::Elem],
) -> Vec<AxiomReport> {
    let mut out = Vec::new();
    if matches!(axiom, Axiom::WeakFunctoriality | Axiom::All) {
        out.push(check_weak_functoriality(alg, bounds, hs));
    }
    if matches!(axiom, Axiom::Compositionality | Axiom::All) {
        out.push(check_compositionality(alg, bounds, pool));
    }
    out
}

fn laws(cli: &Cli, axiom: Axiom, sample: Option<usize>) -> Outcome {
    let kind = backend_kind(cli, BackendKind::Stream);
    let mut rows: Vec<(String, usize, Vec<String>)> = Vec::new();
    if matches!(axiom, Axiom::DistLaw | Axiom::All) {
        let law = instance(cli, kind)?;
        let r = check_dist_law(&law, cli.bound as u64);
        let n = r.unit_instances + r.multiplication_instances + r.naturality_instances;
        rows.push(("distributive-law".into(), n, r.counterexamples));
    }
    if axiom != Axiom::DistLaw {
        let bounds = AxiomBounds {
            vars: cli.bound,
            sample,
            seed: cli.seed,
            ..AxiomBounds::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(cli.seed);
        let reports = match kind {
            BackendKind::Stream => {
                let phi = stream_phi(cli)?;
                let hs: Vec<_> = mean_pool(&mut rng, &phi, 3).into_iter().map(|m| vec![m]).collect();
                let pool = mean_pool(&mut rng, &phi, 2);
                elgot_reports(&phi, axiom, &bounds, &hs, &pool)
            }
            BackendKind::Broken => {
                let phi = stream_phi(cli)?;
                let broken = BrokenStreamSolver::new();
                let hs: Vec<_> = mean_pool(&mut rng, &phi, 3).into_iter().map(|m| vec![m]).collect();
                let pool = mean_pool(&mut rng, &phi, 2);
                elgot_reports(&broken, axiom, &bounds, &hs, &pool)
            }
            BackendKind::Bisim => {
                let phi = bisim_phi(cli)?;
                let classes = vec![random_class(&mut rng, &phi)?, random_class(&mut rng, &phi)?];
                let mut hs = vec![vec![ffg::Algebra::bottom(&phi)]];
                hs.extend(classes.iter().map(|c| vec![c.clone()]));
                elgot_reports(&phi, axiom, &bounds, &hs, &classes)
            }
        };
        rows.extend(reports.into_iter().map(|r| (r.axiom, r.instances, r.failures)));
    }
    let passed = rows.iter().all(|(_, _, f)| f.is_empty());
    match cli.format {
        Format::Text => {
            for (name, n, failures) in &rows {
                let verdict = if failures.is_empty() { "PASS" } else { "FAIL" };
                outln!("{verdict} {name}: {n} instances, seed {}", cli.seed);
                for f in failures {
                    outln!("  counterexample: {f}");
                }
            }
        }
        Format::Json => print_json(&json!({
            "seed": cli.seed,
            "bound": cli.bound,
            "passed": passed,
            "reports": rows
                .iter()
                .map(|(name, n, f)| json!({ "axiom": name, "instances": n, "failures": f }))
                .collect::<Vec<_>>(),
        })),
        Format::Dot => return Err(no_dot("laws")),
    }
    Ok(passed)
}

fn language(cli: &Cli, file: &str, state: &str, length: usize) -> Outcome {
    let phi = bisim_phi(cli)?;
    let c = parse_coalgebra(&read(file)?, phi.law())?;
    let t = parse_term(state, c.variety(), c.gens())?;
    let lang: Language = phi.language_of(&phi.class_of(&c, &t)?)?;
    let names: Vec<String> = (0..lang.machine.0.len()).map(|i| format!("m{i}")).collect();
    let machine = FiniteCoalgebra::new(Arc::new(phi.law().shape().clone()), names, lang.machine.0.clone())?;
    let words: Vec<String> = lang.words_up_to(length).iter().map(|w| lang.show_word(w)).collect();
    match cli.format {
        Format::Text => {
            out!("{}", machine_text(&machine));
            if lang.is_empty() {
                outln!("empty language");
            } else {
                outln!("words up to length {length}: {}", words.join(" "));
            }
        }
        Format::Json => print_json(&json!({
            "machine": machine_json(&machine)?,
            "empty": lang.is_empty(),
            "max_length": length,
            "words": words,
        })),
        Format::Dot => out!("{}", machine.to_dot(state)),
    }
    Ok(true)
}
