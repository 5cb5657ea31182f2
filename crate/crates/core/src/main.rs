use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use graph_hardy::calculus::{gaffney_fit, Calculus, GaffneyFamily};
use graph_hardy::geometry::{geometry_report, DEFAULT_EXHAUSTIVE_LIMIT};
use graph_hardy::hardy_bmo::{bmo_norm, molecular_decompose_with_levels, BmoKind, TuplePolicy};
use graph_hardy::operators::p_diagonal;
use graph_hardy::plot::{line_chart, Series};
use graph_hardy::quadratic::{default_l_max, lusin};
use graph_hardy::riesz::{molecule_suite, riesz_h1_experiment};
use graph_hardy::{selftest, zoo, Error, Result, VertexFunction, WeightedGraph};

const LEVEL_CAP: usize = 100_000;

#[derive(Parser)]
#[command(name = "graph-hardy", version, about = "Hardy/BMO experiments on weighted graphs")]
struct Cli {
    /// Number of time levels for square functions (default: from --tol)
    #[arg(long, global = true)]
    lmax: Option<usize>,
    #[arg(long, global = true, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Write the report to this directory instead of stdout
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Svg,
}

impl Format {
    fn ext(self) -> &'static str {
        match self {
            Self::Json => "json",
            Self::Csv => "csv",
            Self::Svg => "svg",
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Bz1,
    Bz2,
}

#[derive(Clone, Copy, ValueEnum)]
enum Suite {
    Molecules,
    Random,
}

#[derive(Subcommand)]
enum Command {
    /// Doubling constant, growth exponent and (LB) lower bound
    Geometry { graph: String },
    /// Off-diagonal decay fit between vertex sets E and F
    Gaffney {
        graph: String,
        /// heat (= iterate), delta_iterate, resolvent, resolvent_difference,
        /// gradient_iterate, gradient_resolvent
        #[arg(long)]
        family: String,
        #[arg(long = "M", default_value_t = 1)]
        m: usize,
        /// Vertices, e.g. `3,5,10..12`
        #[arg(long = "E")]
        e: String,
        #[arg(long = "F")]
        f: String,
        /// Range `a..b` (inclusive)
        #[arg(long, default_value = "1..64")]
        s: String,
    },
    /// Quadratic H¹ norm ‖L_β f‖₁
    Quadnorm {
        graph: String,
        #[arg(long)]
        f: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        beta: f64,
    },
    /// Molecular decomposition of a mean-zero function
    Decompose {
        graph: String,
        #[arg(long)]
        f: PathBuf,
        #[arg(long = "M", default_value_t = 1)]
        m: usize,
        #[arg(long, default_value_t = 1.0)]
        beta: f64,
        #[arg(long, default_value_t = 1.0)]
        eps: f64,
    },
    /// BMO norm of the given kind
    Bmo {
        graph: String,
        #[arg(long)]
        f: PathBuf,
        #[arg(long, value_enum, default_value_t = Kind::Bz1)]
        kind: Kind,
        #[arg(long = "M", default_value_t = 1)]
        m: usize,
        #[arg(long, default_value_t = 16)]
        smax: usize,
    },
    /// ‖∇Δ^{-1/2} f‖₁ against ‖f‖_{H¹} over a suite
    Riesz {
        graph: String,
        #[arg(long, value_enum, default_value_t = Suite::Molecules)]
        suite: Suite,
        /// Random functions (random suite) or largest scale index (molecules)
        #[arg(long, default_value_t = 8)]
        n: usize,
    },
    /// Writes a zoo graph as an edge list
    Zoo { name: String },
    /// Runs the invariant checks
    Selftest,
}

struct Output {
    name: &'static str,
    json: serde_json::Value,
    csv: Option<String>,
    svg: Option<String>,
}

fn load_graph(name: &str) -> Result<WeightedGraph> {
    match zoo::by_name(name) {
        Ok(g) => Ok(g),
        Err(e) => {
            let path = Path::new(name);
            if path.exists() {
                WeightedGraph::load(path)
            } else {
                Err(e)
            }
        }
    }
}

fn load_function(path: &Path, g: &WeightedGraph) -> Result<VertexFunction> {
    let text = std::fs::read_to_string(path)?;
    VertexFunction::from_csv(&text, g.n())
}

fn parse_vertices(text: &str, n: usize) -> Result<Vec<usize>> {
    let bad = || Error::InvalidArgument(format!("bad vertex list `{text}`"));
    let mut out = Vec::new();
    for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        match part.split_once("..") {
            Some((a, b)) => {
                let a: usize = a.parse().map_err(|_| bad())?;
                let b: usize = b.parse().map_err(|_| bad())?;
                out.extend(a..=b);
            }
            None => out.push(part.parse().map_err(|_| bad())?),
        }
    }
    out.sort_unstable();
    out.dedup();
    if let Some(&x) = out.iter().find(|&&x| x >= n) {
        return Err(Error::InvalidArgument(format!("vertex {x} out of range (n = {n})")));
    }
    Ok(out)
}

fn parse_range(text: &str) -> Result<Vec<usize>> {
    let bad = || Error::InvalidArgument(format!("bad range `{text}`, expected a..b"));
    let (a, b) = text.split_once("..").ok_or_else(bad)?;
    let a: usize = a.trim().parse().map_err(|_| bad())?;
    let b: usize = b.trim().parse().map_err(|_| bad())?;
    if a == 0 || b < a {
        return Err(bad());
    }
    Ok((a..=b).collect())
}

fn levels(cli: &Cli, cal: &Calculus, beta: f64) -> usize {
    cli.lmax.unwrap_or_else(|| default_l_max(cal, beta, cli.tol, LEVEL_CAP))
}

fn values_csv(header: &str, values: &[f64]) -> String {
    let mut out = format!("{header}\n");
    for (x, v) in values.iter().enumerate() {
        out.push_str(&format!("{x},{v:e}\n"));
    }
    out
}

fn run(cli: &Cli) -> Result<Output> {
    match &cli.command {
        Command::Geometry { graph } => {
            let g = load_graph(graph)?;
            let r = geometry_report(&g, &p_diagonal(&g), DEFAULT_EXHAUSTIVE_LIMIT);
            let json = serde_json::to_value(&r)?;
            let csv = json
                .as_object()
                .map(|o| o.iter().fold(String::from("key,value\n"), |acc, (k, v)| acc + &format!("{k},{v}\n")));
            Ok(Output { name: "geometry", json, csv, svg: None })
        }
        Command::Gaffney { graph, family, m, e, f, s } => {
            let g = load_graph(graph)?;
            let family = GaffneyFamily::parse(family, *m)?;
            let e_set = parse_vertices(e, g.n())?;
            let f_set = parse_vertices(f, g.n())?;
            let s_range = parse_range(s)?;
            let cal = Calculus::new(&g, cli.tol);
            let fit = gaffney_fit(&g, family, &e_set, &f_set, &s_range, cli.tol, cal.bounds())?;
            let mut csv = String::from("s,ratio\n");
            for p in &fit.points {
                csv.push_str(&format!("{},{:e}\n", p.s, p.ratio));
            }
            let measured: Vec<(f64, f64)> = fit.points.iter().map(|p| (p.s as f64, p.ratio.ln())).collect();
            let model: Vec<(f64, f64)> = fit
                .points
                .iter()
                .map(|p| {
                    let x = ((fit.distance as f64).powi(2) / p.s as f64).powf(fit.eta);
                    (p.s as f64, fit.big_c.ln() - fit.c * x)
                })
                .collect();
            let svg = line_chart(
                &format!("off-diagonal decay, d(E,F) = {}", fit.distance),
                "s",
                "log ratio",
                &[Series { name: "measured".into(), points: measured }, Series { name: "fit".into(), points: model }],
            );
            Ok(Output { name: "gaffney", json: serde_json::to_value(&fit)?, csv: Some(csv), svg: Some(svg) })
        }
        Command::Quadnorm { graph, f, beta } => {
            let g = load_graph(graph)?;
            let f = load_function(f, &g)?;
            let cal = Calculus::new(&g, cli.tol);
            let l_max = levels(cli, &cal, *beta);
            let sq = lusin(&cal, &f, *beta, l_max)?;
            let norm = sq.l1_norm(&g);
            let svg = line_chart(
                "Lusin square function",
                "vertex",
                "L_beta f",
                &[Series {
                    name: format!("beta = {beta}"),
                    points: sq.values.iter().enumerate().map(|(x, &v)| (x as f64, v)).collect(),
                }],
            );
            let json = json!({
                "beta": beta,
                "l_max": l_max,
                "norm": norm,
                "tail_bound": sq.tail_bound,
                "values": sq.values,
            });
            Ok(Output { name: "quadnorm", json, csv: Some(values_csv("vertex,value", &sq.values)), svg: Some(svg) })
        }
        Command::Decompose { graph, f, m, beta, eps } => {
            let g = load_graph(graph)?;
            let f = load_function(f, &g)?;
            let d0 = geometry_report(&g, &p_diagonal(&g), DEFAULT_EXHAUSTIVE_LIMIT).d0_estimate;
            let cal = Calculus::new(&g, 1e-13);
            let d = molecular_decompose_with_levels(&cal, &f, *m, *beta, *eps, d0, cli.tol.max(1e-12), cli.lmax)?;
            let json: serde_json::Value = serde_json::from_str(&d.to_json(&g))?;
            let mut csv = String::from("lambda,center,radius,s,normalization\n");
            for ((lambda, mol), c) in d.coefficients.iter().zip(&d.normalizations) {
                csv.push_str(&format!("{lambda:e},{},{},{},{c:e}\n", mol.ball.center, mol.ball.radius, mol.kind.s()));
            }
            Ok(Output { name: "decompose", json, csv: Some(csv), svg: None })
        }
        Command::Bmo { graph, f, kind, m, smax } => {
            let g = load_graph(graph)?;
            let f = load_function(f, &g)?;
            let cal = Calculus::new(&g, cli.tol);
            let kind = match kind {
                Kind::Bz1 => BmoKind::Bz1 { m: *m },
                Kind::Bz2 => BmoKind::Bz2 { m: *m },
            };
            let policy = TuplePolicy { seed: cli.seed, ..TuplePolicy::default() };
            let r = bmo_norm(&cal, &f, kind, *smax, &policy)?;
            let csv = format!(
                "value,s,center,radius,policy\n{:e},{},{},{},{}\n",
                r.value, r.argmax.s, r.argmax.center, r.argmax.radius, r.enumeration_policy
            );
            Ok(Output { name: "bmo", json: serde_json::to_value(&r)?, csv: Some(csv), svg: None })
        }
        Command::Riesz { graph, suite, n } => {
            let g = load_graph(graph)?;
            let cal = Calculus::new(&g, cli.tol);
            let inputs = match suite {
                Suite::Molecules => {
                    let scales: Vec<usize> = (0..(*n).max(1)).map(|k| 1usize << (2 * k)).take(4).collect();
                    molecule_suite(&cal, &scales, 1)?
                }
                Suite::Random => {
                    let mut rng = ChaCha8Rng::seed_from_u64(cli.seed);
                    (0..*n)
                        .map(|i| {
                            let f: VertexFunction =
                                (0..g.n()).map(|_| rng.gen_range(-1.0..1.0)).collect::<Vec<_>>().into();
                            (format!("random/{i}"), f.remove_mean(&g))
                        })
                        .collect()
                }
            };
            let l_max = levels(cli, &cal, 1.0);
            let report = riesz_h1_experiment(&cal, &inputs, l_max)?;
            let svg = line_chart(
                "Riesz transform: L1 gradient over quadratic H1 norm",
                "input",
                "ratio",
                &[Series {
                    name: "ratio".into(),
                    points: report.entries.iter().enumerate().map(|(i, e)| (i as f64, e.ratio)).collect(),
                }],
            );
            Ok(Output {
                name: "riesz",
                json: serde_json::to_value(&report)?,
                csv: Some(report.to_csv()),
                svg: Some(svg),
            })
        }
        Command::Zoo { name } => {
            let g = zoo::by_name(name)?;
            let json = serde_json::from_str(&g.to_json())?;
            Ok(Output { name: "zoo", json, csv: Some(g.to_edge_list()), svg: None })
        }
        Command::Selftest => {
            let report = selftest::run(cli.seed);
            let mut csv = String::from("check,passed,detail\n");
            for c in &report.checks {
                csv.push_str(&format!("{},{},\"{}\"\n", c.name, c.passed, c.detail.replace('"', "'")));
            }
            let json = serde_json::to_value(&report)?;
            if !report.passed {
                emit(cli, &Output { name: "selftest", json, csv: Some(csv), svg: None })?;
                return Err(Error::ValidationFailed("selftest checks failed".into()));
            }
            Ok(Output { name: "selftest", json, csv: Some(csv), svg: None })
        }
    }
}

fn emit(cli: &Cli, out: &Output) -> Result<()> {
    let text = match cli.format {
        Format::Json => serde_json::to_string_pretty(&out.json)? + "\n",
        Format::Csv => {
            out.csv.clone().ok_or_else(|| Error::InvalidArgument(format!("`{}` has no csv output", out.name)))?
        }
        Format::Svg => {
            out.svg.clone().ok_or_else(|| Error::InvalidArgument(format!("`{}` has no svg output", out.name)))?
        }
    };
    match &cli.out {
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            let path = dir.join(format!("{}.{}", out.name, cli.format.ext()));
            std::fs::write(&path, text)?;
            eprintln!("wrote {}", path.display());
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Io(_) | Error::Parse { .. } | Error::Json(_) => 2,
        Error::NonConvergent { .. } => 3,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(&cli).and_then(|out| emit(&cli, &out)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
