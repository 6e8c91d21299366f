mod report;

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use cms_core::coding::{self, ImageSpec};
use cms_core::io as cio;
use cms_core::operator::{self, InvariantConfig, Scheme};
use cms_core::system::{self, fixtures, parse_word};
use cms_core::{simulate, thermo, Expression, Measure, Point, State, System};
use serde::Serialize;
use serde_json::{json, Value};

use report::{CliError, Report};

#[derive(Parser, Debug)]
#[command(name = "cms", version, about = "Contractive Markov systems: simulation, invariant measures, coding and entropy")]
struct Cli {
    /// Worker threads (defaults to the available parallelism).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check the graph axioms and sample the partition, probability and positivity conditions.
    Validate(ValidateArgs),
    /// Estimate the average contraction rate from random same-vertex pairs.
    Contraction(ContractionArgs),
    /// Run one chain path and write it as CSV.
    Simulate(SimulateArgs),
    /// Approximate the invariant measure by iterating the adjoint operator on particles.
    Invariant(InvariantArgs),
    /// Entropy of the generalized Markov measure of a particle measure.
    Entropy(EntropyArgs),
    /// Code random words into points and optionally render a density image.
    Code(CodeArgs),
    /// Consistency checks against a particle measure.
    #[command(subcommand)]
    Check(CheckCommand),
    /// g-measure tools.
    #[command(subcommand)]
    Gmeasure(GmeasureCommand),
    /// Built-in systems.
    #[command(subcommand)]
    Fixtures(FixturesCommand),
}

#[derive(Args, Debug, Serialize)]
struct ValidateArgs {
    file: PathBuf,
    /// Random points per vertex for the sampled checks.
    #[arg(long, default_value_t = 0, requires = "seed")]
    samples: usize,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args, Debug, Serialize)]
struct ContractionArgs {
    file: PathBuf,
    #[arg(long, default_value_t = 100_000)]
    pairs: usize,
    #[arg(long)]
    seed: u64,
}

#[derive(Args, Debug, Serialize)]
struct SimulateArgs {
    file: PathBuf,
    /// `base` or `base:V` (1-based vertex), coordinates `x0,x1,...`, or a hyphenated word.
    #[arg(long, default_value = "base")]
    start: String,
    #[arg(long)]
    steps: usize,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum SchemeArg {
    Split,
    Resample,
}

#[derive(Args, Debug, Serialize)]
struct InvariantArgs {
    file: PathBuf,
    #[arg(long)]
    particles: usize,
    #[arg(long)]
    iters: usize,
    #[arg(long)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = SchemeArg::Split)]
    scheme: SchemeArg,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct EntropyArgs {
    file: PathBuf,
    #[arg(long)]
    measure: PathBuf,
    /// Also estimate the log-cylinder rate along a simulated path of this many steps.
    #[arg(long, requires = "seed")]
    cross_steps: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value = "base")]
    start: String,
}

#[derive(Args, Debug, Serialize)]
struct CodeArgs {
    file: PathBuf,
    #[arg(long)]
    measure: Option<PathBuf>,
    #[arg(long)]
    depth: usize,
    #[arg(long)]
    samples: usize,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    image: Option<PathBuf>,
    #[arg(long, default_value_t = 512)]
    width: usize,
    #[arg(long, default_value_t = 512)]
    height: usize,
    /// `x0,y0,x1,y1`; defaults to the working box.
    #[arg(long)]
    viewport: Option<String>,
}

#[derive(Subcommand, Debug)]
enum CheckCommand {
    /// Cylinder additivity and shift-stationarity for all words up to a length.
    Cylinders(CylindersArgs),
    /// Conditional edge probabilities given long pasts against p_e.
    Conditional(ConditionalArgs),
    /// Coded ensembles against the measure at several depths.
    Pushforward(PushforwardArgs),
    /// Decay of coding increments with depth.
    Decay(DecayArgs),
}

#[derive(Args, Debug, Serialize)]
struct CylindersArgs {
    file: PathBuf,
    #[arg(long)]
    measure: PathBuf,
    #[arg(long, default_value_t = 5)]
    max_len: usize,
    #[arg(long, default_value_t = 1e-12)]
    tolerance: f64,
}

#[derive(Args, Debug, Serialize)]
struct ConditionalArgs {
    file: PathBuf,
    #[arg(long)]
    measure: PathBuf,
    /// Word lengths, e.g. `4,12` or `2..6`.
    #[arg(long, default_value = "4,12")]
    word_lens: String,
    #[arg(long, default_value_t = 1000)]
    words: usize,
    #[arg(long)]
    seed: u64,
    /// Words whose mass is below this many standard errors are skipped.
    #[arg(long, default_value_t = 10.0)]
    mass_floor: f64,
}

#[derive(Args, Debug, Serialize)]
struct PushforwardArgs {
    file: PathBuf,
    #[arg(long)]
    measure: PathBuf,
    #[arg(long, default_value = "5,10,40")]
    depths: String,
    #[arg(long, default_value_t = 10_000)]
    samples: usize,
    #[arg(long)]
    seed: u64,
}

#[derive(Args, Debug, Serialize)]
struct DecayArgs {
    file: PathBuf,
    #[arg(long)]
    measure: PathBuf,
    #[arg(long, default_value = "5..40")]
    depths: String,
    #[arg(long, default_value_t = 10_000)]
    words: usize,
    #[arg(long)]
    seed: u64,
    /// Relative slack on `log a` allowed for the fitted slope.
    #[arg(long, default_value_t = 0.2)]
    slack: f64,
}

#[derive(Subcommand, Debug)]
enum GmeasureCommand {
    /// Closed-form quantities of a Markov g given by an edge-to-edge matrix.
    Oracle(OracleArgs),
    /// Transfer-operator identity and, with a measure, natural-extension masses.
    Check(GmCheckArgs),
}

#[derive(Args, Debug, Serialize)]
struct OracleArgs {
    #[arg(long)]
    graph: PathBuf,
    /// Edge-to-edge matrix CSV; defaults to the maximal-entropy chain.
    #[arg(long)]
    q: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct GmCheckArgs {
    file: PathBuf,
    #[arg(long, default_value_t = 1000)]
    points: usize,
    #[arg(long)]
    seed: u64,
    /// Test functions over word symbols (repeatable).
    #[arg(long = "phi")]
    phis: Vec<String>,
    #[arg(long)]
    measure: Option<PathBuf>,
    #[arg(long, default_value_t = 3)]
    max_len: usize,
}

#[derive(Subcommand, Debug)]
enum FixturesCommand {
    List,
    Emit(EmitArgs),
}

#[derive(Args, Debug, Serialize)]
struct EmitArgs {
    name: String,
    /// Writes to stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// example1 only.
    #[arg(long, default_value_t = 0.2)]
    alpha: f64,
    /// example1 only.
    #[arg(long, default_value_t = 0.3)]
    delta: f64,
}

const DEFAULT_RUELLE_PHIS: [&str; 3] = ["s0", "s0 == s1", "sin(1 + s0 + 2*s1 + 3*s2)"];

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            return CliError::usage(e.to_string()).emit();
        }
    }
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => e.emit(),
    }
}

fn run(cmd: Command) -> Result<u8, CliError> {
    match cmd {
        Command::Validate(a) => validate(&a),
        Command::Contraction(a) => contraction(&a),
        Command::Simulate(a) => simulate_cmd(&a),
        Command::Invariant(a) => invariant(&a),
        Command::Entropy(a) => entropy(&a),
        Command::Code(a) => code(&a),
        Command::Check(CheckCommand::Cylinders(a)) => cylinders(&a),
        Command::Check(CheckCommand::Conditional(a)) => conditional(&a),
        Command::Check(CheckCommand::Pushforward(a)) => pushforward(&a),
        Command::Check(CheckCommand::Decay(a)) => decay(&a),
        Command::Gmeasure(GmeasureCommand::Oracle(a)) => oracle(&a),
        Command::Gmeasure(GmeasureCommand::Check(a)) => gm_check(&a),
        Command::Fixtures(FixturesCommand::List) => {
            let list: Vec<Value> = fixtures::fixtures_catalog()
                .iter()
                .map(|(name, about)| json!({ "name": name, "description": about }))
                .collect();
            Report::new("fixtures-list", &json!({})).estimate("fixtures", list).print()?;
            Ok(0)
        }
        Command::Fixtures(FixturesCommand::Emit(a)) => emit(&a),
    }
}

fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

fn load_system(path: &Path) -> Result<System, CliError> {
    cio::parse_system(&read_text(path)?).map_err(|e| CliError::input(path, e))
}

fn load_measure(sys: &System, path: &Path) -> Result<Measure, CliError> {
    cio::read_measure_csv(sys, &read_text(path)?).map_err(|e| CliError::input(path, e))
}

fn write_with<F>(path: &Path, f: F) -> Result<(), CliError>
where
    F: FnOnce(&mut BufWriter<fs::File>) -> std::io::Result<()>,
{
    let file = fs::File::create(path).map_err(|e| CliError::io(path, e))?;
    let mut w = BufWriter::new(file);
    f(&mut w).and_then(|_| w.flush()).map_err(|e| CliError::io(path, e))
}

fn parse_start(sys: &System, spec: &str) -> Result<State, CliError> {
    let spec = spec.trim();
    if spec == "base" {
        return Ok(sys.base_point(0).clone());
    }
    if let Some(v) = spec.strip_prefix("base:") {
        let v: usize = v
            .parse()
            .ok()
            .filter(|v| (1..=sys.digraph().vertex_count()).contains(v))
            .ok_or_else(|| CliError::usage(format!("no vertex `{v}`")))?;
        return Ok(sys.base_point(v - 1).clone());
    }
    let point = if sys.is_word() {
        Point::Word(parse_word(spec).map_err(|e| CliError::usage(e.to_string()))?)
    } else {
        Point::Euclid(parse_floats(spec)?)
    };
    sys.vertex_of(&point).map_err(|e| CliError::usage(format!("start point: {e}")))?;
    Ok(point)
}

fn parse_floats(s: &str) -> Result<Vec<f64>, CliError> {
    s.split(',')
        .map(|c| c.trim().parse::<f64>().map_err(|_| CliError::usage(format!("`{c}` is not a number"))))
        .collect()
}

/// `a..b` (inclusive) or a comma-separated list.
fn parse_list(s: &str) -> Result<Vec<usize>, CliError> {
    let bad = || CliError::usage(format!("`{s}` is not a list like `4,12` or `5..40`"));
    if let Some((a, b)) = s.split_once("..") {
        let a: usize = a.trim().parse().map_err(|_| bad())?;
        let b: usize = b.trim().parse().map_err(|_| bad())?;
        if a > b {
            return Err(bad());
        }
        return Ok((a..=b).collect());
    }
    s.split(',').map(|c| c.trim().parse().map_err(|_| bad())).collect()
}

fn validate(a: &ValidateArgs) -> Result<u8, CliError> {
    let sys = load_system(&a.file)?;
    let rep = sys.validate(a.samples, a.seed.unwrap_or(0)).map_err(CliError::core)?;
    let valid = rep.is_valid();
    Report::new("validate", a)
        .estimate("report", &rep)
        .check("valid", valid, json!(null))
        .print()?;
    Ok(if valid { 0 } else { 1 })
}

fn contraction(a: &ContractionArgs) -> Result<u8, CliError> {
    let sys = load_system(&a.file)?;
    let rep = sys.estimate_contraction_rate(a.pairs, a.seed).map_err(CliError::core)?;
    let params = &sys.parts().params;
    let mut report = Report::new("contraction", a).estimate("report", &rep);
    if let Some(&stated) = params.get("unconfirmed_stated_rate") {
        let status = if rep.sup_estimate > stated { "refuted-by-sample" } else { "unconfirmed" };
        report = report.estimate(
            "notes",
            json!({
                "derived_rate_bound": params.get("derived_rate_bound"),
                "stated_rate": stated,
                "stated_rate_status": status,
            }),
        );
    }
    if let Some(claim) = rep.claimed_rate {
        report = report.check("within_claimed_rate", rep.sup_estimate <= claim + 1e-9, json!(1e-9));
    }
    let contractive = rep.sup_estimate < 1.0;
    report.check("contractive", contractive, json!(null)).print()?;
    Ok(if contractive { 0 } else { 1 })
}

fn simulate_cmd(a: &SimulateArgs) -> Result<u8, CliError> {
    let sys = load_system(&a.file)?;
    let x0 = parse_start(&sys, &a.start)?;
    let traj = simulate::simulate(&sys, &x0, a.steps, a.seed).map_err(CliError::core)?;
    write_with(&a.out, |w| cio::write_trajectory_csv(&sys, &traj, w))?;
    Report::new("simulate", a)
        .estimate("start", x0.to_string())
        .estimate("final_state", traj.states.last().map(ToString::to_string))
        .estimate("log_cylinder_rate", simulate::log_cylinder_rate(&traj))
        .print()?;
    Ok(0)
}

fn invariant(a: &InvariantArgs) -> Result<u8, CliError> {
    let sys = load_system(&a.file)?;
    let cfg = InvariantConfig {
        n_particles: a.particles,
        n_iters: a.iters,
        seed: a.seed,
        scheme: match a.scheme {
            SchemeArg::Split => Scheme::Split,
            SchemeArg::Resample => Scheme::Resample,
        },
    };
    let panel = operator::default_panel(&sys);
    let (mu, trace) = operator::estimate_invariant(&sys, &cfg, &panel).map_err(CliError::core)?;
    write_with(&a.out, |w| cio::write_measure_csv(&sys, &mu, w))?;
    if let Some(path) = &a.trace {
        write_with(path, |w| cio::write_trace_csv(&trace, w))?;
    }
    let integrals: serde_json::Map<String, Value> = trace
        .names
        .iter()
        .zip(trace.final_integrals())
        .map(|(n, v)| (n.clone(), json!(v)))
        .collect();
    Report::new("invariant", a)
        .estimate("particles", mu.len())
        .estimate("panel_integrals", integrals)
        .estimate("final_sup_change", trace.final_sup_change)
        .estimate("vertex_masses", mu.vertex_masses(sys.digraph().vertex_count()))
        .print()?;
    Ok(0)
}

fn entropy(a: &EntropyArgs) -> Result<u8, CliError> {
    let sys = load_system(&a.file)?;
    let mu = load_measure(&sys, &a.measure)?;
    let h = thermo::entropy(&sys, &mu).map_err(CliError::core)?;
    let mut report = Report::new("entropy", a).estimate("entropy", h);
    if let (Some(steps), Some(seed)) = (a.cross_steps, a.seed) {
        let x0 = parse_start(&sys, &a.start)?;
        let traj = simulate::simulate(&sys, &x0, steps, seed).map_err(CliError::core)?;
        let rate = simulate::log_cylinder_rate(&traj);
        let rel = if h != 0.0 { (rate + h).abs() / h.abs() } else { (rate + h).abs() };
        report = report
            .estimate("log_cylinder_rate", rate)
            .estimate("relative_gap", rel)
            .check("cross_estimate_agrees", rel <= 0.05, json!(0.05));
    }
    report.print()?;
    Ok(0)
}

fn code(a: &CodeArgs) -> Result<u8, CliError> {
    let sys = load_system(&a.file)?;
    let mu = a.measure.as_deref().map(|p| load_measure(&sys, p)).transpose()?;
    let dim = sys
        .dim()
        .filter(|d| *d == 1 || *d == 2)
        .ok_or_else(|| CliError::usage("code needs a Euclidean system of dimension 1 or 2"))?;
    let image = match &a.image {
        None => None,
        Some(_) => {
            let viewport = match &a.viewport {
                Some(v) => {
                    let c = parse_floats(v)?;
                    <[f64; 4]>::try_from(c).map_err(|_| CliError::usage("viewport needs four numbers"))?
                }
                None => default_viewport(&sys),
            };
            Some(ImageSpec {
                width: a.width,
                height: a.height,
                viewport,
            })
        }
    };
    let r = coding::render_attractor(&sys, mu.as_ref(), a.samples, a.depth, a.seed, image.as_ref())
        .map_err(CliError::core)?;
    write_with(&a.out, |w| cio::write_points_csv(&r, dim, w))?;
    if let (Some(path), Some(pgm)) = (&a.image, &r.image) {
        write_with(path, |w| w.write_all(&pgm.to_bytes()))?;
    }
    let mut report = Report::new("code", a).estimate("distinct_points", r.points.len());
    if let Some(rate) = sys.claimed_rate() {
        report = report.estimate("rate", rate);
    }
    report.print()?;
    Ok(0)
}

fn default_viewport(sys: &System) -> [f64; 4] {
    match sys.backend() {
        system::Backend::Euclid { working_box, .. } => {
            let [x0, x1] = working_box[0];
            let [y0, y1] = working_box.get(1).copied().unwrap_or([0.0, 1.0]);
            [x0, y0, x1, y1]
        }
        system::Backend::Word { .. } => [0.0, 0.0, 1.0, 1.0],
    }
}

fn cylinders(a: &CylindersArgs) -> Result<u8, CliError> {
    let sys = load_system(&a.file)?;
    let mu = load_measure(&sys, &a.measure)?;
    let rep = thermo::cylinder_consistency_check(&sys, &mu, a.max_len).map_err(CliError::core)?;
    Report::new("check-cylinders", a)
        .check("additivity", rep.additivity_max_residual <= a.tolerance, json!(a.tolerance))
        .estimate("report", &rep)
        .print()?;
    Ok(0)
}

fn conditional(a: &ConditionalArgs) -> Result<u8, CliError> {
    let sys = load_system(&a.file)?;
    let mu = load_measure(&sys, &a.measure)?;
    let reports = parse_list(&a.word_lens)?
        .into_iter()
        .map(|len| thermo::conditional_edge_check(&sys, &mu, len, a.words, a.seed, a.mass_floor))
        .collect::<cms_core::Result<Vec<_>>>()
        .map_err(CliError::core)?;
    let mean: Vec<f64> = reports.iter().map(|r| r.mean_deviation).collect();
    let decreasing = mean.windows(2).all(|w| w[1] < w[0]) || mean.iter().all(|m| *m == 0.0);
    Report::new("check-conditional", a)
        .estimate("reports", &reports)
        .check("mean_deviation_decreases", decreasing, json!(null))
        .print()?;
    Ok(0)
}

fn pushforward(a: &PushforwardArgs) -> Result<u8, CliError> {
    let sys = load_system(&a.file)?;
    let mu = load_measure(&sys, &a.measure)?;
    let panel = operator::default_panel(&sys);
    let reports = parse_list(&a.depths)?
        .into_iter()
        .map(|d| coding::pushforward_check(&sys, &mu, d, a.samples, a.seed, &panel))
        .collect::<cms_core::Result<Vec<_>>>()
        .map_err(CliError::core)?;
    let (first, last) = (reports.first(), reports.last());
    let mut report = Report::new("check-pushforward", a).estimate("reports", &reports);
    if let (Some(f), Some(l)) = (first, last) {
        if reports.len() > 1 {
            report = report
                .check("drift_decreases", l.paired_drift < f.paired_drift, json!(null))
                .check("distance_decreases", l.distance < f.distance, json!(null));
        }
    }
    report.print()?;
    Ok(0)
}

fn decay(a: &DecayArgs) -> Result<u8, CliError> {
    let sys = load_system(&a.file)?;
    let mu = load_measure(&sys, &a.measure)?;
    let depths = parse_list(&a.depths)?;
    let table = coding::coding_convergence_report(&sys, &mu, &depths, a.words, a.seed, sys.base_points())
        .map_err(CliError::core)?;
    let mut report = Report::new("check-decay", a).estimate("table", &table);
    if let (Some(slope), Some(log_rate)) = (table.fitted_slope, table.log_rate) {
        let bound = log_rate * (1.0 - a.slack);
        report = report.estimate("slope_bound", bound).check("slope_within_rate", slope <= bound, json!(a.slack));
    }
    if let (Some(c), Some(rate)) = (table.c_estimate, sys.claimed_rate()) {
        let n = *depths.last().expect("nonempty depth list");
        report = report.estimate("tail_bound_at_max_depth", coding::tail_bound(rate, c, n));
    }
    report.print()?;
    Ok(0)
}

fn oracle(a: &OracleArgs) -> Result<u8, CliError> {
    let g = cio::parse_graph(&read_text(&a.graph)?).map_err(|e| CliError::input(&a.graph, e))?;
    let max_q = thermo::max_entropy_q(&g).map_err(CliError::core)?;
    let q = match &a.q {
        Some(path) => cio::parse_matrix_csv(&read_text(path)?).map_err(|e| CliError::input(path, e))?,
        None => max_q.clone(),
    };
    let o = thermo::gmeasure_markov_oracle(&g, &q).map_err(CliError::core)?;
    let n = g.vertex_count();
    let mut adj = vec![vec![0.0; n]; n];
    for e in g.edges() {
        adj[e.source][e.target] += 1.0;
    }
    let log_perron = thermo::perron_root(&adj).ln();
    let max_entropy = q == max_q;
    let mut report = Report::new("gmeasure-oracle", a)
        .estimate("oracle", &o)
        .estimate("log_perron_root", log_perron)
        .estimate("maximal_entropy_chain", max_entropy)
        .check("equilibrium_residual", o.equilibrium_residual <= 1e-10, json!(1e-10));
    if max_entropy {
        report = report.check("entropy_matches_perron", (o.entropy - log_perron).abs() <= 1e-6, json!(1e-6));
    }
    report.print()?;
    Ok(0)
}

fn gm_check(a: &GmCheckArgs) -> Result<u8, CliError> {
    let sys = load_system(&a.file)?;
    let phis: Vec<String> = if a.phis.is_empty() {
        DEFAULT_RUELLE_PHIS.iter().map(|s| s.to_string()).collect()
    } else {
        a.phis.clone()
    };
    let ruelle = phis
        .iter()
        .map(|src| {
            let phi = Expression::parse(src).map_err(|e| CliError::usage(format!("phi `{src}`: {e}")))?;
            thermo::ruelle_identity_check(&sys, &phi, a.points, a.seed).map_err(CliError::core)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let worst = ruelle.iter().map(|r| r.max_deviation).fold(0.0, f64::max);
    let mut report = Report::new("gmeasure-check", a)
        .estimate("ruelle", &ruelle)
        .check("ruelle_identity", worst <= 1e-12, json!(1e-12));
    if let Some(path) = &a.measure {
        let mu = load_measure(&sys, path)?;
        let ne = thermo::natural_extension_check(&sys, &mu, a.max_len).map_err(CliError::core)?;
        report = report.estimate("natural_extension", &ne);
    }
    report.print()?;
    Ok(0)
}

fn emit(a: &EmitArgs) -> Result<u8, CliError> {
    let sys: System = if a.name == "example1" {
        fixtures::example1(a.alpha, a.delta)
    } else {
        fixtures::fixture(&a.name)
    }
    .map_err(|e| CliError::usage(e.to_string()))?;
    let text = cio::emit_system(&sys).map_err(CliError::core)?;
    match &a.out {
        Some(path) => fs::write(path, text).map_err(|e| CliError::io(path, e))?,
        None => print!("{text}"),
    }
    Ok(0)
}
