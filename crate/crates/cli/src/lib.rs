//! Command-line front end: every subcommand is a thin composition of
//! `mq_anneal` library calls, returning its output text and exit code so it
//! can be exercised without spawning a process.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 unsatisfied (not a solution, or
//! the iterative search ended without one), 3 invalid input, 4 resource or
//! size limit exceeded.

pub mod config;

use std::fmt::Write as _;
use std::ops::RangeInclusive;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use mq_anneal::anneal::{sample, AnnealParams};
use mq_anneal::embed::{
    embed_direct, embed_penalty, embed_truncated_with, estimate_truncated_qubits, scaling_report, Embedding, Method,
    VarRole,
};
use mq_anneal::iterfix::{iterate, IterParams, Outcome};
use mq_anneal::mq::{format_system, generate_planted, parse_system, Assignment, MqSystem};
use mq_anneal::quadratize::Weighting;
use mq_anneal::qubo::{read_qubo, write_qubo};
use serde_json::json;

pub use config::RunConfig;

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_UNSOLVED: i32 = 2;
pub const EXIT_VALIDATION: i32 = 3;
pub const EXIT_RESOURCE: i32 = 4;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] mq_anneal::Error),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid configuration: {0}")]
    Config(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use mq_anneal::Error as E;
        match self {
            CliError::Io { .. } | CliError::Core(E::Io(_)) => EXIT_IO,
            CliError::Core(E::LimitExceeded { .. } | E::Resource(_)) => EXIT_RESOURCE,
            CliError::Core(_) | CliError::Config(_) => EXIT_VALIDATION,
        }
    }
}

/// Text to print and the process exit code.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Output {
    pub text: String,
    pub code: i32,
}

impl Output {
    fn ok(text: String) -> Self {
        Output { text, code: EXIT_OK }
    }
}

#[derive(Debug, Parser)]
#[command(name = "mq-anneal", version, about = "Encode Boolean MQ systems as QUBOs and solve them by annealing")]
pub struct Cli {
    /// TOML file with default settings; flags override it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Worker threads for the parallel loops.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Emit JSON instead of text.
    #[arg(long, global = true)]
    pub json: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a random instance with a planted solution.
    Generate {
        #[arg(short, long)]
        n: usize,
        #[arg(short, long)]
        m: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Instance path; the solution goes to `<out>.solution`.
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Build a QUBO from an instance file.
    Embed {
        instance: PathBuf,
        #[command(flatten)]
        embed: EmbedArgs,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Sample a QUBO file with simulated annealing.
    Solve {
        qubo: PathBuf,
        #[command(flatten)]
        anneal: AnnealArgs,
        /// Records shown in text mode.
        #[arg(long, default_value_t = 20)]
        top: usize,
    },
    /// Run the iterative fixing search.
    ///
    /// Uses the QUBO file when given, otherwise embeds the instance in-process.
    Iterate {
        qubo: Option<PathBuf>,
        /// Instance used to verify solutions (and to embed without a QUBO file).
        #[arg(long)]
        instance: PathBuf,
        #[command(flatten)]
        embed: EmbedArgs,
        #[command(flatten)]
        anneal: AnnealArgs,
        #[arg(long)]
        consensus: Option<usize>,
        #[arg(long)]
        max_iterations: Option<usize>,
        #[arg(long)]
        patience: Option<usize>,
    },
    /// Logical-qubit scaling table for the direct and truncated embeddings.
    Report {
        /// Variable counts, `a..b` (inclusive) or a single value.
        #[arg(long, default_value = "4..40")]
        n: String,
        /// Truncation lengths, `a..b` or a comma-separated list.
        #[arg(long, default_value = "4..8")]
        k: String,
    },
    /// Check an assignment (bitstring, x1 first) against an instance.
    Verify { instance: PathBuf, assignment: String },
}

#[derive(Debug, Default, Args)]
pub struct EmbedArgs {
    /// direct, truncated or penalty.
    #[arg(long)]
    pub method: Option<String>,
    /// Truncation length for the truncated embedding.
    #[arg(long)]
    pub k: Option<usize>,
    /// per-term or delta penalty scaling.
    #[arg(long)]
    pub weighting: Option<String>,
}

#[derive(Debug, Default, Args)]
pub struct AnnealArgs {
    #[arg(long)]
    pub reads: Option<usize>,
    #[arg(long)]
    pub sweeps: Option<usize>,
    #[arg(long)]
    pub beta_start: Option<f64>,
    #[arg(long)]
    pub beta_end: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
}

impl AnnealArgs {
    fn apply(&self, mut p: AnnealParams) -> AnnealParams {
        p.reads = self.reads.unwrap_or(p.reads);
        p.sweeps = self.sweeps.unwrap_or(p.sweeps);
        p.beta_start = self.beta_start.unwrap_or(p.beta_start);
        p.beta_end = self.beta_end.unwrap_or(p.beta_end);
        p.seed = self.seed.unwrap_or(p.seed);
        p
    }
}

/// Embedding choice after merging flags over the configuration.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EmbedChoice {
    pub method: Method,
    pub k: usize,
    pub weighting: Weighting,
}

impl EmbedChoice {
    fn resolve(args: &EmbedArgs, config: &RunConfig) -> Result<Self, CliError> {
        let method = args.method.as_deref().unwrap_or(&config.embed.method).parse()?;
        let weighting = match &args.weighting {
            Some(w) => w.parse()?,
            None => config.embed.weighting,
        };
        Ok(EmbedChoice {
            method,
            k: args.k.unwrap_or(config.embed.k),
            weighting,
        })
    }
}

/// Parses arguments, applies the configuration and runs the command.
pub fn run(cli: Cli) -> Result<Output, CliError> {
    let mut config = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    config.json |= cli.json;
    if cli.threads.is_some() {
        config.threads = cli.threads;
    }
    config.validate()?;
    match config.threads {
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .map_err(|e| CliError::Config(e.to_string()))?;
            pool.install(|| dispatch(&cli.command, &config))
        }
        None => dispatch(&cli.command, &config),
    }
}

fn dispatch(command: &Command, config: &RunConfig) -> Result<Output, CliError> {
    let json = config.json;
    match command {
        Command::Generate { n, m, seed, out } => cmd_generate(*n, *m, *seed, out, json),
        Command::Embed { instance, embed, out } => {
            let choice = EmbedChoice::resolve(embed, config)?;
            cmd_embed(instance, choice, out, json)
        }
        Command::Solve { qubo, anneal, top } => cmd_solve(qubo, &anneal.apply(config.anneal.clone()), *top, json),
        Command::Iterate {
            qubo,
            instance,
            embed,
            anneal,
            consensus,
            max_iterations,
            patience,
        } => {
            let mut params = config.iter_params();
            params.anneal = anneal.apply(params.anneal);
            params.consensus = consensus.unwrap_or(params.consensus);
            params.max_iterations = max_iterations.unwrap_or(params.max_iterations);
            params.patience = patience.unwrap_or(params.patience);
            let source = match qubo {
                Some(path) => Source::File(path),
                None => Source::Embed(EmbedChoice::resolve(embed, config)?),
            };
            cmd_iterate(instance, source, &params, json)
        }
        Command::Report { n, k } => cmd_report(parse_range(n)?, &parse_list(k)?, json),
        Command::Verify { instance, assignment } => cmd_verify(instance, assignment, json),
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn load_instance(path: &Path) -> Result<MqSystem, CliError> {
    Ok(parse_system(&read(path)?)?)
}

fn sidecar(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".solution");
    PathBuf::from(s)
}

pub fn cmd_generate(n: usize, m: usize, seed: u64, out: &Path, json: bool) -> Result<Output, CliError> {
    let (system, planted) = generate_planted(n, m, seed)?;
    let solution_path = sidecar(out);
    write(out, &format_system(&system))?;
    write(&solution_path, &format!("{planted}\n"))?;
    let text = if json {
        json!({
            "instance": out.display().to_string(),
            "solution_file": solution_path.display().to_string(),
            "n": n,
            "m": m,
            "seed": seed,
            "solution": planted.to_bitstring(),
        })
        .to_string()
            + "\n"
    } else {
        format!(
            "wrote {} ({n} variables, {m} equations)\nplanted solution {planted} in {}\n",
            out.display(),
            solution_path.display()
        )
    };
    Ok(Output::ok(text))
}

/// Builds the chosen embedding in-process.
pub fn build_embedding(system: &MqSystem, choice: EmbedChoice) -> Result<Embedding, CliError> {
    Ok(match choice.method {
        Method::Direct => embed_direct(system, choice.weighting)?,
        Method::Truncated => embed_truncated_with(system, choice.k, choice.weighting)?,
        Method::Penalty => embed_penalty(system)?,
    })
}

pub fn cmd_embed(instance: &Path, choice: EmbedChoice, out: &Path, json: bool) -> Result<Output, CliError> {
    let system = load_instance(instance)?;
    let e = build_embedding(&system, choice)?;
    write(out, &write_qubo(&e.qubo, &e.registry))?;
    let estimate = match choice.method {
        Method::Truncated => Some(estimate_truncated_qubits(
            system.n_vars(),
            system.num_equations(),
            &system.term_counts(),
            choice.k,
        )?),
        _ => None,
    };
    let outputs = e.count_roles(|r| matches!(r, VarRole::OutputAncilla { .. }));
    let text = if json {
        let mut v = json!({
            "qubo": out.display().to_string(),
            "method": choice.method.to_string(),
            "logical_qubits": e.num_vars(),
            "original": e.n_original,
            "ancillas": e.num_ancillas(),
            "output_ancillas": outputs,
            "max_coefficient": e.qubo.max_coefficient(),
            "quadratic_terms": e.qubo.quadratic().len(),
        });
        if let Some(est) = &estimate {
            v["k"] = json!(choice.k);
            v["formula_estimate"] = json!(est.formula.to_string());
            v["builder_bound"] = json!(est.builder_bound);
        }
        v.to_string() + "\n"
    } else {
        let mut t = format!(
            "method {}\nlogical qubits {} ({} original, {} ancillas)\nmax coefficient {}\nwrote {}\n",
            choice.method,
            e.num_vars(),
            e.n_original,
            e.num_ancillas(),
            e.qubo.max_coefficient(),
            out.display()
        );
        if let Some(est) = &estimate {
            let _ = writeln!(t, "formula estimate (k = {}) {}, rounded-up bound {}", choice.k, est.formula, est.builder_bound);
        }
        t
    };
    Ok(Output::ok(text))
}

fn load_embedding(path: &Path) -> Result<Embedding, CliError> {
    let (qubo, registry) = read_qubo(&read(path)?)?;
    Ok(Embedding::from_parts(qubo, registry, None)?)
}

pub fn cmd_solve(qubo_path: &Path, params: &AnnealParams, top: usize, json: bool) -> Result<Output, CliError> {
    let e = load_embedding(qubo_path)?;
    let ss = sample(&e.qubo, params)?;
    if json {
        return Ok(Output::ok(ss.to_json_lines()));
    }
    let best = ss.best().expect("at least one read");
    let mut t = format!(
        "reads {}, distinct {}, best energy {}, median {}\n",
        ss.num_reads(),
        ss.len(),
        best.energy,
        ss.quantile(0.5).unwrap_or(best.energy)
    );
    if e.n_original < e.num_vars() {
        let _ = writeln!(t, "best projected onto originals {}", e.project(&best.assignment));
    }
    t.push_str("energy\tcount\tassignment\n");
    for r in ss.records().iter().take(top) {
        let _ = writeln!(t, "{}\t{}\t{}", r.energy, r.multiplicity, r.assignment);
    }
    Ok(Output::ok(t))
}

/// Where [`cmd_iterate`] gets its QUBO from.
#[derive(Clone, Debug)]
pub enum Source<'a> {
    File(&'a Path),
    Embed(EmbedChoice),
}

pub fn cmd_iterate(instance: &Path, source: Source<'_>, params: &IterParams, json: bool) -> Result<Output, CliError> {
    let system = load_instance(instance)?;
    let e = match source {
        Source::File(path) => load_embedding(path)?,
        Source::Embed(choice) => build_embedding(&system, choice)?,
    };
    let trace = iterate(&e, &system, params)?;
    let code = match trace.outcome {
        Outcome::Solved { .. } => EXIT_OK,
        _ => EXIT_UNSOLVED,
    };
    let text = if json {
        trace.to_json().to_string() + "\n"
    } else {
        let mut t = String::new();
        for r in &trace.rounds {
            let _ = writeln!(
                t,
                "round {}: fixed {}, free {}, L {}, best {}, median {}, {:?}",
                r.iteration, r.fixed, r.free_vars, r.consensus, r.best_energy, r.energies.median, r.step
            );
        }
        match &trace.outcome {
            Outcome::Solved { solution } => {
                let _ = writeln!(t, "solved {solution} (verified against the instance)");
            }
            Outcome::Excluded => t.push_str("excluded: the ground state appears to have been fixed away\n"),
            Outcome::Exhausted => t.push_str("exhausted without reaching zero energy\n"),
        }
        t
    };
    Ok(Output { text, code })
}

pub fn cmd_report(n: RangeInclusive<u32>, k: &[usize], json: bool) -> Result<Output, CliError> {
    let report = scaling_report(n, k)?;
    Ok(Output::ok(if json {
        report.to_json().to_string() + "\n"
    } else {
        report.to_tsv()
    }))
}

pub fn cmd_verify(instance: &Path, assignment: &str, json: bool) -> Result<Output, CliError> {
    let system = load_instance(instance)?;
    let a: Assignment = assignment.parse()?;
    let residual = system.eval(&a)?;
    let ok = residual.iter().all(|&b| !b);
    let bits: String = residual.iter().map(|&b| if b { '1' } else { '0' }).collect();
    let text = if json {
        json!({ "solution": ok, "residual": bits }).to_string() + "\n"
    } else if ok {
        "solution\n".to_string()
    } else {
        format!("not a solution: residual {bits}\n")
    };
    Ok(Output {
        text,
        code: if ok { EXIT_OK } else { EXIT_UNSOLVED },
    })
}

/// `a..b` (inclusive) or a single number.
pub fn parse_range(s: &str) -> Result<RangeInclusive<u32>, CliError> {
    let num = |t: &str| {
        t.trim()
            .parse::<u32>()
            .map_err(|_| CliError::Config(format!("invalid number {t:?} in range {s:?}")))
    };
    match s.split_once("..") {
        Some((a, b)) => {
            let (a, b) = (num(a)?, num(b.trim_start_matches('='))?);
            if a > b {
                return Err(CliError::Config(format!("empty range {s:?}")));
            }
            Ok(a..=b)
        }
        None => {
            let v = num(s)?;
            Ok(v..=v)
        }
    }
}

/// `a..b` (inclusive) or `a,b,c`.
pub fn parse_list(s: &str) -> Result<Vec<usize>, CliError> {
    if s.contains("..") {
        return Ok(parse_range(s)?.map(|v| v as usize).collect());
    }
    s.split(',')
        .map(|t| {
            t.trim()
                .parse()
                .map_err(|_| CliError::Config(format!("invalid number {t:?} in list {s:?}")))
        })
        .collect()
}

/// Output of [`run`], with errors turned into a message and exit code.
pub fn run_to_output(cli: Cli) -> (Output, Option<String>) {
    match run(cli) {
        Ok(out) => (out, None),
        Err(e) => (
            Output {
                text: String::new(),
                code: e.exit_code(),
            },
            Some(format!("error: {e}")),
        ),
    }
}

/// Parses `args` (program name first) and runs them.
pub fn run_args<I, T>(args: I) -> (Output, Option<String>)
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run_to_output(cli),
        Err(e) => {
            let code = if e.use_stderr() { EXIT_VALIDATION } else { EXIT_OK };
            let text = if e.use_stderr() { String::new() } else { e.to_string() };
            let message = e.use_stderr().then(|| e.to_string());
            (Output { text, code }, message)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges_and_lists() {
        assert_eq!(parse_range("4..40").unwrap(), 4..=40);
        assert_eq!(parse_range("4..=6").unwrap(), 4..=6);
        assert_eq!(parse_range("7").unwrap(), 7..=7);
        assert!(parse_range("9..3").is_err());
        assert_eq!(parse_list("4,6,8").unwrap(), vec![4, 6, 8]);
        assert_eq!(parse_list("4..6").unwrap(), vec![4, 5, 6]);
        assert!(parse_list("4,x").is_err());
    }

    #[test]
    fn exit_codes() {
        use mq_anneal::Error as E;
        assert_eq!(CliError::Core(E::Invalid("x".into())).exit_code(), EXIT_VALIDATION);
        assert_eq!(CliError::Core(E::Resource("x".into())).exit_code(), EXIT_RESOURCE);
        let limit = E::LimitExceeded { what: "x", requested: 2, limit: 1 };
        assert_eq!(CliError::Core(limit).exit_code(), EXIT_RESOURCE);
        let io = std::io::Error::other("x");
        assert_eq!(CliError::Io { path: "p".into(), source: io }.exit_code(), EXIT_IO);
    }
}
