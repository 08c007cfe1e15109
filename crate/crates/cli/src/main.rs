//! `heraldsim` command-line interface.
//!
//! Exit codes: 0 success, 2 invalid input, 3 numerical or physical failure.

mod format;
mod svg;

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use heraldsim::lhaf::cost::{op_count_fock, op_count_generic, op_count_mixed, op_count_pure, PureVariant};
use heraldsim::lhaf::{lhaf_repeated, lhaf_spm, MAX_DIMENSION};
use heraldsim::schemes::{self, CircuitSpec, MeritReport, RunOptions, CUBIC_TARGET_A};
use heraldsim::{CMatrix, CVector, Complex64, LoopMatrixSpec};
use serde::{Deserialize, Serialize};

/// Largest expanded dimension accepted by `lhaf --oracle`.
const ORACLE_MAX: usize = 22;

#[derive(Debug)]
enum CliError {
    Input(String),
    Numerical(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl From<heraldsim::Error> for CliError {
    fn from(e: heraldsim::Error) -> Self {
        if e.is_numerical() {
            CliError::Numerical(e.to_string())
        } else {
            CliError::Input(e.to_string())
        }
    }
}

type CliResult<T> = Result<T, CliError>;

fn input<E: std::fmt::Display>(context: &str) -> impl FnOnce(E) -> CliError + '_ {
    move |e| CliError::Input(format!("{context}: {e}"))
}

#[derive(Parser)]
#[command(name = "heraldsim", version, about = "Heralded non-Gaussian state preparation under photon loss")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a loop hafnian with repeated rows/columns from a JSON file.
    Lhaf(LhafArgs),
    /// Herald and score one circuit.
    Run(RunArgs),
    /// Herald and score a circuit over a grid of (eta1, eta2).
    Sweep(SweepArgs),
    /// Operation-count estimates for one Fock matrix element.
    Cost(CostArgs),
}

#[derive(Args)]
struct LhafArgs {
    /// JSON file with "base" (rows of [re, im] pairs), optional "loops" and "reps".
    file: PathBuf,
    /// Evaluate by explicit matching enumeration instead.
    #[arg(long)]
    oracle: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Preset {
    Fock,
    Cat,
    Cubic,
}

#[derive(Clone, Copy, ValueEnum, PartialEq)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct CircuitArgs {
    /// Circuit-spec JSON file (alternative to --preset).
    #[arg(conflicts_with = "preset")]
    file: Option<PathBuf>,
    /// Built-in circuit.
    #[arg(long, value_enum)]
    preset: Option<Preset>,
    /// Two-mode squeezing of the fock preset.
    #[arg(long, default_value_t = 1.0)]
    r: f64,
    /// Detected photon number of the fock and cat presets.
    #[arg(long, default_value_t = 1)]
    m: usize,
    /// Single-mode squeezing of the cat preset.
    #[arg(long, default_value_t = 0.5)]
    z: f64,
    /// Target parameter of the cubic preset.
    #[arg(long, default_value_t = CUBIC_TARGET_A)]
    a: f64,
}

#[derive(Args)]
struct Numerics {
    /// Relative tolerance on the heralding probability captured by the cutoff.
    #[arg(long, default_value_t = 1e-6)]
    rel_tol: f64,
    /// Largest Fock cutoff tried.
    #[arg(long, default_value_t = 512)]
    d_max: usize,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    circuit: CircuitArgs,
    #[command(flatten)]
    numerics: Numerics,
    #[arg(long)]
    eta1: Option<f64>,
    #[arg(long)]
    eta2: Option<f64>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    /// Write to this file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    circuit: CircuitArgs,
    #[command(flatten)]
    numerics: Numerics,
    /// Scalar or inclusive range "start:stop:count".
    #[arg(long, default_value = "1")]
    eta1: String,
    #[arg(long, default_value = "1")]
    eta2: String,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write PREFIX-p.svg, PREFIX-F.svg and PREFIX-wln.svg heatmaps.
    #[arg(long, value_name = "PREFIX")]
    svg: Option<PathBuf>,
    /// Worker threads.
    #[arg(long, env = "HERALDSIM_THREADS", value_parser = clap::value_parser!(u32).range(1..))]
    threads: Option<u32>,
    /// Write 0 in the seconds column so output is byte-reproducible.
    #[arg(long)]
    no_timing: bool,
}

#[derive(Args)]
struct CostArgs {
    /// Photon numbers n_s, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    n: Vec<u64>,
    /// Photon numbers m_s (defaults to n).
    #[arg(long, value_delimiter = ',')]
    m: Vec<u64>,
    /// Fock cutoff for the brute-force comparison.
    #[arg(long)]
    d: Option<u64>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Lhaf(a) => cmd_lhaf(a),
        Command::Run(a) => cmd_run(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Cost(a) => cmd_cost(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let (CliError::Input(msg) | CliError::Numerical(msg)) = &e;
            eprintln!("heraldsim: {msg}");
            ExitCode::from(e.code())
        }
    }
}

fn emit(out: Option<&Path>, text: &str) -> CliResult<()> {
    match out {
        Some(path) => fs::write(path, text).map_err(input(&format!("cannot write {}", path.display()))),
        None => io::stdout().write_all(text.as_bytes()).map_err(input("cannot write to stdout")),
    }
}

/// A complex number written either as `[re, im]` or as a bare real.
#[derive(Deserialize)]
#[serde(untagged)]
enum Num {
    Pair([f64; 2]),
    Real(f64),
}

impl From<&Num> for Complex64 {
    fn from(n: &Num) -> Self {
        match *n {
            Num::Pair([re, im]) => Complex64::new(re, im),
            Num::Real(re) => Complex64::new(re, 0.0),
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct LhafFile {
    base: Vec<Vec<Num>>,
    loops: Option<Vec<Num>>,
    reps: Option<Vec<usize>>,
}

fn cmd_lhaf(args: LhafArgs) -> CliResult<()> {
    let text = fs::read_to_string(&args.file).map_err(input(&format!("cannot read {}", args.file.display())))?;
    let file: LhafFile = serde_json::from_str(&text).map_err(input("malformed matrix file"))?;
    let n = file.base.len();
    if let Some(row) = file.base.iter().position(|r| r.len() != n) {
        return Err(CliError::Input(format!(
            "base row {} has {} entries, expected {n}",
            row + 1,
            file.base[row].len()
        )));
    }
    let base = CMatrix::from_fn(n, n, |i, j| (&file.base[i][j]).into());
    let loops = match &file.loops {
        Some(l) => CVector::from_iterator(l.len(), l.iter().map(Complex64::from)),
        None => base.diagonal(),
    };
    let reps = file.reps.unwrap_or_else(|| vec![1; n]);
    let spec = LoopMatrixSpec::new(base, loops, reps)?;
    let d = spec.dimension();
    let value = if args.oracle {
        if d > ORACLE_MAX {
            return Err(CliError::Input(format!("--oracle is limited to D ≤ {ORACLE_MAX}, got {d}")));
        }
        lhaf_spm(&spec.expand())?
    } else {
        if d > MAX_DIMENSION {
            return Err(CliError::Numerical(format!("D = {d} exceeds the supported {MAX_DIMENSION}")));
        }
        lhaf_repeated(&spec)
    };
    if !value.re.is_finite() || !value.im.is_finite() {
        return Err(CliError::Numerical("loop hafnian overflowed".into()));
    }
    println!("{}", format::complex(value, 15));
    Ok(())
}

impl CircuitArgs {
    fn spec(&self) -> CliResult<CircuitSpec> {
        match (&self.file, self.preset) {
            (Some(path), _) => {
                let text = fs::read_to_string(path).map_err(input(&format!("cannot read {}", path.display())))?;
                serde_json::from_str(&text).map_err(input("invalid circuit spec"))
            }
            (None, Some(Preset::Fock)) => Ok(schemes::scheme_fock(self.r, 1.0, 1.0, self.m)),
            (None, Some(Preset::Cat)) => Ok(schemes::scheme_cat(self.z, 1.0, 1.0, self.m)),
            (None, Some(Preset::Cubic)) => Ok(schemes::scheme_cubic(self.a, 1.0, 1.0)),
            (None, None) => Err(CliError::Input("give a circuit file or --preset".into())),
        }
    }

    fn loss_mapping(&self) -> Option<&'static str> {
        if self.file.is_some() {
            return None;
        }
        self.preset.map(|p| match p {
            Preset::Fock => "eta1: detected mode 1; eta2: heralded mode 2",
            Preset::Cat => {
                "eta1: squeezed mode 1 before the beamsplitter; eta2: output mode 1 after it; detected mode 2 lossless"
            }
            Preset::Cubic => "eta2: input of output mode 3; eta1: detected modes 1 and 2 before detection",
        })
    }
}

impl Numerics {
    fn options(&self, threads: Option<u32>) -> CliResult<RunOptions> {
        if !(0.0..1.0).contains(&self.rel_tol) || self.rel_tol == 0.0 {
            return Err(CliError::Input(format!("--rel-tol must lie in (0, 1), got {}", self.rel_tol)));
        }
        if self.d_max == 0 {
            return Err(CliError::Input("--d-max must be positive".into()));
        }
        Ok(RunOptions {
            rel_tol: self.rel_tol,
            d_max: self.d_max,
            threads: threads.map(|t| t as usize),
            ..RunOptions::default()
        })
    }
}

const CSV_HEADER: &str = "eta1,eta2,p,F,wln,d_used,seconds";

fn csv_row(r: &MeritReport, timing: bool) -> String {
    let f = r.fidelity.map(|f| format::sig(f, 12)).unwrap_or_default();
    let secs = if timing { format::sig(r.wall_time, 12) } else { "0".into() };
    format!(
        "{},{},{},{},{},{},{}",
        format::sig(r.eta1, 12),
        format::sig(r.eta2, 12),
        format::sig(r.probability, 12),
        f,
        format::sig(r.wln, 12),
        r.cutoff_used,
        secs
    )
}

#[derive(Serialize)]
struct RunOutput<'a> {
    #[serde(skip_serializing_if = "Option::is_none")]
    loss_mapping: Option<&'a str>,
    #[serde(flatten)]
    report: &'a MeritReport,
}

fn cmd_run(args: RunArgs) -> CliResult<()> {
    let mut spec = args.circuit.spec()?;
    spec = spec.with_etas(args.eta1.unwrap_or(spec.eta1), args.eta2.unwrap_or(spec.eta2));
    spec.validate()?;
    let opts = args.numerics.options(None)?;
    let report = schemes::run(&spec, &opts)?;
    let text = match args.format {
        Format::Json => {
            let out = RunOutput { loss_mapping: args.circuit.loss_mapping(), report: &report };
            serde_json::to_string_pretty(&out).expect("report serializes") + "\n"
        }
        Format::Csv => format!("{CSV_HEADER}\n{}\n", csv_row(&report, true)),
    };
    emit(args.out.as_deref(), &text)
}

/// `"x"` or the inclusive linear range `"start:stop:count"`.
fn parse_grid(text: &str) -> CliResult<Vec<f64>> {
    let bad = || CliError::Input(format!("invalid grid {text:?}; use a number or start:stop:count"));
    let parts: Vec<&str> = text.split(':').collect();
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| bad());
    match parts.as_slice() {
        [x] => Ok(vec![num(x)?]),
        [a, b, n] => {
            let (a, b) = (num(a)?, num(b)?);
            let n: usize = n.trim().parse().map_err(|_| bad())?;
            match n {
                0 => Err(bad()),
                1 => Ok(vec![a]),
                _ => Ok((0..n).map(|k| if k == n - 1 { b } else { a + (b - a) * k as f64 / (n - 1) as f64 }).collect()),
            }
        }
        _ => Err(bad()),
    }
}

fn cmd_sweep(args: SweepArgs) -> CliResult<()> {
    let spec = args.circuit.spec()?;
    let eta1 = parse_grid(&args.eta1)?;
    let eta2 = parse_grid(&args.eta2)?;
    let opts = args.numerics.options(args.threads)?;
    if let Some(mapping) = args.circuit.loss_mapping() {
        eprintln!("loss mapping: {mapping}");
    }
    // fail on an unwritable destination before doing the work
    if let Some(path) = &args.out {
        fs::write(path, "").map_err(input(&format!("cannot write {}", path.display())))?;
    }
    let rows = schemes::sweep(&spec, &eta1, &eta2, &opts)?;
    let text = match args.format {
        Format::Csv => {
            let mut s = String::from(CSV_HEADER);
            s.push('\n');
            for r in &rows {
                s.push_str(&csv_row(r, !args.no_timing));
                s.push('\n');
            }
            s
        }
        Format::Json => {
            let rows: Vec<MeritReport> = rows
                .iter()
                .map(|r| MeritReport { wall_time: if args.no_timing { 0.0 } else { r.wall_time }, ..r.clone() })
                .collect();
            serde_json::to_string_pretty(&rows).expect("reports serialize") + "\n"
        }
    };
    emit(args.out.as_deref(), &text)?;
    if let Some(prefix) = &args.svg {
        type Column = (&'static str, fn(&MeritReport) -> f64);
        let columns: [Column; 3] =
            [("p", |r| r.probability), ("F", |r| r.fidelity.unwrap_or(f64::NAN)), ("wln", |r| r.wln)];
        for (name, get) in columns {
            let values: Vec<Vec<f64>> = rows.chunks(eta2.len()).map(|c| c.iter().map(get).collect()).collect();
            let path = PathBuf::from(format!("{}-{name}.svg", prefix.display()));
            fs::write(&path, svg::heatmap(name, &eta1, &eta2, &values))
                .map_err(input(&format!("cannot write {}", path.display())))?;
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct CostRow {
    name: String,
    value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    exact: Option<String>,
}

fn cmd_cost(args: CostArgs) -> CliResult<()> {
    let m = if args.m.is_empty() { args.n.clone() } else { args.m.clone() };
    let mixed = op_count_mixed(&args.n, &m)?;
    let generic = op_count_generic(&args.n, &m)?;
    let l = args.n.len() as u64;
    let mut rows = vec![
        CostRow { name: "G".into(), value: mixed.geometric_mean, exact: None },
        CostRow { name: "A".into(), value: mixed.arithmetic_mean, exact: None },
        CostRow { name: "sqrt2^(A-1)".into(), value: mixed.generic_base(), exact: None },
        CostRow { name: "t".into(), value: mixed.steps, exact: mixed.exact_steps.map(|v| v.to_string()) },
        CostRow { name: "t'".into(), value: generic.steps, exact: generic.exact_steps.map(|v| v.to_string()) },
    ];
    if let Some(d) = args.d {
        let fock = op_count_fock(l, d)?;
        rows.push(CostRow { name: "d".into(), value: d as f64, exact: Some(d.to_string()) });
        rows.push(CostRow { name: "t''".into(), value: fock.steps, exact: fock.exact_steps.map(|v| v.to_string()) });
    }
    if args.m.is_empty() || args.m == args.n {
        for (name, variant) in [("t_pure", PureVariant::Tailored), ("t'_pure", PureVariant::Generic)] {
            let e = op_count_pure(&args.n, variant, None)?;
            rows.push(CostRow { name: name.into(), value: e.steps, exact: e.exact_steps.map(|v| v.to_string()) });
        }
        if let Some(d) = args.d {
            let e = op_count_pure(&args.n, PureVariant::Fock, Some(d))?;
            rows.push(CostRow { name: "t''_pure".into(), value: e.steps, exact: e.exact_steps.map(|v| v.to_string()) });
        }
    }
    let text = match args.format {
        Some(Format::Json) => serde_json::to_string_pretty(&rows).expect("rows serialize") + "\n",
        Some(Format::Csv) => {
            let mut s = String::from("quantity,value\n");
            for r in &rows {
                s.push_str(&format!("{},{}\n", r.name, r.exact.clone().unwrap_or_else(|| format::sig(r.value, 12))));
            }
            s
        }
        None => {
            let mut s = String::new();
            for r in &rows {
                let v = match &r.exact {
                    Some(e) => e.clone(),
                    None if r.value.abs() < 1e6 => format!("{:.2}", r.value),
                    None => format::sig(r.value, 6),
                };
                s.push_str(&format!("{:<12} {v}\n", r.name));
            }
            s
        }
    };
    emit(None, &text)
}
