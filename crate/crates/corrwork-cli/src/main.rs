//! `corrwork`: run the correlated-gas heat-to-work protocols from the
//! command line, sweep the correlation parameter, and emit machine-readable
//! reports.
//!
//! Exit codes: 0 success, 1 usage or runtime error, 2 information-work
//! equivalence failure.

mod output;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use corrwork::states::{
    bell, classical_full, classical_partial, defect_vs_equilibrium, entropy_defect,
    partial_entangled, von_neumann_entropy, BellKind, CorrelationParam, Ensemble, TwoQubitState,
    Which,
};
use corrwork::thermo::GasSpec;
use corrwork::{
    protocol_classical_full, protocol_classical_partial, protocol_quantum_full,
    protocol_quantum_partial, run_protocol_with_tol, verify_equivalence, ProtocolResult,
    ProtocolStep,
};
use output::{emit, fmt9, sig9};
use serde::Serialize;
use std::collections::BTreeMap;
use std::f64::consts::LN_2;
use std::path::PathBuf;
use std::process::ExitCode;

const SCHEMA_VERSION: u32 = 1;

#[derive(Parser)]
#[command(
    name = "corrwork",
    version,
    about = "Heat-to-work conversion protocols for correlated two-qubit gases",
    after_help = "The environment variable CORRWORK_SEED is reserved for future use; \
                  no component of this version is stochastic and the variable is ignored."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one canonical protocol; writes the ledger and equivalence report.
    Run(RunArgs),
    /// Tabulate work, defect, and displacement over a correlation grid.
    Sweep(SweepArgs),
    /// Emit the headline numbers as one JSON document with pass/fail flags.
    Report(ReportArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ProtocolKind {
    ClassicalFull,
    ClassicalPartial,
    QuantumFull,
    QuantumPartial,
}

impl ProtocolKind {
    fn name(self) -> &'static str {
        match self {
            ProtocolKind::ClassicalFull => "classical-full",
            ProtocolKind::ClassicalPartial => "classical-partial",
            ProtocolKind::QuantumFull => "quantum-full",
            ProtocolKind::QuantumPartial => "quantum-partial",
        }
    }

    fn is_partial(self) -> bool {
        matches!(
            self,
            ProtocolKind::ClassicalPartial | ProtocolKind::QuantumPartial
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct GasArgs {
    /// Molecule count N
    #[arg(long = "n", default_value_t = 1.0)]
    n: f64,
    /// Product kT as a single value (sets k = kT, T = 1)
    #[arg(long = "kT", conflicts_with_all = ["k", "temperature"])]
    kt: Option<f64>,
    /// Boltzmann constant k
    #[arg(long = "k", default_value_t = 1.0)]
    k: f64,
    /// Thermostat temperature T
    #[arg(long = "T", default_value_t = 1.0)]
    temperature: f64,
    /// Half-vessel volume V (the vessel holds 2V)
    #[arg(long = "V", default_value_t = 1.0)]
    half_volume: f64,
    /// Quadrature tolerance for the work integrals, in NkT units
    #[arg(long = "quad-tol", default_value_t = 1e-10)]
    quad_tol: f64,
}

impl GasArgs {
    fn to_spec(&self) -> Result<GasSpec, String> {
        if !self.quad_tol.is_finite() || self.quad_tol <= 0.0 {
            return Err(format!("--quad-tol must be positive, got {}", self.quad_tol));
        }
        let (k, t) = match self.kt {
            Some(kt) => (kt, 1.0),
            None => (self.k, self.temperature),
        };
        GasSpec::new(self.n, t, k, self.half_volume).map_err(|e| e.to_string())
    }
}

#[derive(Args)]
struct RunArgs {
    /// Protocol to execute
    #[arg(long, value_enum)]
    protocol: ProtocolKind,
    /// Correlation parameter (required for the partial protocols)
    #[arg(long)]
    p: Option<f64>,
    /// Phase alpha of the entangled state (quantum-partial only)
    #[arg(long, default_value_t = 0.0)]
    alpha: f64,
    /// Phase beta of the entangled state (quantum-partial only)
    #[arg(long, default_value_t = 0.0)]
    beta: f64,
    #[command(flatten)]
    gas: GasArgs,
    /// Output path (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Artifact format
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Args)]
struct SweepArgs {
    /// Protocol to sweep (classical-partial or quantum-partial)
    #[arg(long, value_enum, default_value_t = ProtocolKind::ClassicalPartial)]
    protocol: ProtocolKind,
    /// Lower end of the correlation grid
    #[arg(long = "p-min", default_value_t = 0.5)]
    p_min: f64,
    /// Upper end of the correlation grid
    #[arg(long = "p-max", default_value_t = 1.0)]
    p_max: f64,
    /// Number of grid points (at least 2)
    #[arg(long, default_value_t = 11)]
    steps: usize,
    #[command(flatten)]
    gas: GasArgs,
    /// Output path (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Artifact format
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Args)]
struct ReportArgs {
    /// Output path (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    let outcome = match cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Report(args) => cmd_report(args),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(1)
        }
    }
}

fn correlation(p: f64) -> Result<CorrelationParam, String> {
    CorrelationParam::new(p).map_err(|e| e.to_string())
}

/// Initial state and step list for a named protocol.
fn resolve_protocol(
    kind: ProtocolKind,
    p: Option<f64>,
    alpha: f64,
    beta: f64,
) -> Result<(TwoQubitState, Vec<ProtocolStep>), String> {
    if kind.is_partial() && p.is_none() {
        return Err(format!("--p is required for protocol {}", kind.name()));
    }
    if !kind.is_partial() && p.is_some() {
        return Err(format!("--p does not apply to protocol {}", kind.name()));
    }
    match kind {
        ProtocolKind::ClassicalFull => {
            Ok((classical_full(Which::One), protocol_classical_full()))
        }
        ProtocolKind::ClassicalPartial => {
            let cp = correlation(p.expect("checked above"))?;
            Ok((
                classical_partial(cp, Which::One),
                protocol_classical_partial(cp),
            ))
        }
        ProtocolKind::QuantumFull => Ok((bell(BellKind::PhiPlus), protocol_quantum_full())),
        ProtocolKind::QuantumPartial => {
            let cp = correlation(p.expect("checked above"))?;
            Ok((
                partial_entangled(cp, alpha, beta),
                protocol_quantum_partial(cp, alpha, beta),
            ))
        }
    }
}

#[derive(Serialize)]
struct ConfigEcho {
    protocol: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    p: Option<f64>,
    alpha: f64,
    beta: f64,
    n_molecules: f64,
    temperature: f64,
    boltzmann: f64,
    half_volume: f64,
    quad_tol: f64,
}

#[derive(Serialize)]
struct LedgerJson {
    step: usize,
    description: String,
    work_out: f64,
    heat_in: f64,
    gas_entropy_delta_nats: f64,
}

#[derive(Serialize)]
struct EquivalenceJson {
    work_from_entropy_change: f64,
    work_from_initial_defect: f64,
    rel_err_entropy: f64,
    rel_err_defect: f64,
    pass: bool,
}

#[derive(Serialize)]
struct RunReportJson {
    schema: u32,
    config: ConfigEcho,
    total_work: f64,
    total_work_per_nkt: f64,
    entropy_defect_consumed_nats: f64,
    degenerate: bool,
    equivalence: EquivalenceJson,
    ledger: Vec<LedgerJson>,
}

fn ledger_csv(result: &ProtocolResult) -> String {
    let mut text = String::from("step,work_out,heat_in,gas_entropy_delta_nats,description\n");
    for entry in &result.ledger {
        text.push_str(&format!(
            "{},{},{},{},\"{}\"\n",
            entry.step_index,
            fmt9(entry.work_out),
            fmt9(entry.heat_in),
            fmt9(entry.gas_entropy_delta),
            entry.description
        ));
    }
    text
}

fn cmd_run(args: RunArgs) -> Result<u8, String> {
    let spec = args.gas.to_spec()?;
    let (initial, steps) = resolve_protocol(args.protocol, args.p, args.alpha, args.beta)?;
    let result = run_protocol_with_tol(&initial, &spec, &steps, args.gas.quad_tol)
        .map_err(|e| e.to_string())?;
    let equivalence = verify_equivalence(&result, &spec);

    eprintln!(
        "{}: total work {} ({} NkT), defect consumed {} nats/molecule",
        args.protocol.name(),
        fmt9(result.total_work),
        fmt9(result.total_work / spec.nkt()),
        fmt9(result.total_entropy_defect_consumed),
    );
    if result.degenerate {
        eprintln!("note: degenerate run (p = 1/2) -- no pressure imbalance, zero work");
    }
    eprintln!(
        "equivalence: entropy-route rel err {:.3e}, defect-route rel err {:.3e} -> {}",
        equivalence.rel_err_entropy,
        equivalence.rel_err_defect,
        if equivalence.pass { "pass" } else { "FAIL" }
    );

    let artifact = match args.format {
        Format::Json => {
            let report = RunReportJson {
                schema: SCHEMA_VERSION,
                config: ConfigEcho {
                    protocol: args.protocol.name().to_string(),
                    p: args.p.map(sig9),
                    alpha: sig9(args.alpha),
                    beta: sig9(args.beta),
                    n_molecules: sig9(spec.n_molecules),
                    temperature: sig9(spec.temperature),
                    boltzmann: sig9(spec.boltzmann),
                    half_volume: sig9(spec.half_volume),
                    quad_tol: sig9(args.gas.quad_tol),
                },
                total_work: sig9(result.total_work),
                total_work_per_nkt: sig9(result.total_work / spec.nkt()),
                entropy_defect_consumed_nats: sig9(result.total_entropy_defect_consumed),
                degenerate: result.degenerate,
                equivalence: EquivalenceJson {
                    work_from_entropy_change: sig9(equivalence.work_from_entropy_change),
                    work_from_initial_defect: sig9(equivalence.work_from_initial_defect),
                    rel_err_entropy: sig9(equivalence.rel_err_entropy),
                    rel_err_defect: sig9(equivalence.rel_err_defect),
                    pass: equivalence.pass,
                },
                ledger: result
                    .ledger
                    .iter()
                    .map(|e| LedgerJson {
                        step: e.step_index,
                        description: e.description.clone(),
                        work_out: sig9(e.work_out),
                        heat_in: sig9(e.heat_in),
                        gas_entropy_delta_nats: sig9(e.gas_entropy_delta),
                    })
                    .collect(),
            };
            serde_json::to_string_pretty(&report).map_err(|e| e.to_string())? + "\n"
        }
        Format::Csv => ledger_csv(&result),
    };
    emit(args.out.as_deref(), &artifact).map_err(|e| e.to_string())?;
    Ok(if equivalence.pass { 0 } else { 2 })
}

#[derive(Serialize)]
struct SweepRowJson {
    p: f64,
    work_numeric: f64,
    work_closed: f64,
    defect_nats: f64,
    eq_displacement: f64,
    rel_error: f64,
}

#[derive(Serialize)]
struct SweepReportJson {
    schema: u32,
    config: ConfigEcho,
    rows: Vec<SweepRowJson>,
}

fn cmd_sweep(args: SweepArgs) -> Result<u8, String> {
    if !args.protocol.is_partial() {
        return Err("sweep supports classical-partial and quantum-partial protocols".into());
    }
    if !(0.5..1.0).contains(&args.p_min) || args.p_max > 1.0 || args.p_min >= args.p_max {
        return Err(format!(
            "require 1/2 <= p-min < p-max <= 1, got [{}, {}]",
            args.p_min, args.p_max
        ));
    }
    if args.steps < 2 {
        return Err(format!("--steps must be at least 2, got {}", args.steps));
    }
    let spec = args.gas.to_spec()?;

    let mut rows = Vec::with_capacity(args.steps);
    for i in 0..args.steps {
        let frac = i as f64 / (args.steps - 1) as f64;
        let pv = args.p_min + frac * (args.p_max - args.p_min);
        let cp = correlation(pv)?;
        let (initial, steps) = match args.protocol {
            ProtocolKind::ClassicalPartial => (
                classical_partial(cp, Which::One),
                protocol_classical_partial(cp),
            ),
            ProtocolKind::QuantumPartial => (
                partial_entangled(cp, 0.0, 0.0),
                protocol_quantum_partial(cp, 0.0, 0.0),
            ),
            _ => unreachable!("validated above"),
        };
        let result = run_protocol_with_tol(&initial, &spec, &steps, args.gas.quad_tol)
            .map_err(|e| format!("p = {pv}: {e}"))?;
        let work_numeric = result.total_work / spec.nkt();
        let work_closed = match args.protocol {
            ProtocolKind::ClassicalPartial => {
                LN_2 - corrwork::binary_entropy(pv).map_err(|e| e.to_string())?
            }
            _ => 2.0 * LN_2,
        };
        let defect = defect_vs_equilibrium(&result.initial_state);
        let eq_displacement = result
            .mix_displacements
            .first()
            .map(|d| d.v1 / spec.half_volume)
            .unwrap_or(0.0);
        let rel_error = (work_numeric - work_closed).abs() / work_closed.max(1e-15);
        rows.push(SweepRowJson {
            p: sig9(pv),
            work_numeric: sig9(work_numeric),
            work_closed: sig9(work_closed),
            defect_nats: sig9(defect),
            eq_displacement: sig9(eq_displacement),
            rel_error: sig9(rel_error),
        });
    }

    let artifact = match args.format {
        Format::Csv => {
            let mut text =
                String::from("p,work_numeric,work_closed,defect_nats,eq_displacement,rel_error\n");
            for row in &rows {
                text.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    fmt9(row.p),
                    fmt9(row.work_numeric),
                    fmt9(row.work_closed),
                    fmt9(row.defect_nats),
                    fmt9(row.eq_displacement),
                    fmt9(row.rel_error)
                ));
            }
            text
        }
        Format::Json => {
            let report = SweepReportJson {
                schema: SCHEMA_VERSION,
                config: ConfigEcho {
                    protocol: args.protocol.name().to_string(),
                    p: None,
                    alpha: 0.0,
                    beta: 0.0,
                    n_molecules: sig9(spec.n_molecules),
                    temperature: sig9(spec.temperature),
                    boltzmann: sig9(spec.boltzmann),
                    half_volume: sig9(spec.half_volume),
                    quad_tol: sig9(args.gas.quad_tol),
                },
                rows,
            };
            serde_json::to_string_pretty(&report).map_err(|e| e.to_string())? + "\n"
        }
    };
    emit(args.out.as_deref(), &artifact).map_err(|e| e.to_string())?;
    Ok(0)
}

#[derive(Serialize)]
struct ReportJson {
    schema: u32,
    i_c_nats: f64,
    i_c_bits: f64,
    i_cp_075_nats: f64,
    i_q_nats: f64,
    i_q_bits: f64,
    w_c_per_nkt: f64,
    w_cp_075_per_nkt: f64,
    w_q_per_nkt: f64,
    w_qp_075_per_nkt: f64,
    ratio_wq_over_wc: f64,
    defect_equilibrium: f64,
    entropies_nats: BTreeMap<String, f64>,
    checks: BTreeMap<String, bool>,
    all_pass: bool,
}

fn cmd_report(args: ReportArgs) -> Result<u8, String> {
    let spec = GasSpec::default();
    let quad_tol = 1e-10;
    let p075 = correlation(0.75)?;

    let run = |initial: &TwoQubitState, steps: &[ProtocolStep]| -> Result<f64, String> {
        let result =
            run_protocol_with_tol(initial, &spec, steps, quad_tol).map_err(|e| e.to_string())?;
        Ok(result.total_work / spec.nkt())
    };
    let w_c = run(&classical_full(Which::One), &protocol_classical_full())?;
    let w_cp = run(
        &classical_partial(p075, Which::One),
        &protocol_classical_partial(p075),
    )?;
    let w_q = run(&bell(BellKind::PhiPlus), &protocol_quantum_full())?;
    let w_qp = run(
        &partial_entangled(p075, 0.0, 0.0),
        &protocol_quantum_partial(p075, 0.0, 0.0),
    )?;

    let i_c = entropy_defect(
        &Ensemble::new(vec![
            (0.5, classical_full(Which::One)),
            (0.5, classical_full(Which::Two)),
        ])
        .map_err(|e| e.to_string())?,
    );
    let i_cp = entropy_defect(
        &Ensemble::new(vec![
            (0.5, classical_partial(p075, Which::One)),
            (0.5, classical_partial(p075, Which::Two)),
        ])
        .map_err(|e| e.to_string())?,
    );
    let i_q = defect_vs_equilibrium(&bell(BellKind::PhiPlus));
    let h075 = corrwork::binary_entropy(0.75).map_err(|e| e.to_string())?;

    let mut entropies = BTreeMap::new();
    entropies.insert("rho1".into(), sig9(von_neumann_entropy(&classical_full(Which::One))));
    entropies.insert("rho2".into(), sig9(von_neumann_entropy(&classical_full(Which::Two))));
    entropies.insert(
        "rho_1p_075".into(),
        sig9(von_neumann_entropy(&classical_partial(p075, Which::One))),
    );
    entropies.insert(
        "rho_2p_075".into(),
        sig9(von_neumann_entropy(&classical_partial(p075, Which::Two))),
    );
    for kind in BellKind::ALL {
        entropies.insert(
            format!("bell_{}", kind.label().replace('+', "plus").replace('-', "minus")),
            sig9(von_neumann_entropy(&bell(kind))),
        );
    }
    entropies.insert(
        "psi_075".into(),
        sig9(von_neumann_entropy(&partial_entangled(p075, 0.0, 0.0))),
    );
    entropies.insert(
        "equilibrium".into(),
        sig9(von_neumann_entropy(&TwoQubitState::maximally_mixed())),
    );

    let ratio = w_q / w_c;
    let defect_eq = defect_vs_equilibrium(&TwoQubitState::maximally_mixed());
    let mut checks = BTreeMap::new();
    checks.insert("i_c_is_ln2".into(), (i_c - LN_2).abs() <= 1e-9);
    checks.insert("i_cp_is_ln2_minus_h".into(), (i_cp - (LN_2 - h075)).abs() <= 1e-9);
    checks.insert("i_q_is_2ln2".into(), (i_q - 2.0 * LN_2).abs() <= 1e-9);
    checks.insert("w_c_matches_i_c".into(), (w_c - i_c).abs() <= 1e-6);
    checks.insert("w_cp_matches_i_cp".into(), (w_cp - i_cp).abs() <= 1e-6);
    checks.insert("w_q_matches_i_q".into(), (w_q - i_q).abs() <= 1e-6);
    checks.insert("w_qp_matches_i_q".into(), (w_qp - i_q).abs() <= 1e-6);
    checks.insert("ratio_is_two".into(), (ratio - 2.0).abs() <= 1e-9);
    checks.insert("defect_equilibrium_is_zero".into(), defect_eq.abs() <= 1e-9);
    let all_pass = checks.values().all(|&ok| ok);

    let report = ReportJson {
        schema: SCHEMA_VERSION,
        i_c_nats: sig9(i_c),
        i_c_bits: sig9(corrwork::states::nats_to_bits(i_c)),
        i_cp_075_nats: sig9(i_cp),
        i_q_nats: sig9(i_q),
        i_q_bits: sig9(corrwork::states::nats_to_bits(i_q)),
        w_c_per_nkt: sig9(w_c),
        w_cp_075_per_nkt: sig9(w_cp),
        w_q_per_nkt: sig9(w_q),
        w_qp_075_per_nkt: sig9(w_qp),
        ratio_wq_over_wc: sig9(ratio),
        defect_equilibrium: sig9(defect_eq),
        entropies_nats: entropies,
        checks,
        all_pass,
    };
    let text = serde_json::to_string_pretty(&report).map_err(|e| e.to_string())? + "\n";
    emit(args.out.as_deref(), &text).map_err(|e| e.to_string())?;
    Ok(0)
}
