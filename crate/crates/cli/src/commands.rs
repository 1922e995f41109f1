//! Per-command evaluation. Every energy column is in units of `ω_c`;
//! entropies and information terms are in nats.

use measthermo::config::ConfigFile;
use measthermo::dynamics::{self, Branching};
use measthermo::model::{ModelConfig, DEFAULT_TRUNCATION_EPS};
use measthermo::mpe;
use measthermo::thermo::{self, ThermoReport};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::output::{diagnostics, num, Table};
use crate::sweep::Sweep;
use crate::{CliError, Command};

pub const EFFICIENCY_COLUMNS: &[&str] =
    &["sweep", "beta_omega", "chi_over_omega", "n_s", "p_plus", "J_S", "xi_S", "eta", "diagnostics"];
pub const WORK_COLUMNS: &[&str] =
    &["sweep", "tau_M_kappa", "r_over_kappa", "W_dr", "W_dr_plus", "W_dr_minus", "W_dr_numeric", "diagnostics"];
pub const ENTROPY_COLUMNS: &[&str] = &[
    "sweep",
    "chi_over_omega",
    "W_total",
    "W_reset_rev",
    "sigma_drive",
    "sigma_A",
    "sigma_S",
    "J_S",
    "bound_rhs",
    "diagnostics",
];
pub const FUZZ_COLUMNS: &[&str] = &[
    "case",
    "beta_omega",
    "chi_over_omega",
    "n_s",
    "p_e0",
    "r_over_kappa",
    "W_total",
    "bound_rhs",
    "bound_gap",
    "identity_residual",
    "diagnostics",
];
pub const MPE_COLUMNS: &[&str] = &[
    "regime",
    "tie",
    "efficiency_metric",
    "efficiency",
    "efficiency_bound",
    "first_law",
    "second_law_clausius",
    "measurement_constraint",
    "diagnostics",
];
pub const ROTATED_COLUMNS: &[&str] = &[
    "sweep",
    "chi_over_omega",
    "W1",
    "W3",
    "delta_E_S",
    "W_dr",
    "W_total",
    "J_S",
    "bound_rhs",
    "bound_gap",
    "diagnostics",
];

pub const DEFAULT_FUZZ_CASES: usize = 100;
/// Tolerance for bound slack and the entropy-production identity.
pub const FUZZ_TOL: f64 = 1e-9;
/// Hold length (in `1/κ`) below which the closed-form work is flagged.
const RETHERMALIZATION_HOLD: f64 = 20.0;
/// Closed-form/numeric work mismatch that is reported.
const WORK_MISMATCH: f64 = 0.02;

pub struct Context {
    pub config: ConfigFile,
    pub sweep: Option<Sweep>,
    pub seed: Option<u64>,
}

#[derive(Debug)]
pub struct RunOutput {
    pub table: Table,
    /// Internal-consistency failures; the table is still written.
    pub failures: Vec<String>,
}

pub fn columns(command: Command) -> &'static [&'static str] {
    match command {
        Command::EfficiencyCurve => EFFICIENCY_COLUMNS,
        Command::WorkFiniteTime => WORK_COLUMNS,
        Command::EntropyDecomposition => ENTROPY_COLUMNS,
        Command::BoundFuzz => FUZZ_COLUMNS,
        Command::MpeClassify => MPE_COLUMNS,
        Command::RotatedProtocol => ROTATED_COLUMNS,
    }
}

pub fn run(command: Command, ctx: &Context) -> Result<RunOutput, CliError> {
    let header = columns(command);
    match command {
        Command::EfficiencyCurve => sweep_rows(ctx, header, efficiency_row),
        Command::WorkFiniteTime => sweep_rows(ctx, header, work_row),
        Command::EntropyDecomposition => sweep_rows(ctx, header, entropy_row),
        Command::RotatedProtocol => {
            let q = ctx.config.rotated_observable()?;
            sweep_rows(ctx, header, move |cfg| rotated_row(cfg, &q))
        }
        Command::BoundFuzz => {
            no_sweep(ctx, command)?;
            bound_fuzz(ctx)
        }
        Command::MpeClassify => {
            no_sweep(ctx, command)?;
            mpe_row(ctx)
        }
    }
}

fn no_sweep(ctx: &Context, command: Command) -> Result<(), CliError> {
    match ctx.sweep {
        Some(_) => Err(CliError::Usage(format!("{} does not take --sweep", command.name()))),
        None => Ok(()),
    }
}

fn sweep_rows(
    ctx: &Context,
    header: &'static [&'static str],
    row: impl Fn(&ModelConfig) -> measthermo::Result<Vec<String>> + Sync,
) -> Result<RunOutput, CliError> {
    let sweep = ctx.sweep.as_ref().ok_or_else(|| CliError::Usage("this command requires --sweep".into()))?;
    let values = sweep.values().map_err(CliError::Usage)?;
    let rows: Vec<Result<Vec<String>, CliError>> = values
        .par_iter()
        .map(|&v| {
            let point = |source| CliError::Point { key: sweep.key.clone(), value: v, source };
            let mut file = ctx.config.clone();
            file.set(&sweep.key, v).map_err(point)?;
            let cfg = file.model_config().map_err(point)?;
            let mut out = vec![num(v)];
            out.extend(row(&cfg).map_err(point)?);
            Ok(out)
        })
        .collect();
    let mut table = Table::new(header);
    for r in rows {
        table.push(r?);
    }
    Ok(RunOutput { table, failures: Vec::new() })
}

fn truncation_note(tail: f64, notes: &mut Vec<String>) {
    if tail > DEFAULT_TRUNCATION_EPS {
        notes.push(format!("truncation tail {tail:.3e} exceeds {DEFAULT_TRUNCATION_EPS:e}: raise oscillator.n_max"));
    }
}

fn ramp_notes(cfg: &ModelConfig, notes: &mut Vec<String>) {
    if let Some(w) = dynamics::validity_warning(cfg) {
        notes.push(w);
    }
    let hold = cfg.schedule.hold_time * cfg.bath.kappa;
    if hold < RETHERMALIZATION_HOLD {
        notes.push(format!(
            "hold_time·κ = {hold} < {RETHERMALIZATION_HOLD}: closed-form work assumes a re-thermalized meter"
        ));
    }
}

fn efficiency_row(cfg: &ModelConfig) -> measthermo::Result<Vec<String>> {
    let p = thermo::efficiency_point(cfg)?;
    Ok(vec![
        num(p.beta_omega),
        num(p.chi_over_omega),
        p.n_s.to_string(),
        num(p.p_plus),
        num(p.j_s),
        num(p.xi_s),
        num(p.eta),
        String::new(),
    ])
}

fn work_row(cfg: &ModelConfig) -> measthermo::Result<Vec<String>> {
    let scale = 1.0 / cfg.oscillator.omega_c;
    let closed = dynamics::work_linear_ramp(cfg)?;
    let numeric = dynamics::work_numeric(cfg, Branching::Unread)?;
    let mut notes = Vec::new();
    ramp_notes(cfg, &mut notes);
    let mismatch = (numeric.w_dr - closed.w_dr).abs() / closed.w_dr.abs().max(f64::MIN_POSITIVE);
    if closed.w_dr != 0.0 && mismatch > WORK_MISMATCH {
        notes.push(format!("closed-form and numeric work differ by {:.2}%", 100.0 * mismatch));
    }
    let s = cfg.schedule;
    Ok(vec![
        num(s.ramp_duration() * cfg.bath.kappa),
        num(s.ramp_rate / cfg.bath.kappa),
        num(closed.w_dr * scale),
        num(closed.w_plus * scale),
        num(closed.w_minus * scale),
        num(numeric.w_dr * scale),
        diagnostics(&notes),
    ])
}

fn report_for(cfg: &ModelConfig, notes: &mut Vec<String>) -> measthermo::Result<ThermoReport> {
    let w_dr = dynamics::work_linear_ramp(cfg)?.w_dr;
    let report = thermo::thermo_report(cfg, w_dr)?;
    ramp_notes(cfg, notes);
    truncation_note(report.truncation_tail, notes);
    Ok(report)
}

fn entropy_row(cfg: &ModelConfig) -> measthermo::Result<Vec<String>> {
    let mut notes = Vec::new();
    let r = report_for(cfg, &mut notes)?;
    Ok(vec![
        num(cfg.schedule.chi_max / cfg.oscillator.omega_c),
        num(r.w_total),
        num(r.w_reset_rev),
        num(r.sigma_drive),
        num(r.sigma_a),
        num(r.sigma_s),
        num(r.j_s),
        num(r.bound_rhs),
        diagnostics(&notes),
    ])
}

fn rotated_row(cfg: &ModelConfig, q: &measthermo::operator::Operator) -> measthermo::Result<Vec<String>> {
    let rho0 = cfg.qubit.initial_state()?;
    let rot = thermo::rotated_protocol(cfg, &rho0, q)?;
    let mut notes = Vec::new();
    ramp_notes(cfg, &mut notes);
    truncation_note(rot.report.truncation_tail, &mut notes);
    let scale = 1.0 / cfg.oscillator.omega_c;
    let r = &rot.report;
    Ok(vec![
        num(cfg.schedule.chi_max * scale),
        num(rot.w1 * scale),
        num(rot.w3 * scale),
        num(rot.delta_e_s * scale),
        num(r.w_dr),
        num(r.w_total),
        num(r.j_s),
        num(r.bound_rhs),
        num(r.bound_gap),
        diagnostics(&notes),
    ])
}

/// Parameters of one fuzz case, in dimensionless form.
#[derive(Debug, Clone, Copy)]
struct FuzzCase {
    beta_omega: f64,
    chi_over_omega: f64,
    n_s: usize,
    p_e0: f64,
    coherence: (f64, f64),
    r_over_kappa: f64,
}

fn draw_case(rng: &mut ChaCha8Rng) -> FuzzCase {
    let beta_omega = rng.gen_range(0.3..3.0);
    let chi_over_omega = rng.gen_range(0.0..0.8);
    let n_s = rng.gen_range(0..4usize);
    let p_e0: f64 = rng.gen_range(0.05..0.95);
    let radius = (p_e0 * (1.0 - p_e0)).sqrt() * rng.gen_range(0.0..1.0f64);
    let phase = rng.gen_range(0.0..std::f64::consts::TAU);
    let r_over_kappa = 10f64.powf(rng.gen_range(-3.0..0.0));
    FuzzCase { beta_omega, chi_over_omega, n_s, p_e0, coherence: (radius * phase.cos(), radius * phase.sin()), r_over_kappa }
}

fn fuzz_config(base: &ConfigFile, c: &FuzzCase) -> measthermo::Result<ModelConfig> {
    let mut file = base.clone();
    let omega_c = base.get("oscillator.omega_c").unwrap_or(1.0);
    let kappa = base.get("bath.kappa").unwrap_or(1.0);
    file.set("bath.beta", c.beta_omega / omega_c)?;
    file.set("schedule.chi_max", c.chi_over_omega * omega_c)?;
    file.set("schedule.ramp_rate", c.r_over_kappa * kappa)?;
    file.set("partition.n_s", c.n_s as f64)?;
    file.set("qubit.p_e0", c.p_e0)?;
    file.set("qubit.coherence_re", c.coherence.0)?;
    file.set("qubit.coherence_im", c.coherence.1)?;
    file.model_config()
}

/// Second-law bound slack and entropy-production identity over random
/// models. Violations are reported as failures after the table is written.
fn bound_fuzz(ctx: &Context) -> Result<RunOutput, CliError> {
    let seed = ctx.seed.ok_or_else(|| CliError::Usage("bound-fuzz requires --seed or fuzz.seed".into()))?;
    let cases = ctx.config.usize_or("fuzz.cases", DEFAULT_FUZZ_CASES);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draws: Vec<FuzzCase> = (0..cases).map(|_| draw_case(&mut rng)).collect();
    let evaluated: Vec<(Vec<String>, Option<String>)> = draws
        .par_iter()
        .enumerate()
        .map(|(i, c)| {
            let lead = vec![
                i.to_string(),
                num(c.beta_omega),
                num(c.chi_over_omega),
                c.n_s.to_string(),
                num(c.p_e0),
                num(c.r_over_kappa),
            ];
            let mut notes = Vec::new();
            let result = fuzz_config(&ctx.config, c).and_then(|cfg| {
                let r = report_for(&cfg, &mut notes)?;
                let identity = cfg.bath.beta * cfg.oscillator.omega_c * (r.w_dr + r.w_reset_rev)
                    - (r.sigma_drive + r.sigma_s + r.sigma_a + r.j_s);
                Ok((r, identity))
            });
            match result {
                Ok((r, identity)) => {
                    let mut failure = None;
                    if r.bound_gap < -FUZZ_TOL || identity.abs() > FUZZ_TOL {
                        let msg = format!("bound gap {:.3e}, identity residual {identity:.3e}", r.bound_gap);
                        notes.push(format!("violation: {msg}"));
                        failure = Some(format!("case {i}: {msg}"));
                    }
                    let mut row = lead;
                    row.extend([num(r.w_total), num(r.bound_rhs), num(r.bound_gap), num(identity), diagnostics(&notes)]);
                    (row, failure)
                }
                Err(e) => {
                    notes.push(format!("error: {e}"));
                    let mut row = lead;
                    row.extend([String::new(), String::new(), String::new(), String::new(), diagnostics(&notes)]);
                    (row, Some(format!("case {i}: {e}")))
                }
            }
        })
        .collect();
    let mut table = Table::new(FUZZ_COLUMNS);
    let mut failures = Vec::new();
    for (row, failure) in evaluated {
        table.push(row);
        failures.extend(failure);
    }
    Ok(RunOutput { table, failures })
}

fn mpe_row(ctx: &Context) -> Result<RunOutput, CliError> {
    let spec = ctx.config.mpe_spec()?;
    let rep = mpe::classify_cycle(&spec)?;
    let (name, value, bound) = match rep.efficiency_metric {
        Some(m) => (m.name.to_string(), num(m.value), num(m.bound)),
        None => (String::new(), String::new(), String::new()),
    };
    let l = rep.law_residuals;
    let mut table = Table::new(MPE_COLUMNS);
    table.push(vec![
        rep.regime.tag().to_string(),
        rep.tie.to_string(),
        name,
        value,
        bound,
        num(l.first_law),
        num(l.second_law_clausius),
        num(l.measurement_constraint),
        diagnostics(&rep.notes),
    ]);
    Ok(RunOutput { table, failures: Vec::new() })
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = "qubit.omega_s = 2\nqubit.p_e0 = 0.5\nqubit.coherence_re = 0.5\n\
        oscillator.omega_c = 1\nbath.beta = 3\nbath.kappa = 1\n\
        schedule.chi_max = 0.5\nschedule.ramp_rate = 0.01\nschedule.hold_time = 40\npartition.n_s = 0\n";

    fn ctx(extra: &str, sweep: Option<&str>, seed: Option<u64>) -> Context {
        Context {
            config: ConfigFile::parse(&format!("{BASE}{extra}")).unwrap(),
            sweep: sweep.map(|s| s.parse().unwrap()),
            seed,
        }
    }

    #[test]
    fn headers_match_row_widths() {
        let out = run(Command::EfficiencyCurve, &ctx("", Some("bath.beta=0.5:3:3"), None)).unwrap();
        assert_eq!(out.table.rows.len(), 3);
        assert!(out.table.rows.iter().all(|r| r.len() == EFFICIENCY_COLUMNS.len()));
        let out = run(Command::EntropyDecomposition, &ctx("", Some("schedule.chi_max=0.2:0.6:2"), None)).unwrap();
        assert!(out.table.rows.iter().all(|r| r.len() == ENTROPY_COLUMNS.len()));
    }

    #[test]
    fn efficiency_rows_follow_grid_order() {
        let out = run(Command::EfficiencyCurve, &ctx("", Some("schedule.chi_max=0.9:0.1:5"), None)).unwrap();
        let chis: Vec<f64> = out.table.rows.iter().map(|r| r[2].parse().unwrap()).collect();
        assert!(chis.windows(2).all(|w| w[1] < w[0]));
        let etas: Vec<f64> = out.table.rows.iter().map(|r| r[7].parse().unwrap()).collect();
        assert!(etas.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn fuzz_needs_seed_and_is_reproducible() {
        assert!(matches!(run(Command::BoundFuzz, &ctx("fuzz.cases = 3\n", None, None)), Err(CliError::Usage(_))));
        let a = run(Command::BoundFuzz, &ctx("fuzz.cases = 4\n", None, Some(7))).unwrap();
        let b = run(Command::BoundFuzz, &ctx("fuzz.cases = 4\nfuzz.seed = 7\n", None, Some(7))).unwrap();
        assert_eq!(a.table.rows, b.table.rows);
        assert!(a.failures.is_empty(), "{:?}", a.failures);
        assert_eq!(a.table.rows.len(), 4);
    }

    #[test]
    fn mpe_rejects_sweep_and_classifies() {
        let spec = "mpe.w_meas = 1\nmpe.q_meas = -0.7\nmpe.q_bath = 0.2\nmpe.w_extr = -0.5\n\
            mpe.t_meas = 1\nmpe.t_bath = 1\nmpe.j_s = 0.6931471805599453\n";
        assert!(run(Command::MpeClassify, &ctx(spec, Some("bath.beta=1:2:2"), None)).is_err());
        let out = run(Command::MpeClassify, &ctx(spec, None, None)).unwrap();
        assert_eq!(out.table.rows[0][0], "transducer");
        assert_eq!(out.table.rows[0][3], "0.5");
    }

    #[test]
    fn point_errors_name_the_sweep_value() {
        let err = run(Command::EntropyDecomposition, &ctx("", Some("schedule.chi_max=0.5:1.5:3"), None)).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("schedule.chi_max = 1:"), "{msg}");
    }
}
