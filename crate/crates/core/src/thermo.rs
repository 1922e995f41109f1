//! Outcome bookkeeping, information measures and the thermodynamic budget
//! of a measurement cycle.
//!
//! Every conditional system–apparatus state produced here is
//! classical–quantum in the measured basis,
//! `ρ_{SA|r} = Σ_k w_{k|r} π_k ⊗ X_{k,r}`, which lets entropies of large
//! meters be computed block by block.

use crate::dynamics;
use crate::error::{invalid, Error, Result};
use crate::model::{
    branch_thermal_state, conditional_readout_probs, conditional_readout_probs_truncated, truncation_tail, Branch,
    Likelihood, ModelConfig, QubitSpec,
};
use crate::operator::{
    eig_hermitian, relative_entropy, shannon_entropy, von_neumann_entropy, DensityOperator, Operator,
    SpaceLayout,
};

/// Tolerance of internal two-route cross-checks.
pub const CROSS_CHECK_TOL: f64 = 1e-9;
/// Largest oscillator truncation for which reports build dense SA states.
pub const DENSE_SA_LIMIT: usize = 512;

fn qubit_layout() -> SpaceLayout {
    SpaceLayout::single(2).expect("qubit")
}

fn basis_projector(k: Branch) -> DensityOperator {
    let mut p = [0.0; 2];
    p[k.index()] = 1.0;
    DensityOperator::from_probabilities(qubit_layout(), &p).expect("projector")
}

/// Prior and likelihood of a measurement in the `[e, g]` basis.
#[derive(Debug, Clone, PartialEq)]
pub struct OutcomeStatistics {
    pub prior: [f64; 2],
    /// `p_{r|k}`, rows indexed by branch.
    pub likelihood: Likelihood,
}

impl OutcomeStatistics {
    pub fn new(prior: [f64; 2], likelihood: Likelihood) -> Result<Self> {
        if likelihood.len() != 2 || likelihood[0].len() != likelihood[1].len() || likelihood[0].is_empty() {
            return Err(invalid("likelihood must have two equally long, non-empty rows"));
        }
        for row in &likelihood {
            let s: f64 = row.iter().sum();
            if row.iter().any(|&p| p < -1e-12) || (s - 1.0).abs() > 1e-9 {
                return Err(invalid(format!("likelihood row {row:?} is not a probability vector")));
            }
        }
        shannon_entropy(&prior)?;
        Ok(Self { prior, likelihood })
    }

    /// Closed-form readout statistics at the configured coupling.
    pub fn from_config(cfg: &ModelConfig) -> Result<Self> {
        Self::new(cfg.prior(), conditional_readout_probs(cfg, cfg.schedule.chi_max)?)
    }

    pub fn num_outcomes(&self) -> usize {
        self.likelihood[0].len()
    }

    /// `p_{k,r} = p_k p_{r|k}`.
    pub fn p_joint(&self) -> Vec<Vec<f64>> {
        (0..2).map(|k| self.likelihood[k].iter().map(|l| self.prior[k] * l).collect()).collect()
    }

    pub fn p_r(&self) -> Vec<f64> {
        let j = self.p_joint();
        (0..self.num_outcomes()).map(|r| j[0][r] + j[1][r]).collect()
    }

    pub fn h_k(&self) -> Result<f64> {
        shannon_entropy(&self.prior)
    }

    pub fn h_r(&self) -> Result<f64> {
        shannon_entropy(&self.p_r())
    }

    pub fn h_kr(&self) -> Result<f64> {
        shannon_entropy(&self.p_joint().concat())
    }

    /// `J_S = S_S(0) + H(p_r) − H(p_{k,r})`.
    pub fn info_gain(&self, s_s0: f64) -> Result<f64> {
        Ok(s_s0 + self.h_r()? - self.h_kr()?)
    }

    /// `I(k:r) = H(p_r) − H(p_{k,r}) + H(p_k)`.
    pub fn mutual_information(&self) -> Result<f64> {
        Ok(self.h_r()? - self.h_kr()? + self.h_k()?)
    }

    /// `H(p_{k,r}) − H(p_k)`.
    pub fn meter_entropy_production(&self) -> Result<f64> {
        Ok(self.h_kr()? - self.h_k()?)
    }
}

/// One readout outcome with its conditional states in classical–quantum form.
#[derive(Debug, Clone)]
pub struct Outcome {
    /// Window index in the readout partition.
    pub index: usize,
    pub label: String,
    pub p_r: f64,
    /// `w_{k|r} = p_{k,r}/p_r`.
    pub posterior: [f64; 2],
    pub rho_s_final: DensityOperator,
    /// `X_{k,r}` at read time; `None` where `w_{k|r} = 0`.
    read_components: [Option<DensityOperator>; 2],
}

impl Outcome {
    pub fn read_component(&self, k: Branch) -> Option<&DensityOperator> {
        self.read_components[k.index()].as_ref()
    }
}

/// Conditional states of every readout outcome.
#[derive(Debug, Clone)]
pub struct MeasurementOutcomeSet {
    stats: OutcomeStatistics,
    outcomes: Vec<Outcome>,
    branch_thermal: [DensityOperator; 2],
    rho_a0: DensityOperator,
    labels: Vec<String>,
}

impl MeasurementOutcomeSet {
    /// Assemble outcome states from the prior, the likelihood, the branch
    /// read states `σ_{A,k,r}` (indexed `[k][r]`), the branch thermal states at
    /// the read coupling and the initial meter state. Outcomes with `p_r = 0`
    /// are dropped.
    pub fn assemble(
        stats: OutcomeStatistics,
        read_states: [Vec<DensityOperator>; 2],
        branch_thermal: [DensityOperator; 2],
        rho_a0: DensityOperator,
        labels: Vec<String>,
    ) -> Result<Self> {
        let nr = stats.num_outcomes();
        if read_states.iter().any(|v| v.len() != nr) || labels.len() != nr {
            return Err(invalid("read states and labels must match the number of outcomes"));
        }
        let dim = rho_a0.dim();
        if read_states.iter().flatten().chain(&branch_thermal).any(|s| s.dim() != dim) {
            return Err(invalid("meter states differ in dimension"));
        }
        let joint = stats.p_joint();
        let p_r = stats.p_r();
        let mut outcomes = Vec::with_capacity(nr);
        for r in 0..nr {
            if p_r[r] <= 0.0 {
                log::warn!("dropping outcome {} with zero probability", labels[r]);
                continue;
            }
            let posterior = [joint[0][r] / p_r[r], joint[1][r] / p_r[r]];
            let rho_s_final = DensityOperator::from_probabilities(qubit_layout(), &posterior)?;
            let read_components = [0, 1].map(|k| (posterior[k] > 0.0).then(|| read_states[k][r].clone()));
            outcomes.push(Outcome { index: r, label: labels[r].clone(), p_r: p_r[r], posterior, rho_s_final, read_components });
        }
        let set = Self { stats, outcomes, branch_thermal, rho_a0, labels };
        set.validate()?;
        Ok(set)
    }

    /// Partition-restricted thermal states with truncated-trace likelihoods.
    pub fn perfect_discrimination(cfg: &ModelConfig, chi_m: f64) -> Result<Self> {
        cfg.check_regime(chi_m)?;
        let stats = OutcomeStatistics::new(cfg.prior(), vec![vec![1.0, 0.0], vec![0.0, 1.0]])?;
        let th = [
            branch_thermal_state(cfg, Branch::Excited, chi_m)?,
            branch_thermal_state(cfg, Branch::Ground, chi_m)?,
        ];
        let read = [vec![th[0].clone(), th[0].clone()], vec![th[1].clone(), th[1].clone()]];
        let rho_a0 = branch_thermal_state(cfg, Branch::Excited, 0.0)?;
        Self::assemble(stats, read, th, rho_a0, vec!["e".into(), "g".into()])
    }

    pub fn statistics(&self) -> &OutcomeStatistics {
        &self.stats
    }

    pub fn outcomes(&self) -> &[Outcome] {
        &self.outcomes
    }

    pub fn p_joint(&self) -> Vec<Vec<f64>> {
        self.stats.p_joint()
    }

    pub fn rho_a0(&self) -> &DensityOperator {
        &self.rho_a0
    }

    pub fn branch_thermal(&self, k: Branch) -> &DensityOperator {
        &self.branch_thermal[k.index()]
    }

    pub fn label(&self, r: usize) -> &str {
        &self.labels[r]
    }

    /// `ρ_{A|r}(t_M) = Σ_k w_{k|r} X_{k,r}`.
    pub fn rho_a_read(&self, outcome: &Outcome) -> Result<DensityOperator> {
        let parts: Vec<(f64, &DensityOperator)> =
            Branch::ALL.iter().filter_map(|&k| outcome.read_component(k).map(|x| (outcome.posterior[k.index()], x))).collect();
        DensityOperator::mixture(&parts)
    }

    /// `ρ_{SA|r}(t_M) = Σ_k w_{k|r} π_k ⊗ X_{k,r}`.
    pub fn rho_sa_read(&self, outcome: &Outcome) -> Result<DensityOperator> {
        let blocks: Vec<(f64, DensityOperator)> = Branch::ALL
            .iter()
            .filter_map(|&k| outcome.read_component(k).map(|x| (outcome.posterior[k.index()], basis_projector(k).tensor(x))))
            .collect();
        DensityOperator::mixture(&blocks.iter().map(|(w, s)| (*w, s)).collect::<Vec<_>>())
    }

    /// `ρ_{SA|r}(t_F) = ρ_{S|r}(t_F) ⊗ ρ_A(0)`.
    pub fn rho_sa_final(&self, outcome: &Outcome) -> DensityOperator {
        outcome.rho_s_final.tensor(&self.rho_a0)
    }

    /// `ρ_{SA|r}^th = Σ_k w_{k|r} π_k ⊗ ρ_{A,k}^th`.
    pub fn rho_sa_reference(&self, outcome: &Outcome) -> Result<DensityOperator> {
        let blocks: Vec<(f64, DensityOperator)> = Branch::ALL
            .iter()
            .filter(|k| outcome.posterior[k.index()] > 0.0)
            .map(|&k| (outcome.posterior[k.index()], basis_projector(k).tensor(&self.branch_thermal[k.index()])))
            .collect();
        DensityOperator::mixture(&blocks.iter().map(|(w, s)| (*w, s)).collect::<Vec<_>>())
    }

    /// Unconditional post-measurement qubit state `Σ_r p_r ρ_{S|r}`.
    pub fn rho_s_final_average(&self) -> Result<DensityOperator> {
        DensityOperator::mixture(&self.outcomes.iter().map(|o| (o.p_r, &o.rho_s_final)).collect::<Vec<_>>())
    }

    pub fn validate(&self) -> Result<()> {
        let total: f64 = self.outcomes.iter().map(|o| o.p_r).sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::Consistency(format!("outcome probabilities sum to {total}")));
        }
        let joint = self.stats.p_joint();
        for o in &self.outcomes {
            let s = joint[0][o.index] + joint[1][o.index];
            if (s - o.p_r).abs() > 1e-9 {
                return Err(Error::Consistency(format!("p_r mismatch for outcome {}", o.label)));
            }
        }
        let avg = self.rho_s_final_average()?.populations();
        for k in 0..2 {
            if (avg[k] - self.stats.prior[k]).abs() > 1e-9 {
                return Err(Error::Consistency("conditional qubit states do not average to the dephased prior".into()));
            }
        }
        Ok(())
    }
}

/// Conditional states at the read coupling for the configured partition:
/// `X_{k,r} = Π_r ρ_{A,k}^th Π_r / p_{r|k}` with truncated-trace likelihoods.
pub fn build_outcomes(cfg: &ModelConfig, chi_m: f64) -> Result<MeasurementOutcomeSet> {
    cfg.check_regime(chi_m)?;
    let tail = truncation_tail(cfg, chi_m);
    if tail > crate::model::DEFAULT_TRUNCATION_EPS {
        log::warn!("truncation tail {tail:.3e} at n_max = {}", cfg.oscillator.n_max);
    }
    let n = cfg.oscillator.n_max;
    let likelihood = conditional_readout_probs_truncated(cfg, chi_m)?;
    let stats = OutcomeStatistics::new(cfg.prior(), likelihood.clone())?;
    let th = [
        branch_thermal_state(cfg, Branch::Excited, chi_m)?,
        branch_thermal_state(cfg, Branch::Ground, chi_m)?,
    ];
    let nr = cfg.partition.num_outcomes();
    let mut read: [Vec<DensityOperator>; 2] = [Vec::with_capacity(nr), Vec::with_capacity(nr)];
    for k in Branch::ALL {
        let pops = th[k.index()].populations();
        for r in 0..nr {
            let window = cfg.partition.truncated_window(r, n);
            let p = likelihood[k.index()][r];
            let restricted: Vec<f64> =
                (0..n).map(|m| if window.contains(&m) && p > 0.0 { pops[m] / p } else { 0.0 }).collect();
            // empty windows carry zero weight and are never read
            let state = if p > 0.0 {
                DensityOperator::from_probabilities(cfg.oscillator.layout(), &restricted)?
            } else {
                th[k.index()].clone()
            };
            read[k.index()].push(state);
        }
    }
    let rho_a0 = branch_thermal_state(cfg, Branch::Excited, 0.0)?;
    let labels = (0..nr).map(|r| cfg.partition.label(r)).collect();
    MeasurementOutcomeSet::assemble(stats, read, th, rho_a0, labels)
}

/// Information gain `J_S`, evaluated from the conditional states and from
/// the closed form; the two must agree.
pub fn info_gain_js(set: &MeasurementOutcomeSet, rho_s0: &DensityOperator) -> Result<f64> {
    let s0 = von_neumann_entropy(rho_s0);
    let direct: f64 = set.outcomes.iter().map(|o| o.p_r * (s0 - von_neumann_entropy(&o.rho_s_final))).sum();
    let closed = set.stats.info_gain(s0)?;
    if (direct - closed).abs() > CROSS_CHECK_TOL {
        return Err(Error::Consistency(format!("J_S routes disagree: {direct} vs {closed}")));
    }
    Ok(closed)
}

/// Holevo information `S[ρ_S(t_F)] − Σ_r p_r S[ρ_{S|r}(t_F)]`.
pub fn holevo_xi(set: &MeasurementOutcomeSet) -> Result<f64> {
    let avg = set.rho_s_final_average()?;
    let xi = von_neumann_entropy(&avg) - set.outcomes.iter().map(|o| o.p_r * von_neumann_entropy(&o.rho_s_final)).sum::<f64>();
    let mi = set.stats.mutual_information()?;
    if (xi - mi).abs() > CROSS_CHECK_TOL {
        return Err(Error::Consistency(format!("Holevo information {xi} differs from I(k:r) = {mi}")));
    }
    Ok(xi.max(0.0))
}

/// `S(A) + S(S) − S(SA)` of a bipartite `[d_S, d_A]` state.
pub fn mutual_information(rho_sa: &DensityOperator) -> Result<f64> {
    if rho_sa.layout().num_factors() != 2 {
        return Err(invalid("mutual_information expects a two-factor state"));
    }
    let s = von_neumann_entropy(&rho_sa.partial_trace(&[0])?);
    let a = von_neumann_entropy(&rho_sa.partial_trace(&[1])?);
    Ok(s + a - von_neumann_entropy(rho_sa))
}

/// `Σ_r p_r I(S:A)_r` over dense conditional states.
pub fn avg_mutual_info_dense(states: &[(f64, DensityOperator)]) -> Result<f64> {
    states.iter().map(|(p, rho)| Ok(p * mutual_information(rho)?)).sum()
}

/// `S(Σ_k w_k X_k) − Σ_k w_k S(X_k)`: mutual information of a
/// classical–quantum state `Σ_k w_k π_k ⊗ X_k`.
fn cq_mutual_information(parts: &[(f64, &DensityOperator)]) -> Result<f64> {
    let mix = DensityOperator::mixture(parts)?;
    let inner: f64 = parts.iter().map(|(w, x)| w * von_neumann_entropy(x)).sum();
    Ok(von_neumann_entropy(&mix) - inner)
}

/// Outcome-averaged residual mutual information of the final states.
pub fn avg_mutual_info(set: &MeasurementOutcomeSet) -> Result<f64> {
    let mut total = 0.0;
    for o in &set.outcomes {
        let parts: Vec<(f64, &DensityOperator)> =
            o.posterior.iter().filter(|&&w| w > 0.0).map(|&w| (w, &set.rho_a0)).collect();
        total += o.p_r * cq_mutual_information(&parts)?;
    }
    Ok(total.max(0.0))
}

/// Outcome-averaged mutual information of the read-time states.
pub fn avg_mutual_info_read(set: &MeasurementOutcomeSet) -> Result<f64> {
    let mut total = 0.0;
    for o in &set.outcomes {
        let parts: Vec<(f64, &DensityOperator)> = Branch::ALL
            .iter()
            .filter_map(|&k| o.read_component(k).map(|x| (o.posterior[k.index()], x)))
            .collect();
        total += o.p_r * cq_mutual_information(&parts)?;
    }
    Ok(total.max(0.0))
}

/// `η = 1 + (J_S − S_S(0))/ln d_S`.
pub fn efficiency(set: &MeasurementOutcomeSet, rho_s0: &DensityOperator, d_s: usize) -> Result<f64> {
    if d_s < 2 {
        return Err(invalid(format!("efficiency: d_S must be >= 2, got {d_s}")));
    }
    let j = info_gain_js(set, rho_s0)?;
    Ok(1.0 + (j - von_neumann_entropy(rho_s0)) / (d_s as f64).ln())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundComponents {
    pub delta_e_s: f64,
    pub j_s: f64,
    pub i_sa: f64,
    /// `ΔE_S + (J_S + ⟨I_{S:A}⟩)/β`.
    pub bound_rhs: f64,
}

/// Right-hand side of `W_dr + W_reset ≥ ΔE_S + (J_S + ⟨I_{S:A}⟩)/β`.
pub fn work_lower_bound(
    set: &MeasurementOutcomeSet,
    rho_s0: &DensityOperator,
    h_s: &Operator,
    beta: f64,
) -> Result<BoundComponents> {
    let final_avg = set.rho_s_final_average()?;
    let delta_e_s = final_avg.expectation(h_s)? - rho_s0.expectation(h_s)?;
    let j_s = info_gain_js(set, rho_s0)?;
    let i_sa = avg_mutual_info(set)?;
    Ok(BoundComponents { delta_e_s, j_s, i_sa, bound_rhs: delta_e_s + (j_s + i_sa) / beta })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropyProduction {
    pub sigma_s: f64,
    pub sigma_a: f64,
    pub sigma_drive: f64,
    /// `H(p_r)/β`.
    pub w_reset_rev: f64,
}

/// `σ_S = H(p_k) − S_S(0)`, `σ_A = H(p_{k,r}) − H(p_k)`, `σ_drive = βW_dr`,
/// checked against `β(W_dr + W_reset_rev) = σ_drive + σ_S + σ_A + J_S`.
pub fn entropy_production_terms(
    cfg: &ModelConfig,
    set: &MeasurementOutcomeSet,
    rho_s0: &DensityOperator,
    w_dr: f64,
) -> Result<EntropyProduction> {
    let beta = cfg.bath.beta;
    let stats = &set.stats;
    let sigma_s = stats.h_k()? - von_neumann_entropy(rho_s0);
    let sigma_a = stats.meter_entropy_production()?;
    let sigma_drive = beta * w_dr;
    let w_reset_rev = stats.h_r()? / beta;
    let j_s = info_gain_js(set, rho_s0)?;
    let lhs = beta * (w_dr + w_reset_rev);
    let rhs = sigma_drive + sigma_s + sigma_a + j_s;
    if (lhs - rhs).abs() > CROSS_CHECK_TOL * lhs.abs().max(1.0) {
        return Err(Error::Consistency(format!("entropy-production identity violated: {lhs} vs {rhs}")));
    }
    for (name, v) in [("sigma_S", sigma_s), ("sigma_A", sigma_a)] {
        if v < -1e-12 {
            return Err(Error::Consistency(format!("{name} = {v} is negative")));
        }
    }
    Ok(EntropyProduction { sigma_s: sigma_s.max(0.0), sigma_a: sigma_a.max(0.0), sigma_drive, w_reset_rev })
}

/// `Σ_r p_r D[ρ_{SA|r}(t_M) ‖ ρ_{SA|r}^th]` on dense states. Returns `+∞`
/// (with a warning) when a read state leaves the reference support.
pub fn sigma_a_oracle(set: &MeasurementOutcomeSet) -> Result<f64> {
    let mut total = 0.0;
    for o in &set.outcomes {
        let d = relative_entropy(&set.rho_sa_read(o)?, &set.rho_sa_reference(o)?);
        if d.is_infinite() {
            log::warn!("read state of outcome {} leaves the thermal support; truncation inadequate", o.label);
            return Ok(f64::INFINITY);
        }
        total += o.p_r * d;
    }
    Ok(total)
}

/// Work extractable from coherences in the eigenbasis of `observable`:
/// `(H(p_k) − S[ρ_S(0)])/β`.
pub fn coherence_extraction_work(rho_s0: &DensityOperator, observable: &Operator, beta: f64) -> Result<f64> {
    if !(beta > 0.0) {
        return Err(invalid(format!("beta must be positive, got {beta}")));
    }
    let eig = eig_hermitian(observable)?;
    let n = rho_s0.dim();
    let m = rho_s0.matrix();
    let pops: Vec<f64> = (0..n)
        .map(|l| {
            let v = eig.vectors.column(l);
            (v.adjoint() * m * v)[(0, 0)].re
        })
        .collect();
    Ok(((shannon_entropy(&pops)? - von_neumann_entropy(rho_s0)) / beta).max(0.0))
}

/// Full thermodynamic budget; energies in units of `ω_c`, entropies in nats.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermoReport {
    pub j_s: f64,
    pub xi_s: f64,
    pub i_sa_avg: f64,
    pub delta_e_s: f64,
    pub delta_s_s: f64,
    pub w_dr: f64,
    pub w_reset_rev: f64,
    pub sigma_s: f64,
    pub sigma_a: f64,
    pub sigma_drive: f64,
    pub bound_rhs: f64,
    /// `(w_unitary + W_dr + W_reset_rev) − bound_rhs`.
    pub bound_gap: f64,
    pub eta: f64,
    /// Work of the basis rotations (zero for a commuting observable).
    pub w_unitary: f64,
    pub truncation_tail: f64,
    /// Total `W_unitary + W_dr + W_reset_rev`.
    pub w_total: f64,
}

fn qubit_from_state(omega_s: f64, rho: &DensityOperator) -> QubitSpec {
    let m = rho.matrix();
    QubitSpec { omega_s, p_e0: m[(0, 0)].re, coherence: m[(0, 1)] }
}

/// Commuting-observable report for `cfg` with drive work `w_dr` (absolute
/// energy units).
pub fn thermo_report(cfg: &ModelConfig, w_dr: f64) -> Result<ThermoReport> {
    report_with_rotation(cfg, w_dr, 0.0, 0.0)
}

fn report_with_rotation(cfg: &ModelConfig, w_dr: f64, w_unitary: f64, delta_e_extra: f64) -> Result<ThermoReport> {
    let beta = cfg.bath.beta;
    let chi_m = cfg.schedule.chi_max;
    let rho_s0 = cfg.qubit.initial_state()?;
    let h_s = cfg.qubit.hamiltonian();
    let set = if cfg.oscillator.n_max <= DENSE_SA_LIMIT {
        build_outcomes(cfg, chi_m)?
    } else {
        outcomes_from_statistics(cfg, chi_m)?
    };
    let bound = work_lower_bound(&set, &rho_s0, &h_s, beta)?;
    let ep = entropy_production_terms(cfg, &set, &rho_s0, w_dr)?;
    let xi = holevo_xi(&set)?;
    let s0 = von_neumann_entropy(&rho_s0);
    let delta_s_s = von_neumann_entropy(&set.rho_s_final_average()?) - s0;
    let eta = 1.0 + (bound.j_s - s0) / 2f64.ln();
    let delta_e_s = bound.delta_e_s + delta_e_extra;
    let bound_rhs = delta_e_s + (bound.j_s + bound.i_sa) / beta;
    let w_total = w_unitary + w_dr + ep.w_reset_rev;
    let scale = 1.0 / cfg.oscillator.omega_c;
    Ok(ThermoReport {
        j_s: bound.j_s,
        xi_s: xi,
        i_sa_avg: bound.i_sa,
        delta_e_s: delta_e_s * scale,
        delta_s_s,
        w_dr: w_dr * scale,
        w_reset_rev: ep.w_reset_rev * scale,
        sigma_s: ep.sigma_s,
        sigma_a: ep.sigma_a,
        sigma_drive: ep.sigma_drive,
        bound_rhs: bound_rhs * scale,
        bound_gap: (w_total - bound_rhs) * scale,
        eta,
        w_unitary: w_unitary * scale,
        truncation_tail: truncation_tail(cfg, chi_m),
        w_total: w_total * scale,
    })
}

/// Outcome set for large meters: read components are the branch thermal
/// states (only populations of the likelihood enter), which keeps the
/// statistics exact while avoiding window restriction of huge matrices.
fn outcomes_from_statistics(cfg: &ModelConfig, chi_m: f64) -> Result<MeasurementOutcomeSet> {
    let stats = OutcomeStatistics::new(cfg.prior(), conditional_readout_probs(cfg, chi_m)?)?;
    let th = [
        branch_thermal_state(cfg, Branch::Excited, chi_m)?,
        branch_thermal_state(cfg, Branch::Ground, chi_m)?,
    ];
    let nr = stats.num_outcomes();
    let read = [vec![th[0].clone(); nr], vec![th[1].clone(); nr]];
    let rho_a0 = branch_thermal_state(cfg, Branch::Excited, 0.0)?;
    let labels = (0..nr).map(|r| cfg.partition.label(r)).collect();
    MeasurementOutcomeSet::assemble(stats, read, th, rho_a0, labels)
}

/// Data of one point of the efficiency curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EfficiencyCurvePoint {
    pub chi_over_omega: f64,
    pub beta_omega: f64,
    pub n_s: usize,
    pub p_plus: f64,
    pub j_s: f64,
    pub xi_s: f64,
    pub eta: f64,
}

/// Efficiency at the configured coupling from the closed-form likelihoods.
pub fn efficiency_point(cfg: &ModelConfig) -> Result<EfficiencyCurvePoint> {
    let n_s = cfg
        .partition
        .threshold()
        .ok_or_else(|| invalid("efficiency curve requires a two-outcome partition"))?;
    let stats = OutcomeStatistics::from_config(cfg)?;
    let s0 = von_neumann_entropy(&cfg.qubit.initial_state()?);
    let j_s = stats.info_gain(s0)?;
    Ok(EfficiencyCurvePoint {
        chi_over_omega: cfg.schedule.chi_max / cfg.oscillator.omega_c,
        beta_omega: cfg.bath.beta * cfg.oscillator.omega_c,
        n_s,
        p_plus: stats.p_r()[0],
        j_s,
        xi_s: stats.mutual_information()?,
        eta: 1.0 + (j_s - s0) / 2f64.ln(),
    })
}

/// Result of the rotated-observable protocol.
#[derive(Debug, Clone, PartialEq)]
pub struct RotatedProtocol {
    pub report: ThermoReport,
    /// `Tr[(ρ̃_S(0) − ρ_S(0)) H_S]`.
    pub w1: f64,
    /// `Tr[(ρ_S(t_F) − ρ̃_S(t_F)) H_S]`.
    pub w3: f64,
    /// `Tr[(ρ_S(t_F) − ρ_S(0)) H_S]`.
    pub delta_e_s: f64,
    pub u_s: Operator,
    pub rho_s_final: DensityOperator,
}

/// Measure `q_s` by rotating its eigenbasis onto the energy basis, running
/// the commuting measurement and rotating back. Ascending `q_s` eigenvalues
/// are paired with ascending energies. Energies in the report are in units
/// of `ω_c`; `w1`, `w3` and `delta_e_s` are absolute.
pub fn rotated_protocol(cfg: &ModelConfig, rho_s0: &DensityOperator, q_s: &Operator) -> Result<RotatedProtocol> {
    if q_s.dim() != 2 || rho_s0.dim() != 2 {
        return Err(invalid("rotated protocol acts on a qubit"));
    }
    let q_eig = eig_hermitian(q_s)?;
    let spread = q_eig.values[1] - q_eig.values[0];
    if spread.abs() <= 1e-12 * q_eig.values.iter().map(|v| v.abs()).fold(1.0, f64::max) {
        return Err(invalid("observable has a degenerate spectrum; supply an explicit eigenbasis"));
    }
    let h_s = cfg.qubit.hamiltonian();
    let h_eig = eig_hermitian(&h_s)?;
    // U = Σ_k |e(k)⟩⟨q_k|
    let u = &h_eig.vectors * q_eig.vectors.adjoint();
    let u_s = Operator::new(qubit_layout(), u)?;

    let rotated0 = DensityOperator::new(rho_s0.as_operator().conjugate_by(&u_s)?.hermitian_part())?;
    let w1 = rotated0.expectation(&h_s)? - rho_s0.expectation(&h_s)?;

    let mut inner = cfg.clone();
    inner.qubit = qubit_from_state(cfg.qubit.omega_s, &rotated0);
    let w_dr = dynamics::work_linear_ramp(&inner)?.w_dr;
    let stats = OutcomeStatistics::from_config(&inner)?;
    let p_r = stats.p_r();
    let joint = stats.p_joint();
    let mut rotated_final_pops = [0.0; 2];
    for r in 0..stats.num_outcomes() {
        if p_r[r] > 0.0 {
            for k in 0..2 {
                rotated_final_pops[k] += joint[k][r];
            }
        }
    }
    let rotated_final = DensityOperator::from_probabilities(qubit_layout(), &rotated_final_pops)?;
    let back = rotated_final.as_operator().conjugate_by(&u_s.adjoint())?.hermitian_part();
    let rho_s_final = DensityOperator::new(back)?;
    let w3 = rho_s_final.expectation(&h_s)? - rotated_final.expectation(&h_s)?;
    let delta_e_s = rho_s_final.expectation(&h_s)? - rho_s0.expectation(&h_s)?;
    if (w1 + w3 - delta_e_s).abs() > 1e-12 * delta_e_s.abs().max(1.0) {
        return Err(Error::Consistency(format!("W1 + W3 = {} differs from ΔE_S = {delta_e_s}", w1 + w3)));
    }
    let report = report_with_rotation(&inner, w_dr, w1 + w3, delta_e_s)?;
    Ok(RotatedProtocol { report, w1, w3, delta_e_s, u_s, rho_s_final })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SagawaUeda {
    /// `⟨ΔF⟩ + (J_S − H(p_r))/β`.
    pub w_su: f64,
    /// `ΔE_S + (J_S + ⟨I_{S:A}⟩)/β`.
    pub second_law_rhs: f64,
    /// `second_law_rhs − w_su`.
    pub gap: f64,
    /// `ΔE_S + (H(p_r) − ξ_S)/β ≥ 0`.
    pub appendix_term: f64,
    /// `⟨ΔF⟩ = Σ_{k,r} p_{k,r} F_{k,r} − F_A(0)`.
    pub mean_free_energy_change: f64,
}

fn free_energy(cfg: &ModelConfig, k: Branch, chi: f64) -> f64 {
    let beta = cfg.bath.beta;
    let x = (-beta * cfg.transition_frequency(k, chi)).exp();
    let n = cfg.oscillator.n_max as i32;
    // ln Z = ln((1 − x^n)/(1 − x))
    let ln_z = (-(x.powi(n))).ln_1p() - (-x).ln_1p();
    -ln_z / beta
}

/// Sagawa–Ueda lower bound for the meter with outcome-conditioned free
/// energies `F_{k,r} = F_{A,k}(χ_M) − β^{-1} ln p_{r|k}`.
pub fn sagawa_ueda_bound(cfg: &ModelConfig, set: &MeasurementOutcomeSet, rho_s0: &DensityOperator) -> Result<SagawaUeda> {
    let beta = cfg.bath.beta;
    let chi_m = cfg.schedule.chi_max;
    cfg.check_regime(chi_m)?;
    let stats = set.statistics();
    let f0 = free_energy(cfg, Branch::Excited, 0.0);
    let mut mean_df = stats.meter_entropy_production()? / beta;
    for k in Branch::ALL {
        mean_df += stats.prior[k.index()] * (free_energy(cfg, k, chi_m) - f0);
    }
    let h_r = stats.h_r()?;
    let bound = work_lower_bound(set, rho_s0, &cfg.qubit.hamiltonian(), beta)?;
    let w_su = mean_df + (bound.j_s - h_r) / beta;
    let xi = holevo_xi(set)?;
    Ok(SagawaUeda {
        w_su,
        second_law_rhs: bound.bound_rhs,
        gap: bound.bound_rhs - w_su,
        appendix_term: bound.delta_e_s + (h_r - xi) / beta,
        mean_free_energy_change: mean_df,
    })
}

/// True when every final conditional state satisfies
/// `S[ρ_{SA|r}] = S[ρ_{S|r}] + S[ρ_{A|r}]` within `1e-8`.
pub fn efficient_factorization_check(set: &MeasurementOutcomeSet) -> Result<bool> {
    for o in &set.outcomes {
        let parts: Vec<(f64, &DensityOperator)> =
            o.posterior.iter().filter(|&&w| w > 0.0).map(|&w| (w, &set.rho_a0)).collect();
        if cq_mutual_information(&parts)?.abs() > 1e-8 {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Dense factorization check for arbitrary bipartite states.
pub fn is_factorized(rho_sa: &DensityOperator) -> Result<bool> {
    Ok(mutual_information(rho_sa)?.abs() <= 1e-8)
}
