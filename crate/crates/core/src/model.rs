//! The qubit–oscillator measurement model: Hamiltonians, thermal states,
//! the coupled steady state and the readout statistics.
//!
//! The qubit basis is ordered `[|e⟩, |g⟩]`, so `σ_z = diag(+1, −1)` and the
//! measured observable has eigenvalues `q_e = +1`, `q_g = −1`. The
//! oscillator couples through `R_A = a†a`, which gives the branch
//! Hamiltonians `H_{A,k} = (ω_c + q_k χ) a†a`.

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::operator::{DensityOperator, Operator, SpaceLayout, C64};

/// Default tolerance on the thermal tail cut off by the Fock truncation.
pub const DEFAULT_TRUNCATION_EPS: f64 = 1e-8;
/// Bounds applied by [`choose_truncation`].
pub const MIN_TRUNCATION: usize = 8;
pub const MAX_TRUNCATION: usize = 4096;

/// Energy eigenstates of the measured qubit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Branch {
    Excited,
    Ground,
}

impl Branch {
    pub const ALL: [Branch; 2] = [Branch::Excited, Branch::Ground];

    /// Eigenvalue of the measured observable `σ_z`.
    pub fn q(self) -> f64 {
        match self {
            Branch::Excited => 1.0,
            Branch::Ground => -1.0,
        }
    }

    /// Position in the qubit basis.
    pub fn index(self) -> usize {
        match self {
            Branch::Excited => 0,
            Branch::Ground => 1,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Branch::Excited => "e",
            Branch::Ground => "g",
        }
    }
}

/// Bath at inverse temperature `beta` with a flat spectral density
/// `J(ω) = κ/2π`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BathSpec {
    pub beta: f64,
    pub kappa: f64,
}

impl BathSpec {
    pub fn new(beta: f64, kappa: f64) -> Result<Self> {
        let b = Self { beta, kappa };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(invalid(format!("bath.beta must be positive, got {}", self.beta)));
        }
        if !(self.kappa > 0.0 && self.kappa.is_finite()) {
            return Err(invalid(format!("bath.kappa must be positive, got {}", self.kappa)));
        }
        Ok(())
    }

    /// Flat spectral density value `κ/2π`.
    pub fn spectral_density(&self, _omega: f64) -> f64 {
        self.kappa / (2.0 * std::f64::consts::PI)
    }

    /// Bose–Einstein occupation `1/(e^{βν} − 1)`.
    pub fn occupation(&self, nu: f64) -> f64 {
        bose_einstein(self.beta * nu)
    }
}

/// `1/(e^x − 1)`, accurate for small `x`.
pub fn bose_einstein(x: f64) -> f64 {
    1.0 / x.exp_m1()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OscillatorSpec {
    pub omega_c: f64,
    /// Number of Fock levels kept (`0..n_max`).
    pub n_max: usize,
}

impl OscillatorSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.omega_c > 0.0 && self.omega_c.is_finite()) {
            return Err(invalid(format!("oscillator.omega_c must be positive, got {}", self.omega_c)));
        }
        if self.n_max < 2 {
            return Err(invalid(format!("oscillator.n_max must be >= 2, got {}", self.n_max)));
        }
        Ok(())
    }

    /// `a` on the truncated Fock space.
    pub fn annihilation(&self) -> Operator {
        let n = self.n_max;
        let m = nalgebra::DMatrix::from_fn(n, n, |i, j| {
            if j == i + 1 { C64::new((j as f64).sqrt(), 0.0) } else { C64::new(0.0, 0.0) }
        });
        Operator::new(self.layout(), m).expect("square")
    }

    /// `a†a`.
    pub fn number_operator(&self) -> Operator {
        let diag: Vec<f64> = (0..self.n_max).map(|n| n as f64).collect();
        Operator::from_real_diagonal(&diag).expect("n_max >= 2")
    }

    pub fn layout(&self) -> SpaceLayout {
        SpaceLayout::single(self.n_max).expect("n_max >= 2")
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitSpec {
    pub omega_s: f64,
    /// Initial excited population `p_e(0)`.
    pub p_e0: f64,
    /// `⟨e|ρ_S(0)|g⟩`.
    pub coherence: Complex64,
}

impl QubitSpec {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.p_e0) {
            return Err(invalid(format!("qubit.p_e0 must lie in [0, 1], got {}", self.p_e0)));
        }
        let bound = self.p_e0 * (1.0 - self.p_e0) + 1e-12;
        if self.coherence.norm_sqr() > bound {
            return Err(invalid(format!(
                "qubit coherence |c|^2 = {} exceeds p_e0(1-p_e0) = {}",
                self.coherence.norm_sqr(),
                bound - 1e-12
            )));
        }
        if !self.omega_s.is_finite() {
            return Err(invalid("qubit.omega_s must be finite"));
        }
        Ok(())
    }

    /// Pure `|+⟩` state with the given qubit frequency.
    pub fn plus_state(omega_s: f64) -> Self {
        Self { omega_s, p_e0: 0.5, coherence: C64::new(0.5, 0.0) }
    }

    pub fn populations(&self) -> [f64; 2] {
        [self.p_e0, 1.0 - self.p_e0]
    }

    pub fn initial_state(&self) -> Result<DensityOperator> {
        let c = self.coherence;
        let op = Operator::from_rows(&[
            &[C64::new(self.p_e0, 0.0), c],
            &[c.conj(), C64::new(1.0 - self.p_e0, 0.0)],
        ])?;
        DensityOperator::new(op)
    }

    /// `H_S = (ω_S/2) σ_z`.
    pub fn hamiltonian(&self) -> Operator {
        Operator::from_real_diagonal(&[0.5 * self.omega_s, -0.5 * self.omega_s]).expect("2x2")
    }
}

/// Linear switch-on to `chi_max` at rate `ramp_rate`, a plateau of
/// `hold_time`, then a symmetric linear switch-off.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RampSchedule {
    pub chi_max: f64,
    pub ramp_rate: f64,
    pub hold_time: f64,
}

impl RampSchedule {
    pub fn validate(&self) -> Result<()> {
        if !(self.chi_max >= 0.0 && self.chi_max.is_finite()) {
            return Err(invalid(format!("schedule.chi_max must be >= 0, got {}", self.chi_max)));
        }
        if !(self.ramp_rate > 0.0 && self.ramp_rate.is_finite()) {
            return Err(invalid(format!("schedule.ramp_rate must be positive, got {}", self.ramp_rate)));
        }
        if !(self.hold_time >= 0.0 && self.hold_time.is_finite()) {
            return Err(invalid(format!("schedule.hold_time must be >= 0, got {}", self.hold_time)));
        }
        Ok(())
    }

    /// Duration of one ramp, `χ_M / R`.
    pub fn ramp_duration(&self) -> f64 {
        self.chi_max / self.ramp_rate
    }

    /// Time at which the meter is read (end of the plateau).
    pub fn read_time(&self) -> f64 {
        self.ramp_duration() + self.hold_time
    }

    pub fn final_time(&self) -> f64 {
        2.0 * self.ramp_duration() + self.hold_time
    }

    pub fn chi(&self, t: f64) -> f64 {
        let on = self.ramp_duration();
        if t <= 0.0 {
            0.0
        } else if t < on {
            self.ramp_rate * t
        } else if t <= on + self.hold_time {
            self.chi_max
        } else {
            (self.chi_max - self.ramp_rate * (t - on - self.hold_time)).max(0.0)
        }
    }

    pub fn chi_dot(&self, t: f64) -> f64 {
        let on = self.ramp_duration();
        if t > 0.0 && t < on {
            self.ramp_rate
        } else if t > on + self.hold_time && t < self.final_time() {
            -self.ramp_rate
        } else {
            0.0
        }
    }
}

/// Readout windows of the oscillator energy. Window `r` covers Fock levels
/// `starts[r] ..= starts[r+1] − 1`; the last window is unbounded above.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReadoutPartition {
    starts: Vec<usize>,
}

impl ReadoutPartition {
    pub fn new(starts: Vec<usize>) -> Result<Self> {
        if starts.first() != Some(&0) {
            return Err(invalid("readout partition must start at Fock level 0"));
        }
        if starts.windows(2).any(|w| w[1] <= w[0]) {
            return Err(invalid(format!("readout window starts must increase strictly: {starts:?}")));
        }
        Ok(Self { starts })
    }

    /// `Π_+ = Σ_{n ≤ n_s}`, `Π_- = Σ_{n > n_s}`.
    pub fn two_outcome(n_s: usize) -> Self {
        Self { starts: vec![0, n_s + 1] }
    }

    pub fn num_outcomes(&self) -> usize {
        self.starts.len()
    }

    pub fn starts(&self) -> &[usize] {
        &self.starts
    }

    /// Threshold `n_s` for a two-outcome partition.
    pub fn threshold(&self) -> Option<usize> {
        (self.starts.len() == 2).then(|| self.starts[1] - 1)
    }

    pub fn label(&self, r: usize) -> String {
        if self.starts.len() == 2 {
            if r == 0 { "+".into() } else { "-".into() }
        } else {
            r.to_string()
        }
    }

    /// Inclusive Fock bounds of window `r`; `None` upper bound is unbounded.
    pub fn window(&self, r: usize) -> (usize, Option<usize>) {
        let lo = self.starts[r];
        let hi = self.starts.get(r + 1).map(|&s| s - 1);
        (lo, hi)
    }

    /// Fock levels of window `r` inside a truncation of `n_max` levels.
    pub fn truncated_window(&self, r: usize, n_max: usize) -> std::ops::Range<usize> {
        let (lo, hi) = self.window(r);
        let end = hi.map_or(n_max, |h| (h + 1).min(n_max));
        lo.min(n_max)..end.max(lo.min(n_max))
    }

    /// `Π_r` on the truncated oscillator space.
    pub fn projector(&self, r: usize, n_max: usize) -> Result<Operator> {
        let range = self.truncated_window(r, n_max);
        let diag: Vec<f64> = (0..n_max).map(|n| if range.contains(&n) { 1.0 } else { 0.0 }).collect();
        Operator::from_real_diagonal(&diag)
    }

    /// Every window except possibly the last must fit inside the truncation.
    pub fn validate(&self, n_max: usize) -> Result<()> {
        if self.starts.len() > 1 && self.starts[self.starts.len() - 2] >= n_max {
            return Err(invalid(format!(
                "readout windows {:?} do not fit in n_max = {n_max}",
                self.starts
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelConfig {
    pub qubit: QubitSpec,
    pub oscillator: OscillatorSpec,
    pub bath: BathSpec,
    pub schedule: RampSchedule,
    pub partition: ReadoutPartition,
}

impl ModelConfig {
    pub fn validate(&self) -> Result<()> {
        self.qubit.validate()?;
        self.oscillator.validate()?;
        self.bath.validate()?;
        self.schedule.validate()?;
        self.partition.validate(self.oscillator.n_max)?;
        Ok(())
    }

    /// Instantaneous transition frequency `ν_k = ω_c + q_k χ` of branch `k`.
    pub fn transition_frequency(&self, k: Branch, chi: f64) -> f64 {
        self.oscillator.omega_c + k.q() * chi
    }

    /// Fails when a branch frequency is not positive at coupling `chi`.
    pub fn check_regime(&self, chi: f64) -> Result<()> {
        for k in Branch::ALL {
            let nu = self.transition_frequency(k, chi);
            if !(nu > 0.0) {
                return Err(Error::ModelRegime(format!(
                    "branch {} frequency ω_c + q χ = {nu} is not positive (χ = {chi}, ω_c = {})",
                    k.label(),
                    self.oscillator.omega_c
                )));
            }
        }
        Ok(())
    }

    /// Initial populations `p_k(0)` in branch order `[e, g]`.
    pub fn prior(&self) -> [f64; 2] {
        self.qubit.populations()
    }
}

/// Diagonal apparatus Hamiltonian `Σ_n (E_n + χ q r_n) π_n` for arbitrary
/// bare energies `E_n` and coupling eigenvalues `r_n`.
pub fn effective_hamiltonian_from_levels(energies: &[f64], r: &[f64], q: f64, chi: f64) -> Result<Operator> {
    if energies.len() != r.len() {
        return Err(invalid("energies and coupling eigenvalues differ in length"));
    }
    if chi < 0.0 {
        return Err(invalid(format!("coupling must be >= 0, got {chi}")));
    }
    let diag: Vec<f64> = energies.iter().zip(r).map(|(e, rn)| e + chi * q * rn).collect();
    Operator::from_real_diagonal(&diag)
}

/// `H_{A,k} = (ω_c + q_k χ) a†a` on the truncated Fock space.
pub fn effective_hamiltonian_a(cfg: &ModelConfig, k: Branch, chi: f64) -> Result<Operator> {
    let n = cfg.oscillator.n_max;
    let energies: Vec<f64> = (0..n).map(|m| cfg.oscillator.omega_c * m as f64).collect();
    let r: Vec<f64> = (0..n).map(|m| m as f64).collect();
    effective_hamiltonian_from_levels(&energies, &r, k.q(), chi)
}

/// Gibbs state `e^{−βh}/Z`, computed in the eigenbasis of `h` with the
/// spectrum shifted by its minimum.
pub fn thermal_state(h: &Operator, beta: f64) -> Result<DensityOperator> {
    if !(beta > 0.0) {
        return Err(invalid(format!("thermal_state: beta must be positive, got {beta}")));
    }
    let eig = crate::operator::eig_hermitian(h)?;
    let e_min = eig.values[0];
    let weights: Vec<f64> = eig.values.iter().map(|e| (-beta * (e - e_min)).exp()).collect();
    let z: f64 = weights.iter().sum();
    let n = h.dim();
    if h.is_diagonal() {
        let diag: Vec<f64> = h.real_diagonal().iter().map(|e| (-beta * (e - e_min)).exp() / z).collect();
        return DensityOperator::from_probabilities(h.layout().clone(), &diag);
    }
    let v = &eig.vectors;
    let m = nalgebra::DMatrix::from_fn(n, n, |i, j| {
        (0..n).map(|l| v[(i, l)] * v[(j, l)].conj() * (weights[l] / z)).sum::<C64>()
    });
    DensityOperator::new(Operator::new(h.layout().clone(), m)?.hermitian_part())
}

/// Branch thermal state `ρ_{A,k}^th` at coupling `chi`.
pub fn branch_thermal_state(cfg: &ModelConfig, k: Branch, chi: f64) -> Result<DensityOperator> {
    thermal_state(&effective_hamiltonian_a(cfg, k, chi)?, cfg.bath.beta)
}

/// Largest thermal weight beyond the truncation, `max_k e^{−β ν_k n_max}`.
pub fn truncation_tail(cfg: &ModelConfig, chi: f64) -> f64 {
    Branch::ALL
        .iter()
        .map(|&k| (-cfg.bath.beta * cfg.transition_frequency(k, chi) * cfg.oscillator.n_max as f64).exp())
        .fold(0.0, f64::max)
}

/// `Σ_k p_k(0) π_k ⊗ ρ_{A,k}^th` on `[2, n_max]`. Initial qubit coherence is
/// dropped: the bath dephases the qubit in the measured basis.
pub fn steady_state_sa(cfg: &ModelConfig, chi: f64) -> Result<DensityOperator> {
    if chi < 0.0 {
        return Err(invalid(format!("coupling must be >= 0, got {chi}")));
    }
    cfg.check_regime(chi)?;
    let tail = truncation_tail(cfg, chi);
    if tail > DEFAULT_TRUNCATION_EPS {
        log::warn!("thermal tail {tail:.3e} beyond n_max = {} exceeds {DEFAULT_TRUNCATION_EPS:.0e}", cfg.oscillator.n_max);
    }
    let prior = cfg.prior();
    let qubit_layout = SpaceLayout::single(2)?;
    let mut parts = Vec::with_capacity(2);
    for k in Branch::ALL {
        let mut pops = [0.0; 2];
        pops[k.index()] = 1.0;
        let proj = DensityOperator::from_probabilities(qubit_layout.clone(), &pops)?;
        parts.push((prior[k.index()], proj.tensor(&branch_thermal_state(cfg, k, chi)?)));
    }
    DensityOperator::mixture(&parts.iter().map(|(w, r)| (*w, r)).collect::<Vec<_>>())
}

/// Likelihoods `p_{r|k}`: rows are branches `[e, g]`, columns outcomes.
pub type Likelihood = Vec<Vec<f64>>;

/// Probability and mean Fock number of window `[lo, hi]` for the untruncated
/// geometric distribution `(1 − x) x^n`, `x = e^{−βν}`.
pub fn geometric_window(x: f64, lo: usize, hi: Option<usize>) -> (f64, f64) {
    // Σ_{n ≥ a} (1 − x) x^n = x^a ; Σ_{n ≥ a} n (1 − x) x^n = x^a (a(1 − x) + x)/(1 − x)
    let tail_p = |a: usize| x.powi(a as i32);
    let tail_n = |a: usize| x.powi(a as i32) * (a as f64 * (1.0 - x) + x) / (1.0 - x);
    let (p, n) = match hi {
        Some(h) => (tail_p(lo) - tail_p(h + 1), tail_n(lo) - tail_n(h + 1)),
        None => (tail_p(lo), tail_n(lo)),
    };
    let mean = if p > 0.0 { n / p } else { 0.0 };
    (p, mean)
}

/// `p_{r|k}` for the readout partition at coupling `chi_m`.
///
/// Two-outcome partitions use the untruncated closed form
/// `p_{+|k} = 1 − e^{−β ν_k (n_s+1)}`, unless the `−` window lies entirely
/// beyond the truncation, in which case `p_{+|k} = 1`. Finer partitions use
/// the trace formula over the truncated thermal states.
pub fn conditional_readout_probs(cfg: &ModelConfig, chi_m: f64) -> Result<Likelihood> {
    cfg.check_regime(chi_m)?;
    if let Some(n_s) = cfg.partition.threshold() {
        if n_s + 1 >= cfg.oscillator.n_max {
            return Ok(vec![vec![1.0, 0.0], vec![1.0, 0.0]]);
        }
        return Ok(Branch::ALL
            .iter()
            .map(|&k| {
                let x = (-cfg.bath.beta * cfg.transition_frequency(k, chi_m)).exp();
                let minus = x.powi(n_s as i32 + 1);
                vec![1.0 - minus, minus]
            })
            .collect());
    }
    conditional_readout_probs_truncated(cfg, chi_m)
}

/// `p_{r|k} = Tr[ρ_{A,k}^th Π_r]` on the truncated Fock space.
pub fn conditional_readout_probs_truncated(cfg: &ModelConfig, chi_m: f64) -> Result<Likelihood> {
    cfg.check_regime(chi_m)?;
    let n_max = cfg.oscillator.n_max;
    Branch::ALL
        .iter()
        .map(|&k| {
            let pops = branch_thermal_state(cfg, k, chi_m)?.populations();
            Ok((0..cfg.partition.num_outcomes())
                .map(|r| cfg.partition.truncated_window(r, n_max).map(|n| pops[n]).sum())
                .collect())
        })
        .collect()
}

/// Smallest Fock truncation with `e^{−β ν_min n_max} ≤ eps`, clamped to
/// `[MIN_TRUNCATION, MAX_TRUNCATION]`.
pub fn choose_truncation(bath: &BathSpec, nu_min: f64, eps: f64) -> Result<usize> {
    if !(nu_min > 0.0) {
        return Err(invalid(format!(
            "choose_truncation: smallest transition frequency must be positive, got {nu_min}"
        )));
    }
    if !(eps > 0.0) {
        return Err(invalid(format!("choose_truncation: eps must be positive, got {eps}")));
    }
    if eps >= 1.0 {
        return Ok(MIN_TRUNCATION);
    }
    let raw = ((1.0 / eps).ln() / (bath.beta * nu_min)).ceil();
    // guard against ceil landing one above an exact integer ratio
    let mut n = raw as usize;
    if n > 0 && (-bath.beta * nu_min * (n - 1) as f64).exp() <= eps {
        n -= 1;
    }
    Ok(n.clamp(MIN_TRUNCATION, MAX_TRUNCATION))
}

#[cfg(test)]
pub(crate) mod test_support {
    use super::*;

    /// Configuration used throughout the unit tests.
    pub fn config(beta: f64, chi: f64, n_s: usize, p_e0: f64, n_max: usize) -> ModelConfig {
        ModelConfig {
            qubit: QubitSpec { omega_s: 2.0, p_e0, coherence: C64::new((p_e0 * (1.0 - p_e0)).sqrt(), 0.0) },
            oscillator: OscillatorSpec { omega_c: 1.0, n_max },
            bath: BathSpec { beta, kappa: 1.0 },
            schedule: RampSchedule { chi_max: chi, ramp_rate: 0.1, hold_time: 0.0 },
            partition: ReadoutPartition::two_outcome(n_s),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::test_support::config;
    use super::*;
    use crate::operator::partial_trace;

    #[test]
    fn effective_hamiltonian_examples() {
        let cfg = config(1.0, 0.0, 0, 0.5, 4);
        let h = effective_hamiltonian_a(&cfg, Branch::Excited, 0.0).unwrap();
        assert_eq!(h.real_diagonal(), vec![0.0, 1.0, 2.0, 3.0]);
        let h = effective_hamiltonian_a(&cfg, Branch::Ground, 0.5).unwrap();
        assert_eq!(h.real_diagonal(), vec![0.0, 0.5, 1.0, 1.5]);
        let cfg3 = config(1.0, 0.0, 0, 0.5, 3);
        let h = effective_hamiltonian_a(&cfg3, Branch::Excited, 0.99).unwrap();
        let d = h.real_diagonal();
        assert!((d[1] - 1.99).abs() < 1e-15 && (d[2] - 3.98).abs() < 1e-15);
        assert!(effective_hamiltonian_from_levels(&[0.0], &[0.0], 1.0, -0.1).is_err());
    }

    #[test]
    fn excited_branch_spectrum() {
        let cfg = config(1.0, 0.0, 0, 0.5, 4);
        let h = effective_hamiltonian_a(&cfg, Branch::Excited, 0.5).unwrap();
        let vals = crate::operator::eigvals_hermitian(&h).unwrap();
        assert_eq!(vals, vec![0.0, 1.5, 3.0, 4.5]);
    }

    #[test]
    fn thermal_state_limits() {
        let h = Operator::from_real_diagonal(&[0.0, 1.0, 2.0]).unwrap();
        let cold = thermal_state(&h, 1e4).unwrap();
        assert!(cold.populations()[0] >= 1.0 - 1e-8);
        let h = Operator::from_real_diagonal(&[0.0, 1.0]).unwrap();
        let p = thermal_state(&h, std::f64::consts::LN_2).unwrap().populations();
        assert!((p[0] - 2.0 / 3.0).abs() < 1e-15 && (p[1] - 1.0 / 3.0).abs() < 1e-15);
        assert!(thermal_state(&h, 0.0).is_err());
    }

    #[test]
    fn thermal_state_non_diagonal() {
        let s = C64::new(1.0, 0.0);
        let z = C64::new(0.0, 0.0);
        let sx = Operator::from_rows(&[&[z, s], &[s, z]]).unwrap();
        let rho = thermal_state(&sx, 1.0).unwrap();
        // ⟨σ_x⟩ = −tanh β
        assert!((rho.expectation(&sx).unwrap() + 1f64.tanh()).abs() < 1e-12);
    }

    #[test]
    fn thermal_mean_occupation_matches_bose_einstein() {
        let cfg = config(3.0, 0.99, 0, 0.5, 30);
        let rho = branch_thermal_state(&cfg, Branch::Excited, 0.99).unwrap();
        let n = rho.expectation(&cfg.oscillator.number_operator()).unwrap();
        let expected = 1.0 / (5.97f64.exp() - 1.0);
        assert!((n - expected).abs() < 1e-12);
        assert!((expected - 2.56e-3).abs() < 1e-5);
    }

    #[test]
    fn steady_state_examples() {
        let cfg = config(1.0, 0.0, 0, 0.3, 12);
        let ss = steady_state_sa(&cfg, 0.0).unwrap();
        let a = ss.partial_trace(&[1]).unwrap();
        let s = ss.partial_trace(&[0]).unwrap();
        // product of the dephased qubit and the bare thermal oscillator
        let prod = s.tensor(&a);
        assert!(prod.as_operator().max_abs_diff(ss.as_operator()) < 1e-15);
        assert!((s.populations()[0] - 0.3).abs() < 1e-15);

        let cfg = config(1.0, 0.4, 0, 1.0, 12);
        let ss = steady_state_sa(&cfg, 0.4).unwrap();
        let e = DensityOperator::from_probabilities(SpaceLayout::single(2).unwrap(), &[1.0, 0.0]).unwrap();
        let expected = e.tensor(&branch_thermal_state(&cfg, Branch::Excited, 0.4).unwrap());
        assert!(expected.as_operator().max_abs_diff(ss.as_operator()) < 1e-15);
    }

    #[test]
    fn steady_state_mean_photon_number_near_resonance() {
        let mut cfg = config(3.0, 0.99, 0, 0.5, 0);
        cfg.oscillator.n_max = choose_truncation(&cfg.bath, 0.01, 1e-10).unwrap();
        let ss = steady_state_sa(&cfg, 0.99).unwrap();
        let a = ss.partial_trace(&[1]).unwrap();
        let n = a.expectation(&cfg.oscillator.number_operator()).unwrap();
        let expected = 0.5 * bose_einstein(5.97) + 0.5 * bose_einstein(0.03);
        assert!((bose_einstein(0.03) - 32.8358).abs() < 1e-3);
        assert!((n - expected).abs() < 1e-6, "{n} vs {expected}");
    }

    #[test]
    fn steady_state_partial_trace_is_branch_mixture() {
        let cfg = config(1.5, 0.6, 1, 0.7, 25);
        let ss = steady_state_sa(&cfg, 0.6).unwrap();
        let a = partial_trace(ss.as_operator(), &[1]).unwrap();
        assert!((a.trace().re - 1.0).abs() < 1e-12);
        let e = branch_thermal_state(&cfg, Branch::Excited, 0.6).unwrap();
        let g = branch_thermal_state(&cfg, Branch::Ground, 0.6).unwrap();
        let mix = e.as_operator().scale(0.7).add(&g.as_operator().scale(0.3)).unwrap();
        assert!(a.max_abs_diff(&mix) < 1e-14);
    }

    #[test]
    fn readout_probability_examples() {
        let cfg = config(3.0, 0.0, 2, 0.5, 40);
        let p = conditional_readout_probs(&cfg, 0.0).unwrap();
        assert_eq!(p[0], p[1]);

        let cfg = config(3.0, 0.99, 0, 0.5, 40);
        let p = conditional_readout_probs(&cfg, 0.99).unwrap();
        assert!((p[0][0] - (1.0 - (-5.97f64).exp())).abs() < 1e-15);
        assert!((p[0][0] - 0.997446).abs() < 1e-5);
        assert!((p[1][0] - 0.029554).abs() < 1e-6);
        for row in &p {
            assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }

        let cfg = config(3.0, 0.5, 9, 0.5, 10);
        let p = conditional_readout_probs(&cfg, 0.5).unwrap();
        assert_eq!(p, vec![vec![1.0, 0.0], vec![1.0, 0.0]]);
        let pt = conditional_readout_probs_truncated(&cfg, 0.5).unwrap();
        assert!((pt[1][0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn multi_window_partition_uses_trace_formula() {
        let mut cfg = config(0.8, 0.3, 0, 0.5, 80);
        cfg.partition = ReadoutPartition::new(vec![0, 2, 5]).unwrap();
        let p = conditional_readout_probs(&cfg, 0.3).unwrap();
        for (row, k) in p.iter().zip(Branch::ALL) {
            let x = (-0.8 * cfg.transition_frequency(k, 0.3)).exp();
            assert!((row[0] - (1.0 - x * x)).abs() < 1e-12);
            assert!((row[1] - (x * x - x.powi(5))).abs() < 1e-12);
            assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
        assert_eq!(cfg.partition.label(2), "2");
        assert!(ReadoutPartition::new(vec![1, 3]).is_err());
        assert!(ReadoutPartition::new(vec![0, 3, 3]).is_err());
    }

    #[test]
    fn readout_monotone_in_coupling() {
        let mut prev: Option<(f64, f64)> = None;
        for i in 0..=50 {
            let chi = 0.99 * i as f64 / 50.0;
            let cfg = config(2.0, chi, 1, 0.5, 40);
            let p = conditional_readout_probs(&cfg, chi).unwrap();
            if let Some((pe, pg)) = prev {
                assert!(p[0][0] >= pe && p[1][0] <= pg);
            }
            prev = Some((p[0][0], p[1][0]));
        }
    }

    #[test]
    fn geometric_window_sums() {
        let x: f64 = 0.7;
        let (p, mean) = geometric_window(x, 2, Some(4));
        let weights: Vec<f64> = (2..=4).map(|n| (1.0 - x) * x.powi(n)).collect();
        let p_direct: f64 = weights.iter().sum();
        let mean_direct: f64 = (2..=4).zip(&weights).map(|(n, w)| n as f64 * w).sum::<f64>() / p_direct;
        assert!((p - p_direct).abs() < 1e-14 && (mean - mean_direct).abs() < 1e-12);
        let (p_all, mean_all) = geometric_window(x, 0, None);
        assert!((p_all - 1.0).abs() < 1e-15);
        assert!((mean_all - x / (1.0 - x)).abs() < 1e-12);
    }

    #[test]
    fn truncation_choice() {
        let bath = BathSpec::new(3.0, 1.0).unwrap();
        assert_eq!(choose_truncation(&bath, 1.0, 1e-10).unwrap(), 8);
        let bath = BathSpec::new(0.03, 1.0).unwrap();
        assert_eq!(choose_truncation(&bath, 1.0, 1e-10).unwrap(), 768);
        assert_eq!(choose_truncation(&bath, 1.0, 1.0).unwrap(), 8);
        assert!(choose_truncation(&bath, 0.0, 1e-3).is_err());
        assert!(choose_truncation(&bath, -1.0, 1e-3).is_err());
        let cold = BathSpec::new(1e-6, 1.0).unwrap();
        assert_eq!(choose_truncation(&cold, 1.0, 1e-10).unwrap(), MAX_TRUNCATION);
    }

    #[test]
    fn regime_violation_is_reported() {
        let cfg = config(1.0, 1.2, 0, 0.5, 10);
        assert!(matches!(steady_state_sa(&cfg, 1.2), Err(Error::ModelRegime(_))));
        assert!(matches!(conditional_readout_probs(&cfg, 1.0), Err(Error::ModelRegime(_))));
    }

    #[test]
    fn schedule_shape() {
        let s = RampSchedule { chi_max: 0.5, ramp_rate: 0.25, hold_time: 1.0 };
        assert_eq!(s.ramp_duration(), 2.0);
        assert_eq!(s.final_time(), 5.0);
        assert_eq!(s.chi(1.0), 0.25);
        assert_eq!(s.chi(2.5), 0.5);
        assert_eq!(s.chi(4.0), 0.25);
        assert_eq!(s.chi(5.0), 0.0);
        assert_eq!(s.chi_dot(1.0), 0.25);
        assert_eq!(s.chi_dot(2.5), 0.0);
        assert_eq!(s.chi_dot(4.0), -0.25);
    }

    #[test]
    fn qubit_validation() {
        let q = QubitSpec { omega_s: 1.0, p_e0: 0.5, coherence: C64::new(0.6, 0.0) };
        assert!(q.validate().is_err());
        let q = QubitSpec::plus_state(1.0);
        assert!(q.validate().is_ok());
        assert!(crate::operator::von_neumann_entropy(&q.initial_state().unwrap()) < 1e-7);
    }
}
