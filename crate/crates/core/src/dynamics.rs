//! Open-system dynamics of the meter under a time-dependent coupling.
//!
//! Conditioned on qubit branch `k`, the oscillator evolves under
//! `dρ/dt = −i[H_{A,k}(t), ρ] + γ(ν) D[a]ρ + γ(−ν) D[a†]ρ` with
//! `ν = ω_c + q_k χ(t)`. Rates follow a flat spectral density, so
//! `γ(ν) − γ(−ν) = κ` at every frequency and the Lamb shift vanishes.
//!
//! Work is counted positive when injected by the drive:
//! `W_dr = ∫ dt χ̇ Σ_k p_k q_k ⟨a†a⟩_k`.

use std::fmt::Write as _;

use nalgebra::DMatrix;

use crate::error::{invalid, Error, Result};
use crate::model::{geometric_window, Branch, BathSpec, ModelConfig};
use crate::numerics::ode::{self, OdeOptions, OdeSolution};
use crate::numerics::quadrature;
use crate::operator::{eigvals_hermitian, DensityOperator, Operator, C64};

/// Quadrature nodes per unit `κt` used for the work integral.
const WORK_NODES_PER_KAPPA_T: f64 = 50.0;
const WORK_MIN_NODES: usize = 4001;
const WORK_MAX_NODES: usize = 400_001;
/// Maximum number of trajectory nodes checked for positivity.
const POSITIVITY_SAMPLES: usize = 64;

/// Bath rates at transition frequency `nu`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateSet {
    pub nu: f64,
    /// Emission rate `γ(ν) = κ(n_ν + 1)`.
    pub gamma_down: f64,
    /// Absorption rate `γ(−ν) = κ n_ν`.
    pub gamma_up: f64,
    pub kappa_eff: f64,
}

pub fn bath_rates(nu: f64, bath: &BathSpec) -> Result<RateSet> {
    if !(nu > 0.0) {
        return Err(invalid(format!("bath_rates: frequency must be positive, got {nu}")));
    }
    let n = bath.occupation(nu);
    let kappa = 2.0 * std::f64::consts::PI * bath.spectral_density(nu);
    Ok(RateSet { nu, gamma_down: kappa * (n + 1.0), gamma_up: kappa * n, kappa_eff: kappa })
}

/// First and second moments of the meter mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentState {
    pub n_mean: f64,
    pub a2: C64,
}

impl MomentState {
    /// Thermal moments at transition frequency `nu`.
    pub fn thermal(bath: &BathSpec, nu: f64) -> Self {
        Self { n_mean: bath.occupation(nu), a2: C64::new(0.0, 0.0) }
    }
}

fn branch_frequency(cfg: &ModelConfig, k: Branch, chi: f64) -> Result<f64> {
    let nu = cfg.transition_frequency(k, chi);
    if nu > 0.0 {
        Ok(nu)
    } else {
        Err(Error::ModelRegime(format!(
            "branch {} frequency {nu} is not positive at χ = {chi}; coupling exceeds ω_c",
            k.label()
        )))
    }
}

/// Largest coupling reached by `chi` on `[t0, t1]` for the piecewise-linear
/// schedule; used to check the regime before integrating.
fn schedule_max_chi(cfg: &ModelConfig, t0: f64, t1: f64) -> f64 {
    let s = &cfg.schedule;
    let mut m = s.chi(t0).max(s.chi(t1));
    let (on, read) = (s.ramp_duration(), s.read_time());
    if t0 <= read && t1 >= on {
        m = m.max(s.chi_max);
    }
    m
}

/// Heuristic validity check for the slowly-varying-coupling assumption.
pub fn validity_warning(cfg: &ModelConfig) -> Option<String> {
    let limit = 0.1 * cfg.oscillator.omega_c * cfg.bath.kappa;
    (cfg.schedule.ramp_rate > limit).then(|| {
        format!(
            "ramp rate {} exceeds 0.1·ω_c·κ = {limit}; the master equation may be inaccurate",
            cfg.schedule.ramp_rate
        )
    })
}

/// Elementwise generator on an `n × n` matrix stored as `[Re; Im]`,
/// row-major. Truncated `aa† = diag(1, …, n−1, 0)` keeps the trace exact.
fn generator_into(n: usize, nu: f64, rates: &RateSet, y: &[f64], dy: &mut [f64]) {
    let nn = n * n;
    let (re, im) = y.split_at(nn);
    let (dre, dim) = dy.split_at_mut(nn);
    let gd = rates.gamma_down;
    let gu = rates.gamma_up;
    let c = |m: usize| if m + 1 < n { (m + 1) as f64 } else { 0.0 };
    for m in 0..n {
        for l in 0..n {
            let idx = m * n + l;
            let (r, i) = (re[idx], im[idx]);
            // −i(E_m − E_l)ρ_ml
            let w = nu * (m as f64 - l as f64);
            let mut acc_re = w * i;
            let mut acc_im = -w * r;
            let decay = 0.5 * gd * (m + l) as f64 + 0.5 * gu * (c(m) + c(l));
            acc_re -= decay * r;
            acc_im -= decay * i;
            if m + 1 < n && l + 1 < n {
                let s = gd * (((m + 1) * (l + 1)) as f64).sqrt();
                let j = (m + 1) * n + (l + 1);
                acc_re += s * re[j];
                acc_im += s * im[j];
            }
            if m > 0 && l > 0 {
                let s = gu * ((m * l) as f64).sqrt();
                let j = (m - 1) * n + (l - 1);
                acc_re += s * re[j];
                acc_im += s * im[j];
            }
            dre[idx] = acc_re;
            dim[idx] = acc_im;
        }
    }
}

fn pack(m: &DMatrix<C64>) -> Vec<f64> {
    let n = m.nrows();
    let mut y = vec![0.0; 2 * n * n];
    for i in 0..n {
        for j in 0..n {
            y[i * n + j] = m[(i, j)].re;
            y[n * n + i * n + j] = m[(i, j)].im;
        }
    }
    y
}

fn unpack(n: usize, y: &[f64]) -> DMatrix<C64> {
    DMatrix::from_fn(n, n, |i, j| C64::new(y[i * n + j], y[n * n + i * n + j]))
}

fn symmetrize(n: usize, y: &mut [f64]) {
    let nn = n * n;
    for i in 0..n {
        y[nn + i * n + i] = 0.0;
        for j in (i + 1)..n {
            let (a, b) = (i * n + j, j * n + i);
            let re = 0.5 * (y[a] + y[b]);
            let im = 0.5 * (y[nn + a] - y[nn + b]);
            y[a] = re;
            y[b] = re;
            y[nn + a] = im;
            y[nn + b] = -im;
        }
    }
}

/// `dρ/dt` for branch `k` at time `t` on the configured schedule.
pub fn generator_rhs(rho: &DensityOperator, t: f64, k: Branch, cfg: &ModelConfig) -> Result<Operator> {
    let n = cfg.oscillator.n_max;
    if rho.dim() != n {
        return Err(invalid(format!("generator_rhs: state dimension {} != n_max {n}", rho.dim())));
    }
    let nu = branch_frequency(cfg, k, cfg.schedule.chi(t))?;
    let rates = bath_rates(nu, &cfg.bath)?;
    let y = pack(rho.matrix());
    let mut dy = vec![0.0; y.len()];
    generator_into(n, nu, &rates, &y, &mut dy);
    Operator::new(rho.layout().clone(), unpack(n, &dy))
}

/// Integrated density-matrix trajectory with conservation diagnostics.
#[derive(Debug, Clone)]
pub struct DensityTrajectory {
    n: usize,
    layout: crate::operator::SpaceLayout,
    solution: OdeSolution,
    /// Largest `|Tr ρ(t) − Tr ρ(t0)|` over accepted nodes.
    pub trace_drift: f64,
    /// Smallest eigenvalue seen on the sampled nodes.
    pub min_eigenvalue: f64,
}

impl DensityTrajectory {
    pub fn times(&self) -> &[f64] {
        &self.solution.times
    }

    pub fn len(&self) -> usize {
        self.solution.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.solution.times.is_empty()
    }

    pub fn state(&self, i: usize) -> Operator {
        Operator::new(self.layout.clone(), unpack(self.n, &self.solution.states[i])).expect("shape")
    }

    /// Dense-output state at time `t` (clamped to the integrated interval).
    pub fn sample(&self, t: f64) -> Operator {
        let mut y = self.solution.sample(t);
        symmetrize(self.n, &mut y);
        Operator::new(self.layout.clone(), unpack(self.n, &y)).expect("shape")
    }

    pub fn final_state(&self) -> Operator {
        self.state(self.len() - 1)
    }

    pub fn rejected_steps(&self) -> usize {
        self.solution.rejected_steps
    }
}

/// Integrate branch `k` along the configured schedule.
pub fn integrate_density(
    rho0: &DensityOperator,
    t0: f64,
    t1: f64,
    k: Branch,
    cfg: &ModelConfig,
) -> Result<DensityTrajectory> {
    cfg.check_regime(schedule_max_chi(cfg, t0, t1))?;
    let schedule = cfg.schedule;
    integrate_density_with(rho0, t0, t1, k, cfg, move |t| schedule.chi(t))
}

/// Integrate branch `k` along an arbitrary coupling protocol `chi(t)`. The
/// caller guarantees `ω_c + q_k χ(t) > 0` on `[t0, t1]`.
pub fn integrate_density_with<X: Fn(f64) -> f64>(
    rho0: &DensityOperator,
    t0: f64,
    t1: f64,
    k: Branch,
    cfg: &ModelConfig,
    chi: X,
) -> Result<DensityTrajectory> {
    let n = cfg.oscillator.n_max;
    if rho0.dim() != n {
        return Err(invalid(format!("integrate_density: state dimension {} != n_max {n}", rho0.dim())));
    }
    for t in [t0, t1] {
        branch_frequency(cfg, k, chi(t))?;
    }
    let bath = cfg.bath;
    let omega_c = cfg.oscillator.omega_c;
    let q = k.q();
    let rhs = |t: f64, y: &[f64], dy: &mut [f64]| {
        // the frequency is clamped only to keep the closure total; the
        // endpoint check above rejects protocols that leave the regime
        let nu = (omega_c + q * chi(t)).max(f64::MIN_POSITIVE);
        let n_nu = bath.occupation(nu);
        let rates = RateSet {
            nu,
            gamma_down: bath.kappa * (n_nu + 1.0),
            gamma_up: bath.kappa * n_nu,
            kappa_eff: bath.kappa,
        };
        generator_into(n, nu, &rates, y, dy);
    };
    let y0 = pack(rho0.matrix());
    let solution = ode::integrate(rhs, t0, &y0, t1, &OdeOptions::default(), |y| symmetrize(n, y))?;

    let trace = |y: &[f64]| (0..n).map(|i| y[i * n + i]).sum::<f64>();
    let tr0 = trace(&y0);
    let trace_drift = solution.states.iter().map(|y| (trace(y) - tr0).abs()).fold(0.0, f64::max);

    let layout = rho0.layout().clone();
    let stride = (solution.states.len() / POSITIVITY_SAMPLES).max(1);
    let mut min_eigenvalue = f64::INFINITY;
    let last = solution.states.len() - 1;
    for (i, y) in solution.states.iter().enumerate() {
        if i % stride == 0 || i == last {
            let op = Operator::new(layout.clone(), unpack(n, y))?;
            let lo = eigvals_hermitian(&op)?.first().copied().unwrap_or(0.0);
            min_eigenvalue = min_eigenvalue.min(lo);
        }
    }
    if min_eigenvalue < -1e-6 {
        log::warn!("density trajectory lost positivity: minimum eigenvalue {min_eigenvalue:.3e}");
    }
    if trace_drift > 1e-8 {
        log::warn!("density trajectory trace drift {trace_drift:.3e}");
    }
    Ok(DensityTrajectory { n, layout, solution, trace_drift, min_eigenvalue })
}

/// Moment trajectory `(⟨a†a⟩, ⟨a²⟩)`.
#[derive(Debug, Clone)]
pub struct MomentTrajectory {
    solution: OdeSolution,
}

impl MomentTrajectory {
    pub fn times(&self) -> &[f64] {
        &self.solution.times
    }

    pub fn state(&self, i: usize) -> MomentState {
        Self::decode(&self.solution.states[i])
    }

    pub fn final_state(&self) -> MomentState {
        Self::decode(self.solution.final_state())
    }

    pub fn sample(&self, t: f64) -> MomentState {
        Self::decode(&self.solution.sample(t))
    }

    pub fn t_end(&self) -> f64 {
        self.solution.t_end()
    }

    fn decode(y: &[f64]) -> MomentState {
        MomentState { n_mean: y[0], a2: C64::new(y[1], y[2]) }
    }
}

/// Integrate the moment equations for branch `k` on the configured schedule.
pub fn integrate_moments(m0: MomentState, k: Branch, cfg: &ModelConfig, t0: f64, t1: f64) -> Result<MomentTrajectory> {
    cfg.check_regime(schedule_max_chi(cfg, t0, t1))?;
    let schedule = cfg.schedule;
    integrate_moments_with(m0, k, cfg, t0, t1, move |t| schedule.chi(t))
}

/// Integrate the moment equations along an arbitrary protocol `chi(t)`:
/// `d⟨n⟩/dt = −κ⟨n⟩ + κ n_ν`, `d⟨a²⟩/dt = −(κ + 2iν)⟨a²⟩`.
pub fn integrate_moments_with<X: Fn(f64) -> f64>(
    m0: MomentState,
    k: Branch,
    cfg: &ModelConfig,
    t0: f64,
    t1: f64,
    chi: X,
) -> Result<MomentTrajectory> {
    for t in [t0, t1] {
        branch_frequency(cfg, k, chi(t))?;
    }
    let bath = cfg.bath;
    let omega_c = cfg.oscillator.omega_c;
    let q = k.q();
    let kappa = bath.kappa;
    let rhs = |t: f64, y: &[f64], dy: &mut [f64]| {
        let nu = (omega_c + q * chi(t)).max(f64::MIN_POSITIVE);
        dy[0] = -kappa * y[0] + kappa * bath.occupation(nu);
        dy[1] = -kappa * y[1] + 2.0 * nu * y[2];
        dy[2] = -kappa * y[2] - 2.0 * nu * y[1];
    };
    let y0 = [m0.n_mean, m0.a2.re, m0.a2.im];
    let solution = ode::integrate(rhs, t0, &y0, t1, &OdeOptions::default(), |_| {})?;
    Ok(MomentTrajectory { solution })
}

/// `dn_ν/dν = −β e^{βν}/(e^{βν} − 1)²`.
fn occupation_derivative(beta: f64, nu: f64) -> f64 {
    let s = (0.5 * beta * nu).sinh();
    -beta / (4.0 * s * s)
}

/// Adiabatic occupation plus its first non-adiabatic correction,
/// `n_{ν(t)} − ∫_0^t du e^{−κ(t−u)} ∂_u n_{ν(u)}`, starting from equilibrium
/// at `t = 0`.
pub fn occupation_first_order(t: f64, k: Branch, cfg: &ModelConfig) -> Result<f64> {
    let s = cfg.schedule;
    cfg.check_regime(schedule_max_chi(cfg, 0.0, t.max(0.0)))?;
    let nu_t = cfg.transition_frequency(k, s.chi(t));
    let adiabatic = cfg.bath.occupation(nu_t);
    if t <= 0.0 {
        return Ok(adiabatic);
    }
    let (beta, kappa, q) = (cfg.bath.beta, cfg.bath.kappa, k.q());
    let integrand = |u: f64| {
        let nu = cfg.transition_frequency(k, s.chi(u));
        (-kappa * (t - u)).exp() * occupation_derivative(beta, nu) * q * s.chi_dot(u)
    };
    let breaks = [s.ramp_duration(), s.read_time(), t - 50.0 / kappa];
    let corr = quadrature::integrate(integrand, 0.0, t, &breaks, 1e-10, 1e-14)?;
    Ok(adiabatic - corr.value)
}

/// How the switch-off stage treats the readout at `t_M`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branching {
    /// Outcomes ignored: each branch continues from its own state.
    Unread,
    /// Each outcome `r` restarts from the conditional occupation
    /// `Tr[Π_r ρ_{A,k} Π_r a†a]/p_{r|k}` of the thermal branch state.
    ReadAtTm,
}

/// Time series of the drive-work integrand.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct WorkTrace {
    pub times: Vec<f64>,
    pub chi_values: Vec<f64>,
    pub n_mean_e: Vec<f64>,
    pub n_mean_g: Vec<f64>,
    /// Work increment of the interval ending at each node (0 at the first).
    pub dw: Vec<f64>,
    pub w_cumulative: Vec<f64>,
}

impl WorkTrace {
    fn push(&mut self, t: f64, chi: f64, n_e: f64, n_g: f64, dw: f64) {
        let prev = self.w_cumulative.last().copied().unwrap_or(0.0);
        self.times.push(t);
        self.chi_values.push(chi);
        self.n_mean_e.push(n_e);
        self.n_mean_g.push(n_g);
        self.dw.push(dw);
        self.w_cumulative.push(prev + dw);
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("t,chi,n_mean_e,n_mean_g,dW,W_cumulative\n");
        for i in 0..self.times.len() {
            let _ = writeln!(
                s,
                "{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e}",
                self.times[i], self.chi_values[i], self.n_mean_e[i], self.n_mean_g[i], self.dw[i], self.w_cumulative[i]
            );
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WorkResult {
    /// Ensemble-averaged drive work `Σ_k p_k W_k`.
    pub w_dr: f64,
    /// Branch work at `p_e(0) = 1`.
    pub w_plus: f64,
    /// Branch work at `p_e(0) = 0`.
    pub w_minus: f64,
    pub trace: WorkTrace,
}

fn work_grid(t0: f64, t1: f64, kappa: f64) -> Vec<f64> {
    let n = ((WORK_NODES_PER_KAPPA_T * kappa * (t1 - t0)).ceil() as usize).clamp(WORK_MIN_NODES, WORK_MAX_NODES);
    (0..n).map(|i| t0 + (t1 - t0) * i as f64 / (n - 1) as f64).collect()
}

/// Drive work from integrating the moment equations on the configured
/// schedule. The hold segment contributes no work but relaxes the meter.
pub fn work_numeric(cfg: &ModelConfig, branching: Branching) -> Result<WorkResult> {
    let s = cfg.schedule;
    cfg.check_regime(s.chi_max)?;
    if let Some(w) = validity_warning(cfg) {
        log::warn!("{w}");
    }
    let prior = cfg.prior();
    let mut trace = WorkTrace::default();
    if s.chi_max == 0.0 {
        let n0 = cfg.bath.occupation(cfg.oscillator.omega_c);
        trace.push(0.0, 0.0, n0, n0, 0.0);
        return Ok(WorkResult { w_dr: 0.0, w_plus: 0.0, w_minus: 0.0, trace });
    }
    let (t_on, t_read, t_final) = (s.ramp_duration(), s.read_time(), s.final_time());
    let kappa = cfg.bath.kappa;
    let start = MomentState::thermal(&cfg.bath, cfg.oscillator.omega_c);

    let mut on = Vec::with_capacity(2);
    let mut hold = Vec::with_capacity(2);
    for k in Branch::ALL {
        let tr = integrate_moments(start, k, cfg, 0.0, t_on)?;
        let h = if s.hold_time > 0.0 {
            Some(integrate_moments(tr.final_state(), k, cfg, t_on, t_read)?)
        } else {
            None
        };
        on.push(tr);
        hold.push(h);
    }
    let state_at_read = |ki: usize| hold[ki].as_ref().map_or_else(|| on[ki].final_state(), |h| h.final_state());

    // Off-ramp occupations per branch as (weight, trajectory) lists.
    let mut off: Vec<Vec<(f64, MomentTrajectory)>> = Vec::with_capacity(2);
    for k in Branch::ALL {
        let ki = k.index();
        let mut parts = Vec::new();
        match branching {
            Branching::Unread => {
                parts.push((1.0, integrate_moments(state_at_read(ki), k, cfg, t_read, t_final)?));
            }
            Branching::ReadAtTm => {
                let x = (-cfg.bath.beta * cfg.transition_frequency(k, s.chi_max)).exp();
                for r in 0..cfg.partition.num_outcomes() {
                    let (lo, hi) = cfg.partition.window(r);
                    let (p, mean) = geometric_window(x, lo, hi);
                    if p <= 0.0 {
                        continue;
                    }
                    let m0 = MomentState { n_mean: mean, a2: state_at_read(ki).a2 };
                    parts.push((p, integrate_moments(m0, k, cfg, t_read, t_final)?));
                }
            }
        }
        off.push(parts);
    }

    let n_on = |ki: usize, t: f64| on[ki].sample(t).n_mean;
    let n_off = |ki: usize, t: f64| {
        let parts = &off[ki];
        let wsum: f64 = parts.iter().map(|p| p.0).sum();
        parts.iter().map(|(w, tr)| w * tr.sample(t).n_mean).sum::<f64>() / wsum
    };

    let mut branch_work = [0.0; 2];
    let mut record = |grid: &[f64], chi_dot: f64, occ: &dyn Fn(usize, f64) -> f64, trace: &mut WorkTrace, first: bool| {
        let mut prev: Option<(f64, [f64; 2])> = None;
        for &t in grid {
            let n = [occ(0, t), occ(1, t)];
            let mut dw = 0.0;
            if let Some((tp, np)) = prev {
                for k in Branch::ALL {
                    let ki = k.index();
                    let inc = 0.5 * (t - tp) * chi_dot * k.q() * (n[ki] + np[ki]);
                    branch_work[ki] += inc;
                    dw += prior[ki] * inc;
                }
            }
            if prev.is_some() || first {
                trace.push(t, s.chi(t), n[0], n[1], dw);
            }
            prev = Some((t, n));
        }
    };

    record(&work_grid(0.0, t_on, kappa), s.ramp_rate, &n_on, &mut trace, true);
    if s.hold_time > 0.0 {
        let hold_occ = |ki: usize, t: f64| hold[ki].as_ref().expect("hold integrated").sample(t).n_mean;
        let grid: Vec<f64> = (0..=100).map(|i| t_on + s.hold_time * i as f64 / 100.0).collect();
        record(&grid, 0.0, &hold_occ, &mut trace, false);
    }
    // at t_M the trace switches to the post-readout occupations
    let off_grid = work_grid(t_read, t_final, kappa);
    let n_read = [n_off(0, t_read), n_off(1, t_read)];
    trace.push(t_read, s.chi_max, n_read[0], n_read[1], 0.0);
    record(&off_grid, -s.ramp_rate, &n_off, &mut trace, false);

    let w_dr = prior[0] * branch_work[0] + prior[1] * branch_work[1];
    Ok(WorkResult { w_dr, w_plus: branch_work[0], w_minus: branch_work[1], trace })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearRampWork {
    pub w_dr: f64,
    pub w_plus: f64,
    pub w_minus: f64,
}

/// Closed-form first-order drive work for symmetric linear ramps separated
/// by a hold long enough to re-thermalize the meter:
/// `W_k = (R/κ)² β ∫_0^U du e^{βν}/(e^{βν} − 1)² [2 − e^{u−U} − e^{−u}]`
/// with `U = χ_M κ/R` and `ν = ω_c + q_k (R/κ) u`.
pub fn work_linear_ramp(cfg: &ModelConfig) -> Result<LinearRampWork> {
    let s = cfg.schedule;
    cfg.check_regime(s.chi_max)?;
    if s.chi_max == 0.0 {
        return Ok(LinearRampWork { w_dr: 0.0, w_plus: 0.0, w_minus: 0.0 });
    }
    let (beta, omega_c) = (cfg.bath.beta, cfg.oscillator.omega_c);
    let x = s.ramp_rate / cfg.bath.kappa;
    let u_max = s.chi_max / x;
    let mut branch = [0.0; 2];
    for k in Branch::ALL {
        let q = k.q();
        let integrand = |u: f64| {
            let nu = omega_c + q * x * u;
            let sh = (0.5 * beta * nu).sinh();
            let window = 2.0 - (u - u_max).exp() - (-u).exp();
            window / (4.0 * sh * sh)
        };
        let r = quadrature::integrate(integrand, 0.0, u_max, &[50.0, u_max - 50.0], 1e-10, 0.0)?;
        branch[k.index()] = x * x * beta * r.value;
    }
    let prior = cfg.prior();
    Ok(LinearRampWork {
        w_dr: prior[0] * branch[0] + prior[1] * branch[1],
        w_plus: branch[0],
        w_minus: branch[1],
    })
}
