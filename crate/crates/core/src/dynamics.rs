//! Lindblad master equation for the measured Jaynes-Cummings system,
//!
//! ```text
//! d rho / dt = -i [H, rho] - (kappa / 2) [A, [A, rho]]
//! ```
//!
//! integrated with fixed-step RK4 either on the full truncated space or on
//! the 2x2 block spanned by `|+>_n, |->_n`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::cxmat::{ComplexMatrix, C64, I, ZERO};
use crate::error::{Error, Result};
use crate::hilbert::{
    build_jc_hamiltonian, build_occupancy_operator, jacobi_eigen, to_jce_block, JCParams, JACOBI_TOL,
};

/// Tolerances a state must meet to count as a density matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityTolerance {
    /// Bound on the Frobenius norm of `rho - rho^dagger`.
    pub hermiticity: f64,
    pub trace: f64,
    /// Smallest eigenvalue allowed (a small negative number).
    pub min_eigenvalue: f64,
}

impl Default for DensityTolerance {
    fn default() -> Self {
        Self { hermiticity: 1e-10, trace: 1e-10, min_eigenvalue: -1e-9 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityReport {
    pub hermiticity_defect: f64,
    pub trace_defect: f64,
    /// NaN if the eigensolver failed.
    pub min_eigenvalue: f64,
    pub hermitian: bool,
    pub unit_trace: bool,
    pub positive: bool,
}

impl DensityReport {
    pub fn passed(&self) -> bool {
        self.hermitian && self.unit_trace && self.positive
    }

    fn failure_summary(&self) -> String {
        let mut parts = Vec::new();
        if !self.hermitian {
            parts.push(format!("hermiticity defect {:.3e}", self.hermiticity_defect));
        }
        if !self.unit_trace {
            parts.push(format!("trace defect {:.3e}", self.trace_defect));
        }
        if !self.positive {
            parts.push(format!("min eigenvalue {:.3e}", self.min_eigenvalue));
        }
        parts.join(", ")
    }
}

/// Measures how far `rho` is from a valid density matrix. Never fails; the
/// report carries the verdict.
pub fn check_density(rho: &ComplexMatrix, tol: &DensityTolerance) -> DensityReport {
    let hermiticity_defect = rho.hermiticity_defect();
    let tr = rho.trace();
    let trace_defect = (tr - C64::new(1.0, 0.0)).norm();
    // the eigensolver wants exact Hermiticity; the defect is reported above
    let sym = (rho + &rho.adjoint()).scale_real(0.5);
    let min_eigenvalue = match jacobi_eigen(&sym, JACOBI_TOL) {
        Ok(pairs) => pairs.first().map_or(f64::NAN, |p| p.value),
        Err(_) => f64::NAN,
    };
    DensityReport {
        hermiticity_defect,
        trace_defect,
        min_eigenvalue,
        hermitian: hermiticity_defect <= tol.hermiticity,
        unit_trace: trace_defect <= tol.trace,
        positive: min_eigenvalue >= tol.min_eigenvalue,
    }
}

/// A validated Hermitian, unit-trace, positive semidefinite matrix.
#[derive(Clone, PartialEq)]
pub struct DensityMatrix {
    mat: ComplexMatrix,
}

impl DensityMatrix {
    pub fn new(mat: ComplexMatrix) -> Result<Self> {
        Self::with_tolerance(mat, &DensityTolerance::default())
    }

    pub fn with_tolerance(mat: ComplexMatrix, tol: &DensityTolerance) -> Result<Self> {
        let report = check_density(&mat, tol);
        if report.passed() {
            Ok(Self { mat })
        } else {
            Err(Error::invalid(format!("not a density matrix: {}", report.failure_summary())))
        }
    }

    /// `|psi><psi|` for a normalized `psi`.
    pub fn pure(psi: &[C64]) -> Result<Self> {
        let norm = crate::cxmat::vec_norm(psi);
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::invalid("pure state vector must be nonzero and finite"));
        }
        let normalized: Vec<C64> = psi.iter().map(|z| z / norm).collect();
        Self::new(ComplexMatrix::outer(&normalized, &normalized)?)
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.mat
    }

    pub fn dim(&self) -> usize {
        self.mat.dim()
    }

    /// `tr(rho^2)`
    pub fn purity(&self) -> f64 {
        (&self.mat * &self.mat).trace().re
    }
}

impl fmt::Debug for DensityMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DensityMatrix({:?})", self.mat)
    }
}

/// `|g', n><g', n|`, whose Jaynes-Cummings block has every entry equal to 1/2.
pub fn paper_initial_state(p: &JCParams) -> Result<DensityMatrix> {
    p.validate()?;
    let mut m = ComplexMatrix::zeros(p.dim());
    let k = p.ground_index();
    m[(k, k)] = C64::new(1.0, 0.0);
    DensityMatrix::new(m)
}

/// The same initial condition expressed directly in the `{+, -}` block.
pub fn block_initial_state() -> DensityMatrix {
    let half = C64::new(0.5, 0.0);
    let m = ComplexMatrix::from_rows([[half, half], [half, half]]).expect("finite entries");
    DensityMatrix { mat: m }
}

/// `-i [H, rho] - (kappa / 2) [A, [A, rho]]`
pub fn lindblad_rhs(
    rho: &ComplexMatrix,
    h: &ComplexMatrix,
    a: &ComplexMatrix,
    kappa: f64,
) -> Result<ComplexMatrix> {
    if !(kappa >= 0.0) {
        return Err(Error::invalid(format!("kappa must be >= 0, got {kappa}")));
    }
    let unitary = h.commutator(rho)?.scale(-I);
    if kappa == 0.0 {
        a.commutator(rho)?; // dimension check only
        return Ok(unitary);
    }
    let inner = a.commutator(rho)?;
    let mut out = unitary;
    out.axpy(-0.5 * kappa, &a.commutator(&inner)?)?;
    Ok(out)
}

/// Right-hand side of the reduced four-equation system for the `{+, -}`
/// block (index 0 is `+`):
///
/// ```text
/// d rho_pp = -(k/4)(rho_pp - rho_mm)      d rho_mm = +(k/4)(rho_pp - rho_mm)
/// d rho_pm = (-iR - k/4) rho_pm + (k/4) rho_mp
/// d rho_mp = (+iR - k/4) rho_mp + (k/4) rho_pm
/// ```
pub fn block_rhs(rho2: &ComplexMatrix, rabi: f64, kappa: f64) -> Result<ComplexMatrix> {
    if rho2.dim() != 2 {
        return Err(Error::DimensionMismatch { left: rho2.dim(), right: 2 });
    }
    let q = kappa / 4.0;
    let (pp, pm, mp, mm) = (rho2[(0, 0)], rho2[(0, 1)], rho2[(1, 0)], rho2[(1, 1)]);
    let pop = (pp - mm) * q;
    let d_pm = pm * C64::new(-q, -rabi) + mp * q;
    let d_mp = mp * C64::new(-q, rabi) + pm * q;
    ComplexMatrix::from_rows([[-pop, d_pm], [d_mp, pop]])
}

/// Which evolution produced a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    NumericFull,
    NumericBlock,
    Analytic,
}

impl Source {
    pub fn as_str(&self) -> &'static str {
        match self {
            Source::NumericFull => "numeric_full",
            Source::NumericBlock => "numeric_block",
            Source::Analytic => "analytic",
        }
    }
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Source {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "numeric_full" => Ok(Source::NumericFull),
            "numeric_block" => Ok(Source::NumericBlock),
            "analytic" => Ok(Source::Analytic),
            other => Err(Error::invalid(format!("unknown trajectory source {other:?}"))),
        }
    }
}

/// Uniformly sampled `rho_pm(t)` together with the two populations.
#[derive(Debug, Clone, PartialEq)]
pub struct CoherenceTrajectory {
    pub t: Vec<f64>,
    pub rho_pm: Vec<C64>,
    pub rho_pp: Vec<f64>,
    pub rho_mm: Vec<f64>,
    pub source: Source,
}

impl CoherenceTrajectory {
    pub fn empty(source: Source) -> Self {
        Self { t: Vec::new(), rho_pm: Vec::new(), rho_pp: Vec::new(), rho_mm: Vec::new(), source }
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    fn push(&mut self, t: f64, block: &ComplexMatrix) {
        self.t.push(t);
        self.rho_pm.push(block[(0, 1)]);
        self.rho_pp.push(block[(0, 0)].re);
        self.rho_mm.push(block[(1, 1)].re);
    }

    /// Sample spacing; `None` with fewer than two samples.
    pub fn dt(&self) -> Option<f64> {
        match self.t.as_slice() {
            [a, b, ..] => Some(b - a),
            _ => None,
        }
    }

    /// Checks equal series lengths and a strictly increasing, uniform grid.
    pub fn validate(&self) -> Result<()> {
        let n = self.t.len();
        if self.rho_pm.len() != n || self.rho_pp.len() != n || self.rho_mm.len() != n {
            return Err(Error::invalid("trajectory series have unequal lengths"));
        }
        if n < 2 {
            return Ok(());
        }
        let span = self.t[n - 1] - self.t[0];
        let dt = span / (n - 1) as f64;
        if !(dt > 0.0) {
            return Err(Error::invalid("trajectory time grid is not strictly increasing"));
        }
        for (k, w) in self.t.windows(2).enumerate() {
            let step = w[1] - w[0];
            if !(step > 0.0) {
                return Err(Error::invalid(format!("time grid not increasing at sample {}", k + 1)));
            }
            if (step - dt).abs() > 1e-12 * dt.max(self.t[n - 1].abs()) {
                return Err(Error::invalid(format!("time grid not uniform at sample {}", k + 1)));
            }
        }
        Ok(())
    }

    /// Largest `|rho_pm|` difference against another trajectory on the same grid.
    pub fn max_coherence_diff(&self, other: &Self) -> Result<f64> {
        if self.len() != other.len() {
            return Err(Error::DimensionMismatch { left: self.len(), right: other.len() });
        }
        Ok(self.rho_pm.iter().zip(&other.rho_pm).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max))
    }
}

/// A master equation the integrator can step.
pub trait MasterEquation: Sync {
    fn rhs(&self, rho: &ComplexMatrix) -> Result<ComplexMatrix>;

    /// Projection of a state onto the `{+, -}` block.
    fn jce_block(&self, rho: &ComplexMatrix) -> Result<ComplexMatrix>;

    /// Population outside the n-excitation manifold.
    fn leakage(&self, rho: &ComplexMatrix) -> f64;

    /// `max(R, kappa)`, the scale the step size is judged against.
    fn rate_scale(&self) -> f64;

    fn rabi(&self) -> f64;

    fn kappa(&self) -> f64;

    fn source(&self) -> Source;

    fn initial_state(&self) -> Result<DensityMatrix>;
}

/// Evolution on the full truncated atom x Fock space.
#[derive(Debug, Clone)]
pub struct FullSpace {
    params: JCParams,
    hamiltonian: ComplexMatrix,
    occupancy: ComplexMatrix,
}

impl FullSpace {
    pub fn new(params: JCParams) -> Result<Self> {
        Ok(Self {
            hamiltonian: build_jc_hamiltonian(&params)?,
            occupancy: build_occupancy_operator(&params)?,
            params,
        })
    }

    pub fn params(&self) -> &JCParams {
        &self.params
    }

    pub fn hamiltonian(&self) -> &ComplexMatrix {
        &self.hamiltonian
    }

    pub fn occupancy(&self) -> &ComplexMatrix {
        &self.occupancy
    }
}

impl MasterEquation for FullSpace {
    fn rhs(&self, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
        lindblad_rhs(rho, &self.hamiltonian, &self.occupancy, self.params.kappa)
    }

    fn jce_block(&self, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
        to_jce_block(rho, &self.params)
    }

    fn leakage(&self, rho: &ComplexMatrix) -> f64 {
        let [gi, ei] = self.params.manifold_indices();
        (0..rho.dim()).filter(|&k| k != gi && k != ei).map(|k| rho[(k, k)].re.abs()).sum()
    }

    fn rate_scale(&self) -> f64 {
        self.params.rabi().max(self.params.kappa)
    }

    fn rabi(&self) -> f64 {
        self.params.rabi()
    }

    fn kappa(&self) -> f64 {
        self.params.kappa
    }

    fn source(&self) -> Source {
        Source::NumericFull
    }

    fn initial_state(&self) -> Result<DensityMatrix> {
        paper_initial_state(&self.params)
    }
}

/// Evolution of the 2x2 `{+, -}` block alone.
#[derive(Debug, Clone, Copy)]
pub struct BlockSpace {
    rabi: f64,
    kappa: f64,
}

impl BlockSpace {
    pub fn new(rabi: f64, kappa: f64) -> Result<Self> {
        if !(rabi.is_finite() && rabi > 0.0) {
            return Err(Error::invalid(format!("Rabi frequency must be > 0, got {rabi}")));
        }
        if !(kappa.is_finite() && kappa >= 0.0) {
            return Err(Error::invalid(format!("kappa must be >= 0, got {kappa}")));
        }
        Ok(Self { rabi, kappa })
    }
}

impl MasterEquation for BlockSpace {
    fn rhs(&self, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
        block_rhs(rho, self.rabi, self.kappa)
    }

    fn jce_block(&self, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
        Ok(rho.clone())
    }

    fn leakage(&self, _rho: &ComplexMatrix) -> f64 {
        0.0
    }

    fn rate_scale(&self) -> f64 {
        self.rabi.max(self.kappa)
    }

    fn rabi(&self) -> f64 {
        self.rabi
    }

    fn kappa(&self) -> f64 {
        self.kappa
    }

    fn source(&self) -> Source {
        Source::NumericBlock
    }

    fn initial_state(&self) -> Result<DensityMatrix> {
        Ok(block_initial_state())
    }
}

/// Upper bound on `max(R, kappa) * h` beyond which a warning is logged.
pub const STEP_WARN_LIMIT: f64 = 0.05;

/// Step-size rule: `h <= min(oscillation / R, damping / kappa)`.
///
/// The oscillating coherence needs the tighter bound to keep the global
/// RK4 phase error well below 1e-10 over ten Rabi periods; the fast damped
/// mode only needs `kappa * h` small enough to stay accurate while it dies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepPolicy {
    pub oscillation: f64,
    pub damping: f64,
}

impl Default for StepPolicy {
    fn default() -> Self {
        Self { oscillation: 0.0025, damping: STEP_WARN_LIMIT }
    }
}

impl StepPolicy {
    pub fn max_step(&self, rabi: f64, kappa: f64) -> f64 {
        let h_osc = self.oscillation / rabi;
        if kappa > 0.0 {
            h_osc.min(self.damping / kappa)
        } else {
            h_osc
        }
    }

    /// Number of RK4 steps between consecutive samples spaced `dt` apart.
    pub fn substeps(&self, rabi: f64, kappa: f64, dt: f64) -> usize {
        ((dt / self.max_step(rabi, kappa)) * (1.0 - 1e-12)).ceil().max(1.0) as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrateOptions {
    /// Record a sample every this many steps. Must divide the step count.
    pub record_every: usize,
    /// Re-validate the state after every step.
    pub validate: bool,
    pub tolerance: DensityTolerance,
    /// Bound on population leaking out of the n-manifold.
    pub leakage_tolerance: f64,
    pub keep_states: bool,
}

impl Default for IntegrateOptions {
    fn default() -> Self {
        Self {
            record_every: 1,
            validate: true,
            tolerance: DensityTolerance::default(),
            leakage_tolerance: 1e-12,
            keep_states: false,
        }
    }
}

/// Worst invariant defects seen over all validated steps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InvariantStats {
    pub steps_checked: usize,
    pub max_trace_defect: f64,
    pub max_hermiticity_defect: f64,
    pub min_eigenvalue: f64,
    pub max_leakage: f64,
    pub purity_drift: f64,
}

impl Default for InvariantStats {
    fn default() -> Self {
        Self {
            steps_checked: 0,
            max_trace_defect: 0.0,
            max_hermiticity_defect: 0.0,
            min_eigenvalue: f64::INFINITY,
            max_leakage: 0.0,
            purity_drift: 0.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Integration {
    pub trajectory: CoherenceTrajectory,
    /// States at the recorded samples, if requested.
    pub states: Option<Vec<ComplexMatrix>>,
    pub steps: usize,
    pub step_size: f64,
    pub stats: InvariantStats,
}

/// Classical fixed-step fourth-order Runge-Kutta from `t_span.0` to
/// `t_span.1` in `steps` equal steps.
pub fn rk4_integrate(
    eq: &dyn MasterEquation,
    rho0: &DensityMatrix,
    t_span: (f64, f64),
    steps: usize,
    opts: &IntegrateOptions,
) -> Result<Integration> {
    let (t0, t1) = t_span;
    if steps == 0 {
        return Err(Error::invalid("RK4 needs at least one step"));
    }
    if !(t0.is_finite() && t1.is_finite() && t1 > t0) {
        return Err(Error::invalid(format!("invalid time span ({t0}, {t1})")));
    }
    if opts.record_every == 0 || steps % opts.record_every != 0 {
        return Err(Error::invalid(format!(
            "record_every = {} must divide the step count {steps}",
            opts.record_every
        )));
    }
    let h = (t1 - t0) / steps as f64;
    let product = eq.rate_scale() * h;
    if product > STEP_WARN_LIMIT {
        log::warn!(
            "RK4 step h = {h:.3e} gives max(R, kappa) h = {product:.3} > {STEP_WARN_LIMIT}; accuracy will suffer"
        );
    }

    let mut rho = rho0.matrix().clone();
    let mut traj = CoherenceTrajectory::empty(eq.source());
    let mut states = opts.keep_states.then(Vec::new);
    let mut stats = InvariantStats::default();
    let purity0 = rho0.purity();

    let record = |rho: &ComplexMatrix, t: f64, traj: &mut CoherenceTrajectory, states: &mut Option<Vec<ComplexMatrix>>| -> Result<()> {
        traj.push(t, &eq.jce_block(rho)?);
        if let Some(s) = states.as_mut() {
            s.push(rho.clone());
        }
        Ok(())
    };

    record(&rho, t0, &mut traj, &mut states)?;
    for step in 1..=steps {
        rho = rk4_step(eq, &rho, h).map_err(|e| Error::Integration { step, reason: e.to_string() })?;
        if !rho.is_finite() {
            return Err(Error::Integration { step, reason: "state became non-finite".into() });
        }
        if opts.validate {
            check_step(eq, &rho, step, opts, &mut stats, purity0)?;
        }
        if step % opts.record_every == 0 {
            let t = t0 + (t1 - t0) * (step as f64 / steps as f64);
            record(&rho, t, &mut traj, &mut states)?;
        }
    }

    Ok(Integration { trajectory: traj, states, steps, step_size: h, stats })
}

fn check_step(
    eq: &dyn MasterEquation,
    rho: &ComplexMatrix,
    step: usize,
    opts: &IntegrateOptions,
    stats: &mut InvariantStats,
    purity0: f64,
) -> Result<()> {
    let report = check_density(rho, &opts.tolerance);
    let leakage = eq.leakage(rho);
    stats.steps_checked += 1;
    stats.max_trace_defect = stats.max_trace_defect.max(report.trace_defect);
    stats.max_hermiticity_defect = stats.max_hermiticity_defect.max(report.hermiticity_defect);
    stats.min_eigenvalue = stats.min_eigenvalue.min(report.min_eigenvalue);
    stats.max_leakage = stats.max_leakage.max(leakage);
    let purity = (rho * rho).trace().re;
    stats.purity_drift = stats.purity_drift.max((purity - purity0).abs());

    if !report.passed() {
        return Err(Error::Integration { step, reason: report.failure_summary() });
    }
    if leakage > opts.leakage_tolerance {
        return Err(Error::Integration {
            step,
            reason: format!("population {leakage:.3e} leaked out of the excitation manifold"),
        });
    }
    Ok(())
}

fn rk4_step(eq: &dyn MasterEquation, rho: &ComplexMatrix, h: f64) -> Result<ComplexMatrix> {
    let k1 = eq.rhs(rho)?;
    let mut y = rho.clone();
    y.axpy(0.5 * h, &k1)?;
    let k2 = eq.rhs(&y)?;
    y = rho.clone();
    y.axpy(0.5 * h, &k2)?;
    let k3 = eq.rhs(&y)?;
    y = rho.clone();
    y.axpy(h, &k3)?;
    let k4 = eq.rhs(&y)?;

    let mut next = rho.clone();
    next.axpy(h / 6.0, &k1)?;
    next.axpy(h / 3.0, &k2)?;
    next.axpy(h / 3.0, &k3)?;
    next.axpy(h / 6.0, &k4)?;
    Ok(next)
}

/// Upper bound on the total RK4 step count of one [`integrate_samples`] run.
pub const MAX_RK4_STEPS: usize = 100_000_000;

/// Integrates from `eq.initial_state()` on a uniform grid of `samples`
/// points over `[0, t_end]`, choosing the step count by `policy`.
pub fn integrate_samples(
    eq: &dyn MasterEquation,
    t_end: f64,
    samples: usize,
    policy: &StepPolicy,
    opts: &IntegrateOptions,
) -> Result<Integration> {
    if samples < 2 {
        return Err(Error::invalid("need at least two samples"));
    }
    let intervals = samples - 1;
    let dt = t_end / intervals as f64;
    let planned = (dt / policy.max_step(eq.rabi(), eq.kappa())).ceil() * intervals as f64;
    if !(planned <= MAX_RK4_STEPS as f64) {
        return Err(Error::Integration {
            step: 0,
            reason: format!("run needs ~{planned:.3e} RK4 steps, more than the budget of {MAX_RK4_STEPS}"),
        });
    }
    let substeps = policy.substeps(eq.rabi(), eq.kappa(), dt);
    let opts = IntegrateOptions { record_every: substeps, ..*opts };
    rk4_integrate(eq, &eq.initial_state()?, (0.0, t_end), intervals * substeps, &opts)
}

/// Zero matrix check used by tests and diagnostics.
pub fn is_zero(m: &ComplexMatrix) -> bool {
    m.as_slice().iter().all(|z| *z == ZERO)
}
