//! Operators of the resonant Jaynes-Cummings system on a truncated Fock space,
//! the Jaynes-Cummings eigenbasis, and a complex Jacobi eigensolver used to
//! check that basis independently.
//!
//! Units: hbar = 1, frequencies in rad/us, times in us.
//!
//! Basis ordering is atom-major: all ground-state Fock levels `|g', 0..=n_max>`
//! first, then the excited ones `|e', 0..=n_max>`.

use std::f64::consts::FRAC_1_SQRT_2;

use serde::{Deserialize, Serialize};

use crate::cxmat::{vec_norm, ComplexMatrix, C64, ONE, ZERO};
use crate::error::{Error, Result};

/// Physical parameters of the atom + cavity system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JCParams {
    /// Common resonance frequency of atom and cavity mode.
    pub omega: f64,
    /// Atom-field coupling constant.
    pub g: f64,
    /// Excitation number of the manifold `{|g', n>, |e', n-1>}`.
    pub n: usize,
    /// Measurement coupling.
    pub kappa: f64,
    /// Highest Fock level kept.
    pub n_max: usize,
}

impl JCParams {
    pub fn new(omega: f64, g: f64, n: usize, kappa: f64) -> Result<Self> {
        Self::with_truncation(omega, g, n, kappa, n + 2)
    }

    pub fn with_truncation(omega: f64, g: f64, n: usize, kappa: f64, n_max: usize) -> Result<Self> {
        let p = Self { omega, g, n, kappa, n_max };
        p.validate()?;
        Ok(p)
    }

    /// Parameters with a prescribed Rabi frequency `rabi = 2 g sqrt(n)`.
    pub fn from_rabi(omega: f64, rabi: f64, n: usize, kappa: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("excitation number n must be >= 1"));
        }
        Self::new(omega, rabi / (2.0 * (n as f64).sqrt()), n, kappa)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.omega.is_finite() {
            return Err(Error::invalid("omega must be finite"));
        }
        if !(self.g.is_finite() && self.g > 0.0) {
            return Err(Error::invalid(format!("coupling g must be finite and > 0, got {}", self.g)));
        }
        if self.n < 1 {
            return Err(Error::invalid("excitation number n must be >= 1"));
        }
        if !(self.kappa.is_finite() && self.kappa >= 0.0) {
            return Err(Error::invalid(format!(
                "measurement coupling kappa must be finite and >= 0, got {}",
                self.kappa
            )));
        }
        if self.n_max < self.n + 2 {
            return Err(Error::invalid(format!(
                "Fock truncation n_max = {} must be at least n + 2 = {}",
                self.n_max,
                self.n + 2
            )));
        }
        Ok(())
    }

    /// n-photon Rabi frequency `R = 2 g sqrt(n)`.
    pub fn rabi(&self) -> f64 {
        2.0 * self.g * (self.n as f64).sqrt()
    }

    pub fn with_kappa(mut self, kappa: f64) -> Result<Self> {
        self.kappa = kappa;
        self.validate()?;
        Ok(self)
    }

    pub fn fock_dim(&self) -> usize {
        self.n_max + 1
    }

    pub fn dim(&self) -> usize {
        2 * self.fock_dim()
    }

    pub fn index_of(&self, label: BasisLabel) -> usize {
        debug_assert!(label.photons <= self.n_max);
        label.atom as usize * self.fock_dim() + label.photons
    }

    pub fn label_of(&self, index: usize) -> BasisLabel {
        let atom = if index < self.fock_dim() { Atom::Ground } else { Atom::Excited };
        BasisLabel { atom, photons: index % self.fock_dim() }
    }

    /// `|g', n>`
    pub fn ground_index(&self) -> usize {
        self.index_of(BasisLabel::ground(self.n))
    }

    /// `|e', n - 1>`
    pub fn excited_index(&self) -> usize {
        self.index_of(BasisLabel::excited(self.n - 1))
    }

    /// Indices of the two bare states spanning the n-excitation manifold.
    pub fn manifold_indices(&self) -> [usize; 2] {
        [self.ground_index(), self.excited_index()]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Atom {
    Ground = 0,
    Excited = 1,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BasisLabel {
    pub atom: Atom,
    pub photons: usize,
}

impl BasisLabel {
    pub fn ground(photons: usize) -> Self {
        Self { atom: Atom::Ground, photons }
    }

    pub fn excited(photons: usize) -> Self {
        Self { atom: Atom::Excited, photons }
    }

    /// Total number of quanta (photons plus atomic excitation).
    pub fn excitations(&self) -> usize {
        self.photons + self.atom as usize
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenPair {
    pub value: f64,
    pub vector: Vec<C64>,
}

/// Truncated annihilation operator on `0..=n_max` photons.
fn annihilation(fock_dim: usize) -> ComplexMatrix {
    let mut a = ComplexMatrix::zeros(fock_dim);
    for m in 1..fock_dim {
        a[(m - 1, m)] = C64::new((m as f64).sqrt(), 0.0);
    }
    a
}

/// Atomic operators in the `(g', e')` ordering.
fn sigma_z() -> ComplexMatrix {
    let mut s = ComplexMatrix::zeros(2);
    s[(0, 0)] = -ONE;
    s[(1, 1)] = ONE;
    s
}

/// `|g'><e'|`
fn sigma_minus() -> ComplexMatrix {
    let mut s = ComplexMatrix::zeros(2);
    s[(0, 1)] = ONE;
    s
}

/// `H = (w/2) sz (x) 1 + 1 (x) w (a^dag a + 1/2) + g (a^dag sigma + a sigma^dag)`
pub fn build_jc_hamiltonian(p: &JCParams) -> Result<ComplexMatrix> {
    p.validate()?;
    let fd = p.fock_dim();
    let a = annihilation(fd);
    let a_dag = a.adjoint();
    let id_f = ComplexMatrix::identity(fd);
    let id_s = ComplexMatrix::identity(2);
    let sm = sigma_minus();
    let sp = sm.adjoint();

    let atom = sigma_z().kron(&id_f).scale_real(0.5 * p.omega);
    let number = &a_dag * &a;
    let field_op = &number + &id_f.scale_real(0.5);
    let field = id_s.kron(&field_op).scale_real(p.omega);
    let coupling = (&sm.kron(&a_dag) + &sp.kron(&a)).scale_real(p.g);

    Ok(&(&atom + &field) + &coupling)
}

/// Projector onto `|g', n>`.
pub fn build_occupancy_operator(p: &JCParams) -> Result<ComplexMatrix> {
    p.validate()?;
    let mut a = ComplexMatrix::zeros(p.dim());
    let k = p.ground_index();
    a[(k, k)] = ONE;
    Ok(a)
}

pub fn basis_vector(p: &JCParams, label: BasisLabel) -> Vec<C64> {
    let mut v = vec![ZERO; p.dim()];
    v[p.index_of(label)] = ONE;
    v
}

/// `|+>_n` and `|->_n`, the symmetric and antisymmetric combinations of
/// `|g', n>` and `|e', n-1>`, embedded in the full space.
pub fn jce_states(p: &JCParams) -> Result<(Vec<C64>, Vec<C64>)> {
    p.validate()?;
    let [gi, ei] = p.manifold_indices();
    let amp = C64::new(FRAC_1_SQRT_2, 0.0);
    let mut plus = vec![ZERO; p.dim()];
    let mut minus = vec![ZERO; p.dim()];
    plus[gi] = amp;
    plus[ei] = amp;
    minus[gi] = amp;
    minus[ei] = -amp;
    Ok((plus, minus))
}

/// `E_+- = n w +- sqrt(n) g`.
pub fn jce_eigenvalues(p: &JCParams) -> (f64, f64) {
    let n = p.n as f64;
    let split = n.sqrt() * p.g;
    (n * p.omega + split, n * p.omega - split)
}

/// Matrix elements `<s|op|s'>` for `s, s'` in `{+, -}`; index 0 is `+`.
///
/// Combines the four bare elements on the manifold directly, so entries that
/// are exact halves in the bare basis stay exact.
pub fn to_jce_block(op: &ComplexMatrix, p: &JCParams) -> Result<ComplexMatrix> {
    if op.dim() != p.dim() {
        return Err(Error::DimensionMismatch { left: op.dim(), right: p.dim() });
    }
    let [gi, ei] = p.manifold_indices();
    let (gg, ge, eg, ee) = (op[(gi, gi)], op[(gi, ei)], op[(ei, gi)], op[(ei, ei)]);
    let pp = (gg + ge + eg + ee) * 0.5;
    let pm = (gg - ge + eg - ee) * 0.5;
    let mp = (gg + ge - eg - ee) * 0.5;
    let mm = (gg - ge - eg + ee) * 0.5;
    ComplexMatrix::from_rows([[pp, pm], [mp, mm]])
}

/// Inverse of [`to_jce_block`]: embeds a 2x2 operator given in the `{+, -}`
/// basis into the full space (zero outside the n-manifold).
pub fn from_jce_block(block: &ComplexMatrix, p: &JCParams) -> Result<ComplexMatrix> {
    if block.dim() != 2 {
        return Err(Error::DimensionMismatch { left: block.dim(), right: 2 });
    }
    let (pp, pm, mp, mm) = (block[(0, 0)], block[(0, 1)], block[(1, 0)], block[(1, 1)]);
    let [gi, ei] = p.manifold_indices();
    let mut out = ComplexMatrix::zeros(p.dim());
    out[(gi, gi)] = (pp + pm + mp + mm) * 0.5;
    out[(gi, ei)] = (pp - pm + mp - mm) * 0.5;
    out[(ei, gi)] = (pp + pm - mp - mm) * 0.5;
    out[(ei, ei)] = (pp - pm - mp + mm) * 0.5;
    Ok(out)
}

/// Default convergence tolerance for [`jacobi_eigen`].
pub const JACOBI_TOL: f64 = 1e-12;
pub const JACOBI_MAX_SWEEPS: usize = 50;
const HERMITIAN_TOL: f64 = 1e-12;

/// Full eigendecomposition of a Hermitian matrix by cyclic complex Jacobi
/// rotations.
///
/// Every nonzero off-diagonal pair is rotated, row by row, until the
/// off-diagonal Frobenius norm drops below `tol` times the Frobenius norm of
/// the input. Eigenvalues come back ascending; each eigenvector has its
/// largest-magnitude component made real and positive.
pub fn jacobi_eigen(h: &ComplexMatrix, tol: f64) -> Result<Vec<EigenPair>> {
    if !(tol > 0.0) {
        return Err(Error::invalid(format!("Jacobi tolerance must be > 0, got {tol}")));
    }
    let scale = h.frobenius_norm();
    let defect = h.hermiticity_defect();
    if defect > HERMITIAN_TOL * scale.max(1.0) {
        return Err(Error::NotHermitian { defect });
    }

    let n = h.dim();
    let mut a = h.clone();
    let mut v = ComplexMatrix::identity(n);
    for i in 0..n {
        a[(i, i)] = C64::new(a[(i, i)].re, 0.0);
    }

    let threshold = tol * scale;
    let mut sweeps = 0;
    loop {
        let off = a.off_diagonal_norm();
        if off <= threshold {
            break;
        }
        if sweeps == JACOBI_MAX_SWEEPS {
            return Err(Error::NoConvergence { sweeps, off_norm: off });
        }
        for p in 0..n - 1 {
            for q in p + 1..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
        sweeps += 1;
    }

    let mut pairs: Vec<EigenPair> = (0..n)
        .map(|k| {
            let mut vector: Vec<C64> = (0..n).map(|i| v[(i, k)]).collect();
            fix_phase(&mut vector);
            EigenPair { value: a[(k, k)].re, vector }
        })
        .collect();
    pairs.sort_by(|x, y| x.value.total_cmp(&y.value));
    Ok(pairs)
}

/// One Jacobi rotation annihilating `a[p][q]`: `a <- U^dag a U`, `v <- v U`
/// with `U = [[c, s e^{i phi}], [-s e^{-i phi}, c]]` on the `(p, q)` plane.
fn rotate(a: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize) {
    let apq = a[(p, q)];
    let mag = apq.norm();
    if mag == 0.0 {
        return;
    }
    let phase = apq / mag;
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;

    let theta = (aqq - app) / (2.0 * mag);
    let t = if theta.is_finite() {
        theta.signum() / (theta.abs() + theta.hypot(1.0))
    } else {
        // |a_pq|^2 underflows against the diagonal gap
        mag / (aqq - app)
    };
    let c = 1.0 / t.hypot(1.0);
    let s = t * c;
    let s_phase = phase * s; // s e^{i phi}
    let s_phase_conj = s_phase.conj(); // s e^{-i phi}

    let n = a.dim();
    // columns: a <- a U
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * c - akq * s_phase_conj;
        a[(k, q)] = akp * s_phase + akq * c;
    }
    // rows: a <- U^dag a
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = apk * c - aqk * s_phase;
        a[(q, k)] = apk * s_phase_conj + aqk * c;
    }
    a[(p, p)] = C64::new(app - t * mag, 0.0);
    a[(q, q)] = C64::new(aqq + t * mag, 0.0);
    a[(p, q)] = ZERO;
    a[(q, p)] = ZERO;

    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * c - vkq * s_phase_conj;
        v[(k, q)] = vkp * s_phase + vkq * c;
    }
}

/// Rotates `v` by a global phase so its largest-magnitude component is real
/// and positive. Ties go to the lowest index.
pub fn fix_phase(v: &mut [C64]) {
    let mut best = 0;
    let mut best_mag = -1.0;
    for (i, z) in v.iter().enumerate() {
        // ties within roundoff resolve to the first index
        if z.norm() > best_mag * (1.0 + 1e-12) {
            best = i;
            best_mag = z.norm();
        }
    }
    if best_mag > 0.0 {
        let phase = v[best].conj() / best_mag;
        for z in v.iter_mut() {
            *z *= phase;
        }
    }
}

/// Reassembles `V diag(lambda) V^dag` from an eigendecomposition.
pub fn reconstruct(pairs: &[EigenPair]) -> Result<ComplexMatrix> {
    let n = pairs.first().map(|p| p.vector.len()).unwrap_or(0);
    let mut out = ComplexMatrix::zeros(n.max(1));
    for pair in pairs {
        let term = ComplexMatrix::outer(&pair.vector, &pair.vector)?.scale_real(pair.value);
        out.axpy(1.0, &term)?;
    }
    Ok(out)
}

pub fn residual_norm(h: &ComplexMatrix, value: f64, vector: &[C64]) -> Result<f64> {
    let hv = h.mat_vec(vector)?;
    let r: Vec<C64> = hv.iter().zip(vector).map(|(a, b)| a - b * value).collect();
    Ok(vec_norm(&r))
}
