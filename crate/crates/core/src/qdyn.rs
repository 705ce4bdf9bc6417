//! Dense time-dependent Schrodinger propagation on labeled tensor-product spaces.
//!
//! States live on a [`HilbertSpace`] built from an ordered list of labeled
//! factors; the flat index convention is row-major with factor 0 most
//! significant, matching a left-to-right Kronecker product. Hamiltonians are
//! sums of dense [`OperatorTerm`]s, each weighted by a scalar time envelope.
//! Decay is modeled by flagged anti-Hermitian terms (-i gamma/2 projectors),
//! so propagation follows the no-jump trajectory and the norm loss equals the
//! probability that a decay event occurred.
//!
//! The integrator is a fixed-step classical fourth-order Runge-Kutta scheme.
//! Step count is set by `dt_max`; convergence is checked externally by
//! halving the step (see the test suite), which keeps the propagation
//! strictly deterministic and linear in the initial state. Spaces here are
//! small (a dozen dimensions for gate work, a few thousand for reference
//! checks), so dense matrix assembly per step is the simple and fast choice.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use std::sync::Arc;
use thiserror::Error;

pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

/// Scalar time envelope multiplying an operator term, in angular units.
pub type Envelope = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Envelope that is `value` for the whole duration.
pub fn constant_envelope(value: f64) -> Envelope {
    Arc::new(move |_| value)
}

#[derive(Debug, Error)]
pub enum QdynError {
    #[error("hilbert space has no factors")]
    EmptySpace,
    #[error("factor `{0}` has dimension 0")]
    ZeroDimFactor(String),
    #[error("duplicate factor label `{0}`")]
    DuplicateLabel(String),
    #[error("{context}: expected dimension {expected}, got {got}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("operator term `{0}` is not Hermitian")]
    NotHermitian(String),
    #[error("operator term `{0}` is not anti-Hermitian")]
    NotAntiHermitian(String),
    #[error("state and Hamiltonian live on different spaces")]
    SpaceMismatch,
    #[error("step control: dt_max must be positive and finite")]
    BadStepControl,
    #[error("duration must be non-negative and finite")]
    BadDuration,
    #[error("non-finite amplitude at t = {0:.6e}; reduce dt_max or check the Hamiltonian")]
    NonFinite(f64),
    #[error("basis vectors are not orthonormal (deviation {0:.3e})")]
    BasisNotOrthonormal(f64),
    #[error("multi-index {0:?} out of range for space")]
    IndexOutOfRange(Vec<usize>),
}

/// Ordered tensor product of labeled finite-dimensional factors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HilbertSpace {
    factors: Vec<(String, usize)>,
}

impl HilbertSpace {
    pub fn new<S: Into<String>>(factors: Vec<(S, usize)>) -> Result<Self, QdynError> {
        if factors.is_empty() {
            return Err(QdynError::EmptySpace);
        }
        let factors: Vec<(String, usize)> =
            factors.into_iter().map(|(l, d)| (l.into(), d)).collect();
        for (label, dim) in &factors {
            if *dim == 0 {
                return Err(QdynError::ZeroDimFactor(label.clone()));
            }
        }
        for i in 0..factors.len() {
            for j in i + 1..factors.len() {
                if factors[i].0 == factors[j].0 {
                    return Err(QdynError::DuplicateLabel(factors[i].0.clone()));
                }
            }
        }
        Ok(Self { factors })
    }

    /// `n` factors of equal local dimension `d`, labeled `prefix0..prefixN-1`.
    pub fn uniform(d: usize, n: usize, prefix: &str) -> Result<Self, QdynError> {
        Self::new((0..n).map(|i| (format!("{prefix}{i}"), d)).collect())
    }

    pub fn factors(&self) -> &[(String, usize)] {
        &self.factors
    }

    pub fn n_factors(&self) -> usize {
        self.factors.len()
    }

    pub fn factor_dim(&self, k: usize) -> usize {
        self.factors[k].1
    }

    pub fn total_dim(&self) -> usize {
        self.factors.iter().map(|(_, d)| d).product()
    }

    /// Flat index of a multi-index, factor 0 most significant.
    pub fn flat_index(&self, multi: &[usize]) -> Result<usize, QdynError> {
        if multi.len() != self.factors.len()
            || multi.iter().zip(&self.factors).any(|(&i, (_, d))| i >= *d)
        {
            return Err(QdynError::IndexOutOfRange(multi.to_vec()));
        }
        let mut flat = 0;
        for (&i, (_, d)) in multi.iter().zip(&self.factors) {
            flat = flat * d + i;
        }
        Ok(flat)
    }

    pub fn multi_index(&self, mut flat: usize) -> Vec<usize> {
        let mut multi = vec![0; self.factors.len()];
        for (k, (_, d)) in self.factors.iter().enumerate().rev() {
            multi[k] = flat % d;
            flat /= d;
        }
        multi
    }
}

/// Complex amplitude vector on a [`HilbertSpace`].
#[derive(Debug, Clone)]
pub struct StateVector {
    space: HilbertSpace,
    amps: CVec,
}

impl StateVector {
    pub fn new(space: HilbertSpace, amps: CVec) -> Result<Self, QdynError> {
        if amps.len() != space.total_dim() {
            return Err(QdynError::DimensionMismatch {
                context: "state amplitudes",
                expected: space.total_dim(),
                got: amps.len(),
            });
        }
        Ok(Self { space, amps })
    }

    /// Computational basis state |multi[0], multi[1], ...>.
    pub fn basis_state(space: &HilbertSpace, multi: &[usize]) -> Result<Self, QdynError> {
        let flat = space.flat_index(multi)?;
        let mut amps = CVec::zeros(space.total_dim());
        amps[flat] = C64::new(1.0, 0.0);
        Ok(Self {
            space: space.clone(),
            amps,
        })
    }

    pub fn space(&self) -> &HilbertSpace {
        &self.space
    }

    pub fn amplitudes(&self) -> &CVec {
        &self.amps
    }

    pub fn amplitude(&self, flat: usize) -> C64 {
        self.amps[flat]
    }

    pub fn norm(&self) -> f64 {
        self.amps.norm()
    }

    /// <self|other>, conjugate-linear in `self`.
    pub fn inner(&self, other: &StateVector) -> C64 {
        self.amps.dotc(&other.amps)
    }

    /// Population of the flat basis index.
    pub fn population(&self, flat: usize) -> f64 {
        self.amps[flat].norm_sqr()
    }
}

fn max_abs_entry(m: &CMat) -> f64 {
    m.iter().map(|c| c.norm()).fold(0.0, f64::max)
}

/// One labeled summand of a Hamiltonian: a dense matrix, either Hermitian or
/// flagged anti-Hermitian (decay).
#[derive(Debug, Clone)]
pub struct OperatorTerm {
    label: String,
    matrix: CMat,
    decay: bool,
}

impl OperatorTerm {
    pub fn hermitian<S: Into<String>>(label: S, matrix: CMat) -> Result<Self, QdynError> {
        let label = label.into();
        let dev = max_abs_entry(&(&matrix - matrix.adjoint()));
        if dev > 1e-12 * (1.0 + max_abs_entry(&matrix)) {
            return Err(QdynError::NotHermitian(label));
        }
        Ok(Self {
            label,
            matrix,
            decay: false,
        })
    }

    /// Anti-Hermitian decay term; pass the full matrix, e.g. -i gamma/2 P.
    pub fn decay<S: Into<String>>(label: S, matrix: CMat) -> Result<Self, QdynError> {
        let label = label.into();
        let dev = max_abs_entry(&(&matrix + matrix.adjoint()));
        if dev > 1e-12 * (1.0 + max_abs_entry(&matrix)) {
            return Err(QdynError::NotAntiHermitian(label));
        }
        Ok(Self {
            label,
            matrix,
            decay: true,
        })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn is_decay(&self) -> bool {
        self.decay
    }
}

/// H(t) = sum_k envelope_k(t) * M_k on a fixed space, for t in [0, duration].
pub struct TimeDependentHamiltonian {
    space: HilbertSpace,
    terms: Vec<(OperatorTerm, Envelope)>,
    duration: f64,
}

impl TimeDependentHamiltonian {
    pub fn new(space: HilbertSpace, duration: f64) -> Result<Self, QdynError> {
        if !duration.is_finite() || duration < 0.0 {
            return Err(QdynError::BadDuration);
        }
        Ok(Self {
            space,
            terms: Vec::new(),
            duration,
        })
    }

    pub fn add_term(&mut self, term: OperatorTerm, envelope: Envelope) -> Result<(), QdynError> {
        let dim = self.space.total_dim();
        if term.matrix.nrows() != dim || term.matrix.ncols() != dim {
            return Err(QdynError::DimensionMismatch {
                context: "operator term",
                expected: dim,
                got: term.matrix.nrows(),
            });
        }
        self.terms.push((term, envelope));
        Ok(())
    }

    pub fn space(&self) -> &HilbertSpace {
        &self.space
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }

    pub fn terms(&self) -> impl Iterator<Item = &OperatorTerm> {
        self.terms.iter().map(|(t, _)| t)
    }

    pub fn has_decay(&self) -> bool {
        self.terms.iter().any(|(t, _)| t.decay)
    }

    /// Assembled matrix at time `t`.
    pub fn matrix_at(&self, t: f64) -> CMat {
        let dim = self.space.total_dim();
        let mut h = CMat::zeros(dim, dim);
        for (term, env) in &self.terms {
            let w = env(t);
            if w != 0.0 {
                h += &term.matrix * C64::new(w, 0.0);
            }
        }
        h
    }
}

/// Integrator control. The step count is `ceil(duration / dt_max)`; `rel_tol`
/// is the accuracy target the caller intends (used by norm-drift checks and
/// by external step-halving convergence tests). `samples` > 0 additionally
/// records that many equally spaced trajectory snapshots.
#[derive(Debug, Clone, Copy)]
pub struct StepControl {
    pub dt_max: f64,
    pub rel_tol: f64,
    pub samples: usize,
}

impl StepControl {
    pub fn new(dt_max: f64, rel_tol: f64) -> Self {
        Self {
            dt_max,
            rel_tol,
            samples: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct EvolutionResult {
    pub final_state: StateVector,
    /// 1 - |psi|^2, clamped to [0, 1]. Nonzero (beyond integrator noise) only
    /// when decay terms are present; then it is the decay-event probability.
    pub norm_loss: f64,
    pub trajectory_samples: Option<Vec<(f64, StateVector)>>,
    pub step_count: usize,
}

/// Propagate `initial` under `h` for the full duration with fixed-step RK4.
pub fn evolve(
    initial: &StateVector,
    h: &TimeDependentHamiltonian,
    ctl: &StepControl,
) -> Result<EvolutionResult, QdynError> {
    if initial.space != h.space {
        return Err(QdynError::SpaceMismatch);
    }
    if !ctl.dt_max.is_finite() || ctl.dt_max <= 0.0 {
        return Err(QdynError::BadStepControl);
    }
    let duration = h.duration;
    let n_steps = if duration == 0.0 {
        0
    } else {
        (duration / ctl.dt_max).ceil() as usize
    };
    let minus_i = C64::new(0.0, -1.0);
    let mut psi = initial.amps.clone();
    let mut samples: Option<Vec<(f64, StateVector)>> = if ctl.samples > 0 {
        let mut v = Vec::with_capacity(ctl.samples + 1);
        v.push((0.0, initial.clone()));
        Some(v)
    } else {
        None
    };

    if n_steps > 0 {
        let dt = duration / n_steps as f64;
        let half = C64::new(0.5 * dt, 0.0);
        let mut h_t = h.matrix_at(0.0);
        for step in 0..n_steps {
            let t = step as f64 * dt;
            let h_mid = h.matrix_at(t + 0.5 * dt);
            let h_end = h.matrix_at(t + dt);
            let k1 = (&h_t * &psi) * minus_i;
            let k2 = (&h_mid * &(&psi + &k1 * half)) * minus_i;
            let k3 = (&h_mid * &(&psi + &k2 * half)) * minus_i;
            let k4 = (&h_end * &(&psi + &k3 * C64::new(dt, 0.0))) * minus_i;
            psi += (k1 + k2 * C64::new(2.0, 0.0) + k3 * C64::new(2.0, 0.0) + k4)
                * C64::new(dt / 6.0, 0.0);
            h_t = h_end;

            let nsq = psi.norm_squared();
            if !nsq.is_finite() {
                return Err(QdynError::NonFinite(t + dt));
            }
            if let Some(v) = samples.as_mut() {
                let done = step + 1;
                if done * ctl.samples / n_steps > step * ctl.samples / n_steps {
                    let state = StateVector {
                        space: initial.space.clone(),
                        amps: psi.clone(),
                    };
                    v.push((done as f64 * dt, state));
                }
            }
        }
    }

    let norm_loss = (1.0 - psi.norm_squared()).clamp(0.0, 1.0);
    Ok(EvolutionResult {
        final_state: StateVector {
            space: initial.space.clone(),
            amps: psi,
        },
        norm_loss,
        trajectory_samples: samples,
        step_count: n_steps,
    })
}

/// Matrix of overlaps M[j][k] = <basis_j | U | basis_k> obtained by evolving
/// each basis vector. With no decay terms and no leakage out of the spanned
/// subspace, M is unitary to integrator tolerance.
pub fn extract_unitary(
    h: &TimeDependentHamiltonian,
    basis: &[StateVector],
    ctl: &StepControl,
) -> Result<CMat, QdynError> {
    if basis.is_empty() {
        return Err(QdynError::DimensionMismatch {
            context: "basis",
            expected: 1,
            got: 0,
        });
    }
    let mut worst = 0.0f64;
    for (i, bi) in basis.iter().enumerate() {
        if bi.space != h.space {
            return Err(QdynError::SpaceMismatch);
        }
        for (j, bj) in basis.iter().enumerate() {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((bi.inner(bj).norm() - target).abs());
        }
    }
    if worst > 1e-10 {
        return Err(QdynError::BasisNotOrthonormal(worst));
    }
    let k = basis.len();
    let mut m = CMat::zeros(k, k);
    for (col, bk) in basis.iter().enumerate() {
        let evolved = evolve(bk, h, ctl)?;
        for (row, bj) in basis.iter().enumerate() {
            m[(row, col)] = bj.inner(&evolved.final_state);
        }
    }
    Ok(m)
}

/// Average gate fidelity (|Tr(U_ideal^dag U_actual)|^2 + Tr(U_actual^dag U_actual)) / (d(d+1)).
///
/// `u_ideal` is assumed unitary; `u_actual` may be sub-unitary (leakage or
/// decay), which lowers the trace-overlap and the Tr(U^dag U) term together.
pub fn average_gate_fidelity(u_actual: &CMat, u_ideal: &CMat) -> Result<f64, QdynError> {
    let d = u_ideal.nrows();
    if u_ideal.ncols() != d || u_actual.nrows() != d || u_actual.ncols() != d {
        return Err(QdynError::DimensionMismatch {
            context: "gate fidelity operands",
            expected: d,
            got: u_actual.nrows(),
        });
    }
    let tr_cross = (u_ideal.adjoint() * u_actual).trace();
    let tr_self = (u_actual.adjoint() * u_actual).trace().re;
    Ok((tr_cross.norm_sqr() + tr_self) / (d as f64 * (d as f64 + 1.0)))
}

/// |i><j| on a `dim`-dimensional factor.
pub fn ketbra(dim: usize, i: usize, j: usize) -> CMat {
    let mut m = CMat::zeros(dim, dim);
    m[(i, j)] = C64::new(1.0, 0.0);
    m
}

/// Embed a single-factor operator at position `factor_idx`, identity elsewhere.
pub fn embed_operator(
    space: &HilbertSpace,
    factor_idx: usize,
    local: &CMat,
) -> Result<CMat, QdynError> {
    let d = space.factor_dim(factor_idx);
    if local.nrows() != d || local.ncols() != d {
        return Err(QdynError::DimensionMismatch {
            context: "embedded operator",
            expected: d,
            got: local.nrows(),
        });
    }
    let left: usize = space.factors()[..factor_idx].iter().map(|(_, d)| d).product();
    let right: usize = space.factors()[factor_idx + 1..]
        .iter()
        .map(|(_, d)| d)
        .product();
    let eye_l = CMat::identity(left, left);
    let eye_r = CMat::identity(right, right);
    Ok(eye_l.kronecker(local).kronecker(&eye_r))
}
