//! Exact-diagonalization ground states of short spin chains and the
//! ancilla-mediated weak-measurement channel acting on them.
//!
//! Two models are built term by term as real symmetric sparse matrices:
//!
//! * XXZ qubit chain, H = -sum_j [X_j X_{j+1} + Y_j Y_{j+1} + A Z_j Z_{j+1}]
//!   (A is the anisotropy; the symbol avoids clashing with gate detunings).
//! * Three-state Potts chain, H = -sum_j (J U_j Udag_{j+1} + J Udag_j U_{j+1}
//!   + h (V_j + Vdag_j)) with U the cyclic shift |k> -> |k+1> and
//!   V = diag(1, w, w^2), w = exp(2 pi i / 3). Both bond terms and the field
//!   term are real in the computational basis, so the matrix stays f64.
//!
//! Bond sums run over nearest-neighbour pairs (wrapping when periodic); the
//! field term acts on every site, which is what makes the single-site Potts
//! spectrum {-2, +1, +1} well defined. Ground states come from dense
//! symmetric diagonalization below dimension 512 and from a restarted,
//! fully reorthogonalized Lanczos iteration with deflation above it.
//!
//! The weak measurement couples each chosen system site to a fresh ancilla
//! prepared in a given superposition, applies the diagonal controlled phase
//! U_CP |k_s, k_a> = exp(i theta g(k_s) k_a) |k_s, k_a>, and reads the
//! ancilla out in the X (Fourier) basis. Tracing the ancilla gives one
//! diagonal Kraus operator per outcome; theta = 0 is the identity channel
//! and theta = pi with a |+> ancilla is projective.

use crate::qdyn::{HilbertSpace, StateVector};
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use std::collections::BTreeMap;
use std::f64::consts::PI;
use thiserror::Error;

pub const MAX_XXZ_SITES: usize = 14;
pub const MAX_POTTS_SITES: usize = 9;
/// Below this dimension eigensolves go dense.
pub const DENSE_EIG_CUTOFF: usize = 512;

#[derive(Debug, Error)]
pub enum CritError {
    #[error("{model} chain with {n} sites exceeds the supported maximum {max}")]
    SizeLimit {
        model: &'static str,
        n: usize,
        max: usize,
    },
    #[error("invalid spec: {0}")]
    BadSpec(String),
    #[error("eigensolver converged {achieved} of {wanted} states")]
    NonConvergence { achieved: usize, wanted: usize },
    #[error("post-selected outcome has probability {prob:.3e}, below 1e-14")]
    MeasureZeroOutcome { prob: f64 },
    #[error("operator does not match the state's local dimension")]
    DimensionMismatch,
    #[error(transparent)]
    Qdyn(#[from] crate::qdyn::QdynError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ChainModel {
    Xxz { anisotropy: f64 },
    Potts3 { j: f64, h: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundary {
    Open,
    Periodic,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinChainSpec {
    pub model: ChainModel,
    pub n_sites: usize,
    pub boundary: Boundary,
}

impl SpinChainSpec {
    pub fn local_dim(&self) -> usize {
        match self.model {
            ChainModel::Xxz { .. } => 2,
            ChainModel::Potts3 { .. } => 3,
        }
    }

    pub fn dim(&self) -> usize {
        self.local_dim().pow(self.n_sites as u32)
    }

    pub fn validate(&self) -> Result<(), CritError> {
        if self.n_sites == 0 {
            return Err(CritError::BadSpec("chain needs at least one site".into()));
        }
        match self.model {
            ChainModel::Xxz { anisotropy } => {
                if !anisotropy.is_finite() {
                    return Err(CritError::BadSpec("anisotropy must be finite".into()));
                }
                if self.n_sites > MAX_XXZ_SITES {
                    return Err(CritError::SizeLimit {
                        model: "xxz",
                        n: self.n_sites,
                        max: MAX_XXZ_SITES,
                    });
                }
            }
            ChainModel::Potts3 { j, h } => {
                if !j.is_finite() || !h.is_finite() {
                    return Err(CritError::BadSpec("couplings must be finite".into()));
                }
                if self.n_sites > MAX_POTTS_SITES {
                    return Err(CritError::SizeLimit {
                        model: "potts3",
                        n: self.n_sites,
                        max: MAX_POTTS_SITES,
                    });
                }
            }
        }
        Ok(())
    }

    /// Nearest-neighbour bonds (j, j+1), wrapping when periodic. A single
    /// site has no bonds under either boundary.
    fn bonds(&self) -> Vec<(usize, usize)> {
        let n = self.n_sites;
        if n < 2 {
            return Vec::new();
        }
        match self.boundary {
            Boundary::Open => (0..n - 1).map(|j| (j, j + 1)).collect(),
            Boundary::Periodic => (0..n).map(|j| (j, (j + 1) % n)).collect(),
        }
    }
}

/// Real symmetric sparse Hamiltonian in CSR form.
#[derive(Debug, Clone)]
pub struct SpinHamiltonian {
    local_dim: usize,
    n_sites: usize,
    dim: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<u32>,
    vals: Vec<f64>,
}

impl SpinHamiltonian {
    fn from_rows(local_dim: usize, n_sites: usize, rows: Vec<BTreeMap<u32, f64>>) -> Self {
        let dim = rows.len();
        let mut row_ptr = Vec::with_capacity(dim + 1);
        let mut col_idx = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for row in rows {
            for (c, v) in row {
                if v != 0.0 {
                    col_idx.push(c);
                    vals.push(v);
                }
            }
            row_ptr.push(col_idx.len());
        }
        Self {
            local_dim,
            n_sites,
            dim,
            row_ptr,
            col_idx,
            vals,
        }
    }

    pub fn identity(local_dim: usize, n_sites: usize) -> Self {
        let dim = local_dim.pow(n_sites as u32);
        let rows = (0..dim)
            .map(|i| BTreeMap::from([(i as u32, 1.0)]))
            .collect();
        Self::from_rows(local_dim, n_sites, rows)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn local_dim(&self) -> usize {
        self.local_dim
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.dim);
        debug_assert_eq!(y.len(), self.dim);
        for (r, yr) in y.iter_mut().enumerate() {
            let mut acc = 0.0;
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.vals[k] * x[self.col_idx[k] as usize];
            }
            *yr = acc;
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for r in 0..self.dim {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                m[(r, self.col_idx[k] as usize)] = self.vals[k];
            }
        }
        m
    }

    /// Max row sum of absolute values; an upper bound on the spectral norm.
    pub fn infinity_norm(&self) -> f64 {
        (0..self.dim)
            .map(|r| {
                self.vals[self.row_ptr[r]..self.row_ptr[r + 1]]
                    .iter()
                    .map(|v| v.abs())
                    .sum()
            })
            .fold(0.0, f64::max)
    }
}

fn site_stride(local_dim: usize, n_sites: usize, site: usize) -> usize {
    local_dim.pow((n_sites - 1 - site) as u32)
}

fn digit(idx: usize, stride: usize, local_dim: usize) -> usize {
    idx / stride % local_dim
}

/// Assemble the spin-chain Hamiltonian for a validated spec.
pub fn build_hamiltonian(spec: &SpinChainSpec) -> Result<SpinHamiltonian, CritError> {
    spec.validate()?;
    let ld = spec.local_dim();
    let n = spec.n_sites;
    let dim = spec.dim();
    let mut rows: Vec<BTreeMap<u32, f64>> = vec![BTreeMap::new(); dim];
    let mut add = |r: usize, c: usize, v: f64| {
        if v != 0.0 {
            *rows[r].entry(c as u32).or_insert(0.0) += v;
        }
    };
    match spec.model {
        ChainModel::Xxz { anisotropy } => {
            for (a, b) in spec.bonds() {
                let (sa, sb) = (site_stride(ld, n, a), site_stride(ld, n, b));
                for idx in 0..dim {
                    let (ka, kb) = (digit(idx, sa, ld), digit(idx, sb, ld));
                    // Z eigenvalue is +1 for |0>, -1 for |1>
                    let (za, zb) = (1.0 - 2.0 * ka as f64, 1.0 - 2.0 * kb as f64);
                    add(idx, idx, -anisotropy * za * zb);
                    // XX + YY = 2 (|01><10| + |10><01|) on the bond
                    if ka != kb {
                        let target = (idx as isize
                            + sa as isize * (1 - 2 * ka as isize)
                            + sb as isize * (1 - 2 * kb as isize))
                            as usize;
                        add(idx, target, -2.0);
                    }
                }
            }
        }
        ChainModel::Potts3 { j, h } => {
            // on-site field -h (V + Vdag) = -h diag(2, -1, -1)
            for s in 0..n {
                let stride = site_stride(ld, n, s);
                for idx in 0..dim {
                    let k = digit(idx, stride, ld);
                    let field = if k == 0 { 2.0 } else { -1.0 };
                    add(idx, idx, -h * field);
                }
            }
            for (a, b) in spec.bonds() {
                let (sa, sb) = (site_stride(ld, n, a), site_stride(ld, n, b));
                for idx in 0..dim {
                    let (ka, kb) = (digit(idx, sa, ld), digit(idx, sb, ld));
                    // U_a Udag_b sends |ka, kb> to |ka+1, kb-1>
                    let up = ((ka + 1) % 3) as isize - ka as isize;
                    let dn = ((kb + 2) % 3) as isize - kb as isize;
                    let t1 = (idx as isize + sa as isize * up + sb as isize * dn) as usize;
                    add(t1, idx, -j);
                    // Udag_a U_b sends |ka, kb> to |ka-1, kb+1>
                    let dn_a = ((ka + 2) % 3) as isize - ka as isize;
                    let up_b = ((kb + 1) % 3) as isize - kb as isize;
                    let t2 = (idx as isize + sa as isize * dn_a + sb as isize * up_b) as usize;
                    add(t2, idx, -j);
                }
            }
        }
    }
    Ok(SpinHamiltonian::from_rows(ld, n, rows))
}

#[derive(Debug, Clone)]
pub struct GroundStateResult {
    pub energy: f64,
    /// The k lowest eigenvalues in ascending order.
    pub energies: Vec<f64>,
    pub state: StateVector,
    /// E_1 - E_0, degenerate pairs report ~0.
    pub gap: f64,
    /// Gaps below this are numerically indistinguishable from degeneracy.
    pub degeneracy_tolerance: f64,
    /// ||H psi - E psi|| for the returned ground vector.
    pub residual: f64,
}

fn dense_lowest(h: &SpinHamiltonian, k: usize) -> (Vec<f64>, Vec<DVector<f64>>) {
    let eig = SymmetricEigen::new(h.to_dense());
    let mut order: Vec<usize> = (0..h.dim()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let energies = order.iter().take(k).map(|&i| eig.eigenvalues[i]).collect();
    let vectors = order
        .iter()
        .take(k)
        .map(|&i| eig.eigenvectors.column(i).into_owned())
        .collect();
    (energies, vectors)
}

fn orthogonalize(w: &mut DVector<f64>, basis: &[DVector<f64>]) {
    for u in basis {
        let c = u.dot(w);
        w.axpy(-c, u, 1.0);
    }
}

/// Restarted Lanczos with full reorthogonalization; converged eigenpairs are
/// deflated so degenerate levels are found one copy at a time.
fn lanczos_lowest(
    h: &SpinHamiltonian,
    k: usize,
    tol: f64,
) -> Result<(Vec<f64>, Vec<DVector<f64>>), CritError> {
    let dim = h.dim();
    let mut rng = ChaCha12Rng::seed_from_u64(0x6c616e63);
    let mut conv_vals: Vec<f64> = Vec::new();
    let mut conv_vecs: Vec<DVector<f64>> = Vec::new();
    let m_max = dim.min(140);
    let mut start: Option<DVector<f64>> = None;
    let mut restarts = 0usize;
    while conv_vecs.len() < k {
        restarts += 1;
        if restarts > 400 {
            return Err(CritError::NonConvergence {
                achieved: conv_vecs.len(),
                wanted: k,
            });
        }
        let mut v = start.take().unwrap_or_else(|| {
            DVector::from_fn(dim, |_, _| rng.gen::<f64>() - 0.5)
        });
        orthogonalize(&mut v, &conv_vecs);
        let nv = v.norm();
        if nv < 1e-12 {
            continue; // random vector fell inside the converged span
        }
        v /= nv;
        let mut basis: Vec<DVector<f64>> = vec![v];
        let mut alphas: Vec<f64> = Vec::new();
        let mut betas: Vec<f64> = Vec::new();
        let mut scratch = vec![0.0; dim];
        for j in 0..m_max {
            h.matvec(basis[j].as_slice(), &mut scratch);
            let mut w = DVector::from_column_slice(&scratch);
            orthogonalize(&mut w, &conv_vecs);
            let alpha = basis[j].dot(&w);
            alphas.push(alpha);
            // two-pass full reorthogonalization keeps the basis clean
            orthogonalize(&mut w, &basis);
            orthogonalize(&mut w, &basis);
            orthogonalize(&mut w, &conv_vecs);
            let beta = w.norm();
            if beta < 1e-13 * (1.0 + alpha.abs()) || j + 1 == m_max {
                break;
            }
            betas.push(beta);
            basis.push(w / beta);
        }
        let m = alphas.len();
        let mut t = DMatrix::zeros(m, m);
        for i in 0..m {
            t[(i, i)] = alphas[i];
            if i + 1 < m {
                t[(i, i + 1)] = betas[i];
                t[(i + 1, i)] = betas[i];
            }
        }
        let teig = SymmetricEigen::new(t);
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&a, &b| teig.eigenvalues[a].total_cmp(&teig.eigenvalues[b]));
        let mut harvested = false;
        for &col in &order {
            if conv_vecs.len() >= k {
                break;
            }
            let mut x = DVector::zeros(dim);
            for (i, b) in basis.iter().enumerate() {
                x.axpy(teig.eigenvectors[(i, col)], b, 1.0);
            }
            orthogonalize(&mut x, &conv_vecs);
            let nx = x.norm();
            if nx < 1e-8 {
                continue;
            }
            x /= nx;
            let lambda = teig.eigenvalues[col];
            h.matvec(x.as_slice(), &mut scratch);
            let mut res = DVector::from_column_slice(&scratch);
            res.axpy(-lambda, &x, 1.0);
            // deflated operator: residual components along converged
            // eigenvectors are artifacts of the projection
            orthogonalize(&mut res, &conv_vecs);
            if res.norm() < tol {
                conv_vals.push(lambda);
                conv_vecs.push(x);
                harvested = true;
            } else {
                if !harvested {
                    start = Some(x); // restart towards the lowest unconverged
                }
                break;
            }
        }
    }
    Ok((conv_vals, conv_vecs))
}

/// Lowest k_states eigenpairs of a chain Hamiltonian; dense below
/// DENSE_EIG_CUTOFF, deflated Lanczos above.
pub fn ground_state(h: &SpinHamiltonian, k_states: usize) -> Result<GroundStateResult, CritError> {
    if k_states < 2 {
        return Err(CritError::BadSpec("k_states must be at least 2".into()));
    }
    let k = k_states.min(h.dim());
    let scale = h.infinity_norm().max(1.0);
    let (energies, vectors) = if h.dim() < DENSE_EIG_CUTOFF {
        dense_lowest(h, k)
    } else {
        lanczos_lowest(h, k, 1e-11 * scale)?
    };
    let ground = &vectors[0];
    let mut scratch = vec![0.0; h.dim()];
    h.matvec(ground.as_slice(), &mut scratch);
    let mut res = DVector::from_column_slice(&scratch);
    res.axpy(-energies[0], ground, 1.0);
    let residual = res.norm();
    let space = HilbertSpace::uniform(h.local_dim(), h.n_sites(), "site")?;
    let amps = DVector::from_iterator(h.dim(), ground.iter().map(|&v| C64::new(v, 0.0)));
    let state = StateVector::new(space, amps)?;
    let gap = if k >= 2 {
        (energies[1] - energies[0]).max(0.0)
    } else {
        0.0
    };
    Ok(GroundStateResult {
        energy: energies[0],
        gap,
        degeneracy_tolerance: 1e-8 * scale,
        residual,
        state,
        energies,
    })
}

/// How the controlled phase reads the system site: a phase on one projector
/// level, or a clock phase exp(i theta k) growing with the level index.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CouplingOp {
    ExcitedProjector { level: usize },
    ClockPhase,
}

impl CouplingOp {
    fn weight(&self, level: usize) -> f64 {
        match self {
            CouplingOp::ExcitedProjector { level: l } => (level == *l) as u8 as f64,
            CouplingOp::ClockPhase => level as f64,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum OutcomePolicy {
    /// Draw one outcome pattern from the exact distribution.
    Sample,
    /// Condition on a fixed outcome pattern (one entry per measured site).
    PostSelect(Vec<u8>),
}

#[derive(Debug, Clone)]
pub struct WeakMeasurementSpec {
    /// Controlled-phase angle in [0, pi].
    pub theta: f64,
    /// System sites measured, each through its own ancilla.
    pub sites: Vec<usize>,
    /// Ancilla preparations, one amplitude vector (length 2 or 3) per site.
    pub ancilla_prep: Vec<Vec<C64>>,
    pub coupling: CouplingOp,
    pub policy: OutcomePolicy,
}

impl WeakMeasurementSpec {
    pub fn validate(&self, local_dim: usize, n_sites: usize) -> Result<(), CritError> {
        if !(0.0..=PI).contains(&self.theta) {
            return Err(CritError::BadSpec(format!(
                "theta {} outside [0, pi]",
                self.theta
            )));
        }
        if self.sites.is_empty() {
            return Err(CritError::BadSpec("no sites to measure".into()));
        }
        let mut seen = std::collections::BTreeSet::new();
        for &s in &self.sites {
            if s >= n_sites {
                return Err(CritError::BadSpec(format!(
                    "site {s} out of range for {n_sites} sites"
                )));
            }
            if !seen.insert(s) {
                return Err(CritError::BadSpec(format!("site {s} measured twice")));
            }
        }
        if self.ancilla_prep.len() != self.sites.len() {
            return Err(CritError::BadSpec(
                "one ancilla preparation required per measured site".into(),
            ));
        }
        for prep in &self.ancilla_prep {
            if prep.len() != 2 && prep.len() != 3 {
                return Err(CritError::BadSpec(
                    "ancilla preparation must have 2 or 3 amplitudes".into(),
                ));
            }
            let norm: f64 = prep.iter().map(|a| a.norm_sqr()).sum();
            if (norm - 1.0).abs() > 1e-10 {
                return Err(CritError::BadSpec(format!(
                    "ancilla preparation norm^2 = {norm}, expected 1"
                )));
            }
        }
        if let CouplingOp::ExcitedProjector { level } = self.coupling {
            if level >= local_dim {
                return Err(CritError::BadSpec(format!(
                    "projector level {level} outside local dimension {local_dim}"
                )));
            }
        }
        if let OutcomePolicy::PostSelect(pattern) = &self.policy {
            if pattern.len() != self.sites.len() {
                return Err(CritError::BadSpec(
                    "post-selection pattern length must match measured sites".into(),
                ));
            }
            for (m, prep) in pattern.iter().zip(&self.ancilla_prep) {
                if *m as usize >= prep.len() {
                    return Err(CritError::BadSpec(format!(
                        "outcome {m} outside the ancilla dimension {}",
                        prep.len()
                    )));
                }
            }
        }
        Ok(())
    }

    /// Per-site Kraus diagonals: kraus[i][m][v] is the factor an amplitude
    /// with system level v at sites[i] picks up when that ancilla reads m.
    /// K_m = <xtilde_m| U_CP |prep>, with |xtilde_m> the X-basis state.
    fn kraus_tables(&self, local_dim: usize) -> Vec<Vec<Vec<C64>>> {
        self.ancilla_prep
            .iter()
            .map(|prep| {
                let da = prep.len();
                let scale = (da as f64).sqrt().recip();
                (0..da)
                    .map(|m| {
                        (0..local_dim)
                            .map(|v| {
                                let g = self.coupling.weight(v);
                                let mut acc = C64::new(0.0, 0.0);
                                for (ka, amp) in prep.iter().enumerate() {
                                    let phase = 2.0 * PI * (m * ka) as f64 / da as f64
                                        + self.theta * g * ka as f64;
                                    acc += amp * C64::new(0.0, phase).exp();
                                }
                                acc * scale
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct PostSelectionStats {
    /// Probability of every outcome pattern (one entry per measured site).
    pub outcome_probabilities: BTreeMap<Vec<u8>, f64>,
    pub selected_outcome: Vec<u8>,
    /// Renormalized conditional state for the selected outcome.
    pub selected_state: StateVector,
    /// Probability of the selected outcome.
    pub success_probability: f64,
}

fn uniform_local_dim(state: &StateVector) -> Result<usize, CritError> {
    let factors = state.space().factors();
    let ld = factors[0].1;
    if factors.iter().any(|(_, d)| *d != ld) {
        return Err(CritError::DimensionMismatch);
    }
    Ok(ld)
}

fn enumerate_patterns(radices: &[usize]) -> Vec<Vec<u8>> {
    let mut patterns = vec![Vec::new()];
    for &r in radices {
        patterns = patterns
            .into_iter()
            .flat_map(|p| {
                (0..r as u8).map(move |m| {
                    let mut q = p.clone();
                    q.push(m);
                    q
                })
            })
            .collect();
    }
    patterns
}

/// Amplitudes after applying the diagonal Kraus product for one pattern.
fn apply_kraus_pattern(
    amps: &DVector<C64>,
    ld: usize,
    n: usize,
    sites: &[usize],
    tables: &[Vec<Vec<C64>>],
    pattern: &[u8],
) -> DVector<C64> {
    let mut out = amps.clone();
    for ((&site, table), &m) in sites.iter().zip(tables).zip(pattern) {
        let stride = site_stride(ld, n, site);
        let diag = &table[m as usize];
        for (idx, a) in out.iter_mut().enumerate() {
            *a *= diag[digit(idx, stride, ld)];
        }
    }
    out
}

/// Ancilla-mediated weak measurement of `state` at the spec's sites. The
/// seed drives outcome sampling when the policy is Sample; post-selection
/// is deterministic and fails on outcomes below probability 1e-14.
pub fn weak_measure(
    state: &StateVector,
    spec: &WeakMeasurementSpec,
    seed: u64,
) -> Result<PostSelectionStats, CritError> {
    let ld = uniform_local_dim(state)?;
    let n = state.space().n_factors();
    spec.validate(ld, n)?;
    let tables = spec.kraus_tables(ld);
    let radices: Vec<usize> = spec.ancilla_prep.iter().map(Vec::len).collect();
    let patterns = enumerate_patterns(&radices);
    let mut probabilities = BTreeMap::new();
    for pattern in &patterns {
        let out = apply_kraus_pattern(state.amplitudes(), ld, n, &spec.sites, &tables, pattern);
        probabilities.insert(pattern.clone(), out.norm_squared());
    }
    let selected = match &spec.policy {
        OutcomePolicy::PostSelect(pattern) => pattern.clone(),
        OutcomePolicy::Sample => {
            let total: f64 = probabilities.values().sum();
            let mut u = ChaCha12Rng::seed_from_u64(seed).gen::<f64>() * total;
            let mut choice = patterns.last().expect("nonempty").clone();
            for (pattern, &p) in &probabilities {
                if u < p {
                    choice = pattern.clone();
                    break;
                }
                u -= p;
            }
            choice
        }
    };
    let prob = probabilities[&selected];
    if prob < 1e-14 {
        return Err(CritError::MeasureZeroOutcome { prob });
    }
    let mut out = apply_kraus_pattern(state.amplitudes(), ld, n, &spec.sites, &tables, &selected);
    out /= C64::new(prob.sqrt(), 0.0);
    let selected_state = StateVector::new(state.space().clone(), out)?;
    Ok(PostSelectionStats {
        outcome_probabilities: probabilities,
        selected_outcome: selected,
        selected_state,
        success_probability: prob,
    })
}

/// Trace distance between the outcome-averaged channel output and the input.
///
/// The averaged channel is not purely decohering: to first order in theta it
/// rotates the input by the deterministic local phase R = exp(i theta kappa G)
/// per measured site, where kappa is the mean ancilla level of the
/// preparation and G the coupling weight. That rotation carries no
/// measurement backaction (it is outcome independent and invertible), so the
/// distance is taken against the rotated input R|psi>. What remains is the
/// genuine measurement-induced decoherence, which vanishes quadratically as
/// theta -> 0; against the unrotated input the first-order rotation would
/// dominate and the distance would close only linearly.
pub fn average_channel_trace_distance(
    state: &StateVector,
    spec: &WeakMeasurementSpec,
) -> Result<f64, CritError> {
    let ld = uniform_local_dim(state)?;
    let n = state.space().n_factors();
    spec.validate(ld, n)?;
    let dim = state.space().total_dim();
    let tables = spec.kraus_tables(ld);
    let radices: Vec<usize> = spec.ancilla_prep.iter().map(Vec::len).collect();
    let amps = state.amplitudes();
    let mut rotated = amps.clone();
    for (&site, prep) in spec.sites.iter().zip(&spec.ancilla_prep) {
        let kappa: f64 = prep
            .iter()
            .enumerate()
            .map(|(ka, amp)| ka as f64 * amp.norm_sqr())
            .sum();
        let stride = site_stride(ld, n, site);
        for (idx, a) in rotated.iter_mut().enumerate() {
            let g = spec.coupling.weight(digit(idx, stride, ld));
            *a *= C64::new(0.0, spec.theta * kappa * g).exp();
        }
    }
    let mut delta = DMatrix::<C64>::zeros(dim, dim);
    for pattern in enumerate_patterns(&radices) {
        let k_psi = apply_kraus_pattern(amps, ld, n, &spec.sites, &tables, &pattern);
        for r in 0..dim {
            for c in 0..dim {
                delta[(r, c)] += k_psi[r] * k_psi[c].conj();
            }
        }
    }
    for r in 0..dim {
        for c in 0..dim {
            delta[(r, c)] -= rotated[r] * rotated[c].conj();
        }
    }
    let eig = SymmetricEigen::new(delta);
    Ok(0.5 * eig.eigenvalues.iter().map(|l| l.abs()).sum::<f64>())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorrObservable {
    /// Z_i Z_j on qubit chains.
    Zz,
    /// X_i X_j on qubit chains.
    Xx,
    /// V_i Vdag_j on qutrit chains (Potts order parameter).
    PottsOrder,
}

fn apply_site_matrix(
    amps: &DVector<C64>,
    ld: usize,
    n: usize,
    site: usize,
    m: &DMatrix<C64>,
) -> DVector<C64> {
    let stride = site_stride(ld, n, site);
    let mut out = DVector::zeros(amps.len());
    for idx in 0..amps.len() {
        let k = digit(idx, stride, ld);
        let base = idx - k * stride;
        for kp in 0..ld {
            let coef = m[(kp, k)];
            if coef != C64::new(0.0, 0.0) {
                out[base + kp * stride] += coef * amps[idx];
            }
        }
    }
    out
}

fn observable_matrices(obs: CorrObservable) -> (usize, DMatrix<C64>, DMatrix<C64>) {
    let zero = C64::new(0.0, 0.0);
    let one = C64::new(1.0, 0.0);
    match obs {
        CorrObservable::Zz => {
            let z = DMatrix::from_diagonal(&DVector::from_vec(vec![one, -one]));
            (2, z.clone(), z)
        }
        CorrObservable::Xx => {
            let x = DMatrix::from_row_slice(2, 2, &[zero, one, one, zero]);
            (2, x.clone(), x)
        }
        CorrObservable::PottsOrder => {
            let w = C64::new(0.0, 2.0 * PI / 3.0).exp();
            let v = DMatrix::from_diagonal(&DVector::from_vec(vec![one, w, w * w]));
            let vdag = v.adjoint();
            (3, v, vdag)
        }
    }
}

/// Two-point functions <O_i O'_j> for the chosen observable pair, optionally
/// connected (subtracting <O_i><O'_j>).
pub fn correlators(
    state: &StateVector,
    obs: CorrObservable,
    pairs: &[(usize, usize)],
    connected: bool,
) -> Result<Vec<C64>, CritError> {
    let ld = uniform_local_dim(state)?;
    let n = state.space().n_factors();
    let (need_ld, op_i, op_j) = observable_matrices(obs);
    if ld != need_ld {
        return Err(CritError::DimensionMismatch);
    }
    let amps = state.amplitudes();
    let mut results = Vec::with_capacity(pairs.len());
    for &(i, j) in pairs {
        if i >= n || j >= n {
            return Err(CritError::BadSpec(format!(
                "correlator site pair ({i}, {j}) out of range for {n} sites"
            )));
        }
        let oj_psi = apply_site_matrix(amps, ld, n, j, &op_j);
        let oi_oj_psi = apply_site_matrix(&oj_psi, ld, n, i, &op_i);
        let mut value = amps.dotc(&oi_oj_psi);
        if connected {
            let mean_i = amps.dotc(&apply_site_matrix(amps, ld, n, i, &op_i));
            let mean_j = amps.dotc(&oj_psi);
            value -= mean_i * mean_j;
        }
        results.push(value);
    }
    Ok(results)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapScanRow {
    pub n_sites: usize,
    pub j_over_h: f64,
    pub gap: f64,
    pub energy_per_site: f64,
}

/// Gap of the periodic Potts chain over a (size, coupling-ratio) grid, with
/// h fixed to 1 so gaps are in units of the field.
pub fn potts_gap_scan(
    n_list: &[usize],
    j_over_h_list: &[f64],
) -> Result<Vec<GapScanRow>, CritError> {
    let mut rows = Vec::with_capacity(n_list.len() * j_over_h_list.len());
    for &n in n_list {
        for &ratio in j_over_h_list {
            let spec = SpinChainSpec {
                model: ChainModel::Potts3 { j: ratio, h: 1.0 },
                n_sites: n,
                boundary: Boundary::Periodic,
            };
            let h = build_hamiltonian(&spec)?;
            let gs = ground_state(&h, 2)?;
            rows.push(GapScanRow {
                n_sites: n,
                j_over_h: ratio,
                gap: gs.gap,
                energy_per_site: gs.energy / n as f64,
            });
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn xxz(n: usize, anisotropy: f64, boundary: Boundary) -> SpinChainSpec {
        SpinChainSpec {
            model: ChainModel::Xxz { anisotropy },
            n_sites: n,
            boundary,
        }
    }

    fn potts(n: usize, j: f64, h: f64, boundary: Boundary) -> SpinChainSpec {
        SpinChainSpec {
            model: ChainModel::Potts3 { j, h },
            n_sites: n,
            boundary,
        }
    }

    fn sorted_eigenvalues(h: &SpinHamiltonian) -> Vec<f64> {
        let eig = SymmetricEigen::new(h.to_dense());
        let mut vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        vals.sort_by(f64::total_cmp);
        vals
    }

    #[test]
    fn xxz_two_site_triplet_spectrum() {
        let h = build_hamiltonian(&xxz(2, 1.0, Boundary::Open)).unwrap();
        let vals = sorted_eigenvalues(&h);
        for (got, want) in vals.iter().zip([-1.0, -1.0, -1.0, 3.0]) {
            assert_relative_eq!(got, &want, epsilon = 1e-12);
        }
        let gs = ground_state(&h, 2).unwrap();
        assert_relative_eq!(gs.energy, -1.0, epsilon = 1e-10);
        assert!(gs.gap < gs.degeneracy_tolerance);
    }

    #[test]
    fn potts_single_site_field_spectrum() {
        // no bonds: only -h (V + Vdag) = diag(-2, 1, 1)
        let h = build_hamiltonian(&potts(1, 7.3, 1.0, Boundary::Open)).unwrap();
        let vals = sorted_eigenvalues(&h);
        for (got, want) in vals.iter().zip([-2.0, 1.0, 1.0]) {
            assert_relative_eq!(got, &want, epsilon = 1e-12);
        }
    }

    #[test]
    fn hamiltonians_are_symmetric_and_matvec_matches_dense() {
        let specs = [
            xxz(3, 0.7, Boundary::Open),
            xxz(4, -0.3, Boundary::Periodic),
            potts(3, 1.3, 0.7, Boundary::Periodic),
            potts(2, 0.4, 1.1, Boundary::Open),
        ];
        let mut rng = ChaCha12Rng::seed_from_u64(5);
        for spec in specs {
            let h = build_hamiltonian(&spec).unwrap();
            let dense = h.to_dense();
            let asym = (&dense - dense.transpose())
                .iter()
                .map(|v| v.abs())
                .fold(0.0, f64::max);
            assert!(asym < 1e-12, "asymmetry {asym} for {spec:?}");
            let x = DVector::from_fn(h.dim(), |_, _| rng.gen::<f64>() - 0.5);
            let mut y = vec![0.0; h.dim()];
            h.matvec(x.as_slice(), &mut y);
            let dy = &dense * &x;
            let dev = y
                .iter()
                .zip(dy.iter())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            assert!(dev < 1e-12);
        }
    }

    #[test]
    fn size_limits_and_bad_specs_are_rejected() {
        assert!(matches!(
            build_hamiltonian(&xxz(15, 1.0, Boundary::Open)),
            Err(CritError::SizeLimit { .. })
        ));
        assert!(matches!(
            build_hamiltonian(&potts(10, 1.0, 1.0, Boundary::Open)),
            Err(CritError::SizeLimit { .. })
        ));
        assert!(build_hamiltonian(&xxz(0, 1.0, Boundary::Open)).is_err());
        let h = build_hamiltonian(&xxz(2, 1.0, Boundary::Open)).unwrap();
        assert!(matches!(
            ground_state(&h, 1),
            Err(CritError::BadSpec(_))
        ));
    }

    #[test]
    fn lanczos_agrees_with_dense_diagonalization() {
        // dim 81: run the iterative path explicitly against the dense one
        let h = build_hamiltonian(&potts(4, 1.0, 1.0, Boundary::Periodic)).unwrap();
        let (dense_vals, _) = dense_lowest(&h, 3);
        let (lan_vals, lan_vecs) =
            lanczos_lowest(&h, 3, 1e-11 * h.infinity_norm()).unwrap();
        for (a, b) in dense_vals.iter().zip(&lan_vals) {
            assert_relative_eq!(a, b, epsilon = 1e-9);
        }
        for (val, vec) in lan_vals.iter().zip(&lan_vecs) {
            let mut y = vec![0.0; h.dim()];
            h.matvec(vec.as_slice(), &mut y);
            let mut r = DVector::from_column_slice(&y);
            r.axpy(-val, vec, 1.0);
            assert!(r.norm() < 1e-9 * h.infinity_norm());
        }
        // dim 1024: ground_state takes the Lanczos path automatically
        let h = build_hamiltonian(&xxz(10, 1.0, Boundary::Periodic)).unwrap();
        let gs = ground_state(&h, 2).unwrap();
        let dense_vals = sorted_eigenvalues(&h);
        assert_relative_eq!(gs.energy, dense_vals[0], epsilon = 1e-8);
        assert_relative_eq!(gs.energies[1], dense_vals[1], epsilon = 1e-8);
    }

    #[test]
    fn identity_hamiltonian_energy_one_gap_zero() {
        let h = SpinHamiltonian::identity(2, 3);
        let gs = ground_state(&h, 2).unwrap();
        assert_relative_eq!(gs.energy, 1.0, epsilon = 1e-12);
        assert!(gs.gap < 1e-12);
        // and through the Lanczos path
        let h = SpinHamiltonian::identity(2, 10);
        let gs = ground_state(&h, 2).unwrap();
        assert_relative_eq!(gs.energy, 1.0, epsilon = 1e-10);
        assert!(gs.gap < 1e-10);
    }

    #[test]
    fn residuals_stay_within_the_stated_bound() {
        for spec in [
            xxz(8, 0.5, Boundary::Periodic),
            xxz(11, 1.0, Boundary::Open),
            potts(5, 1.0, 1.0, Boundary::Periodic),
        ] {
            let h = build_hamiltonian(&spec).unwrap();
            let gs = ground_state(&h, 2).unwrap();
            let norm_lower = gs.energies.iter().map(|e| e.abs()).fold(0.0, f64::max);
            assert!(
                gs.residual < 1e-9 * norm_lower.max(1.0),
                "residual {} for {spec:?}",
                gs.residual
            );
        }
    }

    fn plus_qubit_state(n: usize) -> StateVector {
        let space = HilbertSpace::uniform(2, n, "site").unwrap();
        let dim = space.total_dim();
        let amp = C64::new((dim as f64).sqrt().recip(), 0.0);
        StateVector::new(space, DVector::from_element(dim, amp)).unwrap()
    }

    #[test]
    fn theta_zero_is_the_identity_channel() {
        let h = build_hamiltonian(&xxz(4, 0.5, Boundary::Periodic)).unwrap();
        let gs = ground_state(&h, 2).unwrap();
        let spec = WeakMeasurementSpec {
            theta: 0.0,
            sites: vec![1],
            ancilla_prep: vec![vec![
                C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0),
                C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0),
            ]],
            coupling: CouplingOp::ExcitedProjector { level: 1 },
            policy: OutcomePolicy::Sample,
        };
        let stats = weak_measure(&gs.state, &spec, 3).unwrap();
        // |+> ancilla, no phase: the X readout is deterministic
        assert!((stats.outcome_probabilities[&vec![0u8]] - 1.0).abs() < 1e-12);
        assert_eq!(stats.selected_outcome, vec![0u8]);
        let overlap = gs.state.inner(&stats.selected_state).norm();
        assert!((overlap - 1.0).abs() < 1e-12);
    }

    #[test]
    fn theta_pi_with_plus_ancilla_is_projective() {
        let state = plus_qubit_state(1);
        let spec = WeakMeasurementSpec {
            theta: PI,
            sites: vec![0],
            ancilla_prep: vec![vec![
                C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0),
                C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0),
            ]],
            coupling: CouplingOp::ExcitedProjector { level: 1 },
            policy: OutcomePolicy::PostSelect(vec![0]),
        };
        let stats = weak_measure(&state, &spec, 0).unwrap();
        assert!((stats.outcome_probabilities[&vec![0u8]] - 0.5).abs() < 1e-12);
        assert!((stats.outcome_probabilities[&vec![1u8]] - 0.5).abs() < 1e-12);
        // outcome 0 projects onto |0>
        assert!((stats.selected_state.population(0) - 1.0).abs() < 1e-12);
        let spec1 = WeakMeasurementSpec {
            policy: OutcomePolicy::PostSelect(vec![1]),
            ..spec
        };
        let stats1 = weak_measure(&state, &spec1, 0).unwrap();
        assert!((stats1.selected_state.population(1) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn kraus_completeness_over_random_specs() {
        let mut rng = ChaCha12Rng::seed_from_u64(77);
        for trial in 0..100 {
            let ld = if rng.gen::<bool>() { 2 } else { 3 };
            let n = 3;
            let n_meas = 1 + (trial % 2);
            let sites: Vec<usize> = (0..n_meas).map(|i| i as usize).collect();
            let prep = |rng: &mut ChaCha12Rng| {
                let da = if rng.gen::<bool>() { 2 } else { 3 };
                let raw: Vec<C64> = (0..da)
                    .map(|_| C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
                    .collect();
                let norm: f64 = raw.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
                raw.into_iter().map(|a| a / norm).collect::<Vec<_>>()
            };
            let coupling = if rng.gen::<bool>() {
                CouplingOp::ExcitedProjector {
                    level: rng.gen_range(0..ld),
                }
            } else {
                CouplingOp::ClockPhase
            };
            let spec = WeakMeasurementSpec {
                theta: rng.gen::<f64>() * PI,
                sites: sites.clone(),
                ancilla_prep: (0..n_meas).map(|_| prep(&mut rng)).collect(),
                coupling,
                policy: OutcomePolicy::Sample,
            };
            spec.validate(ld, n).unwrap();
            // sum over outcomes of |c_m(v)|^2 must be 1 for every level v
            for table in spec.kraus_tables(ld) {
                for v in 0..ld {
                    let total: f64 = table.iter().map(|row| row[v].norm_sqr()).sum();
                    assert!(
                        (total - 1.0).abs() < 1e-12,
                        "trial {trial}: completeness defect {}",
                        (total - 1.0).abs()
                    );
                }
            }
        }
    }

    #[test]
    fn outcome_probabilities_sum_to_one() {
        let h = build_hamiltonian(&xxz(6, 0.5, Boundary::Periodic)).unwrap();
        let gs = ground_state(&h, 2).unwrap();
        let spec = WeakMeasurementSpec {
            theta: 0.37,
            sites: vec![0, 3],
            ancilla_prep: vec![
                vec![C64::new(0.6, 0.0), C64::new(0.0, 0.8)],
                vec![
                    C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0),
                    C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0),
                ],
            ],
            coupling: CouplingOp::ExcitedProjector { level: 1 },
            policy: OutcomePolicy::Sample,
        };
        let stats = weak_measure(&gs.state, &spec, 11).unwrap();
        let total: f64 = stats.outcome_probabilities.values().sum();
        assert!((total - 1.0).abs() < 1e-10);
        assert!((stats.selected_state.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn channel_perturbation_scales_as_theta_squared() {
        let h = build_hamiltonian(&xxz(6, 0.5, Boundary::Periodic)).unwrap();
        let gs = ground_state(&h, 2).unwrap();
        let thetas = [0.01, 0.02, 0.04, 0.08];
        let mut points = Vec::new();
        for &theta in &thetas {
            let spec = WeakMeasurementSpec {
                theta,
                sites: vec![2],
                ancilla_prep: vec![vec![
                    C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0),
                    C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0),
                ]],
                coupling: CouplingOp::ExcitedProjector { level: 1 },
                policy: OutcomePolicy::Sample,
            };
            let d = average_channel_trace_distance(&gs.state, &spec).unwrap();
            assert!(d > 0.0);
            points.push((theta.ln(), d.ln()));
        }
        let m = points.len() as f64;
        let sx: f64 = points.iter().map(|p| p.0).sum();
        let sy: f64 = points.iter().map(|p| p.1).sum();
        let sxx: f64 = points.iter().map(|p| p.0 * p.0).sum();
        let sxy: f64 = points.iter().map(|p| p.0 * p.1).sum();
        let slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
        assert!(
            (slope - 2.0).abs() <= 0.2,
            "log-log slope {slope} not within 2.0 +- 0.2"
        );
    }

    #[test]
    fn biased_ancilla_biases_the_outcome_distribution() {
        // critical chain under the printed sign convention sits at
        // anisotropy -1 (see the correlator test below)
        let h = build_hamiltonian(&xxz(8, -1.0, Boundary::Periodic)).unwrap();
        let gs = ground_state(&h, 2).unwrap();
        let run = |eta: f64| {
            let spec = WeakMeasurementSpec {
                theta: 0.1,
                sites: vec![3],
                ancilla_prep: vec![vec![C64::new(eta.cos(), 0.0), C64::new(eta.sin(), 0.0)]],
                coupling: CouplingOp::ExcitedProjector { level: 1 },
                policy: OutcomePolicy::Sample,
            };
            weak_measure(&gs.state, &spec, 1).unwrap().outcome_probabilities[&vec![0u8]]
        };
        let biased = run(0.2);
        let baseline = run(PI / 4.0);
        // strictly biased away from a fair coin, majority outcome wins
        assert!((biased - 0.5).abs() > 0.05, "not biased: {biased}");
        assert!(biased.max(1.0 - biased) > 0.5);
        // the symmetric |+> preparation almost never clicks at small theta;
        // tilting the preparation towards |0> pulls outcomes back to fair
        assert!(
            baseline > biased && biased > 0.5,
            "bias direction wrong: biased {biased}, baseline {baseline}"
        );
    }

    #[test]
    fn post_selecting_an_impossible_outcome_fails() {
        let state = StateVector::basis_state(
            &HilbertSpace::uniform(2, 2, "site").unwrap(),
            &[0, 0],
        )
        .unwrap();
        // theta = pi, |+> ancilla on a |0> site: outcome 1 never occurs
        let spec = WeakMeasurementSpec {
            theta: PI,
            sites: vec![0],
            ancilla_prep: vec![vec![
                C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0),
                C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0),
            ]],
            coupling: CouplingOp::ExcitedProjector { level: 1 },
            policy: OutcomePolicy::PostSelect(vec![1]),
        };
        assert!(matches!(
            weak_measure(&state, &spec, 0),
            Err(CritError::MeasureZeroOutcome { .. })
        ));
    }

    #[test]
    fn total_z_is_conserved_by_z_diagonal_weak_measurement() {
        // planar-regime ground state lives in the zero-magnetization sector
        let h = build_hamiltonian(&xxz(6, 0.5, Boundary::Periodic)).unwrap();
        let gs = ground_state(&h, 2).unwrap();
        let total_z = |state: &StateVector| -> f64 {
            let n = state.space().n_factors();
            (0..n)
                .map(|s| {
                    let stride = site_stride(2, n, s);
                    state
                        .amplitudes()
                        .iter()
                        .enumerate()
                        .map(|(idx, a)| (1.0 - 2.0 * digit(idx, stride, 2) as f64) * a.norm_sqr())
                        .sum::<f64>()
                })
                .sum()
        };
        let before = total_z(&gs.state);
        for outcome in 0..2u8 {
            let spec = WeakMeasurementSpec {
                theta: 0.3,
                sites: vec![2],
                ancilla_prep: vec![vec![C64::new(0.8, 0.0), C64::new(0.0, 0.6)]],
                coupling: CouplingOp::ExcitedProjector { level: 1 },
                policy: OutcomePolicy::PostSelect(vec![outcome]),
            };
            let stats = weak_measure(&gs.state, &spec, 0).unwrap();
            let after = total_z(&stats.selected_state);
            assert!(
                (after - before).abs() < 1e-10,
                "outcome {outcome}: {before} -> {after}"
            );
        }
    }

    #[test]
    fn correlators_on_product_and_bell_states() {
        let space = HilbertSpace::uniform(2, 3, "site").unwrap();
        let zeros = StateVector::basis_state(&space, &[0, 0, 0]).unwrap();
        let vals = correlators(&zeros, CorrObservable::Zz, &[(0, 1), (1, 2)], false).unwrap();
        for v in vals {
            assert!((v - C64::new(1.0, 0.0)).norm() < 1e-12);
        }
        let bell_space = HilbertSpace::uniform(2, 2, "site").unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let mut amps = DVector::zeros(4);
        amps[0] = C64::new(s, 0.0);
        amps[3] = C64::new(s, 0.0);
        let bell = StateVector::new(bell_space, amps).unwrap();
        let zz = correlators(&bell, CorrObservable::Zz, &[(0, 1)], false).unwrap()[0];
        let xx = correlators(&bell, CorrObservable::Xx, &[(0, 1)], false).unwrap()[0];
        assert!((zz - C64::new(1.0, 0.0)).norm() < 1e-12);
        assert!((xx - C64::new(1.0, 0.0)).norm() < 1e-12);
        // dimension guards
        assert!(correlators(&bell, CorrObservable::PottsOrder, &[(0, 1)], false).is_err());
    }

    #[test]
    fn xxz_correlators_translation_invariant_and_decaying() {
        // H = -sum [XX + YY + A ZZ]: A = +1 is the ferromagnetic multiplet
        // point (constant <ZZ>), A = -1 the critical isotropic point with a
        // unique ground state and power-law correlations
        let h = build_hamiltonian(&xxz(12, -1.0, Boundary::Periodic)).unwrap();
        let gs = ground_state(&h, 2).unwrap();
        let pairs = [(0usize, 2usize), (1, 3), (0, 1), (0, 3), (0, 5)];
        let vals = correlators(&gs.state, CorrObservable::Zz, &pairs, false).unwrap();
        assert!(
            (vals[0] - vals[1]).norm() < 1e-9,
            "translation breaking: {} vs {}",
            vals[0],
            vals[1]
        );
        let (c1, c3, c5) = (vals[2].norm(), vals[3].norm(), vals[4].norm());
        assert!(c1 > c3 && c3 > c5, "no decay: {c1} {c3} {c5}");
    }

    #[test]
    fn potts_gap_scan_shows_phases_and_duality() {
        let rows = potts_gap_scan(&[4, 5, 6], &[1.0]).unwrap();
        assert!(rows[0].gap > rows[1].gap && rows[1].gap > rows[2].gap);
        let ordered = potts_gap_scan(&[6], &[10.0]).unwrap()[0];
        assert!(
            ordered.gap < 0.05,
            "ordered-phase quasi-degeneracy violated: gap {}",
            ordered.gap
        );
        let disordered = potts_gap_scan(&[6], &[0.1]).unwrap()[0];
        assert!(ordered.gap < disordered.gap);
        // finite-size duality: energy per site for (J, h) = (1, 2) vs (2, 1)
        let e12 = {
            let h = build_hamiltonian(&potts(6, 1.0, 2.0, Boundary::Periodic)).unwrap();
            ground_state(&h, 2).unwrap().energy / 6.0
        };
        let e21 = {
            let h = build_hamiltonian(&potts(6, 2.0, 1.0, Boundary::Periodic)).unwrap();
            ground_state(&h, 2).unwrap().energy / 6.0
        };
        assert!(
            ((e12 - e21) / e12).abs() < 0.05,
            "duality mismatch: {e12} vs {e21}"
        );
    }

    #[test]
    fn potts_energy_invariant_under_global_cyclic_relabeling() {
        let spec = potts(3, 1.4, 0.9, Boundary::Periodic);
        let h = build_hamiltonian(&spec).unwrap();
        let dense = h.to_dense();
        let dim = h.dim();
        // global shift |k> -> |k+1> on every site
        let shift = |idx: usize| -> usize {
            let mut out = 0;
            for s in 0..3 {
                let stride = 3usize.pow((2 - s) as u32);
                let k = idx / stride % 3;
                out += (k + 1) % 3 * stride;
            }
            out
        };
        let mut relabeled = DMatrix::zeros(dim, dim);
        for r in 0..dim {
            for c in 0..dim {
                relabeled[(shift(r), shift(c))] = dense[(r, c)];
            }
        }
        let mut before: Vec<f64> = SymmetricEigen::new(dense.clone())
            .eigenvalues
            .iter()
            .copied()
            .collect();
        let mut after: Vec<f64> = SymmetricEigen::new(relabeled)
            .eigenvalues
            .iter()
            .copied()
            .collect();
        before.sort_by(f64::total_cmp);
        after.sort_by(f64::total_cmp);
        assert!((before[0] - after[0]).abs() < 1e-10);
        // the conserved clock charge: matrix elements only connect states
        // with equal total level sum mod 3
        let charge = |idx: usize| (0..3).map(|s| idx / 3usize.pow((2 - s) as u32) % 3).sum::<usize>() % 3;
        for r in 0..dim {
            for c in 0..dim {
                if dense[(r, c)].abs() > 1e-14 {
                    assert_eq!(charge(r), charge(c), "H mixes clock charge sectors");
                }
            }
        }
    }
}
