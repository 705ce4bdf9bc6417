//! Python bindings for the molatom simulation suite. The surface mirrors the
//! headline operations of the library: pulse-level gate simulations, the
//! species error budget, stabilizer entanglement protocols, and spin-chain
//! ground-state / weak-measurement tooling. Heavy intermediate objects
//! (statevectors, tableaus) stay on the Rust side; results cross as plain
//! scalars, lists, and small result classes.

use num_complex::Complex64 as C64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyTuple};
use std::f64::consts::PI;

use molatom_core::budget as bud;
use molatom_core::criticality as crit;
use molatom_core::gates;
use molatom_core::stab;

fn value_err<E: std::fmt::Display>(e: E) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn runtime_err<E: std::fmt::Display>(e: E) -> PyErr {
    PyRuntimeError::new_err(e.to_string())
}

// ------------------------------------------------------------------ gates

/// Result of one gate simulation on the computational subspace.
#[pyclass(get_all, frozen)]
struct GateReport {
    conditional_phase: f64,
    leakage: f64,
    decay_loss: f64,
    fidelity_vs_ideal: f64,
    warnings: Vec<String>,
    /// Subspace propagator, row-major nested lists of complex numbers.
    unitary: Vec<Vec<C64>>,
}

fn convert_report(r: gates::GateReport) -> GateReport {
    let n = r.subspace_unitary.nrows();
    let unitary = (0..n)
        .map(|i| (0..n).map(|j| r.subspace_unitary[(i, j)]).collect())
        .collect();
    GateReport {
        conditional_phase: r.conditional_phase,
        leakage: r.leakage,
        decay_loss: r.decay_loss,
        fidelity_vs_ideal: r.fidelity_vs_ideal,
        warnings: r.warnings,
        unitary,
    }
}

/// Blockade-mediated controlled-Z between one molecule and one atom.
/// Basis order of the report unitary: |0a>, |0b>, |1a>, |1b>.
#[pyfunction]
#[pyo3(signature = (v_ma = 1.0, omega_ratio = 0.1, gamma_rs = 0.0, gamma_rp = 0.0))]
fn hybrid_cz(v_ma: f64, omega_ratio: f64, gamma_rs: f64, gamma_rp: f64) -> PyResult<GateReport> {
    let mut spec = gates::cz_spec(v_ma, omega_ratio);
    if gamma_rs != 0.0 || gamma_rp != 0.0 {
        spec = spec.with_decay(gamma_rs, gamma_rp);
    }
    gates::simulate_hybrid_cz(&spec)
        .map(convert_report)
        .map_err(value_err)
}

/// Free dipolar-exchange evolution of two molecules. The default hold time
/// is the quarter period pi/(2 V), taking |12> to (|12> + i|21>)/sqrt(2).
/// Basis order: |11>, |12>, |21>, |22>.
#[pyfunction]
#[pyo3(signature = (v_mm = 1.0, hold_time = None))]
fn iswap(v_mm: f64, hold_time: Option<f64>) -> PyResult<GateReport> {
    let spec = gates::MolMolGateSpec {
        v_mm,
        protocol: gates::MolMolProtocol::Iswap {
            hold_time: hold_time.unwrap_or(PI / (2.0 * v_mm)),
        },
    };
    gates::simulate_iswap(&spec)
        .map(convert_report)
        .map_err(value_err)
}

/// Microwave pair-drive controlled-Z on two molecules: one full cycle of the
/// bright-state Rabi oscillation returns |11> with a pi phase.
/// Basis order: |00>, |01>, |10>, |11>.
#[pyfunction]
#[pyo3(signature = (v_mm = 1.0, drive_rabi = 0.05))]
fn pair_drive_cz(v_mm: f64, drive_rabi: f64) -> PyResult<GateReport> {
    let spec = gates::MolMolGateSpec {
        v_mm,
        protocol: gates::MolMolProtocol::PairDrive { drive_rabi },
    };
    gates::simulate_pair_drive_cz(&spec)
        .map(convert_report)
        .map_err(value_err)
}

// ----------------------------------------------------------------- budget

/// Per-channel gate error budget for one species, scaled from the anchor.
#[pyclass(get_all, frozen)]
struct ErrorBudget {
    species: String,
    decay: f64,
    adiabaticity: f64,
    leakage: f64,
    field: f64,
    total: f64,
    total_one_sig_fig: f64,
    matched_n: i64,
}

/// Scale the calibrated CaF+Rb(59s) anchor column to a species with
/// rotational frequency f_hz and dipole moment d_debye.
#[pyfunction]
#[pyo3(signature = (name, f_hz, d_debye, field_noise_multiplier = 1.0))]
fn error_budget(
    name: &str,
    f_hz: f64,
    d_debye: f64,
    field_noise_multiplier: f64,
) -> PyResult<ErrorBudget> {
    let mut calib = bud::caf_rb_anchor(20.5e9, 1.77);
    calib.field_noise_multiplier = field_noise_multiplier;
    let species = bud::MoleculeSpecies {
        name: name.to_string(),
        f_hz,
        d_debye,
    };
    let b = bud::compute_budget(&species, &calib).map_err(|e| match e {
        bud::BudgetError::NoRydbergMatch { .. } => runtime_err(e),
        _ => value_err(e),
    })?;
    Ok(ErrorBudget {
        species: b.species.clone(),
        decay: b.decay,
        adiabaticity: b.adiabaticity,
        leakage: b.leakage,
        field: b.field,
        total: b.total,
        total_one_sig_fig: b.total_one_sig_fig(),
        matched_n: b.matched_n,
    })
}

/// Projected GHZ preparation fidelity for a given per-gate error.
#[pyclass(get_all, frozen)]
struct GhzProjection {
    scheme: String,
    n: usize,
    fidelity: f64,
    gate_count: usize,
    depth: usize,
}

/// scheme is one of "gate_only_linear", "gate_only_log", "measurement_based".
#[pyfunction]
#[pyo3(signature = (gate_error, n, scheme = "measurement_based", readout_error = 0.03))]
fn ghz_fidelity(
    gate_error: f64,
    n: usize,
    scheme: &str,
    readout_error: f64,
) -> PyResult<GhzProjection> {
    let parsed = match scheme {
        "gate_only_linear" => bud::GhzScheme::GateOnlyLinear,
        "gate_only_log" => bud::GhzScheme::GateOnlyLog,
        "measurement_based" => bud::GhzScheme::MeasurementBased,
        other => return Err(value_err(format!("unknown scheme '{other}'"))),
    };
    let p = bud::project_ghz_fidelity(gate_error, readout_error, n, parsed).map_err(value_err)?;
    Ok(GhzProjection {
        scheme: scheme.to_string(),
        n: p.n,
        fidelity: p.fidelity,
        gate_count: p.gate_count,
        depth: p.depth,
    })
}

// -------------------------------------------------------------- stabilizer

/// One ancilla X measurement: (site, outcome, was_random).
type RecordTuple = (usize, u8, bool);

/// Outcome record of one measurement-based GHZ preparation.
#[pyclass(get_all, frozen)]
struct GhzRun {
    qudit_dim: usize,
    n_molecules: usize,
    records: Vec<RecordTuple>,
    /// Number of single-site feedforward corrections applied.
    correction_count: usize,
    /// <Z_1 Z_N^{-1}> on the corrected state; exactly 1 for a GHZ state.
    z_pair_expectation: C64,
}

/// Entangle n molecules into a GHZ state through measured atom ancillas.
/// The run is feedforward-corrected and verified before returning.
#[pyfunction]
#[pyo3(signature = (qudit_dim, n_molecules, seed = 0))]
fn ghz_protocol(qudit_dim: usize, n_molecules: usize, seed: u64) -> PyResult<GhzRun> {
    let run = stab::run_ghz_protocol(qudit_dim, n_molecules, seed).map_err(value_err)?;
    let mut z = vec![0u8; n_molecules];
    z[0] = 1;
    z[n_molecules - 1] = qudit_dim as u8 - 1;
    let op = stab::PauliOp::new(qudit_dim, vec![0; n_molecules], z, 0).map_err(value_err)?;
    let e = run.tableau.expectation(&op).map_err(runtime_err)?;
    Ok(GhzRun {
        qudit_dim,
        n_molecules,
        records: run
            .records
            .iter()
            .map(|r| (r.site, r.outcome, r.was_random))
            .collect(),
        correction_count: run.plan.steps.len(),
        z_pair_expectation: e,
    })
}

#[pyclass(get_all, frozen)]
struct ToricReport {
    lattice: usize,
    checks_passing: usize,
    check_count: usize,
    check_rank: usize,
    code_dimension: usize,
    outcomes: Vec<RecordTuple>,
}

/// Prepare the Z3 toric code on a periodic l x l lattice by face-ancilla
/// measurement and feedforward; all star and plaquette checks are verified.
#[pyfunction]
#[pyo3(signature = (l = 2, seed = 0))]
fn toric_code(l: usize, seed: u64) -> PyResult<ToricReport> {
    let (_, report) = stab::build_z3_toric_code(l, seed).map_err(value_err)?;
    Ok(ToricReport {
        lattice: report.lattice,
        checks_passing: report.checks_passing,
        check_count: report.check_count,
        check_rank: report.check_rank,
        code_dimension: report.code_dimension,
        outcomes: report
            .outcomes
            .iter()
            .map(|r| (r.site, r.outcome, r.was_random))
            .collect(),
    })
}

// ------------------------------------------------------------- criticality

fn parse_chain(
    model: &str,
    n_sites: usize,
    boundary: &str,
    anisotropy: Option<f64>,
    j: Option<f64>,
    h: Option<f64>,
) -> PyResult<crit::SpinChainSpec> {
    let boundary = match boundary {
        "open" => crit::Boundary::Open,
        "periodic" => crit::Boundary::Periodic,
        other => return Err(value_err(format!("unknown boundary '{other}'"))),
    };
    let model = match model {
        "xxz" => {
            if j.is_some() || h.is_some() {
                return Err(value_err("j and h apply to the potts3 model only"));
            }
            crit::ChainModel::Xxz {
                anisotropy: anisotropy.unwrap_or(-1.0),
            }
        }
        "potts3" => {
            if anisotropy.is_some() {
                return Err(value_err("anisotropy applies to the xxz model only"));
            }
            crit::ChainModel::Potts3 {
                j: j.unwrap_or(1.0),
                h: h.unwrap_or(1.0),
            }
        }
        other => return Err(value_err(format!("unknown model '{other}'"))),
    };
    Ok(crit::SpinChainSpec {
        model,
        n_sites,
        boundary,
    })
}

fn crit_err(e: crit::CritError) -> PyErr {
    match e {
        crit::CritError::NonConvergence { .. }
        | crit::CritError::MeasureZeroOutcome { .. }
        | crit::CritError::Qdyn(_) => runtime_err(e),
        _ => value_err(e),
    }
}

fn parse_coupling(coupling: &str, level: usize) -> PyResult<crit::CouplingOp> {
    match coupling {
        "excited_projector" => Ok(crit::CouplingOp::ExcitedProjector { level }),
        "clock_phase" => Ok(crit::CouplingOp::ClockPhase),
        other => Err(value_err(format!("unknown coupling '{other}'"))),
    }
}

/// Ground-state sector of one chain, holding the state for follow-up
/// correlator and weak-measurement calls.
#[pyclass(frozen)]
struct GroundState {
    result: crit::GroundStateResult,
    local_dim: usize,
    n_sites: usize,
}

#[pymethods]
impl GroundState {
    #[getter]
    fn energy(&self) -> f64 {
        self.result.energy
    }

    #[getter]
    fn energies(&self) -> Vec<f64> {
        self.result.energies.clone()
    }

    #[getter]
    fn gap(&self) -> f64 {
        self.result.gap
    }

    #[getter]
    fn residual(&self) -> f64 {
        self.result.residual
    }

    #[getter]
    fn dimension(&self) -> usize {
        self.local_dim.pow(self.n_sites as u32)
    }

    /// Two-point correlators of the ground state. observable is one of
    /// "zz", "xx", "potts_order"; pairs is a list of (i, j) site pairs.
    #[pyo3(signature = (observable, pairs, connected = false))]
    fn correlators(
        &self,
        observable: &str,
        pairs: Vec<(usize, usize)>,
        connected: bool,
    ) -> PyResult<Vec<C64>> {
        let obs = match observable {
            "zz" => crit::CorrObservable::Zz,
            "xx" => crit::CorrObservable::Xx,
            "potts_order" => crit::CorrObservable::PottsOrder,
            other => return Err(value_err(format!("unknown observable '{other}'"))),
        };
        crit::correlators(&self.result.state, obs, &pairs, connected).map_err(crit_err)
    }

    /// Ancilla-mediated weak measurement of the ground state. Each measured
    /// site couples to its own two-level ancilla prepared at mixing angle
    /// eta (pi/4 is the unbiased |+> ancilla). Returns a dict with the full
    /// outcome distribution (tuple keys), the realized outcome, and the
    /// renormalized success probability.
    #[pyo3(signature = (theta, sites, eta = PI / 4.0, coupling = "excited_projector",
                        level = 1, post_select = None, seed = 0))]
    #[allow(clippy::too_many_arguments)]
    fn weak_measure(
        &self,
        py: Python<'_>,
        theta: f64,
        sites: Vec<usize>,
        eta: f64,
        coupling: &str,
        level: usize,
        post_select: Option<Vec<u8>>,
        seed: u64,
    ) -> PyResult<PyObject> {
        let prep = vec![vec![C64::new(eta.cos(), 0.0), C64::new(eta.sin(), 0.0)]; sites.len()];
        let spec = crit::WeakMeasurementSpec {
            theta,
            sites,
            ancilla_prep: prep,
            coupling: parse_coupling(coupling, level)?,
            policy: match post_select {
                Some(pattern) => crit::OutcomePolicy::PostSelect(pattern),
                None => crit::OutcomePolicy::Sample,
            },
        };
        let stats = crit::weak_measure(&self.result.state, &spec, seed).map_err(crit_err)?;
        let probs = PyDict::new_bound(py);
        for (pattern, p) in &stats.outcome_probabilities {
            probs.set_item(PyTuple::new_bound(py, pattern), *p)?;
        }
        let out = PyDict::new_bound(py);
        out.set_item("outcome_probabilities", probs)?;
        out.set_item(
            "selected_outcome",
            PyTuple::new_bound(py, &stats.selected_outcome),
        )?;
        out.set_item("success_probability", stats.success_probability)?;
        Ok(out.into())
    }

    /// Average trace distance between the weak-measurement channel's output
    /// and the measurement-frame-rotated input; closes quadratically in
    /// theta for weak coupling.
    #[pyo3(signature = (theta, sites, eta = PI / 4.0, coupling = "excited_projector", level = 1))]
    fn channel_trace_distance(
        &self,
        theta: f64,
        sites: Vec<usize>,
        eta: f64,
        coupling: &str,
        level: usize,
    ) -> PyResult<f64> {
        let prep = vec![vec![C64::new(eta.cos(), 0.0), C64::new(eta.sin(), 0.0)]; sites.len()];
        let spec = crit::WeakMeasurementSpec {
            theta,
            sites,
            ancilla_prep: prep,
            coupling: parse_coupling(coupling, level)?,
            policy: crit::OutcomePolicy::Sample,
        };
        crit::average_channel_trace_distance(&self.result.state, &spec).map_err(crit_err)
    }
}

/// Exact-diagonalization handle for one spin chain. model is "xxz" (with
/// optional anisotropy, default -1.0) or "potts3" (with optional j and h,
/// default 1.0 each); boundary is "open" or "periodic".
#[pyclass(frozen)]
struct SpinChain {
    spec: crit::SpinChainSpec,
    hamiltonian: crit::SpinHamiltonian,
}

#[pymethods]
impl SpinChain {
    #[new]
    #[pyo3(signature = (model, n_sites, boundary = "periodic", anisotropy = None, j = None, h = None))]
    fn new(
        model: &str,
        n_sites: usize,
        boundary: &str,
        anisotropy: Option<f64>,
        j: Option<f64>,
        h: Option<f64>,
    ) -> PyResult<Self> {
        let spec = parse_chain(model, n_sites, boundary, anisotropy, j, h)?;
        let hamiltonian = crit::build_hamiltonian(&spec).map_err(crit_err)?;
        Ok(SpinChain { spec, hamiltonian })
    }

    #[getter]
    fn n_sites(&self) -> usize {
        self.spec.n_sites
    }

    #[getter]
    fn dimension(&self) -> usize {
        self.hamiltonian.dim()
    }

    #[getter]
    fn nnz(&self) -> usize {
        self.hamiltonian.nnz()
    }

    /// Lowest k_states eigenpairs; returns a GroundState handle.
    #[pyo3(signature = (k_states = 2))]
    fn ground(&self, k_states: usize) -> PyResult<GroundState> {
        let result = crit::ground_state(&self.hamiltonian, k_states).map_err(crit_err)?;
        Ok(GroundState {
            result,
            local_dim: self.hamiltonian.local_dim(),
            n_sites: self.spec.n_sites,
        })
    }
}

/// Spectral-gap scan of the three-state Potts chain (h = 1, periodic);
/// returns (n_sites, j_over_h, gap, energy_per_site) rows.
#[pyfunction]
fn potts_gap_scan(
    n_list: Vec<usize>,
    j_over_h: Vec<f64>,
) -> PyResult<Vec<(usize, f64, f64, f64)>> {
    let rows = crit::potts_gap_scan(&n_list, &j_over_h).map_err(crit_err)?;
    Ok(rows
        .iter()
        .map(|r| (r.n_sites, r.j_over_h, r.gap, r.energy_per_site))
        .collect())
}

#[pymodule]
fn molatom_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<GateReport>()?;
    m.add_class::<ErrorBudget>()?;
    m.add_class::<GhzProjection>()?;
    m.add_class::<GhzRun>()?;
    m.add_class::<ToricReport>()?;
    m.add_class::<SpinChain>()?;
    m.add_class::<GroundState>()?;
    m.add_function(wrap_pyfunction!(hybrid_cz, m)?)?;
    m.add_function(wrap_pyfunction!(iswap, m)?)?;
    m.add_function(wrap_pyfunction!(pair_drive_cz, m)?)?;
    m.add_function(wrap_pyfunction!(error_budget, m)?)?;
    m.add_function(wrap_pyfunction!(ghz_fidelity, m)?)?;
    m.add_function(wrap_pyfunction!(ghz_protocol, m)?)?;
    m.add_function(wrap_pyfunction!(toric_code, m)?)?;
    m.add_function(wrap_pyfunction!(potts_gap_scan, m)?)?;
    Ok(())
}
