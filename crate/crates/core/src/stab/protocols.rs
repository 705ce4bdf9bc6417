//! Measurement-based entanglement protocols on qudit chains and lattices.
//!
//! Both protocols follow the same recipe: prepare every site in |+>, entangle
//! ancillas to their neighbours with CZ_d powers, measure the ancillas in the
//! X basis, restrict to the remaining sites, and solve a small GF(d) linear
//! system for the single-site corrections that put every target stabilizer at
//! phase +1. Corrections may need both X and Z powers: conjugating by
//! X_j^c Z_j^b shifts the tau exponent of a group element with exponents
//! (x, z) by 2 (b x_j - c z_j), so the solve runs over 2n unknowns.

use super::gf;
use super::pauli::PauliOp;
use super::tableau::{MeasurementRecord, QuditTableau};
use super::StabError;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// One single-site correction, applied as X^{x_power} Z^{z_power}.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FeedforwardStep {
    pub site: usize,
    pub x_power: u8,
    pub z_power: u8,
}

/// Outcome-dependent correction layer produced by the feedforward solve.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct FeedforwardPlan {
    pub steps: Vec<FeedforwardStep>,
}

impl FeedforwardPlan {
    pub fn apply(&self, tab: &mut QuditTableau) -> Result<(), StabError> {
        for step in &self.steps {
            tab.apply_x_power(step.site, step.x_power as i64)?;
            tab.apply_z_power(step.site, step.z_power as i64)?;
        }
        Ok(())
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

/// Required sum S with 2S + defect = 0 modulo the order of tau.
fn correction_rhs(d: u8, defect: i64) -> Result<u8, StabError> {
    if d == 2 {
        if defect % 2 != 0 {
            return Err(StabError::InvariantViolation(format!(
                "odd phase defect {defect} for d = 2"
            )));
        }
        Ok((-(defect / 2)).rem_euclid(2) as u8)
    } else {
        // inv(2) = 2 mod 3, so S = -2 defect = defect mod 3
        Ok(defect.rem_euclid(3) as u8)
    }
}

/// Solve for single-site corrections putting every target at phase +1.
/// Every target's exponent pattern must already be in the group.
fn solve_corrections(
    tab: &QuditTableau,
    targets: &[PauliOp],
) -> Result<FeedforwardPlan, StabError> {
    let d = tab.dim() as u8;
    let n = tab.sites();
    let mut rows = Vec::with_capacity(targets.len());
    let mut rhs = Vec::with_capacity(targets.len());
    for t in targets {
        let defect = tab.phase_defect(t).ok_or_else(|| {
            StabError::InvariantViolation(format!("target {t} is not in the measured group"))
        })?;
        // unknown vector is [z powers b | x powers c]
        let mut row = Vec::with_capacity(2 * n);
        row.extend_from_slice(t.x_exponents());
        row.extend(t.z_exponents().iter().map(|&z| gf::sub_mod(0, z, d)));
        rows.push(row);
        rhs.push(correction_rhs(d, defect)?);
    }
    let sol = gf::solve_system(&rows, &rhs, d).ok_or_else(|| {
        StabError::InvariantViolation("feedforward system is inconsistent".into())
    })?;
    let steps = (0..n)
        .filter_map(|j| {
            let (b, c) = (sol[j], sol[n + j]);
            (b != 0 || c != 0).then_some(FeedforwardStep {
                site: j,
                x_power: c,
                z_power: b,
            })
        })
        .collect();
    Ok(FeedforwardPlan { steps })
}

/// GHZ stabilizer targets on n sites: the X string and nearest-neighbour
/// Z_i Z_{i+1}^{-1} pairs, all at phase +1.
pub fn ghz_targets(d: usize, n: usize) -> Result<Vec<PauliOp>, StabError> {
    let mut targets = vec![PauliOp::new(d, vec![1; n], vec![0; n], 0)?];
    for i in 0..n - 1 {
        let mut z = vec![0u8; n];
        z[i] = 1;
        z[i + 1] = d as u8 - 1;
        targets.push(PauliOp::new(d, vec![0; n], z, 0)?);
    }
    Ok(targets)
}

/// Check that a tableau stabilizes the n-site GHZ state exactly: the X
/// string and all Z_i Z_{i+1}^{-1} must be group members at phase +1.
pub fn verify_ghz(tab: &QuditTableau) -> Result<(), StabError> {
    tab.validate()?;
    for t in ghz_targets(tab.dim(), tab.sites())? {
        if !tab.contains(&t) {
            return Err(StabError::InvariantViolation(format!(
                "GHZ target {t} missing or at the wrong phase (defect {:?})",
                tab.phase_defect(&t)
            )));
        }
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct GhzRun {
    /// Corrected tableau on the molecule sites only.
    pub tableau: QuditTableau,
    /// Atom X-measurement records, left to right.
    pub records: Vec<MeasurementRecord>,
    pub plan: FeedforwardPlan,
}

/// Entangle n molecules into a GHZ state through measured atom ancillas.
///
/// The chain alternates molecule, atom, molecule, ... (2n - 1 sites, all
/// prepared in |+>). Each atom gets CZ^{+1} with its left molecule and
/// CZ^{-1} with its right one, is measured in X, and the outcomes feed the
/// correction solve. The returned tableau is verified against the GHZ
/// targets before returning.
pub fn run_ghz_protocol(d: usize, n_molecules: usize, seed: u64) -> Result<GhzRun, StabError> {
    if n_molecules < 2 {
        return Err(StabError::TooFewSites {
            min: 2,
            got: n_molecules,
        });
    }
    let n_sites = 2 * n_molecules - 1;
    let mut tab = QuditTableau::init_plus(d, n_sites)?;
    for atom in (1..n_sites).step_by(2) {
        tab.apply_czd(atom, atom - 1, 1)?;
        tab.apply_czd(atom, atom + 1, d as i64 - 1)?;
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut records = Vec::with_capacity(n_molecules - 1);
    for atom in (1..n_sites).step_by(2) {
        records.push(tab.measure_x(atom, &mut rng)?);
    }
    let molecules: Vec<usize> = (0..n_sites).step_by(2).collect();
    let mut tab = tab.restrict_to(&molecules)?;
    let plan = solve_corrections(&tab, &ghz_targets(d, n_molecules)?)?;
    plan.apply(&mut tab)?;
    verify_ghz(&tab)?;
    Ok(GhzRun {
        tableau: tab,
        records,
        plan,
    })
}

// Periodic L x L lattice with two edges per vertex. Horizontal edge (x, y)
// points right from vertex (x, y); vertical edge (x, y) points up.
fn h_edge(l: usize, x: usize, y: usize) -> usize {
    (y % l) * l + (x % l)
}

fn v_edge(l: usize, x: usize, y: usize) -> usize {
    l * l + (y % l) * l + (x % l)
}

/// Star (vertex) check at (x, y): X on the two outgoing edges, X^{-1} on the
/// two incoming ones. Acts on the 2 L^2 edge sites.
pub fn toric_star(l: usize, x: usize, y: usize) -> Result<PauliOp, StabError> {
    let n = 2 * l * l;
    let mut xs = vec![0u8; n];
    xs[h_edge(l, x, y)] = 1;
    xs[v_edge(l, x, y)] = 1;
    xs[h_edge(l, x + l - 1, y)] = 2;
    xs[v_edge(l, x, y + l - 1)] = 2;
    PauliOp::new(3, xs, vec![0; n], 0)
}

/// Plaquette (face) check at (x, y): Z powers with the face circulation,
/// +1 on the bottom and right edges, -1 on the top and left.
pub fn toric_plaquette(l: usize, x: usize, y: usize) -> Result<PauliOp, StabError> {
    let n = 2 * l * l;
    let mut zs = vec![0u8; n];
    zs[h_edge(l, x, y)] = 1;
    zs[v_edge(l, x + 1, y)] = 1;
    zs[h_edge(l, x, y + 1)] = 2;
    zs[v_edge(l, x, y)] = 2;
    PauliOp::new(3, vec![0; n], zs, 0)
}

#[derive(Debug, Clone)]
pub struct ToricReport {
    pub lattice: usize,
    /// Face-ancilla X measurements in face index order.
    pub outcomes: Vec<MeasurementRecord>,
    pub corrections: FeedforwardPlan,
    pub checks_passing: usize,
    pub check_count: usize,
    /// GF(3) rank of the star and plaquette check set (2 L^2 - 2).
    pub check_rank: usize,
    /// Dimension of the joint +1 eigenspace of the checks, 3^(edges - rank).
    pub code_dimension: usize,
}

/// Prepare a Z3 toric code ground state on a periodic L x L lattice by
/// measuring one face ancilla per plaquette.
///
/// Sites 0..2L^2 are edges (horizontal block then vertical block), sites
/// 2L^2..3L^2 are face ancillas. Each ancilla is entangled to its face
/// boundary with CZ powers matching the plaquette circulation, measured in
/// X, and the outcomes are repaired by X-type corrections on the edges. The
/// returned tableau lives on the edge sites and contains every star and
/// plaquette check at phase +1.
pub fn build_z3_toric_code(l: usize, seed: u64) -> Result<(QuditTableau, ToricReport), StabError> {
    if l < 2 {
        return Err(StabError::UnsupportedLattice(l));
    }
    let n_edges = 2 * l * l;
    let n_total = 3 * l * l;
    let mut tab = QuditTableau::init_plus(3, n_total)?;
    for y in 0..l {
        for x in 0..l {
            let anc = n_edges + y * l + x;
            tab.apply_czd(anc, h_edge(l, x, y), 1)?;
            tab.apply_czd(anc, v_edge(l, x + 1, y), 1)?;
            tab.apply_czd(anc, h_edge(l, x, y + 1), 2)?;
            tab.apply_czd(anc, v_edge(l, x, y), 2)?;
        }
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut outcomes = Vec::with_capacity(l * l);
    for anc in n_edges..n_total {
        outcomes.push(tab.measure_x(anc, &mut rng)?);
    }
    let edges: Vec<usize> = (0..n_edges).collect();
    let mut tab = tab.restrict_to(&edges)?;
    let mut targets = Vec::with_capacity(2 * l * l);
    for y in 0..l {
        for x in 0..l {
            targets.push(toric_star(l, x, y)?);
        }
    }
    for y in 0..l {
        for x in 0..l {
            targets.push(toric_plaquette(l, x, y)?);
        }
    }
    let corrections = solve_corrections(&tab, &targets)?;
    corrections.apply(&mut tab)?;
    let checks_passing = targets.iter().filter(|t| tab.contains(t)).count();
    if checks_passing != targets.len() {
        return Err(StabError::InvariantViolation(format!(
            "only {checks_passing} of {} toric checks hold after correction",
            targets.len()
        )));
    }
    let rows: Vec<Vec<u8>> = targets.iter().map(PauliOp::symplectic_row).collect();
    let check_rank = gf::rank(&rows, 3);
    let report = ToricReport {
        lattice: l,
        outcomes,
        corrections,
        checks_passing,
        check_count: targets.len(),
        check_rank,
        code_dimension: 3usize.pow((n_edges - check_rank) as u32),
    };
    Ok((tab, report))
}
