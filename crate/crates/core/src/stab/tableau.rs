//! Stabilizer states over Z_d as n independent commuting generators.
//!
//! Generator phases are tau exponents (see [`super::pauli`]); a generator
//! tau^k P stabilizes a state only when tau^k lands on an omega power, which
//! for d = 2 means k must stay even. Clifford gates are applied by direct
//! conjugation formulas on the exponent rows; their phase bookkeeping is
//! validated against the dense oracle in the tests.
//!
//! Comparisons between phases use the multiplicative order of tau (4 for
//! d = 2 where tau = i, 3 for d = 3 where tau = omega^2): exponents that
//! differ by a multiple of that order are the same complex number.

use super::gf::{self, inv_mod};
use super::pauli::PauliOp;
use super::StabError;
use num_complex::Complex64 as C64;
use rand::Rng;

/// X-basis measurement result at one site. Outcome m labels the eigenvalue
/// omega^m; `was_random` is false when the pre-measurement group already
/// fixed the outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MeasurementRecord {
    pub site: usize,
    pub outcome: u8,
    pub was_random: bool,
}

#[derive(Debug, Clone)]
pub struct QuditTableau {
    d: u8,
    n: usize,
    gens: Vec<PauliOp>,
}

fn tau_order(d: u8) -> i64 {
    if d == 2 {
        4
    } else {
        d as i64
    }
}

impl QuditTableau {
    /// Stabilizer group <X_1, ..., X_n>: every site in |+>.
    pub fn init_plus(d: usize, n: usize) -> Result<Self, StabError> {
        if n < 1 {
            return Err(StabError::TooFewSites { min: 1, got: n });
        }
        let gens = (0..n)
            .map(|s| PauliOp::x_op(d, n, s))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self { d: d as u8, n, gens })
    }

    pub fn from_generators(gens: Vec<PauliOp>) -> Result<Self, StabError> {
        let Some(first) = gens.first() else {
            return Err(StabError::TooFewSites { min: 1, got: 0 });
        };
        let tab = Self {
            d: first.dim() as u8,
            n: first.sites(),
            gens,
        };
        tab.validate()?;
        Ok(tab)
    }

    pub fn dim(&self) -> usize {
        self.d as usize
    }

    pub fn sites(&self) -> usize {
        self.n
    }

    pub fn generators(&self) -> &[PauliOp] {
        &self.gens
    }

    /// Full invariant check: generator count n, pairwise commutation,
    /// symplectic rank n, and phases that are omega powers.
    pub fn validate(&self) -> Result<(), StabError> {
        if self.gens.len() != self.n {
            return Err(StabError::InvariantViolation(format!(
                "{} generators for {} sites",
                self.gens.len(),
                self.n
            )));
        }
        for g in &self.gens {
            if g.dim() != self.d as usize || g.sites() != self.n {
                return Err(StabError::SpaceMismatch);
            }
            // for d = 2 the square (tau^k W)^2 = (-1)^(k + x.z) must be +1
            if self.d == 2 {
                let xz: u32 = g
                    .x_exponents()
                    .iter()
                    .zip(g.z_exponents())
                    .map(|(&x, &z)| (x * z) as u32)
                    .sum();
                if (g.phase_exponent() as u32 + xz) % 2 != 0 {
                    return Err(StabError::InvariantViolation(format!(
                        "generator {g} squares to -1"
                    )));
                }
            }
        }
        for i in 0..self.gens.len() {
            for j in (i + 1)..self.gens.len() {
                let c = self.gens[i].commutation_exponent(&self.gens[j])?;
                if c != 0 {
                    return Err(StabError::InvariantViolation(format!(
                        "generators {i} and {j} do not commute (omega^{c})"
                    )));
                }
            }
        }
        let rows: Vec<Vec<u8>> = self.gens.iter().map(PauliOp::symplectic_row).collect();
        let rank = gf::rank(&rows, self.d);
        if rank != self.n {
            return Err(StabError::InvariantViolation(format!(
                "symplectic rank {rank} != {}",
                self.n
            )));
        }
        Ok(())
    }

    fn check_site(&self, site: usize) -> Result<(), StabError> {
        if site >= self.n {
            return Err(StabError::SiteOutOfRange { site, n: self.n });
        }
        Ok(())
    }

    /// Conjugate by CZ_d(i, j)^power: X_i -> X_i Z_j^power and symmetrically,
    /// with the reordering phase 2 power x_i x_j.
    pub fn apply_czd(&mut self, i: usize, j: usize, power: i64) -> Result<(), StabError> {
        self.check_site(i)?;
        self.check_site(j)?;
        if i == j {
            return Err(StabError::SpaceMismatch);
        }
        let d = self.d;
        let p = power.rem_euclid(d as i64) as u8;
        for g in &mut self.gens {
            let (xi, xj) = (g.x_exponents()[i], g.x_exponents()[j]);
            g.bump_phase(2 * p as i64 * xi as i64 * xj as i64);
            let z = g.z_mut();
            z[i] = gf::add_mod(z[i], gf::mul_mod(p, xj, d), d);
            z[j] = gf::add_mod(z[j], gf::mul_mod(p, xi, d), d);
        }
        debug_assert!(self.validate().is_ok());
        Ok(())
    }

    /// Conjugate by the Fourier gate at a site: (x, z) -> (-z, x).
    pub fn apply_f(&mut self, site: usize) -> Result<(), StabError> {
        self.check_site(site)?;
        let d = self.d;
        for g in &mut self.gens {
            let (x, z) = (g.x_exponents()[site], g.z_exponents()[site]);
            g.bump_phase(-2 * x as i64 * z as i64);
            g.x_mut()[site] = gf::sub_mod(0, z, d);
            g.z_mut()[site] = x;
        }
        debug_assert!(self.validate().is_ok());
        Ok(())
    }

    /// Conjugate by the diagonal phase gate: (x, z) -> (x, z + x) with the
    /// dimension-dependent phase rule.
    pub fn apply_s(&mut self, site: usize) -> Result<(), StabError> {
        self.check_site(site)?;
        let d = self.d;
        for g in &mut self.gens {
            let x = g.x_exponents()[site];
            let bump = if d == 2 {
                (x as i64) * (x as i64)
            } else {
                x as i64 * (x as i64 - 1)
            };
            g.bump_phase(bump);
            let z = g.z_mut();
            z[site] = gf::add_mod(z[site], x, d);
        }
        debug_assert!(self.validate().is_ok());
        Ok(())
    }

    /// Conjugate by X_site^power (phases of Z components rotate).
    pub fn apply_x_power(&mut self, site: usize, power: i64) -> Result<(), StabError> {
        self.check_site(site)?;
        let p = power.rem_euclid(self.d as i64);
        for g in &mut self.gens {
            g.bump_phase(-2 * p * g.z_exponents()[site] as i64);
        }
        Ok(())
    }

    /// Conjugate by Z_site^power.
    pub fn apply_z_power(&mut self, site: usize, power: i64) -> Result<(), StabError> {
        self.check_site(site)?;
        let p = power.rem_euclid(self.d as i64);
        for g in &mut self.gens {
            g.bump_phase(2 * p * g.x_exponents()[site] as i64);
        }
        Ok(())
    }

    /// Measure X at a site. Outcome m labels eigenvalue omega^m. When some
    /// power of X_site is already in the group the outcome is forced and the
    /// tableau is untouched; otherwise the outcome is uniform from `rng` and
    /// one generator is replaced by omega^{-m} X_site.
    pub fn measure_x<R: Rng>(
        &mut self,
        site: usize,
        rng: &mut R,
    ) -> Result<MeasurementRecord, StabError> {
        self.check_site(site)?;
        let d = self.d;
        // commutation of g with X_site is omega^{z_g[site]}
        let anti: Vec<usize> = (0..self.gens.len())
            .filter(|&j| self.gens[j].z_exponents()[site] != 0)
            .collect();
        if anti.is_empty() {
            let x_s = PauliOp::x_op(d as usize, self.n, site)?;
            let (k, combo) = self
                .member_phase(&x_s)
                .ok_or_else(|| {
                    StabError::InvariantViolation(format!(
                        "X at site {site} commutes with the group but is not in it"
                    ))
                })?;
            let outcome = outcome_from_phase(d, k)?;
            // normalize the basis: swap the pure X_site element in for one
            // generator of its combination, so a later restriction sees this
            // site held by a single-site generator. The replaced generator
            // must itself touch x[site] (one such term always exists because
            // the combination's x weights at the site sum to 1); picking it
            // keeps other sites' single-site holders intact.
            let j = combo
                .iter()
                .enumerate()
                .position(|(j, &a)| a != 0 && self.gens[j].x_exponents()[site] != 0)
                .ok_or_else(|| {
                    StabError::InvariantViolation(format!(
                        "X at site {site} resolved to an empty combination"
                    ))
                })?;
            let mut pure = x_s;
            pure.bump_phase(-2 * outcome as i64);
            self.gens[j] = pure;
            debug_assert!(self.validate().is_ok());
            return Ok(MeasurementRecord {
                site,
                outcome,
                was_random: false,
            });
        }
        let pivot = anti[0];
        let c_p = self.gens[pivot].z_exponents()[site];
        let inv_cp = inv_mod(c_p, d);
        for &j in &anti[1..] {
            let c_j = self.gens[j].z_exponents()[site];
            let t = gf::mul_mod(gf::sub_mod(0, c_j, d), inv_cp, d);
            let factor = self.gens[pivot].pow(t);
            self.gens[j] = self.gens[j].mul(&factor)?;
        }
        let outcome = rng.gen_range(0..d);
        let mut replacement = PauliOp::x_op(d as usize, self.n, site)?;
        replacement.bump_phase(-2 * outcome as i64);
        self.gens[pivot] = replacement;
        debug_assert!(self.validate().is_ok());
        Ok(MeasurementRecord {
            site,
            outcome,
            was_random: true,
        })
    }

    /// If op's exponent pattern lies in the group, return the tau exponent K
    /// of the group element with that pattern along with the combination.
    fn member_phase(&self, op: &PauliOp) -> Option<(i64, Vec<u8>)> {
        let rows: Vec<Vec<u8>> = self.gens.iter().map(PauliOp::symplectic_row).collect();
        let combo = gf::solve_combination(&rows, &op.symplectic_row(), self.d)?;
        let mut acc = PauliOp::identity(self.d as usize, self.n).expect("valid dims");
        for (j, &a) in combo.iter().enumerate() {
            if a != 0 {
                acc = acc.mul(&self.gens[j].pow(a)).expect("same space");
            }
        }
        debug_assert_eq!(acc.x_exponents(), op.x_exponents());
        debug_assert_eq!(acc.z_exponents(), op.z_exponents());
        Some((acc.phase_exponent() as i64, combo))
    }

    /// Residual tau exponent r with tau^r op in the group, or None when the
    /// exponent pattern of op lies outside the group. contains(op) iff 0.
    pub fn phase_defect(&self, op: &PauliOp) -> Option<i64> {
        self.member_phase(op)
            .map(|(k, _)| (k - op.phase_exponent() as i64).rem_euclid(tau_order(self.d)))
    }

    /// True when op (phase included) is an element of the stabilizer group.
    pub fn contains(&self, op: &PauliOp) -> bool {
        self.phase_defect(op) == Some(0)
    }

    /// <psi| op |psi> for the stabilized state: a tau power when op's
    /// pattern is in the group, 0 when it anticommutes with some generator.
    pub fn expectation(&self, op: &PauliOp) -> Result<C64, StabError> {
        if op.dim() != self.d as usize || op.sites() != self.n {
            return Err(StabError::SpaceMismatch);
        }
        for g in &self.gens {
            if g.commutation_exponent(op)? != 0 {
                return Ok(C64::new(0.0, 0.0));
            }
        }
        let (k, _) = self.member_phase(op).ok_or_else(|| {
            StabError::InvariantViolation(
                "operator commutes with a full-rank group but is outside it".into(),
            )
        })?;
        // op = tau^{k_op - K} (group element), so <op> = tau^{k_op - K}
        let mut probe = PauliOp::identity(self.d as usize, self.n)?;
        probe.bump_phase(op.phase_exponent() as i64 - k);
        Ok(probe.phase_value())
    }

    /// Drop sites whose qudits are disentangled (each dropped site must be
    /// held by a pure X-type generator, as after an X measurement), keeping
    /// `sites` in the given order.
    pub fn restrict_to(&self, sites: &[usize]) -> Result<Self, StabError> {
        for &s in sites {
            self.check_site(s)?;
        }
        let keep: std::collections::BTreeSet<usize> = sites.iter().copied().collect();
        if keep.len() != sites.len() {
            return Err(StabError::InvariantViolation("duplicate site in restriction".into()));
        }
        let mut gens = self.gens.clone();
        for s in 0..self.n {
            if keep.contains(&s) {
                continue;
            }
            // the dropped site must appear in exactly one generator, as a
            // pure X power (z components vanish after an X measurement)
            if gens.iter().any(|g| g.z_exponents()[s] != 0) {
                return Err(StabError::InvariantViolation(format!(
                    "site {s} still carries Z weight; it was not measured in X"
                )));
            }
            let Some(pivot) = gens.iter().position(|g| {
                g.x_exponents()[s] != 0
                    && (0..self.n).all(|t| {
                        t == s || (g.x_exponents()[t] == 0 && g.z_exponents()[t] == 0)
                    })
            }) else {
                return Err(StabError::InvariantViolation(format!(
                    "site {s} is not held by a pure single-site generator"
                )));
            };
            let a = gens[pivot].x_exponents()[s];
            let inv_a = inv_mod(a, self.d);
            let pivot_op = gens[pivot].clone();
            for (j, g) in gens.iter_mut().enumerate() {
                if j == pivot {
                    continue;
                }
                let xs = g.x_exponents()[s];
                if xs != 0 {
                    let t = gf::mul_mod(gf::sub_mod(0, xs, self.d), inv_a, self.d);
                    *g = g.mul(&pivot_op.pow(t))?;
                }
            }
            gens.remove(pivot);
        }
        let gens = gens.into_iter().map(|g| g.restricted_to(sites)).collect();
        let out = Self {
            d: self.d,
            n: sites.len(),
            gens,
        };
        out.validate()?;
        Ok(out)
    }

    /// Canonical generating set: symplectic rows in reduced row echelon form
    /// with exact phase tracking, phases reduced modulo the order of tau.
    /// Two tableaus describe the same state iff their canonical forms match.
    pub fn canonical_form(&self) -> (Vec<Vec<u8>>, Vec<u8>) {
        let d = self.d;
        let mut ops = self.gens.clone();
        let ncols = 2 * self.n;
        let mut r = 0;
        for col in 0..ncols {
            let Some(pivot) = (r..ops.len()).find(|&i| ops[i].symplectic_row()[col] != 0) else {
                continue;
            };
            ops.swap(r, pivot);
            let lead = ops[r].symplectic_row()[col];
            ops[r] = ops[r].pow(inv_mod(lead, d));
            for i in 0..ops.len() {
                if i != r {
                    let coef = ops[i].symplectic_row()[col];
                    if coef != 0 {
                        let t = gf::sub_mod(0, coef, d);
                        let factor = ops[r].pow(t);
                        ops[i] = ops[i].mul(&factor).expect("same space");
                    }
                }
            }
            r += 1;
            if r == ops.len() {
                break;
            }
        }
        let rows = ops.iter().map(PauliOp::symplectic_row).collect();
        let phases = ops
            .iter()
            .map(|g| (g.phase_exponent() as i64).rem_euclid(tau_order(d)) as u8)
            .collect();
        (rows, phases)
    }

    pub fn same_group(&self, other: &Self) -> bool {
        self.d == other.d && self.n == other.n && self.canonical_form() == other.canonical_form()
    }
}

/// Outcome label m with omega^{-m} = tau^{k}: m = -k * inv(2) mod d, where
/// for d = 2 the exponent k must be even for the element to be Hermitian.
fn outcome_from_phase(d: u8, k: i64) -> Result<u8, StabError> {
    let m = if d == 2 {
        if k % 2 != 0 {
            return Err(StabError::InvariantViolation(format!(
                "deterministic X outcome with odd tau exponent {k}"
            )));
        }
        (-(k / 2)).rem_euclid(2)
    } else {
        // inv(2) = 2 mod 3
        (-(2 * k)).rem_euclid(d as i64)
    };
    Ok(m as u8)
}
