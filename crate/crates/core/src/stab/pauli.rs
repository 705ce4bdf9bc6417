//! Generalized Pauli operators on n qudits of prime dimension d.
//!
//! An operator is tau^k prod_i X_i^{x_i} Z_i^{z_i}, with X|j> = |j+1 mod d>,
//! Z|j> = omega^j |j>, omega = e^{2 pi i / d}. The phase root is
//! tau = e^{i pi (d^2 + 1) / d}, which satisfies tau^2 = omega and tau^{2d} = 1
//! (tau = i for d = 2, omega^2 for d = 3); tracking k modulo 2d keeps every
//! Clifford conjugation exact, including the half-phases the d = 2 group
//! needs.
//!
//! The multiplication rule follows from Z^z X^x = omega^{z x} X^x Z^z:
//! reordering the right factor's X past the left factor's Z costs
//! tau^{2 z_a . x_b}.

use super::gf::{add_mod, sub_mod};
use super::StabError;
use num_complex::Complex64 as C64;
use std::f64::consts::PI;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PauliOp {
    d: u8,
    x: Vec<u8>,
    z: Vec<u8>,
    /// exponent of tau, modulo 2d
    phase: u8,
}

fn check_dim(d: usize) -> Result<u8, StabError> {
    match d {
        2 | 3 => Ok(d as u8),
        other => Err(StabError::UnsupportedDimension(other)),
    }
}

impl PauliOp {
    pub fn identity(d: usize, n: usize) -> Result<Self, StabError> {
        let d = check_dim(d)?;
        Ok(Self {
            d,
            x: vec![0; n],
            z: vec![0; n],
            phase: 0,
        })
    }

    /// tau^phase * prod X_i^{x_i} Z_i^{z_i}; exponents reduced mod d.
    pub fn new(d: usize, x: Vec<u8>, z: Vec<u8>, phase: i64) -> Result<Self, StabError> {
        let dd = check_dim(d)?;
        if x.len() != z.len() {
            return Err(StabError::SpaceMismatch);
        }
        let mut op = Self {
            d: dd,
            x,
            z,
            phase: 0,
        };
        for v in op.x.iter_mut().chain(op.z.iter_mut()) {
            *v %= dd;
        }
        op.phase = phase.rem_euclid(2 * dd as i64) as u8;
        Ok(op)
    }

    pub fn x_op(d: usize, n: usize, site: usize) -> Result<Self, StabError> {
        let mut op = Self::identity(d, n)?;
        if site >= n {
            return Err(StabError::SiteOutOfRange { site, n });
        }
        op.x[site] = 1;
        Ok(op)
    }

    pub fn z_op(d: usize, n: usize, site: usize) -> Result<Self, StabError> {
        let mut op = Self::identity(d, n)?;
        if site >= n {
            return Err(StabError::SiteOutOfRange { site, n });
        }
        op.z[site] = 1;
        Ok(op)
    }

    pub fn dim(&self) -> usize {
        self.d as usize
    }

    pub fn sites(&self) -> usize {
        self.x.len()
    }

    pub fn x_exponents(&self) -> &[u8] {
        &self.x
    }

    pub fn z_exponents(&self) -> &[u8] {
        &self.z
    }

    pub fn phase_exponent(&self) -> u8 {
        self.phase
    }

    pub(crate) fn set_phase(&mut self, phase: i64) {
        self.phase = phase.rem_euclid(2 * self.d as i64) as u8;
    }

    pub(crate) fn bump_phase(&mut self, delta: i64) {
        self.set_phase(self.phase as i64 + delta);
    }

    pub(crate) fn x_mut(&mut self) -> &mut [u8] {
        &mut self.x
    }

    pub(crate) fn z_mut(&mut self) -> &mut [u8] {
        &mut self.z
    }

    /// The symplectic row (x | z) used by group-membership linear algebra.
    pub fn symplectic_row(&self) -> Vec<u8> {
        let mut row = self.x.clone();
        row.extend_from_slice(&self.z);
        row
    }

    pub fn is_identity_op(&self) -> bool {
        self.x.iter().all(|&v| v == 0) && self.z.iter().all(|&v| v == 0)
    }

    /// tau^phase as a complex number.
    pub fn phase_value(&self) -> C64 {
        let d = self.d as f64;
        C64::from_polar(1.0, PI * (d * d + 1.0) / d * self.phase as f64)
    }

    /// self * other, exact phase included.
    pub fn mul(&self, other: &Self) -> Result<Self, StabError> {
        if self.d != other.d || self.x.len() != other.x.len() {
            return Err(StabError::SpaceMismatch);
        }
        let d = self.d;
        let mut cross = 0i64;
        for i in 0..self.x.len() {
            cross += self.z[i] as i64 * other.x[i] as i64;
        }
        let x = self
            .x
            .iter()
            .zip(&other.x)
            .map(|(&a, &b)| add_mod(a, b, d))
            .collect();
        let z = self
            .z
            .iter()
            .zip(&other.z)
            .map(|(&a, &b)| add_mod(a, b, d))
            .collect();
        Self::new(
            d as usize,
            x,
            z,
            self.phase as i64 + other.phase as i64 + 2 * cross,
        )
    }

    pub fn inverse(&self) -> Self {
        let d = self.d;
        let mut cross = 0i64;
        for i in 0..self.x.len() {
            cross += self.z[i] as i64 * self.x[i] as i64;
        }
        let x = self.x.iter().map(|&a| sub_mod(0, a, d)).collect();
        let z = self.z.iter().map(|&a| sub_mod(0, a, d)).collect();
        Self::new(d as usize, x, z, -(self.phase as i64) + 2 * cross).expect("same space")
    }

    /// self^e for e >= 0, by repeated multiplication (e < 2d in practice).
    pub fn pow(&self, e: u8) -> Self {
        let mut acc = Self::identity(self.d as usize, self.x.len()).expect("valid dims");
        for _ in 0..e {
            acc = acc.mul(self).expect("same space");
        }
        acc
    }

    /// Symplectic commutation exponent c with a b = omega^c b a:
    /// c = sum_i (z_a x_b - x_a z_b) mod d.
    pub fn commutation_exponent(&self, other: &Self) -> Result<u8, StabError> {
        if self.d != other.d || self.x.len() != other.x.len() {
            return Err(StabError::SpaceMismatch);
        }
        let mut c = 0i64;
        for i in 0..self.x.len() {
            c += self.z[i] as i64 * other.x[i] as i64 - self.x[i] as i64 * other.z[i] as i64;
        }
        Ok(c.rem_euclid(self.d as i64) as u8)
    }

    pub fn commutes_with(&self, other: &Self) -> Result<bool, StabError> {
        Ok(self.commutation_exponent(other)? == 0)
    }

    /// Keep only the listed sites (in the given order). The caller must
    /// ensure the dropped sites carry no X or Z weight.
    pub(crate) fn restricted_to(&self, sites: &[usize]) -> Self {
        let x = sites.iter().map(|&s| self.x[s]).collect();
        let z = sites.iter().map(|&s| self.z[s]).collect();
        Self {
            d: self.d,
            x,
            z,
            phase: self.phase,
        }
    }
}

impl std::fmt::Display for PauliOp {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "t{}", self.phase)?;
        for i in 0..self.x.len() {
            match (self.x[i], self.z[i]) {
                (0, 0) => write!(f, " .")?,
                (x, 0) => write!(f, " X{x}")?,
                (0, z) => write!(f, " Z{z}")?,
                (x, z) => write!(f, " X{x}Z{z}")?,
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stab::dense::pauli_matrix;

    #[test]
    fn tau_squares_to_omega() {
        for d in [2usize, 3] {
            let mut op = PauliOp::identity(d, 1).unwrap();
            op.bump_phase(2);
            let omega = C64::from_polar(1.0, 2.0 * PI / d as f64);
            assert!((op.phase_value() - omega).norm() < 1e-14);
            let mut full = PauliOp::identity(d, 1).unwrap();
            full.bump_phase(2 * d as i64);
            assert!((full.phase_value() - C64::new(1.0, 0.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn zx_reorder_rule() {
        for d in [2usize, 3] {
            let x = PauliOp::x_op(d, 1, 0).unwrap();
            let z = PauliOp::z_op(d, 1, 0).unwrap();
            let zx = z.mul(&x).unwrap();
            let xz = x.mul(&z).unwrap();
            // ZX = omega XZ
            assert_eq!(zx.x_exponents(), xz.x_exponents());
            assert_eq!(zx.z_exponents(), xz.z_exponents());
            assert_eq!(
                zx.phase_exponent(),
                (xz.phase_exponent() + 2) % (2 * d as u8)
            );
        }
    }

    #[test]
    fn multiplication_matches_dense_matrices() {
        for d in [2usize, 3] {
            let cases: Vec<PauliOp> = (0..d as u8)
                .flat_map(|x| {
                    (0..d as u8).flat_map(move |z| {
                        (0..2 * d as i64).map(move |k| {
                            PauliOp::new(d, vec![x], vec![z], k).unwrap()
                        })
                    })
                })
                .collect();
            for a in &cases {
                for b in &cases {
                    let prod = a.mul(b).unwrap();
                    let dm = pauli_matrix(a) * pauli_matrix(b);
                    let want = pauli_matrix(&prod);
                    let dev = (dm - want).iter().map(|c| c.norm()).fold(0.0, f64::max);
                    assert!(dev < 1e-12, "d={d} a={a} b={b}");
                }
            }
        }
    }

    #[test]
    fn inverse_and_power() {
        for d in [2usize, 3] {
            let op = PauliOp::new(d, vec![1, 0], vec![1, 2 % d as u8], 3).unwrap();
            let id = op.mul(&op.inverse()).unwrap();
            assert!(id.is_identity_op());
            assert_eq!(id.phase_exponent(), 0);
            // X Z has order d up to phase; op^d must be a pure phase
            let p = op.pow(d as u8);
            assert!(p.is_identity_op());
        }
    }

    #[test]
    fn commutation_exponent_matches_dense() {
        for d in [2usize, 3] {
            let a = PauliOp::new(d, vec![1, 1], vec![0, 2 % d as u8], 0).unwrap();
            let b = PauliOp::new(d, vec![0, 1], vec![1, 1], 0).unwrap();
            let c = a.commutation_exponent(&b).unwrap();
            // a b = omega^c b a
            let left = pauli_matrix(&a.mul(&b).unwrap());
            let mut right = pauli_matrix(&b.mul(&a).unwrap());
            let omega = C64::from_polar(1.0, 2.0 * PI * c as f64 / d as f64);
            right *= omega;
            let dev = (left - right).iter().map(|v| v.norm()).fold(0.0, f64::max);
            assert!(dev < 1e-12);
        }
    }

    #[test]
    fn rejects_bad_dimension_and_sites() {
        assert!(matches!(
            PauliOp::identity(4, 2),
            Err(StabError::UnsupportedDimension(4))
        ));
        assert!(matches!(
            PauliOp::x_op(2, 2, 5),
            Err(StabError::SiteOutOfRange { site: 5, n: 2 })
        ));
    }
}
