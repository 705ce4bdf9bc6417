//! Dense statevector reference for qudit circuits. Exponential in the site
//! count and entirely independent of the tableau code paths: this is the
//! oracle the stabilizer machinery is checked against, so it must stay
//! straightforward rather than fast.
//!
//! Site 0 is the most significant digit of the flat index, matching the
//! tensor-factor ordering used elsewhere in the crate.

use super::pauli::PauliOp;
use super::StabError;
use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rand::Rng;
use std::f64::consts::PI;

pub fn omega(d: usize) -> C64 {
    C64::from_polar(1.0, 2.0 * PI / d as f64)
}

/// Single-qudit matrix of X^x Z^z (no tau prefactor).
pub fn xz_matrix(d: usize, x: u8, z: u8) -> DMatrix<C64> {
    let mut m = DMatrix::zeros(d, d);
    let w = omega(d);
    for k in 0..d {
        // X^x Z^z |k> = omega^{z k} |k + x>
        m[((k + x as usize) % d, k)] = w.powu(z as u32 * k as u32);
    }
    m
}

/// Full d^n matrix of a Pauli operator, phase included. Test-sized n only.
pub fn pauli_matrix(op: &PauliOp) -> DMatrix<C64> {
    let d = op.dim();
    let mut m = DMatrix::identity(1, 1);
    for i in 0..op.sites() {
        m = m.kronecker(&xz_matrix(d, op.x_exponents()[i], op.z_exponents()[i]));
    }
    m * op.phase_value()
}

/// Fourier gate with F X F^dag = Z, F Z F^dag = X^{-1}:
/// F = d^{-1/2} sum_{j,k} omega^{j k} |j><k|.
pub fn fourier_matrix(d: usize) -> DMatrix<C64> {
    let w = omega(d);
    let norm = (d as f64).sqrt().recip();
    DMatrix::from_fn(d, d, |j, k| w.powu((j * k) as u32) * norm)
}

/// Diagonal phase gate: diag(1, i) for d = 2, diag(1, 1, omega) for d = 3.
pub fn s_matrix(d: usize) -> DMatrix<C64> {
    let mut m = DMatrix::zeros(d, d);
    for k in 0..d {
        let phase = if d == 2 {
            // k(k+1)/2 quarter turns
            C64::from_polar(1.0, PI / 2.0 * k as f64)
        } else {
            omega(d).powu((k * (k.max(1) - 1) / 2) as u32)
        };
        m[(k, k)] = phase;
    }
    m
}

#[derive(Debug, Clone)]
pub struct DenseState {
    d: usize,
    n: usize,
    amps: Vec<C64>,
}

impl DenseState {
    pub fn plus_state(d: usize, n: usize) -> Result<Self, StabError> {
        if !matches!(d, 2 | 3) {
            return Err(StabError::UnsupportedDimension(d));
        }
        let dim = d.pow(n as u32);
        let a = C64::new((dim as f64).sqrt().recip(), 0.0);
        Ok(Self {
            d,
            n,
            amps: vec![a; dim],
        })
    }

    pub fn ghz_state(d: usize, n: usize) -> Result<Self, StabError> {
        if !matches!(d, 2 | 3) {
            return Err(StabError::UnsupportedDimension(d));
        }
        let dim = d.pow(n as u32);
        let mut amps = vec![C64::new(0.0, 0.0); dim];
        let a = C64::new((d as f64).sqrt().recip(), 0.0);
        for k in 0..d {
            let mut idx = 0usize;
            for _ in 0..n {
                idx = idx * d + k;
            }
            amps[idx] = a;
        }
        Ok(Self { d, n, amps })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn sites(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    fn stride(&self, site: usize) -> usize {
        self.d.pow((self.n - 1 - site) as u32)
    }

    pub fn norm_squared(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn inner(&self, other: &Self) -> C64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn apply_single(&mut self, site: usize, m: &DMatrix<C64>) -> Result<(), StabError> {
        if site >= self.n {
            return Err(StabError::SiteOutOfRange { site, n: self.n });
        }
        let d = self.d;
        let stride = self.stride(site);
        let block = stride * d;
        let mut scratch = vec![C64::new(0.0, 0.0); d];
        for base in (0..self.amps.len()).step_by(block) {
            for off in 0..stride {
                for k in 0..d {
                    scratch[k] = self.amps[base + off + k * stride];
                }
                for j in 0..d {
                    let mut acc = C64::new(0.0, 0.0);
                    for k in 0..d {
                        acc += m[(j, k)] * scratch[k];
                    }
                    self.amps[base + off + j * stride] = acc;
                }
            }
        }
        Ok(())
    }

    pub fn apply_czd(&mut self, i: usize, j: usize, power: i64) -> Result<(), StabError> {
        if i >= self.n {
            return Err(StabError::SiteOutOfRange { site: i, n: self.n });
        }
        if j >= self.n {
            return Err(StabError::SiteOutOfRange { site: j, n: self.n });
        }
        if i == j {
            return Err(StabError::SpaceMismatch);
        }
        let d = self.d;
        let w = omega(d);
        let (si, sj) = (self.stride(i), self.stride(j));
        let p = power.rem_euclid(d as i64) as usize;
        for idx in 0..self.amps.len() {
            let a = idx / si % d;
            let b = idx / sj % d;
            self.amps[idx] *= w.powu((p * a * b) as u32);
        }
        Ok(())
    }

    pub fn apply_pauli(&mut self, op: &PauliOp) -> Result<(), StabError> {
        if op.dim() != self.d || op.sites() != self.n {
            return Err(StabError::SpaceMismatch);
        }
        for site in 0..self.n {
            let (x, z) = (op.x_exponents()[site], op.z_exponents()[site]);
            if x != 0 || z != 0 {
                self.apply_single(site, &xz_matrix(self.d, x, z))?;
            }
        }
        let phase = op.phase_value();
        for a in &mut self.amps {
            *a *= phase;
        }
        Ok(())
    }

    pub fn expect(&self, op: &PauliOp) -> Result<C64, StabError> {
        let mut moved = self.clone();
        moved.apply_pauli(op)?;
        Ok(self.inner(&moved))
    }

    /// Probability of X-basis outcome m at a site: the squared norm of the
    /// projection onto the eigenket d^{-1/2} sum_k omega^{-mk} |k>.
    pub fn x_outcome_probability(&self, site: usize, m: u8) -> Result<f64, StabError> {
        Ok(self.project_amplitudes(site, m)?.iter().map(|a| a.norm_sqr()).sum())
    }

    fn project_amplitudes(&self, site: usize, m: u8) -> Result<Vec<C64>, StabError> {
        if site >= self.n {
            return Err(StabError::SiteOutOfRange { site, n: self.n });
        }
        let d = self.d;
        let w = omega(d);
        let stride = self.stride(site);
        let block = stride * d;
        let norm = (d as f64).sqrt().recip();
        let sub = self.amps.len() / d;
        let mut out = vec![C64::new(0.0, 0.0); sub];
        let mut pos = 0usize;
        for base in (0..self.amps.len()).step_by(block) {
            for off in 0..stride {
                let mut acc = C64::new(0.0, 0.0);
                for k in 0..d {
                    // <xtilde_m|k> = omega^{+mk}/sqrt(d)
                    acc += w.powu(m as u32 * k as u32) * self.amps[base + off + k * stride];
                }
                out[pos] = acc * norm;
                pos += 1;
            }
        }
        Ok(out)
    }

    /// Measure X at a site. `forced` replays a recorded outcome; otherwise
    /// the outcome is sampled from the Born rule. The measured site is
    /// projected in place (state stays full-sized); returns (outcome, prob).
    pub fn measure_x<R: Rng>(
        &mut self,
        site: usize,
        forced: Option<u8>,
        rng: &mut R,
    ) -> Result<(u8, f64), StabError> {
        let d = self.d;
        let probs: Vec<f64> = (0..d as u8)
            .map(|m| self.x_outcome_probability(site, m))
            .collect::<Result<_, _>>()?;
        let m = match forced {
            Some(m) => m,
            None => {
                let mut u: f64 = rng.gen::<f64>() * probs.iter().sum::<f64>();
                let mut pick = d as u8 - 1;
                for (k, &p) in probs.iter().enumerate() {
                    if u < p {
                        pick = k as u8;
                        break;
                    }
                    u -= p;
                }
                pick
            }
        };
        let prob = probs[m as usize];
        if prob < 1e-14 {
            return Err(StabError::InvariantViolation(format!(
                "forced X outcome {m} at site {site} has probability {prob:.2e}"
            )));
        }
        let projected = self.project_amplitudes(site, m)?;
        // rebuild the full state as |xtilde_m> at the site tensor the rest
        let w = omega(d);
        let norm = (d as f64).sqrt().recip() / prob.sqrt();
        let stride = self.stride(site);
        let block = stride * d;
        let mut pos = 0usize;
        for base in (0..self.amps.len()).step_by(block) {
            for off in 0..stride {
                for k in 0..d {
                    // |xtilde_m>[k] = omega^{-mk}/sqrt(d)
                    let amp = w.powu(((d as u8 - m) as u32 % d as u32) * k as u32);
                    self.amps[base + off + k * stride] = amp * projected[pos] * norm;
                }
                pos += 1;
            }
        }
        Ok((m, prob))
    }

    /// Contract away a site that is in a product state with the rest (e.g.
    /// just measured), leaving the state on the remaining sites in order.
    pub fn factor_out_site(&self, site: usize, m: u8) -> Result<Self, StabError> {
        let projected = self.project_amplitudes(site, m)?;
        let total: f64 = projected.iter().map(|a| a.norm_sqr()).sum();
        if total < 1e-14 {
            return Err(StabError::InvariantViolation(format!(
                "cannot factor out site {site} with outcome {m}: zero weight"
            )));
        }
        let scale = C64::new(total.sqrt().recip(), 0.0);
        Ok(Self {
            d: self.d,
            n: self.n - 1,
            amps: projected.into_iter().map(|a| a * scale).collect(),
        })
    }
}
