use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest register the dense simulator will allocate (2^24 amplitudes, 256 MiB).
pub const MAX_QUBITS: usize = 24;

/// 2x2 complex matrix in row-major order.
pub type Gate2 = [[Complex64; 2]; 2];

/// Dense statevector of an `n`-qubit register.
///
/// Qubit 0 is the most significant bit of the basis-state index, so for two
/// qubits the amplitudes are ordered `|00⟩, |01⟩, |10⟩, |11⟩` with the left
/// digit belonging to qubit 0.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuantumState {
    num_qubits: usize,
    amplitudes: Vec<Complex64>,
}

fn check_capacity(num_qubits: usize) -> Result<()> {
    if num_qubits == 0 || num_qubits > MAX_QUBITS {
        return Err(Error::Capacity(format!(
            "{num_qubits} qubits requested, simulator supports 1..={MAX_QUBITS}"
        )));
    }
    Ok(())
}

/// Returns `log2(len)` if `len` is a power of two.
pub(crate) fn log2_exact(len: usize) -> Option<usize> {
    (len.is_power_of_two()).then(|| len.trailing_zeros() as usize)
}

impl QuantumState {
    /// `|0…0⟩` on `num_qubits` qubits.
    pub fn zero(num_qubits: usize) -> Result<Self> {
        check_capacity(num_qubits)?;
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << num_qubits];
        amplitudes[0] = Complex64::new(1.0, 0.0);
        Ok(Self {
            num_qubits,
            amplitudes,
        })
    }

    /// Wraps raw amplitudes. The vector length must be a power of two and the
    /// norm must be 1 within `1e-10`.
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        let num_qubits = log2_exact(amplitudes.len()).ok_or_else(|| {
            Error::shape(format!(
                "amplitude vector length {} is not a power of two",
                amplitudes.len()
            ))
        })?;
        check_capacity(num_qubits)?;
        let state = Self {
            num_qubits,
            amplitudes,
        };
        let norm = state.norm();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::Contract(format!("state norm {norm} is not 1")));
        }
        Ok(state)
    }

    /// Amplitude embedding: `|x⟩ = Σ_j x_j |j⟩ / ‖x‖₂`.
    ///
    /// Negative entries are allowed and become negative amplitudes.
    pub fn amplitude_embed(x: &[f64]) -> Result<Self> {
        let num_qubits = log2_exact(x.len()).ok_or_else(|| {
            Error::shape(format!(
                "amplitude embedding needs a power-of-two length, got {}",
                x.len()
            ))
        })?;
        check_capacity(num_qubits)?;
        if let Some(i) = x.iter().position(|v| !v.is_finite()) {
            return Err(Error::Numeric(format!("amplitude input entry {i} is {}", x[i])));
        }
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::DegenerateInput(
                "amplitude embedding of an all-zero vector".into(),
            ));
        }
        let amplitudes = x.iter().map(|&v| Complex64::new(v / norm, 0.0)).collect();
        Ok(Self {
            num_qubits,
            amplitudes,
        })
    }

    /// Angle embedding: qubit `i` is prepared as `Ry(phi[i])|0⟩`.
    pub fn angle_embed(phi: &[f64]) -> Result<Self> {
        check_capacity(phi.len())?;
        if let Some(i) = phi.iter().position(|v| !v.is_finite()) {
            return Err(Error::Numeric(format!("embedding angle {i} is {}", phi[i])));
        }
        // Product state: amplitude of |b_0 b_1 …⟩ is Π_i (cos or sin)(phi_i / 2).
        let n = phi.len();
        let halves: Vec<(f64, f64)> = phi.iter().map(|a| ((a / 2.0).cos(), (a / 2.0).sin())).collect();
        let amplitudes = (0..1usize << n)
            .map(|idx| {
                let amp = halves.iter().enumerate().fold(1.0, |acc, (q, &(c, s))| {
                    if idx >> (n - 1 - q) & 1 == 1 {
                        acc * s
                    } else {
                        acc * c
                    }
                });
                Complex64::new(amp, 0.0)
            })
            .collect();
        Ok(Self {
            num_qubits: n,
            amplitudes,
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    fn check_qubit(&self, qubit: usize) -> Result<()> {
        if qubit >= self.num_qubits {
            return Err(Error::Index(format!(
                "qubit {qubit} on a {}-qubit register",
                self.num_qubits
            )));
        }
        Ok(())
    }

    fn stride(&self, qubit: usize) -> usize {
        1 << (self.num_qubits - 1 - qubit)
    }

    /// Applies an arbitrary 2x2 matrix to `qubit` with in-place pair updates.
    pub fn apply_single(&mut self, qubit: usize, gate: &Gate2) -> Result<()> {
        self.check_qubit(qubit)?;
        let stride = self.stride(qubit);
        for block in self.amplitudes.chunks_exact_mut(2 * stride) {
            let (lo, hi) = block.split_at_mut(stride);
            for (a0, a1) in lo.iter_mut().zip(hi.iter_mut()) {
                let (x0, x1) = (*a0, *a1);
                *a0 = gate[0][0] * x0 + gate[0][1] * x1;
                *a1 = gate[1][0] * x0 + gate[1][1] * x1;
            }
        }
        Ok(())
    }

    /// `R(ψ, θ, ω) = Rz(ω)·Ry(θ)·Rz(ψ)` on `qubit`.
    pub fn apply_rot(&mut self, qubit: usize, psi: f64, theta: f64, omega: f64) -> Result<()> {
        self.apply_single(qubit, &rot_matrix(psi, theta, omega))
    }

    /// Inverse of [`apply_rot`](Self::apply_rot): `Rz(−ψ)·Ry(−θ)·Rz(−ω)`.
    pub fn apply_rot_inverse(&mut self, qubit: usize, psi: f64, theta: f64, omega: f64) -> Result<()> {
        let m = matmul2(&matmul2(&rz_matrix(-psi), &ry_matrix(-theta)), &rz_matrix(-omega));
        self.apply_single(qubit, &m)
    }

    pub fn apply_ry(&mut self, qubit: usize, theta: f64) -> Result<()> {
        self.apply_single(qubit, &ry_matrix(theta))
    }

    /// Flips `target` on every basis state whose `control` bit is set.
    pub fn apply_cnot(&mut self, control: usize, target: usize) -> Result<()> {
        self.check_qubit(control)?;
        self.check_qubit(target)?;
        if control == target {
            return Err(Error::Argument(format!(
                "CNOT control and target are both qubit {control}"
            )));
        }
        let cmask = self.stride(control);
        let tmask = self.stride(target);
        for i in 0..self.amplitudes.len() {
            // Visit each swapped pair once, from its target-bit-0 member.
            if i & cmask != 0 && i & tmask == 0 {
                self.amplitudes.swap(i, i | tmask);
            }
        }
        Ok(())
    }

    /// `|amplitude_i|²` for every basis state.
    pub fn basis_probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    /// `⟨Z_i⟩` for every qubit `i`.
    pub fn expectation_z_all(&self) -> Vec<f64> {
        let n = self.num_qubits;
        let mut out = vec![0.0; n];
        for (idx, a) in self.amplitudes.iter().enumerate() {
            let p = a.norm_sqr();
            for (q, e) in out.iter_mut().enumerate() {
                if idx >> (n - 1 - q) & 1 == 1 {
                    *e -= p;
                } else {
                    *e += p;
                }
            }
        }
        out
    }
}

pub fn rz_matrix(angle: f64) -> Gate2 {
    let zero = Complex64::new(0.0, 0.0);
    [
        [Complex64::from_polar(1.0, -angle / 2.0), zero],
        [zero, Complex64::from_polar(1.0, angle / 2.0)],
    ]
}

pub fn ry_matrix(angle: f64) -> Gate2 {
    let (s, c) = (angle / 2.0).sin_cos();
    [
        [Complex64::new(c, 0.0), Complex64::new(-s, 0.0)],
        [Complex64::new(s, 0.0), Complex64::new(c, 0.0)],
    ]
}

/// Matrix of `Rz(ω)·Ry(θ)·Rz(ψ)`.
pub fn rot_matrix(psi: f64, theta: f64, omega: f64) -> Gate2 {
    let (s, c) = (theta / 2.0).sin_cos();
    let sum = (psi + omega) / 2.0;
    let diff = (psi - omega) / 2.0;
    [
        [Complex64::from_polar(c, -sum), -Complex64::from_polar(s, diff)],
        [Complex64::from_polar(s, -diff), Complex64::from_polar(c, sum)],
    ]
}

pub fn matmul2(a: &Gate2, b: &Gate2) -> Gate2 {
    let mut out = [[Complex64::new(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn reals(state: &QuantumState) -> Vec<f64> {
        state.amplitudes().iter().map(|a| a.re).collect()
    }

    fn assert_close(a: &[f64], b: &[f64], tol: f64) {
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(b) {
            assert!((x - y).abs() <= tol, "{a:?} vs {b:?}");
        }
    }

    #[test]
    fn zero_state() {
        assert_eq!(reals(&QuantumState::zero(1).unwrap()), vec![1.0, 0.0]);
        assert_eq!(reals(&QuantumState::zero(2).unwrap()), vec![1.0, 0.0, 0.0, 0.0]);
        assert!(matches!(QuantumState::zero(25), Err(Error::Capacity(_))));
        assert!(matches!(QuantumState::zero(0), Err(Error::Capacity(_))));
    }

    #[test]
    fn amplitude_embedding() {
        let s = QuantumState::amplitude_embed(&[1.0, 0.0, 0.0, 0.0]).unwrap();
        assert_close(&reals(&s), &[1.0, 0.0, 0.0, 0.0], 1e-15);
        let s = QuantumState::amplitude_embed(&[3.0, 4.0, 0.0, 0.0]).unwrap();
        assert_close(&reals(&s), &[0.6, 0.8, 0.0, 0.0], 1e-15);
        let s = QuantumState::amplitude_embed(&[1.0; 4]).unwrap();
        assert_close(&reals(&s), &[0.5; 4], 1e-15);
        let s = QuantumState::amplitude_embed(&[-3.0, 4.0]).unwrap();
        assert_close(&reals(&s), &[-0.6, 0.8], 1e-15);

        assert!(matches!(
            QuantumState::amplitude_embed(&[0.0; 4]),
            Err(Error::DegenerateInput(_))
        ));
        assert!(matches!(
            QuantumState::amplitude_embed(&[1.0, 2.0, 3.0]),
            Err(Error::Shape(_))
        ));
    }

    #[test]
    fn angle_embedding() {
        let s = QuantumState::angle_embed(&[0.0, 0.0]).unwrap();
        assert_close(&reals(&s), &[1.0, 0.0, 0.0, 0.0], 1e-15);
        let s = QuantumState::angle_embed(&[PI]).unwrap();
        assert_close(&reals(&s), &[0.0, 1.0], 1e-15);
        let s = QuantumState::angle_embed(&[PI / 2.0]).unwrap();
        assert_close(&reals(&s), &[FRAC_1_SQRT_2, FRAC_1_SQRT_2], 1e-15);
        assert!(matches!(
            QuantumState::angle_embed(&[f64::NAN]),
            Err(Error::Numeric(_))
        ));
    }

    #[test]
    fn angle_embedding_matches_ry_on_zero_state() {
        let phi = [0.3, -1.2, 2.5];
        let embedded = QuantumState::angle_embed(&phi).unwrap();
        let mut manual = QuantumState::zero(3).unwrap();
        for (q, &a) in phi.iter().enumerate() {
            manual.apply_ry(q, a).unwrap();
        }
        for (a, b) in embedded.amplitudes().iter().zip(manual.amplitudes()) {
            assert!((a - b).norm() < 1e-14);
        }
    }

    #[test]
    fn rot_special_cases() {
        let mut s = QuantumState::zero(1).unwrap();
        s.apply_rot(0, 0.0, 0.0, 0.0).unwrap();
        assert_close(&s.basis_probabilities(), &[1.0, 0.0], 1e-15);

        let mut s = QuantumState::zero(1).unwrap();
        s.apply_rot(0, 0.0, PI, 0.0).unwrap();
        assert_close(&s.basis_probabilities(), &[0.0, 1.0], 1e-15);

        assert!(matches!(s.apply_rot(1, 0.0, 0.0, 0.0), Err(Error::Index(_))));
    }

    #[test]
    fn rot_matrix_is_zyz_product() {
        let (psi, theta, omega) = (0.4, -1.1, 2.3);
        let composed = matmul2(&matmul2(&rz_matrix(omega), &ry_matrix(theta)), &rz_matrix(psi));
        let direct = rot_matrix(psi, theta, omega);
        for i in 0..2 {
            for j in 0..2 {
                assert!((composed[i][j] - direct[i][j]).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn cnot_truth_table() {
        // |10⟩ has index 2 with qubit 0 as MSB.
        let mut amps = vec![Complex64::new(0.0, 0.0); 4];
        amps[2] = Complex64::new(1.0, 0.0);
        let mut s = QuantumState::from_amplitudes(amps).unwrap();
        s.apply_cnot(0, 1).unwrap();
        assert_close(&s.basis_probabilities(), &[0.0, 0.0, 0.0, 1.0], 0.0);

        let mut s = QuantumState::zero(2).unwrap();
        s.apply_cnot(0, 1).unwrap();
        assert_close(&s.basis_probabilities(), &[1.0, 0.0, 0.0, 0.0], 0.0);

        let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        let mut s = QuantumState::from_amplitudes(vec![h, zero, h, zero]).unwrap();
        s.apply_cnot(0, 1).unwrap();
        assert_close(&reals(&s), &[FRAC_1_SQRT_2, 0.0, 0.0, FRAC_1_SQRT_2], 1e-15);

        assert!(matches!(s.apply_cnot(1, 1), Err(Error::Argument(_))));
        assert!(matches!(s.apply_cnot(0, 2), Err(Error::Index(_))));
    }

    #[test]
    fn expectations() {
        assert_eq!(QuantumState::zero(1).unwrap().expectation_z_all(), vec![1.0]);
        let plus = QuantumState::amplitude_embed(&[1.0, 1.0]).unwrap();
        assert!(plus.expectation_z_all()[0].abs() < 1e-15);
        let s = QuantumState::amplitude_embed(&[0.6, 0.8]).unwrap();
        assert!((s.expectation_z_all()[0] - (-0.28)).abs() < 1e-15);
    }

    #[test]
    fn probabilities() {
        assert_eq!(QuantumState::zero(2).unwrap().basis_probabilities(), vec![1.0, 0.0, 0.0, 0.0]);
        let u = QuantumState::amplitude_embed(&[1.0; 4]).unwrap();
        assert_close(&u.basis_probabilities(), &[0.25; 4], 1e-15);
    }

    #[test]
    fn rot_then_inverse_restores() {
        let mut s = QuantumState::amplitude_embed(&[0.1, -0.5, 0.7, 0.2, 0.3, 0.9, -0.4, 0.05]).unwrap();
        let before = s.clone();
        s.apply_rot(1, 0.7, -2.1, 1.3).unwrap();
        s.apply_rot_inverse(1, 0.7, -2.1, 1.3).unwrap();
        for (a, b) in s.amplitudes().iter().zip(before.amplitudes()) {
            assert!((a - b).norm() < 1e-9);
        }
    }
}
