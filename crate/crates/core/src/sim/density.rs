//! Dense density matrices over labelled wires.
//!
//! Wire `i` of `labels` is bit `n - 1 - i` of a basis index, so the first
//! label is the most significant qubit: `|01⟩` on `(x1, x2)` has `x1 = 0`.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;

use super::SimError;
use crate::names::Var;

/// Largest number of wires a state may have.
pub const MAX_WIRES: usize = 10;

#[derive(Clone, Debug, PartialEq)]
pub struct DensityState {
    labels: Vec<Var>,
    dim: usize,
    /// Row-major `dim × dim`.
    data: Vec<Complex64>,
}

impl DensityState {
    /// `|0…0⟩⟨0…0|` over `labels`.
    pub fn zero(labels: Vec<Var>) -> Result<Self, SimError> {
        let n = labels.len();
        if n > MAX_WIRES {
            return Err(SimError::TooManyWires {
                wires: n,
                max: MAX_WIRES,
            });
        }
        for (i, l) in labels.iter().enumerate() {
            if labels[..i].contains(l) {
                return Err(SimError::StuckIllFormed("duplicate wire label"));
            }
        }
        let dim = 1usize << n;
        let mut data = vec![Complex64::new(0.0, 0.0); dim * dim];
        data[0] = Complex64::new(1.0, 0.0);
        Ok(DensityState { labels, dim, data })
    }

    /// A state from an explicit matrix. `data` is row-major.
    pub fn from_matrix(labels: Vec<Var>, data: Vec<Complex64>) -> Result<Self, SimError> {
        let mut s = Self::zero(labels)?;
        if data.len() != s.dim * s.dim {
            return Err(SimError::StuckIllFormed(
                "matrix size does not match the wire count",
            ));
        }
        s.data = data;
        Ok(s)
    }

    /// The pure state of one computational basis vector, given as one bit
    /// per wire in label order.
    pub fn basis(labels: Vec<Var>, bits: &[bool]) -> Result<Self, SimError> {
        let mut s = Self::zero(labels)?;
        if bits.len() != s.labels.len() {
            return Err(SimError::StuckIllFormed("one bit per wire expected"));
        }
        let n = bits.len();
        let k = bits.iter().enumerate().fold(
            0usize,
            |acc, (i, b)| if *b { acc | 1 << (n - 1 - i) } else { acc },
        );
        s.data[0] = Complex64::new(0.0, 0.0);
        s.data[k * s.dim + k] = Complex64::new(1.0, 0.0);
        Ok(s)
    }

    pub fn labels(&self) -> &[Var] {
        &self.labels
    }

    pub fn wires(&self) -> usize {
        self.labels.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.dim + j]
    }

    pub fn matrix(&self) -> &[Complex64] {
        &self.data
    }

    fn bit_of(&self, wire: &Var) -> Result<usize, SimError> {
        let i = self
            .labels
            .iter()
            .position(|l| l == wire)
            .ok_or(SimError::StuckIllFormed("unknown wire"))?;
        Ok(1 << (self.labels.len() - 1 - i))
    }

    /// `ρ ↦ P ρ Pᵀ` for an involutive basis permutation `p`.
    fn permute(&mut self, p: impl Fn(usize) -> usize) {
        let d = self.dim;
        let old = self.data.clone();
        for i in 0..d {
            let pi = p(i);
            for j in 0..d {
                self.data[pi * d + p(j)] = old[i * d + j];
            }
        }
    }

    /// CNOT with `control` and `target`.
    pub fn cnot(&mut self, control: &Var, target: &Var) -> Result<(), SimError> {
        let (c, t) = (self.bit_of(control)?, self.bit_of(target)?);
        if c == t {
            return Err(SimError::StuckIllFormed("cnot on a single wire"));
        }
        self.permute(|i| if i & c != 0 { i ^ t } else { i });
        Ok(())
    }

    pub fn swap(&mut self, a: &Var, b: &Var) -> Result<(), SimError> {
        let (a, b) = (self.bit_of(a)?, self.bit_of(b)?);
        if a == b {
            return Err(SimError::StuckIllFormed("swap on a single wire"));
        }
        self.permute(|i| {
            if (i & a != 0) != (i & b != 0) {
                i ^ a ^ b
            } else {
                i
            }
        });
        Ok(())
    }

    pub fn hadamard(&mut self, w: &Var) -> Result<(), SimError> {
        let bit = self.bit_of(w)?;
        let d = self.dim;
        let h = FRAC_1_SQRT_2;
        // rows
        for i in (0..d).filter(|i| i & bit == 0) {
            let k = i | bit;
            for j in 0..d {
                let (a, b) = (self.data[i * d + j], self.data[k * d + j]);
                self.data[i * d + j] = (a + b) * h;
                self.data[k * d + j] = (a - b) * h;
            }
        }
        // columns
        for j in (0..d).filter(|j| j & bit == 0) {
            let k = j | bit;
            for i in 0..d {
                let (a, b) = (self.data[i * d + j], self.data[i * d + k]);
                self.data[i * d + j] = (a + b) * h;
                self.data[i * d + k] = (a - b) * h;
            }
        }
        Ok(())
    }

    /// The reset channel `Σ_b |0⟩⟨b| ρ |b⟩⟨0|` on `w`.
    pub fn reset(&mut self, w: &Var) -> Result<(), SimError> {
        let bit = self.bit_of(w)?;
        let d = self.dim;
        let zero = Complex64::new(0.0, 0.0);
        for i in (0..d).filter(|i| i & bit == 0) {
            for j in (0..d).filter(|j| j & bit == 0) {
                let moved = self.data[(i | bit) * d + (j | bit)];
                self.data[i * d + j] += moved;
            }
        }
        for i in 0..d {
            for j in 0..d {
                if (i | j) & bit != 0 {
                    self.data[i * d + j] = zero;
                }
            }
        }
        Ok(())
    }

    /// `M_s ρ M_s†` with `M_s = (I + (-1)^s Z) / 2` on `w`; unnormalised.
    pub fn project(&mut self, w: &Var, outcome: bool) -> Result<(), SimError> {
        let bit = self.bit_of(w)?;
        let d = self.dim;
        let keep = |i: usize| (i & bit != 0) == outcome;
        for i in 0..d {
            for j in 0..d {
                if !(keep(i) && keep(j)) {
                    self.data[i * d + j] = Complex64::new(0.0, 0.0);
                }
            }
        }
        Ok(())
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.data[i * self.dim + i].re).sum()
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        let d = self.dim;
        (0..d).all(|i| {
            (i..d).all(|j| {
                (self.data[i * d + j] - self.data[j * d + i].conj()).norm_sqr() <= tol * tol
            })
        })
    }

    /// Whether every eigenvalue is at least `-tol`, by an `LDLᴴ`
    /// factorisation with diagonal pivoting. Assumes the matrix is Hermitian.
    pub fn is_psd(&self, tol: f64) -> bool {
        let d = self.dim;
        let mut a = self.data.clone();
        let mut order: Vec<usize> = (0..d).collect();
        for k in 0..d {
            let (p, best) = (k..d).map(|r| (r, a[order[r] * d + order[r]].re)).fold(
                (k, f64::NEG_INFINITY),
                |acc, x| if x.1 > acc.1 { x } else { acc },
            );
            if best < -tol {
                return false;
            }
            if best <= tol {
                // What is left is within tolerance of zero on the diagonal;
                // a PSD remainder then has negligible off-diagonal entries.
                return (k..d)
                    .all(|r| (k..d).all(|c| a[order[r] * d + order[c]].norm_sqr() <= tol));
            }
            order.swap(k, p);
            let pk = order[k];
            for r in k + 1..d {
                let pr = order[r];
                let l = a[pr * d + pk] / best;
                for &pc in &order[k + 1..d] {
                    let delta = l * a[pk * d + pc];
                    a[pr * d + pc] -= delta;
                }
            }
        }
        true
    }

    /// Squared Frobenius distance.
    pub fn frobenius_sq(&self, other: &DensityState) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum()
    }
}
