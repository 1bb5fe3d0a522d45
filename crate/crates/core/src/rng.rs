//! Counter-based pseudo-random numbers and seeded random matrices.
//!
//! The generator is SplitMix64 evaluated at a counter: word `i` of stream
//! `seed` is `mix(seed + (i + 1) * 0x9E3779B97F4A7C15)` where `mix` is the
//! SplitMix64 finalizer. Uniform doubles take the top 53 bits; normals use
//! the cosine branch of Box-Muller on two consecutive uniforms. Everything
//! here is integer arithmetic plus `ln`, `sqrt`, `cos`, so fixtures can be
//! regenerated bit-for-bit from any language with IEEE doubles.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::algebra::{Algebra, NormalFunctional};
use crate::numerics::{CMatrix, HermitianMatrix};

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive the seed of an independent sub-stream, e.g. one per instance id.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    mix(seed ^ mix(stream.wrapping_add(1).wrapping_mul(GOLDEN)))
}

#[derive(Debug, Clone)]
pub struct CounterRng {
    seed: u64,
    counter: u64,
}

impl CounterRng {
    pub fn new(seed: u64) -> Self {
        Self { seed, counter: 0 }
    }

    pub fn for_stream(seed: u64, stream: u64) -> Self {
        Self::new(derive_seed(seed, stream))
    }

    pub fn counter(&self) -> u64 {
        self.counter
    }

    pub fn next_u64(&mut self) -> u64 {
        self.counter = self.counter.wrapping_add(1);
        mix(self.seed.wrapping_add(self.counter.wrapping_mul(GOLDEN)))
    }

    /// Uniform in `[0, 1)`.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    /// Uniform integer in `0..n`.
    pub fn below(&mut self, n: usize) -> usize {
        assert!(n > 0);
        (self.next_f64() * n as f64) as usize % n
    }

    pub fn normal(&mut self) -> f64 {
        // 1 - u keeps the logarithm finite.
        let u1 = 1.0 - self.next_f64();
        let u2 = self.next_f64();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }

    /// Standard complex Gaussian, `E|z|^2 = 1`.
    pub fn complex_normal(&mut self) -> Complex64 {
        let re = self.normal();
        let im = self.normal();
        Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
    }

    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.below(i + 1);
            items.swap(i, j);
        }
    }
}

/// `rows x cols` matrix of i.i.d. complex Gaussians, filled row-major.
pub fn gaussian_matrix(rng: &mut CounterRng, rows: usize, cols: usize) -> CMatrix {
    let mut m = DMatrix::zeros(rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            m[(i, j)] = rng.complex_normal();
        }
    }
    m
}

/// Haar-ish unitary from modified Gram-Schmidt on a Gaussian matrix.
pub fn random_unitary(rng: &mut CounterRng, n: usize) -> CMatrix {
    let mut q = gaussian_matrix(rng, n, n);
    for j in 0..n {
        for k in 0..j {
            let proj = q.column(k).dotc(&q.column(j));
            let qk = q.column(k).clone_owned();
            q.column_mut(j).axpy(-proj, &qk, Complex64::new(1.0, 0.0));
        }
        let norm = q.column(j).norm();
        q.column_mut(j).unscale_mut(norm);
    }
    q
}

/// `G G*` with `G` an `n x rank` complex Gaussian matrix, scaled to unit trace.
pub fn random_psd(rng: &mut CounterRng, n: usize, rank: usize) -> HermitianMatrix {
    if rank == 0 {
        return HermitianMatrix::zeros(n);
    }
    let g = gaussian_matrix(rng, n, rank);
    let d = &g * g.adjoint();
    let tr = d.trace().re;
    HermitianMatrix::from_matrix_unchecked(d.unscale(tr))
}

/// PSD matrix `U diag(w) U*` with eigenvalues log-uniform in `[1/cond, 1]`.
pub fn random_psd_with_condition(rng: &mut CounterRng, n: usize, cond: f64) -> HermitianMatrix {
    let u = random_unitary(rng, n);
    let log_c = cond.ln();
    let weights: Vec<f64> = (0..n).map(|_| (-log_c * rng.next_f64()).exp()).collect();
    HermitianMatrix::from_eigen_parts(&u, &weights)
}

pub fn random_hermitian(rng: &mut CounterRng, n: usize) -> HermitianMatrix {
    let g = gaussian_matrix(rng, n, n);
    HermitianMatrix::from_matrix_unchecked((&g + g.adjoint()) * Complex64::new(0.5, 0.0))
}

/// How the ranks of random densities are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RankMode {
    /// Every block full rank.
    Faithful,
    /// Every block gets a uniform rank in `1..=n`; zero blocks allowed when `n > 1`.
    Deficient,
}

/// Random normal functional with total mass drawn uniformly from `[0.5, 2)`.
pub fn random_functional(rng: &mut CounterRng, algebra: &Algebra, mode: RankMode) -> NormalFunctional {
    let mut densities = Vec::with_capacity(algebra.num_blocks());
    let mut weights = Vec::with_capacity(algebra.num_blocks());
    for &n in algebra.blocks() {
        let rank = match mode {
            RankMode::Faithful => n,
            RankMode::Deficient if n == 1 => 1,
            RankMode::Deficient => rng.below(n + 1),
        };
        densities.push(random_psd(rng, n, rank));
        weights.push(if rank == 0 { 0.0 } else { rng.uniform(0.2, 1.0) });
    }
    let total: f64 = weights.iter().sum();
    let mass = rng.uniform(0.5, 2.0);
    let densities = densities
        .into_iter()
        .zip(weights)
        .map(|(d, w)| if total > 0.0 { d.scale(mass * w / total) } else { d })
        .collect();
    NormalFunctional::from_parts_unchecked(algebra.clone(), densities)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn splitmix_reference_words() {
        // Reference SplitMix64 output for state 0: the first word after one increment.
        let mut rng = CounterRng::new(0);
        assert_eq!(rng.next_u64(), 0xE220_A839_7B1D_CDAF);
        assert_eq!(rng.next_u64(), 0x6E78_9E6A_A1B9_65F4);
    }

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a: Vec<u64> = {
            let mut r = CounterRng::for_stream(42, 7);
            (0..4).map(|_| r.next_u64()).collect()
        };
        let b: Vec<u64> = {
            let mut r = CounterRng::for_stream(42, 7);
            (0..4).map(|_| r.next_u64()).collect()
        };
        let c: Vec<u64> = {
            let mut r = CounterRng::for_stream(42, 8);
            (0..4).map(|_| r.next_u64()).collect()
        };
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn unitary_columns_orthonormal() {
        let mut rng = CounterRng::new(3);
        let u = random_unitary(&mut rng, 6);
        let err = (u.adjoint() * &u - CMatrix::identity(6, 6)).norm();
        assert!(err < 1e-12, "{err}");
    }

    #[test]
    fn normals_have_unit_variance() {
        let mut rng = CounterRng::new(11);
        let n = 20_000;
        let xs: Vec<f64> = (0..n).map(|_| rng.normal()).collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n as f64;
        assert!(mean.abs() < 0.03);
        assert!((var - 1.0).abs() < 0.05);
    }
}
