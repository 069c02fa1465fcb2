//! Seeded pseudo-random generation.
//!
//! Every generator in the crate draws from [`SeededRng`], which is fixed so
//! that problem instances and probe sets are reproducible across platforms
//! and across implementations:
//!
//! - stream: ChaCha8 seeded with `seed_from_u64(seed)`;
//! - uniform `[0, 1)`: `(next_u64() >> 11) * 2^-53`;
//! - standard normal: Box-Muller on two uniforms, `sqrt(-2 ln(1 - u1)) * cos(2 pi u2)`,
//!   one normal per pair (the sine branch is discarded).

use nalgebra::{DMatrix, DVector};
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::geometry::Point;

#[derive(Debug, Clone)]
pub struct SeededRng {
    inner: ChaCha8Rng,
}

impl SeededRng {
    pub fn new(seed: u64) -> Self {
        Self {
            inner: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn uniform(&mut self) -> f64 {
        (self.inner.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn uniform_in(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    pub fn normal(&mut self) -> f64 {
        let u1 = self.uniform();
        let u2 = self.uniform();
        (-2.0 * (1.0 - u1).ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }

    pub fn normal_vector(&mut self, n: usize) -> DVector<f64> {
        DVector::from_fn(n, |_, _| self.normal())
    }

    pub fn uniform_vector(&mut self, n: usize, lo: f64, hi: f64) -> DVector<f64> {
        DVector::from_fn(n, |_, _| self.uniform_in(lo, hi))
    }

    /// Uniformly distributed direction on the unit sphere.
    pub fn unit_vector(&mut self, n: usize) -> DVector<f64> {
        loop {
            let v = self.normal_vector(n);
            let norm = v.norm();
            if norm > 1e-8 {
                return v / norm;
            }
        }
    }

    pub fn normal_point(&mut self, n: usize) -> Point {
        Point::from_raw(self.normal_vector(n))
    }

    pub fn uniform_point(&mut self, n: usize, lo: f64, hi: f64) -> Point {
        Point::from_raw(self.uniform_vector(n, lo, hi))
    }

    pub fn unit_point(&mut self, n: usize) -> Point {
        Point::from_raw(self.unit_vector(n))
    }

    /// Row-major fill with standard normals.
    pub fn normal_matrix(&mut self, rows: usize, cols: usize) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = self.normal();
            }
        }
        m
    }
}
