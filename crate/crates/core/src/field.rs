//! Field value types on the MAC grid.
//!
//! `u` samples sit on vertical cell faces at `(i*h, (j+1/2)*h)` for
//! `i = 0..=n`, `j = 0..n`; `v` samples on horizontal faces at
//! `((i+1/2)*h, j*h)`; pressure at cell centers. Homogeneous Dirichlet
//! boundary data is represented by the normal faces on the walls being
//! exactly zero; the tangential condition enters through reflection
//! ghosts inside the operators.

use crate::error::{Error, Result};
use crate::grid::GridSpec;
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Kinematic viscosity and Kelvin-Voigt retardation time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlowParameters {
    pub nu: f64,
    pub kappa: f64,
}

impl FlowParameters {
    pub fn new(nu: f64, kappa: f64) -> Result<Self> {
        if !(nu > 0.0) {
            return Err(Error::InvalidParameter(format!("nu must be > 0, got {nu}")));
        }
        if !(kappa >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "kappa must be >= 0, got {kappa}"
            )));
        }
        Ok(FlowParameters { nu, kappa })
    }
}

/// Staggered velocity field with zero normal boundary faces.
#[derive(Debug, Clone, PartialEq)]
pub struct VelocityField {
    grid: GridSpec,
    u: Vec<f64>,
    v: Vec<f64>,
}

/// Cell-centered scalar field (pressure-like quantities).
#[derive(Debug, Clone, PartialEq)]
pub struct PressureField {
    grid: GridSpec,
    p: Vec<f64>,
}

/// l2, H1-seminorm and max norm of a field, midpoint quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Norms {
    pub l2: f64,
    pub h1_semi: f64,
    pub max: f64,
}

impl VelocityField {
    pub fn zeros(grid: GridSpec) -> Self {
        VelocityField {
            grid,
            u: vec![0.0; grid.u_len()],
            v: vec![0.0; grid.v_len()],
        }
    }

    /// Sample analytic component functions at face centers. Boundary faces
    /// are forced to zero regardless of the function values there.
    pub fn from_fn(
        grid: GridSpec,
        fu: impl Fn(f64, f64) -> f64,
        fv: impl Fn(f64, f64) -> f64,
    ) -> Self {
        let n = grid.nx();
        let h = grid.h();
        let mut f = Self::zeros(grid);
        for j in 0..n {
            let y = (j as f64 + 0.5) * h;
            for i in 1..n {
                f.u[j * (n + 1) + i] = fu(i as f64 * h, y);
            }
        }
        for j in 1..n {
            let y = j as f64 * h;
            for i in 0..n {
                f.v[j * n + i] = fv((i as f64 + 0.5) * h, y);
            }
        }
        f
    }

    /// Discrete curl of a node-centered stream function `psi((n+1)x(n+1))`,
    /// `u = d(psi)/dy`, `v = -d(psi)/dx`. The result is exactly
    /// divergence-free in the MAC sense when `psi` vanishes on the boundary
    /// nodes (enforced here).
    pub fn from_stream(grid: GridSpec, psi: impl Fn(f64, f64) -> f64) -> Self {
        let n = grid.nx();
        let h = grid.h();
        let mut s = vec![0.0; (n + 1) * (n + 1)];
        for j in 1..n {
            for i in 1..n {
                s[j * (n + 1) + i] = psi(i as f64 * h, j as f64 * h);
            }
        }
        Self::from_stream_values(grid, &s)
    }

    /// Same as [`from_stream`](Self::from_stream) but with explicit node
    /// values (boundary nodes are ignored and treated as zero).
    pub fn from_stream_values(grid: GridSpec, psi: &[f64]) -> Self {
        let n = grid.nx();
        let h = grid.h();
        assert_eq!(psi.len(), (n + 1) * (n + 1));
        let node = |i: usize, j: usize| -> f64 {
            if i == 0 || i == n || j == 0 || j == n {
                0.0
            } else {
                psi[j * (n + 1) + i]
            }
        };
        let mut f = Self::zeros(grid);
        for j in 0..n {
            for i in 1..n {
                f.u[j * (n + 1) + i] = (node(i, j + 1) - node(i, j)) / h;
            }
        }
        for j in 1..n {
            for i in 0..n {
                f.v[j * n + i] = (node(i, j) - node(i + 1, j)) / h;
            }
        }
        f
    }

    /// Interior faces filled with uniform samples from (-1, 1).
    pub fn random(grid: GridSpec, rng: &mut impl Rng) -> Self {
        let n = grid.nx();
        let mut f = Self::zeros(grid);
        for j in 0..n {
            for i in 1..n {
                f.u[j * (n + 1) + i] = rng.random_range(-1.0..1.0);
            }
        }
        for j in 1..n {
            for i in 0..n {
                f.v[j * n + i] = rng.random_range(-1.0..1.0);
            }
        }
        f
    }

    /// Exactly divergence-free random field built from a random stream
    /// function on the interior nodes.
    pub fn random_divergence_free(grid: GridSpec, rng: &mut impl Rng) -> Self {
        let n = grid.nx();
        let mut psi = vec![0.0; (n + 1) * (n + 1)];
        for j in 1..n {
            for i in 1..n {
                psi[j * (n + 1) + i] = rng.random_range(-1.0..1.0);
            }
        }
        Self::from_stream_values(grid, &psi)
    }

    #[inline]
    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    #[inline]
    pub fn u(&self, i: usize, j: usize) -> f64 {
        self.u[j * (self.grid.nx() + 1) + i]
    }

    #[inline]
    pub fn v(&self, i: usize, j: usize) -> f64 {
        self.v[j * self.grid.nx() + i]
    }

    #[inline]
    pub fn u_mut(&mut self, i: usize, j: usize) -> &mut f64 {
        let n = self.grid.nx();
        &mut self.u[j * (n + 1) + i]
    }

    #[inline]
    pub fn v_mut(&mut self, i: usize, j: usize) -> &mut f64 {
        let n = self.grid.nx();
        &mut self.v[j * n + i]
    }

    pub fn u_slice(&self) -> &[f64] {
        &self.u
    }

    pub fn v_slice(&self) -> &[f64] {
        &self.v
    }

    /// u sample with reflection ghosts across the bottom/top walls,
    /// `j` in `-1..=n`. Encodes the tangential Dirichlet condition.
    #[inline]
    pub fn u_ghost(&self, i: usize, j: isize) -> f64 {
        let n = self.grid.nx() as isize;
        if j < 0 {
            -self.u(i, 0)
        } else if j >= n {
            -self.u(i, (n - 1) as usize)
        } else {
            self.u(i, j as usize)
        }
    }

    /// v sample with reflection ghosts across the left/right walls.
    #[inline]
    pub fn v_ghost(&self, i: isize, j: usize) -> f64 {
        let n = self.grid.nx() as isize;
        if i < 0 {
            -self.v(0, j)
        } else if i >= n {
            -self.v((n - 1) as usize, j)
        } else {
            self.v(i as usize, j)
        }
    }

    /// True when every boundary face value is exactly zero.
    pub fn boundary_is_zero(&self) -> bool {
        let n = self.grid.nx();
        (0..n).all(|j| self.u(0, j) == 0.0 && self.u(n, j) == 0.0)
            && (0..n).all(|i| self.v(i, 0) == 0.0 && self.v(i, n) == 0.0)
    }

    /// l2 inner product with midpoint (h^2) weights.
    pub fn dot(&self, other: &VelocityField) -> f64 {
        debug_assert_eq!(self.grid, other.grid);
        let h2 = self.grid.h() * self.grid.h();
        let su: f64 = self.u.iter().zip(&other.u).map(|(a, b)| a * b).sum();
        let sv: f64 = self.v.iter().zip(&other.v).map(|(a, b)| a * b).sum();
        h2 * (su + sv)
    }

    pub fn norm_l2(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn norm_max(&self) -> f64 {
        let mu = self.u.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let mv = self.v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        mu.max(mv)
    }

    pub fn scale(&mut self, s: f64) {
        for x in &mut self.u {
            *x *= s;
        }
        for x in &mut self.v {
            *x *= s;
        }
    }

    pub fn scaled(&self, s: f64) -> VelocityField {
        let mut out = self.clone();
        out.scale(s);
        out
    }

    /// `self += a * other`
    pub fn axpy(&mut self, a: f64, other: &VelocityField) {
        debug_assert_eq!(self.grid, other.grid);
        for (x, y) in self.u.iter_mut().zip(&other.u) {
            *x += a * y;
        }
        for (x, y) in self.v.iter_mut().zip(&other.v) {
            *x += a * y;
        }
    }

    pub fn sub(&self, other: &VelocityField) -> VelocityField {
        let mut out = self.clone();
        out.axpy(-1.0, other);
        out
    }

    pub fn add(&self, other: &VelocityField) -> VelocityField {
        let mut out = self.clone();
        out.axpy(1.0, other);
        out
    }


    /// Pack interior faces into a flat vector (u rows first, then v), used
    /// by the dense oracles.
    pub fn interior_to_vec(&self) -> Vec<f64> {
        let n = self.grid.nx();
        let mut out = Vec::with_capacity(self.grid.interior_dof());
        for j in 0..n {
            for i in 1..n {
                out.push(self.u(i, j));
            }
        }
        for j in 1..n {
            for i in 0..n {
                out.push(self.v(i, j));
            }
        }
        out
    }

    pub fn from_interior_vec(grid: GridSpec, x: &[f64]) -> Self {
        let n = grid.nx();
        assert_eq!(x.len(), grid.interior_dof());
        let mut f = Self::zeros(grid);
        let mut k = 0;
        for j in 0..n {
            for i in 1..n {
                *f.u_mut(i, j) = x[k];
                k += 1;
            }
        }
        for j in 1..n {
            for i in 0..n {
                *f.v_mut(i, j) = x[k];
                k += 1;
            }
        }
        f
    }
}

impl PressureField {
    pub fn zeros(grid: GridSpec) -> Self {
        PressureField {
            grid,
            p: vec![0.0; grid.p_len()],
        }
    }

    pub fn from_fn(grid: GridSpec, f: impl Fn(f64, f64) -> f64) -> Self {
        let n = grid.nx();
        let h = grid.h();
        let mut p = Self::zeros(grid);
        for j in 0..n {
            for i in 0..n {
                p.p[j * n + i] = f((i as f64 + 0.5) * h, (j as f64 + 0.5) * h);
            }
        }
        p
    }

    pub fn random(grid: GridSpec, rng: &mut impl Rng) -> Self {
        let n = grid.nx();
        let mut p = Self::zeros(grid);
        for x in &mut p.p {
            let _ = n;
            *x = rng.random_range(-1.0..1.0);
        }
        p
    }

    #[inline]
    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.p[j * self.grid.nx() + i]
    }

    #[inline]
    pub fn at_mut(&mut self, i: usize, j: usize) -> &mut f64 {
        let n = self.grid.nx();
        &mut self.p[j * n + i]
    }

    pub fn values(&self) -> &[f64] {
        &self.p
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.p
    }

    pub fn mean(&self) -> f64 {
        self.p.iter().sum::<f64>() / self.p.len() as f64
    }

    /// Replace the field by its zero-mean representative in L2 / R.
    pub fn subtract_mean(&mut self) {
        let m = self.mean();
        for x in &mut self.p {
            *x -= m;
        }
    }

    pub fn dot(&self, other: &PressureField) -> f64 {
        debug_assert_eq!(self.grid, other.grid);
        let h2 = self.grid.h() * self.grid.h();
        h2 * self
            .p
            .iter()
            .zip(&other.p)
            .map(|(a, b)| a * b)
            .sum::<f64>()
    }

    pub fn norm_l2(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn norm_max(&self) -> f64 {
        self.p.iter().fold(0.0f64, |m, x| m.max(x.abs()))
    }

    pub fn scale(&mut self, s: f64) {
        for x in &mut self.p {
            *x *= s;
        }
    }

    pub fn axpy(&mut self, a: f64, other: &PressureField) {
        debug_assert_eq!(self.grid, other.grid);
        for (x, y) in self.p.iter_mut().zip(&other.p) {
            *x += a * y;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ops::divergence;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn stream_curl_is_divergence_free() {
        let grid = GridSpec::square(16).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let f = VelocityField::random_divergence_free(grid, &mut rng);
        assert!(f.boundary_is_zero());
        let d = divergence(&f);
        assert!(d.norm_max() < 1e-13 * (1.0 / grid.h()));
    }

    #[test]
    fn sampled_fields_zero_boundary() {
        let grid = GridSpec::square(8).unwrap();
        let f = VelocityField::from_fn(grid, |_, _| 1.0, |_, _| 1.0);
        assert!(f.boundary_is_zero());
    }

    #[test]
    fn interior_roundtrip() {
        let grid = GridSpec::square(8).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let f = VelocityField::random(grid, &mut rng);
        let x = f.interior_to_vec();
        assert_eq!(x.len(), grid.interior_dof());
        let g = VelocityField::from_interior_vec(grid, &x);
        assert_eq!(f, g);
    }

    #[test]
    fn mean_subtraction() {
        let grid = GridSpec::square(8).unwrap();
        let mut p = PressureField::from_fn(grid, |x, y| x + y);
        p.subtract_mean();
        assert!(p.mean().abs() < 1e-14);
    }
}
