//! Periodic collocation grids on the cube of side 4*rho, together with the
//! nodal/Fourier representations of trigonometric polynomials living on them.
//!
//! Conventions. The cell is (-2rho, 2rho]^d with d = 2 or 3. For an even N
//! the nodes are x_j = j*h, h = 4rho/N, indexed by j in Z^d_N = {-N/2 <= j_k <
//! N/2}. The trigonometric monomials are
//!
//!   phi_j(x) = (4 rho)^(-d/2) exp(i pi j.x / (2 rho)),
//!
//! an orthonormal basis of L^2 on the cell. A function in the span T_N of the
//! first N^d monomials is stored either by its nodal values or its Fourier
//! coefficients with respect to phi_j. Both arrays are laid out row-major over
//! the wrap-around index j mod N (last axis fastest), so the discrete Fourier
//! transform maps one onto the other directly. With the scaling used here the
//! map nodal -> Fourier is an isometry from the discrete L^2 inner product
//! (weight h^d) to the plain coefficient l^2 inner product.

use crate::error::{Error, Result};
use crate::fft;
use num_complex::Complex64;

/// Uniform periodic grid: `n` nodes per axis on the cube of half-size `2*rho`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrigGrid {
    d: usize,
    n: usize,
    rho: f64,
    h: f64,
}

impl TrigGrid {
    pub fn new(d: usize, n: usize, rho: f64) -> Result<Self> {
        if d != 2 && d != 3 {
            return Err(Error::InvalidArgument(format!(
                "spatial dimension must be 2 or 3, got {d}"
            )));
        }
        if n < 2 || !n.is_multiple_of(2) {
            return Err(Error::InvalidArgument(format!(
                "points per axis must be even and >= 2, got {n}"
            )));
        }
        if !(rho.is_finite() && rho > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "half-size rho must be positive and finite, got {rho}"
            )));
        }
        let h = 4.0 * rho / n as f64;
        Ok(TrigGrid { d, n, rho, h })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn points_per_axis(&self) -> usize {
        self.n
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    /// Total number of nodes, n^d.
    pub fn len(&self) -> usize {
        self.n.pow(self.d as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Side length of the periodicity cell, 4*rho.
    pub fn period(&self) -> f64 {
        4.0 * self.rho
    }

    /// Multi-index (wrap-around storage order, each in 0..n) of a flat index.
    #[inline]
    pub fn multi_index(&self, flat: usize) -> [usize; 3] {
        let n = self.n;
        let mut m = [0usize; 3];
        match self.d {
            2 => {
                m[0] = flat / n;
                m[1] = flat % n;
            }
            _ => {
                m[0] = flat / (n * n);
                m[1] = (flat / n) % n;
                m[2] = flat % n;
            }
        }
        m
    }

    /// Signed frequency j in Z^d_N for a flat storage index (trailing entries 0).
    #[inline]
    pub fn frequency(&self, flat: usize) -> [i64; 3] {
        let m = self.multi_index(flat);
        let half = (self.n / 2) as i64;
        let n = self.n as i64;
        let mut j = [0i64; 3];
        for k in 0..self.d {
            let mk = m[k] as i64;
            j[k] = if mk < half { mk } else { mk - n };
        }
        j
    }

    /// Flat storage index of a signed frequency j in Z^d_N.
    #[inline]
    pub fn flat_of_frequency(&self, j: [i64; 3]) -> usize {
        let n = self.n as i64;
        let mut flat = 0usize;
        for jk in j.iter().take(self.d) {
            debug_assert!(*jk >= -(n / 2) && *jk < n / 2);
            let m = jk.rem_euclid(n) as usize;
            flat = flat * self.n + m;
        }
        flat
    }

    /// |j|^2 of the frequency stored at a flat index.
    #[inline]
    pub fn frequency_norm_sq(&self, flat: usize) -> i64 {
        let j = self.frequency(flat);
        j[0] * j[0] + j[1] * j[1] + j[2] * j[2]
    }

    /// Physical coordinates of the node at a flat index (trailing entries 0).
    #[inline]
    pub fn node(&self, flat: usize) -> [f64; 3] {
        let j = self.frequency(flat); // node indices use the same signed range
        let mut x = [0.0; 3];
        for k in 0..self.d {
            x[k] = j[k] as f64 * self.h;
        }
        x
    }

    /// True when the modes of `coarse` are a subset of the modes of `self`.
    pub fn contains_modes_of(&self, coarse: &TrigGrid) -> bool {
        self.d == coarse.d && self.rho == coarse.rho && coarse.n <= self.n
    }
}

/// Which array a [`GridFunction`] currently stores.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Repr {
    Nodal,
    Fourier,
}

/// Complex field on a [`TrigGrid`], in nodal or Fourier representation.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    grid: TrigGrid,
    repr: Repr,
    values: Vec<Complex64>,
}

impl GridFunction {
    pub fn zeros(grid: TrigGrid, repr: Repr) -> Self {
        GridFunction {
            grid,
            repr,
            values: vec![Complex64::default(); grid.len()],
        }
    }

    pub fn from_values(grid: TrigGrid, repr: Repr, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidArgument(format!(
                "value array has length {}, grid has {} nodes",
                values.len(),
                grid.len()
            )));
        }
        Ok(GridFunction { grid, repr, values })
    }

    /// Interpolation projection Q_N: sample a continuous function at the nodes.
    /// Exact on T_N by construction.
    pub fn interp_project<F>(grid: TrigGrid, g: F) -> Self
    where
        F: Fn([f64; 3]) -> Complex64,
    {
        let values = (0..grid.len()).map(|i| g(grid.node(i))).collect();
        GridFunction {
            grid,
            repr: Repr::Nodal,
            values,
        }
    }

    pub fn grid(&self) -> &TrigGrid {
        &self.grid
    }

    pub fn repr(&self) -> Repr {
        self.repr
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    /// Forward transform: nodal values -> Fourier coefficients w.r.t. phi_j.
    /// The scaling (4rho)^{d/2} / N^d makes the map an isometry between the
    /// discrete L^2 inner product and coefficient l^2; a constant function
    /// maps to a single nonzero coefficient at j = 0.
    pub fn nodal_to_fourier(&self) -> Result<GridFunction> {
        if self.repr != Repr::Nodal {
            return Err(Error::InvalidArgument(
                "nodal_to_fourier requires nodal representation".into(),
            ));
        }
        let g = &self.grid;
        let mut values = self.values.clone();
        fft::transform_nd(&mut values, g.d, g.n, true);
        let scale = g.period().powf(g.d as f64 / 2.0) / g.len() as f64;
        for v in &mut values {
            *v *= scale;
        }
        Ok(GridFunction {
            grid: self.grid,
            repr: Repr::Fourier,
            values,
        })
    }

    /// Inverse transform: Fourier coefficients -> nodal values.
    pub fn fourier_to_nodal(&self) -> Result<GridFunction> {
        if self.repr != Repr::Fourier {
            return Err(Error::InvalidArgument(
                "fourier_to_nodal requires Fourier representation".into(),
            ));
        }
        let g = &self.grid;
        let mut values = self.values.clone();
        fft::transform_nd(&mut values, g.d, g.n, false);
        let scale = g.period().powf(-(g.d as f64) / 2.0);
        for v in &mut values {
            *v *= scale;
        }
        Ok(GridFunction {
            grid: self.grid,
            repr: Repr::Nodal,
            values,
        })
    }

    /// The same function in the requested representation (clone if already there).
    pub fn to_repr(&self, repr: Repr) -> Result<GridFunction> {
        match (self.repr, repr) {
            (Repr::Nodal, Repr::Fourier) => self.nodal_to_fourier(),
            (Repr::Fourier, Repr::Nodal) => self.fourier_to_nodal(),
            _ => Ok(self.clone()),
        }
    }

    /// Unweighted discrete L^2 norm, (h^d sum |f|^2)^{1/2} in nodal form,
    /// plain coefficient l^2 norm in Fourier form (equal by Parseval).
    pub fn l2_norm(&self) -> f64 {
        let sq: f64 = self.values.iter().map(|v| v.norm_sqr()).sum();
        match self.repr {
            Repr::Nodal => (self.grid.h.powi(self.grid.d as i32) * sq).sqrt(),
            Repr::Fourier => sq.sqrt(),
        }
    }

    /// Discrete Sobolev norm of order `t` over the represented modes.
    pub fn sobolev_norm(&self, t: f64) -> Result<f64> {
        let hat = self.to_repr(Repr::Fourier)?;
        let g = &hat.grid;
        let mut sq = 0.0;
        for (i, v) in hat.values.iter().enumerate() {
            let jsq = g.frequency_norm_sq(i) as f64;
            sq += (1.0 + jsq).powf(t) * v.norm_sqr();
        }
        Ok(sq.sqrt())
    }

    pub fn conj(&self) -> GridFunction {
        GridFunction {
            grid: self.grid,
            repr: self.repr,
            values: self.values.iter().map(|v| v.conj()).collect(),
        }
    }

    pub fn scale(&mut self, a: Complex64) {
        for v in &mut self.values {
            *v *= a;
        }
    }

    /// self <- self + a * other (same grid and representation required).
    pub fn axpy(&mut self, a: Complex64, other: &GridFunction) -> Result<()> {
        self.check_compatible(other)?;
        for (v, w) in self.values.iter_mut().zip(&other.values) {
            *v += a * w;
        }
        Ok(())
    }

    pub fn sub(&self, other: &GridFunction) -> Result<GridFunction> {
        self.check_compatible(other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a - b)
            .collect();
        Ok(GridFunction {
            grid: self.grid,
            repr: self.repr,
            values,
        })
    }

    fn check_compatible(&self, other: &GridFunction) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch(
                "grid functions live on different grids".into(),
            ));
        }
        if self.repr != other.repr {
            return Err(Error::InvalidArgument(
                "grid functions are in different representations".into(),
            ));
        }
        Ok(())
    }

    /// Trigonometric prolongation onto a finer grid (Fourier zero-padding).
    /// Exact on T_N: values at shared nodes are reproduced up to roundoff.
    pub fn prolong_to(&self, fine: TrigGrid) -> Result<GridFunction> {
        if !fine.contains_modes_of(&self.grid) {
            return Err(Error::GridMismatch(
                "target grid does not contain the source modes".into(),
            ));
        }
        let hat = self.to_repr(Repr::Fourier)?;
        let mut out = GridFunction::zeros(fine, Repr::Fourier);
        for (i, v) in hat.values.iter().enumerate() {
            let j = hat.grid.frequency(i);
            out.values[fine.flat_of_frequency(j)] = *v;
        }
        match self.repr {
            Repr::Nodal => out.fourier_to_nodal(),
            Repr::Fourier => Ok(out),
        }
    }

    /// Fourier truncation onto a coarser grid (adjoint of [`Self::prolong_to`]).
    pub fn restrict_to(&self, coarse: TrigGrid) -> Result<GridFunction> {
        if !self.grid.contains_modes_of(&coarse) {
            return Err(Error::GridMismatch(
                "source grid does not contain the target modes".into(),
            ));
        }
        let hat = self.to_repr(Repr::Fourier)?;
        let mut out = GridFunction::zeros(coarse, Repr::Fourier);
        for (i, v) in out.values.iter_mut().enumerate() {
            let j = coarse.frequency(i);
            *v = hat.values[hat.grid.flat_of_frequency(j)];
        }
        match self.repr {
            Repr::Nodal => out.fourier_to_nodal(),
            Repr::Fourier => Ok(out),
        }
    }
}

/// Real contrast q_c sampled at the nodes, with its recomputed sup bound and
/// support flags.
#[derive(Debug, Clone, PartialEq)]
pub struct ContrastField {
    grid: TrigGrid,
    values: Vec<f64>,
    sup_abs: f64,
    support: Vec<bool>,
}

impl ContrastField {
    /// Build from nodal samples, enforcing the support assumption
    /// supp(q) inside the ball |x| <= rho that the periodized equation needs.
    pub fn from_values(grid: TrigGrid, values: Vec<f64>) -> Result<Self> {
        let q = Self::from_values_any_support(grid, values)?;
        for (i, &s) in q.support.iter().enumerate() {
            if s {
                let x = grid.node(i);
                let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
                if r > grid.rho() {
                    return Err(Error::InvalidArgument(format!(
                        "contrast supported at |x| = {r:.6} outside the ball of radius rho = {}",
                        grid.rho()
                    )));
                }
            }
        }
        Ok(q)
    }

    /// Build without the support-in-ball check. Operator identities hold for
    /// any nodal contrast; the equivalence with the free-space problem does not.
    pub fn from_values_any_support(grid: TrigGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidArgument(format!(
                "contrast array has length {}, grid has {} nodes",
                values.len(),
                grid.len()
            )));
        }
        let sup_abs = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let support = values.iter().map(|&v| v != 0.0).collect();
        Ok(ContrastField {
            grid,
            values,
            sup_abs,
            support,
        })
    }

    pub fn from_fn<F>(grid: TrigGrid, f: F) -> Result<Self>
    where
        F: Fn([f64; 3]) -> f64,
    {
        let values = (0..grid.len()).map(|i| f(grid.node(i))).collect();
        Self::from_values(grid, values)
    }

    /// Constant contrast `q` strictly inside the disk/ball |x| < radius,
    /// zero outside (boundary nodes resolved by the strict inequality).
    pub fn disk(grid: TrigGrid, radius: f64, q: f64) -> Result<Self> {
        if !(radius > 0.0 && radius <= grid.rho()) {
            return Err(Error::InvalidArgument(format!(
                "disk radius must lie in (0, rho], got {radius} with rho = {}",
                grid.rho()
            )));
        }
        Self::from_fn(grid, |x| {
            let r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
            if r2 < radius * radius {
                q
            } else {
                0.0
            }
        })
    }

    /// Disk contrast with a C^2 radial ramp of width `ramp_width` down to zero
    /// at |x| = radius (quintic smoothstep).
    pub fn mollified_disk(grid: TrigGrid, radius: f64, q: f64, ramp_width: f64) -> Result<Self> {
        if !(radius > 0.0 && radius <= grid.rho()) {
            return Err(Error::InvalidArgument(format!(
                "disk radius must lie in (0, rho], got {radius} with rho = {}",
                grid.rho()
            )));
        }
        if !(ramp_width > 0.0 && ramp_width < radius) {
            return Err(Error::InvalidArgument(format!(
                "ramp width must lie in (0, radius), got {ramp_width}"
            )));
        }
        Self::from_fn(grid, |x| {
            let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
            if r >= radius {
                0.0
            } else if r <= radius - ramp_width {
                q
            } else {
                let t = (radius - r) / ramp_width;
                let s = t * t * t * (10.0 - 15.0 * t + 6.0 * t * t);
                q * s
            }
        })
    }

    pub fn grid(&self) -> &TrigGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn sup_abs(&self) -> f64 {
        self.sup_abs
    }

    pub fn support(&self) -> &[bool] {
        &self.support
    }

    /// Sample this contrast at the nodes of a compatible coarser grid
    /// (coarse nodes must be a subset of the fine nodes).
    pub fn sample_on(&self, coarse: TrigGrid) -> Result<ContrastField> {
        if coarse.d != self.grid.d
            || coarse.rho != self.grid.rho
            || !self.grid.n.is_multiple_of(coarse.n)
        {
            return Err(Error::GridMismatch(
                "coarse grid nodes are not a subset of the fine grid nodes".into(),
            ));
        }
        let ratio = (self.grid.n / coarse.n) as i64;
        let values = (0..coarse.len())
            .map(|i| {
                let j = coarse.frequency(i);
                let fine =
                    self.grid
                        .flat_of_frequency([j[0] * ratio, j[1] * ratio, j[2] * ratio]);
                self.values[fine]
            })
            .collect();
        ContrastField::from_values_any_support(coarse, values)
    }
}

/// Weighted discrete L^2 norm (h^d sum |q| |f|^2)^{1/2}; |q| so the norm is
/// defined for negative contrasts as well.
pub fn weighted_l2_norm(f: &GridFunction, q: &ContrastField) -> Result<f64> {
    if f.grid() != q.grid() {
        return Err(Error::GridMismatch(
            "field and contrast live on different grids".into(),
        ));
    }
    let f = f.to_repr(Repr::Nodal)?;
    let g = f.grid();
    let sq: f64 = f
        .values()
        .iter()
        .zip(q.values())
        .map(|(v, &w)| w.abs() * v.norm_sqr())
        .sum();
    Ok((g.spacing().powi(g.dim() as i32) * sq).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn grid_construction_and_validation() {
        let g = TrigGrid::new(2, 4, 0.275).unwrap();
        assert!((g.spacing() - 0.275).abs() < 1e-15);
        assert_eq!(g.len(), 16);
        assert!(TrigGrid::new(3, 3, 1.0).is_err()); // odd N rejected
        assert!(TrigGrid::new(2, 4, 0.0).is_err());
        assert!(TrigGrid::new(2, 4, -1.0).is_err());
        assert!(TrigGrid::new(4, 4, 1.0).is_err());
        assert!(TrigGrid::new(2, 0, 1.0).is_err());
    }

    #[test]
    fn smallest_grid_nodes() {
        // N=2, rho=1: h=2, node indices {-1, 0} per axis
        let g = TrigGrid::new(2, 2, 1.0).unwrap();
        assert!((g.spacing() - 2.0).abs() < 1e-15);
        let mut nodes: Vec<(f64, f64)> = (0..g.len())
            .map(|i| {
                let x = g.node(i);
                (x[0], x[1])
            })
            .collect();
        nodes.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(nodes, vec![(-2.0, -2.0), (-2.0, 0.0), (0.0, -2.0), (0.0, 0.0)]);
    }

    #[test]
    fn frequency_index_round_trip() {
        for &(d, n) in &[(2usize, 8usize), (3, 4)] {
            let g = TrigGrid::new(d, n, 0.5).unwrap();
            for flat in 0..g.len() {
                let j = g.frequency(flat);
                assert_eq!(g.flat_of_frequency(j), flat);
            }
        }
    }

    #[test]
    fn constant_maps_to_single_coefficient() {
        let g = TrigGrid::new(2, 4, 0.7).unwrap();
        let f = GridFunction::interp_project(g, |_| c(1.0, 0.0));
        let hat = f.nodal_to_fourier().unwrap();
        for (i, v) in hat.values().iter().enumerate() {
            if i == g.flat_of_frequency([0, 0, 0]) {
                // coefficient of phi_0 for the constant 1 is (4rho)^{d/2}
                assert!((v.re - g.period()).abs() < 1e-13 && v.im.abs() < 1e-14);
            } else {
                assert!(v.norm() < 1e-14);
            }
        }
    }

    fn monomial(g: &TrigGrid, j: [i64; 3]) -> GridFunction {
        let rho = g.rho();
        let norm = g.period().powf(-(g.dim() as f64) / 2.0);
        GridFunction::interp_project(*g, move |x| {
            let phase = std::f64::consts::PI / (2.0 * rho)
                * (j[0] as f64 * x[0] + j[1] as f64 * x[1] + j[2] as f64 * x[2]);
            Complex64::from_polar(norm, phase)
        })
    }

    #[test]
    fn monomial_maps_to_single_coefficient() {
        let g = TrigGrid::new(2, 8, 0.3).unwrap();
        let j0 = [3i64, -2, 0];
        let hat = monomial(&g, j0).nodal_to_fourier().unwrap();
        for (i, v) in hat.values().iter().enumerate() {
            if i == g.flat_of_frequency(j0) {
                assert!((v - c(1.0, 0.0)).norm() < 1e-13);
            } else {
                assert!(v.norm() < 1e-13);
            }
        }
    }

    #[test]
    fn q_n_fixes_t_n() {
        // interpolation projection reproduces monomials exactly
        let g = TrigGrid::new(3, 4, 1.1).unwrap();
        let f = monomial(&g, [1, -2, 0]);
        let hat = f.nodal_to_fourier().unwrap();
        let back = hat.fourier_to_nodal().unwrap();
        for (a, b) in back.values().iter().zip(f.values()) {
            assert!((a - b).norm() < 1e-13);
        }
    }

    #[test]
    fn round_trip_all_sizes() {
        // relative round-trip error <= 1e-13 for d=2 up to N=512, d=3 up to 16
        let mut cases = vec![];
        for k in 1..=9 {
            cases.push((2usize, 1usize << k));
        }
        for k in 1..=4 {
            cases.push((3usize, 1usize << k));
        }
        let mut state = 0x12345678u64;
        let mut rng = move || {
            // xorshift, deterministic
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state as f64 / u64::MAX as f64) - 0.5
        };
        for (d, n) in cases {
            let g = TrigGrid::new(d, n, 0.275).unwrap();
            let values: Vec<Complex64> = (0..g.len()).map(|_| c(rng(), rng())).collect();
            let f = GridFunction::from_values(g, Repr::Nodal, values).unwrap();
            let back = f.nodal_to_fourier().unwrap().fourier_to_nodal().unwrap();
            let num = back.sub(&f).unwrap().l2_norm();
            let den = f.l2_norm();
            assert!(num <= 1e-13 * den, "d={d} n={n}: {}", num / den);
        }
    }

    #[test]
    fn parseval() {
        let g = TrigGrid::new(2, 16, 0.9).unwrap();
        let f = GridFunction::interp_project(g, |x| c((3.0 * x[0]).sin(), (2.0 * x[1]).cos()));
        let hat = f.nodal_to_fourier().unwrap();
        assert!((f.l2_norm() - hat.l2_norm()).abs() <= 1e-13 * f.l2_norm());
    }

    #[test]
    fn sobolev_norm_values() {
        let g = TrigGrid::new(2, 8, 0.25).unwrap();
        let zero = GridFunction::zeros(g, Repr::Nodal);
        assert_eq!(zero.sobolev_norm(2.0).unwrap(), 0.0);
        // phi_0 with unit coefficient: any t gives 1
        let f = monomial(&g, [0, 0, 0]);
        for &t in &[-1.0, 0.0, 0.5, 2.0] {
            assert!((f.sobolev_norm(t).unwrap() - 1.0).abs() < 1e-13);
        }
        // |j|^2 = 5, t = 2 -> 6
        let f = monomial(&g, [2, 1, 0]);
        assert!((f.sobolev_norm(2.0).unwrap() - 6.0).abs() < 1e-12);
        // t = 0 agrees with the unweighted L^2 norm
        let f = GridFunction::interp_project(g, |x| c(x[0] * x[1], x[0] - x[1]));
        assert!((f.sobolev_norm(0.0).unwrap() - f.l2_norm()).abs() <= 1e-13 * f.l2_norm());
    }

    #[test]
    fn weighted_norm_values() {
        // q = 1, f = 1 on the whole cell: norm is 4 rho
        let g = TrigGrid::new(2, 8, 0.275).unwrap();
        let f = GridFunction::interp_project(g, |_| c(1.0, 0.0));
        let q1 =
            ContrastField::from_values_any_support(g, vec![1.0; g.len()]).unwrap();
        assert!((weighted_l2_norm(&f, &q1).unwrap() - g.period()).abs() < 1e-13);
        // q = -0.5, f = 1, rho = 0.275: 4 rho / sqrt(2) = 0.77782...
        let qh = ContrastField::from_values_any_support(g, vec![-0.5; g.len()]).unwrap();
        let got = weighted_l2_norm(&f, &qh).unwrap();
        assert!((got - 0.7778174593052023).abs() < 1e-12, "{got}");
        // zero field
        let z = GridFunction::zeros(g, Repr::Nodal);
        assert_eq!(weighted_l2_norm(&z, &qh).unwrap(), 0.0);
        // mismatched grids error
        let g2 = TrigGrid::new(2, 4, 0.275).unwrap();
        let f2 = GridFunction::zeros(g2, Repr::Nodal);
        assert!(weighted_l2_norm(&f2, &qh).is_err());
    }

    #[test]
    fn contrast_support_and_sup() {
        let g = TrigGrid::new(2, 32, 0.275).unwrap();
        let q = ContrastField::disk(g, 0.275, -0.5).unwrap();
        assert!((q.sup_abs() - 0.5).abs() < 1e-15);
        for (i, &s) in q.support().iter().enumerate() {
            let x = g.node(i);
            let r = (x[0] * x[0] + x[1] * x[1]).sqrt();
            assert_eq!(s, r < 0.275, "node {i}");
        }
        // support outside the ball is rejected by the checked constructor
        let bad = ContrastField::from_values(g, vec![1.0; g.len()]);
        assert!(bad.is_err());
        // but allowed by the unchecked one
        assert!(ContrastField::from_values_any_support(g, vec![1.0; g.len()]).is_ok());
    }

    #[test]
    fn mollified_disk_profile() {
        let g = TrigGrid::new(2, 64, 0.275).unwrap();
        let q = ContrastField::mollified_disk(g, 0.25, -0.5, 0.08).unwrap();
        // plateau value inside, zero outside
        for (i, &v) in q.values().iter().enumerate() {
            let x = g.node(i);
            let r = (x[0] * x[0] + x[1] * x[1]).sqrt();
            if r <= 0.17 {
                assert!((v + 0.5).abs() < 1e-15);
            } else if r >= 0.25 {
                assert_eq!(v, 0.0);
            } else {
                assert!((-0.5..=0.0).contains(&v));
            }
        }
    }

    #[test]
    fn interpolation_error_decays() {
        // smooth periodic target, compare against dense sampling at 8x resolution
        let g_fine = TrigGrid::new(2, 256, 0.5).unwrap();
        // cell period is 4 rho = 2, so sin/cos(pi x_k) are exactly periodic
        let target = |x: [f64; 3]| {
            let (sx, cy) = (
                (std::f64::consts::PI * x[0]).sin(),
                (std::f64::consts::PI * x[1]).cos(),
            );
            c(sx.exp() * cy - 1.5, (0.5 * cy).exp() * sx)
        };
        let dense = GridFunction::interp_project(g_fine, target);
        let mut errs = vec![];
        for &n in &[8usize, 16, 32] {
            let g = TrigGrid::new(2, n, 0.5).unwrap();
            let qn = GridFunction::interp_project(g, target);
            let up = qn.prolong_to(g_fine).unwrap();
            errs.push(up.sub(&dense).unwrap().l2_norm());
        }
        // smooth target: at least second-order decay per doubling
        assert!(errs[1] <= errs[0] / 4.0, "{errs:?}");
        assert!(errs[2] <= errs[1] / 4.0, "{errs:?}");
    }

    #[test]
    fn prolong_preserves_shared_nodes() {
        let coarse = TrigGrid::new(2, 8, 0.4).unwrap();
        let fine = TrigGrid::new(2, 32, 0.4).unwrap();
        let f = GridFunction::interp_project(coarse, |x| c(x[0].sin(), x[1]));
        let up = f.prolong_to(fine).unwrap();
        for i in 0..coarse.len() {
            let j = coarse.frequency(i);
            let fi = fine.flat_of_frequency([j[0] * 4, j[1] * 4, 0]);
            assert!((up.values()[fi] - f.values()[i]).norm() < 1e-12);
        }
        // restriction undoes prolongation
        let back = up.restrict_to(coarse).unwrap();
        for (a, b) in back.values().iter().zip(f.values()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn prop_round_trip_and_parseval(seed in 0u64..u64::MAX, k in 1usize..6) {
            let n = 1usize << k;
            let g = TrigGrid::new(2, n, 0.37).unwrap();
            let mut state = seed | 1;
            let mut rng = move || {
                state ^= state << 13;
                state ^= state >> 7;
                state ^= state << 17;
                (state as f64 / u64::MAX as f64) - 0.5
            };
            let values: Vec<Complex64> = (0..g.len()).map(|_| c(rng(), rng())).collect();
            let f = GridFunction::from_values(g, Repr::Nodal, values).unwrap();
            let hat = f.nodal_to_fourier().unwrap();
            let back = hat.fourier_to_nodal().unwrap();
            let diff = back.sub(&f).unwrap().l2_norm();
            prop_assert!(diff <= 1e-13 * (f.l2_norm() + 1e-300));
            prop_assert!((f.l2_norm() - hat.l2_norm()).abs() <= 1e-13 * (f.l2_norm() + 1e-300));
        }
    }
}
