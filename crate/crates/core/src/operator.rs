//! The discretized Lippmann-Schwinger operator at one complex frequency,
//!
//!   A u = u + (s^2/c0^2) V_p [ q . u ],
//!
//! applied through the FFT diagonalization of the periodized volume potential
//! V_p: multiply by the contrast at the nodes, transform, multiply by
//! kappa(j), transform back. A dense assembly of the same operator serves as
//! the validation oracle and feeds the direct solver.

use crate::dense::DenseMatrix;
use crate::error::{Error, Result};
use crate::fft;
use crate::grid::{ContrastField, GridFunction, Repr, TrigGrid};
use crate::kernel::{build_kernel_table, ComplexFrequency, KernelTable};
use num_complex::Complex64;

/// Cap on dense assemblies (and thereby direct solves).
pub const DENSE_GUARD: usize = 4096;

/// Apply the periodized volume potential alone: F^{-1}[ kappa . F f ].
pub fn apply_volume_potential(table: &KernelTable, f: &GridFunction) -> Result<GridFunction> {
    if f.grid() != table.grid() {
        return Err(Error::GridMismatch(
            "field and kernel table live on different grids".into(),
        ));
    }
    if f.repr() != Repr::Nodal {
        return Err(Error::InvalidArgument(
            "apply_volume_potential expects nodal input".into(),
        ));
    }
    let g = *f.grid();
    let mut values = f.values().to_vec();
    volume_potential_in_place(table, &g, &mut values);
    GridFunction::from_values(g, Repr::Nodal, values)
}

fn volume_potential_in_place(table: &KernelTable, g: &TrigGrid, values: &mut [Complex64]) {
    fft::transform_nd(values, g.dim(), g.points_per_axis(), true);
    let inv = 1.0 / g.len() as f64;
    for (v, k) in values.iter_mut().zip(table.coeffs()) {
        *v *= k * inv;
    }
    fft::transform_nd(values, g.dim(), g.points_per_axis(), false);
}

#[derive(Debug, Clone)]
pub struct FrequencyOperator {
    q: ContrastField,
    ktable: KernelTable,
    multiplier: Complex64, // s^2 / c0^2
}

impl FrequencyOperator {
    pub fn new(grid: &TrigGrid, s: &ComplexFrequency, c0: f64, q: ContrastField) -> Result<Self> {
        let ktable = build_kernel_table(grid, s, c0)?;
        Self::with_table(q, ktable)
    }

    /// Wrap an existing kernel table; the table and contrast must share a grid.
    pub fn with_table(q: ContrastField, ktable: KernelTable) -> Result<Self> {
        if q.grid() != ktable.grid() {
            return Err(Error::GridMismatch(
                "contrast and kernel table live on different grids".into(),
            ));
        }
        let s = ktable.s().value();
        let multiplier = s * s / (ktable.c0() * ktable.c0());
        Ok(FrequencyOperator {
            q,
            ktable,
            multiplier,
        })
    }

    pub fn grid(&self) -> &TrigGrid {
        self.ktable.grid()
    }

    pub fn s(&self) -> &ComplexFrequency {
        self.ktable.s()
    }

    pub fn c0(&self) -> f64 {
        self.ktable.c0()
    }

    pub fn contrast(&self) -> &ContrastField {
        &self.q
    }

    pub fn kernel_table(&self) -> &KernelTable {
        &self.ktable
    }

    fn check_input(&self, u: &GridFunction) -> Result<()> {
        if u.grid() != self.grid() {
            return Err(Error::GridMismatch(
                "input lives on a different grid than the operator".into(),
            ));
        }
        if u.repr() != Repr::Nodal {
            return Err(Error::InvalidArgument(
                "operator application expects nodal input".into(),
            ));
        }
        Ok(())
    }

    /// y = x + (s^2/c0^2) V_p[q . x] on raw nodal slices.
    pub(crate) fn apply_slice(&self, x: &[Complex64], y: &mut Vec<Complex64>) {
        y.clear();
        y.extend(x.iter().zip(self.q.values()).map(|(v, &qv)| v * qv));
        volume_potential_in_place(&self.ktable, self.grid(), y);
        for (yi, xi) in y.iter_mut().zip(x) {
            *yi = xi + self.multiplier * *yi;
        }
    }

    /// Full operator application, A u = u + (s^2/c0^2) V_p[Q_N(q u)].
    /// The nodal product realizes Q_N(q u) exactly since both factors are
    /// nodal samples.
    pub fn apply(&self, u: &GridFunction) -> Result<GridFunction> {
        self.check_input(u)?;
        let mut out = Vec::new();
        self.apply_slice(u.values(), &mut out);
        GridFunction::from_values(*self.grid(), Repr::Nodal, out)
    }

    /// Right-hand side -(s^2/c0^2) V_p[q u_inc] built from nodal samples of
    /// the incident field (its values off the support of q are irrelevant).
    pub fn rhs_from_incident(&self, ui: &GridFunction) -> Result<GridFunction> {
        self.check_input(ui)?;
        let g = *self.grid();
        let mut values: Vec<Complex64> = ui
            .values()
            .iter()
            .zip(self.q.values())
            .map(|(v, &qv)| v * qv)
            .collect();
        volume_potential_in_place(&self.ktable, &g, &mut values);
        for v in &mut values {
            *v *= -self.multiplier;
        }
        GridFunction::from_values(g, Repr::Nodal, values)
    }

    /// Dense matrix of the operator in the nodal basis, built column by
    /// column by applying the operator to indicator vectors.
    pub fn assemble_dense(&self) -> Result<DenseMatrix> {
        let n = self.grid().len();
        if n > DENSE_GUARD {
            return Err(Error::SizeGuard {
                what: "dense operator assembly",
                needed: n,
                cap: DENSE_GUARD,
            });
        }
        let mut m = DenseMatrix::zeros(n);
        let mut e = vec![Complex64::default(); n];
        let mut col = Vec::new();
        for c in 0..n {
            e[c] = Complex64::new(1.0, 0.0);
            self.apply_slice(&e, &mut col);
            e[c] = Complex64::default();
            for (r, v) in col.iter().enumerate() {
                m.set(r, c, *v);
            }
        }
        Ok(m)
    }
}
