//! Fourier coefficients of the periodized, truncated Laplace-domain
//! fundamental solution.
//!
//! The kernel is exp(-s|x|/c0) / (4 pi |x|) in 3d and K0(s|x|/c0) / (2 pi) in
//! 2d, truncated to the ball |x| < 2 rho and extended 4 rho-periodically. Its
//! action on the monomial phi_j is multiplication by
//!
//!   kappa(j) = int_{|z| < 2 rho} kernel(z) exp(-i pi j.z / (2 rho)) dV(z),
//!
//! which reduces to a radial integral with closed form (a = 2 rho,
//! b = pi |j| / (2 rho), c = s / c0):
//!
//!   3d, j = 0:  (1 - e^{-ac} (1 + ac)) / c^2
//!   3d, j != 0: (1 - e^{-ac} (cos(ab) + (c/b) sin(ab))) / (b^2 + c^2)
//!   2d, j = 0:  (1 - ac K1(ac)) / c^2
//!   2d, j != 0: (1 + a (b J1(ab) K0(ac) - c J0(ab) K1(ac))) / (b^2 + c^2)
//!
//! An adaptive quadrature of the radial integral serves as the independent
//! oracle for all of these.

use crate::bessel::{bessel_j01, bessel_k01};
use crate::error::{Error, Result};
use crate::grid::TrigGrid;
use crate::quadrature::adaptive_complex;
use num_complex::Complex64;
use std::collections::HashMap;
use std::f64::consts::PI;

/// Laplace transform parameter with Re(s) > 0 enforced at construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexFrequency {
    s: Complex64,
}

impl ComplexFrequency {
    pub fn new(s: Complex64) -> Result<Self> {
        if !(s.re.is_finite() && s.im.is_finite() && s.re > 0.0) {
            return Err(Error::Domain(format!(
                "transform parameter must satisfy Re(s) > 0, got s = {s}"
            )));
        }
        Ok(ComplexFrequency { s })
    }

    pub fn value(&self) -> Complex64 {
        self.s
    }

    /// Re(s), strictly positive.
    pub fn sigma(&self) -> f64 {
        self.s.re
    }

    pub fn conj(&self) -> ComplexFrequency {
        ComplexFrequency { s: self.s.conj() }
    }
}

impl std::fmt::Display for ComplexFrequency {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.s)
    }
}

fn check_geometry(rho: f64, c0: f64) -> Result<()> {
    if !(rho > 0.0 && c0 > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "rho and c0 must be positive, got rho = {rho}, c0 = {c0}"
        )));
    }
    Ok(())
}

// Denominators b^2 + c^2 cannot vanish for Re(s) > 0; the guard below covers
// roundoff pathologies by deferring to the quadrature oracle.
const DENOM_GUARD: f64 = 1e-10;

fn coeff_2d_with(jsq: i64, jpair: (f64, f64), kpair: (Complex64, Complex64), s: Complex64, rho: f64, c0: f64) -> Complex64 {
    let a = 2.0 * rho;
    let ct = s / c0;
    let (k0, k1) = kpair;
    if jsq == 0 {
        return (1.0 - a * ct * k1) / (ct * ct);
    }
    let jn = (jsq as f64).sqrt();
    let b = PI * jn / (2.0 * rho);
    let (j0, j1) = jpair;
    let denom = b * b + ct * ct;
    debug_assert!(denom.norm() >= DENOM_GUARD * b * b);
    (1.0 + a * (b * j1 * k0 - ct * j0 * k1)) / denom
}

/// kappa(j) in two dimensions, evaluated in closed form.
pub fn kernel_coeff_2d(j: [i64; 2], s: &ComplexFrequency, rho: f64, c0: f64) -> Result<Complex64> {
    check_geometry(rho, c0)?;
    let jsq = j[0] * j[0] + j[1] * j[1];
    let sv = s.value();
    let (k0, k1) = bessel_k01(2.0 * rho * sv / c0)?;
    if jsq == 0 {
        return Ok(coeff_2d_with(0, (0.0, 0.0), (k0, k1), sv, rho, c0));
    }
    let jn = (jsq as f64).sqrt();
    let b = PI * jn / (2.0 * rho);
    let ct = sv / c0;
    if (b * b + ct * ct).norm() < DENOM_GUARD * b * b {
        return kernel_coeff_quadrature_oracle(2, [j[0], j[1], 0], s, rho, c0, 1e-12);
    }
    Ok(coeff_2d_with(jsq, bessel_j01(PI * jn), (k0, k1), sv, rho, c0))
}

/// kappa(j) in three dimensions, evaluated in closed form.
pub fn kernel_coeff_3d(j: [i64; 3], s: &ComplexFrequency, rho: f64, c0: f64) -> Result<Complex64> {
    check_geometry(rho, c0)?;
    let sv = s.value();
    let a = 2.0 * rho;
    let ct = sv / c0;
    let jsq = j[0] * j[0] + j[1] * j[1] + j[2] * j[2];
    if jsq == 0 {
        return Ok((1.0 - (-a * ct).exp() * (1.0 + a * ct)) / (ct * ct));
    }
    let jn = (jsq as f64).sqrt();
    let b = PI * jn / (2.0 * rho);
    let denom = b * b + ct * ct;
    if denom.norm() < DENOM_GUARD * b * b {
        return kernel_coeff_quadrature_oracle(3, j, s, rho, c0, 1e-12);
    }
    let ab = PI * jn; // a * b
    Ok((1.0 - (-a * ct).exp() * (ab.cos() + ct / b * ab.sin())) / denom)
}

/// Closed-form coefficient for either dimension (j padded to three entries).
pub fn kernel_coeff(d: usize, j: [i64; 3], s: &ComplexFrequency, rho: f64, c0: f64) -> Result<Complex64> {
    match d {
        2 => kernel_coeff_2d([j[0], j[1]], s, rho, c0),
        3 => kernel_coeff_3d(j, s, rho, c0),
        _ => Err(Error::InvalidArgument(format!("dimension must be 2 or 3, got {d}"))),
    }
}

/// The same coefficient by adaptive quadrature of the radial integral:
/// 3d integrand exp(-s r/c0) sinc(pi |j| r / (2 rho)) r,
/// 2d integrand K0(s r/c0) J0(pi |j| r / (2 rho)) r on (0, 2 rho).
pub fn kernel_coeff_quadrature_oracle(
    d: usize,
    j: [i64; 3],
    s: &ComplexFrequency,
    rho: f64,
    c0: f64,
    tol: f64,
) -> Result<Complex64> {
    check_geometry(rho, c0)?;
    if !(1e-12..=1e-4).contains(&tol) {
        return Err(Error::InvalidArgument(format!(
            "oracle tolerance must lie in [1e-12, 1e-4], got {tol}"
        )));
    }
    let jsq = j[0] * j[0] + j[1] * j[1] + if d == 3 { j[2] * j[2] } else { 0 };
    let jn = (jsq as f64).sqrt();
    let b = PI * jn / (2.0 * rho);
    let ct = s.value() / c0;
    let upper = 2.0 * rho;
    let max_panels = 6000;
    let (value, _err) = match d {
        3 => adaptive_complex(
            |r| {
                let osc = if jsq == 0 {
                    r
                } else {
                    (b * r).sin() / b
                };
                (-ct * r).exp() * osc
            },
            0.0,
            upper,
            tol,
            max_panels,
        )?,
        2 => adaptive_complex(
            |r| {
                if r == 0.0 {
                    return Complex64::default();
                }
                let (k0, _) = bessel_k01(ct * r).expect("Re(s) > 0 ensures Re(ct r) > 0");
                let (j0, _) = bessel_j01(b * r);
                k0 * j0 * r
            },
            0.0,
            upper,
            tol,
            max_panels,
        )?,
        _ => {
            return Err(Error::InvalidArgument(format!(
                "dimension must be 2 or 3, got {d}"
            )))
        }
    };
    Ok(value)
}

/// Table of kappa(j) over Z^d_N for one (grid, s, c0) triple, stored in the
/// grid's wrap-around layout so it can multiply FFT output directly.
#[derive(Debug, Clone)]
pub struct KernelTable {
    grid: TrigGrid,
    s: ComplexFrequency,
    c0: f64,
    coeffs: Vec<Complex64>,
}

impl KernelTable {
    pub fn grid(&self) -> &TrigGrid {
        &self.grid
    }

    pub fn s(&self) -> &ComplexFrequency {
        &self.s
    }

    pub fn c0(&self) -> f64 {
        self.c0
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeff(&self, flat: usize) -> Complex64 {
        self.coeffs[flat]
    }

    /// min_j |kappa(j)| over the table; strictly positive for Re(s) > 0.
    pub fn min_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(f64::INFINITY, f64::min)
    }
}

/// Evaluate kappa(j) for every j in Z^d_N. J0/J1 evaluations are shared
/// across entries with equal |j|^2; K0/K1 is a single evaluation per table.
pub fn build_kernel_table(grid: &TrigGrid, s: &ComplexFrequency, c0: f64) -> Result<KernelTable> {
    check_geometry(grid.rho(), c0)?;
    let d = grid.dim();
    let rho = grid.rho();
    let sv = s.value();
    let mut coeffs = vec![Complex64::default(); grid.len()];
    if d == 2 {
        let kpair = bessel_k01(2.0 * rho * sv / c0)?;
        let mut jcache: HashMap<i64, (f64, f64)> = HashMap::new();
        for (flat, slot) in coeffs.iter_mut().enumerate() {
            let jsq = grid.frequency_norm_sq(flat);
            let jpair = *jcache
                .entry(jsq)
                .or_insert_with(|| bessel_j01(PI * (jsq as f64).sqrt()));
            *slot = coeff_2d_with(jsq, jpair, kpair, sv, rho, c0);
        }
    } else {
        for (flat, slot) in coeffs.iter_mut().enumerate() {
            *slot = kernel_coeff_3d(grid.frequency(flat), s, rho, c0)?;
        }
    }
    Ok(KernelTable {
        grid: *grid,
        s: *s,
        c0,
        coeffs,
    })
}
