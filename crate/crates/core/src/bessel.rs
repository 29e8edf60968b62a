//! Bessel function primitives needed by the kernel coefficients and the disk
//! series: J0/J1 at real argument, K0/K1 and I0/I1 at complex argument with
//! Re(z) > 0, and order-n ladders I_n (downward Miller recurrence) and K_n
//! (upward recurrence).
//!
//! K0/K1 use two regimes. For |z| < 0.5 the ascending series is free of
//! cancellation. For everything else we integrate the Laplace-type
//! representation
//!
//!   K0(z) = 2 e^{-z} z^{-1/2} int_0^inf e^{-v^2} (2 + v^2/z)^{-1/2} dv,
//!   K1(z) = 2 e^{-z} z^{-1/2} int_0^inf e^{-v^2} v^2 (2 + v^2/z)^{1/2} dv,
//!
//! with the trapezoid rule. The integrand is analytic in a strip around the
//! real axis whose half-width grows like sqrt(|z|) (nearest singularity at
//! v^2 = -2z), so the trapezoid converges geometrically; with step 0.04 the
//! measured relative error stays below 1e-14 over Re(z) > 0, |z| in
//! [0.5, 1.5e3], including arguments hugging the imaginary axis.

use crate::error::{Error, Result};
use num_complex::Complex64;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// J0 and J1 at real argument via Miller's downward recurrence, normalized
/// with J0 + 2 sum_k J_{2k} = 1. Cost grows linearly in |x|.
pub fn bessel_j01(x: f64) -> (f64, f64) {
    let ax = x.abs();
    let sign1 = if x < 0.0 { -1.0 } else { 1.0 };
    if ax < 1e-7 {
        return (
            1.0 - 0.25 * x * x,
            sign1 * 0.5 * ax * (1.0 - 0.125 * ax * ax),
        );
    }
    let mut nstart = (ax + 14.0 + 12.0 * ax.cbrt()) as usize;
    if nstart % 2 == 1 {
        nstart += 1;
    }
    let mut fnp1 = 0.0f64;
    let mut fnc = 1e-280f64;
    let mut even_sum = 0.0f64;
    let mut f1 = 0.0f64;
    let mut n = nstart;
    while n >= 1 {
        let fnm1 = (2.0 * n as f64 / ax) * fnc - fnp1;
        fnp1 = fnc;
        fnc = fnm1;
        let m = n - 1;
        if m == 1 {
            f1 = fnc;
        }
        if m > 0 && m.is_multiple_of(2) {
            even_sum += fnc;
        }
        if fnc.abs() > 1e250 {
            let sc = 1e-250;
            fnc *= sc;
            fnp1 *= sc;
            even_sum *= sc;
            f1 *= sc;
        }
        n -= 1;
    }
    let norm = fnc + 2.0 * even_sum;
    (fnc / norm, sign1 * f1 / norm)
}

fn check_right_half_plane(z: Complex64) -> Result<()> {
    if !(z.re.is_finite() && z.im.is_finite() && z.re > 0.0) {
        return Err(Error::Domain(format!(
            "modified Bessel K requires Re(z) > 0, got z = {z}"
        )));
    }
    Ok(())
}

/// I0 and I1 by ascending series. Accurate to roughly eps * e^{|z| - Re z}
/// relative; intended for |z| up to a few tens.
pub fn bessel_i01_series(z: Complex64) -> (Complex64, Complex64) {
    let q = z * z * 0.25;
    let mut i0 = Complex64::new(1.0, 0.0);
    let mut i1s = Complex64::new(1.0, 0.0);
    let mut t0 = Complex64::new(1.0, 0.0);
    let mut t1 = Complex64::new(1.0, 0.0);
    for k in 1..400 {
        let kf = k as f64;
        t0 = t0 * q / (kf * kf);
        t1 = t1 * q / (kf * (kf + 1.0));
        i0 += t0;
        i1s += t1;
        if t0.norm() < 1e-18 * i0.norm() && t1.norm() < 1e-18 * i1s.norm() {
            break;
        }
    }
    (i0, 0.5 * z * i1s)
}

fn k01_series(z: Complex64) -> (Complex64, Complex64) {
    let q = z * z * 0.25;
    let lg = (0.5 * z).ln();
    let mut i0 = Complex64::new(1.0, 0.0);
    let mut i1s = Complex64::new(1.0, 0.0);
    let mut t0 = Complex64::new(1.0, 0.0);
    let mut t1 = Complex64::new(1.0, 0.0);
    let mut s0 = Complex64::default();
    // k = 0 term of the K1 correction sum: H_0 + H_1 - 2 gamma = 1 - 2 gamma
    let mut s1 = Complex64::new(1.0 - 2.0 * EULER_GAMMA, 0.0);
    let mut hk = 0.0f64;
    for k in 1..200 {
        let kf = k as f64;
        t0 = t0 * q / (kf * kf);
        t1 = t1 * q / (kf * (kf + 1.0));
        hk += 1.0 / kf;
        let hk1 = hk + 1.0 / (kf + 1.0);
        i0 += t0;
        i1s += t1;
        s0 += t0 * hk;
        s1 += t1 * (hk + hk1 - 2.0 * EULER_GAMMA);
        if t0.norm() < 1e-18 * i0.norm().max(1.0) {
            break;
        }
    }
    let i1 = 0.5 * z * i1s;
    let k0 = -(lg + EULER_GAMMA) * i0 + s0;
    let k1 = 1.0 / z + lg * i1 - 0.25 * z * s1;
    (k0, k1)
}

// trapezoid step and cutoff for the Laplace-representation integrals
const TRAP_H: f64 = 0.04;
const TRAP_VMAX: f64 = 9.5;

fn k01_trapezoid(z: Complex64) -> (Complex64, Complex64) {
    let n = (TRAP_VMAX / TRAP_H) as usize;
    let inv_z = 1.0 / z;
    let mut s0 = 0.5 * Complex64::new(2.0, 0.0).powf(-0.5);
    let mut s1 = Complex64::default();
    for k in 1..=n {
        let v = k as f64 * TRAP_H;
        let w = (-v * v).exp();
        let g = 2.0 + v * v * inv_z;
        let r = 1.0 / g.sqrt();
        s0 += w * r;
        s1 += (w * v * v) * (g * r);
    }
    let pref = 2.0 * TRAP_H * (-z).exp() / z.sqrt();
    (pref * s0, pref * s1)
}

/// K0 and K1 at complex argument, Re(z) > 0.
pub fn bessel_k01(z: Complex64) -> Result<(Complex64, Complex64)> {
    check_right_half_plane(z)?;
    let out = if z.norm() < 0.5 {
        k01_series(z)
    } else {
        k01_trapezoid(z)
    };
    #[cfg(debug_assertions)]
    {
        // Wronskian self-check where the I series is itself reliable
        if z.norm() <= 5.0 {
            let (i0, i1) = bessel_i01_series(z);
            let res = (i0 * out.1 + i1 * out.0 - 1.0 / z).norm() * z.norm();
            debug_assert!(res < 1e-10, "K Wronskian residual {res:.3e} at z = {z}");
        }
    }
    Ok(out)
}

/// |I0 K1 + I1 K0 - 1/z| scaled by |z| (relative to the exact value 1/z).
pub fn wronskian_residual(z: Complex64) -> Result<f64> {
    let (k0, k1) = bessel_k01(z)?;
    let (i0, i1) = bessel_i01_series(z);
    Ok((i0 * k1 + i1 * k0 - 1.0 / z).norm() * z.norm())
}

/// I_0(z) .. I_{nmax}(z) by downward Miller recurrence normalized against
/// e^z = I_0 + 2 sum_{n>=1} I_n. Requires Re(z) > 0 for a stable
/// normalization (all our callers satisfy this).
pub fn bessel_in_array(z: Complex64, nmax: usize) -> Result<Vec<Complex64>> {
    check_right_half_plane(z)?;
    let az = z.norm();
    if az < 1e-12 {
        let mut out = vec![Complex64::default(); nmax + 1];
        out[0] = Complex64::new(1.0, 0.0);
        return Ok(out);
    }
    let nstart = nmax + (1.5 * az) as usize + 60;
    let mut fnp1 = Complex64::default();
    let mut fnc = Complex64::new(1e-280, 0.0);
    let mut sum = Complex64::default();
    let mut out = vec![Complex64::default(); nmax + 1];
    let mut n = nstart;
    while n >= 1 {
        let fnm1 = fnp1 + (2.0 * n as f64 / z) * fnc;
        fnp1 = fnc;
        fnc = fnm1;
        let m = n - 1;
        if m <= nmax {
            out[m] = fnc;
        }
        if m > 0 {
            sum += fnc;
        }
        if fnc.norm() > 1e250 {
            let sc = 1e-250;
            fnc *= sc;
            fnp1 *= sc;
            sum *= sc;
            for v in &mut out {
                *v *= sc;
            }
        }
        n -= 1;
    }
    // the normalization sum can sit far below 1 in magnitude; divide out its
    // modulus first so the complex division cannot underflow internally
    let denom = fnc + 2.0 * sum;
    let dn = denom.norm();
    if dn == 0.0 || !dn.is_finite() {
        return Err(Error::Domain(format!(
            "Miller normalization degenerate for z = {z}"
        )));
    }
    let inv = 1.0 / dn;
    let scale = z.exp() / (denom * inv);
    for v in &mut out {
        *v = *v * inv * scale;
    }
    Ok(out)
}

/// K_0(z) .. K_{nmax}(z) by upward recurrence from K0, K1 (stable since K_n
/// grows with n). Errors out if the recurrence overflows.
pub fn bessel_kn_array(z: Complex64, nmax: usize) -> Result<Vec<Complex64>> {
    let (k0, k1) = bessel_k01(z)?;
    let mut out = Vec::with_capacity(nmax + 1);
    out.push(k0);
    if nmax >= 1 {
        out.push(k1);
    }
    for n in 1..nmax {
        let next = out[n - 1] + (2.0 * n as f64 / z) * out[n];
        if !next.re.is_finite() || !next.im.is_finite() {
            return Err(Error::Domain(format!(
                "K_n recurrence overflowed at n = {} for z = {z}",
                n + 1
            )));
        }
        out.push(next);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BesselKind {
    J,
    K,
}

/// Dispatcher for the two kernel-level Bessel needs: J at real argument
/// (passed as a complex with zero imaginary part) and K at Re(z) > 0.
pub fn bessel_complex(order: u8, kind: BesselKind, z: Complex64) -> Result<Complex64> {
    if order > 1 {
        return Err(Error::InvalidArgument(format!(
            "bessel_complex supports orders 0 and 1, got {order}"
        )));
    }
    match kind {
        BesselKind::J => {
            if z.im != 0.0 {
                return Err(Error::Domain(format!(
                    "J evaluation is only supported at real argument, got z = {z}"
                )));
            }
            let (j0, j1) = bessel_j01(z.re);
            Ok(Complex64::new(if order == 0 { j0 } else { j1 }, 0.0))
        }
        BesselKind::K => {
            let (k0, k1) = bessel_k01(z)?;
            Ok(if order == 0 { k0 } else { k1 })
        }
    }
}
