//! Globally adaptive Gauss-Legendre quadrature for complex-valued integrands
//! on a real interval. Panel error is estimated by comparing a 15-point rule
//! with a 7-point rule on the same panel; the panel with the largest estimate
//! is bisected until the summed estimates meet the tolerance.
//!
//! Nodes and weights are generated at first use by Newton iteration on the
//! Legendre recurrence, so no coefficient tables are baked in.

use crate::error::{Error, Result};
use num_complex::Complex64;
use std::sync::OnceLock;

/// Gauss-Legendre nodes and weights on [-1, 1].
fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let half = n.div_ceil(2);
    for i in 0..half {
        // Tricomi-style initial guess, then Newton on P_n
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

type GaussRule = (Vec<f64>, Vec<f64>);

fn rules() -> &'static (GaussRule, GaussRule) {
    static RULES: OnceLock<(GaussRule, GaussRule)> = OnceLock::new();
    RULES.get_or_init(|| (gauss_legendre(7), gauss_legendre(15)))
}

fn panel<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64) -> (Complex64, f64) {
    let ((x7, w7), (x15, w15)) = rules();
    let mid = 0.5 * (a + b);
    let hw = 0.5 * (b - a);
    let mut lo = Complex64::default();
    for (x, w) in x7.iter().zip(w7) {
        lo += *w * f(mid + hw * x);
    }
    let mut hi = Complex64::default();
    for (x, w) in x15.iter().zip(w15) {
        hi += *w * f(mid + hw * x);
    }
    (hw * hi, (hw * (hi - lo)).norm())
}

/// Integrate `f` over [a, b] to relative tolerance `tol`. Returns the value
/// and the final error estimate.
pub fn adaptive_complex<F: Fn(f64) -> Complex64>(
    f: F,
    a: f64,
    b: f64,
    tol: f64,
    max_panels: usize,
) -> Result<(Complex64, f64)> {
    let (v, e) = panel(&f, a, b);
    let mut panels = vec![(a, b, v, e)];
    loop {
        let total: Complex64 = panels.iter().map(|p| p.2).sum();
        let err: f64 = panels.iter().map(|p| p.3).sum();
        let target = tol * total.norm().max(f64::MIN_POSITIVE);
        if err <= target {
            return Ok((total, err));
        }
        if panels.len() >= max_panels {
            return Err(Error::QuadratureNonConvergence {
                achieved: err / total.norm().max(f64::MIN_POSITIVE),
                requested: tol,
            });
        }
        // split the worst panel
        let worst = panels
            .iter()
            .enumerate()
            .max_by(|a, b| a.1 .3.partial_cmp(&b.1 .3).unwrap())
            .map(|(i, _)| i)
            .unwrap();
        let (pa, pb, _, _) = panels.swap_remove(worst);
        let mid = 0.5 * (pa + pb);
        let (v1, e1) = panel(&f, pa, mid);
        let (v2, e2) = panel(&f, mid, pb);
        panels.push((pa, mid, v1, e1));
        panels.push((mid, pb, v2, e2));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_exact() {
        // G15 integrates degree <= 29 exactly
        let (v, _) = adaptive_complex(
            |x| Complex64::new(x.powi(9) - 3.0 * x * x + 1.0, x.powi(5)),
            0.0,
            2.0,
            1e-12,
            100,
        )
        .unwrap();
        // int_0^2 x^9 - 3x^2 + 1 = 102.4 - 8 + 2; int x^5 = 64/6
        assert!((v.re - 96.4).abs() < 1e-12);
        assert!((v.im - 64.0 / 6.0).abs() < 1e-12);
    }

    #[test]
    fn oscillatory_complex_exponential() {
        let s = Complex64::new(0.4, 21.0);
        let (v, _) = adaptive_complex(|r| (-s * r).exp(), 0.0, 1.0, 1e-12, 2000).unwrap();
        let exact = (1.0 - (-s).exp()) / s;
        assert!((v - exact).norm() < 1e-12 * exact.norm());
    }

    #[test]
    fn endpoint_log_singularity() {
        // r ln r is integrable with a mild kink at 0: int_0^1 = -1/4
        let (v, _) = adaptive_complex(
            |r| Complex64::new(if r == 0.0 { 0.0 } else { r * r.ln() }, 0.0),
            0.0,
            1.0,
            1e-12,
            4000,
        )
        .unwrap();
        assert!((v.re + 0.25).abs() < 1e-12, "{v}");
    }

    #[test]
    fn reports_non_convergence() {
        let err = adaptive_complex(
            |r| Complex64::new((1e8 * r).sin(), 0.0),
            0.0,
            1.0,
            1e-12,
            8,
        )
        .unwrap_err();
        matches!(err, Error::QuadratureNonConvergence { .. });
    }
}
