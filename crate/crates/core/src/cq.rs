//! Convolution quadrature driver in its multi-frequency (scaled-DFT) form.
//!
//! Given a multistep generating symbol delta and a scaling lambda in (0,1),
//! the time-domain solve reduces to M+1 independent frequency solves at
//!
//!   s_m = delta(lambda xi^m) / dt,   xi = exp(-2 pi i / (M+1)),
//!
//! connected by the scaled transforms
//!
//!   forward:   g_m = sum_j lambda^j g_j xi^{j m}
//!   inverse:   u_m = lambda^{-m} / (M+1) sum_j U_j xi^{-j m}.
//!
//! Real input data makes the node set conjugate-symmetric, so only the first
//! half of the frequencies is solved and the rest mirrored.
//!
//! Round-off alert: the inverse transform amplifies per-node errors by up to
//! lambda^{-M}. With the default lambda (lambda^{M+1} = sqrt(eps)) that is
//! about 1/sqrt(eps) ~ 7e7, so frequency solves feeding a production run
//! should be pushed well below the default 1e-10 tolerance; the amplification
//! factor is recorded in the run metadata.

use crate::error::{Error, Result};
use crate::fft;
use crate::grid::{weighted_l2_norm, ContrastField, GridFunction, Repr, TrigGrid};
use crate::kernel::ComplexFrequency;
use crate::operator::FrequencyOperator;
use crate::solver::{solve_frequency, SolveReport, SolverConfig};
use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MultistepMethod {
    Bdf1,
    Bdf2,
}

impl MultistepMethod {
    /// Classical order of the method.
    pub fn order(&self) -> usize {
        match self {
            MultistepMethod::Bdf1 => 1,
            MultistepMethod::Bdf2 => 2,
        }
    }

    /// sup_{|zeta| < 1} |delta(zeta)|, the constant in the reported stability
    /// expression (attained on the boundary at zeta = -1).
    pub fn sup_delta_unit_disk(&self) -> f64 {
        match self {
            MultistepMethod::Bdf1 => 2.0,
            MultistepMethod::Bdf2 => 4.0,
        }
    }
}

/// Generating symbol of the multistep method.
pub fn bdf_delta(method: MultistepMethod, xi: Complex64) -> Complex64 {
    match method {
        MultistepMethod::Bdf1 => 1.0 - xi,
        MultistepMethod::Bdf2 => (xi * xi - 4.0 * xi + 3.0) * 0.5,
    }
}

/// lambda = eps^{1/(2(M+1))}, i.e. lambda^{M+1} = sqrt(eps): the standard
/// balance between the aliasing error lambda^{M+1} and the round-off
/// amplification lambda^{-M}.
pub fn choose_lambda(m_steps: usize, eps: f64) -> f64 {
    eps.powf(1.0 / (2.0 * (m_steps as f64 + 1.0)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CqScheme {
    pub method: MultistepMethod,
    m_steps: usize,
    t_final: f64,
    dt: f64,
    lambda: f64,
    sigma0_floor: f64,
}

impl CqScheme {
    /// `lambda = None` selects [`choose_lambda`] with machine epsilon.
    pub fn new(
        method: MultistepMethod,
        m_steps: usize,
        t_final: f64,
        lambda: Option<f64>,
    ) -> Result<Self> {
        if m_steps == 0 {
            return Err(Error::InvalidArgument("need at least one time step".into()));
        }
        if !(t_final.is_finite() && t_final > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "final time must be positive, got {t_final}"
            )));
        }
        let lambda = lambda.unwrap_or_else(|| choose_lambda(m_steps, f64::EPSILON));
        if !(lambda > 0.0 && lambda < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "scaling parameter lambda must lie in (0, 1), got {lambda}"
            )));
        }
        Ok(CqScheme {
            method,
            m_steps,
            t_final,
            dt: t_final / m_steps as f64,
            lambda,
            sigma0_floor: 1e-8,
        })
    }

    pub fn with_sigma_floor(mut self, floor: f64) -> Self {
        self.sigma0_floor = floor;
        self
    }

    pub fn steps(&self) -> usize {
        self.m_steps
    }

    pub fn t_final(&self) -> f64 {
        self.t_final
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn sigma0_floor(&self) -> f64 {
        self.sigma0_floor
    }

    /// xi = exp(-2 pi i / (M+1)), the unit root generating the nodes.
    pub fn xi(&self) -> Complex64 {
        let m1 = (self.m_steps + 1) as f64;
        Complex64::from_polar(1.0, -2.0 * PI / m1)
    }

    /// Round-off amplification factor lambda^{-M} of the inverse transform.
    pub fn roundoff_amplification(&self) -> f64 {
        self.lambda.powi(-(self.m_steps as i32))
    }

    /// Reported (never enforced) stability expression B * N^{-1/13} with
    /// B = sup_{|zeta|<1} |delta(zeta)|; the scheme is flagged when
    /// dt exceeds it.
    pub fn stability_floor(&self, n: usize) -> f64 {
        self.method.sup_delta_unit_disk() * (n as f64).powf(-1.0 / 13.0)
    }
}

/// The frequency nodes s_m = delta(lambda xi^m)/dt for m = 0..=M. Fails if
/// any node dips below the configured Re(s) floor (advice: larger lambda or
/// a different M).
pub fn frequency_nodes(scheme: &CqScheme) -> Result<Vec<ComplexFrequency>> {
    let m1 = scheme.m_steps + 1;
    let mut nodes = Vec::with_capacity(m1);
    for m in 0..m1 {
        // xi^m straight from the angle; repeated multiplication would drift
        // and break the exact conjugate pairing at large M
        let xim = Complex64::from_polar(
            scheme.lambda,
            -2.0 * PI * m as f64 / m1 as f64,
        );
        let s = bdf_delta(scheme.method, xim) / scheme.dt;
        if !(s.re.is_finite() && s.re >= scheme.sigma0_floor) {
            return Err(Error::InvalidArgument(format!(
                "frequency node m = {m} has Re(s) = {:.3e} below the floor {:.3e}; \
                 increase lambda or adjust M",
                s.re, scheme.sigma0_floor
            )));
        }
        nodes.push(ComplexFrequency::new(s)?);
    }
    Ok(nodes)
}

/// Scaled forward transform of a scalar sequence of length M+1.
pub fn scaled_forward_scalar(data: &[Complex64], lambda: f64) -> Vec<Complex64> {
    let mut out: Vec<Complex64> = data
        .iter()
        .enumerate()
        .map(|(j, v)| v * lambda.powi(j as i32))
        .collect();
    fft::transform_1d(&mut out, true);
    out
}

/// Scaled inverse transform of a scalar sequence of length M+1.
pub fn scaled_inverse_scalar(data: &[Complex64], lambda: f64) -> Vec<Complex64> {
    let m1 = data.len();
    let mut out = data.to_vec();
    fft::transform_1d(&mut out, false);
    for (m, v) in out.iter_mut().enumerate() {
        *v *= lambda.powi(-(m as i32)) / m1 as f64;
    }
    out
}

fn check_field_sequence(fields: &[GridFunction]) -> Result<TrigGrid> {
    let first = fields
        .first()
        .ok_or_else(|| Error::InvalidArgument("empty field sequence".into()))?;
    let grid = *first.grid();
    for f in fields {
        if *f.grid() != grid || f.repr() != Repr::Nodal {
            return Err(Error::GridMismatch(
                "field sequence must be nodal on a shared grid".into(),
            ));
        }
    }
    Ok(grid)
}

fn transform_fields(
    fields: Vec<GridFunction>,
    lambda: f64,
    forward: bool,
) -> Result<Vec<GridFunction>> {
    let grid = check_field_sequence(&fields)?;
    let m1 = fields.len();
    let plan = fft::plan(m1, forward);
    let weights: Vec<f64> = (0..m1)
        .map(|j| {
            if forward {
                lambda.powi(j as i32)
            } else {
                lambda.powi(-(j as i32)) / m1 as f64
            }
        })
        .collect();
    // lift the per-frame values out so each node's time series is transformed
    let mut raw: Vec<Vec<Complex64>> = fields.into_iter().map(|f| f.into_values()).collect();
    let nodes = grid.len();
    let mut line = vec![Complex64::default(); m1];
    let mut scratch = vec![Complex64::default(); plan.get_inplace_scratch_len()];
    for node in 0..nodes {
        for (j, frame) in raw.iter().enumerate() {
            line[j] = if forward {
                frame[node] * weights[j]
            } else {
                frame[node]
            };
        }
        plan.process_with_scratch(&mut line, &mut scratch);
        for (j, frame) in raw.iter_mut().enumerate() {
            frame[node] = if forward { line[j] } else { line[j] * weights[j] };
        }
    }
    raw.into_iter()
        .map(|v| GridFunction::from_values(grid, Repr::Nodal, v))
        .collect()
}

/// Scaled forward transform of a sequence of nodal fields (consumed).
pub fn scaled_forward_fields(fields: Vec<GridFunction>, lambda: f64) -> Result<Vec<GridFunction>> {
    transform_fields(fields, lambda, true)
}

/// Scaled inverse transform of a sequence of nodal fields (consumed).
pub fn scaled_inverse_fields(fields: Vec<GridFunction>, lambda: f64) -> Result<Vec<GridFunction>> {
    transform_fields(fields, lambda, false)
}

/// Traveling modulated Gaussian plane pulse and the background speed it
/// rides on. `t0` launches the pulse center `t0` time units after the run
/// starts; the quadrature assumes causal data, so `t0` must be large enough
/// that the pulse has essentially not reached the scatterer at t = 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IncidentField {
    pub a: f64,
    pub b: f64,
    pub c0: f64,
    pub t0: f64,
}

impl IncidentField {
    /// The delay that keeps the experiment-standard pulse (a = 4, b = 1.4)
    /// well below one percent of its amplitude inside the unit-scale scatterer at
    /// t = 0.
    pub const EXPERIMENT_DELAY: f64 = 2.5;

    /// u_inc(x, t) = sin(a tau) exp(-b tau^2) with tau = t - t0 - x1/c0.
    pub fn eval(&self, x: [f64; 3], t: f64) -> f64 {
        let tau = t - self.t0 - x[0] / self.c0;
        (self.a * tau).sin() * (-self.b * tau * tau).exp()
    }

    /// Nodal samples at one time level.
    pub fn sample(&self, grid: &TrigGrid, t: f64) -> GridFunction {
        let p = *self;
        GridFunction::interp_project(*grid, move |x| Complex64::new(p.eval(x, t), 0.0))
    }
}

/// All frames u_m, m = 0..=M, of one convolution-quadrature run plus the
/// per-node solve reports.
#[derive(Debug, Clone)]
pub struct TimeDomainSolution {
    pub scheme: CqScheme,
    pub grid: TrigGrid,
    frames: Vec<GridFunction>,
    pub reports: Vec<SolveReport>,
}

impl TimeDomainSolution {
    pub fn frames(&self) -> &[GridFunction] {
        &self.frames
    }

    pub fn frame(&self, m: usize) -> &GridFunction {
        &self.frames[m]
    }

    /// Largest |Im u| over all frames and nodes (the data is real, so this
    /// measures transform/solver round-off).
    pub fn max_imag_residual(&self) -> f64 {
        self.frames
            .iter()
            .flat_map(|f| f.values().iter())
            .map(|v| v.im.abs())
            .fold(0.0, f64::max)
    }

    /// Largest |u| over all frames and nodes.
    pub fn peak_abs(&self) -> f64 {
        self.frames
            .iter()
            .flat_map(|f| f.values().iter())
            .map(|v| v.norm())
            .fold(0.0, f64::max)
    }
}

/// Full pipeline: sample the incident pulse, scaled forward transform in
/// time, one collocation solve per frequency node (conjugate pairs mirrored),
/// scaled inverse transform back to the time grid.
///
/// `workers` bounds the number of concurrent frequency solves; `None` uses
/// the rayon default.
pub fn run_cq_solve(
    grid: &TrigGrid,
    q: &ContrastField,
    scheme: &CqScheme,
    solver: &SolverConfig,
    incident: &IncidentField,
    workers: Option<usize>,
) -> Result<TimeDomainSolution> {
    solver.validate()?;
    if q.grid() != grid {
        return Err(Error::GridMismatch(
            "contrast lives on a different grid than the run".into(),
        ));
    }
    let nodes = frequency_nodes(scheme)?;
    let m = scheme.steps();
    let m1 = m + 1;

    // incident history and its scaled transform
    let samples: Vec<GridFunction> = (0..m1)
        .map(|j| incident.sample(grid, j as f64 * scheme.dt()))
        .collect();
    let ui_hat = scaled_forward_fields(samples, scheme.lambda())?;

    // conjugate-symmetry shortcut: solve m = 0..=(M+1)/2, mirror the rest
    let solve_until = m1 / 2;
    let solve_one = |idx: usize| -> Result<(GridFunction, SolveReport)> {
        let op = FrequencyOperator::new(grid, &nodes[idx], incident.c0, q.clone())?;
        let rhs = op.rhs_from_incident(&ui_hat[idx])?;
        let (u, report) = solve_frequency(&op, &rhs, solver)?;
        if !report.converged {
            return Err(Error::SolveFailed {
                index: idx,
                s: nodes[idx].value(),
                reason: format!(
                    "residual {:.3e} after {} iterations",
                    report.final_residual, report.iterations
                ),
            });
        }
        Ok((u, report))
    };
    let indices: Vec<usize> = (0..=solve_until).collect();
    let solved: Result<Vec<(GridFunction, SolveReport)>> = match workers {
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w.max(1))
            .build()
            .map_err(|e| Error::InvalidArgument(format!("worker pool: {e}")))?
            .install(|| indices.par_iter().map(|&i| solve_one(i)).collect()),
        None => indices.par_iter().map(|&i| solve_one(i)).collect(),
    };
    let solved = solved?;

    let mut freq_fields: Vec<Option<GridFunction>> = vec![None; m1];
    let mut reports: Vec<Option<SolveReport>> = vec![None; m1];
    for (idx, (u, rep)) in indices.iter().zip(solved) {
        freq_fields[*idx] = Some(u);
        reports[*idx] = Some(rep);
    }
    for idx in solve_until + 1..m1 {
        let partner = m1 - idx;
        let u = freq_fields[partner]
            .as_ref()
            .expect("partner already solved")
            .conj();
        freq_fields[idx] = Some(u);
        reports[idx] = reports[partner];
    }
    let freq_fields: Vec<GridFunction> = freq_fields.into_iter().map(Option::unwrap).collect();
    let frames = scaled_inverse_fields(freq_fields, scheme.lambda())?;

    Ok(TimeDomainSolution {
        scheme: *scheme,
        grid: *grid,
        frames,
        reports: reports.into_iter().map(Option::unwrap).collect(),
    })
}

/// Space-time error norm (dt sum_m |A_m - B_m|^2_{L^2_q})^{1/2} between two
/// runs on the same grid and time mesh.
pub fn spacetime_error_norm(
    a: &TimeDomainSolution,
    b: &TimeDomainSolution,
    q: &ContrastField,
) -> Result<f64> {
    if a.grid != b.grid || q.grid() != &a.grid {
        return Err(Error::GridMismatch(
            "solutions and contrast must share a grid".into(),
        ));
    }
    if a.scheme.steps() != b.scheme.steps() || (a.scheme.dt() - b.scheme.dt()).abs() > 1e-14 {
        return Err(Error::InvalidArgument(
            "solutions must share the time mesh".into(),
        ));
    }
    let mut acc = 0.0;
    for (fa, fb) in a.frames.iter().zip(&b.frames) {
        let w = weighted_l2_norm(&fa.sub(fb)?, q)?;
        acc += a.scheme.dt() * w * w;
    }
    Ok(acc.sqrt())
}

/// Space-time norm of a single run (against zero).
pub fn spacetime_norm(a: &TimeDomainSolution, q: &ContrastField) -> Result<f64> {
    let mut acc = 0.0;
    for f in &a.frames {
        let w = weighted_l2_norm(f, q)?;
        acc += a.scheme.dt() * w * w;
    }
    Ok(acc.sqrt())
}

/// Error of `run` against a reference computed on a finer or equal space-time
/// mesh: frames are prolonged to the reference grid (exact on T_N) and
/// compared at the run's time levels, which must be a subset of the
/// reference's. The weight is the contrast sampled on the reference grid.
pub fn spacetime_error_vs_reference(
    run: &TimeDomainSolution,
    reference: &TimeDomainSolution,
    q_ref: &ContrastField,
) -> Result<f64> {
    if !reference.grid.contains_modes_of(&run.grid) {
        return Err(Error::GridMismatch(
            "reference grid must contain the run's modes".into(),
        ));
    }
    if q_ref.grid() != &reference.grid {
        return Err(Error::GridMismatch(
            "weight must live on the reference grid".into(),
        ));
    }
    let (mr, mc) = (reference.scheme.steps(), run.scheme.steps());
    if mr % mc != 0 {
        return Err(Error::InvalidArgument(format!(
            "reference steps {mr} must be a multiple of run steps {mc}"
        )));
    }
    if (reference.scheme.t_final() - run.scheme.t_final()).abs() > 1e-12 {
        return Err(Error::InvalidArgument(
            "runs must share the final time".into(),
        ));
    }
    let stride = mr / mc;
    let mut acc = 0.0;
    for m in 0..=mc {
        let coarse = if reference.grid == run.grid {
            run.frames[m].clone()
        } else {
            run.frames[m].prolong_to(reference.grid)?
        };
        let diff = coarse.sub(&reference.frames[m * stride])?;
        let w = weighted_l2_norm(&diff, q_ref)?;
        acc += run.scheme.dt() * w * w;
    }
    Ok(acc.sqrt())
}
