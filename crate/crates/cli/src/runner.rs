//! Mode execution: builds core objects from the validated config, runs the
//! experiment, writes results.csv / manifest.json / plot data.

use crate::config::{ExperimentConfig, Mode};
use crate::output::{
    emit_plot_data, fnum, node_reports, write_frame_csv, write_manifest, write_results_csv,
    NodeReport, StabilityLog,
};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::path::{Path, PathBuf};
use std::time::Instant;
use tdls_core::{
    disk_series_coeffs, frequency_nodes, kernel_coeff, kernel_coeff_quadrature_oracle,
    run_cq_solve, solve_frequency, spacetime_error_vs_reference, weighted_l2_norm,
    ComplexFrequency, ContrastField, CqScheme, DiskConfig, Error, FrequencyOperator, GridFunction,
    IncidentField, SolveReport, TrigGrid,
};

/// Runtime failures that map to exit code 2; everything config-shaped maps
/// to exit code 1 before we get here.
#[derive(Debug)]
pub enum RunError {
    Config(String),
    Solver(String),
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunError::Config(m) => write!(f, "config error: {m}"),
            RunError::Solver(m) => write!(f, "solver failure: {m}"),
        }
    }
}

fn io_err(e: impl std::fmt::Display) -> RunError {
    RunError::Config(format!("i/o error: {e}"))
}

#[derive(Serialize)]
struct SolverSummary {
    nodes_solved: usize,
    max_iterations: usize,
    max_residual: f64,
    all_converged: bool,
    wall_s: f64,
}

fn summarize(reports: &[SolveReport], wall: f64) -> SolverSummary {
    SolverSummary {
        nodes_solved: reports.len(),
        max_iterations: reports.iter().map(|r| r.iterations).max().unwrap_or(0),
        max_residual: reports
            .iter()
            .map(|r| r.final_residual)
            .fold(0.0, f64::max),
        all_converged: reports.iter().all(|r| r.converged),
        wall_s: wall,
    }
}

#[derive(Serialize)]
struct RunRecord {
    label: String,
    n: usize,
    m: usize,
    dt: f64,
    lambda: f64,
    roundoff_amplification: f64,
    stability: StabilityLog,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<f64>,
    solver: SolverSummary,
    #[serde(skip_serializing_if = "Option::is_none")]
    nodes: Option<Vec<NodeReport>>,
}

#[derive(Serialize)]
struct Manifest<'a> {
    mode: String,
    outcome: String,
    workers: usize,
    config: &'a ExperimentConfig,
    runs: Vec<RunRecord>,
}

fn stability_log(scheme: &CqScheme, n: usize) -> StabilityLog {
    let floor = scheme.stability_floor(n);
    StabilityLog {
        dt: scheme.dt(),
        n,
        sup_delta: scheme.method.sup_delta_unit_disk(),
        floor,
        dt_above_floor: scheme.dt() > floor,
    }
}

pub struct Runner<'a> {
    pub mode: Mode,
    pub cfg: &'a ExperimentConfig,
    pub out_dir: PathBuf,
    pub workers: usize,
}

impl Runner<'_> {
    fn worker_opt(&self) -> Option<usize> {
        if self.workers == 0 {
            None
        } else {
            Some(self.workers)
        }
    }

    pub fn run(&self) -> Result<(), RunError> {
        std::fs::create_dir_all(&self.out_dir).map_err(io_err)?;
        match self.mode {
            Mode::SingleFreq => self.single_freq(),
            Mode::CqRun => self.cq_run(),
            Mode::SweepTime => self.sweep(true),
            Mode::SweepSpace => self.sweep(false),
            Mode::KernelSelftest => self.kernel_selftest(),
        }
    }

    fn finish(
        &self,
        rows: Vec<Vec<String>>,
        header: &[&str],
        runs: Vec<RunRecord>,
        failure: Option<String>,
    ) -> Result<(), RunError> {
        let mut rows = rows;
        if let Some(reason) = &failure {
            rows.push(vec![format!("FAILED"), reason.replace(',', ";")]);
        }
        write_results_csv(&self.out_dir.join("results.csv"), header, &rows).map_err(io_err)?;
        // canonical echo of the parsed configuration (round-trip stable)
        std::fs::write(self.out_dir.join("config_echo.toml"), self.cfg.to_toml())
            .map_err(io_err)?;
        let manifest = Manifest {
            mode: self.mode.to_string(),
            outcome: match &failure {
                None => "success".into(),
                Some(r) => format!("failed: {r}"),
            },
            workers: self.workers,
            config: self.cfg,
            runs,
        };
        write_manifest(&self.out_dir, &manifest).map_err(io_err)?;
        match failure {
            None => Ok(()),
            Some(reason) => Err(RunError::Solver(reason)),
        }
    }

    fn single_freq(&self) -> Result<(), RunError> {
        let cfg = self.cfg;
        let sf = cfg.single_freq.as_ref().expect("validated");
        let sv = Complex64::new(sf.s[0], sf.s[1]);
        let s = ComplexFrequency::new(sv).map_err(|e| RunError::Config(e.to_string()))?;
        let n = cfg.geometry.n.expect("validated");
        let grid = cfg.grid(n).map_err(RunError::Config)?;
        let q = cfg
            .geometry
            .scatterer
            .contrast(grid)
            .map_err(|e| RunError::Config(e.to_string()))?;
        let (radius, qval) = match cfg.geometry.scatterer {
            crate::config::Scatterer::Disk { radius, q } => (radius, q),
            _ => unreachable!("validated"),
        };
        let t0 = Instant::now();
        let op = FrequencyOperator::new(&grid, &s, cfg.c0, q.clone())
            .map_err(|e| RunError::Config(e.to_string()))?;
        let c0 = cfg.c0;
        let ui = GridFunction::interp_project(grid, move |x| (-sv * x[0] / c0).exp());
        let rhs = op
            .rhs_from_incident(&ui)
            .map_err(|e| RunError::Config(e.to_string()))?;
        let (u, report) = solve_frequency(&op, &rhs, &cfg.solver.to_core())
            .map_err(|e| RunError::Config(e.to_string()))?;
        let wall = t0.elapsed().as_secs_f64();

        let disk = DiskConfig::new(radius, qval, cfg.c0, s, 40)
            .map_err(|e| RunError::Config(e.to_string()))?;
        let series = disk_series_coeffs(&disk).map_err(|e| RunError::Config(e.to_string()))?;
        let oracle = series
            .scattered_on_grid(&grid)
            .map_err(|e| RunError::Config(e.to_string()))?;
        let error = weighted_l2_norm(&u.sub(&oracle).unwrap(), &q).unwrap()
            / weighted_l2_norm(&oracle, &q).unwrap();

        let header = [
            "mode", "n", "m", "s_re", "s_im", "error", "iterations", "residual", "converged",
            "wall_s",
        ];
        let rows = vec![vec![
            self.mode.to_string(),
            n.to_string(),
            "0".into(),
            fnum(sv.re),
            fnum(sv.im),
            fnum(error),
            report.iterations.to_string(),
            fnum(report.final_residual),
            report.converged.to_string(),
            fnum(wall),
        ]];
        let record = RunRecord {
            label: format!("single-freq N={n}"),
            n,
            m: 0,
            dt: 0.0,
            lambda: 1.0,
            roundoff_amplification: 1.0,
            stability: StabilityLog {
                dt: 0.0,
                n,
                sup_delta: 0.0,
                floor: 0.0,
                dt_above_floor: true,
            },
            error: Some(error),
            solver: summarize(std::slice::from_ref(&report), wall),
            nodes: None,
        };
        let failure = if report.converged {
            None
        } else {
            Some(format!(
                "frequency solve did not converge (residual {:.3e})",
                report.final_residual
            ))
        };
        self.finish(rows, &header, vec![record], failure)
    }

    fn cq_objects(
        &self,
        n: usize,
        m: usize,
    ) -> Result<(TrigGrid, ContrastField, CqScheme, IncidentField), RunError> {
        let grid = self.cfg.grid(n).map_err(RunError::Config)?;
        let q = self
            .cfg
            .geometry
            .scatterer
            .contrast(grid)
            .map_err(|e| RunError::Config(e.to_string()))?;
        let scheme = self.cfg.build_scheme(m).map_err(RunError::Config)?;
        let incident = self
            .cfg
            .incident
            .as_ref()
            .expect("validated")
            .to_core(self.cfg.c0);
        Ok((grid, q, scheme, incident))
    }

    fn cq_run(&self) -> Result<(), RunError> {
        let n = self.cfg.geometry.n.expect("validated");
        let m = self.cfg.scheme.as_ref().unwrap().m.expect("validated");
        let (grid, q, scheme, incident) = self.cq_objects(n, m)?;
        let solver = self.cfg.solver.to_core();
        let t0 = Instant::now();
        let solved = run_cq_solve(&grid, &q, &scheme, &solver, &incident, self.worker_opt());
        let wall = t0.elapsed().as_secs_f64();
        let header = ["frame", "t", "max_abs", "weighted_l2", "file"];
        match solved {
            Ok(solution) => {
                let stride = self.cfg.cq_run.frame_stride;
                let frames_dir = self.out_dir.join("frames");
                if stride > 0 {
                    std::fs::create_dir_all(&frames_dir).map_err(io_err)?;
                }
                let mut rows = Vec::new();
                for (i, frame) in solution.frames().iter().enumerate() {
                    let t = i as f64 * scheme.dt();
                    let max_abs = frame.values().iter().map(|v| v.norm()).fold(0.0, f64::max);
                    let wnorm = weighted_l2_norm(frame, &q).unwrap();
                    let file = if stride > 0 && i % stride == 0 {
                        let p = frames_dir.join(format!("frame_{i:05}.csv"));
                        write_frame_csv(&p, &grid, frame).map_err(io_err)?;
                        format!("frames/frame_{i:05}.csv")
                    } else {
                        String::new()
                    };
                    rows.push(vec![
                        i.to_string(),
                        fnum(t),
                        fnum(max_abs),
                        fnum(wnorm),
                        file,
                    ]);
                }
                let nodes = frequency_nodes(&scheme).map_err(|e| RunError::Config(e.to_string()))?;
                let record = RunRecord {
                    label: format!("cq-run N={n} M={m}"),
                    n,
                    m,
                    dt: scheme.dt(),
                    lambda: scheme.lambda(),
                    roundoff_amplification: scheme.roundoff_amplification(),
                    stability: stability_log(&scheme, n),
                    error: None,
                    solver: summarize(&solution.reports, wall),
                    nodes: Some(node_reports(&nodes, &solution.reports)),
                };
                self.finish(rows, &header, vec![record], None)
            }
            Err(e @ Error::SolveFailed { .. }) => {
                self.finish(Vec::new(), &header, Vec::new(), Some(e.to_string()))
            }
            Err(e) => Err(RunError::Config(e.to_string())),
        }
    }

    /// Shared sweep driver: vary M at fixed N (`time_sweep`) or N at fixed M.
    /// The last list entry is the reference run; rows compare against it.
    fn sweep(&self, time_sweep: bool) -> Result<(), RunError> {
        let scheme_cfg = self.cfg.scheme.as_ref().expect("validated");
        let (fixed_n, fixed_m);
        let list: Vec<usize>;
        if time_sweep {
            fixed_n = self.cfg.geometry.n.expect("validated");
            fixed_m = 0;
            list = scheme_cfg.m_list.clone().expect("validated");
        } else {
            fixed_m = scheme_cfg.m.expect("validated");
            fixed_n = 0;
            list = self.cfg.geometry.n_list.clone().expect("validated");
        }
        let reference_coord = *list.last().unwrap();
        let header = [
            "mode",
            "n",
            "m",
            "dt",
            "error",
            "observed_order",
            "wall_s",
        ];
        let solver = self.cfg.solver.to_core();

        // reference run
        let (rn, rm) = if time_sweep {
            (fixed_n, reference_coord)
        } else {
            (reference_coord, fixed_m)
        };
        let (rgrid, rq, rscheme, incident) = self.cq_objects(rn, rm)?;
        let t0 = Instant::now();
        let reference =
            match run_cq_solve(&rgrid, &rq, &rscheme, &solver, &incident, self.worker_opt()) {
                Ok(sol) => sol,
                Err(e @ Error::SolveFailed { .. }) => {
                    return self.finish(
                        Vec::new(),
                        &header,
                        Vec::new(),
                        Some(format!("reference run: {e}")),
                    );
                }
                Err(e) => return Err(RunError::Config(e.to_string())),
            };
        let ref_wall = t0.elapsed().as_secs_f64();
        let mut runs = vec![RunRecord {
            label: format!("reference N={rn} M={rm}"),
            n: rn,
            m: rm,
            dt: rscheme.dt(),
            lambda: rscheme.lambda(),
            roundoff_amplification: rscheme.roundoff_amplification(),
            stability: stability_log(&rscheme, rn),
            error: None,
            solver: summarize(&reference.reports, ref_wall),
            nodes: None,
        }];

        let mut rows: Vec<Vec<String>> = Vec::new();
        let mut prev: Option<(usize, f64)> = None;
        for &coord in &list[..list.len() - 1] {
            let (n, m) = if time_sweep {
                (fixed_n, coord)
            } else {
                (coord, fixed_m)
            };
            let (grid, q, scheme, _) = self.cq_objects(n, m)?;
            let t0 = Instant::now();
            let run = match run_cq_solve(&grid, &q, &scheme, &solver, &incident, self.worker_opt())
            {
                Ok(sol) => sol,
                Err(e @ Error::SolveFailed { .. }) => {
                    return self.finish(rows, &header, runs, Some(format!("run {coord}: {e}")));
                }
                Err(e) => return Err(RunError::Config(e.to_string())),
            };
            let wall = t0.elapsed().as_secs_f64();
            let error = spacetime_error_vs_reference(&run, &reference, &rq)
                .map_err(|e| RunError::Config(e.to_string()))?;
            let order = prev.map(|(pc, pe)| {
                (pe / error).ln() / (coord as f64 / pc as f64).ln()
            });
            rows.push(vec![
                self.mode.to_string(),
                n.to_string(),
                m.to_string(),
                fnum(scheme.dt()),
                fnum(error),
                order.map(fnum).unwrap_or_default(),
                fnum(wall),
            ]);
            runs.push(RunRecord {
                label: format!("N={n} M={m}"),
                n,
                m,
                dt: scheme.dt(),
                lambda: scheme.lambda(),
                roundoff_amplification: scheme.roundoff_amplification(),
                stability: stability_log(&scheme, n),
                error: Some(error),
                solver: summarize(&run.reports, wall),
                nodes: None,
            });
            prev = Some((coord, error));
        }
        self.finish(rows, &header, runs, None)?;
        emit_plot_data(&self.out_dir.join("results.csv"), &self.out_dir)
            .map_err(RunError::Config)?;
        Ok(())
    }

    fn kernel_selftest(&self) -> Result<(), RunError> {
        let ks = &self.cfg.kernel_selftest;
        let rho = self.cfg.geometry.rho;
        let c0 = self.cfg.c0;
        let mut rng = ChaCha8Rng::seed_from_u64(self.cfg.seed);
        let header = [
            "mode", "d", "j1", "j2", "j3", "s_re", "s_im", "re_kappa", "im_kappa", "re_quad",
            "im_quad", "rel_err",
        ];
        let mut rows = Vec::new();
        let mut max_rel: f64 = 0.0;
        for k in 0..ks.samples {
            let d = if self.cfg.geometry.d == 3 && k % 2 == 1 {
                3
            } else {
                2
            };
            let sigma = rng.gen_range(0.5..5.0);
            let eta_max = (2500.0f64 - sigma * sigma).sqrt();
            let eta = rng.gen_range(-eta_max..eta_max);
            let s = ComplexFrequency::new(Complex64::new(sigma, eta))
                .expect("positive real part by construction");
            let mut j = [0i64; 3];
            for jk in j.iter_mut().take(d) {
                *jk = rng.gen_range(-16..=16);
            }
            let closed =
                kernel_coeff(d, j, &s, rho, c0).map_err(|e| RunError::Config(e.to_string()))?;
            let quad = kernel_coeff_quadrature_oracle(d, j, &s, rho, c0, ks.tol)
                .map_err(|e| RunError::Solver(e.to_string()))?;
            let rel = (closed - quad).norm() / quad.norm();
            max_rel = max_rel.max(rel);
            rows.push(vec![
                self.mode.to_string(),
                d.to_string(),
                j[0].to_string(),
                j[1].to_string(),
                j[2].to_string(),
                fnum(sigma),
                fnum(eta),
                fnum(closed.re),
                fnum(closed.im),
                fnum(quad.re),
                fnum(quad.im),
                fnum(rel),
            ]);
        }
        let record = RunRecord {
            label: format!("kernel-selftest samples={} max_rel={max_rel:.3e}", ks.samples),
            n: 0,
            m: 0,
            dt: 0.0,
            lambda: 1.0,
            roundoff_amplification: 1.0,
            stability: StabilityLog {
                dt: 0.0,
                n: 0,
                sup_delta: 0.0,
                floor: 0.0,
                dt_above_floor: true,
            },
            error: Some(max_rel),
            solver: summarize(&[], 0.0),
            nodes: None,
        };
        let failure = if max_rel <= 1e-8 {
            None
        } else {
            Some(format!(
                "closed form vs quadrature max relative error {max_rel:.3e} exceeds 1e-8"
            ))
        };
        self.finish(rows, &header, vec![record], failure)
    }
}

pub fn execute(mode: Mode, cfg: &ExperimentConfig, out_dir: &Path, workers: usize) -> Result<(), RunError> {
    Runner {
        mode,
        cfg,
        out_dir: out_dir.to_path_buf(),
        workers,
    }
    .run()
}
