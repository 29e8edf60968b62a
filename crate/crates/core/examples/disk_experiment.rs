//! Small end-to-end demo: scatter the modulated Gaussian pulse off the
//! penetrable disk, then report frame energies and a time-refinement error.
//!
//!     cargo run --release --example disk_experiment

use tdls_core::*;

fn main() -> Result<()> {
    let grid = TrigGrid::new(2, 32, 0.275)?;
    let q = ContrastField::disk(grid, 0.275, -0.5)?;
    let incident = IncidentField {
        a: 4.0,
        b: 1.4,
        c0: 1.0,
        t0: IncidentField::EXPERIMENT_DELAY,
    };
    let solver = SolverConfig {
        tol: 1e-12,
        ..Default::default()
    };

    let run = |m: usize| -> Result<TimeDomainSolution> {
        let scheme = CqScheme::new(MultistepMethod::Bdf2, m, 4.0, None)?;
        run_cq_solve(&grid, &q, &scheme, &solver, &incident, None)
    };

    let coarse = run(100)?;
    let fine = run(200)?;

    println!("t        |u|_max     |u|_L2(q)");
    for (i, frame) in coarse.frames().iter().enumerate().step_by(10) {
        let t = i as f64 * coarse.scheme.dt();
        let peak = frame.values().iter().map(|v| v.norm()).fold(0.0, f64::max);
        let w = weighted_l2_norm(frame, &q)?;
        println!("{t:5.2}    {peak:.3e}   {w:.3e}");
    }
    let err = spacetime_error_vs_reference(&coarse, &fine, &q)?;
    println!("\nspace-time difference M=100 vs M=200: {err:.3e}");
    println!("peak |Im u| (realness check): {:.3e}", coarse.max_imag_residual());
    Ok(())
}
