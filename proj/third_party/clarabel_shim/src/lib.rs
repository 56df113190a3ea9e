//! C ABI over the Clarabel interior-point solver, limited to the conic
//! programs produced by the risnoma conic backend: linear objective,
//! zero / nonnegative / second-order / PSD-triangle cones.

use std::os::raw::c_int;
use std::slice;

use clarabel::algebra::CscMatrix;
use clarabel::solver::{
    DefaultSettingsBuilder, DefaultSolver, IPSolver, SolverStatus, SupportedConeT,
};

pub const CONE_ZERO: c_int = 0;
pub const CONE_NONNEG: c_int = 1;
pub const CONE_SOC: c_int = 2;
pub const CONE_PSD_TRIANGLE: c_int = 3;

#[repr(C)]
pub struct ShimSettings {
    pub tol_gap_abs: f64,
    pub tol_gap_rel: f64,
    pub tol_feas: f64,
    pub max_iter: u32,
    pub verbose: c_int,
}

#[repr(C)]
pub struct ShimResult {
    pub status: c_int,
    pub objective: f64,
    pub iterations: u32,
    pub primal_residual: f64,
    pub dual_residual: f64,
}

// Status codes mirror the order of clarabel::solver::SolverStatus.
fn status_code(s: SolverStatus) -> c_int {
    match s {
        SolverStatus::Unsolved => 0,
        SolverStatus::Solved => 1,
        SolverStatus::PrimalInfeasible => 2,
        SolverStatus::DualInfeasible => 3,
        SolverStatus::AlmostSolved => 4,
        SolverStatus::AlmostPrimalInfeasible => 5,
        SolverStatus::AlmostDualInfeasible => 6,
        SolverStatus::MaxIterations => 7,
        SolverStatus::MaxTime => 8,
        SolverStatus::NumericalError => 9,
        SolverStatus::InsufficientProgress => 10,
        SolverStatus::CallbackTerminated => 11,
    }
}

/// Minimises q'x subject to A x + s = b, s in the cone product.
///
/// A is given in compressed sparse column form (m rows, n columns).
/// Returns 0 on success (result filled), negative on setup failure.
///
/// # Safety
/// All pointers must reference arrays of the documented lengths; x_out has
/// length n and z_out length m.
#[no_mangle]
pub unsafe extern "C" fn risnoma_clarabel_solve(
    n: usize,
    m: usize,
    q: *const f64,
    a_colptr: *const usize,
    a_rowval: *const usize,
    a_nzval: *const f64,
    b: *const f64,
    n_cones: usize,
    cone_types: *const c_int,
    cone_dims: *const usize,
    settings: *const ShimSettings,
    x_out: *mut f64,
    z_out: *mut f64,
    result: *mut ShimResult,
) -> c_int {
    let q = slice::from_raw_parts(q, n).to_vec();
    let colptr = slice::from_raw_parts(a_colptr, n + 1).to_vec();
    let nnz = colptr[n];
    let rowval = slice::from_raw_parts(a_rowval, nnz).to_vec();
    let nzval = slice::from_raw_parts(a_nzval, nnz).to_vec();
    let b = slice::from_raw_parts(b, m).to_vec();
    let types = slice::from_raw_parts(cone_types, n_cones);
    let dims = slice::from_raw_parts(cone_dims, n_cones);
    let cfg = &*settings;

    let mut cones = Vec::with_capacity(n_cones);
    for (t, d) in types.iter().zip(dims.iter()) {
        let cone = match *t {
            CONE_ZERO => SupportedConeT::ZeroConeT(*d),
            CONE_NONNEG => SupportedConeT::NonnegativeConeT(*d),
            CONE_SOC => SupportedConeT::SecondOrderConeT(*d),
            CONE_PSD_TRIANGLE => SupportedConeT::PSDTriangleConeT(*d),
            _ => return -1,
        };
        cones.push(cone);
    }

    let a = CscMatrix::new(m, n, colptr, rowval, nzval);
    let p = CscMatrix::<f64>::zeros((n, n));

    let built = DefaultSettingsBuilder::default()
        .verbose(cfg.verbose != 0)
        .tol_gap_abs(cfg.tol_gap_abs)
        .tol_gap_rel(cfg.tol_gap_rel)
        .tol_feas(cfg.tol_feas)
        .max_iter(cfg.max_iter)
        .presolve_enable(false)
        .chordal_decomposition_enable(false)
        .max_threads(1)
        .build();
    let built = match built {
        Ok(s) => s,
        Err(_) => return -2,
    };

    let mut solver = match DefaultSolver::new(&p, &q, &a, &b, &cones, built) {
        Ok(s) => s,
        Err(_) => return -3,
    };
    solver.solve();

    let sol = &solver.solution;
    slice::from_raw_parts_mut(x_out, n).copy_from_slice(&sol.x);
    slice::from_raw_parts_mut(z_out, m).copy_from_slice(&sol.z);
    let out = &mut *result;
    out.status = status_code(sol.status);
    out.objective = sol.obj_val;
    out.iterations = sol.iterations;
    out.primal_residual = sol.r_prim;
    out.dual_residual = sol.r_dual;
    0
}
