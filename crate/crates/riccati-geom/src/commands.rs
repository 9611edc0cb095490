//! The analyses behind each subcommand. Every function is deterministic in
//! its inputs and returns a [`Report`]; printing is left to the caller.

use riccati_geom_core::cgcare::{derived_matrices, solve_reduced, verify_cgcare, Status};
use riccati_geom_core::geometry::{check_kernel_output_nulling, kernel_of_solution, r0x, reachability_on};
use riccati_geom_core::hamiltonian::{invariant_zeros, pencil_decompose, rank_scan};
use riccati_geom_core::linalg::{eig, rank};
use riccati_geom_core::popov::check_popov;
use riccati_geom_core::sim::{cost, optimal_cost_check, simulate, CostMethod};
use riccati_geom_core::stabilize::{default_targets, stabilizing_gain, verify_stabilization, PLACEMENT_TOL};
use riccati_geom_core::{Check, Complex64, Error, Matrix, Settings, Spectrum, Subspace, DEFAULT_TOL};

use crate::problem::{Problem, ProblemError};
use crate::report::{
    basis, rows, spectrum, CandidateRecord, CheckRecord, CheckResults, Checks, Provenance, RankRow, Report,
    Results, Run, SimulateResults, SolveResults, StabilizeResults, VerifyResults, ZerosResults,
};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
pub const TOL_ENV: &str = "RICCATI_GEOM_TOL";

/// Command-line choices shared by the subcommands.
#[derive(Clone, Debug, Default)]
pub struct Options {
    pub tol: Option<f64>,
    /// Value of the tolerance environment variable, if set.
    pub env_tol: Option<f64>,
    pub seed: Option<u64>,
    pub candidate: Option<String>,
    pub targets: Option<Spectrum>,
    pub horizon: Option<f64>,
    pub steps: Option<usize>,
    pub x0: Option<Vec<f64>>,
    pub with_l: bool,
}

pub const DEFAULT_HORIZON: f64 = 5.0;
pub const DEFAULT_STEPS: usize = 51;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("{0}")]
    Numerical(#[from] Error),
}

impl CliError {
    /// 1 when a mathematical precondition fails, 2 for bad input, 3 when a
    /// numerical routine gives up.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Problem(_) | CliError::Argument(_) => 2,
            CliError::Numerical(Error::Input(_)) => 2,
            CliError::Numerical(Error::Domain(_) | Error::NoSolution(_)) => 1,
            CliError::Numerical(_) => 3,
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

/// Flag, then problem file, then environment, then the built-in default.
pub fn settings(problem: &Problem, opts: &Options) -> Settings {
    let mut s = Settings::default();
    s.tol = opts.tol.or(problem.tol).or(opts.env_tol).unwrap_or(DEFAULT_TOL);
    if let Some(seed) = opts.seed.or(problem.seed) {
        s.seed = seed;
    }
    s
}

fn provenance(s: Settings) -> Provenance {
    Provenance {
        tol: s.tol,
        seed: s.seed,
        version: VERSION.to_string(),
    }
}

/// `max` of the two one-sided residuals; infinite when dimensions differ.
fn subspace_gap(u: &Subspace, v: &Subspace) -> f64 {
    if u.dim() != v.dim() {
        return f64::INFINITY;
    }
    u.residual(v.basis()).max(v.residual(u.basis()))
}

fn status_name(s: Status) -> &'static str {
    match s {
        Status::Cgcare => "cgcare",
        Status::GcareOnly => "gcare_only",
        Status::Failed => "failed",
        Status::Unchecked => "unchecked",
    }
}

pub fn cmd_check(problem: &Problem, opts: &Options) -> Result<Report> {
    let st = settings(problem, opts);
    let sigma = &problem.sigma;
    let rep = check_popov(sigma, st.tol)?;
    let mut out = Vec::new();
    let mut c = Checks {
        subject: "problem",
        out: &mut out,
    };
    c.push("Pi psd", rep.psd);
    c.push("ker R in ker S", rep.ker_r_in_ker_s);
    c.push("Q - S R+ S' psd", rep.schur_primal_psd);
    c.push("ker Q in ker S'", rep.ker_q_in_ker_st);
    c.push("R - S' Q+ S psd", rep.schur_dual_psd);
    c.push("pseudo-inverse identities", rep.identities);
    let results = Results::Check(CheckResults {
        n: sigma.n(),
        m: sigma.m(),
        rank_r: rank(sigma.r(), st.tol)?,
        rank_pi: rank(&sigma.pi(), st.tol)?,
    });
    Ok(Report::new("check", &problem.name, provenance(st), out, results))
}

pub fn cmd_verify(problem: &Problem, opts: &Options) -> Result<Report> {
    let st = settings(problem, opts);
    let tol = st.tol;
    let sigma = &problem.sigma;
    let selected: Vec<_> = match &opts.candidate {
        Some(l) => vec![problem.candidate(l)?],
        None => problem.candidates.iter().collect(),
    };
    if selected.is_empty() {
        return Err(CliError::Argument("the problem file has no candidates to verify".into()));
    }
    let mut out = Vec::new();
    let mut records = Vec::new();
    // (label, R0 basis, A_X) of every CGCARE candidate
    let mut shared: Vec<(String, Subspace, Matrix)> = Vec::new();
    for cand in selected {
        let x = &cand.x;
        let sol = verify_cgcare(sigma, x, tol)?;
        let dm = derived_matrices(sigma, x, tol)?;
        let thr = tol * sol.scale;
        let mut c = Checks {
            subject: &cand.label,
            out: &mut out,
        };
        c.push("gcare residual", Check::at_most(sol.residual_norm, thr));
        c.push("kernel constraint", Check::at_most(sol.constraint_defect, thr));
        let (kernel, _) = kernel_of_solution(x, tol)?;
        if sol.solves_gcare() {
            let k = check_kernel_output_nulling(sigma, x, tol)?;
            let defect = k.invariance_defect.max(k.output_defect);
            c.push("ker X output-nulling", Check::flag(k.is_output_nulling, defect, k.threshold));
            c.push("-K_X is a friend of ker X", Check::flag(k.friend_is_minus_kx, defect, k.threshold));
        }
        let mut r0_basis = None;
        if sol.is_cgcare() {
            let r0 = r0x(sigma, x, tol)?;
            let p = r0.basis();
            c.push("C_X R0 = 0", Check::at_most((&dm.c_x * p).norm(), thr));
            c.push("X R0 = 0", Check::at_most((x * p).norm(), thr));
            let rstar = reachability_on(sigma.a(), sigma.b(), &dm.factor.c, &dm.factor.d, &kernel, tol)?;
            let gap = subspace_gap(&rstar, &r0);
            c.push("R* on ker X = R0", Check::at_most(gap, subspace_threshold(tol, sigma.n())));
            r0_basis = Some(basis(&r0));
            shared.push((cand.label.clone(), r0, dm.a_x.clone()));
        }
        records.push(CandidateRecord {
            label: cand.label.clone(),
            status: status_name(sol.status).to_string(),
            residual_norm: sol.residual_norm,
            constraint_defect: sol.constraint_defect,
            scale: sol.scale,
            k_x: rows(&dm.k_x),
            a_x: rows(&dm.a_x),
            spectrum_a_x: spectrum(&eig(&dm.a_x)?),
            kernel_dim: kernel.dim(),
            r0_basis,
        });
    }
    if let Some((first, rest)) = shared.split_first() {
        for (label, r0, a_x) in rest {
            let subject = format!("{} vs {}", first.0, label);
            let mut c = Checks {
                subject: &subject,
                out: &mut out,
            };
            let gap = subspace_gap(&first.1, r0);
            c.push("R0 shared", Check::at_most(gap, subspace_threshold(tol, sigma.n())));
            if gap.is_finite() {
                let p = first.1.basis();
                let diff = (&first.2 * p).max_diff(&(a_x * p));
                let thr = tol * (1.0 + first.2.norm() + a_x.norm());
                c.push("A_X agrees on R0", Check::at_most(diff, thr));
            }
        }
    }
    let results = Results::Verify(VerifyResults { candidates: records });
    Ok(Report::new("verify", &problem.name, provenance(st), out, results))
}

/// Subspaces computed at tolerance `tol` agree to about this much.
fn subspace_threshold(tol: f64, n: usize) -> f64 {
    10.0 * tol * n as f64
}

/// Points of the rank table: the zeros and `±σ(A_X)`, without repeats.
fn scan_points(zeros: &Spectrum, a_x: &Matrix) -> Result<Vec<Complex64>> {
    let ev = eig(a_x)?;
    let all = zeros.union(&ev.mirrored());
    let mut pts: Vec<Complex64> = Vec::new();
    for z in all.iter() {
        if !pts.iter().any(|p| (p - z).norm() <= 1e-9 * (1.0 + z.norm())) {
            pts.push(*z);
        }
    }
    Ok(pts)
}

pub fn cmd_zeros(problem: &Problem, opts: &Options) -> Result<Report> {
    let st = settings(problem, opts);
    let tol = st.tol;
    let sigma = &problem.sigma;
    let cand = problem.pick(opts.candidate.as_deref())?;
    let dec = pencil_decompose(sigma, &cand.x, tol)?;
    let zeros = invariant_zeros(sigma, &cand.x, st)?;
    let dm = derived_matrices(sigma, &cand.x, tol)?;
    let points = scan_points(&zeros, &dm.a_x)?;
    let scan = rank_scan(sigma, &cand.x, &points, tol)?;
    let nr = dec.normal_rank;
    let n = sigma.n();

    let mut out = Vec::new();
    let mut c = Checks {
        subject: &cand.label,
        out: &mut out,
    };
    let expected = 2 * n + dec.m1;
    c.push(
        "normal rank = 2n + m1",
        Check::flag(nr == expected, nr.abs_diff(expected) as f64, 0.0),
    );
    c.push(
        "infinite multiplicity = m1",
        Check::flag(dec.infinite_multiplicity == dec.m1, dec.infinite_multiplicity.abs_diff(dec.m1) as f64, 0.0),
    );
    let mut table = Vec::new();
    for sample in &scan {
        let is_zero = zeros.iter().any(|z| (z - sample.s).norm() <= 1e-9 * (1.0 + z.norm()));
        let ok = if is_zero { sample.rank < nr } else { sample.rank == nr };
        let name = format!(
            "rank {} at {}",
            if is_zero { "drops" } else { "full" },
            crate::number::ComplexDisplay(sample.s)
        );
        c.push(&name, Check::flag(ok, sample.rank as f64, nr as f64));
        table.push(RankRow {
            s: sample.s.into(),
            rank: sample.rank,
            is_zero,
        });
    }
    let results = Results::Zeros(ZerosResults {
        candidate: cand.label.clone(),
        zeros: spectrum(&zeros),
        normal_rank: nr,
        r0_dim: dec.r,
        m1: dec.m1,
        infinite_multiplicity: dec.infinite_multiplicity,
        gamma: rows(&dec.gamma),
        rank_table: table,
    });
    Ok(Report::new("zeros", &problem.name, provenance(st), out, results))
}

fn targets<'a>(problem: &'a Problem, opts: &'a Options) -> Option<&'a Spectrum> {
    opts.targets.as_ref().or(problem.targets.as_ref())
}

pub fn cmd_stabilize(problem: &Problem, opts: &Options) -> Result<Report> {
    let st = settings(problem, opts);
    let sigma = &problem.sigma;
    let cand = problem.pick(opts.candidate.as_deref())?;
    let wanted = targets(problem, opts);
    let res = stabilizing_gain(sigma, &cand.x, wanted, st)?;
    let rep = verify_stabilization(sigma, &cand.x, &res, st)?;
    let dm = derived_matrices(sigma, &cand.x, st.tol)?;
    let closed = eig(&(&dm.a_x + &(sigma.b() * &res.l)))?;
    let used = wanted.cloned().unwrap_or_else(|| default_targets(res.r0.dim()));

    let mut out = Vec::new();
    let mut c = Checks {
        subject: &cand.label,
        out: &mut out,
    };
    let dist = used.distance(&res.assigned).unwrap_or(f64::INFINITY);
    c.push("assigned spectrum", Check::at_most(dist, PLACEMENT_TOL));
    c.push("R0 invariant under A_X + B L", rep.invariance);
    c.push("C_X R0 = 0", rep.output_nulling);
    c.push("quotient spectrum unchanged", rep.quotient_spectrum);
    c.push("Xi/Omega equation", rep.equation);
    if let Some(cost) = rep.cost {
        c.push("cost unchanged", cost);
    }
    let results = Results::Stabilize(StabilizeResults {
        candidate: cand.label.clone(),
        targets: spectrum(&used),
        r0_basis: basis(&res.r0),
        xi_hat: rows(&res.xi_hat),
        omega_hat: rows(&res.omega_hat),
        h1: rows(&res.h1),
        h2: rows(&res.h2),
        k: rows(&res.k),
        xi: rows(&res.xi),
        omega: rows(&res.omega),
        l: rows(&res.l),
        assigned: spectrum(&res.assigned),
        untouched: spectrum(&res.untouched),
        closed_loop: spectrum(&closed),
        hurwitz: res.hurwitz,
    });
    Ok(Report::new("stabilize", &problem.name, provenance(st), out, results))
}

fn method_name(m: CostMethod) -> &'static str {
    match m {
        CostMethod::Lyapunov => "lyapunov",
        CostMethod::Quadrature => "quadrature",
        CostMethod::Divergent => "divergent",
    }
}

pub fn cmd_simulate(problem: &Problem, opts: &Options) -> Result<Report> {
    let st = settings(problem, opts);
    let tol = st.tol;
    let sigma = &problem.sigma;
    let cand = problem.pick(opts.candidate.as_deref())?;
    let x0s: Vec<Vec<f64>> = match &opts.x0 {
        Some(v) => vec![v.clone()],
        None => problem.x0.clone(),
    };
    if x0s.is_empty() {
        return Err(CliError::Argument("no initial state: pass --x0 or add x0 to the problem file".into()));
    }
    if let Some(bad) = x0s.iter().find(|v| v.len() != sigma.n()) {
        return Err(CliError::Argument(format!("x0 has {} entries, expected {}", bad.len(), sigma.n())));
    }
    let horizon = opts.horizon.unwrap_or(DEFAULT_HORIZON);
    let steps = opts.steps.unwrap_or(DEFAULT_STEPS);
    let dm = derived_matrices(sigma, &cand.x, tol)?;
    let gain = if opts.with_l {
        let res = stabilizing_gain(sigma, &cand.x, targets(problem, opts), st)?;
        &dm.k_x - &res.l
    } else {
        dm.k_x.clone()
    };
    let a_cl = sigma.a() - &(sigma.b() * &gain);

    let mut out = Vec::new();
    let mut runs = Vec::new();
    for (k, x0) in x0s.iter().enumerate() {
        let traj = simulate(&a_cl, x0, horizon, steps)?;
        let j = cost(sigma, &gain, x0, tol)?;
        let opt = optimal_cost_check(sigma, &cand.x, x0, st)?;
        let subject = format!("{} x0[{}]", cand.label, k);
        let mut c = Checks {
            subject: &subject,
            out: &mut out,
        };
        if opt.x_is_psd {
            c.push("cost under -K_X = x0' X x0", Check::at_most(opt.gap, 1e-6));
        }
        if opts.with_l {
            let rel = if j.is_finite() && opt.cost.is_finite() {
                (j.value - opt.cost.value).abs() / (1.0 + opt.cost.value.abs())
            } else {
                f64::INFINITY
            };
            c.push("cost unchanged by L", Check::at_most(rel, 1e-6));
        }
        runs.push(Run {
            x0: x0.clone(),
            times: traj.times,
            states: traj.states,
            cost: j.value,
            cost_method: method_name(j.method).to_string(),
            tail_bound: j.tail_bound,
            value_function: opt.value_function,
            x_is_psd: opt.x_is_psd,
            certified: opt.certified,
        });
    }
    let results = Results::Simulate(SimulateResults {
        candidate: cand.label.clone(),
        with_l: opts.with_l,
        gain: rows(&gain),
        horizon,
        steps,
        runs,
    });
    Ok(Report::new("simulate", &problem.name, provenance(st), out, results))
}

/// Computes a CGCARE solution with the reduced solver; `targets` selects the
/// spectrum of the quotient map.
pub fn cmd_solve(problem: &Problem, opts: &Options) -> Result<Report> {
    let st = settings(problem, opts);
    let sigma = &problem.sigma;
    let sol = solve_reduced(sigma, targets(problem, opts), st)?;
    let dec = pencil_decompose(sigma, &sol.x, st.tol)?;
    let thr = st.tol * sol.scale;
    let mut out: Vec<CheckRecord> = Vec::new();
    let mut c = Checks {
        subject: "solution",
        out: &mut out,
    };
    c.push("gcare residual", Check::at_most(sol.residual_norm, thr));
    c.push("kernel constraint", Check::at_most(sol.constraint_defect, thr));
    let results = Results::Solve(SolveResults {
        x: rows(&sol.x),
        gamma_spectrum: spectrum(&eig(&dec.gamma)?),
        residual_norm: sol.residual_norm,
        constraint_defect: sol.constraint_defect,
    });
    Ok(Report::new("solve", &problem.name, provenance(st), out, results))
}
