//! Closed-loop trajectories and the infinite-horizon quadratic cost of a
//! state feedback `u = −K x`.

use alloc::vec::Vec;

use crate::cgcare::{derived_matrices, require_cgcare};
use crate::error::{input_err, Result};
use crate::geometry::reachable_subspace;
use crate::linalg::{eig, expm, solve_lyapunov, Matrix, SymEigen};
use crate::popov::PopovTriple;
use crate::Settings;

/// Samples of `x(t) = e^{A t} x0` on a uniform grid.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
}

pub fn simulate(a_cl: &Matrix, x0: &[f64], horizon: f64, steps: usize) -> Result<Trajectory> {
    if !a_cl.is_square() || a_cl.rows() != x0.len() {
        return Err(input_err!("simulate: A is {}x{}, x0 has {} entries", a_cl.rows(), a_cl.cols(), x0.len()));
    }
    if steps < 2 {
        return Err(input_err!("simulate needs at least 2 time steps"));
    }
    if !(horizon.is_finite() && horizon >= 0.0) {
        return Err(input_err!("horizon must be finite and nonnegative"));
    }
    let mut times = Vec::with_capacity(steps);
    let mut states = Vec::with_capacity(steps);
    for i in 0..steps {
        let t = horizon * i as f64 / (steps - 1) as f64;
        times.push(t);
        states.push(if i == 0 {
            x0.to_vec()
        } else {
            expm(&a_cl.scale(t))?.mul_vec(x0)
        });
    }
    Ok(Trajectory { times, states })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CostMethod {
    Lyapunov,
    Quadrature,
    /// The integrand does not decay; the cost is infinite.
    Divergent,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CostEstimate {
    /// `f64::INFINITY` when divergent.
    pub value: f64,
    pub method: CostMethod,
    /// Bound on the neglected tail of the integral; zero for the Lyapunov method.
    pub tail_bound: f64,
}

impl CostEstimate {
    pub fn is_finite(&self) -> bool {
        self.method != CostMethod::Divergent
    }

    fn divergent() -> Self {
        CostEstimate {
            value: f64::INFINITY,
            method: CostMethod::Divergent,
            tail_bound: f64::INFINITY,
        }
    }
}

/// `A − B K` and `Q − S K − Kᵀ Sᵀ + Kᵀ R K`.
pub fn closed_loop(sigma: &PopovTriple, k: &Matrix) -> Result<(Matrix, Matrix)> {
    if k.shape() != (sigma.m(), sigma.n()) {
        return Err(input_err!("gain must be {}x{}, got {}x{}", sigma.m(), sigma.n(), k.rows(), k.cols()));
    }
    let sk = sigma.s() * k;
    let a_cl = sigma.a() - &(sigma.b() * k);
    let q_cl = &(&(sigma.q() - &sk) - &sk.transpose()) + &(&(&k.transpose() * sigma.r()) * k);
    Ok((a_cl, q_cl.symmetric_part()))
}

fn hurwitz_margin(a: &Matrix, tol: f64) -> f64 {
    1e3 * tol * (1.0 + a.norm())
}

/// `∫₀^∞ x(t)ᵀ Π [x; u] dt` along `u = −K x`.
pub fn cost(sigma: &PopovTriple, k: &Matrix, x0: &[f64], tol: f64) -> Result<CostEstimate> {
    if x0.len() != sigma.n() {
        return Err(input_err!("x0 has {} entries, expected {}", x0.len(), sigma.n()));
    }
    let (a_cl, q_cl) = closed_loop(sigma, k)?;
    if eig(&a_cl)?.max_real() < -hurwitz_margin(&a_cl, tol) {
        return Ok(lyapunov_cost(&a_cl, &q_cl, x0)?);
    }
    // drop the unobservable part of (A_cl, Q_cl); it never enters the integrand
    let obs = reachable_subspace(&a_cl.transpose(), &q_cl, tol)?;
    let w = obs.basis();
    let a_o = &(&w.transpose() * &a_cl) * w;
    let q_o = &(&w.transpose() * &q_cl) * w;
    let z0 = w.transpose().mul_vec(x0);
    if z0.iter().all(|&v| v == 0.0) || obs.is_zero() {
        return Ok(CostEstimate {
            value: 0.0,
            method: CostMethod::Quadrature,
            tail_bound: 0.0,
        });
    }
    quadrature_cost(&a_o, &q_o, &z0)
}

/// `x0ᵀ P x0` with `A_clᵀ P + P A_cl + Q_cl = 0`; needs `A_cl` Hurwitz.
pub fn lyapunov_cost(a_cl: &Matrix, q_cl: &Matrix, x0: &[f64]) -> Result<CostEstimate> {
    let p = solve_lyapunov(a_cl, q_cl)?.symmetric_part();
    Ok(CostEstimate {
        value: p.quad_form(x0),
        method: CostMethod::Lyapunov,
        tail_bound: 0.0,
    })
}

const GL_NODES: [f64; 8] = [
    -0.960_289_856_497_536_3,
    -0.796_666_477_413_626_7,
    -0.525_532_409_916_329,
    -0.183_434_642_495_649_8,
    0.183_434_642_495_649_8,
    0.525_532_409_916_329,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_3,
];
const GL_WEIGHTS: [f64; 8] = [
    0.101_228_536_290_376_3,
    0.222_381_034_453_374_5,
    0.313_706_645_877_887_3,
    0.362_683_783_378_362,
    0.362_683_783_378_362,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_5,
    0.101_228_536_290_376_3,
];

/// Number of horizon doublings before the cost is declared infinite.
pub const MAX_DOUBLINGS: usize = 20;
const MAX_SUBINTERVALS: usize = 4096;

/// Composite Gauss–Legendre on panels `[0, T0], [T0, 2T0], [2T0, 4T0], …`,
/// stopped once a panel adds less than `1e-10` of the running total.
pub fn quadrature_cost(a: &Matrix, q: &Matrix, x0: &[f64]) -> Result<CostEstimate> {
    let anorm = a.norm();
    let t0 = 1.0 / (1.0 + anorm);
    let mut x = x0.to_vec();
    let mut total = 0.0;
    let mut prev: Option<f64> = None;
    let mut start = 0.0;
    let mut len = t0;
    for _ in 0..=MAX_DOUBLINGS {
        let (panel, x_end) = panel_integral(a, q, &x, len, anorm)?;
        if !panel.is_finite() || !x_end.iter().all(|v| v.is_finite()) {
            return Ok(CostEstimate::divergent());
        }
        total += panel;
        x = x_end;
        start += len;
        let ratio = prev.map(|p| if p > 0.0 { panel / p } else { 0.0 });
        prev = Some(panel);
        if let Some(rho) = ratio {
            if rho < 1.0 && panel <= 1e-10 * total.max(f64::MIN_POSITIVE) {
                return Ok(CostEstimate {
                    value: total,
                    method: CostMethod::Quadrature,
                    tail_bound: panel * rho / (1.0 - rho),
                });
            }
            if total == 0.0 && panel == 0.0 {
                return Ok(CostEstimate {
                    value: 0.0,
                    method: CostMethod::Quadrature,
                    tail_bound: 0.0,
                });
            }
        }
        len = start;
    }
    Ok(CostEstimate::divergent())
}

fn panel_integral(a: &Matrix, q: &Matrix, x0: &[f64], len: f64, anorm: f64) -> Result<(f64, Vec<f64>)> {
    let pieces = ((2.0 * anorm * len) as usize).clamp(32, MAX_SUBINTERVALS);
    let h = len / pieces as f64;
    let step = expm(&a.scale(h))?;
    let offsets: Vec<Matrix> = GL_NODES
        .iter()
        .map(|xi| expm(&a.scale(0.5 * h * (1.0 + xi))))
        .collect::<Result<_>>()?;
    let mut x = x0.to_vec();
    let mut sum = 0.0;
    for _ in 0..pieces {
        let mut piece = 0.0;
        for (e, w) in offsets.iter().zip(GL_WEIGHTS) {
            piece += w * q.quad_form(&e.mul_vec(&x));
        }
        sum += 0.5 * h * piece;
        x = step.mul_vec(&x);
    }
    Ok((sum, x))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OptimalCostReport {
    pub cost: CostEstimate,
    /// `x0ᵀ X x0`
    pub value_function: f64,
    /// `|J − x0ᵀ X x0| / (1 + |J|)`, infinite when the cost diverges.
    pub gap: f64,
    pub x_is_psd: bool,
    /// The closed-loop cost under `−K_X` equals `x0ᵀ X x0` within `1e-6`.
    pub certified: bool,
}

/// Compares the cost of `u = −K_X x` with the candidate value `x0ᵀ X x0`.
pub fn optimal_cost_check(sigma: &PopovTriple, x: &Matrix, x0: &[f64], settings: Settings) -> Result<OptimalCostReport> {
    require_cgcare(sigma, x, settings.tol)?;
    let dm = derived_matrices(sigma, x, settings.tol)?;
    let cost = cost(sigma, &dm.k_x, x0, settings.tol)?;
    let value_function = x.quad_form(x0);
    let gap = if cost.is_finite() {
        (cost.value - value_function).abs() / (1.0 + cost.value.abs())
    } else {
        f64::INFINITY
    };
    let x_is_psd = x.rows() == 0 || {
        let e = SymEigen::new(x)?;
        e.values[0] >= -settings.tol * (1.0 + e.max_abs())
    };
    Ok(OptimalCostReport {
        cost,
        value_function,
        gap,
        x_is_psd,
        certified: gap <= 1e-6,
    })
}
