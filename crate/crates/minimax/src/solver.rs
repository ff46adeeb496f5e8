//! Outer descent loop: snapshot, QP direction, normalization, Armijo
//! backtracking, update. Produces a full per-iteration trace.

use std::io::{self, Write};

use crate::error::{MinimaxError, Result};
use crate::linalg::{add_scaled, norm2};
use crate::objective::{
    active_set, default_active_tol, directional_derivative, phi, snapshot, ActiveSet,
    EvalSnapshot, ObjectiveFamily,
};
use crate::scalar::Scalar;
use crate::simplex_qp::{solve_simplex_qp_warm, QpSolution};

#[derive(Debug, Clone)]
pub struct SolverConfig<T> {
    /// Stationarity threshold on `||p_k||`.
    pub epsilon: T,
    /// QP gap tolerance.
    pub delta: T,
    /// Armijo parameter, in (0,1).
    pub c: T,
    /// Backtracking ratio, in (0,1).
    pub sigma: T,
    /// Max backtracking steps per outer iteration.
    pub j_max: usize,
    /// Max outer iterations.
    pub k_max: usize,
    /// Active-set tolerance; `None` uses `1e-9 * max(1, |Φ|)`.
    pub active_tol: Option<T>,
    /// Initial point; `None` is the zero vector.
    pub x0: Option<Vec<T>>,
}

impl<T: Scalar> Default for SolverConfig<T> {
    fn default() -> Self {
        Self {
            epsilon: T::c(1e-8),
            delta: T::c(1e-7),
            c: T::c(0.5),
            sigma: T::c(0.5),
            j_max: 60,
            k_max: 10_000,
            active_tol: None,
            x0: None,
        }
    }
}

impl<T: Scalar> SolverConfig<T> {
    /// Checks the parameter ranges; returns the offending field name.
    pub fn validate(&self) -> std::result::Result<(), String> {
        let zero = T::zero();
        let one = T::one();
        if !(self.c > zero && self.c < one) {
            return Err(format!("c must be in (0, 1), got {}", self.c));
        }
        if !(self.sigma > zero && self.sigma < one) {
            return Err(format!("sigma must be in (0, 1), got {}", self.sigma));
        }
        if !(self.epsilon > zero) {
            return Err(format!("epsilon must be positive, got {}", self.epsilon));
        }
        if !(self.delta > zero) {
            return Err(format!("delta must be positive, got {}", self.delta));
        }
        if self.j_max < 1 {
            return Err("j_max must be at least 1".to_string());
        }
        if self.k_max < 1 {
            return Err("k_max must be at least 1".to_string());
        }
        if let Some(tol) = self.active_tol {
            if !(tol >= zero) {
                return Err(format!("active_tol must be non-negative, got {tol}"));
            }
        }
        Ok(())
    }

    fn active_tol_at(&self, phi: T) -> T {
        self.active_tol.unwrap_or_else(|| default_active_tol(phi))
    }
}

/// One row of the diagnostic trace.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord<T> {
    pub k: usize,
    pub phi: T,
    pub p_norm: T,
    pub qp_gap: T,
    pub alpha: T,
    pub ls_steps: usize,
    pub dir_deriv: T,
    pub active_count: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Converged,
    MaxIterations,
    LineSearchStalled,
    QpFailure,
}

impl SolveStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            SolveStatus::Converged => "Converged",
            SolveStatus::MaxIterations => "MaxIterations",
            SolveStatus::LineSearchStalled => "LineSearchStalled",
            SolveStatus::QpFailure => "QpFailure",
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolveResult<T> {
    pub x_final: Vec<T>,
    pub status: SolveStatus,
    pub trace: Vec<TraceRecord<T>>,
    /// `||p||` at the final iterate.
    pub stationarity: T,
}

/// Direction computation: QP solve, then `d = p/||p||` when `||p||` exceeds
/// the threshold, else `d = 0`.
pub fn direction<T: Scalar>(
    snap: &EvalSnapshot<T>,
    delta: T,
    epsilon: T,
    warm_start: Option<&[T]>,
) -> Result<(QpSolution<T>, Vec<T>)> {
    let qp = solve_simplex_qp_warm(&snap.g, &snap.f, delta, warm_start)?;
    let p_norm = norm2(&qp.p);
    let d = if p_norm > epsilon {
        qp.p.iter().map(|&v| v / p_norm).collect()
    } else {
        vec![T::zero(); qp.p.len()]
    };
    Ok((qp, d))
}

/// Backtracking: first `α = σ^j` with `Φ(x + αd) < Φ(x) + c·α·Φ'(x;d)`
/// (strict).
pub fn line_search<T: Scalar, F: ObjectiveFamily<T> + ?Sized>(
    family: &F,
    x: &[T],
    d: &[T],
    phi_x: T,
    dir_deriv: T,
    c: T,
    sigma: T,
    j_max: usize,
) -> Result<(T, usize)> {
    debug_assert!(dir_deriv < T::zero(), "line search requires a descent direction");
    for j in 0..=j_max {
        let alpha = sigma.powi(j as i32);
        let trial = add_scaled(x, alpha, d);
        // Non-finite trial values behave like a failed predicate; shrinking
        // the step recovers.
        let accept = match phi(family, &trial) {
            Ok(phi_trial) => phi_trial < phi_x + c * alpha * dir_deriv,
            Err(_) => false,
        };
        if accept {
            return Ok((alpha, j));
        }
    }
    Err(MinimaxError::LineSearchStalled { j_max })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepStatus {
    Converged,
    Progressed,
}

#[derive(Debug, Clone)]
pub struct StepResult<T> {
    pub x_next: Vec<T>,
    pub record: TraceRecord<T>,
    pub status: StepStatus,
    /// QP weights, handed back for warm-starting the next iteration.
    pub lambda: Vec<T>,
}

/// One full outer iteration of the descent loop.
pub fn step<T: Scalar, F: ObjectiveFamily<T> + ?Sized>(
    family: &F,
    x: &[T],
    k: usize,
    config: &SolverConfig<T>,
    warm_lambda: Option<&[T]>,
) -> Result<StepResult<T>> {
    let snap = snapshot(family, x)?;
    let (qp, d) = direction(&snap, config.delta, config.epsilon, warm_lambda)?;
    let p_norm = norm2(&qp.p);
    let tau = config.active_tol_at(snap.phi);
    let active: ActiveSet<T> = active_set(&snap, tau);
    let active_count = active.indices.len();

    if p_norm <= config.epsilon {
        let record = TraceRecord {
            k,
            phi: snap.phi,
            p_norm,
            qp_gap: qp.gap,
            alpha: T::zero(),
            ls_steps: 0,
            dir_deriv: T::zero(),
            active_count,
        };
        return Ok(StepResult { x_next: x.to_vec(), record, status: StepStatus::Converged, lambda: qp.lambda });
    }

    // For the Armijo predicate the tolerance is capped at ¼||p||²: a
    // component at value gap s contributes <∇f_j, p> ≤ -½||p||² + s, so any
    // admitted component keeps the derivative at or below -¼||p||·||p||/||p||.
    // Without the cap, near-ties with s between ½||p||² and τ can flip the
    // derivative positive and wedge the line search.
    let armijo_tol = tau.min(T::c(0.25) * p_norm * p_norm);
    let armijo_active = active_set(&snap, armijo_tol);
    let dir_deriv = directional_derivative(&snap, &armijo_active, &d);
    if !(dir_deriv < T::zero()) {
        // Not a certified descent direction; QP inexactness has corrupted
        // it. Diagnosable, not silent.
        return Err(MinimaxError::LineSearchStalled { j_max: config.j_max });
    }

    let (alpha, ls_steps) =
        line_search(family, x, &d, snap.phi, dir_deriv, config.c, config.sigma, config.j_max)?;
    let x_next = add_scaled(x, alpha, &d);
    let record = TraceRecord {
        k,
        phi: snap.phi,
        p_norm,
        qp_gap: qp.gap,
        alpha,
        ls_steps,
        dir_deriv,
        active_count,
    };
    Ok(StepResult { x_next, record, status: StepStatus::Progressed, lambda: qp.lambda })
}

/// Runs the descent loop to convergence, iteration cap, or a terminal error
/// status. The trace is retained on every exit path.
pub fn solve<T: Scalar, F: ObjectiveFamily<T> + ?Sized>(
    family: &F,
    config: &SolverConfig<T>,
) -> SolveResult<T> {
    config
        .validate()
        .unwrap_or_else(|msg| panic!("invalid solver config: {msg}"));
    let mut x = config.x0.clone().unwrap_or_else(|| vec![T::zero(); family.dim()]);
    let mut trace: Vec<TraceRecord<T>> = Vec::new();
    let mut warm: Option<Vec<T>> = None;

    for k in 0..config.k_max {
        match step(family, &x, k, config, warm.as_deref()) {
            Ok(res) => {
                let stationarity = res.record.p_norm;
                trace.push(res.record);
                warm = Some(res.lambda);
                x = res.x_next;
                if res.status == StepStatus::Converged {
                    return SolveResult { x_final: x, status: SolveStatus::Converged, trace, stationarity };
                }
            }
            Err(err) => {
                let status = match err {
                    MinimaxError::LineSearchStalled { .. } => SolveStatus::LineSearchStalled,
                    _ => SolveStatus::QpFailure,
                };
                let stationarity = trace.last().map_or(T::infinity(), |r| r.p_norm);
                return SolveResult { x_final: x, status, trace, stationarity };
            }
        }
    }

    let stationarity = trace.last().map_or(T::infinity(), |r| r.p_norm);
    SolveResult { x_final: x, status: SolveStatus::MaxIterations, trace, stationarity }
}

/// `||p||` from a fresh QP solve at `x`; at most `epsilon` certifies
/// approximate stationarity.
pub fn stationarity_measure<T: Scalar, F: ObjectiveFamily<T> + ?Sized>(
    family: &F,
    x: &[T],
    delta: T,
) -> Result<T> {
    let snap = snapshot(family, x)?;
    let qp = solve_simplex_qp_warm(&snap.g, &snap.f, delta, None)?;
    Ok(norm2(&qp.p))
}

/// Renders a float with 17 significant digits; round-trips `f64` exactly.
pub fn fmt_float<T: Scalar>(v: T) -> String {
    format!("{:.16e}", v)
}

pub const TRACE_HEADER: &str = "k,phi,p_norm,qp_gap,alpha,ls_steps,dir_deriv,active_count";

/// Writes the trace as CSV, one record per line.
pub fn write_trace<T: Scalar, W: Write>(trace: &[TraceRecord<T>], w: &mut W) -> io::Result<()> {
    writeln!(w, "{TRACE_HEADER}")?;
    for r in trace {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{}",
            r.k,
            fmt_float(r.phi),
            fmt_float(r.p_norm),
            fmt_float(r.qp_gap),
            fmt_float(r.alpha),
            r.ls_steps,
            fmt_float(r.dir_deriv),
            r.active_count
        )?;
    }
    Ok(())
}
