//! The objective side of the minimax problem: the family `{f_j}`, the max
//! function `Φ(x) = max_j f_j(x)`, its active set, and the directional
//! derivative `Φ'(x;d) = max_{j active} <∇f_j(x), d>`.

use crate::error::{MinimaxError, Result};
use crate::linalg::{dot, norm_inf, Mat};
use crate::scalar::Scalar;

/// A family of `N` continuously differentiable component functions on `R^n`.
///
/// Evaluations must be pure: repeated calls at the same `(j, x)` return
/// identical values. `lower_bound` and `grad_lipschitz` are optional metadata
/// used by the test suite, never by the solver itself.
pub trait ObjectiveFamily<T: Scalar> {
    /// Dimension of the decision variable.
    fn dim(&self) -> usize;
    /// Number of component functions.
    fn num_components(&self) -> usize;
    fn eval_component(&self, j: usize, x: &[T]) -> T;
    fn grad_component(&self, j: usize, x: &[T]) -> Vec<T>;
    /// Uniform lower bound `M` with `f_j(x) >= M`, when known.
    fn lower_bound(&self) -> Option<T> {
        None
    }
    /// Constant `L` with `||∇f_j(x) - ∇f_j(y)|| <= L ||x - y||`, when known.
    fn grad_lipschitz(&self) -> Option<T> {
        None
    }
}

/// Closure-backed family for tests and ad-hoc problems.
pub struct FnFamily<T: Scalar> {
    pub n: usize,
    pub components: Vec<Component<T>>,
    pub lower_bound: Option<T>,
    pub grad_lipschitz: Option<T>,
}

pub struct Component<T: Scalar> {
    pub eval: Box<dyn Fn(&[T]) -> T + Send + Sync>,
    pub grad: Box<dyn Fn(&[T]) -> Vec<T> + Send + Sync>,
}

impl<T: Scalar> FnFamily<T> {
    pub fn new(n: usize) -> Self {
        Self { n, components: Vec::new(), lower_bound: None, grad_lipschitz: None }
    }

    pub fn push(
        mut self,
        eval: impl Fn(&[T]) -> T + Send + Sync + 'static,
        grad: impl Fn(&[T]) -> Vec<T> + Send + Sync + 'static,
    ) -> Self {
        self.components.push(Component { eval: Box::new(eval), grad: Box::new(grad) });
        self
    }

    pub fn with_lower_bound(mut self, m: T) -> Self {
        self.lower_bound = Some(m);
        self
    }

    pub fn with_grad_lipschitz(mut self, l: T) -> Self {
        self.grad_lipschitz = Some(l);
        self
    }
}

impl<T: Scalar> ObjectiveFamily<T> for FnFamily<T> {
    fn dim(&self) -> usize {
        self.n
    }

    fn num_components(&self) -> usize {
        self.components.len()
    }

    fn eval_component(&self, j: usize, x: &[T]) -> T {
        (self.components[j].eval)(x)
    }

    fn grad_component(&self, j: usize, x: &[T]) -> Vec<T> {
        (self.components[j].grad)(x)
    }

    fn lower_bound(&self) -> Option<T> {
        self.lower_bound
    }

    fn grad_lipschitz(&self) -> Option<T> {
        self.grad_lipschitz
    }
}

/// All component values and gradients at one iterate.
#[derive(Debug, Clone)]
pub struct EvalSnapshot<T> {
    pub x: Vec<T>,
    /// `f[j] = f_j(x)`.
    pub f: Vec<T>,
    /// Row `j` is `∇f_j(x)ᵀ`.
    pub g: Mat<T>,
    /// `max_j f[j]`, with the same float comparison used everywhere else.
    pub phi: T,
}

/// Indices within `tol` of the maximum, i.e. the tolerance-relaxed `Λ(x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ActiveSet<T> {
    pub indices: Vec<usize>,
    pub tol: T,
}

/// Default active-set tolerance: `1e-9 * max(1, |Φ(x)|)`.
pub fn default_active_tol<T: Scalar>(phi: T) -> T {
    T::c(1e-9) * T::one().max(phi.abs())
}

/// Evaluates every component value and gradient at `x`, in ascending `j`
/// order, each exactly once.
pub fn snapshot<T: Scalar, F: ObjectiveFamily<T> + ?Sized>(
    family: &F,
    x: &[T],
) -> Result<EvalSnapshot<T>> {
    let n = family.dim();
    let big_n = family.num_components();
    if x.len() != n {
        return Err(MinimaxError::DimensionMismatch {
            what: format!("x has length {}, family dimension is {}", x.len(), n),
        });
    }
    let mut f = Vec::with_capacity(big_n);
    let mut rows = Vec::with_capacity(big_n);
    for j in 0..big_n {
        let fj = family.eval_component(j, x);
        if !fj.is_finite() {
            return Err(MinimaxError::NonFiniteEvaluation { component: j, what: "value" });
        }
        let gj = family.grad_component(j, x);
        if gj.len() != n {
            return Err(MinimaxError::DimensionMismatch {
                what: format!("gradient of component {j} has length {}, expected {n}", gj.len()),
            });
        }
        if gj.iter().any(|v| !v.is_finite()) {
            return Err(MinimaxError::NonFiniteEvaluation { component: j, what: "gradient" });
        }
        f.push(fj);
        rows.push(gj);
    }
    let phi = f.iter().fold(T::neg_infinity(), |acc, &v| acc.max(v));
    Ok(EvalSnapshot { x: x.to_vec(), f, g: Mat::from_rows(rows), phi })
}

/// `Φ(x)` without assembling gradients.
pub fn phi<T: Scalar, F: ObjectiveFamily<T> + ?Sized>(family: &F, x: &[T]) -> Result<T> {
    let mut best = T::neg_infinity();
    for j in 0..family.num_components() {
        let fj = family.eval_component(j, x);
        if !fj.is_finite() {
            return Err(MinimaxError::NonFiniteEvaluation { component: j, what: "value" });
        }
        best = best.max(fj);
    }
    Ok(best)
}

/// `{ j : Φ(x) - f_j(x) <= tol }`; with `tol = 0` this is the exact argmax set.
pub fn active_set<T: Scalar>(snapshot: &EvalSnapshot<T>, tol: T) -> ActiveSet<T> {
    let indices = snapshot
        .f
        .iter()
        .enumerate()
        .filter(|(_, &fj)| snapshot.phi - fj <= tol)
        .map(|(j, _)| j)
        .collect();
    ActiveSet { indices, tol }
}

/// `Φ'(x;d)` over the given active set: `max_{j active} <∇f_j(x), d>`.
pub fn directional_derivative<T: Scalar>(
    snapshot: &EvalSnapshot<T>,
    active: &ActiveSet<T>,
    d: &[T],
) -> T {
    debug_assert!(!active.indices.is_empty());
    active
        .indices
        .iter()
        .map(|&j| dot(snapshot.g.row(j), d))
        .fold(T::neg_infinity(), |acc, v| acc.max(v))
}

/// Per-component worst relative error of the analytic gradients against
/// central finite differences.
#[derive(Debug, Clone)]
pub struct GradCheckReport<T> {
    /// Worst relative error for each component.
    pub per_component: Vec<T>,
    pub worst_component: usize,
    pub worst_error: T,
}

impl<T: Scalar> GradCheckReport<T> {
    pub fn passes(&self, threshold: T) -> bool {
        self.worst_error <= threshold
    }
}

/// Default finite-difference step: `1e-6 * max(1, ||x||_inf)`.
pub fn default_fd_step<T: Scalar>(x: &[T]) -> T {
    T::c(1e-6) * T::one().max(norm_inf(x))
}

/// Compares each analytic gradient against central differences with step
/// `step`. The relative error per entry is `|a - fd| / max(1, |a|, |fd|)`.
pub fn check_gradients<T: Scalar, F: ObjectiveFamily<T> + ?Sized>(
    family: &F,
    x: &[T],
    step: T,
) -> Result<GradCheckReport<T>> {
    assert!(step > T::zero(), "finite-difference step must be positive");
    let n = family.dim();
    let mut per_component = Vec::with_capacity(family.num_components());
    for j in 0..family.num_components() {
        let analytic = family.grad_component(j, x);
        let mut worst = T::zero();
        let mut xp = x.to_vec();
        for i in 0..n {
            let xi = x[i];
            xp[i] = xi + step;
            let fp = family.eval_component(j, &xp);
            xp[i] = xi - step;
            let fm = family.eval_component(j, &xp);
            xp[i] = xi;
            if !fp.is_finite() || !fm.is_finite() {
                return Err(MinimaxError::NonFiniteEvaluation { component: j, what: "value" });
            }
            let fd = (fp - fm) / (step + step);
            let a = analytic[i];
            if !a.is_finite() {
                return Err(MinimaxError::NonFiniteEvaluation { component: j, what: "gradient" });
            }
            let denom = T::one().max(a.abs()).max(fd.abs());
            worst = worst.max((a - fd).abs() / denom);
        }
        per_component.push(worst);
    }
    let (worst_component, worst_error) = per_component
        .iter()
        .enumerate()
        .fold((0, T::zero()), |(bi, bv), (i, &v)| if v > bv { (i, v) } else { (bi, bv) });
    Ok(GradCheckReport { per_component, worst_component, worst_error })
}
