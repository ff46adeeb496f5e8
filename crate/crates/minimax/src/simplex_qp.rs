//! The direction subproblem: minimize `½ λᵀGGᵀλ - fᵀλ` over the probability
//! simplex, certify optimality with the Frank-Wolfe gap, and recover the
//! primal direction `p = -Gᵀλ`.
//!
//! Backend is accelerated projected gradient with step `1/L`, `L` estimated
//! by power iteration on the Gram matrix, restarting on non-monotonicity.

use crate::error::{MinimaxError, Result};
use crate::linalg::{dot, norm2, Mat};
use crate::scalar::Scalar;

/// Inner iteration cap before `MaxQpIterations`.
pub const QP_MAX_ITERS: usize = 10_000;

const CLAMP_TOL: f64 = 1e-12;

/// Solution of the dual QP together with its certificate.
#[derive(Debug, Clone)]
pub struct QpSolution<T> {
    /// Simplex weights.
    pub lambda: Vec<T>,
    /// Primal direction `p = -Gᵀλ`.
    pub p: Vec<T>,
    /// `½ λᵀGGᵀλ - fᵀλ` at `lambda`.
    pub dual_obj: T,
    /// Frank-Wolfe gap at `lambda`; upper-bounds dual suboptimality.
    pub gap: T,
}

/// Feasible point of the epigraph form of the primal direction problem.
#[derive(Debug, Clone)]
pub struct PrimalCertificate<T> {
    /// `a = max_j (f_j + <G[j], p>)`.
    pub a: T,
    /// `½ ||p||² + a`.
    pub primal_obj: T,
}

/// Euclidean projection onto `{λ : λ >= 0, Σλ = 1}` by sort and threshold.
pub fn project_simplex<T: Scalar>(v: &[T]) -> Vec<T> {
    let n = v.len();
    assert!(n > 0);
    let mut sorted = v.to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).expect("finite entries"));
    let mut cumsum = T::zero();
    let mut theta = T::zero();
    for (i, &u) in sorted.iter().enumerate() {
        cumsum = cumsum + u;
        let k = T::from_usize(i + 1).unwrap();
        let t = (cumsum - T::one()) / k;
        if u - t > T::zero() {
            theta = t;
        } else {
            break;
        }
    }
    v.iter().map(|&vi| (vi - theta).max(T::zero())).collect()
}

fn dual_gradient<T: Scalar>(gram: &Mat<T>, f: &[T], lambda: &[T]) -> Vec<T> {
    let mut g = gram.mul_vec(lambda);
    for (gi, &fi) in g.iter_mut().zip(f) {
        *gi = *gi - fi;
    }
    g
}

fn dual_objective<T: Scalar>(gram: &Mat<T>, f: &[T], lambda: &[T]) -> T {
    let h = gram.mul_vec(lambda);
    T::c(0.5) * dot(&h, lambda) - dot(f, lambda)
}

fn gap_from_grad<T: Scalar>(grad: &[T], lambda: &[T]) -> T {
    // max_i (-g)_i - λᵀ(-g)  =  λᵀg - min_i g_i
    let min_g = grad.iter().fold(T::infinity(), |acc, &v| acc.min(v));
    dot(grad, lambda) - min_g
}

/// Frank-Wolfe gap of the dual objective at `lambda`; zero iff optimal.
pub fn fw_gap<T: Scalar>(g: &Mat<T>, f: &[T], lambda: &[T]) -> T {
    let gram = g.gram();
    gap_from_grad(&dual_gradient(&gram, f, lambda), lambda)
}

/// Largest eigenvalue of the PSD Gram matrix, by power iteration. Floored at
/// the largest diagonal entry, which never exceeds the true value for PSD
/// matrices.
fn lipschitz_estimate<T: Scalar>(gram: &Mat<T>) -> T {
    let n = gram.nrows();
    let mut max_diag = T::zero();
    for i in 0..n {
        max_diag = max_diag.max(gram.get(i, i));
    }
    let mut v: Vec<T> = (0..n)
        .map(|i| T::one() + T::c(0.01) * T::from_usize(i).unwrap())
        .collect();
    let mut est = T::zero();
    for _ in 0..50 {
        let w = gram.mul_vec(&v);
        let norm = norm2(&w);
        if norm <= T::zero() {
            break;
        }
        est = norm / norm2(&v).max(T::min_positive_value());
        v = w;
        // renormalize to dodge overflow on long runs
        let s = norm2(&v);
        if s > T::zero() {
            for vi in v.iter_mut() {
                *vi = *vi / s;
            }
            est = dot(&gram.mul_vec(&v), &v);
        }
    }
    est.max(max_diag)
}

fn clamp_to_simplex<T: Scalar>(lambda: &mut [T]) {
    let tol = T::c(CLAMP_TOL);
    for v in lambda.iter_mut() {
        if *v < T::zero() {
            debug_assert!(*v >= -tol, "projection produced {v:?}");
            *v = T::zero();
        }
    }
    let sum: T = lambda.iter().copied().sum();
    if sum > T::zero() {
        for v in lambda.iter_mut() {
            *v = *v / sum;
        }
    }
}

/// Solves the dual QP to Frank-Wolfe gap `delta`, warm-started from
/// `warm_start` when its length matches.
pub fn solve_simplex_qp_warm<T: Scalar>(
    g: &Mat<T>,
    f: &[T],
    delta: T,
    warm_start: Option<&[T]>,
) -> Result<QpSolution<T>> {
    assert!(delta > T::zero(), "gap tolerance must be positive");
    let big_n = g.nrows();
    assert_eq!(f.len(), big_n, "f length must match the row count of G");
    assert!(big_n > 0, "at least one component required");
    if f.iter().any(|v| !v.is_finite()) || g.iter().any(|v| !v.is_finite()) {
        return Err(MinimaxError::NonFiniteEvaluation { component: 0, what: "QP input" });
    }

    if big_n == 1 {
        let lambda = vec![T::one()];
        return Ok(finish(g, f, &g.gram(), lambda));
    }

    let gram = g.gram();
    let lip = lipschitz_estimate(&gram);

    // Degenerate quadratic term: the objective is linear, optimum at the
    // vertex maximizing f.
    if lip <= T::min_positive_value() {
        let best = argmax(f);
        let mut lambda = vec![T::zero(); big_n];
        lambda[best] = T::one();
        return Ok(finish(g, f, &gram, lambda));
    }

    let step = T::one() / lip;
    let uniform = T::one() / T::from_usize(big_n).unwrap();
    let mut lambda: Vec<T> = match warm_start {
        Some(w) if w.len() == big_n => project_simplex(w),
        _ => vec![uniform; big_n],
    };
    let mut y = lambda.clone();
    let mut t = T::one();
    let mut obj = dual_objective(&gram, f, &lambda);
    let mut achieved = T::infinity();

    // The gap certificate only bounds ||p - p*|| by sqrt(2*gap), far looser
    // than the caller's stationarity threshold. Once certified, keep
    // iterating until the dual objective stagnates so p is accurate to the
    // numerical floor.
    let mut best_obj = obj;
    let mut stagnant = 0usize;
    const PATIENCE: usize = 10;

    for _ in 0..QP_MAX_ITERS {
        let grad = dual_gradient(&gram, f, &lambda);
        achieved = gap_from_grad(&grad, &lambda);
        if achieved <= delta && stagnant >= PATIENCE {
            return Ok(finish(g, f, &gram, lambda));
        }

        let grad_y = dual_gradient(&gram, f, &y);
        let trial: Vec<T> = y
            .iter()
            .zip(&grad_y)
            .map(|(&yi, &gi)| yi - step * gi)
            .collect();
        let mut next = project_simplex(&trial);
        let mut next_obj = dual_objective(&gram, f, &next);
        if next_obj > obj {
            // momentum overshot; restart from the plain gradient step
            let trial: Vec<T> = lambda
                .iter()
                .zip(&grad)
                .map(|(&li, &gi)| li - step * gi)
                .collect();
            next = project_simplex(&trial);
            next_obj = dual_objective(&gram, f, &next);
            t = T::one();
        }
        let t_next = T::c(0.5) * (T::one() + (T::one() + T::c(4.0) * t * t).sqrt());
        let momentum = (t - T::one()) / t_next;
        y = next
            .iter()
            .zip(&lambda)
            .map(|(&ni, &li)| ni + momentum * (ni - li))
            .collect();
        t = t_next;
        lambda = next;
        obj = next_obj;
        if obj < best_obj {
            best_obj = obj;
            stagnant = 0;
        } else {
            stagnant += 1;
        }
    }

    if achieved <= delta {
        return Ok(finish(g, f, &gram, lambda));
    }
    Err(MinimaxError::MaxQpIterations {
        target: delta.to_f64().unwrap_or(f64::NAN),
        achieved: achieved.to_f64().unwrap_or(f64::NAN),
        iterations: QP_MAX_ITERS,
    })
}

/// Cold-started variant of [`solve_simplex_qp_warm`].
pub fn solve_simplex_qp<T: Scalar>(g: &Mat<T>, f: &[T], delta: T) -> Result<QpSolution<T>> {
    solve_simplex_qp_warm(g, f, delta, None)
}

fn argmax<T: Scalar>(v: &[T]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate().skip(1) {
        if x > v[best] {
            best = i;
        }
    }
    best
}

fn finish<T: Scalar>(g: &Mat<T>, f: &[T], gram: &Mat<T>, mut lambda: Vec<T>) -> QpSolution<T> {
    clamp_to_simplex(&mut lambda);
    let grad = dual_gradient(gram, f, &lambda);
    let gap = gap_from_grad(&grad, &lambda).max(T::zero());
    let p = negated_tr_mul(g, &lambda);
    QpSolution { dual_obj: dual_objective(gram, f, &lambda), gap, p, lambda }
}

fn negated_tr_mul<T: Scalar>(g: &Mat<T>, lambda: &[T]) -> Vec<T> {
    g.tr_mul_vec(lambda).into_iter().map(|v| -v).collect()
}

/// Recovers `p = -Gᵀλ` and the feasible epigraph point it induces.
pub fn primal_from_dual<T: Scalar>(
    g: &Mat<T>,
    f: &[T],
    lambda: &[T],
) -> (Vec<T>, PrimalCertificate<T>) {
    let p = negated_tr_mul(g, lambda);
    let a = (0..g.nrows())
        .map(|j| f[j] + dot(g.row(j), &p))
        .fold(T::neg_infinity(), |acc, v| acc.max(v));
    let pn = norm2(&p);
    (p, PrimalCertificate { a, primal_obj: T::c(0.5) * pn * pn + a })
}

/// Exhaustive grid search over the simplex, used only as a test oracle.
/// `grid_resolution` is the spacing; weights are multiples of it.
pub fn brute_force_qp<T: Scalar>(g: &Mat<T>, f: &[T], grid_resolution: T) -> Result<QpSolution<T>> {
    let big_n = g.nrows();
    if big_n > 4 {
        return Err(MinimaxError::DimensionTooLarge { n: big_n });
    }
    let gram = g.gram();
    let m = (T::one() / grid_resolution)
        .round()
        .to_usize()
        .expect("grid resolution yields an integer step count")
        .max(1);
    let mut best: Option<(T, Vec<T>)> = None;
    let mut counts = vec![0usize; big_n];
    enumerate_compositions(m, big_n, 0, &mut counts, &mut |counts| {
        let lambda: Vec<T> = counts
            .iter()
            .map(|&c| T::from_usize(c).unwrap() / T::from_usize(m).unwrap())
            .collect();
        let obj = dual_objective(&gram, f, &lambda);
        if best.as_ref().map_or(true, |(b, _)| obj < *b) {
            best = Some((obj, lambda));
        }
    });
    let (dual_obj, lambda) = best.unwrap();
    let grad = dual_gradient(&gram, f, &lambda);
    let gap = gap_from_grad(&grad, &lambda).max(T::zero());
    let p = negated_tr_mul(g, &lambda);
    Ok(QpSolution { lambda, p, dual_obj, gap })
}

fn enumerate_compositions(
    remaining: usize,
    slots: usize,
    idx: usize,
    counts: &mut [usize],
    visit: &mut impl FnMut(&[usize]),
) {
    if idx == slots - 1 {
        counts[idx] = remaining;
        visit(counts);
        return;
    }
    for c in 0..=remaining {
        counts[idx] = c;
        enumerate_compositions(remaining - c, slots, idx + 1, counts, visit);
    }
}
