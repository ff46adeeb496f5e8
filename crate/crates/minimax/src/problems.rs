//! Built-in test problems and the max-mean grouped-regression objective
//! builder, plus independent reference solvers used by the test suite.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{MinimaxError, Result};
use crate::linalg::{dot, norm2, Mat};
use crate::objective::{phi, FnFamily, ObjectiveFamily};
use crate::scalar::Scalar;

/// Samples partitioned into groups for the max-mean regression objective.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupedDataset<T> {
    groups: Vec<Group<T>>,
    feature_dim: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Group<T> {
    pub features: Vec<Vec<T>>,
    pub targets: Vec<T>,
}

impl<T: Scalar> GroupedDataset<T> {
    pub fn new(groups: Vec<Group<T>>) -> Result<Self> {
        if groups.is_empty() {
            return Err(MinimaxError::DimensionMismatch { what: "dataset has no groups".into() });
        }
        let feature_dim = groups[0]
            .features
            .first()
            .map(|f| f.len())
            .ok_or_else(|| MinimaxError::DimensionMismatch { what: "group 0 is empty".into() })?;
        for (j, g) in groups.iter().enumerate() {
            if g.features.is_empty() || g.features.len() != g.targets.len() {
                return Err(MinimaxError::DimensionMismatch {
                    what: format!("group {j} has {} features and {} targets", g.features.len(), g.targets.len()),
                });
            }
            if g.features.iter().any(|f| f.len() != feature_dim) {
                return Err(MinimaxError::DimensionMismatch {
                    what: format!("group {j} has inconsistent feature dimensions"),
                });
            }
        }
        Ok(Self { groups, feature_dim })
    }

    pub fn num_groups(&self) -> usize {
        self.groups.len()
    }

    pub fn feature_dim(&self) -> usize {
        self.feature_dim
    }

    pub fn groups(&self) -> &[Group<T>] {
        &self.groups
    }
}

/// Regression model: a fixed feature map with linear parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegressionModel {
    Linear,
    /// Per-coordinate powers `x_i^p`, `p = 1..=degree`; degree 1 equals
    /// `Linear`.
    Polynomial { degree: usize },
}

impl RegressionModel {
    pub fn param_dim(&self, feature_dim: usize) -> usize {
        match self {
            RegressionModel::Linear => feature_dim,
            RegressionModel::Polynomial { degree } => feature_dim * degree,
        }
    }

    fn map<T: Scalar>(&self, x: &[T]) -> Vec<T> {
        match self {
            RegressionModel::Linear => x.to_vec(),
            RegressionModel::Polynomial { degree } => {
                let mut out = Vec::with_capacity(x.len() * degree);
                for p in 1..=*degree {
                    for &xi in x {
                        out.push(xi.powi(p as i32));
                    }
                }
                out
            }
        }
    }
}

/// `f_j(θ) = (1/n_j) Σ_l (θ·φ(x_jl) - y_jl)²` with precomputed feature maps.
pub struct MaxMeanFamily<T> {
    mapped: Vec<Vec<Vec<T>>>,
    targets: Vec<Vec<T>>,
    dim: usize,
    lip: T,
    per_group_strictly_convex: bool,
}

impl<T: Scalar> MaxMeanFamily<T> {
    /// True when every per-group Gram matrix is positive definite, which
    /// makes each component strictly convex.
    pub fn strictly_convex(&self) -> bool {
        self.per_group_strictly_convex
    }
}

impl<T: Scalar> ObjectiveFamily<T> for MaxMeanFamily<T> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn num_components(&self) -> usize {
        self.mapped.len()
    }

    fn eval_component(&self, j: usize, x: &[T]) -> T {
        let n_j = T::from_usize(self.mapped[j].len()).unwrap();
        let sum = self.mapped[j]
            .iter()
            .zip(&self.targets[j])
            .map(|(feat, &y)| {
                let r = dot(feat, x) - y;
                r * r
            })
            .fold(T::zero(), |acc, v| acc + v);
        sum / n_j
    }

    fn grad_component(&self, j: usize, x: &[T]) -> Vec<T> {
        let n_j = T::from_usize(self.mapped[j].len()).unwrap();
        let scale = T::c(2.0) / n_j;
        let mut g = vec![T::zero(); self.dim];
        for (feat, &y) in self.mapped[j].iter().zip(&self.targets[j]) {
            let r = dot(feat, x) - y;
            for (gi, &fi) in g.iter_mut().zip(feat) {
                *gi = *gi + scale * r * fi;
            }
        }
        g
    }

    fn lower_bound(&self) -> Option<T> {
        Some(T::zero())
    }

    fn grad_lipschitz(&self) -> Option<T> {
        Some(self.lip)
    }
}

/// Builds the worst-group mean-squared-residual objective over the dataset.
pub fn maxmean_objective<T: Scalar>(
    dataset: &GroupedDataset<T>,
    model: RegressionModel,
) -> Result<MaxMeanFamily<T>> {
    let dim = model.param_dim(dataset.feature_dim());
    if dim == 0 {
        return Err(MinimaxError::DimensionMismatch { what: "model has no parameters".into() });
    }
    let mut mapped = Vec::with_capacity(dataset.num_groups());
    let mut targets = Vec::with_capacity(dataset.num_groups());
    let mut lip = T::zero();
    let mut strictly_convex = true;
    for g in dataset.groups() {
        let feats: Vec<Vec<T>> = g.features.iter().map(|x| model.map(x)).collect();
        let n_j = T::from_usize(feats.len()).unwrap();
        // Hessian of f_j is (2/n_j) Σ φφᵀ; its trace bounds the largest
        // eigenvalue from above.
        let trace = feats
            .iter()
            .map(|f| dot(f, f))
            .fold(T::zero(), |acc, v| acc + v);
        lip = lip.max(T::c(2.0) / n_j * trace);
        let mut gram: Mat<T> = Mat::zeros(dim, dim);
        for f in &feats {
            for i in 0..dim {
                for k in 0..dim {
                    gram.set(i, k, gram.get(i, k) + f[i] * f[k]);
                }
            }
        }
        if !is_positive_definite(&gram) {
            strictly_convex = false;
        }
        mapped.push(feats);
        targets.push(g.targets.clone());
    }
    Ok(MaxMeanFamily { mapped, targets, dim, lip, per_group_strictly_convex: strictly_convex })
}

/// Cholesky-based positive-definiteness test.
fn is_positive_definite<T: Scalar>(m: &Mat<T>) -> bool {
    let n = m.nrows();
    let mut l = Mat::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let mut s = m.get(i, j);
            for k in 0..j {
                s = s - l.get(i, k) * l.get(j, k);
            }
            if i == j {
                if s <= T::c(1e-12) {
                    return false;
                }
                l.set(i, j, s.sqrt());
            } else {
                l.set(i, j, s / l.get(j, j));
            }
        }
    }
    true
}

/// Classical nonsmooth benchmark: `n = 2`, `N = 3`,
/// `f_1 = 5x_1 + x_2`, `f_2 = -5x_1 + x_2`, `f_3 = x_1² + x_2² + 4x_2`.
/// Minimizer (0, -3) with value -3.
pub fn demyanov_malozemov<T: Scalar>() -> FnFamily<T> {
    FnFamily::new(2)
        .push(
            |x: &[T]| T::c(5.0) * x[0] + x[1],
            |_x: &[T]| vec![T::c(5.0), T::one()],
        )
        .push(
            |x: &[T]| -T::c(5.0) * x[0] + x[1],
            |_x: &[T]| vec![-T::c(5.0), T::one()],
        )
        .push(
            |x: &[T]| x[0] * x[0] + x[1] * x[1] + T::c(4.0) * x[1],
            |x: &[T]| vec![T::c(2.0) * x[0], T::c(2.0) * x[1] + T::c(4.0)],
        )
        .with_grad_lipschitz(T::c(2.0))
}

/// Strictly convex quadratic family `f_j(x) = ½(x-b_j)ᵀA_j(x-b_j) + c_j`
/// with eigenvalues of each `A_j` in `[0.5, 2]`, deterministically generated
/// from the seed.
pub struct QuadraticFamily<T> {
    a: Vec<Mat<T>>,
    b: Vec<Vec<T>>,
    c: Vec<T>,
    n: usize,
}

impl<T: Scalar> QuadraticFamily<T> {
    pub fn matrices(&self) -> &[Mat<T>] {
        &self.a
    }

    pub fn centers(&self) -> &[Vec<T>] {
        &self.b
    }

    pub fn offsets(&self) -> &[T] {
        &self.c
    }
}

impl<T: Scalar> ObjectiveFamily<T> for QuadraticFamily<T> {
    fn dim(&self) -> usize {
        self.n
    }

    fn num_components(&self) -> usize {
        self.a.len()
    }

    fn eval_component(&self, j: usize, x: &[T]) -> T {
        let d: Vec<T> = x.iter().zip(&self.b[j]).map(|(&xi, &bi)| xi - bi).collect();
        let ad = self.a[j].mul_vec(&d);
        T::c(0.5) * dot(&ad, &d) + self.c[j]
    }

    fn grad_component(&self, j: usize, x: &[T]) -> Vec<T> {
        let d: Vec<T> = x.iter().zip(&self.b[j]).map(|(&xi, &bi)| xi - bi).collect();
        self.a[j].mul_vec(&d)
    }

    fn lower_bound(&self) -> Option<T> {
        self.c.iter().copied().fold(None, |acc: Option<T>, v| {
            Some(acc.map_or(v, |a| a.min(v)))
        })
    }

    fn grad_lipschitz(&self) -> Option<T> {
        Some(T::c(2.0))
    }
}

/// Deterministic generator: `A_j = QDQᵀ` with a random orthogonal `Q` and
/// eigenvalues uniform in `[0.5, 2]`; centers in `[-2, 2]`, offsets in
/// `[-1, 1]`. Same seed, identical coefficients.
pub fn quadratic_family<T: Scalar>(seed: u64, components: usize, n: usize) -> QuadraticFamily<T> {
    assert!(components >= 1 && n >= 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut a = Vec::with_capacity(components);
    let mut b = Vec::with_capacity(components);
    let mut c = Vec::with_capacity(components);
    for _ in 0..components {
        let q = random_orthogonal(&mut rng, n);
        let eigs: Vec<f64> = (0..n).map(|_| rng.gen_range(0.5..=2.0)).collect();
        // A = Q diag(eigs) Qᵀ
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let mut s = 0.0;
                for k in 0..n {
                    s += q.get(i, k) * eigs[k] * q.get(j, k);
                }
                m.set(i, j, s);
            }
        }
        let mut mt = Mat::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                mt.set(i, j, T::c(m.get(i, j)));
            }
        }
        a.push(mt);
        b.push((0..n).map(|_| T::c(rng.gen_range(-2.0..=2.0))).collect());
        c.push(T::c(rng.gen_range(-1.0..=1.0)));
    }
    QuadraticFamily { a, b, c, n }
}

fn random_orthogonal(rng: &mut ChaCha8Rng, n: usize) -> Mat<f64> {
    // Gram-Schmidt on random columns; re-draw on near-dependence.
    let mut cols: Vec<Vec<f64>> = Vec::with_capacity(n);
    while cols.len() < n {
        let mut v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        for c in &cols {
            let proj: f64 = v.iter().zip(c).map(|(a, b)| a * b).sum();
            for (vi, &ci) in v.iter_mut().zip(c) {
                *vi -= proj * ci;
            }
        }
        let norm: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm < 1e-8 {
            continue;
        }
        for vi in v.iter_mut() {
            *vi /= norm;
        }
        cols.push(v);
    }
    let mut q = Mat::zeros(n, n);
    for (j, col) in cols.iter().enumerate() {
        for (i, &v) in col.iter().enumerate() {
            q.set(i, j, v);
        }
    }
    q
}

/// Independent reference solver: subgradient descent on `Φ` using the
/// gradient of the argmax component, normalized direction, diminishing steps
/// `a/√t`, best-so-far tracking. Shares no code with the descent solver.
pub fn subgradient_oracle<T: Scalar, F: ObjectiveFamily<T> + ?Sized>(
    family: &F,
    x0: &[T],
    steps: usize,
    step_scale: T,
) -> (Vec<T>, T) {
    assert!(steps >= 1);
    let mut x = x0.to_vec();
    let mut best_x = x.clone();
    let mut best_phi = phi(family, &x).expect("finite at x0");
    for t in 1..=steps {
        // subgradient = gradient of (the first) maximizing component
        let mut arg = 0;
        let mut max_val = T::neg_infinity();
        for j in 0..family.num_components() {
            let v = family.eval_component(j, &x);
            if v > max_val {
                max_val = v;
                arg = j;
            }
        }
        let g = family.grad_component(arg, &x);
        let gn = norm2(&g);
        if gn <= T::zero() {
            break;
        }
        let step = step_scale / T::from_usize(t).unwrap().sqrt();
        for (xi, &gi) in x.iter_mut().zip(&g) {
            *xi = *xi - step * gi / gn;
        }
        if let Ok(v) = phi(family, &x) {
            if v < best_phi {
                best_phi = v;
                best_x = x.clone();
            }
        }
    }
    (best_x, best_phi)
}

/// Shrinking local grid search around a candidate: a 5-point-per-axis cube
/// of radius `radius`, recentered on improvement, radius halved per level.
/// Used together with [`subgradient_oracle`] as the reference pipeline.
pub fn grid_refine<T: Scalar, F: ObjectiveFamily<T> + ?Sized>(
    family: &F,
    x0: &[T],
    radius: T,
    levels: usize,
) -> (Vec<T>, T) {
    let n = family.dim();
    let mut center = x0.to_vec();
    let mut best = phi(family, &center).expect("finite at start");
    let mut r = radius;
    let offsets = [-1.0, -0.5, 0.0, 0.5, 1.0];
    for _ in 0..levels {
        let mut improved = true;
        while improved {
            improved = false;
            let mut idx = vec![0usize; n];
            loop {
                let cand: Vec<T> = center
                    .iter()
                    .enumerate()
                    .map(|(i, &ci)| ci + r * T::c(offsets[idx[i]]))
                    .collect();
                if let Ok(v) = phi(family, &cand) {
                    if v < best {
                        best = v;
                        center = cand;
                        improved = true;
                    }
                }
                // odometer over the stencil
                let mut i = 0;
                loop {
                    idx[i] += 1;
                    if idx[i] < offsets.len() {
                        break;
                    }
                    idx[i] = 0;
                    i += 1;
                    if i == n {
                        break;
                    }
                }
                if i == n {
                    break;
                }
            }
        }
        r = r * T::c(0.5);
    }
    (center, best)
}
