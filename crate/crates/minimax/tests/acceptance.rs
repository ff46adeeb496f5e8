//! Acceptance suite: one test per convergence guarantee, each printing a
//! pass/fail line. Tolerances are pinned here, not tuned elsewhere.

use std::process::Command;

use minimax::linalg::{dot, norm2, Mat};
use minimax::objective::{
    active_set, check_gradients, default_active_tol, default_fd_step, directional_derivative,
    phi, snapshot, FnFamily, ObjectiveFamily,
};
use minimax::problems::{
    demyanov_malozemov, grid_refine, maxmean_objective, quadratic_family, subgradient_oracle,
    Group, GroupedDataset, RegressionModel,
};
use minimax::simplex_qp::{brute_force_qp, primal_from_dual, solve_simplex_qp};
use minimax::solver::{
    direction, line_search, solve, SolveStatus, SolverConfig,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn report(criterion: usize, name: &str, pass: bool) {
    println!("criterion {criterion} ({name}): {}", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "criterion {criterion} ({name}) failed");
}

/// One audited outer iteration, reconstructed through the public operations.
struct Iterate {
    x: Vec<f64>,
    phi: f64,
    p: Vec<f64>,
    d: Vec<f64>,
    dir_deriv: f64,
    alpha: f64,
}

/// Re-executes the descent loop through the public ops, capturing every
/// iterate, and checks the trajectory agrees with `solve`'s own trace.
fn replay<F: ObjectiveFamily<f64>>(family: &F, config: &SolverConfig<f64>) -> Vec<Iterate> {
    let reference = solve(family, config);
    assert_eq!(reference.status, SolveStatus::Converged, "acceptance problems must converge");

    let mut x = config.x0.clone().unwrap_or_else(|| vec![0.0; family.dim()]);
    let mut warm: Option<Vec<f64>> = None;
    let mut iterates = Vec::new();
    for record in &reference.trace {
        let snap = snapshot(family, &x).unwrap();
        let (qp, d) = direction(&snap, config.delta, config.epsilon, warm.as_deref()).unwrap();
        let p_norm = norm2(&qp.p);
        assert_eq!(snap.phi, record.phi, "replay diverged from trace at k={}", record.k);
        assert_eq!(p_norm, record.p_norm);
        if p_norm <= config.epsilon {
            iterates.push(Iterate { x: x.clone(), phi: snap.phi, p: qp.p, d, dir_deriv: 0.0, alpha: 0.0 });
            break;
        }
        let tau = config
            .active_tol
            .unwrap_or_else(|| default_active_tol(snap.phi))
            .min(0.25 * p_norm * p_norm);
        let act = active_set(&snap, tau);
        let dir_deriv = directional_derivative(&snap, &act, &d);
        let (alpha, ls) = line_search(
            family, &x, &d, snap.phi, dir_deriv, config.c, config.sigma, config.j_max,
        )
        .unwrap();
        assert_eq!(alpha, record.alpha);
        assert_eq!(ls, record.ls_steps);
        iterates.push(Iterate { x: x.clone(), phi: snap.phi, p: qp.p, d: d.clone(), dir_deriv, alpha });
        for (xi, &di) in x.iter_mut().zip(&d) {
            *xi += alpha * di;
        }
        warm = Some(qp.lambda);
    }
    iterates
}

fn two_parabolas() -> FnFamily<f64> {
    FnFamily::new(1)
        .push(|x: &[f64]| (x[0] - 1.0) * (x[0] - 1.0), |x: &[f64]| vec![2.0 * (x[0] - 1.0)])
        .push(|x: &[f64]| (x[0] + 1.0) * (x[0] + 1.0), |x: &[f64]| vec![2.0 * (x[0] + 1.0)])
        .with_lower_bound(0.0)
        .with_grad_lipschitz(2.0)
}

fn regression_dataset() -> GroupedDataset<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let slopes: [[f64; 2]; 3] = [[1.0, 0.5], [0.2, -0.8], [-0.6, 1.2]];
    let mut groups = Vec::new();
    for s in &slopes {
        let mut features = Vec::new();
        let mut targets = Vec::new();
        for _ in 0..10 {
            let x: Vec<f64> = (0..2).map(|_| rng.gen_range(-1.0..=1.0)).collect();
            targets.push(s[0] * x[0] + s[1] * x[1]);
            features.push(x);
        }
        groups.push(Group { features, targets });
    }
    GroupedDataset::new(groups).unwrap()
}

/// Every acceptance solve, replayed: DM from (1,1), the symmetric
/// two-parabola problem, and 20 seeded quadratic families.
fn acceptance_replays() -> Vec<Vec<Iterate>> {
    let mut all = Vec::new();
    let dm_cfg = SolverConfig { x0: Some(vec![1.0, 1.0]), ..SolverConfig::default() };
    all.push(replay(&demyanov_malozemov::<f64>(), &dm_cfg));
    let tp_cfg = SolverConfig { x0: Some(vec![5.0]), ..SolverConfig::default() };
    all.push(replay(&two_parabolas(), &tp_cfg));
    for seed in 100..120u64 {
        let fam = quadratic_family::<f64>(seed, 3, 2);
        all.push(replay(&fam, &SolverConfig::default()));
    }
    all
}

fn dir_deriv_wrt_p<F: ObjectiveFamily<f64> + ?Sized>(family: &F, x: &[f64], p: &[f64]) -> f64 {
    let snap = snapshot(family, x).unwrap();
    let act = active_set(&snap, 0.0);
    directional_derivative(&snap, &act, p)
}

// Descent inequality at every iterate: Φ'(x_k; p_k) <= -½||p_k||² + 1e-6.
#[test]
fn criterion_1_descent_inequality() {
    let families: Vec<Box<dyn ObjectiveFamily<f64>>> = {
        let mut v: Vec<Box<dyn ObjectiveFamily<f64>>> =
            vec![Box::new(demyanov_malozemov::<f64>()), Box::new(two_parabolas())];
        for seed in 100..120u64 {
            v.push(Box::new(quadratic_family::<f64>(seed, 3, 2)));
        }
        v
    };
    let mut pass = true;
    for (fam, iterates) in families.iter().zip(acceptance_replays()) {
        for it in &iterates {
            let dd = dir_deriv_wrt_p(fam.as_ref(), &it.x, &it.p);
            let bound = -0.5 * dot(&it.p, &it.p) + 1e-6;
            if dd > bound {
                eprintln!("violation: dd {dd} > bound {bound}");
                pass = false;
            }
        }
    }
    report(1, "descent inequality", pass);
}

// dir_deriv < 0 whenever ||p_k|| > ε; Φ non-increasing along every trace.
#[test]
fn criterion_2_descent_direction_and_monotone_trace() {
    let mut pass = true;
    for iterates in acceptance_replays() {
        for w in iterates.windows(2) {
            if w[1].phi > w[0].phi {
                pass = false;
            }
        }
        for it in &iterates {
            if norm2(&it.p) > 1e-8 && !(it.dir_deriv < 0.0) {
                pass = false;
            }
        }
    }
    report(2, "descent direction and monotone trace", pass);
}

// No stalled line search; accepted α satisfies the strict Armijo predicate
// re-evaluated with fresh function evaluations.
#[test]
fn criterion_3_finite_line_search() {
    let families: Vec<Box<dyn ObjectiveFamily<f64>>> = {
        let mut v: Vec<Box<dyn ObjectiveFamily<f64>>> =
            vec![Box::new(demyanov_malozemov::<f64>()), Box::new(two_parabolas())];
        for seed in 100..120u64 {
            v.push(Box::new(quadratic_family::<f64>(seed, 3, 2)));
        }
        v
    };
    let mut pass = true;
    for (fam, iterates) in families.iter().zip(acceptance_replays()) {
        // replay() itself asserts Converged status, so no stall occurred.
        for it in &iterates {
            if it.alpha == 0.0 {
                continue; // terminal iterate
            }
            let trial: Vec<f64> =
                it.x.iter().zip(&it.d).map(|(&a, &b)| a + it.alpha * b).collect();
            let lhs = phi(fam.as_ref(), &trial).unwrap();
            let rhs = it.phi + 0.5 * it.alpha * it.dir_deriv;
            if !(lhs < rhs) {
                eprintln!("armijo violated: {lhs} !< {rhs}");
                pass = false;
            }
        }
    }
    report(3, "finite line search with verified Armijo steps", pass);
}

// Strong duality and oracle agreement on 100 random QP instances.
#[test]
fn criterion_4_strong_duality() {
    let mut rng = ChaCha8Rng::seed_from_u64(40);
    let delta = 1e-7;
    let mut pass = true;
    for _ in 0..100 {
        let big_n = rng.gen_range(1..=4usize);
        let n = rng.gen_range(1..=3usize);
        let rows: Vec<Vec<f64>> = (0..big_n)
            .map(|_| (0..n).map(|_| rng.gen_range(-5.0..=5.0)).collect())
            .collect();
        let g = Mat::from_rows(rows);
        let f: Vec<f64> = (0..big_n).map(|_| rng.gen_range(-5.0..=5.0)).collect();

        let sol = solve_simplex_qp(&g, &f, delta).unwrap();
        let (p, cert) = primal_from_dual(&g, &f, &sol.lambda);
        if (cert.primal_obj + sol.dual_obj).abs() > 1e-6 {
            eprintln!("duality gap {:.3e}", (cert.primal_obj + sol.dual_obj).abs());
            pass = false;
        }
        // feasibility of (p, a) for every epigraph constraint
        for j in 0..big_n {
            let residual = f[j] + dot(g.row(j), &p) - cert.a;
            if residual > 1e-9 {
                pass = false;
            }
        }

        let res = match big_n {
            1 | 2 => 1e-3,
            3 => 0.01,
            _ => 0.02,
        };
        let grid = brute_force_qp(&g, &f, res).unwrap();
        // soundness: certified solution can trail the grid by at most gap
        if sol.dual_obj - grid.dual_obj > sol.gap + 1e-12 {
            pass = false;
        }
        // grid can trail the solution by at most the grid spacing allows
        let gram = g.gram();
        let grad_inf = {
            let gr = gram.mul_vec(&sol.lambda);
            gr.iter().zip(&f).map(|(&h, &fi)| (h - fi).abs()).fold(0.0, f64::max)
        };
        let row_sum = (0..big_n)
            .map(|i| (0..big_n).map(|j| gram.get(i, j).abs()).sum::<f64>())
            .fold(0.0, f64::max);
        let dist1 = big_n as f64 * res;
        let slack = (grad_inf + row_sum * dist1) * dist1;
        if grid.dual_obj - sol.dual_obj > slack + 1e-12 {
            eprintln!("grid unexpectedly better: {:.3e} > {:.3e}", grid.dual_obj - sol.dual_obj, slack);
            pass = false;
        }
    }
    report(4, "strong duality and QP oracle agreement", pass);
}

// Global convergence on strictly convex quadratic families.
#[test]
fn criterion_5_convex_global_convergence() {
    let mut pass = true;
    for seed in 100..120u64 {
        let fam = quadratic_family::<f64>(seed, 3, 2);
        let res = solve(&fam, &SolverConfig::default());
        if res.status != SolveStatus::Converged {
            pass = false;
            continue;
        }
        let phi_final = res.trace.last().unwrap().phi;
        let (x_sub, _) = subgradient_oracle(&fam, &[0.0, 0.0], 20_000, 1.0);
        let (_, phi_oracle) = grid_refine(&fam, &x_sub, 0.5, 45);
        if phi_final - phi_oracle > 1e-6 {
            eprintln!("seed {seed}: solver {phi_final} vs oracle {phi_oracle}");
            pass = false;
        }
    }
    report(5, "global convergence on strictly convex families", pass);
}

// DM benchmark: known minimizer (0, -3) with value -3.
#[test]
fn criterion_6_dm_benchmark() {
    let fam = demyanov_malozemov::<f64>();
    let cfg = SolverConfig { x0: Some(vec![1.0, 1.0]), ..SolverConfig::default() };
    let res = solve(&fam, &cfg);
    let phi_final = res.trace.last().unwrap().phi;
    let pass = res.trace.len() <= 500
        && res.x_final[0].abs() <= 1e-4
        && (res.x_final[1] + 3.0).abs() <= 1e-4
        && (phi_final + 3.0).abs() <= 1e-6;
    if !pass {
        eprintln!("x {:?} phi {phi_final} iters {}", res.x_final, res.trace.len());
    }
    report(6, "Demyanov-Malozemov benchmark", pass);
}

// Max-mean regression: oracle agreement plus worst-group sanity versus the
// pooled least-squares fit.
#[test]
fn criterion_7_maxmean_regression() {
    let ds = regression_dataset();
    let fam = maxmean_objective(&ds, RegressionModel::Linear).unwrap();
    assert!(fam.strictly_convex());
    let res = solve(&fam, &SolverConfig::default());
    let phi_solver = res.trace.last().unwrap().phi;
    let (x_sub, _) = subgradient_oracle(&fam, &[0.0, 0.0], 50_000, 1.0);
    let (_, phi_oracle) = grid_refine(&fam, &x_sub, 0.5, 45);
    let oracle_ok = (phi_solver - phi_oracle).abs() <= 1e-4;

    // pooled least squares over all samples, by normal equations
    let dim = 2;
    let mut gram = vec![vec![0.0f64; dim]; dim];
    let mut rhs = vec![0.0f64; dim];
    for g in ds.groups() {
        for (x, &y) in g.features.iter().zip(&g.targets) {
            for i in 0..dim {
                for j in 0..dim {
                    gram[i][j] += x[i] * x[j];
                }
                rhs[i] += x[i] * y;
            }
        }
    }
    let det = gram[0][0] * gram[1][1] - gram[0][1] * gram[1][0];
    let theta_ls = vec![
        (rhs[0] * gram[1][1] - rhs[1] * gram[0][1]) / det,
        (gram[0][0] * rhs[1] - gram[1][0] * rhs[0]) / det,
    ];
    let worst_ls = phi(&fam, &theta_ls).unwrap();
    let sanity_ok = phi_solver <= worst_ls + 1e-12;

    if !oracle_ok {
        eprintln!("solver {phi_solver} vs oracle {phi_oracle}");
    }
    report(7, "max-mean regression matches oracle and beats pooled LS", oracle_ok && sanity_ok);
}

// Finite-difference consistency of Φ' at Lipschitz scale.
#[test]
fn criterion_8_directional_derivative_consistency() {
    let mut pass = true;
    let cases: Vec<(Box<dyn ObjectiveFamily<f64>>, u64)> = vec![
        (Box::new(demyanov_malozemov::<f64>()), 80),
        (Box::new(quadratic_family::<f64>(7, 3, 2)), 81),
    ];
    for (fam, seed) in cases {
        let lip = fam.grad_lipschitz().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut collected = 0;
        while collected < 50 {
            let x: Vec<f64> = (0..fam.dim()).map(|_| rng.gen_range(-2.0..=2.0)).collect();
            let snap = snapshot(fam.as_ref(), &x).unwrap();
            // stay away from ties so the exact active set is stable over t
            let mut values: Vec<f64> = snap.f.clone();
            values.sort_by(|a, b| b.partial_cmp(a).unwrap());
            if values.len() > 1 && values[0] - values[1] < 0.5 {
                continue;
            }
            let raw: Vec<f64> = (0..fam.dim()).map(|_| rng.gen_range(-1.0..=1.0)).collect();
            let nd = norm2(&raw);
            if nd < 1e-3 {
                continue;
            }
            let d: Vec<f64> = raw.iter().map(|v| v / nd).collect();
            let act = active_set(&snap, 0.0);
            let dd = directional_derivative(&snap, &act, &d);
            for &t in &[1e-2, 1e-3, 1e-4] {
                let xt: Vec<f64> = x.iter().zip(&d).map(|(&a, &b)| a + t * b).collect();
                let fd = (phi(fam.as_ref(), &xt).unwrap() - snap.phi) / t;
                if (fd - dd).abs() > lip * t {
                    eprintln!("consistency violated at t={t}: |{fd} - {dd}| > {}", lip * t);
                    pass = false;
                }
            }
            collected += 1;
        }
    }
    report(8, "directional derivative finite-difference consistency", pass);
}

// Gradient validation on every built-in family.
#[test]
fn criterion_9_gradient_validation() {
    let ds = regression_dataset();
    let families: Vec<Box<dyn ObjectiveFamily<f64>>> = vec![
        Box::new(demyanov_malozemov::<f64>()),
        Box::new(two_parabolas()),
        Box::new(quadratic_family::<f64>(0, 3, 2)),
        Box::new(maxmean_objective(&ds, RegressionModel::Linear).unwrap()),
        Box::new(maxmean_objective(&ds, RegressionModel::Polynomial { degree: 2 }).unwrap()),
    ];
    let mut pass = true;
    for fam in &families {
        let mut rng = ChaCha8Rng::seed_from_u64(90);
        for _ in 0..20 {
            let x: Vec<f64> = (0..fam.dim()).map(|_| rng.gen_range(-2.0..=2.0)).collect();
            let rep = check_gradients(fam.as_ref(), &x, default_fd_step(&x)).unwrap();
            if rep.worst_error > 1e-6 {
                eprintln!("gradient error {} at {:?}", rep.worst_error, x);
                pass = false;
            }
        }
    }
    report(9, "gradient validation", pass);
}

// Two end-to-end CLI runs of the same config produce byte-identical traces.
#[test]
fn criterion_10_cli_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let config_path = dir.path().join("run.cfg");
    std::fs::write(
        &config_path,
        "problem = demyanov_malozemov\nsolver.x0 = 1, 1\n",
    )
    .unwrap();
    let mut traces = Vec::new();
    for i in 0..2 {
        let trace_path = dir.path().join(format!("trace{i}.csv"));
        let result_path = dir.path().join(format!("result{i}.txt"));
        let status = Command::new(env!("CARGO_BIN_EXE_minimax"))
            .arg("solve")
            .arg(&config_path)
            .arg("--trace")
            .arg(&trace_path)
            .arg("--result")
            .arg(&result_path)
            .status()
            .unwrap();
        assert!(status.success(), "solve run failed");
        traces.push(std::fs::read(&trace_path).unwrap());
    }
    let pass = traces[0] == traces[1] && !traces[0].is_empty();
    report(10, "CLI determinism", pass);
}
