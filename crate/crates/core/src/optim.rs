//! Nelder–Mead simplex minimization.
//!
//! Uses the dimension-adaptive coefficients of Gao & Han, which behave
//! better than the classic (1, 2, ½, ½) set once there are more than a
//! handful of parameters. [`minimize`] restarts the simplex around the
//! incumbent until a restart no longer improves it.

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NelderMeadOptions {
    /// Edge length of the initial axis-aligned simplex.
    pub initial_step: f64,
    /// Stop when the spread of function values in the simplex drops below this.
    pub ftol: f64,
    /// Stop when the simplex diameter drops below this.
    pub xtol: f64,
    /// Budget of function evaluations across all restarts.
    pub max_evals: usize,
    /// Maximum number of simplex rebuilds around the incumbent.
    pub max_restarts: usize,
    /// Stop as soon as the function value falls below this.
    pub target: f64,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        Self {
            initial_step: 0.1,
            ftol: 1e-16,
            xtol: 1e-12,
            max_evals: 20_000,
            max_restarts: 6,
            target: 0.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub evals: usize,
}

/// Minimizes `f` starting from `x0`.
pub fn minimize<F>(f: F, x0: &[f64], opts: &NelderMeadOptions) -> Minimum
where
    F: Fn(&[f64]) -> f64,
{
    let evals = std::cell::Cell::new(0usize);
    let mut eval = |x: &[f64]| {
        evals.set(evals.get() + 1);
        f(x)
    };
    let mut best_x = x0.to_vec();
    let mut best = eval(&best_x);
    let mut step = opts.initial_step;
    for _ in 0..=opts.max_restarts {
        if best <= opts.target || evals.get() >= opts.max_evals {
            break;
        }
        let budget = opts.max_evals - evals.get();
        let (x, v) = run_simplex(&mut eval, &best_x, best, step, opts, budget);
        let improved = v < best;
        if improved {
            best = v;
            best_x = x;
        }
        if !improved && step < opts.xtol * 10.0 {
            break;
        }
        step = if improved { (step * 0.5).max(opts.xtol * 100.0) } else { step * 0.1 };
    }
    Minimum { x: best_x, value: best, evals: evals.get() }
}

fn run_simplex<E>(
    eval: &mut E,
    x0: &[f64],
    f0: f64,
    step: f64,
    opts: &NelderMeadOptions,
    budget: usize,
) -> (Vec<f64>, f64)
where
    E: FnMut(&[f64]) -> f64,
{
    let n = x0.len();
    if n == 0 {
        return (Vec::new(), f0);
    }
    let nf = n as f64;
    let (alpha, gamma, rho, sigma) = if n >= 2 {
        (1.0, 1.0 + 2.0 / nf, 0.75 - 1.0 / (2.0 * nf), 1.0 - 1.0 / nf)
    } else {
        (1.0, 2.0, 0.5, 0.5)
    };

    let mut used = 0usize;
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    simplex.push((x0.to_vec(), f0));
    for i in 0..n {
        let mut x = x0.to_vec();
        x[i] += step;
        let v = eval(&x);
        used += 1;
        simplex.push((x, v));
    }

    let mut centroid = vec![0.0; n];
    let mut trial = vec![0.0; n];
    loop {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let best = simplex[0].1;
        let worst = simplex[n].1;
        if best <= opts.target || used >= budget {
            break;
        }
        let diameter = simplex[1..]
            .iter()
            .map(|(x, _)| x.iter().zip(&simplex[0].0).fold(0.0f64, |m, (a, b)| m.max((a - b).abs())))
            .fold(0.0f64, f64::max);
        if worst - best <= opts.ftol || diameter <= opts.xtol {
            break;
        }

        centroid.iter_mut().for_each(|c| *c = 0.0);
        for (x, _) in &simplex[..n] {
            for (c, xi) in centroid.iter_mut().zip(x) {
                *c += xi / nf;
            }
        }
        let along = |coef: f64, out: &mut [f64], w: &[f64]| {
            for i in 0..n {
                out[i] = centroid[i] + coef * (centroid[i] - w[i]);
            }
        };

        along(alpha, &mut trial, &simplex[n].0);
        let fr = eval(&trial);
        used += 1;
        if fr < simplex[0].1 {
            let mut expanded = vec![0.0; n];
            along(alpha * gamma, &mut expanded, &simplex[n].0);
            let fe = eval(&expanded);
            used += 1;
            simplex[n] = if fe < fr { (expanded, fe) } else { (trial.clone(), fr) };
        } else if fr < simplex[n - 1].1 {
            simplex[n] = (trial.clone(), fr);
        } else {
            let outside = fr < simplex[n].1;
            let coef = if outside { alpha * rho } else { -rho };
            let mut contracted = vec![0.0; n];
            along(coef, &mut contracted, &simplex[n].0);
            let fc = eval(&contracted);
            used += 1;
            let accept = if outside { fc <= fr } else { fc < simplex[n].1 };
            if accept {
                simplex[n] = (contracted, fc);
            } else {
                let (head, tail) = simplex.split_at_mut(1);
                let x_best = &head[0].0;
                for (x, v) in tail.iter_mut() {
                    for (xi, bi) in x.iter_mut().zip(x_best) {
                        *xi = bi + sigma * (*xi - bi);
                    }
                    *v = eval(x);
                    used += 1;
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (x, v) = simplex.swap_remove(0);
    (x, v)
}
