//! Derivative-free minimization.

#[derive(Clone, Debug)]
pub struct SimplexResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
}

#[derive(Clone, Copy, Debug)]
pub struct SimplexOptions {
    /// Stop when every vertex lies within this distance of the best one.
    pub x_tol: f64,
    /// Stop when the objective spread over the simplex falls below this value.
    pub f_tol: f64,
    /// Stop as soon as the best value reaches this target.
    pub target: f64,
    pub max_evaluations: usize,
    /// Number of restarts from the current best point.
    pub restarts: usize,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        Self { x_tol: 1e-14, f_tol: 0.0, target: 0.0, max_evaluations: 20_000, restarts: 6 }
    }
}

/// Nelder–Mead minimization with restarts. `steps` sets the initial simplex
/// edge along each coordinate.
pub fn nelder_mead(f: impl Fn(&[f64]) -> f64, x0: &[f64], steps: &[f64], opts: &SimplexOptions) -> SimplexResult {
    let mut best_x = x0.to_vec();
    let mut best_f = f(x0);
    let mut evaluations = 1;
    let mut scale: Vec<f64> = steps.to_vec();
    for _ in 0..=opts.restarts {
        let run = simplex_run(&f, &best_x, &scale, opts, opts.max_evaluations.saturating_sub(evaluations));
        evaluations += run.evaluations;
        let improved = run.value < best_f;
        if run.value <= best_f {
            best_x = run.x;
            best_f = run.value;
        }
        if best_f <= opts.target || evaluations >= opts.max_evaluations {
            break;
        }
        if !improved {
            scale.iter_mut().for_each(|s| *s *= 0.1);
        }
    }
    SimplexResult { x: best_x, value: best_f, evaluations }
}

fn simplex_run(
    f: &impl Fn(&[f64]) -> f64,
    x0: &[f64],
    steps: &[f64],
    opts: &SimplexOptions,
    budget: usize,
) -> SimplexResult {
    let n = x0.len();
    let mut pts: Vec<Vec<f64>> = vec![x0.to_vec()];
    for i in 0..n {
        let mut p = x0.to_vec();
        p[i] += steps[i];
        pts.push(p);
    }
    let mut vals: Vec<f64> = pts.iter().map(|p| f(p)).collect();
    let mut evaluations = n + 1;
    let (alpha, gamma, rho, sigma) = (1.0, 2.0, 0.5, 0.5);
    loop {
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
        pts = order.iter().map(|&i| pts[i].clone()).collect();
        vals = order.iter().map(|&i| vals[i]).collect();

        let spread_x = pts[1..]
            .iter()
            .map(|p| p.iter().zip(&pts[0]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
            .fold(0.0, f64::max);
        if vals[0] <= opts.target || spread_x <= opts.x_tol || vals[n] - vals[0] <= opts.f_tol || evaluations >= budget
        {
            break;
        }

        let centroid: Vec<f64> = (0..n).map(|j| pts[..n].iter().map(|p| p[j]).sum::<f64>() / n as f64).collect();
        let along = |t: f64| -> Vec<f64> { centroid.iter().zip(&pts[n]).map(|(c, w)| c + t * (w - c)).collect() };

        let xr = along(-alpha);
        let fr = f(&xr);
        evaluations += 1;
        if fr < vals[0] {
            let xe = along(-gamma);
            let fe = f(&xe);
            evaluations += 1;
            if fe < fr {
                pts[n] = xe;
                vals[n] = fe;
            } else {
                pts[n] = xr;
                vals[n] = fr;
            }
            continue;
        }
        if fr < vals[n - 1] {
            pts[n] = xr;
            vals[n] = fr;
            continue;
        }
        let (xc, fc) = if fr < vals[n] {
            let xc = along(-rho);
            let fc = f(&xc);
            (xc, fc)
        } else {
            let xc = along(rho);
            let fc = f(&xc);
            (xc, fc)
        };
        evaluations += 1;
        if fc < vals[n].min(fr) {
            pts[n] = xc;
            vals[n] = fc;
            continue;
        }
        for i in 1..=n {
            let shrunk: Vec<f64> = pts[0].iter().zip(&pts[i]).map(|(b, p)| b + sigma * (p - b)).collect();
            vals[i] = f(&shrunk);
            pts[i] = shrunk;
        }
        evaluations += n;
    }
    SimplexResult { x: pts[0].clone(), value: vals[0], evaluations }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rosenbrock_minimum() {
        let f = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let r = nelder_mead(f, &[-1.2, 1.0], &[0.5, 0.5], &SimplexOptions::default());
        assert!((r.x[0] - 1.0).abs() < 1e-7 && (r.x[1] - 1.0).abs() < 1e-7, "{:?}", r.x);
    }

    #[test]
    fn cone_minimum_one_dimension() {
        let f = |x: &[f64]| (x[0] - 0.3).abs();
        let r = nelder_mead(f, &[0.0], &[0.1], &SimplexOptions::default());
        assert!((r.x[0] - 0.3).abs() < 1e-13);
    }
}
