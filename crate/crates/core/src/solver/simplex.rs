//! Derivative-free Nelder-Mead descent.

#[derive(Debug, Clone)]
pub struct SimplexResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
}

/// Minimize `f` from `x0` with initial edge length `step`.
///
/// Stops after `max_evals` evaluations, or when both the spread of simplex
/// values and the simplex diameter drop below `tol`.
pub fn nelder_mead<F>(mut f: F, x0: &[f64], step: f64, max_evals: usize, tol: f64) -> SimplexResult
where
    F: FnMut(&[f64]) -> f64,
{
    let n = x0.len();
    if n == 0 {
        let value = f(x0);
        return SimplexResult {
            x: Vec::new(),
            value,
            evaluations: 1,
        };
    }
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    let v0 = f(x0);
    simplex.push((x0.to_vec(), v0));
    for i in 0..n {
        let mut x = x0.to_vec();
        x[i] += step;
        let v = f(&x);
        simplex.push((x, v));
    }
    let mut evals = n + 1;
    let by_value = |a: &(Vec<f64>, f64), b: &(Vec<f64>, f64)| {
        a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal)
    };

    while evals < max_evals {
        simplex.sort_by(by_value);
        let best = simplex[0].1;
        let worst = simplex[n].1;
        let diameter = simplex[1..]
            .iter()
            .map(|(x, _)| {
                x.iter()
                    .zip(&simplex[0].0)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max);
        if (worst - best).abs() <= tol && diameter <= tol {
            break;
        }
        if diameter <= tol * 1e-3 {
            break;
        }
        let mut centroid = vec![0.0; n];
        for (x, _) in &simplex[..n] {
            for (c, xi) in centroid.iter_mut().zip(x) {
                *c += xi / n as f64;
            }
        }
        let along = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&simplex[n].0)
                .map(|(c, w)| c + t * (w - c))
                .collect()
        };
        let xr = along(-1.0);
        let vr = f(&xr);
        evals += 1;
        if vr < simplex[0].1 {
            let xe = along(-2.0);
            let ve = f(&xe);
            evals += 1;
            simplex[n] = if ve < vr { (xe, ve) } else { (xr, vr) };
            continue;
        }
        if vr < simplex[n - 1].1 {
            simplex[n] = (xr, vr);
            continue;
        }
        let (xc, vc) = if vr < simplex[n].1 {
            let xc = along(-0.5);
            let vc = f(&xc);
            (xc, vc)
        } else {
            let xc = along(0.5);
            let vc = f(&xc);
            (xc, vc)
        };
        evals += 1;
        if vc < simplex[n].1.min(vr) {
            simplex[n] = (xc, vc);
            continue;
        }
        // shrink towards the best vertex
        let x_best = simplex[0].0.clone();
        for entry in simplex.iter_mut().skip(1) {
            let x: Vec<f64> = entry
                .0
                .iter()
                .zip(&x_best)
                .map(|(a, b)| b + 0.5 * (a - b))
                .collect();
            let v = f(&x);
            *entry = (x, v);
        }
        evals += n;
    }
    simplex.sort_by(by_value);
    let (x, value) = simplex.swap_remove(0);
    SimplexResult {
        x,
        value,
        evaluations: evals,
    }
}
