//! Point minimax over balls: minimize `f(p) = max_i (|p - c_i| - r_i)`.
//!
//! `f` is convex. The solver smooths it with a log-sum-exp continuation,
//! polishes the smoothed minimizer with Newton on the KKT system of the
//! active constraints, and certifies a lower bound from a convex combination
//! of supporting hyperplanes:
//!
//! `f(q) >= sum_i l_i g_i(p) + <w, q - p>` with `w = sum_i l_i u_i`,
//!
//! valid for any simplex weights `l` and the unit directions `u_i` from
//! `c_i` to `p`. The weights come from a min-norm-point computation over the
//! `u_i`, and `|q* - p|` is bounded from the constraints themselves.

use nalgebra::{DMatrix, DVector};

use crate::vector::{dist, dot, norm};

/// Balls in a common coordinate space: `(center, radius)`.
pub type BallSet<'a> = [(&'a [f64], f64)];

#[derive(Debug, Clone, PartialEq)]
pub struct PointMinimax {
    pub point: Vec<f64>,
    /// `f(point)` (signed: negative when the point is inside every ball).
    pub value: f64,
    /// Certified `min f` lower bound (up to floating point rounding).
    pub lower_bound: f64,
}

pub fn objective(balls: &BallSet<'_>, p: &[f64]) -> f64 {
    balls
        .iter()
        .map(|(c, r)| dist(p, c) - r)
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Minimize `max_i (|p - c_i| - r_i)` to machine precision.
pub fn minimax_balls(balls: &BallSet<'_>) -> PointMinimax {
    assert!(!balls.is_empty(), "minimax over an empty set of balls");
    let m = balls[0].0.len();
    if balls.len() == 1 {
        let (c, r) = balls[0];
        return PointMinimax {
            point: c.to_vec(),
            value: -r,
            lower_bound: -r,
        };
    }
    if m == 1 {
        return interval_minimax(balls);
    }

    // Normalize to unit scale around the centroid.
    let n = balls.len() as f64;
    let mut centroid = vec![0.0; m];
    for (c, _) in balls {
        for (a, x) in centroid.iter_mut().zip(c.iter()) {
            *a += x / n;
        }
    }
    let scale = balls
        .iter()
        .map(|(c, r)| dist(c, &centroid) + r)
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    let centers: Vec<Vec<f64>> = balls
        .iter()
        .map(|(c, _)| {
            c.iter()
                .zip(&centroid)
                .map(|(x, o)| (x - o) / scale)
                .collect()
        })
        .collect();
    let radii: Vec<f64> = balls.iter().map(|(_, r)| r / scale).collect();
    let local: Vec<(&[f64], f64)> = centers
        .iter()
        .map(|c| c.as_slice())
        .zip(radii.iter().copied())
        .collect();

    let mut p = match exact_support(&local) {
        Some((q, _)) => q,
        None => smoothed_minimizer(&local, m),
    };
    if let Some(q) = kkt_polish(&local, &p) {
        if objective(&local, &q) < objective(&local, &p) {
            p = q;
        }
    }
    // The optimum may sit on a center, where every gradient method stalls.
    for (c, _) in &local {
        if objective(&local, c) < objective(&local, &p) {
            p = c.to_vec();
        }
    }
    let value = objective(&local, &p);
    let floor = local
        .iter()
        .map(|(_, r)| -r)
        .fold(f64::NEG_INFINITY, f64::max);
    let lower = dual_lower_bound(&local, &p, value).max(floor).min(value);

    let point: Vec<f64> = p
        .iter()
        .zip(&centroid)
        .map(|(x, o)| x * scale + o)
        .collect();
    // Re-evaluate in original coordinates; keep the bound consistent.
    let value_orig = objective(balls, &point);
    let lower_orig = (lower * scale).min(value_orig);
    PointMinimax {
        point,
        value: value_orig,
        lower_bound: lower_orig,
    }
}

/// Minimizer and value without a certified bound; the fast path used when
/// only the optimum itself matters.
pub fn minimax_point(balls: &BallSet<'_>) -> (Vec<f64>, f64) {
    assert!(!balls.is_empty(), "minimax over an empty set of balls");
    let m = balls[0].0.len();
    if balls.len() == 1 {
        return (balls[0].0.to_vec(), -balls[0].1);
    }
    if m == 1 {
        let s = interval_minimax(balls);
        return (s.point, s.value);
    }
    if let Some((p, v)) = exact_support(balls) {
        return (p, v);
    }
    let s = minimax_balls(balls);
    (s.point, s.value)
}

/// Candidate optima supported by the balls in `set`: points `p` in the
/// affine hull of their centers with `|p - c_i| - r_i` equal across the set.
///
/// Writing `p = c_0 + A mu`, the differences of the squared equations are
/// linear in `(mu, t)`, which leaves one quadratic in `t`.
fn support_candidates(balls: &BallSet<'_>, set: &[usize], out: &mut Vec<Vec<f64>>) {
    let (c0, r0) = balls[set[0]];
    if set.len() == 1 {
        out.push(c0.to_vec());
        return;
    }
    let s = set.len() - 1;
    let cols: Vec<Vec<f64>> = set[1..]
        .iter()
        .map(|&i| balls[i].0.iter().zip(c0).map(|(a, b)| a - b).collect())
        .collect();
    let g = DMatrix::from_fn(s, s, |i, j| dot(&cols[i], &cols[j]));
    let scale = (0..s).map(|i| g[(i, i)]).fold(0.0, f64::max);
    let Some(ginv) = g.clone().try_inverse() else {
        return;
    };
    // Reject nearly dependent supports; another subset carries the optimum.
    if g.determinant().abs() <= 1e-12 * scale.powi(s as i32) {
        return;
    }
    let b = DVector::from_iterator(
        s,
        set[1..]
            .iter()
            .zip(&cols)
            .map(|(&i, a)| dot(a, a) - (balls[i].1 * balls[i].1 - r0 * r0)),
    );
    let delta = DVector::from_iterator(s, set[1..].iter().map(|&i| balls[i].1 - r0));
    let mu0 = &ginv * b * 0.5;
    let mu1 = -(&ginv * delta);
    let gm0 = &g * &mu0;
    let gm1 = &g * &mu1;
    let qa = mu1.dot(&gm1) - 1.0;
    let qb = 2.0 * (mu0.dot(&gm1) - r0);
    let qc = mu0.dot(&gm0) - r0 * r0;
    let mut roots: Vec<f64> = Vec::with_capacity(2);
    if qa.abs() <= 1e-14 * (qb.abs() + qc.abs()).max(1.0) {
        if qb != 0.0 {
            roots.push(-qc / qb);
        }
    } else {
        let disc = qb * qb - 4.0 * qa * qc;
        if disc < -1e-12 * (qb * qb).max(1e-300) {
            return;
        }
        let sq = disc.max(0.0).sqrt();
        // Cancellation-free pair of roots.
        let q = -0.5 * (qb + qb.signum() * sq);
        if q != 0.0 {
            roots.push(q / qa);
            roots.push(qc / q);
        } else {
            roots.push(-qb / (2.0 * qa));
        }
    }
    for t in roots {
        if !t.is_finite() || t + r0 < -1e-12 {
            continue;
        }
        let mu = &mu0 + &mu1 * t;
        let mut p = c0.to_vec();
        for (a, w) in cols.iter().zip(mu.iter()) {
            for (x, y) in p.iter_mut().zip(a) {
                *x += w * y;
            }
        }
        out.push(p);
    }
}

/// Exact minimax by an active-set loop: solve exactly over a small working
/// set by enumerating supports of at most `m + 1` balls, then add the most
/// violated ball and keep only the support.
fn exact_support(balls: &BallSet<'_>) -> Option<(Vec<f64>, f64)> {
    let n = balls.len();
    let m = balls[0].0.len();
    let scale = balls
        .iter()
        .map(|(c, r)| norm(c) + r.abs())
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    let mut centroid = vec![0.0; m];
    for (c, _) in balls {
        for (a, x) in centroid.iter_mut().zip(c.iter()) {
            *a += x / n as f64;
        }
    }
    let first = (0..n)
        .max_by(|&a, &b| {
            let ga = dist(&centroid, balls[a].0) - balls[a].1;
            let gb = dist(&centroid, balls[b].0) - balls[b].1;
            ga.partial_cmp(&gb).unwrap().then(b.cmp(&a))
        })
        .unwrap();
    let mut work = vec![first];
    let mut cands: Vec<Vec<f64>> = Vec::new();
    for _ in 0..(4 * n + 16) {
        let restricted: Vec<(&[f64], f64)> = work.iter().map(|&i| balls[i]).collect();
        let mut best: Option<(f64, Vec<f64>, Vec<usize>)> = None;
        let w = work.len();
        for mask in 1u32..(1 << w) {
            if mask.count_ones() as usize > m + 1 {
                continue;
            }
            let set: Vec<usize> = (0..w).filter(|&j| mask & (1 << j) != 0).collect();
            cands.clear();
            support_candidates(&restricted, &set, &mut cands);
            for p in cands.drain(..) {
                let v = objective(&restricted, &p);
                if best.as_ref().is_none_or(|(bv, _, _)| v < *bv) {
                    best = Some((v, p, set.iter().map(|&j| work[j]).collect()));
                }
            }
        }
        let (v, p, support) = best?;
        let (worst, j) = (0..n)
            .map(|i| (dist(&p, balls[i].0) - balls[i].1, i))
            .fold((f64::NEG_INFINITY, 0), |a, b| if b.0 > a.0 { b } else { a });
        if worst <= v + 1e-14 * scale || work.contains(&j) {
            return Some((p, worst.max(v)));
        }
        work = support;
        work.push(j);
    }
    None
}

/// Exact solution on the line: `f(p) = max(p - U, L - p)`.
fn interval_minimax(balls: &BallSet<'_>) -> PointMinimax {
    let lo = balls
        .iter()
        .map(|(c, r)| c[0] - r)
        .fold(f64::NEG_INFINITY, f64::max);
    let hi = balls
        .iter()
        .map(|(c, r)| c[0] + r)
        .fold(f64::INFINITY, f64::min);
    let p = 0.5 * (lo + hi);
    let value = 0.5 * (lo - hi);
    PointMinimax {
        point: vec![p],
        value,
        lower_bound: value,
    }
}

const NORM_EPS: f64 = 1e-13;

fn smoothed_minimizer(balls: &BallSet<'_>, m: usize) -> Vec<f64> {
    // Start at the center of the ball with the largest f-contribution drop:
    // the origin (centroid) is a fine start after normalization.
    let mut p = vec![0.0; m];
    let mut mu = 0.1;
    while mu >= 1e-9 {
        newton_smoothed(balls, &mut p, mu);
        mu *= 0.1;
    }
    p
}

/// Log-sum-exp value, gradient and Hessian of `g_i = sqrt(|p-c_i|^2 + eps^2) - r_i`.
fn smoothed_parts(balls: &BallSet<'_>, p: &[f64], mu: f64) -> (f64, DVector<f64>, DMatrix<f64>) {
    let m = p.len();
    let g: Vec<f64> = balls
        .iter()
        .map(|(c, r)| {
            (p.iter()
                .zip(c.iter())
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                + NORM_EPS * NORM_EPS)
                .sqrt()
                - r
        })
        .collect();
    let gmax = g.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = g.iter().map(|x| ((x - gmax) / mu).exp()).collect();
    let z: f64 = w.iter().sum();
    let value = gmax + mu * z.ln();
    let mut grad = DVector::zeros(m);
    let mut hess = DMatrix::zeros(m, m);
    let mut us = Vec::with_capacity(balls.len());
    for (i, (c, r)) in balls.iter().enumerate() {
        let wi = w[i] / z;
        let rho = g[i] + r;
        let u = DVector::from_iterator(m, p.iter().zip(c.iter()).map(|(a, b)| (a - b) / rho));
        grad.axpy(wi, &u, 1.0);
        // (I - u u^T) / rho
        let mut h = DMatrix::identity(m, m);
        h.ger(-1.0, &u, &u, 1.0);
        hess += h * (wi / rho);
        us.push((wi, u));
    }
    for (wi, u) in &us {
        hess.ger(wi / mu, u, u, 1.0);
    }
    hess.ger(-1.0 / mu, &grad, &grad, 1.0);
    (value, grad, hess)
}

fn newton_smoothed(balls: &BallSet<'_>, p: &mut Vec<f64>, mu: f64) {
    let m = p.len();
    for _ in 0..60 {
        let (v, g, mut h) = smoothed_parts(balls, p, mu);
        // Levenberg safeguard keeps the step a descent direction.
        for i in 0..m {
            h[(i, i)] += 1e-12;
        }
        let step = match h.clone().cholesky() {
            Some(ch) => ch.solve(&g),
            None => g.clone(),
        };
        let decrement = g.dot(&step);
        if !(decrement > 1e-24) {
            break;
        }
        let mut t = 1.0;
        let mut improved = false;
        for _ in 0..50 {
            let trial: Vec<f64> = p.iter().zip(step.iter()).map(|(a, s)| a - t * s).collect();
            let (tv, _, _) = smoothed_parts(balls, &trial, mu);
            if tv <= v - 0.25 * t * decrement {
                *p = trial;
                improved = true;
                break;
            }
            t *= 0.5;
        }
        if !improved || decrement < 1e-22 {
            break;
        }
    }
}

/// Newton on `g_i(p) = t (i in A)`, `sum l_i u_i = 0`, `sum l_i = 1`.
fn kkt_polish(balls: &BallSet<'_>, p0: &[f64]) -> Option<Vec<f64>> {
    let m = p0.len();
    let f0 = objective(balls, p0);
    let mut order: Vec<usize> = (0..balls.len()).collect();
    let gap = |p: &[f64], i: usize| dist(p, balls[i].0) - balls[i].1;
    order.sort_by(|&a, &b| {
        gap(p0, b)
            .partial_cmp(&gap(p0, a))
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let mut best: Option<(f64, Vec<f64>)> = None;
    // Try a few active-set sizes; the smoothed solution is accurate enough
    // that the true active set is a prefix of this ordering.
    for size in 1..=(m + 1).min(balls.len()) {
        let active = &order[..size];
        if gap(p0, active[size - 1]) < f0 - 1e-3 {
            break;
        }
        if let Some(q) = kkt_newton(balls, active, p0) {
            let fq = objective(balls, &q);
            if best.as_ref().map(|(v, _)| fq < *v).unwrap_or(true) {
                best = Some((fq, q));
            }
        }
    }
    best.map(|(_, q)| q)
}

fn kkt_newton(balls: &BallSet<'_>, active: &[usize], p0: &[f64]) -> Option<Vec<f64>> {
    let m = p0.len();
    let a = active.len();
    let dimz = m + 1 + a;
    let mut p = p0.to_vec();
    let mut t = active
        .iter()
        .map(|&i| dist(&p, balls[i].0) - balls[i].1)
        .fold(f64::NEG_INFINITY, f64::max);
    let mut lambda = initial_multipliers(balls, active, &p);
    let residual = |p: &[f64], t: f64, lambda: &[f64]| -> Option<(DVector<f64>, DMatrix<f64>)> {
        let mut res = DVector::zeros(dimz);
        let mut jac = DMatrix::zeros(dimz, dimz);
        let mut sum_lu = vec![0.0; m];
        for (row, &i) in active.iter().enumerate() {
            let (c, r) = balls[i];
            let diff: Vec<f64> = p.iter().zip(c.iter()).map(|(x, y)| x - y).collect();
            let rho = norm(&diff);
            if rho < 1e-14 {
                return None;
            }
            let u: Vec<f64> = diff.iter().map(|x| x / rho).collect();
            res[row] = rho - r - t;
            for j in 0..m {
                jac[(row, j)] = u[j];
            }
            jac[(row, m)] = -1.0;
            for j in 0..m {
                sum_lu[j] += lambda[row] * u[j];
                // d(l u)/dp = l (I - u u^T) / rho
                for k in 0..m {
                    let e = if j == k { 1.0 } else { 0.0 };
                    jac[(a + j, k)] += lambda[row] * (e - u[j] * u[k]) / rho;
                }
                jac[(a + j, m + 1 + row)] = u[j];
            }
            jac[(a + m, m + 1 + row)] = 1.0;
        }
        for j in 0..m {
            res[a + j] = sum_lu[j];
        }
        res[a + m] = lambda.iter().sum::<f64>() - 1.0;
        Some((res, jac))
    };
    let mut last = f64::INFINITY;
    for _ in 0..40 {
        let (res, jac) = residual(&p, t, &lambda)?;
        let rn = res.norm();
        if rn < 1e-15 {
            break;
        }
        if rn > last * 0.999 && rn < 1e-12 {
            break;
        }
        last = rn;
        let svd = jac.svd(true, true);
        let step = svd.solve(&res, 1e-13).ok()?;
        for j in 0..m {
            p[j] -= step[j];
        }
        t -= step[m];
        for j in 0..a {
            lambda[j] -= step[m + 1 + j];
        }
        if !p.iter().all(|x| x.is_finite()) {
            return None;
        }
    }
    if lambda.iter().any(|&l| l < -1e-9) {
        return None;
    }
    Some(p)
}

fn initial_multipliers(balls: &BallSet<'_>, active: &[usize], p: &[f64]) -> Vec<f64> {
    let us: Vec<Vec<f64>> = active.iter().map(|&i| unit_from(balls[i].0, p)).collect();
    min_norm_weights(&us)
}

fn unit_from(c: &[f64], p: &[f64]) -> Vec<f64> {
    let diff: Vec<f64> = p.iter().zip(c).map(|(a, b)| a - b).collect();
    let n = norm(&diff);
    if n > 0.0 {
        diff.iter().map(|x| x / n).collect()
    } else {
        vec![0.0; p.len()]
    }
}

/// Certified lower bound on `min f` from the point `p` (see module docs).
pub fn dual_lower_bound(balls: &BallSet<'_>, p: &[f64], fp: f64) -> f64 {
    let gaps: Vec<f64> = balls.iter().map(|(c, r)| dist(p, c) - r).collect();
    // |q* - p| <= |p - c_i| + r_i + f(p) for every i.
    let reach = balls
        .iter()
        .map(|(c, r)| dist(p, c) + r + fp)
        .fold(f64::INFINITY, f64::min)
        .max(0.0);
    let mut best = f64::NEG_INFINITY;
    for delta in [0.0, 1e-12, 1e-10, 1e-8, 1e-6, 1e-4, 1e-2, f64::INFINITY] {
        let cand: Vec<usize> = (0..balls.len())
            .filter(|&i| gaps[i] >= fp - delta)
            .collect();
        if cand.is_empty() {
            continue;
        }
        let us: Vec<Vec<f64>> = cand.iter().map(|&i| unit_from(balls[i].0, p)).collect();
        let lambda = min_norm_weights(&us);
        let m = p.len();
        let mut w = vec![0.0; m];
        let mut lin = 0.0;
        for (l, (&i, u)) in lambda.iter().zip(cand.iter().zip(&us)) {
            lin += l * gaps[i];
            for j in 0..m {
                w[j] += l * u[j];
            }
        }
        let bound = lin - norm(&w) * reach;
        best = best.max(bound);
    }
    best
}

/// Simplex weights of the minimum-norm point of `conv(points)` (Wolfe's
/// algorithm).
pub fn min_norm_weights(points: &[Vec<f64>]) -> Vec<f64> {
    let n = points.len();
    assert!(n > 0);
    let m = points[0].len();
    let scale = points
        .iter()
        .map(|p| dot(p, p))
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    let tol = 1e-15 * scale;
    let first = (0..n)
        .min_by(|&a, &b| {
            dot(&points[a], &points[a])
                .partial_cmp(&dot(&points[b], &points[b]))
                .unwrap()
        })
        .unwrap();
    let mut set = vec![first];
    let mut lambda = vec![1.0];
    let combine = |set: &[usize], lambda: &[f64]| {
        let mut x = vec![0.0; m];
        for (&i, &l) in set.iter().zip(lambda) {
            for j in 0..m {
                x[j] += l * points[i][j];
            }
        }
        x
    };
    for _major in 0..(10 * n + 10) {
        let x = combine(&set, &lambda);
        let xx = dot(&x, &x);
        let (jstar, best) = (0..n)
            .map(|i| (i, dot(&x, &points[i])))
            .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
            .unwrap();
        if best >= xx - tol || set.contains(&jstar) || set.len() > m + 1 {
            break;
        }
        set.push(jstar);
        lambda.push(0.0);
        for _minor in 0..(n + 5) {
            let Some(alpha) = affine_min_norm(points, &set) else {
                break;
            };
            if alpha.iter().all(|&a| a > 1e-14) {
                lambda = alpha;
                break;
            }
            let mut theta = 1.0f64;
            for (l, a) in lambda.iter().zip(&alpha) {
                if *a <= 1e-14 && l - a > 0.0 {
                    theta = theta.min(l / (l - a));
                }
            }
            for (l, a) in lambda.iter_mut().zip(&alpha) {
                *l = (1.0 - theta) * *l + theta * a;
            }
            let mut keep_set = Vec::new();
            let mut keep_l = Vec::new();
            for (&i, &l) in set.iter().zip(&lambda) {
                if l > 1e-14 {
                    keep_set.push(i);
                    keep_l.push(l);
                }
            }
            if keep_set.is_empty() {
                keep_set.push(set[0]);
                keep_l.push(1.0);
            }
            let s: f64 = keep_l.iter().sum();
            set = keep_set;
            lambda = keep_l.iter().map(|l| l / s).collect();
        }
    }
    let mut out = vec![0.0; n];
    for (&i, &l) in set.iter().zip(&lambda) {
        out[i] += l.max(0.0);
    }
    let s: f64 = out.iter().sum();
    out.iter().map(|l| l / s).collect()
}

/// Weights of the minimum-norm point of the affine hull of `points[set]`.
fn affine_min_norm(points: &[Vec<f64>], set: &[usize]) -> Option<Vec<f64>> {
    let s = set.len();
    let mut a = DMatrix::zeros(s + 1, s + 1);
    let mut b = DVector::zeros(s + 1);
    for (r, &i) in set.iter().enumerate() {
        for (c, &j) in set.iter().enumerate() {
            a[(r, c)] = dot(&points[i], &points[j]);
        }
        a[(r, s)] = 1.0;
        a[(s, r)] = 1.0;
    }
    b[s] = 1.0;
    let sol = a.svd(true, true).solve(&b, 1e-14).ok()?;
    let alpha: Vec<f64> = (0..s).map(|i| sol[i]).collect();
    let total: f64 = alpha.iter().sum();
    if !total.is_finite() || total.abs() < 1e-300 {
        return None;
    }
    Some(alpha.iter().map(|x| x / total).collect())
}

/// Point minimax over members that are unions of balls: each member
/// contributes `min over its parts`.
#[derive(Debug, Clone, PartialEq)]
pub struct UnionMinimax {
    pub point: Vec<f64>,
    pub value: f64,
    /// Certified lower bound when the part selections were enumerated.
    pub lower_bound: Option<f64>,
}

/// Largest number of part selections enumerated exactly.
pub const ENUMERATION_CAP: usize = 4096;

pub fn union_objective(members: &[Vec<(&[f64], f64)>], p: &[f64]) -> f64 {
    members
        .iter()
        .map(|parts| {
            parts
                .iter()
                .map(|(c, r)| dist(p, c) - r)
                .fold(f64::INFINITY, f64::min)
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

pub fn minimax_unions(members: &[Vec<(&[f64], f64)>]) -> UnionMinimax {
    minimax_unions_with(members, true)
}

/// As [`minimax_unions`]; without `need_bound` no lower bound is computed.
pub fn minimax_unions_with(members: &[Vec<(&[f64], f64)>], need_bound: bool) -> UnionMinimax {
    assert!(!members.is_empty());
    if members.iter().all(|m| m.len() == 1) {
        let balls: Vec<(&[f64], f64)> = members.iter().map(|m| m[0]).collect();
        let s = solve_selection(&balls, need_bound);
        return UnionMinimax {
            point: s.point,
            value: s.value,
            lower_bound: need_bound.then_some(s.lower_bound),
        };
    }
    let product = members.iter().try_fold(1usize, |acc, m| {
        acc.checked_mul(m.len()).filter(|&v| v <= ENUMERATION_CAP)
    });
    match product {
        Some(_) => enumerate_selections(members, need_bound),
        None => alternate_selections(members),
    }
}

fn solve_selection(balls: &BallSet<'_>, need_bound: bool) -> PointMinimax {
    if need_bound {
        minimax_balls(balls)
    } else {
        let (point, value) = minimax_point(balls);
        PointMinimax {
            point,
            value,
            lower_bound: f64::NEG_INFINITY,
        }
    }
}

fn enumerate_selections(members: &[Vec<(&[f64], f64)>], need_bound: bool) -> UnionMinimax {
    let mut idx = vec![0usize; members.len()];
    let mut best: Option<PointMinimax> = None;
    let mut lower = f64::INFINITY;
    loop {
        let balls: Vec<(&[f64], f64)> = members.iter().zip(&idx).map(|(m, &i)| m[i]).collect();
        let s = solve_selection(&balls, need_bound);
        lower = lower.min(s.lower_bound);
        if best.as_ref().map(|b| s.value < b.value).unwrap_or(true) {
            best = Some(s);
        }
        // odometer
        let mut pos = 0;
        loop {
            if pos == idx.len() {
                let b = best.expect("at least one selection");
                let value = union_objective(members, &b.point);
                let lower_bound = need_bound.then_some(lower.min(value));
                return UnionMinimax {
                    point: b.point,
                    value,
                    lower_bound,
                };
            }
            idx[pos] += 1;
            if idx[pos] < members[pos].len() {
                break;
            }
            idx[pos] = 0;
            pos += 1;
        }
    }
}

/// Local heuristic: fix the nearest part of every member, solve, repeat.
fn alternate_selections(members: &[Vec<(&[f64], f64)>]) -> UnionMinimax {
    let mut best: Option<(f64, Vec<f64>)> = None;
    // Starts: the core-like first part of every member.
    let starts: Vec<Vec<f64>> = members.iter().take(8).map(|m| m[0].0.to_vec()).collect();
    for start in starts {
        let mut p = start;
        let mut last_sel: Vec<usize> = Vec::new();
        for _ in 0..30 {
            let sel: Vec<usize> = members
                .iter()
                .map(|parts| {
                    (0..parts.len())
                        .min_by(|&a, &b| {
                            let ga = dist(&p, parts[a].0) - parts[a].1;
                            let gb = dist(&p, parts[b].0) - parts[b].1;
                            ga.partial_cmp(&gb).unwrap()
                        })
                        .unwrap()
                })
                .collect();
            if sel == last_sel {
                break;
            }
            let balls: Vec<(&[f64], f64)> = members.iter().zip(&sel).map(|(m, &i)| m[i]).collect();
            p = minimax_point(&balls).0;
            last_sel = sel;
        }
        let v = union_objective(members, &p);
        if best.as_ref().map(|(bv, _)| v < *bv).unwrap_or(true) {
            best = Some((v, p));
        }
    }
    let (value, point) = best.expect("nonempty");
    UnionMinimax {
        point,
        value,
        lower_bound: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn disjoint_pair_has_half_gap() {
        let a = [0.0, 0.0];
        let b = [5.0, 0.0];
        let s = minimax_balls(&[(&a[..], 1.0), (&b[..], 1.0)]);
        assert!((s.value - 1.5).abs() < 1e-12, "{s:?}");
        assert!((s.lower_bound - 1.5).abs() < 1e-12, "{s:?}");
    }

    #[test]
    fn three_discs_match_known_optimum() {
        // Equilateral triangle of side 2 with unit radii -> circumradius - 1.
        let h = 3f64.sqrt();
        let pts = [[0.0, 0.0], [2.0, 0.0], [1.0, h]];
        let balls: Vec<(&[f64], f64)> = pts.iter().map(|p| (&p[..], 1.0)).collect();
        let s = minimax_balls(&balls);
        let expected = 2.0 / h - 1.0;
        assert!((s.value - expected).abs() < 1e-12, "{s:?}");
        assert!(
            s.lower_bound <= s.value && s.value - s.lower_bound < 1e-10,
            "{s:?}"
        );
    }

    #[test]
    fn nested_ball_dominates() {
        let a = [0.0, 0.0, 0.0];
        let b = [0.1, 0.0, 0.0];
        let s = minimax_balls(&[(&a[..], 5.0), (&b[..], 0.5)]);
        assert!((s.value + 0.5).abs() < 1e-12, "{s:?}");
    }

    #[test]
    fn min_norm_point_of_segment() {
        let l = min_norm_weights(&[vec![1.0, 1.0], vec![-1.0, 1.0]]);
        assert!((l[0] - 0.5).abs() < 1e-14 && (l[1] - 0.5).abs() < 1e-14);
        let l = min_norm_weights(&[vec![1.0, 0.0], vec![-1.0, 0.0], vec![0.0, 1.0]]);
        let x = l[0] - l[1];
        let y = l[2];
        assert!(x.abs() < 1e-14 && y.abs() < 1e-14);
    }

    #[test]
    fn union_enumeration_picks_best_parts() {
        let a0 = [0.0, 0.0];
        let a1 = [10.0, 0.0];
        let b0 = [10.0, 1.5];
        let members = vec![vec![(&a0[..], 1.0), (&a1[..], 1.0)], vec![(&b0[..], 1.0)]];
        let s = minimax_unions(&members);
        assert!(s.value <= 0.0, "{s:?}");
        assert!(s.lower_bound.unwrap() <= s.value);
    }
}
