use std::f64::consts::FRAC_PI_4;

use super::IndependenceError;
use crate::geometry::{canonicalize_flat, ClosedBall, Cone, KFlat};
use crate::nearball::{nearball_constant, Family, NearBall};
use crate::scalar::Scalar;
use crate::vector::{self, dot, norm, orthogonal_complement};

/// Relative slack on the projected constant.
pub const TAU_PROJ: f64 = 1e-6;

/// Drops the last coordinate of every part center; radii and cores are kept.
pub fn orthogonal_project_family(f: &Family<f64>) -> Result<Family<f64>, IndependenceError> {
    let d = f.dim();
    if d < 2 {
        return Err(IndependenceError::InvalidArgument(
            "orthogonal projection needs d >= 2".into(),
        ));
    }
    let members = f
        .members()
        .iter()
        .map(|m| {
            let parts = m
                .parts()
                .iter()
                .map(|p| ClosedBall::new(p.center()[..d - 1].to_vec(), p.radius()))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(NearBall::new(parts, m.core_index(), m.is_open())?)
        })
        .collect::<Result<Vec<_>, IndependenceError>>()?;
    let g = Family::new(members)?;
    if g.constant() > f.constant() + 1e-12 {
        return Err(IndependenceError::Assertion(format!(
            "projected constant {} exceeds {}",
            g.constant(),
            f.constant()
        )));
    }
    Ok(g)
}

/// Orthonormal coordinates of the hyperplane `<u, z> = 1`, in which `u`
/// itself is the origin. For `u = -e_d` these are the first `d-1` axes.
pub fn tangent_frame(axis: &[f64]) -> Vec<Vec<f64>> {
    orthogonal_complement(axis.len(), std::slice::from_ref(&axis.to_vec()))
}

/// `x / <u, x>` in frame coordinates; `None` unless `<u, x> > 0`.
pub fn central_project_point(x: &[f64], axis: &[f64], frame: &[Vec<f64>]) -> Option<Vec<f64>> {
    let s = dot(x, axis);
    (s > 0.0).then(|| frame.iter().map(|w| dot(x, w) / s).collect())
}

/// Distance in the tangent hyperplane between the image of a center at
/// angle `beta` from the axis and the image of a tangent ray at angle `zeta`
/// from the center direction. `t` is the cosine between the tangent offset
/// and the axis-ward direction.
fn tangent_gap(beta: f64, zeta: f64, t: f64) -> f64 {
    let s = beta.cos() * zeta.cos() + beta.sin() * zeta.sin() * t;
    let v = [
        zeta.cos() / s,
        zeta.sin() * t / s,
        zeta.sin() * (1.0 - t * t).max(0.0).sqrt() / s,
    ];
    let y0 = 1.0 / beta.cos();
    ((v[0] - y0).powi(2) + v[1] * v[1] + v[2] * v[2]).sqrt()
}

/// Extremes of [`tangent_gap`] over the tangent sphere: `t = +-1` in the
/// plane, all of `[-1, 1]` otherwise.
fn gap_extremes(beta: f64, zeta: f64, dim: usize) -> (f64, f64) {
    if dim == 2 {
        let a = tangent_gap(beta, zeta, 1.0);
        let b = tangent_gap(beta, zeta, -1.0);
        return (a.min(b), a.max(b));
    }
    const SAMPLES: usize = 128;
    let ts: Vec<f64> = (0..=SAMPLES)
        .map(|i| -1.0 + 2.0 * i as f64 / SAMPLES as f64)
        .collect();
    let vals: Vec<f64> = ts.iter().map(|&t| tangent_gap(beta, zeta, t)).collect();
    let refine = |sign: f64| -> f64 {
        let (i, _) = vals
            .iter()
            .enumerate()
            .max_by(|a, b| (sign * a.1).partial_cmp(&(sign * b.1)).unwrap())
            .unwrap();
        let (mut lo, mut hi) = (ts[i.saturating_sub(1)], ts[(i + 1).min(SAMPLES)]);
        let g = |t: f64| sign * tangent_gap(beta, zeta, t);
        let phi = (5f64.sqrt() - 1.0) / 2.0;
        for _ in 0..80 {
            let a = hi - phi * (hi - lo);
            let b = lo + phi * (hi - lo);
            if g(a) > g(b) {
                hi = b;
            } else {
                lo = a;
            }
        }
        let best = g(0.5 * (lo + hi)).max(sign * vals[i]);
        sign * best
    };
    (refine(-1.0), refine(1.0))
}

/// Image of one member: the projected core center with the inscribed ball of
/// the core's image and the smallest concentric ball holding the escribed
/// ball's image.
fn project_member(
    m: &NearBall<f64>,
    axis: &[f64],
    frame: &[Vec<f64>],
) -> Result<NearBall<f64>, IndependenceError> {
    let x = m.center();
    let nx = norm(x);
    let beta = vector::angle_between(x, axis);
    let zeta_in = (m.r_in() / nx).asin();
    let zeta_esc = (m.r_esc() / nx).asin();
    let (r_min, _) = gap_extremes(beta, zeta_in, x.len());
    let (_, r_max) = gap_extremes(beta, zeta_esc, x.len());
    let y = central_project_point(x, axis, frame).ok_or_else(|| {
        IndependenceError::PreconditionViolated("member behind the projection center".into())
    })?;
    let parts = vec![
        ClosedBall::new(y.clone(), r_min)?,
        ClosedBall::new(y, r_max.max(r_min))?,
    ];
    Ok(NearBall::new(parts, 0, m.is_open())?)
}

/// Central projection from the origin onto the hyperplane tangent to the
/// unit sphere at the cone axis.
///
/// Every escribed ball must lie strictly inside `cone`, whose aperture may
/// not exceed pi/4.
pub fn central_project_family(
    f: &Family<f64>,
    cone: &Cone<f64>,
) -> Result<Family<f64>, IndependenceError> {
    let d = f.dim();
    if d < 2 || cone.dim() != d {
        return Err(IndependenceError::InvalidArgument(
            "central projection needs d >= 2 and a matching cone".into(),
        ));
    }
    if cone.aperture() > FRAC_PI_4 + f64::GEO_TOL {
        return Err(IndependenceError::InvalidArgument(
            "cone aperture exceeds pi/4".into(),
        ));
    }
    let axis = cone.axis();
    let frame = tangent_frame(axis);
    let mut members = Vec::with_capacity(f.len());
    for (i, m) in f.members().iter().enumerate() {
        let esc = ClosedBall::new(m.center().to_vec(), m.r_esc())?;
        let inside = cone
            .ball_angle(&esc)
            .is_some_and(|a| a < cone.aperture() - f64::GEO_TOL);
        if !inside {
            return Err(IndependenceError::PreconditionViolated(format!(
                "member {i} leaves the cone"
            )));
        }
        let p = project_member(m, axis, &frame)?;
        let ratio = m.r_esc() / m.r_in();
        let projected = p.r_esc() / p.r_in();
        if projected > 2f64.sqrt() * ratio * (1.0 + TAU_PROJ) {
            return Err(IndependenceError::Assertion(format!(
                "member {i}: ratio {projected} above sqrt(2) * {ratio}"
            )));
        }
        members.push(p);
    }
    let g = Family::new(members)?;
    let bound = 2f64.sqrt() * nearball_constant(f).k * (1.0 + TAU_PROJ);
    if g.constant() > bound {
        return Err(IndependenceError::Assertion(format!(
            "projected constant {} above {bound}",
            g.constant()
        )));
    }
    Ok(g)
}

/// Image of a flat through the origin: its trace on the tangent hyperplane,
/// one dimension lower.
pub fn central_project_flat(
    flat: &KFlat<f64>,
    axis: &[f64],
) -> Result<KFlat<f64>, IndependenceError> {
    let k = flat.dim_flat();
    if k == 0 || norm(flat.anchor()) > f64::GEO_TOL * 1e3 {
        return Err(IndependenceError::InvalidArgument(
            "need a flat of dimension >= 1 through the origin".into(),
        ));
    }
    let v = flat.basis();
    let w: Vec<f64> = v.iter().map(|b| dot(b, axis)).collect();
    let ww = dot(&w, &w);
    if ww.sqrt() <= f64::GEO_TOL {
        return Err(IndependenceError::InvalidArgument(
            "flat is parallel to the tangent hyperplane".into(),
        ));
    }
    let mut p = vec![0.0; axis.len()];
    for (b, wi) in v.iter().zip(&w) {
        vector::axpy(&mut p, wi / ww, b);
    }
    let inner = orthogonal_complement(k, std::slice::from_ref(&w));
    let dirs: Vec<Vec<f64>> = inner
        .iter()
        .map(|a| {
            let mut d = vec![0.0; axis.len()];
            for (b, ai) in v.iter().zip(a) {
                vector::axpy(&mut d, *ai, b);
            }
            d
        })
        .collect();
    let frame = tangent_frame(axis);
    let to_frame = |z: &[f64]| -> Vec<f64> { frame.iter().map(|e| dot(z, e)).collect() };
    let anchor = to_frame(&p);
    let spanning: Vec<Vec<f64>> = dirs.iter().map(|d| to_frame(d)).collect();
    Ok(canonicalize_flat(&anchor, &spanning)?)
}
