//! Seeded random near-balls and families.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::ConstructionError;
use crate::geometry::ClosedBall;
use crate::nearball::{Family, NearBall};
use crate::vector::{self, dot};

pub fn random_unit(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        if let Some(u) = vector::normalized(&v) {
            return u;
        }
    }
}

/// Unit vector orthogonal to the unit vector `axis`.
pub fn random_orthogonal_unit(rng: &mut ChaCha8Rng, axis: &[f64]) -> Vec<f64> {
    loop {
        let v = random_unit(rng, axis.len());
        let w = vector::residual(&v, std::slice::from_ref(&axis.to_vec()));
        if let Some(u) = vector::normalized(&w) {
            if vector::norm(&w) > 1e-6 {
                return u;
            }
        }
    }
}

/// Unit vector at angle exactly `angle` from the unit vector `axis`.
pub fn direction_at_angle(rng: &mut ChaCha8Rng, axis: &[f64], angle: f64) -> Vec<f64> {
    let w = random_orthogonal_unit(rng, axis);
    axis.iter()
        .zip(&w)
        .map(|(a, b)| angle.cos() * a + angle.sin() * b)
        .collect()
}

/// Core `B(center, r_in)` plus `extra` balls inside `B(center, r_esc)`; the
/// first extra ball reaches the escribed sphere.
pub fn random_nearball(
    rng: &mut ChaCha8Rng,
    center: &[f64],
    r_in: f64,
    r_esc: f64,
    extra: usize,
    open: bool,
) -> Result<NearBall<f64>, ConstructionError> {
    if !(r_in > 0.0 && r_esc >= r_in) {
        return Err(ConstructionError::InvalidArgument(
            "need 0 < r_in <= r_esc".into(),
        ));
    }
    let mut parts = vec![ClosedBall::new(center.to_vec(), r_in)?];
    for j in 0..extra {
        let rho = r_in * (0.05 + 0.95 * rng.random::<f64>());
        let reach = if j == 0 {
            r_esc - rho
        } else {
            (r_esc - rho) * rng.random::<f64>()
        };
        let u = random_unit(rng, center.len());
        let mut c = center.to_vec();
        vector::axpy(&mut c, reach.max(0.0), &u);
        parts.push(ClosedBall::new(c, rho)?);
    }
    Ok(NearBall::new(parts, 0, open)?)
}

/// Largest escribed radius allowed by the constant `k` for inscribed radius `r`.
pub fn max_escribed(k: f64, r: f64) -> f64 {
    (k * r).min(k + r)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RandomFamilySpec {
    pub dim: usize,
    pub members: usize,
    /// Extra parts per member, drawn from `0..=max_extra`.
    pub max_extra: usize,
    /// Upper bound on the family constant.
    pub k_bound: f64,
    /// Core centers are drawn from `[-spread, spread]^d`.
    pub spread: f64,
    pub r_range: (f64, f64),
    pub open: bool,
}

impl Default for RandomFamilySpec {
    fn default() -> Self {
        Self {
            dim: 2,
            members: 5,
            max_extra: 2,
            k_bound: 3.0,
            spread: 5.0,
            r_range: (0.1, 1.0),
            open: false,
        }
    }
}

pub fn random_family(
    spec: &RandomFamilySpec,
    rng: &mut ChaCha8Rng,
) -> Result<Family<f64>, ConstructionError> {
    if spec.dim == 0 || spec.members == 0 || !(spec.k_bound >= 1.0) || !(spec.r_range.0 > 0.0) {
        return Err(ConstructionError::InvalidArgument(
            "bad random family spec".into(),
        ));
    }
    let members = (0..spec.members)
        .map(|_| {
            let c: Vec<f64> = (0..spec.dim)
                .map(|_| rng.random_range(-spec.spread..=spec.spread))
                .collect();
            let r = rng.random_range(spec.r_range.0..=spec.r_range.1);
            let extra = rng.random_range(0..=spec.max_extra);
            let esc = if extra == 0 {
                r
            } else {
                r + (max_escribed(spec.k_bound, r) - r) * rng.random::<f64>()
            };
            random_nearball(rng, &c, r, esc, extra, spec.open)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Family::new(members)?)
}

/// Angle between `x` and the unit vector `axis`.
pub fn angle_to_axis(x: &[f64], axis: &[f64]) -> f64 {
    let along = dot(x, axis);
    let perp = vector::norm(&vector::residual(x, std::slice::from_ref(&axis.to_vec())));
    perp.atan2(along)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn random_family_respects_the_constant() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let f = random_family(
                &RandomFamilySpec {
                    k_bound: 2.5,
                    ..Default::default()
                },
                &mut rng,
            )
            .unwrap();
            assert!(f.constant() <= 2.5 + 1e-12, "{}", f.constant());
        }
    }

    #[test]
    fn direction_at_angle_is_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let axis = [0.0, 0.0, -1.0];
        let u = direction_at_angle(&mut rng, &axis, 0.3);
        assert!((angle_to_axis(&u, &axis) - 0.3).abs() < 1e-14);
        assert!((vector::norm(&u) - 1.0).abs() < 1e-15);
    }
}
