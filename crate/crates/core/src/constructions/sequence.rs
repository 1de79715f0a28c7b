use super::{dist_point_union, unions_disjoint, ConstructionError};
use crate::nearball::{Family, NearBall};
use crate::vector::dist;

/// Answers "a member with core center in the open ball `B(x, delta)`,
/// inscribed radius below `delta`, not containing `x`".
pub trait NeighborhoodSampler {
    fn sample(&mut self, x: &[f64], delta: f64) -> Option<NearBall<f64>>;
}

/// Serves members of a family in order, each at most once.
#[derive(Debug, Clone)]
pub struct FamilySampler<'a> {
    family: &'a Family<f64>,
    used: Vec<bool>,
}

impl<'a> FamilySampler<'a> {
    pub fn new(family: &'a Family<f64>) -> Self {
        Self {
            family,
            used: vec![false; family.len()],
        }
    }
}

impl NeighborhoodSampler for FamilySampler<'_> {
    fn sample(&mut self, x: &[f64], delta: f64) -> Option<NearBall<f64>> {
        let i = self
            .family
            .members()
            .iter()
            .enumerate()
            .position(|(i, m)| {
                !self.used[i]
                    && dist(m.center(), x) < delta
                    && m.r_in() < delta
                    && dist_point_union(x, m) > 0.0
            })?;
        self.used[i] = true;
        Some(self.family.members()[i].clone())
    }
}

/// Pairwise disjoint members accumulating at `x`.
///
/// Starts with `delta = 1`; after taking a member at distance `eps` from
/// `x`, the next query uses `delta = eps / (10 K)`.
pub fn disjoint_sequence_builder<S: NeighborhoodSampler>(
    sampler: &mut S,
    x: &[f64],
    k_const: f64,
    target_len: usize,
) -> Result<Vec<NearBall<f64>>, ConstructionError> {
    if !(k_const >= 1.0) {
        return Err(ConstructionError::InvalidArgument(
            "K must be at least 1".into(),
        ));
    }
    let mut out: Vec<NearBall<f64>> = Vec::with_capacity(target_len);
    let mut delta = 1.0;
    let mut last_eps = f64::INFINITY;
    while out.len() < target_len {
        let b = sampler
            .sample(x, delta)
            .ok_or(ConstructionError::SamplerExhausted { found: out.len() })?;
        let eps = dist_point_union(x, &b);
        if !(eps > 0.0 && eps < last_eps) {
            return Err(ConstructionError::InvariantViolated(format!(
                "member {} is not closer to x",
                out.len()
            )));
        }
        if let Some(j) = out.iter().position(|prev| !unions_disjoint(prev, &b)) {
            return Err(ConstructionError::InvariantViolated(format!(
                "members {j} and {} meet",
                out.len()
            )));
        }
        out.push(b);
        last_eps = eps;
        delta = eps / (10.0 * k_const);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn geometric(m: usize) -> Family<f64> {
        Family::new(
            (1..=m)
                .map(|i| {
                    NearBall::ball(vec![0.5f64.powi(i as i32), 0.0], 0.125f64.powi(i as i32))
                        .unwrap()
                })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn builds_five_disjoint_members() {
        let f = geometric(60);
        let seq =
            disjoint_sequence_builder(&mut FamilySampler::new(&f), &[0.0, 0.0], 1.0, 5).unwrap();
        assert_eq!(seq.len(), 5);
        for (i, a) in seq.iter().enumerate() {
            for b in &seq[i + 1..] {
                assert!(dist(a.center(), b.center()) > a.r_in() + b.r_in());
            }
        }
    }

    #[test]
    fn members_containing_x_exhaust_the_sampler() {
        let f = Family::new(
            (1..=10)
                .map(|i| NearBall::ball(vec![0.0, 0.0], 1.0 / i as f64).unwrap())
                .collect(),
        )
        .unwrap();
        let r = disjoint_sequence_builder(&mut FamilySampler::new(&f), &[0.0, 0.0], 1.0, 3);
        assert_eq!(r, Err(ConstructionError::SamplerExhausted { found: 0 }));
    }
}
