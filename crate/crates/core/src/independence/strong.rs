//! A finite-scale stand-in for strong points: where do shrinking
//! neighborhoods keep needing many flats?

use std::f64::consts::FRAC_PI_2;

use super::IndependenceError;
use crate::constructions::{compactify, decompactify, CompactifiedPoint};
use crate::nearball::Family;
use crate::solver::{greedy_piercing_upper, SolveOptions};
use crate::vector::{self, dist, norm};

#[derive(Debug, Clone, PartialEq)]
pub struct StrongPointReport {
    pub location: CompactifiedPoint,
    /// Number of radii whose neighborhood needed more than the flat budget.
    pub score: usize,
    pub neighborhood_radii: Vec<f64>,
    /// Greedy flat count per radius.
    pub budgets: Vec<usize>,
    /// Members per neighborhood.
    pub counts: Vec<usize>,
    /// Every neighborhood needed more than the flat budget.
    pub strong: bool,
}

/// Neighborhoods are balls in the compactified model around candidate
/// centers (member cores, their points at infinity, the origin). The four
/// candidates with the most members in the smallest neighborhood are ranked
/// by greedy budget at the smallest radius, then by member count, then by
/// total budget. A winner within twice the smallest radius of the boundary
/// sphere is reported as a point at infinity.
pub fn find_strong_point_proxy(
    f: &Family<f64>,
    k: usize,
    flat_budget: usize,
    radii: &[f64],
    opts: &SolveOptions,
) -> Result<StrongPointReport, IndependenceError> {
    if radii.is_empty()
        || radii.iter().any(|r| !(*r > 0.0))
        || radii.windows(2).any(|w| w[1] >= w[0])
    {
        return Err(IndependenceError::InvalidArgument(
            "radii must be positive and strictly descending".into(),
        ));
    }
    let points: Vec<Vec<f64>> = f.members().iter().map(|m| compactify(m.center())).collect();
    let mut candidates: Vec<Vec<f64>> = vec![vec![0.0; f.dim()]];
    candidates.extend(points.iter().cloned());
    for p in &points {
        if let Some(u) = vector::normalized(p) {
            candidates.push(vector::scale(&u, FRAC_PI_2));
        }
    }
    let within = |z: &[f64], r: f64| -> Vec<usize> {
        (0..points.len())
            .filter(|&i| dist(&points[i], z) < r)
            .collect()
    };
    let smallest = *radii.last().expect("non-empty");
    let mut ranked: Vec<(usize, usize)> = candidates
        .iter()
        .enumerate()
        .map(|(i, z)| (within(z, smallest).len(), i))
        .collect();
    ranked.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));

    let mut best: Option<(Vec<usize>, Vec<usize>, usize)> = None;
    for &(_, ci) in ranked.iter().take(4) {
        let z = &candidates[ci];
        let mut budgets = Vec::with_capacity(radii.len());
        let mut counts = Vec::with_capacity(radii.len());
        for &r in radii {
            let idx = within(z, r);
            counts.push(idx.len());
            budgets.push(if idx.is_empty() {
                0
            } else {
                greedy_piercing_upper(&f.subfamily(&idx)?, k, opts)?.0
            });
        }
        let key =
            |b: &[usize], c: &[usize]| (b[b.len() - 1], c[c.len() - 1], b.iter().sum::<usize>());
        let better = match &best {
            None => true,
            Some((b, c, _)) => key(&budgets, &counts) > key(b, c),
        };
        if better {
            best = Some((budgets, counts, ci));
        }
    }
    let (budgets, counts, ci) = best.expect("at least one candidate");
    let z = &candidates[ci];
    let location = if FRAC_PI_2 - norm(z) <= 2.0 * smallest && norm(z) > 0.0 {
        CompactifiedPoint::at_infinity(z).expect("non-zero")
    } else {
        decompactify(z)
    };
    let score = budgets.iter().filter(|&&b| b > flat_budget).count();
    let strong = score == budgets.len();
    Ok(StrongPointReport {
        location,
        score,
        neighborhood_radii: radii.to_vec(),
        budgets,
        counts,
        strong,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nearball::NearBall;

    #[test]
    fn separated_singletons_are_weak() {
        let centers = [[0.0, 0.0], [0.5, 0.0], [0.0, 0.5], [-0.5, 0.0]];
        let f = Family::new(
            centers
                .iter()
                .map(|c| NearBall::ball(c.to_vec(), 0.01).unwrap())
                .collect(),
        )
        .unwrap();
        let r =
            find_strong_point_proxy(&f, 0, 1, &[0.2, 0.1, 0.05], &SolveOptions::default()).unwrap();
        assert!(!r.strong);
        assert!(r.budgets.iter().all(|&b| b <= 1));
        assert_eq!(r.score, 0);
    }
}
