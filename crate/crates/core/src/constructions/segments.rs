use itertools::Itertools;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::ConstructionError;
use crate::geometry::ClosedBall;
use crate::nearball::{nearball_constant, Family, MemberConstant, NearBall};
use crate::vector::{self, dist};

/// Chain radius relative to the segment length.
pub const CHAIN_RESOLUTION: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

impl Segment {
    pub fn length(&self) -> f64 {
        dist(&self.a, &self.b)
    }

    pub fn dist_point(&self, p: &[f64]) -> f64 {
        let ab = vector::sub(&self.b, &self.a);
        let t =
            (vector::dot(&vector::sub(p, &self.a), &ab) / vector::dot(&ab, &ab)).clamp(0.0, 1.0);
        let mut q = self.a.clone();
        vector::axpy(&mut q, t, &ab);
        dist(p, &q)
    }
}

/// Closed balls of radius `rel * length` along the segment with spacing at
/// most the radius. The middle ball is the core.
pub fn chain(seg: &Segment, rel: f64) -> Result<NearBall<f64>, ConstructionError> {
    let len = seg.length();
    if !(len > 0.0) || !(rel > 0.0) {
        return Err(ConstructionError::InvalidArgument(
            "chain needs a proper segment and a positive radius".into(),
        ));
    }
    let r = rel * len;
    let count = (len / r).ceil() as usize + 1;
    let parts = (0..count)
        .map(|j| {
            let t = j as f64 / (count - 1) as f64;
            let c: Vec<f64> = seg
                .a
                .iter()
                .zip(&seg.b)
                .map(|(a, b)| a + t * (b - a))
                .collect();
            ClosedBall::new(c, r)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(NearBall::new(parts, count / 2, false)?)
}

fn cross(o: &[f64], a: &[f64], b: &[f64]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

/// Proper crossing point of two plane segments.
fn crossing(s: &Segment, t: &Segment) -> Option<Vec<f64>> {
    let d1 = cross(&t.a, &t.b, &s.a);
    let d2 = cross(&t.a, &t.b, &s.b);
    let d3 = cross(&s.a, &s.b, &t.a);
    let d4 = cross(&s.a, &s.b, &t.b);
    if d1 * d2 < 0.0 && d3 * d4 < 0.0 {
        let u = d1 / (d1 - d2);
        Some(s.a.iter().zip(&s.b).map(|(a, b)| a + u * (b - a)).collect())
    } else {
        None
    }
}

/// Chords of the unit circle from angle `pi i / (2n)` to `pi + pi i / (2n) + delta_i`.
///
/// `delta_i` is a strictly convex ramp plus a small seeded jitter, so the
/// chords are tangent to a strictly convex curve: every two cross and no
/// three are concurrent.
pub fn chords(n: usize, seed: u64) -> Vec<Segment> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nf = n as f64;
    (1..=n)
        .map(|i| {
            let theta = std::f64::consts::PI * i as f64 / (2.0 * nf);
            let delta = 1.5 * (i as f64 / nf).powi(2) + 0.1 * rng.random::<f64>() / (nf * nf);
            let end = std::f64::consts::PI + theta + delta;
            Segment {
                a: vec![theta.cos(), theta.sin()],
                b: vec![end.cos(), end.sin()],
            }
        })
        .collect()
}

/// The chords as ball chains at [`CHAIN_RESOLUTION`].
pub fn segments_family(n: usize, seed: u64) -> Result<Family<f64>, ConstructionError> {
    segments_family_with_resolution(n, seed, CHAIN_RESOLUTION)
}

pub fn segments_family_with_resolution(
    n: usize,
    seed: u64,
    rel: f64,
) -> Result<Family<f64>, ConstructionError> {
    if n < 2 {
        return Err(ConstructionError::InvalidArgument(
            "need at least 2 segments".into(),
        ));
    }
    let members = chords(n, seed)
        .iter()
        .map(|s| chain(s, rel))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Family::new(members)?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SegmentsReport {
    pub pairs: usize,
    pub crossing_pairs: usize,
    /// Smallest distance from a pairwise crossing to a third segment.
    pub min_triple_gap: f64,
    /// Smallest ratio of that distance to what chains of the given
    /// resolution need to stay triple-free.
    pub chain_margin: f64,
}

impl SegmentsReport {
    pub fn ideal_ok(&self) -> bool {
        self.crossing_pairs == self.pairs && self.min_triple_gap > 0.0
    }

    pub fn chain_ok(&self) -> bool {
        self.ideal_ok() && self.chain_margin > 1.0
    }
}

/// Pairwise crossings and triple points of the ideal segments, and whether
/// chains of radius `rel * length` keep every triple apart.
///
/// Two strips of half-width `r` crossing at angle `t` meet inside a ball of
/// radius `r / min(sin(t/2), cos(t/2))` around the crossing.
pub fn verify_segments(segs: &[Segment], rel: f64) -> SegmentsReport {
    let mut crossing_pairs = 0;
    let mut min_gap = f64::INFINITY;
    let mut margin = f64::INFINITY;
    let radius = |s: &Segment| rel * s.length();
    for (i, j) in (0..segs.len()).tuple_combinations() {
        let Some(q) = crossing(&segs[i], &segs[j]) else {
            continue;
        };
        crossing_pairs += 1;
        let ui = vector::sub(&segs[i].b, &segs[i].a);
        let uj = vector::sub(&segs[j].b, &segs[j].a);
        let t = vector::angle_between(&ui, &uj);
        let r = radius(&segs[i]).max(radius(&segs[j]));
        let spread = r / (t / 2.0).sin().min((t / 2.0).cos());
        for (l, s) in segs.iter().enumerate() {
            if l == i || l == j {
                continue;
            }
            let gap = s.dist_point(&q);
            min_gap = min_gap.min(gap);
            margin = margin.min(gap / (spread + radius(s)));
        }
    }
    SegmentsReport {
        pairs: segs.len() * (segs.len().saturating_sub(1)) / 2,
        crossing_pairs,
        min_triple_gap: min_gap,
        chain_margin: margin,
    }
}

/// Members `B((2^i, 0), 2^i / 4)` joined with the chain of chord `e_i`.
pub fn sharpness_family2(n: usize, seed: u64) -> Result<Family<f64>, ConstructionError> {
    if n == 0 {
        return Err(ConstructionError::InvalidArgument(
            "n must be at least 1".into(),
        ));
    }
    let segs = chords(n.max(2), seed);
    let members = (1..=n)
        .map(|i| -> Result<NearBall<f64>, ConstructionError> {
            let s = 2f64.powi(i as i32);
            let core = ClosedBall::new(vec![s, 0.0], s / 4.0)?;
            let mut parts = vec![core];
            parts.extend(
                chain(&segs[i - 1], CHAIN_RESOLUTION)?
                    .parts()
                    .iter()
                    .cloned(),
            );
            Ok(NearBall::new(parts, 0, false)?)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Family::new(members)?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Family2Report {
    pub per_member: Vec<MemberConstant<f64>>,
    pub max_ratio: f64,
    /// Whether the additive term increases strictly along the family.
    pub additive_increasing: bool,
}

/// Per-member constants: bounded ratio, growing additive term.
pub fn verify_family2(f: &Family<f64>) -> Family2Report {
    let per_member = nearball_constant(f).per_member;
    let max_ratio = per_member.iter().map(|m| m.ratio).fold(0.0, f64::max);
    let additive_increasing = per_member.windows(2).all(|w| w[1].additive > w[0].additive);
    Family2Report {
        per_member,
        max_ratio,
        additive_increasing,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chain_covers_the_segment() {
        let s = Segment {
            a: vec![0.0, 0.0],
            b: vec![1.0, 0.0],
        };
        let c = chain(&s, 0.01).unwrap();
        assert!(c.parts().len() >= 101);
        assert!((c.r_in() - 0.01).abs() < 1e-15);
        for w in c.parts().windows(2) {
            assert!(dist(w[0].center(), w[1].center()) <= 0.01 + 1e-15);
        }
    }

    #[test]
    fn two_chords_cross() {
        let r = verify_segments(&chords(2, 1), CHAIN_RESOLUTION);
        assert_eq!((r.pairs, r.crossing_pairs), (1, 1));
        assert!(r.chain_ok());
    }

    #[test]
    fn family2_member_three() {
        let f = sharpness_family2(3, 5).unwrap();
        let m = &f.members()[2];
        assert_eq!(m.r_in(), 2.0);
        assert_eq!(m.center(), &[8.0, 0.0]);
        // Farthest chain point is within the unit disc, hence at most 9 + radius.
        assert!(
            m.r_esc() > 8.0 && m.r_esc() <= 9.0 + 2.0 * CHAIN_RESOLUTION + 1e-12,
            "{}",
            m.r_esc()
        );
    }
}
