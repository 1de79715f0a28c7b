//! Dense vector helpers on plain slices.

use crate::scalar::Scalar;

#[inline]
pub fn dot<S: Scalar>(a: &[S], b: &[S]) -> S {
    a.iter().zip(b).fold(S::zero(), |acc, (x, y)| acc + *x * *y)
}

#[inline]
pub fn norm<S: Scalar>(a: &[S]) -> S {
    // Scaled to avoid overflow for large coordinates.
    let scale = a.iter().fold(S::zero(), |m, x| m.max(x.abs()));
    if scale == S::zero() || !scale.is_finite() {
        return scale;
    }
    let sum = a.iter().fold(S::zero(), |acc, x| {
        let y = *x / scale;
        acc + y * y
    });
    scale * sum.sqrt()
}

#[inline]
pub fn sub<S: Scalar>(a: &[S], b: &[S]) -> Vec<S> {
    a.iter().zip(b).map(|(x, y)| *x - *y).collect()
}

#[inline]
pub fn add<S: Scalar>(a: &[S], b: &[S]) -> Vec<S> {
    a.iter().zip(b).map(|(x, y)| *x + *y).collect()
}

#[inline]
pub fn scale<S: Scalar>(a: &[S], s: S) -> Vec<S> {
    a.iter().map(|x| *x * s).collect()
}

/// `a += s * b`
#[inline]
pub fn axpy<S: Scalar>(a: &mut [S], s: S, b: &[S]) {
    for (x, y) in a.iter_mut().zip(b) {
        *x = *x + s * *y;
    }
}

#[inline]
pub fn dist<S: Scalar>(a: &[S], b: &[S]) -> S {
    norm(&sub(a, b))
}

pub fn normalized<S: Scalar>(a: &[S]) -> Option<Vec<S>> {
    let n = norm(a);
    if n > S::zero() && n.is_finite() {
        Some(scale(a, S::one() / n))
    } else {
        None
    }
}

pub fn unit<S: Scalar>(dim: usize, axis: usize) -> Vec<S> {
    let mut v = vec![S::zero(); dim];
    v[axis] = S::one();
    v
}

/// Angle between two nonzero vectors, computed as `atan2(|a x b|, a.b)`.
pub fn angle_between<S: Scalar>(a: &[S], b: &[S]) -> S {
    let na = norm(a);
    let nb = norm(b);
    if na == S::zero() || nb == S::zero() {
        return S::zero();
    }
    let ua = scale(a, S::one() / na);
    let ub = scale(b, S::one() / nb);
    let c = dot(&ua, &ub);
    // |ua - c ub| is |sin| for unit vectors.
    let mut perp = ua.clone();
    axpy(&mut perp, -c, &ub);
    norm(&perp).atan2(c)
}

pub fn lex_cmp<S: Scalar>(a: &[S], b: &[S]) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.partial_cmp(y) {
            Some(std::cmp::Ordering::Equal) | None => continue,
            Some(o) => return o,
        }
    }
    a.len().cmp(&b.len())
}

/// Orthonormal basis of the orthogonal complement of `span(basis)`; `basis`
/// must already be orthonormal.
pub fn orthogonal_complement<S: Scalar>(dim: usize, basis: &[Vec<S>]) -> Vec<Vec<S>> {
    let mut out: Vec<Vec<S>> = basis.to_vec();
    let want = dim - basis.len();
    let mut added = 0;
    // Try the standard axes in order of how little of them is already spanned.
    let mut axes: Vec<(usize, S)> = (0..dim)
        .map(|i| {
            let e = unit::<S>(dim, i);
            let r = residual(&e, &out);
            (i, norm(&r))
        })
        .collect();
    axes.sort_by(|a, b| {
        b.1.partial_cmp(&a.1)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.0.cmp(&b.0))
    });
    for (i, _) in axes {
        if added == want {
            break;
        }
        let e = unit::<S>(dim, i);
        let mut r = residual(&e, &out);
        // second pass for stability
        r = residual(&r, &out);
        let n = norm(&r);
        if n > S::lit(1e-3) {
            out.push(scale(&r, S::one() / n));
            added += 1;
        }
    }
    out.split_off(basis.len())
}

/// `v` minus its projection onto the span of the orthonormal `basis`.
pub fn residual<S: Scalar>(v: &[S], basis: &[Vec<S>]) -> Vec<S> {
    let mut r = v.to_vec();
    for b in basis {
        let c = dot(&r, b);
        axpy(&mut r, -c, b);
    }
    r
}
