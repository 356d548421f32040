//! Univariate and bivariate normal probabilities.

use crate::quad::gauss_kronrod;
use crate::real::Real;

/// Standard normal CDF via `erfc`, accurate in both tails.
pub fn phi_cdf<T: Real>(x: T) -> T {
    T::c(0.5) * (-x / T::SQRT_2()).erfc()
}

/// `P(Z > x)` for standard normal `Z`.
pub fn upper_tail<T: Real>(x: T) -> T {
    T::c(0.5) * (x / T::SQRT_2()).erfc()
}

pub fn pdf<T: Real>(x: T) -> T {
    (-x * x * T::c(0.5)).exp() / (T::c(2.0) * T::PI()).sqrt()
}

/// `P(a < Z < b)`, computed on the side that avoids cancellation.
pub fn interval<T: Real>(a: T, b: T) -> T {
    if b <= a {
        return T::zero();
    }
    if b - a < T::c(0.1) {
        return narrow_interval(a, b);
    }
    if a >= T::zero() {
        upper_tail(a) - upper_tail(b)
    } else if b <= T::zero() {
        upper_tail(-b) - upper_tail(-a)
    } else {
        T::one() - upper_tail(-a) - upper_tail(b)
    }
}

// five-point Gauss-Legendre on the density: tail differences lose every
// digit once the interval is much narrower than one
fn narrow_interval<T: Real>(a: T, b: T) -> T {
    const NODES: [f64; 5] = [0.0, 0.538_469_310_105_683_1, -0.538_469_310_105_683_1, 0.906_179_845_938_664, -0.906_179_845_938_664];
    const WEIGHTS: [f64; 5] = [0.568_888_888_888_888_9, 0.478_628_670_499_366_5, 0.478_628_670_499_366_5, 0.236_926_885_056_189_1, 0.236_926_885_056_189_1];
    let h = (b - a) * T::c(0.5);
    let m = (a + b) * T::c(0.5);
    let mut acc = T::zero();
    for k in 0..5 {
        acc += T::c(WEIGHTS[k]) * pdf(m + h * T::c(NODES[k]));
    }
    acc * h
}

/// `P(|Z| > x)` for `x >= 0`.
pub fn two_sided_tail<T: Real>(x: T) -> T {
    (x / T::SQRT_2()).erfc()
}

/// Standardized rectangle `[a1,b1] x [a2,b2]` under a standard bivariate normal
/// with correlation `rho`.
pub fn rectangle<T: Real>(a1: T, b1: T, a2: T, b2: T, rho: T) -> T {
    if b1 <= a1 || b2 <= a2 {
        return T::zero();
    }
    if rho == T::zero() {
        return interval(a1, b1) * interval(a2, b2);
    }
    let s = (T::one() - rho * rho).sqrt();
    let cut = T::c(38.0);
    let (lo, hi) = (a1.max(-cut), b1.min(cut));
    if hi <= lo {
        return T::zero();
    }
    let inner = |y: T| pdf(y) * interval((a2 - rho * y) / s, (b2 - rho * y) / s);
    // the integrand peaks near the origin; splitting there keeps the rule honest
    let mut acc = T::zero();
    let mut pts = vec![lo];
    if lo < T::zero() && hi > T::zero() {
        pts.push(T::zero());
    }
    pts.push(hi);
    for w in pts.windows(2) {
        acc += gauss_kronrod(inner, w[0], w[1], T::c(1e-300), T::c(1e-14));
    }
    acc
}

/// Probability that a standard bivariate normal leaves `[-x1,x1] x [-x2,x2]`,
/// evaluated without forming `1 - mass`.
pub fn outside_box<T: Real>(x1: T, x2: T, rho: T) -> T {
    let q1 = two_sided_tail(x1);
    let q2 = two_sided_tail(x2);
    if rho == T::zero() {
        return q1 + q2 - q1 * q2;
    }
    let s = (T::one() - rho * rho).sqrt();
    let cut = T::c(38.0);
    if x1 >= cut {
        return q2;
    }
    // P(|Z1| > x1 and |Z2| > x2), split into the two tails of Z1
    let both = |y: T| {
        let m = rho * y;
        pdf(y) * (upper_tail((x2 - m) / s) + upper_tail((x2 + m) / s))
    };
    let b = gauss_kronrod(both, x1, cut, T::c(1e-300), T::c(1e-14))
        + gauss_kronrod(both, -cut, -x1, T::c(1e-300), T::c(1e-14));
    q1 + q2 - b
}
