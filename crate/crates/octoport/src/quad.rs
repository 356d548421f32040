//! One-dimensional quadrature.

use crate::real::Real;

/// Adaptive Simpson rule with absolute tolerance `tol`.
pub fn simpson<T: Real, F: Fn(T) -> T>(f: F, a: T, b: T, tol: T) -> T {
    let half = T::c(0.5);
    let m = (a + b) * half;
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = (b - a) / T::c(6.0) * (fa + T::c(4.0) * fm + fb);
    simpson_rec(&f, a, b, fa, fm, fb, whole, tol, 50)
}

#[allow(clippy::too_many_arguments)]
fn simpson_rec<T: Real, F: Fn(T) -> T>(
    f: &F,
    a: T,
    b: T,
    fa: T,
    fm: T,
    fb: T,
    whole: T,
    tol: T,
    depth: u32,
) -> T {
    let half = T::c(0.5);
    let m = (a + b) * half;
    let lm = (a + m) * half;
    let rm = (m + b) * half;
    let (flm, frm) = (f(lm), f(rm));
    let sixth = T::c(6.0);
    let left = (m - a) / sixth * (fa + T::c(4.0) * flm + fm);
    let right = (b - m) / sixth * (fm + T::c(4.0) * frm + fb);
    let diff = left + right - whole;
    if depth == 0 || diff.abs() <= T::c(15.0) * tol {
        return left + right + diff / T::c(15.0);
    }
    simpson_rec(f, a, m, fa, flm, fm, left, tol * half, depth - 1)
        + simpson_rec(f, m, b, fm, frm, fb, right, tol * half, depth - 1)
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<T: Real, F: Fn(T) -> T>(f: &F, a: T, b: T) -> (T, T) {
    let half = T::c(0.5);
    let c = (a + b) * half;
    let h = (b - a) * half;
    let fc = f(c);
    let mut kron = fc * T::c(WGK[7]);
    let mut gauss = fc * T::c(WG[3]);
    for i in 0..7 {
        let dx = h * T::c(XGK[i]);
        let s = f(c - dx) + f(c + dx);
        kron += T::c(WGK[i]) * s;
        if i % 2 == 1 {
            gauss += T::c(WG[i / 2]) * s;
        }
    }
    (kron * h, ((kron - gauss) * h).abs())
}

/// Adaptive Gauss-Kronrod (7/15) integration to `max(abs_tol, rel_tol*|I|)`.
pub fn gauss_kronrod<T: Real, F: Fn(T) -> T>(f: F, a: T, b: T, abs_tol: T, rel_tol: T) -> T {
    let mut pieces = vec![(a, b, gk15(&f, a, b))];
    for _ in 0..2000 {
        let total: T = pieces.iter().map(|p| p.2 .0).sum();
        let err: T = pieces.iter().map(|p| p.2 .1).sum();
        if err <= abs_tol.max(rel_tol * total.abs()) {
            return total;
        }
        let (idx, _) = pieces
            .iter()
            .enumerate()
            .fold((0, T::zero()), |acc, (i, p)| if p.2 .1 > acc.1 { (i, p.2 .1) } else { acc });
        let (lo, hi, _) = pieces.swap_remove(idx);
        let mid = (lo + hi) * T::c(0.5);
        pieces.push((lo, mid, gk15(&f, lo, mid)));
        pieces.push((mid, hi, gk15(&f, mid, hi)));
    }
    pieces.iter().map(|p| p.2 .0).sum()
}

/// `(1 - e^{-b}) / b`, stable for small `b`.
fn phi1<T: Real>(b: T) -> T {
    if b.abs() < T::c(1e-4) {
        T::one() - b * T::c(0.5) + b * b / T::c(6.0)
    } else {
        -(-b).exp_m1() / b
    }
}

/// `(1 - e^{-b}(1 + b)) / b^2`, stable for small `b`.
fn phi2<T: Real>(b: T) -> T {
    if b.abs() < T::c(1e-2) {
        T::c(0.5) - b / T::c(3.0) + b * b / T::c(8.0) - b * b * b / T::c(30.0)
            + b * b * b * b / T::c(144.0)
    } else {
        (-(-b).exp_m1() - b * (-b).exp()) / (b * b)
    }
}

/// Exact integral of `e^{-a s} p(s)` over `[s0, s0 + w]`, with `p` linear from `p0` to `p1`.
#[inline]
pub fn exp_linear_cell<T: Real>(a: T, s0: T, w: T, p0: T, p1: T) -> T {
    let b = a * w;
    (-a * s0).exp() * w * (p0 * phi1(b) + (p1 - p0) * phi2(b))
}
