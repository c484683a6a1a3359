//! Bounded scalar maximization.
//!
//! Golden-section search narrows a bracket by function values only, which
//! stalls near `√ε` relative accuracy on a smooth peak. When the caller can
//! supply the slope, [`maximize_with_slope`] finishes with a sign bisection on
//! it, which keeps going to full precision and also settles exactly on kinks
//! of piecewise-linear objectives.

/// Location and value of a maximum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarMax {
    pub x: f64,
    pub value: f64,
}

const INV_PHI: f64 = 0.618_033_988_749_894_8;

fn clean(v: f64) -> f64 {
    if v.is_nan() {
        f64::NEG_INFINITY
    } else {
        v
    }
}

/// Golden-section search for the maximum of `f` on `[lo, hi]`.
///
/// The bracket is shrunk until narrower than `tol`; the midpoint is then
/// compared against both endpoints. Ties go to the smaller argument.
pub fn golden_section_max<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, tol: f64) -> ScalarMax {
    debug_assert!(lo <= hi);
    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = clean(f(c));
    let mut fd = clean(f(d));
    while b - a > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = clean(f(c));
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = clean(f(d));
        }
    }
    let mid = 0.5 * (a + b);
    best_of(&mut f, &[lo, mid, hi])
}

/// Picks the candidate with the largest value; earlier candidates win ties.
fn best_of<F: FnMut(f64) -> f64>(f: &mut F, xs: &[f64]) -> ScalarMax {
    let mut best = ScalarMax {
        x: xs[0],
        value: clean(f(xs[0])),
    };
    for &x in &xs[1..] {
        let v = clean(f(x));
        if v > best.value {
            best = ScalarMax { x, value: v };
        }
    }
    best
}

/// Root of a non-increasing function on `[a, b]` with `g(a) > 0 > g(b)`, by bisection.
pub fn bisect_decreasing<G: FnMut(f64) -> f64>(mut g: G, mut a: f64, mut b: f64) -> f64 {
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        if g(m) > 0.0 {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Maximizes a concave objective `f` with slope `df` on `[lo, hi]`.
///
/// Runs golden-section search to `tol`, then bisects on the slope inside the
/// smallest window around the incumbent where the slope changes sign. The result is
/// compared with both endpoints, ties toward the smaller argument.
pub fn maximize_with_slope<F, G>(mut f: F, mut df: G, lo: f64, hi: f64, tol: f64) -> ScalarMax
where
    F: FnMut(f64) -> f64,
    G: FnMut(f64) -> f64,
{
    let coarse = golden_section_max(&mut f, lo, hi, tol);
    let mut x = coarse.x;
    // golden search stalls around sqrt(eps); widen until the slope brackets a root
    let mut width = 4.0 * tol.max(1e-12);
    loop {
        let a = (x - width).max(lo);
        let b = (x + width).min(hi);
        if a < b && df(a) > 0.0 && df(b) < 0.0 {
            x = bisect_decreasing(&mut df, a, b);
            break;
        }
        if a <= lo && b >= hi {
            break;
        }
        width *= 2.0;
    }
    best_of(&mut f, &[lo, x, hi])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_finds_quadratic_peak() {
        let m = golden_section_max(|x| -(x - 0.3) * (x - 0.3), 0.0, 1.0, 1e-8);
        assert!((m.x - 0.3).abs() < 1e-7);
    }

    #[test]
    fn golden_prefers_endpoints_when_monotone() {
        assert_eq!(golden_section_max(|x| -x, 0.0, 1.0, 1e-6).x, 0.0);
        assert_eq!(golden_section_max(|x| x, 0.0, 1.0, 1e-6).x, 1.0);
    }

    #[test]
    fn constant_objective_ties_to_smaller() {
        assert_eq!(golden_section_max(|_| 1.0, 0.0, 1.0, 1e-6).x, 0.0);
    }

    #[test]
    fn handles_minus_infinity_region() {
        let m = golden_section_max(
            |x| if x <= 0.2 { f64::NEG_INFINITY } else { (x - 0.2).ln() - 2.0 * x },
            0.0,
            1.0,
            1e-9,
        );
        assert!((m.x - 0.7).abs() < 1e-6);
    }

    #[test]
    fn slope_polish_reaches_machine_precision() {
        // maximum of ln x - 3x at 1/3
        let m = maximize_with_slope(|x| x.ln() - 3.0 * x, |x| 1.0 / x - 3.0, 1e-9, 1.0, 1e-6);
        assert!((m.x - 1.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn slope_polish_lands_on_kink() {
        let f = |x: f64| -(x - 0.4).abs();
        let df = |x: f64| if x < 0.4 { 1.0 } else { -1.0 };
        let m = maximize_with_slope(f, df, 0.0, 1.0, 1e-6);
        assert!((m.x - 0.4).abs() < 1e-14);
    }
}
