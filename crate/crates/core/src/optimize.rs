//! Derivative-free one-dimensional minimization used by the restricted fit.

/// Outcome of [`brent_minimize`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Minimum {
    pub x: f64,
    pub fx: f64,
    /// Final bracket `[lo, hi]` around `x`.
    pub lo: f64,
    pub hi: f64,
    pub iterations: usize,
    pub converged: bool,
}

const GOLDEN: f64 = 0.381_966_011_250_105_1; // (3 - sqrt 5) / 2

/// Brent's golden-section / parabolic-interpolation hybrid on `[lo, hi]`.
///
/// Stops once the bracket around the best point is narrower than
/// `tol + 4 eps |x|`. Returns the best point seen with `converged = false`
/// if `max_iter` runs out first.
pub fn brent_minimize<F>(mut f: F, lo: f64, hi: f64, tol: f64, max_iter: usize) -> Minimum
where
    F: FnMut(f64) -> f64,
{
    let (mut a, mut b) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    let eps = f64::EPSILON;

    let mut x = a + GOLDEN * (b - a);
    let mut w = x;
    let mut v = x;
    let mut fx = f(x);
    let mut fw = fx;
    let mut fv = fx;
    let mut d: f64 = 0.0;
    let mut e: f64 = 0.0;

    for iter in 0..max_iter {
        let m = 0.5 * (a + b);
        let tol1 = 0.25 * tol + eps * x.abs();
        let tol2 = 2.0 * tol1;

        if (x - m).abs() <= tol2 - 0.5 * (b - a) {
            return Minimum {
                x,
                fx,
                lo: a,
                hi: b,
                iterations: iter,
                converged: true,
            };
        }

        let mut golden = true;
        if e.abs() > tol1 {
            // fit a parabola through x, w, v
            let r = (x - w) * (fx - fv);
            let mut q = (x - v) * (fx - fw);
            let mut p = (x - v) * q - (x - w) * r;
            q = 2.0 * (q - r);
            if q > 0.0 {
                p = -p;
            } else {
                q = -q;
            }
            let e_prev = e;
            if p.abs() < (0.5 * q * e_prev).abs() && p > q * (a - x) && p < q * (b - x) {
                e = d;
                d = p / q;
                let u = x + d;
                if u - a < tol2 || b - u < tol2 {
                    d = if x < m { tol1 } else { -tol1 };
                }
                golden = false;
            }
        }
        if golden {
            e = if x < m { b - x } else { a - x };
            d = GOLDEN * e;
        }

        let u = if d.abs() >= tol1 {
            x + d
        } else if d > 0.0 {
            x + tol1
        } else {
            x - tol1
        };
        let fu = f(u);

        if fu <= fx {
            if u < x {
                b = x;
            } else {
                a = x;
            }
            v = w;
            fv = fw;
            w = x;
            fw = fx;
            x = u;
            fx = fu;
        } else {
            if u < x {
                a = u;
            } else {
                b = u;
            }
            if fu <= fw || w == x {
                v = w;
                fv = fw;
                w = u;
                fw = fu;
            } else if fu <= fv || v == x || v == w {
                v = u;
                fv = fu;
            }
        }
    }

    Minimum {
        x,
        fx,
        lo: a,
        hi: b,
        iterations: max_iter,
        converged: false,
    }
}

/// Why [`widen_bracket`] gave up.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BracketError {
    /// The objective decreases outward at both ends of the interval.
    TwoDescentDirections,
    /// The interval kept growing without the ends turning uphill.
    Exhausted,
}

/// Widens `[lo, hi]` geometrically until the objective decreases when
/// stepping inward from both ends, so the minimum lies inside.
pub fn widen_bracket<F>(
    mut f: F,
    mut lo: f64,
    mut hi: f64,
    max_widenings: usize,
) -> Result<(f64, f64), BracketError>
where
    F: FnMut(f64) -> f64,
{
    if lo > hi {
        std::mem::swap(&mut lo, &mut hi);
    }
    for _ in 0..=max_widenings {
        let width = hi - lo;
        let h = 1e-4 * width.max(1e-8);
        let left_uphill = f(lo) > f(lo + h);
        let right_uphill = f(hi) > f(hi - h);
        match (left_uphill, right_uphill) {
            (true, true) => return Ok((lo, hi)),
            (false, false) => return Err(BracketError::TwoDescentDirections),
            (false, true) => lo -= width,
            (true, false) => hi += width,
        }
    }
    Err(BracketError::Exhausted)
}
