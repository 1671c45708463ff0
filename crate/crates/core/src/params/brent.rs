//! Derivative-free scalar minimization on a bracket (Brent's golden-section /
//! parabolic-interpolation method).

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BrentOutcome {
    pub x: f64,
    pub fx: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Minimizes `f` on `[a, b]`.
///
/// `xtol` is the absolute abscissa tolerance; a relative `sqrt(eps) |x|` term is
/// added as usual. Non-finite objective values are treated as `+inf`. When the
/// iteration cap is hit the best point seen is returned with `converged = false`.
pub fn minimize<F>(mut f: F, a: f64, b: f64, xtol: f64, max_iter: usize) -> BrentOutcome
where
    F: FnMut(f64) -> f64,
{
    const GOLDEN: f64 = 0.381_966_011_250_105_1;
    let rel = f64::EPSILON.sqrt();
    let mut eval = |x: f64| {
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };

    let (mut a, mut b) = if a <= b { (a, b) } else { (b, a) };
    let mut x = a + GOLDEN * (b - a);
    let (mut w, mut v) = (x, x);
    let mut fx = eval(x);
    let (mut fw, mut fv) = (fx, fx);
    let (mut d, mut e) = (0.0f64, 0.0f64);

    for iter in 0..max_iter {
        let mid = 0.5 * (a + b);
        let tol1 = rel * x.abs() + xtol;
        let tol2 = 2.0 * tol1;
        if (x - mid).abs() <= tol2 - 0.5 * (b - a) {
            return BrentOutcome { x, fx, iterations: iter, converged: true };
        }

        let mut golden = true;
        if e.abs() > tol1 {
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
            e = d;
            if p.abs() < (0.5 * q * e_prev).abs() && p > q * (a - x) && p < q * (b - x) {
                d = p / q;
                let u = x + d;
                if u - a < tol2 || b - u < tol2 {
                    d = if x < mid { tol1 } else { -tol1 };
                }
                golden = false;
            }
        }
        if golden {
            e = if x < mid { b - x } else { a - x };
            d = GOLDEN * e;
        }

        let u = if d.abs() >= tol1 { x + d } else if d > 0.0 { x + tol1 } else { x - tol1 };
        let fu = eval(u);

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
    BrentOutcome { x, fx, iterations: max_iter, converged: false }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic() {
        let out = minimize(|x| (x - 1.3).powi(2) + 2.0, -5.0, 5.0, 1e-10, 200);
        assert!(out.converged);
        assert!((out.x - 1.3).abs() < 1e-7);
        assert!((out.fx - 2.0).abs() < 1e-14);
    }

    #[test]
    fn nonsmooth_abs() {
        let out = minimize(|x| (x + 2.0).abs(), -4.0, 4.0, 1e-9, 200);
        assert!((out.x + 2.0).abs() < 1e-7);
    }

    #[test]
    fn minimum_at_endpoint() {
        let out = minimize(|x| x, 0.0, 1.0, 1e-9, 200);
        assert!(out.x < 1e-7);
    }

    #[test]
    fn nan_regions_avoided() {
        let out = minimize(|x| if x > 2.0 { f64::NAN } else { (x - 1.0).powi(2) }, 0.0, 3.0, 1e-9, 200);
        assert!((out.x - 1.0).abs() < 1e-6);
    }

    #[test]
    fn iteration_cap_returns_best() {
        let out = minimize(|x| (x - 0.25).powi(2), -10.0, 10.0, 1e-14, 3);
        assert!(!out.converged);
        assert!(out.fx.is_finite());
    }
}
