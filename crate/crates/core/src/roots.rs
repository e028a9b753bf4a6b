//! Scalar root bracketing and bisection shared by the plant and interior
//! equilibrium solvers.

/// A sign change of `g` between `lo` and `hi` found on a uniform grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bracket {
    pub lo: f64,
    pub hi: f64,
    pub g_lo: f64,
    pub g_hi: f64,
}

/// Evaluates `g` on `n + 1` equally spaced nodes of `[lo, hi]` and returns every
/// cell where the sign flips. Nodes where `g` is exactly zero are returned as
/// degenerate brackets with `lo == hi`.
pub fn sign_changes<G: Fn(f64) -> f64>(g: G, lo: f64, hi: f64, n: usize) -> Vec<Bracket> {
    let n = n.max(1);
    let node = |k: usize| {
        if k == n {
            hi
        } else {
            lo + (hi - lo) * (k as f64) / (n as f64)
        }
    };
    let mut out = Vec::new();
    let mut x_prev = node(0);
    let mut g_prev = g(x_prev);
    if g_prev == 0.0 {
        out.push(Bracket { lo: x_prev, hi: x_prev, g_lo: 0.0, g_hi: 0.0 });
    }
    for k in 1..=n {
        let x = node(k);
        let gx = g(x);
        if gx == 0.0 {
            out.push(Bracket { lo: x, hi: x, g_lo: 0.0, g_hi: 0.0 });
        } else if g_prev != 0.0 && (g_prev < 0.0) != (gx < 0.0) {
            out.push(Bracket { lo: x_prev, hi: x, g_lo: g_prev, g_hi: gx });
        }
        x_prev = x;
        g_prev = gx;
    }
    out
}

/// Bisection on a sign-changing bracket. Stops once `|g(mid)| < g_tol` or the
/// bracket width drops below `x_tol`, or the bracket can no longer shrink in
/// floating point. Returns the midpoint of the final bracket (or the exact zero).
pub fn bisect<G: Fn(f64) -> f64>(g: G, bracket: Bracket, x_tol: f64, g_tol: f64) -> f64 {
    if bracket.lo == bracket.hi {
        return bracket.lo;
    }
    let (mut lo, mut hi) = (bracket.lo, bracket.hi);
    let lo_negative = bracket.g_lo < 0.0;
    let mut best = 0.5 * (lo + hi);
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let gm = g(mid);
        best = mid;
        if gm == 0.0 {
            return mid;
        }
        if (gm < 0.0) == lo_negative {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= x_tol && gm.abs() < g_tol {
            break;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_all_sign_changes_of_cubic() {
        let g = |x: f64| (x - 0.5) * (x - 1.5) * (x - 2.25);
        let b = sign_changes(g, 0.0, 3.0, 97);
        assert_eq!(b.len(), 3);
        let roots: Vec<f64> = b.iter().map(|&br| bisect(g, br, 1e-13, 1e-14)).collect();
        for (r, want) in roots.iter().zip([0.5, 1.5, 2.25]) {
            assert!((r - want).abs() < 1e-12, "{r} vs {want}");
        }
    }

    #[test]
    fn exact_node_zero_reported_once() {
        let g = |x: f64| x - 1.0;
        let b = sign_changes(g, 0.0, 2.0, 4);
        assert_eq!(b.len(), 1);
        assert_eq!(b[0].lo, 1.0);
        assert_eq!(b[0].hi, 1.0);
    }

    #[test]
    fn bisect_respects_tolerance() {
        let g = |x: f64| x * x - 2.0;
        let br = Bracket { lo: 1.0, hi: 2.0, g_lo: -1.0, g_hi: 2.0 };
        let r = bisect(g, br, 1e-12, 1e-12);
        assert!((r - 2f64.sqrt()).abs() < 1e-12);
    }
}
