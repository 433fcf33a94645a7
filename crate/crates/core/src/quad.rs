//! Globally adaptive Gauss–Legendre quadrature.
//!
//! Each interval carries a 20-point value and the gap to the 10-point value
//! as its error estimate; the worst interval is bisected until the summed
//! estimate meets the target. Integrable endpoint singularities (the
//! near-origin kernel moments) get resolved by geometric refinement toward
//! the singular end, since Gauss nodes never touch the endpoints.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::sync::OnceLock;

use gauss_quad::GaussLegendre;

use crate::error::{Error, Result};

const MAX_INTERVALS: usize = 4000;
/// Below a few ulps of the magnitude the estimates are rounding noise.
const REL_FLOOR: f64 = 8.0 * f64::EPSILON;

struct Rules {
    coarse: Vec<(f64, f64)>,
    fine: Vec<(f64, f64)>,
}

fn rules() -> &'static Rules {
    static RULES: OnceLock<Rules> = OnceLock::new();
    RULES.get_or_init(|| {
        let nodes = |deg: usize| -> Vec<(f64, f64)> {
            GaussLegendre::new(deg)
                .expect("valid degree")
                .iter()
                .map(|(x, w)| (*x, *w))
                .collect()
        };
        Rules {
            coarse: nodes(10),
            fine: nodes(20),
        }
    })
}

struct Piece {
    a: f64,
    b: f64,
    value: f64,
    abs_value: f64,
    error: f64,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error) == Ordering::Equal
    }
}

impl Eq for Piece {}

impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Piece {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn piece<F>(f: &F, a: f64, b: f64) -> Result<Piece>
where
    F: Fn(f64) -> f64 + ?Sized,
{
    let r = rules();
    let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
    let apply = |rule: &[(f64, f64)]| -> (f64, f64) {
        rule.iter().fold((0.0, 0.0), |(s, m), &(x, w)| {
            let v = w * f(mid + half * x);
            (s + v, m + v.abs())
        })
    };
    let (coarse, _) = apply(&r.coarse);
    let (fine, mag) = apply(&r.fine);
    if !fine.is_finite() || !coarse.is_finite() {
        return Err(Error::Quadrature(format!("non-finite value on [{a:e}, {b:e}]")));
    }
    Ok(Piece {
        a,
        b,
        value: half * fine,
        abs_value: half * mag,
        error: (half * (fine - coarse)).abs(),
    })
}

/// Integrates `f` over `[a, b]` to the absolute tolerance `tol`.
pub fn integrate<F>(f: &F, a: f64, b: f64, tol: f64) -> Result<f64>
where
    F: Fn(f64) -> f64 + ?Sized,
{
    if a == b {
        return Ok(0.0);
    }
    if b < a {
        return integrate(f, b, a, tol).map(|v| -v);
    }
    let mut heap = BinaryHeap::new();
    let first = piece(f, a, b)?;
    let (mut mag, mut error) = (first.abs_value, first.error);
    heap.push(first);
    let target = |mag: f64| tol.max(REL_FLOOR * mag);
    while error > target(mag) {
        if heap.len() >= MAX_INTERVALS {
            if error <= 1e3 * target(mag) {
                break;
            }
            return Err(Error::Quadrature(format!(
                "no convergence on [{a:e}, {b:e}] (estimate {error:.3e}, target {:.3e})",
                target(mag)
            )));
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b) {
            // interval exhausted at machine resolution
            heap.push(worst);
            break;
        }
        let (l, r) = (piece(f, worst.a, mid)?, piece(f, mid, worst.b)?);
        mag += l.abs_value + r.abs_value - worst.abs_value;
        error += l.error + r.error - worst.error;
        heap.push(l);
        heap.push(r);
    }
    Ok(heap.iter().map(|p| p.value).sum())
}

/// Integrates over `[a, b]`, splitting at every breakpoint strictly inside
/// the interval and geometrically on long positive ranges.
pub fn integrate_pieces<F>(f: &F, a: f64, b: f64, breaks: &[f64], tol: f64) -> Result<f64>
where
    F: Fn(f64) -> f64 + ?Sized,
{
    if a >= b {
        return Ok(0.0);
    }
    let mut cuts = vec![a];
    let mut inner: Vec<f64> = breaks.iter().copied().filter(|&x| x > a && x < b).collect();
    inner.sort_by(f64::total_cmp);
    inner.dedup();
    cuts.extend(inner);
    cuts.push(b);

    let mut pieces = Vec::with_capacity(cuts.len());
    for w in cuts.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        // decades, so r^-p integrands keep comparable weight per piece
        if lo > 0.0 && hi / lo > 8.0 {
            let mut x = lo;
            while x < hi {
                let next = (x * 8.0).min(hi);
                pieces.push((x, next));
                x = next;
            }
        } else {
            pieces.push((lo, hi));
        }
    }
    let share = tol / pieces.len() as f64;
    pieces.into_iter().map(|(lo, hi)| integrate(f, lo, hi, share)).sum()
}
