//! One-dimensional derivative-free minimization.

/// Golden-section search for a minimum of `f` on `[lo, hi]`, stopping when
/// the bracket is narrower than `rel_tol` times its midpoint.
pub fn golden_section<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, rel_tol: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let (mut a, mut b) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..200 {
        if (b - a).abs() <= rel_tol * (0.5 * (a + b)).abs().max(f64::MIN_POSITIVE) {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    if fc < fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// `n` log-spaced points from `lo` to `hi` inclusive.
pub fn log_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (l, h) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| {
            if i + 1 == n {
                hi
            } else {
                (l + (h - l) * i as f64 / (n - 1) as f64).exp()
            }
        })
        .collect()
}

/// Scans `f` over `candidates`, then refines with golden-section inside the
/// bracket around the best candidate. Returns the minimizer and its value.
pub fn scan_then_refine<F: FnMut(f64) -> f64>(mut f: F, candidates: &[f64], rel_tol: f64) -> (f64, f64) {
    assert!(!candidates.is_empty());
    let values: Vec<f64> = candidates.iter().map(|&x| f(x)).collect();
    let best = values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .unwrap();
    let lo = candidates[best.saturating_sub(1)];
    let hi = candidates[(best + 1).min(candidates.len() - 1)];
    if lo == hi {
        return (candidates[best], values[best]);
    }
    let (x, fx) = golden_section(&mut f, lo, hi, rel_tol);
    if fx <= values[best] {
        (x, fx)
    } else {
        (candidates[best], values[best])
    }
}
