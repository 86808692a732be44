//! One-dimensional numerical building blocks: logarithmic grids, bisection
//! and golden-section search.

/// `n` points spaced evenly in `ln x` over `[lo, hi]`, endpoints included.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi > lo && n >= 2, "invalid log grid");
    let (a, b) = (lo.ln(), hi.ln());
    let step = (b - a) / (n - 1) as f64;
    let mut out: Vec<f64> = (0..n).map(|i| (a + step * i as f64).exp()).collect();
    out[0] = lo;
    out[n - 1] = hi;
    out
}

/// `n` evenly spaced points over `[lo, hi]`, endpoints included.
pub fn lin_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2, "grid needs two points");
    let step = (hi - lo) / (n - 1) as f64;
    let mut out: Vec<f64> = (0..n).map(|i| lo + step * i as f64).collect();
    out[n - 1] = hi;
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bisection {
    pub root: f64,
    pub residual: f64,
    pub iterations: usize,
    pub bracket: (f64, f64),
}

/// Bisection on `[lo, hi]` where `f(lo)` and `f(hi)` have opposite signs.
///
/// Stops once `|f| <= ftol` or the bracket cannot be split further in
/// floating point. Returns `None` if the endpoints do not bracket a root.
pub fn bisect<F>(mut f: F, mut lo: f64, mut hi: f64, ftol: f64, max_iter: usize) -> Option<Bisection>
where
    F: FnMut(f64) -> f64,
{
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Some(Bisection { root: lo, residual: 0.0, iterations: 0, bracket: (lo, hi) });
    }
    if fhi == 0.0 {
        return Some(Bisection { root: hi, residual: 0.0, iterations: 0, bracket: (lo, hi) });
    }
    if flo.signum() == fhi.signum() || flo.is_nan() || fhi.is_nan() {
        return None;
    }
    let mut best = if flo.abs() < fhi.abs() { (lo, flo) } else { (hi, fhi) };
    let mut iterations = 0;
    while iterations < max_iter {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        iterations += 1;
        let fm = f(mid);
        if fm.abs() < best.1.abs() {
            best = (mid, fm);
        }
        if fm == 0.0 || fm.abs() <= ftol {
            break;
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Some(Bisection {
        root: best.0,
        residual: best.1,
        iterations,
        bracket: (lo, hi),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GoldenMax {
    pub arg: f64,
    pub value: f64,
    pub iterations: usize,
    pub bracket: (f64, f64),
}

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Golden-section search for the maximum of a unimodal `f` on `[a, b]`,
/// shrinking the bracket until its width is at most `xtol`.
pub fn golden_section_max<F>(mut f: F, mut a: f64, mut b: f64, xtol: f64, max_iter: usize) -> GoldenMax
where
    F: FnMut(f64) -> f64,
{
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    let mut iterations = 0;
    while (b - a).abs() > xtol && iterations < max_iter {
        iterations += 1;
        if fc >= fd {
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
    let (arg, value) = if fc >= fd { (c, fc) } else { (d, fd) };
    GoldenMax {
        arg,
        value,
        iterations,
        bracket: (a, b),
    }
}

/// Index of the largest finite value; ties resolve to the first.
pub fn argmax(values: &[f64]) -> Option<usize> {
    values
        .iter()
        .enumerate()
        .filter(|(_, v)| !v.is_nan())
        .fold(None, |best: Option<(usize, f64)>, (i, &v)| match best {
            Some((_, bv)) if bv >= v => best,
            _ => Some((i, v)),
        })
        .map(|(i, _)| i)
}

/// Strict local maxima of a sampled profile that stand out from the valley
/// separating them from the global maximum by more than `prominence`.
pub fn prominent_maxima(values: &[f64], prominence: f64) -> Vec<usize> {
    let Some(global) = argmax(values) else {
        return Vec::new();
    };
    let n = values.len();
    let mut out = Vec::new();
    for i in 0..n {
        let left = if i == 0 { f64::NEG_INFINITY } else { values[i - 1] };
        let right = if i + 1 == n { f64::NEG_INFINITY } else { values[i + 1] };
        if !(values[i] > left && values[i] >= right) {
            continue;
        }
        if i == global {
            out.push(i);
            continue;
        }
        let (s, e) = if i < global { (i, global) } else { (global, i) };
        let valley = values[s..=e].iter().cloned().fold(f64::INFINITY, f64::min);
        if values[i] - valley > prominence {
            out.push(i);
        }
    }
    out
}
