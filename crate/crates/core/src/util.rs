//! Small numeric helpers shared across modules.

/// Least-squares slope of `ln(y)` against `ln(x)`.
///
/// Points with `y <= 0` carry no information on a log scale and are skipped.
/// Returns `None` when fewer than two usable points remain.
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    assert_eq!(xs.len(), ys.len());
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|&(&x, &y)| x > 0.0 && y > 0.0)
        .map(|(&x, &y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for (x, y) in &pts {
        num += (x - mx) * (y - my);
        den += (x - mx) * (x - mx);
    }
    if den == 0.0 {
        return None;
    }
    Some(num / den)
}

/// Trapezoid rule for `f` on `[a, b]` with step at most `dt`.
///
/// The step is shrunk so that the node count divides the interval evenly;
/// the integrand is evaluated at every node exactly once.
pub fn trapezoid(a: f64, b: f64, dt: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
    assert!(b >= a && dt > 0.0, "degenerate quadrature interval");
    if b == a {
        return 0.0;
    }
    let n = ((b - a) / dt).ceil().max(1.0) as usize;
    let h = (b - a) / n as f64;
    let mut acc = 0.5 * (f(a) + f(b));
    for k in 1..n {
        acc += f(a + h * k as f64);
    }
    acc * h
}

/// Worker cap for parallel sections: `GRAPHWAVE_THREADS` when set and valid,
/// otherwise the machine's available parallelism.
pub fn thread_cap() -> usize {
    if let Ok(v) = std::env::var("GRAPHWAVE_THREADS") {
        if let Ok(n) = v.trim().parse::<usize>() {
            if n >= 1 {
                return n;
            }
        }
    }
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

/// Applies `f` to every index, fanning the work out over at most
/// [`thread_cap`] workers. Output order matches input order, and each item is
/// computed by exactly one worker, so results are identical to the sequential
/// run.
pub fn parallel_map<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync,
{
    let workers = thread_cap().min(n.max(1));
    if workers <= 1 || n <= 1 {
        return (0..n).map(f).collect();
    }
    let mut out: Vec<Option<T>> = Vec::with_capacity(n);
    out.resize_with(n, || None);
    let chunk = n.div_ceil(workers);
    std::thread::scope(|scope| {
        for (w, slots) in out.chunks_mut(chunk).enumerate() {
            let f = &f;
            scope.spawn(move || {
                for (i, slot) in slots.iter_mut().enumerate() {
                    *slot = Some(f(w * chunk + i));
                }
            });
        }
    });
    out.into_iter().map(|s| s.expect("worker filled slot")).collect()
}

/// In-place variant of [`parallel_map`]: overwrites `out[i]` with `f(i)`.
/// Allocation-free, for hot per-step kernels that reuse buffers.
pub fn parallel_fill<T, F>(out: &mut [T], f: F)
where
    T: Send,
    F: Fn(usize) -> T + Sync,
{
    let n = out.len();
    let workers = thread_cap().min(n.max(1));
    if workers <= 1 || n < 4096 {
        for (i, slot) in out.iter_mut().enumerate() {
            *slot = f(i);
        }
        return;
    }
    let chunk = n.div_ceil(workers);
    std::thread::scope(|scope| {
        for (w, slots) in out.chunks_mut(chunk).enumerate() {
            let f = &f;
            scope.spawn(move || {
                for (i, slot) in slots.iter_mut().enumerate() {
                    *slot = f(w * chunk + i);
                }
            });
        }
    });
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_recovers_exact_power() {
        let xs = [2.0, 4.0, 8.0, 16.0];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| 3.0 * x.powf(1.75)).collect();
        let s = log_log_slope(&xs, &ys).unwrap();
        assert!((s - 1.75).abs() < 1e-12);
    }

    #[test]
    fn slope_skips_zero_values() {
        let xs = [1.0, 2.0, 4.0];
        let ys = [0.0, 2.0, 4.0];
        let s = log_log_slope(&xs, &ys).unwrap();
        assert!((s - 1.0).abs() < 1e-12);
    }

    #[test]
    fn trapezoid_is_exact_for_linear() {
        let v = trapezoid(0.0, 3.0, 0.1, |t| 2.0 * t + 1.0);
        assert!((v - 12.0).abs() < 1e-12);
    }

    #[test]
    fn trapezoid_converges_quadratically() {
        let exact = 1.0 - (-2.0f64).exp();
        let coarse = (trapezoid(0.0, 2.0, 0.1, |t| (-t).exp()) - exact).abs();
        let fine = (trapezoid(0.0, 2.0, 0.05, |t| (-t).exp()) - exact).abs();
        assert!(fine < 0.3 * coarse);
    }

    #[test]
    fn parallel_map_matches_sequential() {
        let seq: Vec<u64> = (0..1000).map(|i| (i as u64) * 17 + 3).collect();
        let par = parallel_map(1000, |i| (i as u64) * 17 + 3);
        assert_eq!(seq, par);
    }

    #[test]
    fn parallel_fill_covers_every_slot() {
        let n = 10_000;
        let mut out = vec![0u64; n];
        parallel_fill(&mut out, |i| (i as u64) * 31 + 7);
        for (i, v) in out.iter().enumerate() {
            assert_eq!(*v, (i as u64) * 31 + 7);
        }
    }
}
