//! Small numerical helpers.

const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Minimiser of a unimodal function on `[lo, hi]` by golden-section search.
pub fn golden_min(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let mut c = hi - INV_PHI * (hi - lo);
    let mut d = lo + INV_PHI * (hi - lo);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..400 {
        if (hi - lo).abs() <= tol * (1.0 + lo.abs().max(hi.abs())) {
            break;
        }
        if fc <= fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - INV_PHI * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + INV_PHI * (hi - lo);
            fd = f(d);
        }
    }
    let mid = 0.5 * (lo + hi);
    [(f(mid), mid), (fc, c), (fd, d)]
        .into_iter()
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .unwrap()
        .1
}

/// Empirical `tau`-quantile: the order statistic of rank `ceil(tau n)`, which
/// minimises the check loss `sum rho_tau(v - q)`.
pub fn quantile(values: &mut [f64], tau: f64) -> f64 {
    assert!(!values.is_empty());
    let n = values.len();
    let k = ((tau * n as f64).ceil() as usize).clamp(1, n) - 1;
    *values.select_nth_unstable_by(k, f64::total_cmp).1
}

/// Check loss of quantile regression.
#[inline]
pub fn check_loss(r: f64, tau: f64) -> f64 {
    if r >= 0.0 {
        tau * r
    } else {
        (tau - 1.0) * r
    }
}

pub fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Population standard deviation.
pub fn std_dev(v: &[f64]) -> f64 {
    let m = mean(v);
    (v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / v.len() as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_finds_parabola_minimum() {
        let x = golden_min(|x| (x - 1.3) * (x - 1.3), -5.0, 5.0, 1e-12);
        assert!((x - 1.3).abs() < 1e-6);
    }

    #[test]
    fn quantile_rank() {
        let mut v: Vec<f64> = (1..=100).map(f64::from).collect();
        assert_eq!(quantile(&mut v, 0.99), 99.0);
        assert_eq!(quantile(&mut v, 0.5), 50.0);
    }
}
