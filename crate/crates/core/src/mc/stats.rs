//! Blocking error analysis, Kolmogorov–Smirnov statistic and weighted
//! straight-line fits.

use crate::numeric::NeumaierSum;

/// Minimum number of bins used for a blocking error bar.
pub const MIN_BINS: usize = 16;

fn mean(xs: &[f64]) -> f64 {
    xs.iter().copied().collect::<NeumaierSum>().value() / xs.len() as f64
}

fn standard_error(xs: &[f64]) -> f64 {
    let n = xs.len();
    if n < 2 {
        return 0.0;
    }
    let m = mean(xs);
    let var = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1) as f64;
    (var / n as f64).sqrt()
}

/// Mean, error bar and bin count of a correlated series. Bins are doubled in
/// length while at least [`MIN_BINS`] remain, and the largest error seen is
/// reported, which covers the plateau reached once bins exceed the
/// autocorrelation time. Series shorter than `MIN_BINS` fall back to the
/// naive error.
pub fn blocking(series: &[f64]) -> (f64, f64, usize) {
    if series.is_empty() {
        return (f64::NAN, f64::NAN, 0);
    }
    let m = mean(series);
    if series.len() < MIN_BINS {
        return (m, standard_error(series), series.len());
    }
    let mut bins: Vec<f64> = series.to_vec();
    let mut best = (standard_error(&bins), bins.len());
    while bins.len() / 2 >= MIN_BINS {
        bins = bins.chunks_exact(2).map(|c| 0.5 * (c[0] + c[1])).collect();
        let e = standard_error(&bins);
        if e > best.0 {
            best = (e, bins.len());
        }
    }
    (m, best.0, best.1)
}

/// Whether the two halves of a series disagree by more than `sigmas`
/// combined blocking errors.
pub fn drifts(series: &[f64], sigmas: f64) -> bool {
    if series.len() < 2 * MIN_BINS {
        return false;
    }
    let (a, b) = series.split_at(series.len() / 2);
    let (ma, ea, _) = blocking(a);
    let (mb, eb, _) = blocking(b);
    (ma - mb).abs() > sigmas * (ea * ea + eb * eb).sqrt()
}

/// Kolmogorov–Smirnov statistic `sup |F_n - F|` of a sample against a
/// continuous distribution function.
pub fn ks_statistic<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> f64 {
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

/// Asymptotic critical value of the one-sample KS statistic at level 1%.
pub fn ks_critical_1pct(n: usize) -> f64 {
    1.628 / (n as f64).sqrt()
}

/// Weighted least-squares line `y = a + b x` with standard errors of `b`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LineFit {
    pub intercept: f64,
    pub slope: f64,
    pub slope_error: f64,
}

pub fn weighted_line_fit(x: &[f64], y: &[f64], sigma: &[f64]) -> LineFit {
    let w: Vec<f64> = sigma
        .iter()
        .map(|s| if *s > 0.0 { 1.0 / (s * s) } else { 1.0 })
        .collect();
    let sw: f64 = w.iter().sum();
    let sx: f64 = w.iter().zip(x).map(|(w, x)| w * x).sum();
    let sy: f64 = w.iter().zip(y).map(|(w, y)| w * y).sum();
    let sxx: f64 = w.iter().zip(x).map(|(w, x)| w * x * x).sum();
    let sxy: f64 = w.iter().zip(x).zip(y).map(|((w, x), y)| w * x * y).sum();
    let det = sw * sxx - sx * sx;
    let slope = (sw * sxy - sx * sy) / det;
    let intercept = (sy - slope * sx) / sw;
    LineFit {
        intercept,
        slope,
        slope_error: (sw / det).sqrt(),
    }
}
