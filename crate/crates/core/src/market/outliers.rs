//! Cross-sectional outlier screening.

/// Flags quotes further than `iqr_multiple` interquartile ranges from the
/// median of a centred window of neighbouring maturities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutlierPolicy {
    pub window: usize,
    pub iqr_multiple: f64,
}

impl Default for OutlierPolicy {
    fn default() -> Self {
        Self {
            window: 7,
            iqr_multiple: 5.0,
        }
    }
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let (lo, hi) = (pos.floor() as usize, pos.ceil() as usize);
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// `true` at each index judged an outlier. Series shorter than five points
/// are left alone.
pub fn flag_outliers(values: &[f64], policy: &OutlierPolicy) -> Vec<bool> {
    let n = values.len();
    let w = policy.window.max(5).min(n);
    if n < 5 {
        return vec![false; n];
    }
    (0..n)
        .map(|i| {
            let start = i.saturating_sub(w / 2).min(n - w);
            let mut win: Vec<f64> = values[start..start + w].to_vec();
            win.sort_by(f64::total_cmp);
            let med = quantile(&win, 0.5);
            let iqr = quantile(&win, 0.75) - quantile(&win, 0.25);
            let dev = (values[i] - med).abs();
            dev > policy.iqr_multiple * iqr && dev > 1e-12 * med.abs().max(1e-300)
        })
        .collect()
}
