//! Sliding-window helpers shared by the windowed detectors.

/// Standard deviations below this are treated as constant windows.
pub const CONSTANT_STD: f64 = 1e-12;

/// Copies the length-`m` window ending at `end` (inclusive) into `buf`.
/// Positions before the start of `series` repeat `series[0]`.
pub fn window_ending_at(series: &[f64], end: usize, m: usize, buf: &mut Vec<f64>) {
    buf.clear();
    let first = end + 1;
    if first >= m {
        buf.extend_from_slice(&series[first - m..=end]);
    } else {
        buf.resize(m - first, series[0]);
        buf.extend_from_slice(&series[..=end]);
    }
}

pub fn mean_std(window: &[f64]) -> (f64, f64) {
    let n = window.len() as f64;
    let mean = window.iter().sum::<f64>() / n;
    let var = window.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Z-normalized copy of `window`, or `None` for a constant window.
pub fn znormalize(window: &[f64]) -> (f64, Option<Vec<f64>>) {
    let (mean, std) = mean_std(window);
    if std < CONSTANT_STD {
        return (mean, None);
    }
    (mean, Some(window.iter().map(|x| (x - mean) / std).collect()))
}

/// Unit vector along a centred linear ramp.
pub fn ramp_direction(m: usize) -> Vec<f64> {
    if m == 1 {
        return vec![1.0];
    }
    let centre = (m as f64 - 1.0) / 2.0;
    let raw: Vec<f64> = (0..m).map(|i| i as f64 - centre).collect();
    let norm = raw.iter().map(|x| x * x).sum::<f64>().sqrt();
    raw.into_iter().map(|x| x / norm).collect()
}

pub fn uniform_direction(m: usize) -> Vec<f64> {
    vec![1.0 / (m as f64).sqrt(); m]
}
