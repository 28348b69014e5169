/// Mean and population standard deviation, `None` for an empty sample.
pub fn mean_std(values: &[f64]) -> Option<(f64, f64)> {
    if values.is_empty() {
        return None;
    }
    let n = values.len() as f64;
    let (lo, hi) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    // a constant sample must come back with exactly its value and sigma 0
    if lo == hi {
        return Some((lo, 0.0));
    }
    let mean = (values.iter().sum::<f64>() / n).clamp(lo, hi);
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    Some((mean, var.sqrt()))
}
