//! Small numeric helpers shared by the verifiers.

/// Neumaier-compensated sum.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for x in values {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Mean and standard error of the mean (sample standard deviation / sqrt(n)).
pub fn mean_and_se(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = compensated_sum(values.iter().copied()) / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let ss = compensated_sum(values.iter().map(|x| (x - mean) * (x - mean)));
    let sd = (ss / (n - 1) as f64).sqrt();
    (mean, sd / (n as f64).sqrt())
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        return f64::NAN;
    }
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Smallest sample value `c` such that the fraction of samples strictly
/// above `c` is at most `alpha`. Returns 0 when every sample may exceed.
pub fn upper_quantile(values: &[f64], alpha: f64) -> f64 {
    let n = values.len();
    if n == 0 {
        return f64::NAN;
    }
    let allowed = (alpha.max(0.0) * n as f64).floor() as usize;
    if allowed >= n {
        return 0.0;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    v[n - 1 - allowed]
}

/// Fraction of samples strictly greater than `threshold`.
pub fn exceed_freq(values: &[f64], threshold: f64) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    values.iter().filter(|&&x| x > threshold).count() as f64 / values.len() as f64
}

/// Relative disagreement |a - b| / mean(|a|, |b|); 0 when both vanish.
pub fn relative_spread(a: f64, b: f64) -> f64 {
    let scale = 0.5 * (a.abs() + b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

/// Double factorial (p-1)!! for even p, as f64.
pub fn odd_double_factorial(p: u32) -> f64 {
    let mut acc = 1.0;
    let mut k = p as i64 - 1;
    while k > 1 {
        acc *= k as f64;
        k -= 2;
    }
    acc
}
