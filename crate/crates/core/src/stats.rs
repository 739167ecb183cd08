//! Small statistics helpers shared by the test oracles and the benchmark
//! harness: chi-square goodness-of-fit, total-variation distance, and a
//! splitmix step for deriving independent seeds.

/// Pearson chi-square statistic of observed counts against expected
/// probabilities over `n` draws. Bins with zero expectation are skipped
/// (the caller asserts their counts separately).
pub fn chi_square_stat(counts: &[u64], probs: &[f64], n: u64) -> f64 {
    assert_eq!(counts.len(), probs.len());
    let n = n as f64;
    counts
        .iter()
        .zip(probs)
        .filter(|(_, &p)| p > 0.0)
        .map(|(&c, &p)| {
            let expected = p * n;
            let d = c as f64 - expected;
            d * d / expected
        })
        .sum()
}

/// 99% critical value of the chi-square distribution with `df` degrees of
/// freedom. Exact table for small df, Wilson-Hilferty beyond it.
pub fn chi_square_crit_99(df: usize) -> f64 {
    const TABLE: [f64; 12] = [
        6.635, 9.210, 11.345, 13.277, 15.086, 16.812, 18.475, 20.090, 21.666, 23.209, 24.725,
        26.217,
    ];
    if df == 0 {
        return 0.0;
    }
    if df <= TABLE.len() {
        return TABLE[df - 1];
    }
    let z99 = 2.3263478740408408;
    let d = df as f64;
    let h = 2.0 / (9.0 * d);
    d * (1.0 - h + z99 * h.sqrt()).powi(3)
}

/// Total-variation distance between an empirical distribution (counts over
/// `n` draws) and a reference probability vector.
pub fn tv_distance(counts: &[u64], probs: &[f64], n: u64) -> f64 {
    assert_eq!(counts.len(), probs.len());
    let n = n as f64;
    0.5 * counts
        .iter()
        .zip(probs)
        .map(|(&c, &p)| (c as f64 / n - p).abs())
        .sum::<f64>()
}

/// splitmix64 step; used to derive per-trial and per-component seeds from a
/// master seed without correlated streams.
pub fn splitmix64(state: u64) -> u64 {
    let mut z = state.wrapping_add(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Median of a slice (averaging the middle pair for even lengths).
pub fn median(values: &[f64]) -> f64 {
    assert!(!values.is_empty());
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}
