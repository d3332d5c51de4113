use rand::seq::SliceRandom;

use super::MetricsError;
use crate::rng;

/// Seeded shuffle of `0..n` cut into `k` contiguous folds. The first `n % k`
/// folds get one extra index.
pub fn kfold_split(n: usize, k: usize, seed: u64) -> Result<Vec<Vec<usize>>, MetricsError> {
    if k == 0 || n < k {
        return Err(MetricsError::TooFewSamples { n, k });
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut rng::seeded(seed));
    let (base, extra) = (n / k, n % k);
    let mut folds = Vec::with_capacity(k);
    let mut start = 0;
    for f in 0..k {
        let len = base + usize::from(f < extra);
        folds.push(idx[start..start + len].to_vec());
        start += len;
    }
    Ok(folds)
}
