use std::collections::BTreeMap;

use rand::seq::SliceRandom;

use super::PreprocessError;
use crate::rng;

/// Random undersampling without replacement down to the smallest class count.
///
/// Classes are whatever `label` returns for the items present. The kept
/// items are returned in their original order.
pub fn undersample<T: Clone>(
    items: &[T],
    label: impl Fn(&T) -> usize,
    seed: u64,
) -> Result<Vec<T>, PreprocessError> {
    if items.is_empty() {
        return Err(PreprocessError::EmptyInput);
    }
    let mut by_class: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, item) in items.iter().enumerate() {
        by_class.entry(label(item)).or_default().push(i);
    }
    let target = by_class.values().map(Vec::len).min().unwrap_or(0);
    let mut rng = rng::seeded(seed);
    let mut keep: Vec<usize> = Vec::with_capacity(target * by_class.len());
    for idx in by_class.values_mut() {
        idx.shuffle(&mut rng);
        keep.extend_from_slice(&idx[..target]);
    }
    keep.sort_unstable();
    Ok(keep.into_iter().map(|i| items[i].clone()).collect())
}
