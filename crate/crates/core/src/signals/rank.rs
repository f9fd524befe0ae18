use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::panel::FirmId;

/// Maps a cross-section onto evenly spaced ranks in [-0.5, +0.5].
///
/// The firm at ascending position k of N gets k/(N-1) - 0.5; tied values
/// share the mean of their positions' ranks; a single firm gets 0.
/// Non-finite values are ignored.
pub fn rank_normalize(values: &BTreeMap<FirmId, f64>) -> Result<BTreeMap<FirmId, f64>> {
    let mut sorted: Vec<(&FirmId, f64)> = values
        .iter()
        .filter(|(_, v)| v.is_finite())
        .map(|(f, v)| (f, *v))
        .collect();
    if sorted.is_empty() {
        return Err(Error::EmptyCrossSection);
    }
    sorted.sort_by(|a, b| a.1.total_cmp(&b.1).then_with(|| a.0.cmp(b.0)));
    let n = sorted.len();
    let mut out = BTreeMap::new();
    if n == 1 {
        out.insert(sorted[0].0.clone(), 0.0);
        return Ok(out);
    }
    // rank = (first + last - (n - 1)) / (2 (n - 1)) for a tie group spanning
    // positions first..=last; the numerator is an exact integer so mirrored
    // positions get exactly opposite ranks.
    let denom = 2.0 * (n - 1) as f64;
    let mut start = 0;
    while start < n {
        let mut end = start;
        while end + 1 < n && sorted[end + 1].1 == sorted[start].1 {
            end += 1;
        }
        let numer = (start + end) as f64 - (n - 1) as f64;
        let rank = numer / denom;
        for (firm, _) in &sorted[start..=end] {
            out.insert((*firm).clone(), rank);
        }
        start = end + 1;
    }
    Ok(out)
}
