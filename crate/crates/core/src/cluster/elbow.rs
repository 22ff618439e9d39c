use serde::{Deserialize, Serialize};

use super::{kmeans_fit, KMeansParams};
use crate::matrix::Points;
use crate::seed::derive_indexed;
use crate::{Error, Result};

/// Cluster counts scanned by default; includes the k = 32 operating point.
pub const DEFAULT_ELBOW_KS: &[usize] = &[2, 4, 8, 16, 24, 32, 40, 48, 64];

/// Marginal relative SSE drop below which more clusters stop paying off.
pub const DEFAULT_ELBOW_THRESHOLD: f64 = 0.02;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElbowCurve {
    /// `(k, sse)` in ascending `k`.
    pub points: Vec<(usize, f64)>,
    pub chosen_k: Option<usize>,
}

impl ElbowCurve {
    /// Relative SSE drop between consecutive points: `(sse_a - sse_b) / sse_a`.
    pub fn relative_drops(&self) -> Vec<(usize, usize, f64)> {
        self.points
            .windows(2)
            .map(|w| {
                let ((ka, a), (kb, b)) = (w[0], w[1]);
                let drop = if a > 0.0 { (a - b) / a } else { 0.0 };
                (ka, kb, drop)
            })
            .collect()
    }

    /// Two-column `k<TAB>sse` table.
    pub fn to_table(&self) -> String {
        let mut s = String::from("k\tsse\n");
        for (k, sse) in &self.points {
            s.push_str(&format!("{k}\t{sse:.6}\n"));
        }
        s
    }
}

/// Best-of-`restarts` k-means SSE for each `k`. The chosen `k` is the
/// smallest one whose relative drop to the next `k` is below `threshold`.
pub fn elbow_scan<P: Points + ?Sized>(
    x: &P,
    ks: &[usize],
    seed: u64,
    restarts: usize,
    threshold: f64,
) -> Result<ElbowCurve> {
    if ks.is_empty() {
        return Err(Error::invalid("ks", "no cluster counts given"));
    }
    if ks.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid("ks", "must be strictly ascending"));
    }
    let mut points = Vec::with_capacity(ks.len());
    for &k in ks {
        let params = KMeansParams::new(k, derive_indexed(seed, "elbow", k as u64)).restarts(restarts);
        let model = kmeans_fit(x, &params)?;
        log::debug!("elbow k={k} sse={}", model.sse);
        points.push((k, model.sse));
    }
    let mut curve = ElbowCurve { points, chosen_k: None };
    curve.chosen_k = curve
        .relative_drops()
        .into_iter()
        .find(|&(_, _, drop)| drop < threshold)
        .map(|(k, _, _)| k);
    Ok(curve)
}
