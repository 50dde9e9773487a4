use super::DemandMatrix;

/// Moving-average forecast: slot `t` gets the mean of the previous
/// `window_slots` observed slots, or of whatever shorter prefix exists.
/// Slot 1 has no history and is predicted as zero.
pub fn predict_demand(history: &DemandMatrix, window_slots: usize) -> DemandMatrix {
    let window = window_slots.max(1);
    let mut out = DemandMatrix::zeros(history.users().to_vec(), history.contents().to_vec(), history.slots());
    let (nc, nu) = (history.contents().len(), history.users().len());
    for t in 2..=history.slots() {
        let from = t.saturating_sub(window).max(1);
        let span = (t - from) as f64;
        for c in 0..nc {
            for u in 0..nu {
                let sum: f64 = (from..t).map(|s| history.get(s, c, u)).sum();
                out.set(t, c, u, sum / span);
            }
        }
    }
    out
}
