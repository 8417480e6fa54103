use super::heuristics::Heuristic;

/// Answers "is there a solution of cost at most `k`?" from a single
/// heuristic value, assuming the heuristic is within ε/2 of `h*`.
///
/// Sound whenever |ĥ(s) − h*(s)| < ε/2 and solution costs differ by 0 or at
/// least ε: a yes-instance has h* ≤ k so ĥ < k + ε/2, and a no-instance has
/// h* ≥ k + ε so ĥ > k + ε/2.
pub fn decide_via_heuristic(hhat: f64, k: f64, eps: f64) -> bool {
    hhat < k + eps / 2.0
}

/// [`decide_via_heuristic`] with a heuristic reporting real-valued costs.
pub fn decide_with<S, H: Heuristic<S> + ?Sized>(heuristic: &H, state: &S, k: f64, eps: f64) -> bool {
    decide_via_heuristic(heuristic.estimate(state), k, eps)
}
