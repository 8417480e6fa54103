use std::collections::BTreeMap;

use crate::error::{Error, Result};

/// Result of a minimal-size search.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchOutcome {
    pub min_size: usize,
    /// Every probed size with its verdict, in probe order.
    pub probes: Vec<(usize, bool)>,
    /// Some larger size failed where a smaller one fit.
    pub non_monotone: bool,
}

impl SearchOutcome {
    /// `size:0|1` pairs joined by `;`.
    pub fn probe_string(&self) -> String {
        self.probes
            .iter()
            .map(|&(s, ok)| format!("{s}:{}", u8::from(ok)))
            .collect::<Vec<_>>()
            .join(";")
    }
}

struct Memo<F> {
    predicate: F,
    seen: BTreeMap<usize, bool>,
    probes: Vec<(usize, bool)>,
}

impl<F: FnMut(usize) -> Result<bool>> Memo<F> {
    fn test(&mut self, size: usize) -> Result<bool> {
        if let Some(&v) = self.seen.get(&size) {
            return Ok(v);
        }
        let v = (self.predicate)(size)?;
        self.seen.insert(size, v);
        self.probes.push((size, v));
        Ok(v)
    }

    fn finish(self, min_size: usize) -> SearchOutcome {
        let mut smallest_fit = usize::MAX;
        let mut non_monotone = false;
        for (&size, &ok) in &self.seen {
            if ok {
                smallest_fit = smallest_fit.min(size);
            } else if size > smallest_fit {
                non_monotone = true;
            }
        }
        SearchOutcome {
            min_size,
            probes: self.probes,
            non_monotone,
        }
    }
}

/// Smallest size in `[lo, hi]` for which `predicate` holds, assuming it
/// holds at `hi` and is monotone. Each size is evaluated at most once.
pub fn binary_search_min_size<F>(lo: usize, hi: usize, predicate: F) -> Result<SearchOutcome>
where
    F: FnMut(usize) -> Result<bool>,
{
    if lo == 0 || lo > hi {
        return Err(Error::InvalidArgument(format!("bad search range [{lo}, {hi}]")));
    }
    let mut memo = Memo {
        predicate,
        seen: BTreeMap::new(),
        probes: Vec::new(),
    };
    let min = bisect(&mut memo, lo, hi)?;
    Ok(memo.finish(min))
}

fn bisect<F: FnMut(usize) -> Result<bool>>(memo: &mut Memo<F>, mut lo: usize, mut hi: usize) -> Result<usize> {
    // Invariant: hi fits (assumed or observed); everything below lo failed.
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if memo.test(mid)? {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    Ok(hi)
}

/// Doubles from `lo` until the predicate holds (clamping at `cap`), then
/// bisects between the last failure and the first success.
///
/// Plain bisection never observes a non-monotone outcome: every failure it
/// sees lies below every success. `confirm` extra sizes just above the
/// minimum are probed afterwards so that a stochastic predicate can be
/// caught misbehaving; the minimum itself is not revised.
pub fn find_min_size<F>(lo: usize, cap: usize, confirm: usize, predicate: F) -> Result<SearchOutcome>
where
    F: FnMut(usize) -> Result<bool>,
{
    if lo == 0 || lo > cap {
        return Err(Error::InvalidArgument(format!("bad search range [{lo}, {cap}]")));
    }
    let mut memo = Memo {
        predicate,
        seen: BTreeMap::new(),
        probes: Vec::new(),
    };
    let mut low = lo;
    let mut size = lo;
    loop {
        if memo.test(size)? {
            break;
        }
        if size == cap {
            return Err(Error::NoFit { cap });
        }
        low = size + 1;
        size = size.saturating_mul(2).min(cap);
    }
    let min = bisect(&mut memo, low, size)?;
    for extra in (min + 1..=size).take(confirm) {
        memo.test(extra)?;
    }
    Ok(memo.finish(min))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn threshold_predicates() {
        for k in 1..=64 {
            let out = find_min_size(1, 1 << 16, 0, |s| Ok(s >= k)).unwrap();
            assert_eq!(out.min_size, k);
            assert!(!out.non_monotone);
            let out = binary_search_min_size(1, 64, |s| Ok(s >= k)).unwrap();
            assert_eq!(out.min_size, k);
        }
    }

    #[test]
    fn seventeen() {
        let out = find_min_size(1, 1 << 16, 0, |s| Ok(s >= 17)).unwrap();
        assert_eq!(out.min_size, 17);
        let sizes: Vec<usize> = out.probes.iter().map(|p| p.0).collect();
        assert_eq!(&sizes[..6], &[1, 2, 4, 8, 16, 32]);
    }

    #[test]
    fn true_at_lo() {
        let out = find_min_size(3, 100, 0, |_| Ok(true)).unwrap();
        assert_eq!(out.min_size, 3);
        assert_eq!(out.probes, vec![(3, true)]);
    }

    #[test]
    fn each_size_probed_once() {
        let mut calls = Vec::new();
        find_min_size(1, 1000, 1, |s| {
            calls.push(s);
            Ok(s >= 300)
        })
        .unwrap();
        let mut sorted = calls.clone();
        sorted.sort_unstable();
        sorted.dedup();
        assert_eq!(sorted.len(), calls.len());
    }

    #[test]
    fn no_fit_at_cap() {
        assert!(matches!(find_min_size(1, 64, 0, |_| Ok(false)), Err(Error::NoFit { cap: 64 })));
        // Cap that is not a power of two is still probed.
        let out = find_min_size(1, 50, 0, |s| Ok(s >= 50)).unwrap();
        assert_eq!(out.min_size, 50);
    }

    #[test]
    fn bisection_alone_sees_monotone_data() {
        // Fits at 6 and from 8 on; 7 is never probed.
        let out = find_min_size(1, 64, 0, |s| Ok(s == 6 || s >= 8)).unwrap();
        assert_eq!(out.min_size, 6);
        assert!(!out.non_monotone);
    }

    #[test]
    fn confirmation_flags_non_monotone() {
        let out = find_min_size(1, 64, 2, |s| Ok(s == 6 || s >= 8)).unwrap();
        assert_eq!(out.min_size, 6);
        assert!(out.non_monotone, "{:?}", out.probes);
        assert!(out.probes.contains(&(7, false)));
        // Confirmation probes never go past the first doubling success.
        let out = find_min_size(1, 64, 5, |s| Ok(s >= 8)).unwrap();
        assert_eq!(out.min_size, 8);
        assert!(out.probes.iter().all(|p| p.0 <= 8));
        assert_eq!(out.probe_string(), "1:0;2:0;4:0;8:1;6:0;7:0");
    }

    #[test]
    fn propagates_errors() {
        let out = find_min_size(1, 64, 0, |s| if s == 4 { Err(Error::EmptyInput) } else { Ok(false) });
        assert!(matches!(out, Err(Error::EmptyInput)));
    }

    proptest::proptest! {
        #[test]
        fn monotone_predicates(k in 1usize..5000, lo in 1usize..50) {
            let out = find_min_size(lo, 1 << 16, 0, |s| Ok(s >= k)).unwrap();
            proptest::prop_assert_eq!(out.min_size, k.max(lo));
            proptest::prop_assert!(out.probes.len() <= 2 * 17 + 1);
        }
    }
}
