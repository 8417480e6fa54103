//! Cross-checks of the exact oracles against independent slow solvers,
//! packaged for the `verify` command.

use std::fmt::Write as _;

use crate::domains::{BlocksDomain, Cost, DomainKind, PancakeDomain, SearchDomain, TspInstance};
use crate::error::{Error, Result};
use crate::oracles::reference::{bfs_distances, tsp_brute_force_units};
use crate::oracles::{astar, held_karp_units, Heuristic, TieBreak, DEFAULT_HELD_KARP_CAP};
use crate::rng::{derive_seed, rng_from_seed};

pub const DEFAULT_MAX_PANCAKE: usize = 6;
pub const DEFAULT_MAX_TSP: usize = 7;
pub const DEFAULT_MAX_BLOCKS: usize = 5;
/// Largest sizes the exhaustive checks accept.
pub const LIMIT_PANCAKE: usize = 8;
pub const LIMIT_TSP: usize = 10;
pub const LIMIT_BLOCKS: usize = 6;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerifyOptions {
    /// Only this domain; all three when `None`.
    pub domain: Option<DomainKind>,
    /// Only this size; every size up to the default bound when `None`.
    pub n: Option<usize>,
    /// Random TSP instances per size.
    pub tsp_instances: usize,
    pub seed: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            domain: None,
            n: None,
            tsp_instances: 50,
            seed: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckResult {
    pub domain: DomainKind,
    pub n: usize,
    pub check: &'static str,
    pub cases: usize,
    pub failures: usize,
    /// First failure, if any.
    pub detail: String,
}

impl CheckResult {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct VerifyReport {
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(CheckResult::passed)
    }

    pub fn table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{:<8} {:>3}  {:<16} {:>8} {:>8}  result", "domain", "n", "check", "cases", "failures");
        for c in &self.checks {
            let _ = writeln!(
                out,
                "{:<8} {:>3}  {:<16} {:>8} {:>8}  {}{}",
                c.domain.name(),
                c.n,
                c.check,
                c.cases,
                c.failures,
                if c.passed() { "pass" } else { "FAIL" },
                if c.detail.is_empty() { String::new() } else { format!("  ({})", c.detail) }
            );
        }
        let failed = self.checks.iter().filter(|c| !c.passed()).count();
        if failed == 0 {
            let _ = writeln!(out, "OK: {} checks passed", self.checks.len());
        } else {
            let _ = writeln!(out, "FAILED: {failed} of {} checks failed", self.checks.len());
        }
        out
    }
}

fn sizes(kind: DomainKind, opts: &VerifyOptions, default_max: usize, limit: usize) -> Result<Vec<usize>> {
    match opts.n {
        Some(n) if n > limit => Err(Error::SizeLimit { n, cap: limit }),
        Some(n) if n < kind.min_size() => Err(Error::InvalidArgument(format!(
            "{kind} needs n >= {}",
            kind.min_size()
        ))),
        Some(n) => Ok(vec![n]),
        None => Ok((kind.min_size().max(2)..=default_max).collect()),
    }
}

/// Admissibility, consistency and A*-vs-BFS agreement over every state.
fn exhaustive<D, H>(
    kind: DomainKind,
    n: usize,
    domain: &D,
    goal: D::State,
    heuristic: &H,
    states: usize,
) -> Vec<CheckResult>
where
    D: SearchDomain,
    H: Heuristic<D::State>,
{
    let hstar = bfs_distances(domain, goal);
    let mut admissible = CheckResult {
        domain: kind,
        n,
        check: "admissible",
        cases: hstar.len(),
        failures: 0,
        detail: String::new(),
    };
    let mut consistent = CheckResult {
        check: "consistent",
        cases: 0,
        ..admissible.clone()
    };
    let mut astar_bfs = CheckResult {
        check: "astar=bfs",
        ..admissible.clone()
    };
    let mut coverage = CheckResult {
        check: "state count",
        cases: 1,
        ..admissible.clone()
    };
    if hstar.len() != states {
        coverage.failures = 1;
        coverage.detail = format!("BFS reached {} states, expected {states}", hstar.len());
    }
    let mut ordered: Vec<(&D::State, &Cost)> = hstar.iter().collect();
    ordered.sort_by_key(|(s, _)| format!("{s:?}"));
    for (s, &d) in ordered {
        let h = heuristic.estimate(s);
        if h > d as f64 {
            admissible.failures += 1;
            if admissible.detail.is_empty() {
                admissible.detail = format!("{s:?}: h={h} > h*={d}");
            }
        }
        for (t, cost) in domain.successors(s) {
            consistent.cases += 1;
            if h > cost as f64 + heuristic.estimate(&t) {
                consistent.failures += 1;
                if consistent.detail.is_empty() {
                    consistent.detail = format!("{s:?} -> {t:?}");
                }
            }
        }
        match astar(domain, s.clone(), heuristic, TieBreak::HighG) {
            Ok(r) if r.optimal_cost == d => {}
            Ok(r) => {
                astar_bfs.failures += 1;
                if astar_bfs.detail.is_empty() {
                    astar_bfs.detail = format!("{s:?}: A* {} vs BFS {d}", r.optimal_cost);
                }
            }
            Err(e) => {
                astar_bfs.failures += 1;
                if astar_bfs.detail.is_empty() {
                    astar_bfs.detail = format!("{s:?}: {e}");
                }
            }
        }
    }
    vec![coverage, admissible, consistent, astar_bfs]
}

fn factorial(n: usize) -> usize {
    (1..=n).product()
}

fn tsp_check(n: usize, instances: usize, seed: u64) -> Result<CheckResult> {
    let mut rng = rng_from_seed(derive_seed(seed, &[n as u64]));
    let mut result = CheckResult {
        domain: DomainKind::Tsp,
        n,
        check: "held-karp=brute",
        cases: instances,
        failures: 0,
        detail: String::new(),
    };
    for i in 0..instances {
        let inst = TspInstance::random(n, &mut rng)?;
        let hk = held_karp_units(&inst, DEFAULT_HELD_KARP_CAP)?;
        let bf = tsp_brute_force_units(&inst);
        if hk != bf {
            result.failures += 1;
            if result.detail.is_empty() {
                result.detail = format!("instance {i}: {hk} vs {bf} tenths");
            }
        }
    }
    Ok(result)
}

pub fn run_verify(opts: &VerifyOptions) -> Result<VerifyReport> {
    let wanted = |k: DomainKind| opts.domain.is_none_or(|d| d == k);
    if opts.n.is_some() && opts.domain.is_none() {
        return Err(Error::InvalidArgument("a size needs a domain".into()));
    }
    let mut report = VerifyReport::default();
    if wanted(DomainKind::Pancake) {
        for n in sizes(DomainKind::Pancake, opts, DEFAULT_MAX_PANCAKE, LIMIT_PANCAKE)? {
            let d = PancakeDomain::new(n)?;
            report
                .checks
                .extend(exhaustive(DomainKind::Pancake, n, &d, d.goal(), &crate::oracles::GapHeuristic, factorial(n)));
        }
    }
    if wanted(DomainKind::Tsp) {
        for n in sizes(DomainKind::Tsp, opts, DEFAULT_MAX_TSP, LIMIT_TSP)? {
            report.checks.push(tsp_check(n, opts.tsp_instances, opts.seed)?);
        }
    }
    if wanted(DomainKind::Blocks) {
        for n in sizes(DomainKind::Blocks, opts, DEFAULT_MAX_BLOCKS, LIMIT_BLOCKS)? {
            let d = BlocksDomain::new(n)?;
            let count = BlocksDomain::state_count(n).expect("small n") as usize;
            report
                .checks
                .extend(exhaustive(DomainKind::Blocks, n, &d, d.goal(), &crate::oracles::MisplacedBlocks, count));
        }
    }
    Ok(report)
}
