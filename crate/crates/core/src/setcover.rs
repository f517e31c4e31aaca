//! Interval set cover over access-satellite pairs: instance construction, an
//! exact solver, and an LP-format export.
//!
//! Candidates are the pairwise intersections of the two stations' visibility
//! windows; each candidate covers a contiguous run of samples, so the
//! covering constraint matrix has consecutive ones and a shortest-path style
//! dynamic program over coverage prefixes is exactly optimal. The `.lp`
//! export exists so the same instances can be handed to an off-the-shelf ILP
//! solver for cross-checking.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::fmt::Write as _;

use crate::grid::TimeGrid;
use crate::orbital::{Constellation, GroundStation};
use crate::selection::AccessPair;
use crate::{Error, Result};

/// One selectable element: an access pair with its maximal joint-visibility
/// interval and a non-negative weight (1 unless stated otherwise).
#[derive(Clone, Debug, PartialEq)]
pub struct CoverElement {
    pub pair: AccessPair,
    pub weight: f64,
}

/// The covering problem over a sampling grid.
#[derive(Clone, Debug)]
pub struct CoverInstance {
    pub grid: TimeGrid,
    pub elements: Vec<CoverElement>,
}

/// Selected elements and their total weight.
#[derive(Clone, Debug)]
pub struct CoverSolution {
    pub selected: Vec<CoverElement>,
    pub objective: f64,
}

/// Build the instance for a station pair: every non-empty intersection of a
/// source-side window with a destination-side window yields one unit-weight
/// element.
pub fn build_instance(
    constellation: &Constellation,
    src: &GroundStation,
    dst: &GroundStation,
    grid: &TimeGrid,
) -> CoverInstance {
    let q = constellation.params().sats_per_plane();
    let src_runs = constellation.visibility_runs(src, grid);
    let dst_runs = constellation.visibility_runs(dst, grid);
    let mut elements = Vec::new();
    for a in &src_runs {
        for b in &dst_runs {
            let start = a.start.max(b.start);
            let end = a.end.min(b.end);
            if start < end {
                elements.push(CoverElement {
                    pair: AccessPair {
                        src_sat: crate::orbital::SatelliteId::from_flat(a.sat_flat, q),
                        dst_sat: crate::orbital::SatelliteId::from_flat(b.sat_flat, q),
                        start_s: grid.time(start),
                        end_s: grid.time(end),
                    },
                    weight: 1.0,
                });
            }
        }
    }
    CoverInstance {
        grid: *grid,
        elements,
    }
}

/// Element interval in grid indices, clipped to the horizon.
fn element_span(grid: &TimeGrid, e: &CoverElement) -> (usize, usize) {
    let a = grid.index_at_or_after(e.pair.start_s);
    let b = grid.index_at_or_after(e.pair.end_s);
    (a, b)
}

#[derive(Copy, Clone)]
struct Candidate {
    cost: f64,
    /// Covered prefix the element chains onto.
    base: usize,
    index: usize,
    /// Coverage limit: valid while the next uncovered sample is below this.
    expires: usize,
}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .cost
            .total_cmp(&self.cost)
            .then_with(|| other.base.cmp(&self.base))
            .then_with(|| other.index.cmp(&self.index))
    }
}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl PartialEq for Candidate {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Candidate {}

/// Exact minimum-weight cover.
///
/// Covered prefixes are expanded in Dijkstra order: an element spanning
/// `[a, b)` extends any covered prefix `k` with `a <= k < b` to `b`. Because
/// weights are non-negative, prefixes settle in non-decreasing cost order, so
/// an element activated when the frontier first reaches `a` chains onto the
/// cheapest prefix it can ever use. Fails with the earliest uncovered sample
/// time when no element covers some sample.
pub fn solve_exact(instance: &CoverInstance) -> Result<CoverSolution> {
    let grid = &instance.grid;
    let n = grid.steps();
    if n == 0 {
        return Ok(CoverSolution {
            selected: Vec::new(),
            objective: 0.0,
        });
    }
    for (i, e) in instance.elements.iter().enumerate() {
        if !(e.weight >= 0.0) {
            return Err(Error::Cover(format!(
                "element {i} has negative weight {}",
                e.weight
            )));
        }
    }

    // Elements sorted by start, walked in lockstep with the prefix sweep.
    let mut order: Vec<(usize, usize, usize)> = instance
        .elements
        .iter()
        .enumerate()
        .filter_map(|(i, e)| {
            let (a, b) = element_span(grid, e);
            (a < b).then_some((a, b, i))
        })
        .collect();
    order.sort_unstable_by_key(|&(a, b, i)| (a, b, i));

    let mut best = vec![f64::INFINITY; n + 1];
    let mut chosen_by: Vec<usize> = vec![usize::MAX; n + 1];
    let mut predecessor: Vec<usize> = vec![usize::MAX; n + 1];
    best[0] = 0.0;

    let mut heap: BinaryHeap<Candidate> = BinaryHeap::new();
    let mut next_element = 0;
    let mut frontier = 0usize; // samples 0..frontier are covered

    while frontier < n {
        // Activate elements whose interval starts at or before the frontier.
        // The frontier they see now is the cheapest settled prefix >= their
        // start, so this base is final.
        while next_element < order.len() && order[next_element].0 <= frontier {
            let (_, b, i) = order[next_element];
            next_element += 1;
            if b > frontier {
                heap.push(Candidate {
                    cost: best[frontier] + instance.elements[i].weight,
                    base: frontier,
                    index: i,
                    expires: b,
                });
            }
        }
        // Discard candidates that no longer reach the frontier sample.
        while let Some(c) = heap.peek() {
            if c.expires <= frontier {
                heap.pop();
            } else {
                break;
            }
        }
        let Some(c) = heap.pop() else {
            return Err(Error::InfeasibleCover {
                t: grid.time(frontier),
            });
        };
        let b = c.expires;
        if c.cost < best[b] {
            best[b] = c.cost;
            chosen_by[b] = c.index;
            predecessor[b] = c.base;
        }
        frontier = b;
    }

    let mut selected_idx = Vec::new();
    let mut k = frontier;
    while k > 0 {
        let e = chosen_by[k];
        selected_idx.push(e);
        k = predecessor[k];
    }
    selected_idx.reverse();
    let objective = selected_idx
        .iter()
        .map(|&i| instance.elements[i].weight)
        .sum();
    Ok(CoverSolution {
        selected: selected_idx
            .into_iter()
            .map(|i| instance.elements[i].clone())
            .collect(),
        objective,
    })
}

/// Independent feasibility check: every sample covered by at least one
/// selected interval and the objective equal to the selected weight sum.
pub fn verify_cover(instance: &CoverInstance, solution: &CoverSolution) -> bool {
    let grid = &instance.grid;
    let n = grid.steps();
    let mut covered = vec![false; n];
    let mut sum = 0.0;
    for e in &solution.selected {
        let (a, b) = element_span(grid, e);
        for slot in covered.iter_mut().take(b).skip(a) {
            *slot = true;
        }
        sum += e.weight;
    }
    if covered.iter().any(|c| !c) {
        return false;
    }
    let scale = solution.objective.abs().max(sum.abs()).max(1.0);
    (solution.objective - sum).abs() <= 1e-9 * scale
}

/// Render the instance in CPLEX LP text format: one binary variable per
/// element, a minimization objective, and one covering constraint per sample.
pub fn export_ilp(instance: &CoverInstance) -> String {
    let grid = &instance.grid;
    let n = grid.steps();
    let mut spans = Vec::with_capacity(instance.elements.len());
    for e in &instance.elements {
        spans.push(element_span(grid, e));
    }

    let mut out = String::new();
    out.push_str("\\ interval set cover, schema=1\n");
    out.push_str("Minimize\n obj:");
    if instance.elements.is_empty() {
        out.push_str(" 0 x_none");
    } else {
        for (i, e) in instance.elements.iter().enumerate() {
            if i > 0 {
                out.push_str(" +");
            }
            let _ = write!(out, " {} x{}", e.weight, i);
        }
    }
    out.push('\n');
    out.push_str("Subject To\n");
    for k in 0..n {
        let _ = write!(out, " c{k}:");
        let mut first = true;
        for (i, &(a, b)) in spans.iter().enumerate() {
            if a <= k && k < b {
                if !first {
                    out.push_str(" +");
                }
                let _ = write!(out, " x{i}");
                first = false;
            }
        }
        if first {
            // No candidate covers this sample; an explicit impossible
            // constraint keeps the exported file honest.
            out.push_str(" 0 x_infeasible >= 1\n");
            continue;
        }
        out.push_str(" >= 1\n");
    }
    out.push_str("Binary\n");
    if instance.elements.is_empty() {
        out.push_str(" x_none\n");
    }
    for i in 0..instance.elements.len() {
        let _ = write!(out, " x{i}\n");
    }
    out.push_str("End\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::orbital::SatelliteId;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn pair(start: f64, end: f64) -> AccessPair {
        AccessPair {
            src_sat: SatelliteId::new(0, 0),
            dst_sat: SatelliteId::new(0, 1),
            start_s: start,
            end_s: end,
        }
    }

    fn instance(horizon: f64, intervals: &[(f64, f64)]) -> CoverInstance {
        CoverInstance {
            grid: TimeGrid::new(0.0, horizon, 1.0).unwrap(),
            elements: intervals
                .iter()
                .map(|&(a, b)| CoverElement {
                    pair: pair(a, b),
                    weight: 1.0,
                })
                .collect(),
        }
    }

    fn brute_force(instance: &CoverInstance) -> Option<f64> {
        let n = instance.grid.steps();
        let m = instance.elements.len();
        assert!(m <= 20);
        let mut best: Option<f64> = None;
        for mask in 0u32..(1 << m) {
            let mut covered = vec![false; n];
            let mut weight = 0.0;
            for (i, e) in instance.elements.iter().enumerate() {
                if mask & (1 << i) != 0 {
                    weight += e.weight;
                    let (a, b) = element_span(&instance.grid, e);
                    for c in covered.iter_mut().take(b).skip(a) {
                        *c = true;
                    }
                }
            }
            if covered.iter().all(|&c| c) && best.map_or(true, |b| weight < b) {
                best = Some(weight);
            }
        }
        best
    }

    #[test]
    fn single_spanning_element() {
        let inst = instance(120.0, &[(0.0, 120.0)]);
        let sol = solve_exact(&inst).unwrap();
        assert_eq!(sol.selected.len(), 1);
        assert_eq!(sol.objective, 1.0);
        assert!(verify_cover(&inst, &sol));
    }

    #[test]
    fn prefers_one_interval_over_two() {
        let inst = instance(120.0, &[(0.0, 60.0), (50.0, 120.0), (0.0, 120.0)]);
        let sol = solve_exact(&inst).unwrap();
        assert_eq!(sol.objective, 1.0);
        assert_eq!(sol.selected.len(), 1);
        assert_eq!(sol.selected[0].pair.start_s, 0.0);
        assert_eq!(sol.selected[0].pair.end_s, 120.0);
    }

    #[test]
    fn selected_sorted_and_chained() {
        let inst = instance(
            300.0,
            &[(0.0, 100.0), (80.0, 200.0), (190.0, 300.0), (150.0, 260.0)],
        );
        let sol = solve_exact(&inst).unwrap();
        assert_eq!(sol.objective, 3.0);
        let mut prev_start = -1.0;
        let mut prev_end = 0.0;
        for e in &sol.selected {
            assert!(e.pair.start_s > prev_start);
            assert!(e.pair.start_s <= prev_end, "gap in reconstructed chain");
            prev_start = e.pair.start_s;
            prev_end = e.pair.end_s;
        }
        assert!(verify_cover(&inst, &sol));
    }

    #[test]
    fn matches_brute_force_on_random_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for case in 0..40 {
            let horizon = 600.0;
            let m = rng.gen_range(3..=12);
            let mut intervals = Vec::new();
            // One guaranteed backbone so most instances are feasible.
            if case % 3 != 0 {
                let mut t = 0.0;
                while t < horizon {
                    let len = rng.gen_range::<f64, _>(80.0..300.0);
                    intervals.push((t, (t + len).min(horizon)));
                    t += rng.gen_range(40.0..(len.max(41.0)));
                }
            }
            for _ in 0..m {
                let a = rng.gen_range::<f64, _>(0.0..horizon - 1.0).floor();
                let b = (a + rng.gen_range::<f64, _>(1.0..250.0).floor()).min(horizon);
                intervals.push((a, b));
            }
            let inst = instance(horizon, &intervals);
            if inst.elements.len() > 16 {
                continue;
            }
            match (solve_exact(&inst), brute_force(&inst)) {
                (Ok(sol), Some(best)) => {
                    assert_eq!(sol.objective, best, "case {case}");
                    assert!(verify_cover(&inst, &sol));
                }
                (Err(Error::InfeasibleCover { .. }), None) => {}
                (got, want) => panic!("case {case}: solver {got:?} vs brute force {want:?}"),
            }
        }
    }

    #[test]
    fn weighted_instances_match_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        for case in 0..20 {
            let horizon = 200.0;
            let m = rng.gen_range(4..=10);
            let mut elements = Vec::new();
            let mut t = 0.0;
            while t < horizon {
                let len = rng.gen_range::<f64, _>(30.0..120.0).floor();
                elements.push(CoverElement {
                    pair: pair(t, (t + len).min(horizon)),
                    weight: rng.gen_range(0.0..5.0),
                });
                t += rng.gen_range::<f64, _>(10.0..len.max(11.0)).floor();
            }
            for _ in 0..m {
                let a = rng.gen_range::<f64, _>(0.0..horizon - 1.0).floor();
                let b = (a + rng.gen_range::<f64, _>(1.0..90.0).floor()).min(horizon);
                elements.push(CoverElement {
                    pair: pair(a, b),
                    weight: rng.gen_range(0.0..5.0),
                });
            }
            let inst = CoverInstance {
                grid: TimeGrid::new(0.0, horizon, 1.0).unwrap(),
                elements,
            };
            if inst.elements.len() > 16 {
                continue;
            }
            let sol = solve_exact(&inst).unwrap();
            let best = brute_force(&inst).unwrap();
            assert!(
                (sol.objective - best).abs() < 1e-9,
                "case {case}: {} vs {best}",
                sol.objective
            );
            assert!(verify_cover(&inst, &sol));
        }
    }

    #[test]
    fn infeasibility_names_earliest_uncovered_sample() {
        let inst = instance(100.0, &[(0.0, 40.0), (60.0, 100.0)]);
        match solve_exact(&inst) {
            Err(Error::InfeasibleCover { t }) => assert_eq!(t, 40.0),
            other => panic!("expected infeasibility, got {other:?}"),
        }
    }

    #[test]
    fn adding_elements_never_hurts() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..15 {
            let horizon = 300.0;
            let mut intervals = vec![(0.0, 150.0), (140.0, 300.0)];
            let mut inst = instance(horizon, &intervals);
            let mut prev = solve_exact(&inst).unwrap().objective;
            for _ in 0..6 {
                let a = rng.gen_range::<f64, _>(0.0..horizon - 1.0).floor();
                let b = (a + rng.gen_range::<f64, _>(1.0..200.0).floor()).min(horizon);
                intervals.push((a, b));
                inst = instance(horizon, &intervals);
                let now = solve_exact(&inst).unwrap().objective;
                assert!(now <= prev);
                prev = now;
            }
        }
    }

    #[test]
    fn verify_cover_rejects_bad_solutions() {
        let inst = instance(120.0, &[(0.0, 60.0), (50.0, 120.0)]);
        let sol = solve_exact(&inst).unwrap();
        assert!(verify_cover(&inst, &sol));

        let missing_head = CoverSolution {
            selected: vec![inst.elements[1].clone()],
            objective: 1.0,
        };
        assert!(!verify_cover(&inst, &missing_head));

        let bad_objective = CoverSolution {
            objective: sol.objective + 0.5,
            selected: sol.selected.clone(),
        };
        assert!(!verify_cover(&inst, &bad_objective));
    }

    #[test]
    fn removing_all_cover_of_a_sample_is_detected_there() {
        let inst = instance(100.0, &[(0.0, 30.0), (25.0, 70.0), (65.0, 100.0)]);
        assert!(solve_exact(&inst).is_ok());
        // Drop everything covering sample t = 50.
        let filtered: Vec<(f64, f64)> = [(0.0, 30.0), (65.0, 100.0)].into();
        let broken = instance(100.0, &filtered);
        match solve_exact(&broken) {
            Err(Error::InfeasibleCover { t }) => assert_eq!(t, 30.0),
            other => panic!("expected infeasibility, got {other:?}"),
        }
    }

    /// Minimal reader for the exported LP text, used to check that the file
    /// faithfully encodes the instance.
    fn parse_lp(text: &str) -> (Vec<f64>, Vec<Vec<usize>>, usize) {
        let mut weights = Vec::new();
        let mut constraints = Vec::new();
        let mut binaries = 0;
        let mut section = "";
        for line in text.lines() {
            let line = line.trim();
            if line.starts_with('\\') || line.is_empty() {
                continue;
            }
            match line {
                "Minimize" | "Subject To" | "Binary" | "End" => {
                    section = line;
                    continue;
                }
                _ => {}
            }
            match section {
                "Minimize" => {
                    let body = line.strip_prefix("obj:").unwrap();
                    for term in body.split('+') {
                        let mut parts = term.split_whitespace();
                        let w: f64 = parts.next().unwrap().parse().unwrap();
                        let var = parts.next().unwrap();
                        if var != "x_none" {
                            weights.push(w);
                        }
                    }
                }
                "Subject To" => {
                    let body = line.split(':').nth(1).unwrap();
                    let body = body.split(">=").next().unwrap();
                    let vars: Vec<usize> = body
                        .split('+')
                        .filter_map(|v| v.trim().strip_prefix('x').and_then(|s| s.parse().ok()))
                        .collect();
                    constraints.push(vars);
                }
                "Binary" => binaries += 1,
                _ => {}
            }
        }
        (weights, constraints, binaries)
    }

    #[test]
    fn lp_export_counts_and_roundtrip() {
        let inst = instance(10.0, &[(0.0, 10.0)]);
        let text = export_ilp(&inst);
        let (weights, constraints, binaries) = parse_lp(&text);
        assert_eq!(weights.len(), 1);
        assert_eq!(binaries, 1);
        assert_eq!(constraints.len(), 10);
        assert!(constraints.iter().all(|c| c == &vec![0]));
    }

    #[test]
    fn lp_export_empty_horizon_has_no_constraints() {
        // A filtered instance with no remaining samples: model it by an
        // element set over a 1-step grid and no elements, then shrink.
        let inst = CoverInstance {
            grid: TimeGrid::from_steps(0.0, 1.0, 0).unwrap(),
            elements: Vec::new(),
        };
        let text = export_ilp(&inst);
        let (_, constraints, _) = parse_lp(&text);
        assert!(constraints.is_empty());
        assert!(text.contains("Minimize"));
        let sol = solve_exact(&inst).unwrap();
        assert_eq!(sol.objective, 0.0);
    }

    #[test]
    fn lp_export_matches_exact_solver_via_independent_parse() {
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        for case in 0..6 {
            let horizon = 60.0;
            let mut intervals = vec![(0.0, 25.0), (20.0, 45.0), (40.0, 60.0)];
            for _ in 0..rng.gen_range(2..8) {
                let a = rng.gen_range::<f64, _>(0.0..59.0).floor();
                let b = (a + rng.gen_range::<f64, _>(1.0..30.0).floor()).min(horizon);
                intervals.push((a, b));
            }
            let inst = instance(horizon, &intervals);
            let (weights, constraints, binaries) = parse_lp(&export_ilp(&inst));
            assert_eq!(weights.len(), inst.elements.len());
            assert_eq!(binaries, inst.elements.len());
            assert_eq!(constraints.len(), inst.grid.steps());

            // Brute-force the parsed model and compare objectives.
            let m = weights.len();
            let mut best = f64::INFINITY;
            for mask in 0u32..(1 << m) {
                if constraints
                    .iter()
                    .all(|c| c.iter().any(|&i| mask & (1 << i) != 0))
                {
                    let w: f64 = (0..m).filter(|i| mask & (1 << i) != 0).map(|i| weights[i]).sum();
                    best = best.min(w);
                }
            }
            let sol = solve_exact(&inst).unwrap();
            assert_eq!(sol.objective, best, "case {case}");
        }
    }
}
