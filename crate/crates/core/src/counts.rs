//! Exact path counting between levels, the thinness search and the counting
//! telescope.

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::diagram::{BratteliDiagram, Subdiagram};
use crate::error::{Error, Result};

/// `|E(v,w)|` and `|F(v,w)|` for `v ∈ V_from`, `w ∈ V_to`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathCountTable {
    pub from: usize,
    pub to: usize,
    pub e: Vec<Vec<BigUint>>,
    pub f: Vec<Vec<BigUint>>,
}

impl PathCountTable {
    /// Sum of all `|E(v,w)|`; from level 0 this is the number of paths.
    pub fn total_e(&self) -> BigUint {
        self.e.iter().flatten().sum()
    }

    pub fn total_f(&self) -> BigUint {
        self.f.iter().flatten().sum()
    }

    /// Matrix product `self · other` (requires `self.to == other.from`).
    pub fn compose(&self, other: &PathCountTable) -> PathCountTable {
        assert_eq!(self.to, other.from, "tables must be adjacent");
        PathCountTable { from: self.from, to: other.to, e: mat_mul(&self.e, &other.e), f: mat_mul(&self.f, &other.f) }
    }
}

fn mat_mul(a: &[Vec<BigUint>], b: &[Vec<BigUint>]) -> Vec<Vec<BigUint>> {
    let cols = b.first().map_or(0, |r| r.len());
    a.iter()
        .map(|row| {
            (0..cols)
                .map(|j| row.iter().zip(b).filter(|(x, _)| !x.is_zero()).map(|(x, brow)| x * &brow[j]).sum())
                .collect()
        })
        .collect()
}

fn identity(size: usize) -> Vec<Vec<BigUint>> {
    (0..size).map(|i| (0..size).map(|j| if i == j { BigUint::one() } else { BigUint::zero() }).collect()).collect()
}

/// One-level incidence matrices `(E_n, F_n)`.
fn incidence(diagram: &BratteliDiagram, sub: &Subdiagram, n: usize) -> (Vec<Vec<BigUint>>, Vec<Vec<BigUint>>) {
    let rows = diagram.vertices(n - 1).len();
    let cols = diagram.vertices(n).len();
    let mut e = vec![vec![BigUint::zero(); cols]; rows];
    let mut f = vec![vec![BigUint::zero(); cols]; rows];
    for (k, edge) in diagram.edges(n).iter().enumerate() {
        e[edge.source][edge.range] += 1u32;
        if sub.in_f(n, k) {
            f[edge.source][edge.range] += 1u32;
        }
    }
    (e, f)
}

pub fn path_counts(diagram: &BratteliDiagram, sub: &Subdiagram, from: usize, to: usize) -> Result<PathCountTable> {
    if from > to || to > diagram.depth() {
        return Err(Error::LevelOutOfRange(format!("path counts {from}..{to} on depth {}", diagram.depth())));
    }
    let size = diagram.vertices(from).len();
    let mut table = PathCountTable { from, to: from, e: identity(size), f: identity(size) };
    for n in from + 1..=to {
        let (e, f) = incidence(diagram, sub, n);
        table = table.compose(&PathCountTable { from: n - 1, to: n, e, f });
    }
    Ok(table)
}

/// Strictly increasing level sequence starting at 0.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TelescopePlan(Vec<usize>);

impl TelescopePlan {
    pub fn new(levels: Vec<usize>) -> Result<Self> {
        if levels.first() != Some(&0) {
            return Err(Error::Input("telescope plan must start at 0".into()));
        }
        if levels.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Input(format!("telescope plan {levels:?} is not strictly increasing")));
        }
        Ok(TelescopePlan(levels))
    }

    pub fn identity(depth: usize) -> Self {
        TelescopePlan((0..=depth).collect())
    }

    pub fn levels(&self) -> &[usize] {
        &self.0
    }

    /// Number of levels of the telescoped diagram.
    pub fn depth(&self) -> usize {
        self.0.len() - 1
    }

    /// Deepest source level used by the plan.
    pub fn last(&self) -> usize {
        *self.0.last().expect("plans are non-empty")
    }

    /// The plan of "telescope by `self`, then by `next`" as one plan.
    pub fn then(&self, next: &TelescopePlan) -> Result<TelescopePlan> {
        let levels = next
            .0
            .iter()
            .map(|&k| self.0.get(k).copied().ok_or_else(|| Error::LevelOutOfRange(format!("plan level {k}"))))
            .collect::<Result<Vec<_>>>()?;
        TelescopePlan::new(levels)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimplicityCheck {
    pub simple: bool,
    /// `(n, m)`: every vertex of `V_n` reaches every vertex of `V_m`.
    pub witnesses: Vec<(usize, usize)>,
    /// Levels below the checked bound with no witness.
    pub missing: Vec<usize>,
}

/// Simplicity within the horizon: every level `n ≤ horizon / 2` needs a
/// later level `m ≤ horizon` with `|E(v,w)| > 0` for all `v ∈ V_n`, `w ∈ V_m`.
pub fn is_simple_at_horizon(diagram: &BratteliDiagram, horizon: usize) -> SimplicityCheck {
    let horizon = horizon.min(diagram.depth());
    let full = Subdiagram::full(diagram);
    let mut witnesses = Vec::new();
    let mut missing = Vec::new();
    for n in 0..=horizon / 2 {
        let mut table = path_counts(diagram, &full, n, n).expect("level in range");
        let mut found = None;
        for m in n + 1..=horizon {
            let (e, f) = incidence(diagram, &full, m);
            table = table.compose(&PathCountTable { from: m - 1, to: m, e, f });
            if table.e.iter().flatten().all(|c| !c.is_zero()) {
                found = Some(m);
                break;
            }
        }
        match found {
            Some(m) => witnesses.push((n, m)),
            None => missing.push(n),
        }
    }
    SimplicityCheck { simple: missing.is_empty() && horizon > 0, witnesses, missing }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ThinnessSearch {
    Found(usize),
    /// No level satisfied the bound; `best_ratio` is the smallest worst-case
    /// `|F(v,w)| / |E(v,w)|` seen.
    Exhausted { best_ratio: Option<BigRational> },
}

impl ThinnessSearch {
    pub fn level(&self) -> Option<usize> {
        match self {
            ThinnessSearch::Found(m) => Some(*m),
            ThinnessSearch::Exhausted { .. } => None,
        }
    }
}

/// Smallest `m ∈ (start, N]` with `c·|F(v,w)| ≤ |E(v,w)|` for all listed
/// sources `v` and all `w ∈ W_m`.
pub fn thinness_telescope_search(
    diagram: &BratteliDiagram,
    sub: &Subdiagram,
    factor: &BigUint,
    start: usize,
    sources: &[usize],
) -> Result<ThinnessSearch> {
    if start >= diagram.depth() {
        return Err(Error::LevelOutOfRange(format!("search start {start} at depth {}", diagram.depth())));
    }
    let mut table = path_counts(diagram, sub, start, start)?;
    let mut best: Option<BigRational> = None;
    for m in start + 1..=diagram.depth() {
        let (e, f) = incidence(diagram, sub, m);
        table = table.compose(&PathCountTable { from: m - 1, to: m, e, f });
        let mut ok = true;
        let mut worst: Option<BigRational> = None;
        for &v in sources {
            for w in sub.w_level(m) {
                let (ce, cf) = (&table.e[v][w], &table.f[v][w]);
                if factor * cf > *ce {
                    ok = false;
                }
                if !ce.is_zero() {
                    let r = BigRational::new(cf.clone().into(), ce.clone().into());
                    if worst.as_ref().is_none_or(|x| r > *x) {
                        worst = Some(r);
                    }
                }
            }
        }
        if ok {
            return Ok(ThinnessSearch::Found(m));
        }
        if let Some(w) = worst {
            if best.as_ref().is_none_or(|b| w < *b) {
                best = Some(w);
            }
        }
    }
    Ok(ThinnessSearch::Exhausted { best_ratio: best })
}

/// `L_n = max_{v ∈ W_n} |F(v0, v)|`.
pub fn max_f_count(diagram: &BratteliDiagram, sub: &Subdiagram, n: usize) -> Result<BigUint> {
    let table = path_counts(diagram, sub, 0, n)?;
    Ok(sub.w_level(n).map(|v| table.f[0][v].clone()).max().unwrap_or_default())
}

/// Check `|F(v0,w)| ≤ Σ_{v ∈ V_from} |E(v,w) \ F(v,w)|` for all `w ∈ W_to`;
/// returns the first violating `w`.
pub fn counting_inequality_witness(
    diagram: &BratteliDiagram,
    sub: &Subdiagram,
    from: usize,
    to: usize,
) -> Result<Option<usize>> {
    let base = path_counts(diagram, sub, 0, to)?;
    let step = path_counts(diagram, sub, from, to)?;
    for w in sub.w_level(to) {
        let rhs: BigUint = (0..diagram.vertices(from).len()).map(|v| &step.e[v][w] - &step.f[v][w]).sum();
        if base.f[0][w] > rhs {
            return Ok(Some(w));
        }
    }
    Ok(None)
}

/// Levels `0 = n(0) < n(1) < …` after which the counting inequality holds at
/// every telescoped level.
///
/// `n(1)` comes from the factor-2 search from `v0`, each later `n(k)` from the
/// factor `L_{n(k-1)} + 1` search from `W_{n(k-1)}`. When the search stops
/// short of the horizon, the horizon itself is appended (or substituted for
/// the last level) if the inequality still holds there.
pub fn counting_telescope(diagram: &BratteliDiagram, sub: &Subdiagram) -> Result<TelescopePlan> {
    let depth = diagram.depth();
    if depth == 0 {
        return Err(Error::exhausted("counting_telescope", "diagram has no levels"));
    }
    let mut plan = vec![0usize];
    match thinness_telescope_search(diagram, sub, &BigUint::from(2u32), 0, &[0])? {
        ThinnessSearch::Found(m) => plan.push(m),
        ThinnessSearch::Exhausted { best_ratio } => {
            return Err(Error::exhausted(
                "counting_telescope",
                format!("no level with 2|F(v0,w)| <= |E(v0,w)|; best ratio {}", fmt_ratio(&best_ratio)),
            ))
        }
    }
    loop {
        let prev = *plan.last().unwrap();
        if prev == depth {
            break;
        }
        let factor = max_f_count(diagram, sub, prev)? + 1u32;
        let sources: Vec<usize> = sub.w_level(prev).collect();
        match thinness_telescope_search(diagram, sub, &factor, prev, &sources)? {
            ThinnessSearch::Found(m) => plan.push(m),
            ThinnessSearch::Exhausted { .. } => break,
        }
    }
    let last = *plan.last().unwrap();
    if last < depth {
        if counting_inequality_witness(diagram, sub, last, depth)?.is_none() {
            plan.push(depth);
        } else if plan.len() >= 2 {
            let before = plan[plan.len() - 2];
            if counting_inequality_witness(diagram, sub, before, depth)?.is_none() {
                *plan.last_mut().unwrap() = depth;
            }
        }
    }
    for w in plan.windows(2) {
        if let Some(v) = counting_inequality_witness(diagram, sub, w[0], w[1])? {
            return Err(Error::construction(
                "counting_telescope",
                format!("inequality fails at level {} vertex {:?}", w[1], diagram.vertices(w[1])[v]),
            ));
        }
    }
    TelescopePlan::new(plan)
}

fn fmt_ratio(r: &Option<BigRational>) -> String {
    r.as_ref().map_or("n/a".to_string(), |r| r.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn big(n: u64) -> BigUint {
        BigUint::from(n)
    }

    #[test]
    fn odometer_counts() {
        let (d, s) = fixtures::odometer(3);
        let t = path_counts(&d, &s, 0, 3).unwrap();
        assert_eq!(t.e[0][0], big(8));
        assert_eq!(t.f[0][0], big(1));
    }

    #[test]
    fn two_vertex_paths_from_source() {
        let (d, s) = fixtures::two_vertex(3);
        // level 1: (1,1); each later level doubles the total
        assert_eq!(path_counts(&d, &s, 0, 3).unwrap().total_e(), big(8));
    }

    #[test]
    fn counts_are_multiplicative() {
        let (d, s) = fixtures::stationary(6);
        let whole = path_counts(&d, &s, 1, 6).unwrap();
        let split = path_counts(&d, &s, 1, 3).unwrap().compose(&path_counts(&d, &s, 3, 6).unwrap());
        assert_eq!(whole, split);
        for (er, fr) in whole.e.iter().zip(&whole.f) {
            assert!(er.iter().zip(fr).all(|(e, f)| f <= e));
        }
    }

    #[test]
    fn simplicity() {
        assert!(is_simple_at_horizon(&fixtures::odometer(4).0, 4).simple);
        assert!(!is_simple_at_horizon(&fixtures::disconnected(6).0, 6).simple);
        // [[1,1],[1,0]] needs two steps
        let mut b = fixtures::Builder::new();
        b.level(&["a", "b"]).edge("a1", "v0", "a", true).edge("b1", "v0", "b", false);
        for n in 2..=6 {
            b.level(&["a", "b"])
                .edge(format!("aa{n}"), "a", "a", true)
                .edge(format!("ab{n}"), "a", "b", false)
                .edge(format!("ba{n}"), "b", "a", false);
        }
        let (d, _) = b.build();
        let check = is_simple_at_horizon(&d, 6);
        assert!(check.simple);
        assert!(check.witnesses.iter().filter(|(n, _)| *n >= 1).all(|(n, m)| m - n == 2));
    }

    #[test]
    fn thinness_search_on_odometer() {
        let (d, s) = fixtures::odometer(5);
        assert_eq!(thinness_telescope_search(&d, &s, &big(2), 0, &[0]).unwrap(), ThinnessSearch::Found(1));
        assert_eq!(thinness_telescope_search(&d, &s, &big(3), 0, &[0]).unwrap(), ThinnessSearch::Found(2));
        let full = Subdiagram::full(&d);
        match thinness_telescope_search(&d, &full, &big(2), 0, &[0]).unwrap() {
            ThinnessSearch::Exhausted { best_ratio } => assert_eq!(best_ratio, Some(BigRational::one())),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn counting_telescope_on_odometer_is_identity() {
        let (d, s) = fixtures::odometer(6);
        assert_eq!(counting_telescope(&d, &s).unwrap(), TelescopePlan::identity(6));
    }

    #[test]
    fn counting_telescope_rejects_full_subdiagram() {
        let (d, _) = fixtures::odometer(6);
        let err = counting_telescope(&d, &Subdiagram::full(&d)).unwrap_err();
        assert!(matches!(err, Error::Exhausted { ref stage, .. } if stage == "counting_telescope"));
    }

    #[test]
    fn counting_telescope_on_stationary_fixture() {
        let (d, s) = fixtures::stationary(8);
        let plan = counting_telescope(&d, &s).unwrap();
        for w in plan.levels().windows(2) {
            assert_eq!(counting_inequality_witness(&d, &s, w[0], w[1]).unwrap(), None);
        }
    }

    #[test]
    fn plan_composition() {
        let a = TelescopePlan::new(vec![0, 2, 3, 5, 6]).unwrap();
        let b = TelescopePlan::new(vec![0, 2, 4]).unwrap();
        assert_eq!(a.then(&b).unwrap().levels(), &[0, 3, 6]);
        assert!(TelescopePlan::new(vec![0, 2, 2]).is_err());
        assert!(TelescopePlan::new(vec![1, 2]).is_err());
    }
}
