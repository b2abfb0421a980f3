//! Brute-force checkers. They read only a serialized certificate and the raw
//! diagram, rebuild every partition from scratch, and report findings rather
//! than raising errors.

mod absorb;
mod clauses;
mod main1;
mod measure;

pub use absorb::check_absorption;
pub use clauses::check_lemma_clauses;
pub use main1::{check_main1, check_minimality_approx, covering_index};
pub use measure::{check_measure, invariant_weightings, Weighting, WeightingSummary};

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::counts::TelescopePlan;
use crate::diagram::{BratteliDiagram, Subdiagram};
use crate::error::{Error, Result};
use crate::partition::Partition;
use crate::paths::PathSpace;
use crate::splitting::SplitCertificate;
use crate::telescope::{telescope, Recoding};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail { witness: String },
    Skipped { reason: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub level: Option<usize>,
    #[serde(flatten)]
    pub status: Status,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Report {
    pub parameters: BTreeMap<String, String>,
    pub checks: Vec<Check>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl Report {
    pub fn param(&mut self, key: &str, value: impl ToString) {
        self.parameters.insert(key.to_string(), value.to_string());
    }

    pub fn push(&mut self, name: &str, level: Option<usize>, status: Status) {
        self.checks.push(Check { name: name.to_string(), level, status });
    }

    pub fn outcome(&mut self, name: &str, level: Option<usize>, failure: Option<String>) {
        let status = match failure {
            None => Status::Pass,
            Some(witness) => Status::Fail { witness },
        };
        self.push(name, level, status);
    }

    pub fn skip(&mut self, name: &str, level: Option<usize>, reason: impl Into<String>) {
        self.push(name, level, Status::Skipped { reason: reason.into() });
    }

    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| !matches!(c.status, Status::Fail { .. }))
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| matches!(c.status, Status::Fail { .. }))
    }

    /// True when some check was skipped because the horizon is too shallow.
    pub fn exhausted(&self) -> bool {
        self.checks.iter().any(|c| matches!(&c.status, Status::Skipped { reason } if reason.starts_with("exhausted")))
    }

    pub fn find(&self, name: &str, level: Option<usize>) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name && c.level == level)
    }

    pub fn merge(&mut self, other: Report) {
        self.parameters.extend(other.parameters);
        self.checks.extend(other.checks);
        self.notes.extend(other.notes);
    }
}

/// All depth-`depth` paths, optionally restricted to `F`, by plain recursion.
pub(crate) fn all_paths(diagram: &BratteliDiagram, depth: usize, only_f: Option<&Subdiagram>) -> Vec<Vec<usize>> {
    fn go(d: &BratteliDiagram, f: Option<&Subdiagram>, depth: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == depth {
            out.push(cur.clone());
            return;
        }
        let n = cur.len();
        for &k in d.outgoing(n, d.end_vertex(cur)) {
            if f.is_none_or(|s| s.in_f(n + 1, k)) {
                cur.push(k);
                go(d, f, depth, cur, out);
                cur.pop();
            }
        }
    }
    let mut out = Vec::new();
    go(diagram, only_f, depth, &mut Vec::new(), &mut out);
    out
}

/// `x ~ x'` iff they agree after level `n` and meet at the same level-`n` vertex.
pub(crate) fn tail_partition(diagram: &BratteliDiagram, paths: &[Vec<usize>], n: usize) -> Partition {
    let mut keys: HashMap<(usize, &[usize]), usize> = HashMap::new();
    Partition::from_keys(paths.iter().map(|p| {
        let next = keys.len();
        *keys.entry((diagram.end_vertex(&p[..n]), &p[n..])).or_insert(next)
    }))
}

/// `|E(v0,v)|` for every level up to `depth`.
pub(crate) fn vertex_path_counts(diagram: &BratteliDiagram, depth: usize) -> Vec<Vec<u64>> {
    let mut counts = vec![vec![1u64]];
    for n in 1..=depth {
        let mut level = vec![0u64; diagram.vertices(n).len()];
        for e in diagram.edges(n) {
            level[e.range] += counts[n - 1][e.source];
        }
        counts.push(level);
    }
    counts
}

/// A surjection as domain edges, codomain paths and the image position of each domain edge.
pub type RhoTable = (Vec<usize>, Vec<Vec<usize>>, Vec<usize>);

/// A splitting certificate rebuilt into plain data.
#[derive(Debug, Clone)]
pub struct SplitView {
    pub horizon: usize,
    pub original: BratteliDiagram,
    pub original_sub: Subdiagram,
    pub original_s: Vec<Partition>,
    pub original_y: Vec<Vec<usize>>,
    pub composed_plan: Vec<usize>,
    pub recoding: Recoding,
    pub diagram: BratteliDiagram,
    pub sub: Subdiagram,
    pub universe: PathSpace,
    pub y: Vec<Vec<usize>>,
    /// Universe index of each `Y`-path.
    pub y_idx: Vec<usize>,
    /// `tails[n] = R_n`, `0 ≤ n ≤ K`.
    pub tails: Vec<Partition>,
    /// `s[n]` on `y`, `0 ≤ n ≤ K`.
    pub s: Vec<Partition>,
    /// `lambda[n]` per universe element; `lambda[0]` is constant.
    pub lambda: Vec<Vec<u32>>,
    pub u_depth: Vec<usize>,
    /// `u[n][i]`: universe element `i` lies in `U_n`.
    pub u: Vec<Vec<bool>>,
    /// `(level, vertex) → (domain edges, codomain paths, image positions)`.
    pub rho: HashMap<(usize, usize), RhoTable>,
    pub counts: Vec<Vec<u64>>,
}

impl SplitView {
    pub fn depth(&self) -> usize {
        self.diagram.depth()
    }

    pub fn load(cert: &SplitCertificate, cap: usize) -> Result<Self> {
        let (original, original_sub) = cert.original.into_diagram()?;
        let original_sub = original_sub.ok_or_else(|| Error::Input("certificate lacks the subdiagram".into()))?;
        let (diagram, sub) = cert.working.into_diagram()?;
        let sub = sub.ok_or_else(|| Error::Input("certificate lacks the working subdiagram".into()))?;
        let k = diagram.depth();
        let paths = all_paths(&diagram, k, None);
        if paths.len() > cap {
            return Err(Error::CapExceeded { depth: k, count: paths.len(), cap });
        }
        let universe = PathSpace::from_paths(k, paths);
        let y = all_paths(&diagram, k, Some(&sub));
        let y_idx: Vec<usize> = y.iter().map(|p| universe.index_of(p).expect("Y-paths are paths")).collect();
        let tails: Vec<Partition> = (0..=k).map(|n| tail_partition(&diagram, universe.paths(), n)).collect();

        let y_space = PathSpace::from_paths(k, y.clone());
        if cert.s_sequence.len() != k + 1 {
            return Err(Error::Input(format!("certificate lists {} S-levels for depth {k}", cert.s_sequence.len())));
        }
        let s = cert.s_sequence.iter().map(|p| p.to_partition(&diagram, &y_space)).collect::<Result<Vec<_>>>()?;
        let original_y = all_paths(&original, original.depth(), Some(&original_sub));
        let oy_space = PathSpace::from_paths(original.depth(), original_y.clone());
        let original_s =
            cert.original_s.iter().map(|p| p.to_partition(&original, &oy_space)).collect::<Result<Vec<_>>>()?;

        if cert.levels.len() != k {
            return Err(Error::Input(format!("certificate lists {} label levels for depth {k}", cert.levels.len())));
        }
        let mut lambda = vec![vec![0u32; universe.len()]];
        let mut u_depth = vec![0usize];
        let mut u = vec![vec![true; universe.len()]];
        for (i, level) in cert.levels.iter().enumerate() {
            if level.n != i + 1 || level.u_depth > k {
                return Err(Error::Input(format!("malformed label level {}", level.n)));
            }
            let table = level.lambda.to_function(&diagram)?;
            let values = universe
                .paths()
                .iter()
                .map(|p| {
                    table.get(p).ok_or_else(|| {
                        Error::Input(format!("label table {} misses {:?}", level.n, diagram.path_ids(&p[..table.depth])))
                    })
                })
                .collect::<Result<Vec<u32>>>()?;
            lambda.push(values);
            u_depth.push(level.u_depth);
            u.push(
                universe
                    .paths()
                    .iter()
                    .map(|p| p[..level.u_depth].iter().enumerate().all(|(j, &e)| sub.in_f(j + 1, e)))
                    .collect(),
            );
        }
        let mut rho = HashMap::new();
        for r in &cert.rho {
            let w = diagram
                .vertex_index(r.level, &r.vertex)
                .ok_or_else(|| Error::Input(format!("unknown vertex {:?} in a surjection", r.vertex)))?;
            let domain = r
                .domain
                .iter()
                .map(|id| diagram.edge_index(r.level, id).ok_or_else(|| Error::Input(format!("unknown edge {id:?}"))))
                .collect::<Result<Vec<_>>>()?;
            let codomain = r.codomain.iter().map(|ids| diagram.path_from_ids(ids)).collect::<Result<Vec<_>>>()?;
            if r.image.len() != domain.len() || r.image.iter().any(|&i| i >= codomain.len()) {
                return Err(Error::Input(format!("malformed surjection at {:?}", r.vertex)));
            }
            rho.insert((r.level, w), (domain, codomain, r.image.clone()));
        }
        let plan = TelescopePlan::new(cert.composed_plan.clone())?;
        let (_, _, recoding) = telescope(&original, &plan, Some(&original_sub))?;
        let counts = vertex_path_counts(&diagram, k);
        Ok(SplitView {
            horizon: cert.horizon,
            original,
            original_sub,
            original_s,
            original_y,
            composed_plan: cert.composed_plan.clone(),
            recoding,
            diagram,
            sub,
            universe,
            y,
            y_idx,
            tails,
            s,
            lambda,
            u_depth,
            u,
            rho,
            counts,
        })
    }

    /// `R_n` restricted to `Y`.
    pub fn tail_on_y(&self, n: usize) -> Partition {
        self.tails[n].restrict(&self.y_idx)
    }

    pub fn in_y(&self) -> Vec<bool> {
        let mut v = vec![false; self.universe.len()];
        for &i in &self.y_idx {
            v[i] = true;
        }
        v
    }

    /// `R'_n` rebuilt from the label table.
    pub fn rprime(&self, n: usize) -> Partition {
        Partition::from_keys(self.tails[n].labels().iter().zip(&self.lambda[n]))
    }

    pub fn ids(&self, i: usize) -> String {
        self.diagram.path_ids(self.universe.path(i)).join(" ")
    }
}
