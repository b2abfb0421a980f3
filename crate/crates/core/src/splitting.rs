//! The splitting construction: surjections `ρ_w`, clopen sets `U_n`, label
//! maps `λ_n` and the open subrelations `R'_n ⊆ R_n`.
//!
//! Everything runs on the depth-`K` path universe of the working diagram,
//! obtained from the input by an alignment telescoping (so that `S_n ⊆ R_n|Y`)
//! followed by the counting telescoping.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::counts::{counting_telescope, TelescopePlan};
use crate::diagram::{BratteliDiagram, DiagramJson, Subdiagram};
use crate::error::{Error, Result};
use crate::partition::{check_nested, realize_label_map, tail_relation, Partition, PartitionJson, UnionFind};
use crate::paths::{enumerate_paths, y_paths, CylinderFunction, PathSpace, DEFAULT_PATH_CAP};
use crate::telescope::{telescope, Recoding, RecodingChain};

/// `ρ_w`: the `i`-th non-`F` edge into `w` goes to the `(i mod |F(v0,w)|)`-th
/// `F`-path from `v0` to `w`, both in lexicographic order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RhoMap {
    pub level: usize,
    pub vertex: usize,
    pub domain: Vec<usize>,
    pub codomain: Vec<Vec<usize>>,
}

impl RhoMap {
    pub fn image_index(&self, pos: usize) -> usize {
        pos % self.codomain.len()
    }

    pub fn apply(&self, edge: usize) -> Option<&[usize]> {
        let pos = self.domain.iter().position(|&e| e == edge)?;
        Some(&self.codomain[self.image_index(pos)])
    }

    /// First domain edge sent to `target`.
    pub fn preimage(&self, target: &[usize]) -> Option<usize> {
        let c = self.codomain.iter().position(|p| p == target)?;
        self.domain.get(c).copied()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SurjectionFamily {
    maps: Vec<Vec<Option<RhoMap>>>,
}

impl SurjectionFamily {
    pub fn get(&self, n: usize, w: usize) -> Option<&RhoMap> {
        self.maps.get(n.checked_sub(1)?)?.get(w)?.as_ref()
    }

    pub fn iter(&self) -> impl Iterator<Item = &RhoMap> {
        self.maps.iter().flatten().flatten()
    }
}

pub fn build_rho(diagram: &BratteliDiagram, sub: &Subdiagram) -> Result<SurjectionFamily> {
    let mut maps = Vec::with_capacity(diagram.depth());
    for n in 1..=diagram.depth() {
        let ys = y_paths(diagram, sub, n)?;
        let mut level = vec![None; diagram.vertices(n).len()];
        for w in sub.w_level(n) {
            let domain: Vec<usize> = diagram.incoming(n, w).iter().copied().filter(|&k| !sub.in_f(n, k)).collect();
            let codomain: Vec<Vec<usize>> =
                ys.paths().iter().filter(|p| diagram.end_vertex(p) == w).cloned().collect();
            if codomain.is_empty() {
                continue;
            }
            if domain.len() < codomain.len() {
                return Err(Error::Input(format!(
                    "counting inequality fails at level {n}, vertex {:?}: {} non-F edges for {} F-paths",
                    diagram.vertices(n)[w],
                    domain.len(),
                    codomain.len()
                )));
            }
            level[w] = Some(RhoMap { level: n, vertex: w, domain, codomain });
        }
        maps.push(level);
    }
    Ok(SurjectionFamily { maps })
}

/// Keep the maximal `F`-prefix of `path` and continue with least `F`-edges.
pub fn retract(diagram: &BratteliDiagram, sub: &Subdiagram, path: &[usize]) -> Result<Vec<usize>> {
    let keep = path.iter().enumerate().take_while(|&(i, &k)| sub.in_f(i + 1, k)).count();
    let mut out = path[..keep].to_vec();
    while out.len() < path.len() {
        let n = out.len();
        let v = diagram.end_vertex(&out);
        let k = sub
            .least_f_out(diagram, n, v)
            .ok_or_else(|| Error::Input(format!("no F-edge leaves {:?} at level {n}", diagram.vertices(n)[v])))?;
        out.push(k);
    }
    Ok(out)
}

/// `U = Y_k` membership: the first `k` edges lie in `F`.
pub fn in_y_k(sub: &Subdiagram, path: &[usize], k: usize) -> bool {
    path[..k].iter().enumerate().all(|(i, &e)| sub.in_f(i + 1, e))
}

/// `μ̃_n(x) = μ_n(retract(x))` on `target`, undefined elsewhere.
pub fn extend_mu(
    diagram: &BratteliDiagram,
    sub: &Subdiagram,
    y_space: &PathSpace,
    mu: &[u32],
    universe: &PathSpace,
    target: &[bool],
) -> Result<Vec<Option<u32>>> {
    universe
        .paths()
        .iter()
        .zip(target)
        .map(|(p, &t)| {
            if !t {
                return Ok(None);
            }
            let r = retract(diagram, sub, p)?;
            let j = y_space.index_of(&r).ok_or_else(|| Error::construction("extend_mu", "retraction left Y"))?;
            Ok(Some(mu[j]))
        })
        .collect()
}

/// Least `k` in `[min(n+1, K), K]` such that `μ̃_n` is constant on every
/// `(R_{n-1}, λ_{n-1})`-class of `Y_k`.
pub fn find_un(
    sub: &Subdiagram,
    universe: &PathSpace,
    r_prev: &Partition,
    lambda_prev: &[u32],
    mu_tilde: &[Option<u32>],
    n: usize,
) -> Result<usize> {
    let depth = universe.depth();
    'k: for k in (n + 1).min(depth)..=depth {
        let mut seen: HashMap<(usize, u32), Option<u32>> = HashMap::new();
        for (i, p) in universe.paths().iter().enumerate() {
            if !in_y_k(sub, p, k) {
                continue;
            }
            let v = *seen.entry((r_prev.class_of(i), lambda_prev[i])).or_insert(mu_tilde[i]);
            if v != mu_tilde[i] {
                continue 'k;
            }
        }
        return Ok(k);
    }
    Err(Error::exhausted("find_Un", format!("no k <= {depth} separates the labels at level {n}")))
}

/// Everything `build_lambda` reads at level `n`.
pub struct LambdaInput<'a> {
    pub diagram: &'a BratteliDiagram,
    pub sub: &'a Subdiagram,
    pub universe: &'a PathSpace,
    pub rho: &'a SurjectionFamily,
    pub r_prev: &'a Partition,
    pub r_n: &'a Partition,
    pub lambda_prev: &'a [u32],
    pub mu_tilde: &'a [Option<u32>],
    pub n: usize,
    pub u_depth: usize,
}

pub fn build_lambda(input: &LambdaInput<'_>) -> Result<Vec<u32>> {
    let LambdaInput { diagram, sub, universe, rho, r_prev, r_n, lambda_prev, mu_tilde, n, u_depth } = *input;
    let in_u: Vec<bool> = universe.paths().iter().map(|p| in_y_k(sub, p, u_depth)).collect();
    let sat_prev = r_prev.saturate(&in_u);
    let sat = r_n.saturate(&in_u);
    let mut witness: HashMap<(usize, u32), u32> = HashMap::new();
    for i in (0..universe.len()).filter(|&i| in_u[i]) {
        let value = mu_tilde[i].ok_or_else(|| Error::construction("build_lambda", "extension undefined on U_n"))?;
        let w = *witness.entry((r_prev.class_of(i), lambda_prev[i])).or_insert(value);
        if w != value {
            return Err(Error::construction(
                "build_lambda",
                format!("two witnesses with different labels at level {n}"),
            ));
        }
    }
    let mut lambda = vec![0u32; universe.len()];
    let mut rewrite = Vec::new();
    for i in 0..universe.len() {
        if sat_prev[i] {
            lambda[i] = witness.get(&(r_prev.class_of(i), lambda_prev[i])).copied().unwrap_or(0);
        } else if sat[i] {
            rewrite.push(i);
        }
    }
    for i in rewrite {
        let x = universe.path(i);
        let e = x[n - 1];
        let w = diagram.edge(n, e).range;
        let rewritten = match rho.get(n, w).and_then(|m| m.apply(e)) {
            Some(prefix) if !sub.in_f(n, e) => {
                let mut t = prefix.to_vec();
                t.extend_from_slice(&x[n..]);
                t
            }
            _ => {
                return Err(Error::construction(
                    "build_lambda",
                    format!("path {:?} in R_n[U_n] \\ R_(n-1)[U_n] has no rewrite", diagram.path_ids(x)),
                ))
            }
        };
        let j = universe.index_of(&rewritten).filter(|&j| in_u[j]).ok_or_else(|| {
            Error::construction("build_lambda", format!("rewrite of {:?} is not in U_n", diagram.path_ids(x)))
        })?;
        lambda[i] = lambda[j];
    }
    Ok(lambda)
}

/// `R'_n = {(x,x') ∈ R_n : λ_n(x) = λ_n(x')}`, checked against `R'_{n-1}`.
pub fn build_rprime(r_n: &Partition, lambda: &[u32], prev: Option<&Partition>) -> Result<Partition> {
    let rp = Partition::from_keys(r_n.labels().iter().zip(lambda));
    if let Some(prev) = prev {
        if let Some((i, j)) = prev.first_refinement_failure(&rp) {
            return Err(Error::construction("build_Rprime", format!("nesting fails for elements {i}, {j}")));
        }
    }
    Ok(rp)
}

/// The prescribed subrelations of `R|Y`, one per level.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SSequence {
    /// `S_n` is the diagonal of `Y` for every `n`.
    Diagonal,
    /// `S_n = R_n|Y`.
    Tail,
    /// Explicit partitions of the depth-`N` `Y`-paths, nested.
    Explicit(Vec<Partition>),
}

#[derive(Debug, Clone)]
pub struct SplitLevel {
    pub n: usize,
    pub labels: usize,
    pub mu: CylinderFunction,
    pub mu_tilde_depth: usize,
    pub u_depth: usize,
    pub lambda: CylinderFunction,
    pub lambda_values: Vec<u32>,
    pub rprime: Partition,
}

#[derive(Debug, Clone)]
pub struct SplitContext {
    pub original: BratteliDiagram,
    pub original_sub: Subdiagram,
    pub original_s: Vec<Partition>,
    pub alignment_indices: Vec<usize>,
    pub alignment_plan: TelescopePlan,
    pub counting_plan: TelescopePlan,
    pub composed_plan: TelescopePlan,
    pub recodings: RecodingChain,
    pub diagram: BratteliDiagram,
    pub sub: Subdiagram,
    pub universe: PathSpace,
    pub y_space: PathSpace,
    /// `s[n]` for `0 ≤ n ≤ K`, on `y_space`.
    pub s: Vec<Partition>,
    pub rho: SurjectionFamily,
    /// `tails[n] = R_n` on the universe.
    pub tails: Vec<Partition>,
    /// Levels `1..=K`.
    pub levels: Vec<SplitLevel>,
}

impl SplitContext {
    pub fn depth(&self) -> usize {
        self.diagram.depth()
    }

    pub fn level(&self, n: usize) -> &SplitLevel {
        &self.levels[n - 1]
    }

    pub fn certificate(&self) -> SplitCertificate {
        SplitCertificate::from_context(self)
    }
}

fn transport(old: &PathSpace, new: &PathSpace, rec: &Recoding, p: &Partition) -> Result<Partition> {
    let idx: Result<Vec<usize>> = new
        .paths()
        .iter()
        .map(|q| old.index_of(&rec.backward(q)).ok_or_else(|| Error::construction("transport", "Y is not preserved")))
        .collect();
    Ok(p.restrict(&idx?))
}

/// Push a partition of depth-`K` `Y`-paths down to their depth-`L` prefixes,
/// failing when it is not determined by the prefixes.
fn project(old: &PathSpace, new: &PathSpace, rec: &Recoding, cut: usize, p: &Partition) -> Result<Partition> {
    let prefix_of: Vec<usize> = old
        .paths()
        .iter()
        .map(|x| {
            rec.forward(&x[..cut])
                .and_then(|q| new.index_of(&q))
                .ok_or_else(|| Error::construction("project", "prefix outside Y"))
        })
        .collect::<Result<_>>()?;
    let mut groups: HashMap<&[usize], Vec<usize>> = HashMap::new();
    for (i, x) in old.paths().iter().enumerate() {
        groups.entry(&x[cut..]).or_default().push(i);
    }
    let mut uf = UnionFind::new(new.len());
    for members in groups.values() {
        let mut first: HashMap<usize, usize> = HashMap::new();
        for &i in members {
            let f = *first.entry(p.class_of(i)).or_insert(i);
            uf.union(prefix_of[f], prefix_of[i]);
        }
    }
    let q = uf.into_partition();
    for members in groups.values() {
        for &a in members {
            for &b in members {
                if p.same(a, b) != q.same(prefix_of[a], prefix_of[b]) {
                    return Err(Error::Unsupported(format!(
                        "S is not determined by depth-{cut} Y-prefixes, so it cannot follow the truncated telescoping"
                    )));
                }
            }
        }
    }
    Ok(q)
}

pub fn resolve_s(diagram: &BratteliDiagram, y: &PathSpace, spec: &SSequence) -> Result<Vec<Partition>> {
    match spec {
        SSequence::Diagonal => Ok(Vec::new()),
        SSequence::Tail => (1..=diagram.depth()).map(|n| Ok(tail_relation(diagram, y, n)?.partition)).collect(),
        SSequence::Explicit(seq) => {
            if let Some(p) = seq.iter().find(|p| p.len() != y.len()) {
                return Err(Error::Input(format!("S partition has {} elements but Y has {}", p.len(), y.len())));
            }
            Ok(seq.clone())
        }
    }
}

pub struct SplitConfig {
    pub cap: usize,
}

impl Default for SplitConfig {
    fn default() -> Self {
        SplitConfig { cap: DEFAULT_PATH_CAP }
    }
}

pub fn run_splitting(
    diagram: &BratteliDiagram,
    sub: &Subdiagram,
    s_spec: &SSequence,
    depth: usize,
    config: &SplitConfig,
) -> Result<SplitContext> {
    if depth == 0 || depth > diagram.depth() {
        return Err(Error::LevelOutOfRange(format!("depth {depth} on a diagram of depth {}", diagram.depth())));
    }
    let original = diagram.truncated(depth);
    let original_sub = sub.truncated(depth);
    let y0 = y_paths(&original, &original_sub, depth)?;
    let s_orig = resolve_s(&original, &y0, s_spec)?;

    // alignment: S_m ⊆ R_{n'_m}|Y with n'_m strictly increasing
    let tails_y: Vec<Partition> =
        (0..=depth).map(|n| Ok(tail_relation(&original, &y0, n)?.partition)).collect::<Result<_>>()?;
    let alignment_indices = check_nested(&s_orig, &tails_y).map_err(|e| e.in_stage("check_nested"))?;
    let mut levels = vec![0usize];
    for &nm in &alignment_indices {
        levels.push(nm.max(levels.last().unwrap() + 1));
    }
    if *levels.last().unwrap() > depth {
        return Err(Error::exhausted("align", format!("alignment needs {} levels beyond depth {depth}", levels.last().unwrap())));
    }
    let last = *levels.last().unwrap();
    levels.extend(last + 1..=depth);
    let alignment_plan = TelescopePlan::new(levels)?;
    let (d1, sub1, rec1) = telescope(&original, &alignment_plan, Some(&original_sub))?;
    let sub1 = sub1.expect("subdiagram carried");
    let y1 = y_paths(&d1, &sub1, d1.depth())?;
    let m = s_orig.len();
    let mut s1 = vec![Partition::diagonal(y1.len())];
    for k in 1..=d1.depth() {
        s1.push(match m {
            0 => Partition::diagonal(y1.len()),
            _ => transport(&y0, &y1, &rec1, &s_orig[k.min(m) - 1])?,
        });
    }

    let counting_plan = counting_telescope(&d1, &sub1)?;
    let (d2, sub2, rec2) = telescope(&d1, &counting_plan, Some(&sub1))?;
    let sub2 = sub2.expect("subdiagram carried");
    let k_depth = d2.depth();
    let y2 = y_paths(&d2, &sub2, k_depth)?;
    let cut = counting_plan.last();
    let s: Vec<Partition> = counting_plan
        .levels()
        .iter()
        .map(|&l| {
            if cut == d1.depth() {
                transport(&y1, &y2, &rec2, &s1[l])
            } else {
                project(&y1, &y2, &rec2, cut, &s1[l])
            }
        })
        .collect::<Result<_>>()
        .map_err(|e| e.in_stage("counting_telescope"))?;
    let composed_plan = alignment_plan.then(&counting_plan)?;

    let universe = enumerate_paths(&d2, k_depth, config.cap)?;
    let rho = build_rho(&d2, &sub2).map_err(|e| e.in_stage("build_rho"))?;
    let tails: Vec<Partition> =
        (0..=k_depth).map(|n| Ok(tail_relation(&d2, &universe, n)?.partition)).collect::<Result<_>>()?;
    let tails_y2: Vec<Partition> =
        (0..=k_depth).map(|n| Ok(tail_relation(&d2, &y2, n)?.partition)).collect::<Result<_>>()?;

    let mut out_levels: Vec<SplitLevel> = Vec::with_capacity(k_depth);
    let mut lambda_prev = vec![0u32; universe.len()];
    let mut lambda_prev_depth = 0;
    for n in 1..=k_depth {
        let stage = format!("level {n}");
        let mu = realize_label_map(&y2, &tails_y2[n], &s[n]).map_err(|e| e.in_stage(&stage))?;
        let mu_tilde_depth = mu.function.depth.max(n + 1).min(k_depth);
        let target: Vec<bool> = universe.paths().iter().map(|p| in_y_k(&sub2, p, (n + 1).min(k_depth))).collect();
        let mu_tilde = extend_mu(&d2, &sub2, &y2, &mu.values, &universe, &target)?;
        let u_depth = if n == 1 {
            2.min(k_depth)
        } else {
            find_un(&sub2, &universe, &tails[n - 1], &lambda_prev, &mu_tilde, n).map_err(|e| e.in_stage(&stage))?
        };
        let lambda = build_lambda(&LambdaInput {
            diagram: &d2,
            sub: &sub2,
            universe: &universe,
            rho: &rho,
            r_prev: &tails[n - 1],
            r_n: &tails[n],
            lambda_prev: &lambda_prev,
            mu_tilde: &mu_tilde,
            n,
            u_depth,
        })
        .map_err(|e| e.in_stage(&stage))?;
        let table_depth = u_depth.max(lambda_prev_depth).max(mu_tilde_depth).min(k_depth);
        let table = CylinderFunction::from_values(&universe, &lambda, table_depth).map_err(|(i, j)| {
            Error::construction(
                "build_lambda",
                format!("label at level {n} is not determined by depth-{table_depth} prefixes ({i}, {j})"),
            )
        })?;
        let rprime = build_rprime(&tails[n], &lambda, out_levels.last().map(|l| &l.rprime))?;
        lambda_prev_depth = table_depth;
        out_levels.push(SplitLevel {
            n,
            labels: mu.k,
            mu: mu.function,
            mu_tilde_depth,
            u_depth,
            lambda: table,
            lambda_values: lambda.clone(),
            rprime,
        });
        lambda_prev = lambda;
    }

    Ok(SplitContext {
        original,
        original_sub,
        original_s: s_orig,
        alignment_indices,
        alignment_plan,
        counting_plan,
        composed_plan,
        recodings: RecodingChain(vec![rec1, rec2]),
        diagram: d2,
        sub: sub2,
        universe,
        y_space: y2,
        s,
        rho,
        tails,
        levels: out_levels,
    })
}

/// A cylinder function keyed by edge-id prefixes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CylinderTableJson {
    pub depth: usize,
    pub entries: Vec<(Vec<String>, u32)>,
}

impl CylinderTableJson {
    pub fn from_function(diagram: &BratteliDiagram, f: &CylinderFunction) -> Self {
        CylinderTableJson {
            depth: f.depth,
            entries: f.table.iter().map(|(k, &v)| (diagram.path_ids(k), v)).collect(),
        }
    }

    pub fn to_function(&self, diagram: &BratteliDiagram) -> Result<CylinderFunction> {
        let mut table = std::collections::BTreeMap::new();
        for (ids, v) in &self.entries {
            let p = diagram.path_from_ids(ids)?;
            if p.len() != self.depth {
                return Err(Error::Input(format!("table key {ids:?} has the wrong length")));
            }
            table.insert(p, *v);
        }
        Ok(CylinderFunction { depth: self.depth, table })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RhoJson {
    pub level: usize,
    pub vertex: String,
    pub domain: Vec<String>,
    pub codomain: Vec<Vec<String>>,
    /// Codomain position of each domain edge.
    pub image: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelJson {
    pub n: usize,
    pub labels: usize,
    pub u_depth: usize,
    pub mu: CylinderTableJson,
    pub lambda: CylinderTableJson,
    pub rprime_classes: usize,
    pub rprime_digest: String,
}

/// Serialized splitting run, sufficient for re-verification from scratch.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitCertificate {
    pub horizon: usize,
    pub original: DiagramJson,
    pub original_s: Vec<PartitionJson>,
    pub alignment_indices: Vec<usize>,
    pub alignment_plan: Vec<usize>,
    pub counting_plan: Vec<usize>,
    pub composed_plan: Vec<usize>,
    pub working: DiagramJson,
    pub universe_size: usize,
    /// Working-coordinate `S_n` for `0 ≤ n ≤ K`.
    pub s_sequence: Vec<PartitionJson>,
    pub rho: Vec<RhoJson>,
    pub levels: Vec<LevelJson>,
}

impl SplitCertificate {
    pub fn from_context(ctx: &SplitContext) -> Self {
        let d = &ctx.diagram;
        let y0 = y_paths(&ctx.original, &ctx.original_sub, ctx.original.depth()).expect("depth in range");
        SplitCertificate {
            horizon: ctx.original.depth(),
            original: DiagramJson::from_diagram(&ctx.original, Some(&ctx.original_sub)),
            original_s: ctx.original_s.iter().map(|p| PartitionJson::from_partition(&ctx.original, &y0, p)).collect(),
            alignment_indices: ctx.alignment_indices.clone(),
            alignment_plan: ctx.alignment_plan.levels().to_vec(),
            counting_plan: ctx.counting_plan.levels().to_vec(),
            composed_plan: ctx.composed_plan.levels().to_vec(),
            working: DiagramJson::from_diagram(d, Some(&ctx.sub)),
            universe_size: ctx.universe.len(),
            s_sequence: ctx.s.iter().map(|p| PartitionJson::from_partition(d, &ctx.y_space, p)).collect(),
            rho: ctx
                .rho
                .iter()
                .map(|m| RhoJson {
                    level: m.level,
                    vertex: d.vertices(m.level)[m.vertex].clone(),
                    domain: m.domain.iter().map(|&e| d.edge(m.level, e).id.clone()).collect(),
                    codomain: m.codomain.iter().map(|p| d.path_ids(p)).collect(),
                    image: (0..m.domain.len()).map(|i| m.image_index(i)).collect(),
                })
                .collect(),
            levels: ctx
                .levels
                .iter()
                .map(|l| LevelJson {
                    n: l.n,
                    labels: l.labels,
                    u_depth: l.u_depth,
                    mu: CylinderTableJson::from_function(d, &l.mu),
                    lambda: CylinderTableJson::from_function(d, &l.lambda),
                    rprime_classes: l.rprime.num_classes(),
                    rprime_digest: l.rprime.digest(),
                })
                .collect(),
        }
    }
}
