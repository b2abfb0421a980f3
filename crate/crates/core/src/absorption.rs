//! Absorption at finite scale: the copies space `Z` with the relations `Q̃_n`,
//! a replica of `Q̃` inside an enlarged diagram, the subrelation `S` handed to
//! the splitting construction, and the shift map `h`.

use serde::{Deserialize, Serialize};

use crate::diagram::{validate, BratteliDiagram, DiagramJson, Edge, Subdiagram};
use crate::error::{Error, Result};
use crate::oracle::{self, Report};
use crate::partition::{realize_label_map, tail_relation, Partition, PartitionJson};
use crate::paths::{enumerate_paths, y_paths, PathSpace};
use crate::splitting::{run_splitting, SSequence, SplitCertificate, SplitConfig, SplitContext};

/// How the extension `Q` of `R|Y` is prescribed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum QSpec {
    /// `Q_n = R_n|Y`, so that `R ∨ Q = R`.
    Tail,
    /// `Q_n = R_n|Y` for `n < first` and all of `Y × Y` from level `first` on.
    FullFrom(usize),
    /// Explicit nested partitions of the depth-`N` `Y`-paths, padded by the
    /// last one up to `N`.
    Explicit(Vec<Partition>),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum QSupport {
    /// `Q_n ⊆ R_N|Y`, realized by labels of the given prefix depth.
    PrefixDetermined { depth: usize },
    /// `Y` does not grow between depth `N-1` and `N`.
    FiniteY,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QSequence {
    /// `levels[n-1] = Q_n` for `1 ≤ n ≤ N`.
    pub levels: Vec<Partition>,
    pub support: Vec<QSupport>,
}

impl QSequence {
    pub fn q(&self, n: usize) -> &Partition {
        &self.levels[n - 1]
    }

    pub fn top(&self) -> &Partition {
        self.levels.last().expect("at least one level")
    }
}

/// Check nesting, `Q_n ⊇ R_n|Y`, and that each `Q_n` is representable.
pub fn validate_q(diagram: &BratteliDiagram, sub: &Subdiagram, y: &PathSpace, spec: &QSpec) -> Result<QSequence> {
    let depth = y.depth();
    let tails: Vec<Partition> =
        (0..=depth).map(|n| Ok(tail_relation(diagram, y, n)?.partition)).collect::<Result<_>>()?;
    let mut levels: Vec<Partition> = match spec {
        QSpec::Tail => tails[1..].to_vec(),
        QSpec::FullFrom(first) => {
            (1..=depth).map(|n| if n >= *first { Partition::full(y.len()) } else { tails[n].clone() }).collect()
        }
        QSpec::Explicit(seq) => seq.clone(),
    };
    if levels.is_empty() {
        return Err(Error::Input("the Q sequence is empty".into()));
    }
    if levels.len() > depth {
        return Err(Error::Input(format!("{} Q-levels for depth {depth}", levels.len())));
    }
    if let Some(p) = levels.iter().find(|p| p.len() != y.len()) {
        return Err(Error::Input(format!("Q partition has {} elements but Y has {}", p.len(), y.len())));
    }
    while levels.len() < depth {
        levels.push(levels.last().unwrap().clone());
    }
    for n in 1..=depth {
        if n >= 2 && levels[n - 2].first_refinement_failure(&levels[n - 1]).is_some() {
            return Err(Error::Input(format!("Q_{} is not contained in Q_{n}", n - 1)));
        }
        if let Some((a, b)) = tails[n].first_refinement_failure(&levels[n - 1]) {
            return Err(Error::Input(format!(
                "Q_{n} does not contain R_{n}|Y: {:?} / {:?}",
                diagram.path_ids(y.path(a)),
                diagram.path_ids(y.path(b))
            )));
        }
    }
    let finite = depth >= 1 && y_paths(diagram, sub, depth - 1)?.len() == y.len();
    let support = levels
        .iter()
        .map(|q| {
            if q.refines(&tails[depth]) {
                let map = realize_label_map(y, &tails[depth], q)?;
                Ok(QSupport::PrefixDetermined { depth: map.function.depth })
            } else if finite {
                Ok(QSupport::FiniteY)
            } else {
                Err(Error::Unsupported(
                    "Q relates Y-paths with different tails and Y is not finite at this depth; \
                     identifying Q with a separate coding of Y is out of scope"
                        .into(),
                ))
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(QSequence { levels, support })
}

/// Points `(y, k)` for `1 ≤ k ≤ M`, then the tail sector `(y, ⊤)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CopiesSpace {
    pub y_len: usize,
    pub copies: usize,
    /// `q_tilde[n-1] = Q̃_n` on the points.
    pub q_tilde: Vec<Partition>,
}

impl CopiesSpace {
    pub fn len(&self) -> usize {
        self.y_len * (self.copies + 1)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Index of `(y_j, k)`; `None` is the tail sector.
    pub fn point(&self, j: usize, k: Option<usize>) -> usize {
        match k {
            Some(k) => (k - 1) * self.y_len + j,
            None => self.copies * self.y_len + j,
        }
    }

    pub fn decode(&self, i: usize) -> (usize, Option<usize>) {
        let (k, j) = (i / self.y_len, i % self.y_len);
        (j, (k < self.copies).then_some(k + 1))
    }
}

pub fn build_copies_space(y_len: usize, q: &QSequence, copies: usize) -> Result<CopiesSpace> {
    let depth = q.levels.len();
    if copies > depth {
        return Err(Error::Input(format!("{copies} copies exceed the depth {depth}")));
    }
    let mut space = CopiesSpace { y_len, copies, q_tilde: Vec::new() };
    for n in 1..=depth {
        let qn = q.q(n);
        let keys: Vec<(usize, usize)> = (0..space.len())
            .map(|i| match space.decode(i) {
                (j, Some(k)) if k <= n => (k, qn.class_of(j)),
                _ => (usize::MAX, i),
            })
            .collect();
        space.q_tilde.push(Partition::from_keys(keys));
    }
    Ok(space)
}

/// The class diagram of `Q̃`: level-`n` vertices are the `Q̃_n`-classes, one
/// level-1 edge per point, and one edge from each class into the class
/// containing it at the next level.
#[derive(Debug, Clone)]
pub struct ZDiagram {
    pub diagram: BratteliDiagram,
    pub sub: Subdiagram,
    /// Depth-`N` path of each point.
    pub point_paths: Vec<Vec<usize>>,
}

pub fn build_z_diagram(copies: &CopiesSpace) -> Result<ZDiagram> {
    let depth = copies.q_tilde.len();
    let mut levels = vec![vec!["v0".to_string()]];
    let mut edges = Vec::new();
    let mut ids_per_point: Vec<Vec<String>> = vec![Vec::new(); copies.len()];
    for n in 1..=depth {
        let q = &copies.q_tilde[n - 1];
        levels.push((0..q.num_classes()).map(|c| format!("Z{n}:{c}")).collect());
        let mut level = Vec::new();
        if n == 1 {
            for (i, ids) in ids_per_point.iter_mut().enumerate() {
                let id = format!("z1:{i}");
                level.push(Edge { id: id.clone(), source: 0, range: q.class_of(i) });
                ids.push(id);
            }
        } else {
            let prev = &copies.q_tilde[n - 2];
            let mut made = vec![false; prev.num_classes()];
            for (i, ids) in ids_per_point.iter_mut().enumerate() {
                let a = prev.class_of(i);
                let id = format!("z{n}:{a}");
                if !made[a] {
                    made[a] = true;
                    level.push(Edge { id: id.clone(), source: a, range: q.class_of(i) });
                }
                ids.push(id);
            }
        }
        edges.push(level);
    }
    let diagram = BratteliDiagram::new(levels, edges)?;
    let sub = Subdiagram::full(&diagram);
    let point_paths = ids_per_point.iter().map(|ids| diagram.path_from_ids(ids)).collect::<Result<_>>()?;
    Ok(ZDiagram { diagram, sub, point_paths })
}

/// The base diagram together with the replica of `Q̃`.
#[derive(Debug, Clone)]
pub struct Embedding {
    pub enlarged: BratteliDiagram,
    pub base_sub: Subdiagram,
    pub z_sub: Subdiagram,
    /// `π`: enlarged path of each point.
    pub points: Vec<Vec<usize>>,
}

impl Embedding {
    /// A base path, re-indexed in the enlarged diagram.
    pub fn base_path(&self, base: &BratteliDiagram, path: &[usize]) -> Result<Vec<usize>> {
        self.enlarged.path_from_ids(&base.path_ids(path))
    }
}

fn least_name(names: &[String]) -> usize {
    (0..names.len()).min_by(|&a, &b| names[a].cmp(&names[b])).expect("levels are non-empty")
}

/// Place the replica beside the base: shared `v0`, replica vertices appended
/// at each level, and cross edges between each replica vertex and the least
/// base vertex of the adjacent level so that the result stays simple.
pub fn embed_replica(base: &BratteliDiagram, base_sub: &Subdiagram, z: &ZDiagram) -> Result<Embedding> {
    let depth = base.depth();
    if z.diagram.depth() != depth {
        return Err(Error::Input(format!("replica depth {} differs from base depth {depth}", z.diagram.depth())));
    }
    let mut levels = vec![base.vertices(0).to_vec()];
    for n in 1..=depth {
        let mut names = base.vertices(n).to_vec();
        for v in z.diagram.vertices(n) {
            if names.contains(v) {
                return Err(Error::Input(format!("vertex name {v:?} is used by the base diagram")));
            }
            names.push(v.clone());
        }
        levels.push(names);
    }
    let offset = |n: usize| if n == 0 { 0 } else { base.vertices(n).len() };
    let mut edges = Vec::new();
    for n in 1..=depth {
        let mut level: Vec<Edge> = base.edges(n).to_vec();
        for e in z.diagram.edges(n) {
            let source = if n == 1 { 0 } else { offset(n - 1) + e.source };
            level.push(Edge { id: e.id.clone(), source, range: offset(n) + e.range });
        }
        if n >= 2 {
            let into = least_name(base.vertices(n));
            let from = least_name(base.vertices(n - 1));
            for a in 0..z.diagram.vertices(n - 1).len() {
                level.push(Edge { id: format!("zx{n}:{a}"), source: offset(n - 1) + a, range: into });
            }
            for b in 0..z.diagram.vertices(n).len() {
                level.push(Edge { id: format!("xz{n}:{b}"), source: from, range: offset(n) + b });
            }
        }
        edges.push(level);
    }
    let enlarged = BratteliDiagram::new(levels, edges)?;
    let base_f: Vec<String> = base_sub.f_ids(base);
    let base_w = base_sub.w_names(base);
    let base_sub_e = Subdiagram::from_names(&enlarged, &base_w, &base_f)?;
    let mut f: Vec<Vec<bool>> = (1..=depth).map(|n| vec![false; enlarged.edges(n).len()]).collect();
    for n in 1..=depth {
        for e in z.diagram.edges(n) {
            let k = enlarged.edge_index(n, &e.id).expect("replica edge present");
            f[n - 1][k] = true;
        }
    }
    let z_sub = Subdiagram::from_edges(&enlarged, f)?;
    let points = z
        .point_paths
        .iter()
        .map(|p| enlarged.path_from_ids(&z.diagram.path_ids(p)))
        .collect::<Result<Vec<_>>>()?;
    Ok(Embedding { enlarged, base_sub: base_sub_e, z_sub, points })
}

/// `S_m = {((y,k),(y',k)) ∈ Q̃_m : (y,y') ∈ R_N|Y}` plus the diagonal.
pub fn build_s(copies: &CopiesSpace, y_tail: &Partition) -> Vec<Partition> {
    copies
        .q_tilde
        .iter()
        .map(|q| {
            Partition::from_keys((0..copies.len()).map(|i| {
                let (j, _) = copies.decode(i);
                (q.class_of(i), y_tail.class_of(j))
            }))
        })
        .collect()
}

/// `h` on `Y ∪ copies 1..M`: `y ↦ (y,1)`, `(y,k) ↦ (y,k+1)`, and the last
/// copy into the tail sector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShiftMap {
    /// Domain element `a < |Y|` is `y_a`; the rest are copy points in order.
    pub domain: Vec<Vec<usize>>,
    pub image: Vec<Vec<usize>>,
    /// Whether the domain element lies in `Y ∪ copies 1..M-1`.
    pub within: Vec<bool>,
}

pub fn build_shift(embedding: &Embedding, base_y: &[Vec<usize>], copies: &CopiesSpace) -> ShiftMap {
    let m = copies.copies;
    let mut domain = Vec::new();
    let mut image = Vec::new();
    let mut within = Vec::new();
    for (j, y) in base_y.iter().enumerate() {
        domain.push(y.clone());
        image.push(embedding.points[copies.point(j, if m >= 1 { Some(1) } else { None })].clone());
        within.push(m >= 1);
    }
    for k in 1..=m {
        for j in 0..copies.y_len {
            domain.push(embedding.points[copies.point(j, Some(k))].clone());
            image.push(embedding.points[copies.point(j, if k < m { Some(k + 1) } else { None })].clone());
            within.push(k < m);
        }
    }
    ShiftMap { domain, image, within }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PointJson {
    pub y: Vec<String>,
    /// `None` for the tail sector.
    pub copy: Option<usize>,
    pub path: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShiftJson {
    pub from: Vec<String>,
    pub to: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AbsorptionCertificate {
    pub horizon: usize,
    pub copies: usize,
    pub base: DiagramJson,
    /// `Q_n` on the base `Y`-paths, `1 ≤ n ≤ N`.
    pub q_sequence: Vec<PartitionJson>,
    pub q_support: Vec<QSupport>,
    /// The enlarged diagram with the replica as its subdiagram.
    pub enlarged: DiagramJson,
    /// `π` as a map from points to enlarged path ids.
    pub points: Vec<PointJson>,
    pub shift: Vec<ShiftJson>,
    pub q_tilde_digests: Vec<String>,
    pub split: SplitCertificate,
    pub checks: Report,
    pub deviations: Vec<String>,
}

pub const DEVIATIONS: [&str; 3] = [
    "the point at infinity is modeled by a tail sector holding a copy of Y, kept diagonal",
    "h sends the last copy into the tail sector; transport identities are checked on Y and copies 1..M-1",
    "the replica of Q~ is coded by its class diagram (one vertex per Q~_n class) instead of sector copies of (W,F)",
];

#[derive(Debug, Clone)]
pub struct AbsorptionRun {
    pub base: BratteliDiagram,
    pub base_sub: Subdiagram,
    pub y: PathSpace,
    pub q: QSequence,
    pub copies: CopiesSpace,
    pub embedding: Embedding,
    pub s: Vec<Partition>,
    pub shift: ShiftMap,
    pub split: SplitContext,
    pub certificate: AbsorptionCertificate,
}

pub fn run_absorption(
    diagram: &BratteliDiagram,
    sub: &Subdiagram,
    q_spec: &QSpec,
    copies: usize,
    depth: usize,
    config: &SplitConfig,
) -> Result<AbsorptionRun> {
    if depth == 0 || depth > diagram.depth() {
        return Err(Error::LevelOutOfRange(format!("depth {depth} on a diagram of depth {}", diagram.depth())));
    }
    let base = diagram.truncated(depth);
    let base_sub = sub.truncated(depth);
    let report = validate(&base, Some(&base_sub));
    if !report.pass() {
        return Err(Error::Input(format!("base diagram fails validation: {:?}", report.violations)));
    }
    let y = y_paths(&base, &base_sub, depth)?;
    let q = validate_q(&base, &base_sub, &y, q_spec)?;
    let space = build_copies_space(y.len(), &q, copies)?;
    let z = build_z_diagram(&space)?;
    let embedding = embed_replica(&base, &base_sub, &z)?;
    // the enlarged universe must fit under the cap before anything heavier runs
    enumerate_paths(&embedding.enlarged, depth, config.cap)?;
    let y_tail = tail_relation(&base, &y, depth)?.partition;
    let s = build_s(&space, &y_tail);

    // splitting sees π(Z) through the lexicographic order of the replica paths
    let z_y = y_paths(&embedding.enlarged, &embedding.z_sub, depth)?;
    let order: Vec<usize> = z_y
        .paths()
        .iter()
        .map(|p| embedding.points.iter().position(|q| q == p).expect("replica paths are points"))
        .collect();
    let s_explicit: Vec<Partition> = s.iter().map(|p| p.restrict(&order)).collect();
    let split = run_splitting(&embedding.enlarged, &embedding.z_sub, &SSequence::Explicit(s_explicit), depth, config)
        .map_err(|e| e.in_stage("absorption"))?;
    if split.composed_plan.last() != depth {
        return Err(Error::exhausted(
            "absorption",
            format!("the counting telescoping of the enlarged diagram stops at level {}", split.composed_plan.last()),
        ));
    }
    let base_y: Vec<Vec<usize>> =
        y.paths().iter().map(|p| embedding.base_path(&base, p)).collect::<Result<_>>()?;
    let shift = build_shift(&embedding, &base_y, &space);

    let e = &embedding.enlarged;
    let mut certificate = AbsorptionCertificate {
        horizon: depth,
        copies,
        base: DiagramJson::from_diagram(&base, Some(&base_sub)),
        q_sequence: q.levels.iter().map(|p| PartitionJson::from_partition(&base, &y, p)).collect(),
        q_support: q.support.clone(),
        enlarged: DiagramJson::from_diagram(e, Some(&embedding.z_sub)),
        points: (0..space.len())
            .map(|i| {
                let (j, k) = space.decode(i);
                PointJson { y: base.path_ids(y.path(j)), copy: k, path: e.path_ids(&embedding.points[i]) }
            })
            .collect(),
        shift: shift
            .domain
            .iter()
            .zip(&shift.image)
            .map(|(a, b)| ShiftJson { from: e.path_ids(a), to: e.path_ids(b) })
            .collect(),
        q_tilde_digests: space.q_tilde.iter().map(|p| p.digest()).collect(),
        split: split.certificate(),
        checks: Report::default(),
        deviations: DEVIATIONS.iter().map(|s| s.to_string()).collect(),
    };
    let checks = oracle::check_absorption(&certificate, config.cap)?;
    if !checks.pass() {
        let first = checks.failures().next().expect("a failure");
        return Err(Error::construction("absorption", format!("{} fails: {:?}", first.name, first.status)));
    }
    certificate.checks = checks;
    Ok(AbsorptionRun { base, base_sub, y, q, copies: space, embedding, s, shift, split, certificate })
}
