//! The fixture zoo: small named diagrams with thin subdiagrams, plus a seeded
//! generator of random simple diagrams.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::counts;
use crate::diagram::{validate, BratteliDiagram, Edge, Subdiagram};
use crate::paths::DEFAULT_PATH_CAP;

/// Incremental construction by vertex name.
#[derive(Debug, Default)]
pub struct Builder {
    levels: Vec<Vec<String>>,
    edges: Vec<Vec<(String, String, String, bool)>>,
}

impl Builder {
    pub fn new() -> Self {
        Builder { levels: vec![vec!["v0".into()]], edges: Vec::new() }
    }

    /// Open a new level with the given vertex names.
    pub fn level<S: AsRef<str>>(&mut self, names: &[S]) -> &mut Self {
        self.levels.push(names.iter().map(|s| s.as_ref().to_string()).collect());
        self.edges.push(Vec::new());
        self
    }

    /// Add an edge into the most recent level.
    pub fn edge(&mut self, id: impl Into<String>, s: &str, r: &str, in_f: bool) -> &mut Self {
        self.edges.last_mut().expect("open a level first").push((id.into(), s.into(), r.into(), in_f));
        self
    }

    pub fn build(&self) -> (BratteliDiagram, Subdiagram) {
        let mut edges = Vec::new();
        let mut f_ids = Vec::new();
        for (i, level) in self.edges.iter().enumerate() {
            let n = i + 1;
            let mut out = Vec::new();
            for (id, s, r, in_f) in level {
                let source = self.levels[n - 1].iter().position(|v| v == s).expect("source vertex");
                let range = self.levels[n].iter().position(|v| v == r).expect("range vertex");
                out.push(Edge { id: id.clone(), source, range });
                if *in_f {
                    f_ids.push(id.clone());
                }
            }
            edges.push(out);
        }
        let diagram = BratteliDiagram::new(self.levels.clone(), edges).expect("fixture is well formed");
        let mut f: Vec<Vec<bool>> = (1..=diagram.depth()).map(|n| vec![false; diagram.edges(n).len()]).collect();
        for id in &f_ids {
            let (n, k) = diagram.find_edge(id).expect("fixture edge");
            f[n - 1][k] = true;
        }
        let sub = Subdiagram::from_edges(&diagram, f).expect("fixture subdiagram");
        (diagram, sub)
    }
}

/// The dyadic odometer: one vertex per level, edges `a_n`, `b_n`, `F = {a_n}`.
pub fn odometer(depth: usize) -> (BratteliDiagram, Subdiagram) {
    let mut b = Builder::new();
    for n in 1..=depth {
        let s = if n == 1 { "v0" } else { "v" };
        b.level(&["v"]).edge(format!("a{n}"), s, "v", true).edge(format!("b{n}"), s, "v", false);
    }
    b.build()
}

/// Two vertices per level with incidence `[[1,1],[1,1]]`; `F` is the chain through `u`.
pub fn two_vertex(depth: usize) -> (BratteliDiagram, Subdiagram) {
    let mut b = Builder::new();
    b.level(&["u", "w"]).edge("p1", "v0", "u", true).edge("q1", "v0", "w", false);
    for n in 2..=depth {
        b.level(&["u", "w"])
            .edge(format!("uu{n}"), "u", "u", true)
            .edge(format!("uw{n}"), "u", "w", false)
            .edge(format!("wu{n}"), "w", "u", false)
            .edge(format!("ww{n}"), "w", "w", false);
    }
    b.build()
}

/// Two disjoint `F`-chains through `a` and `b` inside a mixing bulk vertex `c`;
/// `Y` has exactly two points and they are not tail equivalent.
pub fn two_chain(depth: usize) -> (BratteliDiagram, Subdiagram) {
    let mut b = Builder::new();
    b.level(&["a", "b", "c"])
        .edge("a1", "v0", "a", true)
        .edge("b1", "v0", "b", true)
        .edge("c1", "v0", "c", false);
    for n in 2..=depth {
        b.level(&["a", "b", "c"])
            .edge(format!("aa{n}"), "a", "a", true)
            .edge(format!("bb{n}"), "b", "b", true)
            .edge(format!("ac{n}"), "a", "c", false)
            .edge(format!("bc{n}"), "b", "c", false)
            .edge(format!("ca{n}"), "c", "a", false)
            .edge(format!("cb{n}"), "c", "b", false)
            .edge(format!("cc{n}"), "c", "c", false);
    }
    b.build()
}

/// `Y` has two points that differ only in the first edge, so `R_1|Y` is not
/// the diagonal.
pub fn forked(depth: usize) -> (BratteliDiagram, Subdiagram) {
    let mut b = Builder::new();
    b.level(&["a", "c"])
        .edge("p1", "v0", "a", true)
        .edge("q1", "v0", "a", true)
        .edge("r1", "v0", "c", false);
    for n in 2..=depth {
        b.level(&["a", "c"])
            .edge(format!("aa{n}"), "a", "a", true)
            .edge(format!("ac{n}"), "a", "c", false)
            .edge(format!("ca{n}"), "c", "a", false)
            .edge(format!("cc{n}"), "c", "c", false);
    }
    b.build()
}

/// Stationary incidence `[[2,1],[1,1]]` with `F` one of the two `a → a` edges.
pub fn stationary(depth: usize) -> (BratteliDiagram, Subdiagram) {
    let mut b = Builder::new();
    b.level(&["a", "b"]).edge("a1", "v0", "a", true).edge("b1", "v0", "b", false);
    for n in 2..=depth {
        b.level(&["a", "b"])
            .edge(format!("aa{n}x"), "a", "a", true)
            .edge(format!("aa{n}y"), "a", "a", false)
            .edge(format!("ab{n}"), "a", "b", false)
            .edge(format!("ba{n}"), "b", "a", false)
            .edge(format!("bb{n}"), "b", "b", false);
    }
    b.build()
}

/// Two components below level 0; never simple.
pub fn disconnected(depth: usize) -> (BratteliDiagram, Subdiagram) {
    let mut b = Builder::new();
    b.level(&["a", "b"]).edge("a1", "v0", "a", true).edge("b1", "v0", "b", false);
    for n in 2..=depth {
        b.level(&["a", "b"])
            .edge(format!("aa{n}x"), "a", "a", true)
            .edge(format!("aa{n}y"), "a", "a", false)
            .edge(format!("bb{n}"), "b", "b", false);
    }
    b.build()
}

/// One random candidate: ≤ 4 vertices and ≤ 6 edges per level, a single
/// `F`-chain, optionally doubled at level 1.
pub fn random_candidate(rng: &mut ChaCha8Rng, depth: usize) -> (BratteliDiagram, Subdiagram) {
    let mut b = Builder::new();
    let mut prev: Vec<String> = vec!["v0".into()];
    let mut chain = "v0".to_string();
    for n in 1..=depth {
        let size = rng.gen_range(2..=4usize);
        let names: Vec<String> = (0..size).map(|i| format!("x{i}")).collect();
        b.level(&names);
        let mut pairs: Vec<(usize, usize)> = Vec::new();
        // cover every source and every target
        let cover = prev.len().max(size);
        let mut targets: Vec<usize> = (0..size).collect();
        targets.shuffle(rng);
        for i in 0..cover {
            pairs.push((i % prev.len(), targets[i % size]));
        }
        while pairs.len() < 6 && rng.gen_bool(0.6) {
            pairs.push((rng.gen_range(0..prev.len()), rng.gen_range(0..size)));
        }
        let chain_src = prev.iter().position(|v| *v == chain).expect("chain vertex");
        let f_pair = pairs.iter().position(|&(s, _)| s == chain_src).expect("chain source is covered");
        let doubled = n == 1 && pairs.len() < 6 && rng.gen_bool(0.5);
        if doubled {
            pairs.push(pairs[f_pair]);
        }
        let next_chain = names[pairs[f_pair].1].clone();
        for (i, &(s, r)) in pairs.iter().enumerate() {
            let in_f = i == f_pair || (doubled && i == pairs.len() - 1);
            b.edge(format!("e{n}_{i}"), &prev[s], &names[r], in_f);
        }
        chain = next_chain;
        prev = names;
    }
    b.build()
}

/// Twenty (or `count`) seeded random fixtures that pass validation, are
/// simple within the horizon, admit the counting telescope all the way to the
/// horizon with at least four working levels, and stay under the path cap.
pub fn random_zoo(seed: u64, count: usize, depth: usize) -> Vec<(BratteliDiagram, Subdiagram)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let (d, s) = random_candidate(&mut rng, depth);
        if !validate(&d, Some(&s)).pass() || !counts::is_simple_at_horizon(&d, depth).simple {
            continue;
        }
        let total = counts::path_counts(&d, &s, 0, depth).expect("levels in range").total_e();
        if total > num_bigint::BigUint::from(DEFAULT_PATH_CAP) {
            continue;
        }
        match counts::counting_telescope(&d, &s) {
            Ok(plan) if plan.levels().len() >= 5 && *plan.levels().last().unwrap() == depth => {
                out.push((d, s))
            }
            _ => continue,
        }
    }
    out
}
