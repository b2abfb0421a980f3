use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Report, SplitView};
use crate::diagram::BratteliDiagram;
use crate::error::{Error, Result};
use crate::lp::{maximize, rank, LpOutcome, Q};

/// Vertex masses `q_n(v)`: a depth-`n` cylinder ending at `v` has mass `q_n(v)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Weighting {
    pub q: Vec<Vec<Q>>,
}

impl Weighting {
    pub fn cylinder(&self, diagram: &BratteliDiagram, prefix: &[usize]) -> Q {
        self.q[prefix.len()][diagram.end_vertex(prefix)].clone()
    }

    /// Mass of a union of distinct cylinders.
    pub fn mass<'a, I: IntoIterator<Item = &'a [usize]>>(&self, diagram: &BratteliDiagram, prefixes: I) -> Q {
        prefixes.into_iter().map(|p| self.cylinder(diagram, p)).sum()
    }

    /// Exact recursion, nonnegativity and unit total mass.
    pub fn check(&self, diagram: &BratteliDiagram) -> Option<String> {
        if self.q[0][0] != Q::one() {
            return Some("q_0(v0) != 1".into());
        }
        for n in 1..self.q.len() {
            for (v, qv) in self.q[n - 1].iter().enumerate() {
                let s: Q = diagram.outgoing(n - 1, v).iter().map(|&k| self.q[n][diagram.edge(n, k).range].clone()).sum();
                if s != *qv {
                    return Some(format!("recursion fails at level {} vertex {:?}", n - 1, diagram.vertices(n - 1)[v]));
                }
            }
            if self.q[n].iter().any(|x| x.is_negative()) {
                return Some(format!("negative mass at level {n}"));
            }
        }
        None
    }
}

#[derive(Debug, Clone)]
pub struct WeightingSummary {
    pub depth: usize,
    pub variables: usize,
    pub dimension: usize,
    /// Maximizers of `q_N(v)` for each top vertex `v`, deduplicated.
    pub extreme_points: Vec<Weighting>,
}

impl WeightingSummary {
    /// The vertex reached by maximizing the masses of the top level in order.
    pub fn lex_vertex(&self) -> &Weighting {
        &self.extreme_points[0]
    }
}

/// Solve the recursion `q_{n-1}(v) = Σ_{s(e)=v} q_n(r(e))`, `q_0 = 1`, `q ≥ 0`
/// exactly at depth `depth`.
pub fn invariant_weightings(diagram: &BratteliDiagram, depth: usize) -> Result<WeightingSummary> {
    if depth > diagram.depth() {
        return Err(Error::LevelOutOfRange(format!("weighting depth {depth}")));
    }
    let mut offset = vec![0usize];
    for n in 0..=depth {
        offset.push(offset[n] + diagram.vertices(n).len());
    }
    let vars = offset[depth + 1];
    let mut a: Vec<Vec<Q>> = Vec::new();
    let mut b: Vec<Q> = Vec::new();
    let mut row = vec![Q::zero(); vars];
    row[0] = Q::one();
    a.push(row);
    b.push(Q::one());
    for n in 1..=depth {
        for v in 0..diagram.vertices(n - 1).len() {
            let mut row = vec![Q::zero(); vars];
            row[offset[n - 1] + v] = Q::one();
            for &k in diagram.outgoing(n - 1, v) {
                row[offset[n] + diagram.edge(n, k).range] -= Q::one();
            }
            a.push(row);
            b.push(Q::zero());
        }
    }
    let dimension = vars - rank(&a);
    let mut extreme_points: Vec<Weighting> = Vec::new();
    for v in 0..diagram.vertices(depth).len() {
        let mut c = vec![Q::zero(); vars];
        c[offset[depth] + v] = Q::one();
        match maximize(&a, &b, &c) {
            LpOutcome::Optimal { x, .. } => {
                let q = (0..=depth).map(|n| x[offset[n]..offset[n + 1]].to_vec()).collect();
                let w = Weighting { q };
                if !extreme_points.contains(&w) {
                    extreme_points.push(w);
                }
            }
            other => {
                return Err(Error::construction("invariant_weightings", format!("{other:?} for a valid diagram")))
            }
        }
    }
    Ok(WeightingSummary { depth, variables: vars, dimension, extreme_points })
}

fn q_frac(n: u64) -> Q {
    Q::new(BigInt::one(), BigInt::from(n))
}

/// The thinness bound per class, `μ(U_n) ≤ 1/min|E(v0,v)|` under every
/// extreme weighting, and sampled graph transports off `R_m[U_m]`.
pub fn check_measure(view: &SplitView, seed: u64, samples: usize) -> Result<Report> {
    let mut r = Report::default();
    let d = &view.diagram;
    let k = view.depth();
    let ws = invariant_weightings(d, k)?;
    r.param("working_depth", k);
    r.param("weighting_dimension", ws.dimension);
    r.param("extreme_points", ws.extreme_points.len());
    r.param("seed", seed);
    for (i, w) in ws.extreme_points.iter().enumerate() {
        r.outcome("weighting_exact", Some(i), w.check(d));
    }
    for n in 1..=k {
        let min = *view.counts[n - 1].iter().min().unwrap();
        // (a) per R'_n class
        let rp = view.rprime(n);
        let mut size = vec![0u64; rp.num_classes()];
        let mut in_u = vec![0u64; rp.num_classes()];
        for i in 0..view.universe.len() {
            size[rp.class_of(i)] += 1;
            if view.u[n][i] {
                in_u[rp.class_of(i)] += 1;
            }
        }
        let failure = (0..size.len())
            .find(|&c| in_u[c] > 0 && min * in_u[c] > size[c])
            .map(|c| format!("class {c}: {min} * {} > {}", in_u[c], size[c]));
        r.outcome("class_bound", Some(n), failure);
        // (b) μ(U_n) under every extreme weighting
        let bound = q_frac(min);
        let mut failure = None;
        for w in &ws.extreme_points {
            let mass = w.mass(d, (0..view.universe.len()).filter(|&i| view.u[n][i]).map(|i| view.universe.path(i)));
            if mass > bound {
                failure = Some(format!("mu(U_{n}) = {mass} > {bound}"));
                break;
            }
        }
        r.outcome("measure_bound", Some(n), failure);
    }
    // (c) prefix swaps p -> p' (same end vertex) on the part of [p] off R_m[U_m]
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failure = None;
    let mut tried = 0;
    for _ in 0..samples {
        let m = rng.gen_range(1..=k);
        let j = rng.gen_range(1..=m);
        let sat = view.tails[m].saturate(&view.u[m]);
        let off: Vec<usize> = (0..sat.len()).filter(|&i| !sat[i]).collect();
        if off.is_empty() {
            continue;
        }
        let x = view.universe.path(off[rng.gen_range(0..off.len())]);
        let p = &x[..j];
        let mut alternatives: Vec<&[usize]> = view
            .universe
            .paths()
            .iter()
            .map(|q| &q[..j])
            .filter(|q| *q != p && d.end_vertex(q) == d.end_vertex(p))
            .collect();
        alternatives.sort();
        alternatives.dedup();
        if alternatives.is_empty() {
            continue;
        }
        let p2 = alternatives[rng.gen_range(0..alternatives.len())].to_vec();
        tried += 1;
        let mut source: Vec<&[usize]> = Vec::new();
        let mut target: Vec<Vec<usize>> = Vec::new();
        for &i in &off {
            let z = view.universe.path(i);
            if z[..j] != *p {
                continue;
            }
            let mut gz = p2.clone();
            gz.extend_from_slice(&z[j..]);
            let Some(gi) = view.universe.index_of(&gz) else {
                failure = Some(format!("image of {} is not a path", view.ids(i)));
                break;
            };
            if sat[gi] || view.lambda[m][i] != view.lambda[m][gi] {
                failure = Some(format!("swap at level {m} moves {} outside R'_{m}", view.ids(i)));
                break;
            }
            source.push(z);
            target.push(gz);
        }
        if failure.is_some() {
            break;
        }
        for w in &ws.extreme_points {
            if w.mass(d, source.iter().copied()) != w.mass(d, target.iter().map(|v| v.as_slice())) {
                failure = Some(format!("swap at level {m} changes mass"));
            }
        }
    }
    r.param("transport_samples", tried);
    r.outcome("graph_transport", None, failure);
    r.notes.push(
        "measure conclusion checked through the class bound and graph transport off R[Y]; \
         a stronger finite-depth surrogate is left open"
            .into(),
    );
    Ok(r)
}
