use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use super::{all_paths, Report, SplitView};
use crate::diagram::{BratteliDiagram, Subdiagram};
use crate::partition::Partition;
use crate::telescope::telescope;
use crate::counts::TelescopePlan;

fn first_difference(a: &Partition, b: &Partition) -> Option<(usize, usize)> {
    a.first_refinement_failure(b).or_else(|| b.first_refinement_failure(a))
}

/// Structural checks plus clauses (1)–(8) at every level `n ≤ K − slack`.
pub fn check_lemma_clauses(view: &SplitView, slack: usize) -> Report {
    let mut r = Report::default();
    let k = view.depth();
    r.param("working_depth", k);
    r.param("slack", slack);
    r.param("universe", view.universe.len());
    structure(view, &mut r);
    for n in 1..=k {
        if n + slack > k {
            for name in ["clause1", "clause2", "clause3", "clause4", "clause5", "clause6", "clause7", "clause8"] {
                r.skip(name, Some(n), format!("level {n} is within slack {slack} of the working depth {k}"));
            }
            continue;
        }
        r.outcome("clause1", Some(n), clause1(view, n));
        r.outcome("clause2", Some(n), clause2(view, n));
        r.outcome("clause3", Some(n), clause3(view, n));
        if n >= 2 {
            r.outcome("clause4", Some(n), clause4(view, n));
        }
        r.outcome("clause5", Some(n), clause5(view, n));
        r.outcome("clause6", Some(n), clause6(view, n));
        if n >= 2 {
            r.outcome("clause7", Some(n), clause7(view, n));
        }
        r.outcome("clause8", Some(n), clause8(view, n));
    }
    r
}

type Shape = (Vec<Vec<String>>, Vec<BTreeMap<(String, String, bool), usize>>);

/// Vertex names and, per level, multiplicities of `(source, range, in F)`.
fn shape(d: &BratteliDiagram, sub: &Subdiagram) -> Shape {
    let edges = (1..=d.depth())
        .map(|n| {
            let mut m = BTreeMap::new();
            for (k, e) in d.edges(n).iter().enumerate() {
                let key = (d.vertices(n - 1)[e.source].clone(), d.vertices(n)[e.range].clone(), sub.in_f(n, k));
                *m.entry(key).or_insert(0) += 1;
            }
            m
        })
        .collect();
    (d.levels().to_vec(), edges)
}

fn structure(view: &SplitView, r: &mut Report) {
    let d = &view.diagram;
    // the working diagram is the composed telescoping of the input
    let rebuilt = TelescopePlan::new(view.composed_plan.clone())
        .and_then(|plan| telescope(&view.original, &plan, Some(&view.original_sub)))
        .map(|(t, ts, _)| shape(&t, &ts.expect("subdiagram carried")));
    r.outcome(
        "working_diagram",
        None,
        match rebuilt {
            Ok(j) if j == shape(d, &view.sub) => None,
            Ok(_) => Some("working diagram differs from the telescoped input".into()),
            Err(e) => Some(e.to_string()),
        },
    );

    // counting inequality at every working level, from enumerated F-paths
    let mut failure = None;
    for n in 1..=view.depth() {
        let fpaths = all_paths(d, n, Some(&view.sub));
        for w in view.sub.w_level(n) {
            let f = fpaths.iter().filter(|p| d.end_vertex(p) == w).count();
            let non_f = d.incoming(n, w).iter().filter(|&&e| !view.sub.in_f(n, e)).count();
            if f > non_f && failure.is_none() {
                failure = Some(format!("level {n} vertex {:?}: |F(v0,w)|={f} > {non_f}", d.vertices(n)[w]));
            }
        }
    }
    r.outcome("counting_inequality", None, failure);

    // the surjections: domain = non-F edges into w, codomain = F(v0,w), onto
    let mut failure = None;
    for n in 1..=view.depth() {
        let fpaths = all_paths(d, n, Some(&view.sub));
        for w in view.sub.w_level(n) {
            let expected_cod: Vec<Vec<usize>> = fpaths.iter().filter(|p| d.end_vertex(p) == w).cloned().collect();
            let expected_dom: Vec<usize> =
                d.incoming(n, w).iter().copied().filter(|&e| !view.sub.in_f(n, e)).collect();
            let msg = match view.rho.get(&(n, w)) {
                None if expected_cod.is_empty() => None,
                None => Some("missing".to_string()),
                Some((dom, cod, img)) => {
                    let onto: HashSet<usize> = img.iter().copied().collect();
                    if *dom != expected_dom || *cod != expected_cod {
                        Some("domain or codomain differs".to_string())
                    } else if onto.len() != cod.len() {
                        Some("not surjective".to_string())
                    } else {
                        None
                    }
                }
            };
            if let (Some(m), None) = (msg, &failure) {
                failure = Some(format!("rho at level {n} vertex {:?}: {m}", d.vertices(n)[w]));
            }
        }
    }
    r.outcome("rho_surjections", None, failure);

    // S nested and inside R_n|Y
    let mut failure = None;
    for n in 0..=view.depth() {
        if n > 0 && view.s[n - 1].first_refinement_failure(&view.s[n]).is_some() {
            failure.get_or_insert(format!("S_{} is not inside S_{n}", n - 1));
        }
        if view.s[n].first_refinement_failure(&view.tail_on_y(n)).is_some() {
            failure.get_or_insert(format!("S_{n} is not inside R_{n}|Y"));
        }
    }
    r.outcome("s_sequence", None, failure);

    // the last working S agrees with the prescribed union on the input
    if view.composed_plan.last() == Some(&view.original.depth()) {
        let idx: Vec<usize> = view
            .y
            .iter()
            .map(|p| {
                let back = view.recoding.backward(p);
                view.original_y.iter().position(|q| *q == back).expect("Y-paths correspond")
            })
            .collect();
        let target = view.original_s.last().cloned().unwrap_or_else(|| Partition::diagonal(view.original_y.len()));
        let failure = first_difference(&view.s[view.depth()], &target.restrict(&idx))
            .map(|(a, b)| format!("pair {} / {}", view.ids(view.y_idx[a]), view.ids(view.y_idx[b])));
        r.outcome("s_transport", None, failure);
    } else {
        r.skip("s_transport", None, "the telescoping stops before the horizon");
    }
}

/// `{(y,y') ∈ R_n|Y : λ_n(y)=λ_n(y')} = S_n`.
pub(crate) fn clause1(view: &SplitView, n: usize) -> Option<String> {
    let r = view.tail_on_y(n);
    let lam = &view.lambda[n];
    let induced = Partition::from_keys(view.y_idx.iter().enumerate().map(|(j, &i)| (r.class_of(j), lam[i])));
    first_difference(&induced, &view.s[n])
        .map(|(a, b)| format!("{} / {}", view.ids(view.y_idx[a]), view.ids(view.y_idx[b])))
}

fn clause2(view: &SplitView, n: usize) -> Option<String> {
    if let Some(&i) = view.y_idx.iter().find(|&&i| !view.u[n][i]) {
        return Some(format!("{} is in Y but not in U_{n}", view.ids(i)));
    }
    let need = (n + 1).min(view.depth());
    (view.u_depth[n] < need).then(|| format!("U_{n} = Y_{} is not inside Y_{need}", view.u_depth[n]))
}

/// `⋂_{n≤m≤K} R_m[U_m] = R_n[Y]`, with `R_m[U_m] ⊆ {x_{m+1} ∈ F}` for `m < K`.
fn clause3(view: &SplitView, n: usize) -> Option<String> {
    let k = view.depth();
    let mut inter = vec![true; view.universe.len()];
    for m in n..=k {
        let sat = view.tails[m].saturate(&view.u[m]);
        for (i, s) in sat.iter().enumerate() {
            if *s && m < k && !view.sub.in_f(m + 1, view.universe.path(i)[m]) {
                return Some(format!("{} is in R_{m}[U_{m}] with edge {} outside F", view.ids(i), m + 1));
            }
            inter[i] &= s;
        }
    }
    let target = view.tails[n].saturate(&view.in_y());
    (0..inter.len()).find(|&i| inter[i] != target[i]).map(|i| format!("{} differs", view.ids(i)))
}

/// Equal `λ_{n-1}` inside an `R_{n-1}`-class forces equal `λ_n`.
pub(crate) fn clause4(view: &SplitView, n: usize) -> Option<String> {
    let mut seen: HashMap<(usize, u32), usize> = HashMap::new();
    for i in 0..view.universe.len() {
        let j = *seen.entry((view.tails[n - 1].class_of(i), view.lambda[n - 1][i])).or_insert(i);
        if view.lambda[n][j] != view.lambda[n][i] {
            return Some(format!("{} / {}", view.ids(j), view.ids(i)));
        }
    }
    None
}

/// `λ_n` is constant off `R_n[U_n]`.
pub(crate) fn clause5(view: &SplitView, n: usize) -> Option<String> {
    let sat = view.tails[n].saturate(&view.u[n]);
    let mut first: Option<usize> = None;
    for i in (0..sat.len()).filter(|&i| !sat[i]) {
        match first {
            None => first = Some(i),
            Some(j) if view.lambda[n][j] != view.lambda[n][i] => {
                return Some(format!("{} / {}", view.ids(j), view.ids(i)))
            }
            Some(_) => {}
        }
    }
    None
}

/// Some `x ∈ R_n[y]` has an `R_{n-1}`-class on which `λ_n ≡ λ_n(y)`.
fn clause6(view: &SplitView, n: usize) -> Option<String> {
    let prev = &view.tails[n - 1];
    let mut constant: Vec<Option<Option<u32>>> = vec![None; prev.num_classes()];
    for i in 0..view.universe.len() {
        let v = view.lambda[n][i];
        let slot = &mut constant[prev.class_of(i)];
        *slot = match *slot {
            None => Some(Some(v)),
            Some(Some(c)) if c == v => Some(Some(c)),
            _ => Some(None),
        };
    }
    let mut values: HashMap<usize, BTreeSet<u32>> = HashMap::new();
    for i in 0..view.universe.len() {
        if let Some(Some(c)) = constant[prev.class_of(i)] {
            values.entry(view.tails[n].class_of(i)).or_default().insert(c);
        }
    }
    view.y_idx
        .iter()
        .find(|&&i| !values.get(&view.tails[n].class_of(i)).is_some_and(|s| s.contains(&view.lambda[n][i])))
        .map(|&i| format!("no witness for {}", view.ids(i)))
}

/// The counting bound for `y ∈ U_n`, together with the witness sets `P_y`.
pub(crate) fn clause7(view: &SplitView, n: usize) -> Option<String> {
    let d = &view.diagram;
    let min = *view.counts[n - 1].iter().min().expect("levels are non-empty") as usize;
    let rn = &view.tails[n];
    let mut all: HashMap<(usize, u32), usize> = HashMap::new();
    let mut in_u: HashMap<(usize, u32), usize> = HashMap::new();
    for i in 0..view.universe.len() {
        let key = (rn.class_of(i), view.lambda[n][i]);
        *all.entry(key).or_default() += 1;
        if view.u[n][i] {
            *in_u.entry(key).or_default() += 1;
        }
    }
    for (key, &c) in &in_u {
        if min * c > all[key] {
            return Some(format!("class bound fails: {min} * {c} > {}", all[key]));
        }
    }
    let mut by_suffix: HashMap<&[usize], Vec<usize>> = HashMap::new();
    for (i, p) in view.universe.paths().iter().enumerate() {
        by_suffix.entry(&p[n - 1..]).or_default().push(i);
    }
    let mut used: HashSet<usize> = HashSet::new();
    for i in (0..view.universe.len()).filter(|&i| view.u[n][i]) {
        let y = view.universe.path(i);
        let w = d.edge(n, y[n - 1]).range;
        let Some((dom, cod, img)) = view.rho.get(&(n, w)) else {
            return Some(format!("no surjection into {:?} at level {n}", d.vertices(n)[w]));
        };
        let Some(c) = cod.iter().position(|p| p[..] == y[..n]) else {
            return Some(format!("{} has a prefix outside the codomain", view.ids(i)));
        };
        let Some(pos) = img.iter().position(|&t| t == c) else {
            return Some(format!("codomain element of {} is not hit", view.ids(i)));
        };
        let e = dom[pos];
        let mut key = vec![e];
        key.extend_from_slice(&y[n..]);
        let p_y = by_suffix.get(key.as_slice()).cloned().unwrap_or_default();
        let expected = view.counts[n - 1][d.edge(n, e).source] as usize;
        if p_y.len() != expected {
            return Some(format!("|P_y| = {} but |E(v0,s(e))| = {expected} for {}", p_y.len(), view.ids(i)));
        }
        for &x in &p_y {
            if view.lambda[n][x] != view.lambda[n][i] || view.u[n][x] || !used.insert(x) {
                return Some(format!("P_y for {} fails at {}", view.ids(i), view.ids(x)));
            }
        }
    }
    None
}

/// Every `x ∈ R_n[Y]` has a `Y`-partner in `R_n` with the same label.
pub(crate) fn clause8(view: &SplitView, n: usize) -> Option<String> {
    let rn = &view.tails[n];
    let mut labels: HashMap<usize, HashSet<u32>> = HashMap::new();
    for &i in &view.y_idx {
        labels.entry(rn.class_of(i)).or_default().insert(view.lambda[n][i]);
    }
    (0..view.universe.len())
        .find(|&i| labels.get(&rn.class_of(i)).is_some_and(|s| !s.contains(&view.lambda[n][i])))
        .map(|i| format!("{} has no Y-partner", view.ids(i)))
}
