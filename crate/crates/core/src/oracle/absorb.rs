use std::collections::HashMap;

use super::{all_paths, tail_partition, Report, SplitView};
use crate::absorption::AbsorptionCertificate;
use crate::diagram::BratteliDiagram;
use crate::error::{Error, Result};
use crate::partition::{Partition, UnionFind};
use crate::paths::PathSpace;

fn differ(a: &Partition, b: &Partition, name: impl Fn(usize) -> String) -> Option<String> {
    if let Some((i, j)) = a.first_refinement_failure(b) {
        return Some(format!("{} ~ {} on the left only", name(i), name(j)));
    }
    b.first_refinement_failure(a).map(|(i, j)| format!("{} ~ {} on the right only", name(i), name(j)))
}

fn parse(d: &BratteliDiagram, ids: &[String], depth: usize) -> Result<Vec<usize>> {
    let p = d.path_from_ids(ids)?;
    if p.len() != depth {
        return Err(Error::Input(format!("path {ids:?} has length {} instead of {depth}", p.len())));
    }
    Ok(p)
}

/// Recheck the absorption certificate: the replica codes `Q̃`, `S` is as
/// prescribed, `h` is the shift, and the transport identities hold.
pub fn check_absorption(cert: &AbsorptionCertificate, cap: usize) -> Result<Report> {
    let mut r = Report::default();
    let n_top = cert.horizon;
    let m = cert.copies;
    r.param("horizon", n_top);
    r.param("copies", m);
    let (base, base_sub) = cert.base.into_diagram()?;
    let base_sub = base_sub.ok_or_else(|| Error::Input("base lacks its subdiagram".into()))?;
    let (enl, z_sub) = cert.enlarged.into_diagram()?;
    let z_sub = z_sub.ok_or_else(|| Error::Input("enlarged diagram lacks the replica".into()))?;
    if base.depth() != n_top || enl.depth() != n_top {
        return Err(Error::Input("diagram depths disagree with the horizon".into()));
    }
    let base_y = all_paths(&base, n_top, Some(&base_sub));
    let y_space = PathSpace::from_paths(n_top, base_y.clone());
    let q: Vec<Partition> = cert.q_sequence.iter().map(|p| p.to_partition(&base, &y_space)).collect::<Result<_>>()?;
    if q.len() != n_top {
        return Err(Error::Input(format!("{} Q-levels for horizon {n_top}", q.len())));
    }
    let y_tail = tail_partition(&base, &base_y, n_top);

    // points: (j, k) with k = None for the tail sector
    let mut slot: HashMap<(usize, Option<usize>), usize> = HashMap::new();
    let mut pts: Vec<(usize, Option<usize>)> = Vec::new();
    let mut pi: Vec<Vec<usize>> = Vec::new();
    for p in &cert.points {
        let y = parse(&base, &p.y, n_top)?;
        let j = y_space.index_of(&y).ok_or_else(|| Error::Input(format!("{:?} is not a Y-path", p.y)))?;
        if p.copy.is_some_and(|k| k == 0 || k > m) {
            return Err(Error::Input(format!("copy index {:?} out of range", p.copy)));
        }
        if slot.insert((j, p.copy), pts.len()).is_some() {
            return Err(Error::Input(format!("point {:?} listed twice", (&p.y, p.copy))));
        }
        pts.push((j, p.copy));
        pi.push(parse(&enl, &p.path, n_top)?);
    }
    r.outcome(
        "points_complete",
        None,
        (pts.len() != base_y.len() * (m + 1)).then(|| format!("{} points, expected {}", pts.len(), base_y.len() * (m + 1))),
    );
    let q_tilde = |n: usize, a: usize, b: usize| {
        let ((ja, ka), (jb, kb)) = (pts[a], pts[b]);
        a == b || (ka.is_some() && ka == kb && ka.unwrap() <= n && q[n - 1].same(ja, jb))
    };
    let label = |a: usize| format!("{:?}", cert.points[a].path);

    // π is injective, lands in the replica, and codes Q̃
    let universe = all_paths(&enl, n_top, None);
    if universe.len() > cap {
        return Err(Error::CapExceeded { depth: n_top, count: universe.len(), cap });
    }
    let space = PathSpace::from_paths(n_top, universe);
    let z_y = all_paths(&enl, n_top, Some(&z_sub));
    let pi_idx: Vec<Option<usize>> = pi.iter().map(|p| space.index_of(p)).collect();
    let mut seen = HashMap::new();
    let mut failure = None;
    for (a, idx) in pi_idx.iter().enumerate() {
        match idx {
            None => failure = Some(format!("{} is not a path", label(a))),
            Some(i) if seen.insert(*i, a).is_some() => failure = Some(format!("{} is hit twice", label(a))),
            _ => {}
        }
    }
    if failure.is_none() && z_y.len() != pi.len() {
        failure = Some(format!("the replica carries {} paths for {} points", z_y.len(), pi.len()));
    }
    if failure.is_none() {
        failure = pi.iter().position(|p| !z_sub.is_f_path(p)).map(|a| format!("{} leaves the replica", label(a)));
    }
    let embedded = failure.is_none();
    r.outcome("embedding_injective", None, failure);
    if !embedded {
        return Ok(r);
    }
    let pi_idx: Vec<usize> = pi_idx.into_iter().map(Option::unwrap).collect();
    let tails: Vec<Partition> = (0..=n_top).map(|n| tail_partition(&enl, space.paths(), n)).collect();
    for n in 1..=n_top {
        let expected = Partition::from_keys((0..pts.len()).map(|a| (0..pts.len()).find(|&b| q_tilde(n, a, b)).unwrap()));
        r.outcome("embedding_transport", Some(n), differ(&tails[n].restrict(&pi_idx), &expected, label));
    }

    // the base Y and π(Z) sit over different vertices at the horizon
    let base_in_enl: Vec<usize> = base_y
        .iter()
        .map(|y| {
            let p = enl.path_from_ids(&base.path_ids(y))?;
            space.index_of(&p).ok_or_else(|| Error::Input("base path missing from the enlarged diagram".into()))
        })
        .collect::<Result<_>>()?;
    let ends = |idx: &[usize]| -> Vec<usize> { idx.iter().map(|&i| enl.end_vertex(space.path(i))).collect() };
    let (ey, ez) = (ends(&base_in_enl), ends(&pi_idx));
    r.outcome(
        "disjointness",
        None,
        ey.iter().find(|v| ez.contains(v)).map(|&v| format!("vertex {:?} carries both", enl.vertices(n_top)[v])),
    );

    // S_m = Q̃_m ∩ (R_N|Y per copy)
    let view = SplitView::load(&cert.split, cap)?;
    r.outcome(
        "split_input",
        None,
        (cert.split.original != cert.enlarged).then(|| "the splitting ran on a different diagram".to_string()),
    );
    let z_order: Vec<usize> = view
        .original_y
        .iter()
        .map(|p| pi.iter().position(|x| x == p).ok_or_else(|| Error::Input("replica path without a point".into())))
        .collect::<Result<_>>()?;
    if view.original_s.len() != n_top {
        r.outcome("s_definition", None, Some(format!("{} S-levels for horizon {n_top}", view.original_s.len())));
    } else {
        for n in 1..=n_top {
            let expected = Partition::from_keys(z_order.iter().map(|&a| {
                let rep = z_order
                    .iter()
                    .position(|&b| q_tilde(n, a, b) && y_tail.same(pts[a].0, pts[b].0))
                    .unwrap();
                rep
            }));
            r.outcome(
                "s_definition",
                Some(n),
                differ(&view.original_s[n - 1], &expected, |i| format!("{:?}", enl.path_ids(&view.original_y[i]))),
            );
        }
    }

    // h is the shift; domain position a < |Y| is y_a, the rest are copies
    let base_pos: HashMap<&[usize], usize> = base_in_enl.iter().enumerate().map(|(j, &i)| (space.path(i), j)).collect();
    let pt_pos: HashMap<&[usize], usize> = pi.iter().enumerate().map(|(a, p)| (p.as_slice(), a)).collect();
    let mut domain: Vec<Option<(usize, Option<usize>)>> = Vec::new();
    let mut dom_idx = Vec::new();
    let mut img_idx = Vec::new();
    let mut failure = None;
    let mut covered = HashMap::new();
    for (t, s) in cert.shift.iter().enumerate() {
        let from = parse(&enl, &s.from, n_top)?;
        let to = parse(&enl, &s.to, n_top)?;
        let (src, expected) = if let Some(&j) = base_pos.get(from.as_slice()) {
            (None, slot.get(&(j, if m >= 1 { Some(1) } else { None })).copied().map(|p| (j, p)))
        } else if let Some(&a) = pt_pos.get(from.as_slice()) {
            let (j, k) = pts[a];
            match k {
                Some(k) => (Some(k), slot.get(&(j, if k < m { Some(k + 1) } else { None })).copied().map(|p| (j, p))),
                None => {
                    failure.get_or_insert(format!("entry {t}: the tail sector is outside the domain"));
                    continue;
                }
            }
        } else {
            failure.get_or_insert(format!("entry {t}: {:?} is neither in Y nor a copy point", s.from));
            continue;
        };
        let Some((j, target)) = expected else {
            failure.get_or_insert(format!("entry {t}: no point for the image"));
            continue;
        };
        if covered.insert((j, src), t).is_some() {
            failure.get_or_insert(format!("entry {t}: domain element listed twice"));
        }
        if pi[target] != to {
            failure.get_or_insert(format!("entry {t}: {:?} is sent to {:?} instead of {}", s.from, s.to, label(target)));
        }
        domain.push(Some((j, src)));
        dom_idx.push(space.index_of(&from).expect("parsed above"));
        img_idx.push(space.index_of(&to));
    }
    if failure.is_none() && covered.len() != base_y.len() * (m + 1) {
        failure = Some(format!("the shift lists {} of {} domain elements", covered.len(), base_y.len() * (m + 1)));
    }
    r.outcome("shift_definition", None, failure);
    let mut seen = HashMap::new();
    let failure = img_idx.iter().enumerate().find_map(|(t, i)| match i {
        None => Some(format!("entry {t}: image is not a path")),
        Some(i) if !pi_idx.contains(i) => Some(format!("entry {t}: image leaves π(Z)")),
        Some(i) => seen.insert(*i, t).map(|u| format!("entries {u} and {t} share an image")),
    });
    let images_ok = failure.is_none();
    r.outcome("shift_injective", None, failure);

    if m == 0 {
        for name in ["transport_rprime", "transport_join", "transport_saturation", "q_pullback"] {
            r.push(name, None, super::Status::Pass);
        }
        r.notes.push("no copies: every transport identity is vacuous".into());
        return Ok(r);
    }
    if !images_ok {
        for name in ["transport_rprime", "transport_join", "transport_saturation", "q_pullback"] {
            r.skip(name, None, "shift images are malformed");
        }
        return Ok(r);
    }
    let img_idx: Vec<usize> = img_idx.into_iter().map(Option::unwrap).collect();
    let within: Vec<usize> =
        (0..domain.len()).filter(|&t| matches!(domain[t], Some((_, None))) || matches!(domain[t], Some((_, Some(k))) if k < m)).collect();
    let on_y: Vec<usize> = (0..domain.len()).filter(|&t| matches!(domain[t], Some((_, None)))).collect();
    let name = |t: usize| format!("{:?}", cert.shift[t].from);
    let pick = |idx: &[usize], ts: &[usize]| -> Vec<usize> { ts.iter().map(|&t| idx[t]).collect() };

    // (i) R' is invariant under h on Y ∪ copies 1..M-1, in working coordinates
    if view.composed_plan.last() != Some(&n_top) {
        r.skip("transport_rprime", None, "exhausted: the working diagram stops before the horizon");
    } else {
        let k = view.depth();
        let rp = view.rprime(k);
        let working = |i: usize| -> Result<usize> {
            let w = view.recoding.forward(space.path(i)).ok_or_else(|| Error::Input("path lost by telescoping".into()))?;
            view.universe.index_of(&w).ok_or_else(|| Error::Input("telescoped path missing".into()))
        };
        let a: Vec<usize> = pick(&dom_idx, &within).into_iter().map(working).collect::<Result<_>>()?;
        let b: Vec<usize> = pick(&img_idx, &within).into_iter().map(working).collect::<Result<_>>()?;
        r.outcome("transport_rprime", None, differ(&rp.restrict(&a), &rp.restrict(&b), |i| name(within[i])));
    }

    // (ii), (iii): Q ∨ R on the domain against R pulled back through h
    let pulled = tails[n_top].restrict(&pick(&img_idx, &within));
    let q_top = &q[n_top - 1];
    let q_on_domain = |uf: &mut UnionFind| {
        for (x, &s) in within.iter().enumerate() {
            for (y, &t) in within.iter().enumerate().skip(x + 1) {
                if let (Some((js, None)), Some((jt, None))) = (domain[s], domain[t]) {
                    if q_top.same(js, jt) {
                        uf.union(x, y);
                    }
                }
            }
        }
    };
    let tail_dom = tails[n_top].restrict(&pick(&dom_idx, &within));
    let mut uf = UnionFind::new(within.len());
    q_on_domain(&mut uf);
    for (x, &s) in within.iter().enumerate() {
        for (y, &t) in within.iter().enumerate().skip(x + 1) {
            let copies = matches!(domain[s], Some((_, Some(_)))) && matches!(domain[t], Some((_, Some(_))));
            if copies && tail_dom.same(x, y) {
                uf.union(x, y);
            }
        }
    }
    r.outcome("transport_join", None, differ(&uf.into_partition(), &pulled, |i| name(within[i])));
    let mut uf = UnionFind::new(within.len());
    q_on_domain(&mut uf);
    let joined = uf.into_partition().join(&tail_dom);
    r.outcome("transport_saturation", None, differ(&joined, &pulled, |i| name(within[i])));

    let pulled_y = tails[n_top].restrict(&pick(&img_idx, &on_y));
    let q_y = Partition::from_keys(on_y.iter().map(|&t| q_top.class_of(domain[t].unwrap().0)));
    r.outcome("q_pullback", None, differ(&pulled_y, &q_y, |i| name(on_y[i])));
    Ok(r)
}
