use bratteli::counts::TelescopePlan;
use bratteli::fixtures;
use bratteli::partition::{tail_relation, Partition};
use bratteli::paths::{enumerate_paths, y_paths, CylinderFunction};
use bratteli::splitting::{build_rho, build_rprime, extend_mu, in_y_k, run_splitting, SSequence, SplitConfig};
use bratteli::telescope::telescope;
use bratteli::{Error, Subdiagram};

fn zoo() -> Vec<(&'static str, bratteli::BratteliDiagram, Subdiagram)> {
    let mut out = Vec::new();
    for (name, (d, s)) in [
        ("odometer", fixtures::odometer(8)),
        ("two_vertex", fixtures::two_vertex(8)),
        ("two_chain", fixtures::two_chain(8)),
        ("forked", fixtures::forked(8)),
        ("stationary", fixtures::stationary(8)),
    ] {
        out.push((name, d, s));
    }
    out
}

#[test]
fn labels_restricted_to_y_reproduce_s() {
    for (name, d, s) in zoo() {
        for spec in [SSequence::Diagonal, SSequence::Tail] {
            let ctx = run_splitting(&d, &s, &spec, 8, &SplitConfig::default()).unwrap_or_else(|e| panic!("{name}: {e}"));
            let k = ctx.depth();
            for n in 1..=k {
                let lvl = ctx.level(n);
                let r = tail_relation(&ctx.diagram, &ctx.y_space, n).unwrap().partition;
                for a in 0..ctx.y_space.len() {
                    for b in 0..ctx.y_space.len() {
                        let ia = ctx.universe.index_of(ctx.y_space.path(a)).unwrap();
                        let ib = ctx.universe.index_of(ctx.y_space.path(b)).unwrap();
                        let rel = r.same(a, b) && lvl.lambda_values[ia] == lvl.lambda_values[ib];
                        assert_eq!(rel, ctx.s[n].same(a, b), "{name} {spec:?} n={n}");
                    }
                }
            }
        }
    }
}

#[test]
fn full_subdiagram_is_not_thin() {
    let (d, _) = fixtures::odometer(6);
    let full = Subdiagram::full(&d);
    let err = run_splitting(&d, &full, &SSequence::Diagonal, 6, &SplitConfig::default()).unwrap_err();
    assert!(matches!(err, Error::Exhausted { ref stage, .. } if stage == "counting_telescope"), "{err}");
}

#[test]
fn rho_on_the_odometer_telescoped_in_pairs() {
    let (d, s) = fixtures::odometer(4);
    let plan = TelescopePlan::new(vec![0, 2, 4]).unwrap();
    let (t, ts, _) = telescope(&d, &plan, Some(&s)).unwrap();
    let ts = ts.unwrap();
    let rho = build_rho(&t, &ts).unwrap();
    let map = rho.get(1, 0).expect("one vertex at level 1");
    assert_eq!(map.domain.len(), 3);
    assert_eq!(map.codomain.len(), 1);
    assert!((0..3).all(|i| map.image_index(i) == 0));
}

#[test]
fn rho_wraps_lexicographically() {
    // two F-paths into a vertex reached by three non-F edges
    let mut b = fixtures::Builder::new();
    b.level(&["u", "x"]).edge("a", "v0", "u", true).edge("b", "v0", "u", true).edge("c", "v0", "x", false);
    b.edge("d1", "v0", "u", false).edge("d2", "v0", "u", false);
    b.level(&["u"]).edge("f", "u", "u", true).edge("g1", "x", "u", false).edge("g2", "x", "u", false).edge("g3", "x", "u", false);
    let (d, s) = b.build();
    let map = build_rho(&d, &s).unwrap().get(2, 0).unwrap().clone();
    assert_eq!(map.domain.len(), 3);
    assert_eq!(map.codomain.len(), 2);
    let images: Vec<usize> = (0..3).map(|i| map.image_index(i)).collect();
    assert_eq!(images, vec![0, 1, 0]);
    for (i, &e) in map.domain.iter().enumerate() {
        assert_eq!(map.apply(e).unwrap(), map.codomain[images[i]].as_slice());
    }
}

#[test]
fn extension_of_mu_is_identity_on_y_and_keeps_constants() {
    let (d, s) = fixtures::stationary(5);
    let universe = enumerate_paths(&d, 5, 100_000).unwrap();
    let y = y_paths(&d, &s, 5).unwrap();
    let mu: Vec<u32> = (0..y.len() as u32).collect();
    let all = vec![true; universe.len()];
    let ext = extend_mu(&d, &s, &y, &mu, &universe, &all).unwrap();
    for (j, p) in y.paths().iter().enumerate() {
        assert_eq!(ext[universe.index_of(p).unwrap()], Some(mu[j]));
    }
    let constant = extend_mu(&d, &s, &y, &vec![7; y.len()], &universe, &all).unwrap();
    assert!(constant.iter().all(|v| *v == Some(7)));
    let y2: Vec<bool> = universe.paths().iter().map(|p| in_y_k(&s, p, 2)).collect();
    let partial = extend_mu(&d, &s, &y, &mu, &universe, &y2).unwrap();
    let values: Vec<u32> = partial.iter().map(|v| v.unwrap_or(u32::MAX)).collect();
    // the extension on Y_2 is determined by finite prefixes
    let f = CylinderFunction::minimal(&universe, &values);
    assert!(f.depth <= 5);
}

#[test]
fn rprime_extremes() {
    let (d, _) = fixtures::two_vertex(4);
    let universe = enumerate_paths(&d, 4, 100_000).unwrap();
    let r2 = tail_relation(&d, &universe, 2).unwrap().partition;
    assert_eq!(build_rprime(&r2, &vec![0; universe.len()], None).unwrap(), r2);
    let injective: Vec<u32> = (0..universe.len() as u32).collect();
    assert_eq!(build_rprime(&r2, &injective, None).unwrap(), Partition::diagonal(universe.len()));
    // brute-force filter of R_2 pairs on equal labels
    let lambda: Vec<u32> = universe.paths().iter().map(|p| p[1] as u32).collect();
    let rp = build_rprime(&r2, &lambda, None).unwrap();
    for a in 0..universe.len() {
        for b in 0..universe.len() {
            assert_eq!(rp.same(a, b), r2.same(a, b) && lambda[a] == lambda[b]);
        }
    }
}

#[test]
fn singleton_y_needs_one_extra_level() {
    let (d, s) = fixtures::odometer(8);
    let ctx = run_splitting(&d, &s, &SSequence::Diagonal, 8, &SplitConfig::default()).unwrap();
    let k = ctx.depth();
    for n in 1..=k {
        assert_eq!(ctx.level(n).u_depth, (n + 1).min(k), "level {n}");
    }
    assert_eq!(ctx.level(1).labels, 1);
}

#[test]
fn diagonal_s_separates_the_two_chains() {
    let (d, s) = fixtures::two_chain(8);
    let ctx = run_splitting(&d, &s, &SSequence::Diagonal, 8, &SplitConfig::default()).unwrap();
    let rp = &ctx.level(ctx.depth()).rprime;
    let ys: Vec<usize> = ctx.y_space.paths().iter().map(|p| ctx.universe.index_of(p).unwrap()).collect();
    assert_eq!(ys.len(), 2);
    assert!(!rp.same(ys[0], ys[1]));
}

#[test]
fn reruns_give_identical_certificates() {
    let (d, s) = fixtures::random_zoo(42, 3, 8).pop().unwrap();
    let a = run_splitting(&d, &s, &SSequence::Tail, 8, &SplitConfig::default()).unwrap().certificate();
    let b = run_splitting(&d, &s, &SSequence::Tail, 8, &SplitConfig::default()).unwrap().certificate();
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
}
