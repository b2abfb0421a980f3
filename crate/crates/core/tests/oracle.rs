use bratteli::fixtures;
use bratteli::oracle::*;
use bratteli::splitting::{run_splitting, SSequence, SplitCertificate, SplitConfig};

const CAP: usize = 100_000;

fn certificate(fixture: (bratteli::BratteliDiagram, bratteli::Subdiagram), spec: SSequence) -> SplitCertificate {
    run_splitting(&fixture.0, &fixture.1, &spec, 8, &SplitConfig::default()).unwrap().certificate()
}

fn all_checks(cert: &SplitCertificate) -> Report {
    let view = SplitView::load(cert, CAP).unwrap();
    let mut r = check_lemma_clauses(&view, 2);
    r.merge(check_main1(&view));
    r
}

/// Replace the label of every path extending `prefix` at level `n` by a fresh value.
fn relabel(cert: &mut SplitCertificate, n: usize, prefix: &[String]) {
    let table = &mut cert.levels[n - 1].lambda;
    let fresh = table.entries.iter().map(|(_, v)| *v).max().unwrap() + 1;
    let mut hit = false;
    for (ids, v) in table.entries.iter_mut() {
        if prefix.starts_with(ids) || ids.starts_with(prefix) {
            *v = fresh;
            hit = true;
        }
    }
    assert!(hit, "no entry for {prefix:?}");
}

#[test]
fn odometer_with_singleton_y_passes_every_clause() {
    let r = all_checks(&certificate(fixtures::odometer(8), SSequence::Diagonal));
    assert!(r.pass(), "{:?}", r.failures().collect::<Vec<_>>());
    assert!(r.find("clause1", Some(1)).is_some_and(|c| c.status == Status::Pass));
}

#[test]
fn frontier_levels_are_skipped_not_passed() {
    let cert = certificate(fixtures::stationary(8), SSequence::Tail);
    let view = SplitView::load(&cert, CAP).unwrap();
    let k = view.depth();
    let r = check_lemma_clauses(&view, 2);
    for n in k - 1..=k {
        let c = r.find("clause6", Some(n)).unwrap();
        assert!(matches!(c.status, Status::Skipped { .. }), "level {n}: {:?}", c.status);
    }
}

#[test]
fn splitting_a_y_class_breaks_the_restriction_clause() {
    // a seeded fixture whose F doubles at level 1, so two Y-paths share a tail class
    let (mut cert, view, n, y) = fixtures::random_zoo(42, 20, 8)
        .into_iter()
        .find_map(|f| {
            let cert = certificate(f, SSequence::Tail);
            let view = SplitView::load(&cert, CAP).unwrap();
            let found = (1..=view.depth()).find_map(|n| {
                let t = view.tail_on_y(n);
                (0..view.y.len()).find(|&a| (0..view.y.len()).any(|b| b != a && t.same(a, b))).map(|a| (n, a))
            });
            found.map(|(n, a)| (cert, view, n, a))
        })
        .expect("some zoo member has a nontrivial tail class on Y");
    let ids = view.diagram.path_ids(&view.y[y]);
    relabel(&mut cert, n, &ids);
    let r = all_checks(&cert);
    let failed: Vec<&str> = r.failures().map(|c| c.name.as_str()).collect();
    assert!(failed.contains(&"clause1"), "{failed:?}");
}

#[test]
fn dropping_a_saturation_pair_is_caught() {
    let mut cert = certificate(fixtures::two_vertex(8), SSequence::Diagonal);
    let view = SplitView::load(&cert, CAP).unwrap();
    let in_y = view.in_y();
    let sat = view.tails[1].saturate(&in_y);
    let x = (0..view.universe.len()).find(|&i| sat[i] && !in_y[i]).expect("R_1[Y] is larger than Y");
    let ids = view.diagram.path_ids(view.universe.path(x));
    relabel(&mut cert, 1, &ids);
    let r = all_checks(&cert);
    let failed: Vec<&str> = r.failures().map(|c| c.name.as_str()).collect();
    assert!(failed.contains(&"main1_saturation"), "{failed:?}");
}

#[test]
fn odometer_minimality_at_depth_one() {
    let view = SplitView::load(&certificate(fixtures::odometer(8), SSequence::Diagonal), CAP).unwrap();
    let r = check_minimality_approx(&view, 1);
    assert_eq!(r.parameters["covering_index"], "1");
    assert_eq!(r.find("minimality", None).unwrap().status, Status::Pass);
}

#[test]
fn zero_resolution_is_vacuous() {
    let view = SplitView::load(&certificate(fixtures::two_chain(8), SSequence::Diagonal), CAP).unwrap();
    let r = check_minimality_approx(&view, 0);
    assert_eq!(r.parameters["covering_index"], "0");
    assert!(r.pass() && !r.exhausted());
}

#[test]
fn disconnected_minimality_is_exhausted() {
    let view = SplitView::load(&certificate(fixtures::disconnected(8), SSequence::Diagonal), CAP).unwrap();
    let r = check_minimality_approx(&view, 2);
    assert!(r.exhausted());
    assert!(matches!(&r.find("minimality", None).unwrap().status, Status::Skipped { reason } if reason.starts_with("exhausted")));
}

#[test]
fn tail_s_keeps_full_tail_classes_on_y() {
    let cert = certificate(fixtures::forked(8), SSequence::Tail);
    let view = SplitView::load(&cert, CAP).unwrap();
    for n in 1..=view.depth() {
        assert_eq!(view.rprime(n).restrict(&view.y_idx), view.tail_on_y(n), "level {n}");
    }
}

#[test]
fn certificate_survives_json() {
    let cert = certificate(fixtures::stationary(8), SSequence::Tail);
    let text = serde_json::to_string(&cert).unwrap();
    let back: SplitCertificate = serde_json::from_str(&text).unwrap();
    assert_eq!(back, cert);
    assert!(all_checks(&back).pass());
}
