use bratteli::absorption::*;
use bratteli::counts::{thinness_telescope_search, ThinnessSearch};
use bratteli::fixtures::{self, Builder};
use bratteli::oracle::{check_absorption, Status};
use bratteli::partition::tail_relation;
use bratteli::paths::y_paths;
use bratteli::splitting::SplitConfig;
use bratteli::{BratteliDiagram, Error, Partition, Subdiagram};
use num_bigint::BigUint;

const N: usize = 6;

fn pieces(
    (d, s): (BratteliDiagram, Subdiagram),
    spec: &QSpec,
    copies: usize,
) -> (BratteliDiagram, Subdiagram, QSequence, CopiesSpace) {
    let y = y_paths(&d, &s, N).unwrap();
    let q = validate_q(&d, &s, &y, spec).unwrap();
    let space = build_copies_space(y.len(), &q, copies).unwrap();
    (d, s, q, space)
}

fn class_sizes(p: &Partition) -> Vec<usize> {
    let mut sizes: Vec<usize> = p.classes().iter().map(|c| c.len()).collect();
    sizes.sort();
    sizes
}

/// One vertex pair carrying F with every crossing, beside a bulk vertex.
fn growing_y() -> (BratteliDiagram, Subdiagram) {
    let mut b = Builder::new();
    b.level(&["u", "w", "x"]).edge("a1", "v0", "u", true).edge("b1", "v0", "w", true).edge("c1", "v0", "x", false);
    for n in 2..=N {
        b.level(&["u", "w", "x"]);
        for (i, (s, r)) in [("u", "u"), ("u", "w"), ("w", "u"), ("w", "w")].iter().enumerate() {
            b.edge(format!("f{n}_{i}"), s, r, true);
        }
        for (i, (s, r)) in [("x", "u"), ("x", "w"), ("x", "x"), ("u", "x"), ("w", "x")].iter().enumerate() {
            b.edge(format!("g{n}_{i}"), s, r, false);
        }
    }
    b.build()
}

#[test]
fn trivial_q_gives_diagonal_copies() {
    let (_, _, _, space) = pieces(fixtures::two_chain(N), &QSpec::Tail, 2);
    assert!(space.q_tilde.iter().all(|p| p.num_classes() == space.len()));
}

#[test]
fn full_q_on_two_points_fills_copies_one_level_at_a_time() {
    let (_, _, _, space) = pieces(fixtures::two_chain(N), &QSpec::FullFrom(1), 2);
    assert_eq!(space.len(), 6);
    assert_eq!(class_sizes(&space.q_tilde[0]), vec![1, 1, 1, 1, 2]);
    assert_eq!(class_sizes(&space.q_tilde[1]), vec![1, 1, 2, 2]);
    assert!(space.q_tilde[0].same(space.point(0, Some(1)), space.point(1, Some(1))));
    assert!(!space.q_tilde[0].same(space.point(0, Some(2)), space.point(1, Some(2))));
    assert!(space.q_tilde[1].same(space.point(0, Some(2)), space.point(1, Some(2))));
}

#[test]
fn tail_q_copies_match_tail_classes_per_copy() {
    let (d, s, _, space) = pieces(fixtures::stationary(N), &QSpec::Tail, 3);
    let y = y_paths(&d, &s, N).unwrap();
    for n in 1..=N {
        let t = tail_relation(&d, &y, n).unwrap().partition;
        for a in 0..space.len() {
            for b in 0..space.len() {
                let ((ja, ka), (jb, kb)) = (space.decode(a), space.decode(b));
                let expected = a == b || (ka.is_some() && ka == kb && ka.unwrap() <= n && t.same(ja, jb));
                assert_eq!(space.q_tilde[n - 1].same(a, b), expected, "n={n} a={a} b={b}");
            }
        }
    }
}

#[test]
fn copies_beyond_depth_are_rejected() {
    let (d, s) = fixtures::odometer(N);
    let y = y_paths(&d, &s, N).unwrap();
    let q = validate_q(&d, &s, &y, &QSpec::Tail).unwrap();
    assert!(matches!(build_copies_space(y.len(), &q, N + 1), Err(Error::Input(_))));
}

#[test]
fn z_diagram_of_a_single_chain() {
    let (_, _, _, space) = pieces(fixtures::odometer(N), &QSpec::Tail, 2);
    let z = build_z_diagram(&space).unwrap();
    assert_eq!(z.diagram.vertices(3).len(), 3);
    let (_, _, _, space) = pieces(fixtures::odometer(N), &QSpec::Tail, 0);
    let z = build_z_diagram(&space).unwrap();
    assert!((1..=N).all(|n| z.diagram.vertices(n).len() == 1));
}

#[test]
fn z_diagram_tails_reproduce_q_tilde() {
    let (_, _, _, space) = pieces(fixtures::two_chain(N), &QSpec::FullFrom(1), 1);
    let z = build_z_diagram(&space).unwrap();
    let paths = y_paths(&z.diagram, &z.sub, N).unwrap();
    let order: Vec<usize> = z.point_paths.iter().map(|p| paths.index_of(p).unwrap()).collect();
    for n in 1..=N {
        let t = tail_relation(&z.diagram, &paths, n).unwrap().partition.restrict(&order);
        assert_eq!(t, space.q_tilde[n - 1], "level {n}");
    }
    // both chains share the copy-1 class from level 1 on
    assert!(space.q_tilde[0].same(space.point(0, Some(1)), space.point(1, Some(1))));
}

#[test]
fn embedded_replica_is_disjoint_and_thin() {
    let (d, s, _, space) = pieces(fixtures::odometer(N), &QSpec::Tail, 1);
    let z = build_z_diagram(&space).unwrap();
    let e = embed_replica(&d, &s, &z).unwrap();
    let base_y = y_paths(&e.enlarged, &e.base_sub, N).unwrap();
    let z_y = y_paths(&e.enlarged, &e.z_sub, N).unwrap();
    let ends = |ps: &[Vec<usize>]| -> Vec<usize> { ps.iter().map(|p| e.enlarged.end_vertex(p)).collect() };
    let (a, b) = (ends(base_y.paths()), ends(z_y.paths()));
    assert!(a.iter().all(|v| !b.contains(v)));
    for sub in [&e.base_sub, &e.z_sub] {
        let found = thinness_telescope_search(&e.enlarged, sub, &BigUint::from(2u32), 0, &[0]).unwrap();
        assert!(matches!(found, ThinnessSearch::Found(_)));
    }
    let report = bratteli::diagram::validate(&e.enlarged, Some(&e.z_sub));
    assert!(report.pass(), "{:?}", report.violations);
}

#[test]
fn s_for_three_kinds_of_q() {
    let (d, s, _, space) = pieces(fixtures::two_chain(N), &QSpec::Tail, 2);
    let y = y_paths(&d, &s, N).unwrap();
    let tail = tail_relation(&d, &y, N).unwrap().partition;
    assert!(build_s(&space, &tail).iter().all(|p| p.num_classes() == space.len()));
    let (_, _, _, space) = pieces(fixtures::two_chain(N), &QSpec::FullFrom(1), 2);
    assert!(build_s(&space, &tail).iter().all(|p| p.num_classes() == space.len()));

    let (d, s, _, space) = pieces(fixtures::stationary(N), &QSpec::Tail, 2);
    let y = y_paths(&d, &s, N).unwrap();
    let tail = tail_relation(&d, &y, N).unwrap().partition;
    assert_eq!(build_s(&space, &tail), space.q_tilde);
}

#[test]
fn shift_follows_the_copies() {
    let run = run_absorption(
        &fixtures::two_chain(N).0,
        &fixtures::two_chain(N).1,
        &QSpec::FullFrom(1),
        2,
        N,
        &SplitConfig::default(),
    )
    .unwrap();
    let (space, e, h) = (&run.copies, &run.embedding, &run.shift);
    for j in 0..space.y_len {
        assert_eq!(h.image[j], e.points[space.point(j, Some(1))]);
        let a = h.domain.iter().position(|p| *p == h.image[j]).unwrap();
        assert_eq!(h.image[a], e.points[space.point(j, Some(2))]);
    }
    let mut images = h.image.clone();
    images.sort();
    images.dedup();
    assert_eq!(images.len(), h.image.len());
}

fn transports_pass(cert: &AbsorptionCertificate) {
    for name in ["transport_rprime", "transport_join", "transport_saturation", "q_pullback"] {
        let c = cert.checks.find(name, None).unwrap_or_else(|| panic!("{name} missing"));
        assert_eq!(c.status, Status::Pass, "{name}");
    }
}

#[test]
fn finite_y_with_full_q_absorbs() {
    let (d, s) = fixtures::two_chain(N);
    let run = run_absorption(&d, &s, &QSpec::FullFrom(1), 2, N, &SplitConfig::default()).unwrap();
    transports_pass(&run.certificate);
    assert!(run.certificate.q_support.iter().all(|s| *s == QSupport::FiniteY));
    let again = check_absorption(&run.certificate, 100_000).unwrap();
    assert!(again.pass());
}

#[test]
fn tail_q_and_zero_copies_absorb() {
    for (fixture, copies) in [(fixtures::stationary(N), 2), (fixtures::two_vertex(N), 1), (fixtures::forked(N), 0)] {
        let run = run_absorption(&fixture.0, &fixture.1, &QSpec::Tail, copies, N, &SplitConfig::default()).unwrap();
        transports_pass(&run.certificate);
    }
}

#[test]
fn unrepresentable_q_is_unsupported() {
    let (d, s) = growing_y();
    assert!(bratteli::diagram::validate(&d, Some(&s)).pass());
    let err = run_absorption(&d, &s, &QSpec::FullFrom(1), 2, N, &SplitConfig::default()).unwrap_err();
    assert!(matches!(err, Error::Unsupported(_)), "{err}");
}

#[test]
fn q_must_contain_the_tail_relation() {
    let (d, s) = growing_y();
    let y = y_paths(&d, &s, N).unwrap();
    let diag = vec![Partition::diagonal(y.len())];
    assert!(matches!(validate_q(&d, &s, &y, &QSpec::Explicit(diag)), Err(Error::Input(_))));
}

#[test]
fn a_wrong_shift_image_is_caught() {
    let (d, s) = fixtures::two_chain(N);
    let run = run_absorption(&d, &s, &QSpec::FullFrom(1), 2, N, &SplitConfig::default()).unwrap();
    let mut cert = run.certificate.clone();
    let other = cert.shift[1].to.clone();
    cert.shift[0].to = other;
    assert!(!check_absorption(&cert, 100_000).unwrap().pass());
}
