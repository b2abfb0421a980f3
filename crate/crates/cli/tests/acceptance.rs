//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::process::Command;
use std::time::{Duration, Instant};

use bratteli::absorption::{run_absorption, AbsorptionCertificate, QSpec};
use bratteli::counts::{counting_telescope, is_simple_at_horizon};
use bratteli::fixtures;
use bratteli::lp::Q;
use bratteli::oracle::{
    check_absorption, check_lemma_clauses, check_main1, check_measure, check_minimality_approx, invariant_weightings,
    Report, SplitView,
};
use bratteli::paths::y_paths;
use bratteli::splitting::{run_splitting, SSequence, SplitCertificate, SplitConfig};
use bratteli::telescope::telescope;
use bratteli::{BratteliDiagram, Partition, Subdiagram};

const DEPTH: usize = 8;
const CAP: usize = 100_000;
const SLACK: usize = 2;
const RESOLUTION: usize = 2;
const SEED: u64 = 42;
const MUTATIONS_PER_FIXTURE: usize = 50;

type Fixture = (String, BratteliDiagram, Subdiagram);
type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

fn zoo() -> Vec<Fixture> {
    let mut out: Vec<Fixture> = [
        ("odometer", fixtures::odometer(DEPTH)),
        ("two_vertex", fixtures::two_vertex(DEPTH)),
        ("two_chain", fixtures::two_chain(DEPTH)),
        ("forked", fixtures::forked(DEPTH)),
        ("stationary", fixtures::stationary(DEPTH)),
    ]
    .into_iter()
    .map(|(n, (d, s))| (n.to_string(), d, s))
    .collect();
    for (i, (d, s)) in fixtures::random_zoo(SEED, 20, DEPTH).into_iter().enumerate() {
        out.push((format!("random:{i}"), d, s));
    }
    out
}

struct Outcome {
    ok: bool,
    detail: String,
}

fn outcome(ok: bool, detail: impl Into<String>) -> Outcome {
    Outcome { ok, detail: detail.into() }
}

fn certificate(f: &Fixture, spec: &SSequence) -> Result<SplitCertificate, String> {
    run_splitting(&f.1, &f.2, spec, DEPTH, &SplitConfig { cap: CAP })
        .map(|c| c.certificate())
        .map_err(|e| format!("{}: {e}", f.0))
}

fn failures(r: &Report) -> Vec<String> {
    r.failures().map(|c| format!("{}@{:?}", c.name, c.level)).collect()
}

/// F-paths from `v0` to each vertex of level `n`, by explicit enumeration.
fn f_paths_to(d: &BratteliDiagram, s: &Subdiagram, n: usize) -> Vec<usize> {
    let mut counts = vec![0usize; d.vertices(n).len()];
    let mut stack: Vec<Vec<usize>> = vec![Vec::new()];
    while let Some(p) = stack.pop() {
        if p.len() == n {
            counts[d.end_vertex(&p)] += 1;
            continue;
        }
        for &k in d.outgoing(p.len(), d.end_vertex(&p)) {
            if s.in_f(p.len() + 1, k) {
                let mut q = p.clone();
                q.push(k);
                stack.push(q);
            }
        }
    }
    counts
}

fn criterion_1(zoo: &[Fixture]) -> Outcome {
    let mut checked = 0;
    for (name, d, s) in zoo {
        let Ok(plan) = counting_telescope(d, s) else { continue };
        let (t, ts, _) = match telescope(d, &plan, Some(s)) {
            Ok(x) => x,
            Err(e) => return outcome(false, format!("{name}: {e}")),
        };
        let ts = ts.expect("subdiagram carried");
        for n in 1..=t.depth() {
            let f = f_paths_to(&t, &ts, n);
            for (w, &fw) in f.iter().enumerate() {
                let non_f = t.incoming(n, w).iter().filter(|&&k| !ts.in_f(n, k)).count();
                if fw > non_f {
                    return outcome(false, format!("{name}: level {n} vertex {w}: {fw} F-paths, {non_f} non-F edges"));
                }
            }
        }
        checked += 1;
    }
    outcome(checked > 0, format!("{checked} fixtures re-verified"))
}

fn criterion_2(zoo: &[Fixture]) -> Outcome {
    let mut runs = 0;
    let mut largest = 0;
    for f in zoo {
        for spec in [SSequence::Diagonal, SSequence::Tail] {
            let cert = match certificate(f, &spec) {
                Ok(c) => c,
                Err(e) => return outcome(false, e),
            };
            let view = SplitView::load(&cert, CAP).expect("certificate loads");
            largest = largest.max(view.universe.len());
            let r = check_lemma_clauses(&view, SLACK);
            if !r.pass() {
                return outcome(false, format!("{} {spec:?}: {:?}", f.0, failures(&r)));
            }
            runs += 1;
        }
    }
    outcome(runs > 0, format!("{runs} runs, largest universe {largest}"))
}

fn criterion_3(zoo: &[Fixture]) -> Outcome {
    let mut runs = 0;
    for f in zoo {
        if !is_simple_at_horizon(&f.1, DEPTH).simple {
            return outcome(false, format!("{} is not simple", f.0));
        }
        for spec in [SSequence::Diagonal, SSequence::Tail] {
            let cert = match certificate(f, &spec) {
                Ok(c) => c,
                Err(e) => return outcome(false, e),
            };
            let view = SplitView::load(&cert, CAP).expect("certificate loads");
            let mut r = check_main1(&view);
            let m = check_minimality_approx(&view, RESOLUTION);
            if m.exhausted() || m.find("minimality", None).is_none_or(|c| c.status != bratteli::oracle::Status::Pass) {
                return outcome(false, format!("{} {spec:?}: minimality {:?}", f.0, m.checks));
            }
            r.merge(m);
            r.merge(check_measure(&view, SEED, 20).expect("weightings solve"));
            if !r.pass() {
                return outcome(false, format!("{} {spec:?}: {:?}", f.0, failures(&r)));
            }
            runs += 1;
        }
    }
    outcome(true, format!("{runs} runs, minimality at (d={RESOLUTION}, N={DEPTH})"))
}

fn criterion_4() -> Outcome {
    let (d, s) = fixtures::odometer(DEPTH);
    let ws = invariant_weightings(&d, DEPTH).expect("weightings solve");
    if ws.dimension != 0 || ws.extreme_points.len() != 1 {
        return outcome(false, format!("dimension {}, {} extreme points", ws.dimension, ws.extreme_points.len()));
    }
    let w = ws.lex_vertex();
    let mut expected = Q::from_integer(1.into());
    for n in 0..=DEPTH {
        if n > 0 {
            expected /= Q::from_integer(2.into());
        }
        let y = y_paths(&d, &s, n).expect("depth in range");
        let mass = w.mass(&d, y.paths().iter().map(|p| p.as_slice()));
        if w.q[n][0] != expected || mass != expected {
            return outcome(false, format!("level {n}: q = {}, mu(Y_n) = {mass}", w.q[n][0]));
        }
    }
    outcome(true, format!("q_n = mu(Y_n) = 2^-n for n <= {DEPTH}"))
}

/// Cases for absorption: the finite-Y fixture with full `Q`, then
/// prefix-determined `Q = R|Y` on the others.
fn absorption_cases(zoo: &[Fixture]) -> Vec<(String, &Fixture, QSpec, usize)> {
    let mut out = Vec::new();
    let two_chain = zoo.iter().find(|f| f.0 == "two_chain").expect("two_chain in the zoo");
    out.push(("two_chain Q full M=2".to_string(), two_chain, QSpec::FullFrom(1), 2));
    for name in ["odometer", "two_vertex", "forked", "stationary"] {
        let f = zoo.iter().find(|f| f.0 == name).expect("named fixture");
        out.push((format!("{name} Q tail M=2"), f, QSpec::Tail, 2));
    }
    out
}

fn absorb(f: &Fixture, q: &QSpec, copies: usize) -> Result<AbsorptionCertificate, String> {
    run_absorption(&f.1, &f.2, q, copies, DEPTH, &SplitConfig { cap: CAP })
        .map(|r| r.certificate)
        .map_err(|e| format!("{}: {e}", f.0))
}

fn criterion_5(zoo: &[Fixture]) -> Outcome {
    let mut slowest = Duration::ZERO;
    let cases = absorption_cases(zoo);
    for (label, f, q, m) in &cases {
        let t = Instant::now();
        let cert = match absorb(f, q, *m) {
            Ok(c) => c,
            Err(e) => return outcome(false, e),
        };
        let r = check_absorption(&cert, CAP).expect("certificate loads");
        for name in ["transport_rprime", "transport_join", "transport_saturation", "q_pullback"] {
            if r.find(name, None).is_none_or(|c| c.status != bratteli::oracle::Status::Pass) {
                return outcome(false, format!("{label}: {name} {:?}", r.find(name, None)));
            }
        }
        if !r.pass() {
            return outcome(false, format!("{label}: {:?}", failures(&r)));
        }
        let elapsed = t.elapsed();
        if elapsed > Duration::from_secs(30) {
            return outcome(false, format!("{label} took {elapsed:?}"));
        }
        slowest = slowest.max(elapsed);
    }
    outcome(true, format!("{} cases, slowest {:.1}s", cases.len(), slowest.as_secs_f64()))
}

fn rprimes(view: &SplitView) -> Vec<Partition> {
    (1..=view.depth()).map(|n| view.rprime(n)).collect()
}

fn split_detects(cert: &SplitCertificate) -> bool {
    let Ok(view) = SplitView::load(cert, CAP) else { return true };
    let mut r = check_lemma_clauses(&view, SLACK);
    r.merge(check_main1(&view));
    !r.pass()
}

fn criterion_6(zoo: &[Fixture]) -> Outcome {
    let (mut observable, mut caught, mut filtered) = (0usize, 0usize, 0usize);
    let mut missed = Vec::new();
    for f in zoo {
        let cert = match certificate(f, &SSequence::Tail) {
            Ok(c) => c,
            Err(e) => return outcome(false, e),
        };
        let base = rprimes(&SplitView::load(&cert, CAP).expect("certificate loads"));
        let slots: Vec<(usize, usize)> = cert
            .levels
            .iter()
            .enumerate()
            .flat_map(|(l, level)| (0..level.lambda.entries.len()).map(move |i| (l, i)))
            .collect();
        let step = (slots.len() / MUTATIONS_PER_FIXTURE).max(1);
        for (s, &(l, i)) in slots.iter().step_by(step).take(MUTATIONS_PER_FIXTURE).enumerate() {
            let mut m = cert.clone();
            let entries = &mut m.levels[l].lambda.entries;
            let max = entries.iter().map(|e| e.1).max().unwrap_or(0);
            // alternate between merging into an existing label and a fresh one
            let old = entries[i].1;
            entries[i].1 = if s % 2 == 0 { max + 1 } else { (old + 1) % (max + 1).max(2) };
            if entries[i].1 == old {
                filtered += 1;
                continue;
            }
            let unobservable = SplitView::load(&m, CAP).is_ok_and(|v| rprimes(&v) == base);
            if unobservable {
                filtered += 1;
                continue;
            }
            observable += 1;
            if split_detects(&m) {
                caught += 1;
            } else if missed.len() < 3 {
                missed.push(format!("{} level {} entry {i}", f.0, l + 1));
            }
        }
    }
    // every h-image redirected to another point's image
    let (mut h_total, mut h_caught) = (0usize, 0usize);
    for (label, f, q, m) in absorption_cases(zoo) {
        let cert = match absorb(f, &q, m) {
            Ok(c) => c,
            Err(e) => return outcome(false, e),
        };
        let len = cert.shift.len();
        for t in 0..len {
            let mut mutated = cert.clone();
            mutated.shift[t].to = cert.shift[(t + 1) % len].to.clone();
            if mutated.shift[t].to == cert.shift[t].to {
                continue;
            }
            h_total += 1;
            if check_absorption(&mutated, CAP).map_or(true, |r| !r.pass()) {
                h_caught += 1;
            } else if missed.len() < 6 {
                missed.push(format!("{label} shift entry {t}"));
            }
        }
    }
    let total = observable + h_total;
    let rate = if total == 0 { 0.0 } else { (caught + h_caught) as f64 / total as f64 };
    outcome(
        rate >= 0.98 && total > 0,
        format!(
            "{:.1}% detected: labels {caught}/{observable} ({filtered} unobservable filtered), shifts {h_caught}/{h_total}{}",
            rate * 100.0,
            if missed.is_empty() { String::new() } else { format!("; missed {missed:?}") }
        ),
    )
}

fn run_cli(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_bratteli")).args(args).output().expect("binary runs");
    (out.status.code().unwrap_or(-1), String::from_utf8_lossy(&out.stderr).into_owned())
}

fn criterion_7() -> Outcome {
    let dir = tempfile::tempdir().expect("temporary directory");
    let path = |run: &str| dir.path().join(run).to_string_lossy().into_owned();
    let jobs: [(&str, Vec<&str>, &str); 2] = [
        ("split", vec!["split", "--fixture", "random:7", "--s", "tail", "--seed", "42"], "certificate.json"),
        ("absorb", vec!["absorb", "--fixture", "two_chain", "--q", "full", "--copies", "2"], "absorption.json"),
    ];
    for (label, args, file) in jobs {
        let mut bodies = Vec::new();
        for run in ["a", "b"] {
            let out = path(&format!("{label}-{run}"));
            let mut full = args.clone();
            full.extend(["--out", out.as_str()]);
            let (code, err) = run_cli(&full);
            if code != 0 {
                return outcome(false, format!("{label} exited {code}: {err}"));
            }
            bodies.push(std::fs::read(dir.path().join(format!("{label}-{run}")).join(file)).expect("output written"));
        }
        if bodies[0] != bodies[1] {
            return outcome(false, format!("{label} certificates differ"));
        }
    }
    outcome(true, "split and absorb certificates byte-identical across reruns")
}

fn criterion_8() -> Outcome {
    let (code, err) = run_cli(&["split", "--fixture", "full"]);
    if code != 3 || !err.contains("counting_telescope") {
        return outcome(false, format!("F=E exited {code}: {err}"));
    }
    let (d, s) = fixtures::disconnected(DEPTH);
    if is_simple_at_horizon(&d, DEPTH).simple {
        return outcome(false, "disconnected diagram reported simple");
    }
    let cert = match run_splitting(&d, &s, &SSequence::Diagonal, DEPTH, &SplitConfig { cap: CAP }) {
        Ok(c) => c.certificate(),
        Err(e) => return outcome(false, format!("disconnected: {e}")),
    };
    let m = check_minimality_approx(&SplitView::load(&cert, CAP).expect("certificate loads"), RESOLUTION);
    if !m.exhausted() {
        return outcome(false, format!("disconnected minimality: {:?}", m.checks));
    }
    outcome(true, "F=E exits 3 at counting_telescope; disconnected is not simple and minimality is exhausted")
}

fn main() {
    let start = Instant::now();
    let zoo = zoo();
    let criteria: Vec<Criterion<'_>> = vec![
        ("counting inequality after telescoping", Box::new(|| criterion_1(&zoo))),
        ("eight clauses at depth 8, slack 2", Box::new(|| criterion_2(&zoo))),
        ("main conclusions, minimality and measure bounds", Box::new(|| criterion_3(&zoo))),
        ("odometer weighting", Box::new(criterion_4)),
        ("absorption transports", Box::new(|| criterion_5(&zoo))),
        ("mutation coverage", Box::new(|| criterion_6(&zoo))),
        ("determinism", Box::new(criterion_7)),
        ("negative controls", Box::new(criterion_8)),
    ];
    let mut all = true;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let o = run();
        let limit_ok = i != 0 || t.elapsed() < Duration::from_secs(10);
        let ok = o.ok && limit_ok;
        all &= ok;
        println!(
            "criterion {}: {} {name}: {} ({:.2}s)",
            i + 1,
            if ok { "PASS" } else { "FAIL" },
            o.detail,
            t.elapsed().as_secs_f64()
        );
    }
    let total = start.elapsed();
    let in_time = total < Duration::from_secs(300);
    println!("acceptance suite: {} in {:.1}s", if all && in_time { "PASS" } else { "FAIL" }, total.as_secs_f64());
    if !(all && in_time) {
        std::process::exit(1);
    }
}
