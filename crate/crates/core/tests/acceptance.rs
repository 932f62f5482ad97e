//! Acceptance criteria 1-10. Each criterion prints one PASS/FAIL line; the
//! test fails if any of them fails. Tolerances are pinned below.

mod common;

use std::io::Write;
use std::time::{Duration, Instant};

use common::{field, log_one_plus, q, rank_over_q, Q};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rigid_hk::linalg::{PrecMatrix, SparseMatrix};
use rigid_hk::log::LogBranch;
use rigid_hk::padic::KElement;
use rigid_hk::phin::PhiNModule;
use rigid_hk::pipeline::expansion::parse_expansion;
use rigid_hk::pipeline::job::{compute_tate, parse_branch, GroupData};
use rigid_hk::pipeline::report::MatrixReport;
use rigid_hk::pipeline::suites::branch_pool;
use rigid_hk::pipeline::{run_suite, run_tate_job, JobSpec, Report, SuiteName};
use rigid_hk::Exec;

/// Working precision of every job, in `p`-adic digits.
const PREC: i64 = 20;
/// Digits to which `K`-valued entries must agree.
const K_DIGITS: i64 = PREC - 5;
/// Digits to which logarithm identities must hold.
const LOG_DIGITS: i64 = PREC - 3;
/// Precision of the independent `log(1+p)` oracle.
const ORACLE_PREC: i64 = 30;
const LIMIT_UNRAMIFIED: Duration = Duration::from_secs(10);
const LIMIT_RAMIFIED: Duration = Duration::from_secs(20);
const MIN_ALGEBRA_SAMPLES: usize = 100;
const LOG_PAIRS: usize = 50;
const LINALG_MATRICES: usize = 50;
const RAMIFIED: &str = "s^2-5";

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome { passed, detail: detail.into() }
}

struct Run {
    spec: JobSpec,
    report: Report,
    elapsed: Duration,
}

fn run(p: u64, r: u32, eisenstein: Option<&str>, q: &str, stability: bool) -> Run {
    let spec = JobSpec {
        p,
        r,
        precision: PREC,
        eisenstein: eisenstein.map(Into::into),
        q: q.into(),
        stability,
        ..Default::default()
    };
    let t = Instant::now();
    let report = run_tate_job(&spec).unwrap_or_else(|e| panic!("p={p} r={r} {eisenstein:?} q={q}: {e}"));
    Run { spec, report, elapsed: t.elapsed() }
}

fn exact(m: &MatrixReport, want: &[&[i64]]) -> bool {
    let want: Vec<Vec<String>> = want.iter().map(|r| r.iter().map(|x| x.to_string()).collect()).collect();
    m.entries == want && m.precision.iter().flatten().all(|t| t == "exact")
}

fn k_entries(run: &Run, name: &str) -> Vec<Vec<KElement>> {
    let k = run.spec.field().unwrap();
    let m = run.report.matrix(name).unwrap();
    m.entries.iter().map(|r| r.iter().map(|s| parse_expansion(s, &k).unwrap()).collect()).collect()
}

fn k_matches(run: &Run, name: &str, want: &[Vec<KElement>]) -> bool {
    let got = k_entries(run, name);
    got.len() == want.len()
        && got.iter().zip(want).all(|(a, b)| a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.agrees_to(y, K_DIGITS)))
}

fn identity(run: &Run) -> Vec<Vec<KElement>> {
    let k = run.spec.field().unwrap();
    let (one, zero) = (KElement::one(&k), KElement::zero(&k));
    vec![vec![one.clone(), zero.clone()], vec![zero, one]]
}

fn cocycles_certified(run: &Run) -> bool {
    ["e1", "e2"].iter().all(|name| {
        let hits: Vec<_> = run.report.classes.iter().filter(|c| c.name == *name).collect();
        hits.len() == 2 && hits.iter().all(|c| c.cocycle)
    })
}

/// `phi = diag(1, p)`, `N(e_2) = r e_1`, `Psi_{pi,pi} = 1`, cocycles.
fn reproduces(run: &Run) -> bool {
    let (p, r) = (run.spec.p as i64, run.spec.r as i64);
    cocycles_certified(run)
        && exact(run.report.matrix("phi_H1").unwrap(), &[&[1, 0], &[0, p]])
        && exact(run.report.matrix("N_H1").unwrap(), &[&[0, r], &[0, 0]])
        && k_matches(run, "Psi_H1", &identity(run))
}

fn criterion_1(runs: &[Run]) -> Outcome {
    let slowest = runs.iter().map(|r| r.elapsed).max().unwrap();
    let bad: Vec<String> = runs.iter().filter(|r| !reproduces(r)).map(|r| format!("p={} r={}", r.spec.p, r.spec.r)).collect();
    outcome(
        bad.is_empty() && slowest < LIMIT_UNRAMIFIED,
        format!(
            "{} configurations, mismatches {bad:?}, slowest {:.2} s (limit {} s)",
            runs.len(),
            slowest.as_secs_f64(),
            LIMIT_UNRAMIFIED.as_secs()
        ),
    )
}

fn criterion_2(run: &Run) -> Outcome {
    let ok = reproduces(run) && exact(run.report.matrix("Nnorm_H1").unwrap(), &[&[0, 1], &[0, 0]]);
    outcome(
        ok && run.elapsed < LIMIT_RAMIFIED,
        format!("p=5 f={RAMIFIED} r=2: matrices {ok}, 𝐍(e2) = e1, {:.2} s (limit {} s)", run.elapsed.as_secs_f64(), LIMIT_RAMIFIED.as_secs()),
    )
}

/// `Psi_q(e_2) = e_2 - r log_q(pi) e_1` with `q = p(1+p)`. Over `Q_p` this is
/// `r log(1+p)`; over `Q_5(sqrt 5)`, `q = pi^2 (1+p)` gives `r log(1+p) / 2`.
fn criterion_3(runs: &[Run]) -> Outcome {
    let mut bad = Vec::new();
    for run in runs {
        let (p, r, e) = (run.spec.p, run.spec.r as i64, run.report.meta.e as i64);
        let k = run.spec.field().unwrap();
        let l = log_one_plus(&q(p as i64), p, ORACLE_PREC);
        let entry = KElement::from_rational(&k, &(q(r) * l / q(e)));
        let mut want = identity(run);
        want[0][1] = entry;
        if !k_matches(run, "Psi_H1", &want) {
            bad.push(format!("p={p} r={r} e={e}"));
        }
    }
    outcome(bad.is_empty(), format!("{} configurations against the series oracle at {ORACLE_PREC} digits, mismatches {bad:?}", runs.len()))
}

fn criterion_4(runs: &[&Run]) -> Outcome {
    let mut bad = Vec::new();
    for run in runs {
        let p = run.spec.p.to_string();
        let ids = &run.report.identifications;
        let ok = ids.len() == 2
            && ids.iter().all(|i| i.matches && i.rank == 1 && i.monodromy_zero)
            && (ids[0].group.as_str(), ids[0].target.as_str(), ids[0].phi_eigenvalue.as_str(), &ids[0].hodge_jumps[..])
                == ("H^0", "K(0)", "1", &[0][..])
            && (ids[1].group.as_str(), ids[1].target.as_str(), ids[1].phi_eigenvalue.as_str(), &ids[1].hodge_jumps[..])
                == ("H^2", "K(-1)", p.as_str(), &[1][..]);
        if !ok {
            bad.push(format!("p={} r={}", run.spec.p, run.spec.r));
        }
    }
    outcome(bad.is_empty(), format!("H^0 = K(0), H^2 = K(-1) in {} configurations, mismatches {bad:?}", runs.len()))
}

/// Smallest `p`-adic digit count to which every entry of `a - b` vanishes.
fn residual_digits(a: &PrecMatrix<KElement>, b: &PrecMatrix<KElement>) -> i64 {
    let d = a.sub(b).unwrap();
    let mut worst = i64::MAX;
    for i in 0..d.rows() {
        for j in 0..d.cols() {
            let x = d.get(i, j);
            let e = x.field().e() as i64;
            let v = match x.ord_pi() {
                rigid_hk::padic::Valuation::Finite(v) | rigid_hk::padic::Valuation::AtLeast(v) => v,
            };
            worst = worst.min(v.div_euclid(e));
        }
    }
    worst
}

fn criterion_5() -> Outcome {
    let mut worst = i64::MAX;
    let mut pairs = 0;
    for (p, eis) in [(3u64, None), (5, None), (5, Some(RAMIFIED))] {
        let spec = JobSpec { p, r: 2, precision: PREC, eisenstein: eis.map(Into::into), ..Default::default() };
        let k = spec.field().unwrap();
        let data: Vec<(KElement, GroupData)> = branch_pool(&k)
            .into_iter()
            .map(|(_, qv)| {
                let b = LogBranch::new(&qv).unwrap();
                let t = compute_tate(&k, 2, spec.window(), &b, Exec::Parallel, spec.zero_prec()).unwrap();
                (qv, t.groups[1].clone())
            })
            .collect();
        let g = &data[0].1;
        let module = PhiNModule::new(g.phi.clone(), g.n.clone(), p, k.e() as u32).unwrap();
        for (qa, ga) in &data {
            let branch = LogBranch::new(qa).unwrap();
            for (qb, gb) in &data {
                // Psi_q = Psi_q' exp(-(log_q q' / ord_p q') 𝐍)
                let c = rigid_hk::phin::transition_constant(&branch, qb).unwrap();
                let predicted = gb.psi.mul(&module.exp_cn(&c.neg()).unwrap()).unwrap();
                worst = worst.min(residual_digits(&ga.psi, &predicted));
                pairs += 1;
            }
        }
    }
    outcome(worst >= K_DIGITS, format!("{pairs} ordered pairs over 3 fields, min residual {worst} digits (need {K_DIGITS})"))
}

fn suite(name: SuiteName, p: u64, eis: Option<&str>) -> rigid_hk::pipeline::report::SuiteRecord {
    let spec = JobSpec { p, r: 2, precision: PREC, eisenstein: eis.map(Into::into), ..Default::default() };
    run_suite(name, &spec).unwrap()
}

fn criterion_6() -> Outcome {
    let identities = ["d∘d = 0", "Nφ = pφN", "N commutes with d", "φ commutes with d", "divided-power product associative"];
    let mut notes = Vec::new();
    let mut ok = true;
    for (p, eis) in [(3u64, None), (5, Some(RAMIFIED))] {
        let rec = suite(SuiteName::KimHainAlgebra, p, eis);
        ok &= rec.passed;
        for id in identities {
            match rec.checks.iter().find(|c| c.name == id) {
                Some(c) => ok &= c.passed && c.samples >= MIN_ALGEBRA_SAMPLES && c.certificate == "exact",
                None => {
                    ok = false;
                    notes.push(format!("missing `{id}`"));
                }
            }
        }
    }
    outcome(ok, format!("{} identities x {MIN_ALGEBRA_SAMPLES}+ samples at p = 3, 5, exact {notes:?}", identities.len()))
}

fn criterion_7() -> Outcome {
    // Independent check on top of the suite: log_q(xy) = log_q x + log_q y
    // on seeded pairs for every branch of the pool.
    let mut rng = ChaCha8Rng::seed_from_u64(0x10c);
    let mut ok = true;
    for (p, eis) in [(3u64, None), (5, None), (5, Some(RAMIFIED))] {
        ok &= suite(SuiteName::BranchCalculus, p, eis).passed;
        let k = field(p, PREC, eis);
        for (_, qv) in branch_pool(&k) {
            let b = LogBranch::new(&qv).unwrap();
            ok &= b.eval(&qv).unwrap().is_zero_to(LOG_DIGITS);
            for _ in 0..LOG_PAIRS {
                let mut gen = || {
                    let unit = rng.gen_range(1..p as i64) + p as i64 * rng.gen_range(0..1000);
                    KElement::from_int(&k, unit).mul(&KElement::pi_pow(&k, rng.gen_range(-3..4)))
                };
                let (x, y) = (gen(), gen());
                ok &= b.eval(&x.mul(&y)).unwrap().agrees_to(&b.eval(&x).unwrap().add(&b.eval(&y).unwrap()), LOG_DIGITS);
            }
            for a in 1..p {
                let w = KElement::from_scalar(&k, rigid_hk::padic::teichmuller(a, k.context()).unwrap());
                ok &= b.eval(&w).unwrap().is_zero_to(LOG_DIGITS);
            }
        }
    }
    outcome(ok, format!("log_q(q) = 0, {LOG_PAIRS} pairs per branch, log(μ) = 0 to {LOG_DIGITS} digits"))
}

fn criterion_8() -> Outcome {
    let module = |p: u64, r: u32, eis: Option<&str>| {
        let spec = JobSpec { p, r, precision: PREC, eisenstein: eis.map(Into::into), ..Default::default() };
        let k = spec.field().unwrap();
        let b = LogBranch::new(&parse_branch(&spec.q, &k).unwrap()).unwrap();
        let g = compute_tate(&k, r, spec.window(), &b, Exec::Parallel, spec.zero_prec()).unwrap().groups[1].clone();
        PhiNModule::new(g.phi, g.n, p, k.e() as u32).unwrap()
    };
    let base = module(5, 1, None);
    let changed = base.base_change(2).unwrap();
    let over_qp = module(5, 2, None);
    let over_k = module(5, 2, Some(RAMIFIED));
    let ok = changed.phi() == over_qp.phi()
        && changed.n_op() == over_qp.n_op()
        && changed.phi() == over_k.phi()
        && changed.n_op() == over_k.n_op()
        && changed.normalized_n() == base.normalized_n()
        && changed.normalized_n() == over_k.normalized_n()
        && suite(SuiteName::BaseChange, 5, None).passed;
    outcome(ok, "r = 1 base-changed by 2 vs r = 2 over Q_5 and over Q_5(π), π^2 = 5; exact")
}

fn criterion_9(runs: &[&Run]) -> Outcome {
    let stable = runs.iter().filter(|r| r.report.windows.matrices_stable == Some(true)).count();
    let suites_ok = [(3u64, None), (5, Some(RAMIFIED))].iter().all(|(p, eis)| suite(SuiteName::TruncationStability, *p, *eis).passed);
    let w = &runs[0].report.windows;
    outcome(
        stable == runs.len() && suites_ok,
        format!(
            "{stable}/{} jobs unchanged from ({},{},{}) to ({},{},{}), to {K_DIGITS} digits over K",
            runs.len(),
            w.base.s,
            w.base.t,
            w.base.u,
            w.enlarged.s,
            w.enlarged.t,
            w.enlarged.u
        ),
    )
}

fn criterion_10() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x11a);
    let k = field(5, 30, None);
    let mut agree = 0;
    for _ in 0..LINALG_MATRICES {
        let (r, c) = (rng.gen_range(1..7), rng.gen_range(1..7));
        let rows: Vec<Vec<i64>> =
            (0..r).map(|_| (0..c).map(|_| if rng.gen_bool(0.35) { 0 } else { rng.gen_range(-9..10) }).collect()).collect();
        let want = rank_over_q(&rows);
        let mq = PrecMatrix::from_rows(&(), rows.iter().map(|x| x.iter().map(|&v| q(v)).collect()).collect()).unwrap();
        let mk = PrecMatrix::from_rows(&k, rows.iter().map(|x| x.iter().map(|&v| KElement::from_int(&k, v)).collect()).collect())
            .unwrap();
        let cols: Vec<Vec<(usize, Q)>> =
            (0..c).map(|j| (0..r).filter(|&i| rows[i][j] != 0).map(|i| (i, q(rows[i][j]))).collect()).collect();
        let ms = SparseMatrix::from_columns(&(), r, cols);
        let kq = mq.kernel_basis(0).unwrap();
        let kk = mk.kernel_basis(K_DIGITS).unwrap();
        let ok = mq.rank(0).unwrap() == want
            && mk.rank(K_DIGITS).unwrap() == want
            && ms.rank(Exec::Parallel, 0).unwrap() == want
            && kq.len() == c - want
            && kk.len() == c - want
            && kq.iter().all(|v| mq.apply(v).unwrap().iter().all(|x| *x == q(0)))
            && kk.iter().all(|v| mk.apply(v).unwrap().iter().all(|x| x.is_zero_to(K_DIGITS)));
        agree += ok as usize;
    }
    outcome(agree == LINALG_MATRICES, format!("{agree}/{LINALG_MATRICES} matrices match exact rational elimination (need 100%)"))
}

#[test]
fn acceptance() {
    let unramified: Vec<Run> =
        [3u64, 5].iter().flat_map(|&p| (1..=3).map(move |r| run(p, r, None, "pi", true))).collect();
    let ramified = run(5, 2, Some(RAMIFIED), "pi", true);
    let mut branch_runs: Vec<Run> =
        [3u64, 5].iter().flat_map(|&p| (1..=3).map(move |r| run(p, r, None, "p*(1+p)", false))).collect();
    branch_runs.push(run(5, 2, Some(RAMIFIED), "p*(1+p)", false));
    let all: Vec<&Run> = unramified.iter().chain(std::iter::once(&ramified)).collect();

    let results = [
        ("Tate curve matrices, e = 1", criterion_1(&unramified)),
        ("ramified reproduction", criterion_2(&ramified)),
        ("branch dependence of Ψ", criterion_3(&branch_runs)),
        ("H^0 and H^2 identifications", criterion_4(&all)),
        ("choice-of-π transition identities", criterion_5()),
        ("Kim-Hain algebra identities", criterion_6()),
        ("logarithm identities", criterion_7()),
        ("base change", criterion_8()),
        ("truncation stability", criterion_9(&all)),
        ("linear algebra oracle", criterion_10()),
    ];
    let mut failed = Vec::new();
    for (i, (name, o)) in results.iter().enumerate() {
        // Written to the raw handle so the lines survive libtest's capture.
        let line = format!("criterion {:>2} {}  {name}: {}\n", i + 1, if o.passed { "PASS" } else { "FAIL" }, o.detail);
        std::io::stderr().write_all(line.as_bytes()).unwrap();
        if !o.passed {
            failed.push(i + 1);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
