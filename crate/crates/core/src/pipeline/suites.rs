//! Verification suites. Random samples come from a ChaCha stream seeded by
//! the job, so a suite record is reproducible from the spec alone.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::job::{compute_tate, parse_branch, same_entries, JobSpec, TateData};
use super::report::{CheckRecord, SuiteRecord};
use crate::cech::{CechComplex, DrEnv, HkEnv};
use crate::chart::{ChartElement, ChartId, Form, Gluing, MonomialIndex, Window};
use crate::error::{HkError, Result};
use crate::kim_hain::{forms_equal, KimHainForm};
use crate::linalg::PrecMatrix;
use crate::log::{log_unit, LogBranch};
use crate::padic::parse::parse_field;
use crate::padic::{teichmuller, FieldDescriptor, KElement, PadicContext, Valuation};
use crate::phin::{transition_constant, PhiNModule};

type Q = BigRational;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SuiteName {
    KimHainAlgebra,
    BranchCalculus,
    ChoiceOfPi,
    BaseChange,
    TruncationStability,
}

impl SuiteName {
    pub const ALL: [SuiteName; 5] = [
        SuiteName::KimHainAlgebra,
        SuiteName::BranchCalculus,
        SuiteName::ChoiceOfPi,
        SuiteName::BaseChange,
        SuiteName::TruncationStability,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SuiteName::KimHainAlgebra => "kim_hain_algebra",
            SuiteName::BranchCalculus => "branch_calculus",
            SuiteName::ChoiceOfPi => "choice_of_pi",
            SuiteName::BaseChange => "base_change",
            SuiteName::TruncationStability => "truncation_stability",
        }
    }
}

impl fmt::Display for SuiteName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SuiteName {
    type Err = HkError;

    fn from_str(s: &str) -> Result<Self> {
        SuiteName::ALL
            .into_iter()
            .find(|n| n.as_str() == s)
            .ok_or_else(|| HkError::Parse(format!("unknown suite `{s}`")))
    }
}

pub fn run_suite(name: SuiteName, spec: &JobSpec) -> Result<SuiteRecord> {
    let checks = match name {
        SuiteName::KimHainAlgebra => kim_hain_algebra(spec)?,
        SuiteName::BranchCalculus => branch_calculus(spec)?,
        SuiteName::ChoiceOfPi => choice_of_pi(spec)?,
        SuiteName::BaseChange => base_change(spec)?,
        SuiteName::TruncationStability => truncation_stability(spec)?,
    };
    Ok(SuiteRecord::new(name.as_str(), checks))
}

/// Samples for the algebraic identities.
pub const ALGEBRA_SAMPLES: usize = 100;
/// Random pairs for the logarithm homomorphism check.
pub const LOG_PAIRS: usize = 50;

fn exact(name: &str, samples: usize, failures: usize) -> CheckRecord {
    CheckRecord {
        name: name.into(),
        passed: failures == 0,
        samples,
        certificate: if failures == 0 { "exact".into() } else { format!("{failures} exact mismatches") },
    }
}

fn by_valuation(name: &str, samples: usize, min: i64, bound: i64) -> CheckRecord {
    CheckRecord {
        name: name.into(),
        passed: min >= bound,
        samples,
        certificate: format!("min ord_p residual {min} against bound {bound}"),
    }
}

/// `p`-adic digits to which `x` is known to vanish (its valuation when it
/// is certainly nonzero), rounded down.
pub fn zero_digits(x: &KElement) -> i64 {
    let e = x.field().e() as i64;
    match x.ord_pi() {
        Valuation::Finite(v) | Valuation::AtLeast(v) => v.div_euclid(e),
    }
}

fn matrix_digits(m: &PrecMatrix<KElement>) -> i64 {
    (0..m.rows()).flat_map(|i| m.row(i).iter().map(zero_digits).collect::<Vec<_>>()).min().unwrap_or(i64::MAX)
}

fn random_form(rng: &mut ChaCha8Rng, chart: ChartId, degree: usize, window: Window) -> KimHainForm {
    let mut x = KimHainForm::zero(chart, degree, window);
    let forms = Form::basis(degree, false);
    for _ in 0..rng.gen_range(1..=3) {
        let m = MonomialIndex::new(rng.gen_range(0..=1), rng.gen_range(-1..=1));
        let form = forms[rng.gen_range(0..forms.len())];
        let mut c: i64 = rng.gen_range(-5..=5);
        if c == 0 {
            c = 1;
        }
        let t = KimHainForm::monomial(chart, m, form, rng.gen_range(0..=1), Q::from_integer(c.into()), window);
        x = x.add(&t).expect("same chart and degree");
    }
    x
}

fn random_chart(rng: &mut ChaCha8Rng, r: u32) -> ChartId {
    let n = rng.gen_range(1..=r);
    if rng.gen_bool(0.5) {
        ChartId::z(n, r)
    } else {
        ChartId::w(n, r)
    }
}

/// Identities of the divided-power de Rham algebra and of the Cech
/// differential on random elements, all exact.
fn kim_hain_algebra(spec: &JobSpec) -> Result<Vec<CheckRecord>> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let window = spec.window();
    let p = spec.p;
    let r = spec.r;
    let n = ALGEBRA_SAMPLES;
    let pq = Q::from_integer(p.into());
    let mut fails = [0usize; 7];
    for _ in 0..n {
        let chart = random_chart(&mut rng, r);
        let deg = rng.gen_range(0..=1);
        let x = random_form(&mut rng, chart, deg, window);
        let bad = |ok: bool, y: &KimHainForm| !ok || y.overflow();

        let dd = x.d().d();
        fails[0] += bad(dd.is_zero(), &dd) as usize;

        let lhs = x.frobenius(p)?.N();
        let rhs = x.N().frobenius(p)?.scale(&pq);
        fails[1] += bad(forms_equal(&lhs, &rhs), &lhs) as usize;

        fails[2] += bad(forms_equal(&x.N().d(), &x.d().N()), &x) as usize;

        let fd = x.frobenius(p)?.d();
        fails[3] += bad(forms_equal(&fd, &x.d().frobenius(p)?), &fd) as usize;

        let z = ChartId::z(chart.n, r);
        let xz = random_form(&mut rng, z, deg, window);
        for g in [Gluing::Natural, Gluing::Next] {
            let a = xz.restrict(g)?.d();
            fails[4] += bad(forms_equal(&a, &xz.d().restrict(g)?), &a) as usize;
        }

        // degrees with total at most 2
        let degs = [(0, 0, 0), (1, 0, 0), (0, 1, 1), (1, 1, 0), (0, 0, 2)][rng.gen_range(0..5)];
        let a = random_form(&mut rng, chart, degs.0, window);
        let b = random_form(&mut rng, chart, degs.1, window);
        let c = random_form(&mut rng, chart, degs.2.min(2 - degs.0 - degs.1), window);
        let left = a.mul(&b)?.mul(&c)?;
        let right = a.mul(&b.mul(&c)?)?;
        fails[5] += bad(forms_equal(&left, &right), &left) as usize;

        if degs.0 + degs.1 < 2 {
            let sign = if degs.0 % 2 == 0 { Q::from_integer(1.into()) } else { Q::from_integer((-1).into()) };
            let lhs = a.mul(&b)?.d();
            let rhs = a.d().mul(&b)?.add(&a.mul(&b.d())?.scale(&sign))?;
            fails[6] += bad(forms_equal(&lhs, &rhs), &lhs) as usize;
        }
    }
    let mut out = vec![
        exact("d∘d = 0", n, fails[0]),
        exact("Nφ = pφN", n, fails[1]),
        exact("N commutes with d", n, fails[2]),
        exact("φ commutes with d", n, fails[3]),
        exact("restriction commutes with d", 2 * n, fails[4]),
        exact("divided-power product associative", n, fails[5]),
        exact("Leibniz rule", n, fails[6]),
    ];
    out.push(cech_dd_check(&mut rng, spec, n)?);
    out.push(module_relation(spec)?);
    Ok(out)
}

/// `D∘D = 0` on random cochains of the Hyodo-Kato and de Rham complexes.
fn cech_dd_check(rng: &mut ChaCha8Rng, spec: &JobSpec, n: usize) -> Result<CheckRecord> {
    let window = Window::new(3, 3, 2);
    let hk = CechComplex::<KimHainForm>::new(HkEnv { window }, spec.r, spec.exec, 0)?;
    let field = spec.field()?;
    let env = DrEnv { field: field.clone(), point: KElement::pi(&field), window };
    let dr = CechComplex::<ChartElement<KElement>>::new(env, spec.r, spec.exec, spec.zero_prec())?;
    let mut failures = 0;
    for s in 0..n {
        let k = s % 2;
        let dim = hk.basis(k).len();
        let v: Vec<(usize, Q)> =
            (0..5).map(|_| (rng.gen_range(0..dim), Q::from_integer(rng.gen_range(-9i64..=9).into()))).collect();
        let v = crate::linalg::normalize(v, 0);
        let once = hk.differential(k)?.apply(&v, 0);
        failures += !hk.differential(k + 1)?.apply(&once, 0).is_empty() as usize;
        let cochain = hk.from_vec(k, &v)?;
        let twice = hk.total_differential(&hk.total_differential(&cochain)?)?;
        failures += !hk.to_vec(&twice)?.is_empty() as usize;
        if k == 0 {
            let dim = dr.basis(0).len();
            let w: Vec<(usize, KElement)> =
                (0..5).map(|_| (rng.gen_range(0..dim), KElement::from_int(&field, rng.gen_range(-9..=9)))).collect();
            let w = crate::linalg::normalize(w, spec.zero_prec());
            let once = dr.differential(0)?.apply(&w, spec.zero_prec());
            failures += !dr.differential(1)?.apply(&once, spec.zero_prec()).is_empty() as usize;
        }
    }
    Ok(exact("Cech D∘D = 0", n, failures))
}

/// `Nφ = pφN` on the module the Cech computation produces.
fn module_relation(spec: &JobSpec) -> Result<CheckRecord> {
    let data = tate_data(spec, spec.window())?;
    let field = spec.field()?;
    let g = &data.groups[1];
    let m = PhiNModule::new(g.phi.clone(), g.n.clone(), spec.p, field.e() as u32)?;
    let ok = m.check_relation()?.holds() && m.is_nilpotent()?;
    Ok(exact("Nφ = pφN on H^1", 1, (!ok) as usize))
}

fn tate_data(spec: &JobSpec, window: Window) -> Result<TateData> {
    let field = spec.field()?;
    let branch = LogBranch::new(&parse_branch(&spec.q, &field)?)?;
    compute_tate(&field, spec.r, window, &branch, spec.exec, spec.zero_prec())
}

/// The pool `{π, p, p(1+p), p^2(1+p)}`.
pub fn branch_pool(field: &Arc<FieldDescriptor>) -> Vec<(String, KElement)> {
    let p = field.p() as i64;
    let k = |n: i64| KElement::from_int(field, n);
    vec![
        ("π".into(), KElement::pi(field)),
        ("p".into(), k(p)),
        ("p(1+p)".into(), k(p * (1 + p))),
        ("p^2(1+p)".into(), k(p * p * (1 + p))),
    ]
}

fn random_nonzero(rng: &mut ChaCha8Rng, field: &Arc<FieldDescriptor>) -> KElement {
    let p = field.p() as i64;
    let mut unit = rng.gen_range(1..1000i64);
    if unit % p == 0 {
        unit += 1;
    }
    let tail = KElement::pi(field).mul(&KElement::from_int(field, rng.gen_range(0..1000)));
    KElement::from_int(field, unit).add(&tail).mul(&KElement::pi_pow(field, rng.gen_range(0..4)))
}

/// `log_q(q) = 0`, the homomorphism property, and `log` of roots of unity.
fn branch_calculus(spec: &JobSpec) -> Result<Vec<CheckRecord>> {
    let field = spec.field()?;
    let bound = spec.precision - 3;
    let pool = branch_pool(&field);
    let mut min_self = i64::MAX;
    for (_, q) in &pool {
        let b = LogBranch::new(q)?;
        min_self = min_self.min(zero_digits(&b.eval(q)?));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed ^ 0x10);
    let mut min_hom = i64::MAX;
    for _ in 0..LOG_PAIRS {
        let (_, q) = &pool[rng.gen_range(0..pool.len())];
        let b = LogBranch::new(q)?;
        let x = random_nonzero(&mut rng, &field);
        let y = random_nonzero(&mut rng, &field);
        let diff = b.eval(&x.mul(&y))?.sub(&b.eval(&x)?).sub(&b.eval(&y)?);
        min_hom = min_hom.min(zero_digits(&diff));
    }
    let ctx = PadicContext::new(spec.p, spec.precision)?;
    let mut min_mu = i64::MAX;
    for a in 1..spec.p {
        let mu = KElement::from_scalar(&field, teichmuller(a, &ctx)?);
        min_mu = min_mu.min(zero_digits(&log_unit(&mu)?));
    }
    Ok(vec![
        by_valuation("log_q(q) = 0", pool.len(), min_self, bound),
        by_valuation("log(xy) = log x + log y", LOG_PAIRS, min_hom, bound),
        by_valuation("log(μ) = 0", (spec.p - 1) as usize, min_mu, bound),
    ])
}

/// `Psi_q` against `Psi_{q'} ∘ exp(-(log_q q'/ord_p q') 𝐍)` for all pairs of
/// the pool, with each `Psi` computed by its own Cech run.
fn choice_of_pi(spec: &JobSpec) -> Result<Vec<CheckRecord>> {
    let field = spec.field()?;
    let bound = spec.zero_prec();
    let pool = branch_pool(&field);
    let mut psis = Vec::new();
    let mut module = None;
    for (_, q) in &pool {
        let branch = LogBranch::new(q)?;
        let data = compute_tate(&field, spec.r, spec.window(), &branch, spec.exec, spec.zero_prec())?;
        let g = &data.groups[1];
        module.get_or_insert(PhiNModule::new(g.phi.clone(), g.n.clone(), spec.p, field.e() as u32)?);
        psis.push((branch, g.psi.clone()));
    }
    let module = module.expect("pool is not empty");
    let mut min_pair = i64::MAX;
    let mut min_loop = i64::MAX;
    let mut pairs = 0;
    for (i, (bq, psi_q)) in psis.iter().enumerate() {
        for (j, (bq2, psi_q2)) in psis.iter().enumerate() {
            if i == j {
                continue;
            }
            pairs += 1;
            let c = transition_constant(bq, bq2.q())?;
            let predicted = psi_q2.mul(&module.exp_cn(&c.neg())?)?;
            min_pair = min_pair.min(matrix_digits(&predicted.sub(psi_q)?));
            let back = transition_constant(bq2, bq.q())?;
            let round = psi_q.mul(&module.exp_cn(&c)?)?.mul(&module.exp_cn(&back)?)?;
            min_loop = min_loop.min(matrix_digits(&round.sub(psi_q)?));
        }
    }
    Ok(vec![
        by_valuation("Ψ_q = Ψ_q'∘exp(-(log_q q'/ord_p q')𝐍)", pairs, min_pair, bound),
        by_valuation("q → q' → q transition is the identity", pairs, min_loop, bound),
    ])
}

/// Base change `s -> s^2` of the `r = 1` module against the `r = 2` runs over
/// `Q_p` and over `Q_p(p^{1/2})`.
fn base_change(spec: &JobSpec) -> Result<Vec<CheckRecord>> {
    let ctx = PadicContext::new(spec.p, spec.precision)?;
    let unram = parse_field(&ctx, None)?;
    let ramified = parse_field(&ctx, Some(&format!("s^2-{}", spec.p)))?;
    let run = |field: &Arc<FieldDescriptor>, r: u32| -> Result<PhiNModule> {
        let branch = LogBranch::pi(field);
        let window = spec.window.unwrap_or_else(|| Window::default_for(spec.p));
        let data = compute_tate(field, r, window, &branch, spec.exec, spec.zero_prec())?;
        let g = &data.groups[1];
        PhiNModule::new(g.phi.clone(), g.n.clone(), spec.p, field.e() as u32)
    };
    let m1 = run(&unram, 1)?;
    let bc = m1.base_change(2)?;
    let m2 = run(&unram, 2)?;
    let m2_ram = run(&ramified, 2)?;
    let same = |a: &PrecMatrix<Q>, b: &PrecMatrix<Q>| same_entries(a, b) as usize;
    Ok(vec![
        exact("base change (φ, N) = r = 2 over Q_p", 1, 2 - same(bc.phi(), m2.phi()) - same(bc.n_op(), m2.n_op())),
        exact(
            "base change (φ, N) = r = 2 over the e = 2 field",
            1,
            2 - same(bc.phi(), m2_ram.phi()) - same(bc.n_op(), m2_ram.n_op()),
        ),
        exact("𝐍 unchanged by base change", 1, 1 - same(&bc.normalized_n(), &m1.normalized_n())),
        exact("𝐍 = r = 2 over the e = 2 field", 1, 1 - same(&bc.normalized_n(), &m2_ram.normalized_n())),
        exact("Nφ = pφN after base change", 1, (!bc.check_relation()?.holds()) as usize),
    ])
}

/// Every matrix at `(S, T, U)` against `(S+4, T+4, U+1)`.
fn truncation_stability(spec: &JobSpec) -> Result<Vec<CheckRecord>> {
    let w = spec.window();
    let a = tate_data(spec, w)?;
    let b = tate_data(spec, w.enlarged())?;
    let mut out = Vec::new();
    for (x, y) in a.groups.iter().zip(&b.groups) {
        let k = x.degree;
        let exact_ok = same_entries(&x.phi, &y.phi) && same_entries(&x.n, &y.n);
        out.push(exact(&format!("φ, N on H^{k}"), 1, (!exact_ok) as usize));
        let digits = matrix_digits(&x.psi.sub(&y.psi)?);
        out.push(by_valuation(&format!("Ψ on H^{k}"), 1, digits, spec.zero_prec()));
        out.push(exact(&format!("dim F^1 H^{k}"), 1, (x.f1.len() != y.f1.len()) as usize));
    }
    Ok(out)
}
