use std::sync::Arc;

use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use super::expansion::format_expansion;
use super::report::*;
use super::suites::{run_suite, SuiteName};
use crate::cech::classes::{dr_e2, hk_e2, hk_frobenius, hk_monodromy, psi, standard_basis};
use crate::cech::{
    class_matrix, h_rank_estimate, hodge_f1, lookahead, CechComplex, CohomologyClass, DrEnv, HkEnv, LocalSection,
};
use crate::chart::{ChartElement, Window};
use crate::error::{HkError, Result};
use crate::exec::Exec;
use crate::kim_hain::KimHainForm;
use crate::linalg::{PrecMatrix, Scalar};
use crate::log::LogBranch;
use crate::padic::parse::{parse_element, parse_field};
use crate::padic::{FieldDescriptor, KElement, PadicContext};
use crate::phin::{tate_object, FilteredPhiNModule, FiltrationStep, PhiNModule};

type Q = BigRational;

/// Parameters of one Tate-curve computation. Defaults are filled in
/// explicitly and echoed into the report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct JobSpec {
    pub p: u64,
    pub precision: i64,
    /// Eisenstein polynomial defining `K`; `None` means `K = Q_p`, `pi = p`.
    pub eisenstein: Option<String>,
    pub r: u32,
    /// `pi`, `p`, or an element of `K` such as `p*(1+p)`.
    pub q: String,
    /// Overrides the default window `S = T = 2p + 2`, `U = 3`.
    pub window: Option<Window>,
    /// Rerun at the enlarged window and compare every matrix.
    pub stability: bool,
    /// Persistent rank estimates of the Hyodo-Kato side (slow).
    pub ranks: bool,
    pub suites: Vec<SuiteName>,
    pub seed: u64,
    /// Execution policy; not part of the echoed spec because it never
    /// changes the result.
    #[serde(skip)]
    pub exec: Exec,
}

impl Default for JobSpec {
    fn default() -> Self {
        JobSpec {
            p: 5,
            precision: 20,
            eisenstein: None,
            r: 2,
            q: "pi".into(),
            window: None,
            stability: true,
            ranks: false,
            suites: vec![],
            seed: 0x5eed,
            exec: Exec::default(),
        }
    }
}

impl JobSpec {
    pub fn validate(&self) -> Result<()> {
        if self.r == 0 {
            return Err(HkError::Invalid("r must be at least 1".into()));
        }
        if self.precision < 8 {
            return Err(HkError::BadPrecision(self.precision));
        }
        Ok(())
    }

    pub fn field(&self) -> Result<Arc<FieldDescriptor>> {
        let ctx = PadicContext::new(self.p, self.precision)?;
        parse_field(&ctx, self.eisenstein.as_deref())
    }

    pub fn window(&self) -> Window {
        self.window.unwrap_or_else(|| Window::default_for(self.p))
    }

    /// Digits an indistinguishable zero must be known to.
    pub fn zero_prec(&self) -> i64 {
        self.precision - 5
    }
}

/// `pi`, `p` or a parsed element.
pub fn parse_branch(src: &str, field: &Arc<FieldDescriptor>) -> Result<KElement> {
    match src.trim() {
        "pi" | "π" => Ok(KElement::pi(field)),
        "p" => Ok(KElement::from_int(field, field.p() as i64)),
        other => parse_element(other, field),
    }
}

/// Operator matrices and the Hodge filtration of one cohomology group.
#[derive(Clone, Debug)]
pub struct GroupData {
    pub degree: usize,
    pub phi: PrecMatrix<Q>,
    pub n: PrecMatrix<Q>,
    pub psi: PrecMatrix<KElement>,
    pub f1: Vec<Vec<KElement>>,
    pub dr_names: Vec<String>,
}

/// Everything computed at one window.
#[derive(Clone, Debug)]
pub struct TateData {
    pub groups: Vec<GroupData>,
    pub classes: Vec<ClassReport>,
}

fn listing<S: LocalSection>(c: &CechComplex<S>, side: &str, class: &CohomologyClass<S>) -> Result<ClassReport> {
    let v = c.to_vec(&class.rep)?;
    let terms = v
        .iter()
        .map(|(i, x)| format!("{} · {}", render_any(x), c.basis(class.rep.degree)[*i].label()))
        .collect();
    Ok(ClassReport {
        side: side.into(),
        degree: class.rep.degree,
        name: class.name.clone(),
        cocycle: c.is_cocycle(&class.rep)?,
        terms,
    })
}

fn render_any<T: Scalar>(x: &T) -> String {
    x.render()
}

fn images(
    basis: &[CohomologyClass<KimHainForm>],
    prefix: &str,
    f: impl Fn(&CohomologyClass<KimHainForm>) -> Result<crate::cech::Cochain<KimHainForm>>,
) -> Result<Vec<CohomologyClass<KimHainForm>>> {
    basis.iter().map(|b| Ok(CohomologyClass::new(format!("{prefix}({})", b.name), f(b)?))).collect()
}

/// Builds both complexes at `window` and computes `phi`, `N`, `Psi` and `F^1`
/// on `H^0, H^1, H^2` in the standard bases.
pub fn compute_tate(
    field: &Arc<FieldDescriptor>,
    r: u32,
    window: Window,
    branch: &LogBranch,
    exec: Exec,
    zero_prec: i64,
) -> Result<TateData> {
    let point = KElement::pi(field);
    let hk = CechComplex::<KimHainForm>::new(HkEnv { window }, r, exec, 0)?;
    let dr = CechComplex::<ChartElement<KElement>>::new(
        DrEnv { field: field.clone(), point: point.clone(), window },
        r,
        exec,
        zero_prec,
    )?;
    let hk_bases = standard_basis(&hk, hk_e2);
    let dr_bases = standard_basis(&dr, dr_e2);
    let p = field.p();
    let mut groups = Vec::new();
    let mut classes = Vec::new();
    for (degree, (hb, db)) in hk_bases.iter().zip(&dr_bases).enumerate() {
        for c in hb {
            classes.push(listing(&hk, "HK", c)?);
        }
        for c in db {
            classes.push(listing(&dr, "dR", c)?);
        }
        let phi = class_matrix(&hk, hb, &images(hb, "φ", |b| hk_frobenius(&b.rep, p))?)?;
        let n = class_matrix(&hk, hb, &images(hb, "N", |b| hk_monodromy(&b.rep))?)?;
        let psi_imgs = hb
            .iter()
            .map(|b| Ok(CohomologyClass::new(format!("Ψ({})", b.name), psi(&b.rep, branch, &point)?)))
            .collect::<Result<Vec<_>>>()?;
        let psi = class_matrix(&dr, db, &psi_imgs)?;
        let f1 = hodge_f1(&dr, db)?;
        groups.push(GroupData { degree, phi, n, psi, f1, dr_names: db.iter().map(|c| c.name.clone()).collect() });
    }
    Ok(TateData { groups, classes })
}

/// Entrywise comparison: exact over `Q`, to `zero_prec` digits over `K`.
pub fn same_data(a: &TateData, b: &TateData, zero_prec: i64) -> bool {
    a.groups.len() == b.groups.len()
        && a.groups.iter().zip(&b.groups).all(|(x, y)| {
            same_entries(&x.phi, &y.phi)
                && same_entries(&x.n, &y.n)
                && x.psi.rows() == y.psi.rows()
                && x.psi.cols() == y.psi.cols()
                && (0..x.psi.rows())
                    .all(|i| (0..x.psi.cols()).all(|j| x.psi.get(i, j).agrees_to(y.psi.get(i, j), zero_prec)))
                && x.f1.len() == y.f1.len()
        })
}

pub fn same_entries(a: &PrecMatrix<Q>, b: &PrecMatrix<Q>) -> bool {
    a.rows() == b.rows() && a.cols() == b.cols() && (0..a.rows()).all(|i| a.row(i) == b.row(i))
}

/// The filtered `(phi, N)`-module of one group.
pub fn filtered_module(g: &GroupData, field: &Arc<FieldDescriptor>) -> Result<FilteredPhiNModule> {
    let base = PhiNModule::new(g.phi.clone(), g.n.clone(), field.p(), field.e() as u32)?;
    let d = g.psi.rows();
    let all: Vec<Vec<KElement>> =
        (0..d).map(|i| (0..d).map(|j| KElement::from_int(field, (i == j) as i64)).collect()).collect();
    // Relative forms on a curve stop in degree 1, so F^2 = 0.
    let hodge = vec![
        FiltrationStep { level: 0, span: all },
        FiltrationStep { level: 1, span: g.f1.clone() },
        FiltrationStep { level: 2, span: vec![] },
    ];
    Ok(FilteredPhiNModule { base, field: field.clone(), psi: g.psi.clone(), hodge })
}

fn filtration_report(g: &GroupData, m: &FilteredPhiNModule) -> FiltrationReport {
    FiltrationReport {
        group: format!("H^{}_dR", g.degree),
        basis: g.dr_names.clone(),
        steps: m
            .hodge
            .iter()
            .map(|s| FiltrationStepReport {
                level: s.level,
                dim: s.dim(),
                span: s.span.iter().map(|v| v.iter().map(format_expansion).collect()).collect(),
            })
            .collect(),
    }
}

fn identification(g: &GroupData, m: &FilteredPhiNModule, n: i32, field: &Arc<FieldDescriptor>) -> Result<IdentificationReport> {
    let target = tate_object(n, field)?;
    let rank = g.phi.rows();
    let monodromy_zero = g.n.is_zero_at(0);
    let matches = rank == 1
        && same_entries(&g.phi, target.base.phi())
        && monodromy_zero
        && m.hodge_jumps() == target.hodge_jumps()
        && m.is_valid(field.context().prec() - 5)?;
    Ok(IdentificationReport {
        group: format!("H^{}", g.degree),
        target: format!("K({n})"),
        rank,
        phi_eigenvalue: if rank == 1 { g.phi.get(0, 0).render() } else { "-".into() },
        monodromy_zero,
        hodge_jumps: m.hodge_jumps(),
        matches,
    })
}

/// The end-to-end computation for one [`JobSpec`].
pub fn run_tate_job(spec: &JobSpec) -> Result<Report> {
    spec.validate()?;
    let field = spec.field()?;
    let window = spec.window();
    let q = parse_branch(&spec.q, &field)?;
    let branch = LogBranch::new(&q)?;
    let zp = spec.zero_prec();
    let data = compute_tate(&field, spec.r, window, &branch, spec.exec, zp)?;

    let matrices_stable = if spec.stability {
        let big = compute_tate(&field, spec.r, window.enlarged(), &branch, spec.exec, zp)?;
        Some(same_data(&data, &big, zp))
    } else {
        None
    };

    let ranks = if spec.ranks {
        let mk = |w: Window| CechComplex::<KimHainForm>::new(HkEnv { window: w }, spec.r, spec.exec, 0);
        let (a, b) = (mk(window)?, mk(lookahead(window))?);
        let (c, d) = (mk(window.enlarged())?, mk(lookahead(window.enlarged()))?);
        let est = (0..=3)
            .map(|k| {
                let e = h_rank_estimate([(&a, &b), (&c, &d)], k)?;
                Ok(RankRecord { side: "HK".into(), estimate: e.into() })
            })
            .collect::<Result<Vec<_>>>()?;
        Some(est)
    } else {
        None
    };

    let mut matrices = Vec::new();
    let mut filtration = Vec::new();
    let mut identifications = Vec::new();
    for g in &data.groups {
        let k = g.degree;
        let m = filtered_module(g, &field)?;
        matrices.push(MatrixReport::new(&format!("phi_H{k}"), &g.phi));
        matrices.push(MatrixReport::new(&format!("N_H{k}"), &g.n));
        matrices.push(MatrixReport::new(&format!("Nnorm_H{k}"), &m.base.normalized_n()));
        matrices.push(MatrixReport::new(&format!("Psi_H{k}"), &g.psi));
        filtration.push(filtration_report(g, &m));
        match k {
            0 => identifications.push(identification(g, &m, 0, &field)?),
            2 => identifications.push(identification(g, &m, -1, &field)?),
            _ => {}
        }
    }

    let suites = spec.suites.iter().map(|s| run_suite(*s, spec)).collect::<Result<Vec<_>>>()?;

    let meta = Meta {
        tool: env!("CARGO_PKG_NAME").into(),
        version: env!("CARGO_PKG_VERSION").into(),
        eisenstein: field.polynomial_string(),
        e: field.e(),
        fiber_point: "π".into(),
        period: format!("π^{}", spec.r),
        strictly_semistable: spec.r >= 2,
        branch_q: format_expansion(&q),
        branch_m: branch.m(),
        log_q_pi: format_expansion(branch.log_q_pi()),
        zero_precision: zp,
    };
    Ok(Report {
        spec: spec.clone(),
        windows: WindowsReport { base: window, enlarged: window.enlarged(), matrices_stable, ranks },
        classes: data.classes,
        matrices,
        filtration,
        identifications,
        suites,
        meta,
    })
}
