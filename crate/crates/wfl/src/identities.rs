//! Numerical evaluation of the weaving identities and inequalities: every
//! equality is scored by a scale-normalized residual, every bound by a
//! scale-normalized slack, and each evaluation is returned as a named-term
//! [`IdentityRecord`].
//!
//! Conventions shared by all evaluators:
//!
//! * Sums follow the ascending-index contract of [`crate::frames`]. The
//!   sigma-restricted quadratic form satisfies
//!   `<S_W^sigma f, f> = sum_{i in sigma} |<f, phi_i>|^2` (the complement
//!   form mirrors it with psi over sigma^c); every formula here uses that
//!   index-consistent pairing.
//! * Each record carries `scale = max(1, |named terms|...)`, so residuals and
//!   slacks are invariant under `f -> c f` (the quantities are homogeneous of
//!   degree two in `f`).
//! * Bounds are evaluated for any real lambda, including regimes where the
//!   bound coefficients go negative and the inequality is vacuous; the record
//!   still reports the slack.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::frames::FrameFamily;
use crate::linalg::{frob, hermitian_deviation, inner, CMatrix, CVector, C64, HERM_TOL};
use crate::weaving::{PartitionMask, WeavingContext};

/// Default relative tolerance on equality residuals.
pub const EQ_TOL: f64 = 1e-9;
/// Default relative tolerance on inequality slacks (pass when slack >= -tol).
pub const INEQ_TOL: f64 = 1e-9;
/// Hypothesis check `||S_W - I||_F <= tol` for the Parseval-weaving identity.
pub const PARSEVAL_TOL: f64 = 1e-8;
/// Hypothesis check `||S_W - A I||_F <= tol * A` for the tight-weaving chains.
pub const TIGHT_TOL: f64 = 1e-8;
/// Acceptance threshold on the operator residual of a candidate dual.
pub const DUAL_TOL: f64 = 1e-8;
/// The lambda values verification sweeps use by default: the
/// equality-attaining points 0.5, 1, 2 plus vacuous-bound regimes.
pub const DEFAULT_LAMBDA_GRID: [f64; 6] = [-1.0, 0.0, 0.5, 1.0, 2.0, 3.0];

/// A named scalar in a record: real or complex.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Term {
    Real(f64),
    Complex([f64; 2]),
}

impl From<f64> for Term {
    fn from(x: f64) -> Self {
        Term::Real(x)
    }
}

impl From<C64> for Term {
    fn from(z: C64) -> Self {
        Term::Complex([z.re, z.im])
    }
}

/// One evaluation of one identity/inequality at concrete inputs.
#[derive(Debug, Clone, Serialize)]
pub struct IdentityRecord {
    pub theorem: &'static str,
    pub lambda: Option<f64>,
    pub sigma: Option<PartitionMask>,
    pub terms: BTreeMap<&'static str, Term>,
    /// `|lhs - rhs| / scale`; zero for pure inequalities.
    #[serde(rename = "residual")]
    pub equality_residual: f64,
    /// Smallest one-sided margin over all bounds in the record, `/ scale`.
    /// `None` for pure equalities.
    pub slack: Option<f64>,
    #[serde(skip)]
    pub scale: f64,
    pub pass: bool,
}

impl IdentityRecord {
    /// Pass/fail at caller-supplied tolerances (the stored `pass` uses the
    /// defaults [`EQ_TOL`]/[`INEQ_TOL`]).
    pub fn pass_at(&self, eq_tol: f64, ineq_tol: f64) -> bool {
        self.equality_residual <= eq_tol && self.slack.is_none_or(|s| s >= -ineq_tol)
    }
}

fn build_record(
    theorem: &'static str,
    lambda: Option<f64>,
    sigma: Option<&PartitionMask>,
    terms: BTreeMap<&'static str, Term>,
    equality_gap: f64,
    raw_slacks: &[f64],
    scale_basis: &[f64],
) -> IdentityRecord {
    let scale = scale_basis.iter().fold(1.0f64, |acc, &x| acc.max(x.abs()));
    let equality_residual = equality_gap / scale;
    let slack = raw_slacks
        .iter()
        .copied()
        .min_by(f64::total_cmp)
        .map(|s| s / scale);
    let mut record = IdentityRecord {
        theorem,
        lambda,
        sigma: sigma.cloned(),
        terms,
        equality_residual,
        slack,
        scale,
        pass: false,
    };
    record.pass = record.pass_at(EQ_TOL, INEQ_TOL);
    record
}

// ---------------------------------------------------------------------------
// Operator lemmas
// ---------------------------------------------------------------------------

/// For any square P with Q = I - P: `P + Q*Q` equals `Q* + P*P` as operators.
/// The record's residual is the Frobenius gap between the two sides.
pub fn lemma_operator_identity(p: &CMatrix) -> IdentityRecord {
    assert_eq!(p.nrows(), p.ncols(), "operator must be square");
    let d = p.nrows();
    let q = CMatrix::identity(d, d) - p;
    let lhs = p + q.adjoint() * &q;
    let rhs = q.adjoint() + p.adjoint() * p;
    let gap = frob(&(&lhs - &rhs));
    let (nl, nr) = (frob(&lhs), frob(&rhs));
    let mut terms = BTreeMap::new();
    terms.insert("lhs_frobenius", Term::Real(nl));
    terms.insert("rhs_frobenius", Term::Real(nr));
    build_record("lemma_operator_identity", None, None, terms, gap, &[], &[nl, nr])
}

/// For self-adjoint P with Q = I - P:
/// `||Pf||^2 + lambda <Qf,f> = ||Qf||^2 + (2-lambda) <Pf,f> + (lambda-1) ||f||^2`,
/// bounded below by `(lambda - lambda^2/4) ||f||^2`.
pub fn lemma_quadratic_bound(p: &CMatrix, f: &CVector, lambda: f64) -> Result<IdentityRecord> {
    assert_eq!(p.nrows(), p.ncols(), "operator must be square");
    assert_eq!(p.nrows(), f.len(), "operator and vector dimensions must agree");
    let deviation = hermitian_deviation(p);
    if deviation > HERM_TOL {
        return Err(Error::NotHermitian { deviation });
    }
    let d = p.nrows();
    let q = CMatrix::identity(d, d) - p;
    let pf = p * f;
    let qf = &q * f;
    let nf2 = f.norm_squared();
    let lhs = pf.norm_squared() + lambda * inner(&qf, f).re;
    let rhs = qf.norm_squared() + (2.0 - lambda) * inner(&pf, f).re + (lambda - 1.0) * nf2;
    let bound = (lambda - lambda * lambda / 4.0) * nf2;
    let mut terms = BTreeMap::new();
    terms.insert("lhs", Term::Real(lhs));
    terms.insert("rhs", Term::Real(rhs));
    terms.insert("lower_bound", Term::Real(bound));
    Ok(build_record(
        "lemma_quadratic_bound",
        Some(lambda),
        None,
        terms,
        (lhs - rhs).abs(),
        &[lhs - bound],
        &[lhs, rhs, bound, nf2],
    ))
}

/// For ANY square P (self-adjointness not required) with Q = I - P:
/// `<(P*P + lambda (Q*+Q)) f, f> = <(Q*Q + (1-lambda)(P*+P) + (2 lambda - 1) I) f, f>`,
/// bounded below by `(1 - (lambda-1)^2) ||f||^2`.
pub fn lemma_cross_bound(p: &CMatrix, f: &CVector, lambda: f64) -> IdentityRecord {
    assert_eq!(p.nrows(), p.ncols(), "operator must be square");
    assert_eq!(p.nrows(), f.len(), "operator and vector dimensions must agree");
    let d = p.nrows();
    let q = CMatrix::identity(d, d) - p;
    let pf = p * f;
    let qf = &q * f;
    let p_sym_form = inner(&(p.adjoint() * f + &pf), f).re;
    let q_sym_form = inner(&(q.adjoint() * f + &qf), f).re;
    let nf2 = f.norm_squared();
    let lhs = pf.norm_squared() + lambda * q_sym_form;
    let rhs = qf.norm_squared() + (1.0 - lambda) * p_sym_form + (2.0 * lambda - 1.0) * nf2;
    let bound = (1.0 - (lambda - 1.0) * (lambda - 1.0)) * nf2;
    let mut terms = BTreeMap::new();
    terms.insert("lhs", Term::Real(lhs));
    terms.insert("rhs", Term::Real(rhs));
    terms.insert("lower_bound", Term::Real(bound));
    build_record(
        "lemma_cross_bound",
        Some(lambda),
        None,
        terms,
        (lhs - rhs).abs(),
        &[lhs - bound],
        &[lhs, rhs, bound, nf2],
    )
}

// ---------------------------------------------------------------------------
// Weaving sums (direct summation route)
// ---------------------------------------------------------------------------

/// The base quantities every weaving identity is assembled from, computed by
/// literal ascending-index summation. Independent of lambda, so one probe
/// serves a whole lambda grid.
#[derive(Debug, Clone)]
pub struct WeavingTerms {
    /// `||f||^2`.
    pub nf2: f64,
    /// `sum_{i in sigma} |<f, phi_i>|^2`.
    pub a_sigma: f64,
    /// `sum_{i in sigma^c} |<f, psi_i>|^2`.
    pub a_sigma_c: f64,
    /// `sum_{i in sigma} <f, phi_i> phi_i`.
    pub g_sigma: CVector,
    /// `sum_{i in sigma^c} <f, psi_i> psi_i`.
    pub g_sigma_c: CVector,
    /// `sum_{i in sigma} |<g_sigma, S_W^{-1} phi_i>|^2`.
    pub t_gs_sigma: f64,
    /// `sum_{i in sigma^c} |<g_sigma, S_W^{-1} psi_i>|^2`.
    pub t_gs_sigma_c: f64,
    /// Same two sums with `g_sigma_c` in the first slot.
    pub t_gsc_sigma: f64,
    pub t_gsc_sigma_c: f64,
}

/// Direct-summation evaluation of [`WeavingTerms`].
pub fn weaving_terms(ctx: &WeavingContext, f: &CVector) -> WeavingTerms {
    let d = ctx.dim();
    let mut a_sigma = 0.0;
    let mut a_sigma_c = 0.0;
    let mut g_sigma = CVector::zeros(d);
    let mut g_sigma_c = CVector::zeros(d);
    for i in 0..ctx.len() {
        if ctx.sigma().contains(i) {
            let v = ctx.phi().vector(i);
            let c = inner(f, v);
            a_sigma += c.norm_sqr();
            g_sigma += v * c;
        } else {
            let v = ctx.psi().vector(i);
            let c = inner(f, v);
            a_sigma_c += c.norm_sqr();
            g_sigma_c += v * c;
        }
    }
    let mut t = [0.0f64; 4];
    for i in 0..ctx.len() {
        // S_W^{-1} applied to the woven vector i: the cached canonical dual.
        let dual = ctx.dual_family().vector(i);
        let with_gs = inner(&g_sigma, dual).norm_sqr();
        let with_gsc = inner(&g_sigma_c, dual).norm_sqr();
        if ctx.sigma().contains(i) {
            t[0] += with_gs;
            t[2] += with_gsc;
        } else {
            t[1] += with_gs;
            t[3] += with_gsc;
        }
    }
    WeavingTerms {
        nf2: f.norm_squared(),
        a_sigma,
        a_sigma_c,
        g_sigma,
        g_sigma_c,
        t_gs_sigma: t[0],
        t_gs_sigma_c: t[1],
        t_gsc_sigma: t[2],
        t_gsc_sigma_c: t[3],
    }
}

/// The same quadratic forms evaluated through the cached operator matrices:
/// `form_* = <S_W^* f, f>` and `quad_* = <S_W^{-1} S_W^* f, S_W^* f>`.
/// The independent route for oracle cross-checks against [`weaving_terms`]
/// (where `quad_sigma = t_gs_sigma + t_gs_sigma_c`, etc.).
#[derive(Debug, Clone, Copy)]
pub struct OperatorRoute {
    pub form_sigma: f64,
    pub form_sigma_c: f64,
    pub quad_sigma: f64,
    pub quad_sigma_c: f64,
}

pub fn weaving_terms_via_operators(ctx: &WeavingContext, f: &CVector) -> OperatorRoute {
    let g1 = ctx.s_w_sigma() * f;
    let g2 = ctx.s_w_sigma_c() * f;
    OperatorRoute {
        form_sigma: inner(&g1, f).re,
        form_sigma_c: inner(&g2, f).re,
        quad_sigma: inner(&(ctx.s_w_inv() * &g1), &g1).re,
        quad_sigma_c: inner(&(ctx.s_w_inv() * &g2), &g2).re,
    }
}

// ---------------------------------------------------------------------------
// Weaving theorems
// ---------------------------------------------------------------------------

/// Parseval-weaving identity. Requires the weaving at this partition to be
/// Parseval (`||S_W - I||_F <= 1e-8`): then
/// `sum_sigma |<f,phi_i>|^2 + ||sum_sigma_c <f,psi_i> psi_i||^2` equals its
/// sigma/sigma^c mirror and both are at least `(3/4) ||f||^2`.
pub fn thm_parseval_weaving(ctx: &WeavingContext, f: &CVector) -> Result<IdentityRecord> {
    let deviation = ctx.parseval_deviation();
    if deviation > PARSEVAL_TOL {
        return Err(Error::NotParsevalWeaving { deviation });
    }
    Ok(thm_parseval_weaving_with(ctx, &weaving_terms(ctx, f)))
}

pub(crate) fn thm_parseval_weaving_with(ctx: &WeavingContext, w: &WeavingTerms) -> IdentityRecord {
    let lhs = w.a_sigma + w.g_sigma_c.norm_squared();
    let rhs = w.a_sigma_c + w.g_sigma.norm_squared();
    let bound = 0.75 * w.nf2;
    let mut terms = BTreeMap::new();
    terms.insert("lhs", Term::Real(lhs));
    terms.insert("rhs", Term::Real(rhs));
    terms.insert("lower_bound", Term::Real(bound));
    build_record(
        "parseval_weaving",
        None,
        Some(ctx.sigma()),
        terms,
        (lhs - rhs).abs(),
        &[lhs - bound],
        &[lhs, rhs, bound, w.nf2],
    )
}

/// General weaving identity with lambda-dependent lower bound:
/// the sigma coefficient sum plus the two `S_W^{sigma^c}`-transported sums
/// equals the mirrored expression with `S_W^{sigma}`, and both dominate
/// `(lambda - lambda^2/4) sum_sigma + (1 - lambda^2/4) sum_sigma_c`.
pub fn thm_general_weaving(ctx: &WeavingContext, f: &CVector, lambda: f64) -> IdentityRecord {
    thm_general_weaving_with(ctx, &weaving_terms(ctx, f), lambda)
}

pub(crate) fn thm_general_weaving_with(
    ctx: &WeavingContext,
    w: &WeavingTerms,
    lambda: f64,
) -> IdentityRecord {
    let lhs = w.a_sigma + w.t_gsc_sigma + w.t_gsc_sigma_c;
    let rhs = w.a_sigma_c + w.t_gs_sigma + w.t_gs_sigma_c;
    let bound =
        (lambda - lambda * lambda / 4.0) * w.a_sigma + (1.0 - lambda * lambda / 4.0) * w.a_sigma_c;
    let mut terms = BTreeMap::new();
    terms.insert("lhs", Term::Real(lhs));
    terms.insert("rhs", Term::Real(rhs));
    terms.insert("lower_bound", Term::Real(bound));
    terms.insert("sum_sigma", Term::Real(w.a_sigma));
    terms.insert("sum_sigma_c", Term::Real(w.a_sigma_c));
    build_record(
        "general_weaving",
        Some(lambda),
        Some(ctx.sigma()),
        terms,
        (lhs - rhs).abs(),
        &[lhs - bound],
        &[lhs, rhs, bound, w.a_sigma + w.a_sigma_c],
    )
}

/// Two-sided positivity bound: the sigma coefficient sum minus the two
/// `S_W^{sigma}`-transported sums lies in `[0, (lambda^2/4) sum_sigma_c +
/// (1-lambda/2)^2 sum_sigma]`.
pub fn thm_sandwich(ctx: &WeavingContext, f: &CVector, lambda: f64) -> IdentityRecord {
    thm_sandwich_with(ctx, &weaving_terms(ctx, f), lambda)
}

pub(crate) fn thm_sandwich_with(
    ctx: &WeavingContext,
    w: &WeavingTerms,
    lambda: f64,
) -> IdentityRecord {
    let middle = w.a_sigma - w.t_gs_sigma - w.t_gs_sigma_c;
    let upper = lambda * lambda / 4.0 * w.a_sigma_c
        + (1.0 - lambda / 2.0) * (1.0 - lambda / 2.0) * w.a_sigma;
    let mut terms = BTreeMap::new();
    terms.insert("middle", Term::Real(middle));
    terms.insert("lower_bound", Term::Real(0.0));
    terms.insert("upper_bound", Term::Real(upper));
    build_record(
        "sandwich_bound",
        Some(lambda),
        Some(ctx.sigma()),
        terms,
        0.0,
        &[middle, upper - middle],
        &[w.a_sigma, w.a_sigma_c, middle, upper],
    )
}

/// Two-sided bound on the sum of all four transported sums:
/// `(2 lambda - lambda^2/2 - 1) sum_sigma + (1 - lambda^2/2) sum_sigma_c
///  <= middle <= sum_sigma + sum_sigma_c`.
pub fn thm_double(ctx: &WeavingContext, f: &CVector, lambda: f64) -> IdentityRecord {
    thm_double_with(ctx, &weaving_terms(ctx, f), lambda)
}

pub(crate) fn thm_double_with(
    ctx: &WeavingContext,
    w: &WeavingTerms,
    lambda: f64,
) -> IdentityRecord {
    let middle = w.t_gs_sigma + w.t_gs_sigma_c + w.t_gsc_sigma + w.t_gsc_sigma_c;
    let lower = (2.0 * lambda - lambda * lambda / 2.0 - 1.0) * w.a_sigma
        + (1.0 - lambda * lambda / 2.0) * w.a_sigma_c;
    let upper = w.a_sigma + w.a_sigma_c;
    let mut terms = BTreeMap::new();
    terms.insert("middle", Term::Real(middle));
    terms.insert("lower_bound", Term::Real(lower));
    terms.insert("upper_bound", Term::Real(upper));
    build_record(
        "double_bound",
        Some(lambda),
        Some(ctx.sigma()),
        terms,
        0.0,
        &[middle - lower, upper - middle],
        &[middle, lower, upper],
    )
}

/// Both inequality chains for an A-tight weaving (`||S_W - A I||_F <= 1e-8 A`).
///
/// Chain 1: `0 <= A sum_sigma - ||g_sigma||^2
///             <= (A lambda^2/4) sum_sigma_c + (1-lambda/2)^2 A sum_sigma`.
/// Chain 2: `(2 lambda - lambda^2/2 - 1) A sum_sigma + (1-lambda^2/2) A sum_sigma_c
///             <= ||g_sigma||^2 + ||g_sigma_c||^2 <= A^2 ||f||^2`.
///
/// With `S_W = A I` the chain-2 middle is A times the transported middle of
/// [`thm_double`], whose ceiling is `<S_W f, f> = A ||f||^2`; scaling by A
/// gives `A^2 ||f||^2`, attained at sigma = full set.
pub fn cor_tight(
    ctx: &WeavingContext,
    f: &CVector,
    lambda: f64,
    tight_constant: f64,
) -> Result<IdentityRecord> {
    let w = weaving_terms(ctx, f);
    cor_tight_with(ctx, &w, lambda, tight_constant)
}

pub(crate) fn cor_tight_with(
    ctx: &WeavingContext,
    w: &WeavingTerms,
    lambda: f64,
    tight_constant: f64,
) -> Result<IdentityRecord> {
    let a = tight_constant;
    let d = ctx.dim();
    let deviation = frob(&(ctx.s_w() - CMatrix::identity(d, d) * C64::new(a, 0.0)));
    if !a.is_finite() || a <= 0.0 || deviation > TIGHT_TOL * a {
        return Err(Error::NotTightWeaving { deviation });
    }
    let n_gs = w.g_sigma.norm_squared();
    let n_gsc = w.g_sigma_c.norm_squared();
    let chain1_middle = a * w.a_sigma - n_gs;
    let chain1_upper = a
        * (lambda * lambda / 4.0 * w.a_sigma_c
            + (1.0 - lambda / 2.0) * (1.0 - lambda / 2.0) * w.a_sigma);
    let chain2_middle = n_gs + n_gsc;
    let chain2_lower = a
        * ((2.0 * lambda - lambda * lambda / 2.0 - 1.0) * w.a_sigma
            + (1.0 - lambda * lambda / 2.0) * w.a_sigma_c);
    let chain2_upper = a * a * w.nf2;
    let mut terms = BTreeMap::new();
    terms.insert("chain1_middle", Term::Real(chain1_middle));
    terms.insert("chain1_upper", Term::Real(chain1_upper));
    terms.insert("chain2_lower", Term::Real(chain2_lower));
    terms.insert("chain2_middle", Term::Real(chain2_middle));
    terms.insert("chain2_upper", Term::Real(chain2_upper));
    Ok(build_record(
        "tight_chains",
        Some(lambda),
        Some(ctx.sigma()),
        terms,
        0.0,
        &[
            chain1_middle,
            chain1_upper - chain1_middle,
            chain2_middle - chain2_lower,
            chain2_upper - chain2_middle,
        ],
        &[chain1_middle, chain1_upper, chain2_lower, chain2_middle, chain2_upper],
    ))
}

// ---------------------------------------------------------------------------
// Alternate-dual context and theorems
// ---------------------------------------------------------------------------

/// A weaving together with a dual family theta and the cached dual-pairing
/// operators `E_sigma f = sum_{i in sigma} <f, theta_i> phi_i` and
/// `E_sigma_c f = sum_{i in sigma^c} <f, theta_i> psi_i`. With a weight
/// sequence, `E` carries the weights and `F` their complements, so that
/// `E_sigma + E_sigma_c + F_sigma + F_sigma_c = I` for a valid dual.
#[derive(Debug, Clone)]
pub struct AltDualContext {
    ctx: WeavingContext,
    theta: FrameFamily,
    e_sigma: CMatrix,
    e_sigma_c: CMatrix,
    weights: Option<Vec<C64>>,
    f_sigma: Option<CMatrix>,
    f_sigma_c: Option<CMatrix>,
    dual_residual: f64,
}

impl AltDualContext {
    /// Validated constructor: rejects theta whose operator residual exceeds
    /// [`DUAL_TOL`].
    pub fn new(ctx: &WeavingContext, theta: FrameFamily) -> Result<Self> {
        let adc = Self::new_unchecked(ctx, theta)?;
        if adc.dual_residual > DUAL_TOL {
            return Err(Error::InvalidDual { residual: adc.dual_residual });
        }
        Ok(adc)
    }

    /// Shape-checked only; used for negative controls where an invalid dual
    /// is evaluated on purpose.
    pub fn new_unchecked(ctx: &WeavingContext, theta: FrameFamily) -> Result<Self> {
        let dual_residual = crate::weaving::validate_alternate_dual(ctx, &theta)?;
        let (e_sigma, e_sigma_c) = pairing_operators(ctx, &theta, None);
        Ok(Self {
            ctx: ctx.clone(),
            theta,
            e_sigma,
            e_sigma_c,
            weights: None,
            f_sigma: None,
            f_sigma_c: None,
            dual_residual,
        })
    }

    /// Attach a bounded weight sequence; `E` becomes the weighted pairing and
    /// `F` the complementary one.
    pub fn with_weights(
        ctx: &WeavingContext,
        theta: FrameFamily,
        weights: Vec<C64>,
    ) -> Result<Self> {
        Self::new(ctx, theta)?.attach_weights(weights)
    }

    /// Rebuild the pairing operators of an existing context around weights.
    pub fn attach_weights(mut self, weights: Vec<C64>) -> Result<Self> {
        if weights.len() != self.ctx.len() {
            return Err(Error::DimMismatch { expected: self.ctx.len(), got: weights.len() });
        }
        if weights.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        let (e_sigma, e_sigma_c) = pairing_operators(&self.ctx, &self.theta, Some(&weights));
        let ones: Vec<C64> = weights.iter().map(|a| C64::new(1.0, 0.0) - a).collect();
        let (f_sigma, f_sigma_c) = pairing_operators(&self.ctx, &self.theta, Some(&ones));
        self.e_sigma = e_sigma;
        self.e_sigma_c = e_sigma_c;
        self.f_sigma = Some(f_sigma);
        self.f_sigma_c = Some(f_sigma_c);
        self.weights = Some(weights);
        Ok(self)
    }

    pub fn ctx(&self) -> &WeavingContext {
        &self.ctx
    }

    pub fn theta(&self) -> &FrameFamily {
        &self.theta
    }

    pub fn e_sigma(&self) -> &CMatrix {
        &self.e_sigma
    }

    pub fn e_sigma_c(&self) -> &CMatrix {
        &self.e_sigma_c
    }

    pub fn weights(&self) -> Option<&[C64]> {
        self.weights.as_deref()
    }

    /// Operator residual of theta as a dual of the weaving.
    pub fn dual_residual(&self) -> f64 {
        self.dual_residual
    }

    /// `||E_sigma + E_sigma_c (+ F_sigma + F_sigma_c) - I||_F / max(1, ...)`.
    pub fn resolution_residual(&self) -> f64 {
        let d = self.ctx.dim();
        let mut sum = &self.e_sigma + &self.e_sigma_c;
        if let (Some(fs), Some(fsc)) = (&self.f_sigma, &self.f_sigma_c) {
            sum += fs;
            sum += fsc;
        }
        frob(&(&sum - CMatrix::identity(d, d))) / frob(&sum).max(1.0)
    }
}

fn pairing_operators(
    ctx: &WeavingContext,
    theta: &FrameFamily,
    weights: Option<&[C64]>,
) -> (CMatrix, CMatrix) {
    let d = ctx.dim();
    let mut e_sigma = CMatrix::zeros(d, d);
    let mut e_sigma_c = CMatrix::zeros(d, d);
    for i in 0..ctx.len() {
        let a = weights.map_or(C64::new(1.0, 0.0), |w| w[i]);
        let th = theta.vector(i);
        if ctx.sigma().contains(i) {
            e_sigma += ctx.phi().vector(i) * th.adjoint() * a;
        } else {
            e_sigma_c += ctx.psi().vector(i) * th.adjoint() * a;
        }
    }
    (e_sigma, e_sigma_c)
}

/// Unweighted dual sums, direct summation.
#[derive(Debug, Clone)]
pub struct DualTerms {
    pub nf2: f64,
    /// `sum_{i in sigma} <f, theta_i> conj(<f, phi_i>)`.
    pub c_sigma: C64,
    /// `sum_{i in sigma^c} <f, theta_i> conj(<f, psi_i>)`.
    pub c_sigma_c: C64,
    /// `sum_{i in sigma} <f, theta_i> phi_i`.
    pub h_sigma: CVector,
    /// `sum_{i in sigma^c} <f, theta_i> psi_i`.
    pub h_sigma_c: CVector,
}

pub fn dual_terms(adc: &AltDualContext, f: &CVector) -> DualTerms {
    let ctx = &adc.ctx;
    let d = ctx.dim();
    let mut c_sigma = C64::new(0.0, 0.0);
    let mut c_sigma_c = C64::new(0.0, 0.0);
    let mut h_sigma = CVector::zeros(d);
    let mut h_sigma_c = CVector::zeros(d);
    for i in 0..ctx.len() {
        let c = inner(f, adc.theta.vector(i));
        if ctx.sigma().contains(i) {
            let v = ctx.phi().vector(i);
            c_sigma += c * inner(f, v).conj();
            h_sigma += v * c;
        } else {
            let v = ctx.psi().vector(i);
            c_sigma_c += c * inner(f, v).conj();
            h_sigma_c += v * c;
        }
    }
    DualTerms { nf2: f.norm_squared(), c_sigma, c_sigma_c, h_sigma, h_sigma_c }
}

/// Dual sums through the cached pairing operators, for oracle cross-checks:
/// `(<E_sigma f, f>, <E_sigma_c f, f>, ||E_sigma f||^2, ||E_sigma_c f||^2)`.
pub fn dual_terms_via_operators(adc: &AltDualContext, f: &CVector) -> (C64, C64, f64, f64) {
    let e1 = &adc.e_sigma * f;
    let e2 = &adc.e_sigma_c * f;
    (inner(&e1, f), inner(&e2, f), e1.norm_squared(), e2.norm_squared())
}

/// Real-part dual identity with lambda-dependent bound:
/// `Re(c_sigma) + ||h_sigma_c||^2 = Re(c_sigma_c) + ||h_sigma||^2
///   >= (2 lambda - lambda^2) Re(c_sigma) + (1 - lambda^2) Re(c_sigma_c)`.
pub fn thm_altdual_re(adc: &AltDualContext, f: &CVector, lambda: f64) -> Result<IdentityRecord> {
    if adc.weights.is_some() {
        return Err(Error::WeightsMismatch { expected: false });
    }
    Ok(thm_altdual_re_with(adc, &dual_terms(adc, f), lambda))
}

pub(crate) fn thm_altdual_re_with(
    adc: &AltDualContext,
    t: &DualTerms,
    lambda: f64,
) -> IdentityRecord {
    let lhs = t.c_sigma.re + t.h_sigma_c.norm_squared();
    let rhs = t.c_sigma_c.re + t.h_sigma.norm_squared();
    let bound = (2.0 * lambda - lambda * lambda) * t.c_sigma.re
        + (1.0 - lambda * lambda) * t.c_sigma_c.re;
    let mut terms = BTreeMap::new();
    terms.insert("lhs", Term::Real(lhs));
    terms.insert("rhs", Term::Real(rhs));
    terms.insert("lower_bound", Term::Real(bound));
    build_record(
        "altdual_re",
        Some(lambda),
        Some(adc.ctx.sigma()),
        terms,
        (lhs - rhs).abs(),
        &[lhs - bound],
        &[lhs, rhs, bound, t.nf2],
    )
}

/// Complex dual identity (no real parts, no bound):
/// `c_sigma + ||h_sigma_c||^2 = conj(c_sigma_c) + ||h_sigma||^2`.
pub fn thm_altdual_complex(adc: &AltDualContext, f: &CVector) -> Result<IdentityRecord> {
    if adc.weights.is_some() {
        return Err(Error::WeightsMismatch { expected: false });
    }
    Ok(thm_altdual_complex_with(adc, &dual_terms(adc, f)))
}

pub(crate) fn thm_altdual_complex_with(adc: &AltDualContext, t: &DualTerms) -> IdentityRecord {
    let lhs = t.c_sigma + C64::new(t.h_sigma_c.norm_squared(), 0.0);
    let rhs = t.c_sigma_c.conj() + C64::new(t.h_sigma.norm_squared(), 0.0);
    let mut terms = BTreeMap::new();
    terms.insert("lhs", Term::from(lhs));
    terms.insert("rhs", Term::from(rhs));
    build_record(
        "altdual_complex",
        None,
        Some(adc.ctx.sigma()),
        terms,
        (lhs - rhs).norm(),
        &[],
        &[lhs.norm(), rhs.norm(), t.nf2],
    )
}

/// Weighted six-term dual identity for a bounded weight sequence `a`:
/// the two weighted coefficient sums plus `||F f||^2` equal `||E f||^2` plus
/// the two conjugated complementary sums, where `E`/`F` synthesize with
/// weights `a_i` / `1 - a_i`.
pub fn thm_altdual_weighted(adc: &AltDualContext, f: &CVector) -> Result<IdentityRecord> {
    let Some(weights) = adc.weights.as_deref() else {
        return Err(Error::WeightsMismatch { expected: true });
    };
    let ctx = &adc.ctx;
    let d = ctx.dim();
    let mut wc_sigma = C64::new(0.0, 0.0);
    let mut wc_sigma_c = C64::new(0.0, 0.0);
    let mut fc_sigma = C64::new(0.0, 0.0);
    let mut fc_sigma_c = C64::new(0.0, 0.0);
    let mut e_vec = CVector::zeros(d);
    let mut f_vec = CVector::zeros(d);
    let one = C64::new(1.0, 0.0);
    for (i, &a) in weights.iter().enumerate() {
        let c = inner(f, adc.theta.vector(i));
        let v =
            if ctx.sigma().contains(i) { ctx.phi().vector(i) } else { ctx.psi().vector(i) };
        let b = inner(f, v).conj();
        e_vec += v * (a * c);
        f_vec += v * ((one - a) * c);
        if ctx.sigma().contains(i) {
            wc_sigma += a * c * b;
            fc_sigma += (one - a) * c * b;
        } else {
            wc_sigma_c += a * c * b;
            fc_sigma_c += (one - a) * c * b;
        }
    }
    let lhs = wc_sigma + wc_sigma_c + C64::new(f_vec.norm_squared(), 0.0);
    let rhs = C64::new(e_vec.norm_squared(), 0.0) + fc_sigma.conj() + fc_sigma_c.conj();
    let mut terms = BTreeMap::new();
    terms.insert("lhs", Term::from(lhs));
    terms.insert("rhs", Term::from(rhs));
    terms.insert("weighted_sum_sigma", Term::from(wc_sigma));
    terms.insert("weighted_sum_sigma_c", Term::from(wc_sigma_c));
    terms.insert("complement_norm2", Term::Real(f_vec.norm_squared()));
    terms.insert("weighted_norm2", Term::Real(e_vec.norm_squared()));
    Ok(build_record(
        "altdual_weighted",
        None,
        Some(ctx.sigma()),
        terms,
        (lhs - rhs).norm(),
        &[],
        &[lhs.norm(), rhs.norm(), f.norm_squared()],
    ))
}
