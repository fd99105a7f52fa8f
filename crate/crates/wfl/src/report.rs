//! The verification engine behind `verify` and `sweep-lambda`: certify the
//! pair, then run every applicable identity over the partition scope, the
//! lambda grid, and seeded random unit test vectors, aggregating residuals,
//! slacks, and failure witnesses into a machine-readable [`Report`].
//!
//! Replay contract: the report is a pure function of (frames, config) except
//! for its `timestamp` field. Evaluation tuples are distributed across worker
//! threads, but aggregation is order-fixed, so the output does not depend on
//! the worker count.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::frames::FrameFamily;
use crate::generators::RNG_ID;
use crate::identities::{
    self, cor_tight_with, dual_terms, lemma_cross_bound, lemma_operator_identity,
    lemma_quadratic_bound, thm_altdual_complex_with, thm_altdual_re_with, thm_altdual_weighted,
    thm_double_with, thm_general_weaving_with, thm_parseval_weaving_with, thm_sandwich_with,
    weaving_terms, AltDualContext, IdentityRecord, PARSEVAL_TOL, TIGHT_TOL,
};
use crate::linalg::{CVector, C64};
use crate::weaving::{
    canonical_weaving_dual, random_alternate_dual, woven_bounds_bruteforce, woven_bounds_sampled,
    PartitionMask, WeavingContext, WovenCertificate, DEFAULT_MAX_N,
};

/// Report schema version.
pub const REPORT_SCHEMA: u32 = 1;

/// Partition scope of a verification run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SigmaMode {
    /// Every partition (2^n of them; guarded by `max_n`).
    All,
    /// A seeded sample of distinct partitions, for n too large to enumerate.
    /// The certificate is then labeled incomplete.
    Random(usize),
}

impl SigmaMode {
    pub fn parse(s: &str) -> Result<Self> {
        if s == "all" {
            return Ok(SigmaMode::All);
        }
        if let Some(k) = s.strip_prefix("random:") {
            let k: usize = k
                .parse()
                .map_err(|_| Error::Config(format!("invalid sigma mode {s:?}")))?;
            if k == 0 {
                return Err(Error::Config("random sigma sample must be nonempty".into()));
            }
            return Ok(SigmaMode::Random(k));
        }
        Err(Error::Config(format!("invalid sigma mode {s:?} (use \"all\" or \"random:K\")")))
    }
}

impl std::fmt::Display for SigmaMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SigmaMode::All => f.write_str("all"),
            SigmaMode::Random(k) => write!(f, "random:{k}"),
        }
    }
}

impl Serialize for SigmaMode {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Everything a verification run depends on besides the two frames.
#[derive(Debug, Clone, Serialize)]
pub struct VerifyConfig {
    /// Source labels echoed into the report (file paths or generator specs).
    pub phi_source: String,
    pub psi_source: String,
    /// Random unit vectors per (partition, lambda) cell.
    pub trials: usize,
    pub lambdas: Vec<f64>,
    pub sigma_mode: SigmaMode,
    pub eq_tol: f64,
    pub ineq_tol: f64,
    pub seed: u64,
    /// Cap on exhaustive partition enumeration.
    pub max_n: usize,
    /// Also evaluate the operator lemmas on `S_W^{-1/2} S_W^sigma S_W^{-1/2}`
    /// (the normalized summand the proofs pass through); used by the lambda
    /// sweep.
    pub include_lemmas: bool,
    /// Negative control: corrupt one dual vector and evaluate anyway.
    pub corrupt_dual: bool,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            phi_source: String::new(),
            psi_source: String::new(),
            trials: 20,
            lambdas: identities::DEFAULT_LAMBDA_GRID.to_vec(),
            sigma_mode: SigmaMode::All,
            eq_tol: identities::EQ_TOL,
            ineq_tol: identities::INEQ_TOL,
            seed: 0,
            max_n: DEFAULT_MAX_N,
            include_lemmas: false,
            corrupt_dual: false,
        }
    }
}

impl VerifyConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials < 1 {
            return Err(Error::Config("trials must be >= 1".into()));
        }
        if self.lambdas.is_empty() {
            return Err(Error::Config("lambda grid is empty".into()));
        }
        if self.lambdas.iter().any(|x| !x.is_finite()) {
            return Err(Error::Config("lambda grid contains non-finite values".into()));
        }
        let tol_ok = |t: f64| t.is_finite() && t > 0.0;
        if !tol_ok(self.eq_tol) || !tol_ok(self.ineq_tol) {
            return Err(Error::Config("tolerances must be positive".into()));
        }
        Ok(())
    }
}

/// A record that failed, with everything needed to replay it.
#[derive(Debug, Clone, Serialize)]
pub struct FailureWitness {
    pub sigma: PartitionMask,
    pub lambda: Option<f64>,
    pub trial: usize,
    /// Which dual the record used, when applicable.
    pub dual: Option<&'static str>,
    /// The test vector, `[re, im]` per entry.
    pub f: Vec<[f64; 2]>,
    pub residual: f64,
    pub slack: Option<f64>,
}

/// Worst-case statistics for one theorem across the whole run.
#[derive(Debug, Clone, Serialize, Default)]
pub struct TheoremAggregate {
    pub count: u64,
    pub max_residual: f64,
    pub min_slack: Option<f64>,
    pub failures: Vec<FailureWitness>,
}

impl TheoremAggregate {
    fn absorb(&mut self, residual: f64, slack: Option<f64>) {
        self.count += 1;
        self.max_residual = self.max_residual.max(residual);
        if let Some(s) = slack {
            self.min_slack = Some(self.min_slack.map_or(s, |m| m.min(s)));
        }
    }
}

/// One row of the lambda-sweep CSV.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub lambda: Option<f64>,
    pub theorem: &'static str,
    pub min_slack: Option<f64>,
    pub max_residual: f64,
    pub trials: u64,
}

/// Self-contained verification output.
#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub schema: u32,
    pub timestamp: String,
    pub rng: &'static str,
    pub config: VerifyConfig,
    pub dim: usize,
    pub count: usize,
    pub certificate: WovenCertificate,
    /// True when the certificate covered all 2^n partitions; a sampled run
    /// is explicitly flagged incomplete.
    pub certificate_complete: bool,
    pub theorems: BTreeMap<&'static str, TheoremAggregate>,
    pub overall_pass: bool,
}

type SweepCells = BTreeMap<(&'static str, Option<u64>), (u64, f64, Option<f64>)>;

pub struct VerifyOutcome {
    pub report: Report,
    pub sweep: Vec<SweepRow>,
}

// Deterministic per-tuple seed derivation (splitmix64 chain).
fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e3779b97f4a7c15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

fn mix(parts: &[u64]) -> u64 {
    let mut h = 0u64;
    for &p in parts {
        h = splitmix64(h ^ p);
    }
    h
}

/// Uniform on the unit sphere of C^d: normalized i.i.d. complex Gaussians.
fn random_unit_vector(seed: u64, d: usize) -> CVector {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    loop {
        let v = CVector::from_fn(d, |_, _| {
            C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
        });
        let norm = v.norm();
        if norm > 1e-150 {
            return v / C64::new(norm, 0.0);
        }
    }
}

fn sample_partitions(n: usize, k: usize, seed: u64) -> Vec<PartitionMask> {
    if n < 64 && (k as u128) >= (1u128 << n) {
        return (0..1u64 << n).map(|c| PartitionMask::from_counter(c, n)).collect();
    }
    let mut rng = ChaCha12Rng::seed_from_u64(mix(&[seed, 0x5160_3a00]));
    let mut seen = std::collections::BTreeSet::new();
    let mut masks = Vec::with_capacity(k);
    let mut attempts = 0usize;
    while masks.len() < k && attempts < 64 * k {
        attempts += 1;
        let bits: Vec<bool> = (0..n).map(|_| rng.random::<bool>()).collect();
        let mask = PartitionMask::from_bits(bits);
        if seen.insert(mask.bitstring()) {
            masks.push(mask);
        }
    }
    masks.sort_by_key(|m| m.bitstring());
    masks
}

const DUAL_KINDS: [&str; 2] = ["canonical", "random"];

struct PartitionOutcome {
    stats: BTreeMap<&'static str, TheoremAggregate>,
    sweep: SweepCells,
}

fn absorb_record(
    out: &mut PartitionOutcome,
    cfg: &VerifyConfig,
    sigma: &PartitionMask,
    trial: usize,
    dual: Option<&'static str>,
    f: &CVector,
    rec: &IdentityRecord,
) {
    let agg = out.stats.entry(rec.theorem).or_default();
    agg.absorb(rec.equality_residual, rec.slack);
    if !rec.pass_at(cfg.eq_tol, cfg.ineq_tol) {
        agg.failures.push(FailureWitness {
            sigma: sigma.clone(),
            lambda: rec.lambda,
            trial,
            dual,
            f: f.iter().map(|z| [z.re, z.im]).collect(),
            residual: rec.equality_residual,
            slack: rec.slack,
        });
    }
    let key = (rec.theorem, rec.lambda.map(f64::to_bits));
    let cell = out.sweep.entry(key).or_insert((0, 0.0, None));
    cell.0 += 1;
    cell.1 = cell.1.max(rec.equality_residual);
    if let Some(s) = rec.slack {
        cell.2 = Some(cell.2.map_or(s, |m| m.min(s)));
    }
}

/// Shift one dual vector off the duality manifold (negative control).
fn corrupt_family(theta: &FrameFamily) -> FrameFamily {
    let mut vectors: Vec<CVector> = theta.iter().cloned().collect();
    vectors[0][0] += C64::new(0.5, 0.0);
    FrameFamily::new(theta.dim(), vectors).expect("corruption keeps entries finite")
}

fn evaluate_partition(
    phi: &FrameFamily,
    psi: &FrameFamily,
    sigma: &PartitionMask,
    cfg: &VerifyConfig,
) -> Result<PartitionOutcome> {
    let ctx = WeavingContext::new(phi, psi, sigma)?;
    let mut out =
        PartitionOutcome { stats: BTreeMap::new(), sweep: BTreeMap::new() };
    let sigma_counter = if sigma.len() < 64 {
        sigma.to_counter()
    } else {
        sigma.bitstring().bytes().fold(0x5151u64, |acc, b| splitmix64(acc ^ b as u64))
    };

    let parseval_ok = ctx.parseval_deviation() <= PARSEVAL_TOL;
    let (tight_a, tight_dev) = ctx.tightness();
    let tight_ok = tight_a > 0.0 && tight_dev <= TIGHT_TOL * tight_a;

    // Duals for the alternate-dual trio: canonical always, one seeded random
    // alternate dual when the family has excess vectors.
    let mut duals: Vec<(&'static str, AltDualContext)> = Vec::new();
    let canonical = canonical_weaving_dual(&ctx);
    let random_dual = if ctx.len() > ctx.dim() {
        Some(random_alternate_dual(&ctx, mix(&[cfg.seed, 0xD0A1, sigma_counter]))?)
    } else {
        None
    };
    if cfg.corrupt_dual {
        // Corrupt whichever dual exists last in the list so the trio fails.
        let base = random_dual.clone().unwrap_or_else(|| canonical.clone());
        duals.push(("canonical", AltDualContext::new(&ctx, canonical)?));
        duals.push(("random", AltDualContext::new_unchecked(&ctx, corrupt_family(&base))?));
    } else {
        duals.push(("canonical", AltDualContext::new(&ctx, canonical)?));
        if let Some(theta) = random_dual {
            duals.push(("random", AltDualContext::new(&ctx, theta)?));
        }
    }
    debug_assert!(duals.iter().all(|(k, _)| DUAL_KINDS.contains(k)));

    // One weighted context per dual, weights seeded per partition.
    let mut weighted: Vec<(&'static str, AltDualContext)> = Vec::new();
    {
        let mut rng = ChaCha12Rng::seed_from_u64(mix(&[cfg.seed, 0xA11A, sigma_counter]));
        for (kind, adc) in &duals {
            let weights: Vec<C64> = (0..ctx.len())
                .map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                .collect();
            weighted.push((kind, adc.clone().attach_weights(weights)?));
        }
    }

    // Normalized sigma summand the proofs route through; lemma rows evaluate
    // on it when requested.
    let lemma_operator = cfg
        .include_lemmas
        .then(|| ctx.s_w_inv_sqrt() * ctx.s_w_sigma() * ctx.s_w_inv_sqrt());
    if let Some(op) = &lemma_operator {
        let rec = lemma_operator_identity(op);
        let probe = CVector::zeros(ctx.dim());
        absorb_record(&mut out, cfg, sigma, 0, None, &probe, &rec);
    }

    for trial in 0..cfg.trials {
        let f = random_unit_vector(mix(&[cfg.seed, 0xF00D, sigma_counter, trial as u64]), ctx.dim());
        let w = weaving_terms(&ctx, &f);
        if parseval_ok {
            let rec = thm_parseval_weaving_with(&ctx, &w);
            absorb_record(&mut out, cfg, sigma, trial, None, &f, &rec);
        }
        for &lambda in &cfg.lambdas {
            let rec = thm_general_weaving_with(&ctx, &w, lambda);
            absorb_record(&mut out, cfg, sigma, trial, None, &f, &rec);
            let rec = thm_sandwich_with(&ctx, &w, lambda);
            absorb_record(&mut out, cfg, sigma, trial, None, &f, &rec);
            let rec = thm_double_with(&ctx, &w, lambda);
            absorb_record(&mut out, cfg, sigma, trial, None, &f, &rec);
            if tight_ok {
                let rec = cor_tight_with(&ctx, &w, lambda, tight_a)?;
                absorb_record(&mut out, cfg, sigma, trial, None, &f, &rec);
            }
            if let Some(op) = &lemma_operator {
                let rec = lemma_quadratic_bound(op, &f, lambda)?;
                absorb_record(&mut out, cfg, sigma, trial, None, &f, &rec);
                let rec = lemma_cross_bound(op, &f, lambda);
                absorb_record(&mut out, cfg, sigma, trial, None, &f, &rec);
            }
        }
        for (kind, adc) in &duals {
            let t = dual_terms(adc, &f);
            for &lambda in &cfg.lambdas {
                let rec = thm_altdual_re_with(adc, &t, lambda);
                absorb_record(&mut out, cfg, sigma, trial, Some(kind), &f, &rec);
            }
            let rec = thm_altdual_complex_with(adc, &t);
            absorb_record(&mut out, cfg, sigma, trial, Some(kind), &f, &rec);
        }
        for (kind, adc) in &weighted {
            let rec = thm_altdual_weighted(adc, &f)?;
            absorb_record(&mut out, cfg, sigma, trial, Some(kind), &f, &rec);
        }
    }
    Ok(out)
}

/// Run the full verification: certify, sweep, aggregate.
pub fn run_verify(phi: &FrameFamily, psi: &FrameFamily, cfg: &VerifyConfig) -> Result<VerifyOutcome> {
    cfg.validate()?;
    let n = phi.len();
    let (partitions, certificate) = match cfg.sigma_mode {
        SigmaMode::All => {
            let certificate = woven_bounds_bruteforce(phi, psi, cfg.max_n)?;
            let masks = (0..1u64 << n).map(|c| PartitionMask::from_counter(c, n)).collect();
            (masks, certificate)
        }
        SigmaMode::Random(k) => {
            let masks = sample_partitions(n, k, cfg.seed);
            let certificate = woven_bounds_sampled(phi, psi, &masks)?;
            (masks, certificate)
        }
    };

    let outcomes = partitions
        .par_iter()
        .map(|sigma| evaluate_partition(phi, psi, sigma, cfg))
        .collect::<Result<Vec<_>>>()?;

    let mut theorems: BTreeMap<&'static str, TheoremAggregate> = BTreeMap::new();
    let mut sweep_cells = SweepCells::new();
    for outcome in outcomes {
        for (name, agg) in outcome.stats {
            let total = theorems.entry(name).or_default();
            total.count += agg.count;
            total.max_residual = total.max_residual.max(agg.max_residual);
            total.min_slack = match (total.min_slack, agg.min_slack) {
                (Some(a), Some(b)) => Some(a.min(b)),
                (a, b) => a.or(b),
            };
            total.failures.extend(agg.failures);
        }
        for (key, (count, res, slack)) in outcome.sweep {
            let cell = sweep_cells.entry(key).or_insert((0, 0.0, None));
            cell.0 += count;
            cell.1 = cell.1.max(res);
            cell.2 = match (cell.2, slack) {
                (Some(a), Some(b)) => Some(a.min(b)),
                (a, b) => a.or(b),
            };
        }
    }
    for agg in theorems.values_mut() {
        agg.failures.sort_by(|a, b| {
            a.sigma
                .bitstring()
                .cmp(&b.sigma.bitstring())
                .then(
                    a.lambda
                        .unwrap_or(f64::NEG_INFINITY)
                        .total_cmp(&b.lambda.unwrap_or(f64::NEG_INFINITY)),
                )
                .then(a.trial.cmp(&b.trial))
                .then(a.dual.unwrap_or("").cmp(b.dual.unwrap_or("")))
        });
    }
    let overall_pass = theorems.values().all(|agg| agg.failures.is_empty());

    let mut sweep: Vec<SweepRow> = sweep_cells
        .into_iter()
        .map(|((theorem, lambda_bits), (count, max_residual, min_slack))| SweepRow {
            lambda: lambda_bits.map(f64::from_bits),
            theorem,
            min_slack,
            max_residual,
            trials: count,
        })
        .collect();
    sweep.sort_by(|a, b| {
        a.theorem.cmp(b.theorem).then(
            a.lambda
                .unwrap_or(f64::NEG_INFINITY)
                .total_cmp(&b.lambda.unwrap_or(f64::NEG_INFINITY)),
        )
    });

    let report = Report {
        schema: REPORT_SCHEMA,
        timestamp: chrono::Utc::now().to_rfc3339(),
        rng: RNG_ID,
        config: cfg.clone(),
        dim: phi.dim(),
        count: n,
        certificate_complete: certificate.is_complete(n),
        certificate,
        theorems,
        overall_pass,
    };
    Ok(VerifyOutcome { report, sweep })
}

/// Render sweep rows as CSV (missing lambda/slack cells stay empty).
pub fn sweep_to_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("lambda,theorem,min_slack,max_residual,trials\n");
    for row in rows {
        let lambda = row.lambda.map_or(String::new(), |x| x.to_string());
        let slack = row.min_slack.map_or(String::new(), |x| format!("{x:e}"));
        let _ = writeln!(
            out,
            "{lambda},{},{slack},{:e},{}",
            row.theorem, row.max_residual, row.trials
        );
    }
    out
}

/// Serialize a report with a stable layout.
pub fn report_to_json_string(report: &Report) -> String {
    serde_json::to_string_pretty(report).expect("report serialization is infallible")
}
