//! Weavings of two frames: index partitions, the woven family and its
//! operators, exhaustive woven-ness certification, and duals of a weaving.
//!
//! Two families are woven when *every* partition produces a frame with
//! universal bounds. At desk scale we certify this by enumerating all 2^n
//! partitions, so certificates are exact rather than sufficient-condition
//! approximations.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::frames::{FrameBounds, FrameFamily};
use crate::linalg::{
    frob, frob_scale, hermitian_eig, psd_transform_eig, CMatrix, CVector, PsdKind, C64, PD_TOL_REL,
};

/// Default cap on family size for exhaustive 2^n partition sweeps.
pub const DEFAULT_MAX_N: usize = 14;

/// Subset sigma of the index set {0..n-1}; the complement is always computed,
/// never stored.
///
/// The canonical text form is a bit string with one character per index,
/// position i reading '1' when i is in sigma (so `{0}` with n = 2 is `"10"`).
/// Enumeration order is binary counting on the equivalent integer whose bit i
/// is index i's membership.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PartitionMask {
    bits: Vec<bool>,
}

impl PartitionMask {
    pub fn empty(n: usize) -> Self {
        Self { bits: vec![false; n] }
    }

    pub fn full(n: usize) -> Self {
        Self { bits: vec![true; n] }
    }

    pub fn from_bits(bits: Vec<bool>) -> Self {
        Self { bits }
    }

    pub fn from_indices(n: usize, indices: &[usize]) -> Self {
        let mut bits = vec![false; n];
        for &i in indices {
            bits[i] = true;
        }
        Self { bits }
    }

    /// Mask whose membership of index i is bit i of `counter`. Requires n <= 63.
    pub fn from_counter(counter: u64, n: usize) -> Self {
        debug_assert!(n < 64);
        Self { bits: (0..n).map(|i| counter >> i & 1 == 1).collect() }
    }

    /// Inverse of [`PartitionMask::from_counter`].
    pub fn to_counter(&self) -> u64 {
        debug_assert!(self.bits.len() < 64);
        self.bits
            .iter()
            .enumerate()
            .fold(0u64, |acc, (i, &b)| if b { acc | 1 << i } else { acc })
    }

    /// Number of indices (n), not the subset size.
    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.bits[i]
    }

    /// Subset cardinality |sigma|.
    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn complement(&self) -> Self {
        Self { bits: self.bits.iter().map(|&b| !b).collect() }
    }

    pub fn bitstring(&self) -> String {
        self.bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
    }

    pub fn from_bitstring(s: &str) -> Result<Self> {
        let mut bits = Vec::with_capacity(s.len());
        for c in s.chars() {
            match c {
                '0' => bits.push(false),
                '1' => bits.push(true),
                _ => return Err(Error::Config(format!("invalid mask character {c:?}"))),
            }
        }
        Ok(Self { bits })
    }
}

impl std::fmt::Display for PartitionMask {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.bitstring())
    }
}

impl Serialize for PartitionMask {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.bitstring())
    }
}

impl<'de> Deserialize<'de> for PartitionMask {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        PartitionMask::from_bitstring(&s).map_err(D::Error::custom)
    }
}

/// The weaving: phi_i where i is in sigma, psi_i elsewhere, index positions
/// preserved.
pub fn weave(phi: &FrameFamily, psi: &FrameFamily, sigma: &PartitionMask) -> Result<FrameFamily> {
    if phi.dim() != psi.dim() || phi.len() != psi.len() {
        return Err(Error::ShapeMismatch {
            left: (phi.dim(), phi.len()),
            right: (psi.dim(), psi.len()),
        });
    }
    if sigma.len() != phi.len() {
        return Err(Error::DimMismatch { expected: phi.len(), got: sigma.len() });
    }
    let vectors = (0..phi.len())
        .map(|i| if sigma.contains(i) { phi.vector(i).clone() } else { psi.vector(i).clone() })
        .collect();
    FrameFamily::new(phi.dim(), vectors)
}

/// A woven pair at one partition, with every operator the identities need
/// cached: the weaving operator, its sigma/sigma-complement summands, its
/// inverse and square roots, and the canonical dual of the weaving.
#[derive(Debug, Clone)]
pub struct WeavingContext {
    phi: FrameFamily,
    psi: FrameFamily,
    sigma: PartitionMask,
    woven: FrameFamily,
    s_w: CMatrix,
    s_w_sigma: CMatrix,
    s_w_sigma_c: CMatrix,
    s_w_inv: CMatrix,
    s_w_sqrt: CMatrix,
    s_w_inv_sqrt: CMatrix,
    bounds: FrameBounds,
    dual: FrameFamily,
}

impl WeavingContext {
    /// Errors with [`Error::NotWovenAtPartition`] when this particular weaving
    /// fails to be a frame.
    pub fn new(phi: &FrameFamily, psi: &FrameFamily, sigma: &PartitionMask) -> Result<Self> {
        let woven = weave(phi, psi, sigma)?;
        let s_w = woven.frame_operator();
        let eig = hermitian_eig(&s_w)?;
        let min = eig.min_eigenvalue();
        if woven.len() < woven.dim() || min <= PD_TOL_REL * eig.max_eigenvalue() {
            return Err(Error::NotWovenAtPartition {
                sigma: sigma.bitstring(),
                min_eigenvalue: min,
            });
        }
        let s_w_inv = psd_transform_eig(&eig, PsdKind::Inverse)?;
        let s_w_sqrt = psd_transform_eig(&eig, PsdKind::Sqrt)?;
        let s_w_inv_sqrt = psd_transform_eig(&eig, PsdKind::InvSqrt)?;
        let dual = woven.mapped(&s_w_inv);
        Ok(Self {
            s_w_sigma: phi.partial_frame_operator(sigma),
            s_w_sigma_c: psi.partial_frame_operator(&sigma.complement()),
            phi: phi.clone(),
            psi: psi.clone(),
            sigma: sigma.clone(),
            woven,
            s_w,
            s_w_inv,
            s_w_sqrt,
            s_w_inv_sqrt,
            bounds: FrameBounds { lower: min, upper: eig.max_eigenvalue() },
            dual,
        })
    }

    pub fn phi(&self) -> &FrameFamily {
        &self.phi
    }

    pub fn psi(&self) -> &FrameFamily {
        &self.psi
    }

    pub fn sigma(&self) -> &PartitionMask {
        &self.sigma
    }

    /// The woven family itself.
    pub fn woven(&self) -> &FrameFamily {
        &self.woven
    }

    pub fn dim(&self) -> usize {
        self.phi.dim()
    }

    pub fn len(&self) -> usize {
        self.phi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phi.is_empty()
    }

    pub fn s_w(&self) -> &CMatrix {
        &self.s_w
    }

    pub fn s_w_sigma(&self) -> &CMatrix {
        &self.s_w_sigma
    }

    pub fn s_w_sigma_c(&self) -> &CMatrix {
        &self.s_w_sigma_c
    }

    pub fn s_w_inv(&self) -> &CMatrix {
        &self.s_w_inv
    }

    pub fn s_w_sqrt(&self) -> &CMatrix {
        &self.s_w_sqrt
    }

    pub fn s_w_inv_sqrt(&self) -> &CMatrix {
        &self.s_w_inv_sqrt
    }

    /// Frame bounds of this particular weaving.
    pub fn bounds(&self) -> FrameBounds {
        self.bounds
    }

    /// Canonical dual vectors of the weaving, `S_W^{-1} w_i`.
    pub fn dual_family(&self) -> &FrameFamily {
        &self.dual
    }

    /// `||S_W - I||_F`: zero exactly when this weaving is Parseval.
    pub fn parseval_deviation(&self) -> f64 {
        let d = self.dim();
        frob(&(&self.s_w - CMatrix::identity(d, d)))
    }

    /// `||S_W - a I||_F` for the best real `a` (the mean eigenvalue), together
    /// with that `a`. Small deviation means the weaving is a-tight.
    pub fn tightness(&self) -> (f64, f64) {
        let d = self.dim();
        let a = self.s_w.diagonal().iter().map(|z| z.re).sum::<f64>() / d as f64;
        let dev = frob(&(&self.s_w - CMatrix::identity(d, d) * C64::new(a, 0.0)));
        (a, dev)
    }
}

/// Exact universal bounds from an exhaustive partition sweep.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WovenCertificate {
    /// Universal lower bound: the minimum over all checked partitions of the
    /// weaving's smallest frame-operator eigenvalue.
    #[serde(rename = "A")]
    pub universal_lower: f64,
    /// Universal upper bound: the maximum of the largest eigenvalues.
    #[serde(rename = "B")]
    pub universal_upper: f64,
    /// First partition (in counting order) attaining the lower bound.
    pub witness_lower: PartitionMask,
    /// First partition attaining the upper bound.
    pub witness_upper: PartitionMask,
    /// Number of partitions inspected; the certificate is exhaustive only
    /// when this equals 2^n.
    pub checked: u64,
    /// Partitions whose smallest eigenvalue sat within 10x the
    /// positive-definiteness floor: technically frames, flagged rather than
    /// silently classified.
    pub borderline: u64,
}

impl WovenCertificate {
    pub fn is_complete(&self, n: usize) -> bool {
        n < 64 && self.checked == 1u64 << n
    }

    pub fn is_tight(&self, tol: f64) -> bool {
        (self.universal_upper - self.universal_lower).abs() <= tol * self.universal_upper.max(1.0)
    }
}

struct SweepEntry {
    counter: u64,
    min: f64,
    max: f64,
    frame: bool,
    borderline: bool,
}

fn sweep_partition(phi: &FrameFamily, psi: &FrameFamily, counter: u64) -> Result<SweepEntry> {
    let sigma = PartitionMask::from_counter(counter, phi.len());
    let woven = weave(phi, psi, &sigma)?;
    let eig = hermitian_eig(&woven.frame_operator())?;
    let (min, max) = (eig.min_eigenvalue(), eig.max_eigenvalue());
    if !min.is_finite() || !max.is_finite() {
        return Err(Error::NonFinite);
    }
    let floor = PD_TOL_REL * max;
    Ok(SweepEntry {
        counter,
        min,
        max,
        frame: woven.len() >= woven.dim() && min > floor,
        borderline: min > floor && min <= 10.0 * floor,
    })
}

/// Certify woven-ness by checking all 2^n partitions.
///
/// Returns the exact universal bounds with witness partitions, or
/// [`Error::NotWoven`] carrying the first failing partition in counting
/// order. The sweep runs in parallel; the result does not depend on the
/// worker count.
pub fn woven_bounds_bruteforce(
    phi: &FrameFamily,
    psi: &FrameFamily,
    max_n: usize,
) -> Result<WovenCertificate> {
    if phi.dim() != psi.dim() || phi.len() != psi.len() {
        return Err(Error::ShapeMismatch {
            left: (phi.dim(), phi.len()),
            right: (psi.dim(), psi.len()),
        });
    }
    let n = phi.len();
    if n > max_n || n >= 64 {
        return Err(Error::TooLarge { n, max_n: max_n.min(63) });
    }
    let total = 1u64 << n;
    let entries = (0..total)
        .into_par_iter()
        .map(|counter| sweep_partition(phi, psi, counter))
        .collect::<Result<Vec<_>>>()?;
    summarize_sweep(&entries, total)
}

fn summarize_sweep(entries: &[SweepEntry], checked: u64) -> Result<WovenCertificate> {
    if let Some(bad) = entries.iter().find(|e| !e.frame) {
        return Err(Error::NotWoven {
            witness: PartitionMask::from_counter(bad.counter, mask_len(entries)).bitstring(),
        });
    }
    let n = mask_len(entries);
    let lo = entries
        .iter()
        .min_by(|a, b| a.min.total_cmp(&b.min).then(a.counter.cmp(&b.counter)))
        .expect("sweep covers at least the empty partition");
    let hi = entries
        .iter()
        .max_by(|a, b| a.max.total_cmp(&b.max).then(b.counter.cmp(&a.counter)))
        .expect("sweep covers at least the empty partition");
    Ok(WovenCertificate {
        universal_lower: lo.min,
        universal_upper: hi.max,
        witness_lower: PartitionMask::from_counter(lo.counter, n),
        witness_upper: PartitionMask::from_counter(hi.counter, n),
        checked,
        borderline: entries.iter().filter(|e| e.borderline).count() as u64,
    })
}

fn mask_len(entries: &[SweepEntry]) -> usize {
    // The sweep enumerates 2^n counters; recover n from the count.
    entries.len().next_power_of_two().trailing_zeros() as usize
}

/// Certificate restricted to an explicit partition list (used when n is too
/// large to enumerate; the result is labeled incomplete via `checked`).
pub fn woven_bounds_sampled(
    phi: &FrameFamily,
    psi: &FrameFamily,
    partitions: &[PartitionMask],
) -> Result<WovenCertificate> {
    let mut entries = Vec::with_capacity(partitions.len());
    let mut borderline = 0u64;
    for sigma in partitions {
        let woven = weave(phi, psi, sigma)?;
        let eig = hermitian_eig(&woven.frame_operator())?;
        let (min, max) = (eig.min_eigenvalue(), eig.max_eigenvalue());
        if !min.is_finite() || !max.is_finite() {
            return Err(Error::NonFinite);
        }
        let floor = PD_TOL_REL * max;
        if !(woven.len() >= woven.dim() && min > floor) {
            return Err(Error::NotWoven { witness: sigma.bitstring() });
        }
        if min <= 10.0 * floor {
            borderline += 1;
        }
        entries.push((sigma, min, max));
    }
    let (lo_sigma, lo, _) = entries
        .iter()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .ok_or_else(|| Error::Config("empty partition sample".into()))?;
    let (hi_sigma, _, hi) = entries
        .iter()
        .max_by(|a, b| a.2.total_cmp(&b.2))
        .ok_or_else(|| Error::Config("empty partition sample".into()))?;
    Ok(WovenCertificate {
        universal_lower: *lo,
        universal_upper: *hi,
        witness_lower: (*lo_sigma).clone(),
        witness_upper: (*hi_sigma).clone(),
        checked: entries.len() as u64,
        borderline,
    })
}

/// Canonical dual of the weaving: `S_W^{-1}` applied to each woven vector.
/// Satisfies the reconstruction identity exactly (up to rounding).
pub fn canonical_weaving_dual(ctx: &WeavingContext) -> FrameFamily {
    ctx.dual_family().clone()
}

/// A seeded alternate dual: the canonical dual plus a random family projected
/// onto the null space of the weaving's synthesis map, which parameterizes
/// exactly the duals of the form canonical + null-component.
///
/// Errors with [`Error::NoFreedom`] when n = d (the dual is unique).
pub fn random_alternate_dual(ctx: &WeavingContext, seed: u64) -> Result<FrameFamily> {
    let (d, n) = (ctx.dim(), ctx.len());
    if n == d {
        return Err(Error::NoFreedom);
    }
    let w = ctx.woven().synthesis_matrix();
    // Projector onto ker(synthesis) = (range of analysis)^perp in C^n.
    let projector = CMatrix::identity(n, n) - w.adjoint() * ctx.s_w_inv() * &w;
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let noise = CMatrix::from_fn(d, n, |_, _| {
        C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let correction = noise * projector;
    let vectors = ctx
        .dual_family()
        .iter()
        .enumerate()
        .map(|(i, v)| v + correction.column(i))
        .collect();
    FrameFamily::new(d, vectors)
}

/// Operator-level dual residual: `||T_theta A_w - I||_F` where `A_w` is the
/// analysis map of the woven family and `T_theta` the synthesis map of
/// `theta`. Zero exactly when `theta` reconstructs every `f`.
pub fn validate_alternate_dual(ctx: &WeavingContext, theta: &FrameFamily) -> Result<f64> {
    if theta.dim() != ctx.dim() || theta.len() != ctx.len() {
        return Err(Error::ShapeMismatch {
            left: (ctx.dim(), ctx.len()),
            right: (theta.dim(), theta.len()),
        });
    }
    let d = ctx.dim();
    let op = theta.synthesis_matrix() * ctx.woven().synthesis_matrix().adjoint();
    Ok(frob(&(op - CMatrix::identity(d, d))))
}

/// Residual of `S_W^sigma + S_W^sigma_c = S_W`, relative to `||S_W||_F`.
pub fn partial_sum_residual(ctx: &WeavingContext) -> f64 {
    let sum = ctx.s_w_sigma() + ctx.s_w_sigma_c();
    frob(&(sum - ctx.s_w())) / frob_scale(ctx.s_w())
}

/// Explicit ascending-index evaluation of `S_W^sigma f` (or the complement
/// with `use_complement`), bypassing the cached matrices; the cross-check
/// oracle for the operator route.
pub fn apply_partial_by_summation(ctx: &WeavingContext, f: &CVector, use_complement: bool) -> CVector {
    let mut out = CVector::zeros(ctx.dim());
    for i in 0..ctx.len() {
        let in_sigma = ctx.sigma().contains(i);
        if in_sigma != use_complement {
            let v = if in_sigma { ctx.phi().vector(i) } else { ctx.psi().vector(i) };
            out += v * crate::linalg::inner(f, v);
        }
    }
    out
}
