//! Deterministic and seeded frame constructors used as test inputs: the
//! standard basis, harmonic (DFT) Parseval frames, the Mercedes-Benz tight
//! frame, seeded Gaussian families, and certified woven pairs produced by
//! generate-and-certify.
//!
//! Reproducibility contract: all randomness comes from `ChaCha12` streams
//! seeded with the caller's integer seed (normal variates via the ziggurat
//! sampler of `rand_distr`); a given (kind, dim, count, seed, epsilon) tuple
//! always yields a bit-identical family.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frames::FrameFamily;
use crate::linalg::{CVector, C64};
use crate::weaving::{woven_bounds_bruteforce, WovenCertificate};

/// RNG identifier recorded in reports.
pub const RNG_ID: &str = "chacha12/ziggurat";

/// Number of epsilon-halving attempts in [`gen_woven_pair`] (initial try included).
pub const WOVEN_PAIR_ATTEMPTS: usize = 9;

/// Frame construction recipe, accepted both as CLI flags and as JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenSpec {
    pub kind: GenKind,
    #[serde(default)]
    pub dim: usize,
    #[serde(default)]
    pub count: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub epsilon: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GenKind {
    Onb,
    Random,
    Dft,
    Mercedes,
    WovenPair,
}

impl GenSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        match self.kind {
            GenKind::Mercedes => Ok(()),
            GenKind::Onb => {
                if self.dim < 1 {
                    return bad(format!("onb requires dim >= 1, got {}", self.dim));
                }
                Ok(())
            }
            GenKind::Dft | GenKind::Random | GenKind::WovenPair => {
                if self.dim < 1 {
                    return bad(format!("dim must be >= 1, got {}", self.dim));
                }
                if self.count < self.dim {
                    return bad(format!(
                        "count must be >= dim, got count {} < dim {}",
                        self.count, self.dim
                    ));
                }
                if self.epsilon < 0.0 {
                    return bad(format!("epsilon must be >= 0, got {}", self.epsilon));
                }
                Ok(())
            }
        }
    }
}

/// Standard orthonormal basis of C^d.
pub fn gen_onb(d: usize) -> FrameFamily {
    assert!(d >= 1, "orthonormal basis needs dim >= 1");
    let vectors = (0..d)
        .map(|k| CVector::from_fn(d, |j, _| if j == k { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) }))
        .collect();
    FrameFamily::new(d, vectors).expect("basis vectors are finite")
}

/// Harmonic frame: `phi_k[j] = exp(2 pi i j k / n) / sqrt(n)` for j < d.
/// Parseval for every n >= d by roots-of-unity orthogonality.
pub fn gen_dft(d: usize, n: usize) -> Result<FrameFamily> {
    if d < 1 || n < d {
        return Err(Error::BadShape { dim: d, count: n });
    }
    let scale = 1.0 / (n as f64).sqrt();
    let vectors = (0..n)
        .map(|k| {
            CVector::from_fn(d, |j, _| {
                let angle = TAU * (j as f64) * (k as f64) / (n as f64);
                C64::new(angle.cos() * scale, angle.sin() * scale)
            })
        })
        .collect();
    FrameFamily::new(d, vectors)
}

/// The three-vector tight frame {(0,1), (-sqrt3/2,-1/2), (sqrt3/2,-1/2)} in
/// R^2 viewed inside C^2; frame operator (3/2) I.
pub fn gen_mercedes() -> FrameFamily {
    let r = 3f64.sqrt() / 2.0;
    let rows: [[f64; 2]; 3] = [[0.0, 1.0], [-r, -0.5], [r, -0.5]];
    let vectors = rows
        .iter()
        .map(|row| CVector::from_fn(2, |j, _| C64::new(row[j], 0.0)))
        .collect();
    FrameFamily::new(2, vectors).expect("fixture is finite")
}

fn gaussian_vector(rng: &mut ChaCha12Rng, d: usize) -> CVector {
    CVector::from_fn(d, |_, _| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
}

/// Seeded family with i.i.d. complex Gaussian entries (real and imaginary
/// parts standard normal). Almost surely a frame; a degenerate draw errors
/// with [`Error::NotAFrame`] and retrying is the caller's choice.
pub fn gen_random(d: usize, n: usize, seed: u64) -> Result<FrameFamily> {
    if d < 1 || n < d {
        return Err(Error::BadShape { dim: d, count: n });
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let vectors = (0..n).map(|_| gaussian_vector(&mut rng, d)).collect();
    let family = FrameFamily::new(d, vectors)?;
    family.frame_bounds()?;
    Ok(family)
}

/// Generate-and-certify: a seeded frame, a perturbed copy, and the exact
/// woven certificate from the exhaustive partition sweep.
///
/// `psi_i = phi_i + epsilon * u_i` with seeded unit-norm perturbations `u_i`.
/// When certification fails, epsilon is halved (same perturbation directions)
/// and the sweep retried, up to [`WOVEN_PAIR_ATTEMPTS`] attempts in total.
pub fn gen_woven_pair(
    d: usize,
    n: usize,
    epsilon: f64,
    seed: u64,
) -> Result<(FrameFamily, FrameFamily, WovenCertificate)> {
    if d < 1 || n < d {
        return Err(Error::BadShape { dim: d, count: n });
    }
    if epsilon < 0.0 || !epsilon.is_finite() {
        return Err(Error::Config(format!("epsilon must be finite and >= 0, got {epsilon}")));
    }
    let phi = gen_random(d, n, seed)?;
    let mut rng = ChaCha12Rng::seed_from_u64(seed ^ 0x70657274_75726221);
    let directions: Vec<CVector> = (0..n)
        .map(|_| {
            let g = gaussian_vector(&mut rng, d);
            let norm = g.norm();
            if norm > 0.0 {
                g / C64::new(norm, 0.0)
            } else {
                g
            }
        })
        .collect();

    let mut eps = epsilon;
    for _ in 0..WOVEN_PAIR_ATTEMPTS {
        let psi_vectors: Vec<CVector> = phi
            .iter()
            .zip(&directions)
            .map(|(v, u)| v + u * C64::new(eps, 0.0))
            .collect();
        if let Ok(psi) = FrameFamily::new(d, psi_vectors) {
            match woven_bounds_bruteforce(&phi, &psi, n) {
                Ok(cert) => return Ok((phi, psi, cert)),
                Err(Error::NotWoven { .. }) | Err(Error::NonFinite) | Err(Error::NotHermitian { .. }) => {}
                Err(other) => return Err(other),
            }
        }
        eps /= 2.0;
    }
    Err(Error::GenerationFailed { attempts: WOVEN_PAIR_ATTEMPTS })
}

/// What a [`GenSpec`] produces: a single family or a certified pair.
#[derive(Debug, Clone)]
pub enum Generated {
    Single(FrameFamily),
    Pair { phi: FrameFamily, psi: FrameFamily, certificate: WovenCertificate },
}

pub fn generate(spec: &GenSpec) -> Result<Generated> {
    spec.validate()?;
    Ok(match spec.kind {
        GenKind::Onb => Generated::Single(gen_onb(spec.dim)),
        GenKind::Dft => Generated::Single(gen_dft(spec.dim, spec.count)?),
        GenKind::Mercedes => Generated::Single(gen_mercedes()),
        GenKind::Random => Generated::Single(gen_random(spec.dim, spec.count, spec.seed)?),
        GenKind::WovenPair => {
            let (phi, psi, certificate) = gen_woven_pair(spec.dim, spec.count, spec.epsilon, spec.seed)?;
            Generated::Pair { phi, psi, certificate }
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{frob, CMatrix};

    #[test]
    fn onb_fixtures() {
        let one = gen_onb(1);
        assert_eq!(one.len(), 1);
        assert!((one.vector(0)[0] - C64::new(1.0, 0.0)).norm() == 0.0);
        let b = gen_onb(2).frame_bounds().unwrap();
        assert!((b.lower - 1.0).abs() <= 1e-14 && (b.upper - 1.0).abs() <= 1e-14);
        let b4 = gen_onb(4).frame_bounds().unwrap();
        assert!((b4.lower - 1.0).abs() <= 1e-12 && (b4.upper - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn dft_square_case_is_unitary_basis() {
        let f = gen_dft(3, 3).unwrap();
        let s = f.frame_operator();
        assert!(frob(&(s - CMatrix::identity(3, 3))) <= 1e-12);
    }

    #[test]
    fn dft_2_4_is_parseval_by_root_sum_oracle() {
        // Oracle: S_{jl} = (1/4) sum_k e^{2 pi i (j-l) k / 4} computed termwise.
        let f = gen_dft(2, 4).unwrap();
        let s = f.frame_operator();
        for j in 0..2 {
            for l in 0..2 {
                let mut acc = C64::new(0.0, 0.0);
                for k in 0..4 {
                    let angle = TAU * ((j as f64 - l as f64) * k as f64) / 4.0;
                    acc += C64::new(angle.cos(), angle.sin());
                }
                acc /= C64::new(4.0, 0.0);
                assert!((s[(j, l)] - acc).norm() <= 1e-14);
            }
        }
        assert!(frob(&(s - CMatrix::identity(2, 2))) <= 1e-12);
    }

    #[test]
    fn dft_3_7_bounds_are_unit() {
        let b = gen_dft(3, 7).unwrap().frame_bounds().unwrap();
        assert!((b.lower - 1.0).abs() <= 1e-12);
        assert!((b.upper - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn dft_rejects_too_few_vectors() {
        assert!(matches!(gen_dft(4, 3), Err(Error::BadShape { dim: 4, count: 3 })));
    }

    #[test]
    fn mercedes_is_tight_three_halves() {
        let f = gen_mercedes();
        assert_eq!(f.len(), 3);
        assert!(frob(&(f.frame_operator() - CMatrix::identity(2, 2) * C64::new(1.5, 0.0))) <= 1e-12);
        // A Parseval rescale follows from linearity of the frame operator.
        let parseval = f.scaled((2.0f64 / 3.0).sqrt());
        assert!(frob(&(parseval.frame_operator() - CMatrix::identity(2, 2))) <= 1e-12);
    }

    #[test]
    fn random_family_is_deterministic_per_seed() {
        let a = gen_random(3, 5, 42).unwrap();
        let b = gen_random(3, 5, 42).unwrap();
        assert_eq!(a, b);
        let c = gen_random(3, 5, 43).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn random_family_is_a_frame() {
        let f = gen_random(2, 4, 7).unwrap();
        assert!(f.frame_bounds().unwrap().lower > 0.0);
        let single = gen_random(1, 1, 11).unwrap();
        assert!(single.vector(0).norm() > 0.0);
    }

    #[test]
    fn random_frame_operator_inverts_cleanly() {
        let s = gen_random(3, 6, 1).unwrap().frame_operator();
        let inv = crate::linalg::psd_transform(&s, crate::linalg::PsdKind::Inverse).unwrap();
        let id = CMatrix::identity(3, 3);
        assert!(frob(&(&s * inv - id)) <= 1e-10 * frob(&s).max(1.0));
    }

    #[test]
    fn woven_pair_with_zero_epsilon_is_self_weaving() {
        let (phi, psi, cert) = gen_woven_pair(2, 3, 0.0, 5).unwrap();
        assert_eq!(phi, psi);
        let b = phi.frame_bounds().unwrap();
        assert!((cert.universal_lower - b.lower).abs() <= 1e-12 * b.upper);
        assert!((cert.universal_upper - b.upper).abs() <= 1e-12 * b.upper);
    }

    #[test]
    fn woven_pair_certifies_small_perturbation() {
        let (phi, psi, cert) = gen_woven_pair(2, 4, 0.05, 3).unwrap();
        assert!(cert.universal_lower > 0.0);
        assert!(cert.universal_lower <= cert.universal_upper);
        assert_eq!(cert.checked, 16);
        // Bit-identical replay.
        let (phi2, psi2, cert2) = gen_woven_pair(2, 4, 0.05, 3).unwrap();
        assert_eq!(phi, phi2);
        assert_eq!(psi, psi2);
        assert_eq!(cert.universal_lower.to_bits(), cert2.universal_lower.to_bits());
    }

    #[test]
    fn woven_pair_overflow_exhausts_retries() {
        // An epsilon so large the weaving operator overflows at every halved
        // attempt, exercising the GenerationFailed path.
        match gen_woven_pair(2, 3, 1e308, 1) {
            Err(Error::GenerationFailed { attempts }) => assert_eq!(attempts, WOVEN_PAIR_ATTEMPTS),
            other => panic!("expected GenerationFailed, got {other:?}"),
        }
    }

    #[test]
    fn genspec_validation() {
        let bad = GenSpec { kind: GenKind::Dft, dim: 0, count: 4, seed: 0, epsilon: 0.0 };
        assert!(bad.validate().is_err());
        let bad2 = GenSpec { kind: GenKind::Random, dim: 3, count: 2, seed: 0, epsilon: 0.0 };
        assert!(bad2.validate().is_err());
        let ok = GenSpec { kind: GenKind::Mercedes, dim: 0, count: 0, seed: 0, epsilon: 0.0 };
        assert!(ok.validate().is_ok());
    }
}
