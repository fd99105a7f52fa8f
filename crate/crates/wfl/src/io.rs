//! File formats and text parsing: frame JSON, woven-pair JSON, generator
//! specs, and the comma-separated lambda grid accepted on the command line.
//!
//! Frame JSON is `{"dim": d, "vectors": [[[re, im], ...d entries], ...n rows]}`
//! with one row per vector. All readers validate shapes and reject non-finite
//! entries, so they are safe on untrusted input (these entry points are the
//! fuzz targets).

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frames::{FrameFamily, FrameJson};
use crate::generators::GenSpec;
use crate::weaving::WovenCertificate;

/// Parse a frame from JSON text.
pub fn frame_from_json_str(s: &str) -> Result<FrameFamily> {
    let j: FrameJson = serde_json::from_str(s)?;
    FrameFamily::try_from(j)
}

pub fn frame_to_json_string(f: &FrameFamily) -> String {
    serde_json::to_string_pretty(&FrameJson::from(f)).expect("frame serialization is infallible")
}

pub fn read_frame(path: &Path) -> Result<FrameFamily> {
    frame_from_json_str(&fs::read_to_string(path)?)
}

pub fn write_frame(path: &Path, f: &FrameFamily) -> Result<()> {
    fs::write(path, frame_to_json_string(f) + "\n")?;
    Ok(())
}

/// A certified woven pair on disk: both families plus their certificate.
#[derive(Debug, Serialize, Deserialize)]
pub struct PairJson {
    pub phi: FrameJson,
    pub psi: FrameJson,
    pub certificate: WovenCertificate,
}

pub fn pair_from_json_str(s: &str) -> Result<(FrameFamily, FrameFamily, WovenCertificate)> {
    let j: PairJson = serde_json::from_str(s)?;
    Ok((FrameFamily::try_from(j.phi)?, FrameFamily::try_from(j.psi)?, j.certificate))
}

pub fn write_pair(
    path: &Path,
    phi: &FrameFamily,
    psi: &FrameFamily,
    certificate: &WovenCertificate,
) -> Result<()> {
    let j = PairJson {
        phi: FrameJson::from(phi),
        psi: FrameJson::from(psi),
        certificate: certificate.clone(),
    };
    fs::write(path, serde_json::to_string_pretty(&j)? + "\n")?;
    Ok(())
}

pub fn read_pair(path: &Path) -> Result<(FrameFamily, FrameFamily, WovenCertificate)> {
    pair_from_json_str(&fs::read_to_string(path)?)
}

/// Parse a generator spec from JSON text, applying the same validation the
/// CLI flags get.
pub fn genspec_from_json_str(s: &str) -> Result<GenSpec> {
    let spec: GenSpec = serde_json::from_str(s)?;
    spec.validate()?;
    Ok(spec)
}

pub fn read_genspec(path: &Path) -> Result<GenSpec> {
    genspec_from_json_str(&fs::read_to_string(path)?)
}

/// Parse a comma-separated list of real lambda values, e.g. `-1,0,0.5,1,2,3`.
/// Whitespace around entries is tolerated; empty lists and non-finite values
/// are rejected.
pub fn parse_lambda_list(s: &str) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for piece in s.split(',') {
        let piece = piece.trim();
        if piece.is_empty() {
            return Err(Error::Config(format!("empty entry in lambda list {s:?}")));
        }
        let x: f64 = piece
            .parse()
            .map_err(|_| Error::Config(format!("invalid lambda value {piece:?}")))?;
        if !x.is_finite() {
            return Err(Error::Config(format!("non-finite lambda value {piece:?}")));
        }
        out.push(x);
    }
    if out.is_empty() {
        return Err(Error::Config("lambda list is empty".into()));
    }
    Ok(out)
}
