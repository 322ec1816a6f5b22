//! On-disk JSON formats. Every index in these files is 1-based; matrices
//! are lists of `'0'`/`'1'` row strings.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf2::BitMatrix;
use crate::leakage::LeakageCertificate;
use crate::polar::{Delta, Design, PolarCode};

/// Converts 1-based indices to 0-based, rejecting zero.
pub fn to_zero_based(idx: &[usize]) -> Result<Vec<usize>> {
    idx.iter()
        .map(|&i| {
            i.checked_sub(1)
                .ok_or_else(|| Error::Parse("indices are 1-based; 0 is not allowed".into()))
        })
        .collect()
}

pub fn to_one_based(idx: &[usize]) -> Vec<usize> {
    idx.iter().map(|i| i + 1).collect()
}

/// Parses a comma-separated 1-based index list such as `"1,2,3"`.
/// The empty string is the empty set.
pub fn parse_index_list(s: &str) -> Result<Vec<usize>> {
    let s = s.trim();
    if s.is_empty() {
        return Ok(Vec::new());
    }
    let one_based = s
        .split(',')
        .map(|t| {
            t.trim()
                .parse::<usize>()
                .map_err(|e| Error::Parse(format!("bad index {t:?}: {e}")))
        })
        .collect::<Result<Vec<_>>>()?;
    to_zero_based(&one_based)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CodeDescriptor {
    pub n: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rate: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zeta: Option<f64>,
    pub delta: Delta,
    pub info_set: Vec<usize>,
    pub frozen_set: Vec<usize>,
    pub z_profile: Vec<f64>,
}

impl CodeDescriptor {
    pub fn from_code(code: &PolarCode) -> Self {
        let (rate, zeta) = match code.design() {
            Design::Rate(r) => (Some(r), None),
            Design::Threshold(z) => (None, Some(z)),
            Design::Explicit => (None, None),
        };
        Self {
            n: code.log2_len(),
            rate,
            zeta,
            delta: code.delta().clone(),
            info_set: to_one_based(code.info_set()),
            frozen_set: to_one_based(code.frozen_set()),
            z_profile: code.z_profile().to_vec(),
        }
    }

    /// Rebuilds the code with the stored information set, after checking the
    /// file is self-consistent.
    pub fn to_code(&self) -> Result<PolarCode> {
        if self.rate.is_some() && self.zeta.is_some() {
            return Err(Error::Parse("descriptor gives both rate and zeta".into()));
        }
        let info = to_zero_based(&self.info_set)?;
        let design = match (self.rate, self.zeta) {
            (Some(r), _) => Design::Rate(r),
            (_, Some(z)) => Design::Threshold(z),
            _ => Design::Explicit,
        };
        let code = PolarCode::from_info_set(self.n, self.delta.clone(), &info)?.with_design(design);

        if to_one_based(code.frozen_set()) != self.frozen_set {
            return Err(Error::Parse(
                "frozen_set must be the ascending complement of info_set".into(),
            ));
        }
        if to_one_based(code.info_set()) != self.info_set {
            return Err(Error::Parse("info_set must be ascending".into()));
        }
        let z_ok = self.z_profile.len() == code.blocklength()
            && self
                .z_profile
                .iter()
                .zip(code.z_profile())
                .all(|(a, b)| (a - b).abs() <= 1e-12);
        if !z_ok {
            return Err(Error::Parse(
                "z_profile does not match the erasure profile".into(),
            ));
        }
        if let Design::Rate(r) = design {
            let expected = (code.blocklength() as f64 * r).floor() as usize;
            if expected != info.len() {
                return Err(Error::Parse(format!(
                    "rate {r} implies |A| = {expected}, file lists {}",
                    info.len()
                )));
            }
        }
        Ok(code)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertificateFile {
    /// Fingerprint of the code the certificate was issued for.
    pub code: String,
    #[serde(rename = "P")]
    pub public_set: Vec<usize>,
    #[serde(rename = "rank_GP")]
    pub rank_gp: usize,
    #[serde(rename = "rank_GFP")]
    pub rank_gfp: usize,
    #[serde(rename = "L")]
    pub leakage: usize,
    #[serde(rename = "R")]
    pub extractor: Vec<String>,
    #[serde(rename = "M")]
    pub leaked: Vec<String>,
    pub verified: bool,
    pub seed: u64,
}

fn parse_rows(rows: &[String], fallback_cols: usize) -> Result<BitMatrix> {
    let cols = rows.first().map_or(fallback_cols, String::len);
    BitMatrix::from_row_strings(rows, cols)
}

impl CertificateFile {
    pub fn from_certificate(cert: &LeakageCertificate) -> Self {
        Self {
            code: cert.code_id.clone(),
            public_set: to_one_based(&cert.public_set),
            rank_gp: cert.rank_gp,
            rank_gfp: cert.rank_gfp,
            leakage: cert.leakage,
            extractor: cert.extractor.to_row_strings(),
            leaked: cert.leaked.to_row_strings(),
            verified: cert.verified,
            seed: cert.seed,
        }
    }

    /// Matrix widths come from the row strings (falling back to `L` when
    /// there are no rows), so an edited `L` is caught by verification rather
    /// than at parse time.
    pub fn to_certificate(&self) -> Result<LeakageCertificate> {
        Ok(LeakageCertificate {
            code_id: self.code.clone(),
            public_set: to_zero_based(&self.public_set)?,
            rank_gp: self.rank_gp,
            rank_gfp: self.rank_gfp,
            leakage: self.leakage,
            extractor: parse_rows(&self.extractor, self.leakage)?,
            leaked: parse_rows(&self.leaked, self.leakage)?,
            verified: self.verified,
            seed: self.seed,
        })
    }
}

/// Input of the `simulate` command. `code` is a path to a descriptor file,
/// resolved relative to the config file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub code: String,
    #[serde(rename = "P")]
    pub public_set: Vec<usize>,
    pub delta_pub: f64,
    pub delta_priv: f64,
    pub trials: u64,
    pub seed: u64,
    #[serde(default)]
    pub reuse_mask: bool,
}
