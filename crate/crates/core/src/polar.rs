//! Polar transform, BEC reliability profiles and information-set selection.
//!
//! All indices here are 0-based. `G_N` is the natural-order Kronecker power
//! of `[[1,0],[1,1]]` (no bit-reversal), so `G[j][i] = 1` exactly when the
//! binary digits of `i` are a subset of those of `j`.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::gf2::BitMatrix;

/// Largest supported `log2(N)`; the generator is stored densely.
pub const MAX_LOG2_BLOCKLENGTH: u32 = 16;

fn check_log2(n: u32) -> Result<usize> {
    if n > MAX_LOG2_BLOCKLENGTH {
        return Err(Error::CapExceeded {
            what: "log2 blocklength",
            value: n as u128,
            cap: MAX_LOG2_BLOCKLENGTH as u128,
        });
    }
    Ok(1usize << n)
}

/// `G_N = G_2^{⊗n}` in natural order.
pub fn polar_transform(n: u32) -> Result<BitMatrix> {
    let size = check_log2(n)?;
    let mut g = BitMatrix::zeros(size, size);
    for j in 0..size {
        // Walk every submask of j.
        let mut i = j;
        loop {
            g.set(j, i, true);
            if i == 0 {
                break;
            }
            i = (i - 1) & j;
        }
    }
    Ok(g)
}

/// `x = u G_N` via the in-place butterfly, O(N log N).
pub fn encode_in_place(u: &mut [bool]) -> Result<()> {
    let len = u.len();
    if !len.is_power_of_two() {
        return Err(Error::BadLength {
            len,
            reason: "blocklength must be a power of two",
        });
    }
    let mut half = 1;
    while half < len {
        for block in u.chunks_exact_mut(2 * half) {
            let (lo, hi) = block.split_at_mut(half);
            for (a, &b) in lo.iter_mut().zip(hi.iter()) {
                *a ^= b;
            }
        }
        half *= 2;
    }
    Ok(())
}

pub fn encode(u: &[bool]) -> Result<Vec<bool>> {
    let mut x = u.to_vec();
    encode_in_place(&mut x)?;
    Ok(x)
}

/// Exact Bhattacharyya parameters of the `N` synthetic channels when
/// coordinate `i` goes through `BEC(delta[i])`.
///
/// Writing `G_N = [[G', 0], [G', G']]`, the first half of `u` sees the
/// coordinate pairs `(j, j + N/2)` through their XOR (erasure
/// `z' + z'' - z'z''`) and the second half sees both copies (erasure
/// `z'z''`). Applying this split recursively in place yields the profile.
pub fn bec_reliability(n: u32, delta: &[f64]) -> Result<Vec<f64>> {
    let size = check_log2(n)?;
    if delta.len() != size {
        return Err(Error::BadLength {
            len: delta.len(),
            reason: "erasure vector must have one entry per coordinate",
        });
    }
    if let Some(bad) = delta.iter().find(|d| !(0.0..=1.0).contains(*d)) {
        return Err(Error::OutOfRange(format!(
            "erasure probability {bad} not in [0, 1]"
        )));
    }
    let mut z = delta.to_vec();
    let mut half = size / 2;
    while half >= 1 {
        for block in z.chunks_exact_mut(2 * half) {
            let (lo, hi) = block.split_at_mut(half);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (za, zb) = (*a, *b);
                *a = za + zb - za * zb;
                *b = za * zb;
            }
        }
        half /= 2;
    }
    Ok(z)
}

/// Erasure profile of the physical channel uses.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Delta {
    Uniform(f64),
    PerCoordinate(Vec<f64>),
}

impl Delta {
    pub fn expand(&self, size: usize) -> Result<Vec<f64>> {
        match self {
            Delta::Uniform(d) => Ok(vec![*d; size]),
            Delta::PerCoordinate(v) if v.len() == size => Ok(v.clone()),
            Delta::PerCoordinate(v) => Err(Error::BadLength {
                len: v.len(),
                reason: "erasure vector must have one entry per coordinate",
            }),
        }
    }
}

/// How the information set was chosen.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Design {
    /// `|A| = floor(N R)` most reliable indices.
    Rate(f64),
    /// Every index with `Z <= zeta`.
    Threshold(f64),
    /// Information set given directly.
    Explicit,
}

/// A polar code with its information/frozen split fixed at construction.
#[derive(Clone, Debug)]
pub struct PolarCode {
    n: u32,
    design: Design,
    delta: Delta,
    z_profile: Vec<f64>,
    info_set: Vec<usize>,
    frozen_set: Vec<usize>,
    is_info: Vec<bool>,
    generator: OnceLock<BitMatrix>,
}

impl PartialEq for PolarCode {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n
            && self.design == other.design
            && self.delta == other.delta
            && self.z_profile == other.z_profile
            && self.info_set == other.info_set
    }
}

impl PolarCode {
    fn assemble(
        n: u32,
        design: Design,
        delta: Delta,
        z_profile: Vec<f64>,
        mut info_set: Vec<usize>,
    ) -> Self {
        let size = 1usize << n;
        info_set.sort_unstable();
        let mut is_info = vec![false; size];
        for &i in &info_set {
            is_info[i] = true;
        }
        let frozen_set = (0..size).filter(|&i| !is_info[i]).collect();
        Self {
            n,
            design,
            delta,
            z_profile,
            info_set,
            frozen_set,
            is_info,
            generator: OnceLock::new(),
        }
    }

    /// Keeps the `floor(N R)` indices with the smallest Bhattacharyya
    /// parameter; ties go to the smaller index.
    pub fn from_rate(n: u32, delta: Delta, rate: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&rate) {
            return Err(Error::OutOfRange(format!("rate {rate} not in [0, 1]")));
        }
        let size = check_log2(n)?;
        let z = bec_reliability(n, &delta.expand(size)?)?;
        let k = (size as f64 * rate).floor() as usize;
        let mut order: Vec<usize> = (0..size).collect();
        order.sort_by(|&a, &b| z[a].total_cmp(&z[b]).then(a.cmp(&b)));
        order.truncate(k);
        Ok(Self::assemble(n, Design::Rate(rate), delta, z, order))
    }

    /// `A = { i : Z_i <= zeta }`.
    pub fn from_threshold(n: u32, delta: Delta, zeta: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&zeta) {
            return Err(Error::OutOfRange(format!("threshold {zeta} not in [0, 1)")));
        }
        let size = check_log2(n)?;
        let z = bec_reliability(n, &delta.expand(size)?)?;
        let info = (0..size).filter(|&i| z[i] <= zeta).collect();
        Ok(Self::assemble(n, Design::Threshold(zeta), delta, z, info))
    }

    /// Uses the given (0-based) information set as-is.
    pub fn from_info_set(n: u32, delta: Delta, info_set: &[usize]) -> Result<Self> {
        let size = check_log2(n)?;
        crate::gf2::check_indices(info_set, size)?;
        let z = bec_reliability(n, &delta.expand(size)?)?;
        Ok(Self::assemble(n, Design::Explicit, delta, z, info_set.to_vec()))
    }

    pub(crate) fn with_design(mut self, design: Design) -> Self {
        self.design = design;
        self
    }

    pub fn log2_len(&self) -> u32 {
        self.n
    }

    pub fn blocklength(&self) -> usize {
        1 << self.n
    }


    pub fn design(&self) -> Design {
        self.design
    }

    pub fn delta(&self) -> &Delta {
        &self.delta
    }

    pub fn z_profile(&self) -> &[f64] {
        &self.z_profile
    }

    pub fn info_set(&self) -> &[usize] {
        &self.info_set
    }

    pub fn frozen_set(&self) -> &[usize] {
        &self.frozen_set
    }

    pub fn is_info(&self, i: usize) -> bool {
        self.is_info[i]
    }

    /// SHA-256 over the blocklength and information set, hex encoded.
    /// Certificates carry it to name the code they were issued for.
    pub fn fingerprint(&self) -> String {
        let mut h = Sha256::new();
        h.update(b"polar-code/v1");
        h.update(self.n.to_le_bytes());
        for &i in &self.info_set {
            h.update((i as u64).to_le_bytes());
        }
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }

    /// `G_N`, built on first use and cached.
    pub fn generator(&self) -> &BitMatrix {
        self.generator
            .get_or_init(|| polar_transform(self.n).expect("blocklength checked at construction"))
    }

    /// Interleaves information and frozen bits into `u` (both in ascending
    /// index order of their sets).
    pub fn assemble_input(&self, info_bits: &[bool], frozen_bits: &[bool]) -> Result<Vec<bool>> {
        if info_bits.len() != self.info_set.len() || frozen_bits.len() != self.frozen_set.len() {
            return Err(Error::DimensionMismatch(format!(
                "expected {} information and {} frozen bits, got {} and {}",
                self.info_set.len(),
                self.frozen_set.len(),
                info_bits.len(),
                frozen_bits.len()
            )));
        }
        let mut u = vec![false; self.blocklength()];
        for (&i, &b) in self.info_set.iter().zip(info_bits) {
            u[i] = b;
        }
        for (&i, &b) in self.frozen_set.iter().zip(frozen_bits) {
            u[i] = b;
        }
        Ok(u)
    }
}
