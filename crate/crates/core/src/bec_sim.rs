//! Time-shared public/private BEC transmission with secret frozen bits.
//!
//! Every frame draws fresh information and frozen bits, encodes, sends each
//! coordinate through the link it is scheduled on, and runs SC decoding with
//! the frozen bits known to the receiver. The eavesdropper sees the public
//! coordinates before the channel and applies the certificate's extractor.
//!
//! Randomness for frame `t` comes from a ChaCha stream keyed by `(seed, t)`,
//! so results are identical for any number of worker threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf2::{check_indices, BitMatrix};
use crate::leakage::LeakageCertificate;
use crate::polar::{encode_in_place, PolarCode};

/// A received symbol; `None` is an erasure.
pub type Symbol = Option<bool>;

/// Stream reserved for the shared mask in the reuse demo.
const REUSED_MASK_STREAM: u64 = u64::MAX;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelAssignment {
    /// 0-based coordinates sent on the public link.
    pub public_set: Vec<usize>,
    pub delta_pub: f64,
    pub delta_priv: f64,
}

impl ChannelAssignment {
    pub fn new(public_set: Vec<usize>, delta_pub: f64, delta_priv: f64) -> Result<Self> {
        for d in [delta_pub, delta_priv] {
            if !(0.0..=1.0).contains(&d) {
                return Err(Error::OutOfRange(format!(
                    "erasure probability {d} not in [0, 1]"
                )));
            }
        }
        Ok(Self {
            public_set,
            delta_pub,
            delta_priv,
        })
    }

    /// `delta_i = delta_pub` for public coordinates, `delta_priv` otherwise.
    pub fn per_coordinate(&self, size: usize) -> Result<Vec<f64>> {
        check_indices(&self.public_set, size)?;
        let mut delta = vec![self.delta_priv; size];
        for &i in &self.public_set {
            delta[i] = self.delta_pub;
        }
        Ok(delta)
    }
}

/// Erases coordinate `i` with probability `delta[i]`; never flips a bit.
pub fn transmit<R: Rng + ?Sized>(x: &[bool], delta: &[f64], rng: &mut R) -> Result<Vec<Symbol>> {
    if x.len() != delta.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} symbols but {} erasure probabilities",
            x.len(),
            delta.len()
        )));
    }
    Ok(x.iter()
        .zip(delta)
        .map(|(&bit, &d)| (rng.gen::<f64>() >= d).then_some(bit))
        .collect())
}

fn xor_symbols(a: Symbol, b: Symbol) -> Symbol {
    Some(a? ^ b?)
}

/// SC over erasures on `G_N = [[G', 0], [G', G']]`: the first half of `u`
/// is decoded from the XOR of the two halves of `y`, re-encoded, and then
/// the second half is decoded from whichever copy survived.
///
/// Undetermined information bits stay `None` and propagate as erasures.
fn sc_recurse(y: &[Symbol], is_info: &[bool], frozen: &[bool], out: &mut [Symbol]) {
    let len = y.len();
    if len == 1 {
        out[0] = if is_info[0] { y[0] } else { Some(frozen[0]) };
        return;
    }
    let half = len / 2;
    let (y_lo, y_hi) = y.split_at(half);
    let left: Vec<Symbol> = y_lo.iter().zip(y_hi).map(|(&a, &b)| xor_symbols(a, b)).collect();
    let (out_lo, out_hi) = out.split_at_mut(half);
    sc_recurse(&left, &is_info[..half], &frozen[..half], out_lo);

    let reencoded = encode_symbols(out_lo);
    let right: Vec<Symbol> = (0..half)
        .map(|j| y_hi[j].or_else(|| xor_symbols(y_lo[j], reencoded[j])))
        .collect();
    sc_recurse(&right, &is_info[half..], &frozen[half..], out_hi);
}

/// Butterfly encoding with erasure propagation.
fn encode_symbols(u: &[Symbol]) -> Vec<Symbol> {
    let mut x = u.to_vec();
    let mut half = 1;
    while half < x.len() {
        for block in x.chunks_exact_mut(2 * half) {
            let (lo, hi) = block.split_at_mut(half);
            for (a, &b) in lo.iter_mut().zip(hi.iter()) {
                *a = xor_symbols(*a, b);
            }
        }
        half *= 2;
    }
    x
}

/// Runs SC decoding and returns every `u_i`, with `None` where an
/// information bit could not be determined.
pub fn sc_decode_symbols(y: &[Symbol], code: &PolarCode, frozen_values: &[bool]) -> Result<Vec<Symbol>> {
    let size = code.blocklength();
    if y.len() != size {
        return Err(Error::BadLength {
            len: y.len(),
            reason: "received word must have one symbol per coordinate",
        });
    }
    if frozen_values.len() != code.frozen_set().len() {
        return Err(Error::DimensionMismatch(format!(
            "{} frozen values for {} frozen positions",
            frozen_values.len(),
            code.frozen_set().len()
        )));
    }
    let is_info: Vec<bool> = (0..size).map(|i| code.is_info(i)).collect();
    let mut frozen = vec![false; size];
    for (&i, &b) in code.frozen_set().iter().zip(frozen_values) {
        frozen[i] = b;
    }
    let mut out = vec![None; size];
    sc_recurse(y, &is_info, &frozen, &mut out);
    Ok(out)
}

/// SC decoding; fails with the first undetermined information index.
pub fn sc_decode(y: &[Symbol], code: &PolarCode, frozen_values: &[bool]) -> Result<Vec<bool>> {
    sc_decode_symbols(y, code, frozen_values)?
        .into_iter()
        .enumerate()
        .map(|(i, s)| s.ok_or(Error::DecodeFailure { index: i }))
        .collect()
}

/// `x_P R`, the combinations `u_A M` an eavesdropper learns from a frame.
pub fn adversary_observe(x: &[bool], cert: &LeakageCertificate) -> Result<Vec<bool>> {
    if !cert.verified {
        return Err(Error::UnverifiedCertificate);
    }
    check_indices(&cert.public_set, x.len())?;
    let xp: Vec<bool> = cert.public_set.iter().map(|&i| x[i]).collect();
    Ok(BitMatrix::row_vector(&xp).multiply(&cert.extractor)?.row_bits(0))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Frame {
    pub info_bits: Vec<bool>,
    pub frozen_bits: Vec<bool>,
    pub codeword: Vec<bool>,
    pub received: Vec<Symbol>,
}

fn random_bits(rng: &mut ChaCha8Rng, len: usize) -> Vec<bool> {
    (0..len).map(|_| rng.gen()).collect()
}

/// Generates frame `index` of a seeded experiment.
///
/// With `reuse_mask` every frame shares one frozen-bit draw, which breaks
/// the one-time-pad masking. Only meant as a negative demonstration.
pub fn simulate_frame(
    code: &PolarCode,
    delta: &[f64],
    seed: u64,
    index: u64,
    reuse_mask: bool,
) -> Result<Frame> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let info_bits = random_bits(&mut rng, code.info_set().len());
    let frozen_bits = if reuse_mask {
        let mut mask_rng = ChaCha8Rng::seed_from_u64(seed);
        mask_rng.set_stream(REUSED_MASK_STREAM);
        random_bits(&mut mask_rng, code.frozen_set().len())
    } else {
        random_bits(&mut rng, code.frozen_set().len())
    };
    let mut codeword = code.assemble_input(&info_bits, &frozen_bits)?;
    encode_in_place(&mut codeword)?;
    let received = transmit(&codeword, delta, &mut rng)?;
    Ok(Frame {
        info_bits,
        frozen_bits,
        codeword,
        received,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExperimentSettings {
    pub trials: u64,
    pub seed: u64,
    pub reuse_mask: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub trials: u64,
    pub frame_errors: u64,
    /// Information bits left undetermined (or wrong) by the decoder.
    pub bit_errors: u64,
    pub fer: f64,
    pub ber: f64,
    pub adversary_checks_passed: u64,
    pub seed: u64,
    pub reuse_mask: bool,
}

#[derive(Clone, Copy, Default)]
struct Tally {
    frame_errors: u64,
    bit_errors: u64,
    adversary_ok: u64,
}

impl std::ops::Add for Tally {
    type Output = Tally;

    fn add(self, o: Tally) -> Tally {
        Tally {
            frame_errors: self.frame_errors + o.frame_errors,
            bit_errors: self.bit_errors + o.bit_errors,
            adversary_ok: self.adversary_ok + o.adversary_ok,
        }
    }
}

/// Runs `settings.trials` independent frames. Without a certificate the
/// adversary count stays zero.
pub fn run_experiment(
    code: &PolarCode,
    assign: &ChannelAssignment,
    cert: Option<&LeakageCertificate>,
    settings: ExperimentSettings,
) -> Result<SimulationReport> {
    if settings.trials == 0 {
        return Err(Error::OutOfRange("trials must be at least 1".into()));
    }
    if let Some(c) = cert {
        if !c.verified {
            return Err(Error::UnverifiedCertificate);
        }
    }
    let delta = assign.per_coordinate(code.blocklength())?;
    let info = code.info_set();

    let tally = (0..settings.trials)
        .into_par_iter()
        .map(|t| -> Result<Tally> {
            let frame = simulate_frame(code, &delta, settings.seed, t, settings.reuse_mask)?;
            let decoded = sc_decode_symbols(&frame.received, code, &frame.frozen_bits)?;
            let bit_errors = info
                .iter()
                .zip(&frame.info_bits)
                .filter(|&(&i, &b)| decoded[i] != Some(b))
                .count() as u64;
            let adversary_ok = match cert {
                Some(c) => {
                    let seen = adversary_observe(&frame.codeword, c)?;
                    let expected = BitMatrix::row_vector(&frame.info_bits)
                        .multiply(&c.leaked)?
                        .row_bits(0);
                    u64::from(seen == expected)
                }
                None => 0,
            };
            Ok(Tally {
                frame_errors: u64::from(bit_errors > 0),
                bit_errors,
                adversary_ok,
            })
        })
        .try_reduce(Tally::default, |a, b| Ok(a + b))?;

    let info_bits_sent = settings.trials * info.len() as u64;
    Ok(SimulationReport {
        trials: settings.trials,
        frame_errors: tally.frame_errors,
        bit_errors: tally.bit_errors,
        fer: tally.frame_errors as f64 / settings.trials as f64,
        ber: if info_bits_sent == 0 {
            0.0
        } else {
            tally.bit_errors as f64 / info_bits_sent as f64
        },
        adversary_checks_passed: tally.adversary_ok,
        seed: settings.seed,
        reuse_mask: settings.reuse_mask,
    })
}

/// True when every delivered symbol of `y` equals the transmitted bit.
pub fn erasures_only(x: &[bool], y: &[Symbol]) -> bool {
    x.len() == y.len() && x.iter().zip(y).all(|(&b, s)| s.is_none_or(|v| v == b))
}
