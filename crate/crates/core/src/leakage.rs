//! Exact leakage of published codeword coordinates.
//!
//! For a public set `P` the adversary sees `x_P = u_A G_{A,P} + u_F G_{F,P}`
//! with `u_F` uniform and secret. The mutual information `I(u_A; x_P)` equals
//! `rank(G_P) - rank(G_{F,P})`, and an extractor `R` with `G_{F,P} R = 0`
//! recovers exactly that many independent combinations `x_P R = u_A M`.
//!
//! Certificates are meaningful only while frozen bits are drawn uniformly and
//! freshly for every frame.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::gf2::{check_indices, extend_basis, BitMatrix, EchelonAccumulator};
use crate::polar::{encode, PolarCode};

/// Seed used for the frame-replay audit when none is given.
pub const DEFAULT_AUDIT_SEED: u64 = 0x5EED_2A7C_0DE5_0001;

/// Frames replayed by [`verify_certificate`].
pub const AUDIT_FRAMES: usize = 100;

/// Largest blocklength the exhaustive oracle will enumerate.
pub const ORACLE_MAX_BLOCKLENGTH: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LeakageCounts {
    /// `rank(G_P) - rank(G_{F,P})`, in bits.
    pub leakage: usize,
    pub rank_gp: usize,
    pub rank_gfp: usize,
}

/// Validates `p` against the blocklength and returns it sorted.
pub fn normalize_public_set(code: &PolarCode, p: &[usize]) -> Result<Vec<usize>> {
    check_indices(p, code.blocklength())?;
    let mut sorted = p.to_vec();
    sorted.sort_unstable();
    Ok(sorted)
}

/// `(G_P, G_{A,P}, G_{F,P})` for an already validated public set.
fn submatrices(code: &PolarCode, p: &[usize]) -> Result<(BitMatrix, BitMatrix, BitMatrix)> {
    let g = code.generator();
    Ok((
        g.select_columns(p)?,
        g.select(code.info_set(), p)?,
        g.select(code.frozen_set(), p)?,
    ))
}

pub fn leakage(code: &PolarCode, p: &[usize]) -> Result<LeakageCounts> {
    let p = normalize_public_set(code, p)?;
    let g = code.generator();
    let rank_gp = g.select_columns(&p)?.rank();
    let rank_gfp = g.select(code.frozen_set(), &p)?.rank();
    Ok(LeakageCounts {
        leakage: rank_gp - rank_gfp,
        rank_gp,
        rank_gfp,
    })
}

/// `rank(G_{A,P})`, the middle term of `L(P) <= rank(G_{A,P}) <= sum a_i`.
pub fn info_rank(code: &PolarCode, p: &[usize]) -> Result<usize> {
    let p = normalize_public_set(code, p)?;
    Ok(code.generator().select(code.info_set(), &p)?.rank())
}

/// A leakage certificate together with the adversary's extractor.
///
/// Indices in `public_set` are 0-based and ascending; rows of `extractor`
/// follow that order and rows of `leaked` follow the information set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LeakageCertificate {
    pub code_id: String,
    pub public_set: Vec<usize>,
    pub rank_gp: usize,
    pub rank_gfp: usize,
    pub leakage: usize,
    /// `R`, `|P| × L`.
    pub extractor: BitMatrix,
    /// `M = G_{A,P} R`, `|A| × L`.
    pub leaked: BitMatrix,
    pub verified: bool,
    pub seed: u64,
}

pub fn build_extractor(code: &PolarCode, p: &[usize]) -> Result<LeakageCertificate> {
    build_extractor_with_seed(code, p, DEFAULT_AUDIT_SEED)
}

/// Builds `R` from a quotient basis of `rowspace(G_P) / rowspace(G_{F,P})`.
///
/// The map sending the frozen row-space basis to zero and the `ℓ`-th coset
/// representative to `e_ℓ` is extended to all of `F_2^{|P|}` by sending the
/// unit-vector completion to zero; `R` is its matrix, `B^{-1} Φ`.
pub fn build_extractor_with_seed(
    code: &PolarCode,
    p: &[usize],
    seed: u64,
) -> Result<LeakageCertificate> {
    let p = normalize_public_set(code, p)?;
    let width = p.len();
    let (gp, gap, gfp) = submatrices(code, &p)?;

    let frozen_span = gfp.row_reduce();
    let full_span = gp.row_reduce();
    let reps = extend_basis(&frozen_span, &full_span)?;
    let leak = reps.rows();
    let dv = frozen_span.rank();

    let mut acc = EchelonAccumulator::new(width);
    for r in 0..dv {
        acc.insert(frozen_span.matrix().row_words(r));
    }
    for r in 0..leak {
        acc.insert(reps.row_words(r));
    }
    let mut completion = BitMatrix::zeros(0, width);
    for i in 0..width {
        let unit = BitMatrix::from_fn(1, width, |_, c| c == i);
        if acc.insert(unit.row_words(0)) {
            completion = completion.vstack(&unit)?;
        }
    }
    let basis = frozen_span.matrix().vstack(&reps)?.vstack(&completion)?;
    debug_assert_eq!(basis.rows(), width);

    let image = BitMatrix::from_fn(width, leak, |r, c| r >= dv && r - dv == c);
    let extractor = basis
        .invert()
        .expect("frozen basis, coset representatives and unit completion form a basis")
        .multiply(&image)?;
    let leaked = gap.multiply(&extractor)?;

    let mut cert = LeakageCertificate {
        code_id: code.fingerprint(),
        public_set: p,
        rank_gp: full_span.rank(),
        rank_gfp: dv,
        leakage: leak,
        extractor,
        leaked,
        verified: false,
        seed,
    };
    cert.verified = verify_certificate(&cert, code)?.passed();
    Ok(cert)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct VerificationReport {
    pub checks: Vec<Check>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    fn push(&mut self, name: &'static str, passed: bool, detail: String) {
        self.checks.push(Check {
            name,
            passed,
            detail,
        });
    }
}

/// Re-derives every claim in `cert` from the code.
///
/// The stored `verified` flag is ignored. Shape errors that make the checks
/// meaningless (wrong number of extractor or leaked rows) are returned as
/// [`Error::DimensionMismatch`]; everything else is reported per check.
pub fn verify_certificate(cert: &LeakageCertificate, code: &PolarCode) -> Result<VerificationReport> {
    let p = normalize_public_set(code, &cert.public_set)?;
    if p != cert.public_set {
        return Err(Error::DimensionMismatch(
            "public set must be listed in ascending order".into(),
        ));
    }
    if cert.extractor.rows() != p.len() {
        return Err(Error::DimensionMismatch(format!(
            "extractor has {} rows but |P| = {}",
            cert.extractor.rows(),
            p.len()
        )));
    }
    if cert.leaked.rows() != code.info_set().len() {
        return Err(Error::DimensionMismatch(format!(
            "leaked matrix has {} rows but |A| = {}",
            cert.leaked.rows(),
            code.info_set().len()
        )));
    }

    let mut report = VerificationReport::default();
    let (gp, gap, gfp) = submatrices(code, &p)?;
    let rank_gp = gp.rank();
    let rank_gfp = gfp.rank();

    report.push(
        "code id",
        cert.code_id == code.fingerprint(),
        format!("certificate names code {}", cert.code_id),
    );
    report.push(
        "rank of G_P",
        cert.rank_gp == rank_gp,
        format!("stored {}, recomputed {rank_gp}", cert.rank_gp),
    );
    report.push(
        "rank of G_FP",
        cert.rank_gfp == rank_gfp,
        format!("stored {}, recomputed {rank_gfp}", cert.rank_gfp),
    );
    let identity_ok = cert.leakage == rank_gp - rank_gfp;
    report.push(
        "rank identity",
        identity_ok,
        if identity_ok {
            format!("L = {rank_gp} - {rank_gfp} = {}", cert.leakage)
        } else {
            format!(
                "rank identity mismatch: L = {} but rank(G_P) - rank(G_FP) = {rank_gp} - {rank_gfp} = {}",
                cert.leakage,
                rank_gp - rank_gfp
            )
        },
    );
    report.push(
        "extractor width",
        cert.extractor.cols() == cert.leakage,
        format!("R has {} columns, L = {}", cert.extractor.cols(), cert.leakage),
    );

    let annihilates = gfp.multiply(&cert.extractor)?.is_zero();
    report.push(
        "frozen annihilation",
        annihilates,
        if annihilates {
            "G_FP R = 0".to_string()
        } else {
            "G_FP R is nonzero: frozen bits leak into x_P R".to_string()
        },
    );

    let gapr = gap.multiply(&cert.extractor)?;
    let leaked_rank = gapr.rank();
    report.push(
        "leaked rank",
        leaked_rank == cert.leakage,
        format!("rank(G_AP R) = {leaked_rank}, L = {}", cert.leakage),
    );
    report.push(
        "leaked matrix",
        gapr == cert.leaked,
        "M must equal G_AP R".to_string(),
    );

    let mismatched = replay_frames(code, cert, AUDIT_FRAMES)?;
    report.push(
        "frame replay",
        mismatched == 0,
        format!("{mismatched} of {AUDIT_FRAMES} random frames broke x_P R = u_A M"),
    );
    Ok(report)
}

/// Encodes random frames and counts those where `x_P R != u_A M`.
fn replay_frames(code: &PolarCode, cert: &LeakageCertificate, frames: usize) -> Result<usize> {
    if cert.leaked.cols() != cert.extractor.cols() {
        return Ok(frames);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cert.seed);
    let mut bad = 0;
    for _ in 0..frames {
        let info: Vec<bool> = (0..code.info_set().len()).map(|_| rng.gen()).collect();
        let frozen: Vec<bool> = (0..code.frozen_set().len()).map(|_| rng.gen()).collect();
        let x = encode(&code.assemble_input(&info, &frozen)?)?;
        let xp: Vec<bool> = cert.public_set.iter().map(|&i| x[i]).collect();
        let lhs = BitMatrix::row_vector(&xp).multiply(&cert.extractor)?;
        let rhs = BitMatrix::row_vector(&info).multiply(&cert.leaked)?;
        if lhs != rhs {
            bad += 1;
        }
    }
    Ok(bad)
}

/// `I(u_A; x_P)` in bits by enumerating all `2^N` inputs.
///
/// Codeword bits are computed from the subset characterization of `G_N`
/// (`x_i` is the parity of `u` over indices whose binary digits contain
/// those of `i`), independently of the butterfly and of any rank routine.
pub fn exhaustive_mi_oracle(code: &PolarCode, p: &[usize]) -> Result<f64> {
    let size = code.blocklength();
    if size > ORACLE_MAX_BLOCKLENGTH {
        return Err(Error::CapExceeded {
            what: "oracle blocklength",
            value: size as u128,
            cap: ORACLE_MAX_BLOCKLENGTH as u128,
        });
    }
    check_indices(p, size)?;
    let superset_masks: Vec<u64> = p
        .iter()
        .map(|&i| (0..size).filter(|&j| j & i == i).map(|j| 1u64 << j).sum())
        .collect();
    let info = code.info_set();

    let mut joint: HashMap<(u64, u64), u64> = HashMap::new();
    for u in 0u64..(1u64 << size) {
        let xp = superset_masks
            .iter()
            .enumerate()
            .map(|(k, &m)| (((u & m).count_ones() & 1) as u64) << k)
            .sum::<u64>();
        let ua = info
            .iter()
            .enumerate()
            .map(|(k, &j)| ((u >> j) & 1) << k)
            .sum::<u64>();
        *joint.entry((ua, xp)).or_default() += 1;
    }

    let mut by_info: HashMap<u64, u64> = HashMap::new();
    let mut by_public: HashMap<u64, u64> = HashMap::new();
    for (&(ua, xp), &c) in &joint {
        *by_info.entry(ua).or_default() += c;
        *by_public.entry(xp).or_default() += c;
    }
    let total = (1u64 << size) as f64;
    let entropy = |counts: &mut dyn Iterator<Item = u64>| -> f64 {
        counts
            .map(|c| {
                let q = c as f64 / total;
                -q * q.log2()
            })
            .sum()
    };
    let h_public = entropy(&mut by_public.values().copied());
    let h_info = entropy(&mut by_info.values().copied());
    let h_joint = entropy(&mut joint.values().copied());
    Ok(h_public + h_info - h_joint)
}

/// One XOR equation per extractor column, with 1-based indices, e.g.
/// `x_2 = u_2 ⊕ u_4`.
pub fn leaked_equation_report(cert: &LeakageCertificate, code: &PolarCode) -> Vec<String> {
    let join = |prefix: &str, idx: Vec<usize>| -> String {
        if idx.is_empty() {
            return "0".to_string();
        }
        idx.iter()
            .map(|i| format!("{prefix}_{}", i + 1))
            .collect::<Vec<_>>()
            .join(" ⊕ ")
    };
    (0..cert.extractor.cols())
        .map(|col| {
            let lhs = (0..cert.extractor.rows())
                .filter(|&r| cert.extractor.get(r, col))
                .map(|r| cert.public_set[r])
                .collect();
            let rhs = (0..cert.leaked.rows().min(code.info_set().len()))
                .filter(|&r| col < cert.leaked.cols() && cert.leaked.get(r, col))
                .map(|r| code.info_set()[r])
                .collect();
            format!("{} = {}", join("x", lhs), join("u", rhs))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polar::Delta;

    fn code_with_info(info_one_based: &[usize]) -> PolarCode {
        let info: Vec<usize> = info_one_based.iter().map(|i| i - 1).collect();
        PolarCode::from_info_set(2, Delta::Uniform(0.5), &info).unwrap()
    }

    fn zero_based(p: &[usize]) -> Vec<usize> {
        p.iter().map(|i| i - 1).collect()
    }

    #[test]
    fn worked_leakage_values() {
        let s1 = code_with_info(&[4]);
        let s2 = code_with_info(&[2, 3, 4]);
        let c = leakage(&s1, &zero_based(&[4])).unwrap();
        assert_eq!((c.leakage, c.rank_gp, c.rank_gfp), (1, 1, 0));
        let c = leakage(&s1, &zero_based(&[1])).unwrap();
        assert_eq!((c.leakage, c.rank_gp, c.rank_gfp), (0, 1, 1));
        let c = leakage(&s2, &zero_based(&[1, 2, 3])).unwrap();
        assert_eq!((c.leakage, c.rank_gp, c.rank_gfp), (2, 3, 1));
        assert_eq!(leakage(&s2, &[]).unwrap().leakage, 0);
    }

    #[test]
    fn leakage_rejects_bad_indices() {
        let s1 = code_with_info(&[4]);
        assert_eq!(
            leakage(&s1, &[4]),
            Err(Error::IndexOutOfRange { index: 4, bound: 4 })
        );
        assert_eq!(leakage(&s1, &[0, 0]), Err(Error::DuplicateIndex(0)));
    }

    #[test]
    fn single_info_bit_extractor_is_unit() {
        let s1 = code_with_info(&[4]);
        let cert = build_extractor(&s1, &zero_based(&[4])).unwrap();
        assert!(cert.verified);
        assert_eq!(cert.extractor.to_row_strings(), ["1"]);
        assert_eq!(leaked_equation_report(&cert, &s1), ["x_4 = u_4"]);
    }

    #[test]
    fn three_info_bit_extractor() {
        let s2 = code_with_info(&[2, 3, 4]);
        let cert = build_extractor(&s2, &zero_based(&[1, 2, 3])).unwrap();
        assert!(cert.verified);
        assert_eq!(cert.leakage, 2);
        assert_eq!((cert.extractor.rows(), cert.extractor.cols()), (3, 2));
        assert_eq!(cert.extractor.to_row_strings(), ["00", "10", "01"]);
        assert_eq!(
            leaked_equation_report(&cert, &s2),
            ["x_2 = u_2 ⊕ u_4", "x_3 = u_3 ⊕ u_4"]
        );
    }

    #[test]
    fn zero_leakage_certificate_is_empty() {
        let s1 = code_with_info(&[4]);
        let cert = build_extractor(&s1, &zero_based(&[1])).unwrap();
        assert!(cert.verified);
        assert_eq!(cert.leakage, 0);
        assert_eq!((cert.extractor.rows(), cert.extractor.cols()), (1, 0));
        assert_eq!((cert.leaked.rows(), cert.leaked.cols()), (1, 0));
        assert!(leaked_equation_report(&cert, &s1).is_empty());

        let empty = build_extractor(&s1, &[]).unwrap();
        assert!(empty.verified);
        assert_eq!(empty.extractor.rows(), 0);
    }

    #[test]
    fn tampered_extractor_fails_annihilation() {
        let s2 = code_with_info(&[2, 3, 4]);
        let mut cert = build_extractor(&s2, &zero_based(&[1, 2, 3])).unwrap();
        cert.extractor.set(0, 0, true);
        let report = verify_certificate(&cert, &s2).unwrap();
        assert!(!report.passed());
        let failed: Vec<_> = report.failures().map(|c| c.name).collect();
        assert!(failed.contains(&"frozen annihilation"), "{failed:?}");
    }

    #[test]
    fn tampered_leakage_fails_identity() {
        let s2 = code_with_info(&[2, 3, 4]);
        let mut cert = build_extractor(&s2, &zero_based(&[1, 2, 3])).unwrap();
        cert.leakage += 1;
        let report = verify_certificate(&cert, &s2).unwrap();
        let identity = report.checks.iter().find(|c| c.name == "rank identity").unwrap();
        assert!(!identity.passed);
        assert!(identity.detail.contains("rank identity mismatch"));
    }

    #[test]
    fn verify_rejects_misshapen_certificates() {
        let s2 = code_with_info(&[2, 3, 4]);
        let mut cert = build_extractor(&s2, &zero_based(&[1, 2, 3])).unwrap();
        cert.extractor = BitMatrix::zeros(2, 2);
        assert!(matches!(
            verify_certificate(&cert, &s2),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn oracle_on_two_coordinate_toy() {
        // u = (u_F, u_A): frozen index 1, information index 2.
        let toy = PolarCode::from_info_set(1, Delta::Uniform(0.5), &[1]).unwrap();
        assert!(exhaustive_mi_oracle(&toy, &[0]).unwrap().abs() < 1e-12);
        assert!((exhaustive_mi_oracle(&toy, &[1]).unwrap() - 1.0).abs() < 1e-12);
        assert!((exhaustive_mi_oracle(&toy, &[0, 1]).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn oracle_matches_worked_examples() {
        let s1 = code_with_info(&[4]);
        let s2 = code_with_info(&[2, 3, 4]);
        for (code, p, want) in [
            (&s1, vec![3], 1.0),
            (&s1, vec![0], 0.0),
            (&s2, vec![0, 1, 2], 2.0),
        ] {
            let got = exhaustive_mi_oracle(code, &p).unwrap();
            assert!((got - want).abs() < 1e-9, "{p:?}: {got}");
        }
    }

    #[test]
    fn oracle_cap() {
        let big = PolarCode::from_rate(5, Delta::Uniform(0.5), 0.5).unwrap();
        assert!(matches!(
            exhaustive_mi_oracle(&big, &[0]),
            Err(Error::CapExceeded { .. })
        ));
    }
}
