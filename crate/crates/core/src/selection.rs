//! Choosing which `k` coordinates to publish.
//!
//! `score_greedy` ranks coordinates by `s_i = f_i - a_i`, where `a_i` and
//! `f_i` count the information and frozen rows of `G_N` that touch column `i`.
//! For any public set, `L(P) <= rank(G_{A,P}) <= sum_{i in P} a_i`.
//! `brute_force_min_leakage` enumerates every `k`-subset for small instances.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf2::WORD_BITS;
use crate::leakage::{info_rank, leakage, normalize_public_set};
use crate::polar::PolarCode;

/// Default limit on the number of subsets brute force may examine.
pub const DEFAULT_BRUTE_FORCE_CAP: u128 = 10_000_000;

const CHUNK: usize = 2048;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScoreTable {
    pub a: Vec<usize>,
    pub f: Vec<usize>,
    pub s: Vec<i64>,
}

impl ScoreTable {
    /// `sum_{i in p} a_i`.
    pub fn bound(&self, p: &[usize]) -> usize {
        p.iter().map(|&i| self.a[i]).sum()
    }
}

pub fn score_table(code: &PolarCode) -> ScoreTable {
    let size = code.blocklength();
    let g = code.generator();
    let mut a = vec![0usize; size];
    let mut f = vec![0usize; size];
    for j in 0..size {
        let counts = if code.is_info(j) { &mut a } else { &mut f };
        for (wi, &word) in g.row_words(j).iter().enumerate() {
            let mut w = word;
            while w != 0 {
                counts[wi * WORD_BITS + w.trailing_zeros() as usize] += 1;
                w &= w - 1;
            }
        }
    }
    let s = a.iter().zip(&f).map(|(&a, &f)| f as i64 - a as i64).collect();
    ScoreTable { a, f, s }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Greedy,
    BruteForce,
    ExhaustiveSweep,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SelectionResult {
    /// 0-based, ascending.
    pub public_set: Vec<usize>,
    pub leakage: usize,
    /// `sum_{i in P} a_i`.
    pub bound: usize,
    pub method: Method,
    /// Candidate sets (brute force) or coordinates (greedy) examined.
    pub work: u128,
    pub warning: Option<String>,
}

pub fn score_greedy(code: &PolarCode, k: usize) -> Result<SelectionResult> {
    let size = code.blocklength();
    if k == 0 || k > size {
        return Err(Error::BadBudget { k, n: size });
    }
    let scores = score_table(code);
    let mut order: Vec<usize> = (0..size).collect();
    order.sort_by(|&x, &y| scores.s[y].cmp(&scores.s[x]).then(x.cmp(&y)));
    let mut p = order[..k].to_vec();
    p.sort_unstable();

    let frozen = code.frozen_set().len();
    let warning = (k > frozen).then(|| {
        format!("budget k = {k} exceeds |F| = {frozen}; the leakage bound still holds but greedy has no frozen rows left to mask with")
    });
    Ok(SelectionResult {
        leakage: leakage(code, &p)?.leakage,
        bound: scores.bound(&p),
        public_set: p,
        method: Method::Greedy,
        work: size as u128,
        warning,
    })
}

#[derive(Clone, Copy, Debug)]
pub struct BruteForceOptions {
    pub cap: u128,
    /// Stop at the first zero-leakage set; it cannot be beaten.
    pub short_circuit: bool,
}

impl Default for BruteForceOptions {
    fn default() -> Self {
        Self {
            cap: DEFAULT_BRUTE_FORCE_CAP,
            short_circuit: true,
        }
    }
}

/// `C(n, k)`, saturating at `u128::MAX`.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) / (i + 1) stays integral at every step.
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// `k`-subsets of `0..n` in lexicographic order.
struct Combinations {
    n: usize,
    current: Option<Vec<usize>>,
}

impl Combinations {
    fn new(n: usize, k: usize) -> Self {
        Self {
            n,
            current: (k <= n).then(|| (0..k).collect()),
        }
    }
}

impl Iterator for Combinations {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let out = self.current.clone()?;
        let c = self.current.as_mut().expect("checked above");
        let k = c.len();
        match (0..k).rev().find(|&i| c[i] < self.n - k + i) {
            Some(i) => {
                c[i] += 1;
                for j in i + 1..k {
                    c[j] = c[j - 1] + 1;
                }
            }
            None => self.current = None,
        }
        Some(out)
    }
}

/// Lexicographically first `k`-set with minimum exact leakage.
///
/// Candidates are scored in parallel chunk by chunk; within and across chunks
/// the reduction keeps the earliest minimizer, so the answer does not depend
/// on the thread count.
pub fn brute_force_min_leakage(
    code: &PolarCode,
    k: usize,
    options: &BruteForceOptions,
) -> Result<SelectionResult> {
    let size = code.blocklength();
    if k > size {
        return Err(Error::BadBudget { k, n: size });
    }
    let total = binomial(size, k);
    if total > options.cap {
        return Err(Error::CapExceeded {
            what: "candidate subsets",
            value: total,
            cap: options.cap,
        });
    }
    code.generator();

    let mut best: Option<(usize, Vec<usize>)> = None;
    let mut work: u128 = 0;
    let mut combos = Combinations::new(size, k);
    loop {
        let chunk: Vec<Vec<usize>> = combos.by_ref().take(CHUNK).collect();
        if chunk.is_empty() {
            break;
        }
        let scored = chunk
            .par_iter()
            .map(|p| leakage(code, p).map(|c| c.leakage))
            .collect::<Result<Vec<_>>>()?;
        let stop_at = if options.short_circuit {
            scored.iter().position(|&l| l == 0)
        } else {
            None
        };
        let examined = stop_at.map_or(scored.len(), |i| i + 1);
        work += examined as u128;
        for (p, &l) in chunk.iter().zip(&scored).take(examined) {
            if best.as_ref().is_none_or(|(b, _)| l < *b) {
                best = Some((l, p.clone()));
            }
        }
        if stop_at.is_some() {
            break;
        }
    }

    let (min_leak, p) = best.expect("at least one k-subset exists for k <= N");
    let scores = score_table(code);
    Ok(SelectionResult {
        leakage: min_leak,
        bound: scores.bound(&p),
        public_set: p,
        method: Method::BruteForce,
        work,
        warning: None,
    })
}

/// The three quantities of `L(P) <= rank(G_{A,P}) <= sum a_i`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LeakageChain {
    pub leakage: usize,
    pub info_rank: usize,
    pub score_bound: usize,
}

impl LeakageChain {
    pub fn holds(&self) -> bool {
        self.leakage <= self.info_rank && self.info_rank <= self.score_bound
    }
}

pub fn leakage_chain(code: &PolarCode, p: &[usize]) -> Result<LeakageChain> {
    let p = normalize_public_set(code, p)?;
    Ok(LeakageChain {
        leakage: leakage(code, &p)?.leakage,
        info_rank: info_rank(code, &p)?,
        score_bound: score_table(code).bound(&p),
    })
}

/// One row of the greedy-versus-optimal comparison.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub k: usize,
    #[serde(rename = "L_greedy")]
    pub l_greedy: usize,
    pub bound: usize,
    #[serde(rename = "L_opt")]
    pub l_opt: usize,
    pub gap: usize,
    pub t_greedy_ms: f64,
    pub t_bf_ms: f64,
}

/// Greedy, its bound and the brute-force optimum for every `k` in `1..=max_k`.
pub fn sweep_report(
    code: &PolarCode,
    max_k: usize,
    options: &BruteForceOptions,
) -> Result<Vec<SweepRow>> {
    let size = code.blocklength();
    if max_k > size {
        return Err(Error::BadBudget { k: max_k, n: size });
    }
    (1..=max_k)
        .map(|k| {
            let t0 = Instant::now();
            let greedy = score_greedy(code, k)?;
            let t_greedy = t0.elapsed();
            let t1 = Instant::now();
            let opt = brute_force_min_leakage(code, k, options)?;
            let t_bf = t1.elapsed();
            Ok(SweepRow {
                k,
                l_greedy: greedy.leakage,
                bound: greedy.bound,
                l_opt: opt.leakage,
                gap: greedy.leakage - opt.leakage,
                t_greedy_ms: t_greedy.as_secs_f64() * 1e3,
                t_bf_ms: t_bf.as_secs_f64() * 1e3,
            })
        })
        .collect()
}
