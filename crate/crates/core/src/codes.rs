//! Single-distance (m-ary Gray) encoding tables.
//!
//! A table for dimension `d` lists `d²` digit pairs; entry `e` is the pair of
//! digits that Alice encodes as the fractional exponent `e/d`. A usable table is
//! a bijection onto `{0..d−1}²` whose cyclically consecutive entries differ in
//! exactly one digit, i.e. a Hamiltonian cycle on the rook's graph `K_d □ K_d`.

use std::fmt;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{check_dim, QracError, Result};
use crate::qcore::chunk_rng;
use crate::qracse::ProtocolKernel;

pub type DigitPair = [usize; 2];

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EncodingTable {
    d: usize,
    pairs: Vec<DigitPair>,
}

impl EncodingTable {
    /// Checks shape and digit range only; use [`EncodingTable::validate`] for
    /// bijectivity and the single-distance property.
    pub fn new(d: usize, pairs: Vec<DigitPair>) -> Result<Self> {
        check_dim(d)?;
        if pairs.len() != d * d {
            return Err(QracError::Shape(format!("table for d = {d} needs {} entries, got {}", d * d, pairs.len())));
        }
        if let Some(p) = pairs.iter().find(|p| p[0] >= d || p[1] >= d) {
            return Err(QracError::OutOfRange(format!("digit pair {p:?} out of range for d = {d}")));
        }
        Ok(Self { d, pairs })
    }

    /// Like [`EncodingTable::new`] but also requires a valid single-distance table.
    pub fn checked(d: usize, pairs: Vec<DigitPair>) -> Result<Self> {
        let t = Self::new(d, pairs)?;
        let report = t.validate();
        if !report.is_valid() {
            return Err(QracError::Encoding(format!("invalid table: {report}")));
        }
        Ok(t)
    }

    /// Row-major enumeration `{0,0}, {0,1}, …`; not single-distance.
    pub fn lexicographic(d: usize) -> Result<Self> {
        Self::new(d, (0..d * d).map(|i| [i / d, i % d]).collect())
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn pairs(&self) -> &[DigitPair] {
        &self.pairs
    }

    pub fn pair(&self, e: usize) -> DigitPair {
        self.pairs[e]
    }

    pub fn index_of(&self, pair: DigitPair) -> Option<usize> {
        self.pairs.iter().position(|&p| p == pair)
    }

    /// Inverse map indexed by `a·d + b`. Fails unless the table is a bijection.
    pub fn inverse(&self) -> Result<Vec<usize>> {
        let d = self.d;
        let mut inv = vec![usize::MAX; d * d];
        for (e, p) in self.pairs.iter().enumerate() {
            let slot = &mut inv[p[0] * d + p[1]];
            if *slot != usize::MAX {
                return Err(QracError::Encoding(format!("pair {p:?} appears twice")));
            }
            *slot = e;
        }
        Ok(inv)
    }

    pub fn validate(&self) -> ValidationReport {
        let d = self.d;
        let n = d * d;
        let mut seen = vec![0usize; n];
        for p in &self.pairs {
            seen[p[0] * d + p[1]] += 1;
        }
        let missing = (0..n).filter(|&i| seen[i] == 0).map(|i| [i / d, i % d]).collect::<Vec<_>>();
        let duplicates = (0..n).filter(|&i| seen[i] > 1).map(|i| [i / d, i % d]).collect::<Vec<_>>();
        let distance_violations = (0..n)
            .filter(|&e| digit_distance(self.pairs[e], self.pairs[(e + 1) % n]) != 1)
            .collect();
        ValidationReport { bijective: missing.is_empty() && duplicates.is_empty(), missing, duplicates, distance_violations }
    }

    fn map_digits(&self, f: impl Fn(DigitPair) -> DigitPair) -> Self {
        Self { d: self.d, pairs: self.pairs.iter().map(|&p| f(p)).collect() }
    }
}

impl fmt::Debug for EncodingTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "EncodingTable(d={}, ", self.d)?;
        f.debug_list().entries(self.pairs.iter()).finish()?;
        write!(f, ")")
    }
}

impl Serialize for EncodingTable {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.pairs.serialize(s)
    }
}

impl<'de> Deserialize<'de> for EncodingTable {
    fn deserialize<D: Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let pairs = Vec::<DigitPair>::deserialize(de)?;
        let d = (pairs.len() as f64).sqrt().round() as usize;
        EncodingTable::new(d, pairs).map_err(serde::de::Error::custom)
    }
}

fn digit_distance(a: DigitPair, b: DigitPair) -> usize {
    (a[0] != b[0]) as usize + (a[1] != b[1]) as usize
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub bijective: bool,
    pub missing: Vec<DigitPair>,
    pub duplicates: Vec<DigitPair>,
    /// Indices `e` where the step `e → e+1 (mod d²)` changes zero or two digits.
    pub distance_violations: Vec<usize>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.bijective && self.distance_violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_valid() {
            return write!(f, "valid");
        }
        if !self.bijective {
            write!(f, "not a bijection (missing {:?}, duplicated {:?}); ", self.missing, self.duplicates)?;
        }
        if !self.distance_violations.is_empty() {
            write!(f, "single-distance violated at steps {:?}", self.distance_violations)?;
        }
        Ok(())
    }
}

/// The published tables for `d = 2, 3, 4`.
pub fn builtin_table(d: usize) -> Result<EncodingTable> {
    let pairs: &[DigitPair] = match d {
        2 => &[[0, 0], [0, 1], [1, 1], [1, 0]],
        3 => &[[0, 0], [0, 1], [0, 2], [1, 2], [1, 0], [1, 1], [2, 1], [2, 2], [2, 0]],
        4 => &[
            [0, 0], [0, 1], [0, 2], [0, 3],
            [1, 3], [1, 0], [1, 1], [1, 2],
            [2, 2], [2, 3], [2, 0], [2, 1],
            [3, 1], [3, 2], [3, 3], [3, 0],
        ],
        _ => return Err(QracError::NotAvailable(format!("no built-in table for d = {d}; use search or generation"))),
    };
    EncodingTable::new(d, pairs.to_vec())
}

/// Run-structured table: `d` runs of length `d`; the first digit is the run
/// index and the second digit cycles, each run starting where the previous
/// one ended so run boundaries change only the first digit.
pub fn generate_single_distance(d: usize) -> Result<EncodingTable> {
    check_dim(d)?;
    let mut pairs = Vec::with_capacity(d * d);
    for run in 0..d {
        let start = (d - run % d) % d;
        for j in 0..d {
            pairs.push([run, (start + j) % d]);
        }
    }
    EncodingTable::new(d, pairs)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    PMin,
    PAvg,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchOutcome {
    pub table: EncodingTable,
    pub score: f64,
    pub objective: Objective,
    pub evaluations: usize,
}

const TIE_TOL: f64 = 1e-12;
const MAX_RESTARTS: usize = 8;

fn better(a: (&EncodingTable, f64), b: (&EncodingTable, f64)) -> bool {
    a.1 > b.1 + TIE_TOL || ((a.1 - b.1).abs() <= TIE_TOL && a.0 < b.0)
}

/// Searches valid tables for the best protocol score.
///
/// `d = 2` is enumerated exhaustively. For `d = 3..5` each of up to eight
/// restarts hill-climbs from a seeded starting cycle with moves that keep the
/// table valid (segment reversals, digit relabelings, rotations, reflection).
/// Restart 0 starts from [`generate_single_distance`], so the result never
/// scores below the run-structured table.
pub fn search_tables(d: usize, objective: Objective, budget: usize, seed: u64) -> Result<SearchOutcome> {
    check_dim(d)?;
    if budget == 0 {
        return Err(QracError::InvalidArgument("search budget must be positive".into()));
    }
    if d > 5 {
        return Err(QracError::OutOfRange(format!("table search supports d ≤ 5, got {d}")));
    }
    let kernel = ProtocolKernel::new(d)?;
    let score = |t: &EncodingTable| -> f64 {
        let s = kernel.score(t).expect("search only visits valid tables");
        match objective {
            Objective::PMin => s.p_min,
            Objective::PAvg => s.p_avg,
        }
    };

    if d == 2 {
        let all = enumerate_valid_tables(2);
        let evaluations = all.len();
        let (table, value) = all
            .into_iter()
            .map(|t| {
                let s = score(&t);
                (t, s)
            })
            .reduce(|a, b| if better((&b.0, b.1), (&a.0, a.1)) { b } else { a })
            .expect("at least one d=2 table exists");
        return Ok(SearchOutcome { table, score: value, objective, evaluations });
    }

    let restarts = MAX_RESTARTS.min(budget);
    let per_restart = budget / restarts;
    let results: Vec<(EncodingTable, f64, usize)> = (0..restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = chunk_rng(seed, r as u64);
            let start = if r == 0 {
                generate_single_distance(d).unwrap()
            } else {
                random_cycle(d, &mut rng).unwrap_or_else(|| generate_single_distance(d).unwrap())
            };
            hill_climb(start, per_restart, &mut rng, &score)
        })
        .collect();

    let evaluations = results.iter().map(|r| r.2).sum();
    let (table, value, _) = results
        .into_iter()
        .reduce(|a, b| if better((&b.0, b.1), (&a.0, a.1)) { b } else { a })
        .expect("at least one restart");
    Ok(SearchOutcome { table, score: value, objective, evaluations })
}

fn hill_climb(
    start: EncodingTable,
    budget: usize,
    rng: &mut ChaCha8Rng,
    score: &impl Fn(&EncodingTable) -> f64,
) -> (EncodingTable, f64, usize) {
    let mut current_score = score(&start);
    let mut current = start;
    let mut best = (current.clone(), current_score);
    let mut evaluations = 1;
    while evaluations < budget {
        let Some(candidate) = propose(&current, rng) else { continue };
        let s = score(&candidate);
        evaluations += 1;
        if s + TIE_TOL >= current_score {
            current = candidate;
            current_score = s;
            if better((&current, current_score), (&best.0, best.1)) {
                best = (current.clone(), current_score);
            }
        }
    }
    (best.0, best.1, evaluations)
}

fn propose(t: &EncodingTable, rng: &mut ChaCha8Rng) -> Option<EncodingTable> {
    let d = t.d;
    let n = d * d;
    match rng.gen_range(0..4) {
        0 => {
            // 2-opt: reverse pairs[i+1..=j], valid when the two new edges are single-distance
            for _ in 0..32 {
                let i = rng.gen_range(0..n);
                let j = rng.gen_range(0..n);
                let (i, j) = if i < j { (i, j) } else { (j, i) };
                if j - i < 2 || (i == 0 && j == n - 1) {
                    continue;
                }
                let p = &t.pairs;
                if digit_distance(p[i], p[j]) == 1 && digit_distance(p[i + 1], p[(j + 1) % n]) == 1 {
                    let mut pairs = p.clone();
                    pairs[i + 1..=j].reverse();
                    return Some(EncodingTable { d, pairs });
                }
            }
            None
        }
        1 => {
            let pos = rng.gen_range(0..2);
            let u = rng.gen_range(0..d);
            let v = rng.gen_range(0..d);
            if u == v {
                return None;
            }
            Some(t.map_digits(|mut p| {
                if p[pos] == u {
                    p[pos] = v;
                } else if p[pos] == v {
                    p[pos] = u;
                }
                p
            }))
        }
        2 => {
            let k = rng.gen_range(1..n);
            let mut pairs = t.pairs.clone();
            pairs.rotate_left(k);
            Some(EncodingTable { d, pairs })
        }
        _ => {
            let mut pairs = t.pairs.clone();
            pairs.reverse();
            Some(EncodingTable { d, pairs })
        }
    }
}

/// Random Hamiltonian cycle on the rook's graph from `{0,0}`, by randomized
/// backtracking with a step cap.
fn random_cycle(d: usize, rng: &mut ChaCha8Rng) -> Option<EncodingTable> {
    let n = d * d;
    let mut visited = vec![false; n];
    let mut path = vec![[0usize, 0usize]];
    visited[0] = true;
    let mut stack: Vec<Vec<DigitPair>> = vec![shuffled_neighbours([0, 0], d, rng)];
    let mut steps = 0usize;
    while let Some(options) = stack.last_mut() {
        steps += 1;
        if steps > 200_000 {
            return None;
        }
        if path.len() == n {
            if digit_distance(*path.last().unwrap(), path[0]) == 1 {
                return Some(EncodingTable { d, pairs: path });
            }
            let p = path.pop().unwrap();
            visited[p[0] * d + p[1]] = false;
            stack.pop();
            continue;
        }
        match options.pop() {
            Some(next) if !visited[next[0] * d + next[1]] => {
                visited[next[0] * d + next[1]] = true;
                path.push(next);
                let nb = shuffled_neighbours(next, d, rng);
                stack.push(nb);
            }
            Some(_) => {}
            None => {
                stack.pop();
                if let Some(p) = path.pop() {
                    visited[p[0] * d + p[1]] = false;
                }
            }
        }
    }
    None
}

fn shuffled_neighbours(p: DigitPair, d: usize, rng: &mut ChaCha8Rng) -> Vec<DigitPair> {
    let mut out: Vec<DigitPair> = (0..d)
        .filter(|&v| v != p[0])
        .map(|v| [v, p[1]])
        .chain((0..d).filter(|&v| v != p[1]).map(|v| [p[0], v]))
        .collect();
    out.shuffle(rng);
    out
}

/// Every valid table with entry 0 fixed at `{0,0}`; only sensible for `d ≤ 3`.
pub fn enumerate_valid_tables(d: usize) -> Vec<EncodingTable> {
    let n = d * d;
    let mut out = Vec::new();
    let mut path = vec![[0usize, 0usize]];
    let mut used = vec![false; n];
    used[0] = true;
    fn rec(d: usize, path: &mut Vec<DigitPair>, used: &mut [bool], out: &mut Vec<EncodingTable>) {
        let n = d * d;
        if path.len() == n {
            if digit_distance(*path.last().unwrap(), path[0]) == 1 {
                out.push(EncodingTable { d, pairs: path.clone() });
            }
            return;
        }
        let last = *path.last().unwrap();
        for i in 0..n {
            let p = [i / d, i % d];
            if !used[i] && digit_distance(last, p) == 1 {
                used[i] = true;
                path.push(p);
                rec(d, path, used, out);
                path.pop();
                used[i] = false;
            }
        }
    }
    rec(d, &mut path, &mut used, &mut out);
    out
}
