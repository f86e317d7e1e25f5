//! The Witten chain complex of `G_{n,m}(R)`.
//!
//! Generators in degree `r` are the critical points of Morse index `r`; the
//! boundary `d_r` only connects a point to its lowerings `i_k -> i_k - 1`.
//! The integer attached to each lowering is chosen by a [`SignConvention`].

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::combinatorics::{check_dimensions, enumerate_critical_points, CriticalPoint};
use crate::error::{Error, Result};

/// How incidence numbers are assigned to the lowering `i_k -> i_k - 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SignConvention {
    /// `1 + (-1)^(i_k - k)`, every coefficient non-negative.
    PaperLemma11,
    /// `(-1)^(sum_{t<k} (i_t - t)) * (1 + (-1)^(i_k - k))`.
    CorrectedAlternating,
    /// `PaperLemma11` reduced mod 2, i.e. identically zero.
    ModTwo,
    /// Incidence numbers from transporting unstable orientations along the
    /// two connecting orbits through the exact chart-change Jacobian:
    /// `(-1)^(d - P + m - k) * (1 + (-1)^(i_k + m))` with `d` the source
    /// index and `P = sum_{t<=k} (i_t - t)`.
    FlowOriented,
}

impl SignConvention {
    pub const ALL: [SignConvention; 4] = [
        SignConvention::PaperLemma11,
        SignConvention::CorrectedAlternating,
        SignConvention::ModTwo,
        SignConvention::FlowOriented,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            SignConvention::PaperLemma11 => "paper",
            SignConvention::CorrectedAlternating => "corrected",
            SignConvention::ModTwo => "mod2",
            SignConvention::FlowOriented => "oriented",
        }
    }
}

impl fmt::Display for SignConvention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for SignConvention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SignConvention::ALL.into_iter().find(|c| c.tag() == s).ok_or_else(|| {
            Error::InvalidParameters(format!(
                "unknown convention `{s}` (expected paper, corrected, mod2 or oriented)"
            ))
        })
    }
}

impl Serialize for SignConvention {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.tag())
    }
}

fn parity_sign(exponent: usize) -> i64 {
    if exponent.is_multiple_of(2) {
        1
    } else {
        -1
    }
}

/// Coefficient of `<O_{.. i_k - 1 ..}>` in the boundary of `<p>`.
pub fn incidence_coefficient(convention: SignConvention, p: &CriticalPoint, slot_k: usize) -> Result<i64> {
    if p.lowered(slot_k).is_none() {
        return Err(Error::InvalidParameters(format!(
            "slot {slot_k} is not a valid lowering of {p}"
        )));
    }
    let labels = p.subset();
    let m = labels.len();
    // excess of slot t (1-based) over its minimum value t
    let excess = |t: usize| labels[t - 1] - t;
    let magnitude = 1 + parity_sign(excess(slot_k));
    let value = match convention {
        SignConvention::PaperLemma11 => magnitude,
        SignConvention::CorrectedAlternating => {
            let before: usize = (1..slot_k).map(excess).sum();
            parity_sign(before) * magnitude
        }
        SignConvention::ModTwo => magnitude % 2,
        SignConvention::FlowOriented => {
            let through_k: usize = (1..=slot_k).map(excess).sum();
            let exponent = p.morse_index() - through_k + m - slot_k;
            parity_sign(exponent) * (1 + parity_sign(labels[slot_k - 1] + m))
        }
    };
    Ok(value)
}

/// Coordinate-format integer matrix; entries are sorted by column, then row.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct SparseMatrix {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<(usize, usize, i64)>,
}

impl SparseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        SparseMatrix {
            rows,
            cols,
            entries: Vec::new(),
        }
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn to_dense(&self) -> Vec<Vec<i64>> {
        let mut out = vec![vec![0; self.cols]; self.rows];
        for &(r, c, v) in &self.entries {
            out[r][c] += v;
        }
        out
    }

    fn column_entries(&self) -> Vec<Vec<(usize, i64)>> {
        let mut cols = vec![Vec::new(); self.cols];
        for &(r, c, v) in &self.entries {
            cols[c].push((r, v));
        }
        cols
    }
}

#[derive(Clone, Debug)]
pub struct ChainComplex {
    pub n: usize,
    pub m: usize,
    pub convention: SignConvention,
    /// `generators[r]` are the index-`r` critical points, lexicographic.
    pub generators: Vec<Vec<CriticalPoint>>,
    /// `boundaries[r]` is `d_r : C_r -> C_{r-1}`; `d_0` has zero rows.
    pub boundaries: Vec<SparseMatrix>,
}

impl ChainComplex {
    pub fn top_degree(&self) -> usize {
        self.m * (self.n - self.m)
    }

    pub fn rank_at(&self, r: isize) -> usize {
        self.degree(r).map_or(0, |g| g.len())
    }

    pub fn degree(&self, r: isize) -> Option<&[CriticalPoint]> {
        usize::try_from(r)
            .ok()
            .and_then(|r| self.generators.get(r))
            .map(Vec::as_slice)
    }

    /// `d_r`, or a zero map with the right shape outside `0..=top`.
    pub fn boundary(&self, r: isize) -> SparseMatrix {
        match usize::try_from(r).ok().and_then(|r| self.boundaries.get(r)) {
            Some(b) => b.clone(),
            None => SparseMatrix::zeros(self.rank_at(r - 1), self.rank_at(r)),
        }
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.generators
            .iter()
            .enumerate()
            .map(|(r, g)| parity_sign(r) * g.len() as i64)
            .sum()
    }

    pub fn to_json(&self) -> ComplexJson {
        ComplexJson {
            n: self.n,
            m: self.m,
            convention: self.convention,
            degrees: self
                .generators
                .iter()
                .zip(&self.boundaries)
                .enumerate()
                .map(|(r, (gens, b))| DegreeJson {
                    r,
                    generators: gens.clone(),
                    boundary: b.entries.iter().map(|&(i, j, v)| [i as i64, j as i64, v]).collect(),
                })
                .collect(),
        }
    }
}

/// Serialized shape of a [`ChainComplex`].
#[derive(Clone, Debug, Serialize)]
pub struct ComplexJson {
    pub n: usize,
    pub m: usize,
    pub convention: SignConvention,
    pub degrees: Vec<DegreeJson>,
}

#[derive(Clone, Debug, Serialize)]
pub struct DegreeJson {
    pub r: usize,
    pub generators: Vec<CriticalPoint>,
    /// `[row, col, value]` triples of `d_r`.
    pub boundary: Vec<[i64; 3]>,
}

pub fn build_complex(n: usize, m: usize, convention: SignConvention) -> Result<ChainComplex> {
    check_dimensions(n, m)?;
    let top = m * (n - m);
    let mut generators = vec![Vec::new(); top + 1];
    for p in enumerate_critical_points(n, m)? {
        generators[p.morse_index()].push(p);
    }

    let boundaries = (0..=top)
        .into_par_iter()
        .map(|r| {
            if r == 0 {
                return Ok(SparseMatrix::zeros(0, generators[0].len()));
            }
            let targets = &generators[r - 1];
            let mut mat = SparseMatrix::zeros(targets.len(), generators[r].len());
            for (col, p) in generators[r].iter().enumerate() {
                for slot in 1..=m {
                    let Some(q) = p.lowered(slot) else { continue };
                    let value = incidence_coefficient(convention, p, slot)?;
                    if value == 0 {
                        continue;
                    }
                    let row = targets
                        .binary_search(&q)
                        .map_err(|_| Error::InternalConsistency(format!("{q} missing from degree {}", r - 1)))?;
                    mat.entries.push((row, col, value));
                }
            }
            mat.entries.sort_by_key(|&(i, j, _)| (j, i));
            Ok(mat)
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(ChainComplex {
        n,
        m,
        convention,
        generators,
        boundaries,
    })
}

/// Largest entry of `d_r ∘ d_{r+1}` over all degrees.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryResidual {
    pub max_abs_entry: BigInt,
    /// `(row generator in degree r-1, column generator in degree r+1)`.
    pub witness: Option<(CriticalPoint, CriticalPoint)>,
}

impl BoundaryResidual {
    pub fn is_zero(&self) -> bool {
        self.max_abs_entry.is_zero()
    }
}

pub fn boundary_square_residual(c: &ChainComplex) -> BoundaryResidual {
    let mut best = BoundaryResidual {
        max_abs_entry: BigInt::zero(),
        witness: None,
    };
    for r in 1..c.top_degree() {
        let lower = c.boundary(r as isize).column_entries();
        let upper = c.boundary(r as isize + 1).column_entries();
        for (col, entries) in upper.iter().enumerate() {
            let mut acc = vec![BigInt::zero(); c.rank_at(r as isize - 1)];
            for &(mid, v) in entries {
                for &(row, w) in &lower[mid] {
                    acc[row] += BigInt::from(v) * BigInt::from(w);
                }
            }
            for (row, value) in acc.into_iter().enumerate() {
                let value = value.abs();
                if value > best.max_abs_entry {
                    best.max_abs_entry = value;
                    best.witness = Some((c.generators[r - 1][row].clone(), c.generators[r + 1][col].clone()));
                }
            }
        }
    }
    best
}
