use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive};
use rayon::prelude::*;
use serde::Serialize;

use super::{smith_normal_form, IntMatrix};
use crate::chain::{boundary_square_residual, BoundaryResidual, ChainComplex, SignConvention};
use crate::error::{Error, Result};

/// A finitely generated abelian group `Z^free_rank ⊕ Z_{d_1} ⊕ ...`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize)]
pub struct HomologyGroup {
    pub free_rank: usize,
    /// Each entry is at least 2 and divides the next.
    pub torsion: Vec<u64>,
}

impl HomologyGroup {
    pub fn trivial() -> Self {
        Self::default()
    }

    pub fn free(rank: usize) -> Self {
        HomologyGroup {
            free_rank: rank,
            torsion: Vec::new(),
        }
    }

    /// Builds the group from arbitrary cyclic factors (`0` meaning `Z`),
    /// normalizing the torsion part to invariant-factor form.
    pub fn from_cyclic(factors: &[u64]) -> Self {
        let free_rank = factors.iter().filter(|&&d| d == 0).count();
        let torsion_diag: Vec<Vec<i64>> = {
            let t: Vec<u64> = factors.iter().copied().filter(|&d| d > 1).collect();
            (0..t.len())
                .map(|i| (0..t.len()).map(|j| if i == j { t[i] as i64 } else { 0 }).collect())
                .collect()
        };
        let torsion = smith_normal_form(&IntMatrix::from_rows(&torsion_diag))
            .diagonal
            .iter()
            .filter_map(|d| d.to_u64())
            .filter(|&d| d > 1)
            .collect();
        HomologyGroup { free_rank, torsion }
    }

    pub fn is_trivial(&self) -> bool {
        self.free_rank == 0 && self.torsion.is_empty()
    }
}

impl fmt::Display for HomologyGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        match self.free_rank {
            0 => {}
            1 => parts.push("Z".to_string()),
            a => parts.push(format!("Z^{a}")),
        }
        parts.extend(self.torsion.iter().map(|d| format!("Z_{d}")));
        if parts.is_empty() {
            f.write_str("0")
        } else {
            f.write_str(&parts.join(" ⊕ "))
        }
    }
}

fn not_a_complex(res: BoundaryResidual) -> Error {
    let (row, column) = res.witness.expect("nonzero residual carries a witness");
    Error::NotAChainComplex {
        row,
        column,
        value: res.max_abs_entry.to_i64().unwrap_or(i64::MAX),
    }
}

/// `H_r = ker d_r / im d_{r+1}`. Fails if `d∘d != 0`.
pub fn homology_at_degree(c: &ChainComplex, r: isize) -> Result<HomologyGroup> {
    let res = boundary_square_residual(c);
    if !res.is_zero() {
        return Err(not_a_complex(res));
    }
    homology_unchecked(c, r)
}

fn homology_unchecked(c: &ChainComplex, r: isize) -> Result<HomologyGroup> {
    let cr = c.rank_at(r);
    if cr == 0 {
        return Ok(HomologyGroup::trivial());
    }
    let d_r = smith_normal_form(&IntMatrix::from_sparse(&c.boundary(r)));
    let kernel_dim = cr - d_r.original_rank;

    // Coordinates of im d_{r+1} in the kernel basis given by the trailing
    // columns of the right transform of d_r.
    let image = d_r.right_inverse.mul(&IntMatrix::from_sparse(&c.boundary(r + 1)));
    let leading = image.rows() - kernel_dim;
    if !(0..leading).all(|i| (0..image.cols()).all(|j| image[(i, j)] == BigInt::from(0))) {
        return Err(Error::InternalConsistency(format!(
            "image of d_{} leaves the kernel of d_{r}",
            r + 1
        )));
    }
    let quotient = smith_normal_form(&image.row_tail(leading));

    let mut torsion = Vec::new();
    for d in &quotient.diagonal[..quotient.original_rank] {
        if d.is_one() {
            continue;
        }
        torsion.push(
            d.to_u64()
                .ok_or_else(|| Error::InternalConsistency(format!("torsion coefficient {d} exceeds 64 bits")))?,
        );
    }
    Ok(HomologyGroup {
        free_rank: kernel_dim - quotient.original_rank,
        torsion,
    })
}

/// All homology groups of a complex plus the Euler characteristic.
#[derive(Clone, Debug, Serialize)]
pub struct HomologyTable {
    pub n: usize,
    pub m: usize,
    pub convention: SignConvention,
    pub groups: Vec<DegreeGroup>,
    pub euler: i64,
    pub residual: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DegreeGroup {
    pub r: usize,
    pub free_rank: usize,
    pub torsion: Vec<u64>,
}

impl DegreeGroup {
    pub fn group(&self) -> HomologyGroup {
        HomologyGroup {
            free_rank: self.free_rank,
            torsion: self.torsion.clone(),
        }
    }
}

impl HomologyTable {
    /// Alternating sum of free ranks.
    pub fn betti_euler(&self) -> i64 {
        self.groups
            .iter()
            .map(|g| {
                if g.r % 2 == 0 {
                    g.free_rank as i64
                } else {
                    -(g.free_rank as i64)
                }
            })
            .sum()
    }
}

pub fn homology_table(c: &ChainComplex) -> Result<HomologyTable> {
    let res = boundary_square_residual(c);
    if !res.is_zero() {
        return Err(not_a_complex(res));
    }
    let groups = (0..=c.top_degree())
        .into_par_iter()
        .map(|r| {
            homology_unchecked(c, r as isize).map(|g| DegreeGroup {
                r,
                free_rank: g.free_rank,
                torsion: g.torsion,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(HomologyTable {
        n: c.n,
        m: c.m,
        convention: c.convention,
        groups,
        euler: c.euler_characteristic(),
        residual: 0,
    })
}
