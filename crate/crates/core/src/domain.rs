//! Shared domain types: the amino-acid vocabulary, synthetic backbones,
//! and oracle-scored sequences.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of canonical amino acids.
pub const VOCAB_SIZE: usize = 20;

/// Per-position feature dimension of a synthetic backbone.
pub const FEATURE_DIM: usize = 8;

/// Minimum / maximum supported backbone length.
pub const MIN_LENGTH: usize = 8;
pub const MAX_LENGTH: usize = 512;

/// One-letter codes in fixed alphabetical order. Index i of every logit or
/// probability vector in this crate refers to `CODES[i]`.
pub const CODES: [char; VOCAB_SIZE] = [
    'A', 'C', 'D', 'E', 'F', 'G', 'H', 'I', 'K', 'L', 'M', 'N', 'P', 'Q', 'R', 'S', 'T', 'V',
    'W', 'Y',
];

/// A canonical amino acid, stored as its index into [`CODES`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AminoAcid(u8);

impl AminoAcid {
    pub fn new(index: usize) -> Result<Self> {
        if index < VOCAB_SIZE {
            Ok(AminoAcid(index as u8))
        } else {
            Err(Error::data(format!("amino-acid index {index} out of range 0..20")))
        }
    }

    pub fn from_code(code: char) -> Result<Self> {
        CODES
            .iter()
            .position(|&c| c == code)
            .map(|i| AminoAcid(i as u8))
            .ok_or_else(|| Error::data(format!("unknown amino-acid code '{code}'")))
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn code(self) -> char {
        CODES[self.0 as usize]
    }
}

/// Renders a residue vector as a one-letter-code string ("ACDE...").
pub fn sequence_to_string(residues: &[AminoAcid]) -> String {
    residues.iter().map(|aa| aa.code()).collect()
}

/// Parses a one-letter-code string into residues.
pub fn sequence_from_string(s: &str) -> Result<Vec<AminoAcid>> {
    s.chars().map(AminoAcid::from_code).collect()
}

/// A synthetic "backbone": per-position feature vectors that condition both
/// the oracle and the policy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructureInstance {
    pub id: String,
    pub features: Vec<[f64; FEATURE_DIM]>,
}

impl StructureInstance {
    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        let l = self.len();
        if !(MIN_LENGTH..=MAX_LENGTH).contains(&l) {
            return Err(Error::data(format!(
                "structure `{}` has length {l}, outside [{MIN_LENGTH}, {MAX_LENGTH}]",
                self.id
            )));
        }
        for (i, row) in self.features.iter().enumerate() {
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::data(format!(
                    "structure `{}` has a non-finite feature at position {i}",
                    self.id
                )));
            }
        }
        Ok(())
    }
}

/// A candidate sequence with per-residue oracle scores and their mean.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoredSequence {
    pub structure_id: String,
    pub residues: Vec<AminoAcid>,
    pub plddt: Vec<f64>,
    pub mean_plddt: f64,
}

impl ScoredSequence {
    /// Builds a scored sequence, computing the mean from the score vector.
    pub fn new(structure_id: impl Into<String>, residues: Vec<AminoAcid>, plddt: Vec<f64>) -> Result<Self> {
        if residues.len() != plddt.len() {
            return Err(Error::data(format!(
                "scored sequence has {} residues but {} scores",
                residues.len(),
                plddt.len()
            )));
        }
        if residues.is_empty() {
            return Err(Error::data("scored sequence is empty"));
        }
        for (i, &s) in plddt.iter().enumerate() {
            if !(s.is_finite() && s > 0.0 && s <= 100.0) {
                return Err(Error::data(format!(
                    "per-residue score {s} at position {i} outside (0, 100]"
                )));
            }
        }
        let mean = plddt.iter().sum::<f64>() / plddt.len() as f64;
        Ok(ScoredSequence {
            structure_id: structure_id.into(),
            residues,
            plddt,
            mean_plddt: mean,
        })
    }

    pub fn len(&self) -> usize {
        self.residues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.residues.is_empty()
    }

    /// Checks the stored mean against a recomputation (1e-9 tolerance).
    pub fn validate(&self) -> Result<()> {
        let mean = self.plddt.iter().sum::<f64>() / self.plddt.len() as f64;
        if (mean - self.mean_plddt).abs() > 1e-9 {
            return Err(Error::data(format!(
                "stored mean pLDDT {} disagrees with recomputed {mean}",
                self.mean_plddt
            )));
        }
        Ok(())
    }
}
