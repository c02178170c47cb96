//! Deterministic residue-level designability scorer.
//!
//! Each position gets a compatibility ratio `p_j[y_j] / max_a p_j[a]`
//! against the hidden target distribution, and the reported score is 100
//! times the mean compatibility over a window around the position. The
//! window couples neighboring residues: a single bad residue drags down a
//! whole neighborhood, which is the regime where residue-level credit
//! assignment differs from a sequence-level reward.

use serde::{Deserialize, Serialize};

use crate::domain::{AminoAcid, ScoredSequence, StructureInstance};
use crate::error::{Error, Result};
use crate::synth::{target_distribution, HiddenTargetMap};

pub const DEFAULT_WINDOW_RADIUS: usize = 2;
pub const SCORE_SCALE: f64 = 100.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleConfig {
    /// Half-width of the score window; couples `2r+1` residues.
    #[serde(default = "default_radius")]
    pub window_radius: usize,
}

fn default_radius() -> usize {
    DEFAULT_WINDOW_RADIUS
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig { window_radius: DEFAULT_WINDOW_RADIUS }
    }
}

impl OracleConfig {
    pub fn validate(&self) -> Result<()> {
        if self.window_radius > 8 {
            return Err(Error::config(format!(
                "oracle window_radius {} exceeds the maximum of 8",
                self.window_radius
            )));
        }
        Ok(())
    }
}

/// Per-position compatibility of a sequence with the hidden target:
/// `p_j[y_j] / max_a p_j[a]`, in (0, 1].
fn compatibilities(
    map: &HiddenTargetMap,
    structure: &StructureInstance,
    residues: &[AminoAcid],
) -> Result<Vec<f64>> {
    let l = structure.len();
    if residues.len() != l {
        return Err(Error::data(format!(
            "sequence length {} does not match structure `{}` length {l}",
            residues.len(),
            structure.id
        )));
    }
    (0..l)
        .map(|j| {
            let p = target_distribution(map, structure, j)?;
            let max = p.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            Ok(p[residues[j].index()] / max)
        })
        .collect()
}

/// Per-residue scores: 100 times the mean compatibility over the window
/// `|j - i| <= r`, truncated at the boundaries.
pub fn score(
    map: &HiddenTargetMap,
    structure: &StructureInstance,
    residues: &[AminoAcid],
    cfg: &OracleConfig,
) -> Result<Vec<f64>> {
    cfg.validate()?;
    let compat = compatibilities(map, structure, residues)?;
    Ok(windowed_mean(&compat, cfg.window_radius)
        .into_iter()
        .map(|c| SCORE_SCALE * c)
        .collect())
}

/// Truncated-window running mean used by [`score`]. Exposed for tests.
pub fn windowed_mean(values: &[f64], radius: usize) -> Vec<f64> {
    let l = values.len();
    (0..l)
        .map(|i| {
            let lo = i.saturating_sub(radius);
            let hi = (i + radius).min(l - 1);
            let window = &values[lo..=hi];
            window.iter().sum::<f64>() / window.len() as f64
        })
        .collect()
}

/// Arithmetic mean of a per-residue score vector.
pub fn mean_score(plddt: &[f64]) -> f64 {
    plddt.iter().sum::<f64>() / plddt.len() as f64
}

/// Scores a sequence and packages it as a [`ScoredSequence`].
pub fn score_sequence(
    map: &HiddenTargetMap,
    structure: &StructureInstance,
    residues: Vec<AminoAcid>,
    cfg: &OracleConfig,
) -> Result<ScoredSequence> {
    let plddt = score(map, structure, &residues, cfg)?;
    ScoredSequence::new(structure.id.clone(), residues, plddt)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::FEATURE_DIM;
    use crate::seed::derive_seed;
    use crate::synth::{argmax_sequence, gen_structures, sample_target_sequence};

    fn fixture(seed: u64, len_range: [usize; 2]) -> (HiddenTargetMap, StructureInstance) {
        let map = HiddenTargetMap::generate(seed);
        let s = gen_structures(1, len_range, seed).unwrap().remove(0);
        (map, s)
    }

    #[test]
    fn argmax_sequence_scores_one_hundred_everywhere() {
        let (map, s) = fixture(21, [16, 24]);
        let y = argmax_sequence(&map, &s).unwrap();
        let scores = score(&map, &s, &y, &OracleConfig::default()).unwrap();
        for &v in &scores {
            assert!((v - 100.0).abs() < 1e-9);
        }
    }

    // L = 1 is below the structure validity floor, so the single-term case
    // is exercised through windowed_mean directly: one compat of 0.5 with
    // radius 0 gives a score of 50.
    #[test]
    fn single_term_window() {
        let w = windowed_mean(&[0.5], 0);
        assert_eq!(w.len(), 1);
        assert!((SCORE_SCALE * w[0] - 50.0).abs() < 1e-12);
    }

    // Hand evaluation of truncated windows for compat [1.0, 0.5, 1.0],
    // radius 1: scores [75, 83.333, 75], mean 77.778.
    #[test]
    fn truncated_window_hand_example() {
        let compat = [1.0, 0.5, 1.0];
        let scores: Vec<f64> = windowed_mean(&compat, 1).iter().map(|c| c * SCORE_SCALE).collect();
        assert!((scores[0] - 75.0).abs() < 1e-9);
        assert!((scores[1] - 250.0 / 3.0).abs() < 1e-9);
        assert!((scores[2] - 75.0).abs() < 1e-9);
        assert!((mean_score(&scores) - 77.778).abs() < 1e-3);

        // permutation leaves the mean unchanged
        let permuted = vec![scores[2], scores[0], scores[1]];
        assert!((mean_score(&permuted) - mean_score(&scores)).abs() < 1e-12);
    }

    // Brute-force window enumeration oracle against the implementation.
    #[test]
    fn windowed_mean_matches_brute_force() {
        let (map, s) = fixture(23, [24, 32]);
        let y = sample_target_sequence(&map, &s, 1.0, 99).unwrap();
        for radius in 0..=3usize {
            let cfg = OracleConfig { window_radius: radius };
            let got = score(&map, &s, &y, &cfg).unwrap();
            let compat: Vec<f64> = {
                // reconstruct compat via radius-0 scores
                score(&map, &s, &y, &OracleConfig { window_radius: 0 })
                    .unwrap()
                    .iter()
                    .map(|v| v / SCORE_SCALE)
                    .collect()
            };
            for i in 0..s.len() {
                let mut acc = 0.0;
                let mut n = 0.0;
                for j in 0..s.len() {
                    if i.abs_diff(j) <= radius {
                        acc += compat[j];
                        n += 1.0;
                    }
                }
                assert!(
                    (got[i] - SCORE_SCALE * acc / n).abs() < 1e-9,
                    "radius {radius}, position {i}"
                );
            }
        }
    }

    #[test]
    fn scores_live_in_half_open_range() {
        let (map, s) = fixture(25, [24, 40]);
        for k in 0..8u64 {
            let y = sample_target_sequence(&map, &s, 1.5, derive_seed(25, "y", &[k])).unwrap();
            let scores = score(&map, &s, &y, &OracleConfig::default()).unwrap();
            for &v in &scores {
                assert!(v > 0.0 && v <= 100.0);
            }
        }
    }

    // Locality: changing y_i only moves scores within the window radius.
    #[test]
    fn locality_of_single_residue_edits() {
        let (map, s) = fixture(27, [32, 32]);
        let cfg = OracleConfig::default();
        let y = sample_target_sequence(&map, &s, 1.0, 7).unwrap();
        let base = score(&map, &s, &y, &cfg).unwrap();
        let edit_pos = 16;
        let mut edited = y.clone();
        edited[edit_pos] = AminoAcid::new((y[edit_pos].index() + 1) % 20).unwrap();
        let after = score(&map, &s, &edited, &cfg).unwrap();
        for i in 0..s.len() {
            if i.abs_diff(edit_pos) > cfg.window_radius {
                assert_eq!(base[i], after[i], "position {i} is outside the window");
            }
        }
    }

    // Monotonicity: replacing y_i with the argmax residue never lowers any
    // score and strictly raises scores within the window when the previous
    // compatibility was below 1.
    #[test]
    fn argmax_substitution_is_monotone() {
        let (map, s) = fixture(29, [24, 24]);
        let cfg = OracleConfig::default();
        let y = sample_target_sequence(&map, &s, 2.0, 17).unwrap();
        let greedy = argmax_sequence(&map, &s).unwrap();
        for pos in 0..s.len() {
            if y[pos] == greedy[pos] {
                continue;
            }
            let base = score(&map, &s, &y, &cfg).unwrap();
            let mut improved = y.clone();
            improved[pos] = greedy[pos];
            let after = score(&map, &s, &improved, &cfg).unwrap();
            for i in 0..s.len() {
                assert!(after[i] >= base[i] - 1e-12);
                if i.abs_diff(pos) <= cfg.window_radius {
                    assert!(after[i] > base[i], "score at {i} should strictly increase");
                }
            }
        }
    }

    #[test]
    fn length_mismatch_is_an_error() {
        let (map, s) = fixture(31, [8, 8]);
        let y = vec![AminoAcid::new(0).unwrap(); 7];
        assert!(score(&map, &s, &y, &OracleConfig::default()).is_err());
    }

    #[test]
    fn zero_feature_position_is_degenerate_uniform() {
        // documented degeneracy: a uniform target distribution makes every
        // residue fully compatible at that position
        let map = HiddenTargetMap::generate(33);
        let mut s = gen_structures(1, [8, 8], 33).unwrap().remove(0);
        s.features[4] = [0.0; FEATURE_DIM];
        let y = vec![AminoAcid::new(7).unwrap(); 8];
        let c = compatibilities(&map, &s, &y).unwrap();
        assert!((c[4] - 1.0).abs() < 1e-12);
    }
}
