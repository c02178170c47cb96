//! Synthetic dataset generation: backbones, the hidden target map that
//! drives the oracle, native sequences for reference pretraining, and the
//! train/validation split.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::domain::{AminoAcid, StructureInstance, FEATURE_DIM, MAX_LENGTH, MIN_LENGTH, VOCAB_SIZE};
use crate::error::{Error, Result};
use crate::math::{sample_index, softmax_in_place};
use crate::seed::{derive_seed, seeded_rng};

/// Sampling temperature for native sequences. Natives mostly but not always
/// match the oracle optimum, so recovery pretraining is deliberately
/// misaligned with designability.
pub const NATIVE_TEMPERATURE: f64 = 0.5;

/// The hidden sequence-structure relationship: amino-acid logits as a linear
/// map of the per-position features. Global per dataset, never exposed to
/// the policy as input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HiddenTargetMap {
    /// Row-major 20 x 8 logit matrix.
    pub w_star: Vec<f64>,
}

impl HiddenTargetMap {
    /// Draws the map once per dataset from the master seed.
    pub fn generate(master_seed: u64) -> Self {
        let mut rng = seeded_rng(derive_seed(master_seed, "hidden_map", &[]));
        let w_star = (0..VOCAB_SIZE * FEATURE_DIM)
            .map(|_| rng.sample::<f64, _>(StandardNormal))
            .collect();
        HiddenTargetMap { w_star }
    }

    pub fn validate(&self) -> Result<()> {
        if self.w_star.len() != VOCAB_SIZE * FEATURE_DIM {
            return Err(Error::data(format!(
                "hidden map has {} entries, expected {}",
                self.w_star.len(),
                VOCAB_SIZE * FEATURE_DIM
            )));
        }
        if self.w_star.iter().any(|v| !v.is_finite()) {
            return Err(Error::data("hidden map contains a non-finite entry"));
        }
        Ok(())
    }

    /// Raw logits `W* . f_i` for one position.
    pub fn logits(&self, structure: &StructureInstance, position: usize) -> Result<[f64; VOCAB_SIZE]> {
        let f = structure.features.get(position).ok_or_else(|| {
            Error::data(format!(
                "position {position} out of range for structure `{}` of length {}",
                structure.id,
                structure.len()
            ))
        })?;
        let mut out = [0.0; VOCAB_SIZE];
        for (a, o) in out.iter_mut().enumerate() {
            let row = &self.w_star[a * FEATURE_DIM..(a + 1) * FEATURE_DIM];
            *o = row.iter().zip(f.iter()).map(|(w, x)| w * x).sum();
        }
        Ok(out)
    }
}

/// Per-position target distribution `softmax(W* . f_i)`.
pub fn target_distribution(
    map: &HiddenTargetMap,
    structure: &StructureInstance,
    position: usize,
) -> Result<[f64; VOCAB_SIZE]> {
    let mut probs = map.logits(structure, position)?;
    softmax_in_place(&mut probs);
    Ok(probs)
}

/// Generates `count` structures with lengths uniform in `[lmin, lmax]` and
/// i.i.d. standard-normal features. Each structure draws from its own
/// derived seed, so generation is order-independent.
pub fn gen_structures(count: usize, length_range: [usize; 2], seed: u64) -> Result<Vec<StructureInstance>> {
    let [lmin, lmax] = length_range;
    if count == 0 {
        return Err(Error::config("structure count must be at least 1"));
    }
    if !(MIN_LENGTH..=MAX_LENGTH).contains(&lmin) || lmax < lmin || lmax > MAX_LENGTH {
        return Err(Error::config(format!(
            "invalid length range [{lmin}, {lmax}]; need {MIN_LENGTH} <= min <= max <= {MAX_LENGTH}"
        )));
    }
    let mut out = Vec::with_capacity(count);
    for i in 0..count {
        let mut rng = seeded_rng(derive_seed(seed, "structure", &[i as u64]));
        let length = rng.random_range(lmin..=lmax);
        let features = (0..length)
            .map(|_| {
                let mut row = [0.0; FEATURE_DIM];
                for v in row.iter_mut() {
                    *v = rng.sample(StandardNormal);
                }
                row
            })
            .collect();
        out.push(StructureInstance { id: format!("s{i:05}"), features });
    }
    Ok(out)
}

/// Samples a sequence position-by-position from the tempered target
/// distribution `softmax((W* . f_i) / tau)`.
pub fn sample_target_sequence(
    map: &HiddenTargetMap,
    structure: &StructureInstance,
    tau: f64,
    seed: u64,
) -> Result<Vec<AminoAcid>> {
    let mut rng = seeded_rng(seed);
    let mut out = Vec::with_capacity(structure.len());
    for i in 0..structure.len() {
        let mut probs = map.logits(structure, i)?;
        for p in probs.iter_mut() {
            *p /= tau;
        }
        softmax_in_place(&mut probs);
        out.push(AminoAcid::new(sample_index(&mut rng, &probs))?);
    }
    Ok(out)
}

/// The per-position argmax of the target logits: the oracle optimum.
pub fn argmax_sequence(map: &HiddenTargetMap, structure: &StructureInstance) -> Result<Vec<AminoAcid>> {
    (0..structure.len())
        .map(|i| {
            let logits = map.logits(structure, i)?;
            let best = logits
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.total_cmp(b.1))
                .map(|(a, _)| a)
                .unwrap();
            AminoAcid::new(best)
        })
        .collect()
}

/// The "native" sequence of a structure, sampled at the sharpening
/// temperature [`NATIVE_TEMPERATURE`].
pub fn gen_native(map: &HiddenTargetMap, structure: &StructureInstance, seed: u64) -> Result<Vec<AminoAcid>> {
    sample_target_sequence(map, structure, NATIVE_TEMPERATURE, seed)
}

/// Train/validation partition of structure ids.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetSplit {
    pub train_ids: Vec<String>,
    pub val_ids: Vec<String>,
}

/// Deterministic shuffle-then-partition split. `|val| = round(fraction * N)`
/// with round-half-away-from-zero.
pub fn split(ids: &[String], val_fraction: f64, seed: u64) -> Result<DatasetSplit> {
    if ids.is_empty() {
        return Err(Error::data("cannot split an empty id list"));
    }
    if !(val_fraction > 0.0 && val_fraction < 1.0) {
        return Err(Error::config(format!(
            "val_fraction {val_fraction} must lie strictly between 0 and 1"
        )));
    }
    let mut order: Vec<usize> = (0..ids.len()).collect();
    let mut rng = seeded_rng(derive_seed(seed, "split", &[]));
    // Fisher-Yates
    for i in (1..order.len()).rev() {
        let j = rng.random_range(0..=i);
        order.swap(i, j);
    }
    let n_val = (val_fraction * ids.len() as f64).round() as usize;
    let n_val = n_val.clamp(1, ids.len() - 1);
    let mut val_ids: Vec<String> = order[..n_val].iter().map(|&i| ids[i].clone()).collect();
    let mut train_ids: Vec<String> = order[n_val..].iter().map(|&i| ids[i].clone()).collect();
    val_ids.sort();
    train_ids.sort();
    Ok(DatasetSplit { train_ids, val_ids })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shapes_and_determinism() {
        let a = gen_structures(1, [8, 8], 42).unwrap();
        assert_eq!(a.len(), 1);
        assert_eq!(a[0].len(), 8);
        assert_eq!(a[0].features[0].len(), FEATURE_DIM);
        let b = gen_structures(1, [8, 8], 42).unwrap();
        assert_eq!(a, b);
        assert!(gen_structures(0, [8, 8], 1).is_err());
        assert!(gen_structures(1, [4, 8], 1).is_err());
        assert!(gen_structures(1, [16, 8], 1).is_err());
    }

    // Monte-Carlo check: empirical mean of feature components near 0 with a
    // 4-sigma/sqrt(n) tolerance.
    #[test]
    fn feature_mean_is_centered() {
        let structures = gen_structures(200, [24, 64], 7).unwrap();
        let mut sum = 0.0;
        let mut n = 0usize;
        for s in &structures {
            for row in &s.features {
                sum += row.iter().sum::<f64>();
                n += FEATURE_DIM;
            }
        }
        let mean = sum / n as f64;
        let tol = 4.0 / (n as f64).sqrt();
        assert!(mean.abs() < tol.max(0.1), "mean {mean}, tol {tol}");
    }

    #[test]
    fn target_distribution_normalizes_and_uniform_on_zero_features() {
        let map = HiddenTargetMap::generate(3);
        let mut s = gen_structures(1, [8, 8], 3).unwrap().remove(0);
        let p = target_distribution(&map, &s, 0).unwrap();
        let total: f64 = p.iter().sum();
        assert!((total - 1.0).abs() < 1e-9);
        assert!(p.iter().all(|&x| x > 0.0));

        // zero feature vector -> all logits zero -> uniform 0.05
        s.features[0] = [0.0; FEATURE_DIM];
        let p = target_distribution(&map, &s, 0).unwrap();
        for &x in p.iter() {
            assert!((x - 0.05).abs() < 1e-12);
        }

        assert!(target_distribution(&map, &s, 8).is_err());
    }

    // Numeric check: scaling the feature vector by 100 concentrates the
    // distribution on the argmax logit.
    #[test]
    fn scaled_features_concentrate_distribution() {
        let map = HiddenTargetMap::generate(5);
        let mut s = gen_structures(1, [8, 8], 5).unwrap().remove(0);
        for v in s.features[0].iter_mut() {
            *v *= 100.0;
        }
        let p = target_distribution(&map, &s, 0).unwrap();
        let max = p.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        assert!(max > 0.99, "max prob {max}");
    }

    #[test]
    fn natives_are_deterministic_and_tempered() {
        let map = HiddenTargetMap::generate(9);
        let s = gen_structures(1, [24, 24], 9).unwrap().remove(0);
        let a = gen_native(&map, &s, 123).unwrap();
        let b = gen_native(&map, &s, 123).unwrap();
        assert_eq!(a, b);

        // tau -> 0 limit equals the per-position argmax
        let frozen = sample_target_sequence(&map, &s, 1e-9, 321).unwrap();
        assert_eq!(frozen, argmax_sequence(&map, &s).unwrap());
    }

    // Monte-Carlo: argmax decoding recovers natives sampled at tau = 0.5 far
    // better than uniform-random sequences do.
    #[test]
    fn argmax_recovery_beats_random_baseline() {
        let map = HiddenTargetMap::generate(11);
        let structures = gen_structures(100, [24, 48], 11).unwrap();
        let mut match_argmax = 0usize;
        let mut match_random = 0usize;
        let mut total = 0usize;
        for (i, s) in structures.iter().enumerate() {
            let native = gen_native(&map, s, derive_seed(11, "native", &[i as u64])).unwrap();
            let greedy = argmax_sequence(&map, s).unwrap();
            let mut rng = seeded_rng(derive_seed(11, "rand_seq", &[i as u64]));
            for (j, n) in native.iter().enumerate() {
                if greedy[j] == *n {
                    match_argmax += 1;
                }
                if rng.random_range(0..VOCAB_SIZE) == n.index() {
                    match_random += 1;
                }
                total += 1;
            }
        }
        let rec_argmax = match_argmax as f64 / total as f64;
        let rec_random = match_random as f64 / total as f64;
        assert!(
            rec_argmax > rec_random + 0.2,
            "argmax recovery {rec_argmax} vs random {rec_random}"
        );
    }

    #[test]
    fn split_is_deterministic_and_disjoint() {
        let ids: Vec<String> = (0..10).map(|i| format!("s{i:05}")).collect();
        let a = split(&ids, 0.2, 4).unwrap();
        assert_eq!(a.val_ids.len(), 2);
        assert_eq!(a.train_ids.len(), 8);
        for v in &a.val_ids {
            assert!(!a.train_ids.contains(v));
        }
        let b = split(&ids, 0.2, 4).unwrap();
        assert_eq!(a, b);
        assert!(split(&[], 0.2, 4).is_err());
        assert!(split(&ids, 0.0, 4).is_err());
    }

    // round-half-away-from-zero: 0.5 * 9 = 4.5 rounds to 5
    #[test]
    fn split_rounding_rule() {
        let ids: Vec<String> = (0..9).map(|i| format!("s{i:05}")).collect();
        let s = split(&ids, 0.5, 1).unwrap();
        assert_eq!(s.val_ids.len(), 5);
        assert_eq!(s.train_ids.len(), 4);
    }

    #[test]
    fn hidden_map_is_global_across_structures() {
        let map = HiddenTargetMap::generate(13);
        let s = gen_structures(2, [8, 8], 13).unwrap();
        let mut twin = s[1].clone();
        twin.features = s[0].features.clone();
        let p0 = target_distribution(&map, &s[0], 3).unwrap();
        let p1 = target_distribution(&map, &twin, 3).unwrap();
        assert_eq!(p0, p1);
    }
}
