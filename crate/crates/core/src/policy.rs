//! The trainable structure-conditioned sequence model: a position-wise
//! categorical distribution over amino acids with one neighbor-aggregation
//! hop, exact per-residue log-probabilities, tempered sampling, and
//! hand-rolled reverse-mode gradients.
//!
//! The model is deliberately factorized (non-autoregressive): every
//! objective in this crate consumes per-residue terms, and a factorized
//! model gives exact, order-independent per-residue probabilities plus
//! cheap exhaustive verification.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::domain::{AminoAcid, StructureInstance, FEATURE_DIM, VOCAB_SIZE};
use crate::error::{Error, Result};
use crate::math::{log_sum_exp, sample_index, softmax_in_place};
use crate::seed::seeded_rng;

/// Input width of the MLP: the position's own features concatenated with
/// the truncated-window neighbor mean (radius 1).
pub const AGG_DIM: usize = 2 * FEATURE_DIM;

/// Hidden width of the MLP.
pub const HIDDEN_DIM: usize = 32;

/// Total trainable parameter count.
pub const PARAM_COUNT: usize =
    HIDDEN_DIM * AGG_DIM + HIDDEN_DIM + VOCAB_SIZE * HIDDEN_DIM + VOCAB_SIZE;

/// Standard deviation of weight initialization; biases start at zero.
pub const INIT_STD: f64 = 0.1;

/// Model parameters. Matrices are stored row-major; the same struct doubles
/// as the gradient and Adam-moment container since it shares the shape.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyParams {
    /// `HIDDEN_DIM x AGG_DIM`
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    /// `VOCAB_SIZE x HIDDEN_DIM`
    pub w2: Vec<f64>,
    pub b2: Vec<f64>,
}

impl PolicyParams {
    pub fn zeros() -> Self {
        PolicyParams {
            w1: vec![0.0; HIDDEN_DIM * AGG_DIM],
            b1: vec![0.0; HIDDEN_DIM],
            w2: vec![0.0; VOCAB_SIZE * HIDDEN_DIM],
            b2: vec![0.0; VOCAB_SIZE],
        }
    }

    /// Weights i.i.d. normal with standard deviation [`INIT_STD`], biases
    /// zero: a near-uniform initial distribution with stable gradients.
    pub fn init(seed: u64) -> Self {
        let mut rng = seeded_rng(seed);
        let mut draw = |n: usize| -> Vec<f64> {
            (0..n).map(|_| INIT_STD * rng.sample::<f64, _>(StandardNormal)).collect()
        };
        PolicyParams {
            w1: draw(HIDDEN_DIM * AGG_DIM),
            b1: vec![0.0; HIDDEN_DIM],
            w2: draw(VOCAB_SIZE * HIDDEN_DIM),
            b2: vec![0.0; VOCAB_SIZE],
        }
    }

    pub fn param_count(&self) -> usize {
        self.w1.len() + self.b1.len() + self.w2.len() + self.b2.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.param_count() != PARAM_COUNT
            || self.w1.len() != HIDDEN_DIM * AGG_DIM
            || self.b1.len() != HIDDEN_DIM
            || self.w2.len() != VOCAB_SIZE * HIDDEN_DIM
            || self.b2.len() != VOCAB_SIZE
        {
            return Err(Error::data("policy parameter shapes are wrong"));
        }
        for (name, t) in self.tensors() {
            if t.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite { tensor: name, detail: "in checkpoint params".into() });
            }
        }
        Ok(())
    }

    pub fn tensors(&self) -> [(&'static str, &[f64]); 4] {
        [("w1", &self.w1), ("b1", &self.b1), ("w2", &self.w2), ("b2", &self.b2)]
    }

    pub fn tensors_mut(&mut self) -> [(&'static str, &mut Vec<f64>); 4] {
        [
            ("w1", &mut self.w1),
            ("b1", &mut self.b1),
            ("w2", &mut self.w2),
            ("b2", &mut self.b2),
        ]
    }

    /// Coordinate-wise `self += scale * other`.
    pub fn add_scaled(&mut self, other: &PolicyParams, scale: f64) {
        for (dst, src) in [
            (&mut self.w1, &other.w1),
            (&mut self.b1, &other.b1),
            (&mut self.w2, &other.w2),
            (&mut self.b2, &other.b2),
        ] {
            for (d, s) in dst.iter_mut().zip(src.iter()) {
                *d += scale * s;
            }
        }
    }

    /// Euclidean distance to another parameter set.
    pub fn l2_distance(&self, other: &PolicyParams) -> f64 {
        let mut acc = 0.0;
        for ((_, a), (_, b)) in self.tensors().into_iter().zip(other.tensors()) {
            for (x, y) in a.iter().zip(b.iter()) {
                acc += (x - y) * (x - y);
            }
        }
        acc.sqrt()
    }
}

/// Per-residue log-probabilities, row-major `L x 20`. Every row is a
/// log-softmax, so it exponentiates and sums to 1.
#[derive(Debug, Clone, PartialEq)]
pub struct PerResidueLogProbs {
    len: usize,
    data: Vec<f64>,
}

impl PerResidueLogProbs {
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * VOCAB_SIZE..(i + 1) * VOCAB_SIZE]
    }

    /// log-probability of residue `aa` at position `i`.
    pub fn get(&self, i: usize, aa: AminoAcid) -> f64 {
        self.data[i * VOCAB_SIZE + aa.index()]
    }

    /// Selects the per-residue log-probabilities of a whole sequence.
    pub fn select(&self, residues: &[AminoAcid]) -> Vec<f64> {
        residues.iter().enumerate().map(|(i, &aa)| self.get(i, aa)).collect()
    }

    /// Per-position argmax residues.
    pub fn argmax_sequence(&self) -> Vec<AminoAcid> {
        (0..self.len)
            .map(|i| {
                let row = self.row(i);
                let best = row
                    .iter()
                    .enumerate()
                    .max_by(|a, b| a.1.total_cmp(b.1))
                    .map(|(k, _)| k)
                    .unwrap();
                AminoAcid::new(best).unwrap()
            })
            .collect()
    }
}

/// Adjoint buffer matching [`PerResidueLogProbs`]: `dL/dlogp`, row-major.
#[derive(Debug, Clone)]
pub struct LogProbAdjoint {
    len: usize,
    data: Vec<f64>,
}

impl LogProbAdjoint {
    pub fn zeros(len: usize) -> Self {
        LogProbAdjoint { len, data: vec![0.0; len * VOCAB_SIZE] }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn add(&mut self, i: usize, aa: AminoAcid, value: f64) {
        self.data[i * VOCAB_SIZE + aa.index()] += value;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * VOCAB_SIZE..(i + 1) * VOCAB_SIZE]
    }
}

/// Intermediate activations kept for the backward pass.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    /// `L x AGG_DIM` aggregated inputs.
    agg: Vec<f64>,
    /// `L x HIDDEN_DIM` post-ReLU activations.
    hidden: Vec<f64>,
    pub logp: PerResidueLogProbs,
}

/// Concatenates each position's features with the mean of its radius-1
/// neighborhood (window truncated at the boundaries).
pub fn aggregate_features(features: &[[f64; FEATURE_DIM]]) -> Vec<f64> {
    let l = features.len();
    let mut agg = vec![0.0; l * AGG_DIM];
    for i in 0..l {
        let lo = i.saturating_sub(1);
        let hi = (i + 1).min(l - 1);
        let row = &mut agg[i * AGG_DIM..(i + 1) * AGG_DIM];
        row[..FEATURE_DIM].copy_from_slice(&features[i]);
        let n = (hi - lo + 1) as f64;
        for j in lo..=hi {
            for (c, v) in features[j].iter().enumerate() {
                row[FEATURE_DIM + c] += v / n;
            }
        }
    }
    agg
}

/// Full forward pass: neighbor aggregation, two-layer MLP, log-softmax.
pub fn forward(params: &PolicyParams, structure: &StructureInstance) -> ForwardCache {
    let l = structure.len();
    let agg = aggregate_features(&structure.features);
    let mut hidden = vec![0.0; l * HIDDEN_DIM];
    let mut data = vec![0.0; l * VOCAB_SIZE];
    for i in 0..l {
        let g = &agg[i * AGG_DIM..(i + 1) * AGG_DIM];
        let h = &mut hidden[i * HIDDEN_DIM..(i + 1) * HIDDEN_DIM];
        for (r, hv) in h.iter_mut().enumerate() {
            let w = &params.w1[r * AGG_DIM..(r + 1) * AGG_DIM];
            let z: f64 = params.b1[r] + w.iter().zip(g.iter()).map(|(a, b)| a * b).sum::<f64>();
            *hv = z.max(0.0);
        }
        let row = &mut data[i * VOCAB_SIZE..(i + 1) * VOCAB_SIZE];
        for (k, rv) in row.iter_mut().enumerate() {
            let w = &params.w2[k * HIDDEN_DIM..(k + 1) * HIDDEN_DIM];
            *rv = params.b2[k] + w.iter().zip(h.iter()).map(|(a, b)| a * b).sum::<f64>();
        }
        let lse = log_sum_exp(row);
        for rv in row.iter_mut() {
            *rv -= lse;
        }
    }
    ForwardCache { agg, hidden, logp: PerResidueLogProbs { len: l, data } }
}

/// Exact reverse-mode gradient through log-softmax, the MLP, and the
/// aggregation, given `dL/dlogp`.
pub fn backward(
    params: &PolicyParams,
    cache: &ForwardCache,
    adjoint: &LogProbAdjoint,
    grads: &mut PolicyParams,
) -> Result<()> {
    let l = cache.logp.len();
    if adjoint.len() != l {
        return Err(Error::data("adjoint length does not match the forward cache"));
    }
    let mut dlogits = [0.0; VOCAB_SIZE];
    let mut dhidden = [0.0; HIDDEN_DIM];
    for i in 0..l {
        let dlp = adjoint.row(i);
        let s: f64 = dlp.iter().sum();
        if s == 0.0 && dlp.iter().all(|&v| v == 0.0) {
            continue;
        }
        let logp = cache.logp.row(i);
        for k in 0..VOCAB_SIZE {
            let p = logp[k].exp();
            dlogits[k] = dlp[k] - p * s;
            if !dlogits[k].is_finite() {
                return Err(Error::NonFinite {
                    tensor: "dlogits",
                    detail: format!("position {i}, residue {k}"),
                });
            }
        }
        let h = &cache.hidden[i * HIDDEN_DIM..(i + 1) * HIDDEN_DIM];
        dhidden.fill(0.0);
        for k in 0..VOCAB_SIZE {
            let dk = dlogits[k];
            grads.b2[k] += dk;
            let wrow = &params.w2[k * HIDDEN_DIM..(k + 1) * HIDDEN_DIM];
            let grow = &mut grads.w2[k * HIDDEN_DIM..(k + 1) * HIDDEN_DIM];
            for r in 0..HIDDEN_DIM {
                grow[r] += dk * h[r];
                dhidden[r] += dk * wrow[r];
            }
        }
        let g = &cache.agg[i * AGG_DIM..(i + 1) * AGG_DIM];
        for r in 0..HIDDEN_DIM {
            if h[r] > 0.0 {
                let dz = dhidden[r];
                grads.b1[r] += dz;
                let grow = &mut grads.w1[r * AGG_DIM..(r + 1) * AGG_DIM];
                for c in 0..AGG_DIM {
                    grow[c] += dz * g[c];
                }
            }
        }
    }
    Ok(())
}

/// Evaluates a scalar loss of the per-residue log-probabilities and returns
/// its exact gradient with respect to the parameters. The closure returns
/// the loss value and `dL/dlogp`.
pub fn grad_loss<F>(params: &PolicyParams, structure: &StructureInstance, loss: F) -> Result<(f64, PolicyParams)>
where
    F: FnOnce(&PerResidueLogProbs) -> (f64, LogProbAdjoint),
{
    let cache = forward(params, structure);
    let (value, adjoint) = loss(&cache.logp);
    if !value.is_finite() {
        return Err(Error::NonFinite { tensor: "loss", detail: format!("structure `{}`", structure.id) });
    }
    let mut grads = PolicyParams::zeros();
    backward(params, &cache, &adjoint, &mut grads)?;
    Ok((value, grads))
}

/// Per-residue and total log-probability of a sequence. The total is the
/// sum over all positions, so it is always <= 0.
pub fn seq_log_prob(
    params: &PolicyParams,
    structure: &StructureInstance,
    residues: &[AminoAcid],
) -> Result<(f64, Vec<f64>)> {
    if residues.len() != structure.len() {
        return Err(Error::data(format!(
            "sequence length {} does not match structure `{}` length {}",
            residues.len(),
            structure.id,
            structure.len()
        )));
    }
    let cache = forward(params, structure);
    let per_residue = cache.logp.select(residues);
    Ok((per_residue.iter().sum(), per_residue))
}

/// Sampling controls: temperature, positions pinned to a fixed residue, and
/// residues banned from the vocabulary at free positions.
#[derive(Debug, Clone)]
pub struct SampleOptions {
    pub temperature: f64,
    pub fixed: BTreeMap<usize, AminoAcid>,
    pub banned: BTreeSet<AminoAcid>,
}

impl Default for SampleOptions {
    fn default() -> Self {
        SampleOptions { temperature: 1.0, fixed: BTreeMap::new(), banned: BTreeSet::new() }
    }
}

impl SampleOptions {
    pub fn with_temperature(temperature: f64) -> Self {
        SampleOptions { temperature, ..Default::default() }
    }
}

/// Position-wise independent sampling from `softmax(logits_i / tau)` after
/// masking banned residues. Fixed positions are copied verbatim and consume
/// no randomness, so the remaining stream is independent of the pin set.
pub fn sample(
    params: &PolicyParams,
    structure: &StructureInstance,
    opts: &SampleOptions,
    seed: u64,
) -> Result<Vec<AminoAcid>> {
    if !(opts.temperature > 0.0) {
        return Err(Error::config(format!("sampling temperature {} must be > 0", opts.temperature)));
    }
    if opts.banned.len() >= VOCAB_SIZE {
        return Err(Error::config("banned set covers the whole vocabulary"));
    }
    let l = structure.len();
    if let Some((&pos, _)) = opts.fixed.iter().find(|(&pos, _)| pos >= l) {
        return Err(Error::config(format!(
            "fixed position {pos} out of range for structure `{}` of length {l}",
            structure.id
        )));
    }
    let cache = forward(params, structure);
    let mut rng = seeded_rng(seed);
    let mut out = Vec::with_capacity(l);
    let mut probs = [0.0; VOCAB_SIZE];
    for i in 0..l {
        if let Some(&aa) = opts.fixed.get(&i) {
            out.push(aa);
            continue;
        }
        let row = cache.logp.row(i);
        for (k, p) in probs.iter_mut().enumerate() {
            // log-softmax rows differ from raw logits by a per-row constant,
            // which cancels inside the tempered softmax
            *p = if opts.banned.contains(&AminoAcid::new(k).unwrap()) {
                f64::NEG_INFINITY
            } else {
                row[k] / opts.temperature
            };
        }
        softmax_in_place(&mut probs);
        out.push(AminoAcid::new(sample_index(&mut rng, &probs))?);
    }
    Ok(out)
}
