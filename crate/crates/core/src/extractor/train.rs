use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{AdamW, ExtractorInput, ModelConfig, Params, TokenScoringModel};
use crate::par::{self, Execution};
use crate::{Error, Result};

/// An extractor input with one binary label per position.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledInput {
    pub input: ExtractorInput,
    pub labels: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub weight_decay: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub seed: u64,
    #[serde(skip)]
    pub execution: Execution,
}

impl Default for TrainConfig {
    /// Desk-scale defaults. The from-scratch encoder needs a larger step than
    /// the 2e-5 used for fine-tuning a pretrained one
    /// ([`TrainConfig::FULL_SCALE_LEARNING_RATE`]).
    fn default() -> Self {
        Self {
            learning_rate: 1e-3,
            weight_decay: 0.01,
            batch_size: 8,
            epochs: 10,
            seed: 0,
            execution: Execution::default(),
        }
    }
}

impl TrainConfig {
    pub const FULL_SCALE_LEARNING_RATE: f64 = 2e-5;

    pub fn validate(&self) -> Result<()> {
        let lr_ok = self.learning_rate.is_finite() && self.learning_rate > 0.0;
        if !lr_ok || self.weight_decay < 0.0 || self.batch_size == 0 || self.epochs == 0 {
            return Err(Error::InvalidParam(format!("invalid training config {self:?}")));
        }
        Ok(())
    }
}

/// How the checkpoint to keep is chosen after each epoch.
pub enum DevSelection<'a> {
    /// Keep the final parameters.
    Last,
    /// Lowest mean loss on these examples.
    Loss(&'a [LabeledInput]),
    /// Highest value of a caller-supplied metric, e.g. dev Recall@n.
    Metric(&'a (dyn Fn(&TokenScoringModel) -> Result<f64> + Sync)),
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TrainLog {
    /// Mean training loss over the batches of each epoch.
    pub epoch_losses: Vec<f64>,
    /// Dev loss or metric after each epoch; empty for [`DevSelection::Last`].
    pub dev_scores: Vec<f64>,
    /// Zero-based epoch whose parameters were kept.
    pub best_epoch: usize,
    pub steps: u64,
}

pub struct TrainOutcome {
    pub model: TokenScoringModel,
    pub log: TrainLog,
}

struct ExampleGrad {
    loss: f64,
    grad: Params,
    ids: Vec<u32>,
    demb: ndarray::Array2<f64>,
}

fn example_grad(model: &TokenScoringModel, ex: &LabeledInput) -> Result<ExampleGrad> {
    let ids = &ex.input.token_ids;
    if ids.len() != ex.labels.len() {
        return Err(Error::LengthMismatch(ids.len(), ex.labels.len()));
    }
    model.score_tokens(ids)?;
    let cfg = ModelConfig { vocab_size: 0, ..*model.config() };
    let mut grad = Params::zeros(&cfg);
    let (loss, demb) =
        model.forward_backward(ids, |scores| super::loss::bce_loss_with_logit_grad(scores, &ex.labels), &mut grad);
    Ok(ExampleGrad { loss, grad, ids: ids.clone(), demb })
}

/// Mean loss over `examples`.
pub fn mean_loss(model: &TokenScoringModel, examples: &[LabeledInput], exec: Execution) -> Result<f64> {
    if examples.is_empty() {
        return Err(Error::InvalidParam("no examples".into()));
    }
    let losses = par::try_map(exec, examples, |ex| model.loss(&ex.input.token_ids, &ex.labels))?;
    Ok(losses.iter().sum::<f64>() / losses.len() as f64)
}

/// Mini-batch AdamW training on mean binary cross-entropy.
///
/// Example order is reshuffled each epoch from `config.seed`; per-example
/// gradients may be computed in parallel but are summed in batch order, so
/// the result depends only on the seed.
pub fn train(
    mut model: TokenScoringModel,
    examples: &[LabeledInput],
    config: &TrainConfig,
    dev: DevSelection<'_>,
) -> Result<TrainOutcome> {
    config.validate()?;
    if examples.is_empty() {
        return Err(Error::InvalidParam("training needs at least one example".into()));
    }
    let exec = config.execution;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut opt = AdamW::new(model.params(), config.learning_rate, config.weight_decay);
    let mut order: Vec<usize> = (0..examples.len()).collect();
    let mut log = TrainLog::default();
    let mut best: Option<(f64, TokenScoringModel)> = None;

    for epoch in 0..config.epochs {
        order.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        let mut batches = 0usize;
        for (step, batch) in order.chunks(config.batch_size).enumerate() {
            let batch: Vec<&LabeledInput> = batch.iter().map(|&i| &examples[i]).collect();
            let grads = par::try_map(exec, &batch, |ex| example_grad(&model, ex))?;

            let mut total = model.params().zeros_like();
            let mut batch_loss = 0.0;
            for g in &grads {
                batch_loss += g.loss;
                let dst = total.tensors_mut().into_iter().skip(1);
                for ((_, d), (_, s)) in dst.zip(g.grad.tensors().into_iter().skip(1)) {
                    d.iter_mut().zip(s).for_each(|(d, s)| *d += s);
                }
                for (i, &id) in g.ids.iter().enumerate() {
                    let mut row = total.tok_emb.row_mut(id as usize);
                    row += &g.demb.row(i);
                }
            }
            let n = grads.len() as f64;
            batch_loss /= n;
            if !batch_loss.is_finite() {
                return Err(Error::NonFiniteLoss { loss: batch_loss, epoch, step });
            }
            total.scale(1.0 / n);
            opt.step(model.params_mut(), &total);
            epoch_loss += batch_loss;
            batches += 1;
        }
        if !model.params().all_finite() {
            return Err(Error::NonFiniteLoss { loss: f64::NAN, epoch, step: batches });
        }
        let epoch_loss = epoch_loss / batches as f64;
        log.epoch_losses.push(epoch_loss);
        log::debug!("epoch {epoch}: train loss {epoch_loss:.6}");

        // Score is oriented so that larger is better.
        let score = match &dev {
            DevSelection::Last => None,
            DevSelection::Loss(dev) => {
                let l = mean_loss(&model, dev, exec)?;
                log.dev_scores.push(l);
                Some(-l)
            }
            DevSelection::Metric(f) => {
                let m = f(&model)?;
                log.dev_scores.push(m);
                Some(m)
            }
        };
        if let Some(score) = score {
            if best.as_ref().is_none_or(|(b, _)| score > *b) {
                best = Some((score, model.clone()));
                log.best_epoch = epoch;
            }
        } else {
            log.best_epoch = epoch;
        }
    }
    log.steps = opt.steps();
    let model = best.map(|(_, m)| m).unwrap_or(model);
    Ok(TrainOutcome { model, log })
}

/// Token-level F1 at a 0.5 threshold over word positions (special tokens
/// excluded).
pub fn token_f1(model: &TokenScoringModel, examples: &[LabeledInput], exec: Execution) -> Result<f64> {
    let counts = par::try_map(exec, examples, |ex| -> Result<(usize, usize, usize)> {
        let scores = model.score_tokens(&ex.input.token_ids)?;
        let (mut tp, mut fp, mut fn_) = (0, 0, 0);
        for ((s, &y), owner) in scores.iter().zip(&ex.labels).zip(&ex.input.piece_to_word) {
            if owner.is_none() {
                continue;
            }
            match (*s > 0.5, y == 1) {
                (true, true) => tp += 1,
                (true, false) => fp += 1,
                (false, true) => fn_ += 1,
                (false, false) => {}
            }
        }
        Ok((tp, fp, fn_))
    })?;
    let (tp, fp, fn_) = counts.into_iter().fold((0, 0, 0), |a, c| (a.0 + c.0, a.1 + c.1, a.2 + c.2));
    if tp == 0 {
        return Ok(if fp == 0 && fn_ == 0 { 1.0 } else { 0.0 });
    }
    let precision = tp as f64 / (tp + fp) as f64;
    let recall = tp as f64 / (tp + fn_) as f64;
    Ok(2.0 * precision * recall / (precision + recall))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::SpecialToken;

    fn example(words: &[u32], hot: &[usize]) -> LabeledInput {
        let mut ids = vec![SpecialToken::Cls.id(), SpecialToken::Start.id()];
        ids.extend(words);
        ids.extend([SpecialToken::End.id(), SpecialToken::Sep.id()]);
        let mut piece_to_word = vec![None, None];
        piece_to_word.extend((0..words.len()).map(Some));
        piece_to_word.extend([None, None]);
        let mut labels = vec![0u8; ids.len()];
        for &h in hot {
            labels[h + 2] = 1;
        }
        LabeledInput {
            input: ExtractorInput {
                token_ids: ids,
                piece_to_word,
                words: words.iter().map(|w| format!("w{w}")).collect(),
                mention_span: 0..words.len(),
            },
            labels,
        }
    }

    fn tiny_model(seed: u64) -> TokenScoringModel {
        let cfg = ModelConfig { vocab_size: 16, d_model: 16, layers: 1, heads: 2, ffn_dim: 32, max_len: 16 };
        TokenScoringModel::new(cfg, seed).unwrap()
    }

    #[test]
    fn same_seed_same_result_in_both_modes() {
        let data: Vec<LabeledInput> =
            (0..10).map(|i| example(&[6 + i % 5, 7, 8 + i % 3], &[(i % 3) as usize])).collect();
        let run = |exec| {
            let cfg = TrainConfig { epochs: 3, batch_size: 4, seed: 11, execution: exec, ..Default::default() };
            train(tiny_model(5), &data, &cfg, DevSelection::Last).unwrap()
        };
        let a = run(Execution::Sequential);
        let b = run(Execution::Parallel);
        assert_eq!(a.model, b.model);
        assert_eq!(a.log, b.log);
        assert_eq!(a.log.epoch_losses.len(), 3);
        assert_eq!(a.log.steps, 9);
    }

    #[test]
    fn dev_loss_selection_keeps_best_epoch() {
        let data = vec![example(&[6, 7, 8], &[1])];
        let cfg = TrainConfig { epochs: 5, batch_size: 1, ..Default::default() };
        let out = train(tiny_model(1), &data, &cfg, DevSelection::Loss(&data)).unwrap();
        let best = out.log.dev_scores.iter().cloned().fold(f64::INFINITY, f64::min);
        assert_eq!(out.log.dev_scores[out.log.best_epoch], best);
        let kept = mean_loss(&out.model, &data, Execution::Sequential).unwrap();
        assert!((kept - best).abs() < 1e-12);
    }

    #[test]
    fn bad_inputs() {
        assert!(train(tiny_model(0), &[], &TrainConfig::default(), DevSelection::Last).is_err());
        let mut ex = example(&[6], &[]);
        ex.labels.pop();
        assert!(train(tiny_model(0), &[ex], &TrainConfig::default(), DevSelection::Last).is_err());
        let cfg = TrainConfig { batch_size: 0, ..Default::default() };
        assert!(train(tiny_model(0), &[example(&[6], &[])], &cfg, DevSelection::Last).is_err());
    }

    #[test]
    fn f1_edge_cases() {
        let mut m = tiny_model(0);
        m.params_mut().head.fill(0.0);
        // all scores 0.5 -> nothing predicted positive
        let data = vec![example(&[6, 7], &[0])];
        assert_eq!(token_f1(&m, &data, Execution::Sequential).unwrap(), 0.0);
        let none = vec![example(&[6, 7], &[])];
        assert_eq!(token_f1(&m, &none, Execution::Sequential).unwrap(), 1.0);
    }
}
