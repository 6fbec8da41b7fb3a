//! Pre-LayerNorm transformer encoder with a sigmoid token head.
//!
//! Everything is `f64` with hand-written backward passes; sequences are
//! processed one at a time so no padding or masking is needed.

use ndarray::{s, Array1, Array2, ArrayView2, Axis, Zip};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

const LN_EPS: f64 = 1e-5;
const GELU_C: f64 = 0.797_884_560_802_865_4; // sqrt(2 / pi)
const SCORE_FLOOR: f64 = f64::MIN_POSITIVE;
const SCORE_CEIL: f64 = 1.0 - f64::EPSILON / 2.0;
const TOKEN_STD: f64 = 0.02;
const POSITION_SCALE: f64 = 0.1;
const HEAD_STD: f64 = 0.02;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub vocab_size: usize,
    pub d_model: usize,
    pub layers: usize,
    pub heads: usize,
    pub ffn_dim: usize,
    pub max_len: usize,
}

impl ModelConfig {
    /// Desk-scale defaults: d = 64, 2 layers, 4 heads.
    pub fn small(vocab_size: usize) -> Self {
        Self { vocab_size, d_model: 64, layers: 2, heads: 4, ffn_dim: 256, max_len: 128 }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParam(m.to_string()));
        if self.vocab_size == 0 || self.d_model == 0 || self.heads == 0 || self.ffn_dim == 0 {
            return bad("model dimensions must be positive");
        }
        if !self.d_model.is_multiple_of(self.heads) {
            return bad("d_model must be divisible by heads");
        }
        if self.max_len < 4 {
            return bad("max_len must be at least 4");
        }
        Ok(())
    }

    fn head_dim(&self) -> usize {
        self.d_model / self.heads
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayerNorm {
    pub gamma: Array1<f64>,
    pub beta: Array1<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Block {
    pub ln1: LayerNorm,
    pub wq: Array2<f64>,
    pub bq: Array1<f64>,
    pub wk: Array2<f64>,
    pub bk: Array1<f64>,
    pub wv: Array2<f64>,
    pub bv: Array1<f64>,
    pub wo: Array2<f64>,
    pub bo: Array1<f64>,
    pub ln2: LayerNorm,
    pub w1: Array2<f64>,
    pub b1: Array1<f64>,
    pub w2: Array2<f64>,
    pub b2: Array1<f64>,
}

/// All trainable tensors. Gradients and optimizer moments use the same type.
#[derive(Debug, Clone, PartialEq)]
pub struct Params {
    pub tok_emb: Array2<f64>,
    pub pos_emb: Array2<f64>,
    pub blocks: Vec<Block>,
    pub final_ln: LayerNorm,
    /// Discriminator head, a `d x 1` map stored as a vector.
    pub head: Array1<f64>,
}

impl LayerNorm {
    fn new(d: usize) -> Self {
        Self { gamma: Array1::ones(d), beta: Array1::zeros(d) }
    }

    fn zeros_like(&self) -> Self {
        Self { gamma: Array1::zeros(self.gamma.len()), beta: Array1::zeros(self.beta.len()) }
    }
}

impl Block {
    fn zeros(cfg: &ModelConfig) -> Self {
        let (d, f) = (cfg.d_model, cfg.ffn_dim);
        Self {
            ln1: LayerNorm::new(d).zeros_like(),
            wq: Array2::zeros((d, d)),
            bq: Array1::zeros(d),
            wk: Array2::zeros((d, d)),
            bk: Array1::zeros(d),
            wv: Array2::zeros((d, d)),
            bv: Array1::zeros(d),
            wo: Array2::zeros((d, d)),
            bo: Array1::zeros(d),
            ln2: LayerNorm::new(d).zeros_like(),
            w1: Array2::zeros((d, f)),
            b1: Array1::zeros(f),
            w2: Array2::zeros((f, d)),
            b2: Array1::zeros(d),
        }
    }
}

fn slice1(a: &Array1<f64>) -> &[f64] {
    a.as_slice().expect("standard layout")
}

fn slice2(a: &Array2<f64>) -> &[f64] {
    a.as_slice().expect("standard layout")
}

fn slice1_mut(a: &mut Array1<f64>) -> &mut [f64] {
    a.as_slice_mut().expect("standard layout")
}

fn slice2_mut(a: &mut Array2<f64>) -> &mut [f64] {
    a.as_slice_mut().expect("standard layout")
}

impl Params {
    /// All-zero tensors with the shapes `cfg` implies.
    pub fn zeros(cfg: &ModelConfig) -> Self {
        Self {
            tok_emb: Array2::zeros((cfg.vocab_size, cfg.d_model)),
            pos_emb: Array2::zeros((cfg.max_len, cfg.d_model)),
            blocks: (0..cfg.layers).map(|_| Block::zeros(cfg)).collect(),
            final_ln: LayerNorm::new(cfg.d_model).zeros_like(),
            head: Array1::zeros(cfg.d_model),
        }
    }

    pub fn zeros_like(&self) -> Self {
        let mut z = self.clone();
        z.for_each_mut(|_, xs| xs.fill(0.0));
        z
    }

    /// Named flat views of every tensor, in a fixed order.
    pub fn tensors(&self) -> Vec<(String, &[f64])> {
        let mut out: Vec<(String, &[f64])> =
            vec![("tok_emb".into(), slice2(&self.tok_emb)), ("pos_emb".into(), slice2(&self.pos_emb))];
        for (i, b) in self.blocks.iter().enumerate() {
            let n = |s: &str| format!("block{i}.{s}");
            out.push((n("ln1.gamma"), slice1(&b.ln1.gamma)));
            out.push((n("ln1.beta"), slice1(&b.ln1.beta)));
            out.push((n("wq"), slice2(&b.wq)));
            out.push((n("bq"), slice1(&b.bq)));
            out.push((n("wk"), slice2(&b.wk)));
            out.push((n("bk"), slice1(&b.bk)));
            out.push((n("wv"), slice2(&b.wv)));
            out.push((n("bv"), slice1(&b.bv)));
            out.push((n("wo"), slice2(&b.wo)));
            out.push((n("bo"), slice1(&b.bo)));
            out.push((n("ln2.gamma"), slice1(&b.ln2.gamma)));
            out.push((n("ln2.beta"), slice1(&b.ln2.beta)));
            out.push((n("w1"), slice2(&b.w1)));
            out.push((n("b1"), slice1(&b.b1)));
            out.push((n("w2"), slice2(&b.w2)));
            out.push((n("b2"), slice1(&b.b2)));
        }
        out.push(("final_ln.gamma".into(), slice1(&self.final_ln.gamma)));
        out.push(("final_ln.beta".into(), slice1(&self.final_ln.beta)));
        out.push(("head".into(), slice1(&self.head)));
        out
    }

    /// Mutable counterpart of [`Params::tensors`], same order.
    pub fn tensors_mut(&mut self) -> Vec<(String, &mut [f64])> {
        let mut out: Vec<(String, &mut [f64])> =
            vec![("tok_emb".into(), slice2_mut(&mut self.tok_emb)), ("pos_emb".into(), slice2_mut(&mut self.pos_emb))];
        for (i, b) in self.blocks.iter_mut().enumerate() {
            let n = |s: &str| format!("block{i}.{s}");
            out.push((n("ln1.gamma"), slice1_mut(&mut b.ln1.gamma)));
            out.push((n("ln1.beta"), slice1_mut(&mut b.ln1.beta)));
            out.push((n("wq"), slice2_mut(&mut b.wq)));
            out.push((n("bq"), slice1_mut(&mut b.bq)));
            out.push((n("wk"), slice2_mut(&mut b.wk)));
            out.push((n("bk"), slice1_mut(&mut b.bk)));
            out.push((n("wv"), slice2_mut(&mut b.wv)));
            out.push((n("bv"), slice1_mut(&mut b.bv)));
            out.push((n("wo"), slice2_mut(&mut b.wo)));
            out.push((n("bo"), slice1_mut(&mut b.bo)));
            out.push((n("ln2.gamma"), slice1_mut(&mut b.ln2.gamma)));
            out.push((n("ln2.beta"), slice1_mut(&mut b.ln2.beta)));
            out.push((n("w1"), slice2_mut(&mut b.w1)));
            out.push((n("b1"), slice1_mut(&mut b.b1)));
            out.push((n("w2"), slice2_mut(&mut b.w2)));
            out.push((n("b2"), slice1_mut(&mut b.b2)));
        }
        out.push(("final_ln.gamma".into(), slice1_mut(&mut self.final_ln.gamma)));
        out.push(("final_ln.beta".into(), slice1_mut(&mut self.final_ln.beta)));
        out.push(("head".into(), slice1_mut(&mut self.head)));
        out
    }

    pub fn for_each_mut(&mut self, mut f: impl FnMut(&str, &mut [f64])) {
        for (name, xs) in self.tensors_mut() {
            f(&name, xs);
        }
    }

    /// `self += other`, tensor by tensor.
    pub fn add_assign(&mut self, other: &Params) {
        for ((_, dst), (_, src)) in self.tensors_mut().into_iter().zip(other.tensors()) {
            for (d, s) in dst.iter_mut().zip(src) {
                *d += s;
            }
        }
    }

    pub fn scale(&mut self, factor: f64) {
        self.for_each_mut(|_, xs| xs.iter_mut().for_each(|x| *x *= factor));
    }

    pub fn num_params(&self) -> usize {
        self.tensors().iter().map(|(_, t)| t.len()).sum()
    }

    pub fn all_finite(&self) -> bool {
        self.tensors().iter().all(|(_, t)| t.iter().all(|x| x.is_finite()))
    }
}

/// Sinusoidal position table, used to initialise the learned positions.
fn sinusoid(max_len: usize, d: usize, scale: f64) -> Array2<f64> {
    Array2::from_shape_fn((max_len, d), |(pos, i)| {
        let rate = 1.0 / 10_000f64.powf((2 * (i / 2)) as f64 / d as f64);
        let angle = pos as f64 * rate;
        scale * if i % 2 == 0 { angle.sin() } else { angle.cos() }
    })
}

/// Encoder plus discriminator head: maps word-piece ids to per-position
/// keyword probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct TokenScoringModel {
    config: ModelConfig,
    params: Params,
}

// Forward-pass intermediates needed by the backward pass.
struct LnCache {
    xhat: Array2<f64>,
    inv_std: Array1<f64>,
}

struct BlockCache {
    ln1: LnCache,
    a: Array2<f64>,
    q: Array2<f64>,
    k: Array2<f64>,
    v: Array2<f64>,
    probs: Vec<Array2<f64>>,
    o: Array2<f64>,
    ln2: LnCache,
    c: Array2<f64>,
    u: Array2<f64>,
    g: Array2<f64>,
}

struct ForwardCache {
    blocks: Vec<BlockCache>,
    final_ln: LnCache,
    hidden: Array2<f64>,
}

fn layer_norm(x: &Array2<f64>, p: &LayerNorm) -> (Array2<f64>, LnCache) {
    let d = x.ncols() as f64;
    let mean = x.mean_axis(Axis(1)).expect("non-empty rows");
    let centered = x - &mean.view().insert_axis(Axis(1));
    let var = centered.mapv(|c| c * c).sum_axis(Axis(1)) / d;
    let inv_std = var.mapv(|v| 1.0 / (v + LN_EPS).sqrt());
    let xhat = &centered * &inv_std.view().insert_axis(Axis(1));
    let y = &xhat * &p.gamma + &p.beta;
    (y, LnCache { xhat, inv_std })
}

fn layer_norm_backward(dy: &Array2<f64>, p: &LayerNorm, cache: &LnCache, grad: &mut LayerNorm) -> Array2<f64> {
    grad.gamma += &(dy * &cache.xhat).sum_axis(Axis(0));
    grad.beta += &dy.sum_axis(Axis(0));
    let dxhat = dy * &p.gamma;
    let d = dy.ncols() as f64;
    let sum_dxhat = dxhat.sum_axis(Axis(1));
    let sum_dxhat_xhat = (&dxhat * &cache.xhat).sum_axis(Axis(1));
    let mut dx = Array2::zeros(dy.raw_dim());
    Zip::indexed(&mut dx).for_each(|(i, j), out| {
        *out = cache.inv_std[i] / d * (d * dxhat[[i, j]] - sum_dxhat[i] - cache.xhat[[i, j]] * sum_dxhat_xhat[i]);
    });
    dx
}

fn gelu(u: f64) -> f64 {
    0.5 * u * (1.0 + (GELU_C * (u + 0.044715 * u * u * u)).tanh())
}

fn gelu_grad(u: f64) -> f64 {
    let t = (GELU_C * (u + 0.044715 * u * u * u)).tanh();
    0.5 * (1.0 + t) + 0.5 * u * (1.0 - t * t) * GELU_C * (1.0 + 3.0 * 0.044715 * u * u)
}

fn sigmoid(z: f64) -> f64 {
    let s = if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    };
    s.clamp(SCORE_FLOOR, SCORE_CEIL)
}

fn softmax_rows(s: &mut Array2<f64>) {
    for mut row in s.rows_mut() {
        let max = row.fold(f64::NEG_INFINITY, |m, &x| m.max(x));
        row.mapv_inplace(|x| (x - max).exp());
        let sum = row.sum();
        row /= sum;
    }
}

impl TokenScoringModel {
    /// Randomly initialised model; the same seed gives the same parameters.
    pub fn new(config: ModelConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let normal = |std: f64| Normal::new(0.0, std).expect("valid std");
        let mut params = Params::zeros(&config);
        let emb = normal(TOKEN_STD);
        params.tok_emb = Array2::from_shape_simple_fn((config.vocab_size, config.d_model), || emb.sample(&mut rng));
        params.pos_emb = sinusoid(config.max_len, config.d_model, POSITION_SCALE);
        let init_ln = LayerNorm::new(config.d_model);
        // Projections use std 1/sqrt(fan_in) so attention logits are not
        // vanishingly small when training from scratch.
        for b in &mut params.blocks {
            b.ln1 = init_ln.clone();
            b.ln2 = init_ln.clone();
            for w in [&mut b.wq, &mut b.wk, &mut b.wv, &mut b.wo, &mut b.w1, &mut b.w2] {
                let dist = normal(1.0 / (w.nrows() as f64).sqrt());
                w.mapv_inplace(|_| dist.sample(&mut rng));
            }
        }
        params.final_ln = init_ln;
        let head = normal(HEAD_STD);
        params.head.mapv_inplace(|_| head.sample(&mut rng));
        Ok(Self { config, params })
    }

    /// Wraps existing parameters after checking their shapes.
    pub fn from_params(config: ModelConfig, params: Params) -> Result<Self> {
        config.validate()?;
        let expected = Params::zeros(&config);
        let shapes_match =
            expected.tensors().iter().zip(params.tensors()).all(|((en, et), (n, t))| *en == n && et.len() == t.len())
                && expected.tensors().len() == params.tensors().len();
        if !shapes_match {
            return Err(Error::InvalidParam("parameter shapes do not match config".into()));
        }
        Ok(Self { config, params })
    }

    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut Params {
        &mut self.params
    }

    fn check_ids(&self, ids: &[u32]) -> Result<()> {
        if ids.is_empty() || ids.len() > self.config.max_len {
            return Err(Error::InvalidParam(format!(
                "sequence length {} outside 1..={}",
                ids.len(),
                self.config.max_len
            )));
        }
        if let Some(&id) = ids.iter().find(|&&id| id as usize >= self.config.vocab_size) {
            return Err(Error::TokenOutOfRange { id, size: self.config.vocab_size });
        }
        Ok(())
    }

    /// Token embeddings of the last layer, `L x d`.
    pub fn encode(&self, ids: &[u32]) -> Result<Array2<f64>> {
        self.check_ids(ids)?;
        Ok(self.forward(ids).1.hidden)
    }

    /// Per-position keyword probabilities, each strictly inside (0, 1).
    pub fn score_tokens(&self, ids: &[u32]) -> Result<Vec<f64>> {
        self.check_ids(ids)?;
        Ok(self.forward(ids).0.iter().map(|&z| sigmoid(z)).collect())
    }

    fn forward(&self, ids: &[u32]) -> (Array1<f64>, ForwardCache) {
        let p = &self.params;
        let len = ids.len();
        let mut x = Array2::zeros((len, self.config.d_model));
        for (i, &id) in ids.iter().enumerate() {
            let mut row = x.row_mut(i);
            row += &p.tok_emb.row(id as usize);
            row += &p.pos_emb.row(i);
        }

        let mut blocks = Vec::with_capacity(p.blocks.len());
        for b in &p.blocks {
            let (out, cache) = self.block_forward(b, x);
            x = out;
            blocks.push(cache);
        }
        let (hidden, final_ln) = layer_norm(&x, &p.final_ln);
        let logits = hidden.dot(&p.head);
        (logits, ForwardCache { blocks, final_ln, hidden })
    }

    fn block_forward(&self, b: &Block, x: Array2<f64>) -> (Array2<f64>, BlockCache) {
        let hd = self.config.head_dim();
        let scale = 1.0 / (hd as f64).sqrt();
        let (a, ln1) = layer_norm(&x, &b.ln1);
        let q = a.dot(&b.wq) + &b.bq;
        let k = a.dot(&b.wk) + &b.bk;
        let v = a.dot(&b.wv) + &b.bv;
        let mut o = Array2::zeros(x.raw_dim());
        let mut probs = Vec::with_capacity(self.config.heads);
        for h in 0..self.config.heads {
            let cols = s![.., h * hd..(h + 1) * hd];
            let mut scores = q.slice(cols).dot(&k.slice(cols).t()) * scale;
            softmax_rows(&mut scores);
            o.slice_mut(cols).assign(&scores.dot(&v.slice(cols)));
            probs.push(scores);
        }
        let x_mid = &x + &(o.dot(&b.wo) + &b.bo);
        let (c, ln2) = layer_norm(&x_mid, &b.ln2);
        let u = c.dot(&b.w1) + &b.b1;
        let g = u.mapv(gelu);
        let out = &x_mid + &(g.dot(&b.w2) + &b.b2);
        (out, BlockCache { ln1, a, q, k, v, probs, o, ln2, c, u, g })
    }

    fn block_backward(&self, b: &Block, cache: &BlockCache, dout: Array2<f64>, grad: &mut Block) -> Array2<f64> {
        let hd = self.config.head_dim();
        let scale = 1.0 / (hd as f64).sqrt();

        // feed-forward branch
        grad.w2 += &cache.g.t().dot(&dout);
        grad.b2 += &dout.sum_axis(Axis(0));
        let mut du = dout.dot(&b.w2.t());
        Zip::from(&mut du).and(&cache.u).for_each(|d, &u| *d *= gelu_grad(u));
        grad.w1 += &cache.c.t().dot(&du);
        grad.b1 += &du.sum_axis(Axis(0));
        let dc = du.dot(&b.w1.t());
        let dx_mid = dout + layer_norm_backward(&dc, &b.ln2, &cache.ln2, &mut grad.ln2);

        // attention branch
        grad.wo += &cache.o.t().dot(&dx_mid);
        grad.bo += &dx_mid.sum_axis(Axis(0));
        let d_o = dx_mid.dot(&b.wo.t());
        let mut dq = Array2::zeros(cache.q.raw_dim());
        let mut dk = Array2::zeros(cache.k.raw_dim());
        let mut dv = Array2::zeros(cache.v.raw_dim());
        for (h, probs) in cache.probs.iter().enumerate() {
            let cols = s![.., h * hd..(h + 1) * hd];
            let d_oh = d_o.slice(cols);
            dv.slice_mut(cols).assign(&probs.t().dot(&d_oh));
            let dp = d_oh.dot(&cache.v.slice(cols).t());
            let row_dot = (&dp * probs).sum_axis(Axis(1));
            let mut ds = probs * &(&dp - &row_dot.view().insert_axis(Axis(1)));
            ds *= scale;
            dq.slice_mut(cols).assign(&ds.dot(&cache.k.slice(cols)));
            dk.slice_mut(cols).assign(&ds.t().dot(&cache.q.slice(cols)));
        }
        let at: ArrayView2<f64> = cache.a.t();
        grad.wq += &at.dot(&dq);
        grad.wk += &at.dot(&dk);
        grad.wv += &at.dot(&dv);
        grad.bq += &dq.sum_axis(Axis(0));
        grad.bk += &dk.sum_axis(Axis(0));
        grad.bv += &dv.sum_axis(Axis(0));
        let da = dq.dot(&b.wq.t()) + dk.dot(&b.wk.t()) + dv.dot(&b.wv.t());
        dx_mid + layer_norm_backward(&da, &b.ln1, &cache.ln1, &mut grad.ln1)
    }

    /// One forward and backward pass. `dlogits_of` maps the scores to the
    /// loss and its gradient with respect to each pre-sigmoid logit.
    /// Gradients accumulate into `grad`, except for the token embedding:
    /// its per-position rows are returned so callers can scatter them.
    pub(crate) fn forward_backward<F>(&self, ids: &[u32], dlogits_of: F, grad: &mut Params) -> (f64, Array2<f64>)
    where
        F: FnOnce(&[f64]) -> (f64, Vec<f64>),
    {
        let (logits, cache) = self.forward(ids);
        let scores: Vec<f64> = logits.iter().map(|&z| sigmoid(z)).collect();
        let (loss, dlogits) = dlogits_of(&scores);
        let dlogits = Array1::from(dlogits);

        let p = &self.params;
        grad.head += &cache.hidden.t().dot(&dlogits);
        let dhidden = dlogits.view().insert_axis(Axis(1)).dot(&p.head.view().insert_axis(Axis(0)));
        let mut dx = layer_norm_backward(&dhidden, &p.final_ln, &cache.final_ln, &mut grad.final_ln);
        for ((b, bc), bg) in p.blocks.iter().zip(&cache.blocks).zip(grad.blocks.iter_mut()).rev() {
            dx = self.block_backward(b, bc, dx, bg);
        }
        for i in 0..ids.len() {
            let mut row = grad.pos_emb.row_mut(i);
            row += &dx.row(i);
        }
        (loss, dx)
    }

    /// Mean binary cross-entropy of one sequence and its full gradient.
    pub fn loss_and_gradient(&self, ids: &[u32], labels: &[u8]) -> Result<(f64, Params)> {
        self.check_ids(ids)?;
        if ids.len() != labels.len() {
            return Err(Error::LengthMismatch(ids.len(), labels.len()));
        }
        let mut grad = self.params.zeros_like();
        let (loss, demb) =
            self.forward_backward(ids, |scores| super::loss::bce_loss_with_logit_grad(scores, labels), &mut grad);
        for (i, &id) in ids.iter().enumerate() {
            let mut row = grad.tok_emb.row_mut(id as usize);
            row += &demb.row(i);
        }
        Ok((loss, grad))
    }

    /// Loss only, for finite-difference checks and evaluation.
    pub fn loss(&self, ids: &[u32], labels: &[u8]) -> Result<f64> {
        let scores = self.score_tokens(ids)?;
        super::loss::bce_loss(&scores, labels)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny(seed: u64) -> TokenScoringModel {
        let cfg = ModelConfig { vocab_size: 20, d_model: 8, layers: 2, heads: 2, ffn_dim: 12, max_len: 12 };
        TokenScoringModel::new(cfg, seed).unwrap()
    }

    #[test]
    fn zero_head_scores_half() {
        let mut m = tiny(1);
        m.params_mut().head.fill(0.0);
        let s = m.score_tokens(&[2, 7, 9, 3]).unwrap();
        assert_eq!(s, vec![0.5; 4]);
    }

    #[test]
    fn output_shape_and_range() {
        let m = tiny(2);
        for len in 1..=12 {
            let ids: Vec<u32> = (0..len).map(|i| (i * 7 % 20) as u32).collect();
            let s = m.score_tokens(&ids).unwrap();
            assert_eq!(s.len(), len);
            assert!(s.iter().all(|&x| x > 0.0 && x < 1.0));
            assert_eq!(m.encode(&ids).unwrap().dim(), (len, 8));
        }
    }

    #[test]
    fn rejects_bad_ids() {
        let m = tiny(3);
        assert!(matches!(m.score_tokens(&[1, 20]), Err(Error::TokenOutOfRange { id: 20, .. })));
        assert!(m.score_tokens(&[]).is_err());
        assert!(m.score_tokens(&[1; 13]).is_err());
    }

    #[test]
    fn same_seed_same_params() {
        assert_eq!(tiny(7), tiny(7));
        assert_ne!(tiny(7), tiny(8));
    }

    #[test]
    fn sigmoid_saturates_inside_open_interval() {
        assert!(sigmoid(1e3) < 1.0);
        assert!(sigmoid(-1e3) > 0.0);
        assert_eq!(sigmoid(0.0), 0.5);
    }

    #[test]
    fn invalid_configs() {
        let mut cfg = ModelConfig::small(10);
        cfg.heads = 3;
        assert!(TokenScoringModel::new(cfg, 0).is_err());
        let cfg = ModelConfig::small(10);
        let other = Params::zeros(&ModelConfig { layers: 1, ..cfg });
        assert!(TokenScoringModel::from_params(cfg, other).is_err());
    }
}
