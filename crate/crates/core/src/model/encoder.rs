//! Pre-LN transformer encoder with an MLM head and an additive scale table.
//!
//! Only the mask row of the last block is computed. Backpropagation runs
//! into the head parameters and, through the whole frozen backbone, into the
//! input embeddings so the scale table can be trained; backbone weight
//! gradients are never formed.

use ndarray::{s, Array1, Array2, ArrayView1, Axis};
use rand::Rng;
use rand_distr::{Distribution, Normal, Uniform};
use serde::{Deserialize, Serialize};

use super::config::ModelConfig;
use super::{real, ModelError, Real, Result};
use crate::datagen::generate::substream;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Partition {
    Backbone,
    Head,
    Scale,
}

impl Partition {
    pub fn trainable(self) -> bool {
        self != Partition::Backbone
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayerNorm<F> {
    pub gamma: Array1<F>,
    pub beta: Array1<F>,
}

impl<F: Real> LayerNorm<F> {
    fn new(n: usize) -> Self {
        Self { gamma: Array1::ones(n), beta: Array1::zeros(n) }
    }
}

/// Weights are stored input-major: `y = x · w + b`.
#[derive(Debug, Clone, PartialEq)]
pub struct Block<F> {
    pub ln1: LayerNorm<F>,
    pub wq: Array2<F>,
    pub bq: Array1<F>,
    pub wk: Array2<F>,
    pub bk: Array1<F>,
    pub wv: Array2<F>,
    pub bv: Array1<F>,
    pub wo: Array2<F>,
    pub bo: Array1<F>,
    pub ln2: LayerNorm<F>,
    pub w1: Array2<F>,
    pub b1: Array1<F>,
    pub w2: Array2<F>,
    pub b2: Array1<F>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Encoder<F> {
    pub config: ModelConfig,
    pub vocab_size: usize,
    pub tok: Array2<F>,
    pub pos: Array2<F>,
    pub emb_ln: LayerNorm<F>,
    pub blocks: Vec<Block<F>>,
    pub dense: Array2<F>,
    pub dense_b: Array1<F>,
    pub head_ln: LayerNorm<F>,
    /// One row per vocabulary entry.
    pub decoder: Array2<F>,
    pub decoder_b: Array1<F>,
    /// Row `i` is added to tokens with scale index `i`; row 0 stays zero.
    /// Empty when the table is disabled.
    pub scale: Array2<F>,
}

/// Token ids, scale indices and the mask position of one sequence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Input {
    pub ids: Vec<u32>,
    pub scale: Vec<usize>,
    pub mask: usize,
}

pub type ParamView<'a, F> = (String, Partition, Vec<usize>, &'a [F]);

const INIT_STREAM: u64 = 0x1417;

fn normal<F: Real, R: Rng>(rows: usize, cols: usize, std: f64, rng: &mut R) -> Array2<F> {
    let d = Normal::new(0.0, std).expect("positive std");
    Array2::from_shape_simple_fn((rows, cols), || real(d.sample(rng)))
}

fn uniform<F: Real, R: Rng>(n: usize, bound: f64, rng: &mut R) -> Array1<F> {
    let d = Uniform::new(-bound, bound);
    Array1::from_shape_simple_fn(n, || real(d.sample(rng)))
}

/// Deterministic random initialisation. Weight matrices and embeddings are
/// normal with `init_std`, feed-forward biases uniform in `±1/sqrt(fan_in)`,
/// other biases zero, layer norms identity, and the scale table zero.
pub fn init_model<F: Real>(config: &ModelConfig, vocab_size: usize, seed: u64) -> Result<Encoder<F>> {
    config.validate()?;
    if vocab_size == 0 {
        return Err(ModelError::Config("empty vocabulary".into()));
    }
    let mut rng = substream(seed, &[INIT_STREAM]);
    let (h, f, std) = (config.hidden, config.ffn, config.init_std);
    let tok = normal(vocab_size, h, std, &mut rng);
    let pos = normal(config.max_seq_len, h, std, &mut rng);
    let blocks = (0..config.layers)
        .map(|_| Block {
            ln1: LayerNorm::new(h),
            wq: normal(h, h, std, &mut rng),
            bq: Array1::zeros(h),
            wk: normal(h, h, std, &mut rng),
            bk: Array1::zeros(h),
            wv: normal(h, h, std, &mut rng),
            bv: Array1::zeros(h),
            wo: normal(h, h, std, &mut rng),
            bo: Array1::zeros(h),
            ln2: LayerNorm::new(h),
            w1: normal(h, f, std, &mut rng),
            b1: uniform(f, 1.0 / (h as f64).sqrt(), &mut rng),
            w2: normal(f, h, std, &mut rng),
            b2: uniform(h, 1.0 / (f as f64).sqrt(), &mut rng),
        })
        .collect();
    let dense = normal(h, h, config.head_init_std, &mut rng);
    let decoder = normal(vocab_size, h, config.head_init_std, &mut rng);
    let scale_rows = config.scale_cap.map_or(0, |c| c + 1);
    Ok(Encoder {
        config: config.clone(),
        vocab_size,
        tok,
        pos,
        emb_ln: LayerNorm::new(h),
        blocks,
        dense,
        dense_b: Array1::zeros(h),
        head_ln: LayerNorm::new(h),
        decoder,
        decoder_b: Array1::zeros(vocab_size),
        scale: Array2::zeros((scale_rows, h)),
    })
}

struct LnCache<F> {
    xhat: Array2<F>,
    rstd: Array1<F>,
}

fn layer_norm<F: Real>(x: &Array2<F>, p: &LayerNorm<F>, eps: F) -> (Array2<F>, LnCache<F>) {
    let n: F = real(x.ncols() as f64);
    let mut xhat = x.clone();
    let mut rstd = Array1::zeros(x.nrows());
    for (mut row, r) in xhat.rows_mut().into_iter().zip(rstd.iter_mut()) {
        let mean = row.sum() / n;
        row.mapv_inplace(|v| v - mean);
        let var = row.iter().map(|&v| v * v).sum::<F>() / n;
        *r = F::one() / (var + eps).sqrt();
        let rr = *r;
        row.mapv_inplace(|v| v * rr);
    }
    let y = &xhat * &p.gamma + &p.beta;
    (y, LnCache { xhat, rstd })
}

/// Input gradient of a layer norm.
fn layer_norm_backward<F: Real>(dy: &Array2<F>, c: &LnCache<F>, gamma: &Array1<F>) -> Array2<F> {
    let n: F = real(dy.ncols() as f64);
    let mut g = dy * gamma;
    for ((mut row, xh), &r) in g.rows_mut().into_iter().zip(c.xhat.rows()).zip(c.rstd.iter()) {
        let mean_g = row.sum() / n;
        let mean_gx = row.iter().zip(xh.iter()).map(|(&a, &b)| a * b).sum::<F>() / n;
        row.zip_mut_with(&xh, |v, &x| *v = r * (*v - mean_g - x * mean_gx));
    }
    g
}

const GELU_C: f64 = 0.797_884_560_802_865_4;
const GELU_A: f64 = 0.044_715;

fn gelu<F: Real>(x: F) -> F {
    let (c, a, half): (F, F, F) = (real(GELU_C), real(GELU_A), real(0.5));
    half * x * (F::one() + (c * (x + a * x * x * x)).tanh())
}

fn gelu_grad<F: Real>(x: F) -> F {
    let (c, a, half, three): (F, F, F, F) = (real(GELU_C), real(GELU_A), real(0.5), real(3.0));
    let t = (c * (x + a * x * x * x)).tanh();
    half * (F::one() + t) + half * x * (F::one() - t * t) * c * (F::one() + three * a * x * x)
}

fn softmax_rows<F: Real>(m: &mut Array2<F>) {
    for mut row in m.rows_mut() {
        let max = row.iter().copied().fold(F::neg_infinity(), F::max);
        row.mapv_inplace(|v| (v - max).exp());
        let sum = row.sum();
        row.mapv_inplace(|v| v / sum);
    }
}

/// Cached activations of a block evaluated on every row.
struct FullCache<F> {
    ln1: LnCache<F>,
    q: Array2<F>,
    k: Array2<F>,
    v: Array2<F>,
    probs: Vec<Array2<F>>,
    ln2: LnCache<F>,
    u: Array2<F>,
}

/// Cached activations of the last block, evaluated on the mask row only.
struct LastCache<F> {
    mask: usize,
    ln1: LnCache<F>,
    q: Array2<F>,
    k: Array2<F>,
    v: Array2<F>,
    probs: Vec<Array2<F>>,
    ln2: LnCache<F>,
    u: Array2<F>,
}

/// Everything the input-gradient pass needs.
pub struct Tape<F> {
    scale: Vec<usize>,
    emb_ln: LnCache<F>,
    full: Vec<FullCache<F>>,
    last: LastCache<F>,
}

/// Cached head activations for one sample.
pub struct HeadCache<F> {
    h: Array2<F>,
    z: Array2<F>,
    ln: LnCache<F>,
    n: Array2<F>,
}

impl<F: Real> Block<F> {
    fn attention(&self, q: &Array2<F>, k: &Array2<F>, v: &Array2<F>, heads: usize) -> (Array2<F>, Vec<Array2<F>>) {
        let dh = q.ncols() / heads;
        let scale: F = real(1.0 / (dh as f64).sqrt());
        let mut out = Array2::zeros((q.nrows(), q.ncols()));
        let mut probs = Vec::with_capacity(heads);
        for hd in 0..heads {
            let cols = s![.., hd * dh..(hd + 1) * dh];
            let mut p = q.slice(cols).dot(&k.slice(cols).t()) * scale;
            softmax_rows(&mut p);
            out.slice_mut(cols).assign(&p.dot(&v.slice(cols)));
            probs.push(p);
        }
        (out, probs)
    }

    /// Gradients of q, k and v from the gradient of the attention output.
    #[allow(clippy::type_complexity)]
    fn attention_backward(
        &self,
        d_out: &Array2<F>,
        q: &Array2<F>,
        k: &Array2<F>,
        v: &Array2<F>,
        probs: &[Array2<F>],
    ) -> (Array2<F>, Array2<F>, Array2<F>) {
        let heads = probs.len();
        let dh = q.ncols() / heads;
        let scale: F = real(1.0 / (dh as f64).sqrt());
        let mut dq = Array2::zeros(q.raw_dim());
        let mut dk = Array2::zeros(k.raw_dim());
        let mut dv = Array2::zeros(v.raw_dim());
        for (hd, p) in probs.iter().enumerate() {
            let cols = s![.., hd * dh..(hd + 1) * dh];
            let d_oh = d_out.slice(cols);
            let dp = d_oh.dot(&v.slice(cols).t());
            dv.slice_mut(cols).assign(&p.t().dot(&d_oh));
            let mut ds = &dp * p;
            for (mut row, pr) in ds.rows_mut().into_iter().zip(p.rows()) {
                let dot = row.sum();
                row.zip_mut_with(&pr, |d, &pv| *d = *d - pv * dot);
            }
            ds.mapv_inplace(|x| x * scale);
            dq.slice_mut(cols).assign(&ds.dot(&k.slice(cols)));
            dk.slice_mut(cols).assign(&ds.t().dot(&q.slice(cols)));
        }
        (dq, dk, dv)
    }

    fn forward_full(&self, x: &Array2<F>, heads: usize, eps: F) -> (Array2<F>, FullCache<F>) {
        let (a, ln1) = layer_norm(x, &self.ln1, eps);
        let q = a.dot(&self.wq) + &self.bq;
        let k = a.dot(&self.wk) + &self.bk;
        let v = a.dot(&self.wv) + &self.bv;
        let (o, probs) = self.attention(&q, &k, &v, heads);
        let x1 = x + &(o.dot(&self.wo) + &self.bo);
        let (b, ln2) = layer_norm(&x1, &self.ln2, eps);
        let u = b.dot(&self.w1) + &self.b1;
        let g = u.mapv(gelu);
        let out = x1 + &(g.dot(&self.w2) + &self.b2);
        (out, FullCache { ln1, q, k, v, probs, ln2, u })
    }

    fn backward_full(&self, d_out: &Array2<F>, c: &FullCache<F>) -> Array2<F> {
        let mut d_u = d_out.dot(&self.w2.t());
        d_u.zip_mut_with(&c.u, |d, &u| *d = *d * gelu_grad(u));
        let d_x1 = d_out + &layer_norm_backward(&d_u.dot(&self.w1.t()), &c.ln2, &self.ln2.gamma);
        let d_o = d_x1.dot(&self.wo.t());
        let (dq, dk, dv) = self.attention_backward(&d_o, &c.q, &c.k, &c.v, &c.probs);
        let d_a = dq.dot(&self.wq.t()) + dk.dot(&self.wk.t()) + dv.dot(&self.wv.t());
        d_x1 + layer_norm_backward(&d_a, &c.ln1, &self.ln1.gamma)
    }

    fn forward_last(&self, x: &Array2<F>, mask: usize, heads: usize, eps: F) -> (Array1<F>, LastCache<F>) {
        let (a, ln1) = layer_norm(x, &self.ln1, eps);
        let q = a.slice(s![mask..mask + 1, ..]).dot(&self.wq) + &self.bq;
        let k = a.dot(&self.wk) + &self.bk;
        let v = a.dot(&self.wv) + &self.bv;
        let (o, probs) = self.attention(&q, &k, &v, heads);
        let x1 = x.slice(s![mask..mask + 1, ..]).to_owned() + o.dot(&self.wo) + &self.bo;
        let (b, ln2) = layer_norm(&x1, &self.ln2, eps);
        let u = b.dot(&self.w1) + &self.b1;
        let g = u.mapv(gelu);
        let out = x1 + g.dot(&self.w2) + &self.b2;
        (out.row(0).to_owned(), LastCache { mask, ln1, q, k, v, probs, ln2, u })
    }

    fn backward_last(&self, d_out: ArrayView1<F>, c: &LastCache<F>, rows: usize) -> Array2<F> {
        let d_out = d_out.insert_axis(Axis(0)).to_owned();
        let mut d_u = d_out.dot(&self.w2.t());
        d_u.zip_mut_with(&c.u, |d, &u| *d = *d * gelu_grad(u));
        let d_x1 = &d_out + &layer_norm_backward(&d_u.dot(&self.w1.t()), &c.ln2, &self.ln2.gamma);
        let d_o = d_x1.dot(&self.wo.t());
        let (dq, dk, dv) = self.attention_backward(&d_o, &c.q, &c.k, &c.v, &c.probs);
        let mut d_a = dk.dot(&self.wk.t()) + dv.dot(&self.wv.t());
        {
            let mut row = d_a.row_mut(c.mask);
            row += &dq.dot(&self.wq.t()).row(0);
        }
        let mut d_x = layer_norm_backward(&d_a, &c.ln1, &self.ln1.gamma);
        debug_assert_eq!(d_x.nrows(), rows);
        let mut row = d_x.row_mut(c.mask);
        row += &d_x1.row(0);
        d_x
    }
}

impl<F: Real> Encoder<F> {
    pub fn scale_enabled(&self) -> bool {
        self.scale.nrows() > 0
    }

    fn eps(&self) -> F {
        real(self.config.layer_norm_eps)
    }

    /// Checks token ids, sequence length and the mask position.
    pub fn check_input(&self, input: &Input) -> Result<()> {
        let len = input.ids.len();
        if len > self.config.max_seq_len {
            return Err(ModelError::SequenceTooLong { len, max: self.config.max_seq_len });
        }
        if input.mask >= len || input.scale.len() != len {
            return Err(ModelError::NoMask);
        }
        if input.ids.iter().any(|&i| i as usize >= self.vocab_size) {
            return Err(ModelError::Config("token id outside the vocabulary".into()));
        }
        Ok(())
    }

    fn embed(&self, input: &Input) -> Array2<F> {
        let h = self.config.hidden;
        let mut e = Array2::zeros((input.ids.len(), h));
        let cap = self.scale.nrows().saturating_sub(1);
        for (p, mut row) in e.rows_mut().into_iter().enumerate() {
            row.assign(&self.tok.row(input.ids[p] as usize));
            row += &self.pos.row(p);
            let s = input.scale[p].min(cap);
            if s > 0 {
                row += &self.scale.row(s);
            }
        }
        e
    }

    /// Final hidden state at the mask position plus the tape for
    /// [`Encoder::backward_to_scale`].
    pub fn forward_tape(&self, input: &Input) -> (Array1<F>, Tape<F>) {
        let eps = self.eps();
        let heads = self.config.heads;
        let (mut x, emb_ln) = layer_norm(&self.embed(input), &self.emb_ln, eps);
        let (last, rest) = self.blocks.split_last().expect("at least one block");
        let mut full = Vec::with_capacity(rest.len());
        for b in rest {
            let (y, c) = b.forward_full(&x, heads, eps);
            full.push(c);
            x = y;
        }
        let (feat, last_cache) = last.forward_last(&x, input.mask, heads, eps);
        let scale = input.scale.iter().map(|&s| s.min(self.scale.nrows().saturating_sub(1))).collect();
        (feat, Tape { scale, emb_ln, full, last: last_cache })
    }

    pub fn features(&self, input: &Input) -> Array1<F> {
        self.forward_tape(input).0
    }

    /// Adds the gradient of the scale table, given the gradient of the mask
    /// feature, into `grad_scale`. Row 0 is left untouched.
    pub fn backward_to_scale(&self, tape: &Tape<F>, d_feat: ArrayView1<F>, grad_scale: &mut Array2<F>) {
        if !self.scale_enabled() || tape.scale.iter().all(|&s| s == 0) {
            return;
        }
        let rows = tape.scale.len();
        let (last, rest) = self.blocks.split_last().expect("at least one block");
        let mut d = last.backward_last(d_feat, &tape.last, rows);
        for (b, c) in rest.iter().zip(&tape.full).rev() {
            d = b.backward_full(&d, c);
        }
        let d_e = layer_norm_backward(&d, &tape.emb_ln, &self.emb_ln.gamma);
        for (p, &s) in tape.scale.iter().enumerate() {
            if s > 0 {
                let mut row = grad_scale.row_mut(s);
                row += &d_e.row(p);
            }
        }
    }

    /// Head scores for `candidates` (vocabulary ids) from a mask feature.
    pub fn head_forward(&self, feat: ArrayView1<F>, candidates: &[u32]) -> (Vec<F>, HeadCache<F>) {
        let h = feat.insert_axis(Axis(0)).to_owned();
        let z = h.dot(&self.dense) + &self.dense_b;
        let (n, ln) = layer_norm(&z.mapv(gelu), &self.head_ln, self.eps());
        let row = n.row(0);
        let scores = candidates
            .iter()
            .map(|&c| row.dot(&self.decoder.row(c as usize)) + self.decoder_b[c as usize])
            .collect();
        (scores, HeadCache { h, z, ln, n })
    }

    /// Scores over the whole vocabulary.
    pub fn vocab_scores(&self, feat: ArrayView1<F>) -> Array1<F> {
        let z = feat.insert_axis(Axis(0)).dot(&self.dense) + &self.dense_b;
        let (n, _) = layer_norm(&z.mapv(gelu), &self.head_ln, self.eps());
        self.decoder.dot(&n.row(0)) + &self.decoder_b
    }

    /// Scores over the vocabulary at the mask position of `input`.
    pub fn forward(&self, input: &Input) -> Result<Array1<F>> {
        self.check_input(input)?;
        Ok(self.vocab_scores(self.features(input).view()))
    }

    /// Accumulates head gradients into `grads` and returns the gradient of
    /// the mask feature.
    pub fn head_backward(&self, c: &HeadCache<F>, candidates: &[u32], d_scores: &[F], grads: &mut Encoder<F>) -> Array1<F> {
        let n = c.n.row(0);
        let mut d_n = Array1::<F>::zeros(n.len());
        for (&id, &ds) in candidates.iter().zip(d_scores) {
            let id = id as usize;
            grads.decoder.row_mut(id).scaled_add(ds, &n);
            grads.decoder_b[id] += ds;
            d_n.scaled_add(ds, &self.decoder.row(id));
        }
        let d_n = d_n.insert_axis(Axis(0));
        grads.head_ln.gamma += &(&d_n * &c.ln.xhat).row(0);
        grads.head_ln.beta += &d_n.row(0);
        let mut d_z = layer_norm_backward(&d_n.to_owned(), &c.ln, &self.head_ln.gamma);
        d_z.zip_mut_with(&c.z, |d, &z| *d = *d * gelu_grad(z));
        grads.dense += &c.h.t().dot(&d_z);
        grads.dense_b += &d_z.row(0);
        d_z.dot(&self.dense.t()).row(0).to_owned()
    }

    /// All-zero tensors of the same shapes, used for gradients and optimizer
    /// moments.
    pub fn zeros_like(&self) -> Encoder<F> {
        let z1 = |a: &Array1<F>| Array1::zeros(a.raw_dim());
        let z2 = |a: &Array2<F>| Array2::zeros(a.raw_dim());
        let zl = |l: &LayerNorm<F>| LayerNorm { gamma: z1(&l.gamma), beta: z1(&l.beta) };
        Encoder {
            config: self.config.clone(),
            vocab_size: self.vocab_size,
            tok: z2(&self.tok),
            pos: z2(&self.pos),
            emb_ln: zl(&self.emb_ln),
            blocks: self
                .blocks
                .iter()
                .map(|b| Block {
                    ln1: zl(&b.ln1),
                    wq: z2(&b.wq),
                    bq: z1(&b.bq),
                    wk: z2(&b.wk),
                    bk: z1(&b.bk),
                    wv: z2(&b.wv),
                    bv: z1(&b.bv),
                    wo: z2(&b.wo),
                    bo: z1(&b.bo),
                    ln2: zl(&b.ln2),
                    w1: z2(&b.w1),
                    b1: z1(&b.b1),
                    w2: z2(&b.w2),
                    b2: z1(&b.b2),
                })
                .collect(),
            dense: z2(&self.dense),
            dense_b: z1(&self.dense_b),
            head_ln: zl(&self.head_ln),
            decoder: z2(&self.decoder),
            decoder_b: z1(&self.decoder_b),
            scale: z2(&self.scale),
        }
    }

    /// Every parameter tensor with its name, partition and shape, in a fixed
    /// order.
    pub fn params(&self) -> Vec<ParamView<'_, F>> {
        use Partition::*;
        let mut out: Vec<ParamView<'_, F>> = Vec::new();
        macro_rules! push {
            ($name:expr, $part:expr, $a:expr) => {
                out.push(($name.to_string(), $part, $a.shape().to_vec(), $a.as_slice().expect("contiguous")))
            };
        }
        push!("tok", Backbone, self.tok);
        push!("pos", Backbone, self.pos);
        push!("emb_ln.gamma", Backbone, self.emb_ln.gamma);
        push!("emb_ln.beta", Backbone, self.emb_ln.beta);
        for (i, b) in self.blocks.iter().enumerate() {
            let n = |s: &str| format!("blocks.{i}.{s}");
            push!(n("ln1.gamma"), Backbone, b.ln1.gamma);
            push!(n("ln1.beta"), Backbone, b.ln1.beta);
            for (name, w, bias) in [("q", &b.wq, &b.bq), ("k", &b.wk, &b.bk), ("v", &b.wv, &b.bv), ("o", &b.wo, &b.bo)] {
                push!(n(&format!("w{name}")), Backbone, w);
                push!(n(&format!("b{name}")), Backbone, bias);
            }
            push!(n("ln2.gamma"), Backbone, b.ln2.gamma);
            push!(n("ln2.beta"), Backbone, b.ln2.beta);
            push!(n("w1"), Backbone, b.w1);
            push!(n("b1"), Backbone, b.b1);
            push!(n("w2"), Backbone, b.w2);
            push!(n("b2"), Backbone, b.b2);
        }
        push!("head.dense", Head, self.dense);
        push!("head.dense_b", Head, self.dense_b);
        push!("head.ln.gamma", Head, self.head_ln.gamma);
        push!("head.ln.beta", Head, self.head_ln.beta);
        push!("head.decoder", Head, self.decoder);
        push!("head.decoder_b", Head, self.decoder_b);
        push!("scale", Scale, self.scale);
        out
    }

    /// Mutable slices in the same order as [`Encoder::params`].
    pub fn params_mut(&mut self) -> Vec<(Partition, &mut [F])> {
        use Partition::*;
        let mut out: Vec<(Partition, &mut [F])> = Vec::new();
        let Encoder { tok, pos, emb_ln, blocks, dense, dense_b, head_ln, decoder, decoder_b, scale, .. } = self;
        out.push((Backbone, tok.as_slice_mut().expect("contiguous")));
        out.push((Backbone, pos.as_slice_mut().expect("contiguous")));
        out.push((Backbone, emb_ln.gamma.as_slice_mut().expect("contiguous")));
        out.push((Backbone, emb_ln.beta.as_slice_mut().expect("contiguous")));
        for b in blocks.iter_mut() {
            let Block { ln1, wq, bq, wk, bk, wv, bv, wo, bo, ln2, w1, b1, w2, b2 } = b;
            out.push((Backbone, ln1.gamma.as_slice_mut().expect("contiguous")));
            out.push((Backbone, ln1.beta.as_slice_mut().expect("contiguous")));
            for (w, bias) in [(wq, bq), (wk, bk), (wv, bv), (wo, bo)] {
                out.push((Backbone, w.as_slice_mut().expect("contiguous")));
                out.push((Backbone, bias.as_slice_mut().expect("contiguous")));
            }
            out.push((Backbone, ln2.gamma.as_slice_mut().expect("contiguous")));
            out.push((Backbone, ln2.beta.as_slice_mut().expect("contiguous")));
            out.push((Backbone, w1.as_slice_mut().expect("contiguous")));
            out.push((Backbone, b1.as_slice_mut().expect("contiguous")));
            out.push((Backbone, w2.as_slice_mut().expect("contiguous")));
            out.push((Backbone, b2.as_slice_mut().expect("contiguous")));
        }
        out.push((Head, dense.as_slice_mut().expect("contiguous")));
        out.push((Head, dense_b.as_slice_mut().expect("contiguous")));
        out.push((Head, head_ln.gamma.as_slice_mut().expect("contiguous")));
        out.push((Head, head_ln.beta.as_slice_mut().expect("contiguous")));
        out.push((Head, decoder.as_slice_mut().expect("contiguous")));
        out.push((Head, decoder_b.as_slice_mut().expect("contiguous")));
        out.push((Scale, scale.as_slice_mut().expect("contiguous")));
        out
    }

    /// SHA-256 over the bytes of every parameter in `part`.
    pub fn partition_digest(&self, part: Partition) -> String {
        use sha2::{Digest, Sha256};
        let mut h = Sha256::new();
        for (name, p, _, data) in self.params() {
            if p == part {
                h.update(name.as_bytes());
                for v in data {
                    h.update(v.to_f64().expect("finite").to_le_bytes());
                }
            }
        }
        format!("{:x}", h.finalize())
    }

    /// Converts every parameter to another float type.
    pub fn cast<G: Real>(&self) -> Encoder<G> {
        let c = |x: F| -> G { real(x.to_f64().expect("float")) };
        let a1 = |a: &Array1<F>| a.mapv(c);
        let a2 = |a: &Array2<F>| a.mapv(c);
        let ln = |l: &LayerNorm<F>| LayerNorm { gamma: a1(&l.gamma), beta: a1(&l.beta) };
        Encoder {
            config: self.config.clone(),
            vocab_size: self.vocab_size,
            tok: a2(&self.tok),
            pos: a2(&self.pos),
            emb_ln: ln(&self.emb_ln),
            blocks: self
                .blocks
                .iter()
                .map(|b| Block {
                    ln1: ln(&b.ln1),
                    wq: a2(&b.wq),
                    bq: a1(&b.bq),
                    wk: a2(&b.wk),
                    bk: a1(&b.bk),
                    wv: a2(&b.wv),
                    bv: a1(&b.bv),
                    wo: a2(&b.wo),
                    bo: a1(&b.bo),
                    ln2: ln(&b.ln2),
                    w1: a2(&b.w1),
                    b1: a1(&b.b1),
                    w2: a2(&b.w2),
                    b2: a1(&b.b2),
                })
                .collect(),
            dense: a2(&self.dense),
            dense_b: a1(&self.dense_b),
            head_ln: ln(&self.head_ln),
            decoder: a2(&self.decoder),
            decoder_b: a1(&self.decoder_b),
            scale: a2(&self.scale),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> ModelConfig {
        ModelConfig { layers: 2, hidden: 8, heads: 2, ffn: 16, max_seq_len: 32, ..ModelConfig::desk() }
    }

    fn input() -> Input {
        Input { ids: vec![1, 5, 6, 7, 3, 9, 2], scale: vec![0, 3, 2, 1, 0, 0, 0], mask: 4 }
    }

    #[test]
    fn init_is_deterministic_per_seed() {
        let a: Encoder<f32> = init_model(&tiny(), 12, 1).unwrap();
        let b: Encoder<f32> = init_model(&tiny(), 12, 1).unwrap();
        let c: Encoder<f32> = init_model(&tiny(), 12, 2).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.partition_digest(Partition::Backbone), c.partition_digest(Partition::Backbone));
    }

    #[test]
    fn zero_scale_indices_match_scale_off() {
        let off: Encoder<f32> = init_model(&tiny(), 12, 4).unwrap();
        let on: Encoder<f32> = init_model(&tiny().with_scale(16), 12, 4).unwrap();
        let inp = input();
        assert_eq!(off.forward(&inp).unwrap(), on.forward(&inp).unwrap());
        let mut zero = inp.clone();
        zero.scale = vec![0; zero.ids.len()];
        let mut trained = on.clone();
        trained.scale.row_mut(5).fill(0.3);
        assert_eq!(off.forward(&zero).unwrap(), trained.forward(&zero).unwrap());
    }

    #[test]
    fn scale_row_only_affects_inputs_with_that_index() {
        let mut m: Encoder<f64> = init_model(&tiny().with_scale(16), 12, 4).unwrap();
        let h = m.config.hidden;
        m.scale = Array2::from_shape_fn((17, h), |(r, c)| if r == 0 { 0.0 } else { 0.01 * ((r * 7 + c * 3) % 11) as f64 });
        let inp = input();
        let before = m.forward(&inp).unwrap();
        let mut doubled = m.clone();
        doubled.scale.row_mut(7).mapv_inplace(|v| v * 2.0);
        assert_eq!(before, doubled.forward(&inp).unwrap());
        doubled.scale.row_mut(2).mapv_inplace(|v| v * 2.0);
        assert_ne!(before, doubled.forward(&inp).unwrap());
    }

    #[test]
    fn rejects_long_sequences() {
        let m: Encoder<f32> = init_model(&tiny(), 12, 0).unwrap();
        let inp = Input { ids: vec![1; 40], scale: vec![0; 40], mask: 3 };
        assert!(matches!(m.forward(&inp), Err(ModelError::SequenceTooLong { len: 40, max: 32 })));
    }

    #[test]
    fn params_and_params_mut_align() {
        let mut m: Encoder<f32> = init_model(&tiny().with_scale(4), 12, 0).unwrap();
        let shapes: Vec<(Partition, usize)> = m.params().iter().map(|(_, p, _, d)| (*p, d.len())).collect();
        let shapes_mut: Vec<(Partition, usize)> = m.params_mut().iter().map(|(p, d)| (*p, d.len())).collect();
        assert_eq!(shapes, shapes_mut);
    }
}
