use ndarray::{s, Array2, ArrayView1};

use crate::error::{invalid, Error, Result};
use crate::sampling::RayRng;
use crate::scalar::Real;

/// Residual multi-head cross-attention: the projected-origin feature queries the features
/// sampled along the projected ray. Projections are `C × C` without biases; head `h` owns
/// channels `h·C/H .. (h+1)·C/H` of the projected query, keys and values.
#[derive(Debug, Clone, PartialEq)]
pub struct AttentionBlock<T> {
    pub heads: usize,
    pub wq: Array2<T>,
    pub wk: Array2<T>,
    pub wv: Array2<T>,
    pub wo: Array2<T>,
}

/// Intermediate values of a batched forward pass, kept for the backward pass.
#[derive(Debug, Clone)]
pub(crate) struct AttentionCache<T> {
    fp: Array2<T>,
    keys: Array2<T>,
    offsets: Vec<usize>,
    q: Array2<T>,
    k: Array2<T>,
    v: Array2<T>,
    /// Softmax weight of key row `n` in head `h`.
    weights: Array2<T>,
    concat: Array2<T>,
}

pub(crate) struct AttentionGrads<T> {
    pub wq: Array2<T>,
    pub wk: Array2<T>,
    pub wv: Array2<T>,
    pub wo: Array2<T>,
}

impl<T: Real> AttentionBlock<T> {
    /// Uniform init with bound `√(3/C)` drawn in the order Wq, Wk, Wv, Wo, row-major.
    pub fn new(channels: usize, heads: usize, rng: &mut RayRng) -> Result<Self> {
        if heads == 0 || channels == 0 || channels % heads != 0 {
            return Err(invalid(format!("{channels} channels cannot be split into {heads} heads")));
        }
        let bound = (3.0 / channels as f64).sqrt();
        let mut draw = || Array2::from_shape_simple_fn((channels, channels), || T::lit(rng.uniform_range(-bound, bound)));
        Ok(Self { heads, wq: draw(), wk: draw(), wv: draw(), wo: draw() })
    }

    /// All four projections set to the identity.
    pub fn identity(channels: usize, heads: usize) -> Result<Self> {
        if heads == 0 || channels == 0 || channels % heads != 0 {
            return Err(invalid(format!("{channels} channels cannot be split into {heads} heads")));
        }
        let eye = Array2::eye(channels);
        Ok(Self { heads, wq: eye.clone(), wk: eye.clone(), wv: eye.clone(), wo: eye })
    }

    pub fn channels(&self) -> usize {
        self.wq.nrows()
    }

    fn head_dim(&self) -> usize {
        self.channels() / self.heads
    }

    fn scale(&self) -> T {
        T::one() / T::lit(self.head_dim() as f64).sqrt()
    }

    /// Per-head softmax weights over the keys, for inspection.
    pub fn attention_weights(&self, f_p: &[T], f_l: &[Vec<T>]) -> Result<Vec<Vec<T>>> {
        let cache = self.forward_batch(&[(f_p, f_l)])?;
        Ok((0..self.heads).map(|h| cache.weights.column(h).to_vec()).collect())
    }

    pub(crate) fn forward_batch(&self, rows: &[(&[T], &[Vec<T>])]) -> Result<AttentionCache<T>> {
        let c = self.channels();
        let b = rows.len();
        let mut offsets = Vec::with_capacity(b + 1);
        offsets.push(0);
        for (fp, fl) in rows {
            if fp.len() != c || fl.iter().any(|k| k.len() != c) {
                return Err(Error::DimensionMismatch(format!("attention features must have {c} channels")));
            }
            offsets.push(offsets.last().unwrap() + fl.len());
        }
        let n = *offsets.last().unwrap();
        let fp = Array2::from_shape_fn((b, c), |(i, j)| rows[i].0[j]);
        let mut keys = Array2::zeros((n, c));
        for (i, (_, fl)) in rows.iter().enumerate() {
            for (r, key) in fl.iter().enumerate() {
                keys.row_mut(offsets[i] + r).assign(&ArrayView1::from(key.as_slice()));
            }
        }
        let q = fp.dot(&self.wq.t());
        let k = keys.dot(&self.wk.t());
        let v = keys.dot(&self.wv.t());
        let dh = self.head_dim();
        let scale = self.scale();
        let mut weights = Array2::zeros((n, self.heads));
        let mut concat = Array2::zeros((b, c));
        for i in 0..b {
            let (lo, hi) = (offsets[i], offsets[i + 1]);
            if lo == hi {
                continue;
            }
            for h in 0..self.heads {
                let qh = q.slice(s![i, h * dh..(h + 1) * dh]);
                let logits: Vec<T> = (lo..hi).map(|r| qh.dot(&k.slice(s![r, h * dh..(h + 1) * dh])) * scale).collect();
                let m = logits.iter().copied().fold(T::neg_infinity(), T::max);
                let exps: Vec<T> = logits.iter().map(|&l| (l - m).exp()).collect();
                let z: T = exps.iter().copied().sum();
                for (r, e) in (lo..hi).zip(exps) {
                    let a = e / z;
                    weights[[r, h]] = a;
                    let vr = v.slice(s![r, h * dh..(h + 1) * dh]);
                    let mut out = concat.slice_mut(s![i, h * dh..(h + 1) * dh]);
                    out.scaled_add(a, &vr);
                }
            }
        }
        Ok(AttentionCache { fp, keys, offsets, q, k, v, weights, concat })
    }

    /// `F_p + Wo · concat(heads)`; rows without keys reduce to `F_p`.
    pub(crate) fn output(&self, cache: &AttentionCache<T>) -> Array2<T> {
        let mut out = cache.concat.dot(&self.wo.t());
        for (i, mut row) in out.rows_mut().into_iter().enumerate() {
            if cache.offsets[i] == cache.offsets[i + 1] {
                row.assign(&cache.fp.row(i));
            } else {
                row += &cache.fp.row(i);
            }
        }
        out
    }

    /// Parameter gradients given `dL/dF_2D` for every row.
    pub(crate) fn backward(&self, cache: &AttentionCache<T>, d_out: &Array2<T>) -> AttentionGrads<T> {
        let c = self.channels();
        let dh = self.head_dim();
        let scale = self.scale();
        let wo = d_out.t().dot(&cache.concat);
        let d_concat = d_out.dot(&self.wo);
        let mut dq = Array2::zeros(cache.q.raw_dim());
        let mut dk = Array2::<T>::zeros(cache.k.raw_dim());
        let mut dv = Array2::<T>::zeros(cache.v.raw_dim());
        for i in 0..cache.fp.nrows() {
            let (lo, hi) = (cache.offsets[i], cache.offsets[i + 1]);
            for h in 0..self.heads {
                let cols = h * dh..(h + 1) * dh;
                let g = d_concat.slice(s![i, cols.clone()]);
                let da: Vec<T> = (lo..hi).map(|r| g.dot(&cache.v.slice(s![r, cols.clone()]))).collect();
                let mean: T = (lo..hi).zip(&da).map(|(r, &d)| cache.weights[[r, h]] * d).sum();
                for (r, &d) in (lo..hi).zip(&da) {
                    let a = cache.weights[[r, h]];
                    dv.slice_mut(s![r, cols.clone()]).scaled_add(a, &g);
                    let ds = a * (d - mean) * scale;
                    dq.slice_mut(s![i, cols.clone()]).scaled_add(ds, &cache.k.slice(s![r, cols.clone()]));
                    dk.slice_mut(s![r, cols.clone()]).scaled_add(ds, &cache.q.slice(s![i, cols.clone()]));
                }
            }
        }
        debug_assert_eq!(wo.dim(), (c, c));
        AttentionGrads {
            wq: dq.t().dot(&cache.fp),
            wk: dk.t().dot(&cache.keys),
            wv: dv.t().dot(&cache.keys),
            wo,
        }
    }
}

/// `F_2D = F_p + MultiH(F_p, F_l, F_l)`; an empty `F_l` returns `F_p`.
pub fn aggregate_2d<T: Real>(block: &AttentionBlock<T>, f_p: &[T], f_l: &[Vec<T>]) -> Result<Vec<T>> {
    let cache = block.forward_batch(&[(f_p, f_l)])?;
    Ok(block.output(&cache).row(0).to_vec())
}
