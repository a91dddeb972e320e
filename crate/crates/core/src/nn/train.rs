use ndarray::Array2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::adam::AdamState;
use super::loss::{loss_with_grads, LossBreakdown, Target};
use super::network::{DdfNetwork, NetConfig, Prediction, RayInput};
use crate::error::{invalid, Result};
use crate::sampling::{streams, RayRng};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub width: usize,
    /// Positional-encoding bands for the origin and the direction.
    pub pe_bands: [usize; 2],
    pub heads: usize,
    pub k_l: usize,
    pub k_3d: usize,
    pub lambda1: f64,
    pub lambda2: f64,
    pub lr: f64,
    pub epochs: usize,
    pub batch: usize,
    pub seed: u64,
    /// Shards per step. Results depend on this count but are deterministic for a fixed value.
    pub threads: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            width: 128,
            pe_bands: [6, 4],
            heads: 2,
            k_l: 8,
            k_3d: 8,
            lambda1: 5.0,
            lambda2: 0.5,
            lr: 1e-4,
            epochs: 100,
            batch: 512,
            seed: 0,
            threads: 1,
        }
    }
}

impl TrainConfig {
    pub fn net_config(&self, channels: usize) -> NetConfig {
        NetConfig {
            width: self.width,
            pe_bands_origin: self.pe_bands[0],
            pe_bands_dir: self.pe_bands[1],
            heads: self.heads,
            channels,
            k_3d: self.k_3d,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingExample<T> {
    pub input: RayInput<T>,
    pub target: Target<T>,
}

/// Two rays whose predicted depths should agree.
#[derive(Debug, Clone, PartialEq)]
pub struct PairExample<T> {
    pub a: RayInput<T>,
    pub b: RayInput<T>,
}

/// Loss terms averaged over the steps of one epoch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochLog {
    pub epoch: usize,
    pub l_depth: f64,
    pub l_vis: f64,
    pub l_sym: f64,
    pub total: f64,
}

/// Runs the forward pass over `rows` split into `shards` contiguous pieces and returns the
/// predictions plus a closure-free handle for the backward pass.
struct Sharded<'a, T: Real> {
    net: &'a DdfNetwork<T>,
    shards: usize,
    pool: Option<&'a rayon::ThreadPool>,
}

impl<T: Real> Sharded<'_, T> {
    fn chunk(&self, n: usize) -> usize {
        n.div_ceil(self.shards).max(1)
    }

    fn map<R: Send>(&self, n: usize, f: impl Fn(std::ops::Range<usize>) -> R + Sync + Send) -> Vec<R> {
        let size = self.chunk(n);
        let ranges: Vec<_> = (0..n).step_by(size).map(|lo| lo..(lo + size).min(n)).collect();
        match self.pool {
            Some(pool) if ranges.len() > 1 => pool.install(|| ranges.into_par_iter().map(&f).collect()),
            _ => ranges.into_iter().map(f).collect(),
        }
    }

    fn predict(&self, rows: &[&RayInput<T>]) -> Result<Vec<Prediction<T>>> {
        let parts = self.map(rows.len(), |r| self.net.forward_batch(&rows[r]));
        Ok(parts.into_iter().collect::<Result<Vec<_>>>()?.concat())
    }

    /// Forward, loss, backward. Shard gradients are summed in shard order.
    fn step(
        &self,
        rows: &[&RayInput<T>],
        targets: &[Target<T>],
        pair_count: usize,
        lambda1: f64,
        lambda2: f64,
    ) -> Result<(LossBreakdown, Vec<Array2<T>>)> {
        let caches = self.map(rows.len(), |r| self.net.forward_cached(&rows[r]));
        let caches = caches.into_iter().collect::<Result<Vec<_>>>()?;
        let preds: Vec<Prediction<T>> = caches.iter().flat_map(|c| c.predictions()).collect();
        let nb = targets.len();
        let pairs: Vec<(T, T)> = (0..pair_count).map(|i| (preds[nb + i].depth, preds[nb + pair_count + i].depth)).collect();
        let (breakdown, g) = loss_with_grads(&preds[..nb], targets, &pairs, lambda1, lambda2)?;
        let mut d_logit = g.d_logit;
        let mut d_depth = g.d_depth;
        d_logit.resize(rows.len(), T::zero());
        d_depth.extend(g.d_pairs.iter().map(|p| p.0));
        d_depth.extend(g.d_pairs.iter().map(|p| p.1));
        let size = self.chunk(rows.len());
        let work: Vec<_> = caches.iter().enumerate().collect();
        let backward = |(i, cache): &(usize, &super::network::ForwardCache<T>)| {
            let lo = i * size;
            let hi = lo + cache.logit.nrows();
            self.net.backward(cache, &d_logit[lo..hi], &d_depth[lo..hi])
        };
        let parts: Vec<Vec<Array2<T>>> = match self.pool {
            Some(pool) if work.len() > 1 => pool.install(|| work.par_iter().map(backward).collect()),
            _ => work.iter().map(backward).collect(),
        };
        let mut parts = parts.into_iter();
        let mut total = parts.next().expect("at least one shard");
        for part in parts {
            for (t, p) in total.iter_mut().zip(part) {
                *t += &p;
            }
        }
        Ok((breakdown, total))
    }
}

/// Trains in place with Adam. Each epoch reshuffles the examples (and, separately, the pairs)
/// and walks them in batches of `cfg.batch`; the pairs are spread evenly over the batches.
/// With `lambda2 = 0` the pairs are only evaluated for the log and never enter the gradient.
pub fn train<T: Real>(
    net: &mut DdfNetwork<T>,
    data: &[TrainingExample<T>],
    pairs: &[PairExample<T>],
    cfg: &TrainConfig,
    mut on_epoch: impl FnMut(&EpochLog),
) -> Result<Vec<EpochLog>> {
    if data.is_empty() {
        return Err(invalid("training set is empty"));
    }
    if cfg.batch == 0 || cfg.threads == 0 {
        return Err(invalid("batch size and thread count must be positive"));
    }
    let pool = if cfg.threads > 1 {
        Some(rayon::ThreadPoolBuilder::new().num_threads(cfg.threads).build().map_err(|e| invalid(e.to_string()))?)
    } else {
        None
    };
    let mut adam = AdamState::new(&net.params(), cfg.lr);
    let mut shuffle = RayRng::new(cfg.seed, streams::SHUFFLE);
    let mut pair_shuffle = RayRng::new(cfg.seed, streams::PAIR_SHUFFLE);
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut pair_order: Vec<usize> = (0..pairs.len()).collect();
    let steps = data.len().div_ceil(cfg.batch);
    let per_step = pairs.len().div_ceil(steps);
    let mut log = Vec::with_capacity(cfg.epochs);

    for epoch in 0..cfg.epochs {
        shuffle.shuffle(&mut order);
        pair_shuffle.shuffle(&mut pair_order);
        let mut sums = [0.0f64; 3];
        for step in 0..steps {
            let batch = &order[step * cfg.batch..((step + 1) * cfg.batch).min(data.len())];
            let lo = (step * per_step).min(pairs.len());
            let step_pairs = &pair_order[lo..(lo + per_step).min(pairs.len())];
            let targets: Vec<Target<T>> = batch.iter().map(|&i| data[i].target).collect();
            let mut rows: Vec<&RayInput<T>> = batch.iter().map(|&i| &data[i].input).collect();
            let train_pairs = cfg.lambda2 != 0.0 && !step_pairs.is_empty();
            if train_pairs {
                rows.extend(step_pairs.iter().map(|&i| &pairs[i].a));
                rows.extend(step_pairs.iter().map(|&i| &pairs[i].b));
            }
            let sharded = Sharded { net, shards: cfg.threads, pool: pool.as_ref() };
            let (mut breakdown, grads) =
                sharded.step(&rows, &targets, if train_pairs { step_pairs.len() } else { 0 }, cfg.lambda1, cfg.lambda2)?;
            if !train_pairs && !step_pairs.is_empty() {
                let a: Vec<_> = step_pairs.iter().map(|&i| &pairs[i].a).collect();
                let b: Vec<_> = step_pairs.iter().map(|&i| &pairs[i].b).collect();
                let (pa, pb) = (sharded.predict(&a)?, sharded.predict(&b)?);
                let sum: f64 = pa.iter().zip(&pb).map(|(x, y)| (x.depth - y.depth).abs().to_f64_lossy()).sum();
                breakdown.l_sym = sum / step_pairs.len() as f64;
            }
            sums[0] += breakdown.l_depth;
            sums[1] += breakdown.l_vis;
            sums[2] += breakdown.l_sym;
            adam.update(net.params_mut(), &grads)?;
        }
        let s = steps as f64;
        let b = LossBreakdown::new(sums[0] / s, sums[1] / s, sums[2] / s, cfg.lambda1, cfg.lambda2);
        let entry = EpochLog { epoch, l_depth: b.l_depth, l_vis: b.l_vis, l_sym: b.l_sym, total: b.total };
        on_epoch(&entry);
        log.push(entry);
    }
    Ok(log)
}
