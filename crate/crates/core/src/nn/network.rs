use ndarray::{s, Array2, Axis};
use serde::{Deserialize, Serialize};

use super::attention::{AttentionBlock, AttentionCache};
use super::encoding::{encode_into, encoded_len};
use super::loss::{sigmoid, softplus};
use crate::error::{invalid, Error, Result};
use crate::hand::{GlobalHandEmbedding, JOINT_COUNT};
use crate::sampling::{streams, Ray, RayRng};
use crate::scalar::Real;

/// Hidden ReLU layers before the distance head; the visibility head reads layer 3 and the ray
/// encoding re-enters at layer 4.
const HIDDEN_LAYERS: usize = 7;
const VIS_LAYER: usize = 3;
const SKIP_LAYER: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetConfig {
    pub width: usize,
    pub pe_bands_origin: usize,
    pub pe_bands_dir: usize,
    pub heads: usize,
    /// Total pyramid channels `C_total`.
    pub channels: usize,
    pub k_3d: usize,
}

impl Default for NetConfig {
    fn default() -> Self {
        Self { width: 128, pe_bands_origin: 6, pe_bands_dir: 4, heads: 2, channels: 20, k_3d: 8 }
    }
}

impl NetConfig {
    pub fn ray_encoding_len(&self) -> usize {
        encoded_len(3, self.pe_bands_origin) + encoded_len(3, self.pe_bands_dir)
    }

    pub fn global_len(&self) -> usize {
        GlobalHandEmbedding::<f64>::DIM
    }

    pub fn local_len(&self) -> usize {
        3 * self.k_3d
    }

    pub fn input_len(&self) -> usize {
        self.ray_encoding_len() + self.channels + self.global_len() + self.local_len()
    }

    fn validate(&self) -> Result<()> {
        if self.width == 0 || self.channels == 0 || self.heads == 0 || self.channels % self.heads != 0 {
            return Err(invalid("width and channels must be positive, channels divisible by heads"));
        }
        if self.k_3d == 0 || self.k_3d > JOINT_COUNT {
            return Err(invalid(format!("K_3D must be in 1..={JOINT_COUNT}")));
        }
        Ok(())
    }
}

/// Everything the network reads for one ray, already in the wrist frame.
#[derive(Debug, Clone, PartialEq)]
pub struct RayInput<T> {
    pub ray: Ray<T>,
    pub f_p: Vec<T>,
    pub f_l: Vec<Vec<T>>,
    pub f_global: Vec<T>,
    pub f_local: Vec<T>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction<T> {
    pub xi_logit: T,
    pub depth: T,
}

impl<T: Real> Prediction<T> {
    pub fn visibility(&self) -> T {
        sigmoid(self.xi_logit)
    }
}

/// `y = x·Wᵀ + b` with `W` of shape `(out, in)` and `b` of shape `(1, out)`.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Linear<T> {
    pub w: Array2<T>,
    pub b: Array2<T>,
}

impl<T: Real> Linear<T> {
    fn new(fan_in: usize, fan_out: usize, gain: f64, rng: &mut RayRng) -> Self {
        let bound = (gain / fan_in as f64).sqrt();
        Self {
            w: Array2::from_shape_simple_fn((fan_out, fan_in), || T::lit(rng.uniform_range(-bound, bound))),
            b: Array2::zeros((1, fan_out)),
        }
    }

    fn apply(&self, x: &Array2<T>) -> Array2<T> {
        x.dot(&self.w.t()) + &self.b
    }
}

/// The conditional DDF network, including the 2D attention block.
#[derive(Debug, Clone, PartialEq)]
pub struct DdfNetwork<T> {
    config: NetConfig,
    pub(crate) attention: AttentionBlock<T>,
    pub(crate) hidden: Vec<Linear<T>>,
    pub(crate) vis_head: Linear<T>,
    pub(crate) dist_head: Linear<T>,
}

pub(crate) struct ForwardCache<T> {
    attention: AttentionCache<T>,
    enc: Array2<T>,
    x0: Array2<T>,
    pre: Vec<Array2<T>>,
    act: Vec<Array2<T>>,
    pub logit: Array2<T>,
    pub dist_pre: Array2<T>,
}

impl<T: Real> ForwardCache<T> {
    pub fn predictions(&self) -> Vec<Prediction<T>> {
        self.logit
            .iter()
            .zip(self.dist_pre.iter())
            .map(|(&l, &d)| Prediction { xi_logit: l, depth: softplus(d) })
            .collect()
    }

    /// Sign pattern of every piecewise-linear switch in the pass.
    pub fn relu_pattern(&self) -> Vec<bool> {
        self.pre.iter().flat_map(|z| z.iter().map(|&v| v > T::zero())).collect()
    }
}

impl<T: Real> DdfNetwork<T> {
    /// Seeded initialization: attention first, then layers 1–7 with `√(6/fan_in)`, then the
    /// visibility and distance heads with `√(3/fan_in)`. Biases start at zero.
    pub fn new(config: NetConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        let mut rng = RayRng::new(seed, streams::INIT);
        let attention = AttentionBlock::new(config.channels, config.heads, &mut rng)?;
        let w = config.width;
        let hidden = (1..=HIDDEN_LAYERS)
            .map(|l| {
                let fan_in = match l {
                    1 => config.input_len(),
                    SKIP_LAYER => w + config.ray_encoding_len(),
                    _ => w,
                };
                Linear::new(fan_in, w, 6.0, &mut rng)
            })
            .collect();
        let vis_head = Linear::new(w, 1, 3.0, &mut rng);
        let dist_head = Linear::new(w, 1, 3.0, &mut rng);
        Ok(Self { config, attention, hidden, vis_head, dist_head })
    }

    pub fn config(&self) -> &NetConfig {
        &self.config
    }

    pub fn param_names(&self) -> Vec<String> {
        let mut names: Vec<String> = ["attn.wq", "attn.wk", "attn.wv", "attn.wo"].iter().map(|s| s.to_string()).collect();
        for l in 1..=HIDDEN_LAYERS {
            names.push(format!("l{l}.w"));
            names.push(format!("l{l}.b"));
        }
        names.extend(["vis.w", "vis.b", "l8.w", "l8.b"].iter().map(|s| s.to_string()));
        names
    }

    pub fn params(&self) -> Vec<&Array2<T>> {
        let a = &self.attention;
        let mut p = vec![&a.wq, &a.wk, &a.wv, &a.wo];
        for l in &self.hidden {
            p.push(&l.w);
            p.push(&l.b);
        }
        p.extend([&self.vis_head.w, &self.vis_head.b, &self.dist_head.w, &self.dist_head.b]);
        p
    }

    pub fn params_mut(&mut self) -> Vec<&mut Array2<T>> {
        let a = &mut self.attention;
        let mut p = vec![&mut a.wq, &mut a.wk, &mut a.wv, &mut a.wo];
        for l in &mut self.hidden {
            p.push(&mut l.w);
            p.push(&mut l.b);
        }
        p.extend([&mut self.vis_head.w, &mut self.vis_head.b, &mut self.dist_head.w, &mut self.dist_head.b]);
        p
    }

    pub fn param_count(&self) -> usize {
        self.params().iter().map(|p| p.len()).sum()
    }

    /// Rebuilds a network from named parameter blocks in [`Self::param_names`] order.
    pub fn from_params(config: NetConfig, params: Vec<Array2<T>>) -> Result<Self> {
        let mut net = Self::new(config, 0)?;
        if params.len() != net.params().len() {
            return Err(Error::DimensionMismatch(format!("expected {} parameter blocks, got {}", net.params().len(), params.len())));
        }
        for (slot, p) in net.params_mut().into_iter().zip(params) {
            if slot.dim() != p.dim() {
                return Err(Error::DimensionMismatch(format!("parameter shape {:?} does not match {:?}", p.dim(), slot.dim())));
            }
            if p.iter().any(|v| !v.is_finite()) {
                return Err(invalid("parameters must be finite"));
            }
            *slot = p;
        }
        Ok(net)
    }

    pub fn cast<U: Real>(&self) -> DdfNetwork<U> {
        let params = self.params().into_iter().map(|p| p.mapv(crate::scalar::cast)).collect();
        DdfNetwork::from_params(self.config, params).expect("same config")
    }

    fn check_input(&self, x: &RayInput<T>) -> Result<()> {
        let c = &self.config;
        if x.f_p.len() != c.channels || x.f_l.iter().any(|k| k.len() != c.channels) {
            return Err(Error::DimensionMismatch(format!("2D features must have {} channels", c.channels)));
        }
        if x.f_global.len() != c.global_len() || x.f_local.len() != c.local_len() {
            return Err(Error::DimensionMismatch(format!(
                "hand features must have {} global and {} local values",
                c.global_len(),
                c.local_len()
            )));
        }
        let finite = |v: &[T]| v.iter().all(|x| x.is_finite());
        if !finite(&x.f_p) || !finite(&x.f_global) || !finite(&x.f_local) || !x.f_l.iter().all(|k| finite(k)) {
            return Err(invalid("non-finite network input"));
        }
        Ok(())
    }

    pub fn forward(&self, input: &RayInput<T>) -> Result<Prediction<T>> {
        Ok(self.forward_batch(&[input])?[0])
    }

    pub fn forward_batch(&self, inputs: &[&RayInput<T>]) -> Result<Vec<Prediction<T>>> {
        Ok(self.forward_cached(inputs)?.predictions())
    }

    pub(crate) fn forward_cached(&self, inputs: &[&RayInput<T>]) -> Result<ForwardCache<T>> {
        for x in inputs {
            self.check_input(x)?;
        }
        let c = &self.config;
        let b = inputs.len();
        let rows: Vec<(&[T], &[Vec<T>])> = inputs.iter().map(|x| (x.f_p.as_slice(), x.f_l.as_slice())).collect();
        let attention = self.attention.forward_batch(&rows)?;
        let f2d = self.attention.output(&attention);

        let enc_len = c.ray_encoding_len();
        let mut enc_data = Vec::with_capacity(b * enc_len);
        for x in inputs {
            encode_into(&x.ray.origin.to_array(), c.pe_bands_origin, &mut enc_data);
            encode_into(&x.ray.direction.to_array(), c.pe_bands_dir, &mut enc_data);
        }
        let enc = Array2::from_shape_vec((b, enc_len), enc_data).expect("encoding length");
        let mut x0 = Array2::zeros((b, c.input_len()));
        for (i, x) in inputs.iter().enumerate() {
            let mut row = x0.row_mut(i);
            let mut o = 0;
            row.slice_mut(s![o..o + enc_len]).assign(&enc.row(i));
            o += enc_len;
            row.slice_mut(s![o..o + c.channels]).assign(&f2d.row(i));
            o += c.channels;
            for (dst, &v) in row.slice_mut(s![o..]).iter_mut().zip(x.f_global.iter().chain(&x.f_local)) {
                *dst = v;
            }
        }

        let mut pre = Vec::with_capacity(HIDDEN_LAYERS);
        let mut act: Vec<Array2<T>> = Vec::with_capacity(HIDDEN_LAYERS);
        let mut logit = None;
        for (l, layer) in self.hidden.iter().enumerate() {
            let z = match l + 1 {
                1 => layer.apply(&x0),
                SKIP_LAYER => layer.apply(&ndarray::concatenate![Axis(1), act[l - 1], enc]),
                _ => layer.apply(&act[l - 1]),
            };
            let h = z.mapv(|v| v.max(T::zero()));
            pre.push(z);
            act.push(h);
            if l + 1 == VIS_LAYER {
                logit = Some(self.vis_head.apply(&act[l]));
            }
        }
        let dist_pre = self.dist_head.apply(&act[HIDDEN_LAYERS - 1]);
        Ok(ForwardCache { attention, enc, x0, pre, act, logit: logit.expect("visibility layer"), dist_pre })
    }

    /// Reverse pass given `dL/d(logit)` and `dL/d(D̂)` per row; returns gradients in
    /// [`Self::params`] order.
    pub(crate) fn backward(&self, cache: &ForwardCache<T>, d_logit: &[T], d_depth: &[T]) -> Vec<Array2<T>> {
        let b = cache.x0.nrows();
        let w = self.config.width;
        let g_logit = Array2::from_shape_vec((b, 1), d_logit.to_vec()).expect("one per row");
        let g_dist = Array2::from_shape_fn((b, 1), |(i, _)| d_depth[i] * sigmoid(cache.dist_pre[[i, 0]]));

        let linear_grads = |g: &Array2<T>, input: &Array2<T>| (g.t().dot(input), g.sum_axis(Axis(0)).insert_axis(Axis(0)));
        let (dist_w, dist_b) = linear_grads(&g_dist, &cache.act[HIDDEN_LAYERS - 1]);
        let (vis_w, vis_b) = linear_grads(&g_logit, &cache.act[VIS_LAYER - 1]);

        let mut hidden_grads = vec![(Array2::zeros((0, 0)), Array2::zeros((0, 0))); HIDDEN_LAYERS];
        let mut g_act = g_dist.dot(&self.dist_head.w);
        let mut g_x0 = None;
        for l in (0..HIDDEN_LAYERS).rev() {
            if l + 1 == VIS_LAYER {
                g_act = g_act + g_logit.dot(&self.vis_head.w);
            }
            let mut g_z = g_act;
            g_z.zip_mut_with(&cache.pre[l], |g, &z| {
                if z <= T::zero() {
                    *g = T::zero();
                }
            });
            let layer = &self.hidden[l];
            let g_in = g_z.dot(&layer.w);
            hidden_grads[l] = match l + 1 {
                1 => linear_grads(&g_z, &cache.x0),
                SKIP_LAYER => linear_grads(&g_z, &ndarray::concatenate![Axis(1), cache.act[l - 1], cache.enc]),
                _ => linear_grads(&g_z, &cache.act[l - 1]),
            };
            g_act = match l + 1 {
                1 => {
                    g_x0 = Some(g_in);
                    Array2::zeros((0, 0))
                }
                SKIP_LAYER => g_in.slice(s![.., ..w]).to_owned(),
                _ => g_in,
            };
        }
        let enc_len = self.config.ray_encoding_len();
        let g_f2d = g_x0.expect("layer 1").slice(s![.., enc_len..enc_len + self.config.channels]).to_owned();
        let attn = self.attention.backward(&cache.attention, &g_f2d);

        let mut grads = vec![attn.wq, attn.wk, attn.wv, attn.wo];
        for (gw, gb) in hidden_grads {
            grads.push(gw);
            grads.push(gb);
        }
        grads.extend([vis_w, vis_b, dist_w, dist_b]);
        grads.into_iter().map(|g| if g.is_standard_layout() { g } else { g.as_standard_layout().into_owned() }).collect()
    }
}
