use super::network::{NetConfig, RayInput};
use crate::linalg::Vec3;
use crate::sampling::{Ray, RayRng};

pub(crate) fn random_input(cfg: &NetConfig, keys: usize, rng: &mut RayRng) -> RayInput<f64> {
    let mut v = |n: usize| (0..n).map(|_| rng.uniform_range(-1.0, 1.0)).collect::<Vec<f64>>();
    let o = v(3);
    let d = v(3);
    RayInput {
        ray: Ray::normalized(Vec3::new(o[0], o[1], o[2]), Vec3::new(d[0], d[1], d[2])).unwrap(),
        f_p: v(cfg.channels),
        f_l: (0..keys).map(|_| v(cfg.channels)).collect(),
        f_global: v(cfg.global_len()),
        f_local: v(cfg.local_len()),
    }
}
