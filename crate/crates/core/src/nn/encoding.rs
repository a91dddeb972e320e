use crate::scalar::Real;

/// Length of [`positional_encode`] output for a `d`-dimensional input.
pub const fn encoded_len(d: usize, bands: usize) -> usize {
    d * (2 * bands + 1)
}

/// `[x, sin(2⁰πx), cos(2⁰πx), …, sin(2^{L−1}πx), cos(2^{L−1}πx)]`, laid out as the raw vector
/// followed by one (sin, cos) block per band; each block holds all components.
pub fn positional_encode<T: Real>(x: &[T], bands: usize) -> Vec<T> {
    let mut out = Vec::with_capacity(encoded_len(x.len(), bands));
    encode_into(x, bands, &mut out);
    out
}

pub(crate) fn encode_into<T: Real>(x: &[T], bands: usize, out: &mut Vec<T>) {
    out.extend_from_slice(x);
    let mut freq = T::PI();
    for _ in 0..bands {
        for &v in x {
            let (s, c) = (freq * v).sin_cos();
            out.push(s);
            out.push(c);
        }
        freq = freq + freq;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_input() {
        let e = positional_encode(&[0.0f64], 3);
        assert_eq!(e, vec![0.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0]);
    }

    #[test]
    fn zero_bands_is_identity() {
        assert_eq!(positional_encode(&[0.3f64, -2.0, 7.0], 0), vec![0.3, -2.0, 7.0]);
    }

    #[test]
    fn half_one_band() {
        let e = positional_encode(&[0.5f64], 1);
        assert_eq!(e[0], 0.5);
        assert!((e[1] - 1.0).abs() < 1e-15 && e[2].abs() < 1e-15);
        assert_eq!(encoded_len(3, 6), 39);
        assert_eq!(encoded_len(3, 4), 27);
    }
}
