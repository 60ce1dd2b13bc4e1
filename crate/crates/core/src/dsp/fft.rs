use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
#[allow(unused_imports)]
use crate::prelude::*;

/// Iterative radix-2 FFT. `buf.len()` must be a power of two.
pub fn fft_in_place(buf: &mut [Complex64]) {
    let n = buf.len();
    assert!(n.is_power_of_two(), "fft length {n} is not a power of two");
    if n <= 1 {
        return;
    }
    let bits = n.trailing_zeros();
    for i in 0..n {
        let j = i.reverse_bits() >> (usize::BITS - bits);
        if j > i {
            buf.swap(i, j);
        }
    }
    let mut len = 2;
    while len <= n {
        let theta = -2.0 * PI / len as f64;
        let step = Complex64::new(theta.cos(), theta.sin());
        for chunk in buf.chunks_mut(len) {
            let mut w = Complex64::new(1.0, 0.0);
            let (lo, hi) = chunk.split_at_mut(len / 2);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let t = *b * w;
                *b = *a - t;
                *a += t;
                w *= step;
            }
        }
        len <<= 1;
    }
}

/// Magnitudes of bins `0..=n/2` of the zero-padded `n`-point transform.
pub fn magnitude_spectrum(frame: &[f64], n: usize) -> Vec<f64> {
    let mut buf: Vec<Complex64> = frame
        .iter()
        .take(n)
        .map(|&x| Complex64::new(x, 0.0))
        .collect();
    buf.resize(n, Complex64::new(0.0, 0.0));
    fft_in_place(&mut buf);
    buf[..=n / 2].iter().map(|c| c.norm()).collect()
}
