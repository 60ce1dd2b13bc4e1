use alloc::vec::Vec;
use core::f64::consts::{FRAC_1_SQRT_2, PI};
#[allow(unused_imports)]
use crate::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Band {
    /// 250 Hz low-pass.
    Lowpass,
    /// 1000 Hz high-pass.
    Highpass,
}

impl Band {
    pub fn cutoff_hz(self) -> f64 {
        match self {
            Band::Lowpass => 250.0,
            Band::Highpass => 1000.0,
        }
    }
}

/// Second-order Butterworth section designed by the bilinear transform
/// (prewarped cutoff), normalized so `a0 = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Biquad {
    pub b: [f64; 3],
    pub a: [f64; 2],
}

impl Biquad {
    pub fn design(band: Band, rate: f64) -> Self {
        let w0 = 2.0 * PI * band.cutoff_hz() / rate;
        let (sin, cos) = (w0.sin(), w0.cos());
        let alpha = sin / (2.0 * FRAC_1_SQRT_2);
        let a0 = 1.0 + alpha;
        let b = match band {
            Band::Lowpass => [(1.0 - cos) / 2.0, 1.0 - cos, (1.0 - cos) / 2.0],
            Band::Highpass => [(1.0 + cos) / 2.0, -(1.0 + cos), (1.0 + cos) / 2.0],
        };
        Self {
            b: [b[0] / a0, b[1] / a0, b[2] / a0],
            a: [-2.0 * cos / a0, (1.0 - alpha) / a0],
        }
    }

    /// Direct form I from rest.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let (mut x1, mut x2, mut y1, mut y2) = (0.0, 0.0, 0.0, 0.0);
        x.iter()
            .map(|&x0| {
                let y0 = self.b[0] * x0 + self.b[1] * x1 + self.b[2] * x2 - self.a[0] * y1 - self.a[1] * y2;
                x2 = x1;
                x1 = x0;
                y2 = y1;
                y1 = y0;
                y0
            })
            .collect()
    }

    /// |H(e^{jw})| at `freq` Hz.
    pub fn magnitude_at(&self, freq: f64, rate: f64) -> f64 {
        let w = 2.0 * PI * freq / rate;
        let z1 = num_complex::Complex64::new(w.cos(), -w.sin());
        let z2 = z1 * z1;
        let num = z2 * self.b[2] + z1 * self.b[1] + self.b[0];
        let den = z2 * self.a[1] + z1 * self.a[0] + 1.0;
        (num / den).norm()
    }
}
