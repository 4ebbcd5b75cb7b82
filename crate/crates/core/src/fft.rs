//! Thin wrappers over `rustfft`. Each call owns its planner and scratch, so
//! every function here is reentrant.

use num_complex::Complex64;
use rustfft::FftPlanner;

pub(crate) struct Fft {
    planner: FftPlanner<f64>,
}

impl Fft {
    pub fn new() -> Self {
        Fft {
            planner: FftPlanner::new(),
        }
    }

    /// Unnormalized forward DFT, in place.
    pub fn forward(&mut self, buf: &mut [Complex64]) {
        if buf.len() > 1 {
            self.planner.plan_fft_forward(buf.len()).process(buf);
        }
    }

    /// Inverse DFT with the `1/N` factor applied, in place.
    pub fn inverse(&mut self, buf: &mut [Complex64]) {
        let n = buf.len();
        if n > 1 {
            self.planner.plan_fft_inverse(n).process(buf);
        }
        let scale = 1.0 / n as f64;
        buf.iter_mut().for_each(|z| *z *= scale);
    }
}

pub(crate) fn real_to_complex(x: &[f64]) -> Vec<Complex64> {
    x.iter().map(|&v| Complex64::new(v, 0.0)).collect()
}

/// Analytic signal `x + i·H{x}` via the one-sided spectrum: DC (and Nyquist
/// for even lengths) kept, positive frequencies doubled, negative zeroed.
pub(crate) fn analytic_signal(x: &[f64]) -> Vec<Complex64> {
    let n = x.len();
    let mut fft = Fft::new();
    let mut spec = real_to_complex(x);
    fft.forward(&mut spec);
    for (k, z) in spec.iter_mut().enumerate() {
        let gain = if k == 0 || (n % 2 == 0 && k == n / 2) {
            1.0
        } else if k < n.div_ceil(2) {
            2.0
        } else {
            0.0
        };
        *z *= gain;
    }
    fft.inverse(&mut spec);
    spec
}
