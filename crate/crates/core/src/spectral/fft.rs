//! Multi-axis FFTs over hypercubic arrays with `m` points per axis.
//!
//! Plans are cached per thread; scratch buffers are allocated per call, so
//! concurrent transforms on distinct arrays never share mutable state.

use std::cell::RefCell;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan(len: usize, direction: FftDirection) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| p.borrow_mut().plan_fft(len, direction))
}

/// Unnormalized transform along a single axis of an `axes`-dimensional array.
pub(crate) fn transform_axis(
    data: &mut [Complex64],
    m: usize,
    axes: usize,
    axis: usize,
    direction: FftDirection,
) {
    debug_assert!(axis < axes);
    debug_assert_eq!(data.len(), m.pow(axes as u32));
    let fft = plan(m, direction);
    let stride = m.pow((axes - 1 - axis) as u32);
    let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
    if stride == 1 {
        fft.process_with_scratch(data, &mut scratch);
        return;
    }
    let block = m * stride;
    let mut lines = vec![Complex64::default(); block];
    for chunk in data.chunks_exact_mut(block) {
        // chunk is an m x stride matrix; transpose so each line is contiguous
        for i in 0..m {
            for j in 0..stride {
                lines[j * m + i] = chunk[i * stride + j];
            }
        }
        fft.process_with_scratch(&mut lines, &mut scratch);
        for i in 0..m {
            for j in 0..stride {
                chunk[i * stride + j] = lines[j * m + i];
            }
        }
    }
}

/// Unnormalized transform along every axis, with a per-axis direction.
pub(crate) fn transform(
    data: &mut [Complex64],
    m: usize,
    axes: usize,
    direction: impl Fn(usize) -> FftDirection,
) {
    for axis in 0..axes {
        transform_axis(data, m, axes, axis, direction(axis));
    }
}

pub(crate) fn forward(data: &mut [Complex64], m: usize, axes: usize) {
    transform(data, m, axes, |_| FftDirection::Forward);
}

/// Normalized inverse of [`forward`].
pub(crate) fn inverse(data: &mut [Complex64], m: usize, axes: usize) {
    transform(data, m, axes, |_| FftDirection::Inverse);
    let scale = 1.0 / data.len() as f64;
    data.iter_mut().for_each(|v| *v *= scale);
}
