//! Dense complex 2D fields and the unitary DFT pair linking hologram and replay planes.
//!
//! Layout is row-major: sample `(x, y)` lives at `y * width + x`, where `x` is the
//! column (extent `N_x = width`) and `y` the row (extent `N_y = height`). Replay
//! samples use the same layout with `(u, v)` in place of `(x, y)`. No centre shift
//! is applied; the DC term sits at index `(0, 0)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::{FftDirection, FftPlanner};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct ComplexField {
    width: usize,
    height: usize,
    values: Vec<Complex64>,
}

impl ComplexField {
    pub fn new(width: usize, height: usize, values: Vec<Complex64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidField(format!(
                "dimensions must be at least 1x1, got {width}x{height}"
            )));
        }
        if values.len() != width * height {
            return Err(Error::InvalidField(format!(
                "{} values supplied for a {width}x{height} field",
                values.len()
            )));
        }
        Ok(Self {
            width,
            height,
            values,
        })
    }

    pub fn zeros(width: usize, height: usize) -> Result<Self> {
        Self::new(width, height, vec![Complex64::new(0.0, 0.0); width * height])
    }

    /// Builds a field by evaluating `f(x, y)` at every sample.
    pub fn from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> Complex64,
    ) -> Result<Self> {
        let mut values = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                values.push(f(x, y));
            }
        }
        Self::new(width, height, values)
    }

    /// Real-valued field from a row-major slice.
    pub fn from_real(width: usize, height: usize, values: &[f64]) -> Result<Self> {
        Self::new(
            width,
            height,
            values.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
        )
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn index_of(&self, x: usize, y: usize) -> Result<usize> {
        if x >= self.width || y >= self.height {
            return Err(Error::IndexOutOfBounds {
                x,
                y,
                width: self.width,
                height: self.height,
            });
        }
        Ok(y * self.width + x)
    }

    pub fn get(&self, x: usize, y: usize) -> Result<Complex64> {
        Ok(self.values[self.index_of(x, y)?])
    }

    pub fn set(&mut self, x: usize, y: usize, value: Complex64) -> Result<()> {
        let i = self.index_of(x, y)?;
        self.values[i] = value;
        Ok(())
    }

    /// Moduli of every sample, row-major.
    pub fn magnitudes(&self) -> Vec<f64> {
        self.values.iter().map(|c| c.norm()).collect()
    }

    pub fn same_shape(&self, other: &ComplexField) -> Result<()> {
        if self.width != other.width || self.height != other.height {
            return Err(Error::DimensionMismatch {
                left_width: self.width,
                left_height: self.height,
                right_width: other.width,
                right_height: other.height,
            });
        }
        Ok(())
    }

    /// Largest elementwise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &ComplexField) -> Result<f64> {
        self.same_shape(other)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    pub fn scaled(&self, factor: f64) -> ComplexField {
        ComplexField {
            width: self.width,
            height: self.height,
            values: self.values.iter().map(|c| c * factor).collect(),
        }
    }
}

/// Forward transform with the symmetric `1/sqrt(N_x N_y)` factor and negative exponent.
pub fn dft(field: &ComplexField) -> Result<ComplexField> {
    transform(field, FftDirection::Forward)
}

/// Inverse transform with the symmetric `1/sqrt(N_x N_y)` factor and positive exponent.
pub fn idft(field: &ComplexField) -> Result<ComplexField> {
    transform(field, FftDirection::Inverse)
}

fn transform(field: &ComplexField, direction: FftDirection) -> Result<ComplexField> {
    let (width, height) = (field.width, field.height);
    if width == 0 || height == 0 {
        return Err(Error::InvalidField("empty field".into()));
    }
    let mut planner = FftPlanner::<f64>::new();
    let mut data = field.values.clone();

    let row_fft = planner.plan_fft(width, direction);
    row_fft.process(&mut data);

    let col_fft = planner.plan_fft(height, direction);
    let mut column = vec![Complex64::new(0.0, 0.0); height];
    for x in 0..width {
        for (y, c) in column.iter_mut().enumerate() {
            *c = data[y * width + x];
        }
        col_fft.process(&mut column);
        for (y, c) in column.iter().enumerate() {
            data[y * width + x] = *c;
        }
    }

    let scale = 1.0 / ((width * height) as f64).sqrt();
    for c in &mut data {
        *c *= scale;
    }
    ComplexField::new(width, height, data)
}

/// Sum of squared moduli.
pub fn total_power(field: &ComplexField) -> f64 {
    field.values.iter().map(|c| c.norm_sqr()).sum()
}

/// Precomputed roots of unity for evaluating the forward-transform kernel of a single
/// hologram pixel at any replay sample.
#[derive(Debug, Clone)]
pub struct Twiddles {
    width: usize,
    height: usize,
    row: Vec<Complex64>,
    col: Vec<Complex64>,
    scale: f64,
}

impl Twiddles {
    pub fn new(width: usize, height: usize) -> Self {
        let root = |n: usize| -> Vec<Complex64> {
            (0..n)
                .map(|k| Complex64::from_polar(1.0, -2.0 * PI * k as f64 / n as f64))
                .collect()
        };
        Self {
            width,
            height,
            row: root(width),
            col: root(height),
            scale: 1.0 / ((width * height) as f64).sqrt(),
        }
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Fills `out` (row-major over replay samples) with the contribution of a unit
    /// change at hologram pixel `(x, y)`:
    /// `(1/sqrt(N)) e^{-2 pi i (u x / N_x + v y / N_y)}`.
    pub fn pixel_kernel(&self, x: usize, y: usize, out: &mut [Complex64]) {
        debug_assert_eq!(out.len(), self.width * self.height);
        let mut row_phase = Vec::with_capacity(self.width);
        for u in 0..self.width {
            row_phase.push(self.row[(u * x) % self.width] * self.scale);
        }
        for v in 0..self.height {
            let cv = self.col[(v * y) % self.height];
            let dst = &mut out[v * self.width..(v + 1) * self.width];
            for (d, r) in dst.iter_mut().zip(&row_phase) {
                *d = r * cv;
            }
        }
    }
}

/// Replay field after incrementing hologram pixel `(x, y)` by `delta`.
pub fn apply_pixel_delta(
    replay: &ComplexField,
    x: usize,
    y: usize,
    delta: Complex64,
) -> Result<ComplexField> {
    let mut out = replay.clone();
    let twiddles = Twiddles::new(replay.width, replay.height);
    apply_pixel_delta_in_place(&mut out, &twiddles, x, y, delta)?;
    Ok(out)
}

pub(crate) fn apply_pixel_delta_in_place(
    replay: &mut ComplexField,
    twiddles: &Twiddles,
    x: usize,
    y: usize,
    delta: Complex64,
) -> Result<()> {
    replay.index_of(x, y)?;
    if delta == Complex64::new(0.0, 0.0) {
        return Ok(());
    }
    let (width, height) = (replay.width, replay.height);
    let scaled = delta * twiddles.scale;
    let row_phase: Vec<Complex64> = (0..width)
        .map(|u| twiddles.row[(u * x) % width] * scaled)
        .collect();
    for v in 0..height {
        let cv = twiddles.col[(v * y) % height];
        let dst = &mut replay.values[v * width..(v + 1) * width];
        for (d, r) in dst.iter_mut().zip(&row_phase) {
            *d += r * cv;
        }
    }
    Ok(())
}
