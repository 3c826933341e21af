//! Target replay fields: grayscale image I/O, 180 degree symmetrization, random phase
//! profiles, and the initial constrained hologram.

use std::f64::consts::PI;
use std::fs;
use std::io::Write;
use std::path::Path;

use image::{ColorType, ImageReader};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::field::{idft, total_power, ComplexField};
use crate::modulation::{quantize_field, ModulationKind, ModulationScheme};

/// Dense real matrix, row-major, `height` rows of `width` columns.
#[derive(Debug, Clone, PartialEq)]
pub struct RealGrid {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl RealGrid {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 || data.len() != width * height {
            return Err(Error::InvalidField(format!(
                "{} values for a {width}x{height} grid",
                data.len()
            )));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, value: f64) {
        self.data[y * self.width + x] = value;
    }

    pub fn mean(&self) -> f64 {
        self.data.iter().sum::<f64>() / self.data.len() as f64
    }

    /// Centre crop to `width x height`.
    pub fn center_crop(&self, width: usize, height: usize) -> Result<RealGrid> {
        if width == 0 || height == 0 || width > self.width || height > self.height {
            return Err(Error::InvalidField(format!(
                "cannot crop {}x{} to {width}x{height}",
                self.width, self.height
            )));
        }
        let x0 = (self.width - width) / 2;
        let y0 = (self.height - height) / 2;
        let mut data = Vec::with_capacity(width * height);
        for y in y0..y0 + height {
            data.extend_from_slice(&self.data[y * self.width + x0..y * self.width + x0 + width]);
        }
        RealGrid::new(width, height, data)
    }

    /// Centre crop dropping at most one row and one column so both extents are even.
    pub fn crop_to_even(&self) -> Result<RealGrid> {
        let w = if self.width > 1 { self.width & !1 } else { 1 };
        let h = if self.height > 1 { self.height & !1 } else { 1 };
        self.center_crop(w, h)
    }
}

/// Loads an 8-bit grayscale PGM or PNG, scaled to `[0, 1]` by dividing by 255.
pub fn load_grayscale(path: impl AsRef<Path>) -> Result<RealGrid> {
    let path = path.as_ref();
    if !path.is_file() {
        return Err(Error::MissingFile(path.to_path_buf()));
    }
    let unsupported = |reason: String| Error::UnsupportedFormat {
        path: path.to_path_buf(),
        reason,
    };
    let reader = ImageReader::open(path)?
        .with_guessed_format()
        .map_err(|e| unsupported(e.to_string()))?;
    match reader.format() {
        Some(image::ImageFormat::Png) | Some(image::ImageFormat::Pnm) => {}
        Some(other) => return Err(unsupported(format!("{other:?} is not PGM or PNG"))),
        None => return Err(unsupported("unrecognised image data".into())),
    }
    let img = reader.decode().map_err(|e| unsupported(e.to_string()))?;
    if img.color() != ColorType::L8 {
        return Err(Error::NotGrayscale {
            path: path.to_path_buf(),
            found: format!("{:?}", img.color()),
        });
    }
    let (width, height) = (img.width() as usize, img.height() as usize);
    let data = img
        .into_luma8()
        .into_raw()
        .into_iter()
        .map(|b| b as f64 / 255.0)
        .collect();
    RealGrid::new(width, height, data)
}

/// Encodes a grid as binary PGM (P5, maxval 255). Values are clamped to `[0, 1]`,
/// scaled by 255 and rounded half-up.
pub fn encode_pgm(grid: &RealGrid) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", grid.width, grid.height).into_bytes();
    out.extend(
        grid.data
            .iter()
            .map(|&v| (v.clamp(0.0, 1.0) * 255.0 + 0.5).floor() as u8),
    );
    out
}

pub fn write_pgm(path: impl AsRef<Path>, grid: &RealGrid) -> Result<()> {
    let mut file = fs::File::create(path)?;
    file.write_all(&encode_pgm(grid))?;
    Ok(())
}

/// Averages each sample with its image under `(u, v) -> (-u, -v) mod N`.
pub fn symmetrize_180(magnitudes: &RealGrid) -> RealGrid {
    let (w, h) = (magnitudes.width, magnitudes.height);
    let mut data = Vec::with_capacity(w * h);
    for y in 0..h {
        let ym = (h - y) % h;
        for x in 0..w {
            let xm = (w - x) % w;
            data.push((magnitudes.get(x, y) + magnitudes.get(xm, ym)) / 2.0);
        }
    }
    RealGrid {
        width: w,
        height: h,
        data,
    }
}

/// `true` when the grid equals its 180 degree mod-index rotation exactly.
pub fn is_symmetric_180(grid: &RealGrid) -> bool {
    let (w, h) = (grid.width, grid.height);
    (0..h).all(|y| (0..w).all(|x| grid.get(x, y) == grid.get((w - x) % w, (h - y) % h)))
}

/// I.i.d. uniform phases on `[-pi, pi)` drawn from ChaCha8 seeded with
/// `seed_from_u64(seed)`, row-major.
pub fn random_phase(width: usize, height: usize, seed: u64) -> Result<RealGrid> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data = (0..width * height).map(|_| rng.gen_range(-PI..PI)).collect();
    RealGrid::new(width, height, data)
}

/// `T = magnitudes * e^{i phases}`.
pub fn build_target(magnitudes: &RealGrid, phases: &RealGrid) -> Result<ComplexField> {
    if magnitudes.width != phases.width || magnitudes.height != phases.height {
        return Err(Error::DimensionMismatch {
            left_width: magnitudes.width,
            left_height: magnitudes.height,
            right_width: phases.width,
            right_height: phases.height,
        });
    }
    let values = magnitudes
        .data
        .iter()
        .zip(&phases.data)
        .map(|(&m, &p)| Complex64::from_polar(m, p))
        .collect();
    ComplexField::new(magnitudes.width, magnitudes.height, values)
}

/// The unquantized starting hologram for a device kind.
///
/// Phase: the inverse transform of the target with every magnitude replaced by the
/// uniform value that preserves total power. Amplitude: the modulus of the inverse
/// transform (phase zero), divided by its maximum.
pub fn continuous_hologram(target: &ComplexField, kind: ModulationKind) -> Result<ComplexField> {
    let g = idft(target)?;
    let power = total_power(&g);
    if power == 0.0 {
        return Err(Error::Degenerate("target field is identically zero".into()));
    }
    let values = match kind {
        ModulationKind::Phase => {
            let m = (power / g.len() as f64).sqrt();
            g.values()
                .iter()
                .map(|c| Complex64::from_polar(m, c.arg()))
                .collect()
        }
        ModulationKind::Amplitude => {
            let peak = g.values().iter().map(|c| c.norm()).fold(0.0, f64::max);
            g.values()
                .iter()
                .map(|c| Complex64::new(c.norm() / peak, 0.0))
                .collect()
        }
    };
    ComplexField::new(g.width(), g.height(), values)
}

/// Starting hologram on the scheme's level set.
pub fn initial_hologram(target: &ComplexField, scheme: &ModulationScheme) -> Result<ComplexField> {
    let start = continuous_hologram(target, scheme.kind())?;
    Ok(quantize_field(&start, scheme))
}

/// Rescales a target so its continuous starting hologram sits on the device's own
/// scale: unit magnitude for phase devices, unit peak for amplitude devices.
pub fn device_scaled_target(target: &ComplexField, kind: ModulationKind) -> Result<ComplexField> {
    let g = idft(target)?;
    let power = total_power(&g);
    if power == 0.0 {
        return Err(Error::Degenerate("target field is identically zero".into()));
    }
    let factor = match kind {
        ModulationKind::Phase => 1.0 / (power / g.len() as f64).sqrt(),
        ModulationKind::Amplitude => {
            1.0 / g.values().iter().map(|c| c.norm()).fold(0.0, f64::max)
        }
    };
    Ok(target.scaled(factor))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetrize_examples() {
        let two = RealGrid::new(2, 2, vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        assert_eq!(symmetrize_180(&two), two);

        let mut g = RealGrid::filled(4, 4, 0.0).unwrap();
        g.set(1, 1, 2.0);
        let s = symmetrize_180(&g);
        assert_eq!(s.get(1, 1), 1.0);
        assert_eq!(s.get(3, 3), 1.0);
        assert_eq!(s.data().iter().sum::<f64>(), 2.0);
        assert!(is_symmetric_180(&s));
        assert_eq!(symmetrize_180(&s), s);
    }

    #[test]
    fn random_phase_is_seeded() {
        let a = random_phase(8, 8, 1).unwrap();
        assert_eq!(a, random_phase(8, 8, 1).unwrap());
        assert_ne!(a, random_phase(8, 8, 2).unwrap());
        assert!(a.data().iter().all(|&p| (-PI..PI).contains(&p)));
    }

    #[test]
    fn target_construction() {
        let m = RealGrid::new(2, 1, vec![0.5, 1.0]).unwrap();
        let zero = RealGrid::filled(2, 1, 0.0).unwrap();
        let t = build_target(&m, &zero).unwrap();
        assert_eq!(t.values()[0], Complex64::new(0.5, 0.0));

        let p = RealGrid::new(2, 1, vec![0.0, PI]).unwrap();
        let t = build_target(&m, &p).unwrap();
        assert!((t.values()[1] - Complex64::new(-1.0, 0.0)).norm() < 1e-15);

        let bad = RealGrid::filled(1, 2, 0.0).unwrap();
        assert!(matches!(
            build_target(&m, &bad),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn delta_target_starts_flat() {
        let mut t = ComplexField::zeros(4, 4).unwrap();
        t.set(0, 0, Complex64::new(1.0, 0.0)).unwrap();
        for scheme in [
            ModulationScheme::phase(2).unwrap(),
            ModulationScheme::amplitude(2).unwrap(),
        ] {
            let h = initial_hologram(&t, &scheme).unwrap();
            assert!(h.values().iter().all(|&v| v == Complex64::new(1.0, 0.0)));
        }
    }

    #[test]
    fn zero_target_is_degenerate() {
        let t = ComplexField::zeros(4, 4).unwrap();
        assert!(matches!(
            initial_hologram(&t, &ModulationScheme::phase(2).unwrap()),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn crop_to_even_drops_edges() {
        let g = RealGrid::new(3, 3, (0..9).map(f64::from).collect()).unwrap();
        let c = g.crop_to_even().unwrap();
        assert_eq!((c.width(), c.height()), (2, 2));
        assert_eq!(c.data(), &[0.0, 1.0, 3.0, 4.0]);
    }
}
