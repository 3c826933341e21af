//! Device modulation constraints and nearest-level quantization.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::ComplexField;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModulationKind {
    /// Unit-magnitude values `e^{2 pi i k / L}`.
    Phase,
    /// Real values `k / (L - 1)` in `[0, 1]`.
    Amplitude,
}

impl ModulationKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ModulationKind::Phase => "phase",
            ModulationKind::Amplitude => "amplitude",
        }
    }
}

impl fmt::Display for ModulationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModulationKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "phase" => Ok(ModulationKind::Phase),
            "amplitude" | "amp" => Ok(ModulationKind::Amplitude),
            other => Err(Error::InvalidScheme(format!("unknown kind '{other}'"))),
        }
    }
}

/// A device constraint: kind plus number of levels.
#[derive(Debug, Clone, PartialEq)]
pub struct ModulationScheme {
    kind: ModulationKind,
    levels: Vec<Complex64>,
}

impl ModulationScheme {
    pub fn new(kind: ModulationKind, level_count: usize) -> Result<Self> {
        if level_count < 2 {
            return Err(Error::InvalidScheme(format!(
                "at least 2 levels required, got {level_count}"
            )));
        }
        let levels = (0..level_count)
            .map(|k| match kind {
                ModulationKind::Phase => unit_root(k, level_count),
                ModulationKind::Amplitude => {
                    Complex64::new(k as f64 / (level_count - 1) as f64, 0.0)
                }
            })
            .collect();
        Ok(Self { kind, levels })
    }

    pub fn phase(level_count: usize) -> Result<Self> {
        Self::new(ModulationKind::Phase, level_count)
    }

    pub fn amplitude(level_count: usize) -> Result<Self> {
        Self::new(ModulationKind::Amplitude, level_count)
    }

    pub fn kind(&self) -> ModulationKind {
        self.kind
    }

    pub fn level_count(&self) -> usize {
        self.levels.len()
    }

    /// The full level set in index order.
    pub fn levels(&self) -> &[Complex64] {
        &self.levels
    }

    pub fn level(&self, index: usize) -> Complex64 {
        self.levels[index]
    }

    /// Two-level scheme of the same kind.
    pub fn binary(&self) -> Self {
        Self::new(self.kind, 2).expect("two levels is always valid")
    }

    /// Short label such as `phase-256`, used for file and column names.
    pub fn label(&self) -> String {
        format!("{}-{}", self.kind, self.level_count())
    }

    /// Index of the level nearest to `value` in the complex plane. Ties go to the
    /// lower index; zero maps to index 0 for phase schemes.
    pub fn nearest_index(&self, value: Complex64) -> usize {
        let l = self.levels.len();
        let guess = match self.kind {
            ModulationKind::Phase => {
                if value.re == 0.0 && value.im == 0.0 {
                    return 0;
                }
                let turns = value.arg() / (2.0 * PI);
                let k = (turns * l as f64).round() as i64;
                k.rem_euclid(l as i64) as usize
            }
            ModulationKind::Amplitude => {
                let a = value.re.clamp(0.0, 1.0);
                ((a * (l - 1) as f64).round() as usize).min(l - 1)
            }
        };
        // The estimate can be off by one in the last bit; settle by exact distance.
        let neighbours: [usize; 3] = match self.kind {
            ModulationKind::Phase => [(guess + l - 1) % l, guess, (guess + 1) % l],
            ModulationKind::Amplitude => [guess.saturating_sub(1), guess, (guess + 1).min(l - 1)],
        };
        let mut best = guess;
        let mut best_d = (value - self.levels[guess]).norm_sqr();
        for &k in &neighbours {
            let d = (value - self.levels[k]).norm_sqr();
            if d < best_d || (d == best_d && k < best) {
                best = k;
                best_d = d;
            }
        }
        best
    }

    pub fn quantize_nearest(&self, value: Complex64) -> Complex64 {
        self.levels[self.nearest_index(value)]
    }

    /// Index of `value` in the level set, if it is exactly one of the levels.
    pub fn index_of(&self, value: Complex64) -> Option<usize> {
        let k = self.nearest_index(value);
        (self.levels[k] == value).then_some(k)
    }

    pub fn contains(&self, value: Complex64) -> bool {
        self.index_of(value).is_some()
    }
}

impl fmt::Display for ModulationScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.kind, self.level_count())
    }
}

impl FromStr for ModulationScheme {
    type Err = Error;

    /// Parses `kind:levels`, e.g. `phase:256` or `amplitude:2`.
    fn from_str(s: &str) -> Result<Self> {
        let (kind, levels) = s
            .split_once(':')
            .ok_or_else(|| Error::InvalidScheme(format!("expected kind:levels, got '{s}'")))?;
        let levels: usize = levels
            .trim()
            .parse()
            .map_err(|_| Error::InvalidScheme(format!("bad level count in '{s}'")))?;
        Self::new(kind.parse()?, levels)
    }
}

/// `e^{2 pi i k / n}` with exact values on the axes.
fn unit_root(k: usize, n: usize) -> Complex64 {
    if (4 * k).is_multiple_of(n) {
        return match (4 * k / n) % 4 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        };
    }
    Complex64::from_polar(1.0, 2.0 * PI * k as f64 / n as f64)
}

pub fn quantize_nearest(value: Complex64, scheme: &ModulationScheme) -> Complex64 {
    scheme.quantize_nearest(value)
}

pub fn quantize_field(field: &ComplexField, scheme: &ModulationScheme) -> ComplexField {
    let values = field
        .values()
        .iter()
        .map(|&v| scheme.quantize_nearest(v))
        .collect();
    ComplexField::new(field.width(), field.height(), values).expect("shape is preserved")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn binary_and_quarter_levels() {
        assert_eq!(
            ModulationScheme::phase(2).unwrap().levels(),
            &[c(1.0, 0.0), c(-1.0, 0.0)]
        );
        assert_eq!(
            ModulationScheme::amplitude(2).unwrap().levels(),
            &[c(0.0, 0.0), c(1.0, 0.0)]
        );
        assert_eq!(
            ModulationScheme::phase(4).unwrap().levels(),
            &[c(1.0, 0.0), c(0.0, 1.0), c(-1.0, 0.0), c(0.0, -1.0)]
        );
    }

    #[test]
    fn rejects_single_level() {
        assert!(ModulationScheme::phase(1).is_err());
        assert!(ModulationScheme::amplitude(0).is_err());
    }

    #[test]
    fn nearest_examples() {
        let amp = ModulationScheme::amplitude(2).unwrap();
        assert_eq!(amp.quantize_nearest(c(0.3, 0.0)), c(0.0, 0.0));

        let phase = ModulationScheme::phase(256).unwrap();
        let v = Complex64::from_polar(1.0, 0.1);
        // round(0.1 * 256 / (2 pi)) = 4
        assert_eq!(phase.nearest_index(v), 4);
        let brute = (0..256)
            .min_by(|&a, &b| {
                (v - phase.level(a))
                    .norm_sqr()
                    .partial_cmp(&(v - phase.level(b)).norm_sqr())
                    .unwrap()
            })
            .unwrap();
        assert_eq!(brute, 4);

        for l in [2, 3, 4, 256] {
            assert_eq!(ModulationScheme::phase(l).unwrap().nearest_index(c(0.0, 0.0)), 0);
        }
    }

    #[test]
    fn amplitude_midpoint_tie_goes_low() {
        let amp = ModulationScheme::amplitude(2).unwrap();
        assert_eq!(amp.nearest_index(c(0.5, 0.0)), 0);
    }

    #[test]
    fn field_quantization() {
        let f = ComplexField::from_real(2, 1, &[0.2, 0.8]).unwrap();
        let q = quantize_field(&f, &ModulationScheme::amplitude(2).unwrap());
        assert_eq!(q.values(), &[c(0.0, 0.0), c(1.0, 0.0)]);
        let again = quantize_field(&q, &ModulationScheme::amplitude(2).unwrap());
        assert_eq!(again, q);
    }

    #[test]
    fn parses_scheme_strings() {
        let s: ModulationScheme = "phase:256".parse().unwrap();
        assert_eq!(s.kind(), ModulationKind::Phase);
        assert_eq!(s.level_count(), 256);
        assert_eq!(s.to_string(), "phase:256");
        assert_eq!(s.label(), "phase-256");
        assert!("phase".parse::<ModulationScheme>().is_err());
        assert!("colour:4".parse::<ModulationScheme>().is_err());
        assert!("amplitude:1".parse::<ModulationScheme>().is_err());
    }
}
