//! Finitely supported signal priors on the non-negative half-line.
//!
//! A [`DiscreteMeasure`] is the law of one coordinate of `sqrt(n) * v0` in
//! the large-dimension limit. All Gaussian expectations used elsewhere in
//! the crate reduce to finite sums over its atoms.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Weights may drift from 1 by this much on input; they are rescaled to
/// sum to 1 to machine precision afterwards.
const WEIGHT_SUM_INPUT_TOL: f64 = 1e-9;
/// Tolerance on `E V^2 = 1` for measures flagged as normalized.
const SECOND_MOMENT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Atom {
    pub value: f64,
    pub weight: f64,
}

/// A probability measure with finitely many atoms on `[0, inf)`.
///
/// Atoms are sorted by value and pairwise distinct. When `normalized` is
/// set the second moment equals 1 within `1e-9`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMeasure {
    atoms: Vec<Atom>,
    normalized: bool,
}

impl DiscreteMeasure {
    /// Validates `(value, weight)` pairs, merges duplicate values and sorts
    /// the atoms. The second moment is not constrained.
    pub fn new<I>(atoms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (f64, f64)>,
    {
        Self::build(atoms, false)
    }

    /// Like [`DiscreteMeasure::new`] but additionally requires unit second
    /// moment.
    pub fn normalized<I>(atoms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (f64, f64)>,
    {
        Self::build(atoms, true)
    }

    fn build<I>(atoms: I, normalized: bool) -> Result<Self>
    where
        I: IntoIterator<Item = (f64, f64)>,
    {
        let mut raw: Vec<Atom> = Vec::new();
        for (value, weight) in atoms {
            if !(weight > 0.0) || !weight.is_finite() {
                return Err(Error::NonPositiveWeight(weight));
            }
            if !(value >= 0.0) || !value.is_finite() {
                return Err(Error::NegativeValue(value));
            }
            raw.push(Atom { value, weight });
        }
        if raw.is_empty() {
            return Err(Error::EmptyMeasure);
        }
        let total: f64 = raw.iter().map(|a| a.weight).sum();
        if (total - 1.0).abs() > WEIGHT_SUM_INPUT_TOL {
            return Err(Error::WeightsDoNotSumToOne(total));
        }

        raw.sort_by(|a, b| a.value.total_cmp(&b.value));
        let mut merged: Vec<Atom> = Vec::with_capacity(raw.len());
        for atom in raw {
            match merged.last_mut() {
                Some(last) if last.value == atom.value => last.weight += atom.weight,
                _ => merged.push(atom),
            }
        }
        // leave weights that already sum to 1 up to rounding untouched, so
        // that validation is idempotent
        let total: f64 = merged.iter().map(|a| a.weight).sum();
        if (total - 1.0).abs() > 8.0 * f64::EPSILON {
            for atom in &mut merged {
                atom.weight /= total;
            }
        }

        let measure = DiscreteMeasure {
            atoms: merged,
            normalized,
        };
        if normalized {
            let m2 = measure.second_moment();
            if (m2 - 1.0).abs() > SECOND_MOMENT_TOL {
                return Err(Error::NotNormalized(m2));
            }
        }
        Ok(measure)
    }

    /// The two-point mixture `(1 - eps) delta_0 + eps delta_{1/sqrt(eps)}`,
    /// the least-favorable family of the worst-case analysis.
    pub fn two_point(eps: f64) -> Result<Self> {
        if !(eps > 0.0 && eps <= 1.0) {
            return Err(Error::EpsOutOfRange(eps));
        }
        let spike = 1.0 / eps.sqrt();
        let atoms = if eps == 1.0 {
            vec![Atom {
                value: 1.0,
                weight: 1.0,
            }]
        } else {
            vec![
                Atom {
                    value: 0.0,
                    weight: 1.0 - eps,
                },
                Atom {
                    value: spike,
                    weight: eps,
                },
            ]
        };
        Ok(DiscreteMeasure {
            atoms,
            normalized: true,
        })
    }

    /// Point mass at `value`.
    pub fn dirac(value: f64) -> Result<Self> {
        Self::new([(value, 1.0)])
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    /// `P(V != 0)`.
    pub fn sparsity(&self) -> f64 {
        self.atoms
            .iter()
            .filter(|a| a.value != 0.0)
            .map(|a| a.weight)
            .sum()
    }

    pub fn mean(&self) -> f64 {
        self.atoms.iter().map(|a| a.weight * a.value).sum()
    }

    pub fn second_moment(&self) -> f64 {
        self.atoms
            .iter()
            .map(|a| a.weight * a.value * a.value)
            .sum()
    }

    /// Rescales the atom values so that `E V^2 = 1`; the result is flagged
    /// as normalized.
    pub fn to_unit_second_moment(&self) -> Result<Self> {
        let m2 = self.second_moment();
        if !(m2 > 0.0) {
            return Err(Error::NotNormalized(m2));
        }
        let scale = m2.sqrt();
        Self::build(self.atoms.iter().map(|a| (a.value / scale, a.weight)), true)
    }

    /// Re-runs validation on the current atoms, keeping the normalization
    /// flag.
    pub fn revalidate(&self) -> Result<Self> {
        Self::build(
            self.atoms.iter().map(|a| (a.value, a.weight)),
            self.normalized,
        )
    }
}

/// Parses `"v1:w1,v2:w2,..."` into an unflagged measure.
impl FromStr for DiscreteMeasure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut atoms = Vec::new();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (v, w) = part
                .split_once(':')
                .ok_or_else(|| Error::ParsePrior(format!("expected value:weight, got {part:?}")))?;
            let value: f64 = v
                .trim()
                .parse()
                .map_err(|_| Error::ParsePrior(format!("bad value {v:?}")))?;
            let weight: f64 = w
                .trim()
                .parse()
                .map_err(|_| Error::ParsePrior(format!("bad weight {w:?}")))?;
            atoms.push((value, weight));
        }
        DiscreteMeasure::new(atoms)
    }
}

impl fmt::Display for DiscreteMeasure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, a) in self.atoms.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{}:{}", a.value, a.weight)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn symmetric_two_atom_has_unit_second_moment() {
        let m = DiscreteMeasure::normalized([(0.0, 0.5), (2f64.sqrt(), 0.5)]).unwrap();
        assert!((m.second_moment() - 1.0).abs() < 1e-15);
        assert_eq!(m.atoms().len(), 2);
    }

    #[test]
    fn dirac_one() {
        let m = DiscreteMeasure::new([(1.0, 1.0)]).unwrap();
        assert_eq!(m.second_moment(), 1.0);
        assert_eq!(m.mean(), 1.0);
        assert_eq!(m.sparsity(), 1.0);
    }

    #[test]
    fn unnormalized_accepted_only_without_flag() {
        let atoms = [(0.0, 0.7), (2.0, 0.3)];
        let m = DiscreteMeasure::new(atoms).unwrap();
        assert!((m.second_moment() - 1.2).abs() < 1e-15);
        assert!(matches!(
            DiscreteMeasure::normalized(atoms),
            Err(Error::NotNormalized(_))
        ));
    }

    #[test]
    fn rejects_bad_atoms() {
        assert_eq!(
            DiscreteMeasure::new([(1.0, 0.0)]),
            Err(Error::NonPositiveWeight(0.0))
        );
        assert_eq!(
            DiscreteMeasure::new([(-1.0, 1.0)]),
            Err(Error::NegativeValue(-1.0))
        );
        assert!(matches!(
            DiscreteMeasure::new([(1.0, 0.5), (2.0, 0.4)]),
            Err(Error::WeightsDoNotSumToOne(_))
        ));
        assert_eq!(DiscreteMeasure::new([]), Err(Error::EmptyMeasure));
    }

    #[test]
    fn duplicates_merge_and_sort() {
        let m = DiscreteMeasure::new([(2.0, 0.25), (0.0, 0.5), (2.0, 0.25)]).unwrap();
        assert_eq!(
            m.atoms(),
            &[
                Atom {
                    value: 0.0,
                    weight: 0.5
                },
                Atom {
                    value: 2.0,
                    weight: 0.5
                }
            ]
        );
    }

    #[test]
    fn two_point_examples() {
        assert_eq!(
            DiscreteMeasure::two_point(1.0).unwrap().atoms(),
            &[Atom {
                value: 1.0,
                weight: 1.0
            }]
        );
        let m = DiscreteMeasure::two_point(0.25).unwrap();
        assert_eq!(
            m.atoms()[0],
            Atom {
                value: 0.0,
                weight: 0.75
            }
        );
        assert_eq!(
            m.atoms()[1],
            Atom {
                value: 2.0,
                weight: 0.25
            }
        );
        let m = DiscreteMeasure::two_point(0.1).unwrap();
        assert!((m.atoms()[1].value - 3.1622776601683795).abs() < 1e-15);
        assert_eq!(m.atoms()[0].weight, 0.9);
        assert!(DiscreteMeasure::two_point(0.0).is_err());
        assert!(DiscreteMeasure::two_point(1.5).is_err());
    }

    #[test]
    fn sparsity_and_mean() {
        assert_eq!(DiscreteMeasure::two_point(0.3).unwrap().sparsity(), 0.3);
        let m = DiscreteMeasure::new([(0.0, 0.5), (1.0, 0.25), (3f64.sqrt(), 0.25)]).unwrap();
        assert_eq!(m.sparsity(), 0.5);
        assert_eq!(DiscreteMeasure::two_point(0.25).unwrap().mean(), 0.5);
    }

    #[test]
    fn rescale_to_unit_second_moment() {
        let m: DiscreteMeasure = "0:0.9,3.1623:0.1".parse().unwrap();
        let u = m.to_unit_second_moment().unwrap();
        assert!(u.is_normalized());
        assert!((u.second_moment() - 1.0).abs() < 1e-12);
        assert_eq!(u.sparsity(), m.sparsity());
        assert!(DiscreteMeasure::dirac(0.0)
            .unwrap()
            .to_unit_second_moment()
            .is_err());
    }

    #[test]
    fn parse_prior_spec() {
        let m: DiscreteMeasure = "0:0.9, 3.1623:0.1".parse().unwrap();
        assert_eq!(m.atoms().len(), 2);
        assert!(!m.is_normalized());
        assert!((m.sparsity() - 0.1).abs() < 1e-15);
        assert!("0:0.9;1:0.1".parse::<DiscreteMeasure>().is_err());
        assert!("a:1".parse::<DiscreteMeasure>().is_err());
    }

    proptest! {
        #[test]
        fn two_point_moments(eps in 1e-6f64..=1.0) {
            let m = DiscreteMeasure::two_point(eps).unwrap();
            prop_assert_eq!(m.sparsity(), eps);
            prop_assert!((m.second_moment() - 1.0).abs() <= 4.0 * f64::EPSILON);
        }

        #[test]
        fn validation_is_idempotent(
            atoms in prop::collection::vec((0.0f64..5.0, 0.01f64..1.0), 1..12)
        ) {
            let total: f64 = atoms.iter().map(|a| a.1).sum();
            let atoms: Vec<_> = atoms.iter().map(|&(v, w)| (v, w / total)).collect();
            let m = DiscreteMeasure::new(atoms.clone()).unwrap();
            prop_assert_eq!(m.revalidate().unwrap(), m.clone());

            // merging preserves moments
            let mean: f64 = atoms.iter().map(|&(v, w)| v * w).sum();
            let m2: f64 = atoms.iter().map(|&(v, w)| v * v * w).sum();
            prop_assert!((m.mean() - mean).abs() < 1e-12);
            prop_assert!((m.second_moment() - m2).abs() < 1e-12);
        }

        #[test]
        fn duplicate_atoms_preserve_moments(v in 0.0f64..4.0, w in 0.05f64..0.45) {
            let m = DiscreteMeasure::new([(v, w), (v, w), (v + 1.0, 1.0 - 2.0 * w)]).unwrap();
            prop_assert_eq!(m.atoms().len(), 2);
            let mean = 2.0 * w * v + (1.0 - 2.0 * w) * (v + 1.0);
            prop_assert!((m.mean() - mean).abs() < 1e-12);
        }
    }
}
