//! Weighting schemes over percentile classes and the I3 indicator.
//!
//! A scheme lists `(lower boundary, weight)` pairs from the top class down and
//! is written `I3(99-100, 90-10, 50-2, 0-1)`. When the lowest listed boundary
//! is above 0, papers below it carry weight 0, which makes `I3(90-1)` the
//! number of papers in the top-10%.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::percentile::{BoundarySet, ClassCounts};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SchemeClass {
    pub boundary: f64,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightingScheme {
    pub name: String,
    classes: Vec<SchemeClass>,
}

/// Names accepted by [`WeightingScheme::preset`].
pub const PRESET_NAMES: [&str; 5] = ["I3STAR", "PR6", "QUANTILE4", "LINEAR4", "PTOP10"];

impl WeightingScheme {
    pub fn new(name: impl Into<String>, classes: Vec<SchemeClass>) -> Result<Self> {
        let bad = |msg: String| Err(Error::InvalidScheme(msg));
        if classes.is_empty() {
            return bad("no classes".into());
        }
        for c in &classes {
            if !(0.0..100.0).contains(&c.boundary) {
                return bad(format!("boundary {} outside [0, 100)", c.boundary));
            }
            if !(c.weight.is_finite() && c.weight > 0.0) {
                return bad(format!(
                    "weight {} for boundary {} is not positive",
                    c.weight, c.boundary
                ));
            }
        }
        for w in classes.windows(2) {
            if w[1].boundary >= w[0].boundary {
                return bad("boundaries must be strictly decreasing".into());
            }
            if w[1].weight > w[0].weight {
                return bad("weights must not increase towards lower classes".into());
            }
        }
        Ok(Self {
            name: name.into(),
            classes,
        })
    }

    fn from_pairs(name: &str, pairs: &[(f64, f64)]) -> Self {
        let classes = pairs
            .iter()
            .map(|&(boundary, weight)| SchemeClass { boundary, weight })
            .collect();
        Self::new(name, classes).expect("preset is valid")
    }

    pub fn i3_star() -> Self {
        Self::from_pairs(
            "I3STAR",
            &[(99.0, 100.0), (90.0, 10.0), (50.0, 2.0), (0.0, 1.0)],
        )
    }

    pub fn pr6() -> Self {
        Self::from_pairs(
            "PR6",
            &[
                (99.0, 6.0),
                (95.0, 5.0),
                (90.0, 4.0),
                (75.0, 3.0),
                (50.0, 2.0),
                (0.0, 1.0),
            ],
        )
    }

    pub fn quantile4() -> Self {
        Self::from_pairs(
            "QUANTILE4",
            &[(99.0, 99.0), (90.0, 89.0), (50.0, 50.0), (0.0, 1.0)],
        )
    }

    pub fn linear4() -> Self {
        Self::from_pairs(
            "LINEAR4",
            &[(99.0, 6.0), (90.0, 4.0), (50.0, 2.0), (0.0, 1.0)],
        )
    }

    pub fn ptop10() -> Self {
        Self::from_pairs("PTOP10", &[(90.0, 1.0)])
    }

    pub fn preset(name: &str) -> Option<Self> {
        match name {
            "I3STAR" => Some(Self::i3_star()),
            "PR6" => Some(Self::pr6()),
            "QUANTILE4" => Some(Self::quantile4()),
            "LINEAR4" => Some(Self::linear4()),
            "PTOP10" => Some(Self::ptop10()),
            _ => None,
        }
    }

    /// Parses a preset name or a `PR-W` list such as `99-100,90-10,50-2,0-1`.
    pub fn parse(spec: &str) -> Result<Self> {
        let spec = spec.trim();
        if let Some(preset) = Self::preset(spec) {
            return Ok(preset);
        }
        let inner = spec
            .strip_prefix("I3(")
            .and_then(|s| s.strip_suffix(')'))
            .unwrap_or(spec);
        let classes = inner
            .split(',')
            .map(|part| {
                let part = part.trim();
                let (b, w) = part.split_once('-').ok_or_else(|| {
                    Error::InvalidScheme(format!("`{part}` is not of the form PR-W"))
                })?;
                let num = |s: &str| {
                    s.trim().parse::<f64>().map_err(|_| {
                        Error::InvalidScheme(format!("`{s}` in `{part}` is not a number"))
                    })
                };
                Ok(SchemeClass {
                    boundary: num(b)?,
                    weight: num(w)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let mut scheme = Self::new("", classes)?;
        scheme.name = scheme.notation();
        Ok(scheme)
    }

    /// Listed classes, top first.
    pub fn classes(&self) -> &[SchemeClass] {
        &self.classes
    }

    /// Listed classes plus the implicit zero-weight class when the last boundary is above 0.
    pub fn effective_classes(&self) -> Vec<SchemeClass> {
        let mut classes = self.classes.clone();
        if classes.last().is_some_and(|c| c.boundary > 0.0) {
            classes.push(SchemeClass {
                boundary: 0.0,
                weight: 0.0,
            });
        }
        classes
    }

    pub fn weights(&self) -> Vec<f64> {
        self.effective_classes().iter().map(|c| c.weight).collect()
    }

    pub fn boundary_set(&self) -> BoundarySet {
        let ascending = self
            .effective_classes()
            .iter()
            .rev()
            .map(|c| c.boundary)
            .collect();
        BoundarySet::new(ascending).expect("scheme boundaries are validated")
    }

    pub fn top_weight(&self) -> f64 {
        self.classes[0].weight
    }

    pub fn bottom_weight(&self) -> f64 {
        self.effective_classes().last().map_or(0.0, |c| c.weight)
    }

    /// The `I3(PR-W, ...)` notation for this scheme.
    pub fn notation(&self) -> String {
        let parts: Vec<String> = self
            .classes
            .iter()
            .map(|c| format!("{}-{}", c.boundary, c.weight))
            .collect();
        format!("I3({})", parts.join(", "))
    }
}

impl fmt::Display for WeightingScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.name.is_empty() || self.name == self.notation() {
            f.write_str(&self.notation())
        } else {
            write!(f, "{} = {}", self.name, self.notation())
        }
    }
}

impl FromStr for WeightingScheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::parse(s)
    }
}

/// Converts nested top-set counts into counts per distinct class.
///
/// `cumulative` holds the top-set counts for the positive boundaries, top
/// class first; the result has one more entry, the bottom class `total − last`.
pub fn distinct_counts(cumulative: &[f64], total: f64) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(cumulative.len() + 1);
    let mut previous = 0.0;
    for &c in cumulative.iter().chain(std::iter::once(&total)) {
        let value = c - previous;
        if value < 0.0 || value.is_nan() {
            return Err(Error::NegativeDistinct {
                class: out.len(),
                value,
            });
        }
        out.push(value);
        previous = c;
    }
    Ok(out)
}

/// Σ n_i·W_i over aligned distinct counts and weights.
pub fn weighted_sum(distinct: &[f64], weights: &[f64]) -> Result<f64> {
    if distinct.len() != weights.len() {
        return Err(Error::InvalidScheme(format!(
            "{} class counts for {} weights",
            distinct.len(),
            weights.len()
        )));
    }
    Ok(distinct.iter().zip(weights).map(|(n, w)| n * w).sum())
}

/// I3 of one unit. Counts over a finer boundary set are coarsened to the scheme's classes.
pub fn compute_i3(counts: &ClassCounts, scheme: &WeightingScheme) -> Result<f64> {
    let projected = counts.project(&scheme.boundary_set())?;
    weighted_sum(&projected.distinct, &scheme.weights())
}

/// Smallest and largest I3 reachable by a unit of `n` papers.
pub fn bounds(n: f64, scheme: &WeightingScheme) -> (f64, f64) {
    (n * scheme.bottom_weight(), n * scheme.top_weight())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndicatorResult {
    pub unit_id: String,
    pub scheme: String,
    pub i3: f64,
    pub n: f64,
    pub i3_per_n: f64,
    pub i3_min: f64,
    pub i3_max: f64,
    pub percent_of_max: f64,
}

pub fn indicator_result(counts: &ClassCounts, scheme: &WeightingScheme) -> Result<IndicatorResult> {
    if counts.total <= 0.0 {
        return Err(Error::ZeroPaperUnit(counts.unit_id.clone()));
    }
    let i3 = compute_i3(counts, scheme)?;
    let (i3_min, i3_max) = bounds(counts.total, scheme);
    Ok(IndicatorResult {
        unit_id: counts.unit_id.clone(),
        scheme: scheme.name.clone(),
        i3,
        n: counts.total,
        i3_per_n: i3 / counts.total,
        i3_min,
        i3_max,
        percent_of_max: 100.0 * i3 / i3_max,
    })
}

/// Papers in the top-10%, computed as I3(90-1).
pub fn ptop10_equivalence(counts: &ClassCounts) -> Result<f64> {
    compute_i3(counts, &WeightingScheme::ptop10())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn plos_one() -> ClassCounts {
        ClassCounts::from_cumulative(
            "PLOS ONE",
            &BoundarySet::standard(),
            &[91.0, 2545.0, 20141.0],
            30042.0,
        )
        .unwrap()
    }

    #[test]
    fn presets_parse_round_trip() {
        for name in PRESET_NAMES {
            let preset = WeightingScheme::preset(name).unwrap();
            let reparsed = WeightingScheme::parse(&preset.notation()).unwrap();
            assert_eq!(reparsed.classes(), preset.classes());
        }
        let s: WeightingScheme = "99-100,90-10,50-2,0-1".parse().unwrap();
        assert_eq!(s.classes(), WeightingScheme::i3_star().classes());
        assert_eq!(s.name, "I3(99-100, 90-10, 50-2, 0-1)");
        assert_eq!(
            WeightingScheme::pr6().boundary_set().ascending(),
            &[0.0, 50.0, 75.0, 90.0, 95.0, 99.0]
        );
        assert_eq!(WeightingScheme::ptop10().weights(), vec![1.0, 0.0]);
    }

    #[test]
    fn invalid_schemes() {
        for bad in [
            "",
            "99",
            "99-x",
            "50-2,90-10",
            "90-1,50-2",
            "99-0,0-1",
            "100-1",
            "99--1",
            "i3star",
        ] {
            assert!(WeightingScheme::parse(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn distinct_from_table_two() {
        let d = distinct_counts(&[91.0, 2545.0, 20141.0], 30042.0).unwrap();
        assert_eq!(d, vec![91.0, 2454.0, 17596.0, 9901.0]);
        assert_eq!(
            distinct_counts(&[0.0, 0.0, 0.0], 7.0).unwrap(),
            vec![0.0, 0.0, 0.0, 7.0]
        );
        assert!(matches!(
            distinct_counts(&[5.0, 3.0, 9.0], 10.0),
            Err(Error::NegativeDistinct { class: 1, .. })
        ));
        assert!(distinct_counts(&[1.0, 2.0, 11.0], 10.0).is_err());
    }

    #[test]
    fn i3_star_values() {
        assert_eq!(
            compute_i3(&plos_one(), &WeightingScheme::i3_star()).unwrap(),
            78_733.0
        );

        let field = ClassCounts::from_cumulative(
            "PLOS ONE",
            &BoundarySet::standard(),
            &[14.000, 926.821, 14853.688],
            30042.0,
        )
        .unwrap();
        assert_abs_diff_eq!(
            compute_i3(&field, &WeightingScheme::i3_star()).unwrap(),
            53_570.256,
            epsilon = 1e-6
        );

        let bottom_only =
            ClassCounts::from_cumulative("X", &BoundarySet::standard(), &[0.0; 3], 12.0).unwrap();
        for name in ["I3STAR", "PR6", "QUANTILE4", "LINEAR4"] {
            let s = WeightingScheme::preset(name).unwrap();
            let counts = bottom_only.clone();
            let counts = if s.boundary_set() == counts.boundary_set() {
                counts
            } else {
                ClassCounts::from_cumulative(
                    "X",
                    &s.boundary_set(),
                    &vec![0.0; s.classes().len() - 1],
                    12.0,
                )
                .unwrap()
            };
            assert_eq!(compute_i3(&counts, &s).unwrap(), 12.0);
        }
    }

    #[test]
    fn boundary_mismatch() {
        assert!(matches!(
            compute_i3(&plos_one(), &WeightingScheme::pr6()),
            Err(Error::BoundaryMismatch { .. })
        ));
        assert!(weighted_sum(&[1.0, 2.0], &[1.0]).is_err());
    }

    #[test]
    fn bounds_and_percent_of_max() {
        let (lo, hi) = bounds(30042.0, &WeightingScheme::i3_star());
        assert_eq!((lo, hi), (30_042.0, 3_004_200.0));
        assert_eq!(bounds(1.0, &WeightingScheme::ptop10()), (0.0, 1.0));

        let r = indicator_result(&plos_one(), &WeightingScheme::i3_star()).unwrap();
        assert_abs_diff_eq!(r.i3_per_n, 2.62, epsilon = 0.005);
        assert_abs_diff_eq!(r.percent_of_max, 2.62, epsilon = 0.005);
        assert_eq!(r.i3_per_n, r.i3 / r.n);
    }

    #[test]
    fn rsc_advances() {
        // distinct (30, 879, 5010, 2516) from nested (30, 909, 5919)
        let rsc = ClassCounts::from_cumulative(
            "RSC ADV",
            &BoundarySet::standard(),
            &[30.0, 909.0, 5919.0],
            8435.0,
        )
        .unwrap();
        assert_eq!(rsc.distinct, vec![30.0, 879.0, 5010.0, 2516.0]);
        let r = indicator_result(&rsc, &WeightingScheme::i3_star()).unwrap();
        assert_eq!(r.i3, 24_326.0);
        assert_abs_diff_eq!(r.i3_per_n, 2.884, epsilon = 0.0005);
    }

    #[test]
    fn zero_paper_unit() {
        let empty =
            ClassCounts::from_cumulative("E", &BoundarySet::standard(), &[0.0; 3], 0.0).unwrap();
        assert!(matches!(
            indicator_result(&empty, &WeightingScheme::i3_star()),
            Err(Error::ZeroPaperUnit(_))
        ));
    }

    #[test]
    fn ptop10() {
        assert_eq!(ptop10_equivalence(&plos_one()).unwrap(), 2545.0);
        let none =
            ClassCounts::from_cumulative("E", &BoundarySet::standard(), &[0.0; 3], 4.0).unwrap();
        assert_eq!(ptop10_equivalence(&none).unwrap(), 0.0);
    }
}
