//! Statistical comparison of two class profiles.
//!
//! A profile is compared either with another unit's profile or with the
//! expectation for a unit of the same size (each class holding its nominal
//! share of papers). The report has three blocks:
//!
//! * a chi-square test on the r×2 table of weighted (I3) class values, with
//!   per-row contributions and Cramér's V;
//! * standardized residuals `(O − E)/√E` of the first unit's distinct counts,
//!   where `E` spreads the first unit's N over the reference proportions;
//! * per-class proportions with a pooled two-proportion z-test, Cohen's h,
//!   and Cohen's w over the whole proportion vector.
//!
//! Signed statistics (residuals, z, h) are oriented as first minus second.
//! Cohen's w treats the second profile as reference and is not symmetric.

use std::fmt;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};
use crate::percentile::ClassCounts;
use crate::scheme::WeightingScheme;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Significance {
    #[serde(rename = "n.s.")]
    NotSignificant,
    #[serde(rename = "p<.05")]
    P05,
    #[serde(rename = "p<.01")]
    P01,
    #[serde(rename = "p<.001")]
    P001,
}

impl fmt::Display for Significance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Significance::NotSignificant => "n.s.",
            Significance::P05 => "p<.05",
            Significance::P01 => "p<.01",
            Significance::P001 => "p<.001",
        })
    }
}

/// Critical values at the three reported significance levels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalValues {
    pub p001: f64,
    pub p01: f64,
    pub p05: f64,
}

impl CriticalValues {
    /// Two-sided standard normal.
    pub const Z: CriticalValues = CriticalValues {
        p001: 3.291,
        p01: 2.576,
        p05: 1.96,
    };

    pub const CHI_SQUARE_DF3: CriticalValues = CriticalValues {
        p001: 16.266,
        p01: 11.345,
        p05: 7.815,
    };

    /// Upper chi-square quantiles for `df` degrees of freedom.
    pub fn chi_square(df: usize) -> CriticalValues {
        if df == 3 {
            return Self::CHI_SQUARE_DF3;
        }
        let dist = ChiSquared::new(df.max(1) as f64).expect("positive degrees of freedom");
        CriticalValues {
            p001: dist.inverse_cdf(0.999),
            p01: dist.inverse_cdf(0.99),
            p05: dist.inverse_cdf(0.95),
        }
    }

    /// Significance of a statistic that must exceed the critical value.
    pub fn label(&self, statistic: f64) -> Significance {
        if statistic > self.p001 {
            Significance::P001
        } else if statistic > self.p01 {
            Significance::P01
        } else if statistic > self.p05 {
            Significance::P05
        } else {
            Significance::NotSignificant
        }
    }

    pub fn label_abs(&self, statistic: f64) -> Significance {
        self.label(statistic.abs())
    }
}

/// Non-negative values over named classes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassVector {
    pub labels: Vec<String>,
    pub values: Vec<f64>,
}

impl ClassVector {
    pub fn new(labels: Vec<String>, values: Vec<f64>) -> Result<Self> {
        if labels.len() != values.len() {
            return Err(Error::InvalidInput(format!(
                "{} labels for {} values",
                labels.len(),
                values.len()
            )));
        }
        if values.len() < 2 {
            return Err(Error::InvalidInput(
                "at least two classes are required".into(),
            ));
        }
        if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::InvalidInput(format!(
                "class value {v} is not a non-negative number"
            )));
        }
        Ok(Self { labels, values })
    }

    /// Values labelled `0`, `1`, ... .
    pub fn unlabelled(values: Vec<f64>) -> Result<Self> {
        let labels = (0..values.len()).map(|i| i.to_string()).collect();
        Self::new(labels, values)
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn proportions(&self) -> Vec<f64> {
        let total = self.total();
        self.values.iter().map(|v| v / total).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpectedBaseline {
    pub labels: Vec<String>,
    pub n: f64,
    /// Class width × N.
    pub distinct_expected: Vec<f64>,
    /// Expected count × class weight.
    pub i3_expected: Vec<f64>,
}

/// Class counts and weighted values for a unit of `n` papers spread at nominal shares.
pub fn expected_baseline(n: f64, scheme: &WeightingScheme) -> ExpectedBaseline {
    let mut upper = 100.0;
    let mut labels = Vec::new();
    let mut distinct_expected = Vec::new();
    let mut i3_expected = Vec::new();
    for class in scheme.effective_classes() {
        let expected = n * (upper - class.boundary) / 100.0;
        labels.push(crate::percentile::class_label(class.boundary, upper));
        distinct_expected.push(expected);
        i3_expected.push(expected * class.weight);
        upper = class.boundary;
    }
    ExpectedBaseline {
        labels,
        n,
        distinct_expected,
        i3_expected,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Contingency {
    pub chi_square: f64,
    /// Contribution of each row (both cells); 0 for dropped rows.
    pub rows: Vec<f64>,
    /// Expected value of each cell under independence.
    pub expected: Vec<[f64; 2]>,
    pub df: usize,
    pub grand_total: f64,
    /// Rows left out because both cells were zero.
    pub dropped: Vec<usize>,
}

impl Contingency {
    pub fn kept_rows(&self) -> usize {
        self.rows.len() - self.dropped.len()
    }
}

/// Pearson chi-square test of independence on an r×2 table.
pub fn contingency_chi_square(a: &ClassVector, b: &ClassVector) -> Result<Contingency> {
    if a.labels != b.labels {
        return Err(Error::InvalidInput(format!(
            "class labels differ: {:?} vs {:?}",
            a.labels, b.labels
        )));
    }
    let (total_a, total_b) = (a.total(), b.total());
    if total_a <= 0.0 || total_b <= 0.0 {
        return Err(Error::InvalidInput(
            "both columns need a positive total".into(),
        ));
    }
    let grand_total = total_a + total_b;
    let mut rows = Vec::with_capacity(a.values.len());
    let mut expected = Vec::with_capacity(a.values.len());
    let mut dropped = Vec::new();
    for (i, (&oa, &ob)) in a.values.iter().zip(&b.values).enumerate() {
        let row_total = oa + ob;
        if row_total == 0.0 {
            dropped.push(i);
            rows.push(0.0);
            expected.push([0.0, 0.0]);
            continue;
        }
        let ea = row_total * total_a / grand_total;
        let eb = row_total * total_b / grand_total;
        rows.push((oa - ea).powi(2) / ea + (ob - eb).powi(2) / eb);
        expected.push([ea, eb]);
    }
    // positive column totals leave at least one row; a single row has df = 0 and χ² = 0
    let kept = rows.len() - dropped.len();
    Ok(Contingency {
        chi_square: rows.iter().sum(),
        rows,
        expected,
        df: kept - 1,
        grand_total,
        dropped,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Residual {
    pub value: f64,
    pub label: Significance,
}

/// `(O − E)/√E` per class, labelled against the normal critical values.
pub fn standardized_residuals(
    observed: &ClassVector,
    expected: &ClassVector,
) -> Result<Vec<Residual>> {
    if observed.values.len() != expected.values.len() {
        return Err(Error::InvalidInput(
            "observed and expected differ in length".into(),
        ));
    }
    observed
        .values
        .iter()
        .zip(&expected.values)
        .zip(&expected.labels)
        .map(|((&o, &e), label)| {
            if e <= 0.0 {
                return Err(Error::InvalidInput(format!(
                    "expected value for class {label} is zero"
                )));
            }
            let value = (o - e) / e.sqrt();
            Ok(Residual {
                value,
                label: CriticalValues::Z.label_abs(value),
            })
        })
        .collect()
}

/// Cramér's V for an r×c table.
pub fn cramers_v(chi_square: f64, grand_total: f64, rows: usize, cols: usize) -> f64 {
    let k = rows.min(cols);
    if k < 2 || grand_total <= 0.0 {
        return 0.0;
    }
    (chi_square / (grand_total * (k - 1) as f64)).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZTest {
    pub z: f64,
    pub label: Significance,
}

/// Pooled z-test for `count1/n1` against `count2/n2`.
///
/// Returns `Ok(None)` when the pooled proportion is 0 or 1, where z is undefined.
pub fn two_proportion_z(count1: f64, n1: f64, count2: f64, n2: f64) -> Result<Option<ZTest>> {
    for (c, n) in [(count1, n1), (count2, n2)] {
        if !(n > 0.0 && (0.0..=n).contains(&c)) {
            return Err(Error::InvalidInput(format!(
                "count {c} out of range for n = {n}"
            )));
        }
    }
    let pooled = (count1 + count2) / (n1 + n2);
    if pooled <= 0.0 || pooled >= 1.0 {
        return Ok(None);
    }
    let se = (pooled * (1.0 - pooled) * (1.0 / n1 + 1.0 / n2)).sqrt();
    let z = (count1 / n1 - count2 / n2) / se;
    Ok(Some(ZTest {
        z,
        label: CriticalValues::Z.label_abs(z),
    }))
}

fn check_proportion(p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!(
            "proportion {p} outside [0, 1]"
        )))
    }
}

/// Cohen's h, `2·(asin √pA − asin √pB)`.
pub fn cohens_h(p_a: f64, p_b: f64) -> Result<f64> {
    check_proportion(p_a)?;
    check_proportion(p_b)?;
    Ok(2.0 * (p_a.sqrt().asin() - p_b.sqrt().asin()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CohensW {
    pub w: f64,
    /// `(p_obs − p_ref)²/p_ref` per class.
    pub contributions: Vec<f64>,
}

/// Cohen's w of `p_obs` against the reference vector `p_ref`.
pub fn cohens_w(p_obs: &[f64], p_ref: &[f64]) -> Result<CohensW> {
    if p_obs.len() != p_ref.len() {
        return Err(Error::InvalidInput(
            "proportion vectors differ in length".into(),
        ));
    }
    for v in [p_obs, p_ref] {
        v.iter().try_for_each(|&p| check_proportion(p))?;
        let sum: f64 = v.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidInput(format!(
                "proportions sum to {sum}, not 1"
            )));
        }
    }
    if p_ref.iter().any(|&p| p <= 0.0) {
        return Err(Error::InvalidInput("reference proportion is zero".into()));
    }
    let contributions: Vec<f64> = p_obs
        .iter()
        .zip(p_ref)
        .map(|(o, r)| (o - r).powi(2) / r)
        .collect();
    Ok(CohensW {
        w: contributions.iter().sum::<f64>().sqrt(),
        contributions,
    })
}

/// What the first profile is compared with.
#[derive(Debug, Clone, Copy)]
pub enum Reference<'a> {
    Unit(&'a ClassCounts),
    /// Nominal class shares for a unit of the first profile's size.
    Expected,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub label: String,
    /// Distinct class counts, first and second.
    pub counts: [f64; 2],
    /// Counts times class weight.
    pub weighted: [f64; 2],
    pub chi_square: f64,
    pub dropped: bool,
    pub residual: Option<Residual>,
    /// Weighted value divided by the profile's N.
    pub i3_per_n: [f64; 2],
    pub proportions: [f64; 2],
    pub z: Option<ZTest>,
    pub cohens_h: f64,
    pub w_contribution: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonTotals {
    pub n: [f64; 2],
    pub i3: [f64; 2],
    pub i3_per_n: [f64; 2],
    pub chi_square: f64,
    pub df: usize,
    pub chi_square_label: Significance,
    pub grand_total: f64,
    pub cramers_v: f64,
    pub cohens_w: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub first: String,
    pub second: String,
    pub scheme: String,
    pub orientation: String,
    pub rows: Vec<ComparisonRow>,
    pub totals: ComparisonTotals,
    pub chi_square_critical: CriticalValues,
    pub z_critical: CriticalValues,
    pub warnings: Vec<String>,
}

/// Label used for the second column when comparing against expectation.
pub const EXPECTED_LABEL: &str = "expected";

/// Builds the full comparison of `first` against `reference` under `scheme`.
pub fn compare(
    first: &ClassCounts,
    reference: Reference<'_>,
    scheme: &WeightingScheme,
) -> Result<ComparisonReport> {
    let boundaries = scheme.boundary_set();
    let weights = scheme.weights();
    let a = first.project(&boundaries)?;
    if a.total <= 0.0 {
        return Err(Error::ZeroPaperUnit(a.unit_id));
    }
    let labels = a.class_labels();
    let (second_name, b_counts, n_b) = match reference {
        Reference::Unit(b) => {
            let b = b.project(&boundaries)?;
            if b.total <= 0.0 {
                return Err(Error::ZeroPaperUnit(b.unit_id));
            }
            (b.unit_id.clone(), b.distinct, b.total)
        }
        Reference::Expected => {
            let base = expected_baseline(a.total, scheme);
            (EXPECTED_LABEL.to_string(), base.distinct_expected, a.total)
        }
    };
    let n_a = a.total;

    let weigh = |v: &[f64]| -> Vec<f64> { v.iter().zip(&weights).map(|(c, w)| c * w).collect() };
    let (wa, wb) = (weigh(&a.distinct), weigh(&b_counts));
    let table = contingency_chi_square(
        &ClassVector::new(labels.clone(), wa.clone())?,
        &ClassVector::new(labels.clone(), wb.clone())?,
    )?;

    let p_a: Vec<f64> = a.distinct.iter().map(|c| c / n_a).collect();
    let p_b: Vec<f64> = b_counts.iter().map(|c| c / n_b).collect();
    let w = cohens_w(&p_a, &p_b).ok();

    let mut warnings = Vec::new();
    for &i in &table.dropped {
        warnings.push(format!(
            "class {} is empty in both profiles and was left out of the chi-square test",
            labels[i]
        ));
    }
    if w.is_none() {
        warnings.push("Cohen's w is undefined because a reference class is empty".into());
    }

    let mut rows = Vec::with_capacity(labels.len());
    for (i, label) in labels.iter().enumerate() {
        let expected = if n_a == n_b {
            b_counts[i]
        } else {
            b_counts[i] * n_a / n_b
        };
        let residual = (expected > 0.0).then(|| {
            let value = (a.distinct[i] - expected) / expected.sqrt();
            Residual {
                value,
                label: CriticalValues::Z.label_abs(value),
            }
        });
        rows.push(ComparisonRow {
            label: label.clone(),
            counts: [a.distinct[i], b_counts[i]],
            weighted: [wa[i], wb[i]],
            chi_square: table.rows[i],
            dropped: table.dropped.contains(&i),
            residual,
            i3_per_n: [wa[i] / n_a, wb[i] / n_b],
            proportions: [p_a[i], p_b[i]],
            z: two_proportion_z(a.distinct[i], n_a, b_counts[i], n_b)?,
            cohens_h: cohens_h(p_a[i].min(1.0), p_b[i].min(1.0))?,
            w_contribution: w.as_ref().map(|w| w.contributions[i]),
        });
    }

    let i3 = [wa.iter().sum::<f64>(), wb.iter().sum::<f64>()];
    let chi_critical = CriticalValues::chi_square(table.df);
    let totals = ComparisonTotals {
        n: [n_a, n_b],
        i3,
        i3_per_n: [i3[0] / n_a, i3[1] / n_b],
        chi_square: table.chi_square,
        df: table.df,
        chi_square_label: chi_critical.label(table.chi_square),
        grand_total: table.grand_total,
        cramers_v: cramers_v(table.chi_square, table.grand_total, table.kept_rows(), 2),
        cohens_w: w.map(|w| w.w),
    };
    Ok(ComparisonReport {
        orientation: format!("signed statistics are {} minus {}", a.unit_id, second_name),
        first: a.unit_id.clone(),
        second: second_name,
        scheme: scheme.to_string(),
        rows,
        totals,
        chi_square_critical: chi_critical,
        z_critical: CriticalValues::Z,
        warnings,
    })
}
