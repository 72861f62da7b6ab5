//! Citation thresholds for percentile boundaries and per-unit class membership.
//!
//! A boundary `b` names the top-(100 − b)% of a population. Its threshold is
//! the citation count of the paper at descending rank ⌈n·(100 − b)/100⌉. Papers
//! tied at the threshold are either all counted as top papers
//! ([`CountingMode::AtOrAbove`]) or share the residual mass so that the top
//! set holds exactly its nominal share ([`CountingMode::FractionalTies`]).

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, PublicationRecord};
use crate::error::{Error, Result};
use crate::scheme::distinct_counts;

/// Tolerance for the tie factor leaving `[0, 1]` before it is treated as an error.
const TIE_FACTOR_SLACK: f64 = 1e-9;

/// Percentile lower bounds, ascending, starting at 0 and all below 100.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct BoundarySet(Vec<f64>);

impl BoundarySet {
    pub fn new(boundaries: Vec<f64>) -> Result<Self> {
        let bad = |msg: &str| Err(Error::InvalidBoundaries(format!("{msg}: {boundaries:?}")));
        if boundaries.first() != Some(&0.0) {
            return bad("first boundary must be 0");
        }
        if boundaries.iter().any(|b| !b.is_finite() || *b >= 100.0) {
            return bad("boundaries must be finite and below 100");
        }
        if boundaries.windows(2).any(|w| w[0] >= w[1]) {
            return bad("boundaries must be strictly increasing");
        }
        Ok(Self(boundaries))
    }

    /// The boundary set used by the I3* classes: 0, 50, 90, 99.
    pub fn standard() -> Self {
        Self(vec![0.0, 50.0, 90.0, 99.0])
    }

    pub fn ascending(&self) -> &[f64] {
        &self.0
    }

    /// Boundaries from the top class down, ending with 0.
    pub fn descending(&self) -> Vec<f64> {
        self.0.iter().rev().copied().collect()
    }

    /// Positive boundaries from the top class down.
    pub fn positive_descending(&self) -> Vec<f64> {
        self.0.iter().rev().copied().filter(|b| *b > 0.0).collect()
    }

    pub fn contains(&self, boundary: f64) -> bool {
        self.0.contains(&boundary)
    }

    pub fn union(&self, other: &BoundarySet) -> BoundarySet {
        let mut all: Vec<f64> = self.0.iter().chain(&other.0).copied().collect();
        all.sort_by(f64::total_cmp);
        all.dedup();
        BoundarySet(all)
    }
}

impl TryFrom<Vec<f64>> for BoundarySet {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<BoundarySet> for Vec<f64> {
    fn from(b: BoundarySet) -> Self {
        b.0
    }
}

/// Human-readable label for the class starting at `lower` and ending below `upper`.
pub fn class_label(lower: f64, upper: f64) -> String {
    let int = |x: f64| x.fract() == 0.0;
    if upper >= 100.0 {
        format!("{lower}-100")
    } else if int(lower) && int(upper) {
        format!("{lower}-{}", upper - 1.0)
    } else {
        format!("{lower}-{upper}")
    }
}

/// Label for the cumulative top set above boundary `b`, e.g. `top-10%`.
pub fn top_label(boundary: f64) -> String {
    let share = 100.0 - boundary;
    // 100 - 99.9 is not exactly 0.1
    let share = (share * 1e9).round() / 1e9;
    format!("top-{share}%")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CountingMode {
    /// Every paper with citations ≥ threshold counts fully.
    #[default]
    AtOrAbove,
    /// Papers at the threshold share the mass left over by papers above it.
    FractionalTies,
}

/// Threshold and population context for one boundary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Threshold {
    pub boundary: f64,
    /// 1-based descending rank of the delimiting paper.
    pub rank: usize,
    pub citations: u64,
    /// Population papers strictly above the threshold.
    pub above: usize,
    /// Population papers with exactly the threshold count.
    pub tied: usize,
    /// Nominal size of the top set, n·(100 − b)/100.
    pub target: f64,
}

impl Threshold {
    /// Share of each tied paper assigned to the top set.
    pub fn tie_fraction(&self) -> Result<f64> {
        let above = self.above as f64;
        if self.tied == 0 {
            if above > self.target + TIE_FACTOR_SLACK {
                return Err(Error::InconsistentContext(format!(
                    "{} papers above threshold exceed target {} with no ties",
                    self.above, self.target
                )));
            }
            return Ok(0.0);
        }
        let raw = (self.target - above) / self.tied as f64;
        if !(-TIE_FACTOR_SLACK..=1.0 + TIE_FACTOR_SLACK).contains(&raw) {
            return Err(Error::InconsistentContext(format!(
                "tie fraction {raw} outside [0, 1] (above {}, tied {}, target {})",
                self.above, self.tied, self.target
            )));
        }
        Ok(raw.clamp(0.0, 1.0))
    }

    /// Population mass in the top set under `mode`.
    pub fn top_mass(&self, mode: CountingMode) -> Result<f64> {
        Ok(match mode {
            CountingMode::AtOrAbove => (self.above + self.tied) as f64,
            CountingMode::FractionalTies => {
                self.above as f64 + self.tied as f64 * self.tie_fraction()?
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdSet {
    pub population_size: usize,
    /// One entry per positive boundary, top class first.
    pub thresholds: Vec<Threshold>,
}

impl ThresholdSet {
    pub fn get(&self, boundary: f64) -> Option<&Threshold> {
        self.thresholds.iter().find(|t| t.boundary == boundary)
    }

    pub fn positive_boundaries(&self) -> Vec<f64> {
        self.thresholds.iter().map(|t| t.boundary).collect()
    }
}

/// Descending rank delimiting the top-(100 − b)% of `n` papers.
pub fn threshold_rank(n: usize, boundary: f64) -> usize {
    let target = n as f64 * (100.0 - boundary) / 100.0;
    // guards against 100 - b carrying representation error for fractional b
    let rank = (target - 1e-9).ceil();
    (rank.max(1.0) as usize).min(n)
}

pub fn compute_thresholds(citations: &[u64], boundaries: &BoundarySet) -> Result<ThresholdSet> {
    if citations.is_empty() {
        return Err(Error::EmptyPopulation);
    }
    let mut sorted = citations.to_vec();
    sorted.sort_unstable_by(|a, b| b.cmp(a));
    let n = sorted.len();

    let thresholds = boundaries
        .positive_descending()
        .into_iter()
        .map(|boundary| {
            let rank = threshold_rank(n, boundary);
            let value = sorted[rank - 1];
            let above = sorted.partition_point(|&c| c > value);
            let at_or_above = sorted.partition_point(|&c| c >= value);
            Threshold {
                boundary,
                rank,
                citations: value,
                above,
                tied: at_or_above - above,
                target: n as f64 * (100.0 - boundary) / 100.0,
            }
        })
        .collect();
    Ok(ThresholdSet {
        population_size: n,
        thresholds,
    })
}

#[inline]
fn membership(citations: u64, threshold: u64, tie_share: f64) -> f64 {
    use std::cmp::Ordering::*;
    match citations.cmp(&threshold) {
        Greater => 1.0,
        Equal => tie_share,
        Less => 0.0,
    }
}

fn tie_share(threshold: &Threshold, mode: CountingMode) -> Result<f64> {
    match mode {
        CountingMode::AtOrAbove => Ok(1.0),
        CountingMode::FractionalTies => threshold.tie_fraction(),
    }
}

/// Number of a unit's papers falling in the top set described by `threshold`.
pub fn count_top<I>(unit_citations: I, threshold: &Threshold, mode: CountingMode) -> Result<f64>
where
    I: IntoIterator<Item = u64>,
{
    let share = tie_share(threshold, mode)?;
    Ok(unit_citations
        .into_iter()
        .map(|c| membership(c, threshold.citations, share))
        .sum())
}

/// Real-valued paper counts for one unit, per nested top set and per distinct class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassCounts {
    pub unit_id: String,
    /// Class lower bounds from the top class down, ending with 0.
    pub boundaries: Vec<f64>,
    /// Papers in the top-(100 − b)% for each boundary; the entry for 0 equals `total`.
    pub cumulative: Vec<f64>,
    /// Papers in exactly one class, aligned with `boundaries`.
    pub distinct: Vec<f64>,
    pub total: f64,
}

impl ClassCounts {
    /// Builds counts from nested top-set counts given for each positive boundary.
    pub fn from_cumulative(
        unit_id: impl Into<String>,
        boundaries: &BoundarySet,
        positive_cumulative: &[f64],
        total: f64,
    ) -> Result<Self> {
        let positive = boundaries.positive_descending();
        if positive.len() != positive_cumulative.len() {
            return Err(Error::InvalidBoundaries(format!(
                "{} cumulative counts for {} positive boundaries",
                positive_cumulative.len(),
                positive.len()
            )));
        }
        let distinct = distinct_counts(positive_cumulative, total)?;
        let mut cumulative = positive_cumulative.to_vec();
        cumulative.push(total);
        Ok(Self {
            unit_id: unit_id.into(),
            boundaries: boundaries.descending(),
            cumulative,
            distinct,
            total,
        })
    }

    pub fn boundary_set(&self) -> BoundarySet {
        BoundarySet(self.boundaries.iter().rev().copied().collect())
    }

    pub fn cumulative_at(&self, boundary: f64) -> Option<f64> {
        self.boundaries
            .iter()
            .position(|&b| b == boundary)
            .map(|i| self.cumulative[i])
    }

    /// Distinct-class labels, top class first.
    pub fn class_labels(&self) -> Vec<String> {
        let mut upper = 100.0;
        self.boundaries
            .iter()
            .map(|&b| {
                let label = class_label(b, upper);
                upper = b;
                label
            })
            .collect()
    }

    /// Re-aggregates onto a coarser boundary set contained in this one.
    pub fn project(&self, target: &BoundarySet) -> Result<ClassCounts> {
        if target.ascending() == self.boundary_set().ascending() {
            return Ok(self.clone());
        }
        let cumulative = target
            .positive_descending()
            .into_iter()
            .map(|b| self.cumulative_at(b))
            .collect::<Option<Vec<f64>>>()
            .ok_or_else(|| Error::BoundaryMismatch {
                counts: self.boundaries.clone(),
                scheme: target.descending(),
            })?;
        ClassCounts::from_cumulative(self.unit_id.clone(), target, &cumulative, self.total)
    }
}

fn unit_counts<'a>(
    unit_id: &str,
    records: impl Iterator<Item = &'a PublicationRecord> + Clone,
    boundaries: &BoundarySet,
    thresholds: &ThresholdSet,
    shares: &[f64],
) -> Result<ClassCounts> {
    let cumulative: Vec<f64> = thresholds
        .thresholds
        .iter()
        .zip(shares)
        .map(|(t, &share)| {
            records
                .clone()
                .map(|r| membership(r.citations, t.citations, share))
                .sum()
        })
        .collect();
    let total = records.count() as f64;
    ClassCounts::from_cumulative(unit_id, boundaries, &cumulative, total)
}

/// Counts for every unit against thresholds taken over the whole corpus.
pub fn class_counts_global(
    corpus: &Corpus,
    boundaries: &BoundarySet,
    mode: CountingMode,
) -> Result<BTreeMap<String, ClassCounts>> {
    let thresholds = compute_thresholds(&corpus.citations(), boundaries)?;
    let shares = thresholds
        .thresholds
        .iter()
        .map(|t| tie_share(t, mode))
        .collect::<Result<Vec<f64>>>()?;
    let units: Vec<&str> = corpus.unit_ids().collect();
    units
        .par_iter()
        .map(|&u| {
            let counts = unit_counts(u, corpus.unit_records(u), boundaries, &thresholds, &shares)?;
            Ok((u.to_string(), counts))
        })
        .collect()
}

/// Thresholds and tie shares for one category's sub-population.
struct CategoryThresholds {
    thresholds: ThresholdSet,
    shares: Vec<f64>,
}

/// Counts for every unit with thresholds taken per subject category.
///
/// A record listed in k categories contributes 1/k of a paper to each of them
/// and is classified against that category's thresholds, with ties shared
/// fractionally. The unit total therefore stays equal to its record count.
pub fn class_counts_field_normalized(
    corpus: &Corpus,
    boundaries: &BoundarySet,
) -> Result<BTreeMap<String, ClassCounts>> {
    if corpus.is_empty() {
        return Err(Error::EmptyPopulation);
    }
    if let Some(r) = corpus.records().iter().find(|r| r.categories.is_empty()) {
        return Err(Error::NoCategories(r.paper_id.clone()));
    }
    let labels: Vec<&str> = corpus.category_labels().collect();
    let per_category: BTreeMap<&str, CategoryThresholds> = labels
        .par_iter()
        .map(|&label| {
            let citations: Vec<u64> = corpus
                .category_records(label)
                .map(|r| r.citations)
                .collect();
            assert!(
                !citations.is_empty(),
                "category `{label}` indexed without records"
            );
            let thresholds = compute_thresholds(&citations, boundaries)?;
            let shares = thresholds
                .thresholds
                .iter()
                .map(Threshold::tie_fraction)
                .collect::<Result<Vec<f64>>>()?;
            Ok((label, CategoryThresholds { thresholds, shares }))
        })
        .collect::<Result<_>>()?;

    let positive = boundaries.positive_descending();
    let units: Vec<&str> = corpus.unit_ids().collect();
    units
        .par_iter()
        .map(|&u| {
            let mut cumulative = vec![0.0; positive.len()];
            let mut total = 0usize;
            for record in corpus.unit_records(u) {
                total += 1;
                let cats = record.distinct_categories();
                let weight = 1.0 / cats.len() as f64;
                for cat in cats {
                    let ct = &per_category[cat];
                    for (slot, (t, &share)) in cumulative
                        .iter_mut()
                        .zip(ct.thresholds.thresholds.iter().zip(&ct.shares))
                    {
                        *slot += weight * membership(record.citations, t.citations, share);
                    }
                }
            }
            let counts = ClassCounts::from_cumulative(u, boundaries, &cumulative, total as f64)?;
            Ok((u.to_string(), counts))
        })
        .collect()
}

/// Population-wide mass in each top set, top class first.
pub fn population_top_mass(thresholds: &ThresholdSet, mode: CountingMode) -> Result<Vec<f64>> {
    thresholds
        .thresholds
        .iter()
        .map(|t| t.top_mass(mode))
        .collect()
}
