//! Rankings, Spearman correlation, auxiliary indicators, and a seeded corpus generator.

use std::collections::BTreeMap;
use std::ops::RangeInclusive;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal, Normal};
use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, PublicationRecord};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankingRow {
    pub rank: usize,
    pub unit_id: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankingTable {
    pub key: String,
    pub rows: Vec<RankingRow>,
}

/// Sorts units by descending value; equal values are ordered by unit id.
pub fn rank_units<'a, I>(key: &str, values: I, top_k: Option<usize>) -> RankingTable
where
    I: IntoIterator<Item = (&'a str, f64)>,
{
    let mut pairs: Vec<(&str, f64)> = values.into_iter().collect();
    pairs.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    let rows = pairs
        .into_iter()
        .take(top_k.unwrap_or(usize::MAX))
        .enumerate()
        .map(|(i, (unit_id, value))| RankingRow {
            rank: i + 1,
            unit_id: unit_id.to_string(),
            value,
        })
        .collect();
    RankingTable {
        key: key.to_string(),
        rows,
    }
}

/// 1-based ranks with ties given their average position.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        // positions start..end hold ranks start+1 ..= end
        let rank = (start + 1 + end) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = rank;
        }
        start = end;
    }
    ranks
}

fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Spearman's ρ: the Pearson correlation of average ranks.
///
/// Returns `Ok(None)` when either input is constant.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<Option<f64>> {
    if x.len() != y.len() {
        return Err(Error::InvalidInput(format!(
            "lengths differ: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 3 {
        return Err(Error::InvalidInput(
            "spearman needs at least three observations".into(),
        ));
    }
    if x.iter().chain(y).any(|v| v.is_nan()) {
        return Err(Error::InvalidInput("NaN in input".into()));
    }
    Ok(pearson(&average_ranks(x), &average_ranks(y)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationMatrix {
    pub variables: Vec<String>,
    /// Row-major ρ values; `None` where a variable is constant.
    pub values: Vec<Vec<Option<f64>>>,
    pub sample_size: usize,
}

impl CorrelationMatrix {
    pub fn get(&self, a: &str, b: &str) -> Option<f64> {
        let i = self.variables.iter().position(|v| v == a)?;
        let j = self.variables.iter().position(|v| v == b)?;
        self.values[i][j]
    }
}

pub fn correlation_matrix(columns: &[(String, Vec<f64>)]) -> Result<CorrelationMatrix> {
    let n = columns.first().map_or(0, |c| c.1.len());
    if let Some((name, c)) = columns.iter().find(|c| c.1.len() != n) {
        return Err(Error::InvalidInput(format!(
            "column `{name}` has {} values, expected {n}",
            c.len()
        )));
    }
    let k = columns.len();
    let mut values = vec![vec![None; k]; k];
    for i in 0..k {
        for j in i..k {
            let rho = if i == j {
                // a constant column has no defined self-correlation either
                spearman(&columns[i].1, &columns[i].1)?.map(|_| 1.0)
            } else {
                spearman(&columns[i].1, &columns[j].1)?
            };
            values[i][j] = rho;
            values[j][i] = rho;
        }
    }
    Ok(CorrelationMatrix {
        variables: columns.iter().map(|c| c.0.clone()).collect(),
        values,
        sample_size: n,
    })
}

/// Largest h such that h papers have at least h citations each.
pub fn h_index(citations: &[u64]) -> u64 {
    let mut sorted = citations.to_vec();
    sorted.sort_unstable_by(|a, b| b.cmp(a));
    sorted
        .iter()
        .enumerate()
        .take_while(|&(i, &c)| c > i as u64)
        .count() as u64
}

/// Citations per publication.
pub fn mean_citation_rate(total_citations: f64, n: f64) -> Result<f64> {
    if n <= 0.0 {
        return Err(Error::InvalidInput(
            "number of publications must be positive".into(),
        ));
    }
    Ok(total_citations / n)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticConfig {
    pub seed: u64,
    pub units: usize,
    pub papers_per_unit: RangeInclusive<usize>,
    /// Location of log-citations for an average unit.
    pub mu: f64,
    /// Spread of log-citations within a unit.
    pub sigma: f64,
    /// Spread of unit-level shifts of `mu`.
    pub unit_spread: f64,
    pub categories: usize,
    /// Chance that a paper also lists a second category.
    pub multi_category_rate: f64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            units: 10,
            papers_per_unit: 100..=100,
            mu: 1.5,
            sigma: 1.2,
            unit_spread: 0.5,
            categories: 3,
            multi_category_rate: 0.2,
        }
    }
}

/// A generated corpus with the generator's own bookkeeping.
#[derive(Debug, Clone)]
pub struct SyntheticCorpus {
    pub corpus: Corpus,
    pub unit_sizes: BTreeMap<String, usize>,
    pub unit_citations: BTreeMap<String, u64>,
    /// Papers listing each category.
    pub category_sizes: BTreeMap<String, usize>,
}

pub fn unit_name(i: usize) -> String {
    format!("U{i:04}")
}

pub fn category_name(i: usize) -> String {
    format!("C{i:02}")
}

/// Generates a corpus with discretized lognormal citation counts.
///
/// The same configuration always yields the same corpus.
pub fn synthetic_corpus(config: &SyntheticConfig) -> Result<SyntheticCorpus> {
    let bad = |msg: &str| Err(Error::InvalidInput(msg.to_string()));
    if config.units == 0 || config.categories == 0 || *config.papers_per_unit.start() == 0 {
        return bad("units, categories, and papers per unit must be positive");
    }
    if config.papers_per_unit.is_empty() {
        return bad("empty papers-per-unit range");
    }
    if !(config.sigma > 0.0
        && config.unit_spread >= 0.0
        && (0.0..=1.0).contains(&config.multi_category_rate))
    {
        return bad("invalid skew parameters");
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let shift =
        Normal::new(0.0, config.unit_spread).map_err(|e| Error::InvalidInput(e.to_string()))?;
    let mut records = Vec::new();
    let mut unit_sizes = BTreeMap::new();
    let mut unit_citations = BTreeMap::new();
    let mut category_sizes = BTreeMap::new();

    for u in 0..config.units {
        let unit = unit_name(u);
        let size = rng.random_range(config.papers_per_unit.clone());
        let home = u % config.categories;
        let mu = config.mu + shift.sample(&mut rng);
        let dist =
            LogNormal::new(mu, config.sigma).map_err(|e| Error::InvalidInput(e.to_string()))?;
        let mut cited = 0u64;
        for p in 0..size {
            let citations = dist.sample(&mut rng).floor().min(1e12) as u64;
            let mut cats = vec![category_name(home)];
            if config.categories > 1 && rng.random_bool(config.multi_category_rate) {
                let other = (home + rng.random_range(1..config.categories)) % config.categories;
                cats.push(category_name(other));
            }
            for c in &cats {
                *category_sizes.entry(c.clone()).or_insert(0) += 1;
            }
            cited += citations;
            records.push(PublicationRecord {
                paper_id: format!("{unit}-P{p:06}"),
                unit_id: unit.clone(),
                citations,
                categories: cats,
            });
        }
        unit_sizes.insert(unit.clone(), size);
        unit_citations.insert(unit, cited);
    }
    Ok(SyntheticCorpus {
        corpus: Corpus::from_records(records)?,
        unit_sizes,
        unit_citations,
        category_sizes,
    })
}
