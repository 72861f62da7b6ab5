//! Corpora with prescribed per-class paper counts.
//!
//! Each class of a boundary set gets one citation value (higher classes get
//! higher values) and holds exactly its nominal share of the population, so
//! thresholds fall cleanly between classes and both counting modes return the
//! prescribed counts. Papers not claimed by a named unit go to a filler unit.

use crate::corpus::{Corpus, PublicationRecord};
use crate::error::{Error, Result};
use crate::percentile::BoundarySet;

/// A unit and its paper count per distinct class, top class first.
#[derive(Debug, Clone, PartialEq)]
pub struct LayeredUnit {
    pub unit_id: String,
    pub class_sizes: Vec<usize>,
}

impl LayeredUnit {
    pub fn new(unit_id: impl Into<String>, class_sizes: impl Into<Vec<usize>>) -> Self {
        Self {
            unit_id: unit_id.into(),
            class_sizes: class_sizes.into(),
        }
    }
}

/// Citation count given to every paper of class `index` (0 = top) out of `classes`.
pub fn layer_citations(index: usize, classes: usize) -> u64 {
    10u64.pow((classes - 1 - index) as u32)
}

pub fn layered_corpus(
    boundaries: &BoundarySet,
    units: &[LayeredUnit],
    population: usize,
    filler_id: &str,
    category: &str,
) -> Result<Corpus> {
    let descending = boundaries.descending();
    let classes = descending.len();
    let mut capacity = Vec::with_capacity(classes);
    let mut upper = 100.0;
    for &b in &descending {
        let size = population as f64 * (upper - b) / 100.0;
        if size.fract() != 0.0 {
            return Err(Error::InvalidInput(format!(
                "class {b}-{upper} of a population of {population} is not a whole number of papers"
            )));
        }
        capacity.push(size as usize);
        upper = b;
    }

    let mut records = Vec::with_capacity(population);
    let mut used = vec![0usize; classes];
    for unit in units {
        if unit.class_sizes.len() != classes {
            return Err(Error::InvalidInput(format!(
                "unit `{}` gives {} class sizes for {classes} classes",
                unit.unit_id,
                unit.class_sizes.len()
            )));
        }
        push_unit(
            &mut records,
            &unit.unit_id,
            &unit.class_sizes,
            classes,
            category,
        );
        for (u, s) in used.iter_mut().zip(&unit.class_sizes) {
            *u += s;
        }
    }
    let filler: Vec<usize> = capacity
        .iter()
        .zip(&used)
        .map(|(&cap, &u)| {
            cap.checked_sub(u).ok_or_else(|| {
                Error::InvalidInput(format!("class sizes exceed class capacity {cap}"))
            })
        })
        .collect::<Result<_>>()?;
    push_unit(&mut records, filler_id, &filler, classes, category);
    Corpus::from_records(records)
}

fn push_unit(
    records: &mut Vec<PublicationRecord>,
    unit_id: &str,
    sizes: &[usize],
    classes: usize,
    category: &str,
) {
    let mut serial = 0;
    for (class, &size) in sizes.iter().enumerate() {
        for _ in 0..size {
            records.push(PublicationRecord::new(
                format!("{unit_id}#{serial:07}"),
                unit_id,
                layer_citations(class, classes),
                [category],
            ));
            serial += 1;
        }
    }
}

/// PLOS One and RSC Advances sized as in the worked example, in a population of 60,000.
pub fn worked_example_corpus() -> Corpus {
    layered_corpus(
        &BoundarySet::standard(),
        &[
            LayeredUnit::new("PLOS ONE", [91, 2454, 17596, 9901]),
            LayeredUnit::new("RSC ADV", [30, 879, 5010, 2516]),
        ],
        60_000,
        "OTHER",
        "Multidisciplinary",
    )
    .expect("worked example fits its population")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::percentile::{class_counts_global, CountingMode};

    #[test]
    fn worked_example_counts_in_both_modes() {
        let corpus = worked_example_corpus();
        assert_eq!(corpus.len(), 60_000);
        for mode in [CountingMode::AtOrAbove, CountingMode::FractionalTies] {
            let counts = class_counts_global(&corpus, &BoundarySet::standard(), mode).unwrap();
            assert_eq!(
                counts["PLOS ONE"].cumulative,
                vec![91.0, 2545.0, 20141.0, 30042.0]
            );
            assert_eq!(
                counts["RSC ADV"].distinct,
                vec![30.0, 879.0, 5010.0, 2516.0]
            );
        }
    }

    #[test]
    fn rejects_overfull_or_fractional_layers() {
        let b = BoundarySet::standard();
        assert!(layered_corpus(&b, &[LayeredUnit::new("A", [2, 0, 0, 0])], 100, "F", "X").is_err());
        assert!(layered_corpus(&b, &[], 150, "F", "X").is_err());
        assert!(layered_corpus(&b, &[LayeredUnit::new("A", [1, 0])], 100, "F", "X").is_err());
    }
}
