use i3_core::analysis::{synthetic_corpus, unit_name, SyntheticConfig};
use i3_core::corpus::{
    ingest_metrics, ingest_publications, validate, write_metrics, write_publications,
    write_publications_json, ExternalMetricsRecord, IngestOptions, InputFormat, MetricsTable,
};

#[test]
fn ten_thousand_generated_rows() {
    let cfg = SyntheticConfig {
        seed: 42,
        units: 40,
        papers_per_unit: 250..=250,
        categories: 6,
        ..Default::default()
    };
    let synth = synthetic_corpus(&cfg).unwrap();
    assert_eq!(synth.corpus.len(), 10_000);

    let mut buf = Vec::new();
    write_publications(&synth.corpus, &mut buf).unwrap();
    let got = ingest_publications(buf.as_slice(), IngestOptions::default()).unwrap();
    assert_eq!(got.rows_read, 10_000);
    assert_eq!(got.corpus.len(), 10_000);
    assert_eq!(got.corpus.unit_sizes(), synth.unit_sizes);
    let total: usize = got.corpus.unit_sizes().values().sum();
    assert_eq!(total, got.corpus.len());
    for (cat, n) in &synth.category_sizes {
        assert_eq!(got.corpus.category_records(cat).count(), *n);
    }

    let mut json = Vec::new();
    write_publications_json(&synth.corpus, &mut json).unwrap();
    let opts = IngestOptions {
        format: InputFormat::JsonLines,
        ..Default::default()
    };
    assert_eq!(
        ingest_publications(json.as_slice(), opts).unwrap().corpus,
        synth.corpus
    );
}

#[test]
fn metrics_round_trip() {
    let mut table = MetricsTable::new();
    for i in 0..50u64 {
        let unit_id = unit_name(i as usize);
        table.insert(
            unit_id.clone(),
            ExternalMetricsRecord {
                unit_id,
                n_pub: Some(100 + i * 7),
                n_cit: (i % 5 != 0).then_some(i * i * 31),
                jif2: Some(i as f64 / 3.0),
                jif5: (i % 7 != 0).then_some(1.0 + i as f64 * 0.123_456_789),
            },
        );
    }
    let mut buf = Vec::new();
    write_metrics(&table, &mut buf).unwrap();
    let back = ingest_metrics(buf.as_slice()).unwrap();
    assert_eq!(back.len(), 50);
    assert_eq!(back, table);
}

#[test]
fn validation_leaves_corpus_untouched() {
    let synth = synthetic_corpus(&SyntheticConfig::default()).unwrap();
    let before = synth.corpus.clone();
    let report = validate(&synth.corpus, None);
    assert!(report.is_clean());
    assert_eq!(synth.corpus, before);
}
