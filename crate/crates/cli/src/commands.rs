use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use anyhow::{anyhow, Context};
use i3_core::analysis::{correlation_matrix, rank_units, synthetic_corpus, SyntheticConfig};
use i3_core::corpus::{
    ingest_metrics, ingest_publications, validate, write_publications, Corpus,
    ExternalMetricsRecord, IngestOptions, InputFormat,
};
use i3_core::percentile::{class_counts_field_normalized, class_counts_global};
use i3_core::report::{self, IndicatorRow, OutputFormat};
use i3_core::scheme::indicator_result;
use i3_core::stats::{compare, Reference};
use i3_core::{ClassCounts, CountingMode, WeightingScheme};

use super::{
    CliError, Command, CompareArgs, ComputeArgs, CorrelateArgs, IndicatorArgs, InputArgs,
    InputFormatArg, NormalizeArg, OutputArgs, RankArgs, RankKey, SimulateArgs, ValidateArgs,
};

type CmdResult = Result<(), CliError>;
type MetricGetter = fn(&ExternalMetricsRecord) -> Option<f64>;

pub fn run(command: Command) -> CmdResult {
    match command {
        Command::Compute(args) => compute(args),
        Command::Compare(args) => compare_units(args),
        Command::Rank(args) => rank(args),
        Command::Correlate(args) => correlate(args),
        Command::Simulate(args) => simulate(args),
        Command::Validate(args) => validate_input(args),
    }
}

/// Resolved scheme and counting settings.
struct Settings {
    scheme: WeightingScheme,
    mode: CountingMode,
    field: bool,
}

fn settings(args: &IndicatorArgs) -> Result<Settings, CliError> {
    let scheme =
        WeightingScheme::parse(&args.scheme).map_err(|e| CliError::Usage(e.to_string()))?;
    let field = args.normalize == NormalizeArg::Field;
    let mode = match (field, args.mode) {
        (true, Some(super::ModeArg::AtOrAbove)) => {
            return Err(CliError::Usage(
                "field normalization always shares ties fractionally; drop --mode at-or-above"
                    .into(),
            ))
        }
        (true, _) => CountingMode::FractionalTies,
        (false, m) => m.map_or(CountingMode::AtOrAbove, Into::into),
    };
    Ok(Settings {
        scheme,
        mode,
        field,
    })
}

fn load_corpus(args: &InputArgs) -> Result<Corpus, CliError> {
    let file =
        File::open(&args.input).with_context(|| format!("cannot open {}", args.input.display()))?;
    let options = IngestOptions {
        format: match args.input_format {
            InputFormatArg::Csv => InputFormat::Delimited,
            InputFormatArg::Jsonl => InputFormat::JsonLines,
        },
        ..Default::default()
    };
    let ingested = ingest_publications(BufReader::new(file), options)
        .with_context(|| format!("cannot read publications from {}", args.input.display()))?;
    Ok(ingested.corpus)
}

fn class_counts(
    corpus: &Corpus,
    s: &Settings,
    field: bool,
) -> anyhow::Result<BTreeMap<String, ClassCounts>> {
    let boundaries = s.scheme.boundary_set();
    Ok(if field {
        class_counts_field_normalized(corpus, &boundaries)?
    } else {
        class_counts_global(corpus, &boundaries, s.mode)?
    })
}

fn emit(output: Option<&Path>, text: &str) -> CmdResult {
    match output {
        Some(path) => {
            let mut f = BufWriter::new(
                File::create(path).with_context(|| format!("cannot write {}", path.display()))?,
            );
            f.write_all(text.as_bytes())?;
            f.flush()?;
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            lock.write_all(text.as_bytes())?;
            lock.flush()?;
        }
    }
    Ok(())
}

fn emit_to(output: &OutputArgs, text: &str) -> CmdResult {
    emit(output.output.as_deref(), text)
}

fn unknown_unit(unit: &str) -> CliError {
    CliError::Data(anyhow!("unknown unit `{unit}`"))
}

fn compute(args: ComputeArgs) -> CmdResult {
    let s = settings(&args.indicator)?;
    let corpus = load_corpus(&args.input)?;
    let format: OutputFormat = args.output.format.into();
    if let Some(unit) = &args.unit {
        if !corpus.contains_unit(unit) {
            return Err(unknown_unit(unit));
        }
    }

    if args.breakdown {
        let unit = args.unit.as_deref().expect("clap enforces --unit");
        let global = class_counts(&corpus, &s, false)?
            .remove(unit)
            .ok_or_else(|| unknown_unit(unit))?;
        let field = class_counts(&corpus, &s, true)?.remove(unit);
        let text = report::breakdown(&global, field.as_ref(), &s.scheme, format)?;
        return emit_to(&args.output, &text);
    }

    let counts = class_counts(&corpus, &s, s.field)?;
    let rows = counts
        .into_values()
        .filter(|c| args.unit.as_ref().is_none_or(|u| *u == c.unit_id))
        .map(|counts| {
            let result = indicator_result(&counts, &s.scheme)?;
            Ok(IndicatorRow { counts, result })
        })
        .collect::<anyhow::Result<Vec<_>>>()?;
    emit_to(&args.output, &report::indicator_table(&rows, format)?)
}

fn compare_units(args: CompareArgs) -> CmdResult {
    let s = settings(&args.indicator)?;
    if args.unit_b.is_none() && !args.expected {
        return Err(CliError::Usage("give a second unit or --expected".into()));
    }
    let corpus = load_corpus(&args.input)?;
    let counts = class_counts(&corpus, &s, s.field)?;
    let first = counts
        .get(&args.unit_a)
        .ok_or_else(|| unknown_unit(&args.unit_a))?;
    let reference = match &args.unit_b {
        Some(b) => Reference::Unit(counts.get(b).ok_or_else(|| unknown_unit(b))?),
        None => Reference::Expected,
    };
    let comparison = compare(first, reference, &s.scheme)?;
    for w in &comparison.warnings {
        eprintln!("warning: {w}");
    }
    emit_to(
        &args.output,
        &report::comparison(&comparison, args.output.format.into())?,
    )
}

fn indicator_values(
    corpus: &Corpus,
    s: &Settings,
    field: bool,
) -> anyhow::Result<BTreeMap<String, (f64, f64)>> {
    class_counts(corpus, s, field)?
        .into_iter()
        .map(|(u, c)| {
            let r = indicator_result(&c, &s.scheme)?;
            Ok((u, (r.i3, r.i3_per_n)))
        })
        .collect()
}

fn rank(args: RankArgs) -> CmdResult {
    let s = settings(&args.indicator)?;
    let corpus = load_corpus(&args.input)?;
    let (key, values): (&str, BTreeMap<String, f64>) = match args.by {
        RankKey::I3 => (
            "i3",
            indicator_values(&corpus, &s, s.field)?
                .into_iter()
                .map(|(u, v)| (u, v.0))
                .collect(),
        ),
        RankKey::I3PerN => (
            "i3_per_n",
            indicator_values(&corpus, &s, s.field)?
                .into_iter()
                .map(|(u, v)| (u, v.1))
                .collect(),
        ),
        RankKey::I3Field => (
            "i3_field",
            indicator_values(&corpus, &s, true)?
                .into_iter()
                .map(|(u, v)| (u, v.0))
                .collect(),
        ),
    };
    let table = rank_units(key, values.iter().map(|(u, v)| (u.as_str(), *v)), args.top);
    emit_to(
        &args.output,
        &report::ranking(&table, args.output.format.into())?,
    )
}

fn correlate(args: CorrelateArgs) -> CmdResult {
    let s = settings(&args.indicator)?;
    let corpus = load_corpus(&args.input)?;
    let file = File::open(&args.metrics)
        .with_context(|| format!("cannot open {}", args.metrics.display()))?;
    let metrics = ingest_metrics(BufReader::new(file))
        .with_context(|| format!("cannot read metrics from {}", args.metrics.display()))?;

    let global = indicator_values(&corpus, &s, false)?;
    let field = indicator_values(&corpus, &s, true)?;
    let joined: Vec<&str> = metrics
        .keys()
        .map(String::as_str)
        .filter(|u| corpus.contains_unit(u))
        .collect();
    if joined.len() < 3 {
        return Err(CliError::Data(anyhow!(
            "only {} units appear in both the publications and the metrics file; at least 3 are needed",
            joined.len()
        )));
    }

    let mut columns: Vec<(String, Vec<f64>)> = Vec::new();
    let external: [(&str, MetricGetter); 4] = [
        ("n_pub", |m| m.n_pub.map(|v| v as f64)),
        ("n_cit", |m| m.n_cit.map(|v| v as f64)),
        ("jif2", |m| m.jif2),
        ("jif5", |m| m.jif5),
    ];
    for (name, get) in external {
        let values: Option<Vec<f64>> = joined.iter().map(|u| get(&metrics[*u])).collect();
        match values {
            Some(v) => columns.push((name.to_string(), v)),
            None => eprintln!(
                "warning: column {name} is incomplete for the joined units and was left out"
            ),
        }
    }
    columns.push(("i3".into(), joined.iter().map(|u| global[*u].0).collect()));
    columns.push((
        "i3_field".into(),
        joined.iter().map(|u| field[*u].0).collect(),
    ));
    columns.push((
        "i3_per_n".into(),
        joined.iter().map(|u| global[*u].1).collect(),
    ));

    let matrix = correlation_matrix(&columns)?;
    emit_to(
        &args.output,
        &report::correlation(&matrix, args.output.format.into())?,
    )
}

fn simulate(args: SimulateArgs) -> CmdResult {
    if args.papers_min > args.papers_max {
        return Err(CliError::Usage("--papers-min exceeds --papers-max".into()));
    }
    let config = SyntheticConfig {
        seed: args.seed,
        units: args.units,
        papers_per_unit: args.papers_min..=args.papers_max,
        mu: args.mu,
        sigma: args.sigma,
        unit_spread: args.unit_spread,
        categories: args.categories,
        multi_category_rate: args.multi_category_rate,
    };
    let synth = synthetic_corpus(&config).map_err(|e| CliError::Usage(e.to_string()))?;
    let file = File::create(&args.output)
        .with_context(|| format!("cannot write {}", args.output.display()))?;
    let mut w = BufWriter::new(file);
    write_publications(&synth.corpus, &mut w)?;
    w.flush()?;

    let mut summary = String::from("unit_id,papers,citations\n");
    for (unit, size) in &synth.unit_sizes {
        summary.push_str(&format!("{unit},{size},{}\n", synth.unit_citations[unit]));
    }
    eprintln!(
        "wrote {} papers in {} units and {} categories to {}",
        synth.corpus.len(),
        synth.unit_sizes.len(),
        synth.category_sizes.len(),
        args.output.display()
    );
    emit(None, &summary)
}

fn validate_input(args: ValidateArgs) -> CmdResult {
    let corpus = load_corpus(&args.input)?;
    let metrics = match &args.metrics {
        Some(path) => {
            let file =
                File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
            Some(
                ingest_metrics(BufReader::new(file))
                    .with_context(|| format!("cannot read metrics from {}", path.display()))?,
            )
        }
        None => None,
    };
    let report = validate(&corpus, metrics.as_ref());
    eprintln!(
        "{} records, {} anomalies",
        corpus.len(),
        report.anomalies.len()
    );
    let text = match OutputFormat::from(args.format) {
        OutputFormat::Json => serde_json_pretty(&report)?,
        _ => report.anomalies.iter().map(|a| format!("{a}\n")).collect(),
    };
    emit(None, &text)
}

fn serde_json_pretty(report: &i3_core::corpus::ValidationReport) -> anyhow::Result<String> {
    let mut s = serde_json::to_string_pretty(report)?;
    s.push('\n');
    Ok(s)
}
