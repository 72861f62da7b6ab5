//! Rendering of indicator tables, comparisons, rankings, and correlation matrices.
//!
//! Delimited and Markdown output use fixed decimals: 2 for counts and I3
//! values, 3 for statistics. JSON keeps full precision and deserializes back
//! into the structures it was produced from.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::analysis::{CorrelationMatrix, RankingTable};
use crate::error::Result;
use crate::percentile::{top_label, ClassCounts, ThresholdSet};
use crate::scheme::{IndicatorResult, WeightingScheme};
use crate::stats::ComparisonReport;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
    Markdown,
}

fn c2(v: f64) -> String {
    format!("{v:.2}")
}

fn s3(v: f64) -> String {
    format!("{v:.3}")
}

fn opt3(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".to_string(), s3)
}

fn csv_string(header: &[String], rows: &[Vec<String>]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| std::io::Error::other(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

fn markdown_table(header: &[String], rows: &[Vec<String>]) -> String {
    let mut out = String::new();
    let line = |cells: &[String]| format!("| {} |\n", cells.join(" | "));
    out.push_str(&line(header));
    out.push_str(&format!("|{}\n", "---|".repeat(header.len())));
    for r in rows {
        out.push_str(&line(r));
    }
    out
}

fn render_rows(format: OutputFormat, header: &[String], rows: &[Vec<String>]) -> Result<String> {
    match format {
        OutputFormat::Markdown => Ok(markdown_table(header, rows)),
        _ => csv_string(header, rows),
    }
}

fn json<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

/// One unit's counts and indicator values under one scheme.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndicatorRow {
    pub counts: ClassCounts,
    pub result: IndicatorResult,
}

/// The per-unit indicator table; every row must share one boundary set.
pub fn indicator_table(rows: &[IndicatorRow], format: OutputFormat) -> Result<String> {
    if format == OutputFormat::Json {
        return json(rows);
    }
    let Some(first) = rows.first() else {
        return render_rows(format, &["unit_id".to_string()], &[]);
    };
    let boundaries = &first.counts.boundaries;
    let positive: Vec<f64> = boundaries.iter().copied().filter(|b| *b > 0.0).collect();
    let mut header = vec!["unit_id".to_string(), "n".to_string()];
    header.extend(positive.iter().map(|b| top_label(*b)));
    header.extend(
        first
            .counts
            .class_labels()
            .iter()
            .map(|l| format!("n[{l}]")),
    );
    header.extend(["i3", "i3_per_n", "percent_of_max", "i3_min", "i3_max"].map(String::from));

    let body: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            let mut cells = vec![r.counts.unit_id.clone(), c2(r.counts.total)];
            cells.extend(r.counts.cumulative[..positive.len()].iter().map(|v| c2(*v)));
            cells.extend(r.counts.distinct.iter().map(|v| c2(*v)));
            cells.extend([
                c2(r.result.i3),
                s3(r.result.i3_per_n),
                c2(r.result.percent_of_max),
                c2(r.result.i3_min),
                c2(r.result.i3_max),
            ]);
            cells
        })
        .collect();
    render_rows(format, &header, &body)
}

pub fn threshold_table(thresholds: &ThresholdSet, format: OutputFormat) -> Result<String> {
    if format == OutputFormat::Json {
        return json(thresholds);
    }
    let header = [
        "class",
        "boundary",
        "rank",
        "threshold",
        "above",
        "tied",
        "target",
    ]
    .map(String::from);
    let body: Vec<Vec<String>> = thresholds
        .thresholds
        .iter()
        .map(|t| {
            vec![
                top_label(t.boundary),
                t.boundary.to_string(),
                t.rank.to_string(),
                t.citations.to_string(),
                t.above.to_string(),
                t.tied.to_string(),
                c2(t.target),
            ]
        })
        .collect();
    render_rows(format, &header, &body)
}

/// Step-by-step I3 computation for one unit: nested counts, distinct classes,
/// weights, and weighted values, with an optional field-normalized column.
pub fn breakdown(
    global: &ClassCounts,
    field: Option<&ClassCounts>,
    scheme: &WeightingScheme,
    format: OutputFormat,
) -> Result<String> {
    let boundaries = scheme.boundary_set();
    let global = global.project(&boundaries)?;
    let field = field.map(|f| f.project(&boundaries)).transpose()?;
    let weights = scheme.weights();
    let labels = global.class_labels();

    let mut header = vec!["top set".to_string(), "nested".to_string()];
    if field.is_some() {
        header.push("nested (field)".into());
    }
    header.extend(["class".to_string(), "distinct".to_string()]);
    if field.is_some() {
        header.push("distinct (field)".into());
    }
    header.push("weight".into());
    header.push("I3".into());
    if field.is_some() {
        header.push("I3 (field)".into());
    }

    let mut body = Vec::new();
    for (i, label) in labels.iter().enumerate() {
        let is_bottom = i + 1 == labels.len();
        let mut row = vec![
            if is_bottom {
                String::new()
            } else {
                top_label(global.boundaries[i])
            },
            if is_bottom {
                String::new()
            } else {
                c2(global.cumulative[i])
            },
        ];
        if let Some(f) = &field {
            row.push(if is_bottom {
                String::new()
            } else {
                format!("{:.3}", f.cumulative[i])
            });
        }
        row.push(label.clone());
        row.push(c2(global.distinct[i]));
        if let Some(f) = &field {
            row.push(format!("{:.3}", f.distinct[i]));
        }
        row.push(weights[i].to_string());
        row.push(c2(global.distinct[i] * weights[i]));
        if let Some(f) = &field {
            row.push(c2(f.distinct[i] * weights[i]));
        }
        body.push(row);
    }
    let i3 = |c: &ClassCounts| {
        c.distinct
            .iter()
            .zip(&weights)
            .map(|(n, w)| n * w)
            .sum::<f64>()
    };
    let mut total = vec!["total".to_string(), c2(global.total)];
    if let Some(f) = &field {
        total.push(format!("{:.3}", f.total));
    }
    total.extend([String::new(), c2(global.total)]);
    if let Some(f) = &field {
        total.push(format!("{:.3}", f.total));
    }
    total.push(String::new());
    total.push(c2(i3(&global)));
    if let Some(f) = &field {
        total.push(c2(i3(f)));
    }
    body.push(total);
    render_rows(format, &header, &body)
}

pub fn comparison(report: &ComparisonReport, format: OutputFormat) -> Result<String> {
    match format {
        OutputFormat::Json => json(report),
        OutputFormat::Csv => comparison_csv(report),
        OutputFormat::Markdown => Ok(comparison_markdown(report)),
    }
}

fn comparison_csv(r: &ComparisonReport) -> Result<String> {
    let header = [
        "class",
        "n1",
        "n2",
        "i3_1",
        "i3_2",
        "chi_square",
        "residual",
        "residual_sig",
        "i3_per_n_1",
        "i3_per_n_2",
        "p1",
        "p2",
        "z",
        "z_sig",
        "w_contribution",
        "cohens_h",
    ]
    .map(String::from);
    let mut body: Vec<Vec<String>> = r
        .rows
        .iter()
        .map(|row| {
            vec![
                row.label.clone(),
                c2(row.counts[0]),
                c2(row.counts[1]),
                c2(row.weighted[0]),
                c2(row.weighted[1]),
                s3(row.chi_square),
                opt3(row.residual.map(|x| x.value)),
                row.residual.map_or("n/a".into(), |x| x.label.to_string()),
                s3(row.i3_per_n[0]),
                s3(row.i3_per_n[1]),
                format!("{:.4}", row.proportions[0]),
                format!("{:.4}", row.proportions[1]),
                opt3(row.z.map(|z| z.z)),
                row.z.map_or("n/a".into(), |z| z.label.to_string()),
                opt3(row.w_contribution),
                s3(row.cohens_h),
            ]
        })
        .collect();
    let t = &r.totals;
    let mut sum = vec![
        "sum".to_string(),
        c2(t.n[0]),
        c2(t.n[1]),
        c2(t.i3[0]),
        c2(t.i3[1]),
        s3(t.chi_square),
        String::new(),
        t.chi_square_label.to_string(),
        s3(t.i3_per_n[0]),
        s3(t.i3_per_n[1]),
    ];
    sum.extend([
        String::new(),
        String::new(),
        String::new(),
        String::new(),
        opt3(t.cohens_w),
        String::new(),
    ]);
    body.push(sum);
    csv_string(&header, &body)
}

fn comparison_markdown(r: &ComparisonReport) -> String {
    let t = &r.totals;
    let mut out = String::new();
    let _ = writeln!(out, "## {} vs. {}\n", r.first, r.second);
    let _ = writeln!(out, "Scheme: {}  ", r.scheme);
    let _ = writeln!(out, "Orientation: {}\n", r.orientation);

    let header = [
        "class".to_string(),
        format!("n ({})", r.first),
        format!("n ({})", r.second),
        format!("I3 ({})", r.first),
        format!("I3 ({})", r.second),
        "std. residual".into(),
        "sig.".into(),
        "χ²".into(),
    ];
    let mut body: Vec<Vec<String>> = r
        .rows
        .iter()
        .map(|row| {
            vec![
                row.label.clone(),
                c2(row.counts[0]),
                c2(row.counts[1]),
                c2(row.weighted[0]),
                c2(row.weighted[1]),
                opt3(row.residual.map(|x| x.value)),
                row.residual.map_or("n/a".into(), |x| x.label.to_string()),
                if row.dropped {
                    "dropped".into()
                } else {
                    s3(row.chi_square)
                },
            ]
        })
        .collect();
    body.push(vec![
        "Sum".into(),
        c2(t.n[0]),
        c2(t.n[1]),
        c2(t.i3[0]),
        c2(t.i3[1]),
        String::new(),
        String::new(),
        format!(
            "χ² = {}, df = {}, {}",
            s3(t.chi_square),
            t.df,
            t.chi_square_label
        ),
    ]);
    out.push_str(&markdown_table(&header, &body));
    let _ = writeln!(out, "\nCramér's V = {}\n", s3(t.cramers_v));

    let header = [
        "class".to_string(),
        format!("I3/N ({})", r.first),
        format!("I3/N ({})", r.second),
        "p1".into(),
        "p2".into(),
        "z".into(),
        "sig.".into(),
        "Cohen's w".into(),
        "Cohen's h".into(),
    ];
    let mut body: Vec<Vec<String>> = r
        .rows
        .iter()
        .map(|row| {
            vec![
                row.label.clone(),
                s3(row.i3_per_n[0]),
                s3(row.i3_per_n[1]),
                format!("{:.4}", row.proportions[0]),
                format!("{:.4}", row.proportions[1]),
                opt3(row.z.map(|z| z.z)),
                row.z.map_or("n/a".into(), |z| z.label.to_string()),
                opt3(row.w_contribution),
                s3(row.cohens_h),
            ]
        })
        .collect();
    body.push(vec![
        "Sum".into(),
        s3(t.i3_per_n[0]),
        s3(t.i3_per_n[1]),
        format!(
            "{:.4}",
            r.rows.iter().map(|x| x.proportions[0]).sum::<f64>()
        ),
        format!(
            "{:.4}",
            r.rows.iter().map(|x| x.proportions[1]).sum::<f64>()
        ),
        String::new(),
        String::new(),
        opt3(t.cohens_w),
        String::new(),
    ]);
    out.push_str(&markdown_table(&header, &body));

    let _ = writeln!(
        out,
        "\nCritical values (statistics above them are significant):\n"
    );
    let header = [
        "".to_string(),
        format!("χ², df = {}", t.df),
        "z".to_string(),
    ];
    let (c, z) = (&r.chi_square_critical, &r.z_critical);
    let body = vec![
        vec!["p < 0.001".to_string(), s3(c.p001), s3(z.p001)],
        vec!["p < 0.01".to_string(), s3(c.p01), s3(z.p01)],
        vec!["p < 0.05".to_string(), s3(c.p05), s3(z.p05)],
    ];
    out.push_str(&markdown_table(&header, &body));
    for w in &r.warnings {
        let _ = writeln!(out, "\nWarning: {w}");
    }
    out
}

pub fn ranking(table: &RankingTable, format: OutputFormat) -> Result<String> {
    if format == OutputFormat::Json {
        return json(table);
    }
    let header = ["rank".to_string(), "unit_id".to_string(), table.key.clone()];
    let body: Vec<Vec<String>> = table
        .rows
        .iter()
        .map(|r| vec![r.rank.to_string(), r.unit_id.clone(), c2(r.value)])
        .collect();
    render_rows(format, &header, &body)
}

pub fn correlation(matrix: &CorrelationMatrix, format: OutputFormat) -> Result<String> {
    if format == OutputFormat::Json {
        return json(matrix);
    }
    let mut header = vec![String::new()];
    header.extend(matrix.variables.iter().cloned());
    let body: Vec<Vec<String>> = matrix
        .variables
        .iter()
        .zip(&matrix.values)
        .map(|(name, row)| {
            let mut cells = vec![name.clone()];
            cells.extend(row.iter().map(|v| opt3(*v)));
            cells
        })
        .collect();
    let mut out = render_rows(format, &header, &body)?;
    if format == OutputFormat::Markdown {
        let _ = writeln!(out, "\nSpearman's ρ, N = {}", matrix.sample_size);
    }
    Ok(out)
}
