//! CSV files, the gnuplot script and the console summary.

use std::path::Path;

use serde::Serialize;
use voteops_core::{ScalingReport, TrialRecord};

pub fn write_rows<T: Serialize>(path: &Path, rows: &[T]) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// `rule,behavior,n,trial,seed,status,value,elapsed_ms`.
pub fn write_trials(path: &Path, trials: &[TrialRecord]) -> Result<(), csv::Error> {
    write_rows(path, trials)
}

#[derive(Serialize)]
struct SummaryRow<'a> {
    rule: &'a str,
    behavior: String,
    n: u64,
    zero_frac: f64,
    inf_frac: f64,
    median: Option<f64>,
    q25: Option<f64>,
    q75: Option<f64>,
    slope: Option<f64>,
    category: String,
}

/// `rule,behavior,n,zero_frac,inf_frac,median,q25,q75,slope,category`, one
/// row per `n`.
pub fn write_summary(path: &Path, report: &ScalingReport) -> Result<(), csv::Error> {
    let rows: Vec<SummaryRow> = report
        .per_n
        .iter()
        .map(|p| SummaryRow {
            rule: &report.rule,
            behavior: report.behavior.to_string(),
            n: p.n,
            zero_frac: p.zero_frac(),
            inf_frac: p.inf_frac(),
            median: p.median,
            q25: p.q25,
            q75: p.q75,
            slope: report.slope,
            category: report.category.to_string(),
        })
        .collect();
    write_rows(path, &rows)
}

#[derive(Serialize)]
pub struct ConcentrationRow {
    pub n: u64,
    pub inside: u64,
    pub trials: u64,
    pub fraction: f64,
    pub std_err: f64,
}

/// Log-log plot of the medians with interquartile bars and `√n`, `n`
/// reference lines through the first median.
pub fn gnuplot_script(report: &ScalingReport, summary_csv: &str) -> String {
    let anchor = report
        .per_n
        .iter()
        .find_map(|p| p.median.map(|m| (p.n as f64, m)));
    let mut s = format!(
        "set datafile separator ','\n\
         set logscale xy\n\
         set key left top\n\
         set xlabel 'n'\n\
         set ylabel 'median operations'\n\
         set title '{} {} ({})'\n",
        report.rule, report.behavior, report.category
    );
    let data = format!(
        "'{summary_csv}' skip 1 using 3:6:7:8 with yerrorlines title 'median, q25-q75'"
    );
    match anchor {
        Some((n0, m0)) => s.push_str(&format!(
            "plot {data}, \\\n     {m0} * sqrt(x / {n0}) title 'sqrt(n)' dashtype 2, \\\n     \
             {m0} * x / {n0} title 'n' dashtype 3\n"
        )),
        None => s.push_str(&format!("plot {data}\n")),
    }
    s
}

pub fn print_report(report: &ScalingReport) {
    println!("{} {}", report.rule, report.behavior);
    println!(
        "{:>8} {:>6} {:>6} {:>6} {:>6} {:>10} {:>10} {:>10}",
        "n", "zero", "finite", "inf", "unk", "median", "q25", "q75"
    );
    let f = |x: Option<f64>| x.map_or("-".to_string(), |v| format!("{v:.1}"));
    for p in &report.per_n {
        println!(
            "{:>8} {:>6} {:>6} {:>6} {:>6} {:>10} {:>10} {:>10}",
            p.n,
            p.zero,
            p.finite,
            p.infinite,
            p.unknown,
            f(p.median),
            f(p.q25),
            f(p.q75)
        );
    }
    match report.slope {
        Some(s) => println!("slope={s:.3} category={}", report.category),
        None => println!("slope=- category={}", report.category),
    }
    if let Some(b) = report.beta_star_estimate {
        println!("beta*~{b:.3}");
    }
}
