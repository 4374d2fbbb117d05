//! Monte Carlo study over random proxy-graph parameterizations.
//!
//! Run `i` of an experiment draws its parameters from
//! [`derive_seed(master, i)`](crate::model::derive_seed), so the record
//! stream depends only on `(n, seed, scheme)` and not on how runs are
//! scheduled across threads.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::effects::{summarize_proxy, EffectSummary};
use crate::error::{Error, Result};
use crate::model::{derive_seed, rng_from_seed, sample_proxy_with, ProxyParams, SamplingScheme};
use crate::monotonicity::{in_between, report_proxy, MonotonicityReport};

/// Tolerance of the in-between predicate.
pub const IN_BETWEEN_TOL: f64 = 1e-12;

/// Intervals shorter than this have no meaningful relative position.
pub const MIN_INTERVAL: f64 = 1e-12;

/// Bin count of the interval-length histogram.
pub const HISTOGRAM_BINS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub run_index: u64,
    pub params: ProxyParams,
    pub summary: EffectSummary,
    pub report: MonotonicityReport,
    pub in_between: bool,
    /// `|rd_true - rd_crude|`.
    pub interval_len: f64,
    /// `|rd_obs - rd_true| / interval_len`: 0 at `rd_true`, 1 at `rd_crude`.
    pub rel_pos: Option<f64>,
    pub youden: f64,
}

impl RunRecord {
    pub fn from_params(run_index: u64, params: ProxyParams) -> Self {
        let summary = summarize_proxy(&params);
        let interval_len = (summary.rd_true - summary.rd_crude).abs();
        let rel_pos = (interval_len > MIN_INTERVAL)
            .then(|| (summary.rd_obs - summary.rd_true).abs() / interval_len);
        RunRecord {
            run_index,
            params,
            summary,
            report: report_proxy(&params),
            in_between: in_between(&summary, IN_BETWEEN_TOL),
            interval_len,
            rel_pos,
            youden: youden(&params),
        }
    }
}

/// Youden index of the proxy, `P(d|c) + P(not d|not c) - 1`.
pub fn youden(params: &ProxyParams) -> f64 {
    params.p_d_given_c.given - params.p_d_given_c.given_not
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExperimentSummary {
    pub n_runs: u64,
    pub seed: u64,
    pub scheme: SamplingScheme,
    /// Rows: `E[Y|A,C]` in `C`; columns: `E[Y|A,D]` in `D`; each ordered
    /// nondecreasing, nonincreasing, neither.
    pub table: [[u64; 3]; 3],
    /// In-between runs per table row.
    pub n_in_between_by_row: [u64; 3],
    /// Runs with an exact tie in either direction, tabulated as nondecreasing.
    pub n_ties: u64,
}

impl ExperimentSummary {
    fn empty(seed: u64, scheme: SamplingScheme) -> Self {
        ExperimentSummary {
            n_runs: 0,
            seed,
            scheme,
            table: [[0; 3]; 3],
            n_in_between_by_row: [0; 3],
            n_ties: 0,
        }
    }

    fn add(&mut self, record: &RunRecord) {
        let row = record.report.y_in_c.table_index();
        let col = record.report.y_in_d.table_index();
        self.n_runs += 1;
        self.table[row][col] += 1;
        if record.in_between {
            self.n_in_between_by_row[row] += 1;
        }
        if record.report.y_in_c == crate::Direction::Constant
            || record.report.y_in_d == crate::Direction::Constant
        {
            self.n_ties += 1;
        }
    }

    pub fn from_records<'a>(
        seed: u64,
        scheme: SamplingScheme,
        records: impl IntoIterator<Item = &'a RunRecord>,
    ) -> Self {
        let mut summary = Self::empty(seed, scheme);
        for r in records {
            summary.add(r);
        }
        summary
    }

    /// Runs monotone in `D` (first two columns).
    pub fn n_monotone_in_d(&self) -> u64 {
        self.table.iter().map(|row| row[0] + row[1]).sum()
    }

    pub fn n_in_between(&self) -> u64 {
        self.n_in_between_by_row.iter().sum()
    }

    /// Cells pairing a monotone direction with `Neither`; always zero when
    /// monotonicity in `C` and in `D` coincide.
    pub fn off_block(&self) -> u64 {
        self.table[0][2] + self.table[1][2] + self.table[2][0] + self.table[2][1]
    }

    pub fn n_neither_rows(&self) -> u64 {
        self.table[2].iter().sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExperimentConfig {
    pub n: u64,
    pub seed: u64,
    pub scheme: SamplingScheme,
}

impl ExperimentConfig {
    pub fn new(n: u64, seed: u64) -> Self {
        ExperimentConfig {
            n,
            seed,
            scheme: SamplingScheme::default(),
        }
    }
}

pub fn run_params(seed: u64, index: u64, scheme: SamplingScheme) -> ProxyParams {
    sample_proxy_with(&mut rng_from_seed(derive_seed(seed, index)), scheme)
}

/// Runs the study on the current rayon pool. Records are in run order.
pub fn run_experiment_with(config: ExperimentConfig) -> (ExperimentSummary, Vec<RunRecord>) {
    let records: Vec<RunRecord> = (0..config.n)
        .into_par_iter()
        .map(|i| RunRecord::from_params(i, run_params(config.seed, i, config.scheme)))
        .collect();
    let summary = ExperimentSummary::from_records(config.seed, config.scheme, &records);
    (summary, records)
}

pub fn run_experiment(n: u64, seed: u64) -> (ExperimentSummary, Vec<RunRecord>) {
    run_experiment_with(ExperimentConfig::new(n, seed))
}

/// Header of the per-run CSV.
pub const CSV_HEADER: [&str; 19] = [
    "run_index",
    "p_c",
    "p_d_given_c",
    "p_d_given_not_c",
    "p_a_given_c",
    "p_a_given_not_c",
    "mu_not_a_not_c",
    "mu_not_a_c",
    "mu_a_not_c",
    "mu_a_c",
    "rd_true",
    "rd_obs",
    "rd_crude",
    "y_in_c",
    "y_in_d",
    "in_between",
    "interval_len",
    "rel_pos",
    "youden",
];

/// Writes one CSV row per record; `rel_pos` is empty when undefined.
/// Floats use Rust's shortest round-trip formatting.
pub fn write_csv<W: Write>(records: &[RunRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in records {
        let p = &r.params;
        let mu = p.mu.0;
        let fields = [
            r.run_index.to_string(),
            p.p_c.to_string(),
            p.p_d_given_c.given.to_string(),
            p.p_d_given_c.given_not.to_string(),
            p.p_a_given_c.given.to_string(),
            p.p_a_given_c.given_not.to_string(),
            mu[0][0].to_string(),
            mu[0][1].to_string(),
            mu[1][0].to_string(),
            mu[1][1].to_string(),
            r.summary.rd_true.to_string(),
            r.summary.rd_obs.to_string(),
            r.summary.rd_crude.to_string(),
            r.report.y_in_c.as_str().to_string(),
            r.report.y_in_d.as_str().to_string(),
            r.in_between.to_string(),
            r.interval_len.to_string(),
            r.rel_pos.map(|v| v.to_string()).unwrap_or_default(),
            r.youden.to_string(),
        ];
        w.write_record(&fields)?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    /// Upper edge of the last bin; bins are equal-width on `[0, max]`.
    pub max: f64,
    pub counts: Vec<u64>,
}

impl Histogram {
    pub fn new(values: &[f64], bins: usize) -> Histogram {
        let max = values.iter().copied().fold(0.0, f64::max);
        let mut counts = vec![0; bins];
        for &v in values {
            let idx = if max > 0.0 {
                ((v / max) * bins as f64) as usize
            } else {
                0
            };
            counts[idx.min(bins - 1)] += 1;
        }
        Histogram { max, counts }
    }

    pub fn bin_width(&self) -> f64 {
        self.max / self.counts.len() as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FigureStats {
    pub n_records: usize,
    pub interval_histogram: Histogram,
    /// `(interval_len, rel_pos)`.
    pub interval_vs_rel_pos: Vec<(f64, f64)>,
    /// `(youden, rel_pos)`.
    pub youden_vs_rel_pos: Vec<(f64, f64)>,
    pub median_rel_pos: f64,
    /// Spearman correlation of `|youden|` with `rel_pos`.
    pub youden_rank_correlation: f64,
}

/// Descriptive statistics over in-between records with a nondegenerate
/// interval.
pub fn figure_stats(records: &[RunRecord]) -> Result<FigureStats> {
    let selected: Vec<(&RunRecord, f64)> = records
        .iter()
        .filter(|r| r.in_between)
        .filter_map(|r| r.rel_pos.map(|rel| (r, rel)))
        .collect();
    if selected.is_empty() {
        return Err(Error::EmptyInput);
    }
    let lengths: Vec<f64> = selected.iter().map(|(r, _)| r.interval_len).collect();
    let rel: Vec<f64> = selected.iter().map(|&(_, rel)| rel).collect();
    let abs_youden: Vec<f64> = selected.iter().map(|(r, _)| r.youden.abs()).collect();
    Ok(FigureStats {
        n_records: selected.len(),
        interval_histogram: Histogram::new(&lengths, HISTOGRAM_BINS),
        interval_vs_rel_pos: selected
            .iter()
            .map(|(r, rel)| (r.interval_len, *rel))
            .collect(),
        youden_vs_rel_pos: selected.iter().map(|(r, rel)| (r.youden, *rel)).collect(),
        median_rel_pos: median(&rel),
        youden_rank_correlation: spearman(&abs_youden, &rel),
    })
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        return f64::NAN;
    }
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Ranks starting at 1, ties sharing their average rank.
pub fn ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    let mut out = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        let avg = (start + end + 1) as f64 / 2.0;
        for &k in &order[start..end] {
            out[k] = avg;
        }
        start = end;
    }
    out
}

fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    sxy / (sxx * syy).sqrt()
}

/// Spearman rank correlation; NaN when either input is constant.
pub fn spearman(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len());
    pearson(&ranks(x), &ranks(y))
}
