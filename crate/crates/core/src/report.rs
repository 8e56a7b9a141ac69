//! CSV and JSON emission for experiment results.
//!
//! CSV layouts:
//!
//! | file | columns |
//! |------|---------|
//! | sign density | `form,m,X,count_positive,count_negative,count_zero,freq_positive,freq_negative,freq_zero,pred_positive,pred_negative,pred_zero,err_positive,err_negative,err_zero` |
//! | distribution | `form,X,reference,ks_statistic,sample_size` |
//! | histogram | `bin_left,bin_right,count,reference_mass` |
//! | partial sums | `form,m,kind,x,A,R` |
//! | block increments | `form,m,kind,sigma,j,T_j,ratio` |
//!
//! JSON files wrap the same records as `{"schema_version", "metadata", "data"}`.

use std::io::Write;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;

use crate::asymptotics::AsymptoticsReport;
use crate::error::Result;
use crate::stats::{DistributionTestReport, HistogramBin, SignDensityReport};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunMetadata {
    pub command: String,
    pub form: String,
    pub x: usize,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub m: Vec<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kind: Option<String>,
    pub code_version: String,
    /// seconds since the Unix epoch; the only field that varies between reruns
    pub timestamp: u64,
}

impl RunMetadata {
    pub fn new(command: &str, form: &str, x: usize) -> Self {
        RunMetadata {
            command: command.to_string(),
            form: form.to_string(),
            x,
            m: Vec::new(),
            kind: None,
            code_version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map_or(0, |d| d.as_secs()),
        }
    }
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    schema_version: u32,
    metadata: &'a RunMetadata,
    data: &'a T,
}

pub fn write_json<T: Serialize, W: Write>(meta: &RunMetadata, data: &T, mut out: W) -> Result<()> {
    serde_json::to_writer_pretty(
        &mut out,
        &Envelope {
            schema_version: SCHEMA_VERSION,
            metadata: meta,
            data,
        },
    )?;
    writeln!(out)?;
    Ok(())
}

#[derive(Serialize)]
struct SignRow<'a> {
    form: &'a str,
    m: u32,
    #[serde(rename = "X")]
    x: usize,
    count_positive: u64,
    count_negative: u64,
    count_zero: u64,
    freq_positive: f64,
    freq_negative: f64,
    freq_zero: f64,
    pred_positive: f64,
    pred_negative: f64,
    pred_zero: f64,
    err_positive: f64,
    err_negative: f64,
    err_zero: f64,
}

pub fn write_sign_density_csv<W: Write>(reports: &[SignDensityReport], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in reports {
        w.serialize(SignRow {
            form: &r.form,
            m: r.m,
            x: r.x,
            count_positive: r.counts.positive,
            count_negative: r.counts.negative,
            count_zero: r.counts.zero,
            freq_positive: r.frequencies.positive,
            freq_negative: r.frequencies.negative,
            freq_zero: r.frequencies.zero,
            pred_positive: r.predicted.positive,
            pred_negative: r.predicted.negative,
            pred_zero: r.predicted.zero,
            err_positive: r.abs_errors.positive,
            err_negative: r.abs_errors.negative,
            err_zero: r.abs_errors.zero,
        })?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct DistributionRow<'a> {
    form: &'a str,
    #[serde(rename = "X")]
    x: usize,
    reference: crate::stats::Reference,
    ks_statistic: f64,
    sample_size: usize,
}

pub fn write_distribution_csv<W: Write>(reports: &[DistributionTestReport], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in reports {
        w.serialize(DistributionRow {
            form: &r.form,
            x: r.x,
            reference: r.reference,
            ks_statistic: r.ks_statistic,
            sample_size: r.sample_size,
        })?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_histogram_csv<W: Write>(bins: &[HistogramBin], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for b in bins {
        w.serialize(b)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct CheckpointRow<'a> {
    form: &'a str,
    m: u32,
    kind: String,
    x: usize,
    #[serde(rename = "A")]
    a: f64,
    #[serde(rename = "R")]
    r: f64,
}

pub fn write_partial_sums_csv<W: Write>(reports: &[AsymptoticsReport], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for rep in reports {
        for c in &rep.checkpoints {
            w.serialize(CheckpointRow {
                form: &rep.form,
                m: rep.m,
                kind: rep.kind.to_string(),
                x: c.x,
                a: c.partial_sum,
                r: c.ratio,
            })?;
        }
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct IncrementRow<'a> {
    form: &'a str,
    m: u32,
    kind: String,
    sigma: f64,
    j: u32,
    #[serde(rename = "T_j")]
    t_j: f64,
    ratio: Option<f64>,
}

pub fn write_increments_csv<W: Write>(reports: &[AsymptoticsReport], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for rep in reports {
        for b in &rep.block_increments {
            w.serialize(IncrementRow {
                form: &rep.form,
                m: rep.m,
                kind: rep.kind.to_string(),
                sigma: b.sigma,
                j: b.j,
                t_j: b.t_j,
                ratio: b.ratio,
            })?;
        }
    }
    w.flush()?;
    Ok(())
}
