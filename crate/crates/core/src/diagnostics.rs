//! Error bookkeeping shared by all twin experiments: time series of named
//! error channels, low/high mode splits, exponential decay fits and the
//! reverse-triangle lower bound.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::spectral::{ModeProjection, SpectralField};
use crate::{NudgingError, Result, Scalar};

/// Samples below this are treated as the round-off floor and excluded from fits.
pub const FIT_FLOOR: f64 = 1e-15;

/// Time-indexed records of named channels, e.g. `err_low, err_high, err_total`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ErrorSeries {
    pub times: Vec<f64>,
    names: Vec<String>,
    values: Vec<Vec<f64>>,
    pub metadata: BTreeMap<String, String>,
}

impl ErrorSeries {
    pub fn new(channels: &[&str]) -> Self {
        ErrorSeries {
            times: Vec::new(),
            names: channels.iter().map(|s| s.to_string()).collect(),
            values: vec![Vec::new(); channels.len()],
            metadata: BTreeMap::new(),
        }
    }

    /// Appends one sample; `row` follows the channel order given at construction.
    pub fn push(&mut self, t: f64, row: &[f64]) {
        assert_eq!(row.len(), self.names.len(), "row width does not match channel count");
        if let Some(&last) = self.times.last() {
            assert!(t > last, "times must be strictly increasing ({t} after {last})");
        }
        self.times.push(t);
        for (col, &v) in self.values.iter_mut().zip(row) {
            col.push(v);
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn channel_names(&self) -> &[String] {
        &self.names
    }

    pub fn channel(&self, name: &str) -> Option<&[f64]> {
        self.names.iter().position(|n| n == name).map(|i| self.values[i].as_slice())
    }

    fn require(&self, name: &str) -> Result<&[f64]> {
        self.channel(name).ok_or_else(|| NudgingError::UndefinedFit(format!("no channel named `{name}`")))
    }

    pub fn set_meta(&mut self, key: &str, value: impl Into<String>) {
        self.metadata.insert(key.to_string(), value.into());
    }

    /// Writes `t` followed by the selected channels (all when `columns` is empty).
    pub fn write_csv<W: Write>(&self, out: W, columns: &[&str]) -> Result<()> {
        let cols: Vec<usize> = if columns.is_empty() {
            (0..self.names.len()).collect()
        } else {
            columns
                .iter()
                .map(|c| {
                    self.names
                        .iter()
                        .position(|n| n == c)
                        .ok_or_else(|| NudgingError::Config(format!("series has no channel `{c}`")))
                })
                .collect::<Result<_>>()?
        };
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["t".to_string()];
        header.extend(cols.iter().map(|&i| self.names[i].clone()));
        w.write_record(&header)?;
        for (row, t) in self.times.iter().enumerate() {
            let mut rec = vec![format!("{t:e}")];
            rec.extend(cols.iter().map(|&i| format!("{:e}", self.values[i][row])));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads a CSV written by [`Self::write_csv`]; the first column is time.
    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(input);
        let header = r.headers()?.clone();
        if header.get(0) != Some("t") {
            return Err(NudgingError::Config("first CSV column must be `t`".into()));
        }
        let names: Vec<&str> = header.iter().skip(1).collect();
        let mut series = ErrorSeries::new(&names);
        for rec in r.records() {
            let rec = rec?;
            let parse = |s: &str| s.parse::<f64>().map_err(|e| NudgingError::Config(format!("bad number `{s}`: {e}")));
            let t = parse(&rec[0])?;
            let row = rec.iter().skip(1).map(parse).collect::<Result<Vec<_>>>()?;
            series.push(t, &row);
        }
        Ok(series)
    }

    /// Largest relative defect of `total² = low² + high²` over all samples.
    pub fn parseval_defect(&self, low: &str, high: &str, total: &str) -> Result<f64> {
        let (l, h, t) = (self.require(low)?, self.require(high)?, self.require(total)?);
        Ok(l.iter()
            .zip(h)
            .zip(t)
            .map(|((l, h), t)| {
                let tt = t * t;
                if tt == 0.0 {
                    (l * l + h * h).abs()
                } else {
                    (l * l + h * h - tt).abs() / tt
                }
            })
            .fold(0.0, f64::max))
    }

    /// Mean of a channel over the final `fraction` of the samples.
    pub fn tail_mean(&self, channel: &str, fraction: f64) -> Result<f64> {
        let c = self.require(channel)?;
        if c.is_empty() {
            return Err(NudgingError::UndefinedFit("empty series".into()));
        }
        let count = ((c.len() as f64 * fraction).ceil() as usize).clamp(1, c.len());
        let tail = &c[c.len() - count..];
        Ok(tail.iter().sum::<f64>() / tail.len() as f64)
    }
}

/// `(‖P(u-v)‖, ‖(I-P)(u-v)‖, ‖u-v‖)`.
pub fn split_error<T: Scalar, F: SpectralField<T>>(u: &F, v: &F, p: &ModeProjection) -> (T, T, T) {
    let d = u.difference(v);
    let (low, high) = d.l2_norm_split(p);
    (low, high, d.l2_norm())
}

/// Least-squares line through `(t, ln err)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub channel: String,
    /// Slope of `ln err` (1/time); negative for decay.
    pub rate: f64,
    pub intercept: f64,
    /// Sample index range `[start, end)` the fit was taken over.
    pub window: (usize, usize),
    pub window_t0: f64,
    pub window_t1: f64,
    /// RMS residual in log space.
    pub residual: f64,
}

/// Fits `ln err = intercept + rate t` over the last `window_len` samples,
/// skipping samples at or below [`FIT_FLOOR`].
pub fn fit_decay_rate(series: &ErrorSeries, channel: &str, window_len: usize) -> Result<DecayFit> {
    let c = series.require(channel)?;
    if window_len == 0 || c.is_empty() {
        return Err(NudgingError::UndefinedFit("empty window".into()));
    }
    let start = c.len().saturating_sub(window_len);
    let pts: Vec<(f64, f64)> = (start..c.len())
        .filter(|&i| c[i] > FIT_FLOOR && c[i].is_finite())
        .map(|i| (series.times[i], c[i].ln()))
        .collect();
    if pts.len() < 2 {
        return Err(NudgingError::UndefinedFit(format!(
            "channel `{channel}` has fewer than two positive samples in the window"
        )));
    }
    let n = pts.len() as f64;
    let tm = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let ym = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx = pts.iter().map(|p| (p.0 - tm).powi(2)).sum::<f64>();
    let sxy = pts.iter().map(|p| (p.0 - tm) * (p.1 - ym)).sum::<f64>();
    if sxx == 0.0 {
        return Err(NudgingError::UndefinedFit("window spans zero time".into()));
    }
    let rate = sxy / sxx;
    let intercept = ym - rate * tm;
    let residual = (pts.iter().map(|p| (p.1 - intercept - rate * p.0).powi(2)).sum::<f64>() / n).sqrt();
    Ok(DecayFit {
        channel: channel.to_string(),
        rate,
        intercept,
        window: (start, c.len()),
        window_t0: series.times[start],
        window_t1: series.times[c.len() - 1],
        residual,
    })
}

/// Outcome of checking `err_total(t) >= |‖u(t)‖ - ‖v(t)‖| - 1e-12` at every sample.
#[derive(Clone, Debug, PartialEq)]
pub struct LowerBoundReport {
    pub holds: bool,
    pub samples: usize,
    /// `(index, t, err_total, bound)` of the first violation.
    pub first_violation: Option<(usize, f64, f64, f64)>,
}

pub const LOWER_BOUND_SLACK: f64 = 1e-12;

pub fn lower_bound_check(
    series: &ErrorSeries,
    total_channel: &str,
    norm_u: &[f64],
    norm_v: &[f64],
) -> Result<LowerBoundReport> {
    let err = series.require(total_channel)?;
    if norm_u.len() != err.len() || norm_v.len() != err.len() {
        return Err(NudgingError::Config("norm series length does not match the error series".into()));
    }
    let first_violation = (0..err.len()).find_map(|i| {
        let bound = (norm_u[i] - norm_v[i]).abs();
        (err[i] < bound - LOWER_BOUND_SLACK).then_some((i, series.times[i], err[i], bound))
    });
    Ok(LowerBoundReport { holds: first_violation.is_none(), samples: err.len(), first_violation })
}
