use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::timeseries::trace::{Unit, UniformTrace};

/// Relative spacing jitter tolerated when inferring a uniform step.
pub const JITTER_TOLERANCE: f64 = 1e-6;

/// Maps CSV columns onto trace roles.
#[derive(Debug, Clone, PartialEq)]
pub struct ColumnSpec {
    pub time: String,
    pub value: String,
    pub unit: Unit,
    pub channel_id: String,
}

impl ColumnSpec {
    /// The standard `time_s,value` layout.
    pub fn standard(unit: Unit, channel_id: impl Into<String>) -> Self {
        Self {
            time: "time_s".into(),
            value: "value".into(),
            unit,
            channel_id: channel_id.into(),
        }
    }
}

/// Samples as read from disk, before any uniformity check.
#[derive(Debug, Clone, PartialEq)]
pub struct RawSamples {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub unit: Unit,
    pub channel_id: String,
}

impl RawSamples {
    /// Largest relative deviation of any step from the mean step.
    pub fn jitter(&self) -> f64 {
        let mean = self.mean_step();
        self.times
            .windows(2)
            .map(|w| ((w[1] - w[0]) - mean).abs() / mean)
            .fold(0.0, f64::max)
    }

    fn mean_step(&self) -> f64 {
        let n = self.times.len();
        (self.times[n - 1] - self.times[0]) / (n - 1) as f64
    }

    /// Accept the samples as uniform if the jitter is within tolerance.
    pub fn into_uniform(self) -> Result<UniformTrace> {
        let jitter = self.jitter();
        if jitter > JITTER_TOLERANCE {
            return Err(Error::NonUniformSampling { jitter });
        }
        let dt = self.mean_step();
        UniformTrace::new(self.times[0], dt, self.values, self.unit, self.channel_id)
    }

    /// Linear interpolation of irregular samples onto a grid with step `dt`.
    pub fn resample(&self, dt: f64) -> Result<UniformTrace> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidStep(dt));
        }
        let t0 = self.times[0];
        let span = self.times[self.times.len() - 1] - t0;
        let len = (span / dt + 1e-9).floor() as usize + 1;
        let mut j = 0;
        let values = (0..len)
            .map(|i| {
                let t = t0 + i as f64 * dt;
                while j + 2 < self.times.len() && self.times[j + 1] <= t {
                    j += 1;
                }
                let (ta, tb) = (self.times[j], self.times[j + 1]);
                let frac = ((t - ta) / (tb - ta)).clamp(0.0, 1.0);
                let (a, b) = (self.values[j], self.values[j + 1]);
                a + frac * (b - a)
            })
            .collect();
        UniformTrace::new(t0, dt, values, self.unit, self.channel_id.clone())
    }
}

/// Read time/value pairs without enforcing a uniform grid.
pub fn load_samples_csv(path: impl AsRef<Path>, spec: &ColumnSpec) -> Result<RawSamples> {
    let path = path.as_ref();
    let csv_err = |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    };
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(file);
    let headers = reader.headers().map_err(csv_err)?.clone();
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::MissingColumn(name.to_string()))
    };
    let (time_col, value_col) = (column(&spec.time)?, column(&spec.value)?);

    let mut times: Vec<f64> = Vec::new();
    let mut values = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(csv_err)?;
        let parse = |col: usize| -> Result<f64> {
            let field = record.get(col).unwrap_or("");
            field
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or(Error::NonFiniteValue { row })
        };
        let t = parse(time_col)?;
        if times.last().is_some_and(|&prev| t <= prev) {
            return Err(Error::NonMonotonicTime { row });
        }
        times.push(t);
        values.push(parse(value_col)?);
    }
    if times.len() < 2 {
        return Err(Error::TooFewSamples(times.len()));
    }
    Ok(RawSamples {
        times,
        values,
        unit: spec.unit,
        channel_id: spec.channel_id.clone(),
    })
}

/// Load a uniformly sampled trace from CSV.
///
/// Timestamps whose spacing deviates from the mean step by more than
/// [`JITTER_TOLERANCE`] (relative) are rejected with
/// [`Error::NonUniformSampling`]; use [`load_samples_csv`] and
/// [`RawSamples::resample`] for such files.
pub fn load_trace_csv(path: impl AsRef<Path>, spec: &ColumnSpec) -> Result<UniformTrace> {
    load_samples_csv(path, spec)?.into_uniform()
}

/// Write a trace in the `time_s,value` layout with a leading comment line.
pub fn write_trace_csv(path: impl AsRef<Path>, trace: &UniformTrace) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    let mut write = || -> std::io::Result<()> {
        writeln!(
            out,
            "# channel: {}, unit: {:?}",
            trace.channel_id(),
            trace.unit()
        )?;
        writeln!(out, "time_s,value")?;
        for (i, v) in trace.values().iter().enumerate() {
            writeln!(out, "{},{}", trace.time_at(i), v)?;
        }
        out.flush()
    };
    write().map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write_tmp(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    fn spec() -> ColumnSpec {
        ColumnSpec::standard(Unit::Hz, "f")
    }

    #[test]
    fn parses_simple_file() {
        let f = write_tmp("# recorder export\ntime_s,value\n0.00,50.0\n0.01,50.0\n0.02,49.99\n");
        let t = load_trace_csv(f.path(), &spec()).unwrap();
        assert!((t.dt() - 0.01).abs() < 1e-15);
        assert_eq!(t.values(), &[50.0, 50.0, 49.99]);
    }

    #[test]
    fn rejects_non_monotonic_time() {
        let f = write_tmp("time_s,value\n0.0,50\n0.02,50\n0.01,50\n");
        assert!(matches!(
            load_trace_csv(f.path(), &spec()),
            Err(Error::NonMonotonicTime { row: 2 })
        ));
    }

    #[test]
    fn rejects_missing_column() {
        let f = write_tmp("t,value\n0.0,50\n0.01,50\n");
        assert!(matches!(
            load_trace_csv(f.path(), &spec()),
            Err(Error::MissingColumn(c)) if c == "time_s"
        ));
    }

    #[test]
    fn rejects_non_finite_and_short_files() {
        let f = write_tmp("time_s,value\n0.0,50\n0.01,NaN\n");
        assert!(matches!(
            load_trace_csv(f.path(), &spec()),
            Err(Error::NonFiniteValue { row: 1 })
        ));
        let f = write_tmp("time_s,value\n0.0,50\n");
        assert!(matches!(
            load_trace_csv(f.path(), &spec()),
            Err(Error::TooFewSamples(1))
        ));
    }

    #[test]
    fn jittered_timestamps_need_explicit_resample() {
        let f = write_tmp("time_s,value\n0.0,0\n0.01,1\n0.025,2.5\n0.03,3\n");
        let err = load_trace_csv(f.path(), &spec()).unwrap_err();
        assert!(matches!(err, Error::NonUniformSampling { .. }));
        let raw = load_samples_csv(f.path(), &spec()).unwrap();
        let t = raw.resample(0.005).unwrap();
        assert_eq!(t.len(), 7);
        // values equal time * 100 on every segment
        for (i, v) in t.values().iter().enumerate() {
            assert!((v - t.time_at(i) * 100.0).abs() < 1e-9);
        }
    }

    #[test]
    fn fault_recorder_round_trip() {
        let values: Vec<f64> = (0..1001).map(|i| 50.0 - 1e-4 * i as f64).collect();
        let t = UniformTrace::new(0.0, 0.02, values, Unit::Hz, "f").unwrap();
        let f = tempfile::NamedTempFile::new().unwrap();
        write_trace_csv(f.path(), &t).unwrap();
        let back = load_trace_csv(f.path(), &spec()).unwrap();
        assert_eq!(back.len(), 1001);
        assert!((back.dt() - 0.02).abs() < 1e-15);
        assert_eq!(back.values(), t.values());
    }
}
