//! WAV and CSV input/output.
//!
//! File formats are fixed: trajectory CSV columns are
//! `time_s,azimuth_raw_deg,azimuth_tracked_deg,r,dispersion,mode,active`
//! and ground-truth CSV columns are `time_s,azimuth_deg,active` with
//! `active` in {0, 1}. Angles are degrees in [-180, 180), decimal
//! separator `.`, UTF-8, header row mandatory.

use std::path::Path;
use std::str::FromStr;

use crate::Result;
use crate::error::Error;
use crate::pipeline::TrajectoryRecord;
use crate::scenegen::GroundTruthRecord;
use crate::stft::AudioBlock;

/// Reads a PCM (16/24/32-bit) or 32-bit float WAV file into
/// normalized f64 channels.
pub fn read_wav(path: &Path) -> Result<AudioBlock> {
    let mut reader = hound::WavReader::open(path).map_err(|e| Error::WavRead {
        path: path.to_owned(),
        reason: e.to_string(),
    })?;
    let spec = reader.spec();
    let n_channels = spec.channels as usize;
    let mut channels = vec![Vec::new(); n_channels];
    let mut push = |i: usize, v: f64| channels[i % n_channels].push(v);
    let convert = |e: hound::Error| Error::WavRead {
        path: path.to_owned(),
        reason: e.to_string(),
    };
    match (spec.sample_format, spec.bits_per_sample) {
        (hound::SampleFormat::Float, 32) => {
            for (i, s) in reader.samples::<f32>().enumerate() {
                push(i, s.map_err(convert)? as f64);
            }
        }
        (hound::SampleFormat::Int, bits @ (16 | 24 | 32)) => {
            let scale = (1i64 << (bits - 1)) as f64;
            for (i, s) in reader.samples::<i32>().enumerate() {
                push(i, s.map_err(convert)? as f64 / scale);
            }
        }
        (fmt, bits) => {
            return Err(Error::WavRead {
                path: path.to_owned(),
                reason: format!("unsupported sample format {fmt:?}/{bits} bits"),
            });
        }
    }
    Ok(AudioBlock {
        sample_rate: spec.sample_rate as f64,
        channels,
    })
}

/// Writes a block as a 32-bit float WAV file.
pub fn write_wav(path: &Path, block: &AudioBlock) -> Result<()> {
    let spec = hound::WavSpec {
        channels: block.channels.len() as u16,
        sample_rate: block.sample_rate as u32,
        bits_per_sample: 32,
        sample_format: hound::SampleFormat::Float,
    };
    let fail = |e: hound::Error| Error::WavWrite {
        path: path.to_owned(),
        reason: e.to_string(),
    };
    let mut writer = hound::WavWriter::create(path, spec).map_err(fail)?;
    for i in 0..block.len() {
        for ch in &block.channels {
            writer.write_sample(ch[i] as f32).map_err(fail)?;
        }
    }
    writer.finalize().map_err(fail)
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.6}")).unwrap_or_default()
}

pub fn write_trajectory_csv<W: std::io::Write>(out: W, records: &[TrajectoryRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "time_s",
        "azimuth_raw_deg",
        "azimuth_tracked_deg",
        "r",
        "dispersion",
        "mode",
        "active",
    ])
    .map_err(csv_io)?;
    for r in records {
        w.write_record([
            format!("{:.6}", r.time_s),
            fmt_opt(r.azimuth_raw_deg),
            fmt_opt(r.azimuth_tracked_deg),
            format!("{:.6}", r.r),
            format!("{}", r.dispersion),
            r.mode.to_string(),
            (r.active as u8).to_string(),
        ])
        .map_err(csv_io)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_trajectory_csv(path: &Path) -> Result<Vec<TrajectoryRecord>> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| Error::CsvParse {
        path: path.to_owned(),
        reason: e.to_string(),
    })?;
    let parse_err = |reason: String| Error::CsvParse {
        path: path.to_owned(),
        reason,
    };
    let mut records = Vec::new();
    for row in reader.records() {
        let row = row.map_err(|e| parse_err(e.to_string()))?;
        if row.len() != 7 {
            return Err(parse_err(format!("expected 7 columns, got {}", row.len())));
        }
        let field = |i: usize| row.get(i).unwrap_or("");
        let opt = |i: usize| -> Result<Option<f64>> {
            let s = field(i);
            if s.is_empty() {
                Ok(None)
            } else {
                s.parse()
                    .map(Some)
                    .map_err(|e| parse_err(format!("{e}: {s:?}")))
            }
        };
        records.push(TrajectoryRecord {
            time_s: field(0).parse().map_err(|e| parse_err(format!("{e}")))?,
            azimuth_raw_deg: opt(1)?,
            azimuth_tracked_deg: opt(2)?,
            r: field(3).parse().map_err(|e| parse_err(format!("{e}")))?,
            dispersion: field(4).parse().map_err(|e| parse_err(format!("{e}")))?,
            mode: crate::fusion::FusionMode::from_str(field(5)).map_err(parse_err)?,
            active: field(6) == "1",
        });
    }
    Ok(records)
}

pub fn write_ground_truth_csv<W: std::io::Write>(
    out: W,
    records: &[GroundTruthRecord],
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["time_s", "azimuth_deg", "active"])
        .map_err(csv_io)?;
    for r in records {
        w.write_record([
            format!("{:.6}", r.time_s),
            format!("{:.6}", r.azimuth_deg),
            (r.active as u8).to_string(),
        ])
        .map_err(csv_io)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_ground_truth_csv(path: &Path) -> Result<Vec<GroundTruthRecord>> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| Error::CsvParse {
        path: path.to_owned(),
        reason: e.to_string(),
    })?;
    let headers = reader
        .headers()
        .map_err(|e| Error::CsvParse {
            path: path.to_owned(),
            reason: e.to_string(),
        })?
        .clone();
    if !headers.iter().any(|h| h == "active") {
        return Err(Error::CsvParse {
            path: path.to_owned(),
            reason: "ground truth requires an `active` column".into(),
        });
    }
    let mut records = Vec::new();
    for row in reader.records() {
        let row = row.map_err(|e| Error::CsvParse {
            path: path.to_owned(),
            reason: e.to_string(),
        })?;
        let parse = |i: usize| -> Result<f64> {
            row.get(i)
                .unwrap_or("")
                .parse()
                .map_err(|e| Error::CsvParse {
                    path: path.to_owned(),
                    reason: format!("{e}"),
                })
        };
        records.push(GroundTruthRecord {
            time_s: parse(0)?,
            azimuth_deg: parse(1)?,
            active: row.get(2).unwrap_or("0").trim() == "1",
        });
    }
    Ok(records)
}

fn csv_io(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fusion::FusionMode;

    #[test]
    fn wav_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.wav");
        let block = AudioBlock {
            sample_rate: 16000.0,
            channels: vec![vec![0.0, 0.5, -0.5, 0.25], vec![1.0, -1.0, 0.0, 0.125]],
        };
        write_wav(&path, &block).unwrap();
        let back = read_wav(&path).unwrap();
        assert_eq!(back.channels.len(), 2);
        assert_eq!(back.sample_rate, 16000.0);
        for (a, b) in block.channels.iter().zip(&back.channels) {
            for (x, y) in a.iter().zip(b) {
                assert!((x - y).abs() < 1e-7);
            }
        }
    }

    #[test]
    fn trajectory_csv_round_trip() {
        let records = vec![
            TrajectoryRecord {
                time_s: 0.004,
                azimuth_raw_deg: Some(42.5),
                azimuth_tracked_deg: Some(41.0),
                r: 0.93,
                dispersion: 0.18,
                mode: FusionMode::CommonMean,
                active: true,
            },
            TrajectoryRecord {
                time_s: 0.008,
                azimuth_raw_deg: None,
                azimuth_tracked_deg: None,
                r: 0.0,
                dispersion: f64::INFINITY,
                mode: FusionMode::Invalid,
                active: false,
            },
        ];
        let mut buf = Vec::new();
        write_trajectory_csv(&mut buf, &records).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        std::fs::write(&path, &buf).unwrap();
        let back = read_trajectory_csv(&path).unwrap();
        assert_eq!(back.len(), 2);
        assert_eq!(back[0].mode, FusionMode::CommonMean);
        assert!(back[0].active);
        assert_eq!(back[0].azimuth_raw_deg, Some(42.5));
        assert_eq!(back[1].azimuth_tracked_deg, None);
        assert!(back[1].dispersion.is_infinite());
    }

    #[test]
    fn ground_truth_requires_active_column() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("g.csv");
        std::fs::write(&path, "time_s,azimuth_deg\n0.0,10.0\n").unwrap();
        assert!(read_ground_truth_csv(&path).is_err());
        std::fs::write(&path, "time_s,azimuth_deg,active\n0.0,10.0,1\n").unwrap();
        let recs = read_ground_truth_csv(&path).unwrap();
        assert_eq!(recs.len(), 1);
        assert!(recs[0].active);
    }
}
