//! Gaze stream and event CSV formats.
//!
//! Gaze stream: header `t,x,y,pupil_area,valid`, one row per sample.
//! Events: header `kind,onset,duration,centroid_x,centroid_y,amplitude,aoi`
//! with empty fields where a column does not apply to the event kind.

use std::path::Path;

use crate::{Error, Result};

use super::{validate_samples, GazeEvent, GazeSample};

const GAZE_HEADER: [&str; 5] = ["t", "x", "y", "pupil_area", "valid"];

pub fn read_gaze_csv(path: &Path) -> Result<Vec<GazeSample>> {
    let file = path.display().to_string();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| Error::csv(&file, None, None, e.to_string()))?;

    let headers = reader.headers().map_err(|e| Error::csv(&file, None, None, e.to_string()))?.clone();
    if headers.iter().collect::<Vec<_>>() != GAZE_HEADER {
        return Err(Error::csv(
            &file,
            None,
            None,
            format!("expected header `{}`, got `{}`", GAZE_HEADER.join(","), headers.iter().collect::<Vec<_>>().join(",")),
        ));
    }

    let parse = |field: &str, row: usize, col: &str| -> Result<f64> {
        field
            .trim()
            .parse::<f64>()
            .map_err(|_| Error::csv(&file, Some(row), Some(col), format!("non-numeric value `{field}`")))
    };

    let mut samples = Vec::new();
    for (idx, record) in reader.records().enumerate() {
        let row = idx + 2; // 1-based, after header
        let record = record.map_err(|e| Error::csv(&file, Some(row), None, e.to_string()))?;
        if record.len() != 5 {
            return Err(Error::csv(&file, Some(row), None, format!("expected 5 fields, got {}", record.len())));
        }
        let valid = match record[4].trim() {
            "1" | "true" => true,
            "0" | "false" => false,
            other => return Err(Error::csv(&file, Some(row), Some("valid"), format!("expected 0/1, got `{other}`"))),
        };
        samples.push(GazeSample {
            t: parse(&record[0], row, "t")?,
            x: parse(&record[1], row, "x")?,
            y: parse(&record[2], row, "y")?,
            pupil_area: parse(&record[3], row, "pupil_area")?,
            valid,
        });
    }
    validate_samples(&samples)?;
    Ok(samples)
}

pub fn write_gaze_csv(path: &Path, samples: &[GazeSample]) -> Result<()> {
    let file = path.display().to_string();
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::csv(&file, None, None, e.to_string()))?;
    w.write_record(GAZE_HEADER).map_err(|e| Error::csv(&file, None, None, e.to_string()))?;
    for s in samples {
        w.write_record(&[
            s.t.to_string(),
            s.x.to_string(),
            s.y.to_string(),
            s.pupil_area.to_string(),
            if s.valid { "1".to_string() } else { "0".to_string() },
        ])
        .map_err(|e| Error::csv(&file, None, None, e.to_string()))?;
    }
    w.flush().map_err(|e| Error::io(&file, e))?;
    Ok(())
}

pub fn write_events_csv(path: &Path, events: &[GazeEvent]) -> Result<()> {
    let file = path.display().to_string();
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::csv(&file, None, None, e.to_string()))?;
    w.write_record(["kind", "onset", "duration", "centroid_x", "centroid_y", "amplitude", "aoi"])
        .map_err(|e| Error::csv(&file, None, None, e.to_string()))?;
    for ev in events {
        let record = match ev {
            GazeEvent::Fixation(f) => [
                "Fixation".to_string(),
                f.onset.to_string(),
                f.duration.to_string(),
                f.centroid_x.to_string(),
                f.centroid_y.to_string(),
                String::new(),
                f.aoi.clone().unwrap_or_default(),
            ],
            GazeEvent::Saccade(s) => [
                "Saccade".to_string(),
                s.onset.to_string(),
                s.duration.to_string(),
                String::new(),
                String::new(),
                s.amplitude.to_string(),
                String::new(),
            ],
            GazeEvent::Blink(b) => [
                "Blink".to_string(),
                b.onset.to_string(),
                b.duration.to_string(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
            ],
        };
        w.write_record(&record).map_err(|e| Error::csv(&file, None, None, e.to_string()))?;
    }
    w.flush().map_err(|e| Error::io(&file, e))?;
    Ok(())
}
