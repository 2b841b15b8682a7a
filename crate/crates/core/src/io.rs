//! File formats: tick/return/jump/event CSVs, band CSVs, model and
//! decomposition JSON.

use crate::clean::AuctionInterval;
use crate::detect::DetectionOutcome;
use crate::error::{Error, Result};
use crate::factor::CojumpTally;
use crate::mctest::{ConfidenceBand, WindowStat};
use crate::series::{EventSeries, MoMethod, ReturnSeries, SessionSpec, Tick, TickSeries};
use crate::sim::PlantedJump;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

fn csv_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Csv { line, msg: msg.into() }
}

/// Read a tick file: header `timestamp_ms,price`, rows sorted ascending.
pub fn read_ticks_csv(path: &Path, symbol: &str) -> Result<TickSeries> {
    let file = std::fs::File::open(path)?;
    let mut lines = BufReader::new(file).lines();
    let header = lines
        .next()
        .ok_or_else(|| csv_err(1, "empty file"))??;
    if header.trim() != "timestamp_ms,price" {
        return Err(csv_err(1, format!("expected header 'timestamp_ms,price', got '{header}'")));
    }
    let mut ticks = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line?;
        let lineno = i + 2;
        if line.trim().is_empty() {
            continue;
        }
        let mut parts = line.split(',');
        let ts: u64 = parts
            .next()
            .and_then(|s| s.trim().parse().ok())
            .ok_or_else(|| csv_err(lineno, "bad timestamp_ms"))?;
        let price: f64 = parts
            .next()
            .and_then(|s| s.trim().parse().ok())
            .ok_or_else(|| csv_err(lineno, "bad price"))?;
        if parts.next().is_some() {
            return Err(csv_err(lineno, "too many fields"));
        }
        ticks.push(Tick { time_s: ts as f64 / 1000.0, price });
    }
    TickSeries::new(symbol, ticks)
}

pub fn write_ticks_csv(path: &Path, ticks: &TickSeries) -> Result<()> {
    let mut out = BufWriter::new(std::fs::File::create(path)?);
    writeln!(out, "timestamp_ms,price")?;
    for t in &ticks.ticks {
        writeln!(out, "{},{}", (t.time_s * 1000.0).round() as u64, t.price)?;
    }
    Ok(())
}

/// Write the three return series of one symbol side by side:
/// `day,minute,return_MO1,return_MO2,return_MO3` with NA as an empty field.
pub fn write_returns_csv(path: &Path, series: [&ReturnSeries; 3]) -> Result<()> {
    let n = series[0].len();
    if series.iter().any(|s| s.len() != n) {
        return Err(Error::InvalidParameter("return series lengths disagree".into()));
    }
    let mpd = series[0].session.minutes_per_day;
    let mut out = BufWriter::new(std::fs::File::create(path)?);
    writeln!(out, "day,minute,return_MO1,return_MO2,return_MO3")?;
    for i in 0..n {
        let (day, slot) = (i / mpd, i % mpd + 1);
        write!(out, "{day},{slot}")?;
        for s in series {
            match s.values[i] {
                Some(v) => write!(out, ",{v}")?,
                None => write!(out, ",")?,
            }
        }
        writeln!(out)?;
    }
    Ok(())
}

/// Read a `write_returns_csv` file back into three series.
pub fn read_returns_csv(
    path: &Path,
    symbol: &str,
    session: SessionSpec,
) -> Result<[ReturnSeries; 3]> {
    let file = std::fs::File::open(path)?;
    let mut lines = BufReader::new(file).lines();
    let header = lines.next().ok_or_else(|| csv_err(1, "empty file"))??;
    if header.trim() != "day,minute,return_MO1,return_MO2,return_MO3" {
        return Err(csv_err(1, "unexpected header"));
    }
    let n = session.total_len();
    let mut values: [Vec<Option<f64>>; 3] = [vec![None; n], vec![None; n], vec![None; n]];
    let mut count = 0usize;
    for (i, line) in lines.enumerate() {
        let line = line?;
        let lineno = i + 2;
        if line.trim().is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split(',').collect();
        if parts.len() != 5 {
            return Err(csv_err(lineno, "expected 5 fields"));
        }
        let day: usize =
            parts[0].parse().map_err(|_| csv_err(lineno, "bad day"))?;
        let minute: usize =
            parts[1].parse().map_err(|_| csv_err(lineno, "bad minute"))?;
        if minute == 0 || minute > session.minutes_per_day || day >= session.days {
            return Err(csv_err(lineno, "slot outside session"));
        }
        let idx = day * session.minutes_per_day + minute - 1;
        for (j, field) in parts[2..].iter().enumerate() {
            if !field.trim().is_empty() {
                values[j][idx] =
                    Some(field.parse().map_err(|_| csv_err(lineno, "bad return"))?);
            }
        }
        count += 1;
    }
    if count != n {
        return Err(Error::InvalidParameter(format!(
            "return file holds {count} slots, session expects {n}"
        )));
    }
    let methods = [MoMethod::Mo1, MoMethod::Mo2, MoMethod::Mo3];
    let mut iter = values.into_iter().zip(methods);
    Ok(std::array::from_fn(|_| {
        let (vals, method) = iter.next().unwrap();
        ReturnSeries {
            symbol: symbol.to_string(),
            method,
            values: vals,
            session,
            pattern: Vec::new(),
        }
    }))
}

/// Jump file: `minute,direction,method_mask` for the union of variant
/// detections; the intersection is the rows with all six bits set (63).
pub fn write_jumps_csv(path: &Path, outcome: &DetectionOutcome) -> Result<()> {
    let mut out = BufWriter::new(std::fs::File::create(path)?);
    writeln!(out, "minute,direction,method_mask")?;
    for &(minute, direction, mask) in &outcome.union_mask {
        writeln!(out, "{minute},{direction},{mask}")?;
    }
    Ok(())
}

/// Read a jump file, returning the series of minutes whose mask contains
/// `required_mask` (63 selects the six-method intersection).
pub fn read_jumps_csv(
    path: &Path,
    symbol: &str,
    sample_len: u32,
    required_mask: u8,
) -> Result<EventSeries> {
    let file = std::fs::File::open(path)?;
    let mut lines = BufReader::new(file).lines();
    let header = lines.next().ok_or_else(|| csv_err(1, "empty file"))??;
    if header.trim() != "minute,direction,method_mask" {
        return Err(csv_err(1, "unexpected header"));
    }
    let mut times = Vec::new();
    let mut directions = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line?;
        let lineno = i + 2;
        if line.trim().is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split(',').collect();
        if parts.len() != 3 {
            return Err(csv_err(lineno, "expected 3 fields"));
        }
        let minute: u32 = parts[0].parse().map_err(|_| csv_err(lineno, "bad minute"))?;
        let direction: i8 = parts[1].parse().map_err(|_| csv_err(lineno, "bad direction"))?;
        let mask: u8 = parts[2].parse().map_err(|_| csv_err(lineno, "bad mask"))?;
        if mask & required_mask == required_mask {
            times.push(minute);
            directions.push(direction);
        }
    }
    EventSeries::new(symbol, times, sample_len)?.with_directions(directions)
}

/// Single-column event file: `minute`.
pub fn write_events_csv(path: &Path, events: &EventSeries) -> Result<()> {
    let mut out = BufWriter::new(std::fs::File::create(path)?);
    writeln!(out, "minute")?;
    for t in &events.times {
        writeln!(out, "{t}")?;
    }
    Ok(())
}

pub fn read_events_csv(path: &Path, symbol: &str, sample_len: u32) -> Result<EventSeries> {
    let file = std::fs::File::open(path)?;
    let mut lines = BufReader::new(file).lines();
    let header = lines.next().ok_or_else(|| csv_err(1, "empty file"))??;
    if header.trim() != "minute" {
        return Err(csv_err(1, "expected header 'minute'"));
    }
    let mut times = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        times.push(line.trim().parse().map_err(|_| csv_err(i + 2, "bad minute"))?);
    }
    EventSeries::new(symbol, times, sample_len)
}

/// Band file: `w,observed,mean,lo95,hi95,lo99,hi99,source`.
pub fn write_band_csv(path: &Path, observed: &WindowStat, band: &ConfidenceBand) -> Result<()> {
    if observed.w_grid != band.w_grid {
        return Err(Error::InvalidParameter("observed grid differs from band grid".into()));
    }
    let mut out = BufWriter::new(std::fs::File::create(path)?);
    writeln!(out, "w,observed,mean,lo95,hi95,lo99,hi99,source")?;
    for (j, &w) in band.w_grid.iter().enumerate() {
        writeln!(
            out,
            "{w},{},{},{},{},{},{},{}",
            observed.values[j],
            band.mean[j],
            band.lo[0][j],
            band.hi[0][j],
            band.lo[1][j],
            band.hi[1][j],
            band.source
        )?;
    }
    Ok(())
}

/// Ground-truth file for simulated data: `minute,size,direction`.
pub fn write_truth_csv(path: &Path, jumps: &[PlantedJump]) -> Result<()> {
    let mut out = BufWriter::new(std::fs::File::create(path)?);
    writeln!(out, "minute,size,direction")?;
    for j in jumps {
        writeln!(out, "{},{},{}", j.minute, j.size, if j.size >= 0.0 { 1 } else { -1 })?;
    }
    Ok(())
}

pub fn read_truth_csv(path: &Path) -> Result<Vec<(u32, f64)>> {
    let file = std::fs::File::open(path)?;
    let mut lines = BufReader::new(file).lines();
    let header = lines.next().ok_or_else(|| csv_err(1, "empty file"))??;
    if header.trim() != "minute,size,direction" {
        return Err(csv_err(1, "unexpected header"));
    }
    let mut out = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split(',').collect();
        if parts.len() != 3 {
            return Err(csv_err(i + 2, "expected 3 fields"));
        }
        let minute = parts[0].parse().map_err(|_| csv_err(i + 2, "bad minute"))?;
        let size = parts[1].parse().map_err(|_| csv_err(i + 2, "bad size"))?;
        out.push((minute, size));
    }
    Ok(out)
}

/// Cojump tally file: `minute,J` over minutes with at least one jump.
pub fn write_tally_csv(path: &Path, tally: &CojumpTally) -> Result<()> {
    let mut out = BufWriter::new(std::fs::File::create(path)?);
    writeln!(out, "minute,J")?;
    for (i, &c) in tally.counts.iter().enumerate() {
        if c >= 1 {
            writeln!(out, "{},{c}", i + 1)?;
        }
    }
    Ok(())
}

/// Auction report rows: `start_s,end_s`.
pub fn write_auctions_csv(path: &Path, auctions: &[AuctionInterval]) -> Result<()> {
    let mut out = BufWriter::new(std::fs::File::create(path)?);
    writeln!(out, "start_s,end_s")?;
    for a in auctions {
        writeln!(out, "{},{}", a.start_s, a.end_s)?;
    }
    Ok(())
}

pub fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    let file = std::fs::File::create(path)?;
    serde_json::to_writer_pretty(BufWriter::new(file), value)?;
    Ok(())
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let file = std::fs::File::open(path)?;
    Ok(serde_json::from_reader(BufReader::new(file))?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detect::{DetectionConfig, VolEstimator};
    use tempfile::tempdir;

    #[test]
    fn tick_round_trip_and_line_errors() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("t.csv");
        let ticks = TickSeries::new(
            "X",
            vec![
                Tick { time_s: 0.0, price: 10.0 },
                Tick { time_s: 60.0, price: 10.5 },
            ],
        )
        .unwrap();
        write_ticks_csv(&path, &ticks).unwrap();
        let back = read_ticks_csv(&path, "X").unwrap();
        assert_eq!(back, ticks);

        std::fs::write(&path, "timestamp_ms,price\n100,1.5\nnope,2\n").unwrap();
        let err = read_ticks_csv(&path, "X").unwrap_err();
        assert!(err.to_string().contains("line 3"), "{err}");
    }

    #[test]
    fn returns_round_trip_preserves_na() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("r.csv");
        let mut session = SessionSpec::new(3, 2);
        session.day_clock_minutes = 3;
        let mk = |method, vals: Vec<Option<f64>>| ReturnSeries {
            symbol: "X".into(),
            method,
            values: vals,
            session,
            pattern: vec![],
        };
        let r1 = mk(MoMethod::Mo1, vec![Some(0.1), Some(0.0), Some(-0.2), Some(0.3), Some(0.0), Some(0.1)]);
        let r2 = mk(MoMethod::Mo2, vec![Some(0.1), None, Some(-0.2), Some(0.3), None, Some(0.1)]);
        let r3 = mk(MoMethod::Mo3, vec![Some(0.1), None, Some(-0.15), Some(0.3), None, Some(0.1)]);
        write_returns_csv(&path, [&r1, &r2, &r3]).unwrap();
        let [b1, b2, b3] = read_returns_csv(&path, "X", session).unwrap();
        assert_eq!(b1.values, r1.values);
        assert_eq!(b2.values, r2.values);
        assert_eq!(b3.values, r3.values);
        assert_eq!(b3.method, MoMethod::Mo3);
    }

    #[test]
    fn jumps_round_trip_with_mask_filter() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("j.csv");
        // build a tiny detection outcome by hand
        let series = crate::series::ReturnSeries {
            symbol: "X".into(),
            method: MoMethod::Mo1,
            values: vec![Some(0.001); 200],
            session: SessionSpec { minutes_per_day: 200, days: 1, sampling_interval: 1, day_clock_minutes: 200 },
            pattern: vec![],
        };
        let mut spiked = series.clone();
        spiked.values[150] = Some(0.05);
        let cfg = DetectionConfig { warmup: 10, ..Default::default() };
        let outcome =
            crate::detect::run_six_variants(&spiked, &spiked, &spiked, &cfg).unwrap();
        write_jumps_csv(&path, &outcome).unwrap();
        let inter = read_jumps_csv(&path, "X", 200, 63).unwrap();
        assert_eq!(inter.times, outcome.intersection.times);
        assert_eq!(inter.times, vec![151]);
        let _ = VolEstimator::ALL;
    }

    #[test]
    fn events_and_truth_round_trip() {
        let dir = tempdir().unwrap();
        let e = EventSeries::new("X", vec![3, 9, 44], 100).unwrap();
        let path = dir.path().join("e.csv");
        write_events_csv(&path, &e).unwrap();
        let back = read_events_csv(&path, "X", 100).unwrap();
        assert_eq!(back.times, e.times);

        let jumps = vec![
            PlantedJump { minute: 5, size: 0.01, multiple: 5.0 },
            PlantedJump { minute: 9, size: -0.02, multiple: 6.0 },
        ];
        let tpath = dir.path().join("truth.csv");
        write_truth_csv(&tpath, &jumps).unwrap();
        let back = read_truth_csv(&tpath).unwrap();
        assert_eq!(back, vec![(5, 0.01), (9, -0.02)]);
    }

    #[test]
    fn band_csv_has_plot_ready_columns() {
        let dir = tempdir().unwrap();
        let grid: Vec<u32> = (1..=5).collect();
        let band = crate::mctest::poisson_mj_band(2.4e-3, &grid, 44_440, [0.95, 0.99]).unwrap();
        let obs = WindowStat { w_grid: grid, values: vec![0.0; 5], sample_len: 44_440 };
        let path = dir.path().join("band.csv");
        write_band_csv(&path, &obs, &band).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("w,observed,mean,lo95,hi95,lo99,hi99,source\n"));
        assert_eq!(text.lines().count(), 6);
        assert!(text.contains("analytic-poisson"));
    }
}
