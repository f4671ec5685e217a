//! Capacity/quality sweeps over `(bps, k)` grids.

use std::fmt;
use std::io::{self, Write};
use std::num::NonZeroUsize;
use std::thread;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use stegowave_core::aes::Block;
use stegowave_core::metrics::{sweep_point, SweepRow};
use stegowave_core::{GrayImage, SecretKey};
use thiserror::Error;

pub const CSV_HEADER: &str = "bps,k,slot_count,capacity_kb,used_bits,mse,psnr_db,lossless";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridPoint {
    pub bps: u8,
    pub k: f64,
}

impl fmt::Display for GridPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.bps, self.k)
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum GridError {
    #[error("empty grid")]
    Empty,
    #[error("grid point {0:?} is not of the form <bps>:<k>")]
    Syntax(String),
    #[error("grid point {0:?}: bps must be 1, 2 or 3")]
    Bps(String),
    #[error("grid point {0:?}: k must be a finite value > 0")]
    K(String),
}

/// A parsed grid specification.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid(pub Vec<GridPoint>);

impl std::str::FromStr for Grid {
    type Err = GridError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_grid(s).map(Grid)
    }
}

/// Parses a comma-separated list of `<bps>:<k>` points, e.g. `2:20,3:30`.
pub fn parse_grid(spec: &str) -> Result<Vec<GridPoint>, GridError> {
    let mut points = Vec::new();
    for item in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (bps, k) = item
            .split_once(':')
            .ok_or_else(|| GridError::Syntax(item.to_owned()))?;
        let bps: u8 = bps
            .trim()
            .parse()
            .ok()
            .filter(|b| (1..=3).contains(b))
            .ok_or_else(|| GridError::Bps(item.to_owned()))?;
        let k: f64 = k
            .trim()
            .parse()
            .ok()
            .filter(|k: &f64| k.is_finite() && *k > 0.0)
            .ok_or_else(|| GridError::K(item.to_owned()))?;
        points.push(GridPoint { bps, k });
    }
    if points.is_empty() {
        return Err(GridError::Empty);
    }
    Ok(points)
}

/// The 18-point reference lattice: `k` from the constellation maximum up to
/// 30 in steps of 5 for each bps.
pub fn default_grid() -> Vec<GridPoint> {
    let lattice: [(u8, &[f64]); 3] = [
        (1, &[1.5, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0]),
        (2, &[5.0, 10.0, 15.0, 20.0, 25.0, 30.0]),
        (3, &[10.5, 15.0, 20.0, 25.0, 30.0]),
    ];
    lattice
        .iter()
        .flat_map(|&(bps, ks)| ks.iter().map(move |&k| GridPoint { bps, k }))
        .collect()
}

#[derive(Debug, Clone, Default)]
pub struct SweepConfig {
    /// Seed for the random payloads; point `i` uses ChaCha stream `i`.
    pub seed: u64,
    pub iv: Block,
    /// Worker threads; `None` uses the available parallelism.
    pub jobs: Option<NonZeroUsize>,
}

pub type PointResult = Result<SweepRow, stegowave_core::Error>;

fn run_point(
    cover: &GrayImage,
    key: &SecretKey,
    config: &SweepConfig,
    index: usize,
    p: GridPoint,
) -> PointResult {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(index as u64);
    sweep_point(cover, key, p.k, p.bps, &config.iv, &mut rng)
}

/// Evaluates every grid point. Results are in grid order and do not depend
/// on the number of worker threads.
pub fn run_sweep(
    cover: &GrayImage,
    key: &SecretKey,
    grid: &[GridPoint],
    config: &SweepConfig,
) -> Vec<PointResult> {
    let jobs = config
        .jobs
        .or_else(|| thread::available_parallelism().ok())
        .map_or(1, NonZeroUsize::get)
        .min(grid.len().max(1));
    let mut results: Vec<Option<PointResult>> = vec![None; grid.len()];
    thread::scope(|scope| {
        for (worker, chunk) in results
            .chunks_mut(grid.len().div_ceil(jobs).max(1))
            .enumerate()
        {
            let offset = worker * grid.len().div_ceil(jobs).max(1);
            scope.spawn(move || {
                for (j, slot) in chunk.iter_mut().enumerate() {
                    let index = offset + j;
                    *slot = Some(run_point(cover, key, config, index, grid[index]));
                }
            });
        }
    });
    results
        .into_iter()
        .map(|r| r.expect("every point evaluated"))
        .collect()
}

fn format_psnr(psnr: f64) -> String {
    if psnr.is_infinite() {
        "inf".to_owned()
    } else {
        format!("{psnr:.2}")
    }
}

/// Writes the header and one CSV row per point. Failed points keep their
/// `bps` and `k` and leave the measured columns empty.
pub fn write_csv<W: Write>(
    mut out: W,
    grid: &[GridPoint],
    results: &[PointResult],
) -> io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for (p, r) in grid.iter().zip(results) {
        match r {
            Ok(row) => writeln!(
                out,
                "{},{},{},{:.2},{},{:.4},{},{}",
                row.bps,
                row.k,
                row.slot_count,
                row.capacity_kb,
                row.used_bits,
                row.mse,
                format_psnr(row.psnr_db),
                u8::from(row.lossless)
            )?,
            Err(_) => writeln!(out, "{},{},,,,,,0", p.bps, p.k)?,
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_points() {
        assert_eq!(
            parse_grid("2:20, 3:30.5,").unwrap(),
            vec![GridPoint { bps: 2, k: 20.0 }, GridPoint { bps: 3, k: 30.5 }]
        );
    }

    #[test]
    fn rejects_bad_grids() {
        assert_eq!(parse_grid(""), Err(GridError::Empty));
        assert_eq!(parse_grid(" , "), Err(GridError::Empty));
        assert!(matches!(parse_grid("2-20"), Err(GridError::Syntax(_))));
        assert!(matches!(parse_grid("4:20"), Err(GridError::Bps(_))));
        assert!(matches!(parse_grid("2:-1"), Err(GridError::K(_))));
        assert!(matches!(parse_grid("2:nan"), Err(GridError::K(_))));
    }

    #[test]
    fn default_grid_has_eighteen_points() {
        let grid = default_grid();
        assert_eq!(grid.len(), 18);
        assert_eq!(grid.iter().filter(|p| p.bps == 1).count(), 7);
        assert_eq!(grid[0], GridPoint { bps: 1, k: 1.5 });
        assert_eq!(grid[17], GridPoint { bps: 3, k: 30.0 });
    }

    #[test]
    fn psnr_sentinel() {
        assert_eq!(format_psnr(f64::INFINITY), "inf");
        assert_eq!(format_psnr(35.956), "35.96");
    }

    #[test]
    fn results_do_not_depend_on_jobs() {
        let cover = GrayImage::from_fn(32, |r, c| (r * 7 + c * 3 + (r * c) % 11) as u8).unwrap();
        let key = SecretKey::new([3; 16]);
        let grid = parse_grid("1:5,2:10,3:20,2:30,1:1.5").unwrap();
        let csv = |jobs| {
            let config = SweepConfig {
                jobs: NonZeroUsize::new(jobs),
                ..SweepConfig::default()
            };
            let mut out = Vec::new();
            write_csv(&mut out, &grid, &run_sweep(&cover, &key, &grid, &config)).unwrap();
            String::from_utf8(out).unwrap()
        };
        let one = csv(1);
        assert_eq!(one, csv(3));
        assert_eq!(one, csv(8));
        assert_eq!(one.lines().count(), grid.len() + 1);
    }
}
