//! Discomfort heat grids over the (x, z) plane, CSV and SVG exports, and
//! text tables for experiment grids.

mod tables;

pub use tables::{emit_grid_tables, format_accuracy, format_kappa};

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::dataset::propagate_levels;
use crate::error::{Error, Result};
use crate::model::{attribute_index, AttributeGroup, SessionRecord, ATTRIBUTES};

pub const DEFAULT_RESOLUTION: (usize, usize) = (64, 64);
pub const HEAT_CSV_HEADER: &str = "ix,iz,center_x,center_z,count_0,count_1,count_2,count_3,mean";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub min_x: f64,
    pub min_z: f64,
    pub max_x: f64,
    pub max_z: f64,
}

impl Bounds {
    /// Smallest box holding every frame position; a flat extent is widened
    /// by 0.5 on each side so that cells have positive size.
    pub fn of_sessions(sessions: &[SessionRecord]) -> Option<Bounds> {
        let mut it = sessions.iter().flat_map(|s| s.frames.iter()).map(|f| (f.position_x, f.position_z));
        let (x0, z0) = it.next()?;
        let mut b = Bounds { min_x: x0, min_z: z0, max_x: x0, max_z: z0 };
        for (x, z) in it {
            b.min_x = b.min_x.min(x);
            b.max_x = b.max_x.max(x);
            b.min_z = b.min_z.min(z);
            b.max_z = b.max_z.max(z);
        }
        if b.max_x - b.min_x <= 0.0 {
            b.min_x -= 0.5;
            b.max_x += 0.5;
        }
        if b.max_z - b.min_z <= 0.0 {
            b.min_z -= 0.5;
            b.max_z += 0.5;
        }
        Some(b)
    }
}

/// Per-cell counts of quarterly levels 0..=3, row-major with `ix` fastest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeatGrid {
    pub bounds: Bounds,
    pub nx: usize,
    pub nz: usize,
    pub counts: Vec<[u64; 4]>,
}

impl HeatGrid {
    pub fn empty(bounds: Bounds, nx: usize, nz: usize) -> Result<Self> {
        if nx == 0 || nz == 0 {
            return Err(Error::InvalidParameter("grid resolution must be positive".into()));
        }
        if !(bounds.max_x > bounds.min_x && bounds.max_z > bounds.min_z) {
            return Err(Error::InvalidParameter("grid bounds must have positive extent".into()));
        }
        Ok(Self { bounds, nx, nz, counts: vec![[0; 4]; nx * nz] })
    }

    fn axis(v: f64, lo: f64, hi: f64, n: usize) -> usize {
        let t = ((v - lo) / (hi - lo) * n as f64).floor();
        (t.max(0.0) as usize).min(n - 1)
    }

    /// Cell of a point; points outside the bounds land in the edge cells.
    pub fn cell_of(&self, x: f64, z: f64) -> (usize, usize) {
        let b = &self.bounds;
        (Self::axis(x, b.min_x, b.max_x, self.nx), Self::axis(z, b.min_z, b.max_z, self.nz))
    }

    pub fn add(&mut self, x: f64, z: f64, level: u8) {
        let (ix, iz) = self.cell_of(x, z);
        self.counts[iz * self.nx + ix][usize::from(level.min(3))] += 1;
    }

    pub fn cell(&self, ix: usize, iz: usize) -> [u64; 4] {
        self.counts[iz * self.nx + ix]
    }

    pub fn center(&self, ix: usize, iz: usize) -> (f64, f64) {
        let b = &self.bounds;
        let dx = (b.max_x - b.min_x) / self.nx as f64;
        let dz = (b.max_z - b.min_z) / self.nz as f64;
        (b.min_x + (ix as f64 + 0.5) * dx, b.min_z + (iz as f64 + 0.5) * dz)
    }

    /// Mean level of a cell, `None` when empty.
    pub fn mean(&self, ix: usize, iz: usize) -> Option<f64> {
        mean_of(&self.cell(ix, iz))
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    /// (ix, iz, counts) of every populated cell, iz-major.
    pub fn nonzero(&self) -> impl Iterator<Item = (usize, usize, [u64; 4])> + '_ {
        self.counts.iter().enumerate().filter(|(_, c)| c.iter().any(|&n| n > 0)).map(|(i, c)| (i % self.nx, i / self.nx, *c))
    }
}

fn mean_of(c: &[u64; 4]) -> Option<f64> {
    let n: u64 = c.iter().sum();
    if n == 0 {
        return None;
    }
    let s: u64 = c.iter().enumerate().map(|(l, &k)| l as u64 * k).sum();
    Some(s as f64 / n as f64)
}

/// Bins every labeled frame (propagated quarterly level) into a grid
/// spanning `bounds`. Sessions without reports contribute nothing.
pub fn aggregate_with_bounds(sessions: &[SessionRecord], bounds: Bounds, resolution: (usize, usize)) -> Result<HeatGrid> {
    let mut grid = HeatGrid::empty(bounds, resolution.0, resolution.1)?;
    for s in sessions {
        let Some(levels) = propagate_levels(s) else { continue };
        for (f, level) in s.frames.iter().zip(levels) {
            grid.add(f.position_x, f.position_z, level.value());
        }
    }
    Ok(grid)
}

pub fn aggregate_track_heat(sessions: &[SessionRecord], resolution: (usize, usize)) -> Result<HeatGrid> {
    let labeled: Vec<&SessionRecord> = sessions.iter().filter(|s| s.frames.iter().any(|f| f.reported_discomfort.is_some())).collect();
    if labeled.is_empty() {
        return Err(Error::NoLabeledFrames);
    }
    let owned: Vec<SessionRecord> = labeled.into_iter().cloned().collect();
    let bounds = Bounds::of_sessions(&owned).ok_or(Error::NoLabeledFrames)?;
    aggregate_with_bounds(&owned, bounds, resolution)
}

/// Partitions sessions by a profile attribute and aggregates each part over
/// the bounds of the whole input, so grids add up cell by cell.
pub fn facet_by(sessions: &[SessionRecord], facet: &str, resolution: (usize, usize)) -> Result<BTreeMap<String, HeatGrid>> {
    let idx = attribute_index(facet)?;
    if ATTRIBUTES[idx].group != AttributeGroup::Profile {
        return Err(Error::InvalidParameter(format!("`{facet}` is not a profile attribute")));
    }
    let labeled: Vec<SessionRecord> = sessions.iter().filter(|s| s.frames.iter().any(|f| f.reported_discomfort.is_some())).cloned().collect();
    let bounds = Bounds::of_sessions(&labeled).ok_or(Error::NoLabeledFrames)?;
    let mut parts: BTreeMap<String, Vec<SessionRecord>> = BTreeMap::new();
    for s in labeled {
        let value = serde_json::to_value(&s.profile)?;
        let key = match &value[facet] {
            serde_json::Value::String(v) => v.clone(),
            other => other.to_string(),
        };
        parts.entry(key).or_default().push(s);
    }
    parts.into_iter().map(|(k, v)| Ok((k, aggregate_with_bounds(&v, bounds, resolution)?))).collect()
}

/// One row per populated cell, iz-major then ix.
pub fn export_heat_csv(grid: &HeatGrid) -> String {
    let mut out = String::from(HEAT_CSV_HEADER);
    out.push('\n');
    for (ix, iz, c) in grid.nonzero() {
        let (cx, cz) = grid.center(ix, iz);
        let mean = mean_of(&c).unwrap_or(0.0);
        let _ = writeln!(out, "{ix},{iz},{cx},{cz},{},{},{},{},{mean}", c[0], c[1], c[2], c[3]);
    }
    out
}

/// Rebuilds a grid from its CSV export. Bounds and resolution are not part
/// of the CSV and must be supplied; centers and means are checked.
pub fn parse_heat_csv(text: &str, bounds: Bounds, nx: usize, nz: usize) -> Result<HeatGrid> {
    let mut grid = HeatGrid::empty(bounds, nx, nz)?;
    let mut lines = text.lines();
    if lines.next() != Some(HEAT_CSV_HEADER) {
        return Err(Error::Parse { line: 1, message: format!("expected header `{HEAT_CSV_HEADER}`") });
    }
    for (i, line) in lines.enumerate() {
        let err = |message: String| Error::Parse { line: i + 2, message };
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 9 {
            return Err(err(format!("expected 9 fields, found {}", f.len())));
        }
        let int = |s: &str| s.parse::<u64>().map_err(|_| err(format!("invalid integer `{s}`")));
        let float = |s: &str| s.parse::<f64>().map_err(|_| err(format!("invalid number `{s}`")));
        let (ix, iz) = (int(f[0])? as usize, int(f[1])? as usize);
        if ix >= nx || iz >= nz {
            return Err(err(format!("cell ({ix}, {iz}) outside a {nx}x{nz} grid")));
        }
        let counts = [int(f[4])?, int(f[5])?, int(f[6])?, int(f[7])?];
        if grid.center(ix, iz) != (float(f[2])?, float(f[3])?) {
            return Err(err("cell center does not match the bounds".into()));
        }
        if mean_of(&counts) != Some(float(f[8])?) {
            return Err(err("mean does not match the counts".into()));
        }
        grid.counts[iz * nx + ix] = counts;
    }
    Ok(grid)
}

/// Colors for mean levels 0, 1, 2 and 3; means in between interpolate linearly.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Palette(pub [[u8; 3]; 4]);

impl Default for Palette {
    /// Green, yellow, orange, red.
    fn default() -> Self {
        Palette([[0x1a, 0x98, 0x50], [0xfe, 0xe0, 0x8b], [0xfc, 0x8d, 0x59], [0xd7, 0x30, 0x27]])
    }
}

impl Palette {
    pub fn color(&self, mean: f64) -> String {
        let m = mean.clamp(0.0, 3.0);
        let lo = (m.floor() as usize).min(2);
        let t = m - lo as f64;
        let (a, b) = (self.0[lo], self.0[lo + 1]);
        let ch = |i: usize| (f64::from(a[i]) + (f64::from(b[i]) - f64::from(a[i])) * t).round() as u8;
        format!("#{:02x}{:02x}{:02x}", ch(0), ch(1), ch(2))
    }
}

pub const SVG_CELL_PX: usize = 8;

/// One rect per populated cell. +z points up, as in a top-down map.
pub fn export_heat_svg(grid: &HeatGrid, palette: &Palette) -> String {
    let (w, h) = (grid.nx * SVG_CELL_PX, grid.nz * SVG_CELL_PX);
    let mut out = String::new();
    let _ = writeln!(out, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" style="background:#ffffff">"#);
    for (ix, iz, c) in grid.nonzero() {
        let mean = mean_of(&c).unwrap_or(0.0);
        let _ = writeln!(
            out,
            r#"<rect x="{}" y="{}" width="{SVG_CELL_PX}" height="{SVG_CELL_PX}" fill="{}"/>"#,
            ix * SVG_CELL_PX,
            (grid.nz - 1 - iz) * SVG_CELL_PX,
            palette.color(mean)
        );
    }
    out.push_str("</svg>\n");
    out
}
