//! Venue rasterization: per-cell received power, best server, SINR and
//! throughput from base stations, RIS panels and an optional satellite
//! overlay.

mod export;
mod stats;

pub use export::{export_grid, read_grid_csv, write_grid_csv, GridRow, GRID_CSV_HEADER};
pub use stats::{coverage_stats, nearest_rank, CoverageSummary};

use rayon::prelude::*;

use crate::error::{PlanError, Result};
use crate::link_budget::sinr_db;
use crate::propagation::{uma_path_loss, Band, LinkState, UmaCoefficients, UmaParams};
use crate::scalar::Scalar;
use crate::units::{power_sum_db, thermal_noise_dbw, NoiseParams};

/// Planar position in meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point<T> {
    pub x: T,
    pub y: T,
}

impl<T: Scalar> Point<T> {
    pub fn new(x: T, y: T) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Point<T>) -> T {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Simple polygon in planar meters.
#[derive(Debug, Clone, PartialEq)]
pub struct Polygon<T> {
    pub vertices: Vec<Point<T>>,
}

impl<T: Scalar> Polygon<T> {
    pub fn new(vertices: Vec<Point<T>>) -> Result<Self> {
        let p = Self { vertices };
        if p.vertices.len() < 3 || !(p.area() > T::zero()) {
            return Err(PlanError::domain(
                "polygon",
                "needs at least three vertices enclosing a positive area",
            ));
        }
        Ok(p)
    }

    /// Axis-aligned rectangle with corners `(x0, y0)` and `(x1, y1)`.
    pub fn rectangle(x0: T, y0: T, x1: T, y1: T) -> Result<Self> {
        Self::new(vec![
            Point::new(x0, y0),
            Point::new(x1, y0),
            Point::new(x1, y1),
            Point::new(x0, y1),
        ])
    }

    /// Enclosed area (shoelace formula), m².
    pub fn area(&self) -> T {
        let n = self.vertices.len();
        let twice = (0..n).fold(T::zero(), |acc, i| {
            let a = self.vertices[i];
            let b = self.vertices[(i + 1) % n];
            acc + a.x * b.y - b.x * a.y
        });
        (twice / T::lit(2.0)).abs()
    }

    pub fn perimeter(&self) -> T {
        let n = self.vertices.len();
        (0..n).fold(T::zero(), |acc, i| {
            acc + self.vertices[i].distance(&self.vertices[(i + 1) % n])
        })
    }

    /// (min corner, max corner).
    pub fn bounding_box(&self) -> (Point<T>, Point<T>) {
        let first = self.vertices[0];
        self.vertices.iter().skip(1).fold((first, first), |(lo, hi), v| {
            (
                Point::new(lo.x.min(v.x), lo.y.min(v.y)),
                Point::new(hi.x.max(v.x), hi.y.max(v.y)),
            )
        })
    }

    /// Even-odd ray casting.
    pub fn contains(&self, p: &Point<T>) -> bool {
        let n = self.vertices.len();
        let mut inside = false;
        let mut j = n - 1;
        for i in 0..n {
            let a = self.vertices[i];
            let b = self.vertices[j];
            if (a.y > p.y) != (b.y > p.y) && p.x < (b.x - a.x) * (p.y - a.y) / (b.y - a.y) + a.x {
                inside = !inside;
            }
            j = i;
        }
        inside
    }
}

/// A terrestrial base station.
#[derive(Debug, Clone, PartialEq)]
pub struct BsSite<T> {
    pub name: String,
    pub position: Point<T>,
    pub height_m: T,
    pub eirp_dbw: T,
    pub fc_ghz: T,
    pub bandwidth_hz: T,
    pub state: LinkState,
    pub coefficients: UmaCoefficients<T>,
    /// Throughput ceiling of a cell served by this site.
    pub peak_rate_bps: T,
}

/// A passive RIS panel reflecting one base station.
#[derive(Debug, Clone, PartialEq)]
pub struct RisPanel<T> {
    pub name: String,
    pub position: Point<T>,
    pub height_m: T,
    pub serving_bs: usize,
    pub gain_db: T,
    pub reflection_loss_db: T,
    pub state: LinkState,
    /// Fixed BS→RIS segment loss; computed from the UMa model when `None`.
    pub bs_ris_loss_db: Option<T>,
}

/// Satellite layer laid uniformly over the venue (or a footprint disk).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NtnOverlay<T> {
    pub band: Band,
    pub cnr_db: T,
    pub bandwidth_hz: T,
    pub peak_rate_bps: T,
    /// Whether the satellite carrier overlaps the terrestrial carriers.
    pub co_channel: bool,
    pub footprint: Option<(Point<T>, T)>,
}

/// Terminal parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UeParams<T> {
    pub noise_figure_db: T,
    pub height_m: T,
}

/// Everything needed to rasterize one venue.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario<T> {
    pub polygon: Polygon<T>,
    pub resolution_m: T,
    pub bs_sites: Vec<BsSite<T>>,
    pub ris_panels: Vec<RisPanel<T>>,
    pub ntn_overlay: Option<NtnOverlay<T>>,
    pub ue: UeParams<T>,
}

fn valid_label(name: &str) -> bool {
    !name.is_empty() && !name.contains([',', '"', '\n', '\r'])
}

impl<T: Scalar> Scenario<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.resolution_m > T::zero()) {
            return Err(PlanError::domain("resolution", format!("{} m must be > 0", self.resolution_m)));
        }
        Polygon::new(self.polygon.vertices.clone())?;
        if self.bs_sites.is_empty() {
            return Err(PlanError::domain("scenario", "no base station to serve the grid"));
        }
        for bs in &self.bs_sites {
            if !valid_label(&bs.name) {
                return Err(PlanError::domain("site name", format!("`{}` is empty or contains a separator", bs.name)));
            }
            if !(bs.bandwidth_hz > T::zero()) {
                return Err(PlanError::domain("bandwidth", format!("site {}: must be > 0", bs.name)));
            }
            if !(bs.peak_rate_bps >= T::zero()) {
                return Err(PlanError::domain("peak rate", format!("site {}: must be >= 0", bs.name)));
            }
        }
        for ris in &self.ris_panels {
            if !valid_label(&ris.name) {
                return Err(PlanError::domain("panel name", format!("`{}` is empty or contains a separator", ris.name)));
            }
            if ris.serving_bs >= self.bs_sites.len() {
                return Err(PlanError::domain(
                    "RIS panel",
                    format!("{} references base station #{} which does not exist", ris.name, ris.serving_bs),
                ));
            }
        }
        if let Some(ntn) = &self.ntn_overlay {
            if !(ntn.bandwidth_hz > T::zero()) {
                return Err(PlanError::domain("NTN bandwidth", "must be > 0"));
            }
        }
        Ok(())
    }

    /// Raster dimensions (columns, rows) over the polygon's bounding box.
    pub fn raster_shape(&self) -> (usize, usize) {
        let (lo, hi) = self.polygon.bounding_box();
        let count = |span: T| {
            let n = snap_up(span / self.resolution_m);
            n.to_usize().unwrap_or(0).max(1)
        };
        (count(hi.x - lo.x), count(hi.y - lo.y))
    }

    /// Cell centers inside the polygon, row-major from the bounding-box origin.
    pub fn cell_centers(&self) -> Vec<Point<T>> {
        let (lo, _) = self.polygon.bounding_box();
        let (nx, ny) = self.raster_shape();
        let half = T::lit(0.5);
        (0..ny)
            .flat_map(|j| (0..nx).map(move |i| (i, j)))
            .map(|(i, j)| {
                Point::new(
                    lo.x + (T::lit(i as f64) + half) * self.resolution_m,
                    lo.y + (T::lit(j as f64) + half) * self.resolution_m,
                )
            })
            .filter(|c| self.polygon.contains(c))
            .collect()
    }

    fn source_labels(&self) -> Vec<String> {
        self.bs_sites
            .iter()
            .map(|b| b.name.clone())
            .chain(self.ris_panels.iter().map(|r| r.name.clone()))
            .collect()
    }

    /// BS index behind a source index (sources are all sites, then all panels).
    fn owner(&self, source: usize) -> usize {
        if source < self.bs_sites.len() {
            source
        } else {
            self.ris_panels[source - self.bs_sites.len()].serving_bs
        }
    }
}

fn snap_up<T: Scalar>(x: T) -> T {
    let r = x.round();
    if (x - r).abs() <= T::lit(1e-9) * r.abs().max(T::one()) {
        r
    } else {
        x.ceil()
    }
}

/// Satellite-layer values of one cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NtnCell<T> {
    pub sinr_db: T,
    pub throughput_bps: T,
}

/// Evaluated raster cell.
#[derive(Debug, Clone, PartialEq)]
pub struct GridCell<T> {
    pub position: Point<T>,
    /// Received power per source (sites first, then panels), dBW.
    pub rsrp_per_source_dbw: Vec<T>,
    pub best_server: usize,
    pub sinr_db: T,
    pub snr_db: T,
    pub throughput_bps: T,
    pub ntn: Option<NtnCell<T>>,
}

impl<T: Scalar> GridCell<T> {
    pub fn rsrp_dbw(&self) -> T {
        self.rsrp_per_source_dbw[self.best_server]
    }
}

/// Raster evaluation result.
#[derive(Debug, Clone, PartialEq)]
pub struct GridResult<T> {
    pub resolution_m: T,
    pub columns: usize,
    pub rows: usize,
    pub source_labels: Vec<String>,
    pub cells: Vec<GridCell<T>>,
}

impl<T: Scalar> GridResult<T> {
    pub fn best_server_label(&self, cell: &GridCell<T>) -> &str {
        &self.source_labels[cell.best_server]
    }
}

/// Shannon rate of `bandwidth_hz` at `sinr_db`, capped at `peak_bps`.
pub fn truncated_shannon<T: Scalar>(bandwidth_hz: T, sinr_db: T, peak_bps: T) -> T {
    let lin = T::lit(10.0).powf(sinr_db / T::lit(10.0));
    (bandwidth_hz * (T::one() + lin).log2()).min(peak_bps)
}

fn same_carrier<T: Scalar>(a: T, b: T) -> bool {
    (a - b).abs() <= T::lit(1e-9) * a.abs().max(b.abs())
}

fn clamp_distance<T: Scalar>(d: T, c: &UmaCoefficients<T>) -> T {
    // Venue cells can sit closer than the model's minimum distance to a mast
    // or panel; they take the loss at the minimum.
    d.max(c.min_d2d_m).min(c.max_d2d_m)
}

struct Evaluator<'a, T> {
    scenario: &'a Scenario<T>,
    /// BS→panel segment loss per panel.
    bs_ris_db: Vec<T>,
    /// Noise floor per site bandwidth, dBW.
    noise_dbw: Vec<T>,
    ntn_noise_dbw: Option<T>,
}

impl<'a, T: Scalar> Evaluator<'a, T> {
    fn new(s: &'a Scenario<T>) -> Result<Self> {
        let bs_ris_db = s
            .ris_panels
            .iter()
            .map(|ris| match ris.bs_ris_loss_db {
                Some(v) => Ok(v),
                None => {
                    let bs = &s.bs_sites[ris.serving_bs];
                    let d = clamp_distance(bs.position.distance(&ris.position), &bs.coefficients);
                    uma_path_loss(&UmaParams {
                        d2d_m: d,
                        fc_ghz: bs.fc_ghz,
                        h_bs_m: bs.height_m,
                        h_ut_m: ris.height_m,
                        state: ris.state,
                        coefficients: bs.coefficients,
                    })
                }
            })
            .collect::<Result<Vec<_>>>()?;
        let noise_dbw = s
            .bs_sites
            .iter()
            .map(|bs| thermal_noise_dbw(&NoiseParams::new(bs.bandwidth_hz, s.ue.noise_figure_db)))
            .collect::<Result<Vec<_>>>()?;
        let ntn_noise_dbw = s
            .ntn_overlay
            .map(|n| thermal_noise_dbw(&NoiseParams::new(n.bandwidth_hz, s.ue.noise_figure_db)))
            .transpose()?;
        Ok(Self {
            scenario: s,
            bs_ris_db,
            noise_dbw,
            ntn_noise_dbw,
        })
    }

    fn rsrp(&self, at: &Point<T>) -> Result<Vec<T>> {
        let s = self.scenario;
        let ue_h = s.ue.height_m;
        let mut out = Vec::with_capacity(s.bs_sites.len() + s.ris_panels.len());
        for bs in &s.bs_sites {
            let d = clamp_distance(bs.position.distance(at), &bs.coefficients);
            let pl = uma_path_loss(&UmaParams {
                d2d_m: d,
                fc_ghz: bs.fc_ghz,
                h_bs_m: bs.height_m,
                h_ut_m: ue_h,
                state: bs.state,
                coefficients: bs.coefficients,
            })?;
            out.push(bs.eirp_dbw - pl);
        }
        for (ris, bs_ris) in s.ris_panels.iter().zip(&self.bs_ris_db) {
            let bs = &s.bs_sites[ris.serving_bs];
            let d = clamp_distance(ris.position.distance(at), &bs.coefficients);
            let ris_ue = uma_path_loss(&UmaParams {
                d2d_m: d,
                fc_ghz: bs.fc_ghz,
                h_bs_m: ris.height_m,
                h_ut_m: ue_h,
                state: ris.state,
                coefficients: bs.coefficients,
            })?;
            let cascade = crate::propagation::ris_cascade_path_loss(*bs_ris, ris_ue);
            out.push(bs.eirp_dbw - cascade + ris.gain_db - ris.reflection_loss_db);
        }
        Ok(out)
    }

    fn cell(&self, at: Point<T>) -> Result<GridCell<T>> {
        let s = self.scenario;
        let n_bs = s.bs_sites.len();
        let rsrp = self.rsrp(&at)?;
        let best = (0..rsrp.len())
            .reduce(|a, b| if rsrp[b] > rsrp[a] { b } else { a })
            .expect("at least one source");
        let serving = s.owner(best);
        let site = &s.bs_sites[serving];

        let mut i_ris = Vec::new();
        let mut i_tn = Vec::new();
        for (k, &p) in rsrp.iter().enumerate() {
            let owner = s.owner(k);
            if owner == serving || !same_carrier(s.bs_sites[owner].fc_ghz, site.fc_ghz) {
                continue;
            }
            if k < n_bs {
                i_tn.push(p);
            } else {
                i_ris.push(p);
            }
        }

        let n0 = self.noise_dbw[serving];
        let mut i_ntn = Vec::new();
        let ntn = match (&s.ntn_overlay, self.ntn_noise_dbw) {
            (Some(overlay), Some(ntn_n0)) if in_footprint(overlay, &at) => {
                if overlay.co_channel {
                    // Satellite carrier lands at its CNR above the terminal noise floor.
                    i_ntn.push(n0 + overlay.cnr_db);
                }
                let ntn_sinr = if overlay.co_channel {
                    let signal = ntn_n0 + overlay.cnr_db;
                    signal - power_sum_db(&[&[ntn_n0][..], &rsrp[..]].concat())?
                } else {
                    overlay.cnr_db
                };
                Some(NtnCell {
                    sinr_db: ntn_sinr,
                    throughput_bps: truncated_shannon(overlay.bandwidth_hz, ntn_sinr, overlay.peak_rate_bps),
                })
            }
            _ => None,
        };

        let p = rsrp[best];
        let sinr = sinr_db(p, &i_ntn, &i_ris, &i_tn, n0)?;
        Ok(GridCell {
            position: at,
            best_server: best,
            sinr_db: sinr,
            snr_db: p - n0,
            throughput_bps: truncated_shannon(site.bandwidth_hz, sinr, site.peak_rate_bps),
            rsrp_per_source_dbw: rsrp,
            ntn,
        })
    }
}

fn in_footprint<T: Scalar>(overlay: &NtnOverlay<T>, at: &Point<T>) -> bool {
    match overlay.footprint {
        Some((center, radius)) => center.distance(at) <= radius,
        None => true,
    }
}

/// Evaluates every raster cell of the scenario.
///
/// Cells are computed in parallel; the result is independent of the split.
pub fn evaluate_grid<T: Scalar>(s: &Scenario<T>) -> Result<GridResult<T>> {
    s.validate()?;
    let eval = Evaluator::new(s)?;
    let cells = s
        .cell_centers()
        .into_par_iter()
        .map(|c| eval.cell(c))
        .collect::<Result<Vec<_>>>()?;
    let (columns, rows) = s.raster_shape();
    Ok(GridResult {
        resolution_m: s.resolution_m,
        columns,
        rows,
        source_labels: s.source_labels(),
        cells,
    })
}
