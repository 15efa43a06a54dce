use super::GridResult;
use crate::error::{PlanError, Result};
use crate::scalar::Scalar;

/// Coverage statistics of an evaluated raster.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoverageSummary<T> {
    pub cells: usize,
    /// Fraction of cells whose best-server power reaches the RSRP threshold.
    pub rsrp_fraction: T,
    /// Fraction of cells whose SINR reaches the target.
    pub sinr_fraction: T,
    pub mean_throughput_bps: T,
    pub p10_throughput_bps: T,
    pub p50_throughput_bps: T,
    pub p90_throughput_bps: T,
    /// Cells inside the satellite footprint.
    pub ntn_cells: usize,
    pub ntn_mean_throughput_bps: Option<T>,
}

/// Nearest-rank percentile of an ascending slice; `p` in percent.
pub fn nearest_rank<T: Scalar>(sorted: &[T], p: f64) -> Option<T> {
    if sorted.is_empty() {
        return None;
    }
    let rank = ((p.clamp(0.0, 100.0) / 100.0) * sorted.len() as f64).ceil() as usize;
    Some(sorted[rank.max(1) - 1])
}

fn mean<T: Scalar>(v: impl Iterator<Item = T>) -> Option<T> {
    let (sum, n) = v.fold((T::zero(), 0usize), |(s, n), x| (s + x, n + 1));
    (n > 0).then(|| sum / T::lit(n as f64))
}

pub fn coverage_stats<T: Scalar>(g: &GridResult<T>, rsrp_threshold_dbw: T, sinr_target_db: T) -> Result<CoverageSummary<T>> {
    let n = g.cells.len();
    if n == 0 {
        return Err(PlanError::domain("grid", "no cells inside the polygon"));
    }
    let frac = |k: usize| T::lit(k as f64) / T::lit(n as f64);
    let rsrp_ok = g.cells.iter().filter(|c| c.rsrp_dbw() >= rsrp_threshold_dbw).count();
    let sinr_ok = g.cells.iter().filter(|c| c.sinr_db >= sinr_target_db).count();
    let mut tput: Vec<T> = g.cells.iter().map(|c| c.throughput_bps).collect();
    tput.sort_by(|a, b| a.partial_cmp(b).expect("finite throughput"));
    let ntn: Vec<T> = g.cells.iter().filter_map(|c| c.ntn.map(|x| x.throughput_bps)).collect();
    Ok(CoverageSummary {
        cells: n,
        rsrp_fraction: frac(rsrp_ok),
        sinr_fraction: frac(sinr_ok),
        mean_throughput_bps: mean(tput.iter().copied()).expect("non-empty"),
        p10_throughput_bps: nearest_rank(&tput, 10.0).expect("non-empty"),
        p50_throughput_bps: nearest_rank(&tput, 50.0).expect("non-empty"),
        p90_throughput_bps: nearest_rank(&tput, 90.0).expect("non-empty"),
        ntn_cells: ntn.len(),
        ntn_mean_throughput_bps: mean(ntn.into_iter()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{GridCell, Point};

    fn cell(rsrp: f64, sinr: f64, tput: f64) -> GridCell<f64> {
        GridCell {
            position: Point::new(0.0, 0.0),
            rsrp_per_source_dbw: vec![rsrp],
            best_server: 0,
            sinr_db: sinr,
            snr_db: sinr,
            throughput_bps: tput,
            ntn: None,
        }
    }

    fn grid(cells: Vec<GridCell<f64>>) -> GridResult<f64> {
        GridResult {
            resolution_m: 1.0,
            columns: cells.len(),
            rows: 1,
            source_labels: vec!["a".into()],
            cells,
        }
    }

    #[test]
    fn extremes() {
        let g = grid(vec![cell(-60.0, 20.0, 1e8), cell(-70.0, 15.0, 2e8)]);
        let all = coverage_stats(&g, -80.0, 10.0).unwrap();
        assert_eq!((all.rsrp_fraction, all.sinr_fraction), (1.0, 1.0));
        let none = coverage_stats(&g, -50.0, 30.0).unwrap();
        assert_eq!((none.rsrp_fraction, none.sinr_fraction), (0.0, 0.0));
        assert!(coverage_stats(&grid(vec![]), -80.0, 10.0).is_err());
    }

    #[test]
    fn hand_counted_mixed_grid() {
        // rsrp >= -75: cells 0,1,3 -> 3/5; sinr >= 10: cells 1,2 -> 2/5.
        let g = grid(vec![
            cell(-70.0, 5.0, 5.0),
            cell(-75.0, 10.0, 1.0),
            cell(-80.0, 12.0, 4.0),
            cell(-60.0, 9.99, 2.0),
            cell(-90.0, -3.0, 3.0),
        ]);
        let s = coverage_stats(&g, -75.0, 10.0).unwrap();
        assert_eq!(s.rsrp_fraction, 0.6);
        assert_eq!(s.sinr_fraction, 0.4);
        assert_eq!(s.mean_throughput_bps, 3.0);
        // Sorted 1,2,3,4,5: ranks ceil(0.5)=1, ceil(2.5)=3, ceil(4.5)=5.
        assert_eq!(s.p10_throughput_bps, 1.0);
        assert_eq!(s.p50_throughput_bps, 3.0);
        assert_eq!(s.p90_throughput_bps, 5.0);
        assert_eq!(s.ntn_mean_throughput_bps, None);
    }

    #[test]
    fn nearest_rank_edges() {
        assert_eq!(nearest_rank::<f64>(&[], 50.0), None);
        assert_eq!(nearest_rank(&[7.0], 0.0), Some(7.0));
        assert_eq!(nearest_rank(&[1.0, 2.0, 3.0, 4.0], 100.0), Some(4.0));
        assert_eq!(nearest_rank(&[1.0, 2.0, 3.0, 4.0], 25.0), Some(1.0));
        assert_eq!(nearest_rank(&[1.0, 2.0, 3.0, 4.0], 26.0), Some(2.0));
    }
}
