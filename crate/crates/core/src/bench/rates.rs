use crate::{Error, Result};

/// Minimum number of points in a fit.
pub const MIN_POINTS: usize = 6;

/// Least-squares line through `(log10 N, log10 Q)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    /// Smallest and largest `N` in the window.
    pub n_min: f64,
    pub n_max: f64,
    pub points: usize,
    /// Root-mean-square residual in `log10 Q`.
    pub residual: f64,
}

impl RateFit {
    pub fn predict(&self, n: f64) -> f64 {
        10f64.powf(self.intercept + self.slope * n.log10())
    }
}

/// Fits over the points with `N >= N_max / 10^decades`, extended towards
/// smaller `N` until it holds at least [`MIN_POINTS`] points spanning at
/// least one decade.
pub fn fit_rate(points: &[(f64, f64)], decades: f64) -> Result<RateFit> {
    if !(decades > 0.0) {
        return Err(Error::DegenerateWindow(format!("window of {decades} decades")));
    }
    if let Some(p) = points.iter().find(|(n, q)| !(*n > 0.0 && *q > 0.0) || !n.is_finite() || !q.is_finite()) {
        return Err(Error::DegenerateWindow(format!("non-positive point ({}, {})", p.0, p.1)));
    }
    let mut sorted = points.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    if sorted.len() < MIN_POINTS {
        return Err(Error::DegenerateWindow(format!("{} points, need {MIN_POINTS}", sorted.len())));
    }
    let n_max = sorted.last().unwrap().0;
    let cutoff = n_max / 10f64.powf(decades);
    let mut start = sorted.iter().position(|(n, _)| *n >= cutoff).unwrap_or(0);
    let spans_decade = |start: usize| n_max / sorted[start].0 >= 10.0 * (1.0 - 1e-12);
    while start > 0 && (sorted.len() - start < MIN_POINTS || !spans_decade(start)) {
        start -= 1;
    }
    if !spans_decade(start) {
        return Err(Error::DegenerateWindow(format!("dofs {}..{n_max} span less than one decade", sorted[0].0)));
    }
    let window = &sorted[start..];
    let n_min = window[0].0;

    let xs: Vec<f64> = window.iter().map(|p| p.0.log10()).collect();
    let ys: Vec<f64> = window.iter().map(|p| p.1.log10()).collect();
    let m = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / m, ys.iter().sum::<f64>() / m);
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = (xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum::<f64>() / m).sqrt();
    Ok(RateFit { slope, intercept, n_min, n_max, points: window.len(), residual })
}
