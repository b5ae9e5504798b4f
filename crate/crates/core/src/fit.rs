//! Least-squares power-law fits in log-log coordinates.

use crate::error::invalid;
use crate::Result;

/// `log value ≈ intercept + slope·log ε`; `residual` is the largest
/// absolute deviation in log space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogLogFit {
    pub slope: f64,
    pub intercept: f64,
    pub residual: f64,
}

/// Fits `value = e^{intercept}·ε^{slope}` to `(ε, value)` pairs.
pub fn fit_loglog(points: &[(f64, f64)]) -> Result<LogLogFit> {
    if points.len() < 2 {
        return Err(invalid("a fit needs at least two points"));
    }
    if points
        .iter()
        .any(|&(x, y)| !(x > 0.0 && y > 0.0 && x.is_finite() && y.is_finite()))
    {
        return Err(invalid("log-log fit needs positive finite values"));
    }
    let n = points.len() as f64;
    let (mut sx, mut sy) = (0.0, 0.0);
    for &(x, y) in points {
        sx += libm::log(x);
        sy += libm::log(y);
    }
    let (mx, my) = (sx / n, sy / n);
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for &(x, y) in points {
        let dx = libm::log(x) - mx;
        sxx += dx * dx;
        sxy += dx * (libm::log(y) - my);
    }
    if sxx == 0.0 {
        return Err(invalid("degenerate fit: all abscissae coincide"));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = points
        .iter()
        .map(|&(x, y)| (libm::log(y) - intercept - slope * libm::log(x)).abs())
        .fold(0.0, f64::max);
    Ok(LogLogFit {
        slope,
        intercept,
        residual,
    })
}

/// Slope change when the point with the largest abscissa is dropped.
pub fn leave_largest_out(points: &[(f64, f64)]) -> Result<f64> {
    let full = fit_loglog(points)?;
    let imax = points
        .iter()
        .enumerate()
        .max_by(|a, b| a.1 .0.total_cmp(&b.1 .0))
        .map(|(i, _)| i)
        .ok_or_else(|| invalid("no points"))?;
    let rest: alloc::vec::Vec<_> = points
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != imax)
        .map(|(_, &p)| p)
        .collect();
    Ok((fit_loglog(&rest)?.slope - full.slope).abs())
}
