use crate::error::{Error, Result};

/// Vertices `(x, F_n(x))` of the least concave majorant of the empirical
/// distribution function on `[0, z_(n)]`.
fn majorant(z: &[f64]) -> Vec<(f64, f64)> {
    let mut s = z.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len() as f64;
    let mut pts: Vec<(f64, f64)> = vec![(0.0, 0.0)];
    for (i, &v) in s.iter().enumerate() {
        let p = (v, (i + 1) as f64 / n);
        match pts.last_mut() {
            Some(last) if last.0 == v => *last = p,
            _ => pts.push(p),
        }
    }
    let mut hull: Vec<(f64, f64)> = Vec::with_capacity(pts.len());
    for p in pts {
        while hull.len() >= 2 {
            let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            // Drop b unless it lies strictly above the chord a-p.
            if (b.1 - a.1) * (p.0 - a.0) <= (p.1 - a.1) * (b.0 - a.0) {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    hull
}

/// Knots and slopes of the Grenander estimator: on `(knots[k], knots[k+1]]`
/// the density estimate is `slopes[k]`.
pub fn grenander_slopes(z: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    check(z)?;
    let hull = majorant(z);
    let knots = hull.iter().map(|p| p.0).collect();
    let slopes = hull.windows(2).map(|w| (w[1].1 - w[0].1) / (w[1].0 - w[0].0)).collect();
    Ok((knots, slopes))
}

fn check(z: &[f64]) -> Result<()> {
    if z.is_empty() {
        return Err(Error::Data("empty sample".into()));
    }
    if z.iter().any(|&v| !(v > 0.0 && v.is_finite())) {
        return Err(Error::Data("observations must be positive and finite".into()));
    }
    Ok(())
}

/// Left derivative at `c` of the least concave majorant of the empirical
/// distribution function (0 beyond the largest observation).
pub fn grenander_at(z: &[f64], c: f64) -> Result<f64> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::InvalidInput(format!("evaluation point must be positive, got {c}")));
    }
    let (knots, slopes) = grenander_slopes(z)?;
    if c > knots[knots.len() - 1] {
        return Ok(0.0);
    }
    // First knot >= c closes the segment containing c.
    let k = knots.partition_point(|&x| x < c);
    Ok(slopes[k - 1])
}
