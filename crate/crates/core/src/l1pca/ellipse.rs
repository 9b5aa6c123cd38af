use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Ellipse centred at the point mean with axes along the eigenvectors of
/// the point scatter, scaled radially to cover the requested share of
/// points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EllipseSpec {
    pub label: String,
    pub center: [f64; 2],
    /// Major then minor semi-axis.
    pub semi_axes: [f64; 2],
    /// Angle of the major axis from the first coordinate axis, radians in
    /// (−π/2, π/2].
    pub angle: f64,
    /// Share of the points inside or on the ellipse.
    pub coverage: f64,
}

pub fn covering_ellipse(label: &str, points: &[[f64; 2]], coverage: f64) -> Result<EllipseSpec> {
    if !(coverage > 0.0 && coverage <= 1.0) {
        return Err(Error::InvalidParameter(format!("coverage {coverage} not in (0, 1]")));
    }
    let n = points.len();
    if n < 3 {
        return Err(Error::DegenerateGeometry(format!("{n} points; need at least 3")));
    }
    let nf = n as f64;
    let cx = points.iter().map(|p| p[0]).sum::<f64>() / nf;
    let cy = points.iter().map(|p| p[1]).sum::<f64>() / nf;
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for p in points {
        let (dx, dy) = (p[0] - cx, p[1] - cy);
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    sxx /= nf - 1.0;
    syy /= nf - 1.0;
    sxy /= nf - 1.0;

    let half_trace = (sxx + syy) / 2.0;
    let disc = (((sxx - syy) / 2.0).powi(2) + sxy * sxy).sqrt();
    let major = half_trace + disc;
    let minor = half_trace - disc;
    if minor.is_nan() || minor <= 1e-12 * major.max(f64::MIN_POSITIVE) {
        return Err(Error::DegenerateGeometry(
            "points are identical or collinear".into(),
        ));
    }
    // Major-axis direction.
    let mut angle = if sxy == 0.0 {
        if sxx >= syy {
            0.0
        } else {
            std::f64::consts::FRAC_PI_2
        }
    } else {
        (major - sxx).atan2(sxy)
    };
    if angle <= -std::f64::consts::FRAC_PI_2 {
        angle += std::f64::consts::PI;
    } else if angle > std::f64::consts::FRAC_PI_2 {
        angle -= std::f64::consts::PI;
    }
    let (c, s) = (angle.cos(), angle.sin());

    // Radial scale of each point in the whitened frame.
    let mut radii: Vec<f64> = points
        .iter()
        .map(|p| {
            let (dx, dy) = (p[0] - cx, p[1] - cy);
            let u = dx * c + dy * s;
            let v = -dx * s + dy * c;
            (u * u / major + v * v / minor).sqrt()
        })
        .collect();
    radii.sort_by(f64::total_cmp);
    let needed = ((coverage * nf).ceil() as usize).clamp(1, n);
    let scale = radii[needed - 1];
    let inside = radii.iter().filter(|&&r| r <= scale).count();

    Ok(EllipseSpec {
        label: label.to_owned(),
        center: [cx, cy],
        semi_axes: [scale * major.sqrt(), scale * minor.sqrt()],
        angle,
        coverage: inside as f64 / nf,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    #[test]
    fn unit_circle() {
        let n = 1000;
        let pts: Vec<[f64; 2]> = (0..n)
            .map(|i| {
                let a = i as f64 * std::f64::consts::TAU / n as f64;
                [a.cos(), a.sin()]
            })
            .collect();
        let e = covering_ellipse("c", &pts, 0.95).unwrap();
        assert!(e.center[0].abs() < 1e-2 && e.center[1].abs() < 1e-2);
        assert!((e.semi_axes[0] - 1.0).abs() < 1e-2);
        assert!((e.semi_axes[1] - 1.0).abs() < 1e-2);
        assert!(e.coverage >= 0.95);
    }

    #[test]
    fn identical_points_degenerate() {
        let pts = vec![[1.0, 2.0]; 10];
        assert!(matches!(
            covering_ellipse("x", &pts, 0.95),
            Err(Error::DegenerateGeometry(_))
        ));
        let line: Vec<[f64; 2]> = (0..10).map(|i| [i as f64, 2.0 * i as f64]).collect();
        assert!(covering_ellipse("x", &line, 0.95).is_err());
        assert!(covering_ellipse("x", &[[0.0, 0.0], [1.0, 1.0]], 0.95).is_err());
    }

    #[test]
    fn anisotropic_orientation() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let wide = Normal::new(0.0, 2.0).unwrap();
        let narrow = Normal::new(0.0, 1.0).unwrap();
        let pts: Vec<[f64; 2]> = (0..2000)
            .map(|_| [wide.sample(&mut rng), narrow.sample(&mut rng)])
            .collect();
        let e = covering_ellipse("g", &pts, 0.95).unwrap();
        assert!(e.angle.to_degrees().abs() < 5.0, "angle {}", e.angle.to_degrees());
        assert!(e.coverage >= 0.95);
        assert!(e.semi_axes[0] > e.semi_axes[1]);

        // Same cloud along y.
        let tall: Vec<[f64; 2]> = pts.iter().map(|p| [p[1], p[0]]).collect();
        let e = covering_ellipse("g", &tall, 0.95).unwrap();
        assert!((e.angle.to_degrees().abs() - 90.0).abs() < 5.0);
    }
}
