//! Post-processing probes for the phase-field runs: interface location by
//! half-level crossing, grain radius by integrated area, weighted error
//! norms, and the closed-form references they are compared against.

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum MetricsError {
    #[error("the profile never crosses the half level")]
    NoCrossing,
    #[error("the profile crosses the half level more than once")]
    MultipleCrossings,
    #[error("integrated phase area is negative")]
    NegativeArea,
}

/// Traveling-wave interface center x0 + mobility * mu0 * t / gamma.
pub fn analytic_interface_position(x0: f64, mobility: f64, mu0: f64, gamma: f64, t: f64) -> f64 {
    x0 + mobility * mu0 * t / gamma
}

/// Equilibrium interface profile 0.5 (1 - tanh((x - center) / xi)).
pub fn analytic_profile(x: f64, center: f64, xi: f64) -> f64 {
    0.5 * (1.0 - ((x - center) / xi).tanh())
}

/// Radius of a shrinking quarter grain, sqrt(r0^2 - 2 mobility t); `None`
/// once the grain has vanished.
pub fn expected_radius(r0: f64, mobility: f64, t: f64) -> Option<f64> {
    let r2 = r0 * r0 - 2.0 * mobility * t;
    if r2 >= 0.0 { Some(r2.sqrt()) } else { None }
}

/// Location where a sampled profile crosses 0.5, by linear interpolation
/// between the bracketing nodes. The crossing must be unique.
pub fn measure_interface_position(xs: &[f64], u: &[f64]) -> Result<f64, MetricsError> {
    assert_eq!(xs.len(), u.len());
    let mut hits: Vec<f64> = Vec::new();
    for i in 0..u.len() {
        let d = u[i] - 0.5;
        if d == 0.0 {
            // plateau nodes count once
            if i == 0 || u[i - 1] != 0.5 {
                hits.push(xs[i]);
            }
            continue;
        }
        if i + 1 < u.len() {
            let dn = u[i + 1] - 0.5;
            if d * dn < 0.0 {
                hits.push(xs[i] + (0.5 - u[i]) * (xs[i + 1] - xs[i]) / (u[i + 1] - u[i]));
            }
        }
    }
    match hits.len() {
        0 => Err(MetricsError::NoCrossing),
        1 => Ok(hits[0]),
        _ => Err(MetricsError::MultipleCrossings),
    }
}

/// Radius of a quarter grain anchored at the domain corner, recovered from
/// the integrated phase fraction: area = pi r^2 / 4.
pub fn measure_grain_radius(u: &[f64], weights: &[f64]) -> Result<f64, MetricsError> {
    assert_eq!(u.len(), weights.len());
    let area: f64 = u.iter().zip(weights).map(|(v, w)| v * w).sum();
    if area < 0.0 {
        return Err(MetricsError::NegativeArea);
    }
    Ok((4.0 * area / std::f64::consts::PI).sqrt())
}

/// sqrt( sum_i w_i (u_i - r_i)^2 ).
pub fn weighted_l2_error(u: &[f64], reference: &[f64], weights: &[f64]) -> f64 {
    u.iter()
        .zip(reference)
        .zip(weights)
        .map(|((a, b), w)| w * (a - b) * (a - b))
        .sum::<f64>()
        .sqrt()
}

pub fn linf_error(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0_f64, |m, (x, y)| m.max((x - y).abs()))
}

/// Ordinary least-squares slope of ys against xs.
pub fn least_squares_slope(xs: &[f64], ys: &[f64]) -> f64 {
    assert!(xs.len() == ys.len() && xs.len() >= 2);
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        num += (x - mx) * (y - my);
        den += (x - mx) * (x - mx);
    }
    num / den
}

/// One sample of a tracked quantity next to its closed-form reference.
#[derive(Debug, Clone, Copy)]
pub struct TrackPoint {
    pub t: f64,
    pub measured: f64,
    pub analytic: f64,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interface_recovered_from_a_sampled_front() {
        let xs: Vec<f64> = (0..=40).map(|i| i as f64).collect();
        let u: Vec<f64> = xs.iter().map(|x| analytic_profile(*x, 20.3, 1.5)).collect();
        let pos = measure_interface_position(&xs, &u).unwrap();
        assert!((pos - 20.3).abs() < 0.05, "measured {pos}");
    }

    #[test]
    fn crossing_failures_are_reported() {
        let xs = [0.0, 1.0, 2.0];
        assert_eq!(measure_interface_position(&xs, &[0.2, 0.3, 0.2]), Err(MetricsError::NoCrossing));
        assert_eq!(
            measure_interface_position(&xs, &[0.8, 0.2, 0.8]),
            Err(MetricsError::MultipleCrossings)
        );
        assert_eq!(measure_interface_position(&xs, &[1.0, 0.5, 0.0]), Ok(1.0));
    }

    #[test]
    fn quarter_grain_radius_from_area() {
        let grid = crate::mesh::build_cartesian_grid(2, &[[0.0, 64.0], [0.0, 64.0]], 1.0).unwrap();
        let w = grid.mass_weights();
        let u: Vec<f64> = (0..grid.vertex_count())
            .map(|i| {
                let [x, y] = grid.vertex_coords(i);
                let rho = (x * x + y * y).sqrt();
                0.5 * (1.0 - ((rho - 20.0) / 2.0).tanh())
            })
            .collect();
        let r = measure_grain_radius(&u, &w).unwrap();
        assert!((r - 20.0).abs() < 0.3, "measured {r}");
    }

    #[test]
    fn shrinkage_law_round_numbers() {
        assert!((expected_radius(32.0, 1.0, 0.0).unwrap() - 32.0).abs() < 1e-14);
        let r = expected_radius(32.0, 1.0, 100.0).unwrap();
        assert!((r - 824.0_f64.sqrt()).abs() < 1e-12);
        assert_eq!(expected_radius(32.0, 1.0, 513.0), None);
    }

    #[test]
    fn traveling_wave_reaches_thirty() {
        let x = analytic_interface_position(20.0, 1.0, 0.1, 1.0, 100.0);
        assert!((x - 30.0).abs() < 1e-13);
    }

    #[test]
    fn slope_of_an_exact_line() {
        let xs: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 - 2.0 * x).collect();
        assert!((least_squares_slope(&xs, &ys) + 2.0).abs() < 1e-12);
    }

    #[test]
    fn error_norms_on_hand_numbers() {
        let u = [1.0, 2.0, 3.0];
        let r = [1.0, 1.0, 5.0];
        let w = [0.5, 1.0, 0.25];
        assert!((weighted_l2_error(&u, &r, &w) - 2.0_f64.sqrt()).abs() < 1e-14);
        assert_eq!(linf_error(&u, &r), 2.0);
    }
}
