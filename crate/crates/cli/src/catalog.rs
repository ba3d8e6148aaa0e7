//! Named analytic forcing/data functions referenced by experiment configs.

use std::sync::Arc;

use fracwr::solver2d::{SpaceFn2, SpaceTimeFn2};
use fracwr::{FracError, Result, SpaceFn, SpaceTimeFn};

pub fn forcing(name: &str) -> Result<SpaceTimeFn> {
    let pi = std::f64::consts::PI;
    Ok(match name {
        "zero" => Arc::new(|_, _| 0.0),
        "sin_pi_x_over_2" => Arc::new(move |x: f64, _| (pi * x / 2.0).sin()),
        "sin_pi_x_over_16" => Arc::new(move |x: f64, _| (pi * x / 16.0).sin()),
        "sin_pi_x" => Arc::new(move |x: f64, _| (pi * x).sin()),
        _ => {
            return Err(FracError::InvalidParameter(format!(
                "unknown forcing `{name}` (known: zero, sin_pi_x_over_2, sin_pi_x_over_16, sin_pi_x)"
            )))
        }
    })
}

pub fn initial(name: &str) -> Result<SpaceFn> {
    Ok(match name {
        "zero" => Arc::new(|_| 0.0),
        "parabola_0_16" => Arc::new(|x: f64| x * (16.0 - x) / 64.0),
        "hat" => Arc::new(|x: f64| 1.0 - (x - 1.0).abs().min(1.0)),
        _ => {
            return Err(FracError::InvalidParameter(format!(
                "unknown initial datum `{name}` (known: zero, parabola_0_16, hat)"
            )))
        }
    })
}

pub fn forcing_2d(name: &str) -> Result<SpaceTimeFn2> {
    Ok(match name {
        "zero" => Arc::new(|_, _, _| 0.0),
        _ => {
            return Err(FracError::InvalidParameter(format!(
                "unknown 2D forcing `{name}` (known: zero)"
            )))
        }
    })
}

pub fn initial_2d(name: &str) -> Result<SpaceFn2> {
    Ok(match name {
        "zero" => Arc::new(|_, _| 0.0),
        // the strip-decomposition experiment's initial datum
        "gauss_bump" => Arc::new(|x: f64, y: f64| x * (2.0 - x) * (-10.0 * y * y).exp()),
        _ => {
            return Err(FracError::InvalidParameter(format!(
                "unknown 2D initial datum `{name}` (known: zero, gauss_bump)"
            )))
        }
    })
}
