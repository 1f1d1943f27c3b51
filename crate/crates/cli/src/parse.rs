//! Small value parsers for list-valued flags.

use qcmod::mappings::RadialStretch;
use qcmod::verify::geometric_radii;
use qcmod::{Error, Result};

/// `"0.1,0.2"` → `[0.1, 0.2]`.
pub fn floats(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|t| {
            let t = t.trim();
            t.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::InvalidParameter(format!("not a finite number: `{t}`")))
        })
        .collect()
}

/// A point given as comma-separated coordinates; must have `n` entries.
pub fn point(s: &str, n: usize) -> Result<Vec<f64>> {
    let v = floats(s)?;
    if v.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: v.len() });
    }
    Ok(v)
}

/// `start:end` expands to geometric radii with factor-10 steps; anything
/// else is read as a comma-separated list.
pub fn radii(s: &str) -> Result<Vec<f64>> {
    match s.split_once(':') {
        Some((a, b)) => {
            let (a, b) = (floats(a)?, floats(b)?);
            if a.len() != 1 || b.len() != 1 {
                return Err(Error::InvalidParameter(format!("bad radius range `{s}`")));
            }
            geometric_radii(a[0], b[0])
        }
        None => floats(s),
    }
}

/// Named points `origin`, `e1`, `e2` (the latter two for the radial
/// stretch with the given α), or explicit coordinates.
pub fn target(s: &str, alpha: f64, n: usize) -> Result<Vec<f64>> {
    match s {
        "origin" | "0" => Ok(vec![0.0; n]),
        "e1" => Ok(RadialStretch::new(alpha, n)?.e1()),
        "e2" => Ok(RadialStretch::new(alpha, n)?.e2()),
        _ => point(s, n),
    }
}
