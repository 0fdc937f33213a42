//! Ray-pattern text files.
//!
//! ```text
//! # sensor=<name> rays=<count>
//! <azimuth_deg> <elevation_deg>
//! ...
//! ```
//!
//! One ray per line in degrees at six decimal places, sorted by elevation
//! then azimuth. The header ray count must match the number of ray lines.

use std::fs;
use std::path::Path;

use crate::geom::SphericalDirection;
use crate::pattern::RayPattern;

use super::IoError;

/// Parses a pattern file.
pub fn read_pattern(path: &Path) -> Result<RayPattern, IoError> {
    let text = fs::read_to_string(path)?;
    let header_err = |detail: String| IoError::MalformedHeader {
        path: path.to_path_buf(),
        detail,
    };
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| header_err("empty file".into()))?;
    let rest = header
        .strip_prefix("# sensor=")
        .ok_or_else(|| header_err(format!("expected `# sensor=<name> rays=<count>`, got {header:?}")))?;
    let (name, rays_field) = rest
        .split_once(' ')
        .ok_or_else(|| header_err("missing rays field".into()))?;
    let declared: usize = rays_field
        .strip_prefix("rays=")
        .and_then(|n| n.parse().ok())
        .ok_or_else(|| header_err(format!("bad rays field {rays_field:?}")))?;

    let mut rays = Vec::with_capacity(declared);
    for (i, line) in lines {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let line_err = |detail: String| IoError::MalformedLine {
            path: path.to_path_buf(),
            line: i + 1,
            detail,
        };
        let mut fields = line.split_whitespace();
        let mut angle = |what: &str| -> Result<f64, IoError> {
            let token = fields
                .next()
                .ok_or_else(|| line_err(format!("missing {what}")))?;
            let value: f64 = token
                .parse()
                .map_err(|_| line_err(format!("bad {what} {token:?}")))?;
            if !value.is_finite() {
                return Err(line_err(format!("{what} must be finite, got {token}")));
            }
            Ok(value)
        };
        let azimuth = angle("azimuth")?;
        let elevation = angle("elevation")?;
        if fields.next().is_some() {
            return Err(line_err("expected exactly two fields".into()));
        }
        rays.push(SphericalDirection::new(
            azimuth.to_radians(),
            elevation.to_radians(),
        ));
    }
    if rays.len() != declared {
        return Err(header_err(format!(
            "header declares {declared} rays but the file has {}",
            rays.len()
        )));
    }
    Ok(RayPattern::from_directions(name, rays))
}

/// Writes a pattern file; angles are printed in degrees at six decimals,
/// which round-trips directions to within five ten-millionths of a degree.
pub fn write_pattern(path: &Path, pattern: &RayPattern) -> Result<(), IoError> {
    let mut text = format!("# sensor={} rays={}\n", pattern.sensor_name, pattern.len());
    for ray in pattern.rays() {
        text.push_str(&format!(
            "{:.6} {:.6}\n",
            ray.azimuth.to_degrees(),
            ray.elevation.to_degrees()
        ));
    }
    fs::write(path, text)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use crate::geom::angular_distance;
    use crate::pattern::{synthesize_pattern, SensorSpec};

    use super::*;

    #[test]
    fn pattern_round_trip_is_tight() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("pattern.txt");
        let pattern = synthesize_pattern(&SensorSpec::vld_32()).unwrap();
        write_pattern(&path, &pattern).unwrap();
        let loaded = read_pattern(&path).unwrap();
        assert_eq!(loaded.sensor_name, pattern.sensor_name);
        assert_eq!(loaded.len(), pattern.len());
        let tolerance = 5.0e-7_f64.to_radians() * 2.0;
        for (a, b) in pattern.rays().iter().zip(loaded.rays()) {
            let d = angular_distance(&crate::geom::ray_of(a), &crate::geom::ray_of(b));
            assert!(d <= tolerance, "rays drifted {d} rad apart");
        }
    }

    #[test]
    fn header_must_declare_the_right_count() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("pattern.txt");
        fs::write(&path, "# sensor=probe rays=3\n0.000000 -1.000000\n0.000000 1.000000\n").unwrap();
        assert!(matches!(
            read_pattern(&path),
            Err(IoError::MalformedHeader { .. })
        ));
    }

    #[test]
    fn malformed_headers_and_lines_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("pattern.txt");
        for bad in [
            "",
            "sensor=x rays=1\n0 0\n",
            "# sensor=x\n",
            "# sensor=x rays=none\n",
        ] {
            fs::write(&path, bad).unwrap();
            assert!(
                matches!(read_pattern(&path), Err(IoError::MalformedHeader { .. })),
                "accepted header of {bad:?}"
            );
        }
        for bad in [
            "# sensor=x rays=1\n0.0\n",
            "# sensor=x rays=1\n0.0 up\n",
            "# sensor=x rays=1\n0.0 0.0 0.0\n",
            "# sensor=x rays=1\ninf 0.0\n",
        ] {
            fs::write(&path, bad).unwrap();
            let err = read_pattern(&path).unwrap_err();
            assert!(matches!(err, IoError::MalformedLine { .. }), "accepted {bad:?}");
            assert_eq!(err.exit_code(), 2);
        }
    }

    #[test]
    fn rays_are_sorted_regardless_of_file_order() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("pattern.txt");
        fs::write(
            &path,
            "# sensor=x rays=3\n10.000000 5.000000\n0.000000 -5.000000\n5.000000 5.000000\n",
        )
        .unwrap();
        let pattern = read_pattern(&path).unwrap();
        let elevations: Vec<f64> = pattern.rays().iter().map(|r| r.elevation.to_degrees()).collect();
        assert!(elevations[0] < elevations[1]);
        assert!(pattern.rays()[1].azimuth < pattern.rays()[2].azimuth);
    }
}
