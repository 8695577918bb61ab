//! Plain-text export of lattice objects.
//!
//! CSV files carry a header row, LF line endings and numbers printed with
//! 17 significant digits, which round-trips every f64 exactly. The JSON
//! exports are arrays of the same rows; the propagator container carries a
//! small header object followed by the row-major entries.

use std::io::Write;

use crate::action::DiscretePath;
use crate::doubleslit::ScreenPattern;
use crate::error::Result;
use crate::kernel::PropagatorMatrix;
use crate::lattice::WaveFunction;
use crate::schrodinger::Trajectory;

/// 17 significant digits: one leading digit plus 16 after the point.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Columns `x, re, im`.
pub fn write_wavefunction_csv(mut w: impl Write, psi: &WaveFunction) -> Result<()> {
    writeln!(w, "x,re,im")?;
    for (i, v) in psi.values().iter().enumerate() {
        writeln!(
            w,
            "{},{},{}",
            fmt_f64(psi.grid().node(i)),
            fmt_f64(v.re),
            fmt_f64(v.im)
        )?;
    }
    Ok(())
}

/// JSON array of `[x, re, im]` triples.
pub fn write_wavefunction_json(mut w: impl Write, psi: &WaveFunction) -> Result<()> {
    writeln!(w, "[")?;
    let n = psi.values().len();
    for (i, v) in psi.values().iter().enumerate() {
        let sep = if i + 1 == n { "" } else { "," };
        writeln!(
            w,
            "  [{}, {}, {}]{sep}",
            fmt_f64(psi.grid().node(i)),
            fmt_f64(v.re),
            fmt_f64(v.im)
        )?;
    }
    writeln!(w, "]")?;
    Ok(())
}

/// Columns `t, x`.
pub fn write_path_csv(mut w: impl Write, path: &DiscretePath) -> Result<()> {
    writeln!(w, "t,x")?;
    for (i, &x) in path.positions().iter().enumerate() {
        writeln!(w, "{},{}", fmt_f64(path.slicing().node(i)), fmt_f64(x))?;
    }
    Ok(())
}

/// Columns `x, P`.
pub fn write_pattern_csv(mut w: impl Write, pattern: &ScreenPattern) -> Result<()> {
    writeln!(w, "x,P")?;
    for (i, &p) in pattern.values().iter().enumerate() {
        writeln!(w, "{},{}", fmt_f64(pattern.grid().node(i)), fmt_f64(p))?;
    }
    Ok(())
}

/// JSON array of `[x, P]` pairs.
pub fn write_pattern_json(mut w: impl Write, pattern: &ScreenPattern) -> Result<()> {
    writeln!(w, "[")?;
    let n = pattern.values().len();
    for (i, &p) in pattern.values().iter().enumerate() {
        let sep = if i + 1 == n { "" } else { "," };
        writeln!(
            w,
            "  [{}, {}]{sep}",
            fmt_f64(pattern.grid().node(i)),
            fmt_f64(p)
        )?;
    }
    writeln!(w, "]")?;
    Ok(())
}

/// Time series of states as rows `t, x, re, im`.
pub fn write_trajectory_csv(mut w: impl Write, traj: &Trajectory) -> Result<()> {
    writeln!(w, "t,x,re,im")?;
    for (t, state) in traj.times.iter().zip(&traj.states) {
        for (i, v) in state.values().iter().enumerate() {
            writeln!(
                w,
                "{},{},{},{}",
                fmt_f64(*t),
                fmt_f64(state.grid().node(i)),
                fmt_f64(v.re),
                fmt_f64(v.im)
            )?;
        }
    }
    Ok(())
}

/// JSON container for a propagator matrix: a header object
/// `{x_min, x_max, n_points, t_from, t_to, hbar, mass}` followed by the
/// row-major entries as `[re, im]` pairs.
pub fn write_propagator_json(mut w: impl Write, k: &PropagatorMatrix) -> Result<()> {
    let g = k.grid();
    writeln!(w, "{{")?;
    writeln!(w, "  \"header\": {{")?;
    writeln!(w, "    \"x_min\": {},", fmt_f64(g.x_min()))?;
    writeln!(w, "    \"x_max\": {},", fmt_f64(g.x_max()))?;
    writeln!(w, "    \"n_points\": {},", g.n_points())?;
    writeln!(w, "    \"t_from\": {},", fmt_f64(k.t_from()))?;
    writeln!(w, "    \"t_to\": {},", fmt_f64(k.t_to()))?;
    writeln!(w, "    \"hbar\": {},", fmt_f64(k.constants().hbar))?;
    writeln!(w, "    \"mass\": {}", fmt_f64(k.constants().mass))?;
    writeln!(w, "  }},")?;
    writeln!(w, "  \"entries\": [")?;
    let n_sq = k.entries().len();
    for (idx, e) in k.entries().iter().enumerate() {
        let sep = if idx + 1 == n_sq { "" } else { "," };
        writeln!(w, "    [{}, {}]{sep}", fmt_f64(e.re), fmt_f64(e.im))?;
    }
    writeln!(w, "  ]")?;
    writeln!(w, "}}")?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::SpatialGrid;

    #[test]
    fn formatted_doubles_round_trip() {
        for x in [
            0.1,
            -1.0 / 3.0,
            2.5066282746310002,
            1e-300,
            std::f64::consts::PI,
        ] {
            let s = fmt_f64(x);
            let back: f64 = s.parse().unwrap();
            assert_eq!(back, x, "{s}");
        }
    }

    #[test]
    fn wavefunction_csv_shape() {
        let grid = SpatialGrid::new(0.0, 1.0, 3).unwrap();
        let psi = WaveFunction::zeros(grid);
        let mut buf = Vec::new();
        write_wavefunction_csv(&mut buf, &psi).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[0], "x,re,im");
        assert!(!text.contains('\r'));
    }

    #[test]
    fn pattern_json_is_valid_row_list() {
        let c = crate::lattice::PhysicalConstants::default();
        let grid = SpatialGrid::new(-2.0, 2.0, 5).unwrap();
        let geom =
            crate::doubleslit::SlitGeometry::new(0.0, 1.0, (-1.1, -0.9), (0.9, 1.1), 1.0, grid, 65)
                .unwrap();
        let pattern =
            crate::doubleslit::screen_pattern(&geom, crate::doubleslit::PatternMode::Measured, &c)
                .unwrap();
        let mut buf = Vec::new();
        write_pattern_json(&mut buf, &pattern).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.trim_start().starts_with('['));
        assert!(text.trim_end().ends_with(']'));
        assert_eq!(text.lines().count(), 7); // brackets + 5 rows
    }
}
