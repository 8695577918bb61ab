//! Amplitude-level double-slit simulator.
//!
//! A point source emits at plane A; free flight for `screen_b_time` reaches
//! the slitted plane B; free flight for `screen_c_time` reaches the
//! detector plane C. The per-hole amplitude is a Fresnel integral of the
//! product of the two free-kernel legs over the open slit, and the four
//! detection modes combine the two hole amplitudes per the superposition
//! and measurement rules: coherent `|phi1 + phi2|^2`, single hole
//! `|phi_h|^2`, measured `|phi1|^2 + |phi2|^2`, and the weak-measurement
//! mixture that interpolates between them.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kernel::free_particle_kernel;
use crate::lattice::{PhysicalConstants, SpatialGrid};

/// Which hole of screen B an amplitude refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Hole {
    One,
    Two,
}

/// Detection regime at the screen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PatternMode {
    /// Both holes open, no which-path record: `P = |phi1 + phi2|^2`.
    Coherent,
    /// Only one hole open: `P = |phi_h|^2`.
    SingleHole(Hole),
    /// Both holes open, which-path measurement at B: `P = P1 + P2`.
    Measured,
    /// Fraction `f` of the electrons scattered a which-path photon:
    /// `P = f (P1 + P2) + (1 - f) |phi1 + phi2|^2`.
    Mixed(f64),
}

/// Source, slit intervals, flight times and the detector lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct SlitGeometry {
    source_x: f64,
    screen_b_time: f64,
    slit1: (f64, f64),
    slit2: (f64, f64),
    screen_c_time: f64,
    detector_grid: SpatialGrid,
    slit_quadrature_points: usize,
}

/// Window on the detector used by the acceptance checks of the reference
/// geometry.
pub const REFERENCE_WINDOW: (f64, f64) = (-3.0, 3.0);

impl SlitGeometry {
    pub fn new(
        source_x: f64,
        screen_b_time: f64,
        slit1: (f64, f64),
        slit2: (f64, f64),
        screen_c_time: f64,
        detector_grid: SpatialGrid,
        slit_quadrature_points: usize,
    ) -> Result<Self> {
        if !source_x.is_finite() {
            return Err(Error::Geometry {
                reason: "source position must be finite".into(),
            });
        }
        for (name, t) in [
            ("screen_b_time", screen_b_time),
            ("screen_c_time", screen_c_time),
        ] {
            if !(t.is_finite() && t > 0.0) {
                return Err(Error::Geometry {
                    reason: format!("{name} must be positive, got {t}"),
                });
            }
        }
        for (name, (lo, hi)) in [("slit1", slit1), ("slit2", slit2)] {
            if !(lo.is_finite() && hi.is_finite() && hi > lo) {
                return Err(Error::Geometry {
                    reason: format!("{name} = [{lo}, {hi}] must be a non-empty interval"),
                });
            }
        }
        let disjoint = slit1.1 < slit2.0 || slit2.1 < slit1.0;
        if !disjoint {
            return Err(Error::Geometry {
                reason: "slit intervals must be disjoint".into(),
            });
        }
        if slit_quadrature_points < 64 {
            return Err(Error::Geometry {
                reason: format!(
                    "slit quadrature needs at least 64 nodes, got {slit_quadrature_points}"
                ),
            });
        }
        Ok(Self {
            source_x,
            screen_b_time,
            slit1,
            slit2,
            screen_c_time,
            detector_grid,
            slit_quadrature_points,
        })
    }

    /// The reference setup every quoted double-slit number refers to:
    /// source at 0, unit flight times, slits `[-1.1, -0.9]` and
    /// `[0.9, 1.1]`, detector `[-10, 10]` with 2001 nodes.
    pub fn reference() -> Self {
        Self::new(
            0.0,
            1.0,
            (-1.1, -0.9),
            (0.9, 1.1),
            1.0,
            SpatialGrid::new(-10.0, 10.0, 2001).expect("static grid"),
            129,
        )
        .expect("static geometry")
    }

    pub fn detector_grid(&self) -> &SpatialGrid {
        &self.detector_grid
    }

    pub fn source_x(&self) -> f64 {
        self.source_x
    }

    pub fn slit(&self, hole: Hole) -> (f64, f64) {
        match hole {
            Hole::One => self.slit1,
            Hole::Two => self.slit2,
        }
    }

    pub fn screen_b_time(&self) -> f64 {
        self.screen_b_time
    }

    pub fn screen_c_time(&self) -> f64 {
        self.screen_c_time
    }
}

/// Probability per detector node in one detection mode.
#[derive(Debug, Clone, PartialEq)]
pub struct ScreenPattern {
    grid: SpatialGrid,
    p: Vec<f64>,
    mode: PatternMode,
}

impl ScreenPattern {
    pub fn grid(&self) -> &SpatialGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.p
    }

    pub fn mode(&self) -> PatternMode {
        self.mode
    }
}

/// Amplitude to reach detector position `x` through one hole:
/// the slit integral of `K_free(x, t_B + t_C; y, t_B) K_free(y, t_B; source, 0)`
/// by composite Simpson quadrature with at least 64 nodes.
pub fn slit_amplitude(
    geom: &SlitGeometry,
    hole: Hole,
    x: f64,
    c: &PhysicalConstants,
) -> Result<Complex64> {
    let leg_b = precompute_source_leg(geom, hole, c)?;
    slit_amplitude_with_leg(geom, hole, x, c, &leg_b)
}

/// The source-to-slit kernel sampled on the slit quadrature nodes; it does
/// not depend on the detector position, so patterns reuse it.
fn precompute_source_leg(
    geom: &SlitGeometry,
    hole: Hole,
    c: &PhysicalConstants,
) -> Result<Vec<Complex64>> {
    let (lo, hi) = geom.slit(hole);
    let n = simpson_nodes(geom.slit_quadrature_points);
    let h = (hi - lo) / (n - 1) as f64;
    (0..n)
        .map(|k| free_particle_kernel(lo + k as f64 * h, geom.screen_b_time, geom.source_x, 0.0, c))
        .collect()
}

fn slit_amplitude_with_leg(
    geom: &SlitGeometry,
    hole: Hole,
    x: f64,
    c: &PhysicalConstants,
    leg_b: &[Complex64],
) -> Result<Complex64> {
    let (lo, hi) = geom.slit(hole);
    let n = leg_b.len();
    let h = (hi - lo) / (n - 1) as f64;
    let t_b = geom.screen_b_time;
    let t_c = t_b + geom.screen_c_time;
    let mut acc = Complex64::new(0.0, 0.0);
    for (k, &source_leg) in leg_b.iter().enumerate() {
        let y = lo + k as f64 * h;
        let w = if k == 0 || k == n - 1 {
            1.0
        } else if k % 2 == 1 {
            4.0
        } else {
            2.0
        };
        acc += w * free_particle_kernel(x, t_c, y, t_b, c)? * source_leg;
    }
    Ok(acc * (h / 3.0))
}

/// Round the requested quadrature size up to the next odd count, as
/// composite Simpson requires.
fn simpson_nodes(requested: usize) -> usize {
    requested | 1
}

/// Both hole amplitudes at every detector node.
pub fn hole_amplitudes(
    geom: &SlitGeometry,
    c: &PhysicalConstants,
) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
    let leg1 = precompute_source_leg(geom, Hole::One, c)?;
    let leg2 = precompute_source_leg(geom, Hole::Two, c)?;
    let nodes: Vec<f64> = geom.detector_grid.nodes().collect();
    let pairs: Result<Vec<(Complex64, Complex64)>> = nodes
        .par_iter()
        .map(|&x| {
            Ok((
                slit_amplitude_with_leg(geom, Hole::One, x, c, &leg1)?,
                slit_amplitude_with_leg(geom, Hole::Two, x, c, &leg2)?,
            ))
        })
        .collect();
    Ok(pairs?.into_iter().unzip())
}

/// Detection pattern on the screen for one regime.
pub fn screen_pattern(
    geom: &SlitGeometry,
    mode: PatternMode,
    c: &PhysicalConstants,
) -> Result<ScreenPattern> {
    if let PatternMode::Mixed(f) = mode {
        if !(f.is_finite() && (0.0..=1.0).contains(&f)) {
            return Err(Error::InvalidArgument(format!(
                "mixture fraction f = {f} must lie in [0, 1]"
            )));
        }
    }
    let (phi1, phi2) = hole_amplitudes(geom, c)?;
    let p = phi1
        .iter()
        .zip(&phi2)
        .map(|(&a, &b)| match mode {
            PatternMode::Coherent => (a + b).norm_sqr(),
            PatternMode::SingleHole(Hole::One) => a.norm_sqr(),
            PatternMode::SingleHole(Hole::Two) => b.norm_sqr(),
            PatternMode::Measured => a.norm_sqr() + b.norm_sqr(),
            PatternMode::Mixed(f) => {
                f * (a.norm_sqr() + b.norm_sqr()) + (1.0 - f) * (a + b).norm_sqr()
            }
        })
        .collect();
    Ok(ScreenPattern {
        grid: geom.detector_grid,
        p,
        mode,
    })
}

/// Michelson contrast `(P_max - P_min) / (P_max + P_min)` over a window.
///
/// The window must lie inside the detector and hold at least three local
/// extrema of the restricted pattern, window endpoints included; a window
/// over a strictly monotone stretch has only its two endpoints and is
/// rejected, since its contrast would not measure structure.
pub fn fringe_visibility(pattern: &ScreenPattern, window: (f64, f64)) -> Result<f64> {
    let (lo, hi) = window;
    if !(lo.is_finite() && hi.is_finite() && hi > lo) {
        return Err(Error::DegenerateWindow {
            reason: format!("[{lo}, {hi}] is empty"),
        });
    }
    let grid = &pattern.grid;
    if lo < grid.x_min() || hi > grid.x_max() {
        return Err(Error::DegenerateWindow {
            reason: format!(
                "[{lo}, {hi}] outside detector [{}, {}]",
                grid.x_min(),
                grid.x_max()
            ),
        });
    }
    let indices: Vec<usize> = (0..grid.n_points())
        .filter(|&i| grid.node(i) >= lo && grid.node(i) <= hi)
        .collect();
    if indices.len() < 3 {
        return Err(Error::DegenerateWindow {
            reason: "window covers fewer than 3 nodes".into(),
        });
    }
    let values: Vec<f64> = indices.iter().map(|&i| pattern.p[i]).collect();
    let last = values.len() - 1;
    let mut extrema = 0usize;
    for k in 0..=last {
        let is_extremum = if k == 0 {
            values[0] != values[1]
        } else if k == last {
            values[last] != values[last - 1]
        } else {
            (values[k] > values[k - 1] && values[k] > values[k + 1])
                || (values[k] < values[k - 1] && values[k] < values[k + 1])
        };
        if is_extremum {
            extrema += 1;
        }
    }
    if extrema < 3 {
        return Err(Error::DegenerateWindow {
            reason: format!("window holds {extrema} extrema, need at least 3"),
        });
    }
    let mut p_max = f64::MIN;
    let mut p_min = f64::MAX;
    for &v in &values {
        p_max = p_max.max(v);
        p_min = p_min.min(v);
    }
    Ok((p_max - p_min) / (p_max + p_min))
}

/// Probability of landing in a detector bin, and the expected count out of
/// `n_emitted` electrons.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectionProbability {
    pub probability: f64,
    pub expected_count: f64,
}

/// `P(bin) = sum over bin of P dx / sum over detector of P dx`, and the
/// expected number of detections `n_emitted * P(bin)`.
pub fn detection_probability(
    pattern: &ScreenPattern,
    bin: (f64, f64),
    n_emitted: f64,
) -> Result<DetectionProbability> {
    let (lo, hi) = bin;
    if !(lo.is_finite() && hi.is_finite() && hi > lo) {
        return Err(Error::DegenerateWindow {
            reason: format!("bin [{lo}, {hi}] is empty"),
        });
    }
    let grid = &pattern.grid;
    if lo < grid.x_min() || hi > grid.x_max() {
        return Err(Error::DegenerateWindow {
            reason: format!(
                "bin [{lo}, {hi}] outside detector [{}, {}]",
                grid.x_min(),
                grid.x_max()
            ),
        });
    }
    let mut in_bin = 0.0;
    let mut any = false;
    let mut total = 0.0;
    for (i, &p) in pattern.p.iter().enumerate() {
        total += p;
        let x = grid.node(i);
        if x >= lo && x <= hi {
            in_bin += p;
            any = true;
        }
    }
    if !any {
        return Err(Error::DegenerateWindow {
            reason: "bin contains no detector node".into(),
        });
    }
    if total <= 0.0 {
        return Err(Error::InvalidArgument(
            "pattern has zero total probability".into(),
        ));
    }
    let probability = in_bin / total;
    Ok(DetectionProbability {
        probability,
        expected_count: n_emitted * probability,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn consts() -> PhysicalConstants {
        PhysicalConstants::default()
    }

    #[test]
    fn geometry_validation() {
        let grid = SpatialGrid::new(-10.0, 10.0, 101).unwrap();
        assert!(SlitGeometry::new(0.0, 1.0, (-1.0, -0.5), (0.5, 1.0), 1.0, grid, 65).is_ok());
        // overlapping slits
        assert!(SlitGeometry::new(0.0, 1.0, (-1.0, 0.6), (0.5, 1.0), 1.0, grid, 65).is_err());
        // empty slit
        assert!(SlitGeometry::new(0.0, 1.0, (-1.0, -1.0), (0.5, 1.0), 1.0, grid, 65).is_err());
        // bad flight time
        assert!(SlitGeometry::new(0.0, 0.0, (-1.0, -0.5), (0.5, 1.0), 1.0, grid, 65).is_err());
        // too few quadrature nodes
        assert!(SlitGeometry::new(0.0, 1.0, (-1.0, -0.5), (0.5, 1.0), 1.0, grid, 32).is_err());
    }

    #[test]
    fn mirror_symmetry_at_center() {
        let c = consts();
        let geom = SlitGeometry::reference();
        let a1 = slit_amplitude(&geom, Hole::One, 0.0, &c).unwrap();
        let a2 = slit_amplitude(&geom, Hole::Two, 0.0, &c).unwrap();
        assert!((a1 - a2).norm() < 1e-12 * a1.norm());
    }

    #[test]
    fn narrow_slit_amplitude_scales_linearly() {
        let c = consts();
        let grid = SpatialGrid::new(-10.0, 10.0, 101).unwrap();
        let make = |w: f64| {
            SlitGeometry::new(0.0, 1.0, (-1.0 - w, -1.0), (1.0, 1.0 + w), 1.0, grid, 65).unwrap()
        };
        let narrow = slit_amplitude(&make(1e-4), Hole::Two, 0.3, &c).unwrap();
        let narrower = slit_amplitude(&make(1e-5), Hole::Two, 0.3, &c).unwrap();
        assert!((narrow.norm() / narrower.norm() - 10.0).abs() < 1e-2);

        // degenerate limit: amplitude approaches width * product of point kernels
        let w = 1e-6;
        let a = slit_amplitude(&make(w), Hole::Two, 0.3, &c).unwrap();
        let point = free_particle_kernel(0.3, 2.0, 1.0, 1.0, &c).unwrap()
            * free_particle_kernel(1.0, 1.0, 0.0, 0.0, &c).unwrap();
        assert!((a - point * w).norm() < 1e-3 * (point * w).norm());
    }

    #[test]
    fn measured_is_sum_of_single_holes() {
        let c = consts();
        let geom = SlitGeometry::reference();
        let measured = screen_pattern(&geom, PatternMode::Measured, &c).unwrap();
        let p1 = screen_pattern(&geom, PatternMode::SingleHole(Hole::One), &c).unwrap();
        let p2 = screen_pattern(&geom, PatternMode::SingleHole(Hole::Two), &c).unwrap();
        for i in 0..measured.values().len() {
            assert_eq!(measured.values()[i], p1.values()[i] + p2.values()[i]);
        }
    }

    #[test]
    fn mixture_endpoints() {
        let c = consts();
        let geom = SlitGeometry::reference();
        let coherent = screen_pattern(&geom, PatternMode::Coherent, &c).unwrap();
        let measured = screen_pattern(&geom, PatternMode::Measured, &c).unwrap();
        let m0 = screen_pattern(&geom, PatternMode::Mixed(0.0), &c).unwrap();
        let m1 = screen_pattern(&geom, PatternMode::Mixed(1.0), &c).unwrap();
        assert_eq!(m0.values(), coherent.values());
        assert_eq!(m1.values(), measured.values());
        assert!(screen_pattern(&geom, PatternMode::Mixed(1.5), &c).is_err());
        assert!(screen_pattern(&geom, PatternMode::Mixed(-0.1), &c).is_err());
    }

    #[test]
    fn interference_term_identity() {
        let c = consts();
        let geom = SlitGeometry::reference();
        let (phi1, phi2) = hole_amplitudes(&geom, &c).unwrap();
        let coherent = screen_pattern(&geom, PatternMode::Coherent, &c).unwrap();
        let measured = screen_pattern(&geom, PatternMode::Measured, &c).unwrap();
        for i in 0..phi1.len() {
            let cross = 2.0 * (phi1[i].conj() * phi2[i]).re;
            let diff = coherent.values()[i] - measured.values()[i];
            assert!((diff - cross).abs() < 1e-15);
        }
    }

    #[test]
    fn degenerate_windows_rejected() {
        let c = consts();
        let geom = SlitGeometry::reference();
        let coherent = screen_pattern(&geom, PatternMode::Coherent, &c).unwrap();
        assert!(fringe_visibility(&coherent, (3.0, 3.0)).is_err());
        assert!(fringe_visibility(&coherent, (-30.0, 30.0)).is_err());
        // a window narrower than one fringe has no 3 extrema
        assert!(fringe_visibility(&coherent, (0.0, 0.4)).is_err());
    }

    #[test]
    fn bin_probabilities_add_and_normalize() {
        let c = consts();
        let geom = SlitGeometry::reference();
        let pattern = screen_pattern(&geom, PatternMode::Coherent, &c).unwrap();
        let full = detection_probability(&pattern, (-10.0, 10.0), 60.0).unwrap();
        assert!((full.probability - 1.0).abs() < 1e-12);
        assert!((full.expected_count - 60.0).abs() < 1e-9);

        // split at half-spacing so no node sits on a bin edge
        let left = detection_probability(&pattern, (-10.0, -0.005), 60.0).unwrap();
        let right = detection_probability(&pattern, (-0.005, 10.0), 60.0).unwrap();
        assert!((left.probability + right.probability - 1.0).abs() < 1e-12);

        assert!(detection_probability(&pattern, (20.0, 30.0), 60.0).is_err());
        assert!(detection_probability(&pattern, (1.0, 0.5), 60.0).is_err());
    }
}
