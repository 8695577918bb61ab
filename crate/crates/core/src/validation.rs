//! The validation suite: every engine-level guarantee checked against its
//! analytic oracle, with measured metrics and pinned bounds. The `validate`
//! CLI subcommand and the acceptance test target both run these checks.
//!
//! All checks run on one reference setup in natural units `hbar = m = 1`:
//! grid `[-20, 20]` with 801 nodes, evolution span `T = 1`, and the
//! double-slit reference geometry.

use num_complex::Complex64;

use crate::action::{
    abbreviated_action, classical_energy, classical_path, path_action, stationarity_exponent,
    stationarity_exponent_at, DiscretePath, PotentialModel,
};
use crate::doubleslit::{
    fringe_visibility, hole_amplitudes, screen_pattern, Hole, PatternMode, SlitGeometry,
    REFERENCE_WINDOW,
};
use crate::error::Result;
use crate::kernel::{
    build_propagator, classical_phase_check, compose_power, free_particle_kernel, gaussian_moments,
    kernel_evolve, normalization_constant, unitarity_defect_with_margin,
};
use crate::lattice::{PhysicalConstants, SpatialGrid, TimeSlicing, WaveFunction};
use crate::schrodinger::{evolve, hermiticity_defect, HamiltonianStencil};

// ── Pinned bounds ────────────────────────────────────────────────────────

/// Relative error allowed on the even Fresnel moment integrals I0 and I2.
pub const MOMENT_EVEN_REL: f64 = 1e-3;
/// Absolute bound on the odd moment I1, which vanishes by symmetry.
pub const MOMENT_ODD_ABS: f64 = 1e-10;
/// Max relative deviation of the composed lattice kernel from the analytic
/// free kernel on the central half of the grid.
pub const COMPOSITION_REL: f64 = 0.02;
/// Unitarity defect of the composed free propagator away from the edges.
pub const UNITARITY_INTERIOR: f64 = 1e-3;
/// Norm drift of a propagated Gaussian over T = 1.
pub const KERNEL_NORM_DRIFT: f64 = 1e-3;
/// Kernel vs Crank-Nicolson discrepancy, free potential.
pub const CROSS_CHECK_FREE: f64 = 1e-2;
/// Kernel vs Crank-Nicolson discrepancy, harmonic potential.
pub const CROSS_CHECK_HARMONIC: f64 = 2e-2;
/// Hermiticity defect of the finite-difference Hamiltonian on normalized
/// states; pure rounding.
pub const HERMITICITY_BOUND: f64 = 1e-12;
/// Crank-Nicolson norm drift over 1000 steps; the Cayley step is exactly
/// unitary, so this is solver round-off only.
pub const CN_NORM_DRIFT: f64 = 1e-10;
/// Allowed deviation of the fitted stationarity exponent from 2 at a
/// classical path.
pub const EXPONENT_CLASSICAL_TOL: f64 = 0.05;
/// Allowed deviation of the fitted exponent from 1 at a non-classical path.
pub const EXPONENT_NONCLASSICAL_TOL: f64 = 0.15;
/// Phase agreement between the composed lattice kernel and the classical
/// action at 200 slices, in radians.
pub const PHASE_TOL_RAD: f64 = 0.05;
/// Absolute defect of the Maupertuis/Hamilton reduction at 10^4 slices.
pub const MAUPERTUIS_ABS: f64 = 1e-6;
/// Absolute bound on the interference-term identity
/// `Coherent - Measured = 2 Re(phi1* phi2)`.
pub const INTERFERENCE_IDENTITY_ABS: f64 = 1e-12;
/// Minimum coherent fringe visibility in the central window.
pub const VISIBILITY_COHERENT_MIN: f64 = 0.9;
/// Maximum measured-mode visibility in the central window.
pub const VISIBILITY_MEASURED_MAX: f64 = 0.2;
/// Width error of the spread free Gaussian at T = 1.
pub const SPREADING_ABS: f64 = 1e-3;

// ── Reference setup ──────────────────────────────────────────────────────

pub fn reference_grid() -> SpatialGrid {
    SpatialGrid::new(-20.0, 20.0, 801).expect("static grid")
}

/// Slice count and step of the headline composition (criterion: 100 slices
/// of eps = 0.01 over T = 1).
pub const COMPOSITION_SLICES: usize = 100;
pub const COMPOSITION_EPSILON: f64 = 0.01;
/// Kernel slice count for the cross-validation run (eps = 1e-3).
pub const CROSS_KERNEL_SLICES: usize = 1000;
/// Crank-Nicolson step count for the cross-validation run (dt = 1e-4).
pub const CROSS_CN_STEPS: usize = 10_000;

fn free() -> PotentialModel {
    PotentialModel::Free
}

fn harmonic() -> PotentialModel {
    PotentialModel::harmonic(1.0).expect("static omega")
}

fn sine_shape(tau: f64) -> f64 {
    (std::f64::consts::PI * tau).sin()
}

// ── Reports ──────────────────────────────────────────────────────────────

#[derive(Debug, Clone)]
pub struct CriterionReport {
    pub name: &'static str,
    pub passed: bool,
    pub metrics: Vec<(String, f64)>,
}

impl CriterionReport {
    fn new(name: &'static str) -> Self {
        Self {
            name,
            passed: true,
            metrics: Vec::new(),
        }
    }

    fn record_below(&mut self, metric: &str, value: f64, bound: f64) {
        self.metrics.push((metric.to_string(), value));
        self.metrics.push((format!("{metric}_bound"), bound));
        // NaN must fail, so the comparison is the pass condition itself
        self.passed &= value < bound;
    }

    fn record_above(&mut self, metric: &str, value: f64, bound: f64) {
        self.metrics.push((metric.to_string(), value));
        self.metrics.push((format!("{metric}_min"), bound));
        self.passed &= value > bound;
    }

    fn record(&mut self, metric: &str, value: f64) {
        self.metrics.push((metric.to_string(), value));
    }

    fn require(&mut self, ok: bool) {
        if !ok {
            self.passed = false;
        }
    }
}

/// One refinement level of the composed-kernel convergence study.
#[derive(Debug, Clone, Copy)]
pub struct ConvergenceRow {
    pub n_points: usize,
    pub n_slices: usize,
    pub dx: f64,
    pub epsilon: f64,
    pub max_rel_err: f64,
}

#[derive(Debug, Clone)]
pub struct SuiteReport {
    pub criteria: Vec<CriterionReport>,
    pub convergence: Vec<ConvergenceRow>,
    pub all_passed: bool,
}

/// Suite results plus the evolved states worth exporting.
#[derive(Debug, Clone)]
pub struct SuiteOutput {
    pub report: SuiteReport,
    pub free_kernel_final: WaveFunction,
    pub free_cn_final: WaveFunction,
}

// ── Deterministic pseudo-random states ───────────────────────────────────

/// SplitMix64; fixed seeds keep every validation run bit-identical.
pub struct SplitMix64(u64);

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self(seed)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    }

    /// Uniform in `[-1, 1)`.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 52) as f64 - 1.0
    }
}

/// Unit-norm state with SplitMix64 amplitudes.
pub fn random_normalized_state(grid: SpatialGrid, seed: u64) -> WaveFunction {
    let mut rng = SplitMix64::new(seed);
    let values: Vec<Complex64> = (0..grid.n_points())
        .map(|_| Complex64::new(rng.next_f64(), rng.next_f64()))
        .collect();
    let psi = WaveFunction::new(grid, values).expect("length matches");
    let norm = psi.norm();
    psi.scaled(Complex64::new(1.0 / norm, 0.0))
}

// ── Criteria ─────────────────────────────────────────────────────────────

/// Moment integrals reproduce `A`, `0` and `A i hbar eps / m`.
pub fn criterion_moments(c: &PhysicalConstants) -> Result<CriterionReport> {
    let mut report = CriterionReport::new("gaussian_moments");
    let eps = 0.01;
    let (i0, i1, i2) = gaussian_moments(eps, c)?;
    let a = normalization_constant(eps, c)?.value();
    let i2_expected = a * Complex64::new(0.0, c.hbar * eps / c.mass);
    report.record_below("i0_rel_err", (i0 - a).norm() / a.norm(), MOMENT_EVEN_REL);
    report.record_below("i1_abs", i1.norm(), MOMENT_ODD_ABS);
    report.record_below(
        "i2_rel_err",
        (i2 - i2_expected).norm() / i2_expected.norm(),
        MOMENT_EVEN_REL,
    );
    Ok(report)
}

/// A lattice with the requested spacing, wide enough that no band mode
/// launched from `|x| <= source_reach` reaches the domain edge within the
/// evolution span. The grid keeps a node at 0 and the same spacing as the
/// window it extends.
///
/// A point source excites the full resolvable band `|p| <= pi/dx`, which
/// spreads ballistically at `p hbar / m`; the composition integrals run
/// over the whole line, so the lattice has to be sized for that spread.
/// Amplitude at the edge must stay negligible, like everywhere else in
/// the crate: the kernel's algebraic spatial tail makes edge amplitude
/// act back on the interior within a single slice, so a "no arrival"
/// domain is the only clean truncation.
fn spread_sized_grid(
    dx: f64,
    span: f64,
    source_reach: f64,
    c: &PhysicalConstants,
) -> Result<SpatialGrid> {
    let band_velocity = std::f64::consts::PI / dx * c.hbar / c.mass;
    let half_width = source_reach + band_velocity * span + 2.0;
    let side_nodes = (half_width / dx).ceil() as usize;
    let extent = side_nodes as f64 * dx;
    SpatialGrid::new(-extent, extent, 2 * side_nodes + 1)
}

/// Max relative deviation of composed-kernel columns from the analytic
/// free kernel at `T = 1`, for point sources spread over `|x| <= 10` and
/// targets on the central half of the reference window (displacements up
/// to 20 in both directions).
fn composition_level_error(
    dx: f64,
    n_slices: usize,
    sources: &[f64],
    c: &PhysicalConstants,
) -> Result<ConvergenceRow> {
    let span = 1.0;
    let source_reach = sources.iter().fold(0.0f64, |m, s| m.max(s.abs()));
    let grid = spread_sized_grid(dx, span, source_reach, c)?;
    let slicing = TimeSlicing::new(0.0, span, n_slices)?;
    let mut max_rel = 0.0f64;
    for &source_x in sources {
        let source = grid.nearest_node(source_x);
        let x_src = grid.node(source);
        let delta = WaveFunction::delta(grid, source)?;
        let column = kernel_evolve(&delta, &free(), slicing, c)?;
        let lo = grid.nearest_node(-10.0);
        let hi = grid.nearest_node(10.0);
        for j in lo..=hi {
            let oracle = free_particle_kernel(grid.node(j), span, x_src, 0.0, c)?;
            let rel = (column.values()[j] - oracle).norm() / oracle.norm();
            max_rel = max_rel.max(rel);
        }
    }
    Ok(ConvergenceRow {
        n_points: grid.n_points(),
        n_slices,
        dx: grid.spacing(),
        epsilon: slicing.epsilon(),
        max_rel_err: max_rel,
    })
}

/// Composed kernel vs the analytic free kernel on the central half of the
/// reference window, plus the refinement table (`eps -> eps/2`,
/// `dx -> dx/sqrt(2)` per level).
///
/// Sources sweep the central region so every displacement the comparison
/// window contains is exercised; the free kernel depends on the
/// displacement only.
pub fn criterion_composition(
    c: &PhysicalConstants,
) -> Result<(CriterionReport, Vec<ConvergenceRow>)> {
    let mut report = CriterionReport::new("kernel_composition_vs_analytic");
    let sources = [-10.0, 0.0, 10.0];
    let headline = composition_level_error(0.05, COMPOSITION_SLICES, &sources, c)?;
    report.record_below("max_rel_err", headline.max_rel_err, COMPOSITION_REL);

    let sqrt2 = std::f64::consts::SQRT_2;
    let levels = [(0.05, 100usize), (0.05 / sqrt2, 200), (0.025, 400)];
    let mut rows = Vec::with_capacity(levels.len());
    for (dx, n_slices) in levels {
        rows.push(composition_level_error(dx, n_slices, &[0.0], c)?);
    }
    for (level, row) in rows.iter().enumerate() {
        report.record(&format!("column_rel_err_level{level}"), row.max_rel_err);
    }
    for pair in rows.windows(2) {
        report.require(pair[1].max_rel_err < pair[0].max_rel_err);
    }
    Ok((report, rows))
}

/// Slice count and step of the propagator composed for the unitarity
/// check. The composed band spread `n pi hbar eps / (m dx)` has to stay
/// well inside the 10% interior margin of the reference grid so the delta
/// condition is measurable there; eps = 5e-3 over 6 slices spreads 1.9
/// units against the 4-unit margin.
pub const UNITARITY_COMPOSE_SLICES: usize = 6;
pub const UNITARITY_COMPOSE_EPSILON: f64 = 5e-3;

/// Unitarity defect of the one-slice and composed free propagators, and
/// norm drift of a propagated Gaussian over T = 1.
pub fn criterion_unitarity(c: &PhysicalConstants) -> Result<CriterionReport> {
    let mut report = CriterionReport::new("unitarity");
    let k = build_propagator(reference_grid(), 0.0, COMPOSITION_EPSILON, &free(), c)?;
    report.record_below(
        "one_slice_interior_defect",
        unitarity_defect_with_margin(&k, 0.1),
        UNITARITY_INTERIOR,
    );

    let k_fine = build_propagator(reference_grid(), 0.0, UNITARITY_COMPOSE_EPSILON, &free(), c)?;
    let composed = compose_power(&k_fine, UNITARITY_COMPOSE_SLICES)?;
    report.record_below(
        "composed_interior_defect",
        unitarity_defect_with_margin(&composed, 0.1),
        UNITARITY_INTERIOR,
    );

    let psi0 = WaveFunction::gaussian(reference_grid(), 0.0, 1.0, 0.0)?;
    let slicing = TimeSlicing::new(0.0, 1.0, COMPOSITION_SLICES)?;
    let evolved = kernel_evolve(&psi0, &free(), slicing, c)?;
    let drift = (evolved.norm() - psi0.norm()).abs();
    report.record_below("norm_drift", drift, KERNEL_NORM_DRIFT);
    Ok(report)
}

/// States produced by the cross-validation evolutions, reused by the
/// spreading criterion.
pub struct CrossValidationStates {
    pub report: CriterionReport,
    pub free_kernel: WaveFunction,
    pub free_cn: WaveFunction,
}

/// Kernel evolution against the Crank-Nicolson oracle for free and
/// harmonic potentials.
pub fn criterion_cross_validation(c: &PhysicalConstants) -> Result<CrossValidationStates> {
    let mut report = CriterionReport::new("kernel_vs_schrodinger");
    let grid = reference_grid();
    let psi0 = WaveFunction::gaussian(grid, 0.0, 1.0, 0.0)?;
    let slicing = TimeSlicing::new(0.0, 1.0, CROSS_KERNEL_SLICES)?;

    let free_kernel = kernel_evolve(&psi0, &free(), slicing, c)?;
    let free_cn = evolve(&psi0, &free(), 0.0, 1.0, CROSS_CN_STEPS, c)?;
    let d_free = free_kernel.difference_norm(&free_cn)? / psi0.norm();
    report.record_below("free_discrepancy", d_free, CROSS_CHECK_FREE);

    let harm_kernel = kernel_evolve(&psi0, &harmonic(), slicing, c)?;
    let harm_cn = evolve(&psi0, &harmonic(), 0.0, 1.0, CROSS_CN_STEPS, c)?;
    let d_harm = harm_kernel.difference_norm(&harm_cn)? / psi0.norm();
    report.record_below("harmonic_discrepancy", d_harm, CROSS_CHECK_HARMONIC);

    Ok(CrossValidationStates {
        report,
        free_kernel,
        free_cn,
    })
}

/// Hermiticity of the Hamiltonian stencil and exact unitarity of the
/// Crank-Nicolson step.
pub fn criterion_conservation(c: &PhysicalConstants) -> Result<CriterionReport> {
    let mut report = CriterionReport::new("conservation_of_probability");
    let grid = reference_grid();
    let mut worst = 0.0f64;
    for (pot_idx, pot) in [free(), harmonic()].iter().enumerate() {
        let stencil = HamiltonianStencil::new(grid, pot, 0.0, *c)?;
        for pair in 0..3u64 {
            let psi = random_normalized_state(grid, 11 + 100 * pot_idx as u64 + 2 * pair);
            let phi = random_normalized_state(grid, 12 + 100 * pot_idx as u64 + 2 * pair);
            worst = worst.max(hermiticity_defect(&stencil, &psi, &phi)?);
            worst = worst.max(hermiticity_defect(&stencil, &psi, &psi)?);
        }
    }
    report.record_below("hermiticity_defect", worst, HERMITICITY_BOUND);

    let psi_free = WaveFunction::gaussian(grid, 0.0, 1.0, 0.0)?;
    let drift_free =
        (evolve(&psi_free, &free(), 0.0, 1.0, 1000, c)?.norm() - psi_free.norm()).abs();
    report.record_below("cn_norm_drift_free", drift_free, CN_NORM_DRIFT);

    let coherent_width = (c.hbar / (2.0 * c.mass)).sqrt(); // ground state of omega = 1
    let psi_harm = WaveFunction::gaussian(grid, 1.0, coherent_width, 0.0)?;
    let drift_harm =
        (evolve(&psi_harm, &harmonic(), 0.0, 1.0, 1000, c)?.norm() - psi_harm.norm()).abs();
    report.record_below("cn_norm_drift_harmonic", drift_harm, CN_NORM_DRIFT);
    Ok(report)
}

/// Stationarity exponents (2 at classical paths, 1 away from them) and the
/// lattice-kernel phase against the classical action.
pub fn criterion_classical_limit(c: &PhysicalConstants) -> Result<CriterionReport> {
    let mut report = CriterionReport::new("classical_limit");
    let slicing = TimeSlicing::new(0.0, 1.0, 1000)?;
    let classical_amps = [1e-1, 1e-2, 1e-3];

    let exp_free =
        stationarity_exponent(&free(), 0.0, 1.0, slicing, c, sine_shape, &classical_amps)?;
    report.record_below(
        "free_exponent_dev",
        (exp_free - 2.0).abs(),
        EXPONENT_CLASSICAL_TOL,
    );
    report.record("free_exponent", exp_free);

    let x_b = 1.0f64.cos();
    let exp_harm = stationarity_exponent(
        &harmonic(),
        1.0,
        x_b,
        slicing,
        c,
        sine_shape,
        &classical_amps,
    )?;
    report.record_below(
        "harmonic_exponent_dev",
        (exp_harm - 2.0).abs(),
        EXPONENT_CLASSICAL_TOL,
    );
    report.record("harmonic_exponent", exp_harm);

    // a parabola is not a free-particle trajectory: first variation survives
    let bent = DiscretePath::from_fn(slicing, |t| t * t);
    let exp_bent = stationarity_exponent_at(&bent, &free(), c, sine_shape, &[1e-2, 1e-3, 1e-4])?;
    report.record_below(
        "nonclassical_exponent_dev",
        (exp_bent - 1.0).abs(),
        EXPONENT_NONCLASSICAL_TOL,
    );
    report.record("nonclassical_exponent", exp_bent);

    // dx = 0.1 over [-40, 40]: every band mode stays inside the domain for
    // the whole second, so the center column carries no edge artifacts
    let phase_grid = SpatialGrid::new(-40.0, 40.0, 801)?;
    let phase_slicing = TimeSlicing::new(0.0, 1.0, 200)?;
    let check_free = classical_phase_check(&free(), 0.0, 1.0, phase_slicing, phase_grid, c)?;
    report.record_below(
        "free_phase_dev_rad",
        check_free.wrapped_difference.abs(),
        PHASE_TOL_RAD,
    );
    let check_harm = classical_phase_check(&harmonic(), 1.0, x_b, phase_slicing, phase_grid, c)?;
    report.record_below(
        "harmonic_phase_dev_rad",
        check_harm.wrapped_difference.abs(),
        PHASE_TOL_RAD,
    );
    Ok(report)
}

/// `S = S0 - E T` on classical paths at 10^4 slices.
pub fn criterion_maupertuis(c: &PhysicalConstants) -> Result<CriterionReport> {
    let mut report = CriterionReport::new("maupertuis_hamilton_identity");
    let slicing = TimeSlicing::new(0.0, 1.0, 10_000)?;
    for (name, pot, x_a, x_b) in [
        ("free", free(), 0.0, 1.0),
        ("harmonic", harmonic(), 1.0, 1.0f64.cos()),
    ] {
        let path = classical_path(&pot, x_a, x_b, slicing, c)?;
        let s = path_action(&path, &pot, c)?.value();
        let s0 = abbreviated_action(&path, c).value();
        let e = classical_energy(&pot, x_a, x_b, slicing, c)?;
        let defect = (s - (s0 - e * slicing.duration())).abs();
        report.record_below(&format!("{name}_identity_defect"), defect, MAUPERTUIS_ABS);
    }
    Ok(report)
}

/// The double-slit detection modes on the reference geometry.
pub fn criterion_double_slit(c: &PhysicalConstants) -> Result<CriterionReport> {
    let mut report = CriterionReport::new("double_slit_detection_modes");
    let geom = SlitGeometry::reference();

    let coherent = screen_pattern(&geom, PatternMode::Coherent, c)?;
    let measured = screen_pattern(&geom, PatternMode::Measured, c)?;
    let p1 = screen_pattern(&geom, PatternMode::SingleHole(Hole::One), c)?;
    let p2 = screen_pattern(&geom, PatternMode::SingleHole(Hole::Two), c)?;

    // (a) measurement turns amplitudes into classical probabilities, exactly
    let sum_defect = measured
        .values()
        .iter()
        .zip(p1.values().iter().zip(p2.values()))
        .map(|(&m, (&a, &b))| (m - (a + b)).abs())
        .fold(0.0f64, f64::max);
    report.record("measured_sum_defect", sum_defect);
    report.require(sum_defect == 0.0);

    // (b) the interference term is exactly the cross term of the amplitudes
    let (phi1, phi2) = hole_amplitudes(&geom, c)?;
    let identity_defect = (0..phi1.len())
        .map(|i| {
            let cross = 2.0 * (phi1[i].conj() * phi2[i]).re;
            ((coherent.values()[i] - measured.values()[i]) - cross).abs()
        })
        .fold(0.0f64, f64::max);
    report.record_below(
        "interference_identity_defect",
        identity_defect,
        INTERFERENCE_IDENTITY_ABS,
    );

    // (c) fringes are visible only without which-path information
    let vis_coherent = fringe_visibility(&coherent, REFERENCE_WINDOW)?;
    report.record_above("coherent_visibility", vis_coherent, VISIBILITY_COHERENT_MIN);
    let vis_measured = fringe_visibility(&measured, REFERENCE_WINDOW)?;
    report.record_below("measured_visibility", vis_measured, VISIBILITY_MEASURED_MAX);

    // (d) partial measurement interpolates monotonically
    let mut previous = f64::INFINITY;
    let mut monotone = true;
    for (idx, f) in [0.0, 0.25, 0.5, 0.75, 1.0].into_iter().enumerate() {
        let pattern = screen_pattern(&geom, PatternMode::Mixed(f), c)?;
        let vis = fringe_visibility(&pattern, REFERENCE_WINDOW)?;
        report.record(&format!("mixed_visibility_f{idx}"), vis);
        monotone &= vis <= previous + 1e-12;
        previous = vis;
    }
    report.require(monotone);

    // (e) P differs from P1 + P2 in both directions
    let mut sign_changes = 0usize;
    let mut has_positive = false;
    let mut has_negative = false;
    let mut last_sign = 0i8;
    for i in 0..coherent.values().len() {
        let diff = coherent.values()[i] - measured.values()[i];
        let sign = if diff > 0.0 {
            has_positive = true;
            1i8
        } else if diff < 0.0 {
            has_negative = true;
            -1i8
        } else {
            0
        };
        if sign != 0 {
            if last_sign != 0 && sign != last_sign {
                sign_changes += 1;
            }
            last_sign = sign;
        }
    }
    report.record("interference_sign_changes", sign_changes as f64);
    report.require(has_positive && has_negative && sign_changes >= 2);
    Ok(report)
}

/// Free-packet width after T = 1 against the closed-form spreading law,
/// for the kernel and Crank-Nicolson evolutions produced by the
/// cross-validation criterion.
pub fn criterion_spreading(
    states: &CrossValidationStates,
    c: &PhysicalConstants,
) -> CriterionReport {
    let mut report = CriterionReport::new("gaussian_spreading");
    let sigma = 1.0;
    let t = 1.0;
    let expected = sigma * (1.0 + (c.hbar * t / (2.0 * c.mass * sigma * sigma)).powi(2)).sqrt();
    report.record("expected_width", expected);
    report.record_below(
        "kernel_width_err",
        (states.free_kernel.position_spread() - expected).abs(),
        SPREADING_ABS,
    );
    report.record_below(
        "cn_width_err",
        (states.free_cn.position_spread() - expected).abs(),
        SPREADING_ABS,
    );
    report
}

/// Run the whole suite, sharing the heavy artifacts between criteria.
pub fn run_suite(c: &PhysicalConstants) -> Result<SuiteOutput> {
    let mut criteria = Vec::new();
    criteria.push(criterion_moments(c)?);

    let (composition, convergence) = criterion_composition(c)?;
    criteria.push(composition);
    criteria.push(criterion_unitarity(c)?);

    let cross = criterion_cross_validation(c)?;
    criteria.push(cross.report.clone());
    criteria.push(criterion_conservation(c)?);
    criteria.push(criterion_classical_limit(c)?);
    criteria.push(criterion_maupertuis(c)?);
    criteria.push(criterion_double_slit(c)?);
    criteria.push(criterion_spreading(&cross, c));

    let all_passed = criteria.iter().all(|r| r.passed);
    Ok(SuiteOutput {
        report: SuiteReport {
            criteria,
            convergence,
            all_passed,
        },
        free_kernel_final: cross.free_kernel,
        free_cn_final: cross.free_cn,
    })
}
