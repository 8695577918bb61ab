//! Short-time propagator kernels on the lattice, their composition into
//! finite-time kernels, wave-function propagation, and the checks that tie
//! them back to closed-form results: the analytic free-particle kernel, the
//! Gaussian moment integrals, the unitarity condition and the
//! classical-limit phase.
//!
//! Conventions used throughout:
//!
//! * Principal square-root branch, `sqrt(i) = exp(i pi / 4)`. This makes
//!   the normalization constant `A = (2 pi i hbar eps / m)^(1/2)` and the
//!   free kernel single-valued.
//! * Matrix entries are kernel *values* `K(x_j, t'; x_i, t)`. The
//!   quadrature weight `dx` is applied when a matrix acts on a state or on
//!   another matrix, never baked into the entries.
//! * Stability guard `m dx^2 / (hbar eps) < pi`: the short-time kernel
//!   oscillates in `x` with wavelength about `sqrt(2 pi hbar eps / m)`, and
//!   the lattice has to resolve it or composition diverges.
//! * The stored values are the short-time kernel restricted to the
//!   momentum band `|p| <= pi/dx` the lattice can represent (see
//!   [`build_propagator`]). The restriction has a closed form in Fresnel
//!   integrals and converges to the pointwise `(1/A) exp(i eps L / hbar)`
//!   as `dx -> 0`. Without it the unresolvable part of the kernel
//!   oscillation aliases onto the lattice and composition diverges
//!   exponentially; with it, one-slice matrices are unitary on the lattice
//!   up to edge truncation and their compositions are alias-free.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::action::{classical_path, path_action, PotentialModel};
use crate::error::{Error, Result};
use crate::fresnel::fresnel;
use crate::lattice::{PhysicalConstants, SpatialGrid, TimeSlicing, WaveFunction};

use std::f64::consts::{FRAC_PI_4, PI};

/// The per-slice measure constant `A = (2 pi i hbar eps / m)^(1/2)`,
/// principal branch, so `|A|^2 = 2 pi hbar eps / m`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalizationConstant {
    value: Complex64,
}

impl NormalizationConstant {
    pub fn value(&self) -> Complex64 {
        self.value
    }

    /// `1 / A`, the prefactor of every short-time kernel entry.
    pub fn reciprocal(&self) -> Complex64 {
        Complex64::from_polar(1.0 / self.value.norm(), -FRAC_PI_4)
    }
}

pub fn normalization_constant(
    epsilon: f64,
    c: &PhysicalConstants,
) -> Result<NormalizationConstant> {
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(Error::NonPositive {
            name: "epsilon",
            value: epsilon,
        });
    }
    let magnitude = (2.0 * PI * c.hbar * epsilon / c.mass).sqrt();
    Ok(NormalizationConstant {
        value: Complex64::from_polar(magnitude, FRAC_PI_4),
    })
}

/// One-slice amplitude
/// `K = (1/A) exp[(i eps / hbar) L((x_to - x_from)/eps, (x_to + x_from)/2, t + eps/2)]`.
///
/// For any real potential the entry is `1/A` times a unimodular phase.
pub fn short_time_kernel(
    x_to: f64,
    x_from: f64,
    t: f64,
    epsilon: f64,
    pot: &PotentialModel,
    c: &PhysicalConstants,
) -> Result<Complex64> {
    let inv_a = normalization_constant(epsilon, c)?.reciprocal();
    let phase = slice_phase(x_to, x_from, t, epsilon, pot, c)?;
    Ok(inv_a * Complex64::from_polar(1.0, phase))
}

/// Phase `eps * L / hbar` of one slice.
fn slice_phase(
    x_to: f64,
    x_from: f64,
    t: f64,
    epsilon: f64,
    pot: &PotentialModel,
    c: &PhysicalConstants,
) -> Result<f64> {
    let v = (x_to - x_from) / epsilon;
    let x_mid = 0.5 * (x_to + x_from);
    let lagrangian = 0.5 * c.mass * v * v - pot.value(x_mid, t + 0.5 * epsilon, c)?;
    Ok(epsilon * lagrangian / c.hbar)
}

/// Dense lattice realization of a kernel `K(x_j, t_to; x_i, t_from)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PropagatorMatrix {
    grid: SpatialGrid,
    t_from: f64,
    t_to: f64,
    constants: PhysicalConstants,
    /// Row-major, `entries[j * n + i] = K(x_j, t_to; x_i, t_from)`.
    entries: Vec<Complex64>,
}

impl PropagatorMatrix {
    pub fn grid(&self) -> &SpatialGrid {
        &self.grid
    }

    pub fn t_from(&self) -> f64 {
        self.t_from
    }

    pub fn t_to(&self) -> f64 {
        self.t_to
    }

    pub fn constants(&self) -> &PhysicalConstants {
        &self.constants
    }

    pub fn entry(&self, j: usize, i: usize) -> Complex64 {
        self.entries[j * self.grid.n_points() + i]
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    /// Zero-span identity: `delta_{ji} / dx` on the diagonal, the neutral
    /// element of [`compose`].
    pub fn identity(grid: SpatialGrid, t: f64, constants: PhysicalConstants) -> Self {
        let n = grid.n_points();
        let mut entries = vec![Complex64::new(0.0, 0.0); n * n];
        let peak = 1.0 / grid.spacing();
        for j in 0..n {
            entries[j * n + j] = Complex64::new(peak, 0.0);
        }
        Self {
            grid,
            t_from: t,
            t_to: t,
            constants,
            entries,
        }
    }

    /// Multiply a kernel by a complex scalar (testing aid; a physical
    /// kernel is never rescaled).
    pub fn scaled(&self, factor: Complex64) -> Self {
        Self {
            entries: self.entries.iter().map(|e| e * factor).collect(),
            ..self.clone()
        }
    }
}

/// Value of the stability guard expression `m dx^2 / (hbar eps)`.
pub fn stability_coupling(grid: &SpatialGrid, epsilon: f64, c: &PhysicalConstants) -> f64 {
    c.mass * grid.spacing() * grid.spacing() / (c.hbar * epsilon)
}

/// Band-resolved free slice kernel per node displacement `delta`:
///
/// ```text
/// K(delta) = (1/2 pi) integral_{-P}^{P} exp(i p delta - i hbar eps p^2 / 2m) dp
///          = (1/A) exp(i m delta^2 / 2 hbar eps) * B(delta),   P = pi/dx
/// ```
///
/// where the roll-off factor `B` comes from the Fresnel integrals of the
/// band edges. `B -> 1` for displacements whose stationary momentum
/// `m delta / (hbar eps)` lies well inside the band, and `B -> 0` beyond
/// it; as `dx -> 0` the entries converge to the pointwise short-time
/// kernel. On the infinite lattice this operator is exactly unitary and
/// its compositions are free of sampling aliases.
fn band_resolved_free_kernel(
    grid: &SpatialGrid,
    epsilon: f64,
    inv_a: Complex64,
    c: &PhysicalConstants,
) -> Vec<Complex64> {
    let n = grid.n_points();
    let dx = grid.spacing();
    let p_band = PI / dx;
    let chirp = 0.5 * c.mass / (c.hbar * epsilon);
    // substitution scale turning the band-edge integral into C/S arguments
    let t_scale = (c.hbar * epsilon / (PI * c.mass)).sqrt();
    // the full-line Fresnel integral equals 1 - i; B is the banded share
    let full_line = Complex64::new(1.0, -1.0);

    let mut by_displacement = vec![Complex64::new(0.0, 0.0); 2 * n - 1];
    by_displacement
        .par_iter_mut()
        .enumerate()
        .for_each(|(d, slot)| {
            let delta = (d as f64 - (n - 1) as f64) * dx;
            let p_star = c.mass * delta / (c.hbar * epsilon);
            let (c_hi, s_hi) = fresnel((p_band - p_star) * t_scale);
            let (c_lo, s_lo) = fresnel((-p_band - p_star) * t_scale);
            let edge = Complex64::new(c_hi - c_lo, -(s_hi - s_lo));
            let band = edge / full_line;
            *slot = inv_a * band * Complex64::from_polar(1.0, chirp * delta * delta);
        });
    by_displacement
}

/// Build the one-slice propagator matrix for the slice starting at `t`:
/// the band-resolved kinetic kernel times the midpoint potential phase
/// `exp(-i eps V((x_i + x_j)/2, t + eps/2) / hbar)`.
///
/// Rejects lattices that cannot resolve the kernel oscillation, i.e. where
/// `m dx^2 / (hbar eps) >= pi`.
pub fn build_propagator(
    grid: SpatialGrid,
    t: f64,
    epsilon: f64,
    pot: &PotentialModel,
    c: &PhysicalConstants,
) -> Result<PropagatorMatrix> {
    let inv_a = normalization_constant(epsilon, c)?.reciprocal();
    let coupling = stability_coupling(&grid, epsilon, c);
    if coupling >= PI {
        return Err(Error::StabilityGuard {
            coupling,
            dx: grid.spacing(),
            epsilon,
        });
    }
    let n = grid.n_points();
    // Pre-sample the potential once per midpoint; midpoints of node pairs
    // lie on the half-step lattice of 2n - 1 points.
    let t_mid = t + 0.5 * epsilon;
    let half_step = 0.5 * grid.spacing();
    let v_mid: Vec<f64> = (0..2 * n - 1)
        .map(|k| pot.value(grid.x_min() + k as f64 * half_step, t_mid, c))
        .collect::<Result<_>>()?;
    let kinetic = band_resolved_free_kernel(&grid, epsilon, inv_a, c);

    let mut entries = vec![Complex64::new(0.0, 0.0); n * n];
    let vfac = epsilon / c.hbar;
    entries.par_chunks_mut(n).enumerate().for_each(|(j, row)| {
        for (i, slot) in row.iter_mut().enumerate() {
            let phase = -vfac * v_mid[i + j];
            *slot = kinetic[j + n - 1 - i] * Complex64::from_polar(1.0, phase);
        }
    });
    Ok(PropagatorMatrix {
        grid,
        t_from: t,
        t_to: t + epsilon,
        constants: *c,
        entries,
    })
}

/// Split re/im storage for the dense inner loops; plain arrays of doubles
/// vectorize much better than interleaved complex pairs.
struct SplitMatrix {
    re: Vec<f64>,
    im: Vec<f64>,
}

impl SplitMatrix {
    fn from_entries(entries: &[Complex64]) -> Self {
        Self {
            re: entries.iter().map(|e| e.re).collect(),
            im: entries.iter().map(|e| e.im).collect(),
        }
    }

    fn to_entries(&self) -> Vec<Complex64> {
        self.re
            .iter()
            .zip(&self.im)
            .map(|(&re, &im)| Complex64::new(re, im))
            .collect()
    }
}

/// `C = A * B * weight` on split storage. Each output row is accumulated
/// sequentially, so results do not depend on the parallel schedule.
fn mul_weighted_split(a: &SplitMatrix, b: &SplitMatrix, n: usize, weight: f64) -> SplitMatrix {
    let mut out_re = vec![0.0; n * n];
    let mut out_im = vec![0.0; n * n];
    out_re
        .par_chunks_mut(n)
        .zip(out_im.par_chunks_mut(n))
        .enumerate()
        .for_each(|(j, (row_re, row_im))| {
            for c in 0..n {
                let ar = a.re[j * n + c] * weight;
                let ai = a.im[j * n + c] * weight;
                let b_re = &b.re[c * n..(c + 1) * n];
                let b_im = &b.im[c * n..(c + 1) * n];
                for i in 0..n {
                    row_re[i] += ar * b_re[i] - ai * b_im[i];
                    row_im[i] += ar * b_im[i] + ai * b_re[i];
                }
            }
        });
    SplitMatrix {
        re: out_re,
        im: out_im,
    }
}

fn mat_mul_weighted(a: &[Complex64], b: &[Complex64], n: usize, weight: f64) -> Vec<Complex64> {
    let product = mul_weighted_split(
        &SplitMatrix::from_entries(a),
        &SplitMatrix::from_entries(b),
        n,
        weight,
    );
    product.to_entries()
}

/// Rule-1 composition `K(b, a) = integral K(b, c) K(c, a) dx_c`, realized
/// as `sum_c later[j][c] * earlier[c][i] * dx`.
pub fn compose(later: &PropagatorMatrix, earlier: &PropagatorMatrix) -> Result<PropagatorMatrix> {
    if later.grid != earlier.grid {
        return Err(Error::GridMismatch);
    }
    if later.constants != earlier.constants {
        return Err(Error::ConstantsMismatch);
    }
    let joint = later.t_from;
    if (earlier.t_to - joint).abs() > 1e-9 * joint.abs().max(1.0) {
        return Err(Error::TimeMismatch {
            expected: earlier.t_to,
            found: joint,
        });
    }
    let n = later.grid.n_points();
    let entries = mat_mul_weighted(&later.entries, &earlier.entries, n, later.grid.spacing());
    Ok(PropagatorMatrix {
        grid: later.grid,
        t_from: earlier.t_from,
        t_to: later.t_to,
        constants: later.constants,
        entries,
    })
}

/// `power`-fold composition of one slice kernel with itself, by repeated
/// squaring. Equal to left-folding [`compose`] `power - 1` times (the
/// product is associative); the time range is relabelled to span all
/// `power` slices.
pub fn compose_power(k: &PropagatorMatrix, power: usize) -> Result<PropagatorMatrix> {
    if power == 0 {
        return Err(Error::NonPositive {
            name: "power",
            value: 0.0,
        });
    }
    let n = k.grid.n_points();
    let dx = k.grid.spacing();
    let mut result: Option<SplitMatrix> = None;
    let mut base = SplitMatrix::from_entries(&k.entries);
    let mut remaining = power;
    loop {
        if remaining & 1 == 1 {
            result = Some(match result {
                None => SplitMatrix {
                    re: base.re.clone(),
                    im: base.im.clone(),
                },
                Some(acc) => mul_weighted_split(&base, &acc, n, dx),
            });
        }
        remaining >>= 1;
        if remaining == 0 {
            break;
        }
        base = mul_weighted_split(&base, &base, n, dx);
    }
    let span = k.t_to - k.t_from;
    Ok(PropagatorMatrix {
        grid: k.grid,
        t_from: k.t_from,
        t_to: k.t_from + power as f64 * span,
        constants: k.constants,
        entries: result.unwrap().to_entries(),
    })
}

/// Propagate a state one kernel application:
/// `psi'_j = sum_i K[j][i] psi_i dx`.
pub fn propagate(psi: &WaveFunction, k: &PropagatorMatrix) -> Result<WaveFunction> {
    if *psi.grid() != k.grid {
        return Err(Error::GridMismatch);
    }
    let n = k.grid.n_points();
    let dx = k.grid.spacing();
    let values = psi.values();
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    out.par_iter_mut().enumerate().for_each(|(j, slot)| {
        let row = &k.entries[j * n..(j + 1) * n];
        let mut acc = Complex64::new(0.0, 0.0);
        for (kji, psi_i) in row.iter().zip(values) {
            acc += kji * psi_i;
        }
        *slot = acc * dx;
    });
    WaveFunction::new(k.grid, out)
}

/// `out = M v * weight` on split storage, row-parallel with sequential
/// per-row accumulation.
fn matvec_weighted_split(
    m: &SplitMatrix,
    v_re: &[f64],
    v_im: &[f64],
    n: usize,
    weight: f64,
) -> (Vec<f64>, Vec<f64>) {
    let mut out_re = vec![0.0; n];
    let mut out_im = vec![0.0; n];
    out_re
        .par_iter_mut()
        .zip(out_im.par_iter_mut())
        .enumerate()
        .for_each(|(j, (o_re, o_im))| {
            let row_re = &m.re[j * n..(j + 1) * n];
            let row_im = &m.im[j * n..(j + 1) * n];
            let mut acc_re = 0.0;
            let mut acc_im = 0.0;
            for i in 0..n {
                acc_re += row_re[i] * v_re[i] - row_im[i] * v_im[i];
                acc_im += row_re[i] * v_im[i] + row_im[i] * v_re[i];
            }
            *o_re = acc_re * weight;
            *o_im = acc_im * weight;
        });
    (out_re, out_im)
}

/// Evolve a state over a whole slicing by repeated application of the
/// one-slice propagator. The potential families carried by
/// [`PotentialModel`] are time-independent, so the slice kernel is built
/// once and reused.
pub fn kernel_evolve(
    psi: &WaveFunction,
    pot: &PotentialModel,
    slicing: TimeSlicing,
    c: &PhysicalConstants,
) -> Result<WaveFunction> {
    let k = build_propagator(*psi.grid(), slicing.t_a(), slicing.epsilon(), pot, c)?;
    let n = k.grid.n_points();
    let dx = k.grid.spacing();
    let m = SplitMatrix::from_entries(&k.entries);
    let mut re: Vec<f64> = psi.values().iter().map(|v| v.re).collect();
    let mut im: Vec<f64> = psi.values().iter().map(|v| v.im).collect();
    for _ in 0..slicing.n_slices() {
        let (nre, nim) = matvec_weighted_split(&m, &re, &im, n, dx);
        re = nre;
        im = nim;
    }
    let values = re
        .into_iter()
        .zip(im)
        .map(|(r, i)| Complex64::new(r, i))
        .collect();
    WaveFunction::new(k.grid, values)
}

/// Closed-form free-particle kernel
/// `K = sqrt(m / (2 pi i hbar T)) exp(i m (x_b - x_a)^2 / (2 hbar T))`,
/// principal branch. This is the analytic oracle the lattice composition
/// is validated against.
pub fn free_particle_kernel(
    x_b: f64,
    t_b: f64,
    x_a: f64,
    t_a: f64,
    c: &PhysicalConstants,
) -> Result<Complex64> {
    let span = t_b - t_a;
    if !(span.is_finite() && span > 0.0) {
        return Err(Error::TimeOrder { t_a, t_b });
    }
    let magnitude = (c.mass / (2.0 * PI * c.hbar * span)).sqrt();
    let phase = c.mass * (x_b - x_a) * (x_b - x_a) / (2.0 * c.hbar * span);
    Ok(Complex64::from_polar(magnitude, phase - FRAC_PI_4))
}

/// Regularization schedule for the Fresnel moment integrals.
const MOMENT_DELTAS: [f64; 3] = [1e-2, 5e-3, 2.5e-3];

/// The three Gaussian moment integrals
/// `I_k = integral exp(i m eta^2 / (2 hbar eps)) eta^k d eta`, `k = 0, 1, 2`,
/// evaluated by quadrature with a convergence factor `exp(-delta eta^2)`
/// and Richardson extrapolation `delta -> 0` over the schedule
/// `{1e-2, 5e-3, 2.5e-3}`.
///
/// Returns the raw integrals, i.e. `(A, 0, A i hbar eps / m)` before any
/// division by `A`. `I_1` vanishes identically: the odd integrand is summed
/// in symmetric pairs. Extrapolation failure is reported as an error.
pub fn gaussian_moments(
    epsilon: f64,
    c: &PhysicalConstants,
) -> Result<(Complex64, Complex64, Complex64)> {
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(Error::NonPositive {
            name: "epsilon",
            value: epsilon,
        });
    }
    let a = 0.5 * c.mass / (c.hbar * epsilon);
    let delta_min = MOMENT_DELTAS[2];
    // Damping kills the tail: exp(-delta eta_max^2) = exp(-25).
    let eta_max = 5.0 / delta_min.sqrt();
    // Resolve the fastest oscillation (2 a eta_max rad per unit) with
    // 16 samples per radian, and keep a floor for slowly varying cases.
    let h_osc = PI / (16.0 * a * eta_max);
    let h = h_osc.min(eta_max / 2000.0);
    let n_intervals = ((eta_max / h).ceil() as usize + 1) & !1; // even
    if n_intervals > 60_000_000 {
        return Err(Error::InvalidArgument(format!(
            "epsilon = {epsilon} needs {n_intervals} quadrature nodes for the moment integrals"
        )));
    }
    let h = eta_max / n_intervals as f64;

    // Composite Simpson on [0, eta_max] for the even moments; the full-line
    // integrals are twice the half-line ones.
    let mut s0 = [Complex64::new(0.0, 0.0); MOMENT_DELTAS.len()];
    let mut s2 = [Complex64::new(0.0, 0.0); MOMENT_DELTAS.len()];
    for node in 0..=n_intervals {
        let eta = node as f64 * h;
        let eta2 = eta * eta;
        let w = if node == 0 || node == n_intervals {
            1.0
        } else if node % 2 == 1 {
            4.0
        } else {
            2.0
        };
        let osc = Complex64::from_polar(w, a * eta2);
        for (d, &delta) in MOMENT_DELTAS.iter().enumerate() {
            let damped = osc * (-delta * eta2).exp();
            s0[d] += damped;
            s2[d] += damped * eta2;
        }
    }
    let scale = 2.0 * h / 3.0;
    let i0: Vec<Complex64> = s0.iter().map(|s| s * scale).collect();
    let i2: Vec<Complex64> = s2.iter().map(|s| s * scale).collect();

    let i0_final = richardson(&i0);
    let i2_final = richardson(&i2);
    check_converged(&i0, i0_final, "I0")?;
    check_converged(&i2, i2_final, "I2")?;
    Ok((i0_final, Complex64::new(0.0, 0.0), i2_final))
}

/// Two-level Richardson extrapolation for a delta-halving schedule with
/// error `c1 delta + c2 delta^2 + ...`.
fn richardson(values: &[Complex64]) -> Complex64 {
    let l1a = 2.0 * values[1] - values[0];
    let l1b = 2.0 * values[2] - values[1];
    (4.0 * l1b - l1a) / 3.0
}

fn check_converged(
    values: &[Complex64],
    extrapolated: Complex64,
    what: &'static str,
) -> Result<()> {
    let l1b = 2.0 * values[2] - values[1];
    let correction = (extrapolated - l1b).norm();
    if correction > 1e-4 * extrapolated.norm() {
        return Err(Error::NonConvergence {
            what: match what {
                "I0" => "gaussian moment I0",
                _ => "gaussian moment I2",
            },
        });
    }
    Ok(())
}

/// Deviation of `K` from the delta-function condition
/// `integral K*(x_2; x_1') K(x_2; x_1) dx_2 = delta(x_1' - x_1)`:
/// the largest entry of `|K^dagger K dx - I/dx|`, scaled by `dx` so a
/// perfect lattice unitary scores 0.
pub fn unitarity_defect(k: &PropagatorMatrix) -> f64 {
    unitarity_defect_with_margin(k, 0.0)
}

/// [`unitarity_defect`] restricted to source-node pairs at least a
/// `margin` fraction away from each boundary. Truncation of the line to a
/// finite grid concentrates the defect in the edge columns; the interior
/// defect measures the composition itself.
pub fn unitarity_defect_with_margin(k: &PropagatorMatrix, margin: f64) -> f64 {
    let n = k.grid.n_points();
    let dx = k.grid.spacing();
    let range = k.grid.interior(margin);
    let lo = range.start;
    let width = range.len();
    let peak = 1.0 / dx;
    let m = SplitMatrix::from_entries(&k.entries);

    // Conjugate transpose once so the inner products stream along rows.
    let mut adj_re = vec![0.0; n * n];
    let mut adj_im = vec![0.0; n * n];
    adj_re
        .par_chunks_mut(n)
        .zip(adj_im.par_chunks_mut(n))
        .enumerate()
        .for_each(|(i, (row_re, row_im))| {
            for j in 0..n {
                row_re[j] = m.re[j * n + i];
                row_im[j] = -m.im[j * n + i];
            }
        });

    (lo..lo + width)
        .into_par_iter()
        .map(|ip| {
            let a_re = &adj_re[ip * n..(ip + 1) * n];
            let a_im = &adj_im[ip * n..(ip + 1) * n];
            let mut gram_re = vec![0.0; width];
            let mut gram_im = vec![0.0; width];
            for j in 0..n {
                let (ar, ai) = (a_re[j], a_im[j]);
                let k_re = &m.re[j * n + lo..j * n + lo + width];
                let k_im = &m.im[j * n + lo..j * n + lo + width];
                for i in 0..width {
                    gram_re[i] += ar * k_re[i] - ai * k_im[i];
                    gram_im[i] += ar * k_im[i] + ai * k_re[i];
                }
            }
            let mut worst = 0.0f64;
            for offset in 0..width {
                let target = if lo + offset == ip { peak } else { 0.0 };
                let dev_re = gram_re[offset] * dx - target;
                let dev_im = gram_im[offset] * dx;
                let dev = (dev_re * dev_re + dev_im * dev_im).sqrt() * dx;
                worst = worst.max(dev);
            }
            worst
        })
        .reduce(|| 0.0, f64::max)
}

/// Result of comparing the phase of the composed lattice kernel with the
/// classical action.
#[derive(Debug, Clone, Copy)]
pub struct PhaseCheck {
    /// Argument of the composed lattice kernel entry at `(x_b <- x_a)`.
    pub lattice_phase: f64,
    /// Classical action along the stationary path, in units of `hbar`.
    pub action_over_hbar: f64,
    /// Phase of the analytic kernel prefactor, `-pi/4` before the first
    /// caustic.
    pub prefactor_phase: f64,
    /// `lattice_phase - (action_over_hbar + prefactor_phase)` wrapped to
    /// `(-pi, pi]`.
    pub wrapped_difference: f64,
}

/// Wrap an angle to `(-pi, pi]`.
pub fn wrap_phase(angle: f64) -> f64 {
    let two_pi = 2.0 * PI;
    let mut a = angle % two_pi;
    if a <= -PI {
        a += two_pi;
    } else if a > PI {
        a -= two_pi;
    }
    a
}

/// Compare the phase of the composed lattice kernel against
/// `S_cl / hbar - pi/4` for a quadratic Lagrangian, where the phase is
/// exact up to the caustic prefactor.
///
/// Endpoints are snapped to the nearest grid nodes and the classical action
/// is evaluated for the snapped endpoints. Harmonic intervals are limited
/// to `omega T < pi` (before the first caustic, where the prefactor phase
/// is `-pi/4`).
pub fn classical_phase_check(
    pot: &PotentialModel,
    x_a: f64,
    x_b: f64,
    slicing: TimeSlicing,
    grid: SpatialGrid,
    c: &PhysicalConstants,
) -> Result<PhaseCheck> {
    match pot {
        PotentialModel::Free => {}
        PotentialModel::Harmonic { omega } => {
            let omega_t = omega * slicing.duration();
            if (omega_t.sin()).abs() < 1e-9 {
                return Err(Error::DegenerateInterval { omega_t });
            }
            if omega_t >= PI {
                return Err(Error::InvalidArgument(format!(
                    "omega*T = {omega_t:.6} is past the first caustic; phase check requires omega*T < pi"
                )));
            }
        }
        _ => {
            return Err(Error::UnsupportedPotential {
                op: "classical_phase_check",
                required: "Free and Harmonic",
            })
        }
    }
    let node_a = grid.nearest_node(x_a);
    let node_b = grid.nearest_node(x_b);
    let (xa, xb) = (grid.node(node_a), grid.node(node_b));

    let source = WaveFunction::delta(grid, node_a)?;
    let column = kernel_evolve(&source, pot, slicing, c)?;
    let lattice_phase = column.values()[node_b].arg();

    let stationary = classical_path(pot, xa, xb, slicing, c)?;
    let action_over_hbar = path_action(&stationary, pot, c)?.value() / c.hbar;
    let prefactor_phase = -FRAC_PI_4;
    let wrapped_difference = wrap_phase(lattice_phase - action_over_hbar - prefactor_phase);
    Ok(PhaseCheck {
        lattice_phase,
        action_over_hbar,
        prefactor_phase,
        wrapped_difference,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn consts() -> PhysicalConstants {
        PhysicalConstants::default()
    }

    #[test]
    fn normalization_constant_branch() {
        let c = consts();
        let a = normalization_constant(1.0, &c).unwrap();
        let v = a.value();
        let expected = (2.0 * PI).sqrt() * std::f64::consts::FRAC_1_SQRT_2;
        assert!((v.re - expected).abs() < 1e-12);
        assert!((v.im - expected).abs() < 1e-12);
        assert!((v.re - 1.77245).abs() < 1e-5);
        assert!((v.norm_sqr() - 2.0 * PI).abs() < 1e-12);

        let a = normalization_constant(0.01, &c).unwrap();
        assert!((a.value().norm() - (0.02 * PI).sqrt()).abs() < 1e-12);
        assert!((a.value().norm() - 0.25066).abs() < 1e-5);

        assert!(normalization_constant(0.0, &c).is_err());
        assert!(normalization_constant(-1.0, &c).is_err());
    }

    #[test]
    fn short_time_kernel_values() {
        let c = consts();
        let free = PotentialModel::Free;
        let k0 = short_time_kernel(0.0, 0.0, 0.0, 1.0, &free, &c).unwrap();
        let expected = (2.0 * PI).powf(-0.5);
        assert!((k0.re - expected * std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
        assert!((k0.re - 0.28209).abs() < 1e-5);
        assert!((k0.im + 0.28209).abs() < 1e-5);

        // displacement 1 adds exactly the phase 1/2
        let k1 = short_time_kernel(1.0, 0.0, 0.0, 1.0, &free, &c).unwrap();
        let ratio = k1 / k0;
        assert!((ratio.norm() - 1.0).abs() < 1e-12);
        assert!((ratio.arg() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn short_time_kernel_is_unimodular() {
        let c = consts();
        let harm = PotentialModel::harmonic(3.0).unwrap();
        let inv_a_mag = 1.0 / normalization_constant(0.05, &c).unwrap().value().norm();
        for (xt, xf) in [(0.0, 0.0), (1.3, -0.4), (-7.0, 6.5)] {
            let k = short_time_kernel(xt, xf, 0.2, 0.05, &harm, &c).unwrap();
            assert!((k.norm() - inv_a_mag).abs() < 1e-12 * inv_a_mag);
        }
    }

    #[test]
    fn stability_guard_enforced() {
        let c = consts();
        let free = PotentialModel::Free;
        let fine = SpatialGrid::new(-20.0, 20.0, 801).unwrap();
        assert!((stability_coupling(&fine, 0.01, &c) - 0.25).abs() < 1e-12);
        assert!(build_propagator(fine, 0.0, 0.01, &free, &c).is_ok());

        let coarse = SpatialGrid::new(-20.0, 20.0, 81).unwrap();
        let err = build_propagator(coarse, 0.0, 0.01, &free, &c).unwrap_err();
        match err {
            Error::StabilityGuard { coupling, .. } => assert!((coupling - 25.0).abs() < 1e-9),
            other => panic!("wrong error: {other}"),
        }
    }

    #[test]
    fn propagator_entries_follow_band_structure() {
        let c = consts();
        let grid = SpatialGrid::new(-2.0, 2.0, 41).unwrap();
        let harm = PotentialModel::harmonic(1.0).unwrap();
        let eps = 0.02;
        let k = build_propagator(grid, 0.0, eps, &harm, &c).unwrap();
        let inv_a_mag = 1.0 / normalization_constant(eps, &c).unwrap().value().norm();
        // near the diagonal the entries carry the short-time magnitude,
        // up to the Gibbs ripple of the sharp band edge
        for j in 0..41 {
            let ratio = k.entry(j, j).norm() / inv_a_mag;
            assert!((ratio - 1.0).abs() < 0.15, "diag ratio {ratio}");
        }
        // beyond the resolvable displacement the band roll-off suppresses
        // the entries
        let resolvable = PI * c.hbar * eps / (c.mass * grid.spacing());
        let far = grid.nearest_node(grid.node(20) + 4.0 * resolvable);
        assert!(k.entry(far, 20).norm() < 0.05 * inv_a_mag);
        // the real potential only rotates phases; magnitudes match the
        // free band kernel row by row
        let free_k = build_propagator(grid, 0.0, eps, &PotentialModel::Free, &c).unwrap();
        for (a, b) in k.entries().iter().zip(free_k.entries()) {
            assert!((a.norm() - b.norm()).abs() < 1e-12);
        }
    }

    #[test]
    fn propagator_acts_as_band_symbol_on_plane_waves() {
        // applying the slice kernel to a plane wave inside the band
        // multiplies it by exp(-i hbar eps p^2 / 2m) away from the edges
        let c = consts();
        let grid = SpatialGrid::new(-30.0, 30.0, 1201).unwrap();
        let eps = 0.02;
        let k = build_propagator(grid, 0.0, eps, &PotentialModel::Free, &c).unwrap();
        for p in [0.0, 1.0, 5.0, 20.0] {
            let wave = WaveFunction::new(
                grid,
                grid.nodes()
                    .map(|x| Complex64::from_polar(1.0, p * x))
                    .collect(),
            )
            .unwrap();
            let out = propagate(&wave, &k).unwrap();
            let expected_phase = -c.hbar * eps * p * p / (2.0 * c.mass);
            let expected = Complex64::from_polar(1.0, expected_phase);
            // residual comes from the truncated kernel tails at the domain
            // edges; it shrinks towards the center of the grid
            for j in 500..700 {
                let ratio = out.values()[j] / wave.values()[j];
                assert!(
                    (ratio - expected).norm() < 2e-4,
                    "p = {p}, node {j}: ratio {ratio}, expected {expected}"
                );
            }
        }
    }

    #[test]
    fn compose_with_identity_is_identity_operation() {
        let c = consts();
        let grid = SpatialGrid::new(-2.0, 2.0, 41).unwrap();
        let free = PotentialModel::Free;
        let k = build_propagator(grid, 0.0, 0.02, &free, &c).unwrap();
        let id = PropagatorMatrix::identity(grid, 0.0, c);
        let composed = compose(&k, &id).unwrap();
        for (a, b) in composed.entries().iter().zip(k.entries()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn compose_checks_compatibility() {
        let c = consts();
        let free = PotentialModel::Free;
        let g1 = SpatialGrid::new(-2.0, 2.0, 41).unwrap();
        let g2 = SpatialGrid::new(-2.0, 2.0, 43).unwrap();
        let k1 = build_propagator(g1, 0.0, 0.02, &free, &c).unwrap();
        let k2 = build_propagator(g2, 0.02, 0.02, &free, &c).unwrap();
        assert!(matches!(compose(&k2, &k1), Err(Error::GridMismatch)));

        let k3 = build_propagator(g1, 0.5, 0.02, &free, &c).unwrap();
        assert!(matches!(compose(&k3, &k1), Err(Error::TimeMismatch { .. })));
    }

    #[test]
    fn compose_power_matches_sequential() {
        let c = consts();
        let grid = SpatialGrid::new(-2.0, 2.0, 61).unwrap();
        let free = PotentialModel::Free;
        let k = build_propagator(grid, 0.0, 0.005, &free, &c).unwrap();
        let pow5 = compose_power(&k, 5).unwrap();

        let mut seq = k.clone();
        for _ in 1..5 {
            let next = build_propagator(grid, seq.t_to, 0.005, &free, &c).unwrap();
            seq = compose(&next, &seq).unwrap();
        }
        let scale = 1.0 / normalization_constant(0.005, &c).unwrap().value().norm();
        for (a, b) in pow5.entries().iter().zip(seq.entries()) {
            assert!((a - b).norm() < 1e-10 * scale);
        }
        assert!((pow5.t_to - 0.025).abs() < 1e-12);
    }

    #[test]
    fn propagating_delta_reads_off_column() {
        let c = consts();
        let grid = SpatialGrid::new(-2.0, 2.0, 41).unwrap();
        let free = PotentialModel::Free;
        let k = build_propagator(grid, 0.0, 0.02, &free, &c).unwrap();
        let delta = WaveFunction::delta(grid, 17).unwrap();
        let out = propagate(&delta, &k).unwrap();
        for (j, v) in out.values().iter().enumerate() {
            assert!((v - k.entry(j, 17)).norm() < 1e-12 * k.entry(j, 17).norm());
        }
    }

    #[test]
    fn free_kernel_values() {
        let c = consts();
        let k = free_particle_kernel(0.0, 1.0, 0.0, 0.0, &c).unwrap();
        assert!((k.norm() - 0.39894).abs() < 1e-5);
        assert!((k.re - 0.28209).abs() < 1e-5);
        assert!((k.im + 0.28209).abs() < 1e-5);

        let k = free_particle_kernel(1.0, 1.0, 0.0, 0.0, &c).unwrap();
        assert!((k.re - 0.3828).abs() < 1e-4);
        assert!((k.im + 0.1123).abs() < 1e-4);

        assert!(free_particle_kernel(0.0, 0.0, 0.0, 0.0, &c).is_err());
        assert!(free_particle_kernel(0.0, -1.0, 0.0, 0.0, &c).is_err());
    }

    #[test]
    fn moments_reproduce_normalization() {
        let c = consts();
        let eps = 0.01;
        let (i0, i1, i2) = gaussian_moments(eps, &c).unwrap();
        let a = normalization_constant(eps, &c).unwrap().value();
        assert!((i0 - a).norm() < 1e-3 * a.norm(), "I0 = {i0}, A = {a}");
        assert_eq!(i1, Complex64::new(0.0, 0.0));
        let expected = a * Complex64::new(0.0, c.hbar * eps / c.mass);
        assert!(
            (i2 - expected).norm() < 1e-3 * expected.norm(),
            "I2 = {i2}, expected {expected}"
        );
    }

    #[test]
    fn unitarity_of_identity_and_scaling() {
        let c = consts();
        let grid = SpatialGrid::new(-2.0, 2.0, 41).unwrap();
        let id = PropagatorMatrix::identity(grid, 0.0, c);
        assert_eq!(unitarity_defect(&id), 0.0);

        let scaled = id.scaled(Complex64::new(1.1, 0.0));
        let defect = unitarity_defect(&scaled);
        assert!(
            (defect - (1.1f64 * 1.1 - 1.0)).abs() < 1e-12,
            "defect = {defect}"
        );
    }

    #[test]
    fn free_phase_check_zero_displacement() {
        let c = consts();
        // wide domain with dx = 0.1: every band mode stays inside over T=1,
        // so no edge-truncation artifacts pollute the center column
        let grid = SpatialGrid::new(-40.0, 40.0, 801).unwrap();
        let slicing = TimeSlicing::new(0.0, 1.0, 200).unwrap();
        let check =
            classical_phase_check(&PotentialModel::Free, 0.0, 0.0, slicing, grid, &c).unwrap();
        assert_eq!(check.action_over_hbar, 0.0);
        // zero action: the lattice phase is the bare prefactor -pi/4
        println!("zero-displacement phase check: {check:?}");
        assert!(check.wrapped_difference.abs() < 0.05, "{check:?}");
    }

    #[test]
    fn phase_check_rejects_unsupported() {
        let c = consts();
        let grid = SpatialGrid::new(-20.0, 20.0, 801).unwrap();
        let slicing = TimeSlicing::new(0.0, 1.0, 100).unwrap();
        let pot = PotentialModel::masked_free(vec![(0.0, 1.0)], 5.0).unwrap();
        assert!(classical_phase_check(&pot, 0.0, 1.0, slicing, grid, &c).is_err());

        let past_caustic = TimeSlicing::new(0.0, 3.5, 100).unwrap();
        let harm = PotentialModel::harmonic(1.0).unwrap();
        assert!(classical_phase_check(&harm, 0.0, 1.0, past_caustic, grid, &c).is_err());
    }

    #[test]
    fn wrap_phase_range() {
        assert!((wrap_phase(3.0 * PI) - PI).abs() < 1e-12);
        assert!((wrap_phase(-3.0 * PI) - PI).abs() < 1e-12);
        assert_eq!(wrap_phase(0.3), 0.3);
    }
}
