//! Fresnel integrals `C(x)` and `S(x)` in the normalized convention
//!
//! ```text
//! C(x) = integral_0^x cos(pi t^2 / 2) dt
//! S(x) = integral_0^x sin(pi t^2 / 2) dt
//! ```
//!
//! Power series for small arguments, auxiliary-function asymptotics for
//! large ones. The propagator construction evaluates these for every node
//! displacement, so both branches are plain f64 arithmetic with no
//! allocation.

use std::f64::consts::PI;

const SERIES_CUTOFF: f64 = 3.0;
const MAX_SERIES_TERMS: usize = 80;
/// Largest index of the double factorials used by the asymptotic branch.
const MAX_ASYMPTOTIC_TERMS: usize = 7;

/// Both Fresnel integrals at once; they share the phase bookkeeping.
pub fn fresnel(x: f64) -> (f64, f64) {
    if x == 0.0 {
        return (0.0, 0.0);
    }
    let ax = x.abs();
    let (c, s) = if ax <= SERIES_CUTOFF {
        fresnel_series(ax)
    } else {
        fresnel_asymptotic(ax)
    };
    if x < 0.0 {
        (-c, -s)
    } else {
        (c, s)
    }
}

/// `C(x)` alone.
pub fn fresnel_c(x: f64) -> f64 {
    fresnel(x).0
}

/// `S(x)` alone.
pub fn fresnel_s(x: f64) -> f64 {
    fresnel(x).1
}

/// Power series
/// `C(x) = sum (-1)^k (pi/2)^(2k) x^(4k+1) / ((2k)! (4k+1))`,
/// `S(x) = sum (-1)^k (pi/2)^(2k+1) x^(4k+3) / ((2k+1)! (4k+3))`.
fn fresnel_series(x: f64) -> (f64, f64) {
    let half_pi = 0.5 * PI;
    let x2 = x * x;
    // running factor (-1)^k (pi/2)^(2k) x^(4k) / (2k)! for C,
    // and its odd companion for S
    let mut c_term_base = x; // k = 0 contribution before the 1/(4k+1)
    let mut s_term_base = half_pi * x * x2;
    let mut c_sum = c_term_base;
    let mut s_sum = s_term_base / 3.0;
    for k in 1..MAX_SERIES_TERMS {
        let k2 = 2.0 * k as f64;
        c_term_base *= -half_pi * half_pi * x2 * x2 / ((k2 - 1.0) * k2);
        s_term_base *= -half_pi * half_pi * x2 * x2 / (k2 * (k2 + 1.0));
        let c_term = c_term_base / (4.0 * k as f64 + 1.0);
        let s_term = s_term_base / (4.0 * k as f64 + 3.0);
        c_sum += c_term;
        s_sum += s_term;
        if c_term.abs() < 1e-17 * c_sum.abs() && s_term.abs() < 1e-17 * s_sum.abs() {
            break;
        }
    }
    (c_sum, s_sum)
}

/// Auxiliary-function asymptotics:
/// `C(x) = 1/2 + f(x) sin(pi x^2/2) - g(x) cos(pi x^2/2)`,
/// `S(x) = 1/2 - f(x) cos(pi x^2/2) - g(x) sin(pi x^2/2)`, with
/// `f ~ (1/pi x) [1 - 3/(pi x^2)^2 + 105/(pi x^2)^4 - ...]` and
/// `g ~ (1/pi^2 x^3) [1 - 15/(pi x^2)^2 + 945/(pi x^2)^4 - ...]`.
/// Terms are added while they still shrink (optimal truncation).
fn fresnel_asymptotic(x: f64) -> (f64, f64) {
    let pix2 = PI * x * x;
    let inv2 = 1.0 / (pix2 * pix2);
    // (4m-1)!! and (4m+1)!! for m = 0..
    let f_coeffs: [f64; 7] = [
        1.0,
        3.0,
        105.0,
        10_395.0,
        2_027_025.0,
        654_729_075.0,
        3.16234143225e11,
    ];
    let g_coeffs: [f64; 7] = [
        1.0,
        15.0,
        945.0,
        135_135.0,
        34_459_425.0,
        1.3749310575e10,
        7.905853580625e12,
    ];
    let mut f_sum = 0.0;
    let mut g_sum = 0.0;
    let mut power = 1.0;
    let mut last_f = f64::INFINITY;
    for m in 0..MAX_ASYMPTOTIC_TERMS {
        let f_term: f64 = f_coeffs[m] * power;
        let g_term: f64 = g_coeffs[m] * power;
        if f_term.abs() >= last_f {
            break;
        }
        let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
        f_sum += sign * f_term;
        g_sum += sign * g_term;
        last_f = f_term.abs();
        power *= inv2;
    }
    let f = f_sum / (PI * x);
    let g = g_sum / (PI * PI * x * x * x);
    // pi x^2 / 2 can be large; reduce through sin_cos directly
    let (sin_p, cos_p) = (0.5 * pix2).sin_cos();
    let c = 0.5 + f * sin_p - g * cos_p;
    let s = 0.5 - f * cos_p - g * sin_p;
    (c, s)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Simpson quadrature of the defining integrals; the independent
    /// oracle for both branches.
    fn fresnel_quadrature(x: f64) -> (f64, f64) {
        let n = 40_001usize; // odd node count, even interval count
        let h = x / (n - 1) as f64;
        let mut c = 0.0;
        let mut s = 0.0;
        for k in 0..n {
            let t = k as f64 * h;
            let w = if k == 0 || k == n - 1 {
                1.0
            } else if k % 2 == 1 {
                4.0
            } else {
                2.0
            };
            let phase = 0.5 * PI * t * t;
            c += w * phase.cos();
            s += w * phase.sin();
        }
        (c * h / 3.0, s * h / 3.0)
    }

    #[test]
    fn matches_quadrature_oracle_both_branches() {
        for &x in &[0.1, 0.5, 1.0, 2.0, 2.9, 3.0, 3.1, 3.5449, 4.0, 5.5, 8.0] {
            let (c, s) = fresnel(x);
            let (c_ref, s_ref) = fresnel_quadrature(x);
            assert!((c - c_ref).abs() < 1e-6, "C({x}) = {c}, oracle {c_ref}");
            assert!((s - s_ref).abs() < 1e-6, "S({x}) = {s}, oracle {s_ref}");
        }
    }

    #[test]
    fn branches_agree_at_crossover() {
        for &x in &[2.8, 2.95, 3.0, 3.05, 3.2] {
            let (cs, ss) = fresnel_series(x);
            let (ca, sa) = fresnel_asymptotic(x);
            assert!((cs - ca).abs() < 1e-6, "C mismatch at {x}: {cs} vs {ca}");
            assert!((ss - sa).abs() < 1e-6, "S mismatch at {x}: {ss} vs {sa}");
        }
    }

    #[test]
    fn limits_and_symmetry() {
        assert_eq!(fresnel(0.0), (0.0, 0.0));
        let (c, s) = fresnel(60.0);
        assert!((c - 0.5).abs() < 1e-2);
        assert!((s - 0.5).abs() < 1e-2);
        let (cp, sp) = fresnel(1.3);
        let (cn, sn) = fresnel(-1.3);
        assert_eq!((cn, sn), (-cp, -sp));
    }

    #[test]
    fn classic_table_values() {
        // C(1), S(1) to the usual tabulated precision
        let (c1, s1) = fresnel(1.0);
        assert!((c1 - 0.7798934).abs() < 1e-6);
        assert!((s1 - 0.4382591).abs() < 1e-6);
        let (c2, s2) = fresnel(2.0);
        assert!((c2 - 0.4882534).abs() < 1e-6);
        assert!((s2 - 0.3434157).abs() < 1e-6);
    }
}
