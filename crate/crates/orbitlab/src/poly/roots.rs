//! Simultaneous complex root finding (Aberth-Ehrlich) with Newton polish.
//!
//! Deterministic: fixed initial ring, fixed iteration order, fixed
//! stopping rule, so identical coefficients give identical roots bitwise.

use num_complex::Complex64;

use crate::poly::Poly;

fn eval_complex(coeffs: &[f64], z: Complex64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for &c in coeffs.iter().rev() {
        acc = acc * z + c;
    }
    acc
}

fn eval_derivative_complex(coeffs: &[f64], z: Complex64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for (i, &c) in coeffs.iter().enumerate().skip(1).rev() {
        acc = acc * z + c * i as f64;
    }
    acc
}

/// All complex roots of `p` (degree >= 1). Leading coefficient must be
/// nonzero; callers strip near-degenerate leading terms first.
pub fn all_roots(p: &Poly) -> Vec<Complex64> {
    let deg = p.degree();
    assert!(deg >= 1 && p.coeffs[deg] != 0.0);
    if deg == 1 {
        return vec![Complex64::new(-p.coeffs[0] / p.coeffs[1], 0.0)];
    }

    // Fujiwara root bound for the initial ring radius; tighter than the
    // Cauchy bound when low-order coefficients dominate.
    let lead = p.coeffs[deg].abs();
    let radius = (0..deg)
        .map(|i| {
            let k = (deg - i) as f64;
            (p.coeffs[i].abs() / lead).powf(1.0 / k)
        })
        .fold(0.0f64, f64::max)
        .max(1e-3)
        .min(1e150)
        * 2.0;

    let mut zs: Vec<Complex64> = (0..deg)
        .map(|i| {
            // Slight irrational offset avoids symmetric stalls.
            let theta = 2.0 * std::f64::consts::PI * (i as f64 + 0.354) / deg as f64;
            Complex64::from_polar(radius * 0.8, theta)
        })
        .collect();

    let max_sweeps = 200;
    for _ in 0..max_sweeps {
        let mut max_step = 0.0f64;
        for i in 0..deg {
            let z = zs[i];
            let pv = eval_complex(&p.coeffs, z);
            let dv = eval_derivative_complex(&p.coeffs, z);
            if pv.norm() == 0.0 {
                continue;
            }
            let newton = if dv.norm() > 0.0 {
                pv / dv
            } else {
                Complex64::new(1e-12, 1e-12)
            };
            let mut repulsion = Complex64::new(0.0, 0.0);
            for (j, &zj) in zs.iter().enumerate() {
                if j != i {
                    let diff = z - zj;
                    if diff.norm() > 1e-300 {
                        repulsion += diff.inv();
                    }
                }
            }
            let denom = Complex64::new(1.0, 0.0) - newton * repulsion;
            let step = if denom.norm() > 1e-300 {
                newton / denom
            } else {
                newton
            };
            if !step.re.is_finite() || !step.im.is_finite() {
                // Kick the point rather than poisoning the cloud.
                zs[i] = z * 0.5 + Complex64::new(0.013, 0.017);
                max_step = 1.0;
                continue;
            }
            zs[i] = z - step;
            let rel = step.norm() / (1.0 + zs[i].norm());
            if rel > max_step {
                max_step = rel;
            }
        }
        if max_step < 1e-14 {
            break;
        }
    }

    // Newton polish, a few steps each.
    for z in zs.iter_mut() {
        for _ in 0..3 {
            let pv = eval_complex(&p.coeffs, *z);
            let dv = eval_derivative_complex(&p.coeffs, *z);
            if dv.norm() == 0.0 {
                break;
            }
            let step = pv / dv;
            if !step.re.is_finite() || !step.im.is_finite() {
                break;
            }
            *z -= step;
        }
    }

    // Deterministic output order.
    zs.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    zs
}

/// Real roots of `p`, deduplicated, from the complex solver: roots whose
/// imaginary part is below `im_tol` relative to scale.
pub fn real_roots(p: &Poly, im_tol: f64) -> Vec<f64> {
    let mut out: Vec<f64> = all_roots(p)
        .into_iter()
        .filter(|z| z.im.abs() <= im_tol * (1.0 + z.re.abs()))
        .map(|z| z.re)
        .collect();
    out.sort_by(|a, b| a.partial_cmp(b).unwrap());
    out
}
