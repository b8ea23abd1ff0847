// SPDX-License-Identifier: Apache-2.0

//! Proximal operators and the ball projection used by the inner solver.

use nalgebra::DVector;

#[inline]
pub(crate) fn soft_scalar(v: f64, t: f64) -> f64 {
    if v > t {
        v - t
    } else if v < -t {
        v + t
    } else {
        0.0
    }
}

/// Prox of `t‖·‖₁`: elementwise `sign(v)·max(|v| − t, 0)`.
pub fn soft_threshold(v: &DVector<f64>, t: f64) -> DVector<f64> {
    assert!(t >= 0.0, "threshold must be non-negative");
    v.map(|x| soft_scalar(x, t))
}

/// Prox of `t‖·‖₂`: `max(0, 1 − t/‖v‖)·v`.
pub fn block_shrink(v: &DVector<f64>, t: f64) -> DVector<f64> {
    assert!(t >= 0.0, "threshold must be non-negative");
    let mut out = v.clone();
    block_shrink_in_place(out.as_mut_slice(), t);
    out
}

pub(crate) fn block_shrink_in_place(v: &mut [f64], t: f64) {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let scale = if norm <= t { 0.0 } else { 1.0 - t / norm };
    v.iter_mut().for_each(|x| *x *= scale);
}

/// Euclidean projection of `t` onto `{z : ‖z − center‖ ≤ radius}`.
pub fn project_ball(t: &DVector<f64>, center: &DVector<f64>, radius: f64) -> DVector<f64> {
    assert!(radius >= 0.0, "radius must be non-negative");
    let mut out = t.clone();
    project_ball_in_place(out.as_mut_slice(), center.as_slice(), radius);
    out
}

pub(crate) fn project_ball_in_place(t: &mut [f64], center: &[f64], radius: f64) {
    let dist = t
        .iter()
        .zip(center)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    if dist == 0.0 || dist <= radius {
        return;
    }
    let scale = radius / dist;
    for (a, &c) in t.iter_mut().zip(center) {
        *a = c + (*a - c) * scale;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn v(x: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(x)
    }

    #[test]
    fn soft_threshold_definition() {
        assert_eq!(soft_threshold(&v(&[3.0, -1.0, 0.5]), 1.0), v(&[2.0, 0.0, 0.0]));
        let x = v(&[1.5, -2.0, 0.0]);
        assert_eq!(soft_threshold(&x, 0.0), x);
    }

    #[test]
    fn block_shrink_scaling_and_zero_region() {
        let x = v(&[0.0, 2.0]);
        assert_eq!(block_shrink(&x, 1.0), v(&[0.0, 1.0]));
        assert_eq!(block_shrink(&v(&[0.3, 0.4]), 0.5), v(&[0.0, 0.0]));
        assert_eq!(block_shrink(&v(&[0.3, 0.4]), 2.0), v(&[0.0, 0.0]));
    }

    #[test]
    fn ball_projection_cases() {
        let y = v(&[1.0, 1.0]);
        let inside = v(&[1.2, 0.9]);
        assert_eq!(project_ball(&inside, &y, 1.0), inside);
        assert_eq!(project_ball(&v(&[5.0, -3.0]), &y, 0.0), y);
        let out = project_ball(&v(&[4.0, 5.0]), &y, 2.5);
        assert!(((&out - &y).norm() - 2.5).abs() < 1e-14);
        assert_eq!(project_ball(&y, &y, 0.0), y);
    }

    // Grid search over the scalar objective t|z| + ½(z − v)².
    fn grid_argmin(f: impl Fn(f64) -> f64, lo: f64, hi: f64, steps: usize) -> f64 {
        (0..=steps)
            .map(|i| lo + (hi - lo) * i as f64 / steps as f64)
            .min_by(|a, b| f(*a).total_cmp(&f(*b)))
            .unwrap()
    }

    proptest! {
        #[test]
        fn soft_threshold_minimizes_prox_objective(val in -5.0f64..5.0, t in 0.0f64..3.0) {
            let z = soft_threshold(&v(&[val]), t)[0];
            let obj = |z: f64| t * z.abs() + 0.5 * (z - val).powi(2);
            let g = grid_argmin(obj, -6.0, 6.0, 120_000);
            prop_assert!(obj(z) <= obj(g) + 1e-12);
            prop_assert!((z - g).abs() <= 2e-4);
        }

        #[test]
        fn block_shrink_minimizes_prox_objective(
            a in -3.0f64..3.0, b in -3.0f64..3.0, t in 0.0f64..4.0
        ) {
            let x = v(&[a, b]);
            let z = block_shrink(&x, t);
            let norm = x.norm();
            prop_assume!(norm > 1e-9);
            // The minimizer lies on the ray through x; search the radial coordinate.
            let obj = |r: f64| t * r + 0.5 * (r - norm).powi(2);
            let g = grid_argmin(obj, 0.0, norm, 100_000);
            prop_assert!(obj(z.norm()) <= obj(g) + 1e-12);
            prop_assert!((z.norm() - g).abs() <= 1e-4);
        }

        #[test]
        fn ball_projection_distance_is_min_of_radius_and_distance(
            a in -5.0f64..5.0, b in -5.0f64..5.0, r in 0.0f64..4.0
        ) {
            let c = v(&[0.5, -0.25]);
            let t = v(&[a, b]);
            let out = project_ball(&t, &c, r);
            let expected = (&t - &c).norm().min(r);
            prop_assert!(((&out - &c).norm() - expected).abs() <= 1e-12);
        }
    }
}
