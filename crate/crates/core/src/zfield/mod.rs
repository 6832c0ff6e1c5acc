//! Exact calculus for the rotation fields
//!
//! ```text
//! Z1 = x1 d2 - x2 d1,   Z2 = x2 d3 - x3 d2,   Z3 = x3 d1 - x1 d3,
//! ```
//!
//! which are tangent to spheres and split angular from radial derivatives.
//! All identities are verified on polynomials with exact rational
//! arithmetic: a check returns a residual polynomial whose structural
//! vanishing is the pass condition, never a floating-point tolerance.
//!
//! Identities with `1/r` or `1/r^2` factors are verified in `r^2`-cleared
//! form (multiply through by `r^2 = x1^2 + x2^2 + x3^2`), which is
//! equivalent on polynomials and keeps everything inside the ring.

mod poly;

pub use poly::{Exponents, Poly3};

/// `Z_i f` for `axis` in `1..=3`.
pub fn apply_z(axis: usize, f: &Poly3) -> Poly3 {
    let (p, q) = match axis {
        1 => (1, 2),
        2 => (2, 3),
        3 => (3, 1),
        _ => panic!("axis must be 1, 2, or 3, got {axis}"),
    };
    // Z = x_p d_q - x_q d_p
    &f.diff(q).mul_var(p) - &f.diff(p).mul_var(q)
}

/// `[Z_i, Z_j] f = Z_i Z_j f - Z_j Z_i f`.
///
/// The bracket closes on the rotation algebra cyclically with a minus sign
/// in this orientation: `[Z_1, Z_2] = -Z_3`, `[Z_2, Z_3] = -Z_1`,
/// `[Z_3, Z_1] = -Z_2`.
pub fn commutator(i: usize, j: usize, f: &Poly3) -> Poly3 {
    &apply_z(i, &apply_z(j, f)) - &apply_z(j, &apply_z(i, f))
}

/// Scaling field `S1 f = sum_i x_i d_i f` (this is `r d_r` on polynomials).
pub fn scaling(f: &Poly3) -> Poly3 {
    let mut acc = Poly3::zero();
    for axis in 1..=3 {
        acc = &acc + &f.diff(axis).mul_var(axis);
    }
    acc
}

/// `Delta f = sum_i d_i^2 f`.
pub fn laplacian(f: &Poly3) -> Poly3 {
    let mut acc = Poly3::zero();
    for axis in 1..=3 {
        acc = &acc + &f.diff(axis).diff(axis);
    }
    acc
}

/// `grad f . grad g`.
pub fn gradient_dot(f: &Poly3, g: &Poly3) -> Poly3 {
    let mut acc = Poly3::zero();
    for axis in 1..=3 {
        acc = &acc + &(&f.diff(axis) * &g.diff(axis));
    }
    acc
}

/// Residual of `r^2 grad f . grad g = (S1 f)(S1 g) + sum_i Z_i f Z_i g`,
/// the cleared form of the radial/angular gradient decomposition.
pub fn radial_identity_residual(f: &Poly3, g: &Poly3) -> Poly3 {
    let lhs = &Poly3::r_squared() * &gradient_dot(f, g);
    let mut rhs = &scaling(f) * &scaling(g);
    for axis in 1..=3 {
        rhs = &rhs + &(&apply_z(axis, f) * &apply_z(axis, g));
    }
    &lhs - &rhs
}

/// Residual of `r^2 Delta f = S1^2 f + S1 f + sum_i Z_i^2 f`.
pub fn laplacian_decomposition_residual(f: &Poly3) -> Poly3 {
    let lhs = &Poly3::r_squared() * &laplacian(f);
    let s1 = scaling(f);
    let mut rhs = &scaling(&s1) + &s1;
    for axis in 1..=3 {
        rhs = &rhs + &apply_z(axis, &apply_z(axis, f));
    }
    &lhs - &rhs
}

/// Residuals of the cleared Cartesian-recovery identities
///
/// ```text
/// r^2 d1 f = x1 S1 f - x2 Z1 f + x3 Z3 f
/// r^2 d2 f = x2 S1 f - x3 Z2 f + x1 Z1 f
/// r^2 d3 f = x3 S1 f - x1 Z3 f + x2 Z2 f
/// ```
///
/// (Each Cartesian derivative splits into its radial part and the two
/// rotations whose planes contain that axis.)
pub fn cartesian_recovery_residuals(f: &Poly3) -> [Poly3; 3] {
    let r2 = Poly3::r_squared();
    let s1 = scaling(f);
    let z = [apply_z(1, f), apply_z(2, f), apply_z(3, f)];
    std::array::from_fn(|axis0| {
        let axis = axis0 + 1;
        let lhs = &r2 * &f.diff(axis);
        let rhs = &(&s1.mul_var(axis) - &z[axis - 1].mul_var(cyclic_next(axis)))
            + &z[cyclic_prev(axis) - 1].mul_var(cyclic_prev(axis));
        &lhs - &rhs
    })
}

fn cyclic_next(axis: usize) -> usize {
    axis % 3 + 1
}

fn cyclic_prev(axis: usize) -> usize {
    (axis + 1) % 3 + 1
}

/// Residual of `[Z_i, Delta] f = Z_i Delta f - Delta Z_i f`.
pub fn laplacian_commutator_residual(axis: usize, f: &Poly3) -> Poly3 {
    &apply_z(axis, &laplacian(f)) - &laplacian(&apply_z(axis, f))
}

/// Residual of `[Z_i, S1] f = 0`, the cleared form of the statement that
/// rotations commute with the radial derivative.
pub fn scaling_commutator_residual(axis: usize, f: &Poly3) -> Poly3 {
    &apply_z(axis, &scaling(f)) - &scaling(&apply_z(axis, f))
}

/// Largest sampled value of `|Z_i f| / (r |grad f|)` over the given points,
/// with `0/0` counted as 0. The pointwise bound `|Z f| <= r |grad f|` makes
/// the contract `<= 1` up to rounding.
pub fn zbound_max_ratio(f: &Poly3, points: &[[f64; 3]]) -> f64 {
    let grads = [f.diff(1), f.diff(2), f.diff(3)];
    let zs = [apply_z(1, f), apply_z(2, f), apply_z(3, f)];
    let mut worst: f64 = 0.0;
    for &x in points {
        let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
        if r == 0.0 {
            continue;
        }
        let grad_norm = grads
            .iter()
            .map(|g| {
                let v = g.eval_f64(x);
                v * v
            })
            .sum::<f64>()
            .sqrt();
        for z in &zs {
            let zv = z.eval_f64(x).abs();
            let denom = r * grad_norm;
            let ratio = if zv == 0.0 { 0.0 } else { zv / denom };
            worst = worst.max(ratio);
        }
    }
    worst
}
