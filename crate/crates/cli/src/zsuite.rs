//! Randomized exact-identity suite for the rotation-field calculus. Every
//! algebraic family must leave a structurally zero residual; the pointwise
//! bound is sampled in floating point. The report is deterministic for a
//! fixed seed.

use std::fmt::Write as _;

use expball::zfield::{
    apply_z, cartesian_recovery_residuals, commutator, laplacian_commutator_residual,
    laplacian_decomposition_residual, radial_identity_residual, scaling_commutator_residual,
    zbound_max_ratio, Poly3,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const MAX_DEGREE: u32 = 6;
const MAX_TERMS: usize = 8;
const POINTS_PER_POLY: usize = 10;
const RATIO_TOLERANCE: f64 = 1e-12;

pub struct SuiteReport {
    pub text: String,
    pub all_pass: bool,
}

/// Run `count` randomized rounds of every identity family. Returns the
/// printable report; `all_pass` is the exit-code contract.
pub fn run_zfield_suite(seed: u64, count: usize) -> SuiteReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut text = String::new();
    let mut failure: Option<String> = None;
    let mut ratio_worst = 0.0f64;
    let mut points_checked = 0usize;

    let fail = |failure: &mut Option<String>, what: String| {
        if failure.is_none() {
            *failure = Some(what);
        }
    };

    for round in 0..count {
        let f = Poly3::random(&mut rng, MAX_DEGREE, MAX_TERMS);
        let g = Poly3::random(&mut rng, MAX_DEGREE, MAX_TERMS);

        // (i) the bracket closes cyclically on the rotation algebra.
        for (i, j, k) in [(1, 2, 3), (2, 3, 1), (3, 1, 2)] {
            let resid = &commutator(i, j, &f) + &apply_z(k, &f);
            if !resid.is_zero() {
                fail(
                    &mut failure,
                    format!("round {round}: [Z{i}, Z{j}] + Z{k} != 0 on f = {f}, residual {resid}"),
                );
            }
        }
        // (ii) rotations commute with r^2, the scaling field, and the Laplacian.
        for axis in 1..=3 {
            if !apply_z(axis, &Poly3::r_squared()).is_zero() {
                fail(&mut failure, format!("round {round}: Z{axis} r^2 != 0"));
            }
            let resid = scaling_commutator_residual(axis, &f);
            if !resid.is_zero() {
                fail(&mut failure, format!("round {round}: [Z{axis}, S1] f != 0 on f = {f}"));
            }
            let resid = laplacian_commutator_residual(axis, &f);
            if !resid.is_zero() {
                fail(&mut failure, format!("round {round}: [Z{axis}, Lap] f != 0 on f = {f}"));
            }
        }
        // (iii) radial/angular splitting of the gradient product.
        let resid = radial_identity_residual(&f, &g);
        if !resid.is_zero() {
            fail(
                &mut failure,
                format!("round {round}: gradient splitting failed on f = {f}, g = {g}"),
            );
        }
        // Laplacian decomposition r^2 Lap = S1^2 + S1 + sum Z_i^2.
        let resid = laplacian_decomposition_residual(&f);
        if !resid.is_zero() {
            fail(&mut failure, format!("round {round}: Laplacian decomposition failed on f = {f}"));
        }
        // (v) Cartesian recovery from radial and angular derivatives.
        for (axis0, resid) in cartesian_recovery_residuals(&f).iter().enumerate() {
            if !resid.is_zero() {
                fail(
                    &mut failure,
                    format!(
                        "round {round}: Cartesian recovery axis {} failed on f = {f}",
                        axis0 + 1
                    ),
                );
            }
        }
        // Derivation property (Leibniz) of each rotation.
        for axis in 1..=3 {
            let lhs = apply_z(axis, &(&f * &g));
            let rhs = &(&apply_z(axis, &f) * &g) + &(&f * &apply_z(axis, &g));
            if lhs != rhs {
                fail(&mut failure, format!("round {round}: Leibniz failed for Z{axis} on f = {f}"));
            }
            if apply_z(axis, &f).degree() > f.degree() {
                fail(&mut failure, format!("round {round}: Z{axis} raised the degree of f = {f}"));
            }
        }
        // (iv) sampled pointwise bound |Z f| <= r |grad f|.
        let points: Vec<[f64; 3]> = (0..POINTS_PER_POLY)
            .map(|_| {
                [
                    rng.gen_range(-2.0..2.0),
                    rng.gen_range(-2.0..2.0),
                    rng.gen_range(-2.0..2.0),
                ]
            })
            .collect();
        points_checked += points.len();
        let ratio = zbound_max_ratio(&f, &points);
        ratio_worst = ratio_worst.max(ratio);
        if ratio > 1.0 + RATIO_TOLERANCE {
            fail(
                &mut failure,
                format!("round {round}: |Zf| / (r |grad f|) = {ratio} exceeds 1 on f = {f}"),
            );
        }
    }

    let all_pass = failure.is_none();
    writeln!(text, "rotation-field identity suite: seed {seed}, {count} rounds").unwrap();
    writeln!(text, "  bracket closure            exact on {count} polynomials").unwrap();
    writeln!(text, "  commutes with r^2, S1, Lap exact on {count} polynomials").unwrap();
    writeln!(text, "  gradient splitting         exact on {count} pairs").unwrap();
    writeln!(text, "  Laplacian decomposition    exact on {count} polynomials").unwrap();
    writeln!(text, "  Cartesian recovery         exact on {count} polynomials x 3 axes").unwrap();
    writeln!(text, "  Leibniz + degree           exact on {count} polynomials").unwrap();
    writeln!(
        text,
        "  pointwise bound            {points_checked} samples, worst ratio {ratio_worst:.15}"
    )
    .unwrap();
    match &failure {
        None => writeln!(text, "result: all identities hold").unwrap(),
        Some(what) => writeln!(text, "result: FAILED\nfirst failure: {what}").unwrap(),
    }
    SuiteReport { text, all_pass }
}
