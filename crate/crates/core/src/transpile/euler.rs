//! ZYZ Euler angles of single-qubit unitaries and their `{Rz, SX, X}` form.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;

use crate::gates::{matrix_of, Gate, GateKind};

pub type Mat2 = [[Complex64; 2]; 2];

pub const ANGLE_EPS: f64 = 1e-12;
const SPECIAL_EPS: f64 = 1e-10;

pub fn identity2() -> Mat2 {
    let o = Complex64::new(1.0, 0.0);
    let z = Complex64::new(0.0, 0.0);
    [[o, z], [z, o]]
}

/// `a * b` (apply `b` first).
pub fn mul2(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut r = [[Complex64::new(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            r[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    r
}

pub fn mat2_of(kind: &GateKind) -> Mat2 {
    let m = matrix_of(&Gate { kind: *kind, qubits: vec![0] });
    [[m[(0, 0)], m[(0, 1)]], [m[(1, 0)], m[(1, 1)]]]
}

/// Wraps into `(-π, π]`.
pub fn wrap_angle(a: f64) -> f64 {
    let mut r = a.rem_euclid(2.0 * PI);
    if r > PI {
        r -= 2.0 * PI;
    }
    r
}

/// `(θ, φ, λ)` with `U = e^{iα} Rz(φ) Ry(θ) Rz(λ)` and `θ ∈ [0, π]`.
pub fn zyz_angles(u: &Mat2) -> (f64, f64, f64) {
    let c = u[0][0].norm();
    let s = u[1][0].norm();
    let theta = 2.0 * s.atan2(c);
    if s < SPECIAL_EPS {
        (0.0, 0.0, wrap_angle(u[1][1].arg() - u[0][0].arg()))
    } else if c < SPECIAL_EPS {
        (PI, wrap_angle(u[1][0].arg() - (-u[0][1]).arg()), 0.0)
    } else {
        let phi = u[1][0].arg() - u[0][0].arg();
        let lambda = u[1][1].arg() - u[1][0].arg();
        (theta, wrap_angle(phi), wrap_angle(lambda))
    }
}

fn push_rz(out: &mut Vec<GateKind>, a: f64) {
    let a = wrap_angle(a);
    if a.abs() > ANGLE_EPS {
        out.push(GateKind::Rz(a));
    }
}

/// Basis-gate sequence, in time order, equal to `u` up to global phase.
pub fn basis_sequence(u: &Mat2) -> Vec<GateKind> {
    let (theta, phi, lambda) = zyz_angles(u);
    let mut out = Vec::new();
    if theta.abs() < SPECIAL_EPS {
        push_rz(&mut out, phi + lambda);
    } else if (theta - PI).abs() < SPECIAL_EPS {
        out.push(GateKind::X);
        push_rz(&mut out, phi - lambda - PI);
    } else if (theta - FRAC_PI_2).abs() < SPECIAL_EPS {
        push_rz(&mut out, lambda - FRAC_PI_2);
        out.push(GateKind::SX);
        push_rz(&mut out, phi + FRAC_PI_2);
    } else {
        push_rz(&mut out, lambda);
        out.push(GateKind::SX);
        push_rz(&mut out, theta + PI);
        out.push(GateKind::SX);
        push_rz(&mut out, phi + PI);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn product(seq: &[GateKind]) -> Mat2 {
        seq.iter().fold(identity2(), |acc, k| mul2(&mat2_of(k), &acc))
    }

    fn phase_distance(a: &Mat2, b: &Mat2) -> f64 {
        let (mut i, mut j) = (0, 0);
        for r in 0..2 {
            for c in 0..2 {
                if b[r][c].norm() > b[i][j].norm() {
                    (i, j) = (r, c);
                }
            }
        }
        let ph = a[i][j] / b[i][j];
        let ph = ph / ph.norm();
        let mut d: f64 = 0.0;
        for r in 0..2 {
            for c in 0..2 {
                d = d.max((a[r][c] - ph * b[r][c]).norm());
            }
        }
        d
    }

    #[test]
    fn hadamard_is_three_gates() {
        let seq = basis_sequence(&mat2_of(&GateKind::H));
        assert_eq!(seq.len(), 3);
        assert!(phase_distance(&product(&seq), &mat2_of(&GateKind::H)) < 1e-12);
    }

    #[test]
    fn named_gates_round_trip() {
        use GateKind::*;
        for k in [H, X, Y, Z, S, Sdg, T, Tdg, SX, SXdg, Rz(0.3), Ry(1.1), Ry(-2.0)] {
            let u = mat2_of(&k);
            let seq = basis_sequence(&u);
            assert!(phase_distance(&product(&seq), &u) < 1e-10, "{k:?} -> {seq:?}");
            assert!(seq.iter().all(|g| matches!(g, Rz(_) | SX | X)));
        }
        assert!(basis_sequence(&identity2()).is_empty());
        assert_eq!(basis_sequence(&mat2_of(&X)), vec![X]);
    }

    proptest! {
        #[test]
        fn random_products_round_trip(a in -4.0f64..4.0, b in -4.0f64..4.0, c in -4.0f64..4.0) {
            let u = product(&[GateKind::Rz(a), GateKind::Ry(b), GateKind::Rz(c), GateKind::H]);
            let seq = basis_sequence(&u);
            prop_assert!(phase_distance(&product(&seq), &u) < 1e-9);
            prop_assert!(seq.len() <= 5);
        }
    }
}
