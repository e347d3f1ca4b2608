//! Property-based checks of the geometric and algebraic primitives.

use num_complex::Complex64 as C64;
use proptest::prelude::*;

use npext::domains::{in_diamond, in_g2, pi_map, quadratic_roots};
use npext::schur::{operator_moebius, spectral_norm, CMatrix, MagicFunction, MoebiusMap};

prop_compose! {
    fn disc()(r in 0.0..0.999f64, t in 0.0..std::f64::consts::TAU) -> C64 {
        C64::from_polar(r, t)
    }
}

prop_compose! {
    fn circle()(t in 0.0..std::f64::consts::TAU) -> C64 {
        C64::from_polar(1.0, t)
    }
}

proptest! {
    /// The symmetrization map lands in G2, and the quadratic roots invert it
    /// as an unordered pair.
    #[test]
    fn pi_map_lands_in_g2_and_inverts(z1 in disc(), z2 in disc()) {
        let (s, p) = pi_map(z1, z2);
        prop_assert!(in_g2(s, p));
        let (r1, r2) = quadratic_roots(s, p);
        let direct = (r1 - z1).norm() + (r2 - z2).norm();
        let swapped = (r1 - z2).norm() + (r2 - z1).norm();
        prop_assert!(direct.min(swapped) < 1e-7);
    }

    /// Magic functions are Schur functions of G2.
    #[test]
    fn magic_functions_are_contractive(z1 in disc(), z2 in disc(), omega in circle()) {
        let (s, p) = pi_map(z1, z2);
        let phi = MagicFunction::new(omega).unwrap();
        prop_assert!(phi.eval(s, p).unwrap().norm() < 1.0);
    }

    /// Scalar Möbius maps are involutive on the disc.
    #[test]
    fn moebius_is_involutive(b in disc(), lam in disc()) {
        let m = MoebiusMap::new(b).unwrap();
        prop_assert!((m.eval(m.eval(lam)) - lam).norm() < 1e-10);
    }

    /// The operator Möbius map is involutive on strict matrix contractions.
    #[test]
    fn operator_moebius_is_involutive(
        entries in prop::collection::vec((-0.4..0.4f64, -0.4..0.4f64), 4),
        b in disc(),
    ) {
        let x = CMatrix::from_fn(2, 2, |i, j| {
            let (re, im) = entries[2 * i + j];
            C64::new(re, im)
        });
        let w = CMatrix::from_fn(2, 2, |i, j| {
            if i == j { 0.5 * b } else { C64::new(0.0, 0.0) }
        });
        let once = operator_moebius(&w, &x).unwrap();
        prop_assert!(spectral_norm(&once) < 1.0 + 1e-12);
        let twice = operator_moebius(&w, &once).unwrap();
        prop_assert!(spectral_norm(&(twice - x)) < 1e-10);
    }

    /// Diamond membership is symmetric and scales monotonically.
    #[test]
    fn diamond_membership_properties(z1 in disc(), z2 in disc(), t in 0.0..1.0f64) {
        let inside = in_diamond(0.5 * z1, 0.49 * z2);
        prop_assert_eq!(inside, in_diamond(0.49 * z2, 0.5 * z1));
        if inside {
            prop_assert!(in_diamond(t * 0.5 * z1, t * 0.49 * z2));
        }
    }
}
