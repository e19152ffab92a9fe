mod common;

use holonomy_zeta::lie::{
    bracket, cartan_split, exp_cartan, iwasawa_split, rho0, root_eval, CartanParams, LieElement, RootId,
};
use proptest::prelude::*;

use common::*;

fn element() -> impl Strategy<Value = LieElement> {
    (prop::array::uniform3(-3.0..3.0f64), prop::array::uniform3(-3.0..3.0f64))
        .prop_map(|(skew, boost)| LieElement::from_blocks(skew, boost))
}

fn params() -> impl Strategy<Value = CartanParams> {
    (-7.0..7.0f64, -2.0..2.0f64).prop_map(|(b, alpha)| CartanParams::new(b, alpha))
}

proptest! {
    #[test]
    fn cartan_parts_recombine(x in element()) {
        let (k, p) = cartan_split(&x);
        prop_assert_eq!((k + p).matrix().rows(), x.matrix().rows());
        prop_assert!(k.involution().matrix().max_abs_diff(k.matrix()) < 1e-12);
        prop_assert!(p.involution().matrix().max_abs_diff(&p.matrix().scale(-1.0)) < 1e-12);
    }

    #[test]
    fn iwasawa_matches_elimination(x in element()) {
        let parts = iwasawa_split(&x);
        let sum = parts.k + parts.a_p + parts.n;
        prop_assert!(sum.matrix().max_abs_diff(x.matrix()) < 1e-12);
        // k is compact, a_p a pure e3 boost, n in the span of the nilpotent basis.
        prop_assert_eq!(parts.k.boost_coords(), [0.0; 3]);
        prop_assert_eq!(parts.a_p.skew_coords(), [0.0; 3]);
        let (na, nb) = parts.n_params;
        prop_assert_eq!(parts.n.matrix().rows(), LieElement::nilpotent(na, nb).matrix().rows());
        let oracle = iwasawa_oracle(&x.matrix().rows());
        let got = [parts.k.skew_coords()[0], parts.k.skew_coords()[1], parts.k.skew_coords()[2], parts.alpha, na, nb];
        for (g, o) in got.iter().zip(oracle) {
            prop_assert!((g - o).abs() < 1e-12, "{got:?} vs {oracle:?}");
        }
    }

    #[test]
    fn jacobi_identity(x in element(), y in element(), z in element()) {
        let sum = bracket(&x, &bracket(&y, &z)) + bracket(&y, &bracket(&z, &x)) + bracket(&z, &bracket(&x, &y));
        prop_assert!(sum.matrix().max_abs() < 1e-10);
    }

    #[test]
    fn involution_is_automorphism(x in element(), y in element()) {
        let lhs = bracket(&x, &y).involution();
        let rhs = bracket(&x.involution(), &y.involution());
        prop_assert!(lhs.matrix().max_abs_diff(rhs.matrix()) < 1e-12);
    }

    #[test]
    fn exp_is_homomorphism_on_cartan(p in params(), q in params()) {
        let lhs = exp_cartan(p) * exp_cartan(q);
        let rhs = exp_cartan(p + q);
        prop_assert!(lhs.max_abs_diff(&rhs) < 1e-10 * rhs.max_abs().max(1.0));
    }

    #[test]
    fn exp_matches_series(p in params()) {
        let series = expm_series(&LieElement::cartan(p).matrix().rows(), 60);
        let closed = exp_cartan(p).rows();
        prop_assert!(max_diff(&series, &closed) < 1e-11);
    }

    #[test]
    fn opposite_roots_cancel(p in params()) {
        let r = |i| root_eval(RootId::new(i).unwrap(), p);
        prop_assert_eq!(r(1) + r(3), 0.0);
        prop_assert_eq!(r(2) + r(4), 0.0);
    }
}

#[test]
fn rho0_is_one() {
    assert_eq!(rho0(), 1.0);
}
