mod common;

use holonomy_zeta::geodesic::{canonical_holonomy, classify, inverse_class, normal_form, power_class, PrimitiveClass, Spectrum};
use holonomy_zeta::lie::Mat4;
use proptest::prelude::*;

use common::*;

fn conjugator(skew: [f64; 3], boost: [f64; 3]) -> Mat4 {
    Mat4::from_rows(expm_series(&algebra(skew, boost), 60)).unwrap()
}

fn close_angle(x: f64, y: f64, tol: f64) -> bool {
    let d = (x - y).rem_euclid(std::f64::consts::TAU);
    d < tol || std::f64::consts::TAU - d < tol
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn classification_is_conjugation_invariant(
        a in 0.3..3.0f64,
        b in 0.0..std::f64::consts::TAU,
        skew in prop::array::uniform3(-1.5..1.5f64),
        boost in prop::array::uniform3(-0.7..0.7f64),
    ) {
        let k = conjugator(skew, boost);
        let g = k * normal_form(a, b) * k.lorentz_inverse();
        let (ga, gb) = classify(&g).unwrap();
        prop_assert!((ga - a).abs() < 1e-8, "length {ga} vs {a}");
        prop_assert!(close_angle(gb, canonical_holonomy(b), 1e-8), "holonomy {gb} vs {b}");
    }

    #[test]
    fn normal_form_reads_back(a in 0.05..4.0f64, b in 0.0..std::f64::consts::PI) {
        let (ga, gb) = classify(&normal_form(a, b)).unwrap();
        prop_assert!((ga - a).abs() < 1e-10);
        prop_assert!((gb - b).abs() < 1e-10);
    }

    #[test]
    fn inverse_element_gives_inverse_class(
        a in 0.3..3.0f64,
        b in 0.0..std::f64::consts::TAU,
        skew in prop::array::uniform3(-1.5..1.5f64),
    ) {
        let k = conjugator(skew, [0.0; 3]);
        let g = k * normal_form(a, b) * k.lorentz_inverse();
        let (ia, ib) = classify(&g.lorentz_inverse()).unwrap();
        let (ga, gb) = classify(&g).unwrap();
        let (ea, eb) = inverse_class(ga, gb).unwrap();
        prop_assert!((ia - ea).abs() < 1e-8);
        prop_assert!(close_angle(ib, canonical_holonomy(eb), 1e-8));
    }

    #[test]
    fn power_matches_matrix_power(a in 0.2..2.0f64, b in 0.0..std::f64::consts::TAU, j in 1u32..5) {
        let inv = power_class(a, b, j).unwrap();
        prop_assert_eq!(inv.length, f64::from(j) * a);
        let (ga, gb) = classify(&normal_form(a, b).powi(j)).unwrap();
        prop_assert!((ga - inv.length).abs() < 1e-8);
        prop_assert!(close_angle(gb, canonical_holonomy(inv.holonomy), 1e-8));
    }

    #[test]
    fn spectrum_is_order_independent(seed in any::<u64>()) {
        let mut r = rng(seed);
        let mut classes = random_classes(&mut r, 8, (0.5, 5.0), (0.0, std::f64::consts::TAU), 3);
        let forward = spectrum(&classes);
        classes.reverse();
        prop_assert_eq!(spectrum(&classes), forward);
    }

    #[test]
    fn inverse_is_an_involution(seed in any::<u64>()) {
        let mut r = rng(seed);
        let spec = spectrum(&random_classes(&mut r, 8, (0.5, 5.0), (0.1, 6.1), 3));
        let back = spec.inverse().inverse();
        prop_assert_eq!(back.len(), spec.len());
        for (x, y) in back.iter().zip(spec.iter()) {
            prop_assert!((x.holonomy() - y.holonomy()).abs() < 1e-12);
            prop_assert_eq!(x.length(), y.length());
        }
    }
}

#[test]
fn merged_multiplicities_add() {
    let c = PrimitiveClass::new(1.0, 0.5, 2).unwrap();
    let near = PrimitiveClass::new(1.0 + 1e-12, 0.5, 3).unwrap();
    let spec = Spectrum::new().merge(c).merge(near);
    assert_eq!(spec.len(), 1);
    assert_eq!(spec.classes()[0].multiplicity(), 5);
    assert_eq!(spec.classes()[0].length(), 1.0);
}
