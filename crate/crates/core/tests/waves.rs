use fbp_core::mc::stream_rng;
use fbp_core::waves::{self, WaveParams, SQRT2};
use fbp_core::InitialCondition;
use proptest::prelude::*;

#[test]
fn minimal_wave_values() {
    // Π_min(x) = (1 + √2 x) e^{−√2 x}.
    for x in [0.0, 0.5, 1.0, 3.0, 10.0] {
        let exact = (1.0 + SQRT2 * x) * (-SQRT2 * x).exp();
        assert!((waves::ccdf(SQRT2, x).unwrap() - exact).abs() <= 1e-14);
    }
    assert!((waves::ccdf(SQRT2, 1.0).unwrap() - 0.5869).abs() <= 1e-4);
}

#[test]
fn initial_conditions_round_trip_through_text_and_json() {
    for s in ["heaviside", "wave:1.5", "powexp:2,1,1.2", "betawave:2"] {
        let ic: InitialCondition = s.parse().unwrap();
        let again: InitialCondition = ic.to_string().parse().unwrap();
        assert_eq!(ic, again);
        let json = serde_json::to_string(&ic).unwrap();
        assert_eq!(ic, serde_json::from_str::<InitialCondition>(&json).unwrap());
    }
    assert!("wave:1.0".parse::<InitialCondition>().is_err());
    assert!("nope".parse::<InitialCondition>().is_err());
}

#[test]
fn sampler_mean_matches_the_profile() {
    // E[X] = L₀ + ∫_{L₀}^∞ U₀.
    let mut rng = stream_rng(1, 0);
    for ic in [InitialCondition::min_wave(), InitialCondition::Wave { c: 2.0 }] {
        let s = ic.sampler().unwrap();
        let n = 200_000;
        let mean = (0..n).map(|_| s.sample(&mut rng)).sum::<f64>() / n as f64;
        let h = 1e-3;
        let integral: f64 = (0..40_000).map(|i| ic.eval((i as f64 + 0.5) * h) * h).sum();
        assert!((mean - ic.l0() - integral).abs() <= 0.01, "{ic}: {mean} vs {integral}");
    }
}

proptest! {
    #[test]
    fn wave_profile_solves_the_travelling_ode(c in 1.42f64..4.0, x in 0.1f64..8.0) {
        // ½Π'' + cΠ' + Π = 0 right of the front.
        let p = WaveParams::new(c).unwrap();
        let h = 1e-4;
        let (a, b, m) = (p.ccdf(x - h), p.ccdf(x + h), p.ccdf(x));
        let res = 0.5 * (a - 2.0 * m + b) / (h * h) + c * (b - a) / (2.0 * h) + m;
        prop_assert!(res.abs() <= 1e-5, "{res}");
    }

    #[test]
    fn density_is_minus_the_ccdf_slope(c in 1.42f64..4.0, x in 0.05f64..10.0) {
        let p = WaveParams::new(c).unwrap();
        let h = 1e-5;
        let slope = (p.ccdf(x + h) - p.ccdf(x - h)) / (2.0 * h);
        prop_assert!((p.density(x) + slope).abs() <= 1e-7);
        prop_assert!((0.0..=1.0).contains(&p.ccdf(x)) && p.ccdf(x + 0.1) <= p.ccdf(x));
    }

    #[test]
    fn initial_conditions_are_admissible(a in 0.5f64..4.0, nu in -2.0f64..2.0, lam in 0.3f64..3.0) {
        let ic = InitialCondition::PowerExpTail { a, nu, lam };
        let l0 = ic.l0();
        prop_assert_eq!(ic.eval(l0 - 1.0), 1.0);
        let xs: Vec<f64> = (0..100).map(|i| l0 + 0.1 * i as f64).collect();
        let us: Vec<f64> = xs.iter().map(|&x| ic.eval(x)).collect();
        prop_assert!(us.windows(2).all(|w| w[1] <= w[0]));
        prop_assert!(us.iter().all(|u| (0.0..=1.0).contains(u)));
    }
}
