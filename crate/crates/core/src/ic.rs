//! Admissible initial conditions `U₀`: càdlàg, non-increasing, equal to 1 far
//! left and tending to 0 far right. The same type doubles as `V₀` for the
//! β-problem.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, Exp, Gamma};
use serde::{Deserialize, Serialize};

use crate::error::{FbpError, Result};
use crate::waves::{self, WaveParams, SQRT2};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialCondition {
    /// `1_{x < 0}`.
    Heaviside,
    /// `min(1, A x^ν e^{-λx})` right of the contact point `x*`, 1 left of it.
    PowerExpTail { a: f64, nu: f64, lam: f64 },
    /// Travelling wave `Π_c`.
    Wave { c: f64 },
    /// Minimal non-negative β-wave `Π^{(β)}_min`.
    BetaWave { beta: f64 },
    /// Piecewise-linear table; 1 left of `xs[0]`, 0 right of the last node.
    Tabulated { xs: Vec<f64>, us: Vec<f64> },
}

/// Tail behaviour `U₀(x) ≍ x^power e^{-rate·x}`. `rate = ∞` for compact support.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TailClass {
    pub rate: f64,
    pub power: f64,
}

impl TailClass {
    /// Whether `∫^∞ x^k e^{r x} U₀(x) dx` converges.
    pub fn moment_finite(&self, r: f64, k: f64) -> bool {
        if r < self.rate {
            true
        } else if r > self.rate {
            false
        } else {
            self.power + k < -1.0
        }
    }
}

impl InitialCondition {
    pub fn heaviside() -> Self {
        InitialCondition::Heaviside
    }

    pub fn min_wave() -> Self {
        InitialCondition::Wave { c: SQRT2 }
    }

    pub fn validate(&self) -> Result<()> {
        let mut errs = Vec::new();
        match self {
            InitialCondition::Heaviside => {}
            InitialCondition::PowerExpTail { a, nu, lam } => {
                if !(*a > 0.0 && a.is_finite()) {
                    errs.push(format!("powexp amplitude A = {a} must be positive"));
                }
                if !nu.is_finite() {
                    errs.push(format!("powexp exponent ν = {nu} must be finite"));
                }
                if !(*lam > 0.0 && lam.is_finite()) {
                    errs.push(format!("powexp rate λ = {lam} must be positive"));
                }
            }
            InitialCondition::Wave { c } => {
                if !(c.is_finite() && *c >= SQRT2 - waves::DEGENERATE_TOL) {
                    errs.push(format!("wave speed c = {c} must be ≥ √2"));
                }
            }
            InitialCondition::BetaWave { beta } => {
                if !(beta.is_finite() && *beta > 0.0) {
                    errs.push(format!("beta = {beta} must be positive"));
                }
            }
            InitialCondition::Tabulated { xs, us } => {
                if xs.len() != us.len() {
                    errs.push(format!("tabulated xs ({}) and us ({}) differ in length", xs.len(), us.len()));
                }
                if xs.len() < 2 {
                    errs.push("tabulated IC needs at least two nodes".into());
                }
                if xs.windows(2).any(|w| !(w[1] > w[0])) || xs.iter().any(|x| !x.is_finite()) {
                    errs.push("tabulated xs must be finite and strictly increasing".into());
                }
                if us.iter().any(|u| !(0.0..=1.0).contains(u)) {
                    errs.push("tabulated us must lie in [0, 1]".into());
                }
                if us.windows(2).any(|w| w[1] > w[0]) {
                    errs.push("tabulated us must be non-increasing".into());
                }
                if us.first().is_some_and(|&u| u < 1.0) {
                    errs.push("tabulated us[0] must equal 1 (L₀ = −∞ is not supported)".into());
                }
            }
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(FbpError::Validation(errs))
        }
    }

    /// `U₀(x)`.
    pub fn eval(&self, x: f64) -> f64 {
        self.weighted(x, 0.0)
    }

    /// `e^{r x} U₀(x)`, evaluated without intermediate overflow.
    pub fn weighted(&self, x: f64, r: f64) -> f64 {
        match self {
            InitialCondition::Heaviside => {
                if x < 0.0 {
                    (r * x).exp()
                } else {
                    0.0
                }
            }
            InitialCondition::PowerExpTail { a, nu, lam } => {
                let xs = powexp_contact(*a, *nu, *lam);
                if x <= xs {
                    (r * x).exp()
                } else {
                    (a.ln() + nu * x.ln() + (r - lam) * x).exp()
                }
            }
            InitialCondition::Wave { c } => wave_weighted(*c, None, x, r),
            InitialCondition::BetaWave { beta } => {
                let c = waves::c_beta_min(*beta).unwrap_or(f64::NAN);
                wave_weighted(c, Some(*beta), x, r)
            }
            InitialCondition::Tabulated { xs, us } => (r * x).exp() * table_eval(xs, us, x),
        }
    }

    /// `L₀ = sup{x : U₀(x) = 1}`.
    pub fn l0(&self) -> f64 {
        match self {
            InitialCondition::PowerExpTail { a, nu, lam } => powexp_contact(*a, *nu, *lam),
            InitialCondition::Tabulated { xs, us } => {
                let mut l = xs[0];
                for (x, u) in xs.iter().zip(us) {
                    if *u >= 1.0 {
                        l = *x;
                    } else {
                        break;
                    }
                }
                l
            }
            _ => 0.0,
        }
    }

    /// Points where `U₀` has kinks or jumps.
    pub fn breakpoints(&self) -> Vec<f64> {
        match self {
            InitialCondition::Tabulated { xs, .. } => xs.clone(),
            _ => vec![self.l0()],
        }
    }

    pub fn tail(&self) -> TailClass {
        match self {
            InitialCondition::Heaviside | InitialCondition::Tabulated { .. } => TailClass {
                rate: f64::INFINITY,
                power: 0.0,
            },
            InitialCondition::PowerExpTail { nu, lam, .. } => TailClass { rate: *lam, power: *nu },
            InitialCondition::Wave { c } => {
                let p = WaveParams::new(*c).expect("validated speed");
                if p.z_c.is_none() {
                    TailClass { rate: SQRT2, power: 1.0 }
                } else {
                    TailClass { rate: p.a_c, power: 0.0 }
                }
            }
            InitialCondition::BetaWave { beta } => {
                if (*beta - SQRT2).abs() < 1e-12 {
                    TailClass { rate: SQRT2, power: 0.0 }
                } else if *beta < SQRT2 {
                    TailClass { rate: SQRT2, power: 1.0 }
                } else {
                    TailClass { rate: *beta, power: 0.0 }
                }
            }
        }
    }

    /// `∫ e^{r x} U₀(x) dx < ∞` on the right half-line.
    pub fn exp_moment_finite(&self, r: f64) -> bool {
        self.tail().moment_finite(r, 0.0)
    }

    /// `∫₀^∞ y e^{√2 y} U₀(y) dy < ∞`.
    pub fn finite_initial_mass(&self) -> bool {
        self.tail().moment_finite(SQRT2, 1.0)
    }

    /// Smallest point beyond which `U₀ ≤ tol`.
    pub fn support_bound(&self, tol: f64) -> f64 {
        let l0 = self.l0();
        if let InitialCondition::Tabulated { xs, .. } = self {
            return *xs.last().expect("validated table");
        }
        let mut hi = l0.max(0.0) + 1.0;
        while self.eval(hi) > tol && hi < 1e6 {
            hi *= 2.0;
        }
        hi
    }

    /// Sampler for the probability measure `u₀ = −dU₀`.
    pub fn sampler(&self) -> Result<IcSampler> {
        self.validate()?;
        Ok(match self {
            InitialCondition::Heaviside => IcSampler::Atom(0.0),
            InitialCondition::Wave { c } => {
                let p = WaveParams::new(*c)?;
                if p.z_c.is_none() {
                    IcSampler::Gamma2(Gamma::new(2.0, 1.0 / SQRT2).expect("valid gamma"))
                } else {
                    IcSampler::ExpSum(
                        Exp::new(p.a_c).expect("positive rate"),
                        Exp::new(p.b_c).expect("positive rate"),
                    )
                }
            }
            _ => IcSampler::Inverse(self.clone()),
        })
    }

    /// Inverse CCDF `inf{x ≥ L₀ : U₀(x) ≤ v}` by bisection.
    pub fn quantile(&self, v: f64) -> f64 {
        let l0 = self.l0();
        if self.eval(l0) <= v {
            return l0;
        }
        let mut lo = l0;
        let mut step = 1.0;
        let mut hi = l0 + step;
        while self.eval(hi) > v {
            lo = hi;
            step *= 2.0;
            hi = l0 + step;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if !(mid > lo && mid < hi) {
                break;
            }
            if self.eval(mid) > v {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        hi
    }
}

fn wave_weighted(c: f64, beta: Option<f64>, x: f64, r: f64) -> f64 {
    match WaveParams::new(c) {
        Ok(p) => p.beta_ccdf_weighted(beta.unwrap_or(0.0), x, r),
        Err(_) => f64::NAN,
    }
}

fn table_eval(xs: &[f64], us: &[f64], x: f64) -> f64 {
    let n = xs.len();
    if x < xs[0] {
        return 1.0;
    }
    if x > xs[n - 1] {
        return 0.0;
    }
    let j = xs.partition_point(|&p| p <= x);
    if j >= n {
        return us[n - 1];
    }
    let (x0, x1) = (xs[j - 1], xs[j]);
    let w = (x - x0) / (x1 - x0);
    us[j - 1] + w * (us[j] - us[j - 1])
}

/// Contact point `x*` of `min(1, A x^ν e^{-λx})`: the largest root of
/// `log A + ν log x − λx = 0` on the decreasing branch, or the start of that
/// branch if the curve never reaches 1 there.
pub fn powexp_contact(a: f64, nu: f64, lam: f64) -> f64 {
    let start = if nu > 0.0 { nu / lam } else { 0.0 };
    let g = |x: f64| a.ln() + nu * x.ln() - lam * x;
    if nu >= 0.0 && g(start.max(f64::MIN_POSITIVE)) <= 0.0 {
        return start;
    }
    if nu == 0.0 {
        return (a.ln() / lam).max(0.0);
    }
    let mut lo = start.max(1e-300);
    let mut hi = start.max(1.0);
    while g(hi) > 0.0 {
        lo = hi;
        hi *= 2.0;
    }
    if nu < 0.0 && g(lo) <= 0.0 {
        lo = f64::MIN_POSITIVE;
        while g(lo) <= 0.0 {
            lo *= 0.5;
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if !(mid > lo && mid < hi) {
            break;
        }
        if g(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

/// Draws from the probability measure `−dU₀`.
#[derive(Clone, Debug)]
pub enum IcSampler {
    Atom(f64),
    Gamma2(Gamma<f64>),
    ExpSum(Exp<f64>, Exp<f64>),
    Inverse(InitialCondition),
}

impl IcSampler {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            IcSampler::Atom(x) => *x,
            IcSampler::Gamma2(g) => g.sample(rng),
            IcSampler::ExpSum(a, b) => a.sample(rng) + b.sample(rng),
            IcSampler::Inverse(ic) => {
                let v: f64 = rng.random();
                ic.quantile(v)
            }
        }
    }
}

impl fmt::Display for InitialCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InitialCondition::Heaviside => write!(f, "heaviside"),
            InitialCondition::PowerExpTail { a, nu, lam } => write!(f, "powexp:{a},{nu},{lam}"),
            InitialCondition::Wave { c } if (c - SQRT2).abs() <= waves::DEGENERATE_TOL => write!(f, "wave:min"),
            InitialCondition::Wave { c } => write!(f, "wave:{c}"),
            InitialCondition::BetaWave { beta } => write!(f, "betawave:{beta}"),
            InitialCondition::Tabulated { xs, .. } => write!(f, "tabulated[{}]", xs.len()),
        }
    }
}

fn parse_num(s: &str) -> Result<f64> {
    let s = s.trim();
    match s {
        "sqrt2" | "√2" => Ok(SQRT2),
        _ => s
            .parse::<f64>()
            .map_err(|_| FbpError::Validation(vec![format!("cannot parse number '{s}'")])),
    }
}

impl FromStr for InitialCondition {
    type Err = FbpError;

    /// `heaviside`, `powexp:A,nu,lam`, `wave:c` (or `wave:min`), `betawave:β`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (head, args) = s.split_once(':').unwrap_or((s, ""));
        let ic = match head {
            "heaviside" => InitialCondition::Heaviside,
            "powexp" => {
                let v: Vec<f64> = args.split(',').map(parse_num).collect::<Result<_>>()?;
                if v.len() != 3 {
                    return Err(FbpError::Validation(vec![format!(
                        "powexp expects A,nu,lam; got '{args}'"
                    )]));
                }
                InitialCondition::PowerExpTail { a: v[0], nu: v[1], lam: v[2] }
            }
            "wave" => {
                let c = if args.trim() == "min" { SQRT2 } else { parse_num(args)? };
                InitialCondition::Wave { c }
            }
            "betawave" => InitialCondition::BetaWave { beta: parse_num(args)? },
            _ => {
                return Err(FbpError::Validation(vec![format!("unknown initial condition '{s}'")]));
            }
        };
        ic.validate()?;
        Ok(ic)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn heaviside_values() {
        let h = InitialCondition::Heaviside;
        assert_eq!(h.eval(-1e-9), 1.0);
        assert_eq!(h.eval(0.0), 0.0);
        assert_eq!(h.l0(), 0.0);
    }

    #[test]
    fn powexp_contact_points() {
        assert_eq!(powexp_contact(1.0, 0.0, 1.0), 0.0);
        assert!((powexp_contact(std::f64::consts::E, 0.0, 1.0) - 1.0).abs() < 1e-14);
        // A x^{-2} e^{-√2 x} = 1 with A = 1.
        let x = powexp_contact(1.0, -2.0, SQRT2);
        assert!((-2.0 * x.ln() - SQRT2 * x).abs() < 1e-12);
        // ν > 0 that never reaches 1: contact at the peak ν/λ.
        assert!((powexp_contact(0.1, 1.0, 1.0) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn powexp_is_min_of_one_and_tail() {
        let ic: InitialCondition = "powexp:1,0,1".parse().unwrap();
        assert_eq!(ic.l0(), 0.0);
        assert!((ic.eval(2.0) - (-2.0f64).exp()).abs() < 1e-15);
        assert_eq!(ic.eval(-3.0), 1.0);
    }

    #[test]
    fn weighted_matches_product() {
        let ics = [
            InitialCondition::Heaviside,
            "powexp:2,-3,1.2".parse().unwrap(),
            InitialCondition::Wave { c: 1.5 },
            InitialCondition::min_wave(),
            InitialCondition::BetaWave { beta: 2.0 },
            InitialCondition::BetaWave { beta: 1.0 },
        ];
        for ic in &ics {
            for x in [-2.0, 0.3, 1.0, 7.0] {
                let a = ic.weighted(x, 0.7);
                let b = (0.7 * x).exp() * ic.eval(x);
                assert!((a - b).abs() <= 1e-13 * b.abs().max(1.0), "{ic}: {a} vs {b}");
            }
        }
        let w = InitialCondition::BetaWave { beta: 2.0 };
        assert!((w.eval(1.0) - (-2.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn spec_strings_round_trip() {
        for s in ["heaviside", "powexp:1,0,1", "wave:min", "wave:1.5", "betawave:2"] {
            let ic: InitialCondition = s.parse().unwrap();
            assert_eq!(ic.to_string(), s);
        }
        assert!("wave:1.2".parse::<InitialCondition>().is_err());
        assert!("powexp:1,2".parse::<InitialCondition>().is_err());
        assert!("bogus".parse::<InitialCondition>().is_err());
    }

    #[test]
    fn json_round_trip() {
        for ic in [
            InitialCondition::Heaviside,
            InitialCondition::PowerExpTail { a: 1.0, nu: -2.0, lam: SQRT2 },
            InitialCondition::Tabulated { xs: vec![0.0, 1.0], us: vec![1.0, 0.0] },
        ] {
            let s = serde_json::to_string(&ic).unwrap();
            assert_eq!(serde_json::from_str::<InitialCondition>(&s).unwrap(), ic);
        }
        let s = serde_json::to_string(&InitialCondition::Wave { c: 1.5 }).unwrap();
        assert_eq!(s, r#"{"kind":"wave","c":1.5}"#);
    }

    #[test]
    fn tabulated_validation() {
        let bad = InitialCondition::Tabulated { xs: vec![0.0, 1.0], us: vec![0.9, 0.0] };
        assert!(matches!(bad.validate(), Err(FbpError::Validation(_))));
        let bad = InitialCondition::Tabulated { xs: vec![0.0, 1.0], us: vec![0.5, 0.9] };
        assert!(bad.validate().is_err());
        let ok = InitialCondition::Tabulated { xs: vec![-1.0, 0.0, 2.0], us: vec![1.0, 1.0, 0.0] };
        ok.validate().unwrap();
        assert_eq!(ok.l0(), 0.0);
        assert!((ok.eval(1.0) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn tail_classes() {
        assert!(InitialCondition::Heaviside.finite_initial_mass());
        assert!("powexp:1,-3,1.4142135623730951".parse::<InitialCondition>().unwrap().finite_initial_mass());
        assert!(!"powexp:1,-2,1.4142135623730951".parse::<InitialCondition>().unwrap().finite_initial_mass());
        assert!(!InitialCondition::min_wave().finite_initial_mass());
        let p: InitialCondition = "powexp:1,0,1".parse().unwrap();
        assert!(p.exp_moment_finite(0.99));
        assert!(!p.exp_moment_finite(1.0));
        assert_eq!(InitialCondition::Wave { c: 1.5 }.tail().rate, 1.0);
    }

    #[test]
    fn wave_samplers_match_ccdf() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for ic in [InitialCondition::min_wave(), InitialCondition::Wave { c: 1.5 }, InitialCondition::BetaWave { beta: 2.0 }] {
            let s = ic.sampler().unwrap();
            let n = 40_000;
            let xs: Vec<f64> = (0..n).map(|_| s.sample(&mut rng)).collect();
            for q in [0.3, 1.0, 2.5] {
                let emp = xs.iter().filter(|&&x| x > q).count() as f64 / n as f64;
                let exact = ic.eval(q);
                let se = (exact * (1.0 - exact) / n as f64).sqrt();
                assert!((emp - exact).abs() < 5.0 * se, "{ic} at {q}: {emp} vs {exact}");
            }
        }
    }

    #[test]
    fn heaviside_sampler_is_atom_at_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let s = InitialCondition::Heaviside.sampler().unwrap();
        assert!((0..10).all(|_| s.sample(&mut rng) == 0.0));
    }

    proptest! {
        #[test]
        fn powexp_is_admissible(a in 0.05f64..20.0, nu in -4.0f64..3.0, lam in 0.2f64..3.0) {
            let ic = InitialCondition::PowerExpTail { a, nu, lam };
            let l0 = ic.l0();
            prop_assert!(l0 >= 0.0 && l0.is_finite());
            let mut prev = 1.0;
            for i in 0..400 {
                let x = l0 - 1.0 + i as f64 * 0.05;
                let u = ic.eval(x);
                prop_assert!((0.0..=1.0).contains(&u));
                prop_assert!(u <= prev + 1e-12, "x={} u={} prev={}", x, u, prev);
                prev = u;
            }
            prop_assert!(ic.eval(l0 + 1e-9) < 1.0 || ic.eval(l0 + 1e-9) == 1.0 && nu == 0.0);
        }

        #[test]
        fn quantile_inverts_ccdf(v in 0.01f64..0.99) {
            let ic = InitialCondition::BetaWave { beta: 3.0 };
            let x = ic.quantile(v);
            prop_assert!((ic.eval(x) - v).abs() < 1e-9);
        }
    }
}
