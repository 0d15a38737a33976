//! Absorption function built from a power-law permeability k(s) and a
//! capillary pressure P_c(s) that vanishes at s_S and diverges at s_R.
//!
//! Darcy's law gives `B'(s) = -k(s) P_c'(s) / mu`; `B` is its exact
//! antiderivative from s_R.

use serde::{Deserialize, Serialize};

use super::{check_saturation_window, take, AbsorptionModel, ParamSet};
use crate::error::{Error, Result};
use crate::numerics::{adaptive_simpson, maximize_scan_golden};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KpParams {
    pub s_r: f64,
    pub s_s: f64,
    /// Capillary-pressure exponent, in (0, 1).
    pub alpha: f64,
    /// Capillary-pressure scale, g/(cm·s²).
    pub c: f64,
    /// Permeability at saturation, cm².
    pub k_s: f64,
    /// Permeability curvature; must exceed `alpha + 1`.
    pub gamma: f64,
}

impl KpParams {
    pub fn new(s_r: f64, s_s: f64, alpha: f64, c: f64, k_s: f64, gamma: f64) -> Result<Self> {
        let p = KpParams {
            s_r,
            s_s,
            alpha,
            c,
            k_s,
            gamma,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        check_saturation_window(self.s_r, self.s_s)?;
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::validation(format!("alpha = {} must lie in (0, 1)", self.alpha)));
        }
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(Error::validation(format!("c = {} must be > 0", self.c)));
        }
        if !(self.k_s > 0.0 && self.k_s.is_finite()) {
            return Err(Error::validation(format!("K_s = {} must be > 0", self.k_s)));
        }
        if !(self.gamma > 0.0 && self.gamma - self.alpha - 1.0 > 0.0) {
            return Err(Error::validation(format!(
                "gamma = {} must satisfy gamma - alpha - 1 > 0 (alpha = {})",
                self.gamma, self.alpha
            )));
        }
        if self.denominator() == 0.0 {
            return Err(Error::validation("closed-form denominator vanishes"));
        }
        Ok(())
    }

    pub fn from_params(params: &ParamSet) -> Result<Self> {
        Self::new(
            take(params, "s_r")?,
            take(params, "s_s")?,
            take(params, "alpha")?,
            take(params, "c")?,
            take(params, "k_s")?,
            take(params, "gamma")?,
        )
    }

    pub fn to_params(&self) -> ParamSet {
        [
            ("s_r", self.s_r),
            ("s_s", self.s_s),
            ("alpha", self.alpha),
            ("c", self.c),
            ("k_s", self.k_s),
            ("gamma", self.gamma),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect()
    }

    /// The product `K_s · c`, the only combination imbibition data constrains.
    pub fn conductance_product(&self) -> f64 {
        self.k_s * self.c
    }

    /// `(γ-α)(γ-α+1)(γ-α+2)`, expanded.
    pub fn denominator(&self) -> f64 {
        let (a, g) = (self.alpha, self.gamma);
        -a.powi(3) + 3.0 * a * a * (g + 1.0) - 3.0 * a * g * (g + 2.0) - 2.0 * a + g.powi(3) + 3.0 * g * g + 2.0 * g
    }

    /// Intrinsic permeability, cm².
    pub fn permeability(&self, s: f64) -> f64 {
        if s <= self.s_r {
            0.0
        } else if s < self.s_s {
            self.k_s * ((s - self.s_r) / (self.s_s - self.s_r)).powf(self.gamma)
        } else {
            self.k_s
        }
    }

    /// Capillary pressure, g/(cm·s²), defined on (s_R, s_S].
    pub fn capillary_pressure(&self, s: f64) -> Result<f64> {
        if !(s > self.s_r && s <= self.s_s) {
            return Err(Error::Domain {
                what: "saturation",
                value: s,
                domain: format!("(s_R, s_S] = ({}, {}]", self.s_r, self.s_s),
            });
        }
        let e = s - self.s_s;
        Ok(self.c * e * e / (s - self.s_r).powf(self.alpha))
    }

    /// dP_c/ds on the open interval (s_R, s_S).
    pub fn capillary_pressure_deriv(&self, s: f64) -> Result<f64> {
        if !(s > self.s_r && s < self.s_s) {
            return Err(Error::Domain {
                what: "saturation",
                value: s,
                domain: format!("(s_R, s_S) = ({}, {})", self.s_r, self.s_s),
            });
        }
        let (sr, ss, a) = (self.s_r, self.s_s, self.alpha);
        Ok(-self.c * (s - ss) * (2.0 * sr - 2.0 * s - a * ss + a * s) / (s - sr).powf(a + 1.0))
    }

    pub fn b_prime(&self, s: f64, mu: f64) -> f64 {
        KpModel::new(*self, mu).map_or(f64::NAN, |m| m.b_prime(s))
    }

    pub fn b(&self, s: f64, mu: f64) -> f64 {
        KpModel::new(*self, mu).map_or(f64::NAN, |m| m.b(s))
    }

    /// Peak of `B'` over [s_R, s_S], cm²/s.
    pub fn diffusion_coefficient(&self, mu: f64) -> f64 {
        KpModel::new(*self, mu).map_or(f64::NAN, |m| m.diffusion_coefficient())
    }
}

/// [`KpParams`] bound to a liquid viscosity, with the closed-form
/// coefficients computed once.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KpModel {
    pub params: KpParams,
    pub mu: f64,
    /// `K_s c / (mu (s_S - s_R)^gamma)`
    flux_scale: f64,
    /// `flux_scale / denominator`
    b_scale: f64,
    u: f64,
    v: f64,
    constant: f64,
    plateau: f64,
    peak: f64,
}

impl KpModel {
    pub fn new(params: KpParams, mu: f64) -> Result<Self> {
        params.validate()?;
        if !(mu > 0.0 && mu.is_finite()) {
            return Err(Error::validation(format!("viscosity {mu} must be > 0")));
        }
        let KpParams {
            s_r: sr,
            s_s: ss,
            alpha: a,
            c,
            k_s,
            gamma: g,
        } = params;
        let den = params.denominator();
        let width = ss - sr;
        let flux_scale = k_s * c / (mu * width.powf(g));

        // quadratic in s: u s² + v s + constant
        let u = a.powi(3) - a * a * (2.0 * g + 3.0) + a * (g * g + 5.0 * g + 2.0) - 2.0 * g * (g + 1.0);
        let v = 2.0 * g * (-sr * a + 2.0 * a * a * ss + 2.0 * ss - 4.0 * a * ss)
            + 2.0 * g * g * (sr - a * ss + ss)
            + 2.0 * a * ss * (-a * a + 3.0 * a - 2.0);
        let z = 2.0 * sr * sr + a * ss * ss * (3.0 - 2.0 * a) + 2.0 * sr * ss * (a - 2.0);
        let constant = g * g * ss * (a * ss - 2.0 * sr) + g * z + a * ss * ss * (a * a - 3.0 * a + 2.0);

        let plateau = 2.0 * k_s * c * g * width.powf(2.0 - a) / (mu * den);

        let mut model = KpModel {
            params,
            mu,
            flux_scale,
            b_scale: flux_scale / den,
            u,
            v,
            constant,
            plateau,
            peak: 0.0,
        };
        let (_, peak) = maximize_scan_golden(|s| model.b_prime(s), sr, ss, 1024, 1e-10);
        model.peak = peak;
        Ok(model)
    }

    /// Value of `B` for s >= s_S.
    pub fn plateau(&self) -> f64 {
        self.plateau
    }

    /// `B(s)` by adaptive quadrature of `B'` from s_R. Test oracle only.
    pub fn b_by_quadrature(&self, s: f64) -> f64 {
        let upper = s.min(self.params.s_s);
        if upper <= self.params.s_r {
            return 0.0;
        }
        adaptive_simpson(&|x| self.b_prime(x), self.params.s_r, upper, 1e-14 * self.plateau)
    }
}

impl AbsorptionModel for KpModel {
    fn family(&self) -> &'static str {
        "kp"
    }

    fn b(&self, s: f64) -> f64 {
        let p = &self.params;
        if s <= p.s_r {
            0.0
        } else if s < p.s_s {
            let poly = (self.u * s + self.v) * s + self.constant;
            self.b_scale * (s - p.s_r).powf(p.gamma - p.alpha) * poly
        } else {
            self.plateau
        }
    }

    fn b_prime(&self, s: f64) -> f64 {
        let p = &self.params;
        if s <= p.s_r || s >= p.s_s {
            return 0.0;
        }
        let shape = (s - p.s_r).powf(p.gamma - p.alpha - 1.0)
            * (s - p.s_s)
            * (2.0 * p.s_r + s * (p.alpha - 2.0) - p.alpha * p.s_s);
        (self.flux_scale * shape).max(0.0)
    }

    fn diffusion_coefficient(&self) -> f64 {
        self.peak
    }

    fn residual_saturation(&self) -> f64 {
        self.params.s_r
    }

    fn max_saturation(&self) -> f64 {
        self.params.s_s
    }

    fn parameters(&self) -> ParamSet {
        self.params.to_params()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    const MU: f64 = 8.9e-3;

    fn ghiara() -> KpParams {
        KpParams::new(0.675, 0.9994, 0.25, 1.4e6, 7.65e-10, 1.865).unwrap()
    }

    fn fig2() -> KpParams {
        KpParams::new(0.1, 0.9, 0.25, 1.35e5, 8e-10, 1.45).unwrap()
    }

    #[test]
    fn permeability_examples() {
        let p = KpParams::new(0.1, 0.9, 0.25, 1e6, 1e-10, 1.45).unwrap();
        assert_eq!(p.permeability(0.9), 1e-10);
        assert_eq!(p.permeability(0.05), 0.0);
        assert_eq!(p.permeability(0.1), 0.0);
        assert_relative_eq!(p.permeability(0.5), 1e-10 * 0.5f64.powf(1.45), max_relative = 1e-14);
        assert_relative_eq!(p.permeability(0.5), 3.66e-11, max_relative = 1e-3);
    }

    #[test]
    fn capillary_pressure_examples() {
        let p = KpParams::new(0.1, 0.9, 0.25, 1e6, 1e-10, 1.45).unwrap();
        assert_eq!(p.capillary_pressure(0.9).unwrap(), 0.0);
        assert_relative_eq!(p.capillary_pressure(0.5).unwrap(), 2.012e5, max_relative = 1e-3);
        assert!(p.capillary_pressure(0.1).is_err());
        assert!(p.capillary_pressure(0.95).is_err());
        let mut prev = 0.0;
        for k in 1..12 {
            let v = p.capillary_pressure(0.1 + 10f64.powi(-k)).unwrap();
            assert!(v > prev);
            prev = v;
        }
        assert!(prev > 1e7);
    }

    #[test]
    fn capillary_pressure_deriv_matches_finite_differences() {
        let p = ghiara();
        let w = p.s_s - p.s_r;
        let h = 1e-7 * w;
        for i in 1..=100 {
            let s = p.s_r + w * i as f64 / 101.0;
            let fd = (p.capillary_pressure(s + h).unwrap() - p.capillary_pressure(s - h).unwrap()) / (2.0 * h);
            let an = p.capillary_pressure_deriv(s).unwrap();
            assert_relative_eq!(an, fd, max_relative = 1e-6);
        }
        assert!(p.capillary_pressure_deriv(0.5 * (p.s_r + p.s_s)).unwrap() < 0.0);
        assert!(p.capillary_pressure_deriv(p.s_s).is_err());
        let mut q = p;
        q.c *= 10.0;
        let s = 0.8;
        assert_relative_eq!(
            q.capillary_pressure_deriv(s).unwrap(),
            10.0 * p.capillary_pressure_deriv(s).unwrap(),
            max_relative = 1e-14
        );
    }

    #[test]
    fn b_prime_edges_and_darcy_identity() {
        let p = ghiara();
        let m = KpModel::new(p, MU).unwrap();
        assert_eq!(m.b_prime(p.s_r), 0.0);
        assert_eq!(m.b_prime(p.s_s), 0.0);
        for i in 1..100 {
            let s = p.s_r + (p.s_s - p.s_r) * i as f64 / 100.0;
            let darcy = -p.permeability(s) * p.capillary_pressure_deriv(s).unwrap() / MU;
            assert_relative_eq!(m.b_prime(s), darcy, max_relative = 1e-12);
        }
    }

    #[test]
    fn diffusion_coefficient_tables() {
        assert_relative_eq!(ghiara().diffusion_coefficient(MU), 1.97e-2, max_relative = 0.03);
        let azolo = KpParams::new(0.55, 0.9994, 0.25, 1.98e5, 7.93e-10, 1.45).unwrap();
        assert_relative_eq!(azolo.diffusion_coefficient(MU), 4.84e-3, max_relative = 0.03);
        let mut scaled = ghiara();
        scaled.c *= 3.0;
        assert_relative_eq!(
            scaled.diffusion_coefficient(MU),
            3.0 * ghiara().diffusion_coefficient(MU),
            max_relative = 1e-9
        );
    }

    #[test]
    fn diffusion_coefficient_beats_dense_scan() {
        let m = KpModel::new(ghiara(), MU).unwrap();
        let p = m.params;
        let scan = (0..=100_000)
            .map(|i| m.b_prime(p.s_r + (p.s_s - p.s_r) * i as f64 / 1e5))
            .fold(0.0, f64::max);
        assert!(m.diffusion_coefficient() >= scan);
        assert!(m.diffusion_coefficient() <= scan * (1.0 + 1e-6));
    }

    #[test]
    fn plateau_hand_value() {
        let p = fig2();
        // 2 K_s c gamma (s_S - s_R)^(2 - alpha) / (mu * 1.2 * 2.2 * 3.2)
        let hand = 2.0 * 8e-10 * 1.35e5 * 1.45 * 0.8f64.powf(1.75) / (MU * 8.448);
        let m = KpModel::new(p, MU).unwrap();
        assert_relative_eq!(m.plateau(), hand, max_relative = 1e-13);
        assert_relative_eq!(m.b(0.95), hand, max_relative = 1e-13);
        assert_relative_eq!(m.b(0.9 - 1e-12), hand, max_relative = 1e-9);
        assert_eq!(m.b(0.1), 0.0);
    }

    #[test]
    fn closed_form_matches_quadrature() {
        for p in [ghiara(), fig2()] {
            let m = KpModel::new(p, MU).unwrap();
            for i in 1..=50 {
                let s = p.s_r + (p.s_s - p.s_r) * i as f64 / 50.0;
                assert_relative_eq!(m.b(s), m.b_by_quadrature(s), max_relative = 1e-6);
            }
        }
    }

    #[test]
    fn rejects_bad_params() {
        assert!(KpParams::new(0.1, 0.9, 0.5, 1e5, 1e-10, 1.4).is_err());
        assert!(KpParams::new(0.1, 0.9, 1.0, 1e5, 1e-10, 2.5).is_err());
        assert!(KpParams::new(0.1, 0.9, 0.25, -1.0, 1e-10, 1.5).is_err());
        assert!(KpParams::new(0.9, 0.1, 0.25, 1e5, 1e-10, 1.5).is_err());
        assert!(KpModel::new(fig2(), 0.0).is_err());
    }

    fn arb_params() -> impl Strategy<Value = KpParams> {
        (
            0.0f64..0.8,
            0.05f64..0.5,
            0.05f64..0.95,
            1e4f64..1e7,
            1e-11f64..1e-9,
            0.01f64..3.0,
        )
            .prop_map(|(sr, w, a, c, ks, extra)| KpParams {
                s_r: sr,
                s_s: (sr + w).min(1.0),
                alpha: a,
                c,
                k_s: ks,
                gamma: a + 1.0 + extra,
            })
    }

    proptest! {
        #[test]
        fn compact_support_nonnegative(p in arb_params(), s in 0.0f64..1.0) {
            let m = KpModel::new(p, MU).unwrap();
            prop_assert!(m.b_prime(s) >= 0.0);
            if s <= p.s_r || s >= p.s_s {
                prop_assert_eq!(m.b_prime(s), 0.0);
            }
        }

        #[test]
        fn b_nondecreasing_and_continuous(p in arb_params(), s in 0.0f64..1.0, ds in 0.0f64..0.05) {
            let m = KpModel::new(p, MU).unwrap();
            let s2 = (s + ds).min(1.0);
            prop_assert!(m.b(s2) >= m.b(s) - 1e-12 * m.plateau());
            prop_assert!((m.b(p.s_s - 1e-13) - m.b(p.s_s)).abs() <= 1e-9 * m.plateau());
            prop_assert!(m.b(p.s_r + 1e-13).abs() <= 1e-9 * m.plateau());
        }

        #[test]
        fn permeability_and_pressure_monotone(p in arb_params(), f in 0.01f64..0.98, df in 0.001f64..0.01) {
            let w = p.s_s - p.s_r;
            let s = p.s_r + f * w;
            let s2 = (s + df * w).min(p.s_s);
            prop_assert!(p.permeability(s2) >= p.permeability(s));
            prop_assert!(p.capillary_pressure(s2).unwrap() < p.capillary_pressure(s).unwrap());
        }
    }
}
