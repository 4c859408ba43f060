//! Link budget: dB conversions, large-scale path loss and the linear-scale
//! system parameters every other module consumes.
//!
//! dB quantities only exist at this boundary. Everything downstream works
//! with linear gains (`beta_d`, `beta_l`), linear powers in mW and the linear
//! transmit SNR `gamma = P / sigma^2`.

use crate::error::{Error, Result};

pub fn db_to_linear(x_db: f64) -> f64 {
    10f64.powf(x_db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// Source, RIS and destination placement.
///
/// The source and the RIS sit on a horizontal line `d0` apart. The
/// destination is `d` from the source along that line and `dv` off it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Geometry {
    pub d0: f64,
    pub d: f64,
    pub dv: f64,
}

impl Geometry {
    pub fn new(d0: f64, d: f64, dv: f64) -> Result<Self> {
        let geom = Geometry { d0, d, dv };
        geom.validate()?;
        Ok(geom)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, value) in [("d0", self.d0), ("d", self.d)] {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::invalid(name, format!("distance must be positive, got {value}")));
            }
        }
        if !(self.dv.is_finite() && self.dv >= 0.0) {
            return Err(Error::invalid("dv", format!("offset must be non-negative, got {}", self.dv)));
        }
        if self.d_rd() <= 0.0 {
            return Err(Error::invalid("geometry", "destination coincides with the RIS"));
        }
        Ok(())
    }

    /// Source to RIS distance.
    pub fn d_sr(&self) -> f64 {
        self.d0
    }

    /// RIS to destination distance.
    pub fn d_rd(&self) -> f64 {
        (self.d0 - self.d).hypot(self.dv)
    }
}

impl Default for Geometry {
    fn default() -> Self {
        Geometry {
            d0: 51.0,
            d: 48.0,
            dv: 2.0,
        }
    }
}

/// Distance-power law with a reference loss at 1 m.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathLossModel {
    pub c0_db: f64,
    pub alpha_direct: f64,
    pub alpha_cascaded: f64,
}

impl PathLossModel {
    pub fn validate(&self) -> Result<()> {
        if !self.c0_db.is_finite() {
            return Err(Error::invalid("c0_db", "must be finite"));
        }
        for (name, value) in [
            ("alpha_direct", self.alpha_direct),
            ("alpha_cascaded", self.alpha_cascaded),
        ] {
            if !(value.is_finite() && value >= 0.0) {
                return Err(Error::invalid(name, format!("exponent must be non-negative, got {value}")));
            }
        }
        Ok(())
    }
}

impl Default for PathLossModel {
    fn default() -> Self {
        PathLossModel {
            c0_db: -30.0,
            alpha_direct: 3.5,
            alpha_cascaded: 2.0,
        }
    }
}

/// Direct-link gain `C0 * d^-alpha_direct`.
pub fn pathloss_direct(geom: &Geometry, model: &PathLossModel) -> Result<f64> {
    if !(geom.d.is_finite() && geom.d > 0.0) {
        return Err(Error::invalid("d", format!("distance must be positive, got {}", geom.d)));
    }
    model.validate()?;
    Ok(db_to_linear(model.c0_db) * geom.d.powf(-model.alpha_direct))
}

/// Cascaded-link gain `C0 * (d_SR * d_RD)^-alpha_cascaded`.
///
/// The reference loss is applied once to the product of both hop distances.
pub fn pathloss_cascaded(geom: &Geometry, model: &PathLossModel) -> Result<f64> {
    let (d_sr, d_rd) = (geom.d_sr(), geom.d_rd());
    if !(d_sr.is_finite() && d_sr > 0.0) {
        return Err(Error::invalid("d0", format!("distance must be positive, got {d_sr}")));
    }
    if !(d_rd.is_finite() && d_rd > 0.0) {
        return Err(Error::invalid("geometry", "RIS to destination distance is zero"));
    }
    model.validate()?;
    Ok(db_to_linear(model.c0_db) * (d_sr * d_rd).powf(-model.alpha_cascaded))
}

/// Linear transmit SNR `P / sigma^2`.
pub fn transmit_snr(p_dbm: f64, noise_dbm: f64) -> f64 {
    db_to_linear(p_dbm - noise_dbm)
}

/// Scenario description in physical units, before a group size is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scenario {
    pub geometry: Geometry,
    pub pathloss: PathLossModel,
    pub k: usize,
    pub tc: usize,
    pub p_dbm: f64,
    pub p_tr_dbm: f64,
    pub noise_dbm: f64,
}

impl Default for Scenario {
    fn default() -> Self {
        Scenario {
            geometry: Geometry::default(),
            pathloss: PathLossModel::default(),
            k: 360,
            tc: 900,
            p_dbm: 0.0,
            p_tr_dbm: 0.0,
            noise_dbm: -80.0,
        }
    }
}

impl Scenario {
    /// Resolves the scenario into linear-scale parameters for group size `b`.
    pub fn params(&self, b: usize) -> Result<SystemParams> {
        self.geometry.validate()?;
        let beta_d = pathloss_direct(&self.geometry, &self.pathloss)?;
        let beta_l = pathloss_cascaded(&self.geometry, &self.pathloss)?;
        SystemParams::new(
            self.k,
            b,
            self.tc,
            self.p_tr_dbm,
            self.p_dbm,
            self.noise_dbm,
            beta_d,
            beta_l,
        )
    }
}

/// Linear-scale constants of one operating point.
///
/// Construction checks `1 <= B <= K`, positive gains and finite powers. The
/// pilot-overhead prefactor `1 - (K'+1)/T_c` may be zero or negative here;
/// operations that need a positive prefactor call [`SystemParams::ensure_feasible`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    k: usize,
    b: usize,
    tc: usize,
    p_tr_dbm: f64,
    p_dbm: f64,
    noise_dbm: f64,
    beta_d: f64,
    beta_l: f64,
    gamma: f64,
}

impl SystemParams {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        k: usize,
        b: usize,
        tc: usize,
        p_tr_dbm: f64,
        p_dbm: f64,
        noise_dbm: f64,
        beta_d: f64,
        beta_l: f64,
    ) -> Result<Self> {
        if k == 0 {
            return Err(Error::invalid("K", "surface needs at least one element"));
        }
        if b == 0 || b > k {
            return Err(Error::invalid("B", format!("group size must lie in 1..={k}, got {b}")));
        }
        if tc == 0 {
            return Err(Error::invalid("T_c", "coherence block must be at least one symbol"));
        }
        for (name, value) in [("P_tr", p_tr_dbm), ("P", p_dbm), ("noise", noise_dbm)] {
            if !value.is_finite() {
                return Err(Error::invalid(name, format!("power must be finite, got {value}")));
            }
        }
        for (name, value) in [("beta_d", beta_d), ("beta_l", beta_l)] {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::invalid(name, format!("gain must be positive, got {value}")));
            }
        }
        Ok(SystemParams {
            k,
            b,
            tc,
            p_tr_dbm,
            p_dbm,
            noise_dbm,
            beta_d,
            beta_l,
            gamma: transmit_snr(p_dbm, noise_dbm),
        })
    }

    pub fn with_group_size(&self, b: usize) -> Result<Self> {
        Self::new(
            self.k,
            b,
            self.tc,
            self.p_tr_dbm,
            self.p_dbm,
            self.noise_dbm,
            self.beta_d,
            self.beta_l,
        )
    }

    pub fn with_coherence(&self, tc: usize) -> Result<Self> {
        Self::new(
            self.k,
            self.b,
            tc,
            self.p_tr_dbm,
            self.p_dbm,
            self.noise_dbm,
            self.beta_d,
            self.beta_l,
        )
    }

    /// Sets data and pilot power together.
    pub fn with_power(&self, p_dbm: f64) -> Result<Self> {
        Self::new(
            self.k,
            self.b,
            self.tc,
            p_dbm,
            p_dbm,
            self.noise_dbm,
            self.beta_d,
            self.beta_l,
        )
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn b(&self) -> usize {
        self.b
    }

    pub fn tc(&self) -> usize {
        self.tc
    }

    /// Number of subgroups `floor(K / B)`.
    pub fn k_prime(&self) -> usize {
        self.k / self.b
    }

    /// Pilot symbols per block, `K' + 1`.
    pub fn pilot_overhead(&self) -> usize {
        self.k_prime() + 1
    }

    pub fn prefactor(&self) -> f64 {
        prefactor(self.k_prime(), self.tc)
    }

    /// Fails unless the grouped prefactor is strictly positive.
    pub fn ensure_feasible(&self) -> Result<()> {
        if self.prefactor() > 0.0 {
            Ok(())
        } else {
            Err(Error::Infeasible {
                pilot_symbols: self.pilot_overhead(),
                tc: self.tc,
            })
        }
    }

    pub fn p_dbm(&self) -> f64 {
        self.p_dbm
    }

    pub fn p_tr_dbm(&self) -> f64 {
        self.p_tr_dbm
    }

    pub fn noise_dbm(&self) -> f64 {
        self.noise_dbm
    }

    /// Pilot power in mW.
    pub fn p_tr(&self) -> f64 {
        db_to_linear(self.p_tr_dbm)
    }

    /// Noise variance in mW.
    pub fn noise_power(&self) -> f64 {
        db_to_linear(self.noise_dbm)
    }

    pub fn beta_d(&self) -> f64 {
        self.beta_d
    }

    pub fn beta_l(&self) -> f64 {
        self.beta_l
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }
}

/// `1 - (n + 1) / T_c` for `n` estimated cascaded coefficients.
pub fn prefactor(n: usize, tc: usize) -> f64 {
    1.0 - (n as f64 + 1.0) / tc as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn db_conversion_points() {
        assert_eq!(db_to_linear(0.0), 1.0);
        assert!(rel(db_to_linear(-30.0), 1e-3) < 1e-15);
        assert!(rel(db_to_linear(-80.0), 1e-8) < 1e-15);
    }

    #[test]
    fn direct_pathloss_examples() {
        let model = PathLossModel::default();
        let at = |d: f64| Geometry { d0: 51.0, d, dv: 2.0 };
        assert!(rel(pathloss_direct(&at(1.0), &model).unwrap(), 1e-3) < 1e-15);
        // 48^3.5 = 48^3 * sqrt(48) = 110592 * 6.928203230275509
        let expected = 1e-3 / (110_592.0 * 48f64.sqrt());
        let got = pathloss_direct(&at(48.0), &model).unwrap();
        assert!(rel(got, expected) < 1e-13);
        assert!((got - 1.31e-9).abs() < 0.01e-9);
        let flat = PathLossModel {
            c0_db: 0.0,
            alpha_direct: 0.0,
            alpha_cascaded: 0.0,
        };
        assert_eq!(pathloss_direct(&at(48.0), &flat).unwrap(), 1.0);
        assert!(pathloss_direct(&at(0.0), &model).is_err());
        assert!(pathloss_direct(&at(-3.0), &model).is_err());
    }

    #[test]
    fn cascaded_pathloss_examples() {
        let model = PathLossModel::default();
        let got = pathloss_cascaded(&Geometry::default(), &model).unwrap();
        assert!(rel(got, 1e-3 / (2601.0 * 13.0)) < 1e-13);
        assert!((got - 2.958e-8).abs() < 0.001e-8);

        let unit = Geometry { d0: 1.0, d: 1.0, dv: 1.0 };
        assert_eq!(unit.d_rd(), 1.0);
        assert!(rel(pathloss_cascaded(&unit, &model).unwrap(), 1e-3) < 1e-15);

        let flat = PathLossModel {
            alpha_cascaded: 0.0,
            ..model
        };
        let far = Geometry { d0: 400.0, d: 17.0, dv: 33.0 };
        assert!(rel(pathloss_cascaded(&far, &flat).unwrap(), 1e-3) < 1e-15);

        let on_ris = Geometry { d0: 10.0, d: 10.0, dv: 0.0 };
        assert!(pathloss_cascaded(&on_ris, &model).is_err());
    }

    #[test]
    fn transmit_snr_examples() {
        assert!(rel(transmit_snr(0.0, -80.0), 1e8) < 1e-12);
        assert_eq!(transmit_snr(-17.5, -17.5), 1.0);
        assert!(rel(transmit_snr(10.0, 0.0), 10.0) < 1e-15);
    }

    #[test]
    fn system_params_validation() {
        let s = Scenario::default();
        assert!(s.params(0).is_err());
        assert!(s.params(361).is_err());
        let p = s.params(5).unwrap();
        assert_eq!(p.k_prime(), 72);
        assert_eq!(p.pilot_overhead(), 73);
        assert!(rel(p.gamma(), 1e8) < 1e-12);
        assert!(p.ensure_feasible().is_ok());
        let tight = p.with_coherence(73).unwrap();
        assert_eq!(tight.prefactor(), 0.0);
        assert!(matches!(
            tight.ensure_feasible(),
            Err(Error::Infeasible { pilot_symbols: 73, tc: 73 })
        ));
        assert!(SystemParams::new(4, 1, 10, 0.0, 0.0, -80.0, 0.0, 1.0).is_err());
        assert!(SystemParams::new(4, 1, 10, f64::NAN, 0.0, -80.0, 1.0, 1.0).is_err());
    }

    proptest! {
        #[test]
        fn db_round_trip(exp in -15.0f64..15.0) {
            let x = 10f64.powf(exp);
            prop_assert!(rel(db_to_linear(linear_to_db(x)), x) < 1e-12);
        }

        #[test]
        fn snr_scales_tenfold_per_ten_db(p in -40.0f64..40.0, n in -120.0f64..0.0) {
            prop_assert!(rel(transmit_snr(p + 10.0, n), 10.0 * transmit_snr(p, n)) < 1e-12);
        }

        #[test]
        fn pathloss_decreases_with_distance(
            d0 in 1.0f64..200.0,
            frac in 0.05f64..0.95,
            dv in 0.5f64..20.0,
            grow in 1.01f64..3.0,
        ) {
            let model = PathLossModel::default();
            let g = Geometry { d0, d: d0 * frac, dv };
            let farther_direct = Geometry { d: g.d * grow, ..g };
            prop_assert!(pathloss_direct(&farther_direct, &model)? < pathloss_direct(&g, &model)?);
            let farther_source = Geometry { d0: d0 * grow, d: d0 * grow * frac, ..g };
            prop_assert!(pathloss_cascaded(&farther_source, &model)? < pathloss_cascaded(&g, &model)?);
            let farther_offset = Geometry { dv: dv * grow, ..g };
            prop_assert!(pathloss_cascaded(&farther_offset, &model)? < pathloss_cascaded(&g, &model)?);
        }
    }
}
