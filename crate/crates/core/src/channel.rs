//! Rayleigh fading draws and software grouping of the cascaded channel.
//!
//! Every coefficient is circularly-symmetric complex Gaussian with unit
//! variance: real and imaginary parts are independent `N(0, 1/2)`.
//!
//! Grouping sums `B` consecutive cascaded coefficients into one subgroup
//! coefficient. When `B` does not divide `K`, the trailing `K mod B`
//! elements belong to no subgroup and are left out of the cascaded channel
//! entirely. The rate bound and its optimum are stated for exactly `K'B`
//! participating elements, so the simulation follows the same convention.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::special::half_gamma_ratio;

/// One `CN(0, 1)` sample.
pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Small-scale fading of one coherence block.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    h: Vec<Complex64>,
    g: Vec<Complex64>,
    h_d: Complex64,
    v: Vec<Complex64>,
    v_grouped: Option<Vec<Complex64>>,
}

impl ChannelRealization {
    /// Builds a realization from explicit source-RIS and RIS-destination
    /// coefficients plus the direct link.
    pub fn from_parts(h: Vec<Complex64>, g: Vec<Complex64>, h_d: Complex64) -> Result<Self> {
        if h.is_empty() {
            return Err(Error::invalid("K", "surface needs at least one element"));
        }
        if h.len() != g.len() {
            return Err(Error::DimensionMismatch {
                what: "RIS-destination channel",
                expected: h.len(),
                found: g.len(),
            });
        }
        let v = h.iter().zip(&g).map(|(a, b)| a * b).collect();
        Ok(ChannelRealization {
            h,
            g,
            h_d,
            v,
            v_grouped: None,
        })
    }

    pub fn k(&self) -> usize {
        self.h.len()
    }

    pub fn h(&self) -> &[Complex64] {
        &self.h
    }

    pub fn g(&self) -> &[Complex64] {
        &self.g
    }

    pub fn h_d(&self) -> Complex64 {
        self.h_d
    }

    /// Elementwise cascaded channel `h ⊙ g`.
    pub fn v(&self) -> &[Complex64] {
        &self.v
    }

    /// Grouped cascaded channel, once [`ChannelRealization::group`] has run.
    pub fn v_grouped(&self) -> Option<&[Complex64]> {
        self.v_grouped.as_deref()
    }

    pub fn group(&mut self, b: usize) -> Result<&[Complex64]> {
        let grouped = group_cascade(&self.v, b)?;
        Ok(self.v_grouped.insert(grouped))
    }
}

/// Draws `h`, `g` (length `K`) and `h_d`, in that order.
pub fn sample_channels<R: Rng + ?Sized>(k: usize, rng: &mut R) -> Result<ChannelRealization> {
    if k == 0 {
        return Err(Error::invalid("K", "surface needs at least one element"));
    }
    let h: Vec<_> = (0..k).map(|_| complex_normal(rng)).collect();
    let g: Vec<_> = (0..k).map(|_| complex_normal(rng)).collect();
    let h_d = complex_normal(rng);
    ChannelRealization::from_parts(h, g, h_d)
}

/// Sums consecutive blocks of `b` coefficients; the `len mod b` tail is dropped.
pub fn group_cascade(v: &[Complex64], b: usize) -> Result<Vec<Complex64>> {
    if b == 0 || b > v.len() {
        return Err(Error::invalid(
            "B",
            format!("group size must lie in 1..={}, got {b}", v.len()),
        ));
    }
    Ok(v.chunks_exact(b).map(|chunk| chunk.iter().sum()).collect())
}

/// Analytical moments of one grouped coefficient `v'_i`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroupMoments {
    /// `E[|v'_i|^2]`
    pub z4: f64,
    /// `E[|v'_i|]`
    pub z5: f64,
}

/// `E|v'_i|^2 = B` and `E|v'_i| = sqrt(pi)/2 * Gamma(B+1/2)/Gamma(B)`.
///
/// Conditioned on `g`, the group sum is `CN(0, alpha)` with
/// `alpha = sum |g_b|^2 ~ Gamma(B, 1)`, whose mean magnitude is
/// `sqrt(pi alpha)/2`; averaging `sqrt(alpha)` over the Gamma law gives the
/// ratio.
pub fn group_moments(b: usize) -> Result<GroupMoments> {
    let z5 = half_gamma_ratio(b)?;
    Ok(GroupMoments { z4: b as f64, z5 })
}
