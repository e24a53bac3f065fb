use crate::error::{Error, Result};
use crate::grid::{sample_on_j, sample_on_r, GridGeometry, JField, RField};

/// Scattering and absorption coefficients sampled on both grid families.
///
/// The coefficients are sampled independently at R and J locations; nothing
/// is interpolated between the two grids.
#[derive(Debug, Clone, PartialEq)]
pub struct MaterialField {
    pub sigma_s_r: RField,
    pub sigma_a_r: RField,
    pub sigma_s_j: JField,
    pub sigma_a_j: JField,
}

impl MaterialField {
    /// Samples `σ_s(x, y)` and `σ_a(x, y)` at every grid location.
    pub fn from_fns(
        sigma_s: impl Fn(f64, f64) -> f64,
        sigma_a: impl Fn(f64, f64) -> f64,
        g: &GridGeometry,
    ) -> Result<Self> {
        let m = Self {
            sigma_s_r: sample_on_r(&sigma_s, g),
            sigma_a_r: sample_on_r(&sigma_a, g),
            sigma_s_j: sample_on_j(&sigma_s, g),
            sigma_a_j: sample_on_j(&sigma_a, g),
        };
        m.check_signs()?;
        Ok(m)
    }

    pub fn uniform(sigma_s: f64, sigma_a: f64, g: &GridGeometry) -> Result<Self> {
        Self::from_fns(|_, _| sigma_s, |_, _| sigma_a, g)
    }

    fn check_signs(&self) -> Result<()> {
        let all = self
            .sigma_s_r
            .iter()
            .chain(self.sigma_s_j.iter())
            .chain(self.sigma_a_r.iter())
            .chain(self.sigma_a_j.iter());
        for v in all {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::InvalidMaterial(format!(
                    "cross sections must be finite and nonnegative (found {v})"
                )));
            }
        }
        Ok(())
    }

    pub fn check_geometry(&self, g: &GridGeometry) -> Result<()> {
        self.sigma_s_r.check_geometry(g)?;
        self.sigma_a_r.check_geometry(g)?;
        self.sigma_s_j.check_geometry(g)?;
        self.sigma_a_j.check_geometry(g)
    }

    /// Largest absorption coefficient over all samples.
    pub fn sigma_a_max(&self) -> f64 {
        self.sigma_a_r
            .iter()
            .chain(self.sigma_a_j.iter())
            .fold(0.0, f64::max)
    }

    /// Smallest `σ_t = σ_s + ε² σ_a` over all samples.
    pub fn sigma_t_min(&self, epsilon: f64) -> f64 {
        let e2 = epsilon * epsilon;
        let r = self
            .sigma_s_r
            .iter()
            .zip(self.sigma_a_r.iter())
            .map(|(s, a)| s + e2 * a);
        let j = self
            .sigma_s_j
            .iter()
            .zip(self.sigma_a_j.iter())
            .map(|(s, a)| s + e2 * a);
        r.chain(j).fold(f64::INFINITY, f64::min)
    }

    /// Fails with `InvalidMaterial` unless `σ_t > 0` everywhere.
    pub fn require_positive_total(&self, epsilon: f64) -> Result<f64> {
        let st = self.sigma_t_min(epsilon);
        if !(st > 0.0) {
            return Err(Error::InvalidMaterial(format!(
                "total cross section must be positive everywhere (min σ_t = {st})"
            )));
        }
        Ok(st)
    }

    pub fn has_absorption(&self) -> bool {
        self.sigma_a_max() > 0.0
    }
}
