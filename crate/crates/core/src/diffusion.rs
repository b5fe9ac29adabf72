//! Bass diffusion envelopes for new mode-fuels.
//!
//! The adopted fraction follows `dF/dτ = (α + β F)(1 − F)` from `F(τ̄) = 0`,
//! integrated with classical RK4 at a fixed sub-year step. Coefficients are
//! piecewise constant per calendar year, so every step sees a single value.

use std::collections::BTreeMap;

use crate::model::{BassParams, Instance};
use crate::scenario::ScenarioTree;
use crate::{Error, Result};

pub const STEPS_PER_YEAR: u32 = 100;

/// Closed-form adopted fraction for constant coefficients, `t` years after launch.
pub fn bass_closed_form(alpha: f64, beta: f64, t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    let e = (-(alpha + beta) * t).exp();
    if alpha == 0.0 {
        return 0.0;
    }
    (1.0 - e) / (1.0 + beta / alpha * e)
}

fn rhs(alpha: f64, beta: f64, f: f64) -> f64 {
    (alpha + beta * f) * (1.0 - f)
}

/// Adopted fraction `F` at Jan 1 of every year in `first..=last`; zero up to `start`.
pub fn simulate_fraction(start: i32, alpha: impl Fn(i32) -> f64, beta: impl Fn(i32) -> f64, first: i32, last: i32) -> Vec<f64> {
    let h = 1.0 / STEPS_PER_YEAR as f64;
    let mut out = Vec::with_capacity((last - first + 1).max(0) as usize);
    let mut f = 0.0;
    let mut year = start;
    for tau in first..=last {
        while year < tau {
            let (a, b) = (alpha(year), beta(year));
            for _ in 0..STEPS_PER_YEAR {
                let k1 = rhs(a, b, f);
                let k2 = rhs(a, b, f + 0.5 * h * k1);
                let k3 = rhs(a, b, f + 0.5 * h * k2);
                let k4 = rhs(a, b, f + h * k3);
                f += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            }
            year += 1;
        }
        out.push(if tau <= start { 0.0 } else { f.clamp(0.0, 1.0) });
    }
    out
}

/// Maximal adoption level `A = U F` per year of `first..=last` for one scenario.
pub fn simulate_bass(params: &BassParams, tree: &ScenarioTree, group: usize, s: usize, first: i32, last: i32) -> Vec<f64> {
    let f = simulate_fraction(
        params.start_year,
        |y| params.alpha.at(y) * tree.alpha_multiplier(s, group, y),
        |y| params.beta.at(y) * tree.beta_multiplier(s, group, y),
        first,
        last,
    );
    f.into_iter().map(|v| params.potential * v).collect()
}

/// Effective `(α, β)` of mode-fuel `mf` in `year` under scenario `s`.
pub fn rate_coefficients(inst: &Instance, tree: &ScenarioTree, mf: usize, s: usize, year: i32) -> Result<(f64, f64)> {
    let params = params_of(inst, mf)?;
    let g = inst.group_of(mf);
    Ok((params.alpha.at(year) * tree.alpha_multiplier(s, g, year), params.beta.at(year) * tree.beta_multiplier(s, g, year)))
}

fn params_of(inst: &Instance, mf: usize) -> Result<&BassParams> {
    inst.adoption
        .get(&mf)
        .ok_or_else(|| Error::Model(format!("{}: missing adoption parameters for a new fuel", inst.mode_fuel_label(mf))))
}

/// Adoption envelopes for every new mode-fuel and scenario.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct AdoptionTable {
    pub first_year: i32,
    /// `(mode_fuel, scenario)` to one value per horizon year.
    pub curves: BTreeMap<(usize, usize), Vec<f64>>,
}

impl AdoptionTable {
    pub fn level(&self, mf: usize, s: usize, year: i32) -> Option<f64> {
        self.curves.get(&(mf, s)).map(|c| c[(year - self.first_year) as usize])
    }
}

pub fn adoption_bound_table(inst: &Instance, tree: &ScenarioTree) -> Result<AdoptionTable> {
    let (first, last) = (inst.time.first_year, inst.time.last_year);
    let mut curves = BTreeMap::new();
    for mf in (0..inst.mode_fuels.len()).filter(|&mf| inst.mode_fuels[mf].is_new) {
        let params = params_of(inst, mf)?;
        for s in 0..tree.len() {
            curves.insert((mf, s), simulate_bass(params, tree, inst.group_of(mf), s, first, last));
        }
    }
    Ok(AdoptionTable { first_year: first, curves })
}
