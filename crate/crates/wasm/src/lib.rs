//! Browser bindings. Each export returns a JSON string the page plots.

use boolpred::boolfn::{SymmetricProfile, TieRule, TruthTable};
use boolpred::bounds::{bound_set, gaussian_entropy_approx, h_maj_quadratic_lb};
use boolpred::exact::{h_maj_given_y, seq_cost, seq_cost_symmetric, ChannelParams, LossKind};
use serde::Serialize;
use wasm_bindgen::prelude::*;

/// Largest arity the page offers; the symmetric engine is cubic in `n`.
pub const MAX_CURVE_ARITY: u32 = 401;
/// Largest arity for the per-step view, which also runs the dense engine.
pub const MAX_STEP_ARITY: u32 = 14;

#[derive(Debug, Serialize)]
pub struct CostCurves {
    pub n: u32,
    pub alpha: Vec<f64>,
    pub majority: Vec<f64>,
    pub dictator: Vec<f64>,
    pub lower_bound: Vec<f64>,
    pub majority_upper_leading: Vec<f64>,
    /// `None` at `alpha = 0`.
    pub majority_lower_leading: Vec<Option<f64>>,
}

#[derive(Debug, Serialize)]
pub struct StepProfile {
    pub n: u32,
    pub alpha: f64,
    pub majority: Vec<f64>,
    pub dictator: Vec<f64>,
    pub parity: Vec<f64>,
}

#[derive(Debug, Serialize)]
pub struct EntropyCurves {
    pub n: u32,
    pub alpha: Vec<f64>,
    pub exact: Vec<f64>,
    pub gaussian: Vec<f64>,
    pub quadratic_lb: Vec<f64>,
}

fn err(e: boolpred::Error) -> String {
    e.to_string()
}

fn grid(points: u32, from: f64) -> Result<Vec<f64>, String> {
    if points < 2 {
        return Err("need at least two grid points".into());
    }
    Ok((0..points).map(|i| from + (0.5 - from) * i as f64 / (points - 1) as f64).collect())
}

fn check_arity(n: u32, max: u32) -> Result<(), String> {
    if n == 0 || n > max {
        return Err(format!("n must lie in 1..={max}"));
    }
    Ok(())
}

pub fn cost_curves_data(n: u32, points: u32) -> Result<CostCurves, String> {
    check_arity(n, MAX_CURVE_ARITY)?;
    let alpha = grid(points, 0.0)?;
    let maj = SymmetricProfile::majority(n, TieRule::Ones).map_err(err)?;
    let mut out = CostCurves {
        n,
        alpha: alpha.clone(),
        majority: Vec::new(),
        dictator: Vec::new(),
        lower_bound: Vec::new(),
        majority_upper_leading: Vec::new(),
        majority_lower_leading: Vec::new(),
    };
    for a in alpha {
        let ch = ChannelParams::new(a).map_err(err)?;
        let bounds = bound_set(n, a).map_err(err)?;
        out.majority.push(seq_cost_symmetric(&maj, ch, LossKind::Quadratic).map_err(err)?.total);
        out.dictator.push(bounds.dic_noisy.value);
        out.lower_bound.push(bounds.noisy_lb.value);
        out.majority_upper_leading.push(bounds.maj_noisy_ub_leading.value);
        out.majority_lower_leading.push(bounds.maj_noisy_lb_leading.map(|b| b.value));
    }
    Ok(out)
}

pub fn step_profile_data(n: u32, alpha: f64) -> Result<StepProfile, String> {
    check_arity(n, MAX_STEP_ARITY)?;
    let ch = ChannelParams::new(alpha).map_err(err)?;
    let sym = |s: SymmetricProfile| seq_cost_symmetric(&s, ch, LossKind::Quadratic).map(|r| r.per_step);
    let dictator = TruthTable::dictator(n, 1).map_err(err)?;
    Ok(StepProfile {
        n,
        alpha,
        majority: sym(SymmetricProfile::majority(n, TieRule::Ones).map_err(err)?).map_err(err)?,
        dictator: seq_cost(&dictator, ch, LossKind::Quadratic).map_err(err)?.per_step,
        parity: sym(SymmetricProfile::parity(n).map_err(err)?).map_err(err)?,
    })
}

pub fn entropy_curves_data(n: u32, points: u32) -> Result<EntropyCurves, String> {
    check_arity(n, MAX_CURVE_ARITY)?;
    if n.is_multiple_of(2) {
        return Err("n must be odd".into());
    }
    // The Gaussian and quadratic curves are undefined at alpha = 0.
    let alpha = grid(points, 0.01)?;
    let mut out = EntropyCurves {
        n,
        alpha: alpha.clone(),
        exact: Vec::new(),
        gaussian: Vec::new(),
        quadratic_lb: Vec::new(),
    };
    for a in alpha {
        out.exact.push(h_maj_given_y(n, ChannelParams::new(a).map_err(err)?).map_err(err)?);
        out.gaussian.push(gaussian_entropy_approx(a).map_err(err)?);
        out.quadratic_lb.push(h_maj_quadratic_lb(a).map_err(err)?);
    }
    Ok(out)
}

fn to_js<T: Serialize>(r: Result<T, String>) -> Result<String, JsError> {
    let value = r.map_err(|e| JsError::new(&e))?;
    serde_json::to_string(&value).map_err(|e| JsError::new(&e.to_string()))
}

/// Majority and dictator SMSE with the noisy bounds, over `points` values of alpha.
#[wasm_bindgen]
pub fn cost_curves(n: u32, points: u32) -> Result<String, JsError> {
    to_js(cost_curves_data(n, points))
}

/// Per-step SMSE of majority, dictator and parity at one alpha.
#[wasm_bindgen]
pub fn step_profile(n: u32, alpha: f64) -> Result<String, JsError> {
    to_js(step_profile_data(n, alpha))
}

/// `H(maj | Y^n)` against its Gaussian limit and the quadratic lower curve.
#[wasm_bindgen]
pub fn entropy_curves(n: u32, points: u32) -> Result<String, JsError> {
    to_js(entropy_curves_data(n, points))
}
