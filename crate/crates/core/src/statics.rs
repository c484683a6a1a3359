//! Single-period comparative statics of optimal effort.

use serde::Serialize;

use crate::error::{ModelError, Result};
use crate::model::{cobb_douglas_utility, ContractParams, WorkerPrefs};
use crate::optimize::{golden_section_max, maximize_with_slope};

/// Optimal one-period effort by numerical maximization.
///
/// Additive: `p·ln(ψ(e) − α·w0) + (1−p)·ln(w0) − b·e`, with `ψ(e) = (1+α)·s·e`.
/// Cobb-Douglas: `p·U(ψ(e) − α·w0, e) + (1−p)·U(w0, e)`.
pub fn single_period_optimum(contract: &ContractParams, prefs: &WorkerPrefs, wage_scale: f64) -> Result<f64> {
    let (p, alpha, w0) = (contract.p(), contract.alpha(), contract.w0());
    let pay = move |e: f64| (1.0 + alpha) * wage_scale * e - alpha * w0;
    match *prefs {
        WorkerPrefs::Additive { b, .. } => {
            if p == 0.0 {
                return Ok(0.0);
            }
            if pay(1.0) <= 0.0 {
                return Err(ModelError::Domain(format!(
                    "no effort gives positive evaluated pay at w0 = {w0}"
                )));
            }
            let f = |e: f64| {
                let c = pay(e);
                if c <= 0.0 {
                    f64::NEG_INFINITY
                } else {
                    p * c.ln() - b * e
                }
            };
            let df = |e: f64| {
                let c = pay(e);
                if c <= 0.0 {
                    f64::INFINITY
                } else {
                    p * (1.0 + alpha) * wage_scale / c - b
                }
            };
            Ok(maximize_with_slope(f, df, 0.0, 1.0, 1e-9).x)
        }
        WorkerPrefs::CobbDouglas { gamma, beta, .. } => {
            let f = |e: f64| {
                p * cobb_douglas_utility(pay(e).max(0.0), e, gamma, beta)
                    + (1.0 - p) * cobb_douglas_utility(w0, e, gamma, beta)
            };
            Ok(golden_section_max(f, 0.0, 1.0, 1e-12).x)
        }
    }
}

/// Whether the deserved wage at the optimum is at most the base wage.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// `ŵ(e*) ≤ w0`: evaluation brings a penalty.
    Penalty,
    /// `ŵ(e*) > w0`: evaluation brings a bonus.
    Bonus,
}

/// How a derivative was estimated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Difference {
    Central,
    /// One-sided with Richardson extrapolation, next to a parameter bound.
    OneSided,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Derivative {
    pub value: f64,
    pub method: Difference,
}

/// Sensitivity of optimal one-period effort to the contract terms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Sensitivity {
    pub contract: ContractParams,
    pub effort: f64,
    pub d_p: Derivative,
    pub d_w0: Derivative,
    pub d_alpha: Derivative,
    pub regime: Regime,
    /// Optimal effort sits at 0 or 1.
    pub boundary_optimum: bool,
    /// First-order residual at the optimum; additive family, interior optima only.
    pub foc_residual: Option<f64>,
}

#[derive(Clone, Copy)]
enum Param {
    P,
    Alpha,
    W0,
}

fn derivative<F: Fn(f64) -> Result<f64>>(
    f: F,
    x: f64,
    lo: f64,
    hi: f64,
    relative_step: f64,
) -> Result<Derivative> {
    let h = relative_step * x.abs().max(1.0);
    if x - h >= lo && x + h <= hi {
        return Ok(Derivative {
            value: (f(x + h)? - f(x - h)?) / (2.0 * h),
            method: Difference::Central,
        });
    }
    // step away from the nearer bound
    let dir = if x - h < lo { 1.0 } else { -1.0 };
    let fx = f(x)?;
    let one_sided = |step: f64| -> Result<f64> { Ok((f(x + dir * step)? - fx) / (dir * step)) };
    let coarse = one_sided(h)?;
    let fine = one_sided(0.5 * h)?;
    Ok(Derivative {
        value: 2.0 * fine - coarse,
        method: Difference::OneSided,
    })
}

/// Finite-difference derivatives of `e*` with respect to `p`, `w0` and `α`.
pub fn effort_sensitivity(
    contract: &ContractParams,
    prefs: &WorkerPrefs,
    wage_scale: f64,
    relative_step: f64,
) -> Result<Sensitivity> {
    if !(relative_step > 0.0) {
        return Err(ModelError::Domain(format!("bump must be positive, got {relative_step}")));
    }
    let effort = single_period_optimum(contract, prefs, wage_scale)?;
    let bumped = |param: Param| {
        move |v: f64| -> Result<f64> {
            let c = match param {
                Param::P => ContractParams::new(v, contract.alpha(), contract.w0())?,
                Param::Alpha => ContractParams::new(contract.p(), v, contract.w0())?,
                Param::W0 => ContractParams::new(contract.p(), contract.alpha(), v)?,
            };
            single_period_optimum(&c, prefs, wage_scale)
        }
    };
    let d_p = derivative(bumped(Param::P), contract.p(), 0.0, 1.0, relative_step)?;
    let d_alpha = derivative(bumped(Param::Alpha), contract.alpha(), 0.0, 1.0, relative_step)?;
    let d_w0 = derivative(bumped(Param::W0), contract.w0(), 0.0, f64::INFINITY, relative_step)?;
    let regime = if wage_scale * effort <= contract.w0() + 1e-9 {
        Regime::Penalty
    } else {
        Regime::Bonus
    };
    let boundary_optimum = effort <= 1e-9 || effort >= 1.0 - 1e-9;
    let foc = match prefs {
        WorkerPrefs::Additive { .. } if !boundary_optimum => {
            Some(foc_residual(contract, prefs, wage_scale, effort)?)
        }
        _ => None,
    };
    Ok(Sensitivity {
        contract: *contract,
        effort,
        d_p,
        d_w0,
        d_alpha,
        regime,
        boundary_optimum,
        foc_residual: foc,
    })
}

/// First-order residual `p − v′(e) / (u′(c)·ψ′(e))` for the additive worker,
/// with `c = ψ(e) − α·w0` the evaluated pay. Zero at an interior optimum.
pub fn foc_residual(contract: &ContractParams, prefs: &WorkerPrefs, wage_scale: f64, effort: f64) -> Result<f64> {
    let b = prefs.additive_b()?;
    let slope = (1.0 + contract.alpha()) * wage_scale;
    let c = slope * effort - contract.alpha() * contract.w0();
    if c < 0.0 {
        return Err(ModelError::Domain(format!("evaluated pay {c} is negative at e = {effort}")));
    }
    // u'(c) = 1/c, so v'/(u'·ψ') = b·c/ψ'
    Ok(contract.p() - b * c / slope)
}

/// `p, alpha, w0, effort, d_p, d_w0, d_alpha, regime, boundary_optimum,
/// one_sided, foc_residual` rows; the residual is empty where undefined.
pub fn sensitivity_csv(rows: &[Sensitivity]) -> String {
    let mut out = String::from(
        "p,alpha,w0,effort,d_p,d_w0,d_alpha,regime,boundary_optimum,one_sided,foc_residual\n",
    );
    for s in rows {
        let one_sided = [s.d_p, s.d_w0, s.d_alpha]
            .iter()
            .any(|d| d.method == Difference::OneSided);
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{}\n",
            s.contract.p(),
            s.contract.alpha(),
            s.contract.w0(),
            s.effort,
            s.d_p.value,
            s.d_w0.value,
            s.d_alpha.value,
            match s.regime {
                Regime::Penalty => "penalty",
                Regime::Bonus => "bonus",
            },
            s.boundary_optimum,
            one_sided,
            s.foc_residual.map(|r| r.to_string()).unwrap_or_default()
        ));
    }
    out
}
