#![allow(dead_code)]

use crm_core::crm::{BaseParams, CUnits, ModelParams};

pub const BETA0: [f64; 3] = [0.0, -0.05, -0.1];
pub const B1: [f64; 3] = [0.5, 1.5, 3.0];
pub const B2: [f64; 3] = [0.01, 0.2, 0.4];

pub fn base(beta0: f64, b1: f64, b2: f64) -> BaseParams {
    BaseParams { lambda1: (-1.9f64).exp(), lambda2: 8.4f64.exp(), beta0, b1, b2 }
}

pub fn scenario(beta0: f64, b1: f64, b2: f64) -> ModelParams {
    base(beta0, b1, b2).calibrated(2.008, CUnits::PerLambda2Squared).unwrap()
}

pub fn grid() -> Vec<ModelParams> {
    let mut out = Vec::new();
    for beta0 in BETA0 {
        for b2 in B2 {
            for b1 in B1 {
                out.push(scenario(beta0, b1, b2));
            }
        }
    }
    out
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}
