//! Coefficient file written by `lowt coeffs` and read by `lowt verify`.

use serde::{Deserialize, Serialize};

use super::{ExpansionConfig, SeriesResult};
use crate::algebra::Observable;
use crate::green::GreenTable;

pub const COEFFS_SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IndexedCoefficient {
    pub i: usize,
    pub value: f64,
    pub uncertainty: f64,
}

/// Identity of the Green table a result was computed from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GreenTableMeta {
    pub dim: usize,
    pub mass: f64,
    pub radius: u32,
    pub g00: f64,
    /// SHA-256 of the table file, hex encoded.
    pub sha256: String,
}

impl GreenTableMeta {
    pub fn new(table: &GreenTable, sha256: String) -> Self {
        GreenTableMeta {
            dim: table.dim(),
            mass: table.mass(),
            radius: table.radius(),
            g00: table.origin_value(),
            sha256,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoefficientsFile {
    pub schema_version: u32,
    pub d: usize,
    #[serde(rename = "N")]
    pub n_components: usize,
    pub order: usize,
    pub observable: Observable,
    pub coefficients: Vec<IndexedCoefficient>,
    pub radius_schedule: Vec<i32>,
    pub green_table_meta: GreenTableMeta,
    pub config: ExpansionConfig,
    /// Closed-form `a_0..a_2` of the magnetization, when applicable.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub closed_form: Option<Vec<IndexedCoefficient>>,
}

pub fn indexed(result: &SeriesResult) -> Vec<IndexedCoefficient> {
    result
        .coefficients
        .iter()
        .enumerate()
        .map(|(i, c)| IndexedCoefficient {
            i,
            value: c.value,
            uncertainty: c.uncertainty,
        })
        .collect()
}

impl CoefficientsFile {
    pub fn series(&self) -> SeriesResult {
        SeriesResult {
            coefficients: self
                .coefficients
                .iter()
                .map(|c| super::Coefficient {
                    value: c.value,
                    uncertainty: c.uncertainty,
                })
                .collect(),
        }
    }
}
