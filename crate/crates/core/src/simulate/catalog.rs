//! The scenario catalog: a line-based key-value text format and the built-in
//! scenarios shipped with the crate.
//!
//! ```text
//! scenario S2
//! hazard_ae_a = constant 0.00265
//! hazard_ce_a = constant 0.00424
//! hazard_ae_b = constant 0.00246
//! hazard_ce_b = constant 0.0053
//! n_per_group = 400
//! ```
//!
//! Optional lines per group: `censoring_target_a = 0.28` (fraction in (0,1))
//! and `censoring_bound_a = 502.1` (the calibrated uniform upper bound; when
//! omitted it is calibrated on first use). Hazard forms are
//! `constant c`, `linear a`, `quadratic a`, `reciprocal a c`, `power a b`
//! for c, a·t, a·t², a/(t+c) and a·t^b. Lines starting with `#` are comments.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::{CensoringSpec, HazardSpec, ScenarioSpec, SimulateError};

/// Text of the built-in catalog, also shipped at
/// `crates/core/src/simulate/scenarios.catalog`.
pub const BUILTIN_CATALOG_TEXT: &str = include_str!("scenarios.catalog");

/// All built-in scenarios (S1..S10), with calibrated censoring bounds.
pub fn builtin_catalog() -> Vec<ScenarioSpec> {
    parse_catalog(BUILTIN_CATALOG_TEXT).expect("built-in catalog parses")
}

/// Looks up a built-in scenario by id (case-sensitive).
pub fn builtin_scenario(id: &str) -> Option<ScenarioSpec> {
    builtin_catalog().into_iter().find(|s| s.id == id)
}

#[derive(Default)]
struct Partial {
    id: String,
    start_line: usize,
    hazard_ae_a: Option<HazardSpec>,
    hazard_ce_a: Option<HazardSpec>,
    hazard_ae_b: Option<HazardSpec>,
    hazard_ce_b: Option<HazardSpec>,
    n_per_group: Option<u32>,
    target_a: Option<f64>,
    target_b: Option<f64>,
    bound_a: Option<f64>,
    bound_b: Option<f64>,
}

impl Partial {
    fn finish(self) -> Result<ScenarioSpec, SimulateError> {
        let line = self.start_line;
        let missing = |what: &str| SimulateError::CatalogParse {
            line,
            message: alloc::format!("scenario {} is missing {what}", self.id),
        };
        let censoring = |target: Option<f64>, bound: Option<f64>, label: &str| match (target, bound)
        {
            (Some(target), bound) => Ok(Some(CensoringSpec { target, bound })),
            (None, Some(_)) => Err(SimulateError::CatalogParse {
                line,
                message: alloc::format!("censoring_bound_{label} given without censoring_target_{label}"),
            }),
            (None, None) => Ok(None),
        };
        let spec = ScenarioSpec {
            hazard_ae_a: self.hazard_ae_a.ok_or_else(|| missing("hazard_ae_a"))?,
            hazard_ce_a: self.hazard_ce_a.ok_or_else(|| missing("hazard_ce_a"))?,
            hazard_ae_b: self.hazard_ae_b.ok_or_else(|| missing("hazard_ae_b"))?,
            hazard_ce_b: self.hazard_ce_b.ok_or_else(|| missing("hazard_ce_b"))?,
            n_per_group: self.n_per_group.ok_or_else(|| missing("n_per_group"))?,
            censoring_a: censoring(self.target_a, self.bound_a, "a")?,
            censoring_b: censoring(self.target_b, self.bound_b, "b")?,
            id: self.id,
        };
        spec.validate().map_err(|e| SimulateError::CatalogParse {
            line,
            message: alloc::format!("{e}"),
        })?;
        Ok(spec)
    }
}

/// Parses catalog text into scenarios. Accepts the same format for custom
/// scenario files.
pub fn parse_catalog(text: &str) -> Result<Vec<ScenarioSpec>, SimulateError> {
    let mut scenarios = Vec::new();
    let mut current: Option<Partial> = None;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }

        if let Some(id) = line.strip_prefix("scenario") {
            let id = id.trim();
            if id.is_empty() || id.contains(char::is_whitespace) {
                return Err(SimulateError::CatalogParse {
                    line: line_no,
                    message: "scenario header needs a single identifier".to_string(),
                });
            }
            if let Some(done) = current.take() {
                scenarios.push(done.finish()?);
            }
            current = Some(Partial { id: id.to_string(), start_line: line_no, ..Partial::default() });
            continue;
        }

        let partial = current.as_mut().ok_or_else(|| SimulateError::CatalogParse {
            line: line_no,
            message: "expected a `scenario <id>` header first".to_string(),
        })?;
        let (key, value) = line.split_once('=').ok_or_else(|| SimulateError::CatalogParse {
            line: line_no,
            message: "expected `key = value`".to_string(),
        })?;
        let key = key.trim();
        let value = value.trim();
        match key {
            "hazard_ae_a" => partial.hazard_ae_a = Some(parse_hazard(value, line_no)?),
            "hazard_ce_a" => partial.hazard_ce_a = Some(parse_hazard(value, line_no)?),
            "hazard_ae_b" => partial.hazard_ae_b = Some(parse_hazard(value, line_no)?),
            "hazard_ce_b" => partial.hazard_ce_b = Some(parse_hazard(value, line_no)?),
            "n_per_group" => {
                partial.n_per_group =
                    Some(value.parse().map_err(|_| SimulateError::CatalogParse {
                        line: line_no,
                        message: alloc::format!("bad group size `{value}`"),
                    })?)
            }
            "censoring_target_a" => partial.target_a = Some(parse_number(value, line_no)?),
            "censoring_target_b" => partial.target_b = Some(parse_number(value, line_no)?),
            "censoring_bound_a" => partial.bound_a = Some(parse_number(value, line_no)?),
            "censoring_bound_b" => partial.bound_b = Some(parse_number(value, line_no)?),
            other => {
                return Err(SimulateError::CatalogParse {
                    line: line_no,
                    message: alloc::format!("unknown key `{other}`"),
                })
            }
        }
    }
    if let Some(done) = current.take() {
        scenarios.push(done.finish()?);
    }
    if scenarios.is_empty() {
        return Err(SimulateError::CatalogParse {
            line: 0,
            message: "catalog contains no scenarios".to_string(),
        });
    }
    Ok(scenarios)
}

fn parse_number(value: &str, line: usize) -> Result<f64, SimulateError> {
    value.parse().map_err(|_| SimulateError::CatalogParse {
        line,
        message: alloc::format!("bad number `{value}`"),
    })
}

fn parse_hazard(value: &str, line: usize) -> Result<HazardSpec, SimulateError> {
    let mut parts = value.split_whitespace();
    let form = parts.next().unwrap_or("");
    let mut param = |name: &str| -> Result<f64, SimulateError> {
        let raw = parts.next().ok_or_else(|| SimulateError::CatalogParse {
            line,
            message: alloc::format!("hazard `{form}` is missing parameter {name}"),
        })?;
        parse_number(raw, line)
    };
    let hazard = match form {
        "constant" => HazardSpec::Constant(param("c")?),
        "linear" => HazardSpec::Linear(param("a")?),
        "quadratic" => HazardSpec::Quadratic(param("a")?),
        "reciprocal" => {
            HazardSpec::Reciprocal { scale: param("a")?, shift: param("c")? }
        }
        "power" => HazardSpec::Power { scale: param("a")?, exponent: param("b")? },
        other => {
            return Err(SimulateError::CatalogParse {
                line,
                message: alloc::format!("unknown hazard form `{other}`"),
            })
        }
    };
    if parts.next().is_some() {
        return Err(SimulateError::CatalogParse {
            line,
            message: alloc::format!("hazard `{form}` has extra parameters"),
        });
    }
    Ok(hazard)
}
