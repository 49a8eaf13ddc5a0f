//! Plain-text model files.
//!
//! ```text
//! format = oddsprob-model
//! version = 1
//! kind = fl_glm
//! beta = 1.0123
//! log_likelihood = -1234.5
//! mean_normaliser = 0.9876
//! rows = 380
//! outcomes = 3
//! successes = 1
//! iterations = 52
//! optimizer = golden_section
//! ```
//!
//! Lists are comma separated; multinomial coefficient rows are separated by
//! `;`. Floats use Rust's shortest round-trip formatting.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::{FitMetadata, FittedModel, GlmError, ModelParameters};
use crate::odds::Method;

pub const MODEL_FORMAT_NAME: &str = "oddsprob-model";
pub const MODEL_FORMAT_VERSION: u32 = 1;

pub(crate) fn write_model(model: &FittedModel) -> String {
    let mut out = String::new();
    let mut line = |key: &str, value: String| {
        let _ = writeln!(out, "{key} = {value}");
    };
    line("format", MODEL_FORMAT_NAME.to_string());
    line("version", MODEL_FORMAT_VERSION.to_string());
    line("kind", model.kind().as_str().to_string());
    match &model.parameters {
        ModelParameters::FlGlm { beta } => line("beta", beta.to_string()),
        ModelParameters::FlGlmTwoBeta {
            beta_decisive,
            beta_draw,
            draw_column,
        } => {
            line("beta_decisive", beta_decisive.to_string());
            line("beta_draw", beta_draw.to_string());
            line("draw_column", draw_column.to_string());
        }
        ModelParameters::MultinomialLogistic {
            coefficients,
            reference_class,
        } => {
            let rows: Vec<String> = coefficients.iter().map(|r| join(r)).collect();
            line("coefficients", rows.join(";"));
            line("reference_class", reference_class.to_string());
        }
        ModelParameters::OrderedLogistic {
            coefficients,
            thresholds,
        } => {
            line("coefficients", join(coefficients));
            line("thresholds", join(thresholds));
        }
    }
    line("log_likelihood", model.log_likelihood.to_string());
    if let Some(m) = model.mean_normaliser {
        line("mean_normaliser", m.to_string());
    }
    let meta = &model.metadata;
    line("rows", meta.rows.to_string());
    line("outcomes", meta.outcomes.to_string());
    line("successes", meta.successes.to_string());
    line("iterations", meta.iterations.to_string());
    line("optimizer", meta.optimizer.clone());
    out
}

fn join(values: &[f64]) -> String {
    values.iter().map(f64::to_string).collect::<Vec<_>>().join(",")
}

struct Fields {
    values: BTreeMap<String, (usize, String)>,
}

impl Fields {
    fn raw(&self, key: &str) -> Result<(usize, &str), GlmError> {
        self.values
            .get(key)
            .map(|(line, v)| (*line, v.as_str()))
            .ok_or_else(|| GlmError::Format {
                line: 0,
                message: format!("missing key `{key}`"),
            })
    }

    fn parse<T: std::str::FromStr>(&self, key: &str) -> Result<T, GlmError>
    where
        T::Err: std::fmt::Display,
    {
        let (line, raw) = self.raw(key)?;
        raw.parse().map_err(|e: T::Err| GlmError::Format {
            line,
            message: format!("`{key}`: {e}"),
        })
    }

    fn floats(&self, key: &str) -> Result<Vec<f64>, GlmError> {
        let (line, raw) = self.raw(key)?;
        parse_list(raw, line, key)
    }
}

fn parse_list(raw: &str, line: usize, key: &str) -> Result<Vec<f64>, GlmError> {
    raw.split(',')
        .map(|v| {
            v.trim().parse::<f64>().map_err(|e| GlmError::Format {
                line,
                message: format!("`{key}`: {e}"),
            })
        })
        .collect()
}

pub(crate) fn read_model(text: &str) -> Result<FittedModel, GlmError> {
    let mut values = BTreeMap::new();
    for (index, raw) in text.lines().enumerate() {
        let line = index + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let Some((key, value)) = trimmed.split_once('=') else {
            return Err(GlmError::Format {
                line,
                message: "expected `key = value`".into(),
            });
        };
        let key = key.trim().to_string();
        if values.insert(key.clone(), (line, value.trim().to_string())).is_some() {
            return Err(GlmError::Format {
                line,
                message: format!("duplicate key `{key}`"),
            });
        }
    }
    let fields = Fields { values };

    let (line, name) = fields.raw("format")?;
    if name != MODEL_FORMAT_NAME {
        return Err(GlmError::Format {
            line,
            message: format!("not a model file (format `{name}`)"),
        });
    }
    let version: u32 = fields.parse("version")?;
    if version != MODEL_FORMAT_VERSION {
        return Err(GlmError::Format {
            line: fields.raw("version")?.0,
            message: format!("unsupported version {version}"),
        });
    }
    let kind: Method = fields.parse("kind")?;
    let parameters = match kind {
        Method::FlGlm => ModelParameters::FlGlm {
            beta: fields.parse("beta")?,
        },
        Method::FlGlmTwoBeta => ModelParameters::FlGlmTwoBeta {
            beta_decisive: fields.parse("beta_decisive")?,
            beta_draw: fields.parse("beta_draw")?,
            draw_column: fields.parse("draw_column")?,
        },
        Method::MultinomialLogistic => {
            let (line, raw) = fields.raw("coefficients")?;
            let coefficients = raw
                .split(';')
                .map(|row| parse_list(row, line, "coefficients"))
                .collect::<Result<Vec<_>, _>>()?;
            ModelParameters::MultinomialLogistic {
                coefficients,
                reference_class: fields.parse("reference_class")?,
            }
        }
        Method::OrderedLogistic => ModelParameters::OrderedLogistic {
            coefficients: fields.floats("coefficients")?,
            thresholds: fields.floats("thresholds")?,
        },
        other => {
            return Err(GlmError::Format {
                line: fields.raw("kind")?.0,
                message: format!("`{other}` is not a fitted model"),
            })
        }
    };
    let mean_normaliser = match fields.values.contains_key("mean_normaliser") {
        true => Some(fields.parse("mean_normaliser")?),
        false => None,
    };
    Ok(FittedModel {
        parameters,
        log_likelihood: fields.parse("log_likelihood")?,
        mean_normaliser,
        metadata: FitMetadata {
            rows: fields.parse("rows")?,
            outcomes: fields.parse("outcomes")?,
            successes: fields.parse("successes")?,
            iterations: fields.parse("iterations")?,
            optimizer: fields.raw("optimizer")?.1.to_string(),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn metadata() -> FitMetadata {
        FitMetadata {
            rows: 380,
            outcomes: 3,
            successes: 1,
            iterations: 41,
            optimizer: "golden_section".into(),
        }
    }

    #[test]
    fn round_trips_every_kind() {
        let models = [
            ModelParameters::FlGlm { beta: 1.0123456789012345 },
            ModelParameters::FlGlmTwoBeta {
                beta_decisive: 1.02,
                beta_draw: 0.1 + 0.2,
                draw_column: 1,
            },
            ModelParameters::MultinomialLogistic {
                coefficients: vec![vec![0.0; 4], vec![-1.5, 2.0, 1e-300, -3.25], vec![0.1, 0.2, 0.3, 0.4]],
                reference_class: 0,
            },
            ModelParameters::OrderedLogistic {
                coefficients: vec![4.0, -0.5, -3.9],
                thresholds: vec![-0.25, 0.75],
            },
        ];
        for parameters in models {
            let model = FittedModel {
                parameters,
                log_likelihood: -412.123456789,
                mean_normaliser: Some(0.987654321),
                metadata: metadata(),
            };
            let text = model.to_text();
            assert_eq!(FittedModel::from_text(&text).unwrap(), model, "{text}");
        }
    }

    #[test]
    fn reports_the_offending_line() {
        let text = "format = oddsprob-model\nversion = 1\nkind = fl_glm\nbeta = abc\n";
        match read_model(text) {
            Err(GlmError::Format { line, .. }) => assert_eq!(line, 4),
            other => panic!("{other:?}"),
        }
        assert!(matches!(read_model("format = other\n"), Err(GlmError::Format { line: 1, .. })));
        assert!(matches!(
            read_model("format = oddsprob-model\nversion = 9\n"),
            Err(GlmError::Format { line: 2, .. })
        ));
        assert!(matches!(read_model("garbage"), Err(GlmError::Format { line: 1, .. })));
    }
}
