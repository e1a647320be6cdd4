use crate::HenonMap;
use numeric_core::{Complex, EntireExpr, ParseError};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MapError {
    #[error("the Jacobian parameter must be nonzero")]
    DegenerateParameter,
    #[error("bad expression `{text}`: {source}")]
    Parse {
        text: String,
        #[source]
        source: ParseError,
    },
    #[error("unknown form `{0}` (expected `standard` or `alternative`)")]
    UnknownForm(String),
    #[error("the {0} form needs the `{1}` parameter")]
    MissingParameter(&'static str, &'static str),
    #[error("`{0}` is not a constant")]
    NotConstant(String),
}

/// Map description as written in config files.
///
/// ```toml
/// form = "standard"
/// delta = "1"
/// f = "exp(-z) + 2*z"
/// ```
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MapSpec {
    pub form: String,
    pub f: String,
    #[serde(default)]
    pub delta: Option<String>,
    #[serde(default)]
    pub a: Option<String>,
}

fn parse(text: &str) -> Result<EntireExpr, MapError> {
    text.parse().map_err(|source| MapError::Parse { text: text.to_string(), source })
}

fn constant(text: &str) -> Result<Complex, MapError> {
    parse(text)?.as_const().ok_or_else(|| MapError::NotConstant(text.to_string()))
}

impl MapSpec {
    pub fn build(&self) -> Result<HenonMap, MapError> {
        let f = parse(&self.f)?;
        match self.form.as_str() {
            "standard" => {
                let d = self.delta.as_deref().ok_or(MapError::MissingParameter("standard", "delta"))?;
                HenonMap::standard(f, constant(d)?)
            }
            "alternative" => {
                let a = self.a.as_deref().ok_or(MapError::MissingParameter("alternative", "a"))?;
                HenonMap::alternative(f, constant(a)?)
            }
            other => Err(MapError::UnknownForm(other.to_string())),
        }
    }
}
