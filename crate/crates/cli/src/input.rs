use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde_json::Value;
use spectral_forge::digitsets::IntSet;
use spectral_forge::Error;

/// Why a command could not produce a verdict.
#[derive(Debug)]
pub enum CliError {
    /// Unreadable or malformed input; exit code 2.
    Input(String),
    Library(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Json(msg) => CliError::Input(msg),
            other => CliError::Library(other),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Library(e) if is_input_error(e) => 2,
            CliError::Library(_) => 1,
        }
    }

    pub fn message(&self) -> String {
        match self {
            CliError::Input(m) => format!("input error: {m}"),
            CliError::Library(e) => e.to_string(),
        }
    }
}

/// Errors caused by the request itself rather than by the mathematics.
fn is_input_error(e: &Error) -> bool {
    matches!(
        e,
        Error::EmptyInput
            | Error::BaseTooSmall(_)
            | Error::DuplicateDigit(_)
            | Error::EmptyDigitSet
            | Error::InvalidForm(_)
            | Error::InvalidParams(_)
            | Error::InvalidVariantParams(_)
            | Error::TDivisibleByBeta { .. }
            | Error::ModulusOverflow(_)
            | Error::ExponentOverflow(_)
            | Error::NegativeExponent(_)
            | Error::Json(_)
    )
}

pub fn read_json(path: &Path) -> Result<Value, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| {
        CliError::Input(format!(
            "{}: line {}, column {}: {e}",
            path.display(),
            e.line(),
            e.column()
        ))
    })
}

pub fn parse_value<T: DeserializeOwned>(path: &Path, v: Value) -> Result<T, CliError> {
    serde_json::from_value(v).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

pub fn read_typed<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let v = read_json(path)?;
    parse_value(path, v)
}

/// A set given either as a bare array or as an object with one of the `keys`,
/// together with the object's `base` when present.
pub fn read_set(path: &Path, keys: &[&str]) -> Result<(IntSet, Option<u64>), CliError> {
    let v = read_json(path)?;
    match v {
        Value::Array(_) => Ok((parse_value(path, v)?, None)),
        Value::Object(mut map) => {
            let base = match map.remove("base") {
                None => None,
                Some(b) => Some(parse_value::<u64>(path, b)?),
            };
            for k in keys {
                if let Some(set) = map.remove(*k) {
                    return Ok((parse_value(path, set)?, base));
                }
            }
            Err(CliError::Input(format!(
                "{}: expected an array or an object with one of {keys:?}",
                path.display()
            )))
        }
        _ => Err(CliError::Input(format!(
            "{}: expected an array or an object",
            path.display()
        ))),
    }
}

pub fn read_digits(path: &Path, base: Option<u64>) -> Result<(IntSet, u64), CliError> {
    let (set, file_base) = read_set(path, &["digits", "residues"])?;
    let base = base
        .or(file_base)
        .ok_or_else(|| CliError::Input("no base given: pass --base or a \"base\" field".into()))?;
    if set.is_empty() {
        return Err(CliError::Library(Error::EmptyDigitSet));
    }
    Ok((set, base))
}
