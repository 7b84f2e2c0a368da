pub mod certify;
pub mod eigen;
pub mod qmaxcut;
pub mod search;
pub mod stability;

use std::path::Path;

use anyhow::anyhow;
use spherestab::stability::FunctionSpec;

use crate::failure::Failure;
use crate::output;

/// `fopt`, an inline JSON object, or a path to a JSON file.
pub fn function_spec(arg: &str) -> Result<FunctionSpec, Failure> {
    let trimmed = arg.trim();
    if trimmed == "fopt" {
        return Ok(FunctionSpec::Fopt);
    }
    let (text, origin) = if trimmed.starts_with('{') {
        (trimmed.to_string(), "inline function spec".to_string())
    } else {
        (output::read(Path::new(trimmed))?, format!("function spec {trimmed}"))
    };
    serde_json::from_str(&text).map_err(|e| {
        let at = if e.line() > 0 {
            format!(" at line {}, column {}", e.line(), e.column())
        } else {
            String::new()
        };
        Failure::Data(anyhow!(
            "{origin}{at}: {e}; expected an object tagged by \"kind\": \
             fopt | constant | orthogonal | piecewise | shell_harmonic | random"
        ))
    })
}

pub fn check_count(what: &str, count: usize) -> Result<usize, Failure> {
    if count < 2 {
        return Err(Failure::Data(anyhow!("{what} must be at least 2, got {count}")));
    }
    Ok(count)
}
