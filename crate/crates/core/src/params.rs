//! Typed `key=value` overrides shared by the solver parameters and problems.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum ParamValue {
    Int(i64),
    Float(f64),
    Bool(bool),
    Str(String),
}

pub type Overrides = BTreeMap<String, ParamValue>;

impl ParamValue {
    /// Infers the type of a raw token: integer, then float, then bool, else string.
    pub fn infer(raw: &str) -> Self {
        if let Ok(i) = raw.parse::<i64>() {
            return ParamValue::Int(i);
        }
        if let Ok(x) = raw.parse::<f64>() {
            return ParamValue::Float(x);
        }
        match raw {
            "true" | "True" => ParamValue::Bool(true),
            "false" | "False" => ParamValue::Bool(false),
            _ => ParamValue::Str(raw.to_string()),
        }
    }

    pub fn type_name(&self) -> &'static str {
        match self {
            ParamValue::Int(_) => "int",
            ParamValue::Float(_) => "float",
            ParamValue::Bool(_) => "bool",
            ParamValue::Str(_) => "string",
        }
    }

    fn mismatch(&self, key: &str, expected: &str) -> Error {
        Error::InvalidParameter(format!("`{key}` expects {expected}, got {} `{self}`", self.type_name()))
    }

    /// Floats accept integer tokens (`T=6`).
    pub fn as_f64(&self, key: &str) -> Result<f64> {
        match *self {
            ParamValue::Float(x) => Ok(x),
            ParamValue::Int(i) => Ok(i as f64),
            _ => Err(self.mismatch(key, "a float")),
        }
    }

    pub fn as_usize(&self, key: &str) -> Result<usize> {
        match *self {
            ParamValue::Int(i) if i >= 0 => Ok(i as usize),
            _ => Err(self.mismatch(key, "a non-negative integer")),
        }
    }

    pub fn as_bool(&self, key: &str) -> Result<bool> {
        match *self {
            ParamValue::Bool(b) => Ok(b),
            ParamValue::Int(0) => Ok(false),
            ParamValue::Int(1) => Ok(true),
            _ => Err(self.mismatch(key, "a bool")),
        }
    }

    pub fn as_str(&self, key: &str) -> Result<&str> {
        match self {
            ParamValue::Str(s) => Ok(s),
            _ => Err(self.mismatch(key, "a string")),
        }
    }
}

impl core::fmt::Display for ParamValue {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            ParamValue::Int(i) => write!(f, "{i}"),
            ParamValue::Float(x) => write!(f, "{x:?}"),
            ParamValue::Bool(b) => write!(f, "{b}"),
            ParamValue::Str(s) => f.write_str(s),
        }
    }
}
