use std::path::{Path, PathBuf};

use kgvar::energy::PhysicalConstants;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::report::Failure;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Units {
    Nondim,
    Si,
}

impl Units {
    pub fn constants(self) -> PhysicalConstants {
        match self {
            Units::Nondim => PhysicalConstants::nondimensional(),
            Units::Si => PhysicalConstants::electron_si(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Units::Nondim => "nondimensional",
            Units::Si => "si",
        }
    }
}

pub struct Context {
    pub units: Units,
    pub consts: PhysicalConstants,
    pub out: Option<PathBuf>,
}

/// `{"units": "si", "<command>": {<flag>: <value>, ...}}`.
#[derive(Default)]
pub struct ConfigFile {
    pub units: Option<Units>,
    sections: Map<String, Value>,
}

const COMMANDS: [&str; 7] = ["eig", "reduce-check", "residual", "boost", "spin", "entropy", "christoffel"];

impl ConfigFile {
    pub fn load(path: Option<&Path>) -> Result<Self, Failure> {
        let Some(path) = path else {
            return Ok(ConfigFile::default());
        };
        let text = std::fs::read_to_string(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
        let value: Value =
            serde_json::from_str(&text).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
        let Value::Object(mut map) = value else {
            return Err(Failure::usage("config file must hold a JSON object"));
        };
        let units = match map.remove("units") {
            None => None,
            Some(v) => Some(serde_json::from_value(v).map_err(|e| Failure::usage(format!("units: {e}")))?),
        };
        if let Some(k) = map.keys().find(|k| !COMMANDS.contains(&k.as_str())) {
            return Err(Failure::usage(format!("unknown config section `{k}`")));
        }
        Ok(ConfigFile { units, sections: map })
    }

    /// Overlays the section for `command` on the parsed flags and re-validates.
    pub fn apply<T: Serialize + DeserializeOwned + Validate>(&self, command: &str, args: T) -> Result<T, Failure> {
        let merged = match self.sections.get(command) {
            None => args,
            Some(Value::Object(over)) => {
                let mut base = serde_json::to_value(&args).map_err(|e| Failure::usage(e.to_string()))?;
                let obj = base.as_object_mut().expect("argument structs serialize to objects");
                for (k, v) in over {
                    let key = k.replace('-', "_");
                    if !obj.contains_key(&key) {
                        return Err(Failure::usage(format!("unknown key `{k}` in config section `{command}`")));
                    }
                    obj.insert(key, v.clone());
                }
                serde_json::from_value(base).map_err(|e| Failure::usage(format!("config section `{command}`: {e}")))?
            }
            Some(_) => return Err(Failure::usage(format!("config section `{command}` must be an object"))),
        };
        merged.validate()?;
        Ok(merged)
    }
}

/// Precondition checks run before any computation.
pub trait Validate {
    fn validate(&self) -> Result<(), Failure>;
}

pub fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), Failure> {
    if cond {
        Ok(())
    } else {
        Err(Failure::usage(msg()))
    }
}
