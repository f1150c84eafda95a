use serde_json::json;
use sumrules::Error;

pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub kind: &'static str,
    pub message: String,
}

impl Failure {
    pub fn config(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_CONFIG,
            kind: "config",
            message: message.into(),
        }
    }

    pub fn numeric(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_NUMERIC,
            kind: "numeric",
            message: message.into(),
        }
    }

    pub fn io(e: std::io::Error) -> Self {
        Failure {
            code: EXIT_CONFIG,
            kind: "io",
            message: e.to_string(),
        }
    }

    pub fn to_json(&self) -> String {
        json!({"error": {"kind": self.kind, "message": self.message, "exit_code": self.code}}).to_string()
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Accuracy { .. } | Error::Eigen(_) | Error::Fit(_) => Failure::numeric(e.to_string()),
            _ => Failure::config(e.to_string()),
        }
    }
}
