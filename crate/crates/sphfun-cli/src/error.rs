use serde::Serialize;

pub const SCHEMA: &str = "sphfun/1";

/// Exit codes.
pub const EXIT_VERIFY: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_CONVERGENCE: i32 = 3;

#[derive(Debug)]
pub enum CliError {
    /// Bad flags or values.
    Usage { message: String, field: Option<String> },
    /// Unreadable or malformed input file.
    Input(String),
    /// Failure inside the library.
    Lib(sphfun::Error),
}

impl CliError {
    pub fn usage(field: &str, message: impl Into<String>) -> Self {
        CliError::Usage {
            message: message.into(),
            field: Some(field.to_string()),
        }
    }

    pub fn input(message: impl Into<String>) -> Self {
        CliError::Input(message.into())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage { .. } | CliError::Input(_) => EXIT_USAGE,
            CliError::Lib(e) => match e {
                sphfun::Error::Validation { .. } | sphfun::Error::Domain(_) => EXIT_USAGE,
                _ => EXIT_CONVERGENCE,
            },
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Usage { .. } => "usage",
            CliError::Input(_) => "input",
            CliError::Lib(e) => e.kind(),
        }
    }

    pub fn field(&self) -> Option<&str> {
        match self {
            CliError::Usage { field, .. } => field.as_deref(),
            CliError::Lib(sphfun::Error::Validation { field, .. }) => Some(field),
            _ => None,
        }
    }

    pub fn message(&self) -> String {
        match self {
            CliError::Usage { message, .. } | CliError::Input(message) => message.clone(),
            CliError::Lib(e) => e.to_string(),
        }
    }

    /// `{"schema": ..., "error": {"kind", "message", "field"}}`
    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Body<'a> {
            kind: &'a str,
            message: String,
            field: Option<&'a str>,
        }
        #[derive(Serialize)]
        struct Report<'a> {
            schema: &'static str,
            error: Body<'a>,
        }
        let report = Report {
            schema: SCHEMA,
            error: Body {
                kind: self.kind(),
                message: self.message(),
                field: self.field(),
            },
        };
        serde_json::to_string(&report).expect("error report serializes")
    }
}

impl From<sphfun::Error> for CliError {
    fn from(e: sphfun::Error) -> Self {
        CliError::Lib(e)
    }
}
