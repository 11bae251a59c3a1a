use epimu::Error;

/// Everything a command can die with, split by exit code: resource limits
/// exit 2, bad input exits 3. Any verdict, including UNSOLVABLE or
/// invalid, is a normal exit 0.
#[derive(Debug)]
pub enum Failure {
    Limit(String),
    Input(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Limit(_) => 2,
            Failure::Input(_) => 3,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Failure::Limit(m) | Failure::Input(m) => m,
        }
    }

    pub fn input(msg: impl Into<String>) -> Failure {
        Failure::Input(msg.into())
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        match e {
            Error::StateLimit { .. } | Error::SearchBudget { .. } => Failure::Limit(e.to_string()),
            other => Failure::Input(other.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Failure {
        Failure::Input(e.to_string())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Failure {
        Failure::Input(format!("malformed JSON: {e}"))
    }
}
