use chflow_core::io::KeyValueReport;
use thiserror::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_BREAKDOWN: i32 = 2;
pub const EXIT_CHECK_FAILED: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("parse error{}{}: {message}", line.map(|l| format!(" at line {l}")).unwrap_or_default(), key.as_ref().map(|k| format!(" (key '{k}')")).unwrap_or_default())]
    Parse {
        line: Option<usize>,
        key: Option<String>,
        message: String,
    },
    #[error("invalid configuration: {}", .0.join("; "))]
    Validation(Vec<String>),
    #[error("inadmissible initial data: {condition}: {detail}")]
    Admissibility { condition: String, detail: String },
    #[error("{0}")]
    Usage(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("breakdown: the flow left the chart before t_end ({cause})")]
    Breakdown {
        time: f64,
        min_eta_x: f64,
        cause: chflow_core::Error,
    },
    #[error("numerical failure: {0}")]
    Numerical(chflow_core::Error),
    #[error("{failed} of {total} property checks failed")]
    ChecksFailed { failed: usize, total: usize },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Parse { .. } | Self::Validation(_) | Self::Admissibility { .. } | Self::Usage(_) | Self::Io(_) => {
                EXIT_USAGE
            }
            Self::Breakdown { .. } | Self::Numerical(_) => EXIT_BREAKDOWN,
            Self::ChecksFailed { .. } => EXIT_CHECK_FAILED,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Self::Parse { .. } => "parse_error",
            Self::Validation(_) => "validation_error",
            Self::Admissibility { .. } => "admissibility_error",
            Self::Usage(_) => "usage_error",
            Self::Io(_) => "io_error",
            Self::Breakdown { .. } => "breakdown",
            Self::Numerical(_) => "numerical_failure",
            Self::ChecksFailed { .. } => "checks_failed",
        }
    }

    /// Machine-readable failure report.
    pub fn report(&self) -> KeyValueReport {
        let mut r = KeyValueReport::new();
        r.text("status", "failed")
            .int("exit_code", self.exit_code() as i64)
            .text("kind", self.kind());
        match self {
            Self::Parse { line, key, .. } => {
                if let Some(l) = line {
                    r.int("line", *l as i64);
                }
                if let Some(k) = key {
                    r.text("key", k.clone());
                }
            }
            Self::Validation(v) => {
                r.int("violations", v.len() as i64);
                for (i, m) in v.iter().enumerate() {
                    r.text(format!("violation.{i}"), m.clone());
                }
            }
            Self::Admissibility { condition, .. } => {
                r.text("condition", condition.clone());
            }
            Self::Breakdown { time, min_eta_x, .. } => {
                r.num("breakdown_time", *time).num("min_eta_x", *min_eta_x);
            }
            Self::ChecksFailed { failed, total } => {
                r.int("failed_checks", *failed as i64)
                    .int("total_checks", *total as i64);
            }
            Self::Usage(_) | Self::Io(_) | Self::Numerical(_) => {}
        }
        r.text("message", self.to_string());
        r
    }
}

impl From<chflow_core::Error> for CliError {
    fn from(e: chflow_core::Error) -> Self {
        match e {
            chflow_core::Error::Io(m) => Self::Io(m),
            other => Self::Numerical(other),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::Io(e.to_string())
    }
}
