use std::path::Path;

use elastic_core::Error;

/// Why a command did not succeed; decides the exit code.
#[derive(Debug)]
pub enum Failure {
    /// Bad flags, unreadable or malformed input. Exit 2.
    Usage(String),
    /// A check, bound or run failed. Exit 1.
    Check(String),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Check(_) => 1,
            Failure::Usage(_) => 2,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Check(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidArgument(_)
            | Error::CurveSpec { .. }
            | Error::Json(_)
            | Error::InvalidSampleCount(_)
            | Error::NonConvexRequest { .. }
            | Error::LengthChangingMode
            | Error::ScanWindowTooSmall { .. }
            | Error::NonZeroMean { .. } => Failure::Usage(e.to_string()),
            _ => Failure::Check(e.to_string()),
        }
    }
}

pub fn read_text(path: &Path, what: &str) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("cannot read {what} {}: {e}", path.display())))
}

/// Prefix a core error with the file it came from.
pub fn in_file(path: &Path) -> impl Fn(Error) -> Failure + '_ {
    move |e| match Failure::from(e) {
        Failure::Usage(m) => Failure::Usage(format!("{}: {m}", path.display())),
        Failure::Check(m) => Failure::Check(format!("{}: {m}", path.display())),
    }
}
