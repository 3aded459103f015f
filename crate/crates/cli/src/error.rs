use thiserror::Error;
use wagner_core::catalog::CatalogError;
use wagner_core::expr::ExprError;
use wagner_core::geom::GeomError;
use wagner_core::ode::OdeError;
use wagner_core::revolution::RevolutionError;

/// Failure of a run, split by exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// Bad input: flags, files, expressions, chart definitions.
    #[error("{0}")]
    Config(String),
    /// The computation itself failed.
    #[error("{0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 1,
            CliError::Numerical(_) => 2,
        }
    }

    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }
}

impl From<ExprError> for CliError {
    fn from(e: ExprError) -> Self {
        match e {
            ExprError::Domain(_) => CliError::Numerical(format!("expression: {e}")),
            _ => CliError::Config(format!("expression: {e}")),
        }
    }
}

impl From<GeomError> for CliError {
    fn from(e: GeomError) -> Self {
        match e {
            GeomError::Expr(e) => e.into(),
            GeomError::InvalidChart(_) | GeomError::OutOfDomain { .. } => {
                CliError::Config(e.to_string())
            }
            GeomError::SingularPoint { .. } => CliError::Numerical(format!("SingularPoint: {e}")),
            GeomError::DegenerateMetric { .. } => {
                CliError::Numerical(format!("DegenerateMetric: {e}"))
            }
        }
    }
}

impl From<CatalogError> for CliError {
    fn from(e: CatalogError) -> Self {
        match e {
            CatalogError::Geom(g) => g.into(),
            _ => CliError::Config(e.to_string()),
        }
    }
}

impl From<OdeError> for CliError {
    fn from(e: OdeError) -> Self {
        let name = match &e {
            OdeError::StepUnderflow { .. } => "StepUnderflow",
            OdeError::LeftDomain { .. } => "LeftDomain",
            OdeError::MaxStepsExceeded { .. } => "MaxStepsExceeded",
            OdeError::SingularApproach { .. } => "SingularApproach",
            OdeError::InterpolationError(_) => "InterpolationError",
            OdeError::InvalidConfig(_) => return CliError::Config(e.to_string()),
            OdeError::Geom(g) => return g.clone().into(),
        };
        CliError::Numerical(format!("{name}: {e}"))
    }
}

impl From<RevolutionError> for CliError {
    fn from(e: RevolutionError) -> Self {
        match e {
            RevolutionError::Expr(x) => x.into(),
            RevolutionError::Geom(g) => g.into(),
            RevolutionError::ChartMismatch(_) | RevolutionError::InvalidInput(_) => {
                CliError::Config(e.to_string())
            }
            RevolutionError::TurningPoint { .. } => {
                CliError::Numerical(format!("TurningPoint: {e}"))
            }
            RevolutionError::NonTransversal { .. } => {
                CliError::Numerical(format!("NonTransversal: {e}"))
            }
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Config(format!("i/o: {e}"))
    }
}
