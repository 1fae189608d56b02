use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Spec(String),
    #[error(transparent)]
    Core(#[from] coherent_quant::Error),
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    /// Stable machine-readable category.
    pub fn kind(&self) -> &'static str {
        use coherent_quant::Error as E;
        match self {
            CliError::Spec(_) => "spec",
            CliError::Io(_) | CliError::Csv(_) => "io",
            CliError::Core(e) => match e {
                E::Config(_) => "config",
                E::NotHermitian(_) => "not_hermitian",
                E::TruncationRadius { .. } => "truncation_radius",
                E::Quadrature(_) => "quadrature",
                E::Inadmissible(_) => "inadmissible",
                E::Unsupported(_) => "unsupported",
                E::Richardson(_) => "richardson",
                E::DegenerateMetric { .. } => "degenerate_metric",
                E::ChartDomain { .. } => "chart_domain",
                E::LevelSet(_) => "level_set",
                E::NotBracketed { .. } => "not_bracketed",
                E::GridTail { .. } => "grid_tail",
                E::Parse { .. } => "parse",
                E::Invalid(_) => "invalid",
            },
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) | CliError::Csv(_) => 1,
            _ => 2,
        }
    }
}
