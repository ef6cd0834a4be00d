use critnls::evolution::EvolutionError;
use critnls::exponents::ExponentError;
use critnls::variational::VariationalError;
use critnls::{FieldError, FunctionalError, NonlinearityError};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("ConfigParse: {0}")]
    ConfigParse(String),
    #[error("IOFailure: {0}")]
    Io(String),
    #[error("{0}")]
    Validation(String),
    #[error("{name}: {0}", name = variant(.0))]
    Nonlinearity(#[from] NonlinearityError),
    #[error("{name}: {0}", name = variant(.0))]
    Exponent(#[from] ExponentError),
    #[error("{name}: {0}", name = variant(.0))]
    Field(#[from] FieldError),
    #[error("{name}: {0}", name = variant(.0))]
    Functional(#[from] FunctionalError),
    #[error("{name}: {0}", name = variant(.0))]
    Variational(#[from] VariationalError),
    #[error("{name}: {0}", name = variant(.0))]
    Evolution(#[from] EvolutionError),
}

/// Name of the innermost error variant, e.g. `NonpositiveCoefficient` for
/// `Nonlinearity(NonpositiveCoefficient { .. })`.
fn variant<E: std::fmt::Debug>(e: &E) -> String {
    let dbg = format!("{e:?}");
    let mut rest = dbg.as_str();
    loop {
        let end = rest.find([' ', '(', '{', ')', ',']).unwrap_or(rest.len());
        let inner = &rest[end..];
        match inner.strip_prefix('(') {
            Some(next) if next.starts_with(|c: char| c.is_ascii_uppercase()) => rest = next,
            _ => return rest[..end].to_string(),
        }
    }
}

impl CliError {
    /// 2 for invalid input, 3 when a solver fails to converge, 1 otherwise.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Io(_) => 1,
            CliError::Variational(
                VariationalError::BracketFailure
                | VariationalError::NoBracket { .. }
                | VariationalError::NonconvergedOde(_),
            ) => 3,
            CliError::Evolution(
                EvolutionError::FixedPointDiverged { .. }
                | EvolutionError::InvarianceViolated { .. },
            ) => 3,
            CliError::Field(FieldError::Io(_)) => 1,
            _ => 2,
        }
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn messages_name_the_variant() {
        let e: CliError = NonlinearityError::NonpositiveCoefficient { index: 0, mu: -1.0 }.into();
        assert!(e.to_string().starts_with("NonpositiveCoefficient: "));
        assert_eq!(e.exit_code(), 2);
        let e: CliError = VariationalError::NoBracket { lo: 1.0, hi: 2.0 }.into();
        assert_eq!(e.exit_code(), 3);
        let e: CliError = EvolutionError::FixedPointDiverged {
            iterations: 3,
            change: 1.0,
        }
        .into();
        assert_eq!(e.exit_code(), 3);
        let wrapped: CliError = VariationalError::from(NonlinearityError::EmptyPerturbation).into();
        assert!(wrapped.to_string().starts_with("EmptyPerturbation: "));
    }
}
