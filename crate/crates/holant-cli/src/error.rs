use holant::classify::ClassifyError;
use holant::eval::EvalError;
use holant::field::FieldError;
use holant::gadget::GadgetError;
use holant::grid::GridError;
use holant::holo::HoloError;
use holant::lattice::LatticeError;
use holant::signature::SignatureError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Signature(#[from] SignatureError),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Holo(#[from] HoloError),
    #[error(transparent)]
    Gadget(#[from] GadgetError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Classify(#[from] ClassifyError),
    #[error("cannot read {0}: {1}")]
    Io(String, std::io::Error),
    #[error("{0}")]
    Input(String),
}

impl CliError {
    /// Name of the originating module's error type.
    pub fn module(&self) -> &'static str {
        match self {
            CliError::Field(_) => "FieldError",
            CliError::Signature(_) => "SignatureError",
            CliError::Grid(_) => "GridError",
            CliError::Holo(_) => "HoloError",
            CliError::Gadget(_) => "GadgetError",
            CliError::Eval(_) => "EvalError",
            CliError::Lattice(_) => "LatticeError",
            CliError::Classify(_) => "ClassifyError",
            CliError::Io(..) => "IoError",
            CliError::Input(_) => "InputError",
        }
    }

    /// Malformed input is a usage error; everything else is a domain error.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Io(..) | CliError::Input(_) => 2,
            CliError::Field(FieldError::Parse { .. }) | CliError::Grid(GridError::Parse { .. }) => 2,
            CliError::Gadget(GadgetError::Syntax { .. }) => 2,
            CliError::Classify(ClassifyError::BadParams(_) | ClassifyError::Field(FieldError::Parse { .. })) => 2,
            _ => 1,
        }
    }
}
