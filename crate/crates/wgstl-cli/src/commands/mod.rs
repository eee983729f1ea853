//! One module per subcommand, plus shared input-loading helpers.

pub mod eval;
pub mod inspect;
pub mod make_graph;
pub mod monitor;
pub mod predict;
pub mod synth;
pub mod train;

use std::path::Path;

use wgstl::{Dataset, Error, Graph, Result, TrainedModel};

/// Re-tag failures while reading an input file as validation errors naming
/// the path, so a missing or malformed input exits with code 2 and a
/// message that says which file is at fault.
fn annotate(path: &Path, err: Error) -> Error {
    match err {
        Error::Io(io) => Error::InvalidData(format!("cannot read `{}`: {io}", path.display())),
        Error::Json(e) => {
            Error::InvalidData(format!("malformed JSON in `{}`: {e}", path.display()))
        }
        Error::Schema {
            path: field,
            message,
        } => Error::Schema {
            path: format!("{}: {field}", path.display()),
            message,
        },
        other => other,
    }
}

pub(crate) fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidData(format!("cannot read `{}`: {e}", path.display())))
}

pub(crate) fn load_dataset(path: &Path) -> Result<Dataset> {
    Dataset::load_json(path).map_err(|e| annotate(path, e))
}

pub(crate) fn load_model(path: &Path) -> Result<TrainedModel> {
    TrainedModel::load(path).map_err(|e| annotate(path, e))
}

pub(crate) fn load_graph(path: &Path) -> Result<Graph> {
    let text = read_text(path)?;
    let de = &mut serde_json::Deserializer::from_str(&text);
    serde_path_to_error::deserialize(de).map_err(|e| Error::Schema {
        path: format!("{}: {}", path.display(), e.path()),
        message: e.inner().to_string(),
    })
}
