//! Reference semantics: collections as finitely supported multiplicity maps.

pub mod equiv;
pub mod eval;
pub mod json;
pub mod store;
pub mod value;

pub use equiv::{equiv, EquivError};
pub use eval::{apply_prim, eval, models, Env, EvalError, Store};
pub use json::{json_lines, json_to_value, value_to_json};
pub use store::{load_csv, load_dir, load_json_rows, LoadError};
pub use value::{chi, zeta, Closure, GraphVal, KValue};
