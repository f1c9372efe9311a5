//! Dense 64-bit numerics: tensors, forward ops, a per-pass recording tape
//! for reverse-mode gradients, and the checkpoint blob format.

mod checkpoint;
mod grads;
pub mod ops;
mod tape;
mod tensor;

pub use checkpoint::{read_checkpoint, write_checkpoint, CheckpointHeader, TensorEntry, CHECKPOINT_MAGIC};
pub use grads::{GradBuf, Gradients};
pub use tape::{Tape, Var};
pub use tensor::{Param, ParamId, ParamStore, Tensor};
