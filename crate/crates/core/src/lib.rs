pub mod distill;
pub mod dtcwt;
pub mod error;
pub mod experiment;
pub mod io;
pub mod metrics;
pub mod signal;
pub mod students;
pub mod teachers;

pub use dtcwt::{dtcwt_forward, dtcwt_inverse, Dtcwt, MRAPyramid, WaveletFilterSet};
pub use error::{Error, Result};
pub use signal::{ComplexSignal, Signal};
pub use teachers::{
    build_teacher, normalize_frames, teacher_spectrogram, Filterbank, NormalizedSpectrogram,
    Spectrogram, TeacherKind, TeacherSpec,
};
pub use students::{
    assign_octaves, gabor_kernel, mel_init, Conv1D, Gabor1D, ModelKind, MuReNN, StudentModel,
    StudentOutput,
};
pub use distill::{cosine_loss, loss_gradient, train, SpectrogramCache, Targets, TrainConfig, TrainOutcome};
pub use metrics::{evaluate, heisenberg_ratio, EvalSummary, Heisenberg, LocalizationReport};
