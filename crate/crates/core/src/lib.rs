//! Shape-descriptor feature extraction and kernel SVM training for binary
//! image classification.
//!
//! The crate is `no_std` + `alloc`: everything here is pure computation over
//! in-memory buffers. Image decoding, file formats and the command-line
//! front end live in the companion `phogsvm` crate.
//!
//! Pipeline sketch:
//!
//! ```text
//! image -> bicubic resample -> Gaussian smooth          (imaging)
//!       -> Laplacian edge mask + Sobel gradient votes
//!          over a spatial pyramid of cells              (phog)
//!       -> descriptor vectors -> SMO-trained kernel SVM (svm)
//!       -> split / grid search / recognition rate       (pipeline)
//! ```

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod imaging;
mod label;
mod math;
pub mod phog;
pub mod pipeline;
pub mod svm;

pub use label::Label;
