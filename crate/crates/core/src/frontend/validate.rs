use std::collections::HashSet;
use std::fmt;

use serde::Serialize;

use crate::kernels::{scale_between, Interp};

use super::program::{Event, ProgramTrace};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub event: usize,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "event {}: {}", self.event, self.message)
    }
}

/// Checks that every read follows a write and that all accessor/iteration
/// space size pairs are related by a power-of-two factor.
pub fn validate_program(trace: &ProgramTrace) -> Result<(), Vec<Diagnostic>> {
    let mut diags = Vec::new();
    let mut written = HashSet::new();
    let mut push = |event: usize, message: String| diags.push(Diagnostic { event, message });

    for (i, event) in trace.events().iter().enumerate() {
        match event {
            Event::Declare(_) => {}
            Event::TransferIn { buffer, .. } => {
                if trace.buffer(*buffer).is_none() {
                    push(i, format!("undeclared buffer {buffer}"));
                }
                written.insert(*buffer);
            }
            Event::TransferOut { buffer, .. } => {
                if !written.contains(buffer) {
                    push(i, format!("uninitialized read of buffer {buffer}"));
                }
            }
            Event::Launch { kernel, .. } => {
                let Some(out) = trace.buffer(kernel.output()) else {
                    push(i, format!("undeclared buffer {}", kernel.output()));
                    continue;
                };
                for acc in kernel.inputs() {
                    let Some(decl) = trace.buffer(acc.buffer) else {
                        push(i, format!("undeclared buffer {}", acc.buffer));
                        continue;
                    };
                    if !written.contains(&acc.buffer) {
                        push(i, format!("uninitialized read of buffer {}", acc.buffer));
                    }
                    let (src, dst) = (decl.dims(), out.dims());
                    if kernel.reads_directly(src, dst) {
                        if acc.interp != Interp::None {
                            push(
                                i,
                                format!(
                                    "kernel {}: filtering requested on {} without a size mismatch",
                                    kernel.name(),
                                    acc.buffer
                                ),
                            );
                        }
                        continue;
                    }
                    let target = kernel.resample_target(dst);
                    if scale_between(src, target).is_none() {
                        push(
                            i,
                            format!(
                                "kernel {}: accessor {}x{} against iteration space {}x{} is a non power-of-two factor",
                                kernel.name(),
                                src.0,
                                src.1,
                                dst.0,
                                dst.1
                            ),
                        );
                    } else if acc.interp == Interp::None {
                        push(
                            i,
                            format!(
                                "kernel {}: size mismatch {}x{} -> {}x{} needs nearest or bilinear filtering",
                                kernel.name(),
                                src.0,
                                src.1,
                                dst.0,
                                dst.1
                            ),
                        );
                    }
                }
                written.insert(kernel.output());
            }
        }
    }
    if diags.is_empty() {
        Ok(())
    } else {
        Err(diags)
    }
}
