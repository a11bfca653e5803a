//! OpenBLAS thread control. The parallel LU kernels recurse on the calling
//! thread's stack, which blows the default test-thread stacks, and thread
//! thrash hurts the many small factorizations this crate does anyway. Every
//! LAPACK entry point in the crate funnels through [`init`] once.

use std::sync::Once;

extern "C" {
    fn openblas_set_num_threads(n: i32);
}

static INIT: Once = Once::new();

pub(crate) fn init() {
    INIT.call_once(|| unsafe {
        openblas_set_num_threads(1);
    });
}
