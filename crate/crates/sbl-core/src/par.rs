//! Batch evaluation over sample points.
//!
//! Every verification suite maps an independent, pure computation over a slice
//! of samples. With the default `parallel` feature the map runs on rayon;
//! without it the same call is sequential. Results come back in input order
//! either way, so reports and reductions are identical across builds.
//! [`map_samples_seq`] is always sequential and exists so benchmarks can
//! compare the two paths within one binary.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Ordered map over samples; parallel when the `parallel` feature is on.
pub fn map_samples<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().map(f).collect()
    }
}

/// Sequential reference path, available in every build.
pub fn map_samples_seq<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    F: Fn(&T) -> U,
{
    items.iter().map(f).collect()
}
