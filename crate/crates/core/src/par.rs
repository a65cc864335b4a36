//! Data-parallel helpers with a sequential fallback.
//!
//! With the `parallel` feature (on by default) [`Parallelism::Parallel`] runs
//! on the rayon global pool; without it every call degrades to a plain
//! iterator, so results never depend on the feature.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Parallelism {
    Sequential,
    #[default]
    Parallel,
}

impl Parallelism {
    /// Whether `Parallel` actually fans out in this build.
    pub fn available() -> bool {
        cfg!(feature = "parallel")
    }
}

pub(crate) fn map<T, R, F>(items: Vec<T>, par: Parallelism, f: F) -> Vec<R>
where
    T: Send,
    R: Send,
    F: Fn(T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if par == Parallelism::Parallel {
        use rayon::prelude::*;
        return items.into_par_iter().map(f).collect();
    }
    let _ = par;
    items.into_iter().map(f).collect()
}

pub(crate) fn any<T, F>(items: Vec<T>, par: Parallelism, f: F) -> bool
where
    T: Send,
    F: Fn(T) -> bool + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if par == Parallelism::Parallel {
        use rayon::prelude::*;
        return items.into_par_iter().any(f);
    }
    let _ = par;
    items.into_iter().any(f)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn both_modes_agree() {
        let xs: Vec<u64> = (0..1000).collect();
        let a = map(xs.clone(), Parallelism::Parallel, |x| x * x);
        let b = map(xs.clone(), Parallelism::Sequential, |x| x * x);
        assert_eq!(a, b);
        assert!(any(xs.clone(), Parallelism::Parallel, |x| x == 999));
        assert!(!any(xs, Parallelism::Sequential, |x| x > 999));
    }
}
