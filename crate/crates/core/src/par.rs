//! Execution policy for the data-parallel inner loops.

/// How a batch of independent evaluations is scheduled.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exec {
    Sequential,
    /// Falls back to [`Exec::Sequential`] when the `parallel` feature is off.
    Parallel,
}

impl Default for Exec {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Exec::Parallel
        } else {
            Exec::Sequential
        }
    }
}

impl Exec {
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Exec::Parallel
    }

    /// Order-preserving map over a slice.
    pub fn map<T, U, F>(self, items: &[T], f: F) -> Vec<U>
    where
        T: Sync,
        U: Send,
        F: Fn(&T) -> U + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self == Exec::Parallel {
            use rayon::prelude::*;
            return items.par_iter().map(f).collect();
        }
        items.iter().map(f).collect()
    }

    /// Order-preserving map over `0..n`.
    pub fn map_range<U, F>(self, n: usize, f: F) -> Vec<U>
    where
        U: Send,
        F: Fn(usize) -> U + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self == Exec::Parallel {
            use rayon::prelude::*;
            return (0..n).into_par_iter().map(f).collect();
        }
        (0..n).map(f).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn both_policies_agree_and_keep_order() {
        let xs: Vec<u64> = (0..1000).collect();
        let a = Exec::Sequential.map(&xs, |x| x * x);
        let b = Exec::Parallel.map(&xs, |x| x * x);
        assert_eq!(a, b);
        assert_eq!(Exec::Parallel.map_range(5, |i| i + 1), vec![1, 2, 3, 4, 5]);
    }
}
