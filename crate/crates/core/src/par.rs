//! Optional data parallelism.
//!
//! With the `parallel` feature, work is spread over a rayon pool sized by the
//! caller's worker count; without it everything runs on the calling thread.
//! Results are always returned in input order, so output never depends on the
//! worker count.

/// A reusable worker pool. `None` means "as many as the machine offers".
pub struct Workers {
    inner: imp::Pool,
}

impl Workers {
    pub fn new(workers: Option<usize>) -> Self {
        Workers { inner: imp::Pool::new(workers) }
    }

    /// Maps `f` over `0..n`, returning results in index order.
    pub fn map_indexed<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        self.inner.map_indexed(n, f)
    }
}

/// One-shot form of [`Workers::map_indexed`].
pub fn map_indexed<T, F>(n: usize, workers: Option<usize>, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    Workers::new(workers).map_indexed(n, f)
}

#[cfg(feature = "parallel")]
mod imp {
    use rayon::prelude::*;

    pub enum Pool {
        Sequential,
        Global,
        Owned(rayon::ThreadPool),
    }

    impl Pool {
        pub fn new(workers: Option<usize>) -> Self {
            match workers {
                Some(0 | 1) => Pool::Sequential,
                None => Pool::Global,
                Some(w) => match rayon::ThreadPoolBuilder::new().num_threads(w).build() {
                    Ok(pool) => Pool::Owned(pool),
                    Err(_) => Pool::Sequential,
                },
            }
        }

        pub fn map_indexed<T, F>(&self, n: usize, f: F) -> Vec<T>
        where
            T: Send,
            F: Fn(usize) -> T + Sync + Send,
        {
            match self {
                Pool::Sequential => (0..n).map(f).collect(),
                Pool::Global => (0..n).into_par_iter().map(f).collect(),
                Pool::Owned(pool) => pool.install(|| (0..n).into_par_iter().map(&f).collect()),
            }
        }
    }
}

#[cfg(not(feature = "parallel"))]
mod imp {
    pub struct Pool;

    impl Pool {
        pub fn new(_workers: Option<usize>) -> Self {
            Pool
        }

        pub fn map_indexed<T, F>(&self, n: usize, f: F) -> Vec<T>
        where
            F: Fn(usize) -> T,
        {
            (0..n).map(f).collect()
        }
    }
}
