//! Lazy memoized index streams.
//!
//! A `Stream<T>` is an immutable handle on an infinite sequence generated on
//! demand. Elements are computed exactly once, under a lock, so concurrent
//! readers see the same value for the same index.

use std::sync::{Arc, Mutex};

pub struct Stream<T> {
    inner: Arc<Mutex<State<T>>>,
}

struct State<T> {
    cache: Vec<T>,
    gen: Box<dyn FnMut(usize) -> T + Send>,
}

impl<T> Clone for Stream<T> {
    fn clone(&self) -> Self {
        Stream {
            inner: Arc::clone(&self.inner),
        }
    }
}

impl<T: Clone> Stream<T> {
    pub fn new(gen: impl FnMut(usize) -> T + Send + 'static) -> Self {
        Stream {
            inner: Arc::new(Mutex::new(State {
                cache: Vec::new(),
                gen: Box::new(gen),
            })),
        }
    }

    pub fn constant(value: T) -> Self
    where
        T: Send + 'static,
    {
        Stream::new(move |_| value.clone())
    }

    /// A finite prefix followed by a tail rule applied to indices past it.
    pub fn with_prefix(prefix: Vec<T>, mut tail: impl FnMut(usize) -> T + Send + 'static) -> Self
    where
        T: Send + 'static,
    {
        Stream::new(move |n| {
            if n < prefix.len() {
                prefix[n].clone()
            } else {
                tail(n)
            }
        })
    }

    pub fn get(&self, n: usize) -> T {
        let mut state = self.inner.lock().unwrap();
        while state.cache.len() <= n {
            let k = state.cache.len();
            let v = (state.gen)(k);
            state.cache.push(v);
        }
        state.cache[n].clone()
    }

    pub fn map<U: Clone + Send + 'static>(
        &self,
        f: impl Fn(T) -> U + Send + 'static,
    ) -> Stream<U>
    where
        T: Send + 'static,
    {
        let src = self.clone();
        Stream::new(move |n| f(src.get(n)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::atomic::{AtomicUsize, Ordering};

    #[test]
    fn memoizes_each_index_once() {
        let calls = Arc::new(AtomicUsize::new(0));
        let counter = Arc::clone(&calls);
        let s = Stream::new(move |n| {
            counter.fetch_add(1, Ordering::SeqCst);
            n * n
        });
        assert_eq!(s.get(3), 9);
        assert_eq!(s.get(3), 9);
        assert_eq!(s.get(1), 1);
        // indices 0..=3 generated exactly once each
        assert_eq!(calls.load(Ordering::SeqCst), 4);
    }

    #[test]
    fn concurrent_readers_agree() {
        let s = Stream::new(|n| n + 1);
        let mut handles = Vec::new();
        for _ in 0..8 {
            let s = s.clone();
            handles.push(std::thread::spawn(move || s.get(100)));
        }
        for h in handles {
            assert_eq!(h.join().unwrap(), 101);
        }
    }

    #[test]
    fn prefix_then_tail() {
        let s = Stream::with_prefix(vec![10, 20], |n| n);
        assert_eq!(s.get(0), 10);
        assert_eq!(s.get(1), 20);
        assert_eq!(s.get(5), 5);
    }
}
