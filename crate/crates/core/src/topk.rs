/// The `k` largest values seen so far, kept in descending order.
///
/// Values at or below the current k-th largest are rejected with a single
/// comparison; admitted values are placed by binary search.
#[derive(Debug, Clone, PartialEq)]
pub struct TopK {
    k: usize,
    values: Vec<f64>,
}

impl TopK {
    pub fn new(k: usize) -> Self {
        assert!(k >= 1, "TopK needs k >= 1");
        TopK {
            k,
            values: Vec::with_capacity(k + 1),
        }
    }

    #[inline]
    pub fn push(&mut self, x: f64) {
        if self.values.len() == self.k {
            if x <= self.values[self.k - 1] {
                return;
            }
            self.values.pop();
        }
        let at = self.values.partition_point(|&v| v >= x);
        self.values.insert(at, x);
    }

    /// The k-th largest value, once at least `k` values were pushed.
    #[inline]
    pub fn kth(&self) -> Option<f64> {
        (self.values.len() == self.k).then(|| self.values[self.k - 1])
    }

    /// Largest first.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn is_full(&self) -> bool {
        self.values.len() == self.k
    }

    pub fn clear(&mut self) {
        self.values.clear();
    }
}
