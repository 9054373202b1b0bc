//! Loopless reflected Gray code over `len` digits of a common radix.
//!
//! Consecutive tuples differ in exactly one digit, by ±1, which lets the
//! exhaustive searches update their running state with a single column.

pub(crate) struct ReflectedGray {
    digits: Vec<usize>,
    radix: usize,
    focus: Vec<usize>,
    up: Vec<bool>,
}

impl ReflectedGray {
    /// Starts at the all-zero tuple.
    pub(crate) fn new(len: usize, radix: usize) -> Self {
        Self {
            digits: vec![0; len],
            radix,
            focus: (0..=len).collect(),
            up: vec![true; len],
        }
    }

    pub(crate) fn digits(&self) -> &[usize] {
        &self.digits
    }

    /// Moves to the next tuple, returning `(position, old, new)` of the
    /// changed digit, or `None` once every tuple has been visited.
    #[inline]
    pub(crate) fn step(&mut self) -> Option<(usize, usize, usize)> {
        let len = self.digits.len();
        if self.radix < 2 {
            return None;
        }
        let j = self.focus[0];
        self.focus[0] = 0;
        if j == len {
            return None;
        }
        let old = self.digits[j];
        let new = if self.up[j] { old + 1 } else { old - 1 };
        self.digits[j] = new;
        if new == 0 || new == self.radix - 1 {
            self.up[j] = !self.up[j];
            self.focus[j] = self.focus[j + 1];
            self.focus[j + 1] = j + 1;
        }
        Some((j, old, new))
    }
}
