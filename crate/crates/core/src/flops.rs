//! Scalar operation accounting.
//!
//! Every multiplication, division, addition and subtraction on a real counts
//! as one operation. Comparisons, negations and sign flips are free.

use std::ops::AddAssign;

#[derive(Debug, Default, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct OpCount(u64);

impl OpCount {
    pub const fn new() -> Self {
        OpCount(0)
    }

    #[inline]
    pub fn add(&mut self, n: u64) {
        self.0 += n;
    }

    pub fn get(self) -> u64 {
        self.0
    }
}

impl AddAssign for OpCount {
    fn add_assign(&mut self, rhs: Self) {
        self.0 += rhs.0;
    }
}

impl From<OpCount> for u64 {
    fn from(c: OpCount) -> u64 {
        c.0
    }
}
