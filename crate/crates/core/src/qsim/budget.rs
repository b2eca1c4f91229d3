use crate::error::{Error, Result};

/// Qubit accounting for a space-bounded party. Allocation beyond `limit`
/// is a hard error.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QubitBudget {
    limit: usize,
    in_use: usize,
    peak_used: usize,
}

impl QubitBudget {
    pub fn new(limit: usize) -> Self {
        QubitBudget {
            limit,
            in_use: 0,
            peak_used: 0,
        }
    }

    pub fn allocate(&mut self, qubits: usize) -> Result<()> {
        if self.in_use + qubits > self.limit {
            return Err(Error::BudgetExceeded {
                requested: qubits,
                in_use: self.in_use,
                limit: self.limit,
            });
        }
        self.in_use += qubits;
        self.peak_used = self.peak_used.max(self.in_use);
        Ok(())
    }

    pub fn release(&mut self, qubits: usize) {
        assert!(qubits <= self.in_use, "releasing more qubits than allocated");
        self.in_use -= qubits;
    }

    pub fn limit(&self) -> usize {
        self.limit
    }

    pub fn in_use(&self) -> usize {
        self.in_use
    }

    pub fn peak_used(&self) -> usize {
        self.peak_used
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn peak_tracks_high_water_mark() {
        let mut b = QubitBudget::new(6);
        b.allocate(3).unwrap();
        b.allocate(3).unwrap();
        b.release(3);
        b.allocate(2).unwrap();
        assert_eq!(b.peak_used(), 6);
        assert!(matches!(b.allocate(2), Err(Error::BudgetExceeded { .. })));
        assert_eq!(b.in_use(), 5);
    }
}
