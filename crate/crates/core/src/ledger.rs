use serde::Serialize;

/// Query counters for one run (or an explicit aggregate of runs).
///
/// `grover_iterations` is the complexity unit: one application of the
/// search iteration. `predicate_evaluations` is what the dense simulator
/// spends to realise those iterations (`n` per iteration) and is reported
/// separately.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct QueryLedger {
    pub grover_iterations: u64,
    pub measurements: u64,
    pub subroutine_calls: u64,
    pub classical_verifications: u64,
    pub predicate_evaluations: u64,
    pub budget_exhaustions: u64,
}

impl QueryLedger {
    pub fn merge(&mut self, other: &QueryLedger) {
        self.grover_iterations += other.grover_iterations;
        self.measurements += other.measurements;
        self.subroutine_calls += other.subroutine_calls;
        self.classical_verifications += other.classical_verifications;
        self.predicate_evaluations += other.predicate_evaluations;
        self.budget_exhaustions += other.budget_exhaustions;
    }

    pub fn merged(mut self, other: &QueryLedger) -> QueryLedger {
        self.merge(other);
        self
    }

    /// True when every counter of `self` is at least the one in `earlier`.
    pub fn dominates(&self, earlier: &QueryLedger) -> bool {
        self.grover_iterations >= earlier.grover_iterations
            && self.measurements >= earlier.measurements
            && self.subroutine_calls >= earlier.subroutine_calls
            && self.classical_verifications >= earlier.classical_verifications
            && self.predicate_evaluations >= earlier.predicate_evaluations
            && self.budget_exhaustions >= earlier.budget_exhaustions
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn merge_adds_counters() {
        let a = QueryLedger {
            grover_iterations: 3,
            measurements: 2,
            subroutine_calls: 1,
            classical_verifications: 2,
            predicate_evaluations: 12,
            budget_exhaustions: 0,
        };
        let b = a.merged(&a);
        assert_eq!(b.grover_iterations, 6);
        assert_eq!(b.predicate_evaluations, 24);
        assert!(b.dominates(&a));
        assert!(!a.dominates(&b));
    }
}
