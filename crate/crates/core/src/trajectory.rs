//! Per-iteration records shared by all optimizers.

#[derive(Clone, Debug, PartialEq)]
pub struct IterationRecord {
    /// 1-based iteration index.
    pub iteration: u64,
    pub cumulative_queries: u64,
    pub elapsed_seconds: f64,
    /// True objective value at the iterate; metrics only.
    pub f_value: f64,
    pub step_norm: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    /// Objective value at the starting point, before any query.
    pub initial_value: f64,
    pub records: Vec<IterationRecord>,
    pub final_point: Vec<f64>,
}

impl Trajectory {
    pub fn final_value(&self) -> f64 {
        self.records
            .last()
            .map_or(self.initial_value, |r| r.f_value)
    }

    pub fn total_queries(&self) -> u64 {
        self.records.last().map_or(0, |r| r.cumulative_queries)
    }

    /// Iterations where the objective went up.
    pub fn monotonicity_violations(&self) -> usize {
        let mut prev = self.initial_value;
        let mut bad = 0;
        for r in &self.records {
            if r.f_value > prev {
                bad += 1;
            }
            prev = r.f_value;
        }
        bad
    }
}
