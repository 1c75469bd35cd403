//! Per-field confidence statistics (count, mean, variance, min, max).

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::training_data::Label;

/// Row order of the report.
pub const REPORT_FIELDS: [char; 4] = ['A', 'O', 'T', 'Y'];

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct FieldStats {
    pub count: u64,
    pub mean: f64,
    /// Population variance.
    pub var: f64,
    pub min: f64,
    pub max: f64,
}

#[derive(Debug, Clone, Default)]
struct Accumulator {
    count: u64,
    sum: f64,
    sum_sq: f64,
    min: f64,
    max: f64,
}

impl Accumulator {
    fn add(&mut self, x: f64) {
        if self.count == 0 {
            self.min = x;
            self.max = x;
        } else {
            self.min = self.min.min(x);
            self.max = self.max.max(x);
        }
        self.count += 1;
        self.sum += x;
        self.sum_sq += x * x;
    }

    fn stats(&self) -> FieldStats {
        if self.count == 0 {
            return FieldStats::default();
        }
        let n = self.count as f64;
        let mean = (self.sum / n).clamp(self.min, self.max);
        let var = (self.sum_sq / n - mean * mean).max(0.0);
        FieldStats { count: self.count, mean, var, min: self.min, max: self.max }
    }
}

/// Confidence statistics grouped by the field letter of the predicted label.
#[derive(Debug, Clone, Default)]
pub struct FieldReport {
    acc: [Accumulator; 4],
}

fn slot(label: Label) -> usize {
    let letter = label.field().map_or('O', |f| f.letter());
    REPORT_FIELDS.iter().position(|&c| c == letter).expect("every label maps to a report row")
}

impl FieldReport {
    pub fn add(&mut self, label: Label, confidence: f64) {
        self.acc[slot(label)].add(confidence);
    }

    /// `(letter, stats)` in A, O, T, Y order.
    pub fn rows(&self) -> [(char, FieldStats); 4] {
        std::array::from_fn(|i| (REPORT_FIELDS[i], self.acc[i].stats()))
    }

    pub fn get(&self, letter: char) -> Option<FieldStats> {
        self.rows().into_iter().find(|(c, _)| *c == letter).map(|(_, s)| s)
    }
}

impl fmt::Display for FieldReport {
    /// Tab-separated table with a header row.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "field\tcount\tmean\tvar\tmin\tmax")?;
        for (letter, s) in self.rows() {
            writeln!(f, "{letter}\t{}\t{:.4}\t{:.4}\t{:.4}\t{:.4}", s.count, s.mean, s.var, s.min, s.max)?;
        }
        Ok(())
    }
}
