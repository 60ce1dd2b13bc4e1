use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{EvalError, PredictionEntry, PredictionLog};

/// Counts and row-normalised percentages, rows indexed by true label and
/// columns by predicted label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    labels: Vec<String>,
    counts: Vec<Vec<u64>>,
    percents: Vec<Vec<f64>>,
    empty_rows: Vec<bool>,
}

impl ConfusionMatrix {
    pub fn from_counts(labels: Vec<String>, counts: Vec<Vec<u64>>) -> Self {
        let percents: Vec<Vec<f64>> = counts
            .iter()
            .map(|row| {
                let total: u64 = row.iter().sum();
                row.iter()
                    .map(|&c| if total == 0 { 0.0 } else { 100.0 * c as f64 / total as f64 })
                    .collect()
            })
            .collect();
        let empty_rows = counts.iter().map(|row| row.iter().all(|&c| c == 0)).collect();
        Self {
            labels,
            counts,
            percents,
            empty_rows,
        }
    }

    /// A matrix known only by its percentages, such as a published listener
    /// table. Counts are zero.
    pub fn from_percents(labels: Vec<String>, percents: Vec<Vec<f64>>) -> Self {
        let n = labels.len();
        let empty_rows = percents.iter().map(|row| row.iter().all(|&p| p == 0.0)).collect();
        Self {
            labels,
            counts: vec![vec![0; n]; n],
            percents,
            empty_rows,
        }
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn counts(&self) -> &[Vec<u64>] {
        &self.counts
    }

    pub fn percents(&self) -> &[Vec<f64>] {
        &self.percents
    }

    pub fn empty_rows(&self) -> &[bool] {
        &self.empty_rows
    }

    pub fn row_total(&self, i: usize) -> u64 {
        self.counts[i].iter().sum()
    }
}

/// Confusion counts over the entries `keep` accepts.
pub fn confusion(log: &PredictionLog, keep: impl Fn(&PredictionEntry) -> bool) -> ConfusionMatrix {
    let labels = log.labels().to_vec();
    let n = labels.len();
    let pos = |l: &str| labels.iter().position(|x| x == l).expect("log labels are validated");
    let mut counts = vec![vec![0u64; n]; n];
    for e in log.entries().iter().filter(|e| keep(e)) {
        counts[pos(&e.true_label)][pos(&e.predicted)] += 1;
    }
    ConfusionMatrix::from_counts(labels, counts)
}

/// Machine minus listener percentages, cell by cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContrastMatrix {
    labels: Vec<String>,
    cells: Vec<Vec<f64>>,
}

impl ContrastMatrix {
    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn cells(&self) -> &[Vec<f64>] {
        &self.cells
    }
}

pub fn contrast(machine: &ConfusionMatrix, human: &ConfusionMatrix) -> Result<ContrastMatrix, EvalError> {
    if machine.labels != human.labels {
        return Err(EvalError::LabelMismatch);
    }
    let cells = machine
        .percents
        .iter()
        .zip(&human.percents)
        .map(|(m, h)| m.iter().zip(h).map(|(m, h)| m - h).collect())
        .collect();
    Ok(ContrastMatrix {
        labels: machine.labels.clone(),
        cells,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Grouping {
    Speaker,
    Gender,
    Kind,
    AgeGroup,
    All,
}

impl Grouping {
    pub const ALL: [Grouping; 5] = [
        Grouping::Speaker,
        Grouping::Gender,
        Grouping::Kind,
        Grouping::AgeGroup,
        Grouping::All,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Grouping::Speaker => "speaker",
            Grouping::Gender => "gender",
            Grouping::Kind => "kind",
            Grouping::AgeGroup => "age_group",
            Grouping::All => "all",
        }
    }

    pub fn key(self, e: &PredictionEntry) -> String {
        match self {
            Grouping::Speaker => e.speaker.clone(),
            Grouping::Gender => e.gender.as_str().to_string(),
            Grouping::Kind => e.kind.as_str().to_string(),
            Grouping::AgeGroup => e.age_group.as_str().to_string(),
            Grouping::All => "all".to_string(),
        }
    }
}

impl fmt::Display for Grouping {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Grouping {
    type Err = EvalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Grouping::ALL
            .into_iter()
            .find(|g| g.as_str() == s)
            .ok_or_else(|| EvalError::UnknownToken {
                what: "grouping",
                token: s.into(),
            })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupRate {
    pub group: String,
    pub total: u64,
    pub correct: u64,
    /// Fraction in [0, 1].
    pub accuracy: f64,
    /// Diagonal percentage per label, `None` when the group has no
    /// utterances of that label.
    pub per_class: Vec<Option<f64>>,
}

/// Accuracy per group, groups in order of first appearance in the log.
pub fn group_rates(log: &PredictionLog, grouping: Grouping) -> Vec<GroupRate> {
    let mut keys: Vec<String> = Vec::new();
    for e in log.entries() {
        let k = grouping.key(e);
        if !keys.contains(&k) {
            keys.push(k);
        }
    }
    keys.into_iter()
        .map(|k| {
            let m = confusion(log, |e| grouping.key(e) == k);
            let total: u64 = (0..m.labels.len()).map(|i| m.row_total(i)).sum();
            let correct: u64 = (0..m.labels.len()).map(|i| m.counts[i][i]).sum();
            let per_class = (0..m.labels.len())
                .map(|i| (!m.empty_rows[i]).then(|| m.percents[i][i]))
                .collect();
            GroupRate {
                group: k,
                total,
                correct,
                accuracy: if total == 0 { 0.0 } else { correct as f64 / total as f64 },
                per_class,
            }
        })
        .collect()
}
