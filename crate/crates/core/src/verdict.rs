use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Holds,
    FailsAt,
    Inconclusive,
}

/// Outcome of a grid scan of an analytic inequality.
///
/// `margin` is the smallest slack seen (negative means violated) and
/// `witness` the point where it was attained, reported in every case.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionVerdict {
    pub status: Status,
    pub witness: Vec<f64>,
    pub margin: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

impl ConditionVerdict {
    pub fn holds(&self) -> bool {
        self.status == Status::Holds
    }
}

/// Tracks the worst slack over a scan.
pub(crate) struct Worst {
    margin: f64,
    witness: Vec<f64>,
    non_finite: Option<Vec<f64>>,
}

impl Worst {
    pub fn new() -> Self {
        Worst {
            margin: f64::INFINITY,
            witness: Vec::new(),
            non_finite: None,
        }
    }

    pub fn push(&mut self, slack: f64, at: &[f64]) {
        if slack.is_nan() {
            if self.non_finite.is_none() {
                self.non_finite = Some(at.to_vec());
            }
            return;
        }
        if slack < self.margin {
            self.margin = slack;
            self.witness = at.to_vec();
        }
    }

    pub fn merge(mut self, other: Worst) -> Worst {
        if other.margin < self.margin {
            self.margin = other.margin;
            self.witness = other.witness;
        }
        if self.non_finite.is_none() {
            self.non_finite = other.non_finite;
        }
        self
    }

    pub fn finish(self, tol: f64) -> ConditionVerdict {
        if self.margin < -tol {
            return ConditionVerdict {
                status: Status::FailsAt,
                witness: self.witness,
                margin: self.margin,
                reason: None,
            };
        }
        if let Some(at) = self.non_finite {
            return ConditionVerdict {
                status: Status::Inconclusive,
                witness: at,
                margin: self.margin,
                reason: Some("non-finite value on the grid".into()),
            };
        }
        ConditionVerdict {
            status: Status::Holds,
            witness: self.witness,
            margin: self.margin,
            reason: None,
        }
    }
}
