use serde::{Deserialize, Serialize};
use std::fmt;

/// Contact state of one fingertip, used both as ground truth and as a prediction.
///
/// The declaration order is the tie-break order: on equal scores the earlier
/// variant wins, so `Slip` beats `Contact` beats `NoContact`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContactClass {
    Slip,
    Contact,
    NoContact,
}

impl ContactClass {
    pub const ALL: [ContactClass; 3] = [
        ContactClass::Slip,
        ContactClass::Contact,
        ContactClass::NoContact,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            ContactClass::Slip => "slip",
            ContactClass::Contact => "contact",
            ContactClass::NoContact => "no_contact",
        }
    }
}

impl fmt::Display for ContactClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}
