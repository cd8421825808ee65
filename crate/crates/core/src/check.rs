//! One evaluated inequality: `lhs <= rhs` (up to a tolerance), with slack.

use alloc::string::{String, ToString};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Verdict {
    Pass,
    Fail,
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub id: String,
    #[serde(with = "nan_as_null")]
    pub lhs: f64,
    #[serde(with = "nan_as_null")]
    pub rhs: f64,
    /// `rhs - lhs`; negative means violated. NaN for skipped rows.
    #[serde(with = "nan_as_null")]
    pub slack: f64,
    pub verdict: Verdict,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub note: String,
}

impl Check {
    /// `lhs <= rhs + tol`.
    pub fn le(id: impl Into<String>, lhs: f64, rhs: f64, tol: f64) -> Self {
        let ok = lhs <= rhs + tol;
        Check {
            id: id.into(),
            lhs,
            rhs,
            slack: rhs - lhs,
            verdict: if ok { Verdict::Pass } else { Verdict::Fail },
            note: String::new(),
        }
    }

    /// `lhs >= rhs - tol`, stored with the small side on the left.
    pub fn ge(id: impl Into<String>, lhs: f64, rhs: f64, tol: f64) -> Self {
        Self::le(id, rhs, lhs, tol)
    }

    /// `|lhs - rhs| <= tol`; slack is `tol - |lhs - rhs|`.
    pub fn eq(id: impl Into<String>, lhs: f64, rhs: f64, tol: f64) -> Self {
        let dev = crate::math::abs(lhs - rhs);
        Check {
            id: id.into(),
            lhs,
            rhs,
            slack: tol - dev,
            verdict: if dev <= tol { Verdict::Pass } else { Verdict::Fail },
            note: String::new(),
        }
    }

    pub fn skipped(id: impl Into<String>, note: impl Into<String>) -> Self {
        Check {
            id: id.into(),
            lhs: f64::NAN,
            rhs: f64::NAN,
            slack: f64::NAN,
            verdict: Verdict::Skipped,
            note: note.into(),
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = note.into();
        self
    }

    pub fn passed(&self) -> bool {
        self.verdict != Verdict::Fail
    }

    /// Converts a failed row into [`Error::BoundViolated`].
    pub fn ensure(&self) -> Result<()> {
        if self.verdict == Verdict::Fail {
            Err(Error::BoundViolated {
                id: self.id.to_string(),
                lhs: self.lhs,
                rhs: self.rhs,
            })
        } else {
            Ok(())
        }
    }
}

/// Folds many pointwise rows into the worst one, keeping the id.
pub fn worst(id: impl Into<String>, rows: impl IntoIterator<Item = Check>) -> Check {
    let id = id.into();
    let mut out: Option<Check> = None;
    for row in rows {
        if row.verdict == Verdict::Skipped {
            continue;
        }
        let replace = match &out {
            None => true,
            Some(w) => {
                (row.verdict == Verdict::Fail && w.verdict == Verdict::Pass)
                    || (row.verdict == w.verdict && row.slack < w.slack)
            }
        };
        if replace {
            out = Some(row);
        }
    }
    match out {
        Some(mut c) => {
            c.id = id;
            c
        }
        None => Check::skipped(id, "no applicable points"),
    }
}

mod nan_as_null {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_nan() {
            s.serialize_none()
        } else {
            s.serialize_some(v)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn le_and_ensure() {
        assert!(Check::le("a", 1.0, 2.0, 0.0).ensure().is_ok());
        let c = Check::le("a", 2.0, 1.0, 1e-9);
        assert_eq!(c.verdict, Verdict::Fail);
        assert_eq!(c.slack, -1.0);
        assert!(matches!(c.ensure(), Err(Error::BoundViolated { .. })));
        assert!(Check::le("a", 1.0 + 1e-12, 1.0, 1e-10).passed());
    }

    #[test]
    fn worst_prefers_failures() {
        let w = worst(
            "w",
            [
                Check::le("a", 0.0, 1.0, 0.0),
                Check::le("b", 3.0, 1.0, 0.0),
                Check::le("c", 0.9, 1.0, 0.0),
                Check::skipped("d", ""),
            ],
        );
        assert_eq!(w.id, "w");
        assert_eq!(w.verdict, Verdict::Fail);
        assert_eq!(w.lhs, 3.0);
        let w = worst("w", [Check::le("a", 0.0, 1.0, 0.0), Check::le("c", 0.9, 1.0, 0.0)]);
        assert!((w.slack - 0.1).abs() < 1e-15);
        assert_eq!(worst("e", []).verdict, Verdict::Skipped);
    }
}
