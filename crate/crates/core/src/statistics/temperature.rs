use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Inverse temperature of a softmax surrogate.
///
/// Serialized as a number, or as one of the strings `"infinite"` (exact
/// statistic, no smoothing), `"default"` (the statistic's own default rule),
/// `"sqrt_rows"` (`√n`) and `"quarter_rows"` (`n^{1/4}`), where `n` is the
/// number of rows the statistic is evaluated on.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum Temperature {
    Infinite,
    Value(f64),
    #[default]
    Default,
    SqrtRows,
    QuarterRows,
}

impl Temperature {
    /// Resolves to a concrete `β` (possibly `+∞`), given the row count and
    /// the statistic's default rule.
    pub fn resolve(&self, n: usize, default: impl FnOnce(f64) -> f64) -> Result<f64> {
        let n = n as f64;
        let beta = match *self {
            Temperature::Infinite => f64::INFINITY,
            Temperature::Value(b) => b,
            Temperature::Default => default(n),
            Temperature::SqrtRows => n.sqrt(),
            Temperature::QuarterRows => n.powf(0.25),
        };
        if beta.is_nan() || beta <= 0.0 {
            return Err(Error::InvalidArgument(format!("temperature must be positive, got {beta}")));
        }
        Ok(beta)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum Repr {
    Number(f64),
    Name(Name),
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum Name {
    Infinite,
    Default,
    SqrtRows,
    QuarterRows,
}

impl Serialize for Temperature {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let repr = match *self {
            Temperature::Value(b) if b.is_finite() => Repr::Number(b),
            Temperature::Value(_) | Temperature::Infinite => Repr::Name(Name::Infinite),
            Temperature::Default => Repr::Name(Name::Default),
            Temperature::SqrtRows => Repr::Name(Name::SqrtRows),
            Temperature::QuarterRows => Repr::Name(Name::QuarterRows),
        };
        repr.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Temperature {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        Ok(match Repr::deserialize(d)? {
            Repr::Number(b) if b.is_infinite() && b > 0.0 => Temperature::Infinite,
            Repr::Number(b) => Temperature::Value(b),
            Repr::Name(Name::Infinite) => Temperature::Infinite,
            Repr::Name(Name::Default) => Temperature::Default,
            Repr::Name(Name::SqrtRows) => Temperature::SqrtRows,
            Repr::Name(Name::QuarterRows) => Temperature::QuarterRows,
        })
    }
}
