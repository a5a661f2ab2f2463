//! Spectral-Galerkin simulation and verification of variational SPDEs on the
//! torus.
//!
//! * [`spaces`]: Sobolev scales as Fourier multipliers, spectral fields.
//! * [`noise`]: truncated cylindrical Brownian increments and diffusion maps.
//! * [`operators`]: the six model equations as drift/diffusion pairs.
//! * [`conditions`]: exact criticality checks and sampling audits.
//! * [`solver`]: IMEX Euler–Maruyama with energy ledger and blow-up monitor.
//! * [`verify`]: Monte-Carlo harnesses for energy, tail and Gronwall bounds.
//! * [`cli`]: configuration, manifests and output writers behind the binary.

pub mod spaces;
pub mod noise;
pub mod operators;
pub mod conditions;
pub mod solver;
pub mod verify;
pub mod cli;

/// Exact rationals for exponent bookkeeping.
pub type Rational = num_rational::Ratio<i64>;

/// Serde adapter writing rationals as `"p/q"` strings.
pub mod ratio_serde {
    use super::Rational;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&r.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(i64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Int(i) => Ok(Rational::from_integer(i)),
            Raw::Text(t) => {
                t.trim().parse::<Rational>().map_err(|e| serde::de::Error::custom(format!("bad rational {t:?}: {e}")))
            }
        }
    }
}
