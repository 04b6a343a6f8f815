use std::fmt;
use std::str::FromStr;

use super::mixing::MixingMatrix;
use crate::error::{Error, Result};

/// The three named gradient tracking instances.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Variant {
    /// `(W, I, W, I)`: DIGing / EXTRA style.
    One,
    /// `(W, W, W, I)`: NEXT / SONATA style.
    Two,
    /// `(W, W, W, W)`: Aug-DGM / ATC-DIGing style.
    Three,
}

impl Variant {
    pub const ALL: [Variant; 3] = [Variant::One, Variant::Two, Variant::Three];

    pub fn name(self) -> &'static str {
        match self {
            Variant::One => "RGTA-1",
            Variant::Two => "RGTA-2",
            Variant::Three => "RGTA-3",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "RGTA-1" | "RGTA1" | "1" => Ok(Variant::One),
            "RGTA-2" | "RGTA2" | "2" => Ok(Variant::Two),
            "RGTA-3" | "RGTA3" | "3" => Ok(Variant::Three),
            _ => Err(Error::Unknown {
                what: "method",
                name: s.trim().to_string(),
            }),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SetTag {
    Rgta(Variant),
    Custom,
}

/// The four communication matrices `(W1, W2, W3, W4)` of the generalized
/// tracking update, plus the number of consensus steps per communicating
/// iteration.
#[derive(Clone, Debug)]
pub struct CommunicationSet {
    mats: [MixingMatrix; 4],
    n_c: u32,
    tag: SetTag,
}

impl CommunicationSet {
    pub fn for_variant(variant: Variant, w: &MixingMatrix, n_c: u32) -> Result<Self> {
        if n_c == 0 {
            return Err(Error::invalid("n_c must be at least 1"));
        }
        let id = MixingMatrix::identity(w.n());
        let mats = match variant {
            Variant::One => [w.clone(), id.clone(), w.clone(), id],
            Variant::Two => [w.clone(), w.clone(), w.clone(), id],
            Variant::Three => [w.clone(), w.clone(), w.clone(), w.clone()],
        };
        Ok(CommunicationSet {
            mats,
            n_c,
            tag: SetTag::Rgta(variant),
        })
    }

    /// Parses the method tag and builds the matching set.
    pub fn from_tag(tag: &str, w: &MixingMatrix, n_c: u32) -> Result<Self> {
        Self::for_variant(tag.parse()?, w, n_c)
    }

    pub fn custom(mats: [MixingMatrix; 4], n_c: u32) -> Result<Self> {
        if n_c == 0 {
            return Err(Error::invalid("n_c must be at least 1"));
        }
        let n = mats[0].n();
        if mats.iter().any(|m| m.n() != n) {
            return Err(Error::invalid("communication matrices differ in size"));
        }
        Ok(CommunicationSet {
            mats,
            n_c,
            tag: SetTag::Custom,
        })
    }

    pub fn n(&self) -> usize {
        self.mats[0].n()
    }

    pub fn n_c(&self) -> u32 {
        self.n_c
    }

    pub fn tag(&self) -> SetTag {
        self.tag
    }

    /// Slot `i` in `1..=4`.
    pub fn matrix(&self, slot: usize) -> &MixingMatrix {
        &self.mats[slot - 1]
    }

    pub fn betas(&self) -> [f64; 4] {
        [
            self.mats[0].beta(),
            self.mats[1].beta(),
            self.mats[2].beta(),
            self.mats[3].beta(),
        ]
    }
}
