//! The five tissue classes and their stable integer codes.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of tissue classes.
pub const NUM_TISSUES: usize = 5;

/// Tissue class of a pixel. The integer codes are used verbatim in label
/// maps, CSV reports and JSON documents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
#[repr(u8)]
pub enum Tissue {
    Background = 0,
    Skull = 1,
    Csf = 2,
    GrayMatter = 3,
    WhiteMatter = 4,
}

impl Tissue {
    pub const ALL: [Tissue; NUM_TISSUES] = [
        Tissue::Background,
        Tissue::Skull,
        Tissue::Csf,
        Tissue::GrayMatter,
        Tissue::WhiteMatter,
    ];

    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_code(code: u8) -> Option<Tissue> {
        Tissue::ALL.get(code as usize).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            Tissue::Background => "background",
            Tissue::Skull => "skull",
            Tissue::Csf => "csf",
            Tissue::GrayMatter => "gray_matter",
            Tissue::WhiteMatter => "white_matter",
        }
    }
}

impl TryFrom<u8> for Tissue {
    type Error = Error;

    fn try_from(code: u8) -> Result<Self> {
        Tissue::from_code(code)
            .ok_or_else(|| Error::UnknownClass(format!("tissue code {code}")))
    }
}

impl fmt::Display for Tissue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}


/// One value per tissue, serialized with the tissue names as keys.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PerTissue<T> {
    pub background: T,
    pub skull: T,
    pub csf: T,
    pub gray_matter: T,
    pub white_matter: T,
}

impl<T> PerTissue<T> {
    pub fn from_fn(mut f: impl FnMut(Tissue) -> T) -> Self {
        PerTissue {
            background: f(Tissue::Background),
            skull: f(Tissue::Skull),
            csf: f(Tissue::Csf),
            gray_matter: f(Tissue::GrayMatter),
            white_matter: f(Tissue::WhiteMatter),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (Tissue, &T)> {
        Tissue::ALL.into_iter().map(move |t| (t, &self[t]))
    }
}

impl<T> std::ops::Index<Tissue> for PerTissue<T> {
    type Output = T;

    fn index(&self, t: Tissue) -> &T {
        match t {
            Tissue::Background => &self.background,
            Tissue::Skull => &self.skull,
            Tissue::Csf => &self.csf,
            Tissue::GrayMatter => &self.gray_matter,
            Tissue::WhiteMatter => &self.white_matter,
        }
    }
}

impl<T> std::ops::IndexMut<Tissue> for PerTissue<T> {
    fn index_mut(&mut self, t: Tissue) -> &mut T {
        match t {
            Tissue::Background => &mut self.background,
            Tissue::Skull => &mut self.skull,
            Tissue::Csf => &mut self.csf,
            Tissue::GrayMatter => &mut self.gray_matter,
            Tissue::WhiteMatter => &mut self.white_matter,
        }
    }
}
