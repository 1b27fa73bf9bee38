use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// Closed label set with a stable class index.
pub trait Label: Copy + Eq + fmt::Debug + fmt::Display + FromStr<Err = Error> + 'static {
    const ALL: &'static [Self];

    fn index(self) -> usize {
        Self::ALL.iter().position(|&l| l == self).expect("label in ALL")
    }

    fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    fn n_classes() -> usize {
        Self::ALL.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnvironmentLabel {
    Indoor,
    Outdoor,
    TvMusic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MoodLabel {
    Laugh,
    Sing,
    Cry,
    Arguing,
    Sigh,
}

impl Label for EnvironmentLabel {
    const ALL: &'static [Self] = &[Self::Indoor, Self::Outdoor, Self::TvMusic];
}

impl Label for MoodLabel {
    const ALL: &'static [Self] = &[Self::Laugh, Self::Sing, Self::Cry, Self::Arguing, Self::Sigh];
}

impl EnvironmentLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Indoor => "indoor",
            Self::Outdoor => "outdoor",
            Self::TvMusic => "tv_music",
        }
    }
}

impl MoodLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Laugh => "laugh",
            Self::Sing => "sing",
            Self::Cry => "cry",
            Self::Arguing => "arguing",
            Self::Sigh => "sigh",
        }
    }
}

impl fmt::Display for EnvironmentLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl fmt::Display for MoodLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EnvironmentLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s.trim().to_ascii_lowercase().as_str() {
            "indoor" => Ok(Self::Indoor),
            "outdoor" => Ok(Self::Outdoor),
            "tv_music" | "tv/music" | "tv" | "music" => Ok(Self::TvMusic),
            other => Err(Error::UnknownLabel(other.to_string())),
        }
    }
}

impl FromStr for MoodLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s.trim().to_ascii_lowercase().as_str() {
            "laugh" => Ok(Self::Laugh),
            "sing" => Ok(Self::Sing),
            "cry" => Ok(Self::Cry),
            "arguing" => Ok(Self::Arguing),
            "sigh" => Ok(Self::Sigh),
            other => Err(Error::UnknownLabel(other.to_string())),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn indices_and_parsing() {
        assert_eq!(MoodLabel::Laugh.index(), 0);
        assert_eq!(MoodLabel::from_index(4), Some(MoodLabel::Sigh));
        assert_eq!(MoodLabel::n_classes(), 5);
        assert_eq!(EnvironmentLabel::n_classes(), 3);
        assert_eq!("TV/Music".parse::<EnvironmentLabel>().unwrap(), EnvironmentLabel::TvMusic);
        assert!(matches!("shout".parse::<MoodLabel>(), Err(Error::UnknownLabel(_))));
        for &m in MoodLabel::ALL {
            assert_eq!(m.to_string().parse::<MoodLabel>().unwrap(), m);
        }
    }
}
