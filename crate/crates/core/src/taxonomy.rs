//! Expected-answer-type taxonomy: 6 coarse classes and 50 fine classes, using
//! the label spellings of the UIUC question classification data
//! (`HUM:gr`, `NUM:perc`, ...).

use std::fmt;
use std::str::FromStr;

use crate::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Coarse {
    Abbr,
    Enty,
    Desc,
    Hum,
    Loc,
    Num,
}

impl Coarse {
    pub const ALL: [Coarse; 6] = [
        Coarse::Abbr,
        Coarse::Enty,
        Coarse::Desc,
        Coarse::Hum,
        Coarse::Loc,
        Coarse::Num,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Coarse::Abbr => "ABBR",
            Coarse::Enty => "ENTY",
            Coarse::Desc => "DESC",
            Coarse::Hum => "HUM",
            Coarse::Loc => "LOC",
            Coarse::Num => "NUM",
        }
    }

    /// Fine subclasses belonging to this coarse class.
    pub fn fine_classes(&self) -> &'static [&'static str] {
        match self {
            Coarse::Abbr => &["abb", "exp"],
            Coarse::Enty => &[
                "animal", "body", "color", "cremat", "currency", "dismed", "event", "food",
                "instru", "lang", "letter", "other", "plant", "product", "religion", "sport",
                "substance", "symbol", "techmeth", "termeq", "veh", "word",
            ],
            Coarse::Desc => &["def", "desc", "manner", "reason"],
            Coarse::Hum => &["gr", "ind", "title", "desc"],
            Coarse::Loc => &["city", "country", "mount", "other", "state"],
            Coarse::Num => &[
                "code", "count", "date", "dist", "money", "ord", "other", "period", "perc",
                "speed", "temp", "volsize", "weight",
            ],
        }
    }
}

impl fmt::Display for Coarse {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Coarse {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Coarse::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| Error::BadLabel(s.to_string()))
    }
}

/// A coarse class with an optional fine subclass. Renders as `COARSE` or
/// `COARSE:fine`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Label {
    pub coarse: Coarse,
    pub fine: Option<&'static str>,
}

impl Label {
    pub fn coarse(coarse: Coarse) -> Self {
        Self { coarse, fine: None }
    }

    pub fn new(coarse: Coarse, fine: &str) -> Result<Self, Error> {
        let fine = coarse
            .fine_classes()
            .iter()
            .copied()
            .find(|f| *f == fine)
            .ok_or_else(|| Error::BadLabel(format!("{coarse}:{fine}")))?;
        Ok(Self { coarse, fine: Some(fine) })
    }

    pub fn to_coarse(&self) -> Self {
        Self::coarse(self.coarse)
    }

    pub fn is(&self, coarse: Coarse, fine: &str) -> bool {
        self.coarse == coarse && self.fine == Some(fine)
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.fine {
            Some(fine) => write!(f, "{}:{}", self.coarse, fine),
            None => write!(f, "{}", self.coarse),
        }
    }
}

impl FromStr for Label {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.split_once(':') {
            Some((c, f)) => Label::new(c.parse()?, f),
            None => Ok(Label::coarse(s.parse()?)),
        }
    }
}

/// A predicted expected answer type with its confidence.
#[derive(Debug, Clone, PartialEq)]
pub struct AnswerType {
    pub label: Label,
    pub confidence: f64,
}

impl AnswerType {
    pub fn new(label: Label, confidence: f64) -> Self {
        Self { label, confidence: confidence.clamp(0.0, 1.0) }
    }

    pub fn coarse(&self) -> Coarse {
        self.label.coarse
    }

    pub fn fine(&self) -> Option<&'static str> {
        self.label.fine
    }
}

/// Every label in the taxonomy: the 50 fine labels.
pub fn all_fine_labels() -> impl Iterator<Item = Label> {
    Coarse::ALL.into_iter().flat_map(|c| {
        c.fine_classes().iter().map(move |f| Label { coarse: c, fine: Some(f) })
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn taxonomy_has_fifty_fine_classes() {
        assert_eq!(all_fine_labels().count(), 50);
    }

    #[test]
    fn parse_and_render() {
        let l: Label = "HUM:ind".parse().unwrap();
        assert_eq!(l, Label::new(Coarse::Hum, "ind").unwrap());
        assert_eq!(l.to_string(), "HUM:ind");
        assert_eq!("LOC".parse::<Label>().unwrap().to_string(), "LOC");
        assert!("HUM:date".parse::<Label>().is_err());
        assert!("PERSON:ind".parse::<Label>().is_err());
        for l in all_fine_labels() {
            assert_eq!(l.to_string().parse::<Label>().unwrap(), l);
        }
    }
}
