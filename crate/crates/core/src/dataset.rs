//! Dataset manifest records shared by the generator, the evaluation
//! protocol, and the file formats.

use alloc::string::String;
use alloc::vec::Vec;

use crate::error::Error;

/// Frame class; fake frames encode as +1 in the classifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Label {
    Authentic,
    Fake,
}

impl Label {
    pub fn as_str(self) -> &'static str {
        match self {
            Label::Authentic => "authentic",
            Label::Fake => "fake",
        }
    }

    pub fn parse(s: &str) -> Result<Self, Error> {
        match s {
            "authentic" => Ok(Label::Authentic),
            "fake" => Ok(Label::Fake),
            other => Err(Error::InvalidInput(alloc::format!("unknown label: {other}"))),
        }
    }

    /// Classifier sign convention.
    pub fn sign(self) -> f64 {
        match self {
            Label::Authentic => -1.0,
            Label::Fake => 1.0,
        }
    }
}

/// One frame of a dataset: class, depicted identities, and where its
/// landmark file lives.
#[derive(Debug, Clone, PartialEq)]
pub struct ManifestRecord {
    pub frame_id: String,
    pub label: Label,
    /// Target subject, plus the source subject for fake frames.
    pub subjects: Vec<String>,
    pub landmark_path: String,
    pub image_width: u32,
    pub image_height: u32,
}

/// A validated collection of manifest records.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DatasetManifest {
    records: Vec<ManifestRecord>,
}

impl DatasetManifest {
    /// Validates frame-id uniqueness and that every record names a subject.
    pub fn new(records: Vec<ManifestRecord>) -> Result<Self, Error> {
        for (i, rec) in records.iter().enumerate() {
            if rec.subjects.is_empty() {
                return Err(Error::InvalidInput(alloc::format!(
                    "record {} ({}) lists no subjects",
                    i,
                    rec.frame_id
                )));
            }
        }
        let mut ids: Vec<&str> = records.iter().map(|r| r.frame_id.as_str()).collect();
        ids.sort_unstable();
        if ids.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidInput("duplicate frame id in manifest".into()));
        }
        Ok(Self { records })
    }

    pub fn records(&self) -> &[ManifestRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use alloc::vec;

    fn record(id: &str) -> ManifestRecord {
        ManifestRecord {
            frame_id: id.to_string(),
            label: Label::Authentic,
            subjects: vec!["s00".to_string()],
            landmark_path: alloc::format!("landmarks/{id}.csv"),
            image_width: 1280,
            image_height: 720,
        }
    }

    #[test]
    fn rejects_duplicate_frame_ids() {
        let err = DatasetManifest::new(vec![record("a"), record("a")]).unwrap_err();
        assert!(matches!(err, Error::InvalidInput(_)));
    }

    #[test]
    fn rejects_missing_subjects() {
        let mut r = record("a");
        r.subjects.clear();
        assert!(DatasetManifest::new(vec![r]).is_err());
    }

    #[test]
    fn label_round_trip() {
        assert_eq!(Label::parse("fake").unwrap(), Label::Fake);
        assert_eq!(Label::parse(Label::Authentic.as_str()).unwrap(), Label::Authentic);
        assert!(Label::parse("bogus").is_err());
        assert_eq!(Label::Fake.sign(), 1.0);
        assert_eq!(Label::Authentic.sign(), -1.0);
    }
}
