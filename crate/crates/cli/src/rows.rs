//! Scorer specs used in `eval.rows`:
//! `popularity`, `bm25`, `raw:<uni|bi|img>`, `et:<features>`,
//! `jmel:<modalities>`, `fusion:<features>`.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use mel_core::baselines::RawModality;
use mel_core::fusion::FeatureMask;
use mel_core::jmel::ModalityMask;

pub const DEFAULT_ROWS: &[&str] = &[
    "popularity",
    "bm25",
    "raw:uni",
    "raw:bi",
    "raw:img",
    "et:s2v",
    "et:s2v+img",
    "et:s2v+img+pop",
    "et:s2v+img+pop+bm25",
    "jmel:s2v",
    "jmel:s2v+img",
    "fusion:jmel+pop",
    "fusion:jmel+pop+bm25",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowSpec {
    Popularity,
    Bm25,
    Raw(RawModality),
    ExtraTrees(FeatureMask),
    Jmel(ModalityMask),
    Fusion(FeatureMask),
}

impl RowSpec {
    pub fn needs_bm25(&self) -> bool {
        match self {
            RowSpec::Bm25 => true,
            RowSpec::ExtraTrees(m) | RowSpec::Fusion(m) => m.bm25,
            _ => false,
        }
    }
}

impl FromStr for RowSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let s = s.trim();
        let (kind, arg) = s.split_once(':').unwrap_or((s, ""));
        let features = |a: &str| a.parse::<FeatureMask>().map_err(|e| format!("row `{s}`: {e}"));
        match kind.to_lowercase().as_str() {
            "popularity" | "pop" if arg.is_empty() => Ok(RowSpec::Popularity),
            "bm25" if arg.is_empty() => Ok(RowSpec::Bm25),
            "raw" => match arg.to_lowercase().as_str() {
                "uni" => Ok(RowSpec::Raw(RawModality::Uni)),
                "bi" => Ok(RowSpec::Raw(RawModality::Bi)),
                "img" => Ok(RowSpec::Raw(RawModality::Img)),
                "s2v" => Ok(RowSpec::Raw(RawModality::S2v)),
                _ => Err(format!("row `{s}`: raw modality must be uni, bi, img or s2v")),
            },
            "et" => Ok(RowSpec::ExtraTrees(features(arg)?)),
            "fusion" => Ok(RowSpec::Fusion(features(arg)?)),
            "jmel" => arg
                .parse::<ModalityMask>()
                .map(RowSpec::Jmel)
                .map_err(|e| format!("row `{s}`: {e}")),
            _ => Err(format!("unknown row `{s}`")),
        }
    }
}

impl fmt::Display for RowSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RowSpec::Popularity => f.write_str("popularity"),
            RowSpec::Bm25 => f.write_str("bm25"),
            RowSpec::Raw(m) => write!(f, "raw:{}", raw_name(*m)),
            RowSpec::ExtraTrees(m) => write!(f, "et:{m}"),
            RowSpec::Jmel(m) => write!(f, "jmel:{m}"),
            RowSpec::Fusion(m) => write!(f, "fusion:{m}"),
        }
    }
}

fn raw_name(m: RawModality) -> &'static str {
    match m {
        RawModality::Uni => "uni",
        RawModality::Bi => "bi",
        RawModality::Img => "img",
        RawModality::S2v => "s2v",
    }
}

pub fn jmel_path(models: &Path, mask: ModalityMask) -> PathBuf {
    models.join(format!("jmel-{mask}.ckpt"))
}

pub fn jmel_log_path(models: &Path, mask: ModalityMask) -> PathBuf {
    models.join(format!("jmel-{mask}.train.jsonl"))
}

pub fn fusion_path(models: &Path, mask: FeatureMask) -> PathBuf {
    models.join(format!("fusion-{mask}.ckpt"))
}

pub fn et_path(models: &Path, mask: FeatureMask) -> PathBuf {
    models.join(format!("et-{mask}.json"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_rows_parse_and_print_back() {
        for r in DEFAULT_ROWS {
            let spec: RowSpec = r.parse().unwrap();
            assert_eq!(spec.to_string().parse::<RowSpec>().unwrap(), spec);
        }
    }

    #[test]
    fn bad_rows_are_rejected() {
        for r in ["", "raw:video", "et:", "jmel:pop", "popularity:uni", "svm:s2v"] {
            assert!(r.parse::<RowSpec>().is_err(), "{r}");
        }
    }

    #[test]
    fn bm25_need_follows_the_mask() {
        assert!("bm25".parse::<RowSpec>().unwrap().needs_bm25());
        assert!("fusion:jmel+bm25".parse::<RowSpec>().unwrap().needs_bm25());
        assert!(!"et:s2v+img".parse::<RowSpec>().unwrap().needs_bm25());
        assert!(!"jmel:s2v".parse::<RowSpec>().unwrap().needs_bm25());
    }

    #[test]
    fn artifact_names_use_canonical_masks() {
        let m: ModalityMask = "img+s2v".parse().unwrap();
        assert_eq!(jmel_path(Path::new("m"), m), PathBuf::from("m/jmel-uni+bi+img.ckpt"));
        let f: FeatureMask = "pop+jmel".parse().unwrap();
        assert_eq!(fusion_path(Path::new("m"), f), PathBuf::from("m/fusion-jmel+pop.ckpt"));
    }
}
