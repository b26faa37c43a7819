//! Versioned JSON persistence of fitted forests.
//!
//! Layout: a `header` object (format and generator versions, base seed, full
//! config, normalizer, scalar type) followed by `trees`, each a flat pre-order
//! node array with child indices. Floats are written as the shortest decimal
//! that parses back to the identical value, so reloaded models score
//! bit-exactly like the originals.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forest::{ForestConfig, ForestModel};
use crate::scalar::Scalar;
use crate::tree::IsolationTree;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelHeader {
    pub format_version: u32,
    pub generator_version: String,
    pub scalar: String,
    pub base_seed: u64,
    pub config: ForestConfig,
    pub q: f64,
    pub n_cols: usize,
    pub sample_size: usize,
}

#[derive(Serialize)]
#[serde(bound = "F: Scalar")]
struct DocumentRef<'a, F> {
    header: ModelHeader,
    trees: &'a [IsolationTree<F>],
}

#[derive(Deserialize)]
#[serde(bound = "F: Scalar")]
struct Document<F> {
    header: ModelHeader,
    trees: Vec<IsolationTree<F>>,
}

fn header<F: Scalar>(model: &ForestModel<F>) -> ModelHeader {
    ModelHeader {
        format_version: FORMAT_VERSION,
        generator_version: model.generator_version.clone(),
        scalar: F::NAME.to_string(),
        base_seed: model.config.seed,
        config: model.config.clone(),
        q: model.normalizer,
        n_cols: model.n_cols,
        sample_size: model.sample_size,
    }
}

pub fn write_model<F: Scalar, W: Write>(model: &ForestModel<F>, writer: W) -> Result<()> {
    let doc = DocumentRef {
        header: header(model),
        trees: &model.trees,
    };
    let mut writer = writer;
    serde_json::to_writer(&mut writer, &doc)?;
    writer.write_all(b"\n")?;
    Ok(())
}

pub fn to_json<F: Scalar>(model: &ForestModel<F>) -> Result<String> {
    let mut buf = Vec::new();
    write_model(model, &mut buf)?;
    Ok(String::from_utf8(buf).expect("serde_json emits UTF-8"))
}

pub fn read_model<F: Scalar, R: Read>(reader: R) -> Result<ForestModel<F>> {
    let doc: Document<F> = serde_json::from_reader(reader)?;
    let h = doc.header;
    if h.format_version != FORMAT_VERSION {
        return Err(Error::Format(format!(
            "unsupported format version {} (expected {FORMAT_VERSION})",
            h.format_version
        )));
    }
    if h.scalar != F::NAME {
        return Err(Error::Format(format!(
            "model stores {} values, requested {}",
            h.scalar,
            F::NAME
        )));
    }
    if h.base_seed != h.config.seed {
        return Err(Error::Format("header seed disagrees with config seed".into()));
    }
    h.config.validate()?;
    if !(h.q.is_finite() && h.q > 0.0) {
        return Err(Error::Format(format!("normalizer must be positive, got {}", h.q)));
    }
    if doc.trees.len() != h.config.n_trees {
        return Err(Error::Format(format!(
            "header declares {} trees, file holds {}",
            h.config.n_trees,
            doc.trees.len()
        )));
    }
    for tree in &doc.trees {
        tree.validate(h.n_cols)?;
    }
    Ok(ForestModel {
        trees: doc.trees,
        normalizer: h.q,
        config: h.config,
        n_cols: h.n_cols,
        sample_size: h.sample_size,
        generator_version: h.generator_version,
    })
}

pub fn from_json<F: Scalar>(text: &str) -> Result<ForestModel<F>> {
    read_model(text.as_bytes())
}

pub fn save_model<F: Scalar>(model: &ForestModel<F>, path: impl AsRef<Path>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_model(model, &mut w)?;
    w.flush()?;
    Ok(())
}

pub fn load_model<F: Scalar>(path: impl AsRef<Path>) -> Result<ForestModel<F>> {
    read_model(BufReader::new(File::open(path)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::ColumnMatrix;
    use crate::forest::{fit_forest, score_matrix};
    use crate::rng::derive_stream;

    fn data(m: usize) -> ColumnMatrix<f64> {
        let mut s = derive_stream(11, 0);
        let rows: Vec<Vec<f64>> = (0..m)
            .map(|_| (0..4).map(|_| s.draw_standard_normal() * 1e3).collect())
            .collect();
        ColumnMatrix::from_rows(&rows).unwrap()
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let matrix = data(300);
        for config in [
            ForestConfig::fcf(),
            ForestConfig::iforest(),
            ForestConfig::sciforest_like(),
        ] {
            let model = fit_forest(&matrix, &ForestConfig { n_trees: 20, ..config }.with_seed(3)).unwrap();
            let text = to_json(&model).unwrap();
            let back: ForestModel<f64> = from_json(&text).unwrap();
            assert_eq!(back, model);
            let a = score_matrix(&matrix, &model).unwrap();
            let b = score_matrix(&matrix, &back).unwrap();
            assert!(a.iter().zip(&b).all(|(x, y)| x.to_bits() == y.to_bits()));
            assert_eq!(to_json(&back).unwrap(), text);
        }
    }

    #[test]
    fn f32_round_trip() {
        let m64 = data(100);
        let rows: Vec<Vec<f32>> = (0..100)
            .map(|i| m64.row(i).iter().map(|&v| v as f32).collect())
            .collect();
        let matrix = ColumnMatrix::<f32>::from_rows(&rows).unwrap();
        let model = fit_forest(
            &matrix,
            &ForestConfig {
                n_trees: 10,
                ..ForestConfig::fcf()
            },
        )
        .unwrap();
        let back: ForestModel<f32> = from_json(&to_json(&model).unwrap()).unwrap();
        assert_eq!(back, model);
        assert!(matches!(
            from_json::<f64>(&to_json(&model).unwrap()),
            Err(Error::Format(_))
        ));
    }

    #[test]
    fn file_round_trip() {
        let matrix = data(64);
        let model = fit_forest(
            &matrix,
            &ForestConfig {
                n_trees: 5,
                ..ForestConfig::fcf()
            },
        )
        .unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.json");
        save_model(&model, &path).unwrap();
        assert_eq!(load_model::<f64>(&path).unwrap(), model);
    }

    #[test]
    fn rejects_tampered_documents() {
        let matrix = data(64);
        let model = fit_forest(
            &matrix,
            &ForestConfig {
                n_trees: 3,
                ..ForestConfig::fcf()
            },
        )
        .unwrap();
        let text = to_json(&model).unwrap();
        let mut v: serde_json::Value = serde_json::from_str(&text).unwrap();
        v["header"]["format_version"] = 99.into();
        assert!(matches!(from_json::<f64>(&v.to_string()), Err(Error::Format(_))));

        let mut v: serde_json::Value = serde_json::from_str(&text).unwrap();
        v["trees"].as_array_mut().unwrap().pop();
        assert!(matches!(from_json::<f64>(&v.to_string()), Err(Error::Format(_))));

        let mut v: serde_json::Value = serde_json::from_str(&text).unwrap();
        v["header"]["n_cols"] = 1.into();
        assert!(from_json::<f64>(&v.to_string()).is_err());

        assert!(matches!(from_json::<f64>("{not json"), Err(Error::Json(_))));
    }
}
