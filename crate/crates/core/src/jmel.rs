//! Joint multimodal representation: one shared branch network per modality,
//! concatenated and projected by a final linear layer. Mentions and entities
//! go through the same parameters; similarity is the cosine of the outputs.

use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::sync::atomic::{AtomicUsize, Ordering};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{FeatureBundle, FeatureDims};
use crate::nn::params::join_name;
use crate::nn::linalg::cosine;
use crate::nn::{checkpoint, Activation, DenseLayer, LayerNormCache, LayerNormParams, Params};
use crate::rng::derive_seed;

pub const DISTANCE_EPSILON: f64 = 1e-12;

static ZERO_NORM_EVENTS: AtomicUsize = AtomicUsize::new(0);

/// Number of similarity calls that hit a zero-norm representation.
pub fn zero_norm_events() -> usize {
    ZERO_NORM_EVENTS.load(Ordering::Relaxed)
}

/// Cosine, or 0 when either side has zero norm (counted).
pub fn cosine_or_zero(a: &[f64], b: &[f64]) -> f64 {
    cosine(a, b).unwrap_or_else(|| {
        ZERO_NORM_EVENTS.fetch_add(1, Ordering::Relaxed);
        0.0
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Modality {
    Uni,
    Bi,
    Img,
}

impl Modality {
    pub const ALL: [Modality; 3] = [Modality::Uni, Modality::Bi, Modality::Img];

    pub fn as_str(self) -> &'static str {
        match self {
            Modality::Uni => "uni",
            Modality::Bi => "bi",
            Modality::Img => "img",
        }
    }

    fn input<'a>(self, bundle: &'a FeatureBundle) -> &'a [f64] {
        match self {
            Modality::Uni => &bundle.u,
            Modality::Bi => &bundle.b,
            Modality::Img => &bundle.i,
        }
    }

    fn dim(self, dims: FeatureDims) -> usize {
        match self {
            Modality::Uni => dims.dim_u,
            Modality::Bi => dims.dim_b,
            Modality::Img => dims.dim_i,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ModalityMask {
    pub uni: bool,
    pub bi: bool,
    pub img: bool,
}

impl ModalityMask {
    pub const TEXT: ModalityMask = ModalityMask { uni: true, bi: true, img: false };
    pub const ALL: ModalityMask = ModalityMask { uni: true, bi: true, img: true };

    pub fn contains(self, m: Modality) -> bool {
        match m {
            Modality::Uni => self.uni,
            Modality::Bi => self.bi,
            Modality::Img => self.img,
        }
    }

    pub fn active(self) -> impl Iterator<Item = Modality> {
        Modality::ALL.into_iter().filter(move |m| self.contains(*m))
    }

    pub fn count(self) -> usize {
        self.active().count()
    }

    pub fn is_empty(self) -> bool {
        self.count() == 0
    }

    pub fn without_img(self) -> Self {
        Self { img: false, ..self }
    }

    /// Row label in result tables, e.g. `S2V + Img`.
    pub fn label(self) -> String {
        let mut parts = Vec::new();
        match (self.uni, self.bi) {
            (true, true) => parts.push("S2V"),
            (true, false) => parts.push("S2V-uni"),
            (false, true) => parts.push("S2V-bi"),
            _ => {}
        }
        if self.img {
            parts.push("Img");
        }
        parts.join(" + ")
    }
}

impl fmt::Display for ModalityMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<&str> = self.active().map(Modality::as_str).collect();
        f.write_str(&names.join("+"))
    }
}

impl FromStr for ModalityMask {
    type Err = Error;

    /// Accepts `uni`, `bi`, `img`, and `s2v`/`txt` (both text branches),
    /// separated by `+` or `,`.
    fn from_str(s: &str) -> Result<Self> {
        let mut mask = ModalityMask { uni: false, bi: false, img: false };
        for tok in s.split(['+', ',']).map(|t| t.trim().to_lowercase()).filter(|t| !t.is_empty()) {
            match tok.as_str() {
                "uni" => mask.uni = true,
                "bi" => mask.bi = true,
                "img" | "image" => mask.img = true,
                "s2v" | "txt" | "text" => {
                    mask.uni = true;
                    mask.bi = true;
                }
                other => return Err(Error::Config(format!("unknown modality `{other}`"))),
            }
        }
        if mask.is_empty() {
            return Err(Error::Config(format!("empty modality mask `{s}`")));
        }
        Ok(mask)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct JmelConfig {
    pub dims: FeatureDims,
    pub d_hidden: usize,
    pub d_branch: usize,
    pub d_joint: usize,
    pub mask: ModalityMask,
    pub margin: f64,
    /// ReLU after the second dense layer of each branch.
    pub second_relu: bool,
    /// Normalize before the second ReLU instead of last.
    pub norm_before_relu: bool,
}

impl Default for JmelConfig {
    fn default() -> Self {
        Self {
            dims: FeatureDims::REFERENCE,
            d_hidden: 256,
            d_branch: 128,
            d_joint: 128,
            mask: ModalityMask::ALL,
            margin: 1.0,
            second_relu: true,
            norm_before_relu: false,
        }
    }
}

impl JmelConfig {
    pub fn validate(&self) -> Result<()> {
        if self.mask.is_empty() {
            return Err(Error::Config("modality mask is empty".into()));
        }
        if self.d_hidden == 0 || self.d_joint == 0 || self.d_branch < 2 {
            return Err(Error::Config("d_hidden, d_joint must be positive and d_branch >= 2".into()));
        }
        for m in self.mask.active() {
            if m.dim(self.dims) == 0 {
                return Err(Error::Config(format!("input dim for `{}` is zero", m.as_str())));
            }
        }
        if !(self.margin >= 0.0) {
            return Err(Error::Config("margin must be nonnegative".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchParams {
    pub dense1: DenseLayer,
    pub dense2: DenseLayer,
    pub norm: LayerNormParams,
}

#[derive(Debug, Clone)]
struct BranchCache {
    z1: Vec<f64>,
    h1: Vec<f64>,
    z2: Vec<f64>,
    /// Input to layer norm.
    pre_norm: Vec<f64>,
    norm: LayerNormCache,
    /// Layer-norm output (pre final ReLU when normalizing first).
    normed: Vec<f64>,
    out: Vec<f64>,
}

impl BranchParams {
    fn new(d_in: usize, config: &JmelConfig, seed: u64) -> Self {
        Self {
            dense1: DenseLayer::xavier(d_in, config.d_hidden, derive_seed(seed, "dense1")),
            dense2: DenseLayer::xavier(config.d_hidden, config.d_branch, derive_seed(seed, "dense2")),
            norm: LayerNormParams::new(config.d_branch),
        }
    }

    fn forward(&self, x: &[f64], config: &JmelConfig) -> Result<BranchCache> {
        let z1 = self.dense1.forward(x)?;
        let h1 = Activation::Relu.forward(&z1);
        let z2 = self.dense2.forward(&h1)?;
        let relu2 = |v: &[f64]| {
            if config.second_relu {
                Activation::Relu.forward(v)
            } else {
                v.to_vec()
            }
        };
        if config.norm_before_relu {
            let (normed, norm) = self.norm.forward(&z2)?;
            let out = relu2(&normed);
            Ok(BranchCache { pre_norm: z2.clone(), z1, h1, z2, norm, normed, out })
        } else {
            let pre_norm = relu2(&z2);
            let (normed, norm) = self.norm.forward(&pre_norm)?;
            Ok(BranchCache { z1, h1, z2, pre_norm, norm, out: normed.clone(), normed })
        }
    }

    fn backward_into(
        &self,
        x: &[f64],
        cache: &BranchCache,
        d_out: &[f64],
        config: &JmelConfig,
        grad: &mut BranchParams,
    ) -> Result<()> {
        let relu2_back = |pre: &[f64], post: &[f64], d: &[f64]| {
            if config.second_relu {
                Activation::Relu.backward(pre, post, d)
            } else {
                d.to_vec()
            }
        };
        let dz2 = if config.norm_before_relu {
            let d_normed = relu2_back(&cache.normed, &cache.out, d_out);
            self.norm.backward_into(&cache.norm, &d_normed, &mut grad.norm)
        } else {
            let d_pre = self.norm.backward_into(&cache.norm, d_out, &mut grad.norm);
            relu2_back(&cache.z2, &cache.pre_norm, &d_pre)
        };
        let dh1 = self.dense2.backward_into(&cache.h1, &dz2, &mut grad.dense2)?;
        let dz1 = Activation::Relu.backward(&cache.z1, &cache.h1, &dh1);
        self.dense1.backward_into(x, &dz1, &mut grad.dense1)?;
        Ok(())
    }
}

impl Params for BranchParams {
    fn visit(&self, prefix: &str, f: &mut dyn FnMut(&str, &[f64])) {
        self.dense1.visit(&join_name(prefix, "dense1"), f);
        self.dense2.visit(&join_name(prefix, "dense2"), f);
        self.norm.visit(&join_name(prefix, "norm"), f);
    }

    fn visit_mut(&mut self, f: &mut dyn FnMut(&mut [f64])) {
        self.dense1.visit_mut(f);
        self.dense2.visit_mut(f);
        self.norm.visit_mut(f);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JmelParams {
    pub config: JmelConfig,
    pub branch_uni: Option<BranchParams>,
    pub branch_bi: Option<BranchParams>,
    pub branch_img: Option<BranchParams>,
    pub final_layer: DenseLayer,
}

/// Forward intermediates needed by [`JmelParams::backward_into`].
#[derive(Debug, Clone)]
pub struct JmelCache {
    branches: Vec<(Modality, BranchCache)>,
    concat: Vec<f64>,
}

impl JmelParams {
    /// Xavier-initialized model; only the masked-in branches are allocated.
    pub fn new(config: JmelConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        let branch = |m: Modality| {
            config
                .mask
                .contains(m)
                .then(|| BranchParams::new(m.dim(config.dims), &config, derive_seed(seed, m.as_str())))
        };
        Ok(Self {
            branch_uni: branch(Modality::Uni),
            branch_bi: branch(Modality::Bi),
            branch_img: branch(Modality::Img),
            final_layer: DenseLayer::xavier(
                config.mask.count() * config.d_branch,
                config.d_joint,
                derive_seed(seed, "final"),
            ),
            config,
        })
    }

    fn branch(&self, m: Modality) -> Option<&BranchParams> {
        match m {
            Modality::Uni => self.branch_uni.as_ref(),
            Modality::Bi => self.branch_bi.as_ref(),
            Modality::Img => self.branch_img.as_ref(),
        }
    }

    fn branch_mut(&mut self, m: Modality) -> Option<&mut BranchParams> {
        match m {
            Modality::Uni => self.branch_uni.as_mut(),
            Modality::Bi => self.branch_bi.as_mut(),
            Modality::Img => self.branch_img.as_mut(),
        }
    }

    fn check_bundle(&self, bundle: &FeatureBundle) -> Result<()> {
        for m in self.config.mask.active() {
            let want = m.dim(self.config.dims);
            let got = m.input(bundle).len();
            if want != got {
                return Err(Error::DimMismatch {
                    key: format!("{} input", m.as_str()),
                    expected: want,
                    got,
                });
            }
        }
        Ok(())
    }

    pub fn forward_cached(&self, bundle: &FeatureBundle) -> Result<(Vec<f64>, JmelCache)> {
        self.check_bundle(bundle)?;
        let mut branches = Vec::with_capacity(3);
        let mut concat = Vec::with_capacity(self.final_layer.in_dim());
        for m in self.config.mask.active() {
            let params = self.branch(m).ok_or_else(|| Error::Config(format!("missing `{}` branch", m.as_str())))?;
            let cache = params.forward(m.input(bundle), &self.config)?;
            concat.extend_from_slice(&cache.out);
            branches.push((m, cache));
        }
        let out = self.final_layer.forward(&concat)?;
        Ok((out, JmelCache { branches, concat }))
    }

    pub fn forward(&self, bundle: &FeatureBundle) -> Result<Vec<f64>> {
        Ok(self.forward_cached(bundle)?.0)
    }

    /// Accumulates parameter gradients of `dJ · J(bundle)` into `grad`.
    pub fn backward_into(
        &self,
        bundle: &FeatureBundle,
        cache: &JmelCache,
        d_joint: &[f64],
        grad: &mut JmelParams,
    ) -> Result<()> {
        let d_concat = self.final_layer.backward_into(&cache.concat, d_joint, &mut grad.final_layer)?;
        let width = self.config.d_branch;
        for (k, (m, bc)) in cache.branches.iter().enumerate() {
            let d_out = &d_concat[k * width..(k + 1) * width];
            let params = self.branch(*m).expect("cached branch exists");
            let g = grad.branch_mut(*m).expect("gradient twin has the same branches");
            params.backward_into(m.input(bundle), bc, d_out, &self.config, g)?;
        }
        Ok(())
    }

    pub fn similarity(&self, mention: &FeatureBundle, entity: &FeatureBundle) -> Result<f64> {
        let jm = self.forward(mention)?;
        let je = self.forward(entity)?;
        Ok(cosine_or_zero(&jm, &je))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        checkpoint::save(self, serde_json::to_value(self.config)?, path)
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        checkpoint::encode(self, serde_json::to_value(self.config)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let (header, values) = checkpoint::load(path)?;
        let config: JmelConfig = serde_json::from_value(header.model.clone())?;
        let mut model = Self::new(config, 0)?;
        checkpoint::restore_into(&mut model, &header, values)?;
        Ok(model)
    }
}

impl Params for JmelParams {
    fn visit(&self, prefix: &str, f: &mut dyn FnMut(&str, &[f64])) {
        for m in Modality::ALL {
            if let Some(b) = self.branch(m) {
                b.visit(&join_name(prefix, &format!("branch_{}", m.as_str())), f);
            }
        }
        self.final_layer.visit(&join_name(prefix, "final"), f);
    }

    fn visit_mut(&mut self, f: &mut dyn FnMut(&mut [f64])) {
        for m in Modality::ALL {
            if let Some(b) = self.branch_mut(m) {
                b.visit_mut(f);
            }
        }
        self.final_layer.visit_mut(f);
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TripletOutput {
    pub loss: f64,
    pub d_mention: Vec<f64>,
    pub d_pos: Vec<f64>,
    pub d_neg: Vec<f64>,
    /// Distances to the positive and negative.
    pub d_plus: f64,
    pub d_minus: f64,
}

/// `max(0, margin + ‖m − p‖ − ‖m − n‖)` with gradients w.r.t. all three inputs.
pub fn triplet_loss(jm: &[f64], jp: &[f64], jn: &[f64], margin: f64) -> TripletOutput {
    let diff_p: Vec<f64> = jm.iter().zip(jp).map(|(a, b)| a - b).collect();
    let diff_n: Vec<f64> = jm.iter().zip(jn).map(|(a, b)| a - b).collect();
    let d_plus = diff_p.iter().map(|v| v * v).sum::<f64>().sqrt();
    let d_minus = diff_n.iter().map(|v| v * v).sum::<f64>().sqrt();
    let raw = margin + d_plus - d_minus;
    let n = jm.len();
    if raw <= 0.0 {
        return TripletOutput {
            loss: 0.0,
            d_mention: vec![0.0; n],
            d_pos: vec![0.0; n],
            d_neg: vec![0.0; n],
            d_plus,
            d_minus,
        };
    }
    let up: Vec<f64> = diff_p.iter().map(|v| v / d_plus.max(DISTANCE_EPSILON)).collect();
    let un: Vec<f64> = diff_n.iter().map(|v| v / d_minus.max(DISTANCE_EPSILON)).collect();
    TripletOutput {
        loss: raw,
        d_mention: up.iter().zip(&un).map(|(a, b)| a - b).collect(),
        d_pos: up.iter().map(|v| -v).collect(),
        d_neg: un,
        d_plus,
        d_minus,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::{finite_diff_grad, max_relative_error};
    use crate::rng::rng_from;
    use proptest::prelude::*;
    use rand::Rng as _;

    fn toy_config(mask: ModalityMask) -> JmelConfig {
        JmelConfig {
            dims: FeatureDims { dim_u: 6, dim_b: 5, dim_i: 7 },
            d_hidden: 8,
            d_branch: 4,
            d_joint: 3,
            mask,
            ..JmelConfig::default()
        }
    }

    fn random_bundle(dims: FeatureDims, seed: u64) -> FeatureBundle {
        let mut rng = rng_from(seed);
        let mut v = |n: usize| (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        FeatureBundle { u: v(dims.dim_u), b: v(dims.dim_b), i: v(dims.dim_i) }
    }

    #[test]
    fn single_branch_output_shape() {
        let cfg = JmelConfig {
            dims: FeatureDims { dim_u: 5, dim_b: 5, dim_i: 5 },
            d_hidden: 6,
            d_branch: 4,
            d_joint: 2,
            mask: "uni".parse().unwrap(),
            ..JmelConfig::default()
        };
        let model = JmelParams::new(cfg, 1).unwrap();
        let out = model.forward(&random_bundle(cfg.dims, 2)).unwrap();
        assert_eq!(out.len(), 2);
        assert_eq!(model.final_layer.in_dim(), 4);
    }

    #[test]
    fn empty_mask_is_rejected() {
        assert!("".parse::<ModalityMask>().is_err());
        let cfg = toy_config(ModalityMask { uni: false, bi: false, img: false });
        assert!(JmelParams::new(cfg, 0).is_err());
    }

    #[test]
    fn mask_parsing_and_labels() {
        let m: ModalityMask = "s2v+img".parse().unwrap();
        assert_eq!(m, ModalityMask::ALL);
        assert_eq!(m.label(), "S2V + Img");
        assert_eq!(m.to_string(), "uni+bi+img");
        assert_eq!("txt".parse::<ModalityMask>().unwrap().label(), "S2V");
        assert!("audio".parse::<ModalityMask>().is_err());
    }

    #[test]
    fn dim_mismatch_names_the_modality() {
        let cfg = toy_config(ModalityMask::ALL);
        let model = JmelParams::new(cfg, 0).unwrap();
        let mut b = random_bundle(cfg.dims, 0);
        b.i.pop();
        let err = model.forward(&b).unwrap_err();
        assert!(err.to_string().contains("img"), "{err}");
    }

    #[test]
    fn identical_bundles_have_similarity_one() {
        let cfg = toy_config(ModalityMask::ALL);
        let model = JmelParams::new(cfg, 3).unwrap();
        let b = random_bundle(cfg.dims, 4);
        assert!((model.similarity(&b, &b).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn similarity_matches_separate_forwards_and_is_symmetric() {
        let cfg = toy_config(ModalityMask::ALL);
        let model = JmelParams::new(cfg, 5).unwrap();
        let a = random_bundle(cfg.dims, 6);
        let b = random_bundle(cfg.dims, 7);
        let expected = cosine(&model.forward(&a).unwrap(), &model.forward(&b).unwrap()).unwrap();
        assert_eq!(model.similarity(&a, &b).unwrap(), expected);
        assert_eq!(model.similarity(&b, &a).unwrap(), expected);
    }

    #[test]
    fn antipodal_vectors_have_cosine_minus_one() {
        assert!((cosine_or_zero(&[1.0, -2.0], &[-1.0, 2.0]) + 1.0).abs() < 1e-12);
        let before = zero_norm_events();
        assert_eq!(cosine_or_zero(&[0.0, 0.0], &[1.0, 2.0]), 0.0);
        assert!(zero_norm_events() > before);
    }

    #[test]
    fn masked_image_branch_ignores_image_input() {
        let cfg = toy_config(ModalityMask::TEXT);
        let model = JmelParams::new(cfg, 8).unwrap();
        let a = random_bundle(cfg.dims, 9);
        let mut b = a.clone();
        b.i.iter_mut().for_each(|v| *v += 5.0);
        b.i.push(1.0);
        assert_eq!(model.forward(&a).unwrap(), model.forward(&b).unwrap());
    }

    #[test]
    fn triplet_examples() {
        let zero = triplet_loss(&[0.0, 0.0], &[0.0, 0.0], &[2.0, 0.0], 1.0);
        assert_eq!(zero.loss, 0.0);
        assert!(zero.d_mention.iter().all(|v| *v == 0.0));
        let tie = triplet_loss(&[0.3, -0.2], &[1.0, 1.0], &[1.0, 1.0], 1.0);
        assert!((tie.loss - 1.0).abs() < 1e-15);
    }

    #[test]
    fn triplet_gradient_matches_finite_differences() {
        let mut rng = rng_from(11);
        let mut v = |n: usize| -> Vec<f64> { (0..n).map(|_| rng.random_range(-1.0..1.0)).collect() };
        let (m, p, n) = (v(4), v(4), v(4));
        let out = triplet_loss(&m, &p, &n, 2.0);
        assert!(out.loss > 1e-3);
        let x: Vec<f64> = m.iter().chain(&p).chain(&n).copied().collect();
        let num = finite_diff_grad(|x| triplet_loss(&x[0..4], &x[4..8], &x[8..12], 2.0).loss, &x, 1e-5);
        let ana: Vec<f64> = out.d_mention.iter().chain(&out.d_pos).chain(&out.d_neg).copied().collect();
        assert!(max_relative_error(&ana, &num, 1e-6) < 1e-6);
    }

    fn gradcheck(cfg: JmelConfig, seed: u64) -> f64 {
        let model = JmelParams::new(cfg, seed).unwrap();
        let bundle = random_bundle(cfg.dims, seed + 100);
        let w: Vec<f64> = random_bundle(FeatureDims { dim_u: cfg.d_joint, dim_b: 0, dim_i: 0 }, seed + 200).u;
        let (_, cache) = model.forward_cached(&bundle).unwrap();
        let mut grad = model.zeros_like();
        model.backward_into(&bundle, &cache, &w, &mut grad).unwrap();
        let x0 = model.flatten();
        let mut probe = model.clone();
        let num = finite_diff_grad(
            |x| {
                probe.load_flat(x).unwrap();
                let j = probe.forward(&bundle).unwrap();
                j.iter().zip(&w).map(|(a, b)| a * b).sum()
            },
            &x0,
            1e-5,
        );
        max_relative_error(&grad.flatten(), &num, 1e-4)
    }

    #[test]
    fn full_model_gradient_matches_finite_differences() {
        for (k, (second_relu, norm_before_relu)) in [(true, false), (true, true), (false, false)].into_iter().enumerate() {
            let cfg = JmelConfig { second_relu, norm_before_relu, ..toy_config(ModalityMask::ALL) };
            let err = gradcheck(cfg, k as u64);
            assert!(err < 1e-4, "variant {k}: {err}");
        }
    }

    #[test]
    fn checkpoint_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = toy_config("uni+img".parse().unwrap());
        let model = JmelParams::new(cfg, 12).unwrap();
        let path = dir.path().join("jmel.ckpt");
        model.save(&path).unwrap();
        assert_eq!(JmelParams::load(&path).unwrap(), model);
    }

    proptest! {
        #[test]
        fn triplet_loss_is_nonnegative(
            m in prop::collection::vec(-3.0f64..3.0, 3),
            p in prop::collection::vec(-3.0f64..3.0, 3),
            n in prop::collection::vec(-3.0f64..3.0, 3),
            margin in 0.0f64..2.0,
        ) {
            let out = triplet_loss(&m, &p, &n, margin);
            prop_assert!(out.loss >= 0.0);
            prop_assert_eq!(out.loss == 0.0, out.d_minus >= margin + out.d_plus);
        }

        #[test]
        fn mention_and_entity_sides_share_the_map(seed in 0u64..1000) {
            let cfg = toy_config(ModalityMask::ALL);
            let model = JmelParams::new(cfg, seed).unwrap();
            let b = random_bundle(cfg.dims, seed);
            prop_assert_eq!(model.forward(&b).unwrap(), model.forward(&b.clone()).unwrap());
        }
    }
}
