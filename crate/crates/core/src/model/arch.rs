//! Architecture descriptors and the wiring of every autoencoder variant.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grad::{Activation, DenseLayer};
use crate::sim::{run_patched_with, AnsatzConfig, AnsatzParams, EmbedMode, Measurement};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    ClassicalAe,
    ClassicalVae,
    /// Fully quantum baseline: amplitude-embedded encoder, probability-readout decoder.
    FbqAe,
    FbqVae,
    /// Baseline plus a dense layer after each side's circuit.
    HbqAe,
    HbqVae,
    /// Patched ("scalable") circuits wrapped in dense layers.
    SqAe,
    SqVae,
}

impl Variant {
    pub const ALL: [Variant; 8] = [
        Variant::ClassicalAe,
        Variant::ClassicalVae,
        Variant::FbqAe,
        Variant::FbqVae,
        Variant::HbqAe,
        Variant::HbqVae,
        Variant::SqAe,
        Variant::SqVae,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            Variant::ClassicalAe => "classical-ae",
            Variant::ClassicalVae => "classical-vae",
            Variant::FbqAe => "fbq-ae",
            Variant::FbqVae => "fbq-vae",
            Variant::HbqAe => "hbq-ae",
            Variant::HbqVae => "hbq-vae",
            Variant::SqAe => "sq-ae",
            Variant::SqVae => "sq-vae",
        }
    }

    pub fn is_vae(self) -> bool {
        matches!(
            self,
            Variant::ClassicalVae | Variant::FbqVae | Variant::HbqVae | Variant::SqVae
        )
    }

    pub fn is_classical(self) -> bool {
        matches!(self, Variant::ClassicalAe | Variant::ClassicalVae)
    }

    /// F-BQ circuits read probabilities, so their inputs must be normalized distributions.
    pub fn requires_l1_input(self) -> bool {
        matches!(self, Variant::FbqAe | Variant::FbqVae)
    }

    /// The same architecture without the Gaussian head.
    pub fn ae_counterpart(self) -> Variant {
        match self {
            Variant::ClassicalVae => Variant::ClassicalAe,
            Variant::FbqVae => Variant::FbqAe,
            Variant::HbqVae => Variant::HbqAe,
            Variant::SqVae => Variant::SqAe,
            other => other,
        }
    }

    pub fn default_layers(self) -> usize {
        match self {
            Variant::SqAe | Variant::SqVae => 5,
            _ => 3,
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Variant::ALL
            .into_iter()
            .find(|v| v.tag() == s)
            .ok_or_else(|| {
                let known: Vec<_> = Variant::ALL.iter().map(|v| v.tag()).collect();
                Error::Usage(format!("unknown variant `{s}` (known: {})", known.join(", ")))
            })
    }
}

/// `p · log₂(D / p)`: the latent width of a patched amplitude-embedded encoder.
pub fn latent_dim_for(feature_dim: usize, patches: usize) -> Result<usize> {
    if patches == 0 || feature_dim % patches != 0 {
        return Err(Error::shape(format!(
            "feature dimension {feature_dim} is not divisible into {patches} patches"
        )));
    }
    let per_patch = feature_dim / patches;
    if !per_patch.is_power_of_two() {
        return Err(Error::shape(format!(
            "patch width {per_patch} is not a power of two"
        )));
    }
    Ok(patches * per_patch.trailing_zeros() as usize)
}

/// Everything needed to build a model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub variant: Variant,
    pub feature_dim: usize,
    pub patches: usize,
    pub layers: usize,
    /// Hidden widths of the classical encoder (mirrored by the decoder).
    /// Classical variants only; defaults to `[D/2, D/4]`.
    pub hidden: Option<Vec<usize>>,
    /// Classical bottleneck width; defaults to `latent_dim_for(D, patches)`.
    pub latent_dim: Option<usize>,
}

impl ModelSpec {
    pub fn new(variant: Variant, feature_dim: usize) -> Self {
        Self {
            variant,
            feature_dim,
            patches: 1,
            layers: variant.default_layers(),
            hidden: None,
            latent_dim: None,
        }
    }

    pub fn with_patches(mut self, patches: usize) -> Self {
        self.patches = patches;
        self
    }

    pub fn with_layers(mut self, layers: usize) -> Self {
        self.layers = layers;
        self
    }

    pub fn with_hidden(mut self, hidden: Vec<usize>) -> Self {
        self.hidden = Some(hidden);
        self
    }

    pub fn with_latent_dim(mut self, latent_dim: usize) -> Self {
        self.latent_dim = Some(latent_dim);
        self
    }
}

/// A circuit stage: embedding, ansatz, and readout, with its own angles.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CircuitStage {
    pub config: AnsatzConfig,
    pub params: AnsatzParams,
    pub embed: EmbedMode,
    pub measure: Measurement,
}

impl CircuitStage {
    pub fn random<R: Rng + ?Sized>(
        input_dim: usize,
        patches: usize,
        layers: usize,
        embed: EmbedMode,
        measure: Measurement,
        rng: &mut R,
    ) -> Result<Self> {
        let config = AnsatzConfig::for_input(input_dim, patches, layers, embed)?;
        let params = AnsatzParams::random(&config, rng);
        Ok(Self { config, params, embed, measure })
    }

    pub fn forward(&self, input: &[f64]) -> Result<Vec<f64>> {
        run_patched_with(input, &self.config, &self.params, self.embed, self.measure)
    }

    pub fn output_len(&self) -> usize {
        self.config.output_len(self.measure)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Stage {
    Circuit(CircuitStage),
    Dense(DenseLayer),
}

impl Stage {
    pub fn input_len(&self) -> usize {
        match self {
            Stage::Circuit(c) => c.config.feature_dim,
            Stage::Dense(d) => d.in_dim(),
        }
    }

    pub fn output_len(&self) -> usize {
        match self {
            Stage::Circuit(c) => c.output_len(),
            Stage::Dense(d) => d.out_dim(),
        }
    }

    pub fn quantum_count(&self) -> usize {
        match self {
            Stage::Circuit(c) => c.params.len(),
            Stage::Dense(_) => 0,
        }
    }

    pub fn classical_count(&self) -> usize {
        match self {
            Stage::Circuit(_) => 0,
            Stage::Dense(d) => d.param_count(),
        }
    }
}

/// Two dense maps producing `μ` and `log σ²` from the encoder output.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussianHead {
    pub mu: DenseLayer,
    pub log_var: DenseLayer,
}

/// An encoder/decoder pair assembled from circuit and dense stages.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HybridAutoencoder {
    pub(crate) spec: ModelSpec,
    pub(crate) latent_dim: usize,
    pub(crate) encoder: Vec<Stage>,
    pub(crate) decoder: Vec<Stage>,
    pub(crate) head: Option<GaussianHead>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParamCount {
    pub quantum: usize,
    pub classical: usize,
    pub total: usize,
}

fn classical_stack<R: Rng + ?Sized>(dims: &[usize], rng: &mut R) -> Vec<Stage> {
    let last = dims.len() - 2;
    dims.windows(2)
        .enumerate()
        .map(|(i, w)| {
            let act = if i == last { Activation::Identity } else { Activation::Relu };
            Stage::Dense(DenseLayer::random(w[0], w[1], act, rng))
        })
        .collect()
}

fn dense<R: Rng + ?Sized>(i: usize, o: usize, rng: &mut R) -> Stage {
    Stage::Dense(DenseLayer::random(i, o, Activation::Identity, rng))
}

/// Builds and randomly initializes the model described by `spec`.
///
/// Stage parameters are drawn in order (encoder, decoder, then Gaussian head),
/// so a VAE and its AE counterpart built from the same seed share every
/// non-head parameter.
pub fn build_model<R: Rng + ?Sized>(spec: &ModelSpec, rng: &mut R) -> Result<HybridAutoencoder> {
    let d = spec.feature_dim;
    if d == 0 {
        return Err(Error::shape("feature dimension must be positive"));
    }
    if spec.layers == 0 && !spec.variant.is_classical() {
        return Err(Error::shape("circuits need at least one layer"));
    }
    let (encoder, decoder, latent_dim) = match spec.variant {
        Variant::ClassicalAe | Variant::ClassicalVae => {
            let latent = match spec.latent_dim {
                Some(l) => l,
                None => latent_dim_for(d, spec.patches)?,
            };
            let hidden = spec
                .hidden
                .clone()
                .unwrap_or_else(|| [d / 2, d / 4].into_iter().filter(|&h| h > latent).collect());
            if latent == 0 || hidden.contains(&0) {
                return Err(Error::shape("classical widths must be positive"));
            }
            let mut dims = vec![d];
            dims.extend(&hidden);
            dims.push(latent);
            let encoder = classical_stack(&dims, rng);
            dims.reverse();
            let decoder = classical_stack(&dims, rng);
            (encoder, decoder, latent)
        }
        Variant::FbqAe | Variant::FbqVae | Variant::HbqAe | Variant::HbqVae => {
            if spec.patches != 1 {
                return Err(Error::shape(format!(
                    "baseline quantum autoencoders use a single circuit, got {} patches",
                    spec.patches
                )));
            }
            let latent = latent_dim_for(d, 1)?;
            let enc = CircuitStage::random(d, 1, spec.layers, EmbedMode::Amplitude, Measurement::ExpectationZ, rng)?;
            let dec = CircuitStage::random(latent, 1, spec.layers, EmbedMode::Angle, Measurement::Probabilities, rng)?;
            let mut encoder = vec![Stage::Circuit(enc)];
            let mut decoder = vec![Stage::Circuit(dec)];
            if matches!(spec.variant, Variant::HbqAe | Variant::HbqVae) {
                encoder.push(dense(latent, latent, rng));
                decoder.push(dense(d, d, rng));
            }
            (encoder, decoder, latent)
        }
        Variant::SqAe | Variant::SqVae => {
            let latent = latent_dim_for(d, spec.patches)?;
            let enc = CircuitStage::random(d, spec.patches, spec.layers, EmbedMode::Amplitude, Measurement::ExpectationZ, rng)?;
            let enc_fc = dense(latent, latent, rng);
            let dec_fc = dense(latent, latent, rng);
            let dec = CircuitStage::random(latent, spec.patches, spec.layers, EmbedMode::Angle, Measurement::ExpectationZ, rng)?;
            let out_fc = dense(latent, d, rng);
            (
                vec![Stage::Circuit(enc), enc_fc],
                vec![dec_fc, Stage::Circuit(dec), out_fc],
                latent,
            )
        }
    };
    let head = spec.variant.is_vae().then(|| GaussianHead {
        mu: DenseLayer::random(latent_dim, latent_dim, Activation::Identity, rng),
        log_var: DenseLayer::random(latent_dim, latent_dim, Activation::Identity, rng),
    });
    let model = HybridAutoencoder {
        spec: spec.clone(),
        latent_dim,
        encoder,
        decoder,
        head,
    };
    model.check_wiring()?;
    Ok(model)
}

impl HybridAutoencoder {
    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    pub fn variant(&self) -> Variant {
        self.spec.variant
    }

    pub fn feature_dim(&self) -> usize {
        self.spec.feature_dim
    }

    pub fn latent_dim(&self) -> usize {
        self.latent_dim
    }

    pub fn encoder_stages(&self) -> &[Stage] {
        &self.encoder
    }

    pub fn decoder_stages(&self) -> &[Stage] {
        &self.decoder
    }

    pub fn head(&self) -> Option<&GaussianHead> {
        self.head.as_ref()
    }

    fn check_wiring(&self) -> Result<()> {
        fn chain(stages: &[Stage], input: usize, output: usize, side: &str) -> Result<()> {
            let mut width = input;
            for (i, s) in stages.iter().enumerate() {
                if s.input_len() != width {
                    return Err(Error::shape(format!(
                        "{side} stage {i} expects {} inputs but receives {width}",
                        s.input_len()
                    )));
                }
                width = s.output_len();
            }
            if width != output {
                return Err(Error::shape(format!("{side} ends at width {width}, expected {output}")));
            }
            Ok(())
        }
        chain(&self.encoder, self.spec.feature_dim, self.latent_dim, "encoder")?;
        chain(&self.decoder, self.latent_dim, self.spec.feature_dim, "decoder")?;
        if let Some(h) = &self.head {
            for l in [&h.mu, &h.log_var] {
                if l.in_dim() != self.latent_dim || l.out_dim() != self.latent_dim {
                    return Err(Error::shape("gaussian head must map latent to latent"));
                }
            }
        }
        Ok(())
    }

    fn stages(&self) -> impl Iterator<Item = &Stage> {
        self.encoder.iter().chain(&self.decoder)
    }

    fn head_layers(&self) -> impl Iterator<Item = &DenseLayer> {
        self.head.iter().flat_map(|h| [&h.mu, &h.log_var])
    }

    pub fn count_parameters(&self) -> ParamCount {
        let quantum: usize = self.stages().map(Stage::quantum_count).sum();
        let classical: usize = self.stages().map(Stage::classical_count).sum::<usize>()
            + self.head_layers().map(DenseLayer::param_count).sum::<usize>();
        ParamCount {
            quantum,
            classical,
            total: quantum + classical,
        }
    }

    /// All circuit angles, encoder stages first.
    pub fn quantum_params(&self) -> Vec<f64> {
        self.stages()
            .filter_map(|s| match s {
                Stage::Circuit(c) => Some(c.params.flat()),
                Stage::Dense(_) => None,
            })
            .flatten()
            .collect()
    }

    /// All dense weights and biases: encoder, decoder, then `μ` and `log σ²` heads.
    pub fn classical_params(&self) -> Vec<f64> {
        let stages = self.stages().filter_map(|s| match s {
            Stage::Dense(d) => Some(d.flat()),
            Stage::Circuit(_) => None,
        });
        stages.chain(self.head_layers().map(DenseLayer::flat)).flatten().collect()
    }

    /// Inverse of [`quantum_params`](Self::quantum_params) / [`classical_params`](Self::classical_params).
    pub fn set_params(&mut self, quantum: &[f64], classical: &[f64]) -> Result<()> {
        let count = self.count_parameters();
        if quantum.len() != count.quantum || classical.len() != count.classical {
            return Err(Error::shape(format!(
                "model has {} quantum and {} classical parameters, got {} and {}",
                count.quantum,
                count.classical,
                quantum.len(),
                classical.len()
            )));
        }
        let (mut qi, mut ci) = (0, 0);
        for stage in self.encoder.iter_mut().chain(self.decoder.iter_mut()) {
            match stage {
                Stage::Circuit(c) => {
                    let n = c.params.len();
                    c.params.set_flat(&quantum[qi..qi + n]);
                    qi += n;
                }
                Stage::Dense(d) => {
                    let n = d.param_count();
                    d.set_flat(&classical[ci..ci + n]);
                    ci += n;
                }
            }
        }
        if let Some(h) = self.head.as_mut() {
            for d in [&mut h.mu, &mut h.log_var] {
                let n = d.param_count();
                d.set_flat(&classical[ci..ci + n]);
                ci += n;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn build(spec: ModelSpec) -> HybridAutoencoder {
        build_model(&spec, &mut ChaCha8Rng::seed_from_u64(0)).unwrap()
    }

    #[test]
    fn latent_dims() {
        assert_eq!(latent_dim_for(1024, 2).unwrap(), 18);
        assert_eq!(latent_dim_for(1024, 4).unwrap(), 32);
        assert_eq!(latent_dim_for(1024, 8).unwrap(), 56);
        assert_eq!(latent_dim_for(1024, 16).unwrap(), 96);
        assert_eq!(latent_dim_for(64, 1).unwrap(), 6);
        assert!(matches!(latent_dim_for(1024, 3), Err(Error::Shape(_))));
        assert!(matches!(latent_dim_for(48, 1), Err(Error::Shape(_))));
    }

    #[test]
    fn table_counts() {
        let c = build(ModelSpec::new(Variant::FbqAe, 64)).count_parameters();
        assert_eq!((c.quantum, c.classical, c.total), (108, 0, 108));
        let c = build(ModelSpec::new(Variant::FbqVae, 64)).count_parameters();
        assert_eq!((c.quantum, c.classical, c.total), (108, 84, 192));
        let c = build(ModelSpec::new(Variant::HbqAe, 64)).count_parameters();
        assert_eq!((c.quantum, c.classical, c.total), (108, 4202, 4310));
        let c = build(ModelSpec::new(Variant::HbqVae, 64)).count_parameters();
        assert_eq!((c.quantum, c.classical, c.total), (108, 4286, 4394));
    }

    #[test]
    fn classical_baseline_count() {
        // 64→32→16→6 and back: (2080 + 528 + 102) + (112 + 544 + 2112).
        let c = build(ModelSpec::new(Variant::ClassicalAe, 64)).count_parameters();
        assert_eq!((c.quantum, c.classical), (0, 5478));
        let c = build(ModelSpec::new(Variant::ClassicalVae, 64)).count_parameters();
        assert_eq!(c.classical, 5478 + 84);
    }

    #[test]
    fn sq_wiring() {
        let m = build(ModelSpec::new(Variant::SqAe, 1024).with_patches(8).with_layers(1));
        assert_eq!(m.latent_dim(), 56);
        let m = build(ModelSpec::new(Variant::SqAe, 1024).with_patches(4).with_layers(5));
        assert_eq!(m.count_parameters().quantum, 960);
        assert!(matches!(
            build_model(&ModelSpec::new(Variant::SqAe, 1024).with_patches(3), &mut ChaCha8Rng::seed_from_u64(0)),
            Err(Error::Shape(_))
        ));
        assert!(matches!(
            build_model(&ModelSpec::new(Variant::FbqAe, 64).with_patches(2), &mut ChaCha8Rng::seed_from_u64(0)),
            Err(Error::Shape(_))
        ));
    }

    #[test]
    fn params_round_trip() {
        for v in Variant::ALL {
            let d = 16;
            let spec = ModelSpec::new(v, d).with_patches(if matches!(v, Variant::SqAe | Variant::SqVae) { 2 } else { 1 }).with_layers(2);
            let mut m = build(spec);
            let (q, c) = (m.quantum_params(), m.classical_params());
            let count = m.count_parameters();
            assert_eq!((q.len(), c.len()), (count.quantum, count.classical), "{v}");
            let before = m.clone();
            m.set_params(&q, &c).unwrap();
            assert_eq!(m, before);
        }
    }

    #[test]
    fn variant_tags_parse() {
        for v in Variant::ALL {
            assert_eq!(v.tag().parse::<Variant>().unwrap(), v);
        }
        assert!(matches!("qgan".parse::<Variant>(), Err(Error::Usage(_))));
    }
}
