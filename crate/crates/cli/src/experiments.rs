use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use focksim::kerr::MIN_PDF;
use focksim::pdc::{six_photon_mixture, squeezed_weights};
use focksim::schemes::{
    build_psi_theta, ghz_weight, psi_theta_reference, w_pair_weights, GhzCircuit,
};
use focksim::symmetry::{
    apply_phase_correction, cascade_closed_form, cascade_simulate, collected_asymmetric_state,
    symmetric_outcome_state, Branch, CoefficientPair, SymmetryDetector,
};
use focksim::{rng_from_seed, FockError};
use thiserror::Error;

use crate::config::{ConfigError, Experiment, ExperimentConfig};

pub const ARTIFACT_VERSION: &str = concat!("focksim-cli ", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{param}: {source}")]
    Numeric {
        param: &'static str,
        #[source]
        source: FockError,
    },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            RunError::Numeric { .. } => 3,
            RunError::Io { .. } => 1,
        }
    }
}

fn numeric(param: &'static str) -> impl FnOnce(FockError) -> RunError {
    move |source| RunError::Numeric { param, source }
}

/// A finished table plus extra `meta` entries.
pub struct Artifact {
    pub header: &'static str,
    pub rows: Vec<Vec<String>>,
    pub meta: BTreeMap<String, String>,
}

impl Artifact {
    fn new(header: &'static str) -> Self {
        Self {
            header,
            rows: Vec::new(),
            meta: BTreeMap::new(),
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(self.header);
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

/// 17 significant digits.
fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn grid(lo: f64, hi: f64, points: u64) -> Vec<f64> {
    if points == 1 {
        return vec![lo];
    }
    (0..points)
        .map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64)
        .collect()
}

fn pair(config: &ExperimentConfig) -> Result<CoefficientPair, RunError> {
    CoefficientPair::normalized(config.real("m0")?, config.real("n0")?).map_err(numeric("m0"))
}

pub fn execute(config: &ExperimentConfig) -> Result<Artifact, RunError> {
    match config.experiment {
        Experiment::Cascade => cascade(config),
        Experiment::SymmetryDetect => symmetry_detect(config),
        Experiment::PsiTheta => psi_theta(config),
        Experiment::GhzCircuit => ghz(config),
        Experiment::PdcWeights => pdc(config),
        Experiment::HomodyneSweep => sweep(config),
        Experiment::Mixture => mixture(config),
    }
}

fn cascade(config: &ExperimentConfig) -> Result<Artifact, RunError> {
    let p0 = pair(config)?;
    let k = u32::try_from(config.count("k")?).unwrap_or(u32::MAX);
    let run = cascade_simulate(p0, k, config.real("alpha")?, config.real("theta")?)
        .map_err(numeric("k"))?;
    let mut a =
        Artifact::new("k,m_k,n_k,ratio,C_k,step_success_prob,cumulative_prob,fidelity_psi3");
    let mut cumulative = 1.0;
    for j in 0..=k {
        let cf = cascade_closed_form(p0, j).map_err(numeric("k"))?;
        let step = if j == 0 {
            1.0
        } else {
            run.step_probabilities[j as usize - 1]
        };
        cumulative *= step;
        let pj = cf.normalized_pair();
        a.rows.push(vec![
            j.to_string(),
            num(pj.m),
            num(pj.n),
            num(cf.ratio),
            num(cf.c),
            num(step),
            num(cumulative),
            num(cf.fidelity_with_fixed_point()),
        ]);
    }
    a.meta.insert("normalized_m0".into(), num(p0.m));
    a.meta.insert("normalized_n0".into(), num(p0.n));
    Ok(a)
}

fn symmetry_detect(config: &ExperimentConfig) -> Result<Artifact, RunError> {
    let p0 = pair(config)?;
    let det = SymmetryDetector::new(config.real("alpha")?, config.real("theta")?)
        .map_err(numeric("alpha"))?;
    let input = p0.twin_beam_state().map_err(numeric("m0"))?;
    let symmetric = symmetric_outcome_state(p0).map_err(numeric("m0"))?;
    let collected = collected_asymmetric_state();
    let mut rng = rng_from_seed(
        config
            .seed
            .ok_or(ConfigError::MissingSeed("symmetry-detect"))?,
    );
    let mut a = Artifact::new("sample,x,branch,probability,fidelity_expected");
    for i in 0..config.count("samples")? {
        let out = det
            .detect_sampled(&input, &mut rng)
            .map_err(numeric("samples"))?;
        let (name, expected) = match out.branch {
            Branch::Symmetric => ("symmetric", &symmetric),
            Branch::Asymmetric => ("asymmetric", &collected),
        };
        let fidelity = out.state.fidelity(expected).map_err(numeric("m0"))?;
        a.rows.push(vec![
            i.to_string(),
            num(out.measured_x.unwrap_or(f64::NAN)),
            name.into(),
            num(out.probability),
            num(fidelity),
        ]);
    }
    a.meta.insert("threshold".into(), num(det.threshold()));
    Ok(a)
}

fn psi_theta(config: &ExperimentConfig) -> Result<Artifact, RunError> {
    let thetas = grid(
        config.real("theta_min")?,
        config.real("theta_max")?,
        config.count("points")?,
    );
    let mut a =
        Artifact::new("theta,postselect_prob,ghz_weight,w_pair_weight,fidelity_vs_reference");
    for theta in thetas {
        let s = build_psi_theta(theta).map_err(numeric("theta_min"))?;
        let g = ghz_weight(&s.state).map_err(numeric("theta_min"))?;
        let (w, wt) = w_pair_weights(&s.state).map_err(numeric("theta_min"))?;
        let reference = psi_theta_reference(theta).map_err(numeric("theta_min"))?;
        let f = s.state.fidelity(&reference).map_err(numeric("theta_min"))?;
        a.rows.push(vec![
            num(theta),
            num(s.postselect_probability),
            num(g),
            num(w + wt),
            num(f),
        ]);
    }
    a.meta
        .insert("w_pair_weight".into(), "sum of both W-pair weights".into());
    Ok(a)
}

fn ghz(config: &ExperimentConfig) -> Result<Artifact, RunError> {
    let circuit = GhzCircuit::standard(config.real("alpha")?, config.real("theta")?)
        .map_err(numeric("theta"))?;
    let samples = config.count("samples")?;
    let exact = circuit.interval_probabilities().map_err(numeric("theta"))?;
    let mut probability = exact.clone();
    let mut fidelity: Vec<f64> = (0..10)
        .map(|i| {
            circuit
                .readout(circuit.table().peak_center(i))
                .map(|r| r.fidelity)
        })
        .collect::<Result<_, _>>()
        .map_err(numeric("alpha"))?;
    let mut a = Artifact::new("interval,k,x_lo,x_hi,probability,fidelity_after_correction");
    if samples > 0 {
        let mut rng = rng_from_seed(config.seed.ok_or(ConfigError::MissingSeed("ghz-circuit"))?);
        let mut counts = [0u64; 10];
        let mut fidelity_sum = [0.0; 10];
        for _ in 0..samples {
            let r = circuit.sample(&mut rng).map_err(numeric("samples"))?;
            counts[r.interval] += 1;
            fidelity_sum[r.interval] += r.fidelity;
        }
        for i in 0..10 {
            probability[i] = counts[i] as f64 / samples as f64;
            fidelity[i] = if counts[i] > 0 {
                fidelity_sum[i] / counts[i] as f64
            } else {
                f64::NAN
            };
        }
        a.meta
            .insert("probability_source".into(), "sampled frequency".into());
        a.meta.insert(
            "fidelity_source".into(),
            "mean over samples in the interval".into(),
        );
    } else {
        a.meta
            .insert("probability_source".into(), "exact interval mass".into());
        a.meta.insert(
            "fidelity_source".into(),
            "readout at the peak centre".into(),
        );
    }
    for iv in &circuit.table().intervals {
        a.rows.push(vec![
            iv.index.to_string(),
            iv.k.to_string(),
            num(iv.lo),
            num(iv.hi),
            num(probability[iv.index]),
            num(fidelity[iv.index]),
        ]);
    }
    Ok(a)
}

fn pdc(config: &ExperimentConfig) -> Result<Artifact, RunError> {
    let n_max = u32::try_from(config.count("n_max")?).unwrap_or(u32::MAX);
    let s = squeezed_weights(config.real("tau")?, n_max).map_err(numeric("tau"))?;
    let mut a = Artifact::new("n,amplitude,probability");
    for (n, w) in s.weights.iter().enumerate() {
        if *w > 0.0 {
            a.rows.push(vec![n.to_string(), num(*w), num(w * w)]);
        }
    }
    a.meta
        .insert("captured_probability".into(), num(s.captured_probability()));
    a.meta.insert("mean_order".into(), num(s.mean_order()));
    a.meta
        .insert("mean_photon_count".into(), num(s.mean_photon_count()));
    a.meta
        .insert("truncation_bound".into(), num(s.truncation_bound()));
    Ok(a)
}

fn sweep(config: &ExperimentConfig) -> Result<Artifact, RunError> {
    let (alpha, theta) = (config.real("alpha")?, config.real("theta")?);
    let points = config.count("points")?;
    let mut a = Artifact::new("x,pdf,interval_index,fidelity_after_correction");
    let range = |lo: f64| -> Result<(f64, f64), RunError> {
        Ok((
            config.optional_real("x_min")?.unwrap_or(lo - 6.0),
            config.optional_real("x_max")?.unwrap_or(2.0 * alpha + 6.0),
        ))
    };
    if config.text("circuit") == "ghz" {
        let circuit = GhzCircuit::standard(alpha, theta).map_err(numeric("theta"))?;
        let (lo, hi) = range(2.0 * alpha * (12.0 * theta).cos())?;
        for x in grid(lo, hi, points) {
            let pdf = circuit.homodyne_pdf(x);
            let fidelity = if pdf < MIN_PDF {
                f64::NAN
            } else {
                circuit.readout(x).map_err(numeric("x_min"))?.fidelity
            };
            let interval = circuit.table().locate(x).index;
            a.rows
                .push(vec![num(x), num(pdf), interval.to_string(), num(fidelity)]);
        }
    } else {
        let p0 = pair(config)?;
        let det = SymmetryDetector::new(alpha, theta).map_err(numeric("alpha"))?;
        let input = p0.twin_beam_state().map_err(numeric("m0"))?;
        let tagged = det.entangle(&input).map_err(numeric("m0"))?;
        let symmetric = symmetric_outcome_state(p0).map_err(numeric("m0"))?;
        let collected = collected_asymmetric_state();
        let (lo, hi) = range(2.0 * alpha * theta.cos())?;
        for x in grid(lo, hi, points) {
            let pdf = tagged.homodyne_pdf(x);
            let upper = x > det.threshold();
            let fidelity = if pdf < MIN_PDF {
                f64::NAN
            } else {
                let cond = tagged.homodyne_condition(x).map_err(numeric("x_min"))?;
                if upper {
                    cond.fidelity(&symmetric)
                } else {
                    apply_phase_correction(&cond, det.conditioned_phase(x), "b")
                        .and_then(|s| s.fidelity(&collected))
                }
                .map_err(numeric("m0"))?
            };
            a.rows.push(vec![
                num(x),
                num(pdf),
                u8::from(upper).to_string(),
                num(fidelity),
            ]);
        }
        a.meta.insert("threshold".into(), num(det.threshold()));
    }
    Ok(a)
}

fn mixture(config: &ExperimentConfig) -> Result<Artifact, RunError> {
    let mut a = Artifact::new("k,a3,a21,a111");
    for k in config.real_list("k")? {
        let w = six_photon_mixture(k).map_err(numeric("k"))?;
        let amps = w.real_amplitudes().ok_or_else(|| RunError::Numeric {
            param: "k",
            source: FockError::InvalidInput(format!("k = {k} gives a negative three-pair weight")),
        })?;
        a.rows
            .push(vec![num(k), num(amps[0]), num(amps[1]), num(amps[2])]);
    }
    Ok(a)
}

/// Resolves the output location, honouring `FOCKSIM_OUT_DIR`.
pub fn output_path(config: &ExperimentConfig) -> PathBuf {
    match std::env::var_os("FOCKSIM_OUT_DIR") {
        Some(dir) if !dir.is_empty() => {
            let name = config
                .output
                .file_name()
                .map(PathBuf::from)
                .unwrap_or_else(|| PathBuf::from(format!("{}.csv", config.experiment.name())));
            PathBuf::from(dir).join(name)
        }
        _ => config.output.clone(),
    }
}

pub fn meta_text(config: &ExperimentConfig, artifact: &Artifact) -> String {
    let mut lines = vec![
        format!("artifact_version = {ARTIFACT_VERSION}"),
        format!("experiment = {}", config.experiment),
        format!(
            "seed = {}",
            config
                .seed
                .map(|s| s.to_string())
                .unwrap_or_else(|| "none".into())
        ),
    ];
    lines.extend(
        config
            .params
            .iter()
            .map(|(k, v)| format!("param.{k} = {v}")),
    );
    lines.extend(
        artifact
            .meta
            .iter()
            .map(|(k, v)| format!("result.{k} = {v}")),
    );
    lines.join("\n") + "\n"
}

fn write(path: &Path, text: &str) -> Result<(), RunError> {
    let io = |source| RunError::Io {
        path: path.to_path_buf(),
        source,
    };
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(io)?;
    }
    std::fs::write(path, text).map_err(io)
}

/// Runs the experiment and writes the CSV plus its `.meta` sidecar.
pub fn run(config: &ExperimentConfig) -> Result<PathBuf, RunError> {
    let artifact = execute(config)?;
    let path = output_path(config);
    write(&path, &artifact.to_csv())?;
    let mut meta = path.clone().into_os_string();
    meta.push(".meta");
    write(Path::new(&meta), &meta_text(config, &artifact))?;
    Ok(path)
}
