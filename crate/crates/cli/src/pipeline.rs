use std::path::Path;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use varilab::flowdecomp::{flow_case, good_set, raster_pair, run_suite, FactorizeOptions, PairParams, SuiteOptions};
use varilab::integrand::gamma_estimate;
use varilab::normalize::{check_geo_condition, compute_normalization, GEO_SAMPLES};
use varilab::planefield::{check_det_simple, check_kak_bis, check_kak_tris, crossing_tubes, det_integral, io, GridField, GridSpec, ScalarField};
use varilab::varifold::{mesh, ms_pipeline, ms_ratio, planar_fields, planar_report_with, TriVarifold};
use varilab::Report;

use crate::config::{ExperimentConfig, MeshSource, Pipeline, SCHEMA};
use crate::generate::{self, Artifact};

/// One module operation and its outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stage {
    pub stage: String,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report: Option<Report>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl Stage {
    fn from_result(stage: &str, r: varilab::Result<Report>) -> Self {
        match r {
            Ok(report) => Stage { stage: stage.into(), pass: report.pass, report: Some(report), error: None },
            Err(e) => Stage { stage: stage.into(), pass: false, report: None, error: Some(e.to_string()) },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema: u32,
    pub pipeline: Pipeline,
    pub seed: u64,
    pub pass: bool,
    pub stages: Vec<Stage>,
    pub config: ExperimentConfig,
}

pub struct RunOutput {
    pub report: RunReport,
    pub artifacts: Vec<Artifact>,
}

fn load_mesh(source: Option<&MeshSource>, base: &Path) -> Result<TriVarifold> {
    match source {
        None => Ok(mesh::icosphere(4)),
        Some(MeshSource::File { path, multiplicity }) => {
            let p = base.join(path);
            let m = multiplicity.as_ref().map(|m| base.join(m));
            mesh::read_off(&p, m.as_deref()).with_context(|| format!("reading mesh {}", p.display()))
        }
        Some(MeshSource::Generator { generator, params }) => generate::mesh(generator, params),
    }
}

fn field_artifacts(prefix: &str, f: &GridField) -> Result<Vec<Artifact>> {
    let mut bytes = Vec::new();
    io::write_binary(f, &mut bytes)?;
    Ok(vec![
        Artifact { name: format!("{prefix}.bin"), bytes },
        Artifact::text(&format!("{prefix}.csv"), io::field_csv(f)),
        Artifact::text(&format!("div_{prefix}.csv"), io::scalar_csv(&f.divergence()?)),
    ])
}

fn ms_ratio_pipeline(c: &ExperimentConfig, base: &Path, stages: &mut Vec<Stage>, files: &mut Vec<Artifact>) -> Result<()> {
    let v = load_mesh(c.mesh.as_ref(), base)?;
    let pipe = ms_pipeline(&v, &c.integrand)?;
    let geo = check_geo_condition(&pipe.normalization.normalized_integrand(&c.integrand)?, GEO_SAMPLES)
        .with("iterations", pipe.normalization.iterations as f64)
        .with("det_monotone", if pipe.normalization.det_monotone() { 1.0 } else { 0.0 });
    stages.push(Stage::from_result("normalize::compute_normalization", Ok(geo)));
    stages.push(Stage::from_result("varifold::ms_ratio", ms_ratio(&v, &c.integrand)));
    let (s, t) = planar_fields(&pipe, c.grid.unwrap_or(256))?;
    stages.push(Stage::from_result("varifold::project_to_plane", planar_report_with(&pipe, &s, &t, c.tolerances.div_link)));
    files.extend(field_artifacts("s", &s)?);
    files.extend(field_artifacts("t", &t)?);
    files.push(Artifact::json("normalization.json", &pipe.normalization.to_json())?);
    Ok(())
}

fn det_sharpness(c: &ExperimentConfig, stages: &mut Vec<Stage>, files: &mut Vec<Artifact>) -> Result<()> {
    let g = GridSpec::square(c.grid.unwrap_or(512), 0.0, 1.0)?;
    let (s, t) = crossing_tubes(&g, c.eps.unwrap_or(0.02), c.angle.unwrap_or(0.0))?;
    stages.push(Stage::from_result("planefield::check_det_simple", check_det_simple(&s, &t)));
    let ratio = det_integral(&s, &t)? / (0.25 * s.div_tv()? * t.div_tv()?);
    let gap = 1.0 - ratio;
    stages.push(Stage::from_result("planefield::det_integral", Ok(Report::new(gap, c.tolerances.sharpness_gap, 0.0, 0.0).with("ratio", ratio))));
    files.extend(field_artifacts("s", &s)?);
    files.extend(field_artifacts("t", &t)?);
    Ok(())
}

fn gamma(c: &ExperimentConfig, stages: &mut Vec<Stage>) -> Result<()> {
    let g = gamma_estimate(c.grid.unwrap_or(400));
    stages.push(Stage::from_result("integrand::gamma_estimate", g.map(|g| Report::new(4.0, g, 0.0, 0.0).with("gamma", g))));
    Ok(())
}

/// `χ = (1 − |p|²/1.1²)⁺`, inside the raster window of the flow pairs.
fn cutoff(grid: GridSpec) -> ScalarField {
    ScalarField::from_fn(grid, |p| (1.0 - p.norm_squared() / 1.21).max(0.0))
}

fn kakeya(c: &ExperimentConfig, stages: &mut Vec<Stage>, files: &mut Vec<Artifact>) -> Result<()> {
    let pair = generate::flow_pair(c.seed, c.sign_violating)?;
    let (s, t) = raster_pair(&pair, c.grid.unwrap_or(128), 1.2)?;
    let chi = cutoff(s.grid);
    if c.check_selected("det-simple") {
        stages.push(Stage::from_result("planefield::check_det_simple", check_det_simple(&s, &t)));
    }
    if c.check_selected("kak-tris") {
        stages.push(Stage::from_result("planefield::check_kak_tris", check_kak_tris(&s, &t, &chi)));
    }
    if c.check_selected("kak-bis") {
        stages.push(Stage::from_result("planefield::check_kak_bis", check_kak_bis(&s, &t, &chi, c.tolerances.kak_bis_cap)));
    }
    files.push(Artifact::json("pair.json", &pair)?);
    files.extend(field_artifacts("s", &s)?);
    files.extend(field_artifacts("t", &t)?);
    Ok(())
}

fn flow_suite(c: &ExperimentConfig, stages: &mut Vec<Stage>, files: &mut Vec<Artifact>) -> Result<()> {
    let params = if c.sign_violating { PairParams::sign_violating() } else { PairParams::admissible() };
    let case = flow_case(c.seed, &params, &FactorizeOptions::default())?;
    let r = run_suite(&case, &SuiteOptions::default())?;
    let failures = r.failures();
    let summary = Report::new(failures.len() as f64, 0.0, 0.0, 0.0)
        .with("max_rel_div_z", r.max_rel_div_z)
        .with("max_rel_reconstruction", r.max_rel_reconstruction)
        .with("min_alpha", r.min_alpha)
        .with("stream_residual", r.stream_residual)
        .with("stream_level", r.stream_level)
        .with("alpha_f_spread", r.alpha_f_spread);
    stages.push(Stage::from_result("flowdecomp::run_suite", Ok(summary)));
    for (name, reports) in [("split::elementary_lemma", &r.lemma), ("split::check_complement", &r.complement), ("split::check_complement_bis", &r.complement_bis), ("split::check_g_est", &r.g_est)] {
        for (k, rep) in reports.iter().enumerate() {
            stages.push(Stage::from_result(&format!("flowdecomp::{name}[{k}]"), Ok(rep.clone())));
        }
    }
    files.push(Artifact::json("suite.json", &r)?);
    let mask = good_set(&case.pair.s.to_smooth(), &case.pair.t.to_smooth(), 0, 0, c.grid.unwrap_or(32), 1.0 / 64.0)?;
    let mut csv = String::from("x,y,good_x,good_y,good\n");
    for (i, p) in mask.samples.iter().enumerate() {
        csv.push_str(&format!("{:?},{:?},{},{},{}\n", p[0], p[1], u8::from(mask.good_x[i]), u8::from(mask.good_y[i]), u8::from(mask.mask[i])));
    }
    files.push(Artifact::text("good_set.csv", csv));
    Ok(())
}

fn normalize(c: &ExperimentConfig, stages: &mut Vec<Stage>, files: &mut Vec<Artifact>) -> Result<()> {
    let f = &c.integrand;
    stages.push(Stage::from_result("normalize::check_geo_condition[before]", Ok(check_geo_condition(f, GEO_SAMPLES))));
    let n = compute_normalization(f, 10_000, 1e-14)?;
    let after = check_geo_condition(&n.normalized_integrand(f)?, GEO_SAMPLES);
    stages.push(Stage {
        stage: "normalize::compute_normalization".into(),
        pass: after.pass && n.det_monotone(),
        report: Some(after.with("det_monotone", if n.det_monotone() { 1.0 } else { 0.0 }).with("iterations", n.iterations as f64)),
        error: None,
    });
    files.push(Artifact::json("normalization.json", &n.to_json())?);
    Ok(())
}

/// Runs the configured pipeline; relative mesh paths resolve against `base`.
pub fn run(c: &ExperimentConfig, base: &Path) -> Result<RunOutput> {
    c.validate()?;
    let (mut stages, mut files) = (Vec::new(), Vec::new());
    match c.pipeline {
        Pipeline::MsRatio => ms_ratio_pipeline(c, base, &mut stages, &mut files)?,
        Pipeline::DetSharpness => det_sharpness(c, &mut stages, &mut files)?,
        Pipeline::Gamma => gamma(c, &mut stages)?,
        Pipeline::Kakeya => kakeya(c, &mut stages, &mut files)?,
        Pipeline::FlowSuite => flow_suite(c, &mut stages, &mut files)?,
        Pipeline::Normalize => normalize(c, &mut stages, &mut files)?,
    }
    let pass = stages.iter().all(|s| s.pass);
    let report = RunReport { schema: SCHEMA, pipeline: c.pipeline, seed: c.seed, pass, stages, config: c.clone() };
    Ok(RunOutput { report, artifacts: files })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_pipeline_passes() {
        let out = run(&ExperimentConfig::new(Pipeline::Gamma), Path::new(".")).unwrap();
        assert!(out.report.pass);
        assert!(out.report.stages[0].report.as_ref().unwrap().get("gamma").unwrap() > 4.0);
    }

    #[test]
    fn sign_violating_pair_reports_errors_as_failed_stages() {
        let mut c = ExperimentConfig::new(Pipeline::Kakeya);
        c.sign_violating = true;
        c.grid = Some(64);
        let out = run(&c, Path::new(".")).unwrap();
        let det = &out.report.stages[0];
        assert!(!det.pass && det.error.is_some());
        let bis = out.report.stages.iter().find(|s| s.stage.ends_with("check_kak_bis")).unwrap();
        assert!(bis.report.as_ref().unwrap().get("c_hat").unwrap().is_finite());
    }

    #[test]
    fn checker_selection() {
        let mut c = ExperimentConfig::new(Pipeline::Kakeya);
        c.grid = Some(64);
        c.checks = vec!["kak-tris".into()];
        let out = run(&c, Path::new(".")).unwrap();
        assert_eq!(out.report.stages.len(), 1);
        assert!(out.report.pass);
    }
}
