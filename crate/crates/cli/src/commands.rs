use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde_json::json;

use mriseg::classifiers::{load_model, save_model, segment_image, ClassifierKind, ModelFile};
use mriseg::dataset_io::{
    load_image, load_label_map, load_manifest, phantom_id, phantom_suite, save_image,
    save_label_map, DatasetManifest, GrayImage, LabelMap, ManifestEntry,
};
use mriseg::evaluation::{
    aggregate_reports, prepare_dataset, run_comparison, run_loocv_prepared, score_segmentation,
    train_on_pool, write_reports_csv, EvalReport, EvalSummary, FoldScore, PreparedDataset,
};
use mriseg::fsutil::write_atomic;
use mriseg::gabor::{build_filter_bank, channel_image, extract_features, FeatureGrid, GaborConfig};
use mriseg::hybrid::{hybrid_segment, RuleTable};
use mriseg::overlay::save_overlay;
use mriseg::{Error, Result, FEATURE_DIM};

use crate::config::RunConfig;

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::Io {
        path: dir.to_path_buf(),
        source: e,
    })
}

fn write_resolved(cfg: &RunConfig, dir: &Path) -> Result<()> {
    write_atomic(&dir.join("resolved_config.json"), cfg.to_json()?.as_bytes())
}

/// `<stem><suffix>` next to `path`.
fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("out");
    path.with_file_name(format!("{stem}{suffix}"))
}

fn features_for(image: &GrayImage, gabor: &GaborConfig) -> Result<FeatureGrid> {
    extract_features(image, &build_filter_bank(gabor)?)
}

fn dump_features(grid: &FeatureGrid, dir: &Path) -> Result<()> {
    ensure_dir(dir)?;
    for d in 0..FEATURE_DIM {
        save_image(&channel_image(grid, d)?, &dir.join(format!("feature_{d}.png")))?;
    }
    Ok(())
}

fn prepare(cfg: &RunConfig, manifest: &Path) -> Result<(Vec<String>, PreparedDataset)> {
    let dataset = load_manifest(manifest)?;
    let ids = dataset.items.iter().map(|i| i.id.clone()).collect();
    let prepared = prepare_dataset(&dataset, &cfg.gabor, cfg.per_class, cfg.seed)?;
    Ok((ids, prepared))
}

fn log_runtimes(report: &EvalReport) {
    for f in &report.folds {
        eprintln!(
            "{} fold {} ({}): {:.3} s",
            report.method,
            f.fold,
            f.image_id,
            f.runtime.as_secs_f64()
        );
    }
}

pub fn phantom(cfg: &RunConfig, count: usize, out: &Path) -> Result<()> {
    let items = phantom_suite(count, &cfg.phantom)?;
    ensure_dir(out)?;
    let mut entries = Vec::with_capacity(items.len());
    for item in &items {
        let image = format!("{}.pgm", item.id);
        let label = format!("{}_label.pgm", item.id);
        save_image(&item.image, &out.join(&image))?;
        save_label_map(&item.labels, &out.join(&label))?;
        if cfg.emit_overlays {
            save_overlay(&item.labels, &out.join(format!("{}_label.png", item.id)))?;
        }
        entries.push(ManifestEntry {
            id: item.id.clone(),
            image,
            label,
        });
    }
    debug_assert_eq!(entries.first().map(|e| e.id.clone()), Some(phantom_id(0)));
    DatasetManifest {
        root: ".".into(),
        entries,
    }
    .save(&out.join("manifest.json"))?;
    write_resolved(cfg, out)?;
    eprintln!("wrote {count} phantoms to {}", out.display());
    Ok(())
}

pub fn features(cfg: &RunConfig, image: &Path, out: &Path) -> Result<()> {
    let grid = features_for(&load_image(image)?, &cfg.gabor)?;
    dump_features(&grid, out)?;
    write_resolved(cfg, out)
}

pub fn train(cfg: &RunConfig, manifest: &Path, out: &Path) -> Result<()> {
    let (ids, prepared) = prepare(cfg, manifest)?;
    let pool = prepared.full_pool();
    let (stats, model) = train_on_pool(&pool, cfg.classifier, &cfg.classifiers)?;
    let file = ModelFile::new(cfg.gabor.clone(), stats, cfg.classifiers, model).with_provenance(json!({
        "run_config": cfg.to_value(),
        "images": ids,
        "training_rows": pool.len(),
    }));
    save_model(&file, out)?;
    eprintln!("trained {} on {} rows -> {}", cfg.classifier, pool.len(), out.display());
    Ok(())
}

fn segment_with(file: &ModelFile, grid: &FeatureGrid) -> Result<LabelMap> {
    segment_image(grid, &file.stats, &file.model)
}

pub fn segment(cfg: &RunConfig, image: &Path, model: &Path, out: &Path, overlay: Option<&Path>) -> Result<()> {
    let file = load_model(model)?;
    let grid = features_for(&load_image(image)?, &file.gabor)?;
    let labels = segment_with(&file, &grid)?;
    save_label_map(&labels, out)?;
    let overlay = overlay
        .map(Path::to_path_buf)
        .or_else(|| cfg.emit_overlays.then(|| sibling(out, "_overlay.png")));
    if let Some(path) = overlay {
        save_overlay(&labels, &path)?;
    }
    if cfg.emit_feature_dumps {
        dump_features(&grid, &sibling(out, "_features"))?;
    }
    Ok(())
}

fn print_table(reports: &[EvalReport]) {
    print!("{}", aggregate_reports(reports).render());
}

pub fn evaluate(cfg: &RunConfig, manifest: &Path, out: &Path) -> Result<()> {
    let (_, prepared) = prepare(cfg, manifest)?;
    let run = run_loocv_prepared(&prepared, &[cfg.classifier], &cfg.classifiers)?;
    ensure_dir(out)?;
    write_reports_csv(&run.reports, &out.join("evaluation.csv"))?;
    EvalSummary::new(cfg.to_value(), &run.reports).save(&out.join("evaluation.json"))?;
    write_resolved(cfg, out)?;
    run.reports.iter().for_each(log_runtimes);
    print_table(&run.reports);
    Ok(())
}

pub fn compare(cfg: &RunConfig, manifest: &Path, out: &Path) -> Result<()> {
    let (_, prepared) = prepare(cfg, manifest)?;
    let comparison = run_comparison(&prepared, &cfg.classifiers)?;
    let reports = comparison.all_reports();
    ensure_dir(out)?;
    write_reports_csv(&reports, &out.join("comparison.csv"))?;
    EvalSummary::new(cfg.to_value(), &reports).save(&out.join("comparison.json"))?;
    comparison.rules.save(&out.join("rules.json"))?;
    write_resolved(cfg, out)?;
    if cfg.emit_overlays {
        let dir = out.join("overlays");
        ensure_dir(&dir)?;
        for (fold, maps) in comparison.predictions.iter().enumerate() {
            let id = &prepared.items[fold].id;
            for (kind, map) in maps {
                save_overlay(map, &dir.join(format!("{id}_{}.png", kind.name().to_lowercase())))?;
            }
            let fused = hybrid_segment(maps, &comparison.rules)?;
            save_overlay(&fused, &dir.join(format!("{id}_hybrid.png")))?;
        }
    }
    reports.iter().for_each(log_runtimes);
    print_table(&reports);
    Ok(())
}

/// Input for the hybrid command.
pub enum HybridInput<'a> {
    Image { image: &'a Path, truth: Option<&'a Path> },
    Manifest(&'a Path),
}

struct ModelSet {
    files: BTreeMap<ClassifierKind, ModelFile>,
}

impl ModelSet {
    fn load(paths: &BTreeMap<ClassifierKind, PathBuf>) -> Result<Self> {
        let mut files = BTreeMap::new();
        for (kind, path) in paths {
            let file = load_model(path)?;
            if file.model_kind() != *kind {
                return Err(Error::InvalidConfig(format!(
                    "{} holds a {} model, expected {kind}",
                    path.display(),
                    file.model_kind()
                )));
            }
            files.insert(*kind, file);
        }
        Ok(ModelSet { files })
    }

    fn segment_all(&self, image: &GrayImage) -> Result<BTreeMap<ClassifierKind, LabelMap>> {
        let mut grids: Vec<(GaborConfig, FeatureGrid)> = Vec::new();
        let mut maps = BTreeMap::new();
        for (kind, file) in &self.files {
            let idx = match grids.iter().position(|(g, _)| *g == file.gabor) {
                Some(i) => i,
                None => {
                    grids.push((file.gabor.clone(), features_for(image, &file.gabor)?));
                    grids.len() - 1
                }
            };
            maps.insert(*kind, segment_with(file, &grids[idx].1)?);
        }
        Ok(maps)
    }
}

pub fn hybrid(
    cfg: &RunConfig,
    input: HybridInput<'_>,
    rules: &Path,
    models: &BTreeMap<ClassifierKind, PathBuf>,
    out: &Path,
) -> Result<()> {
    let rules = RuleTable::load(rules)?;
    let models = ModelSet::load(models)?;
    match input {
        HybridInput::Image { image, truth } => {
            let image = load_image(image)?;
            let truth = truth.map(load_label_map).transpose()?;
            if let Some(t) = &truth {
                if t.dims() != image.dims() {
                    return Err(Error::DimensionMismatch {
                        expected: image.dims(),
                        found: t.dims(),
                    });
                }
            }
            let fused = hybrid_segment(&models.segment_all(&image)?, &rules)?;
            save_label_map(&fused, out)?;
            if cfg.emit_overlays {
                save_overlay(&fused, &sibling(out, "_overlay.png"))?;
            }
            if let Some(t) = truth {
                let scores = score_segmentation(&fused, &t)?;
                for (tissue, s) in scores.iter() {
                    println!("{:<12} F={:.4} P={:.4} R={:.4}", tissue.name(), s.f_measure, s.precision, s.recall);
                }
            }
        }
        HybridInput::Manifest(manifest) => {
            let dataset = load_manifest(manifest)?;
            ensure_dir(out)?;
            let mut folds = Vec::new();
            for (i, item) in dataset.items.iter().enumerate() {
                let fused = hybrid_segment(&models.segment_all(&item.image)?, &rules)
                    .map_err(|e| e_entry(e, &item.id))?;
                save_label_map(&fused, &out.join(format!("{}_hybrid.pgm", item.id)))?;
                if cfg.emit_overlays {
                    save_overlay(&fused, &out.join(format!("{}_hybrid.png", item.id)))?;
                }
                folds.push(FoldScore {
                    fold: i,
                    image_id: item.id.clone(),
                    train_rows: 0,
                    scores: score_segmentation(&fused, &item.labels)?,
                    runtime: Default::default(),
                });
            }
            let report = EvalReport::hybrid(folds);
            write_reports_csv(std::slice::from_ref(&report), &out.join("hybrid_scores.csv"))?;
            write_resolved(cfg, out)?;
            print_table(std::slice::from_ref(&report));
        }
    }
    Ok(())
}

fn e_entry(e: Error, id: &str) -> Error {
    Error::Entry {
        id: id.to_string(),
        source: Box::new(e),
    }
}
