//! The pipeline stages behind the CLI subcommands. Each stage validates its
//! inputs, writes its outputs atomically and leaves a manifest next to every
//! output file.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use eponym_core::eval::{kfold_cv, pop_rank, region_stats, score_predictions, CvConfig, Metrics};
use eponym_core::features::{feature_names, top_occupations};
use eponym_core::ids::EntityId;
use eponym_core::index::{build_indexes, IndexBundle, IndexReport};
use eponym_core::model::{
    assemble_training_set, link_street, train, LabeledPair, LinkDecision,
};
use eponym_core::retrieve::{RetrievalMode, RetrievalOptions};
use eponym_core::street::{assign_chains, StreetRecord};

use crate::affixio::load_affixes;
use crate::boundaries::{load_geojson_boundaries, load_region_map, region_from_tags};
use crate::bundle_io::{load_bundle, save_bundle};
use crate::config::RunConfig;
use crate::error::Error;
use crate::fsio;
use crate::kg::{ingest_kg, load_link_counts};
use crate::manifest::Manifest;
use crate::model_io::{load_model, save_model};
use crate::osm::{assemble_boundaries, extract_streets, parse_osm_xml};
use crate::records;

fn require_file(stage: &'static str, path: &Path) -> Result<(), Error> {
    if path.is_file() {
        Ok(())
    } else if path.exists() {
        Err(Error::io(
            stage,
            path,
            std::io::Error::new(std::io::ErrorKind::InvalidInput, "not a regular file"),
        ))
    } else {
        Err(Error::io(
            stage,
            path,
            std::io::Error::new(std::io::ErrorKind::NotFound, "no such file"),
        ))
    }
}

// ── ingest-kg ──────────────────────────────────────────────────────────

pub struct IngestKgArgs<'a> {
    pub dump: &'a Path,
    pub link_counts: Option<&'a Path>,
    pub out_dir: &'a Path,
}

pub fn ingest_kg_cmd(config: &RunConfig, args: &IngestKgArgs<'_>) -> Result<(), Error> {
    const STAGE: &str = "ingest-kg";
    require_file(STAGE, args.dump)?;
    if let Some(path) = args.link_counts {
        require_file(STAGE, path)?;
    }
    std::fs::create_dir_all(args.out_dir).map_err(|e| Error::io(STAGE, args.out_dir, e))?;

    let link_counts = match args.link_counts {
        Some(path) => {
            let reader = fsio::open_reader(path).map_err(|e| Error::io(STAGE, path, e))?;
            Some(load_link_counts(reader).map_err(|e| Error::io(STAGE, path, e))?)
        }
        None => None,
    };

    log::info!("streaming entity dump {}", args.dump.display());
    let dump = fsio::open_reader(args.dump).map_err(|e| Error::io(STAGE, args.dump, e))?;
    let ingest = ingest_kg(dump, link_counts, &config.language, &config.extract)
        .map_err(|e| Error::io(STAGE, args.dump, e))?;

    let persons_path = args.out_dir.join("persons.ndjson");
    let locations_path = args.out_dir.join("locations.ndjson");
    let gt_path = args.out_dir.join("ground_truth.ndjson");
    records::write_persons(STAGE, &persons_path, &ingest.persons)?;
    records::write_locations(STAGE, &locations_path, &ingest.locations)?;
    records::write_streets(STAGE, &gt_path, &ingest.ground_truth)?;

    let stats = &ingest.stats;
    let mut manifest = Manifest::new(STAGE)
        .input(STAGE, args.dump)?
        .count("persons", stats.persons)
        .count("locations", stats.locations)
        .count("ground_truth_streets", stats.ground_truth_streets)
        .count("name_labels", stats.name_labels)
        .count("entities_yielded", stats.stream.yielded)
        .count("lines_skipped_malformed", stats.stream.skipped_malformed)
        .count("non_item_documents", stats.stream.skipped_non_item)
        .count("humans_without_label", stats.humans_without_label)
        .count("link_count_entries", stats.link_count_entries)
        .count("link_count_lines_skipped", stats.link_count_lines_skipped)
        .count("persons_with_links", stats.persons_with_links);
    if let Some(path) = args.link_counts {
        manifest = manifest.input(STAGE, path)?;
    }
    for output in [&persons_path, &locations_path, &gt_path] {
        manifest.write_for(STAGE, output)?;
    }

    println!(
        "ingest-kg: {} persons ({} with links), {} locations, {} ground-truth streets",
        stats.persons, stats.persons_with_links, stats.locations, stats.ground_truth_streets
    );
    println!(
        "ingest-kg: {} entities read, {} malformed lines skipped, {} humans without label",
        stats.stream.yielded, stats.stream.skipped_malformed, stats.humans_without_label
    );
    Ok(())
}

// ── build-index ────────────────────────────────────────────────────────

pub struct BuildIndexArgs<'a> {
    pub persons: &'a Path,
    pub locations: &'a Path,
    pub out: &'a Path,
}

fn index_report_text(report: &IndexReport) -> String {
    let mut text = String::new();
    let _ = writeln!(text, "index build report");
    let _ = writeln!(text, "persons indexed:          {}", report.persons);
    let _ = writeln!(text, "name terms:               {}", report.name_terms);
    let _ = writeln!(text, "location nodes:           {}", report.locations);
    let _ = writeln!(text, "containment edges:        {}", report.dag.edges);
    let _ = writeln!(text, "dangling parents dropped: {}", report.dag.dangling_parents_dropped);
    let _ = writeln!(text, "self loops dropped:       {}", report.dag.self_loops_dropped);
    let _ = writeln!(text, "cycle edges removed:      {}", report.dag.cycle_edges_removed.len());
    for (source, target) in &report.dag.cycle_edges_removed {
        let _ = writeln!(text, "  removed edge {source} -> {target}");
    }
    text
}

pub fn build_index_cmd(args: &BuildIndexArgs<'_>) -> Result<(), Error> {
    const STAGE: &str = "build-index";
    require_file(STAGE, args.persons)?;
    require_file(STAGE, args.locations)?;

    let persons = records::read_persons(STAGE, args.persons)?;
    let locations = records::read_locations(STAGE, args.locations)?;
    let (bundle, report) = build_indexes(persons, locations);
    save_bundle(STAGE, args.out, &bundle)?;

    let report_text = index_report_text(&report);
    let report_path = report_path_for(args.out);
    fsio::write_atomic_bytes(&report_path, report_text.as_bytes())
        .map_err(|e| Error::io(STAGE, &report_path, e))?;

    let manifest = Manifest::new(STAGE)
        .input(STAGE, args.persons)?
        .input(STAGE, args.locations)?
        .count("persons", report.persons as u64)
        .count("name_terms", report.name_terms as u64)
        .count("location_nodes", report.locations as u64)
        .count("dangling_parents", report.dag.dangling_parents_dropped as u64)
        .count("cycle_edges_removed", report.dag.cycle_edges_removed.len() as u64);
    manifest.write_for(STAGE, args.out)?;
    manifest.write_for(STAGE, &report_path)?;

    print!("{report_text}");
    Ok(())
}

fn report_path_for(out: &Path) -> PathBuf {
    let mut name = out.file_name().unwrap_or_default().to_os_string();
    name.push(".report.txt");
    out.with_file_name(name)
}

// ── ingest-osm ─────────────────────────────────────────────────────────

pub enum BoundarySource<'a> {
    /// Assemble polygons from the extract's own boundary relations.
    Auto,
    /// Load polygons from a GeoJSON file.
    GeoJson(&'a Path),
}

pub struct IngestOsmArgs<'a> {
    pub extract: &'a Path,
    pub boundaries: BoundarySource<'a>,
    pub bundle: &'a Path,
    pub region_map: Option<&'a Path>,
    pub out: &'a Path,
}

pub fn ingest_osm_cmd(args: &IngestOsmArgs<'_>) -> Result<(), Error> {
    const STAGE: &str = "ingest-osm";
    require_file(STAGE, args.extract)?;
    require_file(STAGE, args.bundle)?;
    if let BoundarySource::GeoJson(path) = &args.boundaries {
        require_file(STAGE, path)?;
    }
    if let Some(path) = args.region_map {
        require_file(STAGE, path)?;
    }

    let reader = fsio::open_reader(args.extract).map_err(|e| Error::io(STAGE, args.extract, e))?;
    let extract = parse_osm_xml(STAGE, args.extract, reader)?;
    let bundle = load_bundle(STAGE, args.bundle)?;

    let (mut streets, street_stats) = extract_streets(&extract);
    streets.sort_by(|a, b| a.osm_id.cmp(&b.osm_id));

    let (boundaries, boundary_count) = match &args.boundaries {
        BoundarySource::Auto => {
            let (boundaries, stats) = assemble_boundaries(&extract);
            log::info!(
                "assembled {} boundaries ({} open rings dropped, {} without graph ids)",
                stats.assembled,
                stats.dropped_open_rings,
                stats.without_wikidata
            );
            let n = boundaries.len();
            (boundaries, n)
        }
        BoundarySource::GeoJson(path) => {
            let boundaries = load_geojson_boundaries(STAGE, path)?;
            let n = boundaries.len();
            (boundaries, n)
        }
    };

    let assign_report = assign_chains(&mut streets, &boundaries, bundle.dag());

    // Region-name fallback for streets no polygon could anchor.
    let mut fallback_resolved = 0u64;
    if let Some(map_path) = args.region_map {
        let region_map = load_region_map(STAGE, map_path)?;
        let tags_by_street = extract.way_tags();
        for street in streets.iter_mut().filter(|s| !s.chain_resolved) {
            let Some(tags) = tags_by_street.get(&street.osm_id) else {
                continue;
            };
            if let Some(anchor) = region_from_tags(tags, &region_map) {
                street.attach_chain(&anchor, bundle.dag());
                if street.chain_resolved {
                    fallback_resolved += 1;
                }
            }
        }
    }

    // Raw ways versus merged streets: distinct (name, innermost region).
    let merged: std::collections::BTreeSet<(String, Option<&EntityId>)> = streets
        .iter()
        .map(|s| (s.name.clone(), s.chain.get(1)))
        .collect();

    records::write_streets(STAGE, args.out, &streets)?;

    let resolved = streets.iter().filter(|s| s.chain_resolved).count() as u64;
    let mut manifest = Manifest::new(STAGE)
        .input(STAGE, args.extract)?
        .input(STAGE, args.bundle)?
        .count("streets_raw_ways", streets.len() as u64)
        .count("streets_merged", merged.len() as u64)
        .count("streets_resolved", resolved)
        .count("streets_unresolved", streets.len() as u64 - resolved)
        .count("streets_with_etymology", street_stats.with_etymology)
        .count("ways_skipped_missing_nodes", street_stats.skipped_missing_nodes)
        .count("boundaries", boundary_count as u64)
        .count("fallback_resolved", fallback_resolved);
    if let BoundarySource::GeoJson(path) = &args.boundaries {
        manifest = manifest.input(STAGE, path)?;
    }
    if let Some(path) = args.region_map {
        manifest = manifest.input(STAGE, path)?;
    }
    manifest.write_for(STAGE, args.out)?;

    println!(
        "ingest-osm: {} named street ways ({} merged by name and region), {} anchored, {} unresolved",
        streets.len(),
        merged.len(),
        resolved,
        streets.len() as u64 - resolved
    );
    println!(
        "ingest-osm: {} with etymology tags, {} anchored via region map, {} boundary polygons, report: unmatched={} unknown-anchor={}",
        street_stats.with_etymology,
        fallback_resolved,
        boundary_count,
        assign_report.unmatched,
        assign_report.anchor_unknown_to_dag
    );
    Ok(())
}

// ── shared loading helpers ─────────────────────────────────────────────

fn load_ground_truth(
    stage: &'static str,
    path: &Path,
    bundle: &IndexBundle,
) -> Result<(Vec<(StreetRecord, EntityId)>, u64), Error> {
    let mut streets = records::read_streets(stage, path)?;
    let mut positives = Vec::new();
    let mut without_person = 0u64;
    for street in streets.iter_mut() {
        street.expand_chain(bundle.dag());
        match street.etymology_person.clone() {
            Some(person) => positives.push((street.clone(), person)),
            None => without_person += 1,
        }
    }
    positives.sort_by(|a, b| a.0.osm_id.cmp(&b.0.osm_id));
    Ok((positives, without_person))
}

// ── train ──────────────────────────────────────────────────────────────

pub struct TrainArgs<'a> {
    pub ground_truth: &'a Path,
    pub bundle: &'a Path,
    pub out: &'a Path,
    pub dump_features: Option<&'a Path>,
}

pub fn train_cmd(config: &RunConfig, args: &TrainArgs<'_>) -> Result<(), Error> {
    const STAGE: &str = "train";
    require_file(STAGE, args.ground_truth)?;
    require_file(STAGE, args.bundle)?;

    let bundle = load_bundle(STAGE, args.bundle)?;
    let affixes = load_affixes(STAGE, config.affix_dir.as_deref())?;
    let (positives, without_person) = load_ground_truth(STAGE, args.ground_truth, &bundle)?;
    if positives.is_empty() {
        return Err(Error::format(
            STAGE,
            args.ground_truth,
            "ground truth contains no street with a person reference",
        ));
    }

    let (vocab, vocab_report) =
        top_occupations(positives.iter().map(|(_, person)| person), &bundle)
            .map_err(|source| Error::Feature { stage: STAGE, source })?;
    if vocab_report.padded > 0 {
        log::warn!(
            "occupation vocabulary padded: {} from positives, {} from global frequency, {} placeholders",
            vocab_report.from_positives,
            vocab_report.from_global,
            vocab_report.padded
        );
    }

    let (pairs, assembly) = assemble_training_set(
        &positives,
        &bundle,
        &affixes,
        &vocab,
        config.negatives_per_street,
    )
    .map_err(|source| Error::Model { stage: STAGE, source })?;

    if let Some(path) = args.dump_features {
        write_feature_dump(STAGE, path, &pairs)?;
        Manifest::new(STAGE)
            .input(STAGE, args.ground_truth)?
            .input(STAGE, args.bundle)?
            .count("pairs", pairs.len() as u64)
            .write_for(STAGE, path)?;
    }

    let model = train(&pairs, config.hyper, vocab, config.threshold)
        .map_err(|source| Error::Model { stage: STAGE, source })?;
    save_model(STAGE, args.out, &model)?;

    Manifest::new(STAGE)
        .seed(config.hyper.seed)
        .input(STAGE, args.ground_truth)?
        .input(STAGE, args.bundle)?
        .count("positives", assembly.positives as u64)
        .count("negatives", assembly.negatives as u64)
        .count("skipped_no_candidates", assembly.skipped_no_candidates as u64)
        .count("skipped_unknown_person", assembly.skipped_unknown_person as u64)
        .count("retrieval_missed_truth", assembly.retrieval_missed_truth as u64)
        .count("gt_streets_without_person", without_person)
        .write_for(STAGE, args.out)?;

    println!(
        "train: {} positives + {} negatives from {} ground-truth streets",
        assembly.positives,
        assembly.negatives,
        positives.len()
    );
    println!(
        "train: skipped {} streets without candidates, {} with unknown person; retrieval missed the truth on {}",
        assembly.skipped_no_candidates, assembly.skipped_unknown_person, assembly.retrieval_missed_truth
    );
    println!("train: model written to {}", args.out.display());
    Ok(())
}

/// 32-column TSV: street id, person id, then the 30 features.
fn write_feature_dump(stage: &'static str, path: &Path, pairs: &[LabeledPair]) -> Result<(), Error> {
    fsio::write_atomic(path, |w| {
        let names = feature_names();
        writeln!(w, "street_id\tperson_id\t{}", names.join("\t"))?;
        for pair in pairs {
            write!(w, "{}\t{}", pair.street_id, pair.person)?;
            for value in pair.features.to_array() {
                write!(w, "\t{value}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    })
    .map_err(|e| Error::io(stage, path, e))
}

// ── link ───────────────────────────────────────────────────────────────

pub struct LinkArgs<'a> {
    pub streets: &'a Path,
    pub model: &'a Path,
    pub bundle: &'a Path,
    pub out: &'a Path,
    pub union_retrieval: bool,
    pub candidate_cap: Option<usize>,
}

fn retrieval_options(union: bool, cap: Option<usize>) -> RetrievalOptions {
    RetrievalOptions {
        mode: if union {
            RetrievalMode::Union
        } else {
            RetrievalMode::FirstMatch
        },
        cap,
    }
}

pub fn link_cmd(config: &RunConfig, args: &LinkArgs<'_>) -> Result<(), Error> {
    const STAGE: &str = "link";
    require_file(STAGE, args.streets)?;
    require_file(STAGE, args.model)?;
    require_file(STAGE, args.bundle)?;

    let bundle = load_bundle(STAGE, args.bundle)?;
    let model = load_model(STAGE, args.model)?;
    let affixes = load_affixes(STAGE, config.affix_dir.as_deref())?;
    let mut streets = records::read_streets(STAGE, args.streets)?;
    for street in streets.iter_mut() {
        street.expand_chain(bundle.dag());
    }
    streets.sort_by(|a, b| a.osm_id.cmp(&b.osm_id));

    let opts = retrieval_options(args.union_retrieval, args.candidate_cap);
    let decisions: Vec<Option<LinkDecision>> = streets
        .par_iter()
        .map(|street| link_street(street, &model, &bundle, &affixes, opts))
        .collect();

    let linked = decisions.iter().flatten().count() as u64;
    write_links(STAGE, args.out, &streets, &decisions, &bundle)?;

    Manifest::new(STAGE)
        .seed(model.hyper().seed)
        .input(STAGE, args.streets)?
        .input(STAGE, args.model)?
        .input(STAGE, args.bundle)?
        .count("streets", streets.len() as u64)
        .count("links", linked)
        .write_for(STAGE, args.out)?;

    println!("link: {} of {} streets linked -> {}", linked, streets.len(), args.out.display());
    Ok(())
}

/// links.tsv: osm_id, street_name, person_id, person_label, probability
/// (six decimals).
fn write_links(
    stage: &'static str,
    path: &Path,
    streets: &[StreetRecord],
    decisions: &[Option<LinkDecision>],
    bundle: &IndexBundle,
) -> Result<(), Error> {
    fsio::write_atomic(path, |w| {
        writeln!(w, "osm_id\tstreet_name\tperson_id\tperson_label\tprobability")?;
        for (street, decision) in streets.iter().zip(decisions) {
            let Some(decision) = decision else {
                continue;
            };
            let label = bundle
                .person(&decision.person)
                .map(|p| p.full_name.as_str())
                .unwrap_or("");
            writeln!(
                w,
                "{}\t{}\t{}\t{}\t{:.6}",
                street.osm_id, street.name, decision.person, label, decision.probability
            )?;
        }
        Ok(())
    })
    .map_err(|e| Error::io(stage, path, e))
}

pub fn read_links(stage: &'static str, path: &Path) -> Result<Vec<LinkDecision>, Error> {
    let bytes = fsio::read_bytes(path).map_err(|e| Error::io(stage, path, e))?;
    let body = String::from_utf8(bytes)
        .map_err(|_| Error::format(stage, path, "links file is not UTF-8"))?;
    let mut links = Vec::new();
    for (idx, line) in body.lines().enumerate() {
        if idx == 0 || line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 5 {
            return Err(Error::Parse {
                stage,
                path: path.to_path_buf(),
                line: idx as u64 + 1,
                message: format!("expected 5 columns, got {}", fields.len()),
            });
        }
        let probability: f64 = fields[4].parse().map_err(|_| Error::Parse {
            stage,
            path: path.to_path_buf(),
            line: idx as u64 + 1,
            message: String::from("probability is not a number"),
        })?;
        links.push(LinkDecision {
            street_id: fields[0].to_string(),
            person: EntityId::from(fields[2]),
            probability,
        });
    }
    Ok(links)
}

// ── evaluate ───────────────────────────────────────────────────────────

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Baseline {
    PopRank,
}

pub struct EvaluateArgs<'a> {
    pub ground_truth: &'a Path,
    pub bundle: &'a Path,
    pub baseline: Option<Baseline>,
    pub folds: usize,
    pub report: &'a Path,
}

pub fn evaluate_cmd(config: &RunConfig, args: &EvaluateArgs<'_>) -> Result<(), Error> {
    const STAGE: &str = "evaluate";
    require_file(STAGE, args.ground_truth)?;
    require_file(STAGE, args.bundle)?;

    let bundle = load_bundle(STAGE, args.bundle)?;
    let affixes = load_affixes(STAGE, config.affix_dir.as_deref())?;
    let (positives, _) = load_ground_truth(STAGE, args.ground_truth, &bundle)?;

    let gold: BTreeMap<String, EntityId> = positives
        .iter()
        .map(|(street, person)| (street.osm_id.clone(), person.clone()))
        .collect();
    // Recall denominators are reported both ways: including every
    // ground-truth street, and restricted to streets whose person exists in
    // the person store (the harvested pairs).
    let streets_only: Vec<&StreetRecord> = positives.iter().map(|(s, _)| s).collect();
    let (harvested, dropped_non_person) =
        eponym_core::street::harvest_etymology(streets_only, |p| bundle.contains_person(p));
    let gold_known: BTreeMap<String, EntityId> = harvested
        .into_iter()
        .map(|(street, person)| (street.osm_id, person))
        .collect();
    if dropped_non_person > 0 {
        log::info!("{dropped_non_person} ground-truth streets reference entities outside the person store");
    }

    let mut text = String::new();
    let mut tsv = String::from("system\tscope\tprecision\trecall\tf1\tgold\tpredicted\tcorrect\n");

    match args.baseline {
        Some(Baseline::PopRank) => {
            let predictions: BTreeMap<String, Option<EntityId>> = positives
                .iter()
                .map(|(street, _)| {
                    let decision =
                        pop_rank(street, &bundle, &affixes, RetrievalOptions::default());
                    (street.osm_id.clone(), decision.map(|d| d.person))
                })
                .collect();
            let all = score_predictions(&predictions, &gold)
                .map_err(|source| Error::Eval { stage: STAGE, source })?;
            push_metrics(&mut text, &mut tsv, "poprank", "all", &all);
            if !gold_known.is_empty() && gold_known.len() < gold.len() {
                let known_predictions = restrict(&predictions, &gold_known);
                let known = score_predictions(&known_predictions, &gold_known)
                    .map_err(|source| Error::Eval { stage: STAGE, source })?;
                push_metrics(&mut text, &mut tsv, "poprank", "person-in-store", &known);
            }
        }
        None => {
            let cv = CvConfig {
                folds: args.folds,
                seed: config.seed,
                negatives_per_street: config.negatives_per_street,
                hyper: config.hyper,
                threshold: config.threshold,
                retrieval: RetrievalOptions::default(),
            };
            let report = kfold_cv(&positives, &bundle, &affixes, cv)
                .map_err(|source| Error::Eval { stage: STAGE, source })?;
            push_metrics(&mut text, &mut tsv, "classifier", "all", &report.micro);
            let _ = writeln!(
                text,
                "macro over {} folds: P={:.4} R={:.4} F1={:.4}",
                report.folds.len(),
                report.macro_precision,
                report.macro_recall,
                report.macro_f1
            );
            for (i, fold) in report.folds.iter().enumerate() {
                let _ = writeln!(
                    text,
                    "  fold {i:02}: P={:.4} R={:.4} F1={:.4} (gold {}, predicted {}, correct {})",
                    fold.precision, fold.recall, fold.f1, fold.gold, fold.predicted, fold.correct
                );
                let _ = writeln!(
                    tsv,
                    "classifier\tfold-{i:02}\t{:.6}\t{:.6}\t{:.6}\t{}\t{}\t{}",
                    fold.precision, fold.recall, fold.f1, fold.gold, fold.predicted, fold.correct
                );
            }
            if !gold_known.is_empty() && gold_known.len() < gold.len() {
                let known_predictions = restrict(&report.pooled_predictions, &gold_known);
                let known = score_predictions(&known_predictions, &gold_known)
                    .map_err(|source| Error::Eval { stage: STAGE, source })?;
                push_metrics(&mut text, &mut tsv, "classifier", "person-in-store", &known);
            }
        }
    }

    let _ = writeln!(
        text,
        "conventions: wrong predictions count against precision and recall; abstentions against recall only; zero predictions report precision 0"
    );

    fsio::write_atomic_bytes(args.report, text.as_bytes())
        .map_err(|e| Error::io(STAGE, args.report, e))?;
    let tsv_path = args.report.with_extension("tsv");
    fsio::write_atomic_bytes(&tsv_path, tsv.as_bytes())
        .map_err(|e| Error::io(STAGE, &tsv_path, e))?;

    let manifest = Manifest::new(STAGE)
        .seed(config.seed)
        .input(STAGE, args.ground_truth)?
        .input(STAGE, args.bundle)?
        .count("gold_streets", gold.len() as u64)
        .count("gold_streets_person_in_store", gold_known.len() as u64);
    manifest.write_for(STAGE, args.report)?;
    manifest.write_for(STAGE, &tsv_path)?;

    print!("{text}");
    println!("evaluate: report written to {}", args.report.display());
    Ok(())
}

fn restrict(
    predictions: &BTreeMap<String, Option<EntityId>>,
    gold: &BTreeMap<String, EntityId>,
) -> BTreeMap<String, Option<EntityId>> {
    predictions
        .iter()
        .filter(|(street, _)| gold.contains_key(*street))
        .map(|(s, p)| (s.clone(), p.clone()))
        .collect()
}

fn push_metrics(text: &mut String, tsv: &mut String, system: &str, scope: &str, m: &Metrics) {
    let _ = writeln!(
        text,
        "{system} [{scope}]: P={:.4} R={:.4} F1={:.4} (gold {}, predicted {}, correct {})",
        m.precision, m.recall, m.f1, m.gold, m.predicted, m.correct
    );
    let _ = writeln!(
        tsv,
        "{system}\t{scope}\t{:.6}\t{:.6}\t{:.6}\t{}\t{}\t{}",
        m.precision, m.recall, m.f1, m.gold, m.predicted, m.correct
    );
}

// ── stats ──────────────────────────────────────────────────────────────

pub struct StatsArgs<'a> {
    pub streets: &'a Path,
    pub links: &'a Path,
    pub bundle: &'a Path,
    pub regions: Vec<EntityId>,
    pub out: &'a Path,
}

pub fn stats_cmd(config: &RunConfig, args: &StatsArgs<'_>) -> Result<(), Error> {
    const STAGE: &str = "stats";
    require_file(STAGE, args.streets)?;
    require_file(STAGE, args.links)?;
    require_file(STAGE, args.bundle)?;

    let regions = if args.regions.is_empty() {
        config.region_ids.clone()
    } else {
        args.regions.clone()
    };
    if regions.is_empty() {
        return Err(Error::usage(
            STAGE,
            "no regions given; pass --regions or set region_ids in the config",
        ));
    }

    let bundle = load_bundle(STAGE, args.bundle)?;
    let affixes = load_affixes(STAGE, config.affix_dir.as_deref())?;
    let mut streets = records::read_streets(STAGE, args.streets)?;
    for street in streets.iter_mut() {
        street.expand_chain(bundle.dag());
    }
    let links = read_links(STAGE, args.links)?;

    let rows = region_stats(
        &streets,
        &links,
        &bundle,
        &affixes,
        RetrievalOptions::default(),
        &regions,
    );

    fsio::write_atomic(args.out, |w| {
        writeln!(
            w,
            "region\tstreets\tstreets_with_candidates\tcandidate_persons\tstreet_to_person_relations"
        )?;
        for row in &rows {
            writeln!(
                w,
                "{}\t{}\t{}\t{}\t{}",
                row.region, row.streets, row.streets_with_candidates, row.candidate_persons, row.relations
            )?;
        }
        Ok(())
    })
    .map_err(|e| Error::io(STAGE, args.out, e))?;

    Manifest::new(STAGE)
        .input(STAGE, args.streets)?
        .input(STAGE, args.links)?
        .input(STAGE, args.bundle)?
        .count("regions", rows.len() as u64)
        .write_for(STAGE, args.out)?;

    println!("region\tstreets\twith_candidates\tcandidates\trelations");
    for row in &rows {
        let label = bundle
            .dag()
            .node(&row.region)
            .map(|n| n.label.as_str())
            .unwrap_or("?");
        println!(
            "{} ({label})\t{}\t{}\t{}\t{}",
            row.region, row.streets, row.streets_with_candidates, row.candidate_persons, row.relations
        );
    }
    Ok(())
}
