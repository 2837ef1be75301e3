#pragma once

// Subcommand bodies behind the coloc CLI. Each returns a process exit code
// and reports progress and errors on the given streams.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "coloc/baseline.hpp"
#include "coloc/error.hpp"
#include "coloc/harness.hpp"
#include "coloc/parallel.hpp"
#include "coloc/raster_io.hpp"
#include "coloc/solver.hpp"

namespace coloc {

struct RunConfig {
  fs::path root;
  fs::path out;
  SolverConfig solver;
  double iou_threshold = 0.5;
  unsigned jobs = 0;  // 0 = all cores
  ReportFormat format = ReportFormat::Json;
  bool render = false;
  std::optional<std::string> provenance;  // read from root/manifest.json when unset
};

struct RunSummary {
  std::vector<Prediction> predictions;
  std::vector<ScoredCase> scored;
  std::vector<std::string> errors;
  std::optional<EvalReport> report;
};

/// "baseline" when root/manifest.json says so, "external" otherwise.
inline std::string dataset_provenance(const fs::path& root) {
  const fs::path manifest = root / "manifest.json";
  if (!fs::exists(manifest)) return "external";
  try {
    std::ifstream in(manifest);
    return nlohmann::json::parse(in).value("provenance", std::string("external"));
  } catch (const nlohmann::json::exception&) {
    return "external";
  }
}

inline std::string report_file_name(ReportFormat format) {
  return format == ReportFormat::Json ? "report.json" : "report.csv";
}

/// Localizes every case under cfg.root and writes
///   out/predictions.csv, out/traces/<class>/<stem>.csv,
///   out/report.(json|csv) when ground truth exists,
///   out/overlays/<class>/<stem>.png with --render.
inline int cmd_run(const RunConfig& cfg, std::ostream& log, std::ostream& err,
                   RunSummary* summary_out = nullptr) {
  RunSummary summary;
  std::vector<DatasetCase> cases;
  try {
    cfg.solver.validate();
    cases = load_dataset(cfg.root);
    fs::create_directories(cfg.out);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }

  // Group by class so each batch is one image set.
  std::map<std::string, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < cases.size(); ++i) by_class[cases[i].class_name].push_back(i);

  std::vector<CaseOutcome> outcomes(cases.size());
  for (const auto& [class_name, indices] : by_class) {
    std::vector<std::optional<CaseMaps>> loaded(indices.size());
    std::vector<std::string> load_errors(indices.size());
    parallel_for(indices.size(), cfg.jobs, [&](std::size_t k) {
      try {
        loaded[k] = load_case_maps(cases[indices[k]]);
      } catch (const std::exception& e) {
        load_errors[k] = e.what();
      }
    });
    std::vector<CaseMaps> batch;
    std::vector<std::size_t> batch_slots;
    for (std::size_t k = 0; k < indices.size(); ++k) {
      if (loaded[k]) {
        batch.push_back(std::move(*loaded[k]));
        batch_slots.push_back(indices[k]);
      } else {
        outcomes[indices[k]].error = ErrorCode::FileNotFound;
        outcomes[indices[k]].message = load_errors[k];
      }
    }
    std::vector<CaseOutcome> results = colocalize_set(batch, cfg.solver, cfg.jobs);
    for (std::size_t k = 0; k < results.size(); ++k) outcomes[batch_slots[k]] = std::move(results[k]);
  }

  std::vector<std::string> write_errors(cases.size());
  parallel_for(cases.size(), cfg.jobs, [&](std::size_t i) {
    const DatasetCase& c = cases[i];
    if (!outcomes[i].ok()) return;
    try {
      const fs::path trace_dir = cfg.out / "traces" / c.class_name;
      fs::create_directories(trace_dir);
      write_trace(outcomes[i].value->trace, trace_dir / (c.id + ".csv"));
      if (cfg.render && !c.ground_truth.empty()) {
        const fs::path overlay_dir = cfg.out / "overlays" / c.class_name;
        fs::create_directories(overlay_dir);
        render_overlay(c.image_path, merge_ground_truth(c.ground_truth), outcomes[i].value->box,
                       overlay_dir / (c.id + ".png"));
      }
    } catch (const std::exception& e) {
      write_errors[i] = e.what();
    }
  });

  for (std::size_t i = 0; i < cases.size(); ++i) {
    const DatasetCase& c = cases[i];
    if (!outcomes[i].ok()) {
      summary.errors.push_back(c.class_name + "/" + c.id + ": " + outcomes[i].message);
      continue;
    }
    if (!write_errors[i].empty()) {
      summary.errors.push_back(c.class_name + "/" + c.id + ": " + write_errors[i]);
    }
    const Colocalization& result = *outcomes[i].value;
    summary.predictions.push_back({c.class_name, c.id, result.box});
    summary.scored.push_back({c.id, c.class_name, result.box, c.ground_truth,
                              static_cast<int>(result.trace.length()),
                              std::string(to_string(result.trace.termination))});
  }

  try {
    write_predictions(summary.predictions, cfg.out / "predictions.csv");
    const bool any_gt = std::any_of(summary.scored.begin(), summary.scored.end(),
                                    [](const ScoredCase& s) { return !s.ground_truth.empty(); });
    if (any_gt) {
      EvalReport report = corloc(summary.scored, cfg.iou_threshold);
      report.provenance = cfg.provenance.value_or(dataset_provenance(cfg.root));
      write_report(report, cfg.out / report_file_name(cfg.format), cfg.format);
      log << format_corloc_table(report);
      summary.report = std::move(report);
    }
  } catch (const Error& e) {
    summary.errors.push_back(e.what());
  }

  log << "localized " << summary.predictions.size() << " of " << cases.size() << " images\n";
  if (!summary.errors.empty()) {
    std::ofstream errors_file(cfg.out / "errors.txt");
    err << summary.errors.size() << " case(s) failed:\n";
    for (const std::string& e : summary.errors) {
      err << "  " << e << '\n';
      errors_file << e << '\n';
    }
  }
  const int status = summary.errors.empty() ? 0 : 1;
  if (summary_out) *summary_out = std::move(summary);
  return status;
}

struct EvalConfig {
  fs::path predictions;
  fs::path root;
  fs::path out;  // report directory; empty = do not write
  double iou_threshold = 0.5;
  ReportFormat format = ReportFormat::Json;
};

/// Scores stored predictions against the dataset's boxes.csv files.
inline int cmd_eval(const EvalConfig& cfg, std::ostream& log, std::ostream& err,
                    EvalReport* report_out = nullptr) {
  try {
    const std::vector<Prediction> predictions = read_predictions(cfg.predictions);
    if (predictions.empty()) throw Error(ErrorCode::EmptyResults, cfg.predictions.string());
    const std::vector<DatasetCase> cases = load_dataset(cfg.root, {.require_maps = false});
    std::map<std::pair<std::string, std::string>, const DatasetCase*> lookup;
    for (const DatasetCase& c : cases) lookup[{c.class_name, c.id}] = &c;

    std::vector<ScoredCase> scored;
    for (const Prediction& p : predictions) {
      const auto it = lookup.find({p.class_name, p.id});
      if (it == lookup.end()) {
        throw Error(ErrorCode::MalformedBoxesFile,
                    cfg.predictions.string() + ": no dataset image " + p.class_name + "/" + p.id);
      }
      scored.push_back({p.id, p.class_name, p.box, it->second->ground_truth, 0, ""});
    }
    if (std::all_of(scored.begin(), scored.end(),
                    [](const ScoredCase& s) { return s.ground_truth.empty(); })) {
      throw Error(ErrorCode::NoGroundTruth, "no predicted image has ground truth");
    }
    EvalReport report = corloc(scored, cfg.iou_threshold);
    report.provenance = dataset_provenance(cfg.root);
    if (scored.size() < cases.size()) {
      log << (cases.size() - scored.size()) << " dataset image(s) have no prediction\n";
    }
    if (!cfg.out.empty()) {
      fs::create_directories(cfg.out);
      write_report(report, cfg.out / report_file_name(cfg.format), cfg.format);
    }
    log << format_corloc_table(report);
    if (report_out) *report_out = std::move(report);
    return 0;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
}

/// Writes spectral-residual saliency and commonness-weighted co-saliency
/// maps into each class directory and marks the dataset as baseline maps.
inline int cmd_baseline(const fs::path& root, unsigned jobs, std::ostream& log,
                        std::ostream& err) {
  std::vector<DatasetCase> cases;
  try {
    cases = load_dataset(root, {.require_maps = false});
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
  std::map<std::string, std::vector<const DatasetCase*>> by_class;
  for (const DatasetCase& c : cases) by_class[c.class_name].push_back(&c);

  nlohmann::ordered_json manifest;
  manifest["provenance"] = "baseline";
  manifest["saliency"] = "spectral-residual";
  manifest["cosaliency"] = "histogram-commonness";
  manifest["classes"] = nlohmann::ordered_json::object();
  int failures = 0;

  for (const auto& [class_name, members] : by_class) {
    const fs::path dir = root / class_name;
    fs::create_directories(dir / "saliency");
    fs::create_directories(dir / "cosaliency");
    std::vector<std::optional<GrayMap>> images(members.size());
    std::vector<std::optional<GrayMap>> saliency(members.size());
    std::vector<std::string> errors(members.size());
    parallel_for(members.size(), jobs, [&](std::size_t k) {
      try {
        images[k] = load_gray_map(members[k]->image_path);
        saliency[k] = spectral_residual_saliency(*images[k]);
        save_gray_map(*saliency[k], dir / "saliency" / (members[k]->id + ".png"));
      } catch (const std::exception& e) {
        errors[k] = e.what();
      }
    });

    nlohmann::ordered_json entry;
    entry["images"] = members.size();
    std::vector<GrayMap> maps;
    std::vector<HistogramSignature> signatures;
    std::vector<std::string> stems;
    for (std::size_t k = 0; k < members.size(); ++k) {
      if (!errors[k].empty()) {
        err << class_name << "/" << members[k]->id << ": " << errors[k] << '\n';
        ++failures;
        continue;
      }
      maps.push_back(*saliency[k]);
      signatures.push_back(histogram_signature(*images[k]));
      stems.push_back(members[k]->id);
    }
    entry["saliency"] = maps.size();
    try {
      const std::vector<GrayMap> fused = fuse_cosaliency(maps, signatures);
      for (std::size_t k = 0; k < fused.size(); ++k) {
        save_gray_map(fused[k], dir / "cosaliency" / (stems[k] + ".png"));
      }
      entry["cosaliency"] = fused.size();
    } catch (const Error& e) {
      err << class_name << ": " << e.what() << '\n';
      entry["cosaliency"] = 0;
      entry["error"] = std::string(to_string(e.code()));
      ++failures;
    }
    manifest["classes"][class_name] = std::move(entry);
    log << class_name << ": " << maps.size() << " saliency map(s)\n";
  }

  std::ofstream out(root / "manifest.json");
  out << manifest.dump(2) << '\n';
  if (!out) {
    err << "error: cannot write " << (root / "manifest.json").string() << '\n';
    return 2;
  }
  return failures == 0 ? 0 : 1;
}

struct SynthConfig {
  fs::path out;
  int per_class = 20;
  int size = 128;
  std::uint64_t seed = 7;
  int classes = 3;
};

/// Seeded toy dataset: each image holds one rectangle; 30% of the saliency
/// maps also carry a bright distractor square absent from the image.
/// Distractor boxes are listed in <class>/distractors.csv.
inline int cmd_synth(const SynthConfig& cfg, std::ostream& log, std::ostream& err) {
  if (cfg.size < 32 || cfg.per_class < 1 || cfg.classes < 1) {
    err << "error: need --size >= 32, --n >= 1 and at least one class\n";
    return 2;
  }
  std::mt19937_64 rng(cfg.seed);
  auto uniform_int = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  auto uniform_real = [&](double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
  };
  std::normal_distribution<double> gauss(0.0, 1.0);
  const int n = cfg.size;

  try {
    for (int k = 0; k < cfg.classes; ++k) {
      const std::string class_name = "class" + std::to_string(k);
      const fs::path dir = cfg.out / class_name;
      for (const char* sub : {"images", "saliency", "cosaliency"}) fs::create_directories(dir / sub);

      // exactly round(30%) of the images get a distractor
      const int with_distractor = static_cast<int>(std::lround(0.3 * cfg.per_class));
      std::vector<int> order(static_cast<std::size_t>(cfg.per_class));
      for (int i = 0; i < cfg.per_class; ++i) order[static_cast<std::size_t>(i)] = i;
      std::shuffle(order.begin(), order.end(), rng);
      std::vector<bool> distracted(static_cast<std::size_t>(cfg.per_class), false);
      for (int i = 0; i < with_distractor; ++i) distracted[static_cast<std::size_t>(order[i])] = true;

      std::ofstream boxes(dir / "boxes.csv");
      std::ofstream distractors(dir / "distractors.csv");
      boxes << "# stem,t,b,l,r\n";
      distractors << "# stem,t,b,l,r\n";

      for (int i = 0; i < cfg.per_class; ++i) {
        char stem_buf[32];
        std::snprintf(stem_buf, sizeof stem_buf, "img_%03d", i);
        const std::string stem = stem_buf;

        const int h = uniform_int(n / 5, n / 2);
        const int w = uniform_int(n / 5, n / 2);
        const int t = uniform_int(2, n - h - 2);
        const int l = uniform_int(2, n - w - 2);
        const BoundingBox object{t, t + h - 1, l, l + w - 1};

        std::optional<BoundingBox> blob;
        if (distracted[static_cast<std::size_t>(i)]) {
          for (int attempt = 0; attempt < 1000 && !blob; ++attempt) {
            const int side = uniform_int(n / 10, n / 6);
            const int bt = uniform_int(1, n - side - 1);
            const int bl = uniform_int(1, n - side - 1);
            const BoundingBox candidate{bt, bt + side - 1, bl, bl + side - 1};
            const BoundingBox margin{object.t - 4, object.b + 4, object.l - 4, object.r + 4};
            if (intersection_area(candidate, margin) == 0) blob = candidate;
          }
        }

        const double background = uniform_real(0.1, 0.3);
        const double foreground = uniform_real(0.6, 0.9);
        std::vector<double> image(static_cast<std::size_t>(n) * n);
        std::vector<double> sal(image.size());
        std::vector<double> cosal(image.size());
        for (int r = 0; r < n; ++r) {
          for (int c = 0; c < n; ++c) {
            const std::size_t idx = static_cast<std::size_t>(r) * n + c;
            const bool in_object = object.contains_pixel(r, c);
            const bool in_blob = blob && blob->contains_pixel(r, c);
            image[idx] = in_object ? foreground : background;
            const double s = (in_object || in_blob) ? 1.0 : 0.0;
            const double co = in_object ? 1.0 : 0.0;
            sal[idx] = std::clamp(s + 0.1 * gauss(rng), 0.0, 1.0);
            cosal[idx] = std::clamp(co + 0.05 * gauss(rng), 0.0, 1.0);
          }
        }
        save_gray_map(GrayMap(n, n, std::move(image)), dir / "images" / (stem + ".png"));
        save_gray_map(GrayMap(n, n, std::move(sal)), dir / "saliency" / (stem + ".png"));
        save_gray_map(GrayMap(n, n, std::move(cosal)), dir / "cosaliency" / (stem + ".png"));
        boxes << stem << ',' << object.t << ',' << object.b << ',' << object.l << ',' << object.r
              << '\n';
        if (blob) {
          distractors << stem << ',' << blob->t << ',' << blob->b << ',' << blob->l << ','
                      << blob->r << '\n';
        }
      }
      if (!boxes || !distractors) throw Error(ErrorCode::WriteFailure, dir.string());
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
  log << "wrote " << cfg.classes << " class(es) x " << cfg.per_class << " image(s) to "
      << cfg.out.string() << '\n';
  return 0;
}

/// Distractor boxes recorded by cmd_synth, keyed by stem.
inline std::map<std::string, BoundingBox> read_distractors(const fs::path& path) {
  std::map<std::string, BoundingBox> out;
  for (const auto& gt : detail::read_boxes_file(path)) out[gt.stem] = gt.box;
  return out;
}

}  // namespace coloc
