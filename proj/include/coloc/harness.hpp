#pragma once

// Dataset layout, ground truth, CorLoc scoring, reports and overlays.
//
//   root/<class>/images/<stem>.(png|pgm)
//   root/<class>/saliency/<stem>.(png|pgm)
//   root/<class>/cosaliency/<stem>.(png|pgm)
//   root/<class>/boxes.csv          stem,t,b,l,r per instance, '#' comments

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include <nlohmann/json.hpp>
#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include "coloc/error.hpp"
#include "coloc/geometry.hpp"
#include "coloc/raster_io.hpp"
#include "coloc/solver.hpp"

namespace coloc {

namespace fs = std::filesystem;

struct DatasetCase {
  std::string id;  // image stem
  std::string class_name;
  fs::path image_path;
  fs::path saliency_path;
  fs::path cosaliency_path;
  std::vector<BoundingBox> ground_truth;
  int width = 0;
  int height = 0;
};

struct DatasetOptions {
  // eval only needs images and boxes.csv
  bool require_maps = true;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

inline std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    fields.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

inline std::optional<int> parse_int(std::string_view s) {
  int value = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return value;
}

// Non-comment, non-blank lines of a CSV-ish file with their 1-based numbers.
inline std::vector<std::pair<int, std::string>> content_lines(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::FileNotFound, path.string());
  std::vector<std::pair<int, std::string>> lines;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    std::string_view view = line;
    if (const std::size_t hash = view.find('#'); hash != std::string_view::npos) {
      view = view.substr(0, hash);
    }
    view = trim(view);
    if (!view.empty()) lines.emplace_back(number, std::string(view));
  }
  return lines;
}

[[noreturn]] inline void malformed(const fs::path& path, int line, const std::string& why) {
  throw Error(ErrorCode::MalformedBoxesFile, path.string() + ":" + std::to_string(line) + ": " + why);
}

inline BoundingBox parse_box_fields(const fs::path& path, int line,
                                    std::span<const std::string_view> fields) {
  std::array<int, 4> v{};
  for (std::size_t i = 0; i < 4; ++i) {
    const auto parsed = parse_int(fields[i]);
    if (!parsed) malformed(path, line, "'" + std::string(fields[i]) + "' is not an integer");
    v[i] = *parsed;
  }
  const BoundingBox box{v[0], v[1], v[2], v[3]};
  if (box.b <= box.t) malformed(path, line, "b must exceed t");
  if (box.r <= box.l) malformed(path, line, "r must exceed l");
  if (box.t < 0 || box.l < 0) malformed(path, line, "negative coordinate");
  return box;
}

struct GroundTruthLine {
  int line;
  std::string stem;
  BoundingBox box;
};

inline std::vector<GroundTruthLine> read_boxes_file(const fs::path& path) {
  std::vector<GroundTruthLine> out;
  for (const auto& [number, text] : content_lines(path)) {
    const auto fields = split_fields(text);
    if (fields.size() != 5) malformed(path, number, "expected stem,t,b,l,r");
    if (fields[0].empty()) malformed(path, number, "empty stem");
    out.push_back({number, std::string(fields[0]),
                   parse_box_fields(path, number, std::span(fields).subspan(1))});
  }
  return out;
}

// stem -> file, for .png/.pgm files in `dir`; png wins over pgm.
inline std::map<std::string, fs::path> raster_files(const fs::path& dir) {
  std::map<std::string, fs::path> files;
  if (!fs::is_directory(dir)) return files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file() || !supported_extension(entry.path())) continue;
    const std::string stem = entry.path().stem().string();
    auto [it, inserted] = files.emplace(stem, entry.path());
    if (!inserted && lower_extension(entry.path()) == ".png") it->second = entry.path();
  }
  return files;
}

}  // namespace detail

/// Reads every class directory under `root` (those holding an images/
/// folder), ordered by class name then stem. Missing maps are collected
/// across the whole dataset and reported together.
inline std::vector<DatasetCase> load_dataset(const fs::path& root, DatasetOptions options = {}) {
  if (!fs::is_directory(root)) throw Error(ErrorCode::FileNotFound, root.string());
  std::vector<fs::path> class_dirs;
  for (const auto& entry : fs::directory_iterator(root)) {
    if (entry.is_directory() && fs::is_directory(entry.path() / "images")) {
      class_dirs.push_back(entry.path());
    }
  }
  std::sort(class_dirs.begin(), class_dirs.end());

  std::vector<DatasetCase> cases;
  std::vector<std::string> missing;
  for (const fs::path& dir : class_dirs) {
    const std::string class_name = dir.filename().string();
    const auto images = detail::raster_files(dir / "images");
    const auto saliency = detail::raster_files(dir / "saliency");
    const auto cosaliency = detail::raster_files(dir / "cosaliency");

    const std::size_t first = cases.size();
    for (const auto& [stem, image_path] : images) {
      DatasetCase c;
      c.id = stem;
      c.class_name = class_name;
      c.image_path = image_path;
      if (options.require_maps) {
        const auto s = saliency.find(stem);
        const auto k = cosaliency.find(stem);
        if (s == saliency.end()) missing.push_back(class_name + "/" + stem + " (saliency)");
        if (k == cosaliency.end()) missing.push_back(class_name + "/" + stem + " (cosaliency)");
        if (s == saliency.end() || k == cosaliency.end()) continue;
        c.saliency_path = s->second;
        c.cosaliency_path = k->second;
      }
      cases.push_back(std::move(c));
    }
    if (!missing.empty()) continue;

    for (std::size_t i = first; i < cases.size(); ++i) {
      DatasetCase& c = cases[i];
      const GrayMap image = load_gray_map(c.image_path);
      c.width = image.width();
      c.height = image.height();
      if (options.require_maps) {
        for (const fs::path& map_path : {c.saliency_path, c.cosaliency_path}) {
          if (!load_gray_map(map_path).same_shape(image)) {
            throw Error(ErrorCode::DimensionMismatch,
                        map_path.string() + " does not match " + c.image_path.string());
          }
        }
      }
    }

    const fs::path boxes_path = dir / "boxes.csv";
    if (!fs::exists(boxes_path)) continue;
    std::map<std::string, DatasetCase*> by_stem;
    for (std::size_t i = first; i < cases.size(); ++i) by_stem[cases[i].id] = &cases[i];
    for (const auto& gt : detail::read_boxes_file(boxes_path)) {
      const auto it = by_stem.find(gt.stem);
      if (it == by_stem.end()) detail::malformed(boxes_path, gt.line, "unknown stem " + gt.stem);
      DatasetCase& c = *it->second;
      if (!is_valid(gt.box, c.width, c.height)) {
        detail::malformed(boxes_path, gt.line, "box outside the image");
      }
      c.ground_truth.push_back(gt.box);
    }
  }
  if (!missing.empty()) {
    std::string detail = "no matching map for";
    for (const std::string& m : missing) detail += "\n  " + m;
    throw Error(ErrorCode::MissingMap, detail);
  }
  return cases;
}

inline CaseMaps load_case_maps(const DatasetCase& c) {
  return {load_gray_map(c.image_path), load_gray_map(c.saliency_path),
          load_gray_map(c.cosaliency_path)};
}

/// One box enclosing every annotated instance.
inline BoundingBox merge_ground_truth(std::span<const BoundingBox> boxes) {
  if (boxes.empty()) throw Error(ErrorCode::NoGroundTruth, "no ground-truth boxes");
  return union_box(boxes);
}

// ---------------------------------------------------------------------------
// Predictions file: class,stem,t,b,l,r

struct Prediction {
  std::string class_name;
  std::string id;
  BoundingBox box;
};

inline void write_predictions(std::span<const Prediction> predictions, const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::WriteFailure, path.string());
  out << "# class,stem,t,b,l,r\n";
  for (const Prediction& p : predictions) {
    out << p.class_name << ',' << p.id << ',' << p.box.t << ',' << p.box.b << ',' << p.box.l << ','
        << p.box.r << '\n';
  }
  if (!out) throw Error(ErrorCode::WriteFailure, path.string());
}

inline std::vector<Prediction> read_predictions(const fs::path& path) {
  std::vector<Prediction> out;
  std::set<std::pair<std::string, std::string>> seen;
  for (const auto& [number, text] : detail::content_lines(path)) {
    const auto fields = detail::split_fields(text);
    if (fields.size() != 6) detail::malformed(path, number, "expected class,stem,t,b,l,r");
    Prediction p{std::string(fields[0]), std::string(fields[1]),
                 detail::parse_box_fields(path, number, std::span(fields).subspan(2))};
    if (!seen.emplace(p.class_name, p.id).second) {
      detail::malformed(path, number, "duplicate prediction for " + p.class_name + "/" + p.id);
    }
    out.push_back(std::move(p));
  }
  return out;
}

// ---------------------------------------------------------------------------
// CorLoc

struct ScoredCase {
  std::string id;
  std::string class_name;
  BoundingBox predicted;
  std::vector<BoundingBox> ground_truth;
  int iterations = 0;
  std::string termination;
};

struct ImageRecord {
  std::string id;
  std::string class_name;
  BoundingBox predicted;
  BoundingBox ground_truth;
  double iou = 0.0;
  bool hit = false;
  int iterations = 0;
  std::string termination;
};

struct ClassScore {
  std::string name;
  int images = 0;
  int hits = 0;
  double corloc = 0.0;  // percent
};

struct EvalReport {
  double iou_threshold = 0.5;
  std::string provenance = "external";
  std::vector<ClassScore> classes;
  double mean_corloc = 0.0;        // unweighted mean over classes
  double image_mean_corloc = 0.0;  // pooled over all images
  int skipped = 0;                 // cases without ground truth
  std::vector<ImageRecord> images;
};

/// Percentage of images per class whose prediction reaches IoU >= threshold
/// against the merged ground-truth box. Cases without ground truth are
/// counted in `skipped`.
inline EvalReport corloc(std::span<const ScoredCase> results, double iou_threshold = 0.5) {
  if (!(iou_threshold > 0.0 && iou_threshold < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "IoU threshold must lie in (0,1)");
  }
  EvalReport report;
  report.iou_threshold = iou_threshold;
  for (const ScoredCase& c : results) {
    if (c.ground_truth.empty()) {
      ++report.skipped;
      continue;
    }
    ImageRecord rec;
    rec.id = c.id;
    rec.class_name = c.class_name;
    rec.predicted = c.predicted;
    rec.ground_truth = merge_ground_truth(c.ground_truth);
    rec.iou = iou(rec.predicted, rec.ground_truth);
    rec.hit = rec.iou >= iou_threshold;
    rec.iterations = c.iterations;
    rec.termination = c.termination;
    report.images.push_back(std::move(rec));
  }
  if (report.images.empty()) throw Error(ErrorCode::EmptyResults, "no case with ground truth");

  std::sort(report.images.begin(), report.images.end(), [](const auto& a, const auto& b) {
    return std::tie(a.class_name, a.id) < std::tie(b.class_name, b.id);
  });
  std::map<std::string, ClassScore> by_class;
  int total_hits = 0;
  for (const ImageRecord& rec : report.images) {
    ClassScore& score = by_class[rec.class_name];
    score.name = rec.class_name;
    ++score.images;
    score.hits += rec.hit ? 1 : 0;
    total_hits += rec.hit ? 1 : 0;
  }
  double sum = 0.0;
  for (auto& [name, score] : by_class) {
    score.corloc = 100.0 * score.hits / score.images;
    sum += score.corloc;
    report.classes.push_back(score);
  }
  report.mean_corloc = sum / static_cast<double>(report.classes.size());
  report.image_mean_corloc = 100.0 * total_hits / static_cast<double>(report.images.size());
  return report;
}

/// Class columns followed by Mean, one CorLoc row.
inline std::string format_corloc_table(const EvalReport& report, std::string_view method = "Ours") {
  std::ostringstream head;
  std::ostringstream row;
  head << "Method";
  row << method;
  char buf[32];
  for (const ClassScore& c : report.classes) {
    head << " | " << c.name;
    std::snprintf(buf, sizeof buf, "%.2f", c.corloc);
    row << " | " << buf;
  }
  std::snprintf(buf, sizeof buf, "%.2f", report.mean_corloc);
  head << " | Mean";
  row << " | " << buf;
  return head.str() + "\n" + row.str() + "\n";
}

// ---------------------------------------------------------------------------
// Report serialization

enum class ReportFormat { Json, Csv };

namespace detail {

inline double round4(double x) { return std::round(x * 1e4) / 1e4; }

inline std::string fixed4(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f", x);
  return buf;
}

inline nlohmann::ordered_json box_json(const BoundingBox& b) {
  return nlohmann::ordered_json::array({b.t, b.b, b.l, b.r});
}

inline BoundingBox box_from_json(const nlohmann::json& j) {
  return {j.at(0).get<int>(), j.at(1).get<int>(), j.at(2).get<int>(), j.at(3).get<int>()};
}

}  // namespace detail

inline nlohmann::ordered_json report_to_json(const EvalReport& report) {
  using nlohmann::ordered_json;
  ordered_json j;
  j["iou_threshold"] = detail::round4(report.iou_threshold);
  j["provenance"] = report.provenance;
  j["mean_corloc"] = detail::round4(report.mean_corloc);
  j["image_mean_corloc"] = detail::round4(report.image_mean_corloc);
  j["skipped"] = report.skipped;
  j["classes"] = ordered_json::array();
  for (const ClassScore& c : report.classes) {
    ordered_json cj;
    cj["name"] = c.name;
    cj["images"] = c.images;
    cj["hits"] = c.hits;
    cj["corloc"] = detail::round4(c.corloc);
    j["classes"].push_back(std::move(cj));
  }
  j["images"] = ordered_json::array();
  for (const ImageRecord& r : report.images) {
    ordered_json rj;
    rj["case_id"] = r.id;
    rj["class"] = r.class_name;
    rj["box"] = detail::box_json(r.predicted);
    rj["gt"] = detail::box_json(r.ground_truth);
    rj["iou"] = detail::round4(r.iou);
    rj["hit"] = r.hit;
    rj["iters"] = r.iterations;
    rj["termination"] = r.termination;
    j["images"].push_back(std::move(rj));
  }
  return j;
}

inline EvalReport report_from_json(const nlohmann::json& j) {
  EvalReport report;
  report.iou_threshold = j.at("iou_threshold").get<double>();
  report.provenance = j.at("provenance").get<std::string>();
  report.mean_corloc = j.at("mean_corloc").get<double>();
  report.image_mean_corloc = j.at("image_mean_corloc").get<double>();
  report.skipped = j.at("skipped").get<int>();
  for (const auto& cj : j.at("classes")) {
    report.classes.push_back({cj.at("name").get<std::string>(), cj.at("images").get<int>(),
                              cj.at("hits").get<int>(), cj.at("corloc").get<double>()});
  }
  for (const auto& rj : j.at("images")) {
    ImageRecord r;
    r.id = rj.at("case_id").get<std::string>();
    r.class_name = rj.at("class").get<std::string>();
    r.predicted = detail::box_from_json(rj.at("box"));
    r.ground_truth = detail::box_from_json(rj.at("gt"));
    r.iou = rj.at("iou").get<double>();
    r.hit = rj.at("hit").get<bool>();
    r.iterations = rj.at("iters").get<int>();
    r.termination = rj.at("termination").get<std::string>();
    report.images.push_back(std::move(r));
  }
  return report;
}

inline std::string report_to_csv(const EvalReport& report) {
  std::ostringstream os;
  os << "case_id,class,t,b,l,r,gt_t,gt_b,gt_l,gt_r,iou,hit,iters,termination\n";
  for (const ImageRecord& r : report.images) {
    os << r.id << ',' << r.class_name << ',' << r.predicted.t << ',' << r.predicted.b << ','
       << r.predicted.l << ',' << r.predicted.r << ',' << r.ground_truth.t << ','
       << r.ground_truth.b << ',' << r.ground_truth.l << ',' << r.ground_truth.r << ','
       << detail::fixed4(r.iou) << ',' << (r.hit ? 1 : 0) << ',' << r.iterations << ','
       << r.termination << '\n';
  }
  return os.str();
}

inline void write_report(const EvalReport& report, const fs::path& path, ReportFormat format) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::WriteFailure, path.string());
  if (format == ReportFormat::Json) {
    out << report_to_json(report).dump(2) << '\n';
  } else {
    out << report_to_csv(report);
  }
  if (!out) throw Error(ErrorCode::WriteFailure, path.string());
}

inline EvalReport read_report_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::FileNotFound, path.string());
  return report_from_json(nlohmann::json::parse(in));
}

// ---------------------------------------------------------------------------
// Traces and overlays

/// One line per iteration: iter,t,b,l,r,step_sq_norm,termination. Only the
/// last line carries the termination reason.
inline std::string trace_to_text(const IterationTrace& trace) {
  std::ostringstream os;
  if (trace.fallback) os << "# fallback: " << to_string(*trace.fallback) << '\n';
  os << "iter,t,b,l,r,step_sq_norm,termination\n";
  for (std::size_t i = 0; i < trace.records.size(); ++i) {
    const IterationRecord& r = trace.records[i];
    os << r.iteration << ',' << r.box.t << ',' << r.box.b << ',' << r.box.l << ',' << r.box.r
       << ',' << detail::fixed4(r.step_sq_norm) << ',';
    if (i + 1 == trace.records.size()) os << to_string(trace.termination);
    os << '\n';
  }
  return os.str();
}

inline void write_trace(const IterationTrace& trace, const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::WriteFailure, path.string());
  out << trace_to_text(trace);
  if (!out) throw Error(ErrorCode::WriteFailure, path.string());
}

namespace detail {

// 2-pixel stroke drawn inside the box edges, clipped to the image.
inline void draw_box(cv::Mat& canvas, const BoundingBox& box, const cv::Vec3b& color) {
  for (int row = box.t; row <= box.b; ++row) {
    for (int col = box.l; col <= box.r; ++col) {
      const bool on_stroke = row <= box.t + 1 || row >= box.b - 1 || col <= box.l + 1 ||
                             col >= box.r - 1;
      if (!on_stroke || row < 0 || col < 0 || row >= canvas.rows || col >= canvas.cols) continue;
      canvas.at<cv::Vec3b>(row, col) = color;
    }
  }
}

}  // namespace detail

/// PNG copy of the image with ground truth in red, then the prediction in
/// green on top.
inline void render_overlay(const fs::path& image_path, const BoundingBox& ground_truth,
                           const BoundingBox& predicted, const fs::path& out_path) {
  const GrayMap image = load_gray_map(image_path);
  cv::Mat color = cv::imread(image_path.string(), cv::IMREAD_COLOR);
  if (color.empty()) throw Error(ErrorCode::UnsupportedFormat, image_path.string());
  require_valid(ground_truth, image.width(), image.height());
  require_valid(predicted, image.width(), image.height());
  detail::draw_box(color, ground_truth, cv::Vec3b(0, 0, 255));
  detail::draw_box(color, predicted, cv::Vec3b(0, 255, 0));
  bool ok = false;
  try {
    ok = detail::lower_extension(out_path) == ".png" && cv::imwrite(out_path.string(), color);
  } catch (const cv::Exception&) {
    ok = false;
  }
  if (!ok) throw Error(ErrorCode::WriteFailure, out_path.string());
}

}  // namespace coloc
