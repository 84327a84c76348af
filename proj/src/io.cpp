#include "beliefuse/io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <ostream>
#include <sstream>

#include "beliefuse/errors.hpp"

namespace beliefuse::io {
namespace {

namespace fs = std::filesystem;

Json box_to_json(const BoundingBox& b) {
  return Json::array({b.x_min(), b.y_min(), b.x_max(), b.y_max()});
}

BoundingBox box_from_json(const Json& j) {
  if (!j.is_array() || j.size() != 4) throw DataError("bbox must be [x_min, y_min, x_max, y_max]");
  return BoundingBox(j[0].get<double>(), j[1].get<double>(), j[2].get<double>(),
                     j[3].get<double>());
}

template <typename T, typename Parse>
std::vector<T> read_lines(const fs::path& file, Parse parse) {
  std::ifstream in(file);
  if (!in) throw DataError("cannot open " + file.string());
  std::vector<T> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const Json j = Json::parse(line);
      if (j.contains(kProvenanceKey)) continue;
      out.push_back(parse(j));
    } catch (const std::exception& e) {
      throw DataError(file.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

std::string interpolation_name(ScoreInterpolation i) {
  return i == ScoreInterpolation::kStep ? "step" : "linear";
}

ScoreInterpolation interpolation_from_name(const std::string& s) {
  if (s == "step") return ScoreInterpolation::kStep;
  if (s == "linear") return ScoreInterpolation::kLinear;
  throw DataError("unknown interpolation '" + s + "'");
}

std::vector<double> doubles(const Json& j) { return j.get<std::vector<double>>(); }

}  // namespace

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

Json detection_to_json(const Detection& d) {
  return Json{{"image_id", d.image_id},
              {"detector_id", d.detector_id},
              {"class", d.class_label},
              {"bbox", box_to_json(d.box)},
              {"score", d.score}};
}

Detection detection_from_json(const Json& j) {
  return Detection(j.at("image_id").get<std::string>(), j.at("detector_id").get<std::string>(),
                   j.at("class").get<std::string>(), box_from_json(j.at("bbox")),
                   j.at("score").get<double>());
}

Json annotation_to_json(const GroundTruthObject& g) {
  return Json{{"image_id", g.image_id},
              {"class", g.class_label},
              {"bbox", box_to_json(g.box)},
              {"difficult", g.difficult}};
}

GroundTruthObject annotation_from_json(const Json& j) {
  return GroundTruthObject{j.at("image_id").get<std::string>(), j.at("class").get<std::string>(),
                           box_from_json(j.at("bbox")), j.value("difficult", false)};
}

Json fused_to_json(const FusedDetection& f, const std::string& method) {
  Json j{{"image_id", f.image_id},
         {"detector_id", method},
         {"class", f.class_label},
         {"bbox", box_to_json(f.box)},
         {"score", f.score},
         {"method", method},
         {"subject_detector", f.subject_detector}};
  if (f.verdict) {
    j["m_target"] = f.verdict->joint.target();
    j["m_nontarget"] = f.verdict->joint.non_target();
    j["m_intermediate"] = f.verdict->joint.intermediate();
  }
  return j;
}

std::vector<Detection> read_detections(const fs::path& file) {
  return read_lines<Detection>(file, detection_from_json);
}

std::vector<GroundTruthObject> read_annotations(const fs::path& file) {
  return read_lines<GroundTruthObject>(file, annotation_from_json);
}

std::vector<Detection> read_detections_dir(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw DataError("not a directory: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".jsonl") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<Detection> out;
  for (const auto& f : files) {
    auto part = read_detections(f);
    out.insert(out.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
  }
  return out;
}

void write_jsonl(const fs::path& file, const std::vector<Json>& lines, const Json* provenance) {
  if (file.has_parent_path()) fs::create_directories(file.parent_path());
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + file.string());
  if (provenance) out << Json{{kProvenanceKey, *provenance}}.dump() << '\n';
  for (const auto& line : lines) out << line.dump() << '\n';
}

void write_json(const fs::path& file, const Json& document) {
  if (file.has_parent_path()) fs::create_directories(file.parent_path());
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + file.string());
  out << document.dump(2) << '\n';
}

Json read_json(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw DataError("cannot open " + file.string());
  try {
    return Json::parse(in);
  } catch (const std::exception& e) {
    throw DataError(file.string() + ": " + e.what());
  }
}

Json envelope(const std::string& kind, Json model, const Json* provenance) {
  Json doc{{"format_version", kFormatVersion}, {"kind", kind}};
  if (provenance) doc["provenance"] = *provenance;
  doc["model"] = std::move(model);
  return doc;
}

const Json& open_envelope(const Json& doc, const std::string& kind) {
  if (!doc.is_object() || !doc.contains("format_version") || !doc.contains("model")) {
    throw DataError("not a model envelope");
  }
  if (doc.at("format_version").get<int>() != kFormatVersion) {
    throw DataError("unsupported format_version " + doc.at("format_version").dump());
  }
  if (doc.value("kind", std::string()) != kind) {
    throw DataError("expected a '" + kind + "' document, found '" +
                    doc.value("kind", std::string()) + "'");
  }
  return doc.at("model");
}

Json to_json(const TrustModel& m) {
  Json table = Json::array();
  for (const auto& row : m.table()) {
    table.push_back(Json{{"score", row.score_threshold},
                         {"recall", row.recall},
                         {"precision_raw", row.precision_raw},
                         {"precision_monotone", row.precision}});
  }
  return Json{{"detector_id", m.detector_id()},
              {"class_label", m.class_label()},
              {"n", m.exponent().is_infinite() ? Json("inf") : Json(m.exponent().value())},
              {"num_validation_positives", m.num_validation_positives()},
              {"interpolation", interpolation_name(m.interpolation())},
              {"informative", m.informative()},
              {"table", std::move(table)}};
}

TrustModel trust_model_from_json(const Json& j) {
  const Json& n_json = j.at("n");
  const BpdExponent n = n_json.is_string() ? BpdExponent::parse(n_json.get<std::string>())
                                           : BpdExponent(n_json.get<double>());
  auto detector = j.at("detector_id").get<std::string>();
  auto label = j.at("class_label").get<std::string>();
  const auto positives = j.at("num_validation_positives").get<std::size_t>();
  const Json& rows = j.at("table");
  if (rows.empty()) return TrustModel::uninformative(detector, label, n, positives);
  std::vector<PrPoint> table;
  for (const auto& r : rows) {
    table.push_back({r.at("score").get<double>(), r.at("recall").get<double>(),
                     r.at("precision_raw").get<double>(),
                     r.at("precision_monotone").get<double>()});
  }
  return TrustModel(std::move(detector), std::move(label), std::move(table), n, positives,
                    interpolation_from_name(j.value("interpolation", std::string("step"))));
}

Json to_json(const PlattModel& m) {
  return Json{{"detector_id", m.detector_id}, {"class_label", m.class_label},
              {"a", m.a},                     {"b", m.b},
              {"converged", m.converged},     {"iterations", m.iterations}};
}

PlattModel platt_model_from_json(const Json& j) {
  return PlattModel{j.at("detector_id").get<std::string>(), j.at("class_label").get<std::string>(),
                    j.at("a").get<double>(),                j.at("b").get<double>(),
                    j.at("converged").get<bool>(),          j.at("iterations").get<int>()};
}

Json to_json(const PlattModelMap& models) {
  Json arr = Json::array();
  for (const auto& [_, m] : models) arr.push_back(to_json(m));
  return arr;
}

PlattModelMap platt_map_from_json(const Json& j) {
  PlattModelMap out;
  for (const auto& item : j) {
    PlattModel m = platt_model_from_json(item);
    out.emplace(m.detector_id, std::move(m));
  }
  return out;
}

Json to_json(const WeightVector& w) {
  return Json{{"class_label", w.class_label}, {"detector_ids", w.detector_ids},
              {"weights", w.weights},         {"bias", w.bias},
              {"c", w.c},                     {"epochs", w.epochs}};
}

WeightVector weight_vector_from_json(const Json& j) {
  WeightVector w;
  w.class_label = j.at("class_label").get<std::string>();
  w.detector_ids = j.at("detector_ids").get<std::vector<std::string>>();
  w.weights = doubles(j.at("weights"));
  w.bias = j.at("bias").get<double>();
  w.c = j.at("c").get<double>();
  w.epochs = j.at("epochs").get<int>();
  if (w.weights.size() != w.detector_ids.size()) throw DataError("weight vector size mismatch");
  return w;
}

Json to_json(const ScoreLikelihood& l) {
  return Json{{"detector_id", l.detector_id},
              {"bin_count", l.bin_count()},
              {"smoothing", l.smoothing},
              {"target", l.target},
              {"non_target", l.non_target}};
}

ScoreLikelihood likelihood_from_json(const Json& j) {
  ScoreLikelihood l{j.at("detector_id").get<std::string>(), j.at("smoothing").get<double>(),
                    doubles(j.at("target")), doubles(j.at("non_target"))};
  if (l.target.empty() || l.target.size() != l.non_target.size() ||
      l.target.size() != j.at("bin_count").get<std::size_t>()) {
    throw DataError("likelihood histogram size mismatch");
  }
  return l;
}

Json to_json(const NaiveBayesModel& m) {
  Json arr = Json::array();
  for (const auto& [_, l] : m.likelihoods) arr.push_back(to_json(l));
  return Json{{"class_label", m.class_label},
              {"prior_target", m.prior_target},
              {"likelihoods", std::move(arr)}};
}

NaiveBayesModel naive_bayes_from_json(const Json& j) {
  NaiveBayesModel m;
  m.class_label = j.at("class_label").get<std::string>();
  m.prior_target = j.at("prior_target").get<double>();
  for (const auto& item : j.at("likelihoods")) {
    ScoreLikelihood l = likelihood_from_json(item);
    m.likelihoods.emplace(l.detector_id, std::move(l));
  }
  return m;
}

Json to_json(const EvalReport& r) {
  Json classes = Json::object();
  for (const auto& [label, ce] : r.classes) {
    classes[label] = Json{{"ap", ce.ap},
                          {"num_gt", ce.num_gt},
                          {"num_detections", ce.num_detections},
                          {"tp", ce.tp},
                          {"fp", ce.fp}};
  }
  return Json{{"method", r.method}, {"mAP", r.mean_ap}, {"classes", std::move(classes)}};
}

void write_report_csv(std::ostream& os, const std::map<std::string, EvalReport>& reports) {
  os << "method,class,ap,num_gt,num_detections,tp,fp\n";
  for (const auto& [name, r] : reports) {
    std::size_t gt = 0, dets = 0, tp = 0, fp = 0;
    for (const auto& [label, ce] : r.classes) {
      os << name << ',' << label << ',' << format_double(ce.ap) << ',' << ce.num_gt << ','
         << ce.num_detections << ',' << ce.tp << ',' << ce.fp << '\n';
      gt += ce.num_gt;
      dets += ce.num_detections;
      tp += ce.tp;
      fp += ce.fp;
    }
    os << name << ",mAP," << format_double(r.mean_ap) << ',' << gt << ',' << dets << ',' << tp
       << ',' << fp << '\n';
  }
}

void write_pr_csv(std::ostream& os, const std::map<std::string, EvalReport>& reports) {
  os << "method,class,rank,recall,precision\n";
  for (const auto& [name, r] : reports) {
    for (const auto& [label, ce] : r.classes) {
      for (std::size_t i = 0; i < ce.curve.size(); ++i) {
        os << name << ',' << label << ',' << i + 1 << ',' << format_double(ce.curve[i].recall)
           << ',' << format_double(ce.curve[i].precision) << '\n';
      }
    }
  }
}

}  // namespace beliefuse::io
