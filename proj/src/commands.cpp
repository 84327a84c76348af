#include "beliefuse/commands.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <set>
#include <sstream>

#include "beliefuse/datagen.hpp"

namespace beliefuse::cli {
namespace {

namespace fs = std::filesystem;

constexpr const char* kTrustPrefix = "trust__";
constexpr const char* kPlattPrefix = "platt__";
constexpr const char* kWeightedSumPrefix = "ws__";
constexpr const char* kBayesPrefix = "bayes__";

// File-name-safe rendering of an id; the id itself is stored in the file.
std::string file_token(const std::string& id) {
  std::string out = id;
  for (char& c : out) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                    c == '-' || c == '_' || c == '.';
    if (!ok) c = '_';
  }
  return out;
}

void require_path(const fs::path& p, const char* flag) {
  if (p.empty()) throw ConfigError(std::string("missing required option ") + flag);
}

std::vector<fs::path> files_with_prefix(const fs::path& dir, const std::string& prefix) {
  std::vector<fs::path> out;
  if (!fs::is_directory(dir)) return out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (entry.is_regular_file() && name.rfind(prefix, 0) == 0 && entry.path().extension() == ".json") {
      out.push_back(entry.path());
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::string eval_csv(const std::map<std::string, EvalReport>& reports) {
  std::ostringstream os;
  io::write_report_csv(os, reports);
  return os.str();
}

void write_text(const fs::path& file, const std::string& text, const io::Json& prov) {
  if (file.has_parent_path()) fs::create_directories(file.parent_path());
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + file.string());
  out << "# " << io::kProvenanceKey << ' ' << prov.dump() << '\n' << text;
}

struct SweepRow {
  std::string n;
  std::string class_label;
  double ap;
  double mean_ap;
};

std::vector<SweepRow> sweep(const DataSplit& validation, const DataSplit& test,
                            const std::vector<std::string>& n_values, PipelineOptions options,
                            const EvalOptions& eval) {
  const TrustModelSet base = build_trust_models(validation, options);
  std::vector<SweepRow> rows;
  for (const auto& text : n_values) {
    const BpdExponent n = BpdExponent::parse(text);
    const TrustModelSet models = base.with_exponent(n);
    const auto fused = fuse_split(test.detections, Method::kDbf, &models, nullptr, options);
    const auto report = evaluate("dbf", as_detections(fused, "dbf"), test.annotations, eval);
    for (const auto& [label, ce] : report.classes) {
      rows.push_back({n.to_string(), label, ce.ap, report.mean_ap});
    }
    rows.push_back({n.to_string(), "mAP", report.mean_ap, report.mean_ap});
  }
  return rows;
}

}  // namespace

PipelineOptions pipeline_options(const RunConfig& c) {
  auto check = [](double v, const char* what) {
    if (!(v > 0.0 && v < 1.0)) throw ConfigError(std::string(what) + " must lie in (0, 1)");
  };
  check(c.match_iou, "--match-iou");
  check(c.vector_iou, "--vector-iou");
  check(c.nms_iou, "--nms-iou");

  PipelineOptions o;
  o.match.iou_threshold = c.match_iou;
  if (c.duplicate_policy == "undecided") {
    o.match.duplicate_policy = DuplicatePolicy::kUndecided;
  } else if (c.duplicate_policy == "false_positive") {
    o.match.duplicate_policy = DuplicatePolicy::kFalsePositive;
  } else {
    throw ConfigError("--duplicate-policy must be undecided or false_positive");
  }
  if (c.absent_policy == "vacuous") {
    o.fusion.absent_policy = AbsentPolicy::kVacuous;
  } else if (c.absent_policy == "recall_one") {
    o.fusion.absent_policy = AbsentPolicy::kRecallOne;
  } else {
    throw ConfigError("--absent-policy must be vacuous or recall_one");
  }
  if (c.interpolation == "step") {
    o.interpolation = ScoreInterpolation::kStep;
  } else if (c.interpolation == "linear") {
    o.interpolation = ScoreInterpolation::kLinear;
  } else {
    throw ConfigError("--interpolation must be step or linear");
  }
  o.fusion.vector_iou = c.vector_iou;
  o.fusion.nms_iou = c.nms_iou;
  o.n = BpdExponent::parse(c.n);
  o.svm.seed = static_cast<std::uint32_t>(c.seed);
  o.jobs = std::max(1u, c.jobs);
  return o;
}

EvalOptions eval_options(const RunConfig& c) {
  EvalOptions o;
  if (!(c.match_iou > 0.0 && c.match_iou < 1.0)) throw ConfigError("--match-iou must lie in (0, 1)");
  o.iou_threshold = c.match_iou;
  if (c.ap_interp == "all-points") {
    o.interpolation = ApInterpolation::kAllPoints;
  } else if (c.ap_interp == "voc11") {
    o.interpolation = ApInterpolation::kVoc11;
  } else {
    throw ConfigError("--ap-interp must be all-points or voc11");
  }
  return o;
}

io::Json provenance(const RunConfig& c, const std::string& command) {
  io::Json inputs = io::Json::array();
  for (const auto& p : c.inputs) inputs.push_back(p.string());
  // jobs is deliberately absent: it never changes results.
  return io::Json{{"command", command},
                  {"detections_dir", c.detections_dir.string()},
                  {"annotations", c.annotations.string()},
                  {"models_dir", c.models_dir.string()},
                  {"out", c.out.string()},
                  {"test_detections_dir", c.test_detections_dir.string()},
                  {"test_annotations", c.test_annotations.string()},
                  {"inputs", inputs},
                  {"method", c.method},
                  {"n", c.n},
                  {"n_values", c.n_values},
                  {"match_iou", c.match_iou},
                  {"vector_iou", c.vector_iou},
                  {"nms_iou", c.nms_iou},
                  {"absent_policy", c.absent_policy},
                  {"duplicate_policy", c.duplicate_policy},
                  {"ap_interp", c.ap_interp},
                  {"interpolation", c.interpolation},
                  {"seed", c.seed},
                  {"num_images", c.num_images},
                  {"preset", c.preset}};
}

DataSplit load_split(const fs::path& detections_dir, const fs::path& annotations) {
  require_path(detections_dir, "--detections-dir");
  require_path(annotations, "--annotations");
  return DataSplit{io::read_annotations(annotations), io::read_detections_dir(detections_dir)};
}

TrustModelSet load_trust_models(const fs::path& models_dir) {
  TrustModelSet set;
  for (const auto& file : files_with_prefix(models_dir, kTrustPrefix)) {
    TrustModel m = io::trust_model_from_json(io::open_envelope(io::read_json(file), "trust_model"));
    const std::string label = m.class_label();
    set.by_class[label].emplace(m.detector_id(), std::move(m));
  }
  if (set.by_class.empty()) {
    throw ModelMissing("no trust models (" + std::string(kTrustPrefix) + "*.json) in " +
                       models_dir.string() + "; run build-trust first");
  }
  return set;
}

BaselineSet load_baselines(const fs::path& models_dir, Method method) {
  BaselineSet set;
  for (const auto& file : files_with_prefix(models_dir, kPlattPrefix)) {
    const io::Json doc = io::read_json(file);
    const io::Json& model = io::open_envelope(doc, "platt_models");
    set.platt.emplace(model.at("class_label").get<std::string>(),
                      io::platt_map_from_json(model.at("detectors")));
  }
  if (set.platt.empty()) {
    throw ModelMissing("no Platt models (" + std::string(kPlattPrefix) + "*.json) in " +
                       models_dir.string() + "; run build-baselines first");
  }
  if (method == Method::kWeightedSum) {
    for (const auto& file : files_with_prefix(models_dir, kWeightedSumPrefix)) {
      WeightVector w =
          io::weight_vector_from_json(io::open_envelope(io::read_json(file), "weighted_sum"));
      const std::string label = w.class_label;
      set.weighted_sum.emplace(label, std::move(w));
    }
    if (set.weighted_sum.empty()) {
      throw ModelMissing("no weighted-sum weights (" + std::string(kWeightedSumPrefix) +
                         "*.json) in " + models_dir.string() + "; run build-baselines first");
    }
  }
  if (method == Method::kBayes) {
    for (const auto& file : files_with_prefix(models_dir, kBayesPrefix)) {
      NaiveBayesModel m =
          io::naive_bayes_from_json(io::open_envelope(io::read_json(file), "naive_bayes"));
      const std::string label = m.class_label;
      set.bayes.emplace(label, std::move(m));
    }
    if (set.bayes.empty()) {
      throw ModelMissing("no naive Bayes likelihoods (" + std::string(kBayesPrefix) +
                         "*.json) in " + models_dir.string() + "; run build-baselines first");
    }
  }
  return set;
}

void write_dataset(const fs::path& out, const SyntheticDataset& data, const io::Json& prov) {
  for (const auto& [name, split] :
       {std::pair<const char*, const SyntheticSplit*>{"validation", &data.validation},
        std::pair<const char*, const SyntheticSplit*>{"test", &data.test}}) {
    std::vector<io::Json> annotations;
    for (const auto& g : split->annotations) annotations.push_back(io::annotation_to_json(g));
    io::write_jsonl(out / name / "annotations.jsonl", annotations, &prov);

    std::map<std::string, std::vector<io::Json>> by_detector;
    for (const auto& d : split->detections) by_detector[d.detector_id].push_back(io::detection_to_json(d));
    for (const auto& [id, lines] : by_detector) {
      io::write_jsonl(out / name / "detections" / (file_token(id) + ".jsonl"), lines, &prov);
    }
  }
}

void cmd_generate(const RunConfig& c, std::ostream& log) {
  require_path(c.out, "--out");
  GeneratorConfig gen;
  if (c.preset == "complementary") {
    gen = complementary_fixture(c.seed, c.num_images);
  } else if (c.preset == "biased") {
    gen = biased_fixture(c.seed, c.num_images);
  } else {
    throw ConfigError("--preset must be complementary or biased");
  }
  const SyntheticDataset data = generate(gen);
  write_dataset(c.out, data, provenance(c, "generate"));
  log << "generated " << c.num_images << " images (seed " << c.seed << "): "
      << data.validation.detections.size() << " validation and " << data.test.detections.size()
      << " test detections in " << c.out.string() << '\n';
}

void cmd_build_trust(const RunConfig& c, std::ostream& log) {
  require_path(c.models_dir, "--models-dir");
  const PipelineOptions options = pipeline_options(c);
  const DataSplit validation = load_split(c.detections_dir, c.annotations);
  const TrustModelSet set = build_trust_models(validation, options);
  const io::Json prov = provenance(c, "build-trust");

  std::size_t informative = 0;
  for (const auto& [label, models] : set.by_class) {
    for (const auto& [id, m] : models) {
      const fs::path file =
          c.models_dir / (kTrustPrefix + file_token(label) + "__" + file_token(id) + ".json");
      io::write_json(file, io::envelope("trust_model", io::to_json(m), &prov));
      if (!m.informative()) continue;
      ++informative;
      log << id << ' ' << label << ": rows=" << m.table().size()
          << " positives=" << m.num_validation_positives()
          << " max_precision=" << io::format_double(m.table().front().precision)
          << " n=" << m.exponent().to_string() << '\n';
    }
  }
  for (const auto& w : set.warnings) log << "warning: skipped " << w << '\n';
  if (informative == 0) throw InsufficientData("no detector produced a usable trust model");
}

void cmd_build_baselines(const RunConfig& c, std::ostream& log) {
  require_path(c.models_dir, "--models-dir");
  const PipelineOptions options = pipeline_options(c);
  const DataSplit validation = load_split(c.detections_dir, c.annotations);
  const BaselineSet set = train_baselines(validation, options);
  const io::Json prov = provenance(c, "build-baselines");
  for (const auto& [label, platt] : set.platt) {
    io::write_json(c.models_dir / (kPlattPrefix + file_token(label) + ".json"),
                   io::envelope("platt_models",
                                io::Json{{"class_label", label}, {"detectors", io::to_json(platt)}},
                                &prov));
    log << "platt " << label << ": " << platt.size() << " detectors\n";
  }
  for (const auto& [label, ws] : set.weighted_sum) {
    io::write_json(c.models_dir / (kWeightedSumPrefix + file_token(label) + ".json"),
                   io::envelope("weighted_sum", io::to_json(ws), &prov));
    log << "ws " << label << ": " << ws.detector_ids.size() << " weights, " << ws.epochs
        << " epochs\n";
  }
  for (const auto& [label, nb] : set.bayes) {
    io::write_json(c.models_dir / (kBayesPrefix + file_token(label) + ".json"),
                   io::envelope("naive_bayes", io::to_json(nb), &prov));
    log << "bayes " << label << ": prior=" << io::format_double(nb.prior_target) << '\n';
  }
  for (const auto& w : set.warnings) log << "warning: " << w << '\n';
}

void cmd_fuse(const RunConfig& c, std::ostream& log) {
  require_path(c.models_dir, "--models-dir");
  require_path(c.out, "--out");
  require_path(c.detections_dir, "--detections-dir");
  const Method method = parse_method(c.method);
  const PipelineOptions options = pipeline_options(c);
  const auto dets = io::read_detections_dir(c.detections_dir);

  TrustModelSet trust;
  BaselineSet baselines;
  const bool belief = method == Method::kDbf || method == Method::kStaticDst;
  if (belief) {
    trust = load_trust_models(c.models_dir);
  } else {
    baselines = load_baselines(c.models_dir, method);
  }
  FusionStats stats;
  const auto fused = fuse_split(dets, method, belief ? &trust : nullptr,
                                belief ? nullptr : &baselines, options, &stats);
  std::vector<io::Json> lines;
  lines.reserve(fused.size());
  for (const auto& f : fused) lines.push_back(io::fused_to_json(f, method_name(method)));
  const io::Json prov = provenance(c, "fuse");
  io::write_jsonl(c.out, lines, &prov);
  log << method_name(method) << ": " << stats.vectors << " detection vectors -> " << fused.size()
      << " fused detections";
  if (stats.conflicts_resolved > 0) {
    log << " (" << stats.conflicts_resolved << " total conflicts smoothed)";
  }
  log << '\n';
}

void cmd_eval(const RunConfig& c, std::ostream& log) {
  require_path(c.annotations, "--annotations");
  require_path(c.out, "--out");
  if (c.inputs.empty()) throw ConfigError("eval needs at least one --input file");
  const EvalOptions options = eval_options(c);
  const auto gts = io::read_annotations(c.annotations);

  std::map<std::string, std::vector<Detection>> methods;
  for (const auto& file : c.inputs) {
    const std::string name = file.stem().string();
    if (methods.contains(name)) throw ConfigError("duplicate method name '" + name + "'");
    methods.emplace(name, io::read_detections(file));
  }
  const auto reports = evaluate_methods(methods, gts, options);
  const io::Json prov = provenance(c, "eval");

  io::Json doc{{"format_version", io::kFormatVersion}, {"kind", "eval_report"}, {"provenance", prov}};
  io::Json arr = io::Json::array();
  for (const auto& [_, r] : reports) arr.push_back(io::to_json(r));
  doc["reports"] = std::move(arr);
  io::write_json(c.out / "report.json", doc);
  write_text(c.out / "report.csv", eval_csv(reports), prov);
  std::ostringstream pr;
  io::write_pr_csv(pr, reports);
  write_text(c.out / "pr_curves.csv", pr.str(), prov);

  for (const auto& [name, r] : reports) {
    log << std::left << std::setw(16) << name << " mAP " << std::fixed << std::setprecision(4)
        << r.mean_ap << '\n';
  }
  log.unsetf(std::ios::floatfield);
}

void cmd_sweep_n(const RunConfig& c, std::ostream& log) {
  require_path(c.out, "--out");
  require_path(c.test_detections_dir, "--test-detections-dir");
  require_path(c.test_annotations, "--test-annotations");
  if (c.n_values.empty()) throw ConfigError("--n-values must not be empty");
  const PipelineOptions options = pipeline_options(c);
  const EvalOptions eval = eval_options(c);
  const DataSplit validation = load_split(c.detections_dir, c.annotations);
  const DataSplit test = load_split(c.test_detections_dir, c.test_annotations);

  const auto rows = sweep(validation, test, c.n_values, options, eval);
  std::ostringstream csv;
  csv << "n,class,ap,map\n";
  for (const auto& r : rows) {
    csv << r.n << ',' << r.class_label << ',' << io::format_double(r.ap) << ','
        << io::format_double(r.mean_ap) << '\n';
    if (r.class_label == "mAP") log << "n=" << r.n << " mAP " << io::format_double(r.mean_ap) << '\n';
  }
  write_text(c.out, csv.str(), provenance(c, "sweep-n"));
}

void cmd_experiment(const RunConfig& c, std::ostream& log) {
  GeneratorConfig gen;
  if (c.preset == "complementary") {
    gen = complementary_fixture(c.seed, c.num_images);
  } else if (c.preset == "biased") {
    gen = biased_fixture(c.seed, c.num_images);
  } else {
    throw ConfigError("--preset must be complementary or biased");
  }
  const PipelineOptions options = pipeline_options(c);
  const EvalOptions eval = eval_options(c);
  const SyntheticDataset data = generate(gen);
  const DataSplit validation{data.validation.annotations, data.validation.detections};
  const DataSplit test{data.test.annotations, data.test.detections};

  std::map<std::string, std::vector<Detection>> methods;
  for (const auto& id : detector_ids(test.detections)) {
    const std::vector<std::string> one{id};
    methods.emplace(id, filter_detectors(test.detections, one));
  }
  const TrustModelSet trust = build_trust_models(validation, options);
  const BaselineSet baselines = train_baselines(validation, options);
  for (Method m : {Method::kDbf, Method::kStaticDst, Method::kPlatt, Method::kWeightedSum,
                   Method::kBayes}) {
    methods.emplace(method_name(m),
                    as_detections(fuse_split(test.detections, m, &trust, &baselines, options),
                                  method_name(m)));
  }
  const auto reports = evaluate_methods(methods, test.annotations, eval);
  log << "preset " << c.preset << ", seed " << c.seed << ", " << c.num_images << " images, n="
      << options.n.to_string() << '\n';
  for (const auto& [name, r] : reports) {
    log << "  " << std::left << std::setw(12) << name << " mAP " << io::format_double(r.mean_ap)
        << '\n';
  }
  log << "n sweep (dbf):\n";
  for (const auto& r : sweep(validation, test, c.n_values, options, eval)) {
    if (r.class_label == "mAP") log << "  n=" << std::setw(5) << r.n << " mAP " << io::format_double(r.mean_ap) << '\n';
  }
  if (!c.out.empty()) write_text(c.out, eval_csv(reports), provenance(c, "experiment"));
}

int run_guarded(const std::function<void()>& command, std::ostream& err) {
  try {
    command();
    return static_cast<int>(ExitCode::kOk);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return static_cast<int>(ExitCode::kConfigError);
  } catch (const ModelMissing& e) {
    err << "missing model: " << e.what() << '\n';
    return static_cast<int>(ExitCode::kModelMissing);
  } catch (const DataError& e) {
    err << "data error: " << e.what() << '\n';
    return static_cast<int>(ExitCode::kDataError);
  } catch (const InsufficientData& e) {
    err << "data error: " << e.what() << '\n';
    return static_cast<int>(ExitCode::kDataError);
  } catch (const std::invalid_argument& e) {
    err << "data error: " << e.what() << '\n';
    return static_cast<int>(ExitCode::kDataError);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace beliefuse::cli
