#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"

#include "beliefuse/baselines.hpp"
#include "beliefuse/eval.hpp"
#include "beliefuse/fusion.hpp"
#include "beliefuse/geometry.hpp"
#include "beliefuse/trust_model.hpp"

namespace beliefuse::io {

using Json = nlohmann::ordered_json;

inline constexpr int kFormatVersion = 1;

// Key of the optional first line of a JSON-lines file carrying the resolved
// run configuration. Readers skip it.
inline constexpr const char* kProvenanceKey = "_provenance";

// Detection lines: {"image_id","detector_id","class","bbox":[x0,y0,x1,y1],"score"}.
Json detection_to_json(const Detection& d);
Detection detection_from_json(const Json& j);

// Annotation lines: {"image_id","class","bbox","difficult"}.
Json annotation_to_json(const GroundTruthObject& g);
GroundTruthObject annotation_from_json(const Json& j);

// Fused lines extend the detection schema with "method" and, for the belief
// methods, the joint masses.
Json fused_to_json(const FusedDetection& f, const std::string& method);

// Parse errors are reported as DataError naming the file and line.
std::vector<Detection> read_detections(const std::filesystem::path& file);
std::vector<GroundTruthObject> read_annotations(const std::filesystem::path& file);
// Concatenates every *.jsonl file of a directory in filename order.
std::vector<Detection> read_detections_dir(const std::filesystem::path& dir);

void write_jsonl(const std::filesystem::path& file, const std::vector<Json>& lines,
                 const Json* provenance = nullptr);
void write_json(const std::filesystem::path& file, const Json& document);
Json read_json(const std::filesystem::path& file);

// Versioned envelope shared by every model file:
// {"format_version", "kind", "provenance", "model"}.
Json envelope(const std::string& kind, Json model, const Json* provenance = nullptr);
// Checks version and kind, returns the "model" member.
const Json& open_envelope(const Json& doc, const std::string& kind);

Json to_json(const TrustModel& m);
TrustModel trust_model_from_json(const Json& j);

Json to_json(const PlattModel& m);
PlattModel platt_model_from_json(const Json& j);
Json to_json(const PlattModelMap& models);
PlattModelMap platt_map_from_json(const Json& j);

Json to_json(const WeightVector& w);
WeightVector weight_vector_from_json(const Json& j);

Json to_json(const ScoreLikelihood& l);
ScoreLikelihood likelihood_from_json(const Json& j);
Json to_json(const NaiveBayesModel& m);
NaiveBayesModel naive_bayes_from_json(const Json& j);

Json to_json(const EvalReport& r);
// CSV: method,class,ap,num_gt,num_detections,tp,fp; one row per class plus
// a "mAP" row per method.
void write_report_csv(std::ostream& os, const std::map<std::string, EvalReport>& reports);
// CSV: method,class,rank,recall,precision.
void write_pr_csv(std::ostream& os, const std::map<std::string, EvalReport>& reports);

// Shortest decimal text that reads back to the same double.
std::string format_double(double v);

}  // namespace beliefuse::io
