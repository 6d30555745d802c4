#pragma once

#include "situate/dataset.hpp"

#include <json.hpp>

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace situate {

// Precedence: the last "In total there are/is N", else the last standalone
// integer, else the last number word zero..twenty. Unparseable -> nullopt.
std::optional<int> extract_count(std::string_view raw_answer);

struct PredictionRecord {
  std::string item_id;
  std::string raw_answer;
  std::optional<int> extracted;
};

PredictionRecord make_prediction(std::string item_id, std::string raw_answer);

// Line-delimited JSON {item_id, raw_answer}. Throws IoError or SchemaError
// (with line number).
std::vector<PredictionRecord> read_predictions(const std::filesystem::path& path);

// A ground truth paired with the (possibly missing) extracted prediction.
struct ScoredPair {
  int gt = 0;
  std::optional<int> pred;
};

// Throws SchemaError if a prediction names an item missing from the manifest.
std::vector<ScoredPair> pair_predictions(std::span<const PredictionRecord> preds,
                                         const DatasetManifest& manifest);

// Unparsed predictions count as wrong.
double accuracy(std::span<const ScoredPair> pairs);

struct ErrorMetric {
  std::optional<double> value;  // nullopt when no item qualifies
  std::size_t used = 0;
  std::size_t excluded_unparsed = 0;
  std::size_t excluded_zero_gt = 0;  // relative error only
};

// Over parsed items only.
ErrorMetric rmse(std::span<const ScoredPair> pairs);
// Mean |pred - gt| / gt over parsed items with gt > 0.
ErrorMetric relative_error(std::span<const ScoredPair> pairs);

// Rows: gt 0..max_class, then one row for gt > max_class. Columns: predicted
// 0..max_class, then one column for "other / unparsed".
struct ConfusionMatrix {
  int max_class = 15;
  std::vector<std::vector<std::size_t>> cells;

  std::size_t total() const;
  std::size_t row_sum(std::size_t row) const;
};

ConfusionMatrix confusion_matrix(std::span<const ScoredPair> pairs, int max_class);
std::string format_confusion(const ConfusionMatrix& m);
nlohmann::json confusion_to_json(const ConfusionMatrix& m);

struct EvalReport {
  std::size_t n = 0;
  double accuracy = 0.0;
  ErrorMetric rmse;
  ErrorMetric relative_error;
  std::map<int, double> per_class_accuracy;
  std::map<int, std::size_t> per_class_count;
  ConfusionMatrix confusion;
  std::size_t unparsed_count = 0;
};

EvalReport evaluate(std::span<const ScoredPair> pairs, int max_class = 15);
nlohmann::json report_to_json(const EvalReport& report);
std::string format_report(const EvalReport& report);

}  // namespace situate
