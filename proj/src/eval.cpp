#include "situate/eval.hpp"

#include <array>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <regex>
#include <sstream>
#include <unordered_map>

namespace situate {

using nlohmann::json;

namespace {

template <typename Fn>
void for_each_match(const std::string& text, const std::regex& re, Fn&& fn) {
  for (auto it = std::sregex_iterator(text.begin(), text.end(), re); it != std::sregex_iterator();
       ++it) {
    fn(*it);
  }
}

std::optional<int> to_int(const std::string& digits) {
  try {
    const long long v = std::stoll(digits);
    if (v > std::numeric_limits<int>::max()) return std::nullopt;
    return static_cast<int>(v);
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

}  // namespace

std::optional<int> extract_count(std::string_view raw_answer) {
  static const std::regex total_re(R"(in total there (?:are|is) (\d+))", std::regex::icase);
  static const std::regex int_re(R"(\b(\d+)\b)");
  static const std::regex word_re(
      R"(\b(zero|one|two|three|four|five|six|seven|eight|nine|ten|eleven|twelve|thirteen|fourteen|fifteen|sixteen|seventeen|eighteen|nineteen|twenty)\b)",
      std::regex::icase);
  static const std::array<std::string_view, 21> words{
      "zero",    "one",     "two",       "three",    "four",     "five",    "six",
      "seven",   "eight",   "nine",      "ten",      "eleven",   "twelve",  "thirteen",
      "fourteen", "fifteen", "sixteen",  "seventeen", "eighteen", "nineteen", "twenty"};

  const std::string text(raw_answer);
  std::optional<int> found;

  for_each_match(text, total_re, [&](const std::smatch& m) { found = to_int(m[1].str()); });
  if (found) return found;

  for_each_match(text, int_re, [&](const std::smatch& m) { found = to_int(m[1].str()); });
  if (found) return found;

  for_each_match(text, word_re, [&](const std::smatch& m) {
    std::string w = m[1].str();
    for (auto& ch : w) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    for (std::size_t i = 0; i < words.size(); ++i) {
      if (words[i] == w) found = static_cast<int>(i);
    }
  });
  return found;
}

PredictionRecord make_prediction(std::string item_id, std::string raw_answer) {
  PredictionRecord p{std::move(item_id), std::move(raw_answer), std::nullopt};
  p.extracted = extract_count(p.raw_answer);
  return p;
}

std::vector<PredictionRecord> read_predictions(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open predictions: " + path.string());
  std::vector<PredictionRecord> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = path.string() + ":" + std::to_string(lineno);
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw SchemaError(where + ": invalid JSON: " + e.what());
    }
    if (!j.is_object() || !j.contains("item_id") || !j["item_id"].is_string()) {
      throw SchemaError(where + ": missing string field 'item_id'");
    }
    if (!j.contains("raw_answer")) throw SchemaError(where + ": missing field 'raw_answer'");
    std::string raw;
    if (j["raw_answer"].is_string()) {
      raw = j["raw_answer"].get<std::string>();
    } else if (j["raw_answer"].is_number_integer()) {
      raw = std::to_string(j["raw_answer"].get<long long>());
    } else if (j["raw_answer"].is_null()) {
      raw = "";
    } else {
      throw SchemaError(where + ": 'raw_answer' must be a string");
    }
    out.push_back(make_prediction(j["item_id"].get<std::string>(), std::move(raw)));
  }
  return out;
}

std::vector<ScoredPair> pair_predictions(std::span<const PredictionRecord> preds,
                                         const DatasetManifest& manifest) {
  std::unordered_map<std::string, int> gt;
  for (const auto& item : manifest.items) gt.emplace(item.item_id, item.numeric_gt);
  std::vector<ScoredPair> out;
  out.reserve(preds.size());
  for (const auto& p : preds) {
    const auto it = gt.find(p.item_id);
    if (it == gt.end()) {
      throw SchemaError("prediction for unknown item_id '" + p.item_id + "'");
    }
    out.push_back({it->second, p.extracted});
  }
  return out;
}

double accuracy(std::span<const ScoredPair> pairs) {
  if (pairs.empty()) return 0.0;
  std::size_t correct = 0;
  for (const auto& p : pairs) correct += p.pred && *p.pred == p.gt;
  return static_cast<double>(correct) / static_cast<double>(pairs.size());
}

ErrorMetric rmse(std::span<const ScoredPair> pairs) {
  ErrorMetric m;
  double sum = 0.0;
  for (const auto& p : pairs) {
    if (!p.pred) {
      ++m.excluded_unparsed;
      continue;
    }
    const double d = static_cast<double>(*p.pred) - p.gt;
    sum += d * d;
    ++m.used;
  }
  if (m.used > 0) m.value = std::sqrt(sum / static_cast<double>(m.used));
  return m;
}

ErrorMetric relative_error(std::span<const ScoredPair> pairs) {
  ErrorMetric m;
  double sum = 0.0;
  for (const auto& p : pairs) {
    if (p.gt == 0) {
      ++m.excluded_zero_gt;
      continue;
    }
    if (!p.pred) {
      ++m.excluded_unparsed;
      continue;
    }
    sum += std::abs(static_cast<double>(*p.pred) - p.gt) / p.gt;
    ++m.used;
  }
  if (m.used > 0) m.value = sum / static_cast<double>(m.used);
  return m;
}

std::size_t ConfusionMatrix::total() const {
  std::size_t t = 0;
  for (std::size_t r = 0; r < cells.size(); ++r) t += row_sum(r);
  return t;
}

std::size_t ConfusionMatrix::row_sum(std::size_t row) const {
  std::size_t t = 0;
  for (auto v : cells[row]) t += v;
  return t;
}

ConfusionMatrix confusion_matrix(std::span<const ScoredPair> pairs, int max_class) {
  ConfusionMatrix m;
  m.max_class = max_class;
  const auto dim = static_cast<std::size_t>(max_class) + 2;
  m.cells.assign(dim, std::vector<std::size_t>(dim, 0));
  for (const auto& p : pairs) {
    const std::size_t row = p.gt >= 0 && p.gt <= max_class ? static_cast<std::size_t>(p.gt) : dim - 1;
    const std::size_t col =
        p.pred && *p.pred >= 0 && *p.pred <= max_class ? static_cast<std::size_t>(*p.pred) : dim - 1;
    ++m.cells[row][col];
  }
  return m;
}

std::string format_confusion(const ConfusionMatrix& m) {
  std::ostringstream out;
  const std::size_t dim = m.cells.size();
  out << std::setw(7) << "gt\\pred";
  for (std::size_t c = 0; c < dim; ++c) {
    out << std::setw(6) << (c + 1 == dim ? std::string("other") : std::to_string(c));
  }
  out << '\n';
  for (std::size_t r = 0; r < dim; ++r) {
    out << std::setw(7) << (r + 1 == dim ? ">" + std::to_string(m.max_class) : std::to_string(r));
    for (std::size_t c = 0; c < dim; ++c) out << std::setw(6) << m.cells[r][c];
    out << '\n';
  }
  return out.str();
}

json confusion_to_json(const ConfusionMatrix& m) {
  return {{"max_class", m.max_class},
          {"rows", "gt 0..max_class, then gt > max_class"},
          {"columns", "pred 0..max_class, then other/unparsed"},
          {"cells", m.cells}};
}

EvalReport evaluate(std::span<const ScoredPair> pairs, int max_class) {
  EvalReport r;
  r.n = pairs.size();
  r.accuracy = accuracy(pairs);
  r.rmse = rmse(pairs);
  r.relative_error = relative_error(pairs);
  r.confusion = confusion_matrix(pairs, max_class);
  std::map<int, std::size_t> correct;
  for (const auto& p : pairs) {
    ++r.per_class_count[p.gt];
    correct[p.gt] += p.pred && *p.pred == p.gt;
    r.unparsed_count += !p.pred;
  }
  for (const auto& [c, n] : r.per_class_count) {
    r.per_class_accuracy[c] = static_cast<double>(correct[c]) / static_cast<double>(n);
  }
  return r;
}

namespace {

json metric_json(const ErrorMetric& m) {
  return {{"value", m.value ? json(*m.value) : json(nullptr)},
          {"used", m.used},
          {"excluded_unparsed", m.excluded_unparsed},
          {"excluded_zero_gt", m.excluded_zero_gt}};
}

std::string metric_text(const ErrorMetric& m) {
  if (!m.value) return "undefined";
  std::ostringstream s;
  s << std::fixed << std::setprecision(4) << *m.value;
  return s.str();
}

}  // namespace

json report_to_json(const EvalReport& r) {
  json per_class = json::object();
  for (const auto& [c, acc] : r.per_class_accuracy) {
    per_class[std::to_string(c)] = {{"accuracy", acc}, {"count", r.per_class_count.at(c)}};
  }
  return {{"n", r.n},
          {"accuracy", r.accuracy},
          {"rmse", metric_json(r.rmse)},
          {"relative_error", metric_json(r.relative_error)},
          {"unparsed_count", r.unparsed_count},
          {"per_class", per_class},
          {"confusion", confusion_to_json(r.confusion)}};
}

std::string format_report(const EvalReport& r) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(4);
  out << "items:           " << r.n << '\n';
  out << "accuracy:        " << r.accuracy << '\n';
  out << "rmse:            " << metric_text(r.rmse) << "  (unparsed excluded: "
      << r.rmse.excluded_unparsed << ")\n";
  out << "relative error:  " << metric_text(r.relative_error) << "  (gt=0 excluded: "
      << r.relative_error.excluded_zero_gt << ", unparsed excluded: "
      << r.relative_error.excluded_unparsed << ")\n";
  out << "unparsed:        " << r.unparsed_count << "\n\n";
  out << "per-class accuracy\n";
  for (const auto& [c, acc] : r.per_class_accuracy) {
    out << std::setw(6) << c << std::setw(10) << acc << std::setw(8) << r.per_class_count.at(c) << '\n';
  }
  out << "\nconfusion matrix\n" << format_confusion(r.confusion);
  return out.str();
}

}  // namespace situate
