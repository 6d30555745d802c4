#include "situate/qagen.hpp"

#include "situate/default_templates.hpp"

#include <algorithm>
#include <fstream>
#include <regex>
#include <set>
#include <sstream>

namespace situate {

using nlohmann::json;

namespace {

struct SlotRule {
  std::string_view key;
  std::vector<std::string_view> slots;  // required and allowed
};

const std::array<SlotRule, 7>& slot_rules() {
  static const std::array<SlotRule, 7> rules{{
      {"color", {"color"}},
      {"shape", {"shape"}},
      {"location", {"zone"}},
      {"object", {}},
      {"composite", {"noun"}},
      {"composite_located", {"noun", "zone"}},
      {"adversarial", {"noun"}},
  }};
  return rules;
}

void check_pattern(const std::string& pattern, const SlotRule& rule) {
  static const std::regex slot_re(R"(\{([a-z_]+)\})");
  std::set<std::string> used;
  for (auto it = std::sregex_iterator(pattern.begin(), pattern.end(), slot_re);
       it != std::sregex_iterator(); ++it) {
    used.insert((*it)[1].str());
  }
  for (const auto& u : used) {
    if (std::find(rule.slots.begin(), rule.slots.end(), u) == rule.slots.end()) {
      throw ConfigError("template '" + pattern + "' (" + std::string(rule.key) +
                        "): slot {" + u + "} cannot be filled");
    }
  }
  for (auto s : rule.slots) {
    if (!used.contains(std::string(s))) {
      throw ConfigError("template '" + pattern + "' (" + std::string(rule.key) +
                        "): missing slot {" + std::string(s) + "}");
    }
  }
}

std::string replace_all(std::string text, std::string_view slot, std::string_view value) {
  std::size_t pos = 0;
  while ((pos = text.find(slot, pos)) != std::string::npos) {
    text.replace(pos, slot.size(), value);
    pos += value.size();
  }
  return text;
}

std::string fill_template(const std::string& pattern, const CountFilter& filter) {
  std::string out = pattern;
  if (filter.color) out = replace_all(out, "{color}", *filter.color);
  if (filter.shape) out = replace_all(out, "{shape}", shape_plural(*filter.shape));
  if (filter.zone) out = replace_all(out, "{zone}", zone_phrase(*filter.zone));
  return replace_all(out, "{noun}", noun_phrase(filter, true));
}

template <typename T>
const T& pick(const std::vector<T>& values, Rng& rng) {
  return values[rng.index(values.size())];
}

// Composite filters: 2 or 3 attributes, present in the scene, and strictly
// more selective than each single attribute they combine.
std::vector<CountFilter> composite_candidates(const SceneMetadata& m) {
  std::vector<CountFilter> out;
  auto consider = [&](const CountFilter& f) {
    const int n = m.count(f);
    if (n == 0) return;
    int marginal_min = std::numeric_limits<int>::max();
    if (f.shape) marginal_min = std::min(marginal_min, m.per_shape[static_cast<std::size_t>(*f.shape)]);
    if (f.zone) marginal_min = std::min(marginal_min, m.per_zone[static_cast<std::size_t>(*f.zone)]);
    if (f.color) marginal_min = std::min(marginal_min, m.per_color.at(*f.color));
    if (n >= marginal_min) return;
    if (std::find(out.begin(), out.end(), f) == out.end()) out.push_back(f);
  };
  for (const auto& [key, c] : m.composite) {
    if (c == 0) continue;
    const auto& [s, col, z] = key;
    consider({s, col, std::nullopt});
    consider({s, std::nullopt, z});
    consider({std::nullopt, col, z});
    consider({s, col, z});
  }
  return out;
}

QAItem make_item(QuestionType type, const CountFilter& filter, const SceneMetadata& m,
                 const SceneGraph& scene, const std::string& image_ref, int view,
                 const QuestionTemplates& templates, Rng& rng) {
  const auto& patterns = templates.patterns(type, filter.zone.has_value());
  QAItem item;
  item.template_index = static_cast<int>(rng.index(patterns.size()));
  item.question = fill_template(patterns[static_cast<std::size_t>(item.template_index)], filter);
  item.question_type = type;
  item.filter = filter;
  item.scene_id = scene.scene_id;
  item.image_ref = image_ref;
  item.item_id = scene.scene_id + "/view" + std::to_string(view) + "/" +
                 std::string(question_type_name(type));
  item.numeric_gt = m.count(filter);
  item.short_gt = render_ground_truth(filter, m, AnswerStyle::Short);
  item.verbose_gt = render_ground_truth(filter, m, AnswerStyle::Verbose);
  return item;
}

json optional_json(const std::optional<std::string>& v) { return v ? json(*v) : json(nullptr); }

}  // namespace

std::string_view question_type_name(QuestionType type) {
  switch (type) {
    case QuestionType::Color: return "color";
    case QuestionType::Shape: return "shape";
    case QuestionType::Location: return "location";
    case QuestionType::Object: return "object";
    case QuestionType::Composite: return "composite";
    case QuestionType::Adversarial: return "adversarial";
  }
  return "unknown";
}

std::optional<QuestionType> parse_question_type(std::string_view name) {
  for (auto t : kAllQuestionTypes) {
    if (question_type_name(t) == name) return t;
  }
  return std::nullopt;
}

const std::vector<std::string>& QuestionTemplates::patterns(QuestionType type, bool located) const {
  if (type == QuestionType::Composite && located) return composite_located;
  return by_type[static_cast<std::size_t>(type)];
}

QuestionTemplates parse_templates(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text.begin(), json_text.end());
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("template file: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("template file: expected an object");

  QuestionTemplates t;
  for (const auto& [key, _] : doc.items()) {
    const auto& rules = slot_rules();
    if (std::none_of(rules.begin(), rules.end(), [&](const SlotRule& r) { return r.key == key; })) {
      throw ConfigError("template file: unknown key '" + key + "'");
    }
  }
  for (const auto& rule : slot_rules()) {
    const std::string key(rule.key);
    if (!doc.contains(key) || !doc[key].is_array() || doc[key].empty()) {
      throw ConfigError("template file: '" + key + "' needs a non-empty list of patterns");
    }
    std::vector<std::string> list;
    for (const auto& p : doc[key]) {
      if (!p.is_string()) throw ConfigError("template file: '" + key + "' entries must be strings");
      check_pattern(p.get<std::string>(), rule);
      list.push_back(p.get<std::string>());
    }
    if (key == "composite_located") {
      t.composite_located = std::move(list);
    } else {
      t.by_type[static_cast<std::size_t>(*parse_question_type(key))] = std::move(list);
    }
  }
  return t;
}

QuestionTemplates load_templates(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open template file: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_templates(buf.str());
}

const QuestionTemplates& default_templates() {
  static const QuestionTemplates t = parse_templates(detail::kDefaultTemplates);
  return t;
}

std::string noun_phrase(const CountFilter& filter, bool plural) {
  std::string noun = filter.shape ? std::string(plural ? shape_plural(*filter.shape)
                                                       : shape_name(*filter.shape))
                                  : std::string(plural ? "objects" : "object");
  return filter.color ? *filter.color + " " + noun : noun;
}

std::string_view zone_phrase(Zone zone) {
  switch (zone) {
    case Zone::OnTable: return "on the table";
    case Zone::UnderTable: return "under the table";
    case Zone::LeftOfTable: return "to the left of the table";
    case Zone::RightOfTable: return "to the right of the table";
    case Zone::FrontOfTable: return "in front of the table";
  }
  return "";
}

std::string_view zone_sentence_prefix(Zone zone) {
  switch (zone) {
    case Zone::OnTable: return "On top of the table";
    case Zone::UnderTable: return "On the ground under the table";
    case Zone::LeftOfTable: return "On the ground to the left of the table";
    case Zone::RightOfTable: return "On the ground to the right of the table";
    case Zone::FrontOfTable: return "On the ground in front of the table";
  }
  return "";
}

std::string render_ground_truth(const CountFilter& filter, const SceneMetadata& metadata,
                                AnswerStyle style) {
  const int total = metadata.count(filter);
  const std::string count = std::to_string(total);
  switch (style) {
    case AnswerStyle::Numeric:
      return count;
    case AnswerStyle::Short: {
      const std::string place =
          filter.zone ? std::string(zone_phrase(*filter.zone)) : std::string("in the image");
      if (total == 1) return "There is 1 " + noun_phrase(filter, false) + " " + place + ".";
      return "There are " + count + " " + noun_phrase(filter, true) + " " + place + ".";
    }
    case AnswerStyle::Verbose: {
      std::string out = "Let's analyze the scene!";
      const auto breakdown = metadata.zone_breakdown(filter);
      for (Zone z : kAllZones) {
        const int n = breakdown[static_cast<std::size_t>(z)];
        if (n == 0) continue;
        out += " ";
        out += zone_sentence_prefix(z);
        out += ", I can see " + std::to_string(n) + " " + noun_phrase(filter, n != 1) + ".";
      }
      if (total == 1) {
        out += " In total there is 1 " + noun_phrase(filter, false) + " in the image!";
      } else {
        out += " In total there are " + count + " " + noun_phrase(filter, true) + " in the image!";
      }
      return out;
    }
  }
  return count;
}

std::optional<CountFilter> make_adversarial(const SceneMetadata& m,
                                            std::span<const NamedColor> palette, Rng& rng) {
  std::vector<Shape> shapes;
  for (Shape s : kAllShapes) {
    if (m.per_shape[static_cast<std::size_t>(s)] > 0) shapes.push_back(s);
  }
  std::vector<std::string> colors;
  for (const auto& [c, n] : m.per_color) {
    if (n > 0) colors.push_back(c);
  }
  if (shapes.empty()) return std::nullopt;

  auto present = [&](Shape s, const std::string& c) {
    return m.count(CountFilter{s, c, std::nullopt}) > 0;
  };

  std::vector<CountFilter> cross;
  for (Shape s : shapes) {
    for (const auto& c : colors) {
      if (!present(s, c)) cross.push_back({s, c, std::nullopt});
    }
  }
  if (!cross.empty()) return pick(cross, rng);

  std::vector<CountFilter> fallback;
  for (Shape s : shapes) {
    for (const auto& pc : palette) {
      if (std::find(colors.begin(), colors.end(), pc.name) == colors.end()) {
        fallback.push_back({s, pc.name, std::nullopt});
      }
    }
  }
  for (const auto& c : colors) {
    for (Shape s : kAllShapes) {
      if (std::find(shapes.begin(), shapes.end(), s) == shapes.end()) {
        fallback.push_back({s, c, std::nullopt});
      }
    }
  }
  if (fallback.empty()) return std::nullopt;
  return pick(fallback, rng);
}

QuestionBatch generate_questions(const SceneMetadata& metadata, const SceneGraph& scene,
                                 const std::string& image_ref, int view, Rng& rng,
                                 const QuestionTemplates& templates) {
  QuestionBatch batch;
  auto skip = [&](QuestionType t, std::string_view reason) {
    batch.skipped.push_back(scene.scene_id + " view" + std::to_string(view) + " " +
                            std::string(question_type_name(t)) + ": " + std::string(reason));
  };
  auto emit = [&](QuestionType t, const CountFilter& f) {
    batch.items.push_back(make_item(t, f, metadata, scene, image_ref, view, templates, rng));
  };

  for (QuestionType type : kAllQuestionTypes) {
    switch (type) {
      case QuestionType::Color: {
        std::vector<CountFilter> c;
        for (const auto& [name, n] : metadata.per_color) {
          if (n > 0) c.push_back({std::nullopt, name, std::nullopt});
        }
        if (c.empty()) skip(type, "no colors present"); else emit(type, pick(c, rng));
        break;
      }
      case QuestionType::Shape: {
        std::vector<CountFilter> c;
        for (Shape s : kAllShapes) {
          if (metadata.per_shape[static_cast<std::size_t>(s)] > 0) c.push_back({s, std::nullopt, std::nullopt});
        }
        if (c.empty()) skip(type, "no shapes present"); else emit(type, pick(c, rng));
        break;
      }
      case QuestionType::Location: {
        std::vector<CountFilter> c;
        for (Zone z : kAllZones) {
          if (metadata.per_zone[static_cast<std::size_t>(z)] > 0) c.push_back({std::nullopt, std::nullopt, z});
        }
        if (c.empty()) skip(type, "no occupied zones"); else emit(type, pick(c, rng));
        break;
      }
      case QuestionType::Object:
        emit(type, CountFilter{});
        break;
      case QuestionType::Composite: {
        const auto c = composite_candidates(metadata);
        if (c.empty()) skip(type, "no composite filter narrower than its parts"); else emit(type, pick(c, rng));
        break;
      }
      case QuestionType::Adversarial: {
        const auto f = make_adversarial(metadata, scene.materials.colors, rng);
        if (!f) skip(type, "no near-miss combination"); else emit(type, *f);
        break;
      }
    }
  }
  return batch;
}

json qa_item_to_json(const QAItem& item) {
  json filter = {{"shape", item.filter.shape ? json(shape_name(*item.filter.shape)) : json(nullptr)},
                 {"color", optional_json(item.filter.color)},
                 {"zone", item.filter.zone ? json(zone_name(*item.filter.zone)) : json(nullptr)}};
  return {{"item_id", item.item_id},
          {"scene_id", item.scene_id},
          {"image_ref", item.image_ref},
          {"question_type", question_type_name(item.question_type)},
          {"template_index", item.template_index},
          {"question", item.question},
          {"numeric_gt", item.numeric_gt},
          {"short_gt", item.short_gt},
          {"verbose_gt", item.verbose_gt},
          {"filter", filter}};
}

QAItem qa_item_from_json(const json& j) {
  if (!j.is_object()) throw SchemaError("item: expected an object");
  auto require = [&](const char* key) -> const json& {
    if (!j.contains(key)) throw SchemaError(std::string("missing field '") + key + "'");
    return j.at(key);
  };
  auto str = [&](const char* key) {
    const json& v = require(key);
    if (!v.is_string()) throw SchemaError(std::string("field '") + key + "' must be a string");
    return v.get<std::string>();
  };
  auto integer = [&](const char* key) {
    const json& v = require(key);
    if (!v.is_number_integer()) throw SchemaError(std::string("field '") + key + "' must be an integer");
    return v.get<int>();
  };

  QAItem item;
  item.item_id = str("item_id");
  item.scene_id = str("scene_id");
  item.image_ref = str("image_ref");
  const auto type = parse_question_type(str("question_type"));
  if (!type) throw SchemaError("field 'question_type' has an unknown value");
  item.question_type = *type;
  item.template_index = integer("template_index");
  item.question = str("question");
  item.numeric_gt = integer("numeric_gt");
  if (item.numeric_gt < 0) throw SchemaError("field 'numeric_gt' must be non-negative");
  item.short_gt = str("short_gt");
  item.verbose_gt = str("verbose_gt");

  const json& f = require("filter");
  if (!f.is_object()) throw SchemaError("field 'filter' must be an object");
  if (f.contains("shape") && !f["shape"].is_null()) {
    const auto s = f["shape"].is_string() ? parse_shape(f["shape"].get<std::string>()) : std::nullopt;
    if (!s) throw SchemaError("filter.shape has an unknown value");
    item.filter.shape = s;
  }
  if (f.contains("color") && !f["color"].is_null()) {
    if (!f["color"].is_string()) throw SchemaError("filter.color must be a string");
    item.filter.color = f["color"].get<std::string>();
  }
  if (f.contains("zone") && !f["zone"].is_null()) {
    const auto z = f["zone"].is_string() ? parse_zone(f["zone"].get<std::string>()) : std::nullopt;
    if (!z) throw SchemaError("filter.zone has an unknown value");
    item.filter.zone = z;
  }
  return item;
}

}  // namespace situate
