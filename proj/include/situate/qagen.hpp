#pragma once

#include "situate/random.hpp"
#include "situate/scene.hpp"

#include <json.hpp>

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace situate {

enum class QuestionType : std::uint8_t { Color, Shape, Location, Object, Composite, Adversarial };
inline constexpr std::array<QuestionType, 6> kAllQuestionTypes{
    QuestionType::Color,  QuestionType::Shape,     QuestionType::Location,
    QuestionType::Object, QuestionType::Composite, QuestionType::Adversarial};

std::string_view question_type_name(QuestionType type);
std::optional<QuestionType> parse_question_type(std::string_view name);

enum class AnswerStyle : std::uint8_t { Numeric, Short, Verbose };

struct QAItem {
  std::string item_id;
  std::string scene_id;
  std::string image_ref;
  QuestionType question_type{};
  int template_index = 0;
  std::string question;
  int numeric_gt = 0;
  std::string short_gt;
  std::string verbose_gt;
  CountFilter filter;

  friend bool operator==(const QAItem&, const QAItem&) = default;
};

nlohmann::json qa_item_to_json(const QAItem& item);
// Throws SchemaError naming the missing or malformed field.
QAItem qa_item_from_json(const nlohmann::json& j);

// Question phrasings per type. Slots: {color}, {shape} (plural), {zone}
// and {noun} (plural noun phrase such as "red cones"). Composite filters
// with a zone use the `composite_located` list.
struct QuestionTemplates {
  std::array<std::vector<std::string>, 6> by_type;
  std::vector<std::string> composite_located;

  const std::vector<std::string>& patterns(QuestionType type, bool located) const;
};

// Throws ConfigError if a list is empty or a pattern uses a slot its type
// cannot fill.
QuestionTemplates parse_templates(std::string_view json_text);
QuestionTemplates load_templates(const std::filesystem::path& path);
const QuestionTemplates& default_templates();

// "red cones", "cones", "red objects", "objects" (or singular forms).
std::string noun_phrase(const CountFilter& filter, bool plural);
// "on the table", "under the table", ...
std::string_view zone_phrase(Zone zone);
// "On top of the table", "On the ground to the right of the table", ...
std::string_view zone_sentence_prefix(Zone zone);

std::string render_ground_truth(const CountFilter& filter, const SceneMetadata& metadata,
                                AnswerStyle style);

// Near-miss (shape, color) pair absent from the scene: the shape appears in
// another color and the color on another shape. Falls back to a present
// shape in an absent palette color, or a present color on an absent shape.
std::optional<CountFilter> make_adversarial(const SceneMetadata& metadata,
                                            std::span<const NamedColor> palette, Rng& rng);

struct QuestionBatch {
  std::vector<QAItem> items;
  std::vector<std::string> skipped;  // one line per skipped type
};

// One item per applicable question type. `view` is used in item ids.
QuestionBatch generate_questions(const SceneMetadata& metadata, const SceneGraph& scene,
                                 const std::string& image_ref, int view, Rng& rng,
                                 const QuestionTemplates& templates = default_templates());

}  // namespace situate
