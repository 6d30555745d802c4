#include <doctest.h>

#include "situate/dataset.hpp"

#include <filesystem>
#include <fstream>
#include <map>
#include <set>

using namespace situate;
namespace fs = std::filesystem;

namespace {

QAItem item(const std::string& scene, int view, QuestionType type, int gt, const std::string& question = "") {
  QAItem q;
  q.scene_id = scene;
  q.image_ref = "scenes/" + scene + "/view" + std::to_string(view) + ".png";
  q.question_type = type;
  q.item_id = scene + "/view" + std::to_string(view) + "/" + std::string(question_type_name(type));
  q.question = question.empty() ? q.item_id + "?" : question;
  q.numeric_gt = gt;
  q.short_gt = "There are " + std::to_string(gt) + " objects in the image.";
  q.verbose_gt = "Let's analyze the scene! In total there are " + std::to_string(gt) + " objects in the image!";
  return q;
}

// One scene per item, `supply[c]` items of class c.
DatasetManifest pool_with(const std::vector<std::size_t>& supply) {
  DatasetManifest m;
  m.split = "all";
  int n = 0;
  for (std::size_t c = 0; c < supply.size(); ++c) {
    for (std::size_t i = 0; i < supply[c]; ++i) {
      m.items.push_back(item("s" + std::to_string(n++), 0, QuestionType::Object, static_cast<int>(c)));
    }
  }
  return m;
}

std::map<int, std::size_t> histogram(const DatasetManifest& m) {
  std::map<int, std::size_t> h;
  for (const auto& q : m.items) ++h[q.numeric_gt];
  return h;
}

fs::path temp_dir(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("situate_dataset_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST_CASE("assemble trims one image to its budget keeping type diversity") {
  std::vector<QAItem> items;
  for (auto t : kAllQuestionTypes) items.push_back(item("a", 0, t, t == QuestionType::Adversarial ? 0 : 2));
  for (std::uint64_t s = 0; s < 200; ++s) {
    Rng rng(s);
    const auto m = assemble(items, 4, rng);
    REQUIRE(m.items.size() == 4);
    std::set<QuestionType> types;
    for (const auto& q : m.items) types.insert(q.question_type);
    CHECK(types.size() >= 3);
  }
}

TEST_CASE("assemble keeps adversarial items at about the configured rate") {
  std::vector<QAItem> items;
  for (int img = 0; img < 2000; ++img) {
    for (auto t : kAllQuestionTypes) items.push_back(item("s" + std::to_string(img), 0, t, 1));
  }
  Rng rng(11);
  const auto m = assemble(items, 4, rng, 0.5);
  CHECK(m.items.size() == 8000);
  std::size_t adversarial = 0;
  for (const auto& q : m.items) adversarial += q.question_type == QuestionType::Adversarial;
  CHECK(adversarial > 900);
  CHECK(adversarial < 1100);

  Rng never(1);
  for (const auto& q : assemble(items, 4, never, 0.0).items) CHECK(q.question_type != QuestionType::Adversarial);
}

TEST_CASE("assemble drops duplicate questions and handles empty input") {
  Rng rng(1);
  CHECK(assemble({}, 4, rng).items.empty());
  std::vector<QAItem> items{item("a", 0, QuestionType::Color, 1, "How many red?"),
                            item("a", 0, QuestionType::Shape, 1, "How many red?"),
                            item("a", 1, QuestionType::Shape, 1, "How many red?")};
  const auto m = assemble(items, 4, rng);
  REQUIRE(m.items.size() == 2);
  CHECK(m.items[0].question_type == QuestionType::Color);
  CHECK(m.items[1].image_ref == "scenes/a/view1.png");
}

TEST_CASE("assemble bound over many images") {
  std::vector<QAItem> items;
  for (int img = 0; img < 6875; ++img) {
    for (auto t : kAllQuestionTypes) items.push_back(item("s" + std::to_string(img / 5), img % 5, t, 1));
  }
  Rng rng(3);
  const auto m = assemble(items, 4, rng);
  CHECK(m.items.size() <= 27500);
  std::map<std::string, int> per_image;
  for (const auto& q : m.items) ++per_image[q.image_ref];
  for (const auto& [k, v] : per_image) CHECK(v <= 4);
}

TEST_CASE("balance against the training profile") {
  const auto profile = training_profile();
  REQUIRE(profile.targets.size() == 16);
  CHECK(profile.targets[5] == 3100);
  CHECK(profile.targets[6] == 2277);
  CHECK(profile.targets[15] == 445);

  std::vector<std::size_t> supply(17, 50);
  supply[5] = 5000;
  supply[6] = 3000;
  supply[15] = 200;
  supply[16] = 30;
  const auto pool = pool_with(supply);
  Rng rng(7);
  const auto r = balance(pool, profile, rng);
  const auto h = histogram(r.manifest);
  CHECK(h.at(5) == 3100);
  CHECK(h.at(6) == 2277);
  CHECK(h.at(15) == 200);
  CHECK(r.shortfall.at(15) == 245);
  CHECK(r.shortfall.count(5) == 0);
  CHECK(r.dropped_outside_profile == 30);
  CHECK(h.count(16) == 0);
  for (std::size_t c = 0; c < 16; ++c) {
    CHECK(h.at(static_cast<int>(c)) == std::min(supply[c], profile.targets[c]));
  }

  // Subsampling only: every retained item is in the input, once.
  std::set<std::string> input_ids, output_ids;
  for (const auto& q : pool.items) input_ids.insert(q.item_id);
  for (const auto& q : r.manifest.items) {
    CHECK(input_ids.count(q.item_id) == 1);
    CHECK(output_ids.insert(q.item_id).second);
  }
}

TEST_CASE("balancing is deterministic given the seed") {
  const auto pool = pool_with(std::vector<std::size_t>(16, 600));
  Rng a(5), b(5);
  CHECK(balance(pool, training_profile(), a).manifest == balance(pool, training_profile(), b).manifest);
}

TEST_CASE("test split of 31 per class") {
  // Scenes with several items each, so that scene grouping matters.
  DatasetManifest pool;
  pool.split = "all";
  for (int s = 0; s < 400; ++s) {
    for (int v = 0; v < 3; ++v) {
      const int gt = (s + v * 5) % 16;
      pool.items.push_back(item("s" + std::to_string(s), v, QuestionType::Object, gt));
    }
  }
  Rng rng(9);
  const auto r = build_test_split(pool, 15, 31, rng);
  CHECK(r.test.items.size() == 496);
  CHECK(r.test.split == "test");
  CHECK(r.train.split == "train");
  const auto h = histogram(r.test);
  for (int c = 0; c <= 15; ++c) CHECK(h.at(c) == 31);

  std::set<std::string> test_scenes;
  for (const auto& q : r.test.items) test_scenes.insert(q.scene_id);
  for (const auto& q : r.train.items) CHECK(test_scenes.count(q.scene_id) == 0);
  CHECK_FALSE(r.train.items.empty());
}

TEST_CASE("test split edge cases") {
  const auto pool = pool_with(std::vector<std::size_t>(16, 40));
  Rng rng(1);
  const auto empty = build_test_split(pool, 15, 0, rng);
  CHECK(empty.test.items.empty());
  CHECK(empty.train.items.size() == pool.items.size());

  std::vector<std::size_t> supply(16, 40);
  supply[15] = 10;
  try {
    build_test_split(pool_with(supply), 15, 31, rng);
    FAIL("expected SplitError");
  } catch (const SplitError& e) {
    CHECK(std::string(e.what()).find("15") != std::string::npos);
  }
}

TEST_CASE("manifest round trip") {
  const auto dir = temp_dir("roundtrip");
  DatasetManifest m;
  m.split = "train";
  m.provenance.config_hash = "0123456789abcdef";
  m.provenance.seed = 42;
  m.provenance.parameters["budget"] = "4";
  m.items = {item("a", 0, QuestionType::Color, 3), item("b", 2, QuestionType::Composite, 1)};
  m.items[0].filter.color = "red";
  m.items[1].filter = {Shape::Cone, std::string("blue"), Zone::UnderTable};
  m.items[1].question = "How many \"blue\" cones are under the table?\n";
  const auto path = dir / "train.jsonl";
  write_manifest(m, path);
  CHECK(read_manifest(path) == m);
  CHECK(fs::exists(manifest_meta_path(path)));

  std::ifstream in(path);
  std::string line;
  int lines = 0;
  while (std::getline(in, line)) ++lines;
  CHECK(lines == 2);

  // Without the sidecar the items still load.
  fs::remove(manifest_meta_path(path));
  CHECK(read_manifest(path).items == m.items);
}

TEST_CASE("manifest schema errors carry the line number") {
  const auto dir = temp_dir("schema");
  auto j = qa_item_to_json(item("a", 0, QuestionType::Object, 2));
  auto bad = j;
  bad.erase("numeric_gt");
  {
    std::ofstream out(dir / "bad.jsonl");
    out << j.dump() << "\n" << bad.dump() << "\n";
  }
  try {
    read_manifest(dir / "bad.jsonl");
    FAIL("expected SchemaError");
  } catch (const SchemaError& e) {
    const std::string what = e.what();
    CHECK(what.find(":2") != std::string::npos);
    CHECK(what.find("numeric_gt") != std::string::npos);
  }
  { std::ofstream out(dir / "garbage.jsonl"); out << "{not json\n"; }
  CHECK_THROWS_AS(read_manifest(dir / "garbage.jsonl"), SchemaError);

  { std::ofstream out(dir / "empty.jsonl"); }
  CHECK(read_manifest(dir / "empty.jsonl").items.empty());
  CHECK_THROWS_AS(read_manifest(dir / "missing.jsonl"), IoError);
}

TEST_CASE("stats recount") {
  DatasetManifest m;
  m.items = {item("a", 0, QuestionType::Object, 0), item("b", 0, QuestionType::Adversarial, 0),
             item("c", 0, QuestionType::Shape, 7)};
  m.items[2].filter.shape = Shape::Cube;
  const auto s = stats(m);
  CHECK(s.total == 3);
  CHECK(s.histogram == std::map<int, std::size_t>{{0, 2}, {7, 1}});
  std::size_t sum = 0;
  for (const auto& [k, v] : s.per_type) sum += v;
  CHECK(sum == 3);
  CHECK(s.per_shape.at("cube") == 1);
  CHECK(s.per_shape.at("any") == 2);
  CHECK_FALSE(format_stats(s).empty());
  CHECK(stats_to_json(s)["total"] == 3);

  const auto e = stats(DatasetManifest{});
  CHECK(e.total == 0);
  CHECK(e.histogram.empty());
}

TEST_CASE("balanced histogram matches the profile where supply sufficed") {
  const auto pool = pool_with(std::vector<std::size_t>(16, 3200));
  Rng rng(2);
  const auto s = stats(balance(pool, training_profile(), rng).manifest);
  const auto profile = training_profile();
  for (int c = 0; c < 16; ++c) CHECK(s.histogram.at(c) == profile.targets[static_cast<std::size_t>(c)]);
}
