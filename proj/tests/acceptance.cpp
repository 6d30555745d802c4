// Acceptance gate. Runs every criterion, prints one PASS/FAIL line each and
// exits nonzero if any failed.

#include "brute_force.hpp"
#include "cli_support.hpp"
#include "situate/config.hpp"
#include "situate/contrast.hpp"
#include "situate/dataset.hpp"
#include "situate/eval.hpp"
#include "situate/pipeline.hpp"
#include "situate/render.hpp"
#include "situate/scene.hpp"
#include "situate/texture.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numbers>
#include <regex>
#include <set>
#include <sstream>

using namespace situate;
using namespace situate::testing;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Thrown by expect() to abort a criterion with a reason.
struct Failure {
  std::string reason;
};

void expect(bool ok, const std::string& what) {
  if (!ok) throw Failure{what};
}

struct Outcome {
  std::string detail;
};

// A generated toy dataset shared by criteria 4, 5 and 9.
struct SharedDataset {
  fs::path out;
  std::map<std::string, SceneGraph> scenes;
  DatasetManifest manifest;
};

const SharedDataset& shared_dataset() {
  static const SharedDataset data = [] {
    SharedDataset d;
    d.out = fresh_dir("situate_acceptance_200");
    auto r = run_cli({"generate", "--toy", "--scenes", "200", "--out", d.out.string(), "--jobs", "4"});
    if (r.status != 0) throw Failure{"generate failed: " + r.err};
    const auto manifest = d.out / "qa.jsonl";
    // Keep every applicable question so soundness covers every type.
    r = run_cli({"qa", "--scenes", d.out.string(), "--out", manifest.string(), "--budget", "6",
                 "--adversarial-keep", "1"});
    if (r.status != 0) throw Failure{"qa failed: " + r.err};
    for (const auto& e : fs::directory_iterator(d.out / "scenes")) {
      auto g = scene_from_json(nlohmann::json::parse(read_file(e.path() / "scene.json")));
      d.scenes[g.scene_id] = std::move(g);
    }
    d.manifest = read_manifest(manifest);
    return d;
  }();
  return data;
}

// Independent sRGB -> CIELAB (D65, 2 degree observer) from the published
// formulas, written separately from the library.
std::array<double, 3> reference_lab(int r8, int g8, int b8) {
  auto lin = [](int c) {
    const double v = c / 255.0;
    return v <= 0.04045 ? v / 12.92 : std::pow((v + 0.055) / 1.055, 2.4);
  };
  const double r = lin(r8), g = lin(g8), b = lin(b8);
  const double x = (0.4124564 * r + 0.3575761 * g + 0.1804375 * b) / 0.95047;
  const double y = (0.2126729 * r + 0.7151522 * g + 0.0721750 * b) / 1.0;
  const double z = (0.0193339 * r + 0.1191920 * g + 0.9503041 * b) / 1.08883;
  auto f = [](double t) {
    const double e = 216.0 / 24389.0, k = 24389.0 / 27.0;
    return t > e ? std::cbrt(t) : (k * t + 16.0) / 116.0;
  };
  return {116.0 * f(y) - 16.0, 500.0 * (f(x) - f(y)), 200.0 * (f(y) - f(z))};
}

Outcome delta_e_golden() {
  const auto t0 = Clock::now();
  expect(delta_e({50, 3, 4}, {50, 0, 0}) == 5.0, "delta_e((50,3,4),(50,0,0)) != 5");
  Rng rng(2024);
  auto lab = [&] { return LabColor{rng.uniform(0, 100), rng.uniform(-128, 127), rng.uniform(-128, 127)}; };
  for (int i = 0; i < 10000; ++i) {
    const auto x = lab(), y = lab(), z = lab();
    expect(delta_e(x, x) == 0.0, "identity");
    expect(delta_e(x, y) >= 0.0, "non-negativity");
    expect(std::abs(delta_e(x, y) - delta_e(y, x)) <= 1e-9, "symmetry");
    expect(delta_e(x, z) <= delta_e(x, y) + delta_e(y, z) + 1e-9, "triangle inequality");
  }
  const double s = seconds_since(t0);
  expect(s < 1.0, "took " + std::to_string(s) + " s");
  return {"10000 triples in " + std::to_string(s) + " s"};
}

Outcome colorimetry() {
  const auto white = srgb_to_lab({255, 255, 255});
  expect(std::abs(white.L - 100) <= 0.1 && std::abs(white.a) <= 0.1 && std::abs(white.b) <= 0.1, "white");
  const auto black = srgb_to_lab({0, 0, 0});
  expect(std::abs(black.L) <= 0.1 && std::abs(black.a) <= 0.1 && std::abs(black.b) <= 0.1, "black");
  double worst = 0.0;
  Rng rng(8);
  std::vector<Rgb8> samples{{255, 0, 0}, {0, 255, 0}, {0, 0, 255}, {128, 128, 128}};
  for (int i = 0; i < 200; ++i) {
    samples.push_back({static_cast<std::uint8_t>(rng.uniform_int(0, 255)),
                       static_cast<std::uint8_t>(rng.uniform_int(0, 255)),
                       static_cast<std::uint8_t>(rng.uniform_int(0, 255))});
  }
  for (const auto& c : samples) {
    const auto lab = srgb_to_lab(c);
    const auto ref = reference_lab(c[0], c[1], c[2]);
    worst = std::max({worst, std::abs(lab.L - ref[0]), std::abs(lab.a - ref[1]), std::abs(lab.b - ref[2])});
  }
  expect(worst <= 0.5, "max channel deviation " + std::to_string(worst));
  return {"max deviation from reference " + std::to_string(worst)};
}

Outcome threshold_behavior() {
  const auto config = toy_config();
  // Camouflage: floor, walls and objects share the table's color.
  SceneGraph scene;
  for (std::uint64_t attempt = 0;; ++attempt) {
    try {
      scene = build_scene(sample_scene_spec(config, 1, attempt));
      break;
    } catch (const GenerationError&) {
    }
  }
  expect(!scene.objects.empty(), "camouflage scene has no objects");
  const Rgb8 wood = parse_texture("solid:wood").primary.rgb;
  scene.floor_texture = "solid:wood";
  scene.wall_texture = "solid:wood";
  for (auto& o : scene.objects) o.color = {"wood", wood};
  const RenderSettings settings{160, 90, 1, 1.0};
  const auto result = validate_and_repair(scene, render_scene_all_views(scene, settings), config.validation, settings);
  expect(result.report.retries_used >= 1, "no material reassignment");

  const auto t0 = Clock::now();
  const auto out = fresh_dir("situate_acceptance_threshold");
  const auto r = run_cli({"generate", "--toy", "--scenes", "20", "--out", out.string()});
  const double s = seconds_since(t0);
  expect(r.status == 0, "generate failed: " + r.err);
  std::size_t scenes = 0, pairs = 0;
  for (const auto& e : fs::directory_iterator(out / "scenes")) {
    ++scenes;
    const auto v = nlohmann::json::parse(read_file(e.path() / "validation.json"));
    expect(v["overall_pass"] == true, e.path().string() + " did not pass");
    for (const auto& entry : v["entries"]) {
      ++pairs;
      expect(entry["delta_e"].get<double>() >= 12.5, e.path().string() + " has a pair below 12.5");
    }
  }
  expect(scenes == 20, "expected 20 scenes");
  expect(s < 300.0, "20 scenes took " + std::to_string(s) + " s");
  std::ostringstream d;
  d << result.report.retries_used << " repaint(s) on camouflage; 20 scenes, " << pairs << " pairs >= 12.5 in "
    << s << " s";
  return {d.str()};
}

Outcome ground_truth_soundness() {
  const auto& data = shared_dataset();
  expect(data.scenes.size() >= 200, "fewer than 200 scenes");
  std::size_t adversarial = 0;
  for (const auto& q : data.manifest.items) {
    const auto& g = data.scenes.at(q.scene_id);
    auto count = [&](const CountFilter& f) {
      return static_cast<int>(std::count_if(g.objects.begin(), g.objects.end(),
                                            [&](const SceneObject& o) { return f.matches(o); }));
    };
    expect(q.numeric_gt == count(q.filter), q.item_id + ": gt differs from recount");
    if (q.question_type == QuestionType::Adversarial) {
      ++adversarial;
      expect(count(q.filter) == 0, q.item_id + ": adversarial recount nonzero");
      const bool near = count({q.filter.shape, std::nullopt, std::nullopt}) > 0 ||
                        count({std::nullopt, q.filter.color, std::nullopt}) > 0;
      expect(near, q.item_id + ": no near-miss attribute present");
    }
  }
  expect(adversarial > 0, "no adversarial items");
  return {std::to_string(data.manifest.items.size()) + " items over " + std::to_string(data.scenes.size()) +
          " scenes, " + std::to_string(adversarial) + " adversarial"};
}

Outcome verbose_additivity() {
  // The worked example first.
  SceneGraph g;
  for (std::uint64_t attempt = 0;; ++attempt) {
    try {
      g = build_scene(sample_scene_spec(default_config(), 0, attempt));
      break;
    } catch (const GenerationError&) {
    }
  }
  auto cone = [](int id, Zone z) {
    SceneObject o;
    o.object_id = id;
    o.shape = Shape::Cone;
    o.color = {"red", {200, 0, 0}};
    o.zone = z;
    o.size = 0.2;
    return o;
  };
  g.objects = {cone(1, Zone::OnTable), cone(2, Zone::OnTable), cone(3, Zone::RightOfTable),
               cone(4, Zone::RightOfTable), cone(5, Zone::RightOfTable), cone(6, Zone::FrontOfTable)};
  const auto text = render_ground_truth({Shape::Cone, std::nullopt, std::nullopt}, derive_metadata(g),
                                        AnswerStyle::Verbose);
  expect(text.find("In total there are 6 cones in the image!") != std::string::npos, "worked example: " + text);

  static const std::regex zone_re(R"(I can see (\d+) )");
  static const std::regex total_re(R"(In total there (?:are|is) (\d+) )");
  std::size_t checked = 0;
  std::vector<std::string> texts{text};
  for (const auto& q : shared_dataset().manifest.items) texts.push_back(q.verbose_gt);
  for (const auto& t : texts) {
    int sum = 0;
    for (auto it = std::sregex_iterator(t.begin(), t.end(), zone_re); it != std::sregex_iterator(); ++it) {
      sum += std::stoi((*it)[1].str());
    }
    std::smatch m;
    expect(std::regex_search(t, m, total_re), "no total in: " + t);
    expect(sum == std::stoi(m[1].str()), "zone counts do not add up: " + t);
    ++checked;
  }
  return {std::to_string(checked) + " verbose answers add up"};
}

Outcome segmentation_consistency() {
  // Analytic intersection cases.
  auto close = [](double a, double b) { return std::abs(a - b) <= 1e-6; };
  auto h = intersect(make_ray<double>({0, 0, 0}, {0, 0, -1}), Sphere<double>{{0, 0, -5}, 1.0});
  expect(h && close(h->t, 4.0), "sphere t=4");
  h = intersect(make_ray<double>({5, 0, 0}, {-1, 0, 0}), OrientedBox<double>{{0, 0, 0}, {1, 1, 1}, 0.0});
  expect(h && close(h->t, 4.0) && close(h->normal.x(), 1.0), "cube t=4");
  h = intersect(make_ray<double>({5, 0, 1}, {-1, 0, 0}), Cylinder<double>{{0, 0, 0}, 1.0, 2.0});
  expect(h && close(h->t, 4.0), "cylinder side t=4");
  h = intersect(make_ray<double>({0.3, 0.2, 5}, {0, 0, -1}), Cylinder<double>{{0, 0, 0}, 1.0, 2.0});
  expect(h && close(h->t, 3.0), "cylinder cap t=3");
  h = intersect(make_ray<double>({5, 0, 1}, {-1, 0, 0}), Cone<double>{{0, 0, 0}, 1.0, 2.0});
  expect(h && close(h->t, 4.5), "cone side t=4.5");
  h = intersect(make_ray<double>({0.2, 0, -5}, {0, 0, 1}), Cone<double>{{0, 0, 0}, 1.0, 2.0});
  expect(h && close(h->t, 5.0), "cone base t=5");
  expect(!intersect(make_ray<double>({5, 0, 2.5}, {-1, 0, 0}), Cone<double>{{0, 0, 0}, 1.0, 2.0}),
         "cone above apex");

  const auto config = default_config();
  std::size_t pixels = 0, scenes = 0;
  for (std::uint64_t i = 0; scenes < 10; ++i) {
    SceneGraph g;
    try {
      g = build_scene(sample_scene_spec(config, i));
    } catch (const GenerationError&) {
      continue;
    }
    ++scenes;
    for (int v = 0; v < static_cast<int>(g.cameras.size()); ++v) {
      const auto out = render(g, v, {32, 32, 1, 1.0});
      for (int y = 0; y < 32; ++y) {
        for (int x = 0; x < 32; ++x) {
          const auto ray = camera_ray(g.cameras[static_cast<std::size_t>(v)], 32, 32, x + 0.5, y + 0.5);
          expect(out.instances[static_cast<std::size_t>(y * 32 + x)] == brute_force_label(g, ray),
                 g.scene_id + " view " + std::to_string(v) + " pixel mismatch");
          ++pixels;
        }
      }
    }
  }
  return {std::to_string(pixels) + " pixels match brute force; analytic cases within 1e-6"};
}

DatasetManifest class_pool(const std::vector<std::size_t>& supply, int items_per_scene) {
  DatasetManifest m;
  m.split = "all";
  int n = 0;
  for (std::size_t c = 0; c < supply.size(); ++c) {
    for (std::size_t i = 0; i < supply[c]; ++i, ++n) {
      QAItem q;
      q.scene_id = "s" + std::to_string(n / items_per_scene);
      q.item_id = q.scene_id + "/" + std::to_string(n);
      q.image_ref = "scenes/" + q.scene_id + "/view0.png";
      q.question = q.item_id;
      q.numeric_gt = static_cast<int>(c);
      m.items.push_back(q);
    }
  }
  return m;
}

Outcome split_arithmetic() {
  // Pool of 60 items per class, three items per scene.
  const auto pool = class_pool(std::vector<std::size_t>(16, 60), 3);
  Rng rng(31);
  const auto r = build_test_split(pool, 15, 31, rng);
  expect(r.test.items.size() == 496, "test split has " + std::to_string(r.test.items.size()) + " items");
  std::map<int, int> per_class;
  std::set<std::string> test_scenes;
  for (const auto& q : r.test.items) {
    ++per_class[q.numeric_gt];
    test_scenes.insert(q.scene_id);
  }
  for (int c = 0; c <= 15; ++c) expect(per_class[c] == 31, "class " + std::to_string(c));
  for (const auto& q : r.train.items) expect(!test_scenes.count(q.scene_id), "scene in both splits");
  return {"496 test items, " + std::to_string(r.train.items.size()) + " scene-disjoint train items"};
}

Outcome balancing() {
  const auto profile = training_profile();
  std::vector<std::size_t> supply(16);
  Rng sizes(6);
  for (std::size_t c = 0; c < 16; ++c) {
    // Oversupplied except for a few short classes.
    supply[c] = c % 5 == 4 ? profile.targets[c] / 2 : profile.targets[c] + sizes.uniform_int(1, 2000);
  }
  const auto pool = class_pool(supply, 1);
  Rng rng(12);
  const auto r = balance(pool, profile, rng);
  std::map<int, std::size_t> h;
  for (const auto& q : r.manifest.items) ++h[q.numeric_gt];
  for (std::size_t c = 0; c < 16; ++c) {
    expect(h[static_cast<int>(c)] == std::min(supply[c], profile.targets[c]), "class " + std::to_string(c));
  }
  expect(h[6] == 2277, "class 6 not capped at 2277");
  return {"all 16 classes at min(supply, target); class 6 = 2277"};
}

Outcome metrics() {
  std::vector<ScoredPair> p{{3, 5}, {7, 5}};
  expect(rmse(p).value == 2.0, "rmse([5,5],[3,7]) != 2");
  p = {{1, 1}, {4, 4}, {0, 0}};
  expect(accuracy(p) == 1.0, "perfect accuracy != 1");

  Rng rng(9);
  for (int t = 0; t < 100; ++t) {
    std::vector<ScoredPair> random;
    const int n = static_cast<int>(rng.uniform_int(1, 300));
    for (int i = 0; i < n; ++i) {
      std::optional<int> pred;
      if (rng.bernoulli(0.8)) pred = static_cast<int>(rng.uniform_int(0, 25));
      random.push_back({static_cast<int>(rng.uniform_int(0, 20)), pred});
    }
    expect(confusion_matrix(random, 15).total() == static_cast<std::size_t>(n), "confusion mass");
  }

  std::size_t checked = 0;
  for (const auto& q : shared_dataset().manifest.items) {
    expect(extract_count(q.short_gt) == q.numeric_gt, q.item_id + " short: " + q.short_gt);
    expect(extract_count(q.verbose_gt) == q.numeric_gt, q.item_id + " verbose");
    ++checked;
  }
  return {"golden values hold; closed loop over " + std::to_string(checked) + " items"};
}

Outcome determinism() {
  const auto root = fresh_dir("situate_acceptance_det");
  std::map<int, std::string> manifest_bytes;
  std::map<int, std::map<std::string, std::uint64_t>> images;
  for (int jobs : {1, 8}) {
    const auto out = root / ("jobs" + std::to_string(jobs));
    auto r = run_cli({"generate", "--toy", "--scenes", "12", "--out", out.string(), "--jobs", std::to_string(jobs)});
    expect(r.status == 0, "generate --jobs " + std::to_string(jobs) + ": " + r.err);
    r = run_cli({"qa", "--scenes", out.string(), "--out", (out / "qa.jsonl").string()});
    expect(r.status == 0, "qa: " + r.err);
    r = run_cli({"balance", "--manifest", (out / "qa.jsonl").string(), "--out", (out / "train.jsonl").string()});
    expect(r.status == 0, "balance: " + r.err);
    manifest_bytes[jobs] = read_file(out / "qa.jsonl") + read_file(out / "train.jsonl") +
                           read_file(manifest_meta_path(out / "qa.jsonl"));
    images[jobs] = png_hashes(out);
  }
  expect(!images[1].empty(), "no images");
  expect(manifest_bytes[1] == manifest_bytes[8], "manifest bytes differ");
  expect(images[1] == images[8], "image hashes differ");
  return {std::to_string(images[1].size()) + " images and manifests identical for --jobs 1 and 8"};
}

Outcome performance() {
  SceneGraph g;
  for (std::uint64_t attempt = 0;; ++attempt) {
    try {
      g = build_scene(sample_scene_spec(default_config(), 0, attempt));
      break;
    } catch (const GenerationError&) {
    }
  }
  auto t0 = Clock::now();
  render(g, 0, render_settings(default_config().image), 1);
  const double full = seconds_since(t0);

  const auto toy = toy_config();
  SceneGraph small;
  for (std::uint64_t attempt = 0;; ++attempt) {
    try {
      small = build_scene(sample_scene_spec(toy, 0, attempt));
      break;
    } catch (const GenerationError&) {
    }
  }
  t0 = Clock::now();
  render(small, 0, render_settings(toy.image), 1);
  const double fast = seconds_since(t0);
  std::ostringstream d;
  d << "1024x576@16spp " << full << " s, 128x72@1spp " << fast << " s";
  expect(full <= 60.0 && fast <= 0.5, d.str());
  return {d.str()};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"1 delta-E golden values and metric axioms", delta_e_golden},
      {"2 colorimetry", colorimetry},
      {"3 contrast threshold behavior", threshold_behavior},
      {"4 ground-truth soundness", ground_truth_soundness},
      {"5 verbose additivity", verbose_additivity},
      {"6 segmentation consistency", segmentation_consistency},
      {"7 split arithmetic", split_arithmetic},
      {"8 balancing", balancing},
      {"9 metrics golden values and closed loop", metrics},
      {"10 determinism across --jobs", determinism},
      {"11 performance envelope", performance},
  };
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    const auto t0 = Clock::now();
    std::string status = "PASS", detail;
    try {
      detail = run().detail;
    } catch (const Failure& f) {
      status = "FAIL";
      detail = f.reason;
    } catch (const std::exception& e) {
      status = "FAIL";
      detail = std::string("exception: ") + e.what();
    }
    if (status == "FAIL") ++failed;
    std::printf("%s  criterion %s (%.1f s): %s\n", status.c_str(), name.c_str(), seconds_since(t0), detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
