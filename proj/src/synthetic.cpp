#include "physfuse/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

#include "physfuse/error.hpp"
#include "physfuse/mixture.hpp"

namespace physfuse {

using nlohmann::json;

namespace {

constexpr std::size_t kMaxRedraws = 1000;

std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

double sample_gamma(std::mt19937_64& rng, double shape) {
  return std::gamma_distribution<double>(shape, 1.0)(rng);
}

std::vector<double> sample_dirichlet(std::mt19937_64& rng, const std::vector<double>& alpha) {
  std::vector<double> g(alpha.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < alpha.size(); ++i) sum += g[i] = sample_gamma(rng, alpha[i]);
  if (!(sum > 0.0)) return std::vector<double>(alpha.size(), 1.0 / static_cast<double>(alpha.size()));
  for (double& v : g) v /= sum;
  return g;
}

std::size_t sample_categorical(std::mt19937_64& rng, const std::vector<double>& probs) {
  return std::discrete_distribution<std::size_t>(probs.begin(), probs.end())(rng);
}

/// Normal draw redrawn into the support; clamped after kMaxRedraws misses.
double sample_in_support(std::mt19937_64& rng, const TruthParams& tp, const Support& support) {
  std::normal_distribution<double> normal(tp.mean, std::sqrt(tp.variance));
  double v = tp.mean;
  for (std::size_t i = 0; i < kMaxRedraws; ++i) {
    v = normal(rng);
    if (support.contains(v)) return v;
  }
  return std::clamp(v, support.lower, support.upper);
}

double sample_confidence(std::mt19937_64& rng, const ConfidenceModel& m) {
  if (m.kind == ConfidenceModel::Kind::constant) return m.value;
  for (;;) {
    const double x = sample_gamma(rng, m.a);
    const double y = sample_gamma(rng, m.b);
    const double p = x / (x + y);
    if (p > 0.0 && p <= 1.0) return p;
  }
}

Vec3 read_vec3(const json& j, const char* what) {
  if (!j.is_array() || j.size() != 3) throw ValidationError(std::string(what) + " must be an array of 3 numbers");
  Vec3 v{};
  for (std::size_t k = 0; k < 3; ++k) {
    if (!j[k].is_number()) throw ValidationError(std::string(what) + " must be an array of 3 numbers");
    v[k] = j[k].get<double>();
  }
  return v;
}

std::string id_string(const json& j) {
  if (j.is_string()) return j.get<std::string>();
  if (j.is_number_integer()) return std::to_string(j.get<std::int64_t>());
  throw ValidationError("segment id must be a string or an integer");
}

}  // namespace

SceneSpec::SceneSpec(MaterialLibrary lib)
    : library(std::move(lib)),
      confusion(leaky_identity(library.size(), 0.0)),
      class_alpha0(library.size(), 1.0) {}

std::vector<std::vector<double>> SceneSpec::leaky_identity(std::size_t k, double eta) {
  if (!(eta >= 0.0 && eta < 1.0)) throw ValidationError("confusion leak must lie in [0,1)");
  std::vector<std::vector<double>> m(k, std::vector<double>(k, 0.0));
  for (std::size_t i = 0; i < k; ++i) {
    if (k == 1) {
      m[i][i] = 1.0;
      continue;
    }
    for (std::size_t j = 0; j < k; ++j) m[i][j] = i == j ? 1.0 - eta : eta / static_cast<double>(k - 1);
  }
  return m;
}

std::vector<std::string> SceneSpec::simulated_properties() const {
  if (!properties.empty()) return properties;
  std::vector<std::string> out;
  for (const auto& p : library.properties()) out.push_back(p.name);
  return out;
}

void SceneSpec::validate() const {
  const std::size_t k = library.size();
  if (segments.empty()) throw ValidationError("scene has no segments");
  if (confusion.size() != k) throw ValidationError("confusion matrix must have one row per class");
  for (std::size_t i = 0; i < k; ++i) {
    if (confusion[i].size() != k) throw ValidationError("confusion row " + std::to_string(i) + " has wrong length");
    double sum = 0.0;
    for (double v : confusion[i]) {
      if (!(v >= 0.0) || !std::isfinite(v))
        throw ValidationError("confusion row " + std::to_string(i) + " has a negative or non-finite entry");
      sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw ValidationError("confusion row " + std::to_string(i) + " does not sum to 1");
  }
  if (class_alpha0.size() != k) throw ValidationError("class_alpha0 must have one entry per class");
  for (double a : class_alpha0)
    if (!(a > 0.0) || !std::isfinite(a)) throw ValidationError("class_alpha0 entries must be positive");
  if (confidence.kind == ConfidenceModel::Kind::beta) {
    if (!(confidence.a > 0.0 && confidence.b > 0.0)) throw ValidationError("beta confidence parameters must be positive");
  } else if (!(confidence.value > 0.0 && confidence.value <= 1.0)) {
    throw ValidationError("constant confidence must lie in (0,1]");
  }
  for (const auto& p : simulated_properties())
    if (library.property(p) == nullptr) throw ValidationError("scene property '" + p + "' is not in the library");
  for (const auto& [key, tp] : truths) {
    if (key.first >= k) throw ValidationError("truth for unknown class index " + std::to_string(key.first));
    if (!(tp.variance > 0.0) || !std::isfinite(tp.variance) || !std::isfinite(tp.mean))
      throw ValidationError("truth variance for '" + library.classes()[key.first] + "/" + key.second +
                            "' must be positive and finite");
  }
  std::set<std::string> ids;
  for (const auto& s : segments) {
    if (s.id.empty()) throw ValidationError("segment id must not be empty");
    if (!ids.insert(s.id).second) throw ValidationError("duplicate segment id '" + s.id + "'");
    if (s.material && *s.material >= k) throw ValidationError("segment '" + s.id + "' has an unknown material");
    for (std::size_t a = 0; a < 3; ++a)
      if (!(s.box.size[a] > 0.0) || !std::isfinite(s.box.size[a]) || !std::isfinite(s.box.min[a]))
        throw ValidationError("segment '" + s.id + "' box must have positive finite size");
    for (const auto& [name, v] : s.values)
      if (!std::isfinite(v)) throw ValidationError("segment '" + s.id + "' value for '" + name + "' is not finite");
  }
  if (!(splat_spacing >= 0.0) || !(splat_scale > 0.0)) throw ValidationError("splat spacing/scale must be positive");
  if (!(splat_threshold > 0.0 && splat_threshold < 1.0)) throw ValidationError("splat threshold must lie in (0,1)");
}

SceneSpec SceneSpec::from_json(const json& j, const std::string& base_dir) {
  if (!j.is_object()) throw ValidationError("scene spec must be a JSON object");
  if (!j.contains("library")) throw ValidationError("scene spec needs a 'library'");
  const json& lj = j.at("library");
  MaterialLibrary lib = [&] {
    if (lj.is_string()) {
      std::filesystem::path p = lj.get<std::string>();
      if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
      return MaterialLibrary::load(p.string());
    }
    return MaterialLibrary::from_json(lj);
  }();
  SceneSpec spec(std::move(lib));
  const std::size_t k = spec.library.size();
  const auto class_of = [&](const std::string& name) {
    auto idx = spec.library.index_of(name);
    if (!idx) throw ValidationError("unknown material '" + name + "' in scene spec");
    return *idx;
  };

  try {
    spec.seed = j.value("seed", std::uint64_t{0});
    spec.views = j.value("views", std::size_t{10});
    if (j.contains("properties")) spec.properties = j.at("properties").get<std::vector<std::string>>();
    if (j.contains("class_alpha0")) spec.class_alpha0 = j.at("class_alpha0").get<std::vector<double>>();

    const std::string mode = j.value("truth_mode", std::string("fixed"));
    if (mode == "fixed") {
      spec.truth_mode = TruthMode::fixed;
    } else if (mode == "nig") {
      spec.truth_mode = TruthMode::nig;
    } else {
      throw ValidationError("truth_mode must be 'fixed' or 'nig'");
    }
    if (j.contains("truths")) {
      for (const auto& [mat, props] : j.at("truths").items()) {
        const std::size_t c = class_of(mat);
        for (const auto& [prop, tp] : props.items())
          spec.truths[{c, prop}] = TruthParams{tp.at("mean").get<double>(), tp.at("variance").get<double>()};
      }
    }

    if (j.contains("confusion")) {
      const json& cj = j.at("confusion");
      if (cj.contains("matrix")) {
        spec.confusion = cj.at("matrix").get<std::vector<std::vector<double>>>();
      } else {
        spec.confusion = leaky_identity(k, cj.value("leak", 0.1));
      }
    } else {
      spec.confusion = leaky_identity(k, 0.1);
    }

    if (j.contains("confidence")) {
      const json& cj = j.at("confidence");
      if (cj.contains("constant")) {
        spec.confidence.kind = ConfidenceModel::Kind::constant;
        spec.confidence.value = cj.at("constant").get<double>();
      } else {
        const auto ab = cj.value("beta", std::vector<double>{8.0, 2.0});
        if (ab.size() != 2) throw ValidationError("confidence.beta must be [a, b]");
        spec.confidence.a = ab[0];
        spec.confidence.b = ab[1];
      }
    }

    if (j.contains("splats")) {
      spec.splat_spacing = j.at("splats").value("spacing", 0.0);
      spec.splat_scale = j.at("splats").value("scale", 0.4);
      spec.splat_threshold = j.at("splats").value("occupancy_threshold", 0.05);
    }

    if (j.contains("segments")) {
      for (const auto& sj : j.at("segments")) {
        SegmentSpec s;
        s.id = id_string(sj.at("id"));
        if (sj.contains("material") && !sj.at("material").is_null()) s.material = class_of(sj.at("material"));
        s.box.min = read_vec3(sj.at("box").at("min"), "box.min");
        s.box.size = read_vec3(sj.at("box").at("size"), "box.size");
        if (sj.contains("values")) s.values = sj.at("values").get<std::map<std::string, double>>();
        spec.segments.push_back(std::move(s));
      }
    }
    if (j.contains("segment_grid")) {
      // Row of equal cubes along x separated by one edge, materials sampled.
      const json& g = j.at("segment_grid");
      const auto count = g.at("count").get<std::size_t>();
      const double edge = g.value("edge", 0.1);
      for (std::size_t i = 0; i < count; ++i) {
        SegmentSpec s;
        s.id = std::to_string(i);
        s.box.min = {2.0 * edge * static_cast<double>(i), 0.0, 0.0};
        s.box.size = {edge, edge, edge};
        spec.segments.push_back(std::move(s));
      }
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed scene spec: ") + e.what());
  }
  spec.validate();
  return spec;
}

SceneSpec SceneSpec::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open scene spec '" + path + "'");
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded()) throw ValidationError("scene spec '" + path + "' is not valid JSON");
  return from_json(j, std::filesystem::path(path).parent_path().string());
}

json SceneSpec::to_json() const {
  json truths_j = json::object();
  for (const auto& [key, tp] : truths)
    truths_j[library.classes()[key.first]][key.second] = {{"mean", tp.mean}, {"variance", tp.variance}};
  json segs = json::array();
  for (const auto& s : segments) {
    json sj = {{"id", s.id}, {"box", {{"min", s.box.min}, {"size", s.box.size}}}};
    if (s.material) sj["material"] = library.classes()[*s.material];
    if (!s.values.empty()) sj["values"] = s.values;
    segs.push_back(std::move(sj));
  }
  json conf = confidence.kind == ConfidenceModel::Kind::constant
                  ? json{{"constant", confidence.value}}
                  : json{{"beta", {confidence.a, confidence.b}}};
  return {{"library", library.to_json()},
          {"seed", seed},
          {"views", views},
          {"properties", simulated_properties()},
          {"truth_mode", truth_mode == TruthMode::fixed ? "fixed" : "nig"},
          {"truths", std::move(truths_j)},
          {"confusion", {{"matrix", confusion}}},
          {"confidence", std::move(conf)},
          {"class_alpha0", class_alpha0},
          {"splats", {{"spacing", splat_spacing}, {"scale", splat_scale}, {"occupancy_threshold", splat_threshold}}},
          {"segments", std::move(segs)}};
}

Scene sample_scene(const SceneSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(mix_seed(spec.seed));
  Scene scene{spec, sample_dirichlet(rng, spec.class_alpha0), {}, {}};
  const auto props = spec.simulated_properties();

  for (std::size_t c = 0; c < spec.library.size(); ++c) {
    for (const auto& p : props) {
      const NigPrior& prior = spec.library.prior(c, p);
      TruthParams tp;
      if (spec.truth_mode == TruthMode::nig) {
        // sigma^2 ~ InvGamma(alpha, beta), mu | sigma^2 ~ N(tau, sigma^2 / kappa)
        tp.variance = prior.beta / sample_gamma(rng, prior.alpha);
        tp.mean = std::normal_distribution<double>(prior.tau, std::sqrt(tp.variance / prior.kappa))(rng);
      } else if (auto it = spec.truths.find({c, p}); it != spec.truths.end()) {
        tp = it->second;
      } else {
        tp = {prior.tau, prior.beta / (prior.alpha - 1.0)};
      }
      scene.class_params[{c, p}] = tp;
    }
  }

  for (const auto& s : spec.segments) {
    SegmentTruth t;
    t.id = s.id;
    t.box = s.box;
    t.material = s.material ? *s.material : sample_categorical(rng, scene.class_frequencies);
    for (const auto& p : props) {
      if (auto it = s.values.find(p); it != s.values.end()) {
        t.values[p] = it->second;
      } else {
        t.values[p] = sample_in_support(rng, scene.class_params.at({t.material, p}), spec.library.property(p)->support);
      }
    }
    scene.segments.push_back(std::move(t));
  }
  return scene;
}

std::vector<ObservationLine> emit_observations(const Scene& scene, std::size_t views) {
  if (views == 0) throw ValidationError("views must be at least 1");
  const SceneSpec& spec = scene.spec;
  std::mt19937_64 rng(mix_seed(mix_seed(spec.seed) ^ 0x6F62736572766521ULL));
  const auto props = spec.simulated_properties();
  std::vector<ObservationLine> out;
  out.reserve(views * scene.segments.size());
  for (std::size_t v = 0; v < views; ++v) {
    for (const auto& seg : scene.segments) {
      ObservationLine line;
      line.view_id = "v" + std::to_string(v);
      line.segment_id = seg.id;
      Candidate cand;
      const std::size_t reported = sample_categorical(rng, spec.confusion[seg.material]);
      cand.material = spec.library.classes()[reported];
      cand.confidence = sample_confidence(rng, spec.confidence);
      for (const auto& p : props)
        cand.properties[p] =
            sample_in_support(rng, scene.class_params.at({seg.material, p}), spec.library.property(p)->support);
      line.candidates.push_back(std::move(cand));
      out.push_back(std::move(line));
    }
  }
  return out;
}

std::vector<ObservationRecord> to_records(const std::vector<ObservationLine>& lines) {
  std::vector<ObservationRecord> out;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    for (const auto& c : lines[i].candidates) {
      ObservationRecord r;
      r.segment_id = lines[i].segment_id;
      r.view_id = lines[i].view_id;
      r.material = c.material;
      r.confidence = c.confidence;
      r.properties = c.properties;
      r.caption = lines[i].caption;
      r.source.file = "<synthetic>";
      r.source.line = i + 1;
      out.push_back(std::move(r));
    }
  }
  return out;
}

double Scene::analytic_mass() const {
  double mass = 0.0;
  for (const auto& s : segments) {
    auto it = s.values.find("density");
    if (it == s.values.end()) throw ValidationError("scene does not simulate density");
    mass += it->second * s.box.volume();
  }
  return mass;
}

namespace {

/// Mean height, in lattice spacings, of the occupied envelope above the outer
/// plane of an infinite square lattice of isotropic splats with std-dev
/// `scale` spacings. Midpoint rule on a 64x64 grid over one lattice cell.
double envelope_height(double scale, double threshold) {
  const double reach = scale * std::sqrt(2.0 * std::log(1.0 / threshold));
  const int span = static_cast<int>(std::ceil(reach)) + 1;
  constexpr int kGrid = 64;
  double sum = 0.0;
  for (int a = 0; a < kGrid; ++a) {
    const double x = (a + 0.5) / kGrid - 0.5;
    for (int b = 0; b < kGrid; ++b) {
      const double y = (b + 0.5) / kGrid - 0.5;
      double best = 0.0;
      for (int i = -span; i <= span; ++i)
        for (int j = -span; j <= span; ++j) {
          const double d2 = (x - i) * (x - i) + (y - j) * (y - j);
          if (d2 < reach * reach) best = std::max(best, std::sqrt(reach * reach - d2));
        }
      sum += best;
    }
  }
  return sum / (kGrid * kGrid);
}

}  // namespace

std::vector<SplatPoint> Scene::splats() const {
  double spacing = spec.splat_spacing;
  if (spacing == 0.0) {
    spacing = std::numeric_limits<double>::infinity();
    for (const auto& s : segments)
      for (double e : s.box.size) spacing = std::min(spacing, e / 12.0);
  }
  const double inset = envelope_height(spec.splat_scale, spec.splat_threshold);
  std::vector<SplatPoint> out;
  for (const auto& s : segments) {
    std::array<std::size_t, 3> n{};
    Vec3 h{};
    for (std::size_t k = 0; k < 3; ++k) {
      n[k] = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(s.box.size[k] / spacing)));
      // outer centers sit `inset` spacings inside the faces
      h[k] = s.box.size[k] / (static_cast<double>(n[k] - 1) + 2.0 * inset);
    }
    for (std::size_t i = 0; i < n[0]; ++i)
      for (std::size_t j = 0; j < n[1]; ++j)
        for (std::size_t l = 0; l < n[2]; ++l) {
          SplatPoint p;
          p.position = {s.box.min[0] + (static_cast<double>(i) + inset) * h[0],
                        s.box.min[1] + (static_cast<double>(j) + inset) * h[1],
                        s.box.min[2] + (static_cast<double>(l) + inset) * h[2]};
          p.scale = {spec.splat_scale * h[0], spec.splat_scale * h[1], spec.splat_scale * h[2]};
          p.opacity = 1.0;
          p.segment_id = s.id;
          out.push_back(std::move(p));
        }
  }
  return out;
}

json Scene::truth_json() const {
  const auto& lib = spec.library;
  json params = json::object();
  for (const auto& [key, tp] : class_params)
    params[lib.classes()[key.first]][key.second] = {{"mean", tp.mean}, {"variance", tp.variance}};
  json segs = json::array();
  double volume = 0.0;
  for (const auto& s : segments) {
    volume += s.box.volume();
    segs.push_back({{"id", s.id},
                    {"material", lib.classes()[s.material]},
                    {"box", {{"min", s.box.min}, {"size", s.box.size}}},
                    {"volume_m3", s.box.volume()},
                    {"values", s.values}});
  }
  json out = {{"seed", spec.seed},
              {"class_frequencies", class_frequencies},
              {"class_params", std::move(params)},
              {"segments", std::move(segs)},
              {"total_volume_m3", volume}};
  if (!segments.empty() && segments.front().values.count("density") != 0) out["analytic_mass_kg"] = analytic_mass();
  return out;
}

CoverageTable calibration_score(const FusionSession& session, const Scene& scene, const std::vector<double>& levels) {
  for (double l : levels)
    if (!(l > 0.0 && l < 1.0)) throw ValidationError("coverage levels must lie in (0,1)");
  FusionSession work = session;  // prior-only segments are created on the copy
  CoverageTable table;
  for (double l : levels) table.rows.push_back({l, 0, 0});
  for (const auto& seg : scene.segments) {
    const SegmentState& state = work.ensure_segment(seg.id);
    const bool prior_only = state.observations == 0;
    for (const auto& [prop, truth] : seg.values) {
      if (work.library().property(prop) == nullptr) continue;
      const MixturePredictive mx = work.mixture(state, prop);
      ++table.cells;
      if (prior_only) ++table.prior_only_cells;
      for (auto& row : table.rows) {
        ++row.cells;
        if (central_interval(mx, row.level).contains(truth)) ++row.covered;
      }
    }
  }
  return table;
}

}  // namespace physfuse
