#include "physfuse/session.hpp"

#include <cmath>

#include "physfuse/error.hpp"

namespace physfuse {

namespace {

constexpr const char* kSnapshotFormat = "physfuse-snapshot";

[[noreturn]] void corrupt(const std::string& path, const std::string& what) {
  throw ValidationError("corrupt snapshot at " + (path.empty() ? std::string("/") : path) + ": " + what);
}

const nlohmann::json& field(const nlohmann::json& obj, const char* key, const std::string& path) {
  if (!obj.is_object()) corrupt(path, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) corrupt(path, std::string("missing field '") + key + "'");
  return *it;
}

double number(const nlohmann::json& j, const std::string& path) {
  if (!j.is_number()) corrupt(path, "expected a number");
  return j.get<double>();
}

std::uint64_t count(const nlohmann::json& j, const std::string& path) {
  if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<long long>() >= 0))
    corrupt(path, "expected a nonnegative integer");
  return j.get<std::uint64_t>();
}

std::vector<double> numbers(const nlohmann::json& j, const std::string& path, std::size_t expected) {
  if (!j.is_array()) corrupt(path, "expected an array");
  if (expected != 0 && j.size() != expected)
    corrupt(path, "expected " + std::to_string(expected) + " entries, found " + std::to_string(j.size()));
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(number(j[i], path + "/" + std::to_string(i)));
  return out;
}

nlohmann::json counters_json(const FusionCounters& c) {
  return {{"seen", c.seen},
          {"absorbed", c.absorbed},
          {"rejected", c.rejected},
          {"ignored_properties", c.ignored_properties},
          {"per_view", c.per_view}};
}

}  // namespace

FusionSession::FusionSession(MaterialLibrary library, FusionConfig config)
    : library_(std::move(library)), config_(std::move(config)) {
  if (config_.alpha0.empty()) config_.alpha0.assign(library_.size(), 1.0);
  if (config_.alpha0.size() != library_.size())
    throw ValidationError("alpha0 has " + std::to_string(config_.alpha0.size()) + " entries but the library has " +
                          std::to_string(library_.size()) + " classes");
  // Validates alpha0 and lambda.
  (void)DirichletBelief(config_.alpha0, config_.lambda);
}

SegmentState FusionSession::fresh_segment() const {
  SegmentState seg{DirichletBelief(config_.alpha0, config_.lambda), {}, 0};
  for (const auto& kind : library_.properties()) {
    std::vector<ClassPropertyState> cells;
    cells.reserve(library_.size());
    for (std::size_t i = 0; i < library_.size(); ++i) {
      const NigPrior& prior = library_.prior(i, kind.name);
      cells.push_back({NigBelief(prior), WeightedMoments(kind.epsilon), prior});
    }
    seg.properties.emplace(kind.name, std::move(cells));
  }
  return seg;
}

SegmentState& FusionSession::ensure_segment(const std::string& segment_id) {
  auto it = segments_.find(segment_id);
  if (it == segments_.end()) it = segments_.emplace(segment_id, fresh_segment()).first;
  return it->second;
}

const SegmentState* FusionSession::find_segment(std::string_view segment_id) const {
  auto it = segments_.find(std::string(segment_id));
  return it == segments_.end() ? nullptr : &it->second;
}

RecordOutcome FusionSession::absorb(const ObservationRecord& record) {
  ++counters_.seen;
  auto reject = [&](std::string reason) {
    ++counters_.rejected;
    return RecordOutcome{false, std::move(reason)};
  };

  auto cls = library_.index_of(record.material);
  if (!cls) return reject("unknown material '" + record.material + "'");
  if (record.segment_id.empty() || record.view_id.empty()) return reject("empty segment or view id");

  Observation obs{record.segment_id, record.view_id, *cls, record.confidence, record.properties, record.caption};
  const ValidationReport report = validate_observation(obs, library_);
  if (!report.ok()) return reject(report.summary());

  const Confidence p(obs.confidence);
  SegmentState& seg = ensure_segment(obs.segment_id);
  // Build the updated cells first so that a throw leaves the segment intact.
  DirichletBelief classes = seg.classes.absorb(*cls, p);
  std::vector<std::pair<std::vector<ClassPropertyState>*, ClassPropertyState>> updates;
  std::uint64_t ignored = 0;
  for (const auto& [name, value] : obs.properties) {
    auto it = seg.properties.find(name);
    if (it == seg.properties.end()) {
      ++ignored;
      continue;
    }
    const ClassPropertyState& cell = it->second[*cls];
    updates.emplace_back(&it->second,
                         ClassPropertyState{cell.nig.absorb(value, p), cell.moments.accumulate(value, p), cell.prior});
  }
  seg.classes = std::move(classes);
  for (auto& [cells, updated] : updates) (*cells)[*cls] = std::move(updated);
  ++seg.observations;
  counters_.ignored_properties += ignored;
  ++counters_.absorbed;
  ++counters_.per_view[obs.view_id];
  return {true, {}};
}

void FusionSession::count_rejected(std::uint64_t n) {
  counters_.seen += n;
  counters_.rejected += n;
}

MixturePredictive FusionSession::mixture(const SegmentState& seg, const std::string& property) const {
  auto it = seg.properties.find(property);
  if (it == seg.properties.end()) throw ValidationError("unknown property '" + property + "'");
  return build_mixture(seg.classes, it->second, config_.backend, property);
}

UncertaintyReport FusionSession::uncertainty(const SegmentState& seg, const std::string& property) const {
  auto it = seg.properties.find(property);
  if (it == seg.properties.end()) throw ValidationError("unknown property '" + property + "'");
  std::vector<NigBelief> nigs;
  nigs.reserve(it->second.size());
  for (const auto& c : it->second) nigs.push_back(c.nig);
  return mixture_total_uncertainty(seg.classes, nigs);
}

nlohmann::json FusionSession::snapshot_json() const {
  nlohmann::json j;
  j["format"] = kSnapshotFormat;
  j["version"] = kSnapshotVersion;
  j["library"] = library_.to_json();
  j["config"] = {{"lambda", config_.lambda},
                 {"alpha0", config_.alpha0},
                 {"backend", std::string(to_string(config_.backend))}};
  j["counters"] = counters_json(counters_);
  nlohmann::json segs = nlohmann::json::object();
  for (const auto& [id, seg] : segments_) {
    nlohmann::json s;
    s["observations"] = seg.observations;
    s["dirichlet"] = {{"prior", seg.classes.prior()},
                      {"alpha", seg.classes.alpha()},
                      {"lambda", seg.classes.lambda()},
                      {"total_weight", seg.classes.total_weight()}};
    nlohmann::json props = nlohmann::json::object();
    for (const auto& [name, cells] : seg.properties) {
      nlohmann::json arr = nlohmann::json::array();
      for (const auto& c : cells) {
        arr.push_back({{"nig", {c.nig.tau(), c.nig.kappa(), c.nig.alpha(), c.nig.beta()}},
                       {"moments", {c.moments.weight(), c.moments.first(), c.moments.second()}},
                       {"epsilon", c.moments.epsilon()},
                       {"prior", {c.prior.tau, c.prior.kappa, c.prior.alpha, c.prior.beta}}});
      }
      props[name] = std::move(arr);
    }
    s["properties"] = std::move(props);
    segs[id] = std::move(s);
  }
  j["segments"] = std::move(segs);
  return j;
}

std::string FusionSession::snapshot() const { return snapshot_json().dump(1); }

FusionSession FusionSession::restore(std::string_view bytes) {
  nlohmann::json j = nlohmann::json::parse(bytes.begin(), bytes.end(), nullptr, false);
  if (j.is_discarded()) corrupt("", "not valid JSON (truncated or damaged)");
  if (!j.is_object()) corrupt("", "expected an object");
  const auto& fmt = field(j, "format", "");
  if (!fmt.is_string() || fmt.get<std::string>() != kSnapshotFormat) corrupt("/format", "unexpected format tag");
  if (count(field(j, "version", ""), "/version") != kSnapshotVersion) corrupt("/version", "unsupported version");

  MaterialLibrary library = [&] {
    try {
      return MaterialLibrary::from_json(field(j, "library", ""));
    } catch (const ValidationError& e) {
      corrupt("/library", e.what());
    }
  }();

  const auto& cfg = field(j, "config", "");
  FusionConfig config;
  config.lambda = number(field(cfg, "lambda", "/config"), "/config/lambda");
  config.alpha0 = numbers(field(cfg, "alpha0", "/config"), "/config/alpha0", library.size());
  const auto& backend = field(cfg, "backend", "/config");
  if (!backend.is_string()) corrupt("/config/backend", "expected a string");
  try {
    config.backend = parse_backend(backend.get<std::string>());
  } catch (const ValidationError& e) {
    corrupt("/config/backend", e.what());
  }

  std::optional<FusionSession> session;
  try {
    session.emplace(std::move(library), std::move(config));
  } catch (const ValidationError& e) {
    corrupt("/config", e.what());
  }

  const auto& cj = field(j, "counters", "");
  FusionCounters& counters = session->counters_;
  counters.seen = count(field(cj, "seen", "/counters"), "/counters/seen");
  counters.absorbed = count(field(cj, "absorbed", "/counters"), "/counters/absorbed");
  counters.rejected = count(field(cj, "rejected", "/counters"), "/counters/rejected");
  counters.ignored_properties =
      count(field(cj, "ignored_properties", "/counters"), "/counters/ignored_properties");
  const auto& per_view = field(cj, "per_view", "/counters");
  if (!per_view.is_object()) corrupt("/counters/per_view", "expected an object");
  for (const auto& [view, n] : per_view.items()) counters.per_view[view] = count(n, "/counters/per_view/" + view);
  if (counters.absorbed + counters.rejected != counters.seen)
    corrupt("/counters", "absorbed + rejected does not equal seen");

  const auto& segs = field(j, "segments", "");
  if (!segs.is_object()) corrupt("/segments", "expected an object");
  const std::size_t k = session->library_.size();
  for (const auto& [id, sj] : segs.items()) {
    const std::string path = "/segments/" + id;
    SegmentState seg = session->fresh_segment();
    seg.observations = count(field(sj, "observations", path), path + "/observations");
    const auto& dj = field(sj, "dirichlet", path);
    const std::string dpath = path + "/dirichlet";
    try {
      seg.classes = DirichletBelief::from_parts(numbers(field(dj, "prior", dpath), dpath + "/prior", k),
                                                numbers(field(dj, "alpha", dpath), dpath + "/alpha", k),
                                                number(field(dj, "lambda", dpath), dpath + "/lambda"),
                                                number(field(dj, "total_weight", dpath), dpath + "/total_weight"));
    } catch (const ValidationError& e) {
      if (std::string_view(e.what()).starts_with("corrupt snapshot")) throw;
      corrupt(dpath, e.what());
    }
    const auto& pj = field(sj, "properties", path);
    if (!pj.is_object()) corrupt(path + "/properties", "expected an object");
    if (pj.size() != seg.properties.size()) corrupt(path + "/properties", "property set does not match library");
    for (auto& [name, cells] : seg.properties) {
      const std::string ppath = path + "/properties/" + name;
      const auto& arr = field(pj, name.c_str(), path + "/properties");
      if (!arr.is_array() || arr.size() != k) corrupt(ppath, "expected " + std::to_string(k) + " class cells");
      for (std::size_t i = 0; i < k; ++i) {
        const std::string cpath = ppath + "/" + std::to_string(i);
        const auto nig = numbers(field(arr[i], "nig", cpath), cpath + "/nig", 4);
        const auto mom = numbers(field(arr[i], "moments", cpath), cpath + "/moments", 3);
        const double eps = number(field(arr[i], "epsilon", cpath), cpath + "/epsilon");
        const auto pr = numbers(field(arr[i], "prior", cpath), cpath + "/prior", 4);
        try {
          cells[i] = ClassPropertyState{NigBelief(nig[0], nig[1], nig[2], nig[3]),
                                        WeightedMoments::from_parts(mom[0], mom[1], mom[2], eps),
                                        NigPrior{pr[0], pr[1], pr[2], pr[3]}};
        } catch (const ValidationError& e) {
          corrupt(cpath, e.what());
        }
      }
    }
    session->segments_.emplace(id, std::move(seg));
  }
  return std::move(*session);
}

nlohmann::json FusionSession::report() const {
  nlohmann::json out;
  out["schema_version"] = kSnapshotVersion;
  out["backend"] = std::string(to_string(config_.backend));
  out["lambda"] = config_.lambda;
  out["counters"] = counters_json(counters_);
  nlohmann::json segs = nlohmann::json::array();
  for (const auto& [id, seg] : segments_) {
    nlohmann::json s;
    s["segment_id"] = id;
    s["observations"] = seg.observations;
    const std::size_t map = seg.classes.map_class();
    s["map_material"] = library_.classes()[map];
    nlohmann::json post = nlohmann::json::object();
    const auto w = seg.classes.class_posterior();
    for (std::size_t i = 0; i < w.size(); ++i) post[library_.classes()[i]] = w[i];
    s["class_posterior"] = std::move(post);
    nlohmann::json props = nlohmann::json::object();
    for (const auto& [name, cells] : seg.properties) {
      const auto mx = mixture(seg, name);
      const auto u = uncertainty(seg, name);
      double evidence = 0.0;
      for (const auto& c : cells) evidence += c.moments.weight();
      props[name] = {{"mmse", mixture_mmse(mx)},
                     {"map_material_mmse", mx.components[map].mu},
                     {"aleatoric", u.aleatoric},
                     {"epistemic", u.epistemic},
                     {"between_class", u.between_class},
                     {"total", u.total},
                     {"evidence_weight", evidence}};
    }
    s["properties"] = std::move(props);
    segs.push_back(std::move(s));
  }
  out["segments"] = std::move(segs);
  return out;
}

bool operator==(const FusionSession& a, const FusionSession& b) {
  return a.library_ == b.library_ && a.config_.lambda == b.config_.lambda && a.config_.alpha0 == b.config_.alpha0 &&
         a.config_.backend == b.config_.backend && a.counters_ == b.counters_ && a.segments_ == b.segments_;
}

FusionSession fuse_stream(FusionSession session, std::span<const ObservationRecord> records) {
  for (const auto& r : records) session.absorb(r);
  return session;
}

FusionSession fuse_parsed(FusionSession session, const ParseResult& parsed) {
  session.count_rejected(parsed.rejected_lines + parsed.rejected_candidates);
  return fuse_stream(std::move(session), parsed.records);
}

}  // namespace physfuse
