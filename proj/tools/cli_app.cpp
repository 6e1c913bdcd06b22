#include "cli_app.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "physfuse/error.hpp"
#include "physfuse/metrics.hpp"
#include "physfuse/observations_io.hpp"
#include "physfuse/point_cloud.hpp"
#include "physfuse/property_field.hpp"
#include "physfuse/session.hpp"
#include "physfuse/synthetic.hpp"

namespace physfuse::cli {

namespace {

using nlohmann::json;

/// A flag that may also be supplied by the JSON config file.
struct Bound {
  CLI::Option* option;
  std::string key;
  std::function<void(const json&)> assign;
};

struct Context {
  std::istream& in;
  std::ostream& out;
  std::ostream& err;
  std::set<std::string> given;  // config keys set by flag or config file

  [[nodiscard]] bool has(const std::string& key) const { return given.count(key) != 0; }
};

/// "--voxel-edge" -> "voxel_edge"; positional aliases use their long name.
std::string key_of(const std::string& names) {
  std::string best;
  std::stringstream ss(names);
  for (std::string part; std::getline(ss, part, ',');) {
    if (part.rfind("--", 0) == 0) {
      best = part.substr(2);
      break;
    }
    if (part[0] != '-') best = part;
  }
  std::replace(best.begin(), best.end(), '-', '_');
  return best;
}

class Binder {
 public:
  Binder(CLI::App* app, std::vector<Bound>& bound) : app_(app), bound_(bound) {}

  template <class T>
  CLI::Option* add(const std::string& names, T& var, const std::string& help) {
    CLI::Option* opt = app_->add_option(names, var, help);
    const std::string key = key_of(names);
    bound_.push_back({opt, key, [&var, key](const json& j) {
                        try {
                          var = j.get<T>();
                        } catch (const json::exception&) {
                          throw ValidationError("config key '" + key + "' has the wrong type");
                        }
                      }});
    return opt;
  }

  CLI::Option* flag(const std::string& names, bool& var, const std::string& help) {
    CLI::Option* opt = app_->add_flag(names, var, help);
    const std::string key = key_of(names);
    bound_.push_back({opt, key, [&var, key](const json& j) {
                        if (!j.is_boolean()) throw ValidationError("config key '" + key + "' must be a boolean");
                        var = j.get<bool>();
                      }});
    return opt;
  }

 private:
  CLI::App* app_;
  std::vector<Bound>& bound_;
};

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open '" + path + "'");
  std::string data((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  if (f.bad()) throw IoError("read failure on '" + path + "'");
  return data;
}

void write_file(const std::string& path, const std::string& data) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot write '" + path + "'");
  f << data;
  f.flush();
  if (!f) throw IoError("write failure on '" + path + "'");
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

void require(const Context& ctx, const std::string& value, const std::string& key) {
  if (value.empty() && !ctx.has(key)) {
    std::string flag = key;
    std::replace(flag.begin(), flag.end(), '_', '-');
    throw ValidationError("missing required option --" + flag);
  }
}

FusionSession load_snapshot(const std::string& path) { return FusionSession::restore(read_file(path)); }

SplatEncoding parse_encoding(const std::string& s) {
  if (s == "linear") return SplatEncoding::linear;
  if (s == "gaussian-splatting" || s == "gaussian_splatting") return SplatEncoding::gaussian_splatting;
  throw ValidationError("unknown --ply-encoding '" + s + "' (expected linear|gaussian-splatting)");
}

PointCloud load_points(const Context& ctx, const std::string& path, const std::string& encoding) {
  PointCloud cloud = load_point_cloud(path, parse_encoding(encoding));
  for (const auto& w : cloud.warnings) ctx.err << "warning: " << path << ": " << w << "\n";
  return cloud;
}

std::vector<double> parse_alpha0(const std::string& s, std::size_t k) {
  if (s == "uniform") return {};
  if (s == "jeffreys") return std::vector<double>(k, 0.5);
  std::vector<double> out;
  std::stringstream ss(s);
  for (std::string part; std::getline(ss, part, ',');) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(part, &used));
      if (used != part.size()) throw std::invalid_argument(part);
    } catch (const std::exception&) {
      throw ValidationError("--alpha0 must be 'uniform', 'jeffreys' or a comma-separated list of numbers");
    }
  }
  return out;
}

json interval_json(const Interval& iv) { return json::array({iv.lower, iv.upper}); }

// ---------------------------------------------------------------- fuse

struct FuseOptions {
  std::string observations;
  std::string library;
  double lambda = 1.0;
  std::string alpha0 = "uniform";
  std::string backend = "nig";
  double epsilon = 0.0;
  double prior_kappa = 0.0;
  double prior_alpha = 0.0;
  std::string snapshot;
  std::string report;
};

MaterialLibrary library_with_overrides(const Context& ctx, const FuseOptions& o) {
  MaterialLibrary lib = MaterialLibrary::load(o.library);
  if (!ctx.has("epsilon") && !ctx.has("prior_kappa") && !ctx.has("prior_alpha")) return lib;
  json j = lib.to_json();
  if (ctx.has("epsilon")) {
    if (!(o.epsilon > 0.0)) throw ValidationError("--epsilon must be positive");
    for (auto& [_, p] : j["properties"].items()) p["epsilon"] = o.epsilon;
  }
  for (auto& [_, props] : j["priors"].items()) {
    for (auto& [__, p] : props.items()) {
      if (ctx.has("prior_kappa")) p["kappa"] = o.prior_kappa;
      if (ctx.has("prior_alpha")) p["alpha"] = o.prior_alpha;
    }
  }
  return MaterialLibrary::from_json(j);
}

int cmd_fuse(Context& ctx, const FuseOptions& o) {
  require(ctx, o.observations, "observations");
  require(ctx, o.library, "library");
  MaterialLibrary lib = library_with_overrides(ctx, o);
  FusionConfig cfg;
  cfg.lambda = o.lambda;
  cfg.alpha0 = parse_alpha0(o.alpha0, lib.size());
  cfg.backend = parse_backend(o.backend);
  FusionSession session(std::move(lib), std::move(cfg));

  const ParseResult parsed =
      o.observations == "-" ? parse_observations(ctx.in, "<stdin>") : parse_observations_file(o.observations);
  json issues = json::array();
  for (const auto& e : parsed.errors) {
    ctx.err << o.observations << ":" << e.line;
    if (e.candidate) ctx.err << " candidate " << *e.candidate;
    ctx.err << ": " << e.message << "\n";
    json ij = {{"line", e.line}, {"message", e.message}};
    if (e.candidate) ij["candidate"] = *e.candidate;
    issues.push_back(std::move(ij));
  }
  session = fuse_parsed(std::move(session), parsed);

  json report = session.report();
  report["parse_errors"] = std::move(issues);
  if (!o.snapshot.empty()) write_file(o.snapshot, session.snapshot());
  const std::string text = dump(report);
  if (!o.report.empty()) write_file(o.report, text);
  ctx.out << text;
  return 0;
}

// ---------------------------------------------------------------- query

struct QueryOptions {
  std::string snapshot;
  std::string segment;
  std::string property;
  std::string points;
  std::size_t point_index = 0;
  std::string ply_encoding = "linear";
  double level = 0.9;
};

json segment_query(const FusionSession& session, const SegmentState& seg, const std::vector<std::string>& props,
                   double level) {
  const auto& lib = session.library();
  json j;
  j["map_material"] = lib.classes()[seg.classes.map_class()];
  json post = json::object();
  const auto w = seg.classes.class_posterior();
  for (std::size_t i = 0; i < w.size(); ++i) post[lib.classes()[i]] = w[i];
  j["class_posterior"] = std::move(post);
  j["observations"] = seg.observations;
  json pj = json::object();
  for (const auto& name : props) {
    const MixturePredictive mx = session.mixture(seg, name);
    const UncertaintyReport u = session.uncertainty(seg, name);
    pj[name] = {{"mmse", mixture_mmse(mx)},
                {"map_material_mmse", mx.components[seg.classes.map_class()].mu},
                {"level", level},
                {"interval", interval_json(central_interval(mx, level))},
                {"aleatoric", u.aleatoric},
                {"epistemic", u.epistemic},
                {"between_class", u.between_class},
                {"total", u.total},
                {"units", lib.property(name)->units}};
  }
  j["properties"] = std::move(pj);
  return j;
}

int cmd_query(Context& ctx, const QueryOptions& o) {
  require(ctx, o.snapshot, "snapshot");
  if (!(o.level > 0.0 && o.level < 1.0)) throw ValidationError("--level must lie in (0,1)");
  const FusionSession session = load_snapshot(o.snapshot);
  std::vector<std::string> props;
  if (!o.property.empty()) {
    if (session.library().property(o.property) == nullptr)
      throw ValidationError("unknown property '" + o.property + "'");
    props.push_back(o.property);
  } else {
    for (const auto& p : session.library().properties()) props.push_back(p.name);
  }

  std::string segment_id = o.segment;
  json j;
  if (!o.points.empty()) {
    if (!ctx.has("point_index")) throw ValidationError("--points needs --point-index");
    PointCloud cloud = load_points(ctx, o.points, o.ply_encoding);
    const SemanticPointField field(std::move(cloud.points), session);
    if (o.point_index >= field.points().size())
      throw ValidationError("point index " + std::to_string(o.point_index) + " out of range");
    if (!field.labeled(o.point_index)) throw ValidationError("point " + std::to_string(o.point_index) + " is unlabeled");
    segment_id = field.points()[o.point_index].segment_id;
    j["point_index"] = o.point_index;
    j["position"] = field.points()[o.point_index].position;
  } else if (segment_id.empty()) {
    throw ValidationError("query needs --segment or --points with --point-index");
  }
  const SegmentState* seg = session.find_segment(segment_id);
  if (seg == nullptr) throw ValidationError("no belief for segment '" + segment_id + "'");
  json q = segment_query(session, *seg, props, o.level);
  q["segment_id"] = segment_id;
  j.update(q);
  ctx.out << dump(j);
  return 0;
}

// ---------------------------------------------------------------- voxelize / mass

struct FieldOptions {
  std::string snapshot;
  std::string points;
  std::string property = "density";
  std::string ply_encoding = "linear";
  double voxel_edge = 0.0;
  double voxel_divisor = 0.0;
  double occupancy_threshold = 0.05;
  std::string output;
  std::string material_map;
};

struct LoadedField {
  FusionSession session;
  SemanticPointField field;
  VoxelizeOptions options;
};

LoadedField load_field(Context& ctx, const FieldOptions& o) {
  require(ctx, o.snapshot, "snapshot");
  require(ctx, o.points, "points");
  if (ctx.has("voxel_edge") && ctx.has("voxel_divisor"))
    throw ValidationError("--voxel-edge and --voxel-divisor are mutually exclusive");
  FusionSession session = load_snapshot(o.snapshot);
  PointCloud cloud = load_points(ctx, o.points, o.ply_encoding);
  SemanticPointField field(std::move(cloud.points), session);
  if (field.points().empty()) throw ValidationError("point cloud '" + o.points + "' is empty");
  VoxelizeOptions vo;
  vo.occupancy_threshold = o.occupancy_threshold;
  if (ctx.has("voxel_edge")) {
    if (!(o.voxel_edge > 0.0)) throw ValidationError("--voxel-edge must be positive");
    vo.voxel_edge = o.voxel_edge;
  } else if (ctx.has("voxel_divisor")) {
    if (!(o.voxel_divisor > 0.0)) throw ValidationError("--voxel-divisor must be positive");
    const Aabb& b = field.bounds();
    const double extent = std::max({b.max[0] - b.min[0], b.max[1] - b.min[1], b.max[2] - b.min[2]});
    if (!(extent > 0.0)) throw ValidationError("point cloud has zero extent; pass --voxel-edge");
    vo.voxel_edge = extent / o.voxel_divisor;
  }
  if (field.unlabeled_count() > 0)
    ctx.err << "note: " << field.unlabeled_count() << " unlabeled point(s) excluded\n";
  return {std::move(session), std::move(field), vo};
}

json colored_points_json(const std::vector<ColoredPoint>& pts) {
  json arr = json::array();
  for (const auto& p : pts)
    arr.push_back({{"position", p.position}, {"color", {p.color.r, p.color.g, p.color.b}}, {"labeled", p.labeled}});
  return {{"points", std::move(arr)}};
}

int cmd_voxelize(Context& ctx, const FieldOptions& o) {
  const LoadedField lf = load_field(ctx, o);
  const VoxelGrid grid = voxelize(lf.field, o.property, lf.options);
  json j = grid.to_json();
  j["unlabeled_points"] = lf.field.unlabeled_count();
  if (!o.material_map.empty()) write_file(o.material_map, dump(colored_points_json(export_material_map(lf.field))));
  if (!o.output.empty()) {
    write_file(o.output, dump(j));
    ctx.out << dump({{"output", o.output},
                     {"occupied_voxels", grid.cells.size()},
                     {"dims", grid.dims},
                     {"edge", grid.voxel_edge}});
  } else {
    ctx.out << dump(j);
  }
  return 0;
}

int cmd_mass(Context& ctx, const FieldOptions& o) {
  const LoadedField lf = load_field(ctx, o);
  if (lf.session.library().property("density") == nullptr)
    throw ValidationError("snapshot has no density beliefs; mass needs a 'density' property");
  const VoxelGrid grid = voxelize(lf.field, "density", lf.options);
  const MassEstimate m = integrate_mass(grid);
  ctx.out << dump({{"mass_kg", m.mass_kg},
                   {"uncertainty_kg", std::sqrt(m.variance_kg2)},
                   {"variance_kg2", m.variance_kg2},
                   {"occupied_voxels", m.occupied_voxels},
                   {"unlabeled_points", lf.field.unlabeled_count()},
                   {"parameters",
                    {{"voxel_edge", grid.voxel_edge},
                     {"occupancy_threshold", grid.occupancy_threshold},
                     {"backend", std::string(to_string(lf.session.config().backend))},
                     {"dims", grid.dims},
                     {"origin", grid.origin}}}});
  return 0;
}

// ---------------------------------------------------------------- eval

struct EvalOptions {
  std::string pairs;
  std::string table;
  std::string summary;
};

int cmd_eval(Context& ctx, const EvalOptions& o) {
  require(ctx, o.pairs, "pairs");
  std::vector<EvalPair> pairs;
  if (o.pairs == "-") {
    pairs = read_pairs_csv(ctx.in);
  } else {
    std::ifstream f(o.pairs);
    if (!f) throw IoError("cannot open pairs file '" + o.pairs + "'");
    try {
      pairs = read_pairs_csv(f);
    } catch (const ValidationError& e) {
      throw ValidationError(o.pairs + ": " + e.what());
    }
  }
  const MetricReport report = evaluate(pairs);
  if (!o.table.empty()) {
    std::ostringstream ss;
    report.write_table_csv(ss);
    write_file(o.table, ss.str());
  }
  const std::string text = dump(report.summary_json());
  if (!o.summary.empty()) write_file(o.summary, text);
  ctx.out << text;
  return 0;
}

// ---------------------------------------------------------------- simulate

struct SimulateOptions {
  std::string scene;
  std::size_t views = 0;
  std::uint64_t seed = 0;
  std::string observations;
  std::string truth;
  std::string points;
};

int cmd_simulate(Context& ctx, const SimulateOptions& o) {
  require(ctx, o.scene, "scene");
  SceneSpec spec = SceneSpec::load(o.scene);
  if (ctx.has("views")) spec.views = o.views;
  if (ctx.has("seed")) spec.seed = o.seed;
  const Scene scene = sample_scene(spec);
  const auto lines = emit_observations(scene, spec.views);

  std::string jsonl;
  for (const auto& line : lines) jsonl += to_json(line).dump() + "\n";
  if (!o.truth.empty()) write_file(o.truth, dump(scene.truth_json()));
  if (!o.points.empty()) {
    std::ostringstream ss;
    if (o.points.ends_with(".json")) {
      write_point_cloud_json(ss, scene.splats());
    } else {
      write_ply(ss, scene.splats(), true);
    }
    write_file(o.points, ss.str());
  }
  if (o.observations.empty() || o.observations == "-") {
    ctx.out << jsonl;
    return 0;
  }
  write_file(o.observations, jsonl);
  json summary = {{"observations", o.observations},
                  {"lines", lines.size()},
                  {"segments", scene.segments.size()},
                  {"views", spec.views},
                  {"seed", spec.seed}};
  const json truth = scene.truth_json();
  if (truth.contains("analytic_mass_kg")) summary["analytic_mass_kg"] = truth["analytic_mass_kg"];
  ctx.out << dump(summary);
  return 0;
}

// ---------------------------------------------------------------- inspect-snapshot

struct InspectOptions {
  std::string snapshot;
  bool report = false;
};

int cmd_inspect(Context& ctx, const InspectOptions& o) {
  require(ctx, o.snapshot, "snapshot");
  const FusionSession session = load_snapshot(o.snapshot);
  const json full = session.snapshot_json();
  json ids = json::array();
  for (const auto& [id, _] : session.segments()) ids.push_back(id);
  json props = json::array();
  for (const auto& p : session.library().properties()) props.push_back(p.name);
  json j = {{"format", full["format"]},
            {"version", full["version"]},
            {"classes", session.library().classes()},
            {"properties", std::move(props)},
            {"config", full["config"]},
            {"counters", full["counters"]},
            {"segment_count", session.segments().size()},
            {"segment_ids", std::move(ids)}};
  if (o.report) j["report"] = session.report();
  ctx.out << dump(j);
  return 0;
}

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::validation:
      return 2;
    case ErrorKind::io:
      return 3;
    case ErrorKind::domain:
      return 4;
  }
  return 1;
}

const char* kind_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::validation:
      return "validation";
    case ErrorKind::io:
      return "io";
    case ErrorKind::domain:
      return "domain";
  }
  return "internal";
}

int report_error(std::ostream& err, const char* kind, int code, const std::string& message) {
  err << json{{"error", {{"kind", kind}, {"exit_code", code}, {"message", message}}}}.dump() << "\n";
  return code;
}

std::string version_text() {
  return std::string("physfuse ") + kToolVersion + "\nobservation schema " +
         std::to_string(kObservationSchemaVersion) + "\nsnapshot version " + std::to_string(kSnapshotVersion);
}

}  // namespace

int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err) {
  CLI::App app{"Probabilistic fusion of per-view material observations into 3D physical property fields"};
  app.name("physfuse");
  app.set_version_flag("--version", version_text(), "Print tool and schema versions");
  app.require_subcommand(1);
  app.fallthrough();
  std::string config_path;
  app.add_option("--config", config_path, "JSON config; keys mirror long flag names (dashes as underscores); flags win");

  Context ctx{in, out, err, {}};
  std::map<CLI::App*, std::vector<Bound>> bindings;

  FuseOptions fuse;
  CLI::App* fuse_cmd = app.add_subcommand("fuse", "Fuse observation JSONL into a session snapshot and report");
  {
    Binder b(fuse_cmd, bindings[fuse_cmd]);
    b.add("observations,--observations", fuse.observations, "Observation JSONL ('-' for stdin)");
    b.add("--library", fuse.library, "Material library JSON");
    b.add("--lambda", fuse.lambda, "Class evidence scale");
    b.add("--alpha0", fuse.alpha0, "Class prior: uniform, jeffreys, or comma-separated concentrations");
    b.add("--backend", fuse.backend, "Per-class posterior backend: nig or moments");
    b.add("--epsilon", fuse.epsilon, "Variance floor applied to every property");
    b.add("--prior-kappa", fuse.prior_kappa, "Override every prior's kappa");
    b.add("--prior-alpha", fuse.prior_alpha, "Override every prior's alpha (> 1)");
    b.add("--snapshot", fuse.snapshot, "Write the session snapshot here");
    b.add("--report", fuse.report, "Also write the report here");
  }

  QueryOptions query;
  CLI::App* query_cmd = app.add_subcommand("query", "Query a segment or a point of a fused snapshot");
  {
    Binder b(query_cmd, bindings[query_cmd]);
    b.add("--snapshot", query.snapshot, "Session snapshot");
    b.add("--segment", query.segment, "Segment id");
    b.add("--property", query.property, "Property name (default: all)");
    b.add("--points", query.points, "Point cloud (.ply or .json) for point queries");
    b.add("--point-index", query.point_index, "Point index within --points");
    b.add("--ply-encoding", query.ply_encoding, "PLY scale/opacity encoding: linear or gaussian-splatting");
    b.add("--level", query.level, "Central credible interval level");
  }

  FieldOptions vox;
  CLI::App* vox_cmd = app.add_subcommand("voxelize", "Rasterize a property field onto a sparse voxel grid");
  FieldOptions mass;
  CLI::App* mass_cmd = app.add_subcommand("mass", "Integrate density over the occupied volume");
  for (auto [cmd, opts] : {std::pair{vox_cmd, &vox}, std::pair{mass_cmd, &mass}}) {
    Binder b(cmd, bindings[cmd]);
    b.add("--snapshot", opts->snapshot, "Session snapshot");
    b.add("--points", opts->points, "Point cloud (.ply or .json), positions in meters");
    b.add("--ply-encoding", opts->ply_encoding, "PLY scale/opacity encoding: linear or gaussian-splatting");
    b.add("--voxel-edge", opts->voxel_edge, "Voxel edge in meters (default: max extent / 64)");
    b.add("--voxel-divisor", opts->voxel_divisor, "Voxel edge = max point extent / divisor");
    b.add("--occupancy-threshold", opts->occupancy_threshold, "Minimum splat influence for occupancy");
    if (cmd == vox_cmd) {
      b.add("--property", opts->property, "Property to rasterize");
      b.add("--output", opts->output, "Write the grid JSON here instead of stdout");
      b.add("--material-map", opts->material_map, "Write MAP-material colored points (JSON) here");
    }
  }

  EvalOptions eval;
  CLI::App* eval_cmd = app.add_subcommand("eval", "Score predictions against ground truth");
  {
    Binder b(eval_cmd, bindings[eval_cmd]);
    b.add("pairs,--pairs", eval.pairs, "CSV with header id,ground_truth,prediction ('-' for stdin)");
    b.add("--table", eval.table, "Write per-item metrics CSV here");
    b.add("--summary", eval.summary, "Also write the summary JSON here");
  }

  SimulateOptions sim;
  CLI::App* sim_cmd = app.add_subcommand("simulate", "Sample a synthetic scene and emit observations");
  {
    Binder b(sim_cmd, bindings[sim_cmd]);
    b.add("scene,--scene", sim.scene, "Scene spec JSON");
    b.add("--views", sim.views, "Number of views (overrides the scene spec)");
    b.add("--seed", sim.seed, "RNG seed (overrides the scene spec)");
    b.add("--observations", sim.observations, "Write observation JSONL here (default: stdout)");
    b.add("--truth", sim.truth, "Write scene truth JSON here");
    b.add("--points", sim.points, "Write splats here (.ply binary or .json)");
  }

  InspectOptions inspect;
  CLI::App* inspect_cmd = app.add_subcommand("inspect-snapshot", "Summarize a session snapshot");
  {
    Binder b(inspect_cmd, bindings[inspect_cmd]);
    b.add("snapshot,--snapshot", inspect.snapshot, "Session snapshot");
    b.flag("--report", inspect.report, "Include the full per-segment report");
  }

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    CLI::App* active = app.get_subcommands().front();
    auto& bound = bindings[active];
    json cfg = json::object();
    if (!config_path.empty()) {
      cfg = json::parse(read_file(config_path), nullptr, false);
      if (cfg.is_discarded() || !cfg.is_object())
        throw ValidationError("config '" + config_path + "' is not a JSON object");
      std::set<std::string> known;
      for (const auto& [_, list] : bindings)
        for (const auto& bd : list) known.insert(bd.key);
      for (const auto& [key, _] : cfg.items())
        if (known.count(key) == 0) throw ValidationError("config '" + config_path + "': unknown key '" + key + "'");
    }
    for (const auto& bd : bound) {
      if (bd.option->count() > 0) {
        ctx.given.insert(bd.key);
      } else if (cfg.contains(bd.key)) {
        bd.assign(cfg.at(bd.key));
        ctx.given.insert(bd.key);
      }
    }

    if (active == fuse_cmd) return cmd_fuse(ctx, fuse);
    if (active == query_cmd) return cmd_query(ctx, query);
    if (active == vox_cmd) return cmd_voxelize(ctx, vox);
    if (active == mass_cmd) return cmd_mass(ctx, mass);
    if (active == eval_cmd) return cmd_eval(ctx, eval);
    if (active == sim_cmd) return cmd_simulate(ctx, sim);
    return cmd_inspect(ctx, inspect);
  } catch (const Error& e) {
    return report_error(err, kind_name(e.kind()), exit_code(e.kind()), e.what());
  } catch (const json::exception& e) {
    return report_error(err, "validation", 2, e.what());
  } catch (const std::exception& e) {
    return report_error(err, "internal", 1, e.what());
  }
}

}  // namespace physfuse::cli
