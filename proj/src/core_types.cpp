#include "physfuse/core_types.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "physfuse/error.hpp"

namespace physfuse {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double bound_from_json(const nlohmann::json& j, double fallback) {
  if (j.is_null()) return fallback;
  if (!j.is_number()) throw ValidationError("support bounds must be numbers or null");
  return j.get<double>();
}

nlohmann::json bound_to_json(double v) {
  if (std::isinf(v)) return nullptr;
  return v;
}

// Evenly spaced hues; used when a library omits colors.
Rgb palette_color(std::size_t i) {
  const double hue = std::fmod(static_cast<double>(i) * 0.618033988749895, 1.0) * 6.0;
  const double x = 1.0 - std::abs(std::fmod(hue, 2.0) - 1.0);
  double r = 0, g = 0, b = 0;
  switch (static_cast<int>(hue)) {
    case 0: r = 1; g = x; break;
    case 1: r = x; g = 1; break;
    case 2: g = 1; b = x; break;
    case 3: g = x; b = 1; break;
    case 4: r = x; b = 1; break;
    default: r = 1; b = x; break;
  }
  auto to8 = [](double c) { return static_cast<std::uint8_t>(std::lround(40 + 200 * c)); };
  return {to8(r), to8(g), to8(b)};
}

double number_field(const nlohmann::json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_number())
    throw ValidationError(where + ": missing numeric field '" + key + "'");
  return it->get<double>();
}

}  // namespace

NigPrior default_prior(double nominal, double epsilon) {
  NigPrior p;
  p.tau = nominal;
  p.kappa = 1e-3;
  p.alpha = 2.0;
  const double sd = 0.1 * std::abs(nominal) + epsilon;
  p.beta = sd * sd * (p.alpha - 1.0);
  return p;
}

std::optional<PropertyKind> builtin_property(std::string_view name) {
  if (name == "density") return PropertyKind{"density", "kg/m^3", {0.0, kInf}, 1e-12};
  if (name == "friction") return PropertyKind{"friction", "", {0.0, kInf}, 1e-12};
  if (name == "hardness") return PropertyKind{"hardness", "Shore", {0.0, 100.0}, 1e-12};
  if (name == "stiffness") return PropertyKind{"stiffness", "lbf-in^2", {0.0, kInf}, 1e-12};
  return std::nullopt;
}

MaterialLibrary::MaterialLibrary(std::vector<std::string> classes,
                                 std::vector<PropertyKind> properties,
                                 std::map<std::pair<std::size_t, std::string>, NigPrior> priors,
                                 std::vector<Rgb> colors)
    : classes_(std::move(classes)),
      properties_(std::move(properties)),
      priors_(std::move(priors)),
      colors_(std::move(colors)) {
  if (classes_.empty()) throw ValidationError("material library needs at least one class");
  std::set<std::string> seen;
  for (const auto& c : classes_) {
    if (c.empty()) throw ValidationError("material class names must be non-empty");
    if (!seen.insert(c).second) throw ValidationError("duplicate material class '" + c + "'");
  }
  std::set<std::string> prop_names;
  for (const auto& p : properties_) {
    if (!prop_names.insert(p.name).second)
      throw ValidationError("duplicate property kind '" + p.name + "'");
    if (!(p.support.lower < p.support.upper))
      throw ValidationError("property '" + p.name + "': support lower bound must be below upper");
    if (!(p.epsilon > 0.0) || !std::isfinite(p.epsilon))
      throw ValidationError("property '" + p.name + "': epsilon must be positive");
  }
  for (std::size_t i = 0; i < classes_.size(); ++i) {
    for (const auto& p : properties_) {
      auto it = priors_.find({i, p.name});
      if (it == priors_.end())
        throw ValidationError("no prior for material '" + classes_[i] + "', property '" + p.name + "'");
      const NigPrior& pr = it->second;
      const std::string where = "prior " + classes_[i] + "/" + p.name;
      if (!std::isfinite(pr.tau)) throw ValidationError(where + ": tau must be finite");
      if (!(pr.kappa > 0.0) || !std::isfinite(pr.kappa)) throw ValidationError(where + ": kappa must be > 0");
      if (!(pr.alpha > 1.0) || !std::isfinite(pr.alpha)) throw ValidationError(where + ": alpha must exceed 1");
      if (!(pr.beta > 0.0) || !std::isfinite(pr.beta)) throw ValidationError(where + ": beta must be > 0");
    }
  }
  for (const auto& [key, _] : priors_) {
    if (key.first >= classes_.size() || !prop_names.count(key.second))
      throw ValidationError("prior for unknown material/property pair");
  }
  if (colors_.empty()) {
    for (std::size_t i = 0; i < classes_.size(); ++i) colors_.push_back(palette_color(i));
  }
  if (colors_.size() != classes_.size())
    throw ValidationError("color list length must match class count");
}

MaterialLibrary MaterialLibrary::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ValidationError("material library must be a JSON object");
  auto cls = j.find("classes");
  if (cls == j.end() || !cls->is_array()) throw ValidationError("material library: 'classes' must be an array");
  std::vector<std::string> classes;
  for (const auto& c : *cls) {
    if (!c.is_string()) throw ValidationError("material library: class names must be strings");
    classes.push_back(c.get<std::string>());
  }

  const nlohmann::json priors_j = j.value("priors", nlohmann::json::object());
  if (!priors_j.is_object()) throw ValidationError("material library: 'priors' must be an object");

  std::vector<PropertyKind> properties;
  if (auto pj = j.find("properties"); pj != j.end()) {
    if (!pj->is_object()) throw ValidationError("material library: 'properties' must be an object");
    for (const auto& [name, spec] : pj->items()) {
      PropertyKind kind = builtin_property(name).value_or(PropertyKind{name, "", {}, 1e-12});
      if (!spec.is_object()) throw ValidationError("property '" + name + "' must be an object");
      if (auto u = spec.find("units"); u != spec.end() && u->is_string()) kind.units = u->get<std::string>();
      if (auto s = spec.find("support"); s != spec.end()) {
        if (!s->is_array() || s->size() != 2) throw ValidationError("property '" + name + "': support must be [lo, hi]");
        kind.support.lower = bound_from_json((*s)[0], -kInf);
        kind.support.upper = bound_from_json((*s)[1], kInf);
      }
      if (auto e = spec.find("epsilon"); e != spec.end()) {
        if (!e->is_number()) throw ValidationError("property '" + name + "': epsilon must be a number");
        kind.epsilon = e->get<double>();
      }
      properties.push_back(std::move(kind));
    }
  } else {
    std::set<std::string> names;
    for (const auto& [_, per_prop] : priors_j.items())
      if (per_prop.is_object())
        for (const auto& [name, __] : per_prop.items()) names.insert(name);
    for (const auto& name : names)
      properties.push_back(builtin_property(name).value_or(PropertyKind{name, "", {}, 1e-12}));
  }

  std::map<std::pair<std::size_t, std::string>, NigPrior> priors;
  for (const auto& [material, per_prop] : priors_j.items()) {
    auto idx = std::find(classes.begin(), classes.end(), material);
    if (idx == classes.end()) throw ValidationError("priors given for unknown material '" + material + "'");
    if (!per_prop.is_object()) throw ValidationError("priors for '" + material + "' must be an object");
    const auto ci = static_cast<std::size_t>(idx - classes.begin());
    for (const auto& [prop, spec] : per_prop.items()) {
      auto kind = std::find_if(properties.begin(), properties.end(),
                               [&](const PropertyKind& k) { return k.name == prop; });
      if (kind == properties.end())
        throw ValidationError("prior for undeclared property '" + prop + "'");
      const std::string where = "prior " + material + "/" + prop;
      NigPrior p;
      if (spec.is_number()) {
        p = default_prior(spec.get<double>(), kind->epsilon);
      } else if (spec.is_object()) {
        if (spec.contains("nominal")) {
          p = default_prior(number_field(spec, "nominal", where), kind->epsilon);
        } else {
          p.tau = number_field(spec, "tau", where);
        }
        if (spec.contains("kappa")) p.kappa = number_field(spec, "kappa", where);
        if (spec.contains("alpha")) p.alpha = number_field(spec, "alpha", where);
        if (spec.contains("beta")) {
          p.beta = number_field(spec, "beta", where);
        } else {
          const double sd = 0.1 * std::abs(p.tau) + kind->epsilon;
          p.beta = sd * sd * (p.alpha - 1.0);
        }
      } else {
        throw ValidationError(where + ": expected a number or an object");
      }
      priors[{ci, prop}] = p;
    }
  }

  std::vector<Rgb> colors;
  if (auto cj = j.find("colors"); cj != j.end()) {
    if (!cj->is_object()) throw ValidationError("material library: 'colors' must be an object");
    colors.resize(classes.size());
    std::vector<bool> given(classes.size(), false);
    for (const auto& [material, rgb] : cj->items()) {
      auto idx = std::find(classes.begin(), classes.end(), material);
      if (idx == classes.end()) throw ValidationError("color given for unknown material '" + material + "'");
      if (!rgb.is_array() || rgb.size() != 3) throw ValidationError("color for '" + material + "' must be [r,g,b]");
      std::array<std::uint8_t, 3> c{};
      for (std::size_t k = 0; k < 3; ++k) {
        if (!rgb[k].is_number_integer() || rgb[k].get<long long>() < 0 || rgb[k].get<long long>() > 255)
          throw ValidationError("color components for '" + material + "' must be integers in [0,255]");
        c[k] = static_cast<std::uint8_t>(rgb[k].get<int>());
      }
      const auto ci = static_cast<std::size_t>(idx - classes.begin());
      colors[ci] = {c[0], c[1], c[2]};
      given[ci] = true;
    }
    for (std::size_t i = 0; i < classes.size(); ++i)
      if (!given[i]) colors[i] = palette_color(i);
  }
  return MaterialLibrary(std::move(classes), std::move(properties), std::move(priors), std::move(colors));
}

MaterialLibrary MaterialLibrary::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open material library '" + path + "'");
  nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
  if (j.is_discarded()) throw ValidationError("material library '" + path + "' is not valid JSON");
  try {
    return from_json(j);
  } catch (const ValidationError& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

nlohmann::json MaterialLibrary::to_json() const {
  nlohmann::json j;
  j["classes"] = classes_;
  nlohmann::json props = nlohmann::json::object();
  for (const auto& p : properties_) {
    props[p.name] = {{"units", p.units},
                     {"support", {bound_to_json(p.support.lower), bound_to_json(p.support.upper)}},
                     {"epsilon", p.epsilon}};
  }
  j["properties"] = props;
  nlohmann::json priors = nlohmann::json::object();
  for (const auto& [key, p] : priors_) {
    priors[classes_[key.first]][key.second] = {
        {"tau", p.tau}, {"kappa", p.kappa}, {"alpha", p.alpha}, {"beta", p.beta}};
  }
  j["priors"] = priors;
  nlohmann::json colors = nlohmann::json::object();
  for (std::size_t i = 0; i < classes_.size(); ++i)
    colors[classes_[i]] = {colors_[i].r, colors_[i].g, colors_[i].b};
  j["colors"] = colors;
  return j;
}

std::optional<std::size_t> MaterialLibrary::index_of(std::string_view material) const {
  for (std::size_t i = 0; i < classes_.size(); ++i)
    if (classes_[i] == material) return i;
  return std::nullopt;
}

const PropertyKind* MaterialLibrary::property(std::string_view name) const {
  for (const auto& p : properties_)
    if (p.name == name) return &p;
  return nullptr;
}

const NigPrior& MaterialLibrary::prior(std::size_t class_index, const std::string& property) const {
  auto it = priors_.find({class_index, property});
  if (it == priors_.end())
    throw ValidationError("no prior for class " + std::to_string(class_index) + ", property '" + property + "'");
  return it->second;
}

bool operator==(const MaterialLibrary& a, const MaterialLibrary& b) {
  if (a.classes_ != b.classes_ || a.colors_ != b.colors_ || a.properties_.size() != b.properties_.size())
    return false;
  for (std::size_t i = 0; i < a.properties_.size(); ++i) {
    const auto& x = a.properties_[i];
    const auto& y = b.properties_[i];
    if (x.name != y.name || x.units != y.units || x.epsilon != y.epsilon ||
        x.support.lower != y.support.lower || x.support.upper != y.support.upper)
      return false;
  }
  if (a.priors_.size() != b.priors_.size()) return false;
  for (const auto& [key, p] : a.priors_) {
    auto it = b.priors_.find(key);
    if (it == b.priors_.end()) return false;
    const auto& q = it->second;
    if (p.tau != q.tau || p.kappa != q.kappa || p.alpha != q.alpha || p.beta != q.beta) return false;
  }
  return true;
}

Confidence::Confidence(double value) : value_(value) {
  if (!(value >= 0.0 && value <= 1.0)) {
    std::ostringstream os;
    os << "confidence " << value << " outside [0,1]";
    throw ValidationError(os.str());
  }
}

std::size_t ValidationReport::count(ViolationKind kind) const {
  std::size_t n = 0;
  for (const auto& v : violations) n += v.kind == kind;
  return n;
}

std::string ValidationReport::summary() const {
  std::string out;
  for (const auto& v : violations) {
    if (!out.empty()) out += "; ";
    out += v.message;
  }
  return out;
}

ValidationReport validate_observation(const Observation& obs, const MaterialLibrary& lib) {
  ValidationReport report;
  if (!(obs.confidence >= 0.0 && obs.confidence <= 1.0)) {
    std::ostringstream os;
    os << "confidence " << obs.confidence << " outside [0,1]";
    report.violations.push_back({ViolationKind::confidence_range, os.str()});
  }
  if (obs.class_index >= lib.size()) {
    report.violations.push_back(
        {ViolationKind::unknown_class,
         "class index " + std::to_string(obs.class_index) + " >= K=" + std::to_string(lib.size())});
  }
  for (const auto& [name, value] : obs.properties) {
    if (!std::isfinite(value)) {
      report.violations.push_back({ViolationKind::non_finite, "property '" + name + "' is not finite"});
      continue;
    }
    const PropertyKind* kind = lib.property(name);
    if (kind != nullptr && !kind->support.contains(value)) {
      std::ostringstream os;
      os << "property '" << name << "' value " << value << " outside support [" << kind->support.lower << ", "
         << kind->support.upper << "]";
      report.violations.push_back({ViolationKind::property_support, os.str()});
    }
  }
  return report;
}

nlohmann::json to_json(const Observation& obs) {
  nlohmann::json j{{"segment_id", obs.segment_id},
                   {"view_id", obs.view_id},
                   {"class_index", obs.class_index},
                   {"confidence", obs.confidence},
                   {"properties", obs.properties}};
  if (obs.caption) j["caption"] = *obs.caption;
  return j;
}

Observation observation_from_json(const nlohmann::json& j) {
  try {
    Observation obs;
    obs.segment_id = j.at("segment_id").get<std::string>();
    obs.view_id = j.at("view_id").get<std::string>();
    obs.class_index = j.at("class_index").get<std::size_t>();
    obs.confidence = j.at("confidence").get<double>();
    obs.properties = j.at("properties").get<std::map<std::string, double>>();
    if (j.contains("caption")) obs.caption = j.at("caption").get<std::string>();
    return obs;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed observation: ") + e.what());
  }
}

}  // namespace physfuse
