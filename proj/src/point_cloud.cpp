#include "physfuse/point_cloud.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "json.hpp"
#include "physfuse/error.hpp"

namespace physfuse {

namespace {

enum class Scalar { i8, u8, i16, u16, i32, u32, f32, f64 };

Scalar scalar_from_name(const std::string& t) {
  if (t == "char" || t == "int8") return Scalar::i8;
  if (t == "uchar" || t == "uint8") return Scalar::u8;
  if (t == "short" || t == "int16") return Scalar::i16;
  if (t == "ushort" || t == "uint16") return Scalar::u16;
  if (t == "int" || t == "int32") return Scalar::i32;
  if (t == "uint" || t == "uint32") return Scalar::u32;
  if (t == "float" || t == "float32") return Scalar::f32;
  if (t == "double" || t == "float64") return Scalar::f64;
  throw ValidationError("PLY: unknown property type '" + t + "'");
}

std::size_t scalar_size(Scalar s) {
  switch (s) {
    case Scalar::i8:
    case Scalar::u8: return 1;
    case Scalar::i16:
    case Scalar::u16: return 2;
    case Scalar::i32:
    case Scalar::u32:
    case Scalar::f32: return 4;
    case Scalar::f64: return 8;
  }
  return 0;
}

template <typename T>
T load_le(const unsigned char* p) {
  T v;
  std::memcpy(&v, p, sizeof(T));
  static_assert(std::endian::native == std::endian::little, "big-endian hosts are not supported");
  return v;
}

double decode(Scalar s, const unsigned char* p) {
  switch (s) {
    case Scalar::i8: return load_le<std::int8_t>(p);
    case Scalar::u8: return load_le<std::uint8_t>(p);
    case Scalar::i16: return load_le<std::int16_t>(p);
    case Scalar::u16: return load_le<std::uint16_t>(p);
    case Scalar::i32: return load_le<std::int32_t>(p);
    case Scalar::u32: return load_le<std::uint32_t>(p);
    case Scalar::f32: return load_le<float>(p);
    case Scalar::f64: return load_le<double>(p);
  }
  return 0.0;
}

struct PlyProperty {
  std::string name;
  Scalar type = Scalar::f32;
  bool is_list = false;
  Scalar count_type = Scalar::u8;
};

struct PlyElement {
  std::string name;
  std::size_t count = 0;
  std::vector<PlyProperty> properties;
};

double read_binary_scalar(std::istream& in, Scalar s) {
  unsigned char buf[8];
  if (!in.read(reinterpret_cast<char*>(buf), static_cast<std::streamsize>(scalar_size(s))))
    throw ValidationError("PLY: unexpected end of binary data");
  return decode(s, buf);
}

std::string segment_from_number(double v, std::size_t vertex) {
  if (!std::isfinite(v) || v != std::floor(v) || std::abs(v) > 9.0e15)
    throw ValidationError("PLY vertex " + std::to_string(vertex) + ": segment_id must be an integer");
  if (v < 0) return {};
  return std::to_string(static_cast<long long>(v));
}

void check_point(const SplatPoint& p, std::size_t index) {
  const std::string where = "point " + std::to_string(index);
  for (double c : p.position)
    if (!std::isfinite(c)) throw ValidationError(where + ": position must be finite");
  for (double s : p.scale)
    if (!(s > 0.0) || !std::isfinite(s)) throw ValidationError(where + ": scale components must be positive");
  if (!(p.opacity >= 0.0 && p.opacity <= 1.0)) throw ValidationError(where + ": opacity must lie in [0,1]");
}

}  // namespace

PointCloud read_ply(std::istream& in, SplatEncoding encoding) {
  std::string line;
  if (!std::getline(in, line) || (line != "ply" && line != "ply\r")) throw ValidationError("PLY: missing magic");
  bool binary = false;
  bool have_format = false;
  std::vector<PlyElement> elements;
  while (true) {
    if (!std::getline(in, line)) throw ValidationError("PLY: header not terminated");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream ls(line);
    std::string word;
    ls >> word;
    if (word == "end_header") break;
    if (word == "comment" || word == "obj_info" || word.empty()) continue;
    if (word == "format") {
      std::string fmt;
      ls >> fmt;
      if (fmt == "ascii") {
        binary = false;
      } else if (fmt == "binary_little_endian") {
        binary = true;
      } else {
        throw ValidationError("PLY: unsupported format '" + fmt + "'");
      }
      have_format = true;
    } else if (word == "element") {
      PlyElement e;
      long long n = -1;
      ls >> e.name >> n;
      if (!ls || n < 0) throw ValidationError("PLY: malformed element line");
      e.count = static_cast<std::size_t>(n);
      elements.push_back(std::move(e));
    } else if (word == "property") {
      if (elements.empty()) throw ValidationError("PLY: property before any element");
      PlyProperty p;
      std::string type;
      ls >> type;
      if (type == "list") {
        std::string count_type, item_type;
        ls >> count_type >> item_type >> p.name;
        p.is_list = true;
        p.count_type = scalar_from_name(count_type);
        p.type = scalar_from_name(item_type);
      } else {
        p.type = scalar_from_name(type);
        ls >> p.name;
      }
      if (p.name.empty()) throw ValidationError("PLY: property without a name");
      elements.back().properties.push_back(std::move(p));
    } else {
      throw ValidationError("PLY: unexpected header line '" + line + "'");
    }
  }
  if (!have_format) throw ValidationError("PLY: missing format line");

  PointCloud cloud;
  for (const auto& element : elements) {
    const bool is_vertex = element.name == "vertex";
    int ix = -1, iy = -1, iz = -1, is0 = -1, is1 = -1, is2 = -1, iop = -1, iseg = -1;
    if (is_vertex) {
      bool rotation = false;
      for (std::size_t k = 0; k < element.properties.size(); ++k) {
        const auto& n = element.properties[k].name;
        const int ki = static_cast<int>(k);
        if (n == "x") ix = ki;
        else if (n == "y") iy = ki;
        else if (n == "z") iz = ki;
        else if (n == "scale_0") is0 = ki;
        else if (n == "scale_1") is1 = ki;
        else if (n == "scale_2") is2 = ki;
        else if (n == "opacity") iop = ki;
        else if (n == "segment_id") iseg = ki;
        else if (n.starts_with("rot_")) rotation = true;
      }
      for (auto [idx, name] : {std::pair{ix, "x"}, {iy, "y"}, {iz, "z"}, {is0, "scale_0"}, {is1, "scale_1"},
                               {is2, "scale_2"}, {iop, "opacity"}, {iseg, "segment_id"}}) {
        if (idx < 0) throw ValidationError(std::string("PLY: vertex element lacks property '") + name + "'");
        if (element.properties[static_cast<std::size_t>(idx)].is_list)
          throw ValidationError(std::string("PLY: property '") + name + "' must be a scalar");
      }
      if (rotation) cloud.warnings.push_back("rotation columns ignored; influence uses axis-aligned scales");
      cloud.points.reserve(std::min<std::size_t>(element.count, 1u << 20));
    }

    std::vector<double> row(element.properties.size());
    for (std::size_t v = 0; v < element.count; ++v) {
      if (binary) {
        for (std::size_t k = 0; k < element.properties.size(); ++k) {
          const auto& p = element.properties[k];
          if (p.is_list) {
            const double n = read_binary_scalar(in, p.count_type);
            if (n < 0 || n > 1e6) throw ValidationError("PLY: bad list length");
            for (long long i = 0; i < static_cast<long long>(n); ++i) read_binary_scalar(in, p.type);
            row[k] = 0.0;
          } else {
            row[k] = read_binary_scalar(in, p.type);
          }
        }
      } else {
        if (!std::getline(in, line)) throw ValidationError("PLY: unexpected end of ascii data");
        if (!is_vertex) continue;
        std::istringstream ls(line);
        for (std::size_t k = 0; k < element.properties.size(); ++k) {
          const auto& p = element.properties[k];
          std::string tok;
          if (p.is_list) {
            long long n = 0;
            if (!(ls >> n) || n < 0) throw ValidationError("PLY: bad list length");
            for (long long i = 0; i < n; ++i) ls >> tok;
            row[k] = 0.0;
            continue;
          }
          if (!(ls >> tok)) throw ValidationError("PLY: vertex " + std::to_string(v) + " has too few values");
          try {
            std::size_t used = 0;
            row[k] = std::stod(tok, &used);
            if (used != tok.size()) throw std::invalid_argument(tok);
          } catch (const std::exception&) {
            throw ValidationError("PLY: vertex " + std::to_string(v) + ": bad number '" + tok + "'");
          }
        }
      }
      if (!is_vertex) continue;
      SplatPoint pt;
      pt.position = {row[static_cast<std::size_t>(ix)], row[static_cast<std::size_t>(iy)],
                     row[static_cast<std::size_t>(iz)]};
      pt.scale = {row[static_cast<std::size_t>(is0)], row[static_cast<std::size_t>(is1)],
                  row[static_cast<std::size_t>(is2)]};
      pt.opacity = row[static_cast<std::size_t>(iop)];
      if (encoding == SplatEncoding::gaussian_splatting) {
        for (auto& s : pt.scale) s = std::exp(s);
        pt.opacity = 1.0 / (1.0 + std::exp(-pt.opacity));
      }
      pt.segment_id = segment_from_number(row[static_cast<std::size_t>(iseg)], v);
      check_point(pt, v);
      cloud.points.push_back(std::move(pt));
    }
    if (is_vertex) return cloud;
  }
  throw ValidationError("PLY: no vertex element");
}

PointCloud read_point_cloud_json(std::istream& in) {
  nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw ValidationError("point cloud JSON is malformed");
  auto pts = j.find("points");
  if (pts == j.end() || !pts->is_array()) throw ValidationError("point cloud JSON needs a 'points' array");
  PointCloud cloud;
  for (std::size_t i = 0; i < pts->size(); ++i) {
    const auto& pj = (*pts)[i];
    const std::string where = "point " + std::to_string(i);
    auto vec3 = [&](const char* key, Vec3 fallback, bool required) {
      auto it = pj.find(key);
      if (it == pj.end()) {
        if (required) throw ValidationError(where + ": missing '" + key + "'");
        return fallback;
      }
      if (!it->is_array() || it->size() != 3) throw ValidationError(where + ": '" + key + "' must have 3 numbers");
      Vec3 v{};
      for (std::size_t k = 0; k < 3; ++k) {
        if (!(*it)[k].is_number()) throw ValidationError(where + ": '" + key + "' must have 3 numbers");
        v[k] = (*it)[k].get<double>();
      }
      return v;
    };
    if (!pj.is_object()) throw ValidationError(where + ": expected an object");
    SplatPoint p;
    p.position = vec3("position", {}, true);
    p.scale = vec3("scale", {}, true);
    auto op = pj.find("opacity");
    if (op == pj.end() || !op->is_number()) throw ValidationError(where + ": missing numeric 'opacity'");
    p.opacity = op->get<double>();
    auto seg = pj.find("segment_id");
    if (seg == pj.end() || seg->is_null()) {
      p.segment_id.clear();
    } else if (seg->is_string()) {
      p.segment_id = seg->get<std::string>();
    } else if (seg->is_number_integer()) {
      const auto n = seg->get<long long>();
      p.segment_id = n < 0 ? std::string() : std::to_string(n);
    } else {
      throw ValidationError(where + ": 'segment_id' must be a string, integer or null");
    }
    check_point(p, i);
    cloud.points.push_back(std::move(p));
  }
  return cloud;
}

PointCloud load_point_cloud(const std::string& path, SplatEncoding encoding) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open point cloud '" + path + "'");
  try {
    if (path.ends_with(".json")) return read_point_cloud_json(in);
    return read_ply(in, encoding);
  } catch (const ValidationError& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

void write_ply(std::ostream& out, const std::vector<SplatPoint>& points, bool binary) {
  std::vector<std::int32_t> ids;
  ids.reserve(points.size());
  for (const auto& p : points) {
    if (p.segment_id.empty()) {
      ids.push_back(-1);
      continue;
    }
    std::size_t used = 0;
    long long v = 0;
    try {
      v = std::stoll(p.segment_id, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != p.segment_id.size() || v < 0 || v > INT32_MAX)
      throw ValidationError("PLY export needs integer segment ids, got '" + p.segment_id + "'");
    ids.push_back(static_cast<std::int32_t>(v));
  }

  out << "ply\n" << (binary ? "format binary_little_endian 1.0\n" : "format ascii 1.0\n");
  out << "element vertex " << points.size() << "\n";
  for (const char* n : {"x", "y", "z", "scale_0", "scale_1", "scale_2", "opacity"})
    out << "property double " << n << "\n";
  out << "property int segment_id\nend_header\n";
  if (binary) {
    for (std::size_t i = 0; i < points.size(); ++i) {
      const auto& p = points[i];
      const double vals[7] = {p.position[0], p.position[1], p.position[2], p.scale[0],
                              p.scale[1],    p.scale[2],    p.opacity};
      out.write(reinterpret_cast<const char*>(vals), sizeof(vals));
      out.write(reinterpret_cast<const char*>(&ids[i]), sizeof(std::int32_t));
    }
  } else {
    out.precision(17);
    for (std::size_t i = 0; i < points.size(); ++i) {
      const auto& p = points[i];
      out << p.position[0] << ' ' << p.position[1] << ' ' << p.position[2] << ' ' << p.scale[0] << ' '
          << p.scale[1] << ' ' << p.scale[2] << ' ' << p.opacity << ' ' << ids[i] << '\n';
    }
  }
  if (!out) throw IoError("failed writing PLY output");
}

void write_point_cloud_json(std::ostream& out, const std::vector<SplatPoint>& points) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& p : points) {
    nlohmann::json pj{{"position", p.position}, {"scale", p.scale}, {"opacity", p.opacity}};
    pj["segment_id"] = p.segment_id.empty() ? nlohmann::json(nullptr) : nlohmann::json(p.segment_id);
    arr.push_back(std::move(pj));
  }
  out << nlohmann::json{{"points", std::move(arr)}}.dump() << "\n";
  if (!out) throw IoError("failed writing point cloud JSON");
}

}  // namespace physfuse
