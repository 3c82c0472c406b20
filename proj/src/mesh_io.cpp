#include "tacpose/mesh_io.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace tacpose {

static_assert(std::endian::native == std::endian::little, "binary formats assume a little-endian host");

namespace {

std::string lower_ext(const std::filesystem::path& p) {
  std::string e = p.extension().string();
  std::transform(e.begin(), e.end(), e.begin(), [](unsigned char c) { return std::tolower(c); });
  return e;
}

long parse_obj_index(const std::string& token) {
  const auto slash = token.find('/');
  return std::stol(token.substr(0, slash));
}

}  // namespace

TriMesh load_obj(const std::filesystem::path& path, double scale) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open mesh: " + path.string());
  std::vector<Vec3> verts;
  std::vector<Triangle> tris;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ss(line);
    std::string tag;
    if (!(ss >> tag)) continue;
    if (tag == "v") {
      double x, y, z;
      if (!(ss >> x >> y >> z)) throw std::runtime_error("malformed OBJ vertex: " + line);
      verts.emplace_back(scale * x, scale * y, scale * z);
    } else if (tag == "f") {
      std::vector<std::uint32_t> poly;
      std::string tok;
      while (ss >> tok) {
        long idx = parse_obj_index(tok);
        if (idx < 0) idx += static_cast<long>(verts.size()) + 1;
        if (idx < 1 || idx > static_cast<long>(verts.size())) {
          throw std::runtime_error("OBJ face index out of range: " + line);
        }
        poly.push_back(static_cast<std::uint32_t>(idx - 1));
      }
      for (std::size_t k = 1; k + 1 < poly.size(); ++k) tris.push_back({poly[0], poly[k], poly[k + 1]});
    }
  }
  return TriMesh::build(std::move(verts), std::move(tris));
}

namespace {

enum class PlyType { i8, u8, i16, u16, i32, u32, f32, f64 };

PlyType ply_type(const std::string& s) {
  if (s == "char" || s == "int8") return PlyType::i8;
  if (s == "uchar" || s == "uint8") return PlyType::u8;
  if (s == "short" || s == "int16") return PlyType::i16;
  if (s == "ushort" || s == "uint16") return PlyType::u16;
  if (s == "int" || s == "int32") return PlyType::i32;
  if (s == "uint" || s == "uint32") return PlyType::u32;
  if (s == "float" || s == "float32") return PlyType::f32;
  if (s == "double" || s == "float64") return PlyType::f64;
  throw std::runtime_error("unsupported PLY type: " + s);
}

std::size_t ply_size(PlyType t) {
  switch (t) {
    case PlyType::i8:
    case PlyType::u8: return 1;
    case PlyType::i16:
    case PlyType::u16: return 2;
    case PlyType::i32:
    case PlyType::u32:
    case PlyType::f32: return 4;
    case PlyType::f64: return 8;
  }
  return 0;
}

double read_ply_value(std::istream& in, PlyType t) {
  unsigned char buf[8];
  in.read(reinterpret_cast<char*>(buf), static_cast<std::streamsize>(ply_size(t)));
  if (!in) throw std::runtime_error("truncated PLY body");
  switch (t) {
    case PlyType::i8: { std::int8_t v; std::memcpy(&v, buf, 1); return v; }
    case PlyType::u8: return buf[0];
    case PlyType::i16: { std::int16_t v; std::memcpy(&v, buf, 2); return v; }
    case PlyType::u16: { std::uint16_t v; std::memcpy(&v, buf, 2); return v; }
    case PlyType::i32: { std::int32_t v; std::memcpy(&v, buf, 4); return v; }
    case PlyType::u32: { std::uint32_t v; std::memcpy(&v, buf, 4); return v; }
    case PlyType::f32: { float v; std::memcpy(&v, buf, 4); return v; }
    case PlyType::f64: { double v; std::memcpy(&v, buf, 8); return v; }
  }
  return 0.0;
}

struct PlyProperty {
  std::string name;
  bool is_list = false;
  PlyType count_type = PlyType::u8;
  PlyType type = PlyType::f32;
};

struct PlyElement {
  std::string name;
  std::size_t count = 0;
  std::vector<PlyProperty> props;
};

}  // namespace

TriMesh load_ply(const std::filesystem::path& path, double scale) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open mesh: " + path.string());
  std::string line;
  std::getline(in, line);
  if (line.rfind("ply", 0) != 0) throw std::runtime_error("not a PLY file: " + path.string());
  std::vector<PlyElement> elements;
  bool binary_le = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream ss(line);
    std::string tag;
    ss >> tag;
    if (tag == "format") {
      std::string fmt;
      ss >> fmt;
      binary_le = fmt == "binary_little_endian";
    } else if (tag == "element") {
      PlyElement e;
      ss >> e.name >> e.count;
      elements.push_back(e);
    } else if (tag == "property") {
      if (elements.empty()) throw std::runtime_error("PLY property before element");
      PlyProperty p;
      std::string t;
      ss >> t;
      if (t == "list") {
        std::string ct, it;
        ss >> ct >> it >> p.name;
        p.is_list = true;
        p.count_type = ply_type(ct);
        p.type = ply_type(it);
      } else {
        p.type = ply_type(t);
        ss >> p.name;
      }
      elements.back().props.push_back(p);
    } else if (tag == "end_header") {
      break;
    }
  }
  if (!binary_le) throw std::runtime_error("only binary_little_endian PLY is supported");

  std::vector<Vec3> verts;
  std::vector<Triangle> tris;
  for (const auto& e : elements) {
    for (std::size_t i = 0; i < e.count; ++i) {
      Vec3 p = Vec3::Zero();
      for (const auto& prop : e.props) {
        if (prop.is_list) {
          const auto n = static_cast<std::size_t>(read_ply_value(in, prop.count_type));
          std::vector<std::uint32_t> idx(n);
          for (auto& x : idx) x = static_cast<std::uint32_t>(read_ply_value(in, prop.type));
          if (e.name == "face" && (prop.name == "vertex_indices" || prop.name == "vertex_index")) {
            for (std::size_t k = 1; k + 1 < n; ++k) tris.push_back({idx[0], idx[k], idx[k + 1]});
          }
        } else {
          const double v = read_ply_value(in, prop.type);
          if (e.name == "vertex") {
            if (prop.name == "x") p.x() = v;
            else if (prop.name == "y") p.y() = v;
            else if (prop.name == "z") p.z() = v;
          }
        }
      }
      if (e.name == "vertex") verts.push_back(scale * p);
    }
  }
  return TriMesh::build(std::move(verts), std::move(tris));
}

TriMesh load_mesh(const std::filesystem::path& path, double scale) {
  const auto ext = lower_ext(path);
  if (ext == ".obj") return load_obj(path, scale);
  if (ext == ".ply") return load_ply(path, scale);
  throw std::runtime_error("unsupported mesh format: " + path.string());
}

TriMesh resolve_mesh(const std::string& spec, double scale) {
  const std::string prefix = "primitive:";
  if (spec.rfind(prefix, 0) == 0) return primitives::by_name(spec.substr(prefix.size())).scaled(scale);
  const auto names = primitives::suite_names();
  if (std::find(names.begin(), names.end(), spec) != names.end()) {
    return primitives::by_name(spec).scaled(scale);
  }
  return load_mesh(spec, scale);
}

void write_obj(const std::filesystem::path& path, const TriMesh& mesh) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write: " + path.string());
  out.precision(17);
  for (const auto& v : mesh.vertices()) out << "v " << v.x() << ' ' << v.y() << ' ' << v.z() << '\n';
  for (const auto& t : mesh.triangles()) out << "f " << t[0] + 1 << ' ' << t[1] + 1 << ' ' << t[2] + 1 << '\n';
}

void write_ply_points(const std::filesystem::path& path, std::span<const Vec3> points) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write: " + path.string());
  out << "ply\nformat binary_little_endian 1.0\nelement vertex " << points.size()
      << "\nproperty float x\nproperty float y\nproperty float z\nend_header\n";
  for (const auto& p : points) {
    const float xyz[3] = {static_cast<float>(p.x()), static_cast<float>(p.y()), static_cast<float>(p.z())};
    out.write(reinterpret_cast<const char*>(xyz), sizeof(xyz));
  }
}

}  // namespace tacpose
