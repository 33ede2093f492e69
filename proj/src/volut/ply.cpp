#include "volut/ply.hpp"

#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "volut/error.hpp"

namespace volut {
namespace {

static_assert(std::endian::native == std::endian::little,
              "binary PLY and wire codecs assume a little-endian host");

enum class ScalarType { kInt8, kUint8, kInt16, kUint16, kInt32, kUint32, kFloat32, kFloat64 };

std::optional<ScalarType> parse_scalar_type(std::string_view name) {
  if (name == "char" || name == "int8") return ScalarType::kInt8;
  if (name == "uchar" || name == "uint8") return ScalarType::kUint8;
  if (name == "short" || name == "int16") return ScalarType::kInt16;
  if (name == "ushort" || name == "uint16") return ScalarType::kUint16;
  if (name == "int" || name == "int32") return ScalarType::kInt32;
  if (name == "uint" || name == "uint32") return ScalarType::kUint32;
  if (name == "float" || name == "float32") return ScalarType::kFloat32;
  if (name == "double" || name == "float64") return ScalarType::kFloat64;
  return std::nullopt;
}

std::size_t scalar_size(ScalarType t) {
  switch (t) {
    case ScalarType::kInt8:
    case ScalarType::kUint8: return 1;
    case ScalarType::kInt16:
    case ScalarType::kUint16: return 2;
    case ScalarType::kInt32:
    case ScalarType::kUint32:
    case ScalarType::kFloat32: return 4;
    case ScalarType::kFloat64: return 8;
  }
  return 0;
}

struct Property {
  std::string name;
  ScalarType type = ScalarType::kFloat32;
  bool is_list = false;
  ScalarType count_type = ScalarType::kUint8;
};

struct Element {
  std::string name;
  std::size_t count = 0;
  std::vector<Property> properties;
};

[[noreturn]] void format_error(std::size_t offset, const std::string& what) {
  fail(ErrorCode::kFormat,
       "ply: " + what + " (at byte offset " + std::to_string(offset) + ")");
}

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

double read_binary(const char* p, ScalarType t) {
  switch (t) {
    case ScalarType::kInt8: { std::int8_t v; std::memcpy(&v, p, 1); return v; }
    case ScalarType::kUint8: { std::uint8_t v; std::memcpy(&v, p, 1); return v; }
    case ScalarType::kInt16: { std::int16_t v; std::memcpy(&v, p, 2); return v; }
    case ScalarType::kUint16: { std::uint16_t v; std::memcpy(&v, p, 2); return v; }
    case ScalarType::kInt32: { std::int32_t v; std::memcpy(&v, p, 4); return v; }
    case ScalarType::kUint32: { std::uint32_t v; std::memcpy(&v, p, 4); return v; }
    case ScalarType::kFloat32: { float v; std::memcpy(&v, p, 4); return v; }
    case ScalarType::kFloat64: { double v; std::memcpy(&v, p, 8); return v; }
  }
  return 0.0;
}

struct Header {
  bool binary = false;
  std::vector<Element> elements;
  std::size_t body_offset = 0;
};

Header parse_header(std::string_view bytes) {
  Header h;
  std::size_t pos = 0;
  bool saw_format = false;
  bool first = true;
  while (true) {
    const std::size_t eol = bytes.find('\n', pos);
    if (eol == std::string_view::npos) format_error(pos, "unterminated header");
    const std::string_view line = bytes.substr(pos, eol - pos);
    const auto tok = split_ws(line);
    const std::size_t line_offset = pos;
    pos = eol + 1;
    if (first) {
      if (tok.size() != 1 || tok[0] != "ply") format_error(line_offset, "missing 'ply' magic");
      first = false;
      continue;
    }
    if (tok.empty()) continue;
    if (tok[0] == "end_header") break;
    if (tok[0] == "comment" || tok[0] == "obj_info") continue;
    if (tok[0] == "format") {
      if (tok.size() != 3 || tok[2] != "1.0") format_error(line_offset, "malformed format line");
      if (tok[1] == "ascii") {
        h.binary = false;
      } else if (tok[1] == "binary_little_endian") {
        h.binary = true;
      } else {
        format_error(line_offset, "unsupported format '" + std::string(tok[1]) + "'");
      }
      saw_format = true;
    } else if (tok[0] == "element") {
      if (tok.size() != 3) format_error(line_offset, "malformed element line");
      Element e;
      e.name = std::string(tok[1]);
      const auto res = std::from_chars(tok[2].data(), tok[2].data() + tok[2].size(), e.count);
      if (res.ec != std::errc{} || res.ptr != tok[2].data() + tok[2].size())
        format_error(line_offset, "bad element count");
      h.elements.push_back(std::move(e));
    } else if (tok[0] == "property") {
      if (h.elements.empty()) format_error(line_offset, "property before any element");
      Property p;
      if (tok.size() == 5 && tok[1] == "list") {
        const auto ct = parse_scalar_type(tok[2]);
        const auto vt = parse_scalar_type(tok[3]);
        if (!ct || !vt) format_error(line_offset, "unsupported list property type");
        p.is_list = true;
        p.count_type = *ct;
        p.type = *vt;
        p.name = std::string(tok[4]);
      } else if (tok.size() == 3) {
        const auto t = parse_scalar_type(tok[1]);
        if (!t) format_error(line_offset, "unsupported property type '" + std::string(tok[1]) + "'");
        p.type = *t;
        p.name = std::string(tok[2]);
      } else {
        format_error(line_offset, "malformed property line");
      }
      h.elements.back().properties.push_back(std::move(p));
    } else {
      format_error(line_offset, "unknown header keyword '" + std::string(tok[0]) + "'");
    }
  }
  if (!saw_format) format_error(0, "missing format line");
  h.body_offset = pos;
  return h;
}

struct VertexLayout {
  int x = -1, y = -1, z = -1, r = -1, g = -1, b = -1;
  bool colors() const { return r >= 0 && g >= 0 && b >= 0; }
};

VertexLayout vertex_layout(const Element& e, std::size_t header_offset) {
  VertexLayout l;
  for (std::size_t i = 0; i < e.properties.size(); ++i) {
    const Property& p = e.properties[i];
    const int idx = static_cast<int>(i);
    auto expect_float = [&] {
      if (p.is_list || (p.type != ScalarType::kFloat32 && p.type != ScalarType::kFloat64))
        format_error(header_offset, "vertex property '" + p.name + "' must be float or double");
    };
    auto expect_uchar = [&] {
      if (p.is_list || p.type != ScalarType::kUint8)
        format_error(header_offset, "vertex property '" + p.name + "' must be uchar");
    };
    if (p.name == "x") { expect_float(); l.x = idx; }
    else if (p.name == "y") { expect_float(); l.y = idx; }
    else if (p.name == "z") { expect_float(); l.z = idx; }
    else if (p.name == "red") { expect_uchar(); l.r = idx; }
    else if (p.name == "green") { expect_uchar(); l.g = idx; }
    else if (p.name == "blue") { expect_uchar(); l.b = idx; }
  }
  if (l.x < 0 || l.y < 0 || l.z < 0)
    format_error(header_offset, "vertex element lacks x, y, z properties");
  return l;
}

class BinaryCursor {
 public:
  BinaryCursor(std::string_view bytes, std::size_t pos) : bytes_(bytes), pos_(pos) {}

  const char* take(std::size_t n, const char* what) {
    if (bytes_.size() - pos_ < n) format_error(pos_, std::string("truncated payload while reading ") + what);
    const char* p = bytes_.data() + pos_;
    pos_ += n;
    return p;
  }
  std::size_t offset() const { return pos_; }

 private:
  std::string_view bytes_;
  std::size_t pos_;
};

class AsciiCursor {
 public:
  AsciiCursor(std::string_view bytes, std::size_t pos) : bytes_(bytes), pos_(pos) {}

  double next(const char* what) {
    while (pos_ < bytes_.size() && std::isspace(static_cast<unsigned char>(bytes_[pos_]))) ++pos_;
    if (pos_ >= bytes_.size()) format_error(pos_, std::string("truncated payload while reading ") + what);
    double v = 0.0;
    const char* begin = bytes_.data() + pos_;
    const auto res = std::from_chars(begin, bytes_.data() + bytes_.size(), v);
    if (res.ec != std::errc{}) format_error(pos_, std::string("malformed number for ") + what);
    pos_ += static_cast<std::size_t>(res.ptr - begin);
    return v;
  }
  float next_float(const char* what) {
    while (pos_ < bytes_.size() && std::isspace(static_cast<unsigned char>(bytes_[pos_]))) ++pos_;
    if (pos_ >= bytes_.size()) format_error(pos_, std::string("truncated payload while reading ") + what);
    float v = 0.0f;
    const char* begin = bytes_.data() + pos_;
    const auto res = std::from_chars(begin, bytes_.data() + bytes_.size(), v);
    if (res.ec != std::errc{}) format_error(pos_, std::string("malformed number for ") + what);
    pos_ += static_cast<std::size_t>(res.ptr - begin);
    return v;
  }
  std::size_t offset() const { return pos_; }

 private:
  std::string_view bytes_;
  std::size_t pos_;
};

}  // namespace

PointCloud parse_ply(std::string_view bytes) {
  const Header h = parse_header(bytes);
  std::size_t vertex_element = h.elements.size();
  for (std::size_t i = 0; i < h.elements.size(); ++i) {
    if (h.elements[i].name == "vertex") {
      vertex_element = i;
      break;
    }
  }
  if (vertex_element == h.elements.size()) format_error(h.body_offset, "no vertex element");
  const Element& ve = h.elements[vertex_element];
  const VertexLayout layout = vertex_layout(ve, h.body_offset);

  std::vector<Vec3> positions;
  std::vector<Rgb> colors;
  positions.reserve(ve.count);
  if (layout.colors()) colors.reserve(ve.count);
  std::vector<double> values(ve.properties.size());

  if (h.binary) {
    BinaryCursor cur(bytes, h.body_offset);
    auto skip_element = [&](const Element& e) {
      for (std::size_t n = 0; n < e.count; ++n) {
        for (const Property& p : e.properties) {
          if (p.is_list) {
            const auto count = static_cast<std::size_t>(read_binary(cur.take(scalar_size(p.count_type), "list count"), p.count_type));
            cur.take(count * scalar_size(p.type), "list payload");
          } else {
            cur.take(scalar_size(p.type), "property");
          }
        }
      }
    };
    for (std::size_t i = 0; i < vertex_element; ++i) skip_element(h.elements[i]);
    for (std::size_t n = 0; n < ve.count; ++n) {
      for (std::size_t k = 0; k < ve.properties.size(); ++k) {
        const Property& p = ve.properties[k];
        if (p.is_list) {
          const auto count = static_cast<std::size_t>(read_binary(cur.take(scalar_size(p.count_type), "list count"), p.count_type));
          cur.take(count * scalar_size(p.type), "list payload");
          continue;
        }
        const char* raw = cur.take(scalar_size(p.type), "vertex property");
        if (p.type == ScalarType::kFloat32) {
          float f;
          std::memcpy(&f, raw, 4);
          values[k] = f;
        } else {
          values[k] = read_binary(raw, p.type);
        }
      }
      positions.push_back({static_cast<float>(values[layout.x]), static_cast<float>(values[layout.y]),
                           static_cast<float>(values[layout.z])});
      if (layout.colors()) {
        colors.push_back({static_cast<std::uint8_t>(values[layout.r]), static_cast<std::uint8_t>(values[layout.g]),
                          static_cast<std::uint8_t>(values[layout.b])});
      }
    }
  } else {
    AsciiCursor cur(bytes, h.body_offset);
    auto skip_element = [&](const Element& e) {
      for (std::size_t n = 0; n < e.count; ++n) {
        for (const Property& p : e.properties) {
          if (p.is_list) {
            const auto count = static_cast<std::size_t>(cur.next("list count"));
            for (std::size_t c = 0; c < count; ++c) cur.next("list entry");
          } else {
            cur.next("property");
          }
        }
      }
    };
    for (std::size_t i = 0; i < vertex_element; ++i) skip_element(h.elements[i]);
    std::vector<float> fvalues(ve.properties.size());
    for (std::size_t n = 0; n < ve.count; ++n) {
      for (std::size_t k = 0; k < ve.properties.size(); ++k) {
        const Property& p = ve.properties[k];
        if (p.is_list) {
          const auto count = static_cast<std::size_t>(cur.next("list count"));
          for (std::size_t c = 0; c < count; ++c) cur.next("list entry");
        } else if (p.type == ScalarType::kFloat32) {
          fvalues[k] = cur.next_float("vertex property");
          values[k] = fvalues[k];
        } else {
          values[k] = cur.next("vertex property");
        }
      }
      positions.push_back({static_cast<float>(values[layout.x]), static_cast<float>(values[layout.y]),
                           static_cast<float>(values[layout.z])});
      if (layout.colors()) {
        for (int c : {layout.r, layout.g, layout.b}) {
          if (values[c] < 0.0 || values[c] > 255.0)
            format_error(cur.offset(), "color value out of uchar range");
        }
        colors.push_back({static_cast<std::uint8_t>(values[layout.r]), static_cast<std::uint8_t>(values[layout.g]),
                          static_cast<std::uint8_t>(values[layout.b])});
      }
    }
  }
  try {
    return PointCloud(std::move(positions), std::move(colors));
  } catch (const Error& e) {
    fail(ErrorCode::kFormat, std::string("ply: ") + e.what());
  }
}

PointCloud load_ply(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIo, "ply: cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  const std::string bytes = ss.str();
  return parse_ply(bytes);
}

std::string write_ply(const PointCloud& cloud, PlyFormat format) {
  std::string out;
  out += "ply\n";
  out += format == PlyFormat::kAscii ? "format ascii 1.0\n" : "format binary_little_endian 1.0\n";
  out += "element vertex " + std::to_string(cloud.size()) + "\n";
  out += "property float x\nproperty float y\nproperty float z\n";
  if (cloud.has_colors()) out += "property uchar red\nproperty uchar green\nproperty uchar blue\n";
  out += "end_header\n";

  if (format == PlyFormat::kBinary) {
    const std::size_t stride = 12 + (cloud.has_colors() ? 3 : 0);
    const std::size_t base = out.size();
    out.resize(base + stride * cloud.size());
    char* p = out.data() + base;
    for (std::size_t i = 0; i < cloud.size(); ++i) {
      const Vec3& v = cloud.position(i);
      std::memcpy(p, &v.x, 4);
      std::memcpy(p + 4, &v.y, 4);
      std::memcpy(p + 8, &v.z, 4);
      p += 12;
      if (cloud.has_colors()) {
        const Rgb& c = cloud.color(i);
        p[0] = static_cast<char>(c.r);
        p[1] = static_cast<char>(c.g);
        p[2] = static_cast<char>(c.b);
        p += 3;
      }
    }
    return out;
  }

  char buf[32];
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const Vec3& v = cloud.position(i);
    for (int a = 0; a < 3; ++a) {
      // Shortest round-trip representation keeps ASCII files bit-exact too.
      const auto res = std::to_chars(buf, buf + sizeof(buf), v[a]);
      out.append(buf, res.ptr);
      out += a < 2 ? ' ' : (cloud.has_colors() ? ' ' : '\n');
    }
    if (cloud.has_colors()) {
      const Rgb& c = cloud.color(i);
      out += std::to_string(c.r) + ' ' + std::to_string(c.g) + ' ' + std::to_string(c.b) + '\n';
    }
  }
  return out;
}

void save_ply(const PointCloud& cloud, const std::filesystem::path& path, PlyFormat format) {
  const std::string bytes = write_ply(cloud, format);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::kIo, "ply: cannot open " + path.string() + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(ErrorCode::kIo, "ply: write failed for " + path.string());
}

}  // namespace volut
