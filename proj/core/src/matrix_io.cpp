#include "romswe/matrix_io.hpp"

#include <bit>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

namespace romswe {

namespace {

constexpr const char* kMagic = "romswe-bundle 1";

std::uint64_t to_little(std::uint64_t x) {
  if constexpr (std::endian::native == std::endian::big) {
    std::uint64_t r = 0;
    for (int i = 0; i < 8; ++i) r |= ((x >> (8 * i)) & 0xffu) << (8 * (7 - i));
    return r;
  }
  return x;
}

[[noreturn]] void corrupt(const std::string& msg) {
  throw LoadError(LoadErrorKind::corrupt_header, "corrupt header: " + msg);
}

}  // namespace

std::string format_double(double value) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

bool MatrixBundle::has(const std::string& name) const {
  for (const auto& [n, m] : matrices)
    if (n == name) return true;
  return false;
}

const Eigen::MatrixXd& MatrixBundle::matrix(const std::string& name) const {
  for (const auto& [n, m] : matrices)
    if (n == name) return m;
  throw LoadError(LoadErrorKind::dimension_mismatch, "bundle has no matrix named '" + name + "'");
}

void MatrixBundle::set(const std::string& key, double value) { meta[key] = format_double(value); }
void MatrixBundle::set(const std::string& key, long long value) { meta[key] = std::to_string(value); }

const std::string& MatrixBundle::get(const std::string& key) const {
  auto it = meta.find(key);
  if (it == meta.end()) corrupt("missing metadata key '" + key + "'");
  return it->second;
}

double MatrixBundle::get_double(const std::string& key) const {
  const std::string& s = get(key);
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) corrupt("bad number for '" + key + "'");
  return v;
}

long long MatrixBundle::get_int(const std::string& key) const {
  const std::string& s = get(key);
  long long v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) corrupt("bad integer for '" + key + "'");
  return v;
}

void save_bundle(const MatrixBundle& bundle, const std::filesystem::path& path) {
  std::ostringstream header;
  header << kMagic << "\n"
         << "dtype float64\nlayout column-major\nendianness little\n";
  for (const auto& [k, v] : bundle.meta) {
    if (k.find_first_of(" \n") != std::string::npos || v.find('\n') != std::string::npos)
      throw InvalidArgument("metadata key/value contains a separator: " + k);
    header << "meta " << k << " " << v << "\n";
  }
  for (const auto& [name, m] : bundle.matrices) {
    if (name.find_first_of(" \n") != std::string::npos)
      throw InvalidArgument("matrix name contains whitespace: " + name);
    header << "matrix " << name << " " << m.rows() << " " << m.cols() << "\n";
  }
  header << "end\n";

  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw LoadError(LoadErrorKind::io, "cannot open " + tmp.string() + " for writing");
    const std::string h = header.str();
    out.write(h.data(), static_cast<std::streamsize>(h.size()));
    std::vector<char> buf;
    for (const auto& [name, m] : bundle.matrices) {
      buf.resize(static_cast<std::size_t>(m.size()) * 8);
      for (Eigen::Index i = 0; i < m.size(); ++i) {
        const std::uint64_t bits = to_little(std::bit_cast<std::uint64_t>(m.data()[i]));
        std::memcpy(buf.data() + 8 * i, &bits, 8);
      }
      out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    }
    if (!out) throw LoadError(LoadErrorKind::io, "write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

MatrixBundle load_bundle(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError(LoadErrorKind::io, "cannot open " + path.string());

  std::string line;
  if (!std::getline(in, line) || line != kMagic) corrupt("bad magic line");

  MatrixBundle bundle;
  std::vector<std::tuple<std::string, Eigen::Index, Eigen::Index>> layout;
  bool saw_dtype = false, saw_layout = false, saw_endian = false, ended = false;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    if (tag == "end") {
      ended = true;
      break;
    } else if (tag == "dtype") {
      std::string v;
      ls >> v;
      if (v != "float64") corrupt("unsupported dtype " + v);
      saw_dtype = true;
    } else if (tag == "layout") {
      std::string v;
      ls >> v;
      if (v != "column-major") corrupt("unsupported layout " + v);
      saw_layout = true;
    } else if (tag == "endianness") {
      std::string v;
      ls >> v;
      if (v != "little") corrupt("unsupported endianness " + v);
      saw_endian = true;
    } else if (tag == "meta") {
      std::string key;
      ls >> key;
      if (key.empty()) corrupt("meta line without key");
      std::string value;
      std::getline(ls >> std::ws, value);
      bundle.meta[key] = value;
    } else if (tag == "matrix") {
      std::string name;
      long long rows = -1, cols = -1;
      if (!(ls >> name >> rows >> cols) || rows < 0 || cols < 0) corrupt("bad matrix line '" + line + "'");
      layout.emplace_back(name, rows, cols);
    } else {
      corrupt("unknown header line '" + line + "'");
    }
  }
  if (!ended) corrupt("missing 'end' line");
  if (!saw_dtype || !saw_layout || !saw_endian) corrupt("missing dtype/layout/endianness");

  const std::streampos payload_start = in.tellg();
  in.seekg(0, std::ios::end);
  const std::streamoff available = in.tellg() - payload_start;
  in.seekg(payload_start);
  std::streamoff expected = 0;
  for (const auto& [name, r, c] : layout) expected += static_cast<std::streamoff>(r) * c * 8;
  if (available != expected)
    throw LoadError(LoadErrorKind::truncated_payload,
                    "payload of " + path.string() + " has " + std::to_string(available) +
                        " bytes but the header declares " + std::to_string(expected));

  std::vector<char> buf;
  for (const auto& [name, r, c] : layout) {
    Eigen::MatrixXd m(r, c);
    buf.resize(static_cast<std::size_t>(m.size()) * 8);
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!in) throw LoadError(LoadErrorKind::truncated_payload, "short read in " + path.string());
    for (Eigen::Index i = 0; i < m.size(); ++i) {
      std::uint64_t bits = 0;
      std::memcpy(&bits, buf.data() + 8 * i, 8);
      m.data()[i] = std::bit_cast<double>(to_little(bits));
    }
    bundle.add(name, std::move(m));
  }
  return bundle;
}

}  // namespace romswe
