#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "romswe/error.hpp"

namespace romswe {

/// Named dense matrices plus string metadata, persisted as a text header
/// followed by a raw little-endian float64 column-major payload.
///
///     romswe-bundle 1
///     dtype float64
///     layout column-major
///     endianness little
///     meta <key> <value>          (zero or more)
///     matrix <name> <rows> <cols> (zero or more, payload order)
///     end
///     <payload bytes>
struct MatrixBundle {
  std::map<std::string, std::string> meta;
  std::vector<std::pair<std::string, Eigen::MatrixXd>> matrices;

  void add(std::string name, Eigen::MatrixXd m) { matrices.emplace_back(std::move(name), std::move(m)); }
  bool has(const std::string& name) const;
  const Eigen::MatrixXd& matrix(const std::string& name) const;

  void set(const std::string& key, double value);
  void set(const std::string& key, long long value);
  void set(const std::string& key, std::string value) { meta[key] = std::move(value); }
  double get_double(const std::string& key) const;
  long long get_int(const std::string& key) const;
  const std::string& get(const std::string& key) const;
};

enum class LoadErrorKind { io, corrupt_header, dimension_mismatch, truncated_payload };

class LoadError : public Error {
public:
  LoadError(LoadErrorKind kind, const std::string& what) : Error(what), kind_(kind) {}
  LoadErrorKind kind() const { return kind_; }

private:
  LoadErrorKind kind_;
};

/// Writes to `<path>.tmp` and renames over `path`.
void save_bundle(const MatrixBundle& bundle, const std::filesystem::path& path);
MatrixBundle load_bundle(const std::filesystem::path& path);

/// Shortest decimal text that parses back to the identical double.
std::string format_double(double value);

}  // namespace romswe
